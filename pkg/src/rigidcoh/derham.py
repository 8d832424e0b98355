"""Truncated de Rham complexes of J^m-adic windows.

The level-m complex is the K-span of window generators tensored with the
exterior basis, taken modulo the *tail* subcomplex: the differential ideal
generated by m-fold products of relations,
``F_m = span{u R dx_I} + span{u dR ^ dx_J}``.  Coordinates are always those
of the ambient :class:`FormBasis` of the budget-enlarged window, so maps
between levels are identities on coordinates.

Cohomology in degree q is computed with two windows: cocycles come from the
small window, boundaries from the enlarged one (see
:func:`rigidcoh.linalg.quotient_betti`).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property, lru_cache
from itertools import combinations_with_replacement
from typing import Callable

from .bornology import Lattice, Window, generate_lattice
from .errors import BudgetExceeded, WindowMismatch
from .linalg import PMatrix, RankResult, RowReducer, induced_rank, new_reducer, quotient_betti
from .padic import PadicContext, PadicScalar
from .poly import FormBasis, PolyForm, monomials, product, wedge_sets
from .presentation import Presentation, RingMap


@lru_cache(maxsize=256)
def tail_rows(pres: Presentation, m: int, cap: int, k: int) -> tuple:
    """Spanning rows of the level-m tail in k-forms of degree <= cap."""
    if not pres.relations:
        return ()
    n = pres.nvars
    basis = FormBasis(n, cap, k)
    rows = []
    seen = set()
    for R in combinations_with_replacement(range(len(pres.relations)), m):
        h = product((pres.relations[i] for i in R), n)
        dh = h.d()
        deg = h.poly_degree()
        for u in monomials(n, cap - deg) if deg <= cap else ():
            uh = PolyForm.monomial(u).wedge(h)
            for I in wedge_sets(n, k):
                rows.append(basis.row(uh.wedge(PolyForm.monomial((0,) * n, I))))
        if k >= 1 and deg - 1 <= cap:
            for u in monomials(n, cap - deg + 1):
                udh = PolyForm.monomial(u).wedge(dh)
                for J in wedge_sets(n, k - 1):
                    r = basis.row(udh.wedge(PolyForm.monomial((0,) * n, J)))
                    key = tuple(sorted(r.items()))
                    if r and key not in seen:
                        seen.add(key)
                        rows.append(r)
    return tuple(rows)


@dataclass(eq=False)
class TruncatedComplex:
    pres: Presentation
    window: Window
    budget: int = 1
    mode: str = "exact"
    ctx: PadicContext | None = None
    verify: bool = True

    def __post_init__(self):
        if self.mode == "padic" and self.ctx is None:
            raise ValueError("p-adic complexes need a context")
        if self.verify:
            self.check()

    # shapes

    @property
    def nvars(self) -> int:
        return self.pres.nvars

    @property
    def level(self) -> int:
        return self.window.m

    @cached_property
    def big_window(self) -> Window:
        return self.window.enlarged(self.budget)

    @property
    def cap(self) -> int:
        return self.big_window.D

    def basis(self, k: int) -> FormBasis:
        return FormBasis(self.nvars, self.cap, k)

    @cached_property
    def lattice(self) -> Lattice:
        return generate_lattice(self.window, self.pres)

    @cached_property
    def big_lattice(self) -> Lattice:
        return generate_lattice(self.big_window, self.pres)

    def _forms_rows(self, lat: Lattice, k: int) -> list[dict]:
        src = lat.basis
        tgt = self.basis(k)
        n = self.nvars
        out = []
        for row in lat.span_rows():
            f = src.form(row)
            for I in wedge_sets(n, k):
                out.append(tgt.row(f.wedge(PolyForm.monomial((0,) * n, I))))
        return out

    @lru_cache(maxsize=None)
    def small_rows(self, k: int) -> list[dict]:
        """Rows spanning C^k of the small window."""
        if k < 0 or k > self.nvars:
            return []
        return self._forms_rows(self.lattice, k)

    @lru_cache(maxsize=None)
    def big_rows(self, k: int) -> list[dict]:
        if k < 0 or k > self.nvars:
            return []
        return self._forms_rows(self.big_lattice, k)

    def tails(self, k: int) -> tuple:
        if k < 0 or k > self.nvars:
            return ()
        return tail_rows(self.pres, self.level, self.cap, k)

    def d(self, row: dict, k: int) -> dict:
        if k >= self.nvars:
            return {}
        return self.basis(k).d_row(row)

    def d_rows(self, rows, k: int) -> list[dict]:
        return [self.d(r, k) for r in rows]

    # reducers

    def new_reducer(self, label: str = "") -> RowReducer:
        return new_reducer(self.mode, self.ctx, label=label)

    @lru_cache(maxsize=None)
    def tail_reducer(self, k: int) -> RowReducer:
        red = self.new_reducer(f"tails m={self.level} k={k}")
        red.extend(self.tails(k))
        return red

    @lru_cache(maxsize=None)
    def boundary_reducer(self, k: int) -> RowReducer:
        """Tails of degree k plus d of the enlarged window's (k-1)-forms."""
        red = self.tail_reducer(k).copy()
        red.label = f"boundaries m={self.level} k={k}"
        if k <= self.nvars:
            red.extend(self.d_rows(self.big_rows(k - 1), k - 1))
        return red

    def width(self, k: int) -> int:
        return len(self.basis(k)) if 0 <= k <= self.nvars else 0

    # invariants

    def check(self):
        """d∘d = 0 on both windows and d(C^k) ⊆ span of enlarged C^(k+1)."""
        n = self.nvars
        for k in range(n + 1):
            for r in self.small_rows(k) + self.big_rows(k):
                if k + 1 <= n and self.d(self.d(r, k), k + 1):
                    raise AssertionError("d∘d != 0")
        for k in range(n):
            span = RowReducer("exact")
            span.extend(self.big_rows(k + 1))
            for r in self.small_rows(k):
                if not span.contains(self.d(r, k)):
                    raise BudgetExceeded(
                        f"d leaves the enlarged window in degree {k + 1}; raise the differential budget or e"
                    )
            tails_next = RowReducer("exact")
            tails_next.extend(self.tails(k + 1))
            for r in self.tails(k):
                if not tails_next.contains(self.d(r, k)):
                    raise AssertionError("tail subcomplex not closed under d")

    # cohomology

    def betti_result(self, q: int) -> RankResult:
        X = self.small_rows(q)
        dX = self.d_rows(X, q) if q < self.nvars else [{} for _ in X]
        F_next = self.tail_reducer(q + 1) if q < self.nvars else self.new_reducer()
        return quotient_betti(X, dX, self.boundary_reducer(q), F_next, self.width(q))

    def betti(self) -> list[int]:
        return [self.betti_result(q).value for q in range(self.nvars + 1)]

    def differential_matrix(self, k: int) -> PMatrix:
        """d: C^k -> C^(k+1) in ambient coordinates (rows = basis of C^k)."""
        rows = self.d_rows(self.small_rows(k), k)
        return PMatrix.from_rows(rows, self.width(k + 1), "padic" if self.mode == "padic" else "exact", self.ctx)


@dataclass
class ChainMapRep:
    """A chain map between truncated complexes acting on ambient rows."""

    source: TruncatedComplex
    target: TruncatedComplex
    apply: Callable[[dict, int], dict]
    label: str = ""

    def rows(self, k: int) -> list[dict]:
        return [self.apply(r, k) for r in self.source.small_rows(k)]

    def matrix(self, k: int) -> PMatrix:
        """Images of the source basis of C^k as rows in target coordinates."""
        mode = self.target.mode
        return PMatrix.from_rows(self.rows(k), self.target.width(k), mode, self.target.ctx)

    def minus(self, other: "ChainMapRep") -> "ChainMapRep":
        def apply(row, k):
            a, b = self.apply(row, k), other.apply(row, k)
            out = dict(a)
            for c, v in b.items():
                nv = out.get(c, 0) - v
                if nv:
                    out[c] = nv
                else:
                    out.pop(c, None)
            return out

        return ChainMapRep(self.source, self.target, apply, f"{self.label} - {other.label}")

    def commutes_with_d(self) -> bool:
        """T∘d == d∘T on every source basis row, exactly."""
        for k in range(self.source.nvars):
            for r in self.source.small_rows(k):
                lhs = self.apply(self.source.d(r, k), k + 1)
                rhs = self.target.d(self.apply(r, k), k)
                if _row_sub(lhs, rhs):
                    return False
        return True

    def cohomology_rank(self, q: int) -> RankResult:
        s, t = self.source, self.target
        X = s.small_rows(q)
        SX = s.d_rows(X, q) if q < s.nvars else [{} for _ in X]
        TX = [self.apply(r, q) for r in X]
        S_rel = s.tail_reducer(q + 1) if q < s.nvars else s.new_reducer()
        width = max(s.width(q + 1), 1)
        return induced_rank(X, SX, TX, S_rel, t.boundary_reducer(q), width)

    def cohomology_ranks(self) -> list[int]:
        return [self.cohomology_rank(q).value for q in range(self.source.nvars + 1)]


def _row_sub(a: dict, b: dict) -> dict:
    out = dict(a)
    for c, v in b.items():
        nv = out.get(c, 0) - v
        if nv:
            out[c] = nv
        else:
            out.pop(c, None)
    return out


def _spans(rows_big, extra) -> RowReducer:
    red = RowReducer("exact")
    red.extend(rows_big)
    red.extend(extra)
    return red


def structure_map(upper: TruncatedComplex, lower: TruncatedComplex) -> ChainMapRep:
    """σ: level m+1 -> level m, the identity on polynomial forms."""
    if upper.pres != lower.pres:
        raise WindowMismatch("structure maps need a common presentation")
    if upper.cap != lower.cap:
        raise WindowMismatch("levels use different degree caps")
    for k in range(upper.nvars + 1):
        check = RowReducer("exact")
        check.extend(lower.tails(k))
        if not all(check.contains(r) for r in upper.tails(k)):
            raise WindowMismatch(f"level {upper.level} tails are not inside level {lower.level} tails (k={k})")
        target = _spans(lower.big_rows(k), lower.tails(k))
        if not all(target.contains(r) for r in upper.small_rows(k)):
            raise WindowMismatch(f"level {upper.level} window is not inside level {lower.level} (k={k})")
    return ChainMapRep(upper, lower, lambda row, k: row, f"sigma_{lower.level}")


def _pullback_row(phi: RingMap, src: TruncatedComplex, tgt: TruncatedComplex):
    cache: dict = {}

    def apply(row: dict, k: int) -> dict:
        out: dict = {}
        if k > tgt.nvars:
            return out
        sb, tb = src.basis(k), tgt.basis(k)
        for i, c in row.items():
            key = (k, i)
            img = cache.get(key)
            if img is None:
                form = phi(sb.form({i: 1}))
                try:
                    img = tb.row(form)
                except KeyError:
                    raise WindowMismatch(
                        f"image of a degree-{k} basis form exceeds the target degree cap {tgt.cap}"
                    ) from None
                cache[key] = img
            for j, v in img.items():
                nv = out.get(j, 0) + c * v
                if nv:
                    out[j] = nv
                else:
                    out.pop(j)
        return out

    return apply


def induced_map(phi: RingMap, source: TruncatedComplex, target: TruncatedComplex) -> ChainMapRep:
    """Chain map of a ring homomorphism: substitute coefficients, dx_i -> d(phi(x_i))."""
    if phi.source_nvars != source.nvars or phi.target_nvars != target.nvars:
        raise WindowMismatch("ring map does not match the complexes")
    apply = _pullback_row(phi, source, target)
    for k in range(source.nvars + 1):
        span = RowReducer("exact")
        span.extend(target.tails(k))
        for r in source.tails(k):
            if not span.contains(apply(r, k)):
                raise WindowMismatch(f"tails are not mapped into target tails in degree {k}")
        span.extend(target.big_rows(k))
        for r in source.small_rows(k):
            if not span.contains(apply(r, k)):
                raise WindowMismatch(f"window is not mapped into the target window in degree {k}")
    return ChainMapRep(source, target, apply, "induced")


# ---------------------------------------------------------------------------
# one-variable integration contraction


@dataclass
class IntegrationContraction:
    D: int
    d: PMatrix  # C^0 -> C^1, column convention (entry [i, j] = coeff of basis_i in image of basis_j)
    i: PMatrix  # C^1 -> C^0
    P0: PMatrix  # constants projection on C^0
    mode: str

    def check(self) -> tuple[bool, bool]:
        n0, n1 = self.D + 1, self.D
        id0 = PMatrix.identity(n0, self.mode, self.d.ctx)
        id1 = PMatrix.identity(n1, self.mode, self.d.ctx)
        return (self.d @ self.i == id1, self.i @ self.d == id0 - self.P0)


def integration_contraction(D: int, ctx: PadicContext | None = None) -> IntegrationContraction:
    """Matrices of d, integration ``x^k dx -> x^(k+1)/(k+1)`` and the constant projection.

    C^0 has basis 1, x, .., x^D and C^1 has basis dx, x dx, .., x^(D-1) dx.
    """
    if D < 1:
        raise ValueError("D must be at least 1")
    mode = "padic" if ctx is not None else "exact"

    def s(v):
        return PadicScalar.from_rational(ctx, v) if ctx is not None else Fraction(v)

    d = PMatrix(D, D + 1, {(k - 1, k): s(k) for k in range(1, D + 1)}, mode, ctx)
    i = PMatrix(D + 1, D, {(k + 1, k): s(Fraction(1, k + 1)) for k in range(D)}, mode, ctx)
    P0 = PMatrix(D + 1, D + 1, {(0, 0): s(1)}, mode, ctx)
    return IntegrationContraction(D, d, i, P0, mode)
