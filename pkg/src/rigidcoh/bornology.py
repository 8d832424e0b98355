"""Finite windows into J-adic bounded sets.

A window describes the bounded submodule ``p^-c0 * sum_n p^(beta(n)-n) M^n``
with ``M`` spanned by monomials of degree <= e times m-fold products of
generators of J, truncated at stage ``nMax`` and total degree ``D``.  Because
J = (p, g_1, .., g_r), an element of ``M^n`` is ``p^a u R`` with ``R`` a
product of ``mn - a`` relations, so each generator is recorded by the key
``(u, R)`` together with its smallest p-exponent.

K-spans of windows drive the cohomology computations; the V-lattices
(integral structure) are used for membership and window comparisons.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field, replace
from fractions import Fraction
from functools import cached_property
from itertools import combinations_with_replacement

from .errors import TruncationOverflow, Undecided
from .linalg import RowReducer
from .padic import PadicScalar, rational_valuation
from .poly import FormBasis, PolyForm, monomials, product
from .presentation import Presentation, TubeAlgebraPresentation

DEFAULT_MAX_GENERATORS = 200_000


@dataclass(frozen=True)
class GrowthFunction:
    """``beta(n) = floor(gamma * n)``."""

    gamma: Fraction = Fraction(1, 2)

    def __post_init__(self):
        object.__setattr__(self, "gamma", Fraction(self.gamma))
        if self.gamma <= 0:
            raise ValueError("gamma must be positive")

    def beta(self, n: int) -> int:
        return math.floor(self.gamma * n)

    def is_superadditive(self, n_max: int) -> bool:
        return all(
            self.beta(i + j) >= self.beta(i) + self.beta(j)
            for i in range(n_max + 1)
            for j in range(n_max + 1 - i)
        )


@dataclass(frozen=True)
class Window:
    m: int
    growth: GrowthFunction = GrowthFunction()
    nMax: int = 3
    e: int = 1
    c0: int = 0
    D: int = 8
    precision: int | None = None  # None: exact membership
    max_generators: int = DEFAULT_MAX_GENERATORS
    tube: bool = False

    def __post_init__(self):
        if self.m < 1 or self.nMax < 1 or self.e < 0 or self.D < 0:
            raise ValueError(f"invalid window parameters {self}")

    def enlarged(self, budget: int = 1) -> "Window":
        """The window with D, nMax and c0 raised by ``budget``."""
        return replace(self, D=self.D + budget, nMax=self.nMax + budget, c0=self.c0 + budget)

    def with_(self, **changes) -> "Window":
        return replace(self, **changes)

    def as_dict(self) -> dict:
        return {
            "m": self.m,
            "gamma": str(self.growth.gamma),
            "nMax": self.nMax,
            "e": self.e,
            "c0": self.c0,
            "D": self.D,
            "tube": self.tube,
        }


@dataclass
class Generator:
    exponent: int  # power of p in front
    u: tuple  # monomial exponent tuple
    R: tuple  # multiset of relation indices (or tube products)
    poly: PolyForm  # u * prod(R), integer coefficients

    def form(self, p: int) -> PolyForm:
        return self.poly.scale(_ppow(self.exponent, p))


def _ppow(e: int, p: int) -> Fraction:
    return Fraction(p) ** e


@dataclass
class Lattice:
    window: Window
    pres: Presentation
    generators: list  # list[Generator]
    counts: dict

    @cached_property
    def basis(self) -> FormBasis:
        return FormBasis(self.pres.nvars, self.window.D, 0)

    def vectors(self) -> list[dict]:
        """Generator coordinates as rational rows (p-power included)."""
        p = self.pres.p
        out = []
        for g in self.generators:
            scale = _ppow(g.exponent, p)
            out.append({k: Fraction(v) * scale for k, v in self.basis.row(g.poly).items()})
        return out

    @cached_property
    def span(self) -> RowReducer:
        red = RowReducer("exact", label="window span")
        for g in self.generators:
            red.insert(self.basis.row(g.poly))
        return red

    @property
    def rank(self) -> int:
        return self.span.rank

    @property
    def is_full(self) -> bool:
        return self.span.rank == len(self.basis)

    def span_rows(self) -> list[dict]:
        """Integer rows spanning the K-span, one per pivot, in term order."""
        if self.is_full:
            return [{i: 1} for i in range(len(self.basis))]
        return [self.span.pivots[c] for c in sorted(self.span.pivots)]

    def echelon_basis(self) -> list[dict]:
        """Reduced echelon basis of the K-span (rational rows)."""
        rows = {c: {k: Fraction(v) / r[c] for k, v in r.items()} for c, r in self.span.pivots.items()}
        for c in sorted(rows, reverse=True):
            for c2 in sorted(rows):
                if c2 < c and c in rows[c2]:
                    f = rows[c2][c]
                    new = dict(rows[c2])
                    for k, v in rows[c].items():
                        nv = new.get(k, 0) - f * v
                        if nv:
                            new[k] = nv
                        else:
                            new.pop(k, None)
                    rows[c2] = new
        return [rows[c] for c in sorted(rows)]

    @cached_property
    def integral(self) -> "ZpLattice":
        lat = ZpLattice(self.pres.p)
        for v in self.vectors():
            lat.insert(v)
        return lat


# ---------------------------------------------------------------------------
# generator enumeration


def _count_guard(counts: dict, limit: int):
    if counts["generators"] > limit:
        raise TruncationOverflow(
            f"window would produce {counts['generators']} generators (limit {limit})", counts
        )


def _relation_multisets(pres: Presentation, k: int, D: int):
    """Multisets of k relations whose product has degree <= D."""
    if k == 0:
        yield ()
        return
    if not pres.relations:
        return
    degs = pres.relation_degrees
    for combo in combinations_with_replacement(range(len(pres.relations)), k):
        if sum(degs[i] for i in combo) <= D:
            yield combo


def _min_stage(k: int, du: int, w: Window) -> int | None:
    """Smallest stage n holding u*R with |R| = k relations and deg u = du."""
    if k == 0 and du <= w.e:
        return 0
    n = max(1, -(-k // w.m))
    if du > 0:
        if w.e == 0:
            return None
        n = max(n, -(-du // w.e))
    return n if n <= w.nMax else None


def generate_lattice(w: Window, pres: Presentation) -> Lattice:
    """Enumerate window generators (deduplicated, deterministic order)."""
    if w.tube:
        return _generate_tube_lattice(w, pres)
    n = pres.nvars
    beta = w.growth.beta
    monos = monomials(n, w.D)
    gens: list[Generator] = []
    counts = {"stages": w.nMax + 1, "multisets": 0, "monomials": len(monos), "generators": 0}
    kmax = w.m * w.nMax
    for k in range(kmax + 1):
        for R in _relation_multisets(pres, k, w.D):
            counts["multisets"] += 1
            h = product((pres.relations[i] for i in R), n)
            dh = h.poly_degree()
            for u in monos:
                du = sum(u)
                if du + dh > w.D:
                    continue
                stage = _min_stage(k, du, w)
                if stage is None:
                    continue
                if stage == 0:
                    exponent = -w.c0
                else:
                    # a = m*stage - k copies of p in the m*stage-fold product
                    exponent = beta(stage) - stage + (w.m * stage - k) - w.c0
                counts["generators"] += 1
                _count_guard(counts, w.max_generators)
                gens.append(Generator(exponent, u, R, PolyForm.monomial(u).wedge(h) if R else PolyForm.monomial(u)))
    gens.sort(key=lambda g: (len(g.R), g.R, _mono_sort(g.u)))
    return Lattice(w, pres, gens, counts)


def _mono_sort(u):
    return (sum(u), tuple(-a for a in u))


def _generate_tube_lattice(w: Window, pres: Presentation) -> Lattice:
    """Window of the (p)-adic weak completion of the tube algebra.

    Stage 0 holds ``p^-c0 * w`` and stage n holds ``p^(beta(n)-c0) * w`` for
    monomials ``w`` in (x, z) of degree <= n*e, evaluated with z -> G/p.
    """
    tube = TubeAlgebraPresentation(pres, w.m)
    G = tube.products
    n = pres.nvars
    degG = [g.poly_degree() for g in G]
    beta = w.growth.beta
    counts = {"stages": w.nMax + 1, "multisets": 0, "monomials": 0, "generators": 0}
    best: dict = {}
    for k in range(w.nMax * w.e + 1):
        for Z in combinations_with_replacement(range(len(G)), k):
            dz = sum(degG[i] for i in Z)
            if dz > w.D:
                continue
            counts["multisets"] += 1
            for u in monomials(n, w.D - dz):
                total = sum(u) + k
                if total <= w.e:
                    stage = 0
                elif w.e == 0:
                    continue
                else:
                    stage = -(-total // w.e)
                    if stage > w.nMax:
                        continue
                exponent = -w.c0 - k + (beta(stage) if stage else 0)
                counts["generators"] += 1
                _count_guard(counts, w.max_generators)
                key = (u, Z)
                if key not in best or exponent < best[key][0]:
                    best[key] = (exponent, stage)
    gens = []
    for (u, Z), (exponent, _) in best.items():
        poly = product((G[i] for i in Z), n).wedge(PolyForm.monomial(u))
        # strip the p-content of the product into the exponent
        content = _p_content(poly, pres.p)
        if content:
            poly = poly.scale(Fraction(1, pres.p**content))
        gens.append(Generator(exponent + content, u, Z, poly))
    gens.sort(key=lambda g: (len(g.R), g.R, _mono_sort(g.u)))
    return Lattice(w, pres, gens, counts)


def _p_content(f: PolyForm, p: int) -> int:
    vals = [rational_valuation(c, p) for c in f.terms.values()]
    return min(vals) if vals else 0


# ---------------------------------------------------------------------------
# integral lattices over Z_(p)


class ZpLattice:
    """Z_(p)-module spanned by rational rows, kept in leading-term echelon form.

    Pivot rows are normalised so the leading entry is a power of p; an
    incoming row with a lower-valuation leading entry replaces the pivot.
    """

    def __init__(self, p: int):
        self.p = p
        self.pivots: dict = {}

    def _val(self, q: Fraction) -> int:
        return rational_valuation(q, self.p)

    def insert(self, row: dict) -> bool:
        row = {k: Fraction(v) for k, v in row.items() if v}
        while row:
            c = min(row)
            v = self._val(row[c])
            piv = self.pivots.get(c)
            if piv is None or v < self._val(piv[c]):
                scale = Fraction(self.p) ** v / row[c]
                self.pivots[c] = {k: x * scale for k, x in row.items()}
                if piv is None:
                    return True
                row = piv
                continue
            f = row[c] / piv[c]
            row = _sub_scaled(row, piv, f)
        return False

    def contains(self, row: dict) -> bool:
        row = {k: Fraction(v) for k, v in row.items() if v}
        while row:
            c = min(row)
            piv = self.pivots.get(c)
            if piv is None or self._val(row[c]) < self._val(piv[c]):
                return False
            row = _sub_scaled(row, piv, row[c] / piv[c])
        return True

    def copy(self) -> "ZpLattice":
        new = ZpLattice(self.p)
        new.pivots = dict(self.pivots)
        return new


def _sub_scaled(row: dict, piv: dict, f: Fraction) -> dict:
    out = dict(row)
    for k, v in piv.items():
        nv = out.get(k, 0) - f * v
        if nv:
            out[k] = nv
        else:
            out.pop(k, None)
    return out


def _target_lattice(lat: Lattice, precision: int | None) -> ZpLattice:
    if precision is None:
        return lat.integral
    cut = lat.integral.copy()
    q = Fraction(lat.pres.p) ** precision
    for c in range(len(lat.basis)):
        cut.insert({c: q})
    return cut


def _coerce_member(f: PolyForm, w: Window) -> PolyForm:
    if f.degree != 0:
        raise ValueError("membership is defined for 0-forms")
    if f.poly_degree() > w.D:
        raise ValueError(f"form degree {f.poly_degree()} exceeds the window cap D={w.D}")
    if f.scalar_mode != "padic":
        return f
    if w.precision is None:
        raise Undecided("p-adic input needs a window precision")
    terms = {}
    for key, c in f.terms.items():
        if c.absprec < w.precision:
            raise Undecided(f"coefficient {c} is not known modulo p^{w.precision}")
        terms[key] = c.to_fraction()
    return PolyForm(f.nvars, 0, terms)


def contains(w: Window, f: PolyForm, pres: Presentation, lattice: Lattice | None = None) -> bool:
    """Is ``f`` in the V-lattice of the window (modulo p^precision if set)?"""
    f = _coerce_member(f, w)
    if f.is_zero():
        return True
    lat = lattice or generate_lattice(w, pres)
    row = lat.basis.row(f)
    return _target_lattice(lat, w.precision).contains(row)


class WindowOrder(enum.Enum):
    EQUAL = "equal"
    SUBSET = "A⊆B"
    SUPERSET = "B⊆A"
    INCOMPARABLE = "incomparable"


def lattice_included(A: Lattice, B: Lattice, precision: int | None = None) -> bool:
    if A.window.D != B.window.D:
        raise ValueError("windows with different degree caps are not comparable")
    target = _target_lattice(B, precision)
    return all(target.contains(v) for v in A.vectors())


def compare_windows(wA: Window, wB: Window, pres: Presentation) -> WindowOrder:
    A = generate_lattice(wA, pres)
    B = generate_lattice(wB, pres)
    prec = wA.precision if wA.precision == wB.precision else None
    a_in_b = lattice_included(A, B, prec)
    b_in_a = lattice_included(B, A, prec)
    if a_in_b and b_in_a:
        return WindowOrder.EQUAL
    if a_in_b:
        return WindowOrder.SUBSET
    if b_in_a:
        return WindowOrder.SUPERSET
    return WindowOrder.INCOMPARABLE


# ---------------------------------------------------------------------------
# comparison searches


def find_enlargement(small: Window, grow, pres: Presentation, limit: int = 40) -> int | None:
    """Least ``s <= limit`` with ``small ⊆ grow(s)``, or None."""
    A = generate_lattice(small, pres)
    for s in range(limit + 1):
        if lattice_included(A, generate_lattice(grow(s), pres)):
            return s
    return None


@dataclass
class InclusionWitness:
    direction: str
    parameter: str
    value: int | None

    @property
    def found(self) -> bool:
        return self.value is not None


def ideal_power_comparison(
    pres: Presentation, m: int, gamma=Fraction(1, 2), nMax: int = 4, e: int = 1, c0: int = 0, D: int = 8, ell_max: int = 12
) -> list[InclusionWitness]:
    """For J = (p) (no relations): the I- and I^m-adic windows agree.

    * the I^m-window with module degree e sits inside the I-window with the
      same parameters;
    * the I-window sits inside the I^m-window whose module degree is e*ell
      for the least ell found by search.
    """
    g = GrowthFunction(gamma)
    w1 = Window(1, g, nMax, e, c0, D)
    wm = Window(m, g, nMax, e, c0, D)
    direct = lattice_included(generate_lattice(wm, pres), generate_lattice(w1, pres))
    ell = find_enlargement(w1, lambda s: wm.with_(e=max(e, 1) * (s + 1)), pres, ell_max - 1)
    return [
        InclusionWitness("I^m ⊆ I", "ell", 1 if direct else None),
        InclusionWitness("I ⊆ I^m", "ell", None if ell is None else ell + 1),
    ]


def tube_comparison(
    pres: Presentation, m: int, gamma=Fraction(1, 2), nMax: int = 2, e: int = 1, c0: int = 0, D: int = 8, limit: int = 40
) -> list[InclusionWitness]:
    """J^m-adic window versus the weak-completion window of the tube algebra.

    Returns the least enlargements making each contain the other.
    """
    g = GrowthFunction(gamma)
    wj = Window(m, g, nMax, e, c0, D)
    wt = Window(m, g, nMax, e, c0, D, tube=True)
    s1 = find_enlargement(wj, lambda s: wt.with_(e=e + s), pres, limit)
    s2 = find_enlargement(wt, lambda s: wj.with_(nMax=nMax + s, e=e + s, c0=c0 + s), pres, limit)
    return [InclusionWitness("J^m ⊆ tube", "e-shift", s1), InclusionWitness("tube ⊆ J^m", "shift", s2)]


def differential_budget_ok(w: Window, pres: Presentation, budget: int) -> bool:
    """Does d map every generator into the V-lattice of ``w`` enlarged by budget (times dx_i)?"""
    big = generate_lattice(w.enlarged(budget), pres)
    lat = generate_lattice(w, pres)
    p = pres.p
    for g in lat.generators:
        scale = Fraction(p) ** g.exponent
        for i in range(pres.nvars):
            dg = g.poly.partial(i).scale(scale)
            if not dg.is_zero() and not big.integral.contains(big.basis.row(dg)):
                return False
    return True
