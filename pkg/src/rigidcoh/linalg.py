"""Precision-aware linear algebra over Q and Q_p.

Two layers live here.

* :class:`PMatrix` with :func:`echelon` is the general-purpose API: sparse
  matrices of exact rationals or :class:`PadicScalar` entries, reduced with
  minimal-valuation pivoting, returning kernel and image bases.
* :class:`RowReducer` is the workhorse for the large, sparse integer systems
  that come out of truncated de Rham complexes.  It only tracks ranks, inserts
  rows one at a time and can be copied, so that a reduced tail subspace is
  shared by several rank computations.

Cohomology is never formed as a quotient space explicitly.  Every dimension
is a difference of ranks; see :func:`quotient_betti` and :func:`induced_rank`.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass, field, asdict
from fractions import Fraction
from typing import Callable, Iterable, Sequence

from .errors import NegativeBetti, NotStabilized, ParseError, RankUncertain, TruncationOverflow
from .padic import INF, PadicContext, PadicScalar, rational_valuation, vp

Row = dict  # column index -> int | Fraction


# ---------------------------------------------------------------------------
# row helpers


def _lcm(a: int, b: int) -> int:
    return a * b // math.gcd(a, b)


def integer_row(row: Row) -> dict[int, int]:
    """Scale a rational row to a primitive integer row (same K-span)."""
    den = 1
    for v in row.values():
        if isinstance(v, Fraction):
            den = _lcm(den, v.denominator)
    out = {}
    g = 0
    for k, v in row.items():
        iv = int(v * den) if den != 1 or isinstance(v, Fraction) else v
        if iv:
            out[k] = iv
            g = math.gcd(g, iv)
    if g > 1:
        out = {k: v // g for k, v in out.items()}
    return out


def padic_row(row: Row, ctx: PadicContext) -> tuple[dict[int, int], int]:
    """Convert a row of PadicScalars to (integer row, absolute precision).

    The row is rescaled by a power of p so that its minimal valuation is 0;
    the returned precision is the smallest absolute precision of an entry
    after the shift, capped at the working precision.
    """
    vals = [c.valuation for c in row.values() if not c.is_zero and not c.is_indeterminate]
    if not vals:
        # nothing known: zero only if every unknown is below the working precision
        negligible = all(c.negligible() for c in row.values())
        return {}, ctx.precision if negligible else 0
    shift = -min(vals)
    N = ctx.precision
    mod = ctx.p**N
    out = {}
    absprec = N
    for k, c in row.items():
        if c.is_zero:
            continue
        absprec = min(absprec, c.absprec + shift)
        if c.is_indeterminate:
            continue
        e = c.valuation + shift
        if e < N:
            out[k] = c.unit * ctx.p**e % mod
    return out, max(absprec, 0)


def offset_row(row: Row, offset: int) -> Row:
    if not offset:
        return row
    return {k + offset: v for k, v in row.items()}


def join_rows(*parts: Row) -> Row:
    out = {}
    for part in parts:
        out.update(part)
    return out


# ---------------------------------------------------------------------------
# incremental rank engine


@dataclass
class PrecisionReport:
    max_pivot_valuation: int = 0
    min_pivot_precision: float | int = INF
    uncertain: list = field(default_factory=list)

    def merge(self, other: "PrecisionReport") -> "PrecisionReport":
        return PrecisionReport(
            max(self.max_pivot_valuation, other.max_pivot_valuation),
            min(self.min_pivot_precision, other.min_pivot_precision),
            self.uncertain + other.uncertain,
        )

    def as_dict(self) -> dict:
        mpp = self.min_pivot_precision
        return {
            "max_pivot_valuation": self.max_pivot_valuation,
            "min_pivot_precision": None if mpp == INF else mpp,
            "uncertain_candidates": len(self.uncertain),
        }


class RowReducer:
    """Incremental rank of integer rows over Q (``exact``) or Q_p (``padic``).

    Rows are dicts ``column -> int``.  In exact mode the leading column of a
    row (its smallest key) is the pivot and elimination is fraction free.

    In p-adic mode arithmetic is done modulo ``p**N``.  An incoming row is
    fully reduced against the pivots in creation order; what is left has its
    p-content divided out (losing that many known digits) and is pivoted at
    its first unit entry, scaled so the pivot entry is 1.  Multipliers are
    therefore always integral, and a row counts as zero once it vanishes
    modulo ``p**absprec``.
    """

    __slots__ = ("mode", "p", "N", "mod", "pivots", "order", "report", "label")

    def __init__(self, mode: str = "exact", p: int | None = None, N: int | None = None, label: str = ""):
        if mode not in ("exact", "padic"):
            raise ValueError(f"unknown mode {mode!r}")
        if mode == "padic" and (p is None or N is None):
            raise ValueError("p-adic reduction needs p and N")
        self.mode = mode
        self.p = p
        self.N = N
        self.mod = p**N if mode == "padic" else None
        # exact: col -> row;  padic: col -> (row, absprec, shift, creation index)
        self.pivots: dict = {}
        self.order: list = []
        self.report = PrecisionReport()
        self.label = label

    @classmethod
    def like(cls, other: "RowReducer", label: str = "") -> "RowReducer":
        return cls(other.mode, other.p, other.N, label)

    @property
    def rank(self) -> int:
        return len(self.pivots)

    def copy(self) -> "RowReducer":
        new = RowReducer(self.mode, self.p, self.N, self.label)
        new.pivots = dict(self.pivots)
        new.order = list(self.order)
        new.report = PrecisionReport(
            self.report.max_pivot_valuation, self.report.min_pivot_precision, list(self.report.uncertain)
        )
        return new

    def absorb(self, other: "RowReducer", shift: int = 0):
        """Add the pivots of a reducer whose columns (after ``shift``) are disjoint from ours."""
        if other.mode != self.mode:
            raise ValueError("cannot merge reducers of different modes")
        if self.mode == "exact":
            for c, r in other.pivots.items():
                self.pivots[c + shift] = offset_row(r, shift)
        else:
            for c in other.order:
                r, a, v, _ = other.pivots[c]
                self.pivots[c + shift] = (offset_row(r, shift), a, v, len(self.order))
                self.order.append(c + shift)
        self.report = self.report.merge(other.report)

    def insert(self, row: Row, absprec: int | None = None) -> bool:
        """Add a row; return True when it increases the rank."""
        if self.mode == "exact":
            return self._insert_exact(integer_row(row))
        if any(isinstance(v, PadicScalar) for v in row.values()):
            ctx = next(iter(row.values())).ctx
            row, absprec = padic_row(row, PadicContext(ctx.p, self.N, ctx.epsilon))
        else:
            row = integer_row(row)
        return self._insert_padic(row, self.N if absprec is None else min(absprec, self.N))

    def extend(self, rows: Iterable[Row]) -> int:
        added = 0
        for r in rows:
            added += self.insert(r)
        return added

    def reduce(self, row: Row) -> Row:
        """Leading-term reduction of a row against the pivots (exact mode)."""
        if self.mode != "exact":
            raise ValueError("reduce is only available in exact mode")
        row = integer_row(row)
        while row:
            c = min(row)
            pr = self.pivots.get(c)
            if pr is None:
                return row
            row = self._eliminate(row, pr, c)
        return row

    def contains(self, row: Row) -> bool:
        if self.mode == "exact":
            return not self.reduce(row)
        trial = self.copy()
        return not trial.insert(row)

    # exact: fraction-free elimination with content removal

    @staticmethod
    def _eliminate(row: dict, pr: dict, c: int) -> dict:
        a, b = pr[c], row[c]
        g = math.gcd(a, b)
        a //= g
        b //= g
        if a < 0:
            a, b = -a, -b
        new = {k: a * v for k, v in row.items()} if a != 1 else dict(row)
        for k, v in pr.items():
            nv = new.get(k, 0) - b * v
            if nv:
                new[k] = nv
            else:
                del new[k]
        if a == 1:
            # entries only grew additively; content removal is not worth it
            return new
        g = 0
        for v in new.values():
            g = math.gcd(g, v)
            if g == 1:
                break
        if g > 1:
            new = {k: v // g for k, v in new.items()}
        return new

    def _insert_exact(self, row: dict) -> bool:
        while row:
            c = min(row)
            pr = self.pivots.get(c)
            if pr is None:
                self.pivots[c] = row
                return True
            row = self._eliminate(row, pr, c)
        return False

    # p-adic: arithmetic mod p^N, unit pivots

    def _insert_padic(self, row: dict, absprec: int) -> bool:
        p, mod, pivots = self.p, self.mod, self.pivots
        row = {k: v % mod for k, v in row.items() if v % mod}
        source_precision = absprec
        heap = [pivots[c][3] for c in row if c in pivots]
        heapq.heapify(heap)
        while heap:
            c = self.order[heapq.heappop(heap)]
            x = row.get(c)
            if not x:
                continue
            prow, pprec, _, _ = pivots[c]
            for col, val in prow.items():
                old = row.get(col)
                nv = ((old or 0) - x * val) % mod
                if nv:
                    row[col] = nv
                    if old is None and col in pivots:
                        heapq.heappush(heap, pivots[col][3])
                elif old is not None:
                    del row[col]
            absprec = min(absprec, pprec + vp(x, p))
        if absprec <= 0:
            row = {}
        else:
            known = p**absprec
            row = {k: v for k, v in row.items() if v % known}
        if not row:
            if absprec <= 0:
                self.report.uncertain.append((self.label, source_precision, absprec))
            return False
        v = min(vp(x, p) for x in row.values())
        if v:
            scale = p**v
            row = {k: x // scale for k, x in row.items()}
            absprec -= v
        c = min(k for k, x in row.items() if x % p)
        inv = pow(row[c], -1, mod)
        row = {k: x * inv % mod for k, x in row.items()}
        row = {k: x for k, x in row.items() if x}
        pivots[c] = (row, absprec, v, len(self.order))
        self.order.append(c)
        self._note_pivot(v, absprec)
        return True

    def _note_pivot(self, v: int, absprec: int):
        self.report.max_pivot_valuation = max(self.report.max_pivot_valuation, v)
        self.report.min_pivot_precision = min(self.report.min_pivot_precision, absprec)

    def raise_if_uncertain(self):
        if self.report.uncertain:
            raise RankUncertain(
                f"{len(self.report.uncertain)} row(s) lost every known digit during reduction"
                + (f" in {self.label}" if self.label else ""),
                self.report.uncertain,
            )


def new_reducer(mode: str, ctx: PadicContext | None = None, N: int | None = None, label: str = "") -> RowReducer:
    if mode == "padic":
        if ctx is None:
            raise ValueError("p-adic mode needs a context")
        return RowReducer("padic", ctx.p, N or ctx.precision, label)
    return RowReducer("exact", label=label)


def rank_of(rows: Iterable[Row], mode: str = "exact", ctx: PadicContext | None = None) -> int:
    red = new_reducer(mode, ctx)
    red.extend(rows)
    red.raise_if_uncertain()
    return red.rank


# ---------------------------------------------------------------------------
# cohomology by ranks


@dataclass
class RankResult:
    value: int
    report: PrecisionReport


def _with_rows(base: RowReducer, rows: Iterable[Row], label: str) -> RowReducer:
    red = base.copy()
    red.label = label
    red.extend(rows)
    return red


def quotient_betti(
    X: Sequence[Row],
    dX: Sequence[Row],
    B: RowReducer,
    F_next: RowReducer,
    width: int,
) -> RankResult:
    """Dimension of ``(Z + B) / B`` with ``Z = {x in span X : dx in F_next}``.

    ``X`` spans the cochains of the small window, ``dX`` their differentials,
    ``B`` is a reducer already holding boundaries from the enlarged window and
    tail relations of this degree, ``F_next`` holds tail relations one degree
    up.  ``width`` separates the two column blocks.
    """
    dF = _with_rows(F_next, dX, "d(X) + tails")
    r1 = dF.rank - F_next.rank
    # joint system [x | dx], [b | 0], [0 | f]: blocks are disjoint so the two
    # reduced subspaces can be merged without further elimination
    joint = RowReducer.like(B, "cocycle system")
    joint.absorb(B)
    joint.absorb(F_next, width)
    for x, dx in zip(X, dX):
        joint.insert(join_rows(x, offset_row(dx, width)))
    for red in (dF, joint):
        red.raise_if_uncertain()
    betti = joint.rank - B.rank - F_next.rank - r1
    if betti < 0:
        raise NegativeBetti(f"negative Betti number {betti}")
    return RankResult(betti, dF.report.merge(joint.report))


def induced_rank(
    X: Sequence[Row],
    SX: Sequence[Row],
    TX: Sequence[Row],
    S_rel: RowReducer,
    T_rel: RowReducer,
    width: int,
) -> RankResult:
    """Rank of ``x -> T x (mod T_rel)`` restricted to ``{x : S x in S_rel}``.

    With ``S`` the differential and ``S_rel`` the next-degree tails this is
    the rank of the map induced by ``T`` on cohomology classes represented
    in ``span X``, provided ``T`` sends boundaries into ``T_rel``.
    """
    s_part = _with_rows(S_rel, SX, "S-part")
    joint = RowReducer.like(S_rel, "joint S/T")
    joint.absorb(S_rel)
    joint.absorb(T_rel, width)
    for sx, tx in zip(SX, TX):
        joint.insert(join_rows(sx, offset_row(tx, width)))
    for red in (s_part, joint):
        red.raise_if_uncertain()
    value = joint.rank - s_part.rank - T_rel.rank
    if value < 0:
        raise NegativeBetti(f"negative induced rank {value}")
    return RankResult(value, s_part.report.merge(joint.report))


# ---------------------------------------------------------------------------
# general sparse matrices


def _scalar_is_zero(c) -> bool:
    return c.negligible() if isinstance(c, PadicScalar) else c == 0


class PMatrix:
    """Sparse matrix over Q (exact) or Q_p (padic)."""

    __slots__ = ("nrows", "ncols", "entries", "mode", "ctx")

    def __init__(self, nrows: int, ncols: int, entries: dict | None = None, mode: str | None = None, ctx=None):
        self.nrows = nrows
        self.ncols = ncols
        ents = {}
        for (i, j), v in (entries or {}).items():
            if not (0 <= i < nrows and 0 <= j < ncols):
                raise IndexError(f"entry ({i}, {j}) outside {nrows}x{ncols}")
            if isinstance(v, PadicScalar):
                if v.is_zero:
                    continue
                ctx = ctx or v.ctx
            elif v == 0:
                continue
            else:
                v = Fraction(v)
            ents[(i, j)] = v
        kinds = {isinstance(v, PadicScalar) for v in ents.values()}
        if len(kinds) > 1:
            raise ValueError("matrix mixes exact and p-adic entries")
        if mode is None:
            mode = "padic" if kinds == {True} or ctx is not None else "exact"
        if mode == "padic":
            if ctx is None:
                raise ValueError("p-adic matrix needs a context")
            ents = {k: PadicScalar.from_rational(ctx, v) for k, v in ents.items()}
        self.entries = ents
        self.mode = mode
        self.ctx = ctx

    @classmethod
    def from_dense(cls, rows: Sequence[Sequence], mode: str | None = None, ctx=None) -> "PMatrix":
        nrows = len(rows)
        ncols = len(rows[0]) if rows else 0
        ents = {(i, j): v for i, r in enumerate(rows) for j, v in enumerate(r)}
        return cls(nrows, ncols, ents, mode, ctx)

    @classmethod
    def from_rows(cls, rows: Sequence[Row], ncols: int, mode: str | None = None, ctx=None) -> "PMatrix":
        ents = {(i, j): v for i, r in enumerate(rows) for j, v in r.items()}
        return cls(len(rows), ncols, ents, mode, ctx)

    @classmethod
    def identity(cls, n: int, mode: str = "exact", ctx=None) -> "PMatrix":
        return cls(n, n, {(i, i): 1 for i in range(n)}, mode, ctx)

    @classmethod
    def zeros(cls, nrows: int, ncols: int, mode: str = "exact", ctx=None) -> "PMatrix":
        return cls(nrows, ncols, {}, mode, ctx)

    def _zero(self):
        return self.ctx.zero() if self.mode == "padic" else Fraction(0)

    def __getitem__(self, ij):
        return self.entries.get(ij, self._zero())

    def rows(self) -> list[Row]:
        out = [dict() for _ in range(self.nrows)]
        for (i, j), v in self.entries.items():
            out[i][j] = v
        return out

    def to_dense(self) -> list[list]:
        z = self._zero()
        return [[self.entries.get((i, j), z) for j in range(self.ncols)] for i in range(self.nrows)]

    def transpose(self) -> "PMatrix":
        return PMatrix(self.ncols, self.nrows, {(j, i): v for (i, j), v in self.entries.items()}, self.mode, self.ctx)

    def _like(self, nrows, ncols, ents) -> "PMatrix":
        return PMatrix(nrows, ncols, ents, self.mode, self.ctx)

    def __add__(self, other: "PMatrix") -> "PMatrix":
        if (self.nrows, self.ncols) != (other.nrows, other.ncols):
            raise ValueError("shape mismatch")
        ents = dict(self.entries)
        for k, v in other.entries.items():
            ents[k] = ents[k] + v if k in ents else v
        return self._like(self.nrows, self.ncols, ents)

    def __neg__(self) -> "PMatrix":
        return self._like(self.nrows, self.ncols, {k: -v for k, v in self.entries.items()})

    def __sub__(self, other: "PMatrix") -> "PMatrix":
        return self + (-other)

    def scale(self, c) -> "PMatrix":
        return self._like(self.nrows, self.ncols, {k: v * c for k, v in self.entries.items()})

    def __matmul__(self, other: "PMatrix") -> "PMatrix":
        if self.ncols != other.nrows:
            raise ValueError(f"cannot multiply {self.nrows}x{self.ncols} by {other.nrows}x{other.ncols}")
        by_row: dict = {}
        for (k, j), v in other.entries.items():
            by_row.setdefault(k, []).append((j, v))
        ents: dict = {}
        for (i, k), a in self.entries.items():
            for j, b in by_row.get(k, ()):
                key = (i, j)
                ents[key] = ents[key] + a * b if key in ents else a * b
        return self._like(self.nrows, other.ncols, ents)

    def is_zero(self) -> bool:
        """Zero exactly (exact mode) or to every known digit (p-adic mode)."""
        return all(_scalar_is_zero(v) for v in self.entries.values())

    def __eq__(self, other):
        if not isinstance(other, PMatrix):
            return NotImplemented
        return (self.nrows, self.ncols) == (other.nrows, other.ncols) and (self - other).is_zero()

    def __repr__(self):
        return f"PMatrix({self.nrows}x{self.ncols}, {self.mode}, nnz={len(self.entries)})"

    # coordinate text format

    def to_coo(self, label: str = "matrix") -> str:
        lines = [f"% {label}", f"{self.nrows} {self.ncols} {len(self.entries)} {self.mode}"]
        if self.mode == "padic":
            lines[1] += f" {self.ctx.p} {self.ctx.precision}"
        for (i, j), v in sorted(self.entries.items()):
            if isinstance(v, PadicScalar):
                if v.is_indeterminate:
                    lines.append(f"{i} {j} O {v.valuation}")
                else:
                    lines.append(f"{i} {j} {v.unit} {v.valuation} {v.known}")
            else:
                lines.append(f"{i} {j} {v}")
        return "\n".join(lines) + "\n"

    @classmethod
    def from_coo(cls, text: str) -> "PMatrix":
        lines = [ln.strip() for ln in text.splitlines() if ln.strip() and not ln.lstrip().startswith("%")]
        if not lines:
            raise ParseError("empty matrix file", 1, 1, "")
        head = lines[0].split()
        try:
            nrows, ncols, nnz = int(head[0]), int(head[1]), int(head[2])
            mode = head[3] if len(head) > 3 else "exact"
            ctx = PadicContext(int(head[4]), int(head[5])) if mode == "padic" else None
        except (ValueError, IndexError) as exc:
            raise ParseError(f"bad header: {lines[0]!r}", 1, 1, lines[0]) from exc
        ents = {}
        for lineno, ln in enumerate(lines[1:], start=2):
            parts = ln.split()
            try:
                i, j = int(parts[0]), int(parts[1])
                if mode == "padic":
                    if parts[2] == "O":
                        v = PadicScalar.indeterminate(ctx, int(parts[3]))
                    else:
                        v = PadicScalar(ctx, int(parts[3]), int(parts[2]), int(parts[4]))
                else:
                    v = Fraction(parts[2])
            except (ValueError, IndexError) as exc:
                raise ParseError(f"bad entry line: {ln!r}", lineno, 1, ln) from exc
            ents[(i, j)] = v
        if len(ents) != nnz:
            raise ParseError(f"header announces {nnz} entries, found {len(ents)}", 1, 1, lines[0])
        return cls(nrows, ncols, ents, mode, ctx)


@dataclass
class EchelonResult:
    rank: int
    pivots: list  # (row position in echelon form, pivot column)
    reduced: PMatrix
    kernel_basis: list  # column vectors (dicts) spanning {v : M v = 0}
    image_basis: list  # rows of M's row space in reduced form
    precision: PrecisionReport


def echelon(M: PMatrix) -> EchelonResult:
    """Reduced row echelon form with minimal-valuation pivoting.

    In p-adic mode a column whose best candidate pivot has no known digit
    left (an indeterminate entry above the working precision) makes the rank
    ambiguous and raises RANK_UNCERTAIN with the candidate positions.
    """
    rows = [dict(r) for r in M.rows()]
    padic = M.mode == "padic"
    ctx = M.ctx
    report = PrecisionReport()
    zero = M._zero()
    pivots = []
    r = 0
    for c in range(M.ncols):
        best, best_val = None, INF
        ambiguous = []
        for i in range(r, len(rows)):
            v = rows[i].get(c)
            if v is None:
                continue
            if padic:
                if v.negligible():
                    rows[i].pop(c)
                    continue
                if v.is_indeterminate:
                    ambiguous.append((i, c))
                    continue
                val = v.valuation
            else:
                if v == 0:
                    rows[i].pop(c)
                    continue
                val = rational_valuation(v, ctx.p) if ctx else 0
            if val < best_val:
                best, best_val = i, val
        if best is None:
            if ambiguous:
                raise RankUncertain(f"column {c} has only indeterminate candidates", ambiguous)
            continue
        rows[r], rows[best] = rows[best], rows[r]
        prow = rows[r]
        inv = 1 / prow[c] if not padic else prow[c].inverse()
        prow = {k: v * inv for k, v in prow.items()}
        if padic:
            report.max_pivot_valuation = max(report.max_pivot_valuation, int(best_val))
            report.min_pivot_precision = min(report.min_pivot_precision, rows[r][c].known)
            prow = {k: v for k, v in prow.items() if not v.negligible()}
        rows[r] = prow
        for i in range(len(rows)):
            if i == r or c not in rows[i]:
                continue
            f = rows[i][c]
            new = dict(rows[i])
            for k, v in prow.items():
                nv = new[k] - f * v if k in new else -(f * v)
                if _scalar_is_zero(nv):
                    new.pop(k, None)
                else:
                    new[k] = nv
            new.pop(c, None)
            rows[i] = new
        pivots.append((r, c))
        r += 1
    # leftover rows carry only negligible or indeterminate entries
    for i in range(r, len(rows)):
        bad = [(i, k) for k, v in rows[i].items() if not _scalar_is_zero(v)]
        if bad:
            raise RankUncertain("residual entries without known digits", bad)
    reduced = PMatrix.from_rows(rows[:r], M.ncols, M.mode, ctx)
    pivot_cols = [c for _, c in pivots]
    free = [c for c in range(M.ncols) if c not in set(pivot_cols)]
    one = ctx.one() if padic else Fraction(1)
    kernel = []
    for fcol in free:
        vec = {fcol: one}
        for (ri, pc) in pivots:
            v = rows[ri].get(fcol)
            if v is not None and not _scalar_is_zero(v):
                vec[pc] = -v
        kernel.append(vec)
    image = [dict(rows[i]) for i in range(r)]
    return EchelonResult(r, pivots, reduced, kernel, image, report)


def solve_mod_p(A_rows: Sequence[Row], b: Row, p: int):
    """Find ``c`` with ``sum c_i A_i == b`` over F_p, or None."""
    # Gaussian elimination keeping track of combinations
    pivots: dict = {}
    for idx, row in enumerate(A_rows):
        r = {k: v % p for k, v in row.items() if v % p}
        comb = {idx: 1}
        while r:
            c = min(r)
            if c not in pivots:
                inv = pow(r[c], -1, p)
                pivots[c] = ({k: v * inv % p for k, v in r.items()}, {k: v * inv % p for k, v in comb.items()})
                break
            pr, pc = pivots[c]
            f = r[c]
            r = _axpy_mod(r, pr, -f, p)
            comb = _axpy_mod(comb, pc, -f, p)
    target = {k: v % p for k, v in b.items() if v % p}
    sol: dict = {}
    while target:
        c = min(target)
        if c not in pivots:
            return None
        pr, pc = pivots[c]
        f = target[c]
        target = _axpy_mod(target, pr, -f, p)
        sol = _axpy_mod(sol, pc, f, p)
    return sol


def _axpy_mod(x: dict, y: dict, a: int, p: int) -> dict:
    out = dict(x)
    for k, v in y.items():
        nv = (out.get(k, 0) + a * v) % p
        if nv:
            out[k] = nv
        else:
            out.pop(k, None)
    return out


def solve_exact(A_rows: Sequence[Row], b: Row):
    """Find rational ``c`` with ``sum c_i A_i == b``, or None."""
    pivots: dict = {}
    for idx, row in enumerate(A_rows):
        r = {k: Fraction(v) for k, v in row.items() if v}
        comb = {idx: Fraction(1)}
        while r:
            c = min(r)
            if c not in pivots:
                inv = 1 / r[c]
                pivots[c] = ({k: v * inv for k, v in r.items()}, {k: v * inv for k, v in comb.items()})
                break
            pr, pc = pivots[c]
            f = r[c]
            r = _axpy(r, pr, -f)
            comb = _axpy(comb, pc, -f)
    target = {k: Fraction(v) for k, v in b.items() if v}
    sol: dict = {}
    while target:
        c = min(target)
        if c not in pivots:
            return None
        pr, pc = pivots[c]
        f = target[c]
        target = _axpy(target, pr, -f)
        sol = _axpy(sol, pc, f)
    return sol


def _axpy(x: dict, y: dict, a) -> dict:
    out = dict(x)
    for k, v in y.items():
        nv = out.get(k, 0) + a * v
        if nv:
            out[k] = nv
        else:
            out.pop(k, None)
    return out


# ---------------------------------------------------------------------------
# certificates and the stabilization protocol


@dataclass(frozen=True)
class BettiCertificate:
    degree: int
    betti: int
    min_pivot_precision: int | None
    parameters: dict
    stable: bool

    def as_dict(self) -> dict:
        return asdict(self)


@dataclass
class SchedulePoint:
    D: int
    nMax: int
    mMax: int
    e: int | None = None
    c0: int = 0
    N: int = 12
    gamma: Fraction = Fraction(1, 2)

    def __post_init__(self):
        self.gamma = Fraction(self.gamma)
        for name in ("D", "nMax", "mMax", "N"):
            if getattr(self, name) < (0 if name == "D" else 1):
                raise ValueError(f"schedule value {name}={getattr(self, name)} out of range")
        if self.e is None:
            self.e = -(-self.D // self.nMax)

    def as_dict(self) -> dict:
        return {
            "D": self.D,
            "nMax": self.nMax,
            "mMax": self.mMax,
            "e": self.e,
            "c0": self.c0,
            "N": self.N,
            "gamma": str(self.gamma),
        }


DEFAULT_SCHEDULE = (
    SchedulePoint(D=8, nMax=3, mMax=1),
    SchedulePoint(D=12, nMax=4, mMax=2),
    SchedulePoint(D=16, nMax=5, mMax=3),
)


@dataclass
class PointOutcome:
    point: SchedulePoint
    betti: list
    min_pivot_precision: int | None
    uncertain: bool = False
    extra: dict = field(default_factory=dict)


def stabilization_protocol(
    problem,
    schedule: Sequence[SchedulePoint],
    evaluate: Callable | None = None,
    raise_precision: int = 4,
) -> tuple[list[BettiCertificate], list[PointOutcome]]:
    """Run ``evaluate(problem, point)`` along the schedule until two
    consecutive points agree.

    ``evaluate`` returns a :class:`PointOutcome`; by default the full
    pipeline is used.  A point whose ranks are uncertain is retried once with
    ``N`` raised by ``raise_precision``; if it is still uncertain it cannot be
    accepted.  Returns the certificates and the full trace.
    """
    if not schedule:
        raise ValueError("empty schedule")
    if evaluate is None:
        from .pipeline import evaluate_point as evaluate
    trace: list[PointOutcome] = []
    for point in schedule:
        try:
            out = evaluate(problem, point)
        except RankUncertain:
            retry = SchedulePoint(**{**point.__dict__, "N": point.N + raise_precision})
            try:
                out = evaluate(problem, retry)
            except RankUncertain as exc:
                out = PointOutcome(point, [], None, uncertain=True, extra={"error": str(exc)})
        trace.append(out)
        if len(trace) >= 2:
            a, b = trace[-2], trace[-1]
            if not a.uncertain and not b.uncertain and a.betti == b.betti:
                params = b.point.as_dict()
                mpp = b.min_pivot_precision
                certs = [BettiCertificate(q, h, mpp, params, True) for q, h in enumerate(b.betti)]
                return certs, trace
    raise NotStabilized(
        f"Betti numbers did not agree at two consecutive schedule points "
        f"({', '.join(str(t.betti) for t in trace)})",
        trace,
    )
