"""Homotopy limit of the level tower and its lim / lim¹ bookkeeping.

The tower ``C_1 <- C_2 <- .. <- C_M`` of truncated complexes (the structure
maps σ built by ``build_pro_complex`` are identities on ambient coordinates,
but any chain maps may be supplied) is replaced by the mapping cone of
``1 - σ``, shifted by -1.  In cone degree q the cochains are

    x = (x_1, .., x_M)        x_m in C^q_m
    y = (y_1, .., y_{M-1})    y_m in C^(q-1)_m

with ``D(x, y) = (dx, (x_m - σ x_{m+1}) - d y_m)``.  The target slot
``y_M`` is absent at truncation, so the kernel of ``1 - σ`` on cochains is
the diagonal and a constant tower has the cohomology of a single level.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property, lru_cache

from .bornology import GrowthFunction, Window
from .derham import ChainMapRep, TruncatedComplex, structure_map
from .errors import NotStabilized, WindowMismatch
from .linalg import PrecisionReport, RankResult, RowReducer, induced_rank, quotient_betti
from .padic import PadicContext
from .presentation import Presentation


@dataclass(eq=False)
class ProComplex:
    levels: list  # TruncatedComplex for m = 1..M
    sigmas: list  # ChainMapRep, sigmas[i]: levels[i+1] -> levels[i]

    def __post_init__(self):
        if not self.levels:
            raise ValueError("a pro-complex needs at least one level")
        if len(self.sigmas) != len(self.levels) - 1:
            raise WindowMismatch("need one structure map between adjacent levels")
        pres = self.levels[0].pres
        for i, s in enumerate(self.sigmas):
            if s.source is not self.levels[i + 1] or s.target is not self.levels[i]:
                raise WindowMismatch(f"structure map {i + 1} does not connect levels {i + 2} and {i + 1}")
        if any(c.pres != pres for c in self.levels):
            raise WindowMismatch("levels use different presentations")
        if len({c.cap for c in self.levels}) != 1:
            raise WindowMismatch("levels use different degree caps")

    @property
    def depth(self) -> int:
        return len(self.levels)

    @property
    def nvars(self) -> int:
        return self.levels[0].nvars

    @property
    def mode(self) -> str:
        return self.levels[0].mode


def level_window(m: int, gamma, nMax: int, e: int, c0: int, D: int, max_generators: int | None = None) -> Window:
    w = Window(m, GrowthFunction(gamma), nMax, e, c0, D)
    return w.with_(max_generators=max_generators) if max_generators else w


def build_pro_complex(
    pres: Presentation,
    mMax: int,
    *,
    D: int,
    nMax: int,
    e: int,
    c0: int = 0,
    gamma=GrowthFunction().gamma,
    budget: int = 1,
    mode: str = "exact",
    ctx: PadicContext | None = None,
    verify: bool = True,
    max_generators: int | None = None,
) -> ProComplex:
    levels = [
        TruncatedComplex(pres, level_window(m, gamma, nMax, e, c0, D, max_generators), budget, mode, ctx, verify)
        for m in range(1, mMax + 1)
    ]
    sigmas = [structure_map(levels[i + 1], levels[i]) for i in range(mMax - 1)]
    pc = ProComplex(levels, sigmas)
    if verify:
        for s in sigmas:
            if not s.commutes_with_d():
                raise AssertionError(f"{s.label} does not commute with d")
    return pc


# ---------------------------------------------------------------------------
# the cone


def _add(out: dict, col: int, v: int):
    nv = out.get(col, 0) + v
    if nv:
        out[col] = nv
    else:
        del out[col]


@dataclass(eq=False)
class ConeComplex:
    pro: ProComplex

    @property
    def M(self) -> int:
        return self.pro.depth

    @property
    def top(self) -> int:
        """Highest cone degree with nonzero cochains."""
        return self.pro.nvars + 1 if self.M > 1 else self.pro.nvars

    def _w(self, k: int) -> int:
        return self.pro.levels[0].width(k)

    def width(self, q: int) -> int:
        return self.M * self._w(q) + (self.M - 1) * self._w(q - 1)

    def x_offset(self, q: int, m: int) -> int:
        return (m - 1) * self._w(q)

    def y_offset(self, q: int, m: int) -> int:
        return self.M * self._w(q) + (m - 1) * self._w(q - 1)

    def _place(self, rows, offset: int) -> list[dict]:
        return [{c + offset: v for c, v in r.items()} for r in rows]

    def _assemble(self, q: int, pick) -> list[dict]:
        out = []
        for m, lvl in enumerate(self.pro.levels, start=1):
            out += self._place(pick(lvl, q), self.x_offset(q, m))
        for m, lvl in enumerate(self.pro.levels[:-1], start=1):
            out += self._place(pick(lvl, q - 1), self.y_offset(q, m))
        return out

    @lru_cache(maxsize=None)
    def small_rows(self, q: int) -> list[dict]:
        return self._assemble(q, lambda lvl, k: lvl.small_rows(k))

    @lru_cache(maxsize=None)
    def big_rows(self, q: int) -> list[dict]:
        return self._assemble(q, lambda lvl, k: lvl.big_rows(k))

    @lru_cache(maxsize=None)
    def tails(self, q: int) -> list[dict]:
        return self._assemble(q, lambda lvl, k: list(lvl.tails(k)))

    def D(self, row: dict, q: int) -> dict:
        """Cone differential from degree q to q+1."""
        M = self.M
        wq, wq1 = self._w(q), self._w(q - 1)
        xs: dict = {}
        ys: dict = {}
        split = M * wq
        for c, v in row.items():
            if c < split:
                xs.setdefault(c // wq + 1, {})[c % wq] = v
            else:
                c -= split
                ys.setdefault(c // wq1 + 1, {})[c % wq1] = v
        n = self.pro.nvars
        lvl = self.pro.levels[0]
        out: dict = {}
        for m, r in xs.items():
            if q < n:
                off = self.x_offset(q + 1, m)
                for c, v in lvl.d(r, q).items():
                    _add(out, c + off, v)
            if m < M:
                off = self.y_offset(q + 1, m)
                for c, v in r.items():
                    _add(out, c + off, v)
            if m > 1:
                off = self.y_offset(q + 1, m - 1)
                for c, v in self.pro.sigmas[m - 2].apply(r, q).items():
                    _add(out, c + off, -v)
        if 1 <= q <= n:
            for m, r in ys.items():
                off = self.y_offset(q + 1, m)
                for c, v in lvl.d(r, q - 1).items():
                    _add(out, c + off, -v)
        return out

    def D_rows(self, rows, q: int) -> list[dict]:
        return [self.D(r, q) for r in rows]

    def new_reducer(self, label: str = "") -> RowReducer:
        return self.pro.levels[0].new_reducer(label)

    @lru_cache(maxsize=None)
    def tail_reducer(self, q: int) -> RowReducer:
        red = self.new_reducer(f"cone tails q={q}")
        red.extend(self.tails(q))
        return red

    @lru_cache(maxsize=None)
    def boundary_reducer(self, q: int) -> RowReducer:
        red = self.tail_reducer(q).copy()
        red.label = f"cone boundaries q={q}"
        red.extend(self.D_rows(self.big_rows(q - 1), q - 1))
        return red

    def check(self) -> bool:
        """D∘D = 0 on all cochains and tails are closed under D."""
        for q in range(self.top + 1):
            for r in self.small_rows(q) + self.big_rows(q):
                if self.D(self.D(r, q), q + 1):
                    raise AssertionError(f"cone D∘D != 0 in degree {q}")
            nxt = RowReducer("exact")
            nxt.extend(self.tails(q + 1))
            for r in self.tails(q):
                if not nxt.contains(self.D(r, q)):
                    raise AssertionError(f"cone tails not closed under D in degree {q}")
        return True

    def betti_result(self, q: int) -> RankResult:
        X = self.small_rows(q)
        return quotient_betti(X, self.D_rows(X, q), self.boundary_reducer(q), self.tail_reducer(q + 1), self.width(q))

    def betti(self) -> list[int]:
        return [self.betti_result(q).value for q in range(self.pro.nvars + 1)]


def build_cone(pc: ProComplex) -> ConeComplex:
    return ConeComplex(pc)


# ---------------------------------------------------------------------------
# lim / lim¹


@dataclass
class LimReport:
    level_betti: list  # [m][q]
    sigma_ranks: list  # [m][q], rank of H(C_{m+1}) -> H(C_m)
    lim: list  # per degree: rank of the composite H(C_M) -> H(C_1)
    lim1: list  # per degree: cokernel of 1 - σ on the product of level cohomologies
    cone_betti: list
    additive: bool
    tower_stable: bool
    precision: PrecisionReport = field(default_factory=PrecisionReport)

    def as_dict(self) -> dict:
        return {
            "level_betti": self.level_betti,
            "sigma_ranks": self.sigma_ranks,
            "lim": self.lim,
            "lim1": self.lim1,
            "cone_betti": self.cone_betti,
            "additive": self.additive,
            "tower_stable": self.tower_stable,
        }


def _one_minus_sigma_rank(pc: ProComplex, q: int) -> RankResult:
    """Rank of ``1 - σ: prod_{m<=M} H^q(C_m) -> prod_{m<M} H^q(C_m)``."""
    levels = pc.levels
    M = pc.depth
    n = pc.nvars
    w_src = levels[0].width(q + 1) if q < n else 0
    w_tgt = levels[0].width(q)
    X, SX, TX = [], [], []
    for m, lvl in enumerate(levels, start=1):
        for r in lvl.small_rows(q):
            X.append(r)
            SX.append({c + (m - 1) * w_src: v for c, v in lvl.d(r, q).items()} if q < n else {})
            t: dict = {}
            if m < M:
                for c, v in r.items():
                    _add(t, c + (m - 1) * w_tgt, v)
            if m > 1:
                for c, v in pc.sigmas[m - 2].apply(r, q).items():
                    _add(t, c + (m - 2) * w_tgt, -v)
            TX.append(t)
    S_rel = levels[0].new_reducer("product tails")
    if q < n:
        for m, lvl in enumerate(levels, start=1):
            S_rel.extend({c + (m - 1) * w_src: v for c, v in r.items()} for r in lvl.tails(q + 1))
    T_rel = levels[0].new_reducer("product boundaries")
    for m, lvl in enumerate(levels[:-1], start=1):
        T_rel.absorb(lvl.boundary_reducer(q), (m - 1) * w_tgt)
    return induced_rank(X, SX, TX, S_rel, T_rel, max(M * w_src, 1))


def lim_lim1_report(pc: ProComplex, cone: ConeComplex | None = None, strict: bool = False) -> LimReport:
    """Per-degree lim and lim¹ of the level cohomology tower at truncation.

    ``lim`` is the eventual image, i.e. the rank of ``H(C_M) -> H(C_1)``;
    ``lim¹`` is the cokernel of ``1 - σ``.  Additivity compares
    ``lim_q + lim¹_(q-1)`` with the cone Betti numbers.  With ``strict`` an
    unsettled tower raises :class:`NotStabilized`.
    """
    n = pc.nvars
    M = pc.depth
    prec = PrecisionReport()

    def take(res: RankResult) -> int:
        nonlocal prec
        prec = prec.merge(res.report)
        return res.value

    level_betti = [[take(lvl.betti_result(q)) for q in range(n + 1)] for lvl in pc.levels]
    sigma_ranks = [[take(s.cohomology_rank(q)) for q in range(n + 1)] for s in pc.sigmas]
    if M == 1:
        lim = list(level_betti[0])
        lim1 = [0] * (n + 1)
    else:
        composite = compose(pc.sigmas)
        lim = [take(composite.cohomology_rank(q)) for q in range(n + 1)]
        lim1 = []
        for q in range(n + 1):
            total = sum(level_betti[m][q] for m in range(M - 1))
            lim1.append(total - take(_one_minus_sigma_rank(pc, q)))
    cone = cone or build_cone(pc)
    cone_betti = [take(cone.betti_result(q)) for q in range(n + 1)]
    additive = all(cone_betti[q] == lim[q] + (lim1[q - 1] if q else 0) for q in range(n + 1))
    tower_stable = M == 1 or (level_betti[-1] == level_betti[-2] and sigma_ranks[-1] == level_betti[-1])
    report = LimReport(level_betti, sigma_ranks, lim, lim1, cone_betti, additive, tower_stable, prec)
    if strict and not tower_stable:
        raise NotStabilized("level cohomology still changes between the last two levels", [report.as_dict()])
    return report


def compose(sigmas) -> ChainMapRep:
    """σ_1 ∘ .. ∘ σ_{M-1}: the top level mapped down to level 1."""
    sigmas = list(sigmas)

    def apply(row: dict, k: int) -> dict:
        for s in reversed(sigmas):
            row = s.apply(row, k)
        return row

    return ChainMapRep(sigmas[-1].source, sigmas[0].target, apply, "composite")


def chain_map_ranks(phi: ChainMapRep) -> list[int]:
    return phi.cohomology_ranks()
