"""Brute-force algebraic de Rham cohomology of ``Q[x]/(g)`` at bounded degree.

This is an independent reference: it parses relations with sympy, reduces
by a Gröbner basis, imposes the Kähler relations ``dg ^ dx_J = 0`` and
takes ranks with sympy's exact matrices.  No windows, p-adic numbers or
pro-systems are involved.

Cohomology at cap ``D`` is ``(Z + B) / B`` where cocycles ``Z`` are forms of
degree <= D whose differential vanishes in the quotient, and boundaries
``B`` are differentials of forms of degree <= D + slack.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from itertools import combinations, combinations_with_replacement

import sympy
from sympy import QQ
from sympy.parsing.sympy_parser import convert_xor, parse_expr, standard_transformations
from sympy.polys.matrices import DomainMatrix
from sympy.polys.orderings import monomial_key

from .errors import NotStabilized, ParseError

_TRANSFORMS = standard_transformations + (convert_xor,)


def _parse(text: str, symbols: dict, p: int | None) -> sympy.Expr:
    local = dict(symbols)
    if p is not None and "p" not in local:
        local["p"] = sympy.Integer(p)
    try:
        return parse_expr(text, local_dict=local, transformations=_TRANSFORMS, evaluate=True)
    except (SyntaxError, TypeError, sympy.SympifyError) as exc:
        raise ParseError(f"cannot parse relation {text!r}: {exc}", 1, 1, text) from None


@dataclass
class OracleProblem:
    variables: tuple
    relations: tuple = ()  # strings or sympy expressions
    D: int = 12
    slack: int = 2
    order: str = "grevlex"
    p: int | None = None  # only used to interpret a literal ``p``

    def __post_init__(self):
        self.variables = tuple(self.variables)
        self.relations = tuple(self.relations)
        if self.D < max(self.relation_degrees, default=0):
            raise ValueError("degree cap below a relation degree")

    @cached_property
    def gens(self) -> tuple:
        return tuple(sympy.Symbol(v) for v in self.variables)

    @cached_property
    def polys(self) -> list:
        symbols = dict(zip(self.variables, self.gens))
        out = []
        for r in self.relations:
            expr = _parse(r, symbols, self.p) if isinstance(r, str) else sympy.sympify(r)
            poly = sympy.Poly(expr, *self.gens, domain=QQ)
            if poly.is_zero:
                raise ValueError("zero relation")
            out.append(poly)
        return out

    @property
    def relation_degrees(self) -> list:
        return [g.total_degree() for g in self.polys]

    @property
    def nvars(self) -> int:
        return len(self.variables)

    def at(self, D: int) -> "OracleProblem":
        return OracleProblem(self.variables, self.relations, D, self.slack, self.order, self.p)


@dataclass
class OracleResult:
    betti: list
    stable: bool
    by_degree_cap: dict = field(default_factory=dict)  # D -> betti

    def as_dict(self) -> dict:
        return {"betti": self.betti, "stable": self.stable, "by_degree_cap": {str(k): v for k, v in self.by_degree_cap.items()}}


class _DeRham:
    """Ω* of the quotient ring in coordinates (standard monomial, dx index set)."""

    def __init__(self, prob: OracleProblem, cap: int):
        self.prob = prob
        self.cap = cap
        self.n = prob.nvars
        gens = prob.gens
        if prob.polys:
            self.G = sympy.groebner([g.as_expr() for g in prob.polys], *gens, order=prob.order, domain=QQ)
            self.leads = [sympy.Poly(g, *gens).monoms(order=monomial_key(prob.order))[0] for g in self.G.exprs]
        else:
            self.G = None
            self.leads = []
        self.standard = [u for u in self._monomials(cap) if not any(_divides(l, u) for l in self.leads)]
        self._index: dict = {}

    def _monomials(self, D: int) -> list:
        out = []
        for deg in range(D + 1):
            for combo in combinations_with_replacement(range(self.n), deg):
                e = [0] * self.n
                for i in combo:
                    e[i] += 1
                out.append(tuple(e))
        return out

    def index(self, k: int) -> dict:
        if k not in self._index:
            keys = [(u, I) for u in self.standard for I in combinations(range(self.n), k)]
            self._index[k] = {key: i for i, key in enumerate(keys)}
        return self._index[k]

    def normal_form(self, poly: sympy.Poly) -> dict:
        if self.G is not None and not poly.is_zero:
            _, rem = self.G.reduce(poly.as_expr())
            poly = sympy.Poly(rem, *self.prob.gens, domain=QQ)
        return dict(poly.terms())

    def row(self, coeffs: dict, k: int) -> dict:
        """Coordinates of ``sum coeffs[I] dx_I`` (coefficients sympy Polys)."""
        idx = self.index(k)
        out: dict = {}
        for I, c in coeffs.items():
            for mono, v in self.normal_form(c).items():
                col = idx[(mono, I)]
                out[col] = out.get(col, 0) + v
        return {c: v for c, v in out.items() if v}

    def d(self, u: tuple, I: tuple) -> dict:
        """d(x^u dx_I) as {J: Poly}."""
        gens = self.prob.gens
        mono = sympy.Poly(sympy.Mul(*[g**e for g, e in zip(gens, u)]), *gens, domain=QQ)
        out = {}
        for i in range(self.n):
            if i in I or u[i] == 0:
                continue
            J = tuple(sorted(I + (i,)))
            sign = (-1) ** sum(1 for j in I if j < i)
            out[J] = out.get(J, 0) + sign * mono.diff(gens[i])
        return out

    def cochains(self, k: int, D: int) -> list:
        if k < 0 or k > self.n:
            return []
        return [(u, I) for (u, I) in self.index(k) if sum(u) <= D]

    def kahler(self, k: int) -> list:
        """Rows of ``x^u dg ^ dx_J`` of degree <= cap."""
        if k < 1 or k > self.n:
            return []
        gens = self.prob.gens
        rows = []
        for g in self.prob.polys:
            dg = {i: g.diff(gens[i]) for i in range(self.n)}
            top = self.cap - g.total_degree() + 1
            for u in self._monomials(max(top, -1)) if top >= 0 else ():
                um = sympy.Poly(sympy.Mul(*[x**e for x, e in zip(gens, u)]), *gens, domain=QQ)
                for J in combinations(range(self.n), k - 1):
                    coeffs: dict = {}
                    for i, c in dg.items():
                        if i in J or c.is_zero:
                            continue
                        K = tuple(sorted(J + (i,)))
                        sign = (-1) ** sum(1 for j in J if j < i)
                        coeffs[K] = coeffs.get(K, 0) + sign * um * c
                    r = self.row(coeffs, k)
                    if r:
                        rows.append(r)
        return rows


def _divides(a: tuple, b: tuple) -> bool:
    return all(x <= y for x, y in zip(a, b))


def _matrix(rows: list, ncols: int) -> DomainMatrix:
    data = {i: {c: QQ.convert(v) for c, v in r.items()} for i, r in enumerate(rows) if r}
    return DomainMatrix(data, (len(rows), ncols), QQ)


def _rank(rows: list, ncols: int) -> int:
    rows = [r for r in rows if r]
    if not rows or ncols == 0:
        return 0
    return _matrix(rows, ncols).rank()


def _betti_at(prob: OracleProblem, D: int) -> list:
    cx = _DeRham(prob, D + prob.slack)
    n = prob.nvars
    out = []
    for q in range(n + 1):
        width_q = len(cx.index(q))
        X = cx.cochains(q, D)
        dX = [cx.row(cx.d(u, I), q + 1) if q < n else {} for (u, I) in X]
        K_next = cx.kahler(q + 1)
        # cocycles: combinations a with a.dX in span K_next
        stacked = dX + K_next
        width_next = len(cx.index(q + 1)) if q < n else 0
        if width_next and any(stacked):
            null = _matrix(stacked, width_next).transpose().nullspace().to_list()
            Z = []
            for k in range(len(null)):
                z: dict = {}
                for j, (u, I) in enumerate(X):
                    c = null[k][j]
                    if c:
                        col = cx.index(q)[(u, I)]
                        z[col] = z.get(col, 0) + c
                Z.append({c: v for c, v in z.items() if v})
        else:
            Z = [{cx.index(q)[key]: 1} for key in X]
        B = cx.kahler(q) + [cx.row(cx.d(u, I), q) for (u, I) in cx.cochains(q - 1, cx.cap)]
        out.append(_rank(Z + B, width_q) - _rank(B, width_q))
    return out


def algebraic_de_rham_betti(prob: OracleProblem, step: int = 4, strict: bool = False) -> OracleResult:
    """Betti numbers at caps D and D + step; stable when they agree."""
    caps = (prob.D, prob.D + step)
    results = {D: _betti_at(prob, D) for D in caps}
    stable = results[caps[0]] == results[caps[1]]
    if strict and not stable:
        raise NotStabilized(f"oracle Betti numbers differ between D={caps[0]} and D={caps[1]}", [results])
    return OracleResult(results[caps[1]], stable, results)


def is_nonzero_class(prob: OracleProblem, form: dict) -> bool:
    """Whether a closed form ``{dx index tuple: polynomial text}`` is not exact at the cap.

    Detection is by failure of the bounded-degree antiderivative solve: the
    form is a class iff it is not in the span of Kähler relations plus
    differentials of forms of degree <= cap + slack.
    """
    symbols = dict(zip(prob.variables, prob.gens))
    coeffs = {tuple(I): sympy.Poly(_parse(t, symbols, prob.p), *prob.gens, domain=QQ) for I, t in form.items()}
    degrees = {len(I) for I in coeffs}
    if len(degrees) != 1:
        raise ValueError("mixed form degrees")
    (k,) = degrees
    cx = _DeRham(prob, prob.D + prob.slack)
    target = cx.row(coeffs, k)
    if k < prob.nvars:
        closed = [cx.row(cx.d(u, I), k + 1) for (u, I) in _support(cx, target, k)]
        if _rank(cx.kahler(k + 1) + [_combine(closed, target)], len(cx.index(k + 1))) != _rank(
            cx.kahler(k + 1), len(cx.index(k + 1))
        ):
            raise ValueError("form is not closed")
    B = cx.kahler(k) + [cx.row(cx.d(u, I), k) for (u, I) in cx.cochains(k - 1, cx.cap)]
    width = len(cx.index(k))
    return _rank(B + [target], width) > _rank(B, width)


def _support(cx: _DeRham, row: dict, k: int):
    keys = {i: key for key, i in cx.index(k).items()}
    return [keys[c] for c in row]


def _combine(rows: list, weights_row: dict) -> dict:
    out: dict = {}
    for r, w in zip(rows, weights_row.values()):
        for c, v in r.items():
            out[c] = out.get(c, 0) + w * v
    return {c: v for c, v in out.items() if v}
