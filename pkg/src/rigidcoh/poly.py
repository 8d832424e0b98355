"""Sparse polynomial differential forms.

A :class:`PolyForm` of form degree ``k`` in ``n`` variables is a finite sum
``c * x^a dx_I`` with ``a`` an exponent tuple and ``I`` a strictly increasing
tuple of ``k`` variable indices.  Coefficients are exact rationals (ints or
Fractions) or :class:`~rigidcoh.padic.PadicScalar`; one form never mixes the
two.
"""

from __future__ import annotations

from fractions import Fraction
from functools import lru_cache
from itertools import combinations, combinations_with_replacement
from typing import Iterable, Mapping

from .errors import ContextError, UnboundVariable
from .padic import PadicScalar

Mono = tuple  # exponent tuple, one entry per variable


def mono_key(e: Mono):
    """Graded lex sort key; smaller key = larger monomial."""
    return (-sum(e), tuple(-a for a in e))


def term_key(term):
    mono, dx = term
    return (mono_key(mono), dx)


@lru_cache(maxsize=None)
def monomials(nvars: int, max_degree: int) -> tuple:
    """All exponent tuples of total degree <= max_degree in term order."""
    out = []
    for d in range(max_degree + 1):
        for combo in combinations_with_replacement(range(nvars), d):
            e = [0] * nvars
            for i in combo:
                e[i] += 1
            out.append(tuple(e))
    out.sort(key=mono_key)
    return tuple(out)


@lru_cache(maxsize=None)
def wedge_sets(nvars: int, k: int) -> tuple:
    return tuple(combinations(range(nvars), k))


def _is_zero(c) -> bool:
    if isinstance(c, PadicScalar):
        return c.is_zero
    return c == 0


def _mode_of(c):
    return c.ctx if isinstance(c, PadicScalar) else None


def merge_dx(a: tuple, b: tuple):
    """Sign and sorted index tuple of dx_a ^ dx_b (sign 0 if they overlap)."""
    if set(a) & set(b):
        return 0, None
    arr = a + b
    inversions = sum(1 for i in range(len(arr)) for j in range(i + 1, len(arr)) if arr[i] > arr[j])
    return (-1) ** inversions, tuple(sorted(arr))


class PolyForm:
    __slots__ = ("nvars", "degree", "terms")

    def __init__(self, nvars: int, degree: int = 0, terms: Mapping | None = None):
        self.nvars = nvars
        self.degree = degree
        clean = {}
        ctx = None
        for (mono, dx), c in (terms or {}).items():
            if len(mono) != nvars:
                raise ValueError(f"exponent {mono} does not have {nvars} entries")
            if len(dx) != degree or list(dx) != sorted(set(dx)):
                raise ValueError(f"dx index {dx} is not a strictly increasing {degree}-tuple")
            c_ctx = _mode_of(c)
            if c_ctx is not None:
                if ctx is not None and ctx.p != c_ctx.p:
                    raise ContextError("coefficients from different p-adic contexts")
                ctx = c_ctx
            if not _is_zero(c):
                clean[(tuple(mono), tuple(dx))] = c
        modes = {isinstance(c, PadicScalar) for c in clean.values()}
        if len(modes) > 1:
            raise ContextError("a form cannot mix exact and p-adic coefficients")
        self.terms = clean

    # constructors

    @classmethod
    def constant(cls, nvars: int, c=1) -> "PolyForm":
        return cls(nvars, 0, {((0,) * nvars, ()): c})

    @classmethod
    def var(cls, nvars: int, i: int) -> "PolyForm":
        e = [0] * nvars
        e[i] = 1
        return cls(nvars, 0, {(tuple(e), ()): 1})

    @classmethod
    def dx(cls, nvars: int, i: int) -> "PolyForm":
        return cls(nvars, 1, {((0,) * nvars, (i,)): 1})

    @classmethod
    def monomial(cls, mono: Mono, dx: tuple = (), c=1) -> "PolyForm":
        return cls(len(mono), len(dx), {(tuple(mono), tuple(dx)): c})

    @classmethod
    def from_poly(cls, nvars: int, coeffs: Mapping) -> "PolyForm":
        return cls(nvars, 0, {(m, ()): c for m, c in coeffs.items()})

    # inspection

    @property
    def scalar_mode(self) -> str:
        for c in self.terms.values():
            return "padic" if isinstance(c, PadicScalar) else "exact"
        return "exact"

    @property
    def ctx(self):
        for c in self.terms.values():
            return _mode_of(c)
        return None

    def is_zero(self) -> bool:
        return not self.terms

    def poly_degree(self) -> int:
        """Largest total degree of a coefficient monomial (-1 for zero)."""
        return max((sum(m) for m, _ in self.terms), default=-1)

    def sorted_terms(self):
        return sorted(self.terms.items(), key=lambda t: term_key(t[0]))

    def coefficients(self) -> dict:
        """Degree-0 view: monomial -> coefficient."""
        return {m: c for (m, _), c in self.terms.items()}

    def __eq__(self, other):
        if not isinstance(other, PolyForm):
            return NotImplemented
        if self.nvars != other.nvars:
            return False
        if self.is_zero() or other.is_zero():
            return self.is_zero() and other.is_zero()
        return self.degree == other.degree and self.terms == other.terms

    def __hash__(self):
        return hash((self.nvars, self.degree, frozenset(self.terms.items())))

    def __repr__(self):
        return f"PolyForm({format_form(self)})"

    # linear structure

    def _check_compatible(self, other: "PolyForm"):
        if self.nvars != other.nvars:
            raise ContextError(f"{self.nvars} vs {other.nvars} variables")
        a, b = self.ctx, other.ctx
        if a is not None and b is not None and a.p != b.p:
            raise ContextError("forms over different p-adic contexts")
        if self.terms and other.terms and self.scalar_mode != other.scalar_mode:
            raise ContextError("cannot combine exact and p-adic forms")

    def __add__(self, other):
        if not isinstance(other, PolyForm):
            if other == 0:
                return self
            return self + PolyForm.constant(self.nvars, other)
        self._check_compatible(other)
        if other.is_zero():
            return self
        if self.is_zero():
            return other
        if self.degree != other.degree:
            raise ValueError("cannot add forms of different degree")
        out = dict(self.terms)
        for k, c in other.terms.items():
            out[k] = out[k] + c if k in out else c
        return PolyForm(self.nvars, self.degree, out)

    __radd__ = __add__

    def __neg__(self):
        return PolyForm(self.nvars, self.degree, {k: -c for k, c in self.terms.items()})

    def __sub__(self, other):
        if not isinstance(other, PolyForm):
            return self + (-other)
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def scale(self, c) -> "PolyForm":
        return PolyForm(self.nvars, self.degree, {k: v * c for k, v in self.terms.items()})

    def __mul__(self, other):
        if isinstance(other, PolyForm):
            return self.wedge(other)
        return self.scale(other)

    def __rmul__(self, other):
        return self.scale(other)

    def __pow__(self, k: int):
        if self.degree != 0:
            raise ValueError("only 0-forms have powers")
        out = PolyForm.constant(self.nvars)
        for _ in range(k):
            out = out.wedge(self)
        return out

    # products and derivatives

    def wedge(self, other: "PolyForm") -> "PolyForm":
        self._check_compatible(other)
        if self.degree + other.degree > self.nvars:
            raise ValueError("form degree exceeds number of variables")
        out = {}
        for (m1, i1), c1 in self.terms.items():
            for (m2, i2), c2 in other.terms.items():
                sign, dx = merge_dx(i1, i2)
                if sign == 0:
                    continue
                m = tuple(a + b for a, b in zip(m1, m2))
                c = c1 * c2 if sign > 0 else -(c1 * c2)
                key = (m, dx)
                out[key] = out[key] + c if key in out else c
        return PolyForm(self.nvars, self.degree + other.degree, out)

    def partial(self, i: int) -> "PolyForm":
        out = {}
        for (m, dx), c in self.terms.items():
            if m[i]:
                e = list(m)
                e[i] -= 1
                key = (tuple(e), dx)
                val = c * m[i]
                out[key] = out[key] + val if key in out else val
        return PolyForm(self.nvars, self.degree, out)

    def d(self) -> "PolyForm":
        """Exterior derivative."""
        out = {}
        for (m, dx), c in self.terms.items():
            for i in range(self.nvars):
                if not m[i]:
                    continue
                sign, new_dx = merge_dx((i,), dx)
                if sign == 0:
                    continue
                e = list(m)
                e[i] -= 1
                key = (tuple(e), new_dx)
                val = c * m[i] if sign > 0 else -(c * m[i])
                out[key] = out[key] + val if key in out else val
        return PolyForm(self.nvars, self.degree + 1, out)

    def substitute(self, assignment: Mapping[int, "PolyForm"], nvars: int | None = None) -> "PolyForm":
        """Ring homomorphism x_i -> assignment[i] on a 0-form."""
        if self.degree != 0:
            raise ValueError("substitute acts on 0-forms; use pullback for forms")
        return pullback(self, assignment, nvars)

    def evaluate_dx_free(self) -> "PolyForm":
        return self


def _target_nvars(assignment, default):
    for v in assignment.values():
        return v.nvars
    return default


def pullback(form: PolyForm, assignment: Mapping[int, PolyForm], nvars: int | None = None) -> PolyForm:
    """Pull a form back along x_i -> assignment[i], with dx_i -> d(assignment[i])."""
    target_n = nvars if nvars is not None else _target_nvars(assignment, form.nvars)
    used = {i for (m, dx) in form.terms for i in range(form.nvars) if m[i] or i in dx}
    missing = sorted(i for i in used if i not in assignment)
    if missing:
        raise UnboundVariable(f"no assignment for variable index {missing[0]}")
    powers: dict = {}

    def power(i, k):
        key = (i, k)
        if key not in powers:
            powers[key] = assignment[i] ** k if k else PolyForm.constant(target_n)
        return powers[key]

    diffs = {i: assignment[i].d() for i in assignment}
    result = PolyForm(target_n, form.degree)
    for (m, dx), c in form.sorted_terms():
        term = PolyForm.constant(target_n, c)
        for i, k in enumerate(m):
            if k:
                term = term.wedge(power(i, k))
        for i in dx:
            term = term.wedge(diffs[i])
        result = result + term
    return result


def product(forms: Iterable[PolyForm], nvars: int) -> PolyForm:
    out = PolyForm.constant(nvars)
    for f in forms:
        out = out.wedge(f)
    return out


def _fmt_coeff(c) -> str:
    if isinstance(c, PadicScalar):
        return f"({c})"
    c = Fraction(c)
    return str(c.numerator) if c.denominator == 1 else f"{c.numerator}/{c.denominator}"


def format_form(f: PolyForm, names=None) -> str:
    """Canonical text, e.g. ``3*x1^2*x2 dx1^dx3 - x2 dx2``."""
    if names is None:
        names = [f"x{i + 1}" for i in range(f.nvars)]
    if f.is_zero():
        return "0"
    pieces = []
    for (m, dx), c in f.sorted_terms():
        neg = False
        if not isinstance(c, PadicScalar) and c < 0:
            neg, c = True, -c
        factors = [f"{names[i]}^{k}" if k > 1 else names[i] for i, k in enumerate(m) if k]
        coeff = _fmt_coeff(c)
        if coeff != "1" or not factors:
            if coeff != "1" or not dx:
                factors.insert(0, coeff)
        body = "*".join(factors)
        wedge = "^".join(f"d{names[i]}" for i in dx)
        text = " ".join(s for s in (body, wedge) if s)
        pieces.append(("- " if neg else "+ ") + text)
    out = " ".join(pieces)
    return out[2:] if out.startswith("+ ") else "-" + out[1:]


class FormBasis:
    """Coordinates for k-forms with coefficients of degree <= D.

    Column ``i`` is the i-th pair ``(monomial, dx index tuple)`` in the global
    term order, so leading columns of a row are its highest terms.
    """

    _cache: dict = {}

    def __new__(cls, nvars: int, D: int, k: int):
        key = (nvars, D, k)
        inst = cls._cache.get(key)
        if inst is None:
            inst = super().__new__(cls)
            inst._setup(nvars, D, k)
            cls._cache[key] = inst
        return inst

    def _setup(self, nvars: int, D: int, k: int):
        self.nvars = nvars
        self.D = D
        self.k = k
        self.keys = tuple((m, dx) for m in monomials(nvars, D) for dx in wedge_sets(nvars, k))
        self.index = {key: i for i, key in enumerate(self.keys)}
        self._d: dict = {}

    def __len__(self):
        return len(self.keys)

    def __repr__(self):
        return f"FormBasis(n={self.nvars}, D={self.D}, k={self.k})"

    def row(self, f: PolyForm) -> dict:
        """Coordinates of ``f``; raises KeyError if a term has degree > D."""
        if f.is_zero():
            return {}
        if f.degree != self.k:
            raise ValueError(f"expected a {self.k}-form, got degree {f.degree}")
        return {self.index[key]: c for key, c in f.terms.items()}

    def fits(self, f: PolyForm) -> bool:
        return f.poly_degree() <= self.D

    def form(self, row: dict) -> PolyForm:
        return PolyForm(self.nvars, self.k, {self.keys[i]: c for i, c in row.items()})

    def d_column(self, i: int) -> dict:
        """Row of ``d`` applied to basis element ``i`` in FormBasis(n, D, k+1)."""
        out = self._d.get(i)
        if out is None:
            target = FormBasis(self.nvars, self.D, self.k + 1)
            mono, dx = self.keys[i]
            out = target.row(PolyForm(self.nvars, self.k, {(mono, dx): 1}).d())
            self._d[i] = out
        return out

    def d_row(self, row: dict) -> dict:
        out: dict = {}
        for i, c in row.items():
            for j, v in self.d_column(i).items():
                nv = out.get(j, 0) + c * v
                if nv:
                    out[j] = nv
                else:
                    out.pop(j)
        return out

    def embed(self, row: dict, other: "FormBasis") -> dict:
        """Re-index a row into another basis with the same n and k."""
        return {other.index[self.keys[i]]: c for i, c in row.items()}
