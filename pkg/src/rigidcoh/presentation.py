"""Presentations of F_p-algebras and maps between them.

A presentation lists variables and integer relations ``g_1..g_r``; it
describes ``A = F_p[x]/(g)`` and the lifted ideal ``J = (p, g_1, .., g_r)``
of ``V[x]``.  Ring maps are substitution assignments ``x_i -> poly``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from itertools import combinations_with_replacement

from .errors import CertificateMissing, ContextError
from .linalg import solve_exact, solve_mod_p
from .parsing import parse_poly
from .poly import FormBasis, PolyForm, monomials, product, pullback


@dataclass(frozen=True)
class Presentation:
    variables: tuple
    relations: tuple = ()
    p: int = 5
    label: str = ""

    def __post_init__(self):
        object.__setattr__(self, "variables", tuple(self.variables))
        object.__setattr__(self, "relations", tuple(self.relations))
        if len(set(self.variables)) != len(self.variables):
            raise ValueError("duplicate variable names")
        for g in self.relations:
            if g.nvars != self.nvars or g.degree != 0:
                raise ValueError("relations must be polynomials in the presentation variables")
            if g.is_zero():
                raise ValueError("zero relation")
            for c in g.terms.values():
                if Fraction(c).denominator != 1:
                    raise ValueError(f"relation coefficient {c} is not an integer")

    @classmethod
    def parse(cls, p: int, variables, relations=(), label: str = "") -> "Presentation":
        variables = tuple(variables)
        rels = tuple(parse_poly(r, variables, p) for r in relations)
        return cls(variables, rels, p, label)

    @property
    def nvars(self) -> int:
        return len(self.variables)

    def var(self, name: str) -> PolyForm:
        return PolyForm.var(self.nvars, self.variables.index(name))

    def ideal_generators(self) -> list[PolyForm]:
        """Generators of J: the prime first, then the relations."""
        return [PolyForm.constant(self.nvars, self.p), *self.relations]

    @cached_property
    def relation_degrees(self) -> tuple:
        return tuple(g.poly_degree() for g in self.relations)

    def summary(self) -> dict:
        from .poly import format_form

        return {
            "label": self.label,
            "p": self.p,
            "variables": list(self.variables),
            "relations": [format_form(g, self.variables) for g in self.relations],
        }


def power_multisets(ngens: int, m: int) -> list[tuple]:
    return list(combinations_with_replacement(range(ngens), m))


def power_generators(pres: Presentation, m: int) -> list[PolyForm]:
    """All m-fold products of generators of J, deduplicated, in a fixed order."""
    if m < 1:
        raise ValueError("m must be at least 1")
    gens = pres.ideal_generators()
    out, seen = [], set()
    for combo in power_multisets(len(gens), m):
        g = product((gens[i] for i in combo), pres.nvars)
        if g not in seen:
            seen.add(g)
            out.append(g)
    return out


def power_factorizations(pres: Presentation, m: int) -> list[tuple]:
    """Witness ``J^(m+1) ⊆ J^m J``: triples (product, m-fold factor, generator)."""
    gens = pres.ideal_generators()
    out = []
    for combo in power_multisets(len(gens), m + 1):
        head = product((gens[i] for i in combo[:-1]), pres.nvars)
        out.append((product((gens[i] for i in combo), pres.nvars), head, gens[combo[-1]]))
    return out


# ---------------------------------------------------------------------------
# tube algebras


@dataclass(frozen=True)
class TubeAlgebraPresentation:
    """``V[x, z_b] -> K[x]`` with ``z_b -> G_b / p`` for m-fold products G_b."""

    base: Presentation
    m: int

    @cached_property
    def products(self) -> list[PolyForm]:
        return power_generators(self.base, self.m)

    @property
    def extra_variables(self) -> tuple:
        return tuple(f"z{i + 1}" for i in range(len(self.products)))

    @property
    def variables(self) -> tuple:
        return self.base.variables + self.extra_variables

    def evaluation_map(self) -> dict[int, PolyForm]:
        n = self.base.nvars
        images = {i: PolyForm.var(n, i) for i in range(n)}
        for k, G in enumerate(self.products):
            images[n + k] = G.scale(Fraction(1, self.base.p))
        return images

    def evaluate(self, f: PolyForm) -> PolyForm:
        return pullback(f, self.evaluation_map(), self.base.nvars)

    def check_evaluation(self) -> bool:
        """``p * ev(z_b) - G_b == 0`` for every extra variable."""
        ev = self.evaluation_map()
        n = self.base.nvars
        return all((ev[n + k].scale(self.base.p) - G).is_zero() for k, G in enumerate(self.products))


# ---------------------------------------------------------------------------
# ring maps and ideal membership


@dataclass(frozen=True)
class RingMap:
    """Substitution ``source var i -> images[i]`` (polynomials in target vars)."""

    images: tuple
    source_nvars: int
    target_nvars: int

    @classmethod
    def identity(cls, n: int) -> "RingMap":
        return cls(tuple(PolyForm.var(n, i) for i in range(n)), n, n)

    @property
    def assignment(self) -> dict[int, PolyForm]:
        return dict(enumerate(self.images))

    def __call__(self, f: PolyForm) -> PolyForm:
        return pullback(f, self.assignment, self.target_nvars)

    def then(self, other: "RingMap") -> "RingMap":
        """Composite ``other ∘ self`` (apply self, then other)."""
        if other.source_nvars != self.target_nvars:
            raise ContextError("composition of incompatible ring maps")
        return RingMap(tuple(other(img) for img in self.images), self.source_nvars, other.target_nvars)

    def max_degree(self) -> int:
        return max((img.poly_degree() for img in self.images), default=0)


def _ideal_rows(gens, nvars: int, cap: int):
    basis = FormBasis(nvars, cap, 0)
    rows, labels = [], []
    for j, g in enumerate(gens):
        dg = g.poly_degree()
        for u in monomials(nvars, max(cap - dg, -1)) if cap >= dg else ():
            rows.append(basis.row(PolyForm.monomial(u).wedge(g)))
            labels.append((j, u))
    return rows, labels, basis


def ideal_membership(f: PolyForm, gens, nvars: int, p: int | None, degree_bound: int):
    """Coefficients ``c_j`` with ``f = sum c_j g_j`` at bounded degree.

    Works over F_p when ``p`` is given and over Q otherwise.  Returns a list
    of cofactor polynomials or None when no certificate of the given degree
    exists.
    """
    cap = max(degree_bound, f.poly_degree())
    zeros = [PolyForm(nvars) for _ in gens]
    rows, labels, basis = _ideal_rows(gens, nvars, cap)
    target = basis.row(f)
    if p is not None:
        target = {k: _mod_p(v, p) for k, v in target.items()}
        target = {k: v for k, v in target.items() if v}
        if not target:
            return zeros
        sol = solve_mod_p(rows, target, p)
    else:
        if not target:
            return zeros
        sol = solve_exact(rows, target)
    if sol is None:
        return None
    cof = [dict() for _ in gens]
    for idx, c in sol.items():
        j, u = labels[idx]
        cof[j][u] = c
    return [PolyForm.from_poly(nvars, c) for c in cof]


def _mod_p(v, p: int) -> int:
    v = Fraction(v)
    if v.denominator % p == 0:
        raise ValueError(f"{v} is not p-integral")
    return v.numerator * pow(v.denominator, -1, p) % p


def check_certificate(f: PolyForm, gens, cofactors, p: int) -> bool:
    """Verify ``f - sum c_j g_j ≡ 0 (mod p)`` exactly."""
    rest = f
    for g, c in zip(gens, cofactors):
        rest = rest - c.wedge(g)
    return all(_mod_p(v, p) == 0 for v in rest.terms.values())


@dataclass
class ChangeOfGenerators:
    source: Presentation
    target: Presentation
    f_map: RingMap  # source -> target (inclusion of generators)
    g_map: RingMap  # target -> source (chosen section)
    homotopy: RingMap  # target -> target[t], last variable is t
    certificates: dict = field(default_factory=dict)
    lift_compatible: dict = field(default_factory=dict)

    def homotopy_at(self, t: int) -> RingMap:
        n = self.target.nvars
        ev = {i: PolyForm.var(n, i) for i in range(n)}
        ev[n] = PolyForm.constant(n, t)
        return RingMap(tuple(pullback(img, ev, n) for img in self.homotopy.images), n, n)


def change_of_generators(
    src: Presentation,
    dst: Presentation,
    section: dict | None = None,
    certificates: dict | None = None,
    degree_slack: int = 2,
) -> ChangeOfGenerators:
    """Build f (inclusion), g (section) and the homotopy ``t a + (1-t) f g(a)``.

    ``section`` maps target variable names to polynomials (PolyForm in the
    source variables, or text).  Every relation's image is checked to lie in
    the other side's ideal J modulo p, either with a supplied certificate
    ``certificates[(side, index)] = [cofactors]`` or by a bounded-degree
    linear solve.
    """
    if src.p != dst.p:
        raise ContextError("presentations over different primes")
    missing = [v for v in src.variables if v not in dst.variables]
    if missing:
        raise ValueError(f"source variables {missing} are not target variables")
    section = dict(section or {})
    n_s, n_t = src.nvars, dst.nvars
    f_map = RingMap(tuple(dst.var(v) for v in src.variables), n_s, n_t)
    g_images = []
    for v in dst.variables:
        if v in section:
            img = section[v]
            if isinstance(img, str):
                img = parse_poly(img, src.variables, src.p)
            g_images.append(img)
        elif v in src.variables:
            g_images.append(src.var(v))
        else:
            raise CertificateMissing(f"no section given for target variable {v!r}")
    g_map = RingMap(tuple(g_images), n_t, n_s)
    # homotopy into V[target vars, t]
    n_h = n_t + 1
    lift = RingMap(tuple(PolyForm.var(n_h, i) for i in range(n_t)), n_t, n_h)
    t = PolyForm.var(n_h, n_t)
    fg = g_map.then(f_map)
    h_images = tuple(t.wedge(lift(PolyForm.var(n_t, i))) + (1 - t).wedge(lift(fg.images[i])) for i in range(n_t))
    homotopy = RingMap(h_images, n_t, n_h)

    certificates = dict(certificates or {})
    found: dict = {}
    compatible: dict = {}
    p = src.p
    checks = [("f", k, f_map(r), dst.ideal_generators(), n_t) for k, r in enumerate(src.relations)]
    checks += [("g", k, g_map(r), src.ideal_generators(), n_s) for k, r in enumerate(dst.relations)]
    h_gens = [lift(g) for g in dst.ideal_generators()]
    checks += [("H", k, homotopy(r), h_gens, n_h) for k, r in enumerate(dst.relations)]
    for side, k, image, gens, n in checks:
        bound = image.poly_degree() + degree_slack
        cert = certificates.get((side, k))
        if cert is not None:
            if not check_certificate(image, gens, cert, p):
                raise CertificateMissing(f"supplied certificate for {side}-image of relation {k} is wrong")
        else:
            cert = ideal_membership(image, gens, n, p, bound)
            if cert is None:
                raise CertificateMissing(
                    f"{side}-image of relation {k} not certified in J mod p up to degree {bound}"
                )
        found[(side, k)] = cert
        if side in ("f", "g"):
            compatible[(side, k)] = ideal_membership(image, gens[1:], n, None, bound) is not None
    return ChangeOfGenerators(src, dst, f_map, g_map, homotopy, found, compatible)
