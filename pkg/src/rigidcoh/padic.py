"""Finite-precision arithmetic in Z_p and Q_p.

A nonzero element is stored as ``unit * p**valuation`` where the unit is
known modulo ``p**known``.  ``known`` is the relative precision: the value
itself is known modulo ``p**(valuation + known)``.  Cancellation in a sum
lowers ``known``; when every known digit cancels the result becomes
INDETERMINATE, which keeps only a lower bound for the valuation.

The exact companion mode uses :class:`fractions.Fraction`; helpers below
read valuations and units off rationals so both modes share one vocabulary.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
import math

import sympy

from .errors import ContextError, IndeterminateError, PadicDivisionByZero

INF = math.inf


def vp(n: int, p: int) -> int:
    """Valuation of a nonzero integer."""
    if n == 0:
        raise ValueError("valuation of 0 is infinite")
    v = 0
    while n % p == 0:
        n //= p
        v += 1
    return v


def split_int(n: int, p: int) -> tuple[int, int]:
    """Return ``(v, u)`` with ``n == u * p**v`` and ``p`` not dividing ``u``."""
    v = vp(n, p)
    return v, n // p**v


def rational_valuation(q, p: int):
    q = Fraction(q)
    if q == 0:
        return INF
    return vp(q.numerator, p) - vp(q.denominator, p)


@dataclass(frozen=True)
class PadicContext:
    p: int
    precision: int
    epsilon: Fraction = field(default=None)

    def __post_init__(self):
        if not isinstance(self.p, int) or not sympy.isprime(self.p):
            raise ValueError(f"p must be prime, got {self.p!r}")
        if self.precision < 1:
            raise ValueError("precision must be at least 1")
        eps = Fraction(1, self.p) if self.epsilon is None else Fraction(self.epsilon)
        if not 0 < eps < 1:
            raise ValueError("epsilon must lie in (0, 1)")
        object.__setattr__(self, "epsilon", eps)

    @property
    def modulus(self) -> int:
        return self.p**self.precision

    def __call__(self, value) -> "PadicScalar":
        return PadicScalar.from_rational(self, value)

    def zero(self) -> "PadicScalar":
        return PadicScalar(self, INF, 0, self.precision)

    def one(self) -> "PadicScalar":
        return PadicScalar(self, 0, 1, self.precision)

    def with_precision(self, precision: int) -> "PadicContext":
        return PadicContext(self.p, precision, self.epsilon)


@dataclass(frozen=True)
class PadicScalar:
    """Element of Q_p known to finite precision.

    ``valuation`` is ``INF`` only for the true zero.  An INDETERMINATE value
    has ``known == 0`` and ``valuation`` equal to its absolute precision.
    """

    ctx: PadicContext
    valuation: float | int
    unit: int
    known: int

    # construction

    @classmethod
    def from_int(cls, ctx: PadicContext, n: int) -> "PadicScalar":
        if n == 0:
            return ctx.zero()
        v, u = split_int(n, ctx.p)
        return cls(ctx, v, u % ctx.modulus, ctx.precision)

    @classmethod
    def from_rational(cls, ctx: PadicContext, q) -> "PadicScalar":
        if isinstance(q, PadicScalar):
            q._check(ctx)
            return q
        if isinstance(q, int):
            return cls.from_int(ctx, q)
        q = Fraction(q)
        if q == 0:
            return ctx.zero()
        vn, un = split_int(q.numerator, ctx.p)
        vd, ud = split_int(q.denominator, ctx.p)
        mod = ctx.modulus
        return cls(ctx, vn - vd, un * pow(ud, -1, mod) % mod, ctx.precision)

    @classmethod
    def indeterminate(cls, ctx: PadicContext, absprec: int) -> "PadicScalar":
        return cls(ctx, absprec, 0, 0)

    # predicates

    @property
    def is_zero(self) -> bool:
        return self.valuation == INF

    @property
    def is_indeterminate(self) -> bool:
        return self.known == 0 and not self.is_zero

    @property
    def absprec(self):
        """Exponent ``a`` such that the value is known modulo ``p**a``."""
        if self.is_zero:
            return INF
        return self.valuation + self.known

    def negligible(self) -> bool:
        """True zero, or indeterminate below the working precision."""
        return self.is_zero or (self.is_indeterminate and self.valuation >= self.ctx.precision)

    def _check(self, ctx):
        if ctx.p != self.ctx.p:
            raise ContextError(f"mixing p={self.ctx.p} with p={ctx.p}")

    def _coerce(self, other) -> "PadicScalar":
        if isinstance(other, PadicScalar):
            other._check(self.ctx)
            return other
        if isinstance(other, (int, Fraction)):
            return PadicScalar.from_rational(self.ctx, other)
        return NotImplemented

    # arithmetic

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        if self.is_zero:
            return other
        if other.is_zero:
            return self
        p = self.ctx.p
        absprec = min(self.absprec, other.absprec)
        vmin = min(self.valuation, other.valuation)
        if absprec <= vmin:
            return PadicScalar.indeterminate(self.ctx, absprec)
        mod = p ** (absprec - vmin)
        s = (self.unit * p ** (self.valuation - vmin) if not self.is_indeterminate else 0)
        s += other.unit * p ** (other.valuation - vmin) if not other.is_indeterminate else 0
        s %= mod
        if s == 0:
            return PadicScalar.indeterminate(self.ctx, absprec)
        dv, u = split_int(s, p)
        v = vmin + dv
        known = min(absprec - v, self.ctx.precision)
        return PadicScalar(self.ctx, v, u % p**known, known)

    __radd__ = __add__

    def __neg__(self):
        if self.is_zero or self.is_indeterminate:
            return self
        return PadicScalar(self.ctx, self.valuation, -self.unit % self.ctx.p**self.known, self.known)

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return other + (-self)

    def __mul__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        if self.is_zero or other.is_zero:
            return self.ctx.zero()
        if self.is_indeterminate or other.is_indeterminate:
            return PadicScalar.indeterminate(self.ctx, self.valuation + other.valuation)
        known = min(self.known, other.known)
        return PadicScalar(
            self.ctx,
            self.valuation + other.valuation,
            self.unit * other.unit % self.ctx.p**known,
            known,
        )

    __rmul__ = __mul__

    def inverse(self) -> "PadicScalar":
        if self.is_zero:
            raise PadicDivisionByZero("inverse of the true zero")
        if self.is_indeterminate:
            raise IndeterminateError(f"inverse of O({self.ctx.p}^{self.valuation})")
        mod = self.ctx.p**self.known
        return PadicScalar(self.ctx, -self.valuation, pow(self.unit, -1, mod), self.known)

    def __truediv__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return self * other.inverse()

    def __rtruediv__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return other * self.inverse()

    def __pow__(self, k: int):
        if k < 0:
            return self.inverse() ** (-k)
        out = self.ctx.one()
        for _ in range(k):
            out = out * self
        return out

    # readouts

    def abs_value(self) -> Fraction:
        if self.is_zero:
            return Fraction(0)
        if self.is_indeterminate:
            raise IndeterminateError("absolute value of an indeterminate scalar")
        return self.ctx.epsilon**self.valuation

    def to_fraction(self) -> Fraction:
        """The stored representative ``unit * p**valuation`` (0 if not determinate)."""
        if self.is_zero or self.is_indeterminate:
            return Fraction(0)
        return Fraction(self.unit) * Fraction(self.ctx.p) ** self.valuation

    def residue(self) -> int:
        """Representative in [0, p**absprec) for elements of Z_p."""
        if self.is_zero:
            return 0
        if self.valuation < 0:
            raise ValueError("not integral")
        if self.is_indeterminate:
            return 0
        return self.unit * self.ctx.p**self.valuation

    def same_value(self, other, digits: int | None = None) -> bool:
        """Agreement of values to the precision both operands justify."""
        diff = self - self._coerce(other)
        if diff.is_zero or diff.is_indeterminate:
            return True
        return digits is not None and diff.valuation >= digits

    def __bool__(self):
        return not self.is_zero

    def __str__(self):
        p = self.ctx.p
        if self.is_zero:
            return "0"
        if self.is_indeterminate:
            return f"O({p}^{self.valuation})"
        return f"{self.unit}*{p}^{self.valuation} (±{p}^{self.absprec})"

    def __repr__(self):
        return f"PadicScalar({self})"


def valuation(a) -> float | int:
    """Valuation of a PadicScalar or an exact rational."""
    if isinstance(a, PadicScalar):
        return a.valuation
    raise TypeError("exact rationals need a prime: use rational_valuation(q, p)")


def abs_value(a: PadicScalar) -> Fraction:
    return a.abs_value()


def inv(a: PadicScalar) -> PadicScalar:
    return a.inverse()


def format_exact(q) -> str:
    q = Fraction(q)
    return str(q.numerator) if q.denominator == 1 else f"{q.numerator}/{q.denominator}"
