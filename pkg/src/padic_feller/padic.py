"""Truncated p-adic scalars and vectors, norms, characters and Haar volumes.

A nonzero scalar is stored as ``p**v * (d0 + d1*p + d2*p**2 + ...)`` with a
fixed number of digits and ``d0 != 0``.  Arithmetic is exact modulo the
absolute precision of the operands; digits past that precision are zero.
"""
from __future__ import annotations

import cmath
import math
import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

DEFAULT_PRECISION = 32

#: Shell index of the origin (``||x|| = p**-inf``).
ORIGIN = -math.inf

_LOG_OVERFLOW = 700.0


def is_prime(p: int) -> bool:
    if p < 2:
        return False
    return all(p % q for q in range(2, math.isqrt(p) + 1))


def _valuation(a: int, p: int) -> int:
    v = 0
    while a % p == 0:
        a //= p
        v += 1
    return v


@dataclass(frozen=True)
class PAdicScalar:
    """Element of Q_p kept to ``len(digits)`` digits past its leading one."""

    p: int
    v: int = 0
    digits: tuple = ()
    is_zero: bool = False

    def __post_init__(self):
        if self.p < 2:
            raise ValueError(f"prime must be >= 2, got {self.p}")
        if self.is_zero:
            return
        if not self.digits:
            raise ValueError("nonzero p-adic scalar needs at least one digit")
        if any(not 0 <= d < self.p for d in self.digits):
            raise ValueError(f"digits must lie in [0, {self.p})")
        if self.digits[0] == 0:
            raise ValueError("leading digit must be nonzero; use PAdicScalar.from_digits")

    # -- construction -------------------------------------------------
    @classmethod
    def zero(cls, p: int) -> "PAdicScalar":
        return cls(p=p, v=0, digits=(), is_zero=True)

    @classmethod
    def from_digits(cls, p: int, v: int, digits: Sequence[int],
                    precision: int | None = None) -> "PAdicScalar":
        """Canonicalize: strip leading zero digits, adjusting the valuation."""
        digits = [int(d) for d in digits]
        shift = 0
        while shift < len(digits) and digits[shift] == 0:
            shift += 1
        if shift == len(digits):
            return cls.zero(p)
        digits = digits[shift:]
        precision = precision or max(len(digits), 1)
        digits = (digits + [0] * precision)[:precision]
        return cls(p=p, v=v + shift, digits=tuple(digits))

    @classmethod
    def from_unit(cls, p: int, v: int, unit: int, precision: int) -> "PAdicScalar":
        unit %= p**precision
        if unit == 0:
            return cls.zero(p)
        w = _valuation(unit, p)
        unit //= p**w
        return cls(p=p, v=v + w, digits=_int_digits(unit, p, precision))

    @classmethod
    def from_rational(cls, q, p: int, precision: int = DEFAULT_PRECISION) -> "PAdicScalar":
        q = Fraction(q)
        if q == 0:
            return cls.zero(p)
        num, den = q.numerator, q.denominator
        vn, vd = _valuation(num, p), _valuation(den, p)
        num //= p**vn
        den //= p**vd
        mod = p**precision
        unit = num * pow(den, -1, mod) % mod
        return cls(p=p, v=vn - vd, digits=_int_digits(unit, p, precision))

    # -- accessors ----------------------------------------------------
    @property
    def precision(self) -> int:
        return len(self.digits)

    @property
    def unit(self) -> int:
        """Integer ``sum(d_j p^j)`` of the stored digits."""
        return sum(d * self.p**j for j, d in enumerate(self.digits))

    def to_fraction(self) -> Fraction:
        if self.is_zero:
            return Fraction(0)
        return Fraction(self.unit) * Fraction(self.p) ** self.v

    # -- arithmetic ---------------------------------------------------
    def _check(self, other: "PAdicScalar"):
        if not isinstance(other, PAdicScalar):
            return NotImplemented
        if other.p != self.p:
            raise ValueError(f"prime mismatch: {self.p} vs {other.p}")
        return other

    def __neg__(self) -> "PAdicScalar":
        if self.is_zero:
            return self
        return PAdicScalar.from_unit(self.p, self.v, -self.unit, self.precision)

    def __add__(self, other: "PAdicScalar") -> "PAdicScalar":
        other = self._check(other)
        if other is NotImplemented:
            return other
        if self.is_zero:
            return other
        if other.is_zero:
            return self
        p = self.p
        # absolute precision of the sum
        top = min(self.v + self.precision, other.v + other.precision)
        low = min(self.v, other.v)
        s = self.unit * p ** (self.v - low) + other.unit * p ** (other.v - low)
        s %= p ** (top - low)
        if s == 0:
            return PAdicScalar.zero(p)
        precision = min(self.precision, other.precision)
        w = _valuation(s, p)
        return PAdicScalar(p=p, v=low + w,
                           digits=_int_digits(s // p**w, p, precision))

    def __sub__(self, other: "PAdicScalar") -> "PAdicScalar":
        other = self._check(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __mul__(self, other: "PAdicScalar") -> "PAdicScalar":
        other = self._check(other)
        if other is NotImplemented:
            return other
        if self.is_zero or other.is_zero:
            return PAdicScalar.zero(self.p)
        precision = min(self.precision, other.precision)
        return PAdicScalar.from_unit(self.p, self.v + other.v,
                                     self.unit * other.unit, precision)

    # -- text / json --------------------------------------------------
    def __str__(self) -> str:
        return to_text(self)

    def to_json(self) -> dict:
        if self.is_zero:
            return {"p": self.p, "v": None, "digits": []}
        return {"p": self.p, "v": self.v, "digits": list(self.digits)}

    @classmethod
    def from_json(cls, obj: dict) -> "PAdicScalar":
        if obj.get("v") is None or not obj.get("digits"):
            return cls.zero(int(obj["p"]))
        return cls.from_digits(int(obj["p"]), int(obj["v"]), obj["digits"],
                               precision=len(obj["digits"]))


def _int_digits(a: int, p: int, count: int) -> tuple:
    out = []
    for _ in range(count):
        a, d = divmod(a, p)
        out.append(d)
    return tuple(out)


_TEXT_RE = re.compile(r"^\s*(\d+)\^(-?\d+)\s*\*\s*\(([\d\s]*)\)\s*$")


def to_text(x: PAdicScalar) -> str:
    if x.is_zero:
        return "0"
    return f"{x.p}^{x.v} * ({' '.join(str(d) for d in x.digits)})"


def from_text(text: str, p: int | None = None) -> PAdicScalar:
    """Parse ``p^v * (d0 d1 ...)``; ``"0"`` needs ``p`` to be given."""
    if text.strip() == "0":
        if p is None:
            raise ValueError("prime required to parse zero")
        return PAdicScalar.zero(p)
    m = _TEXT_RE.match(text)
    if not m:
        raise ValueError(f"malformed p-adic text: {text!r}")
    prime, v, body = int(m.group(1)), int(m.group(2)), m.group(3).split()
    if p is not None and prime != p:
        raise ValueError(f"prime mismatch: {prime} vs {p}")
    return PAdicScalar.from_digits(prime, v, [int(d) for d in body], precision=len(body))


@dataclass(frozen=True)
class PAdicVector:
    components: tuple

    def __post_init__(self):
        if not self.components:
            raise ValueError("PAdicVector needs dimension >= 1")
        primes = {c.p for c in self.components}
        if len(primes) != 1:
            raise ValueError(f"components must share one prime, got {sorted(primes)}")

    @classmethod
    def from_rationals(cls, values: Iterable, p: int,
                       precision: int = DEFAULT_PRECISION) -> "PAdicVector":
        return cls(tuple(PAdicScalar.from_rational(q, p, precision) for q in values))

    @property
    def p(self) -> int:
        return self.components[0].p

    @property
    def n(self) -> int:
        return len(self.components)

    def __add__(self, other: "PAdicVector") -> "PAdicVector":
        if self.n != other.n:
            raise ValueError("dimension mismatch")
        return PAdicVector(tuple(a + b for a, b in zip(self.components, other.components)))

    def __neg__(self) -> "PAdicVector":
        return PAdicVector(tuple(-a for a in self.components))

    def __sub__(self, other: "PAdicVector") -> "PAdicVector":
        return self + (-other)

    def dot(self, other: "PAdicVector") -> PAdicScalar:
        acc = PAdicScalar.zero(self.p)
        for a, b in zip(self.components, other.components):
            acc = acc + a * b
        return acc

    def to_json(self) -> dict:
        return {"p": self.p, "components": [c.to_json() for c in self.components]}

    @classmethod
    def from_json(cls, obj: dict) -> "PAdicVector":
        return cls(tuple(PAdicScalar.from_json(c) for c in obj["components"]))


# -- valuation, norm, fractional part, character --------------------------
def padic_ord(x: PAdicScalar | PAdicVector):
    """p-adic order; ``math.inf`` for zero."""
    if isinstance(x, PAdicVector):
        return min(padic_ord(c) for c in x.components)
    return math.inf if x.is_zero else x.v


def padic_norm(x: PAdicScalar | PAdicVector, exact: bool = False):
    """``|x|_p = p**-ord(x)``; the max over components for vectors."""
    v = padic_ord(x)
    if v == math.inf:
        return Fraction(0) if exact else 0.0
    q = Fraction(x.p) ** (-v)
    return q if exact else float(q)


def shell_of(x: PAdicScalar | PAdicVector):
    """Shell index ``k`` with ``||x|| = p**k``, or ``ORIGIN``."""
    v = padic_ord(x)
    return ORIGIN if v == math.inf else -v


def fractional_part(x: PAdicScalar) -> Fraction:
    if x.is_zero or x.v >= 0:
        return Fraction(0)
    m = x.p ** (-x.v)
    return Fraction(x.unit % m, m)


def character(y: PAdicScalar) -> complex:
    """Additive character ``exp(2 pi i {y}_p)``."""
    frac = fractional_part(y)
    if frac == 0:
        return 1 + 0j
    return cmath.exp(2j * math.pi * frac.numerator / frac.denominator)


# -- Haar volumes (normalized so that vol(Z_p^n) = 1) ----------------------
def log_ball_volume(r: int, n: int, p: int) -> float:
    return r * n * math.log(p)


def log_sphere_volume(k: int, n: int, p: int) -> float:
    return k * n * math.log(p) + math.log1p(-float(p) ** (-n))


def ball_volume(r: int, n: int, p: int, exact: bool = False):
    if exact:
        return Fraction(p) ** (r * n)
    lv = log_ball_volume(r, n, p)
    if lv > _LOG_OVERFLOW:
        raise OverflowError(f"vol(B_{r}^{n}) = exp({lv:.1f}) overflows")
    return math.exp(lv)


def sphere_volume(k: int, n: int, p: int, exact: bool = False):
    if exact:
        return Fraction(p) ** (k * n) * (1 - Fraction(1, p**n))
    lv = log_sphere_volume(k, n, p)
    if lv > _LOG_OVERFLOW:
        raise OverflowError(f"vol(S_{k}^{n}) = exp({lv:.1f}) overflows")
    return math.exp(lv)
