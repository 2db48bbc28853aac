"""Radial functions on Q_p^n and their exact shell-sum Fourier calculus.

A :class:`RadialFunction` stores one value per sphere ``||x|| = p**k`` on an
explicit window ``[k_min, k_max]``.  Below the window it is the constant
``inner`` (which is also its value at the origin); above the window it is
zero.  Everything past that representation is accounted for by two
remainder bounds: ``sup_error`` bounds ``sup|f - f_repr|`` and ``l1_error``
bounds ``int|f - f_repr|``.

Because radial step functions are closed under the Fourier transform, the
transform here is exact up to rounding.  The forward and inverse transforms
coincide on radial functions.
"""
from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field, replace
from fractions import Fraction

import numpy as np

from .padic import ORIGIN, is_prime

DEFAULT_WINDOW = (-64, 64)
#: Hard cap on the number of shells any single operation may create.
MAX_SPAN = 1024
_EPS = np.finfo(float).eps
_LOG_OVERFLOW = 700.0


class WindowOverflowError(ValueError):
    """Raised when an operation needs more shells than allowed.

    ``needed`` is the requested span and ``bound`` the remainder that a
    truncation to the allowed span would have left.
    """

    def __init__(self, message, needed=None, bound=None):
        super().__init__(message)
        self.needed = needed
        self.bound = bound


class NonIntegrableError(ValueError):
    pass


# -- shell geometry --------------------------------------------------------
def ball_volumes(p: int, n: int, r) -> np.ndarray:
    """``p**(r n)`` for an array of radii ``r``."""
    r = np.asarray(r, dtype=float)
    logv = r * n * math.log(p)
    if np.any(logv > _LOG_OVERFLOW):
        raise WindowOverflowError(f"ball volume overflows for radius {r.max():.0f}")
    return np.exp(logv)


def shell_volumes(p: int, n: int, k) -> np.ndarray:
    return ball_volumes(p, n, k) * (1.0 - float(p) ** (-n))


def shell_kernel(k: int, m: int, p: int, n: int, exact: bool = False):
    """Integral of ``chi_p(xi . x)`` over the sphere ``S_k`` for ``||xi|| = p**m``."""
    one = Fraction(1) if exact else 1.0
    base = Fraction(p) if exact else float(p)
    if m <= -k:
        return base ** (k * n) * (one - base ** (-n))
    if m == 1 - k:
        return -(base ** ((k - 1) * n))
    return 0 * one


def log_shell_kernel(k: int, m: int, p: int, n: int) -> tuple:
    """``(log|W|, sign)`` of :func:`shell_kernel`; sign 0 means exactly zero."""
    if m <= -k:
        return k * n * math.log(p) + math.log1p(-float(p) ** (-n)), 1
    if m == 1 - k:
        return (k - 1) * n * math.log(p), -1
    return -math.inf, 0


def _as_array(values):
    arr = np.array(values)
    if arr.ndim != 1 or arr.size == 0:
        raise ValueError("values must be a non-empty 1-d sequence")
    if np.iscomplexobj(arr):
        arr = arr.astype(complex)
    else:
        arr = arr.astype(float)
    return arr


@dataclass(frozen=True, eq=False)
class OuterDecay:
    """Declared bound ``|f(p**k)| <= amplitude * ratio**(k - k_max)`` past the window."""

    amplitude: float
    ratio: float

    def l1(self, p: int, n: int, k_max: int) -> float:
        q = self.ratio * float(p) ** n
        if self.amplitude == 0:
            return 0.0
        if q >= 1:
            return math.inf
        return self.amplitude * float(shell_volumes(p, n, [k_max])[0]) * q / (1 - q)


@dataclass(frozen=True, eq=False)
class RadialFunction:
    p: int
    n: int
    k_min: int
    values: np.ndarray
    inner: complex = 0.0
    deviations: np.ndarray | None = None
    sup_error: float = 0.0
    l1_error: float = 0.0
    outer: OuterDecay | None = None
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        if not is_prime(int(self.p)):
            raise ValueError(f"p must be prime, got {self.p}")
        if self.n < 1:
            raise ValueError(f"dimension must be >= 1, got {self.n}")
        vals = _as_array(self.values)
        inner = complex(self.inner) if np.iscomplexobj(vals) or isinstance(self.inner, complex) \
            else float(self.inner)
        if isinstance(inner, complex) and inner.imag == 0 and not np.iscomplexobj(vals):
            inner = inner.real
        if isinstance(inner, complex) and not np.iscomplexobj(vals):
            vals = vals.astype(complex)
        if not np.all(np.isfinite(vals)) or not np.isfinite(inner):
            raise ValueError("radial function values must be finite")
        if self.deviations is None:
            dev = vals - inner
        else:
            dev = _as_array(self.deviations).astype(vals.dtype)
            if dev.shape != vals.shape:
                raise ValueError("deviations must match values")
        vals.flags.writeable = False
        dev.flags.writeable = False
        object.__setattr__(self, "k_min", int(self.k_min))
        object.__setattr__(self, "values", vals)
        object.__setattr__(self, "inner", inner)
        object.__setattr__(self, "deviations", dev)

    # -- constructors ------------------------------------------------------
    @classmethod
    def indicator_ball(cls, r: int, p: int, n: int = 1, scale: float = 1.0) -> "RadialFunction":
        """``scale * 1_{B_r}``."""
        return cls(p, n, r, [scale], inner=scale)

    @classmethod
    def indicator_sphere(cls, k: int, p: int, n: int = 1, scale: float = 1.0) -> "RadialFunction":
        return cls(p, n, k, [scale], inner=0.0)

    @classmethod
    def from_function(cls, func, p: int, n: int, k_min: int, k_max: int,
                      inner=None) -> "RadialFunction":
        ks = np.arange(k_min, k_max + 1)
        vals = [func(int(k)) for k in ks]
        return cls(p, n, k_min, vals, inner=vals[0] if inner is None else inner)

    # -- accessors -----------------------------------------------------------
    @property
    def k_max(self) -> int:
        return self.k_min + len(self.values) - 1

    @property
    def shells(self) -> np.ndarray:
        return np.arange(self.k_min, self.k_max + 1)

    @property
    def volumes(self) -> np.ndarray:
        return shell_volumes(self.p, self.n, self.shells)

    @property
    def is_complex(self) -> bool:
        return np.iscomplexobj(self.values)

    @property
    def l1_bound(self) -> float:
        """Bound on the integral of |f - represented part|, tails included."""
        extra = self.outer.l1(self.p, self.n, self.k_max) if self.outer else 0.0
        return self.l1_error + extra

    @property
    def sup_bound(self) -> float:
        extra = self.outer.amplitude if self.outer else 0.0
        return self.sup_error + extra

    def at(self, k):
        """Value on the sphere ``p**k`` (``ORIGIN`` for the origin)."""
        if k == ORIGIN or k < self.k_min:
            return self.inner
        if k > self.k_max:
            return 0.0 * self.inner
        return self.values[int(k) - self.k_min]

    def __call__(self, k):
        return self.at(k)

    def sup_norm(self) -> float:
        return float(max(np.max(np.abs(self.values)), abs(self.inner)))

    def sup(self) -> float:
        """Supremum of a real function over all of Q_p^n."""
        return float(max(np.max(self.values.real), self.inner.real if isinstance(self.inner, complex)
                         else self.inner, 0.0))

    def inf(self) -> float:
        inner = self.inner.real if isinstance(self.inner, complex) else self.inner
        return float(min(np.min(self.values.real), inner, 0.0))

    # -- window manipulation -------------------------------------------------
    def extended(self, lo: int, hi: int) -> "RadialFunction":
        """Same function on a window containing ``[lo, hi]``."""
        lo, hi = min(lo, self.k_min), max(hi, self.k_max)
        if lo == self.k_min and hi == self.k_max:
            return self
        _check_span(lo, hi, self.p, self.n)
        below = self.k_min - lo
        above = hi - self.k_max
        dtype = self.values.dtype
        vals = np.concatenate([np.full(below, self.inner, dtype=dtype), self.values,
                               np.zeros(above, dtype=dtype)])
        devs = np.concatenate([np.zeros(below, dtype=dtype), self.deviations,
                               np.full(above, -self.inner, dtype=dtype)])
        return replace(self, k_min=lo, values=vals, deviations=devs)

    def trimmed(self) -> "RadialFunction":
        """Drop shells that are exactly the inner constant or exactly zero at the edges."""
        vals, devs = self.values, self.deviations
        start, stop = 0, len(vals)
        while stop - start > 1 and vals[stop - 1] == 0 and devs[stop - 1] == -self.inner:
            stop -= 1
        while stop - start > 1 and devs[start] == 0 and vals[start] == self.inner:
            start += 1
        if start == 0 and stop == len(vals):
            return self
        return replace(self, k_min=self.k_min + start, values=vals[start:stop],
                       deviations=devs[start:stop])

    def real_part(self) -> "RadialFunction":
        inner = self.inner.real if isinstance(self.inner, complex) else self.inner
        return replace(self, values=self.values.real.copy(), inner=inner,
                       deviations=self.deviations.real.copy())

    def max_imag(self) -> float:
        if not self.is_complex:
            return 0.0
        inner = self.inner.imag if isinstance(self.inner, complex) else 0.0
        return float(max(np.max(np.abs(self.values.imag)), abs(inner)))

    # -- linear structure ----------------------------------------------------
    def _align(self, other: "RadialFunction"):
        if (self.p, self.n) != (other.p, other.n):
            raise ValueError("radial functions live on different spaces")
        lo = min(self.k_min, other.k_min)
        hi = max(self.k_max, other.k_max)
        return self.extended(lo, hi), other.extended(lo, hi)

    def __add__(self, other: "RadialFunction") -> "RadialFunction":
        a, b = self._align(other)
        return RadialFunction(a.p, a.n, a.k_min, a.values + b.values, a.inner + b.inner,
                              a.deviations + b.deviations,
                              a.sup_error + b.sup_error, a.l1_error + b.l1_error)

    def __neg__(self) -> "RadialFunction":
        return self * -1.0

    def __sub__(self, other: "RadialFunction") -> "RadialFunction":
        return self + (-other)

    def __mul__(self, scalar) -> "RadialFunction":
        if isinstance(scalar, RadialFunction):
            return spectral_product(self, scalar)
        s = abs(scalar)
        return RadialFunction(self.p, self.n, self.k_min, self.values * scalar,
                              self.inner * scalar, self.deviations * scalar,
                              self.sup_error * s, self.l1_error * s)

    __rmul__ = __mul__

    # -- serialization -------------------------------------------------------
    def to_csv(self) -> str:
        """Rows ``k, p^k, re, im``; a leading ``-inf`` row carries the inner value."""
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["k", "p^k", "re", "im"])
        inner = complex(self.inner)
        w.writerow(["-inf", fmt(0.0), fmt(inner.real), fmt(inner.imag)])
        for k, v in zip(self.shells, self.values):
            v = complex(v)
            w.writerow([int(k), fmt(float(self.p) ** int(k)), fmt(v.real), fmt(v.imag)])
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str, p: int, n: int = 1) -> "RadialFunction":
        rows = [r for r in csv.reader(io.StringIO(text)) if r and r[0].strip() != "k"]
        if not rows:
            raise ValueError("empty radial function CSV")
        inner = None
        ks, vals = [], []
        for row in rows:
            if len(row) < 3:
                raise ValueError(f"malformed CSV row: {row}")
            im = float(row[3]) if len(row) > 3 and row[3].strip() else 0.0
            v = complex(float(row[2]), im)
            if row[0].strip() in ("-inf", "origin"):
                inner = v
                continue
            ks.append(int(row[0]))
            vals.append(v)
        if not ks:
            raise ValueError("radial function CSV has no shells")
        order = np.argsort(ks)
        ks = np.asarray(ks)[order]
        if np.any(np.diff(ks) != 1):
            raise ValueError("CSV shells must form a contiguous range")
        vals = np.asarray(vals)[order]
        if inner is None:
            inner = vals[0]
        if np.all(vals.imag == 0) and inner.imag == 0:
            vals, inner = vals.real, inner.real
        return cls(p, n, int(ks[0]), vals, inner=inner)

    def to_json(self) -> dict:
        inner = complex(self.inner)
        out = {
            "p": self.p, "n": self.n, "k_min": self.k_min,
            "values_re": [float(v) for v in self.values.real],
            "values_im": [float(v) for v in np.imag(self.values)],
            "inner": [inner.real, inner.imag],
            "sup_error": self.sup_error, "l1_error": self.l1_error,
        }
        if self.outer is not None:
            out["outer"] = {"amplitude": self.outer.amplitude, "ratio": self.outer.ratio}
        return out

    @classmethod
    def from_json(cls, obj: dict) -> "RadialFunction":
        re = np.asarray(obj["values_re"], dtype=float)
        im = np.asarray(obj.get("values_im") or np.zeros_like(re), dtype=float)
        inner = obj.get("inner", [re[0], im[0]])
        if not isinstance(inner, (list, tuple)):
            inner = [inner, 0.0]
        vals = re + 1j * im if np.any(im) or inner[1] else re
        inner_v = complex(*inner) if np.iscomplexobj(vals) else float(inner[0])
        outer = obj.get("outer")
        return cls(int(obj["p"]), int(obj.get("n", 1)), int(obj["k_min"]), vals, inner=inner_v,
                   sup_error=float(obj.get("sup_error", 0.0)),
                   l1_error=float(obj.get("l1_error", 0.0)),
                   outer=OuterDecay(**outer) if outer else None)


def fmt(x: float) -> str:
    """17 significant digits, enough to round-trip a double."""
    return format(float(x), ".17g")


def dumps_json(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True, default=_json_default)


def _json_default(o):
    if isinstance(o, (np.floating,)):
        return float(o)
    if isinstance(o, (np.integer,)):
        return int(o)
    if isinstance(o, np.ndarray):
        return o.tolist()
    if isinstance(o, complex):
        return [o.real, o.imag]
    raise TypeError(f"not JSON serializable: {type(o)}")


def _check_span(lo: int, hi: int, p: int, n: int, max_span: int = MAX_SPAN):
    if hi - lo + 1 > max_span:
        raise WindowOverflowError(f"window [{lo}, {hi}] exceeds {max_span} shells",
                                  needed=hi - lo + 1)
    if max(abs(lo), abs(hi) + 1) * n * math.log(p) > _LOG_OVERFLOW:
        raise WindowOverflowError(f"window [{lo}, {hi}] leaves the float range for p={p}, n={n}",
                                  needed=hi - lo + 1)


# -- integrals and inner products -------------------------------------------
def radial_integral(f: RadialFunction):
    """Integral of the represented function over Q_p^n."""
    if f.outer is not None and not math.isfinite(f.outer.l1(f.p, f.n, f.k_max)):
        raise NonIntegrableError("declared outer tail is not summable")
    head = f.inner * float(ball_volumes(f.p, f.n, [f.k_min - 1])[0])
    return head + np.sum(f.values * f.volumes)


def l1_norm(f: RadialFunction) -> float:
    head = abs(f.inner) * float(ball_volumes(f.p, f.n, [f.k_min - 1])[0])
    return float(head + np.sum(np.abs(f.values) * f.volumes))


def l2_inner(f: RadialFunction, g: RadialFunction):
    a, b = f._align(g)
    head = a.inner * np.conj(b.inner) * float(ball_volumes(a.p, a.n, [a.k_min - 1])[0])
    val = head + np.sum(a.values * np.conj(b.values) * a.volumes)
    if not (a.is_complex or b.is_complex):
        return float(np.real(val))
    return complex(val)


def l2_norm(f: RadialFunction) -> float:
    return math.sqrt(max(float(np.real(l2_inner(f, f))), 0.0))


# -- Fourier transform ------------------------------------------------------
def radial_fourier(f: RadialFunction) -> RadialFunction:
    """Fourier transform of a radial function (equal to its inverse transform).

    With ``A(r)`` the integral over the ball ``B_r``, the transform on the
    sphere ``||xi|| = p**-r`` is ``A(r) - f(p**(r+1)) * p**(r n)``.  Each
    output value is assembled from whichever of two algebraically equal
    forms (raw values or deviations from the inner constant) carries the
    smaller rounding error.
    """
    p, n, a, b = f.p, f.n, f.k_min, f.k_max
    raw, dev, c = f.values, f.deviations, f.inner
    vol = f.volumes
    _check_span(-b, 1 - a, p, n)
    r = np.arange(a - 1, b)                    # radii for the non-constant outputs
    P = ball_volumes(p, n, r)
    head = c * float(ball_volumes(p, n, [a - 1])[0])

    dv = dev * vol
    cum_dev = np.concatenate([[0.0], np.cumsum(dv)])[:-1]              # sum_{k<=r} dev
    cum_dev_abs = np.concatenate([[0.0], np.cumsum(np.abs(dv))])[:-1]
    rv = raw * vol
    cum_raw = np.concatenate([[0.0], np.cumsum(rv)])[:-1]
    cum_raw_abs = np.concatenate([[0.0], np.cumsum(np.abs(rv))])[:-1]
    nxt_dev, nxt_raw = dev, raw                                         # shell r+1

    f_dev = cum_dev - nxt_dev * P
    e_dev = cum_dev_abs + np.abs(nxt_dev) * P
    f_raw = head + cum_raw - nxt_raw * P
    e_raw = abs(head) + cum_raw_abs + np.abs(nxt_raw) * P
    vals = np.where(e_dev <= e_raw, f_dev, f_raw)
    err_val = np.minimum(e_dev, e_raw)

    total = head + np.sum(rv)
    # deviation from the constant value near xi = 0, as a tail sum
    tail = np.cumsum(rv[::-1])[::-1]                                    # sum_{k>=r+1}
    tail_abs = np.cumsum(np.abs(rv)[::-1])[::-1]
    d_tail = -tail - nxt_raw * P
    e_tail = tail_abs + np.abs(nxt_raw) * P
    d_direct = vals - total
    e_direct = err_val + abs(total)
    devs = np.where(e_tail <= e_direct, d_tail, d_direct)

    # order by ascending output shell m = -r, prepending the constant at m = -b
    out_vals = np.concatenate([[total], vals[::-1]])
    out_devs = np.concatenate([[0.0 * total], devs[::-1]])
    exact = f.sup_bound == 0 and f.l1_bound == 0
    out = RadialFunction(p, n, -b, out_vals, inner=total, deviations=out_devs,
                         sup_error=f.l1_bound, l1_error=0.0 if exact else math.inf)
    return out.trimmed()


inverse_radial_fourier = radial_fourier


def spectral_product(a: RadialFunction, b: RadialFunction) -> RadialFunction:
    """Pointwise product of two radial functions."""
    if (a.p, a.n) != (b.p, b.n):
        raise ValueError("radial functions live on different spaces")
    lo = min(a.k_min, b.k_min)
    hi = min(a.k_max, b.k_max)
    ea, eb = a.extended(lo, hi), b.extended(lo, hi)
    sl = slice(0, hi - lo + 1)
    va, vb = ea.values[sl], eb.values[sl]
    da, db = ea.deviations[sl], eb.deviations[sl]
    vals = va * vb
    devs = va * db + da * b.inner
    sa, sb = a.sup_norm(), b.sup_norm()
    return RadialFunction(a.p, a.n, lo, vals, inner=a.inner * b.inner, deviations=devs,
                          sup_error=sa * b.sup_bound + sb * a.sup_bound,
                          l1_error=sa * b.l1_bound + sb * a.l1_bound).trimmed()


def radial_convolve(f: RadialFunction, g: RadialFunction,
                    max_span: int = MAX_SPAN) -> RadialFunction:
    """``f * g`` computed as the inverse transform of the product of transforms."""
    fh, gh = radial_fourier(f), radial_fourier(g)
    prod = spectral_product(fh, gh)
    _check_span(-prod.k_max, 1 - prod.k_min, f.p, f.n, max_span)
    out = radial_fourier(prod)
    sup_err = f.sup_norm() * g.l1_bound + g.sup_norm() * f.l1_bound
    return replace(out, sup_error=sup_err,
                   l1_error=l1_norm(f) * g.l1_bound + l1_norm(g) * f.l1_bound)


def direct_convolve(f: RadialFunction, g: RadialFunction) -> RadialFunction:
    """``f * g`` evaluated by x-space shell sums, without Fourier transforms.

    For ``||x|| = p**k`` the convolution splits by the shell of the
    integration variable ``z``: shells below ``k`` see ``f(p**k)``, the shell
    ``k`` itself sees all of ``B_k`` except the coset ``x + B_{k-1}``, and
    shells above ``k`` see ``f(p**j)``.
    """
    a, b = f._align(g)
    p, n = a.p, a.n
    lo = a.k_min
    vol = a.volumes
    ks = a.shells
    P_prev = ball_volumes(p, n, ks - 1)
    Pa = float(ball_volumes(p, n, [lo - 1])[0])
    Fb = a.inner * Pa + np.concatenate([[0.0], np.cumsum(a.values * vol)])[:-1]   # int_{B_{k-1}} f
    Gb = b.inner * Pa + np.concatenate([[0.0], np.cumsum(b.values * vol)])[:-1]
    prod = a.values * b.values * vol
    above = np.concatenate([np.cumsum(prod[::-1])[::-1][1:], [0.0]])               # sum_{j>k}
    vals = a.values * Gb + b.values * (Fb + a.values * (vol - P_prev)) + above
    origin = a.inner * b.inner * Pa + np.sum(prod)
    return RadialFunction(p, n, lo, vals, inner=origin,
                          sup_error=f.sup_norm() * g.l1_bound + g.sup_norm() * f.l1_bound,
                          l1_error=l1_norm(f) * g.l1_bound + l1_norm(g) * f.l1_bound).trimmed()


# -- spectral multipliers ---------------------------------------------------
class Multiplier:
    """A radial function of the frequency used as a Fourier multiplier.

    Subclasses give the value on shells, the limit at the origin, the
    deviation from that limit (accurately, without cancellation) and a bound
    on ``sup_{m' <= m} |value(m') - origin|``.
    """

    #: sup of |value| over all shells, or None when unbounded
    sup_bound = None

    def values(self, m: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    @property
    def origin(self) -> float:
        raise NotImplementedError

    def deviations(self, m: np.ndarray) -> np.ndarray:
        return self.values(m) - self.origin

    def deviation_bound(self, m: int) -> float:
        raise NotImplementedError


def multiply_spectrum(fhat: RadialFunction, mult: Multiplier, rtol: float = 1e-16,
                      max_span: int = MAX_SPAN) -> RadialFunction:
    """``mult * fhat`` with the window pushed towards ``xi = 0`` far enough that
    the non-constant part of the multiplier under the inner tail is certified
    below ``rtol`` (relative to the L1 size of ``fhat``)."""
    p, n = fhat.p, fhat.n
    c = fhat.inner
    lo = fhat.k_min
    scale = l1_norm(fhat) * max(1.0, abs(mult.origin))
    remainder = 0.0
    if c != 0:
        tol = rtol * scale
        while True:
            remainder = abs(c) * mult.deviation_bound(lo - 1) * float(ball_volumes(p, n, [lo - 1])[0])
            if remainder <= tol:
                break
            if fhat.k_max - lo + 2 > max_span or (abs(lo) + 2) * n * math.log(p) > _LOG_OVERFLOW:
                break
            lo -= 1
    ext = fhat.extended(lo, fhat.k_max)
    m = ext.shells
    with np.errstate(over="ignore", invalid="ignore"):
        mv = np.asarray(mult.values(m), dtype=float)
        md = np.asarray(mult.deviations(m), dtype=float)
    nz = ext.values != 0
    if np.any(~np.isfinite(mv[nz])):
        raise OverflowError("multiplier overflows where the spectrum is nonzero")
    mv = np.where(nz | np.isfinite(mv), mv, 0.0)
    vals = np.where(nz, mv * ext.values, 0.0)
    # (o + e)(c + d) - o c = (o + e) d + e c, or directly the new value minus
    # o c; each shell takes the form with the smaller rounding bound
    fin = np.isfinite(mv)
    d_split = np.where(fin, mv * ext.deviations, 0.0) + md * c
    e_split = np.where(fin, np.abs(mv * ext.deviations), 0.0) + np.abs(md * c)
    d_direct = vals - mult.origin * c
    e_direct = np.abs(vals) + abs(mult.origin * c)
    devs = np.where(fin & (e_direct < e_split), d_direct, d_split)
    devs = np.where(nz | (md * c != 0), devs, -mult.origin * c)
    if mult.sup_bound is None:
        sup_mult = float(np.max(np.abs(mv))) if fhat.sup_bound == 0 and fhat.l1_bound == 0 else math.inf
    else:
        sup_mult = mult.sup_bound
    sup_err = abs(c) * mult.deviation_bound(lo - 1) + sup_mult * fhat.sup_bound if c != 0 \
        else sup_mult * fhat.sup_bound
    l1_err = remainder + sup_mult * fhat.l1_bound if fhat.l1_bound else remainder
    return RadialFunction(p, n, lo, vals, inner=mult.origin * c, deviations=devs,
                          sup_error=float(sup_err), l1_error=float(l1_err))


def apply_fourier_multiplier(f: RadialFunction, mult: Multiplier, rtol: float = 1e-16,
                             max_span: int = MAX_SPAN) -> RadialFunction:
    """``F^-1(mult * F f)``."""
    spec = multiply_spectrum(radial_fourier(f), mult, rtol=rtol, max_span=max_span)
    out = radial_fourier(spec)
    return replace(out, sup_error=spec.l1_bound, l1_error=math.inf if spec.l1_bound or
                   spec.sup_bound else out.l1_error)
