"""Heat kernels, the convolution semigroup, Feller checks and the Cauchy solver."""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .operators import PseudoDiffOperator, apply_P, resolvent_solve
from .radial import (MAX_SPAN, Multiplier, RadialFunction, WindowOverflowError, ball_volumes, l1_norm,
                     apply_fourier_multiplier, radial_convolve, radial_fourier, radial_integral,
                     shell_volumes)

_LOG_MAX = 690.0
DEFAULT_EPS = 1e-12


class HeatMultiplier(Multiplier):
    """``exp(-t P_hat) = exp(sign * t * H)``; for the generator sign this is
    ``exp(-t H)`` with ``exp(-inf) = 0``."""

    def __init__(self, op: PseudoDiffOperator, t: float):
        if not t >= 0:
            raise ValueError("time must be nonnegative")
        self.op = op
        self.t = float(t)
        self.a = op.sign * self.t
        self.sup_bound = math.exp(self.a * op.origin) if self.a <= 0 else None

    def values(self, m):
        H = self.op.values(m)
        with np.errstate(over="ignore", invalid="ignore"):
            if self.a <= 0:
                return np.where(np.isinf(H), 0.0, np.exp(self.a * np.where(np.isinf(H), 0.0, H)))
            return np.exp(self.a * H)

    @property
    def origin(self):
        return math.exp(self.a * self.op.origin)

    def deviations(self, m):
        dH = self.op.deviations(m)
        with np.errstate(over="ignore", invalid="ignore"):
            d = self.origin * np.expm1(self.a * np.where(np.isinf(dH), 0.0, dH))
        if self.a <= 0:
            d = np.where(np.isinf(dH), -self.origin, d)
        else:
            d = np.where(np.isinf(dH), np.inf, d)
        return d

    def deviation_bound(self, m):
        db = self.op.deviation_bound(m)
        if self.a <= 0:
            return self.origin * -math.expm1(self.a * db) if math.isfinite(db) else self.origin
        return self.origin * math.expm1(min(self.a * db, _LOG_MAX))


@dataclass
class HeatKernel:
    t: float
    op: PseudoDiffOperator
    Z: RadialFunction
    spectrum: RadialFunction
    certificates: dict = field(default_factory=dict)

    @property
    def mass(self) -> float:
        return self.certificates["mass"]

    @property
    def min_value(self) -> float:
        return self.certificates["min_value"]

    def to_json(self) -> dict:
        return {"t": self.t, "certificates": self.certificates, "Z": self.Z.to_json()}


def _check_generator(op: PseudoDiffOperator):
    if op.sign != -1:
        raise ValueError("heat kernels exist only for the generator sign convention; "
                         "the sign-flipped operator does not generate a semigroup")
    if not op.has_unbounded_term:
        raise ValueError("operator has no type-1 or type-2 term; exp(-t p) is not integrable")


def heat_kernel(op: PseudoDiffOperator, t: float, eps: float = DEFAULT_EPS,
                max_span: int = 512) -> HeatKernel:
    """``Z_t = F^-1 exp(-t p)`` with a certified window.

    The frequency window is grown upward until the spectral mass
    ``exp(-t p) vol`` left beyond it is below ``eps / 4``, and downward until
    the spectrum's departure from its value at zero is below ``eps / 4`` in
    both the sup and the L1 sense; the x-side window is the dual one.
    """
    _check_generator(op)
    if not t > 0:
        raise ValueError("t must be positive")
    p, n = op.p, op.n
    mult = HeatMultiplier(op, t)
    g0 = mult.origin
    log_cap = int(_LOG_MAX / (n * math.log(p)))

    def term(m):
        return float(mult.values([m])[0]) * float(shell_volumes(p, n, [m])[0])

    # upper edge: the terms exp(-t H(m)) vol_m eventually decay super-geometrically
    m_hi = 0
    while True:
        nxt, nxt2 = term(m_hi + 1), term(m_hi + 2)
        if nxt < eps / 8 and nxt2 <= 0.5 * nxt:
            break
        m_hi += 1
        if m_hi + 2 > log_cap:
            raise WindowOverflowError(f"heat-kernel spectrum not negligible below shell {log_cap}",
                                      needed=m_hi, bound=nxt)
    # remainder above m_hi, summed explicitly until it underflows
    hi_tail, hi_tail_sup = 0.0, 0.0
    for m in range(m_hi + 1, min(m_hi + 65, log_cap)):
        tm = term(m)
        hi_tail += tm
        hi_tail_sup += float(mult.values([m])[0])
        if tm == 0.0:
            break
    # lower edge
    m_lo = min(0, m_hi)
    while True:
        devs = [mult.deviation_bound(m_lo - 1 - i) for i in range(64)]
        lo_sup = sum(d * float(shell_volumes(p, n, [m_lo - 1 - i])[0]) for i, d in enumerate(devs))
        # deviations below the window decay geometrically; close the sum with the last ratio
        rho = devs[-1] / devs[-2] if devs[-2] > 0 else 0.0
        rest = devs[-1] * rho / (1.0 - rho) if rho < 1 else math.inf
        lo_l1 = 2.0 * (sum(devs) + rest)
        if lo_sup < eps / 4 and lo_l1 < eps / 4:
            break
        m_lo -= 1
        if m_hi - m_lo + 1 > max_span or -m_lo + 1 > log_cap:
            raise WindowOverflowError(f"heat-kernel spectrum window exceeds {max_span} shells",
                                      needed=m_hi - m_lo + 1, bound=max(lo_sup, lo_l1))
    ms = np.arange(m_lo, m_hi + 1)
    spec = RadialFunction(p, n, m_lo, mult.values(ms), inner=g0, deviations=mult.deviations(ms),
                          sup_error=float(max(mult.deviation_bound(m_lo - 1),
                                              float(mult.values([m_hi + 1])[0]))),
                          l1_error=lo_sup + hi_tail)
    Z = radial_fourier(replace(spec, sup_error=0.0, l1_error=0.0))
    sup_rem = lo_sup + hi_tail
    l1_rem = lo_l1 + 2.0 * hi_tail_sup
    Z = replace(Z, sup_error=sup_rem, l1_error=l1_rem)
    mass = float(np.real(radial_integral(Z)))
    vals = np.real(Z.values)
    certs = {
        "t": t, "mass": mass, "expected_mass": g0, "mass_error": abs(mass - g0),
        "min_value": float(min(np.min(vals), np.real(Z.inner))),
        "max_value": float(max(np.max(vals), np.real(Z.inner))),
        "sup_remainder": sup_rem, "l1_remainder": l1_rem,
        "spectral_window": [m_lo, m_hi], "x_window": [Z.k_min, Z.k_max], "eps": eps,
    }
    return HeatKernel(t, op, Z, spec, certs)


def semigroup_apply(op_or_kernel, u0: RadialFunction, t: float | None = None,
                    rtol: float = 1e-17) -> RadialFunction:
    """``T_t u0 = F^-1(exp(-t p) F u0)``.

    Accepts a :class:`HeatKernel` or an operator together with ``t``.  For a
    sign-flipped operator the growing multiplier is applied on the compact
    spectrum of ``u0``, which is how positivity failures are exhibited.
    """
    if isinstance(op_or_kernel, HeatKernel):
        op, t = op_or_kernel.op, op_or_kernel.t
    else:
        op = op_or_kernel
        if t is None:
            raise ValueError("t is required when an operator is given")
    if t == 0:
        return u0
    out = apply_fourier_multiplier(u0, HeatMultiplier(op, t), rtol=rtol)
    return out.real_part() if not u0.is_complex and out.is_complex else out


@dataclass
class CKReport:
    s: float
    t: float
    sup_error: float
    bound: float

    @property
    def passed(self) -> bool:
        return self.sup_error <= self.bound

    def to_json(self):
        return {"s": self.s, "t": self.t, "sup_error": self.sup_error, "bound": self.bound,
                "passed": self.passed}


def chapman_kolmogorov_check(op: PseudoDiffOperator, s: float, t: float,
                             eps: float = DEFAULT_EPS, tol: float = 1e-8) -> CKReport:
    """Compare ``Z_s * Z_t`` with ``Z_{s+t}``; the bound is the sum of the
    certified remainders plus ``tol``."""
    a, b = sorted((s, t))
    Za, Zb, Zab = heat_kernel(op, a, eps), heat_kernel(op, b, eps), heat_kernel(op, a + b, eps)
    conv = radial_convolve(replace(Za.Z, sup_error=0.0, l1_error=0.0),
                           replace(Zb.Z, sup_error=0.0, l1_error=0.0))
    err = (conv - replace(Zab.Z, sup_error=0.0, l1_error=0.0)).sup_norm()
    rem = (Za.Z.sup_norm() * Zb.certificates["l1_remainder"]
           + Zb.Z.sup_norm() * Za.certificates["l1_remainder"]
           + Zab.certificates["sup_remainder"])
    return CKReport(s, t, float(err), float(rem + tol))


# -- Cauchy problem --------------------------------------------------------------
@dataclass
class CauchySolution:
    times: np.ndarray
    u: list
    scheme: str
    quadrature_error: float | None = None
    residuals: list = field(default_factory=list)

    def to_json(self) -> dict:
        return {"times": self.times.tolist(), "scheme": self.scheme,
                "quadrature_error": self.quadrature_error,
                "residuals": self.residuals}


def _quadrature_weights(i: int, h: float, scheme: str) -> np.ndarray:
    """Weights for nodes 0..i on a uniform grid of step h."""
    w = np.zeros(i + 1)
    if i == 0:
        return w
    if scheme == "trapezoid" or i == 1:
        w[:] = h
        w[0] = w[-1] = h / 2
        return w
    if scheme != "simpson":
        raise ValueError(f"unknown quadrature scheme {scheme!r}")
    simpson_end = i if i % 2 == 0 else i - 3
    if simpson_end > 0:
        w[0:simpson_end + 1:2] += 2 * h / 3
        w[1:simpson_end:2] += 4 * h / 3
        w[0] -= h / 3
        w[simpson_end] -= h / 3
    if i % 2 == 1:
        # Simpson 3/8 on the last three intervals
        for k, c in zip(range(i - 3, i + 1), (1, 3, 3, 1)):
            w[k] += 3 * h / 8 * c
    return w


def _source_at(source, j: int, s: float):
    if source is None:
        return None
    if callable(source):
        return source(s)
    return source[j]


def _duhamel(op, source, times, scheme, rtol):
    """Duhamel integrals at every grid time, summed on the frequency side.

    All source spectra are placed on one frequency window, pushed towards
    zero far enough for the largest lag, so that each quadrature sum is a
    weighted sum of arrays followed by a single inverse transform.
    """
    h = times[1] - times[0]
    M = len(times) - 1
    src = [_source_at(source, j, s) for j, s in enumerate(times)]
    for f in src:
        if not (np.all(np.isfinite(f.values)) and np.isfinite(f.inner)):
            raise ValueError("source values must be finite")
    spec = [radial_fourier(f) for f in src]
    p, n = op.p, op.n
    lo = min(g.k_min for g in spec)
    hi = max(g.k_max for g in spec)
    cmax = max(abs(g.inner) for g in spec)
    scale = max(max(l1_norm(g) for g in spec), 1e-300)
    far = HeatMultiplier(op, times[-1])
    remainder = 0.0
    if cmax > 0:
        while True:
            remainder = cmax * far.deviation_bound(lo - 1) * float(ball_volumes(p, n, [lo - 1])[0])
            if remainder <= rtol * scale or hi - lo + 2 > MAX_SPAN:
                break
            lo -= 1
    spec = [g.extended(lo, hi) for g in spec]
    V = np.array([g.values for g in spec])
    D = np.array([g.deviations for g in spec])
    c = np.array([g.inner for g in spec])
    ms = np.arange(lo, hi + 1)
    mults = [HeatMultiplier(op, lag * h) for lag in range(M + 1)]
    E = np.array([m.values(ms) for m in mults])
    Ed = np.array([m.deviations(ms) for m in mults])
    e0 = np.array([m.origin for m in mults])
    out = []
    for i in range(M + 1):
        w = _quadrature_weights(i, h, scheme)
        if i == 0:
            out.append(0.0 * src[0])
            continue
        lags = i - np.arange(i + 1)
        wv = w[:, None]
        vals = np.sum(wv * E[lags] * V[:i + 1], axis=0)
        devs = np.sum(wv * (E[lags] * D[:i + 1] + Ed[lags] * c[:i + 1, None]), axis=0)
        inner = float(np.sum(w * e0[lags] * c[:i + 1]))
        g = RadialFunction(p, n, lo, vals, inner=inner, deviations=devs)
        u = radial_fourier(g)
        out.append(replace(u, sup_error=remainder * float(np.sum(w))))
    return out


def cauchy_solve(op: PseudoDiffOperator, u0: RadialFunction, source=None, T: float = 1.0,
                 M: int = 64, scheme: str = "trapezoid", error_estimate: bool = True,
                 rtol: float = 1e-17) -> CauchySolution:
    """``u(t) = T_t u0 + int_0^t T_{t-s} f(s) ds`` on ``M`` uniform steps.

    ``source`` is ``None``, a callable ``s -> RadialFunction`` or a sequence of
    ``M + 1`` radial functions on the grid.  The Duhamel integral uses the
    composite trapezoid (or Simpson) rule; its error is estimated by
    comparing ``M`` with ``2M`` steps (callable sources only).
    """
    if not T > 0:
        raise ValueError("T must be positive")
    M = int(M)
    if source is not None and M < 2:
        raise ValueError("at least two steps are needed with a source")
    if M < 1:
        raise ValueError("M must be >= 1")
    if source is not None and not callable(source) and len(source) != M + 1:
        raise ValueError(f"source must have {M + 1} entries, got {len(source)}")
    times = np.linspace(0.0, T, M + 1)
    hom = [u0] + [semigroup_apply(op, u0, float(t), rtol=rtol) for t in times[1:]]
    if source is None:
        return CauchySolution(times, hom, scheme, quadrature_error=0.0)
    duh = _duhamel(op, source, times, scheme, rtol)
    u = [hom[0]] + [a + b for a, b in zip(hom[1:], duh[1:])]
    qerr = None
    if error_estimate and callable(source):
        fine = _duhamel(op, source, np.linspace(0.0, T, 2 * M + 1), scheme, rtol)
        order = 2 if scheme == "trapezoid" else 4
        qerr = max((fine[2 * i] - duh[i]).sup_norm() for i in range(1, M + 1)) / (2 ** order - 1)
    return CauchySolution(times, u, scheme, quadrature_error=qerr)


def fd_residuals(op: PseudoDiffOperator, sol: CauchySolution, source=None) -> list:
    """Sup norm of ``(u_{i+1} - u_{i-1}) / (2 dt) - P u_i - f_i`` at interior points."""
    times, u = sol.times, sol.u
    out = []
    for i in range(1, len(times) - 1):
        dt = times[i + 1] - times[i - 1]
        r = (1.0 / dt) * (u[i + 1] - u[i - 1]) - apply_P(op, u[i])
        f = _source_at(source, i, float(times[i]))
        if f is not None:
            r = r - f
        out.append(float(r.sup_norm()))
    sol.residuals = out
    return out


def fd_residual_at(op: PseudoDiffOperator, u0: RadialFunction, t: float, dt: float) -> float:
    """Centered-difference residual of the homogeneous solution at time ``t``."""
    up = semigroup_apply(op, u0, t + dt)
    um = semigroup_apply(op, u0, t - dt)
    u = semigroup_apply(op, u0, t)
    return float(((1.0 / (2 * dt)) * (up - um) - apply_P(op, u)).sup_norm())


def observed_order(errors, steps) -> list:
    return [math.log(errors[i] / errors[i + 1]) / math.log(steps[i] / steps[i + 1])
            for i in range(len(errors) - 1)]


def laplace_check(op: PseudoDiffOperator, u0: RadialFunction, lam: float, T: float = 40.0,
                  M: int = 4000) -> dict:
    """Trapezoid Laplace transform of ``t -> T_t u0`` against the resolvent.

    The tolerance is the Richardson estimate of the quadrature error plus the
    truncation ``exp(-lam T) ||u0|| / lam``.
    """
    def transform(steps):
        ts = np.linspace(0.0, T, steps + 1)
        w = _quadrature_weights(steps, ts[1] - ts[0], "trapezoid") * np.exp(-lam * ts)
        acc = w[0] * u0
        for wi, t in zip(w[1:], ts[1:]):
            acc = acc + wi * semigroup_apply(op, u0, float(t))
        return acc

    coarse, fine = transform(M // 2), transform(M)
    quad = (fine - coarse).sup_norm() / 3.0
    trunc = math.exp(-lam * T) * u0.sup_norm() / lam
    R = resolvent_solve(op, lam, u0)
    diff = (fine - R).sup_norm()
    tol = 2.0 * quad + trunc + 1e-12
    return {"lambda": lam, "difference": diff, "tolerance": tol, "passed": diff <= tol}


# -- Feller verification -------------------------------------------------------------
def feller_battery(p: int, n: int = 1, rng=None, count: int = 6) -> list:
    """Functions with values in [0, 1] for the positivity-and-contraction test."""
    rng = np.random.default_rng(0) if rng is None else rng
    out = [RadialFunction.indicator_ball(r, p, n) for r in (-2, 0, 2)]
    out.append(RadialFunction.indicator_sphere(0, p, n))
    for _ in range(count):
        lo = int(rng.integers(-3, 1))
        hi = int(rng.integers(lo, 4))
        out.append(RadialFunction(p, n, lo, rng.random(hi - lo + 1), inner=float(rng.random())))
    return out


def verify_feller(op: PseudoDiffOperator, ts=(0.1, 1.0, 10.0), battery=None,
                  eps: float = DEFAULT_EPS, small_t: float = 1e-6,
                  continuity_threshold: float = 1e-3, tol: float = 1e-10) -> dict:
    """Semigroup law, a small-time continuity proxy and ``0 <= T_t f <= 1``."""
    battery = feller_battery(op.p, op.n) if battery is None else battery
    checks = {}
    witnesses = []
    generator = op.sign == -1 and op.has_unbounded_term
    if generator:
        kern = []
        for t in ts:
            hk = heat_kernel(op, t, eps)
            ok_mass = abs(hk.mass - hk.certificates["expected_mass"]) <= 1e-10
            ok_pos = hk.min_value >= -tol
            kern.append({"t": t, "mass": hk.mass, "min_value": hk.min_value,
                         "passed": bool(ok_mass and ok_pos)})
        checks["kernel"] = kern
        ck = [chapman_kolmogorov_check(op, s, t, eps).to_json()
              for s in (0.5, 1.0, 2.0) for t in (0.5, 1.0, 2.0) if s <= t]
        checks["chapman_kolmogorov"] = ck
    cont = []
    for f in battery:
        d = (semigroup_apply(op, f, small_t) - f).sup_norm()
        cont.append({"deviation": d, "passed": d <= continuity_threshold})
    checks["strong_continuity"] = cont
    pos = []
    for t in ts:
        for idx, f in enumerate(battery):
            try:
                g = semigroup_apply(op, f, t)
            except OverflowError:
                pos.append({"t": t, "index": idx, "passed": False, "reason": "overflow"})
                witnesses.append({"t": t, "function": f.to_json(), "reason": "overflow"})
                continue
            vals = np.concatenate([np.real(g.values), [np.real(g.inner), 0.0]])
            lo, hi = float(vals.min()), float(vals.max())
            ok = lo >= -tol - g.sup_bound and hi <= 1 + tol + g.sup_bound and \
                g.sup_norm() <= f.sup_norm() * (1 + tol) + g.sup_bound
            pos.append({"t": t, "index": idx, "min": lo, "max": hi, "passed": bool(ok)})
            if not ok:
                witnesses.append({"t": t, "function": f.to_json(), "min": lo, "max": hi})
    checks["positivity_contraction"] = pos
    passed = all(e["passed"] for group in checks.values() for e in group)
    return {"passed": passed, "checks": checks, "witnesses": witnesses}
