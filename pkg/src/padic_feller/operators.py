"""Pseudodifferential operators with radial symbols, in spectral and
integral-kernel form, plus the resolvent and numeric maximum-principle tests."""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .padic import ORIGIN
from .radial import (MAX_SPAN, Multiplier, OuterDecay, RadialFunction, apply_fourier_multiplier,
                     ball_volumes, direct_convolve, radial_fourier, radial_integral,
                     shell_volumes)
from .symbols import DEFAULT_CHECK_WINDOW, OneMinusJHat, PowerNorm, Sum, Symbol

APPLY_RTOL = 1e-17


class PseudoDiffOperator(Multiplier):
    """``P = sign * sum_j b_j D_{psi_j}``; ``sign = -1`` is the generator
    convention, ``sign = +1`` the sign-flipped operator used as a negative
    control."""

    def __init__(self, terms, sign: int = -1):
        terms = [(float(b), s) for b, s in terms]
        if not terms:
            raise ValueError("operator needs at least one term")
        if any(not b > 0 for b, _ in terms):
            raise ValueError("term weights must be positive")
        ps = {(s.p, s.n) for _, s in terms}
        if len(ps) != 1:
            raise ValueError("all symbols must live on the same Q_p^n")
        if sign not in (-1, 1):
            raise ValueError("sign must be -1 or +1")
        self.terms = terms
        self.sign = sign
        (self.p, self.n), = ps

    def __repr__(self):
        return f"PseudoDiffOperator({self.terms!r}, sign={self.sign})"

    def flipped(self) -> "PseudoDiffOperator":
        return PseudoDiffOperator(self.terms, sign=-self.sign)

    # combined symbol H = sum b_j psi_j
    def values(self, m):
        with np.errstate(invalid="ignore"):
            return sum(b * s.values(m) for b, s in self.terms)

    @property
    def origin(self):
        return float(sum(b * s.origin for b, s in self.terms))

    def deviations(self, m):
        with np.errstate(invalid="ignore"):
            return sum(b * s.deviations(m) for b, s in self.terms)

    def deviation_bound(self, m):
        return float(sum(b * s.deviation_bound(m) for b, s in self.terms))

    @property
    def sup_bound(self):
        bounds = [s.sup_bound for _, s in self.terms]
        if any(b is None for b in bounds):
            return None
        return float(sum(b * c for (b, _), c in zip(self.terms, bounds)))

    @property
    def symbol_type(self) -> int:
        return max(s.type_tag for _, s in self.terms)

    @property
    def has_unbounded_term(self) -> bool:
        return self.symbol_type in (1, 2)

    def symbol(self) -> Symbol:
        p, n = self.p, self.n
        return Symbol(Sum(tuple(b for b, _ in self.terms), tuple(s.expr for _, s in self.terms)), p, n)

    def space_weight(self, window=DEFAULT_CHECK_WINDOW) -> tuple:
        """The weight attached to the operator and the constant ``C`` found
        on ``window`` for the bound of ``p(xi)`` by that weight."""
        lo, hi = window
        ms = np.arange(lo, hi + 1)
        H = self.values(ms)
        tag = self.symbol_type
        if tag == 1:
            beta = max(1.0, max(s.type_info()["constants"]["beta1"] for _, s in self.terms
                                if s.type_tag == 1))
            w = Symbol(PowerNorm(1.0, beta), self.p, self.n)
            denom = np.maximum(1.0, float(self.p) ** (ms * beta))
        elif tag == 2:
            t2 = [s for _, s in self.terms if s.type_tag == 2]
            w = Symbol(Sum(tuple(1.0 for _ in t2), tuple(s.expr for s in t2)), self.p, self.n)
            denom = w.values(ms)
        else:
            raise ValueError("no type-1 or type-2 term; no space is attached")
        with np.errstate(invalid="ignore", over="ignore"):
            ratio = np.where(np.isfinite(H) & np.isfinite(denom), H / denom, 1.0)
        C = float(max(np.nanmax(ratio), self.origin))
        if tag == 2:
            w = w.scaled(C)
        return w, C

    def to_json(self) -> dict:
        out = {"terms": [{"b": b, "symbol": s.to_json()} for b, s in self.terms],
               "sign": self.sign}
        try:
            w, C = self.space_weight()
            out["space_weight"] = {"symbol": w.to_json(), "C": C}
        except ValueError:
            pass                # type-0 only: no space is attached
        return out

    @classmethod
    def from_json(cls, obj: dict, strict: bool = True) -> "PseudoDiffOperator":
        if "terms" not in obj:
            # a bare symbol is read as the single-term operator -D_psi
            return cls([(1.0, Symbol.from_json(obj, strict=strict))])
        return cls([(t.get("b", 1.0), Symbol.from_json(t["symbol"], strict=strict))
                    for t in obj["terms"]], sign=int(obj.get("sign", -1)))


def taibleson_operator(beta: float, p: int, n: int = 1, b: float = 1.0) -> PseudoDiffOperator:
    return PseudoDiffOperator([(b, Symbol(PowerNorm(1.0, beta), p, n))])


def jkernel_operator(J: RadialFunction, b: float = 1.0) -> PseudoDiffOperator:
    return PseudoDiffOperator([(b, Symbol(OneMinusJHat(J), J.p, J.n))])


def mixed_operator(betas, p: int, n: int = 1, Js=(), b_beta=None, b_J=None) -> PseudoDiffOperator:
    """Taibleson terms for increasing ``betas`` plus jump terms for each ``J``."""
    b_beta = b_beta or [1.0] * len(betas)
    b_J = b_J or [1.0] * len(Js)
    terms = [(b, Symbol(PowerNorm(1.0, beta), p, n)) for b, beta in zip(b_beta, betas)]
    terms += [(b, Symbol(OneMinusJHat(J), p, n)) for b, J in zip(b_J, Js)]
    return PseudoDiffOperator(terms)


def uniform_ball_density(r: int, p: int, n: int = 1) -> RadialFunction:
    """Normalized indicator of ``B_r``: a valid jump kernel ``J``."""
    return RadialFunction.indicator_ball(r, p, n, scale=float(p) ** (-r * n))


# -- application ---------------------------------------------------------------
def apply_multiplier(psi: Multiplier, f: RadialFunction, rtol: float = APPLY_RTOL,
                     max_span: int = MAX_SPAN) -> RadialFunction:
    """``F^-1(psi * F f)``."""
    out = apply_fourier_multiplier(f, psi, rtol=rtol, max_span=max_span)
    if not f.is_complex and out.is_complex:
        out = out.real_part()
    return out


def apply_P(op: PseudoDiffOperator, f: RadialFunction, rtol: float = APPLY_RTOL) -> RadialFunction:
    return op.sign * apply_multiplier(op, f, rtol=rtol)


def taibleson_constant(beta: float, p: int, n: int = 1) -> float:
    """Normalization ``(1 - p**beta) / (1 - p**(-beta - n))`` of the kernel form."""
    return (1 - float(p) ** beta) / (1 - float(p) ** (-beta - n))


def taibleson_integral_apply(beta: float, f: RadialFunction, rtol: float = 1e-17) -> RadialFunction:
    """``D^beta f`` from the integral form with the kernel ``||y||**(-beta-n)``.

    For ``||x|| = p**k`` the ``y``-shells below ``k`` contribute nothing,
    the shell ``k`` contributes ``p**(-k(beta+n))`` times the integral of
    ``f - f(p**k)`` over ``B_{k-1}``, and each outer shell ``j`` contributes
    ``(f(p**j) - f(p**k))`` times its kernel mass.  Shells past the support
    are summed as a geometric series.  The result decays like
    ``p**(-k(beta+n))`` outside the support; that tail is cut once it falls
    below ``rtol`` relative to the value scale and declared as outer decay.
    """
    if f.outer is not None or f.sup_bound or f.l1_bound:
        raise ValueError("Taibleson integral form needs an exactly represented compact step function")
    p, n = f.p, f.n
    s = beta + n
    const = taibleson_constant(beta, p, n)
    a, b = f.k_min, f.k_max
    total = radial_integral(f)
    scale = max(abs(total), f.sup_norm(), 1e-300)
    # outer extension: |const * total| p**(-k s) <= rtol * scale
    k_hi = b + 1
    if total != 0:
        need = math.log(abs(const * total) / (rtol * scale)) / (s * math.log(p))
        k_hi = max(k_hi, math.ceil(need))
    k_hi = min(k_hi, b + MAX_SPAN // 2, int(690 / (n * math.log(p))) - 1)
    g = f.extended(a - 1, k_hi)
    ks = g.shells
    vals, devs, c = g.values, g.deviations, g.inner
    vol = g.volumes
    P_prev = ball_volumes(p, n, ks - 1)
    Pa = float(ball_volumes(p, n, [a - 2])[0])
    # integral of (f - f_k) over B_{k-1}, from raw values or from deviations
    excl = lambda x: np.concatenate([[0.0], np.cumsum(x)])[:-1]
    raw = c * Pa + excl(vals * vol) - vals * P_prev
    e_raw = abs(c) * Pa + excl(np.abs(vals * vol)) + np.abs(vals) * P_prev
    dv = excl(devs * vol) - devs * P_prev
    e_dv = excl(np.abs(devs * vol)) + np.abs(devs) * P_prev
    inner_part = np.where(e_dv <= e_raw, dv, raw)
    w = np.exp(-ks * s * math.log(p))                      # kernel weight p**(-j s)
    kern = w * vol                                          # kernel mass of shell j
    # sum over j > k of (f_j - f_k) * kern_j inside the window, then the
    # geometric remainder past it where f = 0
    later = lambda x: np.concatenate([np.cumsum(x[::-1])[::-1][1:], [0.0]])
    j0 = ks[-1] + 1
    geo = (1 - float(p) ** (-n)) * float(p) ** (-j0 * beta) / (1 - float(p) ** (-beta))
    outer_sum = later(devs * kern) - devs * later(kern) - vals * geo
    out_vals = const * (w * inner_part + outer_sum)
    origin = const * (np.sum(devs * kern) - c * geo)
    tail_amp = abs(const * total) * float(p) ** (-k_hi * s)
    return RadialFunction(p, n, a - 1, out_vals, inner=origin,
                          outer=OuterDecay(tail_amp, float(p) ** (-s)) if tail_amp else None)


def jkernel_apply(J: RadialFunction, f: RadialFunction) -> RadialFunction:
    """``-int J(||x-y||)(f(y) - f(x)) dy = f - J * f`` from x-space shell sums."""
    if J.inf() < 0:
        raise ValueError("J must be nonnegative")
    mass = float(np.real(radial_integral(J)))
    if abs(mass - 1.0) > 1e-12:
        raise ValueError(f"J must have mass 1, got {mass!r}")
    return (f - direct_convolve(J, f)).trimmed()


# -- resolvent -------------------------------------------------------------------
class ResolventMultiplier(Multiplier):
    """``1 / (lam + H)`` for an operator with symbol ``H >= 0``."""

    def __init__(self, op: PseudoDiffOperator, lam: float):
        self.op = op
        self.lam = float(lam)
        self.sup_bound = 1.0 / self.lam

    def values(self, m):
        H = self.op.values(m)
        with np.errstate(divide="ignore"):
            return np.where(np.isinf(H), 0.0, 1.0 / (self.lam + H))

    @property
    def origin(self):
        return 1.0 / (self.lam + self.op.origin)

    def deviations(self, m):
        H = self.op.values(m)
        dH = self.op.deviations(m)
        with np.errstate(invalid="ignore", divide="ignore"):
            d = -dH / ((self.lam + H) * (self.lam + self.op.origin))
        return np.where(np.isinf(H), -self.origin, d)

    def deviation_bound(self, m):
        return min(self.op.deviation_bound(m) / self.lam ** 2, 2.0 / self.lam)


def resolvent_solve(op: PseudoDiffOperator, lam: float, f: RadialFunction,
                    rtol: float = APPLY_RTOL) -> RadialFunction:
    """Solve ``(lam - P) u = f`` spectrally."""
    if not lam > 0:
        raise ValueError(f"lambda must be positive, got {lam}")
    if op.sign != -1:
        raise ValueError("resolvent is only defined for the generator sign convention")
    return apply_multiplier(ResolventMultiplier(op, lam), f, rtol=rtol)


def resolvent_residual(op: PseudoDiffOperator, lam: float, u: RadialFunction,
                       f: RadialFunction) -> float:
    r = lam * u - apply_P(op, u) - f
    return r.sup_norm()


# -- maximum principle and dissipativity --------------------------------------------
def _outer_values(g: RadialFunction, k_from: int) -> np.ndarray:
    """Values of ``g`` on shells ``>= k_from`` inside its window, plus the zero beyond."""
    if k_from > g.k_max:
        return np.array([0.0])
    return np.concatenate([np.real(g.values[k_from - g.k_min:]), [0.0]])


@dataclass
class PMPReport:
    entries: list = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(e["verdict"] != "fail" for e in self.entries)

    @property
    def witnesses(self) -> list:
        return [e for e in self.entries if e["verdict"] == "fail"]

    def to_json(self) -> dict:
        return {"passed": self.passed, "entries": self.entries}


def pmp_check(op: PseudoDiffOperator, functions, tol: float = 1e-9) -> PMPReport:
    """At every maximizing shell of each test function with ``sup f >= 0``,
    ``(P f)`` must be ``<= tol``."""
    report = PMPReport()
    for idx, f in enumerate(functions):
        entry = {"index": idx}
        if f.is_complex and f.max_imag() > 0:
            raise ValueError("PMP test functions must be real")
        f = f.real_part() if f.is_complex else f
        if f.outer is not None or f.sup_bound > 0:
            entry.update(verdict="inconclusive", reason="sup not certified on the window")
            report.entries.append(entry)
            continue
        vals = np.asarray(f.values, dtype=float)
        top = max(float(np.max(vals)), float(f.inner), 0.0)
        entry["max_value"] = top
        Pf = apply_P(op, f)
        Pf = Pf.real_part() if Pf.is_complex else Pf
        scale = max(1.0, Pf.sup_norm())
        locs, opvals = [], []
        if f.inner == top:
            locs.append("origin")
            opvals.append(float(Pf.at(ORIGIN)))
            lo_inner = min(Pf.k_min, f.k_min)
            for k in range(lo_inner, f.k_min):
                opvals.append(float(np.real(Pf.at(k))))
        for k, v in zip(f.shells, vals):
            if v == top:
                locs.append(int(k))
                opvals.append(float(np.real(Pf.at(int(k)))))
        if top == 0.0:
            locs.append(f"k>{f.k_max}")
            opvals.extend(_outer_values(Pf, f.k_max + 1).tolist())
            opvals.append(Pf.sup_bound)     # certified bound past the window
        worst = max(opvals)
        entry.update(max_shells=locs, operator_value=worst, tolerance=tol * scale)
        if top < 0:
            entry["verdict"] = "vacuous"
        elif worst > tol * scale:
            entry["verdict"] = "fail"
            entry["witness"] = {"function": f.to_json(), "x0_shells": locs,
                                "f_x0": top, "Pf_x0": worst}
        else:
            entry["verdict"] = "pass"
        report.entries.append(entry)
    return report


@dataclass
class DissipativityReport:
    lam: float
    entries: list = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(e["holds"] for e in self.entries)

    @property
    def violations(self) -> list:
        return [e for e in self.entries if not e["holds"]]

    def to_json(self) -> dict:
        return {"lambda": self.lam, "passed": self.passed, "entries": self.entries}


def dissipativity_check(op: PseudoDiffOperator, lam: float, functions,
                        rtol: float = 1e-10) -> DissipativityReport:
    """``||(1 - lam P) f||_inf >= ||f||_inf`` for each test function."""
    if not lam > 0:
        raise ValueError("lambda must be positive")
    rep = DissipativityReport(lam)
    for idx, f in enumerate(functions):
        g = f - lam * apply_P(op, f)
        lhs = g.sup_norm() + g.sup_bound
        rhs = f.sup_norm()
        holds = bool(lhs >= rhs * (1 - rtol))
        e = {"index": idx, "lhs": lhs, "rhs": rhs, "holds": holds}
        if not holds:
            e["witness"] = f.to_json()
        rep.entries.append(e)
    return rep


def function_battery(p: int, n: int = 1, rng=None, random_count: int = 8,
                 window=(-3, 3)) -> list:
    """Radial step functions for the maximum-principle tests: ball and sphere
    indicators, their negatives, and random steps (some confined to ``[0, 1]``)."""
    rng = np.random.default_rng(0) if rng is None else rng
    out = []
    for r in range(window[0], window[1] + 1):
        out.append(RadialFunction.indicator_ball(r, p, n))
        out.append(RadialFunction.indicator_sphere(r, p, n))
    out.append(-1.0 * RadialFunction.indicator_ball(0, p, n))
    out.append(RadialFunction.indicator_ball(0, p, n) - 2.0 * RadialFunction.indicator_ball(-1, p, n))
    for i in range(random_count):
        lo = int(rng.integers(window[0], 1))
        hi = int(rng.integers(lo, window[1] + 1))
        vals = rng.random(hi - lo + 1)
        if i % 2:
            vals = 2 * vals - 1
        out.append(RadialFunction(p, n, lo, vals, inner=float(rng.random())))
    return out
