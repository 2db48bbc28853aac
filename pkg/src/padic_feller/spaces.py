"""Weighted Fourier-side Sobolev norms, the metric built from them and the
embedding chain into continuous functions."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .radial import RadialFunction, ball_volumes, radial_fourier, shell_volumes
from .symbols import Symbol, normalize_condition_psi

DEFAULT_L_MAX = 8


class WeightError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class SobolevWeight:
    """``w_l(xi) = max{1, |psi(||xi||)|}**l`` for a normalized symbol ``psi``."""

    psi: Symbol
    l: int

    def __post_init__(self):
        if int(self.l) != self.l or self.l < 0:
            raise WeightError(f"l must be a nonnegative integer, got {self.l}")
        if self.psi.type_tag not in (1, 2):
            raise WeightError("the weight symbol must be of type 1 or 2")
        ms = np.arange(-64, 1)
        sup = float(max(np.max(np.abs(self.psi.values(ms))), abs(self.psi.origin)))
        if not 0 < sup <= 1 + 1e-12:
            raise WeightError(f"symbol is not normalized on Z_p^n (sup = {sup!r}); "
                              "use SobolevWeight.normalized")

    @classmethod
    def normalized(cls, psi: Symbol, l: int) -> "SobolevWeight":
        return cls(normalize_condition_psi(psi), l)

    def with_l(self, l: int) -> "SobolevWeight":
        return SobolevWeight(self.psi, l)

    def log_values(self, m) -> np.ndarray:
        with np.errstate(over="ignore", invalid="ignore"):
            a = np.abs(self.psi.values(m))
        if self.l == 0:
            return np.zeros(a.shape)
        return self.l * np.log(np.maximum(1.0, a))

    def values(self, m) -> np.ndarray:
        with np.errstate(over="ignore"):
            return np.exp(self.log_values(m))


@dataclass
class NormReport:
    value: float
    remainder: float
    window: tuple
    finite: bool = True
    log_value: float | None = None

    def to_json(self) -> dict:
        return {"value": self.value, "remainder": self.remainder, "window": list(self.window),
                "finite": self.finite, "log_value": self.log_value}


def besov_norm(f: RadialFunction, w: SobolevWeight, fhat: RadialFunction | None = None) -> NormReport:
    """``||f||_{psi,l}``: the square root of ``sum_m w_l(m) |Ff(p**m)|**2 vol(S_m)``.

    Below ``min(window, 0)`` the weight is exactly 1 and the transform is its
    inner constant, so that part is a closed-form ball volume.
    """
    fh = radial_fourier(f) if fhat is None else fhat
    p, n = fh.p, fh.n
    lo = min(fh.k_min, 0)
    fh = fh.extended(lo, fh.k_max)
    ms = fh.shells
    amp = np.abs(fh.values)
    logw = w.log_values(ms)
    nz = amp > 0
    if np.any(~np.isfinite(logw[nz])):
        return NormReport(math.inf, math.inf, (int(lo), int(fh.k_max)), finite=False,
                          log_value=math.inf)
    logs = []
    if fh.inner != 0:
        logs.append(2 * math.log(abs(fh.inner)) + (lo - 1) * n * math.log(p))
    vol_log = ms * n * math.log(p) + math.log1p(-float(p) ** (-n))
    logs.extend((logw[nz] + 2 * np.log(amp[nz]) + vol_log[nz]).tolist())
    if not logs:
        return NormReport(0.0, 0.0, (int(lo), int(fh.k_max)), log_value=-math.inf)
    top = max(logs)
    log_sq = top + math.log(math.fsum(math.exp(x - top) for x in logs))
    log_val = 0.5 * log_sq
    value = math.exp(log_val) if log_val < 709 else math.inf
    # remainder: the represented transform is off by at most its sup error on
    # the window; outside it the error is unweighted only below zero
    rem = 0.0
    if fh.sup_bound:
        wmax = float(np.max(np.exp(np.minimum(logw, 700))))
        rem = fh.sup_bound * math.sqrt(wmax * float(ball_volumes(p, n, [fh.k_max])[0]))
        if fh.l1_bound == math.inf:
            rem = math.inf
    return NormReport(value, rem, (int(lo), int(fh.k_max)), finite=True, log_value=log_val)


def psi_metric(f: RadialFunction, g: RadialFunction, psi: Symbol,
               L_max: int = DEFAULT_L_MAX) -> float:
    """``max_l 2**-l x_l / (1 + x_l)`` with ``x_l = ||f - g||_{psi,l}``, ``l <= L_max``."""
    d = f - g
    dh = radial_fourier(d)
    best = 0.0
    for l in range(L_max + 1):
        x = besov_norm(d, SobolevWeight(psi, l), fhat=dh).value
        term = 2.0 ** -l * (1.0 if math.isinf(x) else x / (1.0 + x))
        best = max(best, term)
    return best


def in_B_infinity(f: RadialFunction, psi: Symbol, L_max: int = DEFAULT_L_MAX) -> bool:
    fh = radial_fourier(f)
    return all(besov_norm(f, SobolevWeight(psi, l), fhat=fh).finite for l in range(L_max + 1))


def embedding_constant(psi: Symbol, l: int, tol: float = 1e-16) -> float:
    """``sqrt(int w_l**-1)``, the Cauchy-Schwarz constant of the embedding."""
    p, n = psi.p, psi.n
    total = 1.0          # the weight is 1 on the unit ball, whose volume is 1
    w = SobolevWeight(psi, l)
    cap = int(690 / (n * math.log(p)))
    prev = None
    for m in range(1, cap):
        term = float(shell_volumes(p, n, [m])[0]) * math.exp(-float(w.log_values([m])[0]))
        total += term
        if prev is not None and prev > 0:
            ratio = term / prev
            if term < tol * total and ratio < 1:
                total += term * ratio / (1 - ratio)
                return math.sqrt(total)
        if term == 0.0:
            return math.sqrt(total)
        prev = term
    raise WeightError("weight does not make w**-1 integrable within the float range")


def embedding_bound_check(f: RadialFunction, psi: Symbol, l: int, rtol: float = 1e-12) -> dict:
    """``||f||_inf <= ||Ff||_{L1} <= C ||f||_{psi,l}``."""
    tag = psi.type_tag
    info = psi.declared_type if psi.declared_type is not None else psi.type_info()
    if tag == 1:
        beta0 = float(info["constants"]["beta0"])
        if not l > psi.n / beta0:
            raise WeightError(f"integrability condition fails: need l > n / beta0 = "
                              f"{psi.n / beta0:g}, got l = {l}")
    elif tag == 2:
        if l < 1:
            raise WeightError("integrability condition fails: type-2 weights need l >= 1")
    else:
        raise WeightError("the weight symbol must be of type 1 or 2")
    fh = radial_fourier(f)
    sup_f = f.sup_norm()
    l1_fh = float(abs(fh.inner) * float(ball_volumes(fh.p, fh.n, [fh.k_min - 1])[0])
                  + np.sum(np.abs(fh.values) * fh.volumes))
    C = embedding_constant(psi, l)
    norm = besov_norm(f, SobolevWeight(psi, l), fhat=fh).value
    first = sup_f <= l1_fh * (1 + rtol) + 1e-300
    second = l1_fh <= C * norm * (1 + rtol) + 1e-300
    return {"sup_norm": sup_f, "fourier_l1": l1_fh, "constant": C, "sobolev_norm": norm,
            "bound": C * norm, "l": l, "holds": bool(first and second)}
