"""Radial negative definite symbols: expression trees, evaluation, type classes
and sample-based definiteness tests.

A symbol is a function of the shell index ``m`` of the frequency (``||xi||_p =
p**m``).  Every node provides its value, its limit at the origin, the
deviation from that limit (computed without cancellation) and a monotone
bound on that deviation, which is what the spectral machinery in
:mod:`padic_feller.radial` needs.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .padic import ORIGIN, PAdicScalar, PAdicVector, shell_of
from .radial import Multiplier, RadialFunction, radial_fourier, radial_integral

LOG_OVERFLOW = 700.0
TYPE2_LADDER = (1, 2, 4, 8, 16)
DEFAULT_CHECK_WINDOW = (-20, 20)


def _shells(m) -> np.ndarray:
    return np.atleast_1d(np.asarray(m, dtype=float))


def _exp_saturating(x: np.ndarray) -> np.ndarray:
    with np.errstate(over="ignore"):
        return np.where(x > LOG_OVERFLOW, np.inf, np.exp(np.minimum(x, LOG_OVERFLOW)))


# -- nodes --------------------------------------------------------------------
class Node:
    kind = "node"
    children: tuple = ()

    def values(self, m, p, n) -> np.ndarray:
        raise NotImplementedError

    def origin(self, p, n) -> float:
        raise NotImplementedError

    def deviations(self, m, p, n) -> np.ndarray:
        return self.values(m, p, n) - self.origin(p, n)

    def deviation_bound(self, m: int, p, n) -> float:
        """``sup_{m' <= m} |value(m') - origin|``."""
        raise NotImplementedError

    monotone = True

    def type_info(self, p, n) -> dict:
        """Type tag with constants that witness the defining inequality."""
        raise NotImplementedError

    def params(self) -> dict:
        return {}

    def to_json(self) -> dict:
        return {"kind": self.kind, "params": self.params(),
                "children": [c.to_json() for c in self.children]}

    def validate(self, p, n):
        for c in self.children:
            c.validate(p, n)


@dataclass(frozen=True)
class Const(Node):
    c: float
    kind = "Const"

    def values(self, m, p, n):
        return np.full(_shells(m).shape, float(self.c))

    def origin(self, p, n):
        return float(self.c)

    def deviations(self, m, p, n):
        return np.zeros(_shells(m).shape)

    def deviation_bound(self, m, p, n):
        return 0.0

    def type_info(self, p, n):
        return {"tag": 0, "constants": {"C": float(self.c) if self.c > 0 else 1.0}}

    def params(self):
        return {"c": self.c}

    def validate(self, p, n):
        if not self.c >= 0:
            raise ValueError(f"Const needs c >= 0, got {self.c}")


@dataclass(frozen=True)
class PowerNorm(Node):
    """``b * ||xi||**alpha``."""

    b: float
    alpha: float
    kind = "PowerNorm"

    def values(self, m, p, n):
        sign = 1.0 if self.b >= 0 else -1.0
        if self.b == 0:
            return np.zeros(_shells(m).shape)
        ms = _shells(m)
        logv = ms * self.alpha * math.log(p) + math.log(abs(self.b))
        with np.errstate(over="ignore"):
            direct = abs(self.b) * np.power(float(p), ms * self.alpha)
        return sign * np.where(logv > LOG_OVERFLOW, np.inf, direct)

    def origin(self, p, n):
        return 0.0

    def deviations(self, m, p, n):
        return self.values(m, p, n)

    def deviation_bound(self, m, p, n):
        return float(abs(self.values([m], p, n)[0]))

    @property
    def monotone(self):
        return self.b >= 0

    def type_info(self, p, n):
        return {"tag": 1, "constants": {"C0": min(1.0, self.b), "C1": max(1.0, self.b),
                                        "beta0": self.alpha, "beta1": self.alpha}}

    def params(self):
        return {"b": self.b, "alpha": self.alpha}

    def validate(self, p, n):
        if not (self.b > 0 and self.alpha > 0):
            raise ValueError(f"PowerNorm needs b > 0 and alpha > 0, got b={self.b}, alpha={self.alpha}")


@dataclass(frozen=True)
class PowerSeriesNorm(Node):
    """``sum_j c_j ||xi||**alpha_j`` with finitely many terms."""

    coefficients: tuple
    exponents: tuple
    kind = "PowerSeriesNorm"

    def __post_init__(self):
        object.__setattr__(self, "coefficients", tuple(float(c) for c in self.coefficients))
        object.__setattr__(self, "exponents", tuple(float(a) for a in self.exponents))
        if len(self.coefficients) != len(self.exponents) or not self.coefficients:
            raise ValueError("PowerSeriesNorm needs matching, non-empty coefficient and exponent lists")

    def values(self, m, p, n):
        out = np.zeros(_shells(m).shape)
        for c, a in zip(self.coefficients, self.exponents):
            if c:
                out = out + PowerNorm(c, a).values(m, p, n)
        return out

    def origin(self, p, n):
        return 0.0

    def deviations(self, m, p, n):
        return self.values(m, p, n)

    def deviation_bound(self, m, p, n):
        return float(abs(self.values([m], p, n)[0]))

    def type_info(self, p, n):
        live = [(c, a) for c, a in zip(self.coefficients, self.exponents) if c > 0]
        c_top, a_top = max(live, key=lambda t: (t[1], t[0]))
        return {"tag": 1, "constants": {"C0": min(1.0, c_top), "C1": max(1.0, sum(c for c, _ in live)),
                                        "beta0": a_top, "beta1": a_top}}

    def params(self):
        return {"coefficients": list(self.coefficients), "exponents": list(self.exponents)}

    def validate(self, p, n):
        if any(c < 0 for c in self.coefficients) or not any(c > 0 for c in self.coefficients):
            raise ValueError("PowerSeriesNorm needs c_j >= 0, not all zero")
        if any(a <= 0 for a in self.exponents):
            raise ValueError("PowerSeriesNorm exponents must be positive")


class OneMinusJHat(Node):
    """``1 - J^(||xi||)`` for a radial probability density ``J`` of compact support."""

    kind = "OneMinusJHat"

    def __init__(self, J: RadialFunction):
        if J.outer is not None or J.l1_bound or J.sup_bound:
            raise ValueError("J must be an exactly represented, compactly supported step function")
        if J.is_complex and J.max_imag() > 0:
            raise ValueError("J must be real")
        J = J.real_part() if J.is_complex else J
        self.J = J
        self.Jhat = radial_fourier(J)
        # running max of |deviation| from below, for the monotone bound
        self._devs = -self.Jhat.deviations
        self._cummax = np.maximum.accumulate(np.abs(self._devs))

    def __eq__(self, other):
        return isinstance(other, OneMinusJHat) and self.J.to_json() == other.J.to_json()

    def __hash__(self):
        return hash(json.dumps(self.J.to_json(), sort_keys=True))

    def _index(self, m):
        return _shells(m) - self.Jhat.k_min

    def values(self, m, p, n):
        idx = self._index(m)
        out = np.empty(idx.shape)
        lo, hi = idx < 0, idx >= len(self._devs)
        mid = ~(lo | hi)
        out[lo] = 0.0
        out[hi] = 1.0
        # J^(0) - J^ rather than 1 - J^: same value for a mass-1 J, without
        # the cancellation near the origin
        out[mid] = self._devs[idx[mid].astype(int)]
        return out

    def origin(self, p, n):
        return 0.0

    def deviations(self, m, p, n):
        idx = self._index(m)
        out = np.empty(idx.shape)
        lo, hi = idx < 0, idx >= len(self._devs)
        mid = ~(lo | hi)
        out[lo] = 0.0
        out[hi] = 1.0
        out[mid] = self._devs[idx[mid].astype(int)]
        return out

    def deviation_bound(self, m, p, n):
        i = int(m) - self.Jhat.k_min
        if i < 0:
            return 0.0
        if i >= len(self._cummax):
            return max(float(self._cummax[-1]), 1.0)
        return float(self._cummax[i])

    @property
    def monotone(self):
        return bool(np.all(np.diff(np.concatenate([[0.0], self._devs, [1.0]])) >= -1e-15))

    def type_info(self, p, n):
        return {"tag": 0, "constants": {"C": 2.0}}

    def params(self):
        return {"J": self.J.to_json()}

    def validate(self, p, n):
        if (self.J.p, self.J.n) != (p, n):
            raise ValueError("J lives on a different space than the symbol")
        if self.J.inf() < 0:
            raise ValueError("J must be nonnegative")
        mass = float(np.real(radial_integral(self.J)))
        if abs(mass - 1.0) > 1e-12:
            raise ValueError(f"J must have mass 1, got {mass!r}")


@dataclass(frozen=True)
class Sum(Node):
    weights: tuple
    children: tuple
    kind = "Sum"

    def __post_init__(self):
        object.__setattr__(self, "weights", tuple(float(w) for w in self.weights))
        object.__setattr__(self, "children", tuple(self.children))
        if len(self.weights) != len(self.children) or not self.children:
            raise ValueError("Sum needs matching, non-empty weights and children")

    def values(self, m, p, n):
        with np.errstate(invalid="ignore"):
            return sum(w * c.values(m, p, n) for w, c in zip(self.weights, self.children))

    def origin(self, p, n):
        return float(sum(w * c.origin(p, n) for w, c in zip(self.weights, self.children)))

    def deviations(self, m, p, n):
        with np.errstate(invalid="ignore"):
            return sum(w * c.deviations(m, p, n) for w, c in zip(self.weights, self.children))

    def deviation_bound(self, m, p, n):
        return float(sum(abs(w) * c.deviation_bound(m, p, n) for w, c in zip(self.weights, self.children)))

    @property
    def monotone(self):
        return all(w >= 0 and c.monotone for w, c in zip(self.weights, self.children))

    def type_info(self, p, n):
        infos = [(w, c.type_info(p, n)) for w, c in zip(self.weights, self.children)]
        tag = max(i["tag"] for _, i in infos)
        if tag == 0:
            return {"tag": 0, "constants": {"C": sum(w * i["constants"]["C"] for w, i in infos)}}
        if tag == 2:
            # the sum dominates each nonnegative summand
            ladders = [(w, i["constants"]) for w, i in infos if i["tag"] == 2]
            consts = {}
            for beta in TYPE2_LADDER:
                consts[str(beta)] = max(min(1.0, w) * c[str(beta)] for w, c in ladders)
            return {"tag": 2, "constants": consts}
        C1 = 0.0
        for w, i in infos:
            c = i["constants"]
            C1 += max(1.0, w) * (c["C1"] if i["tag"] == 1 else max(1.0, c["C"]))
        top = [(w, i["constants"]) for w, i in infos if i["tag"] == 1]
        w0, c0 = max(top, key=lambda t: (t[1]["beta0"], min(1.0, t[0]) * t[1]["C0"]))
        return {"tag": 1, "constants": {"C0": min(1.0, w0) * c0["C0"], "C1": C1,
                                        "beta0": c0["beta0"],
                                        "beta1": max(c["beta1"] for _, c in top)}}

    def params(self):
        return {"weights": list(self.weights)}

    def validate(self, p, n):
        if any(not w > 0 for w in self.weights):
            raise ValueError("Sum weights must be positive")
        super().validate(p, n)


@dataclass(frozen=True)
class ExpTower(Node):
    """``exp(exp(...exp(base)))`` with ``height`` exponentials."""

    base: PowerSeriesNorm
    height: int
    kind = "ExpTower"

    def __post_init__(self):
        if not isinstance(self.base, PowerSeriesNorm):
            raise ValueError("ExpTower base must be a PowerSeriesNorm")
        if int(self.height) != self.height or self.height < 1:
            raise ValueError("ExpTower height must be an integer >= 1")

    @property
    def children(self):
        return (self.base,)

    def _origins(self):
        out = [0.0]
        for _ in range(self.height):
            out.append(math.exp(out[-1]) if out[-1] <= LOG_OVERFLOW else math.inf)
        return out

    def values(self, m, p, n):
        v = self.base.values(m, p, n)
        for _ in range(self.height):
            v = _exp_saturating(v)
        return v

    def origin(self, p, n):
        return self._origins()[-1]

    def deviations(self, m, p, n):
        d = self.base.values(m, p, n)
        for o in self._origins()[1:]:
            with np.errstate(over="ignore", invalid="ignore"):
                d = np.where(d > LOG_OVERFLOW, np.inf, o * np.expm1(np.minimum(d, LOG_OVERFLOW)))
        return d

    def deviation_bound(self, m, p, n):
        return float(self.deviations([m], p, n)[0])

    def type_info(self, p, n):
        # exp(y) >= y**k / k!, and the base dominates c * x**a for x >= 1
        terms = [(c, a) for c, a in zip(self.base.coefficients, self.base.exponents) if c > 0]
        consts = {}
        for beta in TYPE2_LADDER:
            best = 0.0
            for c, a in terms:
                k = max(1, math.ceil(beta / a))
                best = max(best, min(1.0, c ** k / math.factorial(k)))
            consts[str(beta)] = best
        return {"tag": 2, "constants": consts}

    def params(self):
        return {"height": self.height}

    def to_json(self):
        return {"kind": self.kind, "params": self.params(), "children": [self.base.to_json()]}

    def validate(self, p, n):
        self.base.validate(p, n)
        if any(a != int(a) for a in self.base.exponents):
            raise ValueError("ExpTower base exponents must be positive integers")


# -- symbol container -------------------------------------------------------
class Symbol(Multiplier):
    """A radial symbol on Q_p^n with optional declared type constants.

    ``strict=False`` skips the sign and monotonicity constraints so that an
    invalid symbol can still be loaded and refuted by the definiteness test.
    """

    def __init__(self, expr: Node, p: int, n: int = 1, declared_type: dict | None = None,
                 strict: bool = True, normalization: float = 1.0):
        self.expr = expr
        self.p = int(p)
        self.n = int(n)
        self.declared_type = declared_type
        self.strict = strict
        self.normalization = normalization
        if strict:
            expr.validate(self.p, self.n)

    def __repr__(self):
        return f"Symbol({self.expr!r}, p={self.p}, n={self.n})"

    # Multiplier protocol
    def values(self, m):
        return self.expr.values(m, self.p, self.n)

    @property
    def origin(self):
        return self.expr.origin(self.p, self.n)

    def deviations(self, m):
        return self.expr.deviations(m, self.p, self.n)

    def deviation_bound(self, m):
        return self.expr.deviation_bound(m, self.p, self.n)

    @property
    def sup_bound(self):
        info = self.type_info()
        return info["constants"]["C"] if info["tag"] == 0 and self.strict else None

    @property
    def monotone(self):
        return self.expr.monotone

    def __call__(self, m):
        return eval_symbol(self, m)

    def type_info(self) -> dict:
        return self.expr.type_info(self.p, self.n)

    @property
    def type_tag(self) -> int:
        if self.declared_type is not None:
            return int(self.declared_type["tag"])
        return self.type_info()["tag"]

    def scaled(self, c: float) -> "Symbol":
        return Symbol(Sum((c,), (self.expr,)), self.p, self.n, strict=self.strict,
                      normalization=self.normalization * c)

    def to_json(self) -> dict:
        out = {"p": self.p, "n": self.n, **self.expr.to_json()}
        if self.declared_type is not None:
            out["declared_type"] = self.declared_type
        return out

    @classmethod
    def from_json(cls, obj: dict, strict: bool = True) -> "Symbol":
        if not isinstance(obj, dict) or "kind" not in obj:
            raise ValueError("symbol JSON must be an object with a 'kind'")
        p, n = int(obj["p"]), int(obj.get("n", 1))
        return cls(node_from_json(obj, p, n), p, n, obj.get("declared_type"), strict=strict)


def node_from_json(obj: dict, p: int, n: int) -> Node:
    kind = obj.get("kind")
    prm = obj.get("params", {}) or {}
    kids = [node_from_json(c, p, n) for c in obj.get("children", []) or []]
    if kind == "Const":
        return Const(float(prm["c"]))
    if kind == "PowerNorm":
        return PowerNorm(float(prm["b"]), float(prm["alpha"]))
    if kind == "PowerSeriesNorm":
        return PowerSeriesNorm(tuple(prm["coefficients"]), tuple(prm["exponents"]))
    if kind == "OneMinusJHat":
        J = prm["J"]
        J = dict(J, p=J.get("p", p), n=J.get("n", n))
        return OneMinusJHat(RadialFunction.from_json(J))
    if kind == "Sum":
        return Sum(tuple(prm.get("weights", [1.0] * len(kids))), tuple(kids))
    if kind == "ExpTower":
        if len(kids) != 1:
            raise ValueError("ExpTower takes exactly one child")
        return ExpTower(kids[0], int(prm["height"]))
    raise ValueError(f"unknown symbol kind {kind!r}")


def taibleson(beta: float, p: int, n: int = 1, b: float = 1.0) -> Symbol:
    """The symbol ``b ||xi||**beta`` of the Taibleson operator."""
    return Symbol(PowerNorm(b, beta), p, n)


def eval_symbol(psi: Symbol, m) -> float:
    """Value at ``||xi|| = p**m``; ``m = ORIGIN`` gives the value at zero.

    Overflow saturates to ``inf``.
    """
    if m == ORIGIN or m is None:
        return psi.origin
    return float(psi.values([int(m)])[0])


def eval_at(psi, x):
    """Evaluate a symbol (or any shell function) at a p-adic vector."""
    k = shell_of(x)
    if isinstance(psi, Symbol):
        return eval_symbol(psi, k)
    if isinstance(psi, RadialFunction):
        return psi.at(k)
    return psi(k)


# -- definiteness ------------------------------------------------------------
@dataclass
class DefinitenessReport:
    kind: str
    points: list
    min_eigenvalue: float
    matrix_norm: float
    tolerance: float
    verdict: str
    witness: dict | None = None

    @property
    def certified(self) -> bool:
        return self.verdict == "certified-on-samples"

    def to_json(self) -> dict:
        return {"kind": self.kind, "verdict": self.verdict,
                "min_eigenvalue": self.min_eigenvalue, "matrix_norm": self.matrix_norm,
                "tolerance": self.tolerance,
                "points": [x.to_json() for x in self.points],
                "witness": self.witness}


def _psd_report(kind, M, points, rtol, quad_sign=1.0):
    if not np.all(np.isfinite(M)):
        return DefinitenessReport(kind, points, math.nan, math.inf, math.nan, "inconclusive",
                                  {"reason": "symbol overflow on the sample"})
    H = 0.5 * (M + M.conj().T)
    w, V = np.linalg.eigh(H)
    norm = float(np.max(np.abs(w))) if w.size else 0.0
    tol = rtol * norm
    lam = float(w[0])
    if lam >= -tol:
        return DefinitenessReport(kind, points, lam, norm, tol, "certified-on-samples")
    c = V[:, 0]
    q = float(np.real(np.conj(c) @ M @ c))
    witness = {"coefficients_re": c.real.tolist(), "coefficients_im": np.imag(c).tolist(),
               "quadratic_form": quad_sign * q,
               "points": [x.to_json() for x in points]}
    return DefinitenessReport(kind, points, lam, norm, tol, "refuted", witness)


def negative_definite_test(psi, points, rtol: float = 1e-9) -> DefinitenessReport:
    """Finite-sample test of negative definiteness.

    The matrix ``psi(x_i) + conj(psi(x_j)) - psi(x_i - x_j)`` must be positive
    semidefinite.  ``psi`` may be a :class:`Symbol` or any function of the
    shell index.
    """
    points = list(points)
    if len(points) < 1:
        raise ValueError("need at least one point")
    m = len(points)
    vals = np.array([eval_at(psi, x) for x in points], dtype=complex)
    A = np.empty((m, m), dtype=complex)
    with np.errstate(invalid="ignore"):
        for i in range(m):
            for j in range(m):
                A[i, j] = vals[i] + np.conj(vals[j]) - eval_at(psi, points[i] - points[j])
    return _psd_report("negative", A, points, rtol)


def positive_definite_test(phi, points, rtol: float = 1e-9) -> DefinitenessReport:
    """Finite-sample test that ``phi(x_i - x_j)`` is positive semidefinite."""
    points = list(points)
    if not points:
        raise ValueError("need at least one point")
    m = len(points)
    P = np.empty((m, m), dtype=complex)
    for i in range(m):
        for j in range(m):
            P[i, j] = eval_at(phi, points[i] - points[j])
    return _psd_report("positive", P, points, rtol)


def heat_multiplier_function(psi: Symbol, t: float):
    """``m -> exp(-t psi(p**m))`` with ``exp(-inf) = 0``."""
    def phi(m):
        v = eval_symbol(psi, m)
        return 0.0 if v == math.inf else math.exp(-t * v)
    return phi


def random_points(p: int, n: int, size: int, rng, vmin: int = -3, vmax: int = 3,
                  digits: int = 6, zero_prob: float = 0.1) -> list:
    """Random points of Q_p^n with component valuations in ``[vmin, vmax]``."""
    pts = []
    for _ in range(size):
        comps = []
        for _ in range(n):
            if rng.random() < zero_prob:
                comps.append(PAdicScalar.zero(p))
                continue
            v = int(rng.integers(vmin, vmax + 1))
            ds = [int(rng.integers(1, p))] + [int(d) for d in rng.integers(0, p, size=digits - 1)]
            comps.append(PAdicScalar(p=p, v=v, digits=tuple(ds)))
        pts.append(PAdicVector(tuple(comps)))
    return pts


# -- type classes --------------------------------------------------------------
@dataclass
class TypeReport:
    tag: int
    constants: dict
    window: tuple
    ok: bool
    offending_shell: int | float | None = None
    detail: str = ""

    def to_json(self) -> dict:
        return {"tag": self.tag, "constants": self.constants, "window": list(self.window),
                "ok": self.ok, "offending_shell": self.offending_shell, "detail": self.detail}


def classify_type(psi: Symbol, window=DEFAULT_CHECK_WINDOW, ladder=TYPE2_LADDER,
                  rtol: float = 1e-12) -> TypeReport:
    """Check the type inequality of the declared (or derived) type on every shell
    of ``window`` and at the origin."""
    info = psi.declared_type if psi.declared_type is not None else psi.type_info()
    tag, consts = int(info["tag"]), dict(info.get("constants", {}))
    lo, hi = window
    ms = np.arange(lo, hi + 1)
    with np.errstate(over="ignore", invalid="ignore"):
        a = np.abs(psi.values(ms))
    a0 = abs(psi.origin)
    x = np.maximum(1.0, np.exp(ms * math.log(psi.p)))     # max{1, ||xi||}
    big = np.maximum(1.0, a)
    shells = list(ms) + [ORIGIN]
    lhs_all = np.concatenate([a, [a0]])

    def first_bad(mask):
        idx = np.flatnonzero(mask)
        return None if idx.size == 0 else shells[idx[0]]

    if tag == 0:
        C = float(consts["C"])
        bad = first_bad(lhs_all > C * (1 + rtol))
        return TypeReport(0, consts, window, bad is None, bad,
                          "" if bad is None else f"|psi| exceeds C={C}")
    if tag == 1:
        C0, C1 = float(consts["C0"]), float(consts["C1"])
        b0, b1 = float(consts["beta0"]), float(consts["beta1"])
        if not (C0 > 0 and C1 > 0 and 0 < b0 <= b1):
            return TypeReport(1, consts, window, False, None, "type-1 constants out of range")
        with np.errstate(over="ignore", invalid="ignore"):
            low = C0 * x ** b0 > big * (1 + rtol)
            up = big > C1 * x ** b1 * (1 + rtol)
        big0 = max(1.0, a0)
        bad = first_bad(np.concatenate([low | up, [C0 > big0 * (1 + rtol) or big0 > C1 * (1 + rtol)]]))
        return TypeReport(1, consts, window, bad is None, bad,
                          "" if bad is None else "type-1 bounds violated")
    if tag == 2:
        for beta in ladder:
            C = float(consts.get(str(beta), consts.get(beta, 0.0)))
            if not C > 0:
                return TypeReport(2, consts, window, False, None, f"no positive constant for beta={beta}")
            with np.errstate(over="ignore", invalid="ignore"):
                bad_mask = ~(big * (1 + rtol) > C * x ** beta)
            bad = first_bad(np.concatenate([bad_mask, [not max(1.0, a0) * (1 + rtol) > C]]))
            if bad is not None:
                return TypeReport(2, consts, window, False, bad, f"lower bound fails for beta={beta}")
        return TypeReport(2, consts, window, True)
    raise ValueError(f"unknown type tag {tag}")


def check_shape(psi: Symbol, window=DEFAULT_CHECK_WINDOW, tol: float = 1e-12) -> list:
    """Shell-wise violations of ``psi >= psi(0) >= 0`` and, for monotone
    constructors, of monotonicity."""
    lo, hi = window
    ms = np.arange(lo, hi + 1)
    v = psi.values(ms)
    d = psi.deviations(ms)
    o = psi.origin
    problems = []
    if o < -tol:
        problems.append({"shell": "origin", "issue": "negative value at the origin", "value": o})
    for m, val, dv in zip(ms, v, d):
        if not np.isnan(val) and dv < -tol * max(1.0, abs(o)):
            problems.append({"shell": int(m), "issue": "value below the origin value", "value": float(val)})
    if psi.monotone:
        with np.errstate(invalid="ignore"):
            steps = np.diff(d)
        for m, s in zip(ms[1:], steps):
            if s < -tol * max(1.0, abs(o)):
                problems.append({"shell": int(m), "issue": "decrease along shells", "value": float(s)})
    return problems


def normalize_condition_psi(psi: Symbol, window_low: int = -64) -> Symbol:
    """Scale ``psi`` so that its sup over ``Z_p^n`` lies in ``(0, 1]``.

    The returned symbol records the factor in ``normalization``.
    """
    ms = np.arange(window_low, 1)
    sup = float(max(np.max(np.abs(psi.values(ms))), abs(psi.origin)))
    if not sup > 0:
        raise ValueError("symbol vanishes on Z_p^n and cannot be normalized")
    if not math.isfinite(sup):
        raise ValueError("symbol is unbounded on Z_p^n")
    if sup <= 1.0:
        return psi
    return psi.scaled(1.0 / sup)
