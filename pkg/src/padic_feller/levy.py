"""Monte Carlo for the Levy process whose increment law over time t is Z_t dx.

Increments are drawn in two stages: a shell from the shell masses of Z_t,
then a uniform point of that sphere by rejection from the ball.  Random
numbers come from Philox streams keyed by ``(seed, stream, block)``, and
draws are produced in fixed blocks, so results do not depend on how many
worker threads are used.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy import stats

from .padic import DEFAULT_PRECISION, PAdicScalar, PAdicVector, shell_of
from .radial import ball_volumes
from .semigroup import HeatKernel, heat_kernel

BLOCK = 4096
CLIP_VALUE_TOL = 1e-10
CLIP_TOTAL_TOL = 1e-6
#: category index used for draws from the ball below the kernel's window
RESIDUAL = None


class KernelRejected(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class ShellMeasure:
    """Probability of each sphere ``S_k`` for ``k`` in ``[k_min, k_max]``
    plus the mass ``residual`` of the ball ``B_{k_min - 1}``."""

    p: int
    n: int
    k_min: int
    masses: np.ndarray
    residual: float
    clip_total: float = 0.0
    t: float | None = None

    @property
    def k_max(self) -> int:
        return self.k_min + len(self.masses) - 1

    @property
    def shells(self) -> np.ndarray:
        return np.arange(self.k_min, self.k_max + 1)

    @property
    def probabilities(self) -> np.ndarray:
        """Residual first, then the shells in increasing order."""
        return np.concatenate([[self.residual], self.masses])

    def mass_within(self, k0: int) -> float:
        """Probability of ``||X|| <= p**k0``."""
        if k0 < self.k_min - 1:
            raise ValueError("k0 lies inside the residual ball")
        return float(self.residual + np.sum(self.masses[: k0 - self.k_min + 1]))

    def mode(self) -> int:
        return int(self.shells[np.argmax(self.masses)])

    def to_json(self) -> dict:
        return {"p": self.p, "n": self.n, "k_min": self.k_min, "masses": self.masses.tolist(),
                "residual": self.residual, "clip_total": self.clip_total, "t": self.t}


def shell_masses(Z: HeatKernel, mass_tol: float = 1e-9) -> ShellMeasure:
    """Masses ``Z(p**k) vol(S_k)``; small negative values are clipped and the
    measure renormalized."""
    if abs(Z.mass - 1.0) > mass_tol:
        raise KernelRejected(f"kernel mass {Z.mass!r} is not 1; the process is not conservative")
    R = Z.Z
    vals = np.real(np.asarray(R.values))
    inner = float(np.real(R.inner))
    raw = np.concatenate([[inner * float(ball_volumes(R.p, R.n, [R.k_min - 1])[0])],
                          vals * R.volumes])
    neg = raw < 0
    clip_total = float(-np.sum(raw[neg]))
    if clip_total > CLIP_TOTAL_TOL:
        raise KernelRejected(f"negative kernel mass {clip_total:.3g} exceeds {CLIP_TOTAL_TOL}")
    raw = np.where(neg, 0.0, raw)
    raw = raw / raw.sum()
    return ShellMeasure(R.p, R.n, R.k_min, raw[1:], float(raw[0]), clip_total, Z.t)


# -- random streams -----------------------------------------------------------------
def block_rng(seed: int, stream: int, block: int) -> np.random.Generator:
    ss = np.random.SeedSequence(entropy=int(seed), spawn_key=(int(stream), int(block)))
    return np.random.Generator(np.random.Philox(ss))


@dataclass
class IncrementBatch:
    """Sampled increments as shell indices plus digit arrays.

    ``shells[i]`` is the sampled category (``k_min - 1`` marks the residual
    ball) and ``digits[i, c, :]`` the digits of component ``c`` at valuation
    ``-shells[i]``.  ``attempts`` counts ball draws made by the rejection step.
    """

    p: int
    n: int
    shells: np.ndarray
    digits: np.ndarray
    attempts: int
    accepted: int

    def __len__(self):
        return len(self.shells)

    def norm_shells(self) -> np.ndarray:
        """Exact shell index of each increment (``-inf`` for zero)."""
        nz = self.digits != 0                                   # (N, n, L)
        any_nz = nz.any(axis=1)                                 # (N, L)
        first = np.where(any_nz.any(axis=1), np.argmax(any_nz, axis=1), -1)
        out = np.where(first >= 0, self.shells - first, -np.inf)
        return out.astype(float)

    def vector(self, i: int) -> PAdicVector:
        v = -int(self.shells[i])
        comps = tuple(PAdicScalar.from_digits(self.p, v, self.digits[i, c].tolist(),
                                              precision=self.digits.shape[2])
                      for c in range(self.n))
        return PAdicVector(comps)

    @property
    def acceptance_rate(self) -> float:
        return self.accepted / self.attempts if self.attempts else math.nan


def _sample_block(mu: ShellMeasure, size: int, rng: np.random.Generator, L: int):
    p, n = mu.p, mu.n
    cdf = np.cumsum(mu.probabilities)
    cdf[-1] = 1.0
    cat = np.searchsorted(cdf, rng.random(size), side="right")
    cat = np.minimum(cat, len(cdf) - 1)
    shells = np.where(cat == 0, mu.k_min - 1, mu.k_min + cat - 1)
    digits = rng.integers(0, p, size=(size, n, L), dtype=np.int16)
    attempts = size
    # rejection: a sphere draw with all leading digits zero fell into B_{k-1}
    on_shell = cat > 0
    bad = on_shell & ~(digits[:, :, 0] != 0).any(axis=1)
    accepted = int(np.sum(on_shell & ~bad))
    shell_attempts = int(np.sum(on_shell))
    while bad.any():
        idx = np.flatnonzero(bad)
        digits[idx] = rng.integers(0, p, size=(idx.size, n, L), dtype=np.int16)
        shell_attempts += idx.size
        attempts += idx.size
        still = ~(digits[idx, :, 0] != 0).any(axis=1)
        accepted += int(np.sum(~still))
        bad[idx] = still
    return shells, digits, shell_attempts, accepted


def sample_increments(mu: ShellMeasure, N: int, seed: int, stream: int = 0,
                      L: int = DEFAULT_PRECISION, workers: int = 1) -> IncrementBatch:
    """``N`` independent increments; identical for any ``workers``."""
    if N < 0:
        raise ValueError("N must be nonnegative")
    blocks = [(b, min(BLOCK, N - b * BLOCK)) for b in range((N + BLOCK - 1) // BLOCK)]

    def run(spec):
        b, size = spec
        return _sample_block(mu, size, block_rng(seed, stream, b), L)

    if workers > 1 and len(blocks) > 1:
        with ThreadPoolExecutor(max_workers=workers) as ex:
            parts = list(ex.map(run, blocks))
    else:
        parts = [run(b) for b in blocks]
    if not parts:
        return IncrementBatch(mu.p, mu.n, np.zeros(0, dtype=int),
                              np.zeros((0, mu.n, L), dtype=np.int16), 0, 0)
    return IncrementBatch(mu.p, mu.n, np.concatenate([q[0] for q in parts]),
                          np.concatenate([q[1] for q in parts]),
                          sum(q[2] for q in parts), sum(q[3] for q in parts))


def sample_increment(mu: ShellMeasure, rng: np.random.Generator,
                     L: int = DEFAULT_PRECISION) -> PAdicVector:
    shells, digits, att, acc = _sample_block(mu, 1, rng, L)
    return IncrementBatch(mu.p, mu.n, shells, digits, att, acc).vector(0)


# -- paths ------------------------------------------------------------------------
@dataclass
class PathSample:
    seed: int
    path_id: int
    times: np.ndarray
    increments: list = field(default_factory=list)
    positions: list = field(default_factory=list)

    def records(self) -> list:
        """One record per step: time, order, leading digits and norm of the position."""
        out = []
        for t, x in zip(self.times, self.positions):
            k = shell_of(x)
            if k == -math.inf:
                out.append({"t": float(t), "ord": None, "leading_digits": [], "norm": 0.0,
                            "path": self.path_id})
                continue
            lead = []
            for c in x.components:
                lead.append(0 if c.is_zero or c.v != -k else int(c.digits[0]))
            out.append({"t": float(t), "ord": int(-k), "leading_digits": lead,
                        "norm": float(x.p) ** k, "path": self.path_id})
        return out


def _check_grid(times) -> np.ndarray:
    times = np.asarray(times, dtype=float)
    if times.ndim != 1 or times.size < 2 or times[0] != 0 or np.any(np.diff(times) <= 0):
        raise ValueError("time grid must start at 0 and increase strictly")
    return times


def simulate_paths(op, times, n_paths: int, seed: int, L: int = DEFAULT_PRECISION,
                   workers: int = 1, eps: float = 1e-12) -> list:
    """``n_paths`` paths with ``X_0 = 0`` on the grid ``times``."""
    times = _check_grid(times)
    p, n = op.p, op.n
    zero = PAdicVector(tuple(PAdicScalar.zero(p) for _ in range(n)))
    paths = [PathSample(seed, i, times, [], [zero]) for i in range(n_paths)]
    measures = {}
    for step, dt in enumerate(np.diff(times)):
        key = round(float(dt), 15)
        if key not in measures:
            measures[key] = shell_masses(heat_kernel(op, float(dt), eps))
        batch = sample_increments(measures[key], n_paths, seed, stream=step, L=L, workers=workers)
        for i, path in enumerate(paths):
            inc = batch.vector(i)
            path.increments.append(inc)
            path.positions.append(path.positions[-1] + inc)
    return paths


def simulate_path(op, times, seed: int, L: int = DEFAULT_PRECISION) -> PathSample:
    return simulate_paths(op, times, 1, seed, L)[0]


# -- statistics -------------------------------------------------------------------------
def shell_histogram(batch: IncrementBatch, mu: ShellMeasure) -> np.ndarray:
    """Empirical frequencies in the categories of ``mu`` (residual first)."""
    cat = np.asarray(batch.shells) - mu.k_min + 1
    counts = np.bincount(cat, minlength=len(mu.masses) + 1)
    return counts / max(len(batch), 1)


def tv_distance(p1, p2) -> float:
    return 0.5 * float(np.sum(np.abs(np.asarray(p1) - np.asarray(p2))))


def norm_histogram(norm_shells, lo: int, hi: int) -> np.ndarray:
    """Frequencies of ``k <= lo``, each ``k`` in ``(lo, hi)``, and ``k >= hi``."""
    k = np.clip(np.asarray(norm_shells, dtype=float), lo, hi)
    counts = np.bincount((k - lo).astype(int), minlength=hi - lo + 1)
    return counts / max(len(k), 1)


def leading_digit_test(batch: IncrementBatch, k: int) -> dict:
    """Chi-square test that leading-digit vectors on shell ``k`` are uniform over
    the ``p**n - 1`` nonzero patterns."""
    p, n = batch.p, batch.n
    sel = batch.shells == k
    lead = batch.digits[sel][:, :, 0].astype(int)
    codes = lead @ (p ** np.arange(n))
    counts = np.bincount(codes, minlength=p ** n)[1:]
    res = stats.chisquare(counts)
    return {"shell": k, "draws": int(sel.sum()), "chi2": float(res.statistic),
            "p_value": float(res.pvalue), "patterns": p ** n - 1,
            "zero_pattern_draws": int(np.sum(codes == 0))}


def empirical_vs_analytic(op, t: float, N: int = 100_000, seed: int = 0, workers: int = 1,
                          small_ts=(1.0, 0.1, 0.01), k0: int = 0,
                          L: int = DEFAULT_PRECISION) -> dict:
    """TV distance of the sampled shell histogram from the analytic masses,
    and the mass of ``||x|| <= p**k0`` for decreasing times."""
    if N < 10_000:
        raise ValueError("N must be at least 10^4")
    mu = shell_masses(heat_kernel(op, t))
    batch = sample_increments(mu, N, seed, workers=workers, L=L)
    emp = shell_histogram(batch, mu)
    tv = tv_distance(emp, mu.probabilities)
    occupied = int(np.sum(mu.probabilities * N >= 1))
    conc = [{"t": s, "mass_within": shell_masses(heat_kernel(op, s)).mass_within(k0)}
            for s in small_ts]
    return {"t": t, "N": N, "tv": tv, "tv_bound": 3 * math.sqrt(occupied / N),
            "occupied_shells": occupied, "acceptance_rate": batch.acceptance_rate,
            "expected_acceptance": 1 - float(op.p) ** (-op.n), "concentration": conc, "k0": k0}
