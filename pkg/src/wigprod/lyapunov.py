"""Lyapunov exponents of Wigner-matrix products and their Gaussian closed form.

Finite-M exponents come from the QR (Benettin) scheme: an orthonormal frame is
pushed through the product one factor at a time and the logs of the diagonal
of ``R`` are accumulated, so nothing of size ``exp(2 M mu)`` is ever formed.
The QR growth rates equal ``log(lambda_j) / (2M)`` only as ``M -> oo``; for
Ginibre factors the per-step diagonal of ``R`` is exactly i.i.d. (unitary
invariance), so the estimator has no transient bias there.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .asymptotics import find_zeros
from .sampling import WORDS_PER_ENTRY, EnsembleSpec, stream_words

__all__ = [
    "LyapunovBreakdown",
    "LyapunovRun",
    "digamma",
    "gaussian_lyapunov",
    "incremental_exponents",
    "lyapunov_run",
    "qr_exponents",
    "compare_zeros_vs_lyapunov",
]

EULER_GAMMA = 0.57721566490153286060651209008240243

# Bernoulli-number coefficients B_{2k} / (2k) of the asymptotic digamma series
_DIGAMMA_SERIES = (
    1.0 / 12.0,
    -1.0 / 120.0,
    1.0 / 252.0,
    -1.0 / 240.0,
    1.0 / 132.0,
    -691.0 / 32760.0,
    1.0 / 12.0,
)

REPS_PER_TASK = 8
STEPS_PER_DRAW = 512


class LyapunovBreakdown(ArithmeticError):
    """A diagonal entry of ``R`` vanished: the factor matrices are degenerate."""


def digamma(x: float) -> float:
    """``Psi(x)`` for ``x > 0``: upward recurrence to ``x >= 8``, then the asymptotic series."""
    x = float(x)
    if not x > 0 or math.isinf(x):
        raise ValueError(f"digamma is implemented for finite x > 0, got {x}")
    shift = 0.0
    while x < 8.0:
        shift -= 1.0 / x
        x += 1.0
    inv2 = 1.0 / (x * x)
    series = 0.0
    p = inv2
    for c in _DIGAMMA_SERIES:
        series += c * p
        p *= inv2
    return shift + math.log(x) - 0.5 / x - series


def gaussian_lyapunov(N: int, beta: int, sigma: float = 1.0) -> list[float]:
    """Lyapunov exponents of real (``beta=1``) or complex (``beta=2``) Ginibre products, increasing."""
    if beta not in (1, 2):
        raise ValueError("beta must be 1 or 2")
    if not sigma > 0:
        raise ValueError("sigma must be positive")
    shift = math.log(2.0 * sigma**2 / beta)
    return [0.5 * (digamma(beta * j / 2.0) + shift) for j in range(1, N + 1)]


def _factor_stream(spec: EnsembleSpec, seed: int, rep: int, start: int, count: int) -> np.ndarray:
    # factors start .. start+count-1 of repetition `rep`, shape (count, N, N)
    N = spec.N
    dist = spec.dists[0]
    w = stream_words(seed, start, count, N * N * WORDS_PER_ENTRY, stream=rep + 1)
    return dist.transform(w.reshape(count, N, N, WORDS_PER_ENTRY))


def qr_exponents(factors: np.ndarray) -> np.ndarray:
    """Benettin growth rates of a stack ``(R, M, N, N)`` of factor chains.

    Returns ``(R, N)`` rates in the order produced by QR (decreasing in
    expectation). ``R`` is kept with a positive diagonal.
    """
    factors = np.asarray(factors)
    reps, M, N, _ = factors.shape
    Q = np.broadcast_to(np.eye(N, dtype=np.result_type(factors.dtype, float)), (reps, N, N)).copy()
    acc = np.zeros((reps, N))
    for k in range(M):
        Q = _qr_step(Q, factors[:, k], acc, k)
    return acc / M


def _qr_step(Q: np.ndarray, X: np.ndarray, acc: np.ndarray, step: int) -> np.ndarray:
    # one Benettin step on a stack of frames; accumulates log|R_jj| into acc in place
    Qn, R = np.linalg.qr(X @ Q)
    d = np.diagonal(R, axis1=-2, axis2=-1)
    mag = np.abs(d)
    if np.any(mag == 0):
        raise LyapunovBreakdown(f"R has a zero diagonal entry at step {step}")
    acc += np.log(mag)
    return Qn * (d / mag)[:, None, :]


def _run_group(spec: EnsembleSpec, M_steps: int, seed: int, reps: list[int]) -> np.ndarray:
    N = spec.N
    dist = spec.dists[0]
    dtype = complex if dist.is_complex else float
    Q = np.broadcast_to(np.eye(N, dtype=dtype), (len(reps), N, N)).copy()
    acc = np.zeros((len(reps), N))
    for start in range(0, M_steps, STEPS_PER_DRAW):
        count = min(STEPS_PER_DRAW, M_steps - start)
        X = np.stack([_factor_stream(spec, seed, r, start, count) for r in reps])
        if N == 1:
            # a 1x1 QR step is just |x|
            mag = np.abs(X[:, :, 0, 0])
            if np.any(mag == 0):
                raise LyapunovBreakdown(f"zero factor within steps {start}..{start + count - 1}")
            acc[:, 0] += np.log(mag).sum(axis=1)
            continue
        for k in range(count):
            Q = _qr_step(Q, X[:, k], acc, start + k)
    return np.sort(acc / M_steps, axis=1)


def incremental_exponents(spec: EnsembleSpec, M_steps: int, seed: int, rep: int = 0) -> np.ndarray:
    """Finite-``M`` exponent estimates of one repetition, reported increasingly."""
    _check_spec(spec, M_steps)
    return _run_group(spec, M_steps, seed, [rep])[0]


def _check_spec(spec: EnsembleSpec, M_steps: int) -> None:
    if M_steps < 1:
        raise ValueError("M_steps must be positive")
    if spec.hermitian_single:
        raise ValueError("Lyapunov runs need a product ensemble")
    if len(set(spec.dists)) != 1:
        raise ValueError("Lyapunov runs use one entry law for every factor")


@dataclass
class LyapunovRun:
    spec: EnsembleSpec
    M_steps: int
    reps: int
    seed: int
    per_rep: np.ndarray  # (reps, N), each row increasing
    notes: list[str] = field(default_factory=list)

    @property
    def mean(self) -> np.ndarray:
        return self.per_rep.mean(axis=0)

    @property
    def se(self) -> np.ndarray:
        if self.reps < 2:
            return np.full(self.spec.N, np.nan)
        return self.per_rep.std(axis=0, ddof=1) / math.sqrt(self.reps)

    def z_scores(self, reference) -> np.ndarray:
        return (self.mean - np.asarray(reference)) / self.se

    def to_dict(self) -> dict:
        return {
            "spec": self.spec.to_dict(),
            "M_steps": self.M_steps,
            "reps": self.reps,
            "seed": self.seed,
            "mean": self.mean.tolist(),
            "se": self.se.tolist(),
            "notes": list(self.notes),
        }


def lyapunov_run(spec: EnsembleSpec, M_steps: int, reps: int, seed: int, workers: int = 1) -> LyapunovRun:
    """``reps`` independent QR runs; repetition ``r`` uses its own counter stream.

    Repetitions are grouped in fixed blocks of ``REPS_PER_TASK`` regardless of
    ``workers``, so the result is bit-identical for any worker count.
    """
    _check_spec(spec, M_steps)
    if reps < 1:
        raise ValueError("reps must be positive")
    groups = [list(range(s, min(s + REPS_PER_TASK, reps))) for s in range(0, reps, REPS_PER_TASK)]

    def work(g):
        return _run_group(spec, M_steps, seed, g)

    if workers <= 1:
        parts = [work(g) for g in groups]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(work, groups))
    return LyapunovRun(spec, M_steps, reps, seed, np.concatenate(parts))


def compare_zeros_vs_lyapunov(N: int, M: int, beta: int, sigma: float = 1.0,
                              run: LyapunovRun | None = None) -> list[dict]:
    """Per-``j`` table of rescaled zeros against the Gaussian Lyapunov exponents.

    ``diff`` is the limiting rescaled zero ``log(j)/2 + log(sigma)`` minus the
    closed-form exponent; ``bound`` is ``1/(2j)``.
    """
    zs = find_zeros(N, M, sigma)
    mu = gaussian_lyapunov(N, beta, sigma)
    rows = []
    for j in range(1, N + 1):
        limit = 0.5 * math.log(j) + math.log(sigma)
        rows.append({
            "j": j,
            "rescaled_zero_finiteM": zs.rescaled[j - 1],
            "rescaled_zero_limit": limit,
            "mu_closed_form": mu[j - 1],
            "mu_estimated": float(run.mean[j - 1]) if run is not None else None,
            "se": float(run.se[j - 1]) if run is not None else None,
            "diff": limit - mu[j - 1],
            "bound": 1.0 / (2 * j),
        })
    return rows
