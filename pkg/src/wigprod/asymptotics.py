"""Zeros of the averaged polynomials and their large-M behaviour.

Zeros of ``tau**(2N) p_N^(M)(x / tau**2)`` are located in the variable
``y = log(x / tau**2) / (2M)``, where they stay within ``[0, log(N)/2 + O(1/M)]``
for every ``M`` and the evaluation never overflows.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .closedform import LogPhaseValue, product_charpoly_coeffs, rescaled_P_eval, tau_of

__all__ = [
    "BracketError",
    "ZeroSet",
    "RingDomain",
    "Prop2Report",
    "ComplexZeroSummary",
    "find_zeros",
    "refined_zero_prediction",
    "refined_zero_offset",
    "nu_of",
    "check_prop1",
    "prop1_sample_points",
    "check_prop2",
    "prop2_grid",
    "complex_zeros",
    "zeros_weak_limit_histogram",
]


_MAX_BISECT = 200


class BracketError(RuntimeError):
    """Fewer sign changes than zeros: the evaluation lost precision."""


def _sigmas(M: int, sigmas) -> list[float]:
    if sigmas is None:
        return [1.0] * M
    if np.isscalar(sigmas):
        return [float(sigmas)] * M
    sig = [float(s) for s in sigmas]
    if len(sig) != M:
        raise ValueError(f"expected {M} sigmas, got {len(sig)}")
    return sig


@dataclass
class ZeroSet:
    """Ordered zeros ``z_1 <= ... <= z_N``, stored as ``log z_j``."""

    N: int
    M: int
    sigmas: list[float]
    log_zeros: list[float]

    def __post_init__(self):
        if len(self.log_zeros) != self.N:
            raise ValueError("ZeroSet needs exactly N zeros")
        if any(b <= a for a, b in zip(self.log_zeros, self.log_zeros[1:])):
            raise ValueError("zeros must be simple and increasing")

    @property
    def zeros(self) -> list[float]:
        # may overflow for large M; the log form is authoritative
        return [math.exp(v) if v < 709.0 else math.inf for v in self.log_zeros]

    @property
    def rescaled(self) -> list[float]:
        """``log(z_j) / (2M)``, the Lyapunov-scale zero locations."""
        return [v / (2 * self.M) for v in self.log_zeros]

    @property
    def tau(self) -> float:
        return tau_of(self.sigmas)

    def to_dict(self) -> dict:
        return {
            "N": self.N,
            "M": self.M,
            "sigmas": self.sigmas,
            "log_zeros": self.log_zeros,
            "rescaled": self.rescaled,
        }


def _log_coeffs(N: int, M: int) -> tuple[np.ndarray, np.ndarray]:
    cv = product_charpoly_coeffs(N, M)
    return np.array(cv.log_abs), np.array(cv.signs, dtype=float)


def _g_sign(logc: np.ndarray, signs: np.ndarray, M: int, y: float) -> int:
    # sign of sum_k c_k exp(2 M k y), via max-term scaling and exact-rounded summation
    k = np.arange(len(logc))
    ex = logc + 2.0 * M * k * y
    top = ex.max()
    total = math.fsum((signs * np.exp(ex - top)).tolist())
    return (total > 0) - (total < 0)


def _scan(logc, signs, M, lo, hi, points):
    ys = np.linspace(lo, hi, points)
    vals = [_g_sign(logc, signs, M, y) for y in ys]
    brackets = []
    for i in range(points - 1):
        if vals[i] != 0 and vals[i + 1] != 0 and vals[i] != vals[i + 1]:
            brackets.append((ys[i], ys[i + 1], vals[i]))
        elif vals[i + 1] == 0 and 0 < i + 1 < points - 1:
            brackets.append((ys[i + 1], ys[i + 1], 0))
    return brackets


def find_zeros(N: int, M: int, sigmas=None, tol: float = 0.0) -> ZeroSet:
    """All ``N`` positive zeros of the ``tau``-scaled average polynomial.

    Brackets come from a sign scan on ``y in [-1, log(N)/2 + 1]`` with ``64 N``
    points; the window is widened and the grid refined while fewer than ``N``
    sign changes are seen. Each bracket is bisected until its width is at most
    ``tol`` in ``y`` or the midpoint no longer splits it; the default bisects
    to floating-point resolution, since ``log z = 2 M y`` magnifies the width.
    """
    sig = _sigmas(M, sigmas)
    logc, signs = _log_coeffs(N, M)
    lo, hi = -1.0, 0.5 * math.log(N) + 1.0
    points = 64 * N
    for _ in range(12):
        brackets = _scan(logc, signs, M, lo, hi, points)
        if len(brackets) == N:
            break
        lo, hi, points = lo - 2.0, hi + 1.0, points * 2
    else:
        raise BracketError(f"found {len(brackets)} sign changes for N={N}, M={M}")
    ys = []
    for a, b, sa in brackets:
        for _ in range(_MAX_BISECT):
            if b - a <= tol or sa == 0:
                break
            mid = 0.5 * (a + b)
            if mid <= a or mid >= b:
                break
            sm = _g_sign(logc, signs, M, mid)
            if sm == 0:
                a = b = mid
            elif sm == sa:
                a = mid
            else:
                b = mid
        ys.append(0.5 * (a + b))
    two_log_tau = 2.0 * math.log(tau_of(sig))
    return ZeroSet(N, M, sig, [two_log_tau + 2.0 * M * y for y in ys])


def refined_zero_prediction(N: int, M: int, j: int, sigma: float = 1.0) -> float:
    """First-order-in-1/M location of ``log(z_j) / (2M)``."""
    if not 1 <= j <= N:
        raise ValueError(f"j={j} outside 1..{N}")
    return 0.5 * math.log(j) + math.log(j / (N + 1 - j)) / (2 * M) + math.log(sigma)


def refined_zero_offset(N: int, M: int, j: int, max_iter: int = 500) -> float:
    """``log(z_j)/(2M) - refined_zero_prediction`` for unit variances, to full relative precision.

    At the refined prediction the two terms ``k = j-1`` and ``k = j`` of the
    polynomial cancel exactly, so relative to the ``k = j`` term the zero
    condition reads ``exp(-2M d) = 1 + R(d)`` with ``R`` built from the other,
    exponentially smaller terms. The offset ``d`` is the fixed point of
    ``d = -log1p(R(d)) / (2M)``. When that iteration does not contract
    (small ``M``) the difference is taken from :func:`find_zeros` instead.
    """
    if not 1 <= j <= N:
        raise ValueError(f"j={j} outside 1..{N}")
    lj = math.log(j)
    corr = math.log(j / (N + 1 - j))
    ks, amp, sgn = [], [], []
    for k in range(N + 1):
        if k in (j - 1, j):
            continue
        # log |term_k / term_j| at the prediction
        a = (math.log(math.comb(N, k)) - math.log(math.comb(N, j))
             + M * (math.lgamma(j + 1) - math.lgamma(k + 1) + (k - j) * lj) + (k - j) * corr)
        ks.append(k - j)
        amp.append(a)
        sgn.append((-1) ** (k - j))
    if not ks:
        return 0.0
    ks_a, amp_a, sgn_a = np.array(ks, float), np.array(amp), np.array(sgn, float)
    d = 0.0
    for _ in range(max_iter):
        R = math.fsum((sgn_a * np.exp(amp_a + 2.0 * M * ks_a * d)).tolist())
        if R <= -1.0:
            break
        nd = -math.log1p(R) / (2 * M)
        if nd == d or abs(nd - d) <= 4 * np.finfo(float).eps * abs(nd):
            return nd
        d = nd
    # no contraction (small M): fall back to the bracketed zero
    return find_zeros(N, M).rescaled[j - 1] - refined_zero_prediction(N, M, j)


@dataclass(frozen=True)
class RingDomain:
    """Annulus ``j - eps < |z|^2 < j + eps`` around the ``j``-th limiting circle."""

    j: int
    epsilon: float
    N: int

    def __post_init__(self):
        if not 1 <= self.j <= self.N or not self.epsilon > 0:
            raise ValueError("need 1 <= j <= N and epsilon > 0")

    @property
    def q(self) -> float:
        return self.N / (self.N + self.epsilon)

    def contains(self, z: complex) -> bool:
        return self.j - self.epsilon < abs(z) ** 2 < self.j + self.epsilon


def nu_of(z: complex, N: int) -> int:
    """Index of the dominant term of ``P_N^(M)`` at ``z``."""
    a = abs(z) ** 2
    return N if a > N else int(math.floor(a))


def _log_P(N: int, M: int, z: complex) -> LogPhaseValue:
    return rescaled_P_eval(N, M, complex(z))


def check_prop1(N: int, M: int, epsilon: float, points: Iterable[complex]) -> float:
    """Max over ``points`` of ``|P(z) / dominant_term(z) - 1|``.

    Every point must lie outside all annuli ``j - eps < |z|^2 < j + eps``;
    compare the result against ``C * q**M`` with ``q = N / (N + eps)``.
    """
    pts = [complex(z) for z in points]
    for z in pts:
        for j in range(1, N + 1):
            if RingDomain(j, epsilon, N).contains(z):
                raise ValueError(f"point {z} lies in the excluded ring around |z|^2 = {j}")
    worst = 0.0
    for z in pts:
        nu = nu_of(z, N)
        val = _log_P(N, M, z)
        if z == 0:
            dev = abs(complex(val) - 1.0)
        else:
            s = z * z
            ls = complex(math.log(abs(s)), math.atan2(s.imag, s.real))
            log_dom = math.log(math.comb(N, nu)) + M * (nu * ls.real - math.lgamma(nu + 1))
            ph_dom = M * nu * ls.imag + math.pi * nu
            if val.is_zero:
                dev = 1.0
            else:
                ratio = complex(math.cos(val.phase - ph_dom), math.sin(val.phase - ph_dom))
                dev = abs(math.exp(val.log_magnitude - log_dom) * ratio - 1.0)
        worst = max(worst, dev)
    return worst


def prop1_sample_points(N: int, epsilon: float, per_region: int, seed: int = 0) -> dict[str, np.ndarray]:
    """Points in each region between the annuli: inner disc, the gaps, and the exterior.

    Squared moduli are evenly spaced over each closed region (boundaries
    included, which is where the decay is slowest); angles are random.
    """
    rng = np.random.default_rng(seed)
    regions = {"inner": (0.0, 1.0 - epsilon)}
    for nu in range(1, N):
        regions[f"gap{nu}"] = (nu + epsilon, nu + 1 - epsilon)
    regions["outer"] = (N + epsilon, N + epsilon + 2.0)
    out = {}
    for name, (a, b) in regions.items():
        # boundaries pulled in by 1e-9 so rounding cannot push a point into a ring
        r2 = np.linspace(a + 1e-9 if a > 0 else 0.0, b - 1e-9, per_region)
        theta = rng.uniform(0, 2 * np.pi, per_region)
        out[name] = np.sqrt(r2) * np.exp(1j * theta)
    return out


@dataclass
class Prop2Report:
    N: int
    nu: int
    M: int
    max_dev_finite: float
    max_dev_limit: float


def _local_normalised(N: int, nu: int, M: int, w: complex) -> complex:
    # P(sqrt(nu + w/M)) divided by the k = nu-1 term
    s = nu + w / M
    ls = complex(math.log(abs(s)), math.atan2(s.imag, s.real))
    val = _log_P(N, M, np.sqrt(complex(s)))
    log_pref = math.log(math.comb(N, nu - 1)) + M * ((nu - 1) * ls.real - math.lgamma(nu))
    ph_pref = M * (nu - 1) * ls.imag + math.pi * (nu - 1)
    if val.is_zero:
        return 0j
    return math.exp(val.log_magnitude - log_pref) * complex(math.cos(val.phase - ph_pref),
                                                           math.sin(val.phase - ph_pref))


def check_prop2(N: int, nu: int, M: int, w_grid: Iterable[complex]) -> Prop2Report:
    """Local behaviour of ``P_N^(M)`` near ``sqrt(nu)``.

    Reports the max deviation of the normalised value from
    ``1 - ((N+1-nu)/nu) (1 + w/(nu M))**M`` and from its ``M -> oo`` limit
    ``1 - ((N+1-nu)/nu) exp(w/nu)``.
    """
    if not 1 <= nu <= N:
        raise ValueError(f"nu={nu} outside 1..{N}")
    c = (N + 1 - nu) / nu
    dev_f = dev_l = 0.0
    for w in w_grid:
        w = complex(w)
        F = _local_normalised(N, nu, M, w)
        dev_f = max(dev_f, abs(F - (1 - c * (1 + w / (nu * M)) ** M)))
        dev_l = max(dev_l, abs(F - (1 - c * np.exp(w / nu))))
    return Prop2Report(N, nu, M, dev_f, dev_l)


def prop2_grid(radius: float = 3.0, n_radii: int = 11, n_angles: int = 11) -> np.ndarray:
    """Polar grid of ``n_radii * n_angles`` points in the closed disc ``|w| <= radius``."""
    r = np.linspace(0.0, radius, n_radii)
    t = 2 * np.pi * np.arange(n_angles) / n_angles
    return (r[:, None] * np.exp(1j * t[None, :])).ravel()


def complex_zeros(zs: ZeroSet) -> np.ndarray:
    """All ``2NM`` zeros of ``Q_N^(M)`` as an array ``(N, 2M)``.

    ``Q`` is a polynomial in ``w**(2M)`` whose roots are the positive zeros of
    the scaled average polynomial, so every such zero spawns ``2M`` equally
    spaced roots on one circle.
    """
    M = zs.M
    radii = np.exp(np.array(zs.log_zeros) / (2 * M))
    angles = np.pi * np.arange(2 * M) / M
    return radii[:, None] * np.exp(1j * angles)[None, :]


@dataclass
class ComplexZeroSummary:
    N: int
    M: int
    sigma_eff: float
    zeros: np.ndarray
    ring_counts: list[int]
    annulus_counts: list[int]
    epsilon: float
    ring_radius2: list[float]
    predicted_radius2: list[float]
    max_gap_error: float
    notes: list[str] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "N": self.N,
            "M": self.M,
            "sigma_eff": self.sigma_eff,
            "n_zeros": int(self.zeros.size),
            "ring_counts": self.ring_counts,
            "annulus_counts": self.annulus_counts,
            "epsilon": self.epsilon,
            "ring_radius2": self.ring_radius2,
            "predicted_radius2": self.predicted_radius2,
            "max_gap_error": self.max_gap_error,
        }


def zeros_weak_limit_histogram(N: int, M: int, sigmas=None, epsilon: float = 0.1) -> ComplexZeroSummary:
    """Complex zeros of ``Q_N^(M)`` binned by ring.

    ``ring_counts[j-1]`` counts zeros whose ``|w|^2 / sigma^2`` is nearest to
    ``j``; ``annulus_counts`` counts those inside ``sigma^2 (j - eps, j + eps)``.
    ``predicted_radius2`` is the refined first-order ring location.
    """
    if N * M > 2000:
        raise ValueError("N*M above 2000 is not supported")
    zs = find_zeros(N, M, sigmas)
    w = complex_zeros(zs)
    s_eff = math.exp(math.log(zs.tau) / M)
    r2 = (np.abs(w) ** 2 / s_eff**2).ravel()
    nearest = np.clip(np.rint(r2), 1, N).astype(int)
    ring_counts = [int(np.sum(nearest == j)) for j in range(1, N + 1)]
    annulus = [int(np.sum(np.abs(r2 - j) < epsilon)) for j in range(1, N + 1)]
    gaps = []
    for row in w:
        ang = np.sort(np.mod(np.angle(row), 2 * np.pi))
        d = np.diff(np.concatenate([ang, [ang[0] + 2 * np.pi]]))
        gaps.append(np.max(np.abs(d - np.pi / M)))
    pred = [s_eff**2 * math.exp(2 * refined_zero_prediction(N, M, j)) for j in range(1, N + 1)]
    return ComplexZeroSummary(
        N, M, s_eff, w.ravel(), ring_counts, annulus, epsilon,
        [float(math.exp(2 * v)) for v in zs.rescaled], pred, float(max(gaps)),
    )
