"""Exact reference polynomials for averaged characteristic polynomials.

Coefficients are kept as Python integers where they are integral (they grow
like ``(N!)**(M+1)`` and overflow doubles quickly) and every evaluation goes
through a ``(sign, log|.|)`` view with max-term scaling.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

__all__ = [
    "CoefficientVector",
    "KernelSpec",
    "LogSignValue",
    "LogPhaseValue",
    "product_charpoly_coeffs",
    "scaled_product_charpoly",
    "hermite_monic",
    "kernel_norms",
    "kernel_coeffs",
    "kernel_coeff_floats",
    "kernel_eval",
    "rescaled_P_eval",
    "rescaled_Q_eval",
    "tau_of",
]


@dataclass(frozen=True)
class LogSignValue:
    """Real number stored as ``sign * exp(log_magnitude)``."""

    sign: int
    log_magnitude: float

    def __post_init__(self):
        if self.sign not in (-1, 0, 1):
            raise ValueError(f"sign must be -1, 0 or 1, got {self.sign}")

    @classmethod
    def from_float(cls, x: float) -> "LogSignValue":
        if x == 0:
            return cls(0, -math.inf)
        return cls(1 if x > 0 else -1, math.log(abs(x)))

    @classmethod
    def from_int(cls, n: int) -> "LogSignValue":
        if n == 0:
            return cls(0, -math.inf)
        # math.log is exact-rounded on arbitrarily large ints
        return cls(1 if n > 0 else -1, math.log(abs(n)))

    def __mul__(self, other: "LogSignValue") -> "LogSignValue":
        if self.sign == 0 or other.sign == 0:
            return LogSignValue(0, -math.inf)
        return LogSignValue(self.sign * other.sign, self.log_magnitude + other.log_magnitude)

    def __truediv__(self, other: "LogSignValue") -> "LogSignValue":
        if other.sign == 0:
            raise ZeroDivisionError("division by a zero LogSignValue")
        if self.sign == 0:
            return self
        return LogSignValue(self.sign * other.sign, self.log_magnitude - other.log_magnitude)

    def __float__(self) -> float:
        if self.sign == 0:
            return 0.0
        if self.log_magnitude > 709.78:
            raise OverflowError(f"exp({self.log_magnitude}) does not fit a double")
        return self.sign * math.exp(self.log_magnitude)


@dataclass(frozen=True)
class LogPhaseValue:
    """Complex number stored as ``exp(log_magnitude + 1j*phase)``."""

    log_magnitude: float
    phase: float

    @property
    def is_zero(self) -> bool:
        return self.log_magnitude == -math.inf

    def __complex__(self) -> complex:
        if self.is_zero:
            return 0j
        if self.log_magnitude > 709.78:
            raise OverflowError(f"exp({self.log_magnitude}) does not fit a double")
        return cmath.rect(math.exp(self.log_magnitude), self.phase)


@dataclass(frozen=True)
class CoefficientVector:
    """Monic polynomial, ascending-degree coefficients.

    ``exact`` holds integer coefficients when the polynomial is integral
    (``None`` otherwise). ``signs`` and ``log_abs`` are the float view used for
    evaluation; they exist for every vector.
    """

    signs: tuple[int, ...]
    log_abs: tuple[float, ...]
    exact: tuple[int, ...] | None = None

    def __post_init__(self):
        if len(self.signs) != len(self.log_abs):
            raise ValueError("signs and log_abs differ in length")
        if len(self.signs) < 2:
            raise ValueError("need at least a degree-1 polynomial")
        if self.signs[-1] != 1 or abs(self.log_abs[-1]) > 1e-12:
            raise ValueError("polynomial is not monic")
        if self.exact is not None and (len(self.exact) != len(self.signs) or self.exact[-1] != 1):
            raise ValueError("exact coefficients are inconsistent")

    @classmethod
    def from_ints(cls, coeffs: Sequence[int]) -> "CoefficientVector":
        views = [LogSignValue.from_int(int(c)) for c in coeffs]
        return cls(
            signs=tuple(v.sign for v in views),
            log_abs=tuple(v.log_magnitude for v in views),
            exact=tuple(int(c) for c in coeffs),
        )

    @classmethod
    def from_floats(cls, coeffs: Sequence[float]) -> "CoefficientVector":
        views = [LogSignValue.from_float(float(c)) for c in coeffs]
        return cls(signs=tuple(v.sign for v in views), log_abs=tuple(v.log_magnitude for v in views))

    @property
    def degree(self) -> int:
        return len(self.signs) - 1

    def __len__(self) -> int:
        return len(self.signs)

    def log_sign(self, k: int) -> LogSignValue:
        return LogSignValue(self.signs[k], self.log_abs[k])

    def to_floats(self) -> np.ndarray:
        """Coefficients as doubles; raises ``OverflowError`` rather than returning inf."""
        if self.exact is not None:
            return np.array([float(c) for c in self.exact])
        return np.array([float(self.log_sign(k)) for k in range(len(self))])

    def evaluate(self, x: float) -> LogSignValue:
        """Value at real ``x`` via max-term scaling and exact-rounded summation."""
        if x == 0:
            return self.log_sign(0)
        lx = math.log(abs(x))
        xs = 1 if x > 0 else -1
        logs, signs = [], []
        for k, (s, la) in enumerate(zip(self.signs, self.log_abs)):
            if s == 0:
                continue
            logs.append(la + k * lx)
            signs.append(s * xs**k)
        return _signed_logsumexp(logs, signs)


@dataclass(frozen=True)
class KernelSpec:
    N: int
    M: int
    tau: float = 1.0

    def __post_init__(self):
        if self.N < 1 or self.M < 1:
            raise ValueError("N and M must be positive")
        if not self.tau > 0:
            raise ValueError("tau must be positive")


def tau_of(sigmas: Sequence[float]) -> float:
    """Product of the per-factor standard deviations."""
    sig = [float(s) for s in sigmas]
    if any(not s > 0 for s in sig):
        raise ValueError("all sigmas must be positive")
    return math.exp(math.fsum(math.log(s) for s in sig))


def _check_nm(N: int, M: int) -> None:
    if int(N) != N or int(M) != M or N < 1 or M < 1:
        raise ValueError(f"N and M must be positive integers, got N={N}, M={M}")


def _signed_logsumexp(logs: Sequence[float], signs: Sequence[int]) -> LogSignValue:
    if not logs:
        return LogSignValue(0, -math.inf)
    top = max(logs)
    total = math.fsum(s * math.exp(l - top) for l, s in zip(logs, signs))
    if total == 0.0:
        return LogSignValue(0, -math.inf)
    return LogSignValue(1 if total > 0 else -1, top + math.log(abs(total)))


def product_charpoly_coeffs(N: int, M: int) -> CoefficientVector:
    """Exact coefficients of ``p_N^(M)``.

    The coefficient of ``x**k`` is ``(-1)**(N-k) * C(N, k) * (N!/k!)**M``.
    """
    _check_nm(N, M)
    fN = math.factorial(N)
    coeffs = [(-1) ** (N - k) * math.comb(N, k) * (fN // math.factorial(k)) ** M for k in range(N + 1)]
    return CoefficientVector.from_ints(coeffs)


def scaled_product_charpoly(N: int, M: int, sigmas: Sequence[float]) -> CoefficientVector:
    """``tau**(2N) * p_N^(M)(x / tau**2)`` with ``tau = prod(sigmas)``."""
    _check_nm(N, M)
    if len(sigmas) != M:
        raise ValueError(f"expected {M} sigmas, got {len(sigmas)}")
    log_tau = math.log(tau_of(sigmas))
    base = product_charpoly_coeffs(N, M)
    if log_tau == 0.0:
        return base
    log_abs = tuple(la + 2 * (N - k) * log_tau for k, la in enumerate(base.log_abs))
    return CoefficientVector(signs=base.signs, log_abs=log_abs)


def hermite_monic(N: int, sigma: float) -> CoefficientVector:
    """Expected characteristic polynomial of an ``N x N`` Wigner matrix with variance ``sigma**2``.

    Built from ``he_{n+1} = x*he_n - sigma**2 * n * he_{n-1}``.
    """
    _check_nm(N, 1)
    if not sigma > 0:
        raise ValueError("sigma must be positive")
    s2 = float(sigma) ** 2
    prev = np.array([1.0])
    cur = np.array([0.0, 1.0])
    for n in range(1, N):
        nxt = np.zeros(n + 2)
        nxt[1:] = cur
        nxt[: n] -= s2 * n * prev
        prev, cur = cur, nxt
    return CoefficientVector.from_floats(cur)


def kernel_norms(k: int, M: int) -> float:
    """Squared norm ``h_k^(M) = pi * (k!)**M`` (as a double)."""
    return math.pi * math.factorial(k) ** M


def kernel_coeffs(N: int, M: int, tau: float = 1.0) -> list[LogSignValue]:
    """Coefficients of ``(zw)**k`` in ``tau**(2N) h_N K_{N+1}(z/tau, w/tau)``.

    These are ``(N!/k!)**M * tau**(2(N-k))``, the diagonal second moments of the
    characteristic-polynomial coefficients of the product matrix.
    """
    spec = KernelSpec(N, M, tau)
    lt = math.log(spec.tau)
    lgN = math.lgamma(N + 1)
    return [LogSignValue(1, M * (lgN - math.lgamma(k + 1)) + 2 * (N - k) * lt) for k in range(N + 1)]


def kernel_coeff_floats(N: int, M: int, tau: float = 1.0) -> list[float]:
    """``kernel_coeffs`` as doubles, from exact integers when they fit (exact at ``tau == 1``)."""
    out = []
    for k, c in enumerate(kernel_coeffs(N, M, tau)):
        try:
            base = float((math.factorial(N) // math.factorial(k)) ** M)
        except OverflowError:
            out.append(float(c))
            continue
        out.append(base if tau == 1 else base * float(tau) ** (2 * (N - k)))
    return out


def kernel_eval(spec: KernelSpec, z: complex, w: complex) -> complex:
    """``tau**(2N) h_N^(M) K_{N+1}^(M)(z/tau, w/tau)``, summed in the log domain."""
    zw = complex(z) * complex(w)
    coeffs = kernel_coeffs(spec.N, spec.M, spec.tau)
    if zw == 0:
        return complex(float(coeffs[0]))
    lzw = cmath.log(zw)
    logs = [c.log_magnitude + k * lzw for k, c in enumerate(coeffs)]
    top = max(l.real for l in logs)
    re = math.fsum(math.exp(l.real - top) * math.cos(l.imag) for l in logs)
    im = math.fsum(math.exp(l.real - top) * math.sin(l.imag) for l in logs)
    return complex(re, im) * math.exp(top)


def _rescaled_terms(N: int, M: int, s: complex) -> tuple[list[float], list[float]]:
    # k-th term of sum_k C(N,k) (-1)^k (s^k / k!)^M, s = z^2, as (log|t|, arg t)
    ls = cmath.log(s)
    logs, phases = [], []
    for k in range(N + 1):
        lt = math.log(math.comb(N, k)) + M * (k * ls.real - math.lgamma(k + 1))
        logs.append(lt)
        phases.append(M * k * ls.imag + math.pi * k)
    return logs, phases


def _rescaled_log(N: int, M: int, s: complex) -> LogPhaseValue:
    if s == 0:
        return LogPhaseValue(0.0, 0.0)
    logs, phases = _rescaled_terms(N, M, s)
    top = max(logs)
    re = math.fsum(math.exp(l - top) * math.cos(p) for l, p in zip(logs, phases))
    im = math.fsum(math.exp(l - top) * math.sin(p) for l, p in zip(logs, phases))
    mag = math.hypot(re, im)
    if mag == 0.0:
        return LogPhaseValue(-math.inf, 0.0)
    return LogPhaseValue(top + math.log(mag), math.atan2(im, re))


def rescaled_P_eval(N: int, M: int, z: complex | float) -> LogSignValue | LogPhaseValue:
    """Evaluate ``sum_k C(N,k) (-1)^k (z^(2k)/k!)^M``.

    Real ``z`` gives a :class:`LogSignValue`; complex ``z`` gives a
    :class:`LogPhaseValue`.
    """
    _check_nm(N, M)
    if isinstance(z, complex) or isinstance(z, np.complexfloating):
        return _rescaled_log(N, M, complex(z) ** 2)
    z = float(z)
    if z == 0.0:
        return LogSignValue(1, 0.0)
    lz2 = 2.0 * math.log(abs(z))
    logs = [math.log(math.comb(N, k)) + M * (k * lz2 - math.lgamma(k + 1)) for k in range(N + 1)]
    signs = [(-1) ** k for k in range(N + 1)]
    return _signed_logsumexp(logs, signs)


def rescaled_Q_eval(N: int, M: int, sigmas: Sequence[float], w: complex | float):
    """``P_N^(M)(w / tau**(1/M))`` for per-factor standard deviations ``sigmas``."""
    if len(sigmas) != M:
        raise ValueError(f"expected {M} sigmas, got {len(sigmas)}")
    scale = math.exp(math.log(tau_of(sigmas)) / M)
    return rescaled_P_eval(N, M, w / scale)
