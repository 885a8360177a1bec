"""Characteristic-polynomial coefficients and minors of concrete matrices.

All functions accept a single ``(N, N)`` matrix or a stack ``(..., N, N)``.
"""

from __future__ import annotations

import itertools
import math
import warnings
from functools import lru_cache
from typing import Sequence

import numpy as np

__all__ = [
    "MAX_N",
    "ConditioningWarning",
    "charpoly_coeffs",
    "hermitised_product",
    "mixed_product",
    "subsets",
    "subdet",
    "compound",
    "cauchy_binet_check",
]

MAX_N = 64


class ConditioningWarning(RuntimeWarning):
    """Faddeev-LeVerrier coefficients disagree with the eigenvalue route."""


def charpoly_coeffs(A: np.ndarray, check: bool = False) -> np.ndarray:
    """Ascending coefficients of ``det(x I - A)`` by the Faddeev-LeVerrier recursion.

    Returns a complex array of shape ``(..., N+1)`` whose last entry is exactly 1.
    With ``check=True`` the result is compared against the polynomial built
    from the eigenvalues and a :class:`ConditioningWarning` is issued when the
    relative residual exceeds 1e-8.
    """
    A = np.asarray(A, dtype=complex)
    N = A.shape[-1]
    if A.shape[-2] != N:
        raise ValueError(f"expected square matrices, got shape {A.shape}")
    if N > MAX_N:
        raise ValueError(f"N={N} exceeds the supported size {MAX_N}")
    if not np.all(np.isfinite(A)):
        raise ValueError("matrix has non-finite entries")
    batch = A.shape[:-2]
    c = np.zeros(batch + (N + 1,), dtype=complex)
    c[..., N] = 1.0
    eye = np.eye(N, dtype=complex)
    Mk = np.zeros_like(A)
    for k in range(1, N + 1):
        Mk = A @ Mk + c[..., N - k + 1, None, None] * eye
        c[..., N - k] = -np.trace(A @ Mk, axis1=-2, axis2=-1) / k
    if check:
        _cross_check(A, c)
    return c


def _cross_check(A: np.ndarray, c: np.ndarray) -> float:
    eig = np.linalg.eigvals(A)
    flat_eig = eig.reshape(-1, A.shape[-1])
    ref = np.array([np.poly(e)[::-1] for e in flat_eig]).reshape(c.shape)
    scale = np.max(np.abs(ref), axis=-1, keepdims=True)
    resid = float(np.max(np.abs(c - ref) / scale))
    if resid > 1e-8:
        warnings.warn(f"charpoly residual {resid:.2e} against eigenvalues", ConditioningWarning, stacklevel=3)
    return resid


def _hermitise(A: np.ndarray) -> np.ndarray:
    return 0.5 * (A + np.conj(np.swapaxes(A, -1, -2)))


def _factors(Xs) -> list[np.ndarray]:
    if isinstance(Xs, np.ndarray):
        # (..., M, N, N) stack of chains
        return [Xs[..., k, :, :] for k in range(Xs.shape[-3])]
    return [np.asarray(X) for X in Xs]


def hermitised_product(Xs) -> np.ndarray:
    """``P^* P`` with ``P = X_1 ... X_M`` accumulated left to right, then symmetrised."""
    fs = _factors(Xs)
    P = fs[0]
    for X in fs[1:]:
        P = P @ X
    return _hermitise(np.conj(np.swapaxes(P, -1, -2)) @ P)


def mixed_product(Xs) -> np.ndarray:
    """``(X_1^* X_1)(X_2^* X_2) ... (X_M^* X_M)``; each factor is symmetrised."""
    fs = _factors(Xs)
    out = None
    for X in fs:
        G = _hermitise(np.conj(np.swapaxes(X, -1, -2)) @ X)
        out = G if out is None else out @ G
    return out


@lru_cache(maxsize=None)
def subsets(N: int, r: int) -> tuple[tuple[int, ...], ...]:
    """All ``r``-subsets of ``range(N)`` in lexicographic order (0-based)."""
    return tuple(itertools.combinations(range(N), r))


def _check_subset(idx: Sequence[int], N: int) -> tuple[int, ...]:
    idx = tuple(int(i) for i in idx)
    if any(b <= a for a, b in zip(idx, idx[1:])):
        raise ValueError(f"index subset {idx} is not strictly increasing")
    if idx and (idx[0] < 0 or idx[-1] >= N):
        raise ValueError(f"index subset {idx} out of range for N={N}")
    return idx


def subdet(A: np.ndarray, rows: Sequence[int], cols: Sequence[int]) -> complex | np.ndarray:
    """Determinant of the sub-matrix on ``rows x cols`` (0-based, increasing) via LU."""
    A = np.asarray(A)
    N = A.shape[-1]
    rows, cols = _check_subset(rows, N), _check_subset(cols, N)
    if len(rows) != len(cols):
        raise ValueError("row and column subsets differ in size")
    if not rows:
        return 1.0 + 0j
    sub = A[..., list(rows), :][..., list(cols)]
    return np.linalg.det(sub)


def compound(A: np.ndarray, r: int) -> np.ndarray:
    """All ``r x r`` minors: ``out[..., a, b] = subdet(A, subsets[a], subsets[b])``."""
    A = np.asarray(A)
    N = A.shape[-1]
    if not 1 <= r <= N:
        raise ValueError(f"minor size r={r} must lie in 1..{N}")
    idx = np.array(subsets(N, r))
    sub = A[..., idx[:, None, :, None], idx[None, :, None, :]]
    return np.linalg.det(sub)


def cauchy_binet_check(A: np.ndarray, B: np.ndarray, rows: Sequence[int], cols: Sequence[int]) -> float:
    """Relative residual of the Cauchy-Binet expansion of one minor of ``A @ B``.

    Returns ``|det(AB)[rows, cols] - sum_V det A[rows, V] det B[V, cols]|``
    divided by the largest term magnitude (or 1 if all terms vanish).
    """
    A, B = np.asarray(A, dtype=complex), np.asarray(B, dtype=complex)
    N = A.shape[-1]
    lhs = subdet(A @ B, rows, cols)
    terms = [subdet(A, rows, V) * subdet(B, V, cols) for V in subsets(N, len(rows))]
    # exact-rounded summation of the real and imaginary parts
    rhs = complex(math.fsum(t.real for t in terms), math.fsum(t.imag for t in terms))
    scale = max([abs(lhs)] + [abs(t) for t in terms])
    return abs(lhs - rhs) / (scale if scale > 0 else 1.0)
