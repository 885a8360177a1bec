"""Reference computations that share no code with the package under test.

Each oracle uses a different route to the same object: classical
three-term recurrences, brute-force Leibniz determinants, exhaustive
enumeration of discrete laws in exact rational arithmetic, or mpmath at
high precision.
"""

from __future__ import annotations

import itertools
import math
from fractions import Fraction

import mpmath


def poly_mul(a, b):
    out = [0] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        for j, y in enumerate(b):
            out[i + j] += x * y
    return out


def poly_add(a, b):
    n = max(len(a), len(b))
    a = list(a) + [0] * (n - len(a))
    b = list(b) + [0] * (n - len(b))
    return [x + y for x, y in zip(a, b)]


def laguerre_monic(N: int) -> list[int]:
    """Monic Laguerre polynomial (ascending) from l_{n+1} = (x - 2n - 1) l_n - n^2 l_{n-1}."""
    prev, cur = [1], [-1, 1]
    if N == 0:
        return prev
    for n in range(1, N):
        nxt = poly_add(poly_mul([-(2 * n + 1), 1], cur), [-(n * n) * c for c in prev])
        prev, cur = cur, nxt
    return cur


def hermite_monic_oracle(N: int, sigma: float) -> list[float]:
    """sigma^N He_N(x / sigma) from he_{n+1} = x he_n - n he_{n-1}, then rescaled."""
    prev, cur = [Fraction(1)], [Fraction(0), Fraction(1)]
    if N == 0:
        return [1.0]
    for n in range(1, N):
        prev, cur = cur, poly_add(poly_mul([0, 1], cur), [-n * c for c in prev])
    return [float(c) * sigma ** (N - k) for k, c in enumerate(cur)]


def leibniz_det(A):
    """Determinant by the permutation expansion; exact for exact entries."""
    n = len(A)
    if n == 0:
        return 1
    total = 0
    for perm in itertools.permutations(range(n)):
        inv = sum(1 for i in range(n) for j in range(i + 1, n) if perm[i] > perm[j])
        term = -1 if inv % 2 else 1
        for i in range(n):
            term *= A[i][perm[i]]
        total += term
    return total


def charpoly_leibniz(A) -> list:
    """Ascending coefficients of det(xI - A) via sums of principal minors."""
    n = len(A)
    coeffs = []
    for k in range(n + 1):
        m = n - k  # coefficient of x^k is (-1)^m e_m, e_m = sum of principal m-minors
        e = 0
        for S in itertools.combinations(range(n), m):
            e += leibniz_det([[A[i][j] for j in S] for i in S])
        coeffs.append((-1) ** m * e)
    return coeffs


def matmul(A, B):
    n, p, q = len(A), len(B), len(B[0])
    return [[sum(A[i][k] * B[k][j] for k in range(p)) for j in range(q)] for i in range(n)]


def transpose(A):
    return [list(r) for r in zip(*A)]


def rademacher_product_expectation(N: int, M: int, mixed: bool = False) -> list[Fraction]:
    """Exact E det(xI - P^T P) (or the mixed ordering) over all +-1 factor chains."""
    n_entries = N * N * M
    total = [Fraction(0)] * (N + 1)
    count = 0
    for signs in itertools.product((-1, 1), repeat=n_entries):
        Xs = [[list(signs[k * N * N + i * N:k * N * N + (i + 1) * N]) for i in range(N)] for k in range(M)]
        if mixed:
            H = None
            for X in Xs:
                G = matmul(transpose(X), X)
                H = G if H is None else matmul(H, G)
        else:
            P = Xs[0]
            for X in Xs[1:]:
                P = matmul(P, X)
            H = matmul(transpose(P), P)
        for k, c in enumerate(charpoly_leibniz(H)):
            total[k] += c
        count += 1
    return [t / count for t in total]


def rademacher_symmetric_expectation(N: int) -> list[Fraction]:
    """Exact E det(xI - H) for symmetric H with i.i.d. +-1 entries on and above the diagonal."""
    idx = [(i, j) for i in range(N) for j in range(i, N)]
    total = [Fraction(0)] * (N + 1)
    count = 0
    for signs in itertools.product((-1, 1), repeat=len(idx)):
        H = [[0] * N for _ in range(N)]
        for (i, j), s in zip(idx, signs):
            H[i][j] = H[j][i] = s
        for k, c in enumerate(charpoly_leibniz(H)):
            total[k] += c
        count += 1
    return [t / count for t in total]


def fourth_root_kernel_moments(N: int) -> list[list[Fraction]]:
    """Exact E[c_nu conj(c_mu)] for one N x N matrix with entries uniform on {1, i, -1, -i}."""
    roots = (1, 1j, -1, -1j)
    acc = [[0j] * (N + 1) for _ in range(N + 1)]
    count = 0
    for ent in itertools.product(roots, repeat=N * N):
        A = [list(ent[i * N:(i + 1) * N]) for i in range(N)]
        c = charpoly_leibniz(A)
        for a in range(N + 1):
            for b in range(N + 1):
                acc[a][b] += c[a] * complex(c[b]).conjugate()
        count += 1
    # entries are Gaussian integers so the sums are exact in floating point
    return [[Fraction(int(round(v.real)), count) for v in row] for row in acc]


def mp_charpoly_coeffs(N: int, M: int) -> list:
    return [(-1) ** (N - k) * math.comb(N, k) * (math.factorial(N) // math.factorial(k)) ** M for k in range(N + 1)]


def mp_rescaled_zero(N: int, M: int, j: int, dps: int = 60):
    """``log(z_j) / (2M)`` by high-precision root polishing in ``y`` near ``(1/2) log j``.

    The polynomial is evaluated in ``y`` after dividing by the ``k = j`` term,
    so all quantities stay O(1) even for very large ``M``.
    """
    with mpmath.workdps(dps):
        c = [mpmath.mpf(v) for v in mp_charpoly_coeffs(N, M)]
        ref = c[j]

        def g(y):
            return mpmath.fsum(ck / ref * mpmath.exp(2 * M * (k - j) * y) for k, ck in enumerate(c))

        # the zero sits between the (j-1, j) balance point and (j, j+1)
        lo = mpmath.log(j) / 2 + mpmath.log(mpmath.mpf(j) / (N + 1 - j)) / (2 * M) - mpmath.mpf(1) / (4 * M)
        hi = lo + mpmath.mpf(1) / (2 * M)
        return mpmath.findroot(g, (lo, hi), solver="anderson")


def mp_digamma(x: float) -> float:
    return float(mpmath.digamma(x))


def mp_rescaled_P(N: int, M: int, z) -> mpmath.mpc:
    with mpmath.workdps(50):
        z = mpmath.mpmathify(z)
        return mpmath.fsum(math.comb(N, k) * (-1) ** k * (z ** (2 * k) / mpmath.factorial(k)) ** M
                           for k in range(N + 1))
