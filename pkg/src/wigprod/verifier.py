"""Monte Carlo checks of the averaged characteristic-polynomial identities.

Every estimator is a coefficient-wise sample mean. Samples are processed in
fixed-size chunks whose accumulators are merged in a fixed binary tree, so a
report depends on ``(spec, samples, seed)`` only and never on ``workers``.
"""

from __future__ import annotations

import json
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field, replace
from typing import Any, Callable, Sequence

import numpy as np

from .charpoly import charpoly_coeffs, compound, hermitised_product, mixed_product, subsets
from .closedform import hermite_monic, kernel_coeff_floats, scaled_product_charpoly, tau_of
from .sampling import EnsembleSpec, EntryDistribution, sample_chains
from .stats import MomentAccumulator, tree_merge

__all__ = [
    "CHUNK",
    "IDENTITIES",
    "CoefficientRecord",
    "VerificationReport",
    "run_mc",
    "verify_thm1_hermitised",
    "verify_thm1_mixed",
    "verify_thm2_kernel",
    "verify_trivial_single",
    "verify_hermite",
    "verify_lemma1",
]

CHUNK = 2048
MIN_SAMPLES = 1000
INCONCLUSIVE_SE_FRACTION = 0.5

IDENTITIES = (
    "thm1-hermitised",
    "thm1-mixed",
    "thm2-kernel",
    "eq5-hermite",
    "eq6-trivial",
    "lemma1-part1",
    "lemma1-part2",
)


@dataclass
class CoefficientRecord:
    index: Any
    est_re: float
    est_im: float
    se: float
    ref_re: float
    ref_im: float
    z: float

    @property
    def estimate(self) -> complex:
        return complex(self.est_re, self.est_im)

    @property
    def reference(self) -> complex:
        return complex(self.ref_re, self.ref_im)


@dataclass
class VerificationReport:
    identity: str
    spec: dict
    records: list[CoefficientRecord]
    verdict: str
    z_threshold: float
    seed: int
    samples: int
    wall_time: float = 0.0
    notes: list[str] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return self.verdict == "pass"

    @property
    def max_abs_z(self) -> float:
        return max(abs(r.z) for r in self.records)

    def to_dict(self, include_timing: bool = True) -> dict:
        d = asdict(self)
        if not include_timing:
            d.pop("wall_time")
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "VerificationReport":
        d = dict(d)
        d["records"] = [CoefficientRecord(**r) for r in d["records"]]
        return cls(**d)

    def to_json(self, **kw) -> str:
        return json.dumps(self.to_dict(), **kw)


def z_score(est: complex, ref: complex, se: float) -> float:
    """``|est - ref| / se``; a deterministic quantity (``se == 0``) must match exactly."""
    diff = abs(est - ref)
    scale = max(1.0, abs(ref))
    if not se > 1e-13 * scale:
        return 0.0 if diff <= 1e-9 * scale else math.inf
    return diff / se


def run_mc(
    quantity: Callable[[np.ndarray], np.ndarray],
    spec: EnsembleSpec,
    samples: int,
    seed: int,
    workers: int = 1,
) -> MomentAccumulator:
    """Average ``quantity(chains)`` (shape ``(count, Q)``) over ``samples`` draws."""
    if samples < 1:
        raise ValueError("samples must be positive")
    chunks = [(s, min(CHUNK, samples - s)) for s in range(0, samples, CHUNK)]

    def work(chunk):
        X = sample_chains(spec, seed, *chunk)
        return MomentAccumulator.from_batch(quantity(X))

    if workers <= 1:
        accs = [work(c) for c in chunks]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            accs = list(pool.map(work, chunks))
    return tree_merge(accs)


def _report(identity, spec_dict, labels, acc, refs, z_threshold, seed, samples, t0, notes=()):
    est, se = acc.mean, acc.se
    records = []
    inconclusive = False
    for lab, e, s, r in zip(labels, est, se, refs):
        r = complex(r)
        records.append(CoefficientRecord(lab, float(e.real), float(e.imag), float(s), r.real, r.imag,
                                         z_score(complex(e), r, float(s))))
        if r != 0 and s > INCONCLUSIVE_SE_FRACTION * abs(r):
            inconclusive = True
    n = len(records)
    tail = math.erfc(z_threshold / math.sqrt(2.0))
    notes = list(notes) + [
        f"{n} simultaneous tests at |z| <= {z_threshold:g}; per-test normal tail {tail:.2g}, "
        f"Bonferroni family-wise bound {min(1.0, n * tail):.2g}"
    ]
    if inconclusive:
        verdict = "inconclusive"
        notes.append(f"some standard error exceeds {INCONCLUSIVE_SE_FRACTION:.0%} of its reference; raise samples")
    elif all(abs(rec.z) <= z_threshold for rec in records):
        verdict = "pass"
    else:
        verdict = "fail"
    return VerificationReport(identity, spec_dict, records, verdict, float(z_threshold), int(seed), int(samples),
                              time.perf_counter() - t0, notes)


def _check_samples(samples: int) -> None:
    if samples < MIN_SAMPLES:
        raise ValueError(f"need at least {MIN_SAMPLES} samples, got {samples}")


def _thm1(identity, product, spec, samples, seed, z_threshold, workers):
    _check_samples(samples)
    if spec.hermitian_single:
        raise ValueError("product identities need a non-Hermitian ensemble")
    t0 = time.perf_counter()
    acc = run_mc(lambda X: charpoly_coeffs(product(X)), spec, samples, seed, workers)
    refs = scaled_product_charpoly(spec.N, spec.M, spec.sigmas).to_floats()
    return _report(identity, spec.to_dict(), list(range(spec.N + 1)), acc, refs, z_threshold, seed, samples, t0)


def verify_thm1_hermitised(spec: EnsembleSpec, samples: int, seed: int, z_threshold: float = 5.0,
                           workers: int = 1) -> VerificationReport:
    """Average characteristic polynomial of ``(X_1..X_M)^* (X_1..X_M)``."""
    return _thm1("thm1-hermitised", hermitised_product, spec, samples, seed, z_threshold, workers)


def verify_thm1_mixed(spec: EnsembleSpec, samples: int, seed: int, z_threshold: float = 5.0,
                      workers: int = 1) -> VerificationReport:
    """Same reference polynomial, for ``(X_1^* X_1)...(X_M^* X_M)``."""
    return _thm1("thm1-mixed", mixed_product, spec, samples, seed, z_threshold, workers)


def _chain_product(X: np.ndarray) -> np.ndarray:
    P = X[:, 0]
    for k in range(1, X.shape[1]):
        P = P @ X[:, k]
    return P


def verify_thm2_kernel(spec: EnsembleSpec, samples: int, seed: int, z_threshold: float = 5.0,
                       workers: int = 1) -> VerificationReport:
    """Cross moments ``E[c_nu conj(c_mu)]`` of the coefficients of ``det(z - X_1..X_M)``.

    Reference: ``(N!/nu!)**M * tau**(2(N-nu))`` on the diagonal, 0 elsewhere.
    """
    _check_samples(samples)
    N = spec.N
    t0 = time.perf_counter()

    def quantity(X):
        c = charpoly_coeffs(_chain_product(X))
        return (c[:, :, None] * np.conj(c[:, None, :])).reshape(len(c), -1)

    acc = run_mc(quantity, spec, samples, seed, workers)
    diag = kernel_coeff_floats(N, spec.M, tau_of(spec.sigmas))
    labels, refs = [], []
    for nu in range(N + 1):
        for mu in range(N + 1):
            labels.append([nu, mu])
            refs.append(diag[nu] if nu == mu else 0.0)
    return _report("thm2-kernel", spec.to_dict(), labels, acc, refs, z_threshold, seed, samples, t0)


def verify_trivial_single(spec: EnsembleSpec, samples: int, seed: int, z_threshold: float = 5.0,
                          workers: int = 1) -> VerificationReport:
    """``E det(z - X_1..X_M) = z**N``."""
    _check_samples(samples)
    t0 = time.perf_counter()
    acc = run_mc(lambda X: charpoly_coeffs(_chain_product(X)), spec, samples, seed, workers)
    refs = [0.0] * spec.N + [1.0]
    return _report("eq6-trivial", spec.to_dict(), list(range(spec.N + 1)), acc, refs, z_threshold, seed,
                   samples, t0)


def verify_hermite(N: int, sigma: float, dist: EntryDistribution, samples: int, seed: int,
                   z_threshold: float = 5.0, workers: int = 1,
                   diag_variance_factor: float = 1.0) -> VerificationReport:
    """Average characteristic polynomial of a Hermitian Wigner matrix with variance ``sigma**2``."""
    _check_samples(samples)
    dist = replace(dist, variance=float(sigma) ** 2)
    spec = EnsembleSpec(N, 1, (dist,), hermitian_single=True, diag_variance_factor=diag_variance_factor)
    t0 = time.perf_counter()
    acc = run_mc(lambda X: charpoly_coeffs(X[:, 0]), spec, samples, seed, workers)
    refs = hermite_monic(N, sigma).to_floats()
    return _report("eq5-hermite", spec.to_dict(), list(range(N + 1)), acc, refs, z_threshold, seed, samples, t0)


def _one_based(s: Sequence[int]) -> list[int]:
    return [i + 1 for i in s]


def verify_lemma1(N: int, r: int, dist: EntryDistribution, samples: int, seed: int, exhaustive: bool = True,
                  z_threshold: float = 5.0, workers: int = 1,
                  n_quadruples: int = 200) -> tuple[VerificationReport, VerificationReport]:
    """Expectations of products of minors of one Wigner matrix and its adjoint.

    Part 1 estimates ``E[det X[K, Kt] * det X^*[Lt, L]]`` over subset
    quadruples (all of them when ``exhaustive``, else ``n_quadruples`` random
    ones plus every matched case); part 2 estimates ``E det (X^* X)[K, L]``.
    Both reports come from the same samples.
    """
    _check_samples(samples)
    if not 1 <= r <= N:
        raise ValueError(f"minor size r={r} must lie in 1..{N}")
    if exhaustive and N > 5:
        raise ValueError("exhaustive quadruple enumeration is limited to N <= 5")
    spec = EnsembleSpec(N, 1, (dist,))
    subs = subsets(N, r)
    n = len(subs)
    pairs = [(a, b) for a in range(n) for b in range(n)]  # (row subset, column subset)
    if exhaustive:
        sel = np.arange(n**4)
    else:
        rng = np.random.default_rng([int(seed), N, r])
        rand = rng.choice(n**4, size=min(n_quadruples, n**4), replace=False)
        matched = np.arange(n * n) * (n * n + 1)
        sel = np.unique(np.concatenate([rand, matched]))
    t0 = time.perf_counter()

    def quantity(X):
        A = X[:, 0]
        C = compound(A, r).reshape(len(A), -1)
        part1 = (C[:, :, None] * np.conj(C[:, None, :])).reshape(len(A), -1)[:, sel]
        G = np.conj(np.swapaxes(A, -1, -2)) @ A
        part2 = compound(G, r).reshape(len(A), -1)
        return np.concatenate([part1, part2], axis=1)

    acc = run_mc(quantity, spec, samples, seed, workers)
    s2r = dist.variance**r
    k1 = len(sel)
    labels1, refs1 = [], []
    for q in sel:
        a, b = divmod(int(q), n * n)
        K, Kt = pairs[a]
        L, Lt = pairs[b]
        labels1.append({"K": _one_based(subs[K]), "Kt": _one_based(subs[Kt]),
                        "L": _one_based(subs[L]), "Lt": _one_based(subs[Lt])})
        refs1.append(math.factorial(r) * s2r if a == b else 0.0)
    labels2, refs2 = [], []
    for K, L in pairs:
        labels2.append({"K": _one_based(subs[K]), "L": _one_based(subs[L])})
        refs2.append(math.perm(N, r) * s2r if K == L else 0.0)

    def sub_acc(lo, hi):
        part = MomentAccumulator(())
        part.count, part.mean, part.m2 = acc.count, acc.mean[lo:hi], acc.m2[lo:hi]
        return part

    extra = {"r": r, "exhaustive": exhaustive}
    rep1 = _report("lemma1-part1", {**spec.to_dict(), **extra}, labels1, sub_acc(0, k1), refs1, z_threshold,
                   seed, samples, t0)
    rep2 = _report("lemma1-part2", {**spec.to_dict(), **extra}, labels2, sub_acc(k1, k1 + n * n), refs2,
                   z_threshold, seed, samples, t0)
    return rep1, rep2
