"""Wigner-matrix sampling with counter-based, per-sample reproducible streams.

Every sample ``i`` owns a fixed window of the Philox counter space keyed by the
master seed, so its matrices are a pure function of ``(master_seed, i, spec)``
and any contiguous range of samples can be drawn in one call. All entry laws
are built from raw 64-bit words with a fixed word budget per entry (two words),
which is what keeps per-sample and bulk draws bit-identical.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

__all__ = [
    "DIST_TAGS",
    "EntryDistribution",
    "EnsembleSpec",
    "SeedPolicy",
    "MomentReport",
    "parse_dist",
    "parse_dists",
    "sample_matrix",
    "sample_product_chain",
    "sample_chains",
    "sample_hermitian_batch",
    "stream_words",
    "moment_selfcheck",
]

WORDS_PER_ENTRY = 2
_BLOCK = 4  # Philox4x64 emits four words per counter value

DIST_TAGS = (
    "real-gaussian",
    "complex-gaussian",
    "rademacher",
    "real-uniform",
    "complex-fourth-root",
    "two-point-asymmetric",
    "const",
)

_ALIASES = {
    "gaussian": "real-gaussian",
    "gaussian-r": "real-gaussian",
    "goe": "real-gaussian",
    "gaussian-c": "complex-gaussian",
    "ginibre-c": "complex-gaussian",
    "uniform": "real-uniform",
    "fourth-root": "complex-fourth-root",
    "two-point": "two-point-asymmetric",
}

_COMPLEX_TAGS = {"complex-gaussian", "complex-fourth-root"}


@dataclass(frozen=True)
class EntryDistribution:
    """Zero-mean entry law with ``E|x|^2 = variance``.

    ``two-point-asymmetric`` takes raw support ``(a, b)`` with ``P(a) = p``;
    ``p*a + (1-p)*b`` must vanish and the support is rescaled analytically to
    the requested variance. ``const`` (every entry equal to ``value``) is a
    deterministic test hook, not a Wigner law.
    """

    tag: str
    variance: float = 1.0
    a: float = 2.0
    b: float = -1.0
    p: float = 1.0 / 3.0
    value: float = 1.0

    def __post_init__(self):
        tag = _ALIASES.get(self.tag, self.tag)
        if tag not in DIST_TAGS:
            raise ValueError(f"unknown distribution tag {self.tag!r}")
        object.__setattr__(self, "tag", tag)
        if tag != "const" and not self.variance > 0:
            raise ValueError("variance must be positive")
        if tag == "two-point-asymmetric":
            if not 0 < self.p < 1 or self.a == self.b:
                raise ValueError("two-point law needs 0 < p < 1 and a != b")
            mean = self.p * self.a + (1 - self.p) * self.b
            if abs(mean) > 1e-12 * max(abs(self.a), abs(self.b)):
                raise ValueError(f"two-point law has nonzero mean {mean}")

    @property
    def sigma(self) -> float:
        return math.sqrt(self.variance)

    @property
    def is_complex(self) -> bool:
        return self.tag in _COMPLEX_TAGS

    @property
    def is_wigner(self) -> bool:
        return self.tag != "const"

    def raw_second_moment(self) -> float:
        if self.tag == "two-point-asymmetric":
            return self.p * self.a**2 + (1 - self.p) * self.b**2
        return 1.0

    def transform(self, words: np.ndarray) -> np.ndarray:
        """Map ``(..., 2)`` uint64 words to entries of shape ``(...)``."""
        w0, w1 = words[..., 0], words[..., 1]
        s = self.sigma
        tag = self.tag
        if tag == "real-gaussian":
            u1, u2 = _unit(w0), _unit(w1)
            return s * np.sqrt(-2.0 * np.log(u1)) * np.cos(2.0 * np.pi * u2)
        if tag == "complex-gaussian":
            # |x|^2 ~ Exp(1) times a uniform phase: re, im i.i.d. N(0, 1/2)
            u1, u2 = _unit(w0), _unit(w1)
            return s * np.sqrt(-np.log(u1)) * np.exp(2j * np.pi * u2)
        if tag == "rademacher":
            return np.where((w0 >> np.uint64(63)) == 1, s, -s)
        if tag == "real-uniform":
            return s * math.sqrt(3.0) * (2.0 * _unit(w0) - 1.0)
        if tag == "complex-fourth-root":
            roots = s * np.array([1.0, 1j, -1.0, -1j])
            return roots[(w0 >> np.uint64(62)).astype(np.intp)]
        if tag == "two-point-asymmetric":
            scale = s / math.sqrt(self.raw_second_moment())
            return np.where(_unit(w0) < self.p, scale * self.a, scale * self.b)
        return np.full(w0.shape, float(self.value))

    def spec_string(self) -> str:
        if self.tag == "const":
            return f"const:{self.value!r}"
        if self.tag == "two-point-asymmetric":
            return f"two-point-asymmetric:{self.variance!r}:{self.a!r}:{self.b!r}:{self.p!r}"
        return f"{self.tag}:{self.variance!r}"


def _unit(w: np.ndarray) -> np.ndarray:
    # 53 random bits mapped to the open interval (0, 1)
    return ((w >> np.uint64(11)).astype(np.float64) + 0.5) * (1.0 / 9007199254740992.0)


def parse_dist(text: str) -> EntryDistribution:
    """Parse ``tag[:variance]``; ``const:VALUE``; ``two-point:VAR:A:B:P``."""
    parts = text.strip().split(":")
    tag = _ALIASES.get(parts[0].strip().lower(), parts[0].strip().lower())
    if tag not in DIST_TAGS:
        raise ValueError(f"unknown distribution tag {parts[0]!r}")
    nums = [float(x) for x in parts[1:]]
    if tag == "const":
        if len(nums) != 1:
            raise ValueError("const needs exactly one value, e.g. const:2")
        return EntryDistribution("const", value=nums[0])
    if tag == "two-point-asymmetric":
        if len(nums) not in (1, 4):
            raise ValueError("two-point law is two-point:VAR or two-point:VAR:A:B:P")
        if len(nums) == 1:
            return EntryDistribution(tag, variance=nums[0])
        return EntryDistribution(tag, variance=nums[0], a=nums[1], b=nums[2], p=nums[3])
    if len(nums) > 1:
        raise ValueError(f"{tag} takes a single variance, got {text!r}")
    return EntryDistribution(tag, variance=nums[0] if nums else 1.0)


def parse_dists(text: str, M: int) -> list[EntryDistribution]:
    """Comma-separated per-factor laws; a single law is replicated ``M`` times."""
    items = [parse_dist(t) for t in text.split(",") if t.strip()]
    if not items:
        raise ValueError("empty distribution spec")
    if len(items) == 1:
        return items * M
    if len(items) != M:
        raise ValueError(f"got {len(items)} distributions for M={M} factors")
    return items


@dataclass(frozen=True)
class EnsembleSpec:
    N: int
    M: int
    dists: tuple[EntryDistribution, ...]
    hermitian_single: bool = False
    diag_variance_factor: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "dists", tuple(self.dists))
        if self.N < 1 or self.M < 1:
            raise ValueError("N and M must be positive")
        if len(self.dists) != self.M:
            raise ValueError(f"need {self.M} distributions, got {len(self.dists)}")
        if self.hermitian_single and self.M != 1:
            raise ValueError("hermitian_single requires M == 1")
        if not self.diag_variance_factor > 0:
            raise ValueError("diag_variance_factor must be positive")

    @classmethod
    def uniform(cls, N: int, M: int, dist: EntryDistribution, **kw) -> "EnsembleSpec":
        return cls(N, M, (dist,) * M, **kw)

    @property
    def sigmas(self) -> list[float]:
        return [d.sigma for d in self.dists]

    @property
    def is_complex(self) -> bool:
        return any(d.is_complex for d in self.dists)

    @property
    def words_per_sample(self) -> int:
        return self.M * self.N * self.N * WORDS_PER_ENTRY

    def to_dict(self) -> dict:
        return {
            "N": self.N,
            "M": self.M,
            "dists": [d.spec_string() for d in self.dists],
            "hermitian_single": self.hermitian_single,
            "diag_variance_factor": self.diag_variance_factor,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "EnsembleSpec":
        return cls(
            N=int(d["N"]),
            M=int(d["M"]),
            dists=tuple(parse_dist(s) for s in d["dists"]),
            hermitian_single=bool(d.get("hermitian_single", False)),
            diag_variance_factor=float(d.get("diag_variance_factor", 1.0)),
        )


def _key(master_seed: int) -> np.ndarray:
    return np.random.SeedSequence(int(master_seed) & (2**64 - 1)).generate_state(2, np.uint64)


def _blocks(n_words: int) -> int:
    return -(-n_words // _BLOCK)


def stream_words(master_seed: int, start: int, count: int, words_per_item: int, stream: int = 0) -> np.ndarray:
    """Raw words for items ``start .. start+count-1`` of one stream.

    Item ``i`` always occupies Philox counters ``[i*b, (i+1)*b)`` with
    ``b = ceil(words_per_item / 4)``, so the result for any item does not depend
    on how the range was split. Returns shape ``(count, words_per_item)``.
    """
    if start < 0 or count < 0:
        raise ValueError("start and count must be nonnegative")
    b = _blocks(words_per_item)
    counter = np.array([start * b, 0, int(stream), 0], dtype=np.uint64)
    gen = np.random.Philox(key=_key(master_seed), counter=counter)
    raw = gen.random_raw(count * b * _BLOCK)
    return raw.reshape(count, b * _BLOCK)[:, :words_per_item]


@dataclass(frozen=True)
class SeedPolicy:
    """Identifies the stream of one sample: a pure function of the two integers."""

    master_seed: int
    sample_index: int = 0
    stream: int = 0

    def words(self, n_words: int) -> np.ndarray:
        return stream_words(self.master_seed, self.sample_index, 1, n_words, self.stream)[0]


def sample_matrix(dist: EntryDistribution, N: int, seed: SeedPolicy) -> np.ndarray:
    """One ``N x N`` matrix with i.i.d. entries, filled row-major."""
    words = seed.words(N * N * WORDS_PER_ENTRY).reshape(N, N, WORDS_PER_ENTRY)
    return dist.transform(words)


def _chains_from_words(spec: EnsembleSpec, words: np.ndarray) -> np.ndarray:
    N, M = spec.N, spec.M
    w = words.reshape(words.shape[0], M, N, N, WORDS_PER_ENTRY)
    dtype = complex if spec.is_complex else float
    out = np.empty((words.shape[0], M, N, N), dtype=dtype)
    for k, d in enumerate(spec.dists):
        out[:, k] = d.transform(w[:, k])
    return out


def _hermitian_from_words(spec: EnsembleSpec, words: np.ndarray) -> np.ndarray:
    N = spec.N
    dist = spec.dists[0]
    w = words.reshape(words.shape[0], N, N, WORDS_PER_ENTRY)
    raw = dist.transform(w)
    idx = np.arange(N)
    # real diagonal with variance sigma^2 (times the diagonal factor)
    if not dist.is_complex:
        diag = raw[:, idx, idx].real
    elif dist.tag == "complex-gaussian":
        diag = raw[:, idx, idx].real * math.sqrt(2.0)
    else:
        diag = EntryDistribution("rademacher", dist.variance).transform(w[:, idx, idx])
    diag = diag * math.sqrt(spec.diag_variance_factor)
    upper = np.triu(raw, 1)
    herm = upper + np.conj(np.swapaxes(upper, 1, 2))
    herm[:, idx, idx] = diag
    return herm


def sample_product_chain(spec: EnsembleSpec, seed: SeedPolicy) -> list[np.ndarray]:
    """The factor matrices ``X_1 .. X_M`` of one sample (one Hermitian matrix if ``hermitian_single``)."""
    return list(sample_chains(spec, seed.master_seed, seed.sample_index, 1, seed.stream)[0])


def sample_chains(spec: EnsembleSpec, master_seed: int, start: int, count: int, stream: int = 0) -> np.ndarray:
    """Samples ``start .. start+count-1`` as an array ``(count, M, N, N)``."""
    words = stream_words(master_seed, start, count, spec.words_per_sample, stream)
    if spec.hermitian_single:
        return _hermitian_from_words(spec, words)[:, None]
    return _chains_from_words(spec, words)


def sample_hermitian_batch(spec: EnsembleSpec, master_seed: int, start: int, count: int) -> np.ndarray:
    if not spec.hermitian_single:
        raise ValueError("spec is not a hermitian_single ensemble")
    return sample_chains(spec, master_seed, start, count)[:, 0]


@dataclass
class MomentReport:
    tag: str
    n_draws: int
    mean: complex
    mean_se: float
    abs2: float
    abs2_se: float
    pseudo: complex
    pseudo_se: float
    target_variance: float
    flags: list[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.flags


def moment_selfcheck(dist: EntryDistribution, n_draws: int, master_seed: int = 0) -> MomentReport:
    """Empirical ``E x``, ``E|x|^2`` and ``E x^2`` with standard errors."""
    if n_draws < 10_000:
        raise ValueError("moment_selfcheck needs at least 1e4 draws")
    words = stream_words(master_seed, 0, n_draws, WORDS_PER_ENTRY, stream=2**63)
    x = dist.transform(words).astype(complex)

    def mean_se(v):
        m = v.mean()
        return m, float(np.sqrt(np.mean(np.abs(v - m) ** 2) / (len(v) - 1)))

    m, m_se = mean_se(x)
    a2, a2_se = mean_se(np.abs(x) ** 2)
    ps, ps_se = mean_se(x * x)
    flags = []
    if abs(m) > 6 * m_se + 1e-12 * dist.sigma:
        flags.append(f"mean {m:.3g} exceeds 6 SE ({m_se:.3g})")
    if abs(a2.real - dist.variance) > 6 * a2_se + 1e-12 * dist.variance:
        flags.append(f"E|x|^2 {a2.real:.6g} differs from {dist.variance} by more than 6 SE")
    return MomentReport(dist.tag, n_draws, complex(m), m_se, float(a2.real), a2_se, complex(ps), ps_se,
                        dist.variance, flags)
