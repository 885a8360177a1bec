"""Mergeable mean/variance accumulators for complex-valued Monte Carlo samples."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

__all__ = ["MomentAccumulator", "MCEstimate", "tree_merge"]


@dataclass
class MCEstimate:
    mean: np.ndarray
    se: np.ndarray
    count: int


class MomentAccumulator:
    """Running count, mean and sum of squared deviations ``sum |x - mean|^2``.

    Batches are reduced with a two-pass formula; accumulators combine with the
    pairwise update of Chan, Golub and LeVeque, so merging is associative up to
    rounding.
    """

    __slots__ = ("count", "mean", "m2")

    def __init__(self, shape: Sequence[int] = ()):
        self.count = 0
        self.mean = np.zeros(shape, dtype=complex)
        self.m2 = np.zeros(shape, dtype=float)

    @classmethod
    def from_batch(cls, x: np.ndarray) -> "MomentAccumulator":
        """Accumulator for ``x`` with samples along axis 0."""
        x = np.asarray(x, dtype=complex)
        acc = cls(x.shape[1:])
        if len(x) == 0:
            return acc
        acc.count = len(x)
        # componentwise sum / n keeps constant columns exact; complex division may not
        s = x.sum(axis=0)
        acc.mean = np.empty_like(s)
        acc.mean.real, acc.mean.imag = s.real / len(x), s.imag / len(x)
        dev = x - acc.mean
        acc.m2 = np.sum(dev.real**2 + dev.imag**2, axis=0)
        return acc

    def update(self, x: np.ndarray) -> "MomentAccumulator":
        self.merge(MomentAccumulator.from_batch(x))
        return self

    def merge(self, other: "MomentAccumulator") -> "MomentAccumulator":
        if other.count == 0:
            return self
        if self.count == 0:
            self.count, self.mean, self.m2 = other.count, other.mean.copy(), other.m2.copy()
            return self
        n = self.count + other.count
        delta = other.mean - self.mean
        frac = other.count / n
        self.mean = self.mean + delta * frac
        self.m2 = self.m2 + other.m2 + (delta.real**2 + delta.imag**2) * self.count * frac
        self.count = n
        return self

    def copy(self) -> "MomentAccumulator":
        acc = MomentAccumulator(self.mean.shape)
        acc.count, acc.mean, acc.m2 = self.count, self.mean.copy(), self.m2.copy()
        return acc

    @property
    def variance(self) -> np.ndarray:
        if self.count < 2:
            return np.full(self.m2.shape, np.nan)
        return self.m2 / (self.count - 1)

    @property
    def se(self) -> np.ndarray:
        return np.sqrt(self.variance / self.count)

    def estimate(self) -> MCEstimate:
        return MCEstimate(self.mean.copy(), self.se, self.count)


def tree_merge(accs: Sequence[MomentAccumulator]) -> MomentAccumulator:
    """Pairwise merge in a fixed binary tree over the given order."""
    level = [a.copy() for a in accs]
    if not level:
        raise ValueError("nothing to merge")
    while len(level) > 1:
        nxt = [level[i].merge(level[i + 1]) for i in range(0, len(level) - 1, 2)]
        if len(level) % 2:
            nxt.append(level[-1])
        level = nxt
    return level[0]
