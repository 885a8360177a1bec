"""Average characteristic polynomials of products of Wigner matrices.

Exact closed forms, Monte Carlo verification against concrete random
matrices, the large-``M`` zero asymptotics, and Lyapunov exponents.
"""

from __future__ import annotations

__version__ = "0.1.0"

from .closedform import (
    CoefficientVector,
    KernelSpec,
    LogSignValue,
    hermite_monic,
    kernel_coeffs,
    product_charpoly_coeffs,
    rescaled_P_eval,
    scaled_product_charpoly,
)
from .sampling import EnsembleSpec, EntryDistribution, parse_dist, parse_dists

__all__ = [
    "__version__",
    "CoefficientVector",
    "KernelSpec",
    "LogSignValue",
    "EnsembleSpec",
    "EntryDistribution",
    "hermite_monic",
    "kernel_coeffs",
    "parse_dist",
    "parse_dists",
    "product_charpoly_coeffs",
    "rescaled_P_eval",
    "scaled_product_charpoly",
]
