"""Non-Hermitian random matrix ensembles, spectral statistics, and sum-rule checks."""

__version__ = "0.1.0"

from .ensembles import (
    FieldClass,
    EnsembleSpec,
    ComplexMatrixBuffer,
    EigenvalueCloud,
    sample_matrix,
    sample_cloud,
    iter_clouds,
)
from .rng import rng_stream, RNG_ALGORITHM

__all__ = [
    "FieldClass",
    "EnsembleSpec",
    "ComplexMatrixBuffer",
    "EigenvalueCloud",
    "sample_matrix",
    "sample_cloud",
    "iter_clouds",
    "rng_stream",
    "RNG_ALGORITHM",
    "__version__",
]
