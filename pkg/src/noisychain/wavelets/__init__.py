from .basis import (
    BasisIndex,
    WaveletBasis,
    build_basis,
    dimension,
    enumerate_model,
    eval_basis,
    refinement_matrix,
)
from .filters import daubechies_filter, filter_system, wavelet_filter

__all__ = [
    "BasisIndex",
    "WaveletBasis",
    "build_basis",
    "dimension",
    "enumerate_model",
    "eval_basis",
    "refinement_matrix",
    "daubechies_filter",
    "filter_system",
    "wavelet_filter",
]
