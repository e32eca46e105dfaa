"""Transition density estimation for Markov chains observed through noise.

The observation model is Y_i = X_i + eps_i with (X_i) a stationary Markov
chain and eps_i i.i.d. noise with known density.  The package estimates
the transition density of X on a square domain by penalized least squares
on wavelet tensor spaces, with the noise removed through Fourier division
(deconvolution) of the basis functions.
"""

__version__ = "0.1.0"

from .bench import (
    CellResult,
    MiseReport,
    RepResult,
    RunConfig,
    emit_outputs,
    mise_single,
    run_grid,
)
from .bessel import iv_scaled
from .chains import (
    KINDS,
    PAD_HINTS,
    ChainModel,
    make_chain,
    observe,
    simulate,
    stationary_density,
    true_transition,
)
from .deconv import (
    DeconvTable,
    build_table,
    default_pad,
    eval_v,
    eval_v_pair,
    v_transform,
)
from .errors import ConfigError, NoisychainError, NumericError, OutOfRangeError
from .estimator import (
    EstimatorConfig,
    RescaledSample,
    TransitionEstimate,
    build_system,
    evaluate,
    fit_model,
    grid_evaluator,
    penalty,
    penalty_value,
    plug_in_f0,
    rescale,
    scale_noise,
    select_and_estimate,
)
from .noise import (
    ORDINARY_SMOOTH,
    NoiseModel,
    char_fn,
    density,
    make_noise,
)
from .noise import sample as sample_noise
from .wavelets import (
    BasisIndex,
    WaveletBasis,
    build_basis,
    dimension,
    enumerate_model,
)

__all__ = [
    "__version__",
    "BasisIndex",
    "CellResult",
    "ChainModel",
    "ConfigError",
    "DeconvTable",
    "EstimatorConfig",
    "KINDS",
    "MiseReport",
    "NoiseModel",
    "NoisychainError",
    "NumericError",
    "ORDINARY_SMOOTH",
    "OutOfRangeError",
    "PAD_HINTS",
    "RepResult",
    "RescaledSample",
    "RunConfig",
    "TransitionEstimate",
    "WaveletBasis",
    "build_basis",
    "build_system",
    "build_table",
    "char_fn",
    "default_pad",
    "density",
    "dimension",
    "emit_outputs",
    "enumerate_model",
    "eval_v",
    "eval_v_pair",
    "evaluate",
    "fit_model",
    "grid_evaluator",
    "iv_scaled",
    "make_chain",
    "make_noise",
    "mise_single",
    "observe",
    "penalty",
    "penalty_value",
    "plug_in_f0",
    "rescale",
    "run_grid",
    "sample_noise",
    "scale_noise",
    "select_and_estimate",
    "simulate",
    "stationary_density",
    "true_transition",
    "v_transform",
]
