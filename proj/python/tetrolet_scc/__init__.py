"""Tetrolet transform, sparse concept coding and handwritten character recognition."""

from ._core import (
    ConvergeFailure,
    CorruptPyramid,
    FormatError,
    Model,
    Pyramid,
    PyramidLevel,
    accuracy,
    bits_per_symbol,
    coverings,
    cross_validate,
    deserialize_pyramid,
    forward,
    inverse,
    lasso_encode,
    learn_basis,
    load_dataset,
    normalize,
    score,
    shrink,
    side_info_cost,
    spectral_embedding,
)

__all__ = [
    "ConvergeFailure",
    "CorruptPyramid",
    "FormatError",
    "Model",
    "Pyramid",
    "PyramidLevel",
    "accuracy",
    "bits_per_symbol",
    "coverings",
    "cross_validate",
    "deserialize_pyramid",
    "forward",
    "inverse",
    "lasso_encode",
    "learn_basis",
    "load_dataset",
    "normalize",
    "score",
    "shrink",
    "side_info_cost",
    "spectral_embedding",
]
