"""x-vector speaker verification toolkit: Python bindings."""

from ._core import (
    GRADIENT_TOLERANCE,
    NumericError,
    XvecError,
    command_names,
    compute_eer,
    compute_min_dcf,
    gradient_suite,
    length_normalize,
    normalize_config,
    plda_score,
    read_embeddings,
    run_command,
)

__all__ = [
    "GRADIENT_TOLERANCE",
    "NumericError",
    "XvecError",
    "command_names",
    "compute_eer",
    "compute_min_dcf",
    "gradient_suite",
    "length_normalize",
    "normalize_config",
    "plda_score",
    "read_embeddings",
    "run_command",
]
