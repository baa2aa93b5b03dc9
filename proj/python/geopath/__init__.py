"""Geo-conditioned dynamic inference-path selection: python surface.

Thin wrapper over the C++ core. The heavy lifting (training, evaluation,
the CLI) lives in the native library; this module exposes the value-level
operations for scripting and analysis.
"""

from ._geopath import (
    __version__,
    decode_geo,
    diversity,
    encode_geo,
    generate_dataset,
    greedy_policy,
    hamming_norm,
    log_likelihood,
    max_unique,
    normalize_geo,
    reward,
    sample_policy,
    unique_policies,
    uniqueness,
)

__all__ = [
    "__version__",
    "decode_geo",
    "diversity",
    "encode_geo",
    "generate_dataset",
    "greedy_policy",
    "hamming_norm",
    "log_likelihood",
    "max_unique",
    "normalize_geo",
    "reward",
    "sample_policy",
    "unique_policies",
    "uniqueness",
]
