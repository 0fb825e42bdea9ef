"""Equivariant tilings, a band-limited zero-placing map and flow embeddings into signal space."""

import os as _os

# FLOWEMBED_THREADS caps BLAS/OpenMP pools; it must be set before numpy loads
_threads = _os.environ.get("FLOWEMBED_THREADS")
if _threads:
    for _var in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS"):
        _os.environ.setdefault(_var, _threads)

from .errors import FlowEmbedError  # noqa: E402
from .generators import periodic_marker, random_b_signal, random_marker  # noqa: E402
from .kernel import SpectralKernel, eval_chi1, k1, make_chi1  # noqa: E402
from .phi import (PhiFunction, equivariance_defect, iterate_embedding, locate_zeros, make_phi,  # noqa: E402
                  perturb_step, phi_eval, shift_rigidity_margin, spectral_support_report)
from .signals import BandLimitedSignal, b1_to_real, fourier_leakage, metric_d, translate  # noqa: E402
from .theta import EmbeddingParams, build_params, validate_params  # noqa: E402
from .tiling import IntervalTiling, MarkerSequence, build_tiling, check_geometry  # noqa: E402

SCHEMA_VERSION = 1
__version__ = "0.1.0"

__all__ = [
    "BandLimitedSignal", "EmbeddingParams", "FlowEmbedError", "IntervalTiling", "MarkerSequence",
    "PhiFunction", "SCHEMA_VERSION", "SpectralKernel", "b1_to_real", "build_params", "build_tiling",
    "check_geometry", "equivariance_defect", "eval_chi1", "fourier_leakage", "iterate_embedding", "k1",
    "locate_zeros", "make_chi1", "make_phi", "metric_d", "periodic_marker", "perturb_step", "phi_eval",
    "random_b_signal", "random_marker", "shift_rigidity_margin", "spectral_support_report", "translate",
    "validate_params",
]
