"""Snapshot PCA toolkit for wide registered datasets.

Fits mean-centred PCA models through the Gram matrix, samples synthetic shapes
from them, and measures dimensionality-reduction capacity with cumulative
variance and K-fold cross-validated reconstruction error.
"""

from .crossval import CrossValReport, FoldPartition, fit_fold, partition, run_crossval, run_fold
from .errors import (
    DegenerateData,
    DimensionMismatch,
    FormatError,
    NonFinite,
    ParseError,
    RangeError,
    WdsError,
)
from .kernels import BACKEND
from .metrics import ErrorCurve, cpv_mse_check, error_curve, mse
from .pca import (
    DataMatrix,
    PcaModel,
    components_for_cpv,
    cpv,
    cpv_curve,
    fit,
    reconstruct,
    transform,
    truncate,
)

__version__ = "0.1.0"
