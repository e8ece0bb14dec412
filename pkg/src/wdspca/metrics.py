"""Reconstruction error metrics."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import kernels
from .errors import DimensionMismatch, RangeError
from .pca import DataMatrix, PcaModel, as_values, cpv, reconstruct, transform, truncate


def mse(a: np.ndarray, b: np.ndarray) -> float:
    """Mean of the squared entry-wise differences of two equal-shaped matrices."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape:
        raise DimensionMismatch(f"shapes {a.shape} and {b.shape} differ")
    if a.size == 0:
        raise DimensionMismatch("mse of empty matrices is undefined")
    return kernels.sq_diff_sum(a, b) / a.size


@dataclass(frozen=True)
class ErrorCurve:
    m_values: tuple[int, ...]
    errors: tuple[float, ...]

    def __post_init__(self) -> None:
        m = tuple(int(v) for v in self.m_values)
        e = tuple(float(v) for v in self.errors)
        if len(m) != len(e):
            raise DimensionMismatch(f"{len(m)} m values for {len(e)} errors")
        if any(b <= a for a, b in zip(m, m[1:])):
            raise RangeError("m values must be strictly increasing")
        object.__setattr__(self, "m_values", m)
        object.__setattr__(self, "errors", e)


def _check_m_values(m_values: Sequence[int], k: int) -> list[int]:
    ms = [int(m) for m in m_values]
    if any(b <= a for a, b in zip(ms, ms[1:])):
        raise RangeError("m values must be strictly increasing")
    if ms and (ms[0] < 0 or ms[-1] > k):
        raise RangeError(f"m values must lie in 0..{k}")
    return ms


def truncation_errors(model: PcaModel, data: DataMatrix | np.ndarray, m_values: Sequence[int]) -> np.ndarray:
    """MSE between ``data`` and its m-component reconstruction, for each m.

    The residual is updated in blocks (``R -= Y[:, a:b] @ U[a:b]``) as m grows,
    so sweeping every m costs one pass of matrix products instead of one full
    reconstruction per m.
    """
    ms = _check_m_values(m_values, model.n_components)
    x = as_values(data)
    if x.shape[1] != model.dim:
        raise DimensionMismatch(f"data has {x.shape[1]} columns, model expects {model.dim}")
    weights = transform(model, x)
    resid = x - model.mean
    out = np.empty(len(ms))
    done = 0
    for i, m in enumerate(ms):
        if m > done:
            resid -= weights[:, done:m] @ model.basis[done:m]
            done = m
        out[i] = kernels.sq_diff_sum(resid) / resid.size
    return out


def error_curve(model: PcaModel, data: DataMatrix | np.ndarray, m_values: Sequence[int]) -> ErrorCurve:
    errs = truncation_errors(model, data, m_values)
    return ErrorCurve(tuple(m_values), tuple(errs.tolist()))


def cpv_mse_check(model: PcaModel, data: DataMatrix | np.ndarray, m: int) -> float:
    """Gap between CPV(m)/100 and ``1 - mse(X~m, X) / mse(mean, X)`` on the training set.

    Both sides are the retained fraction of total variance, so the result should
    be at rounding level for the data the model was fitted on.
    """
    x = as_values(data)
    approx = reconstruct(model, truncate(transform(model, x), m))
    baseline = mse(np.broadcast_to(model.mean, x.shape), x)
    return abs(cpv(model, m) / 100.0 - (1.0 - mse(approx, x) / baseline))
