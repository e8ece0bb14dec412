"""Mean-centred PCA for wide data (many more columns than rows).

The model is fitted from the N x N Gram matrix of the centred rows, so memory
stays at O(N*D + N**2) even when D is in the hundreds of thousands.  Weights
are row vectors: ``Y = (X - mean) @ basis.T`` and ``X ~ Y @ basis + mean``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import DegenerateData, DimensionMismatch, NonFinite, RangeError

#: components with variance at or below this fraction of the largest are dropped
RANK_CUT = 1e-12


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=np.float64, order="C", copy=True)
    a.flags.writeable = False
    return a


@dataclass(frozen=True)
class DataMatrix:
    """Subjects as rows of an N x D float64 matrix, with optional subject labels."""

    values: np.ndarray
    subject_ids: tuple[str, ...] | None = None

    def __post_init__(self) -> None:
        v = np.array(self.values, dtype=np.float64, order="C", copy=True)
        if v.ndim == 1:
            v = v[None, :]
        if v.ndim != 2:
            raise DimensionMismatch(f"data matrix must be 2-D, got {v.ndim}-D")
        if not np.all(np.isfinite(v)):
            raise NonFinite("data matrix contains NaN or Inf")
        v.flags.writeable = False
        object.__setattr__(self, "values", v)
        if self.subject_ids is not None:
            ids = tuple(str(s) for s in self.subject_ids)
            if len(ids) != v.shape[0]:
                raise DimensionMismatch(f"{len(ids)} subject ids for {v.shape[0]} rows")
            object.__setattr__(self, "subject_ids", ids)

    @property
    def n_rows(self) -> int:
        return self.values.shape[0]

    @property
    def n_cols(self) -> int:
        return self.values.shape[1]

    def take(self, rows: Sequence[int] | np.ndarray) -> DataMatrix:
        rows = np.asarray(rows, dtype=np.intp)
        ids = None if self.subject_ids is None else tuple(self.subject_ids[i] for i in rows)
        return DataMatrix(self.values[rows], ids)


def as_values(data: DataMatrix | np.ndarray) -> np.ndarray:
    if isinstance(data, DataMatrix):
        return data.values
    return DataMatrix(data).values


@dataclass(frozen=True)
class PcaModel:
    """Fitted PCA model.

    Attributes
    ----------
    mean : (D,) array
        Column-wise average of the training rows.
    basis : (k, D) array
        Orthonormal principal directions, one per row, by decreasing variance.
    variances : (k,) array
        Eigenvalues of the ``1/(N-1)`` covariance, descending.
    """

    mean: np.ndarray
    basis: np.ndarray
    variances: np.ndarray

    def __post_init__(self) -> None:
        mean = _frozen(self.mean)
        basis = _frozen(self.basis)
        variances = _frozen(self.variances)
        if mean.ndim != 1:
            raise DimensionMismatch("mean must be a vector")
        if basis.ndim != 2 or basis.shape[1] != mean.shape[0]:
            raise DimensionMismatch(f"basis shape {basis.shape} does not match dim {mean.shape[0]}")
        if variances.shape != (basis.shape[0],):
            raise DimensionMismatch(f"{variances.shape[0]} variances for {basis.shape[0]} components")
        object.__setattr__(self, "mean", mean)
        object.__setattr__(self, "basis", basis)
        object.__setattr__(self, "variances", variances)

    @property
    def dim(self) -> int:
        return self.mean.shape[0]

    @property
    def n_components(self) -> int:
        return self.basis.shape[0]

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, PcaModel):
            return NotImplemented
        return (
            np.array_equal(self.mean, other.mean)
            and np.array_equal(self.basis, other.basis)
            and np.array_equal(self.variances, other.variances)
        )

    __hash__ = None  # type: ignore[assignment]


def sign_normalize(basis: np.ndarray) -> np.ndarray:
    """Flip rows so each row's largest-magnitude entry is positive (first index wins ties)."""
    basis = np.array(basis, dtype=np.float64)
    if basis.size == 0:
        return basis
    idx = np.argmax(np.abs(basis), axis=1)
    signs = np.where(basis[np.arange(basis.shape[0]), idx] < 0.0, -1.0, 1.0)
    return basis * signs[:, None]


def fit(data: DataMatrix | np.ndarray) -> PcaModel:
    """Fit a PCA model through the Gram matrix of the centred data.

    Raises
    ------
    DegenerateData
        If every row is identical (zero total variance).
    NonFinite
        If the input holds NaN or Inf.
    """
    x = as_values(data)
    n = x.shape[0]
    if n < 2:
        raise RangeError(f"need at least 2 rows to fit, got {n}")
    if np.all(x == x[0]):
        raise DegenerateData("all rows are identical")

    mean = x.mean(axis=0)
    xc = x - mean
    gram = (xc @ xc.T) / (n - 1)
    gram = 0.5 * (gram + gram.T)
    w, v = np.linalg.eigh(gram)
    order = np.argsort(-w, kind="stable")
    w = w[order]
    v = v[:, order]
    if not w[0] > 0.0:
        raise DegenerateData("zero total variance")
    k = int(np.count_nonzero(w > RANK_CUT * w[0]))
    k = min(k, n - 1)

    # map Gram eigenvectors to feature space, then re-orthonormalise: rounding in
    # X^T v grows as the eigenvalue shrinks, QR removes it in decreasing-variance order
    u = v[:, :k].T @ xc
    u /= np.linalg.norm(u, axis=1, keepdims=True)
    q, _ = np.linalg.qr(u.T)
    basis = sign_normalize(q.T)
    return PcaModel(mean=mean, basis=basis, variances=w[:k].copy())


def _check_dim(model: PcaModel, x: np.ndarray) -> None:
    if x.shape[1] != model.dim:
        raise DimensionMismatch(f"data has {x.shape[1]} columns, model expects {model.dim}")


def transform(model: PcaModel, data: DataMatrix | np.ndarray) -> np.ndarray:
    """Project rows onto the model basis: ``(X - mean) @ basis.T``."""
    x = np.atleast_2d(np.asarray(data.values if isinstance(data, DataMatrix) else data, dtype=np.float64))
    _check_dim(model, x)
    return (x - model.mean) @ model.basis.T


def truncate(weights: np.ndarray, m: int) -> np.ndarray:
    """Keep the first ``m`` weight columns and zero the rest."""
    weights = np.atleast_2d(np.asarray(weights, dtype=np.float64))
    k = weights.shape[1]
    if not 0 <= m <= k:
        raise RangeError(f"m={m} outside 0..{k}")
    out = np.zeros_like(weights)
    out[:, :m] = weights[:, :m]
    return out


def reconstruct(model: PcaModel, weights: np.ndarray) -> np.ndarray:
    """Map weights back to data space: ``Y @ basis + mean``."""
    weights = np.atleast_2d(np.asarray(weights, dtype=np.float64))
    if weights.shape[1] != model.n_components:
        raise DimensionMismatch(
            f"weights have {weights.shape[1]} columns, model has {model.n_components} components"
        )
    return weights @ model.basis + model.mean


def cpv(model: PcaModel, m: int) -> float:
    """Cumulative percentage of total variance carried by the first ``m`` components."""
    k = model.n_components
    if not 0 <= m <= k:
        raise RangeError(f"m={m} outside 0..{k}")
    return float(cpv_curve(model)[m])


def cpv_curve(model: PcaModel) -> np.ndarray:
    """``cpv(model, m)`` for m = 0..k, with the last entry pinned to 100."""
    c = np.concatenate([[0.0], np.cumsum(model.variances)])
    out = 100.0 * c / c[-1]
    out[-1] = 100.0
    return out


def components_for_cpv(model: PcaModel, threshold: float) -> int:
    """Smallest ``m`` whose CPV reaches ``threshold`` percent."""
    if not 0.0 < threshold <= 100.0:
        raise RangeError(f"threshold {threshold} outside (0, 100]")
    curve = cpv_curve(model)
    return int(np.argmax(curve >= threshold))
