"""Pinna-related transfer function tensors and their PCA row layout.

Values are held as ``(n_subjects, n_f, n_d)``.  A subject's row vector is
direction-major: element ``d * n_f + f``, i.e. each direction's frequency
response is one contiguous block.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, replace

import numpy as np

from .errors import (
    AlreadyLogScale,
    DimensionMismatch,
    IndexOutOfRange,
    NegativeMagnitude,
    NonFinite,
    ScaleError,
)
from .pca import DataMatrix

#: magnitudes are clipped here before the log, giving a -200 dB floor
MAGNITUDE_FLOOR = 1e-10


class Scale(enum.IntEnum):
    LINEAR = 0
    DB = 1


@dataclass(frozen=True)
class PrtfTensor:
    freqs_hz: np.ndarray
    directions: np.ndarray  # (n_d, 2): azimuth, elevation in degrees
    values: np.ndarray
    scale: Scale = Scale.DB
    subject_ids: tuple[str, ...] | None = None

    def __post_init__(self) -> None:
        freqs = np.array(self.freqs_hz, dtype=np.float64).reshape(-1)
        dirs = np.array(self.directions, dtype=np.float64)
        vals = np.array(self.values, dtype=np.float64, order="C")
        scale = Scale(self.scale)
        if dirs.ndim != 2 or dirs.shape[1] != 2:
            raise DimensionMismatch(f"directions must be (n_d, 2), got {dirs.shape}")
        if vals.ndim != 3 or vals.shape[1:] != (freqs.shape[0], dirs.shape[0]):
            raise DimensionMismatch(
                f"values shape {vals.shape} does not match (n_subjects, {freqs.shape[0]}, {dirs.shape[0]})"
            )
        if not (np.all(np.isfinite(freqs)) and np.all(np.isfinite(dirs)) and np.all(np.isfinite(vals))):
            raise NonFinite("tensor contains NaN or Inf")
        if np.any(np.diff(freqs) <= 0):
            raise DimensionMismatch("frequencies must be strictly increasing")
        if scale is Scale.LINEAR and np.any(vals < 0):
            raise NegativeMagnitude("linear-scale magnitudes must be >= 0")
        for a in (freqs, dirs, vals):
            a.flags.writeable = False
        object.__setattr__(self, "freqs_hz", freqs)
        object.__setattr__(self, "directions", dirs)
        object.__setattr__(self, "values", vals)
        object.__setattr__(self, "scale", scale)
        if self.subject_ids is not None:
            ids = tuple(str(s) for s in self.subject_ids)
            if len(ids) != vals.shape[0]:
                raise DimensionMismatch(f"{len(ids)} subject ids for {vals.shape[0]} subjects")
            object.__setattr__(self, "subject_ids", ids)

    @property
    def n_subjects(self) -> int:
        return self.values.shape[0]

    @property
    def n_freqs(self) -> int:
        return self.values.shape[1]

    @property
    def n_dirs(self) -> int:
        return self.values.shape[2]


def log_magnitude(t: PrtfTensor) -> PrtfTensor:
    """``20 * log10(max(|p|, 1e-10))`` entry-wise."""
    if t.scale is Scale.DB:
        raise AlreadyLogScale("tensor is already in dB")
    if np.any(t.values < 0):
        raise NegativeMagnitude("magnitudes must be >= 0")
    return replace(t, values=20.0 * np.log10(np.maximum(t.values, MAGNITUDE_FLOOR)), scale=Scale.DB)


def _require_db(t: PrtfTensor) -> None:
    if t.scale is not Scale.DB:
        raise ScaleError("operation needs a dB-scale tensor; apply log_magnitude first")


def flatten_prtf(t: PrtfTensor, subject: int) -> np.ndarray:
    _require_db(t)
    if not 0 <= subject < t.n_subjects:
        raise IndexOutOfRange(f"subject {subject} outside 0..{t.n_subjects - 1}")
    return t.values[subject].T.reshape(-1).copy()


def unflatten_prtf(row: np.ndarray, n_freqs: int, n_dirs: int) -> np.ndarray:
    """Inverse of :func:`flatten_prtf`: row vector back to an ``(n_f, n_d)`` spectrum set."""
    row = np.asarray(row, dtype=np.float64).reshape(-1)
    if row.shape[0] != n_freqs * n_dirs:
        raise DimensionMismatch(f"row length {row.shape[0]} != {n_freqs} * {n_dirs}")
    return row.reshape(n_dirs, n_freqs).T.copy()


def to_data_matrix(t: PrtfTensor) -> DataMatrix:
    _require_db(t)
    rows = np.ascontiguousarray(t.values.transpose(0, 2, 1)).reshape(t.n_subjects, -1)
    return DataMatrix(rows, t.subject_ids)


def from_data_matrix(data: DataMatrix, freqs_hz: np.ndarray, directions: np.ndarray) -> PrtfTensor:
    """Rebuild a dB tensor from direction-major rows."""
    nf = np.asarray(freqs_hz).reshape(-1).shape[0]
    nd = np.asarray(directions).reshape(-1, 2).shape[0]
    if data.n_cols != nf * nd:
        raise DimensionMismatch(f"{data.n_cols} columns != {nf} * {nd}")
    vals = data.values.reshape(data.n_rows, nd, nf).transpose(0, 2, 1)
    return PrtfTensor(freqs_hz, directions, vals, Scale.DB, data.subject_ids)
