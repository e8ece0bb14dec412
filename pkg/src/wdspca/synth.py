"""Synthetic low-rank datasets with a known generating model.

Rows are ``mean + sum_i w_i * s_i * u_i + noise`` with orthonormal ``u_i``,
standard normal ``w_i`` and i.i.d. ``N(0, noise_std**2)`` noise.  All draws come
from the counter-based sampler, so a spec and seed pin the bytes exactly.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import kernels
from .errors import RangeError
from .pca import DataMatrix, PcaModel, sign_normalize

_MEAN, _BASIS, _WEIGHTS, _NOISE = 1, 2, 3, 4


@dataclass(frozen=True)
class SynthSpec:
    n_rows: int
    n_cols: int
    singular_spectrum: tuple[float, ...]
    noise_std: float = 0.0
    seed: int = 0

    @property
    def rank(self) -> int:
        return len(self.singular_spectrum)

    def validate(self) -> None:
        s = self.singular_spectrum
        if self.n_rows < 1 or self.n_cols < 1:
            raise RangeError("n_rows and n_cols must be positive")
        if self.rank > min(self.n_rows - 1, self.n_cols):
            raise RangeError(f"rank {self.rank} exceeds min(n_rows - 1, n_cols) = {min(self.n_rows - 1, self.n_cols)}")
        if any(v <= 0 for v in s) or any(b > a for a, b in zip(s, s[1:])):
            raise RangeError("singular spectrum must be positive and non-increasing")
        if not self.noise_std >= 0:
            raise RangeError("noise_std must be >= 0")


def default_spectrum(rank: int) -> tuple[float, ...]:
    """``rank, rank-1, ..., 1``; used when no spectrum is supplied."""
    return tuple(float(rank - i) for i in range(rank))


def _stream(seed: int, tag: int) -> int:
    return kernels.mix64((seed & 0xFFFFFFFFFFFFFFFF) * 8 + tag)


def _gaussian(seed: int, tag: int, n_rows: int, n_cols: int) -> np.ndarray:
    return kernels.normal_block(_stream(seed, tag), 0, n_rows, np.ones(n_cols))


def generate(spec: SynthSpec) -> tuple[DataMatrix, PcaModel]:
    """Return the dataset and the exact model that generated it."""
    spec.validate()
    n, d, r = spec.n_rows, spec.n_cols, spec.rank
    mean = _gaussian(spec.seed, _MEAN, 1, d)[0]
    if r:
        q, _ = np.linalg.qr(_gaussian(spec.seed, _BASIS, d, r))
        basis = sign_normalize(q.T)
    else:
        basis = np.zeros((0, d))
    s = np.asarray(spec.singular_spectrum, dtype=np.float64)
    weights = _gaussian(spec.seed, _WEIGHTS, n, r) * s[None, :]
    x = weights @ basis + mean
    if spec.noise_std > 0:
        x = x + spec.noise_std * _gaussian(spec.seed, _NOISE, n, d)
    ids = tuple(f"synth-{i}" for i in range(n))
    return DataMatrix(x, ids), PcaModel(mean=mean, basis=basis, variances=s**2)


def make(
    n_rows: int,
    n_cols: int,
    rank: int,
    spectrum: Sequence[float] | None = None,
    noise_std: float = 0.0,
    seed: int = 0,
) -> tuple[DataMatrix, PcaModel]:
    spectrum = default_spectrum(rank) if spectrum is None else tuple(float(v) for v in spectrum)
    if len(spectrum) != rank:
        raise RangeError(f"spectrum has {len(spectrum)} entries for rank {rank}")
    return generate(SynthSpec(n_rows, n_cols, spectrum, noise_std, seed))
