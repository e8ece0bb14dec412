"""K-fold cross-validation of PCA reconstruction error.

For each fold the model is fitted on the other K-1 folds only; the held-out
rows are projected with the training mean and basis and reconstructed with the
first m components.  Errors are averaged over folds for every m.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import kernels
from ._fallback import counter_bits, mix64_int
from .errors import RangeError
from .metrics import truncation_errors
from .pca import DataMatrix, PcaModel, fit

_PARTITION_STREAM = 0x5041525449544E31


@dataclass(frozen=True)
class FoldPartition:
    n_subjects: int
    k_folds: int
    assignments: tuple[int, ...]
    seed: int | None = None

    def __post_init__(self) -> None:
        a = tuple(int(v) for v in self.assignments)
        if len(a) != self.n_subjects:
            raise RangeError(f"{len(a)} assignments for {self.n_subjects} subjects")
        if a and (min(a) < 0 or max(a) >= self.k_folds):
            raise RangeError(f"fold indices must lie in 0..{self.k_folds - 1}")
        if len(set(a)) != self.k_folds:
            raise RangeError("every fold must be non-empty")
        object.__setattr__(self, "assignments", a)

    def validation_indices(self, fold: int) -> np.ndarray:
        self._check_fold(fold)
        return np.flatnonzero(np.asarray(self.assignments) == fold)

    def training_indices(self, fold: int) -> np.ndarray:
        self._check_fold(fold)
        return np.flatnonzero(np.asarray(self.assignments) != fold)

    def fold_sizes(self) -> list[int]:
        return np.bincount(self.assignments, minlength=self.k_folds).tolist()

    def max_m(self) -> int:
        """Largest m every fold can use: smallest training size minus one."""
        return self.n_subjects - max(self.fold_sizes()) - 1

    def _check_fold(self, fold: int) -> None:
        if not 0 <= fold < self.k_folds:
            raise RangeError(f"fold {fold} outside 0..{self.k_folds - 1}")


def _shuffled(n: int, seed: int) -> list[int]:
    # Fisher-Yates driven by the counter hash, so the order is portable
    key = mix64_int((seed & 0xFFFFFFFFFFFFFFFF) ^ _PARTITION_STREAM)
    bits = counter_bits(key, np.arange(n, dtype=np.uint64), np.zeros(1, dtype=np.uint64))[:, 0].tolist()
    perm = list(range(n))
    for i in range(n - 1, 0, -1):
        j = (bits[i] * (i + 1)) >> 64
        perm[i], perm[j] = perm[j], perm[i]
    return perm


def partition(n: int, k: int, seed: int = 0, shuffle: bool = True) -> FoldPartition:
    """Split ``n`` subjects into ``k`` folds whose sizes differ by at most one.

    With ``shuffle`` the subjects are permuted (seeded) and dealt round-robin;
    without it folds are contiguous index blocks, larger folds first.
    """
    if k < 2 or k > n:
        raise RangeError(f"need 2 <= k <= n, got k={k}, n={n}")
    if shuffle:
        assignments = [0] * n
        for pos, subject in enumerate(_shuffled(n, seed)):
            assignments[subject] = pos % k
    else:
        sizes = [n // k + (1 if f < n % k else 0) for f in range(k)]
        assignments = np.repeat(np.arange(k), sizes).tolist()
    return FoldPartition(n, k, tuple(assignments), seed if shuffle else None)


def fit_fold(data: DataMatrix, part: FoldPartition, fold: int) -> PcaModel:
    """Model trained on every row outside ``fold``."""
    return fit(data.values[part.training_indices(fold)])


def _errors_at(model: PcaModel, x: np.ndarray, m_values: list[int]) -> np.ndarray:
    # components beyond the fitted rank carry zero variance: clamp m to k
    eff = [min(m, model.n_components) for m in m_values]
    uniq = sorted(set(eff))
    errs = truncation_errors(model, x, uniq)
    lookup = dict(zip(uniq, errs))
    return np.array([lookup[m] for m in eff])


def run_fold(
    data: DataMatrix, part: FoldPartition, fold: int, m_values: Sequence[int]
) -> tuple[np.ndarray, np.ndarray]:
    """Training and validation MSE of ``fold`` for each m in ``m_values``."""
    ms = [int(m) for m in m_values]
    train_idx = part.training_indices(fold)
    val_idx = part.validation_indices(fold)
    if any(b <= a for a, b in zip(ms, ms[1:])):
        raise RangeError("m values must be strictly increasing")
    if ms and (ms[0] < 0 or ms[-1] >= len(train_idx)):
        raise RangeError(f"m values must lie in 0..{len(train_idx) - 1} for fold {fold}")
    x_train = data.values[train_idx]
    model = fit(x_train)
    return _errors_at(model, x_train, ms), _errors_at(model, data.values[val_idx], ms)


@dataclass(frozen=True)
class CrossValReport:
    """Per-fold errors, shape ``(K, len(m_values))``, plus fold averages."""

    m_values: tuple[int, ...]
    train_mse: np.ndarray
    val_mse: np.ndarray
    partition: FoldPartition | None = field(default=None, compare=False)

    @property
    def k_folds(self) -> int:
        return self.train_mse.shape[0]

    @property
    def mean_train_mse(self) -> np.ndarray:
        return self.train_mse.mean(axis=0)

    @property
    def mean_val_mse(self) -> np.ndarray:
        return self.val_mse.mean(axis=0)


def run_crossval(
    data: DataMatrix,
    k: int,
    seed: int = 0,
    m_values: Sequence[int] | None = None,
    shuffle: bool = True,
    workers: int | None = None,
) -> CrossValReport:
    """Run all K folds; ``m_values`` defaults to every m in 0..max_m."""
    part = partition(data.n_rows, k, seed, shuffle=shuffle)
    if m_values is None:
        m_values = range(part.max_m() + 1)
    ms = [int(m) for m in m_values]
    if ms and ms[-1] > part.max_m():
        raise RangeError(f"m={ms[-1]} exceeds the smallest training set size minus one ({part.max_m()})")
    workers = kernels.thread_count() if workers is None else max(1, int(workers))

    def one(fold: int) -> tuple[np.ndarray, np.ndarray]:
        return run_fold(data, part, fold, ms)

    if workers == 1:
        results = [one(f) for f in range(k)]
    else:
        with ThreadPoolExecutor(max_workers=min(workers, k)) as pool:
            results = list(pool.map(one, range(k)))
    train = np.array([r[0] for r in results]).reshape(k, len(ms))
    val = np.array([r[1] for r in results]).reshape(k, len(ms))
    return CrossValReport(tuple(ms), train, val, part)


def emit_report(report: CrossValReport, path: str | os.PathLike) -> None:
    from .io import write_report

    write_report(path, report)
