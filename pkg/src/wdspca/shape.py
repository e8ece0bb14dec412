"""Registered ear point clouds as PCA rows, Gaussian shape sampling, mesh export.

A cloud of ``n_v`` vertices flattens to the interleaved row
``[x1, y1, z1, x2, y2, z2, ...]``.  Clouds are assumed registered (same vertex
count, consistent indexing), size-normalised and rigidly aligned already.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import kernels
from .errors import DimensionMismatch, IndexOutOfRange, NonFinite, ParseError, RangeError
from .pca import DataMatrix, PcaModel, reconstruct

N_VERTICES = 18176
N_FACES = 35750

_ROWS_PER_TASK = 4096


def flatten_cloud(cloud: np.ndarray) -> np.ndarray:
    cloud = np.asarray(cloud, dtype=np.float64)
    if cloud.ndim != 2 or cloud.shape[1] != 3:
        raise DimensionMismatch(f"point cloud must be (n_v, 3), got {cloud.shape}")
    if not np.all(np.isfinite(cloud)):
        raise NonFinite("point cloud contains NaN or Inf")
    return cloud.reshape(-1).copy()


def unflatten_cloud(row: np.ndarray) -> np.ndarray:
    row = np.asarray(row, dtype=np.float64)
    if row.ndim != 1 or row.shape[0] % 3:
        raise DimensionMismatch(f"row length {row.shape} is not a multiple of 3")
    return row.reshape(-1, 3).copy()


def clouds_to_data_matrix(clouds, subject_ids=None) -> DataMatrix:
    return DataMatrix(np.stack([flatten_cloud(c) for c in clouds]), subject_ids)


def validate_topology(faces: np.ndarray, n_vertices: int) -> np.ndarray:
    faces = np.asarray(faces)
    if faces.ndim != 2 or faces.shape[1] != 3:
        raise DimensionMismatch(f"faces must be (n_faces, 3), got {faces.shape}")
    faces = faces.astype(np.int64)
    if faces.size and (faces.min() < 0 or faces.max() >= n_vertices):
        bad = int(np.argmax((faces < 0).any(axis=1) | (faces >= n_vertices).any(axis=1)))
        raise IndexOutOfRange(f"face {bad} {faces[bad].tolist()} references a vertex outside 0..{n_vertices - 1}")
    degenerate = (faces[:, 0] == faces[:, 1]) | (faces[:, 1] == faces[:, 2]) | (faces[:, 0] == faces[:, 2])
    if degenerate.any():
        bad = int(np.argmax(degenerate))
        raise RangeError(f"face {bad} {faces[bad].tolist()} repeats a vertex")
    return faces


def draw_weights(model: PcaModel, n: int, seed: int, workers: int | None = None) -> np.ndarray:
    """Draw ``n`` weight rows, entry (j, i) ~ N(0, variances[i]).

    Each entry is a pure function of ``(seed, j, i)`` (a counter-based hash fed
    through the normal quantile), so the result does not depend on ``workers``
    or on how rows are split.
    """
    if n < 0:
        raise RangeError(f"sample count must be >= 0, got {n}")
    seed = int(seed) & 0xFFFFFFFFFFFFFFFF
    scales = np.sqrt(model.variances)
    workers = kernels.thread_count() if workers is None else max(1, int(workers))
    starts = list(range(0, n, _ROWS_PER_TASK))
    if workers == 1 or len(starts) <= 1:
        return kernels.normal_block(seed, 0, n, scales)

    def block(start: int) -> np.ndarray:
        return kernels.normal_block(seed, start, min(_ROWS_PER_TASK, n - start), scales)

    with ThreadPoolExecutor(max_workers=workers) as pool:
        return np.concatenate(list(pool.map(block, starts)), axis=0)


def synthesize_shapes(model: PcaModel, weights: np.ndarray) -> np.ndarray:
    """Flattened synthetic clouds ``weights @ basis + mean``."""
    return reconstruct(model, weights)


@dataclass(frozen=True)
class ShapeSampleBatch:
    weights: np.ndarray
    shapes: DataMatrix
    seed: int


def sample_shapes(model: PcaModel, n: int, seed: int, workers: int | None = None) -> ShapeSampleBatch:
    w = draw_weights(model, n, seed, workers=workers)
    ids = tuple(f"synthetic-{j}" for j in range(n))
    return ShapeSampleBatch(weights=w, shapes=DataMatrix(synthesize_shapes(model, w).reshape(n, model.dim), ids), seed=seed)


def distance_to_mean(model: PcaModel, shape: np.ndarray) -> np.ndarray:
    """Per-vertex Euclidean distance between ``shape`` and the model mean."""
    shape = np.asarray(shape, dtype=np.float64).reshape(-1)
    if shape.shape[0] != model.dim or model.dim % 3:
        raise DimensionMismatch(f"shape length {shape.shape[0]} does not match model dim {model.dim}")
    diff = (shape - model.mean).reshape(-1, 3)
    return np.sqrt(np.einsum("ij,ij->i", diff, diff))


def _atomic_text(path: Path, text: str) -> None:
    from .io import atomic_open

    with atomic_open(path, binary=False) as fh:
        fh.write(text)


def export_mesh(
    path: str | os.PathLike,
    cloud: np.ndarray,
    faces: np.ndarray,
    scalars: np.ndarray | None = None,
) -> tuple[Path, Path | None]:
    """Write a Wavefront OBJ (1-based faces); scalars go to ``<stem>.scalars.csv``.

    Returns the mesh path and the sidecar path (None when no scalars given).
    """
    cloud = np.asarray(cloud, dtype=np.float64)
    if cloud.ndim != 2 or cloud.shape[1] != 3:
        raise DimensionMismatch(f"point cloud must be (n_v, 3), got {cloud.shape}")
    if not np.all(np.isfinite(cloud)):
        raise NonFinite("point cloud contains NaN or Inf")
    faces = validate_topology(faces, cloud.shape[0])
    path = Path(path)

    lines = [f"# {cloud.shape[0]} vertices, {faces.shape[0]} faces"]
    lines += [f"v {x:.17g} {y:.17g} {z:.17g}" for x, y, z in cloud.tolist()]
    lines += [f"f {a + 1} {b + 1} {c + 1}" for a, b, c in faces.tolist()]
    _atomic_text(path, "\n".join(lines) + "\n")

    sidecar = None
    if scalars is not None:
        scalars = np.asarray(scalars, dtype=np.float64).reshape(-1)
        if scalars.shape[0] != cloud.shape[0]:
            raise DimensionMismatch(f"{scalars.shape[0]} scalars for {cloud.shape[0]} vertices")
        sidecar = path.with_suffix(".scalars.csv")
        body = "".join(f"{i},{v:.17g}\n" for i, v in enumerate(scalars.tolist()))
        _atomic_text(sidecar, "vertex_index,value\n" + body)
    return path, sidecar


def read_obj(path: str | os.PathLike) -> tuple[np.ndarray, np.ndarray]:
    """Read vertices and triangular faces (0-based) from an OBJ file."""
    verts, faces = [], []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            parts = line.split()
            if not parts or parts[0].startswith("#"):
                continue
            try:
                if parts[0] == "v":
                    verts.append([float(t) for t in parts[1:4]])
                elif parts[0] == "f":
                    if len(parts) != 4:
                        raise ParseError("only triangular faces are supported", row=lineno)
                    faces.append([int(t.split("/")[0]) - 1 for t in parts[1:4]])
            except ValueError as exc:
                raise ParseError(str(exc), row=lineno) from None
    cloud = np.array(verts, dtype=np.float64).reshape(-1, 3)
    return cloud, validate_topology(np.array(faces, dtype=np.int64).reshape(-1, 3), cloud.shape[0])
