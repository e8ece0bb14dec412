"""Binary containers and CSV readers/writers.

All binary formats are little-endian float64 with a 4-byte magic and a u32
format version; byte layouts are listed in ``docs/FORMATS.md``.  Readers parse
the whole buffer and validate it before building any object, so a malformed
file never yields a partially populated result.  Writers go through a temp
file in the target directory and rename on success.
"""

from __future__ import annotations

import contextlib
import csv
import io as _stdio
import os
import struct
import tempfile
from pathlib import Path
from typing import Iterator

import numpy as np

from .crossval import CrossValReport, FoldPartition
from .errors import FormatError, IoError, ParseError, WdsError
from .metrics import ErrorCurve
from .pca import DataMatrix, PcaModel
from .prtf import PrtfTensor, Scale

VERSION = 1
MATRIX_MAGIC = b"WDSM"
MODEL_MAGIC = b"WDSP"
TENSOR_MAGIC = b"WDST"

_F64 = np.dtype("<f8")


@contextlib.contextmanager
def atomic_open(path: str | os.PathLike, binary: bool = True) -> Iterator:
    path = Path(path)
    try:
        fd, tmp = tempfile.mkstemp(prefix=f".{path.name}.", suffix=".tmp", dir=path.parent or ".")
    except OSError as exc:
        raise IoError(f"cannot write {path}: {exc.strerror or exc}") from exc
    try:
        with os.fdopen(fd, "wb" if binary else "w", **({} if binary else {"encoding": "utf-8", "newline": ""})) as fh:
            yield fh
        os.replace(tmp, path)
    except BaseException as exc:
        with contextlib.suppress(OSError):
            os.unlink(tmp)
        if isinstance(exc, OSError) and not isinstance(exc, WdsError):
            raise IoError(f"cannot write {path}: {exc.strerror or exc}") from exc
        raise


def _read_bytes(path: str | os.PathLike) -> bytes:
    try:
        return Path(path).read_bytes()
    except OSError as exc:
        raise IoError(f"cannot read {path}: {exc.strerror or exc}") from exc


class _Reader:
    def __init__(self, buf: bytes, what: str):
        self.buf = buf
        self.pos = 0
        self.what = what

    def take(self, n: int) -> bytes:
        if n < 0 or self.pos + n > len(self.buf):
            raise FormatError(f"{self.what}: truncated (need {n} bytes at offset {self.pos}, have {len(self.buf) - self.pos})")
        out = self.buf[self.pos:self.pos + n]
        self.pos += n
        return out

    def u8(self) -> int:
        return self.take(1)[0]

    def u32(self) -> int:
        return struct.unpack("<I", self.take(4))[0]

    def u64(self) -> int:
        return struct.unpack("<Q", self.take(8))[0]

    def f64(self, count: int) -> np.ndarray:
        if count > (len(self.buf) - self.pos) // 8:
            raise FormatError(f"{self.what}: declared {count} floats but only {(len(self.buf) - self.pos) // 8} remain")
        return np.frombuffer(self.take(8 * count), dtype=_F64).astype(np.float64)

    def header(self, magic: bytes) -> None:
        got = self.take(4)
        if got != magic:
            raise FormatError(f"{self.what}: bad magic {got!r}, expected {magic!r}")
        version = self.u32()
        if version != VERSION:
            raise FormatError(f"{self.what}: unsupported version {version}")

    def at_end(self) -> bool:
        return self.pos == len(self.buf)

    def finish(self) -> None:
        if not self.at_end():
            raise FormatError(f"{self.what}: {len(self.buf) - self.pos} trailing bytes")


def _f64_bytes(a: np.ndarray) -> bytes:
    return np.ascontiguousarray(a, dtype=_F64).tobytes()


def _wrap(fn, what: str):
    # turn constructor validation failures into FormatError (fail closed)
    try:
        return fn()
    except FormatError:
        raise
    except (WdsError, ValueError) as exc:
        raise FormatError(f"{what}: invalid payload: {exc}") from exc


# --- data matrix -------------------------------------------------------------

def matrix_to_bytes(m: DataMatrix) -> bytes:
    parts = [MATRIX_MAGIC, struct.pack("<IQQ", VERSION, m.n_rows, m.n_cols), _f64_bytes(m.values)]
    if m.subject_ids is None:
        parts.append(b"\x00")
    else:
        parts.append(b"\x01")
        for label in m.subject_ids:
            raw = label.encode("utf-8")
            parts.append(struct.pack("<I", len(raw)) + raw)
    return b"".join(parts)


def matrix_from_bytes(buf: bytes) -> DataMatrix:
    r = _Reader(buf, "matrix")
    r.header(MATRIX_MAGIC)
    n, d = r.u64(), r.u64()
    values = r.f64(n * d).reshape(n, d)
    ids = None
    if not r.at_end():
        flag = r.u8()
        if flag == 1:
            labels = []
            for _ in range(n):
                raw = r.take(r.u32())
                try:
                    labels.append(raw.decode("utf-8"))
                except UnicodeDecodeError as exc:
                    raise FormatError(f"matrix: subject id is not UTF-8: {exc}") from None
            ids = tuple(labels)
        elif flag != 0:
            raise FormatError(f"matrix: bad id-block flag {flag}")
    r.finish()
    return _wrap(lambda: DataMatrix(values, ids), "matrix")


def write_matrix(path: str | os.PathLike, m: DataMatrix) -> None:
    payload = matrix_to_bytes(m)
    with atomic_open(path) as fh:
        fh.write(payload)


def read_matrix(path: str | os.PathLike) -> DataMatrix:
    return matrix_from_bytes(_read_bytes(path))


# --- PCA model ---------------------------------------------------------------

def model_to_bytes(model: PcaModel) -> bytes:
    return b"".join([
        MODEL_MAGIC,
        struct.pack("<IQQ", VERSION, model.dim, model.n_components),
        _f64_bytes(model.mean),
        _f64_bytes(model.variances),
        _f64_bytes(model.basis),
    ])


def _check_model(mean: np.ndarray, variances: np.ndarray, basis: np.ndarray) -> PcaModel:
    if not (np.all(np.isfinite(mean)) and np.all(np.isfinite(variances)) and np.all(np.isfinite(basis))):
        raise FormatError("model: non-finite values")
    if np.any(variances < 0) or np.any(np.diff(variances) > 0):
        raise FormatError("model: variances must be non-negative and descending")
    return PcaModel(mean=mean, basis=basis, variances=variances)


def model_from_bytes(buf: bytes) -> PcaModel:
    r = _Reader(buf, "model")
    r.header(MODEL_MAGIC)
    d, k = r.u64(), r.u64()
    mean = r.f64(d)
    variances = r.f64(k)
    basis = r.f64(k * d).reshape(k, d)
    r.finish()
    return _wrap(lambda: _check_model(mean, variances, basis), "model")


def write_model(path: str | os.PathLike, model: PcaModel) -> None:
    payload = model_to_bytes(model)
    with atomic_open(path) as fh:
        fh.write(payload)


def read_model(path: str | os.PathLike) -> PcaModel:
    return model_from_bytes(_read_bytes(path))


# --- PRTF tensor -------------------------------------------------------------

def tensor_to_bytes(t: PrtfTensor) -> bytes:
    return b"".join([
        TENSOR_MAGIC,
        struct.pack("<IBQQQ", VERSION, int(t.scale), t.n_subjects, t.n_freqs, t.n_dirs),
        _f64_bytes(t.freqs_hz),
        _f64_bytes(t.directions),
        # file order is subject, direction, frequency
        _f64_bytes(t.values.transpose(0, 2, 1)),
    ])


def tensor_from_bytes(buf: bytes) -> PrtfTensor:
    r = _Reader(buf, "tensor")
    r.header(TENSOR_MAGIC)
    flag = r.u8()
    if flag not in (0, 1):
        raise FormatError(f"tensor: bad scale flag {flag}")
    s, nf, nd = r.u64(), r.u64(), r.u64()
    freqs = r.f64(nf)
    dirs = r.f64(nd * 2).reshape(nd, 2)
    values = r.f64(s * nd * nf).reshape(s, nd, nf).transpose(0, 2, 1)
    r.finish()
    return _wrap(lambda: PrtfTensor(freqs, dirs, values, Scale(flag)), "tensor")


def write_tensor(path: str | os.PathLike, t: PrtfTensor) -> None:
    payload = tensor_to_bytes(t)
    with atomic_open(path) as fh:
        fh.write(payload)


def read_tensor(path: str | os.PathLike) -> PrtfTensor:
    return tensor_from_bytes(_read_bytes(path))


# --- CSV ---------------------------------------------------------------------

def _fmt(x: float) -> str:
    return f"{x:.17g}"


def _read_text(path: str | os.PathLike) -> str:
    try:
        return Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise IoError(f"cannot read {path}: {exc.strerror or exc}") from exc
    except UnicodeDecodeError as exc:
        raise ParseError(f"{path} is not UTF-8 text") from exc


def _csv_rows(text: str) -> list[tuple[int, list[str]]]:
    return [(i, [c.strip() for c in row]) for i, row in enumerate(csv.reader(_stdio.StringIO(text)), start=1) if row and any(c.strip() for c in row)]


def _is_number(cell: str) -> bool:
    try:
        float(cell)
    except ValueError:
        return False
    return True


def parse_csv_matrix(text: str) -> DataMatrix:
    """Rectangular numeric CSV to a matrix; a non-numeric first row is a header."""
    rows = _csv_rows(text)
    if rows and not all(_is_number(c) for c in rows[0][1]):
        rows = rows[1:]
    if not rows:
        raise ParseError("no numeric rows")
    width = len(rows[0][1])
    values = np.empty((len(rows), width))
    for i, (lineno, cells) in enumerate(rows):
        if len(cells) != width:
            raise ParseError(f"expected {width} fields, got {len(cells)}", row=lineno)
        for j, cell in enumerate(cells):
            try:
                values[i, j] = float(cell)
            except ValueError:
                raise ParseError(f"not a number: {cell!r}", row=lineno, column=j + 1) from None
    return _wrap(lambda: DataMatrix(values), "csv")


def read_csv_matrix(path: str | os.PathLike) -> DataMatrix:
    return parse_csv_matrix(_read_text(path))


def write_csv_matrix(path: str | os.PathLike, values: np.ndarray) -> None:
    values = np.atleast_2d(np.asarray(values, dtype=np.float64))
    with atomic_open(path, binary=False) as fh:
        for row in values.tolist():
            fh.write(",".join(_fmt(v) for v in row) + "\n")


def read_data(path: str | os.PathLike) -> DataMatrix:
    """Read a ``.csv`` matrix by extension, anything else as a ``.wdsm`` container."""
    return read_csv_matrix(path) if str(path).lower().endswith(".csv") else read_matrix(path)


def write_data(path: str | os.PathLike, m: DataMatrix) -> None:
    if str(path).lower().endswith(".csv"):
        write_csv_matrix(path, m.values)
    else:
        write_matrix(path, m)


def _int_table(text: str, header: tuple[str, ...], what: str) -> list[list[int]]:
    rows = _csv_rows(text)
    if rows and tuple(c.lower() for c in rows[0][1]) == header:
        rows = rows[1:]
    out = []
    for lineno, cells in rows:
        if len(cells) != len(header):
            raise ParseError(f"{what}: expected {len(header)} fields, got {len(cells)}", row=lineno)
        try:
            out.append([int(c) for c in cells])
        except ValueError:
            raise ParseError(f"{what}: non-integer field", row=lineno) from None
    return out


def write_partition(path: str | os.PathLike, part: FoldPartition) -> None:
    with atomic_open(path, binary=False) as fh:
        fh.write("subject_index,fold\n")
        for i, f in enumerate(part.assignments):
            fh.write(f"{i},{f}\n")


def read_partition(path: str | os.PathLike) -> FoldPartition:
    rows = _int_table(_read_text(path), ("subject_index", "fold"), "partition")
    n = len(rows)
    assignments = [-1] * n
    for subject, fold in rows:
        if not 0 <= subject < n or assignments[subject] != -1:
            raise ParseError(f"partition: subject index {subject} missing, repeated or out of range")
        assignments[subject] = fold
    k = max(assignments) + 1 if assignments else 0
    return _wrap(lambda: FoldPartition(n, k, tuple(assignments)), "partition")


def read_topology(path: str | os.PathLike) -> np.ndarray:
    """Faces from a CSV of 0-based ``i,j,k`` triples (header optional)."""
    return np.array(_int_table(_read_text(path), ("i", "j", "k"), "topology"), dtype=np.int64).reshape(-1, 3)


def write_topology(path: str | os.PathLike, faces: np.ndarray) -> None:
    with atomic_open(path, binary=False) as fh:
        fh.write("i,j,k\n")
        for a, b, c in np.asarray(faces, dtype=np.int64).tolist():
            fh.write(f"{a},{b},{c}\n")


def write_error_curve(path: str | os.PathLike, curve: ErrorCurve) -> None:
    with atomic_open(path, binary=False) as fh:
        fh.write("m,mse\n")
        for m, e in zip(curve.m_values, curve.errors):
            fh.write(f"{m},{_fmt(e)}\n")


def read_error_curve(path: str | os.PathLike) -> ErrorCurve:
    rows = _csv_rows(_read_text(path))
    if not rows or [c.lower() for c in rows[0][1]] != ["m", "mse"]:
        raise ParseError("error curve: missing 'm,mse' header", row=1)
    try:
        return ErrorCurve(tuple(int(r[0]) for _, r in rows[1:]), tuple(float(r[1]) for _, r in rows[1:]))
    except (ValueError, IndexError) as exc:
        raise ParseError(f"error curve: {exc}") from None


def write_report(path: str | os.PathLike, report: CrossValReport) -> None:
    """CSV ``fold,m,train_mse,val_mse``; rows with fold -1 hold the fold averages."""
    with atomic_open(path, binary=False) as fh:
        fh.write("fold,m,train_mse,val_mse\n")
        for f in range(report.k_folds):
            for j, m in enumerate(report.m_values):
                fh.write(f"{f},{m},{_fmt(report.train_mse[f, j])},{_fmt(report.val_mse[f, j])}\n")
        for j, m in enumerate(report.m_values):
            fh.write(f"-1,{m},{_fmt(report.mean_train_mse[j])},{_fmt(report.mean_val_mse[j])}\n")


def read_report(path: str | os.PathLike) -> CrossValReport:
    rows = _csv_rows(_read_text(path))
    if not rows or [c.lower() for c in rows[0][1]] != ["fold", "m", "train_mse", "val_mse"]:
        raise ParseError("report: missing 'fold,m,train_mse,val_mse' header", row=1)
    per_fold: dict[int, list[tuple[int, float, float]]] = {}
    for lineno, cells in rows[1:]:
        try:
            fold, m, tr, va = int(cells[0]), int(cells[1]), float(cells[2]), float(cells[3])
        except (ValueError, IndexError):
            raise ParseError("report: malformed row", row=lineno) from None
        if fold >= 0:
            per_fold.setdefault(fold, []).append((m, tr, va))
    if not per_fold:
        return CrossValReport((), np.zeros((0, 0)), np.zeros((0, 0)))
    folds = sorted(per_fold)
    ms = tuple(m for m, _, _ in per_fold[folds[0]])
    if any(tuple(m for m, _, _ in per_fold[f]) != ms for f in folds):
        raise ParseError("report: folds disagree on m values")
    train = np.array([[t for _, t, _ in per_fold[f]] for f in folds])
    val = np.array([[v for _, _, v in per_fold[f]] for f in folds])
    return CrossValReport(ms, train, val)
