"""Pure numpy implementations of the hot kernels.

These mirror ``_ckernels.pyx`` operation for operation.  The Gaussian sampler
is bit-identical to the compiled version: integer hashing is exact, the
rational approximations are evaluated in the same order, and the logarithm in
the tail branch goes through ``math.log`` (the platform libm, same as the C
build) because numpy's vectorised ``log`` can differ in the last ulp.
"""

from __future__ import annotations

import math

import numpy as np

MASK64 = 0xFFFFFFFFFFFFFFFF
GOLDEN = 0x9E3779B97F4A7C15
_MUL1 = np.uint64(0xBF58476D1CE4E5B9)
_MUL2 = np.uint64(0x94D049BB133111EB)
_G = np.uint64(GOLDEN)

# Wichura (1988), algorithm AS 241, PPND16.
_A = (3.387132872796366608, 133.14166789178437745, 1971.5909503065514427,
      13731.693765509461125, 45921.953931549871457, 67265.770927008700853,
      33430.575583588128105, 2509.0809287301226727)
_B = (1.0, 42.313330701600911252, 687.1870074920579083, 5394.1960214247511077,
      21213.794301586595867, 39307.89580009271061, 28729.085735721942674,
      5226.495278852545925)
_C = (1.42343711074968357734, 4.6303378461565452959, 5.7694972214606914055,
      3.64784832476320460504, 1.27045825245236838258, 0.24178072517745061177,
      0.0227238449892691845833, 7.7454501427834140764e-4)
_D = (1.0, 2.05319162663775882187, 1.6763848301838038494, 0.68976733498510000455,
      0.14810397642748007459, 0.0151986665636164571966, 5.475938084995344946e-4,
      1.05075007164441684324e-9)
_E = (6.6579046435011037772, 5.4637849111641143699, 1.7848265399172913358,
      0.29656057182850489123, 0.026532189526576123093, 0.0012426609473880784386,
      2.71155556874348757815e-5, 2.01033439929228813265e-7)
_F = (1.0, 0.59983220655588793769, 0.13692988092273580531, 0.0148753612908506148525,
      7.868691311456132591e-4, 1.8463183175100546818e-5, 1.4215117583164458887e-7,
      2.04426310338993978564e-15)


def mix64_int(z: int) -> int:
    """SplitMix64 finalizer on a Python int (wraps to 64 bits)."""
    z &= MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return z ^ (z >> 31)


def _mix64(z: np.ndarray) -> np.ndarray:
    z = (z ^ (z >> np.uint64(30))) * _MUL1
    z = (z ^ (z >> np.uint64(27))) * _MUL2
    return z ^ (z >> np.uint64(31))


def counter_bits(seed: int, rows: np.ndarray, cols: np.ndarray) -> np.ndarray:
    """64-bit hash of every (seed, row, col) triple, shape ``(len(rows), len(cols))``."""
    h0 = np.uint64(mix64_int(seed + GOLDEN))
    h1 = _mix64((h0 ^ rows.astype(np.uint64)) + _G)
    return _mix64((h1[:, None] ^ cols.astype(np.uint64)[None, :]) + _G)


def bits_to_unit(h: np.ndarray) -> np.ndarray:
    """Map 64-bit words to the open interval (0, 1); exact in float64."""
    return ((h >> np.uint64(12)).astype(np.float64) + 0.5) * 2.0**-52


def _horner(c, r):
    acc = c[7] * r + c[6]
    for coef in c[5::-1]:
        acc = acc * r + coef
    return acc


def normal_ppf(p: np.ndarray) -> np.ndarray:
    """Standard normal quantile for ``0 < p < 1``."""
    p = np.asarray(p, dtype=np.float64)
    q = p - 0.5
    out = np.empty_like(p)
    central = np.abs(q) <= 0.425
    qc = q[central]
    r = 0.180625 - qc * qc
    out[central] = qc * _horner(_A, r) / _horner(_B, r)

    tail = ~central
    qt = q[tail]
    pt = p[tail]
    r = np.where(qt < 0.0, pt, 1.0 - pt)
    r = np.sqrt(-np.array([math.log(v) for v in r.tolist()], dtype=np.float64))
    val = np.empty_like(r)
    near = r <= 5.0
    rn = r[near] - 1.6
    val[near] = _horner(_C, rn) / _horner(_D, rn)
    rf = r[~near] - 5.0
    val[~near] = _horner(_E, rf) / _horner(_F, rf)
    out[tail] = np.where(qt < 0.0, -val, val)
    return out


def normal_block(seed: int, row_start: int, n_rows: int, scales: np.ndarray) -> np.ndarray:
    """Gaussian draws ``N(0, scales[i]**2)`` for rows ``row_start .. row_start+n_rows-1``."""
    scales = np.ascontiguousarray(scales, dtype=np.float64)
    rows = np.arange(row_start, row_start + n_rows, dtype=np.uint64)
    cols = np.arange(scales.shape[0], dtype=np.uint64)
    if n_rows == 0 or scales.shape[0] == 0:
        return np.zeros((n_rows, scales.shape[0]))
    u = bits_to_unit(counter_bits(seed, rows, cols))
    z = normal_ppf(u.ravel()).reshape(u.shape)
    return z * scales[None, :]


_BLOCK = 1 << 18


def sq_diff_sum(a: np.ndarray, b: np.ndarray | None = None) -> float:
    """Sum over all entries of ``(a - b)**2`` (or ``a**2`` when ``b`` is None)."""
    a = np.ascontiguousarray(a, dtype=np.float64)
    if a.ndim == 1:
        a = a[None, :]
    if b is not None:
        b = np.ascontiguousarray(b, dtype=np.float64).reshape(a.shape)
    step = max(1, _BLOCK // max(1, a.shape[1]))
    total = 0.0
    for start in range(0, a.shape[0], step):
        d = a[start:start + step] if b is None else a[start:start + step] - b[start:start + step]
        total += float(np.einsum("ij,ij->", d, d))
    return total
