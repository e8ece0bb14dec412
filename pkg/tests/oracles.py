"""Independent reference computations used to freeze expected values.

Nothing here calls LAPACK or the package under test: eigenpairs come from a
plain cyclic Jacobi sweep on the explicitly built D x D covariance.
"""

from __future__ import annotations

import math

import numpy as np


def covariance(x: np.ndarray) -> np.ndarray:
    """Explicit 1/(N-1) covariance, element by element."""
    x = np.asarray(x, dtype=np.float64)
    n, d = x.shape
    mean = [math.fsum(x[:, j]) / n for j in range(d)]
    cov = np.empty((d, d))
    for a in range(d):
        for b in range(a, d):
            s = math.fsum((x[i, a] - mean[a]) * (x[i, b] - mean[b]) for i in range(n))
            cov[a, b] = cov[b, a] = s / (n - 1)
    return cov


def jacobi_eigh(a: np.ndarray, tol: float = 1e-15, max_sweeps: int = 100) -> tuple[np.ndarray, np.ndarray]:
    """Eigenvalues (descending) and column eigenvectors of a symmetric matrix."""
    a = np.array(a, dtype=np.float64)
    d = a.shape[0]
    v = np.eye(d)
    for _ in range(max_sweeps):
        off = math.sqrt(sum(a[p, q] ** 2 for p in range(d) for q in range(d) if p != q))
        scale = math.sqrt(sum(a[p, p] ** 2 for p in range(d))) or 1.0
        if off <= tol * scale:
            break
        for p in range(d - 1):
            for q in range(p + 1, d):
                if a[p, q] == 0.0:
                    continue
                theta = (a[q, q] - a[p, p]) / (2.0 * a[p, q])
                t = math.copysign(1.0, theta) / (abs(theta) + math.sqrt(theta * theta + 1.0))
                c = 1.0 / math.sqrt(t * t + 1.0)
                s = t * c
                rot = np.eye(d)
                rot[p, p] = rot[q, q] = c
                rot[p, q] = s
                rot[q, p] = -s
                a = rot.T @ a @ rot
                v = v @ rot
    w = np.diag(a).copy()
    order = np.argsort(-w, kind="stable")
    return w[order], v[:, order]


def brute_force_pca(x: np.ndarray, rank_cut: float = 1e-12):
    """Mean, eigenvalues and eigenvector rows of the explicit covariance above the rank cut."""
    x = np.asarray(x, dtype=np.float64)
    n = x.shape[0]
    mean = np.array([math.fsum(x[:, j]) / n for j in range(x.shape[1])])
    w, v = jacobi_eigh(covariance(x))
    k = min(int(np.count_nonzero(w > rank_cut * w[0])), n - 1)
    return mean, w[:k], v[:, :k].T


def brute_mse(a, b) -> float:
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    return math.fsum(((a - b) ** 2).ravel().tolist()) / a.size


def project_reconstruct(x, mean, rows, m):
    """Orthogonal projection of x - mean onto the span of rows[:m], plus the mean."""
    x = np.asarray(x, dtype=np.float64)
    out = np.tile(mean, (x.shape[0], 1))
    for i in range(x.shape[0]):
        for j in range(m):
            coef = math.fsum((x[i] - mean) * rows[j])
            out[i] += coef * rows[j]
    return out
