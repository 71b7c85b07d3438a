"""Dense spectral kernels: singular values, restricted minima,
subspace distances and unit normals.

Production paths go through LAPACK (numpy.linalg.svd / qr); a slow
one-sided Jacobi SVD is kept alongside as an independent oracle so the
two routes can be cross-checked on small matrices.  Jacobi applies
plane rotations until all column pairs are orthogonal, so its accuracy
does not depend on the bidiagonalization shortcuts of the fast path.
"""

from __future__ import annotations

import math
from typing import Iterable, Sequence

import numpy as np

from .errors import RankDeficiencyError

__all__ = [
    "singular_values",
    "jacobi_singular_values",
    "smallest_singular_value",
    "largest_singular_value",
    "condition_ratio",
    "restricted_min_sv",
    "normalize_support",
    "distance_to_colspan",
    "unit_normal",
]


def _as_matrix(a) -> np.ndarray:
    a = np.asarray(a, dtype=np.float64)
    if a.ndim != 2:
        raise ValueError(f"expected a 2-d array, got ndim={a.ndim}")
    if a.shape[0] < 1 or a.shape[1] < 1:
        raise ValueError(f"matrix must be nonempty, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValueError("matrix has non-finite entries")
    return a


def singular_values(a) -> np.ndarray:
    """All min(rows, cols) singular values, descending."""
    a = _as_matrix(a)
    return np.linalg.svd(a, compute_uv=False)


def jacobi_singular_values(a, tol: float = 1e-13, max_sweeps: int = 60) -> np.ndarray:
    """One-sided Jacobi SVD, descending.  Independent oracle; O(n^3)
    per sweep in pure Python loops, intended for matrices up to ~100.

    Rotates column pairs of a working copy until every off-diagonal
    Gram entry satisfies |<a_p, a_q>| <= tol * ||a_p|| * ||a_q||; the
    singular values are then the column norms.
    """
    a = _as_matrix(a)
    if a.shape[0] < a.shape[1]:
        # one-sided Jacobi orthogonalizes columns; transposing first
        # keeps the column count at most the row count
        a = a.T
    w = a.copy()
    n = w.shape[1]
    for _ in range(max_sweeps):
        rotated = False
        for p in range(n - 1):
            for q in range(p + 1, n):
                ap = w[:, p]
                aq = w[:, q]
                alpha = float(ap @ ap)
                beta = float(aq @ aq)
                gamma = float(ap @ aq)
                if abs(gamma) <= tol * math.sqrt(alpha * beta):
                    continue
                rotated = True
                zeta = (beta - alpha) / (2.0 * gamma)
                t = math.copysign(1.0, zeta) / (abs(zeta) + math.hypot(1.0, zeta))
                c = 1.0 / math.hypot(1.0, t)
                s = c * t
                wp = c * ap - s * aq
                wq = s * ap + c * aq
                w[:, p] = wp
                w[:, q] = wq
        if not rotated:
            break
    sv = np.sqrt(np.sum(w * w, axis=0))
    sv.sort()
    return sv[::-1]


def smallest_singular_value(a) -> float:
    return float(singular_values(a)[-1])


def largest_singular_value(a) -> float:
    return float(singular_values(a)[0])


def condition_ratio(a) -> float:
    """s_max / s_min; inf when the matrix is singular to working
    precision.  The *product* of all singular values (|det| for square
    matrices) is a different animal: a matrix can have tiny determinant
    with every singular value of order one, so only the ratio is a
    conditioning statement."""
    sv = singular_values(a)
    if sv[-1] == 0.0:
        return math.inf
    return float(sv[0] / sv[-1])


def normalize_support(support: Iterable[int], cols: int) -> tuple[int, ...]:
    """Validate a column support: nonempty, unique, inside range.
    Returns it sorted as a tuple of python ints (0-based)."""
    idx = sorted(int(j) for j in support)
    if len(idx) == 0:
        raise ValueError("support must be nonempty")
    if len(set(idx)) != len(idx):
        raise ValueError(f"support has repeated indices: {idx}")
    if idx[0] < 0 or idx[-1] >= cols:
        raise ValueError(f"support {idx} out of range for {cols} columns")
    return tuple(idx)


def restricted_min_sv(a, support: Sequence[int]) -> float:
    """Smallest singular value of the submatrix of the given columns.

    The support size may not exceed the row count; wider submatrices
    are rank-deficient by dimension count alone and the restricted
    minimum would be identically zero."""
    a = _as_matrix(a)
    idx = normalize_support(support, a.shape[1])
    if len(idx) > a.shape[0]:
        raise ValueError(
            f"support size {len(idx)} exceeds row count {a.shape[0]}"
        )
    return float(singular_values(a[:, idx])[-1])


def distance_to_colspan(v, b) -> float:
    """Euclidean distance from v to the column span of b.

    Computed through a reduced QR with one re-projection pass of the
    residual; the second pass restores orthogonality lost to rounding
    when the columns of b are nearly dependent."""
    b = _as_matrix(b)
    v = np.asarray(v, dtype=np.float64).reshape(-1)
    if v.shape[0] != b.shape[0]:
        raise ValueError(f"dimension mismatch: v has {v.shape[0]}, b has {b.shape[0]} rows")
    q, _ = np.linalg.qr(b, mode="reduced")
    r = v - q @ (q.T @ v)
    r = r - q @ (q.T @ r)
    return float(np.linalg.norm(r))


def unit_normal(b, rank_rtol: float = 1e-10) -> np.ndarray:
    """Unit normal of the hyperplane spanned by the N-1 columns of an
    N x (N-1) matrix, with a deterministic sign.

    Raises RankDeficiencyError when the columns do not span a
    hyperplane (smallest singular value below rank_rtol * largest).
    The sign convention makes the first coordinate whose magnitude
    exceeds 1e-12 * max|a_i| positive, so equal inputs give equal
    outputs bit for bit."""
    b = _as_matrix(b)
    n, m = b.shape
    if m != n - 1:
        raise ValueError(f"expected N x (N-1), got {b.shape}")
    sv = singular_values(b)
    if sv[-1] <= rank_rtol * sv[0]:
        raise RankDeficiencyError(
            f"columns are rank deficient: s_min/s_max = {sv[-1] / sv[0]:.3e}"
        )
    q, _ = np.linalg.qr(b, mode="complete")
    a = q[:, -1].copy()
    peak = np.max(np.abs(a))
    lead = np.argmax(np.abs(a) > 1e-12 * peak)
    if a[lead] < 0.0:
        a = -a
    return a
