"""Circumscribed-sphere radius and cosphericity from distances alone.

Delta(p_1..p_k) is the determinant of the k x k matrix of squared
pairwise distances (zero diagonal, no bordering row).  For a
non-degenerate tetrahedron R^2 = -Delta / (2 D) with D the bordered
Cayley-Menger determinant; five points are coplanar or co-spherical iff
their 5 x 5 Delta vanishes.
"""

from __future__ import annotations

import math

import numpy as np

from .errors import DomainError, InvalidArgument
from .metric_core import MetricQuadruple, cayley_menger_det_quadruple


def _delta_matrix(distances, k: int | None) -> np.ndarray:
    arr = np.asarray(distances, dtype=float)
    if arr.ndim == 2:
        m = arr
        k = m.shape[0]
        if m.shape != (k, k):
            raise InvalidArgument("distance matrix must be square")
    else:
        flat = arr.ravel()
        if k is None:
            k = round((1 + math.isqrt(1 + 8 * flat.size)) / 2)
        if flat.size != k * (k - 1) // 2:
            raise InvalidArgument(f"need k(k-1)/2 distances, got {flat.size} for k={k}")
        m = np.zeros((k, k))
        pos = 0
        for i in range(k):
            for j in range(i + 1, k):
                m[i, j] = m[j, i] = flat[pos]
                pos += 1
    if k not in (4, 5):
        raise InvalidArgument("delta determinant is defined for 4 or 5 points")
    if np.any(m < 0):
        raise InvalidArgument("distances must be non-negative")
    if np.any(np.diag(m) != 0):
        raise InvalidArgument("diagonal must be zero")
    return m


def delta_det(distances, k: int | None = None) -> float:
    """Determinant of the squared-distance matrix for k = 4 or 5 points."""
    m = _delta_matrix(distances, k)
    return float(np.linalg.det(m * m))


def circumradius(q: MetricQuadruple, tol: float = 1e-12) -> float:
    """Radius of the sphere through the four points: R = sqrt(-Delta/(2D))."""
    d = cayley_menger_det_quadruple(q)
    scale = max(q.diam, 1e-300)
    if abs(d) <= tol * scale**8:
        raise DomainError("degenerate (coplanar) tetrahedron: D = 0", value=d)
    if d < 0:
        raise DomainError("quadruple is not Euclidean-embeddable", value=d)
    delta = delta_det(q.matrix())
    r2 = -0.5 * delta / d
    if r2 < 0:
        raise DomainError("inconsistent distances: negative squared radius", value=r2)
    return math.sqrt(r2)


def cospherical_test(distances, tol: float = 1e-9) -> bool:
    """True iff five points lie on a common sphere or plane.

    |Delta| is compared against tol * d_max^10 (Delta has degree 10 in the
    distances), so the decision is scale-free.
    """
    m = _delta_matrix(distances, None)
    if m.shape[0] != 5:
        raise InvalidArgument("cosphericity test needs 5 points")
    dmax = float(m.max())
    if dmax == 0.0:
        return True  # all points coincident
    return abs(float(np.linalg.det(m * m))) <= tol * dmax**10
