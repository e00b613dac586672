"""Finite metric data, Cayley-Menger determinants and Euclidean embeddability.

Distance conventions: all distances in one length unit.  The bordered
determinant D(p_1..p_k) is

    | 0  1    1    ...  1    |
    | 1  0    d12^2 ... d1k^2|
    | 1  d12^2 0   ...  ...  |
    | ...                    |

For k = 4 it satisfies D = 8 Vol_par^2 (Vol_par = parallelepiped volume of
the edge vectors), for k = 3 it gives Area^2 = -D/16.  Both constants are
pinned by the coordinate oracles in the test suite; the literature states
the sign conditions inconsistently.
"""

from __future__ import annotations

import enum
import json
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError, InvalidArgument

# Triangle-inequality slack: |violation| <= ATOL + RTOL * max(d).
ATOL = 1e-12
RTOL = 1e-9

# Full O(n^3) triangle validation is done only up to this size; above it a
# deterministic sample of midpoints is checked instead.
_FULL_TRIANGLE_CHECK_MAX = 400

_PAIRS4 = [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)]


def _triangle_slack(dmax: float) -> float:
    return ATOL + RTOL * dmax


def validate_distance_matrix(dist: np.ndarray, full: bool | None = None) -> None:
    """Check symmetry, zero diagonal, non-negativity and triangle inequality.

    Raises ``InvalidArgument`` naming the first violating entry/triple.
    """
    dist = np.asarray(dist, dtype=float)
    n = dist.shape[0]
    if dist.ndim != 2 or dist.shape != (n, n):
        raise InvalidArgument("distance matrix must be square")
    if np.any(np.diag(dist) != 0.0):
        i = int(np.argmax(np.diag(dist) != 0.0))
        raise InvalidArgument(f"nonzero diagonal at index {i}")
    if np.any(dist < 0.0):
        i, j = np.unravel_index(int(np.argmax(dist < 0.0)), dist.shape)
        raise InvalidArgument(f"negative distance at ({i},{j})")
    if not np.array_equal(dist, dist.T):
        asym = np.argwhere(dist != dist.T)
        i, j = (int(x) for x in asym[0])
        raise InvalidArgument(f"asymmetric entries at ({i},{j})")
    slack = _triangle_slack(float(dist.max(initial=0.0)))
    if full is None:
        full = n <= _FULL_TRIANGLE_CHECK_MAX
    if full:
        mids = range(n)
    else:
        mids = np.linspace(0, n - 1, 100, dtype=int)
    for j in mids:
        # dist[i,k] <= dist[i,j] + dist[j,k] for all i,k
        viol = dist - (dist[:, j][:, None] + dist[j, :][None, :])
        if viol.max() > slack:
            i, k = np.unravel_index(int(np.argmax(viol)), viol.shape)
            raise InvalidArgument(
                f"triangle inequality violated for triple ({i},{j},{k}): "
                f"d[{i},{k}]={dist[i, k]} > {dist[i, j]} + {dist[j, k]}"
            )


@dataclass(frozen=True)
class FiniteMetricSpace:
    """Labeled points with a validated symmetric distance matrix."""

    labels: list
    dist: np.ndarray
    validate: bool = True

    def __post_init__(self):
        dist = np.asarray(self.dist, dtype=float)
        object.__setattr__(self, "dist", dist)
        if len(self.labels) != dist.shape[0]:
            raise InvalidArgument("label count does not match matrix size")
        if self.validate:
            validate_distance_matrix(dist)

    def __len__(self) -> int:
        return len(self.labels)

    @property
    def diam(self) -> float:
        return float(self.dist.max(initial=0.0))

    def subspace(self, indices) -> "FiniteMetricSpace":
        idx = list(indices)
        return FiniteMetricSpace(
            [self.labels[i] for i in idx],
            self.dist[np.ix_(idx, idx)],
            validate=False,
        )

    def to_json(self) -> str:
        return json.dumps({"labels": list(self.labels), "dist": self.dist.tolist()})

    @classmethod
    def from_json(cls, text: str) -> "FiniteMetricSpace":
        obj = json.loads(text)
        if not isinstance(obj, dict) or "labels" not in obj or "dist" not in obj:
            raise InvalidArgument('expected JSON object {"labels": [...], "dist": [[...]]}')
        return cls(obj["labels"], np.asarray(obj["dist"], dtype=float))


@dataclass(frozen=True)
class MetricQuadruple:
    """Four points with six pairwise distances (the unit of curvature work)."""

    d12: float
    d13: float
    d14: float
    d23: float
    d24: float
    d34: float
    validate: bool = True

    def __post_init__(self):
        ds = self.distances
        if any(d < 0 for d in ds):
            raise InvalidArgument("distances must be non-negative")
        if self.validate:
            slack = _triangle_slack(max(ds))
            m = self.matrix()
            for i in range(4):
                for j in range(4):
                    for k in range(4):
                        if i != j and j != k and i != k:
                            if m[i, k] - (m[i, j] + m[j, k]) > slack:
                                raise InvalidArgument(
                                    f"triangle inequality violated on triple "
                                    f"({i + 1},{j + 1},{k + 1})"
                                )

    @property
    def distances(self) -> tuple:
        return (self.d12, self.d13, self.d14, self.d23, self.d24, self.d34)

    def matrix(self) -> np.ndarray:
        m = np.zeros((4, 4))
        for (i, j), d in zip(_PAIRS4, (self.d12, self.d13, self.d14, self.d23, self.d24, self.d34)):
            m[i, j] = m[j, i] = d
        return m

    @property
    def diam(self) -> float:
        return max(self.distances)

    @property
    def min_distance(self) -> float:
        return min(self.distances)

    @classmethod
    def from_matrix(cls, m, validate: bool = True) -> "MetricQuadruple":
        m = np.asarray(m, dtype=float)
        return cls(*(float(m[i, j]) for i, j in _PAIRS4), validate=validate)

    def scaled(self, s: float) -> "MetricQuadruple":
        return MetricQuadruple(*(s * d for d in self.distances), validate=False)


@dataclass(frozen=True)
class QuadrupleClass:
    """Classification flags for a quadruple (sd-quad / linear / degenerate)."""

    is_linear: bool
    is_sd_quad: bool
    is_degenerate: bool
    geodesic_triple: tuple | None = None  # (i, j, k), j between i and k; 1-based
    apex: int | None = None  # 1-based index of the off-geodesic point
    all_geodesic_triples: tuple = field(default_factory=tuple)


def cayley_menger_det(distances, k: int | None = None) -> float:
    """Bordered Cayley-Menger determinant D(p_1..p_k), k in 2..5.

    ``distances`` holds the k(k-1)/2 pairwise distances in lexicographic
    pair order (d12, d13, ..., d1k, d23, ...), or a full k x k matrix.
    """
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
        if k < 2 or k > 5 or flat.size != k * (k - 1) // 2:
            raise InvalidArgument(
                f"need k(k-1)/2 distances for k in 2..5, got {flat.size} for k={k}"
            )
        m = np.zeros((k, k))
        pos = 0
        for i in range(k):
            for j in range(i + 1, k):
                m[i, j] = m[j, i] = flat[pos]
                pos += 1
    if np.any(m < 0):
        raise InvalidArgument("distances must be non-negative")
    bm = np.ones((k + 1, k + 1))
    bm[0, 0] = 0.0
    bm[1:, 1:] = m * m
    return float(np.linalg.det(bm))


def cayley_menger_det_quadruple(q: MetricQuadruple) -> float:
    return cayley_menger_det(q.matrix())


@dataclass(frozen=True)
class SimplexVolume:
    parallelepiped: float
    simplex: float


def simplex_volume(q: MetricQuadruple) -> SimplexVolume:
    """Euclidean volumes realized by the quadruple: Vol_par = sqrt(D/8).

    Raises ``DomainError`` (carrying D) when D < 0, i.e. the quadruple is
    not embeddable in Euclidean 3-space.
    """
    d = cayley_menger_det_quadruple(q)
    scale = max(q.diam, 1.0)
    if d < -1e-12 * scale**8:
        raise DomainError("quadruple is not Euclidean-embeddable (D < 0)", value=d)
    par = math.sqrt(max(d, 0.0) / 8.0)
    return SimplexVolume(parallelepiped=par, simplex=par / 6.0)


def triangle_area(a: float, b: float, c: float) -> float:
    """Area of the triangle with sides a, b, c via Area^2 = -D(p1,p2,p3)/16."""
    slack = _triangle_slack(max(a, b, c))
    for x, y, z in ((a, b, c), (b, c, a), (c, a, b)):
        if z - (x + y) > slack:
            raise DomainError(f"triangle inequality violated: {z} > {x} + {y}")
    d3 = cayley_menger_det([a, b, c], k=3)
    return math.sqrt(max(-d3, 0.0) / 16.0)


class Embeddability(enum.Enum):
    NOT_EMBEDDABLE = "not_embeddable"
    EMBEDDABLE = "embeddable"
    EMBEDDABLE_DEGENERATE = "embeddable_degenerate"  # flat realization, D = 0


def embeddability_r3(q: MetricQuadruple, tol: float | None = None) -> Embeddability:
    """Euclidean 3-space realizability of the six distances.

    Embeddable iff every triple satisfies the triangle inequality (checked
    at construction) and D(Q) >= 0; D = 0 within tolerance is reported as
    the degenerate (coplanar) case.
    """
    d = cayley_menger_det_quadruple(q)
    scale = max(q.diam, 1e-300)
    if tol is None:
        tol = 1e-9
    thresh = tol * scale**8
    if d > thresh:
        return Embeddability.EMBEDDABLE
    if d < -thresh:
        return Embeddability.NOT_EMBEDDABLE
    return Embeddability.EMBEDDABLE_DEGENERATE


def is_embeddable_r3(q: MetricQuadruple, tol: float | None = None) -> bool:
    return embeddability_r3(q, tol) is not Embeddability.NOT_EMBEDDABLE


def classify_quadruple(q: MetricQuadruple, tol: float | None = None) -> QuadrupleClass:
    """Detect sd-quad permutations, linearity and degeneracy.

    A triple (i, j, k) is geodesic when d_ik = d_ij + d_jk within ``tol``
    (j between i and k).  Two geodesic triples over distinct point sets
    mean the quadruple is linear.
    """
    if tol is None:
        tol = _triangle_slack(q.diam)
    m = q.matrix()
    geodesic = []
    for pts in ((0, 1, 2), (0, 1, 3), (0, 2, 3), (1, 2, 3)):
        for mid in pts:
            i, k = (x for x in pts if x != mid)
            if abs(m[i, k] - (m[i, mid] + m[mid, k])) <= tol:
                geodesic.append((i + 1, mid + 1, k + 1))
                break  # one middle per point triple
    degenerate = q.min_distance <= tol
    is_sd = bool(geodesic)
    is_linear = len({frozenset(t) for t in geodesic}) >= 2
    triple = geodesic[0] if is_sd else None
    apex = None
    if triple is not None:
        apex = ({1, 2, 3, 4} - set(triple)).pop()
    return QuadrupleClass(
        is_linear=is_linear,
        is_sd_quad=is_sd,
        is_degenerate=degenerate,
        geodesic_triple=triple,
        apex=apex,
        all_geodesic_triples=tuple(geodesic),
    )
