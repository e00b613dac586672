"""Lipschitz, Hausdorff and Gromov-Hausdorff machinery on finite spaces.

The exact GH distance is half the minimal distortion over correspondences
(relations covering both spaces); the search is exact branch-and-bound
and therefore capped at small cardinalities.  Everything else here gives
bounds or certificates that stay usable at scale.
"""

from __future__ import annotations

import itertools
import json
import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import dijkstra

from .errors import CapacityError, ConnectivityError, InvalidArgument
from .metric_core import FiniteMetricSpace

GH_EXACT_CAP = 6
LIPSCHITZ_CAP = 10


@dataclass(frozen=True)
class Correspondence:
    """Relation between two finite spaces covering both index sets."""

    pairs: frozenset

    def __post_init__(self):
        object.__setattr__(self, "pairs", frozenset((int(a), int(b)) for a, b in self.pairs))

    def validate(self, n_x: int, n_y: int) -> None:
        xs = {a for a, _ in self.pairs}
        ys = {b for _, b in self.pairs}
        if xs != set(range(n_x)) and not xs.issuperset(range(n_x)):
            raise InvalidArgument("correspondence does not cover X")
        if not ys.issuperset(range(n_y)):
            raise InvalidArgument("correspondence does not cover Y")

    @classmethod
    def from_map(cls, f) -> "Correspondence":
        return cls(frozenset((i, int(y)) for i, y in enumerate(f)))


@dataclass(frozen=True)
class NetCertificate:
    net_indices: tuple
    epsilon: float
    max_gap: float  # achieved covering radius, <= epsilon


@dataclass(frozen=True)
class ApproxGraph:
    """Geodesic graph on a net: vertices, short edges, shortest-path metric."""

    vertices: tuple
    edges: tuple  # (i, j, weight) on net-local indices
    graph_metric: np.ndarray
    max_gap: float  # max over net pairs of d_G - d_X
    certificate_holds: bool  # d_X <= d_G <= d_X + eps on all net pairs

    def to_json(self) -> str:
        return json.dumps(
            {
                "vertices": list(self.vertices),
                "edges": [[i, j, w] for i, j, w in self.edges],
                "graph_metric": self.graph_metric.tolist(),
                "max_gap": self.max_gap,
                "certificate_holds": self.certificate_holds,
            }
        )


def hausdorff_distance(a, b, ambient: FiniteMetricSpace) -> float:
    """max-sup Hausdorff distance between two index subsets of one space."""
    a = list(a)
    b = list(b)
    if not a or not b:
        raise InvalidArgument("Hausdorff distance needs non-empty subsets")
    sub = ambient.dist[np.ix_(a, b)]
    return float(max(sub.min(axis=1).max(), sub.min(axis=0).max()))


def dilatation(f, x: FiniteMetricSpace, y: FiniteMetricSpace) -> float:
    """Maximal metric stretch of the map f: X -> Y (indices)."""
    f = [int(v) for v in f]
    if len(f) != len(x):
        raise InvalidArgument("map must be total on X")
    if len(x) < 2:
        return 0.0  # convention: no pair to stretch
    fy = y.dist[np.ix_(f, f)]
    iu = np.triu_indices(len(x), 1)
    dx = x.dist[iu]
    dy = fy[iu]
    with np.errstate(divide="ignore", invalid="ignore"):
        ratios = np.where(dx > 0, dy / np.where(dx > 0, dx, 1.0), np.where(dy > 0, np.inf, 0.0))
    return float(ratios.max())


def lipschitz_distance(x: FiniteMetricSpace, y: FiniteMetricSpace) -> float:
    """min over bijections of log max(dil f, dil f^-1); inf when |X| != |Y|.

    Exhaustive over permutations, enforced up to 10 points per side.
    """
    n, m = len(x), len(y)
    if n != m:
        return math.inf
    if n > LIPSCHITZ_CAP:
        raise CapacityError(
            f"Lipschitz search is exhaustive and capped at {LIPSCHITZ_CAP} points; "
            "use gh_bounds for larger spaces"
        )
    if n < 2:
        return 0.0
    iu = np.triu_indices(n, 1)
    dx = x.dist[iu]
    best = math.inf
    for perm in itertools.permutations(range(n)):
        dy = y.dist[np.ix_(perm, perm)][iu]
        if np.any((dx == 0) != (dy == 0)):
            continue  # not bi-Lipschitz under this bijection
        mask = dx > 0
        if not mask.any():
            best = 0.0
            break
        r = dy[mask] / dx[mask]
        val = math.log(max(r.max(), 1.0 / r.min()))
        if val < best:
            best = val
            if best == 0.0:
                break
    return best


def distortion(r: Correspondence, x: FiniteMetricSpace, y: FiniteMetricSpace) -> float:
    """Worst distance mismatch over all pairs of related points."""
    r.validate(len(x), len(y))
    pairs = sorted(r.pairs)
    xs = [a for a, _ in pairs]
    ys = [b for _, b in pairs]
    dx = x.dist[np.ix_(xs, xs)]
    dy = y.dist[np.ix_(ys, ys)]
    return float(np.abs(dx - dy).max())


def _gh_search(dx: np.ndarray, dy: np.ndarray):
    """Branch-and-bound minimal distortion over correspondences.

    Correspondences are searched as graph(g) + graph(h)^T for g: X -> Y
    and h on the y-points not hit by g; any minimal correspondence
    contains such a sub-correspondence of no larger distortion.
    """
    n, m = dx.shape[0], dy.shape[0]
    lower = abs(dx.max(initial=0.0) - dy.max(initial=0.0))
    best = [math.inf, None]

    def phase2(pairs, ys_left, dis):
        if dis >= best[0]:
            return
        if not ys_left:
            if dis < best[0]:
                best[0] = dis
                best[1] = list(pairs)
            return
        yb = ys_left[0]
        for xb in range(n):
            d2 = dis
            ok = True
            for (xa, ya) in pairs:
                d2 = max(d2, abs(dx[xb, xa] - dy[yb, ya]))
                if d2 >= best[0]:
                    ok = False
                    break
            if ok:
                pairs.append((xb, yb))
                phase2(pairs, ys_left[1:], d2)
                pairs.pop()

    def phase1(i, pairs, dis):
        if dis >= best[0]:
            return
        if i == n:
            covered = {yb for _, yb in pairs}
            ys_left = [yb for yb in range(m) if yb not in covered]
            phase2(pairs, ys_left, dis)
            return
        for yb in range(m):
            d2 = dis
            ok = True
            for (xa, ya) in pairs:
                d2 = max(d2, abs(dx[i, xa] - dy[yb, ya]))
                if d2 >= best[0]:
                    ok = False
                    break
            if ok:
                pairs.append((i, yb))
                phase1(i + 1, pairs, d2)
                pairs.pop()
                if best[0] <= lower:
                    return  # diameter bound met: provably optimal

    phase1(0, [], 0.0)
    return best[0], best[1]


def gh_distance_exact(
    x: FiniteMetricSpace, y: FiniteMetricSpace, cap: int = GH_EXACT_CAP
) -> float:
    """Exact Gromov-Hausdorff distance: half the minimal distortion."""
    if len(x) > cap or len(y) > cap:
        raise CapacityError(
            f"exact GH search capped at {cap} points per side; use gh_bounds"
        )
    dis, _ = _gh_search(x.dist, y.dist)
    return 0.5 * dis


def minimal_correspondence(
    x: FiniteMetricSpace, y: FiniteMetricSpace, cap: int = GH_EXACT_CAP
) -> tuple:
    """(distortion, Correspondence) achieving the exact GH distance."""
    if len(x) > cap or len(y) > cap:
        raise CapacityError(f"exact GH search capped at {cap} points per side")
    dis, pairs = _gh_search(x.dist, y.dist)
    return dis, Correspondence(frozenset(pairs))


def _greedy_correspondence(x: FiniteMetricSpace, y: FiniteMetricSpace) -> Correspondence:
    """Heuristic matching by eccentricity profile, padded to cover both sides."""
    ex = np.argsort(x.dist.sum(axis=0), kind="stable")
    ey = np.argsort(y.dist.sum(axis=0), kind="stable")
    k = min(len(ex), len(ey))
    pairs = [(int(ex[i]), int(ey[i])) for i in range(k)]
    for i in range(k, len(ex)):
        pairs.append((int(ex[i]), int(ey[k - 1])))
    for j in range(k, len(ey)):
        pairs.append((int(ex[k - 1]), int(ey[j])))
    return Correspondence(frozenset(pairs))


def gh_bounds(
    x: FiniteMetricSpace,
    y: FiniteMetricSpace,
    x_net=None,
    y_net=None,
) -> tuple:
    """(lower, upper) GH bounds from diameters and a heuristic correspondence.

    When matched nets are supplied, the net-based bound 2 eps + delta is
    also taken into account for the upper bound.
    """
    lower = 0.5 * abs(x.diam - y.diam)
    upper = 0.5 * distortion(_greedy_correspondence(x, y), x, y)
    if x_net is not None and y_net is not None:
        x_net = list(x_net)
        y_net = list(y_net)
        if len(x_net) != len(y_net):
            raise InvalidArgument("matched nets must have equal size")
        eps = max(
            hausdorff_distance(x_net, range(len(x)), x),
            hausdorff_distance(y_net, range(len(y)), y),
        )
        delta = float(
            np.abs(x.dist[np.ix_(x_net, x_net)] - y.dist[np.ix_(y_net, y_net)]).max()
        )
        upper = min(upper, 2.0 * eps + delta)
    return lower, max(lower, upper)


def epsilon_isometry_defect(f, x: FiniteMetricSpace, y: FiniteMetricSpace) -> tuple:
    """(distortion of f, covering radius of f(X) in Y)."""
    f = [int(v) for v in f]
    if len(f) != len(x):
        raise InvalidArgument("map must be total on X")
    dy = y.dist[np.ix_(f, f)]
    dis = float(np.abs(x.dist - dy).max())
    cov = float(y.dist[:, sorted(set(f))].min(axis=1).max())
    return dis, cov


def is_epsilon_isometry(f, x: FiniteMetricSpace, y: FiniteMetricSpace, eps: float) -> bool:
    """dis f <= eps and f(X) an eps-net in Y."""
    dis, cov = epsilon_isometry_defect(f, x, y)
    return dis <= eps and cov <= eps


def epsilon_net(x: FiniteMetricSpace, eps: float, start: int = 0) -> NetCertificate:
    """Greedy farthest-point eps-net (2-approximation of the covering number)."""
    if eps <= 0:
        raise InvalidArgument("eps must be positive")
    n = len(x)
    net = [start]
    gaps = x.dist[start].copy()
    while gaps.max() > eps:
        nxt = int(np.argmax(gaps))
        net.append(nxt)
        gaps = np.minimum(gaps, x.dist[nxt])
    return NetCertificate(tuple(net), eps, float(gaps.max()))


def epsilon_delta_check(
    x: FiniteMetricSpace,
    y: FiniteMetricSpace,
    x_net,
    y_net,
    eps: float,
    delta: float,
) -> bool:
    """Certificate that the matched nets witness an eps-delta-approximation.

    Both nets must cover at radius eps and satisfy
    |d_X(x_i,x_j) - d_Y(y_i,y_j)| < delta (strict) for all i, j.
    """
    x_net = list(x_net)
    y_net = list(y_net)
    if len(x_net) != len(y_net):
        raise InvalidArgument("nets must have equal size")
    if hausdorff_distance(x_net, range(len(x)), x) > eps:
        return False
    if hausdorff_distance(y_net, range(len(y)), y) > eps:
        return False
    mismatch = np.abs(x.dist[np.ix_(x_net, x_net)] - y.dist[np.ix_(y_net, y_net)])
    return bool(mismatch.max() < delta)


def build_graph_approximation(
    x: FiniteMetricSpace, eps: float, delta: float
) -> ApproxGraph:
    """Finite-graph approximation of a sampled length space.

    Vertices are a delta-net; edges join net points with d < eps (strict),
    weighted by the underlying distance; the graph metric is all-pairs
    shortest paths.  Raises ConnectivityError (naming a separated pair)
    when eps is too small for the sample.
    """
    diam = x.diam
    if diam > 0 and delta >= eps * eps / (4.0 * diam):
        warnings.warn(
            f"delta={delta} violates delta < eps^2/(4 diam) = {eps * eps / (4 * diam):.3g}; "
            "the eps-approximation guarantee may not hold"
        )
    net = epsilon_net(x, delta)
    idx = list(net.net_indices)
    k = len(idx)
    sub = x.dist[np.ix_(idx, idx)]
    adj = np.where((sub < eps) & (sub > 0), sub, 0.0)
    graph_metric = dijkstra(csr_matrix(adj), directed=False)
    if np.isinf(graph_metric).any():
        i, j = np.unravel_index(int(np.argmax(np.isinf(graph_metric))), graph_metric.shape)
        raise ConnectivityError(
            f"graph is disconnected: no path between net points {idx[i]} and {idx[j]}",
            pair=(idx[i], idx[j]),
        )
    edges = tuple(
        (i, j, float(sub[i, j])) for i in range(k) for j in range(i + 1, k) if adj[i, j] > 0
    )
    gap = float((graph_metric - sub).max())
    holds = bool((graph_metric >= sub - 1e-12).all() and gap <= eps)
    return ApproxGraph(
        vertices=tuple(idx),
        edges=edges,
        graph_metric=graph_metric,
        max_gap=gap,
        certificate_holds=holds,
    )
