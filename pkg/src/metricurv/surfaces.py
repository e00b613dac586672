"""Surface samples with intrinsic distances, from meshes or analytic models.

A SurfaceSample is vertices plus a geodesic-distance oracle.  For meshes
the oracle is shortest paths in the edge graph (Dijkstra, cached per
source), which over-estimates true geodesics by O(edge length); the
analytic samplers override it with closed-form distances where those
exist (sphere, plane, cylinder).
"""

from __future__ import annotations

import math
from pathlib import Path

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components, dijkstra

from .errors import ConnectivityError, InvalidArgument
from .metric_core import FiniteMetricSpace


class SurfaceSample:
    """Point sample of a surface with an intrinsic distance oracle.

    Either ``faces`` (triangle indices; edge-graph geodesics) or a
    ``distance_fn(i, j) -> float`` must be supplied.  Per-source distance
    rows are computed lazily and cached.
    """

    def __init__(self, vertices, faces=None, distance_fn=None, approximate=None):
        self.vertices = np.asarray(vertices, dtype=float)
        if self.vertices.ndim != 2 or len(self.vertices) < 1:
            raise InvalidArgument("vertices must be an (n, d) array")
        self.faces = None if faces is None else np.asarray(faces, dtype=int)
        self.distance_fn = distance_fn
        self._cache: dict[int, np.ndarray] = {}
        self._graph = None
        if distance_fn is None:
            if self.faces is None:
                raise InvalidArgument("need faces or a distance function")
            self._graph = self._edge_graph()
            # approximate unless told otherwise: graph geodesics are biased
            self.approximate = True if approximate is None else approximate
        else:
            self.approximate = False if approximate is None else approximate

    def __len__(self) -> int:
        return len(self.vertices)

    def _edge_graph(self) -> csr_matrix:
        n = len(self.vertices)
        if self.faces.ndim != 2 or self.faces.shape[1] != 3:
            raise InvalidArgument("faces must be triangles")
        if self.faces.min(initial=0) < 0 or self.faces.max(initial=-1) >= n:
            raise InvalidArgument("face index out of range")
        edges = set()
        for f in self.faces:
            for a, b in ((0, 1), (1, 2), (2, 0)):
                i, j = int(f[a]), int(f[b])
                edges.add((min(i, j), max(i, j)))  # dedupe shared edges
        rows, cols, vals = [], [], []
        for i, j in edges:
            w = float(np.linalg.norm(self.vertices[i] - self.vertices[j]))
            if w <= 0:
                raise InvalidArgument(f"coincident face vertices {i} and {j}")
            rows += [i, j]
            cols += [j, i]
            vals += [w, w]
        g = csr_matrix((vals, (rows, cols)), shape=(n, n))
        ncomp, labels = connected_components(g, directed=False)
        if ncomp > 1:
            i = int(np.argmax(labels != labels[0]))
            raise ConnectivityError(
                f"mesh is disconnected: vertices 0 and {i} lie in different components",
                pair=(0, i),
            )
        return g

    def distances_from(self, i: int) -> np.ndarray:
        i = int(i)
        if i in self._cache:
            return self._cache[i]
        if self.distance_fn is not None:
            row = np.array([self.distance_fn(i, j) for j in range(len(self))])
        else:
            row = dijkstra(self._graph, directed=False, indices=i)
        self._cache[i] = row
        return row

    def distance(self, i: int, j: int) -> float:
        if self.distance_fn is not None and int(i) not in self._cache:
            return float(self.distance_fn(int(i), int(j)))
        return float(self.distances_from(int(i))[int(j)])

    def metric_space(self, validate: bool = False) -> FiniteMetricSpace:
        """Materialize the full distance matrix as a FiniteMetricSpace."""
        n = len(self)
        dist = np.stack([self.distances_from(i) for i in range(n)])
        dist = 0.5 * (dist + dist.T)  # symmetrize float noise
        np.fill_diagonal(dist, 0.0)
        return FiniteMetricSpace(list(range(n)), dist, validate=validate)


def _parse_off(lines) -> tuple:
    it = iter(enumerate(lines, start=1))
    header = None
    for ln, raw in it:
        s = raw.split("#", 1)[0].strip()
        if not s:
            continue
        if header is None:
            if s != "OFF":
                raise InvalidArgument(f"line {ln}: expected OFF header, got {s!r}")
            header = ln
            continue
        counts = s.split()
        if len(counts) < 2:
            raise InvalidArgument(f"line {ln}: expected vertex/face counts")
        try:
            nv, nf = int(counts[0]), int(counts[1])
        except ValueError as exc:
            raise InvalidArgument(f"line {ln}: bad counts {s!r}") from exc
        break
    else:
        raise InvalidArgument("empty OFF file")
    verts, faces = [], []
    for ln, raw in it:
        s = raw.split("#", 1)[0].strip()
        if not s:
            continue
        parts = s.split()
        if len(verts) < nv:
            if len(parts) < 3:
                raise InvalidArgument(f"line {ln}: vertex needs 3 coordinates")
            try:
                verts.append([float(v) for v in parts[:3]])
            except ValueError as exc:
                raise InvalidArgument(f"line {ln}: bad vertex {s!r}") from exc
        elif len(faces) < nf:
            try:
                cnt = int(parts[0])
                idx = [int(v) for v in parts[1 : 1 + cnt]]
            except (ValueError, IndexError) as exc:
                raise InvalidArgument(f"line {ln}: bad face {s!r}") from exc
            if cnt != 3 or len(idx) != 3:
                raise InvalidArgument(f"line {ln}: only triangle faces are supported")
            faces.append(idx)
    if len(verts) != nv or len(faces) != nf:
        raise InvalidArgument(f"expected {nv} vertices / {nf} faces, got {len(verts)} / {len(faces)}")
    return verts, faces


def _parse_obj(lines) -> tuple:
    verts, faces = [], []
    for ln, raw in enumerate(lines, start=1):
        s = raw.split("#", 1)[0].strip()
        if not s:
            continue
        parts = s.split()
        if parts[0] == "v":
            if len(parts) < 4:
                raise InvalidArgument(f"line {ln}: vertex needs 3 coordinates")
            try:
                verts.append([float(v) for v in parts[1:4]])
            except ValueError as exc:
                raise InvalidArgument(f"line {ln}: bad vertex {s!r}") from exc
        elif parts[0] == "f":
            if len(parts) != 4:
                raise InvalidArgument(f"line {ln}: only triangle faces are supported")
            try:
                # v, v/vt, v/vt/vn and v//vn forms; indices are 1-based,
                # negative indices count from the end
                idx = [int(p.split("/")[0]) for p in parts[1:]]
            except ValueError as exc:
                raise InvalidArgument(f"line {ln}: bad face {s!r}") from exc
            faces.append([i - 1 if i > 0 else len(verts) + i for i in idx])
        # other directives (vn, vt, o, g, s, usemtl, ...) are ignored
    if not verts or not faces:
        raise InvalidArgument("OBJ file contains no triangulated geometry")
    return verts, faces


def load_mesh(path) -> SurfaceSample:
    """Triangle mesh from an OFF or OBJ file (chosen by extension)."""
    path = Path(path)
    lines = path.read_text().splitlines()
    suffix = path.suffix.lower()
    if suffix == ".off":
        verts, faces = _parse_off(lines)
    elif suffix == ".obj":
        verts, faces = _parse_obj(lines)
    else:
        raise InvalidArgument(f"unsupported mesh format {suffix!r} (OFF and OBJ only)")
    return SurfaceSample(verts, faces=faces)


def _fibonacci_sphere(n: int, rng) -> np.ndarray:
    """Near-uniform points on the unit sphere, jittered for genericity."""
    i = np.arange(n) + rng.uniform(0.2, 0.8)
    phi = math.pi * (3.0 - math.sqrt(5.0)) * i
    z = 1.0 - 2.0 * i / n
    z = np.clip(z, -1.0, 1.0)
    rad = np.sqrt(1.0 - z * z)
    return np.stack([rad * np.cos(phi), rad * np.sin(phi), z], axis=1)


def sample_analytic(
    kind: str, n: int = 400, seed: int = 0, layout: str = "random", **params
) -> SurfaceSample:
    """Random/quasi-uniform sample of a model surface with intrinsic metric.

    kind: "sphere" (R), "plane" (w, h), "cylinder" (R, h), "torus" (R, r).
    Sphere, plane and cylinder use exact closed-form geodesic distances;
    the torus uses an edge-graph approximation (flagged ``approximate``).
    layout "grid" (plane and cylinder only) places points on a regular
    lattice so that exactly collinear triples exist — required when
    geodesic (sd) quadruples must be found in the sample.
    """
    if n < 4:
        raise InvalidArgument("need at least 4 sample points")
    if layout not in ("random", "grid"):
        raise InvalidArgument(f"unknown layout {layout!r}")
    if layout == "grid" and kind.lower() not in ("plane", "cylinder"):
        raise InvalidArgument("grid layout is available for plane and cylinder only")
    rng = np.random.default_rng(seed)
    kind = kind.lower()

    if kind == "sphere":
        radius = float(params.get("R", 1.0))
        if radius <= 0:
            raise InvalidArgument("sphere radius must be positive")
        pts = radius * _fibonacci_sphere(n, rng)

        def dist(i, j):
            c = float(np.dot(pts[i], pts[j])) / (radius * radius)
            return radius * math.acos(min(1.0, max(-1.0, c)))

        return SurfaceSample(pts, distance_fn=dist)

    if kind == "plane":
        w = float(params.get("w", 1.0))
        h = float(params.get("h", 1.0))
        if w <= 0 or h <= 0:
            raise InvalidArgument("plane dimensions must be positive")
        if layout == "grid":
            nx = max(2, round(math.sqrt(n * w / h)))
            ny = max(2, math.ceil(n / nx))
            gx, gy = np.meshgrid(np.linspace(0, w, nx), np.linspace(0, h, ny))
            pts = np.stack([gx.ravel(), gy.ravel()], axis=1)[:n]
        else:
            pts = np.stack([rng.uniform(0, w, n), rng.uniform(0, h, n)], axis=1)

        def dist(i, j):
            return float(np.linalg.norm(pts[i] - pts[j]))

        return SurfaceSample(pts, distance_fn=dist)

    if kind == "cylinder":
        radius = float(params.get("R", 1.0))
        h = float(params.get("h", 1.0))
        if radius <= 0 or h <= 0:
            raise InvalidArgument("cylinder dimensions must be positive")
        if layout == "grid":
            nt = max(3, round(math.sqrt(n * 2 * math.pi * radius / h)))
            nz = max(2, math.ceil(n / nt))
            gt, gz = np.meshgrid(
                np.linspace(0, 2 * math.pi, nt, endpoint=False), np.linspace(0, h, nz)
            )
            theta = gt.ravel()[:n]
            z = gz.ravel()[:n]
        else:
            theta = rng.uniform(0, 2 * math.pi, n)
            z = rng.uniform(0, h, n)
        pts = np.stack(
            [radius * np.cos(theta), radius * np.sin(theta), z], axis=1
        )

        def dist(i, j):
            # developed (unrolled) metric: wrap the angular difference
            dt = abs(theta[i] - theta[j])
            dt = min(dt, 2 * math.pi - dt)
            return math.hypot(radius * dt, z[i] - z[j])

        return SurfaceSample(pts, distance_fn=dist)

    if kind == "torus":
        big = float(params.get("R", 2.0))
        small = float(params.get("r", 1.0))
        if small <= 0 or big <= small:
            raise InvalidArgument("torus needs R > r > 0")
        u = rng.uniform(0, 2 * math.pi, n)
        v = rng.uniform(0, 2 * math.pi, n)
        pts = np.stack(
            [
                (big + small * np.cos(v)) * np.cos(u),
                (big + small * np.cos(v)) * np.sin(u),
                small * np.sin(v),
            ],
            axis=1,
        )
        # geodesics via a k-nearest-neighbor graph: no closed form exists
        k = min(max(8, int(2 * math.log(n))), n - 1)
        d2 = ((pts[:, None, :] - pts[None, :, :]) ** 2).sum(axis=2)
        edges = set()
        for i in range(n):
            for j in np.argsort(d2[i])[1 : k + 1]:
                edges.add((min(i, int(j)), max(i, int(j))))  # dedupe symmetric pairs
        rows, cols, vals = [], [], []
        for i, j in edges:
            w = math.sqrt(d2[i, j])
            rows += [i, j]
            cols += [j, i]
            vals += [w, w]
        g = csr_matrix((vals, (rows, cols)), shape=(n, n))
        ncomp, labels = connected_components(g, directed=False)
        if ncomp > 1:
            i = int(np.argmax(labels != labels[0]))
            raise ConnectivityError(
                f"torus sample graph is disconnected (n={n} too small)",
                pair=(0, i),
            )
        sample = SurfaceSample.__new__(SurfaceSample)
        sample.vertices = pts
        sample.faces = None
        sample.distance_fn = None
        sample._cache = {}
        sample._graph = g
        sample.approximate = True
        return sample

    raise InvalidArgument(f"unknown analytic surface {kind!r}")
