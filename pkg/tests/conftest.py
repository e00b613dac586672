"""Shared fixtures: matrix-backed sample oracles and structured sphere samples."""

import math

import numpy as np
import pytest


class MatrixSample:
    """Sample oracle backed by a precomputed distance matrix."""

    def __init__(self, dist):
        self.dist = np.asarray(dist, dtype=float)

    def __len__(self):
        return self.dist.shape[0]

    def distance(self, i, j):
        return float(self.dist[i, j])

    def distances_from(self, i):
        return self.dist[i]


def random_unit_vectors(n, rng):
    v = rng.normal(size=(n, 3))
    return v / np.linalg.norm(v, axis=1, keepdims=True)


def sphere_patch_points(n_centers=20, radii=(0.4, 0.2, 0.1, 0.05, 0.025, 0.0125),
                        n_dirs=8, total=2000, seed=42):
    """Unit-sphere sample with geodesic polar grids around random centers.

    Around each center, points are placed along ``n_dirs`` great-circle
    directions at the given geodesic radii, so that exactly-collinear
    (geodesic) triples through the centers exist in the sample.  The rest
    of the budget is uniform background.  Returns (points, center_indices).
    """
    rng = np.random.default_rng(seed)
    centers = random_unit_vectors(n_centers, rng)
    pts = [c for c in centers]
    for c in centers:
        a = np.array([1.0, 0.0, 0.0])
        if abs(c @ a) > 0.9:
            a = np.array([0.0, 1.0, 0.0])
        e1 = a - (a @ c) * c
        e1 /= np.linalg.norm(e1)
        e2 = np.cross(c, e1)
        for k in range(n_dirs):
            ang = 2 * math.pi * k / n_dirs + 0.3
            d = math.cos(ang) * e1 + math.sin(ang) * e2
            for r in radii:
                pts.append(math.cos(r) * c + math.sin(r) * d)
    n_back = total - len(pts)
    if n_back > 0:
        pts.extend(random_unit_vectors(n_back, rng))
    return np.array(pts), list(range(n_centers))


def great_circle_matrix(points):
    d = np.arccos(np.clip(points @ points.T, -1.0, 1.0))
    np.fill_diagonal(d, 0.0)
    return d


@pytest.fixture(scope="session")
def sphere_patch():
    """2000-point unit sphere sample and its 20 patch-center indices."""
    pts, centers = sphere_patch_points()
    return MatrixSample(great_circle_matrix(pts)), centers


@pytest.fixture(scope="session")
def small_sphere_patch():
    """~350-point unit sphere sample with one polar-grid patch at index 0."""
    pts, centers = sphere_patch_points(n_centers=1, total=350, seed=7)
    return MatrixSample(great_circle_matrix(pts)), centers[0]
