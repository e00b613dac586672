"""Exact embedding curvature: residuals, solver roots and point estimates."""

import math
import warnings

import numpy as np
import pytest

from metricurv.embedding import (
    angle_measure,
    flat_residual,
    hyperbolic_residual,
    is_planar_quadruple,
    model_angle,
    model_side,
    rinow_region_check,
    solve_embedding_curvature,
    spherical_residual,
    wald_curvature_at_point,
)
from metricurv.errors import DomainError, InvalidArgument, UnstableEstimateError
from metricurv.metric_core import MetricQuadruple, cayley_menger_det_quadruple
from metricurv.surfaces import SurfaceSample, sample_analytic

from conftest import MatrixSample

SQRT2 = math.sqrt(2.0)

REGULAR_TETRA = MetricQuadruple(1, 1, 1, 1, 1, 1)
SQUARE = MetricQuadruple(1, SQRT2, 1, 1, SQRT2, 1)
COUNTEREXAMPLE = MetricQuadruple(1, 1, 1, 2, 2, 2)
PI_HALF = MetricQuadruple(*([math.pi / 2] * 6))

# curvature of the model sphere the unit regular tetrahedron embeds in:
# det(cos(sqrt(k) d)) = (1-c)^3 (1+3c) vanishes at c = cos(sqrt(k)) = -1/3
TETRA_ROOT = math.acos(-1.0 / 3.0) ** 2
# same determinant structure for the all-right-angles quadruple (d = pi/2)
PI_HALF_ROOT = (2.0 * math.acos(-1.0 / 3.0) / math.pi) ** 2

# four points of the hyperbolic plane (curvature -1), distances frozen from
# the hyperboloid model: acosh of the Minkowski inner product
HYPERBOLIC_MATRIX = np.array(
    [
        [0.0, 0.9000000000000001, 0.8215967267712597, 0.6361407638436737],
        [0.9000000000000001, 0.0, 0.8825202561274071, 0.9515752957861746],
        [0.8215967267712597, 0.8825202561274071, 0.0, 1.3174039259772234],
        [0.6361407638436737, 0.9515752957861746, 1.3174039259772234, 0.0],
    ]
)
HYPERBOLIC_QUAD = MetricQuadruple.from_matrix(HYPERBOLIC_MATRIX)


# --- residuals ---


def test_flat_residual_values():
    assert flat_residual(REGULAR_TETRA) == pytest.approx(4.0, abs=1e-12)
    assert flat_residual(SQUARE) == pytest.approx(0.0, abs=1e-12)


def test_spherical_residual_at_tetra_root():
    res, admissible = spherical_residual(REGULAR_TETRA, TETRA_ROOT)
    assert abs(res) <= 1e-12
    assert admissible


def test_spherical_residual_closed_form():
    # all six distances 1, kappa = 4: entries cos(2), det = (1-c)^3 (1+3c)
    c = math.cos(2.0)
    res, _ = spherical_residual(REGULAR_TETRA, 4.0)
    assert res == pytest.approx((1 - c) ** 3 * (1 + 3 * c), rel=1e-12)


def test_spherical_residual_inadmissible_beyond_pi():
    _, admissible = spherical_residual(REGULAR_TETRA, (1.5 * math.pi) ** 2)
    assert not admissible


def test_spherical_residual_rejects_nonpositive_kappa():
    with pytest.raises(InvalidArgument):
        spherical_residual(REGULAR_TETRA, 0.0)


def test_hyperbolic_residual_exact_at_minus_one():
    assert abs(hyperbolic_residual(HYPERBOLIC_QUAD, -1.0)) <= 1e-12


def test_hyperbolic_residual_rejects_nonnegative_kappa():
    with pytest.raises(InvalidArgument):
        hyperbolic_residual(HYPERBOLIC_QUAD, 0.0)


def test_residual_over_kappa_cubed_tends_to_flat_limit():
    # det(cos/cosh)/kappa^3 -> D(Q)/8 as kappa -> 0 from either side
    for q in (REGULAR_TETRA, HYPERBOLIC_QUAD):
        limit = cayley_menger_det_quadruple(q) / 8.0
        k = 1e-3
        sph, _ = spherical_residual(q, k)
        hyp = hyperbolic_residual(q, -k)
        assert sph / k**3 == pytest.approx(limit, rel=1e-2)
        assert hyp / (-k) ** 3 == pytest.approx(limit, rel=1e-2)


# --- solver ---


def test_solver_counterexample_has_no_roots():
    sol = solve_embedding_curvature(COUNTEREXAMPLE)
    assert sol.roots == ()


def test_solver_square_has_flat_and_spherical_roots():
    sol = solve_embedding_curvature(SQUARE)
    ks = sorted(sol.kappas)
    assert len(ks) == 2
    assert ks[0] == pytest.approx(0.0, abs=1e-12)
    assert ks[1] == pytest.approx(2.8924479484607524, rel=1e-9)


def test_solver_regular_tetrahedron():
    sol = solve_embedding_curvature(REGULAR_TETRA)
    assert len(sol.kappas) == 1
    assert sol.kappas[0] == pytest.approx(TETRA_ROOT, rel=1e-10)


def test_solver_pi_half_quadruple():
    sol = solve_embedding_curvature(PI_HALF)
    assert len(sol.kappas) == 1
    assert sol.kappas[0] == pytest.approx(PI_HALF_ROOT, rel=1e-10)
    assert abs(sol.admissible_roots[0].residual) <= 1e-10


def test_solver_hyperbolic_quadruple():
    sol = solve_embedding_curvature(HYPERBOLIC_QUAD)
    hyp = [r for r in sol.admissible_roots if r.case == "hyperbolic"]
    assert len(hyp) == 1
    assert hyp[0].kappa == pytest.approx(-1.0, abs=1e-9)


def test_solver_respects_scan_range():
    sol = solve_embedding_curvature(REGULAR_TETRA, scan=(-1.0, 1.0, 256))
    assert sol.roots == ()  # the root 3.65 lies outside the scan


def test_solver_roots_are_sorted():
    sol = solve_embedding_curvature(SQUARE)
    ks = [r.kappa for r in sol.roots]
    assert ks == sorted(ks)


def test_solver_at_most_two_admissible_roots_generic():
    rng = np.random.default_rng(7)
    for _ in range(60):
        pts = rng.uniform(0, 1, (4, 3))
        m = np.linalg.norm(pts[:, None] - pts[None, :], axis=2)
        sol = solve_embedding_curvature(MetricQuadruple.from_matrix(m, validate=False))
        genuine = [r for r in sol.roots if r.admissible and not r.low_confidence]
        assert len(genuine) <= 2


def test_solver_sd_quad_unique_root():
    # flat sd-quad: collinear triple plus apex -> exactly kappa = 0
    p = [np.array([-0.8, 0.0]), np.array([0.0, 0.0]), np.array([0.6, 0.0]),
         np.array([0.1, 0.7])]
    m = np.array([[np.linalg.norm(a - b) for b in p] for a in p])
    sol = solve_embedding_curvature(MetricQuadruple.from_matrix(m))
    genuine = [r for r in sol.roots if r.admissible and not r.low_confidence]
    assert len(genuine) == 1
    assert genuine[0].kappa == 0.0


def test_solver_rejects_degenerate_input():
    q = MetricQuadruple(0.0, 1, 1, 1, 1, 1, validate=False)
    with pytest.raises(InvalidArgument):
        solve_embedding_curvature(q)
    with pytest.raises(InvalidArgument):
        solve_embedding_curvature(REGULAR_TETRA, scan=(1.0, -1.0, 100))


def test_solution_json():
    import json

    sol = solve_embedding_curvature(REGULAR_TETRA)
    obj = json.loads(sol.to_json())
    assert obj["roots"][0]["kappa"] == pytest.approx(TETRA_ROOT)
    assert len(obj["scan"]) == 3


# --- model-space trigonometry ---


def test_model_side_flat_right_triangle():
    assert model_side(0.0, 3.0, 4.0, math.pi / 2) == pytest.approx(5.0, rel=1e-12)


def test_model_side_sphere_pole():
    # two unit-sphere points at distance pi/2 from the pole: the third side
    # equals the angle between the meridians
    for alpha in (0.3, 1.0, 2.5):
        assert model_side(1.0, math.pi / 2, math.pi / 2, alpha) == pytest.approx(
            alpha, rel=1e-12
        )


def test_model_side_hyperbolic_right_angle():
    expected = math.acosh(math.cosh(1.0) ** 2)
    assert model_side(-1.0, 1.0, 1.0, math.pi / 2) == pytest.approx(expected, rel=1e-12)


def test_model_side_euclidean_limit():
    flat = model_side(0.0, 0.7, 1.1, 0.9)
    assert model_side(1e-13, 0.7, 1.1, 0.9) == pytest.approx(flat, rel=1e-10)
    assert model_side(-1e-13, 0.7, 1.1, 0.9) == pytest.approx(flat, rel=1e-10)


def test_model_side_monotone_in_kappa():
    b, c, alpha = 0.8, 1.2, 1.1
    sides = [model_side(k, b, c, alpha) for k in (-2.0, -0.5, 0.0, 0.5, 1.5)]
    assert all(s1 > s2 for s1, s2 in zip(sides, sides[1:]))


def test_model_side_domain_errors():
    with pytest.raises(DomainError):
        model_side(1.0, math.pi, 1.0, 0.5)  # side exceeds spherical diameter
    with pytest.raises(InvalidArgument):
        model_side(0.0, -1.0, 1.0, 0.5)
    with pytest.raises(InvalidArgument):
        model_side(0.0, 1.0, 1.0, 4.0)


def test_model_angle_inverts_model_side():
    b, c, alpha = 0.9, 0.6, 1.3
    for kappa in (-1.5, 0.0, 1.2):
        a = model_side(kappa, b, c, alpha)
        assert model_angle(kappa, b, c, a) == pytest.approx(alpha, rel=1e-9)


def test_model_angle_domain_errors():
    with pytest.raises(DomainError):
        model_angle(0.0, 1.0, 1.0, 3.0)
    with pytest.raises(DomainError):
        model_angle(1.0, 3.5, 1.0, 1.0)


# --- planar quadruples ---


def test_is_planar_quadruple_interior_point():
    tri = [np.array([0.0, 0.0]), np.array([1.0, 0.0]), np.array([0.5, 1.0])]
    center = sum(tri) / 3.0
    p = tri + [center]
    m = np.array([[np.linalg.norm(a - b) for b in p] for a in p])
    assert is_planar_quadruple(MetricQuadruple.from_matrix(m), 0.0)


def test_is_planar_quadruple_square_is_not():
    assert not is_planar_quadruple(SQUARE, 0.0)


def test_is_planar_quadruple_needs_realizable_kappa():
    with pytest.raises(DomainError):
        is_planar_quadruple(REGULAR_TETRA, 0.0)  # D = 4 != 0


def test_is_planar_quadruple_spherical():
    # pole plus three equator points spans a hemisphere fan at kappa = 1
    pts = [np.array([0, 0, 1.0])]
    for lon in (0.0, 2 * math.pi / 3, 4 * math.pi / 3):
        pts.append(np.array([math.cos(lon), math.sin(lon), 0.0]))
    m = np.array(
        [[math.acos(np.clip(a @ b, -1, 1)) if i != j else 0.0
          for j, b in enumerate(pts)] for i, a in enumerate(pts)]
    )
    q = MetricQuadruple.from_matrix(m)
    assert is_planar_quadruple(q, 1.0)


# --- point estimates ---


def test_wald_on_sphere_sample(small_sphere_patch):
    sample, center = small_sphere_patch
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        ests = wald_curvature_at_point(sample, center, [0.3, 0.15], seed=1)
    assert ests
    assert ests[-1].kappa == pytest.approx(1.0, abs=0.3)
    assert ests[-1].quadruple_count > 0


def test_wald_on_plane_sample_is_zero():
    plane = sample_analytic("plane", n=300, seed=1, w=2.0, h=2.0)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        ests = wald_curvature_at_point(plane, 0, [0.8], seed=0)
    assert ests
    assert abs(ests[-1].kappa) <= 1e-9


# --- angle measure ---


def _grid_plane_with_landmarks():
    s = sample_analytic("plane", n=900, seed=0, layout="grid", w=2.0, h=2.0)
    v = s.vertices
    center = int(np.argmin(np.linalg.norm(v - [1, 1], axis=1)))
    east = int(np.argmin(np.linalg.norm(v - [1.9, 1], axis=1)))
    north = int(np.argmin(np.linalg.norm(v - [1, 1.9], axis=1)))
    west = int(np.argmin(np.linalg.norm(v - [0.1, 1], axis=1)))
    return s, center, east, north, west


def test_angle_measure_perpendicular_and_opposite():
    s, center, east, north, west = _grid_plane_with_landmarks()
    assert angle_measure(s, center, east, north, [0.4, 0.2, 0.1]) == pytest.approx(
        math.pi / 2, abs=1e-9
    )
    assert angle_measure(s, center, east, west, [0.4, 0.2, 0.1]) == pytest.approx(
        math.pi, abs=1e-9
    )


def test_angle_measure_sphere_meridians():
    gap = 0.7
    pts = [np.array([0.0, 0.0, 1.0])]
    for az in (0.0, gap):
        for r in np.linspace(0.05, 1.2, 24):
            pts.append(
                np.array([math.sin(r) * math.cos(az), math.sin(r) * math.sin(az),
                          math.cos(r)])
            )
    rng = np.random.default_rng(5)
    back = rng.normal(size=(150, 3))
    pts.extend(back / np.linalg.norm(back, axis=1, keepdims=True))
    p = np.array(pts)
    d = np.arccos(np.clip(p @ p.T, -1, 1))
    np.fill_diagonal(d, 0.0)
    sample = MatrixSample(d)
    angle = angle_measure(sample, 0, 24, 48, [0.6, 0.3, 0.15])
    assert angle == pytest.approx(gap, abs=1e-3)


def test_angle_measure_rejects_oversized_radii():
    s, center, east, north, _ = _grid_plane_with_landmarks()
    with pytest.raises(InvalidArgument):
        angle_measure(s, center, east, north, [5.0, 2.0])


def test_angle_measure_needs_on_geodesic_points():
    # a 5-point sample has nothing to snap to
    pts = np.array([[0, 0], [1, 0], [0, 1], [1, 1], [0.5, 0.5]], dtype=float)

    def dfn(i, j):
        return float(np.linalg.norm(pts[i] - pts[j]))

    s = SurfaceSample(pts, distance_fn=dfn)
    with pytest.raises(UnstableEstimateError):
        angle_measure(s, 0, 1, 2, [0.9, 0.45])


# --- comparison-triangle check ---


def _star_plane_sample():
    pts = [np.zeros(2)]
    for k in range(16):
        d = np.array([math.cos(2 * math.pi * k / 16 + 0.1),
                      math.sin(2 * math.pi * k / 16 + 0.1)])
        for rr in np.linspace(0.05, 1.0, 20):
            pts.append(rr * d)
    p = np.array(pts)

    def dfn(i, j):
        return float(np.linalg.norm(p[i] - p[j]))

    return SurfaceSample(p, distance_fn=dfn)


def _polar_sphere_sample():
    pts = [np.array([0.0, 0.0, 1.0])]
    for k in range(16):
        az = 2 * math.pi * k / 16 + 0.05
        for rr in np.linspace(0.08, 1.3, 20):
            pts.append(np.array([math.sin(rr) * math.cos(az),
                                 math.sin(rr) * math.sin(az), math.cos(rr)]))
    q = np.array(pts)

    def sfn(i, j):
        return float(math.acos(min(1.0, max(-1.0, float(q[i] @ q[j])))))

    return SurfaceSample(q, distance_fn=sfn)


def test_rinow_plane_matches_flat_model():
    rep = rinow_region_check(
        _star_plane_sample(), 0.0, triangle_count=60, tol=1e-9, seed=2,
        defect_tol=1e-9, apexes=[0]
    )
    assert rep.fraction_leq == 1.0
    assert rep.fraction_geq == 1.0
    assert rep.n_triangles == 60


def test_rinow_sphere_against_models():
    sph = _polar_sphere_sample()
    rep1 = rinow_region_check(sph, 1.0, triangle_count=60, tol=1e-9, seed=3,
                              defect_tol=1e-9, apexes=[0])
    assert rep1.fraction_leq == 1.0
    assert rep1.fraction_geq == 1.0
    # against the flat model the sphere is thick: xy >= comparison distance
    rep0 = rinow_region_check(sph, 0.0, triangle_count=60, tol=1e-9, seed=3,
                              defect_tol=1e-9, apexes=[0])
    assert rep0.fraction_geq == 1.0
    assert rep0.fraction_leq <= 0.5
    assert len(rep0.witnesses) > 0


def test_rinow_raises_without_usable_triangles():
    pts = np.array([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0], [1.0, 1.0]])

    def dfn(i, j):
        return float(np.linalg.norm(pts[i] - pts[j]))

    s = SurfaceSample(pts, distance_fn=dfn)
    with pytest.raises(UnstableEstimateError):
        rinow_region_check(s, 0.0, triangle_count=10, defect_tol=1e-9)
