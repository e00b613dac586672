"""Rational sd-quad curvature: formulas, error bounds and convergence tables."""

import math
import warnings

import numpy as np
import pytest

from metricurv.embedding import solve_embedding_curvature
from metricurv.errors import IllConditionedError, InvalidArgument
from metricurv.metric_core import MetricQuadruple
from metricurv.robinson import (
    LAMBDA_FLOOR,
    ConvergenceRow,
    ConvergenceTable,
    SdQuad,
    euclidean_angle,
    gauss_estimate,
    lambda_q,
    robinson_K,
    robinson_K_isoceles,
    robinson_K_right,
    sd_quad_from_sample,
)
from metricurv.surfaces import sample_analytic


def flat_sd_quad(a, b, x, y):
    """p1 = (-a, 0), p2 = origin, p3 = (b, 0), apex p4 = (x, y)."""
    return SdQuad(
        d12=a,
        d23=b,
        d13=a + b,
        d14=math.hypot(x + a, y),
        d24=math.hypot(x, y),
        d34=math.hypot(x - b, y),
    )


def spherical_point(lon, lat):
    return np.array(
        [math.cos(lat) * math.cos(lon), math.cos(lat) * math.sin(lon), math.sin(lat)]
    )


def spherical_dist(u, v):
    return math.acos(min(1.0, max(-1.0, float(u @ v))))


# equator points at longitudes 0, s, 2s with the apex solved (off-line) so
# that d24 = s and d34 = sqrt(2) s hold to machine precision on the unit
# sphere; the right-case formula preconditions are met exactly.
RIGHT_S = 0.3
RIGHT_D14 = 0.41777563457873124
RIGHT_D24 = 0.30000000000039123
RIGHT_D34 = 0.4242640687120901
RIGHT_QUAD = SdQuad(d12=RIGHT_S, d23=RIGHT_S, d13=2 * RIGHT_S,
                    d14=RIGHT_D14, d24=RIGHT_D24, d34=RIGHT_D34)
RIGHT_K = 1.0122290881512155
RIGHT_EXACT_ROOT = 1.019365533924212


# --- euclidean_angle ---


def test_euclidean_angle_values():
    assert euclidean_angle(3, 4, 5) == pytest.approx(math.pi / 2, rel=1e-12)
    assert euclidean_angle(1, 1, 1) == pytest.approx(math.pi / 3, rel=1e-12)
    assert euclidean_angle(1, 1, 2) == pytest.approx(math.pi, rel=1e-12)


def test_euclidean_angle_errors():
    with pytest.raises(Exception):
        euclidean_angle(0.0, 1.0, 1.0)
    with pytest.raises(Exception):
        euclidean_angle(1.0, 1.0, 5.0)


# --- SdQuad validation ---


def test_sd_quad_rejects_non_geodesic_triple():
    with pytest.raises(InvalidArgument):
        SdQuad(d12=1, d23=1, d13=1.5, d14=1, d24=1, d34=1)


def test_sd_quad_rejects_degenerate_apex_triangle():
    with pytest.raises(InvalidArgument):
        SdQuad(d12=1, d23=1, d13=2, d14=2, d24=1, d34=0.0)


def test_sd_quad_to_quadruple_round_trip():
    q = flat_sd_quad(0.8, 0.6, 0.1, 0.9)
    mq = q.to_quadruple()
    assert mq.d13 == q.d13 and mq.d24 == q.d24
    assert q.diam == max(mq.distances)


# --- K on flat and curved layouts ---


def test_robinson_flat_sd_quad_is_zero():
    rng = np.random.default_rng(1)
    for _ in range(5):
        q = flat_sd_quad(rng.uniform(0.5, 1.5), rng.uniform(0.5, 1.5),
                         rng.uniform(-0.3, 0.3), rng.uniform(0.5, 1.5))
        assert robinson_K(q).K == pytest.approx(0.0, abs=1e-9)


def test_robinson_sphere_within_bound():
    # geodesic triple on the equator, apex on a meridian: exact curvature 1
    for s, lat in ((0.1, 0.1), (0.2, 0.15), (0.05, 0.08)):
        p = [spherical_point(-s, 0), spherical_point(0, 0), spherical_point(s, 0),
             spherical_point(0, lat)]
        q = SdQuad(d12=s, d23=s, d13=2 * s,
                   d14=spherical_dist(p[0], p[3]), d24=lat,
                   d34=spherical_dist(p[2], p[3]))
        res = robinson_K(q)
        bound_true = 4.0 * 1.0**2 * q.diam**2 / res.lam
        assert abs(res.K - 1.0) <= bound_true
        assert abs(res.K - 1.0) <= 0.05


def test_robinson_hyperbolic_within_bound():
    # geodesic triple on a hyperbolic line (curvature -1), apex off it
    def hdist(t1, s1, t2, s2):
        # hyperboloid model with coordinates (line parameter t, offset s)
        def pt(t, s):
            return (math.cosh(s) * np.array([math.cosh(t), math.sinh(t), 0.0])
                    + math.sinh(s) * np.array([0.0, 0.0, 1.0]))

        u, v = pt(t1, s1), pt(t2, s2)
        j = np.diag([1.0, -1.0, -1.0])
        return math.acosh(max(1.0, float(u @ j @ v)))

    s = 0.15
    q = SdQuad(d12=s, d23=s, d13=2 * s,
               d14=hdist(-s, 0, 0, 0.12), d24=hdist(0, 0, 0, 0.12),
               d34=hdist(s, 0, 0, 0.12))
    res = robinson_K(q)
    bound_true = 4.0 * 1.0 * q.diam**2 / res.lam
    assert abs(res.K - (-1.0)) <= bound_true
    assert res.K == pytest.approx(-1.0, abs=0.05)


def test_robinson_result_fields():
    res = robinson_K(RIGHT_QUAD)
    assert res.error_bound > 0
    assert res.error_bound_selfconsistent >= res.error_bound
    assert res.lam > LAMBDA_FLOOR
    assert res.S > 0


# --- special-case formulas ---


def test_isoceles_matches_general_formula():
    rng = np.random.default_rng(1)
    for _ in range(5):
        a = rng.uniform(0.5, 1.5)
        q = flat_sd_quad(a, a, rng.uniform(-0.3, 0.3), rng.uniform(0.5, 1.5))
        assert robinson_K_isoceles(q) == pytest.approx(robinson_K(q).K, abs=1e-10)
    for s, lat in ((0.1, 0.1), (0.2, 0.15)):
        p = [spherical_point(-s, 0), spherical_point(0, 0), spherical_point(s, 0),
             spherical_point(0, lat)]
        q = SdQuad(d12=s, d23=s, d13=2 * s,
                   d14=spherical_dist(p[0], p[3]), d24=lat,
                   d34=spherical_dist(p[2], p[3]))
        assert robinson_K_isoceles(q) == pytest.approx(robinson_K(q).K, abs=1e-10)


def test_isoceles_requires_symmetry():
    q = flat_sd_quad(1.0, 0.7, 0.0, 1.0)
    with pytest.raises(InvalidArgument):
        robinson_K_isoceles(q)


def test_right_case_flat_is_zero():
    a = 1.0
    q = flat_sd_quad(a, a, 0.0, a)  # apex at (0, a): d24 = a, d34 = sqrt(2) a
    assert robinson_K_right(q) == pytest.approx(0.0, abs=1e-12)


def test_right_case_spherical_frozen_instance():
    assert robinson_K(RIGHT_QUAD).K == pytest.approx(RIGHT_K, rel=1e-9)
    assert robinson_K_right(RIGHT_QUAD, tol=1e-6) == pytest.approx(RIGHT_K, rel=1e-8)
    # the exact curvature of this quadruple lies within the error bound
    res = robinson_K(RIGHT_QUAD)
    assert abs(res.K - RIGHT_EXACT_ROOT) <= res.error_bound


def test_right_case_exact_root_oracle():
    mq = MetricQuadruple(RIGHT_S, 2 * RIGHT_S, RIGHT_D14,
                         RIGHT_S, RIGHT_D24, RIGHT_D34)
    sol = solve_embedding_curvature(mq)
    ks = [r.kappa for r in sol.admissible_roots]
    assert min(ks, key=abs) == pytest.approx(RIGHT_EXACT_ROOT, rel=1e-9)


def test_right_case_rejects_wrong_preconditions():
    q = flat_sd_quad(1.0, 1.0, 0.2, 1.0)
    with pytest.raises(InvalidArgument):
        robinson_K_right(q)


# --- conditioning ---


def test_lambda_scale_invariant_and_nonnegative():
    q = flat_sd_quad(0.9, 1.1, 0.1, 0.8)
    lam, s = lambda_q(q)
    assert lam >= 0
    for scale in (0.25, 4.0):
        qs = SdQuad(d12=q.d12 * scale, d23=q.d23 * scale, d13=q.d13 * scale,
                    d14=q.d14 * scale, d24=q.d24 * scale, d34=q.d34 * scale)
        lam_s, _ = lambda_q(qs)
        assert lam_s == pytest.approx(lam, rel=1e-12)


def test_near_linear_quadruple_is_rejected():
    q = flat_sd_quad(1.0, 1.0, 0.0, 1e-4)
    lam, _ = lambda_q(q)
    with pytest.raises(IllConditionedError):
        robinson_K(q, lam_tol=2 * lam)
    assert robinson_K(q).K == pytest.approx(0.0, abs=1e-6)  # default floor passes


# --- sampled estimates ---


def test_gauss_estimate_flat_grid_is_zero():
    plane = sample_analytic("plane", n=400, seed=3, layout="grid", w=2.0, h=2.0)
    p = len(plane) // 2 + 1
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        table = gauss_estimate(plane, p, [0.5], seed=2, collinearity_tol=1e-8)
    assert table.rows
    assert abs(table.rows[0].median_K) <= 1e-9


def test_gauss_estimate_sphere_patch(small_sphere_patch):
    sample, center = small_sphere_patch
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        table = gauss_estimate(sample, center, [0.4, 0.2], seed=1,
                               collinearity_tol=1e-8)
    assert table.rows
    assert table.rows[-1].median_K == pytest.approx(1.0, abs=0.3)


def test_sd_quad_from_sample():
    plane = sample_analytic("plane", n=100, seed=0, layout="grid", w=1.0, h=1.0)
    v = plane.vertices
    # three points on the bottom grid row plus an apex one row up
    row = np.where(v[:, 1] == v[:, 1].min())[0]
    a, b, c = int(row[0]), int(row[2]), int(row[5])
    apex = int(np.argmin(np.linalg.norm(v - (v[b] + [0.0, 0.3]), axis=1)))
    q = sd_quad_from_sample(plane, (a, b, c, apex))
    assert q.d13 == pytest.approx(q.d12 + q.d23, rel=1e-12)
    assert robinson_K(q).K == pytest.approx(0.0, abs=1e-9)


def test_convergence_table_csv(tmp_path):
    table = ConvergenceTable(
        (
            ConvergenceRow(scale=0.4, median_K=1.1, iqr=0.2, max_error_bound=0.5,
                           n_quads=10),
            ConvergenceRow(scale=0.2, median_K=1.05, iqr=0.1, max_error_bound=0.2,
                           n_quads=10),
        )
    )
    assert table.error_bound_monotone
    out = tmp_path / "table.csv"
    table.write_csv(out)
    lines = out.read_text().strip().splitlines()
    assert lines[0] == "scale,median_K,iqr,max_error_bound,n_quads"
    assert len(lines) == 3
