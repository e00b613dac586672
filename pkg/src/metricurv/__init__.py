"""Metric (coordinate-free) curvature for sampled surfaces and curves.

Everything works from pairwise distances alone: embedding curvature of
metric quadruples, its rational approximation on semi-dependent quads,
curve curvature from arcs and chords, circumsphere geometry, and a
Gromov-Hausdorff toolkit for comparing finite metric spaces.
"""

__version__ = "0.1.0"

from .circumsphere import circumradius, cospherical_test, delta_det
from .curves import (
    ConsistencyReport,
    PolylineCurve,
    alt_curvature,
    curvature_consistency,
    haantjes_curvature,
    menger_curvature,
)
from .embedding import (
    CurvatureRoot,
    CurvatureSolution,
    WaldEstimate,
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
from .errors import (
    CapacityError,
    ConnectivityError,
    DomainError,
    IllConditionedError,
    InvalidArgument,
    MetricurvError,
    UnstableEstimateError,
)
from .ghspace import (
    ApproxGraph,
    Correspondence,
    NetCertificate,
    build_graph_approximation,
    dilatation,
    distortion,
    epsilon_delta_check,
    epsilon_net,
    gh_bounds,
    gh_distance_exact,
    hausdorff_distance,
    is_epsilon_isometry,
    lipschitz_distance,
    minimal_correspondence,
)
from .metric_core import (
    Embeddability,
    FiniteMetricSpace,
    MetricQuadruple,
    QuadrupleClass,
    cayley_menger_det,
    classify_quadruple,
    embeddability_r3,
    is_embeddable_r3,
    simplex_volume,
    triangle_area,
    validate_distance_matrix,
)
from .robinson import (
    ConvergenceTable,
    RobinsonResult,
    SdQuad,
    gauss_estimate,
    lambda_q,
    robinson_K,
    robinson_K_isoceles,
    robinson_K_right,
)
from .surfaces import SurfaceSample, load_mesh, sample_analytic

__all__ = [name for name in dir() if not name.startswith("_")]
