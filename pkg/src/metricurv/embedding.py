"""Exact embedding (Wald) curvature of metric quadruples.

A quadruple embeds in the model surface of constant curvature kappa when
the corresponding determinant vanishes:

    kappa = 0:  D(Q) = 0                       (Cayley-Menger determinant)
    kappa > 0:  det(cos(sqrt(kappa) d_ij)) = 0, with sqrt(kappa) d_ij <= pi
                and all principal 3x3 minors >= 0
    kappa < 0:  det(cosh(sqrt(-kappa) d_ij)) = 0

The spherical and hyperbolic determinants are one analytic function of
kappa (cos/cosh share the even power series), identically zero at
kappa = 0; dividing by kappa^3 removes that trivial zero and tends to
D(Q)/8, which is how the solver scans across the sign change.
"""

from __future__ import annotations

import json
import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError, InvalidArgument, UnstableEstimateError
from .metric_core import MetricQuadruple, cayley_menger_det_quadruple

FLAT = "flat"
SPHERICAL = "spherical"
HYPERBOLIC = "hyperbolic"

# Quadruples whose flat realization has a corner angle below this are
# rejected by the samplers: the curvature solve is ill-conditioned there.
MIN_FLAT_ANGLE = 1e-3

# Relative collinearity defect allowed when building sd-quads from samples.
SD_COLLINEARITY_DEFECT = 0.02


@dataclass(frozen=True)
class CurvatureRoot:
    kappa: float
    case: str  # flat | spherical | hyperbolic
    residual: float
    admissible: bool
    low_confidence: bool = False

    def to_dict(self) -> dict:
        return {
            "kappa": self.kappa,
            "case": self.case,
            "residual": self.residual,
            "admissible": self.admissible,
            "low_confidence": self.low_confidence,
        }


@dataclass(frozen=True)
class CurvatureSolution:
    roots: tuple
    scan_range: tuple
    scan_resolution: int

    @property
    def admissible_roots(self) -> tuple:
        return tuple(r for r in self.roots if r.admissible)

    @property
    def kappas(self) -> tuple:
        return tuple(r.kappa for r in self.admissible_roots)

    def to_json(self) -> str:
        return json.dumps(
            {
                "roots": [r.to_dict() for r in self.roots],
                "scan": [self.scan_range[0], self.scan_range[1], self.scan_resolution],
            }
        )


@dataclass(frozen=True)
class WaldEstimate:
    kappa: float
    quadruple_count: int
    scale: float  # max quadruple diameter used
    dispersion: float  # interquartile range of pooled per-quadruple roots


def flat_residual(q: MetricQuadruple) -> float:
    """D(Q); zero (within tolerance) certifies kappa = 0."""
    return cayley_menger_det_quadruple(q)


def _model_matrix(dm: np.ndarray, kappa: float) -> np.ndarray:
    x = math.sqrt(abs(kappa)) * dm
    m = np.cos(x) if kappa > 0 else np.cosh(x)
    np.fill_diagonal(m, 1.0)
    return m


def _principal_minors3(m: np.ndarray) -> np.ndarray:
    subs = [np.delete(np.delete(m, i, 0), i, 1) for i in range(4)]
    return np.linalg.det(np.stack(subs))


def spherical_residual(q: MetricQuadruple, kappa: float, tol: float = 1e-9):
    """det(cos(sqrt(kappa) d_ij)) plus the admissibility flag.

    Admissible iff sqrt(kappa) d_ij <= pi for all six distances and every
    principal 3x3 minor is >= -tol.
    """
    if kappa <= 0:
        raise InvalidArgument("spherical residual needs kappa > 0")
    dm = q.matrix()
    m = _model_matrix(dm, kappa)
    residual = float(np.linalg.det(m))
    ok_dist = math.sqrt(kappa) * q.diam <= math.pi + tol
    ok_minors = bool(np.all(_principal_minors3(m) >= -tol))
    return residual, (ok_dist and ok_minors)


def hyperbolic_residual(q: MetricQuadruple, kappa: float) -> float:
    """det(cosh(sqrt(-kappa) d_ij))."""
    if kappa >= 0:
        raise InvalidArgument("hyperbolic residual needs kappa < 0")
    return float(np.linalg.det(_model_matrix(q.matrix(), kappa)))


def _is_admissible(q: MetricQuadruple, kappa: float, tol: float) -> bool:
    """Model-space realizability of a determinant root.

    For kappa > 0 this is the printed condition (distance bound + minors).
    For kappa < 0 the analogous minor condition on the cosh matrix is
    applied; it rejects determinant zeros that do not correspond to four
    points of the hyperbolic plane.
    """
    if kappa == 0.0:
        return True
    m = _model_matrix(q.matrix(), kappa)
    if kappa > 0 and math.sqrt(kappa) * q.diam > math.pi + tol:
        return False
    return bool(np.all(_principal_minors3(m) >= -tol))


def _residual_grid(dm: np.ndarray, kappas: np.ndarray) -> np.ndarray:
    """Vectorized det(cos/cosh(sqrt(|k|) d_ij)) over a kappa grid."""
    x = np.sqrt(np.abs(kappas))[:, None, None] * dm[None, :, :]
    mats = np.where(kappas[:, None, None] > 0, np.cos(x), np.cosh(x))
    idx = np.arange(4)
    mats[:, idx, idx] = 1.0
    return np.linalg.det(mats)


def _model_residual(dm: np.ndarray, kappa: float) -> float:
    x = math.sqrt(abs(kappa)) * dm
    m = np.cos(x) if kappa > 0 else np.cosh(x)
    np.fill_diagonal(m, 1.0)
    return float(np.linalg.det(m))


def default_scan(q: MetricQuadruple, n_steps: int = 512) -> tuple:
    """kappa in [-(pi/diam)^2, +(pi/diam)^2]: the spherical distance bound
    caps useful positive curvature; the negative range mirrors it."""
    kmax = (math.pi / q.diam) ** 2
    return (-kmax, kmax, n_steps)


def solve_embedding_curvature(
    q: MetricQuadruple,
    scan: tuple | None = None,
    tol: float = 1e-10,
) -> CurvatureSolution:
    """Scan, bracket and bisect the three-case determinant equation.

    Returns every bracketed root with its admissibility certificate;
    an empty root set is a legitimate outcome.  The flat root kappa = 0 is
    included iff |D(Q)| <= tol * diam^8.
    """
    if q.min_distance <= 0.0:
        raise InvalidArgument("degenerate quadruple: zero distance")
    if scan is None:
        scan = default_scan(q)
    kmin, kmax, n_steps = scan
    if not (kmin < kmax) or n_steps < 8:
        raise InvalidArgument("invalid scan range")
    dm = q.matrix()
    diam = q.diam

    roots: list[CurvatureRoot] = []

    d_flat = cayley_menger_det_quadruple(q)
    flat_ok = abs(d_flat) <= tol * diam**8
    if flat_ok and kmin <= 0.0 <= kmax:
        roots.append(CurvatureRoot(0.0, FLAT, d_flat, True))

    grid = np.linspace(kmin, kmax, n_steps)
    # keep the grid away from the identical zero of the determinant at 0
    k_eps = 1e-9 * max(abs(kmin), abs(kmax))
    grid = np.where(np.abs(grid) < k_eps, np.where(grid >= 0, k_eps, -k_eps), grid)
    g = _residual_grid(dm, grid)
    h = g / grid**3  # tends to D(Q)/8 at 0: no spurious sign flip there

    # normalization for the tangential-root heuristic
    h_scale = float(np.max(np.abs(h))) or 1.0

    def refine(a: float, b: float, ha: float, hb: float) -> float:
        for _ in range(80):
            mid = 0.5 * (a + b)
            hm = _model_residual(dm, mid) / mid**3
            if hm == 0.0:
                return mid
            if (ha < 0) != (hm < 0):
                b, hb = mid, hm
            else:
                a, ha = mid, hm
            if b - a <= 1e-15 * max(abs(a), abs(b), 1e-30):
                break
        return 0.5 * (a + b)

    sign = np.sign(h)
    crossings = np.where(sign[:-1] * sign[1:] < 0)[0]
    bracketed: list[float] = []
    for i in crossings:
        a, b = float(grid[i]), float(grid[i + 1])
        if a < 0 < b:
            # split at the origin (handled separately via D(Q)) and look
            # for the crossing on either side of it
            h0 = d_flat / 8.0  # limit of h at 0
            if not flat_ok and h0 != 0.0:
                if (float(h[i]) < 0) != (h0 < 0):
                    bracketed.append(refine(a, -k_eps, float(h[i]), h0))
                if (h0 < 0) != (float(h[i + 1]) < 0):
                    bracketed.append(refine(k_eps, b, h0, float(h[i + 1])))
            continue
        bracketed.append(refine(a, b, float(h[i]), float(h[i + 1])))

    # tangential (double) roots: |h| dips near zero with no sign change
    tang_tol = 1e-6 * h_scale
    for i in range(1, n_steps - 1):
        if abs(h[i]) <= tang_tol and h[i - 1] * h[i + 1] > 0:
            if abs(h[i]) < abs(h[i - 1]) and abs(h[i]) < abs(h[i + 1]):
                k = float(grid[i])
                if not any(abs(k - r) <= 4 * (kmax - kmin) / n_steps for r in bracketed):
                    case = SPHERICAL if k > 0 else HYPERBOLIC
                    roots.append(
                        CurvatureRoot(
                            k,
                            case,
                            _model_residual(dm, k),
                            _is_admissible(q, k, tol=1e-9),
                            low_confidence=True,
                        )
                    )

    for k in bracketed:
        case = SPHERICAL if k > 0 else HYPERBOLIC
        roots.append(
            CurvatureRoot(
                k,
                case,
                _model_residual(dm, k),
                _is_admissible(q, k, tol=1e-9),
            )
        )

    roots.sort(key=lambda r: r.kappa)
    return CurvatureSolution(tuple(roots), (kmin, kmax), n_steps)


# --- model-space trigonometry (the comparison engine) ---


def model_side(kappa: float, b: float, c: float, alpha: float) -> float:
    """Third side of the S_kappa triangle with sides b, c and included angle alpha."""
    if b <= 0 or c <= 0:
        raise InvalidArgument("sides must be positive")
    if not (0.0 <= alpha <= math.pi + 1e-12):
        raise InvalidArgument("angle must lie in [0, pi]")
    if kappa > 0:
        r = math.sqrt(kappa)
        if b >= math.pi / r or c >= math.pi / r:
            raise DomainError("side exceeds the spherical diameter pi/sqrt(kappa)")
        if kappa * max(b, c) ** 2 > 1e-12:
            cosa = math.cos(r * b) * math.cos(r * c) + math.sin(r * b) * math.sin(
                r * c
            ) * math.cos(alpha)
            return math.acos(min(1.0, max(-1.0, cosa))) / r
    elif kappa < 0:
        r = math.sqrt(-kappa)
        if -kappa * max(b, c) ** 2 > 1e-12:
            cosha = math.cosh(r * b) * math.cosh(r * c) - math.sinh(r * b) * math.sinh(
                r * c
            ) * math.cos(alpha)
            return math.acosh(max(1.0, cosha)) / r
    return math.sqrt(max(b * b + c * c - 2.0 * b * c * math.cos(alpha), 0.0))


def model_angle(kappa: float, b: float, c: float, a: float, tol: float = 1e-9) -> float:
    """Angle opposite side a in the S_kappa triangle with sides a, b, c."""
    if b <= 0 or c <= 0:
        raise InvalidArgument("sides must be positive")
    if kappa > 0:
        r = math.sqrt(kappa)
        if max(a, b, c) >= math.pi / r:
            raise DomainError("side exceeds the spherical diameter pi/sqrt(kappa)")
        if kappa * max(a, b, c) ** 2 > 1e-12:
            num = math.cos(r * a) - math.cos(r * b) * math.cos(r * c)
            den = math.sin(r * b) * math.sin(r * c)
            cosa = num / den
            if abs(cosa) > 1.0 + tol:
                raise DomainError("sides are not realizable in S_kappa")
            return math.acos(min(1.0, max(-1.0, cosa)))
    elif kappa < 0:
        r = math.sqrt(-kappa)
        if -kappa * max(a, b, c) ** 2 > 1e-12:
            num = math.cosh(r * b) * math.cosh(r * c) - math.cosh(r * a)
            den = math.sinh(r * b) * math.sinh(r * c)
            cosa = num / den
            if abs(cosa) > 1.0 + tol:
                raise DomainError("sides are not realizable in S_kappa")
            return math.acos(min(1.0, max(-1.0, cosa)))
    cosa = (b * b + c * c - a * a) / (2.0 * b * c)
    if abs(cosa) > 1.0 + tol:
        raise DomainError("triangle inequality violated")
    return math.acos(min(1.0, max(-1.0, cosa)))


def is_planar_quadruple(q: MetricQuadruple, kappa: float, tol: float = 1e-8) -> bool:
    """True iff some apex sees the other three points at angles summing to 2 pi.

    Requires the quadruple to be realizable in S_kappa (a solver root);
    otherwise the angles are inconsistent and a DomainError propagates.
    """
    if kappa == 0.0:
        d = cayley_menger_det_quadruple(q)
        if abs(d) > 1e-8 * q.diam**8:
            raise DomainError("quadruple is not flat-embeddable (D != 0)", value=d)
    m = q.matrix()
    for apex in range(4):
        others = [i for i in range(4) if i != apex]
        try:
            total = 0.0
            for a, b in ((0, 1), (0, 2), (1, 2)):
                i, j = others[a], others[b]
                total += model_angle(kappa, m[apex, i], m[apex, j], m[i, j])
        except DomainError:
            raise
        if abs(total - 2.0 * math.pi) <= tol:
            return True
    return False


# --- sampling curvature from surfaces ---


def _flat_angles_ok(m: np.ndarray, exempt: frozenset | None = None) -> bool:
    """Reject quadruples whose flat triangle realizations are near-degenerate.

    ``exempt`` names one triangle (as a frozenset of indices) allowed to be
    degenerate: the geodesic triple of an sd-quad is collinear by design.
    """
    for tri in ((0, 1, 2), (0, 1, 3), (0, 2, 3), (1, 2, 3)):
        if exempt is not None and frozenset(tri) == exempt:
            continue
        for v in range(3):
            i = tri[v]
            j, k = (tri[(v + 1) % 3], tri[(v + 2) % 3])
            cosv = (m[i, j] ** 2 + m[i, k] ** 2 - m[j, k] ** 2) / (2 * m[i, j] * m[i, k])
            if abs(cosv) > math.cos(MIN_FLAT_ANGLE):
                return False
    return True


def _quad_from_indices(sample, idx, exempt: frozenset | None = None) -> MetricQuadruple | None:
    m = np.zeros((4, 4))
    for a in range(4):
        for b in range(a + 1, 4):
            m[a, b] = m[b, a] = sample.distance(idx[a], idx[b])
    if m[np.triu_indices(4, 1)].min() <= 0:
        return None
    try:
        q = MetricQuadruple.from_matrix(m)
    except InvalidArgument:
        return None
    if not _flat_angles_ok(m, exempt=exempt):
        return None
    return q


def _sd_quad_indices(
    sample,
    ball,
    dist_p,
    rng,
    tries: int = 40,
    collinearity_tol: float = SD_COLLINEARITY_DEFECT,
):
    """Three near-collinear points along an approximate geodesic plus an apex."""
    ball = np.asarray(ball)
    for _ in range(tries):
        a, c = rng.choice(ball, size=2, replace=False)
        dac = sample.distance(a, c)
        if dac <= 0:
            continue
        da = sample.distances_from(a)[ball]
        dc = sample.distances_from(c)[ball]
        defect = da + dc - dac
        order = np.argsort(defect)
        for j in order[:6]:
            b = int(ball[j])
            if b in (a, c):
                continue
            if defect[j] > collinearity_tol * dac:
                break
            if min(da[j], dc[j]) < 0.2 * dac:
                continue
            # apex at comparable distance from the middle point
            db = sample.distances_from(b)[ball]
            cand = ball[(db > 0.3 * dac) & (db < 1.2 * dac)]
            cand = [int(x) for x in cand if x not in (a, b, c)]
            if not cand:
                continue
            x = int(rng.choice(cand))
            return (int(a), int(b), int(c), x), (int(a), int(b), int(c))
    return None, None


def wald_curvature_at_point(
    sample,
    p: int,
    scales,
    quads_per_scale: int = 32,
    sd_only: bool = False,
    seed: int = 0,
    collinearity_tol: float = SD_COLLINEARITY_DEFECT,
) -> list[WaldEstimate]:
    """Per-scale Wald curvature estimates from quadruples in shrinking balls.

    For each scale, quadruples are drawn from the ball of that radius
    around ``p`` and solved exactly.  Small quadruples routinely have a
    second admissible root of order scale^-2 (they also embed in a model
    sphere of comparable size); only the smallest-|kappa| root tracks the
    limit at the point, so that root is pooled per quadruple and the
    estimate is the pooled median (dispersion = interquartile range).
    Scales with fewer than 4 in-ball neighbors are skipped with a warning.
    """
    rng = np.random.default_rng(seed)
    dist_p = sample.distances_from(p)
    estimates = []
    for delta in scales:
        ball = np.where((dist_p > 0) & (dist_p <= delta))[0]
        if len(ball) < 4:
            warnings.warn(f"scale {delta}: only {len(ball)} neighbors, skipped")
            continue
        kappas = []
        max_diam = 0.0
        n_solved = 0
        attempts = 0
        while n_solved < quads_per_scale and attempts < 12 * quads_per_scale:
            attempts += 1
            exempt = None
            if sd_only:
                idx, _ = _sd_quad_indices(
                    sample, ball, dist_p, rng, collinearity_tol=collinearity_tol
                )
                if idx is None:
                    continue
                exempt = frozenset((0, 1, 2))  # the geodesic triple is collinear
            else:
                idx = tuple(int(i) for i in rng.choice(ball, size=4, replace=False))
            q = _quad_from_indices(sample, idx, exempt=exempt)
            if q is None:
                continue
            sol = solve_embedding_curvature(q)
            ks = sol.kappas
            if sd_only and len(ks) > 1:
                # sd-quads have at most one curvature; tolerance artifacts logged
                warnings.warn(f"sd-quad produced {len(ks)} admissible roots")
            if ks:
                kappas.append(min(ks, key=abs))
                max_diam = max(max_diam, q.diam)
                n_solved += 1
        if not kappas:
            warnings.warn(f"scale {delta}: no admissible roots, skipped")
            continue
        arr = np.asarray(kappas)
        q1, q3 = np.percentile(arr, [25, 75])
        estimates.append(
            WaldEstimate(
                kappa=float(np.median(arr)),
                quadruple_count=n_solved,
                scale=max_diam,
                dispersion=float(q3 - q1),
            )
        )
    return estimates


def _snap_to_geodesic(sample, p: int, q: int, x: float, defect_tol: float):
    """Sample point nearest to arc length x along the approximate geodesic pq."""
    dp = sample.distances_from(p)
    dq = sample.distances_from(q)
    dpq = dp[q]
    defect = dp + dq - dpq
    ok = defect <= defect_tol * dpq
    ok[p] = ok[q] = False
    idx = np.where(ok)[0]
    if idx.size == 0:
        return None
    best = idx[np.argmin(np.abs(dp[idx] - x))]
    return int(best)


def angle_measure(
    sample,
    p: int,
    q: int,
    r: int,
    x_values,
    defect_tol: float = 0.02,
    mono_tol: float = 0.1,
) -> float:
    """Metric angle at p between the directions of q and r.

    Evaluates d(x)/x with q(x), r(x) snapped onto the approximate
    geodesics at radius x, Richardson-extrapolates the two smallest
    scales, and returns 2 arcsin(limit / 2) clamped to [0, pi].
    """
    xs = sorted(float(x) for x in x_values)
    if len(xs) < 2:
        raise InvalidArgument("need at least two x values")
    dp = sample.distances_from(p)
    if xs[-1] >= min(dp[q], dp[r]):
        raise InvalidArgument("x values must stay within min(pq, pr)")
    ratios = []
    radii = []
    for x in xs:
        qi = _snap_to_geodesic(sample, p, q, x, defect_tol)
        ri = _snap_to_geodesic(sample, p, r, x, defect_tol)
        if qi is None or ri is None:
            raise UnstableEstimateError(f"no on-geodesic sample point at radius {x}")
        xq, xr = dp[qi], dp[ri]
        ratios.append(sample.distance(qi, ri) / (0.5 * (xq + xr)))
        radii.append(0.5 * (xq + xr))
    diffs = np.diff(ratios)
    big = np.abs(diffs) > mono_tol * max(abs(ratios[-1]), 1e-12)
    if np.any(big) and np.any(diffs[big] > 0) and np.any(diffs[big] < 0):
        raise UnstableEstimateError("d(x)/x sequence is non-monotone beyond tolerance")
    # Richardson on the two smallest radii, O(x^2) error model
    x1, x2 = radii[1], radii[0]
    r1, r2 = ratios[1], ratios[0]
    if abs(x1 - x2) < 1e-15 * x1:
        limit = r2
    else:
        limit = (x1 * x1 * r2 - x2 * x2 * r1) / (x1 * x1 - x2 * x2)
    half = min(1.0, max(0.0, limit / 2.0))
    return 2.0 * math.asin(half)


@dataclass
class RinowReport:
    fraction_leq: float
    fraction_geq: float
    witnesses: list = field(default_factory=list)
    n_triangles: int = 0
    n_skipped: int = 0


def rinow_region_check(
    sample,
    kappa: float,
    triangle_count: int = 100,
    tol: float = 1e-6,
    seed: int = 0,
    defect_tol: float = 0.01,
    max_side: float | None = None,
    apexes=None,
) -> RinowReport:
    """Comparison-triangle tally: how often xy <= x_k y_k (+tol) and >= (-tol).

    Samples geodesic triangles T(p,q,r), snaps x on pq and y on pr to
    sample points with small geodesic defect, builds the comparison
    configuration in S_kappa and compares d(x,y) against the model value.
    Triangles exceeding the spherical diameter (kappa > 0) are skipped and
    counted.  The comparison is only as exact as the snapped points are
    on-geodesic: for tight tolerances, restrict ``apexes`` to points of the
    sample whose outgoing geodesics are themselves sampled (grid centers,
    poles of polar grids) and use a small ``defect_tol``.
    """
    rng = np.random.default_rng(seed)
    n = len(sample)
    apexes = None if apexes is None else [int(a) for a in apexes]
    leq = geq = done = skipped = 0
    witnesses = []
    attempts = 0
    while done < triangle_count and attempts < 50 * triangle_count:
        attempts += 1
        q, r = (int(i) for i in rng.choice(n, size=2, replace=False))
        p = int(rng.choice(apexes)) if apexes is not None else int(rng.integers(n))
        if p in (q, r):
            continue
        dp = sample.distances_from(p)
        b, c = dp[q], dp[r]
        a = sample.distance(q, r)
        if min(a, b, c) <= 0:
            continue
        if max_side is not None and max(a, b, c) > max_side:
            continue
        if kappa > 0 and max(a, b, c) >= math.pi / math.sqrt(kappa):
            skipped += 1
            continue
        try:
            alpha = model_angle(kappa, b, c, a)
        except DomainError:
            skipped += 1
            continue
        xi = _snap_to_geodesic(sample, p, q, float(rng.uniform(0.25, 0.75)) * b, defect_tol)
        yi = _snap_to_geodesic(sample, p, r, float(rng.uniform(0.25, 0.75)) * c, defect_tol)
        if xi is None or yi is None or xi == yi:
            continue
        dx, dy = dp[xi], dp[yi]
        if dx <= 0 or dy <= 0:
            continue
        model = model_side(kappa, dx, dy, alpha)
        actual = sample.distance(xi, yi)
        done += 1
        if actual <= model + tol:
            leq += 1
        else:
            witnesses.append(("leq", (p, q, r, xi, yi), actual, model))
        if actual >= model - tol:
            geq += 1
        else:
            witnesses.append(("geq", (p, q, r, xi, yi), actual, model))
    if done == 0:
        raise UnstableEstimateError("no usable comparison triangles found")
    return RinowReport(
        fraction_leq=leq / done,
        fraction_geq=geq / done,
        witnesses=witnesses[:20],
        n_triangles=done,
        n_skipped=skipped,
    )
