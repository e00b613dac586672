"""Rational approximation of embedding curvature for semi-dependent quadruples.

For an sd-quad (p1, p2, p3 on a geodesic, p4 the apex) the curvature is
approximated by

    K(Q) = 6 (cos A + cos A') / (d24 (d12 sin^2 A + d23 sin^2 A'))

with A = angle(p1 p2 p4) and A' = angle(p3 p2 p4) taken in the flat
triangles, and the error obeys |kappa - K| < 4 kappa^2 diam^2 / lambda.

The distance-only special-case formulas below are algebraically derived
from the angle form and verified against it; the commonly printed
transcriptions of both contain typos (a d34/d13 swap and a missing d12
factor) that the identities in the test suite pin down.
"""

from __future__ import annotations

import csv
import math
import warnings
from dataclasses import dataclass

import numpy as np

from .embedding import SD_COLLINEARITY_DEFECT, _sd_quad_indices
from .errors import DomainError, IllConditionedError, InvalidArgument
from .metric_core import MetricQuadruple, _triangle_slack

# Quadruples with lambda below this are too close to linear for the
# approximation to be trustworthy; the samplers drop them.
LAMBDA_FLOOR = 0.05


@dataclass(frozen=True)
class SdQuad:
    """Quadruple with p1, p2, p3 on a common geodesic: d13 = d12 + d23.

    Point 2 is the midpoint of the geodesic triple, point 4 the apex.
    """

    d12: float
    d23: float
    d13: float
    d14: float
    d24: float
    d34: float
    tol: float = 0.02

    def __post_init__(self):
        if min(self.d12, self.d23, self.d13, self.d14, self.d24, self.d34) < 0:
            raise InvalidArgument("distances must be non-negative")
        if abs(self.d13 - self.d12 - self.d23) > self.tol * max(self.d13, 1e-300):
            raise InvalidArgument("not an sd-quad: d13 != d12 + d23 within tolerance")
        for a, b, c in ((self.d12, self.d14, self.d24), (self.d23, self.d24, self.d34)):
            slack = _triangle_slack(max(a, b, c))
            if a >= b + c - slack or b >= a + c - slack or c >= a + b - slack:
                raise InvalidArgument("apex triangle violates the strict triangle inequality")

    @property
    def diam(self) -> float:
        return max(self.d12, self.d23, self.d13, self.d14, self.d24, self.d34)

    def to_quadruple(self) -> MetricQuadruple:
        return MetricQuadruple(
            self.d12, self.d13, self.d14, self.d23, self.d24, self.d34, validate=False
        )


@dataclass(frozen=True)
class RobinsonResult:
    K: float
    error_bound: float
    error_bound_selfconsistent: float
    lam: float
    S: float


def euclidean_angle(a: float, b: float, opp: float) -> float:
    """Angle opposite ``opp`` in the flat triangle with adjacent sides a, b."""
    if a <= 0 or b <= 0:
        raise DomainError("adjacent sides must be positive")
    cosv = (a * a + b * b - opp * opp) / (2.0 * a * b)
    slack = _triangle_slack(max(a, b, opp))
    if abs(cosv) > 1.0 + slack / min(a, b):
        raise DomainError("triangle inequality violated")
    return math.acos(min(1.0, max(-1.0, cosv)))


def _angles(q: SdQuad) -> tuple:
    ang = euclidean_angle(q.d12, q.d24, q.d14)
    angp = euclidean_angle(q.d23, q.d24, q.d34)
    return ang, angp


def lambda_q(q: SdQuad) -> tuple:
    """Conditioning number lambda(Q) and the semi-perimeter scale S."""
    ang, angp = _angles(q)
    p = 0.5 * (q.d12 + q.d14 + q.d24)
    pp = 0.5 * (q.d23 + q.d34 + q.d24)
    s = max(p, pp)
    lam = q.d24 * (q.d12 * math.sin(ang) + q.d23 * math.sin(angp)) / (s * s)
    return lam, s


def robinson_K(q: SdQuad, lam_tol: float = 1e-9) -> RobinsonResult:
    """Curvature approximation with its a-posteriori error bound.

    The bound 4 kappa^2 diam^2 / lambda involves the unknown exact
    curvature; it is evaluated at kappa = K, and again after one
    fixed-point step kappa = |K| + bound for a self-consistent variant.
    """
    ang, angp = _angles(q)
    lam, s = lambda_q(q)
    if lam <= lam_tol:
        raise IllConditionedError("quadruple is too close to linear (lambda ~ 0)", value=lam)
    denom = q.d24 * (q.d12 * math.sin(ang) ** 2 + q.d23 * math.sin(angp) ** 2)
    k = 6.0 * (math.cos(ang) + math.cos(angp)) / denom
    d2 = q.diam**2
    bound = 4.0 * k * k * d2 / lam
    k1 = abs(k) + bound
    bound_sc = 4.0 * k1 * k1 * d2 / lam
    return RobinsonResult(K=k, error_bound=bound, error_bound_selfconsistent=bound_sc, lam=lam, S=s)


def robinson_K_isoceles(q: SdQuad, tol: float = 1e-9) -> float:
    """Distance-only curvature formula for the symmetric case d12 = d23."""
    if abs(q.d12 - q.d23) > tol * max(q.d12, 1e-300) + tol:
        raise InvalidArgument("isoceles formula requires d12 = d23")
    num = 12.0 * (2 * q.d12**2 + 2 * q.d24**2 - q.d14**2 - q.d34**2)
    den = (
        8 * q.d12**2 * q.d24**2
        - (q.d12**2 + q.d24**2 - q.d14**2) ** 2
        - (q.d12**2 + q.d24**2 - q.d34**2) ** 2
    )
    return num / den


def robinson_K_right(q: SdQuad, tol: float = 1e-6) -> float:
    """Curvature for d12 = d23 = d24 with a right apex angle (d34^2 = 2 d12^2).

    Evaluates both the angle form and the distance-only form and checks
    that they agree.
    """
    scale = max(q.d12, 1e-300)
    if abs(q.d12 - q.d23) > tol * scale or abs(q.d12 - q.d24) > tol * scale:
        raise InvalidArgument("right-case formula requires d12 = d23 = d24")
    if abs(q.d34**2 - 2.0 * q.d12**2) > tol * scale**2:
        raise InvalidArgument("right-case formula requires d34^2 = 2 d12^2")
    ang = euclidean_angle(q.d12, q.d24, q.d14)
    k_angle = 6.0 * math.cos(ang) / (q.d12**2 * (1.0 + math.sin(ang) ** 2))
    k_dist = (
        12.0
        * (2 * q.d12**2 - q.d14**2)
        / (4 * q.d12**4 + 4 * q.d14**2 * q.d12**2 - q.d14**4)
    )
    if abs(k_angle - k_dist) > 1e-8 * max(1.0, abs(k_angle)):
        raise DomainError("angle and distance forms disagree", value=k_angle - k_dist)
    return k_dist


def sd_quad_from_sample(sample, idx) -> SdQuad:
    """SdQuad from sample indices (a, b, c, apex) with b the midpoint."""
    a, b, c, x = idx
    return SdQuad(
        d12=sample.distance(a, b),
        d23=sample.distance(b, c),
        d13=sample.distance(a, c),
        d14=sample.distance(a, x),
        d24=sample.distance(b, x),
        d34=sample.distance(c, x),
    )


@dataclass(frozen=True)
class ConvergenceRow:
    scale: float
    median_K: float
    iqr: float
    max_error_bound: float
    n_quads: int


@dataclass(frozen=True)
class ConvergenceTable:
    rows: tuple

    @property
    def error_bound_monotone(self) -> bool:
        bounds = [r.max_error_bound for r in self.rows]
        return all(b1 >= b2 for b1, b2 in zip(bounds, bounds[1:]))

    def write_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["scale", "median_K", "iqr", "max_error_bound", "n_quads"])
            for r in self.rows:
                w.writerow([r.scale, r.median_K, r.iqr, r.max_error_bound, r.n_quads])


def gauss_estimate(
    sample,
    p: int,
    scales,
    quads_per_scale: int = 32,
    seed: int = 0,
    lam_floor: float = LAMBDA_FLOOR,
    collinearity_tol: float = SD_COLLINEARITY_DEFECT,
) -> ConvergenceTable:
    """Median Robinson curvature per shrinking scale around vertex ``p``.

    Only sd-quads with conditioning lambda above ``lam_floor`` enter the
    aggregate.  Scales with too few neighbors are skipped with a warning.
    """
    rng = np.random.default_rng(seed)
    dist_p = sample.distances_from(p)
    rows = []
    for delta in scales:
        ball = np.where((dist_p > 0) & (dist_p <= delta))[0]
        if len(ball) < 4:
            warnings.warn(f"scale {delta}: only {len(ball)} neighbors, skipped")
            continue
        ks, bounds = [], []
        got = 0
        attempts = 0
        while got < quads_per_scale and attempts < 20 * quads_per_scale:
            attempts += 1
            idx, _ = _sd_quad_indices(
                sample, ball, dist_p, rng, collinearity_tol=collinearity_tol
            )
            if idx is None:
                continue
            try:
                sq = sd_quad_from_sample(sample, idx)
                res = robinson_K(sq)
            except (InvalidArgument, DomainError):
                continue
            if res.lam < lam_floor:
                continue
            ks.append(res.K)
            bounds.append(res.error_bound)
            got += 1
        if not ks:
            warnings.warn(f"scale {delta}: no usable sd-quads, skipped")
            continue
        arr = np.asarray(ks)
        q1, q3 = np.percentile(arr, [25, 75])
        rows.append(
            ConvergenceRow(
                scale=float(delta),
                median_K=float(np.median(arr)),
                iqr=float(q3 - q1),
                max_error_bound=float(max(bounds)),
                n_quads=got,
            )
        )
    return ConvergenceTable(tuple(rows))
