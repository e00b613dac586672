"""Metric curvature of sampled curves: Menger, Alt and Haantjes estimators.

All three work from distances alone.  Menger curvature of a point triple
is the inverse circumradius expressed through the side lengths; Alt
curvature shrinks the triple onto a point of a curve; Haantjes curvature
compares arc length against chord length,

    kappa_H^2 = 24 lim (arc - chord) / arc^3.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, InvalidArgument, UnstableEstimateError
from .metric_core import _triangle_slack


def menger_curvature(a: float, b: float, c: float) -> float:
    """Inverse circumradius of a triple with pairwise distances a, b, c."""
    if min(a, b, c) <= 0:
        raise DomainError("distances must be positive")
    slack = _triangle_slack(max(a, b, c))
    prods = (a + b + c) * (a + b - c) * (a - b + c) * (-a + b + c)
    if prods < 0:
        if max(c - a - b, a - b - c, b - a - c) <= slack:
            return 0.0
        raise DomainError("triangle inequality violated")
    return math.sqrt(prods) / (a * b * c)


class PolylineCurve:
    """Ordered curve samples with arc-length prefix sums and a chord oracle.

    Consecutive arc-length increments equal the consecutive chord
    distances, so the polyline arc is a lower bound on any two-point arc.
    Chords come either from vertex coordinates or from an explicit chord
    matrix (curves living in non-Euclidean ambient metrics).
    """

    def __init__(self, vertices=None, chord_matrix=None):
        if vertices is None and chord_matrix is None:
            raise InvalidArgument("need vertex coordinates or a chord matrix")
        self.vertices = None if vertices is None else np.asarray(vertices, dtype=float)
        self.chord_matrix = None if chord_matrix is None else np.asarray(chord_matrix, dtype=float)
        if self.chord_matrix is not None:
            n = self.chord_matrix.shape[0]
            if self.chord_matrix.shape != (n, n):
                raise InvalidArgument("chord matrix must be square")
            steps = np.array([self.chord_matrix[i, i + 1] for i in range(n - 1)])
        else:
            if self.vertices.ndim != 2 or len(self.vertices) < 2:
                raise InvalidArgument("need at least two vertices")
            steps = np.linalg.norm(np.diff(self.vertices, axis=0), axis=1)
        if np.any(steps <= 0):
            raise InvalidArgument("repeated consecutive vertices")
        self.arclen = np.concatenate([[0.0], np.cumsum(steps)])

    def __len__(self) -> int:
        return len(self.arclen)

    def chord(self, i: int, j: int) -> float:
        if self.chord_matrix is not None:
            return float(self.chord_matrix[i, j])
        return float(np.linalg.norm(self.vertices[i] - self.vertices[j]))

    def index_at_arclen(self, s: float) -> int:
        i = int(np.searchsorted(self.arclen, s))
        if i == 0:
            return 0
        if i >= len(self.arclen):
            return len(self.arclen) - 1
        return i if self.arclen[i] - s < s - self.arclen[i - 1] else i - 1

    @classmethod
    def from_json(cls, text: str) -> "PolylineCurve":
        obj = json.loads(text)
        if isinstance(obj, list):
            return cls(vertices=obj)
        if isinstance(obj, dict) and "vertices" in obj:
            return cls(vertices=obj.get("vertices"), chord_matrix=obj.get("chords"))
        raise InvalidArgument("curve JSON must be a vertex list or {vertices, chords}")


def _window_endpoints(curve: PolylineCurve, p: int, half_width: float):
    """Indices symmetric in arc length around p, None if out of range."""
    s = curve.arclen[p]
    if s - half_width < 0 or s + half_width > curve.arclen[-1]:
        return None
    q = curve.index_at_arclen(s - half_width)
    r = curve.index_at_arclen(s + half_width)
    if not (q < p < r):
        return None
    return q, r


def _richardson(sizes, values) -> float:
    """Two-point extrapolation to size -> 0 with an O(size^2) error model."""
    s1, s2 = sizes[-2], sizes[-1]  # s2 < s1
    v1, v2 = values[-2], values[-1]
    if abs(s1 - s2) < 1e-15 * s1:
        return v2
    return (s1 * s1 * v2 - s2 * s2 * v1) / (s1 * s1 - s2 * s2)


def alt_curvature(curve: PolylineCurve, p: int, window_schedule) -> float:
    """Menger curvature of (q, p, r) windows extrapolated to zero width."""
    widths = sorted(float(w) for w in window_schedule)
    values, sizes = [], []
    for w in reversed(widths):
        ends = _window_endpoints(curve, p, w)
        if ends is None:
            continue
        q, r = ends
        k = menger_curvature(curve.chord(p, q), curve.chord(q, r), curve.chord(r, p))
        # actual realized half-width, robust to index snapping
        u = 0.5 * (curve.arclen[r] - curve.arclen[q])
        values.append(k)
        sizes.append(u)
    if len(values) < 2:
        raise InvalidArgument("window schedule not resolvable on this curve")
    est = _richardson(sizes, values)
    if abs(values[-1]) > 1e-9 and abs(values[-1] - values[-2]) > 0.5 * abs(values[-1]):
        raise UnstableEstimateError("Menger values change by >50% at the finest windows")
    return est


def haantjes_curvature(
    curve: PolylineCurve,
    p: int,
    window_schedule,
    tol: float = 1e-12,
) -> float:
    """Arc-vs-chord curvature, extrapolated to zero window.

    Pre-extrapolation values are 24 (arc - chord) / arc^3 per window.
    With three or more windows the extrapolation fits
    A + a s^2 + b s^-2: the s^-2 term absorbs the bias of the polyline
    arc (sum of chords) against the true arc.  With two windows a plain
    Richardson step is used.  Returns sqrt(max(A, 0)).
    """
    values, sizes = [], []
    for w in reversed(sorted(float(w) for w in window_schedule)):
        ends = _window_endpoints(curve, p, w)
        if ends is None:
            continue
        q, r = ends
        arc = float(curve.arclen[r] - curve.arclen[q])
        chord = curve.chord(q, r)
        v = 24.0 * (arc - chord) / arc**3
        if v < -tol * 24.0 / arc**2:
            raise DomainError("chord exceeds arc length: inconsistent curve data", value=v)
        values.append(max(v, 0.0))
        sizes.append(arc)
    if len(values) < 2:
        raise InvalidArgument("window schedule not resolvable on this curve")
    if len(values) >= 3:
        s = np.asarray(sizes)
        basis = np.stack([np.ones_like(s), s * s, 1.0 / (s * s)], axis=1)
        coef, *_ = np.linalg.lstsq(basis, np.asarray(values), rcond=None)
        est_sq = float(coef[0])
    else:
        est_sq = _richardson(sizes, values)
    return math.sqrt(max(est_sq, 0.0))


@dataclass(frozen=True)
class ConsistencyReport:
    alt: float
    haantjes: float
    gap: float
    combined_error: float
    consistent: bool


def curvature_consistency(curve: PolylineCurve, p: int, windows) -> ConsistencyReport:
    """Both curve-curvature estimates and their gap at one point.

    The combined error is estimated from the last extrapolation steps of
    each estimator; a gap beyond it flags disagreement.
    """
    alt = alt_curvature(curve, p, windows)
    haa = haantjes_curvature(curve, p, windows)
    # spread of raw per-window values around the extrapolated answers
    widths = sorted(float(w) for w in windows)
    raw_alt, raw_haa = [], []
    for w in widths[:2]:
        ends = _window_endpoints(curve, p, w)
        if ends is None:
            continue
        q, r = ends
        raw_alt.append(menger_curvature(curve.chord(p, q), curve.chord(q, r), curve.chord(r, p)))
        arc = float(curve.arclen[r] - curve.arclen[q])
        raw_haa.append(math.sqrt(max(24.0 * (arc - curve.chord(q, r)) / arc**3, 0.0)))
    err = abs(raw_alt[0] - alt) + abs(raw_haa[0] - haa) if raw_alt and raw_haa else 0.0
    gap = abs(alt - haa)
    return ConsistencyReport(
        alt=alt,
        haantjes=haa,
        gap=gap,
        combined_error=err,
        consistent=gap <= max(err, 1e-9),
    )
