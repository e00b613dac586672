"""Numeric check of the model-angle half-angle identity and its expansion.

For a triangle with side lengths a = d12, b = d24 and opposite side c = d14,
let angle_k denote the angle at the common vertex when the triangle is drawn
in the model surface of constant curvature k (sphere for k > 0, plane for
k = 0, hyperbolic plane for k < 0).  With the semi-perimeter p = (a + b + c)/2
and d = p - c, the half-angle satisfies

    cos^2(angle_0 / 2) = p d / (a b)
    cos^2(angle_k / 2) = sin(p sqrt(k)) sin(d sqrt(k))
                         / (sin(a sqrt(k)) sin(b sqrt(k)))        (k > 0)

with sin replaced by sinh (and sqrt(k) by sqrt(-k)) for k < 0.  Writing
theta(k) = cos^2(angle_k / 2) / cos^2(angle_0 / 2), a second-order expansion
in k gives

    theta(k) = 1 + (k / 6) a b (cos(angle_0) - 1) + r,
    |r| < (3/8) k^2 p^4            whenever |k| p^2 < 1/16.

This script verifies both claims against the law of cosines in each model
over random triangles and a signed grid of curvatures.  It exits non-zero on
the first violation.

Run:  python3 docs/series_expansion_check.py
"""

import math
import sys

import numpy as np


def flat_angle(a, b, c):
    return math.acos((a * a + b * b - c * c) / (2 * a * b))


def model_angle(a, b, c, k):
    """Angle opposite c via the law of cosines in curvature k."""
    if k == 0:
        return flat_angle(a, b, c)
    if k > 0:
        r = math.sqrt(k)
        num = math.cos(r * c) - math.cos(r * a) * math.cos(r * b)
        den = math.sin(r * a) * math.sin(r * b)
    else:
        r = math.sqrt(-k)
        num = math.cosh(r * a) * math.cosh(r * b) - math.cosh(r * c)
        den = math.sinh(r * a) * math.sinh(r * b)
    return math.acos(max(-1.0, min(1.0, num / den)))


def half_angle_cos_sq(a, b, c, k):
    """cos^2(angle_k / 2) from the distance-only half-angle identity."""
    p = 0.5 * (a + b + c)
    d = p - c
    if k == 0:
        return p * d / (a * b)
    if k > 0:
        r = math.sqrt(k)
        return (math.sin(r * p) * math.sin(r * d)) / (
            math.sin(r * a) * math.sin(r * b)
        )
    r = math.sqrt(-k)
    return (math.sinh(r * p) * math.sinh(r * d)) / (
        math.sinh(r * a) * math.sinh(r * b)
    )


def random_triangle(rng):
    """Side lengths of a non-degenerate triangle with angles away from 0/pi."""
    a = rng.uniform(0.3, 1.5)
    b = rng.uniform(0.3, 1.5)
    gamma = rng.uniform(0.2, math.pi - 0.2)
    c = math.sqrt(a * a + b * b - 2 * a * b * math.cos(gamma))
    return a, b, c


def main():
    rng = np.random.default_rng(0)
    n_triangles = 200
    worst_identity = 0.0
    worst_margin = math.inf

    for _ in range(n_triangles):
        a, b, c = random_triangle(rng)
        p = 0.5 * (a + b + c)
        cos0 = math.cos(flat_angle(a, b, c))
        base = half_angle_cos_sq(a, b, c, 0.0)

        kmax = 1.0 / (16.0 * p * p)  # the expansion's stated domain
        for k in np.concatenate([np.linspace(-kmax, -1e-6, 12),
                                 np.linspace(1e-6, kmax, 12)]):
            k = float(k)

            # 1. half-angle identity vs the law of cosines
            lhs = half_angle_cos_sq(a, b, c, k)
            rhs = math.cos(0.5 * model_angle(a, b, c, k)) ** 2
            err = abs(lhs - rhs)
            worst_identity = max(worst_identity, err)
            # near k = 0 the law of cosines loses ~6 digits to cancellation
            # (cos terms all near 1); the half-angle form does not.
            if err > 1e-9:
                print(f"FAIL identity: sides=({a:.4f},{b:.4f},{c:.4f}) "
                      f"k={k:.6g} error={err:.3e}")
                return 1

            # 2. first-order expansion with the quadratic remainder bound
            theta = lhs / base
            first_order = 1.0 + (k / 6.0) * a * b * (cos0 - 1.0)
            remainder = abs(theta - first_order)
            bound = 0.375 * k * k * p ** 4
            worst_margin = min(worst_margin,
                               bound - remainder if bound > 0 else math.inf)
            if remainder >= bound:
                print(f"FAIL remainder: sides=({a:.4f},{b:.4f},{c:.4f}) "
                      f"k={k:.6g} |r|={remainder:.3e} bound={bound:.3e}")
                return 1

    print(f"OK: {n_triangles} triangles x 24 curvatures")
    print(f"   max half-angle identity error : {worst_identity:.3e}")
    print(f"   min (bound - |remainder|)     : {worst_margin:.3e}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
