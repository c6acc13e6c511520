"""Symmetric Gauss quadrature on the reference triangle.

One fixed rule (degree 6, 12 points) is used for every bilinear and
trilinear form in the package.  The velocity space is P2, so the worst
integrand we assemble is grad(P2) * P2 * P2 = degree 5; degree 6 gives
headroom and makes the discrete cancellation identities hold to machine
precision instead of quadrature error.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class QuadratureRule:
    """Points in barycentric coordinates, weights summing to the reference area 1/2."""

    degree: int
    points: np.ndarray   # (nq, 3) barycentric
    weights: np.ndarray  # (nq,)


def _symmetric_orbit(a: float, b: float) -> list[tuple[float, float, float]]:
    c = 1.0 - a - b
    triples = {(a, b, c), (a, c, b), (b, a, c), (b, c, a), (c, a, b), (c, b, a)}
    return sorted(triples)


def triangle_rule_degree6() -> QuadratureRule:
    """Dunavant's 12-point rule, exact for polynomials of total degree <= 6."""
    # 32-digit coefficients; normalized weights sum to 1 and are scaled by the
    # reference area below.
    w1 = float("0.050844906370206816920936809106869")
    a1 = float("0.063089014491502228340331602870819")
    w2 = float("0.11678627572637936602528961138558")
    a2 = float("0.24928674517091042129163855310702")
    w3 = float("0.082851075618373575193553456420442")
    a3 = float("0.053145049844816947353249671631398")
    b3 = float("0.31035245103378440541660773395655")

    pts: list[tuple[float, float, float]] = []
    wts: list[float] = []
    for a, w in ((a1, w1), (a2, w2)):
        for p in _symmetric_orbit(a, a):
            pts.append(p)
            wts.append(w)
    for p in _symmetric_orbit(a3, b3):
        pts.append(p)
        wts.append(w3)

    points = np.array(pts, dtype=float)
    weights = 0.5 * np.array(wts, dtype=float)
    return QuadratureRule(degree=6, points=points, weights=weights)


DEFAULT_RULE = triangle_rule_degree6()
