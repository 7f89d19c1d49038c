"""Gauss quadrature on the reference triangle / unit segment, and the P1 basis.

Triangle rules are given in reference coordinates on the triangle with
vertices (0,0), (1,0), (0,1); weights sum to its area 1/2.  Segment rules are
Gauss-Legendre on [0,1]; weights sum to 1.  All weights are positive, so rules
of a higher degree than requested are substituted where the minimal rule has a
negative weight.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class QuadRule:
    points: np.ndarray   # (nq, 2) reference coords for triangles, (nq,) for segments
    weights: np.ndarray  # (nq,)


def _perm3(a: float) -> list[tuple[float, float, float]]:
    b = 1.0 - 2.0 * a
    return [(b, a, a), (a, b, a), (a, a, b)]


def _tri_rule_from_barycentric(groups) -> QuadRule:
    pts, wts = [], []
    for bary, w in groups:
        for l0, l1, l2 in bary:
            pts.append((l1, l2))     # reference coords (x, y) = (lambda1, lambda2)
            wts.append(0.5 * w)      # barycentric weights sum to 1 -> scale by area
    return QuadRule(np.array(pts), np.array(wts))


# positive-weight rules on the triangle, keyed by polynomial exactness degree
_TRI_RULES = {
    1: _tri_rule_from_barycentric([([(1 / 3, 1 / 3, 1 / 3)], 1.0)]),
    2: _tri_rule_from_barycentric([(_perm3(1 / 6), 1 / 3)]),
    4: _tri_rule_from_barycentric([
        (_perm3(0.445948490915965), 0.223381589678011),
        (_perm3(0.091576213509771), 0.109951743655322),
    ]),
    5: _tri_rule_from_barycentric([
        ([(1 / 3, 1 / 3, 1 / 3)], 0.225),
        (_perm3(0.470142064105115), 0.132394152788506),
        (_perm3(0.101286507323456), 0.125939180544827),
    ]),
}
# degree 3 would need a negative centroid weight with 4 points; use the
# positive 6-point degree-4 rule instead
_TRI_ORDER_TO_DEGREE = {1: 1, 2: 2, 3: 4, 4: 4, 5: 5}


def triangle_rule(order: int) -> QuadRule:
    """Rule exact for total degree <= ``order`` on the reference triangle."""
    if order not in _TRI_ORDER_TO_DEGREE:
        raise ValueError(f"unsupported triangle rule order {order} (use 1..5)")
    return _TRI_RULES[_TRI_ORDER_TO_DEGREE[order]]


def segment_rule(order: int) -> QuadRule:
    """Gauss-Legendre rule on [0,1] exact for degree <= ``order`` (1..5)."""
    if order not in (1, 2, 3, 4, 5):
        raise ValueError(f"unsupported segment rule order {order} (use 1..5)")
    npts = (order + 2) // 2
    x, w = np.polynomial.legendre.leggauss(npts)
    return QuadRule(0.5 * (x + 1.0), 0.5 * w)


# P1 reference gradients (constant), one row per shape function
P1_GRADS = np.array([[-1.0, -1.0], [1.0, 0.0], [0.0, 1.0]])


def eval_basis(point) -> tuple[np.ndarray, np.ndarray]:
    """P1 shape function values and reference gradients at a reference point."""
    x, y = float(point[0]), float(point[1])
    if min(x, y, 1.0 - x - y) < -1e-12:
        raise ValueError(f"point {point} outside reference triangle")
    return np.array([1.0 - x - y, x, y]), P1_GRADS.copy()


def basis_values(ref_points: np.ndarray) -> np.ndarray:
    """P1 values at many reference points: (nq, 2) -> (nq, 3)."""
    p = np.asarray(ref_points, dtype=float).reshape(-1, 2)
    return np.column_stack([1.0 - p[:, 0] - p[:, 1], p[:, 0], p[:, 1]])


def physical_gradients(jacobian: np.ndarray) -> np.ndarray:
    """Constant physical P1 gradients for an affine element map, (3, 2)."""
    return P1_GRADS @ np.linalg.inv(jacobian)
