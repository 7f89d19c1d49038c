"""Level-set cut-cell machinery.

All geometry derives from the vertex values of the level set, i.e. from its
piecewise linear interpolant: classification by vertex signs, intersection
points by linear interpolation along sign-changing edges, and a straight
interface segment per cut element (piecewise planar reconstruction).  Side 1
(NEG) is where the level set is negative, side 2 (POS) where it is positive.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

from .mesh import Mesh
from .quadrature import P1_GRADS, QuadRule

# vertex values closer to zero than SNAP_REL * h are pushed to the positive
# side to keep the classification deterministic and cuts non-degenerate
SNAP_REL = 1e-12


class Classification(Enum):
    NEG = 1
    POS = 2
    CUT = 3


class DegenerateLevelSetError(ValueError):
    pass


class LevelSet:
    """Scalar field phi(x, y); negative inside domain 1, positive in domain 2.

    ``func`` must broadcast over numpy arrays.  Geometry only ever sees the
    snapped vertex values, cached per mesh.
    """

    def __init__(self, func):
        self.func = func
        self._cache: dict[int, np.ndarray] = {}

    def __call__(self, x, y):
        return self.func(x, y)

    def vertex_values(self, mesh: Mesh) -> np.ndarray:
        key = id(mesh)
        if key not in self._cache:
            raw = np.asarray(self.func(mesh.vertices[:, 0], mesh.vertices[:, 1]),
                             dtype=float)
            snap = SNAP_REL * mesh.h
            vals = np.where(np.abs(raw) < snap, snap, raw)
            vals.setflags(write=False)
            self._cache[key] = vals
        return self._cache[key]


def levelset_l4_norm() -> LevelSet:
    """Quartic-norm circle: phi(x, y) = (x^4 + y^4)^(1/4) - 1."""
    return LevelSet(lambda x, y: (x ** 4 + y ** 4) ** 0.25 - 1.0)


def levelset_plane(a: float, b: float, c: float) -> LevelSet:
    """Planar level set phi(x, y) = a*x + b*y + c."""
    return LevelSet(lambda x, y: a * x + b * y + c)


@dataclass(frozen=True)
class CutInfo:
    """Cut data of one element.

    For uncut elements the active side holds the whole triangle, the other
    sub-list is empty, kappa is (1,0) or (0,1) and there is no segment.
    The segment normal points from the NEG to the POS side.
    """

    classification: Classification
    sub_triangles_neg: np.ndarray    # (k, 3, 2), CCW
    sub_triangles_pos: np.ndarray    # (m, 3, 2), CCW
    segment: tuple[np.ndarray, np.ndarray, np.ndarray, float] | None  # p, q, n, length
    kappa: tuple[float, float]
    sub_areas: tuple[float, float]

    @property
    def is_cut(self) -> bool:
        return self.classification is Classification.CUT


def _tri_area(c: np.ndarray) -> float:
    u, v = c[1] - c[0], c[2] - c[0]
    return 0.5 * float(u[0] * v[1] - u[1] * v[0])


_EMPTY = np.zeros((0, 3, 2))


def _cut_triangle(coords: np.ndarray, vals: np.ndarray) -> CutInfo:
    """Decompose one sign-changing triangle into 3 sub-triangles + segment."""
    neg = vals < 0.0
    lone_is_neg = neg.sum() == 1
    lone = int(np.flatnonzero(neg)[0] if lone_is_neg else np.flatnonzero(~neg)[0])
    o1, o2 = (lone + 1) % 3, (lone + 2) % 3

    def intersect(b):
        t = vals[lone] / (vals[lone] - vals[b])
        return coords[lone] + t * (coords[b] - coords[lone])

    p1, p2 = intersect(o1), intersect(o2)

    lone_tri = np.array([coords[lone], p1, p2])
    # quad (p1, v_o1, v_o2, p2), split along its shorter diagonal for better
    # shaped sub-triangles
    if np.sum((coords[o2] - p1) ** 2) <= np.sum((coords[o1] - p2) ** 2):
        quad = [np.array([p1, coords[o1], coords[o2]]),
                np.array([p1, coords[o2], p2])]
    else:
        quad = [np.array([p1, coords[o1], p2]),
                np.array([coords[o1], coords[o2], p2])]

    lone_side = np.array([lone_tri])
    quad_side = np.array(quad)
    sub_neg, sub_pos = ((lone_side, quad_side) if lone_is_neg
                        else (quad_side, lone_side))

    area = _tri_area(coords)
    a_neg = sum(_tri_area(t) for t in sub_neg)
    a_pos = sum(_tri_area(t) for t in sub_pos)
    kappa = (a_neg / area, a_pos / area)

    # normal of the linear reconstruction points from NEG to POS by definition
    jac = np.column_stack([coords[1] - coords[0], coords[2] - coords[0]])
    grad = vals @ (P1_GRADS @ np.linalg.inv(jac))
    n = grad / np.linalg.norm(grad)
    length = float(np.linalg.norm(p2 - p1))
    return CutInfo(Classification.CUT, sub_neg, sub_pos,
                   (p1, p2, n, length), kappa, (a_neg, a_pos))


def classify_and_cut(mesh: Mesh, levelset: LevelSet) -> list[CutInfo]:
    """Per-element classification and sub-triangle decomposition."""
    values = levelset.vertex_values(mesh)
    raw = np.asarray(levelset(mesh.vertices[:, 0], mesh.vertices[:, 1]), dtype=float)
    snap = SNAP_REL * mesh.h

    infos = []
    for t in range(mesh.n_triangles):
        idx = mesh.triangles[t]
        if np.all(np.abs(raw[idx]) < snap):
            raise DegenerateLevelSetError(
                f"level set vanishes on all vertices of element {t}")
        vals = values[idx]
        coords = mesh.vertices[idx]
        if np.all(vals > 0.0):
            tri = coords[np.newaxis]
            infos.append(CutInfo(Classification.POS, _EMPTY, tri, None,
                                 (0.0, 1.0), (0.0, _tri_area(coords))))
        elif np.all(vals < 0.0):
            tri = coords[np.newaxis]
            infos.append(CutInfo(Classification.NEG, tri, _EMPTY, None,
                                 (1.0, 0.0), (_tri_area(coords), 0.0)))
        else:
            infos.append(_cut_triangle(coords, vals))
    return infos


def interface_quadrature(info: CutInfo, rule: QuadRule):
    """Quadrature points on the reconstructed segment: (point, weight, normal).

    Weights sum to the segment length; the normal is constant per element.
    """
    if not info.is_cut:
        raise ValueError("interface quadrature requested on an uncut element")
    p, q, n, length = info.segment
    t = np.asarray(rule.points).reshape(-1, 1)
    points = p + t * (q - p)
    weights = rule.weights * length
    return [(points[k], float(weights[k]), n) for k in range(len(weights))]
