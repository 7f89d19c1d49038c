"""Structured triangular meshes of axis-aligned rectangles.

Each grid cell is split along the same diagonal (lower-left to upper-right),
which keeps the triangulation deterministic and very shape regular.  Vertices
are stored as an ``(nv, 2)`` float array, triangles as ``(nt, 3)`` vertex
indices in counterclockwise order.  Local edge ``i`` of a triangle is the edge
opposite local vertex ``i``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

# local edge i (opposite vertex i) -> pair of local vertex indices, in the
# cyclic order that traverses a CCW triangle
EDGE_VERTICES = ((1, 2), (2, 0), (0, 1))


class Point2(NamedTuple):
    x: float
    y: float


@dataclass(frozen=True)
class Mesh:
    """Triangulation of a rectangle.

    vertices : (nv, 2) array
    triangles : (nt, 3) int array, CCW
    boundary_facets : (nb, 2) int array of (triangle, local edge) pairs,
        covering the rectangle boundary exactly once
    bbox : (xmin, ymin, xmax, ymax)
    h : characteristic mesh size (maximum edge length)
    """

    vertices: np.ndarray
    triangles: np.ndarray
    boundary_facets: np.ndarray
    bbox: tuple[float, float, float, float]
    h: float

    @property
    def n_vertices(self) -> int:
        return self.vertices.shape[0]

    @property
    def n_triangles(self) -> int:
        return self.triangles.shape[0]

    def triangle_coords(self, t: int) -> np.ndarray:
        """Physical (3, 2) corner coordinates of triangle ``t``."""
        return self.vertices[self.triangles[t]]

    def all_triangle_coords(self) -> np.ndarray:
        """(nt, 3, 2) corner coordinates for every triangle."""
        return self.vertices[self.triangles]

    def boundary_vertices(self) -> np.ndarray:
        """Sorted indices of all vertices lying on a boundary facet."""
        tri = self.triangles[self.boundary_facets[:, 0]]
        edges = self.boundary_facets[:, 1]
        ids = [tri[k, list(EDGE_VERTICES[e])] for k, e in enumerate(edges)]
        return np.unique(np.concatenate(ids)) if ids else np.array([], dtype=int)

    def dump(self, path) -> None:
        """Plain-text dump: ``v x y`` lines followed by ``t i j k`` lines."""
        with open(path, "w") as fh:
            for x, y in self.vertices:
                fh.write(f"v {x!r} {y!r}\n")
            for i, j, k in self.triangles:
                fh.write(f"t {i} {j} {k}\n")


@dataclass(frozen=True)
class ElementGeometry:
    """Per-element geometric data.

    The affine reference-to-physical map is ``x = origin + jacobian @ xi``
    with reference vertices (0,0), (1,0), (0,1).
    """

    area: float
    edge_lengths: np.ndarray        # (3,)
    normals: np.ndarray             # (3, 2) outward unit normals per edge
    origin: np.ndarray              # (2,)
    jacobian: np.ndarray            # (2, 2)

    def map_to_physical(self, ref_points: np.ndarray) -> np.ndarray:
        return self.origin + np.asarray(ref_points) @ self.jacobian.T


def build_structured_mesh(nx: int, ny: int,
                          bbox: tuple[float, float, float, float]) -> Mesh:
    """Triangulate ``bbox`` into ``2*nx*ny`` congruent right triangles.

    Every cell is split from its lower-left to its upper-right corner; cell
    triangles are (ll, lr, ur) and (ll, ur, ul), both CCW.
    """
    if nx < 1 or ny < 1:
        raise ValueError(f"need nx, ny >= 1, got {nx}, {ny}")
    xmin, ymin, xmax, ymax = map(float, bbox)
    if not (xmax > xmin and ymax > ymin):
        raise ValueError(f"degenerate bbox {bbox}")

    xs = np.linspace(xmin, xmax, nx + 1)
    ys = np.linspace(ymin, ymax, ny + 1)
    X, Y = np.meshgrid(xs, ys)                       # row-major over j (y)
    vertices = np.column_stack([X.ravel(), Y.ravel()])

    def vid(i, j):
        return j * (nx + 1) + i

    triangles = np.empty((2 * nx * ny, 3), dtype=np.int64)
    for j in range(ny):
        for i in range(nx):
            c = 2 * (j * nx + i)
            ll, lr = vid(i, j), vid(i + 1, j)
            ul, ur = vid(i, j + 1), vid(i + 1, j + 1)
            triangles[c] = (ll, lr, ur)              # lower-right triangle
            triangles[c + 1] = (ll, ur, ul)          # upper-left triangle

    facets = []
    for i in range(nx):                              # bottom: edge (ll, lr)
        facets.append((2 * i, 2))
    for j in range(ny):                              # right: edge (lr, ur)
        facets.append((2 * (j * nx + nx - 1), 0))
    for i in range(nx):                              # top: edge (ur, ul)
        facets.append((2 * ((ny - 1) * nx + i) + 1, 0))
    for j in range(ny):                              # left: edge (ul, ll)
        facets.append((2 * (j * nx) + 1, 1))
    boundary_facets = np.array(facets, dtype=np.int64)

    dx, dy = (xmax - xmin) / nx, (ymax - ymin) / ny
    h = float(np.hypot(dx, dy))                      # max edge = cell diagonal

    vertices.setflags(write=False)
    triangles.setflags(write=False)
    boundary_facets.setflags(write=False)
    return Mesh(vertices, triangles, boundary_facets,
                (xmin, ymin, xmax, ymax), h)


def element_geometry(mesh: Mesh, t: int) -> ElementGeometry:
    """Area, edge lengths, outward unit normals and affine map of triangle ``t``."""
    coords = mesh.triangle_coords(t)
    jac = np.column_stack([coords[1] - coords[0], coords[2] - coords[0]])
    area = 0.5 * float(np.linalg.det(jac))
    if area <= 0.0:
        raise ValueError(f"triangle {t} is degenerate or mis-oriented")

    lengths = np.empty(3)
    normals = np.empty((3, 2))
    for e, (a, b) in enumerate(EDGE_VERTICES):
        tang = coords[b] - coords[a]
        lengths[e] = np.hypot(*tang)
        # CCW traversal keeps the interior on the left, so rotating the
        # tangent by -90 degrees points outward
        normals[e] = np.array([tang[1], -tang[0]]) / lengths[e]
    return ElementGeometry(area, lengths, normals, coords[0].copy(), jac)
