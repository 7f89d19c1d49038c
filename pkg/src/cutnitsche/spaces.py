"""Degree-of-freedom management.

``DofMap`` is the standard continuous P1 space (one dof per vertex).
``CutDofMap`` realizes the doubled interface space: a vertex is active on
side i when some element containing it has classification i or CUT, and every
active (vertex, side) pair carries its own global dof.  Side-1 dofs come
first, ordered by vertex index, then side-2 dofs.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .cutcells import Classification, CutInfo
from .linalg import CsrMatrix
from .mesh import Mesh


@dataclass(frozen=True)
class DofMap:
    n_dofs: int
    cell_dofs: np.ndarray        # (nt, 3) global dof per local vertex
    boundary_dofs: np.ndarray    # dofs on the domain boundary
    dof_position: np.ndarray     # (n_dofs, 2)


def build_cg_dofmap(mesh: Mesh) -> DofMap:
    """Continuous P1 dof map: dof index = vertex index."""
    return DofMap(mesh.n_vertices, mesh.triangles.copy(),
                  mesh.boundary_vertices(), mesh.vertices.copy())


@dataclass(frozen=True)
class CutDofMap:
    """Doubled dof map for the two-phase space.

    ``side_cell_dofs[s]`` holds the (nt, 3) global indices of side s+1, with
    -1 where the vertex is inactive on that side.
    """

    n_dofs: int
    base: DofMap
    active: np.ndarray           # (nv, 2) bool
    vertex_dof: np.ndarray       # (nv, 2) global index or -1
    side_cell_dofs: tuple[np.ndarray, np.ndarray]
    boundary_dofs: np.ndarray
    dof_vertex: np.ndarray       # (n_dofs,)
    dof_side: np.ndarray         # (n_dofs,) 1 or 2
    dof_position: np.ndarray     # (n_dofs, 2)

    @property
    def n_doubled(self) -> int:
        return int(np.count_nonzero(self.active.all(axis=1)))


def build_cut_dofmap(mesh: Mesh, cuts: list[CutInfo]) -> CutDofMap:
    base = build_cg_dofmap(mesh)
    nv = mesh.n_vertices
    active = np.zeros((nv, 2), dtype=bool)
    for t, info in enumerate(cuts):
        idx = mesh.triangles[t]
        if info.classification in (Classification.NEG, Classification.CUT):
            active[idx, 0] = True
        if info.classification in (Classification.POS, Classification.CUT):
            active[idx, 1] = True

    vertex_dof = np.full((nv, 2), -1, dtype=np.int64)
    n1 = int(np.count_nonzero(active[:, 0]))
    vertex_dof[active[:, 0], 0] = np.arange(n1)
    n2 = int(np.count_nonzero(active[:, 1]))
    vertex_dof[active[:, 1], 1] = n1 + np.arange(n2)
    n_dofs = n1 + n2

    side_cell_dofs = tuple(vertex_dof[mesh.triangles, s] for s in (0, 1))

    dof_vertex = np.empty(n_dofs, dtype=np.int64)
    dof_side = np.empty(n_dofs, dtype=np.int64)
    for s in (0, 1):
        verts = np.flatnonzero(active[:, s])
        dof_vertex[vertex_dof[verts, s]] = verts
        dof_side[vertex_dof[verts, s]] = s + 1
    dof_position = mesh.vertices[dof_vertex]

    on_boundary = np.zeros(nv, dtype=bool)
    on_boundary[base.boundary_dofs] = True
    boundary_dofs = np.flatnonzero(on_boundary[dof_vertex])

    return CutDofMap(n_dofs, base, active, vertex_dof, side_cell_dofs,
                     boundary_dofs, dof_vertex, dof_side, dof_position)


@dataclass(frozen=True)
class ConstrainedSystem:
    """Result of symmetric elimination of essential dofs."""

    matrix: CsrMatrix            # free-free block
    rhs: np.ndarray
    free: np.ndarray
    fixed: np.ndarray
    fixed_values: np.ndarray
    n_full: int

    def expand(self, x_free: np.ndarray) -> np.ndarray:
        full = np.empty(self.n_full)
        full[self.free] = x_free
        full[self.fixed] = self.fixed_values
        return full


def essential_values(dofmap, g) -> np.ndarray:
    """Nodal values of the boundary data at the constrained dofs.

    ``g`` is a trace callable g(x, y), or a pair (g1, g2) of per-side
    callables for doubled boundary vertices.
    """
    dofs = dofmap.boundary_dofs
    pos = dofmap.dof_position[dofs]
    if isinstance(g, tuple):
        side = dofmap.dof_side[dofs]
        vals = np.where(side == 1,
                        np.asarray(g[0](pos[:, 0], pos[:, 1]), dtype=float),
                        np.asarray(g[1](pos[:, 0], pos[:, 1]), dtype=float))
    else:
        vals = np.asarray(g(pos[:, 0], pos[:, 1]), dtype=float)
    return np.broadcast_to(vals, dofs.shape).astype(float)


def apply_essential_bc(system, dofmap, g) -> ConstrainedSystem:
    """Eliminate boundary dofs symmetrically, interpolating ``g`` nodally."""
    n = system.matrix.n
    fixed = np.asarray(dofmap.boundary_dofs, dtype=np.int64)
    values = essential_values(dofmap, g)
    mask = np.ones(n, dtype=bool)
    mask[fixed] = False
    free = np.flatnonzero(mask)
    if free.size == 0:
        raise ValueError("all dofs constrained; nothing to solve")

    a_ff = system.matrix.submatrix(free)
    a_fc = system.matrix.restrict_cols(free, fixed)
    rhs = system.rhs[free] - a_fc @ values
    return ConstrainedSystem(a_ff, rhs, free, fixed, values, n)
