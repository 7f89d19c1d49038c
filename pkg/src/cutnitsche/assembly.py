"""Element matrices and global assembly for both problems and both methods.

The discrete bilinear form is assembled as

    classical:       A + Nc + Nc^T + lambda * Ns1
    lifted (free):   A + Nc + Nc^T + S + Ns1,   S = 2 L^T A L

with the element lifting L = (A + K)^{-1} Nc^T, where K is the rank-one (per
sub-element) fix h^{-4} (w,1)_T (v,1)_T that removes the constant kernel of
the local stiffness.  Nc is stored with row = test, column = trial, i.e.
Nc[i, j] tests the trial flux of phi_j against phi_i, so applying Nc to a
constant coefficient vector gives zero.

Fitted Dirichlet data g enters the right-hand side through consistency:
(f, v) + Nc(v, g) + w/h (g, v) with w = lambda or 1, plus, for the lifted
method, 2 a(Lg, L(v)) with the element lifting Lg of the boundary data.
Interface problems carry homogeneous interface data and essential outer
boundary conditions, so their right-hand side has volume terms only.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import kernels
from ._kernels_py import _barycentric, _grads_dets
from .cutcells import Classification, CutInfo
from .linalg import CsrMatrix, from_triplets
from .mesh import EDGE_VERTICES, Mesh
from .quadrature import basis_values, segment_rule, triangle_rule
from .spaces import CutDofMap, DofMap

VOLUME_RHS_ORDER = 3
SEGMENT_RHS_ORDER = 3


@dataclass(frozen=True)
class ProblemSpec:
    """What to assemble: problem kind, method, coefficients and data."""

    kind: str                                  # "fitted" | "interface"
    method: str                                # "classical" | "lifted"
    lam: float | None = None
    alpha: tuple[float, float] = (1.0, 1.0)
    data: object | None = None                 # ManufacturedSolution-like

    def __post_init__(self):
        if self.kind not in ("fitted", "interface"):
            raise ValueError(f"unknown problem kind {self.kind!r}")
        if self.method not in ("classical", "lifted"):
            raise ValueError(f"unknown method {self.method!r}")
        if self.method == "classical":
            if self.lam is None or self.lam <= 0:
                raise ValueError("classical method needs a positive lambda")
        elif self.lam is not None:
            raise ValueError("lambda only applies to the classical method")
        if min(self.alpha) <= 0:
            raise ValueError("diffusion coefficients must be positive")


@dataclass
class ElementMatrices:
    """Local matrices of one element; unused slots remain None."""

    A: np.ndarray
    N_c: np.ndarray | None = None
    N_s1: np.ndarray | None = None
    K: np.ndarray | None = None
    L: np.ndarray | None = None
    S: np.ndarray | None = None


@dataclass(frozen=True)
class GlobalSystem:
    matrix: CsrMatrix
    rhs: np.ndarray
    n_dofs: int


def _require_p1(basis):
    if basis not in ("p1", None):
        raise NotImplementedError("only the P1 basis is supported")


# ---------------------------------------------------------------------------
# per-element operations
# ---------------------------------------------------------------------------

def fitted_element_forms(coords, boundary_edges, h, basis="p1") -> ElementMatrices:
    """Local stiffness, boundary consistency and unit penalty (3 x 3).

    ``boundary_edges`` lists the element's local edges on the domain
    boundary (possibly empty); N_s1 carries the 1/h weight.
    """
    _require_p1(basis)
    coords = np.asarray(coords, dtype=float)
    A = kernels.stiffness_batch(coords[None])[0]
    Nc = np.zeros((3, 3))
    M = np.zeros((3, 3))
    edges = list(boundary_edges)
    if edges:
        rep = np.repeat(coords[None], len(edges), axis=0)
        Nc_p, M_p = kernels.edge_forms_batch(rep, np.array(edges))
        Nc = Nc_p.sum(axis=0)
        M = M_p.sum(axis=0)
    return ElementMatrices(A=A, N_c=Nc, N_s1=M / h)


def _pack_cut(info: CutInfo):
    """Fixed-shape arrays of one cut element for the batch kernels."""
    subs = np.concatenate([info.sub_triangles_neg, info.sub_triangles_pos])
    p, q, n, _ = info.segment
    return (len(info.sub_triangles_neg), subs, p, q, n,
            np.array(info.kappa))


def interface_element_forms(coords, info: CutInfo, spec: ProblemSpec, h,
                            basis="p1") -> ElementMatrices:
    """Local interface forms over the doubled basis (6 x 6 on cut elements).

    Uncut elements get their single-side 3 x 3 stiffness and no interface
    terms.  N_s1 is the jump penalty with weight abar/h for the lifted
    method (abar = kappa-weighted alpha) and the literal 1/h for classical.
    """
    _require_p1(basis)
    coords = np.asarray(coords, dtype=float)
    a1, a2 = spec.alpha
    if not info.is_cut:
        side_alpha = a1 if info.classification is Classification.NEG else a2
        A = side_alpha * kernels.stiffness_batch(coords[None])[0]
        return ElementMatrices(A=A)

    n_neg, subs, p, q, n, kap = _pack_cut(info)
    A, Nc, M, _ = kernels.cut_forms_batch(
        coords[None], np.array([n_neg]), subs[None], p[None], q[None],
        n[None], kap[None], a1, a2)
    if spec.method == "lifted":
        weight = (kap[0] * a1 + kap[1] * a2) / h
    else:
        weight = 1.0 / h
    return ElementMatrices(A=A[0], N_c=Nc[0], N_s1=weight * M[0])


def kernel_fix(coords, info: CutInfo | None, h, basis="p1") -> np.ndarray:
    """Local kernel fix K = h^-4 (w,1)_T (v,1)_T, one term per sub-element."""
    _require_p1(basis)
    coords = np.asarray(coords, dtype=float)
    scale = h ** -4.0
    if info is None or not info.is_cut:
        _, det = _grads_dets(coords[None])
        m = np.full(3, float(det[0]) / 6.0)      # integral of each P1 basis
        return scale * np.outer(m, m)
    n_neg, subs, p, q, n, kap = _pack_cut(info)
    _, _, _, moments = kernels.cut_forms_batch(
        coords[None], np.array([n_neg]), subs[None], p[None], q[None],
        n[None], kap[None], *((1.0, 1.0)))
    K = np.zeros((6, 6))
    K[:3, :3] = scale * np.outer(moments[0, 0], moments[0, 0])
    K[3:, 3:] = scale * np.outer(moments[0, 1], moments[0, 1])
    return K


def lifting_matrix(A, K, N_c) -> np.ndarray:
    """Element lifting L = (A + K)^{-1} N_c^T; A L = N_c^T holds exactly."""
    return np.linalg.solve(A + K, N_c.T)


def stabilization_matrix(A, L) -> np.ndarray:
    """Parameter-free stabilization S = 2 L^T A L (symmetric PSD)."""
    S = 2.0 * (L.T @ A @ L)
    return 0.5 * (S + S.T)


# ---------------------------------------------------------------------------
# triplet helpers
# ---------------------------------------------------------------------------

class _Triplets:
    def __init__(self):
        self.rows, self.cols, self.vals = [], [], []

    def add_blocks(self, dofs: np.ndarray, mats: np.ndarray) -> None:
        """Scatter (k, n, n) local matrices at (k, n) global dofs."""
        k, nloc = dofs.shape
        r = np.broadcast_to(dofs[:, :, None], (k, nloc, nloc))
        c = np.broadcast_to(dofs[:, None, :], (k, nloc, nloc))
        self.rows.append(r.ravel())
        self.cols.append(c.ravel())
        self.vals.append(np.ascontiguousarray(mats).ravel())

    def arrays(self):
        if not self.rows:
            z = np.array([], dtype=np.int64)
            return z, z.copy(), np.array([])
        return (np.concatenate(self.rows), np.concatenate(self.cols),
                np.concatenate(self.vals))


def _combine_parts(n, part_triplets, coeffs) -> CsrMatrix:
    rows, cols, vals = [], [], []
    for name, coeff in coeffs.items():
        r, c, v = part_triplets[name].arrays()
        rows.append(r)
        cols.append(c)
        vals.append(coeff * v)
    return from_triplets(n, (np.concatenate(rows), np.concatenate(cols),
                             np.concatenate(vals)))


# ---------------------------------------------------------------------------
# global assembly
# ---------------------------------------------------------------------------

def _fitted_parts(mesh: Mesh, dofmap: DofMap, spec: ProblemSpec):
    coords = mesh.all_triangle_coords()
    h = mesh.h
    parts = {name: _Triplets() for name in
             ("stiffness", "consistency", "penalty", "stabilization")}

    A_all = kernels.stiffness_batch(coords)
    parts["stiffness"].add_blocks(dofmap.cell_dofs, A_all)

    b_el = mesh.boundary_facets[:, 0]
    b_ed = mesh.boundary_facets[:, 1]
    part_els = np.unique(b_el)
    slot = np.searchsorted(part_els, b_el)
    Nc_p, M_p = kernels.edge_forms_batch(coords[b_el], b_ed)
    ne = part_els.size
    Nc_e = np.zeros((ne, 3, 3))
    M_e = np.zeros((ne, 3, 3))
    np.add.at(Nc_e, slot, Nc_p)
    np.add.at(M_e, slot, M_p)

    _, det = _grads_dets(coords[part_els])
    m = det / 6.0                                   # per-basis integral
    K_e = (h ** -4.0 * m * m)[:, None, None] * np.ones((1, 3, 3))
    L_e, S_e = kernels.lift_stab_batch(A_all[part_els], K_e, Nc_e)

    pdofs = dofmap.cell_dofs[part_els]
    parts["consistency"].add_blocks(pdofs, Nc_e + np.transpose(Nc_e, (0, 2, 1)))
    parts["penalty"].add_blocks(pdofs, M_e / h)
    parts["stabilization"].add_blocks(pdofs, S_e)
    local = dict(part_els=part_els, slot=slot, A=A_all[part_els], K=K_e,
                 L=L_e, S=S_e, Nc=Nc_e)
    return parts, local


def _pack_cut_batch(cuts, cut_ids):
    n_neg = np.array([len(cuts[t].sub_triangles_neg) for t in cut_ids])
    subs = np.stack([np.concatenate([cuts[t].sub_triangles_neg,
                                     cuts[t].sub_triangles_pos])
                     for t in cut_ids])
    seg_p = np.stack([cuts[t].segment[0] for t in cut_ids])
    seg_q = np.stack([cuts[t].segment[1] for t in cut_ids])
    seg_n = np.stack([cuts[t].segment[2] for t in cut_ids])
    kappa = np.array([cuts[t].kappa for t in cut_ids])
    return n_neg, subs, seg_p, seg_q, seg_n, kappa


def _cut_dofs6(dofmap: CutDofMap, cut_ids: np.ndarray) -> np.ndarray:
    d = np.concatenate([dofmap.side_cell_dofs[0][cut_ids],
                        dofmap.side_cell_dofs[1][cut_ids]], axis=1)
    if np.any(d < 0):
        raise ValueError("cut element with inactive dof; inconsistent dof map")
    return d


def _interface_parts(mesh: Mesh, dofmap: CutDofMap, cuts, spec: ProblemSpec):
    coords = mesh.all_triangle_coords()
    h = mesh.h
    a1, a2 = spec.alpha
    parts = {name: _Triplets() for name in
             ("stiffness", "consistency", "penalty", "stabilization")}

    cls = np.array([info.classification.value for info in cuts])
    for side, alpha_s, code in ((0, a1, Classification.NEG.value),
                                (1, a2, Classification.POS.value)):
        ids = np.flatnonzero(cls == code)
        if ids.size:
            A3 = alpha_s * kernels.stiffness_batch(coords[ids])
            parts["stiffness"].add_blocks(dofmap.side_cell_dofs[side][ids], A3)

    cut_ids = np.flatnonzero(cls == Classification.CUT.value)
    local = dict(cut_ids=cut_ids)
    if cut_ids.size:
        n_neg, subs, seg_p, seg_q, seg_n, kappa = _pack_cut_batch(cuts, cut_ids)
        A6, Nc6, M6, moments = kernels.cut_forms_batch(
            coords[cut_ids], n_neg, subs, seg_p, seg_q, seg_n, kappa, a1, a2)
        K6 = np.zeros_like(A6)
        K6[:, :3, :3] = h ** -4.0 * np.einsum("ci,cj->cij",
                                              moments[:, 0], moments[:, 0])
        K6[:, 3:, 3:] = h ** -4.0 * np.einsum("ci,cj->cij",
                                              moments[:, 1], moments[:, 1])
        L6, S6 = kernels.lift_stab_batch(A6, K6, Nc6)

        if spec.method == "lifted":
            weight = (kappa[:, 0] * a1 + kappa[:, 1] * a2) / h
        else:
            weight = np.full(cut_ids.size, 1.0 / h)
        dofs6 = _cut_dofs6(dofmap, cut_ids)
        parts["stiffness"].add_blocks(dofs6, A6)
        parts["consistency"].add_blocks(dofs6, Nc6 + np.transpose(Nc6, (0, 2, 1)))
        parts["penalty"].add_blocks(dofs6, weight[:, None, None] * M6)
        parts["stabilization"].add_blocks(dofs6, S6)
        local.update(A=A6, K=K6, L=L6, S=S6, Nc=Nc6, kappa=kappa)
    return parts, local


def _method_coeffs(spec: ProblemSpec):
    if spec.method == "classical":
        return {"stiffness": 1.0, "consistency": 1.0, "penalty": spec.lam}
    return {"stiffness": 1.0, "consistency": 1.0, "penalty": 1.0,
            "stabilization": 1.0}


def assemble_global(mesh: Mesh, dofmap, cuts, spec: ProblemSpec,
                    parts: bool = False):
    """Assemble the symmetric global matrix and right-hand side.

    With ``parts=True`` also returns the global pieces (stiffness,
    consistency, penalty, stabilization) as separate matrices.
    """
    if spec.kind == "fitted":
        part_trip, _ = _fitted_parts(mesh, dofmap, spec)
    else:
        part_trip, _ = _interface_parts(mesh, dofmap, cuts, spec)

    n = dofmap.n_dofs
    matrix = _combine_parts(n, part_trip, _method_coeffs(spec))
    rhs = assemble_rhs(mesh, dofmap, cuts, spec)
    system = GlobalSystem(matrix, rhs, n)
    if not parts:
        return system
    all_parts = {name: _combine_parts(n, part_trip, {name: 1.0})
                 for name in part_trip}
    return system, all_parts


# ---------------------------------------------------------------------------
# right-hand sides
# ---------------------------------------------------------------------------

def _volume_rhs_contrib(sub_coords, parent_coords, f):
    """Per-element basis-weighted volume integrals of ``f``.

    sub_coords : (m, 3, 2) integration triangles
    parent_coords : (m, 3, 2) triangles carrying the P1 basis
    returns (m, 3)
    """
    rule = triangle_rule(VOLUME_RHS_ORDER)
    bary = basis_values(rule.points)                    # (nq, 3)
    phys = np.einsum("qi,mik->mqk", bary, sub_coords)   # (m, nq, 2)
    _, det = _grads_dets(sub_coords)
    w = rule.weights[None, :] * 2.0 * (0.5 * det)[:, None]
    fv = np.asarray(f(phys[..., 0], phys[..., 1]), dtype=float)
    fv = np.broadcast_to(fv, phys.shape[:2])
    parent_bary = _barycentric(parent_coords, phys)     # (m, nq, 3)
    return np.einsum("mq,mqi->mi", w * fv, parent_bary)


def _fitted_boundary_rhs(mesh, spec, coords):
    """Per-pair boundary data integrals r_g (consistency) and mg (penalty)."""
    data = spec.data
    rule = segment_rule(SEGMENT_RHS_ORDER)
    t = rule.points
    b_el = mesh.boundary_facets[:, 0]
    b_ed = mesh.boundary_facets[:, 1]
    pc = coords[b_el]
    g_all, _ = _grads_dets(pc)

    ea = np.array([EDGE_VERTICES[e][0] for e in b_ed])
    eb = np.array([EDGE_VERTICES[e][1] for e in b_ed])
    rr = np.arange(b_el.size)
    va, vb = pc[rr, ea], pc[rr, eb]
    tang = vb - va
    length = np.hypot(tang[:, 0], tang[:, 1])
    normal = np.column_stack([tang[:, 1], -tang[:, 0]]) / length[:, None]

    pts = va[:, None, :] + t[None, :, None] * tang[:, None, :]
    gv = np.asarray(data.g(pts[..., 0], pts[..., 1]), dtype=float)
    gv = np.broadcast_to(gv, pts.shape[:2])
    wg = rule.weights[None, :] * length[:, None] * gv   # (p, nq)

    flux = -np.einsum("pjk,pk->pj", g_all, normal)      # -d_n phi_j
    r_g = wg.sum(axis=1)[:, None] * flux                # (p, 3)

    phi = np.zeros((b_el.size, t.size, 3))
    phi[rr[:, None], np.arange(t.size)[None, :], ea[:, None]] = 1.0 - t[None, :]
    phi[rr[:, None], np.arange(t.size)[None, :], eb[:, None]] = t[None, :]
    mg = np.einsum("pq,pqi->pi", wg, phi)
    return r_g, mg


def assemble_rhs(mesh: Mesh, dofmap, cuts, spec: ProblemSpec) -> np.ndarray:
    """Load vector: volume terms plus, for fitted problems, boundary data."""
    data = spec.data
    rhs = np.zeros(dofmap.n_dofs)
    coords = mesh.all_triangle_coords()

    if spec.kind == "fitted":
        contrib = _volume_rhs_contrib(coords, coords, data.f[0])
        np.add.at(rhs, dofmap.cell_dofs, contrib)

        r_g, mg = _fitted_boundary_rhs(mesh, spec, coords)
        b_el = mesh.boundary_facets[:, 0]
        part_els = np.unique(b_el)
        slot = np.searchsorted(part_els, b_el)
        ne = part_els.size
        r_ge = np.zeros((ne, 3))
        mg_e = np.zeros((ne, 3))
        np.add.at(r_ge, slot, r_g)
        np.add.at(mg_e, slot, mg)

        w = spec.lam if spec.method == "classical" else 1.0
        bdry = r_ge + (w / mesh.h) * mg_e
        if spec.method == "lifted":
            _, local = _fitted_parts(mesh, dofmap, spec)
            w_g = np.linalg.solve(local["A"] + local["K"], r_ge[..., None])[..., 0]
            bdry += 2.0 * np.einsum("eki,ekl,el->ei",
                                    local["L"], local["A"], w_g)
        np.add.at(rhs, dofmap.cell_dofs[part_els], bdry)
        return rhs

    # interface: homogeneous interface data, essential outer conditions
    for side in (0, 1):
        sub_list, parent_ids = [], []
        for t, info in enumerate(cuts):
            subs = (info.sub_triangles_neg, info.sub_triangles_pos)[side]
            for s in subs:
                sub_list.append(s)
                parent_ids.append(t)
        if not sub_list:
            continue
        sub_coords = np.stack(sub_list)
        parent_ids = np.array(parent_ids)
        contrib = _volume_rhs_contrib(sub_coords, coords[parent_ids],
                                      data.f[side])
        np.add.at(rhs, dofmap.side_cell_dofs[side][parent_ids], contrib)
    return rhs
