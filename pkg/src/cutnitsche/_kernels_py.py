"""Pure numpy implementation of the element-kernel hot path.

Mirrors the compiled extension ``cutnitsche._kernels``; the two backends must
agree to round-off.  All quantities are exact for P1: constant gradients make
stiffness blocks products of gradient Gram matrices and areas, and segment
integrals of products of linears are done with Simpson's rule.

Local dof layout on cut elements: [side-1 v0, v1, v2, side-2 v0, v1, v2].
"""

from __future__ import annotations

import numpy as np

# local edge i is opposite local vertex i (see mesh.EDGE_VERTICES)
_EDGE = ((1, 2), (2, 0), (0, 1))


def _grads_dets(coords: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """P1 physical gradients (m, 3, 2) and determinants 2*area (m,)."""
    x, y = coords[..., 0], coords[..., 1]
    det = ((x[:, 1] - x[:, 0]) * (y[:, 2] - y[:, 0])
           - (x[:, 2] - x[:, 0]) * (y[:, 1] - y[:, 0]))
    g = np.empty(coords.shape[:1] + (3, 2))
    for i in range(3):
        j, k = (i + 1) % 3, (i + 2) % 3
        g[:, i, 0] = (y[:, j] - y[:, k]) / det
        g[:, i, 1] = (x[:, k] - x[:, j]) / det
    return g, det


def stiffness_batch(coords: np.ndarray) -> np.ndarray:
    """P1 stiffness matrices (m, 3, 3) for triangles given as (m, 3, 2)."""
    g, det = _grads_dets(coords)
    gram = np.einsum("mik,mjk->mij", g, g)
    return gram * (0.5 * det)[:, None, None]


def edge_forms_batch(coords: np.ndarray, edges: np.ndarray):
    """Boundary-edge consistency and mass matrices per (element, edge) pair.

    coords : (p, 3, 2) parent triangle corners, one row per pair
    edges : (p,) local edge index on the domain boundary
    returns (Nc, M), each (p, 3, 3):
      Nc[i, j] = int_e (-d_n phi_j) phi_i,  M[i, j] = int_e phi_i phi_j
    """
    p = coords.shape[0]
    g, _ = _grads_dets(coords)
    Nc = np.zeros((p, 3, 3))
    M = np.zeros((p, 3, 3))
    ea = np.array([_EDGE[e][0] for e in edges])
    eb = np.array([_EDGE[e][1] for e in edges])
    r = np.arange(p)
    tang = coords[r, eb] - coords[r, ea]
    length = np.hypot(tang[:, 0], tang[:, 1])
    normal = np.column_stack([tang[:, 1], -tang[:, 0]]) / length[:, None]

    flux = -np.einsum("pjk,pk->pj", g, normal)          # -d_n phi_j, constant
    half_l = 0.5 * length
    for vi in (ea, eb):
        Nc[r, vi, :] += flux * half_l[:, None]
    M[r, ea, ea] = length / 3.0
    M[r, eb, eb] = length / 3.0
    M[r, ea, eb] = length / 6.0
    M[r, eb, ea] = length / 6.0
    return Nc, M


def _barycentric(coords: np.ndarray, pts: np.ndarray) -> np.ndarray:
    """Barycentric coordinates of pts (c, ..., 2) w.r.t. triangles (c, 3, 2)."""
    v0 = coords[:, 0]
    e1 = coords[:, 1] - v0
    e2 = coords[:, 2] - v0
    det = e1[:, 0] * e2[:, 1] - e1[:, 1] * e2[:, 0]
    shape = (-1,) + (1,) * (pts.ndim - 2)
    d0 = pts[..., 0] - v0[:, 0].reshape(shape)
    d1 = pts[..., 1] - v0[:, 1].reshape(shape)
    xi = (d0 * e2[:, 1].reshape(shape) - d1 * e2[:, 0].reshape(shape)) \
        / det.reshape(shape)
    eta = (d1 * e1[:, 0].reshape(shape) - d0 * e1[:, 1].reshape(shape)) \
        / det.reshape(shape)
    return np.stack([1.0 - xi - eta, xi, eta], axis=-1)


def cut_forms_batch(coords, n_neg, subs, seg_p, seg_q, seg_n, kappa,
                    alpha1: float, alpha2: float):
    """Local forms of cut elements over the doubled (6-dof) basis.

    coords : (c, 3, 2) parent triangles
    n_neg : (c,) number of leading sub-triangles in ``subs`` on the NEG side
    subs : (c, 3, 3, 2) the three sub-triangles (NEG ones first)
    seg_p, seg_q, seg_n : (c, 2) segment endpoints and unit normal (NEG->POS)
    kappa : (c, 2) area fractions (|T_1|/|T|, |T_2|/|T|)
    returns (A, Nc, M, moments):
      A : (c, 6, 6) broken weighted stiffness, block diagonal
      Nc : (c, 6, 6) interface consistency, ({-alpha d_n phi_j}, [phi_i])
      M : (c, 6, 6) unweighted jump mass, ([phi_j], [phi_i])
      moments : (c, 2, 3) per-side integrals of the parent basis
    """
    c = coords.shape[0]
    g, det = _grads_dets(coords)
    gram = np.einsum("cik,cjk->cij", g, g)

    # sub-triangle areas and centroid basis values -> side areas and moments
    u = subs[:, :, 1] - subs[:, :, 0]
    v = subs[:, :, 2] - subs[:, :, 0]
    sa = 0.5 * (u[..., 0] * v[..., 1] - u[..., 1] * v[..., 0])   # (c, 3)
    centroids = subs.mean(axis=2)                     # (c, 3, 2)
    cent_bary = _barycentric(coords, centroids)       # (c, 3, 3)

    side_of_sub = np.arange(3)[None, :] >= n_neg[:, None]   # False=NEG, True=POS
    area_neg = np.where(side_of_sub, 0.0, sa).sum(axis=1)
    area_pos = np.where(side_of_sub, sa, 0.0).sum(axis=1)
    moments = np.empty((c, 2, 3))
    moments[:, 0] = np.einsum("cs,csi->ci", np.where(side_of_sub, 0.0, sa), cent_bary)
    moments[:, 1] = np.einsum("cs,csi->ci", np.where(side_of_sub, sa, 0.0), cent_bary)

    A = np.zeros((c, 6, 6))
    A[:, :3, :3] = gram * (alpha1 * area_neg)[:, None, None]
    A[:, 3:, 3:] = gram * (alpha2 * area_pos)[:, None, None]

    # segment geometry: parent basis is linear on the segment, so endpoint
    # values determine everything; Simpson is exact for the quadratic mass
    lam_p = _barycentric(coords, seg_p)               # (c, 3)
    lam_q = _barycentric(coords, seg_q)
    lam_m = 0.5 * (lam_p + lam_q)
    length = np.hypot(*(seg_q - seg_p).T)
    int_phi = 0.5 * length[:, None] * (lam_p + lam_q)             # (c, 3)
    mass = (length[:, None, None] / 6.0) * (
        np.einsum("ci,cj->cij", lam_p, lam_p)
        + 4.0 * np.einsum("ci,cj->cij", lam_m, lam_m)
        + np.einsum("ci,cj->cij", lam_q, lam_q))

    gn = np.einsum("cjk,ck->cj", g, seg_n)            # d_n phi_j, constant
    alpha = (alpha1, alpha2)
    sigma = (1.0, -1.0)                               # jump [v] = v_1 - v_2
    Nc = np.zeros((c, 6, 6))
    M = np.zeros((c, 6, 6))
    for sv in (0, 1):
        for su in (0, 1):
            blk = -kappa[:, su, None, None] * alpha[su] * sigma[sv] * \
                np.einsum("ci,cj->cij", int_phi, gn)
            Nc[:, 3 * sv:3 * sv + 3, 3 * su:3 * su + 3] = blk
            M[:, 3 * sv:3 * sv + 3, 3 * su:3 * su + 3] = \
                sigma[sv] * sigma[su] * mass
    return A, Nc, M, moments


def lift_stab_batch(A: np.ndarray, K: np.ndarray, Nc: np.ndarray):
    """Lifting matrices L = (A+K)^{-1} Nc^T and stabilization S = 2 L^T A L."""
    L = np.linalg.solve(A + K, np.transpose(Nc, (0, 2, 1)))
    S = 2.0 * np.einsum("cki,ckl,clj->cij", L, A, L)
    return L, 0.5 * (S + np.transpose(S, (0, 2, 1)))
