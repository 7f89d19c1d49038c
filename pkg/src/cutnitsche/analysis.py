"""Manufactured solutions, error norms and convergence orders.

The two-phase benchmark has a kink across the quartic-norm circle
{ (x^4+y^4)^(1/4) = 1 }: with diffusion (1, 2) the exact solution is

    u1 = 1 + pi/2 - sqrt(2) cos(pi/4 (x^4+y^4))      inside,
    u2 = pi/2 (x^4+y^4)^(1/4)                        outside,

which is continuous with continuous flux across the interface.  The source
terms are the hand-derived negative weighted Laplacians; tests cross-check
them against finite differences.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from ._kernels_py import _barycentric, _grads_dets
from .cutcells import CutInfo
from .mesh import Mesh
from .quadrature import basis_values, segment_rule, triangle_rule

ERROR_VOLUME_ORDER = 5
ERROR_SEGMENT_ORDER = 5

KINK_ALPHA = (1.0, 2.0)


@dataclass(frozen=True)
class ManufacturedSolution:
    """Exact solution with one branch per sub-domain.

    For single-domain (fitted) problems only branch 0 is used.  ``g`` is the
    boundary trace; all callables broadcast over numpy arrays.
    """

    u: tuple[Callable, Callable]
    grad_u: tuple[Callable, Callable]
    f: tuple[Callable, Callable]
    g: Callable


@dataclass(frozen=True)
class ErrorReport:
    l2: float
    h1_broken: float
    jump_l2_gamma: float
    n_dofs: int
    h: float


def kink_solution() -> ManufacturedSolution:
    """Two-phase benchmark solution; requires alpha = (1, 2)."""
    def u1(x, y):
        s = x ** 4 + y ** 4
        return 1.0 + np.pi / 2 - np.sqrt(2.0) * np.cos(np.pi / 4 * s)

    def grad1(x, y):
        s = x ** 4 + y ** 4
        c = np.sqrt(2.0) * np.pi * np.sin(np.pi / 4 * s)
        return np.stack([c * x ** 3, c * y ** 3], axis=-1)

    def f1(x, y):
        s = x ** 4 + y ** 4
        return -np.sqrt(2.0) * np.pi * (
            np.pi * np.cos(np.pi / 4 * s) * (x ** 6 + y ** 6)
            + 3.0 * np.sin(np.pi / 4 * s) * (x ** 2 + y ** 2))

    def _s_outside(x, y):
        s = np.asarray(x, dtype=float) ** 4 + np.asarray(y, dtype=float) ** 4
        # the outside branch is singular at the origin, which lies strictly
        # inside domain 1 and must never be evaluated here
        assert np.all(s > 1e-12), "outside branch evaluated at the origin"
        return s

    def u2(x, y):
        return np.pi / 2 * _s_outside(x, y) ** 0.25

    def grad2(x, y):
        s = _s_outside(x, y)
        c = np.pi / 2 * s ** -0.75
        return np.stack([c * x ** 3, c * y ** 3], axis=-1)

    def f2(x, y):
        s = _s_outside(x, y)
        return -3.0 * np.pi * x ** 2 * y ** 2 * (x ** 2 + y ** 2) * s ** -1.75

    return ManufacturedSolution((u1, u2), (grad1, grad2), (f1, f2), u2)


def smooth_fitted_solution() -> ManufacturedSolution:
    """u = sin(pi x) sin(pi y); source 2 pi^2 u; zero trace on the unit square."""
    def u(x, y):
        return np.sin(np.pi * x) * np.sin(np.pi * y)

    def grad(x, y):
        return np.stack([np.pi * np.cos(np.pi * x) * np.sin(np.pi * y),
                         np.pi * np.sin(np.pi * x) * np.cos(np.pi * y)], axis=-1)

    def f(x, y):
        return 2.0 * np.pi ** 2 * u(x, y)

    return ManufacturedSolution((u, u), (grad, grad), (f, f), u)


def affine_solution(c0: float = 0.0, cx: float = 1.0, cy: float = 1.0
                    ) -> ManufacturedSolution:
    """Affine u = c0 + cx*x + cy*y, contained in every P1 space; f = 0."""
    def u(x, y):
        return c0 + cx * x + cy * np.asarray(y, dtype=float)

    def grad(x, y):
        out = np.empty(np.broadcast(x, y).shape + (2,))
        out[..., 0] = cx
        out[..., 1] = cy
        return out

    def zero(x, y):
        return np.zeros(np.broadcast(x, y).shape)

    return ManufacturedSolution((u, u), (grad, grad), (zero, zero), u)


def planar_interface_solution(alpha: tuple[float, float], c: float
                              ) -> ManufacturedSolution:
    """Piecewise affine kink across the line x = c, flux continuous.

    u_i = (x - c)/alpha_i is continuous at the interface and has continuous
    flux alpha_i du_i/dx = 1; both sources vanish.
    """
    def make_u(ai):
        return lambda x, y: (np.asarray(x, dtype=float) - c) / ai

    def make_grad(ai):
        def grad(x, y):
            out = np.zeros(np.broadcast(x, y).shape + (2,))
            out[..., 0] = 1.0 / ai
            return out
        return grad

    def zero(x, y):
        return np.zeros(np.broadcast(x, y).shape)

    u1, u2 = make_u(alpha[0]), make_u(alpha[1])
    return ManufacturedSolution((u1, u2), (make_grad(alpha[0]), make_grad(alpha[1])),
                                (zero, zero), u2)


# ---------------------------------------------------------------------------
# error norms
# ---------------------------------------------------------------------------

def _accumulate_volume(sub_coords, parent_coords, elem_coeffs, exact_u,
                       exact_grad):
    """(sum (u_h-u)^2, sum |grad u_h - grad u|^2) over the given triangles."""
    rule = triangle_rule(ERROR_VOLUME_ORDER)
    bary = basis_values(rule.points)
    phys = np.einsum("qi,mik->mqk", bary, sub_coords)
    _, det = _grads_dets(sub_coords)
    w = rule.weights[None, :] * det[:, None]

    pbary = _barycentric(parent_coords, phys)           # (m, nq, 3)
    uh = np.einsum("mi,mqi->mq", elem_coeffs, pbary)
    ue = np.broadcast_to(np.asarray(exact_u(phys[..., 0], phys[..., 1]),
                                    dtype=float), uh.shape)
    l2 = float(np.sum(w * (uh - ue) ** 2))

    grads, _ = _grads_dets(parent_coords)
    gh = np.einsum("mi,mik->mk", elem_coeffs, grads)    # constant per element
    ge = exact_grad(phys[..., 0], phys[..., 1])
    diff = gh[:, None, :] - ge
    h1 = float(np.sum(w * np.einsum("mqk,mqk->mq", diff, diff)))
    return l2, h1


def error_norms(coeffs: np.ndarray, mesh: Mesh, dofmap, cuts,
                exact: ManufacturedSolution) -> ErrorReport:
    """L2 and broken H1-seminorm errors plus the interface jump norm.

    For interface problems every sub-triangle is integrated against the
    exact branch of its own side; the jump norm is taken over the
    reconstructed segments.
    """
    coords = mesh.all_triangle_coords()
    if cuts is None:
        elem_coeffs = coeffs[dofmap.cell_dofs]
        l2, h1 = _accumulate_volume(coords, coords, elem_coeffs,
                                    exact.u[0], exact.grad_u[0])
        return ErrorReport(np.sqrt(l2), np.sqrt(h1), 0.0, dofmap.n_dofs, mesh.h)

    l2 = h1 = 0.0
    for side in (0, 1):
        sub_list, parent_ids = [], []
        for t, info in enumerate(cuts):
            for s in (info.sub_triangles_neg, info.sub_triangles_pos)[side]:
                sub_list.append(s)
                parent_ids.append(t)
        if not sub_list:
            continue
        sub_coords = np.stack(sub_list)
        parent_ids = np.array(parent_ids)
        elem_coeffs = coeffs[dofmap.side_cell_dofs[side][parent_ids]]
        dl2, dh1 = _accumulate_volume(sub_coords, coords[parent_ids],
                                      elem_coeffs, exact.u[side],
                                      exact.grad_u[side])
        l2 += dl2
        h1 += dh1

    jump2 = 0.0
    cut_ids = [t for t, info in enumerate(cuts) if info.is_cut]
    if cut_ids:
        rule = segment_rule(ERROR_SEGMENT_ORDER)
        pc = coords[np.array(cut_ids)]
        seg_p = np.stack([cuts[t].segment[0] for t in cut_ids])
        seg_q = np.stack([cuts[t].segment[1] for t in cut_ids])
        lengths = np.hypot(*(seg_q - seg_p).T)
        pts = seg_p[:, None, :] + rule.points[None, :, None] * \
            (seg_q - seg_p)[:, None, :]
        pbary = _barycentric(pc, pts)
        c1 = coeffs[dofmap.side_cell_dofs[0][cut_ids]]
        c2 = coeffs[dofmap.side_cell_dofs[1][cut_ids]]
        jump = np.einsum("mi,mqi->mq", c1 - c2, pbary)
        w = rule.weights[None, :] * lengths[:, None]
        jump2 = float(np.sum(w * jump ** 2))

    return ErrorReport(np.sqrt(l2), np.sqrt(h1), np.sqrt(jump2),
                       dofmap.n_dofs, mesh.h)


def eoc(errors: list[tuple[float, float]]) -> list[float | None]:
    """Orders log2(e_k / e_{k+1}) for a sequence of (h, error) pairs.

    Requires successive h halving; vanishing errors give None entries
    (exact reproduction, no rate to measure).
    """
    if len(errors) < 2:
        raise ValueError("need at least two levels")
    out = []
    for (h0, e0), (h1, e1) in zip(errors, errors[1:]):
        if not np.isclose(h0 / h1, 2.0, rtol=0.01):
            raise ValueError(f"mesh sizes {h0}, {h1} do not halve")
        if e0 <= 0.0 or e1 <= 0.0:
            out.append(None)
        else:
            out.append(float(np.log2(e0 / e1)))
    return out
