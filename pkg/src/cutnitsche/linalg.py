"""Sparse symmetric storage, CG solver and spectral diagnostics.

CSR storage and matrix-vector products are delegated to scipy.sparse behind a
small wrapper that pins down the layout contract: duplicate triplets summed,
column indices sorted, no explicit zeros except the (always stored) diagonal.
Dense symmetric eigenvalues come from LAPACK via ``numpy.linalg.eigvalsh``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

# relative eigenvalue threshold below which a matrix is reported UNSTABLE
UNSTABLE_REL = 1e-12


class NonPositiveDiagonalError(ValueError):
    pass


class CgError(RuntimeError):
    """CG failed; carries the last relative residual and iteration count."""

    def __init__(self, message, relres, iterations):
        super().__init__(f"{message} (relres={relres:.3e} after {iterations} its)")
        self.relres = relres
        self.iterations = iterations


class CsrMatrix:
    """Symmetric sparse matrix in CSR form."""

    def __init__(self, mat: sp.csr_matrix):
        mat = sp.csr_matrix(mat)
        mat.sort_indices()
        self._m = mat

    @property
    def n(self) -> int:
        return self._m.shape[0]

    @property
    def indptr(self) -> np.ndarray:
        return self._m.indptr

    @property
    def indices(self) -> np.ndarray:
        return self._m.indices

    @property
    def data(self) -> np.ndarray:
        return self._m.data

    @property
    def nnz(self) -> int:
        return self._m.nnz

    def matvec(self, x: np.ndarray) -> np.ndarray:
        return self._m @ x

    def dense(self) -> np.ndarray:
        return self._m.toarray()

    def diagonal(self) -> np.ndarray:
        return self._m.diagonal()

    def pattern(self) -> tuple[np.ndarray, np.ndarray]:
        """(indptr, indices) pair identifying the sparsity pattern."""
        return self._m.indptr.copy(), self._m.indices.copy()

    def rows(self) -> np.ndarray:
        """Row index of every stored entry."""
        return np.repeat(np.arange(self.n), np.diff(self._m.indptr))

    def submatrix(self, keep: np.ndarray) -> "CsrMatrix":
        """Symmetric restriction to the given index set."""
        return CsrMatrix(self._m[np.ix_(keep, keep)].tocsr())

    def restrict_cols(self, rows: np.ndarray, cols: np.ndarray) -> sp.csr_matrix:
        return self._m[np.ix_(rows, cols)].tocsr()

    def combine(self, other: "CsrMatrix", ca: float, cb: float) -> "CsrMatrix":
        """ca*self + cb*other.  Fast path when the patterns coincide."""
        if (self.nnz == other.nnz
                and np.array_equal(self.indptr, other.indptr)
                and np.array_equal(self.indices, other.indices)):
            out = self._m.copy()
            out.data = ca * self._m.data + cb * other._m.data
            return CsrMatrix(out)
        return CsrMatrix((ca * self._m + cb * other._m).tocsr())

    def max_abs(self) -> float:
        return float(np.max(np.abs(self._m.data))) if self.nnz else 0.0


def from_triplets(n: int, entries) -> CsrMatrix:
    """Build an n x n CSR matrix from (i, j, value) triplets.

    Duplicates are summed; exact zeros are dropped afterwards except on the
    diagonal, which is always stored.
    """
    if isinstance(entries, tuple) and len(entries) == 3:
        rows, cols, vals = (np.asarray(a) for a in entries)
    else:
        trip = list(entries)
        if trip:
            rows, cols, vals = (np.array(a) for a in zip(*trip))
        else:
            rows = cols = np.array([], dtype=np.int64)
            vals = np.array([])
    if rows.size and (rows.min() < 0 or rows.max() >= n
                      or cols.min() < 0 or cols.max() >= n):
        raise ValueError("triplet index out of range")

    diag = np.arange(n)
    rows = np.concatenate([rows.astype(np.int64), diag])
    cols = np.concatenate([cols.astype(np.int64), diag])
    vals = np.concatenate([vals.astype(np.float64), np.zeros(n)])

    m = sp.coo_matrix((vals, (rows, cols)), shape=(n, n)).tocsr()
    m.sum_duplicates()
    coo = m.tocoo()
    keep = (coo.data != 0.0) | (coo.row == coo.col)
    m = sp.coo_matrix((coo.data[keep], (coo.row[keep], coo.col[keep])),
                      shape=(n, n)).tocsr()
    return CsrMatrix(m)


@dataclass(frozen=True)
class SpectralReport:
    """Extreme eigenvalues of the diagonally scaled matrix.

    ``cond`` is None when the matrix is (numerically) not positive definite,
    i.e. lambda_min <= UNSTABLE_REL * lambda_max or the diagonal is not
    strictly positive.
    """

    lambda_min: float
    lambda_max: float
    cond: float | None

    @property
    def stable(self) -> bool:
        return self.cond is not None


def jacobi_scale(m: CsrMatrix) -> CsrMatrix:
    """Symmetric two-sided diagonal scaling D^{-1/2} M D^{-1/2}."""
    d = m.diagonal()
    if np.any(d <= 0.0):
        raise NonPositiveDiagonalError(
            f"{np.count_nonzero(d <= 0)} non-positive diagonal entries")
    s = 1.0 / np.sqrt(d)
    out = sp.csr_matrix((m.data * s[m.rows()] * s[m.indices],
                         m.indices.copy(), m.indptr.copy()), shape=(m.n, m.n))
    return CsrMatrix(out)


def sym_eigenvalues(m: np.ndarray) -> np.ndarray:
    """Eigenvalues of a dense symmetric matrix, ascending (LAPACK)."""
    return np.linalg.eigvalsh(np.asarray(m, dtype=float))


def condition_number(m: CsrMatrix) -> SpectralReport:
    """Spectral condition number of the Jacobi-scaled matrix."""
    if np.any(m.diagonal() <= 0.0):
        return SpectralReport(float("nan"), float("nan"), None)
    ev = sym_eigenvalues(jacobi_scale(m).dense())
    lmin, lmax = float(ev[0]), float(ev[-1])
    if lmin <= UNSTABLE_REL * lmax:
        return SpectralReport(lmin, lmax, None)
    return SpectralReport(lmin, lmax, lmax / lmin)


def cg_solve(m: CsrMatrix, b: np.ndarray, tol: float = 1e-10,
             maxit: int | None = None) -> np.ndarray:
    """Conjugate gradients for SPD systems, relative-residual stopping rule.

    Raises CgError on non-convergence or when a direction of non-positive
    curvature shows the matrix is not positive definite.
    """
    b = np.asarray(b, dtype=float)
    nb = float(np.linalg.norm(b))
    if nb == 0.0:
        return np.zeros_like(b)
    if maxit is None:
        maxit = max(1000, 10 * m.n)

    x = np.zeros_like(b)
    r = b.copy()
    p = r.copy()
    rs = float(r @ r)
    for it in range(1, maxit + 1):
        ap = m.matvec(p)
        pap = float(p @ ap)
        if pap <= 0.0:
            raise CgError("matrix is not positive definite",
                          np.sqrt(rs) / nb, it)
        alpha = rs / pap
        x += alpha * p
        r -= alpha * ap
        rs_new = float(r @ r)
        if np.sqrt(rs_new) <= tol * nb:
            true_res = float(np.linalg.norm(b - m.matvec(x)))
            if true_res <= tol * nb:
                return x
            r = b - m.matvec(x)           # recursion drifted; restart
            rs_new = float(r @ r)
            p = r.copy()
            rs = rs_new
            continue
        p = r + (rs_new / rs) * p
        rs = rs_new
    raise CgError("no convergence", np.sqrt(rs) / nb, maxit)
