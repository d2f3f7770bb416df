"""
One-sided (Hestenes) Jacobi SVD for the small dense matrices that appear in
the bounds: weight matrices, pooling matrices and convolution matrices.
"""
from dataclasses import dataclass

import numpy as np

from core.base.errors import DiagnosticError, ParameterError

RANK_TOL = 1e-10
MAX_SWEEPS = 80


@dataclass(frozen=True, eq=False)
class SvdResult:
    """
    m = left @ diag(singular_values) @ right[:, :k]^H  with k = min(rows, cols).

    ``right`` is a full orthonormal basis of the input space; its columns past
    ``numerical_rank`` span ker(m).
    """
    singular_values: np.ndarray
    left: np.ndarray
    right: np.ndarray
    numerical_rank: int

    @property
    def kernel_basis(self) -> np.ndarray:
        return self.right[:, self.numerical_rank:]

    @property
    def nonzero_singular_values(self) -> np.ndarray:
        return self.singular_values[:self.numerical_rank]

    @property
    def spectral_norm(self) -> float:
        return float(self.singular_values[0]) if self.singular_values.size else 0.0

    @property
    def smallest_singular_value(self) -> float:
        return float(self.singular_values[-1]) if self.singular_values.size else 0.0

    def reconstruct(self) -> np.ndarray:
        k = self.singular_values.size
        return (self.left * self.singular_values) @ self.right[:, :k].conj().T


def as_matrix(m) -> np.ndarray:
    """Validate a 2-D finite matrix, keeping complex entries complex"""
    array = np.asarray(m)
    if array.ndim == 1:
        array = array.reshape(1, -1)
    if array.ndim != 2:
        raise ParameterError(f"expected a matrix, got an array of shape {array.shape}")
    dtype = np.complex128 if np.iscomplexobj(array) else np.float64
    array = array.astype(dtype)
    if not np.all(np.isfinite(array)):
        raise ParameterError("matrix has non-finite entries")
    return array


def _complete_basis(columns: np.ndarray, size: int) -> np.ndarray:
    """Extend orthonormal columns to an orthonormal basis of the whole space"""
    basis = [columns[:, i] for i in range(columns.shape[1])]
    for i in range(size):
        if len(basis) == size:
            break
        candidate = np.zeros(size, dtype=columns.dtype)
        candidate[i] = 1.0
        # two passes of Gram-Schmidt
        for _ in range(2):
            for q in basis:
                candidate = candidate - np.vdot(q, candidate) * q
        norm = np.linalg.norm(candidate)
        if norm > 1e-8:
            basis.append(candidate / norm)
    return np.stack(basis, axis=1) if basis else np.zeros((size, 0), dtype=columns.dtype)


def _jacobi_tall(a: np.ndarray, tol: float) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Orthogonalize the columns of a (rows >= cols); returns (s, U, V) unsorted"""
    a = a.copy()
    n = a.shape[1]
    v = np.eye(n, dtype=a.dtype)
    # columns below this squared norm are numerically zero
    negligible = (np.finfo(np.float64).eps ** 2) * float(np.real(np.vdot(a, a)))
    for _ in range(MAX_SWEEPS):
        rotated = False
        for p in range(n - 1):
            for q in range(p + 1, n):
                alpha = float(np.real(np.vdot(a[:, p], a[:, p])))
                beta = float(np.real(np.vdot(a[:, q], a[:, q])))
                gamma = np.vdot(a[:, p], a[:, q])
                g = abs(gamma)
                if g == 0.0 or min(alpha, beta) <= negligible or g <= tol * np.sqrt(alpha * beta):
                    continue
                rotated = True
                # make <a_p, a_q> real and positive (a sign flip for real input)
                phase = np.conj(gamma) / g
                a[:, q] *= phase
                v[:, q] *= phase
                zeta = (beta - alpha) / (2.0 * g)
                t = np.copysign(1.0, zeta) / (abs(zeta) + np.sqrt(1.0 + zeta * zeta))
                c = 1.0 / np.sqrt(1.0 + t * t)
                s = c * t
                ap = a[:, p].copy()
                a[:, p] = c * ap - s * a[:, q]
                a[:, q] = s * ap + c * a[:, q]
                vp = v[:, p].copy()
                v[:, p] = c * vp - s * v[:, q]
                v[:, q] = s * vp + c * v[:, q]
        if not rotated:
            break
    else:
        raise DiagnosticError(f"Jacobi SVD did not converge in {MAX_SWEEPS} sweeps")
    s = np.linalg.norm(a, axis=0)
    return s, a, v


def svd(m, rank_tol: float = RANK_TOL) -> SvdResult:
    a = as_matrix(m)
    rows, cols = a.shape
    tol = 10.0 * np.finfo(np.float64).eps * np.sqrt(max(rows, cols))
    transposed = rows < cols
    work = a.conj().T if transposed else a
    s, columns, v = _jacobi_tall(work, tol)

    order = np.argsort(-s, kind="stable")
    s = s[order]
    columns = columns[:, order]
    v = v[:, order]

    rank = int(np.sum(s > rank_tol * s[0])) if s.size and s[0] > 0.0 else 0
    u = np.zeros_like(columns)
    u[:, :rank] = columns[:, :rank] / s[:rank]
    u = _complete_basis(u[:, :rank], work.shape[0])[:, :work.shape[1]]

    if transposed:
        # work = a^H = U' S V'^H  =>  a = V' S U'^H
        left, right = v, _complete_basis(u, cols)
    else:
        left, right = u, v
    return SvdResult(singular_values=s, left=left, right=right, numerical_rank=rank)


def spectral_norm(m) -> float:
    return svd(m).spectral_norm
