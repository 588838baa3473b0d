"""Dense real matrix algebra for adversary matrices.

Matrices are plain ``float64`` numpy arrays.  Eigendecompositions go
through LAPACK via :func:`numpy.linalg.eigh`; everything here is a thin,
checked layer over it plus the structured constructions used by the
composition theorem (hat matrices, lifting, matrix composition).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

SYMMETRY_RTOL = 1e-12
MAX_DIM = 512


class NumericError(ArithmeticError):
    pass


class ShapeError(ValueError):
    pass


@dataclass(frozen=True)
class SymEig:
    """Eigenvalues in descending order with matching orthonormal columns."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    @property
    def lambda_max(self) -> float:
        return float(self.eigenvalues[0])

    @property
    def lambda_min(self) -> float:
        return float(self.eigenvalues[-1])

    def reconstruct(self) -> np.ndarray:
        Q = self.eigenvectors
        return (Q * self.eigenvalues) @ Q.T


def as_matrix(A) -> np.ndarray:
    A = np.asarray(A, dtype=float)
    if A.ndim != 2:
        raise ShapeError(f"expected a 2-d matrix, got shape {A.shape}")
    if not np.all(np.isfinite(A)):
        raise NumericError("matrix has non-finite entries")
    return A


def check_symmetric(A: np.ndarray, rtol: float = SYMMETRY_RTOL) -> np.ndarray:
    A = as_matrix(A)
    if A.shape[0] != A.shape[1]:
        raise ShapeError(f"expected a square matrix, got {A.shape}")
    scale = 1.0 + np.abs(A).max(initial=0.0)
    if np.abs(A - A.T).max(initial=0.0) > rtol * scale:
        raise ShapeError("matrix is not symmetric")
    return A


def sym_eig(A) -> SymEig:
    A = check_symmetric(A)
    try:
        w, Q = np.linalg.eigh(A)
    except np.linalg.LinAlgError as exc:
        raise NumericError(str(exc)) from exc
    return SymEig(w[::-1].copy(), Q[:, ::-1].copy())


def eigvals(A) -> np.ndarray:
    """Eigenvalues of a symmetric matrix, descending."""
    A = check_symmetric(A)
    return np.linalg.eigvalsh(A)[::-1]


def lambda_max(A) -> float:
    return float(eigvals(A)[0])


def lambda_min(A) -> float:
    return float(eigvals(A)[-1])


def spectral_norm(A) -> float:
    A = as_matrix(A)
    if A.size == 0:
        return 0.0
    return float(np.linalg.norm(A, 2))


def trace_norm(A) -> float:
    A = as_matrix(A)
    if A.size == 0:
        return 0.0
    return float(np.linalg.svd(A, compute_uv=False).sum())


def hadamard(A, B) -> np.ndarray:
    A, B = as_matrix(A), as_matrix(B)
    if A.shape != B.shape:
        raise ShapeError(f"shape mismatch {A.shape} vs {B.shape}")
    return A * B


def kron(A, B, max_dim: int = MAX_DIM) -> np.ndarray:
    A, B = as_matrix(A), as_matrix(B)
    rows, cols = A.shape[0] * B.shape[0], A.shape[1] * B.shape[1]
    if max(rows, cols) > max_dim:
        raise ShapeError(f"Kronecker product {rows}x{cols} exceeds cap {max_dim}")
    return np.kron(A, B)


def is_psd(A, tol: float = 1e-10) -> tuple[bool, float]:
    """PSD test returning ``(ok, lambda_min)``; passes iff ``lambda_min >= -tol(1+||A||)``."""
    w = eigvals(A)
    norm = max(abs(w[0]), abs(w[-1])) if w.size else 0.0
    lam = float(w[-1]) if w.size else 0.0
    return lam >= -tol * (1.0 + norm), lam


def is_nsd(A, tol: float = 1e-10) -> tuple[bool, float]:
    """NSD test returning ``(ok, lambda_max)``."""
    ok, lam = is_psd(-as_matrix(A), tol)
    return ok, -lam


def hat(A) -> np.ndarray:
    """The dilation ``[[||A|| I, A], [A^T, ||A|| I]]``, PSD for every ``A``."""
    A = as_matrix(A)
    m, n = A.shape
    s = spectral_norm(A)
    out = np.zeros((m + n, m + n))
    out[:m, m:] = A
    out[m:, :m] = A.T
    out[np.diag_indices(m + n)] = s
    return out


def lift_by_function(A, h: Sequence[int] | np.ndarray | Callable[[int], int], N: int | None = None) -> np.ndarray:
    """``A~(x, y) = A(h(x), h(y))`` for ``x, y`` in ``range(N)``.

    ``h`` is either an index array of length ``N`` or a callable together
    with ``N``.  Rows and columns get duplicated, so PSD/NSD is preserved.
    """
    A = as_matrix(A)
    if callable(h):
        if N is None:
            raise ValueError("N is required when h is callable")
        idx = np.array([h(x) for x in range(N)], dtype=np.int64)
    else:
        idx = np.asarray(h, dtype=np.int64)
    if idx.size and (idx.min() < 0 or idx.max() >= A.shape[0]):
        raise ShapeError("lifting map leaves the index range of A")
    return A[np.ix_(idx, idx)]


def composition_threshold_bits(shapes: Sequence[tuple[int, int]]) -> np.ndarray:
    """For every composition label, the ``N``-bit string ``a~`` as an integer.

    Labels are mixed-radix over ``[m_1+n_1] x ... x [m_N+n_N]`` with factor 1
    varying fastest; ``a~_i = 1`` iff ``a_i`` lands in the last ``n_i`` slots.
    """
    labels = np.zeros(1, dtype=np.int64)
    for p, (m_i, n_i) in reversed(list(enumerate(shapes))):
        bit = (np.arange(m_i + n_i) >= m_i).astype(np.int64) << p
        labels = (labels[:, None] | bit[None, :]).ravel()
    return labels


def kron_factor_first_fastest(mats: Sequence[np.ndarray], max_dim: int = MAX_DIM) -> np.ndarray:
    """Kronecker product of ``mats`` with factor 1 as the fastest-varying index."""
    out = np.ones((1, 1))
    for M in mats:
        out = kron(M, out, max_dim)
    return out


def matrix_composition(B, blocks: Sequence, max_dim: int = MAX_DIM) -> np.ndarray:
    """``C = B~ o (hat(A_1) (x) ... (x) hat(A_N))`` over mixed-radix labels."""
    B = check_symmetric(B)
    blocks = [as_matrix(A) for A in blocks]
    N = len(blocks)
    if B.shape[0] != 1 << N:
        raise ShapeError(f"B must be {1 << N}x{1 << N} for {N} blocks, got {B.shape}")
    dim = int(np.prod([sum(A.shape) for A in blocks]))
    if dim > max_dim:
        raise ShapeError(f"composition dimension {dim} exceeds cap {max_dim}")
    labels = composition_threshold_bits([A.shape for A in blocks])
    return lift_by_function(B, labels) * kron_factor_first_fastest([hat(A) for A in blocks], max_dim)
