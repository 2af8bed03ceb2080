"""Dense vectors and CSR sparse matrices with the few kernels the solvers need.

Everything is 64-bit float throughout: the solver diagnostics compare
inequalities at tolerances (1e-9 and tighter) that single precision would
break. All operations here are pure and deterministic, so repeated runs with
the same seed produce bit-identical results.
"""

from __future__ import annotations

import numpy as np
import scipy.sparse as sp

__all__ = [
    "as_vector",
    "CsrMatrix",
    "spmv",
    "spmv_transpose",
    "spectral_norm_sq",
]


def as_vector(values) -> np.ndarray:
    """Coerce ``values`` to a finite, contiguous float64 1-D array."""
    x = np.ascontiguousarray(values, dtype=np.float64)
    if x.ndim != 1:
        raise ValueError(f"expected a 1-D vector, got shape {x.shape}")
    if not np.all(np.isfinite(x)):
        raise ValueError("vector contains NaN or Inf entries")
    return x


class CsrMatrix:
    """Immutable row-compressed sparse matrix.

    Parameters
    ----------
    n_rows, n_cols : int
        Matrix shape.
    row_ptr : array of int, length ``n_rows + 1``
        Nondecreasing offsets into ``col_idx``/``vals``; ``row_ptr[0] == 0``
        and ``row_ptr[-1] == len(vals)``.
    col_idx : array of int
        Column indices, strictly increasing within each row and ``< n_cols``.
    vals : array of float
        Nonzero values (finite).
    """

    __slots__ = ("n_rows", "n_cols", "row_ptr", "col_idx", "vals", "_csr")

    def __init__(self, n_rows, n_cols, row_ptr, col_idx, vals):
        row_ptr = np.ascontiguousarray(row_ptr, dtype=np.int64)
        col_idx = np.ascontiguousarray(col_idx, dtype=np.int64)
        vals = np.ascontiguousarray(vals, dtype=np.float64)
        if n_rows < 0 or n_cols < 0:
            raise ValueError("matrix dimensions must be nonnegative")
        if row_ptr.shape != (n_rows + 1,):
            raise ValueError("row_ptr must have length n_rows + 1")
        if row_ptr[0] != 0 or row_ptr[-1] != len(vals) or len(vals) != len(col_idx):
            raise ValueError("row_ptr endpoints inconsistent with data length")
        if np.any(np.diff(row_ptr) < 0):
            raise ValueError("row_ptr must be nondecreasing")
        if len(col_idx) and (col_idx.min() < 0 or col_idx.max() >= n_cols):
            raise ValueError("column index out of range")
        for i in range(n_rows):
            cols = col_idx[row_ptr[i]:row_ptr[i + 1]]
            if len(cols) > 1 and np.any(np.diff(cols) <= 0):
                raise ValueError(f"row {i}: column indices not strictly increasing")
        if not np.all(np.isfinite(vals)):
            raise ValueError("matrix values contain NaN or Inf")
        object.__setattr__(self, "n_rows", int(n_rows))
        object.__setattr__(self, "n_cols", int(n_cols))
        object.__setattr__(self, "row_ptr", row_ptr)
        object.__setattr__(self, "col_idx", col_idx)
        object.__setattr__(self, "vals", vals)
        # scipy backs the actual products; its CSR matvec walks each row in
        # ascending column order, which fixes the accumulation order.
        object.__setattr__(
            self, "_csr",
            sp.csr_matrix((vals, col_idx, row_ptr), shape=(n_rows, n_cols)),
        )

    def __setattr__(self, name, value):
        raise AttributeError("CsrMatrix is immutable")

    @property
    def shape(self):
        return (self.n_rows, self.n_cols)

    @property
    def nnz(self) -> int:
        return len(self.vals)

    @classmethod
    def from_dense(cls, dense) -> "CsrMatrix":
        """Build from a dense 2-D array, dropping exact zeros."""
        a = np.asarray(dense, dtype=np.float64)
        if a.ndim != 2:
            raise ValueError("from_dense expects a 2-D array")
        csr = sp.csr_matrix(a)
        csr.sort_indices()
        return cls(a.shape[0], a.shape[1], csr.indptr, csr.indices, csr.data)

    def to_dense(self) -> np.ndarray:
        return self._csr.toarray()

    def frobenius_norm_sq(self) -> float:
        return float(np.dot(self.vals, self.vals))

    def __eq__(self, other):
        if not isinstance(other, CsrMatrix):
            return NotImplemented
        return (
            self.shape == other.shape
            and np.array_equal(self.row_ptr, other.row_ptr)
            and np.array_equal(self.col_idx, other.col_idx)
            and np.array_equal(self.vals, other.vals)
        )

    def __repr__(self):
        return f"CsrMatrix({self.n_rows}x{self.n_cols}, nnz={self.nnz})"


def spmv(A: CsrMatrix, x: np.ndarray) -> np.ndarray:
    """Sparse matrix-vector product ``A @ x``."""
    if len(x) != A.n_cols:
        raise ValueError(f"dimension mismatch: matrix has {A.n_cols} columns, vector has {len(x)}")
    return A._csr.dot(np.asarray(x, dtype=np.float64))


def spmv_transpose(A: CsrMatrix, y: np.ndarray) -> np.ndarray:
    """Transposed product ``A.T @ y`` (row-major sweep over A)."""
    if len(y) != A.n_rows:
        raise ValueError(f"dimension mismatch: matrix has {A.n_rows} rows, vector has {len(y)}")
    return A._csr.T.dot(np.asarray(y, dtype=np.float64))


def spectral_norm_sq(A: CsrMatrix, iters: int = 100, seed: int = 0) -> float:
    """Estimate ``||A||_2^2`` by power iteration on ``A.T A``.

    Starts from a seeded Gaussian vector and stops early once the Rayleigh
    quotient changes by less than 1e-10 relatively. The estimate approaches
    the true value from below, so it never exceeds the squared Frobenius
    norm.

    Returns 0.0 for a matrix with no nonzeros (or one annihilating the
    start vector).
    """
    if iters < 1:
        raise ValueError("iters must be >= 1")
    if A.nnz == 0:
        return 0.0
    rng = np.random.default_rng(seed)
    v = rng.standard_normal(A.n_cols)
    estimate = 0.0
    for _ in range(iters):
        norm_v = float(np.linalg.norm(v))
        if norm_v == 0.0:
            return 0.0
        v /= norm_v
        av = spmv(A, v)
        new_estimate = float(np.dot(av, av))
        if estimate > 0.0 and abs(new_estimate - estimate) <= 1e-10 * estimate:
            return new_estimate
        estimate = new_estimate
        v = spmv_transpose(A, av)
    return estimate
