"""Dense symmetric linear algebra substrate.

Immutable matrix wrappers around numpy arrays plus the handful of LAPACK-backed
operations the rest of the package is built on: Cholesky, SPD solves, standard
and generalized symmetric eigenproblems, and a power-iteration condition
estimate.
"""

import logging
from dataclasses import dataclass
from functools import cached_property

import numpy as np
import scipy.linalg
from scipy.linalg import lapack

from .exceptions import (
    ConvergenceFailure,
    DimensionMismatch,
    InvalidMatrix,
    NotPositiveDefinite,
    NotSymmetric,
)

logger = logging.getLogger(__name__)

# Relative asymmetry accepted (and removed) at construction
SYMMETRY_RTOL = 1e-12

# Sweeps allowed per dimension before the eigensolver is declared stuck
EIGEN_SWEEPS_PER_DIM = 30


class DenseMatrix:
    """Read-only dense real matrix."""

    def __init__(self, entries):
        """Wrap a 2-D array of finite reals.

        Args:
            entries: Anything ``numpy.array`` accepts as a 2-D float array.

        Raises:
            InvalidMatrix: If the input is not 2-D or holds NaN/Inf.
        """
        data = np.array(entries, dtype=float)
        if data.ndim != 2:
            raise InvalidMatrix(f"expected a 2-D array, got {data.ndim}-D")
        if not np.all(np.isfinite(data)):
            raise InvalidMatrix("matrix has non-finite entries")
        data.setflags(write=False)
        self._data = data

    @property
    def data(self) -> np.ndarray:
        return self._data

    @property
    def rows(self) -> int:
        return self._data.shape[0]

    @property
    def cols(self) -> int:
        return self._data.shape[1]

    @property
    def shape(self) -> tuple[int, int]:
        return self._data.shape

    def adjoint(self) -> "DenseMatrix":
        """Euclidean adjoint, i.e. the transpose."""
        return DenseMatrix(self._data.T)

    def max_norm(self) -> float:
        return float(np.max(np.abs(self._data))) if self._data.size else 0.0

    def __repr__(self) -> str:
        return f"{type(self).__name__}(shape={self.shape})"


class DenseSymMatrix(DenseMatrix):
    """Symmetric matrix with a lazily cached Cholesky factor."""

    def __init__(self, entries):
        """Symmetrize and wrap a square matrix.

        Asymmetry below ``SYMMETRY_RTOL * max|M|`` is removed by averaging with
        the transpose; anything larger is rejected.

        Raises:
            DimensionMismatch: If the matrix is not square.
            NotSymmetric: If the asymmetry exceeds tolerance.
        """
        data = np.array(entries, dtype=float)
        if data.ndim != 2 or data.shape[0] != data.shape[1]:
            raise DimensionMismatch(f"symmetric matrix must be square, got shape {data.shape}")
        if not np.all(np.isfinite(data)):
            raise InvalidMatrix("matrix has non-finite entries")
        scale = float(np.max(np.abs(data))) if data.size else 0.0
        asym = float(np.max(np.abs(data - data.T))) if data.size else 0.0
        if asym > SYMMETRY_RTOL * scale:
            raise NotSymmetric(f"asymmetry {asym:.3e} exceeds {SYMMETRY_RTOL:.0e} * {scale:.3e}")
        super().__init__(0.5 * (data + data.T))

    @property
    def dim(self) -> int:
        return self.rows

    @cached_property
    def cholesky_factor(self) -> np.ndarray:
        """Lower Cholesky factor, computed once (the SPD proof)."""
        return cholesky(self)

    def is_spd(self) -> bool:
        """Whether the Cholesky factorization succeeds."""
        try:
            self.cholesky_factor
        except NotPositiveDefinite:
            return False
        return True

    def scaled(self, factor: float) -> "DenseSymMatrix":
        return DenseSymMatrix(factor * self.data)

    @classmethod
    def identity(cls, dim: int) -> "DenseSymMatrix":
        return cls(np.eye(dim))


@dataclass(frozen=True)
class EigenDecomposition:
    """Ascending eigenvalues and the matching eigenvectors (columns)."""

    values: np.ndarray
    vectors: np.ndarray


def as_vector(x, dim: int | None = None) -> np.ndarray:
    """Validate a 1-D vector of finite reals, optionally of a given length.

    Raises:
        DimensionMismatch: If ``dim`` is given and does not match.
        InvalidMatrix: If the entries are not finite.
    """
    v = np.asarray(x, dtype=float)
    if v.ndim != 1:
        raise DimensionMismatch(f"expected a vector, got shape {v.shape}")
    if dim is not None and v.shape[0] != dim:
        raise DimensionMismatch(f"vector has length {v.shape[0]}, expected {dim}")
    if not np.all(np.isfinite(v)):
        raise InvalidMatrix("vector has non-finite entries")
    return v


def _data(m) -> np.ndarray:
    return m.data if isinstance(m, DenseMatrix) else np.asarray(m, dtype=float)


def cholesky(m: DenseSymMatrix) -> np.ndarray:
    """Lower-triangular L with L L^T = m.

    Args:
        m: Symmetric matrix.

    Returns:
        Lower-triangular factor as a float array.

    Raises:
        NotPositiveDefinite: With the zero-based index of the first pivot <= 0.
    """
    a = _data(m)
    if a.shape[0] == 0:
        return np.zeros((0, 0))
    factor, info = lapack.dpotrf(a, lower=1, clean=1, overwrite_a=0)
    if info > 0:
        logger.debug("[Cholesky] failed at pivot %d of %d", info - 1, a.shape[0])
        raise NotPositiveDefinite(info - 1)
    if info < 0:
        raise InvalidMatrix(f"potrf rejected argument {-info}")
    return factor


def solve_spd(m: DenseSymMatrix, rhs) -> np.ndarray:
    """Solve m x = rhs through the cached Cholesky factor.

    ``rhs`` may be a vector or a matrix of right-hand sides (columns).

    Raises:
        NotPositiveDefinite: If m is not SPD.
        DimensionMismatch: If rhs has the wrong leading dimension.
    """
    b = np.asarray(rhs, dtype=float)
    if b.ndim not in (1, 2) or b.shape[0] != m.dim:
        raise DimensionMismatch(f"rhs of shape {b.shape} does not match dimension {m.dim}")
    return scipy.linalg.cho_solve((m.cholesky_factor, True), b)


def spd_inverse(m: DenseSymMatrix) -> np.ndarray:
    """Explicit inverse of an SPD matrix, symmetrized."""
    inv = solve_spd(m, np.eye(m.dim))
    return 0.5 * (inv + inv.T)


def _eigh(a: np.ndarray) -> EigenDecomposition:
    try:
        values, vectors = scipy.linalg.eigh(a)
    except np.linalg.LinAlgError as e:
        raise ConvergenceFailure(EIGEN_SWEEPS_PER_DIM * a.shape[0]) from e
    return EigenDecomposition(values=values, vectors=vectors)


def sym_eig(m: DenseSymMatrix) -> EigenDecomposition:
    """Eigenvalues (ascending) and orthonormal eigenvectors of a symmetric matrix.

    Raises:
        ConvergenceFailure: If the tridiagonal QL/QR iteration stalls.
    """
    return _eigh(m.data)


def gen_sym_eig(m: DenseSymMatrix, w: DenseSymMatrix) -> EigenDecomposition:
    """Solve m x = lambda w x by Cholesky reduction of w.

    With w = L L^T the pencil reduces to the standard symmetric problem
    C y = lambda y, C = L^-1 m L^-T, and x = L^-T y. Eigenvectors come out
    w-orthonormal.

    Raises:
        DimensionMismatch: If m and w differ in size.
        NotPositiveDefinite: If w is not SPD.
        ConvergenceFailure: If the reduced eigenproblem does not converge.
    """
    if m.dim != w.dim:
        raise DimensionMismatch(f"pencil dimensions differ: {m.dim} vs {w.dim}")
    lower = w.cholesky_factor
    half = scipy.linalg.solve_triangular(lower, m.data, lower=True)
    reduced = scipy.linalg.solve_triangular(lower, half.T, lower=True)
    reduced = 0.5 * (reduced + reduced.T)
    eig = _eigh(reduced)
    vectors = scipy.linalg.solve_triangular(lower.T, eig.vectors, lower=False)
    return EigenDecomposition(values=eig.values, vectors=vectors)


def spectral_norm(m) -> float:
    a = _data(m)
    return float(np.linalg.norm(a, 2)) if a.size else 0.0


def eigen_residual(m: DenseSymMatrix, w: DenseSymMatrix | None, value: float, vector: np.ndarray) -> float:
    """Relative residual ||m v - lambda w v|| / ((||m|| + |lambda| ||w||) ||v||)."""
    wv = vector if w is None else w.data @ vector
    w_norm = 1.0 if w is None else spectral_norm(w)
    scale = (spectral_norm(m) + abs(value) * w_norm) * float(np.linalg.norm(vector))
    if scale == 0.0:
        return 0.0
    return float(np.linalg.norm(m.data @ vector - value * wv)) / scale


def condition_estimate(b: DenseSymMatrix, iterations: int = 20) -> float:
    """Estimate ||B|| * ||B^-1|| by power iteration on B and on B^-1.

    Args:
        b: SPD matrix.
        iterations: Power steps for each of the two extreme eigenvalues.

    Returns:
        Condition estimate (>= 1 up to round-off).
    """
    n = b.dim
    if n == 0:
        return 1.0
    start = np.linspace(1.0, 2.0, n)
    start /= np.linalg.norm(start)

    x = start.copy()
    largest = 0.0
    for _ in range(iterations):
        y = b.data @ x
        largest = float(np.linalg.norm(y))
        if largest == 0.0:
            break
        x = y / largest

    x = start.copy()
    largest_inverse = 0.0
    for _ in range(iterations):
        y = solve_spd(b, x)
        largest_inverse = float(np.linalg.norm(y))
        x = y / largest_inverse

    return largest * largest_inverse


def max_abs(a) -> float:
    arr = np.asarray(a)
    return float(np.max(np.abs(arr))) if arr.size else 0.0
