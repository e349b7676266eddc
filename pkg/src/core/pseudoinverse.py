"""Moore-Penrose and weighted pseudo-inverses of surjective maps.

For a surjective R: V -> H the pseudo-inverse picks, for every y, the preimage
of minimal norm. With a weight B the norm is ||x||_B = sqrt(x^T B x). Both are
computed in closed form:

    R^dagger   = R^T (R R^T)^-1
    R_B^dagger = B^-1 R^T (R B^-1 R^T)^-1

The constrained-minimization characterization is kept for tests only.
"""

import logging

import numpy as np
import scipy.linalg

from .exceptions import DimensionMismatch, NotPositiveDefinite, RankDeficient
from .linalg import (
    DenseMatrix,
    DenseSymMatrix,
    as_vector,
    cholesky,
    max_abs,
    solve_spd,
)

logger = logging.getLogger(__name__)

# sigma_min / sigma_max below this is treated as rank deficient
SURJECTIVITY_RTOL = 1e-10


class SurjectiveMap:
    """A full-row-rank matrix R: V -> H with rows = dim(H) <= cols = dim(V)."""

    def __init__(self, matrix):
        """Wrap and gate a matrix as numerically surjective.

        Args:
            matrix: ``DenseMatrix`` or 2-D array.

        Raises:
            RankDeficient: If rows > cols or sigma_min < 1e-10 * sigma_max.
        """
        self.map = matrix if isinstance(matrix, DenseMatrix) else DenseMatrix(matrix)
        rows, cols = self.map.shape
        if rows == 0 or rows > cols:
            raise RankDeficient(f"map of shape {self.map.shape} cannot be surjective")
        singular_values = scipy.linalg.svdvals(self.map.data)
        if singular_values[-1] < SURJECTIVITY_RTOL * singular_values[0]:
            raise RankDeficient(
                f"sigma_min/sigma_max = {singular_values[-1] / singular_values[0]:.3e} "
                f"below {SURJECTIVITY_RTOL:.0e}"
            )
        # rank witness
        self.singular_values = singular_values

    @property
    def data(self) -> np.ndarray:
        return self.map.data

    @property
    def dim_h(self) -> int:
        return self.map.rows

    @property
    def dim_v(self) -> int:
        return self.map.cols

    def adjoint(self) -> np.ndarray:
        """R^* for Euclidean inner products, i.e. R^T."""
        return self.map.data.T

    def apply(self, v) -> np.ndarray:
        return self.map.data @ as_vector(v, self.dim_v)

    def kernel_basis(self) -> np.ndarray:
        """Orthonormal basis of Ker(R), shape (dim V, dim V - dim H)."""
        return kernel_basis(self)

    def __repr__(self) -> str:
        return f"SurjectiveMap(shape={self.map.shape})"


class PseudoInverseOperator:
    """R^dagger (weight None) or R_B^dagger with its source map."""

    def __init__(self, source: SurjectiveMap, dagger: np.ndarray, weight: DenseSymMatrix | None = None):
        if dagger.shape != (source.dim_v, source.dim_h):
            raise DimensionMismatch(
                f"dagger of shape {dagger.shape} does not match map {source.map.shape}"
            )
        self.source = source
        self.weight = weight
        self.dagger = DenseMatrix(dagger)

    def weight_matrix(self) -> np.ndarray:
        """W: the weight, or the identity for the plain pseudo-inverse."""
        if self.weight is None:
            return np.eye(self.source.dim_v)
        return self.weight.data

    def apply(self, y) -> np.ndarray:
        return self.dagger.data @ as_vector(y, self.source.dim_h)

    def weighted_norm_sq(self, x: np.ndarray) -> np.ndarray:
        """||x||_W^2 for a vector or column-wise for a matrix."""
        w = self.weight_matrix()
        return np.einsum("i...,i...->...", x, w @ x)

    def right_inverse_residual(self) -> float:
        """||R dagger - I||_max."""
        product = self.source.data @ self.dagger.data
        return max_abs(product - np.eye(self.source.dim_h))

    def range_orthogonality_residual(self) -> float:
        """||(I - dagger R)^T W dagger||_max: dagger lands W-orthogonally to Ker(R)."""
        complement = np.eye(self.source.dim_v) - self.dagger.data @ self.source.data
        return max_abs(complement.T @ self.weight_matrix() @ self.dagger.data)


def pseudo_inverse(r: SurjectiveMap) -> PseudoInverseOperator:
    """Moore-Penrose pseudo-inverse R^T (R R^T)^-1.

    Raises:
        RankDeficient: If R R^T fails Cholesky.
    """
    gram = DenseSymMatrix(r.data @ r.data.T)
    try:
        # (R R^T)^-1 R, transposed
        dagger = solve_spd(gram, r.data).T
    except NotPositiveDefinite as e:
        raise RankDeficient(f"R R^T is not positive definite (pivot {e.pivot})") from e
    return PseudoInverseOperator(source=r, dagger=dagger)


def schur_complement(r: SurjectiveMap, b: DenseSymMatrix) -> tuple[DenseSymMatrix, np.ndarray]:
    """R B^-1 R^T together with B^-1 R^T.

    Raises:
        DimensionMismatch: If dim(B) != cols(R).
        NotPositiveDefinite: If B is not SPD.
    """
    if b.dim != r.dim_v:
        raise DimensionMismatch(f"weight of dimension {b.dim} does not match dim V = {r.dim_v}")
    b_inv_rt = solve_spd(b, r.adjoint())
    return DenseSymMatrix(r.data @ b_inv_rt), b_inv_rt


def weighted_pseudo_inverse(r: SurjectiveMap, b: DenseSymMatrix) -> PseudoInverseOperator:
    """Weighted pseudo-inverse B^-1 R^T (R B^-1 R^T)^-1.

    For every y the column combination dagger y is the preimage of y with the
    smallest B-norm.

    Raises:
        NotPositiveDefinite: If b is not SPD.
        RankDeficient: If the Schur complement R B^-1 R^T fails Cholesky.
    """
    schur, b_inv_rt = schur_complement(r, b)
    try:
        dagger = solve_spd(schur, b_inv_rt.T).T
    except NotPositiveDefinite as e:
        raise RankDeficient(f"R B^-1 R^T is not positive definite (pivot {e.pivot})") from e
    return PseudoInverseOperator(source=r, dagger=dagger, weight=b)


def projector(p: PseudoInverseOperator) -> np.ndarray:
    """P = dagger R, the W-orthogonal projector onto Ker(R)^perp."""
    return p.dagger.data @ p.source.data


def projector_residuals(p: PseudoInverseOperator) -> tuple[float, float]:
    """(||P P - P||_max, ||W P - P^T W||_max) for P = projector(p)."""
    proj = projector(p)
    w = p.weight_matrix()
    idempotency = max_abs(proj @ proj - proj)
    adjointness = max_abs(w @ proj - proj.T @ w)
    return idempotency, adjointness


def schur_identity_check(r: SurjectiveMap, b: DenseSymMatrix) -> float:
    """||(R B^-1 R^T) (R_B^dagger^T B R_B^dagger) - I||_max.

    The inverse of the additive operator R B^-1 R^T is the weighted Gram matrix
    of the weighted pseudo-inverse; the return value is how far the computed
    product is from the identity.
    """
    schur, _ = schur_complement(r, b)
    p = weighted_pseudo_inverse(r, b)
    gram = p.dagger.data.T @ b.data @ p.dagger.data
    return max_abs(schur.data @ gram - np.eye(r.dim_h))


def kernel_basis(r: SurjectiveMap) -> np.ndarray:
    """Orthonormal basis of Ker(R) from the trailing right singular vectors."""
    return scipy.linalg.null_space(r.data, rcond=SURJECTIVITY_RTOL)


def injectivity_witness(p: PseudoInverseOperator) -> float:
    """Smallest Cholesky pivot of dagger^T dagger; positive proves full column rank.

    Raises:
        NotPositiveDefinite: If dagger is column-rank deficient.
    """
    factor = cholesky(DenseSymMatrix(p.dagger.data.T @ p.dagger.data))
    return float(np.min(np.diag(factor)))


def minimality_gaps(p: PseudoInverseOperator, ys: np.ndarray, ks: np.ndarray) -> np.ndarray:
    """Gaps ||dagger y + k||_W^2 - ||dagger y||_W^2 for all (y, k) column pairs.

    Args:
        p: Pseudo-inverse operator.
        ys: Targets in H as columns, shape (dim H, s).
        ks: Kernel vectors as columns, shape (dim V, t).

    Returns:
        Array of shape (s, t); minimality means every entry is >= 0, and by
        Pythagoras entry (i, j) equals ||k_j||_W^2.
    """
    w = p.weight_matrix()
    xs = p.dagger.data @ ys
    cross = xs.T @ w @ ks
    k_norms = np.einsum("ij,ij->j", ks, w @ ks)
    return 2.0 * cross + k_norms[np.newaxis, :]
