"""One-level additive Schwarz operators in product-space form.

For a decomposition with extension maps E_i the product space is
V = V_1 x ... x V_N, the map R(v_1, ..., v_N) = sum_i E_i v_i, B is block
diagonal with B_i = E_i^T A E_i (or its diagonal), and the preconditioner is

    M^-1 = R B^-1 R^T = sum_i E_i B_i^-1 E_i^T.
"""

import dataclasses
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Literal

import numpy as np
import scipy.linalg

from .exceptions import DimensionMismatch, InvalidMatrix, NotCovering, NotPositiveDefinite
from .linalg import DenseSymMatrix, as_vector, cholesky, max_abs, solve_spd
from .models import Decomposition
from .pseudoinverse import SurjectiveMap

logger = logging.getLogger(__name__)

LocalSolver = Literal["exact", "jacobi"]

# Entrywise agreement of the scatter-add and R B^-1 R^T assemblies
ASSEMBLY_ATOL = 1e-10


class ProductVector:
    """An element (v_1, ..., v_N) of the product space V."""

    def __init__(self, decomposition: Decomposition, blocks: list):
        if len(blocks) != decomposition.count:
            raise DimensionMismatch(f"{len(blocks)} blocks for {decomposition.count} subdomains")
        self.decomposition = decomposition
        self.blocks = [as_vector(b, size) for b, size in zip(blocks, decomposition.sizes)]

    @classmethod
    def from_flat(cls, decomposition: Decomposition, flat) -> "ProductVector":
        v = as_vector(flat, decomposition.product_dim)
        offsets = decomposition.offsets()
        return cls(decomposition, [v[lo:hi] for lo, hi in zip(offsets, offsets[1:])])

    @classmethod
    def restrict(cls, decomposition: Decomposition, u) -> "ProductVector":
        """(E_1^T u, ..., E_N^T u)."""
        u = as_vector(u, decomposition.global_dim)
        return cls(decomposition, [u[subset] for subset in decomposition.subdomains])

    def flat(self) -> np.ndarray:
        return np.concatenate(self.blocks)

    def extend(self) -> np.ndarray:
        """R v = sum_i E_i v_i, summed in subdomain order."""
        out = np.zeros(self.decomposition.global_dim)
        for subset, block in zip(self.decomposition.subdomains, self.blocks):
            out[subset] += block
        return out


@dataclass(frozen=True)
class SchwarzOperators:
    """The fictitious-space triple (R, A, B) of an ASM plus the assembled M^-1."""

    decomposition: Decomposition
    r_map: SurjectiveMap
    a: DenseSymMatrix
    b: DenseSymMatrix
    local_solver: LocalSolver = "exact"
    block_factors: list[np.ndarray] = field(default_factory=list, repr=False)
    m_inv: DenseSymMatrix | None = None

    def as_preconditioner(self, workers: int = 1):
        """Callable r -> M^-1 r for the solver."""
        return lambda residual: apply_preconditioner(self, residual, workers=workers)


def build_r_map(d: Decomposition) -> SurjectiveMap:
    """The 0/1 matrix of R: V -> H, one column per (subdomain, local index).

    Raises:
        NotCovering: With the first global index no subdomain contains.
    """
    missing = d.missing_indices()
    if missing:
        raise NotCovering(missing[0])
    matrix = np.zeros((d.global_dim, d.product_dim))
    column = 0
    for subset in d.subdomains:
        for j in subset:
            matrix[j, column] = 1.0
            column += 1
    return SurjectiveMap(matrix)


def local_blocks(d: Decomposition, a: DenseSymMatrix, local_solver: LocalSolver = "exact") -> list[np.ndarray]:
    """B_i = E_i^T A E_i, or its diagonal for subdomain Jacobi."""
    if a.dim != d.global_dim:
        raise DimensionMismatch(f"matrix of dimension {a.dim} for a decomposition of {d.global_dim}")
    blocks = []
    for subset in d.subdomains:
        block = a.data[np.ix_(subset, subset)]
        if local_solver == "jacobi":
            block = np.diag(np.diag(block))
        elif local_solver != "exact":
            raise InvalidMatrix(f"unknown local solver {local_solver!r}")
        blocks.append(block)
    return blocks


def build_block_b(d: Decomposition, a: DenseSymMatrix, local_solver: LocalSolver = "exact") -> DenseSymMatrix:
    """Block-diagonal B on the product space, stored dense."""
    return DenseSymMatrix(scipy.linalg.block_diag(*local_blocks(d, a, local_solver)))


def _factor_blocks(blocks: list[np.ndarray]) -> list[np.ndarray]:
    factors = []
    for i, block in enumerate(blocks):
        try:
            factors.append(cholesky(block))
        except NotPositiveDefinite as e:
            raise NotPositiveDefinite(e.pivot, what=f"subdomain block {i}") from e
    return factors


def build_schwarz_operators(
    d: Decomposition,
    a: DenseSymMatrix,
    local_solver: LocalSolver = "exact",
) -> SchwarzOperators:
    """Build R, B, the block factors, and the assembled preconditioner.

    Raises:
        NotCovering: If the decomposition leaves an index uncovered.
        NotPositiveDefinite: If a subdomain block is singular or indefinite.
    """
    r_map = build_r_map(d)
    blocks = local_blocks(d, a, local_solver)
    ops = SchwarzOperators(
        decomposition=d,
        r_map=r_map,
        a=a,
        b=DenseSymMatrix(scipy.linalg.block_diag(*blocks)),
        local_solver=local_solver,
        block_factors=_factor_blocks(blocks),
    )
    ops = dataclasses.replace(ops, m_inv=assemble_preconditioner(ops))
    logger.info(
        "[Schwarz] %d subdomains, dim H=%d, dim V=%d, local solver=%s",
        d.count, d.global_dim, d.product_dim, local_solver,
    )
    return ops


def assemble_preconditioner(ops: SchwarzOperators) -> DenseSymMatrix:
    """M^-1 assembled by scatter-add and by R B^-1 R^T; the two must agree.

    Raises:
        NotPositiveDefinite: If a block or the assembled operator is not SPD.
        InvalidMatrix: If the two assembly routes disagree.
    """
    d = ops.decomposition
    factors = ops.block_factors or _factor_blocks(local_blocks(d, ops.a, ops.local_solver))

    scattered = np.zeros((d.global_dim, d.global_dim))
    for subset, factor in zip(d.subdomains, factors):
        local_inverse = scipy.linalg.cho_solve((factor, True), np.eye(len(subset)))
        scattered[np.ix_(subset, subset)] += local_inverse

    r = ops.r_map.data
    product = r @ solve_spd(ops.b, r.T)

    scale = max(1.0, max_abs(scattered))
    disagreement = max_abs(scattered - product)
    if disagreement > ASSEMBLY_ATOL * scale:
        raise InvalidMatrix(
            f"scatter-add and R B^-1 R^T assemblies differ by {disagreement:.3e}"
        )

    m_inv = DenseSymMatrix(0.5 * (scattered + scattered.T))
    try:
        m_inv.cholesky_factor
    except NotPositiveDefinite as e:
        raise NotPositiveDefinite(e.pivot, what="assembled preconditioner") from e
    logger.debug("[Schwarz] assembly routes agree to %.3e", disagreement)
    return m_inv


def apply_preconditioner(ops: SchwarzOperators, residual, workers: int = 1) -> np.ndarray:
    """M^-1 r without forming M^-1: restrict, block-solve, scatter-add.

    Block solves may run on a thread pool; contributions are always summed in
    subdomain order.

    Raises:
        DimensionMismatch: If the residual has the wrong length.
    """
    d = ops.decomposition
    r = as_vector(residual, d.global_dim)
    factors = ops.block_factors

    def local_solve(i: int) -> np.ndarray:
        return scipy.linalg.cho_solve((factors[i], True), r[d.subdomains[i]])

    if workers > 1 and d.count > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            corrections = list(pool.map(local_solve, range(d.count)))
    else:
        corrections = [local_solve(i) for i in range(d.count)]

    out = np.zeros(d.global_dim)
    for subset, correction in zip(d.subdomains, corrections):
        out[subset] += correction
    return out
