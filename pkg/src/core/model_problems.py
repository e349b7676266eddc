"""Finite-difference Laplacians and overlapping strip decompositions.

Stencils are unscaled (no 1/h^2), Dirichlet boundary conditions, lexicographic
(row-major) ordering in 2D.
"""

import numpy as np
import scipy.sparse

from .exceptions import InvalidSpec
from .linalg import DenseSymMatrix
from .models import Decomposition, ProblemSpec


def _laplace1d(n: int) -> scipy.sparse.spmatrix:
    return scipy.sparse.diags([-np.ones(n - 1), 2.0 * np.ones(n), -np.ones(n - 1)], [-1, 0, 1], shape=(n, n))


def laplacian(spec: ProblemSpec) -> DenseSymMatrix:
    """tridiag(-1, 2, -1) of size n, or the 5-point stencil of size n^2."""
    t = _laplace1d(spec.n)
    if spec.kind == "laplace1d":
        return DenseSymMatrix(t.toarray())
    eye = scipy.sparse.identity(spec.n)
    return DenseSymMatrix((scipy.sparse.kron(eye, t) + scipy.sparse.kron(t, eye)).toarray())


def strip_rows(n: int, subdomains: int, overlap: int) -> list[list[int]]:
    """Zero-based grid lines of each overlapping strip.

    The n interior nodes sit at 1..n on a mesh of n + 1 cells. Strip i is the
    open interval (x_i - overlap, x_{i+1} + overlap) with x_i = i (n + 1) / N,
    clamped to the interior. Comparisons are done in integers (scaled by N).
    """
    cells = n + 1
    strips = []
    for i in range(subdomains):
        lo = i * cells - overlap * subdomains
        hi = (i + 1) * cells + overlap * subdomains
        strips.append([j - 1 for j in range(1, n + 1) if lo < j * subdomains < hi])
    return strips


def strip_decomposition(spec: ProblemSpec) -> Decomposition:
    """N strips (1D intervals or 2D row bands) extended by ``overlap`` cells.

    Raises:
        InvalidSpec: If a strip ends up empty or the strips miss an index.
    """
    rows = strip_rows(spec.n, spec.subdomains, spec.overlap)
    if any(not strip for strip in rows):
        raise InvalidSpec(f"{spec.describe()}: a strip is empty")
    covered = set().union(*rows)
    if len(covered) != spec.n:
        missing = min(set(range(spec.n)) - covered)
        raise InvalidSpec(f"{spec.describe()}: grid line {missing} is not covered")

    if spec.kind == "laplace1d":
        subsets = rows
    else:
        subsets = [[row * spec.n + col for row in strip for col in range(spec.n)] for strip in rows]
    return Decomposition(global_dim=spec.global_dim, subdomains=subsets)
