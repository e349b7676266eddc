"""Preconditioned conjugate gradient.

Zero initial guess, no restarts. Convergence is tested on the preconditioned
residual sqrt(r^T M^-1 r) relative to its initial value and then confirmed on
the true residual ||b - A x|| / ||b||.
"""

import logging
import math
from typing import Callable

import numpy as np

from .exceptions import BreakdownDetected, DimensionMismatch, MaxIterationsExceeded, SolverError
from .linalg import DenseMatrix, DenseSymMatrix, as_vector
from .models import SolveReport

logger = logging.getLogger(__name__)

Preconditioner = Callable[[np.ndarray], np.ndarray]


def iteration_bound(kappa: float, tol: float) -> int:
    """ceil(sqrt(kappa) / 2 * ln(2 / tol)), the classical CG iteration bound."""
    return math.ceil(math.sqrt(kappa) / 2.0 * math.log(2.0 / tol))


def _as_preconditioner(m_inv) -> Preconditioner:
    if m_inv is None:
        return lambda r: r.copy()
    if isinstance(m_inv, DenseMatrix):
        matrix = m_inv.data
        return lambda r: matrix @ r
    return m_inv


def pcg(
    a: DenseSymMatrix,
    m_inv: Preconditioner | DenseMatrix | None,
    rhs,
    tol: float = 1e-8,
    max_iter: int | None = None,
    kappa: float | None = None,
    exact_solution=None,
) -> tuple[np.ndarray, SolveReport]:
    """Solve A x = rhs with preconditioner M^-1.

    Args:
        a: SPD system matrix.
        m_inv: Callable r -> M^-1 r, an explicit matrix, or None for plain CG.
        rhs: Right-hand side.
        tol: Relative tolerance in (0, 1).
        max_iter: Iteration cap; defaults to dim(A) + 5.
        kappa: Certificate condition number; fills ``iteration_bound``.
        exact_solution: If given, ||x_k - x*||_A is recorded every iteration.

    Returns:
        Tuple of (solution, report).

    Raises:
        BreakdownDetected: If p^T A p <= 0.
        MaxIterationsExceeded: Carrying the last iterate and its report.
    """
    if not 0.0 < tol < 1.0:
        raise SolverError(f"tol must lie in (0, 1), got {tol}")
    b = as_vector(rhs, a.dim)
    apply_m = _as_preconditioner(m_inv)
    if max_iter is None:
        max_iter = a.dim + 5
    matrix = a.data

    report = SolveReport(
        tol=tol,
        kappa_used=kappa,
        iteration_bound=iteration_bound(kappa, tol) if kappa is not None else None,
    )
    x_star = None if exact_solution is None else as_vector(exact_solution, a.dim)

    def energy_error(x: np.ndarray) -> float:
        e = x - x_star
        return math.sqrt(max(float(e @ matrix @ e), 0.0))

    x = np.zeros(a.dim)
    b_norm = float(np.linalg.norm(b))
    report.residual_history.append(1.0 if b_norm > 0 else 0.0)
    if x_star is not None:
        report.energy_error_history = [energy_error(x)]
    if b_norm == 0.0:
        report.converged = True
        report.true_residual = 0.0
        return x, report

    r = b.copy()
    z = apply_m(r)
    if z.shape != r.shape:
        raise DimensionMismatch(f"preconditioner returned shape {z.shape} for {r.shape}")
    rz = float(r @ z)
    rz0 = rz
    p = z.copy()

    for k in range(1, max_iter + 1):
        ap = matrix @ p
        curvature = float(p @ ap)
        if curvature <= 0.0:
            raise BreakdownDetected(k, curvature)
        alpha = rz / curvature
        x += alpha * p
        r -= alpha * ap
        report.iterations = k
        report.residual_history.append(float(np.linalg.norm(r)) / b_norm)
        if x_star is not None:
            report.energy_error_history.append(energy_error(x))

        z = apply_m(r)
        rz_next = float(r @ z)
        if math.sqrt(max(rz_next, 0.0) / rz0) <= tol:
            true_residual = float(np.linalg.norm(b - matrix @ x)) / b_norm
            if true_residual <= tol:
                report.converged = True
                report.true_residual = true_residual
                report.residual_history[-1] = true_residual
                logger.info("[PCG] converged in %d iterations (true residual %.3e)", k, true_residual)
                return x, report
        beta = rz_next / rz
        rz = rz_next
        p = z + beta * p

    report.true_residual = float(np.linalg.norm(b - matrix @ x)) / b_norm
    logger.warning("[PCG] no convergence after %d iterations", report.iterations)
    raise MaxIterationsExceeded(x, report)
