"""Custom exceptions for FSLCert."""


class FictitiousSpaceError(Exception):
    """Base exception for all FSLCert errors."""

    pass


class LinearAlgebraError(FictitiousSpaceError):
    """Raised when a dense linear algebra operation cannot proceed."""

    pass


class NotPositiveDefinite(LinearAlgebraError):
    """Raised when a Cholesky factorization meets a non-positive pivot."""

    def __init__(self, pivot: int, what: str = "matrix"):
        self.pivot = pivot
        super().__init__(f"NotPositiveDefinite({pivot}): {what} has a non-positive pivot at index {pivot}")


class DimensionMismatch(LinearAlgebraError):
    """Raised when operand shapes are inconsistent."""

    pass


class ConvergenceFailure(LinearAlgebraError):
    """Raised when the symmetric eigensolver does not converge."""

    def __init__(self, max_iterations: int):
        self.max_iterations = max_iterations
        super().__init__(f"ConvergenceFailure: eigensolver did not converge within {max_iterations} sweeps")


class NotSymmetric(LinearAlgebraError):
    """Raised when a matrix declared symmetric is not, up to tolerance."""

    pass


class InvalidMatrix(LinearAlgebraError):
    """Raised when matrix entries are malformed or non-finite."""

    pass


class RankDeficient(LinearAlgebraError):
    """Raised when a map expected to be surjective is numerically rank deficient."""

    pass


class NotSelfAdjoint(LinearAlgebraError):
    """Raised when an operator fails the self-adjointness gate."""

    pass


class DecompositionError(FictitiousSpaceError):
    """Raised when a subdomain decomposition is unusable."""

    pass


class NotCovering(DecompositionError):
    """Raised when the subdomains do not cover every global index."""

    def __init__(self, missing: int):
        self.missing = missing
        super().__init__(f"NotCovering({missing}): global index {missing} belongs to no subdomain")


class InvalidDecomposition(DecompositionError):
    """Raised when a subdomain index set is empty, unsorted, duplicated or out of range."""

    pass


class InvalidSpec(FictitiousSpaceError):
    """Raised when a model problem specification is inconsistent."""

    pass


class SolverError(FictitiousSpaceError):
    """Raised when the iterative solver fails."""

    pass


class MaxIterationsExceeded(SolverError):
    """Raised when PCG stops at max_iter; carries the best iterate and its report."""

    def __init__(self, solution, report):
        self.solution = solution
        self.report = report
        super().__init__(f"MaxIterationsExceeded: no convergence after {report.iterations} iterations")


class BreakdownDetected(SolverError):
    """Raised when p^T A p <= 0, which signals a non-SPD operator."""

    def __init__(self, iteration: int, curvature: float):
        self.iteration = iteration
        self.curvature = curvature
        super().__init__(
            f"BreakdownDetected: p^T A p = {curvature:.3e} at iteration {iteration} (operator not SPD)"
        )


class IterationBoundExceeded(SolverError):
    """Raised when PCG needed more iterations than the certificate predicts."""

    pass


class CertificationFailed(FictitiousSpaceError):
    """Raised when certification routes disagree; carries the certificate."""

    def __init__(self, message: str, certificate=None):
        self.certificate = certificate
        super().__init__(message)


class StorageError(FictitiousSpaceError):
    """Raised when reading or writing instance files fails."""

    pass


class ConfigError(FictitiousSpaceError):
    """Raised when the run configuration is invalid."""

    pass
