"""Spectral certificates for the preconditioned operator R B^-1 R^T A.

The optimal constants c-, c+ with

    c- (u, u)_A <= (R B^-1 R^T A u, u)_A <= c+ (u, u)_A

are computed by three numerically distinct routes that must agree:

* pencil (A, S) with S = R_B^dagger^T B R_B^dagger, i.e. the bounds written
  through the weighted pseudo-inverse;
* L^T M^-1 L with A = L L^T, the preconditioned operator in the A-inner product;
* pencil (S M^-1 A, S), the preconditioned operator in the S-inner product.

Because S = (R B^-1 R^T)^-1, M^-1 A is self-adjoint for both (., .)_A and
(., .)_S and the three spectra coincide.
"""

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from functools import cached_property

import numpy as np
import scipy.linalg

from .exceptions import CertificationFailed, DimensionMismatch, NotSelfAdjoint
from .linalg import (
    DenseMatrix,
    DenseSymMatrix,
    EigenDecomposition,
    as_vector,
    condition_estimate,
    eigen_residual,
    gen_sym_eig,
    max_abs,
    spectral_norm,
    sym_eig,
)
from .models import SpectralCertificate
from .pseudoinverse import PseudoInverseOperator, SurjectiveMap, schur_complement, weighted_pseudo_inverse
from .sampling import (
    DEFAULT_SEED,
    STREAM_CONDITION_I,
    STREAM_CONDITION_II,
    STREAM_MINIMAX,
    chunk_sizes,
    gaussian_columns,
)
from .schwarz import SchwarzOperators

logger = logging.getLogger(__name__)

ROUTE_AGREEMENT_RTOL = 1e-8
DEGRADED_AGREEMENT_RTOL = 1e-6
# Above this kappa the route tolerance is degraded
ILL_CONDITIONED_KAPPA = 1e6
INVERSE_IDENTITY_TOL = 1e-8
SELF_ADJOINT_TOL = 1e-9
WITNESS_RTOL = 1e-8

ROUTE_PENCIL = "pencil"
ROUTE_OPERATOR = "preconditioned_operator"
ROUTE_S_PRODUCT = "s_inner_product"


class OperatorTriple:
    """(R, A, B): surjective R: V -> H, SPD A on H, SPD B on V."""

    def __init__(self, r: SurjectiveMap, a: DenseSymMatrix, b: DenseSymMatrix):
        """Check dimensions and positive definiteness.

        Raises:
            DimensionMismatch: If rows(R) != dim(A) or cols(R) != dim(B).
            NotPositiveDefinite: If A or B is not SPD.
        """
        if r.dim_h != a.dim or r.dim_v != b.dim:
            raise DimensionMismatch(
                f"R is {r.dim_h}x{r.dim_v} but dim(A)={a.dim}, dim(B)={b.dim}"
            )
        a.cholesky_factor
        b.cholesky_factor
        self.r = r
        self.a = a
        self.b = b

    @classmethod
    def from_schwarz(cls, ops: SchwarzOperators) -> "OperatorTriple":
        return cls(ops.r_map, ops.a, ops.b)

    @cached_property
    def pseudo(self) -> PseudoInverseOperator:
        """R_B^dagger."""
        return weighted_pseudo_inverse(self.r, self.b)

    @cached_property
    def m_inv(self) -> DenseSymMatrix:
        """R B^-1 R^T, formed without the pseudo-inverse."""
        schur, _ = schur_complement(self.r, self.b)
        return schur

    @cached_property
    def s(self) -> DenseSymMatrix:
        return build_s(self)

    def scaled(self, a_factor: float = 1.0, b_factor: float = 1.0) -> "OperatorTriple":
        return OperatorTriple(self.r, self.a.scaled(a_factor), self.b.scaled(b_factor))


def build_s(t: OperatorTriple) -> DenseSymMatrix:
    """S = R_B^dagger^T B R_B^dagger, cross-checked as the inverse of R B^-1 R^T.

    Raises:
        CertificationFailed: If S (R B^-1 R^T) differs from I beyond tolerance.
    """
    dagger = t.pseudo.dagger.data
    gram = dagger.T @ t.b.data @ dagger
    s = DenseSymMatrix(0.5 * (gram + gram.T))
    residual = inverse_identity_residual(s, t.m_inv)
    scale = max(1.0, s.max_norm() * t.m_inv.max_norm(), condition_estimate(t.b))
    if residual > INVERSE_IDENTITY_TOL * scale:
        raise CertificationFailed(f"S (R B^-1 R^T) - I = {residual:.3e} exceeds {INVERSE_IDENTITY_TOL * scale:.3e}")
    return s


def inverse_identity_residual(s: DenseSymMatrix, m_inv: DenseSymMatrix) -> float:
    """||S M^-1 - I||_max."""
    return max_abs(s.data @ m_inv.data - np.eye(s.dim))


def _certificate(route: str, eig: EigenDecomposition, residual_minus: float, residual_plus: float) -> SpectralCertificate:
    if eig.values[0] <= 0:
        raise CertificationFailed(f"{route}: smallest eigenvalue {eig.values[0]!r} is not positive")
    witness_minus = eig.vectors[:, 0] / np.linalg.norm(eig.vectors[:, 0])
    witness_plus = eig.vectors[:, -1] / np.linalg.norm(eig.vectors[:, -1])
    return SpectralCertificate(
        c_minus=float(eig.values[0]),
        c_plus=float(eig.values[-1]),
        route=route,
        route_residuals={"witness_minus": residual_minus, "witness_plus": residual_plus},
        witness_minus=witness_minus.tolist(),
        witness_plus=witness_plus.tolist(),
    )


def certify_via_pencil(t: OperatorTriple) -> SpectralCertificate:
    """Extreme eigenvalues of A u = lambda S u.

    These are the best constants in
    c- ||R_B^dagger u||_B^2 <= (u, u)_A <= c+ ||R_B^dagger u||_B^2.
    """
    s = t.s
    eig = gen_sym_eig(t.a, s)
    cert = _certificate(
        ROUTE_PENCIL,
        eig,
        eigen_residual(t.a, s, eig.values[0], eig.vectors[:, 0]),
        eigen_residual(t.a, s, eig.values[-1], eig.vectors[:, -1]),
    )
    logger.info("[Certify] pencil route: c-=%.6g c+=%.6g", cert.c_minus, cert.c_plus)
    return cert


def certify_via_preconditioned_operator(t: OperatorTriple) -> SpectralCertificate:
    """Extreme eigenvalues of M^-1 A from the similar symmetric matrix L^T M^-1 L.

    With A = L L^T, an eigenvector y of L^T M^-1 L gives the eigenvector
    x = L^-T y of M^-1 A.
    """
    lower = t.a.cholesky_factor
    reduced = DenseSymMatrix(_symmetrized(lower.T @ t.m_inv.data @ lower))
    eig = sym_eig(reduced)
    witnesses = scipy.linalg.solve_triangular(lower.T, eig.vectors, lower=False)
    cert = _certificate(
        ROUTE_OPERATOR,
        EigenDecomposition(values=eig.values, vectors=witnesses),
        eigen_residual(reduced, None, eig.values[0], eig.vectors[:, 0]),
        eigen_residual(reduced, None, eig.values[-1], eig.vectors[:, -1]),
    )
    logger.info("[Certify] operator route: c-=%.6g c+=%.6g", cert.c_minus, cert.c_plus)
    return cert


def certify_via_s_inner_product(t: OperatorTriple) -> SpectralCertificate:
    """Extreme eigenvalues of M^-1 A through its S-self-adjoint form (S M^-1 A, S).

    Raises:
        NotSelfAdjoint: If S M^-1 A is not symmetric to tolerance.
    """
    s = t.s
    s_t = s.data @ t.m_inv.data @ t.a.data
    _self_adjointness_gate(s_t, "S M^-1 A")
    st = DenseSymMatrix(_symmetrized(s_t))
    eig = gen_sym_eig(st, s)
    cert = _certificate(
        ROUTE_S_PRODUCT,
        eig,
        eigen_residual(st, s, eig.values[0], eig.vectors[:, 0]),
        eigen_residual(st, s, eig.values[-1], eig.vectors[:, -1]),
    )
    logger.info("[Certify] S-product route: c-=%.6g c+=%.6g", cert.c_minus, cert.c_plus)
    return cert


def _symmetrized(m: np.ndarray) -> np.ndarray:
    return 0.5 * (m + m.T)


def _self_adjointness_gate(wm: np.ndarray, what: str) -> None:
    asym = max_abs(wm - wm.T)
    scale = max(1.0, max_abs(wm))
    if asym > SELF_ADJOINT_TOL * scale:
        raise NotSelfAdjoint(f"{what} has asymmetry {asym:.3e} (scale {scale:.3e})")


def _relative_gap(x: float, y: float) -> float:
    return abs(x - y) / max(abs(x), abs(y))


ROUTES = {
    ROUTE_PENCIL: certify_via_pencil,
    ROUTE_OPERATOR: certify_via_preconditioned_operator,
    ROUTE_S_PRODUCT: certify_via_s_inner_product,
}


def certify_triple(
    t: OperatorTriple,
    seed: int = DEFAULT_SEED,
    workers: int = 1,
    instance_hash: str | None = None,
) -> SpectralCertificate:
    """Run every route and combine them into one certificate.

    The pencil route supplies the constants and witnesses; the others are
    compared against it. The agreement tolerance is 1e-8 relative, degraded to
    1e-6 when kappa > 1e6. Both witnesses must solve A x = lambda S x to a
    relative residual of 1e-8.

    Args:
        t: The operator triple.
        seed: Sampling seed recorded in the certificate.
        workers: Threads for running the routes concurrently.
        instance_hash: Optional description hash recorded in the certificate.

    Returns:
        Combined certificate with per-route residuals.

    Raises:
        CertificationFailed: If routes disagree or a witness misses its
            residual bound; the certificate is attached.
    """
    # S and M^-1 are shared by the routes; build them before fanning out
    t.s
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            futures = {name: pool.submit(route, t) for name, route in ROUTES.items()}
            results = {name: future.result() for name, future in futures.items()}
    else:
        results = {name: route(t) for name, route in ROUTES.items()}

    primary = results[ROUTE_PENCIL]
    residuals = {
        "inverse_identity": inverse_identity_residual(t.s, t.m_inv),
        "witness_minus": eigen_residual(t.a, t.s, primary.c_minus, np.asarray(primary.witness_minus)),
        "witness_plus": eigen_residual(t.a, t.s, primary.c_plus, np.asarray(primary.witness_plus)),
    }
    for name in (ROUTE_OPERATOR, ROUTE_S_PRODUCT):
        other = results[name]
        residuals[f"pencil_vs_{name}"] = max(
            _relative_gap(primary.c_minus, other.c_minus),
            _relative_gap(primary.c_plus, other.c_plus),
        )

    tolerance = ROUTE_AGREEMENT_RTOL
    if primary.kappa > ILL_CONDITIONED_KAPPA:
        tolerance = DEGRADED_AGREEMENT_RTOL
        logger.warning("[Certify] kappa=%.3e > %.0e, route tolerance degraded to %.0e",
                       primary.kappa, ILL_CONDITIONED_KAPPA, tolerance)

    cert = SpectralCertificate(
        c_minus=primary.c_minus,
        c_plus=primary.c_plus,
        route="+".join(ROUTES),
        route_residuals=residuals,
        witness_minus=primary.witness_minus,
        witness_plus=primary.witness_plus,
        tolerance=tolerance,
        seed=seed,
        instance_hash=instance_hash,
    )
    worst = max(residuals[f"pencil_vs_{name}"] for name in (ROUTE_OPERATOR, ROUTE_S_PRODUCT))
    if worst > tolerance:
        raise CertificationFailed(
            f"certification routes disagree by {worst:.3e} (tolerance {tolerance:.0e})", cert
        )
    witness_residual = max(residuals["witness_minus"], residuals["witness_plus"])
    if witness_residual > WITNESS_RTOL:
        raise CertificationFailed(
            f"eigen-witness residual {witness_residual:.3e} exceeds {WITNESS_RTOL:.0e}", cert
        )
    logger.info("[Certify] c-=%.17g c+=%.17g kappa=%.6g", cert.c_minus, cert.c_plus, cert.kappa)
    return cert


def stable_decomposition_ratio(t: OperatorTriple, u) -> float:
    """(u, u)_A / ||R_B^dagger u||_B^2, bounded below by c-."""
    u = as_vector(u, t.a.dim)
    v = t.pseudo.dagger.data @ u
    return float(u @ t.a.data @ u) / float(v @ t.b.data @ v)


def boundedness_ratio(t: OperatorTriple, v) -> float:
    """(R v, R v)_A / (v, v)_B, bounded above by c+."""
    v = as_vector(v, t.b.dim)
    rv = t.r.data @ v
    return float(rv @ t.a.data @ rv) / float(v @ t.b.data @ v)


def _column_quadratic(m: np.ndarray, x: np.ndarray) -> np.ndarray:
    return np.einsum("ij,ij->j", x, m @ x)


def _sampled_max(samples: int, seed: int, stream_id: int, workers: int, chunk_fn) -> float:
    sizes = chunk_sizes(samples)
    if not sizes:
        return -np.inf
    jobs = [(chunk, size) for chunk, size in enumerate(sizes)]
    if workers > 1 and len(jobs) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            maxima = list(pool.map(lambda job: chunk_fn(seed, stream_id, *job), jobs))
    else:
        maxima = [chunk_fn(seed, stream_id, *job) for job in jobs]
    return float(max(maxima))


def verify_condition_i(
    t: OperatorTriple,
    cert: SpectralCertificate,
    samples: int = 1000,
    seed: int = DEFAULT_SEED,
    workers: int = 1,
) -> float:
    """Largest relative violation of c- ||R_B^dagger u||_B^2 <= (u, u)_A.

    The stable decomposition of u is v = R_B^dagger u. Returns
    max (c- ||v||_B^2 - (u, u)_A) / (u, u)_A over random u; <= 0 means no
    violation.
    """
    a, b, dagger = t.a.data, t.b.data, t.pseudo.dagger.data

    def chunk_max(seed_: int, stream_id: int, chunk: int, size: int) -> float:
        u = gaussian_columns(seed_, stream_id, chunk, t.a.dim, size)
        v = dagger @ u
        energy = _column_quadratic(a, u)
        return float(np.max((cert.c_minus * _column_quadratic(b, v) - energy) / energy))

    return _sampled_max(samples, seed, STREAM_CONDITION_I, workers, chunk_max)


def verify_condition_ii(
    t: OperatorTriple,
    cert: SpectralCertificate,
    samples: int = 1000,
    seed: int = DEFAULT_SEED,
    workers: int = 1,
) -> float:
    """Largest relative violation of (R v, R v)_A <= c+ (v, v)_B over random v in V."""
    a, b, r = t.a.data, t.b.data, t.r.data

    def chunk_max(seed_: int, stream_id: int, chunk: int, size: int) -> float:
        v = gaussian_columns(seed_, stream_id, chunk, t.b.dim, size)
        b_norms = _column_quadratic(b, v)
        return float(np.max((_column_quadratic(a, r @ v) - cert.c_plus * b_norms) / b_norms))

    return _sampled_max(samples, seed, STREAM_CONDITION_II, workers, chunk_max)


@dataclass(frozen=True)
class MinimaxResult:
    """Sampled Rayleigh-quotient range against the exact extreme eigenvalues."""

    rayleigh_min: float
    rayleigh_max: float
    lambda_min: float
    lambda_max: float
    witness_error: float
    epsilon: float

    @property
    def within_bounds(self) -> bool:
        return (
            self.rayleigh_min >= self.lambda_min - self.epsilon
            and self.rayleigh_max <= self.lambda_max + self.epsilon
        )


def minimax_check(
    m,
    w: DenseSymMatrix,
    samples: int = 1000,
    seed: int = DEFAULT_SEED,
) -> MinimaxResult:
    """Compare Rayleigh quotients (W M x, x) / (W x, x) with the spectrum of M.

    M need not be symmetric; it must be self-adjoint for (., .)_W, i.e. W M
    symmetric. The extreme eigenvalues are those of the pencil (W M, W); every
    sampled quotient must lie between them and the quotients at the extreme
    eigenvectors must reproduce them.

    Raises:
        NotSelfAdjoint: If W M is not symmetric to 1e-9.
        DimensionMismatch: If shapes differ.
    """
    m = m.data if isinstance(m, DenseMatrix) else np.asarray(m, dtype=float)
    if m.shape != (w.dim, w.dim):
        raise DimensionMismatch(f"operator of shape {m.shape} for an inner product of dimension {w.dim}")
    wm = w.data @ m
    _self_adjointness_gate(wm, "W M")
    wm_sym = DenseSymMatrix(_symmetrized(wm))
    eig = gen_sym_eig(wm_sym, w)
    lam_min, lam_max = float(eig.values[0]), float(eig.values[-1])

    def quotients(x: np.ndarray) -> np.ndarray:
        return _column_quadratic(wm_sym.data, x) / _column_quadratic(w.data, x)

    lows, highs = [], []
    for chunk, size in enumerate(chunk_sizes(samples)):
        q = quotients(gaussian_columns(seed, STREAM_MINIMAX, chunk, w.dim, size))
        lows.append(q.min())
        highs.append(q.max())

    at_witnesses = quotients(eig.vectors[:, [0, -1]])
    witness_error = max(abs(at_witnesses[0] - lam_min), abs(at_witnesses[1] - lam_max))
    return MinimaxResult(
        rayleigh_min=float(min(lows)) if lows else lam_min,
        rayleigh_max=float(max(highs)) if highs else lam_max,
        lambda_min=lam_min,
        lambda_max=lam_max,
        witness_error=float(witness_error),
        epsilon=1e-9 * spectral_norm(m),
    )


def preconditioned_operator(t: OperatorTriple) -> np.ndarray:
    """M^-1 A as a dense (non-symmetric) matrix."""
    return t.m_inv.data @ t.a.data
