"""Property suite run by ``verify``.

Each instance is a triple (R, A, B); every property yields a residual per
instance that is compared with a fixed tolerance. Random instances come from
counter-based streams so the summary depends only on the seed.
"""

import logging
from dataclasses import dataclass

import numpy as np

from .certify import (
    OperatorTriple,
    boundedness_ratio,
    certify_triple,
    minimax_check,
    preconditioned_operator,
    stable_decomposition_ratio,
    verify_condition_i,
    verify_condition_ii,
)
from .exceptions import CertificationFailed, FictitiousSpaceError
from .linalg import DenseSymMatrix
from .model_problems import laplacian, strip_decomposition
from .models import ProblemSpec, PropertyResult, SpectralCertificate, SuiteSummary
from .pseudoinverse import (
    SurjectiveMap,
    injectivity_witness,
    kernel_basis,
    minimality_gaps,
    projector_residuals,
    pseudo_inverse,
)
from .sampling import DEFAULT_SEED, STREAM_INSTANCES, STREAM_MINIMALITY, gaussian_columns, stream
from .schwarz import build_schwarz_operators

logger = logging.getLogger(__name__)

MAX_DIM_H = 20
MIN_DIM_V = 20
MAX_DIM_V = 40
MINIMALITY_SAMPLES = 50

# name -> (tolerance, description)
PROPERTIES: dict[str, tuple[float, str]] = {
    "right_inverse": (1e-9, "R R^dagger = I for plain and weighted pseudo-inverses"),
    "injectivity": (0.0, "dagger has full column rank (Cholesky of dagger^T dagger)"),
    "minimal_norm": (1e-9, "dagger y is W-orthogonal to Ker(R); kernel perturbations strictly grow the norm"),
    "orthogonal_projector": (1e-9, "R^dagger R is idempotent and symmetric"),
    "weighted_adjointness": (1e-9, "R_B^dagger R is idempotent and B-self-adjoint"),
    "inverse_identity": (1e-8, "(R B^-1 R^T)(R_B^dagger^T B R_B^dagger) = I"),
    "rayleigh_bounds": (1e-10, "Rayleigh quotients of M^-1 A stay in [lambda_min, lambda_max], attained at witnesses"),
    "inner_product_independence": (1e-8, "extremes agree under the A- and S-inner products"),
    "route_agreement": (1e-8, "pencil, operator and S-product routes agree on c-, c+"),
    "stable_decomposition": (1e-9, "c- ||R_B^dagger u||_B^2 <= (u, u)_A on random u"),
    "boundedness": (1e-9, "(R v, R v)_A <= c+ (v, v)_B on random v"),
    "optimality": (1e-8, "witnesses attain c- and c+"),
}

DEFAULT_MODEL_PROBLEMS = [
    ProblemSpec(kind="laplace1d", n=3, subdomains=2, overlap=1),
    ProblemSpec(kind="laplace1d", n=32, subdomains=4, overlap=2),
    ProblemSpec(kind="laplace2d", n=8, subdomains=2, overlap=1),
    ProblemSpec(kind="laplace2d", n=16, subdomains=4, overlap=2),
]


@dataclass(frozen=True)
class TripleInstance:
    """Raw arrays of one (R, A, B) instance."""

    label: str
    r: np.ndarray
    a: np.ndarray
    b: np.ndarray


def random_instance(seed: int, index: int) -> TripleInstance:
    """dim H in [1, 20], dim V in [20, 40], Gaussian R, SPD A and B = G^T G + dim I."""
    rng = stream(seed, STREAM_INSTANCES, index)
    dim_h = int(rng.integers(1, MAX_DIM_H + 1))
    dim_v = int(rng.integers(max(MIN_DIM_V, dim_h), MAX_DIM_V + 1))
    r = rng.standard_normal((dim_h, dim_v))
    g = rng.standard_normal((dim_v, dim_v))
    h = rng.standard_normal((dim_h, dim_h))
    return TripleInstance(
        label=f"random[{index}] {dim_h}x{dim_v}",
        r=r,
        a=h.T @ h + dim_h * np.eye(dim_h),
        b=g.T @ g + dim_v * np.eye(dim_v),
    )


def model_problem_instance(spec: ProblemSpec, local_solver: str = "exact") -> TripleInstance:
    ops = build_schwarz_operators(strip_decomposition(spec), laplacian(spec), local_solver)
    return TripleInstance(label=spec.describe(), r=ops.r_map.data, a=ops.a.data, b=ops.b.data)


def _minimality_residual(p, basis: np.ndarray, seed: int, index: int) -> float:
    if basis.shape[1] == 0:
        return 0.0
    ys = gaussian_columns(seed, STREAM_MINIMALITY, 2 * index, p.source.dim_h, MINIMALITY_SAMPLES)
    coeffs = gaussian_columns(seed, STREAM_MINIMALITY, 2 * index + 1, basis.shape[1], MINIMALITY_SAMPLES)
    ks = basis @ coeffs
    gaps = minimality_gaps(p, ys, ks)
    x_norms = np.sqrt(p.weighted_norm_sq(p.dagger.data @ ys))
    k_norms_sq = p.weighted_norm_sq(ks)
    # Pythagoras: gap - ||k||^2 = 2 (x, k)_W must vanish
    cross = np.abs(gaps - k_norms_sq[np.newaxis, :]) / (2.0 * np.outer(x_norms, np.sqrt(k_norms_sq)))
    nonzero = np.sqrt(np.sum(ks * ks, axis=0)) > 1e-12
    strict = bool(np.all(gaps[:, nonzero] > 0.0))
    return float(np.max(cross)) if strict else np.inf


def check_instance(
    instance: TripleInstance,
    seed: int = DEFAULT_SEED,
    samples: int = 1000,
    index: int = 0,
    workers: int = 1,
) -> dict[str, float]:
    """Residual of every property on one instance.

    Raises:
        FictitiousSpaceError: If the instance is invalid (e.g. B indefinite).
    """
    r = SurjectiveMap(instance.r)
    t = OperatorTriple(r, DenseSymMatrix(instance.a), DenseSymMatrix(instance.b))
    plain = pseudo_inverse(r)
    weighted = t.pseudo
    basis = kernel_basis(r)
    values: dict[str, float] = {}

    values["right_inverse"] = max(plain.right_inverse_residual(), weighted.right_inverse_residual())
    values["injectivity"] = 0.0 if min(injectivity_witness(plain), injectivity_witness(weighted)) > 0 else 1.0
    values["minimal_norm"] = max(
        _minimality_residual(plain, basis, seed, 2 * index),
        _minimality_residual(weighted, basis, seed, 2 * index + 1),
        plain.range_orthogonality_residual(),
        weighted.range_orthogonality_residual(),
    )
    values["orthogonal_projector"] = max(projector_residuals(plain))
    values["weighted_adjointness"] = max(projector_residuals(weighted))
    values["inverse_identity"] = float(np.max(np.abs(t.s.data @ t.m_inv.data - np.eye(r.dim_h))))

    operator = preconditioned_operator(t)
    in_a = minimax_check(operator, t.a, samples=samples, seed=seed)
    in_s = minimax_check(operator, t.s, samples=samples, seed=seed)
    scale = max(1.0, abs(in_a.lambda_max))
    outside = max(
        0.0,
        in_a.lambda_min - in_a.epsilon - in_a.rayleigh_min,
        in_a.rayleigh_max - in_a.lambda_max - in_a.epsilon,
    )
    values["rayleigh_bounds"] = max(in_a.witness_error, outside) / scale
    values["inner_product_independence"] = max(
        abs(in_a.lambda_min - in_s.lambda_min) / in_a.lambda_min,
        abs(in_a.lambda_max - in_s.lambda_max) / in_a.lambda_max,
    )

    try:
        cert = certify_triple(t, seed=seed, workers=workers)
    except CertificationFailed as e:
        if e.certificate is None:
            raise
        cert = e.certificate
    values["route_agreement"] = max(
        v for k, v in cert.route_residuals.items() if k.startswith("pencil_vs_")
    )
    values["stable_decomposition"] = max(0.0, verify_condition_i(t, cert, samples, seed, workers))
    values["boundedness"] = max(0.0, verify_condition_ii(t, cert, samples, seed, workers))
    values["optimality"] = _tightness(t, cert)
    return values


def _tightness(t: OperatorTriple, cert: SpectralCertificate) -> float:
    lower = stable_decomposition_ratio(t, cert.witness_minus)
    upper = boundedness_ratio(t, t.pseudo.apply(cert.witness_plus))
    return max(abs(lower - cert.c_minus) / cert.c_minus, abs(upper - cert.c_plus) / cert.c_plus)


def run_property_suite(
    seed: int = DEFAULT_SEED,
    count: int = 100,
    samples: int = 1000,
    instances: list[TripleInstance] | None = None,
    model_problems: list[ProblemSpec] | None = None,
    workers: int = 1,
) -> SuiteSummary:
    """Run every property over seeded random instances and model problems.

    Args:
        seed: Root seed for instances and sampling.
        count: Number of random instances (ignored when ``instances`` is given).
        samples: Samples for the sampled properties.
        instances: Explicit instances replacing the random ones.
        model_problems: Model problems appended to the instances; defaults to
            ``DEFAULT_MODEL_PROBLEMS`` when random instances are used.
        workers: Threads for certification routes and sampling.

    Returns:
        SuiteSummary; instances that raise are listed in ``aborted``.
    """
    if instances is None:
        instances = [random_instance(seed, i) for i in range(count)]
        if model_problems is None:
            model_problems = DEFAULT_MODEL_PROBLEMS
    instances = list(instances) + [model_problem_instance(spec) for spec in model_problems or []]

    results = {
        name: PropertyResult(name=name, description=desc, tolerance=tol)
        for name, (tol, desc) in PROPERTIES.items()
    }
    aborted = []
    for index, instance in enumerate(instances):
        try:
            values = check_instance(instance, seed=seed, samples=samples, index=index, workers=workers)
        except FictitiousSpaceError as e:
            logger.warning("[Verify] %s aborted: %s", instance.label, e)
            aborted.append(f"{instance.label}: {e}")
            continue
        for name, value in values.items():
            result = results[name]
            result.instances += 1
            result.max_residual = max(result.max_residual, value)
            if value > result.tolerance:
                result.failures.append(f"{instance.label}: {value:.3e}")
                logger.warning("[Verify] %s failed on %s: %.3e", name, instance.label, value)

    summary = SuiteSummary(
        seed=seed,
        instances=len(instances),
        properties=list(results.values()),
        aborted=aborted,
    )
    logger.info("[Verify] %d instances, passed=%s", len(instances), summary.passed)
    return summary
