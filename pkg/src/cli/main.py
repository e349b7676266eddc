"""FSLCert command line.

Generate model problems, certify the spectral constants of their additive
Schwarz preconditioner, solve with PCG, and run the property suite.

Usage:
    python -m src.cli.main gen --kind laplace1d --n 3 --subdomains 2 --out data/n3
    python -m src.cli.main certify --matrix data/n3/matrix.mtx --decomposition data/n3/decomposition.txt
    python -m src.cli.main solve --kind laplace2d --n 16 --subdomains 4 --overlap 2 --tol 1e-10
    python -m src.cli.main verify --seed 7 --instances 20

Exit codes:
    0  success
    1  numerical failure (certification, solver, property suite)
    2  I/O or configuration error
"""

import argparse
import logging
import sys
from pathlib import Path

import numpy as np
from pydantic import ValidationError

from src.core.certify import OperatorTriple, certify_triple
from src.core.config import RunConfig, default_log_level
from src.core.exceptions import (
    CertificationFailed,
    ConfigError,
    DimensionMismatch,
    FictitiousSpaceError,
    InvalidDecomposition,
    InvalidMatrix,
    InvalidSpec,
    IterationBoundExceeded,
    MaxIterationsExceeded,
    NotSymmetric,
    StorageError,
)
from src.core.linalg import DenseSymMatrix
from src.core.matrix_market import read_sym_matrix
from src.core.model_problems import laplacian, strip_decomposition
from src.core.models import Decomposition, ProblemSpec, SolveReport, SpectralCertificate, SuiteSummary
from src.core.pcg import iteration_bound, pcg
from src.core.properties import DEFAULT_MODEL_PROBLEMS, run_property_suite
from src.core.reports import certificate_report, instance_hash, solve_report, suite_report
from src.core.schwarz import SchwarzOperators, build_schwarz_operators
from src.core.storage import InstanceStorage, read_decomposition, read_problem_values

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_NUMERICAL = 1
EXIT_INPUT = 2

# Errors caused by what the user handed us rather than by the numerics
INPUT_ERRORS = (StorageError, ConfigError, InvalidSpec, InvalidDecomposition, ValidationError)

PROBLEM_FLAGS = ("kind", "n", "subdomains", "overlap")


def load_instance(cfg: RunConfig) -> tuple[DenseSymMatrix, Decomposition]:
    """Matrix and decomposition from the problem spec or the input files.

    Raises:
        StorageError: If a file is unreadable or does not hold a symmetric matrix.
    """
    if cfg.problem is not None:
        return laplacian(cfg.problem), strip_decomposition(cfg.problem)
    try:
        a = read_sym_matrix(cfg.matrix_path)
    except (NotSymmetric, InvalidMatrix, DimensionMismatch) as e:
        raise StorageError(f"{cfg.matrix_path}: {e}") from e
    return a, read_decomposition(cfg.decomposition_path, a.dim)


def build_operators(cfg: RunConfig) -> tuple[SchwarzOperators, str]:
    a, decomposition = load_instance(cfg)
    ops = build_schwarz_operators(decomposition, a, cfg.local_solver)
    return ops, instance_hash(a, decomposition)


def cmd_gen(cfg: RunConfig) -> list[Path]:
    """Write matrix.mtx, decomposition.txt and problem.env for the model problem."""
    storage = InstanceStorage(cfg.output)
    written = storage.save_instance(laplacian(cfg.problem), strip_decomposition(cfg.problem), cfg.problem)
    for path in written:
        print(f"Wrote {path}")
    return written


def cmd_certify(cfg: RunConfig) -> SpectralCertificate:
    """Certify the instance and write certificate.txt.

    The certificate is written even when the routes disagree, so the residuals
    can be inspected.

    Raises:
        CertificationFailed: If the routes disagree beyond tolerance.
    """
    ops, digest = build_operators(cfg)
    storage = InstanceStorage(cfg.output)
    try:
        cert = certify_triple(
            OperatorTriple.from_schwarz(ops), seed=cfg.seed, workers=cfg.workers, instance_hash=digest
        )
    except CertificationFailed as e:
        if e.certificate is not None:
            storage.save_certificate(e.certificate)
        raise
    path = storage.save_certificate(cert)
    print(certificate_report(cert), end="")
    logger.info("[CLI] certificate written to %s", path)
    return cert


def cmd_solve(cfg: RunConfig) -> SolveReport:
    """Solve A x = 1 with ASM-preconditioned CG and write the report and CSV.

    An A whose subdomain blocks are not SPD fails while the preconditioner is
    built, with NotPositiveDefinite, before PCG can detect a breakdown.

    Raises:
        NotPositiveDefinite: If a subdomain block or M^-1 is not SPD.
        BreakdownDetected: If A is not positive definite along a search direction.
        MaxIterationsExceeded: If PCG did not converge (the partial report is written).
        IterationBoundExceeded: If iterations exceed the certified bound.
    """
    ops, digest = build_operators(cfg)
    storage = InstanceStorage(cfg.output)
    rhs = np.ones(ops.a.dim)
    try:
        _, report = pcg(ops.a, ops.as_preconditioner(cfg.workers), rhs, tol=cfg.tol)
    except MaxIterationsExceeded as e:
        storage.save_solve_report(e.report)
        raise

    try:
        cert = certify_triple(
            OperatorTriple.from_schwarz(ops), seed=cfg.seed, workers=cfg.workers, instance_hash=digest
        )
    except CertificationFailed as e:
        if e.certificate is None:
            raise
        logger.warning("[CLI] %s; using the pencil constants for the bound", e)
        cert = e.certificate
    report.kappa_used = cert.kappa
    report.iteration_bound = iteration_bound(cert.kappa, cfg.tol)

    storage.save_solve_report(report)
    print(solve_report(report), end="")
    if not report.within_bound():
        raise IterationBoundExceeded(
            f"{report.iterations} iterations exceed the bound {report.iteration_bound} for kappa={cert.kappa:.6g}"
        )
    return report


def cmd_verify(cfg: RunConfig) -> SuiteSummary:
    """Run the property suite; a given problem spec is added to the model problems."""
    model_problems = list(DEFAULT_MODEL_PROBLEMS)
    if cfg.problem is not None:
        model_problems.append(cfg.problem)
    summary = run_property_suite(
        seed=cfg.seed,
        count=cfg.instances,
        samples=cfg.samples,
        model_problems=model_problems,
        workers=cfg.workers,
    )
    InstanceStorage(cfg.output).save_suite_summary(summary)
    print(suite_report(summary), end="")
    return summary


COMMANDS = {
    "gen": cmd_gen,
    "certify": cmd_certify,
    "solve": cmd_solve,
    "verify": cmd_verify,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fslcert",
        description="Certify additive Schwarz preconditioners with fictitious-space spectral bounds",
    )
    parser.add_argument("command", choices=list(COMMANDS), help="Operation to run")

    problem = parser.add_argument_group("model problem")
    problem.add_argument("--config", type=Path, help="key=value problem file (flags override it)")
    problem.add_argument("--kind", choices=["laplace1d", "laplace2d"], help="Model problem")
    problem.add_argument("--n", type=int, help="Grid points per direction")
    problem.add_argument("--subdomains", type=int, help="Number of strips N")
    problem.add_argument("--overlap", type=int, help="Overlap in grid cells")

    files = parser.add_argument_group("input files")
    files.add_argument("--matrix", type=Path, help="Matrix Market file for A")
    files.add_argument("--decomposition", type=Path, help="One line of indices per subdomain")

    run = parser.add_argument_group("run")
    run.add_argument("--tol", type=float, help="Relative tolerance in (0, 1) (default: FSL_TOL or 1e-8)")
    run.add_argument("--seed", type=lambda s: int(s, 0), help="Sampling seed (default: FSL_SEED or 0xF1C75)")
    run.add_argument("--out", type=Path, default=Path("data"), help="Output directory (default: data)")
    run.add_argument("--local-solver", choices=["exact", "jacobi"], default="exact", help="Subdomain solver")
    run.add_argument("--workers", type=int, help="Worker threads (default: FSL_WORKERS or 1)")
    run.add_argument("--instances", type=int, default=100, help="Random instances for verify")
    run.add_argument("--samples", type=int, default=1000, help="Samples per sampled property")
    run.add_argument("--log-level", help="Logging level (default: FSL_LOG_LEVEL or WARNING)")
    return parser


def problem_from_args(args: argparse.Namespace) -> ProblemSpec | None:
    """ProblemSpec from --config and the problem flags, or None if neither is given."""
    values: dict = read_problem_values(args.config) if args.config else {}
    for flag in PROBLEM_FLAGS:
        value = getattr(args, flag)
        if value is not None:
            values[flag] = value
    if not values:
        return None
    return ProblemSpec.model_validate(values)


def config_from_args(args: argparse.Namespace) -> RunConfig:
    """Build the RunConfig; unset flags fall back to the environment defaults."""
    fields = {
        "command": args.command,
        "problem": problem_from_args(args),
        "matrix_path": args.matrix,
        "decomposition_path": args.decomposition,
        "output": args.out,
        "local_solver": args.local_solver,
        "instances": args.instances,
        "samples": args.samples,
    }
    for name in ("tol", "seed", "workers"):
        value = getattr(args, name)
        if value is not None:
            fields[name] = value
    return RunConfig(**fields)


def main(argv: list[str] | None = None) -> int:
    """Parse arguments, run one command, and map the outcome to an exit code."""
    args = build_parser().parse_args(argv)
    level_name = (args.log_level or default_log_level()).upper()
    level = logging.getLevelName(level_name)
    if not isinstance(level, int):
        print(f"ERROR: unknown log level {level_name!r}", file=sys.stderr)
        return EXIT_INPUT
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s")

    try:
        cfg = config_from_args(args)
        result = COMMANDS[cfg.command](cfg)
    except INPUT_ERRORS as e:
        print(f"ERROR: {e}", file=sys.stderr)
        return EXIT_INPUT
    except FictitiousSpaceError as e:
        print(f"FAILED: {type(e).__name__}: {e}", file=sys.stderr)
        return EXIT_NUMERICAL

    if isinstance(result, SuiteSummary) and not result.passed:
        return EXIT_NUMERICAL
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
