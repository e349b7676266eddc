"""Instance directory persistence for FSLCert."""

import logging
import os
import tempfile
from pathlib import Path

from dotenv import dotenv_values

from .exceptions import StorageError
from .linalg import DenseSymMatrix
from .matrix_market import read_sym_matrix, write_matrix
from .models import Decomposition, ProblemSpec, SolveReport, SpectralCertificate, SuiteSummary
from .reports import (
    certificate_report,
    parse_report,
    residual_history_csv,
    solve_report,
    suite_report,
)

logger = logging.getLogger(__name__)

MATRIX_FILE = "matrix.mtx"
DECOMPOSITION_FILE = "decomposition.txt"
PROBLEM_FILE = "problem.env"
CERTIFICATE_FILE = "certificate.txt"
SOLVE_REPORT_FILE = "solve_report.txt"
RESIDUALS_FILE = "residuals.csv"
SUITE_FILE = "verify_summary.txt"


def atomic_write_text(path: str | Path, text: str) -> Path:
    """Write through a temporary file in the same directory, then rename.

    Raises:
        StorageError: If the file cannot be written.
    """
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        fd, tmp_name = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
        try:
            with os.fdopen(fd, "w", encoding="utf-8") as f:
                f.write(text)
            os.replace(tmp_name, path)
        finally:
            if os.path.exists(tmp_name):
                os.unlink(tmp_name)
    except OSError as e:
        raise StorageError(f"Failed to write {path}: {e}") from e
    return path


def read_text(path: str | Path) -> str:
    """Read a text file, wrapping I/O errors.

    Raises:
        StorageError: If the file is missing or unreadable.
    """
    try:
        return Path(path).read_text(encoding="utf-8")
    except OSError as e:
        raise StorageError(f"Failed to read {path}: {e}") from e


def read_decomposition(path: str | Path, global_dim: int) -> Decomposition:
    return Decomposition.from_text(read_text(path), global_dim)


def write_decomposition(path: str | Path, decomposition: Decomposition) -> Path:
    return atomic_write_text(path, decomposition.to_text())


def read_problem_values(path: str | Path) -> dict[str, str]:
    """Raw key=value pairs of a problem file, keys lowercased.

    Raises:
        StorageError: If the file does not exist.
    """
    path = Path(path)
    if not path.is_file():
        raise StorageError(f"Problem file not found: {path}")
    return {k.lower(): v for k, v in dotenv_values(path).items() if v is not None}


def read_problem_spec(path: str | Path) -> ProblemSpec:
    """Parse a key=value problem file (kind, n, subdomains, overlap)."""
    return ProblemSpec.model_validate(read_problem_values(path))


def problem_spec_text(spec: ProblemSpec) -> str:
    return "".join(f"{key}={value}\n" for key, value in spec.model_dump().items())


class InstanceStorage:
    """File-based storage for one instance directory."""

    def __init__(self, data_dir: str | Path = "data"):
        """Initialize storage with an output directory.

        Args:
            data_dir: Directory holding matrix, decomposition and reports.
        """
        self.data_dir = Path(data_dir)
        try:
            self.data_dir.mkdir(parents=True, exist_ok=True)
        except OSError as e:
            raise StorageError(f"Cannot create output directory {self.data_dir}: {e}") from e

    @property
    def matrix_file(self) -> Path:
        return self.data_dir / MATRIX_FILE

    @property
    def decomposition_file(self) -> Path:
        return self.data_dir / DECOMPOSITION_FILE

    def save_instance(
        self,
        a: DenseSymMatrix,
        decomposition: Decomposition,
        spec: ProblemSpec | None = None,
    ) -> list[Path]:
        """Write matrix, decomposition and (optionally) the generating spec.

        Returns:
            Paths written, in order.
        """
        comment = spec.describe() if spec else ""
        written = [
            write_matrix(self.matrix_file, a, comment=comment),
            write_decomposition(self.decomposition_file, decomposition),
        ]
        if spec is not None:
            written.append(atomic_write_text(self.data_dir / PROBLEM_FILE, problem_spec_text(spec)))
        logger.info("[Storage] saved instance to %s", self.data_dir)
        return written

    def load_instance(self) -> tuple[DenseSymMatrix, Decomposition]:
        """Read back the matrix and decomposition written by ``save_instance``."""
        a = read_sym_matrix(self.matrix_file)
        return a, read_decomposition(self.decomposition_file, a.dim)

    def save_certificate(self, cert: SpectralCertificate) -> Path:
        return atomic_write_text(self.data_dir / CERTIFICATE_FILE, certificate_report(cert))

    def load_certificate_fields(self) -> dict[str, str]:
        return parse_report(read_text(self.data_dir / CERTIFICATE_FILE))

    def save_solve_report(self, report: SolveReport) -> list[Path]:
        return [
            atomic_write_text(self.data_dir / SOLVE_REPORT_FILE, solve_report(report)),
            atomic_write_text(self.data_dir / RESIDUALS_FILE, residual_history_csv(report)),
        ]

    def save_suite_summary(self, summary: SuiteSummary) -> Path:
        return atomic_write_text(self.data_dir / SUITE_FILE, suite_report(summary))
