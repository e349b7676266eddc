"""End-to-end tests for the command line.

Run with: pytest tests/test_cli.py -v
"""

import tempfile
from pathlib import Path

import numpy as np
import pytest

from src.cli import main as cli
from src.core import certify
from src.core.certify import certify_via_pencil
from src.core.linalg import DenseMatrix, DenseSymMatrix
from src.core.matrix_market import read_sym_matrix, write_matrix
from src.core.reports import parse_report, read_residual_history


@pytest.fixture
def temp_dir():
    """Create a temporary output directory."""
    with tempfile.TemporaryDirectory() as tmpdir:
        yield Path(tmpdir)


@pytest.fixture(autouse=True)
def clean_env(monkeypatch):
    """Run every test without FSL_* overrides."""
    for name in ("FSL_TOL", "FSL_SEED", "FSL_WORKERS", "FSL_LOG_LEVEL"):
        monkeypatch.delenv(name, raising=False)


def run(*args) -> int:
    return cli.main([str(a) for a in args])


def write_instance(directory: Path, matrix, decomposition_text: str) -> tuple[Path, Path]:
    matrix_path = write_matrix(directory / "in.mtx", DenseSymMatrix(matrix))
    decomposition_path = directory / "in.txt"
    decomposition_path.write_text(decomposition_text)
    return matrix_path, decomposition_path


N3_FLAGS = ("--kind", "laplace1d", "--n", "3", "--subdomains", "2", "--overlap", "1")


class TestGen:
    """Tests for gen."""

    def test_n3_files(self, temp_dir):
        """n=3 writes the tridiagonal matrix and two strips."""
        assert run("gen", *N3_FLAGS, "--out", temp_dir) == 0
        a = read_sym_matrix(temp_dir / "matrix.mtx")
        assert np.array_equal(a.data, [[2, -1, 0], [-1, 2, -1], [0, -1, 2]])
        assert (temp_dir / "decomposition.txt").read_text() == "0 1\n1 2\n"

    def test_2d_shapes(self, temp_dir):
        """laplace2d n=16 gives a 256x256 matrix and four strips."""
        flags = ("--kind", "laplace2d", "--n", "16", "--subdomains", "4", "--overlap", "2")
        assert run("gen", *flags, "--out", temp_dir) == 0
        assert read_sym_matrix(temp_dir / "matrix.mtx").shape == (256, 256)
        assert len((temp_dir / "decomposition.txt").read_text().splitlines()) == 4

    def test_idempotent(self, temp_dir):
        """Regenerating writes identical bytes."""
        run("gen", *N3_FLAGS, "--out", temp_dir)
        first = (temp_dir / "matrix.mtx").read_bytes()
        run("gen", *N3_FLAGS, "--out", temp_dir)
        assert (temp_dir / "matrix.mtx").read_bytes() == first

    def test_more_subdomains_than_rows(self, temp_dir, capsys):
        """N > n is an input error."""
        assert run("gen", "--kind", "laplace1d", "--n", "3", "--subdomains", "4", "--out", temp_dir) == 2
        assert "subdomains" in capsys.readouterr().err

    def test_missing_spec(self, temp_dir):
        """gen without a problem spec is an input error."""
        assert run("gen", "--out", temp_dir) == 2

    def test_config_file_with_override(self, temp_dir):
        """Flags override values from --config."""
        config = temp_dir / "problem.env"
        config.write_text("kind=laplace1d\nn=4\nsubdomains=2\noverlap=2\n")
        out = temp_dir / "out"
        assert run("gen", "--config", config, "--overlap", "1", "--out", out) == 0
        assert (out / "decomposition.txt").read_text() == "0 1 2\n1 2 3\n"


class TestCertify:
    """Tests for certify."""

    def test_n3_certificate(self, temp_dir):
        """n=3 certifies c- = 2/3, c+ = 2, kappa = 3."""
        assert run("certify", *N3_FLAGS, "--out", temp_dir) == 0
        fields = parse_report((temp_dir / "certificate.txt").read_text())
        assert float(fields["c_minus"]) == pytest.approx(2.0 / 3.0, rel=1e-8)
        assert float(fields["c_plus"]) == pytest.approx(2.0, rel=1e-8)
        assert float(fields["kappa"]) == pytest.approx(3.0, rel=1e-8)

    def test_exact_preconditioner(self, temp_dir):
        """One subdomain covering A certifies c- = c+ = 1."""
        matrix, decomposition = write_instance(temp_dir, [[2.0, -1.0], [-1.0, 2.0]], "0 1\n")
        assert run("certify", "--matrix", matrix, "--decomposition", decomposition, "--out", temp_dir) == 0
        fields = parse_report((temp_dir / "certificate.txt").read_text())
        assert float(fields["c_minus"]) == pytest.approx(1.0)
        assert float(fields["c_plus"]) == pytest.approx(1.0)

    def test_round_trip_is_bit_for_bit(self, temp_dir):
        """Certifying generated files reproduces the in-memory certificate."""
        generated = temp_dir / "gen"
        in_memory = temp_dir / "mem"
        from_files = temp_dir / "files"
        flags = ("--kind", "laplace2d", "--n", "8", "--subdomains", "2", "--overlap", "1", "--seed", "9")
        assert run("gen", *flags, "--out", generated) == 0
        assert run("certify", *flags, "--out", in_memory) == 0
        assert run(
            "certify",
            "--matrix", generated / "matrix.mtx",
            "--decomposition", generated / "decomposition.txt",
            "--seed", "9",
            "--out", from_files,
        ) == 0
        assert (in_memory / "certificate.txt").read_text() == (from_files / "certificate.txt").read_text()

    def test_not_covering(self, temp_dir):
        """An uncovered index is a numerical failure."""
        matrix, decomposition = write_instance(temp_dir, np.eye(3), "0\n2\n")
        assert run("certify", "--matrix", matrix, "--decomposition", decomposition, "--out", temp_dir) == 1

    def test_missing_matrix(self, temp_dir):
        """A missing matrix file is an input error."""
        decomposition = temp_dir / "d.txt"
        decomposition.write_text("0\n")
        assert run("certify", "--matrix", temp_dir / "none.mtx", "--decomposition", decomposition) == 2

    def test_non_symmetric_matrix_file(self, temp_dir, capsys):
        """A matrix file that parses but is not symmetric is an input error."""
        matrix = write_matrix(temp_dir / "in.mtx", DenseMatrix([[2.0, 1.0], [0.0, 2.0]]))
        decomposition = temp_dir / "in.txt"
        decomposition.write_text("0 1\n")
        assert run("certify", "--matrix", matrix, "--decomposition", decomposition, "--out", temp_dir) == 2
        assert "ERROR" in capsys.readouterr().err

    def test_route_disagreement(self, temp_dir, monkeypatch):
        """Disagreeing routes exit 1 and still write the certificate."""
        monkeypatch.setitem(
            certify.ROUTES,
            certify.ROUTE_S_PRODUCT,
            lambda t: certify_via_pencil(t.scaled(a_factor=2.0)),
        )
        assert run("certify", *N3_FLAGS, "--out", temp_dir) == 1
        fields = parse_report((temp_dir / "certificate.txt").read_text())
        assert float(fields["route_residuals.pencil_vs_s_inner_product"]) > 1e-8


class TestSolve:
    """Tests for solve."""

    def test_n3_converges(self, temp_dir):
        """n=3 converges in at most three iterations with a full CSV."""
        assert run("solve", *N3_FLAGS, "--tol", "1e-10", "--out", temp_dir) == 0
        fields = parse_report((temp_dir / "solve_report.txt").read_text())
        assert int(fields["iterations"]) <= 3
        assert fields["converged"] == "true"
        history = read_residual_history((temp_dir / "residuals.csv").read_text())
        assert history[0] == 1.0
        assert len(history) == int(fields["iterations"]) + 1

    def test_identity_system(self, temp_dir):
        """A = I converges in one iteration."""
        matrix, decomposition = write_instance(temp_dir, np.eye(3), "0 1 2\n")
        assert run("solve", "--matrix", matrix, "--decomposition", decomposition, "--out", temp_dir) == 0
        fields = parse_report((temp_dir / "solve_report.txt").read_text())
        assert fields["iterations"] == "1"

    def test_non_spd_breakdown(self, temp_dir, capsys):
        """Negative curvature with singleton subdomains reports BreakdownDetected."""
        matrix, decomposition = write_instance(temp_dir, [[1.0, -2.0], [-2.0, 1.0]], "0\n1\n")
        assert run("solve", "--matrix", matrix, "--decomposition", decomposition, "--out", temp_dir) == 1
        assert "BreakdownDetected" in capsys.readouterr().err

    def test_indefinite_subdomain_block(self, temp_dir, capsys):
        """An indefinite block fails while M^-1 is built, before PCG runs."""
        matrix, decomposition = write_instance(temp_dir, [[1.0, 2.0], [2.0, 1.0]], "0 1\n")
        assert run("solve", "--matrix", matrix, "--decomposition", decomposition, "--out", temp_dir) == 1
        assert "NotPositiveDefinite" in capsys.readouterr().err

    def test_iteration_bound_exceeded(self, temp_dir, monkeypatch):
        """Exceeding the certified bound exits 1 after writing the report."""
        monkeypatch.setattr(cli, "iteration_bound", lambda kappa, tol: 0)
        assert run("solve", *N3_FLAGS, "--out", temp_dir) == 1
        assert (temp_dir / "solve_report.txt").exists()

    def test_invalid_tol(self, temp_dir):
        """tol outside (0, 1) is an input error."""
        assert run("solve", *N3_FLAGS, "--tol", "2", "--out", temp_dir) == 2


class TestVerify:
    """Tests for verify."""

    def test_small_suite_passes(self, temp_dir):
        """A small seeded suite passes and records its seed."""
        assert run("verify", "--instances", "3", "--samples", "256", "--seed", "5", "--out", temp_dir) == 0
        fields = parse_report((temp_dir / "verify_summary.txt").read_text())
        assert fields["passed"] == "true"
        assert fields["seed"] == "5"
        assert "route_agreement.max_residual" in fields

    def test_extra_model_problem(self, temp_dir):
        """A problem spec is added to the default model problems."""
        flags = ("--kind", "laplace1d", "--n", "12", "--subdomains", "3", "--overlap", "2")
        assert run("verify", *flags, "--instances", "1", "--samples", "256", "--out", temp_dir) == 0
        fields = parse_report((temp_dir / "verify_summary.txt").read_text())
        assert fields["instances"] == "6"

    def test_bad_log_level(self, temp_dir):
        """An unknown log level is an input error."""
        assert run("verify", "--log-level", "chatty", "--out", temp_dir) == 2
