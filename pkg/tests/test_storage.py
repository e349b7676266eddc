"""Tests for instance-directory persistence and reports.

Run with: pytest tests/test_storage.py -v
"""

import tempfile
from pathlib import Path

import numpy as np
import pytest

from src.core.exceptions import InvalidDecomposition, InvalidSpec, StorageError
from src.core.model_problems import laplacian, strip_decomposition
from src.core.models import PropertyResult, ProblemSpec, SolveReport, SpectralCertificate, SuiteSummary
from src.core.reports import (
    format_report,
    instance_hash,
    parse_report,
    read_residual_history,
    residual_history_csv,
)
from src.core.storage import (
    InstanceStorage,
    atomic_write_text,
    read_decomposition,
    read_problem_spec,
)

N3_SPEC = ProblemSpec(kind="laplace1d", n=3, subdomains=2, overlap=1)


@pytest.fixture
def temp_dir():
    """Create a temporary directory for storage."""
    with tempfile.TemporaryDirectory() as tmpdir:
        yield Path(tmpdir)


@pytest.fixture
def storage(temp_dir):
    """Create an InstanceStorage rooted in the temp directory."""
    return InstanceStorage(temp_dir)


class TestAtomicWrite:
    """Tests for atomic_write_text."""

    def test_writes_and_replaces(self, temp_dir):
        """The second write replaces the first."""
        path = temp_dir / "report.txt"
        atomic_write_text(path, "first\n")
        atomic_write_text(path, "second\n")
        assert path.read_text() == "second\n"
        assert [p.name for p in temp_dir.iterdir()] == ["report.txt"]

    def test_unwritable_target(self, temp_dir):
        """A file in place of the directory raises StorageError."""
        blocker = temp_dir / "file"
        blocker.write_text("x")
        with pytest.raises(StorageError):
            atomic_write_text(blocker / "child.txt", "data")


class TestInstanceStorage:
    """Tests for InstanceStorage."""

    def test_save_and_load_instance(self, storage):
        """A saved instance loads back unchanged."""
        a = laplacian(N3_SPEC)
        d = strip_decomposition(N3_SPEC)
        written = storage.save_instance(a, d, N3_SPEC)
        assert [p.name for p in written] == ["matrix.mtx", "decomposition.txt", "problem.env"]
        a_back, d_back = storage.load_instance()
        assert np.array_equal(a_back.data, a.data)
        assert d_back == d

    def test_decomposition_file_format(self, storage):
        """decomposition.txt has one line per subdomain."""
        storage.save_instance(laplacian(N3_SPEC), strip_decomposition(N3_SPEC))
        assert storage.decomposition_file.read_text() == "0 1\n1 2\n"

    def test_problem_file_round_trip(self, storage, temp_dir):
        """problem.env parses back to the same spec."""
        storage.save_instance(laplacian(N3_SPEC), strip_decomposition(N3_SPEC), N3_SPEC)
        assert read_problem_spec(temp_dir / "problem.env") == N3_SPEC

    def test_load_missing_instance(self, storage):
        """Loading an empty directory raises StorageError."""
        with pytest.raises(StorageError):
            storage.load_instance()

    def test_certificate_fields(self, storage):
        """Certificate fields are written at full precision."""
        cert = SpectralCertificate(
            c_minus=2.0 / 3.0,
            c_plus=2.0,
            route_residuals={"pencil_vs_preconditioned_operator": 1e-15},
            seed=7,
        )
        storage.save_certificate(cert)
        fields = storage.load_certificate_fields()
        assert float(fields["c_minus"]) == 2.0 / 3.0
        assert float(fields["kappa"]) == cert.kappa
        assert float(fields["route_residuals.pencil_vs_preconditioned_operator"]) == 1e-15
        assert fields["seed"] == "7"

    def test_solve_report_and_csv(self, storage, temp_dir):
        """The solve report and residual CSV are both written."""
        report = SolveReport(iterations=2, residual_history=[1.0, 0.1, 1e-11], converged=True, true_residual=1e-11)
        paths = storage.save_solve_report(report)
        assert [p.name for p in paths] == ["solve_report.txt", "residuals.csv"]
        fields = parse_report(paths[0].read_text())
        assert fields["converged"] == "true"
        assert float(fields["final_residual"]) == 1e-11
        assert read_residual_history(paths[1].read_text()) == [1.0, 0.1, 1e-11]

    def test_suite_summary(self, storage):
        """The suite summary records per-property results."""
        summary = SuiteSummary(
            seed=1,
            instances=2,
            properties=[PropertyResult(name="right_inverse", tolerance=1e-9, max_residual=1e-15, instances=2)],
        )
        fields = parse_report(storage.save_suite_summary(summary).read_text())
        assert fields["passed"] == "true"
        assert fields["right_inverse.passed"] == "true"
        assert fields["aborted"] == "none"


class TestReadInputs:
    """Reading user-supplied files."""

    def test_decomposition_not_integers(self, temp_dir):
        """Non-integer tokens raise InvalidDecomposition."""
        path = temp_dir / "d.txt"
        path.write_text("0 1\n1 two\n")
        with pytest.raises(InvalidDecomposition):
            read_decomposition(path, 3)

    def test_decomposition_missing(self, temp_dir):
        """A missing decomposition raises StorageError."""
        with pytest.raises(StorageError):
            read_decomposition(temp_dir / "none.txt", 3)

    def test_problem_file_case_insensitive(self, temp_dir):
        """Problem-file keys are case-insensitive."""
        path = temp_dir / "p.env"
        path.write_text("KIND=laplace2d\nN=8\nSUBDOMAINS=2\n")
        spec = read_problem_spec(path)
        assert spec == ProblemSpec(kind="laplace2d", n=8, subdomains=2, overlap=1)

    def test_problem_file_invalid(self, temp_dir):
        """An invalid spec in a problem file raises InvalidSpec."""
        path = temp_dir / "p.env"
        path.write_text("kind=laplace1d\nn=2\nsubdomains=3\n")
        with pytest.raises(InvalidSpec):
            read_problem_spec(path)

    def test_problem_file_missing(self, temp_dir):
        """A missing problem file raises StorageError."""
        with pytest.raises(StorageError):
            read_problem_spec(temp_dir / "none.env")


class TestReports:
    """Report formatting."""

    def test_seventeen_digits(self):
        """Floats are written with 17 significant digits."""
        text = format_report("t", {"x": 0.1})
        assert float(parse_report(text)["x"]) == 0.1
        assert "1.0000000000000001e-01" in text

    def test_nested_keys(self):
        """Nested values flatten to dotted keys."""
        fields = parse_report(format_report("t", {"a": {"b": 1, "c": [1.5, 2.5]}}))
        assert fields == {"a.b": "1", "a.c": "1.5000000000000000e+00, 2.5000000000000000e+00"}

    def test_parse_rejects_garbage(self):
        """Lines without '=' raise StorageError."""
        with pytest.raises(StorageError):
            parse_report("# title\nnot a pair\n")

    def test_csv_columns(self):
        """The CSV header names both columns."""
        csv = residual_history_csv(SolveReport(residual_history=[1.0, 0.5]))
        assert csv.splitlines()[0] == "iteration,relative_residual"

    def test_instance_hash_changes_with_decomposition(self):
        """The hash is stable and sees the decomposition."""
        a = laplacian(ProblemSpec(kind="laplace1d", n=4, subdomains=2))
        d1 = strip_decomposition(ProblemSpec(kind="laplace1d", n=4, subdomains=2, overlap=1))
        d2 = strip_decomposition(ProblemSpec(kind="laplace1d", n=4, subdomains=2, overlap=2))
        assert instance_hash(a, d1) == instance_hash(a, d1)
        assert instance_hash(a, d1) != instance_hash(a, d2)
