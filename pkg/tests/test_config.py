"""Tests for run configuration.

Run with: pytest tests/test_config.py -v
"""

from pathlib import Path

import pytest
from pydantic import ValidationError

from src.core.config import RunConfig, default_log_level, default_seed, default_tol
from src.core.exceptions import ConfigError
from src.core.models import ProblemSpec
from src.core.sampling import DEFAULT_SEED

N3_SPEC = ProblemSpec(kind="laplace1d", n=3, subdomains=2, overlap=1)


@pytest.fixture(autouse=True)
def clean_env(monkeypatch):
    """Run every test without FSL_* overrides."""
    for name in ("FSL_TOL", "FSL_SEED", "FSL_WORKERS", "FSL_LOG_LEVEL"):
        monkeypatch.delenv(name, raising=False)


class TestDefaults:
    """Environment-backed defaults."""

    def test_builtin_defaults(self):
        """Without FSL_* variables the built-in defaults apply."""
        cfg = RunConfig(command="certify", problem=N3_SPEC)
        assert cfg.tol == 1e-8
        assert cfg.seed == DEFAULT_SEED == 0xF1C75
        assert cfg.workers == 1
        assert cfg.output == Path("data")
        assert cfg.local_solver == "exact"

    def test_env_overrides(self, monkeypatch):
        """FSL_* variables override the defaults."""
        monkeypatch.setenv("FSL_TOL", "1e-6")
        monkeypatch.setenv("FSL_SEED", "0x10")
        monkeypatch.setenv("FSL_LOG_LEVEL", "debug")
        assert default_tol() == 1e-6
        assert default_seed() == 16
        assert default_log_level() == "DEBUG"

    def test_bad_env_value(self, monkeypatch):
        """An unparsable FSL_TOL raises ConfigError."""
        monkeypatch.setenv("FSL_TOL", "tight")
        with pytest.raises(ConfigError):
            default_tol()


class TestRunConfig:
    """Validation rules of RunConfig."""

    def test_problem_or_files(self):
        """A matrix/decomposition pair is accepted on its own."""
        cfg = RunConfig(command="solve", matrix_path=Path("a.mtx"), decomposition_path=Path("d.txt"))
        assert cfg.uses_files

    def test_both_inputs_rejected(self):
        """A problem spec and input files are mutually exclusive."""
        with pytest.raises(ConfigError):
            RunConfig(
                command="certify",
                problem=N3_SPEC,
                matrix_path=Path("a.mtx"),
                decomposition_path=Path("d.txt"),
            )

    def test_half_file_pair_rejected(self):
        """--matrix needs --decomposition."""
        with pytest.raises(ConfigError):
            RunConfig(command="certify", matrix_path=Path("a.mtx"))

    def test_certify_needs_input(self):
        """certify without any input is rejected."""
        with pytest.raises(ConfigError):
            RunConfig(command="certify")

    def test_gen_needs_spec(self):
        """gen only works from a problem spec."""
        with pytest.raises(ConfigError):
            RunConfig(command="gen", matrix_path=Path("a.mtx"), decomposition_path=Path("d.txt"))

    def test_verify_without_inputs(self):
        """verify needs no instance input."""
        assert RunConfig(command="verify").problem is None

    def test_verify_rejects_files(self):
        """verify does not take input files."""
        with pytest.raises(ConfigError):
            RunConfig(command="verify", matrix_path=Path("a.mtx"), decomposition_path=Path("d.txt"))

    @pytest.mark.parametrize("tol", [0.0, 1.0, 2.0])
    def test_tol_range(self, tol):
        """tol must lie strictly inside (0, 1)."""
        with pytest.raises(ValidationError):
            RunConfig(command="verify", tol=tol)

    def test_negative_seed(self):
        """Seeds are non-negative."""
        with pytest.raises(ValidationError):
            RunConfig(command="verify", seed=-1)

    def test_unknown_command(self):
        """Only the four commands are accepted."""
        with pytest.raises(ValidationError):
            RunConfig(command="plot")
