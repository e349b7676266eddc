"""Run configuration for FSLCert."""

import os
from pathlib import Path
from typing import Literal

from dotenv import load_dotenv
from pydantic import BaseModel, Field, model_validator

from .exceptions import ConfigError
from .models import ProblemSpec
from .sampling import DEFAULT_SEED

# Load environment variables
load_dotenv(Path(__file__).parent.parent.parent / ".env")


def _env_float(name: str, default: float) -> float:
    raw = os.getenv(name)
    if raw is None or not raw.strip():
        return default
    try:
        return float(raw)
    except ValueError as e:
        raise ConfigError(f"{name}={raw!r} is not a number") from e


def _env_int(name: str, default: int) -> int:
    raw = os.getenv(name)
    if raw is None or not raw.strip():
        return default
    try:
        return int(raw, 0)
    except ValueError as e:
        raise ConfigError(f"{name}={raw!r} is not an integer") from e


def default_tol() -> float:
    return _env_float("FSL_TOL", 1e-8)


def default_seed() -> int:
    return _env_int("FSL_SEED", DEFAULT_SEED)


def default_workers() -> int:
    return _env_int("FSL_WORKERS", 1)


def default_log_level() -> str:
    return os.getenv("FSL_LOG_LEVEL", "WARNING").upper()


class RunConfig(BaseModel):
    """Everything one CLI command needs."""

    command: Literal["gen", "certify", "solve", "verify"]
    problem: ProblemSpec | None = Field(default=None, description="Generated model problem")
    matrix_path: Path | None = Field(default=None, description="Matrix Market input")
    decomposition_path: Path | None = Field(default=None, description="Decomposition text input")
    tol: float = Field(default_factory=default_tol, gt=0.0, lt=1.0)
    seed: int = Field(default_factory=default_seed, ge=0)
    output: Path = Field(default=Path("data"), description="Output directory")
    local_solver: Literal["exact", "jacobi"] = "exact"
    workers: int = Field(default_factory=default_workers, ge=1)
    instances: int = Field(default=100, ge=1, description="Random instances for verify")
    samples: int = Field(default=1000, ge=1, description="Samples per sampled property")

    @model_validator(mode="after")
    def _check_inputs(self) -> "RunConfig":
        has_files = self.matrix_path is not None or self.decomposition_path is not None
        if has_files and (self.matrix_path is None or self.decomposition_path is None):
            raise ConfigError("--matrix and --decomposition must be given together")
        if self.problem is not None and has_files:
            raise ConfigError("give either a problem spec or input files, not both")
        if self.command == "verify" and has_files:
            raise ConfigError("verify runs on generated instances; --matrix/--decomposition are not accepted")
        if self.command == "gen" and self.problem is None:
            raise ConfigError("gen needs a problem spec (--kind, --n, ...)")
        if self.command in ("certify", "solve") and self.problem is None and not has_files:
            raise ConfigError(f"{self.command} needs a problem spec or --matrix/--decomposition")
        return self

    @property
    def uses_files(self) -> bool:
        return self.matrix_path is not None
