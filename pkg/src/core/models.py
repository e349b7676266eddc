"""Pydantic data models for FSLCert."""

from typing import Literal

import numpy as np
from pydantic import BaseModel, Field, model_validator

from .exceptions import CertificationFailed, InvalidDecomposition, InvalidSpec

# Relative tolerance for kappa == c_plus / c_minus
KAPPA_RTOL = 1e-14


class ProblemSpec(BaseModel):
    """A reproducible finite-difference model problem with its strip decomposition."""

    kind: Literal["laplace1d", "laplace2d"] = Field(..., description="Stencil family")
    n: int = Field(..., ge=1, description="Interior points per dimension")
    subdomains: int = Field(default=1, ge=1, description="Number of strips N")
    overlap: int = Field(default=1, ge=1, description="Strip extension in mesh cells")

    @model_validator(mode="after")
    def _check_strips_fit(self) -> "ProblemSpec":
        if self.subdomains > self.n:
            raise InvalidSpec(
                f"{self.subdomains} subdomains cannot each get a row of an n={self.n} grid"
            )
        return self

    @property
    def global_dim(self) -> int:
        return self.n if self.kind == "laplace1d" else self.n * self.n

    def describe(self) -> str:
        return f"{self.kind} n={self.n} N={self.subdomains} overlap={self.overlap}"


class Decomposition(BaseModel):
    """Overlapping index subsets V_1 x ... x V_N of {0..global_dim-1}."""

    global_dim: int = Field(..., ge=1, description="Dimension of the global space H")
    subdomains: list[list[int]] = Field(..., description="Sorted, duplicate-free index sets")

    @model_validator(mode="after")
    def _check_subsets(self) -> "Decomposition":
        if not self.subdomains:
            raise InvalidDecomposition("decomposition has no subdomains")
        for i, subset in enumerate(self.subdomains):
            if not subset:
                raise InvalidDecomposition(f"subdomain {i} is empty")
            if any(b <= a for a, b in zip(subset, subset[1:])):
                raise InvalidDecomposition(f"subdomain {i} is not sorted and duplicate-free")
            if subset[0] < 0 or subset[-1] >= self.global_dim:
                raise InvalidDecomposition(
                    f"subdomain {i} has indices outside 0..{self.global_dim - 1}"
                )
        return self

    @property
    def count(self) -> int:
        return len(self.subdomains)

    @property
    def sizes(self) -> list[int]:
        return [len(s) for s in self.subdomains]

    @property
    def product_dim(self) -> int:
        """dim V = sum of subdomain sizes."""
        return sum(self.sizes)

    def offsets(self) -> list[int]:
        """Start of each block in the flattened product space."""
        return [0, *np.cumsum(self.sizes).tolist()]

    def multiplicity(self) -> np.ndarray:
        """mu(j): number of subdomains containing global index j."""
        counts = np.zeros(self.global_dim, dtype=int)
        for subset in self.subdomains:
            counts[subset] += 1
        return counts

    def missing_indices(self) -> list[int]:
        return np.flatnonzero(self.multiplicity() == 0).tolist()

    def to_text(self) -> str:
        """One line per subdomain, space-separated zero-based indices."""
        return "".join(" ".join(str(j) for j in subset) + "\n" for subset in self.subdomains)

    @classmethod
    def from_text(cls, text: str, global_dim: int) -> "Decomposition":
        """Parse the one-line-per-subdomain format.

        Raises:
            InvalidDecomposition: If a line holds something other than integers.
        """
        subdomains = []
        for lineno, line in enumerate(text.splitlines(), start=1):
            if not line.strip():
                continue
            try:
                subdomains.append([int(tok) for tok in line.split()])
            except ValueError as e:
                raise InvalidDecomposition(f"line {lineno}: {e}") from e
        return cls(global_dim=global_dim, subdomains=subdomains)


class SpectralCertificate(BaseModel):
    """Optimal constants c-, c+ of the preconditioned operator and their witnesses."""

    c_minus: float = Field(..., description="Smallest eigenvalue of R B^-1 R^T A")
    c_plus: float = Field(..., description="Largest eigenvalue of R B^-1 R^T A")
    kappa: float | None = Field(default=None, description="c_plus / c_minus")
    route: str = Field(default="combined", description="Route(s) that produced the constants")
    route_residuals: dict[str, float] = Field(
        default_factory=dict, description="Disagreement and witness residuals per route"
    )
    witness_minus: list[float] = Field(default_factory=list, description="Eigenvector for c_minus")
    witness_plus: list[float] = Field(default_factory=list, description="Eigenvector for c_plus")
    tolerance: float = Field(default=1e-8, description="Route agreement tolerance applied")
    seed: int | None = Field(default=None, description="Sampling seed recorded for reproducibility")
    instance_hash: str | None = Field(default=None, description="SHA-256 of the instance description")

    @model_validator(mode="after")
    def _check_constants(self) -> "SpectralCertificate":
        if not self.c_minus > 0:
            raise CertificationFailed(f"c_minus = {self.c_minus!r} is not positive")
        if self.c_minus > self.c_plus:
            raise CertificationFailed(f"c_minus = {self.c_minus!r} exceeds c_plus = {self.c_plus!r}")
        ratio = self.c_plus / self.c_minus
        if self.kappa is None:
            self.kappa = ratio
        elif abs(self.kappa - ratio) > KAPPA_RTOL * ratio:
            raise CertificationFailed(f"kappa = {self.kappa!r} inconsistent with c+/c- = {ratio!r}")
        return self


class SolveReport(BaseModel):
    """Trace of one PCG solve."""

    iterations: int = Field(default=0, description="Iterations performed")
    residual_history: list[float] = Field(
        default_factory=list, description="||r_k|| / ||r_0|| for k = 0..iterations"
    )
    converged: bool = Field(default=False, description="Whether the tolerance was met")
    tol: float = Field(default=1e-8, description="Relative tolerance")
    true_residual: float | None = Field(
        default=None, description="||A x - b|| / ||b|| recomputed at exit"
    )
    kappa_used: float | None = Field(default=None, description="Certificate kappa, if known")
    iteration_bound: int | None = Field(
        default=None, description="ceil(sqrt(kappa)/2 * ln(2/tol))"
    )
    energy_error_history: list[float] | None = Field(
        default=None, description="||x_k - x*||_A when the exact solution was supplied"
    )

    def within_bound(self) -> bool:
        return self.iteration_bound is None or self.iterations <= self.iteration_bound


class PropertyResult(BaseModel):
    """Outcome of one property over all instances of the verify suite."""

    name: str
    description: str = ""
    max_residual: float = 0.0
    tolerance: float
    instances: int = 0
    failures: list[str] = Field(default_factory=list)

    @property
    def passed(self) -> bool:
        return not self.failures and self.max_residual <= self.tolerance


class SuiteSummary(BaseModel):
    """All property results of one verify run."""

    seed: int
    instances: int
    properties: list[PropertyResult] = Field(default_factory=list)
    aborted: list[str] = Field(default_factory=list, description="Instances stopped by an error")

    @property
    def passed(self) -> bool:
        return not self.aborted and all(p.passed for p in self.properties)
