"""Key-value text reports and CSV residual histories.

Reports are ``key = value`` lines. Floats carry 17 significant digits, nested
mappings use dotted keys and lists are comma separated, so files diff cleanly
and parse back exactly.
"""

import hashlib
import io

import numpy as np
import pandas as pd
from pydantic import BaseModel

from .exceptions import StorageError
from .linalg import DenseMatrix
from .models import Decomposition, SolveReport, SpectralCertificate, SuiteSummary


def format_value(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, (float, np.floating)):
        return f"{float(value):.16e}"
    if isinstance(value, (list, tuple)):
        return ", ".join(format_value(v) for v in value)
    if value is None:
        return "none"
    return str(value)


def _flatten(prefix: str, value, lines: list[str]) -> None:
    if isinstance(value, BaseModel):
        value = value.model_dump()
    if isinstance(value, dict):
        for key, item in value.items():
            _flatten(f"{prefix}.{key}" if prefix else str(key), item, lines)
    else:
        lines.append(f"{prefix} = {format_value(value)}")


def format_report(title: str, fields: dict) -> str:
    """Render a mapping as a commented, dotted key-value report."""
    lines = [f"# {title}"]
    _flatten("", fields, lines)
    return "\n".join(lines) + "\n"


def parse_report(text: str) -> dict[str, str]:
    """Read a key-value report back into raw string values.

    Raises:
        StorageError: On a line that is neither a comment nor ``key = value``.
    """
    values = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        key, sep, value = stripped.partition("=")
        if not sep:
            raise StorageError(f"report line {lineno} is not 'key = value': {line!r}")
        values[key.strip()] = value.strip()
    return values


def certificate_report(cert: SpectralCertificate) -> str:
    fields = cert.model_dump(exclude={"witness_minus", "witness_plus"})
    return format_report("fictitious space certificate", fields)


def solve_report(report: SolveReport) -> str:
    fields = report.model_dump(exclude={"residual_history", "energy_error_history"})
    fields["final_residual"] = report.residual_history[-1] if report.residual_history else None
    return format_report("pcg solve report", fields)


def suite_report(summary: SuiteSummary) -> str:
    fields = {"seed": summary.seed, "instances": summary.instances, "passed": summary.passed}
    for prop in summary.properties:
        fields[prop.name] = {
            "passed": prop.passed,
            "max_residual": prop.max_residual,
            "tolerance": prop.tolerance,
            "instances": prop.instances,
            "failures": len(prop.failures),
        }
    fields["aborted"] = summary.aborted or None
    return format_report("property suite summary", fields)


def residual_history_csv(report: SolveReport) -> str:
    """CSV with columns (iteration, relative_residual)."""
    frame = pd.DataFrame(
        {
            "iteration": range(len(report.residual_history)),
            "relative_residual": report.residual_history,
        }
    )
    return frame.to_csv(index=False, float_format="%.17g")


def read_residual_history(text: str) -> list[float]:
    frame = pd.read_csv(io.StringIO(text))
    return frame["relative_residual"].astype(float).tolist()


def instance_hash(a: DenseMatrix, decomposition: Decomposition) -> str:
    """SHA-256 over the matrix shape, its float64 bytes and the decomposition text."""
    digest = hashlib.sha256()
    digest.update(f"{a.rows}x{a.cols}\n".encode())
    digest.update(np.ascontiguousarray(a.data, dtype=np.float64).tobytes())
    digest.update(decomposition.to_text().encode())
    return digest.hexdigest()
