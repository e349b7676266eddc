"""Matrix Market reader and writer for dense operators.

Dense matrices are written in ``array`` format with 17 significant digits;
symmetric matrices store the lower triangle only. The reader also accepts
``coordinate`` files and densifies them.
"""

import logging
import os
import tempfile
from pathlib import Path

import numpy as np
import scipy.io
import scipy.sparse

from .exceptions import StorageError
from .linalg import DenseMatrix, DenseSymMatrix

logger = logging.getLogger(__name__)

# 17 significant digits round-trip any float64 through decimal text
MM_PRECISION = 17


def write_matrix(path: str | Path, matrix: DenseMatrix, comment: str = "") -> Path:
    """Atomically write a matrix in Matrix Market array format.

    Args:
        path: Target file (conventionally ``*.mtx``).
        matrix: Matrix to write; ``DenseSymMatrix`` is stored as symmetric.
        comment: Optional header comment.

    Returns:
        The written path.

    Raises:
        StorageError: If the file cannot be written.
    """
    path = Path(path)
    symmetry = "symmetric" if isinstance(matrix, DenseSymMatrix) else "general"
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        # Suffix keeps scipy from appending its own ".mtx"
        fd, tmp_name = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".mtx")
        os.close(fd)
        try:
            scipy.io.mmwrite(
                tmp_name,
                np.array(matrix.data),
                comment=comment,
                field="real",
                precision=MM_PRECISION,
                symmetry=symmetry,
            )
            os.replace(tmp_name, path)
        finally:
            if os.path.exists(tmp_name):
                os.unlink(tmp_name)
    except (OSError, ValueError) as e:
        raise StorageError(f"Failed to write matrix to {path}: {e}") from e
    logger.info("[MatrixMarket] wrote %s %s matrix to %s", matrix.shape, symmetry, path)
    return path


def _read_array(path: Path) -> np.ndarray:
    if not path.exists():
        raise StorageError(f"Matrix file not found: {path}")
    try:
        raw = scipy.io.mmread(str(path))
    except (OSError, ValueError) as e:
        raise StorageError(f"Failed to read Matrix Market file {path}: {e}") from e
    if scipy.sparse.issparse(raw):
        raw = raw.toarray()
    return np.asarray(raw, dtype=float)


def read_matrix(path: str | Path) -> DenseMatrix:
    """Read a general dense matrix.

    Raises:
        StorageError: If the file is missing or malformed.
    """
    return DenseMatrix(_read_array(Path(path)))


def read_sym_matrix(path: str | Path) -> DenseSymMatrix:
    """Read a symmetric matrix (symmetric or general storage).

    Raises:
        StorageError: If the file is missing or malformed.
        NotSymmetric: If general storage holds a non-symmetric matrix.
    """
    return DenseSymMatrix(_read_array(Path(path)))
