"""Counter-based random streams.

Every random draw in the package comes from a Philox generator keyed by
(seed, stream). Streams are independent, so work split across threads draws
exactly the numbers a serial run would.
"""

import numpy as np

DEFAULT_SEED = 0xF1C75

# Fixed chunk size so serial and threaded sampling see the same streams
SAMPLE_CHUNK = 256

# Stream identifiers
STREAM_CONDITION_I = 1
STREAM_CONDITION_II = 2
STREAM_MINIMAX = 3
STREAM_INSTANCES = 4
STREAM_MINIMALITY = 5


def stream(seed: int, stream_id: int, chunk: int = 0) -> np.random.Generator:
    """Generator for one (seed, stream, chunk) key."""
    key = np.array([seed % 2**64, (stream_id << 32) | chunk], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))


def chunk_sizes(total: int, chunk: int = SAMPLE_CHUNK) -> list[int]:
    """Split ``total`` samples into fixed-size chunks (last one shorter)."""
    sizes = [chunk] * (total // chunk)
    if total % chunk:
        sizes.append(total % chunk)
    return sizes


def gaussian_columns(seed: int, stream_id: int, chunk: int, dim: int, count: int) -> np.ndarray:
    """Standard normal samples as columns, shape (dim, count)."""
    return stream(seed, stream_id, chunk).standard_normal((dim, count))
