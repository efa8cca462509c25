"""
Content hashes for cache keys, stale-draw detection and run manifests
"""

import hashlib
from pathlib import Path
from typing import Union

import numpy as np


def compute_hash(text: str) -> str:
    """SHA256 hex digest of a text string."""
    return hashlib.sha256(text.encode("utf-8")).hexdigest()


def array_hash(*arrays: np.ndarray) -> str:
    """
    SHA256 over the dtype, shape and raw bytes of each array.

    Arrays are made C-contiguous first so logically equal arrays hash equal.
    """
    h = hashlib.sha256()
    for arr in arrays:
        a = np.ascontiguousarray(arr)
        h.update(str(a.dtype).encode())
        h.update(str(a.shape).encode())
        h.update(a.tobytes())
    return h.hexdigest()


def file_hash(path: Union[str, Path], chunk_size: int = 1 << 20) -> str:
    """SHA256 of a file's bytes, read in chunks."""
    h = hashlib.sha256()
    with open(path, "rb") as f:
        while True:
            chunk = f.read(chunk_size)
            if not chunk:
                break
            h.update(chunk)
    return h.hexdigest()
