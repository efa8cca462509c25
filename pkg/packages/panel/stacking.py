"""
NT stacking with time as the slow index: element t*N + i holds region i in period t.
"""

import numpy as np

from packages.core.errors import DimensionMismatch


def stack(z: np.ndarray) -> np.ndarray:
    """N x T -> NT vector, or N x T x Q -> NT x Q matrix."""
    z = np.asarray(z)
    if z.ndim == 2:
        return z.T.reshape(-1).copy()
    if z.ndim == 3:
        n, t, q = z.shape
        return z.transpose(1, 0, 2).reshape(n * t, q).copy()
    raise DimensionMismatch(f"Cannot stack an array of shape {z.shape}")


def unstack(v: np.ndarray, n: int, t: int) -> np.ndarray:
    """Inverse of stack: NT -> N x T, NT x Q -> N x T x Q."""
    v = np.asarray(v)
    if v.shape[0] != n * t:
        raise DimensionMismatch(f"Expected {n * t} stacked rows, got {v.shape[0]}")
    if v.ndim == 1:
        return v.reshape(t, n).T.copy()
    if v.ndim == 2:
        return v.reshape(t, n, v.shape[1]).transpose(1, 0, 2).copy()
    raise DimensionMismatch(f"Cannot unstack an array of shape {v.shape}")
