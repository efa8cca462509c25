import numpy as np

from packages.core.errors import DimensionMismatch
from packages.weights.matrix import WeightMatrix


def spatial_lag(w: WeightMatrix, z: np.ndarray) -> np.ndarray:
    """
    Apply w to every period (and variable) column of z.

    Accepts an N-vector, an N x T matrix or an N x T x Q array and returns the
    same shape; this is (I_T kron w) acting on the stacked data.
    """
    z = np.asarray(z, dtype=float)
    if z.shape[0] != w.n:
        raise DimensionMismatch(f"Weight matrix is {w.n} x {w.n}, data has {z.shape[0]} regions")
    flat = z.reshape(w.n, -1)
    return np.asarray(w.matrix @ flat).reshape(z.shape)
