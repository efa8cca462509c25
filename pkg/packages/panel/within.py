"""
Two-way within transformation.

Region and period fixed effects are absorbed by demeaning instead of being
sampled: z_it - mean_i. - mean_.t + mean_.. for every variable.
"""

import numpy as np

from packages.core.errors import AlreadyDemeaned, DimensionMismatch
from packages.panel.data import PanelData


def within_transform(z: np.ndarray) -> np.ndarray:
    """
    Apply the two-way within formula to an N x T or N x T x Q array.

    Axis 0 is regions, axis 1 is periods; any trailing axis holds variables.
    """
    z = np.asarray(z, dtype=float)
    if z.ndim not in (2, 3):
        raise DimensionMismatch(f"Expected an N x T or N x T x Q array, got shape {z.shape}")
    region_mean = z.mean(axis=1, keepdims=True)
    period_mean = z.mean(axis=0, keepdims=True)
    grand_mean = z.mean(axis=(0, 1), keepdims=True)
    return z - region_mean - period_mean + grand_mean


def demean_time(z: np.ndarray) -> np.ndarray:
    """Subtract period means only (one-way, time effects)."""
    z = np.asarray(z, dtype=float)
    return z - z.mean(axis=0, keepdims=True)


def demean_two_way(p: PanelData) -> PanelData:
    """Return a demeaned copy of the panel; the input panel is untouched."""
    if p.demeaned:
        raise AlreadyDemeaned("Panel has already been demeaned")
    return p.with_values(y=within_transform(p.y), X=within_transform(p.X), demeaned=True)


def is_demeaned(z: np.ndarray, atol: float = 1e-10) -> bool:
    """Grand, region and period means all vanish to within atol."""
    z = np.asarray(z, dtype=float)
    return bool(
        np.all(np.abs(z.mean(axis=1)) <= atol)
        and np.all(np.abs(z.mean(axis=0)) <= atol)
        and np.all(np.abs(z.mean(axis=(0, 1))) <= atol)
    )
