"""
Stacked response and regressor block for the spatial Durbin panel
"""

from dataclasses import dataclass
from typing import List, Tuple

import numpy as np

from packages.core.errors import DimensionMismatch, NotDemeaned
from packages.panel.data import PanelData
from packages.panel.stacking import stack
from packages.panel.within import within_transform
from packages.weights.lag import spatial_lag
from packages.weights.matrix import WeightMatrix


@dataclass(frozen=True, eq=False)
class DesignData:
    y: np.ndarray  # NT
    wy: np.ndarray  # NT
    Z: np.ndarray  # NT x 2Q, [X, WX]
    var_names: Tuple[str, ...]
    n: int
    t: int

    @property
    def q(self) -> int:
        return len(self.var_names)

    def param_names(self) -> List[str]:
        return (
            [f"beta_{v}" for v in self.var_names]
            + [f"theta_{v}" for v in self.var_names]
            + ["rho", "sigma2"]
        )


def prepare_design(p: PanelData, w: WeightMatrix) -> DesignData:
    """
    Lag the demeaned panel and stack it, time as the slow index.

    Lags are taken on the demeaned data and re-demeaned; because w is
    row-stochastic and constant over time this equals demeaning the raw lags.
    """
    if not p.demeaned:
        raise NotDemeaned("The sampler expects a two-way demeaned panel")
    if w.n != p.N:
        raise DimensionMismatch(f"Weight matrix has N={w.n}, panel has N={p.N}")

    wy = within_transform(spatial_lag(w, p.y))
    wx = within_transform(spatial_lag(w, p.X))
    Z = np.hstack([stack(p.X), stack(wx)])
    return DesignData(
        y=stack(p.y), wy=stack(wy), Z=Z, var_names=p.var_names, n=p.N, t=p.T
    )
