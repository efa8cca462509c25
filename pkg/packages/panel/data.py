"""
Balanced N x T panel container
"""

from dataclasses import dataclass, field, replace
from typing import Optional, Tuple

import numpy as np

from packages.core.errors import DimensionMismatch, SchemaError
from packages.panel.stacking import stack


def _frozen(arr: np.ndarray) -> np.ndarray:
    out = np.array(arr, dtype=float, copy=True)
    out.setflags(write=False)
    return out


@dataclass(frozen=True, eq=False)
class PanelData:
    """
    Balanced panel of a dependent variable and Q regressors.

    y is N x T (regions x periods), X is N x T x Q. Arrays are copied and
    made read-only on construction; transformations return new panels.
    """
    region_ids: Tuple[str, ...]
    period_ids: Tuple[str, ...]
    y: np.ndarray
    X: np.ndarray
    var_names: Tuple[str, ...]
    demeaned: bool = False
    scaled: Tuple[str, ...] = field(default_factory=tuple)

    def __post_init__(self):
        object.__setattr__(self, "region_ids", tuple(str(r) for r in self.region_ids))
        object.__setattr__(self, "period_ids", tuple(str(t) for t in self.period_ids))
        object.__setattr__(self, "var_names", tuple(str(v) for v in self.var_names))
        object.__setattr__(self, "scaled", tuple(self.scaled))
        y = _frozen(self.y)
        X = _frozen(self.X)
        if X.ndim == 2:
            X = _frozen(X[:, :, np.newaxis])
        object.__setattr__(self, "y", y)
        object.__setattr__(self, "X", X)

        n, t = len(self.region_ids), len(self.period_ids)
        if y.shape != (n, t):
            raise DimensionMismatch(f"y has shape {y.shape}, expected ({n}, {t})")
        if X.ndim != 3 or X.shape[:2] != (n, t):
            raise DimensionMismatch(f"X has shape {X.shape}, expected ({n}, {t}, Q)")
        if X.shape[2] != len(self.var_names):
            raise DimensionMismatch(
                f"X has {X.shape[2]} regressors but {len(self.var_names)} names were given"
            )
        if X.shape[2] < 1:
            raise SchemaError("At least one regressor is required")
        if len(set(self.region_ids)) != n:
            raise SchemaError("region_ids must be unique")
        if len(set(self.period_ids)) != t:
            raise SchemaError("period_ids must be unique")
        if not (np.all(np.isfinite(y)) and np.all(np.isfinite(X))):
            raise SchemaError("Panel values must be finite")

    @property
    def N(self) -> int:
        return len(self.region_ids)

    @property
    def T(self) -> int:
        return len(self.period_ids)

    @property
    def Q(self) -> int:
        return len(self.var_names)

    def stacked_y(self) -> np.ndarray:
        """NT-vector, time as the slow index."""
        return stack(self.y)

    def stacked_X(self) -> np.ndarray:
        """NT x Q matrix, time as the slow index."""
        return stack(self.X)

    def with_values(
        self,
        y: Optional[np.ndarray] = None,
        X: Optional[np.ndarray] = None,
        **changes,
    ) -> "PanelData":
        return replace(
            self,
            y=self.y if y is None else y,
            X=self.X if X is None else X,
            **changes,
        )
