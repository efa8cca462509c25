"""
Prior and sampler settings
"""

from dataclasses import dataclass
from typing import List, Optional, Tuple

import numpy as np
from pydantic import BaseModel, field_validator, model_validator

from packages.core.errors import DimensionMismatch


@dataclass(frozen=True, eq=False)
class PriorArrays:
    """PriorSpec resolved for a 2Q-dimensional delta."""
    c: np.ndarray
    C: np.ndarray
    C_inv: np.ndarray
    r: float
    a: float
    b: float


class PriorSpec(BaseModel):
    """
    Normal prior on delta = (beta, theta), chi-square(r) prior on the variance
    scalars and inverse-gamma(a, b) on sigma2.

    c and C may be given in full; otherwise they default to c_value * 1 and
    C_scale * I at whatever dimension the model has.
    """
    c: Optional[List[float]] = None
    C: Optional[List[List[float]]] = None
    c_value: float = 1.0
    C_scale: float = 0.001
    r: float = 5.0
    a: float = 0.0
    b: float = 0.0

    @field_validator("r")
    @classmethod
    def _r_positive(cls, v: float) -> float:
        if not v > 0:
            raise ValueError("r must be positive")
        return v

    @field_validator("a", "b")
    @classmethod
    def _non_negative(cls, v: float) -> float:
        if v < 0:
            raise ValueError("inverse-gamma hyperparameters must be non-negative")
        return v

    @field_validator("C_scale")
    @classmethod
    def _scale_positive(cls, v: float) -> float:
        if not v > 0:
            raise ValueError("C_scale must be positive")
        return v

    @field_validator("C")
    @classmethod
    def _spd(cls, v: Optional[List[List[float]]]) -> Optional[List[List[float]]]:
        if v is None:
            return v
        m = np.asarray(v, dtype=float)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ValueError("C must be a square matrix")
        if not np.allclose(m, m.T, rtol=0.0, atol=1e-12 * max(1.0, np.abs(m).max())):
            raise ValueError("C must be symmetric")
        try:
            np.linalg.cholesky(m)
        except np.linalg.LinAlgError as e:
            raise ValueError("C must be positive definite") from e
        return v

    @model_validator(mode="after")
    def _dimensions_agree(self) -> "PriorSpec":
        if self.c is not None and self.C is not None and len(self.c) != len(self.C):
            raise ValueError(f"c has length {len(self.c)} but C is {len(self.C)} x {len(self.C)}")
        return self

    def arrays(self, dim: int) -> PriorArrays:
        c = np.full(dim, self.c_value) if self.c is None else np.asarray(self.c, dtype=float)
        C = self.C_scale * np.eye(dim) if self.C is None else np.asarray(self.C, dtype=float)
        if c.shape != (dim,) or C.shape != (dim, dim):
            raise DimensionMismatch(
                f"Prior has dimension {c.shape[0]}, model has 2Q = {dim} coefficients"
            )
        return PriorArrays(c=c, C=C, C_inv=np.linalg.inv(C), r=self.r, a=self.a, b=self.b)


class McmcConfig(BaseModel):
    ndraw: int = 4000
    nburn: int = 500
    seed: Optional[int] = None
    rho_step: float = 0.1
    adapt_target: Tuple[float, float] = (0.4, 0.6)
    heteroscedastic: bool = True
    # Hastings correction for proposals redrawn inside (-1, 1)
    truncation_correction: bool = False
    debug: bool = False
    log_every: int = 500

    @field_validator("rho_step")
    @classmethod
    def _step_positive(cls, v: float) -> float:
        if not v > 0:
            raise ValueError("rho_step must be positive")
        return v

    @field_validator("adapt_target")
    @classmethod
    def _band(cls, v: Tuple[float, float]) -> Tuple[float, float]:
        lo, hi = v
        if not 0.0 < lo <= hi < 1.0:
            raise ValueError("adapt_target must satisfy 0 < low <= high < 1")
        return v

    @model_validator(mode="after")
    def _burn_below_draws(self) -> "McmcConfig":
        if self.nburn < 0 or self.ndraw < 1:
            raise ValueError("ndraw must be positive and nburn non-negative")
        if self.nburn >= self.ndraw:
            raise ValueError(f"nburn ({self.nburn}) must be below ndraw ({self.ndraw})")
        return self

    @property
    def n_retained(self) -> int:
        return self.ndraw - self.nburn

    @property
    def target_acceptance(self) -> float:
        return 0.5 * (self.adapt_target[0] + self.adapt_target[1])
