"""
Synthetic spatial Durbin panels with known parameters.

y_t = (I - rho w)^{-1} (X_t beta + w X_t theta + mu + nu_t + eps_t) for every
period t, with eps_it ~ N(0, sigma^2 v_it) and v_it = multiplier^2 on the
outlier cells (1 elsewhere).
"""

import logging
from dataclasses import dataclass
from typing import Any, Dict, List, Literal, Optional, Tuple

import numpy as np
import scipy.sparse as sp
from pydantic import BaseModel, field_validator, model_validator
from scipy.sparse.linalg import splu
from sklearn.datasets import make_blobs

from packages.core.errors import DimensionMismatch
from packages.panel.data import PanelData
from packages.weights.matrix import WeightMatrix

logger = logging.getLogger(__name__)


class DgpConfig(BaseModel):
    N: int = 200
    T: int = 6
    Q: int = 3
    beta: Optional[List[float]] = None
    theta: Optional[List[float]] = None
    rho: float = 0.3
    mu_scale: float = 1.0
    nu_scale: float = 1.0
    sigma: float = 1.0
    outlier_mask: Optional[List[List[bool]]] = None
    # used when no explicit mask is given
    outlier_fraction: float = 0.0
    outlier_multiplier: float = 10.0
    coords: Literal["uniform", "clustered"] = "uniform"
    n_clusters: int = 5
    seed: Optional[int] = None
    coord_seed: Optional[int] = None

    @field_validator("rho")
    @classmethod
    def _stable(cls, v: float) -> float:
        if not -1.0 < v < 1.0:
            raise ValueError("rho must lie in (-1, 1)")
        return v

    @field_validator("sigma", "outlier_multiplier")
    @classmethod
    def _positive(cls, v: float) -> float:
        if not v > 0:
            raise ValueError("must be positive")
        return v

    @field_validator("outlier_fraction")
    @classmethod
    def _fraction(cls, v: float) -> float:
        if not 0.0 <= v < 1.0:
            raise ValueError("outlier_fraction must lie in [0, 1)")
        return v

    @model_validator(mode="after")
    def _shapes(self) -> "DgpConfig":
        if self.N < 2 or self.T < 1 or self.Q < 1:
            raise ValueError("N must be at least 2, T and Q at least 1")
        for name in ("beta", "theta"):
            vec = getattr(self, name)
            if vec is not None and len(vec) != self.Q:
                raise ValueError(f"{name} has length {len(vec)}, expected Q={self.Q}")
        if self.outlier_mask is not None:
            mask = np.asarray(self.outlier_mask, dtype=bool)
            if mask.shape != (self.N, self.T):
                expected = (self.N, self.T)
                raise ValueError(f"outlier_mask has shape {mask.shape}, expected {expected}")
        return self

    def beta_vector(self) -> np.ndarray:
        return np.ones(self.Q) if self.beta is None else np.asarray(self.beta, dtype=float)

    def theta_vector(self) -> np.ndarray:
        return np.full(self.Q, 0.5) if self.theta is None else np.asarray(self.theta, dtype=float)


@dataclass(frozen=True, eq=False)
class DgpTruth:
    beta: np.ndarray
    theta: np.ndarray
    rho: float
    sigma: float
    mu: np.ndarray
    nu: np.ndarray
    v: np.ndarray  # N x T
    outlier_mask: np.ndarray  # N x T

    @property
    def sigma2(self) -> float:
        return self.sigma**2

    def to_dict(self) -> Dict[str, Any]:
        return {
            "beta": self.beta.tolist(),
            "theta": self.theta.tolist(),
            "rho": self.rho,
            "sigma": self.sigma,
            "sigma2": self.sigma2,
            "mu": self.mu.tolist(),
            "nu": self.nu.tolist(),
            "outlier_cells": [[int(i), int(t)] for i, t in zip(*np.nonzero(self.outlier_mask))],
        }


def region_labels(n: int) -> Tuple[str, ...]:
    return tuple(f"r{i + 1:04d}" for i in range(n))


def generate_coords(cfg: DgpConfig) -> np.ndarray:
    """N x 2 coordinates in the unit square, seeded apart from the panel draw."""
    seed = cfg.coord_seed
    if seed is None and cfg.seed is not None:
        seed = cfg.seed + 1
    if cfg.coords == "clustered":
        coords, _ = make_blobs(
            n_samples=cfg.N,
            n_features=2,
            centers=cfg.n_clusters,
            cluster_std=0.05,
            center_box=(0.0, 1.0),
            random_state=seed,
        )
        return coords
    return np.random.default_rng(seed).uniform(0.0, 1.0, size=(cfg.N, 2))


def _outlier_mask(cfg: DgpConfig, rng: np.random.Generator) -> np.ndarray:
    if cfg.outlier_mask is not None:
        return np.asarray(cfg.outlier_mask, dtype=bool)
    mask = np.zeros(cfg.N * cfg.T, dtype=bool)
    n_out = int(round(cfg.outlier_fraction * mask.size))
    if n_out:
        mask[rng.choice(mask.size, size=n_out, replace=False)] = True
    return mask.reshape(cfg.N, cfg.T)


def generate(
    cfg: DgpConfig,
    w: WeightMatrix,
    X: Optional[np.ndarray] = None,
    coords: Optional[np.ndarray] = None,
) -> Tuple[PanelData, np.ndarray, DgpTruth]:
    """
    Draw a panel from the spatial Durbin process on w.

    X may be supplied (N x T x Q) to hold the regressors fixed; coords default
    to generate_coords(cfg). The exact sparse solve is used per period.
    """
    if w.n != cfg.N:
        raise DimensionMismatch(f"Weight matrix has N={w.n}, config has N={cfg.N}")
    rng = np.random.default_rng(cfg.seed)
    n, t, q = cfg.N, cfg.T, cfg.Q
    beta, theta = cfg.beta_vector(), cfg.theta_vector()

    draw_x = rng.standard_normal((n, t, q))
    if X is None:
        X = draw_x
    X = np.asarray(X, dtype=float)
    if X.ndim == 2:
        X = X[:, :, np.newaxis]
    if X.shape != (n, t, q):
        raise DimensionMismatch(f"X has shape {X.shape}, expected ({n}, {t}, {q})")

    mu = cfg.mu_scale * rng.standard_normal(n)
    nu = cfg.nu_scale * rng.standard_normal(t)
    mask = _outlier_mask(cfg, rng)
    v = np.where(mask, cfg.outlier_multiplier**2, 1.0)
    eps = cfg.sigma * np.sqrt(v) * rng.standard_normal((n, t))

    solver = splu((sp.identity(n, format="csc") - cfg.rho * w.matrix).tocsc())
    y = np.empty((n, t))
    for period in range(t):
        xt = X[:, period, :]
        wx = np.asarray(w.matrix @ xt)
        signal = xt @ beta + wx @ theta + mu + nu[period] + eps[:, period]
        y[:, period] = solver.solve(signal)

    if coords is None:
        coords = generate_coords(cfg)

    panel = PanelData(
        region_ids=region_labels(n),
        period_ids=tuple(str(p + 1) for p in range(t)),
        y=y,
        X=X,
        var_names=tuple(f"x{j + 1}" for j in range(q)),
    )
    truth = DgpTruth(
        beta=beta, theta=theta, rho=cfg.rho, sigma=cfg.sigma, mu=mu, nu=nu, v=v, outlier_mask=mask
    )
    logger.info(f"Generated panel N={n}, T={t}, Q={q}, rho={cfg.rho}, outliers={int(mask.sum())}")
    return panel, coords, truth
