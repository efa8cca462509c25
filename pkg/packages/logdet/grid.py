"""
Precomputed ln|I_N - rho w| over a dense rho grid.

The M-H step for rho and the marginal-likelihood quadrature read the log
determinant from this grid instead of factorizing per proposal. The NT x NT
log determinant is T times the N x N one.
"""

import logging
from dataclasses import dataclass
from functools import cached_property
from typing import Literal, Sequence

import numpy as np
import scipy.linalg
import scipy.sparse as sp
from joblib import Parallel, delayed
from scipy.interpolate import CubicSpline
from scipy.sparse.linalg import splu

from packages.core.errors import OutOfSupport, SingularAtGridPoint
from packages.weights.matrix import WeightMatrix

logger = logging.getLogger(__name__)

Method = Literal["sparse-lu", "dense", "eigen"]

RHO_BOUND = 0.999
MIN_NPOINTS = 51
DENSE_MAX_N = 2000
PERTURBATION = 1e-8


@dataclass(frozen=True, eq=False)
class LogDetGrid:
    rho_grid: np.ndarray
    values: np.ndarray
    method: str
    n: int
    w_hash: str

    def __post_init__(self):
        for name in ("rho_grid", "values"):
            arr = np.array(getattr(self, name), dtype=float, copy=True)
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    @cached_property
    def _remainder_spline(self) -> CubicSpline:
        # a row-stochastic w always has eigenvalue 1, so ln(1 - rho) is split off
        # before interpolating; the remainder is much smoother near rho -> 1
        remainder = self.values - np.log1p(-self.rho_grid)
        return CubicSpline(self.rho_grid, remainder)

    def at_nodes(self) -> np.ndarray:
        return self.values


def rho_grid(npoints: int) -> np.ndarray:
    """Ascending grid on [-0.999, 0.999] that contains 0 exactly."""
    if npoints < MIN_NPOINTS:
        raise ValueError(f"npoints must be at least {MIN_NPOINTS}, got {npoints}")
    grid = np.linspace(-RHO_BOUND, RHO_BOUND, npoints)
    if npoints % 2 == 1:
        grid[npoints // 2] = 0.0
    else:
        grid = np.sort(np.append(grid, 0.0))
    return grid


def _lu_logdet(a: sp.csc_matrix, identity: sp.csc_matrix, rho: float) -> float:
    lu = splu((identity - rho * a).tocsc())
    # L has a unit diagonal; |I - rho w| > 0 on the stability interval
    return float(np.sum(np.log(np.abs(lu.U.diagonal()))))


def _lu_block(a: sp.csc_matrix, rhos: Sequence[float]) -> np.ndarray:
    identity = sp.identity(a.shape[0], format="csc")
    out = np.empty(len(rhos))
    for i, rho in enumerate(rhos):
        try:
            out[i] = _lu_logdet(a, identity, rho)
        except RuntimeError:
            logger.warning(f"Singular LU factor at rho={rho:.6f}; retrying at rho+{PERTURBATION}")
            try:
                out[i] = _lu_logdet(a, identity, rho + PERTURBATION)
            except RuntimeError as e:
                raise SingularAtGridPoint(rho) from e
    return out


def _dense_values(w_dense: np.ndarray, grid: np.ndarray) -> np.ndarray:
    identity = np.eye(w_dense.shape[0])
    out = np.empty(grid.size)
    for i, rho in enumerate(grid):
        sign, logabs = np.linalg.slogdet(identity - rho * w_dense)
        if sign == 0 or not np.isfinite(logabs):
            sign, logabs = np.linalg.slogdet(identity - (rho + PERTURBATION) * w_dense)
            if sign == 0 or not np.isfinite(logabs):
                raise SingularAtGridPoint(float(rho))
        out[i] = logabs
    return out


def _eigen_values(w_dense: np.ndarray, grid: np.ndarray) -> np.ndarray:
    lam = scipy.linalg.eigvals(w_dense)
    # imaginary parts cancel over conjugate pairs
    return np.log(1.0 - np.outer(grid, lam)).sum(axis=1).real


def build_logdet_grid(
    w: WeightMatrix,
    npoints: int = 2001,
    method: Method = "sparse-lu",
    n_jobs: int = 1,
) -> LogDetGrid:
    grid = rho_grid(npoints)
    if method in ("dense", "eigen") and w.n > DENSE_MAX_N:
        raise ValueError(f"Method '{method}' is limited to N <= {DENSE_MAX_N}, got N={w.n}")

    logger.info(f"Building log-det grid: N={w.n}, npoints={grid.size}, method={method}")
    if method == "sparse-lu":
        a = w.matrix.tocsc()
        blocks = np.array_split(grid, max(1, n_jobs if n_jobs > 0 else 8))
        parts = Parallel(n_jobs=n_jobs)(delayed(_lu_block)(a, block) for block in blocks)
        values = np.concatenate(parts)
    elif method == "dense":
        values = _dense_values(w.to_dense(), grid)
    elif method == "eigen":
        values = _eigen_values(w.to_dense(), grid)
    else:
        raise ValueError(f"Unknown log-det method: {method}")

    values[grid == 0.0] = 0.0
    if not np.all(np.isfinite(values)):
        bad = grid[~np.isfinite(values)]
        raise SingularAtGridPoint(float(bad[0]))
    return LogDetGrid(rho_grid=grid, values=values, method=method, n=w.n, w_hash=w.content_hash)


def logdet_at(g: LogDetGrid, rho: float) -> float:
    """ln|I_N - rho w| by cubic interpolation; grid nodes return the stored value."""
    rho = float(rho)
    if not -1.0 < rho < 1.0:
        raise OutOfSupport(rho)
    idx = int(np.searchsorted(g.rho_grid, rho))
    if idx < g.rho_grid.size and g.rho_grid[idx] == rho:
        return float(g.values[idx])
    return float(g._remainder_spline(rho)) + float(np.log1p(-rho))


def logdet_many(g: LogDetGrid, rhos: np.ndarray) -> np.ndarray:
    """Vectorised logdet_at over an array of rho values."""
    rhos = np.asarray(rhos, dtype=float)
    if np.any(np.abs(rhos) >= 1.0):
        raise OutOfSupport(float(rhos[np.abs(rhos) >= 1.0][0]))
    out = g._remainder_spline(rhos) + np.log1p(-rhos)
    idx = np.clip(np.searchsorted(g.rho_grid, rhos), 0, g.rho_grid.size - 1)
    on_node = g.rho_grid[idx] == rhos
    out[on_node] = g.values[idx[on_node]]
    return out
