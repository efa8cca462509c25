"""
Direct, indirect and total effects at a single parameter point.

For regressor q the partial-derivative matrix is
S_q = (I - rho w)^{-1} (I beta_q + w theta_q). Direct is the mean diagonal
element, total the mean row sum, indirect the difference. W is block
diagonal over periods, so one N x N block is enough.
"""

import logging
from dataclasses import dataclass
from typing import Literal, Optional, Sequence, Tuple

import numpy as np

from packages.core.errors import OutOfSupport, SeriesNotConverged
from packages.weights.matrix import WeightMatrix

logger = logging.getLogger(__name__)

Method = Literal["dense", "series"]

DENSE_MAX_N = 2000
DEFAULT_TOLERANCE = 1e-10
MAX_SERIES_ORDER = 2000


@dataclass(frozen=True, eq=False)
class EffectsAtPoint:
    direct: np.ndarray
    indirect: np.ndarray
    total: np.ndarray
    var_names: Tuple[str, ...] = ()


def trace_vector(w: WeightMatrix, m: int) -> np.ndarray:
    """tr(w^j) for j = 0..m by repeated sparse application to the identity."""
    if m < 1:
        raise ValueError("m must be at least 1")
    traces = np.empty(m + 1)
    traces[0] = w.n
    power = np.eye(w.n)
    for j in range(1, m + 1):
        power = np.asarray(w.matrix @ power)
        traces[j] = np.trace(power)
    return traces


def tail_bound(rho: float, beta: np.ndarray, theta: np.ndarray, m: int) -> float:
    """Geometric bound on the terms dropped after order m."""
    scale = float(np.max(np.abs(beta) + np.abs(theta))) if np.size(beta) else 0.0
    r = abs(rho)
    return r ** (m + 1) / (1.0 - r) * scale


def required_order(
    rho: float, beta: np.ndarray, theta: np.ndarray, tol: float = DEFAULT_TOLERANCE
) -> int:
    """Smallest m >= 1 whose tail bound is below tol."""
    r = abs(rho)
    scale = float(np.max(np.abs(beta) + np.abs(theta))) if np.size(beta) else 0.0
    if r == 0.0 or scale == 0.0:
        return 1
    # r^(m+1) < tol (1 - r) / scale
    m = int(np.ceil(np.log(tol * (1.0 - r) / scale) / np.log(r))) - 1
    m = max(m, 1)
    while tail_bound(rho, beta, theta, m) >= tol:
        m += 1
    return m


def _check_rho(rho: float):
    if not -1.0 < rho < 1.0:
        raise OutOfSupport(rho)


def _dense_effects(beta, theta, rho, w: WeightMatrix) -> Tuple[np.ndarray, np.ndarray]:
    if w.n > DENSE_MAX_N:
        raise ValueError(f"Dense effects are limited to N <= {DENSE_MAX_N}, got N={w.n}")
    wd = w.to_dense()
    inv = np.linalg.solve(np.eye(w.n) - rho * wd, np.eye(w.n))
    inv_w = inv @ wd
    n = w.n
    direct = (beta * np.trace(inv) + theta * np.trace(inv_w)) / n
    total = (beta * inv.sum() + theta * inv_w.sum()) / n
    return direct, total


def effects_from_traces(
    beta: np.ndarray, theta: np.ndarray, rho: float, traces: np.ndarray, m: int
) -> Tuple[np.ndarray, np.ndarray]:
    """Series direct effect through order m; total from the row-sum identity w^j 1 = 1."""
    n = traces[0]
    powers = rho ** np.arange(m + 1)
    tr_inv = powers @ traces[: m + 1]
    tr_inv_w = powers @ traces[1 : m + 2]
    direct = (beta * tr_inv + theta * tr_inv_w) / n
    total = (beta + theta) / (1.0 - rho)
    return direct, total


def effects_at(
    beta: Sequence[float],
    theta: Sequence[float],
    rho: float,
    w: WeightMatrix,
    method: Method = "dense",
    m: Optional[int] = None,
    tol: float = DEFAULT_TOLERANCE,
    var_names: Sequence[str] = (),
    traces: Optional[np.ndarray] = None,
) -> EffectsAtPoint:
    beta = np.atleast_1d(np.asarray(beta, dtype=float))
    theta = np.atleast_1d(np.asarray(theta, dtype=float))
    if beta.shape != theta.shape:
        raise ValueError(f"beta {beta.shape} and theta {theta.shape} differ in shape")
    rho = float(rho)
    _check_rho(rho)

    if method == "dense":
        direct, total = _dense_effects(beta, theta, rho, w)
    elif method == "series":
        needed = required_order(rho, beta, theta, tol)
        if m is None:
            m = needed
            if m > MAX_SERIES_ORDER:
                bound = tail_bound(rho, beta, theta, MAX_SERIES_ORDER)
                raise SeriesNotConverged(MAX_SERIES_ORDER, m, bound)
        elif m < needed:
            raise SeriesNotConverged(m, needed, tail_bound(rho, beta, theta, m))
        if traces is None or traces.size < m + 2:
            traces = trace_vector(w, m + 1)
        direct, total = effects_from_traces(beta, theta, rho, traces, m)
    else:
        raise ValueError(f"Unknown effects method: {method}")

    return EffectsAtPoint(
        direct=direct, indirect=total - direct, total=total, var_names=tuple(var_names)
    )
