"""
Full conditionals of the heteroscedastic spatial Durbin panel model.

delta, sigma2 and the variance scalars v are drawn by Gibbs steps; rho by a
random-walk Metropolis-Hastings step whose proposals are redrawn until they
fall inside (-1, 1).
"""

import logging
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np
from scipy.linalg import cho_solve, solve_triangular
from scipy.stats import norm

from packages.core.errors import DegenerateResidual, GridMissing, NonPosDefPrecision
from packages.logdet.grid import LogDetGrid, logdet_at
from packages.sampler.config import PriorArrays

logger = logging.getLogger(__name__)

MAX_PROPOSALS = 100_000


@dataclass
class SamplerState:
    """Current parameter values plus the residual e = y - rho*Wy - Z delta (stacked)."""
    delta: np.ndarray
    sigma2: float
    rho: float
    v: np.ndarray
    e: np.ndarray

    def residual(self, y: np.ndarray, wy: np.ndarray, Z: np.ndarray) -> np.ndarray:
        return y - self.rho * wy - Z @ self.delta

    def refresh(self, y: np.ndarray, wy: np.ndarray, Z: np.ndarray):
        self.e = self.residual(y, wy, Z)

    def check_residual(self, y: np.ndarray, wy: np.ndarray, Z: np.ndarray, atol: float = 1e-10):
        fresh = self.residual(y, wy, Z)
        gap = float(np.max(np.abs(fresh - self.e))) if fresh.size else 0.0
        if gap > atol * max(1.0, float(np.max(np.abs(fresh)))):
            raise AssertionError(f"Cached residual drifted from parameters by {gap:.3e}")


def delta_conditional(
    state: SamplerState, Z: np.ndarray, Ay: np.ndarray, prior: PriorArrays
) -> Tuple[np.ndarray, np.ndarray]:
    """Mean and lower Cholesky factor of the conditional precision of delta."""
    Zw = Z / state.v[:, np.newaxis]
    precision = (Z.T @ Zw) / state.sigma2 + prior.C_inv
    rhs = (Zw.T @ Ay) / state.sigma2 + prior.C_inv @ prior.c
    try:
        lower = np.linalg.cholesky(precision)
    except np.linalg.LinAlgError as e:
        raise NonPosDefPrecision(
            "Conditional precision of delta is not positive definite; check Z for collinearity"
        ) from e
    mean = cho_solve((lower, True), rhs)
    return mean, lower


def sample_delta(
    state: SamplerState,
    Z: np.ndarray,
    Ay: np.ndarray,
    prior: PriorArrays,
    rng: np.random.Generator,
) -> np.ndarray:
    mean, lower = delta_conditional(state, Z, Ay, prior)
    # x = L'^{-1} z has covariance (L L')^{-1}
    z = rng.standard_normal(mean.shape[0])
    return mean + solve_triangular(lower.T, z, lower=False)


def sample_sigma2(state: SamplerState, prior: PriorArrays, rng: np.random.Generator) -> float:
    quad = float(np.sum(state.e**2 / state.v))
    shape = prior.a + 0.5 * state.e.size
    scale = prior.b + 0.5 * quad
    if not scale > 0:
        raise DegenerateResidual("e'V^{-1}e = 0 with b = 0: the model fits the data exactly")
    return scale / rng.gamma(shape)


def sample_v(state: SamplerState, r: float, rng: np.random.Generator) -> np.ndarray:
    chi = rng.chisquare(r + 1.0, size=state.e.size)
    zero = chi <= 0.0
    while np.any(zero):
        chi[zero] = rng.chisquare(r + 1.0, size=int(zero.sum()))
        zero = chi <= 0.0
    return (state.e**2 / state.sigma2 + r) / chi


def _log_truncation_mass(rho: float, step: float) -> float:
    return float(np.log(norm.cdf((1.0 - rho) / step) - norm.cdf((-1.0 - rho) / step)))


def rho_log_target(
    rho: float,
    g: LogDetGrid,
    n_periods: int,
    quad: Tuple[float, float, float],
    sigma2: float,
) -> float:
    """
    T ln|I - rho w| - e(rho)'V^{-1}e(rho) / (2 sigma2).

    e'V^{-1}e is passed as the coefficients (A, B, C) of A - 2 rho B + rho^2 C.
    """
    A, B, C = quad
    return n_periods * logdet_at(g, rho) - (A - 2.0 * rho * B + rho * rho * C) / (2.0 * sigma2)


def sample_rho_mh(
    state: SamplerState,
    g: Optional[LogDetGrid],
    y: np.ndarray,
    wy: np.ndarray,
    Z: np.ndarray,
    rng: np.random.Generator,
    step: float,
    truncation_correction: bool = False,
) -> Tuple[float, bool]:
    if g is None:
        raise GridMissing("No log-determinant grid was built for the active weight matrix")
    n_periods = y.size // g.n

    e0 = y - Z @ state.delta
    e0w = e0 / state.v
    quad = (float(e0 @ e0w), float(wy @ e0w), float(wy @ (wy / state.v)))

    rho = state.rho
    for _ in range(MAX_PROPOSALS):
        proposal = rho + step * rng.standard_normal()
        if -1.0 < proposal < 1.0:
            break
    else:
        logger.warning(f"No proposal inside (-1, 1) after {MAX_PROPOSALS} tries at step={step}")
        return rho, False

    log_ratio = rho_log_target(proposal, g, n_periods, quad, state.sigma2) - rho_log_target(
        rho, g, n_periods, quad, state.sigma2
    )
    if truncation_correction:
        log_ratio += _log_truncation_mass(rho, step) - _log_truncation_mass(proposal, step)

    if rng.random() < np.exp(min(0.0, log_ratio)):
        return proposal, True
    return rho, False
