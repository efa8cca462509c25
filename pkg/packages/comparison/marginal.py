"""
Log-marginal likelihood of the homoscedastic spatial Durbin panel model.

delta | sigma2 ~ N(c, sigma2 C) and p(sigma2) ~ 1/sigma2 integrate out in
closed form, leaving a function of rho alone:

    T ln|I - rho w| - 0.5 ln|I + Z C Z'| + lgamma(NT/2)
        - (NT/2) ln(S(rho)/2) - (NT/2) ln(2 pi)

with S(rho) = r' (I + Z C Z')^{-1} r, r = y - rho Wy - Z c. S is quadratic
in rho, so the whole profile over the log-det grid costs a few inner products.
The rho integral under the uniform prior on (-1, 1) is a trapezoid rule on
the grid nodes, stabilised with log-sum-exp.
"""

import logging
from typing import Optional, Tuple

import numpy as np
from scipy.special import gammaln, logsumexp

from packages.core.errors import GridMissing, NonPosDefPrecision, NotDemeaned, QuadratureUnderflow
from packages.logdet.grid import LogDetGrid
from packages.panel.data import PanelData
from packages.sampler.config import PriorSpec
from packages.sampler.design import DesignData, prepare_design
from packages.weights.matrix import WeightMatrix

logger = logging.getLogger(__name__)

RHO_PRIOR_DENSITY = 0.5


def _quadratic_terms(design: DesignData, c: np.ndarray, C: np.ndarray) -> Tuple[np.ndarray, float]:
    """Coefficients (Saa, Sab, Sbb) of S(rho) and ln|I + Z C Z'|."""
    Z = design.Z
    ztz = Z.T @ Z
    H = np.linalg.inv(C) + ztz
    sign_h, logdet_h = np.linalg.slogdet(H)
    sign_c, logdet_c = np.linalg.slogdet(C)
    if sign_h <= 0 or sign_c <= 0:
        raise NonPosDefPrecision("C^{-1} + Z'Z is not positive definite")
    # |I_n + Z C Z'| = |C| |C^{-1} + Z'Z|
    logdet_m = logdet_c + logdet_h

    a = design.y - Z @ c
    b = design.wy
    za, zb = Z.T @ a, Z.T @ b
    h_za, h_zb = np.linalg.solve(H, za), np.linalg.solve(H, zb)
    # Woodbury: (I + Z C Z')^{-1} = I - Z H^{-1} Z'
    s_aa = float(a @ a - za @ h_za)
    s_ab = float(a @ b - za @ h_zb)
    s_bb = float(b @ b - zb @ h_zb)
    return np.array([s_aa, s_ab, s_bb]), logdet_m


def log_marginal_profile(
    design: DesignData,
    g: LogDetGrid,
    prior: Optional[PriorSpec] = None,
) -> np.ndarray:
    """log p(y | rho, w) at every grid node."""
    prior = prior or PriorSpec()
    pa = prior.arrays(2 * design.q)
    (s_aa, s_ab, s_bb), logdet_m = _quadratic_terms(design, pa.c, pa.C)

    rho = g.rho_grid
    S = s_aa - 2.0 * rho * s_ab + rho * rho * s_bb
    half_n = 0.5 * design.y.size
    with np.errstate(divide="ignore", invalid="ignore"):
        log_s = np.where(S > 0, np.log(np.maximum(S, 1e-300) / 2.0), np.inf)
    return (
        design.t * g.values
        - 0.5 * logdet_m
        + gammaln(half_n)
        - half_n * log_s
        - half_n * np.log(2.0 * np.pi)
    )


def trapezoid_weights(x: np.ndarray) -> np.ndarray:
    w = np.zeros_like(x)
    dx = np.diff(x)
    w[:-1] += 0.5 * dx
    w[1:] += 0.5 * dx
    return w


def integrate_log(values: np.ndarray, x: np.ndarray, density: float = RHO_PRIOR_DENSITY) -> float:
    """log of the trapezoid integral of density * exp(values) over x."""
    weights = density * trapezoid_weights(x)
    finite = np.isfinite(values)
    if not finite.any():
        raise QuadratureUnderflow("Log-marginal profile is -inf at every grid node")

    result = float(logsumexp(values[finite], b=weights[finite]))
    if np.isfinite(result):
        return result

    logger.warning("Log-sum-exp quadrature was not finite; rescaling and retrying")
    shift = float(np.max(values[finite]))
    total = float(np.sum(weights[finite] * np.exp(values[finite] - shift)))
    if total > 0 and np.isfinite(total):
        return shift + float(np.log(total))
    raise QuadratureUnderflow("Integrated marginal likelihood is below the representable range")


def log_marginal_likelihood(
    p: PanelData,
    w: WeightMatrix,
    g: LogDetGrid,
    prior: Optional[PriorSpec] = None,
) -> float:
    if not p.demeaned:
        raise NotDemeaned("log_marginal_likelihood expects a two-way demeaned panel")
    if g is None or g.w_hash != w.content_hash:
        raise GridMissing("No log-determinant grid for this weight matrix")
    design = prepare_design(p, w)
    profile = log_marginal_profile(design, g, prior)
    return integrate_log(profile, g.rho_grid)
