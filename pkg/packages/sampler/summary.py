"""
Posterior summaries of a fitted chain in the estimate report layout
"""

from typing import List, Optional, Tuple

import numpy as np
from scipy.stats import norm

from packages.core.models import CoefficientRow, FitStatistics
from packages.sampler.chain import McmcDraws
from packages.sampler.design import DesignData


def lag_label(name: str) -> str:
    return f"W×{name}"


def coefficient_row(name: str, draws: np.ndarray) -> CoefficientRow:
    mean = float(np.mean(draws))
    sd = float(np.std(draws, ddof=1)) if draws.size > 1 else 0.0
    t_stat = mean / sd if sd > 0 else float("nan")
    z_prob = float(2.0 * norm.sf(abs(t_stat))) if sd > 0 else float("nan")
    return CoefficientRow(name=name, mean=mean, sd=sd, t_stat=t_stat, z_prob=z_prob)


def fitted_values(draws: McmcDraws, design: DesignData) -> np.ndarray:
    """rho_bar W y + Z delta_bar on the stacked demeaned data."""
    delta = draws.delta.mean(axis=0)
    return float(draws.rho.mean()) * design.wy + design.Z @ delta


def posterior_table(
    draws: McmcDraws,
    design: DesignData,
    log_marginal: Optional[float] = None,
) -> Tuple[List[CoefficientRow], FitStatistics]:
    """
    beta rows, W×beta rows and rho, each with mean, sd, mean/sd and the
    two-sided normal tail probability; sigma2 and R-square go to the footer.
    """
    rows = [coefficient_row(v, draws.beta[:, j]) for j, v in enumerate(draws.var_names)]
    rows += [
        coefficient_row(lag_label(v), draws.theta[:, j]) for j, v in enumerate(draws.var_names)
    ]
    rows.append(coefficient_row("rho", draws.rho))

    fitted = fitted_values(draws, design)
    if np.std(fitted) > 0 and np.std(design.y) > 0:
        r_squared = float(np.corrcoef(design.y, fitted)[0, 1] ** 2)
    else:
        r_squared = float("nan")

    stats = FitStatistics(
        r_squared=r_squared,
        sigma2=float(draws.sigma2.mean()),
        log_marginal=log_marginal,
        rho_acceptance=draws.acceptance_rate,
        ndraw=draws.config.ndraw,
        nburn=draws.config.nburn,
    )
    return rows, stats
