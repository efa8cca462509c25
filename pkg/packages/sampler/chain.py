"""
MCMC driver: sweeps delta -> sigma2 -> v -> rho, keeps post-burn-in draws
"""

import logging
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd
from joblib import Parallel, delayed

from packages.core.errors import GridMissing, NumericalError
from packages.logdet.grid import LogDetGrid, build_logdet_grid
from packages.panel.data import PanelData
from packages.panel.stacking import unstack
from packages.sampler.conditionals import (
    SamplerState,
    sample_delta,
    sample_rho_mh,
    sample_sigma2,
    sample_v,
)
from packages.sampler.config import McmcConfig, PriorSpec
from packages.sampler.design import DesignData, prepare_design
from packages.weights.matrix import WeightMatrix

logger = logging.getLogger(__name__)

ADAPT_EXPONENT = 0.6
MIN_STEP, MAX_STEP = 1e-4, 10.0


@dataclass(frozen=True, eq=False)
class McmcDraws:
    """
    Retained draws of one chain.

    beta and theta are (ndraw - nburn) x Q; rho and sigma2 are vectors of the
    same length. `accepted` flags every rho proposal, burn-in included.
    """
    beta: np.ndarray
    theta: np.ndarray
    rho: np.ndarray
    sigma2: np.ndarray
    v_mean: np.ndarray  # N x T
    accepted: np.ndarray
    rho_step: float
    var_names: Tuple[str, ...]
    region_ids: Tuple[str, ...]
    period_ids: Tuple[str, ...]
    config: McmcConfig
    prior: PriorSpec
    w_hash: str
    metadata: Dict[str, object] = field(default_factory=dict)

    def __post_init__(self):
        n = self.rho.shape[0]
        for name in ("beta", "theta", "sigma2"):
            if getattr(self, name).shape[0] != n:
                raise ValueError(f"{name} has {getattr(self, name).shape[0]} rows, rho has {n}")

    @property
    def n_retained(self) -> int:
        return int(self.rho.shape[0])

    @property
    def delta(self) -> np.ndarray:
        return np.hstack([self.beta, self.theta])

    @property
    def acceptance_rate(self) -> float:
        """rho acceptance rate over the retained iterations."""
        kept = self.accepted[self.config.nburn:]
        return float(kept.mean()) if kept.size else 0.0

    @property
    def acceptance_trace(self) -> np.ndarray:
        return np.cumsum(self.accepted) / np.arange(1, self.accepted.size + 1)

    def param_names(self) -> List[str]:
        return (
            [f"beta_{v}" for v in self.var_names]
            + [f"theta_{v}" for v in self.var_names]
            + ["rho", "sigma2"]
        )

    def as_matrix(self) -> np.ndarray:
        return np.column_stack([self.beta, self.theta, self.rho, self.sigma2])

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame(self.as_matrix(), columns=self.param_names())


def initial_state(design: DesignData) -> SamplerState:
    """Least-squares delta, residual variance, v = 1, rho = 0."""
    delta, *_ = np.linalg.lstsq(design.Z, design.y, rcond=None)
    e = design.y - design.Z @ delta
    sigma2 = float(e @ e) / e.size
    return SamplerState(
        delta=delta,
        sigma2=sigma2 if sigma2 > 0 else 1.0,
        rho=0.0,
        v=np.ones(design.y.size),
        e=e,
    )


def _check_grid(g: LogDetGrid, w: WeightMatrix):
    if g.w_hash != w.content_hash or g.n != w.n:
        raise GridMissing("The log-determinant grid was built for a different weight matrix")


def run_chain(
    p: PanelData,
    w: WeightMatrix,
    prior: PriorSpec,
    cfg: McmcConfig,
    grid: Optional[LogDetGrid] = None,
) -> McmcDraws:
    design = prepare_design(p, w)
    if grid is None:
        grid = build_logdet_grid(w)
    _check_grid(grid, w)

    pa = prior.arrays(2 * design.q)
    rng = np.random.default_rng(cfg.seed)
    state = initial_state(design)
    y, wy, Z = design.y, design.wy, design.Z

    n_keep = cfg.n_retained
    q = design.q
    beta = np.empty((n_keep, q))
    theta = np.empty((n_keep, q))
    rho_draws = np.empty(n_keep)
    sigma2_draws = np.empty(n_keep)
    v_sum = np.zeros(y.size)
    accepted = np.zeros(cfg.ndraw, dtype=bool)

    log_step = np.log(cfg.rho_step)
    target = cfg.target_acceptance
    logger.info(
        f"Running chain: N={design.n}, T={design.t}, Q={q}, ndraw={cfg.ndraw}, "
        f"nburn={cfg.nburn}, heteroscedastic={cfg.heteroscedastic}"
    )

    for it in range(cfg.ndraw):
        state.delta = sample_delta(state, Z, y - state.rho * wy, pa, rng)
        state.refresh(y, wy, Z)

        state.sigma2 = sample_sigma2(state, pa, rng)
        if cfg.heteroscedastic:
            state.v = sample_v(state, pa.r, rng)
        if cfg.debug:
            state.check_residual(y, wy, Z)

        step = float(np.exp(log_step))
        state.rho, accepted[it] = sample_rho_mh(
            state, grid, y, wy, Z, rng, step, truncation_correction=cfg.truncation_correction
        )
        state.refresh(y, wy, Z)

        if it < cfg.nburn:
            # Robbins-Monro on the log step; frozen once burn-in ends
            gain = (it + 1) ** -ADAPT_EXPONENT
            log_step += gain * (float(accepted[it]) - target)
            log_step = float(np.clip(log_step, np.log(MIN_STEP), np.log(MAX_STEP)))
        else:
            j = it - cfg.nburn
            beta[j] = state.delta[:q]
            theta[j] = state.delta[q:]
            rho_draws[j] = state.rho
            sigma2_draws[j] = state.sigma2
            v_sum += state.v

        if cfg.log_every and (it + 1) % cfg.log_every == 0:
            logger.info(
                f"Iteration {it + 1}/{cfg.ndraw}: rho={state.rho:.4f}, "
                f"sigma2={state.sigma2:.4f}, acceptance={accepted[: it + 1].mean():.3f}, "
                f"step={np.exp(log_step):.4f}"
            )

    if not np.all(np.isfinite(rho_draws)):
        raise NumericalError("Non-finite rho draws")

    return McmcDraws(
        beta=beta,
        theta=theta,
        rho=rho_draws,
        sigma2=sigma2_draws,
        v_mean=unstack(v_sum / n_keep, design.n, design.t),
        accepted=accepted,
        rho_step=float(np.exp(log_step)),
        var_names=design.var_names,
        region_ids=p.region_ids,
        period_ids=p.period_ids,
        config=cfg,
        prior=prior,
        w_hash=w.content_hash,
    )


def run_chains(
    p: PanelData,
    w: WeightMatrix,
    prior: PriorSpec,
    cfg: McmcConfig,
    seeds: Sequence[int],
    n_jobs: int = 1,
    grid: Optional[LogDetGrid] = None,
) -> List[McmcDraws]:
    """Independent chains sharing one grid; results come back in seed order."""
    if grid is None:
        grid = build_logdet_grid(w, n_jobs=n_jobs)
    configs = [cfg.model_copy(update={"seed": int(s)}) for s in seeds]
    return Parallel(n_jobs=n_jobs)(delayed(run_chain)(p, w, prior, c, grid) for c in configs)
