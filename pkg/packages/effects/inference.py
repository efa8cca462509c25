"""
Simulation-based inference for impact estimates.

Each of the `ndraws` parameter vectors gets its own child seed spawned from
one SeedSequence, so a draw does not depend on how the work is split across
jobs.
"""

import logging
from dataclasses import dataclass, field
from typing import List, Literal, Optional, Tuple, Union

import numpy as np
from joblib import Parallel, delayed
from scipy.stats import t as student_t

from packages.core.errors import InsufficientDraws, SeriesNotConverged
from packages.core.models import CoefficientRow, EffectKind, EffectRow
from packages.effects.point import (
    DEFAULT_TOLERANCE,
    MAX_SERIES_ORDER,
    Method,
    effects_at,
    effects_from_traces,
    required_order,
    tail_bound,
    trace_vector,
)
from packages.sampler.chain import McmcDraws
from packages.sampler.summary import coefficient_row
from packages.weights.matrix import WeightMatrix

logger = logging.getLogger(__name__)

MIN_DRAWS = 100
QUANTILES = (0.05, 0.95)

Mode = Literal["normal", "posterior"]
RhoSource = Literal["draws", "fixed"]


@dataclass
class PointEstimate:
    """Point estimates of (beta, theta, rho) with the covariance of delta = (beta, theta)."""
    beta: np.ndarray
    theta: np.ndarray
    rho: float
    cov: np.ndarray
    var_names: Tuple[str, ...] = ()
    rho_draws: Optional[np.ndarray] = None

    @classmethod
    def from_draws(cls, draws: McmcDraws) -> "PointEstimate":
        delta = draws.delta
        return cls(
            beta=draws.beta.mean(axis=0),
            theta=draws.theta.mean(axis=0),
            rho=float(draws.rho.mean()),
            cov=np.atleast_2d(np.cov(delta, rowvar=False)),
            var_names=draws.var_names,
            rho_draws=draws.rho,
        )


@dataclass
class ImpactSummary:
    var_names: Tuple[str, ...]
    direct: np.ndarray  # ndraws x Q
    indirect: np.ndarray
    total: np.ndarray
    mode: str
    rho_source: str
    method: str
    notes: List[str] = field(default_factory=list)

    @property
    def ndraws(self) -> int:
        return int(self.direct.shape[0])

    def draws_for(self, kind: EffectKind) -> np.ndarray:
        return {
            EffectKind.DIRECT: self.direct,
            EffectKind.INDIRECT: self.indirect,
            EffectKind.TOTAL: self.total,
        }[EffectKind(kind)]

    def rows(self, kind: EffectKind) -> List[EffectRow]:
        values = self.draws_for(kind)
        return [
            summarize_effect(name, EffectKind(kind), values[:, j])
            for j, name in enumerate(self.var_names)
        ]


def summarize_effect(name: str, kind: EffectKind, values: np.ndarray) -> EffectRow:
    """Mean, sd, mean/sd, two-sided t tail and type-7 quantiles of one effect's draws."""
    n = values.size
    mean = float(np.mean(values))
    sd = float(np.std(values, ddof=1)) if n > 1 else 0.0
    if sd > 0:
        t_stat = mean / sd
        t_prob = float(2.0 * student_t.sf(abs(t_stat), df=n - 1))
    else:
        t_stat, t_prob = float("nan"), float("nan")
    lower, upper = np.quantile(values, QUANTILES, method="linear")
    return EffectRow(
        variable=name,
        kind=kind,
        mean=mean,
        sd=sd,
        t_stat=t_stat,
        t_prob=t_prob,
        lower_05=float(lower),
        upper_95=float(upper),
    )


def _factor(cov: np.ndarray) -> np.ndarray:
    """A matrix L with L L' = cov; tolerates singular (even zero) covariances."""
    vals, vecs = np.linalg.eigh((cov + cov.T) / 2.0)
    return vecs * np.sqrt(np.clip(vals, 0.0, None))


def _normal_draw(
    seed: np.random.SeedSequence,
    mean: np.ndarray,
    factor: np.ndarray,
    rho_pool: Optional[np.ndarray],
    rho_fixed: float,
) -> Tuple[np.ndarray, float]:
    rng = np.random.default_rng(seed)
    delta = mean + factor @ rng.standard_normal(mean.size)
    rho = rho_fixed if rho_pool is None else float(rho_pool[rng.integers(rho_pool.size)])
    return delta, rho


def _resampled_draw(
    seed: np.random.SeedSequence,
    delta_pool: np.ndarray,
    rho_pool: np.ndarray,
    rho_fixed: Optional[float],
) -> Tuple[np.ndarray, float]:
    rng = np.random.default_rng(seed)
    i = int(rng.integers(rho_pool.size))
    rho = float(rho_pool[i]) if rho_fixed is None else rho_fixed
    return delta_pool[i], rho


def _parameter_draws(
    source: Union[McmcDraws, PointEstimate],
    mode: Mode,
    rho_source: RhoSource,
    ndraws: int,
    seed: Optional[int],
) -> Tuple[np.ndarray, np.ndarray]:
    children = np.random.SeedSequence(seed).spawn(ndraws)

    if mode == "posterior":
        if not isinstance(source, McmcDraws):
            raise ValueError("Posterior resampling needs MCMC draws")
        delta_pool = source.delta
        rho_fixed = None if rho_source == "draws" else float(source.rho.mean())
        pairs = [_resampled_draw(s, delta_pool, source.rho, rho_fixed) for s in children]
    elif mode == "normal":
        point = source if isinstance(source, PointEstimate) else PointEstimate.from_draws(source)
        mean = np.concatenate([point.beta, point.theta])
        factor = _factor(np.asarray(point.cov, dtype=float))
        rho_pool = None
        if rho_source == "draws":
            if point.rho_draws is None:
                raise ValueError("rho_source='draws' needs rho draws")
            rho_pool = np.asarray(point.rho_draws, dtype=float)
        pairs = [_normal_draw(s, mean, factor, rho_pool, point.rho) for s in children]
    else:
        raise ValueError(f"Unknown impact mode: {mode}")

    deltas = np.vstack([d for d, _ in pairs])
    rhos = np.array([r for _, r in pairs])
    return deltas, rhos


def _dense_block(deltas: np.ndarray, rhos: np.ndarray, w: WeightMatrix, q: int):
    direct = np.empty((rhos.size, q))
    total = np.empty((rhos.size, q))
    for i, (d, r) in enumerate(zip(deltas, rhos)):
        e = effects_at(d[:q], d[q:], r, w, method="dense")
        direct[i], total[i] = e.direct, e.total
    return direct, total


def impact_inference(
    source: Union[McmcDraws, PointEstimate],
    w: WeightMatrix,
    ndraws: int = 1000,
    seed: Optional[int] = None,
    mode: Mode = "normal",
    rho_source: RhoSource = "fixed",
    method: Method = "series",
    tol: float = DEFAULT_TOLERANCE,
    n_jobs: int = 1,
) -> ImpactSummary:
    """
    Draw parameter vectors, evaluate effects_at for each and keep the draws.

    mode="normal" samples delta from N(mean, cov) of (beta, theta);
    mode="posterior" resamples retained MCMC rows. rho is either held at its
    point value (rho_source="fixed") or drawn from the chain.
    """
    if ndraws < MIN_DRAWS:
        raise InsufficientDraws(ndraws, MIN_DRAWS)

    q = int(np.asarray(source.beta).shape[-1])
    var_names = tuple(source.var_names) or tuple(f"x{j + 1}" for j in range(q))
    deltas, rhos = _parameter_draws(source, mode, rho_source, ndraws, seed)

    if method == "series":
        orders = [required_order(r, d[:q], d[q:], tol) for d, r in zip(deltas, rhos)]
        m_max = max(orders)
        if m_max > MAX_SERIES_ORDER:
            worst = int(np.argmax(orders))
            raise SeriesNotConverged(
                MAX_SERIES_ORDER,
                m_max,
                tail_bound(rhos[worst], deltas[worst, :q], deltas[worst, q:], MAX_SERIES_ORDER),
            )
        traces = trace_vector(w, m_max + 1)
        direct = np.empty((ndraws, q))
        total = np.empty((ndraws, q))
        for i, (d, r, m) in enumerate(zip(deltas, rhos, orders)):
            direct[i], total[i] = effects_from_traces(d[:q], d[q:], r, traces, m)
    elif method == "dense":
        blocks = np.array_split(np.arange(ndraws), max(1, n_jobs if n_jobs > 0 else 8))
        parts = Parallel(n_jobs=n_jobs)(
            delayed(_dense_block)(deltas[idx], rhos[idx], w, q) for idx in blocks
        )
        direct = np.vstack([d for d, _ in parts])
        total = np.vstack([t for _, t in parts])
    else:
        raise ValueError(f"Unknown effects method: {method}")

    logger.info(f"Impact inference: {ndraws} draws, mode={mode}, rho={rho_source}, method={method}")
    return ImpactSummary(
        var_names=var_names,
        direct=direct,
        indirect=total - direct,
        total=total,
        mode=mode,
        rho_source=rho_source,
        method=method,
    )


def coefficient_sum_summary(draws: McmcDraws) -> List[CoefficientRow]:
    """Posterior summary of beta_q + theta_q, the numerator of the total effect."""
    sums = draws.beta + draws.theta
    return [
        coefficient_row(f"{name} (beta+theta)", sums[:, j])
        for j, name in enumerate(draws.var_names)
    ]
