"""
Posterior model probabilities over candidate k-NN weight matrices
"""

import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, List, Optional, Sequence, Union

import numpy as np
from joblib import Parallel, delayed

from packages.core.errors import AllInfinite, TooFewRegions
from packages.core.models import ModelScore
from packages.logdet.cache import cached_logdet_grid
from packages.panel.data import PanelData
from packages.panel.within import demean_two_way
from packages.comparison.marginal import log_marginal_likelihood
from packages.sampler.config import PriorSpec
from packages.weights.knn import build_knn

logger = logging.getLogger(__name__)


def posterior_model_probs(scores: Sequence[float]) -> np.ndarray:
    """Softmax of log-marginal likelihoods under equal prior model weights."""
    s = np.asarray(scores, dtype=float)
    if s.size == 0 or not np.any(np.isfinite(s)):
        raise AllInfinite("No candidate has a finite log-marginal likelihood")
    # -inf scores get zero mass; +inf or nan are treated the same way
    s = np.where(np.isfinite(s), s, -np.inf)
    e = np.exp(s - s.max())
    return e / e.sum()


@dataclass
class SelectionResult:
    scores: List[ModelScore]
    best_k: int

    @property
    def probabilities(self) -> np.ndarray:
        return np.array([s.posterior_prob for s in self.scores])


def _score_candidate(
    coords: np.ndarray,
    p: PanelData,
    k: int,
    prior: Optional[PriorSpec],
    npoints: int,
    method: str,
    metric: str,
    cache_dir: Optional[Union[str, Path]],
) -> float:
    w = build_knn(coords, k, metric=metric, region_ids=p.region_ids)
    g = cached_logdet_grid(w, npoints=npoints, method=method, cache_dir=cache_dir)
    score = log_marginal_likelihood(p, w, g, prior)
    logger.info(f"k={k}: log-marginal={score:.4f}")
    return score


def select_k(
    coords: np.ndarray,
    p: PanelData,
    k_range: Iterable[int],
    prior: Optional[PriorSpec] = None,
    npoints: int = 2001,
    method: str = "sparse-lu",
    metric: str = "euclidean",
    n_jobs: int = 1,
    cache_dir: Optional[Union[str, Path]] = None,
) -> SelectionResult:
    """
    Score every k in k_range by its homoscedastic log-marginal likelihood.

    The panel is demeaned here when it is not already. Scores come back sorted
    by k with the most probable candidate flagged; ties go to the smaller k.
    """
    ks = sorted({int(k) for k in k_range})
    if not ks:
        raise ValueError("k_range is empty")
    for k in ks:
        if k < 1 or k > p.N - 1:
            raise TooFewRegions(p.N, k)
    if not p.demeaned:
        p = demean_two_way(p)

    log_ml = Parallel(n_jobs=n_jobs)(
        delayed(_score_candidate)(coords, p, k, prior, npoints, method, metric, cache_dir)
        for k in ks
    )
    probs = posterior_model_probs(log_ml)
    best = int(np.argmax(probs))
    scores = [
        ModelScore(k=k, log_marginal=float(s), posterior_prob=float(pr), selected=(i == best))
        for i, (k, s, pr) in enumerate(zip(ks, log_ml, probs))
    ]
    logger.info(f"Selected k={ks[best]} with posterior probability {probs[best]:.3f}")
    return SelectionResult(scores=scores, best_k=ks[best])
