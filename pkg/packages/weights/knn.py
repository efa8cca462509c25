"""
k-nearest-neighbor weight construction
"""

import logging
from typing import Literal, Optional, Sequence

import numpy as np
import scipy.sparse as sp
from sklearn.metrics import pairwise_distances_chunked

from packages.core.errors import CoincidentPoints, DimensionMismatch, TooFewRegions
from packages.weights.matrix import WeightMatrix

logger = logging.getLogger(__name__)

Metric = Literal["euclidean", "great-circle"]


def _prepare(coords: np.ndarray, metric: Metric):
    if metric == "great-circle":
        # x = longitude, y = latitude in degrees; haversine wants [lat, lon] radians
        return np.radians(coords[:, ::-1]), "haversine"
    # squared euclidean goes through scipy's cdist: exact differences, same ordering
    return coords, "sqeuclidean"


def build_knn(
    coords: np.ndarray,
    k: int,
    metric: Metric = "euclidean",
    region_ids: Optional[Sequence[str]] = None,
    on_coincident: Literal["warn", "raise"] = "warn",
) -> WeightMatrix:
    """
    Row i holds the k regions closest to region i (excluding i), weight 1/k each.

    Distance ties, including coincident points, are broken by ascending region
    index so builds are identical across platforms.
    """
    coords = np.asarray(coords, dtype=float)
    if coords.ndim != 2 or coords.shape[1] != 2:
        raise DimensionMismatch(f"Coordinates must be N x 2, got {coords.shape}")
    if not np.all(np.isfinite(coords)):
        raise DimensionMismatch("Coordinates must be finite")
    if k < 1:
        raise ValueError("k must be a positive integer")
    n = coords.shape[0]
    if n <= k:
        raise TooFewRegions(n, k)

    points, sk_metric = _prepare(coords, metric)

    def reduce_neighbors(dist_chunk: np.ndarray, start: int):
        rows = np.arange(dist_chunk.shape[0])
        dist_chunk[rows, start + rows] = np.inf
        order = np.argsort(dist_chunk, axis=1, kind="stable")[:, :k]
        zero = dist_chunk == 0.0
        partner = np.where(zero.any(axis=1), zero.argmax(axis=1), -1)
        return order, partner

    neighbors = []
    partners = []
    for order, partner in pairwise_distances_chunked(
        points, metric=sk_metric, reduce_func=reduce_neighbors
    ):
        neighbors.append(order)
        partners.append(partner)
    neighbors = np.vstack(neighbors)
    partners = np.concatenate(partners)

    coincident = sorted(
        {(min(i, int(j)), max(i, int(j))) for i, j in enumerate(partners) if j >= 0}
    )
    if coincident:
        if on_coincident == "raise":
            raise CoincidentPoints(coincident)
        logger.warning(
            f"{len(coincident)} coincident coordinate pairs; ties broken by region index "
            f"(first: {coincident[:5]})"
        )

    indptr = np.arange(0, n * k + 1, k)
    data = np.full(n * k, 1.0 / k)
    w = sp.csr_matrix((data, neighbors.ravel(), indptr), shape=(n, n))
    logger.debug(f"Built {k}-NN weights for N={n} ({metric})")
    return WeightMatrix(
        matrix=w,
        k=k,
        region_ids=tuple(region_ids) if region_ids is not None else None,
        metadata={"metric": metric, "coincident_pairs": coincident},
    )
