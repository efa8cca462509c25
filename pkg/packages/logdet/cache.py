"""
Sidecar cache for log-det grids, keyed by the content hash of w
"""

import logging
from pathlib import Path
from typing import Optional, Union

import numpy as np

from packages.logdet.grid import LogDetGrid, Method, build_logdet_grid
from packages.weights.matrix import WeightMatrix

logger = logging.getLogger(__name__)


def _get_cache_path(cache_dir: Path, w_hash: str, method: str, npoints: int) -> Path:
    return cache_dir / f"logdet_{w_hash}_{method}_{npoints}.npz"


def _load_from_cache(path: Path, w_hash: str) -> Optional[LogDetGrid]:
    if not path.exists():
        return None
    try:
        with np.load(path, allow_pickle=False) as data:
            if str(data["w_hash"]) != w_hash:
                return None
            return LogDetGrid(
                rho_grid=data["rho_grid"],
                values=data["values"],
                method=str(data["method"]),
                n=int(data["n"]),
                w_hash=w_hash,
            )
    except (OSError, KeyError, ValueError) as e:
        logger.warning(f"Ignoring unreadable log-det cache {path}: {e}")
        return None


def _save_to_cache(path: Path, grid: LogDetGrid):
    path.parent.mkdir(parents=True, exist_ok=True)
    np.savez(
        path,
        rho_grid=grid.rho_grid,
        values=grid.values,
        method=np.array(grid.method),
        n=np.array(grid.n),
        w_hash=np.array(grid.w_hash),
    )


def cached_logdet_grid(
    w: WeightMatrix,
    npoints: int = 2001,
    method: Method = "sparse-lu",
    cache_dir: Optional[Union[str, Path]] = None,
    n_jobs: int = 1,
) -> LogDetGrid:
    """build_logdet_grid with an optional on-disk cache; a changed w changes the key."""
    if cache_dir is None:
        return build_logdet_grid(w, npoints=npoints, method=method, n_jobs=n_jobs)

    path = _get_cache_path(Path(cache_dir), w.content_hash, method, npoints)
    cached = _load_from_cache(path, w.content_hash)
    if cached is not None:
        logger.info(f"Loaded log-det grid from cache {path.name}")
        return cached

    grid = build_logdet_grid(w, npoints=npoints, method=method, n_jobs=n_jobs)
    _save_to_cache(path, grid)
    return grid
