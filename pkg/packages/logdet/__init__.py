from packages.logdet.grid import LogDetGrid, build_logdet_grid, logdet_at, logdet_many, rho_grid
from packages.logdet.cache import cached_logdet_grid

__all__ = [
    "LogDetGrid",
    "build_logdet_grid",
    "cached_logdet_grid",
    "logdet_at",
    "logdet_many",
    "rho_grid",
]
