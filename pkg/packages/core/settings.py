from dataclasses import dataclass
from typing import Literal, Optional
import os


@dataclass
class EstimationSettings:
    logdet_npoints: int = 2001
    logdet_method: Literal["sparse-lu", "dense", "eigen"] = "sparse-lu"
    knn_metric: Literal["euclidean", "great-circle"] = "euclidean"
    # condition number of the demeaned regressor cross-product
    collinearity_threshold: float = 1e10
    impact_ndraws: int = 1000
    impact_mode: Literal["normal", "posterior"] = "normal"
    rho_source: Literal["draws", "fixed"] = "fixed"
    series_tolerance: float = 1e-10
    n_jobs: int = 1
    cache_dir: Optional[str] = "./cache"
    output_dir: str = "./output"

    @classmethod
    def from_env(cls) -> "EstimationSettings":
        return cls(
            logdet_npoints=int(os.getenv("SPILLOVER_LOGDET_NPOINTS", "2001")),
            logdet_method=os.getenv("SPILLOVER_LOGDET_METHOD", "sparse-lu"),
            knn_metric=os.getenv("SPILLOVER_KNN_METRIC", "euclidean"),
            collinearity_threshold=float(os.getenv("SPILLOVER_COLLINEARITY_THRESHOLD", "1e10")),
            impact_ndraws=int(os.getenv("SPILLOVER_IMPACT_NDRAWS", "1000")),
            impact_mode=os.getenv("SPILLOVER_IMPACT_MODE", "normal"),
            rho_source=os.getenv("SPILLOVER_RHO_SOURCE", "fixed"),
            series_tolerance=float(os.getenv("SPILLOVER_SERIES_TOLERANCE", "1e-10")),
            n_jobs=int(os.getenv("SPILLOVER_N_JOBS", "1")),
            cache_dir=os.getenv("SPILLOVER_CACHE_DIR", "./cache") or None,
            output_dir=os.getenv("SPILLOVER_OUTPUT_DIR", "./output"),
        )
