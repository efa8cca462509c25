"""
Run configuration for the command-line pipeline.

A RunConfig is read from a JSON key-value file; anything not in the file
falls back to EstimationSettings (environment) and then to the defaults of
PriorSpec, McmcConfig and DgpConfig.
"""

import json
import logging
from pathlib import Path
from typing import Any, Dict, List, Literal, Optional, Union

from pydantic import BaseModel, Field, model_validator

from packages.core.errors import InputFileMissing
from packages.core.settings import EstimationSettings
from packages.panel.loader import PanelSchema
from packages.sampler.config import McmcConfig, PriorSpec
from packages.synthetic.dgp import DgpConfig

logger = logging.getLogger(__name__)

INPUT_FIELDS = ("panel", "coordinates", "weights")


class RunConfig(BaseModel):
    panel: Optional[Path] = None
    coordinates: Optional[Path] = None
    # triplet file; overrides k-NN construction from coordinates
    weights: Optional[Path] = None
    output_dir: Path = Path("./output")
    cache_dir: Optional[Path] = Path("./cache")

    k: Optional[int] = None
    k_min: int = 1
    k_max: int = 20

    schema_: PanelSchema = Field(default_factory=PanelSchema, alias="schema")
    scale: List[str] = Field(default_factory=list)
    prior: PriorSpec = Field(default_factory=PriorSpec)
    mcmc: McmcConfig = Field(default_factory=McmcConfig)
    dgp: DgpConfig = Field(default_factory=DgpConfig)

    logdet_npoints: int = 2001
    logdet_method: Literal["sparse-lu", "dense", "eigen"] = "sparse-lu"
    knn_metric: Literal["euclidean", "great-circle"] = "euclidean"
    collinearity_threshold: float = 1e10
    impact_ndraws: int = 1000
    impact_mode: Literal["normal", "posterior"] = "normal"
    rho_source: Literal["draws", "fixed"] = "fixed"
    effects_method: Literal["dense", "series"] = "series"
    series_tolerance: float = 1e-10
    n_jobs: int = 1

    seed: Optional[int] = None
    format: Literal["text", "delimited"] = "text"

    model_config = {"populate_by_name": True}

    @model_validator(mode="after")
    def _check(self) -> "RunConfig":
        if self.k is not None and self.k < 1:
            raise ValueError("k must be at least 1")
        if not 1 <= self.k_min <= self.k_max:
            raise ValueError(f"k range [{self.k_min}, {self.k_max}] is empty or below 1")
        if self.logdet_npoints < 51:
            raise ValueError("logdet_npoints must be at least 51")
        if self.impact_ndraws < 100:
            raise ValueError("impact_ndraws must be at least 100")
        if self.series_tolerance <= 0:
            raise ValueError("series_tolerance must be positive")
        for name in INPUT_FIELDS:
            path = getattr(self, name)
            if path is not None and not Path(path).exists():
                raise InputFileMissing(str(path))
        return self

    @property
    def k_range(self) -> List[int]:
        return list(range(self.k_min, self.k_max + 1))

    @classmethod
    def defaults(cls, settings: Optional[EstimationSettings] = None) -> Dict[str, Any]:
        settings = settings or EstimationSettings.from_env()
        return {
            "logdet_npoints": settings.logdet_npoints,
            "logdet_method": settings.logdet_method,
            "knn_metric": settings.knn_metric,
            "collinearity_threshold": settings.collinearity_threshold,
            "impact_ndraws": settings.impact_ndraws,
            "impact_mode": settings.impact_mode,
            "rho_source": settings.rho_source,
            "series_tolerance": settings.series_tolerance,
            "n_jobs": settings.n_jobs,
            "cache_dir": settings.cache_dir,
            "output_dir": settings.output_dir,
        }

    @classmethod
    def from_file(
        cls,
        path: Optional[Union[str, Path]] = None,
        settings: Optional[EstimationSettings] = None,
        **overrides: Any,
    ) -> "RunConfig":
        """
        Build a config from environment defaults, then the JSON file, then overrides.

        Relative input paths in the file are taken relative to the file's directory.
        None-valued overrides are ignored so unset CLI flags do not clobber the file.
        """
        data = cls.defaults(settings)
        if path is not None:
            path = Path(path)
            if not path.exists():
                raise InputFileMissing(str(path))
            raw = json.loads(path.read_text())
            for name in INPUT_FIELDS + ("output_dir", "cache_dir"):
                value = raw.get(name)
                if value is not None and not Path(value).is_absolute():
                    raw[name] = str(path.parent / value)
            data.update(raw)
            logger.info(f"Loaded run config from {path}")
        data.update({k: v for k, v in overrides.items() if v is not None})
        config = cls.model_validate(data)
        if config.seed is not None:
            config = config.with_seed(config.seed)
        return config

    def with_seed(self, seed: int) -> "RunConfig":
        """Propagate one seed to the chain, the generator and impact simulation."""
        return self.model_copy(
            update={
                "seed": seed,
                "mcmc": self.mcmc.model_copy(update={"seed": seed}),
                "dgp": self.dgp.model_copy(update={"seed": seed}),
            }
        )

    def echo(self) -> Dict[str, Any]:
        return self.model_dump(mode="json", by_alias=True)
