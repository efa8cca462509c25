"""
Report-level domain records shared by the estimation packages and the CLI
"""

from typing import Optional, Any, Dict, List
from pydantic import BaseModel, Field
from datetime import datetime, timezone
from enum import Enum


def utcnow():
    """Get current UTC datetime (compatible with Python 3.11+)"""
    return datetime.now(timezone.utc)


class EffectKind(str, Enum):
    """Scalar summaries of the partial-derivative matrix."""
    DIRECT = "direct"
    INDIRECT = "indirect"
    TOTAL = "total"


class ValidationReport(BaseModel):
    """Outcome of validate_panel. Report-only: never raises."""
    balanced: bool = True
    n_regions: int = 0
    n_periods: int = 0
    constant_columns: List[str] = Field(default_factory=list)
    collinear_pairs: List[List[str]] = Field(default_factory=list)
    condition_number: Optional[float] = None
    warnings: List[str] = Field(default_factory=list)

    @property
    def ok(self) -> bool:
        return self.balanced and not self.warnings


class ModelScore(BaseModel):
    """One candidate weight matrix in a k-NN model comparison."""
    k: int
    log_marginal: float
    posterior_prob: float = 0.0
    selected: bool = False


class CoefficientRow(BaseModel):
    """Posterior summary of one scalar parameter (estimate report layout)."""
    name: str
    mean: float
    sd: float
    t_stat: float
    z_prob: float


class FitStatistics(BaseModel):
    r_squared: float
    sigma2: float
    log_marginal: Optional[float] = None
    rho_acceptance: float
    ndraw: int
    nburn: int
    # the R-square definition is printed in the report footer
    r_squared_definition: str = (
        "squared correlation of observed and fitted demeaned y at posterior means"
    )


class EffectRow(BaseModel):
    """Posterior summary of one impact estimate (impact report layout)."""
    variable: str
    kind: EffectKind
    mean: float
    sd: float
    t_stat: float
    t_prob: float
    lower_05: float
    upper_95: float


class DiagnosticsRow(BaseModel):
    """Convergence diagnostics of one scalar parameter (diagnostics report layout)."""
    parameter: str
    mean: float
    sd: float
    mc_error: float
    tau: float
    ess: float
    geweke_z: float
    geweke_p: float
    geweke_p_two_sided: float


class RunManifest(BaseModel):
    """Written beside every output so a run can be re-created."""
    command: str
    package_version: str
    config: Dict[str, Any] = Field(default_factory=dict)
    inputs: Dict[str, str] = Field(default_factory=dict)
    outputs: List[str] = Field(default_factory=list)
    notes: List[str] = Field(default_factory=list)
    created_at: datetime = Field(default_factory=utcnow)
