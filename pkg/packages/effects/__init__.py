"""
Direct, indirect and total impact estimates
"""

from packages.effects.point import (
    EffectsAtPoint,
    effects_at,
    effects_from_traces,
    required_order,
    tail_bound,
    trace_vector,
)
from packages.effects.inference import (
    ImpactSummary,
    PointEstimate,
    coefficient_sum_summary,
    impact_inference,
    summarize_effect,
)

__all__ = [
    "EffectsAtPoint",
    "effects_at",
    "effects_from_traces",
    "required_order",
    "tail_bound",
    "trace_vector",
    "ImpactSummary",
    "PointEstimate",
    "coefficient_sum_summary",
    "impact_inference",
    "summarize_effect",
]
