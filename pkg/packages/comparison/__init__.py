from packages.comparison.marginal import (
    integrate_log,
    log_marginal_likelihood,
    log_marginal_profile,
    trapezoid_weights,
)
from packages.comparison.selection import SelectionResult, posterior_model_probs, select_k

__all__ = [
    "integrate_log",
    "log_marginal_likelihood",
    "log_marginal_profile",
    "trapezoid_weights",
    "SelectionResult",
    "posterior_model_probs",
    "select_k",
]
