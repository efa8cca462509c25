"""
Bayesian MCMC for the heteroscedastic spatial Durbin panel model
"""

from packages.sampler.config import McmcConfig, PriorArrays, PriorSpec
from packages.sampler.design import DesignData, prepare_design
from packages.sampler.conditionals import (
    SamplerState,
    delta_conditional,
    sample_delta,
    sample_rho_mh,
    sample_sigma2,
    sample_v,
)
from packages.sampler.chain import McmcDraws, initial_state, run_chain, run_chains
from packages.sampler.io import load_draws, save_draws
from packages.sampler.summary import coefficient_row, fitted_values, lag_label, posterior_table

__all__ = [
    "McmcConfig",
    "PriorArrays",
    "PriorSpec",
    "DesignData",
    "prepare_design",
    "SamplerState",
    "delta_conditional",
    "sample_delta",
    "sample_rho_mh",
    "sample_sigma2",
    "sample_v",
    "McmcDraws",
    "initial_state",
    "run_chain",
    "run_chains",
    "load_draws",
    "save_draws",
    "coefficient_row",
    "fitted_values",
    "lag_label",
    "posterior_table",
]
