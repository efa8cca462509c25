"""
Single-chain convergence diagnostics: Geweke z, autocorrelation time, ESS
"""

import logging
from typing import List, Tuple

import numpy as np
from scipy import fft
from scipy.stats import norm

from packages.core.errors import InsufficientDraws, ZeroVariance
from packages.core.models import DiagnosticsRow
from packages.sampler.chain import McmcDraws
from packages.sampler.summary import lag_label

logger = logging.getLogger(__name__)

MIN_LENGTH = 100
BANDWIDTH_FRACTION = 0.04


def _check_length(chain: np.ndarray):
    if chain.ndim != 1:
        raise ValueError(f"Expected a one-dimensional chain, got shape {chain.shape}")
    if chain.size < MIN_LENGTH:
        raise InsufficientDraws(chain.size, MIN_LENGTH)


def _segment_variance(x: np.ndarray) -> float:
    # a constant segment has zero variance; the FFT leaves rounding noise otherwise
    if np.ptp(x) == 0:
        return 0.0
    return spectral_variance(x) / x.size


def autocovariance(x: np.ndarray) -> np.ndarray:
    """Biased autocovariances at lags 0..n-1 via zero-padded FFT."""
    n = x.size
    centered = x - x.mean()
    size = fft.next_fast_len(2 * n)
    spectrum = fft.rfft(centered, n=size)
    acov = fft.irfft(spectrum * np.conj(spectrum), n=size)[:n]
    return acov / n


def spectral_variance(x: np.ndarray, fraction: float = BANDWIDTH_FRACTION) -> float:
    """Spectral density at frequency zero, Bartlett weights 1 - j/(L+1), L = floor(fraction*n)."""
    acov = autocovariance(x)
    lag = int(np.floor(fraction * x.size))
    j = np.arange(1, lag + 1)
    weights = 1.0 - j / (lag + 1.0)
    return float(acov[0] + 2.0 * np.sum(weights * acov[1 : lag + 1]))


def geweke_p(z: float) -> float:
    """2 Phi(|z|) - 1: the probability mass inside (-|z|, |z|)."""
    return float(2.0 * norm.cdf(abs(z)) - 1.0)


def geweke_p_two_sided(z: float) -> float:
    return float(2.0 * norm.sf(abs(z)))


def geweke(chain, frac_first: float = 0.1, frac_last: float = 0.9) -> Tuple[float, float]:
    """
    Compare the mean of the first frac_first of the chain with the mean of its
    last frac_last; returns (z, 2 Phi(|z|) - 1).
    """
    x = np.asarray(chain, dtype=float)
    _check_length(x)
    if not (0.0 < frac_first < 1.0 and 0.0 < frac_last < 1.0):
        raise ValueError("Segment fractions must lie in (0, 1)")

    n = x.size
    first = x[: int(np.floor(frac_first * n))]
    last = x[n - int(np.floor(frac_last * n)) :]
    var_first = _segment_variance(first)
    var_last = _segment_variance(last)
    denom = var_first + var_last
    if not denom > 0:
        raise ZeroVariance("Both chain segments are constant")
    z = float((first.mean() - last.mean()) / np.sqrt(denom))
    return z, geweke_p(z)


def _initial_monotone_tau(rho: np.ndarray) -> float:
    """Geyer's initial monotone positive-sequence estimate of 1 + 2 sum rho_k."""
    n_pairs = rho.size // 2
    pairs = rho[: 2 * n_pairs].reshape(n_pairs, 2).sum(axis=1)
    total = 0.0
    running_min = np.inf
    for gamma in pairs:
        if gamma <= 0.0:
            break
        running_min = min(running_min, gamma)
        total += running_min
    return -1.0 + 2.0 * total


def ess(chain) -> Tuple[float, float]:
    """(tau, n / max(tau, 1))."""
    x = np.asarray(chain, dtype=float)
    _check_length(x)
    if np.ptp(x) == 0:
        raise ZeroVariance("Chain is constant")
    acov = autocovariance(x)
    tau = _initial_monotone_tau(acov / acov[0])
    return tau, x.size / max(tau, 1.0)


def diagnostics_row(
    name: str, chain: np.ndarray, frac_first: float = 0.1, frac_last: float = 0.9
) -> DiagnosticsRow:
    chain = np.asarray(chain, dtype=float)
    tau, n_eff = ess(chain)
    z, p = geweke(chain, frac_first, frac_last)
    sd = float(np.std(chain, ddof=1))
    return DiagnosticsRow(
        parameter=name,
        mean=float(chain.mean()),
        sd=sd,
        mc_error=sd / np.sqrt(n_eff),
        tau=tau,
        ess=n_eff,
        geweke_z=z,
        geweke_p=p,
        geweke_p_two_sided=geweke_p_two_sided(z),
    )


def diagnostics_report(
    d: McmcDraws, frac_first: float = 0.1, frac_last: float = 0.9
) -> List[DiagnosticsRow]:
    """One row per beta, per W×beta, then rho and sigma2."""
    if d.n_retained < MIN_LENGTH:
        raise InsufficientDraws(d.n_retained, MIN_LENGTH)
    labelled = [(v, d.beta[:, j]) for j, v in enumerate(d.var_names)]
    labelled += [(lag_label(v), d.theta[:, j]) for j, v in enumerate(d.var_names)]
    labelled += [("rho", d.rho), ("sigma2", d.sigma2)]
    rows = [diagnostics_row(name, chain, frac_first, frac_last) for name, chain in labelled]
    worst = max(abs(r.geweke_z) for r in rows)
    logger.info(f"Diagnostics for {len(rows)} parameters; largest |Geweke z| = {worst:.3f}")
    return rows
