from packages.diagnostics.convergence import (
    autocovariance,
    diagnostics_report,
    diagnostics_row,
    ess,
    geweke,
    geweke_p,
    geweke_p_two_sided,
    spectral_variance,
)

__all__ = [
    "autocovariance",
    "diagnostics_report",
    "diagnostics_row",
    "ess",
    "geweke",
    "geweke_p",
    "geweke_p_two_sided",
    "spectral_variance",
]
