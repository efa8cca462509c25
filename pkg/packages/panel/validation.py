import logging
from itertools import combinations
from typing import Optional

import numpy as np

from packages.core.models import ValidationReport
from packages.panel.data import PanelData
from packages.panel.stacking import stack
from packages.panel.within import within_transform

logger = logging.getLogger(__name__)

# relative size below which a demeaned column counts as annihilated
_ANNIHILATED_RTOL = 1e-10
_PAIR_CORR_TOL = 1e-8


def _annihilated(raw: np.ndarray, demeaned: np.ndarray) -> bool:
    scale = max(1.0, float(np.max(np.abs(raw))))
    return float(np.max(np.abs(demeaned))) <= _ANNIHILATED_RTOL * scale


def validate_panel(
    p: PanelData, collinearity_threshold: Optional[float] = None
) -> ValidationReport:
    """
    Check a panel before estimation. Never raises; findings go into the report.

    Constant columns (and any column without within-variation) are flagged
    because the two-way transformation turns them into zeros. Collinearity is
    judged on the demeaned regressor cross-product.
    """
    threshold = 1e10 if collinearity_threshold is None else collinearity_threshold
    report = ValidationReport(balanced=True, n_regions=p.N, n_periods=p.T)

    Xd = p.X if p.demeaned else within_transform(p.X)
    yd = p.y if p.demeaned else within_transform(p.y)

    if _annihilated(p.y, yd):
        report.constant_columns.append("y")
        report.warnings.append("Dependent variable has no within variation")

    keep = []
    for k, name in enumerate(p.var_names):
        if _annihilated(p.X[:, :, k], Xd[:, :, k]):
            report.constant_columns.append(name)
            report.warnings.append(
                f"Regressor '{name}' is constant within the fixed effects "
                "and is annihilated by demeaning"
            )
        else:
            keep.append(k)

    if keep:
        Z = stack(Xd)[:, keep]
        names = [p.var_names[k] for k in keep]
        cond = float(np.linalg.cond(Z.T @ Z))
        report.condition_number = cond if np.isfinite(cond) else float("inf")

        std = Z.std(axis=0)
        corr = np.corrcoef(Z, rowvar=False) if len(keep) > 1 else np.ones((1, 1))
        for a, b in combinations(range(len(keep)), 2):
            if std[a] > 0 and std[b] > 0 and abs(abs(corr[a, b]) - 1.0) <= _PAIR_CORR_TOL:
                report.collinear_pairs.append([names[a], names[b]])
                report.warnings.append(
                    f"Regressors '{names[a]}' and '{names[b]}' are exactly collinear"
                )

        if report.condition_number > threshold and not report.collinear_pairs:
            report.warnings.append(
                f"Demeaned regressor cross-product is ill-conditioned "
                f"(condition number {report.condition_number:.3e} > {threshold:.1e})"
            )

    for warning in report.warnings:
        logger.warning(warning)
    return report
