"""
File-based panel ingestion (delimited text with a header row)
"""

import logging
from pathlib import Path
from typing import List, Optional, Union

import numpy as np
import pandas as pd
from pydantic import BaseModel

from packages.core.errors import (
    DuplicateCell,
    InputFileMissing,
    MissingCell,
    NonNumericValue,
    SchemaError,
)
from packages.panel.data import PanelData
from packages.panel.stacking import stack

logger = logging.getLogger(__name__)


class PanelSchema(BaseModel):
    """Column mapping for panel files. regressors=None takes every remaining column."""
    region: str = "region_id"
    period: str = "period"
    y: str = "y"
    regressors: Optional[List[str]] = None


def read_delimited(path: Union[str, Path]) -> pd.DataFrame:
    """Read a delimited text file with a header row; every column as text."""
    path = Path(path)
    if not path.exists():
        raise InputFileMissing(str(path))

    if path.suffix == ".csv":
        return pd.read_csv(path, dtype=str, encoding="utf-8", keep_default_na=False)
    elif path.suffix in (".tsv", ".tab"):
        return pd.read_csv(path, sep="\t", dtype=str, encoding="utf-8", keep_default_na=False)
    else:
        return pd.read_csv(
            path, sep=None, engine="python", dtype=str, encoding="utf-8", keep_default_na=False
        )


def _period_order(labels: List[str]) -> List[str]:
    numeric = pd.to_numeric(pd.Series(labels), errors="coerce")
    if numeric.notna().all():
        order = np.argsort(numeric.to_numpy(), kind="stable")
        return [labels[i] for i in order]
    return sorted(labels)


def _exact_float(text: str) -> float:
    try:
        return float(text)
    except ValueError:
        return np.nan


def numeric_column(frame: pd.DataFrame, column: str) -> np.ndarray:
    """
    Parse a text column as float64, exactly as written (`%.17g` text reads back bit for bit).

    Unparseable or NaN entries raise NonNumericValue listing the offending strings.
    """
    raw = frame[column].astype(str).str.strip()
    values = raw.map(_exact_float).to_numpy(dtype=float)
    bad = raw[np.isnan(values)]
    if len(bad):
        raise NonNumericValue(column, bad.unique().tolist())
    return values


def panel_from_frame(frame: pd.DataFrame, schema: Optional[PanelSchema] = None) -> PanelData:
    """
    Build a balanced PanelData from a long-format frame.

    Regions keep their order of first appearance; periods are ordered
    numerically when every label is numeric, lexicographically otherwise.
    """
    schema = schema or PanelSchema()
    for col in (schema.region, schema.period, schema.y):
        if col not in frame.columns:
            raise SchemaError(f"Column '{col}' not found; available: {list(frame.columns)}")

    regressors = schema.regressors
    if regressors is None:
        reserved = {schema.region, schema.period, schema.y}
        regressors = [c for c in frame.columns if c not in reserved]
    missing_cols = [c for c in regressors if c not in frame.columns]
    if missing_cols:
        raise SchemaError(f"Regressor columns not found: {missing_cols}")
    if not regressors:
        raise SchemaError("At least one regressor column is required")

    regions = frame[schema.region].astype(str).str.strip()
    periods = frame[schema.period].astype(str).str.strip()

    dup_mask = pd.DataFrame({"r": regions, "t": periods}).duplicated(keep="first")
    if dup_mask.any():
        cells = list(zip(regions[dup_mask], periods[dup_mask]))
        raise DuplicateCell(cells)

    region_ids = list(pd.unique(regions))
    period_ids = _period_order(list(pd.unique(periods)))
    present = set(zip(regions, periods))
    absent = [(r, t) for t in period_ids for r in region_ids if (r, t) not in present]
    if absent:
        raise MissingCell(absent)

    r_index = {r: i for i, r in enumerate(region_ids)}
    t_index = {t: j for j, t in enumerate(period_ids)}
    rows = regions.map(r_index).to_numpy()
    cols = periods.map(t_index).to_numpy()

    n, t, q = len(region_ids), len(period_ids), len(regressors)
    y = np.empty((n, t))
    X = np.empty((n, t, q))
    y[rows, cols] = numeric_column(frame, schema.y)
    for k, name in enumerate(regressors):
        X[rows, cols, k] = numeric_column(frame, name)

    return PanelData(
        region_ids=tuple(region_ids),
        period_ids=tuple(period_ids),
        y=y,
        X=X,
        var_names=tuple(regressors),
        demeaned=False,
    )


def load_panel(panel_file: Union[str, Path], schema: Optional[PanelSchema] = None) -> PanelData:
    """Load a balanced panel from a delimited text file."""
    frame = read_delimited(panel_file)
    panel = panel_from_frame(frame, schema)
    logger.info(f"Loaded panel {panel_file}: N={panel.N}, T={panel.T}, Q={panel.Q}")
    return panel


def panel_to_frame(p: PanelData, schema: Optional[PanelSchema] = None) -> pd.DataFrame:
    """Long-format frame in stacking order (region-major within period)."""
    schema = schema or PanelSchema()
    regions = np.tile(np.array(p.region_ids, dtype=object), p.T)
    periods = np.repeat(np.array(p.period_ids, dtype=object), p.N)
    data = {schema.region: regions, schema.period: periods, schema.y: stack(p.y)}
    Xs = stack(p.X)
    for k, name in enumerate(p.var_names):
        data[name] = Xs[:, k]
    return pd.DataFrame(data)


def write_panel(p: PanelData, path: Union[str, Path], schema: Optional[PanelSchema] = None):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    panel_to_frame(p, schema).to_csv(path, index=False, float_format="%.17g")
