"""
Coordinate files and weight-matrix triplet files
"""

import logging
from pathlib import Path
from typing import Optional, Sequence, Union

import numpy as np
import pandas as pd
import scipy.sparse as sp

from packages.core.errors import InputFileMissing, SchemaError
from packages.panel.loader import numeric_column, read_delimited
from packages.weights.matrix import WeightMatrix

logger = logging.getLogger(__name__)


def load_coordinates(
    path: Union[str, Path],
    region_ids: Optional[Sequence[str]] = None,
    id_column: str = "region_id",
    x_column: str = "x",
    y_column: str = "y",
) -> np.ndarray:
    """
    Read `region_id, x, y` and return an N x 2 array.

    With region_ids the rows are aligned to that order (the panel's order);
    a region without coordinates is a SchemaError.
    """
    frame = read_delimited(path)
    for col in (id_column, x_column, y_column):
        if col not in frame.columns:
            raise SchemaError(f"Coordinate column '{col}' not found in {path}")

    ids = frame[id_column].astype(str).str.strip()
    if ids.duplicated().any():
        raise SchemaError(f"Duplicate region ids in {path}: {ids[ids.duplicated()].tolist()[:5]}")

    coords = np.column_stack([numeric_column(frame, x_column), numeric_column(frame, y_column)])

    if region_ids is None:
        return coords

    position = {r: i for i, r in enumerate(ids)}
    missing = [r for r in region_ids if str(r) not in position]
    if missing:
        raise SchemaError(f"No coordinates for regions: {missing[:10]}")
    extra = len(ids) - len(region_ids)
    if extra > 0:
        logger.warning(f"{extra} coordinate rows have no matching panel region and are ignored")
    return coords[[position[str(r)] for r in region_ids]]


def save_coordinates(coords: np.ndarray, region_ids: Sequence[str], path: Union[str, Path]):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    pd.DataFrame(
        {"region_id": list(region_ids), "x": coords[:, 0], "y": coords[:, 1]}
    ).to_csv(path, index=False, float_format="%.17g")


def save_triplets(w: WeightMatrix, path: Union[str, Path]):
    """Write the nonzeros as `i, j, weight` (plus region ids when known)."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    coo = w.matrix.tocoo()
    frame = pd.DataFrame({"i": coo.row, "j": coo.col, "weight": coo.data})
    if w.region_ids is not None:
        ids = np.array(w.region_ids, dtype=object)
        frame["region_i"] = ids[coo.row]
        frame["region_j"] = ids[coo.col]
    frame.to_csv(path, index=False, float_format="%.17g")


def load_triplets(
    path: Union[str, Path], n: Optional[int] = None, k: Optional[int] = None
) -> WeightMatrix:
    """Read a triplet file written by save_triplets; the result must be row-stochastic."""
    path = Path(path)
    if not path.exists():
        raise InputFileMissing(str(path))
    frame = pd.read_csv(path, float_precision="round_trip")
    for col in ("i", "j", "weight"):
        if col not in frame.columns:
            raise SchemaError(f"Triplet column '{col}' not found in {path}")

    rows = frame["i"].to_numpy(dtype=np.int64)
    cols = frame["j"].to_numpy(dtype=np.int64)
    size = n if n is not None else int(max(rows.max(), cols.max())) + 1
    weights = frame["weight"].to_numpy(dtype=float)
    matrix = sp.csr_matrix((weights, (rows, cols)), shape=(size, size))

    region_ids = None
    if "region_i" in frame.columns:
        ids = {}
        for idx, rid in zip(rows, frame["region_i"].astype(str)):
            ids[int(idx)] = rid
        for idx, rid in zip(cols, frame["region_j"].astype(str)):
            ids[int(idx)] = rid
        if len(ids) == size:
            region_ids = tuple(ids[i] for i in range(size))
    return WeightMatrix(matrix=matrix, k=k, region_ids=region_ids)
