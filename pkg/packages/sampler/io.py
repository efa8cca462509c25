"""
Draws persistence: draws.csv, v_mean.csv and the draws.json sidecar
"""

import json
import logging
from pathlib import Path
from typing import Dict, List, Optional, Union

import numpy as np
import pandas as pd

from packages.core.errors import InputFileMissing, SchemaError, StaleDraws
from packages.sampler.chain import McmcDraws
from packages.sampler.config import McmcConfig, PriorSpec

logger = logging.getLogger(__name__)

DRAWS_FILE = "draws.csv"
V_MEAN_FILE = "v_mean.csv"
SIDECAR_FILE = "draws.json"


def save_draws(draws: McmcDraws, out_dir: Union[str, Path]) -> List[Path]:
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)

    draws_path = out_dir / DRAWS_FILE
    draws.to_frame().to_csv(draws_path, index=False, float_format="%.17g")

    v_path = out_dir / V_MEAN_FILE
    v_frame = pd.DataFrame(draws.v_mean, columns=list(draws.period_ids))
    v_frame.insert(0, "region_id", list(draws.region_ids))
    v_frame.to_csv(v_path, index=False, float_format="%.17g")

    sidecar: Dict[str, object] = {
        "w_hash": draws.w_hash,
        "var_names": list(draws.var_names),
        "region_ids": list(draws.region_ids),
        "period_ids": list(draws.period_ids),
        "config": draws.config.model_dump(mode="json"),
        "prior": draws.prior.model_dump(mode="json"),
        "acceptance_rate": draws.acceptance_rate,
        "rho_step": draws.rho_step,
        "accepted": draws.accepted.astype(int).tolist(),
        "metadata": draws.metadata,
    }
    sidecar_path = out_dir / SIDECAR_FILE
    sidecar_path.write_text(json.dumps(sidecar, indent=2))

    logger.info(f"Saved {draws.n_retained} draws to {out_dir}")
    return [draws_path, v_path, sidecar_path]


def load_draws(in_dir: Union[str, Path], expected_w_hash: Optional[str] = None) -> McmcDraws:
    """
    Read draws written by save_draws.

    With expected_w_hash set, draws produced for another weight matrix raise StaleDraws.
    """
    in_dir = Path(in_dir)
    sidecar_path = in_dir / SIDECAR_FILE
    draws_path = in_dir / DRAWS_FILE
    v_path = in_dir / V_MEAN_FILE
    for path in (sidecar_path, draws_path, v_path):
        if not path.exists():
            raise InputFileMissing(str(path))

    meta = json.loads(sidecar_path.read_text())
    if expected_w_hash is not None and meta["w_hash"] != expected_w_hash:
        raise StaleDraws(expected=expected_w_hash, found=meta["w_hash"])

    var_names = list(meta["var_names"])
    frame = pd.read_csv(draws_path, float_precision="round_trip")
    expected_cols = (
        [f"beta_{v}" for v in var_names] + [f"theta_{v}" for v in var_names] + ["rho", "sigma2"]
    )
    missing = [c for c in expected_cols if c not in frame.columns]
    if missing:
        raise SchemaError(f"Draws file {draws_path} lacks columns {missing}")

    v_frame = pd.read_csv(v_path, dtype={"region_id": str}, float_precision="round_trip")
    v_mean = v_frame.drop(columns=["region_id"]).to_numpy(dtype=float)

    return McmcDraws(
        beta=frame[[f"beta_{v}" for v in var_names]].to_numpy(dtype=float),
        theta=frame[[f"theta_{v}" for v in var_names]].to_numpy(dtype=float),
        rho=frame["rho"].to_numpy(dtype=float),
        sigma2=frame["sigma2"].to_numpy(dtype=float),
        v_mean=v_mean,
        accepted=np.asarray(meta["accepted"], dtype=bool),
        rho_step=float(meta["rho_step"]),
        var_names=tuple(var_names),
        region_ids=tuple(meta["region_ids"]),
        period_ids=tuple(meta["period_ids"]),
        config=McmcConfig(**meta["config"]),
        prior=PriorSpec(**meta["prior"]),
        w_hash=meta["w_hash"],
        metadata=dict(meta.get("metadata", {})),
    )
