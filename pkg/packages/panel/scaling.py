from typing import Iterable, Optional

import numpy as np

from packages.core.errors import AlreadyDemeaned, SchemaError
from packages.panel.data import PanelData


def scale_variables(p: PanelData, names: Optional[Iterable[str]] = None) -> PanelData:
    """
    Standardise the named regressors to mean 0, sd 1 over all N*T cells.

    Off by default in every pipeline; applied before demeaning. names=None
    scales every regressor. Zero-variance columns are left as they are.
    """
    if p.demeaned:
        raise AlreadyDemeaned("Scale regressors before demeaning")
    targets = list(p.var_names) if names is None else list(names)
    unknown = [n for n in targets if n not in p.var_names]
    if unknown:
        raise SchemaError(f"Unknown regressors for scaling: {unknown}")

    X = np.array(p.X, copy=True)
    scaled = list(p.scaled)
    for name in targets:
        k = p.var_names.index(name)
        col = X[:, :, k]
        sd = col.std()
        if sd > 0:
            X[:, :, k] = (col - col.mean()) / sd
            if name not in scaled:
                scaled.append(name)
    return p.with_values(X=X, scaled=tuple(scaled))
