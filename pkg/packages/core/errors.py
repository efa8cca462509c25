"""
Domain exceptions.

Two families map onto CLI exit codes: DataError (2) for malformed or
inconsistent inputs, NumericalError (3) for breakdowns inside the estimator.
"""

from typing import Iterable, List, Optional, Sequence, Tuple


class SpilloverError(Exception):
    """Base class for every error raised by the spillover packages."""

    exit_code: int = 3


class DataError(SpilloverError):
    exit_code = 2


class NumericalError(SpilloverError):
    exit_code = 3


# -- panel ------------------------------------------------------------------


class SchemaError(DataError):
    pass


class InputFileMissing(DataError):
    def __init__(self, path: str):
        self.path = str(path)
        super().__init__(f"File not found: {self.path}")


class MissingCell(DataError):
    def __init__(self, cells: Sequence[Tuple[str, str]]):
        self.cells: List[Tuple[str, str]] = list(cells)
        preview = ", ".join(f"({r}, {t})" for r, t in self.cells[:10])
        more = f" ... and {len(self.cells) - 10} more" if len(self.cells) > 10 else ""
        super().__init__(f"Unbalanced panel, missing (region, period) cells: {preview}{more}")


class DuplicateCell(DataError):
    def __init__(self, cells: Sequence[Tuple[str, str]]):
        self.cells: List[Tuple[str, str]] = list(cells)
        preview = ", ".join(f"({r}, {t})" for r, t in self.cells[:10])
        super().__init__(f"Duplicate (region, period) cells: {preview}")


class NonNumericValue(DataError):
    def __init__(self, column: str, values: Iterable[str]):
        self.column = column
        self.values = list(values)
        super().__init__(f"Non-numeric values in column '{column}': {self.values[:5]}")


class AlreadyDemeaned(DataError):
    pass


class NotDemeaned(DataError):
    pass


class DimensionMismatch(DataError):
    pass


# -- weights ----------------------------------------------------------------


class TooFewRegions(DataError):
    def __init__(self, n: int, k: int):
        self.n = n
        self.k = k
        super().__init__(f"k-NN needs more than k regions: N={n}, k={k}")


class CoincidentPoints(DataError):
    def __init__(self, pairs: Sequence[Tuple[int, int]]):
        self.pairs: List[Tuple[int, int]] = list(pairs)
        super().__init__(f"Coincident region coordinates (index pairs): {self.pairs[:10]}")


class EmptyRow(DataError):
    def __init__(self, rows: Sequence[int]):
        self.rows = list(rows)
        super().__init__(f"Rows without neighbors cannot be row-normalized: {self.rows[:10]}")


class InvalidWeights(DataError):
    pass


# -- sampler / reporting ----------------------------------------------------


class GridMissing(DataError):
    pass


class StaleDraws(DataError):
    def __init__(self, expected: str, found: str):
        self.expected = expected
        self.found = found
        super().__init__(
            f"Draws were produced for weight matrix {found[:12]}..., "
            f"current weight matrix is {expected[:12]}..."
        )


class InsufficientDraws(DataError):
    def __init__(self, have: int, need: int):
        self.have = have
        self.need = need
        super().__init__(f"Need at least {need} draws, got {have}")


# -- numerical --------------------------------------------------------------


class SingularAtGridPoint(NumericalError):
    def __init__(self, rho: float):
        self.rho = rho
        super().__init__(f"I - rho*W is singular at rho={rho:.6f}")


class OutOfSupport(NumericalError):
    def __init__(self, rho: float):
        self.rho = rho
        super().__init__(f"rho={rho} lies outside the open interval (-1, 1)")


class NonPosDefPrecision(NumericalError):
    pass


class DegenerateResidual(NumericalError):
    pass


class QuadratureUnderflow(NumericalError):
    pass


class AllInfinite(NumericalError):
    pass


class SeriesNotConverged(NumericalError):
    def __init__(self, m: int, required_m: int, bound: float):
        self.m = m
        self.required_m = required_m
        self.bound = bound
        super().__init__(
            f"Series of order {m} leaves a tail bound of {bound:.3e}; "
            f"order {required_m} is required"
        )


class ZeroVariance(NumericalError):
    pass


def exit_code_for(error: BaseException, default: Optional[int] = None) -> Optional[int]:
    """Exit code for a domain error, or `default` for anything else."""
    if isinstance(error, SpilloverError):
        return error.exit_code
    return default
