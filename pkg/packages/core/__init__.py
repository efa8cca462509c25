"""
Shared errors, records, settings and hashing helpers
"""

from packages.core.errors import DataError, NumericalError, SpilloverError, exit_code_for
from packages.core.hashing import array_hash, compute_hash, file_hash
from packages.core.settings import EstimationSettings
# Note: RunConfig is NOT imported here to avoid circular imports.
# Import it directly from packages.core.config where needed.

__all__ = [
    "DataError",
    "NumericalError",
    "SpilloverError",
    "exit_code_for",
    "array_hash",
    "compute_hash",
    "file_hash",
    "EstimationSettings",
]
