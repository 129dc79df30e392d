"""Time-series container and index helpers used throughout the package.

A series of length T+1 holds observations y_0, y_1, ..., y_T; T is the
effective sample size (number of increments).  All window bounds are
fractions r of T mapped to integer indices via floor(r*T).
"""

from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .errors import SeriesTooShortError

# Fractions within this distance of an integer grid point snap to it, so
# that e.g. 0.58 * 100 (== 57.99999999999999 in floats) maps to 58.
_GRID_SNAP = 1e-9


@dataclass
class TimeSeries:
    """Ordered real-valued observations with an optional label per point."""

    values: np.ndarray
    labels: Optional[Sequence[str]] = field(default=None)

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if self.values.ndim != 1:
            raise ValueError("series values must be one-dimensional")
        if not np.all(np.isfinite(self.values)):
            raise ValueError("series values must be finite")
        if self.labels is not None and len(self.labels) != len(self.values):
            raise ValueError("labels length must match values length")

    @property
    def T(self) -> int:
        return len(self.values) - 1

    def __len__(self) -> int:
        return len(self.values)

    def label_at(self, index: int) -> str:
        if self.labels is not None:
            return str(self.labels[index])
        return str(index)


def as_values(series) -> np.ndarray:
    """Accept a TimeSeries or array-like; return a 1-D float array."""
    if isinstance(series, TimeSeries):
        return series.values
    arr = np.asarray(series, dtype=float)
    if arr.ndim != 1:
        raise ValueError("series must be one-dimensional")
    return arr


def require_length(values: np.ndarray, min_obs: int, what: str) -> None:
    if len(values) < min_obs:
        raise SeriesTooShortError(
            f"{what} needs at least {min_obs} observations, got {len(values)}"
        )


def floor_index(frac: float, T: int) -> int:
    """floor(frac*T) with a snap to the nearest integer within 1e-9."""
    x = frac * T
    n = int(np.floor(x))
    if x - n > 1.0 - _GRID_SNAP:
        n += 1
    return n
