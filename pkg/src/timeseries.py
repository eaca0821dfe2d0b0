"""
Uniformly sampled real time series, the common currency between the
simulation and the analysis layers.
"""

from dataclasses import dataclass

import numpy as np

from src.errors import DomainError


@dataclass(frozen=True, eq=False)
class TimeSeries:
    """
    Real scalar samples taken at t0 + k*dt.

    Args:
        t0 (float): Time of the first sample (units hbar = omega = 1)
        dt (float): Sampling step, strictly positive
        values (np.ndarray): Finite samples
        name (str): Column label used when the series is written out
    """

    t0: float
    dt: float
    values: np.ndarray
    name: str = 'x'

    def __post_init__(self):
        values = np.array(self.values, dtype=float)
        if values.ndim != 1 or values.size == 0:
            raise DomainError("a time series needs a non-empty 1-D array of samples")
        if not np.all(np.isfinite(values)):
            raise DomainError("time series samples must be finite")
        if not (self.dt > 0 and np.isfinite(self.dt)):
            raise DomainError(f"sampling step must be positive, got dt = {self.dt}")
        values.setflags(write=False)
        object.__setattr__(self, 'values', values)
        object.__setattr__(self, 't0', float(self.t0))
        object.__setattr__(self, 'dt', float(self.dt))

    def __len__(self):
        return self.values.size

    @property
    def times(self):
        """Sample times t0 + k*dt."""
        return self.t0 + self.dt * np.arange(self.values.size)

    def head(self, n):
        """Return the first n samples as a new series."""
        return TimeSeries(self.t0, self.dt, self.values[:n], self.name)

    def shifted(self, offset):
        """Return the series with a constant added to every sample."""
        return TimeSeries(self.t0, self.dt, self.values + offset, self.name)
