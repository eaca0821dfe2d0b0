"""
Return Times Module
First-return times of a series into a small cell of values and their
comparison with the exponential law expected for ergodic dynamics.
"""

import logging
from dataclasses import dataclass

import numpy as np
from scipy import stats

from src.errors import DomainError, InsufficientVisitsError

logger = logging.getLogger(__name__)

MIN_VISITS = 30
KS_LEVEL = 0.05
DENSE_CANDIDATES = 8


@dataclass(frozen=True, eq=False)
class ReturnTimeDistribution:
    """
    Return times into [cell_center - cell_size/2, cell_center + cell_size/2].

    Args:
        cell_center (float): Centre of the cell
        cell_size (float): Width of the cell
        return_times (np.ndarray): Gaps between successive entries
        fitted_mean (float): Mean return time of the fitted exponential
        fit_quality (float): Kolmogorov-Smirnov statistic of the fit
        p_value (float): KS p-value
    """

    cell_center: float
    cell_size: float
    return_times: np.ndarray
    fitted_mean: float
    fit_quality: float
    p_value: float

    @property
    def exponential_pass(self):
        """True when the KS test does not reject the exponential law at 5 %."""
        return self.p_value >= KS_LEVEL

    def density(self, t):
        """Fitted density (1/tau) exp(-t/tau)."""
        return np.exp(-np.asarray(t) / self.fitted_mean) / self.fitted_mean


def cell_entries(values, cell_center, cell_size):
    """Indices where the series moves from outside the cell to inside it."""
    inside = np.abs(np.asarray(values) - cell_center) <= cell_size / 2.0
    return np.nonzero(inside[1:] & ~inside[:-1])[0] + 1


def first_return_times(series, cell_center, cell_size, min_visits=MIN_VISITS):
    """
    Collect first-return times and fit F(t) = (1/tau) exp(-t/tau).

    Args:
        series (TimeSeries): Input samples
        cell_center (float): Centre of the cell
        cell_size (float): Width of the cell, > 0
        min_visits (int): Minimum number of entries required

    Returns:
        ReturnTimeDistribution: return times, tau = their mean and the KS fit
    """
    if cell_size <= 0:
        raise DomainError(f"cell_size must be positive, got {cell_size}")
    entries = cell_entries(series.values, cell_center, cell_size)
    if entries.size < max(min_visits, 2):
        raise InsufficientVisitsError(
            f"cell {cell_center:.6g} +- {cell_size / 2:.3g} entered {entries.size} times, "
            f"need {max(min_visits, 2)}"
        )
    returns = np.diff(entries) * series.dt
    tau = float(np.mean(returns))
    ks = stats.kstest(returns, 'expon', args=(0.0, tau))
    logger.debug(f"return times: {returns.size} returns, tau={tau:.6g}, KS={ks.statistic:.4f} p={ks.pvalue:.3g}")
    return ReturnTimeDistribution(
        cell_center, cell_size, returns, tau, float(ks.statistic), float(ks.pvalue)
    )


def densest_cell(series, cell_size, candidates=DENSE_CANDIDATES):
    """
    Centre of the cell of width cell_size that the series enters most often.

    Entries are first counted on two grids of cells offset by half a width;
    the busiest centres of both are then recounted with cell_entries, so the
    returned cell is entered exactly as often as first_return_times sees.
    """
    if cell_size <= 0:
        raise DomainError(f"cell_size must be positive, got {cell_size}")
    values = series.values
    lo = float(values.min())
    centres = []
    for shift in (0.0, 0.5):
        cells = np.floor((values - lo) / cell_size + shift).astype(np.int64)
        entered = cells[1:][cells[1:] != cells[:-1]]
        if entered.size:
            busiest = np.argsort(np.bincount(entered), kind='stable')[::-1][:candidates]
            centres += [lo + (k - shift + 0.5) * cell_size for k in busiest]
    if not centres:
        return lo + cell_size / 2.0
    counts = [cell_entries(values, c, cell_size).size for c in centres]
    best = int(np.argmax(counts))
    logger.debug(f"densest cell: {centres[best]:.6g} entered {counts[best]} times")
    return centres[best]
