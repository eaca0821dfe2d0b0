"""
Analysis package.
Nonlinear time-series diagnostics: delay embedding, recurrence
quantification, power spectra, first-return statistics and largest
Lyapunov exponents.
"""

from .embedding import (
    Embedding,
    average_mutual_information,
    choose_delay,
    choose_dimension,
    embed,
    false_nearest_fraction,
    trajectory_vectors,
)
from .recurrence import RecurrenceMatrix, RQASummary, recurrence, rqa_summary
from .spectrum import Spectrum, mean_period_samples, power_spectrum, spectral_peak_count
from .return_times import ReturnTimeDistribution, densest_cell, first_return_times
from .lyapunov import LyapunovEstimate, lyapunov_rosenstein, lyapunov_wolf

__all__ = [
    'Embedding', 'average_mutual_information', 'choose_delay', 'choose_dimension', 'embed',
    'false_nearest_fraction', 'trajectory_vectors',
    'RecurrenceMatrix', 'RQASummary', 'recurrence', 'rqa_summary',
    'Spectrum', 'mean_period_samples', 'power_spectrum', 'spectral_peak_count',
    'ReturnTimeDistribution', 'densest_cell', 'first_return_times',
    'LyapunovEstimate', 'lyapunov_rosenstein', 'lyapunov_wolf',
]
