"""
Spectrum Module
Hann-tapered one-sided periodograms and the peak counting used to tell
discrete spectra from broadband ones.
"""

import logging
from dataclasses import dataclass

import numpy as np
from scipy import signal

from src.errors import DomainError, LengthError

logger = logging.getLogger(__name__)

MIN_SPECTRUM_LENGTH = 64
MAX_THEILER_FRACTION = 0.1
MIN_PEAK_CYCLES = 3


@dataclass(frozen=True, eq=False)
class Spectrum:
    """
    One-sided power spectral density.

    Args:
        frequencies (np.ndarray): Cycles per unit time, 0 .. Nyquist
        power (np.ndarray): Density per unit frequency, >= 0
        window (str): Taper applied before the transform
    """

    frequencies: np.ndarray
    power: np.ndarray
    window: str = 'hann'

    @property
    def resolution(self):
        return float(self.frequencies[1] - self.frequencies[0])

    def total_power(self):
        """Integral of the density, equal to the mean square of the tapered series."""
        return float(np.sum(self.power) * self.resolution)


def tapered(values):
    """De-meaned series multiplied by a periodic Hann window."""
    centred = np.asarray(values, dtype=float) - np.mean(values)
    return centred * signal.windows.hann(centred.size, sym=False)


def power_spectrum(series):
    """
    Periodogram of a TimeSeries with the mean removed and a Hann taper.

    The density is normalised so that sum(power) * df equals the mean
    square of the tapered series.

    Returns:
        Spectrum: frequencies and power
    """
    n = len(series)
    if n < MIN_SPECTRUM_LENGTH:
        raise LengthError(f"power spectrum needs >= {MIN_SPECTRUM_LENGTH} samples, got {n}")
    coeffs = np.fft.rfft(tapered(series.values))
    freqs = np.fft.rfftfreq(n, series.dt)
    df = 1.0 / (n * series.dt)
    power = np.abs(coeffs) ** 2 / (n * n * df)
    # fold negative frequencies onto positive ones; DC and Nyquist appear once
    stop = -1 if n % 2 == 0 else None
    power[1:stop] *= 2.0
    return Spectrum(freqs, power, 'hann')


def spectral_peak_count(spec, prominence_fraction=0.05, min_cycles=MIN_PEAK_CYCLES):
    """
    Number of amplitude-spectrum maxima with prominence >= fraction * max amplitude.

    Lines completing fewer than min_cycles oscillations over the record are
    not resolved as separate frequencies and are ignored.
    """
    if not (0.0 < prominence_fraction < 1.0):
        raise DomainError(f"prominence_fraction must lie in (0, 1), got {prominence_fraction}")
    amplitude = np.sqrt(spec.power)
    # bin k completes k cycles over the record
    peaks, _ = signal.find_peaks(amplitude, prominence=prominence_fraction * float(amplitude[1:].max()))
    return int(np.count_nonzero(peaks >= min_cycles))


def dominant_frequency(spec):
    """Frequency of the largest non-DC spectral line."""
    k = int(np.argmax(spec.power[1:])) + 1
    return float(spec.frequencies[k])


def upward_crossings(values):
    """Fractional sample positions where the de-meaned series crosses zero upwards."""
    centred = np.asarray(values, dtype=float) - np.mean(values)
    before, after = centred[:-1], centred[1:]
    i = np.nonzero((before < 0) & (after >= 0))[0]
    return i + before[i] / (before[i] - after[i])


def mean_period_samples(series):
    """
    Mean period in samples from the spacing of upward mean crossings.

    Capped at a tenth of the series length so that neighbour searches keep
    enough candidates.
    """
    cap = max(1, int(MAX_THEILER_FRACTION * len(series)))
    crossings = upward_crossings(series.values)
    if crossings.size < 2:
        logger.warning(f"Fewer than two mean crossings, using the cap of {cap} samples")
        return cap
    period = max(1, round((crossings[-1] - crossings[0]) / (crossings.size - 1)))
    if period > cap:
        logger.warning(f"Mean period of {period} samples capped at {cap}")
        return cap
    return period
