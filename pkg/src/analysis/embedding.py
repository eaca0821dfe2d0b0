"""
Embedding Module
Delay-coordinate reconstruction and the choice of its delay (average mutual
information) and dimension (false nearest neighbours).
"""

import logging
import math
from dataclasses import dataclass

import numpy as np
from scipy.ndimage import uniform_filter1d
from scipy.spatial import cKDTree

from src.errors import LengthError, NoMinimumError

logger = logging.getLogger(__name__)

MIN_SELECTION_LENGTH = 512
AMI_BINS = 32
AMI_SMOOTHING = 5
AMI_FLAT = 0.02
FNN_RATIO = 15.0
FNN_ESCAPE = 2.0
FNN_ACCEPT = 0.02
MAX_DIMENSION = 10


@dataclass(frozen=True, eq=False)
class Embedding:
    """
    Delay vectors v_i = (x_i, x_{i+J}, ..., x_{i+(m-1)J}).

    Args:
        m (int): Embedding dimension
        delay (int): Delay J in samples
        vectors (np.ndarray): Array of shape (count, m)
    """

    m: int
    delay: int
    vectors: np.ndarray

    def __len__(self):
        return self.vectors.shape[0]


def delay_vectors(values, m, delay):
    """Stack delayed copies of values into an (n - (m-1)J, m) array."""
    values = np.asarray(values, dtype=float)
    count = values.size - (m - 1) * delay
    if m < 1 or delay < 1:
        raise LengthError(f"embedding needs m >= 1 and J >= 1, got m={m}, J={delay}")
    if count <= 0:
        raise LengthError(
            f"series of length {values.size} is too short for m={m}, J={delay} "
            f"(needs more than {(m - 1) * delay} samples)"
        )
    return np.column_stack([values[k * delay:k * delay + count] for k in range(m)])


def embed(series, m, delay):
    """
    Delay-embed a TimeSeries.

    Args:
        series (TimeSeries): Input samples
        m (int): Embedding dimension
        delay (int): Delay J in samples

    Returns:
        Embedding: reconstructed state vectors
    """
    return Embedding(m, delay, delay_vectors(series.values, m, delay))


def average_mutual_information(values, lag, bins=AMI_BINS):
    """Histogram estimate of the mutual information between x_t and x_{t+lag}."""
    values = np.asarray(values, dtype=float)
    lo, hi = float(values.min()), float(values.max())
    edges = np.linspace(lo, hi, bins + 1)
    joint, _, _ = np.histogram2d(values[:-lag], values[lag:], bins=[edges, edges])
    p_xy = joint / joint.sum()
    p_x = p_xy.sum(axis=1)
    p_y = p_xy.sum(axis=0)
    mask = p_xy > 0
    return float(np.sum(p_xy[mask] * np.log(p_xy[mask] / np.outer(p_x, p_y)[mask])))


def first_autocorrelation_zero(values, max_lag):
    """First lag at which the sample autocorrelation is <= 0, or None."""
    centred = np.asarray(values, dtype=float) - np.mean(values)
    n = centred.size
    spectrum = np.fft.rfft(centred, 2 * n)
    acf = np.fft.irfft(spectrum * np.conj(spectrum))[:n]
    if acf[0] <= 0:
        return None
    acf = acf / acf[0]
    crossings = np.nonzero(acf[1:max_lag + 1] <= 0)[0]
    return int(crossings[0]) + 1 if crossings.size else None


def _smoothed_minimum(curve, flat=AMI_FLAT):
    """
    Index of the first minimum of the moving-average-smoothed curve.

    The minimum is widened to the basin whose values stay within `flat` of
    the curve's range above it, and the basin's midpoint is returned.
    Returns None when the smoothed curve only falls.
    """
    smooth = uniform_filter1d(np.asarray(curve, dtype=float), size=AMI_SMOOTHING, mode='nearest')
    tolerance = flat * float(np.ptp(smooth))
    for i in range(1, smooth.size - 1):
        if smooth[i] < smooth[i - 1] and smooth[i] <= smooth[i + 1]:
            ceiling = smooth[i] + tolerance
            lo = hi = i
            while lo > 0 and smooth[lo - 1] <= ceiling:
                lo -= 1
            while hi < smooth.size - 1 and smooth[hi + 1] <= ceiling:
                hi += 1
            return (lo + hi) // 2
    return None


def choose_delay(series, max_lag=None, bins=AMI_BINS):
    """
    Delay at the first minimum of the smoothed average mutual information.

    Falls back to the first zero of the autocorrelation when the AMI curve
    has no minimum within max_lag.
    """
    values = series.values
    if values.size < MIN_SELECTION_LENGTH:
        raise LengthError(f"delay selection needs >= {MIN_SELECTION_LENGTH} samples, got {values.size}")
    if np.ptp(values) == 0:
        raise NoMinimumError("constant series carries no information to choose a delay")
    if max_lag is None:
        max_lag = min(values.size // 4, 500)

    # ami[k] holds the value at lag k + 1
    ami = [average_mutual_information(values, lag, bins) for lag in range(1, max_lag + 1)]
    index = _smoothed_minimum(ami)
    if index is not None:
        logger.info(f"Delay selected: J={index + 1} (first smoothed AMI minimum)")
        return index + 1

    delay = first_autocorrelation_zero(values, max_lag)
    if delay is None:
        raise NoMinimumError(f"no AMI minimum and no autocorrelation zero within {max_lag} lags")
    logger.warning(f"No AMI minimum within {max_lag} lags, using autocorrelation zero J={delay}")
    return delay


def trajectory_vectors(values, m, delay, companion=None):
    """
    Delay vectors of x alone, or of the (x, p) pairs when a companion is given.

    With a companion, row i is (x_i, p_i, x_{i+J}, p_{i+J}, ...) over m delays.
    """
    xs = delay_vectors(values, m, delay)
    if companion is None:
        return xs
    companion = np.asarray(companion, dtype=float)
    if companion.size != np.asarray(values).size:
        raise LengthError(f"companion has {companion.size} samples, series has {np.asarray(values).size}")
    points = np.empty((xs.shape[0], 2 * m))
    points[:, 0::2] = xs
    points[:, 1::2] = delay_vectors(companion, m, delay)
    return points


def false_nearest_fraction(values, m, delay, ratio=FNN_RATIO, escape=FNN_ESCAPE, companion=None):
    """
    Fraction of nearest neighbours in dimension m that separate in m+1.

    A neighbour is false when the added coordinate grows the distance by
    more than `ratio` times, or when the (m+1)-distance exceeds `escape`
    times the spread of the series. With a companion the added coordinate
    is the (x, p) pair one delay further on.
    """
    values = np.asarray(values, dtype=float)
    count = values.size - m * delay
    if count < 2:
        raise LengthError(f"series too short for a false-neighbour test at m={m}, J={delay}")
    points = trajectory_vectors(values, m, delay, companion)[:count]
    dist, idx = cKDTree(points).query(points, k=2)
    r_m = dist[:, 1]
    neighbour = idx[:, 1]
    usable = r_m > 0
    if not np.any(usable):
        return 0.0
    extra = values[m * delay:m * delay + count]
    growth = np.abs(extra - extra[neighbour])
    spread = np.std(values)
    if companion is not None:
        companion = np.asarray(companion, dtype=float)
        extra_p = companion[m * delay:m * delay + count]
        growth = np.hypot(growth, extra_p - extra_p[neighbour])
        spread = math.hypot(spread, np.std(companion))
    growth = growth[usable]
    r_m = r_m[usable]
    r_next = np.sqrt(r_m ** 2 + growth ** 2)
    false = (growth / r_m > ratio) | (r_next / spread > escape)
    return float(np.mean(false))


def choose_dimension(series, delay, max_dim=MAX_DIMENSION, accept=FNN_ACCEPT, companion=None):
    """
    Smallest m <= max_dim whose false-nearest-neighbour fraction is below accept.

    Returns the dimension with the lowest fraction when none qualifies.
    """
    values = series.values
    if values.size < MIN_SELECTION_LENGTH:
        raise LengthError(f"dimension selection needs >= {MIN_SELECTION_LENGTH} samples, got {values.size}")
    p_values = None if companion is None else companion.values
    fractions = []
    for m in range(1, max_dim + 1):
        if values.size - m * delay < 2:
            break
        fraction = false_nearest_fraction(values, m, delay, companion=p_values)
        fractions.append(fraction)
        logger.debug(f"FNN: m={m}, fraction={fraction:.4f}")
        if fraction < accept:
            logger.info(f"Dimension selected: m={m} (FNN={fraction:.2%})")
            return m
    if not fractions:
        raise LengthError(f"series too short for any embedding with J={delay}")
    best = int(np.argmin(fractions)) + 1
    logger.warning(f"No dimension reached FNN < {accept:.0%}, using m={best} (minimum FNN)")
    return best
