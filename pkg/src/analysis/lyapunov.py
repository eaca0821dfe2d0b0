"""
Lyapunov Module
Largest Lyapunov exponent of a scalar series, estimated from the mean
divergence of nearest neighbours (Rosenstein) and by following a single
fiducial trajectory with neighbour replacement (Wolf).
"""

import logging
import math
from dataclasses import dataclass

import numpy as np
from scipy.spatial import cKDTree

from src.analysis.embedding import trajectory_vectors
from src.analysis.recurrence import estimate_diameter
from src.errors import DomainError, NoNeighborError

logger = logging.getLogger(__name__)

ROSENSTEIN = 'rosenstein'
WOLF = 'wolf'
HALF_RISE = 0.5
MIN_FIT_POINTS = 3
DIVERGENCE_REACH = 0.09
QUERY_CHUNK = 2048
MAX_REPLACEMENT_ANGLE = 1.0


@dataclass(frozen=True, eq=False)
class LyapunovEstimate:
    """
    Divergence curve and the exponent fitted to it.

    Args:
        times (np.ndarray): j * dt for every curve point
        log_divergence (np.ndarray): <ln d(j)> (Rosenstein) or the
            accumulated log stretch (Wolf)
        fit_window (tuple): Half-open index range (start, stop) of the fit
        lambda_max (float): Exponent in inverse time units
        method (str): 'rosenstein' or 'wolf'
        linear_region_found (bool): False when the default window was used
        diverged (bool): False when neighbours never left the bounded scale
            and lambda_max was set to 0
    """

    times: np.ndarray
    log_divergence: np.ndarray
    fit_window: tuple
    lambda_max: float
    method: str
    linear_region_found: bool = True
    diverged: bool = True

    def fit_line(self):
        """Intercept and slope of the straight line over the fit window."""
        start, stop = self.fit_window
        if not self.diverged:
            return float(np.mean(self.log_divergence[start:stop])), 0.0
        slope, intercept = np.polyfit(self.times[start:stop], self.log_divergence[start:stop], 1)
        return intercept, slope


def nearest_neighbours(points, theiler):
    """
    Index and distance of each point's nearest neighbour at least
    theiler + 1 samples away in time.
    """
    n = points.shape[0]
    k = min(2 * theiler + 2, n)
    if n < 2 * theiler + 2:
        raise NoNeighborError(
            f"{n} reference points cannot supply neighbours outside a Theiler window of {theiler}"
        )
    tree = cKDTree(points)
    index = np.empty(n, dtype=np.int64)
    distance = np.empty(n)
    for start in range(0, n, QUERY_CHUNK):
        stop = min(start + QUERY_CHUNK, n)
        dist, idx = tree.query(points[start:stop], k=k)
        own = np.arange(start, stop)[:, None]
        valid = np.abs(idx - own) > theiler
        # at most 2*theiler + 1 candidates fall inside the window
        first = np.argmax(valid, axis=1)
        rows = np.arange(stop - start)
        index[start:stop] = idx[rows, first]
        distance[start:stop] = dist[rows, first]
    return index, distance


def linear_region(curve, min_points=MIN_FIT_POINTS):
    """
    Initial rise of the divergence curve, from j = 0 up to the first point
    that covers half of the total rise.

    Returns:
        tuple or None: half-open index range, None when the curve never
        rises or the rise is shorter than min_points
    """
    curve = np.asarray(curve, dtype=float)
    top = float(curve.max())
    if top <= curve[0]:
        return None
    stop = int(np.argmax(curve >= curve[0] + HALF_RISE * (top - curve[0]))) + 1
    if stop < min_points:
        return None
    return (0, stop)


def lyapunov_rosenstein(series, m, delay, theiler, horizon, fit_window=None, companion=None):
    """
    Rosenstein estimate of the largest Lyapunov exponent.

    Neighbour pairs that never separate beyond DIVERGENCE_REACH of the
    attractor diameter within the horizon show no exponential divergence;
    the exponent is then 0 and the whole curve is reported as the window.

    Args:
        series (TimeSeries): Scalar series
        m (int): Embedding dimension
        delay (int): Embedding delay in samples
        theiler (int): Minimum temporal separation of neighbours in samples
        horizon (int): Number of steps each neighbour pair is followed
        fit_window (tuple): Optional (start, stop) override of the fit range
        companion (TimeSeries): Optional P series; the trajectory is then
            built from (x, p) pairs

    Returns:
        LyapunovEstimate: mean log-divergence curve and its fitted slope
    """
    if horizon < 4:
        raise DomainError(f"horizon must be >= 4, got {horizon}")
    points = trajectory_vectors(series.values, m, delay, None if companion is None else companion.values)
    n_ref = points.shape[0] - horizon
    if n_ref < 2:
        raise NoNeighborError(f"series too short to follow neighbours for {horizon} steps")
    neighbour, _ = nearest_neighbours(points[:n_ref], theiler)
    reference = np.arange(n_ref)

    curve = np.empty(horizon)
    for j in range(horizon):
        d = np.linalg.norm(points[reference + j] - points[neighbour + j], axis=1)
        d = d[d > 0]
        if d.size == 0:
            raise NoNeighborError(f"all neighbour pairs coincide at step {j}")
        curve[j] = np.mean(np.log(d))
    times = np.arange(horizon) * series.dt

    found = True
    if fit_window is None:
        reach = math.log(DIVERGENCE_REACH * estimate_diameter(points))
        if curve.max() < reach:
            logger.warning(f"Neighbours stay within {DIVERGENCE_REACH:.0%} of the attractor diameter, "
                           f"no divergence over {horizon} steps")
            logger.info(f"Rosenstein: m={m}, J={delay}, theiler={theiler}, lambda=0 (bounded)")
            return LyapunovEstimate(times, curve, (0, horizon), 0.0, ROSENSTEIN, False, diverged=False)
        fit_window = linear_region(curve)
        if fit_window is None:
            found = False
            fit_window = (1, max(3, horizon // 4))
            logger.warning(f"No linear divergence region found, fitting j in [{fit_window[0]}, {fit_window[1]})")
    start, stop = fit_window
    if not (0 <= start < stop <= horizon and stop - start >= 2):
        raise DomainError(f"fit window {fit_window} does not lie inside the curve of {horizon} points")
    slope = float(np.polyfit(times[start:stop], curve[start:stop], 1)[0])
    logger.info(f"Rosenstein: m={m}, J={delay}, theiler={theiler}, window={fit_window}, lambda={slope:.5g}")
    return LyapunovEstimate(times, curve, (start, stop), slope, ROSENSTEIN, found)


def _replacement(tree, points, anchor, previous, max_sep, min_sep, theiler, limit):
    """
    Neighbour of points[anchor] that best preserves the direction towards
    points[previous], searched within max_sep and outside the Theiler window.
    """
    direction = points[previous] - points[anchor]
    candidates = np.array(tree.query_ball_point(points[anchor], max_sep), dtype=np.int64)
    if candidates.size:
        candidates = candidates[(np.abs(candidates - anchor) > theiler) & (candidates < limit)]
        offsets = points[candidates] - points[anchor]
        seps = np.linalg.norm(offsets, axis=1)
        keep = seps > min_sep
        candidates, offsets, seps = candidates[keep], offsets[keep], seps[keep]
    if candidates.size:
        norm = np.linalg.norm(direction)
        if norm == 0:
            return int(candidates[np.argmin(seps)])
        cosine = offsets @ direction / (seps * norm)
        aligned = cosine >= math.cos(MAX_REPLACEMENT_ANGLE)
        if np.any(aligned):
            # closest among the well-aligned candidates
            return int(candidates[aligned][np.argmin(seps[aligned])])
        return int(candidates[np.argmax(cosine)])
    return _nearest_valid(tree, points, anchor, min_sep, theiler, limit)


def _nearest_valid(tree, points, anchor, min_sep, theiler, limit):
    k = min(points.shape[0], 2 * theiler + 34)
    dist, idx = tree.query(points[anchor], k=k)
    valid = (np.abs(idx - anchor) > theiler) & (idx < limit) & (dist > min_sep) & np.isfinite(dist)
    if not np.any(valid):
        raise NoNeighborError(f"no neighbour for point {anchor} outside the Theiler window")
    return int(idx[np.argmax(valid)])


def lyapunov_wolf(series, m, delay, evolve_steps, replace_threshold, theiler=0, companion=None):
    """
    Wolf estimate of the largest Lyapunov exponent.

    A fiducial trajectory and one neighbour are evolved for evolve_steps
    samples at a time; the log of the separation growth is accumulated and
    the neighbour is replaced, keeping its orientation, whenever the
    separation exceeds replace_threshold times the attractor diameter.
    With a companion P series the trajectory is built from (x, p) pairs.

    Returns:
        LyapunovEstimate: accumulated log stretch versus time and the mean rate
    """
    if evolve_steps < 1:
        raise DomainError(f"evolve_steps must be >= 1, got {evolve_steps}")
    if not (0.0 < replace_threshold < 1.0):
        raise DomainError(f"replace_threshold must lie in (0, 1), got {replace_threshold}")
    points = trajectory_vectors(series.values, m, delay, None if companion is None else companion.values)
    n = points.shape[0]
    limit = n - evolve_steps
    if limit < 2 * theiler + 2:
        raise NoNeighborError(f"series too short for Wolf evolution with theiler={theiler}")
    size = estimate_diameter(points)
    max_sep = replace_threshold * size
    min_sep = 1e-9 * size
    tree = cKDTree(points)

    anchor = 0
    partner = _nearest_valid(tree, points, anchor, min_sep, theiler, limit)
    stretch = 0.0
    times, curve = [0.0], [0.0]
    replacements = 0
    while anchor < limit and partner < limit:
        d0 = np.linalg.norm(points[partner] - points[anchor])
        anchor += evolve_steps
        partner += evolve_steps
        d1 = np.linalg.norm(points[partner] - points[anchor])
        if d1 > 0:
            stretch += np.log(d1 / d0)
        times.append(anchor * series.dt)
        curve.append(stretch)
        if anchor >= limit:
            break
        if d1 > max_sep or d1 <= min_sep or partner >= limit:
            partner = _replacement(tree, points, anchor, min(partner, n - 1), max_sep, min_sep, theiler, limit)
            replacements += 1

    times = np.array(times)
    curve = np.array(curve)
    if times.size < 2:
        raise NoNeighborError("Wolf evolution produced no steps")
    rate = float(curve[-1] / times[-1])
    logger.info(f"Wolf: m={m}, J={delay}, steps={times.size - 1}, replacements={replacements}, lambda={rate:.5g}")
    return LyapunovEstimate(times, curve, (0, times.size), rate, WOLF)
