"""
Recurrence Module
Recurrence matrices of reconstructed trajectories and the quantities that
turn their diagonal-line texture into numbers.
"""

import logging
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from scipy import sparse
from scipy.spatial import cKDTree
from scipy.spatial.distance import pdist

from src.analysis.embedding import delay_vectors
from src.errors import AnalysisError, DomainError

logger = logging.getLogger(__name__)

DIAMETER_SAMPLE = 1000
CLUSTER_TOLERANCE = 0.1


@dataclass(frozen=True, eq=False)
class RecurrenceMatrix:
    """
    Symmetric binary recurrence matrix stored as its recurrent pairs.

    Args:
        n (int): Number of state vectors
        epsilon (float): Distance threshold
        rows (np.ndarray): Row index of every recurrent pair
        cols (np.ndarray): Column index of every recurrent pair
    """

    n: int
    epsilon: float
    rows: np.ndarray
    cols: np.ndarray

    def __contains__(self, pair):
        i, j = pair
        return bool(np.any((self.rows == i) & (self.cols == j)))

    def __len__(self):
        return self.rows.size

    def to_sparse(self):
        data = np.ones(self.rows.size, dtype=bool)
        return sparse.csr_matrix((data, (self.rows, self.cols)), shape=(self.n, self.n))

    def upper_pairs(self):
        """Recurrent pairs (i, j) with j > i."""
        mask = self.cols > self.rows
        return self.rows[mask], self.cols[mask]

    @property
    def recurrence_rate(self):
        return self.rows.size / float(self.n * self.n)


class RQASummary(NamedTuple):
    """Diagonal-line statistics of a recurrence matrix."""

    determinism: float
    diag_spacing_cv: float
    distinct_spacing_clusters: int
    recurrence_rate: float


def estimate_diameter(points):
    """Largest pairwise distance among at most DIAMETER_SAMPLE evenly spaced points."""
    stride = max(1, points.shape[0] // DIAMETER_SAMPLE)
    sample = points[::stride]
    if sample.shape[0] < 2:
        return 0.0
    return float(pdist(sample).max())


def recurrence_from_points(points, epsilon_fraction=0.1):
    """Recurrence matrix of an (n, d) trajectory with eps = fraction * diameter."""
    if not (0.0 < epsilon_fraction < 1.0):
        raise DomainError(f"epsilon_fraction must lie in (0, 1), got {epsilon_fraction}")
    points = np.asarray(points, dtype=float)
    n = points.shape[0]
    epsilon = epsilon_fraction * estimate_diameter(points)
    if epsilon == 0.0:
        rows, cols = np.divmod(np.arange(n * n), n)
        return RecurrenceMatrix(n, 0.0, rows, cols)
    pairs = cKDTree(points).query_pairs(epsilon, output_type='ndarray')
    diag = np.arange(n)
    rows = np.concatenate([diag, pairs[:, 0], pairs[:, 1]])
    cols = np.concatenate([diag, pairs[:, 1], pairs[:, 0]])
    order = np.lexsort((cols, rows))
    logger.debug(f"recurrence: n={n}, eps={epsilon:.6g}, {pairs.shape[0]} off-diagonal pairs")
    return RecurrenceMatrix(n, epsilon, rows[order], cols[order])


def recurrence(series, m, delay, epsilon_fraction=0.1, companion=None):
    """
    Recurrence matrix R_ij = 1 iff ||x_i - x_j|| <= eps.

    Args:
        series (TimeSeries): Scalar series (X)
        m (int): Embedding dimension
        delay (int): Embedding delay in samples
        epsilon_fraction (float): eps as a fraction of the trajectory diameter
        companion (TimeSeries): Optional second coordinate (P); when given the
            2-D trajectory (X, P) is used instead of a delay embedding

    Returns:
        RecurrenceMatrix: symmetric matrix including the line of identity
    """
    if companion is not None:
        if len(companion) != len(series):
            raise DomainError("companion series must have the same length")
        points = np.column_stack([series.values, companion.values])
    else:
        points = delay_vectors(series.values, m, delay)
    return recurrence_from_points(points, epsilon_fraction)


def _diagonal_runs(rows, cols):
    """Offsets and lengths of the diagonal line segments among upper pairs."""
    offsets = cols - rows
    order = np.lexsort((rows, offsets))
    offsets = offsets[order]
    rows = rows[order]
    breaks = np.ones(rows.size, dtype=bool)
    breaks[1:] = (np.diff(offsets) != 0) | (np.diff(rows) != 1)
    starts = np.nonzero(breaks)[0]
    lengths = np.diff(np.append(starts, rows.size))
    return offsets[starts], lengths


def _band_centres(occupancy, offsets):
    """Occupancy-weighted centres of contiguous runs of selected offsets."""
    centres = []
    run = [offsets[0]]
    for k in offsets[1:]:
        if k == run[-1] + 1:
            run.append(k)
            continue
        centres.append(np.average(run, weights=occupancy[run]))
        run = [k]
    centres.append(np.average(run, weights=occupancy[run]))
    return np.array(centres)


def _count_clusters(spacings):
    ordered = np.sort(spacings)
    tolerance = max(2.0, CLUSTER_TOLERANCE * float(np.median(ordered)))
    return int(1 + np.count_nonzero(np.diff(ordered) > tolerance))


def rqa_summary(rm, l_min=2, theiler=1):
    """
    Determinism and diagonal-spacing statistics.

    Determinism is the fraction of recurrent points (outside the Theiler
    band) lying on diagonals of length >= l_min. Spacings are measured
    between the occupancy-weighted centres of diagonal bands whose occupancy
    exceeds half the maximum found beyond the band around the line of
    identity.

    Returns:
        RQASummary: determinism, spacing coefficient of variation, number of
        distinct spacing clusters and recurrence rate
    """
    if l_min < 2:
        raise DomainError(f"l_min must be >= 2, got {l_min}")
    if rm.n < 2:
        raise AnalysisError("recurrence matrix is empty")
    rows, cols = rm.upper_pairs()
    keep = (cols - rows) >= max(1, theiler)
    rows, cols = rows[keep], cols[keep]
    if rows.size == 0:
        raise AnalysisError("recurrence matrix has no recurrences off the line of identity")

    _, lengths = _diagonal_runs(rows, cols)
    determinism = float(lengths[lengths >= l_min].sum() / lengths.sum())

    n = rm.n
    offsets = np.arange(n)
    counts = np.bincount(cols - rows, minlength=n).astype(float)
    occupancy = np.zeros(n)
    occupancy[1:] = counts[1:] / (n - offsets[1:])
    # skip the band that hugs the line of identity
    edge = 1
    while edge < n and occupancy[edge] > 0.5 * occupancy[1]:
        edge += 1
    tail = occupancy[edge:]
    if tail.size == 0 or tail.max() == 0:
        return RQASummary(determinism, float('nan'), 0, rm.recurrence_rate)
    selected = np.nonzero(tail > 0.5 * tail.max())[0] + edge
    centres = np.concatenate([[0.0], _band_centres(occupancy, selected)])
    spacings = np.diff(centres)
    cv = float(np.std(spacings) / np.mean(spacings))
    clusters = _count_clusters(spacings)
    logger.debug(f"RQA: DET={determinism:.4f}, {spacings.size} spacings, cv={cv:.4f}, clusters={clusters}")
    return RQASummary(determinism, cv, clusters, rm.recurrence_rate)
