"""
Sweep Module
Regime labels over a grid of (q, alpha) points and the largest Lyapunov
exponent as a function of q.
"""

import logging
import math
from dataclasses import dataclass
from multiprocessing import Pool

from src.errors import AdmissibilityError, DomainError, UsageError
from src.oscillator.coherent_state import simulate_series
from src.oscillator.q_algebra import check_amplitude_limit
from src.regime.classifier import Regime, classify
from src.regime.features import extract_features, rosenstein_exponent

logger = logging.getLogger(__name__)

GRID_DECIMALS = 10
BOUNDARY_Q = (0.1, 0.2, 0.99)
SWEEP_COLUMNS = ('q', 'alpha', 'label', 'lambda_max', 'peak_count')


@dataclass(frozen=True)
class SweepPoint:
    """
    Outcome of one grid point.

    Args:
        q (float): Deformation parameter
        alpha (float): Amplitude
        label (str): Regime label, 'Inadmissible' or 'Error'
        lambda_max (float): Rosenstein exponent, NaN when not computed
        peak_count (int): Spectral peaks, -1 when not computed
        error (str): Failure message of an 'Error' point
    """

    q: float
    alpha: float
    label: str
    lambda_max: float = math.nan
    peak_count: int = -1
    error: str = ''

    @property
    def key(self):
        return grid_key(self.q, self.alpha)

    def to_dict(self):
        return {
            'q': self.q, 'alpha': self.alpha, 'label': self.label,
            'lambda_max': None if math.isnan(self.lambda_max) else self.lambda_max,
            'peak_count': self.peak_count, 'error': self.error,
        }

    @classmethod
    def from_dict(cls, data):
        lam = data.get('lambda_max')
        return cls(
            float(data['q']), float(data['alpha']), str(data['label']),
            math.nan if lam is None else float(lam),
            int(data.get('peak_count', -1)), str(data.get('error', '')),
        )


def grid_key(q, alpha):
    return (round(float(q), GRID_DECIMALS), round(float(alpha), GRID_DECIMALS))


@dataclass(frozen=True, eq=False)
class PhaseDiagram:
    """
    Labels over q_grid x alpha_grid.

    Args:
        q_grid (tuple): Deformation values (columns)
        alpha_grid (tuple): Amplitudes (rows)
        points (dict): grid_key(q, alpha) -> SweepPoint
    """

    q_grid: tuple
    alpha_grid: tuple
    points: dict

    def point(self, q, alpha):
        return self.points[grid_key(q, alpha)]

    def ordered_points(self):
        """Points in fixed grid order: alpha outer, q inner."""
        return [self.point(q, a) for a in self.alpha_grid for q in self.q_grid]

    @property
    def labels(self):
        """Label matrix with one row per alpha and one column per q."""
        return [[self.point(q, a).label for q in self.q_grid] for a in self.alpha_grid]

    def rows(self):
        """Values for the columns q, alpha, label, lambda_max, peak_count."""
        return [(p.q, p.alpha, p.label, p.lambda_max, p.peak_count) for p in self.ordered_points()]


def build_grid(start, stop, step):
    """Values start, start + step, ... up to and including stop."""
    if not step > 0:
        raise UsageError(f"grid step must be positive, got {step}")
    if stop < start:
        return []
    count = int(math.floor((stop - start) / step + 1e-9)) + 1
    return [round(start + k * step, GRID_DECIMALS) for k in range(count)]


def refine_grid(grid, boundaries=BOUNDARY_Q, factor=2):
    """
    Subdivide the grid intervals that touch a boundary by `factor`.

    An interval [a, b] touches a boundary c when a - (b - a) <= c <= b + (b - a).
    """
    if factor < 2:
        return list(grid)
    grid = sorted(set(round(float(g), GRID_DECIMALS) for g in grid))
    refined = set(grid)
    for a, b in zip(grid[:-1], grid[1:]):
        width = b - a
        if any(a - width <= c <= b + width for c in boundaries):
            refined.update(round(a + k * width / factor, GRID_DECIMALS) for k in range(1, factor))
    return sorted(refined)


def evaluate_point(job):
    """
    Simulate, analyse and classify one grid point. Never raises.

    Args:
        job (tuple): (SweepConfig, q, alpha)
    """
    config, q, alpha = job
    if not check_amplitude_limit(q, alpha):
        logger.info(f"q={q:.4g} alpha={alpha:.4g}: inadmissible")
        return SweepPoint(q, alpha, Regime.INADMISSIBLE.value)
    try:
        params = config.point_config(q, alpha).params()
        x, p = simulate_series(params, config.t0, config.dt, config.steps)
        features = extract_features(x, config.settings, p)
        label = classify(features, config.settings.lambda_threshold)
    except Exception as e:
        logger.error(f"q={q:.4g} alpha={alpha:.4g}: {type(e).__name__}: {e}")
        return SweepPoint(q, alpha, Regime.ERROR.value, error=f"{type(e).__name__}: {e}")
    logger.info(f"q={q:.4g} alpha={alpha:.4g}: {label.label} (lambda={features.lambda_max:.4g})")
    return SweepPoint(q, alpha, label.label.value, float(features.lambda_max), int(features.peak_count))


def _run_jobs(function, jobs, workers):
    """Yield results in job order, using a process pool when workers > 1."""
    if workers > 1 and len(jobs) > 1:
        with Pool(min(workers, len(jobs))) as pool:
            yield from pool.imap(function, jobs)
    else:
        for job in jobs:
            yield function(job)


def _unique(values):
    seen = []
    for v in values:
        v = round(float(v), GRID_DECIMALS)
        if v not in seen:
            seen.append(v)
    return tuple(seen)


def sweep(q_grid, alpha_grid, sim_config, known=None, on_result=None):
    """
    Label every (q, alpha) grid point.

    Args:
        q_grid (list): Deformation values in (0, 1]
        alpha_grid (list): Positive amplitudes
        sim_config (SweepConfig): Simulation and analysis settings
        known (dict): Already computed points keyed by grid_key, skipped here
        on_result (callable): Called with every newly computed SweepPoint

    Returns:
        PhaseDiagram: labels in fixed grid order
    """
    config = sim_config.with_grids(_unique(q_grid), _unique(alpha_grid))
    known = dict(known or {})
    points = {key: point for key, point in known.items()}
    jobs = [(config, q, a) for a in config.alpha_grid for q in config.q_grid
            if grid_key(q, a) not in known]
    logger.info(f"Sweep: {len(config.q_grid)} x {len(config.alpha_grid)} grid, "
                f"{len(jobs)} points to compute, {len(config.q_grid) * len(config.alpha_grid) - len(jobs)} known")
    for point in _run_jobs(evaluate_point, jobs, config.workers):
        points[point.key] = point
        if on_result is not None:
            on_result(point)
    grid_points = {grid_key(q, a): points[grid_key(q, a)] for a in config.alpha_grid for q in config.q_grid}
    return PhaseDiagram(config.q_grid, config.alpha_grid, grid_points)


def _curve_point(job):
    config, alpha, q = job
    try:
        params = config.point_config(q, alpha).params()
        x, p = simulate_series(params, config.t0, config.dt, config.steps)
        lam = rosenstein_exponent(x, config.settings, p)
    except Exception as e:
        logger.error(f"lambda(q={q:.4g}) failed: {type(e).__name__}: {e}")
        return q, math.nan
    logger.info(f"lambda(q={q:.4g}, alpha={alpha:.4g}) = {lam:.5g}")
    return q, lam


def lambda_vs_q_curve(alpha, q_grid, sim_config):
    """
    Rosenstein exponent for every q at fixed alpha.

    Points whose analysis fails are reported as NaN.

    Raises:
        AdmissibilityError: if any q on the grid is inadmissible for alpha
    """
    if not len(q_grid):
        raise UsageError("lambda curve needs a non-empty q grid")
    for q in q_grid:
        if not check_amplitude_limit(q, alpha):
            raise AdmissibilityError(q, alpha)
    if not abs(alpha) > 0:
        raise DomainError("alpha must be non-zero for a Lyapunov curve")
    config = sim_config.with_grids(_unique(q_grid), (abs(alpha),))
    jobs = [(config, alpha, q) for q in config.q_grid]
    return [(float(q), float(lam)) for q, lam in _run_jobs(_curve_point, jobs, config.workers)]
