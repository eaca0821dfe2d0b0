"""
Configuration Module
Run, analysis and sweep settings, their hashes, and the environment
variables that override output location, log level and worker count.
"""

import hashlib
import json
import logging
import os
from dataclasses import asdict, dataclass, field, replace
from typing import Optional

from dotenv import load_dotenv

from src.errors import DomainError, UsageError
from src.oscillator.coherent_state import OscillatorParams
from src.oscillator.q_algebra import check_q

logger = logging.getLogger(__name__)

ANALYSES = ('spectrum', 'recurrence', 'return_times', 'lyapunov')
DEFAULT_OUTPUT_DIR = 'output'


def load_environment():
    """Read a .env file, if present, into os.environ."""
    load_dotenv()


def env_output_dir(default=DEFAULT_OUTPUT_DIR):
    return os.environ.get('QOSC_OUTPUT_DIR', default)


def env_log_level():
    level = os.environ.get('QOSC_LOG_LEVEL', 'INFO').upper()
    if not isinstance(logging.getLevelName(level), int):
        logger.warning(f"Unknown QOSC_LOG_LEVEL={level}, using INFO")
        return 'INFO'
    return level


def env_workers():
    raw = os.environ.get('QOSC_WORKERS', '1')
    try:
        return max(1, int(raw))
    except ValueError:
        logger.warning(f"QOSC_WORKERS={raw!r} is not an integer, using 1 worker")
        return 1


def stable_hash(payload):
    """sha1 of the key-sorted JSON form of payload."""
    return hashlib.sha1(json.dumps(payload, sort_keys=True).encode()).hexdigest()


def _alpha_fields(alpha):
    alpha = complex(alpha)
    return {'alpha_re': alpha.real, 'alpha_im': alpha.imag}


@dataclass(frozen=True)
class AnalysisSettings:
    """
    Tunable knobs of the diagnostics and of the regime classifier.

    Args:
        epsilon_fraction (float): Recurrence threshold as a fraction of the diameter
        l_min (int): Minimum diagonal length counted by determinism
        prominence_fraction (float): Spectral peak prominence relative to the maximum
        cell_size (float): Width of the first-return cell
        min_visits (int): Entries required before return times are fitted
        horizon (int): Steps each Rosenstein neighbour pair is followed
        evolve_steps (int): Wolf evolution length between replacements
        replace_threshold (float): Wolf replacement distance as a fraction of the diameter
        rqa_points (int): Samples of the series used for the recurrence matrix
        lambda_threshold (float): Exponent above which a point may be labelled chaotic
        min_feature_length (int): Shortest series accepted by feature extraction
        theiler (int): Fixed Theiler window; None derives it from the mean period
        use_phase_trajectory (bool): Build recurrence from (X, P) when P is available
    """

    epsilon_fraction: float = 0.1
    l_min: int = 2
    prominence_fraction: float = 0.05
    cell_size: float = 1e-3
    min_visits: int = 30
    horizon: int = 400
    evolve_steps: int = 20
    replace_threshold: float = 0.05
    rqa_points: int = 2000
    lambda_threshold: float = 0.01
    min_feature_length: int = 10000
    theiler: Optional[int] = None
    use_phase_trajectory: bool = False

    def __post_init__(self):
        for name in ('epsilon_fraction', 'prominence_fraction', 'replace_threshold'):
            value = getattr(self, name)
            if not (0.0 < value < 1.0):
                raise DomainError(f"{name} must lie in (0, 1), got {value}")
        if self.l_min < 2:
            raise DomainError(f"l_min must be >= 2, got {self.l_min}")
        if not self.cell_size > 0:
            raise DomainError(f"cell_size must be positive, got {self.cell_size}")
        if not self.lambda_threshold > 0:
            raise DomainError(f"lambda_threshold must be positive, got {self.lambda_threshold}")
        if self.horizon < 4 or self.evolve_steps < 1 or self.rqa_points < 16:
            raise DomainError("horizon >= 4, evolve_steps >= 1 and rqa_points >= 16 are required")
        if self.theiler is not None and self.theiler < 0:
            raise DomainError(f"theiler must be >= 0, got {self.theiler}")

    def to_dict(self):
        return asdict(self)


@dataclass(frozen=True)
class RunConfig:
    """
    Everything that determines a simulate/analyze run.

    The pipeline is deterministic, so the config hash identifies the
    results completely.
    """

    q: float
    alpha: complex
    t0: float = 0.0
    dt: float = 0.1
    steps: int = 15000
    trunc_tol: float = 1e-12
    max_terms: int = 20000
    output_dir: str = DEFAULT_OUTPUT_DIR
    analyses: tuple = ANALYSES
    settings: AnalysisSettings = field(default_factory=AnalysisSettings)

    def __post_init__(self):
        object.__setattr__(self, 'alpha', complex(self.alpha))
        object.__setattr__(self, 'analyses', tuple(self.analyses))
        unknown = set(self.analyses) - set(ANALYSES)
        if unknown:
            raise UsageError(f"unknown analyses: {', '.join(sorted(unknown))}")
        if not self.dt > 0:
            raise DomainError(f"dt must be positive, got {self.dt}")
        if self.steps < 2:
            raise DomainError(f"steps must be >= 2, got {self.steps}")
        # raises AdmissibilityError before anything is computed
        self.params()

    def params(self):
        return OscillatorParams(self.q, self.alpha, self.trunc_tol, self.max_terms)

    def to_dict(self):
        payload = {
            'q': self.q,
            't0': self.t0,
            'dt': self.dt,
            'steps': self.steps,
            'trunc_tol': self.trunc_tol,
            'max_terms': self.max_terms,
            'output_dir': self.output_dir,
            'analyses': list(self.analyses),
            'settings': self.settings.to_dict(),
        }
        payload.update(_alpha_fields(self.alpha))
        return payload

    def config_hash(self):
        return stable_hash(self.to_dict())


@dataclass(frozen=True)
class SweepConfig:
    """
    Grid and per-point simulation settings of a regime sweep.

    Args:
        q_grid (tuple): Deformation values, each in (0, 1]
        alpha_grid (tuple): Real amplitudes, each > 0
        workers (int): Process count; does not enter the hash
    """

    q_grid: tuple
    alpha_grid: tuple
    t0: float = 0.0
    dt: float = 0.1
    steps: int = 15000
    trunc_tol: float = 1e-12
    max_terms: int = 20000
    settings: AnalysisSettings = field(default_factory=AnalysisSettings)
    workers: int = 1

    def __post_init__(self):
        object.__setattr__(self, 'q_grid', tuple(float(q) for q in self.q_grid))
        object.__setattr__(self, 'alpha_grid', tuple(float(a) for a in self.alpha_grid))
        if not self.q_grid or not self.alpha_grid:
            raise UsageError("sweep needs a non-empty q grid and a non-empty alpha grid")
        for q in self.q_grid:
            check_q(q)
        for alpha in self.alpha_grid:
            if not alpha > 0:
                raise DomainError(f"alpha grid values must be positive, got {alpha}")
        if self.workers < 1:
            raise UsageError(f"workers must be >= 1, got {self.workers}")

    def point_config(self, q, alpha):
        """RunConfig for one grid point (raises AdmissibilityError when inadmissible)."""
        return RunConfig(
            q, alpha, self.t0, self.dt, self.steps, self.trunc_tol, self.max_terms,
            settings=self.settings,
        )

    def with_grids(self, q_grid, alpha_grid):
        return replace(self, q_grid=tuple(q_grid), alpha_grid=tuple(alpha_grid))

    def to_dict(self):
        return {
            'q_grid': list(self.q_grid),
            'alpha_grid': list(self.alpha_grid),
            't0': self.t0,
            'dt': self.dt,
            'steps': self.steps,
            'trunc_tol': self.trunc_tol,
            'max_terms': self.max_terms,
            'settings': self.settings.to_dict(),
        }

    def point_hash(self):
        """Hash of everything but the grids; identifies compatible sweep results."""
        payload = self.to_dict()
        del payload['q_grid'], payload['alpha_grid']
        return stable_hash(payload)

    def config_hash(self):
        return stable_hash(self.to_dict())
