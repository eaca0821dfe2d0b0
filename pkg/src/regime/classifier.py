"""
Classifier Module
Rule-based labelling of feature vectors as periodic, quasi-periodic or chaotic.
"""

import logging
from enum import Enum
from typing import NamedTuple

from src.errors import DomainError, IndeterminateRegimeError

logger = logging.getLogger(__name__)

DEFAULT_LAMBDA_THRESHOLD = 0.01
MAX_LAMBDA_DISAGREEMENT = 0.5
REQUIRED_FEATURES = ('lambda_max', 'lambda_agreement', 'peak_count', 'diag_spacing_clusters')


class Regime(str, Enum):
    PERIODIC = 'Periodic'
    QUASI_PERIODIC = 'QuasiPeriodic'
    CHAOTIC = 'Chaotic'
    # sweep cells that were never classified
    INADMISSIBLE = 'Inadmissible'
    ERROR = 'Error'

    def __str__(self):
        return self.value


class RegimeLabel(NamedTuple):
    label: Regime
    features: object


def classify(f, lambda_threshold=DEFAULT_LAMBDA_THRESHOLD):
    """
    Label a feature vector.

    Chaotic when the exponent exceeds lambda_threshold and both estimators
    agree to within 50 %; otherwise quasi-periodic when the spectrum or the
    recurrence diagonals show more than one frequency; otherwise periodic.

    Args:
        f (FeatureVector): Features of one series
        lambda_threshold (float): Positive exponent threshold

    Returns:
        RegimeLabel: the label and the features it was derived from

    Raises:
        IndeterminateRegimeError: if the vector is partial
    """
    if not lambda_threshold > 0:
        raise DomainError(f"lambda_threshold must be positive, got {lambda_threshold}")
    if f.partial:
        failed = ', '.join(name for name, _ in f.failures) or 'unknown'
        raise IndeterminateRegimeError(f"cannot label a partial feature vector (failed: {failed})")
    missing = [name for name in REQUIRED_FEATURES if getattr(f, name) is None]
    if missing:
        raise IndeterminateRegimeError(f"feature vector lacks {', '.join(missing)}")

    if f.lambda_max > lambda_threshold and f.lambda_agreement < MAX_LAMBDA_DISAGREEMENT:
        label = Regime.CHAOTIC
    elif f.peak_count >= 2 or f.diag_spacing_clusters >= 2:
        label = Regime.QUASI_PERIODIC
    else:
        label = Regime.PERIODIC
    logger.debug(f"classified lambda={f.lambda_max:.4g} peaks={f.peak_count} "
                 f"clusters={f.diag_spacing_clusters} -> {label}")
    return RegimeLabel(label, f)
