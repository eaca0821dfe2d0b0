"""
Features Module
Runs the time-series diagnostics over one series and condenses them into
the feature vector the regime classifier works on.
"""

import logging
from dataclasses import dataclass, field
from typing import Optional

from src.analysis.embedding import choose_delay, choose_dimension
from src.analysis.lyapunov import lyapunov_rosenstein, lyapunov_wolf
from src.analysis.recurrence import recurrence, rqa_summary
from src.analysis.return_times import densest_cell, first_return_times
from src.analysis.spectrum import mean_period_samples, power_spectrum, spectral_peak_count
from src.config import ANALYSES, AnalysisSettings
from src.errors import AnalysisError, DomainError, InsufficientVisitsError, LengthError, QOscError

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class FeatureVector:
    """
    Condensed diagnostics of one series.

    Args:
        lambda_max (float): Rosenstein estimate of the largest exponent
        lambda_agreement (float): |lambda_rosenstein - lambda_wolf| divided by the
            larger magnitude of the two, 0 when both vanish
        peak_count (int): Prominent spectral peaks
        diag_spacing_clusters (int): Distinct spacings between recurrence diagonals
        determinism (float): RQA determinism in [0, 1]
        ks_exponential_pass (bool): Return times compatible with an exponential law
        partial (bool): True when a sub-analysis failed
        failures (tuple): (analysis, message) pairs of the failed sub-analyses
    """

    lambda_max: Optional[float]
    lambda_agreement: Optional[float]
    peak_count: Optional[int]
    diag_spacing_clusters: Optional[int]
    determinism: Optional[float]
    ks_exponential_pass: Optional[bool]
    partial: bool = False
    failures: tuple = ()

    def __post_init__(self):
        if self.determinism is not None and not (0.0 <= self.determinism <= 1.0):
            raise DomainError(f"determinism must lie in [0, 1], got {self.determinism}")
        if self.peak_count is not None and self.peak_count < 0:
            raise DomainError(f"peak_count must be >= 0, got {self.peak_count}")

    def to_dict(self):
        return {
            'lambda_max': self.lambda_max,
            'lambda_agreement': self.lambda_agreement,
            'peak_count': self.peak_count,
            'diag_spacing_clusters': self.diag_spacing_clusters,
            'determinism': self.determinism,
            'ks_exponential_pass': self.ks_exponential_pass,
            'partial': self.partial,
            'failures': [list(f) for f in self.failures],
        }


@dataclass
class AnalysisReport:
    """Intermediate results of every diagnostic run on a series."""

    m: Optional[int] = None
    delay: Optional[int] = None
    theiler: Optional[int] = None
    spectrum: object = None
    peak_count: Optional[int] = None
    recurrence: object = None
    rqa: object = None
    return_times: object = None
    rosenstein: object = None
    wolf: object = None
    failures: dict = field(default_factory=dict)
    notes: dict = field(default_factory=dict)

    def fail(self, analysis, error):
        logger.error(f"{analysis} failed: {error}")
        self.failures[analysis] = str(error)

    @property
    def lambda_agreement(self):
        if self.rosenstein is None or self.wolf is None:
            return None
        rosenstein, wolf = self.rosenstein.lambda_max, self.wolf.lambda_max
        scale = max(abs(rosenstein), abs(wolf))
        return abs(rosenstein - wolf) / scale if scale > 0 else 0.0

    def features(self):
        """FeatureVector of the analyses run so far."""
        ks_pass = None
        if self.return_times is not None:
            ks_pass = self.return_times.exponential_pass
        elif 'return_times' in self.notes:
            ks_pass = False
        return FeatureVector(
            lambda_max=None if self.rosenstein is None else self.rosenstein.lambda_max,
            lambda_agreement=self.lambda_agreement,
            peak_count=self.peak_count,
            diag_spacing_clusters=None if self.rqa is None else self.rqa.distinct_spacing_clusters,
            determinism=None if self.rqa is None else self.rqa.determinism,
            ks_exponential_pass=ks_pass,
            partial=bool(self.failures),
            failures=tuple(sorted(self.failures.items())),
        )


def _select_embedding(series, settings, report, m, delay, companion=None):
    try:
        report.delay = delay if delay is not None else choose_delay(series)
        report.m = m if m is not None else choose_dimension(series, report.delay, companion=companion)
    except QOscError as e:
        report.fail('embedding', e)
        return False
    try:
        report.theiler = settings.theiler if settings.theiler is not None else mean_period_samples(series)
    except QOscError as e:
        report.fail('theiler', e)
        return False
    logger.info(f"Embedding: m={report.m}, J={report.delay}, theiler={report.theiler}")
    return True


def run_analyses(series, settings=None, analyses=ANALYSES, companion=None, m=None, delay=None):
    """
    Run the selected diagnostics, recording failures instead of raising.

    Args:
        series (TimeSeries): X series
        settings (AnalysisSettings): Thresholds and sizes
        analyses (tuple): Subset of 'spectrum', 'recurrence', 'return_times', 'lyapunov'
        companion (TimeSeries): P series; the Lyapunov trajectory and the
            dimension search use (X, P) pairs when it is given, the recurrence
            trajectory only when settings.use_phase_trajectory is set
        m (int): Embedding dimension override
        delay (int): Embedding delay override

    Returns:
        AnalysisReport: every result that could be computed
    """
    settings = settings or AnalysisSettings()
    report = AnalysisReport()
    needs_embedding = 'lyapunov' in analyses or ('recurrence' in analyses and not (
        settings.use_phase_trajectory and companion is not None))
    embedded = needs_embedding and _select_embedding(series, settings, report, m, delay, companion)

    if 'spectrum' in analyses:
        try:
            report.spectrum = power_spectrum(series)
            report.peak_count = spectral_peak_count(report.spectrum, settings.prominence_fraction)
        except QOscError as e:
            report.fail('spectrum', e)

    if 'recurrence' in analyses:
        head = series.head(settings.rqa_points)
        if settings.use_phase_trajectory and companion is not None:
            try:
                report.recurrence = recurrence(head, 2, 1, settings.epsilon_fraction,
                                               companion.head(settings.rqa_points))
                report.rqa = rqa_summary(report.recurrence, settings.l_min)
            except QOscError as e:
                report.fail('recurrence', e)
        elif embedded:
            try:
                report.recurrence = recurrence(head, report.m, report.delay, settings.epsilon_fraction)
                report.rqa = rqa_summary(report.recurrence, settings.l_min)
            except QOscError as e:
                report.fail('recurrence', e)
        else:
            report.fail('recurrence', 'no embedding available')

    if 'return_times' in analyses:
        try:
            cell = densest_cell(series, settings.cell_size)
            report.return_times = first_return_times(series, cell, settings.cell_size, settings.min_visits)
        except InsufficientVisitsError as e:
            # a cell visited too rarely is an outcome, not a failure
            logger.warning(f"Return-time fit skipped: {e}")
            report.notes['return_times'] = str(e)
        except QOscError as e:
            report.fail('return_times', e)

    if 'lyapunov' in analyses:
        if embedded:
            try:
                report.rosenstein = lyapunov_rosenstein(
                    series, report.m, report.delay, report.theiler, settings.horizon,
                    companion=companion)
            except QOscError as e:
                report.fail('lyapunov_rosenstein', e)
            try:
                report.wolf = lyapunov_wolf(
                    series, report.m, report.delay, settings.evolve_steps,
                    settings.replace_threshold, report.theiler, companion=companion)
            except QOscError as e:
                report.fail('lyapunov_wolf', e)
        else:
            report.fail('lyapunov', 'no embedding available')
    return report


def extract_features(x_series, settings=None, p_series=None):
    """
    Full diagnostic pipeline on a simulated X series.

    Raises:
        LengthError: if the series is shorter than settings.min_feature_length
    """
    settings = settings or AnalysisSettings()
    if len(x_series) < settings.min_feature_length:
        raise LengthError(
            f"feature extraction needs >= {settings.min_feature_length} samples, got {len(x_series)}"
        )
    features = run_analyses(x_series, settings, ANALYSES, companion=p_series).features()
    if features.partial:
        logger.warning(f"Partial feature vector: {', '.join(name for name, _ in features.failures)} failed")
    return features


def rosenstein_exponent(series, settings=None, p_series=None):
    """Largest exponent by Rosenstein's method with automatically chosen embedding."""
    settings = settings or AnalysisSettings()
    report = AnalysisReport()
    if not _select_embedding(series, settings, report, None, None, p_series):
        raise AnalysisError(f"embedding selection failed: {report.failures}")
    estimate = lyapunov_rosenstein(series, report.m, report.delay, report.theiler, settings.horizon,
                                   companion=p_series)
    return estimate.lambda_max
