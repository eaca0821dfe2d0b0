#!/usr/bin/env python3
"""
Tests for feature extraction, regime classification and parameter sweeps.

The slow tests reproduce the regime bands of the q-deformed oscillator and
take several minutes; run them with `pytest -m slow`.
"""

import importlib
import math
import os
import sys
from types import SimpleNamespace

import numpy as np
import pytest
from hypothesis import given, strategies as st

# Add the project root to the Python path
sys.path.append(os.path.dirname(os.path.abspath(__file__)))

from src.analysis.embedding import choose_delay
from src.analysis.return_times import densest_cell, first_return_times
from src.analysis.spectrum import mean_period_samples, power_spectrum, spectral_peak_count
from src.config import AnalysisSettings, SweepConfig
from src.errors import AdmissibilityError, DomainError, IndeterminateRegimeError, LengthError, UsageError
from src.oscillator.coherent_state import OscillatorParams, simulate_series
from src.regime.classifier import Regime, classify
from src.regime.features import AnalysisReport, FeatureVector, extract_features, run_analyses
from src.regime.sweep import build_grid, lambda_vs_q_curve, refine_grid, sweep
from src.timeseries import TimeSeries

sweep_module = importlib.import_module('src.regime.sweep')


def features(lam=0.0, agreement=0.1, peaks=1, clusters=1, det=1.0, ks=False, partial=False):
    failures = (('spectrum', 'failed'),) if partial else ()
    return FeatureVector(lam, agreement, peaks, clusters, det, ks, partial, failures)


feature_vectors = st.builds(
    FeatureVector,
    lambda_max=st.floats(min_value=-1.0, max_value=1.0),
    lambda_agreement=st.floats(min_value=0.0, max_value=5.0),
    peak_count=st.integers(min_value=0, max_value=10),
    diag_spacing_clusters=st.integers(min_value=0, max_value=5),
    determinism=st.floats(min_value=0.0, max_value=1.0),
    ks_exponential_pass=st.booleans(),
)


class TestClassifier:

    def test_chaotic(self):
        assert classify(features(lam=0.2, agreement=0.1, peaks=7)).label is Regime.CHAOTIC

    def test_disagreeing_estimators_are_not_chaotic(self):
        assert classify(features(lam=0.2, agreement=0.8, peaks=7)).label is Regime.QUASI_PERIODIC

    def test_quasi_periodic_from_spectrum_or_recurrence(self):
        assert classify(features(peaks=2)).label is Regime.QUASI_PERIODIC
        assert classify(features(clusters=2)).label is Regime.QUASI_PERIODIC

    def test_periodic(self):
        label = classify(features(lam=0.005))
        assert label.label is Regime.PERIODIC
        assert str(label.label) == 'Periodic'

    def test_partial_vector_is_indeterminate(self):
        with pytest.raises(IndeterminateRegimeError):
            classify(features(lam=0.2, partial=True))

    def test_threshold_must_be_positive(self):
        with pytest.raises(DomainError):
            classify(features(), lambda_threshold=0.0)

    def test_invalid_feature_vector(self):
        with pytest.raises(DomainError):
            features(det=1.5)
        with pytest.raises(DomainError):
            features(peaks=-1)

    @given(f=feature_vectors)
    def test_classification_is_pure(self, f):
        copy = FeatureVector(**{k: getattr(f, k) for k in f.__dataclass_fields__})
        assert classify(f).label is classify(copy).label

    @given(f=feature_vectors, factor=st.sampled_from([0.8, 1.2]))
    def test_threshold_changes_only_nearby_labels(self, f, factor):
        base = 0.01
        if classify(f, base).label is not classify(f, base * factor).label:
            assert min(base, base * factor) <= f.lambda_max <= max(base, base * factor)


class TestFeatures:

    def test_short_series_rejected(self):
        with pytest.raises(LengthError):
            extract_features(TimeSeries(0.0, 0.1, np.sin(np.arange(500) * 0.1)))

    def test_failures_are_recorded(self):
        series = TimeSeries(0.0, 0.1, np.sin(0.1 * np.arange(300)))
        report = run_analyses(series, AnalysisSettings(), ('spectrum', 'lyapunov'))
        assert report.spectrum is not None
        assert 'embedding' in report.failures
        f = report.features()
        assert f.partial
        assert f.peak_count == 1
        with pytest.raises(IndeterminateRegimeError):
            classify(f)

    def test_phase_trajectory_recurrence(self):
        t = 0.1 * np.arange(3000)
        x = TimeSeries(0.0, 0.1, np.cos(t))
        p = TimeSeries(0.0, 0.1, -np.sin(t))
        report = run_analyses(x, AnalysisSettings(use_phase_trajectory=True), ('recurrence',), companion=p)
        assert not report.failures
        assert report.rqa.determinism > 0.99
        assert report.rqa.distinct_spacing_clusters == 1

    def test_agreement_is_symmetric(self):
        def report(rosenstein, wolf):
            return AnalysisReport(rosenstein=SimpleNamespace(lambda_max=rosenstein),
                                  wolf=SimpleNamespace(lambda_max=wolf))

        assert report(0.1, 0.2).lambda_agreement == pytest.approx(0.5)
        assert report(0.2, 0.1).lambda_agreement == pytest.approx(0.5)
        assert report(0.0, 0.0).lambda_agreement == 0.0
        assert report(0.0, 0.01).lambda_agreement == pytest.approx(1.0)


class TestGrids:

    def test_build_grid(self):
        grid = build_grid(0.05, 0.95, 0.05)
        assert len(grid) == 19
        assert grid[0] == 0.05 and grid[-1] == 0.95
        assert build_grid(1.0, 0.5, 0.1) == []

    def test_build_grid_step(self):
        with pytest.raises(UsageError):
            build_grid(0.0, 1.0, 0.0)

    def test_refine_grid_near_boundaries(self):
        refined = refine_grid(build_grid(0.05, 0.95, 0.05))
        for q in (0.075, 0.125, 0.175, 0.225, 0.925):
            assert q in refined
        assert 0.525 not in refined
        assert refined == sorted(refined)

    def test_sweep_config_validation(self):
        with pytest.raises(UsageError):
            SweepConfig((), (1.0,))
        with pytest.raises(DomainError):
            SweepConfig((0.5, 1.5), (1.0,))


@pytest.fixture
def stub_pipeline(monkeypatch):
    """Replace simulation and feature extraction by a cheap function of q."""
    calls = []

    def fake_simulate(params, t0, dt, n):
        calls.append((params.q, params.alpha.real))
        return params.q, None

    def fake_features(x, settings=None, p=None):
        q = x
        if q == 0.45:
            raise LengthError("synthetic failure")
        if q <= 0.1:
            return features(lam=0.0)
        if q <= 0.2:
            return features(lam=0.0, peaks=2)
        return features(lam=0.1 * q, agreement=0.1, peaks=5)

    monkeypatch.setattr(sweep_module, 'simulate_series', fake_simulate)
    monkeypatch.setattr(sweep_module, 'extract_features', fake_features)
    return calls


class TestSweep:

    def test_labels_and_inadmissible_points(self, stub_pipeline):
        config = SweepConfig((0.05,), (1.0,))
        diagram = sweep([0.05, 0.15, 0.5, 0.8], [1.0, 2.0], config)
        assert diagram.labels == [
            ['Periodic', 'QuasiPeriodic', 'Chaotic', 'Chaotic'],
            ['Inadmissible', 'Inadmissible', 'Inadmissible', 'Chaotic'],
        ]
        # inadmissible points are never simulated
        assert (0.5, 2.0) not in stub_pipeline
        assert (0.8, 2.0) in stub_pipeline

    def test_failed_point_is_recorded(self, stub_pipeline):
        diagram = sweep([0.4, 0.45, 0.5], [1.0], SweepConfig((0.4,), (1.0,)))
        point = diagram.point(0.45, 1.0)
        assert point.label == 'Error'
        assert 'synthetic failure' in point.error
        assert diagram.point(0.5, 1.0).label == 'Chaotic'

    def test_known_points_are_skipped(self, stub_pipeline):
        config = SweepConfig((0.05,), (1.0,))
        first = sweep([0.05, 0.5], [1.0], config)
        seen = []
        second = sweep([0.05, 0.5, 0.8], [1.0], config, known=first.points, on_result=seen.append)
        assert [p.q for p in seen] == [0.8]
        assert second.rows()[:2] == first.rows()

    def test_deterministic(self, stub_pipeline):
        config = SweepConfig((0.05,), (1.0,))
        grid = [0.9, 0.05, 0.3, 0.15]
        assert sweep(grid, [1.0, 2.0], config).rows() == sweep(grid, [1.0, 2.0], config).rows()

    def test_lambda_curve_rejects_inadmissible_grid(self):
        with pytest.raises(AdmissibilityError):
            lambda_vs_q_curve(2.0, [0.5, 0.9], SweepConfig((0.5,), (2.0,)))

    def test_package_attribute_is_the_sweep_module(self):
        import src.regime
        assert src.regime.sweep is sweep_module
        assert sweep_module.sweep is sweep

    def test_lambda_curve_order_and_failures(self, monkeypatch):
        def fake_exponent(series, settings=None, p_series=None):
            if series == 0.5:
                raise LengthError("too short")
            return series

        monkeypatch.setattr(sweep_module, 'simulate_series', lambda params, t0, dt, n: (params.q, None))
        monkeypatch.setattr(sweep_module, 'rosenstein_exponent', fake_exponent)
        curve = lambda_vs_q_curve(1.0, [0.9, 0.3, 0.5], SweepConfig((0.3,), (1.0,)))
        assert [q for q, _ in curve] == [0.9, 0.3, 0.5]
        assert curve[0][1] == 0.9
        assert math.isnan(curve[2][1])


def simulate(q, alpha=1.0, n=15000, dt=0.1):
    x, p = simulate_series(OscillatorParams(q, alpha), 0.0, dt, n)
    return x, p


class TestOscillatorDiagnostics:

    def test_delay_is_past_the_early_ami_ripple(self):
        x, _ = simulate(0.3)
        assert 40 <= choose_delay(x) <= 80

    def test_mean_period_follows_the_fast_line(self):
        # the slow line carries as much power as the fast one
        x, _ = simulate(0.2)
        assert mean_period_samples(x) < 200

    def test_slow_drift_is_not_a_second_line(self):
        x, _ = simulate(0.1)
        assert spectral_peak_count(power_spectrum(x)) == 1

    def test_weak_split_line_is_counted(self):
        x, _ = simulate(0.95, 0.3)
        assert spectral_peak_count(power_spectrum(x)) == 2


@pytest.mark.slow
class TestRegimeBands:

    @pytest.mark.parametrize('q', [0.3, 0.5, 0.7, 0.9])
    def test_chaotic_band(self, q):
        x, p = simulate(q)
        report = run_analyses(x, AnalysisSettings(), ('lyapunov',), p)
        assert report.rosenstein.lambda_max > 0.01
        assert report.lambda_agreement < 0.5

    @pytest.mark.parametrize('q', [0.05, 0.1])
    def test_periodic_band(self, q):
        x, p = simulate(q)
        report = run_analyses(x, AnalysisSettings(), ('recurrence', 'lyapunov'), p)
        assert abs(report.rosenstein.lambda_max) < 5e-3
        assert report.rqa.determinism > 0.99
        assert report.rqa.distinct_spacing_clusters == 1

    @pytest.mark.parametrize('q,alpha', [(0.2, 1.0), (0.95, 0.3)])
    def test_quasi_periodic_band(self, q, alpha):
        x, p = simulate(q, alpha)
        report = run_analyses(x, AnalysisSettings(), ('spectrum', 'lyapunov'), p)
        assert report.peak_count >= 2
        assert abs(report.rosenstein.lambda_max) < 5e-3

    def test_return_times_are_exponential_in_the_chaotic_band(self):
        x, _ = simulate(0.9, n=100_000)
        dist = first_return_times(x, densest_cell(x, 1e-3), 1e-3, min_visits=100)
        assert dist.return_times.size >= 100
        assert dist.exponential_pass

    def test_unit_amplitude_row(self):
        grid = build_grid(0.05, 0.95, 0.05)
        config = SweepConfig(grid, (1.0,), workers=int(os.environ.get('QOSC_WORKERS', '1')))
        diagram = sweep(grid, [1.0], config)

        def expected(q):
            if q <= 0.1:
                return 'Periodic'
            if q <= 0.2:
                return 'QuasiPeriodic'
            return 'Chaotic'

        wrong = [p.q for p in diagram.ordered_points() if p.label != expected(p.q)]
        near_first = [q for q in wrong if abs(q - 0.1) <= 0.05 + 1e-9]
        near_second = [q for q in wrong if abs(q - 0.2) <= 0.05 + 1e-9 and q not in near_first]
        assert len(near_first) <= 1 and len(near_second) <= 1
        assert len(wrong) == len(near_first) + len(near_second)
