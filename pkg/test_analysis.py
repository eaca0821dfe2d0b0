#!/usr/bin/env python3
"""
Tests for the time-series diagnostics on synthetic signals with known answers.
"""

import math
import os
import sys

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.spatial.distance import pdist, squareform

# Add the project root to the Python path
sys.path.append(os.path.dirname(os.path.abspath(__file__)))

from src.analysis.embedding import (
    choose_delay,
    choose_dimension,
    embed,
    false_nearest_fraction,
    trajectory_vectors,
)
from src.analysis.lyapunov import linear_region, lyapunov_rosenstein, lyapunov_wolf
from src.analysis.recurrence import RecurrenceMatrix, recurrence, rqa_summary
from src.analysis.return_times import cell_entries, densest_cell, first_return_times
from src.analysis.spectrum import (
    dominant_frequency,
    mean_period_samples,
    power_spectrum,
    spectral_peak_count,
    tapered,
)
from src.errors import DomainError, InsufficientVisitsError, LengthError, NoMinimumError
from src.timeseries import TimeSeries


def sine(n, dt=0.1, omega=1.0, amplitude=1.0):
    t = dt * np.arange(n)
    return TimeSeries(0.0, dt, amplitude * np.sin(omega * t))


def logistic(n, r=4.0, x0=0.1234, burn=1000):
    x = np.empty(n + burn)
    x[0] = x0
    for k in range(1, x.size):
        x[k] = r * x[k - 1] * (1.0 - x[k - 1])
    return TimeSeries(0.0, 1.0, x[burn:])


def diagonals(n, offsets):
    """Recurrence matrix whose recurrences lie exactly on the given diagonals."""
    rows, cols = [np.arange(n)], [np.arange(n)]
    for k in offsets:
        i = np.arange(n - k)
        rows += [i, i + k]
        cols += [i + k, i]
    return RecurrenceMatrix(n, 0.1, np.concatenate(rows), np.concatenate(cols))


class TestTimeSeries:

    def test_rejects_non_finite(self):
        with pytest.raises(DomainError):
            TimeSeries(0.0, 0.1, [0.0, float('nan')])

    def test_rejects_bad_step(self):
        with pytest.raises(DomainError):
            TimeSeries(0.0, -0.1, [0.0, 1.0])

    def test_values_are_read_only(self):
        series = TimeSeries(0.0, 0.1, [1.0, 2.0, 3.0])
        with pytest.raises(ValueError):
            series.values[0] = 5.0


class TestEmbedding:

    def test_vectors(self):
        series = TimeSeries(0.0, 1.0, np.arange(100.0))
        emb = embed(series, 3, 2)
        assert emb.vectors.shape == (96, 3)
        assert list(emb.vectors[5]) == [5.0, 7.0, 9.0]

    def test_too_short(self):
        with pytest.raises(LengthError):
            embed(TimeSeries(0.0, 1.0, np.arange(5.0)), 4, 2)

    def test_delay_is_quarter_period_of_sine(self):
        # period of 62.8 samples
        assert 11 <= choose_delay(sine(5000)) <= 21

    def test_delay_needs_long_series(self):
        with pytest.raises(LengthError):
            choose_delay(sine(300))

    def test_constant_series_has_no_delay(self):
        with pytest.raises(NoMinimumError):
            choose_delay(TimeSeries(0.0, 0.1, np.ones(2000)))

    def test_delay_of_sine_with_64_samples_per_period(self):
        assert 14 <= choose_delay(sine(5000, dt=2 * math.pi / 64)) <= 18

    def test_delay_ignores_ripple_from_noise(self):
        series = sine(5000)
        noisy = TimeSeries(0.0, 0.1, series.values + 0.05 * np.random.default_rng(2).normal(size=5000))
        assert 11 <= choose_delay(noisy) <= 21

    def test_sine_unfolds_in_two_dimensions(self):
        series = sine(5000)
        assert choose_dimension(series, 16) in (2, 3)
        assert false_nearest_fraction(series.values, 1, 16) > false_nearest_fraction(series.values, 2, 16)

    def test_phase_pairs_unfold_in_one_dimension(self):
        series = sine(5000)
        companion = TimeSeries(0.0, 0.1, np.cos(0.1 * np.arange(5000)))
        assert choose_dimension(series, 16, companion=companion) == 1

    def test_trajectory_interleaves_pairs(self):
        points = trajectory_vectors(np.arange(10.0), 2, 3, 10.0 * np.arange(10.0))
        assert points.shape == (7, 4)
        assert list(points[0]) == [0.0, 0.0, 3.0, 30.0]
        assert np.array_equal(trajectory_vectors(np.arange(10.0), 2, 3), embed(
            TimeSeries(0.0, 1.0, np.arange(10.0)), 2, 3).vectors)

    def test_trajectory_rejects_mismatched_companion(self):
        with pytest.raises(LengthError):
            trajectory_vectors(np.arange(10.0), 2, 3, np.arange(9.0))


class TestRecurrence:

    @settings(max_examples=15, deadline=None)
    @given(seed=st.integers(min_value=0, max_value=10_000), n=st.integers(min_value=20, max_value=400),
           fraction=st.floats(min_value=0.02, max_value=0.5))
    def test_matches_brute_force(self, seed, n, fraction):
        rng = np.random.default_rng(seed)
        points = rng.normal(size=(n, 2))
        series = TimeSeries(0.0, 1.0, points[:, 0])
        rm = recurrence(series, 1, 1, fraction, companion=TimeSeries(0.0, 1.0, points[:, 1]))
        dense = rm.to_sparse().toarray()
        brute = squareform(pdist(points)) <= rm.epsilon
        assert np.array_equal(dense, brute)

    @settings(max_examples=10, deadline=None)
    @given(seed=st.integers(min_value=0, max_value=10_000), offset=st.sampled_from([-3.0, 0.5, 8.0]))
    def test_invariant_under_constant_shift(self, seed, offset):
        series = TimeSeries(0.0, 1.0, np.random.default_rng(seed).normal(size=300))
        base = recurrence(series, 2, 3, 0.1)
        moved = recurrence(series.shifted(offset), 2, 3, 0.1)
        assert np.array_equal(base.to_sparse().toarray(), moved.to_sparse().toarray())

    def test_symmetric_and_reflexive(self):
        series = TimeSeries(0.0, 1.0, np.random.default_rng(3).normal(size=2000))
        rm = recurrence(series, 3, 2, 0.1)
        dense = rm.to_sparse().toarray()
        assert np.array_equal(dense, dense.T)
        assert np.all(np.diag(dense))
        assert (5, 5) in rm

    def test_periodic_diagonals(self):
        summary = rqa_summary(diagonals(300, range(20, 300, 20)))
        assert summary.determinism == 1.0
        assert summary.distinct_spacing_clusters == 1
        assert summary.diag_spacing_cv == pytest.approx(0.0)

    def test_two_spacings(self):
        summary = rqa_summary(diagonals(300, [10, 25, 35, 50, 60, 75]))
        assert summary.distinct_spacing_clusters == 2

    def test_sine(self):
        series = sine(2000)
        summary = rqa_summary(recurrence(series, 2, 16, 0.1))
        assert summary.determinism > 0.99
        assert summary.distinct_spacing_clusters == 1

    def test_isolated_points_are_not_deterministic(self):
        rows = np.array([0, 1, 2, 3, 0, 3])
        cols = np.array([0, 1, 2, 3, 3, 0])
        assert rqa_summary(RecurrenceMatrix(4, 0.1, rows, cols)).determinism == 0.0

    def test_l_min_validated(self):
        with pytest.raises(DomainError):
            rqa_summary(diagonals(50, [10]), l_min=1)


class TestSpectrum:

    def test_parseval(self):
        series = TimeSeries(0.0, 0.05, np.random.default_rng(7).normal(size=1000))
        spec = power_spectrum(series)
        assert spec.total_power() == pytest.approx(np.mean(tapered(series.values) ** 2), rel=1e-6)

    def test_constant_offset_only_moves_the_mean(self):
        series = TimeSeries(0.0, 0.1, np.random.default_rng(5).normal(size=1024))
        base = power_spectrum(series).power
        moved = power_spectrum(series.shifted(12.5)).power
        assert moved[1:] == pytest.approx(base[1:], rel=1e-8, abs=1e-12)

    def test_pure_tone(self):
        series = sine(2000, dt=0.1, omega=2 * math.pi * 0.05)
        spec = power_spectrum(series)
        assert spectral_peak_count(spec) == 1
        assert dominant_frequency(spec) == pytest.approx(0.05, abs=spec.resolution)
        assert np.all(spec.power >= 0)

    def test_two_tones(self):
        t = 0.1 * np.arange(4000)
        series = TimeSeries(0.0, 0.1, np.sin(2 * math.pi * 0.05 * t) + np.sin(2 * math.pi * 0.12 * t))
        assert spectral_peak_count(power_spectrum(series)) == 2

    def test_weak_second_line_is_counted(self):
        # second line at 1% of the power of the first
        t = 0.1 * np.arange(4000)
        series = TimeSeries(0.0, 0.1, np.sin(2 * math.pi * 0.05 * t) + 0.1 * np.sin(2 * math.pi * 0.12 * t))
        assert spectral_peak_count(power_spectrum(series)) == 2

    def test_lines_below_three_cycles_are_not_counted(self):
        # 400 time units: the slow line completes a single cycle
        t = 0.1 * np.arange(4000)
        series = TimeSeries(0.0, 0.1, np.sin(2 * math.pi * 0.05 * t) + np.sin(2 * math.pi * t / 400.0))
        spec = power_spectrum(series)
        assert spectral_peak_count(spec) == 1
        assert spectral_peak_count(spec, min_cycles=0) == 2

    def test_short_series(self):
        with pytest.raises(LengthError):
            power_spectrum(sine(63))

    def test_mean_period(self):
        assert mean_period_samples(sine(2000, dt=0.1, omega=2 * math.pi * 0.05)) == 200

    def test_mean_period_between_bins(self):
        # 2*pi / 0.1 = 62.83 samples
        assert mean_period_samples(sine(5000)) == 63

    def test_mean_period_without_crossings_is_capped(self):
        assert mean_period_samples(TimeSeries(0.0, 0.1, np.linspace(0.0, 1.0, 1000))) == 100

    def test_mean_period_is_capped(self):
        assert mean_period_samples(sine(1000, dt=0.1, omega=2 * math.pi * 0.02)) == 100


class TestReturnTimes:

    def test_periodic_returns_equal_the_period(self):
        series = sine(50_000, dt=0.01, omega=2 * math.pi / 10.0)
        dist = first_return_times(series, 1.0, 0.02)
        assert dist.return_times.size >= 30
        assert np.all(np.abs(dist.return_times - 10.0) <= 0.01 + 1e-9)
        assert not dist.exponential_pass

    def test_random_returns_are_exponential(self):
        series = TimeSeries(0.0, 1.0, np.random.default_rng(11).uniform(size=100_000))
        dist = first_return_times(series, 0.5, 0.01)
        assert dist.fitted_mean == pytest.approx(101.0, rel=0.1)
        assert dist.fit_quality < 0.06

    def test_unvisited_cell(self):
        with pytest.raises(InsufficientVisitsError):
            first_return_times(sine(5000), 5.0, 0.01)

    def test_bad_cell_size(self):
        with pytest.raises(DomainError):
            first_return_times(sine(5000), 0.0, 0.0)

    def test_densest_cell_of_sine_is_near_an_extremum(self):
        assert abs(densest_cell(sine(20_000), 0.01)) > 0.9

    def test_densest_cell_entries_are_the_ones_first_return_times_sees(self):
        series = logistic(20_000)
        size = 0.01
        centre = densest_cell(series, size)
        entries = cell_entries(series.values, centre, size).size
        lo = float(series.values.min())
        grid = lo + 0.5 * size * np.arange(int(np.ptp(series.values) / (0.5 * size)) + 2)
        assert entries >= max(cell_entries(series.values, c, size).size for c in grid)
        dist = first_return_times(series, centre, size, min_visits=entries)
        assert dist.return_times.size == entries - 1


class TestLyapunov:

    def test_logistic_map(self):
        series = logistic(10_000)
        estimate = lyapunov_rosenstein(series, 1, 1, theiler=1, horizon=20, fit_window=(1, 9))
        assert estimate.lambda_max == pytest.approx(math.log(2.0), rel=0.15)
        automatic = lyapunov_rosenstein(series, 1, 1, theiler=1, horizon=20)
        assert automatic.linear_region_found
        assert automatic.fit_window[0] == 0
        assert automatic.lambda_max == pytest.approx(math.log(2.0), rel=0.15)

    def test_sine_has_zero_exponent(self):
        series = sine(5000)
        estimate = lyapunov_rosenstein(series, 2, 16, theiler=63, horizon=200)
        assert abs(estimate.lambda_max) < 5e-3

    def test_bounded_neighbours_give_zero_over_the_whole_curve(self):
        estimate = lyapunov_rosenstein(sine(5000), 2, 16, theiler=63, horizon=400)
        assert estimate.lambda_max == 0.0
        assert not estimate.diverged
        assert not estimate.linear_region_found
        assert estimate.fit_window == (0, 400)
        assert estimate.fit_line()[1] == 0.0

    def test_linear_region_is_the_initial_rise(self):
        j = np.arange(79)
        curve = np.concatenate([np.linspace(-5.0, 0.0, 21), 0.2 * np.sin(0.3 * j)])
        assert linear_region(curve) == (0, 12)

    def test_flat_curve_has_no_linear_region(self):
        assert linear_region(np.full(50, -3.0)) is None

    def test_phase_trajectory_of_sine_has_zero_exponent(self):
        companion = TimeSeries(0.0, 0.1, np.cos(0.1 * np.arange(5000)))
        estimate = lyapunov_rosenstein(sine(5000), 1, 16, theiler=63, horizon=200, companion=companion)
        assert estimate.lambda_max == 0.0
        wolf = lyapunov_wolf(sine(5000), 1, 16, evolve_steps=10, replace_threshold=0.05, theiler=63,
                             companion=companion)
        assert abs(wolf.lambda_max) < 5e-3

    def test_fit_window_validated(self):
        with pytest.raises(DomainError):
            lyapunov_rosenstein(sine(5000), 2, 16, theiler=63, horizon=50, fit_window=(10, 80))

    def test_wolf_sine(self):
        estimate = lyapunov_wolf(sine(5000), 2, 16, evolve_steps=10, replace_threshold=0.1, theiler=63)
        assert abs(estimate.lambda_max) < 5e-3
        assert estimate.method == 'wolf'

    def test_wolf_logistic_map(self):
        estimate = lyapunov_wolf(logistic(10_000), 1, 1, evolve_steps=1, replace_threshold=0.1, theiler=1)
        assert 0.4 < estimate.lambda_max < 1.0
