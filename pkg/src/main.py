#!/usr/bin/env python3
"""
qosc - Main Application
Simulates the q-deformed oscillator, analyses the resulting series and maps
its periodic, quasi-periodic and chaotic regimes.
"""

import argparse
import hashlib
import logging
import os
import sys
from dataclasses import dataclass

import numpy as np

# Add the project root to the Python path
sys.path.append(os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

# Import project modules
from src import __version__
from src.config import (
    ANALYSES,
    AnalysisSettings,
    RunConfig,
    SweepConfig,
    env_log_level,
    env_output_dir,
    env_workers,
    load_environment,
    stable_hash,
)
from src.errors import (
    IndeterminateRegimeError,
    InputFormatError,
    OracleMismatchError,
    QOscError,
    UsageError,
)
from src.oscillator.coherent_state import autocorrelation, expect_p, expect_x, simulate_series, truncation_index
from src.oscillator.fock_oracle import oracle_evolve
from src.oscillator.q_algebra import energies
from src.regime.classifier import classify
from src.regime.features import run_analyses
from src.regime.sweep import SWEEP_COLUMNS, SweepPoint, build_grid, lambda_vs_q_curve, refine_grid, sweep
from src.storage.bundle import ResultBundle
from src.storage.csv_io import read_series, write_columns, write_recurrence, write_rows, write_series
from src.visual.figure_writer import FigureWriter

LOG_FORMAT = '%(asctime)s - %(name)s - %(levelname)s - %(message)s'
logger = logging.getLogger(__name__)

MIN_ANALYZE_LENGTH = 64
ORACLE_TOLERANCE = 1e-8
ORACLE_TIMES = np.linspace(0.0, 100.0, 20)
ENERGY_Q_VALUES = (0.3, 0.6, 0.9, 1.0)
ENERGY_LEVELS = 20
DEFAULT_Q_RANGE = (0.05, 1.0, 0.05)


@dataclass(frozen=True)
class OracleReport:
    max_deviation: float
    dim: int
    times: int

    @property
    def passed(self):
        return self.max_deviation < ORACLE_TOLERANCE


def cmd_simulate(config, with_autocorrelation=False, with_energy=False, with_figures=False):
    """
    Simulate <X(t)>, <P(t)> and write them as CSV with a manifest.

    Args:
        config (RunConfig): Validated run configuration
        with_autocorrelation (bool): Also write C(t) = <alpha(0)|alpha(t)>
        with_energy (bool): Also write the energy levels for several q
        with_figures (bool): Also render series and phase-portrait figures

    Returns:
        ResultBundle: the written files
    """
    params = config.params()
    logger.info(f"Simulate: q={params.q:g}, alpha={params.alpha:g}, steps={config.steps}, dt={config.dt:g}")
    x, p = simulate_series(params, config.t0, config.dt, config.steps)

    bundle = ResultBundle(config.output_dir, config.to_dict(), config.config_hash())
    bundle.extra['truncation_n'] = truncation_index(params)
    write_series(bundle.add('x', 'x.csv'), x)
    write_series(bundle.add('p', 'p.csv'), p)
    write_columns(bundle.add('phase', 'phase.csv'), ('x', 'p'), (x.values, p.values))

    figures = FigureWriter(config.output_dir) if (with_figures or with_autocorrelation or with_energy) else None
    if with_figures:
        _register(bundle, 'series', figures.series(x, p))
        _register(bundle, 'phase', figures.phase_portrait(x, p))
    if with_autocorrelation:
        c = autocorrelation(params, x.times)
        write_columns(bundle.add('autocorrelation', 'autocorrelation.csv'), ('t', 're', 'im', 'abs'),
                      (x.times, c.real, c.imag, np.abs(c)))
        _register(bundle, 'autocorrelation', figures.autocorrelation(x.times, c))
    if with_energy:
        qs = sorted(set(ENERGY_Q_VALUES) | {params.q})
        levels = {q: energies(ENERGY_LEVELS, q) for q in qs}
        header = ('n',) + tuple(f"E(q={q:g})" for q in qs)
        write_columns(bundle.add('energy', 'energy.csv'), header,
                      (np.arange(ENERGY_LEVELS, dtype=float),) + tuple(levels.values()))
        _register(bundle, 'energy', figures.energy_levels(levels))
    bundle.write_manifest()
    return bundle


def _register(bundle, role, names):
    svg, gp = names
    bundle.add(f"{role}_svg", svg)
    bundle.add(f"{role}_gnuplot", gp)


def _file_sha1(path):
    with open(path, 'rb') as f:
        return hashlib.sha1(f.read()).hexdigest()


def cmd_analyze(input_path, output_dir, analyses=ANALYSES, settings=None, p_input=None,
                m=None, delay=None, label=False):
    """
    Run the selected diagnostics on a series CSV.

    The input is validated completely before anything is written.

    Returns:
        ResultBundle: CSV, SVG and gnuplot files per analysis plus the manifest
    """
    settings = settings or AnalysisSettings()
    series = read_series(input_path, MIN_ANALYZE_LENGTH)
    companion = None
    if p_input is not None:
        companion = read_series(p_input, MIN_ANALYZE_LENGTH)
        if len(companion) != len(series):
            raise InputFormatError(f"{p_input} has {len(companion)} samples but {input_path} has {len(series)}")

    config = {
        'input': input_path,
        'input_sha1': _file_sha1(input_path),
        'p_input': p_input,
        'p_input_sha1': None if p_input is None else _file_sha1(p_input),
        'analyses': list(analyses),
        'settings': settings.to_dict(),
        'm': m,
        'delay': delay,
        'label': label,
    }
    report = run_analyses(series, settings, tuple(analyses), companion, m, delay)

    os.makedirs(output_dir, exist_ok=True)
    bundle = ResultBundle(output_dir, config, stable_hash(config))
    figures = FigureWriter(output_dir)
    if report.spectrum is not None:
        spec = report.spectrum
        write_columns(bundle.add('spectrum', 'spectrum.csv'), ('frequency', 'power'), (spec.frequencies, spec.power))
        _register(bundle, 'spectrum', figures.spectrum(spec))
    if report.recurrence is not None:
        write_recurrence(bundle.add('recurrence', 'recurrence.csv'), report.recurrence)
        _register(bundle, 'recurrence', figures.recurrence(report.recurrence))
    if report.return_times is not None:
        write_columns(bundle.add('return_times', 'return_times.csv'), ('return_time',),
                      (report.return_times.return_times,))
        _register(bundle, 'return_times', figures.return_times(report.return_times))
    for estimate in (report.rosenstein, report.wolf):
        if estimate is None:
            continue
        stem = f"lyapunov_{estimate.method}"
        write_columns(bundle.add(stem, f"{stem}.csv"), ('t', 'log_divergence'),
                      (estimate.times, estimate.log_divergence))
        _register(bundle, stem, figures.divergence(estimate))

    features = report.features()
    bundle.extra.update({
        'embedding': {'m': report.m, 'delay': report.delay, 'theiler': report.theiler},
        'features': features.to_dict(),
        'notes': dict(report.notes),
    })
    if report.rqa is not None:
        bundle.extra['rqa'] = report.rqa._asdict()
    if report.return_times is not None:
        dist = report.return_times
        bundle.extra['return_time_fit'] = {
            'cell_center': dist.cell_center, 'tau': dist.fitted_mean,
            'ks_statistic': dist.fit_quality, 'p_value': dist.p_value, 'count': int(dist.return_times.size),
        }
    for estimate in (report.rosenstein, report.wolf):
        if estimate is not None:
            bundle.extra[f"lambda_{estimate.method}"] = estimate.lambda_max
    if label:
        try:
            bundle.label = classify(features, settings.lambda_threshold).label.value
            logger.info(f"Regime: {bundle.label}")
        except IndeterminateRegimeError as e:
            logger.warning(f"No regime label: {e}")
    bundle.write_manifest()
    return bundle


def _sweep_known(bundle, config):
    """Points of a previous compatible sweep in the same directory."""
    if bundle is None or bundle.extra.get('point_hash') != config.point_hash():
        return {}
    known = {}
    for data in bundle.extra.get('points', []):
        point = SweepPoint.from_dict(data)
        known[point.key] = point
    if known:
        logger.info(f"Resuming sweep: {len(known)} points already computed")
    return known


def cmd_sweep(config, output_dir):
    """
    Label every grid point and write the phase diagram.

    Completed points are recorded in the manifest as they finish, so an
    interrupted sweep resumes where it stopped.

    Returns:
        PhaseDiagram: the labelled grid
    """
    os.makedirs(output_dir, exist_ok=True)
    known = _sweep_known(ResultBundle.load(output_dir), config)
    bundle = ResultBundle(output_dir, config.to_dict(), config.config_hash())
    bundle.extra['point_hash'] = config.point_hash()
    done = dict(known)

    def record(point):
        done[point.key] = point
        bundle.extra['points'] = [done[key].to_dict() for key in sorted(done)]
        bundle.write_manifest()

    diagram = sweep(config.q_grid, config.alpha_grid, config, known=known, on_result=record)
    write_rows(bundle.add('phase_diagram', 'phase_diagram.csv'), SWEEP_COLUMNS, diagram.rows())
    _register(bundle, 'phase_diagram', FigureWriter(output_dir).phase_diagram(diagram))
    bundle.extra['points'] = [done[key].to_dict() for key in sorted(done)]
    bundle.write_manifest()
    counts = {}
    for point in diagram.ordered_points():
        counts[point.label] = counts.get(point.label, 0) + 1
    logger.info(f"Sweep complete: {counts}")
    return diagram


def cmd_oracle_check(config, dim=None):
    """
    Compare the series evaluation with the truncated-matrix evolution.

    Raises:
        TruncationError: if dim is below the truncation index
        OracleMismatchError: if the maximum deviation reaches ORACLE_TOLERANCE
    """
    params = config.params()
    dim = truncation_index(params) if dim is None else dim
    deviation = 0.0
    for t in ORACLE_TIMES:
        ox, op = oracle_evolve(params, dim, float(t))
        sx, sp = expect_x(params, float(t)), expect_p(params, float(t))
        deviation = max(deviation, abs(sx - ox), abs(sp - op))
    report = OracleReport(deviation, dim, ORACLE_TIMES.size)
    print(f"max |series - oracle| = {deviation:.3e} over {report.times} times in [0, 100] (dim = {dim})")
    if not report.passed:
        raise OracleMismatchError(
            f"series and oracle differ by {deviation:.3e} >= {ORACLE_TOLERANCE:g} at q={params.q:g}, alpha={params.alpha:g}"
        )
    logger.info(f"Oracle check passed (dim={dim})")
    return report


def cmd_lambda_curve(alpha, config, output_dir):
    """Write lambda_max against q for a fixed amplitude."""
    curve = lambda_vs_q_curve(alpha, list(config.q_grid), config)
    os.makedirs(output_dir, exist_ok=True)
    payload = config.to_dict()
    payload['alpha_re'], payload['alpha_im'] = complex(alpha).real, complex(alpha).imag
    bundle = ResultBundle(output_dir, payload, stable_hash(payload))
    write_rows(bundle.add('lambda_curve', 'lambda_curve.csv'), ('q', 'lambda_max'), curve)
    _register(bundle, 'lambda_curve', FigureWriter(output_dir).lambda_curve(curve, abs(alpha)))
    bundle.extra['curve'] = [list(point) for point in curve]
    bundle.write_manifest()
    return curve


class CliParser(argparse.ArgumentParser):
    """Argument parser that reports usage errors with exit code 1."""

    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(message)


def _add_run_arguments(parser):
    parser.add_argument('--q', type=float, required=True, help="Deformation parameter, 0 < q <= 1.")
    parser.add_argument('--alpha', type=complex, required=True, help="Coherent amplitude (e.g. 1 or 0.5+0.2j).")
    parser.add_argument('--trunc-tol', type=float, default=1e-12, help="Fock-series tail tolerance.")
    parser.add_argument('--max-terms', type=int, default=20000, help="Cap on Fock terms.")


def _add_sampling_arguments(parser):
    parser.add_argument('--t0', type=float, default=0.0, help="Time of the first sample.")
    parser.add_argument('--dt', type=float, default=0.1, help="Sampling step.")
    parser.add_argument('--steps', type=int, default=15000, help="Number of samples.")


def _add_analysis_arguments(parser):
    defaults = AnalysisSettings()
    parser.add_argument('--epsilon-fraction', type=float, default=defaults.epsilon_fraction,
                        help="Recurrence threshold as a fraction of the trajectory diameter.")
    parser.add_argument('--prominence', type=float, default=defaults.prominence_fraction,
                        help="Spectral peak prominence relative to the maximum.")
    parser.add_argument('--cell-size', type=float, default=defaults.cell_size, help="First-return cell width.")
    parser.add_argument('--horizon', type=int, default=defaults.horizon, help="Rosenstein divergence horizon.")
    parser.add_argument('--evolve-steps', type=int, default=defaults.evolve_steps, help="Wolf evolution steps.")
    parser.add_argument('--theiler', type=int, default=None, help="Theiler window in samples (default: mean period).")
    parser.add_argument('--rqa-points', type=int, default=defaults.rqa_points,
                        help="Samples used for the recurrence matrix.")
    parser.add_argument('--lambda-threshold', type=float, default=defaults.lambda_threshold,
                        help="Exponent above which a series may be chaotic.")
    parser.add_argument('--phase-trajectory', action='store_true',
                        help="Build recurrence from (X, P) instead of a delay embedding.")


def _add_grid_arguments(parser, alpha_grid=True):
    parser.add_argument('--q', type=float, nargs='*', default=None, help="Explicit q values.")
    parser.add_argument('--q-range', type=float, nargs=3, metavar=('START', 'STOP', 'STEP'), default=None,
                        help="q grid from START to STOP inclusive.")
    parser.add_argument('--refine', action='store_true', help="Halve the q step around the regime boundaries.")
    if alpha_grid:
        parser.add_argument('--alpha', type=float, nargs='*', default=[1.0], help="Amplitude values.")
        parser.add_argument('--alpha-range', type=float, nargs=3, metavar=('START', 'STOP', 'STEP'), default=None,
                            help="Amplitude grid from START to STOP inclusive (overrides --alpha).")
    parser.add_argument('--workers', type=int, default=None, help="Worker processes (default: QOSC_WORKERS).")


def _settings(args):
    return AnalysisSettings(
        epsilon_fraction=args.epsilon_fraction,
        prominence_fraction=args.prominence,
        cell_size=args.cell_size,
        horizon=args.horizon,
        evolve_steps=args.evolve_steps,
        theiler=args.theiler,
        rqa_points=args.rqa_points,
        lambda_threshold=args.lambda_threshold,
        use_phase_trajectory=args.phase_trajectory,
    )


def _q_grid(args):
    if args.q is not None:
        grid = list(args.q)
    else:
        grid = build_grid(*(args.q_range or DEFAULT_Q_RANGE))
    if args.refine and grid:
        grid = refine_grid(grid)
    return grid


def _sweep_config(args, alpha_grid):
    return SweepConfig(
        _q_grid(args), alpha_grid, args.t0, args.dt, args.steps,
        settings=_settings(args),
        workers=args.workers or env_workers(),
    )


def _output_dir(args):
    return args.output_dir or env_output_dir()


def _run_simulate(args):
    config = RunConfig(args.q, args.alpha, args.t0, args.dt, args.steps, args.trunc_tol, args.max_terms,
                       output_dir=_output_dir(args))
    cmd_simulate(config, args.autocorrelation, args.energy, args.plot)
    return 0


def _run_analyze(args):
    analyses = tuple(name for name in ANALYSES if getattr(args, name)) or ANALYSES
    cmd_analyze(args.input, _output_dir(args), analyses, _settings(args), args.p_input,
                args.m, args.delay, args.label)
    return 0


def _alpha_grid(args):
    if args.alpha_range is not None:
        return build_grid(*args.alpha_range)
    return list(args.alpha)


def _run_sweep(args):
    cmd_sweep(_sweep_config(args, _alpha_grid(args)), _output_dir(args))
    return 0


def _run_oracle_check(args):
    config = RunConfig(args.q, args.alpha, trunc_tol=args.trunc_tol, max_terms=args.max_terms)
    cmd_oracle_check(config, args.dim)
    return 0


def _run_lambda_curve(args):
    config = _sweep_config(args, (abs(args.alpha),))
    cmd_lambda_curve(args.alpha, config, _output_dir(args))
    return 0


def build_parser():
    parser = CliParser(prog='qosc', description="q-deformed oscillator dynamics and chaos diagnostics.")
    parser.add_argument('--version', action='version', version=f"%(prog)s {__version__}")
    parser.add_argument('--verbose', action='store_true', help="Log at DEBUG level.")
    sub = parser.add_subparsers(dest='command', required=True)

    simulate = sub.add_parser('simulate', help="Simulate <X(t)> and <P(t)>.")
    _add_run_arguments(simulate)
    _add_sampling_arguments(simulate)
    simulate.add_argument('--output-dir', default=None, help="Output directory (default: QOSC_OUTPUT_DIR).")
    simulate.add_argument('--autocorrelation', action='store_true', help="Also write the autocorrelation C(t).")
    simulate.add_argument('--energy', action='store_true', help="Also write the energy levels for several q.")
    simulate.add_argument('--plot', action='store_true', help="Also render series and phase-portrait figures.")
    simulate.set_defaults(handler=_run_simulate)

    analyze = sub.add_parser('analyze', help="Analyse a t,x series CSV.")
    analyze.add_argument('input', help="Series CSV with a header row.")
    analyze.add_argument('--p-input', default=None, help="Companion t,p CSV for the (X, P) trajectory.")
    analyze.add_argument('--output-dir', default=None, help="Output directory (default: QOSC_OUTPUT_DIR).")
    for name in ANALYSES:
        analyze.add_argument(f"--{name.replace('_', '-')}", dest=name, action='store_true',
                             help=f"Run the {name.replace('_', ' ')} analysis (default: all).")
    analyze.add_argument('--m', type=int, default=None, help="Embedding dimension (default: false neighbours).")
    analyze.add_argument('--delay', type=int, default=None, help="Embedding delay (default: mutual information).")
    analyze.add_argument('--label', action='store_true', help="Classify the series and record the label.")
    _add_analysis_arguments(analyze)
    analyze.set_defaults(handler=_run_analyze)

    sweep_parser = sub.add_parser('sweep', help="Label a (q, alpha) grid.")
    _add_grid_arguments(sweep_parser)
    _add_sampling_arguments(sweep_parser)
    _add_analysis_arguments(sweep_parser)
    sweep_parser.add_argument('--output-dir', default=None, help="Output directory (default: QOSC_OUTPUT_DIR).")
    sweep_parser.set_defaults(handler=_run_sweep)

    oracle = sub.add_parser('oracle-check', help="Compare series evaluation with matrix evolution.")
    _add_run_arguments(oracle)
    oracle.add_argument('--dim', type=int, default=None, help="Fock dimension (default: truncation index).")
    oracle.set_defaults(handler=_run_oracle_check)

    curve = sub.add_parser('lambda-curve', help="Largest Lyapunov exponent against q.")
    curve.add_argument('--alpha', type=complex, default=1.0, help="Coherent amplitude.")
    _add_grid_arguments(curve, alpha_grid=False)
    _add_sampling_arguments(curve)
    _add_analysis_arguments(curve)
    curve.add_argument('--output-dir', default=None, help="Output directory (default: QOSC_OUTPUT_DIR).")
    curve.set_defaults(handler=_run_lambda_curve)
    return parser


def main(argv=None):
    """Main application entry point; returns the process exit code."""
    load_environment()
    logging.basicConfig(level=env_log_level(), format=LOG_FORMAT)
    try:
        args = build_parser().parse_args(argv)
        if args.verbose:
            logging.getLogger().setLevel(logging.DEBUG)
        logger.info(f"qosc {__version__}: {args.command}")
        return args.handler(args)
    except QOscError as e:
        logger.error(f"{type(e).__name__}: {e}")
        print(f"error: {e}", file=sys.stderr)
        return e.exit_code


if __name__ == '__main__':
    sys.exit(main())
