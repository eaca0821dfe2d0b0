"""
Regime package.
Feature extraction, periodic/quasi-periodic/chaotic classification and
parameter sweeps over the (q, alpha) plane.

The sweep driver is reached through ``src.regime.sweep.sweep`` so that the
submodule name stays bound to the module.
"""

from .features import AnalysisReport, FeatureVector, extract_features, run_analyses
from .classifier import Regime, RegimeLabel, classify
from .sweep import PhaseDiagram, SweepPoint, build_grid, lambda_vs_q_curve, refine_grid

__all__ = [
    'AnalysisReport', 'FeatureVector', 'extract_features', 'run_analyses',
    'Regime', 'RegimeLabel', 'classify',
    'PhaseDiagram', 'SweepPoint', 'build_grid', 'lambda_vs_q_curve', 'refine_grid',
]
