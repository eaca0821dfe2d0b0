"""
Visual package.
SVG figures and gnuplot scripts for simulation and analysis results.
"""

from .figure_writer import REGIME_STYLES, FigureWriter

__all__ = ['REGIME_STYLES', 'FigureWriter']
