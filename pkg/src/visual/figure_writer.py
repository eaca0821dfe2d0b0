"""
Figure Writer Module
Writes every result figure twice: as an SVG rendered with matplotlib and as a
gnuplot script that redraws it from the CSV next to it.
"""

import io
import json
import logging
import os

import matplotlib
matplotlib.use('Agg')
import matplotlib.pyplot as plt
import numpy as np

from src.storage.atomic import atomic_write_bytes, atomic_write_text

logger = logging.getLogger(__name__)

# Define regime to style mapping
REGIME_STYLES = {
    'Periodic': {
        'color': '#1F77B4',  # Blue
        'marker': 's',
        'gnuplot_point': 5,
    },
    'QuasiPeriodic': {
        'color': '#2CA02C',  # Green
        'marker': 'D',
        'gnuplot_point': 13,
    },
    'Chaotic': {
        'color': '#D62728',  # Red
        'marker': 'o',
        'gnuplot_point': 7,
    },
    'Inadmissible': {
        'color': '#C0C0C0',  # Light gray
        'marker': 'x',
        'gnuplot_point': 2,
    },
    'Error': {
        'color': '#000000',
        'marker': '+',
        'gnuplot_point': 1,
    },
}

SVG_METADATA = {'Date': None}


class FigureWriter:
    """
    Renders analysis results into an output directory.
    """

    def __init__(self, output_dir):
        """
        Initialize the figure writer.

        Args:
            output_dir (str): Directory receiving SVG files and gnuplot scripts
        """
        logger.info(f"Initializing FigureWriter in {output_dir}")
        self.output_dir = output_dir
        self.styles = {label: dict(style) for label, style in REGIME_STYLES.items()}
        self._load_custom_styles()

    def _load_custom_styles(self):
        """Load custom regime styles if available."""
        styles_file = os.path.join(os.path.dirname(__file__), 'figure_styles.json')
        if os.path.exists(styles_file):
            try:
                with open(styles_file, 'r') as f:
                    custom_styles = json.load(f)
                    for label, style in custom_styles.items():
                        if label in self.styles:
                            self.styles[label].update(style)
                logger.info("Loaded custom regime styles")
            except Exception as e:
                logger.error(f"Error loading custom styles: {e}")

    def _path(self, name):
        return os.path.join(self.output_dir, name)

    def _save(self, fig, stem, script):
        """Write <stem>.svg and <stem>.gp and return both file names."""
        buffer = io.BytesIO()
        fig.savefig(buffer, format='svg', metadata=SVG_METADATA)
        plt.close(fig)
        svg_name, gp_name = f"{stem}.svg", f"{stem}.gp"
        atomic_write_bytes(self._path(svg_name), buffer.getvalue())
        header = (
            "set terminal svg size 800,600\n"
            f"set output '{svg_name}'\n"
            "set datafile separator ','\n"
            "set key autotitle columnhead\n"
        )
        atomic_write_text(self._path(gp_name), header + script)
        logger.debug(f"Wrote figure {svg_name}")
        return svg_name, gp_name

    def series(self, x, p, stem='series', x_csv='x.csv', p_csv='p.csv'):
        """X(t) and P(t) on a shared time axis."""
        fig, ax = plt.subplots(figsize=(9, 4))
        ax.plot(x.times, x.values, lw=0.6, label='<X>')
        ax.plot(p.times, p.values, lw=0.6, label='<P>')
        ax.set_xlabel('t')
        ax.legend(loc='upper right')
        script = (
            "set xlabel 't'\n"
            f"plot '{x_csv}' using 1:2 with lines lw 0.6, '{p_csv}' using 1:2 with lines lw 0.6\n"
        )
        return self._save(fig, stem, script)

    def phase_portrait(self, x, p, stem='phase', csv='phase.csv'):
        """Trajectory in the (<X>, <P>) plane."""
        fig, ax = plt.subplots(figsize=(5, 5))
        ax.plot(x.values, p.values, lw=0.3)
        ax.set_xlabel('<X>')
        ax.set_ylabel('<P>')
        ax.set_aspect('equal', adjustable='datalim')
        script = (
            "set size square\nset xlabel '<X>'\nset ylabel '<P>'\n"
            f"plot '{csv}' using 1:2 with lines lw 0.3 notitle\n"
        )
        return self._save(fig, stem, script)

    def spectrum(self, spec, stem='spectrum', csv='spectrum.csv'):
        """Power spectral density on a logarithmic scale."""
        fig, ax = plt.subplots(figsize=(8, 4))
        floor = max(float(spec.power.max()) * 1e-16, np.finfo(float).tiny)
        ax.semilogy(spec.frequencies, np.maximum(spec.power, floor), lw=0.7)
        ax.set_xlabel('frequency')
        ax.set_ylabel('power')
        script = (
            "set logscale y\nset xlabel 'frequency'\nset ylabel 'power'\n"
            f"plot '{csv}' using 1:2 with lines notitle\n"
        )
        return self._save(fig, stem, script)

    def recurrence(self, rm, stem='recurrence', csv='recurrence.csv'):
        """Recurrence plot of the pair list."""
        fig, ax = plt.subplots(figsize=(6, 6))
        ax.imshow(rm.to_sparse().toarray(), cmap='binary', origin='lower', interpolation='nearest')
        ax.set_xlabel('i')
        ax.set_ylabel('j')
        ax.set_title(f"n = {rm.n}, eps = {rm.epsilon:.3g}")
        script = (
            f"set size square\nset xrange [0:{rm.n - 1}]\nset yrange [0:{rm.n - 1}]\n"
            f"plot '{csv}' using 1:2 with dots lc rgb 'black' notitle\n"
        )
        return self._save(fig, stem, script)

    def return_times(self, dist, stem='return_times', csv='return_times.csv'):
        """Histogram of return times with the fitted exponential density."""
        fig, ax = plt.subplots(figsize=(7, 4))
        ax.hist(dist.return_times, bins='auto', density=True, alpha=0.6, label='returns')
        grid = np.linspace(0.0, float(dist.return_times.max()), 200)
        ax.plot(grid, dist.density(grid), color='#D62728',
                label=f"exp fit, tau={dist.fitted_mean:.3g}, p={dist.p_value:.2g}")
        ax.set_xlabel('return time')
        ax.legend()
        tau = dist.fitted_mean
        width = max(tau / 10.0, 1e-12)
        script = (
            f"tau = {tau:.17g}\nwidth = {width:.17g}\nbin(x) = width*floor(x/width) + width/2\n"
            "set xlabel 'return time'\nset style fill solid 0.5\n"
            f"plot '{csv}' using (bin($1)):(1.0/({dist.return_times.size}*width)) smooth frequency with boxes title 'returns', \\\n"
            "     exp(-x/tau)/tau title 'exp fit'\n"
        )
        return self._save(fig, stem, script)

    def divergence(self, estimate, stem=None, csv=None):
        """Log-divergence curve with the fitted straight line."""
        stem = stem or f"lyapunov_{estimate.method}"
        csv = csv or f"{stem}.csv"
        intercept, slope = estimate.fit_line()
        start, stop = estimate.fit_window
        fig, ax = plt.subplots(figsize=(7, 4))
        ax.plot(estimate.times, estimate.log_divergence, lw=0.8, label=estimate.method)
        fit_t = estimate.times[start:stop]
        ax.plot(fit_t, intercept + slope * fit_t, '--', color='#D62728', label=f"slope {slope:.4g}")
        ax.set_xlabel('t')
        ax.set_ylabel('ln divergence')
        ax.legend()
        script = (
            "set xlabel 't'\nset ylabel 'ln divergence'\n"
            f"f(x) = {intercept:.17g} + {slope:.17g}*x\n"
            f"plot '{csv}' using 1:2 with lines, "
            f"[{estimate.times[start]:.17g}:{estimate.times[stop - 1]:.17g}] f(x) dt 2 title 'fit'\n"
        )
        return self._save(fig, stem, script)

    def phase_diagram(self, diagram, stem='phase_diagram', csv='phase_diagram.csv'):
        """Region-coloured (q, alpha) plane."""
        fig, ax = plt.subplots(figsize=(7, 5))
        for label, style in self.styles.items():
            points = [p for p in diagram.ordered_points() if p.label == label]
            if points:
                ax.scatter([p.q for p in points], [p.alpha for p in points], c=style['color'],
                           marker=style['marker'], s=60, label=label)
        q = np.linspace(min(diagram.q_grid), 1.0, 200)
        bound = np.where(q < 1.0, 1.0 / np.sqrt(np.maximum(1.0 - q, 1e-300)), np.inf)
        ax.plot(q, bound, 'k--', lw=0.8, label='|alpha|^2 = 1/(1-q)')
        ax.set_ylim(0, max(diagram.alpha_grid) * 1.1)
        ax.set_xlabel('q')
        ax.set_ylabel('alpha')
        ax.legend(fontsize='small')
        plots = [
            f"'{csv}' using 1:(strcol(3) eq '{label}' ? $2 : 1/0) with points "
            f"pt {style['gnuplot_point']} ps 1.5 lc rgb '{style['color']}' title '{label}'"
            for label, style in self.styles.items()
        ]
        script = (
            "set xlabel 'q'\nset ylabel 'alpha'\nset key noautotitle\n"
            "plot " + ", \\\n     ".join(plots) + ", \\\n     1/sqrt(1-x) dt 2 lc rgb 'black' title 'bound'\n"
        )
        return self._save(fig, stem, script)

    def lambda_curve(self, curve, alpha, stem='lambda_curve', csv='lambda_curve.csv'):
        """Largest exponent against q."""
        values = np.array(curve, dtype=float).reshape(-1, 2)
        fig, ax = plt.subplots(figsize=(7, 4))
        ax.plot(values[:, 0], values[:, 1], 'o-', lw=0.8)
        ax.axhline(0.0, color='k', lw=0.5)
        ax.set_xlabel('q')
        ax.set_ylabel('lambda_max')
        ax.set_title(f"alpha = {alpha:.4g}")
        script = (
            "set xlabel 'q'\nset ylabel 'lambda_max'\n"
            f"plot '{csv}' using 1:2 with linespoints notitle\n"
        )
        return self._save(fig, stem, script)

    def energy_levels(self, levels, stem='energy', csv='energy.csv'):
        """E_n against n for several q; `levels` maps q to an array of energies."""
        fig, ax = plt.subplots(figsize=(7, 4))
        for q, energy in levels.items():
            ax.plot(np.arange(energy.size), energy, 'o-', ms=3, lw=0.8, label=f"q = {q:g}")
        ax.set_xlabel('n')
        ax.set_ylabel('E_n')
        ax.legend()
        plots = [f"'{csv}' using 1:{k + 2} with linespoints" for k in range(len(levels))]
        script = "set xlabel 'n'\nset ylabel 'E_n'\nplot " + ", ".join(plots) + "\n"
        return self._save(fig, stem, script)

    def autocorrelation(self, times, values, stem='autocorrelation', csv='autocorrelation.csv'):
        """|<alpha(0)|alpha(t)>| against t."""
        fig, ax = plt.subplots(figsize=(8, 4))
        ax.plot(times, np.abs(values), lw=0.7)
        ax.set_ylim(0.0, 1.05)
        ax.set_xlabel('t')
        ax.set_ylabel('|C(t)|')
        script = (
            "set xlabel 't'\nset ylabel '|C(t)|'\nset yrange [0:1.05]\n"
            f"plot '{csv}' using 1:4 with lines notitle\n"
        )
        return self._save(fig, stem, script)
