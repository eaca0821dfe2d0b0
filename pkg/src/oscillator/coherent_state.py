"""
Coherent State Module
Deformed coherent states, their autocorrelation and the time-evolved
expectation values of the deformed position and momentum operators.
"""

import logging
import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from src.errors import AdmissibilityError, ConsistencyError, ConvergenceError, DomainError
from src.oscillator.q_algebra import (
    check_amplitude_limit,
    check_q,
    energies,
    log_q_factorials,
    q_brackets,
    q_exponential,
)
from src.timeseries import TimeSeries

logger = logging.getLogger(__name__)

IMAG_RESIDUE_LIMIT = 1e-9
TIME_CHUNK = 4096


@dataclass(frozen=True)
class OscillatorParams:
    """
    Physical identity of a run.

    Args:
        q (float): Deformation parameter, 0 < q <= 1
        alpha (complex): Deformed coherent amplitude
        trunc_tol (float): Series-tail cutoff
        max_terms (int): Cap on the number of Fock terms
    """

    q: float
    alpha: complex
    trunc_tol: float = 1e-12
    max_terms: int = 20000

    def __post_init__(self):
        object.__setattr__(self, 'q', float(self.q))
        object.__setattr__(self, 'alpha', complex(self.alpha))
        check_q(self.q)
        if not self.trunc_tol > 0:
            raise DomainError(f"trunc_tol must be positive, got {self.trunc_tol}")
        if self.max_terms < 1:
            raise DomainError(f"max_terms must be >= 1, got {self.max_terms}")
        if not check_amplitude_limit(self.q, self.alpha):
            raise AdmissibilityError(self.q, self.alpha)

    @property
    def prefactor(self):
        """Quadrature prefactor sqrt(1 + q^2)/2."""
        return math.sqrt(1.0 + self.q * self.q) / 2.0


@dataclass(frozen=True, eq=False)
class CoherentState:
    """
    Truncated Fock expansion c_n, n = 0 .. truncation_n - 1, of |alpha>_q.
    """

    params: OscillatorParams
    coeffs: np.ndarray

    @property
    def truncation_n(self):
        return self.coeffs.size

    @property
    def weights(self):
        """Occupation probabilities |c_n|^2."""
        return np.abs(self.coeffs) ** 2

    def norm(self):
        return float(math.fsum(self.weights))

    def evolved(self, t):
        """Coefficients c_n(t) = c_n exp(-i E_{q,n} t)."""
        return self.coeffs * np.exp(-1j * energies(self.truncation_n, self.params.q) * t)


def _log_weights(params, n_terms):
    """log(|alpha|^(2n) / [n]!) for n < n_terms (alpha != 0)."""
    n = np.arange(n_terms, dtype=float)
    return n * math.log(abs(params.alpha) ** 2) - log_q_factorials(n_terms, params.q)


def normalization(params):
    """Squared normalisation N_q^2 = 1 / e_q(|alpha|^2)."""
    series = q_exponential(abs(params.alpha) ** 2, params.q, params.trunc_tol, params.max_terms)
    return 1.0 / series.value


def truncation_index(params):
    """
    Number of Fock terms kept for the given parameters.

    The cut is placed at the first n past the peak of |c_n|^2 whose geometric
    tail bound |c_n|^2 / (1 - r_n), r_n = |alpha|^2/[n+1], is below trunc_tol.
    """
    x = abs(params.alpha) ** 2
    if x == 0:
        return 2
    n_max = params.max_terms
    norm2 = normalization(params)
    weights = norm2 * np.exp(_log_weights(params, n_max + 1))
    ratio = x / q_brackets(n_max + 2, params.q)[1:]
    with np.errstate(divide='ignore'):
        tail = np.where(ratio < 1.0, weights / (1.0 - ratio), np.inf)
    below = np.nonzero(tail < params.trunc_tol)[0]
    if below.size == 0 or below[0] >= n_max:
        raise ConvergenceError(
            f"coherent state needs more than max_terms = {n_max} Fock terms "
            f"(q = {params.q:.6g}, |alpha|^2 = {x:.6g})"
        )
    return int(below[0]) + 1


def coefficients_upto(params, n_terms):
    """Exact coefficients c_n = N_q alpha^n / sqrt([n]!) for n < n_terms."""
    coeffs = np.zeros(n_terms, dtype=complex)
    if params.alpha == 0:
        coeffs[0] = 1.0
        return coeffs
    norm2 = normalization(params)
    magnitude = np.sqrt(norm2 * np.exp(_log_weights(params, n_terms)))
    phase = np.exp(1j * np.arange(n_terms) * np.angle(params.alpha))
    return magnitude * phase


@lru_cache(maxsize=128)
def coherent_coefficients(params):
    """
    Build the truncated deformed coherent state |alpha>_q.

    Args:
        params (OscillatorParams): Validated run parameters

    Returns:
        CoherentState: coefficients with |c_{N-1}|^2 < trunc_tol
    """
    n_terms = truncation_index(params)
    coeffs = coefficients_upto(params, n_terms)
    coeffs.setflags(write=False)
    state = CoherentState(params, coeffs)
    logger.debug(
        f"coherent state q={params.q:.6g} alpha={params.alpha:.6g}: "
        f"{n_terms} terms, norm defect {1.0 - state.norm():.3e}"
    )
    return state


@lru_cache(maxsize=128)
def _transition_spectrum(params):
    """
    Merged transition frequencies and weights of <A(t)>.

    <A(t)> = alpha * sum_n |c_n|^2 exp(-i w_n t) with
    w_n = (1 + q^2)/2 * ([n+1] - [n]) = (1 + q^2)/2 * q^(2n).
    Terms sharing a frequency (all of them at q = 1, the underflowed tail at
    small q) are summed once.
    """
    state = coherent_coefficients(params)
    q2 = params.q * params.q
    n = np.arange(state.truncation_n, dtype=float)
    freqs = (1.0 + q2) / 2.0 * np.power(q2, n)
    unique, inverse = np.unique(freqs, return_inverse=True)
    merged = np.bincount(inverse, weights=state.weights, minlength=unique.size)
    unique.setflags(write=False)
    merged.setflags(write=False)
    return unique, merged


def _as_times(t):
    times = np.asarray(t, dtype=float)
    return times, times.ndim == 0


def _phase_sum(params, times, sign):
    """sum_n |c_n|^2 exp(-i sign w_n t) over a flat array of times."""
    freqs, weights = _transition_spectrum(params)
    out = np.empty(times.size, dtype=complex)
    for start in range(0, times.size, TIME_CHUNK):
        block = times[start:start + TIME_CHUNK]
        out[start:start + TIME_CHUNK] = np.exp(-1j * sign * np.outer(block, freqs)) @ weights
    return out


def expect_a(params, t):
    """Complex expectation value <A(t)> for scalar or array t."""
    times, scalar = _as_times(t)
    out = params.alpha * _phase_sum(params, times.reshape(-1), 1.0)
    return complex(out[0]) if scalar else out.reshape(times.shape)


def _quadratures(params, t):
    """Evaluate both closing series for <X(t)> and <P(t)>."""
    times, scalar = _as_times(t)
    flat = times.reshape(-1)
    lowering = params.alpha * _phase_sum(params, flat, 1.0)
    # raising part: conj(alpha) with the opposite phase
    raising = np.conj(params.alpha) * _phase_sum(params, flat, -1.0)
    pref = params.prefactor
    x = pref * (raising + lowering)
    p = 1j * pref * (raising - lowering)
    residue = max(float(np.max(np.abs(x.imag))), float(np.max(np.abs(p.imag))))
    if residue > IMAG_RESIDUE_LIMIT:
        raise ConsistencyError(f"imaginary residue {residue:.3e} exceeds {IMAG_RESIDUE_LIMIT:.0e}")
    if scalar:
        return float(x.real[0]), float(p.real[0])
    return x.real.reshape(times.shape), p.real.reshape(times.shape)


def expect_x(params, t):
    """<X(t)>_q for scalar or array t."""
    return _quadratures(params, t)[0]


def expect_p(params, t):
    """<P(t)>_q for scalar or array t."""
    return _quadratures(params, t)[1]


def autocorrelation(params, t):
    """
    Overlap <alpha(0)|alpha(t)>_q.

    Args:
        params (OscillatorParams): Run parameters
        t (float or np.ndarray): Time(s)

    Returns:
        complex or np.ndarray: the autocorrelation at each time
    """
    times, scalar = _as_times(t)
    state = coherent_coefficients(params)
    q2 = params.q * params.q
    brackets = q_brackets(state.truncation_n, params.q)
    weights = state.weights
    flat = times.reshape(-1)
    out = np.empty(flat.size, dtype=complex)
    for start in range(0, flat.size, TIME_CHUNK):
        block = flat[start:start + TIME_CHUNK]
        phases = np.exp(-0.5j * np.outer(block, brackets) * (q2 + 1.0))
        out[start:start + TIME_CHUNK] = np.exp(-0.5j * block) * (phases @ weights)
    return complex(out[0]) if scalar else out.reshape(times.shape)


def simulate_series(params, t0=0.0, dt=0.1, n=15000):
    """
    Sample <X(t)> and <P(t)> on t0 + k*dt, k = 0 .. n-1.

    Returns:
        tuple: (X series, P series)
    """
    if not dt > 0:
        raise DomainError(f"dt must be positive, got {dt}")
    if n < 2:
        raise DomainError(f"need at least 2 samples, got n = {n}")
    logger.info(f"Simulating q={params.q:.6g} alpha={params.alpha:.6g} for {n} steps of {dt}")
    times = t0 + dt * np.arange(n)
    x, p = _quadratures(params, times)
    return TimeSeries(t0, dt, x, 'x'), TimeSeries(t0, dt, p, 'p')
