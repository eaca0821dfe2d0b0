"""
Oscillator package.
Exact evaluation of the q-deformed oscillator: q-algebra, coherent states,
time-evolved expectation values and the matrix-evolution oracle.
"""

from .q_algebra import (
    check_amplitude_limit,
    energy,
    q_bracket,
    q_exponential,
    q_factorial,
)
from .coherent_state import (
    CoherentState,
    OscillatorParams,
    autocorrelation,
    coherent_coefficients,
    expect_x,
    expect_p,
    simulate_series,
)
from .fock_oracle import FockMatrixSystem, build_fock_system, oracle_evolve

__all__ = [
    'check_amplitude_limit', 'energy', 'q_bracket', 'q_exponential', 'q_factorial',
    'CoherentState', 'OscillatorParams', 'autocorrelation', 'coherent_coefficients',
    'expect_x', 'expect_p', 'simulate_series',
    'FockMatrixSystem', 'build_fock_system', 'oracle_evolve',
]
