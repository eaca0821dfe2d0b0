"""
Fock Oracle Module
Independent check of the closed-form expectation values: the coherent state
is evolved as a vector in a truncated deformed Fock space and the quadratures
are taken as matrix elements.
"""

import logging
from dataclasses import dataclass

import numpy as np
from scipy import sparse

from src.errors import DomainError, TruncationError
from src.oscillator.coherent_state import coefficients_upto, truncation_index
from src.oscillator.q_algebra import energies, q_brackets

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class FockMatrixSystem:
    """
    Truncated matrix representation of the deformed oscillator.

    Args:
        dim (int): Number of Fock states kept
        a_matrix (scipy.sparse.csr_matrix): A, with a_matrix[n-1, n] = sqrt([n])
        h_diag (np.ndarray): Eigenvalues E_{q,n}
    """

    dim: int
    a_matrix: sparse.csr_matrix
    h_diag: np.ndarray

    @property
    def a_dagger(self):
        return self.a_matrix.conj().T.tocsr()


def build_fock_system(q, dim):
    """Assemble A and the diagonal Hamiltonian for dim Fock states."""
    if dim < 2:
        raise DomainError(f"Fock dimension must be >= 2, got {dim}")
    lowering = np.sqrt(q_brackets(dim, q)[1:]).astype(complex)
    a_matrix = sparse.diags(lowering, offsets=1, shape=(dim, dim), format='csr')
    return FockMatrixSystem(dim, a_matrix, energies(dim, q))


def oracle_evolve(params, dim, t):
    """
    Evolve |alpha>_q in the truncated Fock basis and return (<X>, <P>).

    Args:
        params (OscillatorParams): Run parameters
        dim (int): Fock-space dimension
        t (float): Time

    Returns:
        tuple: (<X(t)>, <P(t)>)

    Raises:
        TruncationError: if dim is below the coherent-state truncation index
    """
    required = truncation_index(params)
    if dim < required:
        raise TruncationError(dim, required)
    system = build_fock_system(params.q, dim)
    psi = coefficients_upto(params, dim) * np.exp(-1j * system.h_diag * t)
    a_psi = system.a_matrix @ psi
    a_dag_psi = system.a_dagger @ psi
    pref = params.prefactor
    x = pref * np.vdot(psi, a_dag_psi + a_psi)
    p = 1j * pref * np.vdot(psi, a_dag_psi - a_psi)
    logger.debug(f"oracle dim={dim} t={t}: X={x.real:.12g} P={p.real:.12g}")
    return float(x.real), float(p.real)
