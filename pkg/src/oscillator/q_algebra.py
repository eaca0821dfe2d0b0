"""
q-Algebra Module
Scalar and vectorised q-deformed quantities of the math-type oscillator:
brackets, factorials, the q-exponential series and the energy spectrum.
"""

import logging
import math
from typing import NamedTuple

import numpy as np

from src.errors import ConvergenceError, DomainError

logger = logging.getLogger(__name__)


class SeriesSum(NamedTuple):
    """Value of a truncated series together with the number of terms summed."""

    value: float
    terms: int


def check_q(q):
    """Raise DomainError unless 0 < q <= 1."""
    if not (0.0 < q <= 1.0):
        raise DomainError(f"deformation parameter must satisfy 0 < q <= 1, got q = {q}")


def q_bracket(n, q):
    """
    Deformed integer [n] = (1 - q^(2n)) / (1 - q^2).

    Args:
        n (int): Non-negative integer
        q (float): Deformation parameter in (0, 1]

    Returns:
        float: [n], equal to n exactly when q = 1
    """
    check_q(q)
    if n < 0:
        raise DomainError(f"q-bracket needs n >= 0, got n = {n}")
    if q == 1.0:
        return float(n)
    q2 = q * q
    return (1.0 - q2 ** n) / (1.0 - q2)


def q_brackets(n_terms, q):
    """Return the array [0], [1], ..., [n_terms - 1]."""
    check_q(q)
    n = np.arange(n_terms, dtype=float)
    if q == 1.0:
        return n
    q2 = q * q
    return (1.0 - np.power(q2, n)) / (1.0 - q2)


def q_factorial(n, q):
    """
    Deformed factorial [n]! = [1][2]...[n], with [0]! = 1.

    Raises:
        OverflowError: if the product leaves the floating-point range
    """
    check_q(q)
    if n < 0:
        raise DomainError(f"q-factorial needs n >= 0, got n = {n}")
    result = math.prod(q_bracket(k, q) for k in range(1, n + 1))
    if math.isinf(result):
        raise OverflowError(f"[{n}]! overflows for q = {q}")
    return float(result)


def log_q_factorials(n_terms, q):
    """Return log([n]!) for n = 0 .. n_terms - 1 without forming the products."""
    brackets = q_brackets(n_terms, q)
    logs = np.zeros(n_terms)
    if n_terms > 1:
        logs[1:] = np.cumsum(np.log(brackets[1:]))
    return logs


def convergence_radius(q):
    """Radius of convergence 1/(1 - q^2) of the q-exponential series."""
    check_q(q)
    if q == 1.0:
        return math.inf
    return 1.0 / (1.0 - q * q)


def q_exponential(x, q, tol=1e-12, max_terms=20000):
    """
    Sum e_q(x) = sum_n x^n / [n]! until the next term drops below tol.

    Args:
        x (float): Argument, |x| < 1/(1 - q^2) when q < 1
        q (float): Deformation parameter in (0, 1]
        tol (float): Magnitude below which the next term ends the sum
        max_terms (int): Hard cap on the number of terms

    Returns:
        SeriesSum: value and number of terms used
    """
    check_q(q)
    if tol <= 0:
        raise DomainError(f"tolerance must be positive, got {tol}")
    if max_terms < 1:
        raise DomainError(f"max_terms must be >= 1, got {max_terms}")
    radius = convergence_radius(q)
    if abs(x) >= radius:
        raise ConvergenceError(
            f"q-exponential diverges: |x| = {abs(x):.6g} >= 1/(1-q^2) = {radius:.6g}"
        )
    if x == 0:
        return SeriesSum(1.0, 1)

    terms = [1.0]
    term = 1.0
    for n in range(1, max_terms + 1):
        bracket = q_bracket(n, q)
        term = term * x / bracket
        if math.isinf(term):
            raise OverflowError(f"q-exponential term {n} overflows for x = {x}")
        # terms shrink monotonically once |x| < [n]
        if abs(term) < tol and abs(x) < bracket:
            value = math.fsum(terms)
            logger.debug(f"e_q({x:.6g}) with q={q:.6g} summed over {n} terms")
            return SeriesSum(value, n)
        if n == max_terms:
            break
        terms.append(term)
    raise ConvergenceError(
        f"q-exponential did not reach tol = {tol:.1e} within {max_terms} terms "
        f"(x = {x:.6g}, q = {q:.6g})"
    )


def energy(n, q):
    """Eigenvalue E_{q,n} = [n] + q^(2n)/2 of the deformed Hamiltonian."""
    return q_bracket(n, q) + q ** (2 * n) / 2.0


def energies(n_terms, q):
    """Return E_{q,n} for n = 0 .. n_terms - 1."""
    n = np.arange(n_terms, dtype=float)
    return q_brackets(n_terms, q) + np.power(q * q, n) / 2.0


def check_amplitude_limit(q, alpha):
    """
    Admissibility of a deformed coherent amplitude.

    Returns:
        bool: True iff q = 1 or |alpha|^2 <= 1/(1 - q)
    """
    check_q(q)
    if q == 1.0:
        return True
    return abs(alpha) ** 2 <= 1.0 / (1.0 - q)
