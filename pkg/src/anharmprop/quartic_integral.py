"""Three independent evaluations of I1(a,b,c) = int exp(-(a x^4 + b x^2 + c x)) dx.

The three routes — direct adaptive quadrature, the parabolic-cylinder series,
and the Hermite generating-function double sum — are deliberately kept
independent; their mutual agreement is the smallest self-contained validation
of the summation technique used for the propagator.
"""
from __future__ import annotations

import math

import numpy as np
from scipy.integrate import quad
from scipy.special import gammaln

from .special_fn import _log_equarter_D, pochhammer

__all__ = ["i1_quadrature", "i1_series", "i1_hermite_method"]


def _check_a(a: float) -> None:
    if a <= 0.0:
        raise ValueError(f"quartic coefficient a must be positive, got {a}")


def i1_quadrature(a: float, b: float, c: float, rtol: float = 1e-12) -> float:
    """Direct adaptive quadrature of the integrand over the real line."""
    _check_a(a)

    def f(x: float) -> float:
        return math.exp(-(a * x**4 + b * x**2 + c * x))

    # Split at the symmetry point: the integrand is smooth and decays like
    # exp(-a x^4); quad handles the semi-infinite tails well.
    val1, err1 = quad(f, -np.inf, 0.0, epsabs=0.0, epsrel=rtol, limit=200)
    val2, err2 = quad(f, 0.0, np.inf, epsabs=0.0, epsrel=rtol, limit=200)
    value = val1 + val2
    if err1 + err2 > 100 * rtol * abs(value):
        raise ArithmeticError(
            f"i1_quadrature did not reach tolerance: error estimate {err1+err2:.3e}"
        )
    return value


def i1_series(
    a: float, b: float, c: float, m_max: int | None = None, tol: float = 1e-13
) -> float:
    """Parabolic-cylinder series: Gamma(1/2)/(2a)^{1/4} e^{z^2/4}
    sum_m xi^m/m! D_{-m-1/2}(z), xi = c^2/(4 sqrt(2a)), z = b/sqrt(2a).

    The sum converges for any coefficients (terms decay super-exponentially);
    m_max=None auto-extends until three consecutive increments pass the
    Cauchy criterion.
    """
    _check_a(a)
    s2a = math.sqrt(2.0 * a)
    xi = c * c / (4.0 * s2a)
    z = b / s2a
    pref = math.sqrt(math.pi) / (2.0 * a) ** 0.25

    cap = m_max if m_max is not None else 400
    total = 0.0
    log_xi = math.log(xi) if xi > 0.0 else None
    small = 0
    for m in range(cap + 1):
        if xi == 0.0 and m > 0:
            break
        log_term = (0.0 if m == 0 else m * log_xi) - math.lgamma(m + 1.0)
        term = math.exp(log_term + _log_equarter_D(m, z))
        total += term
        if term <= tol * abs(total):
            small += 1
            if small >= 3:
                break
        else:
            small = 0
    else:
        if m_max is None:
            raise ArithmeticError("i1_series did not converge within the term cap")
    return pref * total


def i1_hermite_method(
    a: float, b: float, c: float, mu_max: int | None = None, tol: float = 1e-13
) -> float:
    """Hermite generating-function route:

        (2a)^{-1/4} sum_mu (c^2/sqrt(2a))^mu/(2 mu)! Gamma(mu+1/2)
                    sum_j (-b/sqrt(2a))^j/j! (mu+1/2)_j D_{-j-mu-1/2}(0)

    with the inner j-sum (the Taylor expansion around argument 0 that resums
    to e^{z^2/4} D_{-mu-1/2}(z)) monitored explicitly for convergence.
    """
    _check_a(a)
    if b <= 0.0:
        raise ValueError(f"i1_hermite_method requires b > 0, got {b}")
    s2a = math.sqrt(2.0 * a)
    t = -b / s2a

    # D_{-nu}(0) = 2^{-nu/2} sqrt(pi) / Gamma((1+nu)/2) for the orders needed.
    def log_D0(order_mag: float) -> float:
        # order_mag = j + mu + 1/2; D index is -order_mag.
        return (
            -0.5 * order_mag * math.log(2.0)
            + 0.5 * math.log(math.pi)
            - float(gammaln(0.5 * (1.0 + order_mag)))
        )

    def inner(mu: int) -> float:
        total = 0.0
        small = 0
        for j in range(400):
            term = (
                t**j
                / math.factorial(j)
                * pochhammer(mu + 0.5, j)
                * math.exp(log_D0(j + mu + 0.5))
            )
            total += term
            if abs(term) <= tol * max(1e-300, abs(total)):
                small += 1
                if small >= 3:
                    return total
            else:
                small = 0
        raise ArithmeticError("i1_hermite_method: inner j-sum did not converge")

    x = c * c / s2a
    cap = mu_max if mu_max is not None else 400
    total = 0.0
    small = 0
    for mu in range(cap + 1):
        if x == 0.0 and mu > 0:
            break
        term = x**mu / math.factorial(2 * mu) * math.exp(gammaln(mu + 0.5)) * inner(mu)
        total += term
        if abs(term) <= tol * abs(total):
            small += 1
            if small >= 3:
                break
        else:
            small = 0
    else:
        if mu_max is None:
            raise ArithmeticError("i1_hermite_method did not converge within cap")
    return total / (2.0 * a) ** 0.25
