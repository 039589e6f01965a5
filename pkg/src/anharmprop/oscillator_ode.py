"""Characteristic ODEs of the oscillator, the kernel I(tau), the regularized
boundary integral, and the harmonic part of the propagator.

Both characteristic equations

    Q'' + (ln c)' Q' - (2b/c) Q = 0,          Q(0)=0, Q'(0)=1
    f'' - (ln c)' f' - (2b/c + (ln c)'') f = 0, f(0)=0, f'(0)=2 pi / c(0)

share the same normal form, which forces f = 2 pi c Q / c(0)^2; the library
integrates both independently and treats the proportionality as a cross-check,
not an implementation shortcut.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy.interpolate import CubicSpline

__all__ = [
    "Coefficient",
    "const_coefficient",
    "poly_coefficient",
    "table_coefficient",
    "CoefficientModel",
    "OscillatorSolution",
    "BoundaryData",
    "make_boundary",
    "solve_Q",
    "solve_f",
    "kernel_I",
    "regularized_Y",
    "harmonic_propagator",
    "mehler_reference",
]


@dataclass(frozen=True)
class Coefficient:
    """A time-dependent coefficient with value and two derivatives.

    kind is one of 'const', 'poly', 'table'; value/d1/d2 are vectorized
    callables of tau.  For 'const'/'poly' the derivatives are analytic; for
    'table' they come from the cubic-spline interpolant (one order below the
    analytic specs in accuracy).
    """

    kind: str
    value: Callable[[np.ndarray], np.ndarray]
    d1: Callable[[np.ndarray], np.ndarray]
    d2: Callable[[np.ndarray], np.ndarray]
    describe: str = ""

    def __call__(self, tau):
        return self.value(tau)


def const_coefficient(v: float) -> Coefficient:
    v = float(v)
    return Coefficient(
        "const",
        lambda t: np.full_like(np.asarray(t, dtype=float), v),
        lambda t: np.zeros_like(np.asarray(t, dtype=float)),
        lambda t: np.zeros_like(np.asarray(t, dtype=float)),
        describe=f"const:{v!r}",
    )


def poly_coefficient(coeffs: Sequence[float]) -> Coefficient:
    p = np.polynomial.Polynomial(list(coeffs))
    p1 = p.deriv()
    p2 = p1.deriv()
    return Coefficient(
        "poly",
        lambda t: p(np.asarray(t, dtype=float)),
        lambda t: p1(np.asarray(t, dtype=float)),
        lambda t: p2(np.asarray(t, dtype=float)),
        describe="poly:" + ",".join(repr(c) for c in coeffs),
    )


def table_coefficient(taus: Sequence[float], values: Sequence[float]) -> Coefficient:
    taus = np.asarray(taus, dtype=float)
    values = np.asarray(values, dtype=float)
    if taus.ndim != 1 or taus.size < 4 or np.any(np.diff(taus) <= 0):
        raise ValueError("table coefficient needs >= 4 strictly increasing samples")
    spl = CubicSpline(taus, values)
    return Coefficient(
        "table", spl, spl.derivative(1), spl.derivative(2), describe="table"
    )


def _as_coefficient(spec) -> Coefficient:
    if isinstance(spec, Coefficient):
        return spec
    if isinstance(spec, (int, float)):
        return const_coefficient(float(spec))
    raise TypeError(f"cannot interpret coefficient spec {spec!r}")


@dataclass(frozen=True)
class CoefficientModel:
    """Coefficients a (quartic, >= 0), b (harmonic), c (kinetic, > 0) on [0, beta]."""

    a: Coefficient
    b: Coefficient
    c: Coefficient
    beta: float

    def __post_init__(self) -> None:
        object.__setattr__(self, "a", _as_coefficient(self.a))
        object.__setattr__(self, "b", _as_coefficient(self.b))
        object.__setattr__(self, "c", _as_coefficient(self.c))
        if self.beta <= 0.0:
            raise ValueError(f"beta must be positive, got {self.beta}")
        probe = np.linspace(0.0, self.beta, 257)
        if np.any(self.c(probe) <= 0.0):
            raise ValueError("kinetic coefficient c(tau) must be positive on [0, beta]")
        if np.any(self.a(probe) < 0.0):
            raise ValueError("quartic coefficient a(tau) must be non-negative on [0, beta]")


@dataclass
class OscillatorSolution:
    """Gridded Q, f, kernel I and the regularized boundary integral."""

    model: CoefficientModel
    grid: np.ndarray
    Q: np.ndarray
    Qdot: np.ndarray
    f: np.ndarray
    fdot: np.ndarray
    I_of_tau: np.ndarray  # I(grid); +inf at tau=0
    Y_reg: float
    q_positive: bool
    richardson: dict = field(default_factory=dict)
    # private: spline of the subtracted kernel integrand and of Q
    _bracket_spline: CubicSpline | None = None
    _bracket_anti: CubicSpline | None = None
    _Q_spline: CubicSpline | None = None
    _nested_cache: dict = field(default_factory=dict)


@dataclass(frozen=True)
class BoundaryData:
    """Endpoints and the reduced (hatted) variables of the correction series."""

    phi0: float
    phiB: float
    phi0_hat: float
    phiB_hat: float
    gamma: float = 0.25


def make_boundary(solution: OscillatorSolution, phi0: float, phiB: float) -> BoundaryData:
    c0 = float(solution.model.c(0.0))
    q_beta = float(solution.Q[-1])
    return BoundaryData(
        phi0=phi0,
        phiB=phiB,
        phi0_hat=c0 * phi0 / math.sqrt(2.0),
        phiB_hat=phiB / (math.sqrt(2.0) * q_beta),
    )


def _rk4(deriv, y0: np.ndarray, grid: np.ndarray, substeps: int) -> np.ndarray:
    """Classical RK4 with `substeps` equal sub-steps per grid interval."""
    out = np.empty((grid.size, y0.size))
    out[0] = y = np.array(y0, dtype=float)
    for i in range(grid.size - 1):
        t = grid[i]
        h = (grid[i + 1] - grid[i]) / substeps
        for _ in range(substeps):
            k1 = deriv(t, y)
            k2 = deriv(t + 0.5 * h, y + 0.5 * h * k1)
            k3 = deriv(t + 0.5 * h, y + 0.5 * h * k2)
            k4 = deriv(t + h, y + h * k3)
            y = y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
            t += h
        out[i + 1] = y
    return out


def _solve_system(model: CoefficientModel, grid: np.ndarray, which: str):
    c, b = model.c, model.b

    def lnc1(t):
        return float(c.d1(t)) / float(c.value(t))

    if which == "Q":
        def deriv(t, y):
            cc = float(c.value(t))
            return np.array([y[1], -lnc1(t) * y[1] + 2.0 * float(b.value(t)) / cc * y[0]])
        y0 = np.array([0.0, 1.0])
    else:
        def deriv(t, y):
            cc = float(c.value(t))
            l1 = float(c.d1(t)) / cc
            l2 = float(c.d2(t)) / cc - l1 * l1
            return np.array([y[1], l1 * y[1] + (2.0 * float(b.value(t)) / cc + l2) * y[0]])
        y0 = np.array([0.0, 2.0 * math.pi / float(c.value(0.0))])

    fine = _rk4(deriv, y0, grid, substeps=2)
    coarse = _rk4(deriv, y0, grid, substeps=1)
    scale = max(1.0, float(np.max(np.abs(fine))))
    est = float(np.max(np.abs(fine - coarse))) / 15.0 / scale
    if est > 1e-6:
        raise ArithmeticError(
            f"{which}-ODE step-size failure: Richardson estimate {est:.3e}; "
            "increase grid_n"
        )
    return fine, est


def _build_solution(model: CoefficientModel, grid_n: int) -> OscillatorSolution:
    if grid_n < 64:
        raise ValueError(f"grid_n must be >= 64, got {grid_n}")
    grid = np.linspace(0.0, model.beta, grid_n + 1)
    qsol, q_est = _solve_system(model, grid, "Q")
    fsol, f_est = _solve_system(model, grid, "f")
    Q, Qdot = qsol[:, 0], qsol[:, 1]
    f, fdot = fsol[:, 0], fsol[:, 1]
    q_positive = bool(np.all(Q[1:] > 0.0))

    sol = OscillatorSolution(
        model=model,
        grid=grid,
        Q=Q,
        Qdot=Qdot,
        f=f,
        fdot=fdot,
        I_of_tau=np.full_like(grid, np.nan),
        Y_reg=math.nan,
        q_positive=q_positive,
        richardson={"Q": q_est, "f": f_est},
    )
    sol._Q_spline = CubicSpline(grid, Q)

    if q_positive:
        c0 = float(model.c(0.0))
        cvals = model.c(grid)
        # Subtracted kernel integrand: 1/(c Q^2) - 1/(c0 tau^2), finite at 0.
        g = np.empty_like(grid)
        g[1:] = 1.0 / (cvals[1:] * Q[1:] ** 2) - 1.0 / (c0 * grid[1:] ** 2)
        # Endpoint refinement: quadratic extrapolation to tau=0.
        g[0] = float(np.polyval(np.polyfit(grid[1:4], g[1:4], 2), 0.0))
        spl = CubicSpline(grid, g)
        anti = spl.antiderivative()
        sol._bracket_spline = spl
        sol._bracket_anti = anti
        beta = model.beta
        tail = float(anti(beta))
        with np.errstate(divide="ignore"):
            sol.I_of_tau = np.where(
                grid > 0.0,
                (tail - anti(grid)) + (1.0 / c0) * (1.0 / np.where(grid > 0, grid, 1.0) - 1.0 / beta),
                np.inf,
            )
        sol.I_of_tau[-1] = 0.0
        sol.Y_reg = _regularized_Y_impl(sol)
    return sol


def solve_Q(model: CoefficientModel, grid_n: int = 512) -> OscillatorSolution:
    """Solve the Q equation (and the rest of the solution bundle) on a shared grid."""
    return _build_solution(model, grid_n)


def solve_f(model: CoefficientModel, grid_n: int = 512) -> OscillatorSolution:
    """Solve the f (Gel'fand–Yaglom) equation; same solution bundle as solve_Q."""
    return _build_solution(model, grid_n)


def _require_kernel(solution: OscillatorSolution) -> None:
    if not solution.q_positive:
        raise ArithmeticError(
            "Q(tau) has a zero in (0, beta]; kernel-dependent quantities are undefined"
        )


def kernel_I(solution: OscillatorSolution, tau: float) -> float:
    """I(tau) = int_tau^beta ds / (c(s) Q(s)^2); diverges as tau -> 0."""
    _require_kernel(solution)
    beta = solution.model.beta
    if not 0.0 < tau <= beta:
        raise ValueError(f"kernel_I needs 0 < tau <= beta (I diverges at 0), got {tau}")
    if tau == beta:
        return 0.0
    c0 = float(solution.model.c(0.0))
    anti = solution._bracket_anti
    return float(anti(beta) - anti(tau)) + (1.0 / c0) * (1.0 / tau - 1.0 / beta)


def _regularized_Y_impl(solution: OscillatorSolution, tol: float = 1e-6) -> float:
    beta = solution.model.beta
    c0 = float(solution.model.c(0.0))
    anti = solution._bracket_anti
    # Route (i): analytic subtraction.  The O(tau) parts of c and Q^2 cancel
    # (Q''(0) = -c'(0)/c(0)), so no finite c'(0) remnant survives.
    route_i = float(anti(beta) - anti(0.0)) - 1.0 / (c0 * beta)

    # Route (ii): evaluate the defining bracket at eps = beta 2^{-k} and
    # Richardson-extrapolate its O(eps^2) convergence.
    def bracket(eps: float) -> float:
        q_eps = float(solution._Q_spline(eps))
        c_eps = float(solution.model.c(eps))
        integral = float(anti(beta) - anti(eps)) + (1.0 / c0) * (1.0 / eps - 1.0 / beta)
        return integral - eps / (c_eps * q_eps * q_eps)

    # The bracket approaches its limit with an O(eps) leading error (the
    # harmonic term in Q's small-tau expansion), plus O(eps^2); eliminate both.
    r = [bracket(beta * 2.0**-k) for k in (6, 7, 8)]
    e1 = 2.0 * r[1] - r[0]
    e2 = 2.0 * r[2] - r[1]
    route_ii = (4.0 * e2 - e1) / 3.0

    if abs(route_i - route_ii) > tol * max(1.0, abs(route_i)):
        raise ArithmeticError(
            f"regularized_Y routes disagree: {route_i!r} vs {route_ii!r} "
            "(grid too coarse?)"
        )
    return route_i


def regularized_Y(solution: OscillatorSolution) -> float:
    """The eps->0 limit of int_eps^beta 1/(cQ^2) - eps/(c(eps)Q(eps)^2)."""
    _require_kernel(solution)
    return solution.Y_reg


def harmonic_propagator(
    solution: OscillatorSolution, boundary: BoundaryData
) -> tuple[float, float, float]:
    """Harmonic factor: returns (prefactor, exponent, value).

    exponent = Y_reg c(0)^2 phi0^2 / 2 + c(0) phi0 phiB / Q(beta)
               - (Qdot(beta)/Q(beta)) c(beta) phiB^2 / 2
    prefactor = 1/sqrt(f(beta)); value = prefactor * exp(exponent).
    """
    _require_kernel(solution)
    f_beta = float(solution.f[-1])
    if f_beta <= 0.0:
        raise ArithmeticError(f"f(beta) = {f_beta} <= 0: caustic/instability")
    model = solution.model
    c0 = float(model.c(0.0))
    c_beta = float(model.c(model.beta))
    q_beta = float(solution.Q[-1])
    exponent = (
        solution.Y_reg * c0 * c0 * boundary.phi0**2 / 2.0
        + c0 * boundary.phi0 * boundary.phiB / q_beta
        - (float(solution.Qdot[-1]) / q_beta) * c_beta * boundary.phiB**2 / 2.0
    )
    prefactor = 1.0 / math.sqrt(f_beta)
    return prefactor, exponent, prefactor * math.exp(exponent)


def mehler_reference(k: float, nu: float, x_i: float, x_f: float) -> float:
    """Mehler kernel (k/(2 pi sinh nu))^{1/2}
    exp{-k(x_i^2+x_f^2)/(2 tanh nu) + k x_i x_f / sinh nu}."""
    if k <= 0.0 or nu <= 0.0:
        raise ValueError("mehler_reference requires k > 0 and nu > 0")
    return math.sqrt(k / (2.0 * math.pi * math.sinh(nu))) * math.exp(
        -k * (x_i**2 + x_f**2) / (2.0 * math.tanh(nu)) + k * x_i * x_f / math.sinh(nu)
    )
