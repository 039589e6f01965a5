"""The anharmonic correction series.

Two independent representations of the order-mu term are implemented:

* w_mu — the kappa-sum route: ordered simplex integrals I_{kappa_1..kappa_mu}
  contracted with the nested-derivative recurrence over incomplete Hermite
  polynomials (exact polynomial algebra, derivatives by index lowering);
* w_mu_direct — the literal xi-derivative route: the degree-4mu Hermite
  polynomial of the generating argument, expanded by order-4 jet (truncated
  Taylor) arithmetic seeded at xi = 1, then simplex quadrature.

Their agreement is the numeric verification of the identity chain that turns
the generating-function factorization into the recurrence form.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import product
from typing import Sequence

import numpy as np
from numpy.polynomial.polynomial import polyval2d
from scipy.interpolate import CubicSpline

from .oscillator_ode import (
    BoundaryData,
    CoefficientModel,
    OscillatorSolution,
    harmonic_propagator,
    make_boundary,
    solve_Q,
)

__all__ = [
    "KappaVector",
    "PropagatorBreakdown",
    "nested_integral",
    "h_kappa",
    "d_function",
    "w_mu",
    "w_mu_direct",
    "propagator",
    "p1_series",
    "series_coefficient",
]

MU_CAP = 4


def _check_kv(kv: Sequence[int]) -> tuple[int, ...]:
    kv = tuple(int(k) for k in kv)
    if any(not 0 <= k <= 4 for k in kv):
        raise ValueError(f"kappa entries must lie in [0, 4], got {kv}")
    if len(kv) > MU_CAP:
        raise ValueError(f"order mu={len(kv)} exceeds cap {MU_CAP}")
    return kv


@dataclass(frozen=True)
class KappaVector:
    """Multi-index (kappa_1, ..., kappa_mu), each entry in [0, 4]."""

    kappas: tuple[int, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "kappas", _check_kv(self.kappas))

    def __len__(self) -> int:
        return len(self.kappas)


@dataclass(frozen=True)
class PropagatorBreakdown:
    """Harmonic factor, per-order corrections and the truncated total."""

    harmonic_value: float  # exp(exponent) — the Gaussian boundary factor
    f_beta: float
    W_mu_terms: tuple[float, ...]
    series_coefficients: tuple[float, ...]
    total: float
    p1: float
    truncation_estimate: float


def series_coefficient(mu: int) -> float:
    """Weight of W(mu) in the correction series: (4!/(4mu)!)(-1)^mu (1/4)^mu.

    By the bookkeeping convention of this library, W(0) = 1 and the mu = 0
    weight is 1 (the printed weights apply verbatim for mu >= 1).
    """
    if mu == 0:
        return 1.0
    return math.factorial(4) / math.factorial(4 * mu) * (-1.0) ** mu * 0.25**mu


# ---------------------------------------------------------------------------
# Bivariate polynomial helpers (coefficients C[p, q] of phiB^p phi0^q)
# ---------------------------------------------------------------------------


def _poly_mul(A: np.ndarray, B: np.ndarray) -> np.ndarray:
    out = np.zeros((A.shape[0] + B.shape[0] - 1, A.shape[1] + B.shape[1] - 1))
    for p in range(A.shape[0]):
        for q in range(A.shape[1]):
            if A[p, q] != 0.0:
                out[p : p + B.shape[0], q : q + B.shape[1]] += A[p, q] * B
    return out


def _poly_d_beta(A: np.ndarray) -> np.ndarray:
    if A.shape[0] == 1:
        return np.zeros((1, A.shape[1]))
    return A[1:, :] * np.arange(1, A.shape[0])[:, None]


def _poly_d_0(A: np.ndarray) -> np.ndarray:
    if A.shape[1] == 1:
        return np.zeros((A.shape[0], 1))
    return A[:, 1:] * np.arange(1, A.shape[1])[None, :]


def _h_kappa_poly(kappa: int, gamma: float) -> np.ndarray:
    """h_kappa = -4*4! scriptH_{4-kappa,kappa} as a bivariate polynomial."""
    C = np.zeros((5, 5))
    for k in range(min(4 - kappa, kappa) + 1):
        C[4 - kappa - k, kappa - k] = gamma**k / (
            math.factorial(4 - kappa - k) * math.factorial(k) * math.factorial(kappa - k)
        )
    return -4.0 * 24.0 * C


def h_kappa(kappa: int, boundary: BoundaryData) -> float:
    """h_kappa = -4*4! scriptH_{4-kappa,kappa}(phiB_hat, phi0_hat | gamma)."""
    if not 0 <= kappa <= 4:
        raise ValueError(f"kappa must lie in [0, 4], got {kappa}")
    C = _h_kappa_poly(kappa, boundary.gamma)
    return float(polyval2d(boundary.phiB_hat, boundary.phi0_hat, C))


def _poly_add(A: np.ndarray, B: np.ndarray) -> np.ndarray:
    s0, s1 = max(A.shape[0], B.shape[0]), max(A.shape[1], B.shape[1])
    out = np.zeros((s0, s1))
    out[: A.shape[0], : A.shape[1]] += A
    out[: B.shape[0], : B.shape[1]] += B
    return out


_RECURRENCE_CACHE: dict[tuple, np.ndarray] = {}


def _recurrence_poly(kv: tuple[int, ...], gamma: float, n_min: int) -> np.ndarray:
    """Nested-operator polynomial: O_{k1} ... O_{k_{mu-1}} h_{k_mu}.

    n_min=0 gives the full operator O_k R = sum_n (1/(2^n n!))
    (d^n_{phi0} h_k)(d^n_{phiB} R); n_min=1 drops the n=0 term (the A_k
    operator of the P1 series).  Derivatives act by exact index lowering on
    the polynomial coefficients, so the result is exact up to rounding.
    """
    key = (kv, gamma, n_min)
    if key in _RECURRENCE_CACHE:
        return _RECURRENCE_CACHE[key]
    if len(kv) == 1:
        R = _h_kappa_poly(kv[0], gamma)
    else:
        dleft = _h_kappa_poly(kv[0], gamma)
        dR = _recurrence_poly(kv[1:], gamma, n_min)
        total = None
        for n in range(5):
            if n > 0:
                dleft = _poly_d_0(dleft)
                dR = _poly_d_beta(dR)
            if n < n_min:
                continue
            piece = _poly_mul(dleft, dR) / (2.0**n * math.factorial(n))
            total = piece if total is None else _poly_add(total, piece)
        R = total
    _RECURRENCE_CACHE[key] = R
    return R


def d_function(kv, boundary: BoundaryData) -> float:
    """Recurrence value paired with I_kv in the correction series.

    The nested-operator recurrence is evaluated on the reversed index list:
    the outermost factor (the one receiving the phi0 derivatives) belongs to
    the innermost (latest-time) integration slot.  This pairing is what the
    generating-function factorization actually produces — the cross weight
    of a slot pair is I(tau) of the later slot — and it is verified
    numerically against the direct xi-derivative route (w_mu_direct).
    """
    kv = _check_kv(kv.kappas if isinstance(kv, KappaVector) else kv)
    if len(kv) < 1:
        raise ValueError("d_function needs mu >= 1")
    R = _recurrence_poly(kv[::-1], boundary.gamma, n_min=0)
    return float(polyval2d(boundary.phiB_hat, boundary.phi0_hat, R))


# ---------------------------------------------------------------------------
# Nested ordered integrals on the shared grid
# ---------------------------------------------------------------------------


def _cumulative_from_right(grid: np.ndarray, y: np.ndarray) -> np.ndarray:
    """F(t_i) = int_{t_i}^{beta} y, via the cubic-spline antiderivative."""
    anti = CubicSpline(grid, y).antiderivative()
    return float(anti(grid[-1])) - anti(grid)


class _NestedTables:
    """Per-solution cache of g_kappa = a Q^4 I^kappa and suffix integrals."""

    def __init__(self, solution: OscillatorSolution, model: CoefficientModel):
        if not solution.q_positive:
            raise ArithmeticError("nested integrals need Q > 0 on (0, beta]")
        grid = solution.grid
        a = np.asarray(model.a(grid), dtype=float)
        w = a * solution.Q**4
        c0 = float(model.c(0.0))
        I = solution.I_of_tau
        self.grid = grid
        self.g = []
        for kappa in range(5):
            g = np.empty_like(grid)
            g[1:] = w[1:] * I[1:] ** kappa
            # a Q^4 I^kappa ~ tau^{4-kappa} at 0; only kappa=4 survives, with
            # the exact limit a(0) (Q I -> 1/c(0))^4.
            g[0] = a[0] / c0**4 if kappa == 4 else 0.0
            self.g.append(g)
        self._suffix: dict[tuple[int, ...], np.ndarray] = {}

    def suffix(self, kv: tuple[int, ...]) -> np.ndarray:
        """Array F_kv(t_i) = int_{t_i}^beta g_{k1}(s) F_{kv[1:]}(s) ds."""
        if not kv:
            return np.ones_like(self.grid)
        if kv not in self._suffix:
            inner = self.suffix(kv[1:])
            self._suffix[kv] = _cumulative_from_right(self.grid, self.g[kv[0]] * inner)
        return self._suffix[kv]


def _tables(solution: OscillatorSolution, model: CoefficientModel) -> _NestedTables:
    key = id(model)
    tab = solution._nested_cache.get(key)
    if tab is None:
        tab = solution._nested_cache[key] = _NestedTables(solution, model)
    return tab


def nested_integral(solution: OscillatorSolution, model: CoefficientModel, kv) -> float:
    """Ordered simplex integral I_{kappa_1,...,kappa_mu}(beta); empty kv -> 1."""
    kv = _check_kv(kv.kappas if isinstance(kv, KappaVector) else kv)
    if not kv:
        return 1.0
    return float(_tables(solution, model).suffix(kv)[0])


# ---------------------------------------------------------------------------
# Order-mu terms
# ---------------------------------------------------------------------------


def _kappa_route_term(
    solution: OscillatorSolution,
    model: CoefficientModel,
    boundary: BoundaryData,
    mu: int,
) -> float:
    """(-4)^mu (4!)^mu sum_{kv in [0,4]^mu} I_kv scriptD(kv)."""
    tab = _tables(solution, model)
    total = 0.0
    for kv in product(range(5), repeat=mu):
        R = _recurrence_poly(kv[::-1], boundary.gamma, n_min=0)
        dval = float(polyval2d(boundary.phiB_hat, boundary.phi0_hat, R))
        total += float(tab.suffix(kv)[0]) * dval
    return total


def w_mu(
    solution: OscillatorSolution,
    model: CoefficientModel,
    boundary: BoundaryData,
    mu: int,
) -> float:
    """Order-mu correction W(mu), normalized so that
    total = (harmonic/sqrt f) * sum_mu series_coefficient(mu) * W(mu); W(0)=1."""
    if mu < 0 or mu > MU_CAP:
        raise ValueError(f"mu must lie in [0, {MU_CAP}], got {mu}")
    if mu == 0:
        return 1.0
    term = _kappa_route_term(solution, model, boundary, mu)
    return term / series_coefficient(mu)


# --- jets for the direct xi-derivative route --------------------------------


class _Jet:
    """Truncated Taylor polynomial of order 4 in delta = xi - 1.

    Coefficients may be scalars or numpy arrays (broadcast over the grid).
    Only the operations needed by the Hermite-polynomial expansion exist.
    """

    __slots__ = ("c",)

    def __init__(self, coeffs):
        self.c = list(coeffs) + [0.0] * (5 - len(coeffs))

    def __add__(self, other):
        if isinstance(other, _Jet):
            return _Jet([a + b for a, b in zip(self.c, other.c)])
        out = list(self.c)
        out[0] = out[0] + other
        return _Jet(out)

    __radd__ = __add__

    def __mul__(self, other):
        if isinstance(other, _Jet):
            out = [0.0] * 5
            for i, a in enumerate(self.c):
                for j in range(5 - i):
                    out[i + j] = out[i + j] + a * other.c[j]
            return _Jet(out)
        return _Jet([a * other for a in self.c])

    __rmul__ = __mul__

    def __pow__(self, n: int):
        out = _Jet([1.0])
        for _ in range(n):
            out = out * self
        return out


def _hermite2_any(n: int, x, y):
    """H_n(x, y) for ring elements (floats, arrays, jets)."""
    total = 0.0
    for k in range(n // 2 + 1):
        coeff = math.factorial(n) // (math.factorial(n - 2 * k) * math.factorial(k))
        total = total + coeff * x ** (n - 2 * k) * y**k
    return total


def _extrapolate_node0(grid: np.ndarray, y: np.ndarray) -> float:
    return float(np.polyval(np.polyfit(grid[1:4], y[1:4], 2), 0.0))


def w_mu_direct(
    solution: OscillatorSolution,
    model: CoefficientModel,
    boundary: BoundaryData,
    mu: int,
) -> float:
    """Literal evaluation of the xi-derivative representation (mu <= 2).

    mu=1: int_0^beta a Q^4 H_4(2u, I) dtau with u = phi0_hat I + phiB_hat
    (two-variable Hermite; equals 16 H_4(u', I/4) by homogeneity).
    mu=2: the xi_1 fourth derivative at xi_1 = 1, via jet arithmetic, of
    H_8(2u(xi), w(xi)) with u = phi0_hat(I1 + (xi-1) I2) + xi phiB_hat and
    w = I1 + (xi^2 - 1) I2, then the ordered 2-D simplex quadrature.
    """
    if mu not in (1, 2):
        raise ValueError(f"w_mu_direct supports mu in {{1, 2}}, got {mu}")
    if not solution.q_positive:
        raise ArithmeticError("w_mu_direct needs Q > 0 on (0, beta]")
    grid = solution.grid
    a = np.asarray(model.a(grid), dtype=float)
    w4 = a * solution.Q**4
    I = solution.I_of_tau
    pB, p0 = boundary.phiB_hat, boundary.phi0_hat

    if mu == 1:
        y = np.empty_like(grid)
        u = p0 * I[1:] + pB
        y[1:] = w4[1:] * _hermite2_any(4, 2.0 * u, I[1:])
        y[0] = _extrapolate_node0(grid, y)
        anti = CubicSpline(grid, y).antiderivative()
        return float(anti(grid[-1]) - anti(0.0))

    # mu = 2
    outer = np.empty_like(grid)
    I2 = I.copy()
    for i in range(1, grid.size):
        I1 = I[i]
        u = _Jet([p0 * I1 + pB, p0 * I2[1:] + pB])
        w = _Jet([np.full(grid.size - 1, I1), 2.0 * I2[1:], I2[1:]])
        K = _hermite2_any(8, 2.0 * u, w).c[4] * 24.0  # d^4/dxi^4 at xi=1
        row = np.empty_like(grid)
        row[1:] = w4[1:] * K
        row[0] = _extrapolate_node0(grid, row)
        anti = CubicSpline(grid, row).antiderivative()
        outer[i] = w4[i] * float(anti(grid[-1]) - anti(grid[i]))
    outer[0] = _extrapolate_node0(grid, outer)
    anti = CubicSpline(grid, outer).antiderivative()
    return float(anti(grid[-1]) - anti(0.0))


# ---------------------------------------------------------------------------
# Orchestration
# ---------------------------------------------------------------------------


def propagator(
    model: CoefficientModel,
    phi0: float,
    phiB: float,
    mu_max: int = 3,
    grid_n: int = 512,
) -> PropagatorBreakdown:
    """Truncated propagator: harmonic factor times the correction series."""
    if not 0 <= mu_max <= MU_CAP:
        raise ValueError(f"mu_max must lie in [0, {MU_CAP}], got {mu_max}")
    solution = solve_Q(model, grid_n)
    boundary = make_boundary(solution, phi0, phiB)
    _, exponent, harm_over_sqrt_f = harmonic_propagator(solution, boundary)
    harmonic_value = math.exp(exponent)
    f_beta = float(solution.f[-1])

    terms = []
    coeffs = []
    for mu in range(mu_max + 1):
        coeffs.append(series_coefficient(mu))
        terms.append(w_mu(solution, model, boundary, mu))
    series = sum(c * w for c, w in zip(coeffs, terms))
    total = harm_over_sqrt_f * series
    truncation = abs(harm_over_sqrt_f * coeffs[-1] * terms[-1]) if mu_max >= 1 else 0.0
    p1 = p1_series(solution, model, boundary, mu_max=max(1, mu_max))
    return PropagatorBreakdown(
        harmonic_value=harmonic_value,
        f_beta=f_beta,
        W_mu_terms=tuple(terms),
        series_coefficients=tuple(coeffs),
        total=total,
        p1=p1,
        truncation_estimate=truncation,
    )


def p1_series(
    solution: OscillatorSolution,
    model: CoefficientModel,
    boundary: BoundaryData,
    mu_max: int,
    return_partials: bool = False,
):
    """P1 = sum_mu Z_{mu,mu-1} I_{kappa...}, Z = A_{k1}...A_{k_{mu-1}} h_{k_mu}.

    A_k drops the n=0 term of the full operator O_k.  Returns the mu_max
    truncation; with return_partials=True also the list of partial sums.
    """
    if not 1 <= mu_max <= MU_CAP:
        raise ValueError(f"mu_max must lie in [1, {MU_CAP}], got {mu_max}")
    tab = _tables(solution, model)
    partials = []
    total = 0.0
    for mu in range(1, mu_max + 1):
        inc = 0.0
        for kv in product(range(5), repeat=mu):
            R = _recurrence_poly(kv[::-1], boundary.gamma, n_min=1)
            zval = float(polyval2d(boundary.phiB_hat, boundary.phi0_hat, R))
            inc += float(tab.suffix(kv)[0]) * zval
        total += inc
        partials.append(total)
    if return_partials:
        return total, partials
    return total
