"""Ground-truth evaluation of the time-sliced propagator W_N.

The defining object is the (N-1)-dimensional integral

    W_N = (2 pi D / c_0)^{-1/2} int prod_{i=1}^{N-1} (2 pi D / c_i)^{-1/2}
          dphi_i  exp(-E_N),
    E_N = sum_{i=1}^N D [ c_i/2 ((phi_i - phi_{i-1})/D)^2
                          + b_i phi_i^2 + a_i phi_i^4 ],    D = beta / N,

with fixed endpoints phi_0 and phi_N and coefficients sampled at tau_i = i D.
Three independent evaluations are provided: deterministic transfer-matrix
quadrature, Gaussian-bridge importance-sampled Monte Carlo, and (for N <= 3)
the exact parabolic-cylinder multi-sum.  continuum_extrapolate pushes a
sequence of W_N values toward N -> infinity.
"""
from __future__ import annotations

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from numpy.polynomial.legendre import leggauss
from scipy.linalg import cholesky_banded, solve_banded
from scipy.special import poch

from .oscillator_ode import BoundaryData, CoefficientModel
from .special_fn import pcf_scaled

__all__ = [
    "SlicedModel",
    "sliced_model",
    "wn_quadrature",
    "wn_montecarlo",
    "wn_series_exact",
    "continuum_extrapolate",
]

log = logging.getLogger(__name__)

_MC_CHUNK = 1 << 16  # fixed chunk size so results do not depend on `workers`


def _endpoints(boundary) -> tuple[float, float]:
    if isinstance(boundary, BoundaryData):
        return boundary.phi0, boundary.phiB
    phi0, phiN = boundary
    return float(phi0), float(phiN)


# ---------------------------------------------------------------------------
# Sliced model
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SlicedModel:
    """Per-slice coefficient samples and the derived discrete symbols.

    Arrays are indexed by the slice point i (tau_i = i*delta), padded with
    leading entries so that `a[i]` is a(tau_i); entries outside each symbol's
    defined range are zero.  sigma, z, psi live on i = 1..N-1; Sigma on
    i = 1..N-2; Omega on i = 0..N-2; Q on i = 0..N-1 (difference equation);
    d on i = 0..N-2; D[i] is the suffix sum d_i + ... + d_{N-2}; X and Y are
    the endpoint-dependent globals (Y = D[0]).  z[i] is +inf where a_i = 0.
    """

    N: int
    delta: float
    phi0: float
    phiN: float
    a: np.ndarray
    b: np.ndarray
    c: np.ndarray
    sigma: np.ndarray
    Sigma: np.ndarray
    z: np.ndarray
    psi: np.ndarray
    Omega: np.ndarray
    Q: np.ndarray
    d: np.ndarray
    D: np.ndarray
    X: float
    Y: float


def sliced_model(model: CoefficientModel, N: int, phi0: float, phiN: float) -> SlicedModel:
    """Sample the continuum model on the N-slice grid and build the symbols."""
    if N < 1:
        raise ValueError(f"N must be >= 1, got {N}")
    delta = model.beta / N
    tau = delta * np.arange(N + 1)
    a = np.asarray(model.a(tau), dtype=float)
    b = np.asarray(model.b(tau), dtype=float)
    c = np.asarray(model.c(tau), dtype=float)

    sigma = np.zeros(N + 1)
    z = np.zeros(N + 1)
    psi = np.zeros(N + 1)
    for i in range(1, N):
        denom = (c[i] + c[i + 1]) / (2.0 * delta) + b[i] * delta
        if denom <= 0.0:
            raise ArithmeticError(
                f"sigma_{i} not positive (slice too coarse for b_{i}={b[i]})"
            )
        sigma[i] = 1.0 / denom
        z[i] = denom / math.sqrt(2.0 * a[i] * delta) if a[i] > 0.0 else math.inf
        psi[i] = c[i + 1] / (c[i + 1] + c[i] + 2.0 * b[i] * delta**2)

    Sigma = np.zeros(N + 1)
    for i in range(1, N - 1):
        Sigma[i] = (c[i + 1] / (2.0 * delta)) ** 2 * sigma[i] * sigma[i + 1]

    Omega = np.zeros(N + 1)
    if N >= 1:
        Omega[0] = 1.0
    for i in range(1, N - 1):
        Omega[i] = 1.0 - Sigma[i] / Omega[i - 1]

    # Q_0 = delta, Omega_0 = psi_1 Q_1 / Q_0 = 1, then
    # c_{i+2} Q_{i+1} = (c_{i+2} + c_{i+1} + 2 b_{i+1} delta^2) Q_i
    #                   - c_{i+1} Q_{i-1}.
    Q = np.zeros(N)
    Q[0] = delta
    if N >= 2:
        Q[1] = Q[0] / psi[1]
    for i in range(1, N - 1):
        Q[i + 1] = (
            (c[i + 2] + c[i + 1] + 2.0 * b[i + 1] * delta**2) * Q[i]
            - c[i + 1] * Q[i - 1]
        ) / c[i + 2]

    d = np.zeros(max(N - 1, 0))
    if N >= 2:
        head = Q[0] * Q[1] / (2.0 * delta**2) * (c[1] * c[2] / 2.0) * phi0**2 * delta
        for i in range(N - 1):
            d[i] = head / (c[i + 2] * Q[i + 1] * Q[i])
    D = np.zeros(max(N - 1, 0))
    if N >= 2:
        D = np.cumsum(d[::-1])[::-1].copy()
    Y = float(D[0]) if N >= 2 else 0.0
    X = (
        math.sqrt(Q[0] * Q[1] / (2.0 * delta**2) * c[1] * c[2]) * phi0 * phiN / Q[N - 1]
        if N >= 2
        else 0.0
    )
    return SlicedModel(
        N=N, delta=delta, phi0=phi0, phiN=phiN, a=a, b=b, c=c,
        sigma=sigma, Sigma=Sigma, z=z, psi=psi, Omega=Omega, Q=Q,
        d=d, D=D, X=X, Y=Y,
    )


# ---------------------------------------------------------------------------
# Transfer-matrix quadrature
# ---------------------------------------------------------------------------


def _slice_factor(sm: SlicedModel, i: int, x, y):
    """exp(-delta [ c_i (y-x)^2/(2 delta^2) + b_i y^2 + a_i y^4 ])."""
    d = sm.delta
    return np.exp(
        -(sm.c[i] * (y - x) ** 2 / (2.0 * d) + d * (sm.b[i] * y**2 + sm.a[i] * y**4))
    )


def _wn_transfer(sm: SlicedModel, n_nodes: int, radius: float) -> float:
    """W_N on Gauss-Legendre nodes over [-radius, radius]."""
    N, d = sm.N, sm.delta
    if N == 1:
        return (2.0 * math.pi * d / sm.c[0]) ** -0.5 * float(
            _slice_factor(sm, 1, sm.phi0, sm.phiN)
        )
    xg, wg = leggauss(n_nodes)
    xg = xg * radius
    wg = wg * radius
    F = _slice_factor(sm, 1, sm.phi0, xg)
    for i in range(2, N):
        meas = (2.0 * math.pi * d / sm.c[i - 1]) ** -0.5
        F = meas * (_slice_factor(sm, i, xg[:, None], xg[None, :]).T @ (wg * F))
    meas = (2.0 * math.pi * d / sm.c[N - 1]) ** -0.5
    last = float(np.sum(wg * F * _slice_factor(sm, N, xg, sm.phiN)))
    return (2.0 * math.pi * d / sm.c[0]) ** -0.5 * meas * last


def _transfer_converged(sm: SlicedModel, rtol: float = 1e-12) -> float:
    c_min = float(np.min(sm.c[1:]))
    base_r = max(abs(sm.phi0), abs(sm.phiN)) + 8.0 * math.sqrt(sm.delta * sm.N / c_min)
    prev = None
    for radius in (base_r, 1.4 * base_r):
        for n_nodes in (120, 240, 480, 960):
            val = _wn_transfer(sm, n_nodes, radius)
            if prev is not None and abs(val - prev) <= rtol * max(abs(val), 1e-300):
                return val
            prev = val
    raise ArithmeticError(
        f"wn_quadrature failed to converge to rtol={rtol} (last value {prev})"
    )


def wn_quadrature(model: CoefficientModel, boundary, N: int) -> float:
    """Deterministic evaluation of W_N; N = 1 is the closed form, N <= 5."""
    if not 1 <= N <= 5:
        raise ValueError(f"wn_quadrature supports 1 <= N <= 5, got {N}")
    phi0, phiN = _endpoints(boundary)
    sm = sliced_model(model, N, phi0, phiN)
    if np.any(sm.a[1:] < 0.0):
        raise ValueError("wn_quadrature requires a_i >= 0")
    if N == 1:
        return _wn_transfer(sm, 0, 0.0)
    return _transfer_converged(sm)


# ---------------------------------------------------------------------------
# Gaussian-bridge Monte Carlo
# ---------------------------------------------------------------------------


def _bridge_setup(sm: SlicedModel):
    """Banded precision matrix, source vector and Gaussian normalization."""
    N, d = sm.N, sm.delta
    n = N - 1
    diag = np.array([(sm.c[i] + sm.c[i + 1]) / d + 2.0 * sm.b[i] * d for i in range(1, N)])
    off = np.array([-sm.c[i + 1] / d for i in range(1, N - 1)])
    ab = np.zeros((2, n))
    ab[0, 1:] = off
    ab[1, :] = diag
    try:
        chol = cholesky_banded(ab, lower=False)
    except Exception as exc:
        raise ArithmeticError(
            f"degenerate Gaussian bridge covariance at N={N}: {exc}"
        ) from exc
    s = np.zeros(n)
    s[0] += sm.c[1] * sm.phi0 / d
    s[-1] += sm.c[N] * sm.phiN / d
    const = (
        sm.c[1] * sm.phi0**2 / (2.0 * d)
        + sm.c[N] * sm.phiN**2 / (2.0 * d)
        + sm.b[N] * d * sm.phiN**2
        + sm.a[N] * d * sm.phiN**4
    )
    # P = L L^T; mean = P^{-1} s; Z = C_m (2 pi)^{n/2} det(P)^{-1/2}
    #                                 * exp(s^T P^{-1} s / 2 - const)
    mean = solve_banded((1, 1), _banded_full(ab), s)
    log_det = 2.0 * float(np.sum(np.log(chol[1, :])))
    log_cm = -0.5 * sum(
        math.log(2.0 * math.pi * d / sm.c[i]) for i in range(N)
    )
    log_z = (
        log_cm
        + 0.5 * n * math.log(2.0 * math.pi)
        - 0.5 * log_det
        + 0.5 * float(s @ mean)
        - const
    )
    return chol, mean, log_z


def _banded_full(ab_upper: np.ndarray) -> np.ndarray:
    """Upper-form symmetric band (2 x n) -> general band (3 x n) for solve_banded."""
    n = ab_upper.shape[1]
    out = np.zeros((3, n))
    out[0, :] = ab_upper[0, :]
    out[1, :] = ab_upper[1, :]
    out[2, :-1] = ab_upper[0, 1:]
    return out


def _mc_chunk(sm: SlicedModel, chol: np.ndarray, mean: np.ndarray, seq, count: int):
    """Sum and sum-of-squares of the quartic reweighting over one chunk."""
    rng = np.random.Generator(np.random.Philox(seq))
    n = mean.size
    xi = rng.standard_normal((count, n))
    # P = L^T L in upper-banded form => sample = mean + solve(L, xi) with the
    # upper-triangular banded factor.
    phi = mean + solve_banded((0, 1), chol, xi.T, check_finite=False).T
    d = sm.delta
    logw = -d * (sm.a[1 : sm.N] * phi**4).sum(axis=1)
    w = np.exp(logw)
    return float(np.sum(w)), float(np.sum(w * w))


def wn_montecarlo(
    model: CoefficientModel,
    boundary,
    N: int,
    samples: int,
    seed: int,
    workers: int = 1,
) -> tuple[float, float]:
    """Importance-sampled W_N estimate; returns (mean, stderr).

    The harmonic bridge (kinetic + quadratic terms, fixed endpoints) is
    sampled exactly via the banded Cholesky factor of the tridiagonal
    precision matrix and reweighted by exp(-sum a_i D phi_i^4).  Streams are
    Philox counter chunks spawned from SeedSequence(seed), accumulated in a
    fixed order, so the result depends only on (inputs, seed) — never on
    `workers`.
    """
    if N < 2 or N > 512:
        raise ValueError(f"wn_montecarlo supports 2 <= N <= 512, got {N}")
    if samples < 10_000:
        raise ValueError(f"samples must be >= 10000, got {samples}")
    phi0, phiN = _endpoints(boundary)
    sm = sliced_model(model, N, phi0, phiN)
    chol, mean, log_z = _bridge_setup(sm)
    z_gauss = math.exp(log_z)

    n_chunks = (samples + _MC_CHUNK - 1) // _MC_CHUNK
    counts = [min(_MC_CHUNK, samples - k * _MC_CHUNK) for k in range(n_chunks)]
    seqs = np.random.SeedSequence(seed).spawn(n_chunks)

    def run(k: int):
        return _mc_chunk(sm, chol, mean, seqs[k], counts[k])

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(run, range(n_chunks)))
    else:
        parts = [run(k) for k in range(n_chunks)]
    sum_w = 0.0
    sum_w2 = 0.0
    for sw, sw2 in parts:  # fixed reduction order
        sum_w += sw
        sum_w2 += sw2
    mean_w = sum_w / samples
    var_w = max(sum_w2 / samples - mean_w**2, 0.0)
    stderr = math.sqrt(var_w / samples)
    return z_gauss * mean_w, z_gauss * stderr


# ---------------------------------------------------------------------------
# Exact multi-sum (N <= 3)
# ---------------------------------------------------------------------------


class _ScaledPcfTable:
    """Cache of scriptD_{-m-1/2}(z) for one fixed argument z."""

    def __init__(self, z: float):
        self.z = z
        self._vals: list[float] = []

    def upto(self, m_max: int) -> np.ndarray:
        while len(self._vals) <= m_max:
            m = len(self._vals)
            self._vals.append(pcf_scaled(-m - 0.5, self.z))
        return np.asarray(self._vals[: m_max + 1])


def _series_prefactor(sm: SlicedModel) -> float:
    N, d = sm.N, sm.delta
    val = (2.0 * math.pi * d / sm.c[0]) ** -0.5
    for i in range(1, N):
        val /= math.sqrt((sm.c[i] + sm.c[i + 1]) / sm.c[i] + 2.0 * sm.b[i] * d**2 / sm.c[i])
    val *= math.exp(
        -sm.a[N] * d * sm.phiN**4
        - (sm.c[N] / (2.0 * d) + sm.b[N] * d) * sm.phiN**2
        - sm.c[1] * sm.phi0**2 / (2.0 * d)
    )
    return val


def _series_sum(sm: SlicedModel, cap: int) -> float:
    """The rho/n_i multi-sum for N in {2, 3} with all caps equal to `cap`."""
    N, d = sm.N, sm.delta
    s0 = sm.c[1] * sm.phi0 * math.sqrt(sm.sigma[1]) / d
    t_last = sm.c[N] * sm.phiN * math.sqrt(sm.sigma[N - 1]) / (2.0 * d)
    tabs = [_ScaledPcfTable(sm.z[i]) for i in range(N)]  # index i >= 1 used

    total = 0.0
    n0 = np.arange(cap)
    for rho in (0, 1):
        A = np.array(
            [s0 ** (2 * k + rho) / math.factorial(2 * k + rho) for k in n0]
        )
        if N == 2:
            D1 = tabs[1].upto(2 * cap)
            acc = 0.0
            for n1 in range(cap):
                pochs = poch(n1 + rho + 0.5, n0)
                acc += (
                    t_last ** (2 * n1 + rho)
                    / math.factorial(n1)
                    * float(np.sum(A * pochs * D1[n1 + rho + n0]))
                )
            total += acc
        elif N == 3:
            D1 = tabs[1].upto(2 * cap)
            D2 = tabs[2].upto(2 * cap)
            # v1[n1] = sum_{n0} A[n0] poch(n1+rho+1/2, n0) scriptD(z1)[n1+rho+n0]
            v1 = np.array(
                [
                    sm.Sigma[1] ** (n1 + rho / 2.0)
                    / math.factorial(n1)
                    * float(np.sum(A * poch(n1 + rho + 0.5, n0) * D1[n1 + rho + n0]))
                    for n1 in range(cap)
                ]
            )
            n1 = np.arange(cap)
            acc = 0.0
            for n2 in range(cap):
                pochs = poch(n2 + rho + 0.5, n1)
                acc += (
                    t_last ** (2 * n2 + rho)
                    / math.factorial(n2)
                    * float(np.sum(v1 * pochs * D2[n2 + rho + n1]))
                )
            total += acc
        else:
            raise ValueError(f"wn_series_exact supports N <= 3, got {N}")
    return total


def wn_series_exact(
    model: CoefficientModel,
    boundary,
    N: int,
    caps: int = 28,
    tail_tol: float = 1e-8,
) -> float:
    """Exact parabolic-cylinder multi-sum for W_N, N <= 3.

    Sums the rho in {0,1}, n_i series with the per-index cap `caps`,
    doubling the cap until the relative change is below tail_tol; the final
    tail estimate is logged and a violation raises ArithmeticError.
    """
    if not 2 <= N <= 3:
        raise ValueError(f"wn_series_exact supports N in {{2, 3}}, got {N}")
    phi0, phiN = _endpoints(boundary)
    sm = sliced_model(model, N, phi0, phiN)
    if np.any(sm.a[1:N] <= 0.0):
        raise ValueError("wn_series_exact needs a_i > 0 on interior slices")
    pref = _series_prefactor(sm)
    prev = _series_sum(sm, caps)
    for cap in (int(1.5 * caps), 2 * caps, 3 * caps):
        cur = _series_sum(sm, cap)
        tail = abs(cur - prev) / max(abs(cur), 1e-300)
        if tail <= tail_tol:
            log.info("wn_series_exact: cap=%d tail estimate %.3e", cap, tail)
            return pref * cur
        prev = cur
    raise ArithmeticError(
        f"wn_series_exact tail {tail:.3e} above {tail_tol} at cap {cap}"
    )


# ---------------------------------------------------------------------------
# Continuum extrapolation
# ---------------------------------------------------------------------------


def continuum_extrapolate(values) -> tuple[float, float]:
    """Polynomial-in-1/N extrapolation of (N, W_N) pairs.

    Fits W_N = p(1/N) by least squares (degree min(3, len-1)) and returns
    (p(0), error_estimate), where the error estimate is the leave-one-out
    spread of the limit, inflated when the sequence is not monotone.
    """
    pairs = sorted((int(n), float(v)) for n, v in values)
    if len(pairs) < 3:
        raise ValueError("continuum_extrapolate needs at least 3 values")
    ns = np.array([n for n, _ in pairs], dtype=float)
    ws = np.array([v for _, v in pairs])
    x = 1.0 / ns
    deg = min(3, len(pairs) - 1)

    def fit(xs, ys, degree):
        coeffs = np.polynomial.polynomial.polyfit(xs, ys, degree)
        return float(coeffs[0])

    limit = fit(x, ws, deg)
    spreads = []
    if len(pairs) > 3:
        for k in range(len(pairs)):
            mask = np.arange(len(pairs)) != k
            spreads.append(abs(fit(x[mask], ws[mask], min(deg, len(pairs) - 2)) - limit))
    else:
        spreads.append(abs(fit(x, ws, deg - 1) - limit))
    err = max(spreads)
    diffs = np.diff(ws)
    if np.any(diffs > 0) and np.any(diffs < 0):
        log.warning("continuum_extrapolate: non-monotone W_N sequence")
        err = 2.0 * err + float(np.max(np.abs(diffs)))
    return limit, err
