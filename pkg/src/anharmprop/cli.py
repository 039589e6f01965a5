"""Configuration-driven command-line front end.

Subcommands:

* ``propagator`` — evaluate the truncated correction series for the model in
  the config file; writes ``breakdown.csv`` and ``solution.csv``.
* ``compare``    — evaluate the analytic propagator and the time-sliced
  oracles side by side; writes ``compare.csv``.
* ``i1``         — tabulate the one-dimensional quartic integral by all three
  methods over coefficient grids.
* ``table``      — tabulate special functions (pcf, hermite,
  incomplete-hermite, a-coeff, i1).

Config grammar: flat ``key = value`` lines, ``#`` comments, optional
``[section]`` headers that prefix following keys with ``section.``.
Coefficients accept ``const:<v>``, ``poly:<c0,c1,...>`` or ``table:<path>``
(CSV of ``tau,value`` rows).  All emitted CSV uses ``.`` decimals, 17
significant digits and LF line endings, and is a deterministic function of
(config, seed).

Exit codes: 0 success, 2 configuration error, 3 numeric/domain error.
"""
from __future__ import annotations

import argparse
import logging
import math
import sys
from pathlib import Path

import numpy as np

from .anharmonic import propagator
from .oscillator_ode import (
    CoefficientModel,
    const_coefficient,
    poly_coefficient,
    table_coefficient,
)
from .oracle import continuum_extrapolate, wn_montecarlo, wn_quadrature
from .quartic_integral import i1_hermite_method, i1_quadrature, i1_series
from .special_fn import HermiteIncompleteSpec, a_coeff, hermite, incomplete_hermite, pcf_scaled

log = logging.getLogger(__name__)


class ConfigError(Exception):
    pass


def _fmt(x: float) -> str:
    return f"{float(x):.17g}"


def parse_config(path: str) -> dict[str, str]:
    """Flat key-value config with [section] prefixes and # comments."""
    cfg: dict[str, str] = {}
    section = ""
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("[") and line.endswith("]"):
            section = line[1:-1].strip()
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{lineno}: expected 'key = value', got {raw!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        if not key:
            raise ConfigError(f"{path}:{lineno}: empty key")
        cfg[f"{section}.{key}" if section else key] = value
    return cfg


def _parse_coefficient(spec: str, base: Path):
    kind, _, payload = spec.partition(":")
    try:
        if kind == "const":
            return const_coefficient(float(payload))
        if kind == "poly":
            return poly_coefficient([float(t) for t in payload.split(",")])
        if kind == "table":
            rows = np.loadtxt(base / payload, delimiter=",", ndmin=2)
            return table_coefficient(rows[:, 0], rows[:, 1])
    except ConfigError:
        raise
    except Exception as exc:
        raise ConfigError(f"bad coefficient spec {spec!r}: {exc}") from exc
    raise ConfigError(
        f"bad coefficient spec {spec!r}: expected const:, poly: or table:"
    )


def _require(cfg: dict[str, str], key: str) -> str:
    if key not in cfg:
        raise ConfigError(f"missing required config key {key!r}")
    return cfg[key]


def build_model(cfg: dict[str, str], base: Path) -> CoefficientModel:
    try:
        beta = float(_require(cfg, "beta"))
    except ValueError as exc:
        raise ConfigError(f"bad beta: {exc}") from exc
    return CoefficientModel(
        a=_parse_coefficient(_require(cfg, "coeff.a"), base),
        b=_parse_coefficient(_require(cfg, "coeff.b"), base),
        c=_parse_coefficient(_require(cfg, "coeff.c"), base),
        beta=beta,
    )


def _floats(cfg: dict[str, str], key: str, default=None) -> float:
    if key not in cfg:
        if default is None:
            raise ConfigError(f"missing required config key {key!r}")
        return default
    try:
        return float(cfg[key])
    except ValueError as exc:
        raise ConfigError(f"bad value for {key}: {exc}") from exc


def _write_csv(path: Path, header: list[str], rows: list[list[str]]) -> None:
    with open(path, "w", newline="\n") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(row) + "\n")


# ---------------------------------------------------------------------------
# Subcommands
# ---------------------------------------------------------------------------


def run_propagator(cfg: dict[str, str], base: Path, outdir: Path) -> None:
    model = build_model(cfg, base)
    phi0 = _floats(cfg, "phi0")
    phiN = _floats(cfg, "phiN")
    mu_max = int(_floats(cfg, "mu_max", 2))
    grid_n = int(_floats(cfg, "grid_n", 512))

    breakdown = propagator(model, phi0, phiN, mu_max=mu_max, grid_n=grid_n)
    rows = []
    cumulative = 0.0
    from .oscillator_ode import harmonic_propagator, make_boundary, solve_Q

    solution = solve_Q(model, grid_n)
    boundary = make_boundary(solution, phi0, phiN)
    _, _, harm = harmonic_propagator(solution, boundary)
    for mu, (coeff, w) in enumerate(
        zip(breakdown.series_coefficients, breakdown.W_mu_terms)
    ):
        cumulative += harm * coeff * w
        rows.append([str(mu), _fmt(coeff), _fmt(w), _fmt(cumulative)])
    _write_csv(outdir / "breakdown.csv", ["mu", "coefficient", "W_mu", "cumulative_total"], rows)

    sol_rows = [
        [_fmt(t), _fmt(q), _fmt(f), _fmt(i)]
        for t, q, f, i in zip(solution.grid, solution.Q, solution.f, solution.I_of_tau)
    ]
    _write_csv(outdir / "solution.csv", ["tau", "Q", "f", "I"], sol_rows)
    print(f"total = {_fmt(breakdown.total)}")
    print(f"truncation_estimate = {_fmt(breakdown.truncation_estimate)}")


def run_compare(cfg: dict[str, str], base: Path, outdir: Path) -> None:
    model = build_model(cfg, base)
    phi0 = _floats(cfg, "phi0")
    phiN = _floats(cfg, "phiN")
    mu_max = int(_floats(cfg, "mu_max", 2))
    grid_n = int(_floats(cfg, "grid_n", 512))
    try:
        n_list = [int(tok) for tok in _require(cfg, "oracle.N_list").split(",")]
    except ValueError as exc:
        raise ConfigError(f"bad oracle.N_list: {exc}") from exc
    samples = int(_floats(cfg, "oracle.samples", 100000))
    seed = int(_floats(cfg, "oracle.seed", 0))
    workers = int(_floats(cfg, "oracle.workers", 1))

    analytic = propagator(model, phi0, phiN, mu_max=mu_max, grid_n=grid_n).total
    bd = (phi0, phiN)
    oracle_rows = []  # (method, N, samples, seed, value, stderr)
    for n in n_list:
        if n <= 5:
            oracle_rows.append(("quadrature", n, 0, 0, wn_quadrature(model, bd, n), 0.0))
        else:
            val, err = wn_montecarlo(model, bd, n, samples, seed, workers=workers)
            oracle_rows.append(("montecarlo", n, samples, seed, val, err))
    limit, extrap_err = continuum_extrapolate([(n, v) for _, n, _, _, v, _ in oracle_rows])
    mc_err = max([se for m, *_, se in oracle_rows if m == "montecarlo"], default=0.0)
    combined = max(extrap_err + mc_err, 0.01 * abs(limit) / 3.0, 1e-300)

    rows = [["analytic", "", "", "", _fmt(analytic), _fmt(0.0), _fmt(0.0)]]
    for method, n, ns, sd, val, se in oracle_rows:
        denom = se + abs(val - limit) + 1e-300
        rows.append(
            [method, str(n), str(ns), str(sd), _fmt(val), _fmt(se),
             _fmt(abs(val - analytic) / denom)]
        )
    rows.append(
        ["extrapolated", "", "", "", _fmt(limit), _fmt(extrap_err),
         _fmt(abs(limit - analytic) / combined)]
    )
    _write_csv(
        outdir / "compare.csv",
        ["method", "N", "samples", "seed", "value", "stderr", "discrepancy"],
        rows,
    )
    print(f"analytic = {_fmt(analytic)}")
    print(f"extrapolated = {_fmt(limit)} +- {_fmt(extrap_err)}")


def _grid(spec: str) -> list[float]:
    """'lo:hi:n' -> n evenly spaced points; 'v1,v2,...' -> those values."""
    if ":" in spec:
        lo, hi, n = spec.split(":")
        return list(np.linspace(float(lo), float(hi), int(n)))
    return [float(tok) for tok in spec.split(",")]


def run_i1(args, outdir: Path) -> None:
    rows = []
    for a in _grid(args.a):
        for b in _grid(args.b):
            for c in _grid(args.c):
                quad = i1_quadrature(a, b, c)
                ser = i1_series(a, b, c)
                herm = i1_hermite_method(a, b, c) if b > 0 else math.nan
                rows.append([_fmt(a), _fmt(b), _fmt(c), _fmt(quad), _fmt(ser), _fmt(herm)])
    _write_csv(outdir / "i1.csv", ["a", "b", "c", "quadrature", "series", "hermite"], rows)
    print(f"wrote {len(rows)} rows to {outdir / 'i1.csv'}")


def run_table(args, outdir: Path) -> None:
    kind = args.kind
    if kind == "pcf":
        rows = [
            [_fmt(args.nu), _fmt(z), _fmt(pcf_scaled(args.nu, z))] for z in _grid(args.z)
        ]
        _write_csv(outdir / "pcf.csv", ["nu", "z", "scriptD"], rows)
    elif kind == "hermite":
        rows = [
            [str(n), _fmt(x), _fmt(hermite(n, x))]
            for n in range(args.n_max + 1)
            for x in _grid(args.x)
        ]
        _write_csv(outdir / "hermite.csv", ["n", "x", "H_n"], rows)
    elif kind == "incomplete-hermite":
        rows = []
        for n in range(args.n_max + 1):
            for kappa in range(n + 1):
                spec = HermiteIncompleteSpec(n=n, kappa=kappa, gamma=args.tau)
                rows.append(
                    [str(n), str(kappa), _fmt(args.tau),
                     _fmt(incomplete_hermite(spec, args.phi_beta, args.phi_0))]
                )
        _write_csv(
            outdir / "incomplete_hermite.csv",
            ["n", "kappa", "gamma", "H_incomplete"],
            rows,
        )
    elif kind == "a-coeff":
        rows = [
            [str(j), str(k), str(a_coeff(j, k))]
            for k in range(args.k_max + 1)
            for j in range(2 * k + 1)
        ]
        _write_csv(outdir / "a_coeff.csv", ["j", "k", "A_jk"], rows)
    elif kind == "i1":
        run_i1(args, outdir)
        return
    else:  # pragma: no cover - argparse restricts choices
        raise ConfigError(f"unknown table kind {kind!r}")
    print(f"wrote {kind} table to {outdir}")


# ---------------------------------------------------------------------------
# Entry point
# ---------------------------------------------------------------------------


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="anharmprop",
        description="Euclidean propagator of the quartic anharmonic oscillator",
    )
    parser.add_argument("--config", help="path to key=value config file")
    parser.add_argument("--out", default=".", help="output directory (default: cwd)")
    parser.add_argument("--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("propagator", help="correction-series evaluation")
    sub.add_parser("compare", help="analytic vs time-sliced oracles")

    p_i1 = sub.add_parser("i1", help="quartic integral by three methods")
    p_i1.add_argument("--a", default="1", help="grid: lo:hi:n or v1,v2,...")
    p_i1.add_argument("--b", default="1")
    p_i1.add_argument("--c", default="1")

    p_table = sub.add_parser("table", help="special-function tables")
    p_table.add_argument(
        "--kind",
        required=True,
        choices=["pcf", "hermite", "incomplete-hermite", "a-coeff", "i1"],
    )
    p_table.add_argument("--nu", type=float, default=-0.5)
    p_table.add_argument("--z", default="1:10:10")
    p_table.add_argument("--n-max", type=int, default=8)
    p_table.add_argument("--x", default="-2:2:9")
    p_table.add_argument("--k-max", type=int, default=6)
    p_table.add_argument("--tau", type=float, default=0.25)
    p_table.add_argument("--phi-beta", type=float, default=0.5)
    p_table.add_argument("--phi-0", type=float, default=0.5)
    p_table.add_argument("--a", default="1")
    p_table.add_argument("--b", default="1")
    p_table.add_argument("--c", default="1")
    return parser


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING)
    outdir = Path(args.out)
    try:
        outdir.mkdir(parents=True, exist_ok=True)
        if args.command in ("propagator", "compare"):
            if not args.config:
                raise ConfigError(f"{args.command} requires --config")
            cfg = parse_config(args.config)
            base = Path(args.config).resolve().parent
            if args.command == "propagator":
                run_propagator(cfg, base, outdir)
            else:
                run_compare(cfg, base, outdir)
        elif args.command == "i1":
            run_i1(args, outdir)
        else:
            run_table(args, outdir)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except (ValueError, ArithmeticError, OverflowError) as exc:
        print(f"numeric error: {exc}", file=sys.stderr)
        return 3
    return 0


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
