"""Command-line front end.

Subcommands expose every operator, density, sampler and equation check.
Results are written as CSV (header row, shortest round-trip floats) or as a
single JSON object with params/results/report sections; an optional
--figure flag renders a matplotlib figure next to the delimited output.

Exit codes: 0 success, 2 validation failure, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from . import montecarlo as mc
from . import processes, report, spectral, verify
from .core import DriftSpec, Grid1D, NumericalError, QuadConfig, TemperParams, make_grid
from .operators import TimeSeries, caputo_half, evaluate_on_grid, rl_half, tempered_rl_half
from .operators import marchaud_tempered, riesz_tempered_pointwise, weyl_minus_tempered, weyl_plus_tempered

_POINT_OPS = {
    "marchaud": marchaud_tempered,
    "weyl+": weyl_plus_tempered,
    "weyl-": weyl_minus_tempered,
    "riesz": riesz_tempered_pointwise,
}


# ---------------------------------------------------------------------------
# small parsers
# ---------------------------------------------------------------------------

def _parse_grid(text: str) -> Grid1D:
    """Parse 'lo:hi:n' into a uniform grid."""
    parts = text.split(":")
    if len(parts) != 3:
        raise argparse.ArgumentTypeError(f"grid must be lo:hi:n, got {text!r}")
    try:
        return make_grid(float(parts[0]), float(parts[1]), int(parts[2]))
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _parse_floats(text: str) -> list[float]:
    try:
        return [float(v) for v in text.split(",") if v != ""]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated floats, got {text!r}") from None


def _parse_function(text: str) -> Callable[[float], float]:
    """Parse a test-function spec: exp:s, cos:g, gauss:a, or const:c.

    exp:s   -> exp(s*x)     cos:g   -> cos(g*x)
    gauss:a -> exp(-a*x^2)  const:c -> c
    """
    name, _, arg = text.partition(":")
    try:
        a = float(arg) if arg else 1.0
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad function parameter in {text!r}") from None
    if name == "exp":
        return lambda x: math.exp(a * x)
    if name == "cos":
        return lambda x: math.cos(a * x)
    if name == "gauss":
        return lambda x: math.exp(-a * x * x)
    if name == "const":
        return lambda x: a
    raise argparse.ArgumentTypeError(
        f"unknown function {name!r}; choose exp:s, cos:g, gauss:a or const:c"
    )


def _fmt(v) -> str:
    """Shortest round-trip decimal for floats; plain str otherwise."""
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(v)


# ---------------------------------------------------------------------------
# result plumbing
# ---------------------------------------------------------------------------

@dataclass
class CliResult:
    header: list[str]
    rows: list[tuple]
    params: dict
    report: dict = field(default_factory=dict)
    stdout_values: list | None = None
    exit_code: int = 0
    figure: Callable[[str], None] | None = None


def _write(result: CliResult, args: argparse.Namespace) -> int:
    if args.figure:
        if result.figure is None:
            print(f"note: no figure defined for this subcommand; skipping {args.figure}",
                  file=sys.stderr)
        else:
            result.figure(args.figure)
    if args.format == "json":
        payload = {
            "params": result.params,
            "results": [dict(zip(result.header, row)) for row in result.rows],
            "report": result.report,
        }
        text = json.dumps(_plain(payload), indent=2) + "\n"
    else:
        lines = [",".join(result.header)]
        lines += [",".join(_fmt(v) for v in row) for row in result.rows]
        text = "\n".join(lines) + "\n"
    if args.output:
        with open(args.output, "w", newline="\n") as fh:
            fh.write(text)
    elif result.stdout_values is not None and args.format == "csv":
        for v in result.stdout_values:
            print(_fmt(v))
    else:
        sys.stdout.write(text)
    return result.exit_code


def _plain(obj):
    """json-serializable copy with numpy scalars/arrays unwrapped."""
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return [_plain(v) for v in obj.tolist()]
    return obj


def _quad_config(args: argparse.Namespace) -> QuadConfig:
    return QuadConfig(
        eps=args.eps,
        wmax=args.wmax,
        abs_tol=args.abs_tol,
        max_subdiv=args.max_subdiv,
        f_sup=args.f_sup,
    )


# ---------------------------------------------------------------------------
# subcommand handlers
# ---------------------------------------------------------------------------

def _cmd_symbol(args) -> CliResult:
    p = TemperParams(args.alpha, args.eta)
    vals = [spectral.laplace_symbol(lam, p) for lam in args.lam]
    rows = [(args.alpha, args.eta, lam, v) for lam, v in zip(args.lam, vals)]
    return CliResult(
        header=["alpha", "eta", "lambda", "value"],
        rows=rows,
        params={"alpha": args.alpha, "eta": args.eta, "lambda": args.lam},
        stdout_values=vals,
    )


def _cmd_deriv(args) -> CliResult:
    f = args.f
    if args.operator in _POINT_OPS:
        p = TemperParams(args.alpha, args.eta)
        q = _quad_config(args)
        params = {"operator": args.operator, "alpha": args.alpha, "eta": args.eta}
        if args.grid is not None:
            fld = evaluate_on_grid(args.operator, f, args.grid, p, q)
            rows = list(zip(fld.grid.points, fld.values))
            fig = _curve_fig(fld.grid.points, {"derivative": fld.values}, "x", "value",
                             f"{args.operator} derivative")
            return CliResult(["x", "value"], rows, params, figure=fig)
        val = _POINT_OPS[args.operator](f, args.x, p, q)
        return CliResult(["x", "value"], [(args.x, val)], params, stdout_values=[val])

    # time-fractional operators on [0, tmax]
    grid = make_grid(0.0, args.tmax, args.nt)
    ts = TimeSeries.from_function(f, grid)
    if args.operator == "rl":
        out = rl_half(ts)
    elif args.operator == "caputo":
        out = caputo_half(ts)
    else:
        out = tempered_rl_half(ts, args.eta)
    rows = list(zip(out.grid.points, out.values))
    params = {"operator": args.operator, "eta": args.eta, "tmax": args.tmax, "nt": args.nt}
    fig = _curve_fig(out.grid.points, {"derivative": out.values}, "t", "value",
                     f"{args.operator} half-derivative")
    return CliResult(["t", "value"], rows, params, figure=fig)


def _cmd_multiplier(args) -> CliResult:
    p = TemperParams(args.alpha, args.eta)
    fn = spectral.riesz_multiplier_expanded if args.expanded else spectral.riesz_multiplier
    if args.gamma_grid is not None:
        g = args.gamma_grid.points
        vals = np.asarray(fn(g, p))
        rows = list(zip(g, vals))
        fig = _curve_fig(g, {"psi": vals}, "gamma", "psi(gamma)", "Riesz multiplier")
        return CliResult(["gamma", "psi"], rows,
                         {"alpha": args.alpha, "eta": args.eta}, figure=fig)
    vals = [fn(g, p) for g in args.gamma]
    rows = [(g, v) for g, v in zip(args.gamma, vals)]
    return CliResult(["gamma", "psi"], rows,
                     {"alpha": args.alpha, "eta": args.eta, "gamma": args.gamma},
                     stdout_values=vals)


def _cmd_diffusion(args) -> CliResult:
    p = TemperParams(args.alpha, args.eta)
    if args.half_width is not None:
        n = args.n or 4096
        h = 2.0 * args.half_width / n
        grid = Grid1D(-args.half_width, -args.half_width + (n - 1) * h, n)
    else:
        grid = spectral.diffusion_grid(args.t, p, args.n)
    fld = spectral.solve_riesz_diffusion(args.t, grid, p)
    mass = float(np.trapezoid(fld.values, fld.grid.points))
    rows = list(zip(fld.grid.points, fld.values))
    fig = _curve_fig(fld.grid.points, {"u": fld.values}, "x", "u(x, t)",
                     f"tempered Riesz diffusion, t={args.t}")
    return CliResult(["x", "u"], rows,
                     {"alpha": args.alpha, "eta": args.eta, "t": args.t, "n": grid.n},
                     report={"mass": mass, "min": float(fld.values.min())},
                     figure=fig)


def _cmd_density(args) -> CliResult:
    d = DriftSpec(args.mu, args.x)
    ygrid = args.ygrid or make_grid(args.x - 5.0, args.x + 5.0, 201)
    y = ygrid.points
    if args.kind == "g":
        vals = [processes.heat_kernel(processes.EvalPoint(args.x, yy, args.t)) for yy in y]
    elif args.kind == "u":
        vals = [processes.drifted_density(processes.EvalPoint(args.x, yy, args.t), d) for yy in y]
    else:
        y = y[y >= args.x]
        vals = [
            processes.folded_drifted_density(processes.EvalPoint(args.x, yy, args.t), d)
            for yy in y
        ]
    vals = np.asarray(vals)
    rows = list(zip(y, vals))
    fig = _curve_fig(y, {args.kind: vals}, "y", "density",
                     f"{args.kind} density, mu={args.mu}, t={args.t}")
    return CliResult(["y", "value"], rows,
                     {"kind": args.kind, "mu": args.mu, "x": args.x, "t": args.t},
                     figure=fig)


def _cmd_ml(args) -> CliResult:
    vals = [processes.mittag_leffler_half(z) for z in args.z]
    rows = list(zip(args.z, vals))
    fig = _curve_fig(np.asarray(args.z), {"E": np.asarray(vals)}, "z", "E_1/2(-z)",
                     "order-1/2 Mittag-Leffler relaxation")
    return CliResult(["z", "value"], rows, {"z": args.z}, stdout_values=vals, figure=fig)


def _cmd_mc(args) -> CliResult:
    threads = args.threads or os.cpu_count() or 1
    rep: dict = {}
    overlay = None
    if args.process == "subordinator":
        p = TemperParams(args.alpha, args.eta)
        batch, info = mc.tempered_subordinator_batch(p, args.t, args.n, args.seed, threads)
        rep["acceptance_rate"] = info.rate
        rep["proposals"] = info.proposals
        params = {"process": "subordinator", "alpha": args.alpha, "eta": args.eta}
    elif args.process == "drifted":
        d = DriftSpec(args.mu, args.x0)
        batch = mc.drifted_batch(d, args.t, args.n, args.seed, threads)
        params = {"process": "drifted", "mu": args.mu, "x0": args.x0}
        overlay = lambda y: processes.drifted_density(processes.EvalPoint(args.x0, y, args.t), d)
    elif args.process == "reflected":
        d = DriftSpec(args.mu, args.x0)
        batch = mc.reflected_batch(d, args.t, args.n, args.seed, threads)
        params = {"process": "reflected", "mu": args.mu, "x0": args.x0}
        overlay = lambda y: (
            processes.folded_drifted_density(processes.EvalPoint(args.x0, y, args.t), d)
            if y >= args.x0
            else 0.0
        )
    else:
        batch = mc.inverse_half_batch(args.t, args.n, args.seed, threads)
        params = {"process": "inverse"}
    params.update({"t": args.t, "n": args.n, "seed": args.seed})

    for lam in args.lam or []:
        est = mc.empirical_laplace(batch, lam)
        rep[f"laplace_{_fmt(lam)}"] = {"value": est.value, "stderr": est.stderr}
    rows = list(enumerate(batch.samples))

    def fig(path, samples=batch.samples, overlay_fn=overlay):
        ov = None
        if overlay_fn is not None:
            ys = np.linspace(samples.min(), samples.max(), 400)
            ov = (ys, np.array([overlay_fn(v) for v in ys]))
        report.save_histogram(path, samples, f"{args.process} endpoint draws", ov)

    return CliResult(["index", "sample"], rows, params, report=rep, figure=fig)


def _cmd_verify(args) -> CliResult:
    code = 0
    if args.check == "g":
        rep = verify.check_g_half_derivative(args.x, args.ygrid, args.tgrid)
        threshold = args.threshold if args.threshold is not None else verify.REFERENCE["g"]["threshold"]
    elif args.check == "thm1":
        d = DriftSpec(args.mu, 0.0)
        rep = verify.residual_theorem1(d, args.xgrid, args.ygrid, args.tgrid, args.band)
        threshold = args.threshold if args.threshold is not None else verify.REFERENCE["thm1"]["threshold"]
    elif args.check == "thm2":
        d = DriftSpec(args.mu, args.x)
        rep = verify.residual_theorem2(d, args.x, args.ygrid, args.tgrid, args.tanh_sign)
        threshold = args.threshold if args.threshold is not None else verify.REFERENCE["thm2"]["threshold"]
    elif args.check == "weyl":
        p = TemperParams(args.alpha, args.eta)
        disc = verify.check_weyl_decomposition(args.f, args.x, p, _quad_config(args))
        threshold = args.threshold if args.threshold is not None else 1e-7
        passed = disc <= threshold
        return CliResult(
            ["discrepancy", "threshold", "passed"],
            [(disc, threshold, passed)],
            {"check": "weyl", "alpha": args.alpha, "eta": args.eta, "x": args.x},
            report={"discrepancy": disc},
            exit_code=0 if passed else 3,
        )
    else:  # init
        d = DriftSpec(args.mu, args.x0)
        if args.density == "u":
            mass = verify.check_initial_concentration(processes.drifted_density, d, args.t)
        else:
            mass = verify.check_initial_concentration(
                processes.folded_drifted_density, d, args.t, half_line=True
            )
        threshold = args.threshold if args.threshold is not None else 0.9999
        passed = mass >= threshold
        return CliResult(
            ["mass", "threshold", "passed"],
            [(mass, threshold, passed)],
            {"check": "init", "density": args.density, "mu": args.mu, "x0": args.x0, "t": args.t},
            report={"mass": mass},
            exit_code=0 if passed else 3,
        )

    passed = rep.max_abs <= threshold
    if not passed:
        code = 3
    at_items = sorted(rep.at.items())
    header = ["max_abs", "l2", "threshold", "passed"] + [f"at_{k}" for k, _ in at_items]
    row = (rep.max_abs, rep.l2, threshold, passed) + tuple(v for _, v in at_items)
    return CliResult(
        header,
        [row],
        {"check": args.check},
        report={
            "equation": rep.equation,
            "grids": rep.grids,
            "max_abs": rep.max_abs,
            "l2": rep.l2,
            "at": rep.at,
            "extras": rep.extras,
            "threshold": threshold,
            "passed": passed,
        },
        exit_code=code,
    )


def _curve_fig(x, ys, xlabel, ylabel, title):
    def fig(path, x=x, ys=ys):
        report.save_curve(path, x, ys, xlabel, ylabel, title)

    return fig


# ---------------------------------------------------------------------------
# parser construction
# ---------------------------------------------------------------------------

def _add_output_options(sp: argparse.ArgumentParser) -> None:
    sp.add_argument("--output", help="write results to this path instead of stdout")
    sp.add_argument("--format", choices=["csv", "json"], default="csv",
                    help="output format (default csv)")
    sp.add_argument("--figure", help="also render a figure (png/pdf) to this path")


def _add_quad_options(sp: argparse.ArgumentParser) -> None:
    sp.add_argument("--eps", type=float, default=1e-6,
                    help="inner cutoff of the singular quadrature (default 1e-6)")
    sp.add_argument("--wmax", type=float, default=None,
                    help="outer truncation; default: from the kernel tail bound")
    sp.add_argument("--abs-tol", type=float, default=1e-8,
                    help="target absolute quadrature error (default 1e-8)")
    sp.add_argument("--max-subdiv", type=int, default=2000,
                    help="adaptive subdivision cap (default 2000)")
    sp.add_argument("--f-sup", type=float, default=None,
                    help="sup-norm bound on f for tail truncation (needed when eta=0)")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="temperedfrac",
        description="Tempered fractional derivatives, densities, samplers and equation checks.",
    )
    ap.add_argument("--config", help="key=value file; command-line flags take precedence")
    sub = ap.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("symbol", help="Laplace exponent (eta+lambda)^alpha - eta^alpha")
    sp.add_argument("--alpha", type=float, required=True, help="fractional order in (0,1)")
    sp.add_argument("--eta", type=float, default=0.0, help="tempering rate, 1/time (default 0)")
    sp.add_argument("--lambda", dest="lam", type=_parse_floats, required=True,
                    help="Laplace variable(s) >= 0, comma separated")
    _add_output_options(sp)
    sp.set_defaults(handler=_cmd_symbol)

    sp = sub.add_parser(
        "deriv",
        help="tempered fractional derivatives of a test function",
        description="Pointwise operators (marchaud, weyl+, weyl-, riesz) integrate "
        "increments of f against the kernel alpha*exp(-eta*w)/(Gamma(1-alpha)*w^(alpha+1)); "
        "time operators (rl, caputo, tempered-rl) are order-1/2 derivatives on [0, tmax].",
    )
    sp.add_argument("operator",
                    choices=["marchaud", "rl", "caputo", "tempered-rl", "weyl+", "weyl-", "riesz"])
    sp.add_argument("--f", type=_parse_function, required=True,
                    help="test function: exp:s, cos:g, gauss:a, const:c")
    sp.add_argument("--alpha", type=float, default=0.5, help="fractional order in (0,1)")
    sp.add_argument("--eta", type=float, default=0.0, help="tempering rate (default 0)")
    sp.add_argument("--x", type=float, default=0.0, help="evaluation point (pointwise ops)")
    sp.add_argument("--grid", type=_parse_grid, default=None,
                    help="lo:hi:n evaluation grid (pointwise ops)")
    sp.add_argument("--tmax", type=float, default=1.0, help="time horizon (time ops)")
    sp.add_argument("--nt", type=int, default=513, help="time nodes incl. t=0 (time ops)")
    _add_quad_options(sp)
    _add_output_options(sp)
    sp.set_defaults(handler=_cmd_deriv)

    sp = sub.add_parser("multiplier",
                        help="Fourier symbol psi(gamma) of the tempered Riesz derivative")
    sp.add_argument("--alpha", type=float, required=True)
    sp.add_argument("--eta", type=float, default=0.0)
    sp.add_argument("--gamma", type=_parse_floats, default=[1.0],
                    help="frequency value(s), comma separated")
    sp.add_argument("--gamma-grid", type=_parse_grid, default=None, help="lo:hi:n frequency grid")
    sp.add_argument("--expanded", action="store_true",
                    help="use the angle-difference expansion (eta > 0 only)")
    _add_output_options(sp)
    sp.set_defaults(handler=_cmd_multiplier)

    sp = sub.add_parser("diffusion",
                        help="density of the diffusion generated by the tempered Riesz operator")
    sp.add_argument("--alpha", type=float, required=True)
    sp.add_argument("--eta", type=float, default=0.0)
    sp.add_argument("--t", type=float, required=True, help="time > 0")
    sp.add_argument("--half-width", type=float, default=None,
                    help="window half-width (default: auto-sized)")
    sp.add_argument("--n", type=int, default=None, help="grid points (default: auto-sized)")
    _add_output_options(sp)
    sp.set_defaults(handler=_cmd_diffusion)

    sp = sub.add_parser("density", help="closed-form transition densities")
    sp.add_argument("kind", choices=["u", "v", "g"],
                    help="u: drifted, v: folded drifted, g: heat kernel")
    sp.add_argument("--mu", type=float, default=0.0, help="drift")
    sp.add_argument("--x", type=float, default=0.0, help="start point")
    sp.add_argument("--t", type=float, required=True, help="time > 0")
    sp.add_argument("--ygrid", type=_parse_grid, default=None, help="lo:hi:n target grid")
    _add_output_options(sp)
    sp.set_defaults(handler=_cmd_density)

    sp = sub.add_parser("ml", help="order-1/2 Mittag-Leffler relaxation E(z) = exp(z^2) erfc(z)")
    sp.add_argument("--z", type=_parse_floats, required=True, help="argument(s) >= 0")
    _add_output_options(sp)
    sp.set_defaults(handler=_cmd_ml)

    sp = sub.add_parser("mc", help="Monte Carlo endpoint samplers")
    sp.add_argument("process", choices=["subordinator", "drifted", "reflected", "inverse"])
    sp.add_argument("--alpha", type=float, default=0.5, help="subordinator order")
    sp.add_argument("--eta", type=float, default=0.0, help="tempering rate")
    sp.add_argument("--mu", type=float, default=0.0, help="drift (drifted/reflected)")
    sp.add_argument("--x0", type=float, default=0.0, help="start point (drifted/reflected)")
    sp.add_argument("--t", type=float, required=True, help="time horizon > 0")
    sp.add_argument("--n", type=int, required=True, help="number of draws")
    sp.add_argument("--seed", type=int, required=True, help="RNG seed")
    sp.add_argument("--threads", type=int, default=None,
                    help="sampling workers (default: all cores); output is thread-count invariant")
    sp.add_argument("--lambda", dest="lam", type=_parse_floats, default=None,
                    help="also report empirical Laplace transform at these values")
    _add_output_options(sp)
    sp.set_defaults(handler=_cmd_mc)

    sp = sub.add_parser("verify", help="numerical checks of the governing equations")
    vsub = sp.add_subparsers(dest="check", required=True)

    vp = vsub.add_parser("g", help="half-derivative transport identity of the heat kernel")
    vp.add_argument("--x", type=float, default=0.0)
    vp.add_argument("--ygrid", type=_parse_grid, default=make_grid(0.5, 3.0, 64))
    vp.add_argument("--tgrid", type=_parse_grid, default=make_grid(0.2, 2.0, 256))
    vp.add_argument("--threshold", type=float, default=None,
                    help="max_abs threshold (default: committed reference value)")
    _add_output_options(vp)
    vp.set_defaults(handler=_cmd_verify)

    vp = vsub.add_parser("thm1", help="drifted-law tempered half-derivative equation")
    vp.add_argument("--mu", type=float, default=2.0)
    vp.add_argument("--xgrid", type=_parse_grid, default=make_grid(-1.0, 1.0, 64))
    vp.add_argument("--ygrid", type=_parse_grid, default=make_grid(-1.0, 1.0, 64))
    vp.add_argument("--tgrid", type=_parse_grid, default=make_grid(0.2, 2.0, 256))
    vp.add_argument("--band", type=float, default=0.1, help="diagonal exclusion half-width")
    vp.add_argument("--threshold", type=float, default=None)
    _add_output_options(vp)
    vp.set_defaults(handler=_cmd_verify)

    vp = vsub.add_parser("thm2", help="folded-law tempered half-derivative equation")
    vp.add_argument("--mu", type=float, default=1.0)
    vp.add_argument("--x", type=float, default=0.5)
    vp.add_argument("--ygrid", type=_parse_grid, default=make_grid(0.6, 4.0, 64))
    vp.add_argument("--tgrid", type=_parse_grid, default=make_grid(0.2, 2.0, 256))
    vp.add_argument("--tanh-sign", type=float, choices=[1.0, -1.0], default=1.0,
                    help="sign of the tanh coefficient (diagnostic)")
    vp.add_argument("--threshold", type=float, default=None)
    _add_output_options(vp)
    vp.set_defaults(handler=_cmd_verify)

    vp = vsub.add_parser("weyl", help="two-kernel split of the upper Weyl derivative")
    vp.add_argument("--f", type=_parse_function, default=_parse_function("exp:1"))
    vp.add_argument("--x", type=float, default=0.0)
    vp.add_argument("--alpha", type=float, default=0.5)
    vp.add_argument("--eta", type=float, default=1.0)
    vp.add_argument("--threshold", type=float, default=None)
    _add_quad_options(vp)
    _add_output_options(vp)
    vp.set_defaults(handler=_cmd_verify)

    vp = vsub.add_parser("init", help="small-t mass concentration at the start point")
    vp.add_argument("--density", choices=["u", "v"], required=True)
    vp.add_argument("--mu", type=float, default=1.0)
    vp.add_argument("--x0", type=float, default=0.0)
    vp.add_argument("--t", type=float, default=1e-4)
    vp.add_argument("--threshold", type=float, default=None,
                    help="minimum mass within 0.1 of the start (default 0.9999)")
    _add_output_options(vp)
    vp.set_defaults(handler=_cmd_verify)

    return ap


def _apply_config(ap: argparse.ArgumentParser, argv: Sequence[str]) -> Sequence[str]:
    """Expand an optional key=value config file into flags.

    Config-derived flags are inserted right after the subcommand tokens, so
    explicit command-line flags (parsed later) take precedence.  Only
    value-taking options can be set from a config file.
    """
    if "--config" not in argv:
        return argv
    out = list(argv)
    idx = out.index("--config")
    if idx + 1 >= len(out):
        ap.error("--config needs a path")
    path = out[idx + 1]
    del out[idx : idx + 2]
    try:
        with open(path) as fh:
            lines = [ln.strip() for ln in fh]
    except OSError as exc:
        ap.error(f"cannot read config file: {exc}")
    extra: list[str] = []
    for line in lines:
        if not line or line.startswith("#"):
            continue
        key, sep, value = line.partition("=")
        if not sep:
            ap.error(f"config lines must be key=value, got {line!r}")
        extra += ["--" + key.strip().replace("_", "-"), value.strip()]
    head: list[str] = []
    rest = out
    while rest and not rest[0].startswith("-"):
        head.append(rest[0])
        rest = rest[1:]
    return head + extra + rest


def main(argv: Sequence[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    ap = build_parser()
    argv = list(_apply_config(ap, argv))
    args = ap.parse_args(argv)
    try:
        result = args.handler(args)
        return _write(result, args)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except NumericalError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
