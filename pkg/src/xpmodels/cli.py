"""Command-line entry point ``xp``.

Every subcommand builds a table (columns, rows, metadata) that is written
as CSV, as JSON (checked against ``schemas/output.schema.json``) or, with
``--plot-data``, as whitespace columns readable by gnuplot.

Exit codes: 0 success, 2 usage error, 1 numeric failure.
"""
from __future__ import annotations

import argparse
import json
import math
import sys
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

import numpy as np

from . import __version__
from .dynamics import (identity_chart_coordinates, integrate_orbit, period,
                       period_closed_linear)
from .errors import ConvergenceError, UsageError, XpError
from .io import fmt, load_model, write_csv
from .models import KINDS, PARAM_SETS, make_model, scalar_curvature, to_symmetric_gauge
from .numerics import Quadrature
from .quantum import (SpectrumResult, constant_model_scattering, constant_model_spectrum,
                      modelI_spectrum, shoot_spectrum, zero_mode)
from .quantum.constant import bound_state
from .riemann import Identification, compare_spectrum, load_zeros
from .semiclassics import (STANDARD_PROFILES, abel_invert_xp, builtin_standard, count_closed,
                           count_states, density_of_states, geometric_grid, linear_log_count,
                           linear_log_profile, recover_linear_term)

SUBCOMMANDS = ("catalog", "curvature", "trajectory", "period", "count", "invert",
               "spectrum", "scatter", "zero-mode", "compare")
# repeatable flags: a command-line occurrence replaces the config value
_REPEATABLE = {"at": "--at", "energy": "--energy"}


class _Usage(Exception):
    """Raised while validating flags; reported with exit code 2."""


@dataclass
class Table:
    command: str
    columns: list
    rows: list
    meta: dict = field(default_factory=dict)
    blocks: list = field(default_factory=list)  # extra (name, columns, rows) for plot-data


# -- argument types --------------------------------------------------------------

def _finite(text):
    try:
        v = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None
    if not math.isfinite(v):
        raise argparse.ArgumentTypeError(f"must be finite, got {text!r}")
    return v


def _positive(text):
    v = _finite(text)
    if not v > 0:
        raise argparse.ArgumentTypeError(f"must be positive, got {text!r}")
    return v


def _nonzero(text):
    v = _finite(text)
    if v == 0:
        raise argparse.ArgumentTypeError("must be non-zero")
    return v


def _tol(text):
    v = _positive(text)
    if not v < 1:
        raise argparse.ArgumentTypeError(f"tolerance must lie in (0, 1), got {text!r}")
    return v


def _count(minimum):
    def parse(text):
        try:
            v = int(text)
        except ValueError:
            raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
        if v < minimum:
            raise argparse.ArgumentTypeError(f"must be at least {minimum}, got {v}")
        return v

    return parse


def _param(text):
    if "=" not in text:
        raise argparse.ArgumentTypeError(f"expected k=v, got {text!r}")
    k, v = text.split("=", 1)
    k = k.strip()
    if not k:
        raise argparse.ArgumentTypeError(f"empty parameter name in {text!r}")
    return k, _finite(v)


# -- parser ----------------------------------------------------------------------

def _common(p):
    g = p.add_argument_group("common options")
    g.add_argument("--model", choices=KINDS, help="catalog model kind")
    g.add_argument("--param", type=_param, action="append", default=[], metavar="K=V",
                   help="model parameter (repeatable)")
    g.add_argument("--model-file", metavar="PATH", help="JSON model record instead of --model")
    g.add_argument("--hbar", type=_positive, default=1.0)
    g.add_argument("--theta", type=_finite, default=0.0, help="self-adjoint extension angle")
    g.add_argument("--format", choices=("csv", "json"), default="csv")
    g.add_argument("--out", metavar="PATH", help="write here instead of stdout")
    g.add_argument("--tol", type=_tol, default=None, help="relative tolerance override")
    g.add_argument("--config", metavar="PATH", help="JSON file of default flags")
    g.add_argument("--plot-data", action="store_true", help="gnuplot-style whitespace columns")


def _energies(p):
    p.add_argument("--energy", type=_nonzero, action="append", metavar="E",
                   help="energy (repeatable)")
    p.add_argument("--erange", type=_finite, nargs=2, metavar=("LO", "HI"),
                   help="energy range sampled by --points")
    p.add_argument("--points", type=_count(2), default=20)


def build_parser():
    parser = argparse.ArgumentParser(prog="xp", description="Covariant xp models: classical, "
                                     "semiclassical and quantum computations.")
    parser.add_argument("--version", action="version", version=f"xp {__version__}")
    sub = parser.add_subparsers(dest="command", metavar="COMMAND", required=True)

    p = sub.add_parser("catalog", help="list model kinds and parameter sets")
    _common(p)

    p = sub.add_parser("curvature", help="scalar curvature R(x)")
    _common(p)
    p.add_argument("--at", type=_finite, action="append", metavar="X", help="position (repeatable)")
    p.add_argument("--grid", type=_finite, nargs=2, metavar=("LO", "HI"))
    p.add_argument("--points", type=_count(2), default=50)

    p = sub.add_parser("trajectory", help="integrate a classical orbit")
    _common(p)
    p.add_argument("--energy", type=_nonzero, required=True)
    p.add_argument("--periods", type=_count(1), default=1)
    p.add_argument("--samples", type=_count(200), default=400, help="samples per period")

    p = sub.add_parser("period", help="orbit period T_E")
    _common(p)
    _energies(p)

    p = sub.add_parser("count", help="semiclassical counting function n(E)")
    _common(p)
    _energies(p)
    p.add_argument("--closed", action="store_true", help="add the closed form when one exists")

    p = sub.add_parser("invert", help="Abel-type inversion of a counting function")
    _common(p)
    p.add_argument("--family", choices=("xp", "standard"), default="xp")
    p.add_argument("--profile", choices=("wu-sprung", "mussardo", "linear-log"))
    p.add_argument("--max", dest="vmax", type=_positive, required=True,
                   help="largest w (xp) or V (standard) of the grid")
    p.add_argument("--per-decade", type=_count(2), default=200,
                   help="geometric grid density (default)")
    p.add_argument("--points", type=_count(2), default=None,
                   help="uniform grid with this many points instead")
    p.add_argument("--gamma", type=_finite, default=0.0, help="add gamma*E to n(E)")
    p.add_argument("--recover-gamma", action="store_true",
                   help="fit the linear term lost by the xp inversion")

    p = sub.add_parser("spectrum", help="eigenvalues for a self-adjoint extension")
    _common(p)
    p.add_argument("--solver", choices=("bessel", "shoot", "closed"), default=None,
                   help="default: bessel for linear models, closed for constant, shoot otherwise")
    p.add_argument("--emax", type=_positive, default=50.0)

    p = sub.add_parser("scatter", help="continuum states of the constant model")
    _common(p)
    _energies(p)

    p = sub.add_parser("zero-mode", help="E = 0 eigenstate and its norm")
    _common(p)

    p = sub.add_parser("compare", help="offsets against the smooth Riemann-zero count")
    _common(p)
    p.add_argument("--zeros", metavar="FILE", help="table of zero ordinates, one per line")
    p.add_argument("--emax", type=_positive, default=200.0)
    p.add_argument("--window", type=_finite, nargs=2, metavar=("LO", "HI"),
                   help="energy window for the summary statistics")
    return parser


# -- config --------------------------------------------------------------------------

def _config_tokens(path, argv):
    try:
        cfg = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise _Usage(f"cannot read config {path}: {exc}") from None
    if not isinstance(cfg, dict):
        raise _Usage("config must be a JSON object")
    tokens = []
    for key, value in cfg.items():
        flag = "--" + key.replace("_", "-")
        if key in ("config", "command"):
            raise _Usage(f"config may not set {key!r}")
        if key in _REPEATABLE and _REPEATABLE[key] in argv:
            continue
        if key == "param":
            items = value.items() if isinstance(value, dict) else (v.split("=", 1) for v in value)
            for k, v in items:
                tokens += [flag, f"{k}={v}"]
        elif isinstance(value, bool):
            if value:
                tokens.append(flag)
        elif isinstance(value, list):
            if key in _REPEATABLE:
                for v in value:
                    tokens += [flag, str(v)]
            else:
                tokens += [flag] + [str(v) for v in value]
        else:
            tokens += [flag, str(value)]
    return tokens


def parse_args(argv):
    parser = build_parser()
    argv = list(argv)
    pre = argparse.ArgumentParser(add_help=False)
    pre.add_argument("--config")
    known, _ = pre.parse_known_args(argv)
    if known.config:
        try:
            tokens = _config_tokens(known.config, argv)
        except _Usage as exc:
            parser.error(str(exc))
        pos = next((i for i, a in enumerate(argv) if a in SUBCOMMANDS), None)
        if pos is not None:
            # config first, so later command-line flags win
            argv = argv[:pos + 1] + tokens + argv[pos + 1:]
    return parser, parser.parse_args(argv)


# -- validation ------------------------------------------------------------------------

def _model(args, required=True):
    if args.model_file and args.model:
        raise _Usage("give either --model or --model-file, not both")
    if args.model_file:
        return load_model(args.model_file)
    if args.model is None:
        if required:
            raise _Usage(f"{args.command} needs --model")
        return None
    return make_model(args.model, dict(args.param), args.hbar)


def _energy_list(args):
    if args.energy and args.erange:
        raise _Usage("give either --energy or --erange")
    if args.energy:
        return np.array(args.energy, dtype=float)
    if args.erange:
        lo, hi = args.erange
        if not lo < hi:
            raise _Usage("--erange needs LO < HI")
        return np.linspace(lo, hi, args.points)
    raise _Usage(f"{args.command} needs --energy or --erange")


def _quad(args, default_abs=1e-13):
    return None if args.tol is None else Quadrature(abs_tol=default_abs, rel_tol=args.tol)


def validate(args):
    """Check flag combinations and build the inputs; no numerical work happens here."""
    if args.plot_data and args.format == "json":
        raise _Usage("--plot-data writes text columns; drop --format json")
    cmd = args.command
    plan = {}
    if cmd == "catalog":
        return plan
    if cmd == "invert":
        plan["model"] = _model(args, required=args.profile is None)
        if args.profile in ("wu-sprung", "mussardo") and args.family != "standard":
            raise _Usage(f"profile {args.profile} belongs to --family standard")
        if args.profile == "linear-log" and args.family != "xp":
            raise _Usage("profile linear-log belongs to --family xp")
        if args.profile is None and args.family == "standard":
            raise _Usage("--family standard needs --profile wu-sprung or mussardo")
        if args.profile == "linear-log":
            p = dict(args.param)
            if set(p) != {"w0", "mu"}:
                raise _Usage("profile linear-log takes --param w0=.. --param mu=..")
            if not p["w0"] > 0:
                raise _Usage("w0 must be positive")
            plan["model"] = None
        if args.recover_gamma and args.family != "xp":
            raise _Usage("--recover-gamma applies to --family xp")
        return plan
    if cmd == "compare":
        m = _model(args)
        sym = m if m.is_symmetric else to_symmetric_gauge(m)[1]
        if sym.kind != "linear":
            raise _Usage("compare needs a linear model (or model-III)")
        plan["model"] = sym
        if args.zeros:
            plan["zeros"] = load_zeros(args.zeros)
        if args.window and not args.window[0] < args.window[1]:
            raise _Usage("--window needs LO < HI")
        return plan
    m = _model(args)
    plan["model"] = m
    if cmd == "curvature":
        if args.at and args.grid:
            raise _Usage("give either --at or --grid")
        if args.at:
            xs = np.array(args.at, dtype=float)
        elif args.grid:
            lo, hi = args.grid
            if not lo < hi:
                raise _Usage("--grid needs LO < HI")
            xs = np.linspace(lo, hi, args.points)
        else:
            raise _Usage("curvature needs --at or --grid")
        if not np.all(m.domain.contains(xs)):
            raise _Usage(f"positions must lie in the domain ({m.lower}, {m.upper})")
        plan["x"] = xs
    elif cmd in ("period", "count", "scatter"):
        plan["E"] = _energy_list(args)
        if cmd == "scatter":
            if m.kind != "constant":
                raise _Usage("scatter needs --model constant")
            bad = [e for e in plan["E"] if not abs(e) > 2 * m.params["c"]]
            if bad:
                raise _Usage(f"scattering energies must satisfy |E| > 2c; got {bad[0]!r}")
    elif cmd == "spectrum":
        solver = args.solver
        sym = m if m.is_symmetric else to_symmetric_gauge(m)[1]
        if solver is None:
            solver = {"linear": "bessel", "constant": "closed"}.get(sym.kind, "shoot")
        if solver == "closed" and m.kind != "constant":
            raise _Usage("the closed-form solver covers the constant model only")
        if solver == "bessel" and sym.kind != "linear":
            raise _Usage("the bessel solver needs a linear model (or model-III)")
        if solver == "shoot":
            if m.kind == "constant":
                raise _Usage("the constant model has a continuum; use --solver closed")
            th = math.remainder(args.theta, 2 * math.pi)
            if min(abs(th), abs(abs(th) - math.pi)) > 1e-12:
                raise _Usage("the shooting solver supports theta = 0 or pi")
        plan["solver"], plan["sym"] = solver, sym
    return plan


# -- commands ------------------------------------------------------------------------------

def _model_meta(m):
    if m is None:
        return {}
    return {"model": m.kind, "gauge": m.gauge,
            "params": " ".join(f"{k}={fmt(v)}" for k, v in m.params.items()), "hbar": m.hbar}


def cmd_catalog(args, plan):
    rows = [(kind, " | ".join(",".join(s) for s in PARAM_SETS[kind])) for kind in KINDS]
    return Table("catalog", ["kind", "parameter_sets"], rows)


def cmd_curvature(args, plan):
    m = plan["model"]
    R, flag = scalar_curvature(m, plan["x"], with_flag=True)
    rows = [(x, r, bool(f)) for x, r, f in zip(plan["x"], np.atleast_1d(R), np.atleast_1d(flag))]
    return Table("curvature", ["x", "R", "degraded"], rows, _model_meta(m))


def cmd_trajectory(args, plan):
    m = plan["model"]
    kw = {} if args.tol is None else {"tol": args.tol}
    traj = integrate_orbit(m, args.energy, args.periods, args.samples, **kw)
    xp, xm = identity_chart_coordinates(m, traj.t, traj.x)
    rows = list(zip(traj.t, traj.x, traj.p, xp, xm))
    meta = _model_meta(m)
    meta.update({"energy": args.energy, "period": traj.period if traj.period else math.nan,
                 "open": int(traj.open), "bounces": len(traj.bounce_times),
                 "energy_error": traj.energy_error(m)})
    blocks = []
    if args.plot_data:
        # the wall x = lower is the line x+ + x- = 0 in the identity chart; for the
        # linear model it is also shown as the hyperbola x+ x- = 1 of the flat chart
        t = np.linspace(float(np.min(xp)), float(np.max(xp)), 101)
        blocks.append(("wall (identity chart)", ["xplus", "xminus"], list(zip(t, -t))))
        sym = m if m.is_symmetric else to_symmetric_gauge(m)[1]
        if sym.kind == "linear":
            u = np.geomspace(1e-2, 1e2, 201)
            blocks.append(("light-cone hyperbola (flat chart)", ["xplus", "xminus"],
                           list(zip(u, 1.0 / u))))
    return Table("trajectory", ["t", "x", "p", "xplus", "xminus"], rows, meta, blocks)


def cmd_period(args, plan):
    m = plan["model"]
    sym = m if m.is_symmetric else to_symmetric_gauge(m)[1]
    closed = sym.kind == "linear"
    q = _quad(args, 1e-14)
    rows = []
    for E in plan["E"]:
        T = period(m, E, q)
        rows.append((E, T, period_closed_linear(sym, E)) if closed else (E, T))
    cols = ["E", "T"] + (["T_closed"] if closed else [])
    return Table("period", cols, rows, _model_meta(m))


def _closed_kind(m):
    if m.kind == "cosh":
        return "harmonic-cosh", dict(m.params)
    if m.kind in ("linear", "berry-keating") and m.is_symmetric:
        return m.kind, dict(m.params)
    if m.kind in ("linear", "berry-keating"):
        sym = to_symmetric_gauge(m)[1]
        return sym.kind, dict(sym.params)
    return None, None


def cmd_count(args, plan):
    m = plan["model"]
    q = _quad(args)
    kind, params = _closed_kind(m) if args.closed else (None, None)
    if args.closed and kind is None:
        raise UsageError(f"no closed-form count for kind {m.kind!r}")
    rows = []
    for E in plan["E"]:
        row = [E, count_states(m, E, q), density_of_states(m, E)]
        if kind:
            row.append(count_closed(kind, E, params, m.hbar))
        rows.append(tuple(row))
    cols = ["E", "n", "dn_dE"] + (["n_closed"] if kind else [])
    return Table("count", cols, rows, _model_meta(m))


def _grid(args, start):
    if args.points is not None:
        return np.linspace(start, args.vmax, args.points)
    if start > 0:
        return geometric_grid(start, args.vmax, args.per_decade)
    # a zero lower end: x(V0) = 0 followed by a geometric grid from vmax / 1e3
    return np.concatenate([[start], geometric_grid(args.vmax * 1e-3, args.vmax, args.per_decade)])


def cmd_invert(args, plan):
    hbar = args.hbar
    q = _quad(args, 1e-12)
    meta = {"family": args.family}
    if args.family == "standard":
        V0 = STANDARD_PROFILES[args.profile][2]
        if not args.vmax > V0:
            raise UsageError(f"--max must exceed V0 = {V0}")
        grid = _grid(args, V0)
        res = builtin_standard(args.profile, grid, hbar)
        meta.update({"profile": args.profile, "V0": V0, "monotone": int(res.monotone)})
        return Table("invert", ["V", "x"], list(zip(res.w, res.x)), meta)
    gamma = args.gamma
    if args.profile == "linear-log":
        p = dict(args.param)
        w0, mu = p["w0"], p["mu"]
        x0 = w0

        def n(E):
            return linear_log_count(E, w0, mu, hbar)[0] + gamma * E

        def dn(E):
            return linear_log_count(E, w0, mu, hbar)[1] + gamma

        meta.update({"profile": "linear-log", "w0": w0, "mu": mu})
    else:
        m = plan["model"]
        sym = m if m.is_symmetric else to_symmetric_gauge(m)[1]
        if not math.isfinite(sym.lower):
            raise UsageError("xp inversion needs a model with a boundary")
        x0 = sym.lower
        w0 = float(sym.w(x0))

        def n(E):
            return count_states(sym, E) + gamma * E

        def dn(E):
            return density_of_states(sym, E) + gamma

        meta.update(_model_meta(m))
    if not args.vmax > w0:
        raise UsageError(f"--max must exceed w0 = {w0}")
    grid = _grid(args, w0)
    res = abel_invert_xp(n, grid, w0, x0, hbar, dn, q)
    cols, rows = ["w", "x"], [(w, x) for w, x in zip(res.w, res.x)]
    if args.profile == "linear-log":
        ref = linear_log_profile(res.w, w0, mu, hbar, x0)
        cols.append("x_closed")
        rows = [r + (c,) for r, c in zip(rows, ref)]
    meta.update({"gamma_added": gamma, "monotone": int(res.monotone)})
    if args.recover_gamma:
        E = np.linspace(2 * w0, 2 * args.vmax, 12)[1:]
        meta["gamma_fitted"] = recover_linear_term(n, res, E, hbar)
    return Table("invert", cols, rows, meta)


def _bessel(sym, theta, emax):
    """Model-I spectrum scaled to w = alpha x: E = alpha E_I with z0 = h."""
    a, h = sym.params["alpha"], sym.params["h"]
    s = modelI_spectrum(h, theta, emax / a, sym.hbar)
    return SpectrumResult(s.extension, a * s.eigenvalues, s.residuals, s.hbar, s.zero_mode,
                          solver="bessel", model={"kind": "linear", "params": dict(sym.params),
                                                  "hbar": sym.hbar})


def _spectrum(args, plan):
    m, solver = plan["model"], plan["solver"]
    if solver == "closed":
        return constant_model_spectrum(m.params["c"], args.theta, m.hbar)
    if solver == "bessel":
        return _bessel(plan["sym"], args.theta, args.emax)
    kw = {} if args.tol is None else {"tol": args.tol}
    return shoot_spectrum(m, args.theta, args.emax, **kw)


def cmd_spectrum(args, plan):
    spec = _spectrum(args, plan)
    if spec.continuum is None:
        E, R = spec.eigenvalues, spec.residuals
        sel = np.abs(E) <= args.emax
        spec = SpectrumResult(spec.extension, E[sel], R[sel], spec.hbar, spec.zero_mode,
                              spec.continuum, spec.solver, spec.model, spec.flags)
    meta = _model_meta(plan["model"])
    meta.update({"theta": spec.theta, "solver": spec.solver, "levels": len(spec.eigenvalues)})
    if spec.zero_mode is not None:
        meta["zero_mode_norm"] = spec.zero_mode
    if spec.continuum is not None:
        meta["continuum"] = " ".join(fmt(c) for c in spec.continuum)
    if spec.flags:
        meta["flags"] = " ".join(spec.flags)
    rows = [(k, e, r) for k, (e, r) in enumerate(zip(spec.eigenvalues, spec.residuals))]
    return Table("spectrum", ["index", "E", "residual"], rows, meta)


def cmd_scatter(args, plan):
    m = plan["model"]
    c, hbar = m.params["c"], m.hbar
    rows = []
    for E in plan["E"]:
        s = constant_model_scattering(E, c, args.theta, hbar)
        rows.append((E, s.eta, s.u, s.k_plus, s.k_minus, s.A.real, s.A.imag, s.B.real, s.B.imag,
                     s.normalisation()))
    meta = _model_meta(m)
    meta["theta"] = args.theta
    bs = bound_state(c, args.theta, hbar)
    if bs is None:
        meta["bound_state"] = "none"
    else:
        meta.update({"bound_state_E0": bs.E0, "bound_state_mean_x": bs.mean_x})
    cols = ["E", "eta", "u", "k_plus", "k_minus", "A_re", "A_im", "B_re", "B_im", "norm"]
    return Table("scatter", cols, rows, meta)


def cmd_zero_mode(args, plan):
    m = plan["model"]
    zm = zero_mode(m, args.theta)
    norm = zm.norm if zm.norm is not None else math.nan
    meta = _model_meta(m)
    meta["theta"] = args.theta
    return Table("zero-mode", ["present", "norm", "divergent"],
                 [(bool(zm.present), norm, bool(zm.divergent))], meta)


def cmd_compare(args, plan):
    sym = plan["model"]
    spec = _bessel(sym, args.theta, args.emax)
    ident = Identification(alpha=sym.params["alpha"], hbar=sym.hbar, z0=sym.params["h"])
    rep = compare_spectrum(spec, plan.get("zeros"), ident)
    cols = ["n", "E", "t", "smooth_count", "offset"]
    if rep.nearest_zero is not None:
        cols.append("nearest_zero_distance")
    meta = _model_meta(sym)
    meta.update({"theta": args.theta, "target_offset": 11 / 8})
    if args.window:
        off = rep.window(*args.window)
        meta["window"] = " ".join(fmt(v) for v in args.window)
    else:
        off = rep.offset
    if off.size:
        meta.update({"mean_offset": float(off.mean()), "min_offset": float(off.min()),
                     "max_offset": float(off.max())})
    return Table("compare", cols, [tuple(r) for r in rep.rows()], meta)


COMMANDS = {"catalog": cmd_catalog, "curvature": cmd_curvature, "trajectory": cmd_trajectory,
            "period": cmd_period, "count": cmd_count, "invert": cmd_invert,
            "spectrum": cmd_spectrum, "scatter": cmd_scatter, "zero-mode": cmd_zero_mode,
            "compare": cmd_compare}


# -- output -------------------------------------------------------------------------------

def _json_value(v):
    if isinstance(v, (bool, np.bool_)):
        return bool(v)
    if isinstance(v, (int, np.integer)):
        return int(v)
    if isinstance(v, str):
        return v
    v = float(v)
    return v if math.isfinite(v) else fmt(v)


def load_schema():
    text = resources.files("xpmodels").joinpath("schemas/output.schema.json").read_text()
    return json.loads(text)


def render(table, args):
    if args.format == "json":
        import jsonschema

        doc = {"command": table.command, "version": __version__,
               "columns": list(table.columns),
               "rows": [[_json_value(v) for v in r] for r in table.rows],
               "meta": {k: _json_value(v) for k, v in table.meta.items()}}
        jsonschema.validate(doc, load_schema())
        return json.dumps(doc, indent=2, sort_keys=True) + "\n"
    if args.plot_data:
        text = write_csv(table.rows, table.columns, table.meta, delimiter=" ")
        for name, cols, rows in table.blocks:
            # two blank lines separate gnuplot data sets (select with `index`)
            text += "\n\n# block: " + name + "\n" + write_csv(rows, cols, delimiter=" ")
        return text
    return write_csv(table.rows, table.columns, table.meta)


def run(argv=None):
    """Run the CLI; returns the exit code."""
    argv = sys.argv[1:] if argv is None else argv
    try:
        parser, args = parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        plan = validate(args)
    except (_Usage, XpError) as exc:
        parser.print_usage(sys.stderr)
        print(f"xp {args.command}: error: {exc}", file=sys.stderr)
        return 2
    try:
        table = COMMANDS[args.command](args, plan)
    except UsageError as exc:
        print(f"xp {args.command}: error: {exc}", file=sys.stderr)
        return 2
    except (XpError, ArithmeticError) as exc:
        kind = "no convergence" if isinstance(exc, ConvergenceError) else "numeric failure"
        print(f"xp {args.command}: {kind}: {exc}", file=sys.stderr)
        return 1
    text = render(table, args)
    if args.out:
        try:
            Path(args.out).write_text(text)
        except OSError as exc:
            print(f"xp: error: cannot write {args.out}: {exc}", file=sys.stderr)
            return 2
    else:
        sys.stdout.write(text)
    return 0


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
