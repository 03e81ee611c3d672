"""Command-line orchestration: experiment configs, sweeps, CSV/SVG reports.

Exit codes: 0 success, 2 invalid configuration, 3 numerical non-convergence,
4 divergent criterion verdict, 5 inconclusive criterion verdict.
"""

from __future__ import annotations

import argparse
import csv
import math
import os
import sys

try:
    import tomllib
except ModuleNotFoundError:  # python 3.10
    import tomli as tomllib

import numpy as np

from . import body as body_mod
from . import criterion as criterion_mod
from . import curve as curve_mod
from . import grid as grid_mod
from . import oscint as oscint_mod
from . import render
from .errors import CapLabError, ConfigError, EstimationError, NonConvergenceError

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERIC = 3
EXIT_DIVERGENT = 4
EXIT_INCONCLUSIVE = 5

_COMMON_KEYS = {"command", "out_dir", "seed", "svg", "body", "curve"}
_COMMAND_KEYS = {
    "curve-info": {"wktkn_eps", "k_max"},
    "caps": {"angles", "deltas"},
    "ft": {"angles", "r_min", "r_max", "r_per_decade"},
    "criterion": {"q", "delta_min", "delta0", "directions"},
    "partition": {"k"},
    "vdc": {"k_max", "xi_per_band"},
    "grid-max": {"n", "q", "k_min", "k_max", "ensemble"},
    "strip": {"n", "q", "eta_cells", "k_span", "height", "aperture"},
    "squarefn": {"n", "p", "ensemble", "band"},
    "hyperbolic": {"n", "n_max", "eta0_scale"},
}

_CURVE_FLAG_KEYS = ("m", "a", "iters", "c", "lam", "domain_end")


def _fmt(x):
    if isinstance(x, (float, np.floating)):
        return repr(float(x))
    return str(x)


def write_csv(path, header, rows):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)  # RFC 4180 line endings
        w.writerow(header)
        for row in rows:
            w.writerow([_fmt(x) for x in row])


def _load_config(path):
    try:
        with open(path, "rb") as fh:
            return tomllib.load(fh)
    except FileNotFoundError as exc:
        raise ConfigError(f"config file not found: {path}") from exc
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"malformed TOML in {path}: {exc}") from exc


def _curve_table_from_flags(args):
    table = {"family": args.curve}
    if args.curve == "power":
        if args.m is None:
            raise ConfigError("power curve needs --m")
        table["m"] = args.m
    elif args.curve == "expflat":
        if args.a is None:
            raise ConfigError("expflat curve needs --a")
        table["a"] = args.a
    elif args.curve == "iterexpflat":
        if None in (args.iters, args.c, args.lam):
            raise ConfigError("iterexpflat needs --iters, --c and --lam")
        table.update(n=int(args.iters), c=args.c, lam=args.lam)
    else:
        raise ConfigError(f"unknown curve family {args.curve!r}")
    if args.domain_end is not None:
        table["domain_end"] = args.domain_end
    return table


def _body_table_from_flags(args):
    name = args.body
    if name == "circle":
        table = {"kind": "circle"}
        if args.radius is not None:
            table["radius"] = args.radius
        return table
    if name == "ellipse":
        if None in (args.semi_x, args.semi_y):
            raise ConfigError("ellipse needs --semi-x and --semi-y")
        return {"kind": "ellipse", "semi_x": args.semi_x, "semi_y": args.semi_y}
    if name in ("power", "expflat", "iterexpflat"):
        args2 = argparse.Namespace(**vars(args))
        args2.curve = name
        table = {"kind": "flat_spot", "curve": _curve_table_from_flags(args2)}
        if args.scale is not None:
            table["scale"] = args.scale
        return table
    raise ConfigError(f"unknown body {name!r}")


def _resolve(cfg, args):
    """Merge config-file values and flags (flags win where given)."""
    command = args.command
    allowed = _COMMON_KEYS | _COMMAND_KEYS[command]
    unknown = set(cfg) - allowed
    if unknown:
        raise ConfigError(f"unknown config keys for {command}: {sorted(unknown)}")
    merged = dict(cfg)
    merged["command"] = command
    for key in _COMMAND_KEYS[command] | {"out_dir", "seed", "svg"}:
        val = getattr(args, key.replace("-", "_"), None)
        if val is not None:
            merged[key] = val
    if getattr(args, "body", None) is not None:
        merged["body"] = _body_table_from_flags(args)
    if getattr(args, "curve", None) is not None:
        merged["curve"] = _curve_table_from_flags(args)
    merged.setdefault("out_dir", ".")
    merged.setdefault("seed", 0)
    merged.setdefault("svg", False)
    return merged


def _prepare_out_dir(cfg):
    out = cfg["out_dir"]
    try:
        os.makedirs(out, exist_ok=True)
        probe = os.path.join(out, ".caplab-writable")
        with open(probe, "w") as fh:
            fh.write("ok")
        os.remove(probe)
    except OSError as exc:
        raise ConfigError(f"output directory {out!r} is not writable: {exc}") from exc
    return out


def _need_body(cfg):
    if "body" not in cfg:
        raise ConfigError("this command needs a body (--body or [body] table)")
    try:
        return body_mod.body_from_table(cfg["body"])
    except CapLabError as exc:
        raise ConfigError(str(exc)) from exc


def _need_curve(cfg):
    if "curve" not in cfg:
        raise ConfigError("this command needs a curve (--curve or [curve] table)")
    try:
        return curve_mod.curve_from_table(cfg["curve"])
    except CapLabError as exc:
        raise ConfigError(str(exc)) from exc


# -- command implementations -----------------------------------------------------


def cmd_curve_info(cfg, out):
    curve = _need_curve(cfg)
    rows = [
        ("domain_end", curve.domain_end),
        ("gamma_T", curve.eval(curve.domain_end)),
        ("gamma2_T", curve.eval(curve.domain_end, 2)),
        ("k_floor", curve.k_floor),
    ]
    if curve.has_third_derivative:
        rows.append(("ratio_limit_b", curve.ratio_limit()))
    write_csv(os.path.join(out, "curve_info.csv"), ["quantity", "value"], rows)
    if cfg.get("wktkn_eps") is not None:
        scan = curve_mod.partition_weight_scan(
            curve, int(cfg.get("k_max", 30)), float(cfg["wktkn_eps"])
        )
        write_csv(
            os.path.join(out, "wktkn.csv"),
            ["k", "wktkn_sup"],
            list(zip(scan.ks, scan.per_k)),
        )
        print(f"wktkn max {scan.max_value!r} trend_slope {scan.trend_slope!r}")
    print(f"curve-info ok: {curve!r}")
    return EXIT_OK


def cmd_caps(cfg, out):
    body = _need_body(cfg)
    n_angles = int(cfg.get("angles", 360))
    deltas = sorted(float(d) for d in cfg.get("deltas", [1e-6, 1e-4, 1e-2]))
    rows = []
    caps_for_svg = []
    for i in range(n_angles):
        ang = 2 * math.pi * i / n_angles
        theta = (math.cos(ang), math.sin(ang))
        lams = body.cap_profile(theta, np.array(deltas))
        rows.extend((ang, d, lam) for d, lam in zip(deltas, lams))
    write_csv(
        os.path.join(out, "caps.csv"),
        ["theta_angle", "delta", "lambda_theta_delta"],
        rows,
    )
    if cfg["svg"]:
        for ang in (0.0, math.pi / 2):
            caps_for_svg.append(body.cap((math.cos(ang), math.sin(ang)), deltas[-1]))
        render.body_with_caps_svg(body, caps_for_svg, os.path.join(out, "caps.svg"))
    print(f"caps ok: {n_angles} directions x {len(deltas)} deltas")
    return EXIT_OK


def cmd_ft(cfg, out):
    body = _need_body(cfg)
    n_angles = int(cfg.get("angles", 360))
    r_min = float(cfg.get("r_min", 10.0))
    r_max = float(cfg.get("r_max", 1e4))
    per_dec = int(cfg.get("r_per_decade", 10))
    count = max(2, int(round(per_dec * math.log10(r_max / r_min))) + 1)
    radii = np.geomspace(r_min, r_max, count)
    sweep = oscint_mod.ft_ratio_sweep(body, n_angles, radii)
    rows = []
    for i, ang in enumerate(sweep.angles):
        for j, r in enumerate(sweep.radii):
            rows.append(
                (ang, r, sweep.ft_abs[i, j], sweep.cap_lengths[i, j],
                 sweep.ratios[i, j])
            )
    write_csv(
        os.path.join(out, "ft_ratio.csv"),
        ["theta_angle", "R", "sigma_hat_abs", "lambda_theta_delta", "ft_cap_ratio"],
        rows,
    )
    print(
        f"ft sup_ratio {sweep.sup_ratio!r} at theta {sweep.arg_theta!r} "
        f"R {sweep.arg_radius!r}"
    )
    return EXIT_OK


def cmd_criterion(cfg, out):
    body = _need_body(cfg)
    report = criterion_mod.classify(
        body,
        float(cfg.get("q", 2.0)),
        delta0=cfg.get("delta0"),
        delta_min=float(cfg.get("delta_min", 1e-12)),
        n_directions=int(cfg.get("directions", 720)),
    )
    write_csv(
        os.path.join(out, "criterion.csv"),
        ["theta_angle", "cap_integral", "partial_slope", "integrand_exponent", "verdict"],
        [
            (d.angle, d.integral, d.partial_slope, d.integrand_exponent, d.verdict)
            for d in report.directions
        ],
    )
    print(f"verdict: {report.verdict} (q={report.q}, sup integral {report.sup_integral!r})")
    if report.verdict == criterion_mod.DIVERGENT:
        return EXIT_DIVERGENT
    if report.verdict == criterion_mod.INCONCLUSIVE:
        return EXIT_INCONCLUSIVE
    return EXIT_OK


def cmd_partition(cfg, out):
    curve = _need_curve(cfg)
    if "k" not in cfg:
        raise ConfigError("partition needs k")
    table = curve_mod.partition(curve, int(cfg["k"]))
    write_csv(os.path.join(out, "partition.csv"), ["k", "n", "t", "rho"], table.rows())
    print(f"partition k={table.k} nk={table.nk} t0={table.t0!r}")
    return EXIT_OK


def cmd_vdc(cfg, out):
    curve = _need_curve(cfg)
    scan = oscint_mod.multiplier_decay_scan(
        curve, int(cfg.get("k_max", 12)),
        xi_per_band=int(cfg.get("xi_per_band", 12)),
    )
    write_csv(
        os.path.join(out, "vdc.csv"),
        ["k", "n", "vdc_sup", "argmax_xi1", "argmax_xi2"],
        [(k, n, sup, xi[0], xi[1]) for k, n, sup, xi in scan.rows],
    )
    print(f"vdc max {scan.max_value!r} trend_slope {scan.trend_slope!r}")
    return EXIT_OK


def cmd_grid_max(cfg, out):
    body = _need_body(cfg)
    est = grid_mod.opnorm_lower(
        body,
        float(cfg.get("q", 2.0)),
        n=int(cfg.get("n", 256)),
        k_min=cfg.get("k_min"),
        k_max=cfg.get("k_max"),
        seed=int(cfg["seed"]),
        n_random=int(cfg.get("ensemble", 12)),
    )
    write_csv(
        os.path.join(out, "gridmax.csv"),
        ["opnorm_lower", "best_input", "k_min", "k_max"],
        [(est.value, est.best_input, est.ks[0], est.ks[1])],
    )
    if cfg["svg"]:
        f = grid_mod.random_bandlimited(int(cfg.get("n", 256)), 16, int(cfg["seed"]))
        mf = grid_mod.lacunary_max(f, body, est.ks[0], est.ks[1])
        render.heatmap_svg(mf, os.path.join(out, "gridmax.svg"))
    print(f"opnorm_lower {est.value!r} from {est.best_input}")
    return EXIT_OK


def cmd_strip(cfg, out):
    curve = _need_curve(cfg)
    spec = grid_mod.strip_spec(
        curve,
        q=float(cfg.get("q", 2.0)),
        eta_cells=int(cfg.get("eta_cells", 32)),
        n=int(cfg.get("n", 1024)),
        k_span=int(cfg.get("k_span", 4)),
        aperture=cfg.get("aperture"),
        height=float(cfg.get("height", 1.0 / 16.0)),
    )
    report = grid_mod.strip_test(curve, spec=spec, n=int(cfg.get("n", 1024)))
    write_csv(
        os.path.join(out, "strip.csv"),
        ["k", "lower_bound", "fraction_met", "partial_sum"],
        list(zip(spec.ks, report.bounds, report.fractions, report.partial_sums)),
    )
    print(f"strip k0={spec.k0} min_fraction {min(report.fractions)!r}")
    return EXIT_OK


def cmd_squarefn(cfg, out):
    if "curve" in cfg:
        geometry = _need_curve(cfg)
    else:
        geometry = _need_body(cfg)
    n = int(cfg.get("n", 256))
    band = int(cfg.get("band", n // 8))
    ps = cfg.get("p", [2.0])
    if isinstance(ps, (int, float)):
        ps = [ps]
    count = int(cfg.get("ensemble", 20))
    seed = int(cfg["seed"])
    rows = []
    for p in ps:
        best = 0.0
        for i in range(count):
            f = grid_mod.random_bandlimited(n, band, seed + i)
            _, res = grid_mod.square_function(f, geometry, p=float(p))
            best = max(best, res.ratio)
        rows.append((float(p), n, best))
        print(f"squarefn p={p} max_ratio {best!r}")
    write_csv(os.path.join(out, "squarefn.csv"), ["p", "n", "max_ratio"], rows)
    return EXIT_OK


def cmd_hyperbolic(cfg, out):
    n = int(cfg.get("n", 512))
    n_max = int(cfg.get("n_max", 8))
    report = grid_mod.hyperbolic_growth(
        n, n_max, eta0_scale=float(cfg.get("eta0_scale", 1.0)), seed=int(cfg["seed"])
    )
    write_csv(
        os.path.join(out, "hyperbolic.csv"),
        ["N", "opnorm_lower_estimate"],
        list(zip(report.ns, report.estimates)),
    )
    if cfg["svg"]:
        ns = np.array(report.ns[1:], dtype=float)
        render.line_plot_svg(
            [
                (ns, np.array(report.estimates[1:]), "estimate"),
                (ns, np.sqrt(ns) * report.estimates[-1] / math.sqrt(ns[-1]), "sqrt model"),
                (ns, np.log(ns + 1) * report.estimates[-1] / math.log(ns[-1] + 1), "log model"),
            ],
            os.path.join(out, "hyperbolic.svg"),
        )
    print(
        f"hyperbolic growth exponent {report.power_exponent!r} "
        f"(residuals: sqrt {report.sqrt_residual!r}, log {report.log_residual!r})"
    )
    return EXIT_OK


_HANDLERS = {
    "curve-info": cmd_curve_info,
    "caps": cmd_caps,
    "ft": cmd_ft,
    "criterion": cmd_criterion,
    "partition": cmd_partition,
    "vdc": cmd_vdc,
    "grid-max": cmd_grid_max,
    "strip": cmd_strip,
    "squarefn": cmd_squarefn,
    "hyperbolic": cmd_hyperbolic,
}


def _build_parser():
    parser = argparse.ArgumentParser(
        prog="caplab",
        description="Cap functions, Fourier decay, and lacunary maximal averages "
        "over convex planar curves.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name in _HANDLERS:
        p = sub.add_parser(name)
        p.add_argument("--config", help="TOML experiment config")
        p.add_argument("--out-dir", dest="out_dir")
        p.add_argument("--seed", type=int)
        p.add_argument("--svg", action="store_const", const=True, default=None)
        p.add_argument("--body", help="circle | ellipse | power | expflat | iterexpflat")
        p.add_argument("--curve", help="power | expflat | iterexpflat")
        p.add_argument("--radius", type=float)
        p.add_argument("--semi-x", dest="semi_x", type=float)
        p.add_argument("--semi-y", dest="semi_y", type=float)
        p.add_argument("--scale", type=float)
        for key in _CURVE_FLAG_KEYS:
            p.add_argument(f"--{key.replace('_', '-')}", dest=key, type=float)
        for key in sorted(_COMMAND_KEYS[name]):
            if key in ("p", "deltas"):
                p.add_argument(
                    f"--{key}", type=lambda s: [float(v) for v in s.split(",")]
                )
            elif key in ("delta_min", "delta0", "q", "eta0_scale", "height",
                         "aperture", "wktkn_eps"):
                p.add_argument(f"--{key.replace('_', '-')}", dest=key, type=float)
            else:
                p.add_argument(f"--{key.replace('_', '-')}", dest=key, type=int)
    return parser


def main(argv=None):
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = _load_config(args.config) if args.config else {}
        cfg = _resolve(cfg, args)
        out = _prepare_out_dir(cfg)
        return _HANDLERS[args.command](cfg, out)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (NonConvergenceError, EstimationError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except CapLabError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
