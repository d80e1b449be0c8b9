"""Command-line front end.

Subcommands:
    density   -- limiting density table on a grid
    spikes    -- support intervals plus isolated eigenvalues
    align     -- eigenvector projection matrices at each spike
    simulate  -- one finite-size trial, eigenvalues to a table
    compare   -- Monte Carlo vs. theory discrepancy report
    sweep     -- spike location/alignment along a parameter path
    preset    -- run a named built-in experiment

All subcommands read the problem from a JSON config (--config) and
write '#'-headed comma tables or JSON documents (--out, default
stdout).  Exit codes: 0 ok, 1 config error, 2 numerical failure.
"""
from __future__ import annotations

import argparse
import sys

import numpy as np

from . import __version__
from .bulk import default_scan_range, density, support
from .config import build_spec, load_config, spec_echo
from .empirical import compare, run_trial
from .errors import ConfigError, HesspecError
from .presets import PRESETS, run_preset
from .report import emit_document, emit_table
from .spikes import find_spikes

__all__ = ["main"]


def _parse_range(text):
    try:
        a, b = (float(v) for v in text.split(":"))
    except ValueError:
        raise ConfigError(f"range must be 'a:b', got {text!r}")
    if not b > a:
        raise ConfigError(f"range must satisfy a < b, got {text!r}")
    return a, b


def _parse_values(text):
    try:
        a, b, n = text.split(":")
        return np.linspace(float(a), float(b), int(n))
    except ValueError:
        raise ConfigError(f"values must be 'a:b:n', got {text!r}")


def _emit(args, kind, *payload):
    out = args.out
    if kind == "table":
        header, rows = payload
        if out:
            emit_table(out, header, rows)
        else:
            sys.stdout.write("# " + ",".join(header) + "\n")
            for row in rows:
                sys.stdout.write(",".join("%.17g" % float(v) for v in row) + "\n")
    else:
        echo, results, seeds = payload
        if out:
            emit_document(out, echo, results, seeds, __version__)
        else:
            import json
            from .report import _jsonable
            json.dump({"spec_echo": _jsonable(echo), "results": _jsonable(results),
                       "seeds": _jsonable(seeds), "tool_version": __version__},
                      sys.stdout, indent=1, sort_keys=True)
            sys.stdout.write("\n")


def _load(args):
    spec, seed = build_spec(load_config(args.config))
    if args.seed is not None:
        seed = args.seed
    return spec, seed


def _scan(spec, args):
    rng = _parse_range(args.range) if args.range else default_scan_range(
        spec, args.quad_order)
    grid = np.linspace(rng[0], rng[1], args.grid)
    curve = density(spec, grid, epsilon=args.eps, order=args.quad_order)
    sup = support(spec, rng, order=args.quad_order, curve=curve)
    return curve, sup


def _spike_results(spec, sup, spikes):
    out = []
    for s in spikes:
        cos2 = []
        for k in range(3):
            nrm2 = spec.V[:, k] @ spec.V[:, k]
            cos2.append(float(s.alignment[k, k] / nrm2) if nrm2 > 0 else 0.0)
        out.append({"lambda": s.location, "side": s.side, "gap": s.gap,
                    "cos2": cos2, "det_residual": s.det_residual})
    return {"support": {"intervals": sup.intervals,
                        "bulk_count": sup.bulk_count, "bounded": sup.bounded},
            "spikes": out}


def _cmd_density(args):
    spec, _ = _load(args)
    curve, _ = _scan(spec, args)
    _emit(args, "table", ["x", "density"],
          zip(curve.grid, np.nan_to_num(curve.density)))


def _cmd_spikes(args):
    spec, seed = _load(args)
    _, sup = _scan(spec, args)
    spikes = find_spikes(spec, sup, order=args.quad_order) if sup.intervals else []
    _emit(args, "doc", spec_echo(spec, seed), _spike_results(spec, sup, spikes), [])


def _cmd_align(args):
    spec, seed = _load(args)
    _, sup = _scan(spec, args)
    spikes = find_spikes(spec, sup, order=args.quad_order) if sup.intervals else []
    results = _spike_results(spec, sup, spikes)
    for entry, s in zip(results["spikes"], spikes):
        entry["projection"] = s.alignment.tolist()
    _emit(args, "doc", spec_echo(spec, seed), results, [])


def _cmd_simulate(args):
    spec, seed = _load(args)
    spectrum = run_trial(spec, args.dist, seed)
    _emit(args, "table", ["eigenvalue"],
          [[v] for v in spectrum.eigenvalues])


def _cmd_compare(args):
    spec, seed = _load(args)
    curve, sup = _scan(spec, args)
    spikes = find_spikes(spec, sup, order=args.quad_order) if sup.intervals else []
    rep = compare(spec, curve, spikes, args.trials, base_seed=seed,
                  dist=args.dist, support_report=sup)
    results = _spike_results(spec, sup, spikes)
    results["comparison"] = {
        "density_l1": rep.density_l1,
        "spike_errors": rep.spike_errors,
        "alignment_errors": rep.alignment_errors,
        "trials": rep.trials,
        "dist": args.dist,
    }
    _emit(args, "doc", spec_echo(spec, seed), results, rep.seeds)


_SWEEP_KEYS = {"w_norm": "w", "w_star_norm": "w_star", "mu_norm": "mu"}


def _cmd_sweep(args):
    cfg = load_config(args.config)
    key = _SWEEP_KEYS[args.param]
    rows = []
    for val in _parse_values(args.values):
        c = dict(cfg)
        c[key] = "pm_block(%.17g)" % val
        spec, _ = build_spec(c)
        curve, sup = _scan(spec, args)
        spikes = find_spikes(spec, sup, order=args.quad_order) if sup.intervals else []
        if spikes:
            s = spikes[0]
            cos2 = max(
                float(s.alignment[k, k] / (spec.V[:, k] @ spec.V[:, k]))
                if spec.V[:, k] @ spec.V[:, k] > 0 else 0.0
                for k in range(3))
            rows.append([val, s.location, s.gap, cos2])
        else:
            rows.append([val, np.nan, 0.0, 0.0])
    _emit(args, "table", [args.param, "lambda", "gap", "alignment"], rows)


def _cmd_preset(args):
    files = run_preset(args.name, args.out or ".", trials=args.trials,
                       order=args.quad_order)
    for f in files:
        sys.stdout.write(f + "\n")


def _add_scan_opts(sub):
    sub.add_argument("--range", help="scan window 'a:b' (default: automatic)")
    sub.add_argument("--grid", type=int, default=400,
                     help="number of grid points (default 400)")
    sub.add_argument("--eps", type=float, default=None,
                     help="imaginary offset for Stieltjes inversion")


def main(argv=None):
    parser = argparse.ArgumentParser(
        prog="hesspec",
        description="Asymptotic spectra of generalized linear model Hessians")
    parser.add_argument("--version", action="version", version=__version__)
    subs = parser.add_subparsers(dest="command", required=True)

    def sub(name, fn, **kw):
        s = subs.add_parser(name, **kw)
        s.set_defaults(fn=fn)
        s.add_argument("--out", help="output file (default stdout)")
        s.add_argument("--quad-order", type=int, default=None,
                       help="Gauss-Hermite order (default 96)")
        s.add_argument("--seed", type=int, default=None,
                       help="override the config seed")
        return s

    s = sub("density", _cmd_density, help="limiting density table")
    s.add_argument("--config", required=True)
    _add_scan_opts(s)

    s = sub("spikes", _cmd_spikes, help="support and isolated eigenvalues")
    s.add_argument("--config", required=True)
    _add_scan_opts(s)

    s = sub("align", _cmd_align, help="spike eigenvector projections")
    s.add_argument("--config", required=True)
    _add_scan_opts(s)

    s = sub("simulate", _cmd_simulate, help="one finite-size spectrum")
    s.add_argument("--config", required=True)
    s.add_argument("--dist", default="gaussian",
                   help="feature law: gaussian, rademacher, student_t:dof")

    s = sub("compare", _cmd_compare, help="Monte Carlo vs theory report")
    s.add_argument("--config", required=True)
    s.add_argument("--trials", type=int, default=10)
    s.add_argument("--dist", default="gaussian")
    _add_scan_opts(s)

    s = sub("sweep", _cmd_sweep, help="spike curves along a parameter path")
    s.add_argument("--config", required=True)
    s.add_argument("--param", required=True, choices=sorted(_SWEEP_KEYS))
    s.add_argument("--values", required=True, help="'a:b:n' linspace")
    _add_scan_opts(s)

    s = sub("preset", _cmd_preset, help="run a named experiment")
    s.add_argument("name", choices=sorted(PRESETS))
    s.add_argument("--trials", type=int, default=None)

    args = parser.parse_args(argv)
    try:
        args.fn(args)
    except ConfigError as err:
        sys.stderr.write(f"config error: {err}\n")
        return 1
    except HesspecError as err:
        sys.stderr.write(f"numerical failure: {err}\n")
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
