"""Named experiment presets for the built-in reference studies.

Each preset pins a full setting (p, n, vectors, covariance, model,
weight) and writes density tables, spike/sweep tables and comparison
documents into an output directory.  Presets are plain config dicts
plus a driver, so every one of them round-trips through the standard
config parser.
"""
from __future__ import annotations

import os

import numpy as np

from ._version import __version__ as _version
from .bulk import default_scan_range, density, support
from .config import build_spec, spec_echo
from .empirical import compare, run_trial
from .errors import ConfigError
from .report import emit_document, emit_table
from .spikes import find_spikes

__all__ = ["PRESETS", "preset_config", "run_preset"]


def _base(p, n, **kw):
    cfg = {"p": p, "n": n, "seed": 1234}
    cfg.update(kw)
    return cfg


# Reference settings; vectors are patterns resolved from the preset seed.
PRESETS = {
    # one covariance bulk, all three signal vectors random of unit norm
    "fig1a": _base(800, 6000, mu="gaussian_norm(1.0)", w_star="mu", w="mu",
                   model="logistic", loss="logistic"),
    # evaluation vector independent of the teacher/mean direction
    "fig1b": _base(800, 6000, mu="gaussian_norm(1.0)", w_star="mu",
                   w="gaussian_norm(1.0)", model="logistic", loss="logistic"),
    # phase retrieval Hessian with a strong teacher
    "fig1cd": _base(800, 6000, w_star="pm_block(2.0)", w="gaussian_norm(1.0)",
                    model="phase_retrieval", loss="phase_square"),
    # logistic vs exponential loss on the same data (run emits both)
    "fig2": _base(800, 6000, w="pm_block(1.0)", model="logistic",
                  loss="logistic"),
    # single- vs multi-bulk covariance (run emits both)
    "fig3": _base(800, 6000, mu="gaussian_norm(1.0)", w="mu", model="logistic",
                  loss="logistic", cov={"diag_blocks": [[1.0, 400], [2.0, 400]]}),
    # universality: three feature laws at heavier aspect ratio
    "fig4": _base(800, 1200, mu="gaussian_norm(1.0)", w="mu", model="logistic",
                  loss="logistic"),
    # pure signal spike sweep over |mu|^2
    "fig5": _base(512, 2048, mu="pm_block(0.894427190999915878)",
                  model="logistic", loss="logistic"),
    # pure model spike sweep over |w|
    "fig6": _base(800, 8000, w="pm_block(2.01)", model="logistic",
                  loss="logistic"),
    # phase retrieval with trimming preprocessing, w = sqrt(2/3) w*
    "fig7": _base(800, 4000, w_star="pm_block(0.76)",
                  w="pm_block(%.17g)" % (0.76 * np.sqrt(2.0 / 3.0)),
                  model="phase_retrieval", weight="trim"),
}

_FIG5_RHO2 = [0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0,
              1.1, 1.2, 1.3, 1.4, 1.5]
_FIG6_WNORM = np.linspace(0.1, 8.0, 30)
_FIG7_WNORM = np.linspace(0.1, 2.0, 30)


def preset_config(name):
    try:
        return dict(PRESETS[name])
    except KeyError:
        raise ConfigError(f"unknown preset {name!r}; have {sorted(PRESETS)}")


def _theory(spec, order=None):
    lo, hi = default_scan_range(spec, order)
    grid = np.linspace(lo, hi, 400)
    curve = density(spec, grid, order=order)
    sup = support(spec, (lo, hi), order=order, curve=curve)
    spikes = find_spikes(spec, sup, order=order) if sup.intervals else []
    return curve, sup, spikes


def _write_theory(out, stem, spec, seed, curve, sup, spikes, trials,
                  dist="gaussian"):
    files = []
    files.append(emit_table(os.path.join(out, f"{stem}_density.csv"),
                            ["x", "density"],
                            zip(curve.grid, np.nan_to_num(curve.density))))
    results = {
        "support": {"intervals": sup.intervals, "bulk_count": sup.bulk_count,
                    "bounded": sup.bounded},
        "spikes": [{"lambda": s.location, "side": s.side, "gap": s.gap,
                    "cos2": _cos2(spec, s)} for s in spikes],
    }
    seeds = []
    if trials:
        rep = compare(spec, curve, spikes, trials, base_seed=seed, dist=dist,
                      support_report=sup)
        seeds = rep.seeds
        results["comparison"] = {
            "density_l1": rep.density_l1,
            "spike_errors": rep.spike_errors,
            "alignment_errors": rep.alignment_errors,
            "trials": rep.trials,
        }
    files.append(emit_document(os.path.join(out, f"{stem}_report.json"),
                               spec_echo(spec, seed), results, seeds, _version))
    return files


def _cos2(spec, spike):
    out = []
    for k in range(3):
        nrm2 = spec.V[:, k] @ spec.V[:, k]
        out.append(float(spike.alignment[k, k] / nrm2) if nrm2 > 0 else 0.0)
    return out


def _sweep_rows(cfg, values, rescale, trials, dist="gaussian", order=None):
    rows = []
    for val in values:
        spec, seed = build_spec(rescale(dict(cfg), val))
        curve, sup, spikes = _theory(spec, order)
        spike = spikes[0] if spikes else None
        gap = spike.gap if spike else 0.0
        cos2 = max(_cos2(spec, spike)) if spike else 0.0
        row = [val, spike.location if spike else np.nan, gap, cos2]
        if trials:
            rep = compare(spec, curve, spikes if spikes else [], trials,
                          base_seed=seed, dist=dist, support_report=sup)
            if rep.spike_errors:
                row += [rep.spike_errors[0][0], rep.alignment_errors[0][0]]
            else:
                row += [np.nan, np.nan]
        rows.append(row)
    return rows


def run_preset(name, out, trials=None, order=None):
    """Run one preset; returns the list of files written."""
    os.makedirs(out, exist_ok=True)
    cfg = preset_config(name)
    files = []

    if name in ("fig1a", "fig1b", "fig1cd"):
        spec, seed = build_spec(cfg)
        curve, sup, spikes = _theory(spec, order)
        files += _write_theory(out, name, spec, seed, curve, sup, spikes,
                               trials if trials is not None else 1)
    elif name == "fig2":
        for loss in ("logistic", "exponential"):
            c = dict(cfg, loss=loss)
            spec, seed = build_spec(c)
            lo, hi = default_scan_range(spec, order)
            curve = density(spec, np.linspace(lo, hi, 400), order=order)
            sup = support(spec, (lo, hi), order=order, curve=curve)
            files += _write_theory(out, f"fig2_{loss}", spec, seed, curve, sup,
                                   [], trials if trials is not None else 1)
    elif name == "fig3":
        for tag, top in (("two", 2.0), ("four", 4.0)):
            c = dict(cfg, cov={"diag_blocks": [[1.0, 400], [top, 400]]})
            spec, seed = build_spec(c)
            curve, sup, spikes = _theory(spec, order)
            files += _write_theory(out, f"fig3_{tag}", spec, seed, curve, sup,
                                   spikes, trials if trials is not None else 1)
    elif name == "fig4":
        spec, seed = build_spec(cfg)
        curve, sup, spikes = _theory(spec, order)
        files += _write_theory(out, "fig4_theory", spec, seed, curve, sup,
                               spikes, 0)
        n_seeds = trials if trials is not None else 10
        for dist in ("gaussian", "rademacher", "student_t:7"):
            pooled = np.concatenate(
                [run_trial(spec, dist, seed + k).eigenvalues
                 for k in range(n_seeds)])
            tag = dist.replace(":", "")
            files.append(emit_table(os.path.join(out, f"fig4_{tag}.csv"),
                                    ["eigenvalue"], [[v] for v in pooled]))
    elif name == "fig5":
        spec, seed = build_spec(dict(cfg))
        curve, sup, spikes = _theory(spec, order)
        files += _write_theory(out, "fig5", spec, seed, curve, sup, spikes, 0)

        def rescale(c, rho2):
            c["mu"] = "pm_block(%.17g)" % np.sqrt(rho2)
            return c

        rows = _sweep_rows(cfg, _FIG5_RHO2, rescale,
                           trials if trials is not None else 50, order=order)
        files.append(emit_table(
            os.path.join(out, "fig5_sweep.csv"),
            ["mu_norm2", "lambda", "gap", "alignment",
             "empirical_lambda", "empirical_alignment"], rows))
    elif name in ("fig6", "fig7"):
        values = _FIG6_WNORM if name == "fig6" else _FIG7_WNORM

        def rescale(c, val):
            if name == "fig6":
                c["w"] = "pm_block(%.17g)" % val
            else:
                c["w_star"] = "pm_block(%.17g)" % val
                c["w"] = "pm_block(%.17g)" % (val * np.sqrt(2.0 / 3.0))
            return c

        rows = _sweep_rows(cfg, values, rescale,
                           trials if trials is not None else 50, order=order)
        files.append(emit_table(
            os.path.join(out, f"{name}_sweep.csv"),
            ["norm", "lambda", "gap", "alignment",
             "empirical_lambda", "empirical_alignment"], rows))
    else:
        raise ConfigError(f"unknown preset {name!r}")
    return files
