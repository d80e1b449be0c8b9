"""Finite-size Monte Carlo: sample the actual Hessian and compare.

One trial samples features X ~ N(mu, C) (or a universality variant),
draws responses through h*_i = w*^T x_i, evaluates the diagonal
weights d_i = g(y_i, w^T x_i) and eigendecomposes
H = (1/n) X diag(d) X^T.  Trials are reproducible: trial k uses the
counter-based Philox stream seeded with base_seed + k.
"""
from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, NumericError
from .features import sample_features
from .models import curvature, sample_response

__all__ = [
    "EmpiricalSpectrum",
    "ComparisonReport",
    "build_hessian",
    "run_trial",
    "extract_outliers",
    "measure_alignment",
    "compare",
    "worker_count",
]


@dataclass(frozen=True, eq=False)
class EmpiricalSpectrum:
    eigenvalues: np.ndarray    # ascending
    top_vec: np.ndarray
    bottom_vec: np.ndarray
    seed: int


@dataclass(frozen=True, eq=False)
class ComparisonReport:
    density_l1: float
    spike_errors: list         # (empirical, theoretical, |difference|)
    alignment_errors: list     # (empirical cos2, theoretical cos2, |difference|)
    trials: int
    seeds: list


def worker_count():
    """Worker pool size, capped by the HESSPEC_THREADS environment variable."""
    env = os.environ.get("HESSPEC_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            raise DomainError(f"HESSPEC_THREADS must be an integer, got {env!r}")
    return max(1, min(4, os.cpu_count() or 1))


def build_hessian(X, d):
    """H = (1/n) X diag(d) X^T, symmetrized against rounding skew."""
    X = np.asarray(X, dtype=float)
    d = np.asarray(d, dtype=float)
    n = X.shape[1]
    if d.shape != (n,):
        raise DomainError("weight vector length must match the sample count")
    H = (X * d) @ X.T / n
    return 0.5 * (H + H.T)


def run_trial(spec, dist, seed):
    """Sample one Hessian and return its full spectrum with extreme vectors."""
    rng = np.random.Generator(np.random.Philox(seed))
    X = sample_features(spec, dist, rng)
    h_star = spec.w_star @ X
    y = sample_response(spec.model, h_star, rng)
    h = spec.w @ X
    d = np.asarray(curvature(spec.weight, y, h), dtype=float)
    H = build_hessian(X, d)
    try:
        eigvals, eigvecs = np.linalg.eigh(H)
    except np.linalg.LinAlgError as err:
        raise NumericError(f"eigensolver failed for seed {seed}: {err}")
    return EmpiricalSpectrum(eigenvalues=eigvals, top_vec=eigvecs[:, -1],
                             bottom_vec=eigvecs[:, 0], seed=int(seed))


def extract_outliers(spectrum, support_report, edge_tol=None):
    """Eigenvalues beyond the theoretical edges by more than edge_tol.

    Default tolerance is 5/p times the overall support width, absorbing
    finite-size edge fluctuation.
    """
    intervals = support_report.intervals
    if not intervals:
        return []
    lo = min(iv[0] for iv in intervals)
    hi = max(iv[1] for iv in intervals)
    if edge_tol is None:
        p = len(spectrum.eigenvalues)
        edge_tol = (hi - lo) * 5.0 / p
    out = []
    for k, lam in enumerate(spectrum.eigenvalues):
        best = None  # (distance, side) to the nearest interval
        covered = False
        for left, right in intervals:
            if left - edge_tol <= lam <= right + edge_tol:
                covered = True
                break
            d, side = (left - lam, "left") if lam < left else (lam - right, "right")
            if best is None or d < best[0]:
                best = (d, side)
        if not covered and best is not None and best[0] > edge_tol:
            out.append((float(lam), best[1], k))
    return out


def measure_alignment(vec, target):
    """Squared cosine (target^T vec)^2 / |target|^2 for a unit vector vec."""
    target = np.asarray(target, dtype=float)
    nrm2 = target @ target
    if nrm2 == 0:
        raise DomainError("alignment target must be nonzero")
    return float((target @ np.asarray(vec, dtype=float)) ** 2 / nrm2)


def _run_trials(spec, dist, seeds):
    with ThreadPoolExecutor(max_workers=worker_count()) as pool:
        return list(pool.map(lambda s: run_trial(spec, dist, s), seeds))


def compare(spec, theory_density, spike_reports, trials, base_seed,
            dist="gaussian", support_report=None):
    """Monte Carlo discrepancy metrics against the asymptotic theory.

    density_l1 is the integrated L1 distance between the pooled
    eigenvalue histogram (Freedman-Diaconis bins) and the theory curve;
    spike and alignment errors compare per-trial extreme eigenpairs to
    each theoretical spike.
    """
    seeds = [base_seed + k for k in range(trials)]
    spectra = _run_trials(spec, dist, seeds)

    pooled = np.concatenate([s.eigenvalues for s in spectra])
    counts, edges = np.histogram(pooled, bins="fd", density=True)
    centers = 0.5 * (edges[:-1] + edges[1:])
    theory = np.interp(centers, theory_density.grid,
                       np.nan_to_num(theory_density.density, nan=0.0),
                       left=0.0, right=0.0)
    density_l1 = float(np.sum(np.abs(counts - theory) * np.diff(edges)))

    spike_errors = []
    alignment_errors = []
    for rep in spike_reports:
        # dominant structural direction of this spike
        col = int(np.argmax(np.diag(rep.alignment)))
        target = spec.V[:, col]
        theo_cos2 = rep.alignment[col, col] / (target @ target)
        emp_lams = []
        emp_cos2 = []
        for s in spectra:
            if rep.side == "left":
                emp_lams.append(s.eigenvalues[0])
                emp_cos2.append(measure_alignment(s.bottom_vec, target))
            else:
                emp_lams.append(s.eigenvalues[-1])
                emp_cos2.append(measure_alignment(s.top_vec, target))
        emp_lam = float(np.mean(emp_lams))
        emp_c = float(np.mean(emp_cos2))
        spike_errors.append((emp_lam, rep.location, abs(emp_lam - rep.location)))
        alignment_errors.append((emp_c, float(theo_cos2),
                                 abs(emp_c - theo_cos2)))
    return ComparisonReport(density_l1=density_l1, spike_errors=spike_errors,
                            alignment_errors=alignment_errors, trials=trials,
                            seeds=seeds)
