"""Response models, loss curvatures and preprocessing weights.

The empirical Hessian H = (1/n) X D X^T carries diagonal weights
D_ii = g(y_i, h_i) with h_i = w^T x_i.  For a twice-differentiable loss
the weight is the curvature g = d^2 l(y, h) / dh^2; for spectral
preprocessing it is a bounded map f(y) that ignores h.  Both routes go
through :class:`WeightFn`, so the "modified matrix" used for spectral
initialization is the same code path as the true Hessian.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .errors import DomainError

__all__ = [
    "ResponseModel",
    "WeightFn",
    "GSupportClass",
    "curvature",
    "loss_value",
    "sample_response",
    "preprocess_trim",
    "classify_g_support",
]

_LOSSES = ("logistic", "exponential", "square", "phase_square")


@dataclass(frozen=True)
class ResponseModel:
    """Conditional law of the response y given the teacher projection h*.

    kind is one of "logistic", "phase_retrieval", "noisy_factor",
    "single_layer_nn".  The factor model needs a scalar ``link`` and a
    noise level ``sigma``; the single-layer network needs ``activation``.
    """

    kind: str
    link: Optional[Callable] = None
    sigma: float = 0.0
    activation: Optional[Callable] = None

    def __post_init__(self):
        if self.kind not in ("logistic", "phase_retrieval", "noisy_factor",
                             "single_layer_nn"):
            raise DomainError(f"unknown response model kind: {self.kind!r}")
        if self.kind == "noisy_factor":
            if self.link is None:
                raise DomainError("noisy_factor requires a link function")
            if self.sigma < 0:
                raise DomainError("noise std must be nonnegative")
        if self.kind == "single_layer_nn" and self.activation is None:
            raise DomainError("single_layer_nn requires an activation")

    @staticmethod
    def logistic():
        return ResponseModel("logistic")

    @staticmethod
    def phase_retrieval():
        return ResponseModel("phase_retrieval")

    @staticmethod
    def noisy_factor(link=None, sigma=0.0):
        return ResponseModel("noisy_factor", link=link or (lambda t: t),
                             sigma=sigma)

    @staticmethod
    def single_layer_nn(activation=np.tanh):
        return ResponseModel("single_layer_nn", activation=activation)


@dataclass(frozen=True)
class WeightFn:
    """Diagonal weight g(y, h): a loss curvature or a preprocessing map.

    ``kind`` is "loss_curvature" (with ``loss`` naming one of the four
    built-in losses) or "preprocess" (with ``map`` applied to y only).
    ``bounds`` optionally declares the exact range of a preprocessing
    map so support classification can stay analytic.
    """

    kind: str
    loss: Optional[str] = None
    map: Optional[Callable] = None
    bounds: Optional[tuple] = None

    def __post_init__(self):
        if self.kind == "loss_curvature":
            if self.loss not in _LOSSES:
                raise DomainError(f"unknown loss: {self.loss!r}")
        elif self.kind == "preprocess":
            if self.map is None:
                raise DomainError("preprocess weight requires a map")
        else:
            raise DomainError(f"unknown weight kind: {self.kind!r}")

    @staticmethod
    def loss_curvature(loss):
        return WeightFn("loss_curvature", loss=loss)

    @staticmethod
    def preprocess(map, bounds=None):
        return WeightFn("preprocess", map=map, bounds=bounds)

    @staticmethod
    def trim(c):
        """Trimming map f(t) = (max(t,0) - 1)/(max(t,0) + sqrt(2/c) - 1)."""
        if c <= 0:
            raise DomainError("dimension ratio c must be positive")
        shift = np.sqrt(2.0 / c) - 1.0
        bounds = (-1.0 / shift, 1.0) if shift > 0 else None
        return WeightFn("preprocess", map=lambda t: preprocess_trim(t, c),
                        bounds=bounds)


@dataclass(frozen=True)
class GSupportClass:
    bounded: bool
    upper_bound: Optional[float]
    lower_bound: Optional[float]
    rationale: str

    def __post_init__(self):
        if self.bounded:
            assert self.upper_bound is not None and self.lower_bound is not None
            assert self.lower_bound <= self.upper_bound


def _check_labels(y):
    if not np.all(np.abs(np.abs(np.asarray(y, dtype=float)) - 1.0) < 1e-12):
        raise DomainError("binary losses require labels in {-1, +1}")


def curvature(weight, y, h):
    """Evaluate the weight g(y, h).  Vectorized over y and h."""
    y = np.asarray(y, dtype=float)
    h = np.asarray(h, dtype=float)
    if not (np.all(np.isfinite(y)) and np.all(np.isfinite(h))):
        raise DomainError("non-finite y or h")
    if weight.kind == "preprocess":
        out = np.asarray(weight.map(y), dtype=float)
        return out[()] if out.ndim == 0 else out

    loss = weight.loss
    if loss == "logistic":
        _check_labels(y)
        # e^{yh}/(1+e^{yh})^2, evaluated through e^{-|yh|} so neither
        # factor overflows for large |h|
        q = np.exp(-np.abs(y * h))
        out = q / (1.0 + q) ** 2
    elif loss == "exponential":
        _check_labels(y)
        out = np.exp(-y * h)
    elif loss == "square":
        out = np.ones(np.broadcast(y, h).shape)
    else:  # phase_square: l = (y - h^2)^2 / 4
        out = 3.0 * h ** 2 - y
    out = np.asarray(out)
    return out[()] if out.ndim == 0 else out


def loss_value(loss, y, h):
    """The loss l(y, h) itself; used to cross-check curvatures."""
    y = np.asarray(y, dtype=float)
    h = np.asarray(h, dtype=float)
    if loss == "logistic":
        return np.logaddexp(0.0, -y * h)
    if loss == "exponential":
        return np.exp(-y * h)
    if loss == "square":
        return 0.5 * (y - h) ** 2
    if loss == "phase_square":
        return 0.25 * (y - h ** 2) ** 2
    raise DomainError(f"unknown loss: {loss!r}")


def sample_response(model, h_star, rng):
    """Draw y ~ f(y | h*) for each entry of h_star."""
    h_star = np.asarray(h_star, dtype=float)
    if not np.all(np.isfinite(h_star)):
        raise DomainError("non-finite h_star")
    if model.kind == "logistic":
        prob = 1.0 / (1.0 + np.exp(-h_star))
        y = np.where(rng.random(h_star.shape) < prob, 1.0, -1.0)
    elif model.kind == "phase_retrieval":
        y = h_star ** 2
    elif model.kind == "noisy_factor":
        y = np.asarray(model.link(h_star), dtype=float)
        if model.sigma > 0:
            y = y + model.sigma * rng.standard_normal(h_star.shape)
    else:  # single_layer_nn
        y = np.asarray(model.activation(h_star), dtype=float)
    y = np.asarray(y)
    return y[()] if y.ndim == 0 else y


def preprocess_trim(t, c):
    """Trimming function (max(t,0) - 1)/(max(t,0) + sqrt(2/c) - 1)."""
    if c <= 0:
        raise DomainError("dimension ratio c must be positive")
    tp = np.maximum(np.asarray(t, dtype=float), 0.0)
    out = (tp - 1.0) / (tp + np.sqrt(2.0 / c) - 1.0)
    out = np.asarray(out)
    return out[()] if out.ndim == 0 else out


def _sampled_tail_class(spec, rng=None):
    """Monte Carlo fallback: crude boundedness guess from sampled g."""
    rng = rng or np.random.Generator(np.random.Philox(20240917))
    law = spec.projection_law()
    # sample (h_star, h) directly from the 2-D law
    vals, vecs = np.linalg.eigh(law.cov)
    vals = np.clip(vals, 0.0, None)
    n = 200_000
    xi = rng.standard_normal((2, n))
    hh = law.mean[:, None] + (vecs * np.sqrt(vals)) @ xi
    y = sample_response(spec.model, hh[0], rng)
    g = curvature(spec.weight, y, hh[1])
    g = np.abs(g)
    q50, q999 = np.quantile(g, [0.5, 0.999])
    gmax = g.max()
    bounded = gmax - q999 < 0.5 * (q999 - q50 + 1e-12)
    if bounded:
        return GSupportClass(True, float(g.max()), float(np.min(g)), "sampled")
    return GSupportClass(False, None, None, "sampled")


def classify_g_support(spec):
    """Classify the law of g as bounded or unbounded.

    Analytic for the built-in (model, loss) pairs; anything else falls
    back to a Monte Carlo tail estimate (rationale "sampled").
    """
    w = spec.weight
    law = spec.projection_law()
    var_h = law.cov[1, 1]
    var_hs = law.cov[0, 0]
    if w.kind == "preprocess":
        if w.bounds is not None:
            lo, hi = w.bounds
            return GSupportClass(True, float(hi), float(lo),
                                 "bounded preprocessing map")
        return _sampled_tail_class(spec)
    loss = w.loss
    if loss == "logistic":
        return GSupportClass(True, 0.25, 0.0, "logistic curvature <= 1/4")
    if loss == "square":
        return GSupportClass(True, 1.0, 1.0, "constant curvature")
    if loss == "exponential":
        if var_h > 0:
            return GSupportClass(False, None, None,
                                 "log-normal curvature e^{-yh}, Gaussian h")
        mh = law.mean[1]
        vals = (np.exp(-mh), np.exp(mh))
        return GSupportClass(True, float(max(vals)), float(min(vals)),
                             "degenerate h: two-point curvature law")
    # phase_square: g = 3h^2 - y
    if var_h > 0 or var_hs > 0:
        return GSupportClass(False, None, None,
                             "chi-square-type curvature 3h^2 - y, Gaussian projections")
    h0 = law.mean[1]
    y0 = sample_response(spec.model, law.mean[0],
                         np.random.Generator(np.random.Philox(0)))
    g0 = float(3.0 * h0 ** 2 - np.asarray(y0))
    return GSupportClass(True, g0, g0, "degenerate projections: constant curvature")
