"""Feature statistics (mu, C), parameter vectors and derived geometry.

A :class:`ProblemSpec` bundles everything the asymptotic theory needs:
the Gaussian feature law N(mu, C), the teacher/evaluation vectors
(w_star, w), the response model and the diagonal weight.  Derived
objects -- the spectral measure of C, the 2-D law of (h*, h), the
signal matrix V = [mu, C w*, C w] and the Gram pseudo-inverse
(U^T U)^+ -- are cached on the spec and shared read-only.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .errors import DomainError

__all__ = [
    "ScaledIdentity",
    "Diagonal",
    "DenseSPD",
    "ProblemSpec",
    "ProjectionLaw",
    "cov_spectrum",
    "projection_law",
    "pinv2",
    "sample_features",
]


@dataclass(frozen=True)
class ScaledIdentity:
    """C = s * I."""

    scale: float = 1.0

    def __post_init__(self):
        if self.scale <= 0:
            raise DomainError("covariance scale must be positive")

    def spectrum(self, p):
        return np.array([self.scale]), np.array([1.0])

    def apply(self, v):
        return self.scale * np.asarray(v, dtype=float)

    def sqrt_apply(self, z):
        return np.sqrt(self.scale) * z

    def grouped_grams(self, V):
        return [(self.scale, V.T @ V)]


@dataclass(frozen=True, eq=False)
class Diagonal:
    """C = diag(entries)."""

    entries: np.ndarray

    def __post_init__(self):
        e = np.asarray(self.entries, dtype=float)
        if e.ndim != 1 or np.any(e <= 0):
            raise DomainError("diagonal covariance needs a positive 1-D vector")
        object.__setattr__(self, "entries", e)

    def spectrum(self, p):
        if len(self.entries) != p:
            raise DomainError("diagonal length does not match p")
        vals, counts = np.unique(self.entries, return_counts=True)
        return vals, counts / counts.sum()

    def apply(self, v):
        return self.entries * np.asarray(v, dtype=float)

    def sqrt_apply(self, z):
        return np.sqrt(self.entries)[:, None] * z if z.ndim == 2 \
            else np.sqrt(self.entries) * z

    def grouped_grams(self, V):
        out = []
        for val in np.unique(self.entries):
            rows = V[self.entries == val]
            out.append((float(val), rows.T @ rows))
        return out


@dataclass(frozen=True, eq=False)
class DenseSPD:
    """Full symmetric positive-definite covariance."""

    matrix: np.ndarray

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=float)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise DomainError("covariance matrix must be square")
        if not np.allclose(m, m.T, atol=1e-10):
            raise DomainError("covariance matrix must be symmetric")
        object.__setattr__(self, "matrix", 0.5 * (m + m.T))

    @cached_property
    def _eig(self):
        vals, vecs = np.linalg.eigh(self.matrix)
        if vals[0] <= 0:
            raise DomainError("covariance matrix must be positive definite")
        return vals, vecs

    def _grouped_indices(self):
        vals, _ = self._eig
        groups, start = [], 0
        for i in range(1, len(vals) + 1):
            if i == len(vals) or vals[i] - vals[start] > 1e-9 * max(vals[-1], 1.0):
                groups.append((float(vals[start:i].mean()), slice(start, i)))
                start = i
        return groups

    def spectrum(self, p):
        if self.matrix.shape[0] != p:
            raise DomainError("covariance size does not match p")
        groups = self._grouped_indices()
        vals = np.array([g[0] for g in groups])
        wts = np.array([g[1].stop - g[1].start for g in groups], dtype=float)
        return vals, wts / wts.sum()

    def apply(self, v):
        return self.matrix @ np.asarray(v, dtype=float)

    def sqrt_apply(self, z):
        vals, vecs = self._eig
        return vecs @ (np.sqrt(vals)[:, None] * (vecs.T @ z)) if z.ndim == 2 \
            else vecs @ (np.sqrt(vals) * (vecs.T @ z))

    def grouped_grams(self, V):
        _, vecs = self._eig
        W = vecs.T @ V
        out = []
        for val, sl in self._grouped_indices():
            rows = W[sl]
            out.append((val, rows.T @ rows))
        return out


@dataclass(frozen=True, eq=False)
class ProjectionLaw:
    """Exact 2-D Gaussian law of (h*, h) = (w*^T x, w^T x)."""

    mean: np.ndarray
    cov: np.ndarray


def cov_spectrum(cov, p):
    """Atoms (values, weights) of the spectral measure of C; weights sum to 1."""
    return cov.spectrum(p)


def pinv2(gram):
    """Moore-Penrose pseudoinverse of a small symmetric PSD matrix.

    Eigenvalues below 1e-10 times the largest are treated as exact zeros.
    """
    gram = np.asarray(gram, dtype=float)
    vals, vecs = np.linalg.eigh(0.5 * (gram + gram.T))
    tol = 1e-10 * max(vals.max(initial=0.0), 0.0)
    inv = np.where(vals > tol, 1.0 / np.where(vals > tol, vals, 1.0), 0.0)
    return (vecs * inv) @ vecs.T


@dataclass(frozen=True, eq=False)
class ProblemSpec:
    """Complete input to both the asymptotic theory and the simulation."""

    p: int
    n: int
    mu: np.ndarray
    cov: object
    w_star: np.ndarray
    w: np.ndarray
    model: object
    weight: object

    def __post_init__(self):
        if self.p <= 0 or self.n <= 0:
            raise DomainError("p and n must be positive")
        for name in ("mu", "w_star", "w"):
            v = np.asarray(getattr(self, name), dtype=float)
            if v.shape != (self.p,):
                raise DomainError(f"{name} must have length p={self.p}")
            object.__setattr__(self, name, v)

    @property
    def c(self):
        return self.p / self.n

    @cached_property
    def V(self):
        """Signal matrix [mu, C w*, C w], p x 3."""
        return np.column_stack([self.mu, self.cov.apply(self.w_star),
                                self.cov.apply(self.w)])

    @cached_property
    def gram_U(self):
        """U^T U for U = C^{1/2} [w*, w]."""
        cw_star = self.cov.apply(self.w_star)
        cw = self.cov.apply(self.w)
        return np.array([[self.w_star @ cw_star, self.w_star @ cw],
                         [self.w @ cw_star, self.w @ cw]])

    @cached_property
    def gram_U_pinv(self):
        return pinv2(self.gram_U)

    @cached_property
    def atoms(self):
        """Spectral atoms (values, weights) of C."""
        return cov_spectrum(self.cov, self.p)

    @cached_property
    def grouped_grams(self):
        """Per-eigenvalue partial Grams of V in the eigenbasis of C."""
        return self.cov.grouped_grams(self.V)

    def projection_law(self):
        return projection_law(self)

    # mutable per-instance caches (engines keyed by quadrature order)
    @cached_property
    def _cache(self):
        return {}


def projection_law(spec):
    """Gaussian law of the pair (h*, h) under x ~ N(mu, C)."""
    mean = np.array([spec.w_star @ spec.mu, spec.w @ spec.mu])
    cov = 0.5 * (spec.gram_U + spec.gram_U.T)
    return ProjectionLaw(mean=mean, cov=cov)


def _standardized_noise(dist, shape, rng):
    if dist == "gaussian":
        return rng.standard_normal(shape)
    if dist == "rademacher":
        return rng.integers(0, 2, size=shape).astype(float) * 2.0 - 1.0
    if dist.startswith("student_t"):
        dof = float(dist.split(":", 1)[1]) if ":" in dist else 7.0
        if dof <= 2:
            raise DomainError("student_t needs dof > 2")
        z = rng.standard_t(dof, size=shape)
        return z * np.sqrt((dof - 2.0) / dof)
    raise DomainError(f"unknown feature distribution: {dist!r}")


def sample_features(spec, dist, rng):
    """Sample the p x n feature matrix X with columns mu + C^{1/2} z_i."""
    Z = _standardized_noise(dist, (spec.p, spec.n), rng)
    return spec.mu[:, None] + spec.cov.sqrt_apply(Z)
