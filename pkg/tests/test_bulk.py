import numpy as np
import pytest

from hesspec import (Diagonal, ProblemSpec, ResponseModel, ScaledIdentity,
                     WeightFn, default_scan_range, density, solve_point,
                     stieltjes_derivatives, support)
from hesspec.errors import BranchViolation, HesspecError


def quarter_wishart(p=512, n=2048):
    """Logistic spec with w = w* = mu = 0: the Hessian is (1/4) * Wishart."""
    z = np.zeros(p)
    return ProblemSpec(p=p, n=n, mu=z, cov=ScaledIdentity(1.0), w_star=z, w=z,
                       model=ResponseModel.logistic(),
                       weight=WeightFn.loss_curvature("logistic"))


def mp_stieltjes(z, c, scale=0.25):
    """Marchenko-Pastur Stieltjes transform of scale * Wishart(c)."""
    x = z / scale
    a = 1.0 - c - x
    root = np.sqrt(a * a - 4.0 * c * x + 0j)
    m1 = (a - root) / (2.0 * c * x) / scale
    m2 = (a + root) / (2.0 * c * x) / scale
    if np.imag(z) > 0:
        return m1 if m1.imag > 0 else m2
    # on the real axis off the support, m is real and increasing; the
    # physical branch is the one decaying like -1/z
    return m1 if abs(m1) < abs(m2) else m2


def mp_density(x, c, scale=0.25):
    lo, hi = scale * (1 - np.sqrt(c)) ** 2, scale * (1 + np.sqrt(c)) ** 2
    inside = (x > lo) & (x < hi)
    out = np.zeros_like(np.asarray(x, dtype=float))
    xi = np.asarray(x)[inside]
    out[inside] = np.sqrt((hi - xi) * (xi - lo)) / (2 * np.pi * c * scale * xi)
    return out


class TestSolvePoint:
    def test_real_negative_axis_oracle(self):
        spec = quarter_wishart()
        pt = solve_point(spec, -0.25)
        exact = mp_stieltjes(-0.25, 0.25).real
        assert exact == pytest.approx(2.1245154965971, rel=1e-10)
        assert pt.m.real == pytest.approx(exact, rel=1e-9)
        assert pt.residual < 1e-10

    def test_far_field_decay(self):
        spec = quarter_wishart()
        pt = solve_point(spec, -1e6)
        assert pt.m.real == pytest.approx(1e-6, rel=1e-5)

    def test_inside_support_upper_half_plane(self):
        spec = quarter_wishart()
        pt = solve_point(spec, 0.3 + 1e-6j)
        assert pt.m.imag > 0
        assert pt.m.imag / np.pi == pytest.approx(mp_density(np.array([0.3]),
                                                             0.25)[0], rel=1e-3)

    def test_real_point_inside_support_rejected(self):
        spec = quarter_wishart()
        with pytest.raises(HesspecError):
            solve_point(spec, 0.3)

    def test_self_consistency(self):
        spec = quarter_wishart()
        for z in (-0.5, 0.7, 0.2 + 0.05j):
            pt = solve_point(spec, z)
            assert pt.residual < 1e-10

    def test_warm_start_agrees_with_cold(self):
        spec = quarter_wishart()
        cold = solve_point(spec, 0.60)
        near = solve_point(spec, 0.61)
        warm = solve_point(spec, 0.60, warm_start=near.delta)
        assert abs(warm.m - cold.m) < 1e-8

    def test_random_upper_half_plane_against_mp(self):
        spec = quarter_wishart()
        rng = np.random.default_rng(23)
        for _ in range(200):
            z = complex(rng.uniform(-0.5, 1.2), 10 ** rng.uniform(-3, 0))
            pt = solve_point(spec, z)
            assert abs(pt.m - mp_stieltjes(z, 0.25)) < 1e-9
            assert pt.m.imag * z.imag > 0


class TestDerivatives:
    def test_m_prime_matches_finite_difference(self):
        spec = quarter_wishart()
        for z in (-0.3, 0.75, 0.4 + 0.1j):
            pt = solve_point(spec, z)
            _, m_prime, _ = stieltjes_derivatives(spec, pt)
            h = 1e-6
            fd = (solve_point(spec, z + h).m - solve_point(spec, z - h).m) / (2 * h)
            assert abs(m_prime - fd) < 1e-4 * max(1.0, abs(m_prime))

    def test_m_prime_positive_off_support(self):
        spec = quarter_wishart()
        for z in (-1.0, 0.01, 0.60, 5.0):
            pt = solve_point(spec, z)
            _, m_prime, _ = stieltjes_derivatives(spec, pt)
            assert m_prime.real > 0


class TestDensity:
    def test_matches_analytic_mp(self):
        spec = quarter_wishart()
        grid = np.linspace(0.08, 0.55, 60)
        curve = density(spec, grid, epsilon=1e-5)
        np.testing.assert_allclose(curve.density, mp_density(grid, 0.25),
                                   atol=2e-3)

    def test_total_mass(self):
        spec = quarter_wishart()
        lo, hi = default_scan_range(spec)
        grid = np.linspace(lo, hi, 500)
        curve = density(spec, grid)
        mass = np.trapezoid(np.nan_to_num(curve.density), grid)
        assert mass == pytest.approx(1.0, abs=0.02)

    def test_negation_of_w_leaves_density(self):
        p = 64
        w = np.zeros(p)
        w[0] = 2.0
        base = dict(p=p, n=4 * p, mu=np.zeros(p), cov=ScaledIdentity(1.0),
                    w_star=np.zeros(p), model=ResponseModel.logistic(),
                    weight=WeightFn.loss_curvature("logistic"))
        up = ProblemSpec(w=w, **base)
        dn = ProblemSpec(w=-w, **base)
        grid = np.linspace(0.01, 0.6, 40)
        np.testing.assert_allclose(density(up, grid).density,
                                   density(dn, grid).density, rtol=1e-8)

    def test_nan_outside_never_inside(self):
        spec = quarter_wishart()
        grid = np.linspace(0.1, 0.5, 30)
        assert np.all(np.isfinite(density(spec, grid).density))


class TestSupport:
    def test_mp_edges(self):
        spec = quarter_wishart()
        lo, hi = default_scan_range(spec)
        rep = support(spec, (lo, hi))
        assert rep.bulk_count == 1
        left, right = rep.intervals[0]
        assert left == pytest.approx(0.0625, abs=1e-3)
        assert right == pytest.approx(0.5625, abs=1e-3)
        assert rep.bounded

    def test_scaled_covariance_scales_edges(self):
        p = 128
        z = np.zeros(p)
        spec = ProblemSpec(p=p, n=4 * p, mu=z, cov=ScaledIdentity(2.0),
                           w_star=z, w=z, model=ResponseModel.logistic(),
                           weight=WeightFn.loss_curvature("square"))
        # square loss, C = 2I: plain Wishart scaled by 2
        lo, hi = default_scan_range(spec)
        rep = support(spec, (lo, hi))
        left, right = rep.intervals[0]
        assert left == pytest.approx(2 * 0.25, abs=4e-3)
        assert right == pytest.approx(2 * 2.25, abs=4e-3)

    def test_scan_window_contains_support(self):
        spec = quarter_wishart()
        lo, hi = default_scan_range(spec)
        assert lo < 0.0625 and hi > 0.5625

    def test_empty_when_scanned_off_support(self):
        spec = quarter_wishart()
        rep = support(spec, (5.0, 6.0), resolution=50)
        assert rep.intervals == [] and rep.bulk_count == 0


class TestMultiBulk:
    def test_two_bulks_split_and_merge(self):
        p = 800
        z = np.zeros(p)
        base = dict(p=p, n=6000, mu=z, w_star=z, w=z,
                    model=ResponseModel.logistic(),
                    weight=WeightFn.loss_curvature("square"))
        wide = ProblemSpec(cov=Diagonal(np.repeat([1.0, 8.0], p // 2)), **base)
        lo, hi = default_scan_range(wide)
        assert support(wide, (lo, hi)).bulk_count == 2
        narrow = ProblemSpec(cov=Diagonal(np.repeat([1.0, 1.3], p // 2)), **base)
        lo, hi = default_scan_range(narrow)
        assert support(narrow, (lo, hi)).bulk_count == 1
