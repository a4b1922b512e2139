"""Special functions and quadrature rules."""

import math

import numpy as np
import pytest
from scipy.stats import multivariate_normal

from aesf import DomainError, NumericsError, bvn_cdf, hermite_rule, integrate, legendre_rule, normal_cdf
from aesf.numerics import clamp_probability

# Frozen before the build from a 40-digit erf evaluation (mpmath.ncdf).
NORMAL_CDF_ORACLE = {
    -8.0: 6.2209605742717841e-16,
    -6.0: 9.8658764503769814e-10,
    -3.5: 0.00023262907903552504,
    -2.0: 0.022750131948179207,
    -1.959963985: 0.024999999973118443,
    -1.0: 0.15865525393145705,
    -0.5: 0.3085375387259869,
    -0.1: 0.46017216272297102,
    0.0: 0.5,
    0.3: 0.61791142218895263,
    1.0: 0.84134474606854295,
    1.5: 0.93319279873114193,
    1.959963985: 0.97500000002688156,
    2.5: 0.99379033467422386,
    4.0: 0.99996832875816688,
    6.0: 0.99999999901341235,
    8.0: 0.99999999999999938,
}

# Frozen before the build from 40-digit quadrature of the conditional
# decomposition int phi(t) Phi((y - rho t)/sqrt(1-rho^2)) dt.
BVN_ORACLE = {
    (0.5, -0.3, 0.6): 0.34362253011121081,
    (1.2, 0.7, -0.45): 0.64924831072223227,
    (2.0, -2.0, 0.7): 0.022750124641882521,
    (-2.0, 2.0, 0.7): 0.022750124641882521,
    (-0.7, -1.1, 0.9): 0.12355950037898785,
    (0.3, 0.4, -0.95): 0.27393157559245054,
    (3.0, 3.0, 0.7): 0.99753017761029865,
}


class TestNormalCdf:
    def test_at_zero(self):
        assert normal_cdf(0.0) == 0.5

    def test_reflection(self):
        for z in (0.1, 0.77, 1.5, 3.2, 6.0):
            assert abs(normal_cdf(z) + normal_cdf(-z) - 1.0) <= 1e-14

    def test_two_sided_975_quantile(self):
        assert abs(normal_cdf(1.959963985) - 0.975) <= 1e-9

    def test_against_high_precision_oracle(self):
        for z, expected in NORMAL_CDF_ORACLE.items():
            assert abs(normal_cdf(z) - expected) <= 1e-12

    def test_monotone(self):
        zs = np.linspace(-9, 9, 400)
        vals = [normal_cdf(z) for z in zs]
        assert np.all(np.diff(vals) >= 0)

    @pytest.mark.parametrize("bad", [float("nan"), float("inf"), -float("inf")])
    def test_rejects_non_finite(self, bad):
        with pytest.raises(DomainError):
            normal_cdf(bad)


class TestBvnCdf:
    def test_independence_factorizes(self):
        for x, y in [(-1.3, 0.4), (0.0, 2.0), (2.2, -0.7)]:
            assert bvn_cdf(x, y, 0.0) == pytest.approx(
                normal_cdf(x) * normal_cdf(y), abs=1e-15)

    def test_origin_arcsin_identity(self):
        # Also verified against a 1e8-draw Monte Carlo before the build
        # (|MC - identity| = 5.6e-5 with 4*SE = 1.9e-4).
        for rho in (-0.95, -0.5, 0.0, 0.3, 0.7, 0.95):
            expected = 0.25 + math.asin(rho) / (2.0 * math.pi)
            assert abs(bvn_cdf(0.0, 0.0, rho) - expected) <= 1e-10

    def test_comonotone_limit(self):
        for x, y in [(0.3, 1.5), (-1.0, -2.0), (0.0, 0.0)]:
            assert bvn_cdf(x, y, 1.0) == normal_cdf(min(x, y))

    def test_antimonotone_limit(self):
        assert bvn_cdf(1.0, -0.5, -1.0) == pytest.approx(
            normal_cdf(1.0) + normal_cdf(-0.5) - 1.0, abs=1e-15)
        assert bvn_cdf(-2.0, -2.0, -1.0) == 0.0

    def test_against_high_precision_oracle(self):
        for (x, y, rho), expected in BVN_ORACLE.items():
            assert abs(bvn_cdf(x, y, rho) - expected) <= 1e-10

    def test_against_scipy(self):
        rng = np.random.default_rng(5)
        for _ in range(25):
            x, y = rng.uniform(-2.5, 2.5, 2)
            rho = rng.uniform(-0.98, 0.98)
            ref = multivariate_normal([0, 0], [[1, rho], [rho, 1]]).cdf([x, y])
            assert bvn_cdf(x, y, rho) == pytest.approx(ref, abs=1e-6)

    def test_argument_symmetry_exact(self):
        rng = np.random.default_rng(11)
        for _ in range(50):
            x, y = rng.uniform(-3, 3, 2)
            rho = rng.uniform(-0.99, 0.99)
            assert bvn_cdf(x, y, rho) == bvn_cdf(y, x, rho)

    def test_monotone_in_each_argument(self):
        grid = np.linspace(-2.5, 2.5, 9)
        rhos = np.linspace(-0.9, 0.9, 7)
        for rho in rhos:
            for y in grid:
                vals = [bvn_cdf(x, y, rho) for x in grid]
                assert np.all(np.diff(vals) >= -1e-15)
        for x in grid:
            for y in grid:
                vals = [bvn_cdf(x, y, rho) for rho in rhos]
                assert np.all(np.diff(vals) >= -1e-15)

    def test_rejects_bad_correlation(self):
        with pytest.raises(DomainError):
            bvn_cdf(0.0, 0.0, 1.001)
        with pytest.raises(DomainError):
            bvn_cdf(float("nan"), 0.0, 0.5)


class TestQuadratureRules:
    @pytest.mark.parametrize("order", [4, 16, 32, 64, 128])
    def test_legendre_rule_invariants(self, order):
        rule = legendre_rule(-1.5, 2.5, order)
        assert rule.order == order
        assert rule.nodes.size == rule.weights.size == order
        assert np.all(np.diff(rule.nodes) > 0)
        assert np.all(rule.weights > 0)
        # integrating 1 returns the interval length
        assert integrate(rule, lambda t: np.ones_like(t)) == pytest.approx(
            4.0, rel=1e-13)

    @pytest.mark.parametrize("order", [8, 32, 64, 128])
    def test_hermite_rule_invariants(self, order):
        rule = hermite_rule(order)
        assert np.all(np.diff(rule.nodes) > 0)
        assert np.all(rule.weights > 0)
        assert integrate(rule, lambda t: np.ones_like(t)) == pytest.approx(1.0, abs=1e-13)
        assert integrate(rule, lambda t: t) == pytest.approx(0.0, abs=1e-13)
        assert integrate(rule, lambda t: t * t) == pytest.approx(1.0, abs=1e-12)

    def test_legendre_cubic(self):
        rule = legendre_rule(0.0, 1.0, 64)
        assert integrate(rule, lambda t: t ** 3) == pytest.approx(0.25, abs=1e-12)
        assert integrate(rule, lambda t: np.ones_like(t)) == pytest.approx(1.0, abs=1e-13)

    def test_bad_interval(self):
        with pytest.raises(DomainError):
            legendre_rule(1.0, 1.0, 16)

    def test_integrate_rejects_non_finite(self):
        rule = legendre_rule(0.0, 1.0, 8)
        with pytest.raises(NumericsError):
            integrate(rule, lambda t: np.where(t > 0.5, np.inf, t))


class TestClamp:
    def test_passthrough_and_small_clamp(self):
        assert clamp_probability(0.25) == 0.25
        assert clamp_probability(-1e-12) == 0.0
        assert clamp_probability(1.0 + 1e-12) == 1.0

    def test_large_excursion_raises(self):
        with pytest.raises(NumericsError):
            clamp_probability(-1e-6)
        with pytest.raises(NumericsError):
            clamp_probability(1.0 + 1e-6)
