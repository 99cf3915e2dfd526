import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import integrate, special

from conrec.errors import DimensionMismatchError, DomainError, InvalidDimensionError
from conrec.rng import stream
from conrec.sphere import (
    Cap,
    build_geodesic_net,
    cap_contains,
    cap_measure_any,
    cap_relative_measure,
    gamma_ratio_constant,
    geodesic_distance,
    inner_product_abs_pdf,
    min_separation,
    net_cardinality_bound,
    sample_uniform_direction,
    sample_uniform_directions,
)


def _cap_oracle(d, theta):
    # regularized incomplete beta form of the cap area fraction
    return 0.5 * special.betainc((d - 1) / 2, 0.5, math.sin(theta) ** 2)


class TestSampling:
    def test_unit_norm(self):
        rng = stream(1)
        for d in (1, 2, 3, 7):
            u = sample_uniform_directions(d, 500, rng)
            assert np.allclose(np.linalg.norm(u, axis=1), 1.0, atol=1e-12)

    def test_d1_is_fair_coin(self):
        T = 40000
        u = sample_uniform_directions(1, T, stream(2))[:, 0]
        assert set(np.unique(u)) <= {-1.0, 1.0}
        assert abs(np.mean(u > 0) - 0.5) <= 4 / math.sqrt(T)

    def test_d3_mean_near_zero(self):
        T = 100000
        u = sample_uniform_directions(3, T, stream(3))
        assert np.linalg.norm(u.mean(axis=0)) <= 4 / math.sqrt(T) * math.sqrt(3)

    def test_d3_abs_projection_is_uniform(self):
        T = 100000
        z = np.sort(np.abs(sample_uniform_directions(3, T, stream(4))[:, 0]))
        ecdf_hi = np.arange(1, T + 1) / T
        ecdf_lo = np.arange(T) / T
        ks = max(np.max(ecdf_hi - z), np.max(z - ecdf_lo))
        assert ks < 0.01

    def test_d0_rejected(self):
        with pytest.raises(InvalidDimensionError):
            sample_uniform_direction(0, stream(0))

    def test_same_key_same_draw(self):
        a = sample_uniform_directions(4, 10, stream(9, 1, 2))
        b = sample_uniform_directions(4, 10, stream(9, 1, 2))
        c = sample_uniform_directions(4, 10, stream(9, 1, 3))
        assert np.array_equal(a, b)
        assert not np.array_equal(a, c)


class TestGeodesicDistance:
    def test_identity_antipode_orthogonal(self):
        u = np.array([0.6, 0.8])
        assert geodesic_distance(u, u) == 0.0
        assert geodesic_distance(u, -u) == pytest.approx(math.pi)
        assert geodesic_distance([1.0, 0.0], [0.0, 1.0]) == pytest.approx(math.pi / 2)

    def test_clamps_rounding(self):
        u = np.array([1.0, 1e-17])
        assert geodesic_distance(u * (1 + 1e-16), u) == 0.0

    def test_mismatch(self):
        with pytest.raises(DimensionMismatchError):
            geodesic_distance([1.0, 0.0], [1.0, 0.0, 0.0])

    @given(st.integers(0, 10 ** 6))
    @settings(max_examples=50, deadline=None)
    def test_symmetric(self, seed):
        u, v = sample_uniform_directions(3, 2, stream(seed))
        assert geodesic_distance(u, v) == geodesic_distance(v, u)


class TestGammaRatio:
    def test_small_values(self):
        assert gamma_ratio_constant(2) == pytest.approx(1 / math.pi, abs=1e-15)
        assert gamma_ratio_constant(3) == 0.5

    @pytest.mark.parametrize("d", range(2, 65))
    def test_two_sided_estimate(self, d):
        c = gamma_ratio_constant(d)
        hi = math.sqrt((d - 1) / (2 * math.pi))
        assert math.sqrt(1 - 1 / d) * hi <= c <= hi

    def test_asymptotic(self):
        assert abs(gamma_ratio_constant(64) / 8 - 0.39894) < 0.01

    def test_branches_agree_with_log_gamma(self):
        for d in (299, 300, 301, 302):
            lg = math.exp(math.lgamma(d / 2) - math.lgamma((d - 1) / 2)) / math.sqrt(math.pi)
            assert gamma_ratio_constant(d) == pytest.approx(lg, rel=1e-12)

    def test_domain(self):
        with pytest.raises(DomainError):
            gamma_ratio_constant(1)


class TestCapMeasure:
    def test_circle(self):
        assert cap_relative_measure(2, math.pi / 4) == pytest.approx(0.25, abs=1e-12)

    def test_sphere_closed_form(self):
        assert cap_relative_measure(3, math.pi / 3) == pytest.approx(0.25, abs=1e-10)

    @pytest.mark.parametrize("d", [2, 3, 4, 6, 10])
    def test_near_hemisphere(self, d):
        assert cap_relative_measure(d, math.pi / 2 - 1e-8) == pytest.approx(0.5, abs=1e-6)

    @pytest.mark.parametrize("d", [3, 4, 5, 9, 16])
    @pytest.mark.parametrize("theta", [0.05, 0.4, 1.0, 1.5])
    def test_matches_incomplete_beta(self, d, theta):
        assert cap_relative_measure(d, theta) == pytest.approx(_cap_oracle(d, theta), abs=1e-9)

    @pytest.mark.parametrize("theta", [0.0, -0.1, math.pi / 2, 2.0])
    def test_domain(self, theta):
        with pytest.raises(DomainError):
            cap_relative_measure(3, theta)

    def test_increasing(self):
        vals = [cap_relative_measure(5, t) for t in np.linspace(0.01, 1.56, 40)]
        assert all(b > a for a, b in zip(vals, vals[1:]))

    def test_any_radius(self):
        assert cap_measure_any(3, 0.0) == 0.0
        assert cap_measure_any(3, math.pi / 2) == 0.5
        assert cap_measure_any(3, math.pi) == 1.0
        assert cap_measure_any(3, 2.0) == pytest.approx(1 - _cap_oracle(3, math.pi - 2.0), abs=1e-9)

    @pytest.mark.parametrize("d", [2, 3, 5])
    def test_monte_carlo_membership(self, d):
        T = 100000
        theta = 0.9
        u = sample_uniform_directions(d, T, stream(11, d))
        freq = np.mean(u[:, 0] > math.cos(theta))
        p = cap_relative_measure(d, theta)
        assert abs(freq - p) <= 3 * math.sqrt(p * (1 - p) / T)


class TestPdf:
    def test_values(self):
        assert inner_product_abs_pdf(3, 0.7) == pytest.approx(1.0)
        assert inner_product_abs_pdf(7, 1.5) == 0.0
        assert inner_product_abs_pdf(7, -0.1) == 0.0

    @pytest.mark.parametrize("d", range(2, 17))
    def test_normalised(self, d):
        val, _ = integrate.quad(lambda z: inner_product_abs_pdf(d, z), 0, 1, epsabs=1e-12, limit=200)
        assert val == pytest.approx(1.0, abs=1e-8)

    def test_d2_histogram(self):
        T = 200000
        z = np.abs(sample_uniform_directions(2, T, stream(12))[:, 0])
        edges = np.linspace(0, 0.9, 10)
        counts, _ = np.histogram(z, edges)
        for k in range(len(counts)):
            a, b = edges[k], edges[k + 1]
            p = 2 / math.pi * (math.asin(b) - math.asin(a))
            assert abs(counts[k] / T - p) <= 4 * math.sqrt(p * (1 - p) / T)


class TestCaps:
    def test_membership(self):
        c = np.array([0.0, 0.0, 1.0])
        assert cap_contains(Cap(c, 0.1), c)
        assert not cap_contains(Cap(c, math.pi / 2), -c)
        assert not cap_contains(Cap(c, 0.0), c)

    def test_open_boundary(self):
        th = math.pi / 3
        u = np.array([math.sin(th), 0.0, math.cos(th)])
        assert not cap_contains(Cap(np.array([0.0, 0.0, 1.0]), th), u)

    def test_dimension_mismatch(self):
        with pytest.raises(DimensionMismatchError):
            cap_contains(Cap(np.array([1.0, 0.0]), 0.3), np.array([1.0, 0.0, 0.0]))


class TestNets:
    def test_circle_net_eighths(self):
        net = build_geodesic_net(2, math.pi / 8)
        assert len(net) == 8
        ang = np.sort(np.mod(np.arctan2(net.points[:, 1], net.points[:, 0]), 2 * math.pi))
        assert np.allclose(ang, 2 * math.pi * np.arange(8) / 8)

    def test_sphere_net_bound_and_separation(self):
        net = build_geodesic_net(3, 0.5, stream(5))
        assert len(net) <= 256
        assert len(net) <= net_cardinality_bound(3, 0.5)
        assert min_separation(net.points) >= 0.5 - 1e-12

    @pytest.mark.parametrize("d,eps", [(2, 0.1), (3, 0.3), (4, 0.6)])
    def test_covering_probe(self, d, eps):
        net = build_geodesic_net(d, eps, stream(6, d))
        probes = sample_uniform_directions(d, 10000, stream(7, d))
        best = np.clip((probes @ net.points.T).max(axis=1), -1, 1)
        assert np.all(np.arccos(best) <= eps + 1e-12)

    def test_bad_eps(self):
        with pytest.raises(DomainError):
            build_geodesic_net(3, 0.0, stream(0))

    def test_needs_rng_above_circle(self):
        with pytest.raises(ValueError):
            build_geodesic_net(3, 0.5)
