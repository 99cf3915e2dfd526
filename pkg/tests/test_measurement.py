import io
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import stats

from conrec.errors import DimensionMismatchError, DomainError
from conrec.measurement import (
    FixedList,
    SlabSystem,
    UniformCap,
    UniformSphere,
    consistency_residuals,
    draw_instance,
    dump_instance,
    error_polytope,
    is_consistent,
    load_direction_file,
    load_instance,
    make_instance,
    radial_extent,
    radial_extent_batch,
)
from conrec.rng import stream
from conrec.sphere import sample_uniform_direction, sample_uniform_directions

SQUARE = SlabSystem(np.eye(2), np.zeros(2), 1.0)


def _random_instance(seed, d=3, N=12, delta=1.0):
    rng = stream(seed)
    x = sample_uniform_direction(d, rng)
    return draw_instance(x, N, delta, UniformSphere(), rng)


class TestDraw:
    def test_zero_signal_values_are_noise(self):
        inst = draw_instance(np.zeros(3), 50, 0.5, UniformSphere(), stream(1))
        assert np.array_equal(inst.values, inst.noise)
        assert np.all(np.abs(inst.values) <= 0.5)

    def test_noise_mean(self):
        N, delta = 10000, 1.0
        inst = draw_instance(np.zeros(2), N, delta, UniformSphere(), stream(2))
        assert abs(inst.noise.mean()) <= 3 * (2 * delta / math.sqrt(12)) / math.sqrt(N)

    def test_noiseless_hook(self):
        inst = draw_instance([1.0, 2.0], 2, 1.0, FixedList(np.eye(2)), stream(3), noise_width=0.0)
        assert np.array_equal(inst.values, [1.0, 2.0])

    def test_fixed_list_too_short(self):
        with pytest.raises(ValueError):
            draw_instance([1.0, 0.0], 3, 1.0, FixedList(np.eye(2)), stream(0))

    def test_fixed_list_rejects_non_unit(self):
        with pytest.raises(ValueError):
            FixedList(np.array([[1.0, 1.0]]))

    def test_bad_arguments(self):
        with pytest.raises(ValueError):
            draw_instance([0.0], 0, 1.0, UniformSphere(), stream(0))
        with pytest.raises(DomainError):
            draw_instance([0.0], 3, 0.0, UniformSphere(), stream(0))

    def test_signal_feasible(self):
        for s in range(20):
            inst = _random_instance(s)
            assert is_consistent(inst.signal, inst)

    def test_instance_is_read_only(self):
        inst = _random_instance(0)
        with pytest.raises(ValueError):
            inst.phi[0, 0] = 2.0
        assert len(inst.measurements) == inst.N

    def test_cap_law_stays_in_cap(self):
        c = np.array([1.0, 0.0, 0.0])
        phi = UniformCap(c, 0.4).sample(3, 2000, stream(4))
        assert np.all(phi @ c > math.cos(0.4))
        assert np.allclose(np.linalg.norm(phi, axis=1), 1.0)

    def test_cap_law_bad_radius(self):
        with pytest.raises(DomainError):
            UniformCap(np.array([1.0, 0.0]), 0.0)


class TestResiduals:
    def test_signal_residuals_are_noise(self):
        inst = _random_instance(5)
        r = consistency_residuals(inst.signal, inst)
        assert np.allclose(-r, inst.noise, atol=1e-14)

    def test_one_dim_arithmetic(self):
        inst = make_instance([0.5], 1.0, [[1.0]], [0.0])
        assert consistency_residuals([2.0], inst)[0] == pytest.approx(1.5)
        assert not is_consistent([2.0], inst)

    def test_monotone_in_delta(self):
        inst = _random_instance(6)
        cand = inst.signal + 0.01
        if is_consistent(cand, inst):
            assert is_consistent(cand, inst, delta=1.5)

    def test_dimension_check(self):
        with pytest.raises(DimensionMismatchError):
            consistency_residuals(np.zeros(2), _random_instance(0))


class TestPolytope:
    def test_origin_member(self):
        for s in range(10):
            assert error_polytope(_random_instance(s)).contains(np.zeros(3))

    def test_square(self):
        assert SQUARE.contains([0.5, -0.5])
        assert not SQUARE.contains([1.5, 0.0])

    def test_membership_matches_consistency(self):
        inst = _random_instance(7)
        P = error_polytope(inst)
        rng = stream(8)
        for _ in range(100):
            u = rng.normal(scale=0.5, size=3)
            assert P.contains(u) == is_consistent(inst.signal + u, inst)


class TestRadialExtent:
    def test_single_slab(self):
        slab = SlabSystem(np.array([[1.0, 0.0]]), np.zeros(1), 1.0)
        assert radial_extent(slab, [1.0, 0.0]) == 1.0
        assert radial_extent(slab, [0.0, 1.0]) == math.inf

    def test_square_corner(self):
        s = 1 / math.sqrt(2)
        assert radial_extent(SQUARE, [s, s]) == pytest.approx(math.sqrt(2), abs=1e-15)

    @given(st.integers(0, 10 ** 6))
    @settings(max_examples=40, deadline=None)
    def test_is_exact_boundary(self, seed):
        inst = _random_instance(seed, d=3, N=8)
        P = error_polytope(inst)
        psi = sample_uniform_direction(3, stream(seed, 1))
        r = radial_extent(P, psi)
        assert P.contains(r * psi, slack=1e-12)
        assert P.contains(0.5 * r * psi)
        assert not P.contains((r * (1 + 1e-9) + 1e-12) * psi)

    def test_homogeneous(self):
        P = error_polytope(_random_instance(9))
        psi = sample_uniform_direction(3, stream(10))
        assert radial_extent(P.scaled(2.5), psi) == pytest.approx(2.5 * radial_extent(P, psi), rel=1e-14)

    def test_batch_matches_scalar(self):
        rng = stream(11)
        phi = sample_uniform_directions(3, 40, rng).reshape(4, 10, 3)
        noise = rng.uniform(-1, 1, size=(4, 10))
        psi = sample_uniform_direction(3, rng)
        batch = radial_extent_batch(phi, noise, 1.0, psi)
        for t in range(4):
            assert batch[t] == radial_extent(SlabSystem(phi[t], noise[t], 1.0), psi)

    def test_law_does_not_depend_on_probe(self):
        T, N, d = 100000, 10, 3
        rng = stream(12)
        phi = sample_uniform_directions(d, T * N, rng).reshape(T, N, d)
        noise = rng.uniform(-1, 1, size=(T, N))
        psi_a = np.array([1.0, 0.0, 0.0])
        psi_b = sample_uniform_direction(d, stream(13))
        # two independent halves so the samples are independent
        ra = radial_extent_batch(phi[: T // 2], noise[: T // 2], 1.0, psi_a)
        rb = radial_extent_batch(phi[T // 2:], noise[T // 2:], 1.0, psi_b)
        assert stats.ks_2samp(ra, rb).pvalue > 1e-3


class TestDump:
    def test_round_trip(self):
        inst = _random_instance(14, d=4, N=7)
        buf = io.StringIO()
        dump_instance(inst, buf)
        buf.seek(0)
        back = load_instance(buf)
        for name in ("signal", "phi", "noise", "values"):
            assert np.array_equal(getattr(back, name), getattr(inst, name))
        assert back.delta == inst.delta

    def test_rejects_garbage(self):
        with pytest.raises(ValueError):
            load_instance(io.StringIO("hello\n"))

    def test_direction_file(self, tmp_path):
        p = tmp_path / "dirs.txt"
        p.write_text("# basis\n1 0\n0 1\n")
        law = load_direction_file(str(p))
        assert np.array_equal(law.sample(2, 2, None), np.eye(2))
