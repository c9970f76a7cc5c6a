import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from depthforge.noise import (NoiseSpec, ScalarField, feature_point, fill_field,
                              noise_at)

KINDS = ("perlin", "cellular", "white")


class TestNoiseAt:
    def test_perlin_vanishes_on_lattice(self):
        spec = NoiseSpec("perlin", 1.0, seed=1234)
        for x in range(-5, 6):
            for y in range(-5, 6):
                assert abs(noise_at(spec, x, y)) < 1e-12

    def test_deterministic(self):
        spec = NoiseSpec("cellular", 0.03, seed=99)
        assert noise_at(spec, 17.25, -4.5) == noise_at(spec, 17.25, -4.5)

    def test_cellular_feature_point_is_minus_one(self):
        spec = NoiseSpec("cellular", 1.0, seed=5)
        fx, fy = feature_point(spec, 2, -3)
        assert noise_at(spec, fx, fy) == pytest.approx(-1.0, abs=1e-12)

    @pytest.mark.parametrize("kind", KINDS)
    def test_bounds_random_probes(self, kind):
        spec = NoiseSpec(kind, 0.07, seed=3)
        rng = np.random.default_rng(0)
        vals = [noise_at(spec, x, y)
                for x, y in rng.uniform(-100, 100, size=(500, 2))]
        assert min(vals) >= -1.0 and max(vals) <= 1.0

    @settings(max_examples=100)
    @given(st.sampled_from(KINDS),
           st.floats(0.0001, 0.1),
           st.integers(0, 2 ** 63 - 1),
           st.floats(-1e4, 1e4),
           st.floats(-1e4, 1e4))
    def test_bounds_property(self, kind, freq, seed, x, y):
        v = noise_at(NoiseSpec(kind, freq, seed), x, y)
        assert -1.0 <= v <= 1.0

    def test_perlin_smoothness(self):
        # finite-difference jumps stay bounded for the C1 gradient noise
        spec = NoiseSpec("perlin", 0.05, seed=11)
        rng = np.random.default_rng(4)
        delta = 1e-3
        for x, y in rng.uniform(0, 100, size=(200, 2)):
            v0 = noise_at(spec, x, y)
            v1 = noise_at(spec, x + delta, y)
            assert abs(v1 - v0) <= 4 * delta

    def test_fractal_octaves_differ_from_single(self):
        single = NoiseSpec("perlin", 0.02, seed=8)
        fractal = NoiseSpec("perlin", 0.02, seed=8, octaves=4)
        assert noise_at(single, 10.3, 4.7) != noise_at(fractal, 10.3, 4.7)

    def test_validation(self):
        with pytest.raises(ValueError):
            NoiseSpec("simplex", 0.1, 1)
        with pytest.raises(ValueError):
            NoiseSpec("perlin", 0.0, 1)
        with pytest.raises(ValueError):
            NoiseSpec("perlin", 0.1, 1, octaves=0)


class TestCellularOracle:
    def test_matches_bruteforce_neighborhood_search(self):
        spec = NoiseSpec("cellular", 0.31, seed=77)
        rng = np.random.default_rng(5)
        for x, y in rng.uniform(-50, 50, size=(300, 2)):
            got = noise_at(spec, x, y)
            # independent scalar search over the 3x3 neighbor cells
            lx, ly = x * spec.frequency, y * spec.frequency
            cx, cy = math.floor(lx), math.floor(ly)
            best = math.inf
            for dx in (-1, 0, 1):
                for dy in (-1, 0, 1):
                    fx, fy = feature_point(spec, cx + dx, cy + dy)
                    best = min(best, math.hypot(lx - fx, ly - fy))
            expected = min(1.0, max(-1.0, best * math.sqrt(2.0) - 1.0))
            assert got == pytest.approx(expected, abs=1e-9)


class TestFillField:
    def test_matches_pointwise_eval(self):
        spec = NoiseSpec("white", 0.09, seed=21)
        field = fill_field(spec, 9, 6)
        for r in range(6):
            for c in range(9):
                assert field.values[r, c] == noise_at(spec, c, r)

    def test_two_seeds_differ(self):
        a = fill_field(NoiseSpec("white", 0.05, 1), 64, 64)
        b = fill_field(NoiseSpec("white", 0.05, 2), 64, 64)
        assert (a.values != b.values).any()

    def test_tiny_frequency_nearly_constant(self):
        field = fill_field(NoiseSpec("perlin", 0.0001, 3), 64, 64)
        assert field.values.max() - field.values.min() < 0.05

    def test_single_pixel(self):
        field = fill_field(NoiseSpec("cellular", 0.02, 4), 1, 1)
        assert field.values.shape == (1, 1)
        assert -1.0 <= field.values[0, 0] <= 1.0

    def test_dimensions_validated(self):
        with pytest.raises(ValueError):
            fill_field(NoiseSpec("white", 0.1, 0), 0, 4)

    def test_scalar_field_bounds_validated(self):
        with pytest.raises(ValueError):
            ScalarField(2, 1, np.array([[0.5, 1.5]]))
