import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from younglab.grid import (FREQUENCY, Grid, GridFunction, fft_forward, fft_inverse, integrate,
                           sample)
from younglab.operators import translate


def random_function(grid, seed=0, complex_=False):
    rng = np.random.default_rng(seed)
    a = rng.standard_normal(grid.shape)
    if complex_:
        a = a + 1j * rng.standard_normal(grid.shape)
    return GridFunction(grid, a)


class TestGrid:
    def test_spacing_and_frequency_axis(self):
        g = Grid(1, 512, 8.0)
        assert g.spacing * g.n == pytest.approx(2 * g.half_width, abs=0)
        assert g.freq_spacing == pytest.approx(math.pi / 8.0)
        assert g.nyquist == pytest.approx(math.pi * 512 / 16.0)

    def test_nodes_include_origin(self):
        g = Grid(1, 64, 4.0)
        assert g.coords[0][g.origin_index()] == 0.0
        assert g.coords[0][0] == -4.0

    @pytest.mark.parametrize("kwargs", [dict(dim=3, n=8, half_width=1.0),
                                        dict(dim=1, n=100, half_width=1.0),
                                        dict(dim=1, n=64, half_width=0.0)])
    def test_invalid(self, kwargs):
        with pytest.raises(ValueError):
            Grid(**kwargs)

    def test_two_dimensional_shapes(self):
        g = Grid(2, 32, 2.0)
        assert g.shape == (32, 32)
        assert g.cell_volume == pytest.approx(g.spacing**2)
        assert g.freq_norm_sq.shape == (32, 32)


class TestSample:
    def test_zero_function(self):
        g = Grid(1, 64, 4.0)
        assert not sample(lambda x: 0.0, g).samples.any()

    def test_single_cell_indicator(self):
        g = Grid(1, 64, 4.0)
        f = sample(lambda x: ((x >= 0) & (x < g.spacing)).astype(float), g)
        assert np.count_nonzero(f.samples) == 1

    def test_gaussian_is_symmetric(self):
        g = Grid(1, 512, 8.0)
        s = sample(lambda x: np.exp(-math.pi * x**2), g).samples
        # node i sits at -L + i h, so x -> -x maps i to N - i
        assert np.array_equal(s[1:], s[1:][::-1])

    def test_non_finite_names_point(self):
        g = Grid(1, 8, 1.0)
        with np.errstate(divide="ignore"), pytest.raises(ValueError, match="x = "):
            sample(lambda x: 1.0 / x, g)

    def test_gridfunction_rejects_nan(self):
        g = Grid(1, 8, 1.0)
        with pytest.raises(ValueError):
            GridFunction(g, np.full(8, np.nan))


class TestIntegrate:
    def test_indicator(self):
        g = Grid(1, 64, 4.0)
        f = GridFunction(g, np.r_[np.ones(5), np.zeros(59)])
        assert integrate(f) == pytest.approx(5 * g.spacing, rel=1e-15)

    def test_zero(self):
        assert integrate(GridFunction(Grid(2, 8, 1.0), np.zeros((8, 8)))) == 0.0

    def test_gaussian_mass(self):
        g = Grid(1, 512, 8.0)
        assert abs(integrate(sample(lambda x: np.exp(-math.pi * x**2), g)) - 1.0) < 1e-8

    def test_gaussian_mass_2d(self):
        g = Grid(2, 128, 6.0)
        f = sample(lambda x, y: np.exp(-math.pi * (x**2 + y**2)), g)
        assert abs(integrate(f) - 1.0) < 1e-8

    def test_linearity(self):
        g = Grid(1, 128, 3.0)
        f, h = random_function(g, 1), random_function(g, 2)
        lhs = integrate(f * 2.5 + h * -0.75)
        rhs = 2.5 * integrate(f) - 0.75 * integrate(h)
        assert lhs == pytest.approx(rhs, rel=1e-12, abs=1e-12)


class TestFourier:
    @pytest.mark.parametrize("dim,n", [(1, 256), (2, 32)])
    def test_roundtrip(self, dim, n):
        g = Grid(dim, n, 5.0)
        f = random_function(g, 3, complex_=True)
        back = fft_inverse(fft_forward(f))
        assert np.max(np.abs(back.samples - f.samples)) <= 1e-12 * np.max(np.abs(f.samples))

    def test_self_dual_gaussian(self):
        g = Grid(1, 512, 10.0)
        F = fft_forward(sample(lambda x: np.exp(-x**2 / 2), g))
        xi = g.freqs[0]
        interior = np.abs(xi) < 0.5 * g.nyquist
        err = np.abs(F.samples - np.exp(-xi**2 / 2))[interior]
        assert err.max() < 1e-6

    def test_parseval(self):
        g = Grid(1, 256, 4.0)
        f = random_function(g, 4)
        F = fft_forward(f)
        assert F.l2_norm() == pytest.approx(f.l2_norm(), rel=1e-10)

    def test_real_even_has_real_even_transform(self):
        g = Grid(1, 256, 4.0)
        f = sample(lambda x: np.exp(-np.abs(x)) * np.cos(3 * x), g)
        F = fft_forward(f).samples
        assert np.max(np.abs(F.imag)) < 1e-10 * f.l2_norm()
        # xi_k and xi_{-k} sit at k and N - k in FFT order
        assert np.allclose(F[1:], F[1:][::-1], atol=1e-12)

    def test_translation_modulation(self):
        g = Grid(1, 128, 4.0)
        f = random_function(g, 5)
        z = 7 * g.spacing
        lhs = fft_forward(translate(f, z)).samples
        rhs = np.exp(-1j * z * g.freqs[0]) * fft_forward(f).samples
        assert np.max(np.abs(lhs - rhs)) < 1e-10

    def test_grid_mismatch(self):
        F = fft_forward(random_function(Grid(1, 64, 2.0)))
        with pytest.raises(ValueError):
            fft_inverse(F, Grid(1, 64, 3.0))

    def test_domain_mismatch(self):
        g = Grid(1, 16, 1.0)
        with pytest.raises(ValueError):
            fft_forward(GridFunction(g, np.zeros(16), FREQUENCY))


@settings(max_examples=25, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), n=st.sampled_from([16, 64, 256]),
       L=st.floats(0.5, 50.0))
def test_plancherel_property(seed, n, L):
    g = Grid(1, n, L)
    f = random_function(g, seed, complex_=True)
    assert fft_forward(f).l2_norm() == pytest.approx(f.l2_norm(), rel=1e-10)
