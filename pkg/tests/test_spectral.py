"""Tests for the periodic pseudospectral toolkit."""

import numpy as np
import pytest

from hopfcl.spectral import (
    Field,
    antiderivative,
    apply_semigroup,
    chi_hat,
    dealias,
    derivative,
    downsample,
    dump_field_csv,
    field_from_function,
    field_from_physical,
    field_from_fourier,
    load_field_csv,
    lu_norm,
    make_grid,
    mode_filter,
    sobolev_norm,
    upsample,
)


def random_field(grid, rng, real=False):
    vals = rng.standard_normal(grid.n_points) \
        + 1j * rng.standard_normal(grid.n_points)
    if real:
        vals = vals.real
    return field_from_physical(grid, vals)


class TestGrid:
    def test_wavenumber_set_16(self):
        grid = make_grid(16, 2 * np.pi)
        assert set(np.round(grid.wavenumbers).astype(int)) == set(range(-7, 9))

    def test_smallest_nonzero_wavenumber(self):
        grid = make_grid(64, 2 * np.pi / 0.1)
        k = np.abs(grid.wavenumbers)
        assert np.isclose(k[k > 0].min(), 0.1)

    def test_odd_n_rejected(self):
        with pytest.raises(ValueError):
            make_grid(17, 2 * np.pi)

    def test_tiny_n_rejected(self):
        with pytest.raises(ValueError):
            make_grid(8, 2 * np.pi)

    def test_nonpositive_length_rejected(self):
        with pytest.raises(ValueError):
            make_grid(32, 0.0)

    def test_dx(self):
        grid = make_grid(32, 4.0)
        assert np.isclose(grid.dx, 0.125)
        assert np.isclose(grid.x[1] - grid.x[0], grid.dx)


class TestFieldRoundTrip:
    def test_round_trip(self):
        grid = make_grid(64, 5.0)
        f = random_field(grid, np.random.default_rng(0))
        back = f.to_fourier().to_physical()
        err = np.max(np.abs(back.values - f.values))
        assert err <= 1e-12 * np.max(np.abs(f.values))

    def test_real_field_hermitian(self):
        grid = make_grid(64, 2 * np.pi)
        f = random_field(grid, np.random.default_rng(1), real=True)
        fh = f.fourier()
        # conj(fhat(-k)) == fhat(k)
        sym_err = np.max(np.abs(fh - np.conj(np.roll(fh[::-1], 1))))
        assert sym_err <= 1e-12 * np.max(np.abs(fh))
        assert f.is_real()


class TestDerivative:
    def test_sin_second_derivative(self):
        grid = make_grid(64, 2 * np.pi)
        f = field_from_function(grid, np.sin)
        d2 = derivative(f, 2)
        assert np.max(np.abs(d2.physical() + np.sin(grid.x))) < 1e-12

    def test_constant_first_derivative(self):
        grid = make_grid(32, 3.0)
        f = field_from_physical(grid, np.full(32, 2.7))
        d1 = derivative(f, 1)
        assert np.max(np.abs(d1.physical())) < 1e-13

    def test_exp3ix_symbol(self):
        grid = make_grid(64, 2 * np.pi)
        f = field_from_function(grid, lambda x: np.exp(3j * x))
        d2 = derivative(f, 2)
        assert np.max(np.abs(d2.physical() + 9 * np.exp(3j * grid.x))) < 1e-11

    def test_order_zero_identity(self):
        grid = make_grid(32, 1.0)
        f = random_field(grid, np.random.default_rng(2))
        assert derivative(f, 0) is f


class TestAntiderivative:
    def test_cos(self):
        grid = make_grid(64, 2 * np.pi)
        f = field_from_function(grid, np.cos)
        g = antiderivative(f)
        assert np.max(np.abs(g.physical() - np.sin(grid.x))) < 1e-12

    def test_zero_field(self):
        grid = make_grid(32, 2 * np.pi)
        g = antiderivative(field_from_physical(grid, np.zeros(32)))
        assert np.max(np.abs(g.physical())) == 0.0

    def test_two_mode_combination(self):
        # analytic term-by-term integral of cos(2X) + sin(3X)
        grid = make_grid(64, 2 * np.pi)
        f = field_from_function(grid,
                                lambda x: np.cos(2 * x) + np.sin(3 * x))
        g = antiderivative(f)
        exact = np.sin(2 * grid.x) / 2 - np.cos(3 * grid.x) / 3
        assert np.max(np.abs(g.physical() - exact)) < 1e-12

    def test_nonzero_mean_rejected(self):
        grid = make_grid(32, 2 * np.pi)
        f = field_from_physical(grid, np.ones(32))
        with pytest.raises(ValueError):
            antiderivative(f)

    def test_left_inverse_of_derivative(self):
        grid = make_grid(64, 7.0)
        rng = np.random.default_rng(3)
        f = dealias(random_field(grid, rng))
        fh = f.fourier().copy()
        fh[0] = 0.0
        f = field_from_fourier(grid, fh)
        back = derivative(antiderivative(f), 1)
        assert np.max(np.abs(back.physical() - f.physical())) < 1e-10


class TestSemigroup:
    def test_heat_kernel_on_sin(self):
        grid = make_grid(64, 2 * np.pi)
        f = field_from_function(grid, np.sin)
        g = apply_semigroup(f, lambda k: -k ** 2, 1.0)
        assert np.max(np.abs(g.physical() - np.exp(-1) * np.sin(grid.x))) \
            < 1e-12

    def test_t_zero_identity(self):
        grid = make_grid(32, 2 * np.pi)
        f = random_field(grid, np.random.default_rng(4))
        g = apply_semigroup(f, lambda k: -k ** 2 + 1j * k, 0.0)
        assert np.max(np.abs(g.physical() - f.physical())) < 1e-14

    def test_oscillatory_scalar_exponential(self):
        omega0 = 1.3
        grid = make_grid(64, 2 * np.pi)
        f = field_from_function(grid, lambda x: np.exp(1j * x))
        g = apply_semigroup(f, lambda k: 1j * omega0 - k ** 2, 0.5)
        exact = np.exp((1j * omega0 - 1.0) * 0.5) * np.exp(1j * grid.x)
        assert np.max(np.abs(g.physical() - exact)) < 1e-12

    def test_composition_property(self):
        grid = make_grid(64, 3.0)
        f = random_field(grid, np.random.default_rng(5))
        sym = lambda k: -0.3 * k ** 2 + 0.7j * k  # noqa: E731
        one = apply_semigroup(f, sym, 0.9)
        two = apply_semigroup(apply_semigroup(f, sym, 0.4), sym, 0.5)
        assert np.max(np.abs(one.physical() - two.physical())) \
            <= 1e-12 * np.max(np.abs(f.physical()))

    def test_overflow_guard(self):
        grid = make_grid(32, 2 * np.pi)
        f = random_field(grid, np.random.default_rng(6))
        with pytest.warns(RuntimeWarning):
            apply_semigroup(f, lambda k: 0 * k + 1.0, 100.0)


class TestModeFilter:
    def test_pass_band(self):
        dt = 1.0
        grid = make_grid(128, 2 * np.pi / 0.05)
        k0 = 0.3 * dt
        j = round(k0 / (2 * np.pi / grid.length))
        f = field_from_function(
            grid, lambda x: np.exp(1j * j * 2 * np.pi / grid.length * x))
        g = mode_filter(f, dt)
        assert np.max(np.abs(g.physical() - f.physical())) < 1e-13

    def test_stop_band(self):
        dt = 1.0
        grid = make_grid(128, 2 * np.pi / 0.05)
        j = round(0.7 * dt / (2 * np.pi / grid.length))
        f = field_from_function(
            grid, lambda x: np.exp(1j * j * 2 * np.pi / grid.length * x))
        g = mode_filter(f, dt)
        assert np.max(np.abs(g.physical())) < 1e-13

    def test_linearity_two_modes(self):
        dt = 1.0
        grid = make_grid(128, 2 * np.pi / 0.05)
        dk = 2 * np.pi / grid.length
        jlow = round(0.3 * dt / dk)
        jhigh = round(0.7 * dt / dk)
        f = field_from_function(
            grid,
            lambda x: np.exp(1j * jlow * dk * x) + np.exp(1j * jhigh * dk * x))
        g = mode_filter(f, dt)
        low = np.exp(1j * jlow * dk * grid.x)
        assert np.max(np.abs(g.physical() - low)) < 1e-13

    def test_projection_on_plateaus(self):
        # applying the filter twice equals once for plateau-supported fields
        dt = 0.5
        grid = make_grid(256, 2 * np.pi / 0.02)
        rng = np.random.default_rng(7)
        fh = np.zeros(grid.n_points, dtype=complex)
        k = np.abs(grid.fft_k)
        plateau = (k <= 0.45 * dt) | (k >= 0.55 * dt)
        fh[plateau] = rng.standard_normal(plateau.sum()) \
            + 1j * rng.standard_normal(plateau.sum())
        f = field_from_fourier(grid, fh)
        once = mode_filter(f, dt).fourier()
        twice = mode_filter(mode_filter(f, dt), dt).fourier()
        assert np.max(np.abs(once - twice)) < 1e-14 * np.max(np.abs(fh))

    def test_profile_shape(self):
        dt = 2.0
        k = np.linspace(0, 2 * dt, 400)
        chi = chi_hat(k, dt)
        assert np.all(chi[k <= 0.45 * dt] == 1.0)
        assert np.all(chi[k >= 0.55 * dt] == 0.0)
        assert np.all((chi >= 0) & (chi <= 1))
        mid = (k >= 0.45 * dt) & (k <= 0.55 * dt)
        assert np.all(np.diff(chi[mid]) <= 1e-12)


class TestNorms:
    def test_constant(self):
        for length in (2 * np.pi, 11.0):
            grid = make_grid(32, length)
            f = field_from_physical(grid, np.ones(32))
            for s in (0.0, 1.0, 2.5):
                assert np.isclose(sobolev_norm(f, s), np.sqrt(length))

    def test_sin_l2(self):
        grid = make_grid(64, 2 * np.pi)
        f = field_from_function(grid, np.sin)
        assert np.isclose(sobolev_norm(f, 0), np.sqrt(np.pi))

    def test_sin_h1_against_quadrature(self):
        grid = make_grid(128, 2 * np.pi)
        f = field_from_function(grid, np.sin)
        # direct quadrature of |f|^2 + |f'|^2 on the grid
        quad = np.sqrt(np.sum(np.sin(grid.x) ** 2 + np.cos(grid.x) ** 2)
                       * grid.dx)
        assert np.isclose(sobolev_norm(f, 1), quad, rtol=1e-12)

    def test_parseval_random_fields(self):
        rng = np.random.default_rng(8)
        for n, length in ((64, 2 * np.pi), (128, 17.0)):
            grid = make_grid(n, length)
            f = random_field(grid, rng)
            quad = np.sqrt(np.sum(np.abs(f.physical()) ** 2) * grid.dx)
            assert abs(sobolev_norm(f, 0) - quad) <= 1e-10 * quad

    def test_negative_s_rejected(self):
        grid = make_grid(32, 2 * np.pi)
        f = field_from_physical(grid, np.ones(32))
        with pytest.raises(ValueError):
            sobolev_norm(f, -1.0)

    def test_lu_norm_length_invariant_for_constants(self):
        a = field_from_physical(make_grid(32, 2 * np.pi), np.ones(32))
        b = field_from_physical(make_grid(256, 200.0), np.ones(256))
        assert np.isclose(lu_norm(a, 0), lu_norm(b, 0))


class TestGridTransfer:
    def test_upsample_exact_for_bandlimited(self):
        coarse = make_grid(32, 2 * np.pi)
        fine = make_grid(96, 2 * np.pi / 0.25)
        f = field_from_function(coarse, lambda X: np.cos(3 * X) + 0.2)
        g = upsample(f, fine)
        exact = np.cos(3 * 0.25 * fine.x) + 0.2
        assert np.max(np.abs(g.physical() - exact)) < 1e-12

    def test_round_trip(self):
        coarse = make_grid(32, 2 * np.pi)
        fine = make_grid(128, 2 * np.pi)
        rng = np.random.default_rng(9)
        f = random_field(coarse, rng)
        back = downsample(upsample(f, fine), coarse)
        assert np.max(np.abs(back.physical() - f.physical())) < 1e-12

    def test_upsample_keeps_real(self):
        coarse = make_grid(32, 2 * np.pi)
        fine = make_grid(100, 2 * np.pi)
        f = random_field(coarse, np.random.default_rng(10), real=True)
        assert upsample(f, fine).is_real()


class TestDealias:
    def test_masks_top_third(self):
        grid = make_grid(96, 2 * np.pi)
        f = field_from_function(grid, lambda x: np.exp(40j * x))
        assert np.max(np.abs(dealias(f).physical())) < 1e-13

    def test_keeps_low_modes(self):
        grid = make_grid(96, 2 * np.pi)
        f = field_from_function(grid, lambda x: np.exp(5j * x))
        assert np.max(np.abs(dealias(f).physical() - f.physical())) < 1e-13


class TestCsvDump:
    def test_round_trip(self, tmp_path):
        grid = make_grid(32, 5.0)
        f = random_field(grid, np.random.default_rng(11))
        path = tmp_path / "field.csv"
        dump_field_csv(f, path, space="fourier")
        g = load_field_csv(path)
        assert g.grid == grid
        assert np.max(np.abs(g.fourier() - f.fourier())) < 1e-15
