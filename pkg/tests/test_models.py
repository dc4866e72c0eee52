"""Tests of the shipped model definitions and RHS evaluation."""

import numpy as np
import pytest

from hopfcl.models import (
    brusselator_cl,
    brusselator_hopf_parameter,
    evaluate_rhs,
    load_model_file,
    polynomial_model,
    toy_model,
)
from hopfcl.spectral import field_from_function, field_from_physical, make_grid


def sampled_class_invariants(model, rng, n_samples=48):
    """Stationary family f(0, v*) = 0 and quadratic order of g."""
    for v_star in rng.uniform(-1, 1, n_samples):
        u0 = np.zeros((model.d, 1))
        assert np.max(np.abs(model.f(u0, np.array([v_star])))) < 1e-14
    for _ in range(n_samples):
        u = rng.uniform(-0.1, 0.1, (model.d, 1))
        r = np.linalg.norm(u)
        if r == 0:
            continue
        g = model.g(u)
        assert abs(g[0]) <= 50.0 * r ** 2


class TestToyModel:
    def test_stationary_family_and_quadratic_g(self):
        sampled_class_invariants(toy_model(1.0, 0.1), np.random.default_rng(0))

    def test_cubic_term_at_unit_amplitude(self):
        # at u1 = 1 (p=1, q=0), v=0, omega0 chosen so linear part vanishes:
        # complex rhs is 3*1 - 1*1 = ... check against the displayed terms
        model = toy_model(2.0, 0.0)
        u = np.array([[1.0], [0.0]])
        v = np.array([0.0])
        f = model.f(u, v)
        # f_p = -omega0*q + 3p^2 - q^2 + 2vp - (p^2+q^2)p = 3 - 1 = 2
        # cubic contribution -u1^2 u-1 = -1 is part of that 2 = 3 + (-1)
        assert np.isclose(f[0, 0], 2.0)
        assert np.isclose(f[1, 0], 2.0 * 1.0)  # omega0 * p

    def test_v_rhs_zero_for_constant_u1(self):
        model = toy_model(1.0, 0.0)
        grid = make_grid(64, 2 * np.pi)
        u = [field_from_physical(grid, np.full(64, 0.3)),
             field_from_physical(grid, np.full(64, -0.1))]
        v = field_from_physical(grid, np.zeros(64))
        _, dv = evaluate_rhs(model, u, v)
        assert np.max(np.abs(dv.physical())) < 1e-14

    def test_jacobian_matches_fd(self):
        model = toy_model(1.3, 0.2)
        h = 1e-7
        jac = np.zeros((2, 2))
        for j in range(2):
            up = np.zeros((2, 1)); up[j, 0] = h
            um = np.zeros((2, 1)); um[j, 0] = -h
            jac[:, j] = ((model.f(up, np.zeros(1))
                          - model.f(um, np.zeros(1))) / (2 * h))[:, 0]
        assert np.max(np.abs(jac - model.jacobian)) < 1e-6


class TestBrusselator:
    @pytest.mark.parametrize("a,expected", [(1.0, 2.0), (2.0, 5.0)])
    def test_hopf_parameter(self, a, expected):
        assert brusselator_hopf_parameter(a) == expected

    def test_stationary_family(self):
        model = brusselator_cl(1.0, 2.0)
        sampled_class_invariants(model, np.random.default_rng(1))

    def test_rhs_zero_at_origin_any_constant_v(self):
        model = brusselator_cl(0.5, 1.25)
        grid = make_grid(32, 2 * np.pi)
        u = [field_from_physical(grid, np.zeros(32)) for _ in range(2)]
        v = field_from_physical(grid, np.full(32, 0.7))
        du, dv = evaluate_rhs(model, u, v)
        assert all(np.max(np.abs(d.physical())) < 1e-14 for d in du)
        assert np.max(np.abs(dv.physical())) < 1e-14


class TestEvaluateRhs:
    def test_zero_state(self):
        model = toy_model(1.0, 0.1)
        grid = make_grid(32, 2 * np.pi)
        u = [field_from_physical(grid, np.zeros(32)) for _ in range(2)]
        v = field_from_physical(grid, np.full(32, 0.5))
        du, dv = evaluate_rhs(model, u, v)
        assert all(np.max(np.abs(d.physical())) < 1e-14 for d in du)
        assert np.max(np.abs(dv.physical())) < 1e-14

    def test_dv_mean_always_zero(self):
        model = toy_model(1.0, 0.1)
        grid = make_grid(64, 2 * np.pi / 0.3)
        rng = np.random.default_rng(2)
        u = [field_from_physical(grid, 0.2 * rng.standard_normal(64))
             for _ in range(2)]
        v = field_from_physical(grid, 0.1 * rng.standard_normal(64))
        _, dv = evaluate_rhs(model, u, v)
        assert abs(dv.fourier()[0]) < 1e-15

    def test_toy_plane_wave_expansion(self):
        # u1 = eps e^(ix): linear part (-1 + i w0) u1, quadratics at modes
        # 0, +-2 of size eps^2
        omega0, eps = 1.0, 1e-3
        model = toy_model(omega0, 0.0)
        grid = make_grid(64, 2 * np.pi)
        wave = eps * np.exp(1j * grid.x)
        u = [field_from_physical(grid, wave.real),
             field_from_physical(grid, wave.imag)]
        v = field_from_physical(grid, np.zeros(64))
        du, _ = evaluate_rhs(model, u, v)
        du1 = du[0].physical() + 1j * du[1].physical()  # complex u1 equation
        duh = np.fft.fft(du1) / grid.n_points
        # linear part at mode +1
        assert np.abs(duh[1] - (1j * omega0 - 1.0) * eps) < 5 * eps ** 2
        # quadratic content at modes 0 and +-2: u1^2 -> e^{2ix},
        # u1 u-1 -> const, u-1^2 -> e^{-2ix}, each of size eps^2
        assert np.abs(duh[2] - eps ** 2) < 1e-3 * eps ** 2
        assert np.abs(duh[0] - eps ** 2) < 1e-3 * eps ** 2
        assert np.abs(duh[-2] - eps ** 2) < 1e-3 * eps ** 2

    def test_translation_equivariance(self):
        model = toy_model(1.0, 0.1)
        grid = make_grid(64, 2 * np.pi)
        rng = np.random.default_rng(3)
        up = [0.1 * rng.standard_normal(64) for _ in range(2)]
        vp = 0.05 * rng.standard_normal(64)
        du, dv = evaluate_rhs(model,
                              [field_from_physical(grid, a) for a in up],
                              field_from_physical(grid, vp))
        dus, dvs = evaluate_rhs(
            model,
            [field_from_physical(grid, np.roll(a, 1)) for a in up],
            field_from_physical(grid, np.roll(vp, 1)))
        for a, b in zip(du, dus):
            assert np.max(np.abs(np.roll(a.physical(), 1) - b.physical())) \
                < 1e-13
        assert np.max(np.abs(np.roll(dv.physical(), 1) - dvs.physical())) \
            < 1e-13

    def test_grid_mismatch_rejected(self):
        model = toy_model(1.0, 0.1)
        g1, g2 = make_grid(32, 2 * np.pi), make_grid(64, 2 * np.pi)
        u = [field_from_physical(g1, np.zeros(32)) for _ in range(2)]
        v = field_from_physical(g2, np.zeros(64))
        with pytest.raises(ValueError):
            evaluate_rhs(model, u, v)


class TestPolynomialModel:
    def test_round_trip_through_file(self, tmp_path):
        path = tmp_path / "model.txt"
        path.write_text(
            "# quadratic test model\n"
            "name = \"poly\"\n"
            "diffusion = [1.0, 2.0]\n"
            "d_v = 0.5\n"
            "f = [[[0.3, 1, 0, 0], [1.0, 0, 1, 1]], [[-0.2, 2, 0, 0]]]\n"
            "g = [[1.0, 2, 0], [0.5, 1, 1]]\n"
        )
        model = load_model_file(path)
        u = np.array([[0.2], [0.1]])
        v = np.array([0.4])
        f = model.f(u, v)
        assert np.isclose(f[0, 0], 0.3 * 0.2 + 0.1 * 0.4)
        assert np.isclose(f[1, 0], -0.2 * 0.04)
        assert np.isclose(model.g(u)[0], 0.04 + 0.5 * 0.02)
        assert np.isclose(model.jacobian[0, 0], 0.3)

    def test_rejects_nonstationary_f(self):
        with pytest.raises(ValueError):
            polynomial_model("bad", [1.0, 1.0], 1.0,
                             [[[1.0, 0, 0, 1]], []], [])

    def test_rejects_linear_g(self):
        with pytest.raises(ValueError):
            polynomial_model("bad", [1.0, 1.0], 1.0, [[], []],
                             [[1.0, 1, 0]])
