"""Tests for the Lyapunov functionals and absorbing-ball machinery."""

import numpy as np
import pytest

from hopfcl.amplitude import (AmplitudeState, AmplitudeSystem,
                              derive_coefficients_toy, integrate_amplitude,
                              normalize)
from hopfcl.energy import (
    absorbing_bound,
    absorbing_ball_experiment,
    condition_d_check,
    dissipation_check,
    energy_derivative,
    energy_majorant,
    lyapunov_level0,
)
from hopfcl.spectral import field_from_function, field_from_physical, \
    make_grid

GRID = make_grid(64, 2 * np.pi)


def fields(A_vals, B_vals):
    return (field_from_physical(GRID, A_vals),
            field_from_physical(GRID, B_vals))


class TestLyapunov:
    def test_constant_A(self):
        A, B = fields(np.ones(64), np.zeros(64))
        assert lyapunov_level0(A, B, 1.0) == pytest.approx(2 * np.pi)

    def test_cosine_B(self):
        # d^-1 cos = sin, integral of sin^2 over [0, 2 pi] is pi
        A, B = fields(np.zeros(64), np.cos(GRID.x))
        assert lyapunov_level0(A, B, 1.0) == pytest.approx(np.pi)

    def test_q_zero(self):
        rng = np.random.default_rng(0)
        a = rng.standard_normal(64)
        b = np.cos(GRID.x)
        A, B = fields(a, b)
        assert lyapunov_level0(A, B, 0.0) == pytest.approx(
            np.sum(a ** 2) * GRID.dx)

    def test_nonzero_mean_B_rejected(self):
        A, B = fields(np.zeros(64), np.ones(64))
        with pytest.raises(ValueError):
            lyapunov_level0(A, B, 1.0)

    def test_gauge_invariance(self):
        rng = np.random.default_rng(1)
        a = rng.standard_normal(64) + 1j * rng.standard_normal(64)
        b = np.cos(2 * GRID.x)
        e1 = lyapunov_level0(*fields(a, b), 1.0)
        e2 = lyapunov_level0(*fields(np.exp(0.7j) * a, b), 1.0)
        assert e1 == pytest.approx(e2, rel=1e-12)


class TestAbsorbingBound:
    def test_beta_positive_formula(self):
        b = absorbing_bound(2 * np.pi, 1.0, 1.0)
        assert b.C_inf0 == pytest.approx(2 * np.pi)
        assert b.q == 1.0 and b.r == 1.0

    def test_large_alpha(self):
        b = absorbing_bound(2 * np.pi, 4.0, 1.0)
        assert b.C_inf0 == pytest.approx(2 * np.pi * max(1, 0.25))

    def test_large_domain(self):
        L = 8 * np.pi
        b = absorbing_bound(L, 1.0, 2.0)
        assert b.C_inf0 == pytest.approx(L * L ** 2 / ((2 * np.pi) ** 2))

    def test_beta_negative_branch(self):
        b = absorbing_bound(2 * np.pi, 1.0, -0.5)
        assert b.q == pytest.approx(1.5)
        assert 0 < b.r < 1
        ok, _ = condition_d_check(b.q, b.r, 1.0, -0.5)
        assert ok

    def test_coeff_condition_gate(self):
        with pytest.raises(ValueError):
            absorbing_bound(2 * np.pi, 1.0, -1.0)


class TestConditionD:
    def test_cancellation_case(self):
        # q = beta, r = 1 reduces to 0 <= 0
        ok, _ = condition_d_check(1.0, 1.0, 1.0, 1.0)
        assert ok

    def test_boundary_coefficients_need_tiny_r(self):
        # at the edge of the coefficient condition only r ~ 0 passes
        alpha, beta = 1.0, -1.0 + 1e-6
        q = 2 * alpha + beta
        assert not condition_d_check(q, 0.5, alpha, beta)[0]
        assert not condition_d_check(q, 2.0 ** -10, alpha, beta)[0]
        assert condition_d_check(q, 2.0 ** -22, alpha, beta)[0]

    def test_alpha1_beta0_q2_threshold(self):
        # direction sweep: passes iff (q-beta)^2 <= 4 (1-r)^2 alpha q,
        # here iff (1-r)^2 >= 1/2, i.e. r <= 1 - 1/sqrt(2) ~ 0.293
        assert condition_d_check(2.0, 0.25, 1.0, 0.0)[0]
        assert not condition_d_check(2.0, 0.5, 1.0, 0.0)[0]

    def test_brute_force_oracle(self):
        # direct sampling over magnitudes confirms the direction sweep
        rng = np.random.default_rng(2)
        for _ in range(5):
            q = rng.uniform(0.5, 3)
            r = rng.uniform(0.05, 0.9)
            alpha = rng.uniform(0.3, 2)
            beta = rng.uniform(-0.2, 2)
            ok, _ = condition_d_check(q, r, alpha, beta)
            x = rng.uniform(0, 10, 4000)
            b = rng.uniform(-10, 10, 4000)
            lhs = (q - beta) * b * x
            rhs = (1 - r) * alpha * q * b ** 2 + (1 - r) * x ** 2
            brute = bool(np.all(lhs <= rhs + 1e-9))
            assert ok == brute

    def test_homogeneity_is_exact(self):
        # scaling (|A|^2, B) -> (s|A|^2, sB) scales both sides by s^2
        q, r, alpha, beta = 1.7, 0.3, 0.9, -0.4
        x, b, s = 0.6, -0.8, 37.5
        lhs = (q - beta) * b * x
        rhs = (1 - r) * alpha * q * b ** 2 + (1 - r) * x ** 2
        lhs_s = (q - beta) * (s * b) * (s * x)
        rhs_s = (1 - r) * alpha * q * (s * b) ** 2 + (1 - r) * (s * x) ** 2
        assert lhs_s == pytest.approx(s ** 2 * lhs)
        assert rhs_s == pytest.approx(s ** 2 * rhs)


def toy_system():
    n = normalize(derive_coefficients_toy(1.0))
    return AmplitudeSystem.from_normalized(n), n


class TestDissipation:
    def checkpoints(self, A0, B0, T_end=8.0, dT=2e-3, every=0.1):
        system, _ = toy_system()
        state = AmplitudeState(A=field_from_physical(GRID, A0),
                               B=field_from_physical(GRID, B0), T=0.0)
        states = [state]
        stride = int(round(every / dT))
        cur = state
        n_chunks = int(round(T_end / every))
        for _ in range(n_chunks):
            cur, _, _ = integrate_amplitude(system, cur, cur.T + every, dT,
                                            observer_stride=stride)
            states.append(cur)
        return system, states

    def test_inside_ball_stays(self):
        rng = np.random.default_rng(3)
        A0 = 0.5 * (rng.standard_normal(64) + 1j * rng.standard_normal(64))
        B0 = 0.2 * np.cos(GRID.x)
        system, states = self.checkpoints(A0, B0, T_end=6.0)
        bound = absorbing_bound(2 * np.pi, 1.0, 1.0)
        rep = dissipation_check(system, states, bound, 1.0, 1.0)
        assert rep.passed
        assert rep.entry_time == 0.0

    def test_outside_enters_with_finite_time(self):
        rng = np.random.default_rng(4)
        A0 = rng.standard_normal(64) + 1j * rng.standard_normal(64)
        B0 = np.cos(GRID.x)
        A0 *= np.sqrt(20.0 / (np.sum(np.abs(A0) ** 2) * GRID.dx))
        system, states = self.checkpoints(A0, B0, T_end=8.0)
        bound = absorbing_bound(2 * np.pi, 1.0, 1.0)
        rep = dissipation_check(system, states, bound, 1.0, 1.0)
        assert rep.E0[0] > 1.05 * bound.C_inf0
        assert rep.passed
        assert rep.entry_time is not None and rep.entry_time > 0

    def test_special_solution_energy_constant(self):
        # |A| = 1 orbit: E0 = L, inside the ball since C_inf0 >= L
        system, n = toy_system()
        from hopfcl.amplitude import special_periodic_solution
        sol = special_periodic_solution(0.0, n)
        states = []
        for T in np.linspace(0, 5, 11):
            A = np.full(64, sol.amplitude * np.exp(1j * sol.omega * T))
            states.append(AmplitudeState(
                A=field_from_physical(GRID, A),
                B=field_from_physical(GRID, np.zeros(64)), T=float(T)))
        bound = absorbing_bound(2 * np.pi, 1.0, 1.0)
        rep = dissipation_check(system, states, bound, 1.0, 1.0)
        assert np.allclose(rep.E0, 2 * np.pi, rtol=1e-12)
        assert rep.passed

    def test_weaker_majorant_of_beta_positive_computation(self):
        # dE0/dT never exceeds 2 int (1 - |A|^2) dX along trajectories
        rng = np.random.default_rng(5)
        A0 = 0.8 * (rng.standard_normal(64) + 1j * rng.standard_normal(64))
        B0 = 0.3 * np.sin(GRID.x)
        system, states = self.checkpoints(A0, B0, T_end=4.0)
        for s in states:
            de = energy_derivative(system, s, 1.0)
            weak = 2 * (2 * np.pi
                        - np.sum(np.abs(s.A.physical()) ** 2) * GRID.dx)
            assert de <= weak + 1e-6


class TestAbsorbingBallExperiment:
    def test_short_run_all_pass(self):
        reps = absorbing_ball_experiment(n_ics=3, E0_range=(4.0, 20.0),
                                         T_end=10.0)
        for rep in reps:
            assert rep.passed
            assert rep.worst_derivative_margin >= -1e-6
