"""The derived amplitude system: a Ginzburg-Landau equation coupled to a
scalar conservation law.

General form (raw coefficients a0..a3, b0, b1):

    A_T = a0 A_XX + gain a1 A + a2 A B - a3 A |A|^2,
    B_T = b0 B_XX + b1 (|A|^2)_XX,

with Re a0 > 0, a1 > 0, b0 > 0, Re a3 > 0.  Rescaling A, B, T, X (and
possibly the sign of B) eliminates four coefficients and yields the
normalized form

    A_T = (1 + i gamma0) A_XX + A + beta A B - (1 + i gamma3) A |A|^2,
    B_T = alpha B_XX + (|A|^2)_XX,

where the forcing term is dropped entirely when b1 = 0.  The module holds
the coefficient records and the normalization recipe, the X-independent
time-periodic solutions, mean splitting of B, a spectral ETDRK4 solver
(shared tableau machinery with the full-system solver, slow grid of length
2 pi by default), and a residual evaluator used by the verification tests.

Trajectories are advanced sequentially; independent trajectories (or a
batched ensemble along a leading axis) run concurrently with no shared
state.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .etdrk4 import ScalarEtdrk4
from .spectral import (Field, SpectralGrid, dealias_mask, field_from_fourier,
                       field_from_physical, make_grid)

__all__ = [
    "AmplitudeCoefficients",
    "NormalizedCoefficients",
    "AmplitudeSystem",
    "AmplitudeState",
    "AmplitudeIntegrator",
    "SpecialSolution",
    "derive_coefficients_toy",
    "normalize",
    "coeff_condition",
    "special_periodic_solution",
    "split_mean",
    "amplitude_rhs",
    "amplitude_rhs_residual",
    "step_amplitude",
    "integrate_amplitude",
    "mean_value",
    "unnormalize_fields",
    "write_coefficients",
    "read_coefficients",
]


@dataclass(frozen=True)
class AmplitudeCoefficients:
    a0: complex
    a1: float
    a2: float
    a3: complex
    b0: float
    b1: float

    def __post_init__(self):
        if not (self.a0.real > 0 and self.b0 > 0 and self.a1 > 0
                and self.a3.real > 0):
            raise ValueError(
                "need Re a0 > 0, a1 > 0, b0 > 0, Re a3 > 0; got "
                f"a0={self.a0}, a1={self.a1}, a3={self.a3}, b0={self.b0}")


@dataclass(frozen=True)
class NormalizedCoefficients:
    alpha: float
    beta: float
    gamma0: float
    gamma3: float
    c_A: float
    c_B: float
    c_T: float
    c_X: float
    b1_zero: bool = False

    def __post_init__(self):
        if not self.alpha > 0:
            raise ValueError("alpha must be positive")

    @property
    def scales(self):
        return (self.c_A, self.c_B, self.c_T, self.c_X)


def derive_coefficients_toy(omega0: float) -> AmplitudeCoefficients:
    """Amplitude coefficients of the oscillator toy system.

    Eliminating the second-harmonic and mean fields from the multiple-scales
    expansion leaves a0 = a1 = a2 = b0 = b1 = 1 and the cubic coefficient
    a3 = 1 + 2 i / (3 omega0).
    """
    if not omega0 > 0:
        raise ValueError("omega0 must be positive")
    return AmplitudeCoefficients(
        a0=1.0 + 0.0j, a1=1.0, a2=1.0,
        a3=1.0 + 2.0j / (3.0 * omega0), b0=1.0, b1=1.0)


def normalize(c: AmplitudeCoefficients) -> NormalizedCoefficients:
    """Rescale A, B, T, X to the normalized system.

    c_T a1 = 1; c_A > 0 with c_T Re(a3) c_A^2 = 1; c_X > 0 with
    c_T Re(a0) c_X^-2 = 1; c_B with c_T b1 c_A^2 c_X^-2 c_B^-1 = 1 when
    b1 != 0 (a negative b1 flips the sign of B through c_B).  When b1 = 0
    the (|A|^2)_XX forcing drops and c_B is free; we set c_B = 1.
    """
    c_T = 1.0 / c.a1
    c_A = float(np.sqrt(1.0 / (c_T * c.a3.real)))
    c_X = float(np.sqrt(c_T * c.a0.real))
    if c.b1 != 0:
        c_B = c_T * c.b1 * c_A ** 2 / c_X ** 2
        b1_zero = False
    else:
        c_B = 1.0
        b1_zero = True
    alpha = c_T * c.b0 / c_X ** 2
    beta = c_T * c.a2 * c_B
    gamma0 = (c_T * c.a0 / c_X ** 2).imag
    gamma3 = (c_T * c.a3 * c_A ** 2).imag
    return NormalizedCoefficients(alpha=float(alpha), beta=float(beta),
                                  gamma0=float(gamma0), gamma3=float(gamma3),
                                  c_A=c_A, c_B=float(c_B), c_T=float(c_T),
                                  c_X=c_X, b1_zero=b1_zero)


def coeff_condition(n: NormalizedCoefficients):
    """Sign condition on the effective cubic interaction.

    Returns (satisfied, margin) with margin = 1 + beta / alpha; the
    condition holds when the margin is positive.
    """
    margin = 1.0 + n.beta / n.alpha
    return margin > 0, float(margin)


@dataclass(frozen=True)
class AmplitudeSystem:
    """Coefficient record the solver integrates.

    A_T = dA A_XX + gain A + beta A B - c3 A |A|^2
    B_T = alpha B_XX + mu (|A|^2)_XX
    """

    dA: complex
    gain: float
    beta: float
    c3: complex
    alpha: float
    mu: float

    @classmethod
    def from_normalized(cls, n: NormalizedCoefficients,
                        eps_over_delta: float = 1.0) -> "AmplitudeSystem":
        return cls(dA=1.0 + 1j * n.gamma0, gain=eps_over_delta ** 2,
                   beta=n.beta, c3=1.0 + 1j * n.gamma3, alpha=n.alpha,
                   mu=0.0 if n.b1_zero else 1.0)

    @classmethod
    def from_raw(cls, c: AmplitudeCoefficients,
                 eps_over_delta: float = 1.0) -> "AmplitudeSystem":
        return cls(dA=c.a0, gain=eps_over_delta ** 2 * c.a1, beta=c.a2,
                   c3=c.a3, alpha=c.b0, mu=c.b1)


@dataclass(frozen=True)
class AmplitudeState:
    """Amplitude pair (A, B) at slow time T on the slow grid."""

    A: Field
    B: Field
    T: float

    def __post_init__(self):
        if self.A.grid != self.B.grid:
            raise ValueError("A and B must share one grid")

    @property
    def grid(self) -> SpectralGrid:
        return self.A.grid


def mean_value(f: Field) -> float:
    return float(f.fourier()[0].real)


def split_mean(B: Field, beta: float):
    """Split B = b + B_tilde with zero-mean B_tilde.

    Returns (b, B_tilde, shifted_gain) where shifted_gain = 1 + beta b is
    the modified linear gain of the A equation after the shift.
    """
    bh = B.fourier().copy()
    b = float(bh[0].real)
    bh[0] = 0.0
    return b, field_from_fourier(B.grid, bh), 1.0 + beta * b


@dataclass(frozen=True)
class SpecialSolution:
    branch: str  # "periodic" or "stationary"
    amplitude: float
    omega: float
    b: float


def special_periodic_solution(b: float, n: NormalizedCoefficients) \
        -> SpecialSolution:
    """X-independent time-periodic solutions of the normalized system.

    For 1 + beta b > 0: B = b, A = Ahat e^(i omega T) with
    |Ahat|^2 = 1 + beta b and omega = -|Ahat|^2 gamma3.  Otherwise only the
    stationary branch A = 0, B = b remains.
    """
    gain = 1.0 + n.beta * b
    if gain > 0:
        amp = float(np.sqrt(gain))
        return SpecialSolution("periodic", amp, float(-gain * n.gamma3), b)
    return SpecialSolution("stationary", 0.0, 0.0, b)


def amplitude_rhs(system: AmplitudeSystem, state: AmplitudeState,
                  dealias: bool = True):
    """Spectral evaluation of the right-hand side; returns (dA, dB) Fields."""
    grid = state.grid
    k2 = grid.fft_k ** 2
    mask = dealias_mask(grid) if dealias else 1.0
    A = state.A.physical()
    B = state.B.physical().real
    na = system.beta * A * B - system.c3 * A * np.abs(A) ** 2
    na_hat = np.fft.fft(na) / grid.n_points * mask
    dA_hat = (-system.dA * k2 + system.gain) * state.A.fourier() + na_hat
    nb_hat = np.fft.fft(np.abs(A) ** 2) / grid.n_points * mask
    dB_hat = -k2 * (system.alpha * state.B.fourier() + system.mu * nb_hat)
    return (field_from_fourier(grid, dA_hat),
            field_from_fourier(grid, dB_hat))


def amplitude_rhs_residual(system: AmplitudeSystem, state: AmplitudeState,
                           dA_dT: Field, dB_dT: Field) -> float:
    """Sup norm of (candidate time derivative - RHS), both components."""
    rA, rB = amplitude_rhs(system, state)
    res_a = np.max(np.abs(dA_dT.physical() - rA.physical()))
    res_b = np.max(np.abs(dB_dT.physical() - rB.physical()))
    return float(max(res_a, res_b))


class AmplitudeIntegrator:
    """ETDRK4 for the amplitude system on the slow periodic grid.

    States may carry a leading batch axis (ensembles integrate together);
    the nonlinearity is dealiased with the 2/3 rule.
    """

    def __init__(self, system: AmplitudeSystem, grid: SpectralGrid,
                 dT: float, dealias: bool = True):
        if dT <= 0:
            raise ValueError("dT must be positive")
        self.system = system
        self.grid = grid
        self.dT = dT
        k2 = grid.fft_k ** 2
        self.coeffs_A = ScalarEtdrk4.build(-system.dA * k2 + system.gain, dT)
        self.coeffs_B = ScalarEtdrk4.build(-system.alpha * k2, dT)
        self.mask = dealias_mask(grid) if dealias else np.ones(
            grid.n_points, bool)
        self.neg_k2_masked = -k2 * self.mask
        self.n = grid.n_points

    def _nonlinear(self, Ah, Bh):
        A = np.fft.ifft(Ah, axis=-1) * self.n
        B = (np.fft.ifft(Bh, axis=-1) * self.n).real
        sq = np.abs(A) ** 2
        na = self.system.beta * A * B - self.system.c3 * A * sq
        na_hat = np.fft.fft(na, axis=-1) / self.n * self.mask
        nb_hat = (self.neg_k2_masked * self.system.mu
                  * np.fft.fft(sq, axis=-1) / self.n)
        return na_hat, nb_hat

    def step_hat(self, Ah, Bh):
        ca, cb = self.coeffs_A, self.coeffs_B
        n0a, n0b = self._nonlinear(Ah, Bh)
        e2a, e2b = ca.E2 * Ah, cb.E2 * Bh
        aa, ab = e2a + ca.Q * n0a, e2b + cb.Q * n0b
        naa, nab = self._nonlinear(aa, ab)
        ba, bb = e2a + ca.Q * naa, e2b + cb.Q * nab
        nba, nbb = self._nonlinear(ba, bb)
        ca_s = ca.E2 * aa + ca.Q * (2 * nba - n0a)
        cb_s = cb.E2 * ab + cb.Q * (2 * nbb - n0b)
        nca, ncb = self._nonlinear(ca_s, cb_s)
        Ah = ca.E * Ah + ca.f1 * n0a + 2 * ca.f2 * (naa + nba) + ca.f3 * nca
        Bh = cb.E * Bh + cb.f1 * n0b + 2 * cb.f2 * (nab + nbb) + cb.f3 * ncb
        return Ah, Bh


_amp_cache: dict = {}


def _get_integrator(system, grid, dT) -> AmplitudeIntegrator:
    key = (system, grid.n_points, grid.length, dT)
    integ = _amp_cache.get(key)
    if integ is None:
        integ = AmplitudeIntegrator(system, grid, dT)
        _amp_cache[key] = integ
    return integ


def step_amplitude(system, state: AmplitudeState, dT: float,
                   eps_over_delta: float = 1.0) -> AmplitudeState:
    """One ETDRK4 step of the amplitude system.

    ``system`` may be an AmplitudeSystem, NormalizedCoefficients, or raw
    AmplitudeCoefficients; the generalized linear gain (eps/delta)^2 applies
    in the latter two cases.
    """
    system = _as_system(system, eps_over_delta)
    integ = _get_integrator(system, state.grid, dT)
    Ah, Bh = integ.step_hat(state.A.fourier(), state.B.fourier())
    if not (np.all(np.isfinite(Ah)) and np.all(np.isfinite(Bh))):
        raise RuntimeError(f"non-finite amplitude state at T = {state.T}")
    return AmplitudeState(A=field_from_fourier(state.grid, Ah),
                          B=field_from_fourier(state.grid, Bh),
                          T=state.T + dT)


def _as_system(system, eps_over_delta=1.0) -> AmplitudeSystem:
    if isinstance(system, AmplitudeSystem):
        return system
    if isinstance(system, NormalizedCoefficients):
        return AmplitudeSystem.from_normalized(system, eps_over_delta)
    if isinstance(system, AmplitudeCoefficients):
        return AmplitudeSystem.from_raw(system, eps_over_delta)
    raise TypeError(f"cannot build an amplitude system from {system!r}")


def integrate_amplitude(system, state: AmplitudeState, T_end: float,
                        dT: float, observers=None, observer_stride: int = 10,
                        eps_over_delta: float = 1.0):
    """Repeated stepping; returns (final_state, times, observations)."""
    system = _as_system(system, eps_over_delta)
    integ = _get_integrator(system, state.grid, dT)
    observers = observers or {}
    times = [state.T]
    obs = {name: [fn(state)] for name, fn in observers.items()}
    n_steps = int(round((T_end - state.T) / dT))
    Ah, Bh = state.A.fourier().copy(), state.B.fourier().copy()
    T0 = state.T
    for i in range(1, n_steps + 1):
        Ah, Bh = integ.step_hat(Ah, Bh)
        if (i % observer_stride == 0) or i == n_steps:
            cur = AmplitudeState(A=field_from_fourier(state.grid, Ah),
                                 B=field_from_fourier(state.grid, Bh),
                                 T=T0 + i * dT)
            if not np.all(np.isfinite(Ah)):
                raise RuntimeError(f"non-finite state at T = {cur.T}")
            times.append(cur.T)
            for name, fn in observers.items():
                obs[name].append(fn(cur))
    final = AmplitudeState(A=field_from_fourier(state.grid, Ah),
                           B=field_from_fourier(state.grid, Bh),
                           T=T0 + n_steps * dT)
    return final, times, obs


def unnormalize_fields(n: NormalizedCoefficients, state: AmplitudeState):
    """Map a normalized state back to original-coefficient variables.

    A = c_A A~(X / c_X), B = c_B B~(X / c_X); the returned state lives on a
    grid stretched by c_X, and times map as T = c_T T~.
    """
    grid = state.grid
    stretched = make_grid(grid.n_points, grid.length * n.c_X)
    return AmplitudeState(
        A=field_from_physical(stretched, n.c_A * state.A.physical()),
        B=field_from_physical(stretched, n.c_B * state.B.physical()),
        T=n.c_T * state.T)


def write_coefficients(path, c: AmplitudeCoefficients) -> None:
    """Structured text with complex values written as (re, im) pairs."""
    with open(path, "w") as fh:
        for name in ("a0", "a1", "a2", "a3", "b0", "b1"):
            z = complex(getattr(c, name))
            fh.write(f"{name} = ({z.real!r}, {z.imag!r})\n")


def read_coefficients(path) -> AmplitudeCoefficients:
    vals = {}
    with open(path) as fh:
        for line in fh:
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            name, _, rest = line.partition("=")
            re_s, im_s = rest.strip().strip("()").split(",")
            vals[name.strip()] = complex(float(re_s), float(im_s))
    return AmplitudeCoefficients(
        a0=vals["a0"], a1=vals["a1"].real, a2=vals["a2"].real,
        a3=vals["a3"], b0=vals["b0"].real, b1=vals["b1"].real)
