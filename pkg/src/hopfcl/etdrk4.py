"""ETDRK4 tableau coefficients for diagonal and 2x2-block Fourier symbols.

Fourth-order exponential time differencing Runge-Kutta in the Cox-Matthews
form, with the tableau functions evaluated by contour averaging around small
arguments as in Kassam & Trefethen (SIAM J. Sci. Comput. 26, 2005).  The
linear part is applied exactly; only the nonlinearity sees the RK stages.

Besides the usual diagonal (scalar symbol) case there is a 2x2-block path
for stiff linear parts of the form -k^2 D + J with a constant Jacobian J:
any analytic f of a 2x2 matrix M satisfies

    f(M) = c0 I + c1 (M - m I),   m = tr(M)/2,  theta^2 = m^2 - det(M),
    c0 = (f(m+theta) + f(m-theta))/2,  c1 = (f(m+theta) - f(m-theta))/(2 theta),

which stays stable through eigenvalue collisions (theta -> 0) with a
divided-difference guard.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = ["ScalarEtdrk4", "Block2Etdrk4", "etdrk4_step"]

_N_CONTOUR = 32
_SMALL_Z = 0.5
_THETA_GUARD = 1e-4


def _psi_exp_half(z):
    return np.exp(z / 2)


def _psi_exp(z):
    return np.exp(z)


def _psi_q(z):
    return (np.exp(z / 2) - 1.0) / z


def _psi_f1(z):
    return (-4.0 - z + np.exp(z) * (4.0 - 3.0 * z + z * z)) / z ** 3


def _psi_f2(z):
    return (2.0 + z + np.exp(z) * (-2.0 + z)) / z ** 3


def _psi_f3(z):
    return (-4.0 - 3.0 * z - z * z + np.exp(z) * (4.0 - z)) / z ** 3


def _eval_entire(fn, z):
    """Evaluate an entire function given by a removable-singularity formula.

    Direct evaluation away from the origin; near it, the mean over a unit
    circle of contour points equals the value by the mean value property.
    """
    z = np.asarray(z, dtype=complex)
    out = np.empty(z.shape, dtype=complex)
    big = np.abs(z) >= _SMALL_Z
    if np.any(big):
        out[big] = fn(z[big])
    if np.any(~big):
        pts = np.exp(2j * np.pi * (np.arange(_N_CONTOUR) + 0.5) / _N_CONTOUR)
        out[~big] = fn(z[~big][..., None] + pts).mean(axis=-1)
    return out


_TABLEAU = (("E", _psi_exp, False), ("E2", _psi_exp_half, False),
            ("Q", _psi_q, True), ("f1", _psi_f1, True),
            ("f2", _psi_f2, True), ("f3", _psi_f3, True))


@dataclass
class ScalarEtdrk4:
    """Tableau coefficient arrays for a diagonal symbol lam (any shape)."""

    E: np.ndarray
    E2: np.ndarray
    Q: np.ndarray
    f1: np.ndarray
    f2: np.ndarray
    f3: np.ndarray

    @classmethod
    def build(cls, lam, dt: float) -> "ScalarEtdrk4":
        z = np.asarray(lam, dtype=complex) * dt
        vals = {}
        for name, fn, weighted in _TABLEAU:
            v = _eval_entire(fn, z)
            vals[name] = dt * v if weighted else v
        return cls(**vals)

    def apply(self, name: str, u):
        return getattr(self, name) * u


@dataclass
class Block2Etdrk4:
    """Tableau coefficient tensors (..., 2, 2) for stacked 2x2 symbols."""

    E: np.ndarray
    E2: np.ndarray
    Q: np.ndarray
    f1: np.ndarray
    f2: np.ndarray
    f3: np.ndarray

    @classmethod
    def build(cls, mats, dt: float) -> "Block2Etdrk4":
        Z = np.asarray(mats, dtype=complex) * dt
        if Z.shape[-2:] != (2, 2):
            raise ValueError("block path expects (..., 2, 2) symbols")
        real_input = np.max(np.abs(np.asarray(mats).imag)) == 0 \
            if np.iscomplexobj(mats) else True
        m = 0.5 * (Z[..., 0, 0] + Z[..., 1, 1])
        det = Z[..., 0, 0] * Z[..., 1, 1] - Z[..., 0, 1] * Z[..., 1, 0]
        theta = np.sqrt((m * m - det).astype(complex))
        # guard the divided difference through collisions; the error is
        # O(|f'''| * guard^2) on the guarded modes only
        theta = np.where(np.abs(theta) < _THETA_GUARD, _THETA_GUARD, theta)
        N = Z - m[..., None, None] * np.eye(2)
        eye = np.eye(2)

        vals = {}
        for name, fn, weighted in _TABLEAU:
            fp = _eval_entire(fn, m + theta)
            fm = _eval_entire(fn, m - theta)
            c0 = 0.5 * (fp + fm)
            c1 = (fp - fm) / (2.0 * theta)
            F = c0[..., None, None] * eye + c1[..., None, None] * N
            if real_input:
                F = F.real.astype(float)
            vals[name] = dt * F if weighted else F
        return cls(**vals)

    def apply(self, name: str, u):
        """Apply the coefficient tensor to fields of shape (d, nk)."""
        return np.einsum("kab,bk->ak", getattr(self, name), u)


def etdrk4_step(coeffs, state, nonlinear):
    """One Cox-Matthews ETDRK4 step.

    ``coeffs`` supplies apply(name, u); ``state`` is the spectral state the
    coefficients act on; ``nonlinear`` maps a spectral state to the spectral
    nonlinear term.  Returns the advanced spectral state.
    """
    n0 = nonlinear(state)
    e2u = coeffs.apply("E2", state)
    a = e2u + coeffs.apply("Q", n0)
    na = nonlinear(a)
    b = e2u + coeffs.apply("Q", na)
    nb = nonlinear(b)
    c = coeffs.apply("E2", a) + coeffs.apply("Q", 2.0 * nb - n0)
    nc = nonlinear(c)
    return (coeffs.apply("E", state) + coeffs.apply("f1", n0)
            + 2.0 * coeffs.apply("f2", na + nb) + coeffs.apply("f3", nc))
