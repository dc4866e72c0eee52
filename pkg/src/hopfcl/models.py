"""Reaction-diffusion models coupled to a diffusive conservation law.

The model class is

    u_t = D u_xx + f(u, v),        u(x,t) in R^d,
    v_t = d_v v_xx + (g(u))_xx,    v(x,t) in R,

with diagonal diffusion D, smooth f with f(0, v*) = 0 for every constant v*,
and g(u) = O(|u|^2).  The conservation-law form makes the spatial integral of
v invariant in time.

Shipped models: the complex oscillator toy system (stored in real
coordinates Re u1, Im u1) and the Brusselator with its kinetic parameter
replaced by v + b_tilde, plus user models given as polynomial coefficient
tables in a small text format (see ``load_model_file``).

Model records are immutable; pointwise evaluation is data parallel.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .spectral import Field, dealias_mask, field_from_fourier

__all__ = [
    "RDModel",
    "toy_model",
    "brusselator_cl",
    "brusselator_hopf_parameter",
    "polynomial_model",
    "load_model_file",
    "evaluate_rhs",
]


@dataclass(frozen=True)
class RDModel:
    """Model record for one system in the class above.

    ``f`` maps (u, v) with u of shape (d, n) and v of shape (n,) to the
    reaction term of shape (d, n); ``g`` maps u to the scalar coupling of
    shape (n,).  ``jacobian`` is du f(0,0); ``parameter`` the bifurcation
    parameter value and ``critical_parameter`` its critical value.
    ``ansatz_vector`` is the d-vector W with u ~ delta A1 e^(i w0 t) W + c.c.
    in the leading-order ansatz (amplitude normalization anchor).
    """

    name: str
    d: int
    diffusion: np.ndarray
    d_v: float
    f: Callable[[np.ndarray, np.ndarray], np.ndarray]
    g: Callable[[np.ndarray], np.ndarray]
    jacobian: np.ndarray
    parameter: float
    critical_parameter: float
    omega0: Optional[float] = None
    ansatz_vector: Optional[np.ndarray] = None

    def __post_init__(self):
        diff = np.asarray(self.diffusion, dtype=float)
        if diff.shape != (self.d,) or np.any(diff <= 0):
            raise ValueError("diffusion must be d positive reals")
        if self.d < 2:
            raise ValueError("model dimension d must be >= 2")
        if not self.d_v > 0:
            raise ValueError("d_v must be positive")
        jac = np.asarray(self.jacobian, dtype=float)
        if jac.shape != (self.d, self.d):
            raise ValueError("jacobian must be d x d")
        object.__setattr__(self, "diffusion", diff)
        object.__setattr__(self, "jacobian", jac)

    def f_nonlinear(self, u: np.ndarray, v: np.ndarray) -> np.ndarray:
        """Reaction term with the constant Jacobian part removed."""
        return self.f(u, v) - np.einsum("ab,bn->an", self.jacobian, u)


def toy_model(omega0: float, eps: float) -> RDModel:
    """Complex oscillator coupled to a conservation law, in real coordinates.

    The complex form is

        u1_t  = u1_xx + (i w0 + eps^2) u1 + u1^2 + u1 u-1 + u-1^2
                + v u1 + v u-1 - u1^2 u-1,        u-1 = conj(u1),
        v_t   = v_xx + (u1 u-1)_xx,

    stored as (p, q, v) = (Re u1, Im u1, v) so the generic real-field solver
    applies.  The quadratic sum u1^2 + u1 u-1 + u-1^2 + v(u1 + u-1) is real,
    so it enters only the p equation.
    """
    if not omega0 > 0:
        raise ValueError("omega0 must be positive")
    if eps < 0:
        raise ValueError("eps must be >= 0")
    eps2 = float(eps) ** 2

    def f(u, v):
        p, q = u[0], u[1]
        r2 = p * p + q * q
        fp = eps2 * p - omega0 * q + 3 * p * p - q * q + 2 * v * p - r2 * p
        fq = omega0 * p + eps2 * q - r2 * q
        return np.stack([fp, fq])

    def g(u):
        return u[0] * u[0] + u[1] * u[1]

    return RDModel(
        name="toy",
        d=2,
        diffusion=np.array([1.0, 1.0]),
        d_v=1.0,
        f=f,
        g=g,
        jacobian=np.array([[eps2, -omega0], [omega0, eps2]]),
        parameter=eps2,
        critical_parameter=0.0,
        omega0=float(omega0),
        # u1 = delta A1 e^(i w0 t) means (p, q) = delta A1 e^(i w0 t) W + c.c.
        ansatz_vector=np.array([0.5, -0.5j]),
    )


def brusselator_hopf_parameter(a: float) -> float:
    """Critical kinetic parameter of the long-wave Hopf instability."""
    return 1.0 + a * a


def brusselator_cl(a: float, b_tilde: float, d1: float = 1.0, d2: float = 1.0,
                   d_v: float = 1.0, g: Optional[Callable] = None) -> RDModel:
    """Brusselator around its homogeneous equilibrium, coupled to a
    conservation law by replacing the kinetic parameter b with v + b_tilde.

    The u equations are

        u1_t = d1 u1_xx + (b - 1) u1 + a^2 u2 + F(u1, u2),
        u2_t = d2 u2_xx - b u1 - a^2 u2 - F(u1, u2),

    with F = (b/a) u1^2 + 2 a u1 u2 + u1^2 u2 and b = v + b_tilde.  The
    conservation-law coupling defaults to g(u1, u2) = u1^2, the simplest
    quadratic in the class; it is configurable.
    """
    if not a > 0:
        raise ValueError("a must be positive")
    if min(d1, d2, d_v) <= 0:
        raise ValueError("diffusion coefficients must be positive")

    def f(u, v):
        u1, u2 = u[0], u[1]
        b = v + b_tilde
        big_f = (b / a) * u1 * u1 + 2 * a * u1 * u2 + u1 * u1 * u2
        f1 = (b - 1) * u1 + a * a * u2 + big_f
        f2 = -b * u1 - a * a * u2 - big_f
        return np.stack([f1, f2])

    if g is None:
        def g(u):
            return u[0] * u[0]

    b_hopf = brusselator_hopf_parameter(a)
    return RDModel(
        name="brusselator_cl",
        d=2,
        diffusion=np.array([d1, d2]),
        d_v=float(d_v),
        f=f,
        g=g,
        jacobian=np.array([[b_tilde - 1.0, a * a], [-b_tilde, -a * a]]),
        parameter=float(b_tilde),
        critical_parameter=b_hopf,
        omega0=float(a) if abs(b_tilde - b_hopf) < 1e-12 else None,
    )


def polynomial_model(name: str, diffusion, d_v: float, f_terms, g_terms,
                     parameter: float = 0.0,
                     critical_parameter: float = 0.0) -> RDModel:
    """User model from polynomial coefficient tables (degree <= 3).

    ``f_terms`` is a list of d lists; component i holds entries
    ``[coeff, p_1, ..., p_d, p_v]`` meaning coeff * u1^p1 ... ud^pd * v^pv.
    ``g_terms`` holds entries ``[coeff, p_1, ..., p_d]``.  Every f term needs
    total u power >= 1 (so f(0, v) = 0) and every g term total power >= 2.
    """
    diffusion = np.asarray(diffusion, dtype=float)
    d = diffusion.shape[0]

    cleaned_f = []
    for i, terms in enumerate(f_terms):
        comp = []
        for term in terms:
            coeff, *powers = term
            if len(powers) != d + 1:
                raise ValueError(
                    f"f term for component {i} needs {d + 1} powers")
            powers = [int(p) for p in powers]
            if sum(powers[:d]) < 1:
                raise ValueError(
                    "every f term needs total u power >= 1 "
                    "(stationary family f(0, v) = 0)")
            if sum(powers) > 3:
                raise ValueError("polynomial degree is limited to 3")
            comp.append((float(coeff), powers))
        cleaned_f.append(comp)
    cleaned_g = []
    for term in g_terms:
        coeff, *powers = term
        if len(powers) != d:
            raise ValueError(f"g term needs {d} powers")
        powers = [int(p) for p in powers]
        if sum(powers) < 2:
            raise ValueError("every g term needs total power >= 2 "
                             "(g(u) = O(|u|^2))")
        if sum(powers) > 3:
            raise ValueError("polynomial degree is limited to 3")
        cleaned_g.append((float(coeff), powers))

    def f(u, v):
        out = np.zeros_like(u)
        for i, comp in enumerate(cleaned_f):
            acc = out[i]
            for coeff, powers in comp:
                term = np.full(u.shape[1], coeff)
                for j in range(d):
                    for _ in range(powers[j]):
                        term = term * u[j]
                for _ in range(powers[d]):
                    term = term * v
                acc += term
        return out

    def g(u):
        out = np.zeros(u.shape[1])
        for coeff, powers in cleaned_g:
            term = np.full(u.shape[1], coeff)
            for j in range(d):
                for _ in range(powers[j]):
                    term = term * u[j]
            out += term
        return out

    jac = np.zeros((d, d))
    for i, comp in enumerate(cleaned_f):
        for coeff, powers in comp:
            if sum(powers) == 1 and powers[d] == 0:
                jac[i, powers[:d].index(1)] += coeff

    return RDModel(name=name, d=d, diffusion=diffusion, d_v=float(d_v),
                   f=f, g=g, jacobian=jac, parameter=parameter,
                   critical_parameter=critical_parameter)


def load_model_file(path) -> RDModel:
    """Parse a model definition file (key = value lines, JSON values).

    Keys: name, diffusion, d_v, f (list of per-component term lists),
    g (term list), parameter, critical_parameter.  See the README for the
    schema and an example.
    """
    data = {}
    with open(path) as fh:
        for line in fh:
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            key, _, value = line.partition("=")
            data[key.strip()] = json.loads(value.strip())
    try:
        return polynomial_model(
            name=data.get("name", "user"),
            diffusion=data["diffusion"],
            d_v=data["d_v"],
            f_terms=data["f"],
            g_terms=data["g"],
            parameter=data.get("parameter", 0.0),
            critical_parameter=data.get("critical_parameter", 0.0),
        )
    except KeyError as exc:
        raise ValueError(f"model file missing key {exc}") from exc


def evaluate_rhs(model: RDModel, u_fields, v_field: Field,
                 dealias: bool = True):
    """Right-hand side of the model: (D u_xx + f(u,v), d_v v_xx + (g(u))_xx).

    Nonlinearities are evaluated pointwise in physical space; the products
    are masked with the 2/3 rule unless ``dealias`` is False.  All fields
    must share one grid.
    """
    grid = v_field.grid
    if any(uf.grid != grid for uf in u_fields):
        raise ValueError("all fields must share one grid")
    if len(u_fields) != model.d:
        raise ValueError(f"expected {model.d} u components")

    k2 = grid.fft_k ** 2
    mask = dealias_mask(grid) if dealias else 1.0

    u_phys = np.stack([uf.physical().real for uf in u_fields])
    v_phys = v_field.physical().real
    f_hat = np.fft.fft(model.f(u_phys, v_phys), axis=-1) / grid.n_points
    g_hat = np.fft.fft(model.g(u_phys)) / grid.n_points

    du = []
    for j, uf in enumerate(u_fields):
        duh = -model.diffusion[j] * k2 * uf.fourier() + mask * f_hat[j]
        du.append(field_from_fourier(grid, duh))
    dvh = -k2 * (model.d_v * v_field.fourier() + mask * g_hat)
    return du, field_from_fourier(grid, dvh)
