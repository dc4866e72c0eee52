"""Linearized spectrum of the model class and the mode machinery built on it.

The linearization at the trivial state decouples in Fourier space into the
u block  lambda uhat = (-k^2 D + du f(0,0)) uhat  and the conservation-law
mode  lambda_0(k) = -d_v k^2.  This module computes the eigenvalue curves
lambda_j(k) with eigenvector continuation in k, checks the spectral
assumption behind the long-wave Hopf setting, builds the spectral
projections onto the critical pair, splits states into critical and stable
parts with the smooth mode filter, evaluates non-resonance margins for the
normal-form transform, and fits the semigroup decay bounds.

Everything here is a pure computation over immutable inputs; k-sample loops
carry no shared mutable state.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np
from scipy.optimize import brentq, linear_sum_assignment

from .models import RDModel
from .spectral import Field, chi_hat, field_from_fourier

__all__ = [
    "ModelLinearization",
    "DispersionData",
    "SpecReport",
    "ProjectionPair",
    "ModeSplitResult",
    "DecayFitReport",
    "linearize",
    "dispersion_curves",
    "check_spec",
    "spectral_projections",
    "mode_split",
    "nonresonance_margin",
    "semigroup_decay_check",
    "estimate_rho",
    "find_critical_parameter",
    "export_dispersion_csv",
]


class ContinuationError(RuntimeError):
    pass


@dataclass(frozen=True)
class ModelLinearization:
    """Constant-coefficient linearization data of a model at the origin."""

    d: int
    diffusion: np.ndarray
    d_v: float
    jacobian: np.ndarray
    parameter: float = 0.0

    def __post_init__(self):
        if np.any(np.asarray(self.diffusion) <= 0) or self.d_v <= 0:
            raise ValueError("diffusion entries and d_v must be positive")

    def symbol(self, k) -> np.ndarray:
        """u-block symbol -k^2 D + J, shape (..., d, d) for array k."""
        k = np.asarray(k, dtype=float)
        eye = np.diag(self.diffusion)
        return (-(k[..., None, None] ** 2) * eye[None, :, :]
                + self.jacobian[None, :, :]) if k.ndim else \
            (-(k ** 2) * eye + self.jacobian)

    def omega0(self) -> float:
        """Hopf frequency read off at k = 0 (largest imaginary part)."""
        return float(np.max(np.linalg.eigvals(self.jacobian).imag))


def linearize(model: RDModel) -> ModelLinearization:
    return ModelLinearization(model.d, model.diffusion, model.d_v,
                              model.jacobian, model.parameter)


@dataclass
class DispersionData:
    """Eigenvalue curves and matched eigenvectors over k samples.

    ``curves[j-1]`` holds lambda_j(k) for the u block (labeled so that
    Re lambda_1(0) is maximal and Im lambda_1(0) = +omega_0 for the Hopf
    pair); ``lambda0`` holds the conservation-law curve -d_v k^2 exactly.
    ``eigenvectors[j-1, i]`` is the unit eigenvector of curve j at sample i,
    phase-aligned along the curve.
    """

    k_samples: np.ndarray
    curves: np.ndarray
    lambda0: np.ndarray
    eigenvectors: np.ndarray
    parameter: float
    min_overlap: float
    defective_ks: list = field(default_factory=list)

    @property
    def d(self) -> int:
        return self.curves.shape[0]

    def curve_index_for_sign(self, sign: int) -> int:
        """Index into ``curves`` of the Hopf branch with Im lambda(0) of
        the given sign."""
        i0 = int(np.argmin(np.abs(self.k_samples)))
        ims = self.curves[:, i0].imag
        return int(np.argmax(sign * ims))


def dispersion_curves(lin: ModelLinearization, k_samples) -> DispersionData:
    """Eigenvalue curves of the u block plus lambda_0(k) = -d_v k^2.

    Curves are continued in k by eigenvector overlap matching starting at
    the sample closest to k = 0, then labeled so Re lambda_1(0) is maximal
    (ties broken toward Im lambda_1(0) > 0).  Raises ContinuationError when
    the best matching overlap drops below 0.5; near-defective symbols are
    flagged in ``defective_ks``.
    """
    k = np.asarray(k_samples, dtype=float)
    if k.ndim != 1 or k.size == 0 or not np.all(np.isfinite(k)):
        raise ValueError("k_samples must be a finite 1-d array")
    if np.any(np.diff(k) <= 0):
        raise ValueError("k_samples must be strictly increasing")
    d = lin.d
    nk = k.size

    mats = lin.symbol(k)
    vals, vecs = np.linalg.eig(mats)
    vecs = vecs / np.linalg.norm(vecs, axis=1, keepdims=True)

    conds = np.linalg.cond(vecs)
    defective = [float(k[i]) for i in np.nonzero(conds > 1e8)[0]]

    curves = np.empty((d, nk), dtype=complex)
    eigvecs = np.empty((d, nk, d), dtype=complex)

    i0 = int(np.argmin(np.abs(k)))
    # anchor labeling: Re descending, then Im descending
    order = np.lexsort((-vals[i0].imag, -vals[i0].real))
    curves[:, i0] = vals[i0][order]
    eigvecs[:, i0, :] = vecs[i0][:, order].T

    min_overlap = 1.0

    def continue_from(prev_idx, idx):
        nonlocal min_overlap
        prev = eigvecs[:, prev_idx, :]
        overlap = np.abs(prev.conj() @ vecs[idx])
        rows, cols = linear_sum_assignment(-overlap)
        best = overlap[rows, cols].min()
        min_overlap = min(min_overlap, float(best))
        if best < 0.5:
            raise ContinuationError(
                f"eigenvector continuation failed at k = {k[idx]:.6g} "
                f"(overlap {best:.3f})")
        for j, col in zip(rows, cols):
            v = vecs[idx][:, col]
            phase = np.vdot(prev[j], v)
            if phase != 0:
                v = v * (phase.conjugate() / abs(phase))
            eigvecs[j, idx, :] = v
            curves[j, idx] = vals[idx][col]

    for i in range(i0 + 1, nk):
        continue_from(i - 1, i)
    for i in range(i0 - 1, -1, -1):
        continue_from(i + 1, i)

    return DispersionData(
        k_samples=k, curves=curves, lambda0=-lin.d_v * k ** 2,
        eigenvectors=eigvecs, parameter=lin.parameter,
        min_overlap=min_overlap, defective_ks=defective)


@dataclass
class SpecReport:
    """Numerical check of the spectral assumption at criticality."""

    omega0: float
    re_lambda_at_0: float
    slope_at_0: float
    curvature_at_0: float
    other_max_re: Optional[float]
    parameter_derivative: Optional[float]
    passes: dict

    @property
    def passes_all(self) -> bool:
        return all(self.passes.values())

    def to_dict(self) -> dict:
        return {
            "omega0": self.omega0,
            "re_lambda_at_0": self.re_lambda_at_0,
            "slope_at_0": self.slope_at_0,
            "curvature_at_0": self.curvature_at_0,
            "other_max_re": self.other_max_re,
            "parameter_derivative": self.parameter_derivative,
            "passes": dict(self.passes),
            "passes_all": self.passes_all,
        }


# tolerances: finite-difference noise floor at step 1e-3
_RE_TOL = 1e-8
_SLOPE_TOL = 1e-6
_CONCAVITY_TOL = -1e-6


def check_spec(data: DispersionData,
               parameter_sweep: Sequence[DispersionData] = ()) -> SpecReport:
    """Evaluate the clauses of the spectral assumption on dispersion data.

    Uses fourth-order central differences at k = 0 (the curves are analytic
    there), so the data must contain a uniform grid of spacing <= 1e-3
    around k = 0.  The parameter derivative of Re lambda_1(0) comes from a
    least-squares fit over ``parameter_sweep``.
    """
    k = data.k_samples
    i0 = int(np.argmin(np.abs(k)))
    if abs(k[i0]) > 1e-12:
        raise ValueError("data must contain the sample k = 0")
    if i0 < 2 or i0 > k.size - 3:
        raise ValueError("need at least two samples on each side of k = 0")
    h = k[i0 + 1] - k[i0]
    spacing = np.diff(k[i0 - 2:i0 + 3])
    if np.max(np.abs(spacing - h)) > 1e-12 * max(abs(h), 1) or h > 1e-3 + 1e-12:
        raise ValueError(
            "insufficient sampling near k = 0: need uniform spacing <= 1e-3")

    jp = data.curve_index_for_sign(+1)
    lam = data.curves[jp, i0 - 2:i0 + 3]
    d1 = (-lam[4] + 8 * lam[3] - 8 * lam[1] + lam[0]) / (12 * h)
    d2 = (-lam[4] + 16 * lam[3] - 30 * lam[2] + 16 * lam[1] - lam[0]) \
        / (12 * h * h)

    others = [j for j in range(data.d)
              if j not in (jp, data.curve_index_for_sign(-1))]
    other_max_re = (max(float(data.curves[j, i0].real) for j in others)
                    if others else None)

    if parameter_sweep:
        ps, res = [], []
        for sweep in parameter_sweep:
            j0 = int(np.argmin(np.abs(sweep.k_samples)))
            ps.append(sweep.parameter)
            res.append(sweep.curves[sweep.curve_index_for_sign(+1), j0].real)
        if len(set(ps)) < 2:
            raise ValueError("parameter sweep needs >= 2 distinct values")
        slope = np.polyfit(ps, res, 1)[0]
        parameter_derivative = float(slope)
    else:
        parameter_derivative = None

    omega0 = float(lam[2].imag)
    re0 = float(lam[2].real)
    report = SpecReport(
        omega0=omega0,
        re_lambda_at_0=re0,
        slope_at_0=float(abs(d1)),
        curvature_at_0=float(d2.real),
        other_max_re=other_max_re,
        parameter_derivative=parameter_derivative,
        passes={
            "criticality": abs(re0) < _RE_TOL,
            "zero_slope": abs(d1) < _SLOPE_TOL,
            "strict_concavity": d2.real < _CONCAVITY_TOL,
            "positive_frequency": omega0 > 0,
            "others_stable": other_max_re is None or other_max_re < 0,
            "parameter_monotone": (parameter_derivative is not None
                                   and parameter_derivative > 0),
        },
    )
    return report


@dataclass(frozen=True)
class ProjectionPair:
    """Rank-one spectral projections of the critical pair at one wavenumber.

    P_j = outer(U_j, p_j), so p_j(k) u reproduces the projection action as
    (p_j u) U_j.  Built by eigendecomposition, which agrees with the contour
    integral for simple eigenvalues.
    """

    k: float
    lambda_plus: complex
    lambda_minus: complex
    U_plus: np.ndarray
    U_minus: np.ndarray
    p_plus: np.ndarray
    p_minus: np.ndarray

    @property
    def P_plus(self) -> np.ndarray:
        return np.outer(self.U_plus, self.p_plus)

    @property
    def P_minus(self) -> np.ndarray:
        return np.outer(self.U_minus, self.p_minus)


def spectral_projections(lin: ModelLinearization, k: float,
                         separation_tol: float = 1e-8) -> ProjectionPair:
    """Spectral projections onto the +-i omega_0 pair at wavenumber k.

    Refuses (with the measured margin) when one of the pair eigenvalues gets
    within ``separation_tol`` of another eigenvalue.
    """
    omega0 = lin.omega0()
    vals, vecs = np.linalg.eig(lin.symbol(float(k)))
    vecs = vecs / np.linalg.norm(vecs, axis=0, keepdims=True)

    refs = (1j * omega0, -1j * omega0)
    idx = []
    for ref in refs:
        order = np.argsort(np.abs(vals - ref))
        j = next(i for i in order if i not in idx)
        idx.append(int(j))
    for j in idx:
        margin = np.min(np.abs(np.delete(vals, j) - vals[j]))
        if margin < separation_tol:
            raise ValueError(
                f"eigenvalue collision at k = {k}: separation margin "
                f"{margin:.3e} < {separation_tol:.0e}")

    left = np.linalg.inv(vecs)
    jp, jm = idx
    return ProjectionPair(
        k=float(k), lambda_plus=complex(vals[jp]),
        lambda_minus=complex(vals[jm]),
        U_plus=vecs[:, jp], U_minus=vecs[:, jm],
        p_plus=left[jp, :], p_minus=left[jm, :])


def _pair_gap(lin: ModelLinearization, ks: np.ndarray) -> np.ndarray:
    """Distance from each critical-pair eigenvalue to the rest of the
    spectrum, per wavenumber."""
    omega0 = lin.omega0()
    vals = np.linalg.eigvals(lin.symbol(np.atleast_1d(ks)))
    gaps = np.empty(vals.shape[0])
    for i in range(vals.shape[0]):
        v = vals[i]
        idx = []
        for ref in (1j * omega0, -1j * omega0):
            order = np.argsort(np.abs(v - ref))
            j = next(int(a) for a in order if a not in idx)
            idx.append(j)
        gaps[i] = min(np.min(np.abs(np.delete(v, j) - v[j])) for j in idx)
    return gaps


def estimate_rho(lin: ModelLinearization, k_max: float = 4.0,
                 n: int = 2001) -> float:
    """Projection validity radius estimate.

    Half the smallest |k| at which the gap between a critical-pair
    eigenvalue and the rest of the spectrum closes below 1e-3; k_max when
    the gap never closes on the scanned window.  The gap behaves like the
    square root of the distance to a collision, so candidate minima from
    the coarse scan are refined locally before thresholding.  Reported,
    never hard-coded.
    """
    ks = np.linspace(0, k_max, n)
    gaps = _pair_gap(lin, ks)
    strict = (gaps[1:-1] < gaps[:-2]) & (gaps[1:-1] < gaps[2:])
    candidates = {i + 1 for i in np.nonzero(strict)[0]}
    candidates.add(int(np.argmin(gaps)))
    # only dips clearly below the typical gap can close after refinement
    typical = float(np.median(gaps))
    candidates = [i for i in candidates if gaps[i] < 0.5 * typical]
    for i in sorted(candidates, key=lambda i: ks[i]):
        lo = ks[max(i - 1, 0)]
        hi = ks[min(i + 1, n - 1)]
        k_best, g_best = ks[i], gaps[i]
        for _ in range(25):
            local = np.linspace(lo, hi, 9)
            lg = _pair_gap(lin, local)
            j = int(np.argmin(lg))
            k_best, g_best = local[j], lg[j]
            lo = local[max(j - 1, 0)]
            hi = local[min(j + 1, 8)]
        if g_best < 1e-3 and k_best > 0:
            return float(k_best / 2)
    return float(k_max)


@dataclass
class ModeSplitResult:
    c1: Field
    cm1: Field
    us: list
    delta_tilde: float
    rho: float

    def critical_part(self) -> list:
        """The fields (c1 U1 + c-1 U-1) reconstructed on the grid."""
        grid = self.c1.grid
        out = []
        for j in range(len(self.us)):
            vals = self._ec_hat[j]
            out.append(field_from_fourier(grid, vals))
        return out


def mode_split(u_fields: Sequence[Field], lin: ModelLinearization,
               delta_tilde: float, rho: Optional[float] = None) \
        -> ModeSplitResult:
    """Split u into critical amplitudes c_(+-1) and the stable remainder.

    In Fourier space  uhat = c1hat U1(k) + c-1hat U-1(k) + us_hat  with
    c_(+-1)hat = chi(k) p_(+-1)(k) uhat supported in |k| <= 0.55 dt.  The
    reconstruction is exact by construction.  Requires dt < rho / 2, the
    projection validity radius (estimated on a window wide enough to cover
    the requested filter when not supplied).
    """
    if rho is None:
        rho = estimate_rho(lin, k_max=max(4.0, 4.0 * delta_tilde))
    if not delta_tilde < rho / 2:
        raise ValueError(
            f"delta_tilde = {delta_tilde} must be below rho/2 = {rho / 2}")

    grid = u_fields[0].grid
    if any(f.grid != grid for f in u_fields):
        raise ValueError("all fields must share one grid")
    d = lin.d
    if len(u_fields) != d:
        raise ValueError(f"expected {d} u components")

    kk = grid.fft_k
    chi = chi_hat(kk, delta_tilde)
    band = np.nonzero(chi > 0)[0]
    uhat = np.stack([f.fourier() for f in u_fields])

    omega0 = lin.omega0()
    anchor = spectral_projections(lin, 0.0)

    c1 = np.zeros(grid.n_points, dtype=complex)
    cm1 = np.zeros(grid.n_points, dtype=complex)
    ec = np.zeros((d, grid.n_points), dtype=complex)

    if band.size:
        mats = lin.symbol(kk[band])
        vals, vecs = np.linalg.eig(mats)
        vecs = vecs / np.linalg.norm(vecs, axis=1, keepdims=True)
        for pos, idx in enumerate(band):
            v, V = vals[pos], vecs[pos]
            pair = []
            for ref, anchor_vec in ((1j * omega0, anchor.U_plus),
                                    (-1j * omega0, anchor.U_minus)):
                order = np.argsort(np.abs(v - ref))
                j = next(int(a) for a in order if a not in pair)
                pair.append(j)
            left = np.linalg.inv(V)
            for j, anchor_vec, cvec, sign in (
                    (pair[0], anchor.U_plus, c1, +1),
                    (pair[1], anchor.U_minus, cm1, -1)):
                uvec = V[:, j]
                phase = np.vdot(anchor_vec, uvec)
                if abs(phase) > 0:
                    rot = phase.conjugate() / abs(phase)
                else:
                    rot = 1.0
                uvec = uvec * rot
                pvec = left[j, :] / rot
                amp = chi[idx] * (pvec @ uhat[:, idx])
                cvec[idx] = amp
                ec[:, idx] += amp * uvec

    us = [field_from_fourier(grid, uhat[j] - ec[j]) for j in range(d)]
    result = ModeSplitResult(
        c1=field_from_fourier(grid, c1),
        cm1=field_from_fourier(grid, cm1),
        us=us, delta_tilde=delta_tilde, rho=rho)
    result._ec_hat = ec
    return result


def nonresonance_margin(data: DispersionData, radius: float) -> float:
    """Infimum of |lambda_j1(k) - lambda_j2(k-m) - lambda_j3(m)|.

    Taken over all sign triples j in {-1, +1}^3 and all grid pairs (k, m)
    with k, m, k-m inside the sampling window of the given radius.  Zero is
    a valid, reported result (the transform must then not be attempted).
    """
    k = data.k_samples
    h = np.diff(k)
    if np.max(np.abs(h - h[0])) > 1e-9 * max(abs(h[0]), 1e-30):
        raise ValueError("nonresonance margin needs a uniform k grid")
    h = h[0]
    i_zero = int(np.argmin(np.abs(k)))
    sel = np.nonzero(np.abs(k) <= radius + 1e-12)[0]

    lam = {+1: data.curves[data.curve_index_for_sign(+1)],
           -1: data.curves[data.curve_index_for_sign(-1)]}

    ii = sel[:, None]
    jj = sel[None, :]
    cc = ii - jj + i_zero
    valid = (cc >= sel.min()) & (cc <= sel.max())
    cc_safe = np.clip(cc, 0, k.size - 1)

    margin = math.inf
    for j1 in (+1, -1):
        for j2 in (+1, -1):
            for j3 in (+1, -1):
                comb = np.abs(lam[j1][ii] - lam[j2][cc_safe] - lam[j3][jj])
                comb = np.where(valid, comb, np.inf)
                margin = min(margin, float(comb.min()))
    return margin


@dataclass
class DecayFitReport:
    """Fitted constants for the semigroup decay bounds.

    critical part:      C (1 + t^(-r/2)) e^(growth t)
    stable part:        C e^(-sigma t) (1 + t^(-r/2))
    conservation part:  C (1 + t^(-r/2))
    """

    r: float
    t_samples: np.ndarray
    critical_sup: np.ndarray
    stable_sup: Optional[np.ndarray]
    conservation_sup: np.ndarray
    critical_C: float
    critical_growth: float
    stable_C: Optional[float]
    stable_sigma: Optional[float]
    stable_sigma_reference: Optional[float]
    conservation_C: float

    def to_dict(self) -> dict:
        return {
            "r": self.r,
            "t_samples": list(map(float, self.t_samples)),
            "critical_C": self.critical_C,
            "critical_growth": self.critical_growth,
            "stable_C": self.stable_C,
            "stable_sigma": self.stable_sigma,
            "stable_sigma_reference": self.stable_sigma_reference,
            "conservation_C": self.conservation_C,
        }


def _sup_over_band(curve: np.ndarray, weight: np.ndarray,
                   t: float) -> float:
    return float(np.max(np.exp(curve.real * t) * weight))


def semigroup_decay_check(data: DispersionData, r: float, t_samples,
                          delta_tilde: float = 0.5,
                          weight: str = "sobolev") -> DecayFitReport:
    """Measure sup_k |e^(lambda_j(k) t)| w_r(k) and fit the decay bounds.

    ``weight`` selects w_r(k) = (1+k^2)^(r/2) ("sobolev") or |k|^r
    ("homogeneous").  The stable part is the u spectrum restricted to the
    filtered band |k| >= 0.45 delta_tilde (all curves), together with any
    curves beyond the critical pair on the whole grid; its fitted sigma is
    compared against the direct symbol maximum.
    """
    t = np.asarray(t_samples, dtype=float)
    if np.any(t <= 0):
        raise ValueError("t_samples must be positive")
    k = data.k_samples
    if weight == "sobolev":
        w = (1.0 + k ** 2) ** (r / 2.0)
    elif weight == "homogeneous":
        w = np.abs(k) ** r
    else:
        raise ValueError(f"unknown weight {weight!r}")

    jp = data.curve_index_for_sign(+1)
    jm = data.curve_index_for_sign(-1)
    crit = data.curves[[jp, jm]]
    others = [j for j in range(data.d) if j not in (jp, jm)]

    outer = np.abs(k) >= 0.45 * delta_tilde
    stable_curves = []
    stable_weights = []
    if np.any(outer):
        for j in (jp, jm):
            stable_curves.append(data.curves[j][outer])
            stable_weights.append(w[outer])
    for j in others:
        stable_curves.append(data.curves[j])
        stable_weights.append(w)

    prefac = 1.0 + t ** (-r / 2.0)

    crit_sup = np.array([max(_sup_over_band(c, w, tj) for c in crit)
                         for tj in t])
    cons_sup = np.array([_sup_over_band(data.lambda0, w, tj) for tj in t])

    # critical: growth-rate fit of sup / prefactor
    y = np.log(crit_sup / prefac)
    growth, logc = np.polyfit(t, y, 1)
    if not (np.isfinite(growth) and np.isfinite(logc)):
        raise RuntimeError(f"critical-branch fit failed; raw sups {crit_sup}")
    report_kwargs = dict(
        critical_C=float(np.exp(logc)), critical_growth=float(growth))

    if stable_curves:
        stab_sup = np.array(
            [max(_sup_over_band(c, ww, tj)
                 for c, ww in zip(stable_curves, stable_weights))
             for tj in t])
        y = np.log(stab_sup / prefac)
        slope, logc = np.polyfit(t, y, 1)
        if not (np.isfinite(slope) and np.isfinite(logc)):
            raise RuntimeError(
                f"stable-branch fit failed; raw sups {stab_sup}")
        sigma_ref = -max(float(c.real.max()) for c in stable_curves)
        report_kwargs.update(
            stable_sup=stab_sup, stable_C=float(np.exp(logc)),
            stable_sigma=float(-slope), stable_sigma_reference=sigma_ref)
    else:
        report_kwargs.update(stable_sup=None, stable_C=None,
                             stable_sigma=None, stable_sigma_reference=None)

    cons_C = float(np.max(cons_sup / prefac))
    return DecayFitReport(r=r, t_samples=t, critical_sup=crit_sup,
                          conservation_sup=cons_sup,
                          conservation_C=cons_C, **report_kwargs)


def find_critical_parameter(make_lin: Callable[[float], ModelLinearization],
                            bracket: tuple, xtol: float = 1e-12) -> float:
    """Root of Re lambda_1(0) over the parameter, by Brent's method."""

    def re_lambda1(p):
        lin = make_lin(p)
        return float(np.max(np.linalg.eigvals(lin.jacobian).real))

    lo, hi = bracket
    return float(brentq(re_lambda1, lo, hi, xtol=xtol))


def export_dispersion_csv(data: DispersionData, path) -> None:
    """CSV columns (k, j, re_lambda, im_lambda); j = 0 is lambda_0."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["k", "j", "re_lambda", "im_lambda"])
        for i, k in enumerate(data.k_samples):
            writer.writerow([repr(float(k)), 0,
                             repr(float(data.lambda0[i].real)),
                             repr(float(data.lambda0[i].imag))])
            for j in range(data.d):
                lam = data.curves[j, i]
                writer.writerow([repr(float(k)), j + 1,
                                 repr(float(lam.real)),
                                 repr(float(lam.imag))])
