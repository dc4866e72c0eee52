"""Periodic pseudospectral toolkit.

Grids, complex-valued fields with Fourier access, Fourier-multiplier
operators (derivatives, antiderivative, semigroups, smooth mode filters),
discrete Sobolev norms, dealiasing, and grid transfer by zero padding.

Fourier convention: a field on a length-L grid with n points is expanded as
f(x) = sum_k fhat(k) exp(i k x) with k = 2*pi*j/L, so coefficients are
fft(values)/n and Parseval reads  int |f|^2 dx = L * sum |fhat|^2.

Fields are immutable values after construction and every operation here is a
pure function, so all of this is safe to call from multiple workers; FFT work
buffers are internal to numpy and per call.
"""

from __future__ import annotations

import csv
import warnings
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "SpectralGrid",
    "Field",
    "make_grid",
    "field_from_physical",
    "field_from_fourier",
    "field_from_function",
    "derivative",
    "antiderivative",
    "apply_semigroup",
    "mode_filter",
    "chi_hat",
    "sobolev_norm",
    "lu_norm",
    "dealias",
    "dealias_mask",
    "upsample",
    "downsample",
    "dump_field_csv",
    "load_field_csv",
]

# Exponent cap for semigroup application; exp(50) ~ 5e21 still finite.
_SEMIGROUP_EXP_CAP = 50.0


@dataclass(frozen=True)
class SpectralGrid:
    """Periodic grid with n_points nodes on [0, length)."""

    n_points: int
    length: float

    def __post_init__(self):
        if self.n_points % 2 != 0 or self.n_points < 16:
            raise ValueError(
                f"n_points must be even and >= 16, got {self.n_points}")
        if not self.length > 0:
            raise ValueError(f"length must be positive, got {self.length}")

    @property
    def dx(self) -> float:
        return self.length / self.n_points

    @property
    def x(self) -> np.ndarray:
        return np.arange(self.n_points) * self.dx

    @property
    def fft_k(self) -> np.ndarray:
        """Wavenumbers in numpy fft layout (Nyquist stored as -n/2 * 2pi/L)."""
        return np.fft.fftfreq(self.n_points, d=1.0 / self.n_points) \
            * (2.0 * np.pi / self.length)

    @property
    def wavenumbers(self) -> np.ndarray:
        """Wavenumbers k_j = 2 pi j / length for j in {-n/2+1, ..., n/2}.

        Same modes as :attr:`fft_k`; the single Nyquist mode carries the
        positive sign label here.
        """
        k = self.fft_k.copy()
        k[self.n_points // 2] = abs(k[self.n_points // 2])
        return k

    def __eq__(self, other):
        return (isinstance(other, SpectralGrid)
                and self.n_points == other.n_points
                and self.length == other.length)

    def __hash__(self):
        return hash((self.n_points, self.length))


def make_grid(n_points: int, length: float) -> SpectralGrid:
    """Build a periodic grid; rejects odd or tiny n_points and length <= 0."""
    return SpectralGrid(int(n_points), float(length))


@dataclass(frozen=True)
class Field:
    """Complex-valued function sampled on a SpectralGrid.

    ``space`` records whether ``values`` are physical samples f(x_j) or the
    normalized Fourier coefficients fhat(k).  Values are frozen on
    construction.
    """

    grid: SpectralGrid
    values: np.ndarray = field(repr=False)
    space: str = "physical"

    def __post_init__(self):
        if self.space not in ("physical", "fourier"):
            raise ValueError(f"unknown space {self.space!r}")
        vals = np.asarray(self.values, dtype=complex)
        if vals.shape != (self.grid.n_points,):
            raise ValueError(
                f"values shape {vals.shape} does not match grid "
                f"n_points {self.grid.n_points}")
        vals = vals.copy()
        vals.flags.writeable = False
        object.__setattr__(self, "values", vals)

    def physical(self) -> np.ndarray:
        if self.space == "physical":
            return self.values
        return np.fft.ifft(self.values) * self.grid.n_points

    def fourier(self) -> np.ndarray:
        if self.space == "fourier":
            return self.values
        return np.fft.fft(self.values) / self.grid.n_points

    def to_physical(self) -> "Field":
        return Field(self.grid, self.physical(), "physical")

    def to_fourier(self) -> "Field":
        return Field(self.grid, self.fourier(), "fourier")

    def is_real(self, tol: float = 1e-12) -> bool:
        """Hermitian symmetry of the coefficients, relative to the field size."""
        phys = self.physical()
        scale = max(np.max(np.abs(phys)), 1e-300)
        return float(np.max(np.abs(phys.imag))) <= tol * scale

    def real_part(self) -> np.ndarray:
        return self.physical().real


def field_from_physical(grid: SpectralGrid, values) -> Field:
    return Field(grid, np.asarray(values, dtype=complex), "physical")


def field_from_fourier(grid: SpectralGrid, coeffs) -> Field:
    return Field(grid, np.asarray(coeffs, dtype=complex), "fourier")


def field_from_function(grid: SpectralGrid, fn) -> Field:
    return field_from_physical(grid, fn(grid.x))


def derivative(f: Field, order: int) -> Field:
    """Spectral derivative: coefficients multiplied by (i k)^order.

    The mean mode is unchanged for order 0 and zeroed for order >= 1; the
    Nyquist mode is zeroed for odd orders (its symbol sign is undefined).
    """
    if order < 0:
        raise ValueError("order must be >= 0")
    if order == 0:
        return f
    k = f.grid.fft_k
    sym = (1j * k) ** order
    if order % 2 == 1:
        sym = sym.copy()
        sym[f.grid.n_points // 2] = 0.0
    return field_from_fourier(f.grid, sym * f.fourier())


def antiderivative(f: Field) -> Field:
    """Inverse of d/dx on zero-mean fields: coefficients divided by i k.

    The k = 0 coefficient of the result is set to zero, and the Nyquist mode
    is zeroed to stay consistent with odd-order derivatives.  Rejects input
    with nonzero mean.
    """
    fh = f.fourier()
    scale = np.sqrt(np.sum(np.abs(fh) ** 2))
    if np.abs(fh[0]) >= 1e-10 * max(scale, 1e-300) and np.abs(fh[0]) > 1e-14:
        raise ValueError(
            f"antiderivative requires a zero-mean field; mean coefficient "
            f"is {fh[0]:.3e}")
    k = f.grid.fft_k
    out = np.zeros_like(fh)
    out[1:] = fh[1:] / (1j * k[1:])
    out[f.grid.n_points // 2] = 0.0
    return field_from_fourier(f.grid, out)


def apply_semigroup(f: Field, symbol, t: float) -> Field:
    """Multiply each coefficient by exp(symbol(k) * t).

    ``symbol`` maps wavenumbers to complex growth rates; it may accept an
    array or a scalar.  Real parts of symbol*t above +50 are capped (with a
    warning) to guard against overflow.
    """
    if t < 0:
        raise ValueError("t must be >= 0")
    k = f.grid.fft_k
    try:
        lam = np.asarray(symbol(k), dtype=complex)
        if lam.shape != k.shape:
            raise TypeError
    except TypeError:
        lam = np.array([symbol(kj) for kj in k], dtype=complex)
    if not np.all(np.isfinite(lam)):
        raise ValueError("symbol is not finite on the grid wavenumbers")
    z = lam * t
    re = z.real
    if np.any(re > _SEMIGROUP_EXP_CAP):
        warnings.warn(
            f"semigroup exponent capped at {_SEMIGROUP_EXP_CAP}: "
            f"max Re(symbol*t) = {re.max():.3g}", RuntimeWarning)
        z = np.minimum(re, _SEMIGROUP_EXP_CAP) + 1j * z.imag
    return field_from_fourier(f.grid, np.exp(z) * f.fourier())


def _smooth_step(y: np.ndarray) -> np.ndarray:
    """C-infinity step S with S = 0 for y <= 0 and S = 1 for y >= 1."""
    y = np.asarray(y, dtype=float)
    with np.errstate(divide="ignore", over="ignore", invalid="ignore"):
        g = np.where(y > 0, np.exp(-1.0 / np.maximum(y, 1e-300)), 0.0)
        g1 = np.where(1 - y > 0,
                      np.exp(-1.0 / np.maximum(1 - y, 1e-300)), 0.0)
    return g / (g + g1)


def chi_hat(k, delta_tilde: float) -> np.ndarray:
    """Smooth cutoff profile: 1 for |k| <= 0.45 dt, 0 for |k| >= 0.55 dt.

    Realized as S((0.55 dt - |k|) / (0.1 dt)) with the standard smooth
    partition step S; deterministic and infinitely smooth.
    """
    if not delta_tilde > 0:
        raise ValueError("delta_tilde must be positive")
    k = np.abs(np.asarray(k, dtype=float))
    return _smooth_step((0.55 * delta_tilde - k) / (0.1 * delta_tilde))


def mode_filter(f: Field, delta_tilde: float) -> Field:
    """Low-mode filter E_0: multiply coefficients by the smooth cutoff."""
    return field_from_fourier(
        f.grid, chi_hat(f.grid.fft_k, delta_tilde) * f.fourier())


def sobolev_norm(f: Field, s: float) -> float:
    """Discrete periodic H^s norm: (sum_k (1+k^2)^s |fhat|^2 * length)^(1/2).

    For s = 0 this is the L^2 norm; for s = 1 it agrees with
    (||f||_L2^2 + ||f'||_L2^2)^(1/2).
    """
    if s < 0:
        raise ValueError("s must be >= 0")
    k = f.grid.fft_k
    fh = f.fourier()
    return float(np.sqrt(np.sum((1.0 + k * k) ** s * np.abs(fh) ** 2)
                         * f.grid.length))


def lu_norm(f: Field, s: float) -> float:
    """Per-unit-window surrogate of the uniformly local H^s norm.

    Equal to sobolev_norm / sqrt(length / 2 pi): the H^s norm a 2 pi window
    would carry for a spatially homogeneous field.  Independent of the domain
    length for slowly modulated fields, which is what makes delta sweeps on
    length 2 pi / delta domains comparable.
    """
    return sobolev_norm(f, s) / np.sqrt(f.grid.length / (2.0 * np.pi))


def dealias_mask(grid: SpectralGrid) -> np.ndarray:
    """Boolean 2/3-rule mask in fft layout (True on retained modes)."""
    n = grid.n_points
    j = np.fft.fftfreq(n, d=1.0 / n)
    return np.abs(j) <= n // 3


def dealias(f: Field) -> Field:
    return field_from_fourier(f.grid, np.where(dealias_mask(f.grid),
                                               f.fourier(), 0.0))


def upsample(f: Field, fine: SpectralGrid) -> Field:
    """Transfer to a finer grid by Fourier zero padding.

    Exact for band-limited fields.  The physical lengths may differ (slow
    grid of length 2 pi versus fast grid of length 2 pi / delta); mode j of
    the source is copied to mode j of the target, which realizes F(delta x)
    when the target is the fast grid.
    """
    n_in, n_out = f.grid.n_points, fine.n_points
    if n_out < n_in:
        raise ValueError("target grid must be at least as fine")
    fh = f.fourier()
    out = np.zeros(n_out, dtype=complex)
    half = n_in // 2
    out[:half] = fh[:half]
    out[-(half - 1):] = fh[-(half - 1):]
    # split the source Nyquist mode symmetrically so real fields stay real
    if n_out > n_in:
        out[half] = 0.5 * fh[half]
        out[n_out - half] += 0.5 * fh[half]
    else:
        out[half] = fh[half]
    return field_from_fourier(fine, out)


def downsample(f: Field, coarse: SpectralGrid) -> Field:
    """Truncate Fourier modes onto a coarser grid (adjoint of upsample)."""
    n_in, n_out = f.grid.n_points, coarse.n_points
    if n_out > n_in:
        raise ValueError("target grid must be at most as fine")
    fh = f.fourier()
    out = np.zeros(n_out, dtype=complex)
    half = n_out // 2
    out[:half] = fh[:half]
    out[half + 1:] = fh[-(half - 1):]
    if n_in > n_out:
        # modes +-half alias to the same coarse-grid function: fold them
        out[half] = fh[half] + fh[n_in - half]
    else:
        out[half] = fh[half]
    return field_from_fourier(coarse, out)


def dump_field_csv(f: Field, path, space: str = "physical") -> None:
    """Write (x, re, im) or (k, re, im) rows; header records grid metadata."""
    if space == "physical":
        axis, vals = f.grid.x, f.physical()
        names = ("x", "re", "im")
    elif space == "fourier":
        axis, vals = f.grid.fft_k, f.fourier()
        names = ("k", "re", "im")
    else:
        raise ValueError(f"unknown space {space!r}")
    with open(path, "w", newline="") as fh:
        fh.write(f"# n_points={f.grid.n_points} length={f.grid.length!r} "
                 f"space={space}\n")
        writer = csv.writer(fh)
        writer.writerow(names)
        for a, v in zip(axis, vals):
            writer.writerow([repr(float(a)), repr(float(v.real)),
                             repr(float(v.imag))])


def load_field_csv(path) -> Field:
    with open(path) as fh:
        header = fh.readline().strip()
        if not header.startswith("#"):
            raise ValueError("missing grid metadata header")
        meta = dict(item.split("=") for item in header[1:].split())
        rows = list(csv.reader(fh))
    grid = make_grid(int(meta["n_points"]), float(meta["length"]))
    vals = np.array([complex(float(r), float(i)) for _, r, i in rows[1:]])
    return Field(grid, vals, meta["space"])
