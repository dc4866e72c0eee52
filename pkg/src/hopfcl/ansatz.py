"""Multiple-scales ansatz machinery for the oscillator toy system.

The approximation of the toy system is a graded double series

    u1(x, t) ~ sum_(q, m) delta^q U_(q,m)(X, T) e^(i m w0 t),
    v(x, t)  ~ sum_(q, m) delta^q V_(q,m)(X, T) e^(i m w0 t),

with X = delta x, T = delta^2 t, u(-1) = conj(u1), and V_(q,-m) =
conj(V_(q,m)).  Matching powers of delta and harmonics in the toy equations
gives, per slot (q, m),

  u equation:  i(m-1) w0 U_(q,m) = -dT U_(q-2,m) + g U_(q-2,m)
                                   + dXX U_(q-2,m) + NL1_(q,m),
  v equation:  i m w0 V_(q,m)    = -dT V_(q-2,m) + dXX V_(q-2,m)
                                   + dXX G_(q-2,m),

with g = (eps/delta)^2 the rescaled linear gain, NL1 the graded expansion of
the toy nonlinearity and G that of the conservation-law coupling u1 u(-1).
For m = 1 (u) and m = 0 (v) the left side vanishes and the balance is an
evolution equation: at leading order the amplitude system, at higher orders
its linearization with inhomogeneities from lower orders.  All other slots
are algebraic.  The builder below resolves this hierarchy mechanically by
graded series arithmetic, so the harmonic formulas (second harmonic
A1^2/(i w0) and friends, the cubic coefficient, the exponent table) are all
emergent and tested rather than hand-coded.

Implemented depth: theta <= 3 with harmonics |m| <= 3 and envelope
correction orders n <= 2, matching the exponent table below; higher
harmonics (|m| = 4 enters at delta^4) are outside this truncation, which
bounds the achievable residual order at theta = 3.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Dict, List, Optional, Tuple

import numpy as np

from .etdrk4 import ScalarEtdrk4
from .rdsolve import RDState
from .spectral import (Field, SpectralGrid, dealias_mask, field_from_fourier,
                       field_from_physical, upsample)

__all__ = [
    "AnsatzSpec",
    "exponent_beta",
    "EXPONENT_TABLE",
    "eliminate_harmonics_toy",
    "first_order_ansatz",
    "ToyHierarchy",
    "HierarchyState",
    "ToyExpansion",
    "build_psi_theta",
]

M_MAX = 3

# printed exponent table: leading delta power of each harmonic, per variable;
# beyond |m| = 3 the u rows continue as |m| and the v row as |m| + 2
EXPONENT_TABLE = {
    "c1": {-3: 3, -2: 2, -1: 3, 0: 2, 1: 1, 2: 2, 3: 3},
    "c-1": {-3: 3, -2: 2, -1: 1, 0: 2, 1: 3, 2: 2, 3: 3},
    "us": {-3: 3, -2: 2, -1: 3, 0: 2, 1: 3, 2: 2, 3: 3},
    "v": {-3: 5, -2: 4, -1: 5, 0: 2, 1: 5, 2: 4, 3: 5},
}


def exponent_beta(variable: str, m: int) -> int:
    """Leading order beta(m) of harmonic m for one ansatz variable."""
    table = EXPONENT_TABLE[variable]
    if m in table:
        return table[m]
    return abs(m) + 2 if variable == "v" else abs(m)


@dataclass(frozen=True)
class AnsatzSpec:
    """Shape of the truncated hierarchy: target residual exponent theta,
    retained harmonics, and the exponent table giving each variable's
    leading power per harmonic."""

    theta: int
    harmonics: tuple = tuple(range(-M_MAX, M_MAX + 1))

    def __post_init__(self):
        if not 1 <= self.theta <= 3:
            raise ValueError("implemented hierarchy depth is 1 <= theta <= 3")

    @property
    def exponent_table(self):
        return EXPONENT_TABLE

    @property
    def n_levels(self) -> int:
        return self.theta


# ---------------------------------------------------------------------------
# slow-grid helpers
# ---------------------------------------------------------------------------

class _SlowOps:
    def __init__(self, grid: SpectralGrid):
        self.grid = grid
        self.n = grid.n_points
        self.k2 = grid.fft_k ** 2
        self.mask = dealias_mask(grid)

    def dxx(self, arr):
        return np.fft.ifft(-self.k2 * np.fft.fft(arr))

    def dealias(self, arr):
        return np.fft.ifft(self.mask * np.fft.fft(arr))

    def zeros(self):
        return np.zeros(self.n, dtype=complex)


def eliminate_harmonics_toy(A1: Field, omega0: float):
    """Second-harmonic and mean fields of the toy expansion.

    Solving the algebraic balances at order delta^2 gives

        A_(1,2)  =  A1^2 / (i w0),
        A_(1,0)  = -A1 A_(-1) / (i w0),
        A_(1,-2) = -A_(-1)^2 / (3 i w0),

    with A_(-1) = conj(A1).  Returns (A_(1,0), A_(1,2), A_(1,-2)).
    """
    ops = _SlowOps(A1.grid)
    a = A1.physical()
    ac = np.conj(a)
    a12 = ops.dealias(a * a) / (1j * omega0)
    a10 = -ops.dealias(a * ac) / (1j * omega0)
    a1m2 = -ops.dealias(ac * ac) / (3j * omega0)
    grid = A1.grid
    return (field_from_physical(grid, a10),
            field_from_physical(grid, a12),
            field_from_physical(grid, a1m2))


def first_order_ansatz(A1: Field, B0: Field, delta: float, t: float,
                       omega0: float, U1: np.ndarray,
                       fast_grid: SpectralGrid):
    """Leading-order modulation ansatz on the fast grid.

    u = delta A1(delta x) e^(i w0 t) U1 + c.c. and v = delta^2 B0(delta x);
    the slow fields are transferred by Fourier zero padding (exact for
    band-limited envelopes).  The fast grid must cover slow_length / delta.
    """
    if A1.grid != B0.grid:
        raise ValueError("A1 and B0 must share the slow grid")
    if not np.isclose(fast_grid.length, A1.grid.length / delta,
                      rtol=1e-12, atol=0.0):
        raise ValueError(
            f"incommensurate grids: fast length {fast_grid.length} "
            f"!= slow length / delta = {A1.grid.length / delta}")
    A_up = upsample(A1, fast_grid).physical()
    B_up = upsample(B0, fast_grid).physical().real
    phase = np.exp(1j * omega0 * t)
    U1 = np.asarray(U1)
    u_fields = []
    for j in range(U1.shape[0]):
        vals = 2.0 * np.real(delta * A_up * phase * U1[j])
        u_fields.append(field_from_physical(fast_grid, vals))
    v = field_from_physical(fast_grid, delta ** 2 * B_up)
    return u_fields, v


# ---------------------------------------------------------------------------
# graded series algebra
# ---------------------------------------------------------------------------

@dataclass
class ToyExpansion:
    """All slot fields of one hierarchy evaluation, plus time derivatives.

    ``U[(q, m)]`` holds the harmonic-m coefficient of u1 at order delta^q
    (complex physical values on the slow grid); ``V`` likewise for v.  The
    u(-1) series is the conjugate mirror U(-1)[(q, m)] = conj(U[(q, -m)]).
    ``dU``/``dV`` hold slow-time derivatives where defined.
    """

    grid: SpectralGrid
    omega0: float
    U: Dict[Tuple[int, int], np.ndarray]
    V: Dict[Tuple[int, int], np.ndarray]
    dU: Dict[Tuple[int, int], np.ndarray]
    dV: Dict[Tuple[int, int], np.ndarray]

    def psi_fields(self, delta: float, t: float, fast_grid: SpectralGrid):
        """Reconstruct (u1 complex, v real) on the fast grid at fast time t."""
        slow = self.grid
        psi1 = np.zeros(fast_grid.n_points, dtype=complex)
        psiv = np.zeros(fast_grid.n_points, dtype=complex)
        for (q, m), arr in self.U.items():
            up = upsample(field_from_physical(slow, arr),
                          fast_grid).physical()
            psi1 += delta ** q * up * np.exp(1j * m * self.omega0 * t)
        for (q, m), arr in self.V.items():
            up = upsample(field_from_physical(slow, arr),
                          fast_grid).physical()
            psiv += delta ** q * up * np.exp(1j * m * self.omega0 * t)
        return psi1, psiv

    def reconstruct(self, delta: float, t: float,
                    fast_grid: SpectralGrid) -> RDState:
        """Toy state (Re u1, Im u1, v) of the approximation at fast time t."""
        psi1, psiv = self.psi_fields(delta, t, fast_grid)
        return RDState(
            u=(field_from_physical(fast_grid, psi1.real),
               field_from_physical(fast_grid, psi1.imag)),
            v=field_from_physical(fast_grid, psiv.real),
            t=t)


@dataclass
class HierarchyState:
    """Dynamic envelope fields: A levels (complex) and B levels (real),
    stored as arrays of shape (theta, n_slow), at slow time T."""

    A: np.ndarray
    B: np.ndarray
    T: float


class ToyHierarchy:
    """Builder and integrator for the toy hierarchy up to depth theta.

    The dynamic fields are the envelope levels A_n = A_(+,1,n) and
    B_n = B_(0,n) for n = 0..theta-1; everything else is algebraic in them.
    """

    def __init__(self, omega0: float, theta: int, grid: SpectralGrid,
                 eps_over_delta: float = 1.0):
        self.spec = AnsatzSpec(theta=theta)
        self.omega0 = float(omega0)
        self.theta = theta
        self.grid = grid
        self.gain = float(eps_over_delta) ** 2
        self.ops = _SlowOps(grid)
        self.q_max_u = theta + 1
        self.q_max_v = theta + 2

    # -- series product helpers -----------------------------------------
    @staticmethod
    def _mirror(series, q, m):
        arr = series.get((q, -m))
        return None if arr is None else np.conj(arr)

    def _pair_sum(self, left, right, q, m, mirror_left=False,
                  mirror_right=False):
        """Sum of products left_(q1,m1) right_(q2,m2) over q1+q2=q,
        m1+m2=m; mirror flags swap in the conjugate series view."""
        acc = None
        for q1 in range(1, q):
            q2 = q - q1
            for m1 in range(-3 * M_MAX, 3 * M_MAX + 1):
                a = (self._mirror(left, q1, m1) if mirror_left
                     else left.get((q1, m1)))
                if a is None:
                    continue
                m2 = m - m1
                b = (self._mirror(right, q2, m2) if mirror_right
                     else right.get((q2, m2)))
                if b is None:
                    continue
                acc = a * b if acc is None else acc + a * b
        return acc

    def _pair_sum_dt(self, left, dleft, right, dright, q, m,
                     mirror_left=False, mirror_right=False):
        acc = None
        for q1 in range(1, q):
            q2 = q - q1
            for m1 in range(-3 * M_MAX, 3 * M_MAX + 1):
                m2 = m - m1
                if mirror_left:
                    a = self._mirror(left, q1, m1)
                    da = self._mirror(dleft, q1, m1)
                else:
                    a = left.get((q1, m1))
                    da = dleft.get((q1, m1))
                if a is None:
                    continue
                if mirror_right:
                    b = self._mirror(right, q2, m2)
                    db = self._mirror(dright, q2, m2)
                else:
                    b = right.get((q2, m2))
                    db = dright.get((q2, m2))
                if b is None:
                    continue
                if da is None or db is None:
                    raise RuntimeError(
                        f"missing slot derivative for product at ({q},{m})")
                term = da * b + a * db
                acc = term if acc is None else acc + term
        return acc

    def _nl1_val(self, U, V, q, m):
        """Graded slot (q, m) of the u1 nonlinearity
        u1^2 + u1 u(-1) + u(-1)^2 + v (u1 + u(-1)) - u1^2 u(-1)."""
        acc = self.ops.zeros()
        for term in (
            self._pair_sum(U, U, q, m),
            self._pair_sum(U, U, q, m, mirror_right=True),
            self._pair_sum(U, U, q, m, mirror_left=True, mirror_right=True),
            self._pair_sum(V, U, q, m),
            self._pair_sum(V, U, q, m, mirror_right=True),
        ):
            if term is not None:
                acc = acc + term
        cubic = self._triple_sum(U, q, m)
        if cubic is not None:
            acc = acc - cubic
        return self.ops.dealias(acc)

    def _triple_sum(self, U, q, m):
        """Slot (q, m) of u1^2 u(-1)."""
        acc = None
        for q1 in range(1, q - 1):
            for q2 in range(1, q - q1):
                q3 = q - q1 - q2
                for m1 in range(-M_MAX, M_MAX + 1):
                    a = U.get((q1, m1))
                    if a is None:
                        continue
                    for m2 in range(-M_MAX, M_MAX + 1):
                        b = U.get((q2, m2))
                        if b is None:
                            continue
                        m3 = m - m1 - m2
                        c = self._mirror(U, q3, m3)
                        if c is None:
                            continue
                        term = a * b * c
                        acc = term if acc is None else acc + term
        return acc

    def _g_val(self, U, q, m):
        """Slot (q, m) of the conservation-law coupling u1 u(-1)."""
        term = self._pair_sum(U, U, q, m, mirror_right=True)
        return None if term is None else self.ops.dealias(term)

    def _g_dt(self, U, dU, q, m):
        term = self._pair_sum_dt(U, dU, U, dU, q, m, mirror_right=True)
        return None if term is None else self.ops.dealias(term)

    def _nl1_dt(self, U, dU, V, dV, q, m):
        acc = self.ops.zeros()
        for term in (
            self._pair_sum_dt(U, dU, U, dU, q, m),
            self._pair_sum_dt(U, dU, U, dU, q, m, mirror_right=True),
            self._pair_sum_dt(U, dU, U, dU, q, m, mirror_left=True,
                              mirror_right=True),
            self._pair_sum_dt(V, dV, U, dU, q, m),
            self._pair_sum_dt(V, dV, U, dU, q, m, mirror_right=True),
        ):
            if term is not None:
                acc = acc + term
        # cubic: product rule over u1^2 u(-1) via the pair helpers
        cub = self._triple_sum_dt(U, dU, q, m)
        if cub is not None:
            acc = acc - cub
        return self.ops.dealias(acc)

    def _triple_sum_dt(self, U, dU, q, m):
        acc = None
        for q1 in range(1, q - 1):
            for q2 in range(1, q - q1):
                q3 = q - q1 - q2
                for m1 in range(-M_MAX, M_MAX + 1):
                    a, da = U.get((q1, m1)), dU.get((q1, m1))
                    if a is None:
                        continue
                    for m2 in range(-M_MAX, M_MAX + 1):
                        b, db = U.get((q2, m2)), dU.get((q2, m2))
                        if b is None:
                            continue
                        m3 = m - m1 - m2
                        c = self._mirror(U, q3, m3)
                        dc = self._mirror(dU, q3, m3)
                        if c is None:
                            continue
                        if da is None or db is None or dc is None:
                            raise RuntimeError("missing slot derivative")
                        term = da * b * c + a * db * c + a * b * dc
                        acc = term if acc is None else acc + term
        return acc

    # -- the hierarchy build --------------------------------------------
    def build(self, state: HierarchyState) -> ToyExpansion:
        """Resolve all algebraic slots and slot time derivatives from the
        dynamic envelope levels."""
        ops = self.ops
        w0 = self.omega0
        U: Dict[Tuple[int, int], np.ndarray] = {}
        V: Dict[Tuple[int, int], np.ndarray] = {}
        dU: Dict[Tuple[int, int], np.ndarray] = {}
        dV: Dict[Tuple[int, int], np.ndarray] = {}

        for n in range(self.theta):
            U[(1 + n, 1)] = np.asarray(state.A[n], dtype=complex)
            V[(2 + n, 0)] = np.asarray(state.B[n], dtype=complex)

        def zeros_if_none(arr):
            return ops.zeros() if arr is None else arr

        q_max = max(self.q_max_u, self.q_max_v)
        for q in range(2, q_max + 1):
            p = q - 2
            # (a) time derivatives of all order-p slots
            for (qq, m) in sorted(list(U.keys())):
                if qq != p or (qq, m) in dU:
                    continue
                if m == 1:
                    nl = self._nl1_val(U, V, p + 2, 1)
                    dU[(p, 1)] = (self.gain * U[(p, 1)]
                                  + ops.dxx(U[(p, 1)]) + nl)
                else:
                    nl_dt = self._nl1_dt(U, dU, V, dV, p, m)
                    prev = U.get((p - 2, m))
                    extra = ops.zeros()
                    if prev is not None:
                        raise RuntimeError(
                            "slot derivative needs a second derivative; "
                            "beyond implemented depth")
                    dU[(p, m)] = (nl_dt + extra) / (1j * (m - 1) * w0)
            for (qq, m) in sorted(list(V.keys())):
                if qq != p or (qq, m) in dV:
                    continue
                if m == 0:
                    g = zeros_if_none(self._g_val(U, p, 0))
                    dV[(p, 0)] = ops.dxx(V[(p, 0)] + g)
                else:
                    g_dt = zeros_if_none(self._g_dt(U, dU, p - 2, m)) \
                        if p - 2 >= 2 else ops.zeros()
                    dV[(p, m)] = ops.dxx(g_dt) / (1j * m * w0)

            # (b) algebraic slot values at order q
            if q <= self.q_max_u:
                for m in range(-M_MAX, M_MAX + 1):
                    if m == 1 or (q, m) in U:
                        continue
                    nl = self._nl1_val(U, V, q, m)
                    prev = U.get((q - 2, m))
                    inhom = nl
                    if prev is not None:
                        inhom = (inhom - dU[(q - 2, m)]
                                 + self.gain * prev + ops.dxx(prev))
                    if np.max(np.abs(inhom)) == 0.0:
                        continue
                    U[(q, m)] = inhom / (1j * (m - 1) * w0)
            if q <= self.q_max_v:
                for m in range(-M_MAX, M_MAX + 1):
                    if m == 0 or (q, m) in V:
                        continue
                    g = self._g_val(U, q - 2, m)
                    prev = V.get((q - 2, m))
                    inhom = ops.zeros()
                    if g is not None:
                        inhom = inhom + ops.dxx(g)
                    if prev is not None:
                        inhom = inhom - dV[(q - 2, m)] + ops.dxx(prev)
                    if np.max(np.abs(inhom)) == 0.0:
                        continue
                    V[(q, m)] = inhom / (1j * m * w0)

        # top-level dynamic derivatives (balances above the fill loop)
        for n in range(self.theta):
            p = 1 + n
            if (p, 1) not in dU:
                nl = self._nl1_val(U, V, p + 2, 1)
                dU[(p, 1)] = self.gain * U[(p, 1)] + ops.dxx(U[(p, 1)]) + nl
            pv = 2 + n
            if (pv, 0) not in dV:
                g = zeros_if_none(self._g_val(U, pv, 0))
                dV[(pv, 0)] = ops.dxx(V[(pv, 0)] + g)

        return ToyExpansion(grid=self.grid, omega0=w0, U=U, V=V,
                            dU=dU, dV=dV)

    # -- dynamic level evolution ------------------------------------------
    def level_rhs(self, state: HierarchyState):
        """Evolution right-hand sides of all dynamic levels (via build)."""
        exp = self.build(state)
        dA = np.stack([exp.dU[(1 + n, 1)] for n in range(self.theta)])
        dB = np.stack([exp.dV[(2 + n, 0)] for n in range(self.theta)])
        return dA, dB, exp

    def nonlinear_parts(self, state: HierarchyState):
        """Level derivatives minus the stiff linear symbols (for ETDRK4)."""
        exp = self.build(state)
        nA = np.stack([
            exp.dU[(1 + n, 1)] - self.gain * exp.U[(1 + n, 1)]
            - self.ops.dxx(exp.U[(1 + n, 1)]) for n in range(self.theta)])
        nB = np.stack([
            exp.dV[(2 + n, 0)] - self.ops.dxx(exp.V[(2 + n, 0)])
            for n in range(self.theta)])
        return nA, nB

    def initial_state(self, A1: Field, B0: Field,
                      corrective: bool = False) -> HierarchyState:
        """Dynamic levels from leading-order data (higher levels zero).

        With ``corrective`` the first envelope correction cancels the
        order-delta^2 harmonic content at T = 0:
        A_(+,1,1)(0) = -(A_(+,2,0) + A_(+,0,0) + A_(+,-2,0))(0).
        """
        n = self.grid.n_points
        A = np.zeros((self.theta, n), dtype=complex)
        B = np.zeros((self.theta, n), dtype=complex)
        A[0] = A1.physical()
        B[0] = B0.physical().real
        state = HierarchyState(A=A, B=B, T=0.0)
        if corrective and self.theta >= 2:
            exp = self.build(state)
            corr = -(exp.U.get((2, 2), 0) + exp.U.get((2, 0), 0)
                     + exp.U.get((2, -2), 0))
            A[1] = corr
        return HierarchyState(A=A, B=B, T=0.0)

    def integrate(self, state: HierarchyState, T_end: float, dT: float,
                  checkpoint_stride: int = 1) -> List[HierarchyState]:
        """ETDRK4 on the stacked envelope levels; returns checkpoints
        (initial state included)."""
        k2 = self.grid.fft_k ** 2
        coeffs_A = ScalarEtdrk4.build(-k2 + self.gain, dT)
        coeffs_B = ScalarEtdrk4.build(-k2, dT)
        n_steps = int(round((T_end - state.T) / dT))
        out = [state]
        Ah = np.fft.fft(state.A, axis=-1)
        Bh = np.fft.fft(state.B, axis=-1)

        def nl_hat(Ah, Bh):
            s = HierarchyState(A=np.fft.ifft(Ah, axis=-1),
                               B=np.fft.ifft(Bh, axis=-1), T=0.0)
            nA, nB = self.nonlinear_parts(s)
            return np.fft.fft(nA, axis=-1), np.fft.fft(nB, axis=-1)

        for i in range(1, n_steps + 1):
            n0a, n0b = nl_hat(Ah, Bh)
            e2a, e2b = coeffs_A.E2 * Ah, coeffs_B.E2 * Bh
            aa, ab = e2a + coeffs_A.Q * n0a, e2b + coeffs_B.Q * n0b
            naa, nab = nl_hat(aa, ab)
            ba, bb = e2a + coeffs_A.Q * naa, e2b + coeffs_B.Q * nab
            nba, nbb = nl_hat(ba, bb)
            ca = coeffs_A.E2 * aa + coeffs_A.Q * (2 * nba - n0a)
            cb = coeffs_B.E2 * ab + coeffs_B.Q * (2 * nbb - n0b)
            nca, ncb = nl_hat(ca, cb)
            Ah = (coeffs_A.E * Ah + coeffs_A.f1 * n0a
                  + 2 * coeffs_A.f2 * (naa + nba) + coeffs_A.f3 * nca)
            Bh = (coeffs_B.E * Bh + coeffs_B.f1 * n0b
                  + 2 * coeffs_B.f2 * (nab + nbb) + coeffs_B.f3 * ncb)
            if not np.all(np.isfinite(Ah)):
                raise RuntimeError(
                    f"hierarchy solve blew up at T = {state.T + i * dT}")
            if i % checkpoint_stride == 0 or i == n_steps:
                out.append(HierarchyState(
                    A=np.fft.ifft(Ah, axis=-1),
                    B=np.fft.ifft(Bh, axis=-1).real.astype(complex),
                    T=state.T + i * dT))
        return out


def build_psi_theta(hierarchy: ToyHierarchy, state: HierarchyState,
                    delta: float, t: float,
                    fast_grid: SpectralGrid) -> RDState:
    """Reconstruct the approximation at fast time t from envelope levels."""
    exp = hierarchy.build(state)
    return exp.reconstruct(delta, t, fast_grid)
