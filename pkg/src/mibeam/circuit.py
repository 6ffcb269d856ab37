"""
Coupled resonant-circuit model of the transmitter and receivers.

Every coil is a series RLC loop; receivers add a real load. With the coil
currents stacked as ``[i_tx; i_rx]`` the network obeys::

    [[Z_tx,   Z_ch],   [i_tx,     [u_tx,
     [Z_ch^T, Z_rx]] @  i_rx]  =   0   ]

where off-diagonal entries are ``j 2 pi f M``. Eliminating the receivers
gives ``i_tx = A u_tx`` with ``A = (Z_tx - Z_ch Z_rx^{-1} Z_ch^T)^{-1}`` and
``i_rx = C u_tx`` with ``C = -Z_rx^{-1} Z_ch^T A``.

Transmit power is the summed apparent power ``sum |u_k| |i_k|``; receive power
is the priority-weighted active power ``sum W_l |i_l|^2 Z_L,l``. Efficiency is
their ratio and is invariant to complex scaling of the drive.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from . import linalg
from .errors import ZeroDrive
from .geometry import N_TX, mutual_inductance_matrix

__all__ = [
    "CircuitParams",
    "SystemImpedance",
    "NetworkSolution",
    "DEFAULT_F0",
    "DEFAULT_L",
    "build_impedance",
    "network_matrices",
    "solve_network",
    "full_system_solve",
    "efficiency",
    "drive_powers",
    "receiver_matrix",
    "receiver_efficiencies",
    "single_receiver_efficiency",
]

DEFAULT_F0 = 125e6
# nominal inductance of a single-turn 4 cm x 6 cm loop; irrelevant at f = f0
DEFAULT_L = 150e-9

_COUPLING_RTOL = 1e-9


@dataclass(frozen=True)
class CircuitParams:
    """Electrical constants shared by every resonant loop.

    Attributes
    ----------
    L : float
        Coil inductance in henry.
    C : float
        Tuning capacitance in farad.
    R : float
        Copper resistance in ohm.
    f : float
        Operating frequency in hertz.
    """

    L: float
    C: float
    R: float
    f: float

    def __post_init__(self):
        for name in ("L", "C", "R", "f"):
            value = getattr(self, name)
            if not np.isfinite(value) or value <= 0:
                raise ValueError(f"{name} must be finite and > 0, got {value!r}")

    @classmethod
    def resonant(cls, R=1.0, f0=DEFAULT_F0, L=DEFAULT_L, f=None):
        """Parameters tuned to resonate at ``f0``, operated at ``f`` (default ``f0``)."""
        C = 1.0 / ((2.0 * np.pi * f0) ** 2 * L)
        return cls(L=L, C=C, R=R, f=f0 if f is None else f)

    @property
    def f0(self):
        return 1.0 / (2.0 * math.pi * math.sqrt(self.L * self.C))

    @property
    def omega(self):
        return 2.0 * np.pi * self.f

    @property
    def reactance(self):
        """Net series reactance ``2 pi f L - 1 / (2 pi f C)`` of one loop."""
        xl = self.omega * self.L
        x = xl - 1.0 / (self.omega * self.C)
        # at f == f0 the two terms cancel up to rounding
        return 0.0 if abs(x) <= 1e-12 * xl else x

    def self_impedance(self, load=0.0):
        return complex(self.R + load, self.reactance)

    def matched_load(self, coupling):
        """Single-link optimum load ``R sqrt(1 + F^2)``."""
        return self.R * float(np.sqrt(1.0 + coupling ** 2))

    def ref_mutual(self, coupling):
        """Mutual inductance giving coupling factor ``coupling`` at this operating point."""
        return coupling * self.R / self.omega


@dataclass(frozen=True)
class SystemImpedance:
    """Partitioned impedance matrix of the coupled network.

    ``z_tx`` is 3x3 diagonal, ``z_rx`` is KxK symmetric, ``z_ch`` is 3xK and
    purely imaginary. ``loads`` and ``priorities`` are carried along so the
    power computations need nothing else.
    """

    z_tx: np.ndarray
    z_rx: np.ndarray
    z_ch: np.ndarray
    loads: np.ndarray
    priorities: np.ndarray

    @property
    def n_receivers(self):
        return self.z_rx.shape[0]

    def full(self):
        """The assembled (K+3)x(K+3) impedance matrix."""
        top = np.hstack([self.z_tx, self.z_ch])
        bottom = np.hstack([self.z_ch.T, self.z_rx])
        return np.vstack([top, bottom])


@dataclass(frozen=True)
class NetworkSolution:
    """Currents and powers of the network under one drive vector."""

    A: np.ndarray
    C: np.ndarray
    u_tx: np.ndarray
    i_tx: np.ndarray
    i_rx: np.ndarray
    p_tx_total: float
    p_rx: np.ndarray
    p_rx_weighted: float
    efficiency: float
    loads: np.ndarray = field(repr=False)
    priorities: np.ndarray = field(repr=False)

    @property
    def p_tx(self):
        """Per-coil apparent power ``|u_k| |i_k|``."""
        return np.abs(self.u_tx) * np.abs(self.i_tx)

    @property
    def receiver_efficiencies(self):
        """Unweighted per-receiver efficiencies ``P_r,l / P_t,total``."""
        return self.p_rx / self.p_tx_total


def build_impedance(c, params):
    """Impedance blocks of constellation ``c`` under circuit ``params``.

    Raises ``ValueError`` if the constellation's stored coupling factor
    disagrees with ``2 pi f ref_mutual / R`` for these parameters.
    """
    implied = params.omega * c.ref_mutual / params.R
    if abs(implied - c.coupling) > _COUPLING_RTOL * c.coupling:
        raise ValueError(
            f"constellation coupling F={c.coupling!r} inconsistent with "
            f"2*pi*f*Mbar/R={implied!r}")
    m = mutual_inductance_matrix(c)
    z = 1j * params.omega * m
    k = c.n_receivers
    z_self = params.self_impedance()
    z_tx = np.diag([z_self] * N_TX).astype(complex)
    z_ch = z[:N_TX, N_TX:].copy()
    z_rx = z[N_TX:, N_TX:].copy()
    loads = c.loads
    z_rx[np.diag_indices(k)] = z_self + loads
    return SystemImpedance(z_tx, z_rx, z_ch, loads, c.priorities)


def network_matrices(z):
    """Return ``(A, C)`` with ``i_tx = A u`` and ``i_rx = C u``."""
    if z.n_receivers == 0:
        return linalg.invert(z.z_tx), np.zeros((0, N_TX), dtype=complex)
    zrx_inv = linalg.invert(z.z_rx)
    schur = z.z_tx - z.z_ch @ zrx_inv @ z.z_ch.T
    a = linalg.invert(schur)
    c = -zrx_inv @ z.z_ch.T @ a
    return a, c


def _check_drive(u_tx):
    u = np.asarray(u_tx, dtype=complex)
    if u.shape != (N_TX,):
        raise ValueError(f"drive vector must have length {N_TX}, got shape {u.shape}")
    if not np.all(np.isfinite(u)):
        raise ValueError("drive vector has non-finite entries")
    if not np.any(u):
        raise ZeroDrive("drive vector is zero; efficiency is undefined")
    return u


def drive_powers(a, c, weighted_loads, u_tx):
    """``(p_tx_total, p_rx_weighted)`` for drive ``u_tx`` given ``A``, ``C``.

    ``weighted_loads`` is the vector ``W_l Z_L,l``. This is the hot path
    used inside optimizers; it does not validate its inputs.
    """
    i_tx = a @ u_tx
    p_tx = float(np.sum(np.abs(u_tx) * np.abs(i_tx)))
    if c.shape[0] == 0:
        return p_tx, 0.0
    i_rx = c @ u_tx
    p_rx = float(np.sum(weighted_loads * (i_rx.real ** 2 + i_rx.imag ** 2)))
    return p_tx, p_rx


def solve_network(z, u_tx, matrices=None):
    """Currents, powers and efficiency for drive ``u_tx``.

    Parameters
    ----------
    z : SystemImpedance
    u_tx : array_like, shape (3,)
        Complex drive voltages.
    matrices : tuple, optional
        Precomputed ``network_matrices(z)``.

    Raises
    ------
    ZeroDrive
        If ``u_tx`` is all zeros.
    SingularMatrix
        If ``Z_rx`` or the Schur complement cannot be inverted.
    """
    u = _check_drive(u_tx)
    a, c = network_matrices(z) if matrices is None else matrices
    i_tx = a @ u
    i_rx = c @ u
    p_tx_total = float(np.sum(np.abs(u) * np.abs(i_tx)))
    p_rx = np.abs(i_rx) ** 2 * z.loads
    p_rx_weighted = float(np.sum(z.priorities * p_rx))
    return NetworkSolution(
        A=a, C=c, u_tx=u, i_tx=i_tx, i_rx=i_rx, p_tx_total=p_tx_total,
        p_rx=p_rx, p_rx_weighted=p_rx_weighted,
        efficiency=p_rx_weighted / p_tx_total,
        loads=z.loads, priorities=z.priorities)


def full_system_solve(z, u_tx):
    """Stacked currents from a direct solve of the full system (no elimination)."""
    u = np.asarray(u_tx, dtype=complex)
    rhs = np.concatenate([u, np.zeros(z.n_receivers, dtype=complex)])
    return linalg.solve(z.full(), rhs)


def efficiency(c, params, u_tx):
    """Weighted receive power over total apparent transmit power.

    Zero for a scene without receivers. Raises :class:`ZeroDrive` for a zero
    drive.
    """
    u = _check_drive(u_tx)
    if c.n_receivers == 0:
        return 0.0
    return solve_network(build_impedance(c, params), u).efficiency


def receiver_matrix(sol):
    """Hermitian PSD matrix ``D = C^H diag(W Z_L) C``.

    ``u^H D u`` is the weighted receive power for drive ``u``.
    """
    c = sol.C
    d = c.conj().T @ ((sol.priorities * sol.loads)[:, None] * c)
    return 0.5 * (d + d.conj().T)


def receiver_efficiencies(c, params, u_tx):
    """Unweighted per-receiver efficiencies ``P_r,l / P_t,total``."""
    u = _check_drive(u_tx)
    if c.n_receivers == 0:
        return np.zeros(0)
    return solve_network(build_impedance(c, params), u).receiver_efficiencies


def single_receiver_efficiency(params, tx_basis, axes, centers, coupling, load, u_tx):
    """Batched efficiency of a fixed drive with one receiver at many placements.

    Closed-form elimination of the single receiver (rank-one update of the
    diagonal transmitter block), vectorized over placements; used for
    angular efficiency patterns.

    Parameters
    ----------
    params : CircuitParams
    tx_basis : ndarray, shape (3, 3)
        Transmitter axes as rows.
    axes : ndarray, shape (n, 3)
        Receiver axis at each placement.
    centers : ndarray, shape (n, 3)
        Unit direction from transmitter to receiver at each placement.
    coupling : float
        Coupling factor F.
    load : float
        Receiver load in ohms.
    u_tx : array_like, shape (3,)

    Returns
    -------
    ndarray, shape (n,)
    """
    u = _check_drive(u_tx)
    axes = np.atleast_2d(axes)
    centers = np.atleast_2d(centers)
    # J of receiver against each transmitter coil: t . (a + (a.u) u)
    s = np.sum(axes * centers, axis=1)
    eff_axis = axes + s[:, None] * centers
    j = eff_axis @ np.asarray(tx_basis, dtype=float).T
    zc = 1j * coupling * params.R * j  # j 2 pi f Mbar J
    z0 = params.self_impedance()
    zr = params.self_impedance(load)
    # (z0 I - zc zc^T / zr)^{-1} u via Sherman-Morrison
    zu = zc @ u
    zz = np.sum(zc * zc, axis=1)
    denom = zr - zz / z0
    i_tx = u[None, :] / z0 + zc * (zu / (z0 * z0 * denom))[:, None]
    i_rx = -(zc * i_tx).sum(axis=1) / zr
    p_tx = np.sum(np.abs(u)[None, :] * np.abs(i_tx), axis=1)
    return np.abs(i_rx) ** 2 * load / p_tx
