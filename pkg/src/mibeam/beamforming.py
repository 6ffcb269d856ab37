"""
Drive-vector (beamforming) strategies for the 3-coil transmitter.

Four strategies are provided:

``uniform``
    Equal in-phase voltage on all three coils.
``closest-neighbor``
    Maximum ratio combining towards the nearest receiver: the drive is the
    receiver's polarization factors against the three transmitter coils.
``eigen``
    Dominant eigenvector of the receiver matrix ``D``; maximizes receive
    power per unit drive energy, which is optimal when ``A`` is close to a
    scaled identity (weak coupling).
``iterative``
    Starts from ``eigen`` and repeatedly replaces the apparent transmit
    power ``|u|^T |A u|`` by a weighted squared norm ``||Q S u||^2`` built
    around the previous iterate, then solves the resulting generalized
    eigenproblem. The best iterate (by exact efficiency) is returned.
"""

import logging
from dataclasses import dataclass, field
from typing import List

import numpy as np

from . import linalg
from .circuit import build_impedance, drive_powers, network_matrices, solve_network
from .errors import AllZeroPriorities, DegenerateIteration, ZeroDrive
from .geometry import N_TX, coupling_factor_vectors

__all__ = [
    "BeamformingResult",
    "IterationState",
    "Problem",
    "METHODS",
    "uniform",
    "mrc_closest_neighbor",
    "closest_receiver",
    "eig_receive_power",
    "iterative_beamforming",
    "iteration_step",
    "solve_with_priorities",
    "run_method",
]

log = logging.getLogger(__name__)

DEFAULT_MAX_ITERS = 50
DEFAULT_MIN_GAIN = 1e-6
DEGENERATE_RTOL = 1e-12
TIE_RTOL = 1e-9


@dataclass
class BeamformingResult:
    """Outcome of one beamforming strategy on one scene.

    Attributes
    ----------
    method : str
    u_tx : ndarray of complex, shape (3,)
        Drive voltages in volts.
    efficiency : float
        Weighted efficiency achieved by ``u_tx``.
    receiver_efficiencies : ndarray
        Unweighted per-receiver efficiencies under ``u_tx``.
    iterations : int
        Number of update steps taken (0 for closed-form methods).
    efficiency_trace : list of float
        Best-so-far efficiency after the start point and each iteration.
    converged : bool
    raw_trace : list of float
        Efficiency of each iterate itself (may be non-monotone).
    degenerate_iterations : list of int
        Iterations in which a coil current had to be clamped.
    """

    method: str
    u_tx: np.ndarray
    efficiency: float
    receiver_efficiencies: np.ndarray
    iterations: int = 0
    efficiency_trace: List[float] = field(default_factory=list)
    converged: bool = True
    raw_trace: List[float] = field(default_factory=list)
    degenerate_iterations: List[int] = field(default_factory=list)


@dataclass
class IterationState:
    """Intermediate matrices of one iterative update."""

    v: np.ndarray   # diag(|u_{n-1}|)
    s: np.ndarray   # V A
    g: np.ndarray   # |S u_{n-1}|
    q: np.ndarray   # diag(g^{-1/2})
    clamped: bool = False


class Problem:
    """A scene with its network matrices precomputed.

    Parameters
    ----------
    c : Constellation
    params : CircuitParams
    """

    def __init__(self, c, params):
        self.constellation = c
        self.params = params
        self.z = build_impedance(c, params)
        self.A, self.C = network_matrices(self.z)
        self.weighted_loads = self.z.priorities * self.z.loads
        d = self.C.conj().T @ (self.weighted_loads[:, None] * self.C)
        self.D = 0.5 * (d + d.conj().T)

    def efficiency(self, u):
        p_tx, p_rx = drive_powers(self.A, self.C, self.weighted_loads, u)
        if p_tx == 0.0:
            raise ZeroDrive("drive vector is zero; efficiency is undefined")
        return p_rx / p_tx

    def result(self, method, u, **kwargs):
        sol = solve_network(self.z, u, matrices=(self.A, self.C))
        kwargs.setdefault("efficiency_trace", [sol.efficiency])
        return BeamformingResult(
            method=method, u_tx=sol.u_tx, efficiency=sol.efficiency,
            receiver_efficiencies=sol.receiver_efficiencies, **kwargs)


def _problem(c, params):
    return c if isinstance(c, Problem) else Problem(c, params)


def uniform(c, params, voltage=1.0):
    """Drive all three coils with the same real ``voltage``."""
    if not voltage > 0:
        raise ValueError("voltage must be > 0")
    p = _problem(c, params)
    return p.result("uniform", np.full(N_TX, voltage, dtype=complex))


def closest_receiver(c):
    """Index of the receiver nearest the transmitter.

    Distances within ``TIE_RTOL`` of the minimum count as ties (receivers on
    the circle differ only by rounding) and go to the lowest index.
    """
    if c.n_receivers == 0:
        raise IndexError("scene has no receivers")
    dist = [float(np.linalg.norm(rx.position)) for rx in c.receivers]
    cutoff = min(dist) * (1 + TIE_RTOL)
    return next(i for i, r in enumerate(dist) if r <= cutoff)


def mrc_closest_neighbor(c, params, target=None):
    """Maximum ratio combining towards one receiver.

    The drive is ``[J_1, J_2, J_3]`` volts, the target receiver's
    polarization factors against the three transmitter coils. ``target``
    defaults to :func:`closest_receiver`.
    """
    p = _problem(c, params)
    scene = p.constellation
    if target is None:
        target = closest_receiver(scene)
    if not 0 <= target < scene.n_receivers:
        raise IndexError(f"receiver index {target} out of range for "
                         f"{scene.n_receivers} receivers")
    rx = scene.receivers[target]
    u = rx.position / np.linalg.norm(rx.position)
    j = coupling_factor_vectors(scene.tx_basis, rx.axis[None, :], u[None, :])
    return p.result("closest-neighbor", j.astype(complex))


def eig_receive_power(c, params):
    """Dominant eigenvector of the receiver matrix ``D`` (unit norm)."""
    p = _problem(c, params)
    _, u = linalg.hermitian_max_eigpair(p.D)
    return p.result("eigen", u)


def iteration_step(p, u_prev):
    """One update of the iterative algorithm from drive ``u_prev``.

    Returns the new unit-norm drive and the :class:`IterationState`. Coil
    entries with ``|u_prev|`` or ``G`` below ``DEGENERATE_RTOL`` times the
    largest entry are clamped to that floor (``state.clamped``); if every
    ``G`` is zero :class:`DegenerateIteration` is raised.
    """
    mag = np.abs(u_prev)
    floor_u = DEGENERATE_RTOL * mag.max()
    clamped = bool(np.any(mag < floor_u))
    v = np.diag(np.maximum(mag, floor_u))
    s = v @ p.A
    g = np.abs(s @ u_prev)
    gmax = g.max()
    if not gmax > 0:
        raise DegenerateIteration("all transmitter currents vanish")
    floor_g = DEGENERATE_RTOL * gmax
    if np.any(g < floor_g):
        clamped = True
        g = np.maximum(g, floor_g)
    q = np.diag(1.0 / np.sqrt(g))
    u_new = linalg.generalized_max_eigvec(p.D, q @ s)
    return u_new, IterationState(v=v, s=s, g=g, q=q, clamped=clamped)


def iterative_beamforming(c, params, max_iters=DEFAULT_MAX_ITERS,
                          min_gain=DEFAULT_MIN_GAIN, start=None):
    """Iterative apparent-power-aware beamforming.

    Parameters
    ----------
    c : Constellation or Problem
    params : CircuitParams
    max_iters : int
        Upper bound on update steps, >= 1.
    min_gain : float
        Stop once an iterate improves efficiency over its predecessor by less
        than this (absolute), >= 0.
    start : array_like, optional
        Initial drive; defaults to the ``eigen`` solution.

    Returns
    -------
    BeamformingResult
        The best iterate seen, including the start point.
    """
    if max_iters < 1:
        raise ValueError("max_iters must be >= 1")
    if min_gain < 0:
        raise ValueError("min_gain must be >= 0")
    p = _problem(c, params)
    if start is None:
        _, u = linalg.hermitian_max_eigpair(p.D)
    else:
        u = np.asarray(start, dtype=complex)
    eff = p.efficiency(u)
    best_u, best_eff = u, eff
    trace, raw = [eff], [eff]
    degenerate = []
    converged = False
    n = 0
    while n < max_iters:
        n += 1
        u_new, state = iteration_step(p, u)
        if state.clamped:
            degenerate.append(n)
        eff_new = p.efficiency(u_new)
        raw.append(eff_new)
        if eff_new > best_eff:
            best_u, best_eff = u_new, eff_new
        trace.append(best_eff)
        gain = eff_new - eff
        u, eff = u_new, eff_new
        if gain < min_gain:
            converged = abs(gain) < min_gain
            break
    if degenerate:
        log.debug("iterative beamforming clamped coil currents in iterations %s",
                  degenerate)
    return p.result("iterative", best_u, iterations=n, efficiency_trace=trace,
                    converged=converged, raw_trace=raw,
                    degenerate_iterations=degenerate)


METHODS = {
    "uniform": uniform,
    "closest-neighbor": mrc_closest_neighbor,
    "eigen": eig_receive_power,
    "iterative": iterative_beamforming,
}


def run_method(method, c, params, **opts):
    """Dispatch to a strategy by name (see ``METHODS``)."""
    try:
        fn = METHODS[method]
    except KeyError:
        raise ValueError(f"unknown method {method!r}; choose from {sorted(METHODS)}")
    return fn(c, params, **opts)


def solve_with_priorities(c, params, method="iterative", priorities=None, **opts):
    """Run ``method`` with receiver priorities ``priorities`` (default: as stored).

    The returned result's ``efficiency`` is the weighted ratio; the
    unweighted per-receiver efficiencies are in ``receiver_efficiencies``.
    """
    if priorities is not None:
        c = c.with_priorities(priorities)
    w = c.priorities
    if w.size == 0 or not np.any(w > 0):
        raise AllZeroPriorities("at least one receiver needs a positive priority")
    return run_method(method, c, params, **opts)
