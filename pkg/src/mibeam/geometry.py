"""
Coil placement and magnetic coupling.

Coil indices are 0-based throughout: 0, 1, 2 are the orthogonal transmitter
coils and ``3 + i`` is receiver ``i``. The transmitter sits at the origin and
receivers lie on a circle of radius ``d`` in the x-y plane.

The polarization factor between coils with unit axes ``a_k``, ``a_l`` and
unit center line ``u`` is::

    J = 2 sin(t_k) sin(t_l) + cos(t_k) cos(t_l) cos(phi)

where ``sin(t)`` is the axis component along ``u`` and ``phi`` the angle
between the axis projections onto the plane orthogonal to ``u``. In vector
form this is ``a_k . a_l + (a_k . u)(a_l . u)``: 2 for coaxial coils, 1 for
parallel side-by-side coils, 0 for crossed coils.
"""

from dataclasses import dataclass, field, replace
from typing import Optional, Sequence

import numpy as np

from .errors import CoincidentCoils

__all__ = [
    "Receiver",
    "Constellation",
    "coupling_factor_angles",
    "coupling_factor_vectors",
    "mutual_inductance",
    "mutual_inductance_matrix",
    "coil_axes",
    "coil_positions",
    "circle_position",
    "random_rotation",
    "random_unit_vectors",
    "random_constellation",
    "rotate_constellation",
    "CANONICAL_BASIS",
]

N_TX = 3
CANONICAL_BASIS = np.eye(3)

_UNIT_TOL = 1e-12
_RADIUS_RTOL = 1e-9


def _unit(v, name):
    v = np.array(v, dtype=float)
    if v.shape != (3,) or not np.all(np.isfinite(v)):
        raise ValueError(f"{name} must be a finite 3-vector")
    if abs(np.linalg.norm(v) - 1.0) > _UNIT_TOL:
        raise ValueError(f"{name} must be unit-norm (|v| = {np.linalg.norm(v)!r})")
    return v


@dataclass(frozen=True)
class Receiver:
    """A single-coil receiver.

    Attributes
    ----------
    position : ndarray, shape (3,)
        Coil center in meters.
    axis : ndarray, shape (3,)
        Unit coil axis.
    priority : float
        Weight of this receiver's power in the objective, >= 0.
    load : float
        Real load resistance in ohms, > 0.
    """

    position: np.ndarray
    axis: np.ndarray
    priority: float = 1.0
    load: float = 1.0

    def __post_init__(self):
        pos = np.array(self.position, dtype=float)
        if pos.shape != (3,) or not np.all(np.isfinite(pos)):
            raise ValueError("receiver position must be a finite 3-vector")
        object.__setattr__(self, "position", pos)
        object.__setattr__(self, "axis", _unit(self.axis, "receiver axis"))
        if not np.isfinite(self.priority) or self.priority < 0:
            raise ValueError(f"priority must be finite and >= 0, got {self.priority}")
        if not np.isfinite(self.load) or self.load <= 0:
            raise ValueError(f"load must be finite and > 0, got {self.load}")
        object.__setattr__(self, "priority", float(self.priority))
        object.__setattr__(self, "load", float(self.load))


@dataclass(frozen=True)
class Constellation:
    """Transmitter orientation plus receivers at a common distance.

    Attributes
    ----------
    tx_basis : ndarray, shape (3, 3)
        Rows are the three orthonormal transmitter coil axes.
    receivers : tuple of Receiver
    ref_distance : float
        Transmitter-receiver distance ``d`` in meters.
    ref_mutual : float
        Mutual inductance at distance ``d`` with ``J = 1``, in henry.
    coupling : float
        Dimensionless coupling factor ``F = 2 pi f ref_mutual / R``; its
        consistency with a given circuit is checked when impedances are built.
    """

    tx_basis: np.ndarray
    receivers: tuple
    ref_distance: float
    ref_mutual: float
    coupling: float
    metadata: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        basis = np.array(self.tx_basis, dtype=float)
        if basis.shape != (3, 3) or not np.all(np.isfinite(basis)):
            raise ValueError("tx_basis must be a finite 3x3 matrix")
        gram = basis @ basis.T
        if np.max(np.abs(gram - np.eye(3))) > _UNIT_TOL:
            raise ValueError("tx_basis rows must be orthonormal")
        object.__setattr__(self, "tx_basis", basis)
        object.__setattr__(self, "receivers", tuple(self.receivers))
        if not self.ref_distance > 0:
            raise ValueError("ref_distance must be > 0")
        if not self.ref_mutual > 0 or not self.coupling > 0:
            raise ValueError("ref_mutual and coupling must be > 0")
        for i, rx in enumerate(self.receivers):
            if not isinstance(rx, Receiver):
                raise TypeError(f"receivers[{i}] is not a Receiver")
            r = np.linalg.norm(rx.position)
            if abs(r - self.ref_distance) > _RADIUS_RTOL * self.ref_distance:
                raise ValueError(
                    f"receivers[{i}] is at distance {r!r}, expected {self.ref_distance!r}")

    @property
    def n_receivers(self):
        return len(self.receivers)

    @property
    def priorities(self):
        return np.array([rx.priority for rx in self.receivers], dtype=float)

    @property
    def loads(self):
        return np.array([rx.load for rx in self.receivers], dtype=float)

    def with_priorities(self, priorities):
        priorities = list(priorities)
        if len(priorities) != self.n_receivers:
            raise ValueError(
                f"got {len(priorities)} priorities for {self.n_receivers} receivers")
        rxs = tuple(replace(rx, priority=w) for rx, w in zip(self.receivers, priorities))
        return replace(self, receivers=rxs)

    def with_loads(self, loads):
        loads = list(loads)
        if len(loads) != self.n_receivers:
            raise ValueError(f"got {len(loads)} loads for {self.n_receivers} receivers")
        rxs = tuple(replace(rx, load=z) for rx, z in zip(self.receivers, loads))
        return replace(self, receivers=rxs)


def coupling_factor_angles(theta_k, theta_l, phi):
    """Polarization factor from the two tilt angles and the twist angle."""
    return (2.0 * np.sin(theta_k) * np.sin(theta_l)
            + np.cos(theta_k) * np.cos(theta_l) * np.cos(phi))


def coupling_factor_vectors(axis_k, axis_l, center_line):
    """Polarization factor of two coils from their axes and center line.

    All inputs are unit vectors (broadcastable arrays with last dimension 3).
    The sign of ``center_line`` does not matter.
    """
    a_k = np.asarray(axis_k, dtype=float)
    a_l = np.asarray(axis_l, dtype=float)
    u = np.asarray(center_line, dtype=float)
    s_k = np.sum(a_k * u, axis=-1)
    s_l = np.sum(a_l * u, axis=-1)
    return np.sum(a_k * a_l, axis=-1) + s_k * s_l


def coil_axes(c):
    """(K+3, 3) array of coil axes, transmitter first."""
    if c.n_receivers == 0:
        return c.tx_basis.copy()
    return np.vstack([c.tx_basis, [rx.axis for rx in c.receivers]])


def coil_positions(c):
    """(K+3, 3) array of coil centers; the three transmitter coils share the origin."""
    pos = np.zeros((N_TX + c.n_receivers, 3))
    for i, rx in enumerate(c.receivers):
        pos[N_TX + i] = rx.position
    return pos


def _check_index(c, k):
    n = N_TX + c.n_receivers
    if not isinstance(k, (int, np.integer)) or not 0 <= k < n:
        raise IndexError(f"coil index {k!r} out of range for {n} coils")


def mutual_inductance(c, k, l):
    """Mutual inductance in henry between coils ``k`` and ``l`` (``k != l``).

    Transmitter coils are mutually decoupled (exactly 0). A transmitter-
    receiver pair couples with ``ref_mutual * J``; two receivers at
    separation ``s`` couple with ``ref_mutual * (d / s)**3 * J``.
    """
    _check_index(c, k)
    _check_index(c, l)
    if k == l:
        raise ValueError("mutual inductance needs two distinct coils")
    if k < N_TX and l < N_TX:
        return 0.0
    # order the pair so that M(k, l) and M(l, k) follow identical arithmetic
    k, l = min(k, l), max(k, l)
    axes = coil_axes(c)
    pos = coil_positions(c)
    delta = pos[l] - pos[k]
    dist = float(np.linalg.norm(delta))
    if dist == 0.0:
        raise CoincidentCoils(f"coils {k} and {l} share position {pos[k].tolist()}")
    u = delta / dist
    j = float(coupling_factor_vectors(axes[k], axes[l], u))
    if k < N_TX:
        return c.ref_mutual * j
    return c.ref_mutual * (c.ref_distance / dist) ** 3 * j


def mutual_inductance_matrix(c):
    """Symmetric (K+3, K+3) matrix of mutual inductances with zero diagonal."""
    n = N_TX + c.n_receivers
    axes = coil_axes(c)
    pos = coil_positions(c)
    m = np.zeros((n, n))
    iu, ju = np.triu_indices(n, k=1)
    keep = ju >= N_TX
    iu, ju = iu[keep], ju[keep]
    if iu.size == 0:
        return m
    delta = pos[ju] - pos[iu]
    dist = np.linalg.norm(delta, axis=1)
    if np.any(dist == 0.0):
        bad = int(np.argmax(dist == 0.0))
        raise CoincidentCoils(f"coils {iu[bad]} and {ju[bad]} share a position")
    u = delta / dist[:, None]
    j = coupling_factor_vectors(axes[iu], axes[ju], u)
    scale = np.where(iu < N_TX, 1.0, (c.ref_distance / dist) ** 3)
    m[iu, ju] = c.ref_mutual * scale * j
    m[ju, iu] = m[iu, ju]
    return m


def circle_position(angle, radius):
    """Point at ``angle`` radians on the circle of ``radius`` in the x-y plane."""
    return np.array([radius * np.cos(angle), radius * np.sin(angle), 0.0])


def random_rotation(rng):
    """Uniformly distributed rotation matrix from a normalized random quaternion."""
    q = rng.standard_normal(4)
    w, x, y, z = q / np.linalg.norm(q)
    return np.array([
        [1 - 2 * (y * y + z * z), 2 * (x * y - z * w), 2 * (x * z + y * w)],
        [2 * (x * y + z * w), 1 - 2 * (x * x + z * z), 2 * (y * z - x * w)],
        [2 * (x * z - y * w), 2 * (y * z + x * w), 1 - 2 * (x * x + y * y)],
    ])


def random_unit_vectors(rng, n):
    """``n`` independent isotropic unit 3-vectors, shape (n, 3)."""
    v = rng.standard_normal((n, 3))
    return v / np.linalg.norm(v, axis=1, keepdims=True)


def random_constellation(n_receivers, coupling, params, rng, *, distance=0.4,
                         load=None, priorities: Optional[Sequence[float]] = None,
                         random_tx=True):
    """Draw one random scene.

    Receivers get independent uniform angular positions on the circle of
    radius ``distance`` and isotropic random axes. The transmitter basis is a
    uniform random rotation of the canonical axes unless ``random_tx`` is
    false. Draw order is fixed (rotation, angles, axes) so a given generator
    state always produces the same geometry whatever the coupling.

    Parameters
    ----------
    n_receivers : int
        Number of receivers, >= 1.
    coupling : float
        Coupling factor F > 0; sets ``ref_mutual = F R / (2 pi f)``.
    params : CircuitParams
        Supplies ``R``, ``f`` and the default (matched) load.
    rng : numpy.random.Generator
    distance : float
        Transmitter-receiver distance in meters.
    load : float, optional
        Load resistance for every receiver; defaults to
        ``params.matched_load(coupling)``.
    priorities : sequence of float, optional
        Per-receiver weights, default all 1.
    random_tx : bool
        Randomly rotate the transmitter.
    """
    if n_receivers < 1:
        raise ValueError("need at least one receiver")
    if not coupling > 0:
        raise ValueError("coupling factor must be > 0")
    basis = random_rotation(rng).T if random_tx else CANONICAL_BASIS.copy()
    angles = rng.uniform(0.0, 2.0 * np.pi, n_receivers)
    axes = random_unit_vectors(rng, n_receivers)
    if load is None:
        load = params.matched_load(coupling)
    if priorities is None:
        priorities = [1.0] * n_receivers
    receivers = tuple(
        Receiver(circle_position(a, distance), ax, priority=w, load=load)
        for a, ax, w in zip(angles, axes, priorities))
    mbar = coupling * params.R / (2.0 * np.pi * params.f)
    return Constellation(basis, receivers, distance, mbar, coupling,
                         metadata={"angles": angles})


def rotate_constellation(c, rotation):
    """Apply a common rotation to every coil axis and receiver position."""
    rot = np.asarray(rotation, dtype=float)
    basis = c.tx_basis @ rot.T
    rxs = tuple(replace(rx, position=rot @ rx.position, axis=rot @ rx.axis)
                for rx in c.receivers)
    return replace(c, tx_basis=basis, receivers=rxs)
