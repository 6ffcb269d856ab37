"""
Brute-force reference optimizer for the exact efficiency.

Efficiency is invariant to complex scaling of the drive, so the search runs
over a 4-parameter chart of the projective drive space: one coil (the pivot)
is pinned to 1 and the other two carry free complex values. Each restart is
a Nelder-Mead simplex search on that chart; starts are the outputs of the
beamforming methods plus random drives.
"""

from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize

from . import beamforming as bf
from .geometry import N_TX

__all__ = ["OracleConfig", "parameterize", "chart_coordinates", "brute_force_best"]

WARM_START_METHODS = ("closest-neighbor", "eigen", "iterative")


@dataclass(frozen=True)
class OracleConfig:
    """Search budget of :func:`brute_force_best`.

    Attributes
    ----------
    restarts : int
        Random starts, in addition to the warm starts.
    max_evals : int
        Objective evaluations per start.
    convergence_tol : float
        Simplex tolerance on both parameters and objective.
    rng_seed : int
    """

    restarts: int = 20
    max_evals: int = 2000
    convergence_tol: float = 1e-10
    rng_seed: int = 0

    def __post_init__(self):
        if self.restarts < 1:
            raise ValueError("restarts must be >= 1")
        if self.max_evals < 100:
            raise ValueError("max_evals must be >= 100")


def parameterize(x, pivot=0):
    """Map 4 reals to a unit-norm complex 3-vector.

    The pivot entry is real and positive; the other two entries, in index
    order, are ``x[0] + 1j x[1]`` and ``x[2] + 1j x[3]`` before normalizing.
    The zero vector maps to the pivot's unit vector.
    """
    x = np.asarray(x, dtype=float)
    u = np.empty(N_TX, dtype=complex)
    u[pivot] = 1.0
    others = [i for i in range(N_TX) if i != pivot]
    u[others[0]] = complex(x[0], x[1])
    u[others[1]] = complex(x[2], x[3])
    return u / np.linalg.norm(u)


def chart_coordinates(u, pivot=None):
    """Inverse of :func:`parameterize`.

    Returns ``(x, pivot)``; ``pivot`` defaults to the largest-magnitude entry,
    which keeps the chart well conditioned.
    """
    u = np.asarray(u, dtype=complex)
    if pivot is None:
        pivot = int(np.argmax(np.abs(u)))
    if u[pivot] == 0:
        raise ValueError("pivot entry is zero")
    w = u / u[pivot]
    others = [i for i in range(N_TX) if i != pivot]
    x = np.array([w[others[0]].real, w[others[0]].imag,
                  w[others[1]].real, w[others[1]].imag])
    return x, pivot


def _search(p, u0, cfg):
    x0, pivot = chart_coordinates(u0)

    def objective(x):
        return -p.efficiency(parameterize(x, pivot))

    res = minimize(objective, x0, method="Nelder-Mead",
                   options={"maxfev": cfg.max_evals, "xatol": cfg.convergence_tol,
                            "fatol": cfg.convergence_tol, "adaptive": False})
    u = parameterize(res.x, pivot)
    eff = p.efficiency(u)
    # the simplex may wander; never report worse than its start
    eff0 = p.efficiency(u0)
    if eff0 > eff:
        return u0, eff0
    return u, eff


def brute_force_best(c, params, cfg=None):
    """Best drive found by multi-start simplex search.

    Warm starts are the ``closest-neighbor``, ``eigen`` and ``iterative``
    solutions; ``cfg.restarts`` random complex drives follow. Ties are broken
    in favour of the earlier start, so the result is deterministic for a
    given ``cfg.rng_seed``.

    Returns
    -------
    BeamformingResult
        ``method == "oracle"``; ``iterations`` counts the starts.
    """
    cfg = cfg or OracleConfig()
    p = c if isinstance(c, bf.Problem) else bf.Problem(c, params)
    rng = np.random.default_rng(cfg.rng_seed)
    starts = [bf.run_method(m, p, params).u_tx for m in WARM_START_METHODS]
    for _ in range(cfg.restarts):
        starts.append(rng.standard_normal(N_TX) + 1j * rng.standard_normal(N_TX))
    best_u, best_eff = None, -np.inf
    trace = []
    for u0 in starts:
        if not np.any(u0):
            continue
        u, eff = _search(p, u0 / np.linalg.norm(u0), cfg)
        if eff > best_eff:
            best_u, best_eff = u, eff
        trace.append(best_eff)
    return p.result("oracle", best_u, iterations=len(trace), efficiency_trace=trace)
