"""
Monte-Carlo experiments over random constellations.

Each constellation ``i`` draws from its own generator,
``numpy.random.default_rng([master_seed, i])``, and the same geometry is
reused for every coupling factor in the grid. Results are merged in
constellation order, so output is byte-identical for a given seed whatever
the number of worker processes.

Experiments
-----------
pattern
    One receiver with a random axis per constellation. The drive is
    optimized for the receiver at 0 degrees, then that fixed drive (and, for
    comparison, the uniform drive) is evaluated with the receiver moved to
    every angle of a 1-degree grid. Output rows are the mean efficiency per
    (F, angle, drive).
priority
    Two receivers. Iterative beamforming under priorities 1:1 and the
    requested ratio (default 2:1), and closest-neighbor MRC towards Rx 1.
efficiency-sweep
    All four methods on K receivers with unit priorities.
"""

import csv
import io
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Union

import numpy as np

from . import __version__
from . import beamforming as bf
from .circuit import (CircuitParams, build_impedance, network_matrices,
                      single_receiver_efficiency, solve_network)
from .geometry import (CANONICAL_BASIS, Constellation, Receiver, circle_position,
                       random_constellation, random_unit_vectors)
from .oracle import OracleConfig, brute_force_best
from .scenario import Scenario, load_scenario

__all__ = [
    "ExperimentSpec",
    "ExperimentRecord",
    "default_f_grid",
    "parse_load",
    "scene_rng",
    "make_scene",
    "run_pattern",
    "run_priority",
    "run_efficiency_sweep",
    "run_oracle_check",
    "run_solve",
    "run",
    "summarize",
    "gain_table",
    "pattern_peaks",
    "SWEEP_COLUMNS",
    "PATTERN_COLUMNS",
    "ORACLE_COLUMNS",
]

SWEEP_METHODS = ("uniform", "closest-neighbor", "eigen", "iterative")
SWEEP_COLUMNS = ("F", "constellation", "method", "efficiency",
                 "receiver_efficiencies", "iterations")
PATTERN_COLUMNS = ("F", "angle_deg", "method", "mean_efficiency")
ORACLE_COLUMNS = ("F", "constellation", "K", "iterative", "oracle", "gap")
PATTERN_F_GRID = (0.1, 1.0, 10.0, 100.0)


def default_f_grid(n=25, lo=0.1, hi=100.0):
    """``n`` log-spaced coupling factors from ``lo`` to ``hi``."""
    return [float(v) for v in np.logspace(math.log10(lo), math.log10(hi), n)]


def parse_load(text):
    """``"matched"`` or a resistance in ohms."""
    if isinstance(text, str) and text.strip().lower() == "matched":
        return "matched"
    value = float(text)
    if not value > 0:
        raise ValueError("fixed load must be > 0 ohms")
    return value


@dataclass
class ExperimentSpec:
    """Parameters of one experiment run.

    ``load_policy`` is ``"matched"`` (``R sqrt(1 + F^2)`` per scene) or a
    fixed resistance in ohms.
    """

    kind: str
    n_receivers: int = 5
    f_values: List[float] = field(default_factory=default_f_grid)
    constellations: int = 1000
    priorities: Optional[List[float]] = None
    master_seed: int = 0
    load_policy: Union[str, float] = "matched"
    output_path: Optional[str] = None
    distance: float = 0.4
    max_iters: int = bf.DEFAULT_MAX_ITERS
    min_gain: float = bf.DEFAULT_MIN_GAIN
    oracle_restarts: int = 10
    workers: int = 1
    R: float = 1.0
    f0: float = 125e6

    def __post_init__(self):
        if self.kind not in ("pattern", "priority", "efficiency-sweep", "oracle-check"):
            raise ValueError(f"unknown experiment kind {self.kind!r}")
        if self.constellations < 1:
            raise ValueError("constellations must be >= 1")
        if not self.f_values or any(not f > 0 for f in self.f_values):
            raise ValueError("f_values must be a nonempty list of positive numbers")
        if self.n_receivers < 1:
            raise ValueError("n_receivers must be >= 1")
        self.f_values = [float(f) for f in self.f_values]
        self.load_policy = parse_load(self.load_policy)

    @property
    def params(self):
        return CircuitParams.resonant(R=self.R, f0=self.f0)

    def load_for(self, coupling):
        if self.load_policy == "matched":
            return self.params.matched_load(coupling)
        return float(self.load_policy)


@dataclass
class ExperimentRecord:
    """Rows of an experiment plus provenance metadata."""

    kind: str
    columns: Sequence[str]
    rows: List[tuple]
    metadata: dict

    def to_csv(self, path=None):
        """Write CSV with ``#``-prefixed metadata lines; returns the text."""
        buf = io.StringIO()
        for key, value in self.metadata.items():
            buf.write(f"# {key}: {value}\n")
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(self.columns)
        for row in self.rows:
            writer.writerow([_fmt(v) for v in row])
        text = buf.getvalue()
        if path is not None:
            with open(path, "w", encoding="utf-8", newline="") as fh:
                fh.write(text)
        return text

    def column(self, name):
        i = list(self.columns).index(name)
        return [row[i] for row in self.rows]


def _fmt(value):
    if isinstance(value, float):
        return repr(value)
    if isinstance(value, (list, tuple, np.ndarray)):
        return ";".join(repr(float(v)) for v in value)
    return str(value)


def _metadata(spec, **extra):
    meta = {
        "mibeam_version": __version__,
        "experiment": spec.kind,
        "master_seed": spec.master_seed,
        "constellations": spec.constellations,
        "receivers": spec.n_receivers,
        "load_policy": ("matched R*sqrt(1+F^2)" if spec.load_policy == "matched"
                        else f"fixed {spec.load_policy!r} ohm"),
        "f_grid": ",".join(repr(f) for f in spec.f_values),
        "R_ohm": repr(spec.R),
        "f0_hz": repr(spec.f0),
        "distance_m": repr(spec.distance),
        "max_iters": spec.max_iters,
        "min_gain": repr(spec.min_gain),
    }
    if spec.priorities is not None:
        meta["priorities"] = ":".join(repr(float(w)) for w in spec.priorities)
    meta.update(extra)
    return meta


def scene_rng(master_seed, index):
    """Independent generator for constellation ``index``."""
    return np.random.default_rng([int(master_seed), int(index)])


def make_scene(spec, coupling, index, priorities=None):
    """Rebuild constellation ``index`` of ``spec`` at coupling ``coupling``."""
    return random_constellation(
        spec.n_receivers, coupling, spec.params, scene_rng(spec.master_seed, index),
        distance=spec.distance, load=spec.load_for(coupling), priorities=priorities)


def _map(fn, items, workers):
    if workers <= 1:
        return [fn(item) for item in items]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items, chunksize=max(1, len(items) // (4 * workers))))


def _iter_opts(spec):
    return {"max_iters": spec.max_iters, "min_gain": spec.min_gain}


# -- efficiency sweep ---------------------------------------------------------

def _sweep_one(args):
    spec, index = args
    params = spec.params
    rows = []
    for F in spec.f_values:
        p = bf.Problem(make_scene(spec, F, index), params)
        for method in SWEEP_METHODS:
            opts = _iter_opts(spec) if method == "iterative" else {}
            r = bf.run_method(method, p, params, **opts)
            rows.append((F, index, method, r.efficiency,
                         list(r.receiver_efficiencies), r.iterations))
    return rows


def run_efficiency_sweep(spec):
    """Efficiency of every method on every (F, constellation) pair."""
    chunks = _map(_sweep_one, [(spec, i) for i in range(spec.constellations)], spec.workers)
    rows = sorted((row for chunk in chunks for row in chunk),
                  key=lambda r: (spec.f_values.index(r[0]), r[1], SWEEP_METHODS.index(r[2])))
    return ExperimentRecord("efficiency-sweep", SWEEP_COLUMNS, rows, _metadata(spec))


# -- priority -----------------------------------------------------------------

def _priority_one(args):
    spec, index = args
    params = spec.params
    ratio = list(spec.priorities or [2.0, 1.0])
    label = "iterative-" + ":".join(f"{w:g}" for w in ratio)
    rows = []
    for F in spec.f_values:
        c = make_scene(spec, F, index)
        for name, weights in (("iterative-1:1", [1.0] * spec.n_receivers), (label, ratio)):
            r = bf.solve_with_priorities(c, params, "iterative", weights, **_iter_opts(spec))
            rows.append((F, index, name, r.efficiency, list(r.receiver_efficiencies),
                         r.iterations))
        r = bf.mrc_closest_neighbor(c, params, target=0)
        rows.append((F, index, "closest-neighbor", r.efficiency,
                     list(r.receiver_efficiencies), r.iterations))
    return rows


def run_priority(spec):
    """Two receivers: equal vs. skewed priorities vs. MRC towards Rx 1."""
    if spec.n_receivers != 2:
        raise ValueError("the priority experiment needs exactly two receivers")
    if spec.priorities is not None and len(spec.priorities) != 2:
        raise ValueError("give two priorities")
    chunks = _map(_priority_one, [(spec, i) for i in range(spec.constellations)], spec.workers)
    f_pos = {F: i for i, F in enumerate(spec.f_values)}
    rows = sorted((row for chunk in chunks for row in chunk),
                  key=lambda r: (f_pos[r[0]], r[1]))
    return ExperimentRecord("priority", SWEEP_COLUMNS, rows, _metadata(spec))


# -- pattern ------------------------------------------------------------------

def _pattern_one(args):
    spec, index, angles, independent_axis = args
    params = spec.params
    rng = scene_rng(spec.master_seed, index)
    target_axis, other_axis = random_unit_vectors(rng, 2)
    eval_axis = other_axis if independent_axis else target_axis
    centers = np.column_stack([np.cos(angles), np.sin(angles), np.zeros_like(angles)])
    axes = np.broadcast_to(eval_axis, centers.shape)
    out = {}
    ones = np.ones(3, dtype=complex)
    for F in spec.f_values:
        load = spec.load_for(F)
        scene = _single_scene(spec, F, target_axis, load)
        u_opt = bf.iterative_beamforming(scene, params, **_iter_opts(spec)).u_tx
        out[F, "optimized"] = single_receiver_efficiency(
            params, CANONICAL_BASIS, axes, centers, F, load, u_opt)
        out[F, "uniform"] = single_receiver_efficiency(
            params, CANONICAL_BASIS, axes, centers, F, load, ones)
    return out


def _single_scene(spec, coupling, axis, load):
    rx = Receiver(circle_position(0.0, spec.distance), axis, load=load)
    return Constellation(CANONICAL_BASIS, (rx,), spec.distance,
                         spec.params.ref_mutual(coupling), coupling)


def run_pattern(spec, angle_step_deg=1.0, independent_axis=False):
    """Mean angular efficiency pattern of the optimized and uniform drives.

    Per constellation one random receiver axis is drawn; the drive is
    optimized for that receiver at 0 degrees and the receiver, keeping its
    axis, is then swept around the transmitter. With ``independent_axis``
    the sweep uses a second, independently drawn axis instead.

    The pattern of any fixed drive is symmetric under a 180-degree move of
    the receiver, since coupling depends on the center line only up to sign.
    """
    if spec.n_receivers != 1:
        raise ValueError("the pattern experiment needs exactly one receiver")
    n = int(round(360.0 / angle_step_deg))
    degrees = np.arange(n) * angle_step_deg
    angles = np.radians(degrees)
    parts = _map(_pattern_one,
                 [(spec, i, angles, independent_axis) for i in range(spec.constellations)],
                 spec.workers)
    rows = []
    for F in spec.f_values:
        for method in ("optimized", "uniform"):
            total = np.zeros(n)
            for part in parts:
                total += part[F, method]
            mean = total / len(parts)
            rows.extend((F, float(a), method, float(m)) for a, m in zip(degrees, mean))
    meta = _metadata(spec, angle_step_deg=repr(float(angle_step_deg)),
                     tx_basis="canonical (not randomized)",
                     target="receiver at 0 deg with a random axis per constellation",
                     sweep_axis="independent random axis" if independent_axis
                     else "same as target")
    return ExperimentRecord("pattern", PATTERN_COLUMNS, rows, meta)


def pattern_peaks(record, coupling, method, count=2):
    """Angles (degrees) of the ``count`` largest local maxima of a mean pattern.

    The pattern is treated as periodic.
    """
    pts = [(r[1], r[3]) for r in record.rows if r[0] == coupling and r[2] == method]
    ang = np.array([a for a, _ in pts])
    val = np.array([v for _, v in pts])
    left, right = np.roll(val, 1), np.roll(val, -1)
    idx = np.where((val >= left) & (val > right))[0]
    idx = idx[np.argsort(-val[idx], kind="stable")][:count]
    return [float(ang[i]) for i in idx]


# -- oracle check --------------------------------------------------------------

def _oracle_one(args):
    spec, index = args
    params = spec.params
    rows = []
    for F in spec.f_values:
        p = bf.Problem(make_scene(spec, F, index), params)
        it = bf.iterative_beamforming(p, params, **_iter_opts(spec))
        cfg = OracleConfig(restarts=spec.oracle_restarts,
                           rng_seed=int(scene_rng(spec.master_seed, index).integers(2 ** 31)))
        best = brute_force_best(p, params, cfg)
        rows.append((F, index, spec.n_receivers, it.efficiency, best.efficiency,
                     best.efficiency - it.efficiency))
    return rows


def run_oracle_check(spec):
    """Compare iterative beamforming with the brute-force optimum per scene."""
    chunks = _map(_oracle_one, [(spec, i) for i in range(spec.constellations)], spec.workers)
    f_pos = {F: i for i, F in enumerate(spec.f_values)}
    rows = sorted((row for chunk in chunks for row in chunk),
                  key=lambda r: (f_pos[r[0]], r[1]))
    meta = _metadata(spec, oracle_restarts=spec.oracle_restarts)
    return ExperimentRecord("oracle-check", ORACLE_COLUMNS, rows, meta)


# -- single scene ---------------------------------------------------------------

SOLVE_COLUMNS = ("method", "efficiency", "receiver_efficiencies", "iterations",
                 "u_tx")


def _cfmt(z):
    return f"{z.real:+.6g}{z.imag:+.6g}j"


def _matrix_lines(name, m):
    lines = [f"{name} ({m.shape[0]}x{m.shape[1]}):"]
    for row in m:
        lines.append("  [" + ", ".join(_cfmt(z) for z in row) + "]")
    return lines


def run_solve(scenario, oracle=False, oracle_config=None):
    """Inspect one scene from a scenario file (or a parsed ``Scenario``).

    Returns ``(record, report)``: an :class:`ExperimentRecord` with one row per
    method, and a human-readable report with the impedance blocks, ``A``,
    ``C``, every method's drive, currents and powers. A scene without
    receivers reports only the transmitter-side solution under the uniform
    drive.
    """
    sc = scenario if isinstance(scenario, Scenario) else load_scenario(scenario)
    c, params = sc.constellation, sc.params
    z = build_impedance(c, params)
    lines = [f"receivers: {c.n_receivers}", f"F: {c.coupling!r}",
             f"Mbar_H: {c.ref_mutual!r}", f"d_m: {c.ref_distance!r}",
             f"f_hz: {params.f!r}", f"f0_hz: {params.f0!r}", f"R_ohm: {params.R!r}",
             f"load_policy: {sc.load_policy}"]
    lines += _matrix_lines("Z_tx", z.z_tx)
    meta = {"mibeam_version": __version__, "experiment": "solve",
            "receivers": c.n_receivers, "F": repr(c.coupling),
            "load_policy": sc.load_policy}
    if c.n_receivers == 0:
        a, _ = network_matrices(z)
        sol = solve_network(z, np.ones(3, dtype=complex), matrices=(a, np.zeros((0, 3))))
        lines += _matrix_lines("A", a)
        lines.append("drive [1, 1, 1] V: i_tx = [" + ", ".join(_cfmt(i) for i in sol.i_tx)
                     + f"] A, P_t,total = {sol.p_tx_total:.6g} W")
        lines.append("no receivers: efficiency not reported")
        return ExperimentRecord("solve", SOLVE_COLUMNS, [], meta), "\n".join(lines)

    lines += _matrix_lines("Z_rx", z.z_rx)
    lines += _matrix_lines("Z_ch", z.z_ch)
    p = bf.Problem(c, params)
    lines += _matrix_lines("A", p.A)
    lines += _matrix_lines("C", p.C)
    results = [bf.run_method(m, p, params) for m in SWEEP_METHODS]
    if oracle:
        results.append(brute_force_best(p, params, oracle_config))
    rows = []
    for r in results:
        sol = solve_network(z, r.u_tx, matrices=(p.A, p.C))
        lines.append(f"[{r.method}] efficiency = {r.efficiency:.6f}"
                     + (f" ({r.iterations} iterations)" if r.iterations else ""))
        lines.append("  u_tx = [" + ", ".join(_cfmt(u) for u in r.u_tx) + "] V")
        lines.append("  i_tx = [" + ", ".join(_cfmt(i) for i in sol.i_tx) + "] A")
        lines.append("  i_rx = [" + ", ".join(_cfmt(i) for i in sol.i_rx) + "] A")
        lines.append(f"  P_t,total = {sol.p_tx_total:.6g} W, P_r = ["
                     + ", ".join(f"{v:.6g}" for v in sol.p_rx) + "] W")
        rows.append((r.method, r.efficiency, list(r.receiver_efficiencies), r.iterations,
                     " ".join(_cfmt(u) for u in r.u_tx)))
    return ExperimentRecord("solve", SOLVE_COLUMNS, rows, meta), "\n".join(lines)


RUNNERS = {
    "pattern": run_pattern,
    "priority": run_priority,
    "efficiency-sweep": run_efficiency_sweep,
    "oracle-check": run_oracle_check,
}


def run(spec):
    """Run ``spec`` and write its CSV to ``spec.output_path`` if set."""
    record = RUNNERS[spec.kind](spec)
    if spec.output_path:
        record.to_csv(spec.output_path)
    return record


# -- summaries -----------------------------------------------------------------

def summarize(record):
    """Mean and standard deviation of efficiency per (F, method).

    Returns a dict keyed by ``(F, method)`` with ``mean``, ``std`` and ``n``;
    for priority records also ``rx_mean`` (mean per-receiver efficiencies).
    """
    groups = {}
    for F, _, method, eff, rx_eff, _ in record.rows:
        groups.setdefault((F, method), []).append((eff, rx_eff))
    out = {}
    for key, items in groups.items():
        effs = np.array([e for e, _ in items])
        entry = {"mean": float(effs.mean()), "std": float(effs.std()), "n": len(effs)}
        rx = [r for _, r in items if len(r)]
        if rx:
            entry["rx_mean"] = np.mean(np.array(rx), axis=0).tolist()
        out[key] = entry
    return out


def gain_table(record):
    """Per-F gain of ``iterative`` over the best baseline mean.

    Returns a list of dicts with ``F``, the four means, ``best_baseline``,
    ``abs_gain`` and ``rel_gain`` (fraction of the best baseline).
    """
    stats = summarize(record)
    table = []
    for F in sorted({k[0] for k in stats}):
        means = {m: stats[F, m]["mean"] for m in SWEEP_METHODS if (F, m) in stats}
        base_name = max((m for m in means if m != "iterative"), key=means.get)
        base = means[base_name]
        gain = means["iterative"] - base
        table.append({"F": F, **means, "best_baseline": base_name, "abs_gain": gain,
                      "rel_gain": gain / base if base > 0 else float("nan")})
    return table
