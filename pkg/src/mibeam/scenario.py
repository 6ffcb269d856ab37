"""
Scenario files: a single scene described in JSON.

Schema (unknown keys are rejected at every level)::

    {
      "circuit": {                  # optional
        "R": 1.0,                   # ohm, default 1
        "f0": 125e6,                # resonance, Hz, default 125 MHz
        "f": 125e6,                 # operating frequency, default f0
        "L": 1.5e-7,                # henry, default 150 nH
        "loadPolicy": "matched"     # "matched" or a resistance in ohms
      },
      "coupling": {                 # required; exactly one of F, Mbar
        "F": 15.0,
        "Mbar": 1.9e-9,             # henry
        "d": 0.4                    # meters, default 0.4
      },
      "transmitterRotation": {      # optional; one of the two forms
        "quaternion": [w, x, y, z]
        # or: "axis": [x, y, z], "angleDeg": 30
      },
      "receivers": [                # required, may be empty
        {
          "angleDeg": 0.0,          # or "position": [x, y, z] at distance d
          "axis": [0, 0, 1],        # normalized on load
          "priority": 1.0,          # default 1
          "load": 16.03             # ohms, default from loadPolicy
        }
      ]
    }
"""

import json
import math

import numpy as np

from .circuit import DEFAULT_F0, DEFAULT_L, CircuitParams
from .errors import ParseError
from .geometry import Constellation, Receiver, circle_position

__all__ = ["Scenario", "load_scenario", "parse_scenario", "scenario_to_dict",
           "dump_scenario"]

_TOP = {"circuit", "coupling", "transmitterRotation", "receivers"}
_CIRCUIT = {"R", "f0", "f", "L", "loadPolicy"}
_COUPLING = {"F", "Mbar", "d"}
_ROTATION = {"quaternion", "axis", "angleDeg"}
_RECEIVER = {"angleDeg", "position", "axis", "priority", "load"}


class Scenario:
    """A parsed scenario: the scene, its circuit and the load policy used."""

    def __init__(self, constellation, params, load_policy):
        self.constellation = constellation
        self.params = params
        self.load_policy = load_policy

    def __repr__(self):
        return (f"Scenario(K={self.constellation.n_receivers}, "
                f"F={self.constellation.coupling!r}, load_policy={self.load_policy!r})")


def _obj(value, path, allowed):
    if not isinstance(value, dict):
        raise ParseError("expected an object", field=path)
    unknown = sorted(set(value) - allowed)
    if unknown:
        name = f"{path}.{unknown[0]}" if path else unknown[0]
        raise ParseError(f"unknown field (allowed: {', '.join(sorted(allowed))})",
                         field=name)
    return value


def _number(value, path, positive=False, nonneg=False):
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ParseError(f"expected a number, got {json.dumps(value)}", field=path)
    value = float(value)
    if not math.isfinite(value):
        raise ParseError("must be finite", field=path)
    if positive and value <= 0:
        raise ParseError("must be > 0", field=path)
    if nonneg and value < 0:
        raise ParseError("must be >= 0", field=path)
    return value


def _vector(value, path, length=3):
    if not isinstance(value, list) or len(value) != length:
        raise ParseError(f"expected a list of {length} numbers", field=path)
    return np.array([_number(v, f"{path}[{i}]") for i, v in enumerate(value)])


def _unit(value, path):
    v = _vector(value, path)
    n = np.linalg.norm(v)
    if n == 0:
        raise ParseError("axis must be nonzero", field=path)
    return v / n


def _rotation(spec):
    path = "transmitterRotation"
    spec = _obj(spec, path, _ROTATION)
    if "quaternion" in spec:
        if set(spec) != {"quaternion"}:
            raise ParseError("give either quaternion or axis+angleDeg", field=path)
        q = _vector(spec["quaternion"], f"{path}.quaternion", length=4)
        n = np.linalg.norm(q)
        if n == 0:
            raise ParseError("quaternion must be nonzero", field=f"{path}.quaternion")
        w, x, y, z = q / n
    else:
        for key in ("axis", "angleDeg"):
            if key not in spec:
                raise ParseError("missing required field", field=f"{path}.{key}")
        axis = _unit(spec["axis"], f"{path}.axis")
        half = math.radians(_number(spec["angleDeg"], f"{path}.angleDeg")) / 2
        w = math.cos(half)
        x, y, z = math.sin(half) * axis
    rot = np.array([
        [1 - 2 * (y * y + z * z), 2 * (x * y - z * w), 2 * (x * z + y * w)],
        [2 * (x * y + z * w), 1 - 2 * (x * x + z * z), 2 * (y * z - x * w)],
        [2 * (x * z - y * w), 2 * (y * z + x * w), 1 - 2 * (x * x + y * y)],
    ])
    return rot.T


def parse_scenario(data):
    """Build a :class:`Scenario` from already-decoded JSON data."""
    data = _obj(data, "", _TOP)
    circuit = _obj(data.get("circuit", {}), "circuit", _CIRCUIT)
    R = _number(circuit.get("R", 1.0), "circuit.R", positive=True)
    f0 = _number(circuit.get("f0", DEFAULT_F0), "circuit.f0", positive=True)
    L = _number(circuit.get("L", DEFAULT_L), "circuit.L", positive=True)
    f = _number(circuit.get("f", f0), "circuit.f", positive=True)
    params = CircuitParams.resonant(R=R, f0=f0, L=L, f=f)

    if "coupling" not in data:
        raise ParseError("missing required field", field="coupling")
    coupling = _obj(data["coupling"], "coupling", _COUPLING)
    d = _number(coupling.get("d", 0.4), "coupling.d", positive=True)
    if ("F" in coupling) == ("Mbar" in coupling):
        raise ParseError("give exactly one of F and Mbar", field="coupling")
    if "F" in coupling:
        F = _number(coupling["F"], "coupling.F", positive=True)
        mbar = params.ref_mutual(F)
    else:
        mbar = _number(coupling["Mbar"], "coupling.Mbar", positive=True)
        F = params.omega * mbar / params.R

    policy = circuit.get("loadPolicy", "matched")
    if policy == "matched":
        default_load = params.matched_load(F)
    else:
        default_load = _number(policy, "circuit.loadPolicy", positive=True)

    basis = np.eye(3)
    if "transmitterRotation" in data:
        basis = _rotation(data["transmitterRotation"])

    if "receivers" not in data:
        raise ParseError("missing required field", field="receivers")
    if not isinstance(data["receivers"], list):
        raise ParseError("expected a list", field="receivers")
    receivers = []
    for i, item in enumerate(data["receivers"]):
        path = f"receivers[{i}]"
        item = _obj(item, path, _RECEIVER)
        if ("angleDeg" in item) == ("position" in item):
            raise ParseError("give exactly one of angleDeg and position", field=path)
        if "angleDeg" in item:
            pos = circle_position(math.radians(_number(item["angleDeg"], f"{path}.angleDeg")), d)
        else:
            pos = _vector(item["position"], f"{path}.position")
            if abs(np.linalg.norm(pos) - d) > 1e-9 * d:
                raise ParseError(f"position must lie at distance d={d} from the transmitter",
                                 field=f"{path}.position")
        if "axis" not in item:
            raise ParseError("missing required field", field=f"{path}.axis")
        axis = _unit(item["axis"], f"{path}.axis")
        priority = _number(item.get("priority", 1.0), f"{path}.priority", nonneg=True)
        load = _number(item.get("load", default_load), f"{path}.load", positive=True)
        receivers.append(Receiver(pos, axis, priority=priority, load=load))

    try:
        scene = Constellation(basis, receivers, d, mbar, F)
    except ValueError as exc:
        raise ParseError(str(exc)) from exc
    return Scenario(scene, params, policy)


def load_scenario(path):
    """Read and validate a scenario file.

    Raises
    ------
    ParseError
        On invalid JSON (with line number) or a schema violation (with the
        dotted field path).
    """
    with open(path, encoding="utf-8") as fh:
        text = fh.read()
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(exc.msg, line=exc.lineno) from exc
    return parse_scenario(data)


def scenario_to_dict(c, params, load_policy="matched"):
    """JSON-ready description of a scene (receivers written by position)."""
    basis = c.tx_basis
    # rotation R with R e_i = basis[i]  ->  R = basis.T
    rot = basis.T
    trace = np.trace(rot)
    # quaternion from rotation matrix (Shepperd)
    if trace > 0:
        s = 2.0 * math.sqrt(1.0 + trace)
        q = [0.25 * s, (rot[2, 1] - rot[1, 2]) / s, (rot[0, 2] - rot[2, 0]) / s,
             (rot[1, 0] - rot[0, 1]) / s]
    else:
        i = int(np.argmax(np.diag(rot)))
        j, k = (i + 1) % 3, (i + 2) % 3
        s = 2.0 * math.sqrt(1.0 + rot[i, i] - rot[j, j] - rot[k, k])
        q = [0.0] * 4
        q[0] = (rot[k, j] - rot[j, k]) / s
        q[1 + i] = 0.25 * s
        q[1 + j] = (rot[j, i] + rot[i, j]) / s
        q[1 + k] = (rot[k, i] + rot[i, k]) / s
    return {
        "circuit": {"R": params.R, "f0": params.f0, "f": params.f, "L": params.L,
                    "loadPolicy": load_policy},
        "coupling": {"F": c.coupling, "d": c.ref_distance},
        "transmitterRotation": {"quaternion": [float(v) for v in q]},
        "receivers": [
            {"position": rx.position.tolist(), "axis": rx.axis.tolist(),
             "priority": rx.priority, "load": rx.load}
            for rx in c.receivers
        ],
    }


def dump_scenario(c, params, path, load_policy="matched"):
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(scenario_to_dict(c, params, load_policy), fh, indent=2)
        fh.write("\n")
