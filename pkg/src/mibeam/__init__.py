"""Beamforming for magnetic-induction wireless power transfer.

A three-coil orthogonal transmitter drives K single-coil receivers through a
coupled resonant network. The package models the network, evaluates the
apparent-power efficiency of a drive vector, and implements several drive
optimization strategies plus a Monte-Carlo experiment harness.
"""

__version__ = "0.1.0"

from .circuit import CircuitParams, build_impedance, efficiency, solve_network
from .geometry import Constellation, Receiver, random_constellation
from .beamforming import (BeamformingResult, eig_receive_power, iterative_beamforming,
                          mrc_closest_neighbor, solve_with_priorities, uniform)
from .errors import (AllZeroPriorities, CoincidentCoils, DegenerateIteration, MIBeamError,
                     NotHermitian, ParseError, SingularMatrix, ZeroDrive)

__all__ = [
    "CircuitParams", "Constellation", "Receiver", "random_constellation",
    "build_impedance", "solve_network", "efficiency",
    "BeamformingResult", "uniform", "mrc_closest_neighbor", "eig_receive_power",
    "iterative_beamforming", "solve_with_priorities",
    "MIBeamError", "SingularMatrix", "NotHermitian", "CoincidentCoils", "ZeroDrive",
    "DegenerateIteration", "AllZeroPriorities", "ParseError",
]
