"""
Coupling between coils
======================

Every coil is a small magnetic dipole. Two coils couple through the
polarization factor J, which depends on their axes and on the line joining
them, and through the cubic fall-off with distance.
"""

import numpy as np

from mibeam.circuit import CircuitParams
from mibeam.geometry import (CANONICAL_BASIS, Constellation, Receiver, circle_position,
                             coupling_factor_vectors, mutual_inductance_matrix)

# coaxial coils couple twice as strongly as side-by-side parallel coils,
# and crossed coils do not couple at all
x, y, z = np.eye(3)
print("coaxial  J =", coupling_factor_vectors(x, x, x))
print("parallel J =", coupling_factor_vectors(z, z, x))
print("crossed  J =", coupling_factor_vectors(y, z, x))

# %%
# A scene: the 3-coil transmitter at the origin and receivers on a circle
# of radius d. The coupling factor F = 2 pi f Mbar / R fixes Mbar.
params = CircuitParams.resonant(R=1.0, f0=125e6)
F = 15.0
receivers = [
    Receiver(circle_position(0.0, 0.4), [1.0, 0.0, 0.0]),
    Receiver(circle_position(np.pi / 2, 0.4), [0.0, 0.0, 1.0]),
]
scene = Constellation(CANONICAL_BASIS, receivers, 0.4, params.ref_mutual(F), F)

# %%
# Mutual inductances in units of Mbar; rows 0-2 are the transmitter coils.
np.set_printoptions(precision=3, suppress=True)
print(mutual_inductance_matrix(scene) / scene.ref_mutual)
