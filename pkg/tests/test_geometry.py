import numpy as np
import pytest
from scipy.stats import chisquare

from mibeam.errors import CoincidentCoils
from mibeam.geometry import (CANONICAL_BASIS, Constellation, Receiver, circle_position,
                             coupling_factor_angles, coupling_factor_vectors, mutual_inductance,
                             mutual_inductance_matrix, random_constellation, random_rotation,
                             random_unit_vectors, rotate_constellation)

D = 0.4
MBAR = 1e-9


def extract_angles(a_k, a_l, u):
    """(theta_k, theta_l, phi) with sin(theta) the axis component along u."""
    s_k, s_l = a_k @ u, a_l @ u
    th_k = np.arcsin(np.clip(s_k, -1, 1))
    th_l = np.arcsin(np.clip(s_l, -1, 1))
    p_k, p_l = a_k - s_k * u, a_l - s_l * u
    n_k, n_l = np.linalg.norm(p_k), np.linalg.norm(p_l)
    if n_k < 1e-15 or n_l < 1e-15:
        return th_k, th_l, 0.0
    # signed angle in the plane orthogonal to u
    phi = np.arctan2(np.cross(p_k, p_l) @ u, p_k @ p_l)
    return th_k, th_l, phi


def two_receiver_scene(angle1, angle2, axis1, axis2, distance=D):
    rxs = [Receiver(circle_position(angle1, distance), axis1),
           Receiver(circle_position(angle2, distance), axis2)]
    return Constellation(CANONICAL_BASIS, rxs, distance, MBAR, 1.0)


class TestCouplingFactor:
    @pytest.mark.parametrize("phi", [0.0, 0.7, np.pi])
    def test_coaxial_angles(self, phi):
        assert coupling_factor_angles(np.pi / 2, np.pi / 2, phi) == pytest.approx(2.0)

    def test_broadside_angles(self):
        assert coupling_factor_angles(0.0, 0.0, 0.0) == 1.0

    @pytest.mark.parametrize("phi", [0.0, 1.3])
    def test_orthogonal_angles(self, phi):
        assert coupling_factor_angles(0.0, np.pi / 2, phi) == pytest.approx(0.0, abs=1e-16)

    def test_coaxial_vectors(self):
        u = np.array([0.0, 0.6, 0.8])
        assert coupling_factor_vectors(u, u, u) == pytest.approx(2.0)

    def test_parallel_broadside_vectors(self):
        a = np.array([0.0, 0.0, 1.0])
        assert coupling_factor_vectors(a, a, [1.0, 0, 0]) == pytest.approx(1.0)

    def test_crossed_vectors(self):
        assert coupling_factor_vectors([0, 1.0, 0], [0, 0, 1.0], [1.0, 0, 0]) == 0.0

    def test_matches_angle_formula(self, rng):
        a_k, a_l, u = (random_unit_vectors(rng, 10_000) for _ in range(3))
        j = coupling_factor_vectors(a_k, a_l, u)
        ref = np.array([coupling_factor_angles(*extract_angles(a, b, c))
                        for a, b, c in zip(a_k, a_l, u)])
        np.testing.assert_allclose(j, ref, rtol=0, atol=1e-12)

    def test_bounded_and_symmetric(self, rng):
        a_k, a_l, u = (random_unit_vectors(rng, 10_000) for _ in range(3))
        j = coupling_factor_vectors(a_k, a_l, u)
        assert np.all(np.abs(j) <= 2.0 + 1e-12)
        np.testing.assert_array_equal(j, coupling_factor_vectors(a_l, a_k, u))
        np.testing.assert_allclose(j, coupling_factor_vectors(a_k, a_l, -u), atol=1e-15)


class TestMutualInductance:
    def test_receivers_at_reference_distance(self):
        # 60 degrees apart on a circle of radius d: separation exactly d
        z = [0.0, 0.0, 1.0]
        c = two_receiver_scene(0.0, np.pi / 3, z, z)
        assert mutual_inductance(c, 3, 4) == pytest.approx(MBAR * 1.0, rel=1e-12)

    def test_cubic_distance_scaling(self):
        z = [0.0, 0.0, 1.0]
        near = two_receiver_scene(0.0, np.pi / 3, z, z)
        far = two_receiver_scene(0.0, np.pi, z, z)  # separation 2d
        assert mutual_inductance(far, 3, 4) == pytest.approx(
            mutual_inductance(near, 3, 4) / 8, rel=1e-12)

    def test_transmitter_pairs_zero(self, scene_factory):
        c = scene_factory(3, 5.0, 1)
        for k in range(3):
            for l in range(3):
                if k != l:
                    assert mutual_inductance(c, k, l) == 0.0

    def test_tx_rx_is_mbar_times_j(self):
        rx = Receiver(circle_position(0.0, D), [1.0, 0, 0])
        c = Constellation(CANONICAL_BASIS, [rx], D, MBAR, 1.0)
        assert mutual_inductance(c, 0, 3) == pytest.approx(2 * MBAR)
        assert mutual_inductance(c, 1, 3) == pytest.approx(0.0, abs=1e-25)

    def test_symmetry_and_matrix(self, scene_factory):
        c = scene_factory(5, 3.0, 7)
        m = mutual_inductance_matrix(c)
        np.testing.assert_array_equal(m, m.T)
        for k in range(8):
            for l in range(8):
                if k != l:
                    assert mutual_inductance(c, k, l) == mutual_inductance(c, l, k)
                    assert m[k, l] == pytest.approx(mutual_inductance(c, k, l), rel=1e-12, abs=0)
        assert np.all(np.diag(m) == 0)

    def test_bad_index(self, scene_factory):
        c = scene_factory(2, 1.0, 0)
        with pytest.raises(IndexError):
            mutual_inductance(c, 0, 5)
        with pytest.raises(ValueError):
            mutual_inductance(c, 3, 3)

    def test_coincident(self):
        z = [0.0, 0.0, 1.0]
        c = two_receiver_scene(0.5, 0.5, z, z)
        with pytest.raises(CoincidentCoils):
            mutual_inductance(c, 3, 4)
        with pytest.raises(CoincidentCoils):
            mutual_inductance_matrix(c)

    def test_rotation_invariance(self, scene_factory, rng):
        c = scene_factory(4, 2.0, 3)
        m0 = mutual_inductance_matrix(c)
        for _ in range(100):
            rot = random_rotation(rng)
            m = mutual_inductance_matrix(rotate_constellation(c, rot))
            np.testing.assert_allclose(m / MBAR, m0 / MBAR, rtol=0, atol=1e-10)


class TestConstellation:
    def test_invariants(self, scene_factory, params):
        c = scene_factory(5, 15.0, 2)
        b = c.tx_basis
        assert np.max(np.abs(b @ b.T - np.eye(3))) <= 1e-12
        for rx in c.receivers:
            assert abs(np.linalg.norm(rx.position) - D) <= 1e-9 * D
            assert abs(np.linalg.norm(rx.axis) - 1) <= 1e-12
            assert rx.position[2] == 0.0
        assert params.omega * c.ref_mutual / params.R == pytest.approx(15.0, rel=1e-12)

    def test_determinism(self, params):
        a = random_constellation(4, 2.0, params, np.random.default_rng(9))
        b = random_constellation(4, 2.0, params, np.random.default_rng(9))
        np.testing.assert_array_equal(a.tx_basis, b.tx_basis)
        for ra, rb in zip(a.receivers, b.receivers):
            np.testing.assert_array_equal(ra.position, rb.position)
            np.testing.assert_array_equal(ra.axis, rb.axis)

    def test_geometry_independent_of_coupling(self, params):
        a = random_constellation(3, 0.1, params, np.random.default_rng(4))
        b = random_constellation(3, 100.0, params, np.random.default_rng(4))
        np.testing.assert_array_equal(a.tx_basis, b.tx_basis)
        np.testing.assert_array_equal(a.receivers[2].axis, b.receivers[2].axis)

    def test_angular_uniformity(self, params):
        c = random_constellation(1000, 1.0, params, np.random.default_rng(2024))
        angles = np.array([np.arctan2(rx.position[1], rx.position[0]) for rx in c.receivers])
        counts, _ = np.histogram(np.mod(angles, 2 * np.pi), bins=16, range=(0, 2 * np.pi))
        assert chisquare(counts).pvalue > 0.001

    def test_axes_isotropic(self, rng):
        v = random_unit_vectors(rng, 20_000)
        np.testing.assert_allclose(v.T @ v / len(v), np.eye(3) / 3, atol=0.01)

    def test_rotation_is_proper(self, rng):
        for _ in range(50):
            r = random_rotation(rng)
            np.testing.assert_allclose(r @ r.T, np.eye(3), atol=1e-14)
            assert np.linalg.det(r) == pytest.approx(1.0)

    def test_canonical_transmitter(self, params):
        c = random_constellation(2, 1.0, params, np.random.default_rng(0), random_tx=False)
        np.testing.assert_array_equal(c.tx_basis, np.eye(3))

    def test_matched_load_default(self, params):
        c = random_constellation(2, 3.0, params, np.random.default_rng(0))
        np.testing.assert_allclose(c.loads, params.R * np.sqrt(10.0))

    @pytest.mark.parametrize("bad", [
        dict(axis=[1.0, 1.0, 0.0]),
        dict(priority=-1.0),
        dict(load=0.0),
        dict(position=[np.nan, 0, 0]),
    ])
    def test_receiver_validation(self, bad):
        kw = dict(position=[D, 0, 0], axis=[0, 0, 1.0], priority=1.0, load=1.0)
        kw.update(bad)
        with pytest.raises(ValueError):
            Receiver(**kw)

    def test_receiver_off_circle(self):
        rx = Receiver([0.5, 0, 0], [0, 0, 1.0])
        with pytest.raises(ValueError):
            Constellation(CANONICAL_BASIS, [rx], D, MBAR, 1.0)

    def test_non_orthonormal_basis(self):
        basis = np.eye(3)
        basis[0, 1] = 1e-6
        with pytest.raises(ValueError):
            Constellation(basis, [], D, MBAR, 1.0)

    def test_with_priorities(self, scene_factory):
        c = scene_factory(2, 1.0, 0)
        c2 = c.with_priorities([2.0, 0.5])
        np.testing.assert_array_equal(c2.priorities, [2.0, 0.5])
        np.testing.assert_array_equal(c.priorities, [1.0, 1.0])
        with pytest.raises(ValueError):
            c.with_priorities([1.0])
