import numpy as np
import pytest

from mibeam import circuit
from mibeam.circuit import (CircuitParams, build_impedance, efficiency, full_system_solve,
                            network_matrices, receiver_matrix, solve_network)
from mibeam.errors import ZeroDrive
from mibeam.geometry import (CANONICAL_BASIS, Constellation, Receiver, circle_position,
                             coupling_factor_vectors)

from conftest import random_complex

D = 0.4
F_GRID = (0.1, 1.0, 10.0, 100.0)


def empty_scene(params, coupling=1.0):
    return Constellation(CANONICAL_BASIS, [], D, params.ref_mutual(coupling), coupling)


def single_scene(params, coupling, axis, angle=0.0, load=None, basis=CANONICAL_BASIS):
    load = params.matched_load(coupling) if load is None else load
    rx = Receiver(circle_position(angle, D), axis, load=load)
    return Constellation(basis, [rx], D, params.ref_mutual(coupling), coupling)


def single_link_efficiency(coupling, j_norm, R, load):
    """Closed-form efficiency of one receiver driven along its coupling direction.

    The transmitter sees R plus the reflected (real) impedance x^2 R^2/(R+Z_L)
    with x = F |J|, so apparent and active power coincide.
    """
    x = coupling * j_norm
    return x * x * R * load / ((R + load) * (R + load + x * x * R))


class TestParams:
    def test_resonance(self):
        p = CircuitParams.resonant(R=2.0, f0=125e6)
        assert p.f0 == pytest.approx(125e6, rel=1e-12)
        assert p.f == p.f0 or p.f == pytest.approx(p.f0, rel=1e-12)

    @pytest.mark.parametrize("field", ["L", "C", "R", "f"])
    def test_positive(self, field):
        kw = dict(L=1e-7, C=1e-11, R=1.0, f=1e6)
        kw[field] = 0.0
        with pytest.raises(ValueError):
            CircuitParams(**kw)

    def test_matched_load(self, params):
        assert params.matched_load(0.0) == params.R
        assert params.matched_load(3.0) == pytest.approx(np.sqrt(10.0) * params.R)


class TestImpedance:
    def test_resonant_diagonal(self, params, scene_factory):
        z = build_impedance(scene_factory(3, 2.0, 0), params)
        np.testing.assert_array_equal(z.z_tx, params.R * np.eye(3))
        np.testing.assert_array_equal(np.diag(z.z_rx), params.R + z.loads)

    def test_single_link_channel(self, params):
        # receiver at 0 deg with axis z: J = 1 against the z-coil only
        z = build_impedance(single_scene(params, 4.0, [0, 0, 1.0]), params)
        expected = 1j * 2 * np.pi * params.f * params.ref_mutual(4.0)
        np.testing.assert_allclose(z.z_ch[:, 0], [0, 0, expected], atol=1e-15)
        assert z.z_ch[2, 0] == pytest.approx(4.0j * params.R)

    def test_off_resonance(self):
        base = CircuitParams.resonant(f0=125e6)
        p = CircuitParams(L=base.L, C=base.C, R=1.0, f=2 * base.f0)
        c = single_scene(p, 1.0, [0, 0, 1.0])
        z = build_impedance(c, p)
        w = 2 * np.pi * p.f
        x = w * p.L - 1 / (w * p.C)
        assert x != 0
        np.testing.assert_allclose(np.diag(z.z_tx), p.R + 1j * x, rtol=1e-14)
        assert z.z_rx[0, 0] == pytest.approx(p.R + c.loads[0] + 1j * x, rel=1e-14)

    def test_invariants(self, params, scene_factory):
        c = scene_factory(5, 7.0, 3)
        z = build_impedance(c, params)
        assert np.count_nonzero(z.z_tx - np.diag(np.diag(z.z_tx))) == 0
        np.testing.assert_array_equal(z.z_rx, z.z_rx.T)
        assert np.all(z.z_ch.real == 0)
        from mibeam.geometry import mutual_inductance
        for k in range(3):
            for l in range(5):
                assert z.z_ch[k, l] == pytest.approx(
                    1j * params.omega * mutual_inductance(c, k, 3 + l), rel=1e-12)
        full = z.full()
        np.testing.assert_array_equal(full, full.T)

    def test_inconsistent_coupling(self, params, scene_factory):
        c = scene_factory(1, 2.0, 0)
        other = CircuitParams.resonant(R=3.0)
        with pytest.raises(ValueError):
            build_impedance(c, other)


class TestSolveNetwork:
    def test_no_receivers(self, params):
        z = build_impedance(empty_scene(params), params)
        sol = solve_network(z, [1, 0, 0])
        np.testing.assert_allclose(sol.i_tx, [1 / params.R, 0, 0])
        assert sol.p_tx_total == pytest.approx(1 / params.R)
        assert sol.p_rx_weighted == 0.0
        assert efficiency(empty_scene(params), params, [1, 0, 0]) == 0.0

    def test_weak_coupling_a_is_scaled_identity(self, params):
        rxs = [Receiver(circle_position(a, D), ax) for a, ax in
               [(0.0, [0, 0, 1.0]), (2.1, [1.0, 0, 0]), (4.2, [0, 0.6, 0.8])]]
        mbar = params.ref_mutual(0.01)
        c = Constellation(CANONICAL_BASIS, rxs, D, mbar, 0.01)
        a, _ = network_matrices(build_impedance(c, params))
        z11 = abs(params.self_impedance())
        assert np.max(np.abs(a - np.eye(3) / z11)) <= 0.01 / z11

    @pytest.mark.parametrize("seed", range(30))
    def test_block_matches_direct_solve(self, params, scene_factory, seed):
        rng = np.random.default_rng(seed)
        c = scene_factory(1 + seed % 5, F_GRID[seed % 4], seed)
        z = build_impedance(c, params)
        u = random_complex(rng, 3)
        sol = solve_network(z, u)
        stacked = np.concatenate([sol.i_tx, sol.i_rx])
        full = z.full()
        rhs = np.concatenate([u, np.zeros(c.n_receivers)])
        direct = np.linalg.solve(full, rhs)
        assert np.linalg.norm(stacked - direct) <= 1e-10 * np.linalg.norm(direct)
        assert np.linalg.norm(full @ stacked - rhs) <= 1e-10 * np.linalg.norm(rhs)
        own = full_system_solve(z, u)
        assert np.linalg.norm(stacked - own) <= 1e-10 * np.linalg.norm(own)

    def test_power_definitions(self, params, scene_factory, rng):
        c = scene_factory(3, 5.0, 11).with_priorities([1.0, 2.0, 0.5])
        z = build_impedance(c, params)
        u = random_complex(rng, 3)
        sol = solve_network(z, u)
        assert sol.p_tx_total == pytest.approx(sum(abs(u[k]) * abs(sol.i_tx[k]) for k in range(3)))
        np.testing.assert_allclose(sol.p_rx, np.abs(sol.i_rx) ** 2 * c.loads)
        assert sol.p_rx_weighted == pytest.approx(np.dot(c.priorities, sol.p_rx))
        assert sol.efficiency == pytest.approx(sol.p_rx_weighted / sol.p_tx_total)
        np.testing.assert_allclose(sol.receiver_efficiencies, sol.p_rx / sol.p_tx_total)

    def test_zero_drive(self, params, scene_factory):
        c = scene_factory(2, 1.0, 0)
        with pytest.raises(ZeroDrive):
            solve_network(build_impedance(c, params), [0, 0, 0])
        with pytest.raises(ZeroDrive):
            efficiency(c, params, np.zeros(3))


class TestEfficiency:
    def test_scale_invariance_example(self, params, scene_factory, rng):
        c = scene_factory(4, 10.0, 5)
        u = random_complex(rng, 3)
        e1 = efficiency(c, params, u)
        e2 = efficiency(c, params, 3 * np.exp(1j * np.pi / 4) * u)
        assert e2 == pytest.approx(e1, rel=1e-12, abs=1e-12)

    def test_scale_invariance_random(self, params, scene_factory, rng):
        for i in range(100):
            c = scene_factory(1 + i % 5, F_GRID[i % 4], 100 + i)
            u = random_complex(rng, 3)
            alpha = complex(*rng.standard_normal(2)) * 10 ** rng.uniform(-3, 3)
            assert abs(efficiency(c, params, alpha * u) - efficiency(c, params, u)) <= 1e-12

    def test_bounds_unit_priorities(self, params, scene_factory, rng):
        for i in range(1000):
            c = scene_factory(1 + i % 5, F_GRID[i % 4], 5000 + i)
            e = efficiency(c, params, random_complex(rng, 3))
            assert 0.0 <= e <= 1.0

    def test_weak_coupling_limit_monotone(self, params, scene_factory):
        errors = []
        for F in (1e-1, 1e-2, 1e-3):
            c = scene_factory(3, F, 8)
            z = build_impedance(c, params)
            a, _ = network_matrices(z)
            ztx_inv = np.linalg.inv(z.z_tx)
            errors.append(np.linalg.norm(a - ztx_inv) / np.linalg.norm(ztx_inv))
        assert errors[0] > errors[1] > errors[2]
        assert errors[2] < 1e-4

    @pytest.mark.parametrize("axis", [[1.0, 0, 0], [0, 0.6, 0.8], [0.48, 0.6, 0.64]])
    @pytest.mark.parametrize("coupling", [0.3, 3.0, 100.0])
    def test_single_link_closed_form(self, params, axis, coupling):
        axis = np.array(axis) / np.linalg.norm(axis)
        c = single_scene(params, coupling, axis, angle=0.7)
        u_dir = c.receivers[0].position / D
        j = coupling_factor_vectors(c.tx_basis, axis, u_dir)
        e = efficiency(c, params, j)
        ref = single_link_efficiency(coupling, np.linalg.norm(j), params.R, c.loads[0])
        assert e == pytest.approx(ref, rel=1e-10)

    def test_large_coupling_single_receiver(self, params):
        # broadside receiver (|J| = 1) at F = 100 under the matched load
        c = single_scene(params, 100.0, [0, 0, 1.0])
        e = efficiency(c, params, [0, 0, 1.0])
        assert e == pytest.approx(single_link_efficiency(100.0, 1.0, 1.0, c.loads[0]), rel=1e-12)
        assert 0.96 < e < 0.99


class TestReceiverMatrix:
    def test_rank_one(self, params, scene_factory):
        c = scene_factory(1, 2.0, 4)
        sol = solve_network(build_impedance(c, params), [1, 0, 0])
        d = receiver_matrix(sol)
        row = sol.C[0]
        np.testing.assert_allclose(d, c.loads[0] * np.outer(row.conj(), row), atol=1e-18)
        assert np.linalg.matrix_rank(d, tol=1e-12 * np.linalg.norm(d)) == 1

    def test_zero_priorities(self, params, scene_factory):
        c = scene_factory(3, 2.0, 4).with_priorities([0, 0, 0])
        sol = solve_network(build_impedance(c, params), [1, 1, 1])
        np.testing.assert_array_equal(receiver_matrix(sol), np.zeros((3, 3)))

    def test_consistency(self, params, scene_factory, rng):
        for i in range(50):
            c = scene_factory(1 + i % 5, F_GRID[i % 4], 300 + i)
            c = c.with_priorities(rng.uniform(0, 3, c.n_receivers))
            u = random_complex(rng, 3)
            sol = solve_network(build_impedance(c, params), u)
            d = receiver_matrix(sol)
            np.testing.assert_allclose(d, d.conj().T, atol=0)
            assert np.linalg.eigvalsh(d).min() >= -1e-12 * np.linalg.norm(d)
            quad = (u.conj() @ d @ u).real
            direct = sum(w * abs(i) ** 2 * zl for w, i, zl in
                         zip(c.priorities, sol.i_rx, c.loads))
            assert quad == pytest.approx(direct, rel=1e-12)


def test_batched_single_receiver_matches_solver(params, rng):
    coupling = 6.0
    load = params.matched_load(coupling)
    basis = np.linalg.qr(rng.standard_normal((3, 3)))[0]
    axes = rng.standard_normal((40, 3))
    axes /= np.linalg.norm(axes, axis=1, keepdims=True)
    angles = rng.uniform(0, 2 * np.pi, 40)
    centers = np.column_stack([np.cos(angles), np.sin(angles), np.zeros(40)])
    u = random_complex(rng, 3)
    batch = circuit.single_receiver_efficiency(params, basis, axes, centers, coupling, load, u)
    for k in range(40):
        c = single_scene(params, coupling, axes[k], angle=angles[k], load=load, basis=basis)
        assert batch[k] == pytest.approx(efficiency(c, params, u), rel=1e-10)
