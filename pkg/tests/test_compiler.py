import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import dm_from_seed, seeds, unit_vector, unitary_from_seed
from qinstr.compiler import (
    Circuit,
    CircuitError,
    build_dme2_circuit,
    circuit_unitary,
    decompose_dswap,
    depth,
    merge_single_qubit_run,
    moment_unitary,
    same_up_to_phase,
    simulate,
    single_qubit_layers,
    zxz_angles,
)
from qinstr.dme import DmeConfig, dme2_enumerate, run_mask
from qinstr.gates import CZ_MAT, H_MAT, SWAP, GateOp, phased_x, rx, rz, swap_pow
from qinstr.linalg import kron, phase_distance
from qinstr.qstate import CARDINAL, pure_state

DELTAS = [s * np.pi / k for k in (64, 16, 8, 4) for s in (1, -1)] + [np.pi / 2]


def _masks(n, seed):
    return np.random.default_rng(seed).integers(0, 2, size=n).astype(bool)


class TestDecompose:
    @pytest.mark.parametrize("delta", DELTAS)
    def test_grid(self, delta):
        assert phase_distance(circuit_unitary(decompose_dswap(delta)), swap_pow(delta)) < 1e-9

    def test_zero_and_swap(self):
        assert same_up_to_phase(circuit_unitary(decompose_dswap(0.0)), np.eye(4))
        assert same_up_to_phase(circuit_unitary(decompose_dswap(np.pi / 2)), SWAP)

    @given(st.floats(-6.2, 6.2))
    def test_any_delta(self, delta):
        assert phase_distance(circuit_unitary(decompose_dswap(delta)), swap_pow(delta)) < 1e-9

    def test_structure(self):
        c = decompose_dswap(np.pi / 8)
        kinds = [[g.kind for g in m] for m in c.moments]
        assert sum(k == ["CZ"] for k in kinds) == 3
        assert len(single_qubit_layers(c)) == 4
        assert depth(c) == 7
        for i in single_qubit_layers(c):
            assert sorted(g.kind for g in c.moments[i]) == ["PhasedX", "PhasedX", "VirtualZ", "VirtualZ"]

    def test_range(self):
        with pytest.raises(CircuitError):
            decompose_dswap(2 * np.pi)


class TestMerge:
    def test_rx(self):
        px, vz = merge_single_qubit_run([GateOp("PhasedX", (0,), {"theta": np.pi / 2, "phi": 0.0})])
        assert px.params["theta"] == pytest.approx(np.pi / 2)
        assert px.params["phi"] == pytest.approx(0.0, abs=1e-12)
        assert vz.params["phi"] == pytest.approx(0.0, abs=1e-12)

    def test_rz(self):
        px, vz = merge_single_qubit_run([GateOp("VirtualZ", (1,), {"phi": 0.7})])
        assert px.params == {"theta": 0.0, "phi": 0.0}
        assert vz.params["phi"] == pytest.approx(0.7)
        assert vz.qubits == (1,)

    def test_hadamard(self):
        px, vz = merge_single_qubit_run([GateOp("H", (0,))])
        assert px.params["theta"] == pytest.approx(np.pi / 2)
        assert phase_distance(px.unitary() @ vz.unitary(), H_MAT) < 1e-10

    def test_empty(self):
        px, vz = merge_single_qubit_run([])
        assert np.allclose(px.unitary() @ vz.unitary(), np.eye(2))

    def test_mixed_qubits(self):
        with pytest.raises(CircuitError):
            merge_single_qubit_run([GateOp("H", (0,)), GateOp("H", (1,))])

    @given(seeds)
    def test_random_runs(self, seed):
        rng = np.random.default_rng(seed)
        gates = [GateOp("Rot", (0,), {"axis": tuple(unit_vector(seed + k)), "angle": rng.uniform(-4, 4)})
                 for k in range(rng.integers(1, 6))]
        u = np.eye(2)
        for g in gates:
            u = g.unitary() @ u
        px, vz = merge_single_qubit_run(gates)
        assert phase_distance(px.unitary() @ vz.unitary(), u) < 1e-10

    @given(seeds)
    def test_zxz(self, seed):
        u = unitary_from_seed(seed)
        theta, phi, lam = zxz_angles(u)
        assert 0 <= theta <= np.pi + 1e-12
        assert phase_distance(phased_x(theta, phi) @ rz(lam), u) < 1e-10

    def test_zxz_special(self):
        for u in (np.eye(2), rx(np.pi), rz(1.0) @ rx(np.pi), rz(0.3)):
            assert phase_distance(phased_x(*zxz_angles(u)[:2]) @ rz(zxz_angles(u)[2]), u) < 1e-10


class TestCircuit:
    def test_empty(self):
        assert np.allclose(circuit_unitary(Circuit()), np.eye(4))
        assert depth(Circuit()) == 0

    def test_single_cz(self):
        assert np.allclose(circuit_unitary(Circuit([[GateOp("CZ", (0, 1))]])), CZ_MAT)

    def test_overlap_rejected(self):
        with pytest.raises(CircuitError):
            Circuit([[GateOp("H", (0,)), GateOp("CZ", (0, 1))]])
        with pytest.raises(CircuitError):
            Circuit([[GateOp("H", (2,))]])

    def test_virtual_z_shares_moment(self):
        m = (GateOp("PhasedX", (0,), {"theta": 1.0, "phi": 0.2}), GateOp("VirtualZ", (0,), {"phi": 0.5}))
        # VirtualZ is applied first whatever the listing order
        assert np.allclose(moment_unitary(m), kron(phased_x(1.0, 0.2) @ rz(0.5), np.eye(2)))

    def test_virtual_z_only_moment_free(self):
        c = Circuit([[GateOp("VirtualZ", (0,), {"phi": 1.0})], [GateOp("CZ", (0, 1))]])
        assert len(c) == 2 and depth(c) == 1

    def test_json_round_trip(self):
        c = build_dme2_circuit(np.pi / 8, 3, (0, 0, 1), [1, 0, 1])
        back = Circuit.from_json(c.to_json())
        assert len(back) == len(c)
        assert phase_distance(circuit_unitary(back), circuit_unitary(c)) < 1e-12

    def test_simulate(self):
        rho = kron(dm_from_seed(1), dm_from_seed(2))
        c = decompose_dswap(0.4)
        u = swap_pow(0.4)
        assert np.allclose(simulate(c, rho), u @ rho @ u.conj().T, atol=1e-12)


class TestDme2Circuit:
    @pytest.mark.parametrize("n,d", [(1, 7), (4, 25), (8, 49), (12, 73)])
    def test_depth(self, n, d):
        c = build_dme2_circuit(np.pi / n, n, (0, 0, 1), np.zeros(n, bool))
        assert len(c) == d and depth(c) == d == 6 * n + 1

    def test_alternation(self):
        c = build_dme2_circuit(0.3, 5, (1, 0, 0), _masks(5, 1))
        for i, m in enumerate(c.moments):
            is_cz = [g.kind for g in m] == ["CZ"]
            assert is_cz == (i % 2 == 1)
        assert i % 2 == 0
        assert len(c.metadata["step_tags"]) == len(c)

    def test_unmerged(self):
        c = build_dme2_circuit(0.3, 3, (1, 0, 0), [1, 0, 1], merge=False)
        assert len(c) == 24

    def test_mask_length(self):
        with pytest.raises(CircuitError):
            build_dme2_circuit(0.3, 3, (1, 0, 0), [1, 0])

    @pytest.mark.parametrize("k", range(50))
    def test_merge_preserves_unitary(self, k):
        rng = np.random.default_rng(k)
        n = int(rng.integers(1, 7))
        delta = rng.uniform(-1.5, 1.5)
        axis, mask = tuple(unit_vector(k)), _masks(n, k)
        merged = circuit_unitary(build_dme2_circuit(delta, n, axis, mask))
        unmerged = circuit_unitary(build_dme2_circuit(delta, n, axis, mask, merge=False))
        assert phase_distance(merged, unmerged) < 1e-9

    @pytest.mark.parametrize("name", CARDINAL)
    def test_matches_protocol(self, name):
        n, theta = 4, np.pi / 2
        cfg = DmeConfig(pure_state(name), dm_from_seed(17), n, theta)
        avg = np.zeros((4, 4), dtype=complex)
        for bits in range(2**n):
            mask = np.array([(bits >> j) & 1 for j in range(n)], dtype=bool)
            out = simulate(build_dme2_circuit(cfg.delta, n, cfg.axis, mask), kron(cfg.sigma_in, cfg.rho_in))
            assert np.max(np.abs(out - run_mask(cfg, mask)[-1])) < 1e-9
            avg += out / 2**n
        assert np.max(np.abs(avg - dme2_enumerate(cfg).joint[-1])) < 1e-9
