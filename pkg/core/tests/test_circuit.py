import json
import math

import numpy as np
from django.test import SimpleTestCase, override_settings
from scipy import linalg as sla

from core.circuit.gates import (
    GateKind,
    GateOp,
    RegisterLayout,
    apply_gate,
    circuit_unitary,
    gate_list_to_json,
    ry_matrix,
    swap_matrix,
)
from core.circuit.lcu import (
    assemble_lcu_target,
    commutator_weight,
    fig1_block_encoding,
    fig1_gate_list,
    fig1_report,
    fit_proportionality,
    ry_angle,
)
from core.circuit.oracles import (
    BlockEncoding,
    comp_oracle,
    exponentiate_block_encoding,
    extract_block,
    ham_t_oracle,
    hermitian_dilation,
    interaction_ham_t,
    n_index_qubits,
    verify_block_encoding,
)
from core.exceptions import (
    BlockEncodingError,
    CircuitWiringError,
    DimensionMismatchError,
    InvalidInputError,
)
from core.physics.integrators import omega2_riemann, step_unitary
from core.physics.operators import (
    DenseUnitary,
    GridSpec,
    interaction_hamiltonian,
    interaction_picture,
    pauli,
    random_smooth_family,
    spectral_norm,
)


HADAMARD = np.array([[1, 1], [1, -1]]) / math.sqrt(2)


class GateTests(SimpleTestCase):
    def test_ry_matrix(self):
        np.testing.assert_allclose(ry_matrix(math.pi), [[0, -1], [1, 0]], atol=1e-15)
        np.testing.assert_allclose(ry_matrix(0.0), np.eye(2))

    def test_first_wire_is_most_significant(self):
        layout = RegisterLayout.dilation(1)
        u = circuit_unitary([GateOp(GateKind.HADAMARD, (0,))], layout)
        np.testing.assert_allclose(u.matrix, np.kron(HADAMARD, np.eye(2)), atol=1e-15)

    def test_controlled_gate(self):
        layout = RegisterLayout.dilation(1)
        cnot = GateOp(GateKind.CUSTOM, (1,), ((0, 1),), matrix=pauli('X'))
        expected = np.eye(4)[[0, 1, 3, 2]]
        np.testing.assert_allclose(circuit_unitary([cnot], layout).matrix, expected)
        anti = GateOp(GateKind.CUSTOM, (1,), ((0, 0),), matrix=pauli('X'))
        np.testing.assert_allclose(circuit_unitary([anti], layout).matrix, np.eye(4)[[1, 0, 2, 3]])

    def test_swap_of_registers(self):
        s = swap_matrix(1)
        np.testing.assert_allclose(s, np.eye(4)[[0, 2, 1, 3]])
        np.testing.assert_allclose(swap_matrix(2) @ swap_matrix(2), np.eye(16))

    def test_wiring_errors(self):
        with self.assertRaises(CircuitWiringError):
            GateOp(GateKind.HADAMARD, (0, 0))
        with self.assertRaises(CircuitWiringError):
            GateOp(GateKind.HADAMARD, (0,), ((0, 1),))
        with self.assertRaises(CircuitWiringError):
            GateOp(GateKind.HAM_T, (0, 1))
        with self.assertRaises(CircuitWiringError):
            GateOp(GateKind.RY, (0,))
        with self.assertRaises(CircuitWiringError):
            apply_gate(np.eye(2, dtype=complex), 1, GateOp(GateKind.HADAMARD, (3,)))

    @override_settings(MAGNUS_MAX_QUBITS=3)
    def test_qubit_cap(self):
        with self.assertRaises(CircuitWiringError):
            circuit_unitary([], RegisterLayout.fig1(1, 1, 1))

    def test_gate_list_json(self):
        h_t = random_smooth_family(2, seed=5)
        ops, layout = fig1_gate_list(h_t, 1, 0.5 / h_t.alpha, 2, h_t.alpha)
        payload = json.loads(gate_list_to_json(ops, layout))
        self.assertEqual(len(payload['gates']), len(ops))
        self.assertEqual([r['name'] for r in payload['registers']],
                         ['c1', 'c2', 'c3', 'q1', 'q2', 'q3', 'q4', 'system'])
        self.assertIn('ham_t', {g['kind'] for g in payload['gates']})


class OracleTests(SimpleTestCase):
    def setUp(self):
        self.h_t = random_smooth_family(2, seed=11)
        self.alpha = self.h_t.alpha
        self.h = 0.5 / self.alpha

    def test_comp_oracle_on_basis_states(self):
        perm = comp_oracle(2).matrix
        size = 4
        for p in range(size):
            for q in range(size):
                for flag in (0, 1):
                    src = (p * size + q) * 2 + flag
                    out = np.flatnonzero(np.abs(perm[:, src]) > 0.5)
                    self.assertEqual(len(out), 1)
                    self.assertEqual(out[0] % 2, flag if q < p else 1 - flag)
                    self.assertEqual(out[0] // 2, p * size + q)

    def test_index_qubits(self):
        self.assertEqual(n_index_qubits(8), 3)
        with self.assertRaises(InvalidInputError):
            n_index_qubits(6)

    def test_dilation(self):
        h_tilde = 0.5 * pauli('X') + 0.3 * pauli('Z')
        d = hermitian_dilation(h_tilde)
        np.testing.assert_allclose(d.conj().T @ d, np.eye(4), atol=1e-14)
        np.testing.assert_allclose(d[:2, :2], h_tilde, atol=1e-14)
        with self.assertRaises(BlockEncodingError):
            hermitian_dilation(2 * pauli('Z'))

    def test_ham_t_encodes_samples(self):
        m = 4
        oracle = ham_t_oracle(self.h_t, 1, self.h, m, self.alpha)
        samples = [self.h_t.sample_array(self.h + k * self.h / m) for k in range(m)]
        report = verify_block_encoding(oracle, sla.block_diag(*samples), 1e-12)
        self.assertTrue(report.passed)
        self.assertEqual(oracle.n_anc, 1)
        self.assertEqual(oracle.factor, self.alpha)

    def test_block_encoding_checks_layout(self):
        with self.assertRaises(InvalidInputError):
            BlockEncoding(DenseUnitary(np.eye(4)), 1.0, 1)
        with self.assertRaises(DimensionMismatchError):
            BlockEncoding(DenseUnitary(np.eye(4), layout=RegisterLayout.dilation(1)), 1.0, 2)
        with self.assertRaises(DimensionMismatchError):
            extract_block(DenseUnitary(np.eye(8)), RegisterLayout.dilation(1))

    def test_interaction_ham_t_matches_sampled_hamiltonian(self):
        ip = interaction_picture(GridSpec(4), 'cos')
        reference = ham_t_oracle(interaction_hamiltonian(ip, 'grid'), 1, 0.25, 2, float(ip.alpha_b))
        gated = interaction_ham_t(ip, 1, 0.25, 2)
        self.assertLess(np.max(np.abs(gated.block() - reference.block())), 1e-11)

    def test_exponentiate(self):
        h_tilde = 0.4 * pauli('Y')
        be = BlockEncoding(DenseUnitary(hermitian_dilation(h_tilde), layout=RegisterLayout.dilation(1)), 2.0, 1)
        evolved = exponentiate_block_encoding(be, 0.7)
        np.testing.assert_allclose(evolved.block(), sla.expm(-0.7j * 0.8 * pauli('Y')), atol=1e-13)


class LcuCircuitTests(SimpleTestCase):
    def setUp(self):
        self.h_t = random_smooth_family(2, seed=7)
        self.alpha = self.h_t.alpha
        self.h = 0.5 / self.alpha

    def test_target_is_i_times_omega2(self):
        for m in (1, 2, 4, 8):
            target = assemble_lcu_target(self.h_t, 1, self.h, m, self.alpha).entries
            generator = omega2_riemann(self.h_t, self.h, self.h, m).matrix
            self.assertLess(np.max(np.abs(target - 1j * generator)), 1e-13)

    def test_target_rejects_small_alpha(self):
        with self.assertRaises(InvalidInputError):
            assemble_lcu_target(self.h_t, 1, self.h, 2, 0.1)

    def test_ry_angles(self):
        ah = self.alpha * self.h
        self.assertAlmostEqual(commutator_weight(ry_angle(self.alpha, self.h, 'exact_factor')), ah, places=12)
        self.assertAlmostEqual(ry_angle(self.alpha, self.h, 'arccos'), math.acos(ah))
        with self.assertRaises(InvalidInputError):
            ry_angle(self.alpha, 2.0 / self.alpha)
        with self.assertRaises(InvalidInputError):
            ry_angle(self.alpha, self.h, 'diagonal')

    def test_fit_proportionality(self):
        target = pauli('X') + 0.2 * pauli('Z')
        fit = fit_proportionality(0.25j * target, target)
        self.assertAlmostEqual(fit.magnitude, 0.25)
        self.assertAlmostEqual(fit.phase, math.pi / 2)
        self.assertAlmostEqual(fit.factor, 4.0)
        self.assertLess(fit.residual, 1e-14)

    def test_block_proportional_to_target(self):
        for m in (2, 4):
            fit, block, target = fig1_report(self.h_t, 1, self.h, m, self.alpha, 'exact_factor')
            self.assertLess(fit.residual, 1e-9)
            self.assertAlmostEqual(fit.factor, 2 * self.alpha * self.h, delta=1e-9)
            self.assertLess(abs(fit.phase), 1e-9)

    def test_circuit_is_unitary_with_expected_ancillas(self):
        be = fig1_block_encoding(self.h_t, 1, self.h, 4, self.alpha)
        self.assertEqual(be.n_anc, 2 * 2 + 2 * 1 + 3)
        self.assertLess(be.unitary.defect(), 1e-10 * be.unitary.dim)

    def test_exponentiated_block_is_magnus_step(self):
        m = 4
        be = fig1_block_encoding(self.h_t, 1, self.h, m, self.alpha)
        step = exponentiate_block_encoding(be, 1.0).block()
        expected = step_unitary(omega2_riemann(self.h_t, self.h, self.h, m)).matrix
        self.assertLess(spectral_norm(step - expected), 1e-11)

    def test_circuit_needs_two_points(self):
        with self.assertRaises(InvalidInputError):
            fig1_gate_list(self.h_t, 1, self.h, 1, self.alpha)
