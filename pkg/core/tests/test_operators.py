import math

import numpy as np
from django.test import SimpleTestCase
from scipy import linalg as sla

from core.exceptions import DimensionMismatchError, InvalidInputError, NotHermitianError
from core.physics.operators import (
    DenseUnitary,
    GridSpec,
    HermitianMatrix,
    InteractionPicture,
    TimeHamiltonian,
    bloch_cos,
    bloch_linear,
    build_laplacian_1d,
    build_potential,
    commutator,
    hermitian_norm,
    interaction_hamiltonian,
    interaction_picture,
    laplacian_dispersion,
    pauli,
    random_smooth_family,
    spectral_norm,
    unitary_from_hermitian,
)


class GridAndMatrixTypesTests(SimpleTestCase):
    def test_grid_spacing_and_points(self):
        grid = GridSpec(8)
        self.assertAlmostEqual(grid.spacing, 2 * math.pi / 8)
        self.assertEqual(len(grid.points), 8)
        self.assertEqual(grid.points[0], 0.0)

    def test_grid_rejects_small_or_fractional_sizes(self):
        for bad in (1, 0, 2.5):
            with self.assertRaises(InvalidInputError):
                GridSpec(bad)
        with self.assertRaises(InvalidInputError):
            GridSpec(8, domain_length=-1.0)

    def test_hermitian_matrix_symmetrizes_and_freezes(self):
        m = np.array([[1.0, 2.0 + 1e-14], [2.0, -1.0]])
        h = HermitianMatrix(m)
        self.assertEqual(h.dim, 2)
        np.testing.assert_array_equal(h.entries, h.entries.conj().T)
        self.assertFalse(h.entries.flags.writeable)

    def test_hermitian_matrix_rejects_asymmetric_input(self):
        with self.assertRaises(NotHermitianError) as ctx:
            HermitianMatrix(np.array([[0.0, 1.0], [0.0, 0.0]]))
        self.assertAlmostEqual(ctx.exception.deviation, 1.0)
        with self.assertRaises(DimensionMismatchError):
            HermitianMatrix(np.ones((2, 3)))

    def test_dense_unitary_rejects_non_unitary(self):
        with self.assertRaises(InvalidInputError):
            DenseUnitary(2 * np.eye(2))
        u = DenseUnitary(pauli('X'))
        self.assertLess(u.defect(), 1e-14)
        np.testing.assert_allclose(u.compose(u).matrix, np.eye(2))


class NormAndCommutatorTests(SimpleTestCase):
    def test_norms_of_diagonal(self):
        d = np.diag([3.0, -5.0]).astype(complex)
        self.assertAlmostEqual(spectral_norm(d), 5.0)
        self.assertAlmostEqual(hermitian_norm(d), 5.0)

    def test_commutator_of_hermitian_is_anti_hermitian(self):
        h_t = random_smooth_family(4, seed=3)
        x, y = h_t.sample(0.1), h_t.sample(0.7)
        c = commutator(x, y)
        self.assertLess(np.max(np.abs(c + c.conj().T)), 1e-13)

    def test_pauli_commutator(self):
        np.testing.assert_allclose(commutator(pauli('Z'), pauli('X')), 2j * pauli('Y'))

    def test_commutator_shape_mismatch(self):
        with self.assertRaises(DimensionMismatchError):
            commutator(np.eye(2), np.eye(3))

    def test_unitary_from_hermitian(self):
        u = unitary_from_hermitian(pauli('Z'), 0.3)
        np.testing.assert_allclose(u.matrix, np.diag([np.exp(-0.3j), np.exp(0.3j)]), atol=1e-14)


class LaplacianAndPotentialTests(SimpleTestCase):
    def test_laplacian_spectrum_matches_dispersion(self):
        grid = GridSpec(16)
        lap = build_laplacian_1d(grid)
        vals = np.linalg.eigvalsh(lap.entries)
        np.testing.assert_allclose(vals, np.sort(laplacian_dispersion(grid)), atol=1e-9)
        np.testing.assert_allclose(lap.entries.sum(axis=1), 0.0, atol=1e-9)

    def test_laplacian_periodic_corners(self):
        grid = GridSpec(5)
        lap = build_laplacian_1d(grid).entries
        self.assertAlmostEqual(lap[0, 4].real, -1.0 / grid.spacing ** 2)
        self.assertAlmostEqual(lap[4, 0].real, -1.0 / grid.spacing ** 2)

    def test_potential_by_name_and_callable(self):
        grid = GridSpec(8)
        v = build_potential(grid, 'cos')
        np.testing.assert_allclose(np.diag(v.entries).real, np.cos(grid.points))
        flat = build_potential(grid, lambda x: 2.0)
        np.testing.assert_allclose(np.diag(flat.entries).real, 2.0)

    def test_potential_rejects_non_finite_and_complex(self):
        grid = GridSpec(8)
        with self.assertRaises(InvalidInputError):
            build_potential(grid, lambda x: np.where(x > 1.0, np.inf, 0.0))
        with self.assertRaises(InvalidInputError):
            build_potential(grid, lambda x: np.exp(1j * x))
        with self.assertRaises(InvalidInputError):
            build_potential(grid, 'no_such_potential')


class TimeHamiltonianTests(SimpleTestCase):
    def test_check_alpha(self):
        self.assertLessEqual(bloch_cos().check_alpha(np.linspace(0, 3, 7)), math.sqrt(2) + 1e-12)
        understated = TimeHamiltonian(2, lambda t: 3 * pauli('Z'), alpha=1.0)
        with self.assertRaises(InvalidInputError):
            understated.check_alpha([0.0])

    def test_sample_dimension_is_checked(self):
        h_t = TimeHamiltonian(3, lambda t: pauli('Z'), alpha=1.0, name='wrong')
        with self.assertRaises(DimensionMismatchError):
            h_t.sample(0.0)

    def test_bloch_linear_sample(self):
        np.testing.assert_allclose(bloch_linear().sample_array(0.5), pauli('Z') + 0.5 * pauli('X'))


class InteractionPictureTests(SimpleTestCase):
    def setUp(self):
        self.grid = GridSpec(8)
        self.ip = interaction_picture(self.grid, 'cos')
        self.a = self.ip.a_matrix.entries
        self.b = self.ip.b.entries

    def test_fast_forward_is_exp_iAs(self):
        np.testing.assert_allclose(self.ip.fast_forward(0.37), sla.expm(0.37j * self.a), atol=1e-10)

    def test_grid_frame_sample(self):
        h_i = interaction_hamiltonian(self.ip, frame='grid')
        t = 0.41
        expected = sla.expm(1j * self.a * t) @ self.b @ sla.expm(-1j * self.a * t)
        np.testing.assert_allclose(h_i.sample_array(t), expected, atol=1e-10)

    def test_eigen_frame_has_same_norms(self):
        grid_frame = interaction_hamiltonian(self.ip, frame='grid')
        eigen_frame = interaction_hamiltonian(self.ip, frame='eigen')
        for t in (0.0, 0.2, 1.3):
            self.assertAlmostEqual(hermitian_norm(grid_frame.sample_array(t)),
                                   hermitian_norm(eigen_frame.sample_array(t)), places=10)
        self.assertEqual(grid_frame.alpha, eigen_frame.alpha)

    def test_derivative_bounds_are_commutator_norms(self):
        h_i = interaction_hamiltonian(self.ip)
        self.assertAlmostEqual(h_i.deriv_bound_1, hermitian_norm(1j * (self.a @ self.b - self.b @ self.a)))
        self.assertAlmostEqual(h_i.deriv_bound_1, self.ip.commutator_ab_norm)
        self.assertAlmostEqual(h_i.alpha, 1.0, places=12)

    def test_time_dependent_b_needs_alpha(self):
        with self.assertRaises(InvalidInputError):
            InteractionPicture(self.a, lambda t: self.b)
        ip = InteractionPicture(self.a, lambda t: math.cos(t) * self.b, alpha_b=1.0)
        self.assertFalse(ip.time_independent)
        np.testing.assert_allclose(ip.b_at(0.0), self.b)

    def test_unknown_frame(self):
        with self.assertRaises(InvalidInputError):
            interaction_hamiltonian(self.ip, frame='momentum')
