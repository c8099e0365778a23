import unittest

import numpy as np
from hypothesis import given, settings
from hypothesis import strategies as st

from src.domain import linalg
from src.domain.exceptions import InvalidInputException, NonOrthonormalFamilyException
from src.domain.models import OrthonormalFamily, VectorFamily

finite = st.floats(min_value=-1e3, max_value=1e3, allow_nan=False, allow_infinity=False)
complex_entry = st.builds(complex, finite, finite)


def _vectors(dim: int):
    return st.lists(complex_entry, min_size=dim, max_size=dim).map(
        lambda values: np.array(values, dtype=np.complex128)
    )


def _random_orthonormal(rng: np.random.Generator, dim: int, m: int) -> OrthonormalFamily:
    g = rng.standard_normal((dim, m)) + 1j * rng.standard_normal((dim, m))
    q, _ = np.linalg.qr(g)
    return OrthonormalFamily(members=q.T)


class TestInnerProduct(unittest.TestCase):
    def test_norm_of_three_four(self) -> None:
        self.assertEqual(linalg.norm(np.array([3 + 4j])), 5.0)

    def test_inner_is_conjugate_linear_in_second_argument(self) -> None:
        x = np.array([1 + 2j, -1j])
        y = np.array([2 - 1j, 3 + 0j])
        a = 0.5 - 2j
        self.assertAlmostEqual(linalg.inner(a * x, y), a * linalg.inner(x, y), places=12)
        self.assertAlmostEqual(linalg.inner(x, a * y), np.conj(a) * linalg.inner(x, y), places=12)

    def test_inner_with_basis_vector_reads_coordinate(self) -> None:
        x = np.array([3 + 4j, 1 - 1j])
        e = np.array([1 + 0j, 0j])
        self.assertEqual(linalg.inner(x, e), 3 + 4j)

    def test_dimension_mismatch_is_invalid_input(self) -> None:
        with self.assertRaises(InvalidInputException):
            linalg.inner(np.array([1 + 0j]), np.array([1 + 0j, 0j]))

    @given(st.integers(min_value=1, max_value=6).flatmap(lambda d: st.tuples(_vectors(d), _vectors(d))))
    @settings(max_examples=200, deadline=None)
    def test_schwarz_inequality(self, pair) -> None:
        x, y = pair
        lhs = abs(linalg.inner(x, y))
        rhs = linalg.norm(x) * linalg.norm(y)
        self.assertLessEqual(lhs, rhs * (1 + 1e-12) + 1e-12)

    def test_schwarz_equality_means_collinear(self) -> None:
        rng = np.random.default_rng(12)
        for _ in range(1000):
            dim = int(rng.integers(1, 9))
            e = rng.standard_normal(dim) + 1j * rng.standard_normal(dim)
            e /= np.linalg.norm(e)
            x = complex(*rng.standard_normal(2)) * rng.uniform(1e-3, 1e3) * e
            coefficient = linalg.inner(x, e)
            self.assertLessEqual(abs(linalg.norm(x) - abs(coefficient)), 1e-12 * linalg.norm(x))
            self.assertLessEqual(linalg.norm(x - coefficient * e), 1e-6 * linalg.norm(x))

            off_axis = x + 1e-3 * linalg.norm(x) * (rng.standard_normal(dim) + 1j * rng.standard_normal(dim))
            if linalg.norm(off_axis - linalg.inner(off_axis, e) * e) > 1e-6 * linalg.norm(off_axis):
                self.assertGreater(linalg.norm(off_axis), abs(linalg.inner(off_axis, e)))

    @given(_vectors(3), complex_entry)
    @settings(max_examples=200, deadline=None)
    def test_norm_is_absolutely_homogeneous(self, x, a) -> None:
        self.assertAlmostEqual(linalg.norm(a * x), abs(a) * linalg.norm(x),
                               delta=1e-9 * (1 + abs(a) * linalg.norm(x)))


class TestConversion(unittest.TestCase):
    def test_as_vector_is_read_only(self) -> None:
        v = linalg.as_vector([1, 2j])
        with self.assertRaises(ValueError):
            v[0] = 0

    def test_as_vector_rejects_non_finite(self) -> None:
        with self.assertRaises(InvalidInputException):
            linalg.as_vector([1.0, float("nan")])

    def test_as_vector_rejects_empty_and_nested(self) -> None:
        with self.assertRaises(InvalidInputException):
            linalg.as_vector([])
        with self.assertRaises(InvalidInputException):
            linalg.as_vector([[1, 2], [3, 4]])

    def test_mixed_lengths_name_the_field(self) -> None:
        with self.assertRaises(InvalidInputException) as ctx:
            linalg.as_matrix([[1, 2], [3]])
        self.assertEqual(ctx.exception.field, "vectors")

    def test_non_iterable_is_invalid_input(self) -> None:
        with self.assertRaises(InvalidInputException):
            linalg.as_matrix(5)


class TestSums(unittest.TestCase):
    def test_family_sum_accumulates_left_to_right(self) -> None:
        family = VectorFamily.of([1e16, 0], [1.0, 1j], [-1e16, 0])
        expected = (np.array([1e16, 0]) + np.array([1.0, 1j])) + np.array([-1e16, 0])
        np.testing.assert_array_equal(linalg.family_sum(family), expected)

    def test_row_norms(self) -> None:
        vectors = np.array([[3 + 4j, 0], [1, 1j]])
        np.testing.assert_allclose(linalg.row_norms(vectors), [5.0, np.sqrt(2)])


class TestOrthonormality(unittest.TestCase):
    def test_standard_basis_has_no_defect(self) -> None:
        worst, _ = linalg.orthonormality_defect(np.eye(3, dtype=np.complex128))
        self.assertEqual(worst, 0.0)

    def test_non_orthogonal_pair_is_reported(self) -> None:
        members = np.array([[1, 0, 0], [0.1, 1, 0]], dtype=np.complex128)
        with self.assertRaises(NonOrthonormalFamilyException) as ctx:
            linalg.require_orthonormal(members)
        self.assertEqual(set(ctx.exception.pair), {0, 1})

    def test_orthonormal_family_rejects_too_many_vectors(self) -> None:
        with self.assertRaises(InvalidInputException):
            OrthonormalFamily(members=[[1, 0], [0, 1], [1, 1]])


class TestBessel(unittest.TestCase):
    def test_projection_identity_and_bessel_inequality(self) -> None:
        rng = np.random.default_rng(20240607)
        for _ in range(10_000):
            dim = int(rng.integers(1, 9))
            m = int(rng.integers(1, dim + 1))
            basis = _random_orthonormal(rng, dim, m)
            x = rng.standard_normal(dim) + 1j * rng.standard_normal(dim)
            scale = float(np.vdot(x, x).real)
            projection = linalg.projection_residual(x, basis)
            bessel = linalg.bessel_residual(x, basis)
            self.assertLessEqual(abs(projection - bessel), 1e-12 * scale)
            self.assertGreaterEqual(bessel, -1e-12 * scale)

    def test_vector_in_span_has_zero_residual(self) -> None:
        rng = np.random.default_rng(7)
        basis = _random_orthonormal(rng, 5, 3)
        x = np.array([1 + 1j, -2, 0.5j]) @ basis.members
        self.assertLess(linalg.projection_residual(x, basis), 1e-24 + 1e-12)
        self.assertLess(abs(linalg.bessel_residual(x, basis)), 1e-12)

    def test_full_basis_leaves_nothing(self) -> None:
        basis = OrthonormalFamily.standard(3)
        x = np.array([1 + 2j, 3, -1j])
        self.assertAlmostEqual(linalg.projection_residual(x, basis), 0.0, places=15)


if __name__ == "__main__":
    unittest.main()
