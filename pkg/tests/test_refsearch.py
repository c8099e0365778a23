import math
import unittest

import numpy as np

from src.application import refsearch, synth
from src.domain.exceptions import InfeasibleHypothesisException
from src.domain.models import ConeParams, Reference, SearchConfig, VectorFamily

PAIR = VectorFamily.of([3 + 4j], [4 + 3j])
SMALL = SearchConfig(restarts=2, iterations=30)


class TestEvaluateReference(unittest.TestCase):
    def test_orthogonal_reference_gives_zero_bound(self) -> None:
        certificate = refsearch.evaluate_reference(VectorFamily.of([1, 0], [2, 0]), Reference(e=[0, 1]))
        self.assertEqual(certificate.bound, 0.0)

    def test_opposite_vectors_are_refused(self) -> None:
        with self.assertRaises(InfeasibleHypothesisException):
            refsearch.evaluate_reference(VectorFamily.of([1], [-1]), Reference(e=[1]))

    def test_pair_against_the_real_axis(self) -> None:
        certificate = refsearch.evaluate_reference(PAIR, Reference(e=[1]))
        self.assertAlmostEqual(certificate.bound, 6 * math.sqrt(2), places=12)


class TestSearchReference(unittest.TestCase):
    def test_pair_beats_the_fixed_reference_bound(self) -> None:
        result = refsearch.search_reference(PAIR, SMALL)
        self.assertTrue(result.found)
        self.assertGreaterEqual(result.certificate.bound, 6 * math.sqrt(2) * (1 - 1e-12))
        self.assertLessEqual(result.certificate.bound, result.certificate.actual * (1 + 1e-12))

    def test_single_vector_is_tight(self) -> None:
        result = refsearch.search_reference(VectorFamily.of([1 - 2j, 0.5j]), SMALL)
        self.assertGreaterEqual(result.certificate.tightness, 1 - 1e-8)

    def test_hidden_reference_is_recovered(self) -> None:
        rng = np.random.default_rng(99)
        for trial in range(50):
            with self.subTest(trial=trial):
                dim = int(rng.integers(1, 7))
                e = rng.standard_normal(dim) + 1j * rng.standard_normal(dim)
                angle = rng.uniform(0, math.pi / 2)
                family = synth.synth_equality_t21(
                    Reference(e=e / np.linalg.norm(e)),
                    ConeParams(r1=math.cos(angle), r2=math.sin(angle)),
                    rng.uniform(0.5, 2.0, int(rng.integers(1, 10))),
                )
                result = refsearch.search_reference(family, SMALL)
                self.assertGreaterEqual(result.certificate.tightness, 1 - 1e-8)

    def test_result_is_at_least_both_seeds(self) -> None:
        family = VectorFamily.of([1 + 0.2j, 0.3], [0.8 - 0.4j, 0.5j], [1.2, -0.1 + 0.1j])
        result = refsearch.search_reference(family, SearchConfig(restarts=3, iterations=50, seed=4))
        self.assertGreaterEqual(result.certificate.bound, max(result.seed_bounds))

    def test_same_seed_is_deterministic(self) -> None:
        family = VectorFamily.of([1 + 0.2j, 0.3], [0.8 - 0.4j, 0.5j], [1.2, -0.1 + 0.1j])
        config = SearchConfig(restarts=3, iterations=40, seed=12)
        first = refsearch.search_reference(family, config)
        second = refsearch.search_reference(family, config)
        np.testing.assert_array_equal(first.reference.e, second.reference.e)
        self.assertEqual(first.certificate.bound, second.certificate.bound)
        self.assertEqual(first.best_restart, second.best_restart)

    def test_all_zero_family_has_no_certificate(self) -> None:
        result = refsearch.search_reference(VectorFamily.of([0, 0], [0, 0]), SMALL)
        self.assertFalse(result.found)
        self.assertIsNone(result.reference)
        self.assertIn("no non-zero vector", result.message)

    def test_opposite_numbers_have_no_feasible_reference(self) -> None:
        result = refsearch.search_reference(VectorFamily.of([1], [-1]), SMALL)
        self.assertFalse(result.found)
        self.assertEqual(result.seed_bounds, (0.0, 0.0))
        self.assertEqual(result.message, "no feasible reference found")


if __name__ == "__main__":
    unittest.main()
