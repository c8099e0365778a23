import math
import unittest

import numpy as np

from src.application import synth
from src.domain import hypotheses
from src.domain.exceptions import (
    InvalidInputException,
    InvalidParameterException,
    UndefinedArgumentException,
)
from src.domain.models import (
    AxisParams,
    BandParams,
    ConeParams,
    DiskParams,
    Method,
    OrthonormalFamily,
    PetrovichParams,
    RealParams,
    Reference,
    SectorParams,
    SynthSpec,
    VectorFamily,
)

ONE = Reference(e=[1])


def _polar(*angles: float) -> VectorFamily:
    return VectorFamily.of(*[[np.exp(1j * a)] for a in angles])


class TestConeConditions(unittest.TestCase):
    def test_extracts_worked_example(self) -> None:
        family = VectorFamily.of([3 + 4j], [4 + 3j])
        report = hypotheses.extract_cone_params(family, ONE)
        self.assertTrue(report.feasible)
        self.assertAlmostEqual(report.params.r1, 0.6, places=15)
        self.assertAlmostEqual(report.params.r2, 0.6, places=15)

    def test_negative_real_part_is_refused_with_index(self) -> None:
        family = VectorFamily.of([1 + 1j], [-1])
        report = hypotheses.check_cone(family, ONE, ConeParams(r1=0.0, r2=0.0))
        self.assertFalse(report.feasible)
        self.assertEqual(report.failing_index, 1)
        self.assertIsNone(report.params)

    def test_zero_vectors_are_skipped_and_counted(self) -> None:
        family = VectorFamily.of([0], [1 + 1j], [0])
        report = hypotheses.check_cone(family, ONE, ConeParams(r1=0.5, r2=0.5))
        self.assertTrue(report.feasible)
        self.assertEqual(report.skipped_zero_vectors, 2)
        self.assertIsNone(report.margins[0])
        self.assertIsNotNone(report.margins[1])

    def test_all_zero_family_is_vacuously_feasible(self) -> None:
        report = hypotheses.check_cone(VectorFamily.of([0, 0]), Reference.basis(2), ConeParams(r1=1.0, r2=1.0))
        self.assertTrue(report.feasible)
        self.assertTrue(report.degenerate)

    def test_real_cone_ignores_imaginary_parts(self) -> None:
        family = VectorFamily.of([1 - 0.5j])
        real = hypotheses.extract_real_cone_params(family, ONE)
        self.assertTrue(real.feasible)
        self.assertAlmostEqual(real.params.r, 1 / math.sqrt(1.25), places=15)
        self.assertFalse(hypotheses.extract_cone_params(family, ONE).feasible)

    def test_parameters_above_the_data_are_refused(self) -> None:
        family = VectorFamily.of([3 + 4j], [4 + 3j])
        self.assertFalse(hypotheses.check_real_cone(family, ONE, RealParams(r=0.61)).feasible)

    def test_missing_reference_names_the_field(self) -> None:
        with self.assertRaises(InvalidInputException) as ctx:
            hypotheses.check(Method.T21, VectorFamily.of([1]), None, ConeParams(r1=0, r2=0))
        self.assertEqual(ctx.exception.field, "reference")

    def test_wrong_parameter_kind_is_rejected(self) -> None:
        with self.assertRaises(InvalidParameterException):
            hypotheses.check(Method.T21, VectorFamily.of([1]), ONE, RealParams(r=0.5))

    def test_extracted_parameters_cannot_be_raised(self) -> None:
        families = [(VectorFamily.of([3 + 4j], [4 + 3j]), ONE)]
        for seed in range(20):
            spec = SynthSpec(method=Method.T21, dim=3, count=10, params=ConeParams(r1=0.5, r2=0.3), seed=seed)
            families.append((synth.sample_feasible(spec), Reference.basis(3)))
        for family, reference in families:
            report = hypotheses.extract_cone_params(family, reference)
            r1, r2 = report.params.r1, report.params.r2
            self.assertTrue(hypotheses.check_cone(family, reference, ConeParams(r1=r1, r2=r2)).feasible)
            self.assertFalse(hypotheses.check_cone(family, reference, ConeParams(r1=r1 * (1 + 1e-6), r2=r2)).feasible)
            self.assertFalse(hypotheses.check_cone(family, reference, ConeParams(r1=r1, r2=r2 * (1 + 1e-6))).feasible)

    def test_tolerance_scales_with_the_vectors(self) -> None:
        for scale in (1e-10, 1.0, 1e10):
            with self.subTest(scale=scale):
                self.assertFalse(hypotheses.extract_cone_params(VectorFamily.of([-scale]), ONE).feasible)
                report = hypotheses.check_cone(VectorFamily.of([scale * (1 + 1j)]), ONE, ConeParams(r1=0.5, r2=0.5))
                self.assertTrue(report.feasible)


class TestBallConditions(unittest.TestCase):
    def test_disk_membership(self) -> None:
        family = VectorFamily.of([0.8 + 0.6j])
        report = hypotheses.check_disks(family, ONE, DiskParams(rho1=0.7, rho2=0.9))
        self.assertTrue(report.feasible)
        self.assertTrue(report.balls_intersect)

    def test_disjoint_disks_are_refused_by_the_precheck(self) -> None:
        family = VectorFamily.of([0.7 + 0.7j])
        report = hypotheses.check_disks(family, ONE, DiskParams(rho1=0.5, rho2=0.5))
        self.assertFalse(report.feasible)
        self.assertIs(report.balls_intersect, False)

    def test_extracted_radii_are_tight(self) -> None:
        family = VectorFamily.of([0.8 + 0.6j], [0.6 + 0.8j])
        report = hypotheses.extract_disk_radii(family, ONE)
        self.assertTrue(report.feasible)
        self.assertAlmostEqual(report.params.rho1, abs(0.6 + 0.8j - 1), places=15)
        self.assertAlmostEqual(report.params.rho2, abs(0.8 + 0.6j - 1j), places=15)

    def test_radius_one_is_not_admissible(self) -> None:
        report = hypotheses.extract_disk_radii(VectorFamily.of([1]), ONE)
        self.assertFalse(report.feasible)

    def test_non_intersecting_bands_are_refused(self) -> None:
        family = VectorFamily.of([1.5 + 1.5j])
        report = hypotheses.check_bands(family, ONE, BandParams(m1=1, M1=2, m2=1, M2=2))
        self.assertFalse(report.feasible)
        self.assertIs(report.balls_intersect, False)

    def test_bands_have_no_automatic_extraction(self) -> None:
        with self.assertRaises(InvalidParameterException):
            hypotheses.extract(Method.C23, VectorFamily.of([1 + 1j]), ONE)

    def test_disks_intersect_criterion(self) -> None:
        self.assertTrue(hypotheses.disks_intersect(0.75, 0.7))
        self.assertFalse(hypotheses.disks_intersect(0.5, 0.5))

    def test_disks_intersect_agrees_with_a_grid_oracle(self) -> None:
        axis = np.linspace(-2.0, 2.0, 1000)
        points = axis[np.newaxis, :] + 1j * axis[:, np.newaxis]
        to_one, to_i = np.abs(points - 1), np.abs(points - 1j)
        rng = np.random.default_rng(99)
        pairs = []
        while len(pairs) < 90:
            rho1, rho2 = rng.uniform(0.01, 0.99, 2)
            if abs(rho1 + rho2 - math.sqrt(2)) >= 0.02:
                pairs.append((rho1, rho2))
        for _ in range(10):
            rho1 = rng.uniform(0.45, 0.95)
            pairs.append((rho1, math.sqrt(2) - rho1 + rng.uniform(-1e-3, 1e-3)))

        for rho1, rho2 in pairs:
            oracle = bool(np.any((to_one <= rho1) & (to_i <= rho2)))
            if abs(rho1 + rho2 - math.sqrt(2)) > 1e-3:
                self.assertEqual(hypotheses.disks_intersect(rho1, rho2), oracle, (rho1, rho2))

    def test_ball_and_halfspace_forms_agree_off_the_boundary(self) -> None:
        rng = np.random.default_rng(2023)
        checked = 0
        for _ in range(10_000):
            d = int(rng.integers(1, 9))
            x, z, big_z = (rng.standard_normal(d) + 1j * rng.standard_normal(d) for _ in range(3))
            halfspace_value = np.vdot(x - z, big_z - x).real
            ball_value = np.linalg.norm(big_z - z) / 2 - np.linalg.norm(x - (big_z + z) / 2)
            if abs(halfspace_value) <= 1e-9 or abs(ball_value) <= 1e-9:
                continue
            halfspace, ball = hypotheses.ball_halfspace_equiv(x, z, big_z)
            self.assertEqual(halfspace, ball)
            checked += 1
        self.assertGreater(checked, 9_900)


class TestAxisConditions(unittest.TestCase):
    def test_failing_axis_is_reported(self) -> None:
        basis = OrthonormalFamily.standard(2)
        family = VectorFamily.of([1 + 1j, 1 + 1j], [1 + 1j, -1 + 1j])
        params = AxisParams(axes=(ConeParams(r1=0, r2=0), ConeParams(r1=0, r2=0)))
        report = hypotheses.check_axes(family, basis, params)
        self.assertFalse(report.feasible)
        self.assertEqual(report.failing_index, 1)
        self.assertEqual(report.failing_axis, 1)

    def test_extracts_per_axis_minima(self) -> None:
        basis = OrthonormalFamily.standard(2)
        family = VectorFamily.of([1 + 1j, 1 + 1j], [2 + 1j, 1 + 2j])
        report = hypotheses.extract_axis_params(family, basis)
        self.assertTrue(report.feasible)
        first, second = report.params.axes
        self.assertAlmostEqual(first.r1, 1 / 2, places=15)
        self.assertAlmostEqual(first.r2, 1 / math.sqrt(10), places=15)
        self.assertAlmostEqual(second.r1, 1 / math.sqrt(10), places=15)
        self.assertAlmostEqual(second.r2, 1 / 2, places=15)

    def test_parameter_count_must_match_basis(self) -> None:
        with self.assertRaises(InvalidParameterException):
            hypotheses.check_axes(VectorFamily.of([1, 1]), OrthonormalFamily.standard(2),
                                  AxisParams(axes=(ConeParams(r1=0, r2=0),)))


class TestComplexNumbers(unittest.TestCase):
    def test_sector_of_worked_pair(self) -> None:
        report = hypotheses.extract_sector(_polar(math.pi / 6, math.pi / 3))
        self.assertTrue(report.feasible)
        self.assertAlmostEqual(report.params.phi1, math.pi / 6, places=14)
        self.assertAlmostEqual(report.params.phi2, math.pi / 3, places=14)

    def test_sector_outside_first_quadrant_is_infeasible(self) -> None:
        self.assertFalse(hypotheses.extract_sector(_polar(0.1, 2.0)).feasible)
        self.assertFalse(hypotheses.check_sector(_polar(-0.1), SectorParams(phi1=0, phi2=1)).feasible)

    def test_zero_has_no_argument(self) -> None:
        with self.assertRaises(UndefinedArgumentException) as ctx:
            hypotheses.extract_sector(VectorFamily.of([1j], [0]))
        self.assertEqual(ctx.exception.index, 1)

    def test_complex_methods_need_dim_one(self) -> None:
        with self.assertRaises(InvalidInputException):
            hypotheses.extract_sector(VectorFamily.of([1, 1]))

    def test_petrovich_arc_of_worked_pair(self) -> None:
        report = hypotheses.extract_petrovich_params(_polar(math.pi / 6, math.pi / 3))
        self.assertTrue(report.feasible)
        self.assertAlmostEqual(report.params.a, math.pi / 4, places=14)
        self.assertAlmostEqual(report.params.theta, math.pi / 12, places=14)

    def test_petrovich_arc_across_the_branch_cut(self) -> None:
        report = hypotheses.extract_petrovich_params(_polar(math.pi - 0.1, -math.pi + 0.1))
        self.assertTrue(report.feasible)
        self.assertAlmostEqual(math.cos(report.params.a), -1.0, places=12)
        self.assertAlmostEqual(report.params.theta, 0.1, places=12)

    def test_opposite_numbers_span_a_half_plane(self) -> None:
        self.assertFalse(hypotheses.extract_petrovich_params(VectorFamily.of([1], [-1])).feasible)

    def test_petrovich_check_uses_wrapped_distance(self) -> None:
        family = _polar(3.0, -3.0)
        self.assertTrue(hypotheses.check_petrovich(family, PetrovichParams(a=math.pi, theta=0.3)).feasible)
        self.assertFalse(hypotheses.check_petrovich(family, PetrovichParams(a=0.0, theta=1.5)).feasible)


class TestImplications(unittest.TestCase):
    """Stronger hypotheses imply the cone condition with the matching parameters."""

    def _samples(self, method: Method, params, families: int = 50, count: int = 200):
        for seed in range(families):
            yield synth.sample_feasible(SynthSpec(method=method, dim=1 if method.scalar_only else 2,
                                                  count=count, params=params, seed=seed))

    def test_disks_imply_cone(self) -> None:
        params = DiskParams(rho1=0.8, rho2=0.75)
        cone = ConeParams(r1=math.sqrt(1 - params.rho1 ** 2), r2=math.sqrt(1 - params.rho2 ** 2))
        for family in self._samples(Method.C22, params):
            reference = Reference.basis(family.dim)
            self.assertTrue(hypotheses.check_cone(family, reference, cone).feasible)

    def test_bands_imply_cone(self) -> None:
        params = BandParams(m1=0.2, M1=5.0, m2=0.1, M2=8.0)
        cone = ConeParams(r1=2 * math.sqrt(params.m1 * params.M1) / (params.M1 + params.m1),
                          r2=2 * math.sqrt(params.m2 * params.M2) / (params.M2 + params.m2))
        for family in self._samples(Method.C23, params):
            self.assertTrue(hypotheses.check_cone(family, Reference.basis(family.dim), cone).feasible)

    def test_sector_implies_cone(self) -> None:
        params = SectorParams(phi1=0.2, phi2=1.2)
        cone = ConeParams(r1=math.cos(params.phi2), r2=math.sin(params.phi1))
        for family in self._samples(Method.P41, params):
            self.assertTrue(hypotheses.check_cone(family, ONE, cone).feasible)


if __name__ == "__main__":
    unittest.main()
