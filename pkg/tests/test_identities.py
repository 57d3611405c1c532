import unittest

from app.core.errors import AndersonCorrError
from app.services.densities import GaussianDensity
from app.services.identities import CheckResult, check_registry, run_identities


class TestCheckRegistry(unittest.TestCase):
    def test_known_checks(self):
        names = check_registry.names()
        for name in ("in_derivative_chain", "partial_fractions", "simplex_pole_product", "restricted_sums",
                     "boundary_imaginary_part", "boundary_decomposition", "boundary_extrapolation",
                     "coincident_singularity", "walk_counts", "visit_conservation"):
            self.assertIn(name, names)

    def test_unknown_check(self):
        with self.assertRaises(AndersonCorrError):
            check_registry.run("no_such_check", GaussianDensity())

    def test_record(self):
        record = CheckResult("x", True, 1e-12, 1e-10, 4, "ok").to_record()
        self.assertEqual(record, {"check": "x", "passed": True, "deviation": 1e-12, "tolerance": 1e-10,
                                  "cases": 4, "detail": "ok"})


class TestChecks(unittest.TestCase):
    def setUp(self):
        self.g = GaussianDensity(1.0, 1.0)

    def test_combinatorial_checks(self):
        results = run_identities(self.g, ["restricted_sums", "walk_counts", "visit_conservation"])
        self.assertEqual([r.name for r in results], ["restricted_sums", "walk_counts", "visit_conservation"])
        for result in results:
            self.assertTrue(result.passed, result.detail)
            self.assertGreater(result.cases, 0)

    def test_integral_checks(self):
        for name in ("simplex_pole_product", "partial_fractions", "in_derivative_chain"):
            result = check_registry.run(name, self.g)
            self.assertTrue(result.passed, f"{name}: {result.deviation:.3g} > {result.tolerance:.3g}")

    def test_boundary_imaginary_part(self):
        result = check_registry.run("boundary_imaginary_part", self.g)
        self.assertTrue(result.passed, result.detail)
        self.assertEqual(result.cases, 200)


if __name__ == "__main__":
    unittest.main()
