import math
import unittest

import numpy as np

from app.core.errors import CoincidentPoints, ConfigError, RadiusViolation, RealAxisInput
from app.services.cauchy_multi import j_n
from app.services.cauchy_single import i0_boundary, i_n, in_boundary
from app.services.covariant import identity, velocity
from app.services.densities import CauchyDensity, GaussianDensity
from app.services.expansion import (ExpansionConfig, composition_tail, convergence_radius, correlation_density,
                                    delta_norm_estimate, density_of_states, dos_series, dos_tail, green_series,
                                    lambda_r_eps, moment_kernel, npoint_boundary_series, npoint_tail, off_axis_tail,
                                    radius_a0, series_classes, taylor_product, taylor_table)


class TestConfig(unittest.TestCase):
    def setUp(self):
        self.g = GaussianDensity(1.0, 1.0)

    def test_defaults(self):
        cfg = ExpansionConfig(d=2, lam=0.1, density=self.g)
        self.assertEqual(cfg.N, 1)
        self.assertEqual(cfg.observables[0], identity(2))
        self.assertEqual(cfg.epsilon, 0.5)
        self.assertIsNone(cfg.gap)

    def test_gap_defaults_delta(self):
        cfg = ExpansionConfig(d=1, lam=0.1, density=self.g, gap=0.4)
        self.assertAlmostEqual(cfg.delta, 0.1)
        self.assertAlmostEqual(cfg.with_gap(0.8).delta, 0.2)

    def test_rejections(self):
        with self.assertRaises(ConfigError):
            ExpansionConfig(d=1, lam=0.1, density=CauchyDensity(1.0, 0.5))
        with self.assertRaises(ConfigError):
            ExpansionConfig(d=1, lam=0.1, density=self.g, gap=1.0, delta=0.6)
        with self.assertRaises(ConfigError):
            ExpansionConfig(d=1, lam=0.1, density=self.g, epsilon=1.0)
        with self.assertRaises(ConfigError):
            ExpansionConfig(d=1, lam=0.1, density=self.g, observables=(identity(2),))
        with self.assertRaises(ConfigError):
            ExpansionConfig(d=0, lam=0.1, density=self.g)


class TestRadii(unittest.TestCase):
    def setUp(self):
        self.g = GaussianDensity(1.0, 1.0)

    def test_a0_per_unit_norm(self):
        # 16 e (8/pi + 4) for d = N = r = 1
        self.assertAlmostEqual(convergence_radius(self.g, 1, 1) / self.g.norm_r, 284.7236, delta=1e-3)
        cfg = ExpansionConfig(d=2, lam=0.0, density=self.g, observables=(identity(2), identity(2)))
        self.assertAlmostEqual(radius_a0(cfg), 4 * convergence_radius(self.g, 1, 1))

    def test_lambda_r_eps_scaling(self):
        self.assertAlmostEqual(lambda_r_eps(self.g, 1, 0.5) / lambda_r_eps(self.g, 1, 0.25), 8.0)
        self.assertAlmostEqual(lambda_r_eps(self.g, 2, 0.5) * 2, lambda_r_eps(self.g, 1, 0.5))

    def test_composition_tail(self):
        self.assertAlmostEqual(composition_tail(0.5, 1, 3), 0.25, places=14)
        self.assertAlmostEqual(composition_tail(0.5, 2, 0), 4.0, places=12)
        self.assertEqual(composition_tail(1.0, 1, 0), math.inf)
        self.assertEqual(composition_tail(0.0, 3, 0), 0.0)


class TestMomentKernel(unittest.TestCase):
    def test_value(self):
        self.assertAlmostEqual(moment_kernel(2.0, (0.0, math.pi / 2)), 4.0 / math.pi ** 2, places=14)

    def test_coincident_pair(self):
        self.assertAlmostEqual(moment_kernel(2.0, (0.3, 0.3)), 1.0, places=14)

    def test_invalid(self):
        with self.assertRaises(ValueError):
            moment_kernel(1.0, (0.0, 1.0, 2.0))
        with self.assertRaises(ValueError):
            moment_kernel(-1.0, (0.0, 1.0))


class TestSeriesClasses(unittest.TestCase):
    def test_weights_count_walks(self):
        cfg = ExpansionConfig(d=1, lam=0.1, density=GaussianDensity(1.0, 1.0), n_max=4)
        classes = series_classes(cfg)
        self.assertEqual(len(classes), 5)
        self.assertEqual(classes[1], {})
        self.assertEqual(len(classes[2]), 1)
        self.assertEqual(sum(classes[2].values()), 2)
        self.assertEqual(sum(classes[4].values()), 6)


class TestOffAxisSeries(unittest.TestCase):
    def setUp(self):
        self.g = GaussianDensity(1.0, 1.0)
        self.z = 0.3 + 0.4j

    def test_zero_coupling(self):
        cfg = ExpansionConfig(d=2, lam=0.0, density=self.g, n_max=4)
        series = green_series(cfg, [self.z])
        self.assertAlmostEqual(series.value, i_n(self.g, 0, self.z), places=12)
        self.assertEqual(series.tail_bound, 0.0)

    def test_second_order_by_hand(self):
        lam = 0.05
        cfg = ExpansionConfig(d=1, lam=lam, density=self.g, n_max=2)
        series = green_series(cfg, [self.z])
        s0, s1, s2 = series.partial_sums
        self.assertEqual(s0, s1)
        expected = lam ** 2 * 2 * i_n(self.g, 1, self.z) * i_n(self.g, 0, self.z)
        self.assertAlmostEqual(s2 - s0, expected, places=12)

    def test_two_point_zero_coupling(self):
        z = [0.3 + 0.4j, -0.2 - 0.5j]
        cfg = ExpansionConfig(d=1, lam=0.0, density=self.g, observables=(identity(1), identity(1)), n_max=2)
        value = green_series(cfg, z).value
        direct = j_n(self.g, (0, 0), z)
        self.assertLess(abs(value - direct), 1e-8 * abs(direct))

    def test_schwarz_reflection(self):
        cfg = ExpansionConfig(d=1, lam=0.1, density=self.g, n_max=4)
        upper = green_series(cfg, [self.z]).value
        lower = green_series(cfg, [self.z.conjugate()]).value
        self.assertAlmostEqual(upper, lower.conjugate(), places=12)

    def test_order_n_terms_scale_as_lambda_to_the_n(self):
        small = green_series(ExpansionConfig(d=1, lam=0.05, density=self.g, n_max=4), [self.z]).partial_sums
        large = green_series(ExpansionConfig(d=1, lam=0.1, density=self.g, n_max=4), [self.z]).partial_sums
        for n in (2, 4):
            self.assertAlmostEqual(large[n] - large[n - 1], 2 ** n * (small[n] - small[n - 1]), places=12)

    def test_two_point_terms_are_homogeneous(self):
        z = [0.3 + 0.5j, -0.4 - 0.5j]

        def partials(lam, weight=1.0):
            v = velocity(1, 0, lam)
            cfg = ExpansionConfig(d=1, lam=lam, density=self.g, observables=(v.scaled(weight), v), n_max=2)
            return green_series(cfg, z).partial_sums

        base = partials(0.05)
        self.assertNotEqual(base[-1], 0)
        # each velocity carries one lambda: order-n terms scale as lambda^(n + 2)
        doubled = partials(0.1)
        for n in range(3):
            before = (doubled[n - 1], base[n - 1]) if n else (0j, 0j)
            self.assertLess(abs((doubled[n] - before[0]) - 2 ** (n + 2) * (base[n] - before[1])), 1e-12)
        for a, b in zip(partials(0.05, 2.5), base):
            self.assertLess(abs(a - 2.5 * b), 1e-12)

    def test_tail_shrinks_with_order(self):
        cfg = ExpansionConfig(d=1, lam=0.05, density=self.g, n_max=6)
        series = green_series(cfg, [self.z])
        q = 2 * 0.05 / 0.4
        self.assertAlmostEqual(series.tail_bound, q ** 7 / (1 - q) / 0.4, places=12)
        for n in range(cfg.n_max):
            self.assertLessEqual(abs(series.value - series.truncated(n)),
                                 off_axis_tail(cfg, [self.z], n) + series.tail_bound)

    def test_deterministic_summation(self):
        plain = ExpansionConfig(d=2, lam=0.1, density=self.g, n_max=4)
        strict = ExpansionConfig(d=2, lam=0.1, density=self.g, n_max=4, deterministic=True)
        a = green_series(plain, [self.z]).value
        b = green_series(strict, [self.z]).value
        self.assertAlmostEqual(a, b, places=13)
        self.assertEqual(b, green_series(strict, [self.z]).value)

    def test_input_errors(self):
        cfg = ExpansionConfig(d=1, lam=0.1, density=self.g, n_max=2)
        with self.assertRaises(RealAxisInput):
            green_series(cfg, [0.5])
        with self.assertRaises(ValueError):
            green_series(cfg, [self.z, self.z])


class TestBoundarySeries(unittest.TestCase):
    def setUp(self):
        self.g = GaussianDensity(1.0, 1.0)

    def test_zero_coupling_dos(self):
        cfg = ExpansionConfig(d=2, lam=0.0, density=self.g, n_max=4)
        for E in (-1.0, 0.0, 0.7):
            dos, tail, series = density_of_states(cfg, E)
            self.assertAlmostEqual(dos, self.g(E).real, places=10)
            self.assertEqual(tail, 0.0)
            self.assertEqual(series.sigmas, "+")

    def test_second_order_dos(self):
        lam, E = 0.05, 0.4
        cfg = ExpansionConfig(d=1, lam=lam, density=self.g, n_max=2)
        series = dos_series(cfg, "+", E)
        s0, s1, s2 = series.partial_sums
        self.assertAlmostEqual(s0, i0_boundary(self.g, "+", E), places=12)
        self.assertEqual(s0, s1)
        expected = lam ** 2 * 2 * in_boundary(self.g, 1, "+", E) * i0_boundary(self.g, "+", E)
        self.assertAlmostEqual(s2 - s0, expected, places=12)

    def test_schwarz_reflection(self):
        cfg = ExpansionConfig(d=1, lam=0.05, density=self.g, n_max=4)
        plus = dos_series(cfg, "+", 0.2).value
        minus = dos_series(cfg, "-", 0.2).value
        self.assertAlmostEqual(plus, minus.conjugate(), places=12)

    def test_dos_tail_outside_radius(self):
        cfg = ExpansionConfig(d=1, lam=0.05, density=self.g, n_max=2)
        self.assertEqual(dos_tail(cfg), math.inf)
        certified = ExpansionConfig(d=1, lam=0.05, density=self.g, n_max=2, certified=True)
        with self.assertRaises(RadiusViolation):
            dos_series(certified, "+", 0.0)

    def test_dos_tail_inside_radius(self):
        lam = 0.5 * lambda_r_eps(self.g, 1, 0.5)
        cfg = ExpansionConfig(d=1, lam=lam, density=self.g, n_max=3, certified=True)
        self.assertTrue(math.isfinite(dos_tail(cfg)))
        self.assertLess(dos_tail(cfg, 4), dos_tail(cfg, 3))

    def test_dos_nonnegative_up_to_the_tail(self):
        lam = 0.5 * lambda_r_eps(self.g, 1, 0.5)
        cfg = ExpansionConfig(d=1, lam=lam, density=self.g, n_max=3, certified=True)
        for E in np.linspace(-3.0, 3.0, 13):
            dos, tail, _ = density_of_states(cfg, E)
            self.assertTrue(math.isfinite(tail))
            self.assertGreaterEqual(dos, -tail)

    def test_smoothed_dos(self):
        cfg = ExpansionConfig(d=1, lam=0.0, density=self.g, n_max=2)
        dos, _, _ = density_of_states(cfg, 0.3, smoothing=0.1)
        self.assertAlmostEqual(dos, i_n(self.g, 0, 0.3 + 0.1j).imag / math.pi, places=12)

    def test_dos_needs_identity(self):
        cfg = ExpansionConfig(d=1, lam=0.05, density=self.g, observables=(velocity(1, 0, 0.05),), n_max=2)
        with self.assertRaises(ValueError):
            dos_series(cfg, "+", 0.0)

    def test_certified_npoint_outside(self):
        cfg = ExpansionConfig(d=1, lam=0.05, density=self.g, n_max=2, certified=True)
        with self.assertRaises(RadiusViolation):
            npoint_boundary_series(cfg, "+", [0.1])

    def test_coincident_energies(self):
        cfg = ExpansionConfig(d=1, lam=0.0, density=self.g, observables=(identity(1), identity(1)), n_max=1)
        with self.assertRaises(CoincidentPoints):
            npoint_boundary_series(cfg, "+-", [0.2, 0.2])
        with self.assertRaises(CoincidentPoints):
            correlation_density(cfg, [0.2, 0.2])

    def test_tail_dominates_truncation_error(self):
        reference = ExpansionConfig(d=1, lam=0.0, density=self.g, n_max=12)
        delta_default = self.g.strip_radius / 2.0
        for fraction in (0.1, 0.5, 0.9):
            lam = fraction * delta_default / radius_a0(reference)
            cfg = ExpansionConfig(d=1, lam=lam, density=self.g, n_max=12)
            series = npoint_boundary_series(cfg, "+", [0.3])
            gap = delta_default
            self.assertTrue(math.isfinite(series.tail_bound))
            for n in range(11):
                self.assertLessEqual(abs(series.value - series.truncated(n)), npoint_tail(cfg, gap, gap / 4.0, n))

    def test_correlation_density_vanishes_without_hopping(self):
        cfg = ExpansionConfig(d=1, lam=0.0, density=self.g, observables=(identity(1), identity(1)), n_max=1)
        density, parts = correlation_density(cfg, [0.5, -0.5])
        self.assertEqual(sorted(parts), ["++", "+-", "-+", "--"])
        self.assertLess(abs(density.value), 1e-8)
        self.assertEqual(density.sigmas, "stone")
        self.assertAlmostEqual(parts["+-"].value, parts["-+"].value.conjugate(), places=10)


class TestTaylorTables(unittest.TestCase):
    def test_leibniz_product(self):
        grid = [0.0, 0.5]
        exp_table = taylor_table(lambda l, x: math.exp(x) / math.factorial(l), grid, 5)
        product = taylor_product(exp_table, exp_table)
        expected = taylor_table(lambda l, x: math.exp(2 * x) * 2 ** l / math.factorial(l), grid, 5)
        np.testing.assert_allclose(product, expected, rtol=1e-13)

    def test_delta_norm(self):
        table = taylor_table(lambda l, x: 1.0 / math.factorial(l), [0.0], 20)
        self.assertAlmostEqual(delta_norm_estimate(table, 0.5), math.exp(0.5), places=12)


if __name__ == "__main__":
    unittest.main()
