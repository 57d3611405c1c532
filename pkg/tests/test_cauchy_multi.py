import math
import unittest

from app.core.errors import CoincidentPoints, ConvexHullViolation, RealAxisInput
from app.models.multiindex import MultiIndex, SignVector
from app.services.cauchy_multi import (j_n, j_partial_fraction, j_reg, j_sigma_decomposed, j_sigma_delta_bound,
                                       j_sigma_derivative, j_sigma_direct, residue_part, restricted_multiindex_sum,
                                       simplex_pole_product, singular_part)
from app.services.densities import CauchyDensity, GaussianDensity


def cauchy_i0(a, z):
    shift = 1j * a if z.imag > 0 else -1j * a
    return -1.0 / (z + shift)


def cauchy_i0_boundary(a, sigma, E):
    return -1.0 / (E + 1j * sigma * a)


class TestOffAxis(unittest.TestCase):
    def setUp(self):
        self.a = 1.0
        self.cauchy = CauchyDensity(self.a, 0.5)
        self.gauss = GaussianDensity(1.0, 1.0)

    def test_two_point_cauchy(self):
        z1, z2 = 0.3 + 0.4j, -0.6 - 0.2j
        expected = (cauchy_i0(self.a, z1) - cauchy_i0(self.a, z2)) / (z1 - z2)
        self.assertLess(abs(j_n(self.cauchy, (0, 0), [z1, z2]) - expected), 1e-7 * abs(expected))
        self.assertLess(abs(j_partial_fraction(self.cauchy, (0, 0), [z1, z2]) - expected), 1e-7 * abs(expected))

    def test_partial_fraction_agrees_with_quadrature(self):
        z = [0.5 + 0.3j, -0.4 + 0.2j, 0.1 - 0.6j]
        for n in [(0, 0, 0), (1, 0, 2), (2, 1, 0)]:
            direct = j_n(self.gauss, n, z)
            split = j_partial_fraction(self.gauss, n, z)
            self.assertLess(abs(direct - split), 1e-7 * max(1.0, abs(direct)))

    def test_single_point_reduces_to_i_n(self):
        from app.services.cauchy_single import i_n
        self.assertEqual(j_n(self.gauss, (2,), [0.2 + 0.3j]), i_n(self.gauss, 2, 0.2 + 0.3j))

    def test_input_errors(self):
        with self.assertRaises(RealAxisInput):
            j_n(self.gauss, (0, 0), [0.2, 0.1 + 0.1j])
        with self.assertRaises(CoincidentPoints):
            j_partial_fraction(self.gauss, (0, 0), [0.2 + 0.1j, 0.2 + 0.1j])
        with self.assertRaises(ValueError):
            j_n(self.gauss, (0, 0), [0.2 + 0.1j])


class TestBoundaryValues(unittest.TestCase):
    def setUp(self):
        self.a = 1.0
        self.cauchy = CauchyDensity(self.a, 0.5)
        self.gauss = GaussianDensity(1.0, 1.0)

    def test_cauchy_two_point_all_signs(self):
        E1, E2 = 0.4, -0.7
        for pattern in ("++", "+-", "-+", "--"):
            sigma = SignVector.parse(pattern)
            s1, s2 = int(sigma[0]), int(sigma[1])
            expected = (cauchy_i0_boundary(self.a, s1, E1) - cauchy_i0_boundary(self.a, s2, E2)) / (E1 - E2)
            value = j_sigma_direct(self.cauchy, (0, 0), sigma, (E1, E2))
            self.assertLess(abs(value - expected), 1e-7 * abs(expected), pattern)

    def test_decomposition_matches_direct(self):
        E = (0.5, -0.5)
        for pattern in ("++", "+-", "--"):
            for n in [(0, 0), (1, 0), (1, 1)]:
                direct = j_sigma_direct(self.gauss, n, pattern, E)
                decomposed = j_sigma_decomposed(self.gauss, n, pattern, E)
                self.assertLess(abs(direct - decomposed), 1e-6 * max(1.0, abs(direct)), (pattern, n))

    def test_decomposition_parts(self):
        E1, E2 = 0.7, -0.3
        divided = (complex(self.gauss(E1)) - complex(self.gauss(E2))) / (E1 - E2)
        residue = residue_part(self.gauss, (0, 0), (E1, E2))
        self.assertLess(abs(residue - divided), 1e-9)
        # equal signs: the singular sum collapses to the residue term
        self.assertLess(abs(singular_part(self.gauss, (0, 0), "++", (E1, E2)) - 1j * math.pi * residue), 1e-9)
        regular = j_reg(self.gauss, (0, 0), (E1, E2))
        self.assertLess(abs(regular.imag), 1e-10)
        direct = j_sigma_direct(self.gauss, (0, 0), "++", (E1, E2))
        self.assertLess(abs(regular - direct.real), 1e-6)

    def test_reversed_signs_conjugate(self):
        E = (0.8, -0.3)
        plus = j_sigma_direct(self.gauss, (1, 0), "+-", E)
        minus = j_sigma_direct(self.gauss, (1, 0), "-+", E)
        self.assertAlmostEqual(plus, minus.conjugate(), places=10)

    def test_zero_shift_is_the_value(self):
        E = (0.6, -0.2)
        n = MultiIndex.of(1, 0)
        self.assertEqual(j_sigma_derivative(self.gauss, n, MultiIndex.zeros(2), "++", E),
                         j_sigma_direct(self.gauss, n, "++", E))

    def test_coincident_energies(self):
        with self.assertRaises(CoincidentPoints):
            j_sigma_direct(self.gauss, (0, 0), "+-", (0.3, 0.3))


class TestCombinatorics(unittest.TestCase):
    def test_simplex_pole_product(self):
        z = [0.3 + 0.4j, -0.2 - 0.5j]
        for n in [(0, 0), (1, 2)]:
            lhs, rhs = simplex_pole_product(n, z, 3 - 2j)
            self.assertLess(abs(lhs - rhs), 1e-10 * abs(lhs))

    def test_simplex_pole_product_inside_hull(self):
        z = [0.3 + 0.4j, -0.2 - 0.5j]
        with self.assertRaises(ConvexHullViolation):
            simplex_pole_product((0, 0), z, (z[0] + z[1]) / 2)

    def test_restricted_sum(self):
        self.assertEqual(restricted_multiindex_sum((1, 2), 3), math.comb(7, 3))
        self.assertEqual(restricted_multiindex_sum((0,), 5), 1)
        with self.assertRaises(ValueError):
            restricted_multiindex_sum((1, 1), -1)

    def test_delta_bound_domain(self):
        g = GaussianDensity(1.0, 1.0)
        self.assertGreater(j_sigma_delta_bound(g, (1, 0), 0.1, 0.4), 0.0)
        with self.assertRaises(ValueError):
            j_sigma_delta_bound(g, (1, 0), 0.3, 0.4)


if __name__ == "__main__":
    unittest.main()
