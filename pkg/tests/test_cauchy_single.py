import math
import unittest

import numpy as np
from hypothesis import given, settings, strategies as st

from app.core.errors import RealAxisInput
from app.services.cauchy_single import (constant_c, i0_boundary, i0_bound, i_n, in_boundary,
                                        jn_boundary_taylor, jn_dos_delta_bound, pv_integral)
from app.services.densities import CauchyDensity, GaussianDensity


def cauchy_i_n(a, n, z):
    """Closed form of int g(v)/(v - z)^(n+1) dv for the Cauchy density of scale a."""
    shift = 1j * a if z.imag > 0 else -1j * a
    return (-1) ** (n + 1) * (z + shift) ** (-n - 1)


class TestOffAxis(unittest.TestCase):
    def setUp(self):
        self.a = 1.0
        self.cauchy = CauchyDensity(self.a, 0.5)
        self.gauss = GaussianDensity(1.0, 1.0)

    def test_cauchy_closed_form(self):
        for z in (0.3 + 0.4j, 0.2 - 0.5j, -1.5 + 0.1j):
            for n in range(4):
                expected = cauchy_i_n(self.a, n, z)
                self.assertLess(abs(i_n(self.cauchy, n, z) - expected), 1e-7 * abs(expected))

    def test_real_axis_rejected(self):
        with self.assertRaises(RealAxisInput):
            i_n(self.gauss, 0, 0.5)

    @settings(max_examples=20, deadline=None)
    @given(x=st.floats(-3.0, 3.0), y=st.floats(0.05, 2.0), n=st.integers(0, 3))
    def test_conjugation(self, x, y, n):
        z = complex(x, y)
        upper = i_n(self.gauss, n, z)
        self.assertLess(abs(i_n(self.gauss, n, z.conjugate()) - upper.conjugate()), 1e-10 * max(1.0, abs(upper)))

    def test_derivative_chain(self):
        z = -0.4 + 0.25j
        for n in range(1, 5):
            by_parts = i_n(self.gauss.derivative(n), 0, z) / math.factorial(n)
            self.assertLess(abs(i_n(self.gauss, n, z) - by_parts), 1e-9 * abs(by_parts))


class TestBoundaryValues(unittest.TestCase):
    def setUp(self):
        self.a = 1.0
        self.cauchy = CauchyDensity(self.a, 0.5)
        self.gauss = GaussianDensity(1.0, 1.0)

    def test_imaginary_part_is_density(self):
        for E in np.linspace(-3.0, 3.0, 13):
            value = i0_boundary(self.gauss, "+", float(E))
            self.assertAlmostEqual(value.imag, math.pi * self.gauss(float(E)).real, places=12)

    def test_principal_value_odd_at_zero(self):
        self.assertAlmostEqual(abs(pv_integral(self.gauss, 0.0)), 0.0, places=12)

    def test_cauchy_boundary_values(self):
        for sigma in (1, -1):
            for E in (-0.8, 0.0, 1.3):
                for n in range(3):
                    expected = (-1) ** (n + 1) * (E + sigma * 1j * self.a) ** (-n - 1)
                    self.assertLess(abs(in_boundary(self.cauchy, n, sigma, E) - expected), 1e-7 * abs(expected))

    def test_taylor_coefficients(self):
        E, n = 0.4, 1
        base = E + 1j * self.a
        for l in range(3):
            expected = (-1) ** (n + 1) * (-1) ** l * math.comb(n + l, l) * base ** (-n - 1 - l)
            self.assertLess(abs(jn_boundary_taylor(self.cauchy, n, l, "+", E) - expected), 1e-7 * abs(expected))

    def test_bounds(self):
        bound = i0_bound(self.gauss)
        self.assertAlmostEqual(bound, constant_c(1.0) * math.exp(0.5), places=12)
        for E in (-2.0, 0.0, 0.5, 3.0):
            self.assertLessEqual(abs(i0_boundary(self.gauss, "-", E)), bound)
        self.assertGreater(jn_dos_delta_bound(self.gauss, 2, 0.5), jn_dos_delta_bound(self.gauss, 1, 0.5))
        with self.assertRaises(ValueError):
            jn_dos_delta_bound(self.gauss, 0, 1.0)

    def test_schwarz_symmetry(self):
        plus = in_boundary(self.gauss, 1, "+", 0.3)
        minus = in_boundary(self.gauss, 1, "-", 0.3)
        self.assertAlmostEqual(plus, minus.conjugate(), places=12)


if __name__ == "__main__":
    unittest.main()
