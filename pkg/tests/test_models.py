import math
import unittest

from hypothesis import given, settings, strategies as st

from app.models.lattice import LatticeWalk, NPathFamily
from app.models.multiindex import EnergyVector, HalfPlaneSign, MultiIndex, SignVector, compositions


class TestMultiIndex(unittest.TestCase):
    def test_total_and_factorial(self):
        n = MultiIndex.of(2, 0, 3)
        self.assertEqual(n.total, 5)
        self.assertEqual(n.factorial, 12)
        self.assertEqual(n.power([2.0, 5.0, 3.0]), 4.0 * 27.0)

    def test_arithmetic(self):
        self.assertEqual(MultiIndex.of(1, 2) + MultiIndex.ones(2), MultiIndex.of(2, 3))
        self.assertEqual(MultiIndex.of(1, 2) - MultiIndex.of(1, 0), MultiIndex.of(0, 2))
        with self.assertRaises(ValueError):
            MultiIndex.of(0, 1) - MultiIndex.of(1, 0)
        with self.assertRaises(ValueError):
            MultiIndex.of(1) + MultiIndex.of(1, 1)

    def test_rejects_negative_entries(self):
        with self.assertRaises(ValueError):
            MultiIndex.of(-1, 2)

    def test_compositions_lexicographic(self):
        self.assertEqual(list(compositions(2, 2)), [(0, 2), (1, 1), (2, 0)])
        self.assertEqual(list(compositions(0, 3)), [(0, 0, 0)])

    @given(st.integers(0, 6), st.integers(1, 4))
    @settings(max_examples=40, deadline=None)
    def test_compositions_count(self, total, length):
        items = list(compositions(total, length))
        self.assertEqual(len(items), math.comb(total + length - 1, length - 1))
        self.assertTrue(all(sum(c) == total for c in items))
        self.assertEqual(items, sorted(items))


class TestSigns(unittest.TestCase):
    def test_parse(self):
        self.assertIs(HalfPlaneSign.parse("+"), HalfPlaneSign.PLUS)
        self.assertIs(HalfPlaneSign.parse("minus"), HalfPlaneSign.MINUS)
        self.assertIs(HalfPlaneSign.parse(-1), HalfPlaneSign.MINUS)
        with self.assertRaises(ValueError):
            HalfPlaneSign.parse("*")

    def test_sign_vector(self):
        sigma = SignVector.parse("+-")
        self.assertEqual(str(sigma), "+-")
        self.assertEqual(sigma.sign_product, -1)
        self.assertFalse(sigma.all_equal)
        self.assertEqual(str(sigma.flipped()), "-+")
        self.assertEqual(SignVector.parse("+, +"), SignVector.uniform(HalfPlaneSign.PLUS, 2))

    def test_energy_gap(self):
        self.assertAlmostEqual(EnergyVector((0.0, 1.0, 0.25)).min_gap, 0.25)
        self.assertEqual(EnergyVector((0.3,)).min_gap, math.inf)
        self.assertFalse(EnergyVector((0.3, 0.3)).distinct)


class TestLattice(unittest.TestCase):
    def test_walk_validation(self):
        walk = LatticeWalk(((0,), (1,), (0,)))
        self.assertEqual(walk.length, 2)
        self.assertEqual(walk.visit_counts()[(0,)], 2)
        with self.assertRaises(ValueError):
            LatticeWalk(((0,), (2,)))

    def test_family_closure(self):
        first = LatticeWalk(((0,), (1,)))
        second = LatticeWalk(((0,),))
        family = NPathFamily((first, second), ((-1,), (0,)))
        self.assertEqual(family.total_length, 1)
        self.assertEqual(family.visit_counts()[(0,)], MultiIndex.of(1, 1))
        self.assertEqual(family.visit_counts()[(1,)], MultiIndex.of(1, 0))
        with self.assertRaises(ValueError):
            NPathFamily((first, second), ((0,), (0,)))


if __name__ == "__main__":
    unittest.main()
