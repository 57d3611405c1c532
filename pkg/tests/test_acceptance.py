"""Series against finite-box Monte Carlo. Set ANDERSON_CORR_SLOW=1 to run."""
import unittest

import numpy as np
from scipy.integrate import trapezoid

from app.core.config import settings
from app.services.covariant import velocity
from app.services.densities import GaussianDensity
from app.services.expansion import ExpansionConfig, density_of_states, green_series
from app.services.identities import run_identities
from app.services.oracle import FiniteBox, mc_green, mc_npoint, smoothed_dos

# allowed |series - MC| in standard errors, on top of the tail bound
STDERR_FACTOR = 3.0


@unittest.skipUnless(settings.slow, "slow")
class TestAgainstMonteCarlo(unittest.TestCase):
    def setUp(self):
        self.g = GaussianDensity(1.0, 1.0)
        self.lam = 0.05

    def test_single_site_green(self):
        cfg = ExpansionConfig(d=1, lam=self.lam, density=self.g, n_max=8)
        box = FiniteBox(1, 20)
        for E in np.linspace(-2.0, 2.0, 11):
            z = complex(E, 0.4)
            series = green_series(cfg, [z])
            mc = mc_green(box, self.lam, z, 2000, 12345, self.g, margin=8, threads=2)
            self.assertLessEqual(abs(series.value - mc.mean), STDERR_FACTOR * mc.stderr + series.tail_bound, z)

    def test_current_current(self):
        polys = (velocity(1, 0, self.lam), velocity(1, 0, self.lam))
        cfg = ExpansionConfig(d=1, lam=self.lam, density=self.g, observables=polys, n_max=6)
        box = FiniteBox(1, 20)
        for E1 in (-1.5, -1.25, -1.0):
            for E2 in (0.5, 0.75, 1.0):
                z = [complex(E1, 0.4), complex(E2, -0.4)]
                series = green_series(cfg, z)
                mc = mc_npoint(box, self.lam, polys, z, 2000, 12345, self.g, margin=6, threads=2)
                self.assertLessEqual(abs(series.value - mc.mean), STDERR_FACTOR * mc.stderr + series.tail_bound, z)

    def test_smoothed_dos_mass(self):
        eps = 0.2
        grid = np.linspace(-4.0, 4.0, 41)
        cfg = ExpansionConfig(d=1, lam=self.lam, density=self.g, n_max=6)
        series = [density_of_states(cfg, E, smoothing=eps)[0] for E in grid]
        oracle = [mean for mean, _ in smoothed_dos(FiniteBox(1, 20), self.lam, eps, grid, 500, 12345, self.g,
                                                   threads=2)]
        expected = trapezoid(oracle, grid)
        self.assertLess(abs(trapezoid(series, grid) - expected), 0.02 * expected)

    def test_all_identities(self):
        for result in run_identities(self.g):
            self.assertTrue(result.passed, f"{result.name}: {result.detail}")


if __name__ == "__main__":
    unittest.main()
