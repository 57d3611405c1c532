"""
Property checks that tie the integral, walk and combinatorics modules together.

Each check is registered with `check_registry` and returns a CheckResult with
the worst observed deviation against its tolerance.
"""
import itertools
import math
from dataclasses import dataclass
from typing import Callable, Dict, List, Optional, Sequence

import numpy as np
from loguru import logger

from ..core.errors import AndersonCorrError
from ..models.lattice import origin
from ..models.multiindex import MultiIndex, SignVector, compositions
from .cauchy_multi import (j_n, j_partial_fraction, j_sigma_decomposed, j_sigma_direct,
                           restricted_multiindex_sum, simplex_pole_product)
from .cauchy_single import i0_boundary, i0_bound, i_n
from .densities import AnalyticDensity
from .walks import count_walks, enumerate_npaths


@dataclass
class CheckResult:
    name: str
    passed: bool
    deviation: float
    tolerance: float
    cases: int
    detail: str = ""

    def to_record(self) -> dict:
        return {
            "check": self.name,
            "passed": self.passed,
            "deviation": self.deviation,
            "tolerance": self.tolerance,
            "cases": self.cases,
            "detail": self.detail,
        }


class CheckRegistry:
    def __init__(self):
        self._checks: Dict[str, Callable[[AnalyticDensity], CheckResult]] = {}

    def register(self, name: str):
        def decorator(func):
            self._checks[name] = func
            return func
        return decorator

    def names(self) -> List[str]:
        return list(self._checks)

    def run(self, name: str, g: AnalyticDensity) -> CheckResult:
        check = self._checks.get(name)
        if check is None:
            raise AndersonCorrError(f"Unknown identity check {name!r}")
        return check(g)


check_registry = CheckRegistry()


def _rel(a: complex, b: complex) -> float:
    return abs(a - b) / max(1e-300, abs(b))


def _result(name: str, deviations: Sequence[float], tolerance: float, detail: str = "") -> CheckResult:
    worst = max(deviations, default=0.0)
    return CheckResult(name, bool(worst <= tolerance), float(worst), tolerance, len(deviations), detail)


def _off_axis_points(count: int) -> List[complex]:
    half = count // 2
    reals = np.linspace(-2.0, 2.0, half)
    return [complex(e, 0.5) for e in reals] + [complex(e, -0.3) for e in reals[: count - half]]


@check_registry.register("in_derivative_chain")
def check_in_chain(g: AnalyticDensity) -> CheckResult:
    """I_n(g; z) = (1/n!) I_0(g^(n); z) for n <= 6."""
    deviations = []
    for z in _off_axis_points(20):
        for n in range(1, 7):
            direct = i_n(g, n, z)
            by_parts = i_n(g.derivative(n), 0, z) / math.factorial(n)
            deviations.append(_rel(direct, by_parts))
    return _result("in_derivative_chain", deviations, 1e-9)


@check_registry.register("partial_fractions")
def check_partial_fractions(g: AnalyticDensity) -> CheckResult:
    cases = {
        2: [(0.3 + 0.4j, -0.5 - 0.6j), (1.0 + 0.5j, -1.0 + 0.5j)],
        3: [(0.3 + 0.4j, -0.5 - 0.6j, 1.1 + 0.7j)],
    }
    deviations = []
    for N, points in cases.items():
        for z in points:
            for total in range(3):
                for n in compositions(total, N):
                    deviations.append(_rel(j_partial_fraction(g, n, z), j_n(g, n, z)))
    return _result("partial_fractions", deviations, 1e-9)


@check_registry.register("simplex_pole_product")
def check_simplex(g: AnalyticDensity) -> CheckResult:
    points = [0.3 + 0.4j, -0.5 - 0.6j, 1.1 + 0.7j, -0.2 + 1.3j]
    v = 3.0 - 2.0j
    deviations = []
    for N in range(1, 5):
        for total in range(5):
            for n in compositions(total, N):
                lhs, rhs = simplex_pole_product(n, points[:N], v)
                deviations.append(_rel(rhs, lhs))
    return _result("simplex_pole_product", deviations, 1e-10)


@check_registry.register("restricted_sums")
def check_restricted_sums(g: AnalyticDensity) -> CheckResult:
    failures = 0
    cases = 0
    for L in range(1, 5):
        for total in range(7):
            for n in compositions(total, L):
                for r in range(7):
                    cases += 1
                    try:
                        restricted_multiindex_sum(n, r)
                    except ArithmeticError as e:
                        failures += 1
                        logger.error(str(e))
    return CheckResult("restricted_sums", failures == 0, float(failures), 0.0, cases)


@check_registry.register("boundary_imaginary_part")
def check_boundary_imaginary(g: AnalyticDensity) -> CheckResult:
    """Im I_0(g; E + i0) = pi g(E), and |I_0| stays under its strip bound."""
    deviations = []
    bound = i0_bound(g)
    violations = 0
    for E in np.linspace(-4.0, 4.0, 200):
        value = i0_boundary(g, 1, float(E))
        deviations.append(abs(value.imag - math.pi * g(float(E)).real))
        violations += int(abs(value) > bound)
    result = _result("boundary_imaginary_part", deviations, 1e-10,
                     detail=f"bound {bound:.4g}, {violations} violations")
    result.passed = result.passed and violations == 0
    return result


def _extrapolated_boundary(g: AnalyticDensity, n: MultiIndex, sigma: SignVector, E: Sequence[float]) -> complex:
    """Polynomial extrapolation to eps = 0 of J_n at E_k + i sigma_k eps."""
    eps = 0.2 * 0.5 ** np.arange(6)
    table = [j_n(g, n, [complex(e, int(s) * h) for e, s in zip(E, sigma)]) for h in eps]
    # Neville at zero
    for level in range(1, len(eps)):
        for k in range(len(eps) - level):
            table[k] = (eps[k] * table[k + 1] - eps[k + level] * table[k]) / (eps[k] - eps[k + level])
    return complex(table[0])


_DECOMPOSITION_ENERGIES = {2: [(0.0, 0.5), (-0.7, 0.8)], 3: [(-0.6, 0.0, 0.7)]}


def _boundary_cases():
    for N, cases in _DECOMPOSITION_ENERGIES.items():
        for E in cases:
            for signs in itertools.product("+-", repeat=N):
                yield N, E, SignVector.parse("".join(signs))


@check_registry.register("boundary_decomposition")
def check_boundary_decomposition(g: AnalyticDensity) -> CheckResult:
    """Direct derivative form against regular part plus gap-power singular part."""
    deviations = []
    for N, E, sigma in _boundary_cases():
        for n in (MultiIndex.zeros(N), MultiIndex((1,) + (0,) * (N - 1))):
            deviations.append(_rel(j_sigma_decomposed(g, n, sigma, E), j_sigma_direct(g, n, sigma, E)))
    return _result("boundary_decomposition", deviations, 1e-8)


@check_registry.register("boundary_extrapolation")
def check_boundary_extrapolation(g: AnalyticDensity) -> CheckResult:
    deviations = []
    for N, E, sigma in _boundary_cases():
        n = MultiIndex.zeros(N)
        deviations.append(_rel(_extrapolated_boundary(g, n, sigma, E), j_sigma_direct(g, n, sigma, E)))
    return _result("boundary_extrapolation", deviations, 1e-6)


def _loglog_slope(hs: Sequence[float], values: Sequence[float]) -> float:
    slope, _ = np.polyfit(np.log(hs), np.log(values), 1)
    return float(slope)


@check_registry.register("coincident_singularity")
def check_singularity(g: AnalyticDensity) -> CheckResult:
    """|J^(+,-)(0, h)| ~ 1/h while J^(+,+)(0, h) stays bounded."""
    hs = np.logspace(-3, -1, 5)
    n = MultiIndex.zeros(2)
    mixed = [abs(j_sigma_decomposed(g, n, SignVector.parse("+-"), (0.0, h))) for h in hs]
    same = [abs(j_sigma_decomposed(g, n, SignVector.parse("++"), (0.0, h))) for h in hs]
    slope = _loglog_slope(hs, mixed)
    spread = (max(same) - min(same)) / min(same)
    passed = abs(slope + 1.0) <= 0.05 and spread < 0.10
    return CheckResult("coincident_singularity", passed, abs(slope + 1.0), 0.05, len(hs) * 2,
                       detail=f"slope {slope:.4f}, spread {spread:.3%}")


@check_registry.register("walk_counts")
def check_walk_counts(g: AnalyticDensity) -> CheckResult:
    failures = []
    cases = 0
    for d, top in ((1, 12), (2, 8)):
        for n in range(top + 1):
            cases += 1
            enumerated = sum(1 for _ in enumerate_npaths(d, [origin(d)], n))
            expected = math.comb(n, n // 2) if d == 1 and n % 2 == 0 else count_walks(d, n)
            if enumerated != expected or enumerated > (2 * d) ** n:
                failures.append(f"d={d} n={n}: {enumerated} != {expected}")
    return CheckResult("walk_counts", not failures, float(len(failures)), 0.0, cases, "; ".join(failures))


@check_registry.register("visit_conservation")
def check_visit_conservation(g: AnalyticDensity, samples: int = 1000, seed: int = 7) -> CheckResult:
    """Visit counts summed over sites equal |gamma_i| + 1 for every walk of a family."""
    families = list(enumerate_npaths(2, [(1, 0), (-1, 0)], 6))
    rng = np.random.default_rng(seed)
    picks = rng.choice(len(families), size=min(samples, len(families)), replace=False)
    failures = 0
    for k in picks:
        family = families[int(k)]
        totals = [0] * family.size
        for counts in family.visit_counts().values():
            for i, c in enumerate(counts):
                totals[i] += c
        failures += totals != [w.length + 1 for w in family.walks]
    return CheckResult("visit_conservation", failures == 0, float(failures), 0.0, len(picks))


def run_identities(g: AnalyticDensity, names: Optional[Sequence[str]] = None) -> List[CheckResult]:
    results = []
    for name in names or check_registry.names():
        logger.info(f"Running identity check {name}")
        result = check_registry.run(name, g)
        log = logger.info if result.passed else logger.error
        log(f"{name}: {'pass' if result.passed else 'FAIL'} (deviation {result.deviation:.3g}, "
            f"tolerance {result.tolerance:.3g}, {result.cases} cases)")
        results.append(result)
    return results
