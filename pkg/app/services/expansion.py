"""
Truncated random-walk series for single-site and N-point Green functions.

Every N-path family of total length n contributes
(-lam)^n * prod_u J_{n_Gamma(u) - 1}(g_{Gamma,u}; z), where the product runs
over visited sites and sites carrying coefficient functions. Families with the
same multiset of (visit-count vector, attached coefficients) share a value, so
the series is accumulated per class and every distinct site factor is
evaluated once.
"""
import itertools
import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from loguru import logger

from kernel.runner import TaskRunner, chunked
from ..core.config import ENUMERATION_BUDGET, TASK_TIMEOUT
from ..core.errors import CoincidentPoints, ConfigError, RadiusViolation, RealAxisInput
from ..models.multiindex import EnergyVector, HalfPlaneSign, MultiIndex, SignVector
from .cauchy_multi import j_n, j_partial_fraction, j_sigma_decomposed
from .cauchy_single import constant_c, i_n, in_boundary, jn_dos_delta_bound
from .covariant import CovariantPolynomial, identity, site_coefficients
from .densities import AnalyticDensity, ProductFunction, StripFunction
from .quadrature import real_line_integral
from .walks import enumerate_npaths

SiteKey = Tuple[Tuple[int, ...], Tuple]
ClassKey = Tuple[SiteKey, ...]

# Closer off-axis points lose digits to gap powers in the partial-fraction form.
PARTIAL_FRACTION_MIN_GAP = 0.25


@dataclass
class ExpansionConfig:
    d: int
    lam: float
    density: AnalyticDensity
    observables: Tuple[CovariantPolynomial, ...] = ()
    n_max: int = 8
    gap: Optional[float] = None
    delta: Optional[float] = None
    epsilon: Optional[float] = None
    certified: bool = False
    deterministic: bool = False
    threads: int = 1
    budget: int = ENUMERATION_BUDGET

    def __post_init__(self):
        if self.d < 1:
            raise ConfigError("d", f"dimension must be at least 1, got {self.d}")
        if self.n_max < 0:
            raise ConfigError("n_max", f"order must be non-negative, got {self.n_max}")
        if not math.isfinite(self.density.second_moment):
            raise ConfigError("density", f"{self.density.to_spec()} has infinite second moment; the expansion needs a finite one")
        if not self.observables:
            self.observables = (identity(self.d),)
        self.observables = tuple(self.observables)
        for poly in self.observables:
            if poly.d != self.d:
                raise ConfigError("observables", f"observable {poly.label or poly} lives in Z^{poly.d}, not Z^{self.d}")
        if self.gap is not None:
            if self.gap <= 0:
                raise ConfigError("gap", f"must be positive, got {self.gap}")
            if self.delta is None:
                self.delta = self.gap / 4.0
            if not 0 < self.delta < self.gap / 2.0:
                raise ConfigError("delta", f"need 0 < delta < gap/2, got delta={self.delta}, gap={self.gap}")
        r = self.density.strip_radius
        if self.epsilon is None:
            self.epsilon = r / 2.0
        if not 0 < self.epsilon < r:
            raise ConfigError("epsilon", f"need 0 < epsilon < r={r:g}, got {self.epsilon}")

    @property
    def N(self) -> int:
        return len(self.observables)

    def with_gap(self, gap: float) -> "ExpansionConfig":
        return ExpansionConfig(self.d, self.lam, self.density, self.observables, self.n_max, gap, None,
                               self.epsilon, self.certified, self.deterministic, self.threads, self.budget)


@dataclass
class SeriesValue:
    value: complex
    order: int
    tail_bound: float
    ratio_data: Tuple[float, ...] = ()
    partial_sums: Tuple[complex, ...] = field(default=(), repr=False)
    lam: float = 0.0
    energies: Tuple = ()
    sigmas: Optional[str] = None

    def truncated(self, order: int) -> complex:
        return self.partial_sums[min(order, len(self.partial_sums) - 1)]

    def to_record(self) -> dict:
        energies = []
        for e in self.energies:
            e = complex(e)
            energies.append(e.real if e.imag == 0 else {"re": e.real, "im": e.imag})
        return {
            "value_re": self.value.real,
            "value_im": self.value.imag,
            "order": self.order,
            "tail_bound": self.tail_bound,
            "lambda": self.lam,
            "energies": energies,
            "sigmas": self.sigmas,
        }


def constant_c1(r: float) -> float:
    return 4.0 * constant_c(r) / r


def convergence_radius(g: AnalyticDensity, d: int, N: int) -> float:
    return 4.0 * d * N * constant_c1(g.strip_radius) * math.e * g.norm_r


def radius_a0(cfg: ExpansionConfig) -> float:
    return convergence_radius(cfg.density, cfg.d, cfg.N)


def lambda_r_eps(g: AnalyticDensity, d: int, eps: float) -> float:
    r = g.strip_radius
    return eps ** 3 / (2.0 * d * math.e ** 3 * r * constant_c(r) * g.norm_r)


def moment_kernel(t: float, E: Sequence[float]) -> float:
    """prod_j sin((t/2)(E_j - E_{j-1}))/(E_j - E_{j-1}) over a cyclic sequence of 2n energies."""
    E = [float(e) for e in E]
    if t < 0:
        raise ValueError(f"t must be non-negative, got {t}")
    if len(E) < 2 or len(E) % 2:
        raise ValueError(f"Need an even number (>= 2) of energies, got {len(E)}")
    value = 1.0
    for j in range(len(E)):
        diff = E[j] - E[j - 1]
        value *= t / 2.0 if diff == 0 else math.sin(t / 2.0 * diff) / diff
    return value


def composition_tail(q: float, N: int, start: int) -> float:
    """sum_{n >= start} C(n+N-1, N-1) q^n, or inf when q >= 1."""
    if q >= 1.0:
        return math.inf
    if q <= 0.0:
        return 0.0
    total = 0.0
    n = start
    term = math.comb(n + N - 1, N - 1) * q ** n
    while True:
        total += term
        ratio = q * (n + N) / (n + 1)
        n += 1
        term *= ratio
        if ratio < 1.0 and term <= 1e-17 * total:
            return total + term / (1.0 - ratio)
        if term == 0.0:
            return total


# Series classes

def _site_key(counts: MultiIndex, coefs: Tuple) -> SiteKey:
    return (counts.entries, coefs)


def _class_key(family, monomials) -> ClassKey:
    N = len(monomials)
    counts = family.visit_counts()
    attached = site_coefficients(family, monomials)
    keys = []
    for u in set(counts) | set(attached):
        n = counts.get(u, MultiIndex.zeros(N))
        keys.append(_site_key(n, attached.get(u, (None,) * N)))
    return tuple(sorted(keys, key=repr))


def series_classes(cfg: ExpansionConfig) -> List[Dict[ClassKey, complex]]:
    """Per order n, the summed observable weight of each family class."""
    return _series_classes(cfg.d, cfg.observables, cfg.n_max, cfg.budget)


@lru_cache(maxsize=16)
def _series_classes(d: int, observables: Tuple[CovariantPolynomial, ...], n_max: int,
                    budget: int) -> List[Dict[ClassKey, complex]]:
    choices = list(itertools.product(*(poly.terms for poly in observables)))
    per_order = []
    for n in range(n_max + 1):
        classes: Dict[ClassKey, complex] = {}
        families = 0
        for choice in choices:
            weight = math.prod(w for w, _ in choice)
            monomials = [m for _, m in choice]
            offsets = [m.displacement for m in monomials]
            for family in enumerate_npaths(d, offsets, n, budget):
                key = _class_key(family, monomials)
                classes[key] = classes.get(key, 0j) + weight
                families += 1
        logger.debug(f"order {n}: {families} families in {len(classes)} classes")
        per_order.append(classes)
    return per_order


def _site_function(g: StripFunction, coefs: Tuple) -> StripFunction:
    attached = [c for c in coefs if c is not None]
    return ProductFunction(g, attached) if attached else g


def _mean_factor(g: StripFunction, h: StripFunction) -> complex:
    """int h(v) dv for a site carrying coefficients but no visits."""
    if h is g:
        return 1.0 + 0j
    return real_line_integral(lambda v: complex(h._evaluate(np.asarray(v, dtype=complex))),
                              scale=h.scale, tail_mass=h.tail_mass)


def off_axis_factor(g: StripFunction, key: SiteKey, z: Sequence[complex]) -> complex:
    counts, coefs = key
    h = _site_function(g, coefs)
    active = [k for k, c in enumerate(counts) if c > 0]
    if not active:
        return _mean_factor(g, h)
    orders = [counts[k] - 1 for k in active]
    if len(active) == 1:
        return i_n(h, orders[0], z[active[0]])
    points = [z[k] for k in active]
    index = MultiIndex(tuple(orders))
    if min(abs(a - b) for i, a in enumerate(points) for b in points[i + 1:]) >= PARTIAL_FRACTION_MIN_GAP:
        return j_partial_fraction(h, index, points)
    return j_n(h, index, points)


def boundary_factor(g: StripFunction, key: SiteKey, sigma: SignVector, E: EnergyVector) -> complex:
    counts, coefs = key
    h = _site_function(g, coefs)
    active = [k for k, c in enumerate(counts) if c > 0]
    if not active:
        return _mean_factor(g, h)
    orders = [counts[k] - 1 for k in active]
    if len(active) == 1:
        k = active[0]
        return in_boundary(h, orders[0], sigma[k], E[k])
    return j_sigma_decomposed(h, MultiIndex(tuple(orders)),
                              SignVector(tuple(sigma[k] for k in active)),
                              EnergyVector(tuple(E[k] for k in active)))


def _evaluate_site_chunk(payload):
    g, keys, mode, point = payload
    if mode == "off_axis":
        return [off_axis_factor(g, key, point) for key in keys]
    sigma, E = point
    return [boundary_factor(g, key, sigma, E) for key in keys]


def _site_factors(cfg: ExpansionConfig, classes, mode: str, point) -> Dict[SiteKey, complex]:
    keys = sorted({key for per_order in classes for cls in per_order for key in cls}, key=repr)
    runner = TaskRunner(cfg.threads, TASK_TIMEOUT)
    chunks = chunked(keys, cfg.threads * 4 if cfg.threads > 1 else 1)
    values = runner.map(_evaluate_site_chunk, [(cfg.density, chunk, mode, point) for chunk in chunks])
    factors = {}
    for chunk, chunk_values in zip(chunks, values):
        factors.update(zip(chunk, chunk_values))
    logger.debug(f"{len(factors)} distinct site factors ({mode})")
    return factors


def _accumulate(cfg: ExpansionConfig, classes, factors) -> List[complex]:
    """Partial sums S_0..S_n_max."""
    partial = []
    running = 0j
    for n, per_order in enumerate(classes):
        contributions = []
        for cls_key, weight in per_order.items():
            contributions.append(weight * math.prod(factors[key] for key in cls_key))
        if cfg.deterministic:
            term = complex(math.fsum(c.real for c in contributions), math.fsum(c.imag for c in contributions))
        else:
            term = sum(contributions, 0j)
        running += (-cfg.lam) ** n * term
        partial.append(running)
    return partial


def _series(cfg: ExpansionConfig, partial: List[complex], tail: float, energies, sigmas=None) -> SeriesValue:
    return SeriesValue(
        value=partial[-1],
        order=cfg.n_max,
        tail_bound=tail,
        ratio_data=tuple(abs(s) for s in partial),
        partial_sums=tuple(partial),
        lam=cfg.lam,
        energies=tuple(energies),
        sigmas=sigmas,
    )


# Tail bounds

def off_axis_tail(cfg: ExpansionConfig, z: Sequence[complex], n_max: Optional[int] = None) -> float:
    n_max = cfg.n_max if n_max is None else n_max
    eta = min(abs(complex(zk).imag) for zk in z)
    weight = math.prod(poly.norm(0.0) for poly in cfg.observables)
    q = 2.0 * cfg.d * abs(cfg.lam) / eta
    return weight * eta ** (-cfg.N) * composition_tail(q, cfg.N, n_max + 1)


def dos_tail(cfg: ExpansionConfig, n_max: Optional[int] = None) -> float:
    n_max = cfg.n_max if n_max is None else n_max
    g = cfg.density
    q = abs(cfg.lam) / lambda_r_eps(g, cfg.d, cfg.epsilon)
    if q >= 1.0:
        if cfg.certified:
            raise RadiusViolation(f"|lambda|={abs(cfg.lam):g} is outside the certified radius "
                                  f"{lambda_r_eps(g, cfg.d, cfg.epsilon):.3g}")
        logger.warning(f"DOS tail bound is infinite: |lambda|={abs(cfg.lam):g} exceeds {lambda_r_eps(g, cfg.d, cfg.epsilon):.3g}")
        return math.inf
    prefactor = jn_dos_delta_bound(g, 0, g.strip_radius - cfg.epsilon)
    return prefactor * q ** (n_max + 1) / (1.0 - q)


def boundary_ratio(cfg: ExpansionConfig, gap: float, delta: float) -> float:
    g = cfg.density
    return 2.0 * cfg.d * cfg.N * constant_c1(g.strip_radius) * math.e * abs(cfg.lam) * g.norm_r / (gap - delta)


def npoint_tail(cfg: ExpansionConfig, gap: float, delta: float, n_max: Optional[int] = None) -> float:
    n_max = cfg.n_max if n_max is None else n_max
    r = cfg.density.strip_radius
    rho = boundary_ratio(cfg, gap, delta)
    inside = abs(cfg.lam) * radius_a0(cfg) < gap and rho < 1.0 and gap - delta < r / 2.0
    if not inside:
        if cfg.certified:
            raise RadiusViolation(f"|lambda| a0 = {abs(cfg.lam) * radius_a0(cfg):.3g} with gap {gap:g} "
                                  f"is outside the certified domain")
        logger.warning(f"N-point tail bound is infinite at |lambda|={abs(cfg.lam):g}, gap {gap:g}")
        return math.inf
    weight = max(poly.norm(r) for poly in cfg.observables)
    return weight ** cfg.N * rho ** (n_max + 1) / (1.0 - rho)


# Public series

def green_series(cfg: ExpansionConfig, z: Sequence[complex]) -> SeriesValue:
    z = [complex(zk) for zk in z]
    if len(z) != cfg.N:
        raise ValueError(f"Expected {cfg.N} spectral points, got {len(z)}")
    if any(zk.imag == 0 for zk in z):
        raise RealAxisInput(f"green_series needs off-axis points, got {z}")
    classes = series_classes(cfg)
    factors = _site_factors(cfg, classes, "off_axis", z)
    partial = _accumulate(cfg, classes, factors)
    tail = off_axis_tail(cfg, z)
    logger.info(f"green_series z={z} lam={cfg.lam:g} n_max={cfg.n_max}: {partial[-1]:.10g} (tail {tail:.3g})")
    return _series(cfg, partial, tail, z)


def _boundary_partials(cfg: ExpansionConfig, classes, sigma: SignVector, E: EnergyVector) -> List[complex]:
    factors = _site_factors(cfg, classes, "boundary", (sigma, E))
    return _accumulate(cfg, classes, factors)


def dos_series(cfg: ExpansionConfig, sigma: HalfPlaneSign, E: float) -> SeriesValue:
    if cfg.N != 1 or cfg.observables[0] != identity(cfg.d):
        raise ValueError("dos_series needs a single identity observable")
    sigma = HalfPlaneSign.parse(sigma)
    tail = dos_tail(cfg)
    classes = series_classes(cfg)
    partial = _boundary_partials(cfg, classes, SignVector((sigma,)), EnergyVector((E,)))
    return _series(cfg, partial, tail, [E], sigma.symbol)


def _boundary_gap(cfg: ExpansionConfig, E: EnergyVector) -> Tuple[float, float]:
    if cfg.gap is not None:
        return cfg.gap, cfg.delta
    gap = E.min_gap if cfg.N > 1 else cfg.density.strip_radius / 2.0
    return gap, gap / 4.0


def npoint_boundary_series(cfg: ExpansionConfig, sigma, E) -> SeriesValue:
    sigma = sigma if isinstance(sigma, SignVector) else SignVector(tuple(sigma))
    E = E if isinstance(E, EnergyVector) else EnergyVector(tuple(E))
    if len(sigma) != cfg.N or len(E) != cfg.N:
        raise ValueError(f"Expected {cfg.N} signs and energies")
    if not E.distinct:
        raise CoincidentPoints(f"Boundary series needs distinct energies, got {E.entries}")
    gap, delta = _boundary_gap(cfg, E)
    if cfg.certified and cfg.N > 1 and (E.min_gap < gap or E.min_gap <= radius_a0(cfg) * abs(cfg.lam)):
        raise RadiusViolation(f"Energy gap {E.min_gap:g} must reach {gap:g} and exceed a0|lambda|")
    tail = npoint_tail(cfg, gap, delta)
    classes = series_classes(cfg)
    partial = _boundary_partials(cfg, classes, sigma, E)
    return _series(cfg, partial, tail, E.entries, str(sigma))


def correlation_density(cfg: ExpansionConfig, E) -> Tuple[SeriesValue, Dict[str, SeriesValue]]:
    """(1/(2 pi i))^N sum_sigma (prod sigma_k) G^sigma(E), with the individual boundary series."""
    E = E if isinstance(E, EnergyVector) else EnergyVector(tuple(E))
    if not E.distinct:
        raise CoincidentPoints(f"Correlation density needs distinct energies, got {E.entries}")
    gap, delta = _boundary_gap(cfg, E)
    tail = npoint_tail(cfg, gap, delta)
    classes = series_classes(cfg)
    prefactor = (1.0 / (2j * math.pi)) ** cfg.N
    combined = [0j] * (cfg.n_max + 1)
    parts = {}
    for signs in itertools.product((HalfPlaneSign.PLUS, HalfPlaneSign.MINUS), repeat=cfg.N):
        sigma = SignVector(signs)
        partial = _boundary_partials(cfg, classes, sigma, E)
        parts[str(sigma)] = _series(cfg, partial, tail, E.entries, str(sigma))
        combined = [c + prefactor * sigma.sign_product * p for c, p in zip(combined, partial)]
    density_tail = (2 ** cfg.N) * tail / (2.0 * math.pi) ** cfg.N
    return _series(cfg, combined, density_tail, E.entries, "stone"), parts


def density_of_states(cfg: ExpansionConfig, E: float, smoothing: float = 0.0) -> Tuple[float, float, SeriesValue]:
    """(DOS, DOS tail, underlying series); smoothing > 0 evaluates (1/pi) Im G(E + i smoothing)."""
    if smoothing > 0:
        series = green_series(cfg, [complex(E, smoothing)])
    else:
        series = dos_series(cfg, HalfPlaneSign.PLUS, E)
    return series.value.imag / math.pi, series.tail_bound / math.pi, series


# Algebra-norm helpers

def taylor_table(taylor, grid: Sequence[float], max_order: int) -> np.ndarray:
    """Table T[l, k] = (1/l!) F^(l)(grid[k]) from a callable taylor(l, x)."""
    grid = list(grid)
    table = np.empty((max_order + 1, len(grid)), dtype=complex)
    for l in range(max_order + 1):
        for k, x in enumerate(grid):
            table[l, k] = taylor(l, x)
    return table


def taylor_product(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Pointwise Leibniz product of two Taylor tables."""
    orders = min(a.shape[0], b.shape[0])
    out = np.zeros((orders,) + a.shape[1:], dtype=complex)
    for l in range(orders):
        for k in range(l + 1):
            out[l] += a[k] * b[l - k]
    return out


def delta_norm_estimate(table: np.ndarray, delta: float) -> float:
    """sum_l delta^l sup |F^(l)|/l! over the sampled points."""
    sups = np.max(np.abs(table), axis=1)
    return float(np.sum(sups * delta ** np.arange(table.shape[0])))
