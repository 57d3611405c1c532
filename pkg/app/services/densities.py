"""
Single-site probability densities analytic in a strip |Im z| < r.

Every object here is a StripFunction: a vectorized analytic function with a
strip radius, derivative access (closed form where known, Cauchy circle
quadrature otherwise) and a computable upper bound on its strip norm
||h||_r = sup_{|w|<r} int |h(v + iw)| dv.
"""
import math
from functools import lru_cache
from typing import Callable, Dict, Optional, Sequence

import numpy as np
from numpy.polynomial import hermite_e
from scipy import integrate, optimize, special
from loguru import logger

from ..core.config import (
    CIRCLE_NODES, CIRCLE_MAX_NODES, CIRCLE_TOL, POSITIVITY_GRID, NORM_SAFETY,
    QUAD_EPSABS, QUAD_LIMIT,
)
from ..core.errors import DensityError, StripViolation


def _as_output(values: np.ndarray, like):
    if np.ndim(like) == 0:
        return complex(np.asarray(values).reshape(()))
    return values


def circle_derivative(func: Callable[[np.ndarray], np.ndarray], n: int, z, rho: float,
                      nodes: int = CIRCLE_NODES, tol: float = CIRCLE_TOL,
                      max_nodes: int = CIRCLE_MAX_NODES) -> np.ndarray:
    """n-th derivative through the trapezoidal rule on the circle |w - z| = rho."""
    z = np.asarray(z, dtype=complex)
    if n == 0:
        return func(z)
    scale = math.factorial(n) / rho ** n
    previous = None
    m = nodes
    while True:
        theta = 2.0 * np.pi * np.arange(m) / m
        w = np.exp(1j * theta)
        values = func(z[..., None] + rho * w)
        estimate = scale * np.mean(values * w ** (-n), axis=-1)
        if previous is not None:
            # roundoff floor of the weighted mean
            floor = 64.0 * np.finfo(float).eps * scale * np.max(np.abs(values), axis=-1)
            allowed = np.maximum(tol * np.maximum(1.0, np.abs(estimate)), floor)
            if np.all(np.abs(estimate - previous) <= allowed):
                return estimate
        if m >= max_nodes:
            logger.warning(f"Circle quadrature for derivative order {n} did not settle at {m} nodes")
            return estimate
        previous = estimate
        m *= 2


def strip_line_norm(func: Callable[[np.ndarray], np.ndarray], radius: float, scale: float = 1.0,
                    symmetric: bool = True, grid: int = 17) -> float:
    """sup over |w| < radius of int |func(v + iw)| dv by quadrature on a w-grid with bounded refinement."""
    def line_integral(w: float) -> float:
        value, _ = integrate.quad(lambda v: float(np.abs(func(np.asarray(v + 1j * w)))), -np.inf, np.inf,
                                  epsabs=1e-12, epsrel=1e-10, limit=QUAD_LIMIT)
        return value

    top = radius * (1.0 - 1e-9)
    lows = 0.0 if symmetric else -top
    ws = np.linspace(lows, top, grid)
    values = np.array([line_integral(w) for w in ws])
    k = int(np.argmax(values))
    best = float(values[k])
    lo = ws[max(k - 1, 0)]
    hi = ws[min(k + 1, len(ws) - 1)]
    if hi > lo:
        res = optimize.minimize_scalar(lambda w: -line_integral(w), bounds=(lo, hi), method="bounded",
                                       options={"xatol": 1e-10 * max(1.0, radius)})
        if res.success:
            best = max(best, -float(res.fun))
    return best


class StripFunction:
    """An analytic function on the strip |Im z| < strip_radius."""

    strip_radius: float = 1.0
    scale: float = 1.0
    name: str = "function"

    def _evaluate(self, z: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def _closed_derivative(self, n: int, z: np.ndarray) -> Optional[np.ndarray]:
        return None

    def _check_strip(self, z, margin: float = 0.0):
        if np.any(np.abs(np.imag(z)) + margin >= self.strip_radius):
            raise StripViolation(
                f"{self.name}: |Im z| + {margin:g} reaches the strip radius {self.strip_radius:g}")

    def evaluate(self, z):
        arr = np.asarray(z, dtype=complex)
        self._check_strip(arr)
        return _as_output(self._evaluate(arr), z)

    def __call__(self, z):
        return self.evaluate(z)

    def default_rho(self) -> float:
        return self.strip_radius / 2.0

    def derivative_values(self, n: int, z: np.ndarray, rho: Optional[float] = None) -> np.ndarray:
        """Unchecked vectorized derivative; callers own the strip check."""
        if n == 0:
            return self._evaluate(z)
        closed = self._closed_derivative(n, z)
        if closed is not None:
            return closed
        return circle_derivative(self._evaluate, n, z, rho if rho is not None else self.default_rho())

    def deriv(self, n: int, z, rho: Optional[float] = None):
        if n < 0:
            raise ValueError(f"Derivative order must be non-negative, got {n}")
        arr = np.asarray(z, dtype=complex)
        if rho is None:
            rho = self.default_rho()
        self._check_strip(arr, margin=rho if n > 0 else 0.0)
        return _as_output(self.derivative_values(n, arr, rho), z)

    def derivative(self, n: int, rho: Optional[float] = None) -> "StripFunction":
        if n == 0:
            return self
        return DerivativeFunction(self, n, rho)

    def norm_bound(self) -> float:
        """Upper bound on ||h||_r for r = strip_radius."""
        raise NotImplementedError

    def tail_mass(self, reach: float) -> Optional[float]:
        """Bound on int_{|v| > reach} |h(v)| dv, or None when unknown."""
        return None

    @property
    def real_on_axis(self) -> bool:
        return True


class DerivativeFunction(StripFunction):
    def __init__(self, base: StripFunction, order: int, rho: Optional[float] = None):
        if isinstance(base, DerivativeFunction):
            order += base.order
            rho = rho if rho is not None else base.rho
            base = base.base
        self.base = base
        self.order = order
        self.rho = rho if rho is not None else base.default_rho()
        if not 0 < self.rho < base.strip_radius:
            raise StripViolation(f"Derivative radius {self.rho:g} must lie in (0, {base.strip_radius:g})")
        self.strip_radius = base.strip_radius - self.rho
        self.scale = base.scale
        self.name = f"{base.name}^({order})"

    def _evaluate(self, z):
        return self.base.derivative_values(self.order, z, self.rho)

    def _closed_derivative(self, n, z):
        return self.base._closed_derivative(self.order + n, z)

    def derivative_values(self, n, z, rho=None):
        return self.base.derivative_values(self.order + n, z, self.rho)

    def derivative(self, n: int, rho: Optional[float] = None) -> StripFunction:
        if n == 0:
            return self
        return DerivativeFunction(self.base, self.order + n, rho if rho is not None else self.rho)

    def default_rho(self) -> float:
        return self.strip_radius / 2.0

    def norm_bound(self) -> float:
        return math.factorial(self.order) * self.base.norm_bound() / self.rho ** self.order

    @property
    def real_on_axis(self) -> bool:
        return self.base.real_on_axis


class ScaledFunction(StripFunction):
    """factor * base, used for g^(m)/m! style normalizations."""

    def __init__(self, base: StripFunction, factor: complex):
        self.base = base
        self.factor = complex(factor)
        self.strip_radius = base.strip_radius
        self.scale = base.scale
        self.name = f"{self.factor:g}*{base.name}"

    def _evaluate(self, z):
        return self.factor * self.base._evaluate(z)

    def _closed_derivative(self, n, z):
        closed = self.base._closed_derivative(n, z)
        return None if closed is None else self.factor * closed

    def norm_bound(self) -> float:
        return abs(self.factor) * self.base.norm_bound()

    def tail_mass(self, reach):
        mass = self.base.tail_mass(reach)
        return None if mass is None else abs(self.factor) * mass

    @property
    def real_on_axis(self) -> bool:
        return self.factor.imag == 0 and self.base.real_on_axis


class AnalyticDensity(StripFunction):
    """A probability density with strip radius r, cached ||g||_r and second moment M_g."""

    kind = "density"

    def __init__(self, strip_radius: float, params: Dict[str, float]):
        if strip_radius <= 0:
            raise DensityError(f"Strip radius must be positive, got {strip_radius}")
        self.strip_radius = float(strip_radius)
        self.params = dict(params)
        self.name = self.to_spec()
        self._norms: Dict[float, float] = {}
        self.norm_r = self.norm(self.strip_radius)

    def to_spec(self) -> str:
        fields = ",".join(f"{k}={v:g}" for k, v in {**self.params, "r": self.strip_radius}.items())
        return f"{self.kind}:{fields}"

    @property
    def second_moment(self) -> float:
        raise NotImplementedError

    def _strip_norm(self, radius: float) -> float:
        return strip_line_norm(self._evaluate, radius, scale=self.scale)

    def norm(self, radius: float) -> float:
        if not 0 < radius <= self.strip_radius:
            raise StripViolation(f"Norm radius {radius:g} must lie in (0, {self.strip_radius:g}]")
        key = float(radius)
        if key not in self._norms:
            self._norms[key] = self._strip_norm(key)
        return self._norms[key]

    def norm_bound(self) -> float:
        return self.norm_r

    def sample(self, rng: np.random.Generator, size) -> np.ndarray:
        raise NotImplementedError

    def cdf(self, x):
        raise NotImplementedError

    def __repr__(self) -> str:
        return f"{type(self).__name__}({self.to_spec()})"

    def __eq__(self, other) -> bool:
        return isinstance(other, AnalyticDensity) and other.to_spec() == self.to_spec()

    def __hash__(self) -> int:
        return hash(self.to_spec())


class GaussianDensity(AnalyticDensity):
    kind = "gaussian"

    def __init__(self, sigma2: float = 1.0, r: float = 1.0):
        if sigma2 <= 0:
            raise DensityError(f"Gaussian variance must be positive, got {sigma2}")
        self.sigma2 = float(sigma2)
        self.sigma = math.sqrt(self.sigma2)
        self.scale = self.sigma
        super().__init__(r, {"sigma2": self.sigma2})

    def _evaluate(self, z):
        return np.exp(-z * z / (2.0 * self.sigma2)) / math.sqrt(2.0 * math.pi * self.sigma2)

    def _closed_derivative(self, n, z):
        # g^(n)(z) = (-1)^n He_n(z/sigma) g(z) / sigma^n
        coeffs = np.zeros(n + 1)
        coeffs[n] = 1.0
        x = z / self.sigma
        return (-1) ** n * hermite_e.hermeval(x, coeffs) * self._evaluate(z) / self.sigma ** n

    def _strip_norm(self, radius):
        return math.exp(radius * radius / (2.0 * self.sigma2))

    def tail_mass(self, reach):
        return float(special.erfc(reach / (self.sigma * math.sqrt(2.0))))

    @property
    def second_moment(self):
        return self.sigma2

    def sample(self, rng, size):
        return rng.normal(0.0, self.sigma, size)

    def cdf(self, x):
        return special.ndtr(np.asarray(x, dtype=float) / self.sigma)


class CauchyDensity(AnalyticDensity):
    kind = "cauchy"

    def __init__(self, a: float = 1.0, r: float = 0.5):
        if a <= 0:
            raise DensityError(f"Cauchy scale must be positive, got {a}")
        if r >= a:
            raise DensityError(f"Cauchy density with scale {a} needs strip radius r < {a}, got {r}")
        self.a = float(a)
        self.scale = self.a
        super().__init__(r, {"a": self.a})

    def _evaluate(self, z):
        return (self.a / math.pi) / (z * z + self.a * self.a)

    def _closed_derivative(self, n, z):
        # g^(n)(z) = (-1)^n n!/(2 pi i) [(z - ia)^(-n-1) - (z + ia)^(-n-1)]
        ia = 1j * self.a
        return ((-1) ** n * math.factorial(n) / (2j * math.pi)
                * ((z - ia) ** (-n - 1) - (z + ia) ** (-n - 1)))

    def tail_mass(self, reach):
        return 1.0 - 2.0 / math.pi * math.atan(reach / self.a)

    @property
    def second_moment(self):
        return math.inf

    def sample(self, rng, size):
        return self.a * rng.standard_cauchy(size)

    def cdf(self, x):
        return 0.5 + np.arctan(np.asarray(x, dtype=float) / self.a) / math.pi


class UserDensity(AnalyticDensity):
    """A density given as a vectorized analytic callable.

    Positivity is sampled on a grid and normalization checked by quadrature;
    ||g||_r is estimated numerically and inflated by NORM_SAFETY unless given.
    """

    kind = "user"

    def __init__(self, func: Callable[[np.ndarray], np.ndarray], r: float, norm_r: Optional[float] = None,
                 scale: float = 1.0, second_moment: Optional[float] = None, label: str = "user"):
        self.func = func
        self.scale = float(scale)
        self.label = label
        self._given_norm = norm_r
        self._second_moment = second_moment
        self._sampler = None
        self._check_positive()
        super().__init__(r, {})
        self._check_normalized()

    def to_spec(self) -> str:
        return f"{self.kind}:{self.label},r={self.strip_radius:g}"

    def _evaluate(self, z):
        return np.asarray(self.func(z), dtype=complex)

    def _check_positive(self):
        reach = 20.0 * self.scale
        grid = np.linspace(-reach, reach, POSITIVITY_GRID)
        values = np.asarray(self.func(grid.astype(complex)), dtype=complex)
        if np.any(values.real < -1e-14) or np.any(np.abs(values.imag) > 1e-12 * (1.0 + np.abs(values.real))):
            raise DensityError(f"Density {self.label} is not real and non-negative on the sampling grid")

    def _check_normalized(self):
        mass, _ = integrate.quad(lambda v: float(np.real(self.func(np.asarray(v, dtype=complex)))),
                                 -np.inf, np.inf, epsabs=QUAD_EPSABS, limit=QUAD_LIMIT)
        if abs(mass - 1.0) > 1e-6:
            raise DensityError(f"Density {self.label} integrates to {mass:.10g}, not 1")
        mean, _ = integrate.quad(lambda v: v * float(np.real(self.func(np.asarray(v, dtype=complex)))),
                                 -np.inf, np.inf, epsabs=QUAD_EPSABS, limit=QUAD_LIMIT)
        if abs(mean) > 1e-6:
            logger.warning(f"Density {self.label} has mean {mean:.3g}; the model assumes centred potentials")

    def _strip_norm(self, radius):
        if self._given_norm is not None and radius == self.strip_radius:
            return float(self._given_norm)
        return NORM_SAFETY * super()._strip_norm(radius)

    @property
    def second_moment(self):
        if self._second_moment is None:
            value, err = integrate.quad(lambda v: v * v * float(np.real(self.func(np.asarray(v, dtype=complex)))),
                                        -np.inf, np.inf, limit=QUAD_LIMIT)
            self._second_moment = value if np.isfinite(value) and err < 1e-6 * max(1.0, value) else math.inf
        return self._second_moment

    def _inverse_cdf_table(self):
        if self._sampler is None:
            reach = 40.0 * self.scale
            grid = np.linspace(-reach, reach, 40_001)
            pdf = np.maximum(np.real(self._evaluate(grid.astype(complex))), 0.0)
            cdf = integrate.cumulative_trapezoid(pdf, grid, initial=0.0)
            cdf /= cdf[-1]
            self._sampler = (cdf, grid)
        return self._sampler

    def sample(self, rng, size):
        cdf, grid = self._inverse_cdf_table()
        return np.interp(rng.random(size), cdf, grid)

    def cdf(self, x):
        cdf, grid = self._inverse_cdf_table()
        return np.interp(np.asarray(x, dtype=float), grid, cdf)


class ProductFunction(StripFunction):
    """v -> g(v) * prod_k a_k(v) for coefficient functions attached at one site."""

    def __init__(self, density: StripFunction, coefficients: Sequence):
        self.density = density
        self.coefficients = tuple(coefficients)
        self.strip_radius = min([density.strip_radius] + [c.strip_radius for c in self.coefficients])
        self.scale = density.scale
        self.name = "*".join([density.name] + [c.name for c in self.coefficients])

    def _evaluate(self, z):
        value = self.density._evaluate(z)
        for c in self.coefficients:
            value = value * c.values(z)
        return value

    def coefficient_bound(self) -> float:
        return math.prod(c.sup_norm(self.strip_radius) for c in self.coefficients)

    def norm_bound(self) -> float:
        return self.coefficient_bound() * self.density.norm_bound()

    def tail_mass(self, reach):
        mass = self.density.tail_mass(reach)
        if mass is None:
            return None
        return mass * math.prod(c.sup_norm(0.0) for c in self.coefficients)

    @property
    def real_on_axis(self) -> bool:
        return self.density.real_on_axis and all(c.real_on_axis for c in self.coefficients)


DENSITY_KINDS = {
    "gaussian": (GaussianDensity, {"sigma2": 1.0, "r": 1.0}),
    "cauchy": (CauchyDensity, {"a": 1.0, "r": 0.5}),
}


@lru_cache(maxsize=32)
def parse_density(spec: str) -> AnalyticDensity:
    """Parse `gaussian:sigma2=1.0,r=1.0` or `cauchy:a=1.0,r=0.5`."""
    kind, _, rest = spec.strip().partition(":")
    kind = kind.strip().lower()
    if kind not in DENSITY_KINDS:
        raise DensityError(f"Unknown density kind {kind!r}; expected one of {', '.join(DENSITY_KINDS)}")
    cls, defaults = DENSITY_KINDS[kind]
    params = dict(defaults)
    for item in filter(None, (p.strip() for p in rest.split(","))):
        key, sep, value = item.partition("=")
        key = key.strip()
        if not sep or key not in defaults:
            raise DensityError(f"Invalid parameter {item!r} for {kind} density")
        try:
            params[key] = float(value)
        except ValueError:
            raise DensityError(f"Parameter {key} of {kind} density is not a number: {value!r}")
    return cls(**params)


def evaluate(g: StripFunction, z):
    return g.evaluate(z)


def deriv(g: StripFunction, n: int, z, rho: Optional[float] = None):
    return g.deriv(n, z, rho)


def norm_r(g: AnalyticDensity, radius: float) -> float:
    return g.norm(radius)


def deriv_sup_bound(g: AnalyticDensity, n: int, rho: float) -> float:
    if not 0 < rho < g.strip_radius:
        raise ValueError(f"rho must lie in (0, {g.strip_radius:g}), got {rho}")
    return math.factorial(n) * g.norm_r / rho ** n


def value_sup_bound(g: AnalyticDensity, rho: float) -> float:
    """Bound on sup |g(z)| over |Im z| <= r - rho."""
    if not 0 < rho < g.strip_radius:
        raise ValueError(f"rho must lie in (0, {g.strip_radius:g}), got {rho}")
    return g.norm_r / (math.pi * rho)
