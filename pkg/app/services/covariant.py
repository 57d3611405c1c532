"""
Finite-range covariant observables: monomials with a displacement and
coefficient functions of single-site potentials, their finite sums, and the
per-site integrands g_{Gamma,u} of the walk expansion.
"""
import math
import re
from dataclasses import dataclass, field
from typing import Callable, Dict, Mapping, Optional, Sequence, Tuple

import numpy as np
from scipy import sparse

from ..core.errors import ConfigError, MissingPotential
from ..models.lattice import NPathFamily, Site, add_sites, origin, sub_sites, unit_vector
from .densities import ProductFunction, StripFunction


@dataclass(frozen=True)
class _CoefficientKind:
    evaluate: Callable[[np.ndarray, float], np.ndarray]
    strip_radius: Callable[[float], float]
    sup_norm: Callable[[float, float], float]


class CoefficientRegistry:
    def __init__(self):
        self._kinds: Dict[str, _CoefficientKind] = {}

    def register(self, name: str, strip_radius: Callable[[float], float], sup_norm: Callable[[float, float], float]):
        def decorator(func):
            self._kinds[name] = _CoefficientKind(func, strip_radius, sup_norm)
            return func
        return decorator

    def get(self, name: str) -> _CoefficientKind:
        try:
            return self._kinds[name]
        except KeyError:
            raise ConfigError("observables", f"Unknown coefficient function {name!r}; known: {', '.join(sorted(self._kinds))}")

    def names(self):
        return sorted(self._kinds)


coefficient_registry = CoefficientRegistry()


@coefficient_registry.register("constant", strip_radius=lambda c: math.inf, sup_norm=lambda c, radius: abs(c))
def _constant(z, c):
    return np.full(np.shape(z), c, dtype=complex)


@coefficient_registry.register(
    "rational1",
    strip_radius=lambda b: b,
    sup_norm=lambda b, radius: 1.0 / (1.0 - (radius / b) ** 2) if radius < b else math.inf,
)
def _rational(z, b):
    return 1.0 / (1.0 + (z / b) ** 2)


@coefficient_registry.register(
    "gaussian_damped",
    strip_radius=lambda c: math.inf,
    sup_norm=lambda c, radius: math.exp(radius ** 2 / (2.0 * c * c)),
)
def _gaussian_damped(z, c):
    return np.exp(-z * z / (2.0 * c * c))


DEFAULT_COEFFICIENT_PARAMS = {"constant": 1.0, "rational1": 1.0, "gaussian_damped": 1.0}


@dataclass(frozen=True, order=True)
class CoefficientFunction:
    kind: str
    param: float = 1.0

    def __post_init__(self):
        coefficient_registry.get(self.kind)

    @property
    def name(self) -> str:
        return f"{self.kind}:{self.param:g}"

    @property
    def strip_radius(self) -> float:
        return coefficient_registry.get(self.kind).strip_radius(self.param)

    def values(self, z) -> np.ndarray:
        return coefficient_registry.get(self.kind).evaluate(np.asarray(z, dtype=complex), self.param)

    def __call__(self, v) -> complex:
        return complex(self.values(v))

    def sup_norm(self, radius: float) -> float:
        """sup |a(z)| over |Im z| < radius."""
        return coefficient_registry.get(self.kind).sup_norm(self.param, radius)

    @property
    def real_on_axis(self) -> bool:
        return True


@dataclass(frozen=True, order=True)
class CovariantMonomial:
    displacement: Site
    coefficients: Tuple[Tuple[Site, CoefficientFunction], ...] = ()

    def __post_init__(self):
        displacement = tuple(int(c) for c in self.displacement)
        coefficients = tuple(sorted((tuple(int(c) for c in off), coef) for off, coef in self.coefficients))
        offsets = [off for off, _ in coefficients]
        if len(set(offsets)) != len(offsets):
            raise ValueError("At most one coefficient function per site offset")
        for off in offsets:
            if len(off) != len(displacement):
                raise ValueError(f"Coefficient offset {off} and displacement {displacement} differ in dimension")
        object.__setattr__(self, "displacement", displacement)
        object.__setattr__(self, "coefficients", coefficients)

    @property
    def d(self) -> int:
        return len(self.displacement)

    def coefficient_at(self, offset: Site) -> Optional[CoefficientFunction]:
        for off, coef in self.coefficients:
            if off == offset:
                return coef
        return None

    def sup_norm(self, radius: float) -> float:
        return math.prod(coef.sup_norm(radius) for _, coef in self.coefficients)


@dataclass(frozen=True)
class CovariantPolynomial:
    terms: Tuple[Tuple[complex, CovariantMonomial], ...]
    label: str = field(default="", compare=False)

    def __post_init__(self):
        if not self.terms:
            raise ValueError("A covariant polynomial needs at least one term")
        object.__setattr__(self, "terms", tuple((complex(w), m) for w, m in self.terms))

    @property
    def d(self) -> int:
        return self.terms[0][1].d

    def scaled(self, factor: complex) -> "CovariantPolynomial":
        return CovariantPolynomial(tuple((factor * w, m) for w, m in self.terms), self.label)

    def norm(self, radius: float = 0.0) -> float:
        """sum over terms of |weight| times the coefficient sup-norms on |Im z| < radius."""
        return sum(abs(w) * m.sup_norm(radius) for w, m in self.terms)


def identity(d: int) -> CovariantPolynomial:
    return CovariantPolynomial(((1.0, CovariantMonomial(origin(d))),), label="identity")


def velocity(d: int, nu: int, lam: float) -> CovariantPolynomial:
    """<x|d_nu H|y> = i (x_nu - y_nu) lam on nearest neighbours."""
    if not 0 <= nu < d:
        raise ValueError(f"Velocity direction {nu} outside 0..{d - 1}")
    forward = CovariantMonomial(unit_vector(d, nu, 1))
    backward = CovariantMonomial(unit_vector(d, nu, -1))
    return CovariantPolynomial(((-1j * lam, forward), (1j * lam, backward)), label=f"velocity:nu={nu}")


def _monomial_element(A: CovariantMonomial, potentials: Mapping[Site, float], x: Site, y: Site) -> complex:
    if sub_sites(y, x) != A.displacement:
        return 0j
    value = 1.0 + 0j
    for off, coef in A.coefficients:
        site = add_sites(x, off)
        if site not in potentials:
            raise MissingPotential(f"No potential at site {site}")
        value *= coef(potentials[site])
    return value


def matrix_element(A, potentials: Mapping[Site, float], x: Sequence[int], y: Sequence[int]) -> complex:
    x = tuple(int(c) for c in x)
    y = tuple(int(c) for c in y)
    if isinstance(A, CovariantMonomial):
        return _monomial_element(A, potentials, x, y)
    return sum((w * _monomial_element(m, potentials, x, y) for w, m in A.terms), 0j)


def site_coefficients(family: NPathFamily, monomials: Sequence[CovariantMonomial]) -> Dict[Site, Tuple[Optional[CoefficientFunction], ...]]:
    """For each site u carrying a coefficient, the tuple (a_{i, u - end_i})_i."""
    attached: Dict[Site, list] = {}
    for i, (walk, mono) in enumerate(zip(family.walks, monomials)):
        for off, coef in mono.coefficients:
            u = add_sites(walk.end, off)
            attached.setdefault(u, [None] * len(monomials))[i] = coef
    return {u: tuple(coefs) for u, coefs in attached.items()}


def assemble_site_density(g: StripFunction, family: NPathFamily, monomials: Sequence[CovariantMonomial],
                          u: Sequence[int]) -> StripFunction:
    u = tuple(int(c) for c in u)
    coefs = site_coefficients(family, monomials).get(u, ())
    attached = [c for c in coefs if c is not None]
    if not attached:
        return g
    return ProductFunction(g, attached)


_TOKEN = re.compile(r"[^,()]+(?:\([^)]*\))?(?:=[^,()]+(?:\([^)]*\))?)?")


def _parse_site(text: str, d: int) -> Site:
    inner = text.strip().strip("()")
    try:
        site = tuple(int(c) for c in inner.split(",") if c.strip())
    except ValueError:
        raise ConfigError("observables", f"Invalid lattice vector {text!r}")
    if len(site) != d:
        raise ConfigError("observables", f"Vector {text!r} does not have {d} components")
    return site


def _parse_coefficient(text: str) -> CoefficientFunction:
    kind, _, param = text.strip().partition(":")
    kind = kind.strip()
    value = DEFAULT_COEFFICIENT_PARAMS.get(kind, 1.0)
    if param:
        try:
            value = float(param)
        except ValueError:
            raise ConfigError("observables", f"Invalid coefficient parameter {param!r}")
    return CoefficientFunction(kind, value)


def parse_observable(spec: str, d: int, lam: float) -> CovariantPolynomial:
    """`identity` | `velocity:nu=0` | `monomial:u0=(1,0),coef@(0,0)=rational1[,weight=2]`."""
    kind, _, rest = spec.strip().partition(":")
    kind = kind.strip().lower()
    if kind == "identity":
        return identity(d)
    if kind == "velocity":
        key, _, value = rest.partition("=")
        if key.strip() != "nu":
            raise ConfigError("observables", f"Velocity observable needs nu=<axis>, got {spec!r}")
        try:
            return velocity(d, int(value), lam)
        except ValueError as e:
            raise ConfigError("observables", str(e))
    if kind == "monomial":
        displacement = origin(d)
        coefficients = []
        weight = 1.0
        for token in (t.strip() for t in _TOKEN.findall(rest)):
            if not token:
                continue
            key, _, value = token.partition("=")
            key = key.strip()
            if key == "u0":
                displacement = _parse_site(value, d)
            elif key.startswith("coef@"):
                coefficients.append((_parse_site(key[len("coef@"):], d), _parse_coefficient(value)))
            elif key == "weight":
                weight = complex(value.strip().replace("i", "j"))
            else:
                raise ConfigError("observables", f"Unknown monomial field {key!r} in {spec!r}")
        return CovariantPolynomial(((weight, CovariantMonomial(displacement, tuple(coefficients))),), label=spec)
    raise ConfigError("observables", f"Unknown observable {spec!r}")


def to_sparse_matrix(poly: CovariantPolynomial, box, potentials: Mapping[Site, float]) -> sparse.csr_matrix:
    """Matrix of the observable restricted to a finite box.

    Rows whose coefficient support leaves an open box are dropped.
    """
    rows, cols, vals = [], [], []
    for x in box.sites:
        i = box.index_of(x)
        for w, mono in poly.terms:
            y = box.resolve(add_sites(x, mono.displacement))
            if y is None:
                continue
            try:
                value = _monomial_element(mono, _BoxPotentials(box, potentials), x, add_sites(x, mono.displacement))
            except MissingPotential:
                continue
            if value != 0:
                rows.append(i)
                cols.append(box.index_of(y))
                vals.append(w * value)
    n = box.size
    return sparse.csr_matrix((np.asarray(vals, dtype=complex), (rows, cols)), shape=(n, n))


class _BoxPotentials(Mapping):
    """Potentials seen through the box boundary condition."""

    def __init__(self, box, potentials: Mapping[Site, float]):
        self.box = box
        self.potentials = potentials

    def __getitem__(self, site):
        resolved = self.box.resolve(site)
        if resolved is None:
            raise KeyError(site)
        return self.potentials[resolved]

    def __contains__(self, site):
        resolved = self.box.resolve(site)
        return resolved is not None and resolved in self.potentials

    def __iter__(self):
        return iter(self.potentials)

    def __len__(self):
        return len(self.potentials)
