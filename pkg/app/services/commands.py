"""
Shared plumbing for the command plugins: turning a RunConfig into module
objects, and the result type every command handler returns.
"""
from dataclasses import dataclass, field
from typing import List, Optional, Sequence

from ..core.config import settings
from ..core.errors import ConfigError, DensityError
from ..models.schemas import RunConfig
from .covariant import CovariantPolynomial, parse_observable
from .densities import AnalyticDensity, parse_density
from .expansion import ExpansionConfig
from .oracle import FiniteBox


@dataclass
class CommandResult:
    rows: List[dict]
    columns: Sequence[str]
    passed: bool = True
    summary: dict = field(default_factory=dict)


def resolve_threads(config: RunConfig) -> int:
    return config.threads if config.threads is not None else max(1, settings.threads)


def density_of(config: RunConfig) -> AnalyticDensity:
    try:
        return parse_density(config.density)
    except DensityError as e:
        raise ConfigError("density", str(e))


def observables_of(config: RunConfig, count: Optional[int] = None) -> List[CovariantPolynomial]:
    polys = [parse_observable(spec, config.d, config.lam) for spec in config.observables]
    if count is not None and len(polys) == 1 and count > 1:
        polys = polys * count
    if count is not None and len(polys) != count:
        raise ConfigError("observables", f"Expected {count} observables, got {len(polys)}")
    return polys


def expansion_config(config: RunConfig, observables: Optional[Sequence[CovariantPolynomial]] = None,
                     gap: Optional[float] = None) -> ExpansionConfig:
    return ExpansionConfig(
        d=config.d,
        lam=config.lam,
        density=density_of(config),
        observables=tuple(observables or ()),
        n_max=config.n_max,
        gap=gap if gap is not None else config.gap,
        delta=config.delta,
        certified=config.certified,
        deterministic=config.deterministic,
        threads=resolve_threads(config),
    )


def box_of(config: RunConfig) -> FiniteBox:
    return FiniteBox(config.d, config.box_L, config.boundary)


def margin_of(config: RunConfig) -> int:
    """Default margin is n_max sites: walks of the truncated series never leave that ball."""
    return config.margin if config.margin is not None else config.n_max
