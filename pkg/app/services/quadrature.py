import math
from functools import lru_cache
from typing import Callable, Iterable, Optional, Tuple

import numpy as np
from numpy.polynomial.legendre import leggauss
from scipy import integrate
from loguru import logger

from ..core.config import (
    QUAD_EPSABS, QUAD_EPSREL, QUAD_LIMIT, TAIL_TOL,
    SIMPLEX_ORDER, SIMPLEX_MAX_ORDER, SIMPLEX_TOL,
)

# Largest tensor grid the simplex rule will build.
MAX_SIMPLEX_NODES = 2_000_000
PANEL_NODES = 16
TAIL_NODES = 48
CORE_REACH = 12.0


@lru_cache(maxsize=None)
def gauss_legendre_unit(order: int) -> Tuple[np.ndarray, np.ndarray]:
    """Gauss-Legendre nodes and weights on [0, 1]."""
    x, w = leggauss(order)
    return (x + 1.0) / 2.0, w / 2.0


def complex_quad(f: Callable[[float], complex], a: float, b: float,
                 epsabs: float = QUAD_EPSABS, epsrel: float = QUAD_EPSREL,
                 limit: int = QUAD_LIMIT) -> Tuple[complex, float]:
    re, re_err = integrate.quad(lambda v: complex(f(v)).real, a, b, epsabs=epsabs, epsrel=epsrel, limit=limit)
    im, im_err = integrate.quad(lambda v: complex(f(v)).imag, a, b, epsabs=epsabs, epsrel=epsrel, limit=limit)
    return complex(re, im), math.hypot(re_err, im_err)


def real_line_integral(f: Callable[[float], complex], breakpoints: Iterable[float] = (),
                       scale: float = 1.0, tail_mass: Optional[Callable[[float], Optional[float]]] = None,
                       tail_weight: float = 1.0) -> complex:
    """Integrate f over the real line.

    The core [-V, V] is split at the breakpoints and into panels of width
    about 4*scale. The two infinite tails are skipped when tail_mass(V) times
    tail_weight bounds them below TAIL_TOL.
    """
    points = sorted({float(p) for p in breakpoints})
    reach = max((abs(p) for p in points), default=0.0) + CORE_REACH * scale
    panels = max(2, int(math.ceil(2.0 * reach / (4.0 * scale))))
    edges = set(np.linspace(-reach, reach, panels + 1).tolist())
    edges.update(p for p in points if -reach < p < reach)
    edges = sorted(edges)

    total = 0j
    for a, b in zip(edges, edges[1:]):
        if b - a <= 0:
            continue
        value, _ = complex_quad(f, a, b)
        total += value

    mass = tail_mass(reach) if tail_mass is not None else None
    if mass is None or mass * tail_weight >= TAIL_TOL:
        right, _ = complex_quad(f, reach, math.inf)
        left, _ = complex_quad(f, -math.inf, -reach)
        total += right + left
    return total


class PrincipalValueRule:
    """Vectorized rule for P(h; x) = int_0^inf (h(x+u) - h(x-u))/u du.

    [0, U] is covered by Gauss-Legendre panels whose width is a fraction of
    the analyticity scale of h; (U, inf) is mapped to (0, 1] by u = U/t.
    """

    def __init__(self, scale: float, strip: float, reach: float):
        width = 0.5 * min(scale, strip)
        self.reach = reach
        panels = max(1, int(math.ceil(reach / width)))
        t, w = gauss_legendre_unit(PANEL_NODES)
        h = reach / panels
        starts = np.arange(panels) * h
        self.core_nodes = (starts[:, None] + h * t[None, :]).ravel()
        self.core_weights = np.tile(h * w, panels)
        tt, tw = gauss_legendre_unit(TAIL_NODES)
        self.tail_nodes = reach / tt
        # (h(x+u)-h(x-u))/u du with u = U/t becomes (h(x+U/t)-h(x-U/t)) dt/t
        self.tail_weights = tw / tt

    @property
    def size(self) -> int:
        return self.core_nodes.size + self.tail_nodes.size

    def apply(self, h: Callable[[np.ndarray], np.ndarray], x: np.ndarray, batch_elements: int = 40_000) -> np.ndarray:
        x = np.atleast_1d(np.asarray(x, dtype=float))
        u = np.concatenate([self.core_nodes, self.tail_nodes])
        weights = np.concatenate([self.core_weights / self.core_nodes, self.tail_weights])
        out = np.empty(x.shape, dtype=complex)
        flat_x = x.ravel()
        flat_out = out.ravel()
        batch = max(1, batch_elements // u.size)
        for start in range(0, flat_x.size, batch):
            xs = flat_x[start:start + batch][:, None]
            diff = h((xs + u[None, :]).astype(complex)) - h((xs - u[None, :]).astype(complex))
            flat_out[start:start + batch] = diff @ weights
        return flat_out.reshape(x.shape)


def pv_rule_for(h, x: np.ndarray) -> PrincipalValueRule:
    x = np.atleast_1d(np.asarray(x, dtype=float))
    reach = float(np.max(np.abs(x))) + CORE_REACH * h.scale
    return PrincipalValueRule(scale=h.scale, strip=h.strip_radius, reach=reach)


@lru_cache(maxsize=64)
def simplex_rule(n_points: int, order: int) -> Tuple[np.ndarray, np.ndarray]:
    """Nodes s (M, N) and weights (M,) for integrals over the standard simplex.

    The simplex {s_k >= 0, sum s_k = 1} carries the measure ds_1...ds_{N-1};
    it is mapped to [0,1]^(N-1) by s_1 = t_1, s_k = t_k prod_{j<k}(1 - t_j).
    """
    if n_points < 1:
        raise ValueError("simplex dimension must be at least 1")
    if n_points == 1:
        return np.ones((1, 1)), np.ones(1)
    t, w = gauss_legendre_unit(order)
    dims = n_points - 1
    grids = np.meshgrid(*([t] * dims), indexing="ij")
    wgrids = np.meshgrid(*([w] * dims), indexing="ij")
    T = np.stack([g.ravel() for g in grids], axis=1)
    weights = np.prod(np.stack([g.ravel() for g in wgrids], axis=1), axis=1)

    s = np.empty((T.shape[0], n_points))
    remaining = np.ones(T.shape[0])
    for k in range(dims):
        weights = weights * remaining
        s[:, k] = T[:, k] * remaining
        remaining = remaining * (1.0 - T[:, k])
    s[:, dims] = remaining
    return s, weights


def simplex_integrate(func: Callable[[np.ndarray], np.ndarray], n_points: int,
                      order: int = SIMPLEX_ORDER, tol: float = SIMPLEX_TOL,
                      max_order: int = SIMPLEX_MAX_ORDER) -> complex:
    """Tensor Gauss-Legendre on the mapped simplex, doubling the order until two levels agree."""
    if n_points == 1:
        s, w = simplex_rule(1, 1)
        return complex(np.sum(w * func(s)))
    cap = int(MAX_SIMPLEX_NODES ** (1.0 / (n_points - 1)))
    max_order = max(order, min(max_order, cap))

    s, w = simplex_rule(n_points, order)
    previous = complex(np.sum(w * func(s)))
    while True:
        next_order = order * 2
        if next_order > max_order:
            logger.warning(f"Simplex quadrature (N={n_points}) stopped at order {order} before reaching {tol:g}")
            return previous
        s, w = simplex_rule(n_points, next_order)
        current = complex(np.sum(w * func(s)))
        if abs(current - previous) <= tol * max(1.0, abs(current)):
            return current
        previous, order = current, next_order
