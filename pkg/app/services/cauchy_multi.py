"""
N-point Cauchy-type integrals J_n(g; z) = int g(v) / prod_k (v - z_k)^(n_k+1) dv,
their boundary values from prescribed half-planes, and the simplex
representation behind the regular/singular decomposition.
"""
import math
from typing import Dict, Sequence, Tuple

import numpy as np
from scipy import optimize

from ..core.errors import CoincidentPoints, ConvexHullViolation, RealAxisInput
from ..models.multiindex import EnergyVector, MultiIndex, SignVector, compositions
from .cauchy_single import constant_c, i_n, in_boundary
from .densities import AnalyticDensity, StripFunction
from .quadrature import CORE_REACH, pv_rule_for, real_line_integral, simplex_integrate


def _as_multiindex(n) -> MultiIndex:
    return n if isinstance(n, MultiIndex) else MultiIndex(tuple(n))


def _as_energies(E) -> EnergyVector:
    return E if isinstance(E, EnergyVector) else EnergyVector(tuple(E))


def _as_signs(sigma) -> SignVector:
    return sigma if isinstance(sigma, SignVector) else SignVector(tuple(sigma))


def _check_lengths(n: MultiIndex, *others: Sequence):
    for other in others:
        if len(other) != len(n):
            raise ValueError(f"Expected {len(n)} points, got {len(other)}")


def _check_distinct(points: Sequence[complex]):
    for i, a in enumerate(points):
        for b in points[i + 1:]:
            if a == b:
                raise CoincidentPoints(f"Coincident points {a} in {tuple(points)}")


def _gap_factor(n: MultiIndex, m: Tuple[int, ...], i: int, points: Sequence[complex],
                l: Tuple[int, ...] = None) -> complex:
    """prod_{j != i} (-1)^m_j (m_j+l_j+n_j)!/(m_j! l_j! n_j!) (p_i - p_j)^-(m_j+l_j+n_j+1)."""
    factor = 1.0 + 0j
    for j, p in enumerate(points):
        if j == i:
            continue
        lj = 0 if l is None else l[j]
        mj, nj = m[j], n[j]
        count = math.factorial(mj + lj + nj) // (math.factorial(mj) * math.factorial(lj) * math.factorial(nj))
        factor *= (-1) ** mj * count / (points[i] - p) ** (mj + lj + nj + 1)
    return factor


def j_n(g: StripFunction, n, z: Sequence[complex]) -> complex:
    """Direct quadrature of J_n(g; z)."""
    n = _as_multiindex(n)
    z = [complex(zk) for zk in z]
    _check_lengths(n, z)
    if any(zk.imag == 0 for zk in z):
        raise RealAxisInput(f"j_n needs all Im z_k != 0, got {z}")
    if len(z) == 1:
        return i_n(g, n[0], z[0])
    powers = [nk + 1 for nk in n]

    def integrand(v):
        value = complex(g._evaluate(np.asarray(v, dtype=complex)))
        for zk, p in zip(z, powers):
            value /= (v - zk) ** p
        return value

    weight = math.prod(max(abs(zk.imag), CORE_REACH * g.scale) ** (-p) for zk, p in zip(z, powers))
    return real_line_integral(integrand, breakpoints=[zk.real for zk in z], scale=g.scale,
                              tail_mass=g.tail_mass, tail_weight=weight)


def j_partial_fraction(g: StripFunction, n, z: Sequence[complex]) -> complex:
    """J_n(g; z) from gap powers and one-point integrals (1/m!) I_0(g^(m); z_i)."""
    n = _as_multiindex(n)
    z = [complex(zk) for zk in z]
    _check_lengths(n, z)
    if any(zk.imag == 0 for zk in z):
        raise RealAxisInput(f"j_partial_fraction needs all Im z_k != 0, got {z}")
    _check_distinct(z)
    cache: Dict[Tuple[int, int], complex] = {}
    total = 0j
    for i in range(len(n)):
        for m in compositions(n[i], len(n)):
            key = (i, m[i])
            if key not in cache:
                cache[key] = i_n(g.derivative(m[i]), 0, z[i]) / math.factorial(m[i])
            total += _gap_factor(n, m, i, z) * cache[key]
    return total


def j_sigma_derivative(g: StripFunction, n, l, sigma, E) -> complex:
    """(1/l!) d^l J_n^sigma(g; E) at distinct real energies."""
    n = _as_multiindex(n)
    l = _as_multiindex(l)
    sigma = _as_signs(sigma)
    E = _as_energies(E)
    _check_lengths(n, l, sigma, E)
    if not E.distinct:
        raise CoincidentPoints(f"Boundary values need distinct energies, got {E.entries}")
    points = list(E.entries)
    cache: Dict[Tuple[int, int], complex] = {}
    total = 0j
    for i in range(len(n)):
        top = n[i] + l[i]
        for m in compositions(top, len(n)):
            key = (i, m[i])
            if key not in cache:
                cache[key] = in_boundary(g, m[i], sigma[i], points[i])
            total += _gap_factor(n, m, i, points, l.entries) * math.comb(top, l[i]) * cache[key]
    return total


def j_sigma_direct(g: StripFunction, n, sigma, E) -> complex:
    n = _as_multiindex(n)
    return j_sigma_derivative(g, n, MultiIndex.zeros(len(n)), sigma, E)


def _derivative_radius(h: StripFunction, E: EnergyVector) -> float:
    gap = E.min_gap
    rho = h.strip_radius / 2.0
    if 0 < gap < math.inf:
        rho = min(rho, gap / 2.0)
    return rho


def _simplex_weight(n: MultiIndex, s: np.ndarray) -> np.ndarray:
    exps = np.asarray(n.entries, dtype=float)
    return np.prod(s ** exps[None, :], axis=1) / n.factorial


def j_reg(g: StripFunction, n, E) -> complex:
    """Regular part: simplex integral of (s^n/n!) P(g^(N+|n|-1); s.E)."""
    n = _as_multiindex(n)
    E = _as_energies(E)
    _check_lengths(n, E)
    order = len(n) + n.total - 1
    h = g.derivative(order, _derivative_radius(g, E)) if order else g
    energies = np.asarray(E.entries)
    rule = pv_rule_for(h, energies)

    def integrand(s):
        return _simplex_weight(n, s) * rule.apply(h._evaluate, s @ energies)

    return simplex_integrate(integrand, len(n))


def residue_part(g: StripFunction, n, E) -> complex:
    """Simplex integral of (s^n/n!) g^(N+|n|-1)(s.E)."""
    n = _as_multiindex(n)
    E = _as_energies(E)
    _check_lengths(n, E)
    order = len(n) + n.total - 1
    h = g.derivative(order, _derivative_radius(g, E)) if order else g
    energies = np.asarray(E.entries)

    def integrand(s):
        return _simplex_weight(n, s) * h._evaluate((s @ energies).astype(complex))

    return simplex_integrate(integrand, len(n))


def singular_part(g: StripFunction, n, sigma, E) -> complex:
    """i pi sum_k sigma_k sum_{|m|=n_k} gap factor * g^(m_k)(E_k)/m_k!."""
    n = _as_multiindex(n)
    sigma = _as_signs(sigma)
    E = _as_energies(E)
    _check_lengths(n, sigma, E)
    if not E.distinct:
        raise CoincidentPoints(f"The singular part needs distinct energies, got {E.entries}")
    points = list(E.entries)
    total = 0j
    for k in range(len(n)):
        for m in compositions(n[k], len(n)):
            value = complex(g.derivative_values(m[k], np.asarray(points[k], dtype=complex)))
            total += int(sigma[k]) * _gap_factor(n, m, k, points) * value / math.factorial(m[k])
    return 1j * math.pi * total


def j_sigma_decomposed(g: StripFunction, n, sigma, E) -> complex:
    n = _as_multiindex(n)
    sigma = _as_signs(sigma)
    E = _as_energies(E)
    _check_lengths(n, sigma, E)
    regular = j_reg(g, n, E)
    if sigma.all_equal:
        return regular + int(sigma[0]) * 1j * math.pi * residue_part(g, n, E)
    return regular + singular_part(g, n, sigma, E)


def _inside_hull(points: Sequence[complex], v: complex) -> bool:
    if len(points) == 1:
        return abs(v - points[0]) <= 1e-14 * max(1.0, abs(v))
    a_eq = np.array([[p.real for p in points], [p.imag for p in points], [1.0] * len(points)])
    b_eq = np.array([v.real, v.imag, 1.0])
    res = optimize.linprog(np.zeros(len(points)), A_eq=a_eq, b_eq=b_eq, bounds=(0, None), method="highs")
    return res.status == 0


def simplex_pole_product(n, z: Sequence[complex], v: complex) -> Tuple[complex, complex]:
    """Both sides of prod (v - z_k)^(-n_k-1) = ((N+|n|-1)!/n!) int s^n / (v - s.z)^(N+|n|) ds."""
    n = _as_multiindex(n)
    z = [complex(zk) for zk in z]
    v = complex(v)
    _check_lengths(n, z)
    if _inside_hull(z, v):
        raise ConvexHullViolation(f"{v} lies in the convex hull of {z}")
    lhs = math.prod((v - zk) ** (-(nk + 1)) for zk, nk in zip(z, n))
    power = len(n) + n.total
    points = np.asarray(z)
    exps = np.asarray(n.entries, dtype=float)

    def integrand(s):
        return np.prod(s ** exps[None, :], axis=1) / (v - s @ points) ** power

    rhs = math.factorial(power - 1) / n.factorial * simplex_integrate(integrand, len(n))
    return lhs, rhs


def restricted_multiindex_sum(n, r: int) -> int:
    """sum_{|m|=r} prod C(m_k+n_k, m_k), checked against C(r+|n|+L-1, r)."""
    n = _as_multiindex(n)
    if r < 0:
        raise ValueError(f"r must be non-negative, got {r}")
    total = 0
    for m in compositions(r, len(n)):
        total += math.prod(math.comb(mk + nk, mk) for mk, nk in zip(m, n))
    closed = math.comb(r + n.total + len(n) - 1, r)
    if total != closed:
        raise ArithmeticError(f"Restricted sum {total} differs from closed form {closed} for n={n.entries}, r={r}")
    return total


def j_sigma_delta_bound(g: AnalyticDensity, n, delta: float, gap: float) -> float:
    """Bound on the delta-norm of J_n^sigma on energies with pairwise gaps above `gap`."""
    n = _as_multiindex(n)
    r = g.strip_radius
    if not 0 < delta < gap - delta < r / 2.0:
        raise ValueError(f"Need 0 < delta < gap - delta < r/2, got delta={delta}, gap={gap}, r={r}")
    N = len(n)
    return 4.0 * constant_c(r) * N * g.norm_r / r * (math.e / (gap - delta)) ** (n.total + N)
