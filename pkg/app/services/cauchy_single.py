import math

import numpy as np

from ..core.errors import RealAxisInput
from ..models.multiindex import HalfPlaneSign
from .densities import AnalyticDensity, StripFunction
from .quadrature import CORE_REACH, complex_quad, real_line_integral

# Below this relative size of h(E+u) - h(E-u) at u = PV_PROBE, the [0, 1] piece
# switches to the integrated-by-parts form.
PV_CANCELLATION = 1e-8
PV_PROBE = 1e-4


def constant_c(r: float) -> float:
    return 8.0 / math.pi + 2.0 + r + r * r


def _point(h: StripFunction, x: float) -> complex:
    return complex(h._evaluate(np.asarray(x, dtype=complex)))


def i_n(g: StripFunction, n: int, z: complex) -> complex:
    """int g(v) / (v - z)^(n+1) dv for Im z != 0."""
    if n < 0:
        raise ValueError(f"Order must be non-negative, got {n}")
    z = complex(z)
    if z.imag == 0:
        raise RealAxisInput(f"i_n needs Im z != 0, got z={z}")
    power = n + 1

    def integrand(v):
        return _point(g, v) / (v - z) ** power

    distance = max(abs(z.imag), CORE_REACH * g.scale)
    return real_line_integral(integrand, breakpoints=[z.real], scale=g.scale,
                              tail_mass=g.tail_mass, tail_weight=distance ** (-power))


def pv_integral(h: StripFunction, E: float) -> complex:
    """int_0^inf (h(E+u) - h(E-u))/u du, the real-axis part of the boundary value."""
    E = float(E)
    here = np.asarray(E, dtype=complex)
    slope = complex(h.derivative_values(1, here))

    def quotient(u):
        if u == 0.0:
            return 2.0 * slope
        return (_point(h, E + u) - _point(h, E - u)) / u

    diff = abs(_point(h, E + PV_PROBE) - _point(h, E - PV_PROBE))
    size = abs(_point(h, E + PV_PROBE)) + abs(_point(h, E - PV_PROBE))
    if size > 0 and diff < PV_CANCELLATION * size:
        def second(x):
            pair = h.derivative_values(2, np.asarray([E + x, E - x], dtype=complex))
            weight = x - x * math.log(x) if x > 0 else 0.0
            return complex(pair[0] - pair[1]) * weight

        ends = h.derivative_values(1, np.asarray([E + 1.0, E - 1.0], dtype=complex))
        correction, _ = complex_quad(second, 0.0, 1.0)
        head = complex(ends[0] + ends[1]) - correction
    else:
        head, _ = complex_quad(quotient, 0.0, 1.0)

    tail, _ = complex_quad(lambda u: (_point(h, E + u) - _point(h, E - u)) / u, 1.0, math.inf)
    return head + tail


def i0_boundary(g: StripFunction, sigma: HalfPlaneSign, E: float) -> complex:
    """Boundary value of I_0(g; E + i sigma 0)."""
    sigma = HalfPlaneSign.parse(sigma)
    return pv_integral(g, E) + int(sigma) * 1j * math.pi * _point(g, E)


def i0_bound(g: AnalyticDensity) -> float:
    r = g.strip_radius
    return ((8.0 / math.pi + 2.0) / r ** 2 + 1.0 / r + 1.0) * g.norm_r


def in_boundary(g: StripFunction, n: int, sigma: HalfPlaneSign, E: float) -> complex:
    if n < 0:
        raise ValueError(f"Order must be non-negative, got {n}")
    if n == 0:
        return i0_boundary(g, sigma, E)
    return i0_boundary(g.derivative(n), sigma, E) / math.factorial(n)


def jn_boundary_taylor(g: StripFunction, n: int, l: int, sigma: HalfPlaneSign, E: float) -> complex:
    """(1/l!) d^l/dE^l of the boundary value I_n(g; E + i sigma 0)."""
    return math.comb(n + l, l) * in_boundary(g, n + l, sigma, E)


def jn_dos_delta_bound(g: AnalyticDensity, n: int, delta: float) -> float:
    """Bound on the delta-norm of the boundary value of I_n, for 0 < delta < r."""
    r = g.strip_radius
    if not 0 < delta < r:
        raise ValueError(f"delta must lie in (0, {r:g}), got {delta}")
    return r * math.e ** 2 * constant_c(r) / 4.0 * (n + 3) ** 2 / (r - delta) ** (n + 3) * g.norm_r
