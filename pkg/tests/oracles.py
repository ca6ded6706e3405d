"""Independent numerical oracles used across the test suite.

These are deliberately naive (adaptive quadrature, dense grids, brute-force
sums) and never share code with the library paths they check.
"""

from __future__ import annotations

import math

import numpy as np
from scipy import integrate
from scipy.special import i0e


def gauss_density_1d(x):
    return np.exp(-np.asarray(x, dtype=float) ** 2) / math.sqrt(math.pi)


def quad_gauss_1d(fn, a, b, **kw):
    """Adaptive quadrature of fn against the 1-d Gauss measure on [a, b]."""
    val, _ = integrate.quad(
        lambda x: fn(x) * math.exp(-x * x) / math.sqrt(math.pi),
        a,
        b,
        limit=400,
        **kw,
    )
    return val


def quad_interval_mass(a, b):
    return quad_gauss_1d(lambda x: 1.0, a, b, epsabs=1e-14)


def ball_mass_2d_polar(c_norm: float, r: float) -> float:
    """2-d Gaussian ball mass via the polar/Bessel reduction (independent of
    the chi-square series)."""
    f = lambda rho: 2.0 * rho * np.exp(-((rho - c_norm) ** 2)) * i0e(2.0 * c_norm * rho)
    val, _ = integrate.quad(f, 0.0, r, epsrel=1e-13, limit=200)
    return val


def step_eval(edges, values, x):
    """Direct (slow) evaluation of a step function at scalar x."""
    for i in range(len(values)):
        if edges[i] <= x < edges[i + 1]:
            return values[i]
    return 0.0


def tail_charge_integral(fn_gauss_tail, upper: float, n: int = 20000) -> float:
    """Brute-force integral_0^upper x * fn_gauss_tail(x) dx by Simpson."""
    xs = np.linspace(0.0, upper, 2 * n + 1)
    ys = xs * np.asarray([fn_gauss_tail(x) for x in xs])
    return float(integrate.simpson(ys, x=xs))
