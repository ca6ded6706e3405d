"""Gaussian measure primitives.

The ambient measure is the probability measure on R^n with density

    gauss_density(x) = pi^(-n/2) * exp(-|x|^2)

with respect to Lebesgue measure.  Everything downstream (atom size
conditions, tail functionals, partition-of-unity normalisations) reduces to
masses of intervals, boxes and Euclidean balls under this measure, so those
are computed here once, in closed form where possible:

* intervals: scaled error functions, written with ``erfc`` so that masses of
  far-out intervals keep full relative precision instead of cancelling;
* boxes: products of interval masses;
* balls in dimension >= 2: the mass of B(c, r) depends only on (|c|, r) and
  equals the noncentral chi-square CDF ``F(2 r^2; df=n, nc=2|c|^2)``, which we
  evaluate by a Poisson-mixture series with a certified truncation bound.

Supports are clipped at |x| <= CLIP where the Gaussian mass beyond is far
below double precision resolution.
"""

from __future__ import annotations

import math

import numpy as np
from scipy import special

# Clipping bound for "whole space" in finite representations.  The one-sided
# Gaussian tail mass beyond 40 is ~ 2e-699, i.e. zero even in subnormal
# doubles once multiplied by anything of interest.
CLIP = 40.0

SQRT_PI = math.sqrt(math.pi)

# Certified truncation target for the noncentral chi-square series.
_NCX2_TAIL = 1e-14
_MAX_DIM = 8


def as_point(x) -> np.ndarray:
    """Validate and return a point of R^n as a 1-d float array."""
    p = np.atleast_1d(np.asarray(x, dtype=float))
    if p.ndim != 1 or p.size < 1:
        raise ValueError(f"point must be a 1-d vector, got shape {p.shape}")
    if not np.all(np.isfinite(p)):
        raise ValueError("point has non-finite coordinates")
    return p


def gauss_density(x) -> float:
    """Density pi^(-n/2) exp(-|x|^2) of the Gauss measure at x."""
    p = as_point(x)
    n = p.size
    return math.pi ** (-n / 2) * math.exp(-float(p @ p))


class GaussDensity:
    """Gauss density bound to a fixed dimension."""

    def __init__(self, dimension: int):
        if dimension < 1:
            raise ValueError("dimension must be >= 1")
        self.dimension = int(dimension)
        self._norm = math.pi ** (-self.dimension / 2)

    def __call__(self, x) -> float:
        p = as_point(x)
        if p.size != self.dimension:
            raise ValueError(f"expected dimension {self.dimension}, got {p.size}")
        return self._norm * math.exp(-float(p @ p))

    def log_density(self, x) -> float:
        p = as_point(x)
        if p.size != self.dimension:
            raise ValueError(f"expected dimension {self.dimension}, got {p.size}")
        return math.log(self._norm) - float(p @ p)


def gauss_tail(x):
    """One-dimensional upper tail mass gamma([x, inf)) = erfc(x) / 2.

    Accurate for all x, including far tails where erf would lose all digits.
    """
    return special.erfc(x) / 2.0


def interval_gauss_mass(a, b):
    """Mass of [a, b] under the 1-d Gauss measure, elementwise.

    Uses tail differences so that intervals deep in either tail retain full
    relative accuracy (needed to normalise far-out indicator functions).
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    lo = np.minimum(a, b)
    hi = np.maximum(a, b)
    out = np.empty(np.broadcast(lo, hi).shape, dtype=float)
    lo, hi = np.broadcast_arrays(lo, hi)
    right = lo >= 0.0
    left = hi <= 0.0
    mid = ~(right | left)
    if np.any(right):
        out[right] = (special.erfc(lo[right]) - special.erfc(hi[right])) / 2.0
    if np.any(left):
        out[left] = (special.erfc(-hi[left]) - special.erfc(-lo[left])) / 2.0
    if np.any(mid):
        out[mid] = (special.erf(hi[mid]) + special.erf(-lo[mid])) / 2.0
    if out.ndim == 0:
        return float(out)
    return out


def first_moment_interval(a, b):
    """integral_a^b x dgamma(x) in one dimension, elementwise."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    val = (np.exp(-(a * a)) - np.exp(-(b * b))) / (2.0 * SQRT_PI)
    if val.ndim == 0:
        return float(val)
    return val


def _m2_tail(x):
    # integral_x^inf t^2 dgamma(t): erfc-based antiderivative, tail safe.
    x = np.asarray(x, dtype=float)
    return special.erfc(x) / 4.0 + x * np.exp(-(x * x)) / (2.0 * SQRT_PI)


def second_moment_interval(a, b):
    """integral_a^b x^2 dgamma(x) in one dimension, elementwise.

    Written as a difference of tail integrals so far-out cells keep relative
    precision (the plain antiderivative saturates at 1/4 and cancels).
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    lo = np.minimum(a, b)
    hi = np.maximum(a, b)
    lo_b, hi_b = np.broadcast_arrays(lo, hi)
    out = np.empty(lo_b.shape, dtype=float)
    right = lo_b >= 0.0
    left = hi_b <= 0.0
    mid = ~(right | left)
    if np.any(right):
        out[right] = _m2_tail(lo_b[right]) - _m2_tail(hi_b[right])
    if np.any(left):
        out[left] = _m2_tail(-hi_b[left]) - _m2_tail(-lo_b[left])
    if np.any(mid):
        # split at 0 so both halves are tail-safe
        out[mid] = 0.5 - _m2_tail(-lo_b[mid]) - _m2_tail(hi_b[mid])
    if out.ndim == 0:
        return float(out)
    return out


def _log_gammainc(a: np.ndarray, y: float) -> np.ndarray:
    """log of the regularised lower incomplete gamma P(a, y), elementwise.

    Falls back to the ascending series log P(a,y) = a log y - y - lgamma(a+1)
    + log(sum_k y^k / ((a+1)...(a+k))) where the direct value underflows;
    that regime has y << a, where the series converges geometrically.
    """
    a = np.asarray(a, dtype=float)
    direct = special.gammainc(a, y)
    with np.errstate(divide="ignore"):
        out = np.log(direct)
    small = direct < 1e-280
    if np.any(small):
        for i in np.flatnonzero(small):
            ai = float(a[i])
            term, total, k = 1.0, 1.0, 0
            while term > 1e-18 * total and k < 500:
                term *= y / (ai + 1.0 + k)
                total += term
                k += 1
            out[i] = ai * math.log(y) - y - special.gammaln(ai + 1.0) + math.log(total)
    return out


def _ncx2_cdf(x: float, df: int, nc: float) -> float:
    """Noncentral chi-square CDF by the Poisson mixture series.

    F(x; df, nc) = sum_j  Pois(j; nc/2) * P(df/2 + j, x/2)

    with P the regularised lower incomplete gamma function.  Terms are summed
    in log space over a window that covers both the Poisson mode (which
    dominates when x is comparable to df + nc) and j near 0 (which dominates
    for small balls far from the origin).  The neglected Poisson mass, known
    exactly from the gamma-function identity for Poisson tails, certifies the
    absolute truncation error since every CDF factor lies in [0, 1].
    """
    if x <= 0.0:
        return 0.0
    mu = nc / 2.0
    y = x / 2.0
    if mu <= 1e-300:
        return float(special.gammainc(df / 2.0, y))
    half = 10.0 + 10.0 * math.sqrt(mu)
    j_lo = max(0, int(math.floor(mu - half)))
    j_hi = int(math.ceil(mu + half)) + 10
    # low-j window: the term maximum for small y sits near j* with
    # j*(a + j*) ~ mu*y, so a fixed pad beyond sqrt(mu*y) suffices.
    low_hi = int(math.ceil(4.0 * math.sqrt(mu * y))) + 32
    if j_lo > low_hi + 1:
        js = np.concatenate([np.arange(0, low_hi + 1), np.arange(j_lo, j_hi + 1)])
    else:
        j_lo = 0
        js = np.arange(0, j_hi + 1)
    log_w = js * math.log(mu) - mu - special.gammaln(js + 1.0)
    # Poisson mass outside [j_lo, j_hi], via P(N >= k) = gammainc(k, mu):
    lower_tail = float(special.gammaincc(j_lo, mu)) if j_lo > 0 else 0.0
    upper_tail = float(special.gammainc(j_hi + 1.0, mu))
    uncovered = lower_tail + upper_tail
    if uncovered > _NCX2_TAIL:
        raise ArithmeticError(
            f"noncentral chi-square series window too narrow: tail {uncovered:.3e}"
        )
    log_terms = log_w + _log_gammainc(df / 2.0 + js, y)
    val = float(np.exp(logsumexp_1d(log_terms)))
    return min(max(val, 0.0), 1.0)


def logsumexp_1d(log_terms: np.ndarray) -> float:
    m = float(np.max(log_terms))
    if m == -math.inf:
        return -math.inf
    return m + math.log(float(np.sum(np.exp(log_terms - m))))


def _ball_params(ball_or_center, radius=None):
    if radius is None:
        center = as_point(ball_or_center.center)
        radius = float(ball_or_center.radius)
    else:
        center = as_point(ball_or_center)
        radius = float(radius)
    return center, radius


def ball_gauss_measure(ball_or_center, radius=None) -> float:
    """Gauss measure of a Euclidean ball.

    Accepts a Ball-like object (``.center``, ``.radius``) or an explicit
    (center, radius) pair.  n = 1 is done with interval masses; n >= 2 via the
    noncentral chi-square reduction gamma(B(c,r)) = F(2 r^2; n, 2|c|^2).
    """
    center, radius = _ball_params(ball_or_center, radius)
    if radius <= 0.0:
        raise ValueError(f"ball radius must be positive, got {radius}")
    n = center.size
    if n == 1:
        c = float(center[0])
        return interval_gauss_mass(c - radius, c + radius)
    if n > _MAX_DIM:
        raise ValueError(f"ball measures supported up to dimension {_MAX_DIM}")
    nc = 2.0 * float(center @ center)
    return _ncx2_cdf(2.0 * radius * radius, n, nc)


def box_gauss_measure(lo, hi) -> float:
    """Gauss measure of the axis-aligned box [lo_1,hi_1] x ... x [lo_n,hi_n]."""
    lo = as_point(lo)
    hi = as_point(hi)
    if lo.size != hi.size:
        raise ValueError("box corners must have the same dimension")
    if np.any(hi < lo):
        raise ValueError("box must satisfy lo <= hi componentwise")
    masses = interval_gauss_mass(lo, hi)
    return float(np.prod(np.atleast_1d(masses)))


def integrate_gauss(f) -> float:
    """Integral of a represented function against the Gauss measure.

    Dispatches to the representation's own exact cellwise integral; the only
    error is special-function evaluation.
    """
    integral = getattr(f, "integral_gauss", None)
    if integral is None:
        raise TypeError(
            f"unsupported representation {type(f).__name__}: expected an object "
            "with an integral_gauss() method (StepFunction1D, BoxSumFunctionND, ...)"
        )
    return float(integral())
