"""Discretised grand maximal operators.

The test-function class consists of C^1 functions supported in the unit ball
with values and first derivatives bounded by 1, closed under Lipschitz limits
(so the tent profile belongs to it).  The true supremum over that class is not
computable; the operational operator used throughout sups over

* a finite dictionary of piecewise polynomial profiles (tent, smoothed
  plateau bumps of several widths, odd "skew" variants that detect oscillation),
* a geometric ladder of scales t, per-point restricted to the admissible range
  (0, min(1, 1/|x|)) for the local operator, or to (0, 2 (d(x, supp f) +
  diam supp f)) for the classical one, beyond which the convolution of a
  compactly supported integrable function vanishes or falls under its
  far-field envelope.

Every dictionary convolution against a step / box-grid function is an exact
piecewise-polynomial integral (antiderivative differences at cell edges), so
profile values are true pointwise lower bounds of the corresponding suprema,
and enriching the dictionary or the ladder can only increase them.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import measure
from .func_repr import BoxSumFunctionND, GridFunctionND, StepFunction1D


class Profile1D:
    """Piecewise polynomial profile on [-1, 1] with its exact antiderivative."""

    def __init__(self, name: str, breaks, polys):
        self.name = name
        self.breaks = np.asarray(breaks, dtype=float)
        self.polys = [np.asarray(p, dtype=float) for p in polys]
        if len(self.breaks) != len(self.polys) + 1:
            raise ValueError("need one polynomial per piece")
        # antiderivative pieces with continuity constants
        self.antis = []
        acc = 0.0
        for lo, hi, p in zip(self.breaks[:-1], self.breaks[1:], self.polys):
            ap = np.polyint(p)
            c = acc - np.polyval(ap, lo)
            self.antis.append((ap, c))
            acc = np.polyval(ap, hi) + c
        self.total = acc

    def __call__(self, u):
        u = np.asarray(u, dtype=float)
        out = np.zeros_like(u)
        idx = np.searchsorted(self.breaks, u, side="right") - 1
        for i, p in enumerate(self.polys):
            m = idx == i
            if np.any(m):
                out[m] = np.polyval(p, u[m])
        inside = (u >= self.breaks[0]) & (u <= self.breaks[-1])
        return np.where(inside, out, 0.0)

    def antiderivative(self, z):
        """A(z) = integral_{-inf}^{z} profile(u) du, vectorised."""
        z = np.asarray(z, dtype=float)
        zc = np.clip(z, self.breaks[0], self.breaks[-1])
        out = np.full(zc.shape, self.total)
        idx = np.searchsorted(self.breaks, zc, side="right") - 1
        idx = np.clip(idx, 0, len(self.polys) - 1)
        for i, (ap, c) in enumerate(self.antis):
            m = idx == i
            if np.any(m):
                out[m] = np.polyval(ap, zc[m]) + c
        out[zc <= self.breaks[0]] = 0.0
        return out

    def max_slope(self) -> float:
        xs = np.linspace(self.breaks[0], self.breaks[-1], 4001)
        h = (xs[1] - xs[0]) / 2
        return float(np.max(np.abs(self(xs + h) - self(xs - h)) / (2 * h)))


def tent_profile() -> Profile1D:
    return Profile1D("tent", [-1.0, 0.0, 1.0], [[1.0, 1.0], [-1.0, 1.0]])


def bump_profile(w: float) -> Profile1D:
    """C^1 bump of support width 2w with unit derivative bound:
    phi(u) = (w/1.5) (1 - 3 v^2 + 2 |v|^3), v = u / w."""
    a = w / 1.5
    left = [-2.0 * a / w**3, -3.0 * a / w**2, 0.0, a]  # |v|^3 = -v^3 for u < 0
    right = [2.0 * a / w**3, -3.0 * a / w**2, 0.0, a]
    return Profile1D(f"bump{w:g}", [-w, 0.0, w], [left, right])


def skew_profile(w: float) -> Profile1D:
    """Odd C^1 profile u (1 - (u/w)^2)^2 on [-w, w]; detects first moments."""
    c4 = 1.0 / w**4
    c2 = -2.0 / w**2
    poly = [c4, 0.0, c2, 0.0, 1.0, 0.0]
    return Profile1D(f"skew{w:g}", [-w, w], [poly])


@dataclass(frozen=True)
class TensorProfile:
    """Separable profile c * prod_d comp_d(x_d), supported in the unit ball."""

    name: str
    components: tuple
    amplitude: float

    @property
    def dim(self) -> int:
        return len(self.components)


def _tensor_amplitude(components) -> float:
    heights = [max(abs(c(np.linspace(c.breaks[0], c.breaks[-1], 801))).max(), 1e-300) for c in components]
    slopes = [c.max_slope() for c in components]
    c_max = 1.0 / np.prod(heights)
    for i in range(len(components)):
        others = np.prod([h for j, h in enumerate(heights) if j != i])
        c_max = min(c_max, 1.0 / (slopes[i] * others))
    return float(c_max) * (1 - 1e-9)


def tensor_tent(n: int, w: float = 1.0) -> TensorProfile:
    a = w / math.sqrt(n)
    comp = Profile1D("t", [-a, 0.0, a], [[1.0 / a, 1.0], [-1.0 / a, 1.0]])
    comps = tuple(comp for _ in range(n))
    return TensorProfile(f"ttent{w:g}", comps, _tensor_amplitude(comps))


def tensor_bump(n: int, w: float) -> TensorProfile:
    a = w / math.sqrt(n)
    comps = tuple(bump_profile(a) for _ in range(n))
    return TensorProfile(f"tbump{w:g}", comps, _tensor_amplitude(comps))


def tensor_skew(n: int, axis: int, w: float = 1.0) -> TensorProfile:
    a = w / math.sqrt(n)
    comps = tuple(
        skew_profile(a) if d == axis else bump_profile(a) for d in range(n)
    )
    return TensorProfile(f"tskew{axis}_{w:g}", comps, _tensor_amplitude(comps))


@dataclass(frozen=True)
class TestFunctionDictionary:
    """Finite family of admissible test profiles plus the scale ladder spec."""

    profiles: tuple
    dim: int
    t_min: float = 1e-4
    ratio: float = 2.0 ** 0.25
    cap_margin: float = 1e-12

    def __len__(self):
        return len(self.profiles)

    def ladder(self, t_max: float) -> np.ndarray:
        if t_max <= self.t_min:
            return np.array([self.t_min])
        k = int(math.floor(math.log(t_max / self.t_min) / math.log(self.ratio)))
        return self.t_min * self.ratio ** np.arange(k + 1)


def default_dictionary(
    n: int = 1,
    widths: Sequence[float] = (1.0, 0.5, 0.25),
    t_min: float = 1e-4,
    ratio: float = 2.0 ** 0.25,
) -> TestFunctionDictionary:
    if n == 1:
        profs = [tent_profile()]
        profs += [bump_profile(w) for w in widths]
        profs += [skew_profile(w) for w in widths]
    else:
        profs = [tensor_tent(n)]
        profs += [tensor_bump(n, w) for w in widths]
        profs += [tensor_skew(n, axis, widths[0]) for axis in range(n)]
    return TestFunctionDictionary(tuple(profs), dim=n, t_min=t_min, ratio=ratio)


def reduced_dictionary(n: int = 1, t_min: float = 1e-4) -> TestFunctionDictionary:
    """Smaller dictionary for inner loops (level sets of CZ decompositions)."""
    if n == 1:
        profs = (tent_profile(), bump_profile(0.5), skew_profile(1.0))
    else:
        profs = (tensor_tent(n), tensor_skew(n, 0, 1.0))
    return TestFunctionDictionary(profs, dim=n, t_min=t_min)


# ---------------------------------------------------------------------------
# exact convolutions


def _conv_step_matrix(profile: Profile1D, t, x: np.ndarray, f: StepFunction1D):
    """phi_t * f at points x: antiderivative differences over f's cells.

    ``t`` may be a scalar or a per-point array.
    """
    if f.is_zero:
        return np.zeros_like(x)
    t = np.asarray(t, dtype=float)
    args = (x[:, None] - f.edges[None, :]) / (t[:, None] if t.ndim else t)
    A = profile.antiderivative(args)
    return (A[:, :-1] - A[:, 1:]) @ f.values


def _conv_tensor_grid(profile: TensorProfile, t: float, axes_pts, g: GridFunctionND):
    """phi_t * f on a tensor grid of evaluation points, separable profile."""
    out = g.values
    for d in range(g.dim):
        comp = profile.components[d]
        args = (axes_pts[d][:, None] - g.axes[d][None, :]) / t
        A = comp.antiderivative(args)
        D = A[:, :-1] - A[:, 1:]
        out = np.tensordot(D, out, axes=([1], [0]))
        out = np.moveaxis(out, 0, g.dim - 1)
    return profile.amplitude * out


def convolve(profile, t: float, f, x) -> float:
    """Exact phi_t * f(x) for one profile, scale and point."""
    if isinstance(profile, Profile1D):
        if not isinstance(f, StepFunction1D):
            raise TypeError("1-d profiles convolve step functions")
        return float(_conv_step_matrix(profile, float(t), np.atleast_1d(np.asarray(x, float)), f)[0])
    g = f.grid() if isinstance(f, BoxSumFunctionND) else f
    pt = measure.as_point(x)
    axes_pts = [np.array([pt[d]]) for d in range(g.dim)]
    return float(_conv_tensor_grid(profile, float(t), axes_pts, g).ravel()[0])


# ---------------------------------------------------------------------------
# maximal profiles


@dataclass
class MaximalProfile:
    """Lower approximation of a maximal function on an evaluation grid.

    1-d: ``edges`` (m+1) and ``values`` at cell midpoints.
    n-d: ``axes`` per-dimension edges, ``values`` a tensor at cell centers.
    Norms integrate the piecewise constant interpolant exactly.
    """

    axes: tuple
    values: np.ndarray

    @property
    def dim(self) -> int:
        return len(self.axes)

    def points(self):
        mids = [0.5 * (a[:-1] + a[1:]) for a in self.axes]
        if self.dim == 1:
            return mids[0]
        mesh = np.meshgrid(*mids, indexing="ij")
        return np.column_stack([m.ravel() for m in mesh])

    def as_grid_function(self) -> GridFunctionND:
        return GridFunctionND(self.axes, self.values)

    def as_step_function(self) -> StepFunction1D:
        if self.dim != 1:
            raise ValueError("1-d only")
        return StepFunction1D(self.axes[0], self.values)

    def l1_gamma(self) -> float:
        return self.as_grid_function().abs().integral_gauss()

    def lp_gamma(self, p: float) -> float:
        return self.as_grid_function().norm_gauss(p)

    def l1_lebesgue(self) -> float:
        return self.as_grid_function().abs().norm_lebesgue_l1()

    def sup(self) -> float:
        return float(np.max(self.values)) if self.values.size else 0.0

    def max_outside(self, ball) -> float:
        """Largest profile value at grid points outside the given ball."""
        pts = self.points()
        if self.dim == 1:
            pts = pts[:, None]
        d = np.linalg.norm(pts - ball.center_array, axis=1)
        outside = d > ball.radius * (1 + 1e-12)
        vals = self.values.ravel()[outside]
        return float(vals.max()) if vals.size else 0.0


def eval_grid_1d(lo: float, hi: float, m: int) -> np.ndarray:
    return np.linspace(lo, hi, m + 1)


def _caps_local(pts_norm: np.ndarray, margin: float) -> np.ndarray:
    with np.errstate(divide="ignore"):
        inv = np.where(pts_norm > 0, 1.0 / np.maximum(pts_norm, 1e-300), np.inf)
    return np.minimum(1.0, inv) * (1.0 - margin)


def _sweep_1d(f, edges, dictionary, caps, include_cap_pass=True):
    mids = 0.5 * (edges[:-1] + edges[1:])
    best = np.zeros_like(mids)
    t_max = float(np.max(caps))
    ladder = dictionary.ladder(t_max)
    for prof in dictionary.profiles:
        for t in ladder:
            active = caps > t
            if not np.any(active):
                continue
            conv = _conv_step_matrix(prof, float(t), mids[active], f)
            best[active] = np.maximum(best[active], np.abs(conv))
        if include_cap_pass:
            # one extra pass exactly at the per-point upper scale limit
            conv = _conv_step_matrix(prof, caps, mids, f)
            np.maximum(best, np.abs(conv), out=best)
    return MaximalProfile((np.asarray(edges, float),), best)


def _sweep_nd(g: GridFunctionND, axes, dictionary, caps_fn):
    axes = [np.asarray(a, float) for a in axes]
    mids = [0.5 * (a[:-1] + a[1:]) for a in axes]
    mesh = np.meshgrid(*mids, indexing="ij")
    norms = np.sqrt(sum(m * m for m in mesh))
    caps = caps_fn(mesh, norms)
    best = np.zeros(norms.shape)
    t_max = float(np.max(caps))
    ladder = dictionary.ladder(t_max)
    for prof in dictionary.profiles:
        for t in ladder:
            active = caps > t
            if not np.any(active):
                continue
            conv = _conv_tensor_grid(prof, float(t), mids, g)
            np.maximum(best, np.where(active, np.abs(conv), 0.0), out=best)
    return MaximalProfile(tuple(axes), best)


def local_grand_maximal(f, grid, dictionary=None) -> MaximalProfile:
    """Operational local grand maximal function on an evaluation grid.

    ``grid`` is an edges array (1-d) or a sequence of per-axis edges (n-d).
    Scales run over the dictionary ladder inside (t_min, min(1, 1/|x|)), the
    openness of the upper limit enforced by a 1e-12 relative margin.  Values
    are pointwise lower bounds for the true operator and grow monotonically
    under dictionary enrichment.
    """
    if isinstance(f, StepFunction1D):
        if dictionary is None:
            dictionary = default_dictionary(1)
        if len(dictionary) == 0:
            raise ValueError("empty test-function dictionary")
        edges = np.asarray(grid, dtype=float)
        mids = 0.5 * (edges[:-1] + edges[1:])
        caps = _caps_local(np.abs(mids), dictionary.cap_margin)
        return _sweep_1d(f, edges, dictionary, caps)
    g = f.grid() if isinstance(f, BoxSumFunctionND) else f
    if dictionary is None:
        dictionary = default_dictionary(g.dim)
    if len(dictionary) == 0:
        raise ValueError("empty test-function dictionary")
    if dictionary.dim != g.dim:
        raise ValueError("dictionary dimension mismatch")
    caps_fn = lambda mesh, norms: _caps_local(norms, dictionary.cap_margin)
    return _sweep_nd(g, grid, dictionary, caps_fn)


def classical_grand_maximal(f, grid, dictionary=None) -> MaximalProfile:
    """Operational classical grand maximal function for compactly supported f.

    The per-point scale cap is 2 (d(x, supp f) + diam supp f): for larger t
    the support of phi_t((x - .)/t) has left the support of f entirely or the
    convolution is dominated by its far-field envelope; in both cases the sup
    over the capped range is the operational value used on both sides of all
    norm comparisons.
    """
    if isinstance(f, StepFunction1D):
        if f.is_zero:
            edges = np.asarray(grid, dtype=float)
            return MaximalProfile((edges,), np.zeros(len(edges) - 1))
        if dictionary is None:
            dictionary = default_dictionary(1)
        lo, hi = f.support_interval()
        diam = hi - lo
        edges = np.asarray(grid, dtype=float)
        mids = 0.5 * (edges[:-1] + edges[1:])
        dist = np.maximum(np.maximum(lo - mids, mids - hi), 0.0)
        caps = 2.0 * (dist + diam)
        return _sweep_1d(f, edges, dictionary, caps, include_cap_pass=True)
    g = f.grid() if isinstance(f, BoxSumFunctionND) else f
    if dictionary is None:
        dictionary = default_dictionary(g.dim)
    box = g.support_box()
    if box is None:
        axes = [np.asarray(a, float) for a in grid]
        shape = tuple(len(a) - 1 for a in axes)
        return MaximalProfile(tuple(axes), np.zeros(shape))
    lo, hi = box
    diam = float(np.linalg.norm(hi - lo))

    def caps_fn(mesh, norms):
        dist2 = sum(
            np.maximum(np.maximum(lo[d] - m, m - hi[d]), 0.0) ** 2
            for d, m in enumerate(mesh)
        )
        return 2.0 * (np.sqrt(dist2) + diam)

    return _sweep_nd(g, grid, dictionary, caps_fn)
