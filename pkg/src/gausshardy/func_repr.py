"""Exact finite representations of functions on R^n.

Two concrete representations cover everything the toolkit manipulates:

* ``StepFunction1D`` -- piecewise constant on half-open cells
  ``[e_i, e_{i+1})``, identically zero outside the extreme breakpoints;
* ``BoxSumFunctionND`` -- a finite sum of weighted indicator functions of
  axis-aligned half-open boxes, with ``GridFunctionND`` as its canonical
  disjoint-cell form (shared tensor grid + value tensor).

Sums, scalar multiples and products are exact; integrals against the Gauss or
Lebesgue measure reduce to finite sums of cell masses.  The one deliberately
inexact operation is multiplying by a smooth partition-of-unity weight, which
is materialised by sampling on a refinement grid (``SampledWeightProduct``)
with a recorded Lipschitz error bound.

Cell values may be astronomically large (indicator functions normalised by
tiny Gaussian masses), so the L^p(gamma) norms are evaluated in log space.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
from scipy.special import logsumexp

from . import measure
from .measure import CLIP


def union_edges(*edge_arrays) -> np.ndarray:
    """Sorted, deduplicated union of breakpoint arrays."""
    arrays = [np.asarray(e, dtype=float) for e in edge_arrays if len(e) > 0]
    if not arrays:
        return np.array([], dtype=float)
    return np.unique(np.concatenate(arrays))


def subdivide_edges(edges: np.ndarray, max_width: float) -> np.ndarray:
    """Refine a breakpoint array so no cell is wider than ``max_width``."""
    edges = np.asarray(edges, dtype=float)
    if len(edges) < 2:
        return edges
    pieces = [edges[:1]]
    for a, b in zip(edges[:-1], edges[1:]):
        k = int(math.ceil((b - a) / max_width))
        if k > 1:
            pieces.append(a + (b - a) * np.arange(1, k) / k)
        pieces.append(np.array([b]))
    return np.unique(np.concatenate(pieces))


class StepFunction1D:
    """Piecewise constant function with compact support.

    ``edges`` is strictly increasing with m+1 entries, ``values`` has m
    entries; the function equals ``values[i]`` on ``[edges[i], edges[i+1])``
    and zero outside.  Instances canonicalise on construction: adjacent equal
    values merge and zero-valued extreme cells are trimmed.
    """

    __slots__ = ("edges", "values")

    def __init__(self, edges, values, _canonical: bool = False):
        edges = np.asarray(edges, dtype=float)
        values = np.asarray(values, dtype=float)
        if values.size == 0:
            edges = np.array([], dtype=float)
        elif edges.size != values.size + 1:
            raise ValueError("need len(edges) == len(values) + 1")
        if values.size and not np.all(np.diff(edges) > 0):
            raise ValueError("edges must be strictly increasing")
        if not (np.all(np.isfinite(edges)) and np.all(np.isfinite(values))):
            raise ValueError("edges and values must be finite")
        if _canonical:
            self.edges = edges
            self.values = values
        else:
            self.edges, self.values = self._canonicalize(edges, values)

    @staticmethod
    def _canonicalize(edges, values):
        if values.size == 0:
            return np.array([], dtype=float), np.array([], dtype=float)
        keep = np.empty(values.size, dtype=bool)
        keep[0] = True
        keep[1:] = values[1:] != values[:-1]
        starts = np.flatnonzero(keep)
        merged_vals = values[starts]
        merged_edges = np.append(edges[starts], edges[-1])
        nz = np.flatnonzero(merged_vals)
        if nz.size == 0:
            return np.array([], dtype=float), np.array([], dtype=float)
        lo, hi = nz[0], nz[-1]
        return merged_edges[lo : hi + 2], merged_vals[lo : hi + 1]

    # -- constructors ------------------------------------------------------

    @classmethod
    def zero(cls) -> "StepFunction1D":
        return cls(np.array([], dtype=float), np.array([], dtype=float), _canonical=True)

    @classmethod
    def indicator(cls, a: float, b: float, value: float = 1.0) -> "StepFunction1D":
        if not b > a:
            raise ValueError("need a < b")
        return cls([a, b], [value])

    @classmethod
    def constant(cls, value: float, clip: float = CLIP) -> "StepFunction1D":
        """The constant ``value`` clipped to [-clip, clip]."""
        return cls([-clip, clip], [value])

    @classmethod
    def from_samples(cls, fn: Callable, edges) -> "StepFunction1D":
        """Sample ``fn`` at cell midpoints of ``edges``."""
        edges = np.asarray(edges, dtype=float)
        mids = 0.5 * (edges[:-1] + edges[1:])
        return cls(edges, np.asarray(fn(mids), dtype=float))

    # -- basic queries -----------------------------------------------------

    @property
    def dim(self) -> int:
        return 1

    @property
    def is_zero(self) -> bool:
        return self.values.size == 0

    def support_interval(self):
        """(lo, hi) hull of the support, or None for the zero function."""
        if self.is_zero:
            return None
        return float(self.edges[0]), float(self.edges[-1])

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        if self.is_zero:
            return np.zeros_like(x) if x.ndim else 0.0
        idx = np.searchsorted(self.edges, x, side="right") - 1
        inside = (idx >= 0) & (idx < self.values.size)
        out = np.where(inside, self.values[np.clip(idx, 0, self.values.size - 1)], 0.0)
        if out.ndim == 0:
            return float(out)
        return out

    # -- algebra -----------------------------------------------------------

    def _resample_values(self, edges: np.ndarray) -> np.ndarray:
        """Values of self on each cell of a refinement grid ``edges``."""
        if self.is_zero:
            return np.zeros(max(len(edges) - 1, 0), dtype=float)
        mids = 0.5 * (edges[:-1] + edges[1:])
        idx = np.searchsorted(self.edges, mids, side="right") - 1
        inside = (idx >= 0) & (idx < self.values.size)
        return np.where(inside, self.values[np.clip(idx, 0, self.values.size - 1)], 0.0)

    def _binary(self, other: "StepFunction1D", op) -> "StepFunction1D":
        edges = union_edges(self.edges, other.edges)
        if len(edges) < 2:
            return StepFunction1D.zero()
        vals = op(self._resample_values(edges), other._resample_values(edges))
        return StepFunction1D(edges, vals)

    def __add__(self, other):
        if isinstance(other, StepFunction1D):
            return self._binary(other, np.add)
        return NotImplemented

    def __sub__(self, other):
        if isinstance(other, StepFunction1D):
            return self._binary(other, np.subtract)
        return NotImplemented

    def __mul__(self, other):
        if isinstance(other, StepFunction1D):
            return self._binary(other, np.multiply)
        if np.isscalar(other):
            return self.scale(float(other))
        return NotImplemented

    __rmul__ = __mul__

    def __neg__(self):
        return self.scale(-1.0)

    def scale(self, c: float) -> "StepFunction1D":
        if c == 0.0 or self.is_zero:
            return StepFunction1D.zero()
        return StepFunction1D(self.edges, self.values * c)

    def abs(self) -> "StepFunction1D":
        if self.is_zero:
            return self
        return StepFunction1D(self.edges, np.abs(self.values))

    def restrict(self, a: float, b: float) -> "StepFunction1D":
        """Restriction to [a, b) as a new step function."""
        mask = StepFunction1D.indicator(a, b)
        return self * mask

    # -- integrals and norms ------------------------------------------------

    def cell_gauss_masses(self) -> np.ndarray:
        if self.is_zero:
            return np.array([], dtype=float)
        return np.atleast_1d(measure.interval_gauss_mass(self.edges[:-1], self.edges[1:]))

    def integral_gauss(self) -> float:
        if self.is_zero:
            return 0.0
        return float(self.values @ self.cell_gauss_masses())

    def integral_lebesgue(self) -> float:
        if self.is_zero:
            return 0.0
        return float(self.values @ np.diff(self.edges))

    def sup_norm(self) -> float:
        if self.is_zero:
            return 0.0
        return float(np.max(np.abs(self.values)))

    def norm_gauss(self, p: float) -> float:
        """L^p norm against the Gauss measure, p in (0, inf]."""
        if p == math.inf:
            return self.sup_norm()
        if self.is_zero:
            return 0.0
        masses = self.cell_gauss_masses()
        nz = (self.values != 0.0) & (masses > 0.0)
        if not np.any(nz):
            return 0.0
        log_terms = p * np.log(np.abs(self.values[nz])) + np.log(masses[nz])
        return float(math.exp(logsumexp(log_terms) / p))

    def norm_lebesgue_l1(self) -> float:
        if self.is_zero:
            return 0.0
        return float(np.abs(self.values) @ np.diff(self.edges))

    # -- serialization -------------------------------------------------------

    def to_spec(self) -> dict:
        return {
            "dim": 1,
            "kind": "step",
            "data": {"breakpoints": self.edges.tolist(), "values": self.values.tolist()},
        }

    def __repr__(self):
        return f"StepFunction1D({self.values.size} cells)"


class GridFunctionND:
    """Piecewise constant function on a tensor grid (canonical nD form).

    ``axes`` is a tuple of strictly increasing breakpoint arrays; ``values``
    has shape ``tuple(len(ax) - 1 for ax in axes)``.  Cells are half-open and
    the function vanishes outside the grid hull.
    """

    __slots__ = ("axes", "values")

    def __init__(self, axes: Sequence[np.ndarray], values: np.ndarray):
        self.axes = tuple(np.asarray(a, dtype=float) for a in axes)
        values = np.asarray(values, dtype=float)
        expect = tuple(len(a) - 1 for a in self.axes)
        if values.shape != expect:
            raise ValueError(f"values shape {values.shape} != grid shape {expect}")
        for a in self.axes:
            if len(a) < 2 or not np.all(np.diff(a) > 0):
                raise ValueError("each axis needs >= 2 strictly increasing edges")
        self.values = values

    @property
    def dim(self) -> int:
        return len(self.axes)

    @property
    def is_zero(self) -> bool:
        return not np.any(self.values)

    @classmethod
    def zeros(cls, axes) -> "GridFunctionND":
        shape = tuple(len(np.asarray(a)) - 1 for a in axes)
        return cls(axes, np.zeros(shape))

    def copy(self) -> "GridFunctionND":
        return GridFunctionND(self.axes, self.values.copy())

    def cell_centers(self):
        return tuple(0.5 * (a[:-1] + a[1:]) for a in self.axes)

    def evaluate_points(self, pts: np.ndarray) -> np.ndarray:
        pts = np.atleast_2d(np.asarray(pts, dtype=float))
        idxs = []
        inside = np.ones(len(pts), dtype=bool)
        for d, ax in enumerate(self.axes):
            i = np.searchsorted(ax, pts[:, d], side="right") - 1
            inside &= (i >= 0) & (i < len(ax) - 1)
            idxs.append(np.clip(i, 0, len(ax) - 2))
        out = self.values[tuple(idxs)]
        return np.where(inside, out, 0.0)

    def __call__(self, pts):
        return self.evaluate_points(pts)

    def _axis_gauss_masses(self):
        return [
            np.atleast_1d(measure.interval_gauss_mass(a[:-1], a[1:])) for a in self.axes
        ]

    def _axis_widths(self):
        return [np.diff(a) for a in self.axes]

    @staticmethod
    def _contract(values: np.ndarray, axis_weights) -> float:
        out = values
        for w in axis_weights:
            out = np.tensordot(out, w, axes=([0], [0]))
        return float(out)

    def integral_gauss(self) -> float:
        return self._contract(self.values, self._axis_gauss_masses())

    def integral_lebesgue(self) -> float:
        return self._contract(self.values, self._axis_widths())

    def sup_norm(self) -> float:
        return float(np.max(np.abs(self.values))) if self.values.size else 0.0

    def norm_gauss(self, p: float) -> float:
        if p == math.inf:
            return self.sup_norm()
        masses = self._axis_gauss_masses()
        log_mass = np.zeros(self.values.shape)
        for d, m in enumerate(masses):
            shape = [1] * self.values.ndim
            shape[d] = -1
            with np.errstate(divide="ignore"):
                log_mass = log_mass + np.log(m).reshape(shape)
        nz = (self.values != 0.0) & np.isfinite(log_mass)
        if not np.any(nz):
            return 0.0
        log_terms = p * np.log(np.abs(self.values[nz])) + log_mass[nz]
        return float(math.exp(logsumexp(log_terms) / p))

    def norm_lebesgue_l1(self) -> float:
        return self._contract(np.abs(self.values), self._axis_widths())

    def abs(self) -> "GridFunctionND":
        return GridFunctionND(self.axes, np.abs(self.values))

    def scale(self, c: float) -> "GridFunctionND":
        return GridFunctionND(self.axes, self.values * c)

    def _aligned(self, other: "GridFunctionND"):
        if len(self.axes) != len(other.axes):
            raise ValueError("dimension mismatch")
        axes = tuple(
            union_edges(a, b) for a, b in zip(self.axes, other.axes)
        )
        return axes, self.resample(axes), other.resample(axes)

    def resample(self, axes) -> np.ndarray:
        """Value tensor of self on a refinement grid (exact at cell centers)."""
        axes = tuple(np.asarray(a, dtype=float) for a in axes)
        idxs = []
        masks = []
        for d, ax in enumerate(axes):
            mids = 0.5 * (ax[:-1] + ax[1:])
            i = np.searchsorted(self.axes[d], mids, side="right") - 1
            ok = (i >= 0) & (i < len(self.axes[d]) - 1)
            idxs.append(np.clip(i, 0, len(self.axes[d]) - 2))
            masks.append(ok)
        mesh = np.ix_(*idxs)
        vals = self.values[mesh]
        mask = np.ones(vals.shape, dtype=bool)
        for d, ok in enumerate(masks):
            shape = [1] * vals.ndim
            shape[d] = -1
            mask &= ok.reshape(shape)
        return np.where(mask, vals, 0.0)

    def __add__(self, other):
        if isinstance(other, GridFunctionND):
            axes, a, b = self._aligned(other)
            return GridFunctionND(axes, a + b)
        return NotImplemented

    def __sub__(self, other):
        if isinstance(other, GridFunctionND):
            axes, a, b = self._aligned(other)
            return GridFunctionND(axes, a - b)
        return NotImplemented

    def __mul__(self, other):
        if isinstance(other, GridFunctionND):
            axes, a, b = self._aligned(other)
            return GridFunctionND(axes, a * b)
        if np.isscalar(other):
            return self.scale(float(other))
        return NotImplemented

    __rmul__ = __mul__

    def support_box(self):
        """Bounding box (lo, hi) of nonzero cells, or None."""
        nz = np.nonzero(self.values)
        if len(nz[0]) == 0:
            return None
        lo = np.array([self.axes[d][nz[d].min()] for d in range(self.dim)])
        hi = np.array([self.axes[d][nz[d].max() + 1] for d in range(self.dim)])
        return lo, hi

    def to_spec(self) -> dict:
        return {
            "dim": self.dim,
            "kind": "boxsum",
            "data": {"terms": _grid_to_terms(self)},
        }

    def __repr__(self):
        return f"GridFunctionND(dim={self.dim}, cells={self.values.shape})"


def _grid_to_terms(g: GridFunctionND):
    terms = []
    nz = np.nonzero(g.values)
    for idx in zip(*nz):
        lo = [float(g.axes[d][i]) for d, i in enumerate(idx)]
        hi = [float(g.axes[d][i + 1]) for d, i in enumerate(idx)]
        terms.append({"lo": lo, "hi": hi, "coeff": float(g.values[idx])})
    return terms


class BoxSumFunctionND:
    """Finite sum of weighted axis-aligned box indicators (half-open boxes)."""

    __slots__ = ("terms", "_dim", "_grid")

    def __init__(self, terms, dim: int | None = None):
        parsed = []
        for lo, hi, coeff in terms:
            lo = measure.as_point(lo)
            hi = measure.as_point(hi)
            if lo.size != hi.size:
                raise ValueError("box corners must share a dimension")
            if np.any(hi <= lo):
                raise ValueError("boxes must have positive volume")
            parsed.append((lo, hi, float(coeff)))
        if parsed:
            dims = {t[0].size for t in parsed}
            if len(dims) != 1:
                raise ValueError("all boxes must share a dimension")
            self._dim = dims.pop()
            if dim is not None and dim != self._dim:
                raise ValueError("explicit dim disagrees with boxes")
        else:
            if dim is None:
                raise ValueError("empty box sum needs an explicit dimension")
            self._dim = int(dim)
        self.terms = parsed
        self._grid = None

    @property
    def dim(self) -> int:
        return self._dim

    @property
    def is_zero(self) -> bool:
        return not self.terms or self.grid().is_zero

    def grid(self) -> GridFunctionND:
        """Canonical disjoint-cell form on the union grid of all box edges."""
        if self._grid is None:
            if not self.terms:
                eps = np.array([0.0, 1.0])
                self._grid = GridFunctionND.zeros([eps] * self._dim)
            else:
                axes = []
                for d in range(self._dim):
                    axes.append(
                        union_edges(
                            *[[t[0][d], t[1][d]] for t in self.terms]
                        )
                    )
                g = GridFunctionND.zeros(axes)
                for lo, hi, coeff in self.terms:
                    sl = tuple(
                        slice(
                            np.searchsorted(axes[d], lo[d]),
                            np.searchsorted(axes[d], hi[d]),
                        )
                        for d in range(self._dim)
                    )
                    g.values[sl] += coeff
                self._grid = g
        return self._grid

    def __call__(self, pts):
        return self.grid().evaluate_points(pts)

    def evaluate_points(self, pts):
        return self.grid().evaluate_points(pts)

    def integral_gauss(self) -> float:
        return self.grid().integral_gauss()

    def integral_lebesgue(self) -> float:
        return self.grid().integral_lebesgue()

    def sup_norm(self) -> float:
        return self.grid().sup_norm()

    def norm_gauss(self, p: float) -> float:
        return self.grid().norm_gauss(p)

    def norm_lebesgue_l1(self) -> float:
        return self.grid().norm_lebesgue_l1()

    def support_box(self):
        return self.grid().support_box()

    def scale(self, c: float) -> "BoxSumFunctionND":
        return BoxSumFunctionND([(lo, hi, c * w) for lo, hi, w in self.terms], dim=self._dim)

    def __add__(self, other):
        if isinstance(other, BoxSumFunctionND):
            if other.dim != self.dim:
                raise ValueError("dimension mismatch")
            return BoxSumFunctionND(self.terms + other.terms, dim=self._dim)
        return NotImplemented

    def __mul__(self, other):
        if np.isscalar(other):
            return self.scale(float(other))
        if isinstance(other, (BoxSumFunctionND, GridFunctionND)):
            g = other.grid() if isinstance(other, BoxSumFunctionND) else other
            return self.grid() * g
        return NotImplemented

    __rmul__ = __mul__

    def to_spec(self) -> dict:
        return {
            "dim": self._dim,
            "kind": "boxsum",
            "data": {
                "terms": [
                    {"lo": lo.tolist(), "hi": hi.tolist(), "coeff": w}
                    for lo, hi, w in self.terms
                ]
            },
        }

    def __repr__(self):
        return f"BoxSumFunctionND(dim={self._dim}, terms={len(self.terms)})"


@dataclass(frozen=True)
class SampledWeightProduct:
    """Product of a represented function with a smooth weight, materialised by
    midpoint sampling on a refinement grid.

    The sup-norm materialisation error is at most
    ``lipschitz * h * sup|base|`` with h the largest cell width intersecting
    the weight's ramps; the bound is recorded, not estimated.
    """

    base: StepFunction1D
    weight: Callable
    grid_edges: np.ndarray
    lipschitz: float

    def refinement(self) -> float:
        edges = np.asarray(self.grid_edges, dtype=float)
        return float(np.max(np.diff(edges))) if len(edges) > 1 else 0.0

    def error_bound(self) -> float:
        return self.lipschitz * self.refinement() * self.base.sup_norm()

    def materialize(self) -> StepFunction1D:
        edges = union_edges(self.grid_edges, self.base.edges)
        if len(edges) < 2:
            return StepFunction1D.zero()
        mids = 0.5 * (edges[:-1] + edges[1:])
        w = np.asarray(self.weight(mids), dtype=float)
        return StepFunction1D(edges, w * self.base._resample_values(edges))


# -- JSON function-spec schema ------------------------------------------------


def function_from_spec(spec: dict):
    """Build a represented function from the JSON function-spec schema.

    ``{"dim": n, "kind": "step" | "boxsum" | "named", "data": ...}``
    """
    try:
        kind = spec["kind"]
        dim = int(spec.get("dim", 1))
        data = spec.get("data", {})
    except (KeyError, TypeError, ValueError) as exc:
        raise ValueError(f"malformed function spec: {exc}") from exc
    if kind == "step":
        if dim != 1:
            raise ValueError("step functions are one-dimensional")
        return StepFunction1D(data["breakpoints"], data["values"])
    if kind == "boxsum":
        terms = [(t["lo"], t["hi"], t["coeff"]) for t in data["terms"]]
        return BoxSumFunctionND(terms, dim=dim)
    if kind == "named":
        from . import corpus

        return corpus.named_function(dim=dim, **data)
    raise ValueError(f"unknown function kind {kind!r}")


def function_to_spec(f) -> dict:
    to_spec = getattr(f, "to_spec", None)
    if to_spec is None:
        raise TypeError(f"cannot serialise {type(f).__name__}")
    return to_spec()
