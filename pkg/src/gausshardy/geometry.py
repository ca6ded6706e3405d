"""Admissible-ball geometry: coverings, partitions of unity, Whitney pieces.

A closed Euclidean ball B(c, r) is *admissible at scale s* when
``r <= s * min(1, 1/|c|)`` and *maximal admissible* when equality holds at
s = 1.  Everything here is deterministic construction plus auditing:

* ``covering_1d`` builds the interval family I_0 = (-1, 1),
  I_j = (sqrt(j-1), sqrt(j+1)) with mirrored negatives, together with a
  piecewise-cubic partition of unity whose transition ramps sit inside the
  pairwise overlaps.  For |j| >= 2 the ramps fit strictly between consecutive
  half-intervals, so eta_j = 1 on (1/2) I_j exactly; the three central
  intervals overlap too much for that (their half-intervals intersect), so
  there the attained plateau is recorded instead.

* ``covering_nd`` covers a box with maximal admissible balls placed on
  concentric rings/shells, spacing ~1.12 local radii.  Its partition of unity
  uses masked normalised bumps: every ball's weight is forced to vanish on the
  half-balls of its neighbours, which yields eta_j = 1 on (1/2) B_j exactly
  while ramps stay wide (gradient ~ 25 / r_j).  Half-ball disjointness,
  coverage and the overlap count of {4 B_j} are audited on construction.

* ``whitney_1d`` partitions an open set into closed intervals whose
  diameter-to-boundary-distance ratio equals delta exactly, by a geometric
  cascade from each component's midpoint towards its endpoints; the cascade is
  truncated at ``min_len`` with boundary stubs exempt from the ratio contract.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .measure import as_point


@dataclass(frozen=True)
class Ball:
    """Closed Euclidean ball given by center coordinates and radius."""

    center: tuple
    radius: float

    def __post_init__(self):
        c = as_point(self.center)
        object.__setattr__(self, "center", tuple(float(x) for x in c))
        if not (self.radius > 0 and math.isfinite(self.radius)):
            raise ValueError(f"ball radius must be positive, got {self.radius}")

    @property
    def dim(self) -> int:
        return len(self.center)

    @property
    def center_array(self) -> np.ndarray:
        return np.asarray(self.center, dtype=float)

    @property
    def center_norm(self) -> float:
        return float(np.linalg.norm(self.center_array))

    def dilate(self, rho: float) -> "Ball":
        return Ball(self.center, rho * self.radius)

    def contains_points(self, pts) -> np.ndarray:
        pts = np.atleast_2d(np.asarray(pts, dtype=float))
        d = np.linalg.norm(pts - self.center_array, axis=1)
        return d <= self.radius * (1 + 1e-12)

    def interval(self):
        if self.dim != 1:
            raise ValueError("interval() only makes sense in dimension 1")
        c = self.center[0]
        return c - self.radius, c + self.radius

    def bounding_box(self):
        c = self.center_array
        return c - self.radius, c + self.radius

    @classmethod
    def from_interval(cls, a: float, b: float) -> "Ball":
        return cls((0.5 * (a + b),), 0.5 * (b - a))


def admissible_radius(center_norm: float, scale: float = 1.0) -> float:
    return scale * min(1.0, 1.0 / center_norm) if center_norm > 0 else scale


def is_admissible(ball: Ball, scale: float = 1.0, tol: float = 1e-12) -> bool:
    """r_B <= scale * min(1, 1/|c_B|), with a relative float tolerance."""
    return ball.radius <= admissible_radius(ball.center_norm, scale) * (1 + tol)


def admissibility_scale(ball: Ball) -> float:
    """Smallest s for which the ball is admissible at scale s."""
    return ball.radius / admissible_radius(ball.center_norm, 1.0)


def maximal_admissible_ball(center) -> Ball:
    c = as_point(center)
    return Ball(tuple(c), admissible_radius(float(np.linalg.norm(c))))


def support_bound(ball: Ball) -> Ball:
    """Enclosure B(c_B, 4 min(1, 1/|c_B|)) outside which the local grand
    maximal function of anything supported in an admissible ball vanishes."""
    if not is_admissible(ball, 1.0):
        raise ValueError(
            f"support enclosure requires a ball admissible at scale 1; got radius "
            f"{ball.radius} at |c| = {ball.center_norm}"
        )
    return Ball(ball.center, 4.0 * admissible_radius(ball.center_norm))


# ---------------------------------------------------------------------------
# coverings


@dataclass
class AdmissibleCovering:
    """A covering by admissible balls with its audited geometry constants."""

    balls: list
    dimension: int
    scale: float = 1.0
    overlap_bound: int = 0
    half_separation_exceptions: list = field(default_factory=list)
    maximality_range: tuple = (1.0, 1.0)

    def __len__(self):
        return len(self.balls)

    def covers_points(self, pts, reach: float = 1.0) -> np.ndarray:
        pts = np.atleast_2d(np.asarray(pts, dtype=float))
        covered = np.zeros(len(pts), dtype=bool)
        for b in self.balls:
            d = np.linalg.norm(pts - b.center_array, axis=1)
            covered |= d <= reach * b.radius * (1 + 1e-12)
        return covered


def _smoothstep(u):
    u = np.clip(u, 0.0, 1.0)
    return u * u * (3.0 - 2.0 * u)


@dataclass(frozen=True)
class _Seam:
    lo: float
    hi: float

    def rise(self, x):
        return _smoothstep((np.asarray(x, dtype=float) - self.lo) / (self.hi - self.lo))


class PartitionOfUnity1D:
    """Partition of unity subordinate to the 1-d interval covering.

    eta_j climbs across the seam on its left and descends across the seam on
    its right; ramps of distinct seams are disjoint, so the weights sum to one
    by telescoping wherever the covering is complete.
    """

    def __init__(self, balls: Sequence[Ball], seams: Sequence[_Seam]):
        if len(seams) != len(balls) + 1:
            raise ValueError("need one seam per interval boundary (plus ends)")
        self.balls = list(balls)
        self.seams = list(seams)
        self.gradient_constant = max(
            b.radius * 1.5 / min(s0.hi - s0.lo, s1.hi - s1.lo)
            for b, s0, s1 in zip(self.balls, self.seams[:-1], self.seams[1:])
        )

    def __len__(self):
        return len(self.balls)

    def weight(self, j: int, x):
        left, right = self.seams[j], self.seams[j + 1]
        return left.rise(x) * (1.0 - right.rise(x))

    def plateau(self, j: int):
        """Interval where eta_j == 1 exactly."""
        return self.seams[j].hi, self.seams[j + 1].lo

    def ramp_edges(self) -> np.ndarray:
        out = []
        for s in self.seams:
            out.extend((s.lo, s.hi))
        return np.asarray(out)

    def support(self, j: int):
        return self.seams[j].lo, self.seams[j + 1].hi

    def sum_at(self, x):
        x = np.asarray(x, dtype=float)
        total = np.zeros_like(x)
        for j in range(len(self.balls)):
            total = total + self.weight(j, x)
        return total

    def lipschitz(self, j: int) -> float:
        left, right = self.seams[j], self.seams[j + 1]
        return 1.5 / min(left.hi - left.lo, right.hi - right.lo)

    def materialize(self, edges: np.ndarray):
        """Step-function weights sampled at cell midpoints of a shared grid.

        Sampling every weight on the same grid keeps the pointwise identity
        sum_j eta_j = 1 intact for the sampled family (up to one rounding).
        """
        from .func_repr import StepFunction1D

        edges = np.asarray(edges, dtype=float)
        mids = 0.5 * (edges[:-1] + edges[1:])
        out = []
        for j in range(len(self.balls)):
            lo, hi = self.support(j)
            i0 = np.searchsorted(edges, lo, side="left")
            i1 = np.searchsorted(edges, hi, side="right")
            i0 = max(i0 - 1, 0)
            i1 = min(i1 + 1, len(edges) - 1)
            if i1 - i0 < 1:
                out.append(StepFunction1D.zero())
                continue
            vals = np.zeros(len(mids))
            vals[i0:i1] = self.weight(j, mids[i0:i1])
            out.append(StepFunction1D(edges, vals))
        return out


def _interval_1d(j: int):
    """I_0 = (-1, 1); I_j = (sqrt(j-1), sqrt(j+1)); I_{-j} mirrored."""
    if j == 0:
        return -1.0, 1.0
    k = abs(j)
    lo, hi = math.sqrt(k - 1), math.sqrt(k + 1)
    if j < 0:
        return -hi, -lo
    return lo, hi


def _seam_gap(j: int):
    """Feasible ramp window between half-intervals of I_j and I_{j+1}, j >= 1:
    [upper edge of (1/2) I_j, lower edge of (1/2) I_{j+1}]."""
    u = (math.sqrt(j - 1) + 3.0 * math.sqrt(j + 1)) / 4.0
    lo_next = (3.0 * math.sqrt(j) + math.sqrt(j + 2)) / 4.0
    return u, lo_next


# ramp for the central seam I_0 | I_1: the half-intervals of I_0 and I_1
# intersect, so a ramp preserving both half-plateaus does not exist.  This
# window keeps the full plateau on (1/2) I_0 and records a reduced one on I_1.
_CENTRAL_SEAM = (0.50, 0.56)


def covering_1d(extent: float):
    """Interval covering of [-extent, extent] plus its partition of unity.

    Returns ``(AdmissibleCovering, PartitionOfUnity1D)``.  Interval index j
    runs symmetrically; the number of positive indices is ceil(extent^2), so
    the union reaches past the requested extent.
    """
    if extent <= 0:
        raise ValueError("extent must be positive")
    J = max(1, int(math.ceil(extent * extent - 1e-12)))
    index_range = range(-J, J + 1)
    balls = [Ball.from_interval(*_interval_1d(j)) for j in index_range]

    seams = {}
    for j in range(0, J + 1):  # seam between I_j and I_{j+1} (virtual at j=J)
        if j == 0:
            a, b = _CENTRAL_SEAM
        else:
            a, b = _seam_gap(j)
        seams[j] = _Seam(a, b)
        seams[-j - 1] = _Seam(-b, -a)
    seam_list = [seams[j] for j in range(-J - 1, J + 1)]

    maximality = [
        b.radius / admissible_radius(b.center_norm) for b in balls
    ]
    covering = AdmissibleCovering(
        balls=balls,
        dimension=1,
        scale=1.0,
        overlap_bound=2,
        half_separation_exceptions=[(-1, 0), (0, 1)],
        maximality_range=(min(maximality), max(maximality)),
    )
    pou = PartitionOfUnity1D(balls, seam_list)
    return covering, pou


# -- nD covering -------------------------------------------------------------

_SPACING = 1.12  # same-shell center spacing in units of the local radius


def _shell_gap(dim: int) -> float:
    """Shell gap in units of the mean of adjacent shell radii; 3-d packs
    tighter (its separation contract is half-ball disjointness only)."""
    return 1.08 if dim <= 2 else 1.02
_PSI_INNER = 0.70  # bump equals 1 inside _PSI_INNER * B
_MASK_INNER = 0.50  # mask forces neighbours to 0 on the half-ball


def _mask_outer(dim: int) -> float:
    """Mask support fraction (mask ramps live on [1/2, _mask_outer] B)."""
    return 0.525 if dim <= 2 else 0.51


def _sep_required(dim: int, r_i: float, r_j: float) -> float:
    """Pairwise center separation contract.  In 1-2 dimensions the mask
    supports themselves stay disjoint; in 3 dimensions only the half-balls
    must be disjoint (the product-form masks tolerate overlapping ramps),
    which leaves room between the coverage and separation constraints."""
    if dim <= 2:
        return _mask_outer(dim) * (r_i + r_j)
    return 0.5 * (r_i + r_j) * (1.0 + 1e-6)


def _psi_outer(dim: int) -> float:
    """Bump support fraction: the sub-1 margin keeps midpoint-sampled weights
    strictly inside B at moderate grid pitch; 3-d needs the wider support to
    leave room between the separation and coverage constraints."""
    return 0.92 if dim <= 2 else 0.99


def _coverage_audit(dim: int) -> float:
    return 0.88 if dim <= 2 else 0.955


class ConstructionError(RuntimeError):
    """A covering audit failed (uncovered point, overlap cap, separation)."""


def _ring_radii(extent: float, dim: int = 2):
    gap = _shell_gap(dim)
    radii = []
    rho = gap * 1.0  # first shell outside the central unit ball
    while rho <= extent + 1e-9:
        radii.append(rho)
        # gap sized by the mean of adjacent shell radii (fixed point)
        nxt = rho + gap * admissible_radius(rho)
        for _ in range(3):
            nxt = rho + gap * 0.5 * (
                admissible_radius(rho) + admissible_radius(nxt)
            )
        rho = nxt
    radii.append(rho)  # one shell beyond, so coverage reaches the box corner
    return radii


def _centers_nd(extent: float, n: int) -> np.ndarray:
    reach = math.sqrt(n) * extent  # cover the whole box [-extent, extent]^n
    pts = [np.zeros(n)]
    if n == 1:
        for rho in _ring_radii(reach, 1):
            pts.append(np.array([rho]))
            pts.append(np.array([-rho]))
    elif n == 2:
        for i, rho in enumerate(_ring_radii(reach, 2)):
            r = admissible_radius(rho)
            k = max(4, int(math.floor(2.0 * math.pi * rho / (_SPACING * r))))
            phase = 0.5 * (i % 2) * (2.0 * math.pi / k)
            ang = phase + 2.0 * math.pi * np.arange(k) / k
            pts.extend(np.column_stack([rho * np.cos(ang), rho * np.sin(ang)]))
    elif n == 3:
        golden = math.pi * (3.0 - math.sqrt(5.0))
        spacing = 1.25  # Fibonacci nearest-neighbour variance needs headroom
        for rho in _ring_radii(reach, 3):
            r = admissible_radius(rho)
            k = max(6, int(math.ceil(4.0 * math.pi * rho * rho / (0.866 * (spacing * r) ** 2))))
            i = np.arange(k)
            z = 1.0 - 2.0 * (i + 0.5) / k
            theta = golden * i
            s = np.sqrt(1.0 - z * z)
            pts.extend(
                rho * np.column_stack([s * np.cos(theta), s * np.sin(theta), z])
            )
    else:
        raise ValueError("covering_nd supports dimensions 1..3")
    return np.asarray(pts)



def _audit_grid(extent: float, n: int) -> np.ndarray:
    """Shared audit/repair grid over the box [-extent, extent]^n."""
    r_min = admissible_radius(math.sqrt(n) * extent)
    pitch = max(r_min / 3.0, 2.0 * extent / 160.0)
    axes = [np.arange(-extent, extent + pitch / 2, pitch)] * n
    mesh = np.meshgrid(*axes, indexing="ij")
    return np.column_stack([m.ravel() for m in mesh])


def _repair_coverage(centers: np.ndarray, extent: float, n: int) -> np.ndarray:
    """Fill coverage holes greedily with new maximal admissible balls that
    respect the pairwise separation contract.  Blocked pockets get a second,
    finer candidate search."""
    from scipy.spatial import cKDTree

    centers = list(centers)
    radii = [admissible_radius(float(np.linalg.norm(c))) for c in centers]
    pts = _audit_grid(extent, n)
    audit = _coverage_audit(n)

    def try_place(p, tree, n_tree, steps):
        r_here = admissible_radius(float(np.linalg.norm(p)))
        offs = np.linspace(-0.65, 0.65, steps) * r_here
        local = p + np.column_stack(
            [m.ravel() for m in np.meshgrid(*([offs] * n), indexing="ij")]
        )
        near_global = list(tree.query_ball_point(p, 3.0)) + list(
            range(n_tree, len(centers))
        )
        r_c = np.asarray(
            [admissible_radius(float(np.linalg.norm(c))) for c in local]
        )
        covers = np.linalg.norm(local - p, axis=1) <= 0.92 * audit * r_c
        if near_global:
            near_c = np.asarray([centers[j] for j in near_global])
            near_r = np.asarray([radii[j] for j in near_global])
            dists = np.linalg.norm(local[:, None, :] - near_c[None, :, :], axis=2)
            req = np.asarray(
                [[_sep_required(n, rc, rj) for rj in near_r] for rc in r_c]
            )
            margins = (dists - req).min(axis=1)
        else:
            margins = np.ones(len(local))
        margins[~covers] = -1.0
        best = int(np.argmax(margins))
        if margins[best] > 1e-9:
            centers.append(np.asarray(local[best], dtype=float))
            radii.append(float(r_c[best]))
            return True
        return False

    for _ in range(60):
        tree = cKDTree(np.asarray(centers))
        k = min(len(centers), 16)
        dists, idxs = tree.query(pts, k=k)
        if k == 1:
            dists, idxs = dists[:, None], idxs[:, None]
        ratio = (dists / np.asarray(radii)[idxs]).min(axis=1)
        order = np.argsort(-ratio)
        bad = order[ratio[order] > audit - 0.005]
        if len(bad) == 0:
            break
        n_tree = len(centers)
        added = 0
        for idx in bad[:150]:
            if try_place(pts[idx], tree, n_tree, 7):
                added += 1
            elif try_place(pts[idx], tree, n_tree, 17):
                added += 1
        if added == 0:
            break
    return np.asarray(centers)


def _filter_separation(centers: np.ndarray) -> np.ndarray:
    """Greedily drop centers violating the pairwise separation contract
    (irregular shell layouts can place isolated close pairs)."""
    from scipy.spatial import cKDTree

    radii = np.asarray(
        [admissible_radius(float(np.linalg.norm(c))) for c in centers]
    )
    dim = centers.shape[1]
    tree = cKDTree(centers)
    dropped = np.zeros(len(centers), dtype=bool)
    for i, j in sorted(tree.query_pairs(2.2)):
        if dropped[i] or dropped[j]:
            continue
        d = float(np.linalg.norm(centers[i] - centers[j]))
        if d < _sep_required(dim, radii[i], radii[j]) * (1 + 1e-9):
            dropped[max(i, j)] = True
    return centers[~dropped]


def covering_nd(extent: float, n: int, overlap_cap: int | None = None):
    """Covering of the box [-extent, extent]^n by maximal admissible balls,
    with a partition of unity whose plateaus are exactly the half-balls.

    Raises ``ConstructionError`` when the audit finds an uncovered point,
    a half-ball separation failure, or an overlap count of {4 B_j} beyond
    ``overlap_cap``.
    """
    if n < 1 or n > 3:
        raise ValueError("covering_nd supports n in {1, 2, 3}")
    if extent <= 0:
        raise ValueError("extent must be positive")
    if overlap_cap is None:
        overlap_cap = 80 if n <= 2 else 420
    centers = _filter_separation(_centers_nd(extent, n))
    centers = _repair_coverage(centers, extent, n)
    balls = [maximal_admissible_ball(c) for c in centers]
    covering = _audit_nd(balls, extent, n, overlap_cap)
    pou = PartitionOfUnityND(balls)
    return covering, pou


def _audit_nd(balls, extent, n, overlap_cap) -> AdmissibleCovering:
    from scipy.spatial import cKDTree

    centers = np.asarray([b.center_array for b in balls])
    radii = np.asarray([b.radius for b in balls])
    tree = cKDTree(centers)

    # pairwise separation (implies half-ball disjointness)
    for i, j in tree.query_pairs(2.2):
        d = float(np.linalg.norm(centers[i] - centers[j]))
        req = _sep_required(n, radii[i], radii[j])
        if d < req:
            raise ConstructionError(
                f"separation violated between balls {i} and {j}: "
                f"distance {d:.4f} < {req:.4f}"
            )

    # coverage of the box, with margin inside the bump support
    pts = _audit_grid(extent, n)
    k = min(len(balls), 16)
    dists, idxs = tree.query(pts, k=k)
    if k == 1:
        dists, idxs = dists[:, None], idxs[:, None]
    ratio = dists / radii[idxs]
    best = ratio.min(axis=1)
    worst = float(best.max())
    if worst > _coverage_audit(n):
        bad = pts[int(np.argmax(best))]
        raise ConstructionError(
            f"coverage audit failed: point {bad} only reached at {worst:.3f} "
            "of the nearest ball radius"
        )

    # overlap count of {4 B_j} on the audit grid
    counts = np.zeros(len(pts), dtype=np.int32)
    for c, r in zip(centers, radii):
        d = np.linalg.norm(pts - c, axis=1)
        counts += d <= 4.0 * r
    overlap = int(counts.max())
    if overlap > overlap_cap:
        raise ConstructionError(
            f"overlap count {overlap} of 4-dilated balls exceeds cap {overlap_cap}"
        )

    return AdmissibleCovering(
        balls=list(balls),
        dimension=n,
        scale=1.0,
        overlap_bound=overlap,
        half_separation_exceptions=[],
        maximality_range=(1.0, 1.0),
    )


class PartitionOfUnityND:
    """Masked-normalised partition of unity subordinate to an nD covering.

    Each ball carries a radial bump psi_j (1 inside 0.75 B_j, 0 outside
    0.99 B_j) and a mask bump P_j (1 inside 0.5 B_j, 0 outside 0.525 B_j).
    Mask supports are pairwise disjoint by the covering's separation audit, so

        eta_j = psi_j (1 - sum_{i != j} P_i) / sum_k psi_k (1 - sum_{i != k} P_i)

    equals one bit-exactly on the half-ball of B_j and vanishes outside B_j.
    """

    def __init__(self, balls: Sequence[Ball]):
        self.balls = list(balls)
        self._centers = np.asarray([b.center_array for b in balls])
        self._radii = np.asarray([b.radius for b in balls])
        dim = self.balls[0].dim if self.balls else 2
        self.psi_outer = _psi_outer(dim)
        self.mask_outer = _mask_outer(dim)

    def __len__(self):
        return len(self.balls)

    def plateau_fraction(self, j: int) -> float:
        return _MASK_INNER

    def _psi(self, dist_over_r):
        return _smoothstep((self.psi_outer - dist_over_r) / (self.psi_outer - _PSI_INNER))

    def _mask_bump(self, dist_over_r):
        mo = self.mask_outer
        return _smoothstep((mo - dist_over_r) / (mo - _MASK_INNER))

    def _components(self, pts: np.ndarray):
        """psi matrix rows only for balls near the points (dense, small use)."""
        pts = np.atleast_2d(pts)
        d = np.linalg.norm(pts[None, :, :] - self._centers[:, None, :], axis=2)
        u = d / self._radii[:, None]
        psi = self._psi(u)
        mask_bump = self._mask_bump(u)
        return psi, mask_bump

    @staticmethod
    def _mask_products(pb):
        """For mask values pb (balls x points): the per-ball exclusive products
        m_k = prod_{i != k} (1 - P_i), written with saturation counting so a
        saturated mask (P_i == 1, i.e. the point lies in a half-ball) zeroes
        every other ball exactly.  Half-balls are disjoint, so at most one
        mask saturates per point."""
        sat = pb >= 1.0
        z = sat.sum(axis=0)
        one_minus = np.where(sat, 1.0, 1.0 - pb)
        prod_rest = np.prod(one_minus, axis=0)  # product over non-saturated
        m = np.empty_like(pb)
        # default (no saturation anywhere): m_k = prod_rest / (1 - P_k)
        safe = np.where(sat, 1.0, np.maximum(one_minus, 1e-300))
        m[:] = prod_rest[None, :] / safe
        m[:, z >= 1] = 0.0
        if np.any(z >= 1):
            cols = np.flatnonzero(z >= 1)
            owner = sat[:, cols].argmax(axis=0)
            m[owner, cols] = prod_rest[cols]
        return m

    def weight(self, j: int, pts) -> np.ndarray:
        """eta_j at the given points (dense evaluation, for tests/small use)."""
        pts = np.atleast_2d(np.asarray(pts, dtype=float))
        psi, pb = self._components(pts)
        m = self._mask_products(pb)
        weights = psi * m
        denom = weights.sum(axis=0)
        out = np.zeros(len(pts))
        pos = denom > 0
        out[pos] = weights[j, pos] / denom[pos]
        return out

    def sum_at(self, pts) -> np.ndarray:
        pts = np.atleast_2d(np.asarray(pts, dtype=float))
        psi, pb = self._components(pts)
        weights = psi * self._mask_products(pb)
        denom = weights.sum(axis=0)
        out = np.zeros(len(pts))
        pos = denom > 0
        out[pos] = (weights[:, pos] / denom[pos]).sum(axis=0)
        return out

    def weight_fn(self, j: int) -> Callable:
        return lambda pts: self.weight(j, pts)

    def lipschitz(self, j: int) -> float:
        # bump slope 1.5/(0.24 r), mask slope 1.5/(0.025 r), denominator >= ~0.3;
        # a conservative recorded envelope used for materialisation bounds
        return 25.0 / self.balls[j].radius

    def materialize(self, axes: Sequence[np.ndarray]):
        """Sample all weights at the cell centers of a shared tensor grid.

        Returns ``(index_boxes, grids)`` where for each ball j,
        ``index_boxes[j]`` is the per-axis slice of the shared grid covering
        supp eta_j, and ``grids[j]`` the sampled values on that sub-grid (a
        GridFunctionND).  Sampling everything on one grid preserves
        sum_j eta_j = 1 at every cell center exactly.
        """
        from .func_repr import GridFunctionND

        axes = [np.asarray(a, dtype=float) for a in axes]
        centers = [0.5 * (a[:-1] + a[1:]) for a in axes]
        shape = tuple(len(c) for c in centers)
        # pass 1: mask-product accumulators over the whole grid
        m_rest = np.ones(shape)  # prod over non-saturated masks of (1 - P_i)
        sat_count = np.zeros(shape, dtype=np.int8)
        owner = np.full(shape, -1, dtype=np.int32)
        locals_: list = []
        for j, b in enumerate(self.balls):
            c = b.center_array
            r = b.radius
            sl = []
            ok = True
            for d in range(len(axes)):
                i0 = np.searchsorted(centers[d], c[d] - r)
                i1 = np.searchsorted(centers[d], c[d] + r)
                if i1 <= i0:
                    ok = False
                    break
                sl.append(slice(i0, i1))
            if not ok:
                locals_.append(None)
                continue
            sl = tuple(sl)
            local_centers = np.meshgrid(
                *[centers[d][sl[d]] for d in range(len(axes))], indexing="ij"
            )
            dist = np.sqrt(
                sum((m - c[d]) ** 2 for d, m in enumerate(local_centers))
            )
            u = dist / r
            psi = self._psi(u)
            pb = self._mask_bump(u)
            sat = pb >= 1.0
            m_rest[sl] *= np.where(sat, 1.0, 1.0 - pb)
            sat_count[sl] += sat
            ow = owner[sl]
            ow[sat] = j
            locals_.append((sl, psi, pb))

        # pass 2: per-ball weights psi_j m_j and the shared denominator
        denom = np.zeros(shape)
        weights = []
        for j, loc in enumerate(locals_):
            if loc is None:
                weights.append(None)
                continue
            sl, psi, pb = loc
            z = sat_count[sl]
            sat = pb >= 1.0
            m = np.where(
                z == 0,
                m_rest[sl] / np.where(sat, 1.0, np.maximum(1.0 - pb, 1e-300)),
                np.where(sat, m_rest[sl], 0.0),
            )
            w = psi * m
            denom[sl] += w
            weights.append(w)

        index_boxes = []
        grids = []
        for j, loc in enumerate(locals_):
            if loc is None:
                index_boxes.append(None)
                grids.append(None)
                continue
            sl, _, _ = loc
            w = weights[j]
            dl = denom[sl]
            vals = np.zeros_like(w)
            pos = dl > 0
            vals[pos] = w[pos] / dl[pos]
            sub_axes = [axes[d][sl[d].start : sl[d].stop + 1] for d in range(len(axes))]
            index_boxes.append(sl)
            grids.append(GridFunctionND(sub_axes, vals))
        return index_boxes, grids


# ---------------------------------------------------------------------------
# Whitney decomposition (1D)


@dataclass(frozen=True)
class WhitneyPiece:
    lo: float
    hi: float
    is_stub: bool = False

    @property
    def diam(self) -> float:
        return self.hi - self.lo


def whitney_1d(open_set, delta: float = 0.125, min_len: float | None = None):
    """Whitney partition of a finite union of open intervals.

    Every non-stub piece Q satisfies diam(Q) / dist(Q, complement) == delta
    exactly (by construction; delta <= 1/8 keeps doubled pieces inside the
    set).  The geometric cascade toward each boundary is truncated at
    ``min_len``; the <= 2 leftover boundary stubs per component are returned
    flagged and exempt from the ratio contract, keeping the output finite
    while still partitioning the set.
    """
    if not (0 < delta <= 0.125):
        raise ValueError("delta must lie in (0, 1/8]")
    intervals = sorted((float(a), float(b)) for a, b in open_set)
    for (a1, b1), (a2, b2) in zip(intervals[:-1], intervals[1:]):
        if b1 > a2:
            raise ValueError("open set components must be disjoint")
    pieces: list[WhitneyPiece] = []
    for a, b in intervals:
        if not b > a:
            continue
        length = b - a
        floor = min_len if min_len is not None else 1e-6 * length
        floor = min(floor, 0.25 * length)
        mid = 0.5 * (a + b)
        # left cascade: [x - l, x] with l = delta * dist / (1 + delta)
        left: list[WhitneyPiece] = []
        x = mid
        while x - a > floor:
            ell = delta * (x - a) / (1.0 + delta)
            if x - ell - a <= floor or ell <= 0:
                break
            left.append(WhitneyPiece(x - ell, x))
            x = x - ell
        if x > a:
            left.append(WhitneyPiece(a, x, is_stub=True))
        right: list[WhitneyPiece] = []
        x = mid
        while b - x > floor:
            ell = delta * (b - x) / (1.0 + delta)
            if b - x - ell <= floor or ell <= 0:
                break
            right.append(WhitneyPiece(x, x + ell))
            x = x + ell
        if x < b:
            right.append(WhitneyPiece(x, b, is_stub=True))
        pieces.extend(reversed(left))
        pieces.extend(right)
    return pieces


def whitney_ratio(piece: WhitneyPiece, open_set) -> float:
    """diam / dist-to-complement for a piece of the given open set."""
    dist = math.inf
    for a, b in open_set:
        if piece.lo >= a - 1e-15 and piece.hi <= b + 1e-15:
            dist = min(piece.lo - a, b - piece.hi)
            break
    if dist <= 0:
        return math.inf
    return piece.diam / dist
