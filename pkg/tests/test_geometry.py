import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from gausshardy import geometry
from gausshardy.geometry import (
    Ball,
    ConstructionError,
    WhitneyPiece,
    covering_1d,
    covering_nd,
    is_admissible,
    maximal_admissible_ball,
    support_bound,
    whitney_1d,
    whitney_ratio,
)


def test_is_admissible_basic_cases():
    assert is_admissible(Ball((0.0,), 1.0), 1.0)
    assert is_admissible(Ball((2.0,), 0.5), 1.0)  # 0.5 <= 1/2
    assert not is_admissible(Ball((3.0,), 0.5), 1.0)  # 0.5 > 1/3


def test_maximal_admissible_radius():
    assert maximal_admissible_ball([0.0]).radius == 1.0
    assert maximal_admissible_ball([2.0]).radius == pytest.approx(0.5)
    assert maximal_admissible_ball([0.5]).radius == 1.0
    assert maximal_admissible_ball([0.0, 2.0]).radius == pytest.approx(0.5)


@settings(max_examples=80, deadline=None)
@given(
    c=st.floats(min_value=0.0, max_value=8.0),
    r=st.floats(min_value=1e-3, max_value=1.0),
    shrink=st.floats(min_value=0.1, max_value=1.0),
    shift=st.floats(min_value=-1.0, max_value=1.0),
    s=st.sampled_from([0.5, 1.0, 2.0]),
)
def test_subball_of_admissible_is_admissible(c, r, shrink, shift, s):
    outer = Ball((c, 0.0), r)
    r_in = shrink * r
    off = shift * (r - r_in)
    inner = Ball((c + off, 0.0), r_in)
    if is_admissible(outer, s):
        assert is_admissible(inner, s, tol=1e-9)


def test_support_bound_values():
    b = support_bound(Ball((2.0,), 0.3))
    assert b.radius == pytest.approx(2.0)
    assert b.center == (2.0,)
    assert support_bound(Ball((0.0,), 1.0)).radius == pytest.approx(4.0)


def test_support_bound_rejects_inadmissible():
    with pytest.raises(ValueError):
        support_bound(Ball((3.0,), 0.5))


# -- 1D covering -------------------------------------------------------------


def test_covering_1d_interval_family():
    cov, pou = covering_1d(3.0)
    # I_1 = (0, sqrt(2))
    by_center = {b.center[0]: b for b in cov.balls}
    i1 = [b for b in cov.balls if abs(b.center[0] - math.sqrt(2) / 2) < 1e-12]
    assert len(i1) == 1
    lo, hi = i1[0].interval()
    assert lo == pytest.approx(0.0, abs=1e-15)
    assert hi == pytest.approx(math.sqrt(2.0), rel=1e-15)
    assert 0.0 in by_center  # I_0 present
    assert by_center[0.0].radius == 1.0


def test_covering_1d_every_point_in_at_most_two_intervals():
    cov, _ = covering_1d(5.0)
    xs = np.linspace(-5, 5, 5001)
    counts = np.zeros(len(xs), dtype=int)
    for b in cov.balls:
        lo, hi = b.interval()
        counts += (xs > lo) & (xs < hi)
    assert counts.max() <= 2
    assert counts.min() >= 1  # covered


def test_covering_1d_interval_size_times_center_bounded():
    J = 400
    sizes = []
    for j in range(1, J + 1):
        lo, hi = math.sqrt(j - 1), math.sqrt(j + 1)
        c = 0.5 * (lo + hi)
        sizes.append((hi - lo) * (1 + c))
    # |I_j| (1 + |c_j|) stays within fixed bounds across j <= 400
    assert 0.9 < min(sizes) and max(sizes) < 2.5


def test_partition_of_unity_1d_sums_to_one_and_plateaus():
    cov, pou = covering_1d(4.0)
    xs = np.linspace(-3.9, 3.9, 4001)
    total = pou.sum_at(xs)
    assert np.max(np.abs(total - 1.0)) < 1e-12
    # plateau on half-intervals away from the center
    for j, b in enumerate(pou.balls):
        c = b.center[0]
        if abs(c) < 1.2:  # central exceptions recorded separately
            continue
        lo, hi = c - b.radius / 2, c + b.radius / 2
        p_lo, p_hi = pou.plateau(j)
        assert p_lo <= lo + 1e-12 and hi - 1e-12 <= p_hi
        sample = np.linspace(lo, hi, 25)
        assert np.all(pou.weight(j, sample) == 1.0)


def test_partition_weights_supported_in_intervals():
    cov, pou = covering_1d(3.0)
    for j, b in enumerate(pou.balls):
        lo, hi = b.interval()
        slo, shi = pou.support(j)
        assert slo >= lo - 1e-12
        assert shi <= hi + 1e-12


def test_partition_gradient_bound_finite_differences():
    cov, pou = covering_1d(3.0)
    C = pou.gradient_constant
    h = 1e-7
    for j, b in enumerate(pou.balls):
        slo, shi = pou.support(j)
        xs = np.linspace(slo - 0.01, shi + 0.01, 2000)
        fd = np.abs(pou.weight(j, xs + h) - pou.weight(j, xs - h)) / (2 * h)
        assert fd.max() <= 1.01 * C / b.radius


def test_partition_materialization_sums_to_one():
    from gausshardy.func_repr import union_edges

    cov, pou = covering_1d(2.5)
    edges = union_edges(pou.ramp_edges(), np.linspace(-2.6, 2.6, 301))
    mats = pou.materialize(edges)
    xs = np.linspace(-2.4, 2.4, 3000)
    total = np.zeros_like(xs)
    for m in mats:
        total += m(xs)
    assert np.max(np.abs(total - 1.0)) < 1e-12


# -- nD covering -------------------------------------------------------------


@pytest.mark.parametrize("n,extent", [(1, 4.0), (2, 3.0)])
def test_covering_nd_audits_pass(n, extent):
    cov, pou = covering_nd(extent, n)
    assert cov.overlap_bound <= 80
    for b in cov.balls:
        assert is_admissible(b, 1.0)
        assert b.radius == pytest.approx(
            geometry.admissible_radius(b.center_norm), rel=1e-12
        )


def test_covering_nd_half_balls_disjoint():
    cov, _ = covering_nd(3.0, 2)
    balls = cov.balls
    for i in range(len(balls)):
        for j in range(i + 1, len(balls)):
            d = np.linalg.norm(balls[i].center_array - balls[j].center_array)
            assert d >= 0.5 * (balls[i].radius + balls[j].radius) * (1 - 1e-12)


def test_covering_nd_grid_membership_oracle():
    # dense-grid membership: every point of the box is inside some ball
    cov, _ = covering_nd(5.0, 2)
    xs = np.linspace(-5, 5, 101)
    pts = np.column_stack([m.ravel() for m in np.meshgrid(xs, xs)])
    assert cov.covers_points(pts).all()


def test_covering_nd_cardinality_growth_matches_1d():
    c1, _ = covering_1d(4.0)
    cn, _ = covering_nd(4.0, 1)
    # same ~ extent^2 growth: counts agree within a factor of 4
    ratio = len(cn) / len(c1)
    assert 0.25 < ratio < 4.0


def test_partition_nd_plateau_exact_and_sum_one():
    cov, pou = covering_nd(2.0, 2)
    rng = np.random.default_rng(0)
    pts = rng.uniform(-2, 2, size=(400, 2))
    total = pou.sum_at(pts)
    assert np.max(np.abs(total - 1.0)) < 1e-12
    # eta_j == 1 exactly on half-balls
    for j, b in enumerate(pou.balls):
        c = b.center_array
        offs = rng.uniform(-1, 1, size=(40, 2))
        offs = offs / np.maximum(np.linalg.norm(offs, axis=1), 1.0)[:, None]
        sample = c + 0.49 * b.radius * offs
        w = pou.weight(j, sample)
        assert np.all(w == 1.0)


def test_partition_nd_supports_inside_balls():
    cov, pou = covering_nd(2.0, 2)
    rng = np.random.default_rng(1)
    for j, b in enumerate(pou.balls):
        c = b.center_array
        dirs = rng.normal(size=(30, 2))
        dirs /= np.linalg.norm(dirs, axis=1)[:, None]
        outside = c + 1.0001 * b.radius * dirs
        assert np.all(pou.weight(j, outside) == 0.0)


def test_covering_nd_rejects_bad_dimension():
    with pytest.raises(ValueError):
        covering_nd(2.0, 4)


# -- Whitney -----------------------------------------------------------------


def test_whitney_unit_interval_ratios():
    pieces = whitney_1d([(0.0, 1.0)], delta=0.125)
    assert pieces  # nonempty
    # disjoint interiors covering (0,1)
    pieces_sorted = sorted(pieces, key=lambda p: p.lo)
    assert pieces_sorted[0].lo == pytest.approx(0.0)
    assert pieces_sorted[-1].hi == pytest.approx(1.0)
    for p, q in zip(pieces_sorted[:-1], pieces_sorted[1:]):
        assert p.hi == pytest.approx(q.lo, abs=1e-12)
    for p in pieces:
        if p.is_stub:
            continue
        ratio = whitney_ratio(p, [(0.0, 1.0)])
        assert 0.125 / 4 <= ratio <= 0.125 * (1 + 1e-9)


def test_whitney_doubled_pieces_stay_inside():
    open_set = [(0.0, 1.0)]
    for p in whitney_1d(open_set, delta=0.125):
        if p.is_stub:
            continue
        c = 0.5 * (p.lo + p.hi)
        half = p.diam  # doubled piece has this half-width
        assert c - half >= -1e-12
        assert c + half <= 1.0 + 1e-12


def test_whitney_two_far_components_decompose_independently():
    joint = whitney_1d([(0.0, 1.0), (10.0, 11.5)], delta=0.125)
    left = whitney_1d([(0.0, 1.0)], delta=0.125)
    right = whitney_1d([(10.0, 11.5)], delta=0.125)
    assert len(joint) == len(left) + len(right)


def test_whitney_halfline_lengths_grow_geometrically():
    pieces = whitney_1d([(0.0, 64.0)], delta=0.125)
    ordered = [p for p in sorted(pieces, key=lambda p: p.lo) if not p.is_stub]
    # from the left boundary toward the middle, lengths increase
    upto_mid = [p.diam for p in ordered if p.hi <= 32.0]
    assert all(b >= a for a, b in zip(upto_mid[:-1], upto_mid[1:]))
    assert upto_mid[-1] / upto_mid[0] > 100


def test_whitney_empty_set():
    assert whitney_1d([]) == []


def test_whitney_doubled_overlap_bounded():
    pieces = whitney_1d([(0.0, 1.0)], delta=0.125)
    xs = np.linspace(0.001, 0.999, 4001)
    counts = np.zeros_like(xs, dtype=int)
    for p in pieces:
        c, h = 0.5 * (p.lo + p.hi), p.diam
        counts += (xs >= c - h) & (xs <= c + h)
    assert counts.max() <= 4
