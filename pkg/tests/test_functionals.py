import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import integrate, special

from gausshardy import functionals, measure
from gausshardy.func_repr import BoxSumFunctionND, StepFunction1D
from gausshardy.functionals import (
    bmo_seminorm_estimate,
    e_global,
    e_plus,
    mean_oscillation,
    pairing,
    pairing_capped_square,
)
from gausshardy.geometry import Ball


def step_square(lo=-8.0, hi=8.0, cells=400):
    """x^2 projected onto a grid by exact per-cell Gaussian means."""
    edges = np.linspace(lo, hi, cells + 1)
    m2 = np.atleast_1d(measure.second_moment_interval(edges[:-1], edges[1:]))
    mass = np.atleast_1d(measure.interval_gauss_mass(edges[:-1], edges[1:]))
    return StepFunction1D(edges, m2 / mass)


# -- tail-charge functional ----------------------------------------------------


def test_e_of_constant_one_quarter():
    # Oracle first: E(1) = 2 * integral_0^inf x gamma([x, inf)) dx
    oracle, _ = integrate.quad(lambda x: 2 * x * special.erfc(x) / 2, 0, 40)
    assert oracle == pytest.approx(0.25, abs=1e-10)
    rep = e_global(StepFunction1D.constant(1.0))
    assert rep.value == pytest.approx(0.25, abs=1e-12)
    assert not rep.divergent


def test_e_against_brute_force_for_signed_step():
    f = StepFunction1D([-1.5, -0.2, 0.4, 2.0], [1.0, -2.0, 0.7])

    def tail_plus(x):
        v, _ = integrate.quad(
            lambda y: f(y) * math.exp(-y * y) / math.sqrt(math.pi), x, 3.0,
            points=[-0.2, 0.4, 2.0] if x < 2 else None, limit=200,
        )
        return v

    def tail_minus(x):
        v, _ = integrate.quad(
            lambda y: f(y) * math.exp(-y * y) / math.sqrt(math.pi), -3.0, -x,
            points=[-1.5, -0.2] if x < 1.5 else None, limit=200,
        )
        return v

    oracle, _ = integrate.quad(
        lambda x: x * (abs(tail_plus(x)) + abs(tail_minus(x))), 0, 3.0, limit=300
    )
    rep = e_global(f)
    assert rep.value == pytest.approx(oracle, abs=5e-8)


def test_e_of_atom_bounded_by_ball_x_integral():
    # ball-supported mean-zero payload with |.|_1(gamma) <= 1 on B in (0, inf):
    # E(a) <= integral x 1_B dx
    for c, r in [(2.0, 0.4), (3.0, 1 / 3), (1.5, 0.5)]:
        ball = Ball((c,), r)
        lo, hi = ball.interval()
        mid = c
        m_left = measure.interval_gauss_mass(lo, mid)
        m_right = measure.interval_gauss_mass(mid, hi)
        gb = measure.ball_gauss_measure(ball)
        v = 1.0 / gb
        payload = StepFunction1D([lo, mid, hi], [v, -v * m_left / m_right])
        payload = payload.scale(1.0 / max(1.0, payload.norm_gauss(1.0)))
        assert abs(payload.integral_gauss()) < 1e-15
        rep = e_global(payload)
        assert rep.value <= 0.5 * (hi**2 - lo**2) + 1e-12


def test_e_rejects_higher_dimension():
    f = BoxSumFunctionND([([0.0, 0.0], [1.0, 1.0], 1.0)])
    with pytest.raises(ValueError):
        e_global(f)


@settings(max_examples=30, deadline=None)
@given(seed=st.integers(0, 1000), c=st.floats(-4.0, 4.0))
def test_e_absolutely_homogeneous(seed, c):
    rng = np.random.default_rng(seed)
    edges = np.sort(rng.uniform(-3, 3, 7))
    f = StepFunction1D(edges, rng.normal(size=6))
    e1 = e_global(f).value
    e2 = e_global(f.scale(c)).value
    assert e2 == pytest.approx(abs(c) * e1, rel=1e-10, abs=1e-13)


def test_e_partials_saturate_for_compact_function():
    f = StepFunction1D([-1.0, 1.0], [3.0])
    rep = e_global(f)
    assert rep.partials[-1] == pytest.approx(rep.partials[-2], rel=1e-12)
    assert not rep.divergent


# -- second moment ---------------------------------------------------------------


def test_e_plus_constants():
    one = StepFunction1D.constant(1.0)
    assert e_plus(one) == pytest.approx(0.5, abs=1e-12)
    for n in (2, 3):
        onen = BoxSumFunctionND([([-20.0] * n, [20.0] * n, 1.0)])
        assert e_plus(onen) == pytest.approx(n / 2.0, abs=1e-12)


def test_e_plus_oracle_quadrature_2d():
    f = BoxSumFunctionND([([0.0, -1.0], [1.0, 0.5], 2.0)])
    oracle, _ = integrate.dblquad(
        lambda y, x: 2.0 * (x * x + y * y) * math.exp(-x * x - y * y) / math.pi,
        0.0,
        1.0,
        -1.0,
        0.5,
        epsabs=1e-12,
    )
    assert e_plus(f) == pytest.approx(oracle, abs=1e-10)


def test_e_plus_halfline():
    f = StepFunction1D([0.0, 40.0], [1.0])
    assert e_plus(f) == pytest.approx(0.25, abs=1e-12)


@settings(max_examples=30, deadline=None)
@given(seed=st.integers(0, 1000), c=st.floats(-4.0, 4.0))
def test_e_plus_absolutely_homogeneous(seed, c):
    rng = np.random.default_rng(seed)
    edges = np.sort(rng.uniform(-3, 3, 7))
    f = StepFunction1D(edges, rng.normal(size=6))
    assert e_plus(f.scale(c)) == pytest.approx(abs(c) * e_plus(f), rel=1e-11, abs=1e-14)


def test_e_and_e_plus_comparable_for_nonneg():
    rng = np.random.default_rng(17)
    for _ in range(10):
        edges = np.sort(rng.uniform(-4, 4, 9))
        f = StepFunction1D(edges, np.abs(rng.normal(size=8)))
        a = e_global(f).value
        b = e_plus(f)
        assert a / 8.0 <= b <= 8.0 * a or (a < 1e-12 and b < 1e-12)


# -- BMO -------------------------------------------------------------------------


def test_bmo_constant_is_zero():
    f = StepFunction1D.constant(3.0)
    balls = [Ball((0.0,), 1.0), Ball((2.0,), 0.5)]
    assert bmo_seminorm_estimate(f, balls) == pytest.approx(0.0, abs=1e-14)


def test_bmo_empty_sampler_rejected():
    with pytest.raises(ValueError):
        bmo_seminorm_estimate(StepFunction1D.constant(1.0), [])


def test_square_function_bounded_oscillation_on_admissible_balls():
    f = step_square(-22.0, 22.0, 2000)
    oscs = []
    for c in np.linspace(0.0, 20.0, 21):
        ball = Ball((c,), min(1.0, 1.0 / c) if c > 0 else 1.0)
        oscs.append(mean_oscillation(f, ball))
    assert max(oscs) < 4.0  # bounded uniformly in the center


def test_square_function_oscillation_grows_on_inadmissible_balls():
    f = step_square(-22.0, 22.0, 4000)
    vals = [mean_oscillation(f, Ball((c,), 1.0)) for c in (2.0, 5.0, 10.0)]
    assert vals[0] < vals[1] < vals[2]
    # at the same centers, admissible balls see strictly smaller oscillation
    adm = [mean_oscillation(f, Ball((c,), 1.0 / c)) for c in (2.0, 5.0, 10.0)]
    assert all(a < v for a, v in zip(adm, vals))


# -- pairing ---------------------------------------------------------------------


def test_pairing_with_zero():
    f = StepFunction1D([-1.0, 1.0], [2.0])
    assert pairing(f, StepFunction1D.zero()) == 0.0


def test_pairing_one_with_square():
    one = StepFunction1D.constant(1.0)
    # min(x^2, k) with k beyond the support acts as x^2
    assert pairing_capped_square(one, 1e6) == pytest.approx(0.5, rel=1e-10)


def test_pairing_capped_square_1d_oracle():
    f = StepFunction1D([-1.2, 0.3, 2.7], [1.5, -0.5])
    for k in (0.5, 1.0, 4.0):
        oracle, _ = integrate.quad(
            lambda x: f(x) * min(x * x, k) * math.exp(-x * x) / math.sqrt(math.pi),
            -1.2,
            2.7,
            points=[0.3, -math.sqrt(k), math.sqrt(k)],
            limit=200,
        )
        assert pairing_capped_square(f, k) == pytest.approx(oracle, abs=1e-12)


def test_pairing_capped_square_2d_oracle():
    f = BoxSumFunctionND([([-0.8, 0.1], [1.1, 1.4], 1.0)])
    k = 1.3
    oracle, _ = integrate.dblquad(
        lambda y, x: min(x * x + y * y, k) * math.exp(-x * x - y * y) / math.pi,
        -0.8,
        1.1,
        0.1,
        1.4,
        epsabs=1e-11,
    )
    assert pairing_capped_square(f, k) == pytest.approx(oracle, abs=1e-8)


def test_pairing_capped_square_monotone_in_k():
    f = StepFunction1D([-2.0, 0.5, 3.0], [1.0, 2.0])
    vals = [pairing_capped_square(f, k) for k in (1.0, 10.0, 100.0)]
    assert vals[0] <= vals[1] <= vals[2]
