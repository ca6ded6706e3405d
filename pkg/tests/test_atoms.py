import math

import numpy as np
import pytest

from gausshardy import measure
from gausshardy.atoms import (
    AtomicDecomposition,
    GaussianAtom,
    LebesgueAtom,
    atomic_norm,
    validate_gaussian_atom,
    validate_lebesgue_atom,
)
from gausshardy.func_repr import StepFunction1D
from gausshardy.geometry import Ball


def sign_atom(center: float, radius: float) -> GaussianAtom:
    """k * sign(x - c) on the ball, k = 1/gamma(B): odd so mean-zero, tight size."""
    ball = Ball((center,), radius)
    gb = measure.ball_gauss_measure(ball)
    lo, hi = ball.interval()
    left = measure.interval_gauss_mass(lo, center)
    right = measure.interval_gauss_mass(center, hi)
    # balance the two halves exactly under gamma
    v = 1.0 / gb
    payload = StepFunction1D([lo, center, hi], [-v * right / left, v])
    # rescale so the gamma-integral vanishes exactly and size is tight
    return GaussianAtom("ball", payload, ball)


def test_exceptional_atom_valid():
    report = validate_gaussian_atom(GaussianAtom.exceptional())
    assert report.ok


def test_centered_sign_atom_valid():
    ball = Ball((0.0,), 0.8)
    gb = measure.ball_gauss_measure(ball)
    v = 1.0 / gb
    payload = StepFunction1D([-0.8, 0.0, 0.8], [-v, v])
    atom = GaussianAtom("ball", payload, ball)
    report = validate_gaussian_atom(atom)
    assert report.ok, report.failed()
    # size is tight: slack ~ 0
    size = [c for c in report.checks if c.name == "size"][0]
    assert abs(size.slack) < 1e-9


def test_atom_on_inadmissible_ball_rejected():
    ball = Ball((3.0,), 0.5)  # 0.5 > 1/3
    v = 1.0 / measure.ball_gauss_measure(ball)
    payload = StepFunction1D([2.5, 3.0, 3.5], [-v, v])
    report = validate_gaussian_atom(GaussianAtom("ball", payload, ball))
    assert not report.ok
    assert any(c.name == "admissible" and not c.passed for c in report.checks)


def test_same_ball_admissible_at_higher_scale():
    ball = Ball((3.0,), 0.5)
    v = 1.0 / measure.ball_gauss_measure(ball)
    lo, c, hi = 2.5, 3.0, 3.5
    left = measure.interval_gauss_mass(lo, c)
    right = measure.interval_gauss_mass(c, hi)
    payload = StepFunction1D([lo, c, hi], [-v, v * left / right])
    payload = payload.scale(1.0 / max(payload.sup_norm() * measure.ball_gauss_measure(ball), 1.0))
    atom = GaussianAtom("ball", payload, ball, scale=2.0)
    report = validate_gaussian_atom(atom)
    assert report.ok, report.failed()


def test_mean_zero_violation_detected():
    ball = Ball((0.0,), 1.0)
    payload = StepFunction1D([-1.0, 1.0], [0.5])  # nonzero mean
    report = validate_gaussian_atom(GaussianAtom("ball", payload, ball))
    assert any(c.name == "mean-zero" and not c.passed for c in report.checks)


def test_support_violation_detected():
    ball = Ball((0.0,), 0.5)
    v = 1.0
    payload = StepFunction1D([-1.0, 0.0, 1.0], [-v, v])  # sticks out of B
    report = validate_gaussian_atom(GaussianAtom("ball", payload, ball))
    assert any(c.name == "support" and not c.passed for c in report.checks)


def test_lebesgue_haar_atom_valid():
    ball = Ball.from_interval(-0.1, 1.1)
    lam = 2 * ball.radius
    v = 1.0 / lam
    payload = StepFunction1D([0.0, 0.5, 1.0], [v, -v])
    report = validate_lebesgue_atom(LebesgueAtom(payload, ball))
    assert report.ok, report.failed()


def test_lebesgue_atom_nonzero_integral_invalid():
    ball = Ball.from_interval(0.0, 1.0)
    payload = StepFunction1D([0.0, 1.0], [0.3])
    report = validate_lebesgue_atom(LebesgueAtom(payload, ball))
    bad = [c for c in report.checks if c.name == "mean-zero"][0]
    assert not bad.passed
    assert bad.slack < 0


def test_lebesgue_atom_oversized_reports_slack():
    ball = Ball.from_interval(0.0, 1.0)
    v = 1.1  # 10% above 1/lambda(B) = 1
    payload = StepFunction1D([0.0, 0.5, 1.0], [v, -v])
    report = validate_lebesgue_atom(LebesgueAtom(payload, ball))
    size = [c for c in report.checks if c.name == "size"][0]
    assert not size.passed
    assert size.slack == pytest.approx(-0.1, abs=1e-12)


def test_atomic_norm_accounting():
    one = GaussianAtom.exceptional()
    d = AtomicDecomposition(
        terms=[(2.5, one)], target=StepFunction1D.constant(2.5), grid=np.linspace(-5, 5, 101)
    )
    assert atomic_norm(d) == pytest.approx(2.5)

    a = sign_atom(0.0, 0.8)
    gb = measure.ball_gauss_measure(a.ball)
    v = 1.0 / gb
    payload = StepFunction1D([-0.8, 0.0, 0.8], [-v, v])
    atom = GaussianAtom("ball", payload, a.ball)
    d2 = AtomicDecomposition(
        terms=[(1.0, atom), (-1.0, atom)],
        target=StepFunction1D.zero(),
        grid=np.linspace(-2, 2, 201),
    )
    # no cancellation in the norm accounting
    assert atomic_norm(d2) == pytest.approx(2.0)
    assert d2.reconstruction_error()["abs"] < 1e-15


def test_atomic_norm_rejects_invalid_atom():
    ball = Ball((0.0,), 1.0)
    payload = StepFunction1D([-1.0, 1.0], [1.0])
    d = AtomicDecomposition(
        terms=[(1.0, GaussianAtom("ball", payload, ball))],
        target=payload,
        grid=np.linspace(-2, 2, 11),
    )
    with pytest.raises(ValueError):
        atomic_norm(d)


def test_decomposition_json_is_sorted_and_stable():
    d = AtomicDecomposition(
        terms=[(1.0, GaussianAtom.exceptional())],
        target=StepFunction1D.constant(1.0),
        grid=np.linspace(-5, 5, 11),
    )
    s1 = d.to_json()
    s2 = d.to_json()
    assert s1 == s2
    assert s1.index('"atoms"') < s1.index('"coefficient_sum"') < s1.index('"meta"')


def test_huge_valued_far_atom_validates():
    # normalised indicator pair far out: values ~ 1e190, still a clean atom
    a, b = 21.0, 21.0 + 1.0 / 21.0
    ball = Ball.from_interval(a - 0.002, b + 0.002)
    m1 = measure.interval_gauss_mass(a, 0.5 * (a + b))
    m2 = measure.interval_gauss_mass(0.5 * (a + b), b)
    payload = StepFunction1D([a, 0.5 * (a + b), b], [1.0 / m1, -1.0 / m2])
    payload = payload.scale(
        1.0 / (payload.sup_norm() * measure.ball_gauss_measure(ball))
    )
    atom = GaussianAtom("ball", payload, ball)
    report = validate_gaussian_atom(atom)
    assert report.ok, report.failed()
