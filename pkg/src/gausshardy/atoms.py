"""Atom types, validators, and decomposition bookkeeping.

A Gaussian (1, r)-atom is either the constant function 1 (the exceptional
atom) or a function supported in a ball admissible at the atom's recorded
scale, with vanishing Gaussian integral and ``||a||_r <= gamma(B)^(1/r - 1)``.
A Lebesgue atom is the classical (1, infinity)-atom: vanishing Lebesgue
integral, support in a ball, ``||a||_inf <= 1 / lambda(B)``.

Validators return reports rather than raising: each condition carries a
measured slack so tests can assert quantitative margins.  Tolerances follow
the natural scale of a normalised atom (whose sup really is ~ 1/measure(B)),
which keeps the checks meaningful for payloads with astronomically large
values on tiny-measure balls.

Atoms recorded at scale s > 1 are first class: changing the admissibility
scale changes the space only up to norm equivalence, so no rescaling is
attempted; the report simply distinguishes the scales.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from . import measure
from .func_repr import StepFunction1D
from .geometry import Ball, admissibility_scale, is_admissible

MEAN_TOL = 1e-10
SIZE_TOL = 1e-9
SUPPORT_TOL = 1e-9


@dataclass(frozen=True)
class Check:
    name: str
    passed: bool
    slack: float
    detail: str = ""


@dataclass
class ValidationReport:
    checks: list

    @property
    def ok(self) -> bool:
        return all(c.passed for c in self.checks)

    def failed(self):
        return [c for c in self.checks if not c.passed]

    def __repr__(self):
        status = "ok" if self.ok else "INVALID"
        return f"ValidationReport({status}, {len(self.checks)} checks)"


@dataclass(frozen=True)
class GaussianAtom:
    """kind 'exceptional' (payload == 1) or 'ball' (supported atom)."""

    kind: str
    payload: object
    ball: Ball | None = None
    exponent: float = math.inf
    scale: float = 1.0

    def __post_init__(self):
        if self.kind not in ("exceptional", "ball"):
            raise ValueError(f"unknown atom kind {self.kind!r}")
        if self.kind == "ball" and self.ball is None:
            raise ValueError("ball-supported atom needs a ball")

    @classmethod
    def exceptional(cls, clip: float = measure.CLIP) -> "GaussianAtom":
        return cls("exceptional", StepFunction1D.constant(1.0, clip))

    @classmethod
    def exceptional_nd(cls, n: int, clip: float = measure.CLIP) -> "GaussianAtom":
        from .func_repr import BoxSumFunctionND

        if n == 1:
            return cls.exceptional(clip)
        return cls(
            "exceptional",
            BoxSumFunctionND([([-clip] * n, [clip] * n, 1.0)]),
        )


@dataclass(frozen=True)
class LebesgueAtom:
    payload: object
    ball: Ball


def _support_check(payload, ball: Ball) -> Check:
    """Support containment with relative slack (positive = inside)."""
    if isinstance(payload, StepFunction1D):
        s = payload.support_interval()
        if s is None:
            return Check("support", True, math.inf, "zero payload")
        lo, hi = s
        c, r = ball.center[0], ball.radius
        slack = min((lo - (c - r)), ((c + r) - hi)) / r
        return Check("support", slack >= -SUPPORT_TOL, slack)
    grid = payload.grid() if hasattr(payload, "grid") else payload
    nz = np.nonzero(grid.values)
    if len(nz[0]) == 0:
        return Check("support", True, math.inf, "zero payload")
    c = ball.center_array
    # farthest corner of each nonzero cell from the ball center
    corners_lo = np.column_stack(
        [grid.axes[d][nz[d]] for d in range(grid.dim)]
    )
    corners_hi = np.column_stack(
        [grid.axes[d][nz[d] + 1] for d in range(grid.dim)]
    )
    far = np.maximum(np.abs(corners_lo - c), np.abs(corners_hi - c))
    dist = np.sqrt((far**2).sum(axis=1))
    worst = float((ball.radius - dist.max()) / ball.radius)
    return Check("support", worst >= -SUPPORT_TOL, worst)


def _atom_scale(payload, measure_of_ball: float) -> float:
    """Natural magnitude of a normalised atom, used to scale the mean-zero
    tolerance: gamma(B) * ||a||_inf is ~ 1 for a tight (1, inf)-atom."""
    sup = payload.sup_norm()
    return max(1.0, measure_of_ball * sup if math.isfinite(sup) else 1.0)


def validate_gaussian_atom(atom: GaussianAtom) -> ValidationReport:
    checks = []
    if atom.kind == "exceptional":
        payload = atom.payload
        total = measure.integrate_gauss(payload)
        checks.append(
            Check("constant-one", abs(total - 1.0) <= 1e-12, 1e-12 - abs(total - 1.0),
                  "gauss integral of the exceptional payload")
        )
        sup = payload.sup_norm()
        checks.append(Check("bounded-by-one", abs(sup - 1.0) <= 1e-12, 1e-12 - abs(sup - 1.0)))
        return ValidationReport(checks)

    ball = atom.ball
    checks.append(_support_check(atom.payload, ball))
    scale_needed = admissibility_scale(ball)
    checks.append(
        Check(
            "admissible",
            is_admissible(ball, atom.scale),
            atom.scale - scale_needed,
            f"ball admissible at recorded scale {atom.scale:g}"
            + ("" if atom.scale == 1.0 else f" (needs {scale_needed:.3g})"),
        )
    )
    gb = measure.ball_gauss_measure(ball)
    mean = measure.integrate_gauss(atom.payload)
    tol = MEAN_TOL * _atom_scale(atom.payload, gb)
    checks.append(Check("mean-zero", abs(mean) <= tol, tol - abs(mean)))
    r = atom.exponent
    if gb <= 0:
        checks.append(Check("size", False, -math.inf, "ball mass underflow"))
    else:
        bound = gb ** (1.0 / r - 1.0) if r != math.inf else 1.0 / gb
        norm = atom.payload.norm_gauss(r)
        ok = norm <= (1.0 + SIZE_TOL) * bound
        slack = (bound - norm) / bound
        checks.append(Check("size", ok, slack, f"L^{r:g}(gamma) size condition"))
    return ValidationReport(checks)


def validate_lebesgue_atom(atom: LebesgueAtom) -> ValidationReport:
    checks = [_support_check(atom.payload, atom.ball)]
    if isinstance(atom.payload, StepFunction1D):
        lam = 2.0 * atom.ball.radius
        mean = atom.payload.integral_lebesgue()
    else:
        grid = atom.payload.grid() if hasattr(atom.payload, "grid") else atom.payload
        n = grid.dim
        lam = _ball_volume(n, atom.ball.radius)
        mean = grid.integral_lebesgue()
    tol = MEAN_TOL * _atom_scale(atom.payload, lam)
    checks.append(Check("mean-zero", abs(mean) <= tol, tol - abs(mean)))
    sup = atom.payload.sup_norm()
    bound = 1.0 / lam
    checks.append(
        Check("size", sup <= (1.0 + SIZE_TOL) * bound, (bound - sup) / bound)
    )
    return ValidationReport(checks)


def _ball_volume(n: int, r: float) -> float:
    return math.pi ** (n / 2) / math.gamma(n / 2 + 1) * r**n


@dataclass
class AtomicDecomposition:
    """Finite atomic decomposition of a target function.

    ``terms`` is a list of (coefficient, atom) pairs; ``residual`` is kept for
    interface completeness and must be None (zero) for every decomposition the
    library emits -- a nonzero residual is a failure, not a rounding report.
    ``grid`` is the declared evaluation grid on which reconstruction is
    checked (an edges array in 1-d, per-axis edges otherwise).
    """

    terms: list
    target: object
    grid: object
    residual: object = None
    meta: dict = field(default_factory=dict)

    @property
    def coefficient_sum(self) -> float:
        return float(sum(abs(c) for c, _ in self.terms))

    def eval_points(self) -> np.ndarray:
        if np.ndim(self.grid[0]) == 0:
            edges = np.asarray(self.grid, dtype=float)
            return 0.5 * (edges[:-1] + edges[1:])
        mids = [0.5 * (np.asarray(a)[:-1] + np.asarray(a)[1:]) for a in self.grid]
        mesh = np.meshgrid(*mids, indexing="ij")
        return np.column_stack([m.ravel() for m in mesh])

    def reconstruct(self, pts=None) -> np.ndarray:
        pts = self.eval_points() if pts is None else pts
        total = np.zeros(len(np.atleast_1d(pts)))
        for coeff, atom in self.terms:
            payload = atom.payload
            if isinstance(payload, StepFunction1D):
                total = total + coeff * payload(pts)
            else:
                total = total + coeff * payload.evaluate_points(pts)
        if self.residual is not None:
            if isinstance(self.residual, StepFunction1D):
                total = total + self.residual(pts)
            else:
                total = total + self.residual.evaluate_points(pts)
        return total

    def reconstruction_error(self) -> dict:
        """Sup-norm reconstruction defect on the declared grid, absolute and
        relative to the target's sup."""
        pts = self.eval_points()
        recon = self.reconstruct(pts)
        if isinstance(self.target, StepFunction1D):
            tgt = self.target(pts)
        else:
            tgt = self.target.evaluate_points(pts)
        err = float(np.max(np.abs(recon - tgt))) if len(recon) else 0.0
        scale = max(1.0, float(np.max(np.abs(tgt))) if len(recon) else 1.0)
        return {"abs": err, "rel": err / scale}

    def validate_atoms(self):
        reports = []
        for _, atom in self.terms:
            if isinstance(atom, GaussianAtom):
                reports.append(validate_gaussian_atom(atom))
            else:
                reports.append(validate_lebesgue_atom(atom))
        return reports

    def to_json_dict(self) -> dict:
        items = []
        for i, (coeff, atom) in enumerate(self.terms):
            if isinstance(atom, GaussianAtom):
                kind = atom.kind
                scale = atom.scale
                ball = atom.ball
            else:
                kind = "lebesgue"
                scale = None
                ball = atom.ball
            items.append(
                {
                    "coeff": float(coeff),
                    "kind": kind,
                    "ball": None
                    if ball is None
                    else {"center": list(ball.center), "radius": ball.radius},
                    "payload_ref": f"atom-{i}",
                    "scale": scale,
                }
            )
        return {
            "atoms": items,
            "coefficient_sum": self.coefficient_sum,
            "meta": self.meta,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_json_dict(), sort_keys=True)


def atomic_norm(decomposition: AtomicDecomposition) -> float:
    """Sum of |coefficients| -- an upper bound for the atomic norm.

    Raises if any atom fails its validator: the accounting is only meaningful
    over genuine atoms.
    """
    for i, report in enumerate(decomposition.validate_atoms()):
        if not report.ok:
            bad = ", ".join(c.name for c in report.failed())
            raise ValueError(f"term {i} is not a valid atom (failed: {bad})")
    return decomposition.coefficient_sum
