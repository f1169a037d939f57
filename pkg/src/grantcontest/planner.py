"""Planner-side accounting: benefit, cost and externality per award.

Given an equilibrium bid schedule, the planner's aggregate productivity per
award is

    (benefit + externality - cost) / a

where a is the award share (the payline p, or the funded fraction f of a
lottery), benefit integrates m * v * eta(b(v)) over the quality distribution,
and cost integrates the unrecouped application cost (1-k) b(v)^2 / v.  Three
externality treatments are supported:

* none: effort creates no value beyond the applicant's own payoff.
* inverse-cost: effort of quality x on an idea of quality v also creates
  k * v * x^(1/r) of social value, r > 0 steepening or flattening the effect.
* partial-completion: a share w(b) = sqrt(b)/3 of every idea's value is
  realized by the application work itself, funded or not, and only the
  remainder rides on the funding event.  Folded into the benefit term.

All integrals run on the schedule's own rank-uniform grid so the solver and
the evaluator never disagree about where the curve lives.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
from scipy.integrate import simpson

from .equilibrium import (
    BidSchedule,
    ContestEnvironment,
    MechanismSpec,
    _check_match,
    solve_bid_schedule,
)
from .errors import NumericalError, ParameterError

EXT_NONE = "none"
EXT_INVERSE_COST = "inverse-cost"
EXT_PARTIAL_COMPLETION = "partial-completion"

#: Default payline grid for sweeps: 0.02 to 1.00 in steps of 0.02.
DEFAULT_PAYLINES = np.arange(1, 51) / 50.0

#: Default solver grid for planner sweeps.  Much finer than the bid solver's
#: own default: the quality quantile has a square-root endpoint and the
#: funding probability a steep transition band at small paylines, and the
#: aggregate integrals are held to 1e-6 tolerances that a 2001-point rank grid
#: misses by an order of magnitude.  At 64001 points trapezoid and Simpson
#: agree to about 5e-7 relative on the worst integral of the default sweep.
DEFAULT_SWEEP_GRID = 64001


def completion_share(b):
    """Share of an idea realized by application work alone, sqrt(b)/3."""
    return np.sqrt(np.asarray(b, dtype=float)) / 3.0


@dataclass(frozen=True)
class ExternalitySpec:
    """Which externality treatment to apply when scoring a contest."""

    kind: str
    r: float | None = None

    def __post_init__(self):
        if self.kind not in (EXT_NONE, EXT_INVERSE_COST, EXT_PARTIAL_COMPLETION):
            raise ParameterError(f"unknown externality kind {self.kind!r}")
        if self.kind == EXT_INVERSE_COST:
            if self.r is None or not self.r > 0.0:
                raise ParameterError(f"inverse-cost externality needs r > 0, got {self.r}")
        elif self.r is not None:
            raise ParameterError(f"externality kind {self.kind!r} takes no r")

    @classmethod
    def none(cls) -> "ExternalitySpec":
        return cls(kind=EXT_NONE)

    @classmethod
    def inverse_cost(cls, r: float) -> "ExternalitySpec":
        return cls(kind=EXT_INVERSE_COST, r=r)

    @classmethod
    def partial_completion(cls) -> "ExternalitySpec":
        return cls(kind=EXT_PARTIAL_COMPLETION)


@dataclass(frozen=True)
class ContestOutcome:
    """Per-award decomposition of a contest's aggregate productivity."""

    benefit: float
    cost: float
    externality: float
    productivity: float
    mechanism: MechanismSpec
    externality_spec: ExternalitySpec

    def __post_init__(self):
        values = (self.benefit, self.cost, self.externality, self.productivity)
        if not all(np.isfinite(values)) or self.cost < 0.0:
            raise NumericalError(f"non-finite or negative-cost outcome: {values}")


def _integrate(y: np.ndarray, u: np.ndarray, rule: str) -> float:
    if rule == "trapezoid":
        return float(np.trapezoid(y, u))
    if rule == "simpson":
        return float(simpson(y, x=u))
    raise ParameterError(f"unknown quadrature rule {rule!r}")


def evaluate(
    env: ContestEnvironment,
    mech: MechanismSpec,
    schedule: BidSchedule,
    ext: ExternalitySpec,
    quadrature: str = "trapezoid",
) -> ContestOutcome:
    """Score a solved schedule: benefit, cost, externality and productivity,
    each per award."""
    _check_match(env, mech, schedule)
    u, v, b, eta = schedule.u, schedule.v, schedule.b, schedule.eta
    a = mech.award_share

    if ext.kind == EXT_PARTIAL_COMPLETION:
        share = completion_share(b)
        benefit = env.m * _integrate(share * v + (1.0 - share) * v * eta, u, quadrature)
        externality = 0.0
    else:
        benefit = env.m * _integrate(v * eta, u, quadrature)
        if ext.kind == EXT_INVERSE_COST:
            externality = _integrate(env.k * v * b ** (1.0 / ext.r), u, quadrature)
        else:
            externality = 0.0
    cost = _integrate((1.0 - env.k) * b**2 / v, u, quadrature)

    benefit, cost, externality = benefit / a, cost / a, externality / a
    return ContestOutcome(
        benefit=benefit,
        cost=cost,
        externality=externality,
        productivity=benefit + externality - cost,
        mechanism=mech,
        externality_spec=ext,
    )


def _solve_and_evaluate(env, payline, ext, grid_size, quadrature):
    try:
        mech = MechanismSpec.payline(payline)
        schedule = solve_bid_schedule(env, mech, grid_size)
        return evaluate(env, mech, schedule, ext, quadrature)
    except (ParameterError, NumericalError) as exc:
        raise type(exc)(f"payline {payline}: {exc}") from exc


def payline_sweep(
    env: ContestEnvironment,
    paylines,
    ext: ExternalitySpec,
    grid_size: int = DEFAULT_SWEEP_GRID,
    quadrature: str = "trapezoid",
    workers: int | None = None,
) -> list[ContestOutcome]:
    """Evaluate one payline contest per entry of `paylines`.

    Each evaluation is pure, so the sweep may fan out across threads; results
    are returned in payline order no matter how the work was scheduled.
    workers=None reads GRANTCONTEST_WORKERS (default 1, sequential).
    """
    paylines = [float(p) for p in paylines]
    if workers is None:
        workers = int(os.environ.get("GRANTCONTEST_WORKERS", "1"))
    if workers > 1 and len(paylines) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            return list(
                pool.map(lambda p: _solve_and_evaluate(env, p, ext, grid_size, quadrature), paylines)
            )
    return [_solve_and_evaluate(env, p, ext, grid_size, quadrature) for p in paylines]


@dataclass(frozen=True)
class EquivalenceReport:
    """Outcome of comparing a lottery with the payline contest at its line."""

    passed: bool
    lottery_productivity: float
    payline_productivity: float
    relative_difference: float
    tolerance: float


def lottery_equivalence_check(
    env: ContestEnvironment,
    l: float,
    f: float,
    tolerance: float,
    grid_size: int = DEFAULT_SWEEP_GRID,
) -> EquivalenceReport:
    """Check that a lottery with line l funding a share f is exactly as
    productive per award as the payline contest at p = l (no externality)."""
    ext = ExternalitySpec.none()
    lot = MechanismSpec.lottery(l, f)
    pay = MechanismSpec.payline(l)
    prod_lot = evaluate(env, lot, solve_bid_schedule(env, lot, grid_size), ext).productivity
    prod_pay = evaluate(env, pay, solve_bid_schedule(env, pay, grid_size), ext).productivity
    rel = abs(prod_lot - prod_pay) / abs(prod_pay)
    return EquivalenceReport(
        passed=rel <= tolerance,
        lottery_productivity=prod_lot,
        payline_productivity=prod_pay,
        relative_difference=rel,
        tolerance=tolerance,
    )


def productivity_spread(outcomes) -> float:
    """Max minus min productivity across a sweep; a flatness diagnostic."""
    values = [o.productivity for o in outcomes]
    return max(values) - min(values)
