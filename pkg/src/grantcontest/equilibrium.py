"""Symmetric equilibrium application quality under a payline or lottery.

Each scientist privately draws idea quality v, chooses how much effort to put
into an application of quality b(v) at private cost (1-k) b^2 / v (a share k
of the cost is recouped because application work doubles as research), and is
funded when a noisy review places the application above the mechanism's
cutoff.  The equilibrium bid function solves the first-order condition of

    maximize over x:   v * eta(x) - (1-k) x^2 / v

where eta is the equilibrium funding probability of an application of quality
x.  With G(u) denoting the funding probability of true quality rank u, the
monotone symmetric equilibrium integrates to

    b(v)^2 = 1/(1-k) * integral_{0.25}^{v} t^2 dG(F(t)),    b(0.25) = 0.

The solver evaluates the Stieltjes integral as a cumulative sum of G
increments on a grid uniform in rank (where the copula curvature lives),
weighting each increment by the squared midpoint quality.  This keeps b
monotone by construction and never needs a derivative of the copula.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import NumericalError, ParameterError
from .quality import ClaytonCopula, QualityDistribution

PAYLINE = "payline-contest"
LOTTERY = "lottery"


@dataclass(frozen=True)
class ContestEnvironment:
    """Model primitives: quality distribution, review noise, cost recoupment k
    and social multiplier m.  Application cost is fixed at x^2 / v."""

    quality: QualityDistribution = field(default_factory=QualityDistribution)
    noise: ClaytonCopula = field(default_factory=ClaytonCopula)
    k: float = 1.0 / 3.0
    m: float = 1.0

    def __post_init__(self):
        if not 0.0 <= self.k < 1.0:
            raise ParameterError(f"cost-recoupment share k must be in [0, 1), got {self.k}")
        if not self.m >= 1.0:
            raise ParameterError(f"social multiplier m must be at least 1, got {self.m}")

    def cost(self, v, x):
        """Private application cost x^2 / v before recoupment."""
        return np.asarray(x, dtype=float) ** 2 / np.asarray(v, dtype=float)


@dataclass(frozen=True)
class MechanismSpec:
    """Funding rule: either fund the top p of applications by evaluated rank
    (payline contest), or enter the top l into a uniform lottery that funds a
    fraction f of all applications (lottery)."""

    kind: str
    p: float = 0.0
    l: float = 0.0
    f: float = 0.0

    def __post_init__(self):
        if self.kind == PAYLINE:
            if not 0.0 < self.p <= 1.0:
                raise ParameterError(f"payline must be in (0, 1], got {self.p}")
        elif self.kind == LOTTERY:
            if not 0.0 < self.f <= self.l <= 1.0:
                raise ParameterError(
                    f"lottery requires 0 < f <= l <= 1, got l={self.l}, f={self.f}"
                )
        else:
            raise ParameterError(f"unknown mechanism kind {self.kind!r}")

    @classmethod
    def payline(cls, p: float) -> "MechanismSpec":
        return cls(kind=PAYLINE, p=p)

    @classmethod
    def lottery(cls, l: float, f: float) -> "MechanismSpec":
        return cls(kind=LOTTERY, l=l, f=f)

    @property
    def screen_line(self) -> float:
        """Evaluated-rank cutoff: applications above 1 - screen_line qualify."""
        return self.p if self.kind == PAYLINE else self.l

    @property
    def award_share(self) -> float:
        """Fraction of applications actually funded."""
        return self.p if self.kind == PAYLINE else self.f


@dataclass(frozen=True, eq=False)
class BidSchedule:
    """Equilibrium bid function tabulated on a rank-uniform grid.

    Columns (all the same length, ordered by quality): quality v, true rank u,
    bid b, funding probability eta, and applicant payoff.  Arrays are locked
    read-only so schedules can be shared across threads.
    """

    v: np.ndarray
    u: np.ndarray
    b: np.ndarray
    eta: np.ndarray
    payoff: np.ndarray
    env: ContestEnvironment
    mechanism: MechanismSpec

    def __post_init__(self):
        for arr in (self.v, self.u, self.b, self.eta, self.payoff):
            arr.setflags(write=False)

    @property
    def grid_size(self) -> int:
        return self.v.size

    @property
    def max_bid(self) -> float:
        return float(self.b[-1])


def funding_probability(env: ContestEnvironment, mech: MechanismSpec, u):
    """Equilibrium probability that an application of true rank u is funded.

    Payline contest: P(evaluated rank > 1 - p | true rank u).  Lottery: the
    same screening event at line l, times the per-entrant award odds f/l.
    """
    u = np.asarray(u, dtype=float)
    line = mech.screen_line
    if line >= 1.0:
        qualified = np.ones_like(u)
    else:
        qualified = np.asarray(1.0 - env.noise.conditional_cdf(u, 1.0 - line))
    out = qualified if mech.kind == PAYLINE else (mech.f / mech.l) * qualified
    return float(out) if out.ndim == 0 else out


def solve_bid_schedule(
    env: ContestEnvironment, mech: MechanismSpec, grid_size: int = 2001
) -> BidSchedule:
    """Solve the monotone symmetric equilibrium on a rank-uniform grid.

    grid_size must be at least 101.  Raises NumericalError if the constructed
    bid schedule loses monotonicity beyond 1e-10 or any type ends up with a
    negative expected payoff (full participation would then be inconsistent).
    """
    if grid_size < 101:
        raise ParameterError(f"grid_size must be at least 101, got {grid_size}")
    u = np.linspace(0.0, 1.0, grid_size)
    v = env.quality.quantile(u)
    eta = funding_probability(env, mech, u)

    v_mid = 0.5 * (v[:-1] + v[1:])
    d_eta = np.diff(eta)
    b_sq = np.concatenate(([0.0], np.cumsum(v_mid**2 * d_eta))) / (1.0 - env.k)
    b = np.sqrt(np.maximum(b_sq, 0.0))
    if np.any(np.diff(b) < -1e-10):
        raise NumericalError("bid schedule lost monotonicity beyond 1e-10")

    payoff = v * eta - (1.0 - env.k) * b**2 / v
    if np.any(payoff < -1e-9):
        raise NumericalError(
            "negative applicant payoff detected; full participation is inconsistent "
            f"(min payoff {payoff.min():.3e})"
        )
    return BidSchedule(v=v, u=u, b=b, eta=eta, payoff=payoff, env=env, mechanism=mech)


def applicant_value(
    env: ContestEnvironment, mech: MechanismSpec, schedule: BidSchedule, v
) -> float:
    """Expected equilibrium payoff v * eta(b(v)) - (1-k) b(v)^2 / v of a
    scientist with idea quality v, interpolated from the schedule."""
    _check_match(env, mech, schedule)
    v = float(v)
    if not env.quality.lower <= v <= env.quality.upper:
        raise ParameterError(
            f"quality {v} outside support [{env.quality.lower}, {env.quality.upper}]"
        )
    b = float(np.interp(v, schedule.v, schedule.b))
    eta = float(np.interp(v, schedule.v, schedule.eta))
    return v * eta - (1.0 - env.k) * b * b / v


def _check_match(env: ContestEnvironment, mech: MechanismSpec, schedule: BidSchedule):
    if schedule.mechanism != mech or schedule.env != env:
        raise ParameterError("schedule was solved under a different environment or mechanism")
