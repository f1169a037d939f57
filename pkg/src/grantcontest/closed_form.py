"""Closed-form contest vs lottery comparison for n identical scientists.

A single grant of private value v is awarded either through a Tullock contest
(win probability proportional to effort) or a costless lottery.  Funded ideas
generate social value m*v, effort costs c per unit, and each unit of effort
spills over w in social value regardless of who wins.
"""

from dataclasses import dataclass

from .errors import ParameterError


@dataclass(frozen=True)
class SimpleContestParams:
    """Primitives of the closed-form model.

    n scientists compete for one grant of private value v; effort costs c per
    unit, the funded idea is worth m*v to society (m >= 1), and each unit of
    effort creates w of social value on the side (w < 0 for harmful effort).
    """

    n: int
    v: float
    c: float
    m: float = 1.0
    w: float = 0.0

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 2:
            raise ParameterError(f"n must be an integer >= 2, got {self.n}")
        if not self.v > 0.0:
            raise ParameterError(f"v must be positive, got {self.v}")
        if not self.c > 0.0:
            raise ParameterError(f"c must be positive, got {self.c}")
        if not self.m >= 1.0:
            raise ParameterError(f"m must be at least 1, got {self.m}")


def equilibrium_effort(params: SimpleContestParams) -> float:
    """Symmetric equilibrium effort per scientist, v(n-1)/(c n^2)."""
    n = float(params.n)
    return params.v * (n - 1.0) / (params.c * n * n)


def contest_value(params: SimpleContestParams) -> float:
    """Social value of the contest with no effort spillover, (m - (n-1)/n) v."""
    n = float(params.n)
    return (params.m - (n - 1.0) / n) * params.v


def lottery_value(params: SimpleContestParams) -> float:
    """Social value of a costless lottery, m*v."""
    return params.m * params.v


def contest_value_with_externality(params: SimpleContestParams) -> float:
    """Social value of the contest when effort spills over at rate w.

    Equals (m - (c-w)(n-1)/(c n)) v: the lottery value exactly when w = c,
    above it when w > c.
    """
    return _externality_social_value(
        float(params.n), params.v, params.c, params.m, params.w
    )


def competition_externality_cross_partial(params: SimpleContestParams) -> float:
    """Rate at which the return to extra competition grows with the spillover.

    The mixed second derivative of the spillover-adjusted contest value in
    (n, w), treating n as continuous: v/(c n^2), always positive.
    """
    n = float(params.n)
    return params.v / (params.c * n * n)


def _externality_social_value(n: float, v: float, c: float, m: float, w: float) -> float:
    # real-valued n so comparative statics can be differentiated numerically
    return (m - (c - w) * (n - 1.0) / (c * n)) * v
