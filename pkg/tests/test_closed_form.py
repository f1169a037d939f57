import numpy as np
import pytest

from grantcontest import (
    ParameterError,
    SimpleContestParams,
    competition_externality_cross_partial,
    contest_value,
    contest_value_with_externality,
    equilibrium_effort,
    lottery_value,
)
from grantcontest.closed_form import _externality_social_value


def test_effort_examples():
    assert equilibrium_effort(SimpleContestParams(n=2, v=1, c=1)) == pytest.approx(0.25)
    assert equilibrium_effort(SimpleContestParams(n=10, v=1, c=1)) == pytest.approx(0.09)


def test_effort_decreasing_in_cost():
    cheap = equilibrium_effort(SimpleContestParams(n=5, v=2, c=0.5))
    dear = equilibrium_effort(SimpleContestParams(n=5, v=2, c=2.0))
    assert cheap > dear > 0


def test_effort_matches_tullock_grid_argmax():
    # best response of one player against n-1 opponents at the fixed point,
    # payoff x/(x + (n-1) x*) v - c x over a fine effort grid
    params = SimpleContestParams(n=2, v=1, c=1)
    x_star = equilibrium_effort(params)
    grid = np.linspace(1e-9, 1.0, 100001)
    payoff = grid / (grid + (params.n - 1) * x_star) * params.v - params.c * grid
    assert abs(grid[np.argmax(payoff)] - x_star) <= 2e-5


def test_effort_first_order_condition():
    for n in (2, 3, 7, 40):
        for v, c in ((1.0, 1.0), (3.5, 0.2), (0.7, 9.0)):
            x = equilibrium_effort(SimpleContestParams(n=n, v=v, c=c))
            lhs = v * (n - 1) / (n * n * x)
            assert abs(lhs - c) / c <= 1e-12


def test_contest_value_examples():
    assert contest_value(SimpleContestParams(n=2, v=1, c=1, m=1)) == pytest.approx(0.5)
    big_n = contest_value(SimpleContestParams(n=10_000, v=1, c=1, m=1))
    assert 0 < big_n < 1e-3


def test_contest_value_recomposes_from_effort():
    params = SimpleContestParams(n=10, v=1, c=1, m=2)
    rebuilt = params.m * params.v - params.n * params.c * equilibrium_effort(params)
    assert contest_value(params) == pytest.approx(1.1)
    assert contest_value(params) == pytest.approx(rebuilt, rel=1e-14)


def test_lottery_value():
    assert lottery_value(SimpleContestParams(n=2, v=1, c=1, m=1)) == 1.0
    assert lottery_value(SimpleContestParams(n=5, v=0.5, c=1, m=3)) == 1.5


def test_lottery_strictly_beats_contest_without_spillover():
    for n in (2, 3, 10, 100):
        for m in (1.0, 2.5):
            params = SimpleContestParams(n=n, v=1.3, c=0.8, m=m, w=0.0)
            assert lottery_value(params) > contest_value(params)


def test_externality_value_examples():
    even = SimpleContestParams(n=2, v=1, c=1, m=1, w=1)
    assert contest_value_with_externality(even) == lottery_value(even) == 1.0
    base = SimpleContestParams(n=2, v=1, c=1, m=1, w=0)
    assert contest_value_with_externality(base) == contest_value(base) == 0.5
    hand = SimpleContestParams(n=5, v=1, c=2, m=1, w=1)
    assert contest_value_with_externality(hand) == pytest.approx(0.6)


def test_externality_value_linear_in_w():
    for n, v, c in ((2, 1.0, 1.0), (7, 2.0, 0.5)):
        lo = contest_value_with_externality(SimpleContestParams(n=n, v=v, c=c, w=-1.0))
        mid = contest_value_with_externality(SimpleContestParams(n=n, v=v, c=c, w=0.5))
        hi = contest_value_with_externality(SimpleContestParams(n=n, v=v, c=c, w=2.0))
        slope = (n - 1) * v / (c * n)
        assert (mid - lo) / 1.5 == pytest.approx(slope, rel=1e-12)
        assert (hi - mid) / 1.5 == pytest.approx(slope, rel=1e-12)


def test_spillover_above_cost_beats_lottery():
    params = SimpleContestParams(n=4, v=2, c=1, m=2, w=1.5)
    assert contest_value_with_externality(params) > lottery_value(params)


def test_cross_partial_examples():
    assert competition_externality_cross_partial(
        SimpleContestParams(n=2, v=1, c=1)
    ) == pytest.approx(0.25)
    for n in (2, 3, 11):
        for v, c in ((1.0, 1.0), (4.0, 0.3)):
            assert competition_externality_cross_partial(SimpleContestParams(n=n, v=v, c=c)) > 0


def test_cross_partial_matches_finite_differences():
    h = 1e-4
    for n, v, c, m, w in ((2, 1.0, 1.0, 1.0, 0.0), (6, 2.0, 0.7, 1.5, 0.4)):
        fd = (
            _externality_social_value(n + h, v, c, m, w + h)
            - _externality_social_value(n + h, v, c, m, w - h)
            - _externality_social_value(n - h, v, c, m, w + h)
            + _externality_social_value(n - h, v, c, m, w - h)
        ) / (4 * h * h)
        analytic = competition_externality_cross_partial(
            SimpleContestParams(n=n, v=v, c=c, m=m, w=w)
        )
        assert abs(fd - analytic) <= 1e-6


@pytest.mark.parametrize(
    "kwargs",
    [
        dict(n=1, v=1, c=1),
        dict(n=2.5, v=1, c=1),
        dict(n=2, v=0, c=1),
        dict(n=2, v=1, c=-1),
        dict(n=2, v=1, c=1, m=0.5),
    ],
)
def test_invalid_parameters_rejected(kwargs):
    with pytest.raises(ParameterError):
        SimpleContestParams(**kwargs)


def test_negative_spillover_is_allowed():
    params = SimpleContestParams(n=3, v=1, c=1, w=-2.0)
    assert contest_value_with_externality(params) < contest_value(params)
