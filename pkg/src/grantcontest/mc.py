"""Discrete-applicant Monte Carlo simulator.

Brute-force validation harness for the analytic pipeline: N applicants draw
idea qualities, bid according to a solved schedule, are noisily ranked through
the copula, and the mechanism funds the top slice by evaluated rank (or runs a
lottery over the top slice).  Planner accounting reuses the same formulas as
the analytic evaluator, so agreement is a genuine end-to-end check of the
equilibrium, the copula sampling, and the quadrature at once.

Ranks inside a simulated pool are empirical (order statistic / N), not the
theoretical cdf value, which keeps the finite-N mechanism self-contained; the
N -> infinity limit is the convergence test.  Randomness comes from numpy's
PCG64 via default_rng, and each replication seeds its own substream from
(seed, replication index), so results are bit-reproducible and independent of
scheduling order.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .equilibrium import LOTTERY, PAYLINE, BidSchedule, ContestEnvironment, MechanismSpec
from .errors import ParameterError
from .planner import EXT_INVERSE_COST, EXT_PARTIAL_COMPLETION, ExternalitySpec, completion_share

RANK_BINS = 100


@dataclass(frozen=True, eq=False)
class SimulationConfig:
    """A reproducible simulation run: identical configs give bit-identical
    outputs."""

    applicants: int
    replications: int
    seed: int
    env: ContestEnvironment
    mechanism: MechanismSpec
    schedule: BidSchedule
    externality: ExternalitySpec = field(default_factory=ExternalitySpec.none)

    def __post_init__(self):
        if self.applicants < 100:
            raise ParameterError(f"need at least 100 applicants, got {self.applicants}")
        if self.replications < 1:
            raise ParameterError(f"need at least 1 replication, got {self.replications}")
        if not 0 <= int(self.seed) < 2**64:
            raise ParameterError(f"seed must be an unsigned 64-bit integer, got {self.seed}")
        if self.schedule.mechanism != self.mechanism or self.schedule.env != self.env:
            raise ParameterError("schedule does not match the configured environment/mechanism")


@dataclass(frozen=True)
class SimulationResult:
    """Replication-averaged planner accounting plus funding frequencies by
    true-rank bin (RANK_BINS equal bins on [0, 1])."""

    productivity: float
    productivity_se: float
    benefit: float
    cost: float
    externality: float
    productivity_per_replication: np.ndarray
    funding_frequency: np.ndarray
    rank_bin_edges: np.ndarray
    awards_per_replication: int


def _draw_pool(rng: np.random.Generator, env: ContestEnvironment, schedule: BidSchedule, n: int):
    """One applicant pool: qualities, empirical ranks, bids, evaluated ranks."""
    v = env.quality.quantile(rng.uniform(size=n))
    rank = np.empty(n)
    rank[np.argsort(v)] = np.arange(1, n + 1) / n
    bids = np.interp(v, schedule.v, schedule.b)
    s = env.noise.conditional_quantile(rank, rng.uniform(size=n))
    return v, rank, bids, s


def _fund(rng: np.random.Generator, mech: MechanismSpec, s: np.ndarray) -> np.ndarray:
    """Boolean funding mask for one pool."""
    n = s.size
    funded = np.zeros(n, dtype=bool)
    if mech.kind == PAYLINE:
        n_awards = int(np.ceil(mech.p * n))
        funded[np.argpartition(s, n - n_awards)[n - n_awards:]] = True
    else:
        n_pool = int(np.ceil(mech.l * n))
        n_awards = int(np.ceil(mech.f * n))
        pool = np.argpartition(s, n - n_pool)[n - n_pool:]
        funded[rng.choice(pool, size=n_awards, replace=False)] = True
    return funded


def simulate(config: SimulationConfig) -> SimulationResult:
    """Run the configured replications and average the per-award accounting."""
    env, mech, ext = config.env, config.mechanism, config.externality
    schedule, n = config.schedule, config.applicants
    n_awards = int(np.ceil(mech.award_share * n))

    prods = np.empty(config.replications)
    bens = np.empty(config.replications)
    costs = np.empty(config.replications)
    exts = np.empty(config.replications)
    freq_funded = np.zeros(RANK_BINS)
    freq_total = np.zeros(RANK_BINS)

    for rep in range(config.replications):
        rng = np.random.default_rng([config.seed, rep])
        v, rank, bids, s = _draw_pool(rng, env, schedule, n)
        funded = _fund(rng, mech, s)

        if ext.kind == EXT_PARTIAL_COMPLETION:
            share = completion_share(bids)
            benefit = env.m * (np.sum(share * v) + np.sum((1.0 - share[funded]) * v[funded]))
            externality = 0.0
        else:
            benefit = env.m * np.sum(v[funded])
            if ext.kind == EXT_INVERSE_COST:
                externality = np.sum(env.k * v * bids ** (1.0 / ext.r))
            else:
                externality = 0.0
        cost = np.sum((1.0 - env.k) * bids**2 / v)

        bens[rep] = benefit / n_awards
        costs[rep] = cost / n_awards
        exts[rep] = externality / n_awards
        prods[rep] = (benefit + externality - cost) / n_awards

        bins = np.minimum((rank * RANK_BINS).astype(int), RANK_BINS - 1)
        np.add.at(freq_funded, bins, funded)
        np.add.at(freq_total, bins, 1.0)

    se = prods.std(ddof=1) / np.sqrt(config.replications) if config.replications > 1 else float("nan")
    return SimulationResult(
        productivity=float(prods.mean()),
        productivity_se=float(se),
        benefit=float(bens.mean()),
        cost=float(costs.mean()),
        externality=float(exts.mean()),
        productivity_per_replication=prods,
        funding_frequency=freq_funded / np.maximum(freq_total, 1.0),
        rank_bin_edges=np.linspace(0.0, 1.0, RANK_BINS + 1),
        awards_per_replication=n_awards,
    )


@dataclass(frozen=True)
class ProbeResult:
    """Expected payoff of a probe applicant across candidate bids.

    gain[i] is the mean payoff advantage of bids[i] over the equilibrium bid,
    estimated with common random numbers; gain_se[i] is the standard error of
    that paired difference.  equilibrium_index marks the schedule bid."""

    quality: float
    bids: np.ndarray
    payoff: np.ndarray
    payoff_se: np.ndarray
    gain: np.ndarray
    gain_se: np.ndarray
    equilibrium_index: int


def best_response_probe(config: SimulationConfig, v: float, bid_grid) -> ProbeResult:
    """Estimate a probe applicant's expected payoff at each candidate bid.

    The probe of quality v joins applicants-1 equilibrium players.  All
    candidate bids within a replication share one pool and one set of review
    draws: moving the probe through the bid order only shifts the ranks of the
    players it passes, so the paired payoff differences against the
    equilibrium bid are low-variance.
    """
    env, mech, schedule = config.env, config.mechanism, config.schedule
    if not env.quality.lower <= v <= env.quality.upper:
        raise ParameterError(f"probe quality {v} outside the quality support")
    n = config.applicants
    n_awards = int(np.ceil(mech.award_share * n))

    b_eq = float(np.interp(v, schedule.v, schedule.b))
    bids = np.unique(np.concatenate([np.asarray(bid_grid, dtype=float), [b_eq]]))
    eq_idx = int(np.searchsorted(bids, b_eq))

    others = np.arange(n - 1)
    payoffs = np.empty((config.replications, bids.size))
    for rep in range(config.replications):
        rng = np.random.default_rng([config.seed, rep])
        v_others = np.sort(env.quality.quantile(rng.uniform(size=n - 1)))
        c = np.interp(v_others, schedule.v, schedule.b)
        q_others = rng.uniform(size=n - 1)
        q_probe = rng.uniform()
        if mech.kind == LOTTERY:
            # one uniform per award slot decides the lottery; the probe only
            # needs its own qualification draw, funded with odds f/l after it
            lottery_draw = rng.uniform()

        # evaluated ranks of the others in both positions they can occupy
        s_keep = env.noise.conditional_quantile((others + 1) / n, q_others)
        s_shift = env.noise.conditional_quantile((others + 2) / n, q_others)

        pos = np.searchsorted(c, bids)                    # probe's slot per bid
        s_probe = env.noise.conditional_quantile((pos + 1) / n, np.full(bids.size, q_probe))
        shifted = others[None, :] >= pos[:, None]
        s_eff = np.where(shifted, s_shift[None, :], s_keep[None, :])
        n_above = np.sum(s_eff > s_probe[:, None], axis=1)

        if mech.kind == PAYLINE:
            funded = n_above <= n_awards - 1
        else:
            n_pool = int(np.ceil(mech.l * n))
            qualified = n_above <= n_pool - 1
            funded = qualified & (lottery_draw < mech.f / mech.l)
        payoffs[rep] = v * funded - (1.0 - env.k) * bids**2 / v

    mean = payoffs.mean(axis=0)
    se = payoffs.std(axis=0, ddof=1) / np.sqrt(config.replications)
    diff = payoffs - payoffs[:, [eq_idx]]
    return ProbeResult(
        quality=v,
        bids=bids,
        payoff=mean,
        payoff_se=se,
        gain=diff.mean(axis=0),
        gain_se=diff.std(axis=0, ddof=1) / np.sqrt(config.replications),
        equilibrium_index=eq_idx,
    )
