"""Command-line interface.

Every subcommand emits CSV with a fixed header (or plain key=value lines for
`simple eval`).  Files are written atomically (temp file then rename).  Flag
values override config-file values, which override the built-in defaults; the
config file is TOML with one section per subcommand, keys named after flags:

    [sweep]
    externality = "inverse-cost"
    r = 2.0

Exit codes: 0 success, 2 validation or usage error, 1 numerical failure.
"""

from __future__ import annotations

import argparse
import os
import sys
import tempfile

import numpy as np

try:
    import tomllib
except ModuleNotFoundError:  # Python 3.10
    import tomli as tomllib

from . import closed_form, mc, planner, survey
from .equilibrium import MechanismSpec, solve_bid_schedule
from .errors import NumericalError, ParameterError, SchemaError
from .planner import DEFAULT_PAYLINES, DEFAULT_SWEEP_GRID, ExternalitySpec
from .quality import ClaytonCopula, QualityDistribution
from .equilibrium import ContestEnvironment

MC_CHECK_PAYLINES = "0.05,0.1,0.2,0.3,0.5,1.0"

DEFAULTS = {
    "simple.eval": {"n": 2, "v": 1.0, "c": 1.0, "m": 1.0, "w": 0.0},
    "simple.sweep": {"n_min": 2, "n_max": 20, "v": 1.0, "c": 1.0, "m": 1.0, "w": 0.0,
                     "out": None},
    "bids": {"payline": 0.2, "lottery_line": None, "funded_fraction": None,
             "recoup": 1.0 / 3.0, "multiplier": 1.0, "theta": 10.0, "grid": 2001,
             "out": None},
    "sweep": {"paylines": None, "externality": "none", "r": None,
              "recoup": 1.0 / 3.0, "multiplier": 1.0, "theta": 10.0,
              "grid": DEFAULT_SWEEP_GRID, "out": None},
    "figure4": {"panel": "a", "recoup": 1.0 / 3.0, "theta": 10.0,
                "grid": DEFAULT_SWEEP_GRID, "out": None},
    "mc-check": {"paylines": MC_CHECK_PAYLINES, "externality": "none", "r": None,
                 "applicants": 100000, "replications": 20, "seed": 0,
                 "recoup": 1.0 / 3.0, "multiplier": 1.0, "theta": 10.0,
                 "grid": DEFAULT_SWEEP_GRID, "out": None},
    "survey.instrument": {"input": None, "out": None},
    "survey.summarize": {"input": None, "out": None},
    "survey.poisson": {"input": None, "outcome": "hrs_research",
                       "regressors": "hrs_fundraising,hrs_other",
                       "transform": "log", "grant_spline": None, "out": None},
}


def _fmt(x) -> str:
    if x is None:
        return ""
    if isinstance(x, float):
        return format(x, ".12g")
    return str(x)


def write_csv(out, header, rows):
    """Write rows to `out` atomically, or to stdout when out is None/'-'."""
    lines = [",".join(header)]
    lines += [",".join(_fmt(x) for x in row) for row in rows]
    text = "\n".join(lines) + "\n"
    if out is None or out == "-":
        sys.stdout.write(text)
        return
    directory = os.path.dirname(os.path.abspath(out))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".grantcontest-", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, out)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _parse_paylines(text: str) -> list[float]:
    try:
        values = [float(tok) for tok in text.split(",") if tok.strip()]
    except ValueError:
        raise ParameterError(f"could not parse payline list {text!r}") from None
    if not values:
        raise ParameterError("empty payline list")
    return values


def _environment(opts) -> ContestEnvironment:
    return ContestEnvironment(
        quality=QualityDistribution(),
        noise=ClaytonCopula(theta=opts["theta"]),
        k=opts["recoup"],
        m=opts.get("multiplier", 1.0),
    )


def _externality(opts) -> ExternalitySpec:
    kind = opts["externality"]
    if kind == "inverse-cost":
        if opts["r"] is None:
            raise ParameterError("--r is required with --externality inverse-cost")
        return ExternalitySpec.inverse_cost(opts["r"])
    if opts.get("r") is not None:
        raise ParameterError(f"--r only applies to inverse-cost, not {kind!r}")
    if kind == "none":
        return ExternalitySpec.none()
    if kind == "partial-completion":
        return ExternalitySpec.partial_completion()
    raise ParameterError(f"unknown externality {kind!r}")


# ---------------------------------------------------------------------------
# subcommand bodies

def cmd_simple_eval(opts) -> int:
    params = closed_form.SimpleContestParams(
        n=opts["n"], v=opts["v"], c=opts["c"], m=opts["m"], w=opts["w"]
    )
    print(f"effort_per_scientist = {_fmt(closed_form.equilibrium_effort(params))}")
    print(f"contest_value = {_fmt(closed_form.contest_value(params))}")
    print(f"lottery_value = {_fmt(closed_form.lottery_value(params))}")
    print(
        "contest_value_with_externality = "
        f"{_fmt(closed_form.contest_value_with_externality(params))}"
    )
    print(
        "competition_externality_cross_partial = "
        f"{_fmt(closed_form.competition_externality_cross_partial(params))}"
    )
    return 0


def cmd_simple_sweep(opts) -> int:
    if opts["n_min"] < 2 or opts["n_max"] < opts["n_min"]:
        raise ParameterError("need 2 <= n-min <= n-max")
    rows = []
    for n in range(int(opts["n_min"]), int(opts["n_max"]) + 1):
        params = closed_form.SimpleContestParams(
            n=n, v=opts["v"], c=opts["c"], m=opts["m"], w=opts["w"]
        )
        rows.append(
            (
                n,
                closed_form.equilibrium_effort(params),
                closed_form.contest_value(params),
                closed_form.lottery_value(params),
                closed_form.contest_value_with_externality(params),
                closed_form.competition_externality_cross_partial(params),
            )
        )
    write_csv(
        opts["out"],
        ("n", "effort", "contest_value", "lottery_value",
         "contest_value_with_externality", "cross_partial"),
        rows,
    )
    return 0


def cmd_bids(opts) -> int:
    env = _environment({**opts, "multiplier": opts["multiplier"]})
    if opts["lottery_line"] is not None:
        if opts["funded_fraction"] is None:
            raise ParameterError("--funded-fraction is required with --lottery-line")
        mech = MechanismSpec.lottery(opts["lottery_line"], opts["funded_fraction"])
    else:
        if opts["funded_fraction"] is not None:
            raise ParameterError("--funded-fraction only applies with --lottery-line")
        mech = MechanismSpec.payline(opts["payline"])
    schedule = solve_bid_schedule(env, mech, int(opts["grid"]))
    rows = zip(schedule.v, schedule.u, schedule.b, schedule.eta, schedule.payoff)
    write_csv(opts["out"], ("v", "u", "b", "eta", "payoff"), rows)
    return 0


def cmd_sweep(opts) -> int:
    env = _environment(opts)
    ext = _externality(opts)
    paylines = (
        list(DEFAULT_PAYLINES) if opts["paylines"] is None
        else _parse_paylines(opts["paylines"])
    )
    outcomes = planner.payline_sweep(env, paylines, ext, grid_size=int(opts["grid"]))
    rows = [
        (o.mechanism.p, ext.kind, ext.r, o.benefit, o.cost, o.externality, o.productivity)
        for o in outcomes
    ]
    write_csv(
        opts["out"],
        ("payline", "kind", "r", "benefit", "cost", "externality", "productivity"),
        rows,
    )
    return 0


FIGURE4_PANELS = {
    "a": [
        ("no-externality", ExternalitySpec.none()),
        ("inverse-cost-r0.5", ExternalitySpec.inverse_cost(0.5)),
        ("inverse-cost-r1", ExternalitySpec.inverse_cost(1.0)),
        ("inverse-cost-r2", ExternalitySpec.inverse_cost(2.0)),
    ],
    "b": [
        ("inverse-cost-r2", ExternalitySpec.inverse_cost(2.0)),
        ("partial-completion", ExternalitySpec.partial_completion()),
    ],
}


def cmd_figure4(opts) -> int:
    if opts["panel"] not in FIGURE4_PANELS:
        raise ParameterError(f"panel must be 'a' or 'b', got {opts['panel']!r}")
    env = _environment(opts)
    paylines = list(DEFAULT_PAYLINES)
    rows = []
    for label, ext in FIGURE4_PANELS[opts["panel"]]:
        outcomes = planner.payline_sweep(env, paylines, ext, grid_size=int(opts["grid"]))
        rows += [(o.mechanism.p, label, o.productivity) for o in outcomes]
        if label == "inverse-cost-r0.5":
            spread = planner.productivity_spread(outcomes)
            print(
                f"note: inverse-cost r=0.5 productivity spread (max-min) across "
                f"paylines = {spread:.6g}; the curve is flattened, not exactly flat",
                file=sys.stderr,
            )
    write_csv(opts["out"], ("payline", "curve", "productivity"), rows)
    return 0


def cmd_mc_check(opts) -> int:
    env = _environment(opts)
    ext = _externality(opts)
    paylines = _parse_paylines(opts["paylines"])
    rows = []
    for index, p in enumerate(paylines):
        mech = MechanismSpec.payline(p)
        schedule = solve_bid_schedule(env, mech, int(opts["grid"]))
        analytic = planner.evaluate(env, mech, schedule, ext).productivity
        config = mc.SimulationConfig(
            applicants=int(opts["applicants"]),
            replications=int(opts["replications"]),
            seed=int(opts["seed"]) + index,
            env=env,
            mechanism=mech,
            schedule=schedule,
            externality=ext,
        )
        result = mc.simulate(config)
        z = (
            (result.productivity - analytic) / result.productivity_se
            if result.productivity_se > 0
            else 0.0
        )
        rows.append(
            (p, ext.kind, ext.r, analytic, result.productivity, result.productivity_se, z)
        )
    write_csv(
        opts["out"],
        ("payline", "kind", "r", "analytic", "simulated", "std_error", "z"),
        rows,
    )
    return 0


def cmd_survey_instrument(opts) -> int:
    if opts["input"] is None:
        raise ParameterError("--input is required")
    records, _ = survey.load_and_filter(opts["input"])
    values = survey.jackknife_instrument(records)
    rows = [(r.id, r.field, z) for r, z in zip(records, values)]
    write_csv(opts["out"], ("id", "field", "instrument"), rows)
    return 0


def cmd_survey_summarize(opts) -> int:
    if opts["input"] is None:
        raise ParameterError("--input is required")
    records, report = survey.load_and_filter(opts["input"])
    print(f"rejections: {report.as_dict()}", file=sys.stderr)
    rows = [
        (s.variable, s.count, s.mean, s.sd, "true" if s.degenerate else "false")
        for s in survey.summarize(records)
    ]
    write_csv(opts["out"], ("variable", "count", "mean", "sd", "degenerate"), rows)
    return 0


def cmd_survey_poisson(opts) -> int:
    if opts["input"] is None:
        raise ParameterError("--input is required")
    records, _ = survey.load_and_filter(opts["input"])
    regressors = [tok for tok in opts["regressors"].split(",") if tok.strip()]
    fit = survey.poisson_fit(
        records,
        outcome=opts["outcome"],
        regressors=regressors,
        transform=opts["transform"],
        include_grant_spline=bool(opts["grant_spline"]),
    )
    print(
        f"loglik = {fit.loglik:.6f}, iterations = {fit.iterations}, "
        f"converged = {fit.converged}",
        file=sys.stderr,
    )
    rows = [(t, fit.coefficients[t], fit.robust_se[t]) for t in fit.terms]
    write_csv(opts["out"], ("term", "coefficient", "robust_se"), rows)
    return 0


# ---------------------------------------------------------------------------
# argument plumbing

def _add(parser, flag, kind, help_text):
    if kind is bool:
        parser.add_argument(flag, action="store_true", default=None, help=help_text)
    else:
        parser.add_argument(flag, type=kind, default=None, help=help_text)


def build_parser() -> argparse.ArgumentParser:
    root = argparse.ArgumentParser(
        prog="grantcontest",
        description="Funding-contest equilibria, productivity sweeps, and survey tools.",
    )
    root.add_argument("--config", default=None,
                      help="TOML config file; one section per subcommand (default: none)")
    sub = root.add_subparsers(dest="command", required=True)

    simple = sub.add_parser("simple", help="closed-form contest vs lottery model")
    ssub = simple.add_subparsers(dest="subcommand", required=True)
    se = ssub.add_parser("eval", help="evaluate the closed forms at one parameter point")
    _add(se, "--n", int, "number of scientists, integer >= 2 (default 2)")
    _add(se, "--v", float, "prize value in utils, > 0 (default 1.0)")
    _add(se, "--c", float, "effort cost per unit in utils, > 0 (default 1.0)")
    _add(se, "--m", float, "social multiplier, >= 1 (default 1.0)")
    _add(se, "--w", float, "per-unit effort spillover in utils, any sign (default 0.0)")
    sw = ssub.add_parser("sweep", help="sweep the closed forms over n")
    for flag, h in (("--n-min", "smallest n (default 2)"), ("--n-max", "largest n (default 20)")):
        _add(sw, flag, int, h)
    _add(sw, "--v", float, "prize value in utils (default 1.0)")
    _add(sw, "--c", float, "effort cost per unit in utils (default 1.0)")
    _add(sw, "--m", float, "social multiplier (default 1.0)")
    _add(sw, "--w", float, "per-unit effort spillover in utils (default 0.0)")
    _add(sw, "--out", str, "output CSV path (default stdout)")

    bids = sub.add_parser("bids", help="solve and emit an equilibrium bid schedule")
    _add(bids, "--payline", float, "fraction funded by rank, in (0, 1] (default 0.2)")
    _add(bids, "--lottery-line", float, "lottery qualification line l in (0, 1] (default: payline mode)")
    _add(bids, "--funded-fraction", float, "lottery funded share f with 0 < f <= l (default: none)")
    _add(bids, "--recoup", float, "cost share recouped as research, in [0, 1) (default 1/3)")
    _add(bids, "--multiplier", float, "social multiplier m >= 1 (default 1.0)")
    _add(bids, "--theta", float, "review-noise coupling, > 0 (default 10.0)")
    _add(bids, "--grid", int, "rank-grid points, >= 101 (default 2001)")
    _add(bids, "--out", str, "output CSV path (default stdout)")

    swp = sub.add_parser("sweep", help="payline sweep of planner productivity")
    _add(swp, "--paylines", str, "comma-separated paylines (default 0.02..1.00 step 0.02)")
    _add(swp, "--externality", str, "none | inverse-cost | partial-completion (default none)")
    _add(swp, "--r", float, "inverse-cost shape, > 0 (required for inverse-cost)")
    _add(swp, "--recoup", float, "cost share recouped, in [0, 1) (default 1/3)")
    _add(swp, "--multiplier", float, "social multiplier m >= 1 (default 1.0)")
    _add(swp, "--theta", float, "review-noise coupling, > 0 (default 10.0)")
    _add(swp, "--grid", int, f"rank-grid points (default {DEFAULT_SWEEP_GRID})")
    _add(swp, "--out", str, "output CSV path (default stdout)")

    fig = sub.add_parser("figure4", help="emit the externality comparison curves")
    _add(fig, "--panel", str, "a (externality size) or b (externality form) (default a)")
    _add(fig, "--recoup", float, "cost share recouped, in [0, 1) (default 1/3)")
    _add(fig, "--theta", float, "review-noise coupling, > 0 (default 10.0)")
    _add(fig, "--grid", int, f"rank-grid points (default {DEFAULT_SWEEP_GRID})")
    _add(fig, "--out", str, "output CSV path (default stdout)")

    mcc = sub.add_parser("mc-check", help="Monte Carlo cross-check of planner productivity")
    _add(mcc, "--paylines", str, f"comma-separated paylines (default {MC_CHECK_PAYLINES})")
    _add(mcc, "--externality", str, "none | inverse-cost | partial-completion (default none)")
    _add(mcc, "--r", float, "inverse-cost shape, > 0 (required for inverse-cost)")
    _add(mcc, "--applicants", int, "applicants per replication, >= 100 (default 100000)")
    _add(mcc, "--replications", int, "replications per payline, >= 1 (default 20)")
    _add(mcc, "--seed", int, "base RNG seed, unsigned 64-bit (default 0)")
    _add(mcc, "--recoup", float, "cost share recouped, in [0, 1) (default 1/3)")
    _add(mcc, "--multiplier", float, "social multiplier m >= 1 (default 1.0)")
    _add(mcc, "--theta", float, "review-noise coupling, > 0 (default 10.0)")
    _add(mcc, "--grid", int, f"rank-grid points (default {DEFAULT_SWEEP_GRID})")
    _add(mcc, "--out", str, "output CSV path (default stdout)")

    srv = sub.add_parser("survey", help="survey-data constructions")
    vsub = srv.add_subparsers(dest="subcommand", required=True)
    vi = vsub.add_parser("instrument", help="leave-one-out funding-intensity instrument")
    _add(vi, "--input", str, "survey CSV path (required)")
    _add(vi, "--out", str, "output CSV path (default stdout)")
    vs = vsub.add_parser("summarize", help="count/mean/sd per variable")
    _add(vs, "--input", str, "survey CSV path (required)")
    _add(vs, "--out", str, "output CSV path (default stdout)")
    vp = vsub.add_parser("poisson", help="log-link Poisson regression with robust SEs")
    _add(vp, "--input", str, "survey CSV path (required)")
    _add(vp, "--outcome", str, "outcome variable (default hrs_research)")
    _add(vp, "--regressors", str,
         "comma-separated regressors (default hrs_fundraising,hrs_other)")
    _add(vp, "--transform", str, "log | level transform for regressors (default log)")
    _add(vp, "--grant-spline", bool,
         "add a restricted-cubic-spline control in expected grant funding (default off)")
    _add(vp, "--out", str, "output CSV path (default stdout)")
    return root


COMMANDS = {
    "simple.eval": cmd_simple_eval,
    "simple.sweep": cmd_simple_sweep,
    "bids": cmd_bids,
    "sweep": cmd_sweep,
    "figure4": cmd_figure4,
    "mc-check": cmd_mc_check,
    "survey.instrument": cmd_survey_instrument,
    "survey.summarize": cmd_survey_summarize,
    "survey.poisson": cmd_survey_poisson,
}


def _resolve_options(ns: argparse.Namespace, command: str) -> dict:
    """Merge flags, config-file section and defaults (in that precedence)."""
    section: dict = {}
    if ns.config is not None:
        with open(ns.config, "rb") as fh:
            table = tomllib.load(fh)
        node = table
        for part in command.split("."):
            node = node.get(part, {}) if isinstance(node, dict) else {}
        section = node if isinstance(node, dict) else {}
    opts = {}
    for key, default in DEFAULTS[command].items():
        flag_value = getattr(ns, key, None)
        if flag_value is not None:
            opts[key] = flag_value
        elif key in section:
            opts[key] = section[key]
        else:
            opts[key] = default
    return opts


def main(argv=None) -> int:
    parser = build_parser()
    ns = parser.parse_args(argv)
    command = ns.command
    if getattr(ns, "subcommand", None):
        command = f"{ns.command}.{ns.subcommand}"
    try:
        opts = _resolve_options(ns, command)
        return COMMANDS[command](opts)
    except (ParameterError, SchemaError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except NumericalError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
