"""Time-use survey ingestion, the leave-one-out funding-intensity instrument,
summary statistics, and a log-link Poisson fitter.

The CSV schema is UTF-8 with an LF header row and `.` decimals:

    id,field,hrs_research,hrs_fundraising,hrs_other,grant_expected,grant_guaranteed[,covariate...]

Any extra columns are carried along as named numeric covariates.  Hours are
per week; grant amounts are $M per year.  The analysis subset keeps records
with strictly positive research, other-work and fundraising hours, applied in
that order so the rejection report attributes each drop to the first rule it
trips.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import gammaln

from .errors import ConvergenceError, ParameterError, RankDeficiencyError, SchemaError

REQUIRED_COLUMNS = (
    "id",
    "field",
    "hrs_research",
    "hrs_fundraising",
    "hrs_other",
    "grant_expected",
    "grant_guaranteed",
)

NUMERIC_COLUMNS = REQUIRED_COLUMNS[2:]

GRANT_SPLINE_QUANTILES = (0.05, 0.35, 0.65, 0.95)


@dataclass(frozen=True)
class SurveyRecord:
    id: str
    field: str
    hrs_research: float
    hrs_fundraising: float
    hrs_other: float
    grant_expected: float
    grant_guaranteed: float
    covariates: dict = None  # insertion-ordered name -> value

    def value(self, name: str) -> float:
        if name in NUMERIC_COLUMNS:
            return getattr(self, name)
        if self.covariates and name in self.covariates:
            return self.covariates[name]
        raise ParameterError(f"unknown variable {name!r}")


@dataclass(frozen=True)
class RejectionReport:
    """Drops per sample restriction, in the order the rules are applied."""

    research_zero: int = 0
    other_zero: int = 0
    fundraising_zero: int = 0

    def as_dict(self) -> dict:
        return {
            "research_zero": self.research_zero,
            "other_zero": self.other_zero,
            "fundraising_zero": self.fundraising_zero,
        }


def load_survey(path) -> list[SurveyRecord]:
    """Parse a survey CSV without applying the sample restrictions."""
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise SchemaError(f"{path}: empty file, expected a header row") from None
        missing = [c for c in REQUIRED_COLUMNS if c not in header]
        if missing:
            raise SchemaError(f"{path}: missing required column(s) {', '.join(missing)}")
        covariate_names = [c for c in header if c not in REQUIRED_COLUMNS]
        col = {name: header.index(name) for name in header}

        records = []
        for line_no, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != len(header):
                raise SchemaError(f"{path}:{line_no}: expected {len(header)} fields, got {len(row)}")

            def number(name):
                cell = row[col[name]]
                try:
                    x = float(cell)
                except ValueError:
                    raise SchemaError(
                        f"{path}:{line_no}: column {name!r} is not numeric: {cell!r}"
                    ) from None
                if name in NUMERIC_COLUMNS and x < 0.0:
                    raise SchemaError(f"{path}:{line_no}: column {name!r} is negative: {x}")
                return x

            records.append(
                SurveyRecord(
                    id=row[col["id"]],
                    field=row[col["field"]],
                    hrs_research=number("hrs_research"),
                    hrs_fundraising=number("hrs_fundraising"),
                    hrs_other=number("hrs_other"),
                    grant_expected=number("grant_expected"),
                    grant_guaranteed=number("grant_guaranteed"),
                    covariates={name: number(name) for name in covariate_names},
                )
            )
    return records


def apply_restrictions(records) -> tuple[list[SurveyRecord], RejectionReport]:
    """Keep records with positive research, then other-work, then fundraising
    hours; count drops per rule."""
    kept = [r for r in records if r.hrs_research > 0.0]
    n_research = len(records) - len(kept)
    kept2 = [r for r in kept if r.hrs_other > 0.0]
    n_other = len(kept) - len(kept2)
    kept3 = [r for r in kept2 if r.hrs_fundraising > 0.0]
    n_fundraising = len(kept2) - len(kept3)
    return kept3, RejectionReport(n_research, n_other, n_fundraising)


def load_and_filter(path) -> tuple[list[SurveyRecord], RejectionReport]:
    """Parse a survey CSV and apply the three sample restrictions."""
    return apply_restrictions(load_survey(path))


def jackknife_instrument(records) -> list[float]:
    """Leave-one-out field average of grant dollars per fundraising hour.

    Each record is assigned the mean of grant_expected / hrs_fundraising over
    the other members of its field, so a respondent's own ratio never enters
    their instrument.  Every field needs at least two records and every record
    strictly positive fundraising hours.
    """
    by_field: dict = {}
    for i, r in enumerate(records):
        if not r.hrs_fundraising > 0.0:
            raise ParameterError(
                f"record {r.id!r}: zero fundraising hours, instrument undefined"
            )
        by_field.setdefault(r.field, []).append(i)
    for name, members in by_field.items():
        if len(members) < 2:
            raise ParameterError(f"field {name!r} has a single record; leave-one-out undefined")

    out = [0.0] * len(records)
    for members in by_field.values():
        ratios = [records[i].grant_expected / records[i].hrs_fundraising for i in members]
        total = math.fsum(ratios)
        for i, ratio in zip(members, ratios):
            out[i] = (total - ratio) / (len(members) - 1)
    return out


@dataclass(frozen=True)
class VariableSummary:
    variable: str
    count: int
    mean: float
    sd: float
    degenerate: bool  # single observation, sd reported as 0


def summarize(records) -> list[VariableSummary]:
    """Count, mean and sample sd per numeric variable (two-pass), core
    variables first and covariates after, in first-record order."""
    if not records:
        raise ParameterError("summarize needs at least one record")
    names = list(NUMERIC_COLUMNS) + list((records[0].covariates or {}).keys())
    out = []
    for name in names:
        values = [r.value(name) for r in records]
        n = len(values)
        mean = math.fsum(values) / n
        if n == 1:
            out.append(VariableSummary(name, 1, mean, 0.0, True))
            continue
        sd = math.sqrt(math.fsum((x - mean) ** 2 for x in values) / (n - 1))
        out.append(VariableSummary(name, n, mean, sd, False))
    return out


def restricted_cubic_spline(x: np.ndarray, knots) -> np.ndarray:
    """Restricted cubic spline basis (linear tails), one column per interior
    term: x plus len(knots)-2 curvature columns."""
    x = np.asarray(x, dtype=float)
    t = np.asarray(knots, dtype=float)
    if t.size < 3 or np.any(np.diff(t) <= 0):
        raise ParameterError("spline knots must be at least 3 strictly increasing values")
    scale = (t[-1] - t[0]) ** 2
    cols = [x]
    for j in range(t.size - 2):
        term = (
            np.maximum(x - t[j], 0.0) ** 3
            - np.maximum(x - t[-2], 0.0) ** 3 * (t[-1] - t[j]) / (t[-1] - t[-2])
            + np.maximum(x - t[-1], 0.0) ** 3 * (t[-2] - t[j]) / (t[-1] - t[-2])
        )
        cols.append(term / scale)
    return np.column_stack(cols)


def grant_spline_knots(records) -> np.ndarray:
    """Knots for the grant control: quantiles (0.05, 0.35, 0.65, 0.95) of
    expected grant funding."""
    g = np.asarray([r.grant_expected for r in records], dtype=float)
    return np.quantile(g, GRANT_SPLINE_QUANTILES)


@dataclass(frozen=True)
class PoissonFit:
    """Log-link Poisson fit: coefficients and sandwich standard errors keyed
    by term name, plus the quasi-log-likelihood and IRLS iteration count."""

    terms: tuple
    coefficients: dict
    robust_se: dict
    loglik: float
    iterations: int
    converged: bool


def _design_matrix(records, regressors, transform, include_grant_spline):
    names = ["intercept"]
    cols = [np.ones(len(records))]
    for name in regressors:
        raw = np.asarray([r.value(name) for r in records], dtype=float)
        if transform == "log":
            if np.any(raw <= 0.0):
                raise ParameterError(f"regressor {name!r} must be positive for log transform")
            cols.append(np.log(raw))
            names.append(f"log_{name}")
        elif transform == "level":
            cols.append(raw)
            names.append(name)
        else:
            raise ParameterError(f"transform must be 'log' or 'level', got {transform!r}")
    if include_grant_spline:
        g = np.asarray([r.grant_expected for r in records], dtype=float)
        basis = restricted_cubic_spline(g, grant_spline_knots(records))
        for j in range(basis.shape[1]):
            cols.append(basis[:, j])
            names.append(f"grant_spline_{j + 1}")
    return names, np.column_stack(cols)


def poisson_fit(
    records,
    outcome: str,
    regressors=(),
    transform: str = "log",
    include_grant_spline: bool = False,
    max_iter: int = 50,
    tol: float = 1e-8,
) -> PoissonFit:
    """Fit E[y | X] = exp(X beta) by iteratively reweighted least squares.

    The outcome must be nonnegative but need not be integer (hours are fine;
    this is a quasi-likelihood fit).  Convergence requires the score X'(y-mu)
    to vanish to `tol` in max norm.  Standard errors are
    heteroskedasticity-robust (sandwich); no model-based flavor is offered.
    """
    if not records:
        raise ParameterError("poisson_fit needs at least one record")
    y = np.asarray([r.value(outcome) for r in records], dtype=float)
    if np.any(y < 0.0):
        raise ParameterError(f"outcome {outcome!r} must be nonnegative")
    names, X = _design_matrix(records, regressors, transform, include_grant_spline)

    _, singular, vt = np.linalg.svd(X, full_matrices=False)
    cutoff = singular[0] * max(X.shape) * np.finfo(float).eps
    if singular[-1] <= cutoff:
        null_space = vt[singular <= cutoff]
        involved = np.any(np.abs(null_space) > 1e-8, axis=0)
        collinear = [n for n, flag in zip(names, involved) if flag]
        raise RankDeficiencyError(f"design matrix is rank deficient; collinear column(s): "
                                  f"{', '.join(collinear)}")

    # standard GLM start: eta from a damped version of the outcome
    mu = y + y.mean() * 0.5 + 0.1
    eta = np.log(mu)
    beta = np.zeros(X.shape[1])
    converged = False
    iterations = 0
    for iterations in range(1, max_iter + 1):
        w = mu
        z = eta + (y - mu) / mu
        xtw = X.T * w
        beta = np.linalg.solve(xtw @ X, xtw @ z)
        eta = X @ beta
        mu = np.exp(eta)
        score = X.T @ (y - mu)
        if converged:
            break  # one polishing step past tolerance; Newton is quadratic here
        if np.max(np.abs(score)) <= tol:
            converged = True
    if not converged:
        raise ConvergenceError(
            f"IRLS did not converge in {max_iter} iterations "
            f"(max score {np.max(np.abs(score)):.3e})"
        )

    bread = np.linalg.inv(X.T @ (X * mu[:, None]))
    meat = X.T @ (X * ((y - mu) ** 2)[:, None])
    cov = bread @ meat @ bread
    se = np.sqrt(np.diag(cov))

    with np.errstate(divide="ignore", invalid="ignore"):
        loglik = float(np.sum(np.where(y > 0.0, y * np.log(mu), 0.0) - mu - gammaln(y + 1.0)))

    return PoissonFit(
        terms=tuple(names),
        coefficients=dict(zip(names, beta.tolist())),
        robust_se=dict(zip(names, se.tolist())),
        loglik=loglik,
        iterations=iterations,
        converged=converged,
    )
