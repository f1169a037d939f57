"""Idea-quality distribution and the review-noise copula.

Idea quality v lives on [0.25, 1] with cdf F(v) = 1 - (16/9)(1-v)^2.  Review
noise links the true quality rank u = F(v) of an application to its evaluated
rank s through a Clayton copula: funding decisions condition on s, not u.  The
copula operates on ranks; because equilibrium bids are strictly increasing in
quality, the rank of an application's quality and the rank of the underlying
idea coincide, so no distinction is needed.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ParameterError

SUPPORT_LO = 0.25
SUPPORT_HI = 1.0


def _maybe_scalar(x: np.ndarray):
    """Return a python float for 0-d results, the array otherwise."""
    return float(x) if x.ndim == 0 else x


@dataclass(frozen=True)
class QualityDistribution:
    """Distribution of idea quality on [0.25, 1].

    cdf(v) = 1 - (16/9)(1-v)^2, density (32/9)(1-v), mean exactly 1/2.
    """

    lower: float = SUPPORT_LO
    upper: float = SUPPORT_HI

    def __post_init__(self):
        if (self.lower, self.upper) != (SUPPORT_LO, SUPPORT_HI):
            raise ParameterError(
                f"quality support is fixed at [{SUPPORT_LO}, {SUPPORT_HI}]"
            )

    def cdf(self, v):
        """Probability that idea quality is at most v.  Total function: clamps
        to 0 below the support and 1 above it."""
        v = np.asarray(v, dtype=float)
        out = 1.0 - (16.0 / 9.0) * (1.0 - v) ** 2
        out = np.where(v <= self.lower, 0.0, out)
        out = np.where(v >= self.upper, 1.0, out)
        return _maybe_scalar(out)

    def density(self, v):
        """Density (32/9)(1-v) on the support, 0 outside."""
        v = np.asarray(v, dtype=float)
        out = (32.0 / 9.0) * (1.0 - v)
        out = np.where((v < self.lower) | (v > self.upper), 0.0, out)
        return _maybe_scalar(out)

    def quantile(self, u):
        """Inverse cdf: quantile(u) = 1 - (3/4) sqrt(1 - u) for u in [0, 1]."""
        u = np.asarray(u, dtype=float)
        if np.any(u < 0.0) or np.any(u > 1.0):
            raise ParameterError("quantile argument must lie in [0, 1]")
        return _maybe_scalar(1.0 - 0.75 * np.sqrt(1.0 - u))


@dataclass(frozen=True)
class ClaytonCopula:
    """Clayton copula C(u, s) = (u^-theta + s^-theta - 1)^(-1/theta).

    u is the true quality rank of an application, s its evaluated rank after a
    noisy review.  theta > 0 controls how informative review is; larger theta
    means tighter coupling between the two ranks.
    """

    theta: float = 10.0

    def __post_init__(self):
        if not self.theta > 0.0:
            raise ParameterError(f"theta must be positive, got {self.theta}")

    def cdf(self, u, s):
        """Joint cdf with uniform margins; C(u, 0) = C(0, s) = 0."""
        u = np.asarray(u, dtype=float)
        s = np.asarray(s, dtype=float)
        t = self.theta
        with np.errstate(divide="ignore", over="ignore"):
            base = u ** (-t) + s ** (-t) - 1.0
            out = base ** (-1.0 / t)
        out = np.where((u <= 0.0) | (s <= 0.0), 0.0, out)
        out = np.minimum(out, 1.0)
        return _maybe_scalar(out)

    def conditional_cdf(self, u, s):
        """Probability the evaluated rank is at most s given true rank u.

        Closed form (1 + u^theta (s^-theta - 1))^(-(theta+1)/theta), evaluated
        in log space so extreme ranks neither overflow nor lose precision.
        Boundary conventions: 1 at s = 1 for any u; 0 at s = 0; the u -> 0
        limit is 1 for s in (0, 1), so a bottom-ranked application is almost
        surely evaluated below any interior threshold.
        """
        u = np.asarray(u, dtype=float)
        s = np.asarray(s, dtype=float)
        t = self.theta
        with np.errstate(divide="ignore", invalid="ignore"):
            log_u_term = t * np.log(u)
            neg_log_s_term = -t * np.log(s)  # >= 0 on (0, 1]
            # log of u^t (s^-t - 1), written to stay finite for tiny s
            log_arg = log_u_term + neg_log_s_term + np.log1p(-np.exp(-neg_log_s_term))
            out = np.exp(-(t + 1.0) / t * np.logaddexp(0.0, log_arg))
        out = np.where(s >= 1.0, 1.0, out)
        out = np.where(s <= 0.0, 0.0, out)
        out = np.where((u <= 0.0) & (s > 0.0) & (s < 1.0), 1.0, out)
        return _maybe_scalar(out)

    def conditional_quantile(self, u, q):
        """Evaluated rank s solving conditional_cdf(u, s) = q.

        Closed form (1 + u^-theta (q^(-theta/(theta+1)) - 1))^(-1/theta);
        requires u in (0, 1] and q in (0, 1).
        """
        u = np.asarray(u, dtype=float)
        q = np.asarray(q, dtype=float)
        if np.any(u <= 0.0) or np.any(u > 1.0):
            raise ParameterError("conditional_quantile requires u in (0, 1]")
        if np.any(q <= 0.0) or np.any(q >= 1.0):
            raise ParameterError("conditional_quantile requires q in (0, 1)")
        t = self.theta
        neg_log_q_term = -t / (t + 1.0) * np.log(q)  # > 0
        log_arg = -t * np.log(u) + neg_log_q_term + np.log1p(-np.exp(-neg_log_q_term))
        out = np.exp(-np.logaddexp(0.0, log_arg) / t)
        return _maybe_scalar(out)
