"""Numerics shared by every decision rule.

Three ingredients live here: beta distribution tails, a beta-binomial whose
number of trials may be fractional, and weighted isotonic regression. The
fractional-trials beta-binomial is the one piece with no off-the-shelf
implementation: the summation index stays integral while the binomial
coefficient generalises through the gamma function, so the mass function is
well defined for any real trials >= 0.

Everything is computed in log space and summed with ``math.fsum`` so that
prefix sums of forty-odd terms stay exact to the last few ulps.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from scipy.special import betainc

__all__ = [
    "DomainError",
    "Probability",
    "BetaShape",
    "as_probability",
    "log_gamma",
    "beta_binomial_pmf",
    "beta_binomial_cdf",
    "beta_cdf",
    "beta_sf",
    "pava_isotonic",
]

Probability = float


class DomainError(ValueError):
    """An argument fell outside an operation's mathematical domain."""


def as_probability(value: float, what: str = "probability") -> Probability:
    """Validate that ``value`` is a finite number in [0, 1] and return it."""
    v = float(value)
    if not 0.0 <= v <= 1.0:
        raise DomainError(f"{what} must lie in [0, 1], got {value!r}")
    return v


@dataclass(frozen=True)
class BetaShape:
    """Shape pair of a Beta distribution; both parameters strictly positive."""

    alpha: float
    beta: float

    def __post_init__(self) -> None:
        ok = (
            math.isfinite(self.alpha)
            and math.isfinite(self.beta)
            and self.alpha > 0.0
            and self.beta > 0.0
        )
        if not ok:
            raise DomainError(
                f"beta shape parameters must be finite and > 0, "
                f"got alpha={self.alpha!r} beta={self.beta!r}"
            )

    @property
    def mean(self) -> float:
        return self.alpha / (self.alpha + self.beta)

    @property
    def sd(self) -> float:
        s = self.alpha + self.beta
        return math.sqrt(self.alpha * self.beta / (s * s * (s + 1.0)))


def log_gamma(x: float) -> float:
    """log Gamma(x) for x > 0. Thin domain-checked wrapper over math.lgamma."""
    if not (math.isfinite(x) and x > 0.0):
        raise DomainError(f"log_gamma needs a finite x > 0, got {x!r}")
    return math.lgamma(x)


def _log_beta(a: float, b: float) -> float:
    return math.lgamma(a) + math.lgamma(b) - math.lgamma(a + b)


def _check_trials(trials: float) -> float:
    t = float(trials)
    if not (math.isfinite(t) and t >= 0.0):
        raise DomainError(f"trials must be finite and >= 0, got {trials!r}")
    return t


def beta_binomial_pmf(k: int, trials: float, shape: BetaShape) -> Probability:
    """P(X = k) where X | p ~ Binomial(trials, p), p ~ Beta(shape).

    ``trials`` may be fractional; ``k`` must be an integer in
    [0, floor(trials)]. With trials == 0 the only admissible k is 0 and the
    mass is 1.
    """
    t = _check_trials(trials)
    if k != int(k):
        raise DomainError(f"k must be an integer, got {k!r}")
    k = int(k)
    if k < 0 or k > math.floor(t):
        raise DomainError(f"k must lie in [0, floor(trials)], got k={k} trials={t}")
    log_coef = math.lgamma(t + 1.0) - math.lgamma(k + 1.0) - math.lgamma(t - k + 1.0)
    log_mass = _log_beta(k + shape.alpha, t - k + shape.beta) - _log_beta(
        shape.alpha, shape.beta
    )
    return math.exp(log_coef + log_mass)


def beta_binomial_cdf(k_max: float, trials: float, shape: BetaShape) -> Probability:
    """Inclusive lower tail P(X <= k_max) of the beta-binomial above.

    ``k_max`` below 0 gives 0; at or above floor(trials) gives the full mass.
    The value is the exact ``fsum`` prefix of ``beta_binomial_pmf`` terms.
    """
    t = _check_trials(trials)
    if not math.isfinite(float(k_max)):
        raise DomainError(f"k_max must be finite, got {k_max!r}")
    top = min(math.floor(float(k_max)), math.floor(t))
    if top < 0:
        return 0.0
    return math.fsum(beta_binomial_pmf(k, t, shape) for k in range(top + 1))


def beta_cdf(x: float, shape: BetaShape) -> Probability:
    """Lower tail P(p <= x) of Beta(shape) via the regularized incomplete beta."""
    x = as_probability(x, "x")
    return float(betainc(shape.alpha, shape.beta, x))


def beta_sf(x: float, shape: BetaShape) -> Probability:
    """Upper tail P(p > x) of Beta(shape).

    Computed as the mirrored lower tail betainc(beta, alpha, 1 - x) rather
    than 1 - beta_cdf(x), which keeps precision when the tail is small.
    """
    x = as_probability(x, "x")
    return float(betainc(shape.beta, shape.alpha, 1.0 - x))


def pava_isotonic(values: list[float], weights: list[float]) -> list[float]:
    """Weighted least-squares nondecreasing fit (pool adjacent violators).

    Returns the fitted sequence; ties created by pooling share their block's
    weighted mean. Weights must be strictly positive.
    """
    if len(values) != len(weights):
        raise DomainError("values and weights must have equal length")
    if not values:
        raise DomainError("pava_isotonic needs at least one point")
    # blocks hold (weight sum, weighted value sum, run length)
    blocks: list[list[float]] = []
    for v, w in zip(values, weights):
        w = float(w)
        if not (math.isfinite(w) and w > 0.0):
            raise DomainError(f"weights must be finite and > 0, got {w!r}")
        blocks.append([w, w * float(v), 1.0])
        while len(blocks) >= 2:
            w2, s2, c2 = blocks[-1]
            w1, s1, c1 = blocks[-2]
            if s2 / w2 >= s1 / w1:
                break
            blocks[-2] = [w1 + w2, s1 + s2, c1 + c2]
            blocks.pop()
    fitted: list[float] = []
    for w, s, c in blocks:
        fitted.extend([s / w] * int(c))
    return fitted
