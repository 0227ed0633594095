"""Early identification of the MTD via the dose-retainment probability.

The question answered here: if every remaining patient in the trial were
treated at the current dose, how likely is it that the decision rule would
still neither escalate nor de-escalate? That predictive probability, the
dose-retainment probability, is a beta-binomial tail difference: future DLT
counts follow a beta-binomial over the (possibly fractional) remaining
budget, with shape taken from the evidence at the dose, and the retain
region is read off the design's boundary row at the fully enrolled size.

When the probability clears a threshold (doubled at the lowest and highest
dose, where one of the two escape routes does not exist), the trial can stop
and declare the current dose the MTD.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

from .designs import BoundaryTable
from .mathcore import BetaShape, DomainError, as_probability, beta_binomial_cdf
from .tite import DoseSnapshot

__all__ = [
    "RemainingBudget",
    "ThresholdConfig",
    "DosePosition",
    "EarlyStopOutcome",
    "dose_position",
    "effective_shape",
    "retainment_probability",
    "evaluate_early_stop",
]


@dataclass(frozen=True)
class RemainingBudget:
    """Enrollment budget left trial-wide, plus the unobserved slack.

    r counts patients still to enroll (planned N minus enrolled anywhere);
    r_pend adds the unobserved fraction of the current dose's pending
    patients, so it is the effective number of future observations the
    retainment forecast integrates over.
    """

    r: int
    r_pend: float

    def __post_init__(self) -> None:
        if int(self.r) != self.r or self.r < 0:
            raise DomainError(f"r must be an integer >= 0, got {self.r!r}")
        if not (math.isfinite(self.r_pend) and self.r_pend >= self.r - 1e-9):
            raise DomainError(f"r_pend must be finite and >= r, got {self.r_pend!r}")

    @classmethod
    def from_snapshot(cls, r: int, snap: DoseSnapshot) -> "RemainingBudget":
        return cls(r=r, r_pend=r + snap.pend_unobserved_frac)


@dataclass(frozen=True)
class ThresholdConfig:
    """Retainment thresholds: tau for interior doses, tau_edge at the ends."""

    tau: float = 0.4
    tau_edge: float = 0.8

    def __post_init__(self) -> None:
        as_probability(self.tau, "tau")
        as_probability(self.tau_edge, "tau_edge")
        if not 0.0 < self.tau <= self.tau_edge <= 1.0:
            raise DomainError(f"need 0 < tau <= tau_edge <= 1, got ({self.tau}, {self.tau_edge})")


class DosePosition(str, Enum):
    MIN = "min"
    INTERIOR = "interior"
    MAX = "max"


def dose_position(level: int, n_doses: int) -> DosePosition:
    """Positional classification used to pick the threshold and the escape
    routes: the lowest dose cannot de-escalate, the highest cannot escalate."""
    if not 1 <= level <= n_doses:
        raise DomainError(f"dose level {level} outside 1..{n_doses}")
    if n_doses == 1:
        raise DomainError("single-dose trials have no interior/edge distinction")
    if level == 1:
        return DosePosition.MIN
    if level == n_doses:
        return DosePosition.MAX
    return DosePosition.INTERIOR


@dataclass(frozen=True)
class EarlyStopOutcome:
    retainment: float
    threshold_used: float
    identified: bool
    mtd_level: int | None

    def to_dict(self) -> dict:
        return {
            "retainment": self.retainment,
            "threshold_used": self.threshold_used,
            "identified": self.identified,
            "mtd_level": self.mtd_level,
        }


def effective_shape(snap: DoseSnapshot) -> BetaShape:
    """Evidence shape at the dose: (n_dlt, n_e), with a half-count
    continuity adjustment (0.5, n_e + 0.5) when no DLT has been seen."""
    if snap.n < 1:
        raise DomainError("effective_shape needs at least one treated patient")
    if snap.n_e <= 0.0:
        raise DomainError("effective_shape needs positive effective non-DLT follow-up")
    if snap.n_dlt == 0:
        return BetaShape(0.5, snap.n_e + 0.5)
    return BetaShape(float(snap.n_dlt), snap.n_e)


def retainment_probability(
    snap: DoseSnapshot,
    budget: RemainingBudget,
    table: BoundaryTable,
    at_min_dose: bool = False,
    at_max_dose: bool = False,
) -> float:
    """Predictive probability that the current dose is retained after the
    whole remaining budget is spent at it.

    Interior doses lose the dose two ways: enough future DLTs to cross the
    de-escalation boundary, or few enough to cross the escalation boundary.
    At the highest dose the escalation escape does not exist; at the lowest
    dose the de-escalation escape does not exist; with a single dose both
    relaxations apply and the smaller of the two one-sided values is used.
    """
    shape = effective_shape(snap)
    row = table.row(snap.n + budget.r)
    keep_hi = row.deescalate_min - 1 - snap.n_dlt  # largest future-DLT total that avoids de-escalation
    keep_lo = row.escalate_max - snap.n_dlt  # future-DLT totals at or below this escalate away
    stay_tail = beta_binomial_cdf(keep_hi, budget.r_pend, shape)
    escalate_tail = beta_binomial_cdf(keep_lo, budget.r_pend, shape)
    if at_min_dose and at_max_dose:
        value = min(stay_tail, 1.0 - escalate_tail)
    elif at_max_dose:
        value = stay_tail
    elif at_min_dose:
        value = 1.0 - escalate_tail
    else:
        value = stay_tail - escalate_tail
    return min(1.0, max(0.0, value))


def evaluate_early_stop(
    snap: DoseSnapshot,
    budget: RemainingBudget,
    table: BoundaryTable,
    position: DosePosition,
    cfg: ThresholdConfig,
) -> EarlyStopOutcome:
    """Retainment probability, threshold comparison, and the stop verdict."""
    position = DosePosition(position)
    retainment = retainment_probability(
        snap,
        budget,
        table,
        at_min_dose=position is DosePosition.MIN,
        at_max_dose=position is DosePosition.MAX,
    )
    threshold = cfg.tau if position is DosePosition.INTERIOR else cfg.tau_edge
    identified = retainment > threshold
    return EarlyStopOutcome(
        retainment=retainment,
        threshold_used=threshold,
        identified=identified,
        mtd_level=snap.dose_level if identified else None,
    )
