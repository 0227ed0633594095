"""Time-to-event bookkeeping: per-dose snapshots with fractional follow-up.

A patient under assessment contributes partial evidence: the fraction of the
assessment window already observed without a DLT counts toward an effective
non-DLT total (n_e), while the unobserved remainder stays "pending". The
decision rules then run with fractional counts; with nothing pending they
reduce exactly to their complete-data forms.

DLT evidence is never fractional: a pending patient contributes no DLT count
until the event is actually observed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

from .designs import Decision, DesignKind, DesignParams, elimination_check, weighted_decision
from .mathcore import DomainError

__all__ = [
    "Pending",
    "CompletedNoDlt",
    "Dlt",
    "Outcome",
    "PatientRecord",
    "DoseSnapshot",
    "SuspensionPolicy",
    "Suspend",
    "SUSPEND",
    "dose_snapshot",
    "observed_outcome",
    "tite_decide",
]

_TOL = 1e-9


@dataclass(frozen=True)
class Pending:
    """Still in the assessment window; observed_days of DLT-free follow-up."""

    observed_days: float

    def __post_init__(self) -> None:
        if not (math.isfinite(self.observed_days) and self.observed_days >= 0.0):
            raise DomainError(f"observed_days must be finite and >= 0, got {self.observed_days!r}")


@dataclass(frozen=True)
class CompletedNoDlt:
    """Full window observed without a DLT."""


@dataclass(frozen=True)
class Dlt:
    """DLT observed at_day days after enrollment."""

    at_day: float

    def __post_init__(self) -> None:
        if not (math.isfinite(self.at_day) and self.at_day >= 0.0):
            raise DomainError(f"at_day must be finite and >= 0, got {self.at_day!r}")


Outcome = Pending | CompletedNoDlt | Dlt


@dataclass(frozen=True)
class PatientRecord:
    id: int
    dose_level: int
    enroll_time: float
    outcome: Outcome

    def __post_init__(self) -> None:
        if self.dose_level < 1:
            raise DomainError(f"dose_level must be >= 1, got {self.dose_level!r}")
        if not (math.isfinite(self.enroll_time) and self.enroll_time >= 0.0):
            raise DomainError(f"enroll_time must be finite and >= 0, got {self.enroll_time!r}")


@dataclass(frozen=True)
class DoseSnapshot:
    """Aggregated evidence at one dose at one instant.

    n_e = n_nodlt + pend_observed_frac is the effective non-DLT count; the
    pending fractions split each pending patient into observed/window plus
    remaining/window, which sum to one patient each.
    """

    dose_level: int
    n: int
    n_dlt: int
    n_nodlt: int
    pending_count: int
    pend_observed_frac: float
    pend_unobserved_frac: float
    n_e: float

    def __post_init__(self) -> None:
        if self.n != self.n_dlt + self.n_nodlt + self.pending_count:
            raise DomainError("snapshot counts must satisfy n = n_dlt + n_nodlt + pending")
        if min(self.n_dlt, self.n_nodlt, self.pending_count) < 0:
            raise DomainError("snapshot counts must be nonnegative")
        if self.pend_observed_frac < -_TOL or self.pend_unobserved_frac < -_TOL:
            raise DomainError("pending fractions must be nonnegative")
        if abs(self.pend_observed_frac + self.pend_unobserved_frac - self.pending_count) > 1e-6:
            raise DomainError("pending fractions must sum to the pending count")
        if abs(self.n_e - (self.n_nodlt + self.pend_observed_frac)) > 1e-6:
            raise DomainError("n_e must equal n_nodlt + pend_observed_frac")

    @property
    def completed(self) -> int:
        return self.n_dlt + self.n_nodlt

    @classmethod
    def empty(cls, dose_level: int) -> "DoseSnapshot":
        return cls(dose_level, 0, 0, 0, 0, 0.0, 0.0, 0.0)

    @classmethod
    def of_counts(cls, dose_level: int, n_dlt: int, n_nodlt: int) -> "DoseSnapshot":
        """Snapshot with every assessment complete (nothing pending)."""
        return cls(
            dose_level, n_dlt + n_nodlt, n_dlt, n_nodlt, 0, 0.0, 0.0, float(n_nodlt)
        )

    def to_dict(self) -> dict:
        return {
            "dose_level": self.dose_level,
            "n": self.n,
            "n_dlt": self.n_dlt,
            "n_nodlt": self.n_nodlt,
            "pending_count": self.pending_count,
            "pend_observed_frac": self.pend_observed_frac,
            "pend_unobserved_frac": self.pend_unobserved_frac,
            "n_e": self.n_e,
        }


@dataclass(frozen=True)
class SuspensionPolicy:
    """Accrual control: suspend when too much of the dose is pending, and
    require some fully evaluated patients before escalating."""

    max_pending_fraction: float = 0.5
    min_completed_for_escalation: int = 1

    def __post_init__(self) -> None:
        if not 0.0 <= self.max_pending_fraction <= 1.0:
            raise DomainError("max_pending_fraction must lie in [0, 1]")
        if self.min_completed_for_escalation < 0:
            raise DomainError("min_completed_for_escalation must be >= 0")


class Suspend(Enum):
    """Sentinel returned when accrual must pause instead of deciding."""

    SUSPEND = "suspend"


SUSPEND = Suspend.SUSPEND


def observed_outcome(
    dlt_day: float | None, enroll_time: float, now: float, window: float
) -> Outcome:
    """What is known at `now` about a patient whose eventual outcome is fixed.

    dlt_day is the day (after enrollment) a DLT will occur, or None if the
    patient never has one inside the window.
    """
    elapsed = now - enroll_time
    if elapsed < 0.0:
        raise DomainError("patient not yet enrolled at the requested time")
    if dlt_day is not None and dlt_day <= min(elapsed, window):
        return Dlt(dlt_day)
    if elapsed >= window:
        return CompletedNoDlt()
    return Pending(elapsed)


def dose_snapshot(
    patients: list[PatientRecord], dose_level: int, now: float, window: float
) -> DoseSnapshot:
    """Aggregate the records at one dose into a snapshot at time `now`.

    A pending record whose observed follow-up has reached the window counts
    as completed without DLT. A dose level nobody received gives an all-zero
    snapshot, not an error.
    """
    if not window > 0.0:
        raise DomainError(f"window must be > 0, got {window!r}")
    n = n_dlt = n_nodlt = pending = 0
    observed_frac = 0.0
    for rec in patients:
        if rec.dose_level != dose_level:
            continue
        n += 1
        out = rec.outcome
        if isinstance(out, Dlt):
            if out.at_day > window + _TOL:
                raise DomainError(f"DLT at day {out.at_day} beyond the {window}-day window")
            n_dlt += 1
        elif isinstance(out, CompletedNoDlt):
            n_nodlt += 1
        else:
            if out.observed_days > now - rec.enroll_time + _TOL:
                raise DomainError(
                    f"patient {rec.id} has more follow-up than elapsed time at now={now}"
                )
            if out.observed_days >= window - _TOL:
                n_nodlt += 1
            else:
                pending += 1
                observed_frac += out.observed_days / window
    unobserved_frac = pending - observed_frac
    return DoseSnapshot(
        dose_level=dose_level,
        n=n,
        n_dlt=n_dlt,
        n_nodlt=n_nodlt,
        pending_count=pending,
        pend_observed_frac=observed_frac,
        pend_unobserved_frac=unobserved_frac,
        n_e=n_nodlt + observed_frac,
    )


def data_decision(kind: DesignKind, params: DesignParams, snap: DoseSnapshot) -> Decision:
    """The design rule applied to the snapshot's evidence alone: elimination
    on completed data, otherwise the weighted interval decision. No accrual
    policy is consulted."""
    if snap.n < 1:
        raise DomainError("data_decision needs at least one treated patient")
    if elimination_check(snap.n_dlt, snap.completed, params):
        return Decision.ELIMINATE
    if snap.n_dlt + snap.n_e <= 0.0:
        raise DomainError("no observed evidence at the dose")
    return weighted_decision(kind, params, float(snap.n_dlt), snap.n_e)


def tite_decide(
    kind: DesignKind,
    params: DesignParams,
    snap: DoseSnapshot,
    policy: SuspensionPolicy,
) -> Decision | Suspend:
    """Dose decision under partial follow-up, or Suspend to pause accrual.

    Order of checks: pending-fraction suspension; elimination on completed
    data only; the design rule on (n_dlt, n_e); finally an escalation gate
    that downgrades Escalate to Stay until enough patients completed.
    """
    if snap.n < 1:
        raise DomainError("tite_decide needs at least one treated patient")
    if snap.pending_count / snap.n > policy.max_pending_fraction:
        return SUSPEND
    if elimination_check(snap.n_dlt, snap.completed, params):
        return Decision.ELIMINATE
    if snap.n_dlt + snap.n_e <= 0.0:
        # nothing observed at all; no rate or posterior to act on
        return SUSPEND
    decision = weighted_decision(kind, params, float(snap.n_dlt), snap.n_e)
    if (
        decision is Decision.ESCALATE
        and snap.completed < policy.min_completed_for_escalation
    ):
        return Decision.STAY
    return decision
