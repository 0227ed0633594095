"""Discrete-event trial simulation and campaign aggregation.

One simulated trial is a pure function of (config, scenario, seed): patient
arrivals and outcomes are drawn from a dedicated RNG stream, the dose moves
according to the configured design, and the result records what an analyst
would tabulate (selected MTD, duration, sample size, per-dose counts).

Three operating modes:

- plain: enroll in cohorts, halt accrual until the whole cohort's assessment
  window has elapsed, then decide on complete data.
- tite: enroll continuously; each patient is dosed on arrival; the dose moves
  at cohort boundaries using fractional follow-up, suspending accrual when
  too little is known.
- ei_tite: tite plus the early-identification rule, evaluated at every
  arrival instant (and at the follow-up completions reached while
  suspended); when the retainment probability clears its threshold the trial
  stops and declares the current dose.

Campaigns run replications on seeds seed+0..seed+R-1 and aggregate in
replication order, so results are bitwise independent of worker scheduling.
"""

from __future__ import annotations

import hashlib
import json
import math
import multiprocessing
import os
from dataclasses import dataclass, fields
from enum import Enum
from functools import lru_cache

import numpy as np
from scipy.optimize import brentq

from .designs import (
    BoundaryTable,
    Decision,
    DesignKind,
    DesignParams,
    boundary_table,
)
from .early_stop import (
    RemainingBudget,
    ThresholdConfig,
    dose_position,
    evaluate_early_stop,
)
from .mathcore import DomainError, as_probability, pava_isotonic
from .tite import SUSPEND, DoseSnapshot, SuspensionPolicy, data_decision, tite_decide

__all__ = [
    "DAYS_PER_MONTH",
    "TrialMode",
    "PoissonEnrollment",
    "DeterministicEnrollment",
    "UniformToxTime",
    "WeibullToxTime",
    "Scenario",
    "TrialConfig",
    "TrialResult",
    "CampaignSummary",
    "CSV_HEADER",
    "simulate_trial",
    "select_mtd",
    "true_mtd_level",
    "random_scenario",
    "run_campaign",
    "percent_change",
    "remaining_schedule_days",
    "DEFAULT_SCENARIOS",
    "PARALLELISM_ENV_VAR",
]

DAYS_PER_MONTH = 30.0
PARALLELISM_ENV_VAR = "EIDOSE_PARALLELISM"


class TrialMode(str, Enum):
    PLAIN = "plain"
    TITE = "tite"
    EI_TITE = "ei_tite"


@dataclass(frozen=True)
class PoissonEnrollment:
    """Exponential inter-arrival gaps at a mean rate per 30-day month."""

    rate_per_month: float = 2.0

    def __post_init__(self) -> None:
        if not self.rate_per_month > 0.0:
            raise DomainError(f"rate_per_month must be > 0, got {self.rate_per_month!r}")

    def gap_days(self, rng: np.random.Generator) -> float:
        return float(rng.exponential(DAYS_PER_MONTH / self.rate_per_month))

    def to_dict(self) -> dict:
        return {"kind": "poisson", "rate_per_month": self.rate_per_month}


@dataclass(frozen=True)
class DeterministicEnrollment:
    """Fixed spacing between consecutive enrollments."""

    interval_days: float

    def __post_init__(self) -> None:
        if not self.interval_days > 0.0:
            raise DomainError(f"interval_days must be > 0, got {self.interval_days!r}")

    def gap_days(self, rng: np.random.Generator) -> float:
        return self.interval_days

    def to_dict(self) -> dict:
        return {"kind": "deterministic", "interval_days": self.interval_days}


EnrollmentLaw = PoissonEnrollment | DeterministicEnrollment


def enrollment_from_dict(d: dict) -> EnrollmentLaw:
    kind = d.get("kind")
    if kind == "poisson":
        return PoissonEnrollment(rate_per_month=d["rate_per_month"])
    if kind == "deterministic":
        return DeterministicEnrollment(interval_days=d["interval_days"])
    raise DomainError(f"unknown enrollment kind {kind!r}")


@dataclass(frozen=True)
class UniformToxTime:
    """DLT onset uniform over (0, window]."""

    def draw_day(self, rng: np.random.Generator, window: float) -> float:
        return window * (1.0 - float(rng.random()))

    def to_dict(self) -> dict:
        return {"kind": "uniform"}


@lru_cache(maxsize=None)
def _weibull_scale(shape: float, first_half: float, window: float) -> float:
    # solve F(window/2)/F(window) = first_half for the scale, where
    # F(t) = 1 - exp(-(t/scale)^shape); substitute a = (window/(2 scale))^shape
    two_k = 2.0**shape

    def ratio(a: float) -> float:
        return math.expm1(-a) / math.expm1(-a * two_k)

    a = brentq(lambda a: ratio(a) - first_half, 1e-12, 200.0, xtol=1e-14)
    return (window / 2.0) / a ** (1.0 / shape)


@dataclass(frozen=True)
class WeibullToxTime:
    """DLT onset Weibull-shaped inside the window, pinned by the fraction of
    events falling in the first half. Fractions below 0.5 model late onset.
    """

    shape: float = 2.0
    fraction_in_first_half: float = 0.3

    def __post_init__(self) -> None:
        if not self.shape > 0.0:
            raise DomainError(f"shape must be > 0, got {self.shape!r}")
        floor = 2.0**-self.shape
        if not floor < self.fraction_in_first_half < 1.0:
            raise DomainError(
                f"fraction_in_first_half must lie in ({floor:.4g}, 1) for shape "
                f"{self.shape} (the Weibull family cannot push events later)"
            )

    def draw_day(self, rng: np.random.Generator, window: float) -> float:
        if window <= 0.0:
            return 0.0
        scale = _weibull_scale(self.shape, self.fraction_in_first_half, window)
        total = -math.expm1(-((window / scale) ** self.shape))
        q = float(rng.random()) * total
        return scale * (-math.log1p(-q)) ** (1.0 / self.shape)

    def to_dict(self) -> dict:
        return {
            "kind": "weibull",
            "shape": self.shape,
            "fraction_in_first_half": self.fraction_in_first_half,
        }


ToxTimeLaw = UniformToxTime | WeibullToxTime


def tox_time_from_dict(d: dict) -> ToxTimeLaw:
    kind = d.get("kind")
    if kind == "uniform":
        return UniformToxTime()
    if kind == "weibull":
        return WeibullToxTime(
            shape=d.get("shape", 2.0),
            fraction_in_first_half=d.get("fraction_in_first_half", 0.3),
        )
    raise DomainError(f"unknown tox time law kind {kind!r}")


@dataclass(frozen=True)
class Scenario:
    """True per-dose DLT probabilities plus the DLT onset-time law."""

    label: str
    true_dlt_probs: tuple[float, ...]
    tox_time_law: ToxTimeLaw = UniformToxTime()

    def __post_init__(self) -> None:
        if not self.true_dlt_probs:
            raise DomainError("scenario needs at least one dose")
        for p in self.true_dlt_probs:
            as_probability(p, "true DLT probability")
        object.__setattr__(self, "true_dlt_probs", tuple(float(p) for p in self.true_dlt_probs))

    @property
    def n_doses(self) -> int:
        return len(self.true_dlt_probs)

    def to_dict(self) -> dict:
        return {
            "label": self.label,
            "true_dlt_probs": list(self.true_dlt_probs),
            "tox_time_law": self.tox_time_law.to_dict(),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "Scenario":
        law = tox_time_from_dict(d["tox_time_law"]) if "tox_time_law" in d else UniformToxTime()
        return cls(
            label=str(d["label"]),
            true_dlt_probs=tuple(d["true_dlt_probs"]),
            tox_time_law=law,
        )


@dataclass(frozen=True)
class TrialConfig:
    """Everything a single simulated trial needs besides the scenario."""

    design: DesignKind = DesignKind.BOIN
    mode: TrialMode = TrialMode.EI_TITE
    n_max: int = 36
    n_doses: int = 6
    cohort_size: int = 3
    window_days: float = 90.0
    enrollment: EnrollmentLaw = PoissonEnrollment(2.0)
    target: float = 0.3
    interval: tuple[float, float] | None = None
    elimination_cutoff: float = 0.95
    elimination_min_n: int = 3
    thresholds: ThresholdConfig = ThresholdConfig()
    suspension: SuspensionPolicy = SuspensionPolicy()
    allow_dose_skipping: bool = False
    terminate_on_lowest_elimination: bool = False
    start_dose: int = 1
    seed: int = 0

    def __post_init__(self) -> None:
        try:
            object.__setattr__(self, "design", DesignKind(self.design))
            object.__setattr__(self, "mode", TrialMode(self.mode))
        except ValueError as exc:
            raise DomainError(str(exc)) from None
        if self.n_max < 1:
            raise DomainError("n_max must be >= 1")
        if self.n_doses < 2:
            raise DomainError("n_doses must be >= 2")
        if self.cohort_size < 1:
            raise DomainError("cohort_size must be >= 1")
        if self.mode is TrialMode.PLAIN and self.n_max % self.cohort_size != 0:
            raise DomainError("plain mode needs n_max divisible by cohort_size")
        if self.window_days < 0.0:
            raise DomainError("window_days must be >= 0")
        as_probability(self.target, "target")
        if not 1 <= self.start_dose <= self.n_doses:
            raise DomainError("start_dose must lie in 1..n_doses")
        if self.allow_dose_skipping:
            raise DomainError("dose skipping is not supported")
        if self.interval is not None:
            object.__setattr__(self, "interval", (float(self.interval[0]), float(self.interval[1])))
        self.design_params()  # validates target/interval compatibility

    def design_params(self) -> DesignParams:
        if self.interval is None:
            base = DesignParams.defaults_for(self.design, self.target)
            lo, hi = base.interval_lo, base.interval_hi
        else:
            lo, hi = self.interval
        return DesignParams(
            target=self.target,
            interval_lo=lo,
            interval_hi=hi,
            elimination_cutoff=self.elimination_cutoff,
            elimination_min_n=self.elimination_min_n,
        )

    def to_dict(self) -> dict:
        return {
            "design": self.design.value,
            "mode": self.mode.value,
            "n_max": self.n_max,
            "n_doses": self.n_doses,
            "cohort_size": self.cohort_size,
            "window_days": self.window_days,
            "enrollment": self.enrollment.to_dict(),
            "target": self.target,
            "interval": list(self.interval) if self.interval is not None else None,
            "elimination_cutoff": self.elimination_cutoff,
            "elimination_min_n": self.elimination_min_n,
            "thresholds": {"tau": self.thresholds.tau, "tau_edge": self.thresholds.tau_edge},
            "suspension": {
                "max_pending_fraction": self.suspension.max_pending_fraction,
                "min_completed_for_escalation": self.suspension.min_completed_for_escalation,
            },
            "allow_dose_skipping": self.allow_dose_skipping,
            "terminate_on_lowest_elimination": self.terminate_on_lowest_elimination,
            "start_dose": self.start_dose,
            "seed": self.seed,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "TrialConfig":
        known = {f.name for f in fields(cls)}
        unknown = set(d) - known
        if unknown:
            raise DomainError(f"unknown trial config keys: {sorted(unknown)}")
        kw = dict(d)
        if "enrollment" in kw and isinstance(kw["enrollment"], dict):
            kw["enrollment"] = enrollment_from_dict(kw["enrollment"])
        if "thresholds" in kw and isinstance(kw["thresholds"], dict):
            kw["thresholds"] = ThresholdConfig(**kw["thresholds"])
        if "suspension" in kw and isinstance(kw["suspension"], dict):
            kw["suspension"] = SuspensionPolicy(**kw["suspension"])
        if kw.get("interval") is not None:
            kw["interval"] = tuple(kw["interval"])
        return cls(**kw)

    def digest(self) -> str:
        blob = json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()[:12]


@dataclass(frozen=True)
class TrialResult:
    selected_mtd: int | None
    early_identified: bool
    duration_days: float
    n_enrolled: int
    per_dose_allocation: tuple[int, ...]
    per_dose_dlts: tuple[int, ...]

    def __post_init__(self) -> None:
        if self.n_enrolled != sum(self.per_dose_allocation):
            raise DomainError("n_enrolled must equal the allocation total")
        if self.early_identified and self.selected_mtd is None:
            raise DomainError("early identification implies a selected MTD")


@lru_cache(maxsize=64)
def _cached_table(kind: DesignKind, params: DesignParams, n_max: int) -> BoundaryTable:
    return boundary_table(kind, params, n_max)


def select_mtd(
    per_dose_dlts: list[int],
    per_dose_allocation: list[int],
    eliminated: set[int],
    target: float,
) -> int | None:
    """Terminal MTD choice: isotonic DLT-rate estimates over doses with data,
    then the admissible dose closest to target.

    Distance ties prefer the highest tied dose still estimated at or below
    target; if every tied dose is estimated above target, the lowest.
    """
    if len(per_dose_dlts) != len(per_dose_allocation):
        raise DomainError("per-dose lists must have equal length")
    with_data = [j for j, n in enumerate(per_dose_allocation) if n > 0]
    if not with_data:
        return None
    rates = pava_isotonic(
        [per_dose_dlts[j] / per_dose_allocation[j] for j in with_data],
        [float(per_dose_allocation[j]) for j in with_data],
    )
    candidates = [
        (j, rate) for j, rate in zip(with_data, rates) if (j + 1) not in eliminated
    ]
    if not candidates:
        return None
    best = min(abs(rate - target) for _, rate in candidates)
    tied = [(j, rate) for j, rate in candidates if abs(rate - target) == best]
    at_or_below = [j for j, rate in tied if rate <= target]
    if at_or_below:
        return max(at_or_below) + 1
    return min(j for j, _ in tied) + 1


def true_mtd_level(
    probs: tuple[float, ...], target: float, interval_hi: float
) -> int | None:
    """Scenario ground truth for scoring: the dose closest to target (ties
    to the lower dose), or none when every dose is already at or beyond the
    upper end of the proper-dosing interval."""
    if min(probs) >= interval_hi:
        return None
    best = min(abs(p - target) for p in probs)
    for j, p in enumerate(probs):
        if abs(p - target) == best:
            return j + 1
    raise AssertionError("unreachable")


def random_scenario(
    rng: np.random.Generator, n_doses: int, target: float, label: str = "random"
) -> Scenario:
    """Random monotone truth: MTD position uniform over doses; toxicity
    decays multiplicatively below it and accrues a random share of the
    remaining headroom above it."""
    if n_doses < 2:
        raise DomainError("random_scenario needs n_doses >= 2")
    as_probability(target, "target")
    m = int(rng.integers(1, n_doses + 1))
    p = [0.0] * n_doses
    p[m - 1] = target
    for j in range(m - 2, -1, -1):
        p[j] = p[j + 1] * float(rng.uniform(0.3, 0.7))
    for j in range(m, n_doses):
        p[j] = p[j - 1] + (1.0 - p[j - 1]) * float(rng.uniform(0.15, 0.35))
    return Scenario(label=label, true_dlt_probs=tuple(p))


# Default operating-characteristic suite: monotone ladders sweeping the
# true-MTD position, with roughly 0.15 spacing around the target dose and a
# clearly toxic dose directly above it whenever one exists. fixed-5 is a
# uniformly hot ladder whose second dose is the target; fixed-6 is a gentle
# ladder whose top dose sits just under the target.
DEFAULT_SCENARIOS: tuple[Scenario, ...] = tuple(
    Scenario(label=f"fixed-{i + 1}", true_dlt_probs=probs)
    for i, probs in enumerate(
        [
            (0.30, 0.45, 0.55, 0.63, 0.70, 0.76),
            (0.14, 0.30, 0.46, 0.56, 0.65, 0.72),
            (0.07, 0.15, 0.30, 0.46, 0.56, 0.65),
            (0.04, 0.09, 0.15, 0.30, 0.50, 0.62),
            (0.22, 0.35, 0.50, 0.62, 0.72, 0.80),
            (0.02, 0.04, 0.07, 0.11, 0.16, 0.28),
        ]
    )
)


class _Trial:
    """Mutable state for one simulated trial."""

    __slots__ = (
        "config", "scenario", "rng", "params", "table", "window",
        "dose_of", "enroll_at", "dlt_day", "alloc", "current",
        "min_eliminated", "enrolled", "last_enroll",
    )

    def __init__(self, config: TrialConfig, scenario: Scenario, seed: int):
        if scenario.n_doses != config.n_doses:
            raise DomainError(
                f"scenario has {scenario.n_doses} doses, config expects {config.n_doses}"
            )
        self.config = config
        self.scenario = scenario
        self.rng = np.random.default_rng(seed)
        self.params = config.design_params()
        self.table = _cached_table(config.design, self.params, config.n_max)
        self.window = float(config.window_days)
        self.dose_of: list[int] = []
        self.enroll_at: list[float] = []
        self.dlt_day: list[float | None] = []
        self.alloc = [0] * config.n_doses
        self.current = config.start_dose
        self.min_eliminated = config.n_doses + 1
        self.enrolled = 0
        self.last_enroll = 0.0

    def enroll(self, when: float) -> None:
        dose = self.current
        p = self.scenario.true_dlt_probs[dose - 1]
        has_dlt = float(self.rng.random()) < p
        day = self.scenario.tox_time_law.draw_day(self.rng, self.window) if has_dlt else None
        self.dose_of.append(dose)
        self.enroll_at.append(when)
        self.dlt_day.append(day)
        self.alloc[dose - 1] += 1
        self.enrolled += 1
        self.last_enroll = when

    def snapshot(self, dose: int, now: float) -> DoseSnapshot:
        n = n_dlt = n_nodlt = pending = 0
        observed = 0.0
        for i in range(len(self.dose_of)):
            if self.dose_of[i] != dose:
                continue
            n += 1
            elapsed = now - self.enroll_at[i]
            day = self.dlt_day[i]
            if day is not None and day <= elapsed:
                n_dlt += 1
            elif elapsed >= self.window:
                n_nodlt += 1
            else:
                pending += 1
                observed += elapsed / self.window
        return DoseSnapshot(
            dose_level=dose,
            n=n,
            n_dlt=n_dlt,
            n_nodlt=n_nodlt,
            pending_count=pending,
            pend_observed_frac=observed,
            pend_unobserved_frac=pending - observed,
            n_e=n_nodlt + observed,
        )

    def next_resolution_after(self, dose: int, now: float) -> float:
        """Earliest instant after `now` at which a pending assessment at
        `dose` resolves (DLT onset or window completion)."""
        best = math.inf
        for i in range(len(self.dose_of)):
            if self.dose_of[i] != dose:
                continue
            day = self.dlt_day[i]
            ends = self.enroll_at[i] + (day if day is not None else self.window)
            if now < ends < best:
                best = ends
        return best

    def apply(self, decision: Decision) -> bool:
        """Move the dose; returns True when the trial must terminate."""
        if decision is Decision.ELIMINATE:
            self.min_eliminated = min(self.min_eliminated, self.current)
            if self.current > 1:
                self.current -= 1
            elif self.config.terminate_on_lowest_elimination:
                return True
        elif decision is Decision.DEESCALATE:
            if self.current > 1:
                self.current -= 1
        elif decision is Decision.ESCALATE:
            nxt = self.current + 1
            if nxt <= self.config.n_doses and nxt < self.min_eliminated:
                self.current = nxt
        return False

    def observed_dlts(self, horizon: float) -> list[int]:
        out = [0] * self.config.n_doses
        for i in range(len(self.dose_of)):
            day = self.dlt_day[i]
            if day is not None and self.enroll_at[i] + day <= horizon:
                out[self.dose_of[i] - 1] += 1
        return out

    def result(
        self, selected: int | None, early: bool, duration: float
    ) -> TrialResult:
        return TrialResult(
            selected_mtd=selected,
            early_identified=early,
            duration_days=duration,
            n_enrolled=self.enrolled,
            per_dose_allocation=tuple(self.alloc),
            per_dose_dlts=tuple(self.observed_dlts(duration)),
        )

    def final_selection(self) -> int | None:
        eliminated = set(range(self.min_eliminated, self.config.n_doses + 1))
        return select_mtd(
            self.observed_dlts(math.inf),
            self.alloc,
            eliminated,
            self.config.target,
        )


def _log(log: list | None, **entry) -> None:
    if log is not None:
        log.append(entry)


def _simulate_plain(trial: _Trial, log: list | None) -> TrialResult:
    cfg = trial.config
    t = 0.0
    while trial.enrolled < cfg.n_max:
        for _ in range(cfg.cohort_size):
            if trial.enrolled > 0:
                t += cfg.enrollment.gap_days(trial.rng)
            trial.enroll(t)
        decision_time = trial.last_enroll + trial.window
        dose = trial.current
        x = trial.observed_dlts(decision_time)[dose - 1]
        decision = trial.table.decision_for(x, trial.alloc[dose - 1])
        _log(log, at=decision_time, kind="decision", dose=dose, n=trial.alloc[dose - 1],
             n_dlt=x, action=decision.value)
        if trial.apply(decision):
            return trial.result(None, False, decision_time)
        t = decision_time
    return trial.result(trial.final_selection(), False, trial.last_enroll + trial.window)


def _retention_on_table(trial: _Trial, snap: DoseSnapshot) -> bool:
    """Early identification asks whether the current dose will be retained
    as the MTD, so it is evaluated only when retaining is the decision the
    evidence supports right now: a Stay anywhere, or an Escalate clamped at
    the top dose (nowhere to go, the top dose is being retained). A
    De-escalate at the bottom dose also pins the trial there but the data
    are calling the dose too toxic, so it is never declared the MTD;
    elimination always wins. Evidence at the dose must amount to complete
    cohorts while it is thin - declaring the MTD mid-cohort on one or two
    barely observed patients is never on the table - but once three
    cohorts' worth of patients have accumulated at the dose, any count is
    mature enough to evaluate."""
    cfg = trial.config
    if snap.n < 1 or snap.n_e <= 0.0:
        return False
    if snap.n % cfg.cohort_size != 0 and snap.n < 3 * cfg.cohort_size:
        return False
    if trial.current >= trial.min_eliminated:
        return False
    decision = data_decision(cfg.design, trial.params, snap)
    return decision is Decision.STAY or (
        decision is Decision.ESCALATE and trial.current == cfg.n_doses
    )


def _ei_identified(trial: _Trial, log: list | None, now: float) -> bool:
    """Evaluate the early-identification rule at `now`; True when it fires."""
    snap = trial.snapshot(trial.current, now)
    if not _retention_on_table(trial, snap):
        return False
    budget = RemainingBudget.from_snapshot(trial.config.n_max - trial.enrolled, snap)
    outcome = evaluate_early_stop(
        snap,
        budget,
        trial.table,
        dose_position(trial.current, trial.config.n_doses),
        trial.config.thresholds,
    )
    _log(log, at=now, kind="early_stop", dose=trial.current,
         retainment=outcome.retainment, identified=outcome.identified)
    return outcome.identified


def _simulate_tite(trial: _Trial, log: list | None) -> TrialResult:
    """Continuous-accrual loop. Decision instants are patient arrivals and
    assessment completions: dose moves happen at cohort-boundary arrivals
    (and during the terminal follow-up tail, when accrual is over), while
    the early-identification rule runs at every arrival and every window
    completion at the current dose."""
    cfg = trial.config
    early = cfg.mode is TrialMode.EI_TITE
    t = 0.0
    while trial.enrolled < cfg.n_max:
        now = t + cfg.enrollment.gap_days(trial.rng) if trial.enrolled > 0 else 0.0
        if early:
            s = trial.next_resolution_after(trial.current, t)
            while s < now:
                if _ei_identified(trial, log, s):
                    return trial.result(trial.current, True, s)
                s = trial.next_resolution_after(trial.current, s)
        at_boundary = trial.enrolled > 0 and trial.enrolled % cfg.cohort_size == 0
        while True:
            if early and _ei_identified(trial, log, now):
                return trial.result(trial.current, True, now)
            if not at_boundary:
                break
            snap = trial.snapshot(trial.current, now)
            action = tite_decide(cfg.design, trial.params, snap, cfg.suspension)
            if action is SUSPEND:
                resume = trial.next_resolution_after(trial.current, now)
                _log(log, at=now, kind="suspend", dose=trial.current, resume=resume)
                now = resume
                continue
            _log(log, at=now, kind="decision", dose=trial.current, n=snap.n,
                 n_dlt=snap.n_dlt, n_e=snap.n_e, action=action.value)
            if trial.apply(action):
                return trial.result(None, False, now)
            break
        trial.enroll(now)
        t = now
    if early:
        # accrual is over; assessments keep completing through the terminal
        # window and each completion is still a decision instant
        now = trial.last_enroll
        while True:
            s = trial.next_resolution_after(trial.current, now)
            if s == math.inf:
                break
            if _ei_identified(trial, log, s):
                return trial.result(trial.current, True, s)
            snap = trial.snapshot(trial.current, s)
            action = tite_decide(cfg.design, trial.params, snap, cfg.suspension)
            if action is not SUSPEND:
                _log(log, at=s, kind="decision", dose=trial.current, n=snap.n,
                     n_dlt=snap.n_dlt, n_e=snap.n_e, action=action.value)
                if trial.apply(action):
                    return trial.result(None, False, s)
            now = s
    else:
        # the final cohort still gets its design decision once its window
        # elapses (matching the plain path decision-for-decision); a terminal
        # elimination must reach the selection step
        end = trial.last_enroll + trial.window
        snap = trial.snapshot(trial.current, end)
        action = tite_decide(cfg.design, trial.params, snap, cfg.suspension)
        if action is not SUSPEND:
            _log(log, at=end, kind="decision", dose=trial.current, n=snap.n,
                 n_dlt=snap.n_dlt, n_e=snap.n_e, action=action.value)
            if trial.apply(action):
                return trial.result(None, False, end)
    return trial.result(trial.final_selection(), False, trial.last_enroll + trial.window)


def simulate_trial(
    config: TrialConfig,
    scenario: Scenario,
    seed: int,
    decision_log: list | None = None,
) -> TrialResult:
    """Run one trial to completion. Deterministic in (config, scenario, seed)."""
    trial = _Trial(config, scenario, seed)
    if config.mode is TrialMode.PLAIN:
        return _simulate_plain(trial, decision_log)
    return _simulate_tite(trial, decision_log)


CSV_HEADER = (
    "scenario,design,mode,pcms,ei_rate,mean_duration_days,mean_n,replications,seed"
)


@dataclass(frozen=True)
class CampaignSummary:
    scenario_label: str
    design: DesignKind
    mode: TrialMode
    pcms: float
    ei_rate: float
    mean_duration_days: float
    mean_n: float
    replications: int
    seed: int
    config_digest: str = ""

    def __post_init__(self) -> None:
        if self.replications < 1:
            raise DomainError("replications must be >= 1")
        as_probability(self.pcms, "pcms")
        as_probability(self.ei_rate, "ei_rate")

    def csv_row(self) -> str:
        return ",".join(
            [
                self.scenario_label,
                self.design.value,
                self.mode.value,
                repr(self.pcms),
                repr(self.ei_rate),
                repr(self.mean_duration_days),
                repr(self.mean_n),
                str(self.replications),
                str(self.seed),
            ]
        )

    @classmethod
    def from_csv_row(cls, row: str) -> "CampaignSummary":
        parts = row.strip().split(",")
        if len(parts) != 9:
            raise DomainError(f"expected 9 CSV fields, got {len(parts)}")
        return cls(
            scenario_label=parts[0],
            design=DesignKind(parts[1]),
            mode=TrialMode(parts[2]),
            pcms=float(parts[3]),
            ei_rate=float(parts[4]),
            mean_duration_days=float(parts[5]),
            mean_n=float(parts[6]),
            replications=int(parts[7]),
            seed=int(parts[8]),
        )


def _replication_stats(args: tuple) -> list[tuple]:
    config, scenario, seeds = args
    out = []
    for seed in seeds:
        r = simulate_trial(config, scenario, seed)
        out.append((r.selected_mtd, r.early_identified, r.duration_days, r.n_enrolled))
    return out


def run_campaign(
    config: TrialConfig,
    scenario: Scenario,
    replications: int,
    parallelism: int | None = None,
) -> CampaignSummary:
    """Aggregate simulate_trial over seeds config.seed + 0..replications-1.

    Statistics are reduced in replication order with compensated summation,
    so the summary is bitwise identical for any parallelism level.
    """
    if replications < 1:
        raise DomainError("replications must be >= 1")
    if parallelism is None:
        parallelism = int(os.environ.get(PARALLELISM_ENV_VAR, "1"))
    seeds = [config.seed + i for i in range(replications)]
    if parallelism <= 1 or replications == 1:
        stats = _replication_stats((config, scenario, seeds))
    else:
        step = max(1, math.ceil(replications / (parallelism * 4)))
        chunks = [
            (config, scenario, seeds[i : i + step]) for i in range(0, replications, step)
        ]
        ctx = multiprocessing.get_context("fork")
        with ctx.Pool(processes=parallelism) as pool:
            stats = [row for chunk in pool.map(_replication_stats, chunks) for row in chunk]
    truth = true_mtd_level(
        scenario.true_dlt_probs, config.target, config.design_params().interval_hi
    )
    n = float(replications)
    return CampaignSummary(
        scenario_label=scenario.label,
        design=config.design,
        mode=config.mode,
        pcms=math.fsum(1.0 for s in stats if s[0] == truth) / n,
        ei_rate=math.fsum(1.0 for s in stats if s[1]) / n,
        mean_duration_days=math.fsum(s[2] for s in stats) / n,
        mean_n=math.fsum(s[3] for s in stats) / n,
        replications=replications,
        seed=config.seed,
        config_digest=config.digest(),
    )


def percent_change(
    baseline: CampaignSummary, variant: CampaignSummary
) -> tuple[float, float, float]:
    """(duration % change, sample-size % change, PCMS delta in percentage
    points) of variant relative to baseline, matched by scenario."""
    if baseline.scenario_label != variant.scenario_label:
        raise DomainError("percent_change needs summaries from the same scenario")
    if baseline.mean_duration_days == 0.0 or baseline.mean_n == 0.0:
        raise DomainError("baseline means must be nonzero")
    duration_pct = 100.0 * (variant.mean_duration_days - baseline.mean_duration_days) / baseline.mean_duration_days
    n_pct = 100.0 * (variant.mean_n - baseline.mean_n) / baseline.mean_n
    pcms_delta = 100.0 * (variant.pcms - baseline.pcms)
    return duration_pct, n_pct, pcms_delta


def remaining_schedule_days(
    remaining: int,
    spacing_days: float,
    window_days: float,
    latest_observed_days: float = 0.0,
) -> float:
    """Days a trial still needs if it does not stop now: the next patient
    arrives when the spacing since the latest enrollment elapses, the rest
    follow at fixed spacing, and the last assessment window runs out.

    This is exactly the figure saved by stopping at the current instant
    under deterministic enrollment.
    """
    if remaining < 1:
        raise DomainError("remaining must be >= 1")
    if not 0.0 <= latest_observed_days <= spacing_days:
        raise DomainError("latest_observed_days must lie in [0, spacing_days]")
    return (spacing_days - latest_observed_days) + (remaining - 1) * spacing_days + window_days
