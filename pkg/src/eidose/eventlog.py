"""Append-only per-trial event logs with deterministic replay.

The log is the single source of truth: every read-side quantity (current
dose, snapshot, decision, retainment, identified flag) is recomputed from
the event prefix at a requested clinical time. Events carry clinical
timestamps in days since trial start, supplied by the caller, and must be
strictly increasing within a trial.

Event kinds and their fields:

- trial_created: config (always sequence 1)
- patient_enrolled: id, dose
- dlt_observed: id, day (days after that patient's enrollment, <= window)
- assessment_completed: id (administrative confirmation; a clean window is
  already implied by elapsed time)
- correction: ref (sequence number of a prior event to void)

A correction is accepted only if the log remains fully consistent with the
referenced event removed. Once a replayed history crosses the
early-identification threshold the trial is marked identified and further
appends require an explicit override.
"""

from __future__ import annotations

import json
import math
import os
import threading
import uuid
from dataclasses import dataclass, field
from pathlib import Path

from .designs import BoundaryTable, Decision, elimination_check
from .early_stop import (
    EarlyStopOutcome,
    RemainingBudget,
    dose_position,
    evaluate_early_stop,
)
from .mathcore import DomainError
from .simulator import TrialConfig, TrialMode
from .tite import (
    SUSPEND,
    CompletedNoDlt,
    Dlt,
    DoseSnapshot,
    PatientRecord,
    Pending,
    data_decision,
    dose_snapshot,
    tite_decide,
)

__all__ = [
    "ValidationError",
    "ConflictError",
    "NotFoundError",
    "EVENT_KINDS",
    "TrialEvent",
    "TrialState",
    "replay",
    "decision_view",
    "TrialStore",
]

_TOL = 1e-9

EVENT_KINDS = (
    "trial_created",
    "patient_enrolled",
    "dlt_observed",
    "assessment_completed",
    "correction",
)


class ValidationError(ValueError):
    """The event or request contradicts the trial's recorded state."""


class ConflictError(RuntimeError):
    """Optimistic-concurrency check failed (stale expected sequence)."""


class NotFoundError(KeyError):
    """Unknown trial id."""


@dataclass(frozen=True)
class TrialEvent:
    seq: int
    at: float
    kind: str
    payload: dict

    def __post_init__(self) -> None:
        if self.kind not in EVENT_KINDS:
            raise ValidationError(f"unknown event kind {self.kind!r}")
        if not (math.isfinite(self.at) and self.at >= 0.0):
            raise ValidationError(f"event time must be finite and >= 0, got {self.at!r}")

    def to_json(self) -> str:
        return json.dumps(
            {"seq": self.seq, "at": self.at, "kind": self.kind, **self.payload},
            sort_keys=True,
            separators=(",", ":"),
        )

    @classmethod
    def from_json(cls, line: str) -> "TrialEvent":
        doc = json.loads(line)
        seq = int(doc.pop("seq"))
        at = float(doc.pop("at"))
        kind = str(doc.pop("kind"))
        return cls(seq=seq, at=at, kind=kind, payload=doc)

    @classmethod
    def make(cls, at: float, kind: str, seq: int = 0, **payload) -> "TrialEvent":
        return cls(seq=seq, at=float(at), kind=kind, payload=payload)


@dataclass
class _PatientState:
    dose: int
    enrolled_at: float
    dlt_day: float | None = None
    confirmed_complete: bool = False


@dataclass
class TrialState:
    """Everything replay derives from an event prefix."""

    config: TrialConfig
    sequence: int = 0
    last_at: float = -math.inf
    current_dose: int = 1
    identified: bool = False
    patients: dict[int, _PatientState] = field(default_factory=dict)
    enrolled: int = 0

    def record_at(self, pid: int, now: float) -> PatientRecord:
        p = self.patients[pid]
        window = float(self.config.window_days)
        elapsed = now - p.enrolled_at
        if p.dlt_day is not None:
            outcome = Dlt(p.dlt_day)
        elif elapsed >= window:
            outcome = CompletedNoDlt()
        else:
            outcome = Pending(max(0.0, elapsed))
        return PatientRecord(id=pid, dose_level=p.dose, enroll_time=p.enrolled_at, outcome=outcome)

    def records_at(self, now: float) -> list[PatientRecord]:
        return [self.record_at(pid, now) for pid in self.patients]

    def snapshot_at(self, dose: int, now: float) -> DoseSnapshot:
        return dose_snapshot(self.records_at(now), dose, now, float(self.config.window_days))

    def elimination_floor(self, now: float) -> int:
        """Lowest dose whose completed data trips the elimination rule (that
        dose and everything above are off the table); n_doses + 1 if none."""
        params = self.config.design_params()
        records = self.records_at(now)
        window = float(self.config.window_days)
        for dose in range(1, self.config.n_doses + 1):
            snap = dose_snapshot(records, dose, now, window)
            if elimination_check(snap.n_dlt, snap.completed, params):
                return dose
        return self.config.n_doses + 1


def _early_stop_at(state: TrialState, table: BoundaryTable, now: float) -> EarlyStopOutcome | None:
    """Early-identification outcome used for the trial-level flag: None when
    the rule has no evidence to work with, the dose is already eliminated
    (an eliminated dose can never be retained as the MTD), or the evidence
    calls for moving the dose rather than retaining it."""
    if state.current_dose >= state.elimination_floor(now):
        return None
    snap = state.snapshot_at(state.current_dose, now)
    if snap.n < 1 or snap.n_e <= 0.0:
        return None
    cohort = state.config.cohort_size
    if snap.n % cohort != 0 and snap.n < 3 * cohort:
        return None
    decision = data_decision(state.config.design, state.config.design_params(), snap)
    retaining = decision is Decision.STAY or (
        decision is Decision.ESCALATE and state.current_dose == state.config.n_doses
    )
    if not retaining:
        return None
    budget = RemainingBudget.from_snapshot(state.config.n_max - state.enrolled, snap)
    return evaluate_early_stop(
        snap,
        budget,
        table,
        dose_position(state.current_dose, state.config.n_doses),
        state.config.thresholds,
    )


def _apply(state: TrialState, table: BoundaryTable, event: TrialEvent) -> None:
    """Validate one event against the state and fold it in.

    Persisted events (seq > 0) must be strictly later than the previous
    event; hypothetical overlay events (seq == 0) may share the current
    instant but may not rewind it.
    """
    if event.seq != 0:
        ordered = event.at > state.last_at + _TOL
    else:
        ordered = event.at >= state.last_at - _TOL
    if not ordered and state.last_at > -math.inf:
        raise ValidationError(
            f"events must be time-ordered: {event.at} follows {state.last_at}"
        )
    kind, p = event.kind, event.payload
    if kind == "patient_enrolled":
        pid, dose = int(p["id"]), int(p["dose"])
        if pid in state.patients:
            raise ValidationError(f"patient id {pid} already enrolled")
        if not 1 <= dose <= state.config.n_doses:
            raise ValidationError(f"dose {dose} outside 1..{state.config.n_doses}")
        if state.enrolled >= state.config.n_max:
            raise ValidationError(f"enrollment budget of {state.config.n_max} exhausted")
        state.patients[pid] = _PatientState(dose=dose, enrolled_at=event.at)
        state.enrolled += 1
        state.current_dose = dose
    elif kind == "dlt_observed":
        pid, day = int(p["id"]), float(p["day"])
        patient = state.patients.get(pid)
        if patient is None:
            raise ValidationError(f"DLT for unknown patient {pid}")
        if patient.dlt_day is not None:
            raise ValidationError(f"patient {pid} already has a DLT recorded")
        if patient.confirmed_complete:
            raise ValidationError(f"patient {pid} already confirmed DLT-free")
        window = float(state.config.window_days)
        if not 0.0 <= day <= window:
            raise ValidationError(f"DLT day {day} outside the {window}-day window")
        if event.at + _TOL < patient.enrolled_at + day:
            raise ValidationError("DLT recorded before it could have been observed")
        patient.dlt_day = day
    elif kind == "assessment_completed":
        pid = int(p["id"])
        patient = state.patients.get(pid)
        if patient is None:
            raise ValidationError(f"completion for unknown patient {pid}")
        if patient.dlt_day is not None:
            raise ValidationError(f"patient {pid} had a DLT; cannot confirm clean window")
        if event.at + _TOL < patient.enrolled_at + float(state.config.window_days):
            raise ValidationError("assessment window has not elapsed yet")
        patient.confirmed_complete = True
    elif kind == "trial_created":
        raise ValidationError("trial_created is only valid as the first event")
    elif kind == "correction":
        # corrections are resolved before replay; reaching here means the
        # reference was invalid
        raise ValidationError("correction must reference a prior applicable event")
    state.sequence = event.seq if event.seq > 0 else state.sequence + 1
    state.last_at = event.at
    if not state.identified:
        outcome = _early_stop_at(state, table, event.at)
        if outcome is not None and outcome.identified:
            state.identified = True


def replay(
    events: list[TrialEvent],
    as_of: float | None = None,
    extra: tuple[TrialEvent, ...] = (),
) -> TrialState:
    """Rebuild trial state from the event prefix at <= as_of, then validate
    and fold in the hypothetical extra events (not persisted by anyone)."""
    if not events or events[0].kind != "trial_created":
        raise ValidationError("log must start with trial_created")
    try:
        config = TrialConfig.from_dict(events[0].payload["config"])
    except DomainError as exc:
        raise ValidationError(f"invalid trial config: {exc}") from exc
    applied = [e for e in events if as_of is None or e.at <= as_of + _TOL]
    voided: set[int] = set()
    for e in applied:
        if e.kind == "correction":
            ref = int(e.payload["ref"])
            target = next((t for t in applied if t.seq == ref), None)
            if target is None or ref >= e.seq:
                raise ValidationError(f"correction must reference an earlier sequence, got {ref}")
            if target.kind in ("trial_created", "correction"):
                raise ValidationError(f"cannot void a {target.kind} event")
            if ref in voided:
                raise ValidationError(f"sequence {ref} is already voided")
            voided.add(ref)
    state = TrialState(config=config, current_dose=config.start_dose)
    table = _table_for(config)
    for e in applied:
        if e.kind == "trial_created":
            # administrative anchor: does not constrain the first clinical
            # event's timestamp
            state.sequence = e.seq
            continue
        if e.seq in voided or e.kind == "correction":
            # voided events and corrections still advance the clock and the
            # sequence so later appends stay strictly ordered
            state.sequence = max(state.sequence, e.seq)
            state.last_at = max(state.last_at, e.at)
            continue
        _apply(state, table, e)
    for e in extra:
        if e.kind == "correction":
            raise ValidationError("hypothetical corrections are not supported")
        _apply(state, table, e)
    return state


def _table_for(config: TrialConfig) -> BoundaryTable:
    from .simulator import _cached_table

    return _cached_table(config.design, config.design_params(), config.n_max)


def decision_view(state: TrialState, as_of: float) -> dict:
    """JSON-ready decision summary recomputed from the replayed state."""
    config = state.config
    table = _table_for(config)
    snap = state.snapshot_at(state.current_dose, as_of)
    budget = RemainingBudget.from_snapshot(config.n_max - state.enrolled, snap)
    view: dict = {
        "as_of": as_of,
        "current_dose": state.current_dose,
        "sequence": state.sequence,
        # instantaneous rule output at as_of; the trial-level sticky flag
        # that gates appends is reported by the state endpoint instead
        "identified": False,
        "snapshot": snap.to_dict(),
        "budget": {"r": budget.r, "r_pend": budget.r_pend},
        "decision": None,
        "retainment": None,
        "threshold": None,
        "early_stop": None,
    }
    if snap.n >= 1:
        action = tite_decide(config.design, config.design_params(), snap, config.suspension)
        view["decision"] = "suspend" if action is SUSPEND else action.value
        if snap.n_e > 0.0:
            outcome = evaluate_early_stop(
                snap,
                budget,
                table,
                dose_position(state.current_dose, config.n_doses),
                config.thresholds,
            )
            view["early_stop"] = outcome.to_dict()
            view["retainment"] = outcome.retainment
            view["threshold"] = outcome.threshold_used
            gated = _early_stop_at(state, table, as_of)
            if gated is not None and gated.identified:
                view["identified"] = True
    return view


class TrialStore:
    """Directory of per-trial JSONL logs, fsynced per append.

    Writes are serialized per trial; reads hit an in-memory cache that is
    rebuilt from disk on first touch, so a restarted process resumes from
    the durable log alone.
    """

    def __init__(self, root: str | Path):
        self.root = Path(root)
        self.root.mkdir(parents=True, exist_ok=True)
        self._cache: dict[str, list[TrialEvent]] = {}
        self._locks: dict[str, threading.Lock] = {}
        self._master = threading.Lock()
        self._keys_path = self.root / "idempotency.json"
        self._keys: dict[str, str] = {}
        if self._keys_path.exists():
            self._keys = json.loads(self._keys_path.read_text())

    def _lock_for(self, trial_id: str) -> threading.Lock:
        with self._master:
            return self._locks.setdefault(trial_id, threading.Lock())

    def _path(self, trial_id: str) -> Path:
        return self.root / f"{trial_id}.jsonl"

    def trial_ids(self) -> list[str]:
        return sorted(p.stem for p in self.root.glob("*.jsonl"))

    def events(self, trial_id: str) -> list[TrialEvent]:
        if trial_id not in self._cache:
            path = self._path(trial_id)
            if not path.exists():
                raise NotFoundError(trial_id)
            with path.open() as fh:
                self._cache[trial_id] = [TrialEvent.from_json(line) for line in fh if line.strip()]
        return list(self._cache[trial_id])

    def _persist(self, trial_id: str, event: TrialEvent) -> None:
        with self._path(trial_id).open("a") as fh:
            fh.write(event.to_json() + "\n")
            fh.flush()
            os.fsync(fh.fileno())
        self._cache.setdefault(trial_id, []).append(event)

    def create_trial(self, config: dict | TrialConfig, idempotency_key: str | None = None) -> str:
        config_dict = config.to_dict() if isinstance(config, TrialConfig) else dict(config)
        try:
            parsed = TrialConfig.from_dict(config_dict)
        except (DomainError, TypeError, KeyError) as exc:
            raise ValidationError(f"invalid trial config: {exc}") from exc
        if not float(parsed.window_days) > 0.0:
            raise ValidationError("live trials need window_days > 0")
        if parsed.mode is TrialMode.PLAIN:
            raise ValidationError("live trials use a time-to-event mode")
        with self._master:
            if idempotency_key is not None and idempotency_key in self._keys:
                return self._keys[idempotency_key]
            trial_id = uuid.uuid4().hex[:12]
            event = TrialEvent(seq=1, at=0.0, kind="trial_created",
                               payload={"config": parsed.to_dict()})
            self._persist(trial_id, event)
            if idempotency_key is not None:
                self._keys[idempotency_key] = trial_id
                self._keys_path.write_text(json.dumps(self._keys, sort_keys=True))
        return trial_id

    def append(
        self,
        trial_id: str,
        at: float,
        kind: str,
        payload: dict,
        expected_sequence: int | None = None,
        override: bool = False,
    ) -> int:
        with self._lock_for(trial_id):
            events = self.events(trial_id)
            if expected_sequence is not None and events[-1].seq != expected_sequence:
                raise ConflictError(
                    f"expected sequence {expected_sequence}, log is at {events[-1].seq}"
                )
            event = TrialEvent(seq=events[-1].seq + 1, at=float(at), kind=kind,
                               payload=dict(payload))
            replay(events + [event])  # full-history validation
            if not override:
                before = replay(events)
                identified_now = before.identified
                if not identified_now and before.enrolled > 0 and float(at) > before.last_at:
                    # follow-up accrued since the last event can cross the
                    # threshold on its own
                    outcome = _early_stop_at(before, _table_for(before.config), float(at))
                    identified_now = outcome is not None and outcome.identified
                if identified_now:
                    raise ValidationError(
                        "trial is already identified; pass override to keep appending"
                    )
            self._persist(trial_id, event)
            return event.seq
