import type {
  DecisionViewDoc,
  EventDoc,
  StateDoc,
  TrialConfigDoc,
} from "./types.js";

// The board model is pure bookkeeping over the event history: who is
// enrolled where, and how far each assessment window has progressed at
// the view's as-of time. Every statistic (retainment, decision,
// thresholds, budget, effective counts) is taken verbatim from the
// decision document; nothing here recomputes them.

export type PatientStatus = "pending" | "complete" | "dlt";

export interface PatientBar {
  id: number;
  dose: number;
  enrolledAt: number;
  observedDays: number;
  windowDays: number;
  fraction: number;
  status: PatientStatus;
  dltDay: number | null;
}

export interface LadderRung {
  level: number;
  enrolled: number;
  dlts: number;
  isCurrent: boolean;
}

export interface HistoryRow {
  seq: number;
  at: number;
  kind: string;
  detail: string;
  voided: boolean;
  afterAsOf: boolean;
}

export interface TrialBoardModel {
  trialId: string;
  asOf: number;
  sequence: number;
  identified: boolean;
  view: DecisionViewDoc;
  config: TrialConfigDoc;
  ladder: LadderRung[];
  patients: PatientBar[];
  history: HistoryRow[];
}

export function buildBoardModel(
  state: StateDoc,
  view: DecisionViewDoc,
): TrialBoardModel {
  const asOf = view.as_of;
  const voided = voidedSequences(state.events);
  const active = state.events.filter(
    (e) => !voided.has(e.seq) && e.kind !== "correction" && e.at <= asOf,
  );

  const window = state.config.window_days;
  const patients = new Map<number, PatientBar>();
  for (const event of active) {
    if (event.kind === "patient_enrolled" && event.id !== undefined) {
      patients.set(event.id, {
        id: event.id,
        dose: event.dose ?? 0,
        enrolledAt: event.at,
        observedDays: 0,
        windowDays: window,
        fraction: 0,
        status: "pending",
        dltDay: null,
      });
    }
  }
  for (const event of active) {
    if (event.id === undefined) {
      continue;
    }
    const patient = patients.get(event.id);
    if (patient === undefined) {
      continue;
    }
    if (event.kind === "dlt_observed") {
      patient.status = "dlt";
      patient.dltDay = event.day ?? null;
    } else if (event.kind === "assessment_completed" && patient.status === "pending") {
      patient.status = "complete";
    }
  }
  for (const patient of patients.values()) {
    const elapsed = Math.max(0, asOf - patient.enrolledAt);
    if (patient.status === "dlt") {
      patient.observedDays = Math.min(patient.dltDay ?? elapsed, window);
    } else {
      patient.observedDays = Math.min(elapsed, window);
      if (patient.observedDays >= window) {
        patient.status = "complete";
      }
    }
    patient.fraction = window > 0 ? patient.observedDays / window : 1;
  }

  const ladder: LadderRung[] = [];
  for (let level = state.config.n_doses; level >= 1; level -= 1) {
    ladder.push({ level, enrolled: 0, dlts: 0, isCurrent: level === view.current_dose });
  }
  for (const patient of patients.values()) {
    const rung = ladder.find((r) => r.level === patient.dose);
    if (rung !== undefined) {
      rung.enrolled += 1;
      if (patient.status === "dlt") {
        rung.dlts += 1;
      }
    }
  }

  const history = state.events.map((event) => ({
    seq: event.seq,
    at: event.at,
    kind: event.kind,
    detail: describeEvent(event),
    voided: voided.has(event.seq),
    afterAsOf: event.at > asOf,
  }));

  return {
    trialId: state.trial_id,
    asOf,
    sequence: view.sequence,
    identified: view.identified,
    view,
    config: state.config,
    ladder,
    patients: [...patients.values()].sort((a, b) => a.id - b.id),
    history,
  };
}

function voidedSequences(events: EventDoc[]): Set<number> {
  const voided = new Set<number>();
  for (const event of events) {
    if (event.kind === "correction" && event.ref !== undefined) {
      voided.add(event.ref);
    }
  }
  return voided;
}

function describeEvent(event: EventDoc): string {
  switch (event.kind) {
    case "trial_created":
      return "trial created";
    case "patient_enrolled":
      return `patient ${event.id} enrolled at dose ${event.dose}`;
    case "dlt_observed":
      return `patient ${event.id} had a DLT on day ${event.day}`;
    case "assessment_completed":
      return `patient ${event.id} completed the assessment window`;
    case "correction":
      return `voided event ${event.ref}`;
    default:
      return event.kind;
  }
}
