// JSON document shapes returned by the decision service. The dashboard
// renders these verbatim; it never computes statistics on its own.

export interface SnapshotDoc {
  dose_level: number;
  n: number;
  n_dlt: number;
  n_nodlt: number;
  n_e: number;
  pend_observed_frac: number;
  pend_unobserved_frac: number;
  pending_count: number;
}

export interface BudgetDoc {
  r: number;
  r_pend: number;
}

export interface EarlyStopDoc {
  identified: boolean;
  mtd_level: number | null;
  retainment: number;
  threshold_used: number;
}

export interface DecisionViewDoc {
  as_of: number;
  budget: BudgetDoc;
  current_dose: number;
  decision: string | null;
  early_stop: EarlyStopDoc | null;
  identified: boolean;
  retainment: number | null;
  sequence: number;
  snapshot: SnapshotDoc;
  threshold: number | null;
}

export interface EventDoc {
  seq: number;
  at: number;
  kind: string;
  id?: number;
  dose?: number;
  day?: number;
  ref?: number;
  config?: Record<string, unknown>;
  [key: string]: unknown;
}

export interface TrialConfigDoc {
  design: string;
  mode: string;
  n_max: number;
  n_doses: number;
  cohort_size: number;
  start_dose: number;
  target: number;
  window_days: number;
  [key: string]: unknown;
}

export interface StateDoc {
  trial_id: string;
  sequence: number;
  identified: boolean;
  config: TrialConfigDoc;
  events: EventDoc[];
}

export interface HypotheticalEvent {
  kind: string;
  at: number;
  id?: number;
  dose?: number;
  day?: number;
  ref?: number;
}

export interface WhatIfDoc {
  baseline: DecisionViewDoc;
  hypothetical: DecisionViewDoc;
}

export interface ErrorDoc {
  code: string;
  message: string;
}
