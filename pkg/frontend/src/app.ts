import { ServiceClient } from "./api.js";
import { buildBoardModel } from "./model.js";
import { Poller } from "./poll.js";
import { renderBoard } from "./render.js";
import type { HypotheticalEvent } from "./types.js";
import {
  describeWhatIfError,
  renderWhatIfPanel,
  runWhatIf,
  type WhatIfState,
} from "./whatif.js";

// Board controller: polls the service every two seconds, rebuilds the
// model from the responses, and re-renders. A failed refresh replaces
// the whole board with an error banner so no stale statistics linger.

export interface BoardOptions {
  intervalMs?: number;
  asOf?: number | null;
}

export class BoardController {
  readonly poller: Poller;
  private asOf: number | null;

  constructor(
    private readonly client: ServiceClient,
    private readonly trialId: string,
    private readonly boardHost: HTMLElement,
    private readonly whatIfHost: HTMLElement | null = null,
    options: BoardOptions = {},
  ) {
    this.asOf = options.asOf ?? null;
    this.poller = new Poller(() => this.refresh(), options.intervalMs ?? 2000);
  }

  start(): void {
    renderBoard(this.boardHost, { kind: "loading" });
    this.poller.start();
  }

  stop(): void {
    this.poller.stop();
  }

  async refresh(): Promise<void> {
    try {
      const [state, view] = await Promise.all([
        this.client.getState(this.trialId),
        this.client.getDecision(this.trialId, this.asOf),
      ]);
      renderBoard(this.boardHost, {
        kind: "ready",
        model: buildBoardModel(state, view),
      });
    } catch (exc) {
      const message = exc instanceof Error ? exc.message : String(exc);
      renderBoard(this.boardHost, { kind: "error", message });
    }
  }

  async explore(events: HypotheticalEvent[]): Promise<void> {
    if (this.whatIfHost === null) {
      return;
    }
    let state: WhatIfState;
    try {
      const outcome = await runWhatIf(this.client, this.trialId, this.asOf, events);
      state = { kind: "ready", outcome };
    } catch (exc) {
      state = { kind: "invalid", message: describeWhatIfError(exc) };
    }
    renderWhatIfPanel(this.whatIfHost, state);
  }

  clearExploration(): void {
    if (this.whatIfHost !== null) {
      renderWhatIfPanel(this.whatIfHost, { kind: "idle" });
    }
  }
}

export interface WhatIfFormValues {
  patientId: string;
  dltDay: string;
  reportedAt: string;
}

// Translates the form's raw strings into hypothetical events. All three
// fields blank means "no hypothetical events", which the controller
// resolves without contacting the what-if endpoint.
export function parseWhatIfForm(values: WhatIfFormValues): HypotheticalEvent[] {
  const fields = [values.patientId.trim(), values.dltDay.trim(), values.reportedAt.trim()];
  if (fields.every((f) => f === "")) {
    return [];
  }
  const numbers = fields.map((f) => (f === "" ? Number.NaN : Number(f)));
  if (numbers.some((n) => !Number.isFinite(n))) {
    throw new Error("patient, day, and reported-at must all be numbers");
  }
  const [id, day, at] = numbers as [number, number, number];
  return [{ kind: "dlt_observed", at, id, day }];
}
