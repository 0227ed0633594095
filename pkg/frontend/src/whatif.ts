import { ApiError, ServiceClient } from "./api.js";
import { el, renderDecision } from "./render.js";
import type { DecisionViewDoc, HypotheticalEvent, WhatIfDoc } from "./types.js";

// Hypothetical exploration. The service evaluates hypothetical events in
// memory and never appends them, so this panel can be used freely while
// a trial is live. An empty hypothetical list is resolved client-side as
// "no change": both sides show the same stored decision view and no
// what-if request is issued at all.

export async function runWhatIf(
  client: ServiceClient,
  trialId: string,
  asOf: number | null,
  events: HypotheticalEvent[],
): Promise<WhatIfDoc> {
  if (events.length === 0) {
    const view = await client.getDecision(trialId, asOf);
    return { baseline: view, hypothetical: view };
  }
  return client.whatIf(trialId, asOf, events);
}

export type WhatIfState =
  | { kind: "idle" }
  | { kind: "invalid"; message: string }
  | { kind: "ready"; outcome: WhatIfDoc };

export function renderWhatIfPanel(host: HTMLElement, state: WhatIfState): void {
  host.replaceChildren();
  host.appendChild(el("h2", {}, "what if"));
  if (state.kind === "idle") {
    host.appendChild(
      el("p", { class: "muted", "data-testid": "whatif-idle" }, "add hypothetical events to compare"),
    );
    return;
  }
  if (state.kind === "invalid") {
    host.appendChild(
      el("p", { class: "invalid", "data-testid": "whatif-invalid" }, state.message),
    );
    return;
  }
  const sides = el("div", { class: "whatif-sides" });
  sides.appendChild(renderSide("as recorded", state.outcome.baseline, "whatif-baseline"));
  sides.appendChild(renderSide("hypothetical", state.outcome.hypothetical, "whatif-hypothetical"));
  host.appendChild(sides);
}

function renderSide(title: string, view: DecisionViewDoc, testid: string): HTMLElement {
  const side = el("div", { class: "whatif-side", "data-testid": testid });
  side.appendChild(el("h3", {}, title));
  side.appendChild(renderDecision(view));
  return side;
}

export function describeWhatIfError(exc: unknown): string {
  if (exc instanceof ApiError) {
    return `rejected: ${exc.message}`;
  }
  return exc instanceof Error ? exc.message : String(exc);
}
