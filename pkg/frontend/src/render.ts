import { fmt3, fmtCount, fmtDay, fmtPercent } from "./format.js";
import type { TrialBoardModel } from "./model.js";
import type { DecisionViewDoc } from "./types.js";

// Renders the trial board into a host element. Each call replaces the
// host's children wholesale: an error render therefore never leaves
// stale numbers from an earlier successful render on screen.

export type BoardState =
  | { kind: "loading" }
  | { kind: "error"; message: string }
  | { kind: "ready"; model: TrialBoardModel };

export function renderBoard(host: HTMLElement, state: BoardState): void {
  host.replaceChildren();
  if (state.kind === "loading") {
    host.appendChild(el("p", { class: "muted", "data-testid": "loading" }, "loading trial..."));
    return;
  }
  if (state.kind === "error") {
    host.appendChild(
      el("div", { class: "error-banner", role: "alert", "data-testid": "error-banner" }, state.message),
    );
    return;
  }
  const model = state.model;
  host.appendChild(renderHeader(model));
  host.appendChild(renderDecision(model.view));
  const columns = el("div", { class: "columns" });
  columns.appendChild(renderLadder(model));
  columns.appendChild(renderPatients(model));
  host.appendChild(columns);
  host.appendChild(renderSnapshot(model.view));
  host.appendChild(renderHistory(model));
}

function renderHeader(model: TrialBoardModel): HTMLElement {
  const header = el("header", { class: "board-header" });
  header.appendChild(el("h1", {}, `Trial ${model.trialId}`));
  header.appendChild(
    el(
      "p",
      { class: "muted" },
      `${model.config.design} / ${model.config.mode} at day ${fmtDay(model.asOf)}, ` +
        `event ${model.sequence}`,
    ),
  );
  return header;
}

export function renderDecision(view: DecisionViewDoc): HTMLElement {
  const section = el("section", { class: "decision", "data-testid": "decision-panel" });
  const bannerText = view.identified
    ? `MTD identified: dose ${view.early_stop?.mtd_level ?? view.current_dose}`
    : view.decision === null
      ? "awaiting enrollment data"
      : `recommended action: ${view.decision}`;
  const bannerClass = view.identified ? "banner identified" : "banner";
  const banner = el("div", { class: bannerClass, "data-testid": "decision-banner" }, bannerText);
  banner.dataset.decision = view.decision ?? "";
  banner.dataset.identified = String(view.identified);
  section.appendChild(banner);
  section.appendChild(renderGauge(view));
  return section;
}

function renderGauge(view: DecisionViewDoc): HTMLElement {
  const gauge = el("div", { class: "gauge", "data-testid": "retainment-gauge" });
  const disabled = view.retainment === null;
  if (disabled) {
    gauge.classList.add("disabled");
  }
  gauge.appendChild(el("span", { class: "gauge-label" }, "retainment"));
  gauge.appendChild(
    el("span", { class: "gauge-value", "data-testid": "retainment-value" }, fmt3(view.retainment)),
  );
  gauge.appendChild(
    el(
      "span",
      { class: "gauge-threshold", "data-testid": "retainment-threshold" },
      `threshold ${fmt3(view.threshold)}`,
    ),
  );
  const track = el("div", { class: "gauge-track" });
  if (!disabled && view.retainment !== null) {
    const fill = el("div", { class: "gauge-fill" });
    fill.style.width = fmtPercent(Math.max(0, Math.min(1, view.retainment)));
    track.appendChild(fill);
    if (view.threshold !== null) {
      const marker = el("div", { class: "gauge-marker" });
      marker.style.left = fmtPercent(Math.max(0, Math.min(1, view.threshold)));
      track.appendChild(marker);
    }
  }
  gauge.appendChild(track);
  return gauge;
}

function renderLadder(model: TrialBoardModel): HTMLElement {
  const section = el("section", { class: "ladder", "data-testid": "dose-ladder" });
  section.appendChild(el("h2", {}, "dose ladder"));
  const list = el("ul", {});
  for (const rung of model.ladder) {
    const item = el("li", {
      class: rung.isCurrent ? "rung current" : "rung",
      "data-testid": `dose-rung-${rung.level}`,
    });
    item.appendChild(el("span", { class: "rung-level" }, `dose ${rung.level}`));
    item.appendChild(
      el("span", { class: "rung-counts" }, `${rung.enrolled} enrolled, ${rung.dlts} DLT`),
    );
    if (rung.isCurrent) {
      item.appendChild(el("span", { class: "rung-badge" }, "current"));
    }
    list.appendChild(item);
  }
  section.appendChild(list);
  return section;
}

function renderPatients(model: TrialBoardModel): HTMLElement {
  const section = el("section", { class: "patients", "data-testid": "patient-bars" });
  section.appendChild(el("h2", {}, "follow-up"));
  if (model.patients.length === 0) {
    section.appendChild(el("p", { class: "muted" }, "no patients enrolled yet"));
    return section;
  }
  const list = el("ul", {});
  for (const patient of model.patients) {
    const item = el("li", {
      class: `patient ${patient.status}`,
      "data-testid": `patient-bar-${patient.id}`,
    });
    item.appendChild(
      el(
        "span",
        { class: "patient-label" },
        `patient ${patient.id} (dose ${patient.dose})`,
      ),
    );
    const track = el("div", { class: "bar-track" });
    const fill = el("div", { class: `bar-fill ${patient.status}` });
    fill.style.width = fmtPercent(Math.max(0, Math.min(1, patient.fraction)));
    track.appendChild(fill);
    item.appendChild(track);
    const statusText =
      patient.status === "dlt"
        ? `DLT on day ${fmtDay(patient.dltDay)}`
        : patient.status === "complete"
          ? "window complete"
          : `${fmtDay(patient.observedDays)} of ${fmtDay(patient.windowDays)} days`;
    item.appendChild(
      el("span", { class: "patient-status", "data-testid": `patient-status-${patient.id}` }, statusText),
    );
    list.appendChild(item);
  }
  section.appendChild(list);
  return section;
}

function renderSnapshot(view: DecisionViewDoc): HTMLElement {
  const section = el("section", { class: "snapshot", "data-testid": "snapshot-panel" });
  section.appendChild(el("h2", {}, `current dose ${view.current_dose}`));
  const snap = view.snapshot;
  const rows: Array<[string, string, string]> = [
    ["enrolled", String(snap.n), "snapshot-n"],
    ["DLTs", String(snap.n_dlt), "snapshot-ndlt"],
    ["effective no-DLT", fmtCount(snap.n_e), "snapshot-ne"],
    ["pending", String(snap.pending_count), "snapshot-pending"],
    ["remaining budget", String(view.budget.r), "budget-r"],
    ["pending-adjusted budget", fmtCount(view.budget.r_pend), "budget-rpend"],
  ];
  const dl = el("dl", {});
  for (const [label, value, testid] of rows) {
    dl.appendChild(el("dt", {}, label));
    dl.appendChild(el("dd", { "data-testid": testid }, value));
  }
  section.appendChild(dl);
  return section;
}

function renderHistory(model: TrialBoardModel): HTMLElement {
  const section = el("section", { class: "history", "data-testid": "event-history" });
  section.appendChild(el("h2", {}, "event history"));
  const table = el("table", {});
  const head = el("tr", {});
  for (const title of ["#", "day", "event"]) {
    head.appendChild(el("th", {}, title));
  }
  table.appendChild(head);
  for (const row of model.history) {
    const classes = ["history-row"];
    if (row.voided) {
      classes.push("voided");
    }
    if (row.afterAsOf) {
      classes.push("future");
    }
    const tr = el("tr", { class: classes.join(" "), "data-testid": `history-row-${row.seq}` });
    tr.appendChild(el("td", {}, String(row.seq)));
    tr.appendChild(el("td", {}, fmtDay(row.at)));
    tr.appendChild(el("td", {}, row.detail));
    table.appendChild(tr);
  }
  section.appendChild(table);
  return section;
}

export function el(
  tag: string,
  attrs: Record<string, string> = {},
  text?: string,
): HTMLElement {
  const node = document.createElement(tag);
  for (const [name, value] of Object.entries(attrs)) {
    node.setAttribute(name, value);
  }
  if (text !== undefined) {
    node.textContent = text;
  }
  return node;
}
