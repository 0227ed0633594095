import { describe, expect, it } from "vitest";

import { buildBoardModel } from "../src/model.js";
import type { DecisionViewDoc, StateDoc } from "../src/types.js";

import interiorDecisionJson from "../fixtures/interior/decision.json";
import interiorStateJson from "../fixtures/interior/state.json";
import topDecisionJson from "../fixtures/top-dose/decision.json";
import topStateJson from "../fixtures/top-dose/state.json";

const topState = topStateJson as unknown as StateDoc;
const topDecision = topDecisionJson as unknown as DecisionViewDoc;
const interiorState = interiorStateJson as unknown as StateDoc;
const interiorDecision = interiorDecisionJson as unknown as DecisionViewDoc;

describe("buildBoardModel on the top-dose fixture", () => {
  const model = buildBoardModel(topState, topDecision);

  it("carries the decision document through untouched", () => {
    expect(model.view).toBe(topDecision);
    expect(model.asOf).toBe(155);
    expect(model.sequence).toBe(topDecision.sequence);
    expect(model.identified).toBe(true);
  });

  it("tracks each patient's window progress at the as-of day", () => {
    expect(model.patients.map((p) => p.id)).toEqual([1, 2, 3]);
    const [p1, p2, p3] = model.patients;
    expect(p1?.status).toBe("complete");
    expect(p2?.status).toBe("complete");
    expect(p3?.status).toBe("pending");
    expect(p3?.observedDays).toBe(35);
    expect(p3?.windowDays).toBe(70);
    expect(p3?.fraction).toBeCloseTo(0.5, 12);
  });

  it("tallies the ladder from events, top dose first", () => {
    expect(model.ladder.map((r) => r.level)).toEqual([4, 3, 2, 1]);
    const top = model.ladder[0];
    expect(top?.enrolled).toBe(3);
    expect(top?.dlts).toBe(0);
    expect(top?.isCurrent).toBe(true);
    expect(model.ladder.slice(1).every((r) => r.enrolled === 0 && !r.isCurrent)).toBe(true);
  });

  it("lists the full event history", () => {
    expect(model.history).toHaveLength(4);
    expect(model.history.every((row) => !row.voided && !row.afterAsOf)).toBe(true);
    expect(model.history[1]?.detail).toBe("patient 1 enrolled at dose 4");
  });
});

describe("buildBoardModel on the interior fixture", () => {
  const model = buildBoardModel(interiorState, interiorDecision);

  it("marks DLT patients and freezes their bars at the event day", () => {
    const dltBars = model.patients.filter((p) => p.status === "dlt");
    expect(dltBars.map((p) => p.id)).toEqual([1, 2, 3]);
    for (const bar of dltBars) {
      expect(bar.dltDay).toBe(40);
      expect(bar.observedDays).toBe(40);
      expect(bar.fraction).toBeCloseTo(40 / 90, 12);
    }
  });

  it("splits the rest into completed and still-pending windows", () => {
    const byId = new Map(model.patients.map((p) => [p.id, p]));
    for (const id of [4, 5, 6, 7]) {
      expect(byId.get(id)?.status).toBe("complete");
    }
    expect(byId.get(8)?.status).toBe("pending");
    expect(byId.get(8)?.observedDays).toBe(60);
    expect(byId.get(9)?.status).toBe("pending");
    expect(byId.get(9)?.observedDays).toBe(30);
  });

  it("puts all nine patients on the current rung with three DLTs", () => {
    const rung = model.ladder.find((r) => r.level === 2);
    expect(rung?.enrolled).toBe(9);
    expect(rung?.dlts).toBe(3);
    expect(rung?.isCurrent).toBe(true);
    expect(model.ladder).toHaveLength(6);
  });
});

describe("buildBoardModel bookkeeping rules", () => {
  it("ignores events after the view's as-of day but keeps them in history", () => {
    const earlier = { ...topDecision, as_of: 100, current_dose: 4 };
    const model = buildBoardModel(topState, earlier);
    expect(model.patients.map((p) => p.id)).toEqual([1, 2]);
    const lastRow = model.history[model.history.length - 1];
    expect(lastRow?.afterAsOf).toBe(true);
    expect(model.history).toHaveLength(4);
  });

  it("drops voided events from bars and tallies but strikes them in history", () => {
    const corrected: StateDoc = {
      ...interiorState,
      events: [
        ...interiorState.events,
        { seq: 14, at: 170, kind: "correction", ref: 11 },
      ],
    };
    const model = buildBoardModel(corrected, interiorDecision);
    const p3 = model.patients.find((p) => p.id === 3);
    expect(p3?.status).toBe("complete");
    expect(p3?.dltDay).toBeNull();
    const rung = model.ladder.find((r) => r.level === 2);
    expect(rung?.dlts).toBe(2);
    const struck = model.history.find((row) => row.seq === 11);
    expect(struck?.voided).toBe(true);
    const correctionRow = model.history.find((row) => row.seq === 14);
    expect(correctionRow?.detail).toBe("voided event 11");
  });
});
