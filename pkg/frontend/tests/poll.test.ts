import { afterEach, beforeEach, describe, expect, it, vi } from "vitest";

import { ServiceClient } from "../src/api.js";
import { BoardController } from "../src/app.js";
import { Poller } from "../src/poll.js";
import type { DecisionViewDoc, StateDoc } from "../src/types.js";
import { jsonResponse, makeFetch } from "./helpers.js";

import topDecisionJson from "../fixtures/top-dose/decision.json";
import topStateJson from "../fixtures/top-dose/state.json";

const topState = topStateJson as unknown as StateDoc;
const topDecision = topDecisionJson as unknown as DecisionViewDoc;

describe("Poller", () => {
  beforeEach(() => {
    vi.useFakeTimers();
  });

  afterEach(() => {
    vi.useRealTimers();
  });

  it("ticks immediately and then on every interval", async () => {
    let ticks = 0;
    const poller = new Poller(async () => {
      ticks += 1;
    }, 2000);
    poller.start();
    await vi.advanceTimersByTimeAsync(0);
    expect(ticks).toBe(1);
    await vi.advanceTimersByTimeAsync(6000);
    expect(ticks).toBe(4);
    poller.stop();
    await vi.advanceTimersByTimeAsync(4000);
    expect(ticks).toBe(4);
  });

  it("skips intervals while a slow tick is still in flight", async () => {
    let started = 0;
    let release: (() => void) | undefined;
    const poller = new Poller(async () => {
      started += 1;
      await new Promise<void>((resolve) => {
        release = resolve;
      });
    }, 2000);
    poller.start();
    await vi.advanceTimersByTimeAsync(0);
    expect(started).toBe(1);
    await vi.advanceTimersByTimeAsync(6000);
    expect(started).toBe(1);
    release?.();
    await vi.advanceTimersByTimeAsync(2000);
    expect(started).toBe(2);
    poller.stop();
    release?.();
  });

  it("does not start twice", async () => {
    let ticks = 0;
    const poller = new Poller(async () => {
      ticks += 1;
    }, 2000);
    poller.start();
    poller.start();
    await vi.advanceTimersByTimeAsync(0);
    expect(ticks).toBe(1);
    poller.stop();
  });
});

describe("board refresh failure handling", () => {
  beforeEach(() => {
    document.body.replaceChildren();
  });

  it("replaces the whole board with an error banner, leaving no stale numbers", async () => {
    let healthy = true;
    const good = makeFetch([
      { method: "GET", path: /state$/, reply: topState },
      { method: "GET", path: /decision/, reply: topDecision },
    ]);
    const fetchFn = async (url: string, init?: RequestInit): Promise<Response> => {
      if (!healthy) {
        return jsonResponse({ code: "internal", message: "replay failed" }, 500);
      }
      return good.fetchFn(url, init);
    };
    const board = document.createElement("div");
    document.body.append(board);
    const controller = new BoardController(
      new ServiceClient("", fetchFn),
      topState.trial_id,
      board,
    );

    await controller.refresh();
    expect(board.querySelector('[data-testid="retainment-value"]')?.textContent).toBe(
      "0.936",
    );
    expect(board.querySelector('[data-testid="error-banner"]')).toBeNull();

    healthy = false;
    await controller.refresh();
    const banner = board.querySelector('[data-testid="error-banner"]');
    expect(banner?.textContent).toBe("replay failed");
    expect(board.querySelector('[data-testid="retainment-value"]')).toBeNull();
    expect(board.querySelector('[data-testid="decision-banner"]')).toBeNull();
    expect(board.querySelectorAll('[data-testid^="history-row-"]')).toHaveLength(0);
    expect(board.textContent).not.toContain("0.936");

    healthy = true;
    await controller.refresh();
    expect(board.querySelector('[data-testid="error-banner"]')).toBeNull();
    expect(board.querySelector('[data-testid="retainment-value"]')?.textContent).toBe(
      "0.936",
    );
  });

  it("reports an unreachable service without throwing", async () => {
    const board = document.createElement("div");
    document.body.append(board);
    const controller = new BoardController(
      new ServiceClient("", async () => {
        throw new TypeError("fetch failed");
      }),
      "t1",
      board,
    );
    await controller.refresh();
    const banner = board.querySelector('[data-testid="error-banner"]');
    expect(banner?.textContent).toContain("unreachable");
  });

  it("polls on the configured cadence", async () => {
    vi.useFakeTimers();
    try {
      const { fetchFn, calls } = makeFetch([
        { method: "GET", path: /state$/, reply: topState },
        { method: "GET", path: /decision/, reply: topDecision },
      ]);
      const board = document.createElement("div");
      document.body.append(board);
      const controller = new BoardController(
        new ServiceClient("", fetchFn),
        topState.trial_id,
        board,
        null,
        { intervalMs: 2000 },
      );
      controller.start();
      await vi.advanceTimersByTimeAsync(0);
      expect(calls.filter((c) => c.url.includes("/decision")).length).toBe(1);
      await vi.advanceTimersByTimeAsync(4000);
      expect(calls.filter((c) => c.url.includes("/decision")).length).toBe(3);
      controller.stop();
    } finally {
      vi.useRealTimers();
    }
  });
});
