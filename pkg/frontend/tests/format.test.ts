import { describe, expect, it } from "vitest";

import { fmt3, fmtCount, fmtDay, fmtPercent } from "../src/format.js";

describe("fmt3", () => {
  it("renders three decimals", () => {
    expect(fmt3(0.9362666344634143)).toBe("0.936");
    expect(fmt3(0.4038461538461525)).toBe("0.404");
    expect(fmt3(0.8)).toBe("0.800");
    expect(fmt3(0)).toBe("0.000");
  });

  it("renders n/a for missing values", () => {
    expect(fmt3(null)).toBe("n/a");
    expect(fmt3(undefined)).toBe("n/a");
    expect(fmt3(Number.NaN)).toBe("n/a");
  });
});

describe("fmtDay and fmtCount", () => {
  it("drops the fraction for whole numbers", () => {
    expect(fmtDay(155)).toBe("155");
    expect(fmtDay(155.0)).toBe("155");
    expect(fmtCount(6)).toBe("6");
  });

  it("keeps one decimal otherwise", () => {
    expect(fmtDay(35.5)).toBe("35.5");
    expect(fmtCount(6.5)).toBe("6.5");
    expect(fmtCount(2.5)).toBe("2.5");
  });

  it("renders n/a for missing values", () => {
    expect(fmtDay(null)).toBe("n/a");
    expect(fmtCount(undefined)).toBe("n/a");
  });
});

describe("fmtPercent", () => {
  it("rounds to whole percent", () => {
    expect(fmtPercent(0.5)).toBe("50%");
    expect(fmtPercent(0.936)).toBe("94%");
    expect(fmtPercent(1)).toBe("100%");
    expect(fmtPercent(0)).toBe("0%");
  });
});
