// Display formatting. Every statistic shown on the board goes through
// fmt3 so rendered values match the service JSON to three decimals.

export function fmt3(value: number | null | undefined): string {
  if (value === null || value === undefined || Number.isNaN(value)) {
    return "n/a";
  }
  return value.toFixed(3);
}

export function fmtDay(value: number | null | undefined): string {
  if (value === null || value === undefined || Number.isNaN(value)) {
    return "n/a";
  }
  return Number.isInteger(value) ? String(value) : value.toFixed(1);
}

export function fmtCount(value: number | null | undefined): string {
  if (value === null || value === undefined || Number.isNaN(value)) {
    return "n/a";
  }
  return Number.isInteger(value) ? String(value) : value.toFixed(1);
}

export function fmtPercent(fraction: number): string {
  return `${Math.round(fraction * 100)}%`;
}
