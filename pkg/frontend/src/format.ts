/** Display formatting: every number the UI shows goes through here. */

/** Format to 3 significant digits, trimming exponent noise for small values. */
export function formatNumber(value: number): string {
  if (!Number.isFinite(value)) return String(value);
  if (value === 0) return "0";
  const formatted = value.toPrecision(3);
  // toPrecision can yield exponent forms like 1.23e-4; keep them as-is but
  // normalize integer-valued outputs such as 15.0 -> 15.
  return String(Number(formatted));
}
