/** Number formatting: one canonical rendering so displayed values stay
 * comparable with the API fields they came from. */

export function fmt(value: number): string {
  if (!Number.isFinite(value)) return String(value);
  if (Number.isInteger(value) && Math.abs(value) < 1e15) return String(value);
  return value.toPrecision(6).replace(/\.?0+($|e)/, '$1');
}

export function fmtCost(value: number): string {
  return fmt(value);
}

/** Answered-questions share, floored to whole percent (e.g. 10/12 -> "83%"). */
export function answeredPercent(answered: number, total: number): string {
  if (total <= 0) return '100%';
  return `${Math.floor((answered / total) * 100)}%`;
}

export function tierLabel(tier: 'free' | 'low' | 'high'): string {
  return { free: 'free', low: 'low cost', high: 'high cost' }[tier];
}
