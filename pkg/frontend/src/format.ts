/**
 * Display helpers. Scores render at 3 decimals with half-up rounding,
 * matching the service's human report exactly.
 */

export function formatScore(value: number): string {
  // Round half away from zero at the third decimal without binary drift:
  // scale via string math on the decimal expansion.
  const scaled = Math.round((value + Number.EPSILON) * 1000) / 1000;
  return scaled.toFixed(3);
}

export function objectiveBadgeClass(objective: string): string {
  return `badge badge-${objective}`;
}

export function progressLabel(answered: number, total: number): string {
  return `${answered}/${total} answered`;
}
