// Display-only formatting. State always keeps the exact API values.

export function formatKappa(kappa: number, band: string): string {
  return `${kappa.toFixed(2)} (${band})`;
}

export function formatAgreementPct(pct: number): string {
  return `${pct.toFixed(1)}%`;
}

export function formatScore(score: number): string {
  return score.toFixed(4);
}

export function formatTallies(t: { confirmed: number; rejected: number; unsure: number }): string {
  return `${t.confirmed} confirmed / ${t.rejected} rejected / ${t.unsure} unsure`;
}
