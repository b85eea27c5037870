// Pure state transitions for the review queues. No fetch, no DOM: the
// controllers own IO and call into these, which keeps every rule testable.

import type { Flag, Tallies, TriageItem, Verdict } from "./types.js";

export interface TriageState {
  queue: TriageItem[]; // unreviewed flags, descending score
  cursor: number;
  tallies: Tallies;
  error: string | null;
}

/** Running totals over every flag: confirmed = political, rejected =
 * non_political. Unreviewed flags count in none of the buckets. */
export function computeTallies(flags: Pick<Flag, "verdict">[]): Tallies {
  const tallies: Tallies = { confirmed: 0, rejected: 0, unsure: 0 };
  for (const flag of flags) {
    if (flag.verdict === "political") tallies.confirmed += 1;
    else if (flag.verdict === "non_political") tallies.rejected += 1;
    else if (flag.verdict === "unsure") tallies.unsure += 1;
  }
  return tallies;
}

export function initialTriage(items: TriageItem[], allFlags: Flag[]): TriageState {
  const queue = items
    .filter((item) => item.verdict === "unreviewed")
    .slice()
    .sort((a, b) => b.score - a.score || (a.ad_id < b.ad_id ? -1 : 1));
  return { queue, cursor: 0, tallies: computeTallies(allFlags), error: null };
}

export function currentItem(state: TriageState): TriageItem | null {
  return state.queue[state.cursor] ?? null;
}

export function moveCursor(state: TriageState, delta: number): TriageState {
  if (state.queue.length === 0) return { ...state, cursor: 0 };
  const cursor = Math.min(Math.max(state.cursor + delta, 0), state.queue.length - 1);
  return { ...state, cursor };
}

export interface PendingVerdict {
  item: TriageItem;
  index: number;
  verdict: Exclude<Verdict, "unreviewed">;
}

/** Optimistically remove the cursor item and bump its tally; the returned
 * receipt lets a failed write roll everything back. */
export function applyVerdict(
  state: TriageState,
  verdict: Exclude<Verdict, "unreviewed">,
): { state: TriageState; pending: PendingVerdict } | null {
  const item = currentItem(state);
  if (item === null) return null;
  const index = state.cursor;
  const queue = state.queue.filter((_, i) => i !== index);
  const tallies = { ...state.tallies };
  if (verdict === "political") tallies.confirmed += 1;
  else if (verdict === "non_political") tallies.rejected += 1;
  else tallies.unsure += 1;
  return {
    state: {
      queue,
      cursor: Math.min(index, Math.max(queue.length - 1, 0)),
      tallies,
      error: null,
    },
    pending: { item, index, verdict },
  };
}

/** Undo a failed optimistic verdict: the item returns to its slot and the
 * tally is restored, with a visible error. */
export function rollbackVerdict(state: TriageState, pending: PendingVerdict, message: string): TriageState {
  const queue = state.queue.slice();
  queue.splice(Math.min(pending.index, queue.length), 0, pending.item);
  const tallies = { ...state.tallies };
  if (pending.verdict === "political") tallies.confirmed -= 1;
  else if (pending.verdict === "non_political") tallies.rejected -= 1;
  else tallies.unsure -= 1;
  return { queue, cursor: pending.index, tallies, error: message };
}

// --- annotation queue -------------------------------------------------------

export interface AnnotateState {
  queue: { id: string; text: string; advertiser_name: string; disclaimer: string | null }[];
  cursor: number;
  labeled: number;
  error: string | null;
}

export function initialAnnotate(ads: AnnotateState["queue"]): AnnotateState {
  return { queue: ads, cursor: 0, labeled: 0, error: null };
}

export function annotateCurrent(state: AnnotateState) {
  return state.queue[state.cursor] ?? null;
}

export function annotateMove(state: AnnotateState, delta: number): AnnotateState {
  if (state.queue.length === 0) return { ...state, cursor: 0 };
  const cursor = Math.min(Math.max(state.cursor + delta, 0), state.queue.length - 1);
  return { ...state, cursor };
}

/** Called only after the label write succeeded; the ad leaves the queue
 * exactly then, never before. */
export function annotateComplete(state: AnnotateState, adId: string): AnnotateState {
  const index = state.queue.findIndex((ad) => ad.id === adId);
  if (index < 0) return state;
  const queue = state.queue.filter((_, i) => i !== index);
  return {
    queue,
    cursor: Math.min(index, Math.max(queue.length - 1, 0)),
    labeled: state.labeled + 1,
    error: null,
  };
}
