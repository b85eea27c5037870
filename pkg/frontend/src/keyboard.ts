// Keyboard-first review: j/k moves, 1/2/3 decides. Reviewers process
// hundreds of items, so every action has a key.

export type ReviewAction =
  | { kind: "move"; delta: number }
  | { kind: "decide"; choice: "political" | "non_political" | "unsure" };

const KEYMAP: Record<string, ReviewAction> = {
  j: { kind: "move", delta: 1 },
  k: { kind: "move", delta: -1 },
  ArrowDown: { kind: "move", delta: 1 },
  ArrowUp: { kind: "move", delta: -1 },
  "1": { kind: "decide", choice: "political" },
  "2": { kind: "decide", choice: "non_political" },
  "3": { kind: "decide", choice: "unsure" },
};

export function actionForKey(key: string): ReviewAction | null {
  return KEYMAP[key] ?? null;
}
