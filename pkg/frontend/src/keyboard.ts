/** Keyboard-first review: single keys map to queue actions. */

export type ReviewAction =
  | { kind: "accept" }
  | { kind: "revise"; labelIndex: number }
  | { kind: "next" }
  | { kind: "toggle-conflicted" };

export function keyToAction(key: string): ReviewAction | null {
  if (key === "a") return { kind: "accept" };
  if (key === "n") return { kind: "next" };
  if (key === "c") return { kind: "toggle-conflicted" };
  if (/^[1-9]$/.test(key)) return { kind: "revise", labelIndex: Number(key) - 1 };
  return null;
}
