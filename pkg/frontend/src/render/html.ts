export function esc(text: unknown): string {
  return String(text ?? "")
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;");
}

/** Message body as displayed; payloads without a body render as JSON. */
export function bodyText(payload: Record<string, unknown>): string {
  if (typeof payload["body"] === "string") return payload["body"];
  return JSON.stringify(payload);
}

export const VERDICT_MARKS: Record<string, string> = {
  pass: "✓",
  fail: "✗",
  unknown: "?",
};

/** 12 visually distinct hues; color indexes past the palette wrap around. */
export const COLOR_WHEEL = [
  "#4e79a7",
  "#f28e2b",
  "#e15759",
  "#76b7b2",
  "#59a14f",
  "#edc948",
  "#b07aa1",
  "#ff9da7",
  "#9c755f",
  "#bab0ac",
  "#86bcb6",
  "#d37295",
];

export function colorFor(index: number): string {
  return COLOR_WHEEL[((index % COLOR_WHEEL.length) + COLOR_WHEEL.length) % COLOR_WHEEL.length]!;
}
