/** Tiny HTML helpers. No templating engine; views build strings. */

const REPLACEMENTS: Record<string, string> = {
  "&": "&amp;",
  "<": "&lt;",
  ">": "&gt;",
  '"': "&quot;",
  "'": "&#39;",
};

export function esc(value: string | number): string {
  return String(value).replace(/[&<>"']/g, (ch) => REPLACEMENTS[ch] ?? ch);
}

/** Join non-empty parts with newlines; keeps view code free of filter noise. */
export function lines(...parts: Array<string | null | undefined>): string {
  return parts.filter((p): p is string => Boolean(p)).join("\n");
}
