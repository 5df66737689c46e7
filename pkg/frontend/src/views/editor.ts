/** Delegation editor: the participant's outgoing edges, grouped so the
 * precedence story reads top to bottom. Which edge actually carries the unit
 * for a given issue comes from the server's chain report, never from local
 * reasoning about scopes. */

import { esc, lines } from "../html.js";
import type { ChainReport, DelegationRow, DelegationScope } from "../types.js";

function scopeLabel(scope: DelegationScope): string {
  switch (scope.kind) {
    case "issue":
      return `for issue ${scope.issue ?? ""}`;
    case "topic":
      return `for topic ${scope.topic ?? ""}`;
    default:
      return "everywhere else";
  }
}

function row(d: DelegationRow, carries: boolean): string {
  const badge = carries ? ` <span class="carries-badge">carries your unit here</span>` : "";
  return (
    `<li class="delegation-row${carries ? " active" : ""}" data-scope="${esc(d.scope.kind)}">` +
    `${esc(scopeLabel(d.scope))} &rarr; <strong>${esc(d.target)}</strong>` +
    `${badge}</li>`
  );
}

function summaryLine(active: ChainReport): string {
  const issue = esc(active.issue);
  if (active.terminal === "self") {
    return `<p class="editor-summary">You voted directly on <strong>${issue}</strong>; no delegation applies there.</p>`;
  }
  const first = active.hops[0];
  if (first === undefined) {
    return `<p class="editor-summary">No delegation applies to <strong>${issue}</strong>.</p>`;
  }
  return (
    `<p class="editor-summary">For <strong>${issue}</strong>, your unit currently flows to ` +
    `<strong>${esc(first)}</strong>.</p>`
  );
}

/** Render the editor. ``active`` is the chain report for the issue the page
 * is focused on; the row whose target the server names first gets the badge. */
export function delegationEditor(rows: DelegationRow[], active?: ChainReport): string {
  if (rows.length === 0) {
    return lines(
      `<section class="delegation-editor">`,
      `<p class="editor-empty">You have no delegations. Your unit stays with you unless you delegate it.</p>`,
      `</section>`,
    );
  }

  // display order mirrors precedence: issue rows, then topic, then global
  const order: Record<string, number> = { issue: 0, topic: 1, global: 2 };
  const sorted = [...rows].sort(
    (a, b) => (order[a.scope.kind] ?? 3) - (order[b.scope.kind] ?? 3),
  );
  const activeTarget = active !== undefined && active.terminal !== "self" ? active.hops[0] : undefined;

  return lines(
    `<section class="delegation-editor">`,
    active !== undefined ? summaryLine(active) : null,
    `<ul class="delegation-rows">`,
    ...sorted.map((d) => row(d, activeTarget !== undefined && d.target === activeTarget)),
    `</ul>`,
    `<p class="precedence-legend">When scopes overlap, the most specific wins: ` +
      `an issue delegation beats a topic delegation, a narrower topic beats a broader one, ` +
      `and any topic beats the everywhere fallback.</p>`,
    `</section>`,
  );
}
