/** Awareness banner: where the unit goes, told from the chain report alone.
 *
 * Chains that reach a ballot render calm; chains that abstain render as a
 * warning naming where they stop, so the fix (vote, or re-delegate) is
 * obvious.
 */

import { esc } from "../html.js";
import type { ChainReport } from "../types.js";

function path(report: ChainReport): string {
  return [report.participant, ...report.hops].map(esc).join(" &rarr; ");
}

export function chainBanner(report: ChainReport): string {
  const issue = esc(report.issue);
  const lastHop = report.hops[report.hops.length - 1];

  switch (report.terminal) {
    case "self":
      return `<div class="chain-banner ok">You are voting directly on <strong>${issue}</strong>.</div>`;
    case "voter":
      return (
        `<div class="chain-banner ok">Your unit travels ${path(report)} and is cast by ` +
        `<strong>${esc(report.resolved_to ?? "")}</strong>.</div>`
      );
    case "dangling":
      return (
        `<div class="chain-banner warn" role="alert">Your unit does not reach a ballot: ` +
        `it stops at <strong>${esc(lastHop ?? report.participant)}</strong>, who has not voted and ` +
        `delegates no further. It will abstain on <strong>${issue}</strong> unless you vote ` +
        `or re-delegate.</div>`
      );
    case "abstaining_cycle":
      return (
        `<div class="chain-banner warn" role="alert">Your delegation enters a loop ` +
        `(${path(report)}) in which nobody has voted. Your unit will abstain on ` +
        `<strong>${issue}</strong> unless someone in the loop votes or you re-delegate.</div>`
      );
    case "truncated":
      return (
        `<div class="chain-banner warn" role="alert">Your delegation chain is longer than the ` +
        `configured limit and stops at <strong>${esc(lastHop ?? "")}</strong>. ` +
        `Your unit will abstain on <strong>${issue}</strong>.</div>`
      );
    default:
      return (
        `<div class="chain-banner neutral">You have no delegation for <strong>${issue}</strong> ` +
        `and have not voted.</div>`
      );
  }
}
