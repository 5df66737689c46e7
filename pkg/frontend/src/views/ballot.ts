/** Ballot panel: voting status plus the override message.
 *
 * The rule it communicates: a direct vote always beats the voter's own
 * outgoing delegation for that issue. Everything shown comes from the chain
 * report and the delegation list; the view never resolves anything itself.
 */

import { esc, lines } from "../html.js";
import type { ChainReport, DelegationRow } from "../types.js";

export interface BallotViewData {
  /** Chain report for (participant, issue) as of now. */
  chain: ChainReport;
  /** The participant's outgoing delegations, from the delegations endpoint. */
  delegations: DelegationRow[];
  /** Chain as it stood before a direct vote, when the caller kept it around.
   * Lets the post-vote message name who had been carrying the unit. */
  chainBeforeVote?: ChainReport;
}

function overrideNoteAfterVote(data: BallotViewData): string {
  const prior = data.chainBeforeVote?.hops[0];
  const naming =
    prior !== undefined
      ? `Your delegation to <strong>${esc(prior)}</strong> is set aside for this issue`
      : "Your delegation is set aside for this issue";
  return (
    `<p class="override-note">${naming}; your direct vote is the one that counts. ` +
    `The delegation still applies to other issues it covers.</p>`
  );
}

export function ballotPanel(data: BallotViewData): string {
  const { chain } = data;
  const issue = esc(chain.issue);

  if (chain.terminal === "self") {
    const note = data.delegations.length > 0 ? overrideNoteAfterVote(data) : null;
    return lines(
      `<section class="ballot-panel" data-terminal="self">`,
      `<p class="vote-standing">You voted directly on <strong>${issue}</strong>.</p>`,
      note,
      `</section>`,
    );
  }

  if (chain.terminal === "voter" && chain.resolved_to !== null) {
    const carrier = esc(chain.hops[0] ?? chain.resolved_to);
    return lines(
      `<section class="ballot-panel" data-terminal="voter">`,
      `<p class="vote-standing">You have not voted directly. Your unit is delegated to ` +
        `<strong>${carrier}</strong> and will be cast by <strong>${esc(chain.resolved_to)}</strong>.</p>`,
      `<p class="override-note">Casting a direct vote overrides this delegation for ` +
        `<strong>${issue}</strong> only.</p>`,
      `</section>`,
    );
  }

  if (chain.hops.length > 0) {
    // delegated, but the chain never reaches a ballot
    const carrier = esc(chain.hops[0] ?? "");
    return lines(
      `<section class="ballot-panel" data-terminal="${esc(chain.terminal)}">`,
      `<p class="vote-standing">Your unit is delegated to <strong>${carrier}</strong> ` +
        `but currently reaches no ballot.</p>`,
      `<p class="override-note">Casting a direct vote overrides this delegation for ` +
        `<strong>${issue}</strong> only.</p>`,
      `</section>`,
    );
  }

  return lines(
    `<section class="ballot-panel" data-terminal="${esc(chain.terminal)}">`,
    `<p class="vote-standing">You have not voted on <strong>${issue}</strong>.</p>`,
    `</section>`,
  );
}
