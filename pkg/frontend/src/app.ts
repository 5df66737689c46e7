/** Browser entry point: wires the gateway client into the views.
 *
 * Not exercised by the contract tests; those cover the pure view functions
 * against recorded responses. This file is the thin glue a host page calls.
 */

import { GatewayClient } from "./api.js";
import { ballotPanel } from "./views/ballot.js";
import { chainBanner } from "./views/awareness.js";
import { delegationEditor } from "./views/editor.js";
import { surveyPanel } from "./views/survey.js";
import type { ChainReport, SurveyOutcome } from "./types.js";

export interface MountOptions {
  baseUrl: string;
  org: string;
  token: string;
  participant: string;
  issue: string;
}

export async function mountIssuePage(root: HTMLElement, opts: MountOptions): Promise<void> {
  const client = new GatewayClient(opts);
  const [chain, delegationList] = await Promise.all([
    client.chain(opts.participant, opts.issue),
    client.delegations(opts.participant),
  ]);
  const rows = delegationList.delegations;
  let chainBeforeVote: ChainReport | undefined;

  const render = (current: ChainReport) => {
    root.innerHTML = [
      chainBanner(current),
      ballotPanel({ chain: current, delegations: rows, chainBeforeVote }),
      delegationEditor(rows, current),
    ].join("\n");
    root.querySelector<HTMLButtonElement>("[data-vote]")?.addEventListener("click", () => {
      void castAndRefresh();
    });
  };

  const castAndRefresh = async () => {
    chainBeforeVote = chain;
    await client.castVote(opts.issue, ["yes"]);
    render(await client.chain(opts.participant, opts.issue));
  };

  render(chain);
}

export async function mountSurveyPage(
  root: HTMLElement,
  opts: Omit<MountOptions, "issue"> & { instance: string },
): Promise<void> {
  const client = new GatewayClient(opts);
  let outcome: SurveyOutcome | undefined;

  const render = () => {
    root.innerHTML = surveyPanel(opts.instance, outcome);
    root.querySelector<HTMLButtonElement>(".survey-submit")?.addEventListener("click", () => {
      void submit();
    });
  };

  const submit = async () => {
    const answers: Record<string, unknown> = {};
    root.querySelectorAll<HTMLInputElement>("[data-question]").forEach((input) => {
      answers[input.dataset.question ?? ""] = Number(input.value);
    });
    outcome = await client.respondSurvey(opts.instance, answers);
    render();
  };

  render();
}
