/** Survey panels: the response form in its three states, and the results
 * table. Aggregates are echoed exactly as the server sent them. */

import { esc, lines } from "../html.js";
import type { SurveyOutcome, SurveyResults } from "../types.js";

/** The response panel.
 *
 * No outcome yet: the form is open. A success receipt: confirmation, and the
 * form is gone because answers are final. A refusal: the server's own error
 * text, verbatim, with nothing to resubmit.
 */
export function surveyPanel(instance: string, outcome?: SurveyOutcome): string {
  const name = esc(instance);

  if (outcome === undefined) {
    return lines(
      `<section class="survey-panel" data-state="open">`,
      `<p>Survey <strong>${name}</strong> is open. Answers are final once submitted.</p>`,
      `<button class="survey-submit">Submit response</button>`,
      `</section>`,
    );
  }

  if (outcome.ok) {
    return lines(
      `<section class="survey-panel" data-state="recorded">`,
      `<p class="survey-recorded">Response recorded for <strong>${esc(outcome.receipt.instance)}</strong>.</p>`,
      `<p>Survey answers are final; they cannot be edited or resubmitted.</p>`,
      `</section>`,
    );
  }

  return lines(
    `<section class="survey-panel" data-state="blocked">`,
    `<p class="survey-blocked" role="alert">${esc(outcome.error.error)}</p>`,
    `<p>Your earlier response stands.</p>`,
    `</section>`,
  );
}

function aggregateCells(agg: SurveyResults["questions"][string]): string {
  const cells = [`<td>${esc(agg.count)}</td>`];
  cells.push(`<td>${agg.mean !== undefined ? esc(agg.mean) : ""}</td>`);
  cells.push(`<td>${agg.median !== undefined ? esc(agg.median) : ""}</td>`);
  return cells.join("");
}

export function surveyResultsView(results: SurveyResults): string {
  const qids = Object.keys(results.questions).sort();
  return lines(
    `<section class="survey-results">`,
    `<h2>${esc(results.instance)}</h2>`,
    `<p class="survey-turnout">${esc(results.responses)} of ${esc(results.eligible)} eligible responded.</p>`,
    `<table><thead><tr><th>question</th><th>count</th><th>mean</th><th>median</th></tr></thead>`,
    `<tbody>`,
    ...qids.map(
      (qid) =>
        `<tr><td>${esc(qid)}</td>${aggregateCells(results.questions[qid]!)}</tr>`,
    ),
    `</tbody></table>`,
    `</section>`,
  );
}
