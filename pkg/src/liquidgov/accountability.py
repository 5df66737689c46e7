"""Accountability instruments: prediction registry, note bridging, survey trends.

Everything here is a read-side view over folded state. Scoring rules:

* A prediction's recorded score is the ordinal median of its assessments
  (met > partially_met > not_met), with two twists: if at least half the
  assessors said unfalsifiable, the prediction scores unfalsifiable outright;
  and an even assessment count whose two middle values differ rounds toward
  partially_met rather than inventing precision.
* A community note becomes prominent only when raters from *both* stances
  found it helpful (bridging), never from one-sided enthusiasm.
"""

from __future__ import annotations

from statistics import mean, median
from typing import Optional

from .model import NotFoundError, Thresholds
from .state import State, _score_median

score_assessments = _score_median


# -- predictions --------------------------------------------------------------


def prediction_status(state: State, prediction_id: str) -> str:
    """pending (before timeframe), due (past timeframe, unevaluated), or the score."""
    pred = state.predictions.get(prediction_id)
    if pred is None:
        raise NotFoundError(f"unknown prediction {prediction_id!r}")
    ev = state.evaluations.get(prediction_id)
    if ev is not None:
        return ev.score
    from .events import parse_ts

    now = state.last_at
    if now is not None and parse_ts(now) >= parse_ts(pred.timeframe):
        return "due"
    return "pending"


def prediction_registry(state: State) -> list[dict]:
    """Every registered prediction with its current standing, oldest first."""
    rows = []
    for pred in sorted(state.predictions.values(), key=lambda p: (p.registered_at, p.id)):
        ev = state.evaluations.get(pred.id)
        proposal = state.proposals.get(pred.proposal)
        rows.append(
            {
                "prediction": pred.id,
                "proposal": pred.proposal,
                "issue": proposal.issue if proposal else None,
                "registrant": pred.registrant,
                "variable": pred.variable,
                "direction": pred.direction,
                "magnitude": {"value": pred.magnitude_value, "unit": pred.magnitude_unit},
                "timeframe": pred.timeframe,
                "methodology": pred.methodology,
                "registered_at": pred.registered_at,
                "status": prediction_status(state, pred.id),
                "score": ev.score if ev else None,
                "evaluated_at": ev.evaluated_at if ev else None,
            }
        )
    return rows


# -- community note bridging --------------------------------------------------


def bridging_visibility(state: State, note_id: str, thresholds: Optional[Thresholds] = None) -> dict:
    """Prominence of one note under the bridging rule.

    prominent: enough helpful ratings from each stance and a high enough
    overall helpful ratio. not_prominent: enough ratings came in without the
    rule being met. pending: the jury is still out.
    """
    note = state.notes.get(note_id)
    if note is None:
        raise NotFoundError(f"unknown note {note_id!r}")
    th = thresholds or (state.config.thresholds if state.config else Thresholds())

    ratings = list(note.ratings.values())
    total = len(ratings)
    helpful = sum(1 for r, _ in ratings if r == "helpful")
    helpful_supports = sum(1 for r, s in ratings if r == "helpful" and s == "supports")
    helpful_opposes = sum(1 for r, s in ratings if r == "helpful" and s == "opposes")
    ratio = helpful / total if total else 0.0

    bridged = (
        helpful_supports >= th.bridging_min_each_stance
        and helpful_opposes >= th.bridging_min_each_stance
        and ratio >= th.bridging_helpful_ratio
    )
    if bridged:
        status = "prominent"
    elif total >= th.bridging_decision_count:
        status = "not_prominent"
    else:
        status = "pending"
    return {
        "note": note_id,
        "status": status,
        "ratings": total,
        "helpful": helpful,
        "helpful_ratio": ratio,
        "helpful_by_stance": {"supports": helpful_supports, "opposes": helpful_opposes},
    }


def notes_for_target(state: State, kind: str, target_id: str) -> list[dict]:
    """Notes attached to one artifact, prominent first, then by age."""
    rows = []
    for note in state.notes.values():
        if note.target_kind == kind and note.target_id == target_id:
            vis = bridging_visibility(state, note.id)
            rows.append(
                {
                    "note": note.id,
                    "body": note.body,
                    "author": note.author,
                    "submitted_at": note.submitted_at,
                    **{k: vis[k] for k in ("status", "ratings", "helpful_ratio")},
                }
            )
    order = {"prominent": 0, "pending": 1, "not_prominent": 2}
    rows.sort(key=lambda r: (order[r["status"]], r["submitted_at"], r["note"]))
    return rows


# -- surveys ------------------------------------------------------------------


def survey_results(state: State, instance_id: str) -> dict:
    """Aggregate one survey instance, question by question."""
    inst = state.surveys.get(instance_id)
    if inst is None:
        raise NotFoundError(f"unknown survey instance {instance_id!r}")
    questions = {}
    for q in inst.questions:
        qid = q["id"]
        values = [a[qid] for a in inst.responses.values()]
        kind = q["answer"]["kind"]
        agg: dict = {"kind": kind, "count": len(values)}
        if kind == "scale" and values:
            agg["mean"] = mean(values)
            agg["median"] = median(values)
        elif kind == "boolean" and values:
            agg["share_true"] = sum(values) / len(values)
        elif kind == "choice":
            counts: dict[str, int] = {}
            for v in values:
                counts[v] = counts.get(v, 0) + 1
            agg["counts"] = counts
        questions[qid] = agg
    return {
        "instance": instance_id,
        "series": inst.series,
        "opens": inst.opens,
        "closes": inst.closes,
        "eligible": len(inst.eligible),
        "responses": len(inst.responses),
        "questions": questions,
    }


def trend_series(state: State, series_id: str, question_id: str) -> list[dict]:
    """One question tracked across a series' instances, chronological by open.

    Repeating the same question id across instances is what makes a series a
    longitudinal instrument; instances missing the question are skipped.
    """
    if series_id not in state.survey_series:
        raise NotFoundError(f"unknown survey series {series_id!r}")
    points = []
    for iid in state.survey_series[series_id]:
        inst = state.surveys[iid]
        if all(q["id"] != question_id for q in inst.questions):
            continue
        agg = survey_results(state, iid)["questions"][question_id]
        points.append({"instance": iid, "opens": inst.opens, "closes": inst.closes, **agg})
    points.sort(key=lambda p: (p["opens"], p["instance"]))
    return points


def export_survey_responses(state: State, instance_id: str) -> list[dict]:
    """Raw response rows for offline analysis, one dict per respondent."""
    inst = state.surveys.get(instance_id)
    if inst is None:
        raise NotFoundError(f"unknown survey instance {instance_id!r}")
    return [
        {
            "instance": instance_id,
            "series": inst.series,
            "participant": pid,
            "answers": dict(inst.responses[pid]),
            "responded_at": inst.responded_at[pid],
        }
        for pid in sorted(inst.responses)
    ]
