"""Agency-awareness views: where units flow, who accumulates them, with what record.

These are explanatory read-side reports meant to keep delegation an informed,
revocable act rather than a fire-and-forget one. All of them are pure functions
of folded state; "now" is always the timestamp of the latest event, so every
report is reproducible from the log alone.
"""

from __future__ import annotations

from typing import Mapping, Optional

from .events import parse_ts
from .lifecycle import visible_ballot
from .model import InvalidStateError, IssueStatus, NotFoundError, ScopeKind, Thresholds
from .resolution import effective_delegation
from .state import State
from .accountability import bridging_visibility, prediction_status


def _thresholds(state: State) -> Thresholds:
    return state.config.thresholds if state.config else Thresholds()


# -- chain resolution ---------------------------------------------------------


def resolve_chain(state: State, participant: str, issue_id: str) -> dict:
    """The delegation chain one participant's unit would follow on an issue.

    Terminal values: ``self`` (they voted directly), ``voter`` (the chain ends
    at a direct voter), ``dangling`` (it ends at someone who neither voted nor
    delegated), ``abstaining_cycle`` (it loops without meeting a voter), or
    ``truncated`` (non-transferable mode stopped it after one non-voting hop).
    ``none`` means no delegation covers the issue at all.
    """
    if participant not in state.participants:
        raise NotFoundError(f"unknown participant {participant!r}")
    issue = state.issues.get(issue_id)
    if issue is None:
        raise NotFoundError(f"unknown issue {issue_id!r}")
    if issue.status is IssueStatus.CANCELLED:
        raise InvalidStateError(f"issue {issue_id!r} is cancelled")

    votes = state.votes.get(issue_id, {})
    report = {"participant": participant, "issue": issue_id, "hops": []}
    if participant in votes:
        return report | {"terminal": "self", "resolved_to": participant}

    cfg = state.config
    delegation_on = cfg is not None and cfg.delegation_enabled
    transferable = delegation_on and cfg.transferability_enabled

    def step(p: str) -> Optional[str]:
        if not delegation_on:
            return None
        return effective_delegation(p, issue, state.delegations, state.taxonomy)

    first = step(participant)
    if first is None:
        return report | {"terminal": "none", "resolved_to": None}

    hops = [first]
    if not transferable:
        if first in votes:
            return report | {"hops": hops, "terminal": "voter", "resolved_to": first}
        return report | {"hops": hops, "terminal": "truncated", "resolved_to": None}

    seen = {participant, first}
    cur = first
    while True:
        if cur in votes:
            return report | {"hops": hops, "terminal": "voter", "resolved_to": cur}
        nxt = step(cur)
        if nxt is None:
            return report | {"hops": hops, "terminal": "dangling", "resolved_to": None}
        if nxt in seen:
            hops.append(nxt)
            return report | {"hops": hops, "terminal": "abstaining_cycle", "resolved_to": None}
        hops.append(nxt)
        seen.add(nxt)
        cur = nxt


# -- concentration ------------------------------------------------------------


def _gini(values: list[int]) -> float:
    xs = sorted(v for v in values if v > 0)
    n = len(xs)
    total = sum(xs)
    if n == 0 or total == 0:
        return 0.0
    # closed form over sorted values
    weighted = sum((i + 1) * x for i, x in enumerate(xs))
    return (2 * weighted) / (n * total) - (n + 1) / n


def _potential_weights(state: State, pseudo_topic: Optional[str]) -> dict[str, int]:
    """Units each participant would control if they alone voted directly.

    Built on the effective-edge graph for a hypothetical issue classified at
    ``pseudo_topic`` (or unclassified for a global view) with no votes cast:
    a participant's potential weight is their own unit plus every unit whose
    chain passes through them.
    """
    from .model import Issue

    pseudo = Issue(id="__pseudo__", event_id="__pseudo__", title="", topic=pseudo_topic)
    edges: dict[str, str] = {}
    enabled = state.config is not None and state.config.delegation_enabled
    for p in state.participants:
        if enabled:
            t = effective_delegation(p, pseudo, state.delegations, state.taxonomy)
            if t is not None:
                edges[p] = t
    inbound: dict[str, list[str]] = {}
    for src, dst in edges.items():
        inbound.setdefault(dst, []).append(src)
    potential = {}
    for p in state.participants:
        count, stack, seen = 0, list(inbound.get(p, ())), {p}
        while stack:
            q = stack.pop()
            if q in seen:
                continue
            seen.add(q)
            count += 1
            stack.extend(inbound.get(q, ()))
        potential[p] = 1 + count
    return potential


def concentration_report(state: State, scope: Mapping) -> dict:
    """Weight concentration at a scope: shares, gini, and alert flags.

    Issue scope measures realized weights from the live (or frozen) tally;
    topic and global scopes measure potential weights under the delegation
    graph alone. Alerts name holders carrying at least two units whose share
    crosses the configured threshold, so uniform direct voting never alerts.
    """
    th = _thresholds(state)
    kind = scope.get("kind")
    n = len(state.participants)
    if kind == "issue":
        iid = scope.get("issue")
        issue = state.issues.get(iid)
        if issue is None:
            raise NotFoundError(f"unknown issue {iid!r}")
        outcome = state.outcomes.get(iid)
        if outcome is not None:
            weights = dict(outcome.tally.weights)
        else:
            from .resolution import resolve_issue

            weights = dict(
                resolve_issue(
                    issue=issue,
                    participants=set(state.participants),
                    delegations=state.delegations,
                    votes=state.votes.get(iid, {}),
                    taxonomy=state.taxonomy,
                    config=state.config,
                ).weights
            )
        basis = "resolved"
    elif kind == "topic":
        topic = scope.get("topic")
        if topic not in state.taxonomy:
            raise NotFoundError(f"unknown topic {topic!r}")
        weights = _potential_weights(state, topic)
        basis = "potential"
    elif kind == "global":
        weights = _potential_weights(state, None)
        basis = "potential"
    else:
        raise NotFoundError(f"unknown concentration scope kind {kind!r}")

    holders = [
        {"participant": p, "weight": w, "share": (w / n if n else 0.0)}
        for p, w in sorted(weights.items(), key=lambda kv: (-kv[1], kv[0]))
        if w > 0
    ]
    alerts = [
        h for h in holders if h["weight"] >= 2 and h["share"] >= th.concentration_share
    ]
    return {
        "scope": dict(scope),
        "basis": basis,
        "participants": n,
        "gini": _gini([w for w in weights.values()]),
        "holders": holders,
        "alerts": alerts,
    }


# -- harvesting ---------------------------------------------------------------


def detect_harvesting(state: State, window_days: Optional[float] = None) -> list[dict]:
    """Targets whose recent delegation inflow spikes against their own baseline.

    Compares upserts naming each target inside the trailing window against the
    window immediately before it; a spike must clear both an absolute floor and
    a multiple of that baseline. Only flagged targets are returned.
    """
    th = _thresholds(state)
    window = window_days if window_days is not None else th.harvesting_window_days
    if state.last_at is None:
        return []
    now = parse_ts(state.last_at)
    from datetime import timedelta

    recent_start = now - timedelta(days=window)
    baseline_start = recent_start - timedelta(days=window)

    recent: dict[str, int] = {}
    baseline: dict[str, int] = {}
    for change in state.delegation_changes:
        if change.action != "upserted" or change.target is None:
            continue
        t = parse_ts(change.at)
        if t > now:
            continue
        if t > recent_start:
            recent[change.target] = recent.get(change.target, 0) + 1
        elif t > baseline_start:
            baseline[change.target] = baseline.get(change.target, 0) + 1

    flagged = []
    for target, gain in sorted(recent.items(), key=lambda kv: (-kv[1], kv[0])):
        base = baseline.get(target, 0)
        threshold = max(th.harvesting_floor, th.harvesting_multiplier * base)
        if gain >= threshold:
            flagged.append(
                {
                    "target": target,
                    "recent_gain": gain,
                    "baseline_gain": base,
                    "threshold": threshold,
                    "window_days": window,
                }
            )
    return flagged


# -- track record -------------------------------------------------------------


def track_record(state: State, participant: str) -> dict:
    """A delegate's public record over closed issues and registered predictions."""
    if participant not in state.participants:
        raise NotFoundError(f"unknown participant {participant!r}")
    direct, winning, carried = 0, 0, 0
    for iid, outcome in state.outcomes.items():
        ballot = state.votes.get(iid, {}).get(participant)
        if ballot is None:
            continue
        direct += 1
        carried += max(0, outcome.tally.weights.get(participant, 0) - 1)
        if outcome.tally.winner is not None and outcome.tally.winner in ballot.options:
            winning += 1

    pred_counts: dict[str, int] = {}
    for pred in state.predictions.values():
        if pred.registrant != participant:
            continue
        status = prediction_status(state, pred.id)
        pred_counts[status] = pred_counts.get(status, 0) + 1

    submitted, prominent = 0, 0
    for note in state.notes.values():
        if note.author != participant:
            continue
        submitted += 1
        if bridging_visibility(state, note.id)["status"] == "prominent":
            prominent += 1

    return {
        "participant": participant,
        "closed_issues_voted": direct,
        "closed_issues_on_winning_side": winning,
        "delegated_units_carried": carried,
        "predictions": pred_counts,
        "notes": {"submitted": submitted, "prominent": prominent},
    }


# -- prompts and history ------------------------------------------------------


def engagement_prompt(state: State, participant: str, issue_id: str) -> dict:
    """A nudge tailored to where the participant's unit currently stands."""
    chain = resolve_chain(state, participant, issue_id)
    terminal = chain["terminal"]
    if terminal == "self":
        message = "You voted directly on this issue; your ballot counts as cast."
    elif terminal == "voter":
        holder = chain["resolved_to"]
        message = (
            f"Your unit currently counts toward {holder}'s ballot. "
            "Casting a direct vote overrides the delegation for this issue."
        )
    elif terminal == "truncated":
        hop = chain["hops"][0]
        message = (
            f"Your delegate {hop} has not voted, and transfers stop after one hop "
            "here, so your unit would abstain. Vote directly or pick a delegate who votes."
        )
    elif terminal == "dangling":
        tail = chain["hops"][-1]
        message = (
            f"Your delegation chain ends at {tail}, who has neither voted nor "
            "delegated. Unless someone on the chain votes, your unit will abstain."
        )
    elif terminal == "abstaining_cycle":
        message = (
            "Your delegation chain loops without reaching anyone who voted, "
            "so your unit would abstain. A direct vote breaks the loop."
        )
    else:
        message = (
            "No delegation covers this issue and you have not voted. "
            "Cast a ballot or delegate to someone you trust."
        )
    return {"participant": participant, "issue": issue_id, "terminal": terminal, "message": message}


def voting_history(state: State, participant: str, viewer: Optional[str] = None) -> list[dict]:
    """Per closed issue: how the participant's unit was exercised.

    Ballot contents appear only when the viewer is entitled to see them under
    the ballot visibility rules; the structural fact of having voted is not
    secret, it is what the attribution record already shows.
    """
    if participant not in state.participants:
        raise NotFoundError(f"unknown participant {participant!r}")
    rows = []
    for iid in sorted(state.outcomes, key=lambda i: state.outcomes[i].closed_seq):
        outcome = state.outcomes[iid]
        resolved_to = outcome.attribution.get(participant)
        row = {
            "issue": iid,
            "closed_at": outcome.closed_at,
            "voted_directly": resolved_to == participant,
            "resolved_to": resolved_to,
            "weight_carried": outcome.tally.weights.get(participant, 0),
            "outcome": outcome.tally.outcome.value,
            "winner": outcome.tally.winner,
        }
        ballot = visible_ballot(state, viewer, participant, iid)
        if ballot is not None:
            row["options"] = list(ballot.options)
        rows.append(row)
    return rows
