"""Read-side lifecycle helpers: booklet readiness, candidacy coverage, visibility.

The write-side rules (phase legality, the booklet gate, cancellation) live in
the fold; this module answers the questions front ends ask about a state they
already have. Ballot secrecy here is access control enforced by the serving
layer, not cryptography: the log itself stores ballots in the clear and anyone
with file access can read them.
"""

from __future__ import annotations

from typing import Optional

from .model import IssueStatus, ResultsMode, BallotVisibility, ScopeKind
from .resolution import Ballot, effective_delegation
from .state import BOOKLET_SECTIONS, CandidacyVersion, State, booklet_missing_sections


def booklet_status(state: State, issue_id: str) -> dict:
    """Completeness report for an issue's booklet, section by section."""
    missing = set(booklet_missing_sections(state, issue_id))
    waived = []
    if state.config is not None and not state.config.features.predictions:
        waived.append("predictions")
    return {
        "issue": issue_id,
        "sections": {
            s: ("waived" if s in waived else "missing" if s in missing else "complete")
            for s in BOOKLET_SECTIONS
        },
        "complete": not missing,
    }


def can_open_issue(state: State, issue_id: str) -> tuple[bool, list[str]]:
    """Would phase_advanced(issue -> open) be accepted right now, and if not, why."""
    reasons = []
    issue = state.issues.get(issue_id)
    if issue is None:
        return False, [f"unknown issue {issue_id!r}"]
    if issue.status is IssueStatus.CANCELLED:
        reasons.append("issue is cancelled")
    elif issue.status not in (IssueStatus.DRAFT, IssueStatus.DELIBERATION):
        reasons.append(f"issue is already {issue.status.value}")
    ev = state.voting_events.get(issue.event_id)
    if ev is None or ev.phase != "voting":
        reasons.append("voting event is not in its voting phase")
    if state.config is not None and state.config.features.booklet:
        missing = booklet_missing_sections(state, issue_id)
        if missing:
            reasons.append(f"booklet incomplete: missing {missing}")
    return not reasons, reasons


# -- candidacy ---------------------------------------------------------------


def active_candidacy(state: State, candidate: str) -> Optional[CandidacyVersion]:
    for v in reversed(state.candidacies.get(candidate, [])):
        if v.status == "active":
            return v
    return None


def candidacy_covers_issue(state: State, version: CandidacyVersion, issue_id: str) -> bool:
    issue = state.issues.get(issue_id)
    if issue is None:
        return False
    for scope in version.scopes:
        if scope.kind is ScopeKind.GLOBAL:
            return True
        if scope.kind is ScopeKind.ISSUE and scope.issue == issue_id:
            return True
        if (
            scope.kind is ScopeKind.TOPIC
            and issue.topic is not None
            and state.taxonomy.is_or_descends_from(issue.topic, scope.topic)
        ):
            return True
    return False


def delegate_vote_visible(state: State, viewer: str, delegate: str, issue_id: str) -> bool:
    """May ``viewer`` see how ``delegate`` voted on this issue, secrecy aside?

    True only when the delegate published a candidacy that opts in to vote
    transparency, the candidacy's scopes cover the issue, and the viewer's
    delegation in force for this issue actually points at the delegate.
    """
    issue = state.issues.get(issue_id)
    if issue is None or viewer == delegate:
        return viewer == delegate
    version = active_candidacy(state, delegate)
    if version is None or not version.vote_transparency_opt_in:
        return False
    if not candidacy_covers_issue(state, version, issue_id):
        return False
    if state.config is None or not state.config.delegation_enabled:
        return False
    return effective_delegation(viewer, issue, state.delegations, state.taxonomy) == delegate


# -- visibility --------------------------------------------------------------


def visible_ballot(state: State, viewer: Optional[str], owner: str, issue_id: str) -> Optional[Ballot]:
    """The ballot of ``owner`` on an issue as ``viewer`` may see it, or None.

    Public ballots are visible to any member; secret ballots only to their
    caster and to delegators covered by the transparency opt-in.
    """
    ballot = state.votes.get(issue_id, {}).get(owner)
    if ballot is None or viewer is None:
        return None
    cfg = state.config
    if cfg is None:
        return None
    if viewer == owner:
        return ballot
    if cfg.ballot.ballot_visibility is BallotVisibility.PUBLIC:
        return ballot if viewer in state.participants else None
    if delegate_vote_visible(state, viewer, owner, issue_id):
        return ballot
    return None


def results_visible(state: State, issue_id: str) -> bool:
    """Sealed results stay hidden until the issue closes; live results show
    as soon as the issue opens."""
    issue = state.issues.get(issue_id)
    if issue is None or state.config is None:
        return False
    if issue.status is IssueStatus.CLOSED:
        return True
    if issue.status is not IssueStatus.OPEN:
        return False
    return state.config.ballot.results is ResultsMode.LIVE
