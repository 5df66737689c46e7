"""Materialized organization state, built by folding the event log.

``State`` is a pure function of the event sequence: replaying the same log
always yields the same state (and the same digest). Every event kind has a
validator that runs against the state *before* the event applies, so the fold
is also the arbiter of what is legal; any front end that goes through
``validate`` + ``apply`` enforces identical rules.

Immutability posture: votes may be superseded only when the ballot rules say
so; delegations are always upsert/revoke-able (while their scope is live);
everything else, once recorded, is never edited in place. Corrections are new
events. Cancelling an issue is absorbing: after ``issue_cancelled`` the only
events that may still reference the issue's artifacts are community notes.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field
from typing import Mapping, Optional, Sequence

from .events import Event, EventKind, canonical_json, parse_ts
from .model import (
    AuthorizationError,
    Delegation,
    DelegationScope,
    Delegations,
    FeatureDisabledError,
    GovernanceConfig,
    InvalidStateError,
    Issue,
    IssueStatus,
    NotFoundError,
    Participant,
    ScopeKind,
    Taxonomy,
    Topic,
    ValidationError,
    validate_config,
)
from .model import VotingMethod
from .resolution import (
    Ballot,
    ResolvedTally,
    effective_delegation,
    resolve_issue,
    unit_attribution,
)

ROLES = ("administrator", "proponent")
EVENT_PHASES = ("deliberation", "curation", "voting", "closed")
ISSUE_PHASES = ("draft", "deliberation", "open", "closed")
BOOKLET_SECTIONS = (
    "official_description",
    "proposal_text",
    "supporting_arguments",
    "opposing_arguments",
    "predictions",
    "state_of_affairs",
)
CLAIM_KINDS = ("qualification", "position", "experience")
PREDICTION_DIRECTIONS = ("increase", "decrease", "reach", "stay_within")
ASSESSMENT_SCORES = ("met", "partially_met", "not_met", "unfalsifiable")
ANSWER_KINDS = ("scale", "boolean", "choice")
NOTE_TARGETS = ("proposal", "argument", "prediction", "candidacy", "survey_result", "note")
RATINGS = ("helpful", "not_helpful")
STANCES = ("supports", "opposes", "none")


# ---------------------------------------------------------------------------
# record types held by the state


@dataclass
class VotingEvent:
    id: str
    title: str
    phase: str
    created_by: str
    created_at: str
    deliberation_days: float
    curation_days: float
    voting_days: float
    issues: list[str] = field(default_factory=list)


@dataclass
class ArgumentEntry:
    author: str
    content: str
    at: str


@dataclass
class Booklet:
    official_description: Optional[str] = None
    state_of_affairs: Optional[str] = None
    supporting_arguments: list[ArgumentEntry] = field(default_factory=list)
    opposing_arguments: list[ArgumentEntry] = field(default_factory=list)


@dataclass
class Proposal:
    id: str
    issue: str
    text: str
    proponent: str
    submitted_at: str
    status: str = "active"  # active | withdrawn


@dataclass
class CandidacyVersion:
    version: int
    claims: list[dict]
    scopes: list[DelegationScope]
    vote_transparency_opt_in: bool
    published_at: str
    status: str = "active"  # active | superseded


@dataclass
class Prediction:
    id: str
    proposal: str
    registrant: str
    variable: str
    direction: str
    magnitude_value: float
    magnitude_unit: str
    timeframe: str
    registered_at: str
    methodology: Optional[str] = None


@dataclass
class Evaluation:
    prediction: str
    score: str
    assessments: list[dict]
    evidence: list[dict]
    evaluated_at: str
    evaluated_by: str


@dataclass
class SurveyInstance:
    id: str
    series: str
    questions: list[dict]
    opens: str
    closes: str
    opened_by: str
    opened_at: str
    eligible: frozenset
    responses: dict[str, dict] = field(default_factory=dict)
    responded_at: dict[str, str] = field(default_factory=dict)


@dataclass
class Note:
    id: str
    target_kind: str
    target_id: str
    body: str
    author: str
    submitted_at: str
    ratings: dict[str, tuple[str, str]] = field(default_factory=dict)  # rater -> (rating, stance)


@dataclass
class DelegationChange:
    at: str
    action: str  # upserted | revoked
    source: str
    target: Optional[str]
    scope: DelegationScope


@dataclass
class FrozenOutcome:
    """Tally and unit attribution captured at the seq an issue closed.

    Later delegation or membership changes must not rewrite a decided issue,
    so the fold records the outcome at close time and readers serve this copy.
    """

    closed_seq: int
    closed_at: str
    tally: ResolvedTally
    attribution: dict[str, Optional[str]]


def _score_median(scores: Sequence[str]) -> str:
    """Aggregate assessment scores: unfalsifiable majority dominates, else the
    ordinal median of met(3)/partially_met(2)/not_met(1); an even count whose
    two middle values differ rounds toward partially_met."""
    n = len(scores)
    unf = sum(1 for s in scores if s == "unfalsifiable")
    if 2 * unf >= n:
        return "unfalsifiable"
    ordinal = {"not_met": 1, "partially_met": 2, "met": 3}
    ranked = sorted(ordinal[s] for s in scores if s != "unfalsifiable")
    m = len(ranked)
    if m % 2 == 1:
        mid = ranked[m // 2]
    else:
        lo, hi = ranked[m // 2 - 1], ranked[m // 2]
        mid = lo if lo == hi else 2
    return {1: "not_met", 2: "partially_met", 3: "met"}[mid]


def booklet_missing_sections(state: "State", issue_id: str) -> list[str]:
    """Sections still empty for an issue's booklet, in canonical order.

    The booklet has six sections. Two are filled by dedicated event kinds:
    proposal_text by proposal_submitted and predictions by
    prediction_registered (when the predictions feature is on); the other four
    by booklet_section_set. When predictions are off that section is waived.
    """
    booklet = state.booklets.get(issue_id) or Booklet()
    missing = []
    if not booklet.official_description:
        missing.append("official_description")
    active = [p for p in state.proposals.values() if p.issue == issue_id and p.status == "active"]
    if not active:
        missing.append("proposal_text")
    if not booklet.supporting_arguments:
        missing.append("supporting_arguments")
    if not booklet.opposing_arguments:
        missing.append("opposing_arguments")
    if state.config is not None and state.config.features.predictions:
        preds_by_proposal = {p.proposal for p in state.predictions.values()}
        covered = [p for p in active if p.id in preds_by_proposal]
        if state.config.features.predictions_required:
            if len(covered) < len(active):
                missing.append("predictions")
        elif not covered:
            missing.append("predictions")
    if not booklet.state_of_affairs:
        missing.append("state_of_affairs")
    return missing


# ---------------------------------------------------------------------------
# the state itself


class State:
    def __init__(self, org: str):
        self.org = org
        self.seq = 0
        self.last_at: Optional[str] = None
        self.config: Optional[GovernanceConfig] = None
        self.taxonomy = Taxonomy()
        self.participants: dict[str, Participant] = {}
        self.roles: dict[str, set] = {}
        self.delegations = Delegations()
        self.delegation_changes: list[DelegationChange] = []
        self.voting_events: dict[str, VotingEvent] = {}
        self.issues: dict[str, Issue] = {}
        self.votes: dict[str, dict[str, Ballot]] = {}
        self.booklets: dict[str, Booklet] = {}
        self.proposals: dict[str, Proposal] = {}
        self.candidacies: dict[str, list[CandidacyVersion]] = {}
        self.predictions: dict[str, Prediction] = {}
        self.evaluations: dict[str, Evaluation] = {}
        self.surveys: dict[str, SurveyInstance] = {}
        self.survey_series: dict[str, list[str]] = {}
        self.notes: dict[str, Note] = {}
        self.outcomes: dict[str, FrozenOutcome] = {}

    # -- helpers ------------------------------------------------------------

    def _require_config(self) -> GovernanceConfig:
        if self.config is None:
            raise InvalidStateError("organization has no configuration yet")
        return self.config

    def _require_participant(self, pid, field: str = "participant") -> Participant:
        p = self.participants.get(pid)
        if p is None:
            raise NotFoundError(f"unknown {field} {pid!r}")
        return p

    def _require_role(self, pid: str, role: str, action: str) -> None:
        self._require_participant(pid, "actor")
        if role not in self.roles.get(pid, set()):
            raise AuthorizationError(f"{action} requires the {role} role; {pid!r} lacks it")

    def _require_issue(self, iid) -> Issue:
        issue = self.issues.get(iid)
        if issue is None:
            raise NotFoundError(f"unknown issue {iid!r}")
        return issue

    def has_role(self, pid: str, role: str) -> bool:
        return role in self.roles.get(pid, set())

    def administrators(self) -> list[str]:
        return sorted(p for p, r in self.roles.items() if "administrator" in r)

    def scope_from_payload(self, raw) -> DelegationScope:
        if not isinstance(raw, Mapping):
            raise ValidationError("scope must be an object")
        try:
            scope = DelegationScope.from_dict(raw)
        except ValueError as exc:
            # plain ValueError (bad ScopeKind) must not escape the fold untyped
            raise ValidationError(str(exc)) from exc
        if scope.kind is ScopeKind.TOPIC and scope.topic not in self.taxonomy:
            raise NotFoundError(f"unknown topic {scope.topic!r}")
        if scope.kind is ScopeKind.ISSUE and scope.issue not in self.issues:
            raise NotFoundError(f"unknown issue {scope.issue!r}")
        return scope

    def raw_edges_for_issue(self, issue: Issue) -> dict[str, Optional[str]]:
        edges: dict[str, Optional[str]] = {}
        enabled = self.config is not None and self.config.delegation_enabled
        for pid in self.participants:
            edges[pid] = (
                effective_delegation(pid, issue, self.delegations, self.taxonomy)
                if enabled
                else None
            )
        return edges

    # -- validation ---------------------------------------------------------

    def validate(self, kind: EventKind, payload: Mapping, at: str) -> None:
        """Raise if the event would be illegal against the current state."""
        parse_ts(at)
        handler = getattr(self, f"_validate_{kind.value}")
        handler(payload, at)

    def apply(self, event: Event) -> None:
        if event.seq != self.seq + 1:
            raise InvalidStateError(f"expected seq {self.seq + 1}, got {event.seq}")
        handler = getattr(self, f"_apply_{event.kind.value}")
        handler(event.payload, event.at, event.seq)
        self.seq = event.seq
        self.last_at = event.at

    @staticmethod
    def _check_keys(payload: Mapping, required: tuple, optional: tuple = ()) -> None:
        keys = set(payload)
        missing = [k for k in required if k not in keys]
        if missing:
            raise ValidationError(f"payload missing keys: {missing}")
        extra = keys - set(required) - set(optional)
        if extra:
            raise ValidationError(f"payload has unsupported keys: {sorted(extra)}")

    @staticmethod
    def _nonempty_str(payload: Mapping, key: str) -> str:
        v = payload.get(key)
        if not isinstance(v, str) or not v.strip():
            raise ValidationError(f"{key} must be a non-empty string")
        return v

    # config_set ------------------------------------------------------------

    def _validate_config_set(self, payload: Mapping, at: str) -> None:
        self._check_keys(payload, ("config",), ("topics", "actor"))
        if self.config is not None:
            actor = payload.get("actor")
            if actor is None:
                raise AuthorizationError("reconfiguration requires an administrator actor")
            self._require_role(actor, "administrator", "config_set")
        cfg = GovernanceConfig.from_dict(payload["config"])
        violations = validate_config(cfg)
        if violations:
            raise ValidationError("invalid configuration: " + "; ".join(violations))
        self._validate_topics(payload.get("topics") or [])

    def _validate_topics(self, topics) -> None:
        if not isinstance(topics, list):
            raise ValidationError("topics must be a list")
        merged = {t.id: t for t in self.taxonomy}
        seen_new = set()
        for raw in topics:
            if not isinstance(raw, Mapping):
                raise ValidationError("each topic must be an object")
            tid = raw.get("id")
            if not isinstance(tid, str) or not tid:
                raise ValidationError("topic id must be a non-empty string")
            name = raw.get("name", tid)
            parent = raw.get("parent")
            existing = merged.get(tid)
            if existing is not None:
                if existing.parent != parent or existing.name != name:
                    raise ValidationError(
                        f"topic {tid!r} already exists; topics are append-only"
                    )
                continue
            if tid in seen_new:
                raise ValidationError(f"duplicate topic id {tid!r}")
            seen_new.add(tid)
            merged[tid] = Topic(id=tid, name=name, parent=parent)
        # parents must resolve within the merged set, acyclically
        for t in merged.values():
            hop, trail = t, set()
            while hop.parent is not None:
                if hop.id in trail:
                    raise ValidationError(f"topic {t.id!r} has a cyclic parent chain")
                trail.add(hop.id)
                nxt = merged.get(hop.parent)
                if nxt is None:
                    raise NotFoundError(f"topic {hop.id!r} names unknown parent {hop.parent!r}")
                hop = nxt

    def _apply_config_set(self, payload: Mapping, at: str, seq: int) -> None:
        self.config = GovernanceConfig.from_dict(payload["config"])
        for raw in payload.get("topics") or []:
            if raw["id"] not in self.taxonomy:
                self.taxonomy.add(
                    Topic(id=raw["id"], name=raw.get("name", raw["id"]), parent=raw.get("parent"))
                )

    # participant_joined ----------------------------------------------------

    def _validate_participant_joined(self, payload: Mapping, at: str) -> None:
        self._check_keys(payload, ("participant", "display_name"), ("roles", "invited_by"))
        self._require_config()
        pid = self._nonempty_str(payload, "participant")
        self._nonempty_str(payload, "display_name")
        if pid in self.participants:
            raise ValidationError(f"participant id {pid!r} already used; ids are never reused")
        roles = payload.get("roles") or []
        if not isinstance(roles, list) or any(r not in ROLES for r in roles):
            raise ValidationError(f"roles must be drawn from {ROLES}")
        inviter = payload.get("invited_by")
        if not self.participants:
            if inviter is not None:
                raise ValidationError("the founding participant cannot be invited")
            if "administrator" not in roles:
                raise ValidationError("the founding participant must be an administrator")
        else:
            if inviter is None:
                raise AuthorizationError("joining requires an administrator invitation")
            self._require_role(inviter, "administrator", "inviting a participant")

    def _apply_participant_joined(self, payload: Mapping, at: str, seq: int) -> None:
        pid = payload["participant"]
        self.participants[pid] = Participant(
            id=pid, display_name=payload["display_name"], joined_at=at
        )
        self.roles[pid] = set(payload.get("roles") or [])

    # delegation ------------------------------------------------------------

    def _validate_delegation_upserted(self, payload: Mapping, at: str) -> None:
        self._check_keys(payload, ("source", "target", "scope"))
        cfg = self._require_config()
        if not cfg.delegation_enabled:
            raise FeatureDisabledError("delegation is disabled by the current configuration")
        source = self._nonempty_str(payload, "source")
        target = self._nonempty_str(payload, "target")
        self._require_participant(source, "source")
        self._require_participant(target, "target")
        if source == target:
            raise ValidationError("self-delegation is not allowed")
        scope = self.scope_from_payload(payload["scope"])
        if scope.kind is ScopeKind.ISSUE:
            status = self.issues[scope.issue].status
            if status in (IssueStatus.CLOSED, IssueStatus.CANCELLED):
                raise InvalidStateError(
                    f"issue {scope.issue!r} is {status.value}; issue-scoped delegation is pointless"
                )

    def _apply_delegation_upserted(self, payload: Mapping, at: str, seq: int) -> None:
        scope = self.scope_from_payload(payload["scope"])
        d = Delegation(source=payload["source"], target=payload["target"], scope=scope, created_at=at)
        self.delegations = self.delegations.upsert(d)
        self.delegation_changes.append(
            DelegationChange(at=at, action="upserted", source=d.source, target=d.target, scope=scope)
        )

    def _validate_delegation_revoked(self, payload: Mapping, at: str) -> None:
        self._check_keys(payload, ("source", "scope"))
        self._require_config()
        source = self._nonempty_str(payload, "source")
        self._require_participant(source, "source")
        scope = self.scope_from_payload(payload["scope"])
        if self.delegations.get(source, scope) is None:
            raise NotFoundError(f"no delegation by {source!r} at scope {scope.key}")

    def _apply_delegation_revoked(self, payload: Mapping, at: str, seq: int) -> None:
        scope = self.scope_from_payload(payload["scope"])
        source = payload["source"]
        self.delegations = self.delegations.revoke(source, scope)
        self.delegation_changes.append(
            DelegationChange(at=at, action="revoked", source=source, target=None, scope=scope)
        )

    # voting events and issues ----------------------------------------------

    def _validate_event_created(self, payload: Mapping, at: str) -> None:
        self._check_keys(payload, ("event", "title", "actor"), ("timeline",))
        cfg = self._require_config()
        eid = self._nonempty_str(payload, "event")
        self._nonempty_str(payload, "title")
        self._require_role(payload["actor"], "administrator", "creating a voting event")
        if eid in self.voting_events:
            raise ValidationError(f"voting event id {eid!r} already used")
        timeline = payload.get("timeline")
        if timeline is not None:
            if not isinstance(timeline, Mapping):
                raise ValidationError("timeline must be an object")
            for k in ("deliberation_days", "curation_days", "voting_days"):
                if k in timeline and (not isinstance(timeline[k], (int, float)) or timeline[k] < 0):
                    raise ValidationError(f"timeline.{k} must be a non-negative number")

    def _apply_event_created(self, payload: Mapping, at: str, seq: int) -> None:
        cfg = self._require_config()
        timeline = payload.get("timeline") or {}
        self.voting_events[payload["event"]] = VotingEvent(
            id=payload["event"],
            title=payload["title"],
            phase="deliberation",
            created_by=payload["actor"],
            created_at=at,
            deliberation_days=timeline.get("deliberation_days", cfg.timeline.deliberation),
            curation_days=timeline.get("curation_days", cfg.timeline.curation),
            voting_days=timeline.get("voting_days", cfg.timeline.voting),
        )

    def _validate_issue_added(self, payload: Mapping, at: str) -> None:
        self._check_keys(payload, ("issue", "event", "title", "actor"), ("topic", "options"))
        self._require_config()
        iid = self._nonempty_str(payload, "issue")
        self._nonempty_str(payload, "title")
        self._require_role(payload["actor"], "administrator", "adding an issue")
        if iid in self.issues:
            raise ValidationError(f"issue id {iid!r} already used")
        ev = self.voting_events.get(payload["event"])
        if ev is None:
            raise NotFoundError(f"unknown voting event {payload['event']!r}")
        if ev.phase not in ("deliberation", "curation"):
            raise InvalidStateError(
                f"voting event {ev.id!r} is in phase {ev.phase!r}; issues can only be added "
                "during deliberation or curation"
            )
        topic = payload.get("topic")
        if topic is not None and topic not in self.taxonomy:
            raise NotFoundError(f"unknown topic {topic!r}")
        options = payload.get("options")
        if options is not None:
            if (
                not isinstance(options, list)
                or len(options) < 2
                or len(set(options)) != len(options)
                or not all(isinstance(o, str) and o for o in options)
            ):
                raise ValidationError("options must be at least two distinct non-empty strings")

    def _apply_issue_added(self, payload: Mapping, at: str, seq: int) -> None:
        iid = payload["issue"]
        options = tuple(payload.get("options") or ("yes", "no"))
        self.issues[iid] = Issue(
            id=iid,
            event_id=payload["event"],
            title=payload["title"],
            topic=payload.get("topic"),
            status=IssueStatus.DRAFT,
            options=options,
        )
        self.voting_events[payload["event"]].issues.append(iid)
        self.votes[iid] = {}
        self.booklets[iid] = Booklet()

    def _validate_phase_advanced(self, payload: Mapping, at: str) -> None:
        self._check_keys(payload, ("scope", "id", "phase", "actor"))
        self._require_config()
        self._require_role(payload["actor"], "administrator", "advancing a phase")
        scope = payload.get("scope")
        if scope == "event":
            ev = self.voting_events.get(payload["id"])
            if ev is None:
                raise NotFoundError(f"unknown voting event {payload['id']!r}")
            new = payload.get("phase")
            if new not in EVENT_PHASES:
                raise ValidationError(f"event phase must be one of {EVENT_PHASES}")
            if EVENT_PHASES.index(new) <= EVENT_PHASES.index(ev.phase):
                raise InvalidStateError(
                    f"phase can only move forward ({ev.phase!r} -> {new!r} is not an advance)"
                )
        elif scope == "issue":
            issue = self._require_issue(payload["id"])
            new = payload.get("phase")
            if new not in ISSUE_PHASES:
                raise ValidationError(f"issue phase must be one of {ISSUE_PHASES}")
            if issue.status is IssueStatus.CANCELLED:
                raise InvalidStateError(f"issue {issue.id!r} is cancelled")
            current = issue.status.value
            if ISSUE_PHASES.index(new) <= ISSUE_PHASES.index(current):
                raise InvalidStateError(
                    f"issue phase can only move forward ({current!r} -> {new!r})"
                )
            if new == "open":
                ev = self.voting_events[issue.event_id]
                if ev.phase != "voting":
                    raise InvalidStateError(
                        f"issue {issue.id!r} cannot open while its voting event is in "
                        f"phase {ev.phase!r}"
                    )
                cfg = self._require_config()
                if cfg.features.booklet:
                    missing = booklet_missing_sections(self, issue.id)
                    if missing:
                        raise InvalidStateError(
                            f"issue {issue.id!r} cannot open: booklet incomplete, "
                            f"missing {missing}"
                        )
            if new == "closed" and issue.status is not IssueStatus.OPEN:
                raise InvalidStateError(
                    f"issue {issue.id!r} cannot close from {current!r}; only open issues close"
                )
        else:
            raise ValidationError("scope must be 'event' or 'issue'")

    def _apply_phase_advanced(self, payload: Mapping, at: str, seq: int) -> None:
        if payload["scope"] == "event":
            ev = self.voting_events[payload["id"]]
            ev.phase = payload["phase"]
            if ev.phase == "closed":
                for iid in ev.issues:
                    if self.issues[iid].status is IssueStatus.OPEN:
                        self._close_issue(iid, at, seq)
        else:
            iid = payload["id"]
            new = payload["phase"]
            if new == "closed":
                self._close_issue(iid, at, seq)
            else:
                self.issues[iid] = self.issues[iid].with_status(IssueStatus(new))

    def _close_issue(self, iid: str, at: str, seq: int) -> None:
        issue = self.issues[iid]
        cfg = self._require_config()
        tally = resolve_issue(
            issue=issue.with_status(IssueStatus.CLOSED),
            participants=set(self.participants),
            delegations=self.delegations,
            taxonomy=self.taxonomy,
            votes=self.votes.get(iid, {}),
            config=cfg,
        )
        attribution = unit_attribution(
            participants=set(self.participants),
            edges=self.raw_edges_for_issue(issue),
            voters=set(self.votes.get(iid, {})),
            transferable=cfg.transferability_enabled,
        )
        self.issues[iid] = issue.with_status(IssueStatus.CLOSED)
        self.outcomes[iid] = FrozenOutcome(
            closed_seq=seq, closed_at=at, tally=tally, attribution=attribution
        )

    def _validate_issue_cancelled(self, payload: Mapping, at: str) -> None:
        self._check_keys(payload, ("issue", "reason", "actor"))
        self._require_config()
        self._require_role(payload["actor"], "administrator", "cancelling an issue")
        issue = self._require_issue(payload["issue"])
        self._nonempty_str(payload, "reason")
        if issue.status is IssueStatus.CANCELLED:
            raise InvalidStateError(f"issue {issue.id!r} is already cancelled")
        if issue.status is IssueStatus.CLOSED:
            raise InvalidStateError(f"issue {issue.id!r} is closed; closed issues cannot be cancelled")

    def _apply_issue_cancelled(self, payload: Mapping, at: str, seq: int) -> None:
        iid = payload["issue"]
        self.issues[iid] = self.issues[iid].with_status(IssueStatus.CANCELLED)
        for p in self.proposals.values():
            if p.issue == iid and p.status == "active":
                p.status = "withdrawn"

    # booklet and proposals --------------------------------------------------

    def _validate_booklet_section_set(self, payload: Mapping, at: str) -> None:
        self._check_keys(payload, ("issue", "section", "content", "author"))
        self._require_config()
        issue = self._require_issue(payload["issue"])
        section = payload.get("section")
        if section in ("proposal_text", "predictions"):
            raise ValidationError(
                f"section {section!r} is filled by its own event kind, not booklet_section_set"
            )
        if section not in BOOKLET_SECTIONS:
            raise ValidationError(f"unknown booklet section {section!r}")
        self._nonempty_str(payload, "content")
        if issue.status not in (IssueStatus.DRAFT, IssueStatus.DELIBERATION):
            raise InvalidStateError(
                f"booklet of issue {issue.id!r} is frozen once the issue leaves deliberation"
            )
        author = payload["author"]
        if section in ("official_description", "state_of_affairs"):
            self._require_role(author, "administrator", f"setting {section}")
        elif section == "supporting_arguments":
            self._require_role(author, "proponent", "adding a supporting argument")
        else:
            self._require_participant(author, "author")

    def _apply_booklet_section_set(self, payload: Mapping, at: str, seq: int) -> None:
        booklet = self.booklets.setdefault(payload["issue"], Booklet())
        section = payload["section"]
        if section == "official_description":
            booklet.official_description = payload["content"]
        elif section == "state_of_affairs":
            booklet.state_of_affairs = payload["content"]
        else:
            entry = ArgumentEntry(author=payload["author"], content=payload["content"], at=at)
            getattr(booklet, section).append(entry)

    def _validate_proposal_submitted(self, payload: Mapping, at: str) -> None:
        self._check_keys(payload, ("proposal", "issue", "text", "proponent"))
        self._require_config()
        pid = self._nonempty_str(payload, "proposal")
        self._nonempty_str(payload, "text")
        if pid in self.proposals:
            raise ValidationError(
                f"proposal id {pid!r} already used; proposals are immutable once submitted"
            )
        issue = self._require_issue(payload["issue"])
        if issue.status not in (IssueStatus.DRAFT, IssueStatus.DELIBERATION):
            raise InvalidStateError(
                f"issue {issue.id!r} is {issue.status.value}; proposals close with deliberation"
            )
        self._require_role(payload["proponent"], "proponent", "submitting a proposal")

    def _apply_proposal_submitted(self, payload: Mapping, at: str, seq: int) -> None:
        self.proposals[payload["proposal"]] = Proposal(
            id=payload["proposal"],
            issue=payload["issue"],
            text=payload["text"],
            proponent=payload["proponent"],
            submitted_at=at,
        )

    # votes ------------------------------------------------------------------

    def _validate_vote_cast(self, payload: Mapping, at: str) -> None:
        self._check_keys(payload, ("issue", "participant", "options"))
        cfg = self._require_config()
        pid = self._nonempty_str(payload, "participant")
        self._require_participant(pid)
        issue = self._require_issue(payload["issue"])
        if issue.status is IssueStatus.CANCELLED:
            raise InvalidStateError(f"issue {issue.id!r} is cancelled; cancelled issues cannot receive votes")
        if issue.status is not IssueStatus.OPEN:
            raise InvalidStateError(
                f"issue {issue.id!r} is {issue.status.value}; votes are accepted only while open"
            )
        options = payload.get("options")
        if not isinstance(options, list) or not options:
            raise ValidationError("options must be a non-empty list")
        if len(set(options)) != len(options):
            raise ValidationError("duplicate options in ballot")
        unknown = [o for o in options if o not in issue.options]
        if unknown:
            raise ValidationError(f"options {unknown} are not on issue {issue.id!r}")
        if cfg.ballot.method is not VotingMethod.APPROVAL and len(options) != 1:
            raise ValidationError(
                f"{cfg.ballot.method.value} ballots select exactly one option"
            )
        if pid in self.votes.get(issue.id, {}) and not cfg.ballot.vote_mutable:
            raise InvalidStateError(
                "ballot rules make votes immutable; the existing ballot stands"
            )

    def _apply_vote_cast(self, payload: Mapping, at: str, seq: int) -> None:
        self.votes.setdefault(payload["issue"], {})[payload["participant"]] = Ballot(
            options=tuple(payload["options"]), cast_at=at
        )

    # candidacy ---------------------------------------------------------------

    def _candidacy_common(self, payload: Mapping) -> tuple[str, list, list]:
        cfg = self._require_config()
        if not cfg.candidacy_enabled:
            raise FeatureDisabledError("candidacy is disabled by the current configuration")
        candidate = self._nonempty_str(payload, "candidate")
        self._require_participant(candidate, "candidate")
        claims = payload.get("claims")
        if not isinstance(claims, list) or not claims:
            raise ValidationError("claims must be a non-empty list")
        for c in claims:
            if not isinstance(c, Mapping) or c.get("kind") not in CLAIM_KINDS:
                raise ValidationError(f"each claim needs a kind from {CLAIM_KINDS}")
            if not isinstance(c.get("text"), str) or not c["text"].strip():
                raise ValidationError("each claim needs non-empty text")
        raw_scopes = payload.get("scopes") or [{"kind": "global"}]
        scopes = [self.scope_from_payload(s) for s in raw_scopes]
        return candidate, list(claims), scopes

    def _validate_candidacy_published(self, payload: Mapping, at: str) -> None:
        self._check_keys(payload, ("candidate", "claims"), ("scopes", "vote_transparency_opt_in"))
        candidate, _, _ = self._candidacy_common(payload)
        if candidate in self.candidacies:
            raise InvalidStateError(
                f"{candidate!r} already has a candidacy; add a version instead"
            )

    def _validate_candidacy_version_added(self, payload: Mapping, at: str) -> None:
        self._check_keys(payload, ("candidate", "claims"), ("scopes", "vote_transparency_opt_in"))
        candidate, _, _ = self._candidacy_common(payload)
        if candidate not in self.candidacies:
            raise NotFoundError(f"{candidate!r} has no candidacy to version")

    def _apply_candidacy(self, payload: Mapping, at: str) -> None:
        candidate, claims, scopes = self._candidacy_common(payload)
        versions = self.candidacies.setdefault(candidate, [])
        for v in versions:
            v.status = "superseded"
        versions.append(
            CandidacyVersion(
                version=len(versions) + 1,
                claims=claims,
                scopes=scopes,
                vote_transparency_opt_in=bool(payload.get("vote_transparency_opt_in", False)),
                published_at=at,
            )
        )

    def _apply_candidacy_published(self, payload: Mapping, at: str, seq: int) -> None:
        self._apply_candidacy(payload, at)

    def _apply_candidacy_version_added(self, payload: Mapping, at: str, seq: int) -> None:
        self._apply_candidacy(payload, at)

    # predictions -------------------------------------------------------------

    def _validate_prediction_registered(self, payload: Mapping, at: str) -> None:
        self._check_keys(
            payload,
            ("prediction", "proposal", "registrant", "variable", "direction", "magnitude", "timeframe"),
            ("methodology",),
        )
        cfg = self._require_config()
        if not cfg.features.predictions:
            raise FeatureDisabledError("predictions are disabled by the current configuration")
        pid = self._nonempty_str(payload, "prediction")
        if pid in self.predictions:
            raise ValidationError(f"prediction id {pid!r} already used")
        proposal = self.proposals.get(payload["proposal"])
        if proposal is None:
            raise NotFoundError(f"unknown proposal {payload['proposal']!r}")
        if proposal.status != "active":
            raise InvalidStateError(f"proposal {proposal.id!r} is {proposal.status}")
        issue = self.issues[proposal.issue]
        if issue.status not in (IssueStatus.DRAFT, IssueStatus.DELIBERATION):
            raise InvalidStateError(
                "predictions print into the booklet, so they must be registered before "
                f"the issue opens; issue {issue.id!r} is {issue.status.value}"
            )
        self._require_role(payload["registrant"], "proponent", "registering a prediction")
        self._nonempty_str(payload, "variable")
        if payload.get("direction") not in PREDICTION_DIRECTIONS:
            raise ValidationError(f"direction must be one of {PREDICTION_DIRECTIONS}")
        magnitude = payload.get("magnitude")
        if (
            not isinstance(magnitude, Mapping)
            or not isinstance(magnitude.get("value"), (int, float))
            or not isinstance(magnitude.get("unit"), str)
            or not magnitude["unit"]
        ):
            raise ValidationError("magnitude must carry a numeric value and a unit")
        timeframe = payload.get("timeframe")
        if not isinstance(timeframe, str):
            raise ValidationError("timeframe must be a timestamp string")
        if parse_ts(timeframe) <= parse_ts(at):
            raise ValidationError("timeframe must lie strictly after registration")

    def _apply_prediction_registered(self, payload: Mapping, at: str, seq: int) -> None:
        self.predictions[payload["prediction"]] = Prediction(
            id=payload["prediction"],
            proposal=payload["proposal"],
            registrant=payload["registrant"],
            variable=payload["variable"],
            direction=payload["direction"],
            magnitude_value=float(payload["magnitude"]["value"]),
            magnitude_unit=payload["magnitude"]["unit"],
            timeframe=payload["timeframe"],
            registered_at=at,
            methodology=payload.get("methodology"),
        )

    def _validate_prediction_evaluated(self, payload: Mapping, at: str) -> None:
        self._check_keys(payload, ("prediction", "assessments", "evidence", "actor"))
        self._require_config()
        self._require_role(payload["actor"], "administrator", "recording an evaluation")
        pred = self.predictions.get(payload["prediction"])
        if pred is None:
            raise NotFoundError(f"unknown prediction {payload['prediction']!r}")
        if pred.id in self.evaluations:
            raise InvalidStateError(
                f"prediction {pred.id!r} is already evaluated; evaluations are immutable"
            )
        if parse_ts(at) < parse_ts(pred.timeframe):
            raise InvalidStateError(
                f"prediction {pred.id!r} is not due until {pred.timeframe}"
            )
        assessments = payload.get("assessments")
        if not isinstance(assessments, list) or not assessments:
            raise ValidationError("an evaluation with zero assessments stays due")
        for a in assessments:
            if not isinstance(a, Mapping):
                raise ValidationError("each assessment must be an object")
            self._require_participant(a.get("assessor"), "assessor")
            if a.get("score") not in ASSESSMENT_SCORES:
                raise ValidationError(f"score must be one of {ASSESSMENT_SCORES}")
        evidence = payload.get("evidence")
        if not isinstance(evidence, list) or not evidence:
            raise ValidationError("an evaluation requires at least one evidence reference")
        for ref in evidence:
            self._validate_evidence_ref(ref)

    def _validate_evidence_ref(self, ref) -> None:
        if not isinstance(ref, Mapping):
            raise ValidationError("evidence references must be objects")
        kind = ref.get("kind")
        if kind == "survey_result":
            instance = self.surveys.get(ref.get("instance"))
            if instance is None:
                raise NotFoundError(f"evidence names unknown survey instance {ref.get('instance')!r}")
            q = ref.get("question")
            if q is not None and all(qd["id"] != q for qd in instance.questions):
                raise NotFoundError(f"survey {instance.id!r} has no question {q!r}")
        elif kind == "note":
            if ref.get("note") not in self.notes:
                raise NotFoundError(f"evidence names unknown note {ref.get('note')!r}")
        elif kind == "external":
            if not (ref.get("url") or ref.get("description")):
                raise ValidationError("external evidence needs a url or description")
        else:
            raise ValidationError(f"unknown evidence kind {kind!r}")

    def _apply_prediction_evaluated(self, payload: Mapping, at: str, seq: int) -> None:
        assessments = list(payload["assessments"])
        score = _score_median([a["score"] for a in assessments])
        self.evaluations[payload["prediction"]] = Evaluation(
            prediction=payload["prediction"],
            score=score,
            assessments=assessments,
            evidence=list(payload["evidence"]),
            evaluated_at=at,
            evaluated_by=payload["actor"],
        )

    # surveys -----------------------------------------------------------------

    def _validate_survey_opened(self, payload: Mapping, at: str) -> None:
        self._check_keys(payload, ("instance", "series", "questions", "opens", "closes", "actor"))
        cfg = self._require_config()
        if not cfg.features.surveys:
            raise FeatureDisabledError("surveys are disabled by the current configuration")
        self._require_role(payload["actor"], "administrator", "opening a survey")
        iid = self._nonempty_str(payload, "instance")
        self._nonempty_str(payload, "series")
        if iid in self.surveys:
            raise ValidationError(f"survey instance id {iid!r} already used")
        questions = payload.get("questions")
        if not isinstance(questions, list) or not questions:
            raise ValidationError("a survey needs at least one question")
        seen = set()
        for q in questions:
            if not isinstance(q, Mapping):
                raise ValidationError("each question must be an object")
            qid = q.get("id")
            if not isinstance(qid, str) or not qid or qid in seen:
                raise ValidationError("question ids must be distinct non-empty strings")
            seen.add(qid)
            if not isinstance(q.get("text"), str) or not q["text"]:
                raise ValidationError(f"question {qid!r} needs text")
            answer = q.get("answer")
            if not isinstance(answer, Mapping) or answer.get("kind") not in ANSWER_KINDS:
                raise ValidationError(f"question {qid!r} needs an answer kind from {ANSWER_KINDS}")
            if answer["kind"] == "choice":
                opts = answer.get("options")
                if not isinstance(opts, list) or len(opts) < 2 or len(set(opts)) != len(opts):
                    raise ValidationError(f"choice question {qid!r} needs at least two distinct options")
        opens, closes = payload.get("opens"), payload.get("closes")
        if not isinstance(opens, str) or not isinstance(closes, str):
            raise ValidationError("opens and closes must be timestamp strings")
        if parse_ts(opens) >= parse_ts(closes):
            raise ValidationError("the response window must have opens earlier than closes")

    def _apply_survey_opened(self, payload: Mapping, at: str, seq: int) -> None:
        iid = payload["instance"]
        self.surveys[iid] = SurveyInstance(
            id=iid,
            series=payload["series"],
            questions=list(payload["questions"]),
            opens=payload["opens"],
            closes=payload["closes"],
            opened_by=payload["actor"],
            opened_at=at,
            eligible=frozenset(self.participants),
        )
        self.survey_series.setdefault(payload["series"], []).append(iid)

    def _validate_survey_response(self, payload: Mapping, at: str) -> None:
        self._check_keys(payload, ("instance", "participant", "answers"))
        self._require_config()
        instance = self.surveys.get(payload.get("instance"))
        if instance is None:
            raise NotFoundError(f"unknown survey instance {payload.get('instance')!r}")
        pid = self._nonempty_str(payload, "participant")
        self._require_participant(pid)
        if pid not in instance.eligible:
            raise AuthorizationError(
                f"{pid!r} was not a member when survey {instance.id!r} opened"
            )
        t = parse_ts(at)
        if t < parse_ts(instance.opens) or t > parse_ts(instance.closes):
            raise InvalidStateError(
                f"survey {instance.id!r} accepts responses only inside its window "
                f"({instance.opens} .. {instance.closes})"
            )
        if pid in instance.responses:
            raise InvalidStateError("survey responses are immutable once submitted")
        answers = payload.get("answers")
        if not isinstance(answers, Mapping):
            raise ValidationError("answers must map question ids to values")
        expected = {q["id"] for q in instance.questions}
        if set(answers) != expected:
            raise ValidationError(
                f"answers must cover exactly the questions {sorted(expected)}"
            )
        for q in instance.questions:
            v = answers[q["id"]]
            kind = q["answer"]["kind"]
            if kind == "scale":
                if not isinstance(v, int) or isinstance(v, bool) or not 1 <= v <= 5:
                    raise ValidationError(f"question {q['id']!r} takes an integer 1..5")
            elif kind == "boolean":
                if not isinstance(v, bool):
                    raise ValidationError(f"question {q['id']!r} takes true or false")
            else:
                if v not in q["answer"]["options"]:
                    raise ValidationError(f"question {q['id']!r} takes one of its listed options")

    def _apply_survey_response(self, payload: Mapping, at: str, seq: int) -> None:
        instance = self.surveys[payload["instance"]]
        instance.responses[payload["participant"]] = dict(payload["answers"])
        instance.responded_at[payload["participant"]] = at

    # community notes ---------------------------------------------------------

    def _validate_note_submitted(self, payload: Mapping, at: str) -> None:
        self._check_keys(payload, ("note", "attached_to", "body", "author"))
        cfg = self._require_config()
        if not cfg.features.community_notes:
            raise FeatureDisabledError("community notes are disabled by the current configuration")
        nid = self._nonempty_str(payload, "note")
        if nid in self.notes:
            raise ValidationError(f"note id {nid!r} already used")
        self._nonempty_str(payload, "body")
        self._require_participant(payload.get("author"), "author")
        target = payload.get("attached_to")
        if not isinstance(target, Mapping) or target.get("kind") not in NOTE_TARGETS:
            raise ValidationError(f"attached_to needs a kind from {NOTE_TARGETS}")
        kind, tid = target["kind"], target.get("id")
        if kind == "proposal" and tid not in self.proposals:
            raise NotFoundError(f"note targets unknown proposal {tid!r}")
        if kind == "prediction" and tid not in self.predictions:
            raise NotFoundError(f"note targets unknown prediction {tid!r}")
        if kind == "candidacy" and tid not in self.candidacies:
            raise NotFoundError(f"note targets unknown candidacy {tid!r}")
        if kind == "survey_result" and tid not in self.surveys:
            raise NotFoundError(f"note targets unknown survey instance {tid!r}")
        if kind == "note" and tid not in self.notes:
            raise NotFoundError(f"note targets unknown note {tid!r}")
        if kind == "argument":
            self._resolve_argument_ref(tid)

    def _resolve_argument_ref(self, tid) -> None:
        # argument ids look like "<issue>/<side>/<index>"
        parts = tid.split("/") if isinstance(tid, str) else []
        if len(parts) != 3 or parts[1] not in ("supporting_arguments", "opposing_arguments"):
            raise ValidationError(
                "argument references look like '<issue>/<supporting_arguments|opposing_arguments>/<index>'"
            )
        booklet = self.booklets.get(parts[0])
        if booklet is None:
            raise NotFoundError(f"note targets unknown issue {parts[0]!r}")
        entries = getattr(booklet, parts[1])
        try:
            idx = int(parts[2])
        except ValueError:
            raise ValidationError("argument index must be an integer")
        if not 0 <= idx < len(entries):
            raise NotFoundError(f"no argument at index {idx} of {parts[0]}/{parts[1]}")

    def _apply_note_submitted(self, payload: Mapping, at: str, seq: int) -> None:
        self.notes[payload["note"]] = Note(
            id=payload["note"],
            target_kind=payload["attached_to"]["kind"],
            target_id=payload["attached_to"]["id"],
            body=payload["body"],
            author=payload["author"],
            submitted_at=at,
        )

    def _validate_note_rated(self, payload: Mapping, at: str) -> None:
        self._check_keys(payload, ("note", "rater", "rating", "stance"))
        cfg = self._require_config()
        if not cfg.features.community_notes:
            raise FeatureDisabledError("community notes are disabled by the current configuration")
        note = self.notes.get(payload.get("note"))
        if note is None:
            raise NotFoundError(f"unknown note {payload.get('note')!r}")
        rater = self._nonempty_str(payload, "rater")
        self._require_participant(rater, "rater")
        if rater == note.author:
            raise ValidationError("authors cannot rate their own notes")
        if payload.get("rating") not in RATINGS:
            raise ValidationError(f"rating must be one of {RATINGS}")
        if payload.get("stance") not in STANCES:
            raise ValidationError(f"stance must be one of {STANCES}")

    def _apply_note_rated(self, payload: Mapping, at: str, seq: int) -> None:
        note = self.notes[payload["note"]]
        note.ratings[payload["rater"]] = (payload["rating"], payload["stance"])

    # -- serialization -------------------------------------------------------

    def to_dict(self) -> dict:
        return {
            "org": self.org,
            "seq": self.seq,
            "last_at": self.last_at,
            "config": self.config.to_dict() if self.config else None,
            "topics": [
                {"id": t.id, "name": t.name, "parent": t.parent}
                for t in sorted(self.taxonomy, key=lambda t: t.id)
            ],
            "participants": {
                pid: {"display_name": p.display_name, "joined_at": p.joined_at}
                for pid, p in sorted(self.participants.items())
            },
            "roles": {pid: sorted(r) for pid, r in sorted(self.roles.items())},
            "delegations": [
                d.scope.to_dict() | {"source": d.source, "target": d.target, "created_at": d.created_at}
                for d in sorted(self.delegations, key=lambda d: (d.source, d.scope.key))
            ],
            "delegation_changes": [
                {
                    "at": c.at,
                    "action": c.action,
                    "source": c.source,
                    "target": c.target,
                    "scope": c.scope.to_dict(),
                }
                for c in self.delegation_changes
            ],
            "voting_events": {
                eid: {
                    "title": e.title,
                    "phase": e.phase,
                    "created_by": e.created_by,
                    "created_at": e.created_at,
                    "timeline": {
                        "deliberation_days": e.deliberation_days,
                        "curation_days": e.curation_days,
                        "voting_days": e.voting_days,
                    },
                    "issues": list(e.issues),
                }
                for eid, e in sorted(self.voting_events.items())
            },
            "issues": {
                iid: {
                    "title": i.title,
                    "topic": i.topic,
                    "status": i.status.value,
                    "options": list(i.options),
                    "event": i.event_id,
                }
                for iid, i in sorted(self.issues.items())
            },
            "votes": {
                iid: {
                    pid: {"options": list(b.options), "cast_at": b.cast_at}
                    for pid, b in sorted(ballots.items())
                }
                for iid, ballots in sorted(self.votes.items())
            },
            "booklets": {
                iid: {
                    "official_description": b.official_description,
                    "state_of_affairs": b.state_of_affairs,
                    "supporting_arguments": [
                        {"author": a.author, "content": a.content, "at": a.at}
                        for a in b.supporting_arguments
                    ],
                    "opposing_arguments": [
                        {"author": a.author, "content": a.content, "at": a.at}
                        for a in b.opposing_arguments
                    ],
                }
                for iid, b in sorted(self.booklets.items())
            },
            "proposals": {
                pid: {
                    "issue": p.issue,
                    "text": p.text,
                    "proponent": p.proponent,
                    "submitted_at": p.submitted_at,
                    "status": p.status,
                }
                for pid, p in sorted(self.proposals.items())
            },
            "candidacies": {
                cid: [
                    {
                        "version": v.version,
                        "claims": v.claims,
                        "scopes": [s.to_dict() for s in v.scopes],
                        "vote_transparency_opt_in": v.vote_transparency_opt_in,
                        "published_at": v.published_at,
                        "status": v.status,
                    }
                    for v in versions
                ]
                for cid, versions in sorted(self.candidacies.items())
            },
            "predictions": {
                pid: {
                    "proposal": p.proposal,
                    "registrant": p.registrant,
                    "variable": p.variable,
                    "direction": p.direction,
                    "magnitude": {"value": p.magnitude_value, "unit": p.magnitude_unit},
                    "timeframe": p.timeframe,
                    "registered_at": p.registered_at,
                    "methodology": p.methodology,
                }
                for pid, p in sorted(self.predictions.items())
            },
            "evaluations": {
                pid: {
                    "score": e.score,
                    "assessments": e.assessments,
                    "evidence": e.evidence,
                    "evaluated_at": e.evaluated_at,
                    "evaluated_by": e.evaluated_by,
                }
                for pid, e in sorted(self.evaluations.items())
            },
            "surveys": {
                sid: {
                    "series": s.series,
                    "questions": s.questions,
                    "opens": s.opens,
                    "closes": s.closes,
                    "opened_by": s.opened_by,
                    "opened_at": s.opened_at,
                    "eligible": sorted(s.eligible),
                    "responses": {p: s.responses[p] for p in sorted(s.responses)},
                    "responded_at": {p: s.responded_at[p] for p in sorted(s.responded_at)},
                }
                for sid, s in sorted(self.surveys.items())
            },
            "survey_series": {k: list(v) for k, v in sorted(self.survey_series.items())},
            "notes": {
                nid: {
                    "target_kind": n.target_kind,
                    "target_id": n.target_id,
                    "body": n.body,
                    "author": n.author,
                    "submitted_at": n.submitted_at,
                    "ratings": {
                        r: {"rating": v[0], "stance": v[1]} for r, v in sorted(n.ratings.items())
                    },
                }
                for nid, n in sorted(self.notes.items())
            },
            "outcomes": {
                iid: {
                    "closed_seq": o.closed_seq,
                    "closed_at": o.closed_at,
                    "tally": o.tally.to_dict(),
                    "attribution": {p: o.attribution[p] for p in sorted(o.attribution)},
                }
                for iid, o in sorted(self.outcomes.items())
            },
        }

    def digest(self) -> str:
        return hashlib.sha256(canonical_json(self.to_dict()).encode()).hexdigest()


def replay(org: str, events, strict: bool = True) -> State:
    """Fold events into a State. With strict=True (default) every event is
    re-validated, so a hand-edited log that was never legal fails loudly."""
    state = State(org)
    for e in events:
        if strict:
            state.validate(e.kind, e.payload, e.at)
        state.apply(e)
    return state
