"""Core domain model: participants, topics, issues, delegations, and governance configuration.

Everything here is an immutable value. Mutation happens elsewhere, through the
append-only event log; these types only describe state and validate it.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Iterable, Iterator, Mapping, Optional


class NotFoundError(KeyError):
    """A referenced entity does not exist."""


class ValidationError(ValueError):
    """An operation violates a structural invariant."""


class AuthorizationError(PermissionError):
    """The acting participant lacks the role the operation requires."""


class FeatureDisabledError(ValidationError):
    """The organization's configuration does not enable this mechanism."""


class InvalidStateError(ValidationError):
    """The operation is structurally valid but the entity is in the wrong state."""


# --------------------------------------------------------------------------- #
# Topics
# --------------------------------------------------------------------------- #

@dataclass(frozen=True)
class Topic:
    id: str
    name: str
    parent: Optional[str] = None


class Taxonomy:
    """Hierarchical topic forest with materialized root paths.

    Parent pointers are the storage; the root path per topic is materialized at
    insertion so ancestor checks cost O(depth). Insertion rejects duplicates,
    unknown parents, and anything that would put a topic on its own root path.
    """

    def __init__(self, topics: Iterable[Topic] = ()):
        self._topics: dict[str, Topic] = {}
        self._paths: dict[str, tuple[str, ...]] = {}
        for t in topics:
            self.add(t)

    def add(self, topic: Topic) -> None:
        if topic.id in self._topics:
            raise ValidationError(f"duplicate topic id: {topic.id}")
        if topic.parent is not None:
            if topic.parent not in self._topics:
                raise NotFoundError(f"unknown parent topic: {topic.parent}")
            path = self._paths[topic.parent] + (topic.id,)
        else:
            path = (topic.id,)
        # a topic is inserted after its parent, so its own id can never already
        # be on the parent path; the forest stays acyclic by construction
        self._topics[topic.id] = topic
        self._paths[topic.id] = path

    def __contains__(self, topic_id: str) -> bool:
        return topic_id in self._topics

    def __iter__(self) -> Iterator[Topic]:
        return iter(self._topics.values())

    def __len__(self) -> int:
        return len(self._topics)

    def get(self, topic_id: str) -> Topic:
        try:
            return self._topics[topic_id]
        except KeyError:
            raise NotFoundError(f"unknown topic: {topic_id}") from None

    def root_path(self, topic_id: str) -> tuple[str, ...]:
        """Unique path from the root of the tree down to ``topic_id``."""
        if topic_id not in self._paths:
            raise NotFoundError(f"unknown topic: {topic_id}")
        return self._paths[topic_id]

    def depth(self, topic_id: str) -> int:
        return len(self.root_path(topic_id))

    def is_or_descends_from(self, candidate: str, ancestor: str) -> bool:
        """True iff ``candidate`` equals ``ancestor`` or sits below it."""
        if ancestor not in self._paths:
            raise NotFoundError(f"unknown topic: {ancestor}")
        return ancestor in self.root_path(candidate)

    def topological_order(self) -> list[str]:
        # insertion order is already parents-first
        return list(self._topics)


def topic_is_or_descends_from(candidate: str, ancestor: str, taxonomy: Taxonomy) -> bool:
    return taxonomy.is_or_descends_from(candidate, ancestor)


# --------------------------------------------------------------------------- #
# Participants and issues
# --------------------------------------------------------------------------- #

@dataclass(frozen=True)
class Participant:
    id: str
    display_name: str
    joined_at: str
    active: bool = True


class IssueStatus(str, Enum):
    DRAFT = "draft"
    DELIBERATION = "deliberation"
    OPEN = "open"
    CLOSED = "closed"
    CANCELLED = "cancelled"


# forward order of the non-cancelled ladder; cancelled is absorbing
ISSUE_STATUS_ORDER = [
    IssueStatus.DRAFT,
    IssueStatus.DELIBERATION,
    IssueStatus.OPEN,
    IssueStatus.CLOSED,
]


@dataclass(frozen=True)
class Issue:
    id: str
    event_id: str
    title: str
    topic: Optional[str] = None
    status: IssueStatus = IssueStatus.DRAFT
    options: tuple[str, ...] = ("yes", "no")

    def with_status(self, status: IssueStatus) -> Issue:
        return replace(self, status=status)


# --------------------------------------------------------------------------- #
# Delegations
# --------------------------------------------------------------------------- #

class ScopeKind(str, Enum):
    GLOBAL = "global"
    TOPIC = "topic"
    ISSUE = "issue"


@dataclass(frozen=True)
class DelegationScope:
    """Coverage of a delegation: everything, a topic subtree, or one issue.

    Exactly one payload field is populated, matching the kind.
    """

    kind: ScopeKind
    topic: Optional[str] = None
    issue: Optional[str] = None

    def __post_init__(self):
        if self.kind == ScopeKind.GLOBAL and (self.topic or self.issue):
            raise ValidationError("global scope carries no payload")
        if self.kind == ScopeKind.TOPIC and (not self.topic or self.issue):
            raise ValidationError("topic scope requires a topic and nothing else")
        if self.kind == ScopeKind.ISSUE and (not self.issue or self.topic):
            raise ValidationError("issue scope requires an issue and nothing else")

    @classmethod
    def global_(cls) -> DelegationScope:
        return cls(ScopeKind.GLOBAL)

    @classmethod
    def for_topic(cls, topic_id: str) -> DelegationScope:
        return cls(ScopeKind.TOPIC, topic=topic_id)

    @classmethod
    def for_issue(cls, issue_id: str) -> DelegationScope:
        return cls(ScopeKind.ISSUE, issue=issue_id)

    @property
    def key(self) -> tuple:
        return (self.kind.value, self.topic, self.issue)

    def to_dict(self) -> dict:
        d: dict = {"kind": self.kind.value}
        if self.topic is not None:
            d["topic"] = self.topic
        if self.issue is not None:
            d["issue"] = self.issue
        return d

    @classmethod
    def from_dict(cls, d: Mapping) -> DelegationScope:
        return cls(ScopeKind(d["kind"]), topic=d.get("topic"), issue=d.get("issue"))


@dataclass(frozen=True)
class Delegation:
    source: str
    target: str
    scope: DelegationScope
    created_at: str = ""

    def __post_init__(self):
        if self.source == self.target:
            raise ValidationError("cannot delegate to yourself")


class Delegations:
    """The active delegation set, keyed by (source, scope).

    At most one delegation exists per key; upserting with an existing key
    replaces the earlier delegation. Instances are immutable: upsert and revoke
    return new sets.
    """

    def __init__(self, items: Iterable[Delegation] = ()):
        self._by_key: dict[tuple, Delegation] = {}
        for d in items:
            self._by_key[(d.source,) + d.scope.key] = d
        self._by_source: Optional[dict[str, list[Delegation]]] = None

    def __iter__(self) -> Iterator[Delegation]:
        return iter(self._by_key.values())

    def __len__(self) -> int:
        return len(self._by_key)

    def get(self, source: str, scope: DelegationScope) -> Optional[Delegation]:
        return self._by_key.get((source,) + scope.key)

    def _source_index(self) -> dict[str, list[Delegation]]:
        # built on first use; immutability means it can never go stale
        if self._by_source is None:
            index: dict[str, list[Delegation]] = {}
            for d in self._by_key.values():
                index.setdefault(d.source, []).append(d)
            self._by_source = index
        return self._by_source

    def for_source(self, source: str) -> list[Delegation]:
        return list(self._source_index().get(source, ()))

    def upsert(self, d: Delegation) -> Delegations:
        out = Delegations()
        out._by_key = dict(self._by_key)
        out._by_key[(d.source,) + d.scope.key] = d
        return out

    def revoke(self, source: str, scope: DelegationScope) -> Delegations:
        key = (source,) + scope.key
        if key not in self._by_key:
            raise NotFoundError(f"no active delegation for {source} with scope {scope.kind.value}")
        out = Delegations()
        out._by_key = dict(self._by_key)
        del out._by_key[key]
        return out


def upsert_delegation(d: Delegation, delegations: Delegations) -> Delegations:
    return delegations.upsert(d)


def revoke_delegation(source: str, scope: DelegationScope, delegations: Delegations) -> Delegations:
    return delegations.revoke(source, scope)


# --------------------------------------------------------------------------- #
# Governance configuration
# --------------------------------------------------------------------------- #

class BallotVisibility(str, Enum):
    SECRET = "secret"
    PUBLIC = "public"


class ResultsMode(str, Enum):
    SEALED = "sealed"
    LIVE = "live"


class VotingMethod(str, Enum):
    SIMPLE_MAJORITY = "simple_majority"
    PLURALITY = "plurality"
    APPROVAL = "approval"


@dataclass(frozen=True)
class BallotRules:
    ballot_visibility: BallotVisibility = BallotVisibility.SECRET
    results: ResultsMode = ResultsMode.LIVE
    vote_mutable: bool = True
    quorum: float = 0.0
    method: VotingMethod = VotingMethod.SIMPLE_MAJORITY


@dataclass(frozen=True)
class FeatureToggles:
    booklet: bool = False
    community_notes: bool = False
    predictions: bool = False
    predictions_required: bool = False
    surveys: bool = False
    awareness: bool = False


@dataclass(frozen=True)
class TimelineRules:
    """Advisory phase durations, in days."""

    deliberation: float = 7.0
    curation: float = 2.0
    voting: float = 7.0


@dataclass(frozen=True)
class Thresholds:
    """Tunable parameters for accountability and awareness heuristics."""

    bridging_min_each_stance: int = 2
    bridging_helpful_ratio: float = 0.6
    bridging_decision_count: int = 5
    concentration_share: float = 0.05
    harvesting_floor: int = 10
    harvesting_multiplier: float = 3.0
    harvesting_window_days: float = 7.0


@dataclass(frozen=True)
class GovernanceConfig:
    candidacy_enabled: bool
    transferability_enabled: bool
    ballot: BallotRules = BallotRules()
    features: FeatureToggles = FeatureToggles()
    timeline: TimelineRules = TimelineRules()
    thresholds: Thresholds = Thresholds()

    @property
    def delegation_enabled(self) -> bool:
        # the delegation mechanism exists iff at least one axis is on
        return self.candidacy_enabled or self.transferability_enabled

    def to_dict(self) -> dict:
        return {
            "candidacy_enabled": self.candidacy_enabled,
            "transferability_enabled": self.transferability_enabled,
            "ballot": {
                "ballot_visibility": self.ballot.ballot_visibility.value,
                "results": self.ballot.results.value,
                "vote_mutable": self.ballot.vote_mutable,
                "quorum": self.ballot.quorum,
                "method": self.ballot.method.value,
            },
            "features": {
                "booklet": self.features.booklet,
                "community_notes": self.features.community_notes,
                "predictions": self.features.predictions,
                "predictions_required": self.features.predictions_required,
                "surveys": self.features.surveys,
                "awareness": self.features.awareness,
            },
            "timeline": {
                "deliberation": self.timeline.deliberation,
                "curation": self.timeline.curation,
                "voting": self.timeline.voting,
            },
            "thresholds": {
                "bridging_min_each_stance": self.thresholds.bridging_min_each_stance,
                "bridging_helpful_ratio": self.thresholds.bridging_helpful_ratio,
                "bridging_decision_count": self.thresholds.bridging_decision_count,
                "concentration_share": self.thresholds.concentration_share,
                "harvesting_floor": self.thresholds.harvesting_floor,
                "harvesting_multiplier": self.thresholds.harvesting_multiplier,
                "harvesting_window_days": self.thresholds.harvesting_window_days,
            },
        }

    @classmethod
    def from_dict(cls, d: Mapping) -> GovernanceConfig:
        ballot = d.get("ballot", {})
        features = d.get("features", {})
        timeline = d.get("timeline", {})
        thresholds = d.get("thresholds", {})
        return cls(
            candidacy_enabled=bool(d["candidacy_enabled"]),
            transferability_enabled=bool(d["transferability_enabled"]),
            ballot=BallotRules(
                ballot_visibility=BallotVisibility(ballot.get("ballot_visibility", "secret")),
                results=ResultsMode(ballot.get("results", "live")),
                vote_mutable=bool(ballot.get("vote_mutable", True)),
                quorum=float(ballot.get("quorum", 0.0)),
                method=VotingMethod(ballot.get("method", "simple_majority")),
            ),
            features=FeatureToggles(
                booklet=bool(features.get("booklet", False)),
                community_notes=bool(features.get("community_notes", False)),
                predictions=bool(features.get("predictions", False)),
                predictions_required=bool(features.get("predictions_required", False)),
                surveys=bool(features.get("surveys", False)),
                awareness=bool(features.get("awareness", False)),
            ),
            timeline=TimelineRules(
                deliberation=float(timeline.get("deliberation", 7.0)),
                curation=float(timeline.get("curation", 2.0)),
                voting=float(timeline.get("voting", 7.0)),
            ),
            thresholds=Thresholds(
                bridging_min_each_stance=int(thresholds.get("bridging_min_each_stance", 2)),
                bridging_helpful_ratio=float(thresholds.get("bridging_helpful_ratio", 0.6)),
                bridging_decision_count=int(thresholds.get("bridging_decision_count", 5)),
                concentration_share=float(thresholds.get("concentration_share", 0.05)),
                harvesting_floor=int(thresholds.get("harvesting_floor", 10)),
                harvesting_multiplier=float(thresholds.get("harvesting_multiplier", 3.0)),
                harvesting_window_days=float(thresholds.get("harvesting_window_days", 7.0)),
            ),
        )


def validate_config(config: GovernanceConfig) -> list[str]:
    """Check every configuration invariant. Returns violations, never raises."""
    violations = []
    if not 0.0 <= config.ballot.quorum <= 1.0:
        violations.append(f"quorum must lie in [0, 1], got {config.ballot.quorum}")
    if config.features.predictions_required and not config.features.predictions:
        violations.append("predictions_required needs the predictions feature enabled")
    t = config.timeline
    if t.deliberation < 0 or t.curation < 0:
        violations.append("timeline durations must be non-negative")
    if t.voting <= 0:
        violations.append("voting period must be positive")
    th = config.thresholds
    if th.bridging_min_each_stance < 1:
        violations.append("bridging_min_each_stance must be at least 1")
    if not 0.0 < th.bridging_helpful_ratio <= 1.0:
        violations.append("bridging_helpful_ratio must lie in (0, 1]")
    if not 0.0 < th.concentration_share <= 1.0:
        violations.append("concentration_share must lie in (0, 1]")
    return violations
