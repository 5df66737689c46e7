"""Per-issue vote resolution: effective delegations, forest construction, weights, tally.

The pipeline for one issue:

1. ``effective_delegation`` picks, per participant, the single active delegation
   with the highest specificity (issue > deeper topic > shallower topic > global).
2. ``build_forest`` assembles the effective-edge graph and removes the outgoing
   edge of every direct voter (a direct vote severs the chain at that point).
   What remains is a functional graph: out-degree at most 1 per node, voters at
   out-degree 0.
3. ``compute_weights`` pushes every participant's single unit of weight along
   their chain to the first direct voter. Units that never reach a voter
   (dangling chains, voterless cycles and everything feeding into them) are
   reported as abstaining, never silently dropped.
4. ``tally`` aggregates voter weights into option totals, checks quorum, and
   applies the configured voting method.

All functions are pure over immutable snapshots; chain traversal is iterative
throughout because chain length is unbounded.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from typing import Iterable, Mapping, Optional

from .model import (
    BallotRules,
    Delegations,
    GovernanceConfig,
    InvalidStateError,
    Issue,
    IssueStatus,
    ScopeKind,
    Taxonomy,
    ValidationError,
    VotingMethod,
)


@dataclass(frozen=True)
class Ballot:
    """One participant's cast vote: selected option(s) and when.

    A single option everywhere except approval voting, which accepts several.
    """

    options: tuple[str, ...]
    cast_at: str = ""

    def __post_init__(self):
        if not self.options:
            raise ValidationError("a ballot must select at least one option")
        if len(set(self.options)) != len(self.options):
            raise ValidationError("a ballot cannot repeat an option")


class TallyOutcome(str, Enum):
    DECIDED = "decided"
    TIED = "tied"
    NO_MAJORITY = "no_majority"
    NO_VOTES = "no_votes"


@dataclass(frozen=True)
class ResolvedTally:
    issue: str
    weights: Mapping[str, int]
    option_totals: Mapping[str, int]
    abstainers: frozenset[str]
    cast_weight: int
    eligible_count: int
    quorum_met: bool
    method: VotingMethod
    outcome: TallyOutcome
    winner: Optional[str] = None

    def to_dict(self) -> dict:
        return {
            "issue": self.issue,
            "weights": dict(sorted(self.weights.items())),
            "option_totals": dict(sorted(self.option_totals.items())),
            "abstainers": sorted(self.abstainers),
            "cast_weight": self.cast_weight,
            "eligible_count": self.eligible_count,
            "quorum_met": self.quorum_met,
            "method": self.method.value,
            "outcome": self.outcome.value,
            "winner": self.winner,
        }


def effective_delegation(
    source: str,
    issue: Issue,
    delegations: Delegations,
    taxonomy: Taxonomy,
) -> Optional[str]:
    """Target of the highest-precedence active delegation from ``source``, if any.

    Active means: issue-scoped and naming this issue; topic-scoped with the
    issue classified at or below that topic; or global. An unclassified issue
    activates only global delegations. Precedence is specificity: issue beats
    any topic, a deeper topic beats a shallower one, any topic beats global.
    """
    best_topic: Optional[tuple[int, str]] = None
    global_target: Optional[str] = None
    for d in delegations.for_source(source):
        scope = d.scope
        if scope.kind == ScopeKind.ISSUE:
            if scope.issue == issue.id:
                return d.target
        elif scope.kind == ScopeKind.TOPIC:
            if issue.topic is not None and taxonomy.is_or_descends_from(issue.topic, scope.topic):
                depth = taxonomy.depth(scope.topic)
                # active topics all lie on the issue topic's unique root path and
                # (source, scope) is unique, so two candidates can never share a depth
                assert best_topic is None or best_topic[0] != depth, "specificity tie"
                if best_topic is None or depth > best_topic[0]:
                    best_topic = (depth, d.target)
        else:
            global_target = d.target
    if best_topic is not None:
        return best_topic[1]
    return global_target


def build_forest(
    issue: Issue,
    participants: Iterable[str],
    delegations: Delegations,
    votes: Mapping[str, Ballot],
    taxonomy: Taxonomy,
    config: GovernanceConfig,
) -> dict[str, str]:
    """Effective-edge graph for the issue, with direct voters' edges removed.

    Returned as a source -> target mapping; the mapping shape is the out-degree
    invariant. Direct voters never have an outgoing edge. When the configuration
    disables delegation entirely, the forest is empty.
    """
    if not config.delegation_enabled:
        return {}
    edges: dict[str, str] = {}
    for p in participants:
        if p in votes:
            continue
        target = effective_delegation(p, issue, delegations, taxonomy)
        if target is not None:
            edges[p] = target
    return edges


def compute_weights(
    participants: Iterable[str],
    edges: Mapping[str, str],
    votes: Mapping[str, Ballot],
    config: GovernanceConfig,
) -> tuple[dict[str, int], frozenset[str]]:
    """Effective weight per participant, plus the abstainer set.

    Each direct voter carries one unit plus every unit whose chain terminates at
    them. Non-voters weigh 0. With transferability disabled only one-hop
    delegators transit their unit; anything that would need a second hop
    abstains. Voterless cycles, and every chain feeding into one, abstain.
    """
    everyone = list(participants)
    voters = set(votes)
    weights = {p: 0 for p in everyone}
    reached: set[str] = set()

    if config.transferability_enabled:
        # reverse adjacency restricted to non-voters (voters never appear as
        # edge sources: their edges were removed by build_forest)
        sources: dict[str, list[str]] = {}
        for src, dst in edges.items():
            sources.setdefault(dst, []).append(src)
        for v in voters:
            count = 0
            stack = list(sources.get(v, ()))
            while stack:
                q = stack.pop()
                count += 1
                reached.add(q)
                stack.extend(sources.get(q, ()))
            weights[v] = 1 + count
    else:
        for v in voters:
            weights[v] = 1
        for src, dst in edges.items():
            if dst in voters:
                weights[dst] += 1
                reached.add(src)

    abstainers = frozenset(p for p in everyone if p not in voters and p not in reached)
    return weights, abstainers


def unit_attribution(
    participants: Iterable[str],
    edges: Mapping[str, Optional[str]],
    voters: set[str],
    transferable: bool,
) -> dict[str, Optional[str]]:
    """Where each participant's unit of weight ends up: a voter id, or None.

    A direct voter's unit stays with them. A delegator's unit follows the chain
    to the first direct voter encountered; chains that dangle or enter a
    voterless cycle yield None (the unit abstains). With transferability off,
    only a direct delegation to a voter carries the unit. Iterative walk with
    memoization, so repeated shared suffixes are traversed once.
    """
    resolved: dict[str, Optional[str]] = {v: v for v in voters}
    if not transferable:
        for p in participants:
            if p in resolved:
                continue
            nxt = edges.get(p)
            resolved[p] = nxt if nxt in voters else None
        return resolved
    for p in participants:
        if p in resolved:
            continue
        path: list[str] = []
        on_path: set[str] = set()
        cur: Optional[str] = p
        terminal: Optional[str] = None
        while True:
            if cur is None:
                break  # dangling chain
            if cur in resolved:
                terminal = resolved[cur]
                break
            if cur in on_path:
                break  # voterless cycle; the whole path abstains
            path.append(cur)
            on_path.add(cur)
            cur = edges.get(cur)
        for q in path:
            resolved[q] = terminal
    return resolved


def _quorum_met(cast_weight: int, eligible_count: int, quorum: float) -> bool:
    # exact decimal comparison; floats like 0.3 must not wobble at the boundary
    return Fraction(cast_weight, eligible_count) >= Fraction(str(quorum))


def tally(
    issue: Issue,
    weights: Mapping[str, int],
    votes: Mapping[str, Ballot],
    ballot_rules: BallotRules,
    eligible_count: int,
) -> ResolvedTally:
    """Aggregate voter weights into option totals and apply the voting method.

    Ties are reported, never broken. Under simple majority an option needs
    strictly more than half of the cast weight; approval voting credits a
    voter's full weight to each approved option while counting the voter once
    toward quorum.
    """
    if eligible_count <= 0:
        raise InvalidStateError("cannot tally with zero eligible participants")

    method = ballot_rules.method
    totals: dict[str, int] = {opt: 0 for opt in issue.options}
    cast_weight = 0
    for p, ballot in votes.items():
        w = weights.get(p, 0)
        if method != VotingMethod.APPROVAL and len(ballot.options) != 1:
            raise ValidationError(f"{method.value} ballots select exactly one option")
        for opt in ballot.options:
            if issue.options and opt not in issue.options:
                raise ValidationError(f"unknown option {opt!r} for issue {issue.id}")
            totals[opt] = totals.get(opt, 0) + w
        cast_weight += w

    quorum_met = _quorum_met(cast_weight, eligible_count, ballot_rules.quorum)

    winner: Optional[str] = None
    if cast_weight == 0:
        outcome = TallyOutcome.NO_VOTES
    else:
        top = max(totals.values())
        leaders = sorted(opt for opt, t in totals.items() if t == top)
        if method == VotingMethod.SIMPLE_MAJORITY:
            if 2 * top > cast_weight and len(leaders) == 1:
                outcome, winner = TallyOutcome.DECIDED, leaders[0]
            elif len(leaders) > 1:
                outcome = TallyOutcome.TIED
            else:
                outcome = TallyOutcome.NO_MAJORITY
        else:
            if len(leaders) == 1:
                outcome, winner = TallyOutcome.DECIDED, leaders[0]
            else:
                outcome = TallyOutcome.TIED

    return ResolvedTally(
        issue=issue.id,
        weights=dict(weights),
        option_totals=totals,
        abstainers=frozenset(),
        cast_weight=cast_weight,
        eligible_count=eligible_count,
        quorum_met=quorum_met,
        method=method,
        outcome=outcome,
        winner=winner,
    )


def resolve_issue(
    issue: Issue,
    participants: Iterable[str],
    delegations: Delegations,
    votes: Mapping[str, Ballot],
    taxonomy: Taxonomy,
    config: GovernanceConfig,
    eligible_count: Optional[int] = None,
) -> ResolvedTally:
    """Full deterministic resolution of one issue from a snapshot.

    Rejects cancelled issues and issues that were never opened. Identical
    inputs always yield identical results; callers may memoize freely.
    """
    if issue.status == IssueStatus.CANCELLED:
        raise InvalidStateError("cancelled issues cannot receive votes")
    if issue.status not in (IssueStatus.OPEN, IssueStatus.CLOSED):
        raise InvalidStateError(f"issue {issue.id} is not open for resolution ({issue.status.value})")

    everyone = list(participants)
    if not everyone:
        return ResolvedTally(
            issue=issue.id,
            weights={},
            option_totals={opt: 0 for opt in issue.options},
            abstainers=frozenset(),
            cast_weight=0,
            eligible_count=0,
            quorum_met=config.ballot.quorum == 0.0,
            method=config.ballot.method,
            outcome=TallyOutcome.NO_VOTES,
        )

    edges = build_forest(issue, everyone, delegations, votes, taxonomy, config)
    weights, abstainers = compute_weights(everyone, edges, votes, config)
    eligible = eligible_count if eligible_count is not None else len(everyone)
    result = tally(issue, weights, votes, config.ballot, eligible)
    return ResolvedTally(
        issue=result.issue,
        weights=result.weights,
        option_totals=result.option_totals,
        abstainers=abstainers,
        cast_weight=result.cast_weight,
        eligible_count=result.eligible_count,
        quorum_met=result.quorum_met,
        method=result.method,
        outcome=result.outcome,
        winner=result.winner,
    )
