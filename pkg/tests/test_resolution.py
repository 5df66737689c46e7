from __future__ import annotations

import random

import pytest

from liquidgov.model import (
    Delegation,
    DelegationScope,
    Delegations,
    InvalidStateError,
    Issue,
    IssueStatus,
    Taxonomy,
    ValidationError,
)
from liquidgov.resolution import (
    Ballot,
    TallyOutcome,
    build_forest,
    compute_weights,
    effective_delegation,
    resolve_issue,
    tally,
)

from oracle import (
    all_functional_graphs,
    all_vote_subsets,
    oracle_weights,
    oracle_weights_one_hop,
    random_instance,
)


def yes(*people):
    return {p: Ballot(("yes",)) for p in people}


def engine_weights(participants, raw_edges, voters, config):
    """Run the engine over a raw edge map: override removal then weights."""
    votes = yes(*voters)
    forest = {p: t for p, t in raw_edges.items() if p not in voters}
    return compute_weights(participants, forest, votes, config)


CHAIN = ["alex", "beth", "carlos"]


def chain_delegations(taxonomy_scope=DelegationScope.for_topic("finance")):
    return Delegations(
        [
            Delegation("alex", "beth", taxonomy_scope),
            Delegation("beth", "carlos", taxonomy_scope),
        ]
    )


class TestEffectiveDelegation:
    def test_topic_beats_global(self, taxonomy, open_issue):
        issue = open_issue(topic="finance")
        dset = Delegations(
            [
                Delegation("p", "xavier", DelegationScope.global_()),
                Delegation("p", "yara", DelegationScope.for_topic("finance")),
            ]
        )
        assert effective_delegation("p", issue, dset, taxonomy) == "yara"

    def test_issue_beats_topic_and_global(self, taxonomy, open_issue):
        issue = open_issue(issue_id="iss-7", topic="finance")
        dset = Delegations(
            [
                Delegation("p", "xavier", DelegationScope.global_()),
                Delegation("p", "yara", DelegationScope.for_topic("finance")),
                Delegation("p", "zoe", DelegationScope.for_issue("iss-7")),
            ]
        )
        assert effective_delegation("p", issue, dset, taxonomy) == "zoe"

    def test_topic_delegation_inactive_for_unclassified_issue(self, taxonomy, open_issue):
        issue = open_issue(topic=None)
        dset = Delegations([Delegation("p", "yara", DelegationScope.for_topic("finance"))])
        assert effective_delegation("p", issue, dset, taxonomy) is None

    def test_child_topic_beats_parent_topic(self, taxonomy, open_issue):
        issue = open_issue(topic="budget")
        dset = Delegations(
            [
                Delegation("p", "xavier", DelegationScope.for_topic("finance")),
                Delegation("p", "yara", DelegationScope.for_topic("budget")),
            ]
        )
        assert effective_delegation("p", issue, dset, taxonomy) == "yara"

    def test_grandchild_issue_activates_whole_ancestry(self, taxonomy, open_issue):
        issue = open_issue(topic="capital")
        dset = Delegations(
            [
                Delegation("p", "xavier", DelegationScope.for_topic("finance")),
                Delegation("p", "yara", DelegationScope.for_topic("budget")),
            ]
        )
        assert effective_delegation("p", issue, dset, taxonomy) == "yara"

    def test_issue_scope_only_matches_its_issue(self, taxonomy, open_issue):
        other = open_issue(issue_id="iss-other", topic="finance")
        dset = Delegations([Delegation("p", "zoe", DelegationScope.for_issue("iss-7"))])
        assert effective_delegation("p", other, dset, taxonomy) is None

    def test_total_order_over_scope_combinations(self, taxonomy, open_issue):
        # every non-empty combination of {issue, child topic, parent topic,
        # global} resolves to the most specific member, never a tie branch
        issue = open_issue(issue_id="iss-7", topic="budget")
        ranked = [
            ("issue", DelegationScope.for_issue("iss-7")),
            ("child", DelegationScope.for_topic("budget")),
            ("parent", DelegationScope.for_topic("finance")),
            ("global", DelegationScope.global_()),
        ]
        for mask in range(1, 1 << len(ranked)):
            chosen = [ranked[i] for i in range(len(ranked)) if mask >> i & 1]
            dset = Delegations(
                Delegation("p", f"target-{label}", scope) for label, scope in chosen
            )
            expected = f"target-{chosen[0][0]}"
            assert effective_delegation("p", issue, dset, taxonomy) == expected


class TestBuildForest:
    def test_chain_no_votes(self, taxonomy, transferable_config, open_issue):
        issue = open_issue(topic="finance")
        forest = build_forest(issue, CHAIN, chain_delegations(), {}, taxonomy, transferable_config)
        assert forest == {"alex": "beth", "beth": "carlos"}

    def test_direct_vote_severs_chain(self, taxonomy, transferable_config, open_issue):
        issue = open_issue(topic="finance")
        forest = build_forest(
            issue, CHAIN, chain_delegations(), yes("beth"), taxonomy, transferable_config
        )
        assert forest == {"alex": "beth"}

    def test_all_voting_empties_forest(self, taxonomy, transferable_config, open_issue):
        issue = open_issue(topic="finance")
        forest = build_forest(
            issue, CHAIN, chain_delegations(), yes(*CHAIN), taxonomy, transferable_config
        )
        assert forest == {}

    def test_delegation_disabled_empties_forest(self, taxonomy, open_issue):
        from liquidgov.model import GovernanceConfig

        direct = GovernanceConfig(candidacy_enabled=False, transferability_enabled=False)
        issue = open_issue(topic="finance")
        forest = build_forest(issue, CHAIN, chain_delegations(), {}, taxonomy, direct)
        assert forest == {}


class TestChainWeights:
    """The printed chain scenario matrix for alex -> beth -> carlos."""

    @pytest.mark.parametrize(
        "voters,expected",
        [
            ({"carlos"}, {"alex": 0, "beth": 0, "carlos": 3}),
            ({"beth", "carlos"}, {"alex": 0, "beth": 2, "carlos": 1}),
            ({"alex", "carlos"}, {"alex": 1, "beth": 0, "carlos": 2}),
            ({"alex", "beth", "carlos"}, {"alex": 1, "beth": 1, "carlos": 1}),
        ],
    )
    def test_scenario_matrix(self, transferable_config, voters, expected):
        raw = {"alex": "beth", "beth": "carlos"}
        weights, abstainers = engine_weights(CHAIN, raw, voters, transferable_config)
        assert weights == expected
        assert abstainers == frozenset()

    def test_one_hop_mode_drops_second_hop(self, one_hop_config):
        raw = {"alex": "beth", "beth": "carlos"}
        weights, abstainers = engine_weights(CHAIN, raw, {"carlos"}, one_hop_config)
        assert weights == {"alex": 0, "beth": 0, "carlos": 2}
        assert abstainers == frozenset({"alex"})

    def test_one_hop_mode_direct_delegator_transits(self, one_hop_config):
        raw = {"alex": "beth"}
        weights, abstainers = engine_weights(["alex", "beth"], raw, {"beth"}, one_hop_config)
        assert weights == {"alex": 0, "beth": 2}
        assert abstainers == frozenset()


class TestCycles:
    def test_two_cycle_nobody_votes(self, transferable_config):
        raw = {"a": "b", "b": "a"}
        weights, abstainers = engine_weights(["a", "b"], raw, set(), transferable_config)
        assert weights == {"a": 0, "b": 0}
        assert abstainers == {"a", "b"}

    def test_two_cycle_one_voter_carries_both(self, transferable_config):
        raw = {"a": "b", "b": "a"}
        weights, abstainers = engine_weights(["a", "b"], raw, {"a"}, transferable_config)
        assert weights == {"a": 2, "b": 0}
        assert abstainers == frozenset()

    def test_three_cycle_nobody_votes(self, transferable_config):
        raw = {"a": "b", "b": "c", "c": "a"}
        weights, abstainers = engine_weights(["a", "b", "c"], raw, set(), transferable_config)
        assert abstainers == {"a", "b", "c"}

    @pytest.mark.parametrize("voter", ["a", "b", "c"])
    def test_three_cycle_single_voter_carries_all(self, transferable_config, voter):
        raw = {"a": "b", "b": "c", "c": "a"}
        weights, abstainers = engine_weights(["a", "b", "c"], raw, {voter}, transferable_config)
        assert weights[voter] == 3
        assert abstainers == frozenset()

    def test_chain_feeding_voterless_cycle_abstains(self, transferable_config):
        raw = {"x": "a", "a": "b", "b": "a"}
        weights, abstainers = engine_weights(["x", "a", "b"], raw, set(), transferable_config)
        assert weights == {"x": 0, "a": 0, "b": 0}
        assert abstainers == {"x", "a", "b"}

    def test_isolated_nonvoter_abstains(self, transferable_config):
        weights, abstainers = engine_weights(["a", "b"], {}, {"b"}, transferable_config)
        assert weights == {"a": 0, "b": 1}
        assert abstainers == {"a"}


class TestTally:
    def make_issue(self, options=("yes", "no")):
        return Issue("iss-1", "ev-1", "t", status=IssueStatus.OPEN, options=tuple(options))

    def test_full_chain_meets_quorum(self, transferable_config):
        from liquidgov.model import BallotRules

        rules = BallotRules(quorum=0.5)
        result = tally(
            self.make_issue(),
            {"alex": 0, "beth": 0, "carlos": 3},
            yes("carlos"),
            rules,
            eligible_count=3,
        )
        assert result.option_totals["yes"] == 3
        assert result.quorum_met
        assert result.winner == "yes"

    def test_nobody_votes(self):
        from liquidgov.model import BallotRules

        issue = self.make_issue()
        zero = tally(issue, {"a": 0}, {}, BallotRules(quorum=0.0), eligible_count=1)
        assert zero.quorum_met and zero.outcome == TallyOutcome.NO_VOTES
        some = tally(issue, {"a": 0}, {}, BallotRules(quorum=0.25), eligible_count=1)
        assert not some.quorum_met
        assert all(t == 0 for t in some.option_totals.values())

    def test_plurality_tie_reported(self):
        from liquidgov.model import BallotRules, VotingMethod

        issue = self.make_issue(options=("red", "blue"))
        votes = {"a": Ballot(("red",)), "b": Ballot(("red",)), "c": Ballot(("blue",)), "d": Ballot(("blue",))}
        weights = {p: 1 for p in votes}
        result = tally(issue, weights, votes, BallotRules(method=VotingMethod.PLURALITY), 4)
        assert result.outcome == TallyOutcome.TIED
        assert result.winner is None

    def test_simple_majority_requires_strict_majority(self):
        from liquidgov.model import BallotRules

        issue = self.make_issue(options=("a", "b", "c"))
        votes = {"p1": Ballot(("a",)), "p2": Ballot(("b",)), "p3": Ballot(("c",))}
        weights = {"p1": 2, "p2": 1, "p3": 1}
        result = tally(issue, weights, votes, BallotRules(), 4)
        assert result.outcome == TallyOutcome.NO_MAJORITY
        assert result.winner is None

    def test_approval_credits_each_selection(self):
        from liquidgov.model import BallotRules, VotingMethod

        issue = self.make_issue(options=("a", "b", "c"))
        votes = {"p1": Ballot(("a", "b")), "p2": Ballot(("b",))}
        weights = {"p1": 2, "p2": 1}
        result = tally(issue, weights, votes, BallotRules(method=VotingMethod.APPROVAL), 3)
        assert result.option_totals == {"a": 2, "b": 3, "c": 0}
        assert result.cast_weight == 3
        assert result.winner == "b"

    def test_zero_eligible_is_invalid(self):
        from liquidgov.model import BallotRules

        with pytest.raises(InvalidStateError):
            tally(self.make_issue(), {}, {}, BallotRules(), eligible_count=0)

    def test_unknown_option_rejected(self):
        from liquidgov.model import BallotRules

        with pytest.raises(ValidationError):
            tally(self.make_issue(), {"a": 1}, {"a": Ballot(("maybe",))}, BallotRules(), 1)

    def test_multi_select_outside_approval_rejected(self):
        from liquidgov.model import BallotRules

        with pytest.raises(ValidationError):
            tally(self.make_issue(), {"a": 1}, {"a": Ballot(("yes", "no"))}, BallotRules(), 1)


class TestResolveIssue:
    def test_cancelled_rejected(self, taxonomy, transferable_config):
        issue = Issue("iss-1", "ev-1", "t", status=IssueStatus.CANCELLED)
        with pytest.raises(InvalidStateError):
            resolve_issue(issue, CHAIN, Delegations(), {}, taxonomy, transferable_config)

    def test_draft_rejected(self, taxonomy, transferable_config):
        issue = Issue("iss-1", "ev-1", "t", status=IssueStatus.DRAFT)
        with pytest.raises(InvalidStateError):
            resolve_issue(issue, CHAIN, Delegations(), {}, taxonomy, transferable_config)

    def test_empty_org_empty_tally(self, taxonomy, transferable_config, open_issue):
        result = resolve_issue(open_issue(), [], Delegations(), {}, taxonomy, transferable_config)
        assert result.cast_weight == 0
        assert result.outcome == TallyOutcome.NO_VOTES
        assert result.quorum_met  # quorum 0

    def test_deterministic(self, taxonomy, transferable_config, open_issue):
        issue = open_issue(topic="finance")
        votes = yes("carlos")
        first = resolve_issue(
            issue, CHAIN, chain_delegations(), votes, taxonomy, transferable_config
        )
        second = resolve_issue(
            issue, CHAIN, chain_delegations(), votes, taxonomy, transferable_config
        )
        assert first.to_dict() == second.to_dict()

    def test_end_to_end_chain(self, taxonomy, transferable_config, open_issue):
        issue = open_issue(topic="finance")
        result = resolve_issue(
            issue, CHAIN, chain_delegations(), yes("carlos"), taxonomy, transferable_config
        )
        assert result.weights == {"alex": 0, "beth": 0, "carlos": 3}
        assert result.option_totals["yes"] == 3

    def test_closed_issue_resolvable(self, taxonomy, transferable_config):
        issue = Issue("iss-1", "ev-1", "t", topic="finance", status=IssueStatus.CLOSED)
        result = resolve_issue(
            issue, CHAIN, chain_delegations(), yes("carlos"), taxonomy, transferable_config
        )
        assert result.weights["carlos"] == 3


class TestOracleAgreement:
    def test_exhaustive_small(self, transferable_config):
        participants = ["p0", "p1", "p2"]
        for raw in all_functional_graphs(participants):
            for voters in all_vote_subsets(participants):
                got_w, got_a = engine_weights(participants, raw, voters, transferable_config)
                exp_w, exp_a = oracle_weights(participants, raw, voters)
                assert got_w == exp_w, (raw, voters)
                assert got_a == exp_a, (raw, voters)

    def test_random_medium(self, transferable_config):
        rng = random.Random(20260822)
        for _ in range(200):
            participants, raw, voters = random_instance(rng, 40)
            got_w, got_a = engine_weights(participants, raw, voters, transferable_config)
            exp_w, exp_a = oracle_weights(participants, raw, voters)
            assert got_w == exp_w
            assert got_a == exp_a

    def test_random_one_hop(self, one_hop_config):
        rng = random.Random(5)
        for _ in range(200):
            participants, raw, voters = random_instance(rng, 30)
            got_w, got_a = engine_weights(participants, raw, voters, one_hop_config)
            exp_w, exp_a = oracle_weights_one_hop(participants, raw, voters)
            assert got_w == exp_w
            assert got_a == exp_a

    def test_long_chain_does_not_recurse(self, transferable_config):
        # 50k-node path would blow the default recursion limit if traversal
        # were recursive
        n = 50_000
        participants = [f"p{i}" for i in range(n)]
        raw = {f"p{i}": f"p{i + 1}" for i in range(n - 1)}
        weights, abstainers = engine_weights(
            participants, raw, {f"p{n - 1}"}, transferable_config
        )
        assert weights[f"p{n - 1}"] == n
        assert not abstainers


class TestProperties:
    def test_sovereignty(self, transferable_config):
        rng = random.Random(99)
        for _ in range(100):
            participants, raw, voters = random_instance(rng, 12)
            extra = participants[rng.randrange(len(participants))]
            voters = voters | {extra}
            weights, abstainers = engine_weights(participants, raw, voters, transferable_config)
            assert weights[extra] >= 1
            assert extra not in abstainers

    def test_conservation(self, transferable_config, one_hop_config):
        rng = random.Random(123)
        for config in (transferable_config, one_hop_config):
            for _ in range(100):
                participants, raw, voters = random_instance(rng, 15)
                weights, abstainers = engine_weights(participants, raw, voters, config)
                assert sum(weights.values()) + len(abstainers) == len(participants)
                assert sum(weights.values()) <= len(participants)

    def test_forest_property(self, taxonomy, transferable_config, open_issue):
        # after override removal every node has out-degree <= 1 and voters 0
        rng = random.Random(3)
        issue = open_issue(topic="finance")
        people = [f"p{i}" for i in range(10)]
        for _ in range(50):
            dset = Delegations()
            for p in people:
                if rng.random() < 0.7:
                    target = rng.choice([q for q in people if q != p])
                    kind = rng.random()
                    if kind < 0.4:
                        scope = DelegationScope.global_()
                    elif kind < 0.8:
                        scope = DelegationScope.for_topic(rng.choice(["finance", "budget"]))
                    else:
                        scope = DelegationScope.for_issue(issue.id)
                    dset = dset.upsert(Delegation(p, target, scope))
            votes = yes(*[p for p in people if rng.random() < 0.3])
            forest = build_forest(issue, people, dset, votes, taxonomy, transferable_config)
            assert all(p not in votes for p in forest)
            # mapping keys are unique by construction: out-degree <= 1
