from __future__ import annotations

import itertools

import pytest

from liquidgov.model import (
    Delegation,
    DelegationScope,
    Delegations,
    GovernanceConfig,
    NotFoundError,
    Taxonomy,
    Topic,
    ValidationError,
    revoke_delegation,
    topic_is_or_descends_from,
    upsert_delegation,
)
from liquidgov.presets import PRESET_NAMES, QUADRANTS, apply_preset, preset_quadrant
from liquidgov.model import validate_config


class TestTaxonomy:
    def test_reflexive(self, taxonomy):
        assert topic_is_or_descends_from("budget", "budget", taxonomy)

    def test_direct_edge(self, taxonomy):
        assert topic_is_or_descends_from("budget", "finance", taxonomy)

    def test_ancestor_relation_matches_path_enumeration(self, taxonomy):
        # oracle: the relation holds iff the ancestor appears on the candidate's
        # root path, recomputed here by walking parent pointers directly
        parents = {t.id: t.parent for t in taxonomy}

        def walk_path(topic_id):
            path = []
            while topic_id is not None:
                path.append(topic_id)
                topic_id = parents[topic_id]
            return set(path)

        for candidate, ancestor in itertools.product(parents, parents):
            expected = ancestor in walk_path(candidate)
            assert topic_is_or_descends_from(candidate, ancestor, taxonomy) == expected

    def test_parent_does_not_descend_from_child(self, taxonomy):
        assert not topic_is_or_descends_from("finance", "budget", taxonomy)

    def test_unknown_topic_raises(self, taxonomy):
        with pytest.raises(NotFoundError):
            topic_is_or_descends_from("nope", "finance", taxonomy)
        with pytest.raises(NotFoundError):
            topic_is_or_descends_from("finance", "nope", taxonomy)

    def test_duplicate_id_rejected(self, taxonomy):
        with pytest.raises(ValidationError):
            taxonomy.add(Topic("finance", "Finance again"))

    def test_unknown_parent_rejected(self):
        with pytest.raises(NotFoundError):
            Taxonomy([Topic("a", "A", parent="missing")])

    def test_topological_order_parents_first(self, taxonomy):
        order = taxonomy.topological_order()
        position = {t: i for i, t in enumerate(order)}
        for topic in taxonomy:
            if topic.parent is not None:
                assert position[topic.parent] < position[topic.id]

    def test_root_path_unique_prefix(self, taxonomy):
        assert taxonomy.root_path("capital") == ("finance", "budget", "capital")


class TestDelegationSet:
    def test_insert_into_empty(self):
        d = Delegation("alice", "bob", DelegationScope.for_topic("education"))
        out = upsert_delegation(d, Delegations())
        assert list(out) == [d]

    def test_same_scope_replaces(self):
        edu = DelegationScope.for_topic("education")
        first = Delegation("alice", "bob", edu)
        second = Delegation("alice", "carol", edu)
        out = upsert_delegation(second, Delegations([first]))
        assert list(out) == [second]

    def test_different_scopes_coexist(self):
        edu = Delegation("alice", "bob", DelegationScope.for_topic("education"))
        glob = Delegation("alice", "carol", DelegationScope.global_())
        out = upsert_delegation(glob, Delegations([edu]))
        # uniqueness binds per (source, scope) key only
        keys = {(d.source,) + d.scope.key for d in out}
        assert len(keys) == 2
        assert set(out) == {edu, glob}

    def test_self_delegation_rejected(self):
        with pytest.raises(ValidationError):
            Delegation("alice", "alice", DelegationScope.global_())

    def test_revoke_only_delegation(self):
        edu = DelegationScope.for_topic("education")
        dset = Delegations([Delegation("alice", "bob", edu)])
        assert len(revoke_delegation("alice", edu, dset)) == 0

    def test_revoke_topic_scoped_keeps_global(self):
        edu = DelegationScope.for_topic("education")
        glob = DelegationScope.global_()
        dset = Delegations(
            [Delegation("alice", "bob", edu), Delegation("alice", "carol", glob)]
        )
        out = revoke_delegation("alice", edu, dset)
        assert [d.scope for d in out] == [glob]

    def test_revoke_missing_raises(self):
        with pytest.raises(NotFoundError):
            revoke_delegation("alice", DelegationScope.global_(), Delegations())

    def test_uniqueness_after_any_sequence(self):
        # property: after arbitrary upsert/revoke interleavings, at most one
        # delegation per (source, scope)
        import random

        rng = random.Random(7)
        scopes = [
            DelegationScope.global_(),
            DelegationScope.for_topic("finance"),
            DelegationScope.for_issue("iss-1"),
        ]
        people = ["a", "b", "c", "d"]
        dset = Delegations()
        for _ in range(300):
            src = rng.choice(people)
            scope = rng.choice(scopes)
            if rng.random() < 0.7:
                tgt = rng.choice([p for p in people if p != src])
                dset = dset.upsert(Delegation(src, tgt, scope))
            else:
                try:
                    dset = dset.revoke(src, scope)
                except NotFoundError:
                    pass
            keys = [(d.source,) + d.scope.key for d in dset]
            assert len(keys) == len(set(keys))


class TestScope:
    def test_payload_must_match_kind(self):
        with pytest.raises(ValidationError):
            DelegationScope(kind="global", topic="finance")  # type: ignore[arg-type]
        with pytest.raises(ValidationError):
            DelegationScope(kind="topic")  # type: ignore[arg-type]
        with pytest.raises(ValidationError):
            DelegationScope(kind="issue", topic="finance", issue="i")  # type: ignore[arg-type]

    def test_round_trips_through_dict(self):
        for scope in (
            DelegationScope.global_(),
            DelegationScope.for_topic("finance"),
            DelegationScope.for_issue("iss-9"),
        ):
            assert DelegationScope.from_dict(scope.to_dict()) == scope


class TestPresets:
    def test_direct_democracy_axes(self):
        config = apply_preset("direct_democracy")
        assert not config.candidacy_enabled
        assert not config.transferability_enabled
        assert not config.delegation_enabled

    def test_representative_axes(self):
        config = apply_preset("representative")
        assert config.candidacy_enabled
        assert not config.transferability_enabled
        assert config.ballot.quorum == 0.5

    def test_liquid_delegation_full_composition(self):
        config = apply_preset("liquid_delegation")
        assert config.candidacy_enabled and config.transferability_enabled
        f = config.features
        assert f.booklet and f.community_notes and f.predictions and f.surveys and f.awareness

    @pytest.mark.parametrize("name", PRESET_NAMES)
    def test_every_preset_validates(self, name):
        assert validate_config(apply_preset(name)) == []

    @pytest.mark.parametrize("name", PRESET_NAMES)
    def test_preset_lands_in_documented_quadrant(self, name):
        config = apply_preset(name)
        axes = (config.candidacy_enabled, config.transferability_enabled)
        assert QUADRANTS[axes] == preset_quadrant(name)

    def test_unknown_preset(self):
        with pytest.raises(NotFoundError):
            apply_preset("anarcho_syndicalist_commune")

    def test_civic_participatory_timeline(self):
        t = apply_preset("civic_participatory").timeline
        assert (t.deliberation, t.curation, t.voting) == (28, 7, 14)


class TestValidateConfig:
    def test_predictions_required_implies_predictions(self):
        config = apply_preset("liquid_delegation")
        broken = GovernanceConfig(
            candidacy_enabled=True,
            transferability_enabled=True,
            ballot=config.ballot,
            features=config.features.__class__(predictions=False, predictions_required=True),
            timeline=config.timeline,
        )
        assert any("predictions_required" in v for v in validate_config(broken))

    def test_quorum_out_of_range(self):
        config = apply_preset("direct_democracy")
        broken = GovernanceConfig(
            candidacy_enabled=False,
            transferability_enabled=False,
            ballot=config.ballot.__class__(quorum=1.2),
        )
        assert any("quorum" in v for v in validate_config(broken))

    def test_voting_period_must_be_positive(self):
        config = apply_preset("direct_democracy")
        broken = GovernanceConfig(
            candidacy_enabled=False,
            transferability_enabled=False,
            timeline=config.timeline.__class__(voting=0),
        )
        assert any("voting" in v for v in validate_config(broken))

    def test_returns_violations_never_raises(self):
        config = GovernanceConfig(
            candidacy_enabled=False,
            transferability_enabled=False,
            ballot=apply_preset("direct_democracy").ballot.__class__(quorum=-3.0),
            timeline=apply_preset("direct_democracy").timeline.__class__(deliberation=-1, voting=0),
        )
        violations = validate_config(config)
        assert len(violations) >= 2
