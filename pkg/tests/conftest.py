from __future__ import annotations

import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from liquidgov.model import (
    Delegation,
    DelegationScope,
    Delegations,
    GovernanceConfig,
    Issue,
    IssueStatus,
    Taxonomy,
    Topic,
)


@pytest.fixture
def taxonomy():
    """Three-level fixture taxonomy: finance > budget > capital, plus education."""
    return Taxonomy(
        [
            Topic("finance", "Finance"),
            Topic("budget", "Budget", parent="finance"),
            Topic("capital", "Capital projects", parent="budget"),
            Topic("education", "Education"),
        ]
    )


@pytest.fixture
def transferable_config():
    return GovernanceConfig(candidacy_enabled=True, transferability_enabled=True)


@pytest.fixture
def one_hop_config():
    return GovernanceConfig(candidacy_enabled=True, transferability_enabled=False)


@pytest.fixture
def open_issue():
    def make(issue_id="iss-1", topic=None, options=("yes", "no")):
        return Issue(
            id=issue_id,
            event_id="ev-1",
            title="Fixture issue",
            topic=topic,
            status=IssueStatus.OPEN,
            options=tuple(options),
        )

    return make


def delegation_set(*triples) -> Delegations:
    """Build a delegation set from (source, target, scope) triples."""
    return Delegations(Delegation(s, t, scope) for s, t, scope in triples)


@pytest.fixture
def make_delegations():
    return delegation_set


@pytest.fixture
def topic_scope():
    return DelegationScope.for_topic


@pytest.fixture
def issue_scope():
    return DelegationScope.for_issue


@pytest.fixture
def global_scope():
    return DelegationScope.global_()
