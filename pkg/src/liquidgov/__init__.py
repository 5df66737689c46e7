"""Configurable liquid-democracy governance engine.

Library layout:

- ``model``          core domain types and configuration
- ``presets``        the six named governance presets
- ``resolution``     per-issue delegation resolution and tallying
- ``events``         append-only hash-chained event log
- ``state``          materialized state: validation and replay fold
- ``store``          single-writer organization store (log + state)
- ``lifecycle``      voting events, booklets, candidacies
- ``accountability`` predictions, surveys, community notes
- ``awareness``      chains, concentration, harvesting, track records
- ``service``        HTTP/JSON gateway
- ``cli``            admin command line
"""

__version__ = "0.1.0"

from .model import (
    AuthorizationError,
    BallotRules,
    Delegation,
    DelegationScope,
    Delegations,
    FeatureDisabledError,
    FeatureToggles,
    GovernanceConfig,
    InvalidStateError,
    Issue,
    IssueStatus,
    NotFoundError,
    Participant,
    ScopeKind,
    Taxonomy,
    Thresholds,
    TimelineRules,
    Topic,
    ValidationError,
    validate_config,
)
from .presets import apply_preset, load_presets
from .resolution import (
    Ballot,
    ResolvedTally,
    TallyOutcome,
    build_forest,
    compute_weights,
    effective_delegation,
    resolve_issue,
    tally,
    unit_attribution,
)
from .events import Event, EventKind, IntegrityError, LogFile, verify_chain
from .state import State, replay
from .store import OrgStore

__all__ = [name for name in dir() if not name.startswith("_")]
