"""HTTP gateway: the /v1 API every front end shares.

Thin by design: requests are authenticated, bound to a participant identity,
and turned into events appended through the same fold the library exposes, so
no rule lives only here. Responses are plain JSON projections of state.

Identity is a bearer token minted when a participant joins through an
invitation (or bootstrapped by org creation). Tokens and open invitations are
gateway-side data, stored next to the log in ``gateway.json``; they are not
events because they are not governance history.

Ballot secrecy at this layer is access control: handlers refuse to serve what
the viewer may not see. The log itself is not encrypted.
"""

from __future__ import annotations

import json
import secrets
import threading
from pathlib import Path
from typing import Optional

from fastapi import APIRouter, FastAPI, Header, Request
from fastapi.responses import JSONResponse, PlainTextResponse
from pydantic import BaseModel, ConfigDict, Field

from . import __version__
from .accountability import (
    bridging_visibility,
    export_survey_responses,
    notes_for_target,
    prediction_registry,
    survey_results,
    trend_series,
)
from .awareness import (
    concentration_report,
    detect_harvesting,
    engagement_prompt,
    resolve_chain,
    track_record,
    voting_history,
)
from .events import EventKind, IntegrityError
from .lifecycle import booklet_status, can_open_issue, results_visible, visible_ballot
from .model import (
    AuthorizationError,
    FeatureDisabledError,
    InvalidStateError,
    NotFoundError,
    ValidationError,
)
from .presets import PRESET_NAMES, apply_preset, load_presets, preset_quadrant
from .store import OrgStore


class AuthError(Exception):
    """Missing or unrecognized credentials (401, unlike 403's known-but-denied)."""


# ---------------------------------------------------------------------------
# gateway state


class Gateway:
    def __init__(self, root: str | Path, fsync: bool = True):
        self.root = Path(root)
        self.root.mkdir(parents=True, exist_ok=True)
        self.fsync = fsync
        self._stores: dict[str, OrgStore] = {}
        self._lock = threading.Lock()

    def org_dir(self, org: str) -> Path:
        if not org or "/" in org or org.startswith("."):
            raise ValidationError(f"invalid org id {org!r}")
        return self.root / org

    def has_org(self, org: str) -> bool:
        return (self.org_dir(org) / "events.log").exists()

    def store(self, org: str) -> OrgStore:
        with self._lock:
            st = self._stores.get(org)
            if st is None:
                if not self.has_org(org):
                    raise NotFoundError(f"unknown org {org!r}")
                st = OrgStore(self.org_dir(org), fsync=self.fsync)
                self._stores[org] = st
            return st

    def create_store(self, org: str) -> OrgStore:
        with self._lock:
            if self.has_org(org) or org in self._stores:
                raise InvalidStateError(f"org {org!r} already exists")
            st = OrgStore(self.org_dir(org), org=org, fsync=self.fsync)
            self._stores[org] = st
            return st

    # -- sidecar (tokens, invitations, idempotency records) ----------------

    def _sidecar_path(self, org: str) -> Path:
        return self.org_dir(org) / "gateway.json"

    def sidecar(self, org: str) -> dict:
        path = self._sidecar_path(org)
        if path.exists():
            return json.loads(path.read_text())
        return {"sessions": {}, "invitations": {}, "requests": {}}

    def save_sidecar(self, org: str, data: dict) -> None:
        path = self._sidecar_path(org)
        tmp = path.with_suffix(".json.tmp")
        tmp.write_text(json.dumps(data))
        tmp.replace(path)

    def mint_session(self, org: str, participant: str) -> str:
        token = secrets.token_hex(16)
        side = self.sidecar(org)
        side["sessions"][token] = participant
        self.save_sidecar(org, side)
        return token

    def mint_invitation(self, org: str, roles: list[str], invited_by: str) -> str:
        token = secrets.token_hex(16)
        side = self.sidecar(org)
        side["invitations"][token] = {"roles": roles, "invited_by": invited_by, "used_by": None}
        self.save_sidecar(org, side)
        return token

    def identity(self, org: str, authorization: Optional[str]) -> str:
        if not authorization or not authorization.startswith("Bearer "):
            raise AuthError("missing bearer token")
        token = authorization.removeprefix("Bearer ").strip()
        participant = self.sidecar(org).get("sessions", {}).get(token)
        if participant is None:
            raise AuthError("unrecognized token")
        return participant

    # -- idempotent retries -------------------------------------------------

    def recorded_response(self, org: str, request_id: Optional[str]) -> Optional[dict]:
        if not request_id:
            return None
        return self.sidecar(org).get("requests", {}).get(request_id)

    def record_response(self, org: str, request_id: Optional[str], status: int, body) -> None:
        if not request_id:
            return
        side = self.sidecar(org)
        side.setdefault("requests", {})[request_id] = {"status": status, "body": body}
        self.save_sidecar(org, side)


# ---------------------------------------------------------------------------
# request bodies


class _Body(BaseModel):
    model_config = ConfigDict(extra="forbid")


class FounderBody(_Body):
    participant: str
    display_name: str


class CreateOrgBody(_Body):
    org: str
    preset: Optional[str] = None
    config: Optional[dict] = None
    topics: list[dict] = Field(default_factory=list)
    founder: FounderBody


class ConfigBody(_Body):
    config: Optional[dict] = None
    preset: Optional[str] = None
    topics: Optional[list[dict]] = None


class InvitationBody(_Body):
    roles: list[str] = Field(default_factory=list)


class JoinBody(_Body):
    invitation: str
    participant: str
    display_name: str


class DelegationBody(_Body):
    source: str
    target: str
    scope: dict


class RevokeBody(_Body):
    source: str
    scope: dict


class EventBody(_Body):
    event: str
    title: str
    timeline: Optional[dict] = None


class IssueBody(_Body):
    issue: str
    event: str
    title: str
    topic: Optional[str] = None
    options: Optional[list[str]] = None


class AdvanceBody(_Body):
    phase: str


class CancelBody(_Body):
    reason: str


class SectionBody(_Body):
    section: str
    content: str


class ProposalBody(_Body):
    proposal: str
    issue: str
    text: str


class CandidacyBody(_Body):
    claims: list[dict]
    scopes: Optional[list[dict]] = None
    vote_transparency_opt_in: bool = False


class VoteBody(_Body):
    options: list[str]


class PredictionBody(_Body):
    prediction: str
    proposal: str
    variable: str
    direction: str
    magnitude: dict
    timeframe: str
    methodology: Optional[str] = None


class EvaluationBody(_Body):
    assessments: list[dict]
    evidence: list[dict]


class SurveyBody(_Body):
    instance: str
    series: str
    questions: list[dict]
    opens: str
    closes: str


class SurveyResponseBody(_Body):
    answers: dict


class NoteBody(_Body):
    note: str
    attached_to: dict
    body: str


class RatingBody(_Body):
    rating: str
    stance: str


# ---------------------------------------------------------------------------
# projections


def _issue_view(state, iid: str) -> dict:
    issue = state.issues[iid]
    return {
        "issue": iid,
        "event": issue.event_id,
        "title": issue.title,
        "topic": issue.topic,
        "status": issue.status.value,
        "options": list(issue.options),
    }


def _event_view(ev) -> dict:
    return {
        "event": ev.id,
        "title": ev.title,
        "phase": ev.phase,
        "created_by": ev.created_by,
        "created_at": ev.created_at,
        "timeline": {
            "deliberation_days": ev.deliberation_days,
            "curation_days": ev.curation_days,
            "voting_days": ev.voting_days,
        },
        "issues": list(ev.issues),
    }


def _booklet_view(state, iid: str) -> dict:
    booklet = state.booklets.get(iid)
    if booklet is None:
        raise NotFoundError(f"unknown issue {iid!r}")
    proposals = [
        {"proposal": p.id, "text": p.text, "proponent": p.proponent, "status": p.status}
        for p in sorted(state.proposals.values(), key=lambda p: p.submitted_at)
        if p.issue == iid
    ]
    predictions = [
        row
        for row in prediction_registry(state)
        if row["issue"] == iid
    ]
    args = lambda entries: [
        {"author": a.author, "content": a.content, "at": a.at} for a in entries
    ]
    return {
        "issue": iid,
        "official_description": booklet.official_description,
        "proposals": proposals,
        "supporting_arguments": args(booklet.supporting_arguments),
        "opposing_arguments": args(booklet.opposing_arguments),
        "predictions": predictions,
        "state_of_affairs": booklet.state_of_affairs,
        "status": booklet_status(state, iid),
    }


# ---------------------------------------------------------------------------
# app factory


def create_app(data_dir: str | Path, fsync: bool = True) -> FastAPI:
    gateway = Gateway(data_dir, fsync=fsync)
    app = FastAPI(title="governance engine", version=__version__)
    app.state.gateway = gateway
    v1 = APIRouter(prefix="/v1")

    # -- error mapping ------------------------------------------------------

    def _handler(status: int):
        def handle(request: Request, exc: Exception):
            return JSONResponse(status_code=status, content={"error": str(exc)})

        return handle

    app.add_exception_handler(AuthError, _handler(401))
    app.add_exception_handler(AuthorizationError, _handler(403))
    app.add_exception_handler(NotFoundError, _handler(404))
    app.add_exception_handler(FeatureDisabledError, _handler(409))
    app.add_exception_handler(InvalidStateError, _handler(409))
    app.add_exception_handler(ValidationError, _handler(422))
    app.add_exception_handler(IntegrityError, _handler(500))

    # -- helpers ------------------------------------------------------------

    def auth(org: str, authorization: Optional[str]) -> str:
        return gateway.identity(org, authorization)

    def must_match(identity: str, claimed: str, field: str) -> None:
        if identity != claimed:
            raise AuthorizationError(
                f"authenticated as {identity!r}; cannot act as {field} {claimed!r}"
            )

    def idempotent(org: str, request_id: Optional[str], fn):
        recorded = gateway.recorded_response(org, request_id)
        if recorded is not None:
            return JSONResponse(status_code=recorded["status"], content=recorded["body"])
        body = fn()
        gateway.record_response(org, request_id, 200, body)
        return JSONResponse(status_code=200, content=body)

    # -- meta ---------------------------------------------------------------

    @v1.get("/health")
    def health():
        return {"status": "ok"}

    @v1.get("/version")
    def version():
        return {"name": "liquidgov", "version": __version__}

    @v1.get("/presets")
    def presets():
        docs = load_presets()
        return {
            "presets": [
                {
                    "name": name,
                    "quadrant": preset_quadrant(name),
                    "description": doc.get("description", ""),
                }
                for name, doc in docs.items()
            ]
        }

    # -- orgs ---------------------------------------------------------------

    @v1.post("/orgs")
    def create_org(body: CreateOrgBody):
        if body.config is None and body.preset is None:
            raise ValidationError("provide a preset name or a full config")
        if body.config is not None and body.preset is not None:
            raise ValidationError("provide either a preset or a config, not both")
        if body.preset is not None and body.preset not in PRESET_NAMES:
            raise NotFoundError(f"unknown preset {body.preset!r}")
        config = body.config if body.config is not None else apply_preset(body.preset).to_dict()
        store = gateway.create_store(body.org)
        store.append(EventKind.CONFIG_SET, {"config": config, "topics": body.topics})
        store.append(
            EventKind.PARTICIPANT_JOINED,
            {
                "participant": body.founder.participant,
                "display_name": body.founder.display_name,
                "roles": ["administrator", "proponent"],
            },
        )
        token = gateway.mint_session(body.org, body.founder.participant)
        return {"org": body.org, "founder": body.founder.participant, "token": token}

    @v1.get("/orgs/{org}")
    def org_summary(org: str):
        state = gateway.store(org).state
        return {
            "org": org,
            "seq": state.seq,
            "participants": len(state.participants),
            "config": state.config.to_dict() if state.config else None,
            "topics": [
                {"id": t.id, "name": t.name, "parent": t.parent}
                for t in sorted(state.taxonomy, key=lambda t: t.id)
            ],
            "voting_events": sorted(state.voting_events),
            "issues": sorted(state.issues),
        }

    @v1.put("/orgs/{org}/config")
    def set_config(org: str, body: ConfigBody, authorization: Optional[str] = Header(None)):
        identity = auth(org, authorization)
        if (body.config is None) == (body.preset is None):
            raise ValidationError("provide either a preset or a config, not both")
        if body.preset is not None:
            if body.preset not in PRESET_NAMES:
                raise NotFoundError(f"unknown preset {body.preset!r}")
            config = apply_preset(body.preset).to_dict()
        else:
            config = body.config
        payload = {"config": config, "actor": identity}
        if body.topics is not None:
            payload["topics"] = body.topics
        gateway.store(org).append(EventKind.CONFIG_SET, payload)
        return {"org": org, "config": config}

    @v1.get("/orgs/{org}/verify")
    def verify(org: str):
        bad = gateway.store(org).verify()
        return {"ok": bad is None, "first_bad_seq": bad}

    @v1.get("/orgs/{org}/export")
    def export(org: str):
        store = gateway.store(org)
        out = gateway.org_dir(org) / "export.jsonl"
        store.export_jsonl(out)
        return PlainTextResponse(out.read_text(), media_type="application/x-ndjson")

    # -- membership ---------------------------------------------------------

    @v1.post("/orgs/{org}/invitations")
    def invite(org: str, body: InvitationBody, authorization: Optional[str] = Header(None)):
        identity = auth(org, authorization)
        state = gateway.store(org).state
        if not state.has_role(identity, "administrator"):
            raise AuthorizationError("only administrators issue invitations")
        bad = [r for r in body.roles if r not in ("administrator", "proponent")]
        if bad:
            raise ValidationError(f"unknown roles {bad}")
        token = gateway.mint_invitation(org, body.roles, identity)
        return {"invitation": token, "roles": body.roles}

    @v1.post("/orgs/{org}/participants")
    def join(org: str, body: JoinBody, x_request_id: Optional[str] = Header(None)):
        store = gateway.store(org)

        def run():
            side = gateway.sidecar(org)
            inv = side.get("invitations", {}).get(body.invitation)
            if inv is None:
                raise AuthError("unknown invitation")
            if inv["used_by"] is not None:
                raise InvalidStateError("invitation already used")
            store.append(
                EventKind.PARTICIPANT_JOINED,
                {
                    "participant": body.participant,
                    "display_name": body.display_name,
                    "roles": inv["roles"],
                    "invited_by": inv["invited_by"],
                },
            )
            side = gateway.sidecar(org)
            side["invitations"][body.invitation]["used_by"] = body.participant
            gateway.save_sidecar(org, side)
            token = gateway.mint_session(org, body.participant)
            return {"org": org, "participant": body.participant, "token": token}

        return idempotent(org, x_request_id, run)

    @v1.get("/orgs/{org}/participants")
    def participants(org: str):
        state = gateway.store(org).state
        return {
            "participants": [
                {
                    "participant": pid,
                    "display_name": p.display_name,
                    "joined_at": p.joined_at,
                    "roles": sorted(state.roles.get(pid, ())),
                }
                for pid, p in sorted(state.participants.items())
            ]
        }

    # -- delegations --------------------------------------------------------

    @v1.put("/orgs/{org}/delegations")
    def upsert_delegation(
        org: str,
        body: DelegationBody,
        authorization: Optional[str] = Header(None),
        x_request_id: Optional[str] = Header(None),
    ):
        identity = auth(org, authorization)
        must_match(identity, body.source, "delegation source")

        def run():
            gateway.store(org).append(
                EventKind.DELEGATION_UPSERTED,
                {"source": body.source, "target": body.target, "scope": body.scope},
            )
            return {"source": body.source, "target": body.target, "scope": body.scope}

        return idempotent(org, x_request_id, run)

    @v1.delete("/orgs/{org}/delegations")
    def revoke_delegation(
        org: str,
        body: RevokeBody,
        authorization: Optional[str] = Header(None),
        x_request_id: Optional[str] = Header(None),
    ):
        identity = auth(org, authorization)
        must_match(identity, body.source, "delegation source")

        def run():
            gateway.store(org).append(
                EventKind.DELEGATION_REVOKED, {"source": body.source, "scope": body.scope}
            )
            return {"source": body.source, "scope": body.scope, "revoked": True}

        return idempotent(org, x_request_id, run)

    @v1.get("/orgs/{org}/delegations")
    def list_delegations(org: str, participant: Optional[str] = None):
        state = gateway.store(org).state
        rows = [
            {"source": d.source, "target": d.target, "scope": d.scope.to_dict(), "created_at": d.created_at}
            for d in sorted(
                state.delegations,
                key=lambda d: (d.source, d.scope.kind.value, d.scope.topic or "", d.scope.issue or ""),
            )
            if participant is None or d.source == participant
        ]
        return {"delegations": rows}

    # -- voting events and issues -------------------------------------------

    @v1.post("/orgs/{org}/events")
    def create_event(org: str, body: EventBody, authorization: Optional[str] = Header(None)):
        identity = auth(org, authorization)
        payload = {"event": body.event, "title": body.title, "actor": identity}
        if body.timeline is not None:
            payload["timeline"] = body.timeline
        gateway.store(org).append(EventKind.EVENT_CREATED, payload)
        return _event_view(gateway.store(org).state.voting_events[body.event])

    @v1.get("/orgs/{org}/events")
    def list_events(org: str):
        state = gateway.store(org).state
        return {"events": [_event_view(ev) for _, ev in sorted(state.voting_events.items())]}

    @v1.post("/orgs/{org}/events/{eid}/advance")
    def advance_event(org: str, eid: str, body: AdvanceBody, authorization: Optional[str] = Header(None)):
        identity = auth(org, authorization)
        gateway.store(org).append(
            EventKind.PHASE_ADVANCED,
            {"scope": "event", "id": eid, "phase": body.phase, "actor": identity},
        )
        return _event_view(gateway.store(org).state.voting_events[eid])

    @v1.post("/orgs/{org}/issues")
    def add_issue(org: str, body: IssueBody, authorization: Optional[str] = Header(None)):
        identity = auth(org, authorization)
        payload = {"issue": body.issue, "event": body.event, "title": body.title, "actor": identity}
        if body.topic is not None:
            payload["topic"] = body.topic
        if body.options is not None:
            payload["options"] = body.options
        gateway.store(org).append(EventKind.ISSUE_ADDED, payload)
        return _issue_view(gateway.store(org).state, body.issue)

    @v1.get("/orgs/{org}/issues")
    def list_issues(org: str):
        state = gateway.store(org).state
        return {"issues": [_issue_view(state, iid) for iid in sorted(state.issues)]}

    @v1.get("/orgs/{org}/issues/{iid}")
    def get_issue(org: str, iid: str):
        state = gateway.store(org).state
        if iid not in state.issues:
            raise NotFoundError(f"unknown issue {iid!r}")
        view = _issue_view(state, iid)
        ok, reasons = can_open_issue(state, iid)
        view["can_open"] = ok
        view["open_blockers"] = reasons
        return view

    @v1.post("/orgs/{org}/issues/{iid}/advance")
    def advance_issue(org: str, iid: str, body: AdvanceBody, authorization: Optional[str] = Header(None)):
        identity = auth(org, authorization)
        gateway.store(org).append(
            EventKind.PHASE_ADVANCED,
            {"scope": "issue", "id": iid, "phase": body.phase, "actor": identity},
        )
        return _issue_view(gateway.store(org).state, iid)

    @v1.post("/orgs/{org}/issues/{iid}/cancel")
    def cancel_issue(org: str, iid: str, body: CancelBody, authorization: Optional[str] = Header(None)):
        identity = auth(org, authorization)
        gateway.store(org).append(
            EventKind.ISSUE_CANCELLED, {"issue": iid, "reason": body.reason, "actor": identity}
        )
        return _issue_view(gateway.store(org).state, iid)

    # -- booklet, proposals, candidacy --------------------------------------

    @v1.get("/orgs/{org}/issues/{iid}/booklet")
    def booklet(org: str, iid: str):
        return _booklet_view(gateway.store(org).state, iid)

    @v1.put("/orgs/{org}/issues/{iid}/booklet")
    def set_section(org: str, iid: str, body: SectionBody, authorization: Optional[str] = Header(None)):
        identity = auth(org, authorization)
        gateway.store(org).append(
            EventKind.BOOKLET_SECTION_SET,
            {"issue": iid, "section": body.section, "content": body.content, "author": identity},
        )
        return _booklet_view(gateway.store(org).state, iid)

    @v1.post("/orgs/{org}/proposals")
    def submit_proposal(org: str, body: ProposalBody, authorization: Optional[str] = Header(None)):
        identity = auth(org, authorization)
        gateway.store(org).append(
            EventKind.PROPOSAL_SUBMITTED,
            {"proposal": body.proposal, "issue": body.issue, "text": body.text, "proponent": identity},
        )
        return {"proposal": body.proposal, "issue": body.issue, "proponent": identity}

    @v1.post("/orgs/{org}/candidacies")
    def publish_candidacy(org: str, body: CandidacyBody, authorization: Optional[str] = Header(None)):
        identity = auth(org, authorization)
        store = gateway.store(org)
        payload = {"candidate": identity, "claims": body.claims}
        if body.scopes is not None:
            payload["scopes"] = body.scopes
        if body.vote_transparency_opt_in:
            payload["vote_transparency_opt_in"] = True
        kind = (
            EventKind.CANDIDACY_VERSION_ADDED
            if identity in store.state.candidacies
            else EventKind.CANDIDACY_PUBLISHED
        )
        store.append(kind, payload)
        return candidacy(org, identity)

    @v1.get("/orgs/{org}/candidacies")
    def list_candidacies(org: str):
        state = gateway.store(org).state
        return {
            "candidacies": [
                candidacy(org, candidate) for candidate in sorted(state.candidacies)
            ]
        }

    @v1.get("/orgs/{org}/candidacies/{candidate}")
    def candidacy(org: str, candidate: str):
        state = gateway.store(org).state
        versions = state.candidacies.get(candidate)
        if not versions:
            raise NotFoundError(f"{candidate!r} has no candidacy")
        return {
            "candidate": candidate,
            "versions": [
                {
                    "version": v.version,
                    "claims": v.claims,
                    "scopes": [s.to_dict() for s in v.scopes],
                    "vote_transparency_opt_in": v.vote_transparency_opt_in,
                    "published_at": v.published_at,
                    "status": v.status,
                }
                for v in versions
            ],
            "track_record": track_record(state, candidate),
        }

    # -- votes and tallies ---------------------------------------------------

    @v1.post("/orgs/{org}/issues/{iid}/votes")
    def cast_vote(
        org: str,
        iid: str,
        body: VoteBody,
        authorization: Optional[str] = Header(None),
        x_request_id: Optional[str] = Header(None),
    ):
        identity = auth(org, authorization)

        def run():
            gateway.store(org).append(
                EventKind.VOTE_CAST,
                {"issue": iid, "participant": identity, "options": body.options},
            )
            return {"issue": iid, "participant": identity, "options": body.options}

        return idempotent(org, x_request_id, run)

    @v1.get("/orgs/{org}/issues/{iid}/votes/{owner}")
    def get_ballot(org: str, iid: str, owner: str, authorization: Optional[str] = Header(None)):
        identity = auth(org, authorization)
        state = gateway.store(org).state
        if iid not in state.issues:
            raise NotFoundError(f"unknown issue {iid!r}")
        if owner not in state.participants:
            raise NotFoundError(f"unknown participant {owner!r}")
        ballot = state.votes.get(iid, {}).get(owner)
        if ballot is None:
            raise NotFoundError(f"{owner!r} has no ballot on {iid!r}")
        seen = visible_ballot(state, identity, owner, iid)
        if seen is None:
            raise AuthorizationError("this ballot is not visible to you")
        return {"issue": iid, "participant": owner, "options": list(seen.options), "cast_at": seen.cast_at}

    @v1.get("/orgs/{org}/issues/{iid}/tally")
    def tally(org: str, iid: str):
        store = gateway.store(org)
        state = store.state
        if iid not in state.issues:
            raise NotFoundError(f"unknown issue {iid!r}")
        if not results_visible(state, iid):
            raise InvalidStateError(
                "results for this issue are not visible yet (sealed until close)"
            )
        return store.resolve(iid).to_dict()

    @v1.get("/orgs/{org}/issues/{iid}/attribution")
    def attribution(org: str, iid: str):
        state = gateway.store(org).state
        outcome = state.outcomes.get(iid)
        if outcome is None:
            raise NotFoundError(f"issue {iid!r} has no frozen outcome (not closed)")
        return {
            "issue": iid,
            "closed_at": outcome.closed_at,
            "closed_seq": outcome.closed_seq,
            "attribution": {p: outcome.attribution[p] for p in sorted(outcome.attribution)},
        }

    # -- predictions ---------------------------------------------------------

    @v1.post("/orgs/{org}/predictions")
    def register_prediction(org: str, body: PredictionBody, authorization: Optional[str] = Header(None)):
        identity = auth(org, authorization)
        payload = {
            "prediction": body.prediction,
            "proposal": body.proposal,
            "registrant": identity,
            "variable": body.variable,
            "direction": body.direction,
            "magnitude": body.magnitude,
            "timeframe": body.timeframe,
        }
        if body.methodology is not None:
            payload["methodology"] = body.methodology
        gateway.store(org).append(EventKind.PREDICTION_REGISTERED, payload)
        return {"prediction": body.prediction, "registrant": identity}

    @v1.get("/orgs/{org}/predictions")
    def predictions(org: str):
        return {"predictions": prediction_registry(gateway.store(org).state)}

    @v1.post("/orgs/{org}/predictions/{pid}/evaluate")
    def evaluate_prediction(org: str, pid: str, body: EvaluationBody, authorization: Optional[str] = Header(None)):
        identity = auth(org, authorization)
        gateway.store(org).append(
            EventKind.PREDICTION_EVALUATED,
            {"prediction": pid, "assessments": body.assessments, "evidence": body.evidence, "actor": identity},
        )
        ev = gateway.store(org).state.evaluations[pid]
        return {"prediction": pid, "score": ev.score, "evaluated_at": ev.evaluated_at}

    # -- surveys -------------------------------------------------------------

    @v1.post("/orgs/{org}/surveys")
    def open_survey(org: str, body: SurveyBody, authorization: Optional[str] = Header(None)):
        identity = auth(org, authorization)
        gateway.store(org).append(
            EventKind.SURVEY_OPENED,
            {
                "instance": body.instance,
                "series": body.series,
                "questions": body.questions,
                "opens": body.opens,
                "closes": body.closes,
                "actor": identity,
            },
        )
        return {"instance": body.instance, "series": body.series}

    @v1.post("/orgs/{org}/surveys/{instance}/responses")
    def respond_survey(
        org: str,
        instance: str,
        body: SurveyResponseBody,
        authorization: Optional[str] = Header(None),
        x_request_id: Optional[str] = Header(None),
    ):
        identity = auth(org, authorization)

        def run():
            gateway.store(org).append(
                EventKind.SURVEY_RESPONSE,
                {"instance": instance, "participant": identity, "answers": body.answers},
            )
            return {"instance": instance, "participant": identity}

        return idempotent(org, x_request_id, run)

    @v1.get("/orgs/{org}/surveys/{instance}/results")
    def get_survey_results(org: str, instance: str):
        return survey_results(gateway.store(org).state, instance)

    @v1.get("/orgs/{org}/surveys/{instance}/responses")
    def raw_responses(org: str, instance: str, authorization: Optional[str] = Header(None)):
        identity = auth(org, authorization)
        state = gateway.store(org).state
        if not state.has_role(identity, "administrator"):
            raise AuthorizationError("raw responses are export data for administrators")
        return {"responses": export_survey_responses(state, instance)}

    @v1.get("/orgs/{org}/surveys/series/{series}/trend")
    def trend(org: str, series: str, question: str):
        return {"series": series, "question": question, "points": trend_series(gateway.store(org).state, series, question)}

    # -- notes ---------------------------------------------------------------

    @v1.post("/orgs/{org}/notes")
    def submit_note(org: str, body: NoteBody, authorization: Optional[str] = Header(None)):
        identity = auth(org, authorization)
        gateway.store(org).append(
            EventKind.NOTE_SUBMITTED,
            {"note": body.note, "attached_to": body.attached_to, "body": body.body, "author": identity},
        )
        return bridging_visibility(gateway.store(org).state, body.note)

    @v1.post("/orgs/{org}/notes/{nid}/ratings")
    def rate_note(org: str, nid: str, body: RatingBody, authorization: Optional[str] = Header(None)):
        identity = auth(org, authorization)
        gateway.store(org).append(
            EventKind.NOTE_RATED,
            {"note": nid, "rater": identity, "rating": body.rating, "stance": body.stance},
        )
        return bridging_visibility(gateway.store(org).state, nid)

    @v1.get("/orgs/{org}/notes")
    def notes(org: str, kind: str, target: str):
        return {"notes": notes_for_target(gateway.store(org).state, kind, target)}

    @v1.get("/orgs/{org}/notes/{nid}")
    def note_visibility(org: str, nid: str):
        return bridging_visibility(gateway.store(org).state, nid)

    # -- awareness -----------------------------------------------------------

    @v1.get("/orgs/{org}/awareness/chain")
    def chain(org: str, participant: str, issue: str):
        return resolve_chain(gateway.store(org).state, participant, issue)

    @v1.get("/orgs/{org}/awareness/concentration")
    def concentration(org: str, kind: str, topic: Optional[str] = None, issue: Optional[str] = None):
        scope: dict = {"kind": kind}
        if topic is not None:
            scope["topic"] = topic
        if issue is not None:
            scope["issue"] = issue
        return concentration_report(gateway.store(org).state, scope)

    @v1.get("/orgs/{org}/awareness/harvesting")
    def harvesting(org: str):
        return {"flags": detect_harvesting(gateway.store(org).state)}

    @v1.get("/orgs/{org}/awareness/track-record/{participant}")
    def get_track_record(org: str, participant: str):
        return track_record(gateway.store(org).state, participant)

    @v1.get("/orgs/{org}/awareness/prompt")
    def prompt(org: str, participant: str, issue: str):
        return engagement_prompt(gateway.store(org).state, participant, issue)

    @v1.get("/orgs/{org}/awareness/history/{participant}")
    def history(org: str, participant: str, authorization: Optional[str] = Header(None)):
        identity = auth(org, authorization)
        return {"history": voting_history(gateway.store(org).state, participant, viewer=identity)}

    app.include_router(v1)
    return app
