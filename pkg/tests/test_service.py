"""HTTP gateway tests.

Everything here drives orgs purely over the /v1 API with a test client, then
checks status codes, payload shapes, and that the gateway adds nothing the
library would not: the log an API session writes replays to the same state.
"""

import json

import pytest
from starlette.testclient import TestClient

from liquidgov.events import LogFile
from liquidgov.service import create_app
from liquidgov.state import replay

FAR_FUTURE = "2100-01-01T00:00:00Z"
WIDE_OPENS = "2000-01-01T00:00:00Z"
WIDE_CLOSES = "2100-01-01T00:00:00Z"

TOPICS = [
    {"id": "finance", "name": "Finance"},
    {"id": "budget", "name": "Budget", "parent": "finance"},
]


class Api:
    """One org driven through the HTTP API, remembering everyone's token."""

    def __init__(self, client: TestClient, org="acme", preset=None, config=None, topics=None):
        self.client = client
        self.org = org
        body = {"org": org, "founder": {"participant": "admin", "display_name": "Admin"}}
        if config is not None:
            body["config"] = config
        else:
            body["preset"] = preset or "liquid_delegation"
        if topics is not None:
            body["topics"] = topics
        r = client.post("/v1/orgs", json=body)
        assert r.status_code == 200, r.text
        self.tokens = {"admin": r.json()["token"]}

    def headers(self, who):
        return {"Authorization": f"Bearer {self.tokens[who]}"}

    def req(self, method, path, who=None, expect=200, headers=None, **kw):
        h = dict(headers or {})
        if who is not None:
            h.update(self.headers(who))
        r = self.client.request(method, f"/v1/orgs/{self.org}{path}", headers=h, **kw)
        assert r.status_code == expect, f"{method} {path} -> {r.status_code}: {r.text}"
        return r.json()

    def get(self, path, **kw):
        return self.req("GET", path, **kw)

    def post(self, path, **kw):
        return self.req("POST", path, **kw)

    def put(self, path, **kw):
        return self.req("PUT", path, **kw)

    def delete(self, path, **kw):
        return self.req("DELETE", path, **kw)

    def join(self, pid, roles=()):
        inv = self.post("/invitations", who="admin", json={"roles": list(roles)})["invitation"]
        out = self.post(
            "/participants",
            json={"invitation": inv, "participant": pid, "display_name": pid.title()},
        )
        self.tokens[pid] = out["token"]
        return out

    def delegate(self, source, target, scope=None):
        return self.put(
            "/delegations",
            who=source,
            json={"source": source, "target": target, "scope": scope or {"kind": "global"}},
        )

    def vote(self, issue, who, *options):
        return self.post(f"/issues/{issue}/votes", who=who, json={"options": list(options)})

    def open_issue(self, iid="i1", eid="ev1", topic=None, proponent="pat"):
        """Walk one issue from nothing to open, satisfying the booklet."""
        if proponent not in self.tokens:
            self.join(proponent, roles=("proponent",))
        summary = self.get("")
        features = summary["config"]["features"]
        if eid not in summary["voting_events"]:
            self.post("/events", who="admin", json={"event": eid, "title": "Round"})
        issue_body = {"issue": iid, "event": eid, "title": iid, "options": ["yes", "no"]}
        if topic is not None:
            issue_body["topic"] = topic
        self.post("/issues", who="admin", json=issue_body)
        if features["booklet"]:
            self.put(
                f"/issues/{iid}/booklet",
                who="admin",
                json={"section": "official_description", "content": "what this decides"},
            )
            self.post(
                "/proposals",
                who=proponent,
                json={"proposal": f"{iid}-p1", "issue": iid, "text": "do the thing"},
            )
            self.put(
                f"/issues/{iid}/booklet",
                who=proponent,
                json={"section": "supporting_arguments", "content": "it helps"},
            )
            self.put(
                f"/issues/{iid}/booklet",
                who="admin",
                json={"section": "opposing_arguments", "content": "it costs"},
            )
            if features["predictions"]:
                self.post(
                    "/predictions",
                    who=proponent,
                    json={
                        "prediction": f"{iid}-pred",
                        "proposal": f"{iid}-p1",
                        "variable": "cost",
                        "direction": "decrease",
                        "magnitude": {"value": 10, "unit": "percent"},
                        "timeframe": FAR_FUTURE,
                    },
                )
            self.put(
                f"/issues/{iid}/booklet",
                who="admin",
                json={"section": "state_of_affairs", "content": "as things stand"},
            )
        ev_phase = self.get("/events")["events"]
        phase = next(e["phase"] for e in ev_phase if e["event"] == eid)
        if phase == "deliberation":
            self.post(f"/events/{eid}/advance", who="admin", json={"phase": "curation"})
            phase = "curation"
        if phase == "curation":
            self.post(f"/events/{eid}/advance", who="admin", json={"phase": "voting"})
        self.post(f"/issues/{iid}/advance", who="admin", json={"phase": "deliberation"})
        self.post(f"/issues/{iid}/advance", who="admin", json={"phase": "open"})

    def close_issue(self, iid="i1"):
        self.post(f"/issues/{iid}/advance", who="admin", json={"phase": "closed"})


@pytest.fixture()
def client(tmp_path):
    return TestClient(create_app(tmp_path / "data", fsync=False))


@pytest.fixture()
def api(client):
    return Api(client, topics=TOPICS)


class TestMeta:
    def test_health(self, client):
        assert client.get("/v1/health").json() == {"status": "ok"}

    def test_version_names_the_package(self, client):
        body = client.get("/v1/version").json()
        assert body["name"] == "liquidgov"
        assert body["version"]

    def test_presets_lists_all_six_with_quadrants(self, client):
        rows = client.get("/v1/presets").json()["presets"]
        assert len(rows) == 6
        assert {r["quadrant"] for r in rows} == {
            "direct_democracy",
            "informal_liquid",
            "representative",
            "liquid_delegation",
        }


class TestOrgLifecycle:
    def test_create_org_returns_founder_token(self, client):
        api = Api(client)
        summary = api.get("")
        assert summary["participants"] == 1
        assert summary["seq"] == 2  # config + founder join
        assert summary["config"]["features"]["booklet"] is True

    def test_duplicate_org_conflicts(self, client):
        Api(client, org="one")
        r = client.post(
            "/v1/orgs",
            json={"org": "one", "preset": "direct_democracy",
                  "founder": {"participant": "x", "display_name": "X"}},
        )
        assert r.status_code == 409

    def test_unknown_org_404(self, client):
        assert client.get("/v1/orgs/nowhere").status_code == 404

    def test_unknown_preset_404(self, client):
        r = client.post(
            "/v1/orgs",
            json={"org": "o", "preset": "anarchy",
                  "founder": {"participant": "x", "display_name": "X"}},
        )
        assert r.status_code == 404

    def test_preset_and_config_together_rejected(self, client):
        r = client.post(
            "/v1/orgs",
            json={"org": "o", "preset": "direct_democracy", "config": {},
                  "founder": {"participant": "x", "display_name": "X"}},
        )
        assert r.status_code == 422

    def test_org_ids_cannot_escape_the_data_dir(self, client):
        r = client.post(
            "/v1/orgs",
            json={"org": "../evil", "preset": "direct_democracy",
                  "founder": {"participant": "x", "display_name": "X"}},
        )
        assert r.status_code == 422

    def test_reconfigure_requires_admin(self, api):
        api.join("alice")
        api.put("/config", who="alice", expect=422, json={})
        # non-admin actor is refused by the fold
        api.put("/config", who="alice", expect=403, json={"preset": "direct_democracy"})
        api.put("/config", who="admin", json={"preset": "direct_democracy"})
        assert api.get("")["config"]["features"]["booklet"] is False


class TestAuth:
    def test_missing_token_401(self, api):
        r = api.client.post(f"/v1/orgs/{api.org}/events", json={"event": "e", "title": "t"})
        assert r.status_code == 401

    def test_garbage_token_401(self, api):
        r = api.client.post(
            f"/v1/orgs/{api.org}/events",
            headers={"Authorization": "Bearer not-a-token"},
            json={"event": "e", "title": "t"},
        )
        assert r.status_code == 401

    def test_non_admin_cannot_invite(self, api):
        api.join("alice")
        api.post("/invitations", who="alice", expect=403, json={"roles": []})

    def test_invitation_with_unknown_role_rejected(self, api):
        api.post("/invitations", who="admin", expect=422, json={"roles": ["emperor"]})

    def test_cannot_delegate_on_someone_elses_behalf(self, api):
        api.join("alice")
        api.join("bob")
        api.put(
            "/delegations",
            who="bob",
            expect=403,
            json={"source": "alice", "target": "bob", "scope": {"kind": "global"}},
        )

    def test_join_with_unknown_invitation_401(self, api):
        r = api.client.post(
            f"/v1/orgs/{api.org}/participants",
            json={"invitation": "bogus", "participant": "eve", "display_name": "Eve"},
        )
        assert r.status_code == 401

    def test_invitation_single_use(self, api):
        inv = api.post("/invitations", who="admin", json={"roles": []})["invitation"]
        api.post(
            "/participants",
            json={"invitation": inv, "participant": "alice", "display_name": "Alice"},
        )
        api.post(
            "/participants",
            expect=409,
            json={"invitation": inv, "participant": "bob", "display_name": "Bob"},
        )

    def test_malformed_body_422(self, api):
        api.post("/events", who="admin", expect=422, json={"event": "e"})  # title missing
        api.post("/events", who="admin", expect=422,
                 json={"event": "e", "title": "t", "extra": 1})


class TestStatusCodes:
    """Domain errors surface as the documented HTTP codes."""

    def test_not_found_404(self, api):
        api.get("/issues/ghost", expect=404)
        api.get("/predictions", expect=200)
        api.post("/issues/ghost/votes", who="admin", expect=404, json={"options": ["yes"]})

    def test_vote_on_draft_issue_409(self, api):
        api.post("/events", who="admin", json={"event": "ev1", "title": "Round"})
        api.post("/issues", who="admin",
                 json={"issue": "i1", "event": "ev1", "title": "Budget"})
        api.post("/issues/i1/votes", who="admin", expect=409, json={"options": ["yes"]})

    def test_feature_disabled_409(self, client):
        api = Api(client, preset="direct_democracy")
        api.join("alice")
        api.join("bob")
        api.put("/delegations", who="alice", expect=409,
                json={"source": "alice", "target": "bob", "scope": {"kind": "global"}})

    def test_domain_validation_422(self, api):
        api.join("alice")
        # unknown scope kind fails validation, not authentication
        api.put("/delegations", who="alice", expect=422,
                json={"source": "alice", "target": "admin", "scope": {"kind": "cosmic"}})

    def test_tampered_log_surfaces_integrity_failure(self, tmp_path):
        data = tmp_path / "data"
        client = TestClient(create_app(data, fsync=False))
        api = Api(client)
        api.join("alice")
        # corrupt one timestamp digit on disk, then reopen via a fresh app
        log_path = data / api.org / "events.log"
        raw = bytearray(log_path.read_bytes())
        idx = raw.find(b'"at":"2')
        assert idx != -1
        raw[idx + 6] = ord("3")
        log_path.write_bytes(bytes(raw))
        fresh = TestClient(create_app(data, fsync=False), raise_server_exceptions=False)
        r = fresh.get(f"/v1/orgs/{api.org}")
        assert r.status_code == 500
        assert "seq" in r.json()["error"] or "hash" in r.json()["error"]


class TestIdempotency:
    def test_duplicate_vote_request_replayed_not_reapplied(self, api):
        api.join("alice")
        api.open_issue()
        rid = {"X-Request-Id": "cast-1"}
        first = api.post("/issues/i1/votes", who="alice", headers=rid,
                         json={"options": ["yes"]})
        seq_after = api.get("")["seq"]
        second = api.post("/issues/i1/votes", who="alice", headers=rid,
                          json={"options": ["no"]})
        assert second == first  # the recorded response, not a new write
        assert api.get("")["seq"] == seq_after

    def test_duplicate_join_returns_same_token(self, api):
        inv = api.post("/invitations", who="admin", json={"roles": []})["invitation"]
        body = {"invitation": inv, "participant": "zoe", "display_name": "Zoe"}
        rid = {"X-Request-Id": "join-zoe"}
        first = api.post("/participants", headers=rid, json=body)
        second = api.post("/participants", headers=rid, json=body)
        assert first == second
        assert api.get("")["participants"] == 2


class TestDelegationsAndTally:
    def test_delegation_round_trip(self, api):
        api.join("alice")
        api.join("bob")
        api.delegate("alice", "bob", {"kind": "topic", "topic": "finance"})
        rows = api.get("/delegations", params={"participant": "alice"})["delegations"]
        assert rows == [
            {
                "source": "alice",
                "target": "bob",
                "scope": {"kind": "topic", "topic": "finance"},
                "created_at": rows[0]["created_at"],
            }
        ]
        api.delete("/delegations", who="alice",
                   json={"source": "alice", "scope": {"kind": "topic", "topic": "finance"}})
        assert api.get("/delegations")["delegations"] == []

    def test_live_tally_counts_delegated_weight(self, api):
        api.join("alice")
        api.join("bob")
        api.join("carol")
        api.open_issue("i1", topic="budget")
        api.delegate("alice", "bob")
        api.delegate("carol", "bob", {"kind": "topic", "topic": "finance"})
        api.vote("i1", "bob", "yes")
        tally = api.get("/issues/i1/tally")
        assert tally["weights"] == {"admin": 0, "alice": 0, "bob": 3, "carol": 0, "pat": 0}
        assert tally["option_totals"] == {"yes": 3, "no": 0}
        # admin and the proponent never engaged with the issue
        assert sorted(tally["abstainers"]) == ["admin", "pat"]
        assert tally["outcome"] == "decided"
        assert tally["winner"] == "yes"

    def test_direct_vote_overrides_delegation(self, api):
        api.join("alice")
        api.join("bob")
        api.open_issue("i1")
        api.delegate("alice", "bob")
        api.vote("i1", "bob", "yes")
        api.vote("i1", "alice", "no")
        tally = api.get("/issues/i1/tally")
        assert tally["weights"] == {"admin": 0, "alice": 1, "bob": 1, "pat": 0}

    def test_closed_issue_serves_frozen_outcome(self, api):
        api.join("alice")
        api.join("bob")
        api.open_issue("i1")
        api.delegate("alice", "bob")
        api.vote("i1", "bob", "yes")
        api.close_issue("i1")
        frozen = api.get("/issues/i1/tally")
        # delegation churn after close cannot move the recorded outcome
        api.delete("/delegations", who="alice",
                   json={"source": "alice", "scope": {"kind": "global"}})
        assert api.get("/issues/i1/tally") == frozen
        att = api.get("/issues/i1/attribution")
        assert att["attribution"]["alice"] == "bob"
        assert att["attribution"]["bob"] == "bob"

    def test_attribution_404_until_closed(self, api):
        api.join("alice")
        api.open_issue("i1")
        api.get("/issues/i1/attribution", expect=404)


class TestVisibility:
    def test_sealed_results_hidden_until_close(self, client):
        api = Api(client, preset="civic_participatory", topics=TOPICS)
        api.join("alice")
        api.open_issue("i1")
        api.vote("i1", "alice", "yes")
        r = api.get("/issues/i1/tally", expect=409)
        assert "sealed" in r["error"]
        api.vote("i1", "admin", "yes")
        api.vote("i1", "pat", "yes")
        api.close_issue("i1")
        assert api.get("/issues/i1/tally")["outcome"] == "decided"

    def test_secret_ballot_visible_only_to_owner(self, api):
        api.join("alice")
        api.join("bob")
        api.open_issue("i1")
        api.vote("i1", "alice", "yes")
        mine = api.get("/issues/i1/votes/alice", who="alice")
        assert mine["options"] == ["yes"]
        api.get("/issues/i1/votes/alice", who="bob", expect=403)
        api.get("/issues/i1/votes/bob", who="alice", expect=404)  # no ballot at all

    def test_public_ballots_visible_to_members(self, client):
        api = Api(client, preset="informal_liquid")
        api.join("alice")
        api.join("bob")
        api.open_issue("i1")
        api.vote("i1", "alice", "yes")
        assert api.get("/issues/i1/votes/alice", who="bob")["options"] == ["yes"]

    def test_delegate_transparency_pierces_secrecy_for_delegators(self, api):
        api.join("alice")
        api.join("bob")
        api.post(
            "/candidacies",
            who="bob",
            json={
                "claims": [{"kind": "position", "text": "treasurer"}],
                "vote_transparency_opt_in": True,
            },
        )
        api.delegate("alice", "bob")
        api.open_issue("i1")
        api.vote("i1", "bob", "yes")
        assert api.get("/issues/i1/votes/bob", who="alice")["options"] == ["yes"]
        api.join("carol")
        api.get("/issues/i1/votes/bob", who="carol", expect=403)


class TestBookletAndCandidacy:
    def test_booklet_view_tracks_completion(self, api):
        api.post("/events", who="admin", json={"event": "ev1", "title": "Round"})
        api.post("/issues", who="admin",
                 json={"issue": "i1", "event": "ev1", "title": "Budget"})
        view = api.get("/issues/i1/booklet")
        assert view["status"]["complete"] is False
        assert view["official_description"] is None
        view = api.put("/issues/i1/booklet", who="admin",
                       json={"section": "official_description", "content": "scope"})
        assert view["official_description"] == "scope"
        assert view["status"]["sections"]["official_description"] == "complete"

    def test_issue_view_reports_open_blockers(self, api):
        api.post("/events", who="admin", json={"event": "ev1", "title": "Round"})
        api.post("/issues", who="admin",
                 json={"issue": "i1", "event": "ev1", "title": "Budget"})
        view = api.get("/issues/i1")
        assert view["can_open"] is False
        assert view["open_blockers"]

    def test_candidacy_versions_and_track_record(self, api):
        api.join("bob")
        api.post("/candidacies", who="bob",
                 json={"claims": [{"kind": "experience", "text": "ran the books"}]})
        api.post("/candidacies", who="bob",
                 json={"claims": [{"kind": "experience", "text": "ran the books twice"}],
                       "scopes": [{"kind": "topic", "topic": "finance"}]})
        body = api.get("/candidacies/bob")
        assert [v["version"] for v in body["versions"]] == [1, 2]
        assert [v["status"] for v in body["versions"]] == ["superseded", "active"]
        assert body["track_record"]["closed_issues_voted"] == 0
        assert api.get("/candidacies")["candidacies"][0]["candidate"] == "bob"

    def test_proposal_requires_proponent_role(self, api):
        api.join("alice")
        api.post("/events", who="admin", json={"event": "ev1", "title": "Round"})
        api.post("/issues", who="admin",
                 json={"issue": "i1", "event": "ev1", "title": "Budget"})
        api.post("/proposals", who="alice", expect=403,
                 json={"proposal": "p1", "issue": "i1", "text": "nope"})


class TestPredictionsSurveysNotes:
    def test_prediction_registry_and_early_evaluation(self, api):
        api.join("alice")
        api.open_issue("i1")
        rows = api.get("/predictions")["predictions"]
        assert rows[0]["prediction"] == "i1-pred"
        assert rows[0]["status"] == "pending"
        api.post("/predictions/i1-pred/evaluate", who="admin", expect=409,
                 json={"assessments": [{"score": "met"}],
                       "evidence": [{"kind": "external", "url": "https://example.org"}]})

    def test_survey_flow_and_duplicate_response_blocked(self, api):
        api.join("alice")
        api.post("/surveys", who="admin", json={
            "instance": "pulse-1", "series": "pulse",
            "questions": [{"id": "q1", "text": "How satisfied?", "answer": {"kind": "scale"}}],
            "opens": WIDE_OPENS, "closes": WIDE_CLOSES,
        })
        api.post("/surveys/pulse-1/responses", who="alice", json={"answers": {"q1": 4}})
        r = api.post("/surveys/pulse-1/responses", who="alice", expect=409,
                     json={"answers": {"q1": 5}})
        assert "immutable" in r["error"]
        results = api.get("/surveys/pulse-1/results")
        assert results["questions"]["q1"]["mean"] == 4
        assert results["responses"] == 1

    def test_raw_responses_admin_only(self, api):
        api.join("alice")
        api.post("/surveys", who="admin", json={
            "instance": "pulse-1", "series": "pulse",
            "questions": [{"id": "q1", "text": "How satisfied?", "answer": {"kind": "scale"}}],
            "opens": WIDE_OPENS, "closes": WIDE_CLOSES,
        })
        api.post("/surveys/pulse-1/responses", who="alice", json={"answers": {"q1": 2}})
        api.get("/surveys/pulse-1/responses", who="alice", expect=403)
        rows = api.get("/surveys/pulse-1/responses", who="admin")["responses"]
        assert rows == [{"instance": "pulse-1", "series": "pulse", "participant": "alice",
                         "answers": {"q1": 2}, "responded_at": rows[0]["responded_at"]}]

    def test_trend_endpoint(self, api):
        api.join("alice")
        for n, (o, c) in enumerate(
            [("2000-01-01T00:00:00Z", "2099-01-01T00:00:00Z"),
             ("2000-02-01T00:00:00Z", "2099-01-01T00:00:00Z")], start=1
        ):
            api.post("/surveys", who="admin", json={
                "instance": f"pulse-{n}", "series": "pulse",
                "questions": [{"id": "q1", "text": "How satisfied?", "answer": {"kind": "scale"}}],
                "opens": o, "closes": c,
            })
            api.post(f"/surveys/pulse-{n}/responses", who="alice",
                     json={"answers": {"q1": n + 2}})
        points = api.get("/surveys/series/pulse/trend",
                         params={"question": "q1"})["points"]
        assert [p["instance"] for p in points] == ["pulse-1", "pulse-2"]
        assert [p["mean"] for p in points] == [3, 4]

    def test_notes_lifecycle_over_http(self, api):
        for pid in ("alice", "bob", "carol", "dave"):
            api.join(pid)
        api.open_issue("i1")
        api.post("/notes", who="alice", json={
            "note": "n1",
            "attached_to": {"kind": "proposal", "id": "i1-p1"},
            "body": "the cost claim omits maintenance",
        })
        assert api.get("/notes/n1")["status"] == "pending"
        for rater, stance in [("bob", "supports"), ("carol", "supports"),
                              ("dave", "opposes"), ("admin", "opposes")]:
            api.post("/notes/n1/ratings", who=rater,
                     json={"rating": "helpful", "stance": stance})
        body = api.get("/notes/n1")
        assert body["status"] == "prominent"
        listed = api.get("/notes", params={"kind": "proposal", "target": "i1-p1"})["notes"]
        assert [n["note"] for n in listed] == ["n1"]

    def test_author_cannot_rate_own_note(self, api):
        api.join("alice")
        api.open_issue("i1")
        api.post("/notes", who="alice", json={
            "note": "n1", "attached_to": {"kind": "proposal", "id": "i1-p1"},
            "body": "hmm",
        })
        api.post("/notes/n1/ratings", who="alice", expect=422,
                 json={"rating": "helpful", "stance": "supports"})


class TestAwarenessEndpoints:
    def test_chain_and_prompt(self, api):
        api.join("alice")
        api.join("bob")
        api.open_issue("i1")
        api.delegate("alice", "bob")
        api.vote("i1", "bob", "yes")
        chain = api.get("/awareness/chain", params={"participant": "alice", "issue": "i1"})
        assert chain["terminal"] == "voter"
        assert chain["resolved_to"] == "bob"
        assert chain["hops"] == ["bob"]
        prompt = api.get("/awareness/prompt", params={"participant": "alice", "issue": "i1"})
        assert "overrides" in prompt["message"]

    def test_concentration_scopes(self, api):
        api.join("alice")
        api.join("bob")
        api.delegate("alice", "bob")
        report = api.get("/awareness/concentration", params={"kind": "global"})
        assert report["basis"] == "potential"
        top = report["holders"][0]
        assert top["participant"] == "bob"
        assert top["weight"] == 2

    def test_harvesting_flags_empty_for_quiet_org(self, api):
        api.join("alice")
        assert api.get("/awareness/harvesting")["flags"] == []

    def test_history_respects_ballot_visibility(self, api):
        api.join("alice")
        api.join("bob")
        api.open_issue("i1")
        api.vote("i1", "alice", "yes")
        api.vote("i1", "bob", "no")
        api.close_issue("i1")
        own = api.get("/awareness/history/alice", who="alice")["history"]
        assert own[0]["voted_directly"] is True
        assert own[0]["options"] == ["yes"]
        other = api.get("/awareness/history/alice", who="bob")["history"]
        assert "options" not in other[0]


class TestExportVerifyReplay:
    def test_verify_ok(self, api):
        api.join("alice")
        body = api.get("/verify")
        assert body == {"ok": True, "first_bad_seq": None}

    def test_export_is_replayable_jsonl(self, api, tmp_path):
        api.join("alice")
        api.join("bob")
        api.open_issue("i1")
        api.delegate("alice", "bob")
        api.vote("i1", "bob", "yes")
        api.close_issue("i1")
        text = api.client.get(f"/v1/orgs/{api.org}/export").text
        lines = [json.loads(l) for l in text.strip().splitlines()]
        assert lines[0]["format"] == "liquidgov-log"
        seq = api.get("")["seq"]
        assert len(lines) == seq + 1

    def test_api_log_replays_to_identical_state(self, api, tmp_path):
        """The gateway writes nothing the pure fold cannot reproduce."""
        api.join("alice")
        api.join("bob")
        api.open_issue("i1")
        api.delegate("alice", "bob")
        api.vote("i1", "bob", "yes")
        api.close_issue("i1")
        app_gateway = api.client.app.state.gateway
        store = app_gateway.store(api.org)
        events = list(store.events())
        refolded = replay(api.org, events)
        assert refolded.digest() == store.state.digest()
        # and the on-disk log, opened cold, carries the same chain
        log = LogFile(app_gateway.org_dir(api.org) / "events.log")
        assert [e.hash for e in log.read_events()] == [e.hash for e in events]
