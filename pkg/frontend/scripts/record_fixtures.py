"""Record real /v1 responses into tests/fixtures/.

Drives the actual gateway in-process and dumps each interesting exchange as a
JSON file the vitest contract suite replays. Patches the token mint and the
event clock so regeneration is byte-stable.

Run from the repository root:

    python3 frontend/scripts/record_fixtures.py
"""

from __future__ import annotations

import itertools
import json
import tempfile
from datetime import datetime, timedelta, timezone
from pathlib import Path
from types import SimpleNamespace

from fastapi.testclient import TestClient

import liquidgov.service as service
import liquidgov.store as store_mod
from liquidgov.service import create_app

FIXTURES = Path(__file__).resolve().parent.parent / "tests" / "fixtures"


def deterministic_patches() -> None:
    counter = itertools.count(1)
    service.secrets = SimpleNamespace(token_hex=lambda n: f"{next(counter):032x}")
    clock = {"t": datetime(2026, 1, 5, 9, 0, tzinfo=timezone.utc)}

    def tick() -> str:
        t = clock["t"]
        clock["t"] = t + timedelta(minutes=1)
        return t.strftime("%Y-%m-%dT%H:%M:%SZ")

    store_mod.utc_now_iso = tick


class Recorder:
    def __init__(self, client: TestClient):
        self.client = client
        self.tokens: dict[str, str] = {}

    def req(self, method: str, path: str, as_: str | None = None, body=None, params=None):
        headers = {}
        if as_ is not None:
            headers["Authorization"] = f"Bearer {self.tokens[as_]}"
        return self.client.request(method, path, headers=headers, json=body, params=params)

    def record(self, name: str, method: str, path: str, as_: str | None = None, body=None, params=None):
        response = self.req(method, path, as_=as_, body=body, params=params)
        doc = {
            "recorded_from": "liquidgov /v1 gateway",
            "request": {"method": method, "path": path},
            "status": response.status_code,
            "body": response.json(),
        }
        if as_ is not None:
            doc["request"]["as"] = as_
        if body is not None:
            doc["request"]["body"] = body
        if params is not None:
            doc["request"]["params"] = params
        out = FIXTURES / f"{name}.json"
        out.write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n")
        print(f"  {out.name}  ({response.status_code})")
        return response

    # -- org plumbing --------------------------------------------------------

    def create_org(self, org: str, preset: str, topics=None) -> None:
        r = self.req(
            "POST",
            "/v1/orgs",
            body={
                "org": org,
                "preset": preset,
                "topics": topics or [],
                "founder": {"participant": "admin", "display_name": "Admin"},
            },
        )
        assert r.status_code == 200, r.text
        self.tokens["admin"] = r.json()["token"]

    def join(self, org: str, pid: str) -> None:
        inv = self.req("POST", f"/v1/orgs/{org}/invitations", as_="admin", body={"roles": []})
        r = self.req(
            "POST",
            f"/v1/orgs/{org}/participants",
            body={
                "invitation": inv.json()["invitation"],
                "participant": pid,
                "display_name": pid.title(),
            },
        )
        assert r.status_code == 200, r.text
        self.tokens[pid] = r.json()["token"]

    def open_issue(self, org: str, iid: str, topic: str | None = None, event: str = "ev1") -> None:
        issues = self.req("GET", f"/v1/orgs/{org}/events").json()["events"]
        if not any(e["event"] == event for e in issues):
            self.req("POST", f"/v1/orgs/{org}/events", as_="admin", body={"event": event, "title": "Decisions"})
        body = {"issue": iid, "event": event, "title": f"Issue {iid}"}
        if topic is not None:
            body["topic"] = topic
        self.req("POST", f"/v1/orgs/{org}/issues", as_="admin", body=body)

    def start_voting(self, org: str, event: str, *issues: str) -> None:
        for phase in ("curation", "voting"):
            self.req("POST", f"/v1/orgs/{org}/events/{event}/advance", as_="admin", body={"phase": phase})
        for iid in issues:
            for phase in ("deliberation", "open"):
                self.req("POST", f"/v1/orgs/{org}/issues/{iid}/advance", as_="admin", body={"phase": phase})

    def delegate(self, org: str, source: str, target: str, scope=None) -> None:
        r = self.req(
            "PUT",
            f"/v1/orgs/{org}/delegations",
            as_=source,
            body={"source": source, "target": target, "scope": scope or {"kind": "global"}},
        )
        assert r.status_code == 200, r.text


def record_override(rec: Recorder) -> None:
    """A delegator casts a direct vote: the message that their vote wins."""
    org = "override"
    rec.create_org(org, "informal_liquid")
    rec.join(org, "alice")
    rec.join(org, "bob")
    rec.open_issue(org, "i1")
    rec.start_voting(org, "ev1", "i1")
    rec.delegate(org, "alice", "bob")
    rec.req("POST", f"/v1/orgs/{org}/issues/i1/votes", as_="bob", body={"options": ["yes"]})

    rec.record("override.delegations", "GET", f"/v1/orgs/{org}/delegations", params={"participant": "alice"})
    rec.record(
        "override.chain_before_vote",
        "GET",
        f"/v1/orgs/{org}/awareness/chain",
        params={"participant": "alice", "issue": "i1"},
    )
    rec.record(
        "override.vote_cast",
        "POST",
        f"/v1/orgs/{org}/issues/i1/votes",
        as_="alice",
        body={"options": ["no"]},
    )
    rec.record(
        "override.chain_after_vote",
        "GET",
        f"/v1/orgs/{org}/awareness/chain",
        params={"participant": "alice", "issue": "i1"},
    )


def record_editor(rec: Recorder) -> None:
    """One participant, three scoped delegations, three issues: which row
    carries the unit where."""
    org = "editor"
    topics = [
        {"id": "finance", "name": "Finance"},
        {"id": "budget", "name": "Budget", "parent": "finance"},
    ]
    rec.create_org(org, "informal_liquid", topics=topics)
    for pid in ("alice", "carol", "dave", "erin"):
        rec.join(org, pid)
    rec.open_issue(org, "i-budget", topic="budget")
    rec.open_issue(org, "i-parks", topic="finance")
    rec.open_issue(org, "i-roads")
    rec.start_voting(org, "ev1", "i-budget", "i-parks", "i-roads")
    rec.delegate(org, "alice", "carol")
    rec.delegate(org, "alice", "dave", scope={"kind": "topic", "topic": "finance"})
    rec.delegate(org, "alice", "erin", scope={"kind": "issue", "issue": "i-budget"})
    # targets vote so every chain ends at a ballot, not a dead end
    for pid, iid in (("erin", "i-budget"), ("dave", "i-parks"), ("carol", "i-roads")):
        rec.req("POST", f"/v1/orgs/{org}/issues/{iid}/votes", as_=pid, body={"options": ["yes"]})

    rec.record("editor.delegations", "GET", f"/v1/orgs/{org}/delegations", params={"participant": "alice"})
    for iid, name in (("i-budget", "chain_budget"), ("i-parks", "chain_parks"), ("i-roads", "chain_roads")):
        rec.record(
            f"editor.{name}",
            "GET",
            f"/v1/orgs/{org}/awareness/chain",
            params={"participant": "alice", "issue": iid},
        )
    rec.record("editor.delegations_empty", "GET", f"/v1/orgs/{org}/delegations", params={"participant": "erin"})


def record_pulse(rec: Recorder) -> None:
    """Survey answers are one-shot: the second submission is refused."""
    org = "pulse"
    rec.create_org(org, "liquid_delegation")
    rec.join(org, "alice")
    rec.req(
        "POST",
        f"/v1/orgs/{org}/surveys",
        as_="admin",
        body={
            "instance": "pulse-1",
            "series": "pulse",
            "questions": [
                {
                    "id": "q1",
                    "text": "How connected do you feel to decisions made here?",
                    "answer": {"kind": "scale"},
                }
            ],
            "opens": "2026-01-01T00:00:00Z",
            "closes": "2026-12-31T00:00:00Z",
        },
    )
    rec.record(
        "pulse.response_ok",
        "POST",
        f"/v1/orgs/{org}/surveys/pulse-1/responses",
        as_="alice",
        body={"answers": {"q1": 4}},
    )
    rec.record(
        "pulse.response_duplicate",
        "POST",
        f"/v1/orgs/{org}/surveys/pulse-1/responses",
        as_="alice",
        body={"answers": {"q1": 5}},
    )
    rec.req("POST", f"/v1/orgs/{org}/surveys/pulse-1/responses", as_="admin", body={"answers": {"q1": 2}})
    rec.record("pulse.results", "GET", f"/v1/orgs/{org}/surveys/pulse-1/results")


def record_adrift(rec: Recorder) -> None:
    """Chains that reach no ballot: a dead end and a cycle."""
    org = "adrift"
    rec.create_org(org, "informal_liquid")
    for pid in ("alice", "bob", "carol", "dana", "eve"):
        rec.join(org, pid)
    rec.open_issue(org, "i1")
    rec.start_voting(org, "ev1", "i1")
    rec.delegate(org, "alice", "bob")
    rec.delegate(org, "bob", "carol")
    rec.delegate(org, "dana", "eve")
    rec.delegate(org, "eve", "dana")

    rec.record(
        "adrift.chain_dangling",
        "GET",
        f"/v1/orgs/{org}/awareness/chain",
        params={"participant": "alice", "issue": "i1"},
    )
    rec.record(
        "adrift.chain_cycle",
        "GET",
        f"/v1/orgs/{org}/awareness/chain",
        params={"participant": "dana", "issue": "i1"},
    )


def main() -> None:
    deterministic_patches()
    FIXTURES.mkdir(parents=True, exist_ok=True)
    for stale in FIXTURES.glob("*.json"):
        stale.unlink()
    with tempfile.TemporaryDirectory(prefix="liquidgov-record-") as tmp:
        client = TestClient(create_app(tmp, fsync=False))
        rec = Recorder(client)
        print("recording fixtures:")
        record_override(rec)
        record_editor(rec)
        record_pulse(rec)
        record_adrift(rec)
    print(f"done: {len(list(FIXTURES.glob('*.json')))} fixtures in {FIXTURES}")


if __name__ == "__main__":
    main()
