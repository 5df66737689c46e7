"""Scripted governance runs: load a fixture, play it, check the expectations.

Two fixture shapes serve two needs. ``cases`` are pure resolution checks: a
participant set, delegation edges, and votes go straight through the resolver
with no log involved. ``script`` is a full event sequence appended to a real
(temporary) store, with post-hoc expectations against tallies, predictions, or
the fold itself. One file may carry both.

Expectations are subset matches: every key the fixture names must be present
and equal, extra keys in the actual value are ignored. Lists compare exactly.
"""

from __future__ import annotations

import json
import tempfile
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import yaml

from .accountability import prediction_registry
from .awareness import track_record
from .model import (
    Delegation,
    Delegations,
    DelegationScope,
    GovernanceConfig,
    Issue,
    IssueStatus,
    Taxonomy,
    Topic,
    ValidationError,
)
from .presets import apply_preset
from .resolution import Ballot, resolve_issue
from .store import OrgStore


@dataclass
class SimulationReport:
    name: str
    cases_run: int = 0
    events_applied: int = 0
    failures: list[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.failures

    def summary(self) -> str:
        lines = [
            f"scenario: {self.name}",
            f"cases: {self.cases_run}  events: {self.events_applied}",
        ]
        if self.ok:
            lines.append("result: PASS")
        else:
            lines.append(f"result: FAIL ({len(self.failures)} mismatches)")
            lines.extend(f"  - {f}" for f in self.failures)
        return "\n".join(lines)


def load_fixture(path: str | Path) -> dict:
    path = Path(path)
    text = path.read_text()
    if path.suffix in (".yaml", ".yml"):
        doc = yaml.safe_load(text)
    else:
        doc = json.loads(text)
    if not isinstance(doc, dict):
        raise ValidationError("fixture must be a mapping")
    return doc


def _match(expected, actual, path: str, failures: list[str]) -> None:
    # dict expectation: subset; list: exact; scalar: equality
    if isinstance(expected, dict):
        if not isinstance(actual, dict):
            failures.append(f"{path}: expected a mapping, got {actual!r}")
            return
        for k, v in expected.items():
            if k not in actual:
                failures.append(f"{path}.{k}: missing (expected {v!r})")
            else:
                _match(v, actual[k], f"{path}.{k}", failures)
    elif isinstance(expected, list):
        if expected != actual:
            failures.append(f"{path}: expected {expected!r}, got {actual!r}")
    else:
        if expected != actual:
            failures.append(f"{path}: expected {expected!r}, got {actual!r}")


def _config_for(case: dict) -> GovernanceConfig:
    if "config" in case:
        return GovernanceConfig.from_dict(case["config"])
    return apply_preset(case.get("preset", "liquid_delegation"))


def _taxonomy_for(case: dict) -> Taxonomy:
    return Taxonomy(
        Topic(t["id"], t.get("name", t["id"]), t.get("parent"))
        for t in case.get("topics", [])
    )


def _run_case(case: dict, index: int, failures: list[str]) -> None:
    label = case.get("name", f"case[{index}]")
    participants = case.get("participants")
    if not isinstance(participants, list) or not participants:
        raise ValidationError(f"{label}: participants must be a non-empty list")
    config = _config_for(case)
    taxonomy = _taxonomy_for(case)
    issue_doc = case.get("issue", {})
    issue = Issue(
        id=issue_doc.get("id", "i1"),
        event_id=issue_doc.get("event", "ev1"),
        title=issue_doc.get("title", "simulated issue"),
        topic=issue_doc.get("topic"),
        status=IssueStatus.OPEN,
        options=tuple(issue_doc.get("options", ("yes", "no"))),
    )
    delegations = Delegations(
        Delegation(
            d["source"],
            d["target"],
            DelegationScope.from_dict(d.get("scope", {"kind": "global"})),
        )
        for d in case.get("delegations", [])
    )
    votes = {}
    for pid, choice in case.get("votes", {}).items():
        options = tuple(choice) if isinstance(choice, list) else (choice,)
        votes[pid] = Ballot(options=options)
    tally = resolve_issue(
        issue,
        participants=participants,
        delegations=delegations,
        votes=votes,
        taxonomy=taxonomy,
        config=config,
    )
    expect = case.get("expect", {})
    actual = tally.to_dict()
    actual["abstainers"] = sorted(actual["abstainers"])
    if "abstainers" in expect:
        expect = dict(expect)
        expect["abstainers"] = sorted(expect["abstainers"])
    _match(expect, actual, label, failures)


def _run_script(doc: dict, workdir: Optional[Path], failures: list[str]) -> int:
    steps = doc.get("script", [])
    if not steps:
        return 0
    org = doc.get("org", "scenario")
    if workdir is None:
        tmp = tempfile.TemporaryDirectory(prefix="liquidgov-sim-")
        root = Path(tmp.name)
    else:
        root = Path(workdir)
        root.mkdir(parents=True, exist_ok=True)
    store = OrgStore(root / org, org=org, fsync=False)
    for n, step in enumerate(steps):
        if not isinstance(step, dict) or "kind" not in step:
            raise ValidationError(f"script[{n}]: each step needs a kind")
        payload = step.get("payload", {})
        if step["kind"] == "config_set" and "preset" in step:
            # sugar: name a preset instead of inlining the whole config
            payload = {"config": apply_preset(step["preset"]).to_dict(),
                       "topics": step.get("topics", [])}
            if "actor" in step:
                payload["actor"] = step["actor"]
        store.append(step["kind"], payload, at=step.get("at"))

    expect = doc.get("expect", {})
    state = store.state
    if "seq" in expect and expect["seq"] != state.seq:
        failures.append(f"expect.seq: expected {expect['seq']}, got {state.seq}")
    if "digest" in expect and expect["digest"] != state.digest():
        failures.append(f"expect.digest: expected {expect['digest']}, got {state.digest()}")
    for iid, want in expect.get("tallies", {}).items():
        tally = store.resolve(iid).to_dict()
        tally["abstainers"] = sorted(tally["abstainers"])
        _match(want, tally, f"expect.tallies.{iid}", failures)
    if "predictions" in expect:
        rows = {r["prediction"]: r for r in prediction_registry(state)}
        for pid, want in expect["predictions"].items():
            if pid not in rows:
                failures.append(f"expect.predictions.{pid}: no such prediction")
            else:
                _match(want, rows[pid], f"expect.predictions.{pid}", failures)
    for pid, want in expect.get("track_records", {}).items():
        _match(want, track_record(state, pid), f"expect.track_records.{pid}", failures)
    return len(steps)


def run_fixture(doc: dict, workdir: Optional[Path] = None) -> SimulationReport:
    report = SimulationReport(name=doc.get("name", "unnamed"))
    cases = doc.get("cases", [])
    if not isinstance(cases, list):
        raise ValidationError("cases must be a list")
    if not cases and not doc.get("script"):
        raise ValidationError("fixture has neither cases nor a script")
    for i, case in enumerate(cases):
        _run_case(case, i, report.failures)
        report.cases_run += 1
    report.events_applied = _run_script(doc, workdir, report.failures)
    return report


def run_file(path: str | Path, workdir: Optional[Path] = None) -> SimulationReport:
    return run_fixture(load_fixture(path), workdir)
