"""Organization store: one event log plus its materialized state.

``OrgStore`` is the write path every front end shares. An append validates the
draft against current state, seals it into the hash chain, writes it durably,
then applies it; a failed validation writes nothing. A process-wide lock
serializes writers, which is what makes seq assignment race-free.

Snapshots are pure caches: every ``snapshot_interval`` events the folded state
is dumped next to the log together with the hash of the event it covers. On
open the chain is always verified in full; the snapshot only saves re-folding
the prefix, and is discarded whenever it disagrees with the log.
"""

from __future__ import annotations

import json
import threading
from pathlib import Path
from typing import Mapping, Optional

from .events import Event, EventKind, GENESIS_HASH, IntegrityError, LogFile, seal_event, utc_now_iso
from .resolution import ResolvedTally, resolve_issue
from .state import State, replay


class OrgStore:
    SNAPSHOT_INTERVAL = 10_000

    def __init__(
        self,
        path: str | Path,
        org: Optional[str] = None,
        fsync: bool = True,
        snapshot_interval: int = SNAPSHOT_INTERVAL,
        verify_on_open: bool = True,
    ):
        self.dir = Path(path)
        self.dir.mkdir(parents=True, exist_ok=True)
        self.log = LogFile(self.dir / "events.log", org=org, fsync=fsync)
        self.org = self.log.org
        self.snapshot_interval = snapshot_interval
        self._lock = threading.Lock()
        self._tally_cache: dict[tuple[int, str], ResolvedTally] = {}
        events = self.log.read_events()
        if verify_on_open:
            bad = self._verify_events(events)
            if bad is not None:
                raise IntegrityError(bad, "log failed verification on open")
        self.state = self._restore(events)
        self._last = events[-1] if events else None

    @staticmethod
    def _verify_events(events) -> Optional[int]:
        from .events import verify_chain

        return verify_chain(events)

    # -- snapshot cache ------------------------------------------------------

    @property
    def _snapshot_path(self) -> Path:
        return self.dir / "snapshot.json"

    def _restore(self, events) -> State:
        start = 0
        state: Optional[State] = None
        snap_path = self._snapshot_path
        if snap_path.exists():
            try:
                snap = json.loads(snap_path.read_text())
                seq = snap["seq"]
                if (
                    0 < seq <= len(events)
                    and events[seq - 1].hash == snap["event_hash"]
                    and snap.get("org") == self.org
                ):
                    candidate = replay(self.org, events[:seq], strict=False)
                    if candidate.digest() == snap["state_digest"]:
                        state, start = candidate, seq
            except (KeyError, ValueError, json.JSONDecodeError):
                state = None  # malformed snapshot; fold from scratch
        if state is None:
            state, start = State(self.org), 0
        for e in events[start:]:
            state.apply(e)
        return state

    def _maybe_snapshot(self, event: Event) -> None:
        if self.snapshot_interval <= 0 or event.seq % self.snapshot_interval != 0:
            return
        snap = {
            "org": self.org,
            "seq": event.seq,
            "event_hash": event.hash,
            "state_digest": self.state.digest(),
        }
        tmp = self._snapshot_path.with_suffix(".json.tmp")
        tmp.write_text(json.dumps(snap))
        tmp.replace(self._snapshot_path)

    # -- write path ----------------------------------------------------------

    def append(self, kind: EventKind | str, payload: Mapping, at: Optional[str] = None) -> Event:
        """Validate, seal, persist, and apply one event. Atomic per event:
        nothing is written unless validation passes."""
        kind = EventKind(kind)
        at = at or utc_now_iso()
        with self._lock:
            self.state.validate(kind, payload, at)
            prev = self._last.hash if self._last is not None else GENESIS_HASH
            event = seal_event(
                org=self.org,
                seq=self.state.seq + 1,
                kind=kind,
                payload=dict(payload),
                at=at,
                prev_hash=prev,
            )
            self.log.append_event(event)
            self.state.apply(event)
            self._last = event
            self._tally_cache.clear()
            self._maybe_snapshot(event)
            return event

    # -- read path -----------------------------------------------------------

    def events(self) -> list[Event]:
        return self.log.read_events()

    def verify(self) -> Optional[int]:
        return self.log.verify()

    def export_jsonl(self, out_path: str | Path) -> int:
        return self.log.export_jsonl(out_path)

    def resolve(self, issue_id: str) -> ResolvedTally:
        """Current tally for an issue. A closed issue serves its frozen
        outcome; an open one is resolved against live state and memoized
        until the next append."""
        outcome = self.state.outcomes.get(issue_id)
        if outcome is not None:
            return outcome.tally
        issue = self.state.issues.get(issue_id)
        if issue is None:
            from .model import NotFoundError

            raise NotFoundError(f"unknown issue {issue_id!r}")
        key = (self.state.seq, issue_id)
        cached = self._tally_cache.get(key)
        if cached is not None:
            return cached
        tally = resolve_issue(
            issue=issue,
            participants=set(self.state.participants),
            delegations=self.state.delegations,
            votes=self.state.votes.get(issue_id, {}),
            taxonomy=self.state.taxonomy,
            config=self.state._require_config(),
        )
        self._tally_cache[key] = tally
        return tally
