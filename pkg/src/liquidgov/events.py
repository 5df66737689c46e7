"""Append-only, hash-chained event log.

Every state change in an organization is one event. Events are sealed with a
monotone sequence number and a digest chaining to the predecessor, then written
as length-prefixed canonical-JSON records to a single append-only file. The
chain makes any in-place edit or reordering detectable; nothing here ever
rewrites a byte once written.

File layout: a header record (format name, schema version, digest algorithm,
organization id), then one record per event. Records are a 4-byte big-endian
length followed by canonical JSON (sorted keys, no whitespace, UTF-8). The
canonical encoding is what gets hashed, so hashes are reproducible from the
file alone. A JSON-lines export mirrors the binary log for auditability.
"""

from __future__ import annotations

import hashlib
import json
import os
import struct
import threading
from dataclasses import dataclass
from datetime import datetime, timezone
from enum import Enum
from pathlib import Path
from typing import Iterable, Mapping, Optional


class EventKind(str, Enum):
    PARTICIPANT_JOINED = "participant_joined"
    DELEGATION_UPSERTED = "delegation_upserted"
    DELEGATION_REVOKED = "delegation_revoked"
    VOTE_CAST = "vote_cast"
    EVENT_CREATED = "event_created"
    ISSUE_ADDED = "issue_added"
    ISSUE_CANCELLED = "issue_cancelled"
    BOOKLET_SECTION_SET = "booklet_section_set"
    PROPOSAL_SUBMITTED = "proposal_submitted"
    CANDIDACY_PUBLISHED = "candidacy_published"
    CANDIDACY_VERSION_ADDED = "candidacy_version_added"
    PREDICTION_REGISTERED = "prediction_registered"
    PREDICTION_EVALUATED = "prediction_evaluated"
    SURVEY_OPENED = "survey_opened"
    SURVEY_RESPONSE = "survey_response"
    NOTE_SUBMITTED = "note_submitted"
    NOTE_RATED = "note_rated"
    CONFIG_SET = "config_set"
    PHASE_ADVANCED = "phase_advanced"


GENESIS_HASH = "0" * 64
_FORMAT = "liquidgov-log"
_SCHEMA_VERSION = 1
_ALGORITHM = "sha256"


class IntegrityError(Exception):
    """The hash chain does not verify; ``first_bad_seq`` names the break."""

    def __init__(self, first_bad_seq: int, reason: str):
        super().__init__(f"integrity failure at seq {first_bad_seq}: {reason}")
        self.first_bad_seq = first_bad_seq
        self.reason = reason


def canonical_json(obj) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"), ensure_ascii=True)


def utc_now_iso() -> str:
    return datetime.now(timezone.utc).strftime("%Y-%m-%dT%H:%M:%S.%fZ")


def parse_ts(value: str) -> datetime:
    if value.endswith("Z"):
        value = value[:-1] + "+00:00"
    dt = datetime.fromisoformat(value)
    if dt.tzinfo is None:
        dt = dt.replace(tzinfo=timezone.utc)
    return dt


@dataclass(frozen=True)
class Event:
    seq: int
    org: str
    kind: EventKind
    payload: Mapping
    at: str
    prev_hash: str
    hash: str

    def to_dict(self) -> dict:
        return {
            "seq": self.seq,
            "org": self.org,
            "kind": self.kind.value,
            "payload": self.payload,
            "at": self.at,
            "prev_hash": self.prev_hash,
            "hash": self.hash,
        }

    @classmethod
    def from_dict(cls, d: Mapping) -> Event:
        return cls(
            seq=int(d["seq"]),
            org=d["org"],
            kind=EventKind(d["kind"]),
            payload=d["payload"],
            at=d["at"],
            prev_hash=d["prev_hash"],
            hash=d["hash"],
        )


def event_hash(seq: int, kind: EventKind, payload: Mapping, at: str, prev_hash: str) -> str:
    body = canonical_json(
        {"seq": seq, "kind": kind.value, "payload": payload, "at": at, "prev_hash": prev_hash}
    )
    return hashlib.sha256(body.encode()).hexdigest()


def seal_event(
    org: str,
    seq: int,
    kind: EventKind,
    payload: Mapping,
    at: str,
    prev_hash: str,
) -> Event:
    digest = event_hash(seq, kind, payload, at, prev_hash)
    return Event(seq=seq, org=org, kind=kind, payload=payload, at=at, prev_hash=prev_hash, hash=digest)


def verify_chain(events: Iterable[Event]) -> Optional[int]:
    """Recompute every digest and link. Returns the first bad seq, or None if ok."""
    prev = GENESIS_HASH
    expected_seq = 1
    for e in events:
        if e.seq != expected_seq:
            return expected_seq
        if e.prev_hash != prev:
            return e.seq
        if event_hash(e.seq, e.kind, e.payload, e.at, e.prev_hash) != e.hash:
            return e.seq
        prev = e.hash
        expected_seq += 1
    return None


class LogFile:
    """Length-prefixed record file holding one organization's event chain.

    A single writer appends; readers may stream concurrently because records,
    once written, never change. Appends can optionally fsync for durability
    before the acknowledgment (on by default).
    """

    def __init__(self, path: str | Path, org: Optional[str] = None, fsync: bool = True):
        self.path = Path(path)
        self.fsync = fsync
        self._lock = threading.Lock()
        if self.path.exists() and self.path.stat().st_size > 0:
            header = self._read_header()
            if header.get("format") != _FORMAT:
                raise ValueError(f"{self.path} is not a {_FORMAT} file")
            if header.get("algorithm") != _ALGORITHM:
                raise ValueError(f"unsupported digest algorithm {header.get('algorithm')!r}")
            self.org = header["org"]
            if org is not None and org != self.org:
                raise ValueError(f"log belongs to org {self.org!r}, not {org!r}")
        else:
            if org is None:
                raise ValueError("creating a new log requires an org id")
            self.org = org
            self.path.parent.mkdir(parents=True, exist_ok=True)
            header = {
                "format": _FORMAT,
                "version": _SCHEMA_VERSION,
                "algorithm": _ALGORITHM,
                "org": org,
            }
            self._append_bytes(canonical_json(header).encode())

    # -- record level -------------------------------------------------------

    def _append_bytes(self, record: bytes) -> None:
        with self._lock, open(self.path, "ab") as f:
            f.write(struct.pack(">I", len(record)))
            f.write(record)
            f.flush()
            if self.fsync:
                os.fsync(f.fileno())

    def _iter_records(self):
        with open(self.path, "rb") as f:
            while True:
                prefix = f.read(4)
                if not prefix:
                    return
                if len(prefix) < 4:
                    raise IntegrityError(0, "truncated length prefix")
                (length,) = struct.unpack(">I", prefix)
                body = f.read(length)
                if len(body) < length:
                    raise IntegrityError(0, "truncated record body")
                yield body

    def _read_header(self) -> dict:
        for body in self._iter_records():
            return json.loads(body)
        raise ValueError("empty log file")

    # -- event level --------------------------------------------------------

    def append_event(self, event: Event) -> None:
        self._append_bytes(canonical_json(event.to_dict()).encode())

    def read_events(self) -> list[Event]:
        events = []
        for i, body in enumerate(self._iter_records()):
            if i == 0:
                continue  # header
            events.append(Event.from_dict(json.loads(body)))
        return events

    def last_event(self) -> Optional[Event]:
        last = None
        for e in self.read_events():
            last = e
        return last

    def verify(self) -> Optional[int]:
        return verify_chain(self.read_events())

    def export_jsonl(self, out_path: str | Path) -> int:
        """Mirror the log as JSON lines (header first). Returns events written."""
        out = Path(out_path)
        count = 0
        with open(out, "w") as f:
            for i, body in enumerate(self._iter_records()):
                f.write(canonical_json(json.loads(body)) + "\n")
                if i > 0:
                    count += 1
        return count
