"""Command line entry points.

Operator tooling, not a participant surface: subcommands act directly on an
org's data directory with no session layer, so nothing here enforces ballot
visibility. The HTTP gateway is the participant-facing boundary.

Exit codes are part of the contract:

* 0: success
* 1: unexpected failure
* 2: log integrity failure (broken hash chain, truncated record)
* 3: the request was understood and refused (validation, unknown id, denied)
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path
from typing import Optional

from . import __version__
from .events import IntegrityError, LogFile
from .model import AuthorizationError, NotFoundError, ValidationError
from .presets import PRESET_NAMES
from .store import OrgStore

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_INTEGRITY = 2
EXIT_REFUSED = 3


def _org_dir(path: str) -> Path:
    p = Path(path)
    if p.is_file():  # given the log itself; the org dir is its parent
        return p.parent
    return p


def _open_store(path: str) -> OrgStore:
    d = _org_dir(path)
    if not (d / "events.log").exists():
        raise NotFoundError(f"no events.log under {d}")
    return OrgStore(d)


def _print(obj) -> None:
    print(json.dumps(obj, indent=2, sort_keys=True))


# -- subcommands --------------------------------------------------------------


def cmd_init(args) -> int:
    from .presets import apply_preset

    directory = Path(args.directory)
    if (directory / "events.log").exists():
        print(f"refusing to reinitialize {directory}", file=sys.stderr)
        return EXIT_REFUSED
    if args.config:
        config = json.loads(Path(args.config).read_text())
    else:
        config = apply_preset(args.preset).to_dict()
    topics = json.loads(Path(args.topics).read_text()) if args.topics else []
    store = OrgStore(directory, org=args.org)
    store.append("config_set", {"config": config, "topics": topics})
    store.append(
        "participant_joined",
        {
            "participant": args.founder,
            "display_name": args.display_name or args.founder,
            "roles": ["administrator", "proponent"],
        },
    )
    # bootstrap a session so `serve` on this directory is immediately usable
    from .service import Gateway

    token = Gateway(directory.parent, fsync=False).mint_session(directory.name, args.founder)
    if directory.name != args.org:
        print(
            f"note: directory name {directory.name!r} differs from org id {args.org!r}; "
            "the HTTP API addresses orgs by directory name",
            file=sys.stderr,
        )
    print(f"initialized org {args.org!r} at {directory}")
    print(f"founder: {args.founder} (administrator, proponent)")
    print(f"session token: {token}")
    return EXIT_OK


def cmd_serve(args) -> int:
    import uvicorn

    from .service import create_app

    app = create_app(args.directory)
    uvicorn.run(app, host=args.host, port=args.port, log_level="info")
    return EXIT_OK


def cmd_verify_log(args) -> int:
    d = _org_dir(args.path)
    log_path = d / "events.log" if (d / "events.log").exists() else Path(args.path)
    if not log_path.exists():
        print(f"no log at {args.path}", file=sys.stderr)
        return EXIT_REFUSED
    log = LogFile(log_path)
    events = log.read_events()  # raises IntegrityError on structural damage
    bad = log.verify()
    if bad is not None:
        print(f"FAIL: chain breaks at seq {bad}")
        return EXIT_INTEGRITY
    head = events[-1].hash if events else "(empty)"
    print(f"ok: {len(events)} events, head {head}")
    return EXIT_OK


def cmd_resolve(args) -> int:
    store = _open_store(args.directory)
    if args.participant:
        from .awareness import resolve_chain

        _print(resolve_chain(store.state, args.participant, args.issue))
        return EXIT_OK
    tally = store.resolve(args.issue)
    _print(
        {
            "issue": args.issue,
            "weights": tally.weights,
            "abstainers": sorted(tally.abstainers),
            "cast_weight": tally.cast_weight,
        }
    )
    return EXIT_OK


def cmd_tally(args) -> int:
    store = _open_store(args.directory)
    tally = store.resolve(args.issue).to_dict()
    frozen = store.state.outcomes.get(args.issue)
    if args.json:
        tally["frozen"] = frozen is not None
        _print(tally)
        return EXIT_OK
    status = store.state.issues[args.issue].status.value
    print(f"issue {args.issue} [{status}]"
          + (f", closed at {frozen.closed_at}" if frozen else " (live figures)"))
    for option, total in sorted(tally["option_totals"].items(), key=lambda kv: (-kv[1], kv[0])):
        print(f"  {option:<20} {total}")
    print(f"  abstaining: {len(tally['abstainers'])}")
    print(f"  outcome: {tally['outcome']}" + (f" -> {tally['winner']}" if tally["winner"] else ""))
    if not tally["quorum_met"]:
        print("  quorum not met")
    return EXIT_OK


def cmd_export(args) -> int:
    store = _open_store(args.directory)
    if args.output:
        count = store.export_jsonl(Path(args.output))
        print(f"exported {count} events to {args.output}")
    else:
        import tempfile

        with tempfile.NamedTemporaryFile(mode="r", suffix=".jsonl") as tmp:
            store.export_jsonl(Path(tmp.name))
            sys.stdout.write(Path(tmp.name).read_text())
    return EXIT_OK


def cmd_simulate(args) -> int:
    from .scenario import run_file

    report = run_file(args.fixture, workdir=Path(args.workdir) if args.workdir else None)
    print(report.summary())
    return EXIT_OK if report.ok else EXIT_ERROR


# -- parser -------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="liquidgov",
        description="Event-sourced liquid democracy engine",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("init", help="create a new org data directory")
    p.add_argument("directory")
    p.add_argument("--org", required=True)
    group = p.add_mutually_exclusive_group(required=True)
    group.add_argument("--preset", choices=sorted(PRESET_NAMES))
    group.add_argument("--config", help="path to a full config JSON file")
    p.add_argument("--topics", help="path to a topics JSON file")
    p.add_argument("--founder", required=True)
    p.add_argument("--display-name")
    p.set_defaults(func=cmd_init)

    p = sub.add_parser("serve", help="serve the /v1 HTTP API over a data directory")
    p.add_argument("directory", help="directory holding one subdirectory per org")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8400)
    p.set_defaults(func=cmd_serve)

    p = sub.add_parser("verify-log", help="verify an event log's hash chain")
    p.add_argument("path", help="org directory or events.log file")
    p.set_defaults(func=cmd_verify_log)

    p = sub.add_parser("resolve", help="resolve delegation weights for an issue")
    p.add_argument("directory")
    p.add_argument("--issue", required=True)
    p.add_argument("--participant", help="trace this participant's chain instead")
    p.set_defaults(func=cmd_resolve)

    p = sub.add_parser("tally", help="tally an issue (frozen outcome if closed)")
    p.add_argument("directory")
    p.add_argument("--issue", required=True)
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_tally)

    p = sub.add_parser("export", help="export the log as JSON lines")
    p.add_argument("directory")
    p.add_argument("--output", "-o")
    p.set_defaults(func=cmd_export)

    p = sub.add_parser("simulate", help="run a scenario fixture and check expectations")
    p.add_argument("fixture", help="JSON or YAML fixture file")
    p.add_argument("--workdir", help="keep script output under this directory")
    p.set_defaults(func=cmd_simulate)

    return parser


def main(argv: Optional[list[str]] = None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as exc:
        # argparse exits with 2 on usage errors; 2 means integrity failure here
        return EXIT_OK if exc.code in (0, None) else EXIT_ERROR
    try:
        return args.func(args)
    except IntegrityError as exc:
        print(f"integrity failure: {exc}", file=sys.stderr)
        return EXIT_INTEGRITY
    except (ValidationError, NotFoundError, AuthorizationError) as exc:
        # NotFoundError is a KeyError; str() would add quotes
        message = exc.args[0] if exc.args else str(exc)
        print(f"refused: {message}", file=sys.stderr)
        return EXIT_REFUSED
    except json.JSONDecodeError as exc:
        print(f"refused: bad JSON input: {exc}", file=sys.stderr)
        return EXIT_REFUSED
    except Exception as exc:  # noqa: BLE001 - the CLI boundary reports, not raises
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
