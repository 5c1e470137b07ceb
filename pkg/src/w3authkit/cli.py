"""Command-line entry point: ``w3authkit scan|sim|guard|fixtures``."""

from __future__ import annotations

import argparse
import json
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path
from typing import Optional, Sequence

from .checker import RiskLevel, Scanner, key_pool
from .flexrequest import DEFAULT_LIMITER, FlexRequestError, Policy, load_targets
from .guard import StoreError, TemplateStore, corpus_document, guard_corpus
from .report import reports_to_json, reports_to_markdown
from .vulnsim import (
    SimServer,
    dump_profiles,
    fixture_table2,
    load_profiles,
    table1_profiles,
    target_document,
)

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_RISK = 2
EXIT_RED = 3
EXIT_YELLOW = 4

FIXTURE_KINDS = ("table2", "table1", "guard-corpus")


def _fail(msg: str) -> int:
    print(f"w3authkit: {msg}", file=sys.stderr)
    return EXIT_ERROR


def _write(text: str, out: Optional[str]) -> None:
    if out in (None, "-"):
        sys.stdout.write(text)
    else:
        Path(out).write_text(text, encoding="utf-8")


def _nonneg(value: str) -> int:
    n = int(value)
    if n < 0:
        raise argparse.ArgumentTypeError("must be >= 0")
    return n


def _positive(value: str) -> int:
    n = int(value)
    if n <= 0:
        raise argparse.ArgumentTypeError("must be > 0")
    return n


# -- scan


def cmd_scan(args: argparse.Namespace) -> int:
    try:
        targets = load_targets(Path(args.targets).read_text(encoding="utf-8"))
    except OSError as exc:
        return _fail(f"cannot read targets: {exc}")
    except FlexRequestError as exc:
        return _fail(str(exc))
    if not targets:
        return _fail("no targets")
    policy = Policy(
        timeout=args.timeout / 1000.0,
        min_interval=None if args.interval is None else args.interval / 1000.0,
    )
    keys = key_pool(args.seed, 3)

    def one(target):
        return Scanner(policy, keys=keys, limiter=DEFAULT_LIMITER).scan(target)

    with ThreadPoolExecutor(max_workers=args.jobs) as pool:
        reports = list(pool.map(one, targets))
    metas = [t.meta for t in targets]
    text = reports_to_markdown(reports, metas) if args.format == "markdown" else reports_to_json(reports, metas)
    _write(text, args.out)
    if any(r.inconclusive for r in reports):
        return EXIT_ERROR
    if any(r.risk >= RiskLevel.MEDIUM for r in reports):
        return EXIT_RISK
    return EXIT_OK


# -- sim


def cmd_sim(args: argparse.Namespace) -> int:
    if args.profiles:
        try:
            profiles = load_profiles(Path(args.profiles).read_text(encoding="utf-8"))
        except (OSError, ValueError, TypeError) as exc:
            return _fail(f"cannot load profiles: {exc}")
    else:
        profiles = fixture_table2()
    if not profiles:
        return _fail("no profiles to serve")
    try:
        server = SimServer(profiles, host=args.host, port=args.port)
    except OSError as exc:
        return _fail(f"cannot bind {args.host}:{args.port}: {exc}")
    if args.targets:
        Path(args.targets).write_text(target_document(profiles, server.root_url), encoding="utf-8")
    for p in profiles:
        print(f"{p.label}\t{server.base_url(p.label)}", flush=True)
    try:
        server.serve_forever()
    except KeyboardInterrupt:
        pass
    finally:
        server.stop()
    return EXIT_OK


# -- guard


def _read_message(args: argparse.Namespace) -> str:
    if args.message is not None:
        return args.message
    if args.message_file and args.message_file != "-":
        return Path(args.message_file).read_text(encoding="utf-8")
    return sys.stdin.read()


def cmd_guard(args: argparse.Namespace) -> int:
    store_path = Path(args.store)
    try:
        message = _read_message(args)
    except OSError as exc:
        return _fail(f"cannot read message: {exc}")
    if args.action == "record":
        try:
            store = TemplateStore.load(store_path) if store_path.exists() else TemplateStore()
            store.record(args.origin, message)
            store.save(store_path)
        except (OSError, StoreError) as exc:
            return _fail(str(exc))
        print(json.dumps({"recorded": args.origin, "domains": len(store)}))
        return EXIT_OK
    if not store_path.exists():
        return _fail(f"no template store at {store_path}")
    try:
        store = TemplateStore.load(store_path)
    except (OSError, StoreError) as exc:
        return _fail(str(exc))
    decision = store.check(message, args.origin)
    print(json.dumps(decision.to_dict()))
    if decision.red is not None:
        return EXIT_RED
    if decision.yellow:
        return EXIT_YELLOW
    return EXIT_OK


# -- fixtures


def cmd_fixtures(args: argparse.Namespace) -> int:
    if args.kind not in FIXTURE_KINDS:
        return _fail(f"unknown fixture kind {args.kind!r} (choose from {', '.join(FIXTURE_KINDS)})")
    if args.kind == "guard-corpus":
        _write(corpus_document(guard_corpus(seed=args.seed)), args.out)
        return EXIT_OK
    profiles = fixture_table2() if args.kind == "table2" else table1_profiles()
    if args.out in (None, "-"):
        return _fail(f"{args.kind} needs --out DIR for the profile and target files")
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    (out / "profiles.json").write_text(dump_profiles(profiles), encoding="utf-8")
    (out / "targets.json").write_text(target_document(profiles, args.base_url), encoding="utf-8")
    print(f"{len(profiles)} profiles written to {out}")
    return EXIT_OK


# -- parser


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="w3authkit", description="Web3 login security toolkit.")
    sub = parser.add_subparsers(dest="command", required=True)

    scan = sub.add_parser("scan", help="probe login targets and report their weaknesses")
    scan.add_argument("--targets", required=True, help="collection file describing the targets")
    scan.add_argument("--out", help="report file (default: stdout)")
    scan.add_argument("--format", choices=("json", "markdown"), default="json")
    scan.add_argument(
        "--interval", type=_nonneg, default=None,
        help="minimum ms between requests to one host (default: 60000, or 0 for loopback hosts)",
    )
    scan.add_argument("--timeout", type=_positive, default=10000, help="per-request timeout in ms")
    scan.add_argument("--seed", type=int, default=0, help="seed for the test wallets")
    scan.add_argument("--jobs", type=_positive, default=1, help="targets scanned in parallel")
    scan.set_defaults(func=cmd_scan)

    sim = sub.add_parser("sim", help="serve simulated login deployments")
    sim.add_argument("--profiles", help="profile file (default: the 29-site fixture fleet)")
    sim.add_argument("--host", default="127.0.0.1")
    sim.add_argument("--port", type=_nonneg, default=8545)
    sim.add_argument("--targets", help="also write a matching collection file here")
    sim.set_defaults(func=cmd_sim)

    guard = sub.add_parser("guard", help="record logins or check a signature request")
    guard.add_argument("action", choices=("record", "check"))
    guard.add_argument("--store", required=True, help="template store file")
    guard.add_argument("--origin", required=True, help="domain asking for the signature")
    src = guard.add_mutually_exclusive_group()
    src.add_argument("--message", help="message text")
    src.add_argument("--message-file", help="file holding the message ('-' for stdin)")
    guard.set_defaults(func=cmd_guard)

    fx = sub.add_parser("fixtures", help="write fixture files")
    fx.add_argument("kind", help=f"one of: {', '.join(FIXTURE_KINDS)}")
    fx.add_argument("--out", help="output directory (table2, table1) or file (guard-corpus)")
    fx.add_argument("--base-url", default="http://127.0.0.1:8545", help="simulator root for target files")
    fx.add_argument("--seed", type=int, default=0)
    fx.set_defaults(func=cmd_fixtures)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
