"""``commitment-lab`` command line entry point."""

from __future__ import annotations

import argparse
import json
import os
import sys
import tempfile
from pathlib import Path

from .game import BUILTIN_GAMES
from .mediation import BUILTIN_DEVICES
from .runner import KINDS, ScenarioError, config_hash, parse_config, report_to_csv, report_to_json, run_scenario

OUTPUT_DIR_ENV = "COMMITMENT_LAB_OUTPUT_DIR"


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="commitment-lab", description="Commitment-device game experiments.")
    parser.add_argument("--list-games", action="store_true", help="list built-in games and exit")
    parser.add_argument("--list-devices", action="store_true", help="list built-in signal devices and exit")
    sub = parser.add_subparsers(dest="kind", metavar="KIND")
    for kind in KINDS:
        p = sub.add_parser(kind, help=f"run the {kind} scenario")
        p.add_argument("--config", required=True, type=Path, help="scenario JSON file")
        p.add_argument("--seed", type=int, help="override the config's master seed")
        p.add_argument("--out", type=Path, help=f"output file, - for stdout (default: stdout, or ${OUTPUT_DIR_ENV}/)")
        p.add_argument("--format", choices=("csv", "json"), help="override the config's output format")
    return parser


def _fail(kind: str, message: str, fields=(), code: int = 2) -> int:
    err = {"error": {"type": kind, "message": message, "fields": [{"path": p, "message": m} for p, m in fields]}}
    print(json.dumps(err), file=sys.stderr)
    return code


def _write_atomic(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.list_games or args.list_devices:
        if args.list_games:
            for name in sorted(BUILTIN_GAMES):
                g = BUILTIN_GAMES[name]()
                print(f"{name}\t{' x '.join(str(m) for m in g.n_actions)}\t{g.action_labels}")
        if args.list_devices:
            for name in sorted(BUILTIN_DEVICES):
                d = BUILTIN_DEVICES[name]()
                print(f"{name}\t{d.signals}")
        return 0
    if args.kind is None:
        return _fail("usage", "a scenario kind is required", [("kind", f"one of {list(KINDS)}")])

    try:
        doc = json.loads(args.config.read_text())
    except FileNotFoundError:
        return _fail("config", f"config file {args.config} not found", [("--config", "not found")])
    except json.JSONDecodeError as e:
        return _fail("config", f"config is not valid JSON: {e}", [("--config", "invalid JSON")])
    if isinstance(doc, dict):
        if args.seed is not None:
            doc["seed"] = args.seed
        if args.format is not None:
            doc["format"] = args.format
    try:
        cfg = parse_config(doc, args.kind)
        report = run_scenario(cfg)
    except ScenarioError as e:
        return _fail("config", str(e), e.fields)
    except (ValueError, KeyError, IndexError) as e:
        return _fail("runtime", f"{type(e).__name__}: {e}", code=1)

    text = report_to_csv(report) if cfg.format == "csv" else report_to_json(report)
    out = args.out or (Path(cfg.output) if cfg.output else None)
    if out is None and os.environ.get(OUTPUT_DIR_ENV):
        out = Path(os.environ[OUTPUT_DIR_ENV]) / f"{cfg.kind}-{config_hash(cfg)[:12]}.{cfg.format}"
    try:
        if out is None or str(out) == "-":
            sys.stdout.write(text)
        else:
            _write_atomic(out, text)
    except OSError as e:
        return _fail("io", str(e), code=1)
    return 0


if __name__ == "__main__":
    sys.exit(main())
