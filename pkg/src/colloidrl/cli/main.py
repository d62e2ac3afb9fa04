"""``colloidrl`` command line: run, validate, serve and replay."""

from __future__ import annotations

import argparse
import logging
import socket
import sys
from typing import List, Optional

from .build import make_force_function, make_trainer, output_directory, serve_factory
from .config import ConfigError, load_config, parse_address

EXIT_OK = 0
EXIT_RUNTIME = 1
EXIT_CONFIG = 2

log = logging.getLogger("colloidrl")


def _load(path, seed):
    cfg = load_config(path)
    if seed is not None:
        cfg = cfg.model_copy(update={"seed": seed})
    return cfg


def _built(fn, *args):
    """Errors raised while building objects from a valid schema are config errors."""
    try:
        return fn(*args)
    except ValueError as exc:
        raise ConfigError([str(exc)]) from exc


def cmd_run(args) -> int:
    cfg = _load(args.config, args.seed)
    trainer = _built(make_trainer, cfg)
    history = trainer.train()
    out = output_directory(cfg)
    print(f"{len(history)} episode(s) written to {out}")
    if trainer.interrupted:
        print("interrupted; outputs closed cleanly", file=sys.stderr)
        return 130
    return EXIT_OK


def _reachable(host: str, port: int, timeout: float = 1.0) -> bool:
    try:
        with socket.create_connection((host, port), timeout=timeout):
            return True
    except OSError:
        return False


def cmd_validate(args) -> int:
    cfg = _load(args.config, args.seed)
    # builds every agent, which catches errors the schema cannot see
    _built(make_force_function, cfg)
    if cfg.engine.kind == "remote":
        host, port = parse_address(cfg.engine.address)
        if not _reachable(host, port):
            print(f"warning: remote environment {host}:{port} is not reachable right now", file=sys.stderr)
    print("OK")
    return EXIT_OK


def cmd_serve(args) -> int:
    from ..remote.server import LoopbackServer

    cfg = _load(args.config, args.seed)
    host, port = parse_address(args.bind)
    try:
        server = LoopbackServer(serve_factory(cfg, args.seed), host, port, args.max_slices)
    except OSError as exc:
        print(f"error: cannot bind {args.bind}: {exc.strerror}", file=sys.stderr)
        return EXIT_RUNTIME
    print(f"serving on {host}:{server.address[1]}", flush=True)
    try:
        server.serve(args.max_connections)
    except KeyboardInterrupt:
        pass
    finally:
        server.shutdown()
    return EXIT_OK


def cmd_replay(args) -> int:
    from ..orchestrate.persistence import trajectory_stats

    stats = trajectory_stats(args.trajectory)
    if args.stats:
        for k, v in stats.items():
            print(f"{k}: {v}")
    else:
        print(f"{stats['rows']} rows, {stats['particles']} particles, complete={stats['complete']}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="colloidrl", description=__doc__)
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    r = sub.add_parser("run", help="simulate or train as configured")
    r.add_argument("config")
    r.add_argument("--seed", type=int)
    r.set_defaults(func=cmd_run)

    v = sub.add_parser("validate", help="check a configuration without running it")
    v.add_argument("config")
    v.add_argument("--seed", type=int)
    v.set_defaults(func=cmd_validate)

    s = sub.add_parser("serve", help="expose the configured local engine over TCP")
    s.add_argument("config")
    s.add_argument("--bind", default="127.0.0.1:7878")
    s.add_argument("--seed", type=int)
    s.add_argument("--max-slices", type=int, default=None)
    s.add_argument("--max-connections", type=int, default=None)
    s.set_defaults(func=cmd_serve)

    rp = sub.add_parser("replay", help="summarise a trajectory CSV")
    rp.add_argument("trajectory")
    rp.add_argument("--stats", action="store_true")
    rp.set_defaults(func=cmd_replay)
    return p


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except ConfigError as exc:
        print("invalid configuration:", file=sys.stderr)
        for line in exc.problems:
            print(f"  {line}", file=sys.stderr)
        return EXIT_CONFIG
    except Exception as exc:  # noqa: BLE001 - surface any runtime failure as exit 1
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
