"""Operator entry points: run, replay, validate, import-osm, serve.

Exit codes: 0 success, 1 validation or experiment failure, 2 usage error.
`validate` performs no writes; the writing commands only touch --out.
"""

from __future__ import annotations

import argparse
import asyncio
import json
import sys

from . import engine as eng
from . import gaze as gz
from . import osm as osm_mod
from .scenario import ScenarioError, load_scenario, validate_scenario
from .telemetry import load_manifest


def _parse_driver(spec: str) -> eng.ScriptedDriver:
    if not spec.startswith("scripted:"):
        raise argparse.ArgumentTypeError(
            f"unknown driver spec {spec!r}; expected scripted:rt=<s>,style=<brake|steer|none>"
        )
    reaction = 2.5
    style = "brake"
    for part in spec[len("scripted:"):].split(","):
        if not part:
            continue
        key, _, value = part.partition("=")
        if key == "rt":
            reaction = float(value)
        elif key == "style":
            style = value
        else:
            raise argparse.ArgumentTypeError(f"unknown driver option {key!r}")
    try:
        return eng.ScriptedDriver(reaction, style)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from exc


def _parse_listen(text: str) -> tuple[str, int]:
    host, _, port = text.rpartition(":")
    if not host or not port.isdigit():
        raise argparse.ArgumentTypeError(f"expected HOST:PORT, got {text!r}")
    return host, int(port)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="torloop",
        description="Deterministic takeover-request driving-simulation kernel",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run_p = sub.add_parser("run", help="run an experiment headlessly")
    run_p.add_argument("--scenario", required=True)
    run_p.add_argument(
        "--driver", type=_parse_driver,
        default=eng.ScriptedDriver(2.5, "brake"),
        help="scripted:rt=<seconds>,style=<brake|steer|none>",
    )
    run_p.add_argument("--out", required=True)
    run_p.add_argument("--seed", type=int, default=None)
    run_p.add_argument("--headless", action="store_true", default=True)
    run_p.add_argument("--max-seconds", type=float, default=None,
                       help="override per-scene duration limit")
    run_p.add_argument("--eyes", default=None, help="eye-sample replay file")
    run_p.add_argument("--force", action="store_true",
                       help="continue even if eye validation fails")

    replay_p = sub.add_parser("replay", help="replay a recorded run")
    replay_p.add_argument("--scenario", required=True)
    replay_p.add_argument("--inputs", required=True,
                          help="recorded run directory (contains run.json)")
    replay_p.add_argument("--eyes", default=None)
    replay_p.add_argument("--out", required=True)

    val_p = sub.add_parser("validate", help="check a scenario file")
    val_p.add_argument("--scenario", required=True)

    osm_p = sub.add_parser("import-osm", help="convert OSM roads to scenario paths")
    osm_p.add_argument("--in", dest="infile", required=True)
    osm_p.add_argument("--out", required=True)

    serve_p = sub.add_parser("serve", help="serve a live session")
    serve_p.add_argument("--scenario", required=True)
    serve_p.add_argument("--listen", type=_parse_listen, default=("127.0.0.1", 8700))
    serve_p.add_argument("--out", required=True)
    serve_p.add_argument("--max-seconds", type=float, default=None)
    return parser


def _load_and_check(path: str):
    scenario = load_scenario(path)
    report = validate_scenario(scenario)
    return scenario, report


def _cmd_run(args) -> int:
    scenario, report = _load_and_check(args.scenario)
    if not report.runnable:
        for finding in report.errors:
            print(f"error [{finding.scene}] {finding.code}: {finding.message}",
                  file=sys.stderr)
        return 1
    config = eng.EngineConfig(seed=args.seed, max_scene_s=args.max_seconds)
    eye_by_tick = None
    validation_samples = None
    if args.eyes:
        samples = gz.read_samples(args.eyes)
        eye_by_tick = {s.tick: s for s in samples}
        validation_samples = samples[: min(len(samples), 90)]
    try:
        artifacts = eng.run_experiment(
            scenario, config, args.out,
            driver=args.driver,
            validation_samples=validation_samples,
            eye_by_tick=eye_by_tick,
            force=args.force,
        )
    except eng.ValidationFailed as exc:
        print(str(exc), file=sys.stderr)
        return 1
    print(f"run {artifacts.run_id}: {len(artifacts.scene_files)} scene file(s) in {args.out}")
    for name, summary in artifacts.summaries.items():
        print(f"  {name}: failures={summary.failures}, ticks={summary.tick_count}")
    return 0


def _cmd_replay(args) -> int:
    scenario, _ = _load_and_check(args.scenario)
    manifest = load_manifest(args.inputs)
    config = eng.EngineConfig(
        seed=manifest.get("seed"),
        tick_rate=manifest.get("tick_rate", eng.TICK_RATE_HZ),
        max_scene_s=manifest.get("max_scene_s"),
    )
    eye_by_tick = None
    if args.eyes:
        eye_by_tick = {s.tick: s for s in gz.read_samples(args.eyes)}
    try:
        artifacts = eng.replay_run(scenario, config, args.inputs, args.out,
                                   eye_by_tick=eye_by_tick)
    except eng.ReplayMismatch as exc:
        print(str(exc), file=sys.stderr)
        return 1
    print(f"replayed run {artifacts.run_id} into {args.out}")
    return 0


def _cmd_validate(args) -> int:
    scenario, report = _load_and_check(args.scenario)
    for finding in report.findings:
        print(f"{finding.severity} [{finding.scene}] {finding.code}: {finding.message}")
    if report.runnable:
        print(f"{scenario.name}: OK "
              f"({len(scenario.scenes)} scene(s), {len(report.warnings)} warning(s))")
        return 0
    return 1


def _cmd_import_osm(args) -> int:
    with open(args.infile, encoding="utf-8") as fh:
        text = fh.read()
    try:
        ways = osm_mod.import_osm(text)
    except osm_mod.OsmParseError as exc:
        print(f"import failed: {exc}", file=sys.stderr)
        return 1
    fragment = {"paths": osm_mod.ways_to_path_defs(ways)}
    with open(args.out, "w", encoding="utf-8") as fh:
        json.dump(fragment, fh, indent=2, sort_keys=True)
        fh.write("\n")
    print(f"imported {len(ways)} highway way(s) into {args.out}")
    return 0


def _cmd_serve(args) -> int:
    from . import server as srv

    scenario, report = _load_and_check(args.scenario)
    if not report.runnable:
        for finding in report.errors:
            print(f"error [{finding.scene}] {finding.code}: {finding.message}",
                  file=sys.stderr)
        return 1
    host, port = args.listen
    config = eng.EngineConfig(mode="live", max_scene_s=args.max_seconds)

    async def main() -> None:
        session, server, runner = await srv.serve(
            scenario, config, args.out, host=host, port=port
        )
        print(f"serving {scenario.name} on ws://{host}:{port}")
        await session.finished.wait()
        server.close()
        await server.wait_closed()

    asyncio.run(main())
    return 0


def dispatch(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "run":
            return _cmd_run(args)
        if args.command == "replay":
            return _cmd_replay(args)
        if args.command == "validate":
            return _cmd_validate(args)
        if args.command == "import-osm":
            return _cmd_import_osm(args)
        if args.command == "serve":
            return _cmd_serve(args)
    except ScenarioError as exc:
        print(f"scenario error: {exc}", file=sys.stderr)
        return 1
    except FileNotFoundError as exc:
        print(f"file not found: {exc.filename}", file=sys.stderr)
        return 1
    return 2


def main() -> None:
    sys.exit(dispatch())


if __name__ == "__main__":
    main()
