"""Command-line entry points: run, replay, serve, plan-hex.

Flag values win over the optional JSON config file named by the
MVP_CONFIG environment variable, which wins over built-in defaults.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

from .hexgrid import build_hex_grid
from .orchestrator import (
    SCENARIOS,
    RunLog,
    ScenarioConfig,
    replay,
    run_scenario,
)
from .planner import (
    MultiRobotProblem,
    plan_min_max_dist,
    plan_to_ndjson,
    problem_to_ndjson,
)
from .vehicle import DEFAULT_PARAMS
from .wire import LinkConfig
from .world import SensorModel

CONFIG_ENV = "MVP_CONFIG"


def _env_config() -> dict:
    path = os.environ.get(CONFIG_ENV)
    if not path:
        return {}
    with open(path, "r", encoding="utf-8") as fh:
        cfg = json.load(fh)
    if not isinstance(cfg, dict):
        raise SystemExit(f"{CONFIG_ENV} file must hold a JSON object")
    return cfg


def _pick(args: argparse.Namespace, env: dict, name: str, default):
    """Effective value for one option: flag > env config file > default."""
    value = getattr(args, name.replace("-", "_"), None)
    if value is not None:
        return value
    if name in env:
        return env[name]
    return default


def _cmd_run(args: argparse.Namespace) -> int:
    env = _env_config()
    scenario = _pick(args, env, "scenario", None)
    if scenario is None:
        print("run: --scenario is required (flag or MVP_CONFIG)", file=sys.stderr)
        return 2
    cfg = ScenarioConfig(
        scenario=scenario,
        vehicle_count=int(_pick(args, env, "vehicles", 1)),
        loop_hz=float(_pick(args, env, "hz", 30.0)),
        seed=int(_pick(args, env, "seed", 0)),
        link=LinkConfig(drop_probability=float(_pick(args, env, "drop", 0.0))),
        sensor=SensorModel(sigma_xy=float(_pick(args, env, "sigma_xy", 0.002))),
        paths_file=_pick(args, env, "paths_file", None),
    )
    log = run_scenario(cfg, pace=bool(args.real_time))
    out = _pick(args, env, "out", None)
    if out:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(log.to_ndjson())
    status = "complete" if log.complete else "incomplete (tick budget expired)"
    print(f"{scenario}: {len(log.ticks)} ticks, {status}")
    return 0 if log.complete else 1


def _cmd_replay(args: argparse.Namespace) -> int:
    with open(args.log, "r", encoding="utf-8") as fh:
        log = RunLog.from_ndjson(fh.read())
    report = replay(log)
    if report.ok:
        print(f"replay ok: {report.ticks_checked} ticks, zero divergences")
        return 0
    first = report.divergences[0]
    print(f"replay FAILED: divergence at tick {first['tick']} ({first['field']})")
    return 1


def _cmd_serve(args: argparse.Namespace) -> int:
    from .server import serve  # fastapi/uvicorn optional, import on demand

    serve(
        telemetry_port=args.telemetry_port,
        command_port=args.command_port,
        ws_port=args.ws_port,
        vehicle_count=args.vehicles,
        loop_hz=args.hz,
        seed=args.seed,
    )
    return 0


def _cmd_plan_hex(args: argparse.Namespace) -> int:
    import random

    try:
        w, h = (float(v) for v in args.workspace.lower().split("x"))
    except ValueError:
        print("plan-hex: --workspace must look like 1.5x0.9", file=sys.stderr)
        return 2
    grid = build_hex_grid((w, h), DEFAULT_PARAMS, clearance_factor=3.0)
    rng = random.Random(args.seed)
    n = args.robots
    if 2 * n > len(grid.vertices):
        print("plan-hex: too many robots for this workspace", file=sys.stderr)
        return 2
    starts = tuple(rng.sample(range(len(grid.vertices)), n))
    goals = tuple(rng.sample(range(len(grid.vertices)), n))
    problem = MultiRobotProblem(grid=grid, starts=starts, goals=goals)
    plan = plan_min_max_dist(problem)
    sys.stdout.write(problem_to_ndjson(problem))
    sys.stdout.write(plan_to_ndjson(plan))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="minifleet", description="Desk-scale fleet simulator and control stack"
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="execute a scenario and optionally record it")
    p_run.add_argument("--scenario", choices=SCENARIOS)
    p_run.add_argument("--vehicles", type=int)
    p_run.add_argument("--hz", type=float)
    p_run.add_argument("--seed", type=int)
    p_run.add_argument("--drop", type=float, help="link drop probability")
    p_run.add_argument("--sigma-xy", type=float, help="tracker position noise sigma")
    p_run.add_argument("--paths-file", help="NDJSON polylines for follow_drawn")
    p_run.add_argument("--real-time", action="store_true", help="pace to wall clock")
    p_run.add_argument("--out", help="write the RunLog NDJSON here")
    p_run.set_defaults(func=_cmd_run)

    p_replay = sub.add_parser("replay", help="re-execute a recorded log and diff it")
    p_replay.add_argument("--log", required=True)
    p_replay.set_defaults(func=_cmd_replay)

    p_serve = sub.add_parser("serve", help="live service for console and subscribers")
    p_serve.add_argument("--telemetry-port", type=int, default=5590)
    p_serve.add_argument("--command-port", type=int, default=5591)
    p_serve.add_argument("--ws-port", type=int, default=8080)
    p_serve.add_argument("--vehicles", type=int, default=6)
    p_serve.add_argument("--hz", type=float, default=30.0)
    p_serve.add_argument("--seed", type=int, default=0)
    p_serve.set_defaults(func=_cmd_serve)

    p_plan = sub.add_parser("plan-hex", help="plan a random instance, emit NDJSON")
    p_plan.add_argument("--workspace", required=True, help="WxH in meters, e.g. 1.5x0.9")
    p_plan.add_argument("--robots", type=int, required=True)
    p_plan.add_argument("--seed", type=int, default=0)
    p_plan.set_defaults(func=_cmd_plan_hex)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    raise SystemExit(main())
