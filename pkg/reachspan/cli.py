"""Command-line front end: polytopes, link envelopes, benchmark, timing, robot info, HTTP server"""
import argparse
import asyncio
import json
import logging
import sys
import time
from pathlib import Path
from typing import List, Literal, Optional, Set

import numpy as np
from pydantic import BaseModel, Field, ValidationError, field_validator

from reachspan.config import settings
from reachspan.core.dynamics import forward_kinematics
from reachspan.core.errors import NUMERICAL_ERRORS, ReachspanError, ScenarioError
from reachspan.core.horizon import add_environment, build_projection
from reachspan.core.robot import RobotModel, load_robot_file
from reachspan.polytope.ichm import ichm
from reachspan.polytope.links import link_reachable
from reachspan.polytope.mesh import export_mesh, export_scene, polytope_document
from reachspan.services.benchmark import (
    CellOptions,
    run_benchmark,
    summarize,
    timing_run,
    write_report_csv,
    write_summary_csv,
    write_timing_csv,
)
from reachspan.services.scenario import Scenario, load_scenario

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_INFEASIBLE = 2

Subcommand = Literal["polytope", "links", "benchmark", "timing", "info", "serve"]
DEFAULT_FORMATS = {
    "polytope": {"obj", "json"},
    "links": {"obj", "json"},
    "benchmark": {"csv"},
    "timing": {"csv"},
    "info": set(),
    "serve": set(),
}


class RunConfig(BaseModel):
    """Validated command-line arguments"""
    subcommand: Subcommand
    scenario: Optional[Path] = None
    robot: Optional[str] = None
    out: Path = Path("out")
    delta: float = Field(default_factory=lambda: settings.delta, gt=0)
    dt: float = Field(default_factory=lambda: settings.dt, gt=0)
    horizons: Optional[List[float]] = None
    seed: int = Field(default_factory=lambda: settings.seed, ge=0)
    env_rows: List[int] = Field(default_factory=lambda: list(settings.env_rows))
    configs: int = Field(default_factory=lambda: settings.configs, ge=1)
    formats: Set[Literal["obj", "json", "csv"]] = set()
    dims: Optional[List[int]] = None
    timings: bool = False
    random_velocity: bool = False
    host: str = "127.0.0.1"
    port: int = Field(default=8000, ge=1, le=65535)

    @field_validator("horizons")
    @classmethod
    def _positive(cls, value):
        if value is not None and (not value or any(t <= 0 for t in value)):
            raise ValueError("horizons must all be positive")
        return value

    @field_validator("env_rows")
    @classmethod
    def _non_negative(cls, value):
        if any(r < 0 for r in value):
            raise ValueError("env-rows must be non-negative")
        return value


def _csv_list(kind):
    def parse(text: str):
        try:
            return [kind(item) for item in text.split(",") if item.strip()]
        except ValueError as e:
            raise argparse.ArgumentTypeError(f"expected comma-separated {kind.__name__} values: {text}") from e
    return parse


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--scenario", type=Path, help="scenario JSON file")
    common.add_argument("--robot", help="robot JSON file or bundled name (planar2, generic7)")
    common.add_argument("--out", type=Path, default=Path("out"), help="output directory (default: out)")
    common.add_argument("--delta", type=float, help=f"ICHM accuracy in metres (default: {settings.delta})")
    common.add_argument("--dt", type=float, help=f"simulation step in seconds (default: {settings.dt})")
    common.add_argument("--horizons", type=_csv_list(float), help="comma-separated horizons in seconds")
    common.add_argument("--seed", type=int, help=f"random seed (default: {settings.seed})")
    common.add_argument("--env-rows", type=_csv_list(int), help="comma-separated environment row counts for timing")
    common.add_argument("--configs", type=int, help=f"number of random configurations (default: {settings.configs})")
    common.add_argument("--format", type=_csv_list(str), help="comma-separated output formats: obj,json,csv")
    common.add_argument("--dims", type=_csv_list(int), help="task-space coordinates to track, e.g. 0,1 for planar robots")
    common.add_argument("--timings", action="store_true", help="fill the poly_ms benchmark column")
    common.add_argument("--random-velocity", action="store_true", help="sample joint velocities for benchmark configs")
    common.add_argument("--log-level", default=None, help=f"logging level (default: {settings.log_level})")

    parser = argparse.ArgumentParser(
        prog="reachspan",
        description="Reachable-space polytopes for serial manipulators over a time horizon",
    )
    sub = parser.add_subparsers(dest="subcommand", required=True)
    sub.add_parser("polytope", parents=[common], help="compute the polytope of a scenario")
    sub.add_parser("links", parents=[common], help="compute polytopes of the scenario's link envelopes")
    sub.add_parser("benchmark", parents=[common], help="score polytopes against simulated rollouts")
    sub.add_parser("timing", parents=[common], help="time ICHM over horizons and environment sizes")
    sub.add_parser("info", parents=[common], help="print a robot summary")
    serve = sub.add_parser("serve", parents=[common], help="run the HTTP API")
    serve.add_argument("--host", default="127.0.0.1")
    serve.add_argument("--port", type=int, default=8000)
    return parser


def _config_from_args(args: argparse.Namespace) -> RunConfig:
    values = {
        "subcommand": args.subcommand,
        "scenario": args.scenario,
        "robot": args.robot,
        "out": args.out,
        "delta": args.delta,
        "dt": args.dt,
        "horizons": args.horizons,
        "seed": args.seed,
        "env_rows": args.env_rows,
        "configs": args.configs,
        "formats": set(args.format) if args.format else DEFAULT_FORMATS[args.subcommand],
        "dims": args.dims,
        "timings": args.timings or settings.report_timings,
        "random_velocity": args.random_velocity,
        "host": getattr(args, "host", "127.0.0.1"),
        "port": getattr(args, "port", 8000),
    }
    return RunConfig(**{k: v for k, v in values.items() if v is not None})


def _require_scenario(config: RunConfig) -> Scenario:
    if config.scenario is None:
        raise ScenarioError(f"{config.subcommand} needs --scenario")
    return load_scenario(config.scenario)


def _robot_for(config: RunConfig) -> tuple[RobotModel, Optional[Scenario]]:
    scenario = load_scenario(config.scenario) if config.scenario is not None else None
    if config.robot is not None:
        return load_robot_file(config.robot), scenario
    if scenario is not None:
        return scenario.model, scenario
    raise ScenarioError(f"{config.subcommand} needs --robot or --scenario")


def _dims(config: RunConfig, scenario: Optional[Scenario]) -> tuple[int, ...]:
    if config.dims is not None:
        return tuple(config.dims)
    return scenario.dims if scenario is not None else (0, 1, 2)


def _write(path: Path, payload: bytes | str):
    path.parent.mkdir(parents=True, exist_ok=True)
    if isinstance(payload, str):
        payload = payload.encode("utf-8")
    path.write_bytes(payload)
    logger.info(f"Wrote {path}")


def cmd_polytope(config: RunConfig) -> int:
    scenario = _require_scenario(config)
    horizons = config.horizons or [scenario.t_h]
    per_horizon = config.horizons is not None
    infeasible = False

    for t_h in horizons:
        problem = build_projection(
            scenario.model, scenario.state, t_h,
            frame=scenario.frame, local_point=scenario.local_point, dims=scenario.dims,
        )
        if scenario.environment is not None:
            problem = add_environment(problem, scenario.environment)
        started = time.perf_counter()
        poly = ichm(problem, delta=config.delta, seed=config.seed)
        elapsed_ms = (time.perf_counter() - started) * 1000.0
        stem = f"polytope_{t_h:g}" if per_horizon else "polytope"

        if poly.is_empty:
            print(f"t_h={t_h:g}: empty reachable set")
            _write(config.out / f"{stem}.json", export_mesh(poly, "json"))
            infeasible = True
            continue

        if "obj" in config.formats and poly.is_degenerate:
            logger.warning(f"Polytope at t_h={t_h:g} is flat, skipping {stem}.obj")
        elif "obj" in config.formats:
            _write(config.out / f"{stem}.obj", export_mesh(poly, "obj"))
        if "json" in config.formats:
            _write(config.out / f"{stem}.json", export_mesh(poly, "json"))
        print(
            f"t_h={t_h:g}: {poly.vertices.shape[0]} vertices, {poly.faces.shape[0]} faces, "
            f"volume {poly.volume:.6g}, {elapsed_ms:.1f} ms"
        )
    return EXIT_INFEASIBLE if infeasible else EXIT_OK


def cmd_links(config: RunConfig) -> int:
    scenario = _require_scenario(config)
    if not scenario.links:
        raise ScenarioError(f"scenario {scenario.name} defines no link envelopes")
    t_h = (config.horizons or [scenario.t_h])[0]

    polys = []
    for envelope in scenario.links:
        poly = link_reachable(
            scenario.model, scenario.state, envelope, t_h,
            delta=config.delta, dims=scenario.dims, environment=scenario.environment, seed=config.seed,
        )
        polys.append((envelope.name, poly))
        if poly.is_empty:
            print(f"{envelope.name}: empty reachable set")
            _write(config.out / f"link_{envelope.name}.json", export_mesh(poly, "json"))
            continue
        if "obj" in config.formats:
            _write(config.out / f"link_{envelope.name}.obj", export_mesh(poly, "obj"))
        if "json" in config.formats:
            _write(config.out / f"link_{envelope.name}.json", export_mesh(poly, "json"))
        print(f"{envelope.name}: {poly.vertices.shape[0]} vertices, volume {poly.volume:.6g}")

    present = [poly for _, poly in polys if not poly.is_empty]
    if not present:
        return EXIT_INFEASIBLE
    if "obj" in config.formats:
        _write(config.out / "scene.obj", export_scene(present))
    if "json" in config.formats:
        scene = {name: polytope_document(poly) for name, poly in polys}
        _write(config.out / "scene.json", json.dumps(scene, indent=2, default=float))
    return EXIT_OK if len(present) == len(polys) else EXIT_INFEASIBLE


def cmd_benchmark(config: RunConfig) -> int:
    model, scenario = _robot_for(config)
    horizons = config.horizons or list(settings.horizons)
    options = CellOptions.from_settings(
        delta=config.delta, dt=config.dt, timings=config.timings, dims=_dims(config, scenario)
    )
    result = asyncio.run(run_benchmark(model, horizons, config.configs, config.seed, options, config.random_velocity))
    if not result.reports:
        print(f"all {result.total} benchmark cells failed", file=sys.stderr)
        return EXIT_ERROR

    if "csv" in config.formats:
        _write(config.out / "benchmark.csv", write_report_csv(result.reports))
        _write(config.out / "benchmark_summary.csv", write_summary_csv(result))
    for row in summarize(result):
        cells = [f"t_h={row['t_h']:g}", f"n={row['configs']}"]
        for metric in ("m1", "m2", "m3"):
            mean, std = row[f"{metric}_mean"], row[f"{metric}_std"]
            cells.append(f"{metric}={mean:.3f}±{std:.3f}" if mean is not None else f"{metric}=n/a")
        print("  ".join(cells))
    if result.failures:
        print(f"{result.failures}/{result.total} cells failed (see log)")
    return EXIT_OK


def cmd_timing(config: RunConfig) -> int:
    model, scenario = _robot_for(config)
    horizons = config.horizons or list(settings.horizons)
    cells = timing_run(
        model, horizons, config.configs, config.env_rows, config.seed,
        delta=config.delta, dims=_dims(config, scenario),
    )
    if "csv" in config.formats:
        _write(config.out / "timing.csv", write_timing_csv(cells))
    for cell in cells:
        print(f"t_h={cell.t_h:g}  env_rows={cell.env_rows}  {cell.mean_ms:.1f} ± {cell.std_ms:.1f} ms")
    return EXIT_OK


def cmd_info(config: RunConfig) -> int:
    model, scenario = _robot_for(config)
    q = scenario.state.q if scenario is not None and scenario.model is model else np.zeros(model.n)
    print(f"robot: {model.name}")
    print(f"joints: {model.n}, total mass {model.total_mass:.3f} kg")
    print(f"{'joint':>5} {'mass':>8} {'tau':>20} {'qd':>20} {'q':>20}")
    for i, joint in enumerate(model.joints):
        print(
            f"{i + 1:>5} {joint.link_mass:>8.3f} "
            f"{'[%.4g, %.4g]' % joint.tau_limits:>20} {'[%.4g, %.4g]' % joint.qd_limits:>20} "
            f"{'[%.4g, %.4g]' % joint.q_limits:>20}"
        )
    x = forward_kinematics(model, q)
    print(f"end effector at q={np.round(q, 4).tolist()}: {np.round(x, 6).tolist()}")
    if model.cartesian_limits is not None:
        cl = model.cartesian_limits
        print(f"cartesian limits: xdd [{cl.xdd_min.min():g}, {cl.xdd_max.max():g}], xd [{cl.xd_min.min():g}, {cl.xd_max.max():g}]")
    return EXIT_OK


def cmd_serve(config: RunConfig) -> int:
    import uvicorn

    uvicorn.run("reachspan.main:app", host=config.host, port=config.port, log_level=settings.log_level.lower())
    return EXIT_OK


COMMANDS = {
    "polytope": cmd_polytope,
    "links": cmd_links,
    "benchmark": cmd_benchmark,
    "timing": cmd_timing,
    "info": cmd_info,
    "serve": cmd_serve,
}


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    level = (args.log_level or settings.log_level).upper()
    logging.basicConfig(
        level=getattr(logging, level, logging.INFO),
        format='%(asctime)s - %(name)s - %(levelname)s - %(message)s'
    )
    try:
        config = _config_from_args(args)
    except ValidationError as e:
        first = e.errors()[0]
        parser.error(f"--{'-'.join(str(p) for p in first['loc'][:1]).replace('_', '-')}: {first['msg']}")

    try:
        return COMMANDS[config.subcommand](config)
    except ReachspanError as e:
        logger.error(f"{config.subcommand} failed: {e}")
        print(f"error: {e}", file=sys.stderr)
        return EXIT_ERROR
    except NUMERICAL_ERRORS as e:
        logger.error(f"{config.subcommand} failed in a numerical routine: {e}", exc_info=True)
        print(f"error: numerical failure: {e}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
