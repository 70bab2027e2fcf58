"""
Benchmark and timing suites

The benchmark samples random configurations, builds a polytope per (configuration,
horizon), rolls out every vertex torque through the nonlinear dynamics and scores the
result. Cells run in worker threads, bounded by settings.threads, and are reported in
(config, horizon) order whatever order they finish in.
"""
from __future__ import annotations

import asyncio
import csv
import io
import logging
import time
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from reachspan.config import settings
from reachspan.core.errors import BaselineError, DegeneratePolytopeError
from reachspan.core.horizon import (
    EnvironmentConstraints,
    add_environment,
    build_projection,
    check_feasibility,
)
from reachspan.core.robot import RobotModel, RobotState
from reachspan.polytope.ichm import ichm
from reachspan.services.metrics import MetricsReport, cube_baseline, evaluate_metrics
from reachspan.services.simulation import collect_reached

logger = logging.getLogger(__name__)

REPORT_COLUMNS = [
    "config_id", "seed", "t_h", "n_vertices", "m1", "m2", "m3",
    "vol_Px", "vol_R1", "vol_R2", "vol_Cx", "poly_ms", "m1_Cx", "m2_Cx", "m3_Cx",
]
SUMMARY_METRICS = ["m1", "m2", "m3", "m1_Cx", "m2_Cx", "m3_Cx", "vol_Px", "vol_Cx"]
TIMING_COLUMNS = ["t_h", "env_rows", "configs", "mean_ms", "std_ms"]
ENV_MARGIN = (0.0, 0.02)


def random_configurations(
    model: RobotModel,
    count: int,
    seed: int,
    random_velocity: bool = False,
) -> list[RobotState]:
    """
    Uniform joint positions inside the limits

    Args:
        model: Robot model
        count: Number of configurations (≥ 1)
        seed: Generator seed; equal seeds give equal lists
        random_velocity: Draw q̇ uniformly inside its box instead of zero

    Returns:
        List of RobotState
    """
    if count < 1:
        raise ValueError(f"count must be >= 1, got {count}")
    rng = np.random.default_rng(seed)
    q = rng.uniform(model.q_min, model.q_max, size=(count, model.n))
    if random_velocity:
        qd = rng.uniform(model.qd_min, model.qd_max, size=(count, model.n))
    else:
        qd = np.zeros((count, model.n))
    return [RobotState(q[i], qd[i]) for i in range(count)]


@dataclass(frozen=True)
class CellOptions:
    delta: float
    dt: float
    eps: float
    dims: tuple[int, ...] = (0, 1, 2)
    frame: Optional[int] = None
    local_point: Optional[tuple[float, float, float]] = None
    backend: Optional[str] = None
    timings: bool = False
    velocity_aware: bool = False

    @classmethod
    def from_settings(cls, **overrides) -> "CellOptions":
        values = dict(
            delta=settings.delta,
            dt=settings.dt,
            eps=settings.m1_tolerance,
            backend=settings.lp_backend,
            timings=settings.report_timings,
            velocity_aware=settings.cube_velocity_aware,
        )
        values.update({k: v for k, v in overrides.items() if v is not None})
        return cls(**values)


def evaluate_config(
    model: RobotModel,
    state: RobotState,
    t_h: float,
    options: CellOptions,
    config_id: int = 0,
    seed: int = 0,
) -> MetricsReport:
    """Polytope, rollouts and metrics for one (configuration, horizon) cell"""
    problem = build_projection(
        model, state, t_h, frame=options.frame, local_point=options.local_point, dims=options.dims
    )
    started = time.perf_counter()
    poly = ichm(problem, delta=options.delta, seed=seed, backend=options.backend)
    elapsed_ms = (time.perf_counter() - started) * 1000.0
    if poly.is_empty:
        raise DegeneratePolytopeError(f"config {config_id} has an empty reachable set at t_h={t_h}")

    reached = collect_reached(
        model, state, poly, t_h, options.dt, frame=options.frame, local_point=options.local_point, dims=options.dims
    )

    cube = None
    if model.cartesian_limits is not None:
        try:
            cube = cube_baseline(
                problem.x_k, problem.xd_k, model.cartesian_limits, t_h,
                velocity_aware=options.velocity_aware, dims=options.dims,
            )
        except BaselineError as e:
            logger.warning(f"Cube baseline skipped for config {config_id}: {e}")

    return evaluate_metrics(
        reached,
        poly,
        options.eps,
        cube=cube,
        config_id=config_id,
        seed=seed,
        t_h=t_h,
        poly_ms=elapsed_ms if options.timings else None,
    )


@dataclass
class BenchmarkResult:
    reports: list[MetricsReport] = field(default_factory=list)
    failures: int = 0
    total: int = 0


async def run_benchmark(
    model: RobotModel,
    horizons: Sequence[float],
    configs: int,
    seed: int,
    options: Optional[CellOptions] = None,
    random_velocity: bool = False,
) -> BenchmarkResult:
    """
    Evaluate every (configuration, horizon) cell concurrently

    Failed cells are logged and counted, never raised.
    """
    options = options or CellOptions.from_settings()
    states = random_configurations(model, configs, seed, random_velocity)
    cells = [(i, t_h) for i in range(len(states)) for t_h in horizons]
    limit = asyncio.Semaphore(settings.threads)

    async def run_cell(i: int, t_h: float) -> MetricsReport:
        async with limit:
            return await asyncio.to_thread(evaluate_config, model, states[i], t_h, options, i, seed)

    logger.info(f"Running {len(cells)} benchmark cells on {model.name} with {settings.threads} threads")
    results = await asyncio.gather(*[run_cell(i, t_h) for i, t_h in cells], return_exceptions=True)

    reports = []
    for (i, t_h), result in zip(cells, results):
        if isinstance(result, Exception):
            logger.error(f"Config {i} at t_h={t_h} failed: {result}", exc_info=result)
            continue
        reports.append(result)

    failed_count = len(cells) - len(reports)
    if failed_count > 0:
        logger.warning(f"⚠️ {failed_count} benchmark cells failed")
    reports.sort(key=lambda r: (r.config_id, r.t_h))
    logger.info(f"✅ Benchmark finished: {len(reports)}/{len(cells)} cells")
    return BenchmarkResult(reports, failed_count, len(cells))


def _cell(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return repr(float(value))
    return str(value)


def write_report_csv(reports: Sequence[MetricsReport]) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(REPORT_COLUMNS)
    for report in reports:
        row = report.as_dict()
        writer.writerow([_cell(row[column]) for column in REPORT_COLUMNS])
    return buffer.getvalue()


def summarize(result: BenchmarkResult) -> list[dict]:
    """Mean and standard deviation of each metric per horizon"""
    rows = []
    for t_h in sorted({r.t_h for r in result.reports}):
        cell = [r for r in result.reports if r.t_h == t_h]
        row = {"t_h": t_h, "configs": len(cell)}
        for metric in SUMMARY_METRICS:
            values = np.array([getattr(r, metric) for r in cell if getattr(r, metric) is not None], dtype=float)
            row[f"{metric}_mean"] = float(values.mean()) if values.size else None
            row[f"{metric}_std"] = float(values.std()) if values.size else None
        rows.append(row)
    return rows


def write_summary_csv(result: BenchmarkResult) -> str:
    rows = summarize(result)
    columns = ["t_h", "configs"] + [f"{m}_{s}" for m in SUMMARY_METRICS for s in ("mean", "std")] + ["failures"]
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        row["failures"] = result.failures
        writer.writerow([_cell(row[c]) for c in columns])
    return buffer.getvalue()


@dataclass(frozen=True)
class TimingCell:
    t_h: float
    env_rows: int
    configs: int
    mean_ms: float
    std_ms: float


def random_environment(
    rng: np.random.Generator, rows: int, m: int, anchor: np.ndarray
) -> EnvironmentConstraints:
    """Random half-spaces that all keep `anchor` strictly inside"""
    if rows == 0:
        return EnvironmentConstraints.none(m)
    normals = rng.standard_normal((rows, m))
    normals /= np.linalg.norm(normals, axis=1, keepdims=True)
    offsets = normals @ anchor + rng.uniform(*ENV_MARGIN, size=rows)
    return EnvironmentConstraints(normals, offsets)


def timing_run(
    model: RobotModel,
    horizons: Sequence[float],
    configs: int,
    env_row_counts: Sequence[int],
    seed: int,
    delta: Optional[float] = None,
    repeats: Optional[int] = None,
    dims: Sequence[int] = (0, 1, 2),
    backend: Optional[str] = None,
) -> list[TimingCell]:
    """
    Wall time of ichm per (horizon, environment row count)

    Runs sequentially so the timings do not compete for cores. The environment rows
    are anchored on the image of a feasible torque, so every problem stays feasible.
    """
    if not horizons or not env_row_counts:
        raise ValueError("timing_run needs at least one horizon and one env-row count")
    repeats = settings.timing_repeats if repeats is None else repeats
    states = random_configurations(model, configs, seed)
    rng = np.random.default_rng(seed)
    cells = []
    for t_h in horizons:
        for rows in env_row_counts:
            samples = []
            for state in states:
                problem = build_projection(model, state, t_h, dims=dims)
                witness = check_feasibility(problem, backend).witness
                if witness is None:
                    logger.warning(f"Skipping an infeasible configuration at t_h={t_h}")
                    continue
                anchor = problem.image(witness)
                constrained = add_environment(problem, random_environment(rng, rows, problem.m, anchor))
                for _ in range(repeats):
                    started = time.perf_counter()
                    ichm(constrained, delta=delta, seed=seed, backend=backend)
                    samples.append((time.perf_counter() - started) * 1000.0)
            if not samples:
                logger.warning(f"No feasible configuration to time at t_h={t_h}")
                continue
            samples = np.array(samples)
            timed = samples.size // repeats
            cell = TimingCell(float(t_h), int(rows), timed, float(samples.mean()), float(samples.std()))
            logger.info(f"Timing t_h={t_h} env_rows={rows}: {cell.mean_ms:.1f} ± {cell.std_ms:.1f} ms")
            cells.append(cell)
    return cells


def write_timing_csv(cells: Sequence[TimingCell]) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(TIMING_COLUMNS)
    for cell in cells:
        writer.writerow([_cell(cell.t_h), cell.env_rows, cell.configs, f"{cell.mean_ms:.3f}", f"{cell.std_ms:.3f}"])
    return buffer.getvalue()
