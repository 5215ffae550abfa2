"""Sweep orchestration: weight lattices, best-of-R runs, frontier reports.

A sweep runs the optimizer for every (engine, weight vector) pair ``R``
times with per-task derived seeds, keeps the best run per pair, and folds
the winners into one frontier report per engine (hypervolume at the nadir
reference, best/median/worst by aggregate value, mean explorative rate).
The map over (engine, weight, run) tasks is embarrassingly parallel and
reduces deterministically, so serial and parallel sweeps are identical.
"""

from __future__ import annotations

import csv
import dataclasses
import hashlib
import json
import os
import struct
import tempfile
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

from .bfa import BfaParams, RunResult, run_bfa
from .engines import EngineConfig, EngineKind
from .errors import ConfigError, LatticeError, SchemaError
from .metrics import aer, hvi_exact, hvi_percent_gap
from .problem import (
    DecisionVector,
    LOWER_BOUNDS,
    ObjectiveVector,
    UPPER_BOUNDS,
    WeightVector,
    aggregate,
)

__all__ = [
    "SolutionRecord",
    "ExperimentConfig",
    "FrontierReport",
    "NADIR_REFERENCE",
    "generate_weights",
    "derive_seed",
    "run_sweep",
    "compare",
    "FRONTIER_HEADER",
    "frontier_row",
    "write_frontier_csv",
    "read_frontier_csv",
    "write_trace_csv",
    "read_trace_csv",
    "write_weights_csv",
    "read_weights_csv",
    "report_to_dict",
    "write_report_json",
    "atomic_write_text",
]

NADIR_REFERENCE = (0.0, 0.0, 0.0, 0.0)

FRONTIER_HEADER = [
    "engine", "w1", "w2", "w3", "w4", "run_id", "seed",
    "A", "B", "C", "D", "f1", "f2", "f3", "f4", "F", "aer",
]

TRACE_HEADER = ["generation", "best_F"]
WEIGHTS_HEADER = ["w1", "w2", "w3", "w4"]


@dataclass(frozen=True)
class SolutionRecord:
    """Best solution found for one (engine, weight vector) pair."""

    engine: EngineKind
    weights: WeightVector
    run_id: int
    seed: int
    decision: DecisionVector
    objectives: ObjectiveVector
    F: float
    aer: float


@dataclass(frozen=True)
class ExperimentConfig:
    """Everything a sweep needs; seeds for individual runs are derived."""

    engines: tuple[EngineConfig, ...]
    weights: tuple[WeightVector, ...]
    bfa: BfaParams
    master_seed: int
    runs_per_weight: int = 10
    aer_threshold: float = 0.01

    def __post_init__(self):
        if not self.engines:
            raise ConfigError("at least one engine configuration is required")
        if not self.weights:
            raise ConfigError("at least one weight vector is required")
        if self.runs_per_weight < 1:
            raise ConfigError(f"runs_per_weight must be >= 1, got {self.runs_per_weight}")
        if not (isinstance(self.master_seed, int) and 0 <= self.master_seed < 2**64):
            raise ConfigError(f"master_seed must be an unsigned 64-bit integer, got {self.master_seed!r}")
        if self.aer_threshold < 0:
            raise ConfigError(f"aer_threshold must be non-negative, got {self.aer_threshold}")


@dataclass(frozen=True)
class FrontierReport:
    """Per-engine frontier: one record per weight vector plus summary metrics."""

    engine: EngineKind
    solutions: tuple[SolutionRecord, ...]
    hvi: float
    best: SolutionRecord
    median: SolutionRecord
    worst: SolutionRecord
    mean_aer: float

    @property
    def n_solutions(self) -> int:
        return len(self.solutions)


def generate_weights(step: float, minimum: float) -> list[WeightVector]:
    """All weight 4-tuples on the lattice ``{minimum, minimum+step, ...}``
    that sum to one, in lexicographic order.
    """
    if step <= 0:
        raise LatticeError(f"step must be positive, got {step}")
    if minimum < 0:
        raise LatticeError(f"minimum must be non-negative, got {minimum}")
    resolution = 1.0 / step
    if abs(resolution - round(resolution)) > 1e-9:
        raise LatticeError(f"1/step must be an integer, got step={step}")
    budget = (1.0 - 4.0 * minimum) / step
    if budget < -1e-9:
        raise LatticeError(f"no tuple exists: 4 * {minimum} exceeds 1")
    if abs(budget - round(budget)) > 1e-9:
        raise LatticeError(f"(1 - 4*minimum)/step must be an integer, got {budget}")
    total = int(round(budget))
    out = []
    for i in range(total + 1):
        for j in range(total - i + 1):
            for k in range(total - i - j + 1):
                m = total - i - j - k
                out.append(WeightVector(
                    minimum + i * step,
                    minimum + j * step,
                    minimum + k * step,
                    minimum + m * step,
                ))
    return out


def derive_seed(master_seed: int, engine_index: int, weight_index: int, run_index: int) -> int:
    """Mix the four indices into one 64-bit run seed.

    Fixed construction: the little-endian packing of the four values is
    hashed with BLAKE2b to an 8-byte digest. Pure, order-independent and
    collision-checked across the experiment grid by the test suite.
    """
    packed = struct.pack(
        "<QQQQ",
        master_seed & (2**64 - 1),
        engine_index & (2**64 - 1),
        weight_index & (2**64 - 1),
        run_index & (2**64 - 1),
    )
    digest = hashlib.blake2b(packed, digest_size=8).digest()
    return int.from_bytes(digest, "little")


def _sweep_task(task) -> RunResult:
    engine_config, weights, params, seed, run_id = task
    try:
        return run_bfa(weights, params, dataclasses.replace(engine_config, seed=seed))
    except Exception as exc:
        context = (f"engine={engine_config.kind.value} "
                   f"weights={weights.as_tuple()} run={run_id}")
        try:
            wrapped = type(exc)(f"{context}: {exc}")
        except TypeError:  # exception type with a non-string constructor
            raise
        raise wrapped from exc


def _task_list(config: ExperimentConfig):
    tasks = []
    for e_idx, engine_config in enumerate(config.engines):
        for w_idx, weights in enumerate(config.weights):
            for run_id in range(config.runs_per_weight):
                seed = derive_seed(config.master_seed, e_idx, w_idx, run_id)
                tasks.append((engine_config, weights, config.bfa, seed, run_id))
    return tasks


def run_sweep(config: ExperimentConfig, jobs: int = 1) -> list[FrontierReport]:
    """Execute the full protocol and build one report per engine.

    ``jobs`` > 1 maps the runs over worker processes; the reduce is by
    task index, so the result is identical to a serial sweep.
    """
    tasks = _task_list(config)
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_sweep_task, tasks, chunksize=4))
    else:
        results = [_sweep_task(t) for t in tasks]

    reports = []
    runs_per_pair = config.runs_per_weight
    cursor = 0
    for engine_config in config.engines:
        records = []
        for weights in config.weights:
            pair = results[cursor : cursor + runs_per_pair]
            cursor += runs_per_pair
            best_id = 0
            for run_id in range(1, runs_per_pair):
                if pair[run_id].best_f > pair[best_id].best_f:
                    best_id = run_id
            winner = pair[best_id]
            records.append(SolutionRecord(
                engine=engine_config.kind,
                weights=weights,
                run_id=best_id,
                seed=winner.seed,
                decision=winner.best_decision,
                objectives=winner.best_objectives,
                F=winner.best_f,
                aer=aer(winner.trace, config.aer_threshold),
            ))
        reports.append(_build_report(engine_config.kind, records))
    return reports


def _build_report(kind: EngineKind, records: list[SolutionRecord]) -> FrontierReport:
    volume = hvi_exact([r.objectives for r in records], NADIR_REFERENCE)
    by_f = sorted(range(len(records)), key=lambda i: records[i].F)  # stable on ties
    worst = records[by_f[0]]
    best = records[by_f[-1]]
    median = records[by_f[(len(records) - 1) // 2]]  # lower middle on even counts
    mean_aer = sum(r.aer for r in records) / len(records)
    return FrontierReport(
        engine=kind,
        solutions=tuple(records),
        hvi=volume,
        best=best,
        median=median,
        worst=worst,
        mean_aer=mean_aer,
    )


def compare(reports: Sequence[FrontierReport]) -> dict:
    """Rank engines by hypervolume and explorative rate.

    Returns a JSON-ready mapping with the hypervolume ranking (ties
    flagged, stable input order preserved), the leader's percentage gap
    over every other engine, and the mean-AER ranking.
    """
    if not reports:
        raise ConfigError("nothing to compare")
    weight_sets = {tuple(s.weights.as_tuple() for s in r.solutions) for r in reports}
    if len(weight_sets) > 1:
        raise ConfigError("reports cover different weight sets and cannot be compared")

    by_hvi = sorted(range(len(reports)), key=lambda i: (-reports[i].hvi, i))
    ranking = []
    for rank, idx in enumerate(by_hvi, start=1):
        report = reports[idx]
        previous = reports[by_hvi[rank - 2]].hvi if rank > 1 else None
        ranking.append({
            "rank": rank,
            "engine": report.engine.value,
            "hvi": report.hvi,
            "tied_with_previous": previous is not None and report.hvi == previous,
        })
    leader = reports[by_hvi[0]]
    gaps = [
        {
            "engine": reports[idx].engine.value,
            "percent": hvi_percent_gap(leader.hvi, reports[idx].hvi),
        }
        for idx in by_hvi[1:]
    ]
    by_aer = sorted(range(len(reports)), key=lambda i: (-reports[i].mean_aer, i))
    aer_ranking = [
        {"rank": rank, "engine": reports[idx].engine.value, "mean_aer": reports[idx].mean_aer}
        for rank, idx in enumerate(by_aer, start=1)
    ]
    return {
        "hvi_ranking": ranking,
        "leader": leader.engine.value,
        "leader_gaps_percent": gaps,
        "aer_ranking": aer_ranking,
    }


# -- persistence -------------------------------------------------------------


def atomic_write_text(path, text: str) -> None:
    """Write via a sibling temp file and rename, so readers never see a prefix."""
    path = Path(path)
    handle, tmp_name = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(handle, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp_name, path)
    except BaseException:
        try:
            os.unlink(tmp_name)
        except OSError:
            pass
        raise


def _format_row(values: Iterable) -> str:
    return ",".join(repr(v) if isinstance(v, float) else str(v) for v in values)


def frontier_row(r: SolutionRecord) -> str:
    """One CSV data line for a record, floats at round-trip precision."""
    return _format_row([
        r.engine.value, *r.weights.as_tuple(), r.run_id, r.seed,
        *r.decision, *r.objectives, r.F, r.aer,
    ])


def write_frontier_csv(records: Sequence[SolutionRecord], path) -> None:
    """Persist records; floats keep full round-trip precision."""
    lines = [",".join(FRONTIER_HEADER)]
    lines.extend(frontier_row(r) for r in records)
    atomic_write_text(path, "\n".join(lines) + "\n")


def read_frontier_csv(path) -> list[SolutionRecord]:
    """Load and audit records: header, field types, bounds, aggregate identity."""
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows:
        raise SchemaError("empty file", line=1)
    if rows[0] != FRONTIER_HEADER:
        missing = [c for c in FRONTIER_HEADER if c not in rows[0]]
        if missing:
            raise SchemaError(f"missing column {missing[0]!r}", line=1)
        raise SchemaError(f"unexpected header {rows[0]!r}", line=1)
    records = []
    for line_no, row in enumerate(rows[1:], start=2):
        if not row:
            continue
        if len(row) != len(FRONTIER_HEADER):
            raise SchemaError(f"expected {len(FRONTIER_HEADER)} fields, got {len(row)}", line=line_no)
        try:
            record = SolutionRecord(
                engine=EngineKind(row[0]),
                weights=WeightVector(*(float(v) for v in row[1:5])),
                run_id=int(row[5]),
                seed=int(row[6]),
                decision=DecisionVector(*(float(v) for v in row[7:11])),
                objectives=ObjectiveVector(*(float(v) for v in row[11:15])),
                F=float(row[15]),
                aer=float(row[16]),
            )
        except (ValueError, ConfigError) as exc:
            raise SchemaError(str(exc), line=line_no) from exc
        _audit_record(record, line_no)
        records.append(record)
    return records


def _audit_record(record: SolutionRecord, line_no: int) -> None:
    recomputed = aggregate(record.objectives, record.weights)
    if abs(recomputed - record.F) > 1e-9:
        raise SchemaError(
            f"aggregate mismatch: stored F={record.F!r}, recomputed {recomputed!r}",
            line=line_no,
        )
    for value, lo, hi, name in zip(record.decision, LOWER_BOUNDS, UPPER_BOUNDS, "ABCD"):
        if not lo <= value <= hi:
            raise SchemaError(f"decision {name}={value} outside [{lo}, {hi}]", line=line_no)


def write_trace_csv(trace: Sequence[float], path) -> None:
    lines = [",".join(TRACE_HEADER)]
    for generation, value in enumerate(trace, start=1):
        lines.append(f"{generation},{value!r}")
    atomic_write_text(path, "\n".join(lines) + "\n")


def read_trace_csv(path) -> list[float]:
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows or rows[0] != TRACE_HEADER:
        missing = [c for c in TRACE_HEADER if not rows or c not in rows[0]]
        raise SchemaError(f"missing column {missing[0]!r}" if missing else "bad header", line=1)
    values = []
    for line_no, row in enumerate(rows[1:], start=2):
        if not row:
            continue
        if len(row) != 2:
            raise SchemaError(f"expected 2 fields, got {len(row)}", line=line_no)
        try:
            generation, value = int(row[0]), float(row[1])
        except ValueError as exc:
            raise SchemaError(str(exc), line=line_no) from exc
        if generation != len(values) + 1:
            raise SchemaError(f"generations must run 1..N, got {generation}", line=line_no)
        values.append(value)
    return values


def write_weights_csv(weights: Sequence[WeightVector], path) -> None:
    lines = [",".join(WEIGHTS_HEADER)]
    for w in weights:
        lines.append(_format_row(w.as_tuple()))
    atomic_write_text(path, "\n".join(lines) + "\n")


def read_weights_csv(path) -> list[WeightVector]:
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows or rows[0] != WEIGHTS_HEADER:
        missing = [c for c in WEIGHTS_HEADER if not rows or c not in rows[0]]
        raise SchemaError(f"missing column {missing[0]!r}" if missing else "bad header", line=1)
    weights = []
    for line_no, row in enumerate(rows[1:], start=2):
        if not row:
            continue
        if len(row) != 4:
            raise SchemaError(f"expected 4 fields, got {len(row)}", line=line_no)
        try:
            weights.append(WeightVector(*(float(v) for v in row)))
        except (ValueError, ConfigError) as exc:
            raise SchemaError(str(exc), line=line_no) from exc
    return weights


def _record_to_dict(record: SolutionRecord) -> dict:
    return {
        "engine": record.engine.value,
        "w1": record.weights.w1, "w2": record.weights.w2,
        "w3": record.weights.w3, "w4": record.weights.w4,
        "run_id": record.run_id, "seed": record.seed,
        "A": record.decision.A, "B": record.decision.B,
        "C": record.decision.C, "D": record.decision.D,
        "f1": record.objectives.f1, "f2": record.objectives.f2,
        "f3": record.objectives.f3, "f4": record.objectives.f4,
        "F": record.F, "aer": record.aer,
    }


def report_to_dict(report: FrontierReport) -> dict:
    return {
        "engine": report.engine.value,
        "hvi": report.hvi,
        "mean_aer": report.mean_aer,
        "best": _record_to_dict(report.best),
        "median": _record_to_dict(report.median),
        "worst": _record_to_dict(report.worst),
        "n_solutions": report.n_solutions,
    }


def write_report_json(reports: Sequence[FrontierReport], path) -> None:
    payload = [report_to_dict(r) for r in reports]
    atomic_write_text(path, json.dumps(payload, indent=2) + "\n")
