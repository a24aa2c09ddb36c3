"""
Benchmark grid runner.

Runs every (initializer, solver, replicate) cell of a RunSpec on one
dataset and collects the full iteration traces as RunRecords. Cells run
concurrently up to `jobs`, but each cell's seed is derived from its key
alone and records are emitted in canonical cell-key order, so output does
not depend on scheduling.
"""

import hashlib
import logging
import time
from collections import defaultdict
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Optional, Tuple

import numpy as np

from nmfbench.datasets import Dataset, load_dataset, train_split
from nmfbench.errors import NmfError
from nmfbench.initializers import REGISTRY, build_initializer
from nmfbench.initializers.lowrank import select_rank_90
from nmfbench.linalg import check_rank, truncated_svd
from nmfbench.schemas import CellFailure, RunRecord, RunSpec
from nmfbench.solvers import run_nmf

logger = logging.getLogger(__name__)

DETERMINISTIC_SEED = "-"
SUMMARY_SEED = "mean"


def cell_seed(master_seed: int, dataset: str, init: str, solver: str, replicate: int) -> int:
    """
    Stable 64-bit seed of one grid cell.

    BLAKE2b (8-byte digest) of 'master|dataset|init|solver|replicate', read
    as a big-endian unsigned integer. Independent of Python's hash
    randomization and of the order cells run in.
    """
    key = f"{master_seed}|{dataset}|{init}|{solver}|{replicate}".encode()
    return int.from_bytes(hashlib.blake2b(key, digest_size=8).digest(), "big")


@dataclass(frozen=True)
class Cell:
    init: str
    replicate: int
    seed: int
    randomized: bool

    @property
    def seed_label(self) -> str:
        return str(self.seed) if self.randomized else DETERMINISTIC_SEED


@dataclass
class BenchmarkResult:
    """
    Outcome of one grid.

    Attributes:
        dataset: Dataset name
        rank: Rank the grid ran at (resolved if 'auto' was requested)
        records: Every traced iteration of every successful cell, canonical order
        failures: Cells that raised, in canonical order
    """
    dataset: str
    rank: int
    records: List[RunRecord] = field(default_factory=list)
    failures: List[CellFailure] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.failures


def resolve_rank(spec: RunSpec, dataset: Dataset) -> int:
    """
    The grid's rank: spec.rank, or the 90% spectrum rule when it is 'auto'.

    The 'squared' parameter switches the rule to sums of squared singular
    values.

    Raises:
        BadRank: If an explicit rank is out of range
        ZeroSpectrum: If 'auto' is requested on a zero matrix
    """
    m, n = dataset.shape
    if spec.rank != "auto":
        return check_rank(spec.rank, m, n)
    sigma = truncated_svd(dataset.matrix, min(m, n)).sigma
    squared = spec.params.get("squared", "").lower() in ("1", "true", "yes", "on")
    r = select_rank_90(sigma, squared=squared)
    logger.info("Automatic rank selection picked r = %d", r)
    return r


def plan_cells(spec: RunSpec, dataset: str) -> List[Cell]:
    """Grid cells in canonical order: initializer name, then replicate."""
    cells = []
    for init in sorted(set(spec.inits)):
        randomized = REGISTRY[init].randomized
        for replicate in range(spec.seeds if randomized else 1):
            seed = cell_seed(spec.master_seed, dataset, init, spec.solver.kind, replicate)
            cells.append(Cell(init, replicate, seed, randomized))
    return cells


def _run_cell(spec: RunSpec, dataset: Dataset, r: int, cell: Cell):
    x = dataset.matrix
    solver = spec.solver.kind
    try:
        pair = build_initializer(cell.init, x, r, cell.seed, spec.params, dataset.image_shape)
        _, trace = run_nmf(x, pair, spec.solver, clock=time.perf_counter if spec.timing else None)
    except (NmfError, ValueError) as e:
        logger.warning("Cell %s/%s/%s failed: %s", cell.init, solver, cell.seed_label, e)
        return None, CellFailure(dataset=dataset.name, init=cell.init, solver=solver,
                                 seed=cell.seed_label, message=str(e))

    last = len(trace.points) - 1
    records = [
        RunRecord(
            dataset=dataset.name,
            init=cell.init,
            solver=solver,
            seed=cell.seed_label,
            iteration=point.iteration,
            objective=point.objective,
            rel_error=point.rel_error,
            elapsed_ms=point.elapsed_ms,
            stop_reason=trace.stop_reason if i == last else "",
        )
        for i, point in enumerate(trace.points)
    ]
    logger.info("Cell %s/%s/%s stopped on %s after %d iterations, rel_error %.3e",
                cell.init, solver, cell.seed_label, trace.stop_reason, last,
                trace.points[-1].rel_error)
    return records, None


def run_benchmark(spec: RunSpec, dataset: Optional[Dataset] = None) -> BenchmarkResult:
    """
    Run the (initializer x solver x seed) grid of a spec.

    Randomized initializers run once per replicate with a derived seed;
    deterministic ones run once and are labelled seed '-'. A cell raising a
    domain error is recorded as a failure and does not touch other cells.

    Args:
        spec: Validated run specification
        dataset: Preloaded dataset; loaded from spec.data when None

    Returns:
        BenchmarkResult: Records and failures in canonical order

    Raises:
        NmfError: If the dataset cannot be loaded or the rank is invalid
        ValueError: If the dataset reference is malformed
    """
    if dataset is None:
        dataset = load_dataset(spec.data, spec.master_seed)
    if spec.train_count is not None:
        dataset = train_split(dataset, spec.train_count, spec.master_seed)
    r = resolve_rank(spec, dataset)

    cells = plan_cells(spec, dataset.name)
    logger.info("Running %d cells on %s (%dx%d, r = %d) with %d job(s)",
                len(cells), dataset.name, *dataset.shape, r, spec.jobs)

    with ThreadPoolExecutor(max_workers=spec.jobs) as pool:
        outcomes = list(pool.map(lambda cell: _run_cell(spec, dataset, r, cell), cells))

    result = BenchmarkResult(dataset=dataset.name, rank=r)
    for records, failure in outcomes:
        if failure is not None:
            result.failures.append(failure)
        else:
            result.records.extend(records)

    logger.info("Grid finished: %d records, %d failed cell(s)",
                len(result.records), len(result.failures))
    return result


def summarize(records: Iterable[RunRecord]) -> List[RunRecord]:
    """
    Average records over seeds per (dataset, init, solver, iteration).

    Objective, relative error and elapsed time are arithmetic means over the
    replicates that reached the iteration; replicates stopped early by the
    tolerance no longer contribute afterwards. Summary rows carry seed
    'mean' and no stop reason.

    Args:
        records: Benchmark records

    Returns:
        list: Summary records sorted by (dataset, init, solver, iteration)
    """
    groups: Dict[Tuple[str, str, str, int], List[RunRecord]] = defaultdict(list)
    for record in records:
        groups[(record.dataset, record.init, record.solver, record.iteration)].append(record)

    return [
        RunRecord(
            dataset=dataset,
            init=init,
            solver=solver,
            seed=SUMMARY_SEED,
            iteration=iteration,
            objective=float(np.mean([g.objective for g in group])),
            rel_error=float(np.mean([g.rel_error for g in group])),
            elapsed_ms=float(np.mean([g.elapsed_ms for g in group])),
        )
        for (dataset, init, solver, iteration), group in sorted(groups.items())
    ]
