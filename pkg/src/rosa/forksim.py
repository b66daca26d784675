"""Fork-throughput simulation.

Each forker owns a 2^m x 2^m sparse process array (integer pid rows,
text metadata-surrogate columns, ~nnz_per_row ones per row) and forks by
multiplying it with a random permutation selector.  Workers are OS
processes sharing nothing; a sweep times each forker count and reports
forks per second.
"""

import multiprocessing as mp
import os
import random
import time
from dataclasses import dataclass, field

from . import array
from .array import AssociativeArray
from .errors import BenchmarkError, ShapeError
from .semiring import preset

DEFAULT_FORKER_SWEEP = (1, 2, 4)


@dataclass
class BenchConfig:
    log2_n: int = 14
    nnz_per_row: int = 10
    forkers: tuple = DEFAULT_FORKER_SWEEP
    steps: int = 4
    seed: int = 1
    semiring: str = "plus.times"
    max_workers: int = None  # concurrent worker processes; None = cpu count

    def __post_init__(self):
        if isinstance(self.forkers, int):
            self.forkers = (self.forkers,)
        self.forkers = tuple(self.forkers)
        if not 4 <= self.log2_n <= 22:
            raise ValueError("log2_n must be between 4 and 22")
        if self.nnz_per_row < 1:
            raise ValueError("nnz_per_row must be >= 1")
        if not self.forkers or min(self.forkers) < 1:
            raise ValueError("forker counts must be >= 1")
        if self.steps < 1:
            raise ValueError("steps must be >= 1")


@dataclass
class BenchResult:
    forkers: int
    log2_n: int
    nnz_per_row: int
    processes_managed: int
    total_forks: int
    elapsed_seconds: float
    fork_rate_per_second: float = field(default=None)

    def __post_init__(self):
        if self.fork_rate_per_second is None:
            self.fork_rate_per_second = self.total_forks / self.elapsed_seconds


CSV_HEADER = ("forkers,log2_n,nnz_per_row,processes_managed,"
              "total_forks,elapsed_seconds,fork_rate_per_second")


def results_to_csv(results):
    lines = [CSV_HEADER]
    for r in results:
        lines.append(
            f"{r.forkers},{r.log2_n},{r.nnz_per_row},{r.processes_managed},"
            f"{r.total_forks},{r.elapsed_seconds:.6g},"
            f"{r.fork_rate_per_second:.6g}")
    return "\n".join(lines) + "\n"


def write_results_csv(results, path):
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        f.write(results_to_csv(results))


def _column_label(j):
    return f"meta{j:07d}"


def build_process_array(m, nnz_per_row, seed, semiring_name="plus.times"):
    """Deterministic 2^m x 2^m process array: each pid row gets
    ``nnz_per_row`` distinct pseudo-random metadata columns, all ones."""
    s = preset(semiring_name)
    n = 1 << m
    rng = random.Random(seed)
    one = s.one
    entries = {}
    indices = range(n)
    for pid in range(n):
        for j in rng.sample(indices, nnz_per_row):
            entries[(pid, _column_label(j))] = one
    return AssociativeArray._wrap(s, entries)


def build_permutation(m, seed, semiring_name="plus.times"):
    """Random 2^m permutation selector: row new-pid, column old-pid,
    exactly one entry per row and per column."""
    s = preset(semiring_name)
    n = 1 << m
    mapping = list(range(n))
    random.Random(seed).shuffle(mapping)
    entries = {(mapping[old], old): s.one for old in range(n)}
    return AssociativeArray._wrap(s, entries)


def fork_step(P, perm):
    """One simulated mass fork: relabel every pid row through ``perm``."""
    if set(perm.col_keys()) != set(P.row_keys()):
        raise ShapeError("permutation columns do not cover the pid rows")
    return perm.array_mult(P)


def _worker(m, nnz, array_seed, perm_seed, steps, semiring_name,
            barrier, out_queue, index):
    try:
        P = build_process_array(m, nnz, array_seed, semiring_name)
        perm = build_permutation(m, perm_seed, semiring_name)
        fork_step(P, perm)  # warm-up, untimed
        barrier.wait()
        t0 = time.perf_counter()
        for _ in range(steps):
            P = fork_step(P, perm)
        out_queue.put((index, time.perf_counter() - t0))
    except Exception as exc:  # propagated to the coordinator
        out_queue.put((index, exc))


def _run_point(cfg, forkers, seed_rng):
    """Time one sweep point.  Workers run concurrently in batches of at
    most ``max_workers``; a batch is timed from its synchronized start to
    its slowest member, batches sum."""
    cap = cfg.max_workers or os.cpu_count() or 1
    seeds = [(seed_rng.getrandbits(63), seed_rng.getrandbits(63))
             for _ in range(forkers)]
    ctx = mp.get_context()
    elapsed = 0.0
    for start in range(0, forkers, cap):
        batch = seeds[start:start + cap]
        barrier = ctx.Barrier(len(batch))
        out_queue = ctx.Queue()
        procs = [
            ctx.Process(target=_worker,
                        args=(cfg.log2_n, cfg.nnz_per_row, a_seed, p_seed,
                              cfg.steps, cfg.semiring, barrier, out_queue,
                              start + i))
            for i, (a_seed, p_seed) in enumerate(batch)
        ]
        for p in procs:
            p.start()
        outcomes = [out_queue.get() for _ in procs]
        for p in procs:
            p.join()
        failures = [o for o in outcomes if isinstance(o[1], Exception)]
        if failures:
            raise BenchmarkError(
                f"worker {failures[0][0]} failed: {failures[0][1]}")
        elapsed += max(t for _, t in outcomes)
    n = 1 << cfg.log2_n
    total_forks = forkers * cfg.steps * n
    return BenchResult(
        forkers=forkers,
        log2_n=cfg.log2_n,
        nnz_per_row=cfg.nnz_per_row,
        processes_managed=forkers * n,
        total_forks=total_forks,
        elapsed_seconds=elapsed,
    )


def run_benchmark(cfg):
    """Run the sweep; one BenchResult per forker count.  A worker failure
    aborts with BenchmarkError carrying the completed points."""
    results = []
    for forkers in cfg.forkers:
        # Per-point rng keyed off the config seed keeps every point
        # reproducible regardless of sweep order.
        seed_rng = random.Random(cfg.seed * 1_000_003 + forkers)
        try:
            results.append(_run_point(cfg, forkers, seed_rng))
        except BenchmarkError as exc:
            raise BenchmarkError(str(exc), partial_results=results) from exc
    return results


def native_fork_baseline(forkers, forks_per_worker=1024):
    """Optional comparison path: real fork/exit/waitpid churn.  Posix
    only; excluded from any acceptance checks."""
    def churn(n):
        for _ in range(n):
            pid = os.fork()
            if pid == 0:
                os._exit(0)
            os.waitpid(pid, 0)

    t0 = time.perf_counter()
    outer = []
    for _ in range(forkers):
        pid = os.fork()
        if pid == 0:
            churn(forks_per_worker)
            os._exit(0)
        outer.append(pid)
    for pid in outer:
        os.waitpid(pid, 0)
    elapsed = time.perf_counter() - t0
    total = forkers * forks_per_worker
    return BenchResult(
        forkers=forkers,
        log2_n=0,
        nnz_per_row=0,
        processes_managed=total,
        total_forks=total,
        elapsed_seconds=elapsed,
    )
