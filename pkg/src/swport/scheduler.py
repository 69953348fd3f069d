"""Database-search orchestration over a set of workers.

Assignments are static and computed up front:

* ``query-split``: queries dealt round-robin, ignoring length and capability.
* ``db-split``: every query's database is cut into one contiguous chunk per
  worker (sequence boundaries only, roughly equal residues per chunk).
* ``capability-aware``: longest-processing-time greedy on per-query cells,
  placing each query where it would finish first given the worker's peak.
  If plain round-robin happens to estimate a shorter makespan it is kept
  instead, so this strategy never estimates worse than ``query-split``.
* ``work-stealing``: not a static assignment; workers pull whole queries from
  a shared queue.  Only :func:`run_search` accepts it.

Scores never depend on the strategy or on the number of workers.
"""

from __future__ import annotations

import queue
import threading
import time
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .core import Sequence, as_sequence
from .errors import NoQueries, NoTargets, NoWorkers, UnknownWorker
from .kernels import WavefrontConfig, _wavefront_encoded, encode_many, score_encoded
from .perfmodel import measured_gcups
from .scoring import ScoringScheme

DEFAULT_THRESHOLD = 2000
DEFAULT_TOP_K = 10


class Strategy(str, Enum):
    QUERY_SPLIT = "query-split"
    DB_SPLIT = "db-split"
    CAPABILITY_AWARE = "capability-aware"
    WORK_STEALING = "work-stealing"

    @classmethod
    def adaptive(cls, n_queries: int, n_workers: int) -> Strategy:
        """Split the database when workers outnumber queries, else split queries."""
        return cls.DB_SPLIT if n_workers > n_queries else cls.QUERY_SPLIT


@dataclass(frozen=True)
class WorkerSpec:
    id: str
    peak_gcups: float
    lanes: int = 32

    def __post_init__(self):
        if not self.peak_gcups > 0:
            raise ValueError(f"worker {self.id}: peak_gcups must be positive")
        if self.lanes < 1:
            raise ValueError(f"worker {self.id}: lanes must be >= 1")


@dataclass(frozen=True)
class SearchTask:
    query_index: int
    target_ids: range
    cell_count: int
    query: Sequence | None = None


@dataclass
class Assignment:
    tasks: dict[str, list[SearchTask]]
    strategy: Strategy

    def cells_per_worker(self) -> dict[str, int]:
        return {w: sum(t.cell_count for t in ts) for w, ts in self.tasks.items()}

    def all_tasks(self) -> list[SearchTask]:
        return [t for ts in self.tasks.values() for t in ts]


@dataclass(frozen=True)
class MakespanEstimate:
    seconds: dict[str, float]
    makespan: float
    imbalance: float


def partition_by_length(db, threshold: int = DEFAULT_THRESHOLD):
    """Split into (short, long) by ``len <= threshold``, keeping input order."""
    if threshold < 1:
        raise ValueError("threshold must be >= 1")
    short, long_ = [], []
    for s in db:
        (short if len(s) <= threshold else long_).append(s)
    return short, long_


def _lengths(items) -> list[int]:
    return [int(x) if isinstance(x, (int, np.integer)) else len(x) for x in items]


def _db_chunks(db_lens: list[int], parts: int) -> list[range]:
    """Contiguous index ranges with roughly equal residue totals."""
    cum = np.cumsum(db_lens)
    total = int(cum[-1])
    cuts = [0]
    for k in range(1, parts):
        cuts.append(int(np.searchsorted(cum, total * k / parts, side="left")) + 1)
    cuts.append(len(db_lens))
    cuts = [min(max(c, lo), len(db_lens)) for c, lo in zip(cuts, [0] + cuts[:-1])]
    return [range(a, b) for a, b in zip(cuts[:-1], cuts[1:])]


def _round_robin(tasks, workers):
    out = {w.id: [] for w in workers}
    for k, t in enumerate(tasks):
        out[workers[k % len(workers)].id].append(t)
    return out


def _lpt(tasks, workers):
    out = {w.id: [] for w in workers}
    load = [0.0] * len(workers)
    for t in sorted(tasks, key=lambda t: (-t.cell_count, t.query_index)):
        finish = [(load[k] + t.cell_count) / w.peak_gcups for k, w in enumerate(workers)]
        k = min(range(len(workers)), key=lambda k: (finish[k], k))
        load[k] += t.cell_count
        out[workers[k].id].append(t)
    return out


def _est_makespan(tasks_by_worker, workers) -> float:
    return max(sum(t.cell_count for t in tasks_by_worker[w.id]) / w.peak_gcups for w in workers)


def distribute(queries, db, workers: list[WorkerSpec], strategy: Strategy | str) -> Assignment:
    """Static assignment of search tasks to workers.

    ``queries`` and ``db`` may be sequences or plain lengths.
    """
    strategy = Strategy(strategy)
    if not workers:
        raise NoWorkers("at least one worker is required")
    if not queries:
        raise NoQueries("at least one query is required")
    if len({w.id for w in workers}) != len(workers):
        raise ValueError("worker ids must be unique")
    db_lens = _lengths(db)
    if not db_lens:
        raise NoTargets("the database is empty")
    total_db = sum(db_lens)
    q_lens = _lengths(queries)
    seqs = [q if isinstance(q, Sequence) else None for q in queries]

    if strategy is Strategy.DB_SPLIT:
        out = {w.id: [] for w in workers}
        chunks = _db_chunks(db_lens, len(workers))
        for qi, ql in enumerate(q_lens):
            for w, chunk in zip(workers, chunks):
                if len(chunk):
                    cells = ql * sum(db_lens[chunk.start:chunk.stop])
                    out[w.id].append(SearchTask(qi, chunk, cells, seqs[qi]))
        return Assignment(out, strategy)

    tasks = [SearchTask(qi, range(len(db_lens)), ql * total_db, seqs[qi]) for qi, ql in enumerate(q_lens)]
    if strategy is Strategy.QUERY_SPLIT:
        return Assignment(_round_robin(tasks, workers), strategy)
    if strategy is Strategy.CAPABILITY_AWARE:
        greedy = _lpt(tasks, workers)
        rr = _round_robin(tasks, workers)
        if _est_makespan(rr, workers) < _est_makespan(greedy, workers):
            greedy = rr
        return Assignment(greedy, strategy)
    raise ValueError(f"{strategy.value} has no static assignment")


def estimate_makespan(a: Assignment, workers: list[WorkerSpec]) -> MakespanEstimate:
    """Per-worker seconds at peak rate, the makespan and makespan / mean."""
    spec = {w.id: w for w in workers}
    unknown = [w for w in a.tasks if w not in spec]
    if unknown:
        raise UnknownWorker(f"no spec for worker(s) {', '.join(unknown)}")
    seconds = {w.id: sum(t.cell_count for t in a.tasks.get(w.id, ())) / (w.peak_gcups * 1e9)
               for w in workers}
    makespan = max(seconds.values())
    mean = sum(seconds.values()) / len(seconds)
    return MakespanEstimate(seconds, makespan, makespan / mean if mean > 0 else 1.0)


# ---------------------------------------------------------------- execution

@dataclass(frozen=True)
class Hit:
    target_index: int
    target_id: str
    score: int
    end_q: int
    end_d: int


@dataclass
class SearchReport:
    hits: list[list[Hit]]
    cells_per_query: list[int]
    wall_seconds: float
    worker_seconds: dict[str, float]
    strategy: Strategy
    assignment: Assignment | None = None
    scores: np.ndarray | None = field(default=None, repr=False)

    @property
    def total_cells(self) -> int:
        return sum(self.cells_per_query)

    @property
    def gcups(self) -> float:
        return measured_gcups(self.total_cells, 1, self.wall_seconds)


def _as_workers(workers) -> list[WorkerSpec]:
    if isinstance(workers, int):
        if workers < 1:
            raise NoWorkers("at least one worker is required")
        return [WorkerSpec(f"w{k}", 1.0) for k in range(workers)]
    workers = list(workers)
    if not workers:
        raise NoWorkers("at least one worker is required")
    return workers


def top_hits(scores, end_q, end_d, db_ids, k: int) -> list[Hit]:
    """Best ``k`` targets by score, ties by database order."""
    order = np.lexsort((np.arange(scores.size), -scores.astype(np.int64)))[:k]
    return [Hit(int(t), db_ids[t], int(scores[t]), int(end_q[t]), int(end_d[t])) for t in order]


def run_search(queries, db, scheme: ScoringScheme, workers=1, threshold: int = DEFAULT_THRESHOLD,
               strategy: Strategy | str = Strategy.QUERY_SPLIT, top_k: int = DEFAULT_TOP_K,
               wavefront: WavefrontConfig | None = None, clock=time.perf_counter) -> SearchReport:
    """Search every query against ``db`` on a pool of host threads.

    Targets up to ``threshold`` residues go through the lane-batched kernel,
    longer ones through the wavefront kernel.
    """
    strategy = Strategy(strategy)
    workers = _as_workers(workers)
    queries = [as_sequence(q, f"q{k}") for k, q in enumerate(queries)]
    db = [as_sequence(s, f"t{k}") for k, s in enumerate(db)]
    if not queries:
        raise NoQueries("at least one query is required")
    if not db:
        raise NoTargets("the database is empty")
    if top_k < 1:
        raise ValueError("top_k must be >= 1")
    wavefront = wavefront or WavefrontConfig()

    codes, offsets, lens = encode_many(db, scheme)
    if (lens == 0).any():
        raise NoTargets("database contains an empty sequence")
    qcodes = [scheme.encode(q.residues) for q in queries]
    long_mask = lens > threshold
    n_q, n_t = len(queries), len(db)
    scores = np.zeros((n_q, n_t), dtype=np.int32)
    ends_q = np.zeros((n_q, n_t), dtype=np.int64)
    ends_d = np.zeros((n_q, n_t), dtype=np.int64)

    def execute(task: SearchTask, lanes: int):
        qi = task.query_index
        idx = np.arange(task.target_ids.start, task.target_ids.stop)
        short = idx[~long_mask[idx]]
        if short.size:
            s, i, j, _ = score_encoded(qcodes[qi], codes, offsets, lens, short, scheme, lanes)
            scores[qi, short] = s[short]
            ends_q[qi, short] = i[short]
            ends_d[qi, short] = j[short]
        for t in idx[long_mask[idx]]:
            r = _wavefront_encoded(qcodes[qi], codes[offsets[t]:offsets[t] + lens[t]], scheme, wavefront)
            scores[qi, t], ends_q[qi, t], ends_d[qi, t] = r.score, r.end_q, r.end_d

    busy = {w.id: 0.0 for w in workers}
    errors: list[BaseException] = []
    assignment = None

    if strategy is Strategy.WORK_STEALING:
        pending: queue.SimpleQueue = queue.SimpleQueue()
        total = int(lens.sum())
        for qi, q in enumerate(queries):
            pending.put(SearchTask(qi, range(n_t), len(q) * total, q))

        def worker_loop(w: WorkerSpec):
            while not errors:
                try:
                    task = pending.get_nowait()
                except queue.Empty:
                    return
                t0 = clock()
                execute(task, w.lanes)
                busy[w.id] += clock() - t0
    else:
        assignment = distribute(queries, lens.tolist(), workers, strategy)

        def worker_loop(w: WorkerSpec):
            for task in assignment.tasks[w.id]:
                if errors:
                    return
                t0 = clock()
                execute(task, w.lanes)
                busy[w.id] += clock() - t0

    def guarded(w):
        try:
            worker_loop(w)
        except BaseException as exc:
            errors.append(exc)

    start = clock()
    if len(workers) == 1:
        guarded(workers[0])
    else:
        threads = [threading.Thread(target=guarded, args=(w,), daemon=True) for w in workers]
        for th in threads:
            th.start()
        for th in threads:
            th.join()
    wall = clock() - start
    if errors:
        raise errors[0]

    ids = [s.id for s in db]
    hits = [top_hits(scores[qi], ends_q[qi], ends_d[qi], ids, top_k) for qi in range(n_q)]
    total_db = int(lens.sum())
    return SearchReport(
        hits=hits,
        cells_per_query=[len(q) * total_db for q in queries],
        wall_seconds=wall,
        worker_seconds=busy,
        strategy=strategy,
        assignment=assignment,
        scores=scores,
    )

