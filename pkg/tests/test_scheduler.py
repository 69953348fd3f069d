import itertools

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from swport.core import score_local
from swport.errors import NoQueries, NoTargets, NoWorkers, UnknownWorker
from swport.scheduler import (Assignment, SearchTask, Strategy, WorkerSpec, distribute, estimate_makespan,
                              partition_by_length, run_search)
from swport.synthetic import AMINO_ACIDS, database_lengths, random_sequences

EQUAL2 = [WorkerSpec("a", 1.0), WorkerSpec("b", 1.0)]


def _makespans(a, workers):
    return [estimate_makespan(a, workers).seconds[w.id] * 1e9 for w in workers]


# ---------------------------------------------------------------- partition

def test_partition_example():
    short, long_ = partition_by_length(["x" * 10, "x" * 2000, "x" * 30], 100)
    assert [len(s) for s in short] == [10, 30] and [len(s) for s in long_] == [2000]


def test_partition_threshold_above_max():
    db = ["a" * n for n in (5, 50, 500)]
    assert partition_by_length(db, 500) == (db, [])


def test_partition_env_nr_like():
    lens = database_lengths(20000, seed=4)
    assert max(lens) <= 16925
    db = ["x" * n for n in lens]
    short, long_ = partition_by_length(db, 3000)
    assert len(short) == sum(1 for n in lens if n <= 3000)
    assert len(long_) == sum(1 for n in lens if n > 3000)
    assert [len(s) for s in long_] == [n for n in lens if n > 3000]


def test_partition_rejects_zero_threshold():
    with pytest.raises(ValueError):
        partition_by_length([], 0)


# ---------------------------------------------------------------- distribute

def test_query_split_equal():
    a = distribute([10, 10, 10, 10], [5], EQUAL2, Strategy.QUERY_SPLIT)
    assert [len(a.tasks[w]) for w in ("a", "b")] == [2, 2]


def test_round_robin_vs_capability_example():
    rr = distribute([100, 1, 1, 1], [1], EQUAL2, "query-split")
    assert _makespans(rr, EQUAL2) == pytest.approx([101, 2])
    ca = distribute([100, 1, 1, 1], [1], EQUAL2, "capability-aware")
    assert _makespans(ca, EQUAL2) == pytest.approx([100, 3])


def test_capability_aware_is_optimal_on_small_example():
    costs = [100, 1, 1, 1]
    best = min(max(sum(c for c, w in zip(costs, pick) if w == k) for k in (0, 1))
               for pick in itertools.product((0, 1), repeat=len(costs)))
    ca = distribute(costs, [1], EQUAL2, "capability-aware")
    assert estimate_makespan(ca, EQUAL2).makespan * 1e9 == pytest.approx(best)


def test_db_split_chunks_contiguous_and_balanced():
    db = [10] * 9 + [30]
    a = distribute([2], db, EQUAL2, Strategy.DB_SPLIT)
    ranges = [a.tasks[w][0].target_ids for w in ("a", "b")]
    assert ranges[0].start == 0 and ranges[0].stop == ranges[1].start and ranges[1].stop == 10
    assert [t.cell_count for t in a.all_tasks()] == [120, 120]


def test_db_split_more_workers_than_sequences():
    workers = [WorkerSpec(f"w{k}", 1.0) for k in range(5)]
    a = distribute([3], [4, 4], workers, Strategy.DB_SPLIT)
    assert sum(t.cell_count for t in a.all_tasks()) == 24
    covered = sorted(i for t in a.all_tasks() for i in t.target_ids)
    assert covered == [0, 1]


def test_adaptive_choice():
    assert Strategy.adaptive(1, 4) is Strategy.DB_SPLIT
    assert Strategy.adaptive(8, 4) is Strategy.QUERY_SPLIT


def test_distribute_errors():
    with pytest.raises(NoWorkers):
        distribute([1], [1], [], "query-split")
    with pytest.raises(NoQueries):
        distribute([], [1], EQUAL2, "query-split")
    with pytest.raises(ValueError):
        distribute([1], [1], EQUAL2, "work-stealing")
    with pytest.raises(ValueError):
        distribute([1], [1], [WorkerSpec("a", 1), WorkerSpec("a", 2)], "query-split")
    with pytest.raises(ValueError):
        WorkerSpec("a", 0)


def test_search_task_from_sequences():
    qs = random_sequences([7, 9], seed=0)
    a = distribute(qs, ["AAA", "CC"], EQUAL2, "query-split")
    assert [t.cell_count for t in a.all_tasks()] == [35, 45]
    assert a.tasks["a"][0].query is qs[0]


# ---------------------------------------------------------------- makespan

def test_makespan_one_worker():
    w = [WorkerSpec("x", 1.0)]
    a = Assignment({"x": [SearchTask(0, range(1), 10**9)]}, Strategy.QUERY_SPLIT)
    est = estimate_makespan(a, w)
    assert est.makespan == pytest.approx(1.0) and est.imbalance == pytest.approx(1.0)


def test_makespan_gpu_plus_cpu():
    workers = [WorkerSpec("rtx3090", 741.3), WorkerSpec("gold6138", 101.3)]
    a = distribute([5 * 10**11, 5 * 10**11], [1], workers, "query-split")
    est = estimate_makespan(a, workers)
    assert est.seconds["rtx3090"] == pytest.approx(0.6745, abs=1e-4)
    assert est.seconds["gold6138"] == pytest.approx(4.936, abs=1e-3)
    assert est.imbalance == pytest.approx(1.76, abs=0.005)


def test_makespan_capability_aware_fine_grained():
    workers = [WorkerSpec("rtx3090", 741.3), WorkerSpec("gold6138", 101.3)]
    a = distribute([10**9] * 1000, [1], workers, "capability-aware")
    est = estimate_makespan(a, workers)
    granule = 10**9 / (101.3 * 1e9)
    assert est.makespan <= 10**12 / ((741.3 + 101.3) * 1e9) + granule
    assert est.imbalance == pytest.approx(1.0, abs=0.01)


def test_makespan_unknown_worker():
    a = Assignment({"ghost": []}, Strategy.QUERY_SPLIT)
    with pytest.raises(UnknownWorker):
        estimate_makespan(a, EQUAL2)


worker_lists = st.lists(st.floats(0.5, 1000), min_size=1, max_size=6).map(
    lambda ps: [WorkerSpec(f"w{k}", p) for k, p in enumerate(ps)])


@given(st.lists(st.integers(1, 10**6), min_size=1, max_size=40), worker_lists)
def test_capability_aware_never_worse(costs, workers):
    rr = estimate_makespan(distribute(costs, [1], workers, "query-split"), workers).makespan
    ca = estimate_makespan(distribute(costs, [1], workers, "capability-aware"), workers).makespan
    assert ca <= rr * (1 + 1e-12)


@given(st.lists(st.integers(1, 500), min_size=1, max_size=20),
       st.lists(st.integers(1, 300), min_size=1, max_size=30), worker_lists,
       st.sampled_from(["query-split", "db-split", "capability-aware"]))
def test_conservation_and_coverage(q_lens, db_lens, workers, strategy):
    a = distribute(q_lens, db_lens, workers, strategy)
    assert sum(a.cells_per_worker().values()) == sum(q_lens) * sum(db_lens)
    covered = sorted((t.query_index, i) for t in a.all_tasks() for i in t.target_ids)
    assert covered == [(qi, i) for qi in range(len(q_lens)) for i in range(len(db_lens))]


# ---------------------------------------------------------------- run_search

@pytest.fixture(scope="module")
def small_search(request):
    rng = np.random.default_rng(20)
    queries = random_sequences(rng.integers(30, 120, 6), AMINO_ACIDS, "q", rng)
    db = random_sequences(list(rng.integers(5, 200, 80)) + [400, 520], AMINO_ACIDS, "t", rng)
    return queries, db


def test_run_search_strategy_and_worker_neutral(protein, small_search):
    scheme, _ = protein
    queries, db = small_search
    base = run_search(queries, db, scheme, 1, threshold=300)
    for strategy in Strategy:
        for workers in (1, 4):
            r = run_search(queries, db, scheme, workers, threshold=300, strategy=strategy)
            assert np.array_equal(r.scores, base.scores)
            assert r.hits == base.hits


def test_run_search_matches_full_scan(protein, small_search):
    scheme, _ = protein
    queries, db = small_search
    r = run_search(queries, db, scheme, 2, threshold=300, top_k=10)
    for qi, q in enumerate(queries):
        full = [score_local(q, t, scheme) for t in db]
        order = sorted(range(len(db)), key=lambda t: (-full[t].score, t))[:10]
        assert [h.target_index for h in r.hits[qi]] == order
        assert [(h.score, h.end_q, h.end_d) for h in r.hits[qi]] == \
            [(full[t].score, full[t].end_q, full[t].end_d) for t in order]


def test_run_search_cell_accounting(protein, small_search):
    scheme, _ = protein
    queries, db = small_search
    r = run_search(queries, db, scheme, 2)
    total = sum(len(s) for s in db)
    assert r.cells_per_query == [len(q) * total for q in queries]
    assert set(r.worker_seconds) == {"w0", "w1"}


def test_run_search_mocked_clock(protein):
    scheme, _ = protein
    ticks = iter([0.0, 0.0, 0.0, 2.0])
    r = run_search(["ACDEFGHIKL"], ["ACD" * 10] * 5, scheme, 1, clock=lambda: next(ticks))
    assert r.wall_seconds == 2.0
    assert r.gcups == 10 * 150 / 2e9


def test_run_search_ties_by_database_order(protein):
    scheme, _ = protein
    r = run_search(["WWWW"], ["AAAA", "WWWW", "CC", "WWWW"], scheme, top_k=3)
    assert [h.target_index for h in r.hits[0]] == [1, 3, 0]


def test_run_search_errors(protein):
    scheme, _ = protein
    with pytest.raises(NoTargets):
        run_search(["ACD"], [], scheme)
    with pytest.raises(NoQueries):
        run_search([], ["ACD"], scheme)
    with pytest.raises(NoWorkers):
        run_search(["ACD"], ["ACD"], scheme, workers=0)
    with pytest.raises(ValueError):
        run_search(["ACD"], ["ACD"], scheme, top_k=0)
