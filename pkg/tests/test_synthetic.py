import numpy as np

from swport import plotting
from swport.synthetic import (AMINO_ACIDS, ENV_NR_MAX, database_lengths, mutate, query_lengths, random_residues,
                              random_sequences)


def test_query_lengths_span_range():
    q = query_lengths()
    assert len(q) == 20 and q[0] == 144 and q[-1] == 5478 and q == sorted(q)


def test_database_lengths():
    lens = database_lengths(50_000, seed=1)
    assert 1 <= min(lens) and max(lens) <= ENV_NR_MAX
    assert abs(np.mean(lens) - 208) < 10


def test_reproducible_and_alphabet():
    a = random_sequences([5, 9], seed=3)
    assert a == random_sequences([5, 9], seed=3)
    assert set("".join(s.residues for s in a)) <= set(AMINO_ACIDS)


def test_mutate_rate():
    s = random_residues(10_000, AMINO_ACIDS, 0)
    assert mutate(s, 0.0, seed=1) == s
    changed = sum(x != y for x, y in zip(s, mutate(s, 0.5, seed=1)))
    assert 4000 < changed < 5200


def test_figures_render(tmp_path):
    plotting.peak_figure([("a", "dGPU", 10.0), ("b", "CPU", 2.0)], tmp_path / "p.png")
    plotting.efficiency_figure(["a", "b"], {"X": [0.4, None]}, {"ab": 0.4, "na": None}, tmp_path / "e.png")
    plotting.makespan_figure({"s": {"w0": 1.0, "w1": 2.0}}, tmp_path / "m.png")
    plotting.bench_figure([("protein", 0.2, 2.6)], tmp_path / "b.png")
    assert all((tmp_path / f).stat().st_size > 0 for f in ("p.png", "e.png", "m.png", "b.png"))
