import csv
import io
import json

import pytest

from swport.cli import bench_rows, main, parse_queries, parse_workers
from swport.io import emit_fasta, FastaRecord
from swport.synthetic import AMINO_ACIDS, random_sequences


def run(argv):
    out = io.StringIO()
    code = main(argv, out)
    return code, out.getvalue()


def jsonl(text):
    return [json.loads(l) for l in text.splitlines()]


@pytest.fixture
def fasta(tmp_path):
    def write(name, seqs):
        path = tmp_path / name
        with open(path, "w") as fh:
            emit_fasta([FastaRecord(s.id, s.residues) for s in seqs], fh)
        return str(path)
    return write


@pytest.fixture
def protein_files(fasta):
    qs = random_sequences([60, 90, 40], AMINO_ACIDS, "q", seed=1)
    db = random_sequences([30, 80, 120, 15, 2500, 60, 45], AMINO_ACIDS, "t", seed=2)
    return fasta("q.fa", qs), fasta("db.fa", db)


def test_align_dna_defaults(fasta):
    q = fasta("q.fa", random_sequences([4], "A", "a", seed=0))
    code, out = run(["align", q, q, "--format", "jsonl"])
    assert code == 0
    recs = jsonl(out)
    assert recs[0]["kind"] == "config" and (recs[0]["gap_open"], recs[0]["gap_extend"]) == (5, 2)
    assert recs[1]["score"] == 4


def test_align_traceback_text(fasta):
    q = fasta("q.fa", [FastaRecord("q", "ACGTACGT")])
    d = fasta("d.fa", [FastaRecord("d", "ACGACGT")])
    code, out = run(["align", q, d, "--traceback"])
    assert code == 0 and "cigar=" in out and "score=" in out


def test_align_kernels_agree(protein_files):
    q, db = protein_files
    a = jsonl(run(["align", q, db, "--matrix", "BLOSUM62", "--format", "jsonl"])[1])
    b = jsonl(run(["align", q, db, "--matrix", "blosum62", "--kernel", "wavefront", "--format", "jsonl"])[1])
    assert a[0]["gap_open"] == 10
    assert [r["score"] for r in a[1:]] == [r["score"] for r in b[1:]]


def test_align_matrix_file(tmp_path, fasta):
    m = tmp_path / "toy.mat"
    m.write_text("  A B\nA 2 -1\nB -1 2\n")
    q = fasta("q.fa", [FastaRecord("q", "ABAB")])
    code, out = run(["align", q, q, "--matrix", str(m), "--gap-open", "3", "--format", "jsonl"])
    assert code == 0 and jsonl(out)[1]["score"] == 8


def test_search_deterministic_output(protein_files):
    q, db = protein_files
    argv = ["search", q, db, "--matrix", "BLOSUM62", "--top", "3", "--format", "jsonl", "--no-timing"]
    first = run(argv)[1]
    for extra in (["--workers", "3"], ["--strategy", "db-split", "--workers", "2"],
                  ["--strategy", "capability-aware", "--workers", "2"], ["--threshold", "50"]):
        assert run(argv + extra)[1].replace('"workers": 3', '"workers": 1') \
            .replace('"workers": 2', '"workers": 1').replace('"threshold": 50', '"threshold": 2000') \
            .replace('"strategy": "db-split"', '"strategy": "query-split"') \
            .replace('"strategy": "capability-aware"', '"strategy": "query-split"') == first
    hits = [r for r in jsonl(first) if r["kind"] == "hit"]
    assert len(hits) == 9
    assert not any(r["kind"] in ("timing", "summary") for r in jsonl(first))


def test_search_repeats_and_report(protein_files, tmp_path):
    q, db = protein_files
    report = tmp_path / "run.jsonl"
    code, out = run(["search", q, db, "--matrix", "BLOSUM62", "--repeats", "2", "--report", str(report)])
    assert code == 0 and "mean over 2 run(s)" in out
    recs = jsonl(report.read_text())
    timing = [r for r in recs if r["kind"] == "timing"]
    assert len(timing) == 2
    assert recs[-1]["mean_gcups"] == pytest.approx(sum(t["gcups"] for t in timing) / 2)
    queries = [r for r in recs if r["kind"] == "query"]
    assert [r["cells"] for r in queries] == [60 * 2850, 90 * 2850, 40 * 2850]


def test_peak_listing(tmp_path):
    code, out = run(["peak", "--format", "jsonl", "--figure", str(tmp_path / "p.png")])
    recs = jsonl(out)
    assert code == 0 and len(recs) == 21
    assert (tmp_path / "p.png").stat().st_size > 0
    code, out = run(["peak", "--device", "RTX 3090"])
    assert "741.3" in out


def test_pp_from_log(tmp_path):
    code, out = run(["pp", "--log", "builtin:protein_gpu", "--set", "amd:RX 6700 XT,RX Vega 6",
                     "--format", "jsonl", "--figure", str(tmp_path / "pp.png")])
    assert code == 0
    pp = [r for r in jsonl(out) if r["kind"] == "pp"]
    assert pp[0]["CUDA"] is None and pp[0]["SYCL"] == pytest.approx(0.365, abs=0.002)
    assert (tmp_path / "pp.png").exists()


def test_simulate(tmp_path):
    code, out = run(["simulate", "--workers", "gpu=741.3,cpu=101.3", "--queries", "2x5e11",
                     "--strategy", "query-split", "--format", "jsonl", "--figure", str(tmp_path / "m.png")])
    assert code == 0
    rows = {r["worker"]: r for r in jsonl(out)}
    assert rows["gpu"]["seconds"] == pytest.approx(0.6745, abs=1e-4)
    assert rows["cpu"]["imbalance"] == pytest.approx(1.76, abs=0.005)


def test_simulate_spec_parsing():
    ws = parse_workers("2x10,gpu=RTX 3090")
    assert [w.peak_gcups for w in ws[:2]] == [10, 10]
    assert ws[2].id == "gpu" and ws[2].peak_gcups == pytest.approx(741.3, abs=0.1)
    assert parse_queries("100,3x1") == [100, 1, 1, 1]


def test_bench(tmp_path):
    out_dir = tmp_path / "b"
    code, out = run(["bench", "--out", str(out_dir), "--repeats", "1", "--queries", "2", "--max-query", "200",
                     "--db-size", "200", "--dna-length", "300"])
    assert code == 0
    with open(out_dir / "bench_report.csv") as fh:
        rows = list(csv.DictReader(fh))
    assert [r["app"] for r in rows] == ["protein", "pairwise"]
    for r in rows:
        assert float(r["arch_eff"]) == pytest.approx(float(r["achieved_gcups"]) / float(r["peak_gcups"]))
    assert (out_dir / "bench.png").stat().st_size > 0
    assert (out_dir / "bench_log.csv").exists()


@pytest.mark.parametrize("argv,code,needle", [
    (["align", "/nonexistent.fa", "/nonexistent.fa"], 1, "FileNotFoundError"),
    (["peak", "--device", "Voodoo"], 2, "UnknownDevice"),
    (["simulate", "--workers", "", "--queries", "1"], 2, "NoWorkers"),
    (["pp", "--log", "builtin:protein_gpu", "--set", "x:Nope"], 2, "MissingRecord"),
])
def test_errors(argv, code, needle, capsys):
    assert run(argv)[0] == code
    err = capsys.readouterr().err
    assert needle in err and err.count("\n") == 1


def test_malformed_fasta(tmp_path, capsys):
    bad = tmp_path / "bad.fa"
    bad.write_text("ACGT\n")
    assert run(["align", str(bad), str(bad)])[0] == 2
    assert "MalformedHeader" in capsys.readouterr().err
