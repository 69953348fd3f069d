"""Command-line entry point: ``swport <subcommand> ...``.

Machine output goes to standard output, diagnostics to standard error.  Each
library error class maps to a one-line message and its own exit status.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from pathlib import Path

from . import __version__
from .core import Sequence, aligned_rows, score_local, traceback_local
from .errors import SwportError
from .io import RunReport, read_fasta
from .kernels import WavefrontConfig, wavefront_score
from .perfmodel import find_device, load_registry, local_device, theoretical_peak
from .portability import (EfficiencyRecord, PlatformSet, efficiency_rows, format_csv, format_text,
                          load_bundled_log, platform_efficiencies, pp_bar, read_log, select, write_log)
from .scheduler import Strategy, WorkerSpec, distribute, estimate_makespan, run_search
from .scoring import ScoringScheme, blosum62, dna_matrix, parse_score_matrix

STATIC_STRATEGIES = [Strategy.QUERY_SPLIT.value, Strategy.DB_SPLIT.value, Strategy.CAPABILITY_AWARE.value]


# ---------------------------------------------------------------- helpers

def _scheme(args) -> ScoringScheme:
    """DNA mode unless a matrix is given; gap defaults follow the mode."""
    if args.matrix is None:
        go = 5 if args.gap_open is None else args.gap_open
        ge = 2 if args.gap_extend is None else args.gap_extend
        return ScoringScheme(dna_matrix(args.match, args.mismatch), go, ge)
    if args.matrix.upper() == "BLOSUM62":
        sm = blosum62()
    else:
        with open(args.matrix) as fh:
            sm = parse_score_matrix(fh)
    go = 10 if args.gap_open is None else args.gap_open
    ge = 2 if args.gap_extend is None else args.gap_extend
    return ScoringScheme(sm, go, ge)


def _sequences(path) -> list[Sequence]:
    return [Sequence(r.id, r.residues) for r in read_fasta(path)]


def _emit_jsonl(records, out):
    for rec in records:
        out.write(json.dumps({"schema": 1, **rec}, sort_keys=True) + "\n")


def _scoring_args(p):
    g = p.add_argument_group("scoring")
    g.add_argument("--match", type=int, default=1, help="DNA match score (default +1)")
    g.add_argument("--mismatch", type=int, default=-3, help="DNA mismatch score (default -3)")
    g.add_argument("--matrix", metavar="FILE|BLOSUM62",
                   help="substitution matrix; switches to protein mode with gaps 10/2")
    g.add_argument("--gap-open", type=int, help="gap open penalty (5 for DNA, 10 with --matrix)")
    g.add_argument("--gap-extend", type=int, help="gap extend penalty (default 2)")


def _format_arg(p, choices=("text", "jsonl")):
    p.add_argument("--format", choices=choices, default="text")


# ---------------------------------------------------------------- align

def cmd_align(args, out) -> int:
    scheme = _scheme(args)
    queries, targets = _sequences(args.query), _sequences(args.target)
    cfg = WavefrontConfig(tile_rows=args.tile_rows)
    records = []
    for q in queries:
        for d in targets:
            if args.traceback:
                r = traceback_local(q, d, scheme, args.cell_budget)
            elif args.kernel == "wavefront":
                r = wavefront_score(q, d, scheme, cfg, args.workers)
            else:
                r = score_local(q, d, scheme)
            rec = {"kind": "alignment", "query": q.id, "target": d.id, "score": r.score,
                   "end_q": r.end_q, "end_d": r.end_d}
            if r.ops is not None:
                rec.update(start_q=r.start_q, start_d=r.start_d, cigar=r.cigar)
            records.append((rec, q, d, r))

    if args.format == "jsonl":
        config = {"kind": "config", "command": "align", "kernel": args.kernel,
                  "gap_open": scheme.gap_open, "gap_extend": scheme.gap_extend,
                  "matrix": args.matrix or f"dna{args.match:+d}/{args.mismatch:+d}"}
        _emit_jsonl([config] + [r[0] for r in records], out)
        return 0
    for rec, q, d, r in records:
        out.write(f"{rec['query']}\t{rec['target']}\tscore={r.score}\tend=({r.end_q},{r.end_d})")
        if r.ops is not None:
            out.write(f"\tstart=({r.start_q},{r.start_d})\tcigar={r.cigar or '-'}\n")
            top, mid, bot = aligned_rows(q, d, r)
            for k in range(0, len(top), 60):
                out.write(f"  {top[k:k + 60]}\n  {mid[k:k + 60]}\n  {bot[k:k + 60]}\n\n")
        else:
            out.write("\n")
    return 0


# ---------------------------------------------------------------- search

def cmd_search(args, out) -> int:
    scheme = _scheme(args)
    queries, db = _sequences(args.queries), _sequences(args.db)
    workers = [WorkerSpec(f"w{k}", 1.0, args.lane_width) for k in range(args.workers)]
    strategy = (Strategy.adaptive(len(queries), len(workers)) if args.strategy == "adaptive"
                else Strategy(args.strategy))
    cfg = WavefrontConfig(tile_rows=args.tile_rows)
    config = {"queries": len(queries), "db_sequences": len(db), "db_residues": sum(len(s) for s in db),
              "threshold": args.threshold, "workers": args.workers, "strategy": strategy.value,
              "top": args.top, "repeats": args.repeats, "gap_open": scheme.gap_open,
              "gap_extend": scheme.gap_extend, "matrix": args.matrix or "dna"}
    report = RunReport("search", config)
    first = None
    for rep in range(args.repeats):
        res = run_search(queries, db, scheme, workers, args.threshold, strategy, args.top, cfg)
        if first is None:
            first = res
        report.repetitions.append({
            "wall_seconds": res.wall_seconds,
            "worker_seconds": res.worker_seconds,
            "cells": res.total_cells,
            "gcups": res.gcups,
        })
    for qi, (q, hits) in enumerate(zip(queries, first.hits)):
        report.results.append({"kind": "query", "query": q.id, "length": len(q),
                               "cells": first.cells_per_query[qi]})
        for rank, h in enumerate(hits, 1):
            report.results.append({"kind": "hit", "query": q.id, "rank": rank, "target": h.target_id,
                                   "target_index": h.target_index, "score": h.score,
                                   "end_q": h.end_q, "end_d": h.end_d})

    if args.report:
        with open(args.report, "w") as fh:
            report.write_jsonl(fh, timing=not args.no_timing)
    if args.format == "jsonl":
        report.write_jsonl(out, timing=not args.no_timing)
        return 0
    for rec in report.results:
        if rec["kind"] == "query":
            out.write(f"# {rec['query']} (length {rec['length']}, {rec['cells']} cells)\n")
        else:
            out.write(f"{rec['rank']:>3}  {rec['target']:<24} {rec['score']:>7}  "
                      f"end=({rec['end_q']},{rec['end_d']})\n")
    if not args.no_timing:
        for k, rep in enumerate(report.repetitions):
            out.write(f"# run {k}: {rep['wall_seconds']:.3f} s, {rep['gcups']:.4f} GCUPS\n")
        out.write(f"# mean over {len(report.repetitions)} run(s): {report.mean_gcups:.4f} GCUPS\n")
    return 0


# ---------------------------------------------------------------- peak

def cmd_peak(args, out) -> int:
    devices = load_registry(args.registry)
    chosen = [find_device(devices, m) for m in args.device] if args.device else list(devices.values())
    header = ["vendor", "model", "kind", "segment", "cores", "lanes", "throughput", "clock_mhz", "peak_gcups"]
    rows = []
    for d in chosen:
        g = d.groups
        rows.append([d.vendor, d.model, d.kind, d.segment,
                     "+".join(str(x.cores) for x in g), "+".join(str(x.lanes) for x in g),
                     "+".join(f"{x.throughput:g}" for x in g), "+".join(f"{x.clock_mhz:g}" for x in g),
                     theoretical_peak(d)])
    if args.format == "jsonl":
        _emit_jsonl(({"kind": "peak", **dict(zip(header, r))} for r in rows), out)
    elif args.format == "csv":
        out.write(format_csv(header, rows))
    else:
        out.write(format_text(header, [r[:-1] + [round(r[-1], 1)] for r in rows]))
    if args.figure:
        from .plotting import peak_figure
        peak_figure([(r[1], r[2], r[-1]) for r in rows], args.figure)
    return 0


# ---------------------------------------------------------------- pp

def _load_log(spec: str):
    if spec.startswith("builtin:"):
        return load_bundled_log(spec.split(":", 1)[1])
    with open(spec) as fh:
        return read_log(fh)


def cmd_pp(args, out) -> int:
    records = _load_log(args.log)
    if args.app:
        records = select(records, application=args.app)
    impls = args.implementation or sorted({r.implementation for r in records})
    platforms = list(dict.fromkeys(r.platform for r in records))
    sets = [PlatformSet.parse(s) for s in args.set] or [PlatformSet("all", tuple(platforms))]

    pp_header = ["platform_set"] + impls
    pp_rows = [[h.name] + [pp_bar(select(records, implementation=i), h) for i in impls] for h in sets]
    eff_header, eff_rows = efficiency_rows([r for r in records if r.implementation in impls])

    if args.format == "jsonl":
        _emit_jsonl(({"kind": "efficiency", **dict(zip(eff_header, r))} for r in eff_rows), out)
        _emit_jsonl(({"kind": "pp", "platform_set": r[0], "platforms": list(h.platforms),
                      **dict(zip(impls, r[1:]))} for r, h in zip(pp_rows, sets)), out)
    elif args.format == "csv":
        out.write(format_csv(eff_header, eff_rows) + "\n" + format_csv(pp_header, pp_rows))
    else:
        out.write(format_text(eff_header, eff_rows) + "\n" + format_text(pp_header, pp_rows))
    if args.figure:
        from .plotting import efficiency_figure
        series = {}
        for impl in impls:
            eff = platform_efficiencies(select(records, implementation=impl))
            series[impl] = [eff.get(p) for p in platforms]
        pp_values = {f"{row[0]} ({impl})": v for row in pp_rows for impl, v in zip(impls, row[1:])}
        efficiency_figure(platforms, series, pp_values, args.figure)
    return 0


# ---------------------------------------------------------------- simulate

def _expand(spec: str) -> list[str]:
    """Comma list where ``NxV`` repeats ``V`` N times."""
    items = []
    for tok in (t.strip() for t in spec.split(",")):
        if not tok:
            continue
        count, sep, value = tok.partition("x")
        if sep and count.isdigit():
            items += [value] * int(count)
        else:
            items.append(tok)
    return items


def parse_workers(spec: str, registry=None) -> list[WorkerSpec]:
    """``[id=]peak`` or ``[id=]model``; models are looked up in the registry."""
    out = []
    for k, tok in enumerate(_expand(spec)):
        wid, sep, value = tok.partition("=")
        if not sep:
            wid, value = None, tok
        try:
            peak = float(value)
            name = f"w{k}"
        except ValueError:
            registry = registry if registry is not None else load_registry()
            dev = find_device(registry, value)
            peak, name = theoretical_peak(dev), f"{dev.model}#{k}"
        out.append(WorkerSpec(wid or name, peak))
    return out


def parse_queries(spec: str) -> list[int]:
    return [int(float(v)) for v in _expand(spec)]


def cmd_simulate(args, out) -> int:
    workers = parse_workers(args.workers, load_registry(args.registry) if args.registry else None)
    queries = parse_queries(args.queries)
    strategies = args.strategy or STATIC_STRATEGIES
    rows, per_strategy = [], {}
    for s in strategies:
        a = distribute(queries, [args.db_residues], workers, s)
        est = estimate_makespan(a, workers)
        cells = a.cells_per_worker()
        per_strategy[s] = est.seconds
        for w in workers:
            rows.append({"kind": "makespan", "strategy": s, "worker": w.id, "peak_gcups": w.peak_gcups,
                         "tasks": len(a.tasks[w.id]), "cells": cells[w.id], "seconds": est.seconds[w.id],
                         "makespan": est.makespan, "imbalance": est.imbalance})
    if args.format == "jsonl":
        _emit_jsonl(rows, out)
    else:
        for s in strategies:
            sub = [r for r in rows if r["strategy"] == s]
            out.write(f"{s}: makespan {sub[0]['makespan']:.6g} s, imbalance {sub[0]['imbalance']:.3f}\n")
            for r in sub:
                out.write(f"  {r['worker']:<20} {r['peak_gcups']:>8.1f} GCUPS  {r['tasks']:>4} tasks  "
                          f"{r['cells']:>16} cells  {r['seconds']:.6g} s\n")
    if args.figure:
        from .plotting import makespan_figure
        makespan_figure(per_strategy, args.figure)
    return 0


# ---------------------------------------------------------------- bench

BENCH_IMPLEMENTATION = "numba-host"


def bench_rows(records) -> tuple[list[str], list[list]]:
    """Platform, application, peak, achieved and architectural efficiency."""
    header = ["platform", "app", "peak_gcups", "achieved_gcups", "arch_eff"]
    return header, [[r.platform, r.application, r.peak_gcups, r.achieved_gcups,
                     r.achieved_gcups / r.peak_gcups] for r in records]


def cmd_bench(args, out) -> int:
    from . import synthetic
    from .scoring import dna_scheme, protein_scheme

    device = local_device(cores=args.cores, clock_mhz=args.clock_mhz)
    peak = theoretical_peak(device)
    platform = "local"
    outdir = Path(args.out)
    outdir.mkdir(parents=True, exist_ok=True)

    # protein search: Env.NR-like lengths, queries spread over the benchmark range
    queries = synthetic.random_sequences(synthetic.query_lengths(args.queries, 144, args.max_query),
                                         prefix="q", seed=args.seed)
    db = synthetic.random_sequences(synthetic.database_lengths(args.db_size, seed=args.seed + 1),
                                    prefix="t", seed=args.seed + 2)
    prot = protein_scheme()
    gcups = []
    for _ in range(args.repeats):
        res = run_search(queries, db, prot, args.workers, strategy=Strategy.QUERY_SPLIT)
        gcups.append(res.gcups)
    records = [EfficiencyRecord(platform, "protein", sum(gcups) / len(gcups), peak,
                                implementation=BENCH_IMPLEMENTATION)]

    # pairwise DNA through the long kernel
    a, b = synthetic.random_sequences([args.dna_length, args.dna_length], synthetic.NUCLEOTIDES,
                                      prefix="dna", seed=args.seed + 3)
    dna = dna_scheme()
    gcups = []
    for _ in range(args.repeats):
        t0 = time.perf_counter()
        wavefront_score(a, b, dna, WavefrontConfig(), args.workers)
        gcups.append(len(a) * len(b) / ((time.perf_counter() - t0) * 1e9))
    records.append(EfficiencyRecord(platform, "pairwise", sum(gcups) / len(gcups), peak,
                                    implementation=BENCH_IMPLEMENTATION))

    with open(outdir / "bench_log.csv", "w") as fh:
        fh.write(f"# {device.model}: {device.groups[0].cores} cores x {device.groups[0].lanes} lanes "
                 f"@ {device.groups[0].clock_mhz:g} MHz, {args.repeats} repetition(s)\n")
        write_log(records, fh)
    header, rows = bench_rows(records)
    text = format_text(header, rows)
    (outdir / "bench_report.txt").write_text(text)
    (outdir / "bench_report.csv").write_text(format_csv(header, rows))
    from .plotting import bench_figure
    bench_figure([(r.application, r.achieved_gcups, r.peak_gcups) for r in records], outdir / "bench.png")
    out.write(text)
    return 0


# ---------------------------------------------------------------- dispatch

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="swport", description="Smith-Waterman kernels, peak model and portability metrics.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    a = sub.add_parser("align", help="align every query record against every target record")
    a.add_argument("query")
    a.add_argument("target")
    _scoring_args(a)
    a.add_argument("--traceback", action="store_true", help="emit the edit operations")
    a.add_argument("--kernel", choices=("scalar", "wavefront"), default="scalar")
    a.add_argument("--tile-rows", type=int, default=64)
    a.add_argument("--workers", type=int, default=1)
    a.add_argument("--cell-budget", type=int, default=1 << 28)
    _format_arg(a)
    a.set_defaults(func=cmd_align)

    s = sub.add_parser("search", help="database search with the short/long kernel split")
    s.add_argument("queries")
    s.add_argument("db")
    _scoring_args(s)
    s.add_argument("--threshold", type=int, default=2000, help="longest target for the batched kernel")
    s.add_argument("--workers", type=int, default=1)
    s.add_argument("--strategy", default=Strategy.QUERY_SPLIT.value,
                   choices=STATIC_STRATEGIES + [Strategy.WORK_STEALING.value, "adaptive"])
    s.add_argument("--top", type=int, default=10)
    s.add_argument("--repeats", type=int, default=1)
    s.add_argument("--lane-width", type=int, default=32)
    s.add_argument("--tile-rows", type=int, default=64)
    s.add_argument("--no-timing", action="store_true", help="omit timing records (for golden output)")
    s.add_argument("--report", metavar="FILE", help="also write the JSONL run report here")
    _format_arg(s)
    s.set_defaults(func=cmd_search)

    k = sub.add_parser("peak", help="theoretical peak GCUPS per device")
    k.add_argument("--registry", metavar="FILE")
    k.add_argument("--device", action="append", metavar="MODEL")
    k.add_argument("--figure", metavar="PNG")
    _format_arg(k, ("text", "csv", "jsonl"))
    k.set_defaults(func=cmd_peak)

    q = sub.add_parser("pp", help="efficiencies and performance portability from a measurement log")
    q.add_argument("--log", required=True, metavar="FILE|builtin:NAME")
    q.add_argument("--set", action="append", default=[], metavar="NAME:P1,P2,...")
    q.add_argument("--app")
    q.add_argument("--implementation", action="append")
    q.add_argument("--figure", metavar="PNG")
    _format_arg(q, ("text", "csv", "jsonl"))
    q.set_defaults(func=cmd_pp)

    m = sub.add_parser("simulate", help="estimated makespans of the distribution strategies")
    m.add_argument("--workers", required=True, metavar="SPEC", help="e.g. 'gpu=741.3,Xeon Gold 6138' or '2x100'")
    m.add_argument("--queries", required=True, metavar="SPEC", help="cell counts, e.g. '100,3x1' or '10x1e9'")
    m.add_argument("--db-residues", type=int, default=1, help="multiply query values by this (default: values are cells)")
    m.add_argument("--strategy", action="append", choices=STATIC_STRATEGIES)
    m.add_argument("--registry", metavar="FILE")
    m.add_argument("--figure", metavar="PNG")
    _format_arg(m)
    m.set_defaults(func=cmd_simulate)

    b = sub.add_parser("bench", help="measure local GCUPS and report efficiency against the local peak")
    b.add_argument("--out", default="bench_out", metavar="DIR")
    b.add_argument("--repeats", type=int, default=3)
    b.add_argument("--queries", type=int, default=4)
    b.add_argument("--max-query", type=int, default=1000)
    b.add_argument("--db-size", type=int, default=2000)
    b.add_argument("--dna-length", type=int, default=3000)
    b.add_argument("--workers", type=int, default=1)
    b.add_argument("--cores", type=int)
    b.add_argument("--clock-mhz", type=float)
    b.add_argument("--seed", type=int, default=0)
    b.set_defaults(func=cmd_bench)
    return p


def main(argv=None, out=None) -> int:
    out = out or sys.stdout
    args = build_parser().parse_args(argv)
    try:
        return args.func(args, out)
    except SwportError as exc:
        msg = exc.args[0] if exc.args else type(exc).__name__
        print(f"swport {args.command}: {type(exc).__name__}: {msg}", file=sys.stderr)
        return exc.exit_code
    except (OSError, ValueError) as exc:
        print(f"swport {args.command}: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1 if isinstance(exc, OSError) else 2


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
