"""File formats: FASTA, scoring matrices, device registry, measurement logs and run reports.

Run reports are JSON Lines.  Every record carries ``"schema"`` and ``"kind"``;
the schema number bumps whenever a field changes meaning or disappears.
Kinds written by the CLI:

``config``   one per run: subcommand and the effective parameters
``alignment``  one per query/target pair of ``align``
``hit``      one per reported target of ``search`` (query, rank, target, score, end)
``timing``   per repetition: wall seconds, per-worker seconds, cells, GCUPS
``summary``  mean GCUPS over all repetitions
``peak`` / ``pp`` / ``makespan``  rows of the corresponding tables
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

from .errors import EmptyRecord, MalformedHeader
from .perfmodel import dump_registry, load_registry  # noqa: F401  re-exported
from .portability import read_log, write_log  # noqa: F401  re-exported
from .scoring import emit_score_matrix, parse_score_matrix  # noqa: F401  re-exported

REPORT_SCHEMA = 1
FASTA_WIDTH = 60


@dataclass(frozen=True)
class FastaRecord:
    header: str
    residues: str

    @property
    def id(self) -> str:
        return self.header.split()[0]


def parse_fasta(stream) -> list[FastaRecord]:
    """Records in file order; residues uppercased with whitespace and '*' removed."""
    records: list[FastaRecord] = []
    header: str | None = None
    chunks: list[str] = []

    def close(lineno):
        residues = "".join(chunks)
        if not residues:
            raise EmptyRecord(f"record {header!r} ending before line {lineno} has no residues")
        records.append(FastaRecord(header, residues))

    lineno = 0
    for lineno, line in enumerate(stream, 1):
        line = line.strip()
        if not line or line.startswith(";"):
            continue
        if line.startswith(">"):
            if header is not None:
                close(lineno)
            header = line[1:].strip()
            if not header:
                raise MalformedHeader(f"line {lineno}: empty FASTA header")
            chunks = []
        elif header is None:
            raise MalformedHeader(f"line {lineno}: sequence data before the first '>' header")
        else:
            chunks.append("".join(line.split()).replace("*", "").upper())
    if header is not None:
        close(lineno + 1)
    return records


def read_fasta(path) -> list[FastaRecord]:
    with open(path) as fh:
        return parse_fasta(fh)


def emit_fasta(records, stream, width: int = FASTA_WIDTH) -> None:
    for r in records:
        stream.write(f">{r.header}\n")
        for k in range(0, len(r.residues), width):
            stream.write(r.residues[k:k + width] + "\n")


@dataclass
class RunReport:
    """Results of one CLI run plus its timing side-band."""

    command: str
    config: dict
    results: list[dict] = field(default_factory=list)
    repetitions: list[dict] = field(default_factory=list)

    @property
    def mean_gcups(self) -> float | None:
        values = [r["gcups"] for r in self.repetitions]
        return sum(values) / len(values) if values else None

    def records(self, timing: bool = True):
        yield {"kind": "config", "command": self.command, **self.config}
        yield from self.results
        if timing and self.repetitions:
            for k, rep in enumerate(self.repetitions):
                yield {"kind": "timing", "repetition": k, **rep}
            yield {"kind": "summary", "repetitions": len(self.repetitions), "mean_gcups": self.mean_gcups}

    def write_jsonl(self, stream, timing: bool = True) -> None:
        for rec in self.records(timing):
            stream.write(json.dumps({"schema": REPORT_SCHEMA, **rec}, sort_keys=True) + "\n")


def read_jsonl(stream) -> list[dict]:
    out = []
    for line in stream:
        line = line.strip()
        if line:
            rec = json.loads(line)
            if rec.get("schema") != REPORT_SCHEMA:
                raise ValueError(f"unsupported report schema {rec.get('schema')!r}")
            out.append(rec)
    return out
