"""Architectural / application efficiency and the performance-portability mean.

For a platform set H the portability is the arithmetic mean of the per-platform
efficiencies, and is not applicable (``None`` here, printed ``NA``) as soon as
one platform in H is unsupported.  Efficiencies stay exact ratios; rounding
happens only when tables are rendered.
"""

from __future__ import annotations

import csv
import io
import warnings
from collections import defaultdict
from dataclasses import dataclass

from .errors import MissingRecord, NoRecords, ZeroPeak

LOG_FIELDS = ("platform", "app", "implementation", "achieved_gcups", "peak_gcups", "supported")


@dataclass(frozen=True)
class EfficiencyRecord:
    platform: str
    application: str
    achieved_gcups: float
    peak_gcups: float
    supported: bool = True
    implementation: str = ""

    def __post_init__(self):
        if self.achieved_gcups < 0:
            raise ValueError("achieved GCUPS cannot be negative")


@dataclass(frozen=True)
class PlatformSet:
    name: str
    platforms: tuple[str, ...]

    def __post_init__(self):
        object.__setattr__(self, "platforms", tuple(self.platforms))
        if not self.platforms:
            raise ValueError(f"platform set {self.name!r} is empty")
        if len(set(self.platforms)) != len(self.platforms):
            raise ValueError(f"platform set {self.name!r} has duplicates")

    @classmethod
    def parse(cls, spec: str) -> PlatformSet:
        """``"name:platform1,platform2"``."""
        name, sep, rest = spec.partition(":")
        if not sep:
            raise ValueError(f"platform set {spec!r} is not of the form name:p1,p2")
        return cls(name.strip(), tuple(p.strip() for p in rest.split(",") if p.strip()))

    def __or__(self, other: PlatformSet) -> PlatformSet:
        merged = self.platforms + tuple(p for p in other.platforms if p not in self.platforms)
        return PlatformSet(f"{self.name} ∪ {other.name}", merged)


def arch_efficiency(r: EfficiencyRecord) -> float:
    """Fraction of the theoretical peak reached."""
    if not r.peak_gcups > 0:
        raise ZeroPeak(f"{r.platform}: peak must be positive")
    e = r.achieved_gcups / r.peak_gcups
    if e > 1.05:
        warnings.warn(f"{r.platform}: achieved {r.achieved_gcups} exceeds peak {r.peak_gcups}", stacklevel=2)
    return e


def app_efficiency(records, achieved: float) -> float:
    """``achieved`` as a fraction of the best implementation on the platform."""
    records = list(records)
    if not records:
        raise NoRecords("no records for this platform")
    best = max(r.achieved_gcups for r in records)
    if best == 0:
        return 0.0
    return achieved / best


def platform_efficiencies(records, efficiency=arch_efficiency) -> dict[str, float | None]:
    """Per-platform efficiency; repeated runs are averaged, unsupported maps to None."""
    runs = defaultdict(list)
    for r in records:
        runs[r.platform].append(r)
    out = {}
    for platform, rs in runs.items():
        if not all(r.supported for r in rs):
            out[platform] = None
        else:
            out[platform] = sum(efficiency(r) for r in rs) / len(rs)
    return out


def pp_bar(records, h: PlatformSet, efficiency=arch_efficiency) -> float | None:
    """Mean efficiency over ``h``; None (NA) if any member is unsupported."""
    eff = platform_efficiencies(records, efficiency)
    missing = [p for p in h.platforms if p not in eff]
    if missing:
        raise MissingRecord(f"set {h.name!r}: no record for {', '.join(missing)}")
    values = [eff[p] for p in h.platforms]
    if any(v is None for v in values):
        return None
    return sum(values) / len(values)


def select(records, application: str | None = None, implementation: str | None = None):
    return [r for r in records
            if (application is None or r.application == application)
            and (implementation is None or r.implementation == implementation)]


# ---------------------------------------------------------------- log format

def read_log(stream) -> list[EfficiencyRecord]:
    """Comma-delimited rows with header ``platform,app,implementation,achieved_gcups,peak_gcups,supported``."""
    reader = csv.DictReader(line for line in stream if line.strip() and not line.startswith("#"))
    missing = set(LOG_FIELDS) - set(reader.fieldnames or ())
    if missing:
        raise ValueError(f"measurement log lacks columns: {', '.join(sorted(missing))}")
    out = []
    for row in reader:
        supported = row["supported"].strip().lower() in ("1", "true", "yes", "y")
        achieved = row["achieved_gcups"].strip()
        out.append(EfficiencyRecord(
            platform=row["platform"].strip(),
            application=row["app"].strip(),
            implementation=row["implementation"].strip(),
            achieved_gcups=float(achieved) if achieved not in ("", "x", "NA") else 0.0,
            peak_gcups=float(row["peak_gcups"]),
            supported=supported,
        ))
    return out


def write_log(records, stream) -> None:
    w = csv.writer(stream, lineterminator="\n")
    w.writerow(LOG_FIELDS)
    for r in records:
        w.writerow([r.platform, r.application, r.implementation,
                    repr(float(r.achieved_gcups)), repr(float(r.peak_gcups)),
                    "true" if r.supported else "false"])


def load_bundled_log(name: str) -> list[EfficiencyRecord]:
    """Bundled measurement logs (``protein_gpu``, ``pairwise_gpu``, ...)."""
    from importlib import resources
    text = resources.files("swport").joinpath(f"data/measurements/{name}.csv").read_text()
    return read_log(io.StringIO(text))


# ---------------------------------------------------------------- tables

def _pct(x: float | None) -> str:
    return "NA" if x is None else f"{100 * x:.1f}%"


def efficiency_rows(records) -> tuple[list[str], list[list]]:
    """Rows of platform, peak and per-implementation achieved / efficiency."""
    impls = sorted({r.implementation for r in records})
    platforms, peaks = [], {}
    cells = defaultdict(list)
    for r in records:
        if r.platform not in peaks:
            platforms.append(r.platform)
            peaks[r.platform] = r.peak_gcups
        cells[r.platform, r.implementation].append(r)
    header = ["platform", "peak_gcups"]
    for impl in impls:
        header += [f"{impl}_achieved_gcups", f"{impl}_arch_eff"]
    rows = []
    for p in platforms:
        row = [p, peaks[p]]
        for impl in impls:
            rs = cells.get((p, impl), [])
            if not rs or not all(r.supported for r in rs):
                row += [None, None]
            else:
                ach = sum(r.achieved_gcups for r in rs) / len(rs)
                row += [ach, ach / peaks[p]]
        rows.append(row)
    return header, rows


def pp_rows(records, sets, implementations=None) -> tuple[list[str], list[list]]:
    """One row per platform set, one P column per implementation."""
    impls = implementations or sorted({r.implementation for r in records})
    header = ["platform_set"] + impls
    rows = []
    for h in sets:
        row = [h.name]
        for impl in impls:
            row.append(pp_bar(select(records, implementation=impl) if impl else records, h))
        rows.append(row)
    return header, rows


def format_text(header, rows) -> str:
    def fmt(col, v):
        if v is None:
            return "NA"
        if isinstance(v, float):
            # GCUPS columns are rates, everything else numeric is a fraction
            if "gcups" in col:
                return f"{v:.1f}" if abs(v) >= 1 else f"{v:.3f}"
            return _pct(v)
        return str(v)

    table = [header] + [[fmt(c, v) for c, v in zip(header, row)] for row in rows]
    widths = [max(len(r[k]) for r in table) for k in range(len(header))]
    lines = ["  ".join(cell.ljust(w) if k == 0 else cell.rjust(w)
                       for k, (cell, w) in enumerate(zip(r, widths))) for r in table]
    lines.insert(1, "  ".join("-" * w for w in widths))
    return "\n".join(lines) + "\n"


def format_csv(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow(["NA" if v is None else (repr(v) if isinstance(v, float) else v) for v in row])
    return buf.getvalue()
