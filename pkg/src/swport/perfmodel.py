"""Theoretical peak GCUPS from device capability.

capability = clock x instruction throughput x SIMD lanes x cores, and the
peak is capability divided by the instructions issued per cell update.  Hybrid
CPUs list one :class:`CoreGroup` per core type and their peaks add up.
"""

from __future__ import annotations

import json
import os
from collections import Counter
from dataclasses import asdict, dataclass, field
from importlib import resources
from pathlib import Path

from .core import CELL_UPDATE_OPS
from .errors import NonPositiveTime, UnknownDevice

INSTRUCTIONS_PER_CELL = len(CELL_UPDATE_OPS)


@dataclass(frozen=True)
class CoreGroup:
    cores: int
    lanes: int
    throughput: float
    clock_mhz: float

    def __post_init__(self):
        for name in ("cores", "lanes", "throughput", "clock_mhz"):
            if not getattr(self, name) > 0:
                raise ValueError(f"CoreGroup.{name} must be positive")


@dataclass(frozen=True)
class DeviceSpec:
    vendor: str
    model: str
    kind: str
    segment: str
    groups: tuple[CoreGroup, ...]
    architecture: str = ""
    note: str = ""

    def __post_init__(self):
        if not self.groups:
            raise ValueError(f"{self.model}: a device needs at least one core group")
        if self.kind not in ("dGPU", "iGPU", "CPU"):
            raise ValueError(f"{self.model}: unknown kind {self.kind!r}")
        object.__setattr__(self, "groups", tuple(self.groups))

    @property
    def cores(self) -> int:
        return sum(g.cores for g in self.groups)

    def to_record(self) -> dict:
        rec = asdict(self)
        rec["groups"] = [asdict(g) for g in self.groups]
        return rec

    @classmethod
    def from_record(cls, rec: dict) -> DeviceSpec:
        rec = dict(rec)
        rec["groups"] = tuple(CoreGroup(**g) for g in rec["groups"])
        return cls(**rec)


@dataclass(frozen=True)
class InstructionMix:
    """Instruction counts with their per-cycle throughputs."""

    parts: tuple[tuple[int, float], ...]
    total: int = field(default=0)

    def __post_init__(self):
        if not self.parts:
            raise ValueError("empty instruction mix")
        if any(c <= 0 or t <= 0 for c, t in self.parts):
            raise ValueError("counts and throughputs must be positive")
        s = sum(c for c, _ in self.parts)
        if self.total == 0:
            object.__setattr__(self, "total", s)
        elif self.total != s:
            raise ValueError(f"mix counts sum to {s}, not {self.total}")

    @classmethod
    def from_cell_update(cls, throughput_by_kind: dict[str, float]) -> InstructionMix:
        """Mix of the cell-update ops whose kind has a throughput given."""
        counts = Counter(kind for _, kind in CELL_UPDATE_OPS)
        return cls(tuple((counts[k], float(t)) for k, t in throughput_by_kind.items()))


def capability(g: CoreGroup) -> float:
    """Instructions per second for one core group."""
    return g.clock_mhz * 1e6 * g.throughput * g.lanes * g.cores


def theoretical_peak(d: DeviceSpec, instr_per_cell: int = INSTRUCTIONS_PER_CELL) -> float:
    """Peak GCUPS; hybrid devices sum the per-group peaks."""
    if instr_per_cell < 1:
        raise ValueError("instr_per_cell must be >= 1")
    return sum(capability(g) / instr_per_cell for g in d.groups) / 1e9


def equivalent_throughput(mix: InstructionMix) -> float:
    """Count-weighted mean throughput of a mix.

    For 5 add/subtract at 4 per cycle and 6 max at 2 per cycle this is
    32/11 = 2.909; the registry keeps the rounded value 3 for those devices.
    """
    return sum(c * t for c, t in mix.parts) / mix.total


def measured_gcups(q_residues: int, d_residues: int, seconds: float) -> float:
    if not seconds > 0:
        raise NonPositiveTime(f"elapsed time must be positive, got {seconds}")
    return q_residues * d_residues / (seconds * 1e9)


def load_registry(path: str | os.PathLike | None = None) -> dict[str, DeviceSpec]:
    """Devices keyed by model name, in file order."""
    if path is None:
        text = resources.files("swport").joinpath("data/registry.jsonl").read_text()
    else:
        text = Path(path).read_text()
    devices = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        try:
            dev = DeviceSpec.from_record(json.loads(line))
        except (json.JSONDecodeError, TypeError, KeyError) as exc:
            raise ValueError(f"registry line {lineno}: {exc}") from exc
        devices[dev.model] = dev
    return devices


def dump_registry(devices, path: str | os.PathLike) -> None:
    with open(path, "w") as fh:
        for dev in devices:
            fh.write(json.dumps(dev.to_record()) + "\n")


def find_device(devices: dict[str, DeviceSpec], model: str) -> DeviceSpec:
    if model in devices:
        return devices[model]
    folded = {k.lower().replace(" ", ""): v for k, v in devices.items()}
    key = model.lower().replace(" ", "")
    if key in folded:
        return folded[key]
    # "i9-13900K" for "Core i9-13900K", as long as only one model ends that way
    tails = [v for k, v in folded.items() if key and k.endswith(key)]
    if len(tails) == 1:
        return tails[0]
    raise UnknownDevice(f"no device {model!r} in registry")


def _cpuinfo() -> tuple[str, set[str], float | None]:
    name, flags, mhz = "local CPU", set(), None
    try:
        with open("/proc/cpuinfo") as fh:
            for line in fh:
                key, _, value = line.partition(":")
                key = key.strip()
                if key == "model name" and name == "local CPU":
                    name = value.strip()
                elif key == "flags" and not flags:
                    flags = set(value.split())
                elif key == "cpu MHz" and mhz is None:
                    mhz = float(value)
    except OSError:
        pass
    return name, flags, mhz


def local_device(cores: int | None = None, lanes: int | None = None,
                 clock_mhz: float | None = None, throughput: float = 1.0) -> DeviceSpec:
    """Best-effort spec of the host CPU; any field can be overridden.

    Lanes are 32-bit SIMD lanes: 16 with AVX-512, 8 with AVX2, 4 with SSE.
    """
    name, flags, mhz = _cpuinfo()
    if lanes is None:
        lanes = 16 if "avx512f" in flags else 8 if "avx2" in flags else 4
    if cores is None:
        cores = len(os.sched_getaffinity(0)) if hasattr(os, "sched_getaffinity") else os.cpu_count() or 1
    if clock_mhz is None:
        clock_mhz = mhz or 2000.0
    return DeviceSpec("local", name, "CPU", "n/a",
                      (CoreGroup(cores, lanes, throughput, clock_mhz),),
                      note="detected from /proc/cpuinfo")
