import json
from dataclasses import replace

import pytest
from hypothesis import given
from hypothesis import strategies as st

from swport.errors import NonPositiveTime, UnknownDevice
from swport.perfmodel import (INSTRUCTIONS_PER_CELL, CoreGroup, DeviceSpec, InstructionMix, capability,
                              dump_registry, equivalent_throughput, find_device, load_registry, local_device,
                              measured_gcups, theoretical_peak)

# published peak GCUPS, one decimal
PEAKS = {
    "GTX 980": 155.6, "GTX 1080": 277.3, "RTX 2070": 311.0, "Tesla V100": 588.8, "RTX 3070": 423.2,
    "RTX 3090": 741.2, "Arc A770": 819.2, "UHD 630": 19.2, "UHD 770": 35.2, "Xe-LPG 128EU": 192.0,
    "RX 6700 XT": 550.6, "RX Vega 6": 35.2,
    "Core i5-7400": 8.8, "Core i5-10400F": 16.0, "Xeon E5-1620 v3": 9.3, "Xeon E5-2695 v3": 35.5,
    "Xeon Gold 6138": 101.3, "Core i9-9900K": 25.1, "Core i9-13900K": 75.2, "Core Ultra 9-185H": 44.0,
    "Ryzen 3 5300U": 9.6,
}


@pytest.fixture(scope="module")
def registry():
    return load_registry()


def test_registry_covers_all_devices(registry):
    assert set(registry) == set(PEAKS)
    assert sum(d.kind != "CPU" for d in registry.values()) == 12
    assert sum(d.kind == "CPU" for d in registry.values()) == 9


@pytest.mark.parametrize("model,peak", sorted(PEAKS.items()))
def test_registry_golden(registry, model, peak):
    assert theoretical_peak(registry[model]) == pytest.approx(peak, abs=0.15)


def test_capability_examples():
    assert capability(CoreGroup(82, 32, 2, 1695)) == pytest.approx(8.8955e12, rel=1e-4)
    assert capability(CoreGroup(1, 1, 1, 1)) == 1e6
    assert capability(CoreGroup(40, 16, 1, 1900)) == pytest.approx(1.216e12)


def test_peak_examples(registry):
    assert theoretical_peak(registry["RTX 3090"]) == pytest.approx(741.3, abs=0.1)
    i5 = DeviceSpec("Intel", "i5", "CPU", "desktop", (CoreGroup(6, 8, 1, 4000),))
    assert theoretical_peak(i5) == pytest.approx(16.0)
    hybrid = DeviceSpec("Intel", "i9", "CPU", "desktop", (CoreGroup(8, 8, 1, 5500), CoreGroup(16, 8, 1, 4300)))
    assert theoretical_peak(hybrid) == pytest.approx(75.2, abs=0.05)


def test_twelve_instructions_per_cell():
    assert INSTRUCTIONS_PER_CELL == 12


def test_equivalent_throughput():
    assert equivalent_throughput(InstructionMix(((5, 4), (6, 2)))) == pytest.approx(32 / 11)
    assert equivalent_throughput(InstructionMix(((12, 2),))) == 2
    assert equivalent_throughput(InstructionMix(((1, 8),))) == 8
    mix = InstructionMix.from_cell_update({"addsub": 4, "max": 2})
    assert mix.total == 11 and equivalent_throughput(mix) == pytest.approx(32 / 11)


def test_exact_equivalent_throughput_changes_gtx980(registry):
    g = registry["GTX 980"].groups[0]
    exact = replace(registry["GTX 980"], groups=(replace(g, throughput=32 / 11),))
    # 1216 MHz x 16 SMs x 32 lanes x 32/11 / 12
    assert theoretical_peak(exact) == pytest.approx(150.9, abs=0.05)


def test_instruction_mix_validation():
    with pytest.raises(ValueError):
        InstructionMix(())
    with pytest.raises(ValueError):
        InstructionMix(((1, 2),), total=3)
    with pytest.raises(ValueError):
        InstructionMix(((0, 2),))


def test_measured_gcups():
    assert measured_gcups(10**5, 10**4, 1.0) == 1.0
    assert measured_gcups(1000, 995210546, 10.0) == pytest.approx(99.52, abs=0.005)
    assert measured_gcups(0, 10, 1.0) == 0.0
    with pytest.raises(NonPositiveTime):
        measured_gcups(1, 1, 0)


def test_invalid_specs():
    with pytest.raises(ValueError):
        CoreGroup(0, 1, 1, 1)
    with pytest.raises(ValueError):
        DeviceSpec("x", "y", "CPU", "n/a", ())
    with pytest.raises(ValueError):
        DeviceSpec("x", "y", "TPU", "n/a", (CoreGroup(1, 1, 1, 1),))
    with pytest.raises(ValueError):
        theoretical_peak(DeviceSpec("x", "y", "CPU", "n/a", (CoreGroup(1, 1, 1, 1),)), 0)


groups = st.builds(CoreGroup, st.integers(1, 128), st.sampled_from([1, 4, 8, 16, 32, 64]),
                   st.sampled_from([0.5, 1, 2, 3, 4]), st.floats(100, 6000))


@given(groups, st.integers(1, 24))
def test_linearity(g, ipc):
    d = DeviceSpec("v", "m", "CPU", "n/a", (g,))
    doubled = DeviceSpec("v", "m", "CPU", "n/a", (replace(g, cores=2 * g.cores),))
    assert theoretical_peak(doubled, ipc) == pytest.approx(2 * theoretical_peak(d, ipc))
    assert theoretical_peak(d, 2 * ipc) == pytest.approx(theoretical_peak(d, ipc) / 2)


@given(st.lists(groups, min_size=1, max_size=3), st.lists(groups, min_size=1, max_size=3))
def test_hybrid_additivity(a, b):
    mk = lambda gs: DeviceSpec("v", "m", "CPU", "n/a", tuple(gs))
    assert theoretical_peak(mk(a + b)) == pytest.approx(theoretical_peak(mk(a)) + theoretical_peak(mk(b)))


def test_registry_roundtrip(registry, tmp_path):
    path = tmp_path / "reg.jsonl"
    dump_registry(registry.values(), path)
    assert load_registry(path) == registry
    for line in path.read_text().splitlines():
        assert set(json.loads(line)) == {"vendor", "model", "kind", "segment", "groups", "architecture", "note"}


def test_registry_bad_line(tmp_path):
    path = tmp_path / "reg.jsonl"
    path.write_text('{"vendor": "x"}\n')
    with pytest.raises(ValueError):
        load_registry(path)


def test_find_device(registry):
    assert find_device(registry, "rtx3090").model == "RTX 3090"
    assert find_device(registry, "i9-13900K").model == "Core i9-13900K"
    with pytest.raises(UnknownDevice):
        find_device(registry, "Voodoo 2")


def test_local_device_overrides():
    d = local_device(cores=4, lanes=8, clock_mhz=3000)
    assert theoretical_peak(d) == pytest.approx(3000e6 * 8 * 4 / 12 / 1e9)
    assert local_device().cores >= 1
