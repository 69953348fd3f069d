from pathlib import Path

import pytest
from hypothesis import HealthCheck, settings
from hypothesis import strategies as st

from swport import dna_scheme, protein_scheme

from .oracles import dict_sub, dna_sub, load_ncbi_matrix

settings.register_profile("default", deadline=None, max_examples=60,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

DATA = Path(__file__).parent / "data"
AMINO = "ARNDCQEGHILKMFPSTWYV"
DNA = "ACGT"


def seqs(alphabet, min_size=1, max_size=64):
    return st.text(alphabet=alphabet, min_size=min_size, max_size=max_size)


@pytest.fixture(scope="session")
def blosum_table():
    return load_ncbi_matrix(DATA / "BLOSUM62")


@pytest.fixture(scope="session")
def protein(blosum_table):
    return protein_scheme(), dict_sub(blosum_table)


@pytest.fixture(scope="session")
def dna():
    return dna_scheme(), dna_sub()


def pytest_terminal_summary(terminalreporter):
    import sys
    mod = sys.modules.get("tests.test_acceptance")
    if mod is None or not mod.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(mod.RESULTS):
        terminalreporter.write_line(mod.RESULTS[n])
