"""Random sequences for tests and benchmarks."""

from __future__ import annotations

import numpy as np

from .core import Sequence

AMINO_ACIDS = "ARNDCQEGHILKMFPSTWYV"
NUCLEOTIDES = "ACGT"

# Env.NR-like database: mean about 208 residues, longest 16925
ENV_NR_MEAN = 208
ENV_NR_MAX = 16925
QUERY_MIN, QUERY_MAX = 144, 5478


def _rng(seed) -> np.random.Generator:
    return seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)


def random_residues(length: int, alphabet: str = AMINO_ACIDS, seed=None) -> str:
    rng = _rng(seed)
    letters = np.frombuffer(alphabet.encode(), dtype=np.uint8)
    return rng.choice(letters, size=length).tobytes().decode()


def random_sequences(lengths, alphabet: str = AMINO_ACIDS, prefix: str = "s", seed=None) -> list[Sequence]:
    rng = _rng(seed)
    return [Sequence(f"{prefix}{k}", random_residues(int(n), alphabet, rng)) for k, n in enumerate(lengths)]


def query_lengths(n: int = 20, lo: int = QUERY_MIN, hi: int = QUERY_MAX) -> list[int]:
    """Geometrically spaced lengths spanning the benchmark query range."""
    return [int(round(x)) for x in np.geomspace(lo, hi, n)]


def database_lengths(n: int, mean: float = ENV_NR_MEAN, max_len: int = ENV_NR_MAX,
                     sigma: float = 0.8, seed=None) -> list[int]:
    """Log-normal lengths with the given mean, clipped to ``[1, max_len]``."""
    rng = _rng(seed)
    mu = np.log(mean) - sigma ** 2 / 2
    return np.clip(np.rint(rng.lognormal(mu, sigma, n)), 1, max_len).astype(int).tolist()


def mutate(residues: str, rate: float, alphabet: str = AMINO_ACIDS, seed=None) -> str:
    """Point substitutions at ``rate``; handy for planting true hits."""
    rng = _rng(seed)
    out = np.frombuffer(residues.encode(), dtype=np.uint8).copy()
    hit = rng.random(out.size) < rate
    out[hit] = rng.choice(np.frombuffer(alphabet.encode(), dtype=np.uint8), size=int(hit.sum()))
    return out.tobytes().decode()
