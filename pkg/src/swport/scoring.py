"""Substitution matrices, gap penalties and residue encoding."""

from __future__ import annotations

import io
import warnings
from dataclasses import dataclass, field
from functools import lru_cache
from importlib import resources

import numpy as np

from .errors import AlphabetMismatch, RaggedMatrix, UnknownSymbolDuplicate

# Scores are 32-bit throughout.  NEG_INF is the "-inf" used for E/F on the
# matrix border; it survives two gap subtractions without wrapping.
SCORE_DTYPE = np.int32
NEG_INF = -(1 << 30)
# Substitution score of the reserved padding symbol against anything.  Large
# enough that a padded diagonal step can never be positive, small enough that
# H + PAD_SCORE cannot wrap.
PAD_SCORE = -(1 << 24)

NUCLEOTIDES = frozenset("ACGTU")


@dataclass(frozen=True)
class SubstitutionMatrix:
    """Square integer score table over an ordered alphabet.

    ``wildcard`` names the symbol that unknown letters are mapped to.  When a
    matrix file has no wildcard row one is synthesised that scores 0 against
    everything (``N`` for nucleotide alphabets, ``X`` otherwise).
    """

    alphabet: str
    scores: np.ndarray
    wildcard: str | None = None
    _lookup: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        scores = np.asarray(self.scores, dtype=SCORE_DTYPE)
        k = len(self.alphabet)
        if scores.shape != (k, k):
            raise RaggedMatrix(f"matrix shape {scores.shape} does not match alphabet of {k} symbols")
        if len(set(self.alphabet)) != k:
            raise UnknownSymbolDuplicate(f"duplicate symbol in alphabet {self.alphabet!r}")
        scores.setflags(write=False)
        object.__setattr__(self, "scores", scores)
        if self.wildcard is not None and self.wildcard not in self.alphabet:
            raise AlphabetMismatch(f"wildcard {self.wildcard!r} not in alphabet")

        lookup = np.full(256, -1, dtype=np.int32)
        for code, sym in enumerate(self.alphabet):
            lookup[ord(sym)] = code
            lookup[ord(sym.lower())] = code
        if self.wildcard is not None:
            wc = self.alphabet.index(self.wildcard)
            for c in range(ord("A"), ord("Z") + 1):
                if lookup[c] < 0:
                    lookup[c] = wc
                    lookup[c + 32] = wc
        lookup.setflags(write=False)
        object.__setattr__(self, "_lookup", lookup)

    def __len__(self):
        return len(self.alphabet)

    def __eq__(self, other):
        if not isinstance(other, SubstitutionMatrix):
            return NotImplemented
        return (self.alphabet == other.alphabet and self.wildcard == other.wildcard
                and np.array_equal(self.scores, other.scores))

    def __hash__(self):
        return hash((self.alphabet, self.wildcard, self.scores.tobytes()))

    def score(self, a: str, b: str) -> int:
        codes = self.encode(a + b)
        return int(self.scores[codes[0], codes[1]])

    def is_symmetric(self) -> bool:
        return bool(np.array_equal(self.scores, self.scores.T))

    def encode(self, residues: str) -> np.ndarray:
        """Map residues to row indices; raises AlphabetMismatch on unknown symbols."""
        raw = np.frombuffer(residues.encode("latin-1", errors="replace"), dtype=np.uint8)
        codes = self._lookup[raw]
        if codes.size and codes.min() < 0:
            bad = residues[int(np.argmin(codes))]
            raise AlphabetMismatch(f"residue {bad!r} is not covered by the substitution matrix")
        return codes.astype(np.int32)

    def padded(self) -> np.ndarray:
        """Kernel table with one extra row/column for the padding symbol (code ``len(self)``)."""
        return _padded(self)


@lru_cache(maxsize=32)
def _padded(sm: SubstitutionMatrix) -> np.ndarray:
    k = len(sm)
    out = np.full((k + 1, k + 1), PAD_SCORE, dtype=SCORE_DTYPE)
    out[:k, :k] = sm.scores
    out.setflags(write=False)
    return out


@dataclass(frozen=True)
class ScoringScheme:
    """Substitution matrix plus affine gap penalties.

    A gap of length k costs ``gap_open + (k - 1) * gap_extend``: the first gap
    cell is charged ``gap_open`` from H, every further cell ``gap_extend``.
    Penalties are given as non-negative magnitudes.
    """

    matrix: SubstitutionMatrix
    gap_open: int
    gap_extend: int

    def __post_init__(self):
        if self.gap_open < 0 or self.gap_extend < 0:
            raise ValueError("gap penalties are non-negative magnitudes")
        if self.gap_extend > self.gap_open:
            warnings.warn(
                f"gap_extend ({self.gap_extend}) exceeds gap_open ({self.gap_open})",
                stacklevel=3,
            )

    def encode(self, residues: str) -> np.ndarray:
        return self.matrix.encode(residues)


def dna_matrix(match: int = 1, mismatch: int = -3) -> SubstitutionMatrix:
    alphabet = "ACGTN"
    scores = np.full((5, 5), mismatch, dtype=SCORE_DTYPE)
    np.fill_diagonal(scores, match)
    scores[4, :] = 0
    scores[:, 4] = 0
    return SubstitutionMatrix(alphabet, scores, wildcard="N")


def dna_scheme(match: int = 1, mismatch: int = -3, gap_open: int = 5, gap_extend: int = 2) -> ScoringScheme:
    """Pairwise DNA defaults: +1 / -3, gap open 5, gap extend 2."""
    return ScoringScheme(dna_matrix(match, mismatch), gap_open, gap_extend)


@lru_cache(maxsize=1)
def blosum62() -> SubstitutionMatrix:
    text = resources.files("swport").joinpath("data/BLOSUM62").read_text()
    return parse_score_matrix(io.StringIO(text))


def protein_scheme(gap_open: int = 10, gap_extend: int = 2) -> ScoringScheme:
    """Database-search defaults: BLOSUM62 with 10/2 gaps."""
    return ScoringScheme(blosum62(), gap_open, gap_extend)


def parse_score_matrix(stream) -> SubstitutionMatrix:
    """Read an NCBI-style whitespace-delimited matrix.

    Lines starting with ``#`` are comments.  The first data line lists column
    symbols; every following line is a row symbol and one integer per column.
    Rows may appear in any order but must cover exactly the column symbols.
    """
    header = None
    rows: dict[str, list[int]] = {}
    for lineno, line in enumerate(stream, 1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        tokens = line.split()
        if header is None:
            header = tokens
            if any(len(t) != 1 for t in header):
                raise RaggedMatrix(f"line {lineno}: column labels must be single symbols")
            if len(set(header)) != len(header):
                raise UnknownSymbolDuplicate(f"line {lineno}: duplicate column symbol")
            continue
        sym, values = tokens[0], tokens[1:]
        if len(values) != len(header):
            raise RaggedMatrix(f"line {lineno}: row {sym!r} has {len(values)} scores, expected {len(header)}")
        if sym in rows:
            raise UnknownSymbolDuplicate(f"line {lineno}: duplicate row symbol {sym!r}")
        if sym not in header:
            raise UnknownSymbolDuplicate(f"line {lineno}: row symbol {sym!r} not among the columns")
        try:
            rows[sym] = [int(v) for v in values]
        except ValueError as exc:
            raise RaggedMatrix(f"line {lineno}: non-integer score") from exc
    if header is None:
        raise RaggedMatrix("no matrix data found")
    if set(rows) != set(header):
        missing = "".join(s for s in header if s not in rows)
        raise RaggedMatrix(f"missing rows for symbols {missing!r}")

    alphabet = "".join(s.upper() for s in header)
    if len(set(alphabet)) != len(alphabet):
        raise UnknownSymbolDuplicate("symbols collide when upper-cased")
    scores = np.array([rows[s] for s in header], dtype=SCORE_DTYPE)

    if "X" in alphabet:
        wildcard = "X"
    elif "N" in alphabet and set(alphabet) <= NUCLEOTIDES | {"N"}:
        wildcard = "N"
    else:
        wildcard = "N" if set(alphabet) <= NUCLEOTIDES else "X"
        k = len(alphabet)
        grown = np.zeros((k + 1, k + 1), dtype=SCORE_DTYPE)
        grown[:k, :k] = scores
        alphabet += wildcard
        scores = grown
    return SubstitutionMatrix(alphabet, scores, wildcard=wildcard)


def emit_score_matrix(sm: SubstitutionMatrix) -> str:
    width = max(3, max(len(str(int(v))) for v in sm.scores.flat) + 1)
    lines = [" " + "".join(s.rjust(width) for s in sm.alphabet)]
    for sym, row in zip(sm.alphabet, sm.scores):
        lines.append(sym + "".join(str(int(v)).rjust(width) for v in row))
    return "\n".join(lines) + "\n"
