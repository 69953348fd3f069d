"""Smith-Waterman alignment kernels, GCUPS peak model and performance-portability metrics."""

from .core import (
    AlignmentResult,
    CellState,
    Sequence,
    cell_update,
    replay_score,
    score_local,
    traceback_local,
)
from .kernels import SequenceBatch, WavefrontConfig, batch_score, wavefront_score
from .scoring import ScoringScheme, SubstitutionMatrix, blosum62, dna_scheme, protein_scheme

__version__ = "0.1.0"

__all__ = [
    "AlignmentResult",
    "CellState",
    "ScoringScheme",
    "Sequence",
    "SequenceBatch",
    "SubstitutionMatrix",
    "WavefrontConfig",
    "batch_score",
    "blosum62",
    "cell_update",
    "dna_scheme",
    "protein_scheme",
    "replay_score",
    "score_local",
    "traceback_local",
    "wavefront_score",
]
