"""Scalar Smith-Waterman with Gotoh affine gaps.

This is the reference every parallel kernel is checked against.  The DP is
filled row by row (query residues on rows, database residues on columns):

    E[i,j] = max(H[i,j-1] - gap_open, E[i,j-1] - gap_extend)
    F[i,j] = max(H[i-1,j] - gap_open, F[i-1,j] - gap_extend)
    H[i,j] = max(0, H[i-1,j-1] + SM(q[i], d[j]), E[i,j], F[i,j])

H is 0 on the border; E and F start at ``NEG_INF`` there.  Border E/F values
never reach H (they stay negative), so H matches a zero-initialised border.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from numba import njit

from .errors import EmptySequence, MatrixTooLarge
from .scoring import NEG_INF, ScoringScheme

# The cell update as issued by the GPU code: 5 add/subtract, 6 max and one
# register move.  perfmodel derives its instruction count from this table.
CELL_UPDATE_OPS = (
    ("e_ext = e_left - gap_extend", "addsub"),
    ("e_open = h_left - gap_open", "addsub"),
    ("e = max(e_ext, e_open)", "max"),
    ("f_ext = f_up - gap_extend", "addsub"),
    ("f_open = h_up - gap_open", "addsub"),
    ("f = max(f_ext, f_open)", "max"),
    ("h = h_diag + sub", "addsub"),
    ("h = max(h, e)", "max"),
    ("h = max(h, f)", "max"),
    ("h = max(h, 0)", "max"),
    ("aux = h", "move"),
    ("best = max(h, best)", "max"),
)

PAIR = "M"          # query residue aligned to database residue
GAP_IN_DB = "D"     # query residue against a gap (vertical move)
GAP_IN_QUERY = "I"  # database residue against a gap (horizontal move)

DEFAULT_CELL_BUDGET = 1 << 28


@njit(inline="always", nogil=True)
def cell_kernel(h_diag, h_up, f_up, h_left, e_left, sub, gap_open, gap_extend, best):
    e_ext = e_left - gap_extend
    e_open = h_left - gap_open
    e = max(e_ext, e_open)
    f_ext = f_up - gap_extend
    f_open = h_up - gap_open
    f = max(f_ext, f_open)
    h = h_diag + sub
    h = max(h, e)
    h = max(h, f)
    h = max(h, 0)
    best = max(h, best)
    return h, e, f, best


class CellState(NamedTuple):
    h: int
    e: int
    f: int


BORDER = CellState(0, NEG_INF, NEG_INF)


def cell_update(up_left: int, up: CellState, left: CellState, sub_score: int,
                scheme: ScoringScheme, running_max: int) -> tuple[CellState, int]:
    """One application of the cell update; returns the new cell and running max."""
    up, left = CellState(*up), CellState(*left)
    h, e, f, best = cell_kernel(np.int64(up_left), np.int64(up.h), np.int64(up.f),
                                np.int64(left.h), np.int64(left.e), np.int64(sub_score),
                                np.int64(scheme.gap_open), np.int64(scheme.gap_extend),
                                np.int64(running_max))
    return CellState(int(h), int(e), int(f)), int(best)


@dataclass(frozen=True)
class Sequence:
    id: str
    residues: str

    def __len__(self):
        return len(self.residues)


@dataclass(frozen=True)
class AlignmentResult:
    """Optimal local score with 1-based end cell; ``ops`` only after traceback.

    A zero score has end (0, 0) and, when traced, an empty ``ops``.
    """

    score: int
    end_q: int
    end_d: int
    start_q: int | None = None
    start_d: int | None = None
    ops: str | None = None

    @property
    def cigar(self) -> str | None:
        if self.ops is None:
            return None
        out, i = [], 0
        while i < len(self.ops):
            j = i
            while j < len(self.ops) and self.ops[j] == self.ops[i]:
                j += 1
            out.append(f"{j - i}{self.ops[i]}")
            i = j
        return "".join(out)


def as_sequence(s, default_id: str = "seq") -> Sequence:
    return s if isinstance(s, Sequence) else Sequence(default_id, str(s))


def _encode_pair(q, d, scheme):
    q, d = as_sequence(q, "query"), as_sequence(d, "target")
    if len(q) == 0 or len(d) == 0:
        raise EmptySequence("alignment inputs must be non-empty")
    return scheme.encode(q.residues), scheme.encode(d.residues)


@njit(nogil=True, cache=True)
def _score_rows(a, b, sm, gap_open, gap_extend, swapped):
    """Score-only sweep with ``a`` on rows; storage is one row of ``len(b)``.

    When ``swapped`` the caller transposed the problem, so ties on the
    maximum are resolved on the original (query, database) coordinates.
    """
    n = b.shape[0]
    h_row = np.zeros(n + 1, dtype=np.int32)
    f_row = np.full(n + 1, NEG_INF, dtype=np.int32)
    best = np.int32(0)
    bi = 0
    bj = 0
    for r in range(1, a.shape[0] + 1):
        row = sm[a[r - 1]]
        h_diag = np.int32(0)
        h_left = np.int32(0)
        e_left = np.int32(NEG_INF)
        for c in range(1, n + 1):
            h_up = h_row[c]
            h, e, f, nb = cell_kernel(h_diag, h_up, f_row[c], h_left, e_left,
                                      row[b[c - 1]], gap_open, gap_extend, best)
            h_diag = h_up
            h_row[c] = h
            f_row[c] = f
            h_left = h
            e_left = e
            if nb > best:
                best = nb
                if swapped:
                    bi, bj = c, r
                else:
                    bi, bj = r, c
            elif swapped and h == best and h > 0 and (c < bi or (c == bi and r < bj)):
                bi, bj = c, r
    return best, bi, bj


def score_local(q, d, scheme: ScoringScheme) -> AlignmentResult:
    """Best local score and its first (row-major) end cell, in linear memory."""
    qa, da = _encode_pair(q, d, scheme)
    sm = scheme.matrix.scores
    go, ge = np.int32(scheme.gap_open), np.int32(scheme.gap_extend)
    if len(da) <= len(qa):
        s, i, j = _score_rows(qa, da, sm, go, ge, False)
    else:
        s, i, j = _score_rows(da, qa, np.ascontiguousarray(sm.T), go, ge, True)
    return AlignmentResult(int(s), int(i), int(j))


# direction codes: bits 0-1 H source, bit 2 E extends, bit 3 F extends
_H_ZERO, _H_DIAG, _H_UP, _H_LEFT = 0, 1, 2, 3
_E_EXT, _F_EXT = 4, 8


@njit(nogil=True, cache=True)
def _fill_directions(a, b, sm, gap_open, gap_extend):
    m, n = a.shape[0], b.shape[0]
    dirs = np.zeros((m + 1, n + 1), dtype=np.uint8)
    h_row = np.zeros(n + 1, dtype=np.int32)
    f_row = np.full(n + 1, NEG_INF, dtype=np.int32)
    best = np.int32(0)
    bi = 0
    bj = 0
    for i in range(1, m + 1):
        row = sm[a[i - 1]]
        h_diag = np.int32(0)
        h_left = np.int32(0)
        e_left = np.int32(NEG_INF)
        for j in range(1, n + 1):
            h_up = h_row[j]
            f_up = f_row[j]
            sub = row[b[j - 1]]
            h, e, f, nb = cell_kernel(h_diag, h_up, f_up, h_left, e_left,
                                      sub, gap_open, gap_extend, best)
            code = 0
            if h > 0:
                if h == h_diag + sub:
                    code = _H_DIAG
                elif h == f:
                    code = _H_UP
                else:
                    code = _H_LEFT
            # ties between opening and extending resolve to opening
            if e != h_left - gap_open:
                code |= _E_EXT
            if f != h_up - gap_open:
                code |= _F_EXT
            dirs[i, j] = code
            h_diag = h_up
            h_row[j] = h
            f_row[j] = f
            h_left = h
            e_left = e
            if nb > best:
                best = nb
                bi, bj = i, j
    return dirs, best, bi, bj


def traceback_local(q, d, scheme: ScoringScheme, cell_budget: int = DEFAULT_CELL_BUDGET) -> AlignmentResult:
    """Full-matrix alignment with edit operations.

    Ties during traceback prefer the diagonal, then a gap in the database
    (vertical), then a gap in the query (horizontal).
    """
    qa, da = _encode_pair(q, d, scheme)
    cells = (len(qa) + 1) * (len(da) + 1)
    if cells > cell_budget:
        raise MatrixTooLarge(f"{cells} cells exceed the traceback budget of {cell_budget}; use score-only mode")
    dirs, best, bi, bj = _fill_directions(qa, da, scheme.matrix.scores,
                                          np.int32(scheme.gap_open), np.int32(scheme.gap_extend))
    if best == 0:
        return AlignmentResult(0, 0, 0, 0, 0, "")

    ops = []
    i, j, state = int(bi), int(bj), "H"
    while True:
        code = dirs[i, j]
        if state == "H":
            src = code & 3
            if src == _H_DIAG:
                ops.append(PAIR)
                i -= 1
                j -= 1
                if i == 0 or j == 0 or dirs[i, j] & 3 == _H_ZERO:
                    break
            elif src == _H_UP:
                state = "F"
            elif src == _H_LEFT:
                state = "E"
            else:  # pragma: no cover - a positive cell always has a source
                raise AssertionError("traceback reached a zero cell")
        elif state == "F":
            ops.append(GAP_IN_DB)
            state = "F" if code & _F_EXT else "H"
            i -= 1
        else:
            ops.append(GAP_IN_QUERY)
            state = "E" if code & _E_EXT else "H"
            j -= 1
    ops.reverse()
    return AlignmentResult(int(best), int(bi), int(bj), i + 1, j + 1, "".join(ops))


def replay_score(q, d, scheme: ScoringScheme, start_q: int, start_d: int, ops: str) -> int:
    """Score a path of edit operations from a 1-based start cell."""
    q, d = as_sequence(q), as_sequence(d)
    qa, da = scheme.encode(q.residues), scheme.encode(d.residues)
    sm = scheme.matrix.scores
    i, j = start_q - 1, start_d - 1
    total, prev = 0, None
    for op in ops:
        if (op in (PAIR, GAP_IN_DB) and i >= len(qa)) or (op in (PAIR, GAP_IN_QUERY) and j >= len(da)):
            raise ValueError("edit operations run past the end of a sequence")
        if op == PAIR:
            total += int(sm[qa[i], da[j]])
            i += 1
            j += 1
        elif op in (GAP_IN_DB, GAP_IN_QUERY):
            total -= scheme.gap_extend if op == prev else scheme.gap_open
            if op == GAP_IN_DB:
                i += 1
            else:
                j += 1
        else:
            raise ValueError(f"unknown edit operation {op!r}")
        prev = op
    return total


def aligned_rows(q, d, result: AlignmentResult) -> tuple[str, str, str]:
    """Gapped query row, match line and gapped database row for display."""
    if not result.ops:
        return "", "", ""
    q, d = as_sequence(q), as_sequence(d)
    i, j = result.start_q - 1, result.start_d - 1
    top, mid, bot = [], [], []
    for op in result.ops:
        if op == PAIR:
            a, b = q.residues[i], d.residues[j]
            top.append(a)
            bot.append(b)
            mid.append("|" if a.upper() == b.upper() else ".")
            i += 1
            j += 1
        elif op == GAP_IN_DB:
            top.append(q.residues[i])
            bot.append("-")
            mid.append(" ")
            i += 1
        else:
            top.append("-")
            bot.append(d.residues[j])
            mid.append(" ")
            j += 1
    return "".join(top), "".join(mid), "".join(bot)
