"""Parallel scoring strategies built on :func:`swport.core.cell_kernel`.

``batch_score`` is the inter-sequence scheme: the query is scored against a
group of ``lane_width`` targets in lock-step, one lane per target, with the
cell state held as structure-of-arrays over the lanes.  Targets are sorted by
length so each group is padded only to its own longest member.

``wavefront_score`` is the intra-sequence scheme: one matrix is cut into
blocks of ``tile_rows`` x ``tile_cols`` cells.  Blocks on the same block
anti-diagonal have no dependencies on each other and are shared out between
workers; inside a block cells are swept one anti-diagonal at a time.
"""

from __future__ import annotations

import threading
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
from numba import njit

from .core import AlignmentResult, Sequence, as_sequence, cell_kernel
from .errors import EmptyBatch, EmptySequence
from .scoring import NEG_INF, ScoringScheme


@dataclass(frozen=True)
class SequenceBatch:
    """A query and its targets, sorted ascending by length.

    ``order[k]`` is the caller's index of ``targets[k]``; results come back in
    the caller's order.
    """

    query: Sequence
    targets: tuple[Sequence, ...]
    lane_width: int = 16
    order: tuple[int, ...] = ()

    @classmethod
    def build(cls, query, targets, lane_width: int = 16) -> SequenceBatch:
        if lane_width < 1:
            raise ValueError("lane_width must be >= 1")
        targets = [as_sequence(t, f"t{k}") for k, t in enumerate(targets)]
        if not targets:
            raise EmptyBatch("a batch needs at least one target")
        order = sorted(range(len(targets)), key=lambda k: (len(targets[k]), k))
        return cls(as_sequence(query, "query"), tuple(targets[k] for k in order), lane_width, tuple(order))

    def groups(self) -> list[tuple[Sequence, ...]]:
        L = self.lane_width
        return [self.targets[k:k + L] for k in range(0, len(self.targets), L)]

    def padded_cells(self) -> int:
        """Upper bound on cell updates: |query| x group size x longest member, summed."""
        return sum(len(self.query) * len(g) * len(g[-1]) for g in self.groups())


@dataclass(frozen=True)
class WavefrontConfig:
    tile_rows: int = 64
    tile_cols: int = 256
    band: int | None = None

    def __post_init__(self):
        if self.tile_rows < 1 or self.tile_cols < 1:
            raise ValueError("tile sizes must be >= 1")
        if self.band is not None and self.band < 0:
            raise ValueError("band must be non-negative")


# ---------------------------------------------------------------- inter-sequence

@njit(nogil=True, cache=True)
def _score_groups(q, sm, pad, gap_open, gap_extend, codes, offsets, lens, members,
                  group_starts, groups, out_score, out_i, out_j):
    """Score lane groups ``groups`` (indices into ``group_starts``).

    ``members`` lists target indices in sorted order; group g is
    ``members[group_starts[g]:group_starts[g + 1]]``.  Returns cells updated.
    """
    m = q.shape[0]
    n_sym = sm.shape[0]
    cells = 0
    for gi in range(groups.shape[0]):
        g = groups[gi]
        lo = group_starts[g]
        L = group_starts[g + 1] - lo
        width = 0
        for l in range(L):
            width = max(width, lens[members[lo + l]])
        # query profile: substitution score of every symbol against each lane column
        prof = np.empty((n_sym, width, L), dtype=np.int32)
        for l in range(L):
            t = members[lo + l]
            for j in range(width):
                sym = codes[offsets[t] + j] if j < lens[t] else pad
                for a in range(n_sym):
                    prof[a, j, l] = sm[a, sym]
        h_row = np.zeros((width + 1, L), dtype=np.int32)
        f_row = np.full((width + 1, L), NEG_INF, dtype=np.int32)
        h_diag = np.zeros(L, dtype=np.int32)
        h_left = np.zeros(L, dtype=np.int32)
        e_left = np.zeros(L, dtype=np.int32)
        best = np.zeros(L, dtype=np.int32)
        row_best = np.zeros(L, dtype=np.int32)
        bi = np.zeros(L, dtype=np.int64)
        bj = np.zeros(L, dtype=np.int64)
        for i in range(1, m + 1):
            p = prof[q[i - 1]]
            h_diag[:] = 0
            h_left[:] = 0
            e_left[:] = NEG_INF
            row_best[:] = best
            for j in range(1, width + 1):
                for l in range(L):
                    h_up = h_row[j, l]
                    h, e, f, nb = cell_kernel(h_diag[l], h_up, f_row[j, l], h_left[l], e_left[l],
                                              p[j - 1, l], gap_open, gap_extend, row_best[l])
                    h_diag[l] = h_up
                    h_row[j, l] = h
                    f_row[j, l] = f
                    h_left[l] = h
                    e_left[l] = e
                    row_best[l] = nb
            # rare: a lane improved this row; its first column holding the new max is the end
            for l in range(L):
                if row_best[l] > best[l]:
                    best[l] = row_best[l]
                    bi[l] = i
                    for j in range(1, width + 1):
                        if h_row[j, l] == best[l]:
                            bj[l] = j
                            break
        cells += m * width * L
        for l in range(L):
            t = members[lo + l]
            out_score[t] = best[l]
            out_i[t] = bi[l]
            out_j[t] = bj[l]
    return cells


def encode_many(seqs, scheme: ScoringScheme):
    """Concatenated codes, offsets and lengths for a list of sequences."""
    parts = [scheme.encode(as_sequence(s).residues) for s in seqs]
    lens = np.array([len(p) for p in parts], dtype=np.int64)
    offsets = np.zeros(len(parts), dtype=np.int64)
    if len(parts) > 1:
        np.cumsum(lens[:-1], out=offsets[1:])
    codes = np.concatenate(parts) if parts else np.zeros(0, dtype=np.int32)
    return codes.astype(np.int32), offsets, lens


def score_encoded(qcodes, codes, offsets, lens, members, scheme: ScoringScheme,
                  lane_width: int = 16, workers: int = 1):
    """Inter-sequence scoring of ``members`` (target indices, any order).

    Returns ``(scores, end_q, end_d, cells)`` indexed like ``lens``; entries
    for non-members are left at zero.
    """
    members = np.asarray(members, dtype=np.int64)
    if members.size == 0:
        raise EmptyBatch("a batch needs at least one target")
    if (lens[members] == 0).any():
        raise EmptySequence("batch targets must be non-empty")
    if lane_width < 1:
        raise ValueError("lane_width must be >= 1")
    order = np.lexsort((members, lens[members]))
    members = members[order]
    group_starts = np.arange(0, members.size + lane_width, lane_width, dtype=np.int64)
    group_starts[-1] = members.size
    group_starts = np.unique(group_starts)
    n_groups = group_starts.size - 1

    n = lens.shape[0]
    out_score = np.zeros(n, dtype=np.int32)
    out_i = np.zeros(n, dtype=np.int64)
    out_j = np.zeros(n, dtype=np.int64)
    sm = scheme.matrix.padded()
    pad = np.int32(len(scheme.matrix))
    args = (qcodes, sm, pad, np.int32(scheme.gap_open), np.int32(scheme.gap_extend),
            codes, offsets, lens, members, group_starts)

    workers = max(1, min(workers, n_groups))
    if workers == 1:
        cells = _score_groups(*args, np.arange(n_groups, dtype=np.int64), out_score, out_i, out_j)
    else:
        # longest groups last; stride so every worker gets a mix
        shares = [np.arange(w, n_groups, workers, dtype=np.int64) for w in range(workers)]
        with ThreadPoolExecutor(workers) as pool:
            futures = [pool.submit(_score_groups, *args, s, out_score, out_i, out_j) for s in shares]
            cells = sum(f.result() for f in futures)
    return out_score, out_i, out_j, int(cells)


def batch_score_with_stats(batch: SequenceBatch, scheme: ScoringScheme, workers: int = 1):
    """Like :func:`batch_score` but also returns the number of cell updates performed."""
    if not batch.targets:
        raise EmptyBatch("a batch needs at least one target")
    if len(batch.query) == 0:
        raise EmptySequence("query must be non-empty")
    qcodes = scheme.encode(batch.query.residues)
    codes, offsets, lens = encode_many(batch.targets, scheme)
    # targets are already sorted; pass them in that order so grouping matches the batch
    s, i, j, cells = score_encoded(qcodes, codes, offsets, lens, np.arange(len(lens)), scheme,
                                   batch.lane_width, workers)
    results = [None] * len(batch.targets)
    order = batch.order or tuple(range(len(batch.targets)))
    for k, orig in enumerate(order):
        results[orig] = AlignmentResult(int(s[k]), int(i[k]), int(j[k]))
    return results, cells


def batch_score(batch: SequenceBatch, scheme: ScoringScheme, workers: int = 1) -> list[AlignmentResult]:
    """Score the query against every target; results follow the caller's target order."""
    return batch_score_with_stats(batch, scheme, workers)[0]


# ---------------------------------------------------------------- intra-sequence

@njit(nogil=True, cache=True)
def _block(s, b, q, d, sm, gap_open, gap_extend, R, C, band,
           top_h, top_f, left_h, left_e, blk_best, blk_i, blk_j):
    m = q.shape[0]
    n = d.shape[0]
    r0 = s * R
    c0 = b * C
    rs = min(R, m - r0)
    cb = min(C, n - c0)

    p2h = np.zeros(rs, dtype=np.int32)
    p1h = np.zeros(rs, dtype=np.int32)
    p1e = np.zeros(rs, dtype=np.int32)
    p1f = np.zeros(rs, dtype=np.int32)
    cur_h = np.zeros(rs, dtype=np.int32)
    cur_e = np.zeros(rs, dtype=np.int32)
    cur_f = np.zeros(rs, dtype=np.int32)
    bot_h = np.zeros(cb, dtype=np.int32)
    bot_f = np.zeros(cb, dtype=np.int32)
    right_h = np.zeros(rs, dtype=np.int32)
    right_e = np.zeros(rs, dtype=np.int32)

    corner = left_h[s, 0]
    corner_out = top_h[c0 + cb - 1]
    best = np.int32(0)
    bi = 0
    bj = 0
    for dg in range(rs + cb - 1):
        k_lo = max(0, dg - cb + 1)
        k_hi = min(rs - 1, dg)
        for k in range(k_lo, k_hi + 1):
            c = dg - k
            if c == 0:
                hl = left_h[s, k + 1]
                el = left_e[s, k + 1]
            else:
                hl = p1h[k]
                el = p1e[k]
            if k == 0:
                hu = top_h[c0 + c]
                fu = top_f[c0 + c]
                hd = corner if c == 0 else top_h[c0 + c - 1]
            else:
                hu = p1h[k - 1]
                fu = p1f[k - 1]
                hd = left_h[s, k] if c == 0 else p2h[k - 1]
            gi = r0 + k + 1
            gj = c0 + c + 1
            if band >= 0 and abs(gi - gj) > band:
                h = 0
                e = NEG_INF
                f = NEG_INF
            else:
                h, e, f, _ = cell_kernel(hd, hu, fu, hl, el, sm[q[gi - 1], d[gj - 1]],
                                         gap_open, gap_extend, best)
                if h > best or (h == best and h > 0 and (gi < bi or (gi == bi and gj < bj))):
                    best = h
                    bi = gi
                    bj = gj
            cur_h[k] = h
            cur_e[k] = e
            cur_f[k] = f
            if k == rs - 1:
                bot_h[c] = h
                bot_f[c] = f
            if c == cb - 1:
                right_h[k] = h
                right_e[k] = e
        tmp = p2h
        p2h = p1h
        p1h = cur_h
        cur_h = tmp
        tmp = p1e
        p1e = cur_e
        cur_e = tmp
        tmp = p1f
        p1f = cur_f
        cur_f = tmp

    left_h[s, 0] = corner_out
    for k in range(rs):
        left_h[s, k + 1] = right_h[k]
        left_e[s, k + 1] = right_e[k]
    for c in range(cb):
        top_h[c0 + c] = bot_h[c]
        top_f[c0 + c] = bot_f[c]
    blk_best[s, b] = best
    blk_i[s, b] = bi
    blk_j[s, b] = bj


@njit(nogil=True, cache=True)
def _wave_step(t, worker, n_workers, q, d, sm, gap_open, gap_extend, R, C, band,
               top_h, top_f, left_h, left_e, blk_best, blk_i, blk_j):
    """Blocks on block anti-diagonal ``t`` owned by ``worker``."""
    S = blk_best.shape[0]
    B = blk_best.shape[1]
    s_lo = max(0, t - B + 1)
    s_hi = min(S - 1, t)
    for s in range(s_lo, s_hi + 1):
        if s % n_workers == worker:
            _block(s, t - s, q, d, sm, gap_open, gap_extend, R, C, band,
                   top_h, top_f, left_h, left_e, blk_best, blk_i, blk_j)


@njit(nogil=True, cache=True)
def _wave_all(q, d, sm, gap_open, gap_extend, R, C, band,
              top_h, top_f, left_h, left_e, blk_best, blk_i, blk_j):
    S = blk_best.shape[0]
    B = blk_best.shape[1]
    for t in range(S + B - 1):
        _wave_step(t, 0, 1, q, d, sm, gap_open, gap_extend, R, C, band,
                   top_h, top_f, left_h, left_e, blk_best, blk_i, blk_j)


def _wavefront_encoded(qa, da, scheme: ScoringScheme, cfg: WavefrontConfig, workers: int = 1):
    m, n = qa.shape[0], da.shape[0]
    R, C = cfg.tile_rows, cfg.tile_cols
    S, B = -(-m // R), -(-n // C)
    top_h = np.zeros(n, dtype=np.int32)
    top_f = np.full(n, NEG_INF, dtype=np.int32)
    left_h = np.zeros((S, R + 1), dtype=np.int32)
    left_e = np.full((S, R + 1), NEG_INF, dtype=np.int32)
    blk_best = np.zeros((S, B), dtype=np.int32)
    blk_i = np.zeros((S, B), dtype=np.int64)
    blk_j = np.zeros((S, B), dtype=np.int64)
    state = (qa, da, scheme.matrix.scores, np.int32(scheme.gap_open), np.int32(scheme.gap_extend),
             R, C, -1 if cfg.band is None else cfg.band,
             top_h, top_f, left_h, left_e, blk_best, blk_i, blk_j)

    workers = max(1, min(workers, S, B))
    if workers == 1:
        _wave_all(*state)
    else:
        barrier = threading.Barrier(workers)
        errors = []

        def run(w):
            try:
                for t in range(S + B - 1):
                    _wave_step(t, w, workers, *state)
                    barrier.wait()
            except threading.BrokenBarrierError:
                pass
            except BaseException as exc:  # pragma: no cover - surfaced below
                errors.append(exc)
                barrier.abort()

        threads = [threading.Thread(target=run, args=(w,), daemon=True) for w in range(workers)]
        for th in threads:
            th.start()
        for th in threads:
            th.join()
        if errors:
            raise errors[0]

    # reduce block maxima: highest score, then smallest (i, j)
    flat = np.flatnonzero(blk_best == blk_best.max())
    best = int(blk_best.flat[flat[0]])
    if best == 0:
        return AlignmentResult(0, 0, 0)
    ends = sorted((int(blk_i.flat[k]), int(blk_j.flat[k])) for k in flat)
    return AlignmentResult(best, ends[0][0], ends[0][1])


def wavefront_score(q, d, scheme: ScoringScheme, cfg: WavefrontConfig | None = None,
                    workers: int = 1) -> AlignmentResult:
    """Score one pair with the blocked anti-diagonal sweep."""
    q, d = as_sequence(q, "query"), as_sequence(d, "target")
    if len(q) == 0 or len(d) == 0:
        raise EmptySequence("alignment inputs must be non-empty")
    cfg = cfg or WavefrontConfig()
    return _wavefront_encoded(scheme.encode(q.residues), scheme.encode(d.residues), scheme, cfg, workers)
