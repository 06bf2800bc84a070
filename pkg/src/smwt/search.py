"""Best-improvement neighbourhood scans with the setup-variation filter, and RVND."""
from __future__ import annotations

import time
from dataclasses import dataclass

import numba
import numpy as np

from .evaluation import (
    BWD,
    FWD,
    SWAP,
    InvalidMoveError,
    MoveSpec,
    _bwd_cost,
    _bwd_delta,
    _fwd_cost,
    _fwd_delta,
    _swap_cost,
    _swap_delta,
    materialize,
)
from .model import EvalState, Instance, fill_prefixes, recompute_prefixes
from .movefilter import (
    SWAP_ID,
    FilterState,
    NeighborhoodId,
    record_many,
)

_KIND_NAMES = {SWAP: "swap", FWD: "lblock_fwd", BWD: "lblock_bwd"}

# Set to True to re-check every applied move against a full recompute.
DEBUG_CHECKS = False


class StaleStateError(RuntimeError):
    pass


@dataclass(frozen=True)
class ScanResult:
    best_move: MoveSpec | None
    best_cost: int
    improved: bool


@numba.njit(cache=True)
def _scan_swap(p, d, w, s, seq, C, g, h, limited, thr, learning, diagnostic, counters, rec):
    n = seq.shape[0] - 1
    best = g[n]
    bi = -1
    bj = -1
    nrec = 0
    for i in range(1, n):
        for j in range(i + 1, n + 1):
            delta = _swap_delta(s, seq, n, i, j)
            counters[0] += 1
            ok = (not limited) or delta <= thr
            if ok:
                counters[1] += 1
            else:
                counters[2] += 1
                if not diagnostic:
                    continue
            c = _swap_cost(p, d, w, s, seq, C, g, h, i, j, best)
            if c < 0:
                continue
            if not ok:
                # would have beaten the scan incumbent but was filtered out
                counters[4] += 1
                continue
            if diagnostic:
                counters[3] += 1
            best = c
            bi = i
            bj = j
            if learning:
                rec[nrec] = delta
                nrec += 1
    return bi, bj, best, nrec


@numba.njit(cache=True)
def _scan_lblock(p, d, w, s, seq, C, g, h, l, limited, thr, learning, diagnostic, counters, rec):
    n = seq.shape[0] - 1
    best = g[n]
    bkind = -1
    bi = -1
    bj = -1
    nrec = 0
    for direction in range(2):
        if direction == 0:
            i_lo = 1
            i_hi = n - l
        else:
            i_lo = 2
            i_hi = n - l + 1
        for i in range(i_lo, i_hi + 1):
            if direction == 0:
                j_lo = i + l
                j_hi = n
            else:
                j_lo = 1
                j_hi = i - 1
            for j in range(j_lo, j_hi + 1):
                if direction == 0:
                    delta = _fwd_delta(s, seq, n, i, j, l)
                else:
                    delta = _bwd_delta(s, seq, n, i, j, l)
                counters[0] += 1
                ok = (not limited) or delta <= thr
                if ok:
                    counters[1] += 1
                else:
                    counters[2] += 1
                    if not diagnostic:
                        continue
                if direction == 0:
                    c = _fwd_cost(p, d, w, s, seq, C, g, h, i, j, l, best)
                else:
                    c = _bwd_cost(p, d, w, s, seq, C, g, h, i, j, l, best)
                if c < 0:
                    continue
                if not ok:
                    counters[4] += 1
                    continue
                if diagnostic:
                    counters[3] += 1
                best = c
                bkind = FWD if direction == 0 else BWD
                bi = i
                bj = j
                if learning:
                    rec[nrec] = delta
                    nrec += 1
    return bkind, bi, bj, best, nrec


def _buffer(fs: FilterState, size: int) -> np.ndarray:
    buf = getattr(fs, "_rec_buffer", None)
    if buf is None or buf.shape[0] < size:
        buf = np.empty(max(size, 16), dtype=np.int64)
        fs._rec_buffer = buf
    return buf


def scan_swap(inst: Instance, seq: np.ndarray, state: EvalState, fs: FilterState) -> ScanResult:
    return scan(inst, seq, state, fs, SWAP_ID)


def scan_lblock(inst: Instance, seq: np.ndarray, state: EvalState, l: int, fs: FilterState) -> ScanResult:
    if not 1 <= l <= inst.n - 1:
        raise ValueError(f"block length {l} needs 1 <= l <= n-1 (n={inst.n})")
    return scan(inst, seq, state, fs, NeighborhoodId.lblock(l))


def scan(inst: Instance, seq: np.ndarray, state: EvalState, fs: FilterState, v: NeighborhoodId) -> ScanResult:
    """Scan neighbourhood ``v`` of ``seq``; ``fs`` supplies the threshold and
    collects counters (and setup variations while learning)."""
    k = fs._require(v)
    limited, thr = fs.limit(v)
    p, d, w, s = inst.arrays
    n = inst.n
    rec = _buffer(fs, n * n)
    f0 = int(state.g[-1])
    if v.kind == "swap":
        bi, bj, best, nrec = _scan_swap(
            p, d, w, s, seq, state.C, state.g, state.h, limited, thr, fs.learning, fs.diagnostic, fs.counters[k], rec
        )
        move = MoveSpec("swap", int(bi), int(bj)) if bi > 0 else None
    else:
        kind, bi, bj, best, nrec = _scan_lblock(
            p, d, w, s, seq, state.C, state.g, state.h, v.l, limited, thr, fs.learning, fs.diagnostic, fs.counters[k], rec
        )
        move = MoveSpec(_KIND_NAMES[kind], int(bi), int(bj), v.l) if kind >= 0 else None
    if nrec:
        record_many(fs, v, rec[:nrec])
    if move is None:
        return ScanResult(None, f0, False)
    return ScanResult(move, int(best), True)


def apply_move(seq: np.ndarray, state: EvalState, move: MoveSpec, inst: Instance) -> None:
    """Turn ``seq`` into the candidate of ``move`` and repair ``state`` from
    the first changed position on."""
    n = len(seq) - 1
    if not move.is_valid(n):
        raise InvalidMoveError(f"{move} is not a valid move for n={n}")
    if DEBUG_CHECKS:
        _assert_fresh(inst, seq, state)
    seq[:] = materialize(seq, move)
    p, d, w, s = inst.arrays
    fill_prefixes(p, d, w, s, seq, state.C, state.g, state.h, move.first_touched())
    if DEBUG_CHECKS:
        _assert_fresh(inst, seq, state)


def _assert_fresh(inst: Instance, seq: np.ndarray, state: EvalState) -> None:
    ref = recompute_prefixes(inst, seq)
    if not all(np.array_equal(a, b) for a, b in ((ref.C, state.C), (ref.g, state.g), (ref.h, state.h))):
        raise StaleStateError("evaluation state does not match the sequence")


class UniformStream:
    """Uniform draws in [0, 1) handed out in fixed-size chunks.

    Both RVND implementations pick neighbourhoods from the same stream, so a
    run follows the same trajectory whichever one is used.
    """

    CHUNK = 64

    def __init__(self, rng: np.random.Generator):
        self.rng = rng
        self.buf = rng.random(self.CHUNK)
        self.pos = 0

    def refill(self) -> None:
        self.buf = self.rng.random(self.CHUNK)
        self.pos = 0

    def next(self) -> float:
        if self.pos >= self.buf.shape[0]:
            self.refill()
        u = self.buf[self.pos]
        self.pos += 1
        return float(u)


@numba.njit(cache=True)
def _apply_kernel(p, d, w, s, seq, C, g, h, kind, i, j, l, tmp):
    tmp[:] = seq
    if kind == SWAP:
        seq[i] = tmp[j]
        seq[j] = tmp[i]
        first = i
    elif kind == FWD:
        seq[i : j - l + 1] = tmp[i + l : j + 1]
        seq[j - l + 1 : j + 1] = tmp[i : i + l]
        first = i
    else:
        seq[j : j + l] = tmp[i : i + l]
        seq[j + l : i + l] = tmp[j:i]
        first = j
    fill_prefixes(p, d, w, s, seq, C, g, h, first)


_DONE = 0
_NEED_DRAWS = 1
_FLUSH_RECORDS = 2


@numba.njit(cache=True)
def _rvnd_kernel(
    p, d, w, s, seq, C, g, h, lengths, limited, thr, learning, diagnostic, counters,
    rec_vals, rec_hood, pending, ubuf, upos, tmp,
):
    """Runs RVND until done, or until it needs more draws or record space.

    ``lengths[k]`` is 0 for the swap neighbourhood, else the block length.
    Returns ``(status, upos, nrec, moves_applied)``; ``pending`` carries the
    not-yet-failed neighbourhoods across a resume.
    """
    n = seq.shape[0] - 1
    nv = lengths.shape[0]
    cap = rec_vals.shape[0]
    nrec = 0
    applied = 0
    npend = 0
    for k in range(nv):
        if pending[k]:
            npend += 1
    while npend > 0 and g[n] > 0:
        if upos >= ubuf.shape[0]:
            return _NEED_DRAWS, upos, nrec, applied
        if learning and cap - nrec < n * n:
            return _FLUSH_RECORDS, upos, nrec, applied
        r = int(ubuf[upos] * npend)
        upos += 1
        v = -1
        for k in range(nv):
            if pending[k]:
                if r == 0:
                    v = k
                    break
                r -= 1
        l = lengths[v]
        rec = rec_vals[nrec:]
        if l == 0:
            bi, bj, best, got = _scan_swap(
                p, d, w, s, seq, C, g, h, limited[v], thr[v], learning, diagnostic, counters[v], rec
            )
            kind = SWAP if bi > 0 else -1
        else:
            kind, bi, bj, best, got = _scan_lblock(
                p, d, w, s, seq, C, g, h, l, limited[v], thr[v], learning, diagnostic, counters[v], rec
            )
        for q in range(nrec, nrec + got):
            rec_hood[q] = v
        nrec += got
        if kind >= 0:
            _apply_kernel(p, d, w, s, seq, C, g, h, kind, bi, bj, max(l, 1), tmp)
            applied += 1
            for k in range(nv):
                pending[k] = True
            npend = nv
        else:
            pending[v] = False
            npend -= 1
    return _DONE, upos, nrec, applied


def _as_stream(rng) -> UniformStream:
    return rng if isinstance(rng, UniformStream) else UniformStream(rng)


def rvnd(
    inst: Instance,
    seq: np.ndarray,
    state: EvalState,
    fs: FilterState,
    neighborhoods: list[NeighborhoodId],
    rng: np.random.Generator | UniformStream,
    timed: bool = False,
) -> np.ndarray:
    """Randomized variable neighbourhood descent, updating ``seq`` and ``state`` in place.

    A neighbourhood is drawn uniformly among those that have not failed since
    the last improvement; an improvement makes all of them eligible again.
    ``timed=True`` scans from Python so that time per neighbourhood can be
    measured; the trajectory is the same either way.
    """
    if not neighborhoods:
        raise ValueError("rvnd needs at least one neighbourhood")
    stream = _as_stream(rng)
    if timed:
        _rvnd_timed(inst, seq, state, fs, neighborhoods, stream)
        return seq
    idx = np.array([fs._require(v) for v in neighborhoods], dtype=np.int64)
    lengths = np.array([v.l if v.kind == "lblock" else 0 for v in neighborhoods], dtype=np.int64)
    limits = [fs.limit(v) for v in neighborhoods]
    limited = np.array([lim for lim, _ in limits], dtype=np.bool_)
    thr = np.array([t for _, t in limits], dtype=np.int64)
    counters = np.ascontiguousarray(fs.counters[idx])
    n = inst.n
    cap = 4 * n * n
    rec_vals = np.empty(cap, dtype=np.int64)
    rec_hood = np.empty(cap, dtype=np.int64)
    pending = np.ones(len(neighborhoods), dtype=np.bool_)
    tmp = np.empty_like(seq)
    p, d, w, s = inst.arrays
    while True:
        status, upos, nrec, _ = _rvnd_kernel(
            p, d, w, s, seq, state.C, state.g, state.h, lengths, limited, thr, fs.learning, fs.diagnostic,
            counters, rec_vals, rec_hood, pending, stream.buf, stream.pos, tmp,
        )
        stream.pos = upos
        for q in range(nrec):
            fs.delta_lists[neighborhoods[rec_hood[q]]].append(int(rec_vals[q]))
        if status == _NEED_DRAWS:
            stream.refill()
        elif status == _DONE:
            break
    fs.counters[idx] = counters
    return seq


def _rvnd_timed(inst, seq, state, fs, neighborhoods, stream: UniformStream) -> None:
    pending = list(neighborhoods)
    while pending and state.g[-1] > 0:
        k = int(stream.next() * len(pending))
        v = pending[k]
        t0 = time.perf_counter()
        res = scan(inst, seq, state, fs, v)
        if res.improved:
            apply_move(seq, state, res.best_move, inst)
            pending = list(neighborhoods)
        else:
            pending.pop(k)
        fs.seconds[fs.index[v]] += time.perf_counter() - t0
