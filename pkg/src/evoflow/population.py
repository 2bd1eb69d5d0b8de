"""Ordered multiset of fitness values with min-extraction and rank queries.

Layout
------
Values are distributed over ``nb`` buckets (a power of two, at least 64) by
``floor(cdf(x) * nb)`` where ``cdf`` is the fitness law's distribution
function.  Because the bucket map is monotone in ``x``, every value in a lower
bucket is strictly smaller than every value in a higher one, and the buckets
are roughly equally loaded under the law.

* each bucket is a singly linked list of node slots, newest first; ``bk``
  holds (list head, size) pairs side by side so a birth touches one line;
* ``blk`` holds per-64-bucket block sizes;
* ``fen`` is a Fenwick tree over block sizes.

``remove_min`` walks a few blocks from a low-water mark, falls back to a
Fenwick descent for the first nonempty block, then scans one bucket.
``count_lt``/``count_le`` cost one Fenwick prefix sum, at most 63 bucket-size
reads and one bucket scan.  The bucket count doubles (``rebucket``) whenever
the mean load exceeds ``MAX_LOAD``, so the bucket scans stay O(1) on average.

All kernels take the raw arrays so that the chain engine can call them from
compiled code.
"""
from __future__ import annotations

import math

import numpy as np
from numba import njit

from .errors import ParameterError
from .laws import KIND_UNIFORM, FitnessLaw, law_cdf

# meta slots
SIZE = 0
LOW_BLOCK = 1
FREE_HEAD = 2
NEXT_UNUSED = 3

MIN_BUCKETS = 64
MAX_BUCKETS = 1 << 22
MAX_LOAD = 32


@njit(cache=True)
def _bucket_of(x, kind, param, nb):
    b = int(law_cdf(x, kind, param) * nb)
    if b >= nb:
        return nb - 1
    return b


@njit(cache=True)
def _fen_add(fen, i, delta):
    i += 1
    n = fen.shape[0]
    while i < n:
        fen[i] += delta
        i += i & (-i)


@njit(cache=True)
def _fen_prefix(fen, i):
    # sum of entries [0, i)
    s = 0
    while i > 0:
        s += fen[i]
        i -= i & (-i)
    return s


@njit(cache=True)
def pop_insert(bk, blk, fen, val, nxt, meta, kind, param, x):
    nb = bk.shape[0]
    b = _bucket_of(x, kind, param, nb)
    node = meta[FREE_HEAD]
    if node >= 0:
        meta[FREE_HEAD] = nxt[node]
    else:
        node = meta[NEXT_UNUSED]
        meta[NEXT_UNUSED] = node + 1
    val[node] = x
    nxt[node] = bk[b, 0]
    bk[b, 0] = node
    bk[b, 1] += 1
    w = b >> 6
    blk[w] += 1
    if w < meta[LOW_BLOCK]:
        meta[LOW_BLOCK] = w
    _fen_add(fen, w, 1)
    meta[SIZE] += 1


@njit(cache=True)
def _fen_first_nonzero(fen):
    # smallest block index whose inclusive prefix sum is >= 1
    n = fen.shape[0] - 1
    pos = 0
    rem = 1
    step = 1
    while step * 2 <= n:
        step *= 2
    while step > 0:
        nxt_pos = pos + step
        if nxt_pos <= n and fen[nxt_pos] < rem:
            pos = nxt_pos
            rem -= fen[nxt_pos]
        step //= 2
    return pos


@njit(cache=True)
def _min_bucket(bk, blk, fen, meta):
    w = meta[LOW_BLOCK]
    nw = blk.shape[0]
    stop = min(nw, w + 8)
    while w < stop and blk[w] == 0:
        w += 1
    if w == stop and (w == nw or blk[w] == 0):
        w = _fen_first_nonzero(fen)
    meta[LOW_BLOCK] = w
    if w >= nw:
        return -1
    b = w << 6
    while bk[b, 0] < 0:
        b += 1
    return b


@njit(cache=True)
def _scan_min(bk, val, nxt, b):
    # Lists are newest first, so `<=` settles ties on the oldest entry.
    best = bk[b, 0]
    best_prev = -1
    prev = best
    cur = nxt[best]
    while cur >= 0:
        if val[cur] <= val[best]:
            best = cur
            best_prev = prev
        prev = cur
        cur = nxt[cur]
    return best, best_prev


@njit(cache=True)
def pop_peek_min(bk, blk, fen, val, nxt, meta):
    if meta[SIZE] == 0:
        return np.nan
    b = _min_bucket(bk, blk, fen, meta)
    best, _ = _scan_min(bk, val, nxt, b)
    return val[best]


@njit(cache=True)
def pop_remove_min(bk, blk, fen, val, nxt, meta):
    if meta[SIZE] == 0:
        return np.nan
    b = _min_bucket(bk, blk, fen, meta)
    best, best_prev = _scan_min(bk, val, nxt, b)
    if best_prev < 0:
        bk[b, 0] = nxt[best]
    else:
        nxt[best_prev] = nxt[best]
    nxt[best] = meta[FREE_HEAD]
    meta[FREE_HEAD] = best
    bk[b, 1] -= 1
    w = b >> 6
    blk[w] -= 1
    _fen_add(fen, w, -1)
    meta[SIZE] -= 1
    return val[best]


@njit(cache=True)
def pop_count_below(bk, fen, val, nxt, kind, param, x, inclusive):
    """Number of stored values < x (or <= x when ``inclusive``)."""
    nb = bk.shape[0]
    b = _bucket_of(x, kind, param, nb)
    w = b >> 6
    c = _fen_prefix(fen, w)
    for j in range(w << 6, b):
        c += bk[j, 1]
    cur = bk[b, 0]
    while cur >= 0:
        v = val[cur]
        if v < x or (inclusive and v == x):
            c += 1
        cur = nxt[cur]
    return c


@njit(cache=True)
def pop_values(bk, val, nxt, meta):
    """Stored values in bucket order (not sorted within a bucket)."""
    out = np.empty(meta[SIZE], dtype=np.float64)
    k = 0
    for b in range(bk.shape[0]):
        cur = bk[b, 0]
        while cur >= 0:
            out[k] = val[cur]
            k += 1
            cur = nxt[cur]
    return out


@njit(cache=True)
def _rebucket(bk, val, nxt, kind, param, nb_new):
    new_bk = np.zeros((nb_new, 2), dtype=np.int32)
    new_bk[:, 0] = -1
    tmp = np.empty(64, dtype=np.int32)
    for b in range(bk.shape[0]):
        m = 0
        cur = bk[b, 0]
        while cur >= 0:
            if m == tmp.shape[0]:
                grown = np.empty(2 * m, dtype=np.int32)
                grown[:m] = tmp
                tmp = grown
            tmp[m] = cur
            m += 1
            cur = nxt[cur]
        # replay oldest first so each new list stays newest first
        for j in range(m - 1, -1, -1):
            node = tmp[j]
            nbk = _bucket_of(val[node], kind, param, nb_new)
            nxt[node] = new_bk[nbk, 0]
            new_bk[nbk, 0] = node
            new_bk[nbk, 1] += 1
    nw = nb_new >> 6
    new_blk = np.zeros(nw, dtype=np.int64)
    for b in range(nb_new):
        new_blk[b >> 6] += new_bk[b, 1]
    new_fen = np.zeros(nw + 1, dtype=np.int64)
    for i in range(1, nw + 1):
        new_fen[i] += new_blk[i - 1]
        j = i + (i & (-i))
        if j <= nw:
            new_fen[j] += new_fen[i]
    return new_bk, new_blk, new_fen


class Population:
    """Multiset of fitness values ordered by value, ties by insertion order.

    Parameters
    ----------
    law : FitnessLaw, optional
        Law whose cdf spreads values over buckets.  Only the balance of the
        buckets depends on it; any finite float can be stored.
    buckets : int
        Initial bucket count (rounded up to a power of two, at least 64).
    capacity : int
        Initial number of node slots; grows on demand.
    """

    def __init__(self, law: FitnessLaw | None = None, buckets: int = MIN_BUCKETS, capacity: int = 1024):
        self.kind = law.kind if law is not None else KIND_UNIFORM
        self.param = law.param if law is not None else 0.0
        nb = max(MIN_BUCKETS, 1 << max(0, int(buckets) - 1).bit_length())
        self.bk = np.zeros((nb, 2), dtype=np.int32)
        self.bk[:, 0] = -1
        self.blk = np.zeros(nb >> 6, dtype=np.int64)
        self.fen = np.zeros((nb >> 6) + 1, dtype=np.int64)
        self.val = np.empty(max(1, capacity), dtype=np.float64)
        self.nxt = np.empty(max(1, capacity), dtype=np.int32)
        self.meta = np.array([0, 0, -1, 0], dtype=np.int64)

    @property
    def buckets(self) -> int:
        return self.bk.shape[0]

    def size(self) -> int:
        return int(self.meta[SIZE])

    def __len__(self):
        return int(self.meta[SIZE])

    def reserve(self, extra: int) -> None:
        """Make room for ``extra`` further inserts without reallocation."""
        need = int(self.meta[NEXT_UNUSED]) + int(extra)
        cap = self.val.shape[0]
        if need <= cap:
            return
        new_cap = max(need, cap + cap // 2)
        if new_cap >= 2**31:
            raise MemoryError("population exceeds 2**31 node slots")
        val = np.empty(new_cap, dtype=np.float64)
        nxt = np.empty(new_cap, dtype=np.int32)
        used = int(self.meta[NEXT_UNUSED])
        val[:used] = self.val[:used]
        nxt[:used] = self.nxt[:used]
        self.val, self.nxt = val, nxt

    def maybe_rebucket(self, expected_size: int | None = None) -> None:
        """Double the bucket count until ``expected_size`` (default: current size) fits the load cap."""
        size = self.size() if expected_size is None else max(self.size(), int(expected_size))
        nb = self.buckets
        target = nb
        while target < MAX_BUCKETS and size > MAX_LOAD * target:
            target *= 2
        if target != nb:
            self.bk, self.blk, self.fen = _rebucket(
                self.bk, self.val, self.nxt, self.kind, self.param, target
            )
            self.meta[LOW_BLOCK] = 0

    def insert(self, x: float) -> None:
        x = float(x)
        if math.isnan(x):
            raise ValueError("cannot store NaN fitness")
        if self.meta[FREE_HEAD] < 0:
            self.reserve(1)
        pop_insert(self.bk, self.blk, self.fen, self.val, self.nxt, self.meta,
                   self.kind, self.param, x)
        if self.size() > MAX_LOAD * self.buckets:
            self.maybe_rebucket()

    def min(self) -> float | None:
        if self.meta[SIZE] == 0:
            return None
        return float(pop_peek_min(self.bk, self.blk, self.fen, self.val, self.nxt, self.meta))

    def remove_min(self) -> float:
        if self.meta[SIZE] == 0:
            raise IndexError("remove_min from an empty population")
        return float(pop_remove_min(self.bk, self.blk, self.fen, self.val, self.nxt, self.meta))

    def count_lt(self, x: float) -> int:
        return int(pop_count_below(self.bk, self.fen, self.val, self.nxt,
                                   self.kind, self.param, float(x), False))

    def count_le(self, x: float) -> int:
        return int(pop_count_below(self.bk, self.fen, self.val, self.nxt,
                                   self.kind, self.param, float(x), True))

    def multiplicity(self, x: float) -> int:
        return self.count_le(x) - self.count_lt(x)

    def count_in(self, a: float, b: float) -> int:
        """Number of stored values strictly inside (a, b)."""
        if a > b:
            raise ParameterError(f"empty interval: a={a!r} > b={b!r}")
        if a == b:
            return 0
        return max(0, self.count_lt(b) - self.count_le(a))

    def values(self) -> np.ndarray:
        """All stored values, sorted ascending."""
        out = pop_values(self.bk, self.val, self.nxt, self.meta)
        out.sort(kind="stable")
        return out

    def __iter__(self):
        return iter(self.values().tolist())

    def __repr__(self):
        return f"Population(size={self.size()}, buckets={self.buckets})"
