"""Character-level edit distance and nearest-message retrieval.

``levenshtein`` is the plain two-row DP with unit insert/delete/substitute
costs. :class:`NearestMessageIndex` answers "which stored message is closest
to this query" exactly, with three speedups that never change the answer:

* candidates are scanned outward from the query's length, and the scan stops
  once the length difference alone reaches the best distance found (length
  difference lower-bounds edit distance),
* each candidate runs a banded DP that gives up as soon as every entry in
  the band reaches the current best, and
* the inner loop is numba-compiled when numba is importable (a pure-Python
  twin of the same routine is used otherwise, and in tests).

Ties are broken toward the lowest stored index regardless of scan order.
"""

from __future__ import annotations

import numpy as np

try:
    from numba import njit

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba is a default dependency
    HAVE_NUMBA = False

    def njit(*args, **kwargs):
        def wrap(fn):
            return fn

        return wrap if not (args and callable(args[0])) else args[0]


def levenshtein(a: str, b: str) -> int:
    """Edit distance over raw characters."""
    if a == b:
        return 0
    if len(a) < len(b):
        a, b = b, a
    if not b:
        return len(a)
    previous = list(range(len(b) + 1))
    for i, ca in enumerate(a, 1):
        current = [i]
        for j, cb in enumerate(b, 1):
            current.append(
                min(previous[j] + 1, current[j - 1] + 1, previous[j - 1] + (ca != cb))
            )
        previous = current
    return previous[-1]


def _encode(text: str) -> np.ndarray:
    return np.frombuffer(text.encode("utf-32-le"), dtype=np.uint32).astype(np.int64)


@njit(cache=True)
def _banded_distance(q, c, cap):  # pragma: no cover - exercised via wrapper
    """Edit distance between q and c, or ``cap`` if it is >= cap."""
    n = len(q)
    m = len(c)
    if n - m >= cap or m - n >= cap:
        return cap
    prev = np.empty(m + 1, dtype=np.int64)
    cur = np.empty(m + 1, dtype=np.int64)
    for j in range(m + 1):
        prev[j] = j
    for i in range(1, n + 1):
        cur[0] = i
        lo = i - cap + 1
        if lo < 1:
            lo = 1
        hi = i + cap - 1
        if hi > m:
            hi = m
        if lo > 1:
            cur[lo - 1] = cap
        row_min = i if i < cap else cap  # column 0 is part of the row
        for j in range(lo, hi + 1):
            cost = 0 if q[i - 1] == c[j - 1] else 1
            v = prev[j - 1] + cost
            if prev[j] + 1 < v:
                v = prev[j] + 1
            if cur[j - 1] + 1 < v:
                v = cur[j - 1] + 1
            if v > cap:
                v = cap
            cur[j] = v
            if v < row_min:
                row_min = v
        if hi < m:
            cur[hi + 1] = cap
        if row_min >= cap:
            return cap
        prev, cur = cur, prev
    d = prev[m]
    return d if d < cap else cap


def _banded_distance_py(q, c, cap):
    """Pure-Python twin of :func:`_banded_distance`."""
    n, m = len(q), len(c)
    if abs(n - m) >= cap:
        return cap
    prev = list(range(m + 1))
    cur = [0] * (m + 1)
    for i in range(1, n + 1):
        cur[0] = i
        lo = max(1, i - cap + 1)
        hi = min(m, i + cap - 1)
        if lo > 1:
            cur[lo - 1] = cap
        row_min = min(i, cap)  # column 0 is part of the row
        for j in range(lo, hi + 1):
            cost = 0 if q[i - 1] == c[j - 1] else 1
            v = min(prev[j - 1] + cost, prev[j] + 1, cur[j - 1] + 1, cap)
            cur[j] = v
            if v < row_min:
                row_min = v
        if hi < m:
            cur[hi + 1] = cap
        if row_min >= cap:
            return cap
        prev, cur = cur, prev
    return min(prev[m], cap)


@njit(cache=True)
def _scan(q, flat, starts, lengths, by_len):  # pragma: no cover - via wrapper
    n_candidates = len(by_len)
    qlen = len(q)
    # locate the first candidate whose length >= qlen
    lo, hi = 0, n_candidates
    while lo < hi:
        mid = (lo + hi) // 2
        if lengths[by_len[mid]] < qlen:
            lo = mid + 1
        else:
            hi = mid
    up = lo
    down = lo - 1
    best = np.int64(1 << 60)
    best_idx = np.int64(-1)
    while True:
        pick_up = -1
        if up < n_candidates and down >= 0:
            du = lengths[by_len[up]] - qlen
            dd = qlen - lengths[by_len[down]]
            pick_up = 1 if du <= dd else 0
        elif up < n_candidates:
            pick_up = 1
        elif down >= 0:
            pick_up = 0
        else:
            break
        if pick_up == 1:
            idx = by_len[up]
            gap = lengths[idx] - qlen
            up += 1
        else:
            idx = by_len[down]
            gap = qlen - lengths[idx]
            down -= 1
        # strict inequality: a gap == best candidate can still tie the best
        # distance and win on a lower index, so it must be evaluated
        if gap > best and best_idx >= 0:
            if pick_up == 1:
                up = n_candidates  # gaps only grow outward on this side
            else:
                down = -1
            if up >= n_candidates and down < 0:
                break
            continue
        cap = best if best < (1 << 60) else np.int64(max(qlen, np.max(lengths)) + 1)
        c = flat[starts[idx] : starts[idx] + lengths[idx]]
        d = _banded_distance(q, c, cap + 1)
        if d < best or (d == best and idx < best_idx):
            best = d
            best_idx = idx
    return best_idx, best


class NearestMessageIndex:
    """Exact nearest-neighbor lookup over a fixed list of messages."""

    def __init__(self, messages: list[str], use_numba: bool = HAVE_NUMBA):
        if not messages:
            raise ValueError("empty message index")
        self.messages = list(messages)
        self._use_numba = use_numba and HAVE_NUMBA
        encoded = [_encode(m) for m in self.messages]
        self._lengths = np.array([len(e) for e in encoded], dtype=np.int64)
        self._starts = np.zeros(len(encoded), dtype=np.int64)
        np.cumsum(self._lengths[:-1], out=self._starts[1:])
        self._flat = (
            np.concatenate(encoded) if any(len(e) for e in encoded)
            else np.empty(0, dtype=np.int64)
        )
        self._by_len = np.argsort(self._lengths, kind="stable").astype(np.int64)

    def __len__(self) -> int:
        return len(self.messages)

    def nearest(self, query: str) -> tuple[int, int]:
        """Return (index, distance) of the closest message; lowest index wins ties."""
        q = _encode(query)
        if self._use_numba:
            idx, dist = _scan(q, self._flat, self._starts, self._lengths, self._by_len)
            return int(idx), int(dist)
        return self._nearest_py(q)

    def _nearest_py(self, q: np.ndarray) -> tuple[int, int]:
        qlen = len(q)
        order = sorted(range(len(self.messages)),
                       key=lambda i: (abs(int(self._lengths[i]) - qlen), i))
        best = 1 << 60
        best_idx = -1
        for idx in order:
            gap = abs(int(self._lengths[idx]) - qlen)
            if gap > best and best_idx >= 0:
                break  # sorted by gap: nothing closer remains
            c = self._flat[self._starts[idx] : self._starts[idx] + self._lengths[idx]]
            cap = best if best_idx >= 0 else max(qlen, int(self._lengths.max())) + 1
            d = _banded_distance_py(q, c, cap + 1)
            if d < best or (d == best and idx < best_idx):
                best, best_idx = d, idx
        return best_idx, int(best)
