"""Pure-Python hot loops. ``_ckernels.pyx`` mirrors these signatures exactly.

Relations are lists of row bitmasks; frames are successor bitmasks (Kripke)
or ``<>`` tables indexed by bitmask (neighborhood).
"""

from __future__ import annotations

import numpy as np


def _cols(rows, n2):
    cols = [0] * n2
    for a, r in enumerate(rows):
        b = 0
        while r:
            if r & 1:
                cols[b] |= 1 << a
            r >>= 1
            b += 1
    return cols


def gbisim_kripke(succ1, succ2, rows):
    """Largest subset of ``rows`` closed under the Kripke back-and-forth conditions."""
    n1, n2 = len(succ1), len(succ2)
    rows = list(rows)
    changed = True
    while changed:
        changed = False
        cols = _cols(rows, n2)
        for w1 in range(n1):
            s1 = succ1[w1]
            r = rows[w1]
            keep = r
            while r:
                low = r & -r
                w2 = low.bit_length() - 1
                r ^= low
                s2 = succ2[w2]
                ok = True
                x = s1
                while x:
                    lb = x & -x
                    if not rows[lb.bit_length() - 1] & s2:
                        ok = False
                        break
                    x ^= lb
                if ok:
                    y = s2
                    while y:
                        lb = y & -y
                        if not cols[lb.bit_length() - 1] & s1:
                            ok = False
                            break
                        y ^= lb
                if not ok:
                    keep &= ~low
            if keep != rows[w1]:
                rows[w1] = keep
                changed = True
    return rows


def _image(rows, x):
    out = 0
    a = 0
    while x:
        if x & 1:
            out |= rows[a]
        x >>= 1
        a += 1
    return out


def gbisim_nbd(t1, t2, rows, n2):
    """Same fixed point for neighborhood tables ``t1``, ``t2`` (monotone)."""
    n1 = len(rows)
    rows = list(rows)
    t1 = [int(v) for v in t1]
    t2 = [int(v) for v in t2]
    changed = True
    while changed:
        changed = False
        for x1 in range(1 << n1):
            d1 = t1[x1]
            if not d1:
                continue
            allowed = t2[_image(rows, x1)]
            w1 = 0
            while d1:
                if d1 & 1 and rows[w1] & ~allowed:
                    rows[w1] &= allowed
                    changed = True
                d1 >>= 1
                w1 += 1
        cols = _cols(rows, n2)
        for x2 in range(1 << n2):
            d2 = t2[x2]
            if not d2:
                continue
            allowed = t1[_image(cols, x2)]
            w2 = 0
            while d2:
                if d2 & 1 and cols[w2] & ~allowed:
                    cols[w2] &= allowed
                    changed = True
                d2 >>= 1
                w2 += 1
        rows = _cols(cols, n1)
    return rows


def kripke_violation(succ1, succ2, rows):
    """First zig then zag failure as ``(kind, w1, w2, v)``; kind 0 = zig, 1 = zag."""
    n1, n2 = len(succ1), len(succ2)
    cols = _cols(rows, n2)
    for kind in (0, 1):
        for w1 in range(n1):
            r = rows[w1]
            for w2 in range(n2):
                if not r >> w2 & 1:
                    continue
                if kind == 0:
                    x, other, target = succ1[w1], rows, succ2[w2]
                else:
                    x, other, target = succ2[w2], cols, succ1[w1]
                v = 0
                while x:
                    if x & 1 and not other[v] & target:
                        return (kind, w1, w2, v)
                    x >>= 1
                    v += 1
    return None


def first_monotone_violation(table, pmask):
    """Least ``(i, j)`` with ``j`` a superset of ``i`` on the bits of ``pmask``,
    equal elsewhere, and ``table[i] & ~table[j]`` nonzero."""
    t = np.asarray(table, dtype=np.uint64)
    size = t.shape[0]
    nbits = size.bit_length() - 1
    # meet of table over all p-supersets, by one pass per p-bit
    meet = t.copy()
    idx = np.arange(size, dtype=np.uint64)
    for b in range(nbits):
        if not pmask >> b & 1:
            continue
        lo = idx[(idx >> np.uint64(b)) & np.uint64(1) == 0]
        meet[lo] &= meet[lo | np.uint64(1 << b)]
    bad = np.nonzero(t & ~meet)[0]
    if not bad.size:
        return None
    i = int(bad[0])
    free = pmask & ~i
    ti = int(t[i])
    s = 0
    while True:
        s = ((s | ~free) + 1) & free
        j = i | s
        if ti & ~int(t[j]):
            return (i, j)
