# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled twins of ``_pykernels``. Bitmasks must fit in 62 bits."""

import numpy as np
cimport numpy as cnp
from libc.stdlib cimport malloc, free

ctypedef unsigned long long u64

cnp.import_array()


cdef extern from *:
    int __builtin_ctzll(unsigned long long) nogil


cdef inline int _low(u64 x) nogil:
    return __builtin_ctzll(x)


cdef void _fill_cols(u64 *rows, int n1, u64 *cols, int n2) nogil:
    cdef int a, b
    cdef u64 r
    for b in range(n2):
        cols[b] = 0
    for a in range(n1):
        r = rows[a]
        while r:
            b = _low(r)
            cols[b] |= (<u64>1) << a
            r &= r - 1


cdef u64 *_load(seq, int n) except NULL:
    cdef u64 *buf = <u64 *>malloc(max(n, 1) * sizeof(u64))
    if buf == NULL:
        raise MemoryError()
    cdef int i
    for i in range(n):
        buf[i] = <u64>seq[i]
    return buf


def gbisim_kripke(succ1, succ2, rows):
    cdef int n1 = len(succ1), n2 = len(succ2)
    cdef u64 *s1 = _load(succ1, n1)
    cdef u64 *s2 = _load(succ2, n2)
    cdef u64 *r = _load(rows, n1)
    cdef u64 *cols = <u64 *>malloc(max(n2, 1) * sizeof(u64))
    cdef bint changed = True, ok
    cdef int w1, w2
    cdef u64 todo, keep, x, low
    try:
        while changed:
            changed = False
            _fill_cols(r, n1, cols, n2)
            for w1 in range(n1):
                todo = r[w1]
                keep = todo
                while todo:
                    w2 = _low(todo)
                    low = (<u64>1) << w2
                    todo &= todo - 1
                    ok = True
                    x = s1[w1]
                    while x:
                        if not (r[_low(x)] & s2[w2]):
                            ok = False
                            break
                        x &= x - 1
                    if ok:
                        x = s2[w2]
                        while x:
                            if not (cols[_low(x)] & s1[w1]):
                                ok = False
                                break
                            x &= x - 1
                    if not ok:
                        keep &= ~low
                if keep != r[w1]:
                    r[w1] = keep
                    changed = True
        return [r[w1] for w1 in range(n1)]
    finally:
        free(s1); free(s2); free(r); free(cols)


cdef inline u64 _image(u64 *rows, u64 x) nogil:
    cdef u64 out = 0
    while x:
        out |= rows[_low(x)]
        x &= x - 1
    return out


def gbisim_nbd(t1, t2, rows, int n2):
    cdef int n1 = len(rows)
    cdef long m1 = 1 << n1, m2 = 1 << n2
    cdef u64 *a = _load(t1, m1)
    cdef u64 *b = _load(t2, m2)
    cdef u64 *r = _load(rows, n1)
    cdef u64 *cols = <u64 *>malloc(max(n2, 1) * sizeof(u64))
    cdef bint changed = True
    cdef long x
    cdef u64 d, allowed
    cdef int w
    try:
        while changed:
            changed = False
            for x in range(m1):
                d = a[x]
                if not d:
                    continue
                allowed = b[_image(r, <u64>x)]
                while d:
                    w = _low(d)
                    if r[w] & ~allowed:
                        r[w] &= allowed
                        changed = True
                    d &= d - 1
            _fill_cols(r, n1, cols, n2)
            for x in range(m2):
                d = b[x]
                if not d:
                    continue
                allowed = a[_image(cols, <u64>x)]
                while d:
                    w = _low(d)
                    if cols[w] & ~allowed:
                        cols[w] &= allowed
                        changed = True
                    d &= d - 1
            _fill_cols(cols, n2, r, n1)
        return [r[w] for w in range(n1)]
    finally:
        free(a); free(b); free(r); free(cols)


def kripke_violation(succ1, succ2, rows):
    cdef int n1 = len(succ1), n2 = len(succ2)
    cdef u64 *s1 = _load(succ1, n1)
    cdef u64 *s2 = _load(succ2, n2)
    cdef u64 *r = _load(rows, n1)
    cdef u64 *cols = <u64 *>malloc(max(n2, 1) * sizeof(u64))
    cdef int kind, w1, w2, v
    cdef u64 x, target
    cdef u64 *other
    try:
        _fill_cols(r, n1, cols, n2)
        for kind in range(2):
            for w1 in range(n1):
                for w2 in range(n2):
                    if not (r[w1] >> w2) & 1:
                        continue
                    if kind == 0:
                        x = s1[w1]; other = r; target = s2[w2]
                    else:
                        x = s2[w2]; other = cols; target = s1[w1]
                    while x:
                        v = _low(x)
                        if not (other[v] & target):
                            return (kind, w1, w2, v)
                        x &= x - 1
        return None
    finally:
        free(s1); free(s2); free(r); free(cols)


def first_monotone_violation(table, u64 pmask):
    cdef cnp.ndarray[cnp.uint64_t, ndim=1] t = np.ascontiguousarray(table, dtype=np.uint64)
    cdef cnp.ndarray[cnp.uint64_t, ndim=1] meet = t.copy()
    cdef long size = t.shape[0]
    cdef long i, step
    cdef int b
    cdef u64 free_bits, s, ti
    # meet of the table over all p-supersets, one pass per p-bit
    b = 0
    step = 1
    while step < size:
        if pmask >> b & 1:
            for i in range(size):
                if not i & step:
                    meet[i] &= meet[i | step]
        b += 1
        step <<= 1
    for i in range(size):
        ti = t[i]
        if not ti & ~meet[i]:
            continue
        free_bits = pmask & ~(<u64>i)
        s = 0
        while True:
            s = ((s | ~free_bits) + 1) & free_bits
            if ti & ~t[i | s]:
                return (i, <long>(i | s))
    return None
