"""Kernel selection: the compiled extension when built, else pure Python.

Set ``MODLAB_PURE=1`` to force the fallback.
"""

import os

from . import _pykernels

BACKEND = "python"
_c = None
if os.environ.get("MODLAB_PURE", "") not in ("1", "true", "yes"):
    try:
        from . import _ckernels as _c
        BACKEND = "cython"
    except ImportError:
        _c = None

_C_LIMIT = 62


def _use_c(*sizes: int) -> bool:
    return _c is not None and all(s <= _C_LIMIT for s in sizes)


def gbisim_kripke(succ1, succ2, rows):
    if _use_c(len(succ1), len(succ2)):
        return _c.gbisim_kripke(succ1, succ2, rows)
    return _pykernels.gbisim_kripke(succ1, succ2, rows)


def gbisim_nbd(t1, t2, rows, n2):
    if _use_c(len(rows), n2):
        return _c.gbisim_nbd(t1, t2, rows, n2)
    return _pykernels.gbisim_nbd(t1, t2, rows, n2)


def kripke_violation(succ1, succ2, rows):
    if _use_c(len(succ1), len(succ2)):
        return _c.kripke_violation(succ1, succ2, rows)
    return _pykernels.kripke_violation(succ1, succ2, rows)


def first_monotone_violation(table, pmask):
    if _use_c(64 if pmask >> 62 else 0):
        return _c.first_monotone_violation(table, pmask)
    return _pykernels.first_monotone_violation(table, pmask)
