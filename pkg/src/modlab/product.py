"""Maximal bisimulation products of finite monotone neighborhood frames."""

from __future__ import annotations

import random
from dataclasses import dataclass
from typing import Mapping, Optional

import numpy as np

from .bisim import frame_violation
from .errors import GuardExceeded
from .formula import Dia, Formula, Lit, Or, is_positive, negate, variables
from .structures import (Frame, NbdFrame, Relation, as_nbd, frame_validity,
                         full_mask, is_monotone_frame, truth_table)

PRODUCT_GUARD = 12


def _spread(pred, n: int) -> np.ndarray:
    """``out[X] = OR of pred[v] for v in X``, over every bitmask X of n bits."""
    out = np.zeros(1 << n, dtype=np.int64)
    for v in range(n):
        lo = 1 << v
        out[lo:2 * lo] = out[:lo] | pred[v]
    return out


@dataclass(frozen=True)
class BisimProduct:
    """The frame ``<>_max`` on the pairs of a full bisimulation, in lexicographic order."""

    carrier: tuple
    frame: NbdFrame
    pi1: tuple
    pi2: tuple

    @property
    def size(self) -> int:
        return len(self.carrier)

    def projection(self, k: int, right: int) -> Relation:
        return Relation.from_function(self.pi1 if k == 1 else self.pi2, right)

    def to_json(self) -> dict:
        out = self.frame.to_json()
        out["carrier"] = [list(c) for c in self.carrier]
        out["pi1"] = list(self.pi1)
        out["pi2"] = list(self.pi2)
        return out


class _Maps:
    """Projection images and preimages as lookup tables."""

    def __init__(self, carrier, n1: int, n2: int):
        m = len(carrier)
        self.m = m
        self.im1 = _spread([1 << a for a, _ in carrier], m)
        self.im2 = _spread([1 << b for _, b in carrier], m)
        fib1 = [0] * n1
        fib2 = [0] * n2
        for c, (a, b) in enumerate(carrier):
            fib1[a] |= 1 << c
            fib2[b] |= 1 << c
        self.pre1 = _spread(fib1, n1)
        self.pre2 = _spread(fib2, n2)


def _table(f: NbdFrame) -> np.ndarray:
    return np.asarray(f.dia_table, dtype=np.int64)


def max_product(f1: Frame, f2: Frame, z: Relation, guard: int = PRODUCT_GUARD) -> BisimProduct:
    n1, n2 = as_nbd(f1), as_nbd(f2)
    if not (is_monotone_frame(n1) and is_monotone_frame(n2)):
        raise ValueError("factor frames must be monotone")
    if (z.left, z.right) != (n1.size, n2.size):
        raise ValueError("relation does not match the frames")
    if not z.is_full():
        raise ValueError("relation is not full")
    hit = frame_violation(n1, n2, z)
    if hit is not None:
        raise ValueError(f"relation is not a bisimulation: {hit.describe()}")
    carrier = tuple(z.pairs)
    if len(carrier) > guard:
        raise GuardExceeded(f"product carrier has {len(carrier)} pairs, guard is {guard}")
    maps = _Maps(carrier, n1.size, n2.size)
    t1, t2 = _table(n1), _table(n2)
    dia = maps.pre1[t1[maps.im1]] & maps.pre2[t2[maps.im2]]
    return BisimProduct(carrier, NbdFrame(len(carrier), dia.tolist()),
                        tuple(a for a, _ in carrier), tuple(b for _, b in carrier))


@dataclass(frozen=True)
class ProductViolation:
    kind: str  # "equation", "monotone" or "maximality"
    subset: int
    factor: Optional[int] = None

    def to_json(self) -> dict:
        out = {"kind": self.kind, "subset": self.subset}
        if self.factor is not None:
            out["factor"] = self.factor
        return out


def _equation_violation(dia: np.ndarray, maps: _Maps, t1, t2) -> Optional[ProductViolation]:
    for k, pre, t in ((1, maps.pre1, t1), (2, maps.pre2, t2)):
        bad = np.nonzero(dia[pre] != pre[t])[0]
        if bad.size:
            return ProductViolation("equation", int(bad[0]), k)
    return None


def _monotone_violation(dia: np.ndarray, m: int) -> Optional[ProductViolation]:
    idx = np.arange(1 << m)
    worst = None
    for b in range(m):
        lo = idx[(idx >> b) & 1 == 0]
        bad = np.nonzero(dia[lo] & ~dia[lo | (1 << b)])[0]
        if bad.size:
            x = int(lo[bad[0]])
            worst = x if worst is None else min(worst, x)
    return None if worst is None else ProductViolation("monotone", worst)


def monotone_closure(dia: np.ndarray, m: int) -> np.ndarray:
    out = dia.copy()
    for b in range(m):
        bit = 1 << b
        for start in range(0, 1 << m, 2 * bit):
            out[start + bit:start + 2 * bit] |= out[start:start + bit]
    return out


def least_operator(maps: _Maps, t1, t2) -> np.ndarray:
    """Union of ``pi_k^{-1} <>_k X_k`` over all ``X_k`` whose preimage lies below X."""
    out = np.zeros(1 << maps.m, dtype=np.int64)
    for pre, t in ((maps.pre1, t1), (maps.pre2, t2)):
        for xk in range(len(t)):
            out[pre[xk]] |= pre[t[xk]]
    return monotone_closure(out, maps.m)


def check_product(p: BisimProduct, f1: Frame, f2: Frame, competitors: int = 16,
                  seed: int = 0) -> Optional[ProductViolation]:
    """Exhaustive morphism equations and monotonicity, then maximality against
    ``competitors`` sampled monotone operators that satisfy the equations."""
    n1, n2 = as_nbd(f1), as_nbd(f2)
    maps = _Maps(p.carrier, n1.size, n2.size)
    t1, t2 = _table(n1), _table(n2)
    dia = _table(p.frame)
    hit = _equation_violation(dia, maps, t1, t2)
    if hit is not None:
        return hit
    hit = _monotone_violation(dia, maps.m)
    if hit is not None:
        return hit
    rng = random.Random(seed)
    pool = [least_operator(maps, t1, t2)]
    full = full_mask(maps.m)
    for _ in range(competitors):
        cand = pool[0].copy() if rng.random() < 0.5 else dia.copy()
        for _ in range(rng.randint(1, 3)):
            cand[rng.randrange(1 << maps.m)] |= rng.getrandbits(maps.m) & full
        pool.append(monotone_closure(cand, maps.m))
    for cand in pool:
        if _equation_violation(cand, maps, t1, t2) is not None:
            continue
        bad = np.nonzero(cand & ~dia)[0]
        if bad.size:
            return ProductViolation("maximality", int(bad[0]))
    return None


def _alpha_var(alpha: Formula) -> str:
    vs = sorted(variables(alpha))
    if len(vs) > 1:
        raise ValueError("alpha must have at most one variable")
    if not is_positive(alpha):
        raise ValueError("alpha must be positive")
    return vs[0] if vs else "p"


def positive_bound_check(p: BisimProduct, f1: Frame, f2: Frame,
                         alpha: Formula) -> Optional[int]:
    """First X with ``alpha X`` outside ``pi_1^{-1} alpha_1 pi_1 X & pi_2^{-1} alpha_2 pi_2 X``."""
    var = _alpha_var(alpha)
    n1, n2 = as_nbd(f1), as_nbd(f2)
    maps = _Maps(p.carrier, n1.size, n2.size)
    op = truth_table(p.frame, alpha, [var]).astype(np.int64)
    op1 = truth_table(n1, alpha, [var]).astype(np.int64)
    op2 = truth_table(n2, alpha, [var]).astype(np.int64)
    bound = maps.pre1[op1[maps.im1]] & maps.pre2[op2[maps.im2]]
    bad = np.nonzero(op & ~bound)[0]
    return int(bad[0]) if bad.size else None


def axiom_shape(f: Formula) -> Optional[str]:
    """``None`` if ``f`` is closed or reads ``alpha(p) -> <>p`` with alpha
    positive; otherwise the reason it is not supported."""
    vs = variables(f)
    if not vs:
        return None
    if isinstance(f, Or) and isinstance(f.right, Dia) and isinstance(f.right.child, Lit):
        lit = f.right.child
        alpha = negate(f.left)
        if lit.positive and variables(alpha) <= {lit.var} and is_positive(alpha):
            return None
    return "neither closed nor of the form alpha(p) -> <>p with alpha positive"


@dataclass(frozen=True)
class AxiomReport:
    name: str
    status: str  # "preserved", "violated", "not-valid-on-factor" or "rejected"
    detail: str = ""

    def to_json(self) -> dict:
        return {"name": self.name, "status": self.status, "detail": self.detail}


def preservation_suite(f1: Frame, f2: Frame, z: Relation,
                       axiom_list: Mapping[str, Formula],
                       product: Optional[BisimProduct] = None) -> list[AxiomReport]:
    p = product if product is not None else max_product(f1, f2, z)
    out = []
    for name, ax in axiom_list.items():
        why = axiom_shape(ax)
        if why is not None:
            out.append(AxiomReport(name, "rejected", why))
            continue
        if frame_validity(f1, ax) is not None or frame_validity(f2, ax) is not None:
            out.append(AxiomReport(name, "not-valid-on-factor"))
            continue
        cm = frame_validity(p.frame, ax)
        if cm is None:
            out.append(AxiomReport(name, "preserved"))
        else:
            out.append(AxiomReport(name, "violated",
                                   f"valuation {cm.valuation.to_json()} at world {cm.world}"))
    return out
