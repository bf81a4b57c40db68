"""tau-bisimulations, zigzag-free decompositions, morphisms and reductions."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Optional, Union

from . import kernels
from .formula import Formula, Lit, LiteralSet
from .structures import (Frame, KripkeFrame, Model, NbdFrame, Relation,
                         Valuation, as_nbd, evaluate, full_mask, is_cone,
                         is_monotone_frame, members, restrict)


@dataclass(frozen=True)
class BisimViolation:
    """A failed condition at ``pair``.

    ``successor`` is set for Kripke conditions, ``subset`` for subset
    quantified ones and ``literal`` for lit conditions.
    """

    condition: str
    pair: Optional[tuple] = None
    successor: Optional[int] = None
    subset: Optional[int] = None
    literal: Optional[Lit] = None

    def to_json(self) -> dict:
        out = {"condition": self.condition}
        if self.pair is not None:
            out["pair"] = list(self.pair)
        if self.successor is not None:
            out["successor"] = self.successor
        if self.subset is not None:
            out["subset"] = members(self.subset)
        if self.literal is not None:
            out["literal"] = ("" if self.literal.positive else "~") + self.literal.var
        return out

    def describe(self) -> str:
        parts = [self.condition]
        if self.literal is not None:
            parts.append("literal " + ("" if self.literal.positive else "~") + self.literal.var)
        if self.pair is not None:
            parts.append(f"pair {tuple(self.pair)}")
        if self.successor is not None:
            parts.append(f"successor {self.successor}")
        if self.subset is not None:
            parts.append(f"subset {set(members(self.subset)) or '{}'}")
        return ", ".join(parts)


def _frame(x: Union[Frame, Model]) -> Frame:
    return x.frame if isinstance(x, Model) else x


def _val(x: Union[Frame, Model]) -> Valuation:
    return x.val if isinstance(x, Model) else Valuation((), ())


def _check_dims(z: Relation, f1: Frame, f2: Frame) -> None:
    if (z.left, z.right) != (f1.size, f2.size):
        raise ValueError(f"relation is {z.left}x{z.right} but frames have "
                         f"{f1.size} and {f2.size} worlds")


def _require_monotone(*frames: Frame) -> None:
    for f in frames:
        if not is_monotone_frame(f):
            raise ValueError("neighborhood frame is not monotone")


def lit_set(val: Valuation, lit: Lit, n: int) -> int:
    x = val[lit.var]
    return x if lit.positive else full_mask(n) & ~x


def _lit_violation(m1: Model, m2: Model, z: Relation, tau: LiteralSet):
    n1, n2 = m1.frame.size, m2.frame.size
    for lit in tau.literals():
        s1 = lit_set(m1.val, lit, n1)
        s2 = lit_set(m2.val, lit, n2)
        for w1 in members(s1):
            bad = z.rows[w1] & ~s2
            if bad:
                return BisimViolation("lit", (w1, (bad & -bad).bit_length() - 1), literal=lit)
    return None


def _nbd_violation(f1: NbdFrame, f2: NbdFrame, z: Relation):
    inv = z.inverse()
    for cond, a, b, rel in (("zig", f1, f2, z), ("zag", f2, f1, inv)):
        best = None
        for x in range(1 << a.size):
            allowed = b.dia(rel.image(x))
            for u in members(a.dia(x)):
                bad = rel.rows[u] & ~allowed
                if bad:
                    v = (bad & -bad).bit_length() - 1
                    pair = (u, v) if cond == "zig" else (v, u)
                    if best is None or pair < best[0]:
                        best = (pair, x)
            if best is not None:
                return BisimViolation(cond, best[0], subset=best[1])
    return None


def frame_violation(f1: Frame, f2: Frame, z: Relation) -> Optional[BisimViolation]:
    """zig/zag check between frames; Kripke pairs use the successor form."""
    _check_dims(z, f1, f2)
    if isinstance(f1, KripkeFrame) and isinstance(f2, KripkeFrame):
        hit = kernels.kripke_violation(list(f1.succ), list(f2.succ), list(z.rows))
        if hit is None:
            return None
        kind, w1, w2, v = hit
        return BisimViolation("zig_K" if kind == 0 else "zag_K", (w1, w2), successor=v)
    n1, n2 = as_nbd(f1), as_nbd(f2)
    _require_monotone(n1, n2)
    return _nbd_violation(n1, n2, z)


def check_tau_bisim(m1: Model, m2: Model, z: Relation,
                    tau: LiteralSet) -> Optional[BisimViolation]:
    """``None`` when ``z`` is a tau-bisimulation, else the first violation.

    Conditions are tried in the order lit, zig, zag.
    """
    _check_dims(z, m1.frame, m2.frame)
    hit = _lit_violation(m1, m2, z, tau)
    if hit is not None:
        return hit
    return frame_violation(m1.frame, m2.frame, z)


def is_tau_bisim(m1: Model, m2: Model, z: Relation, tau: LiteralSet) -> bool:
    return check_tau_bisim(m1, m2, z, tau) is None


def lit_consistent(m1: Model, m2: Model, tau: LiteralSet) -> Relation:
    """All pairs satisfying the lit condition: the starting point of refinement."""
    n1, n2 = m1.frame.size, m2.frame.size
    rows = [full_mask(n2)] * n1
    for lit in tau.literals():
        s1 = lit_set(m1.val, lit, n1)
        s2 = lit_set(m2.val, lit, n2)
        for w1 in members(s1):
            rows[w1] &= s2
    return Relation(n1, n2, tuple(rows))


def greatest_frame_bisim(f1: Frame, f2: Frame, start: Relation | None = None) -> Relation:
    start = Relation.full(f1.size, f2.size) if start is None else start
    _check_dims(start, f1, f2)
    if isinstance(f1, KripkeFrame) and isinstance(f2, KripkeFrame):
        rows = kernels.gbisim_kripke(list(f1.succ), list(f2.succ), list(start.rows))
    else:
        n1, n2 = as_nbd(f1), as_nbd(f2)
        _require_monotone(n1, n2)
        rows = kernels.gbisim_nbd(n1.dia_table, n2.dia_table, list(start.rows), n2.size)
    return Relation(f1.size, f2.size, tuple(rows))


def greatest_tau_bisim(m1: Model, m2: Model, tau: LiteralSet) -> Relation:
    """The union of all tau-bisimulations between ``m1`` and ``m2``."""
    return greatest_frame_bisim(m1.frame, m2.frame, lit_consistent(m1, m2, tau))


def preserves(z: Relation, m1: Model, m2: Model, f: Formula) -> Optional[tuple]:
    """``None`` if ``z`` maps truth of ``f`` into truth of ``f``, else the first bad pair."""
    return entails_under(z, m1, m2, f, f)


def entails_under(z: Relation, m1: Model, m2: Model, f: Formula,
                  g: Formula) -> Optional[tuple]:
    _check_dims(z, m1.frame, m2.frame)
    t1 = evaluate(m1, f)
    t2 = evaluate(m2, g)
    for w1 in members(t1):
        bad = z.rows[w1] & ~t2
        if bad:
            return (w1, (bad & -bad).bit_length() - 1)
    return None


# ---------------------------------------------------------------------------
# zigzag-free relations


@dataclass(frozen=True)
class ZigzagDecomposition:
    functional: Relation
    inverse_functional: Relation

    @property
    def union(self) -> Relation:
        return self.functional.union(self.inverse_functional)

    def to_json(self) -> dict:
        return {"z1": self.functional.to_json(), "z2": self.inverse_functional.to_json()}


def check_zigzag_decomposition(z: Relation, d: ZigzagDecomposition) -> bool:
    z1, z2 = d.functional, d.inverse_functional
    if (z1.left, z1.right) != (z.left, z.right) or (z2.left, z2.right) != (z.left, z.right):
        return False
    return (z1.union(z2) == z
            and z1.is_functional()
            and z2.inverse().is_functional()
            and z1.domain() & z2.domain() == 0
            and z1.range() & z2.range() == 0)


def zigzag_free_subrelation(z: Relation) -> ZigzagDecomposition:
    """A full zigzag-free subrelation of the full relation ``z``.

    Peels, in order of preference: the lowest left world with a single
    image, the lowest right world with a single preimage, the least pair.
    """
    if not z.is_full():
        raise ValueError("relation is not full")
    rows = list(z.rows)
    left, right = full_mask(z.left), full_mask(z.right)
    f1 = [0] * z.left
    f2 = [0] * z.left
    while left:
        cols = z.restrict(left, right).columns
        for w1 in members(left):
            r = rows[w1] & right
            if r & (r - 1) == 0:
                group = [v for v in members(left) if rows[v] & right == r]
                for v in group:
                    f1[v] |= r
                    left &= ~(1 << v)
                right &= ~r
                break
        else:
            for w2 in members(right):
                c = cols[w2] & left
                if c & (c - 1) == 0:
                    w1 = c.bit_length() - 1
                    group = [u for u in members(right) if cols[u] & left == c]
                    for u in group:
                        f2[w1] |= 1 << u
                        right &= ~(1 << u)
                    left &= ~c
                    break
            else:
                w1 = members(left)[0]
                r = rows[w1] & right
                low = r & -r
                f1[w1] |= low
                left &= ~(1 << w1)
                right &= ~low
    return ZigzagDecomposition(Relation(z.left, z.right, tuple(f1)),
                               Relation(z.left, z.right, tuple(f2)))


# ---------------------------------------------------------------------------
# morphisms


def check_morphism(f: Relation, src: Union[Frame, Model], dst: Union[Frame, Model],
                   pvars: Iterable[str] | None = None) -> Optional[BisimViolation]:
    """``None`` if the total function ``f`` is a morphism.

    For models the valuation conditions of a bisimulation are added: over
    all literals, or over all but the negated ``pvars`` when given.
    """
    if not (f.is_total() and f.is_functional()):
        raise ValueError("morphism must be a total function")
    f1, f2 = _frame(src), _frame(dst)
    _check_dims(f, f1, f2)
    if isinstance(src, Model) and isinstance(dst, Model):
        names = set(src.val.support) | set(dst.val.support)
        tau = (LiteralSet.all_over(names) if pvars is None
               else LiteralSet.directed(pvars, names))
        hit = _lit_violation(src, dst, f, tau)
        if hit is not None:
            return hit
    img = f.as_function()
    if isinstance(f1, KripkeFrame) and isinstance(f2, KripkeFrame):
        for w in range(f1.size):
            for v in members(f1.succ[w]):
                if not f2.succ[img[w]] >> img[v] & 1:
                    return BisimViolation("fwd", (w, img[w]), successor=v)
        for w in range(f1.size):
            reach = 0
            for v in members(f1.succ[w]):
                reach |= 1 << img[v]
            missing = f2.succ[img[w]] & ~reach
            if missing:
                return BisimViolation("bwd", (w, img[w]),
                                      successor=(missing & -missing).bit_length() - 1)
        return None
    n1, n2 = as_nbd(f1), as_nbd(f2)
    for x2 in range(1 << n2.size):
        if f.preimage(n2.dia(x2)) != n1.dia(f.preimage(x2)):
            return BisimViolation("morph", subset=x2)
    return None


def is_reduction(f: Relation, f1: KripkeFrame, v: int, f2: KripkeFrame) -> bool:
    """Whether ``f`` is an onto morphism from the cone ``v`` of ``f1`` onto ``f2``.

    ``f`` is indexed either by the worlds of ``f1`` or by the renumbered cone.
    """
    if not is_cone(f1, v):
        raise ValueError("the given world set is not a cone")
    keep = members(v)
    if f.left == f1.size and len(keep) != f1.size:
        f = Relation(len(keep), f.right, tuple(f.rows[w] for w in keep))
    if f.left != len(keep):
        raise ValueError("map does not match the cone")
    if not (f.is_total() and f.is_functional()):
        return False
    if f.range() != full_mask(f2.size):
        return False
    return check_morphism(f, restrict(f1, v), f2) is None


def zigzag_split(z: Relation) -> Optional[ZigzagDecomposition]:
    """Decompose ``z`` into functional and inverse-functional parts if possible.

    A relation splits exactly when every connected component of its pair
    graph is a star; a star centred on the right goes to the functional part.
    """
    f1 = [0] * z.left
    f2 = [0] * z.left
    cols = z.columns
    for w1 in range(z.left):
        r = z.rows[w1]
        if not r:
            continue
        if r & (r - 1) == 0:
            w2 = r.bit_length() - 1
            if cols[w2] & (cols[w2] - 1) == 0 or all(
                    z.rows[u] == r for u in members(cols[w2])):
                f1[w1] = r
                continue
        if all(cols[w2] == 1 << w1 for w2 in members(r)):
            f2[w1] = r
            continue
        return None
    return ZigzagDecomposition(Relation(z.left, z.right, tuple(f1)),
                               Relation(z.left, z.right, tuple(f2)))
