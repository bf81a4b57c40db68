"""Finite Kripke and neighborhood frames, models and their evaluation.

World sets are plain ``int`` bitmasks: bit ``w`` is set iff world ``w`` is a
member. A Kripke frame reads ``<>X = {w | exists v in X with w R v}``; a
neighborhood frame stores ``<>`` as a full table indexed by bitmask.

For sweeps over every valuation, valuations of an ordered list of variables
``names`` over ``n`` worlds are numbered by a binary counter whose most
significant block of ``n`` bits belongs to ``names[0]``; inside a block, bit
``w`` is world ``w``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Iterator, Mapping, Sequence, Union

import numpy as np

from .errors import FormatError, check_guard
from .formula import (And, Bot, Dia, Formula, Lit, Or, Top, dualize, variables)

NBD_GUARD = 14
_CHUNK = 1 << 18


def members(mask: int) -> list[int]:
    out = []
    w = 0
    while mask:
        if mask & 1:
            out.append(w)
        mask >>= 1
        w += 1
    return out


def mask_of(worlds: Iterable[int]) -> int:
    m = 0
    for w in worlds:
        m |= 1 << w
    return m


def full_mask(n: int) -> int:
    return (1 << n) - 1


def _mask_dtype(n: int):
    if n <= 16:
        return np.uint16
    if n <= 32:
        return np.uint32
    return np.uint64


# ---------------------------------------------------------------------------
# relations


@dataclass(frozen=True)
class Relation:
    """A relation between ``{0..left-1}`` and ``{0..right-1}``.

    ``rows[i]`` is the bitmask of right elements related to left element i.
    """

    left: int
    right: int
    rows: tuple

    def __post_init__(self):
        rows = tuple(int(r) for r in self.rows)
        if len(rows) != self.left:
            raise ValueError("row count must equal left size")
        limit = full_mask(self.right)
        for r in rows:
            if r & ~limit:
                raise ValueError("pair outside right universe")
        object.__setattr__(self, "rows", rows)

    @classmethod
    def from_pairs(cls, left: int, right: int, pairs: Iterable) -> "Relation":
        rows = [0] * left
        for a, b in pairs:
            if not (0 <= a < left and 0 <= b < right):
                raise ValueError(f"pair ({a}, {b}) outside {left}x{right}")
            rows[a] |= 1 << b
        return cls(left, right, tuple(rows))

    @classmethod
    def identity(cls, n: int) -> "Relation":
        return cls(n, n, tuple(1 << i for i in range(n)))

    @classmethod
    def empty(cls, left: int, right: int) -> "Relation":
        return cls(left, right, (0,) * left)

    @classmethod
    def full(cls, left: int, right: int) -> "Relation":
        return cls(left, right, (full_mask(right),) * left)

    @classmethod
    def from_function(cls, images: Sequence[int], right: int) -> "Relation":
        return cls(len(images), right, tuple(1 << b for b in images))

    @property
    def pairs(self) -> list[tuple[int, int]]:
        return [(a, b) for a, row in enumerate(self.rows) for b in members(row)]

    def __len__(self) -> int:
        return sum(bin(r).count("1") for r in self.rows)

    def __contains__(self, pair) -> bool:
        a, b = pair
        return 0 <= a < self.left and bool(self.rows[a] >> b & 1)

    def image(self, x: int) -> int:
        out = 0
        a = 0
        while x:
            if x & 1:
                out |= self.rows[a]
            x >>= 1
            a += 1
        return out

    def preimage(self, y: int) -> int:
        out = 0
        for a, row in enumerate(self.rows):
            if row & y:
                out |= 1 << a
        return out

    def conjugate(self, y: int) -> int:
        """``-Z^{-1}-`` applied to a right-hand set: the right adjoint of ``image``."""
        return full_mask(self.left) & ~self.preimage(full_mask(self.right) & ~y)

    @cached_property
    def columns(self) -> tuple:
        cols = [0] * self.right
        for a, row in enumerate(self.rows):
            for b in members(row):
                cols[b] |= 1 << a
        return tuple(cols)

    def inverse(self) -> "Relation":
        return Relation(self.right, self.left, self.columns)

    def compose(self, first: "Relation") -> "Relation":
        """``self . first``: pairs (a, c) with a first b and b self c."""
        if first.right != self.left:
            raise ValueError("dimension mismatch in composition")
        return Relation(first.left, self.right, tuple(self.image(r) for r in first.rows))

    def union(self, other: "Relation") -> "Relation":
        self._same_shape(other)
        return Relation(self.left, self.right,
                        tuple(a | b for a, b in zip(self.rows, other.rows)))

    def intersection(self, other: "Relation") -> "Relation":
        self._same_shape(other)
        return Relation(self.left, self.right,
                        tuple(a & b for a, b in zip(self.rows, other.rows)))

    def issubset(self, other: "Relation") -> bool:
        self._same_shape(other)
        return all(a & ~b == 0 for a, b in zip(self.rows, other.rows))

    def _same_shape(self, other: "Relation") -> None:
        if (self.left, self.right) != (other.left, other.right):
            raise ValueError("dimension mismatch")

    def domain(self) -> int:
        return mask_of(a for a, r in enumerate(self.rows) if r)

    def range(self) -> int:
        out = 0
        for r in self.rows:
            out |= r
        return out

    def is_full(self) -> bool:
        return (self.domain() == full_mask(self.left)
                and self.range() == full_mask(self.right))

    def is_functional(self) -> bool:
        return all(r & (r - 1) == 0 for r in self.rows)

    def is_total(self) -> bool:
        return all(self.rows)

    def as_function(self) -> list[int]:
        """Image list of a total functional relation."""
        if not (self.is_total() and self.is_functional()):
            raise ValueError("relation is not a total function")
        return [r.bit_length() - 1 for r in self.rows]

    def restrict(self, left_set: int, right_set: int) -> "Relation":
        return Relation(self.left, self.right, tuple(
            (r & right_set) if left_set >> a & 1 else 0 for a, r in enumerate(self.rows)))

    def to_json(self) -> dict:
        return {"left": self.left, "right": self.right, "pairs": [list(p) for p in self.pairs]}

    @classmethod
    def from_json(cls, obj: Mapping) -> "Relation":
        try:
            return cls.from_pairs(int(obj["left"]), int(obj["right"]),
                                  [tuple(p) for p in obj["pairs"]])
        except KeyError as e:
            raise FormatError(f"relation: missing field {e.args[0]!r}") from None
        except (TypeError, ValueError) as e:
            raise FormatError(f"relation.pairs: {e}") from None


def rt_closure(r: Relation) -> Relation:
    if r.left != r.right:
        raise ValueError("closure needs a relation on one set")
    rows = [row | (1 << i) for i, row in enumerate(r.rows)]
    n = r.left
    for k in range(n):
        bit = 1 << k
        rk = rows[k]
        for i in range(n):
            if rows[i] & bit:
                rows[i] |= rk
    return Relation(n, n, tuple(rows))


# ---------------------------------------------------------------------------
# frames


def _table_from_pred(pred: Sequence[int], n: int) -> np.ndarray:
    """``table[X] = union of pred[v] for v in X`` for every bitmask X."""
    dt = _mask_dtype(n)
    table = np.zeros(1 << n, dtype=dt)
    for v in range(n):
        lo = 1 << v
        table[lo:2 * lo] = table[:lo] | dt(pred[v])
    return table


@dataclass(frozen=True)
class KripkeFrame:
    size: int
    succ: tuple

    def __post_init__(self):
        succ = tuple(int(s) for s in self.succ)
        if len(succ) != self.size:
            raise ValueError("successor list length must equal frame size")
        if any(s & ~full_mask(self.size) for s in succ):
            raise ValueError("edge outside frame")
        object.__setattr__(self, "succ", succ)

    @classmethod
    def from_edges(cls, size: int, edges: Iterable) -> "KripkeFrame":
        return cls(size, Relation.from_pairs(size, size, edges).rows)

    @property
    def relation(self) -> Relation:
        return Relation(self.size, self.size, self.succ)

    @property
    def edges(self) -> list[tuple[int, int]]:
        return self.relation.pairs

    @cached_property
    def pred(self) -> tuple:
        return self.relation.columns

    def dia(self, x: int) -> int:
        out = 0
        for w, s in enumerate(self.succ):
            if s & x:
                out |= 1 << w
        return out

    def box(self, x: int) -> int:
        full = full_mask(self.size)
        return full & ~self.dia(full & ~x)

    @cached_property
    def table(self) -> np.ndarray:
        if self.size > NBD_GUARD:
            raise ValueError(f"frame with {self.size} worlds exceeds table guard {NBD_GUARD}")
        return _table_from_pred(self.pred, self.size)

    def to_json(self) -> dict:
        return {"type": "kripke", "worlds": self.size, "edges": [list(e) for e in self.edges]}


@dataclass(frozen=True)
class NbdFrame:
    size: int
    dia_table: tuple

    def __post_init__(self):
        if self.size > NBD_GUARD:
            raise ValueError(f"neighborhood frame size {self.size} exceeds guard {NBD_GUARD}")
        tbl = tuple(int(x) for x in self.dia_table)
        if len(tbl) != 1 << self.size:
            raise ValueError("dia table length must be 2^size")
        if any(x & ~full_mask(self.size) for x in tbl):
            raise ValueError("dia table entry outside frame")
        object.__setattr__(self, "dia_table", tbl)

    def dia(self, x: int) -> int:
        return self.dia_table[x]

    def box(self, x: int) -> int:
        full = full_mask(self.size)
        return full & ~self.dia_table[full & ~x]

    @cached_property
    def table(self) -> np.ndarray:
        return np.array(self.dia_table, dtype=_mask_dtype(self.size))

    def to_json(self) -> dict:
        return {"type": "nbd", "worlds": self.size, "dia": list(self.dia_table)}


Frame = Union[KripkeFrame, NbdFrame]


def frame_from_json(obj: Mapping) -> Frame:
    kind = obj.get("type")
    try:
        n = int(obj["worlds"])
        if kind == "kripke":
            return KripkeFrame.from_edges(n, [tuple(e) for e in obj["edges"]])
        if kind == "nbd":
            return NbdFrame(n, obj["dia"])
    except KeyError as e:
        raise FormatError(f"frame: missing field {e.args[0]!r}") from None
    except (TypeError, ValueError) as e:
        raise FormatError(f"frame: {e}") from None
    raise FormatError(f"frame.type: expected 'kripke' or 'nbd', got {kind!r}")


def kripke_to_nbd(f: KripkeFrame) -> NbdFrame:
    if f.size > NBD_GUARD:
        raise ValueError(f"frame with {f.size} worlds exceeds guard {NBD_GUARD}")
    return NbdFrame(f.size, f.table.tolist())


def as_nbd(f: Frame) -> NbdFrame:
    return kripke_to_nbd(f) if isinstance(f, KripkeFrame) else f


def is_monotone_frame(f: Frame) -> bool:
    if isinstance(f, KripkeFrame):
        return True
    t = f.table
    idx = np.arange(1 << f.size)
    for w in range(f.size):
        bit = 1 << w
        lo = idx[(idx & bit) == 0]
        if np.any(t[lo] & ~t[lo | bit]):
            return False
    return True


def dual_frame(f: Frame) -> NbdFrame:
    if isinstance(f, KripkeFrame):
        raise TypeError("the dual of a Kripke frame is not Kripke; convert with kripke_to_nbd")
    full = full_mask(f.size)
    return NbdFrame(f.size, [full & ~f.dia_table[full & ~x] for x in range(1 << f.size)])


def cone(f: KripkeFrame, w: int) -> int:
    return rt_closure(f.relation).rows[w]


def is_cone(f: KripkeFrame, v: int) -> bool:
    closure = rt_closure(f.relation).rows
    return any(closure[w] == v for w in members(v))


def _reindex(mask: int, keep: Sequence[int]) -> int:
    return mask_of(i for i, w in enumerate(keep) if mask >> w & 1)


# ---------------------------------------------------------------------------
# valuations and models


@dataclass(frozen=True)
class Valuation:
    """Assignment of world sets to an ordered support of variables.

    Variables outside the support read as the empty set.
    """

    support: tuple
    masks: tuple

    def __post_init__(self):
        object.__setattr__(self, "support", tuple(self.support))
        object.__setattr__(self, "masks", tuple(int(m) for m in self.masks))
        if len(self.support) != len(self.masks):
            raise ValueError("support and masks differ in length")

    @classmethod
    def of(cls, mapping: Mapping[str, object]) -> "Valuation":
        """From ``{name: bitmask or iterable of worlds}``, support sorted."""
        names = sorted(mapping)
        masks = []
        for name in names:
            v = mapping[name]
            masks.append(v if isinstance(v, int) else mask_of(v))
        return cls(tuple(names), tuple(masks))

    def __getitem__(self, name: str) -> int:
        try:
            return self.masks[self.support.index(name)]
        except ValueError:
            return 0

    def as_dict(self) -> dict[str, int]:
        return dict(zip(self.support, self.masks))

    def to_json(self) -> dict:
        return {name: members(m) for name, m in zip(self.support, self.masks)}

    @classmethod
    def from_json(cls, obj: Mapping) -> "Valuation":
        try:
            return cls.of({k: [int(w) for w in v] for k, v in obj.items()})
        except (TypeError, ValueError, AttributeError) as e:
            raise FormatError(f"valuation: {e}") from None


@dataclass(frozen=True)
class Model:
    frame: Frame
    val: Valuation

    def __post_init__(self):
        limit = full_mask(self.frame.size)
        for name, m in zip(self.val.support, self.val.masks):
            if m & ~limit:
                raise ValueError(f"valuation of {name!r} outside frame")

    def to_json(self) -> dict:
        return {"frame": self.frame.to_json(), "valuation": self.val.to_json()}

    @classmethod
    def from_json(cls, obj: Mapping) -> "Model":
        try:
            frame = frame_from_json(obj["frame"])
            val = Valuation.from_json(obj.get("valuation", {}))
        except KeyError as e:
            raise FormatError(f"model: missing field {e.args[0]!r}") from None
        try:
            return cls(frame, val)
        except ValueError as e:
            raise FormatError(f"model.valuation: {e}") from None


def restrict(x: Union[KripkeFrame, Model], v: int):
    """Induced substructure on ``v``, worlds renumbered in increasing order."""
    frame = x.frame if isinstance(x, Model) else x
    if not isinstance(frame, KripkeFrame):
        raise TypeError("restriction is defined for Kripke structures")
    keep = members(v)
    sub = KripkeFrame(len(keep), tuple(_reindex(frame.succ[w] & v, keep) for w in keep))
    if isinstance(x, Model):
        return Model(sub, Valuation(x.val.support, tuple(_reindex(m, keep) for m in x.val.masks)))
    return sub


# ---------------------------------------------------------------------------
# evaluation


def evaluate(m: Model, f: Formula) -> int:
    """Truth set of ``f`` in ``m`` as a bitmask."""
    frame = m.frame
    full = full_mask(frame.size)
    cache: dict = {}

    def go(g: Formula) -> int:
        if g in cache:
            return cache[g]
        if isinstance(g, Lit):
            x = m.val[g.var]
            r = x if g.positive else full & ~x
        elif isinstance(g, Top):
            r = full
        elif isinstance(g, Bot):
            r = 0
        elif isinstance(g, And):
            r = go(g.left) & go(g.right)
        elif isinstance(g, Or):
            r = go(g.left) | go(g.right)
        elif isinstance(g, Dia):
            r = frame.dia(go(g.child))
        else:
            r = frame.box(go(g.child))
        cache[g] = r
        return r

    return go(f)


def holds_at(m: Model, w: int, f: Formula) -> bool:
    return bool(evaluate(m, f) >> w & 1)


def sweep_size(frame: Frame, names: Sequence[str]) -> int:
    return 1 << (frame.size * len(names))


def truth_table(frame: Frame, f: Formula, names: Sequence[str],
                start: int = 0, stop: int | None = None) -> np.ndarray:
    """Truth sets of ``f`` under valuations ``start..stop-1`` of ``names``."""
    n = frame.size
    k = len(names)
    total = 1 << (n * k)
    stop = total if stop is None else stop
    dt = _mask_dtype(n)
    full = dt(full_mask(n))
    table = frame.table
    idx = np.arange(start, stop, dtype=np.uint64)
    shifts = {name: (k - 1 - i) * n for i, name in enumerate(names)}
    count = stop - start
    cache: dict = {}

    def go(g: Formula) -> np.ndarray:
        if g in cache:
            return cache[g]
        if isinstance(g, Lit):
            if g.var in shifts:
                x = ((idx >> np.uint64(shifts[g.var])) & np.uint64(full_mask(n))).astype(dt)
            else:
                x = np.zeros(count, dtype=dt)
            r = x if g.positive else x ^ full
        elif isinstance(g, Top):
            r = np.full(count, full, dtype=dt)
        elif isinstance(g, Bot):
            r = np.zeros(count, dtype=dt)
        elif isinstance(g, And):
            r = go(g.left) & go(g.right)
        elif isinstance(g, Or):
            r = go(g.left) | go(g.right)
        elif isinstance(g, Dia):
            r = table[go(g.child)]
        else:
            r = table[go(g.child) ^ full] ^ full
        cache[g] = r
        return r

    return go(f)


def operator_table(frame: Frame, f: Formula, var: str) -> np.ndarray:
    """The unary operator ``X -> truth set of f with var := X`` as a table."""
    return truth_table(frame, f, [var])


def valuation_at(index: int, names: Sequence[str], n: int) -> Valuation:
    k = len(names)
    masks = [(index >> ((k - 1 - i) * n)) & full_mask(n) for i in range(k)]
    return Valuation(tuple(names), tuple(masks))


def index_of(val: Valuation, names: Sequence[str], n: int) -> int:
    k = len(names)
    idx = 0
    for i, name in enumerate(names):
        idx |= val[name] << ((k - 1 - i) * n)
    return idx


@dataclass(frozen=True)
class Countermodel:
    valuation: Valuation
    world: int

    def to_json(self) -> dict:
        return {"valuation": self.valuation.to_json(), "world": self.world}


def frame_validity(frame: Frame, f: Formula, guard_bits: int | None = None) -> Countermodel | None:
    """First countermodel in sweep order, or ``None`` if ``f`` is valid on ``frame``."""
    names = sorted(variables(f))
    check_guard(frame.size * len(names), "validity sweep", guard_bits)
    total = sweep_size(frame, names)
    full = full_mask(frame.size)
    for start in range(0, total, _CHUNK):
        stop = min(total, start + _CHUNK)
        t = truth_table(frame, f, names, start, stop)
        bad = np.nonzero(t != full)[0]
        if bad.size:
            i = start + int(bad[0])
            miss = full & ~int(t[bad[0]])
            return Countermodel(valuation_at(i, names, frame.size), (miss & -miss).bit_length() - 1)
    return None


def is_valid(frame: Frame, f: Formula, guard_bits: int | None = None) -> bool:
    return frame_validity(frame, f, guard_bits) is None


def dual_model(m: Model) -> Model:
    return Model(dual_frame(m.frame), m.val)


def all_valuations(n: int, names: Sequence[str]) -> Iterator[Valuation]:
    for i in range(1 << (n * len(names))):
        yield valuation_at(i, names, n)


def log2(x: float) -> float:
    return math.log2(x) if x > 0 else 0.0


__all__ = [
    "Relation", "KripkeFrame", "NbdFrame", "Frame", "Valuation", "Model", "Countermodel",
    "members", "mask_of", "full_mask", "rt_closure", "kripke_to_nbd", "as_nbd",
    "is_monotone_frame", "dual_frame", "dual_model", "cone", "is_cone", "restrict",
    "evaluate", "holds_at", "truth_table", "operator_table", "frame_validity", "is_valid",
    "valuation_at", "index_of", "all_valuations", "frame_from_json", "NBD_GUARD",
    "dualize",
]
