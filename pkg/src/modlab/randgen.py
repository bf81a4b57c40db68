"""Seeded generators of random frames, models, relations and formulas."""

from __future__ import annotations

import random
from typing import Sequence

import numpy as np

from .formula import (BOT, TOP, And, Box, Dia, Formula, LiteralSet, Or)
from .structures import (KripkeFrame, Model, NbdFrame, Relation, Valuation)


def kripke_frame(rng: random.Random, n: int, density: float = 0.4) -> KripkeFrame:
    succ = []
    for _ in range(n):
        row = 0
        for v in range(n):
            if rng.random() < density:
                row |= 1 << v
        succ.append(row)
    return KripkeFrame(n, tuple(succ))


def valuation(rng: random.Random, n: int, names: Sequence[str]) -> Valuation:
    return Valuation(tuple(names), tuple(rng.getrandbits(n) if n else 0 for _ in names))


def model(rng: random.Random, frame, names: Sequence[str]) -> Model:
    return Model(frame, valuation(rng, frame.size, names))


def relation(rng: random.Random, left: int, right: int, density: float = 0.4) -> Relation:
    rows = []
    for _ in range(left):
        row = 0
        for b in range(right):
            if rng.random() < density:
                row |= 1 << b
        rows.append(row)
    return Relation(left, right, tuple(rows))


def full_relation(rng: random.Random, left: int, right: int,
                  density: float = 0.4) -> Relation:
    """Random relation whose domain and range are everything."""
    z = relation(rng, left, right, density)
    rows = list(z.rows)
    for a in range(left):
        if not rows[a]:
            rows[a] = 1 << rng.randrange(right)
    covered = 0
    for r in rows:
        covered |= r
    for b in range(right):
        if not covered >> b & 1:
            rows[rng.randrange(left)] |= 1 << b
    return Relation(left, right, tuple(rows))


def _superset_or(t: np.ndarray, n: int) -> np.ndarray:
    out = t.copy()
    for b in range(n):
        bit = 1 << b
        for start in range(0, 1 << n, 2 * bit):
            out[start + bit:start + 2 * bit] |= out[start:start + bit]
    return out


def monotone_frame(rng: random.Random, n: int, generators: int | None = None,
                   reflexive: bool = False, transitive: bool = False,
                   serial: bool = False) -> NbdFrame:
    """Upward closure of a few random assignments ``X -> <>X``."""
    size = 1 << n
    t = np.zeros(size, dtype=np.int64)
    for _ in range(rng.randint(1, size) if generators is None else generators):
        t[rng.randrange(size)] |= rng.getrandbits(n) if n else 0
    if reflexive:
        t |= np.arange(size)
    if serial:
        t[size - 1] = size - 1
    t = _superset_or(t, n)
    if transitive:
        while True:
            nxt = t | t[t]
            if np.array_equal(nxt, t):
                break
            t = nxt
    return NbdFrame(n, t.tolist())


def preimage_frame(rng: random.Random, base: NbdFrame, n: int) -> tuple[NbdFrame, list[int]]:
    """A frame on ``n`` worlds with a random onto morphism to ``base``."""
    m = base.size
    images = list(range(m)) + [rng.randrange(m) for _ in range(n - m)]
    rng.shuffle(images)
    fib = [0] * m
    for w, b in enumerate(images):
        fib[b] |= 1 << w
    table = []
    for x in range(1 << n):
        img = 0
        for w in range(n):
            if x >> w & 1:
                img |= 1 << images[w]
        d = base.dia_table[img]
        pre = 0
        for b in range(m):
            if d >> b & 1:
                pre |= fib[b]
        table.append(pre)
    return NbdFrame(n, table), images


def formula(rng: random.Random, vocab: LiteralSet, depth: int, size: int = 6,
            constants: bool = True) -> Formula:
    """Random formula over ``vocab`` with modal depth at most ``depth``."""
    atoms: list[Formula] = list(vocab.literals())
    if constants or not atoms:
        atoms += [BOT, TOP]

    def go(budget: int, d: int) -> Formula:
        if budget <= 1:
            return rng.choice(atoms)
        choice = rng.random()
        if d > 0 and choice < 0.4:
            return (Dia if rng.random() < 0.5 else Box)(go(budget - 1, d - 1))
        if choice < 0.85:
            split = rng.randint(1, budget - 2) if budget > 2 else 1
            ctor = And if rng.random() < 0.5 else Or
            return ctor(go(split, d), go(max(1, budget - 1 - split), d))
        return rng.choice(atoms)

    return go(rng.randint(1, size), depth)
