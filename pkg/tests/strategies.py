"""Hypothesis strategies for frames, models, relations and formulas."""

from hypothesis import strategies as st

from modlab.formula import BOT, TOP, And, Box, Dia, Lit, Or
from modlab.structures import KripkeFrame, Model, NbdFrame, Relation, Valuation


def formulas(names=("p", "q"), max_leaves=8, constants=True):
    atoms = [Lit(n, s) for n in names for s in (True, False)]
    if constants:
        atoms += [BOT, TOP]
    return st.recursive(
        st.sampled_from(atoms),
        lambda kids: st.one_of(
            st.builds(Dia, kids), st.builds(Box, kids),
            st.builds(And, kids, kids), st.builds(Or, kids, kids)),
        max_leaves=max_leaves)


def positive_formulas(names=("p",), max_leaves=8):
    atoms = [Lit(n) for n in names] + [BOT, TOP]
    return st.recursive(
        st.sampled_from(atoms),
        lambda kids: st.one_of(
            st.builds(Dia, kids), st.builds(Box, kids),
            st.builds(And, kids, kids), st.builds(Or, kids, kids)),
        max_leaves=max_leaves)


@st.composite
def kripke_frames(draw, min_size=1, max_size=4):
    n = draw(st.integers(min_size, max_size))
    succ = draw(st.lists(st.integers(0, (1 << n) - 1), min_size=n, max_size=n))
    return KripkeFrame(n, tuple(succ))


@st.composite
def nbd_frames(draw, min_size=1, max_size=3, monotone=False):
    n = draw(st.integers(min_size, max_size))
    table = draw(st.lists(st.integers(0, (1 << n) - 1), min_size=1 << n, max_size=1 << n))
    if monotone:
        for x in range(1 << n):
            sub = x
            while sub:
                sub = (sub - 1) & x
                table[x] |= table[sub]
    return NbdFrame(n, tuple(table))


def frames(max_size=3, monotone=False):
    return st.one_of(kripke_frames(max_size=max_size),
                     nbd_frames(max_size=max_size, monotone=monotone))


@st.composite
def models(draw, frame_strategy=None, names=("p", "q")):
    frame = draw(frame_strategy if frame_strategy is not None else frames())
    masks = draw(st.lists(st.integers(0, (1 << frame.size) - 1),
                          min_size=len(names), max_size=len(names)))
    return Model(frame, Valuation(tuple(names), tuple(masks)))


@st.composite
def relations(draw, max_left=4, max_right=4):
    a = draw(st.integers(1, max_left))
    b = draw(st.integers(1, max_right))
    rows = draw(st.lists(st.integers(0, (1 << b) - 1), min_size=a, max_size=a))
    return Relation(a, b, tuple(rows))


@st.composite
def full_relations(draw, max_side=6):
    z = draw(relations(max_side, max_side))
    rows = list(z.rows)
    for a in range(z.left):
        if not rows[a]:
            rows[a] = 1 << draw(st.integers(0, z.right - 1))
    covered = 0
    for r in rows:
        covered |= r
    for b in range(z.right):
        if not covered >> b & 1:
            rows[draw(st.integers(0, z.left - 1))] |= 1 << b
    return Relation(z.left, z.right, tuple(rows))
