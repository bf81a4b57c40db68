"""Modal formulas in negation normal form.

Formulas are immutable trees built from literals, the constants ``false`` and
``true``, binary ``&``/``|`` and the unary modalities ``<>`` and ``[]``.
Negation and implication only exist in the surface syntax: :func:`parse`
pushes them down to the literals.

Surface grammar (loosest binding first)::

    imp  := or ('->' imp)?
    or   := and ('|' and)*
    and  := un ('&' un)*
    un   := '~' un | '<>' un | '[]' un | atom
    atom := 'true' | 'false' | VAR | '(' imp ')'
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from functools import reduce
from typing import Iterable, Iterator, Mapping, Union

__all__ = [
    "Bot", "Top", "Lit", "And", "Or", "Dia", "Box", "Formula", "BOT", "TOP",
    "LiteralSet", "ParseError", "NameClash", "NnfSplit",
    "parse", "to_text", "negate", "dualize", "substitute", "implies", "iff",
    "conj", "disj", "lits", "variables", "modal_depth", "is_positive", "size",
    "nnf_split", "graded", "lyndon_premise", "param_elim_lift", "craig_lift",
    "enumerate_formulas", "axioms",
]

VAR_RE = re.compile(r"[a-zA-Z_][a-zA-Z0-9_']*")


@dataclass(frozen=True, slots=True)
class Bot:
    def __str__(self) -> str:
        return to_text(self)


@dataclass(frozen=True, slots=True)
class Top:
    def __str__(self) -> str:
        return to_text(self)


@dataclass(frozen=True, slots=True)
class Lit:
    var: str
    positive: bool = True

    def __str__(self) -> str:
        return to_text(self)


@dataclass(frozen=True, slots=True)
class And:
    left: "Formula"
    right: "Formula"

    def __str__(self) -> str:
        return to_text(self)


@dataclass(frozen=True, slots=True)
class Or:
    left: "Formula"
    right: "Formula"

    def __str__(self) -> str:
        return to_text(self)


@dataclass(frozen=True, slots=True)
class Dia:
    child: "Formula"

    def __str__(self) -> str:
        return to_text(self)


@dataclass(frozen=True, slots=True)
class Box:
    child: "Formula"

    def __str__(self) -> str:
        return to_text(self)


Formula = Union[Bot, Top, Lit, And, Or, Dia, Box]
BOT = Bot()
TOP = Top()


class ParseError(ValueError):
    """Malformed formula text; ``pos`` is the 0-based character offset."""

    def __init__(self, message: str, pos: int):
        super().__init__(f"{message} at position {pos}")
        self.pos = pos


class NameClash(ValueError):
    """A generated fresh variable name already occurs in the input."""


# ---------------------------------------------------------------------------
# literal sets


@dataclass(frozen=True)
class LiteralSet:
    """A finite set of literals: ``pos`` holds p for each p in the set,
    ``neg`` holds p for each ~p in the set."""

    pos: frozenset = frozenset()
    neg: frozenset = frozenset()

    def __post_init__(self):
        object.__setattr__(self, "pos", frozenset(self.pos))
        object.__setattr__(self, "neg", frozenset(self.neg))

    @classmethod
    def all_over(cls, names: Iterable[str]) -> "LiteralSet":
        names = frozenset(names)
        return cls(names, names)

    @classmethod
    def directed(cls, pvars: Iterable[str], names: Iterable[str]) -> "LiteralSet":
        """All literals over ``names`` except the negations of ``pvars``."""
        names = frozenset(names)
        return cls(names, names - frozenset(pvars))

    def negated(self) -> "LiteralSet":
        return LiteralSet(self.neg, self.pos)

    def pm(self) -> "LiteralSet":
        both = self.pos | self.neg
        return LiteralSet(both, both)

    def union(self, other: "LiteralSet") -> "LiteralSet":
        return LiteralSet(self.pos | other.pos, self.neg | other.neg)

    def intersection(self, other: "LiteralSet") -> "LiteralSet":
        return LiteralSet(self.pos & other.pos, self.neg & other.neg)

    def issubset(self, other: "LiteralSet") -> bool:
        return self.pos <= other.pos and self.neg <= other.neg

    def __contains__(self, lit) -> bool:
        if isinstance(lit, Lit):
            return lit.var in (self.pos if lit.positive else self.neg)
        var, positive = lit
        return var in (self.pos if positive else self.neg)

    def literals(self) -> list[Lit]:
        """Sorted by variable name, positive before negative."""
        names = sorted(self.pos | self.neg)
        out = []
        for name in names:
            if name in self.pos:
                out.append(Lit(name, True))
            if name in self.neg:
                out.append(Lit(name, False))
        return out

    def variables(self) -> frozenset:
        return self.pos | self.neg

    def __len__(self) -> int:
        return len(self.pos) + len(self.neg)

    def to_json(self) -> dict:
        return {"pos": sorted(self.pos), "neg": sorted(self.neg)}

    @classmethod
    def from_json(cls, obj: Mapping) -> "LiteralSet":
        return cls(obj.get("pos", ()), obj.get("neg", ()))


# ---------------------------------------------------------------------------
# parsing and printing

_TOKEN_RE = re.compile(
    r"\s*(?:(?P<op>->|<>|\[\]|[~&|()])|(?P<name>[a-zA-Z_][a-zA-Z0-9_']*))"
)


def _tokenize(text: str) -> list[tuple[str, str, int]]:
    tokens = []
    pos = 0
    while True:
        while pos < len(text) and text[pos].isspace():
            pos += 1
        if pos >= len(text):
            break
        m = _TOKEN_RE.match(text, pos)
        if m is None or m.end() == pos:
            raise ParseError(f"unknown token {text[pos]!r}", pos)
        start = m.start("op") if m.group("op") else m.start("name")
        if m.group("op"):
            tokens.append(("op", m.group("op"), start))
        else:
            tokens.append(("name", m.group("name"), start))
        pos = m.end()
    tokens.append(("end", "", len(text)))
    return tokens


class _Parser:
    def __init__(self, text: str):
        self.tokens = _tokenize(text)
        self.i = 0

    def peek(self):
        return self.tokens[self.i]

    def take(self, value: str | None = None):
        tok = self.tokens[self.i]
        if value is not None and tok[1] != value:
            found = tok[1] or "end of input"
            raise ParseError(f"expected {value!r}, found {found!r}", tok[2])
        self.i += 1
        return tok

    def imp(self) -> Formula:
        left = self.disj()
        if self.peek()[1] == "->":
            self.take()
            return Or(negate(left), self.imp())
        return left

    def disj(self) -> Formula:
        f = self.conj()
        while self.peek()[1] == "|":
            self.take()
            f = Or(f, self.conj())
        return f

    def conj(self) -> Formula:
        f = self.unary()
        while self.peek()[1] == "&":
            self.take()
            f = And(f, self.unary())
        return f

    def unary(self) -> Formula:
        kind, val, pos = self.peek()
        if val == "~":
            self.take()
            return negate(self.unary())
        if val == "<>":
            self.take()
            return Dia(self.unary())
        if val == "[]":
            self.take()
            return Box(self.unary())
        return self.atom()

    def atom(self) -> Formula:
        kind, val, pos = self.take()
        if kind == "name":
            if val == "true":
                return TOP
            if val == "false":
                return BOT
            return Lit(val, True)
        if val == "(":
            f = self.imp()
            self.take(")")
            return f
        raise ParseError(f"unexpected {val or 'end of input'!r}", pos)


def parse(text: str) -> Formula:
    """Parse surface syntax into an NNF formula.

    >>> parse("~<>p")
    Box(child=Lit(var='p', positive=False))
    """
    p = _Parser(text)
    f = p.imp()
    kind, val, pos = p.peek()
    if kind != "end":
        raise ParseError(f"unexpected {val!r}", pos)
    return f


def to_text(f: Formula) -> str:
    """Canonical text: every binary node is wrapped in parentheses."""
    if isinstance(f, Bot):
        return "false"
    if isinstance(f, Top):
        return "true"
    if isinstance(f, Lit):
        return f.var if f.positive else "~" + f.var
    if isinstance(f, Dia):
        return "<>" + to_text(f.child)
    if isinstance(f, Box):
        return "[]" + to_text(f.child)
    op = " & " if isinstance(f, And) else " | "
    return "(" + to_text(f.left) + op + to_text(f.right) + ")"


# ---------------------------------------------------------------------------
# structural operations


def negate(f: Formula) -> Formula:
    if isinstance(f, Lit):
        return Lit(f.var, not f.positive)
    if isinstance(f, Bot):
        return TOP
    if isinstance(f, Top):
        return BOT
    if isinstance(f, And):
        return Or(negate(f.left), negate(f.right))
    if isinstance(f, Or):
        return And(negate(f.left), negate(f.right))
    if isinstance(f, Dia):
        return Box(negate(f.child))
    return Dia(negate(f.child))


def dualize(f: Formula) -> Formula:
    """Swap every ``<>`` with ``[]``; literals are untouched."""
    if isinstance(f, (Lit, Bot, Top)):
        return f
    if isinstance(f, And):
        return And(dualize(f.left), dualize(f.right))
    if isinstance(f, Or):
        return Or(dualize(f.left), dualize(f.right))
    if isinstance(f, Dia):
        return Box(dualize(f.child))
    return Dia(dualize(f.child))


def implies(a: Formula, b: Formula) -> Formula:
    return Or(negate(a), b)


def iff(a: Formula, b: Formula) -> Formula:
    return And(implies(a, b), implies(b, a))


def conj(items: Iterable[Formula]) -> Formula:
    """Left-nested conjunction; the empty conjunction is ``true``."""
    items = list(items)
    return reduce(And, items) if items else TOP


def disj(items: Iterable[Formula]) -> Formula:
    items = list(items)
    return reduce(Or, items) if items else BOT


def substitute(f: Formula, mapping: Mapping[str, Formula]) -> Formula:
    """Simultaneous substitution; a negative literal receives the negated image."""
    if isinstance(f, Lit):
        if f.var not in mapping:
            return f
        image = mapping[f.var]
        return image if f.positive else negate(image)
    if isinstance(f, (Bot, Top)):
        return f
    if isinstance(f, And):
        return And(substitute(f.left, mapping), substitute(f.right, mapping))
    if isinstance(f, Or):
        return Or(substitute(f.left, mapping), substitute(f.right, mapping))
    if isinstance(f, Dia):
        return Dia(substitute(f.child, mapping))
    return Box(substitute(f.child, mapping))


def _walk(f: Formula) -> Iterator[Formula]:
    stack = [f]
    while stack:
        g = stack.pop()
        yield g
        if isinstance(g, (And, Or)):
            stack.append(g.right)
            stack.append(g.left)
        elif isinstance(g, (Dia, Box)):
            stack.append(g.child)


def lits(f: Formula) -> LiteralSet:
    pos, neg = set(), set()
    for g in _walk(f):
        if isinstance(g, Lit):
            (pos if g.positive else neg).add(g.var)
    return LiteralSet(pos, neg)


def variables(f: Formula) -> frozenset:
    return frozenset(g.var for g in _walk(f) if isinstance(g, Lit))


def size(f: Formula) -> int:
    return sum(1 for _ in _walk(f))


def modal_depth(f: Formula) -> int:
    if isinstance(f, (And, Or)):
        return max(modal_depth(f.left), modal_depth(f.right))
    if isinstance(f, (Dia, Box)):
        return 1 + modal_depth(f.child)
    return 0


def is_positive(f: Formula, pvars: Iterable[str] | None = None) -> bool:
    """No negative literal over ``pvars`` (all variables when omitted)."""
    neg = lits(f).neg
    if pvars is None:
        return not neg
    return not (neg & frozenset(pvars))


# ---------------------------------------------------------------------------
# constructions


@dataclass(frozen=True)
class NnfSplit:
    """``template`` is positive over slots; slot ``names[i]`` stands for
    ``pos_vars[i]`` for i < len(pos_vars), otherwise for the negation of
    ``neg_vars[i - len(pos_vars)]``."""

    template: Formula
    names: tuple
    pos_vars: tuple
    neg_vars: tuple

    def assignment(self) -> dict:
        out = {}
        for i, name in enumerate(self.names):
            if i < len(self.pos_vars):
                out[name] = Lit(self.pos_vars[i], True)
            else:
                out[name] = Lit(self.neg_vars[i - len(self.pos_vars)], False)
        return out

    def restore(self) -> Formula:
        return substitute(self.template, self.assignment())


def nnf_split(f: Formula, prefix: str = "r") -> NnfSplit:
    ls = lits(f)
    pos_vars = tuple(sorted(ls.pos))
    neg_vars = tuple(sorted(ls.neg))
    names = tuple(f"{prefix}{i}" for i in range(len(pos_vars) + len(neg_vars)))
    slot = {}
    for i, v in enumerate(pos_vars):
        slot[(v, True)] = names[i]
    for j, v in enumerate(neg_vars):
        slot[(v, False)] = names[len(pos_vars) + j]

    def go(g: Formula) -> Formula:
        if isinstance(g, Lit):
            return Lit(slot[(g.var, g.positive)], True)
        if isinstance(g, (Bot, Top)):
            return g
        if isinstance(g, And):
            return And(go(g.left), go(g.right))
        if isinstance(g, Or):
            return Or(go(g.left), go(g.right))
        if isinstance(g, Dia):
            return Dia(go(g.child))
        return Box(go(g.child))

    return NnfSplit(go(f), names, pos_vars, neg_vars)


def graded(kind: str, n: int, f: Formula) -> Formula:
    """``<>^{<=n} f`` (kind ``"dia"``) or ``[]^{<=n} f`` (kind ``"box"``)."""
    if n < 0:
        raise ValueError("grade must be non-negative")
    if kind in ("dia", "<>"):
        wrap, join = Dia, Or
    elif kind in ("box", "[]"):
        wrap, join = Box, And
    else:
        raise ValueError(f"unknown modality {kind!r}")
    terms = [f]
    for _ in range(n):
        terms.append(wrap(terms[-1]))
    return reduce(join, terms)


def _fresh(names: Iterable[str], suffix: str, taken: frozenset) -> dict:
    out = {}
    for name in names:
        new = name + suffix
        if new in taken:
            raise NameClash(f"fresh name {new!r} already occurs")
        out[name] = new
    return out


def lyndon_premise(f: Formula, pvars: Iterable[str], suffix: str = "_q") -> Formula:
    """``/\\_i []^{<=d}(~q_i | p_i) & f(q)`` with d the modal depth of ``f``."""
    pvars = list(pvars)
    fresh = _fresh(pvars, suffix, variables(f) | frozenset(pvars))
    d = modal_depth(f)
    guards = [graded("box", d, Or(Lit(fresh[p], False), Lit(p, True))) for p in pvars]
    body = substitute(f, {p: Lit(fresh[p], True) for p in pvars})
    return And(conj(guards), body) if guards else body


def param_elim_lift(f: Formula, pvars: Iterable[str], rvars: Iterable[str],
                    suffix: str = "'") -> Formula:
    """Rewrite ``~r`` as a fresh ``r'`` and guard the pair.

    Returns ``f' & /\\_j []^{<=d}(r_j | r_j') | \\/_j <>^{<=d}(r_j & r_j')``;
    the result is positive in the parameters and their fresh twins.
    """
    del pvars  # monotone variables pass through unchanged
    rvars = list(rvars)
    fresh = _fresh(rvars, suffix, variables(f))
    rset = frozenset(rvars)

    def go(g: Formula) -> Formula:
        if isinstance(g, Lit):
            if g.var in rset and not g.positive:
                return Lit(fresh[g.var], True)
            return g
        if isinstance(g, (Bot, Top)):
            return g
        if isinstance(g, And):
            return And(go(g.left), go(g.right))
        if isinstance(g, Or):
            return Or(go(g.left), go(g.right))
        if isinstance(g, Dia):
            return Dia(go(g.child))
        return Box(go(g.child))

    lifted = go(f)
    if not rvars:
        return lifted
    d = modal_depth(f)
    guard = conj(graded("box", d, Or(Lit(r), Lit(fresh[r]))) for r in rvars)
    clash = disj(graded("dia", d, And(Lit(r), Lit(fresh[r]))) for r in rvars)
    return Or(And(lifted, guard), clash)


def craig_lift(phi: Formula, psi: Formula, pvars: Iterable[str],
               suffix: str = "_r") -> tuple[Formula, Formula]:
    """Rename the private variables of ``psi`` and conjoin ``\\/p | true`` to both."""
    pvars = list(pvars)
    private = sorted(variables(psi) - frozenset(pvars))
    fresh = _fresh(private, suffix, variables(phi) | variables(psi))
    eta = Or(disj(Lit(p) for p in pvars), TOP) if pvars else TOP
    psi_r = substitute(psi, {q: Lit(fresh[q]) for q in private})
    return And(phi, eta), And(psi_r, eta)


# ---------------------------------------------------------------------------
# enumeration


def enumerate_formulas(vocab: LiteralSet, max_size: int) -> Iterator[Formula]:
    """All NNF formulas over ``vocab`` with at most ``max_size`` nodes.

    Order: node count, then Bot < Top < Lit < Dia < Box < And < Or, then
    children lexicographically in this same order.
    """
    if max_size < 1:
        raise ValueError("max_size must be at least 1")
    by_size: list[list[Formula]] = [[]]
    for n in range(1, max_size + 1):
        level: list[Formula] = []
        if n == 1:
            level = [BOT, TOP, *vocab.literals()]
        else:
            level.extend(Dia(c) for c in by_size[n - 1])
            level.extend(Box(c) for c in by_size[n - 1])
            for ctor in (And, Or):
                for ls in range(1, n - 1):
                    for a in by_size[ls]:
                        for b in by_size[n - 1 - ls]:
                            level.append(ctor(a, b))
        by_size.append(level)
        yield from level


_AXIOM_TEXT = {
    "AM": "<>p -> <>(p | q)",
    "AC": "<>(p | q) -> <>p | <>q",
    "AN": "[]true",
    "AP": "<>true",
    "AD": "[]p -> <>p",
    "AT": "p -> <>p",
    "A4": "<><>p -> <>p",
    "AB": "<>p -> []<>p",
    "A.3": "<>p & <>q -> <>(p & <>q) | <>(q & <>p) | <>(p & q)",
}


def axioms() -> dict[str, Formula]:
    return {name: parse(text) for name, text in _AXIOM_TEXT.items()}
