"""Monotonicity decisions, positivity and interpolation witnesses, bounded synthesis."""

from __future__ import annotations

import math
import random
from dataclasses import dataclass
from typing import Iterable, Mapping, Optional, Sequence

import numpy as np

from . import kernels
from .bisim import check_tau_bisim, greatest_tau_bisim
from .errors import FormatError, GuardExceeded, check_guard
from .formula import (BOT, TOP, And, Box, Dia, Formula, LiteralSet, Or, parse,
                      to_text, variables)
from .structures import (Frame, KripkeFrame, Model, Relation, Valuation, evaluate,
                         full_mask, index_of, members, truth_table, valuation_at)

MAX_CANDIDATES = 10 ** 6


def _lowest(mask: int) -> int:
    return (mask & -mask).bit_length() - 1


def _pmask(names: Sequence[str], pvars: Iterable[str], n: int) -> int:
    pset = set(pvars)
    k = len(names)
    out = 0
    for i, name in enumerate(names):
        if name in pset:
            out |= full_mask(n) << ((k - 1 - i) * n)
    return out


# ---------------------------------------------------------------------------
# monotonicity


@dataclass(frozen=True)
class MonotonicityVerdict:
    monotone: bool
    val1: Optional[Valuation] = None
    val2: Optional[Valuation] = None
    world: Optional[int] = None

    def to_json(self) -> dict:
        out: dict = {"monotone": self.monotone}
        if not self.monotone:
            out["counterexample"] = {"val1": self.val1.to_json(), "val2": self.val2.to_json(),
                                     "world": self.world}
        return out


def check_monotone(frame: Frame, f: Formula, pvars: Iterable[str],
                   guard_bits: int | None = None) -> MonotonicityVerdict:
    """Exhaustive check that growing ``pvars`` never shrinks the truth set of ``f``.

    The first counterexample is the least pair ``(val1, val2)`` in sweep
    order, ``val1`` below ``val2`` on ``pvars`` and equal elsewhere.
    """
    names = sorted(variables(f))
    pv = [p for p in names if p in set(pvars)]
    n = frame.size
    work = n * len(pv) * math.log2(3) + n * (len(names) - len(pv))
    check_guard(max(work, n * len(names)), "monotonicity sweep", guard_bits)
    table = truth_table(frame, f, names)
    hit = kernels.first_monotone_violation(table, _pmask(names, pv, n))
    if hit is None:
        return MonotonicityVerdict(True)
    i, j = hit
    lost = int(table[i]) & ~int(table[j])
    return MonotonicityVerdict(False, valuation_at(i, names, n), valuation_at(j, names, n),
                               _lowest(lost))


# ---------------------------------------------------------------------------
# witnesses


@dataclass(frozen=True)
class Witness:
    """``premise`` holds at ``pair[0]`` in ``m1``, ``conclusion`` fails at
    ``pair[1]`` in ``m2``, and ``z`` is a ``tau``-bisimulation containing ``pair``."""

    m1: Model
    m2: Model
    z: Relation
    tau: LiteralSet
    pair: tuple
    premise: Formula
    conclusion: Formula

    def to_json(self) -> dict:
        out = {
            "kind": "witness",
            "m1": self.m1.to_json(),
            "m2": self.m2.to_json(),
            "z": self.z.to_json(),
            "tau": self.tau.to_json(),
            "formula": to_text(self.premise),
            "worlds": list(self.pair),
        }
        if self.conclusion != self.premise:
            out["formula2"] = to_text(self.conclusion)
        return out


@dataclass(frozen=True)
class SearchResult:
    status: str  # "witness", "none-found" or "exhausted"
    witness: Optional[Witness]
    pairs_checked: int
    mode: str
    complete: bool
    seed: Optional[int] = None
    trials: Optional[int] = None

    @property
    def found(self) -> bool:
        return self.witness is not None

    def to_json(self) -> dict:
        out = {"status": self.status, "mode": self.mode, "pairs_checked": self.pairs_checked,
               "complete": self.complete}
        if self.mode == "sampled":
            out["seed"] = self.seed
            out["trials"] = self.trials
        if self.witness is not None:
            out["certificate"] = self.witness.to_json()
        return out


def _pair_search(frame: Frame, f: Formula, g: Formula, names: list[str], tau: LiteralSet,
                 mode: str, seed: int, trials: int, hints, guard_bits) -> SearchResult:
    n = frame.size
    k = len(names)
    full = full_mask(n)
    complete = isinstance(frame, KripkeFrame)
    if mode == "exhaustive":
        check_guard(2 * n * k, "model pair sweep", guard_bits)
    elif mode != "sampled":
        raise ValueError(f"unknown mode {mode!r}")
    else:
        check_guard(n * k, "truth table", guard_bits)
    tf = truth_table(frame, f, names)
    tg = tf if g is f else truth_table(frame, g, names)
    checked = 0

    def attempt(i1: int, i2: int) -> Optional[Witness]:
        a, b = int(tf[i1]), int(tg[i2])
        if not a or b == full:
            return None
        m1 = Model(frame, valuation_at(i1, names, n))
        m2 = Model(frame, valuation_at(i2, names, n))
        z = greatest_tau_bisim(m1, m2, tau)
        for w1 in members(a):
            bad = z.rows[w1] & ~b
            if bad:
                return Witness(m1, m2, z, tau, (w1, _lowest(bad)), f, g)
        return None

    for v1, v2 in hints or ():
        checked += 1
        w = attempt(index_of(v1, names, n), index_of(v2, names, n))
        if w is not None:
            return SearchResult("witness", w, checked, mode, complete,
                                seed if mode == "sampled" else None,
                                trials if mode == "sampled" else None)
    if mode == "exhaustive":
        count = 1 << (n * k)
        for i1 in range(count):
            if not tf[i1]:
                continue
            for i2 in range(count):
                checked += 1
                w = attempt(i1, i2)
                if w is not None:
                    return SearchResult("witness", w, checked, mode, complete)
        return SearchResult("none-found", None, checked, mode, complete)
    rng = random.Random(seed)
    for _ in range(trials):
        i1 = rng.getrandbits(n * k) if k else 0
        i2 = rng.getrandbits(n * k) if k else 0
        checked += 1
        w = attempt(i1, i2)
        if w is not None:
            return SearchResult("witness", w, checked, mode, False, seed, trials)
    return SearchResult("exhausted", None, checked, mode, False, seed, trials)


def positivity_witness_search(frame: Frame, f: Formula, pvars: Iterable[str],
                              mode: str = "exhaustive", seed: int = 0, trials: int = 1000,
                              hints=None, guard_bits: int | None = None) -> SearchResult:
    """Look for two models on ``frame`` and a ``pvars``-directed bisimulation
    that does not preserve ``f``.

    Each model pair is tested against its greatest directed bisimulation
    only: failure under any smaller one implies failure under the greatest.
    A ``none-found`` result of an exhaustive sweep on a Kripke frame means
    ``f`` is equivalent on the frame to a formula positive in ``pvars``.
    """
    names = sorted(variables(f))
    tau = LiteralSet.directed(pvars, names)
    return _pair_search(frame, f, f, names, tau, mode, seed, trials, hints, guard_bits)


def interpolant_witness_search(frame: Frame, f: Formula, g: Formula, tau: LiteralSet,
                               mode: str = "exhaustive", seed: int = 0, trials: int = 1000,
                               hints=None, guard_bits: int | None = None) -> SearchResult:
    names = sorted(variables(f) | variables(g))
    tau = _restrict_tau(tau, names)
    return _pair_search(frame, f, g, names, tau, mode, seed, trials, hints, guard_bits)


def _restrict_tau(tau: LiteralSet, names: Iterable[str]) -> LiteralSet:
    names = frozenset(names)
    return LiteralSet(tau.pos & names, tau.neg & names)


# ---------------------------------------------------------------------------
# synthesis


@dataclass(frozen=True)
class SynthesisResult:
    found: Optional[Formula]
    size: Optional[int]
    bound_reached: int
    candidates_checked: int
    classes: int

    def to_json(self) -> dict:
        return {"found": None if self.found is None else to_text(self.found),
                "size": self.size, "bound_reached": self.bound_reached,
                "candidates_checked": self.candidates_checked, "classes": self.classes}


class SemanticClasses:
    """Bottom-up enumeration by size keeping one formula per truth table.

    Tables are compared over every valuation of ``names``, so two formulas
    sharing a table are interchangeable inside any larger formula. Iterating
    yields ``(formula, table, size)`` for each new class, smallest first.
    """

    def __init__(self, frame: Frame, names: list[str], vocab: LiteralSet, max_size: int,
                 max_candidates: int = MAX_CANDIDATES):
        if max_size < 1:
            raise ValueError("max_size must be at least 1")
        self.frame = frame
        self.names = names
        self.vocab = vocab
        self.max_size = max_size
        self.max_candidates = max_candidates
        self.checked = 0
        self.bound_reached = 0
        self.seen: set = set()

    def _blocks(self, size: int, levels: list):
        if size == 1:
            atoms = [BOT, TOP, *self.vocab.literals()]
            yield atoms, lambda: np.stack([truth_table(self.frame, a, self.names)
                                           for a in atoms])
            return
        dia = self.frame.table
        full = dia.dtype.type(full_mask(self.frame.size))
        prev_f, prev_t = levels[size - 1]
        if prev_f:
            yield [Dia(a) for a in prev_f], lambda: dia[prev_t]
            yield [Box(a) for a in prev_f], lambda: dia[prev_t ^ full] ^ full
        for ctor, op in ((And, np.bitwise_and), (Or, np.bitwise_or)):
            for ls in range(1, size - 1):
                lf, lt = levels[ls]
                rf, rt = levels[size - 1 - ls]
                if not (lf and rf):
                    continue
                for a, at in zip(lf, lt):
                    yield [ctor(a, b) for b in rf], lambda at=at, rt=rt, op=op: op(at, rt)

    def __iter__(self):
        levels: list = [([], None)]
        for size in range(1, self.max_size + 1):
            forms: list = []
            rows: list = []
            for batch, make in self._blocks(size, levels):
                if self.checked + len(batch) > self.max_candidates:
                    raise GuardExceeded(f"synthesis: more than {self.max_candidates} "
                                        "candidates; lower --max-size")
                for form, row in zip(batch, make()):
                    self.checked += 1
                    key = row.tobytes()
                    if key in self.seen:
                        continue
                    self.seen.add(key)
                    forms.append(form)
                    rows.append(row)
                    yield form, row, size
            levels.append((forms, np.stack(rows) if rows else None))
            self.bound_reached = size


def _semantic_search(frame: Frame, names: list[str], vocab: LiteralSet, max_size: int,
                     accept, max_candidates: int = MAX_CANDIDATES) -> SynthesisResult:
    classes = SemanticClasses(frame, names, vocab, max_size, max_candidates)
    for form, row, size in classes:
        if accept(row):
            return SynthesisResult(form, size, size, classes.checked, len(classes.seen))
    return SynthesisResult(None, None, max_size, classes.checked, len(classes.seen))


def positive_vocabulary(f: Formula, pvars: Iterable[str]) -> LiteralSet:
    vs = variables(f)
    return LiteralSet(vs, vs - frozenset(pvars))


def synthesize_positive(frame: Frame, f: Formula, pvars: Iterable[str], max_size: int,
                        guard_bits: int | None = None,
                        max_candidates: int = MAX_CANDIDATES) -> SynthesisResult:
    """Smallest ``pvars``-positive formula over the variables of ``f`` that is
    equivalent to ``f`` on ``frame``, searched up to ``max_size`` nodes."""
    names = sorted(variables(f))
    check_guard(frame.size * len(names), "truth table", guard_bits)
    target = truth_table(frame, f, names)
    vocab = positive_vocabulary(f, pvars)
    return _semantic_search(frame, names, vocab, max_size,
                            lambda row: np.array_equal(row, target), max_candidates)


def synthesize_interpolant(frame: Frame, f: Formula, g: Formula, tau: LiteralSet,
                           max_size: int, guard_bits: int | None = None,
                           max_candidates: int = MAX_CANDIDATES) -> SynthesisResult:
    """A formula over the literals of ``tau`` lying between ``f`` and ``g`` on ``frame``."""
    names = sorted(variables(f) | variables(g))
    check_guard(frame.size * len(names), "truth table", guard_bits)
    tf = truth_table(frame, f, names)
    tg = truth_table(frame, g, names)
    vocab = _restrict_tau(tau, names)

    def accept(row):
        return not np.any(tf & ~row) and not np.any(row & ~tg)

    return _semantic_search(frame, names, vocab, max_size, accept, max_candidates)


# ---------------------------------------------------------------------------
# combined report


@dataclass(frozen=True)
class LppReport:
    verdict: str
    monotonicity: MonotonicityVerdict
    search: Optional[SearchResult] = None
    synthesis: Optional[SynthesisResult] = None

    def to_json(self) -> dict:
        out: dict = {"verdict": self.verdict, "monotonicity": self.monotonicity.to_json()}
        if self.search is not None:
            out["search"] = self.search.to_json()
        if self.synthesis is not None:
            out["synthesis"] = self.synthesis.to_json()
        return out


def lpp_report(frame: Frame, f: Formula, pvars: Iterable[str], max_size: int = 6,
               seed: int = 0, trials: int = 1000, hints=None,
               guard_bits: int | None = None) -> LppReport:
    """Monotonicity first, then a witness search, then synthesis.

    The search is exhaustive when the guard allows, sampled otherwise.
    """
    pvars = list(pvars)
    mono = check_monotone(frame, f, pvars, guard_bits)
    if not mono.monotone:
        return LppReport("not-monotone", mono)
    try:
        search = positivity_witness_search(frame, f, pvars, "exhaustive", hints=hints,
                                           guard_bits=guard_bits)
    except GuardExceeded:
        search = positivity_witness_search(frame, f, pvars, "sampled", seed, trials, hints,
                                           guard_bits)
    if search.found:
        return LppReport("refuted-with-witness", mono, search)
    synth = synthesize_positive(frame, f, pvars, max_size, guard_bits)
    if synth.found is not None:
        return LppReport("positive-equivalent-found", mono, search, synth)
    return LppReport("inconclusive", mono, search, synth)


# ---------------------------------------------------------------------------
# certificates


def verify_witness(cert: Mapping) -> list[str]:
    """Re-check a witness certificate using evaluation and the bisimulation
    check only. Returns the list of failed checks."""
    try:
        m1 = Model.from_json(cert["m1"])
        m2 = Model.from_json(cert["m2"])
        z = Relation.from_json(cert["z"])
        tau = LiteralSet.from_json(cert["tau"])
        f = parse(cert["formula"])
        g = parse(cert.get("formula2", cert["formula"]))
        w1, w2 = cert["worlds"]
    except KeyError as e:
        raise FormatError(f"certificate: missing field {e.args[0]!r}") from None
    failures = []
    hit = check_tau_bisim(m1, m2, z, tau)
    if hit is not None:
        failures.append(f"relation is not a tau-bisimulation: {hit.describe()}")
    if (w1, w2) not in z:
        failures.append(f"pair {(w1, w2)} not in relation")
    if not evaluate(m1, f) >> w1 & 1:
        failures.append(f"formula false at world {w1} of m1")
    if evaluate(m2, g) >> w2 & 1:
        failures.append(f"formula true at world {w2} of m2")
    return failures
