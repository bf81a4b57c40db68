"""Acceptance run: ten criteria, each timed and reported on one line.

Run with ``pytest tests/test_acceptance.py -v`` or ``python3 tests/test_acceptance.py``.
"""

import random
import sys
import time
from contextlib import contextmanager

import pytest

import oracles
from modlab import randgen
from modlab.bisim import greatest_tau_bisim, is_tau_bisim
from modlab.formula import (Lit, LiteralSet, conj, dualize, enumerate_formulas,
                            graded, iff, implies, lyndon_premise, modal_depth, negate,
                            param_elim_lift, parse, substitute, to_text)
from modlab.positivity import (check_monotone, positivity_witness_search,
                               synthesize_positive)
from modlab.repro import (f0_models, ppqq_trials, product_trials, run_case,
                          zigzag_preservation_trials)
from modlab.structures import (KripkeFrame, Model, NbdFrame, Relation, Valuation,
                               dual_model, evaluate, frame_validity, full_mask)

SIMPLE = parse("[]p | (~p & <>p)")
C2 = KripkeFrame(2, (3, 3))
TWO_WORLD_FRAMES = [KripkeFrame(2, (a, b)) for a in range(4) for b in range(4)]
P_TAUS = [LiteralSet(), LiteralSet({"p"}), LiteralSet((), {"p"}), LiteralSet.all_over({"p"})]


@contextmanager
def criterion(capsys, number, title, limit=None):
    """Times the body, checks the limit and prints one PASS/FAIL line."""
    start = time.perf_counter()
    status, note = "FAIL", ""
    try:
        yield
        elapsed = time.perf_counter() - start
        if limit is not None and elapsed >= limit:
            note = f"too slow: {elapsed:.2f} s >= {limit} s"
            raise AssertionError(note)
        status = "PASS"
    except Exception as e:
        note = note or f"{type(e).__name__}: {e}"
        raise
    finally:
        elapsed = time.perf_counter() - start
        bound = f" (limit {limit} s)" if limit is not None else ""
        line = f"[{status}] criterion {number}: {title} in {elapsed:.2f} s{bound}"
        if note:
            line += f" -- {note}"
        with capsys.disabled():
            print("\n" + line)


def test_criterion_01_linear_frame_case(capsys):
    with criterion(capsys, 1, "linear frame witness and exhaustive monotonicity", 2):
        rep = run_case("f0-lin")
        assert rep.passed, rep.text()
        _, _, z = f0_models()
        assert set(z.pairs) == {(0, 0), (1, 1), (2, 2), (2, 0), (3, 1), (4, 3)}


def test_criterion_02_cluster_cases(capsys):
    for case in ("cluster-2-0", "cluster-3-1"):
        with criterion(capsys, 2, f"{case} witness and monotonicity", 1):
            rep = run_case(case)
            assert rep.passed, rep.text()


def corpus():
    yield from enumerate_formulas(LiteralSet.all_over(["p"]), 4)
    yield SIMPLE


def test_criterion_03_positivity_decision_on_c2(capsys):
    with criterion(capsys, 3, "two-cluster witness, no positive equivalent to size 9, "
                              "exclusion on the corpus", 10):
        res = positivity_witness_search(C2, SIMPLE, ["p"], "exhaustive")
        assert res.found and res.complete
        syn = synthesize_positive(C2, SIMPLE, ["p"], 9)
        assert syn.found is None and syn.bound_reached == 9
        both = []
        checked = 0
        for frame in (C2, KripkeFrame(2, (2, 1)), KripkeFrame(2, (2, 3))):
            for f in corpus():
                search = positivity_witness_search(frame, f, ["p"], "exhaustive")
                synth = synthesize_positive(frame, f, ["p"], 4)
                checked += 1
                if search.found and synth.found is not None:
                    both.append((frame.succ, to_text(f)))
        assert checked > 800 and not both, both[:3]


def test_criterion_04_greatest_bisim_against_oracle(capsys):
    with criterion(capsys, 4, "greatest tau-bisimulation equals the union oracle on "
                              "all 2-world one-variable model pairs", 30):
        bad = []
        count = 0
        for frame in TWO_WORLD_FRAMES:
            for x1 in range(4):
                for x2 in range(4):
                    m1 = Model(frame, Valuation(("p",), (x1,)))
                    m2 = Model(frame, Valuation(("p",), (x2,)))
                    for tau in P_TAUS:
                        count += 1
                        got = set(greatest_tau_bisim(m1, m2, tau).pairs)
                        if got != oracles.greatest_bisim(m1, m2, tau):
                            bad.append((frame.succ, x1, x2, tau.to_json()))
        assert count == 16 * 16 * 4
        assert not bad, bad[:3]


def test_criterion_05_zigzag_free_subrelations(capsys):
    with criterion(capsys, 5, "1000 full relations give full zigzag-free subrelations", 5):
        failures = ppqq_trials(1000, seed=0, max_side=6)
        assert not failures, failures[:2]


def test_criterion_06_top_cluster_frames(capsys):
    with criterion(capsys, 6, "bisimulations on D2 and D3 are exactly those with full "
                              "cluster part", 30):
        for case in ("dk-qqq-2", "dk-qqq-3"):
            rep = run_case(case)
            assert rep.passed, rep.text()


def test_criterion_07_zigzag_free_preservation(capsys):
    with criterion(capsys, 7, "500 zigzag-free directed bisimulations preserve "
                              "monotone formulas"):
        out = zigzag_preservation_trials(500, seed=0)
        assert out["trials"] == 500 and not out["failures"], out["failures"][:2]


def test_criterion_08_products(capsys):
    with criterion(capsys, 8, "maximal products: equations, axioms, alpha instances, "
                              "positive bounds", 60):
        out = product_trials(pairs=100, instances=300, alphas=200, seed=0)
        assert out["pairs"] == 100 and out["instances"] == 300 and out["alphas"] == 200
        assert not out["failures"], out["failures"][:3]


def equiv_replacement_instance(rng):
    """Agreement of p, q with their substitutes up to depth d forces agreement of f."""
    vocab = LiteralSet.all_over(["p", "q"])
    f = randgen.formula(rng, vocab, rng.randint(0, 3), 8)
    etas = {v: randgen.formula(rng, LiteralSet.all_over(["p", "q", "r"]), 2, 5)
            for v in ("p", "q")}
    d = modal_depth(f)
    agree = graded("box", d, conj(iff(Lit(v), etas[v]) for v in ("p", "q")))
    return agree, iff(f, substitute(f, etas))


def test_criterion_09_formula_builders(capsys):
    with criterion(capsys, 9, "replacement implication, parameter lift and premise "
                              "identities on 1000 models each", 30):
        rng = random.Random(0)
        names = ["p", "q", "r", "s"]
        engaged = 0
        for _ in range(1000):
            m = randgen.model(rng, randgen.kripke_frame(rng, rng.randint(1, 5)), names)
            agree, same = equiv_replacement_instance(rng)
            g = implies(agree, same)
            assert evaluate(m, g) == full_mask(m.frame.size), to_text(g)
            engaged += evaluate(m, agree) != 0
        assert engaged > 200  # the premise is not vacuous

        vocab = LiteralSet.all_over(["p", "r", "s"])
        undo = {"r'": Lit("r", False), "s'": Lit("s", False)}
        for _ in range(1000):
            m = randgen.model(rng, randgen.kripke_frame(rng, rng.randint(1, 5)), names)
            f = randgen.formula(rng, vocab, rng.randint(0, 3), 9)
            psi = substitute(param_elim_lift(f, ["p"], ["r", "s"]), undo)
            assert evaluate(m, psi) == evaluate(m, f), to_text(f)

        done = engaged = 0
        vocab = LiteralSet.all_over(["p", "q"])
        while done < 1000:
            frame = randgen.kripke_frame(rng, rng.randint(1, 4))
            f = randgen.formula(rng, vocab, rng.randint(0, 2), 7)
            if not check_monotone(frame, f, ["p"]).monotone:
                continue
            done += 1
            premise = lyndon_premise(f, ["p"])
            assert frame_validity(frame, implies(premise, f)) is None, to_text(f)
            engaged += frame_validity(frame, negate(premise)) is not None
        assert engaged > 500  # premise satisfiable on most frames


def random_nbd(rng, n, monotone):
    if monotone:
        return randgen.monotone_frame(rng, n)
    return NbdFrame(n, tuple(rng.getrandbits(n) for _ in range(1 << n)))


def test_criterion_10_infrastructure(capsys):
    with criterion(capsys, 10, "round trip to size 6, Galois laws, duality, inversion"):
        count = 0
        for f in enumerate_formulas(LiteralSet.all_over(["p", "q"]), 6):
            assert parse(to_text(f)) == f
            count += 1
        assert count == 27378

        rng = random.Random(10)
        for _ in range(1000):
            n1, n2 = rng.randint(1, 5), rng.randint(1, 5)
            z = randgen.relation(rng, n1, n2, rng.uniform(0.1, 0.9))
            x1, x2 = rng.getrandbits(n1), rng.getrandbits(n2)
            assert (z.image(x1) & ~x2 == 0) == (x1 & ~z.conjugate(x2) == 0)
            assert x1 & ~z.conjugate(z.image(x1)) == 0
            assert z.image(z.conjugate(x2)) & ~x2 == 0
            pairs = set(z.pairs)
            assert oracles.as_set(z.image(x1)) == oracles.image(pairs, oracles.as_set(x1))

        fvocab = LiteralSet.all_over(["p", "q"])
        for _ in range(500):
            n = rng.randint(1, 4)
            frame = random_nbd(rng, n, rng.random() < 0.5) if rng.random() < 0.7 \
                else randgen.kripke_frame(rng, n)
            if isinstance(frame, KripkeFrame):
                frame = NbdFrame(n, tuple(frame.dia(x) for x in range(1 << n)))
            m = randgen.model(rng, frame, ["p", "q"])
            f = randgen.formula(rng, fvocab, 3, 10)
            assert evaluate(m, f) == evaluate(dual_model(m), dualize(f))

        for _ in range(200):
            n1, n2 = rng.randint(1, 3), rng.randint(1, 3)
            m1 = randgen.model(rng, random_nbd(rng, n1, True), ["p"])
            m2 = randgen.model(rng, random_nbd(rng, n2, True), ["p"])
            z = Relation(n1, n2, tuple(rng.getrandbits(n2) for _ in range(n1)))
            tau = rng.choice(P_TAUS)
            here = is_tau_bisim(m1, m2, z, tau)
            assert here == is_tau_bisim(m2, m1, z.inverse(), tau.negated())
            assert here == is_tau_bisim(dual_model(m1), dual_model(m2), z, tau)
            assert here == oracles.is_tau_bisim(m1, m2, set(z.pairs), tau)


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-q"]))
