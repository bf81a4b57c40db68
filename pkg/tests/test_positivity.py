import json

import pytest
from hypothesis import given, settings, strategies as st

import oracles
from strategies import formulas, kripke_frames, nbd_frames, positive_formulas
from modlab.errors import FormatError, GuardExceeded
from modlab.formula import (LiteralSet, Lit, iff, implies, is_positive, lits, parse,
                            size, variables)
from modlab.positivity import (SemanticClasses, check_monotone, interpolant_witness_search,
                               lpp_report, positivity_witness_search, synthesize_interpolant,
                               synthesize_positive, verify_witness)
from modlab.repro import cluster, f0, f0_models, phi_lin
from modlab.structures import (KripkeFrame, Model, Valuation, evaluate, frame_validity,
                               kripke_to_nbd)

C2 = cluster(2)
C1 = cluster(1)
CHAIN = KripkeFrame.from_edges(2, [(0, 1)])
SIMPLE = parse("[]p | (~p & <>p)")


class TestMonotone:
    def test_simple_counterexample_is_monotone(self):
        assert check_monotone(C2, SIMPLE, ["p"]).monotone

    def test_negation_is_antitone(self):
        v = check_monotone(C2, parse("~p"), ["p"])
        assert not v.monotone
        assert v.val1["p"] == 0 and v.val2["p"] != 0
        assert v.to_json()["counterexample"]["val1"] == {"p": []}

    def test_counterexample_recheckable(self):
        f = parse("<>p & ~q | []~p")
        v = check_monotone(C2, f, ["p"])
        assert not v.monotone
        assert v.val1["p"] & ~v.val2["p"] == 0 and v.val1["q"] == v.val2["q"]
        assert evaluate(Model(C2, v.val1), f) >> v.world & 1
        assert not evaluate(Model(C2, v.val2), f) >> v.world & 1

    def test_variables_outside_formula_ignored(self):
        assert check_monotone(C2, parse("<>q"), ["p"]).monotone

    def test_guard(self):
        big = KripkeFrame(8, (0,) * 8)
        with pytest.raises(GuardExceeded):
            check_monotone(big, parse("p & q & r & s"), ["p"])

    @settings(max_examples=150, deadline=None)
    @given(st.one_of(kripke_frames(max_size=3), nbd_frames(max_size=3)),
           formulas(("p", "q"), max_leaves=6), st.sampled_from([["p"], ["q"], ["p", "q"]]))
    def test_matches_brute_force(self, frame, f, pvars):
        names = sorted(variables(f))
        if frame.size * len(names) > 6:
            return
        expect = oracles.is_monotone(frame, f, set(pvars), names)
        assert check_monotone(frame, f, pvars).monotone == expect

    @settings(max_examples=150, deadline=None)
    @given(st.one_of(kripke_frames(max_size=3), nbd_frames(max_size=3, monotone=True)),
           positive_formulas(("p", "q")))
    def test_positive_formulas_are_monotone(self, frame, f):
        assert check_monotone(frame, f, ["p", "q"]).monotone


class TestWitnessSearch:
    def test_cluster_witness_golden(self):
        res = positivity_witness_search(C2, SIMPLE, ["p"], "exhaustive")
        assert res.status == "witness" and res.complete
        w = res.witness
        assert w.m1.val.to_json() == {"p": [0]} and w.m2.val.to_json() == {"p": [0]}
        assert w.z.pairs == [(0, 0), (1, 0), (1, 1)]
        assert w.pair == (1, 0)
        assert verify_witness(w.to_json()) == []

    def test_positive_formula_has_no_witness(self):
        res = positivity_witness_search(C2, parse("<>p"), ["p"], "exhaustive")
        assert res.status == "none-found" and res.complete
        assert res.pairs_checked == 12  # 3 nonempty truth sets times 4 valuations

    def test_neighborhood_search_is_not_complete(self):
        res = positivity_witness_search(kripke_to_nbd(C2), parse("<>p"), ["p"], "exhaustive")
        assert res.status == "none-found" and not res.complete

    def test_f0_with_hints(self):
        m1, m2, _ = f0_models()
        res = positivity_witness_search(f0(), phi_lin(), ["p"], "sampled", seed=3, trials=5,
                                        hints=[(m1.val, m2.val)])
        assert res.found and res.pairs_checked == 1
        assert verify_witness(res.witness.to_json()) == []

    def test_f0_exhaustive_guard(self):
        with pytest.raises(GuardExceeded):
            positivity_witness_search(f0(), phi_lin(), ["p"], "exhaustive")

    def test_sampled_is_deterministic(self):
        a = positivity_witness_search(C2, SIMPLE, ["p"], "sampled", seed=5, trials=50)
        b = positivity_witness_search(C2, SIMPLE, ["p"], "sampled", seed=5, trials=50)
        assert json.dumps(a.to_json(), sort_keys=True) == json.dumps(b.to_json(), sort_keys=True)
        assert a.found and not a.complete

    def test_sampled_exhaustion(self):
        res = positivity_witness_search(C2, parse("<>p"), ["p"], "sampled", seed=0, trials=20)
        assert res.status == "exhausted" and res.pairs_checked == 20

    def test_unknown_mode(self):
        with pytest.raises(ValueError):
            positivity_witness_search(C2, SIMPLE, ["p"], "greedy")

    @pytest.mark.parametrize("text", ["[]p | (~p & <>p)", "<>p", "p & ~<>p", "[]p", "p | <>~p",
                                      "<>(p & ~<>p)", "~p | []p"])
    def test_decision_matches_brute_force(self, text):
        f = parse(text)
        for a in range(4):
            for b in range(4):
                frame = KripkeFrame(2, (a, b))
                got = positivity_witness_search(frame, f, ["p"], "exhaustive").found
                assert got == brute_witness_exists(frame, f)


def brute_witness_exists(frame, f):
    tau = LiteralSet({"p"})
    for x1 in range(4):
        for x2 in range(4):
            m1 = Model(frame, Valuation(("p",), (x1,)))
            m2 = Model(frame, Valuation(("p",), (x2,)))
            g = oracles.greatest_bisim(m1, m2, tau)
            t1, t2 = oracles.ev(m1, f), oracles.ev(m2, f)
            if any(a in t1 and b not in t2 for a, b in g):
                return True
    return False


class TestSynthesis:
    def test_idempotent_conjunction(self):
        res = synthesize_positive(C2, parse("<>p & <>p"), ["p"], 6)
        assert res.found == parse("<>p") and res.size == 2

    def test_simple_counterexample_none(self):
        res = synthesize_positive(C2, SIMPLE, ["p"], 9)
        assert res.found is None and res.bound_reached == 9

    def test_candidate_guard(self):
        with pytest.raises(GuardExceeded):
            synthesize_positive(C2, SIMPLE, ["p"], 9, max_candidates=50)

    @settings(max_examples=60, deadline=None)
    @given(st.sampled_from([C1, C2, CHAIN, KripkeFrame(2, (2, 3))]),
           formulas(("p",), max_leaves=5))
    def test_found_is_positive_equivalent_and_monotone(self, frame, f):
        res = synthesize_positive(frame, f, ["p"], 5)
        if res.found is None:
            return
        assert is_positive(res.found, {"p"})
        assert frame_validity(frame, iff(f, res.found)) is None
        assert check_monotone(frame, f, ["p"]).monotone

    @settings(max_examples=60, deadline=None)
    @given(st.sampled_from([C2, CHAIN]), positive_formulas(("p",), max_leaves=4))
    def test_positive_input_found_no_larger(self, frame, f):
        res = synthesize_positive(frame, f, ["p"], size(f))
        assert res.found is not None and res.size <= size(f)

    @settings(max_examples=60, deadline=None)
    @given(st.sampled_from([C1, C2, CHAIN, KripkeFrame(2, (2, 1))]),
           formulas(("p",), max_leaves=5))
    def test_soundness_exclusion(self, frame, f):
        search = positivity_witness_search(frame, f, ["p"], "exhaustive")
        synth = synthesize_positive(frame, f, ["p"], 5)
        assert not (search.found and synth.found is not None)

    def test_classes_are_distinct(self):
        classes = SemanticClasses(C2, ["p"], LiteralSet.all_over({"p"}), 4)
        rows = [row.tobytes() for _, row, _ in classes]
        assert len(rows) == len(set(rows))
        assert classes.checked >= len(rows) and classes.bound_reached == 4


class TestInterpolation:
    def test_identical_formulas(self):
        f = parse("<>p & []q")
        res = synthesize_interpolant(C2, f, f, lits(f), size(f))
        assert res.found is not None
        assert frame_validity(C2, implies(f, res.found)) is None
        assert frame_validity(C2, implies(res.found, f)) is None

    def test_positivity_as_interpolation(self):
        tau = LiteralSet.directed(["p"], ["p"])
        res = interpolant_witness_search(C2, SIMPLE, SIMPLE, tau)
        assert res.found
        assert verify_witness(res.witness.to_json()) == []

    def test_single_point(self):
        f, g = parse("p & q"), parse("p | r")
        res = synthesize_interpolant(C1, f, g, LiteralSet({"p"}), 3)
        assert res.found == Lit("p")
        assert not interpolant_witness_search(C1, f, g, LiteralSet({"p"})).found

    def test_witness_blocks_interpolant(self):
        f, g = parse("q"), parse("r")
        search = interpolant_witness_search(C1, f, g, LiteralSet())
        assert search.found
        cert = search.witness.to_json()
        assert cert["formula2"] == "r" and verify_witness(cert) == []
        assert synthesize_interpolant(C1, f, g, LiteralSet(), 4).found is None


class TestReport:
    def test_positive_found(self):
        rep = lpp_report(C2, parse("<>p"), ["p"])
        assert rep.verdict == "positive-equivalent-found"
        assert rep.synthesis.found == parse("<>p")

    def test_not_monotone(self):
        assert lpp_report(C2, parse("~p"), ["p"]).verdict == "not-monotone"

    def test_refuted(self):
        assert lpp_report(C2, SIMPLE, ["p"]).verdict == "refuted-with-witness"

    def test_f0_refuted_with_hints(self):
        m1, m2, _ = f0_models()
        rep = lpp_report(f0(), phi_lin(), ["p"], hints=[(m1.val, m2.val)])
        assert rep.verdict == "refuted-with-witness"
        assert rep.search.mode == "sampled"
        assert rep.to_json()["search"]["certificate"]["worlds"] == [4, 3]


class TestCertificates:
    def cert(self):
        return positivity_witness_search(C2, SIMPLE, ["p"], "exhaustive").witness.to_json()

    def test_round_trip_through_json(self):
        c = json.loads(json.dumps(self.cert()))
        assert verify_witness(c) == []

    def test_tampered_world(self):
        c = self.cert()
        c["worlds"] = [0, 1]
        assert verify_witness(c)

    def test_tampered_relation(self):
        c = self.cert()
        c["z"]["pairs"] = [[0, 0], [0, 1], [1, 0], [1, 1]]
        fails = verify_witness(c)
        assert any("bisimulation" in s for s in fails)

    def test_missing_field(self):
        c = self.cert()
        del c["tau"]
        with pytest.raises(FormatError, match="tau"):
            verify_witness(c)
