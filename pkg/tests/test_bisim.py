import random
from itertools import product

import pytest
from hypothesis import given, settings, strategies as st

import oracles
from strategies import formulas, full_relations, kripke_frames, nbd_frames, relations
from modlab.bisim import (ZigzagDecomposition, check_morphism, check_tau_bisim,
                          check_zigzag_decomposition, entails_under, frame_violation,
                          greatest_frame_bisim, greatest_tau_bisim, is_reduction,
                          is_tau_bisim, preserves, zigzag_free_subrelation, zigzag_split)
from modlab.formula import LiteralSet, lits, parse
from modlab.repro import cluster, cluster_models, f0_models, phi_lin
from modlab.structures import (KripkeFrame, Model, NbdFrame, Relation, Valuation,
                               dual_model, full_mask, kripke_to_nbd, mask_of)

CHAIN = KripkeFrame.from_edges(2, [(0, 1)])
POINT = KripkeFrame.from_edges(1, [(0, 0)])
F0_TAU = LiteralSet.directed(["p"], ["p", "r", "s"])


def small_models(frame_strategy):
    @st.composite
    def build(draw):
        frame = draw(frame_strategy)
        mask = draw(st.integers(0, full_mask(frame.size)))
        return Model(frame, Valuation(("p",), (mask,)))
    return build()


monotone_frames = st.one_of(kripke_frames(max_size=3), nbd_frames(max_size=3, monotone=True))
taus = st.sampled_from([LiteralSet(), LiteralSet({"p"}), LiteralSet((), {"p"}),
                        LiteralSet.all_over({"p"})])


def all_pairs_relation(n1, n2, code):
    rows = [(code >> (a * n2)) & full_mask(n2) for a in range(n1)]
    return Relation(n1, n2, tuple(rows))


class TestCheck:
    def test_f0_relation(self):
        m1, m2, z = f0_models()
        assert check_tau_bisim(m1, m2, z, F0_TAU) is None

    def test_f0_mutation_golden(self):
        m1, m2, z = f0_models()
        broken = Relation.from_pairs(5, 5, [pr for pr in z.pairs if pr != (2, 0)])
        hit = check_tau_bisim(m1, m2, broken, F0_TAU)
        assert hit.condition == "zig_K" and hit.pair == (3, 1) and hit.successor == 2
        # (4, 3) is not needed for the back-and-forth conditions
        smaller = Relation.from_pairs(5, 5, [pr for pr in z.pairs if pr != (4, 3)])
        assert check_tau_bisim(m1, m2, smaller, F0_TAU) is None

    def test_cluster_relation(self):
        for k, m in ((2, 0), (3, 1)):
            m1, m2, z = cluster_models(k, m)
            tau = LiteralSet.directed(["p"], m1.val.support)
            assert check_tau_bisim(m1, m2, z, tau) is None

    def test_cluster_two_valuations(self):
        m1, m2, z = cluster_models(2, 0)
        assert m1.val.to_json() == {"p": [1]} and m2.val.to_json() == {"p": [0]}
        assert z.pairs == [(0, 0), (0, 1), (1, 0)]
        hit = check_tau_bisim(m1, m2, z, LiteralSet.all_over(["p"]))
        assert hit.condition == "lit"

    def test_identity(self):
        m = Model(cluster(3), Valuation.of({"p": [0], "q": [1, 2]}))
        assert check_tau_bisim(m, m, Relation.identity(3), LiteralSet.all_over({"p", "q"})) is None

    def test_dimension_mismatch(self):
        m = Model(CHAIN, Valuation.of({}))
        with pytest.raises(ValueError):
            check_tau_bisim(m, m, Relation.identity(3), LiteralSet())

    def test_non_monotone_rejected(self):
        bad = Model(NbdFrame(1, (1, 0)), Valuation.of({}))
        with pytest.raises(ValueError):
            check_tau_bisim(bad, bad, Relation.identity(1), LiteralSet())

    @settings(max_examples=300)
    @given(small_models(monotone_frames), small_models(monotone_frames), taus, st.data())
    def test_matches_definition(self, m1, m2, tau, data):
        code = data.draw(st.integers(0, (1 << (m1.frame.size * m2.frame.size)) - 1))
        z = all_pairs_relation(m1.frame.size, m2.frame.size, code)
        assert is_tau_bisim(m1, m2, z, tau) == oracles.is_tau_bisim(m1, m2, set(z.pairs), tau)

    def test_violation_is_recheckable(self):
        rng = random.Random(4)
        for _ in range(200):
            f1 = KripkeFrame(3, tuple(rng.getrandbits(3) for _ in range(3)))
            f2 = KripkeFrame(3, tuple(rng.getrandbits(3) for _ in range(3)))
            z = Relation(3, 3, tuple(rng.getrandbits(3) for _ in range(3)))
            hit = frame_violation(f1, f2, z)
            if hit is None:
                continue
            w1, w2 = hit.pair
            assert (w1, w2) in z
            v = hit.successor
            if hit.condition == "zig_K":
                assert f1.succ[w1] >> v & 1
                assert not any(z.rows[v] >> u & 1 for u in range(3) if f2.succ[w2] >> u & 1)
            else:
                assert f2.succ[w2] >> v & 1
                assert not any(z.rows[u] >> v & 1 for u in range(3) if f1.succ[w1] >> u & 1)


class TestKripkeVersusSubsets:
    def test_all_relations_small_frames(self):
        rng = random.Random(0)
        frames2 = [KripkeFrame(2, (a, b)) for a in range(4) for b in range(4)]
        pairs = [(a, b) for a in frames2 for b in frames2]
        frames3 = [KripkeFrame(3, tuple(rng.getrandbits(3) for _ in range(3))) for _ in range(24)]
        pairs += list(zip(frames3, frames3[1:]))
        for f1, f2 in pairs:
            n1, n2 = f1.size, f2.size
            nb1, nb2 = kripke_to_nbd(f1), kripke_to_nbd(f2)
            for code in range(1 << (n1 * n2)):
                z = all_pairs_relation(n1, n2, code)
                assert (frame_violation(f1, f2, z) is None) == \
                    (frame_violation(nb1, nb2, z) is None)


def zag_prime(f1, f2, z):
    n1 = f1.size
    for x in range(1 << n1):
        if z.image(f1.box(x)) & ~f2.box(z.image(x)):
            return False
    return True


@settings(max_examples=300)
@given(nbd_frames(max_size=3, monotone=True), nbd_frames(max_size=3, monotone=True), st.data())
def test_zag_forms_agree_on_monotone_frames(f1, f2, data):
    code = data.draw(st.integers(0, (1 << (f1.size * f2.size)) - 1))
    z = all_pairs_relation(f1.size, f2.size, code)
    zag = all(z.inverse().image(f2.dia(x)) & ~f1.dia(z.inverse().image(x)) == 0
              for x in range(1 << f2.size))
    assert zag == zag_prime(f1, f2, z)


class TestGreatest:
    def test_contains_identity(self):
        m = Model(cluster(3), Valuation.of({"p": [0, 2]}))
        g = greatest_tau_bisim(m, m, LiteralSet.all_over({"p"}))
        assert Relation.identity(3).issubset(g)

    def test_f0_contains_witness(self):
        m1, m2, z = f0_models()
        assert z.issubset(greatest_tau_bisim(m1, m2, F0_TAU))

    @settings(max_examples=200, deadline=None)
    @given(small_models(monotone_frames), small_models(monotone_frames), taus)
    def test_matches_union_oracle(self, m1, m2, tau):
        g = greatest_tau_bisim(m1, m2, tau)
        assert set(g.pairs) == oracles.greatest_bisim(m1, m2, tau)

    @settings(max_examples=100, deadline=None)
    @given(small_models(monotone_frames), small_models(monotone_frames), taus)
    def test_locally_maximal(self, m1, m2, tau):
        g = greatest_tau_bisim(m1, m2, tau)
        assert check_tau_bisim(m1, m2, g, tau) is None
        for a in range(m1.frame.size):
            for b in range(m2.frame.size):
                if (a, b) not in g:
                    bigger = Relation(g.left, g.right, tuple(
                        r | (1 << b) if i == a else r for i, r in enumerate(g.rows)))
                    assert check_tau_bisim(m1, m2, bigger, tau) is not None

    def test_frame_version(self):
        assert greatest_frame_bisim(CHAIN, POINT).pairs == []
        assert greatest_frame_bisim(cluster(2), POINT).pairs == [(0, 0), (1, 0)]


class TestInversionAndDuality:
    @settings(max_examples=200)
    @given(small_models(monotone_frames), small_models(monotone_frames), taus, st.data())
    def test_inversion(self, m1, m2, tau, data):
        code = data.draw(st.integers(0, (1 << (m1.frame.size * m2.frame.size)) - 1))
        z = all_pairs_relation(m1.frame.size, m2.frame.size, code)
        assert is_tau_bisim(m1, m2, z, tau) == is_tau_bisim(m2, m1, z.inverse(), tau.negated())

    @settings(max_examples=200)
    @given(small_models(nbd_frames(max_size=3, monotone=True)),
           small_models(nbd_frames(max_size=3, monotone=True)), taus, st.data())
    def test_duality(self, m1, m2, tau, data):
        code = data.draw(st.integers(0, (1 << (m1.frame.size * m2.frame.size)) - 1))
        z = all_pairs_relation(m1.frame.size, m2.frame.size, code)
        assert is_tau_bisim(m1, m2, z, tau) == \
            is_tau_bisim(dual_model(m1), dual_model(m2), z, tau)


class TestPreservation:
    def test_f0_not_preserved(self):
        m1, m2, z = f0_models()
        assert preserves(z, m1, m2, phi_lin()) == (4, 3)

    def test_empty_relation(self):
        m1, m2, _ = f0_models()
        assert preserves(Relation.empty(5, 5), m1, m2, phi_lin()) is None

    @settings(max_examples=200, deadline=None)
    @given(small_models(monotone_frames), small_models(monotone_frames), taus,
           formulas(("p",), max_leaves=6))
    def test_bisimulations_preserve_their_literals(self, m1, m2, tau, f):
        if not lits(f).issubset(tau):
            return
        z = greatest_tau_bisim(m1, m2, tau)
        assert preserves(z, m1, m2, f) is None

    def test_entails_under(self):
        m = Model(cluster(2), Valuation.of({"p": [0], "q": [0, 1]}))
        z = Relation.identity(2)
        assert entails_under(z, m, m, parse("p"), parse("q")) is None
        assert entails_under(z, m, m, parse("q"), parse("p")) == (1, 1)


def brute_split_exists(z):
    pairs = z.pairs
    for choice in product((0, 1), repeat=len(pairs)):
        z1 = Relation.from_pairs(z.left, z.right, [p for p, c in zip(pairs, choice) if c == 0])
        z2 = Relation.from_pairs(z.left, z.right, [p for p, c in zip(pairs, choice) if c == 1])
        if check_zigzag_decomposition(z, ZigzagDecomposition(z1, z2)):
            return True
    return False


class TestZigzag:
    def test_identity(self):
        d = zigzag_free_subrelation(Relation.identity(3))
        assert d.functional == Relation.identity(3)
        assert d.inverse_functional == Relation.empty(3, 3)

    def test_full_square_golden(self):
        d = zigzag_free_subrelation(Relation.full(2, 2))
        assert d.functional.pairs == [(0, 0), (1, 1)]
        assert d.inverse_functional.pairs == []

    def test_unique_preimage_goes_to_inverse_part(self):
        # no left world has a single image; right world 2 has the single preimage 0,
        # after which right worlds 0 and 1 both have the single preimage 1
        z = Relation.from_pairs(2, 3, [(0, 0), (0, 1), (0, 2), (1, 0), (1, 1)])
        d = zigzag_free_subrelation(z)
        assert d.functional.pairs == []
        assert d.inverse_functional.pairs == [(0, 2), (1, 0), (1, 1)]
        assert check_zigzag_decomposition(d.union, d)

    def test_requires_full(self):
        with pytest.raises(ValueError):
            zigzag_free_subrelation(Relation.from_pairs(2, 2, [(0, 0)]))

    @settings(max_examples=300)
    @given(full_relations())
    def test_output_full_subset_and_split(self, z):
        d = zigzag_free_subrelation(z)
        z0 = d.union
        assert z0.is_full() and z0.issubset(z)
        assert check_zigzag_decomposition(z0, d)

    def test_checker_rejects(self):
        z = Relation.from_pairs(2, 2, [(0, 0), (0, 1), (1, 1)])
        bad = ZigzagDecomposition(z, Relation.empty(2, 2))
        assert not check_zigzag_decomposition(z, bad)
        assert zigzag_split(z) is None

    @settings(max_examples=300)
    @given(relations(3, 3))
    def test_split_decides(self, z):
        d = zigzag_split(z)
        assert (d is not None) == brute_split_exists(z)
        if d is not None:
            assert check_zigzag_decomposition(z, d)


class TestMorphisms:
    def test_identity(self):
        assert check_morphism(Relation.identity(5), f0_models()[0].frame,
                              f0_models()[0].frame) is None

    def test_constant_map_to_reflexive_point(self):
        hit = check_morphism(Relation.from_function([0, 0], 1), CHAIN, POINT)
        # world 1 has no successor, so the back condition cannot be met
        assert hit.condition == "bwd" and hit.pair == (1, 0) and hit.successor == 0
        assert not oracles.is_morphism([0, 0], CHAIN, POINT)

    def test_requires_function(self):
        with pytest.raises(ValueError):
            check_morphism(Relation.from_pairs(2, 1, [(0, 0)]), CHAIN, POINT)

    @settings(max_examples=300)
    @given(kripke_frames(max_size=3), kripke_frames(max_size=3), st.data())
    def test_kripke_matches_definition(self, f1, f2, data):
        images = data.draw(st.lists(st.integers(0, f2.size - 1), min_size=f1.size,
                                    max_size=f1.size))
        f = Relation.from_function(images, f2.size)
        expect = oracles.is_morphism(images, f1, f2)
        assert (check_morphism(f, f1, f2) is None) == expect
        assert (check_morphism(f, kripke_to_nbd(f1), kripke_to_nbd(f2)) is None) == expect

    @settings(max_examples=200)
    @given(kripke_frames(max_size=3), st.data())
    def test_morphisms_are_bisimulations(self, f1, data):
        images = data.draw(st.lists(st.integers(0, f1.size - 1), min_size=f1.size,
                                    max_size=f1.size))
        f = Relation.from_function(images, f1.size)
        if check_morphism(f, f1, f1) is None:
            assert frame_violation(f1, f1, f) is None

    def test_model_literals(self):
        src = Model(cluster(2), Valuation.of({"p": [0, 1]}))
        dst = Model(POINT, Valuation.of({"p": []}))
        f = Relation.from_function([0, 0], 1)
        assert check_morphism(f, src, dst).condition == "lit"
        dst2 = Model(POINT, Valuation.of({"p": [0]}))
        src2 = Model(cluster(2), Valuation.of({"p": [0]}))
        assert check_morphism(f, src2, dst2, pvars=["p"]) is None
        assert check_morphism(f, src2, dst2).condition == "lit"


class TestReductions:
    def test_identity(self):
        assert is_reduction(Relation.identity(2), CHAIN, 3, CHAIN)

    def test_cluster_to_point(self):
        assert is_reduction(Relation.from_function([0, 0], 1), cluster(2), 3, cluster(1))

    def test_chain_has_no_reduction_to_cluster(self):
        c2 = cluster(2)
        for images in product(range(2), repeat=2):
            assert not is_reduction(Relation.from_function(list(images), 2), CHAIN, 3, c2)

    def test_cone_reindexing(self):
        # the cone {1} of the chain is an irreflexive point
        dead = KripkeFrame(1, (0,))
        assert is_reduction(Relation.from_function([0], 1), CHAIN, mask_of([1]), dead)
        assert is_reduction(Relation.from_function([0, 0], 1), CHAIN, mask_of([1]), dead)

    def test_not_a_cone(self):
        with pytest.raises(ValueError):
            is_reduction(Relation.from_function([0], 1), CHAIN, mask_of([0]), POINT)
