"""Named structures and a registry of re-runnable verification cases."""

from __future__ import annotations

import json
import random
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable

from . import kernels, randgen
from .bisim import (check_morphism, check_tau_bisim, check_zigzag_decomposition,
                    greatest_frame_bisim, greatest_tau_bisim, preserves,
                    zigzag_free_subrelation, zigzag_split)
from .formula import (TOP, And, Box, Dia, Formula, Lit, LiteralSet, Or, axioms, conj,
                      negate, to_text)
from .positivity import (SemanticClasses, Witness, check_monotone,
                         positivity_witness_search, verify_witness)
from .product import (check_product, max_product, positive_bound_check, preservation_suite)
from .structures import (KripkeFrame, Model, Relation, Valuation, frame_validity, full_mask,
                         holds_at, mask_of)

REPRO_DIR = Path(__file__).resolve().parents[2] / "repro"


# ---------------------------------------------------------------------------
# builders


def f0() -> KripkeFrame:
    """Five worlds, each seeing itself and everything below, plus 0 seeing 1."""
    edges = [(i, j) for i in range(5) for j in range(5) if i >= j] + [(0, 1)]
    return KripkeFrame.from_edges(5, edges)


def cluster(k: int) -> KripkeFrame:
    if k < 1:
        raise ValueError("cluster size must be at least 1")
    return KripkeFrame(k, (full_mask(k),) * k)


def dframe(k: int) -> KripkeFrame:
    """A k-cluster plus world k seeing every world."""
    if k < 1:
        raise ValueError("cluster size must be at least 1")
    return KripkeFrame(k + 1, (full_mask(k),) * k + (full_mask(k + 1),))


def _dia_plus(x: Formula) -> Formula:
    return Dia(And(And(Lit("s", False), Lit("r")), x))


def _dia_minus(x: Formula) -> Formula:
    return Dia(And(And(Lit("s", False), Lit("r", False)), x))


def _box_plus(x: Formula) -> Formula:
    return negate(_dia_plus(negate(x)))


def _box_minus(x: Formula) -> Formula:
    return negate(_dia_minus(negate(x)))


def phi_lin() -> Formula:
    p = Lit("p")
    return Or(And(_dia_minus(_dia_plus(Lit("p", False))), _box_plus(_box_minus(_box_plus(p)))),
              _box_plus(p))


def cluster_params(m: int) -> list[str]:
    return ["r"] if m == 1 else [f"r{j}" for j in range(m)]


def sign_patterns(m: int, count: int) -> list[tuple]:
    """The first ``count`` sign patterns over m parameters, counting in binary
    with the first parameter most significant and 0 meaning positive."""
    return [tuple(not (c >> (m - 1 - j)) & 1 for j in range(m)) for c in range(count)]


def phi_cluster(k: int, m: int) -> Formula:
    """``[]p | (~p & /\\_i <>(p & alpha_i))`` with distinct sign patterns alpha_i."""
    if not 2 <= k <= 2 ** m + 1:
        raise ValueError("need 2 <= k <= 2^m + 1")
    names = cluster_params(m)
    parts: list[Formula] = [Lit("p", False)]
    for pattern in sign_patterns(m, k - 1):
        alpha = conj(Lit(r, s) for r, s in zip(names, pattern))
        parts.append(Dia(Lit("p")) if alpha == TOP else Dia(And(Lit("p"), alpha)))
    return Or(Box(Lit("p")), conj(parts))


def cluster_models(k: int, m: int) -> tuple[Model, Model, Relation]:
    """Two valuations on the k-cluster and a directed bisimulation refuting positivity."""
    names = cluster_params(m)
    patterns = sign_patterns(m, k - 1)
    owner = [0, 0] + list(range(1, k - 1))
    params = {r: mask_of(w for w in range(k) if patterns[owner[w]][j])
              for j, r in enumerate(names)}
    full = full_mask(k)
    v1 = Valuation.of({"p": full & ~1, **params})
    v2 = Valuation.of({"p": full & ~2, **params})
    z = Relation.from_pairs(k, k, [(0, 0), (0, 1), (1, 0)] + [(i, i) for i in range(2, k)])
    return Model(cluster(k), v1), Model(cluster(k), v2), z


def f0_models() -> tuple[Model, Model, Relation]:
    v1 = Valuation.of({"p": [0], "r": [0, 2], "s": [4]})
    v2 = Valuation.of({"p": [0], "r": [0, 2], "s": [3]})
    z = Relation.from_pairs(5, 5, [(0, 0), (1, 1), (2, 2), (2, 0), (3, 1), (4, 3)])
    return Model(f0(), v1), Model(f0(), v2), z


# ---------------------------------------------------------------------------
# reports


@dataclass
class Check:
    name: str
    passed: bool
    detail: str = ""

    def to_json(self) -> dict:
        return {"name": self.name, "passed": self.passed, "detail": self.detail}


@dataclass
class CaseReport:
    case: str
    checks: list = field(default_factory=list)
    certificate: dict = field(default_factory=dict)
    seconds: float = 0.0

    @property
    def failures(self) -> int:
        return sum(not c.passed for c in self.checks)

    @property
    def passed(self) -> bool:
        return self.failures == 0

    def add(self, name: str, passed: bool, detail: str = "") -> bool:
        self.checks.append(Check(name, bool(passed), detail))
        return bool(passed)

    def to_json(self) -> dict:
        return {"case": self.case, "passed": self.passed, "failures": self.failures,
                "checks": [c.to_json() for c in self.checks],
                "certificate": self.certificate}

    def text(self) -> str:
        lines = [f"{self.case}: {'PASS' if self.passed else 'FAIL'}"]
        for c in self.checks:
            mark = "ok  " if c.passed else "FAIL"
            lines.append(f"  [{mark}] {c.name}" + (f": {c.detail}" if c.detail else ""))
        return "\n".join(lines)


def _witness_checks(rep: CaseReport, frame: KripkeFrame, phi: Formula, m1: Model, m2: Model,
                    z: Relation, pair: tuple, exhaustive: bool) -> None:
    names = sorted(set(m1.val.support) | set(m2.val.support))
    tau = LiteralSet.directed(["p"], names)
    mono = check_monotone(frame, phi, ["p"])
    rep.add("monotone in p (exhaustive)", mono.monotone,
            "" if mono.monotone else str(mono.to_json()))
    hit = check_tau_bisim(m1, m2, z, tau)
    rep.add("relation is a p-directed bisimulation", hit is None,
            "" if hit is None else hit.describe())
    w1, w2 = pair
    rep.add(f"formula true at world {w1} of the first model", holds_at(m1, w1, phi))
    rep.add(f"formula false at world {w2} of the second model", not holds_at(m2, w2, phi))
    rep.add(f"pair {pair} in relation", pair in z)
    cert = Witness(m1, m2, z, tau, pair, phi, phi).to_json()
    rep.add("certificate re-verifies", not verify_witness(cert))
    rep.certificate = cert
    mode = "exhaustive" if exhaustive else "sampled"
    found = positivity_witness_search(frame, phi, ["p"], mode, seed=0, trials=200,
                                      hints=None if exhaustive else [(m1.val, m2.val)])
    rep.add(f"witness search ({mode}) finds a witness", found.found,
            f"{found.pairs_checked} pairs checked")


def case_f0_lin() -> CaseReport:
    rep = CaseReport("f0-lin")
    m1, m2, z = f0_models()
    _witness_checks(rep, f0(), phi_lin(), m1, m2, z, (4, 3), exhaustive=False)
    g = greatest_tau_bisim(m1, m2, LiteralSet.directed(["p"], ["p", "r", "s"]))
    rep.add("greatest directed bisimulation contains the relation", z.issubset(g))
    return rep


def _case_cluster(k: int, m: int) -> Callable[[], CaseReport]:
    def run() -> CaseReport:
        rep = CaseReport(f"cluster-{k}-{m}")
        m1, m2, z = cluster_models(k, m)
        _witness_checks(rep, cluster(k), phi_cluster(k, m), m1, m2, z, (0, 0), exhaustive=True)
        return rep
    return run


def _dk_adjusted(k: int, val: Valuation, w: int) -> Valuation:
    """Copy of ``val`` with world k given the values of world w."""
    out = {}
    for name, x in val.as_dict().items():
        bit = (x >> w) & 1
        out[name] = (x & ~(1 << k)) | (bit << k)
    return Valuation.of(out)


def _case_dk_qqq(k: int) -> Callable[[], CaseReport]:
    def run() -> CaseReport:
        rep = CaseReport(f"dk-qqq-{k}")
        frame = dframe(k)
        n = k + 1
        succ = list(frame.succ)
        bad = []
        total = 0
        for code in range(1, 1 << (n * n)):
            rows = [(code >> (w * n)) & full_mask(n) for w in range(n)]
            is_bisim = kernels.kripke_violation(succ, succ, rows) is None
            inner = Relation(k, k, tuple(r & full_mask(k) for r in rows[:k]))
            total += 1
            if is_bisim != inner.is_full():
                bad.append(rows)
        rep.add(f"nonempty relation is a bisimulation iff its cluster part is full "
                f"({total} relations)", not bad, f"first mismatch {bad[0]}" if bad else "")
        # morphism and bisimulation steps used to move a world into the cluster
        mism = 0
        for code in range(1 << n):
            val = Valuation(("p",), (code,))
            for w in range(k):
                moved = Model(frame, _dk_adjusted(k, val, w))
                f = Relation.from_function(list(range(k)) + [w], n)
                if check_morphism(f, moved, Model(frame, val)) is not None:
                    mism += 1
                back = Relation.from_pairs(n, n, [(w, k)] + [(i, i) for i in range(k)])
                if check_tau_bisim(Model(frame, val), Model(frame, _dk_adjusted(k, val, w)),
                                   back, LiteralSet.all_over(["p"])) is not None:
                    mism += 1
        rep.add("top world folds onto a cluster world by a morphism and a bisimulation",
                mism == 0, f"{mism} failures" if mism else "")
        return rep
    return run


def ppqq_trials(trials: int = 1000, seed: int = 0, max_side: int = 6) -> list[str]:
    """Random full relations; returns descriptions of any bad decompositions."""
    rng = random.Random(seed)
    failures = []
    for t in range(trials):
        z = randgen.full_relation(rng, rng.randint(1, max_side), rng.randint(1, max_side),
                                  rng.uniform(0.1, 0.9))
        d = zigzag_free_subrelation(z)
        z0 = d.union
        if not (z0.is_full() and z0.issubset(z) and check_zigzag_decomposition(z0, d)):
            failures.append(f"trial {t}: {z.to_json()}")
    return failures


def case_ppqq() -> CaseReport:
    rep = CaseReport("ppqq-prop")
    failures = ppqq_trials()
    rep.add("1000 random full relations yield full zigzag-free subrelations", not failures,
            failures[0] if failures else "")
    return rep


def dk_lpp_sweep(k: int = 2, max_size: int = 6) -> dict:
    """Every single-variable formula class up to ``max_size`` that is monotone on
    the k-frame must admit no directed-bisimulation witness."""
    frame = dframe(k)
    classes = SemanticClasses(frame, ["p"], LiteralSet.all_over(["p"]), max_size)
    monotone = 0
    refuted = []
    total = 0
    for form, _, _ in classes:
        total += 1
        if not check_monotone(frame, form, ["p"]).monotone:
            continue
        monotone += 1
        res = positivity_witness_search(frame, form, ["p"], "exhaustive")
        if res.found:
            refuted.append(to_text(form))
    return {"classes": total, "monotone": monotone, "refuted": refuted,
            "candidates": classes.checked}


def case_dk_lpp() -> CaseReport:
    rep = CaseReport("dk-lpp-sample")
    out = dk_lpp_sweep()
    rep.add(f"no witness for any of {out['monotone']} monotone classes "
            f"({out['classes']} classes of size <= 6)", not out["refuted"],
            ", ".join(out["refuted"][:3]))
    return rep


# ---------------------------------------------------------------------------
# products


def random_product_input(rng: random.Random, max_worlds: int = 4):
    """Two monotone frames and a full bisimulation between them, carrier <= 12."""
    while True:
        flags = dict(reflexive=rng.random() < 0.5, transitive=rng.random() < 0.5,
                     serial=rng.random() < 0.5)
        how = rng.random()
        if how < 0.4:
            f1 = randgen.monotone_frame(rng, rng.randint(1, max_worlds), **flags)
            f2 = f1
        elif how < 0.8:
            f2 = randgen.monotone_frame(rng, rng.randint(1, max_worlds - 1), **flags)
            f1, _ = randgen.preimage_frame(rng, f2, rng.randint(f2.size, max_worlds))
            if rng.random() < 0.5:
                f1, f2 = f2, f1
        else:
            f1 = randgen.monotone_frame(rng, rng.randint(1, max_worlds), **flags)
            f2 = randgen.monotone_frame(rng, rng.randint(1, max_worlds), **flags)
        z = greatest_frame_bisim(f1, f2)
        if z.is_full() and len(z) <= 12:
            return f1, f2, z


def product_trials(pairs: int = 100, instances: int = 300, alphas: int = 200,
                   seed: int = 0) -> dict:
    rng = random.Random(seed)
    ax = axioms()
    base = {name: ax[name] for name in ("AT", "A4", "AP")}
    failures: list[str] = []
    counts = {"pairs": 0, "axioms_checked": 0, "instances": 0, "alphas": 0}
    built = []
    for _ in range(pairs):
        f1, f2, z = random_product_input(rng)
        p = max_product(f1, f2, z)
        built.append((f1, f2, p))
        counts["pairs"] += 1
        hit = check_product(p, f1, f2, seed=rng.getrandbits(32))
        if hit is not None:
            failures.append(f"check_product: {hit.to_json()}")
        for rep in preservation_suite(f1, f2, z, base, product=p):
            if rep.status == "preserved":
                counts["axioms_checked"] += 1
            elif rep.status == "violated":
                failures.append(f"{rep.name} not preserved: {rep.detail}")
    vocab = LiteralSet(["p"], [])
    attempts = 0
    while counts["instances"] < instances and attempts < 200 * instances:
        attempts += 1
        f1, f2, p = built[rng.randrange(len(built))]
        alpha = randgen.formula(rng, vocab, rng.randint(0, 3), 7)
        inst = Or(negate(alpha), Dia(Lit("p")))
        if frame_validity(f1, inst) is not None or frame_validity(f2, inst) is not None:
            continue
        counts["instances"] += 1
        cm = frame_validity(p.frame, inst)
        if cm is not None:
            failures.append(f"{to_text(inst)} not preserved")
    while counts["alphas"] < alphas:
        f1, f2, p = built[rng.randrange(len(built))]
        alpha = randgen.formula(rng, vocab, rng.randint(0, 3), 9)
        counts["alphas"] += 1
        x = positive_bound_check(p, f1, f2, alpha)
        if x is not None:
            failures.append(f"bound fails for {to_text(alpha)} at {x}")
    counts["failures"] = failures
    return counts


def case_product() -> CaseReport:
    rep = CaseReport("product-preserv")
    out = product_trials()
    rep.add(f"{out['pairs']} products: equations, monotonicity, maximality; "
            f"{out['axioms_checked']} axiom validities, {out['instances']} "
            f"alpha -> <>p instances, {out['alphas']} positive bounds",
            not out["failures"], "; ".join(out["failures"][:3]))
    return rep


# ---------------------------------------------------------------------------
# zigzag-free preservation


def _compatible_valuations(rng: random.Random, z: Relation, n1: int, n2: int,
                           pvar: str, others: list[str]) -> tuple[Valuation, Valuation]:
    """Valuations making ``z`` a directed bisimulation for ``pvar``."""
    parent = list(range(n1 + n2))

    def find(a):
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    for a, b in z.pairs:
        parent[find(a)] = find(n1 + b)
    v1: dict = {}
    v2: dict = {}
    for q in others:
        bit = {}
        x1 = x2 = 0
        for w in range(n1 + n2):
            root = find(w)
            if root not in bit:
                bit[root] = rng.random() < 0.5
            if bit[root]:
                if w < n1:
                    x1 |= 1 << w
                else:
                    x2 |= 1 << (w - n1)
        v1[q], v2[q] = x1, x2
    p1 = rng.getrandbits(n1)
    p2 = z.image(p1) | (rng.getrandbits(n2) if rng.random() < 0.5 else 0)
    v1[pvar], v2[pvar] = p1, p2
    return Valuation.of(v1), Valuation.of(v2)


def _zigzag_free_bisims(frame: KripkeFrame) -> tuple[list, list, list]:
    """Self-bisimulations of ``frame`` that split, grouped as functional,
    inverse functional and mixed. Frames above 3 worlds only get morphisms."""
    n = frame.size
    succ = list(frame.succ)
    groups: tuple[list, list, list] = ([], [], [])
    if n <= 3:
        for code in range(1, 1 << (n * n)):
            rows = [(code >> (w * n)) & full_mask(n) for w in range(n)]
            if kernels.kripke_violation(succ, succ, rows) is None:
                z = Relation(n, n, tuple(rows))
                d = zigzag_split(z)
                if d is None:
                    continue
                if not d.inverse_functional.pairs:
                    groups[0].append(z)
                elif not d.functional.pairs:
                    groups[1].append(z)
                else:
                    groups[2].append(z)
        return groups
    for code in range(n ** n):
        images = [(code // n ** w) % n for w in range(n)]
        f = Relation.from_function(images, n)
        if kernels.kripke_violation(succ, succ, list(f.rows)) is None:
            groups[0].append(f)
            groups[1].append(f.inverse())
    return groups


def zigzag_preservation_trials(trials: int = 500, seed: int = 0) -> dict:
    """Monotone formulas are preserved under zigzag-free directed bisimulations."""
    rng = random.Random(seed)
    failures = []
    kinds = {"mixed": 0, "functional": 0, "inverse": 0}
    done = 0
    vocab = LiteralSet.all_over(["p", "q"])
    cache: dict = {}
    while done < trials:
        if rng.random() < 0.25:
            kk = rng.randint(1, 3)
            frame = dframe(kk)
            inner = randgen.full_relation(rng, kk, kk, rng.uniform(0.3, 0.9))
            d = zigzag_free_subrelation(inner)
            rows = [r for r in d.union.rows] + [1 << kk]
            z = Relation(kk + 1, kk + 1, tuple(rows))
        else:
            frame = randgen.kripke_frame(rng, rng.randint(1, 4), rng.uniform(0.2, 0.8))
            if frame not in cache:
                cache[frame] = _zigzag_free_bisims(frame)
            groups = [g for g in cache[frame] if g]
            if not groups:
                continue
            group = groups[rng.randrange(len(groups))]
            z = group[rng.randrange(len(group))]
        split = zigzag_split(z)
        if split is None:
            failures.append(f"relation not zigzag-free: {z.to_json()}")
            done += 1
            continue
        f = None
        for _ in range(50):
            cand = randgen.formula(rng, vocab, rng.randint(0, 3), 10)
            if check_monotone(frame, cand, ["p"]).monotone:
                f = cand
                break
        if f is None:
            continue
        v1, v2 = _compatible_valuations(rng, z, frame.size, frame.size, "p", ["q"])
        m1, m2 = Model(frame, v1), Model(frame, v2)
        tau = LiteralSet.directed(["p"], ["p", "q"])
        hit = check_tau_bisim(m1, m2, z, tau)
        if hit is not None:
            failures.append(f"generator produced a non-bisimulation: {hit.describe()}")
        elif preserves(z, m1, m2, f) is not None:
            failures.append(f"{to_text(f)} not preserved under {z.to_json()}")
        if split.functional.pairs and split.inverse_functional.pairs:
            kinds["mixed"] += 1
        elif split.inverse_functional.pairs:
            kinds["inverse"] += 1
        else:
            kinds["functional"] += 1
        done += 1
    return {"trials": done, "kinds": kinds, "failures": failures}


# ---------------------------------------------------------------------------
# registry


CASES: dict[str, Callable[[], CaseReport]] = {
    "f0-lin": case_f0_lin,
    "cluster-2-0": _case_cluster(2, 0),
    "cluster-3-1": _case_cluster(3, 1),
    "dk-qqq-2": _case_dk_qqq(2),
    "dk-qqq-3": _case_dk_qqq(3),
    "ppqq-prop": case_ppqq,
    "dk-lpp-sample": case_dk_lpp,
    "product-preserv": case_product,
}


def list_cases() -> list[str]:
    return list(CASES)


def run_case(case_id: str) -> CaseReport:
    try:
        fn = CASES[case_id]
    except KeyError:
        raise KeyError(f"unknown case {case_id!r}; known: {', '.join(CASES)}") from None
    start = time.perf_counter()
    rep = fn()
    rep.seconds = time.perf_counter() - start
    return rep


def case_document(case_id: str) -> dict:
    """The inputs of a case as a JSON document, as shipped under ``repro/``."""
    doc: dict = {"id": case_id}
    if case_id == "f0-lin":
        m1, m2, z = f0_models()
        doc.update(formula=to_text(phi_lin()), m1=m1.to_json(), m2=m2.to_json(),
                   z=z.to_json(), tau=LiteralSet.directed(["p"], ["p", "r", "s"]).to_json(),
                   worlds=[4, 3], pvars=["p"])
    elif case_id.startswith("cluster-"):
        k, m = (int(x) for x in case_id.split("-")[1:])
        m1, m2, z = cluster_models(k, m)
        names = sorted(m1.val.support)
        doc.update(formula=to_text(phi_cluster(k, m)), m1=m1.to_json(), m2=m2.to_json(),
                   z=z.to_json(), tau=LiteralSet.directed(["p"], names).to_json(),
                   worlds=[0, 0], pvars=["p"])
    elif case_id.startswith("dk-qqq-"):
        doc.update(frame=dframe(int(case_id[-1])).to_json())
    elif case_id == "ppqq-prop":
        doc.update(trials=1000, seed=0, max_side=6)
    elif case_id == "dk-lpp-sample":
        doc.update(frame=dframe(2).to_json(), max_size=6, pvars=["p"])
    elif case_id == "product-preserv":
        doc.update(pairs=100, instances=300, alphas=200, seed=0, max_worlds=4,
                   axioms=["AT", "A4", "AP"])
    else:
        raise KeyError(case_id)
    return doc


def write_case_files(directory: Path = REPRO_DIR) -> list[Path]:
    directory.mkdir(parents=True, exist_ok=True)
    out = []
    for case_id in CASES:
        path = directory / f"{case_id}.json"
        path.write_text(json.dumps(case_document(case_id), indent=2, sort_keys=True) + "\n")
        out.append(path)
    return out
