"""Command-line front end: ``modlab <subcommand> ...``.

Exit codes: 0 verdict computed and asserted checks passed, 1 a checked
property failed, 2 usage or input format error, 3 resource guard exceeded.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path
from typing import Any

from . import bisim, positivity, product, repro
from .errors import FormatError, GuardExceeded
from .formula import (LiteralSet, ParseError, axioms, is_positive, lits, modal_depth,
                      parse, size, to_text)
from .structures import (Model, Relation, evaluate, frame_from_json,
                         frame_validity, members)

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_GUARD = 0, 1, 2, 3


class UsageError(Exception):
    pass


def _load_json(value: str, what: str) -> Any:
    text = value
    if not value.lstrip().startswith(("{", "[")):
        try:
            text = Path(value).read_text()
        except OSError as e:
            raise UsageError(f"--{what}: cannot read {value!r}: {e.strerror}") from None
    try:
        return json.loads(text)
    except json.JSONDecodeError as e:
        raise UsageError(f"--{what}: invalid JSON at line {e.lineno} column {e.colno}: "
                         f"{e.msg}") from None


def _in(what: str, fn, value):
    try:
        return fn(value)
    except FormatError as e:
        raise UsageError(f"--{what}: {e}") from None
    except (KeyError, TypeError, ValueError, AttributeError) as e:
        raise UsageError(f"--{what}: {e}") from None


def _frame(args, name="frame"):
    obj = _load_json(getattr(args, name.replace("-", "_")), name)
    if isinstance(obj, dict) and "frame" in obj and "type" not in obj:
        obj = obj["frame"]
    return _in(name, frame_from_json, obj)


def _model(args, name):
    return _in(name, Model.from_json, _load_json(getattr(args, name), name))


def _relation(args, name="z"):
    return _in(name, Relation.from_json, _load_json(getattr(args, name), name))


def _tau(args, name="tau"):
    return _in(name, LiteralSet.from_json, _load_json(getattr(args, name), name))


def _formula(text: str, name: str = "formula"):
    try:
        return parse(text)
    except ParseError as e:
        raise UsageError(f"--{name}: {e}") from None


def _pvars(args) -> list[str]:
    out = []
    for item in args.p or []:
        out.extend(x for x in item.split(",") if x)
    return out


def _dump(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True)


def _emit(args, payload: dict, text: str, cert: dict | None = None) -> None:
    if args.format == "json":
        print(_dump(payload))
    else:
        print(text)
    if args.out and cert is not None:
        Path(args.out).write_text(_dump(cert) + "\n")


def _set_text(x: int) -> str:
    return "{" + ", ".join(str(w) for w in members(x)) + "}"


# ---------------------------------------------------------------------------
# subcommands


def cmd_parse(args) -> int:
    f = _formula(args.formula_text, "formula")
    ls = lits(f)
    payload = {"formula": to_text(f), "size": size(f), "depth": modal_depth(f),
               "positive": is_positive(f), "lits": ls.to_json()}
    _emit(args, payload, to_text(f))
    return EXIT_OK


def cmd_eval(args) -> int:
    m = _model(args, "model")
    f = _formula(args.formula)
    truth = evaluate(m, f)
    payload: dict = {"formula": to_text(f), "truth_set": members(truth)}
    text = f"{to_text(f)} holds at {_set_text(truth)}"
    code = EXIT_OK
    if args.world is not None:
        if not 0 <= args.world < m.frame.size:
            raise UsageError(f"--world: {args.world} outside 0..{m.frame.size - 1}")
        holds = bool(truth >> args.world & 1)
        payload["world"] = args.world
        payload["holds"] = holds
        text += f"\nworld {args.world}: {'true' if holds else 'false'}"
        if args.expect is not None and holds != (args.expect == "true"):
            payload["expectation_failed"] = True
            text += f" (expected {args.expect})"
            code = EXIT_FAIL
    _emit(args, payload, text)
    return code


def cmd_validity(args) -> int:
    frame = _frame(args)
    f = _formula(args.formula)
    cm = frame_validity(frame, f, args.guard_bits)
    if cm is None:
        _emit(args, {"valid": True}, "valid")
        return EXIT_OK
    payload = {"valid": False, "countermodel": cm.to_json()}
    _emit(args, payload, f"invalid: fails at world {cm.world} under "
          f"{json.dumps(cm.valuation.to_json(), sort_keys=True)}", payload)
    return EXIT_FAIL


def cmd_monotone(args) -> int:
    frame = _frame(args)
    f = _formula(args.formula)
    v = positivity.check_monotone(frame, f, _pvars(args), args.guard_bits)
    payload = v.to_json()
    if v.monotone:
        _emit(args, payload, "monotone")
        return EXIT_OK
    _emit(args, payload, "not monotone: true at world "
          f"{v.world} under {json.dumps(v.val1.to_json(), sort_keys=True)}, false under "
          f"{json.dumps(v.val2.to_json(), sort_keys=True)}", payload)
    return EXIT_FAIL


def cmd_bisim_check(args) -> int:
    if args.cert:
        cert = _load_json(args.cert, "cert")
        failures = _in("cert", positivity.verify_witness, cert)
        payload = {"verified": not failures, "failures": failures}
        _emit(args, payload, "certificate verified" if not failures
              else "certificate rejected:\n  " + "\n  ".join(failures))
        return EXIT_OK if not failures else EXIT_FAIL
    for name in ("m1", "m2", "z", "tau"):
        if getattr(args, name) is None:
            raise UsageError(f"--{name} is required unless --cert is given")
    m1, m2, z, tau = _model(args, "m1"), _model(args, "m2"), _relation(args), _tau(args)
    hit = _in("z", lambda _: bisim.check_tau_bisim(m1, m2, z, tau), None)
    if hit is None:
        _emit(args, {"bisimulation": True}, "ok: relation is a tau-bisimulation")
        return EXIT_OK
    payload = {"bisimulation": False, "violation": hit.to_json()}
    _emit(args, payload, f"violation: {hit.describe()}", payload)
    return EXIT_FAIL


def cmd_bisim_greatest(args) -> int:
    m1, m2, tau = _model(args, "m1"), _model(args, "m2"), _tau(args)
    z = _in("m1", lambda _: bisim.greatest_tau_bisim(m1, m2, tau), None)
    payload = z.to_json()
    _emit(args, payload, f"{len(z)} pairs: {z.pairs}", payload)
    return EXIT_OK


def cmd_zigzag_split(args) -> int:
    z = _relation(args)
    d = _in("z", bisim.zigzag_free_subrelation, z)
    ok = bisim.check_zigzag_decomposition(d.union, d)
    payload = d.to_json()
    payload["verified"] = ok
    _emit(args, payload, f"functional part: {d.functional.pairs}\n"
          f"inverse functional part: {d.inverse_functional.pairs}", payload)
    return EXIT_OK if ok else EXIT_FAIL


def _frame_or_model(args, name):
    obj = _load_json(getattr(args, name), name)
    if isinstance(obj, dict) and "frame" in obj:
        return _in(name, Model.from_json, obj)
    return _in(name, frame_from_json, obj)


def cmd_morphism_check(args) -> int:
    src = _frame_or_model(args, "src")
    dst = _frame_or_model(args, "dst")
    raw = _load_json(args.map, "map")
    if isinstance(raw, list):
        f = _in("map", lambda xs: Relation.from_function([int(x) for x in xs], dst_size(dst)),
                raw)
    else:
        f = _in("map", Relation.from_json, raw)
    hit = _in("map", lambda _: bisim.check_morphism(f, src, dst, _pvars(args) or None), None)
    if hit is None:
        _emit(args, {"morphism": True}, "ok: morphism")
        return EXIT_OK
    payload = {"morphism": False, "violation": hit.to_json()}
    _emit(args, payload, f"violation: {hit.describe()}", payload)
    return EXIT_FAIL


def dst_size(x) -> int:
    return x.frame.size if isinstance(x, Model) else x.size


def cmd_positive_search(args) -> int:
    frame = _frame(args)
    f = _formula(args.formula)
    res = positivity.positivity_witness_search(frame, f, _pvars(args), args.mode, args.seed,
                                               args.trials, guard_bits=args.guard_bits)
    payload = res.to_json()
    if res.found:
        w = res.witness
        text = (f"witness: pair {w.pair}, first valuation "
                f"{json.dumps(w.m1.val.to_json(), sort_keys=True)}, second valuation "
                f"{json.dumps(w.m2.val.to_json(), sort_keys=True)}")
    elif res.status == "none-found":
        text = ("no witness among all model pairs"
                + (": equivalent to a positive formula on this frame" if res.complete
                   else " (neighborhood frame: no conclusion about positive equivalents)"))
    else:
        text = f"no witness in {res.pairs_checked} sampled pairs (seed {res.seed})"
    _emit(args, payload, text, res.witness.to_json() if res.found else payload)
    return EXIT_OK


def _synth_text(res) -> str:
    if res.found is not None:
        return f"found {to_text(res.found)} (size {res.size}, {res.candidates_checked} candidates)"
    return (f"none up to size {res.bound_reached} "
            f"({res.candidates_checked} candidates, {res.classes} classes)")


def cmd_positive_synth(args) -> int:
    frame = _frame(args)
    f = _formula(args.formula)
    res = positivity.synthesize_positive(frame, f, _pvars(args), args.max_size, args.guard_bits)
    payload = res.to_json()
    _emit(args, payload, _synth_text(res), payload)
    return EXIT_OK


def cmd_interpolant(args) -> int:
    frame = _frame(args)
    f = _formula(args.formula)
    g = _formula(args.formula2, "formula2")
    tau = _tau(args)
    search = positivity.interpolant_witness_search(frame, f, g, tau, args.mode, args.seed,
                                                   args.trials, guard_bits=args.guard_bits)
    payload: dict = {"search": search.to_json()}
    if search.found:
        text = f"no interpolant: witness at pair {search.witness.pair}"
        cert = search.witness.to_json()
    else:
        synth = positivity.synthesize_interpolant(frame, f, g, tau, args.max_size,
                                                  args.guard_bits)
        payload["synthesis"] = synth.to_json()
        text = f"no witness ({search.status}); synthesis: {_synth_text(synth)}"
        cert = payload
    _emit(args, payload, text, cert)
    return EXIT_OK


def cmd_product(args) -> int:
    f1 = _frame(args, "f1")
    f2 = _frame(args, "f2")
    z = _relation(args)
    p = _in("z", lambda _: product.max_product(f1, f2, z), None)
    hit = product.check_product(p, f1, f2, seed=args.seed)
    table = axioms()
    names = [a for a in (args.axioms or "").split(",") if a]
    unknown = [a for a in names if a not in table]
    if unknown:
        raise UsageError(f"--axioms: unknown axiom {unknown[0]!r}; known: {', '.join(table)}")
    reports = product.preservation_suite(f1, f2, z, {a: table[a] for a in names}, product=p)
    payload = {"product": p.to_json(), "check": None if hit is None else hit.to_json(),
               "axioms": [r.to_json() for r in reports]}
    lines = [f"product on {p.size} pairs: " + ("equations, monotonicity and maximality ok"
                                               if hit is None else f"violation {hit.to_json()}")]
    lines += [f"  {r.name}: {r.status}" + (f" ({r.detail})" if r.detail else "")
              for r in reports]
    _emit(args, payload, "\n".join(lines), payload)
    failed = hit is not None or any(r.status == "violated" for r in reports)
    return EXIT_FAIL if failed else EXIT_OK


def cmd_repro(args) -> int:
    if args.list:
        for c in repro.list_cases():
            print(c)
        return EXIT_OK
    ids = repro.list_cases() if args.case in (None, "all") else [args.case]
    if args.case not in (None, "all") and args.case not in repro.CASES:
        raise UsageError(f"case: unknown id {args.case!r}; known: {', '.join(repro.CASES)}")
    reports = [repro.run_case(c) for c in ids]
    payload = {"cases": [r.to_json() for r in reports]}
    _emit(args, payload, "\n".join(r.text() for r in reports),
          payload if len(reports) > 1 else reports[0].to_json())
    return EXIT_OK if all(r.passed for r in reports) else EXIT_FAIL


# ---------------------------------------------------------------------------
# argument parsing


def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--trials", type=_positive_int, default=1000)
    p.add_argument("--max-size", type=_positive_int, default=6)
    p.add_argument("--guard-bits", type=_positive_int, default=None)
    p.add_argument("--mode", choices=["exhaustive", "sampled"], default="exhaustive")
    p.add_argument("--out", help="write a certificate to this path")
    p.add_argument("--format", choices=["json", "text"], default="text")


def _positive_int(text: str) -> int:
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}") from None
    if v < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {v}")
    return v


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="modlab", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)

    def add(name, fn, help_text):
        p = sub.add_parser(name, help=help_text)
        _common(p)
        p.set_defaults(func=fn)
        return p

    p = add("parse", cmd_parse, "normalize a formula and print it")
    p.add_argument("formula_text", metavar="FORMULA")

    p = add("eval", cmd_eval, "truth set of a formula in a model")
    p.add_argument("--model", required=True)
    p.add_argument("--formula", required=True)
    p.add_argument("--world", type=int)
    p.add_argument("--expect", choices=["true", "false"])

    p = add("validity", cmd_validity, "exhaustive frame validity")
    p.add_argument("--frame", required=True)
    p.add_argument("--formula", required=True)

    p = add("monotone", cmd_monotone, "exhaustive monotonicity in the given variables")
    p.add_argument("--frame", required=True)
    p.add_argument("--formula", required=True)
    p.add_argument("--p", action="append", help="monotone variable (repeatable)")

    p = add("bisim-check", cmd_bisim_check, "check a tau-bisimulation or a witness certificate")
    p.add_argument("--m1")
    p.add_argument("--m2")
    p.add_argument("--z")
    p.add_argument("--tau")
    p.add_argument("--cert")

    p = add("bisim-greatest", cmd_bisim_greatest, "greatest tau-bisimulation")
    p.add_argument("--m1", required=True)
    p.add_argument("--m2", required=True)
    p.add_argument("--tau", required=True)

    p = add("zigzag-split", cmd_zigzag_split, "zigzag-free full subrelation of a full relation")
    p.add_argument("--z", required=True)

    p = add("morphism-check", cmd_morphism_check, "check a morphism of frames or models")
    p.add_argument("--src", required=True)
    p.add_argument("--dst", required=True)
    p.add_argument("--map", required=True, help="relation JSON or a list of images")
    p.add_argument("--p", action="append")

    p = add("positive-search", cmd_positive_search, "search for a positivity witness")
    p.add_argument("--frame", required=True)
    p.add_argument("--formula", required=True)
    p.add_argument("--p", action="append")

    p = add("positive-synth", cmd_positive_synth, "bounded search for a positive equivalent")
    p.add_argument("--frame", required=True)
    p.add_argument("--formula", required=True)
    p.add_argument("--p", action="append")

    p = add("interpolant", cmd_interpolant, "interpolant witness search, then synthesis")
    p.add_argument("--frame", required=True)
    p.add_argument("--formula", required=True)
    p.add_argument("--formula2", required=True)
    p.add_argument("--tau", required=True)

    p = add("product", cmd_product, "maximal bisimulation product and its checks")
    p.add_argument("--f1", required=True)
    p.add_argument("--f2", required=True)
    p.add_argument("--z", required=True)
    p.add_argument("--axioms", default="", help="comma separated axiom names, e.g. AT,A4,AP")

    p = add("repro", cmd_repro, "run registered verification cases")
    p.add_argument("case", nargs="?", help="case id, or 'all'")
    p.add_argument("--list", action="store_true")
    return ap


def main(argv: list[str] | None = None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as e:
        return EXIT_USAGE if e.code else EXIT_OK
    try:
        return args.func(args)
    except UsageError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except GuardExceeded as e:
        print(f"guard exceeded: {e}", file=sys.stderr)
        return EXIT_GUARD
    except (FormatError, ParseError, ValueError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
