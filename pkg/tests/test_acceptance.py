"""End-to-end acceptance battery.

Ten numbered checks, each asserting a behavioral contract of the whole
stack and registering one PASS/FAIL verdict line (replayed in a terminal
section after the run; also printed here for captured output).

The corpora are built once per module: a thousand well-typed programs at
depth 6 across the box-density spectrum, and their box-dropped
perturbations. Checks 1-3, 9, and 10 share them.
"""

import random
import time
from dataclasses import replace

import pytest

import conftest
from capcheck.adapt_term import adapt_sub, box_adapt, infer
from capcheck.adapt_type import box_adapt_t, infer_t
from capcheck.checker import typecheck
from capcheck.errors import CheckError, EscapeViolation, FuelExhausted
from capcheck.fsub import erase, erase_env, fsub_typecheck
from capcheck.harness import (
    GenConfig,
    drop_boxes,
    gen_env,
    gen_supertype_of,
    gen_type,
    gen_welltyped,
)
from capcheck.normalize import normalize
from capcheck.subtyping import DEFAULT_FUEL, Fuel, subtype, subtype_capt
from capcheck.syntax import (
    Kind,
    NameSupply,
    VarRef,
    alpha_eq,
    cv,
    parse_capture_set,
    parse_env,
    parse_term,
    parse_type,
    show,
)

SEED = 20_260_817
BIASES = (0.0, 0.25, 0.5, 0.75, 1.0)

ENV = parse_env(
    """
    io : {cap} Top
    c : Box {io} Top
    b : Box {cap} Top
    y : {io} Top
    g : all (z: Box {io} Top) -> Top
    f : {io} all (op: {io} all (u: Top) -> Top) -> Top
    """
)


def _verdict(num: int, label: str, ok: bool, detail: str) -> None:
    line = f"criterion {num:2d} {'PASS' if ok else 'FAIL'} {label}: {detail}"
    conftest.verdicts.append(line)
    print(line)
    assert ok, line


def _var(name: str):
    return next(b.var for b in ENV.bindings if b.var.name == name)


@pytest.fixture(scope="module")
def welltyped():
    t0 = time.monotonic()
    cases = []
    for i in range(1000):
        cfg = GenConfig(seed=SEED + i, max_depth=6, box_bias=BIASES[i % len(BIASES)])
        env, t = gen_welltyped(cfg)
        cases.append((cfg, env, t))
    return {"cases": cases, "gen_seconds": time.monotonic() - t0}


@pytest.fixture(scope="module")
def perturbed(welltyped):
    t0 = time.monotonic()
    cases = [(cfg, env, drop_boxes(t, cfg)) for cfg, env, t in welltyped["cases"]]
    return {"cases": cases, "gen_seconds": time.monotonic() - t0}


def test_criterion_1_completeness_round_trip(welltyped):
    t0 = time.monotonic()
    failures = 0
    for _, env, t in welltyped["cases"]:
        want = typecheck(env, t)
        term2, ty = infer(env, t)
        if not (alpha_eq(term2, t) and alpha_eq(ty, want)):
            failures += 1
    elapsed = welltyped["gen_seconds"] + time.monotonic() - t0
    _verdict(1, "completeness round-trip", failures == 0 and elapsed < 60,
             f"{len(welltyped['cases'])} well-typed terms, {failures} failures, "
             f"{elapsed:.1f}s (< 60s)")


def test_criterion_2_soundness_on_perturbed(perturbed):
    t0 = time.monotonic()
    failures = 0
    accepted = 0
    for _, env, t in perturbed["cases"]:
        try:
            term2, claimed = infer(env, t)
        except CheckError:
            continue
        accepted += 1
        try:
            got = typecheck(env, term2)
        except CheckError:
            failures += 1
            continue
        if not subtype(env, got, claimed):
            failures += 1
    elapsed = perturbed["gen_seconds"] + time.monotonic() - t0
    _verdict(2, "soundness after box dropping", failures == 0 and elapsed < 60,
             f"{len(perturbed['cases'])} perturbed programs, {accepted} accepted, "
             f"{failures} failures, {elapsed:.1f}s (< 60s)")


def test_criterion_3_term_and_type_engines_agree(welltyped, perturbed):
    failures = 0
    for _, env, t in welltyped["cases"] + perturbed["cases"]:
        try:
            term2, ty = infer(env, t)
            a = ("accept", term2, ty)
        except CheckError as e:
            a = ("reject", type(e).__name__)
        try:
            ty_b, cs = infer_t(env, t)
            b = ("accept", ty_b, cs)
        except CheckError as e:
            b = ("reject", type(e).__name__)
        if a[0] != b[0]:
            failures += 1
        elif a[0] == "accept":
            if not (alpha_eq(a[2], b[1]) and b[2] == cv(a[1])):
                failures += 1
        elif a[1] != b[1]:
            failures += 1
    total = len(welltyped["cases"]) + len(perturbed["cases"])
    _verdict(3, "term/type engine equivalence", failures == 0,
             f"{total} cases, {failures} disagreements")


def test_criterion_4_subtyping_laws():
    refl_failures = 0
    for i in range(1000):
        rng = random.Random(SEED ^ 0x5EF1 ^ i)
        supply = NameSupply()
        cfg = GenConfig(seed=SEED + i, box_bias=BIASES[i % len(BIASES)])
        env = gen_env(rng, cfg, supply)
        t = gen_type(rng, env, 4, supply, cfg.box_bias)
        if not subtype(env, t, t):
            refl_failures += 1

    trans_failures = 0
    for i in range(1000):
        rng = random.Random(SEED ^ 0x7245 ^ i)
        supply = NameSupply()
        cfg = GenConfig(seed=SEED + i, box_bias=BIASES[i % len(BIASES)])
        env = gen_env(rng, cfg, supply)
        mid = gen_type(rng, env, 4, supply, cfg.box_bias)
        lo = gen_supertype_of(rng, env, mid, supply)  # lo is above mid
        hi = gen_supertype_of(rng, env, lo, supply)
        if not (subtype(env, mid, lo) and subtype(env, lo, hi)):
            trans_failures += 1  # premises must be derivable by construction
        elif not subtype(env, mid, hi):
            trans_failures += 1
    _verdict(4, "reflexivity and transitivity",
             refl_failures == 0 and trans_failures == 0,
             f"1000 types, {refl_failures} reflexivity failures; "
             f"1000 triples, {trans_failures} transitivity failures")


def test_criterion_5_direct_and_inlined_routes_agree():
    failures = 0
    for i in range(1000):
        rng = random.Random(SEED ^ 0xCA97 ^ i)
        supply = NameSupply()
        cfg = GenConfig(seed=SEED + i, box_bias=BIASES[i % len(BIASES)])
        env = gen_env(rng, cfg, supply)
        t = gen_type(rng, env, 4, supply, cfg.box_bias)
        u = (gen_supertype_of(rng, env, t, supply) if rng.random() < 0.5
             else gen_type(rng, env, 4, supply, cfg.box_bias))
        if subtype(env, t, u) != subtype_capt(env, t, u):
            failures += 1
    _verdict(5, "subtype route equivalence", failures == 0,
             f"1000 pairs, {failures} disagreements")


def test_criterion_6_adaptation_is_identity_on_subtypes():
    failures = 0
    premise_misses = 0
    for i in range(500):
        rng = random.Random(SEED ^ 0xAD19 ^ i)
        supply = NameSupply()
        cfg = GenConfig(seed=SEED + i, box_bias=BIASES[i % len(BIASES)])
        env = gen_env(rng, cfg, supply)
        t = gen_type(rng, env, 4, supply, cfg.box_bias)
        u = gen_supertype_of(rng, env, t, supply)
        if not subtype(env, t, u):
            premise_misses += 1
            continue
        q = supply.fresh_var("q")
        if adapt_sub(env, q, t, u) != VarRef(q):
            failures += 1
    _verdict(6, "adaptation identity", failures == 0 and premise_misses == 0,
             f"500 subtype-true pairs, {failures} non-identity results, "
             f"{premise_misses} premise misses")


def test_criterion_7_golden_eta_expansion():
    target = parse_type("{io} all (op: Box {io} all (u: Top) -> Top) -> Top")
    expected = parse_term(
        "fun (op: Box {io} all (u: Top) -> Top) let op2 = {io} unbox op in f op2"
    )
    got = box_adapt(ENV, _var("f"), target)
    kind, cs = box_adapt_t(ENV, _var("f"), target)
    ok = (alpha_eq(got, expected)
          and cv(got) == parse_capture_set("{f, io}")
          and kind is Kind.Val
          and cs == parse_capture_set("{f, io}"))
    _verdict(7, "golden eta-expansion", ok,
             f"term {show(got)!r}, cv {show(cv(got))}, "
             f"predicted ({kind.value}, {show(cs)})")


def test_criterion_8_escape_checking():
    cases = [
        ("unbox at a root set", lambda: typecheck(ENV, parse_term("{cap} unbox b"))),
        ("box under a root set", lambda: box_adapt(ENV, _var("y"),
                                                   parse_type("Box {cap} Top"))),
        ("argument smuggles the root", lambda: infer(ENV, parse_term("g b"))),
    ]
    wrong = []
    for label, thunk in cases:
        try:
            thunk()
            wrong.append(f"{label}: no error")
        except CheckError as e:
            if type(e) is not EscapeViolation:
                wrong.append(f"{label}: {type(e).__name__}")
    _verdict(8, "escape checking", not wrong,
             "3 cases, all EscapeViolation" if not wrong else "; ".join(wrong))


def test_criterion_9_normalization_preserves_types(welltyped):
    failures = 0
    for _, env, t in welltyped["cases"]:
        want = typecheck(env, t)
        try:
            got = typecheck(env, normalize(t))
        except CheckError:
            failures += 1
            continue
        if not subtype(env, got, want):
            failures += 1
    _verdict(9, "normalization preservation", failures == 0,
             f"{len(welltyped['cases'])} terms, {failures} failures")


def test_criterion_10_termination_mirrors_the_erased_image(welltyped, perturbed):
    violations = 0
    slow = []
    checked = 0
    for _, env, t in welltyped["cases"] + perturbed["cases"]:
        f_fuel = Fuel(DEFAULT_FUEL)
        try:
            fsub_typecheck(erase_env(env), erase(t), f_fuel)
        except CheckError:
            continue  # no termination claim unless the image typechecks
        checked += 1
        cc_fuel = Fuel(DEFAULT_FUEL)
        try:
            infer(env, t, cc_fuel)
        except FuelExhausted:
            violations += 1
            continue
        except CheckError:
            pass
        if cc_fuel.used > 8 * max(1, f_fuel.used):
            slow.append((show(t), cc_fuel.used, f_fuel.used))
    for shown, cc_used, f_used in slow[:5]:
        print(f"  reported (not failed): {cc_used} vs {f_used} fuel on {shown!r}")
    _verdict(10, "conditional termination mirror", violations == 0,
             f"{checked} images typecheck, {violations} fuel exhaustions, "
             f"{len(slow)} cases over the 8x fuel ratio (reported, not failed)")
