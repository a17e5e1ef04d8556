"""Differential harness: generation, perturbation, property battery."""

import pytest

from capcheck.checker import typecheck
from capcheck.errors import FuelExhausted
from capcheck.fsub import erase_env, erase_type, fsub_subtype
from capcheck.harness import (
    PROPERTIES,
    GenConfig,
    broken_cv,
    case_seed,
    drop_boxes,
    gen_welltyped,
    hostile_pair,
    run_differential,
    shrink_case,
)
from capcheck.subtyping import DEFAULT_FUEL, Fuel, subtype
from capcheck.syntax import (
    Abs,
    BoxV,
    Let,
    TAbs,
    Unbox,
    alpha_eq,
    cv,
    parse_env,
    parse_term,
    show,
)

DROP_ENV = parse_env(
    """
    io : {cap} Top
    c : Box {io} Top
    g : all (z: Box {io} Top) -> Top
    """
)


def _nodes(t):
    """All term nodes; answers-normal-form means only binders nest."""
    yield t
    match t:
        case Abs(_, _, body) | TAbs(_, _, body):
            yield from _nodes(body)
        case Let(_, bound, body):
            yield from _nodes(bound)
            yield from _nodes(body)
        case _:
            pass


# --- generation ------------------------------------------------------------


def test_gen_welltyped_is_deterministic():
    cfg = GenConfig(seed=42)
    assert gen_welltyped(cfg) == gen_welltyped(cfg)


def test_distinct_seeds_vary_the_corpus():
    seen = {show(gen_welltyped(GenConfig(seed=s))[1]) for s in range(10)}
    assert len(seen) >= 5


@pytest.mark.parametrize("seed", range(25))
def test_generated_terms_typecheck(seed):
    env, t = gen_welltyped(GenConfig(seed=seed))
    typecheck(env, t)


@pytest.mark.parametrize("seed", range(20))
def test_box_bias_zero_means_no_box_nodes(seed):
    _, t = gen_welltyped(GenConfig(seed=seed, box_bias=0.0))
    assert not any(isinstance(n, (BoxV, Unbox)) for n in _nodes(t))


def test_box_bias_high_reaches_box_nodes():
    hits = 0
    for seed in range(30):
        _, t = gen_welltyped(GenConfig(seed=seed, box_bias=0.9, max_depth=5))
        if any(isinstance(n, (BoxV, Unbox)) for n in _nodes(t)):
            hits += 1
    assert hits > 0


def test_case_seed_is_stable_and_spread():
    cfg = GenConfig(seed=2026)
    assert case_seed(cfg, 7) == case_seed(cfg, 7)
    assert len({case_seed(cfg, i) for i in range(100)}) == 100
    assert case_seed(cfg, 0) != case_seed(GenConfig(seed=2027), 0)


# --- box dropping ----------------------------------------------------------


def test_drop_boxes_removes_an_introduction():
    t = parse_term("let y = box io in g y")
    out = drop_boxes(t, GenConfig(seed=1, box_bias=1.0))
    assert alpha_eq(out, parse_term("g io"))


def test_drop_boxes_removes_an_elimination():
    t = parse_term("let w = {io} unbox c in let q = w in q")
    out = drop_boxes(t, GenConfig(seed=1, box_bias=1.0))
    assert alpha_eq(out, parse_term("let q = c in q"))


def test_drop_boxes_rate_zero_is_identity():
    for src in (
        "let y = box io in g y",
        "let w = {io} unbox c in g w",
        "fun (z: Box {io} Top) let w = {io} unbox z in w",
    ):
        t = parse_term(src)
        assert drop_boxes(t, GenConfig(seed=9, box_bias=0.0)) == t


def test_drop_boxes_walks_under_binders():
    t = parse_term("fun (z: Top) let y = box io in g y")
    out = drop_boxes(t, GenConfig(seed=4, box_bias=1.0))
    assert alpha_eq(out, parse_term("fun (z: Top) g io"))


def test_drop_boxes_is_deterministic():
    t = parse_term("let y = box io in let w = {io} unbox c in g y")
    cfg = GenConfig(seed=5, box_bias=0.5)
    assert drop_boxes(t, cfg) == drop_boxes(t, cfg)


# --- the planted bugs the harness must catch -------------------------------


def test_broken_cv_leaks_the_boxed_variable():
    t = parse_term("box io")
    assert cv(t) != broken_cv(t)
    u = parse_term("g c")
    assert cv(u) == broken_cv(u)


def test_mutation_mode_detects_the_cv_bug():
    rep = run_differential(
        GenConfig(seed=2026, max_depth=5, box_bias=0.7),
        ["adp-adpt-equivalence"],
        count=60,
        mutate_cv=True,
    )
    assert rep.failures
    f = rep.failures[0]
    assert f.prop == "adp-adpt-equivalence"
    assert "env" in f.case and f.case.get("terms")


# --- hostile subtyping queries ---------------------------------------------


def test_hostile_pair_exhausts_fuel_in_cc():
    env, t, u = hostile_pair()
    with pytest.raises(FuelExhausted):
        subtype(env, t, u, Fuel(DEFAULT_FUEL))


def test_hostile_pair_exhausts_fuel_after_erasure():
    env, t, u = hostile_pair()
    with pytest.raises(FuelExhausted):
        fsub_subtype(erase_env(env), erase_type(t), erase_type(u),
                     Fuel(DEFAULT_FUEL))


def test_hostile_flag_runs_clean():
    rep = run_differential(GenConfig(seed=11), ["sub-capt-equivalence"],
                           count=30, hostile=True)
    assert rep.failures == []


# --- shrinking -------------------------------------------------------------


def test_shrink_drops_unused_bindings_and_subterms():
    env = parse_env(
        """
        io : {cap} Top
        c : Box {io} Top
        g : all (z: Box {io} Top) -> Top
        """
    )
    t = parse_term("let q = g c in let w = box io in w")

    def still_fails(env, terms, types):
        typecheck(env, terms[0])
        return any(isinstance(n, BoxV) for n in _nodes(terms[0]))

    small_env, (small,), _ = shrink_case(env, (t,), (), still_fails)
    assert still_fails(small_env, (small,), ())
    assert len(show(small)) < len(show(t))
    assert len(small_env.bindings) < len(env.bindings)


def test_shrink_keeps_a_failure_it_cannot_reduce():
    env = parse_env("io : {cap} Top")
    t = parse_term("box io")
    got = shrink_case(env, (t,), (), lambda e, ts, ys: True)
    # every candidate "still fails", so shrinking bottoms out at atoms
    assert got[1][0] is not None


# --- the battery -----------------------------------------------------------


def test_all_properties_green_on_a_small_run():
    rep = run_differential(GenConfig(seed=3), sorted(PROPERTIES), count=8)
    assert rep.failures == []
    assert rep.cases_run == 8 * len(PROPERTIES)


def test_unknown_property_is_rejected():
    with pytest.raises(ValueError):
        run_differential(GenConfig(seed=0), ["no-such-check"], count=1)


def test_reports_replay():
    cfg = GenConfig(seed=2026, max_depth=5, box_bias=0.7)
    a = run_differential(cfg, ["adp-adpt-equivalence"], count=40, mutate_cv=True)
    b = run_differential(cfg, ["adp-adpt-equivalence"], count=40, mutate_cv=True)
    assert [(f.prop, f.seed, f.case) for f in a.failures] == \
           [(f.prop, f.seed, f.case) for f in b.failures]
