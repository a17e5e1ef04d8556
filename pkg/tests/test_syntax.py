"""Core syntax: captured/free variables, substitution, well-formedness,
the surface parser and printer, and alpha-equivalence."""

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from capcheck.errors import IllFormedType, MNFViolation, ParseError
from capcheck.syntax import (
    Boxed,
    BoxV,
    CaptureSet,
    EMPTY,
    Env,
    Kind,
    Let,
    NameSupply,
    ROOT,
    TOP,
    TVar,
    Type,
    Var,
    VarRef,
    alpha_eq,
    cs,
    cv,
    fv,
    fv_type,
    is_simple_formed,
    kind_of,
    parse_capture_set,
    parse_env,
    parse_term,
    parse_type,
    show,
    subst,
    wf_env,
    wf_type,
)

import strategies

x, y, f, g, io = Var("x"), Var("y"), Var("f"), Var("g"), Var("io")


# ---------------------------------------------------------------------------
# cv / fv / cs


def test_cv_box_hides():
    assert cv(parse_term("box x")) == EMPTY


def test_cv_unbox_surfaces_annotation():
    assert cv(parse_term("{io} unbox x")) == CaptureSet.of(x, io)


def test_cv_abs_drops_binder():
    assert cv(parse_term("fun (z: Top) f z")) == CaptureSet.of(f)


def test_cv_let_hides_unused_value():
    assert cv(parse_term("let y = fun (z: Top) z in box y")) == EMPTY


def test_cv_let_hides_unused_variable_binding():
    # the bound term is an answer and the binder is unused downstream
    assert cv(parse_term("let y = x in f g")) == CaptureSet.of(f, g)


def test_cv_let_used_binding_unions():
    assert cv(parse_term("let y = x in f y")) == CaptureSet.of(x, f)


def test_cv_let_non_answer_never_hidden():
    assert cv(parse_term("let y = f x in g g")) == CaptureSet.of(f, x, g)


def test_fv_box_does_not_hide():
    assert fv(parse_term("box x")) == {x}


def test_fv_type_mixes_term_and_type_vars():
    got = fv_type(parse_type("{x} all (z: {y} Top) -> Top"))
    assert got == {x, y}


def test_fv_type_dependent_result_binder_removed():
    got = fv_type(parse_type("all (z: Top) -> {z} Top"))
    assert got == frozenset()


def test_cs_of_boxed_shape_is_empty():
    assert cs(parse_type("Box {x} Top")) == EMPTY
    assert cs(parse_type("{x, cap} Top")) == CaptureSet.of(x, root=True)


@given(strategies.terms())
@settings(max_examples=200)
def test_cv_vars_subset_fv(t):
    assert cv(t).vars <= fv(t)


# ---------------------------------------------------------------------------
# substitution


def test_subst_var_for_var_in_term():
    t = parse_term("let w = f y in g w")
    got = subst(t, y, x)
    assert alpha_eq(got, parse_term("let w = f x in g w"))


def test_subst_var_shadowed_by_binder():
    t = parse_term("fun (q: Top) q")
    binder = t.binder
    assert subst(t, binder, x) == t


def test_subst_capture_set_for_var():
    c = parse_capture_set("{io, x}")
    got = subst(c, x, parse_capture_set("{a, b}"))
    assert got == parse_capture_set("{a, b, io}")


def test_subst_capture_set_absent_var_is_identity():
    c = parse_capture_set("{io}")
    assert subst(c, x, parse_capture_set("{a}")) == c


def test_subst_shape_for_tvar():
    ty = parse_type("all (z: X) -> {z} X")
    got = subst(ty, TVar("X"), Boxed(parse_type("{y} Top")))
    assert alpha_eq(got, parse_type("all (z: Box {y} Top) -> {z} Box {y} Top"))


def test_subst_tvar_stops_at_shadowing_binder():
    ty = parse_type("all [X <: Top] -> X")
    assert subst(ty, TVar("X"), TOP) == ty


@given(strategies.terms(), st.sampled_from(strategies.FREE_VARS),
       st.sampled_from([Var("p"), Var("q")]), st.sampled_from([Var("r"), Var("s")]))
@settings(max_examples=150)
def test_subst_composition_disjoint_names(t, a, b, c):
    # [a:=b] then [b':=c] commutes with the other order when names are disjoint
    a2 = Var("other")
    left = subst(subst(t, a, b), a2, c)
    right = subst(subst(t, a2, c), a, b)
    assert alpha_eq(left, right)


# ---------------------------------------------------------------------------
# well-formedness and simple-formedness


def test_wf_root_in_empty_env():
    wf_type(Env(), parse_type("{cap} Top"))


def test_wf_unbound_capture_var_rejected():
    with pytest.raises(IllFormedType):
        wf_type(Env(), parse_type("{x} Top"))


def test_wf_env_prefix_scoping():
    env = parse_env("io : {cap} Top\nx : Box {io} Top")
    wf_env(env)
    bad = parse_env("x : Box {io} Top\nio : {cap} Top")
    with pytest.raises(IllFormedType):
        wf_env(bad)


def test_env_rejects_shadowing():
    env = parse_env("io : {cap} Top")
    with pytest.raises(IllFormedType):
        env.extend_var(io, parse_type("Top"))


def test_simple_formed_capturing_top():
    assert is_simple_formed(parse_type("{x} Top"))


def test_simple_formed_rejects_set_on_box():
    assert not is_simple_formed(parse_type("Box {x} Box {y} Top"))


def test_simple_formed_box_under_function_ok():
    assert is_simple_formed(parse_type("{x} all (z: Box {y} Top) -> Top"))


# ---------------------------------------------------------------------------
# kinds


def test_kind_of():
    assert kind_of(parse_term("x")) is Kind.Var
    assert kind_of(parse_term("fun (z: Top) z")) is Kind.Val
    assert kind_of(parse_term("tfun [X <: Top] x")) is Kind.Val
    assert kind_of(parse_term("box x")) is Kind.Val
    assert kind_of(parse_term("f x")) is Kind.Trm
    assert kind_of(parse_term("f [Top]")) is Kind.Trm
    assert kind_of(parse_term("{io} unbox x")) is Kind.Trm
    assert kind_of(parse_term("let a = b in a")) is Kind.Trm


# ---------------------------------------------------------------------------
# parser and printer


def test_parse_round_trip_goldens():
    for src in [
        "x",
        "fun (z: {io} Top) z",
        "tfun [X <: Top] box x",
        "f [all (u: Top) -> Top]",
        "{io} unbox x",
        "let y = box io in y",
        "fun (op: Box {io} all (u: Top) -> Top) let w = {io} unbox op in f w",
    ]:
        assert show(parse_term(src)) == src


def test_parse_is_whitespace_insensitive():
    a = parse_term("let y=box io in y")
    b = parse_term("let  y =  box   io\n in y")
    assert alpha_eq(a, b)


def test_parse_shadowing_binders_kept_apart():
    t = parse_term("let x = x in x")
    assert isinstance(t, Let)
    assert t.bound == VarRef(x)
    assert t.binder != x
    assert t.body == VarRef(t.binder)


def test_parse_empty_set_annotation_equals_bare_shape():
    assert parse_type("{} Top") == parse_type("Top")


def test_parse_error_carries_position():
    with pytest.raises(ParseError) as e:
        parse_term("let y = box io\nin ?")
    assert e.value.line == 2


def test_mnf_violation_on_compound_argument():
    with pytest.raises(MNFViolation):
        parse_term("f (g x)")
    with pytest.raises(MNFViolation):
        parse_term("(f x) y")


def test_mnf_violation_is_a_parse_error():
    assert issubclass(MNFViolation, ParseError)


def test_parse_env_round_trip():
    text = "io : {cap} Top\nX <: all (u: Top) -> Top\nfy : {io} X"
    env = parse_env(text)
    assert show(env) == text


def test_print_renames_colliding_binders():
    # two nested binders spelled the same must print apart
    t = parse_term("let x = x in x")
    printed = show(t)
    again = parse_term(printed)
    assert alpha_eq(t, again)


@given(strategies.terms())
@settings(max_examples=200)
def test_parse_print_round_trip(t):
    assert alpha_eq(parse_term(show(t)), t)


@given(strategies.types())
@settings(max_examples=200)
def test_type_parse_print_round_trip(ty):
    assert alpha_eq(parse_type(show(ty)), ty)


# ---------------------------------------------------------------------------
# alpha-equivalence and name supply


def test_alpha_eq_binders():
    assert alpha_eq(parse_term("fun (a: Top) a"), parse_term("fun (b: Top) b"))
    assert not alpha_eq(parse_term("fun (a: Top) a"), parse_term("fun (b: Top) x"))
    assert alpha_eq(parse_type("all [X <: Top] -> {} X"), parse_type("all [Y <: Top] -> Y"))
    assert not alpha_eq(parse_type("{x} Top"), parse_type("{y} Top"))


def test_alpha_eq_capture_sets_track_binders():
    a = parse_term("fun (a: Top) {a} unbox q")
    b = parse_term("fun (b: Top) {b} unbox q")
    c = parse_term("fun (b: Top) {x} unbox q")
    assert alpha_eq(a, b)
    assert not alpha_eq(a, c)


def test_name_supply_avoids_existing():
    t = parse_term("let x = x in x")  # contains disambiguator 1
    supply = NameSupply.avoiding(t)
    v = supply.fresh_var("x")
    assert v.disambiguator > 1


def test_root_constant():
    assert ROOT.has_root and not ROOT.vars
    assert parse_capture_set("{cap}") == ROOT
