"""The typechecker and avoidance, against the frozen walkthrough values."""

import pytest

from capcheck.checker import avoid, typecheck
from capcheck.errors import (
    EscapeViolation,
    IllFormedType,
    NotABoxed,
    NotAFunction,
    NotATypeFunction,
    SubcaptureFailure,
    SubtypeFailure,
    UnboundVariable,
)
from capcheck.syntax import (
    Var,
    alpha_eq,
    parse_capture_set,
    parse_env,
    parse_term,
    parse_type,
)

ENV = parse_env(
    """
    io : {cap} Top
    file : {cap} Top
    f : {io} all (z: {io} Top) -> {z} Top
    g : all (z: Box {io} Top) -> Top
    b : Box {cap} Top
    c : Box {io} Top
    X <: all (z: Top) -> Top
    h : {cap} X
    u : Top
    """
)

x, io = Var("x"), Var("io")


def check(src: str, env=ENV):
    return typecheck(env, parse_term(src))


def expect(src: str, ty: str, env=ENV):
    got = check(src, env)
    want = parse_type(ty)
    assert alpha_eq(got, want), f"{src} : {got} (wanted {ty})"


# ---------------------------------------------------------------------------
# avoid


def test_avoid_covariant_replaced_by_bound_set():
    got = avoid(x, parse_capture_set("{io}"), parse_type("{x} Top"))
    assert alpha_eq(got, parse_type("{io} Top"))


def test_avoid_contravariant_dropped():
    got = avoid(x, parse_capture_set("{io}"), parse_type("all (z: {x} Top) -> Top"))
    assert alpha_eq(got, parse_type("all (z: {} Top) -> Top"))


def test_avoid_splices_whole_set():
    got = avoid(x, parse_capture_set("{io, file}"), parse_type("{x, f} Top"))
    assert alpha_eq(got, parse_type("{f, io, file} Top"))


def test_avoid_box_interior_is_covariant():
    got = avoid(x, parse_capture_set("{io}"), parse_type("Box {x} Top"))
    assert alpha_eq(got, parse_type("Box {io} Top"))


def test_avoid_polarity_flips_twice():
    # x under two parameter positions is covariant again
    got = avoid(x, parse_capture_set("{io}"),
                parse_type("all (z: all (w: {x} Top) -> Top) -> Top"))
    assert alpha_eq(got, parse_type("all (z: all (w: {io} Top) -> Top) -> Top"))


def test_avoid_tfun_bound_flips_polarity():
    # inside the bound the polarity is negative, so a result there drops x
    got = avoid(x, parse_capture_set("{io}"),
                parse_type("all [Y <: all (w: Top) -> {x} Top] -> {x} Top"))
    assert alpha_eq(got, parse_type("all [Y <: all (w: Top) -> Top] -> {io} Top"))
    # and a parameter inside the bound is positive again
    got2 = avoid(x, parse_capture_set("{io}"),
                 parse_type("all [Y <: all (w: {x} Top) -> Top] -> Top"))
    assert alpha_eq(got2, parse_type("all [Y <: all (w: {io} Top) -> Top] -> Top"))


# ---------------------------------------------------------------------------
# typecheck walkthroughs


def test_var_rule():
    expect("io", "{io} Top")
    expect("h", "{h} X")


def test_abs_rule():
    expect("fun (z: {io} Top) z", "{} all (z: {io} Top) -> {z} Top")


def test_abs_captures_body_minus_binder():
    expect("fun (z: Top) f z", "{f} all (z: Top) -> {z} Top")


def test_tabs_rule():
    expect("tfun [Y <: Top] io", "{io} all [Y <: Top] -> {io} Top")


def test_app_rule_substitutes_argument():
    expect("f io", "{io} Top")


def test_app_through_tvar_widening():
    # the head's type-variable shape widens to a function; the argument
    # must be pure because the widened parameter carries the empty set
    expect("h u", "Top")


def test_tapp_rule():
    env = parse_env("p : all [Y <: Top] -> all (z: Y) -> Top")
    expect("p [Top]", "all (z: Top) -> Top", env)


def test_box_rule():
    expect("box io", "Box {io} Top")


def test_unbox_rule():
    expect("{io} unbox c", "{io} Top")


def test_unbox_wider_annotation_ok():
    expect("{io, file} unbox c", "{io} Top")


def test_let_avoidance():
    expect("let y = box io in y", "Box {io} Top")


def test_let_avoid_covariant_use():
    expect("let y = f io in y", "{io} Top")


def test_nested_let_widening():
    expect("let y = io in f y", "{io} Top")


# ---------------------------------------------------------------------------
# failures


def test_escape_violation_on_root_unbox():
    with pytest.raises(EscapeViolation):
        check("{io} unbox b")


def test_escape_violation_on_root_annotation():
    with pytest.raises(EscapeViolation):
        check("{cap} unbox c")


def test_subcapture_failure_on_narrow_annotation():
    with pytest.raises(SubcaptureFailure):
        check("{file} unbox c")


def test_unbox_non_boxed():
    with pytest.raises(NotABoxed):
        check("{io} unbox io")


def test_app_non_function():
    with pytest.raises(NotAFunction):
        check("io io")


def test_tapp_non_type_function():
    with pytest.raises(NotATypeFunction):
        check("f [Top]")


def test_app_argument_subtype_failure():
    env = parse_env("io : {cap} Top\nk : all (z: {} Top) -> Top")
    with pytest.raises(SubtypeFailure):
        typecheck(env, parse_term("k io"))


def test_unbound_variable():
    with pytest.raises(UnboundVariable):
        check("nope")


def test_ill_formed_annotation():
    with pytest.raises(IllFormedType):
        check("fun (z: {ghost} Top) z")


def test_ill_formed_type_argument():
    env = parse_env("p : all [Y <: Top] -> Top")
    with pytest.raises(IllFormedType):
        typecheck(env, parse_term("p [Ghost]"))
