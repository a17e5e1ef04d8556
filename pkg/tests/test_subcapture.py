"""Subcapturing over the four-binding walkthrough environment, plus the
order-theoretic properties every derivation must respect."""

import itertools

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from capcheck.errors import UnboundVariable
from capcheck.subcapture import subcapture
from capcheck.syntax import CaptureSet, EMPTY, ROOT, Var, parse_capture_set, parse_env

ENV = parse_env(
    """
    file : {cap} Top
    console : {cap} Top
    op : {file, console} all (z: Top) -> Top
    l : {console} Top
    """
)

file, console, op, l = Var("file"), Var("console"), Var("op"), Var("l")


def sc(a: str, b: str) -> bool:
    return subcapture(ENV, parse_capture_set(a), parse_capture_set(b))


def test_walkthrough_op_below_its_annotation():
    assert sc("{op}", "{file, console}")


def test_walkthrough_element_by_membership():
    assert sc("{file}", "{file, console}")


def test_walkthrough_distinct_capabilities_incomparable():
    assert not sc("{file}", "{console}")


def test_empty_below_everything():
    assert sc("{}", "{}")
    assert sc("{}", "{file}")


def test_root_only_by_membership():
    assert sc("{cap}", "{cap}")
    assert not sc("{cap}", "{file, console}")


def test_capability_vars_below_root():
    # widening file reaches {cap}
    assert sc("{file}", "{cap}")
    assert sc("{l}", "{cap}")


def test_chained_widening():
    # l widens to {console}, not to {file}
    assert sc("{l}", "{console}")
    assert not sc("{l}", "{file}")
    assert sc("{op}", "{cap}")


def test_set_rule_is_elementwise():
    assert sc("{file, console}", "{file, console}")
    assert not sc("{file, l}", "{file}")


def test_unbound_element_raises():
    with pytest.raises(UnboundVariable):
        sc("{ghost}", "{file}")


SETS = [
    "{}",
    "{file}",
    "{console}",
    "{op}",
    "{l}",
    "{file, console}",
    "{op, l}",
    "{cap}",
    "{file, cap}",
]


def test_reflexive_on_walkthrough_sets():
    for c in SETS:
        assert sc(c, c), c


def test_transitive_on_walkthrough_sets():
    for a, b, c in itertools.product(SETS, repeat=3):
        if sc(a, b) and sc(b, c):
            assert sc(a, c), (a, b, c)


def test_monotone_under_superset_rhs():
    for a, b in itertools.product(SETS, repeat=2):
        ca, cb = parse_capture_set(a), parse_capture_set(b)
        if sc(a, b):
            assert subcapture(ENV, ca, cb.union(parse_capture_set("{op}")))


def test_union_left_is_join():
    for a, b, c in itertools.product(SETS, repeat=3):
        ca, cb = parse_capture_set(a), parse_capture_set(b)
        both = subcapture(ENV, ca.union(cb), parse_capture_set(c))
        split = sc(a, c) and sc(b, c)
        assert both == split, (a, b, c)


@given(st.lists(st.sampled_from([file, console, op, l]), max_size=4),
       st.lists(st.sampled_from([file, console, op, l]), max_size=4),
       st.booleans())
@settings(max_examples=200)
def test_subset_implies_subcapture(vs1, vs2, root):
    c2 = CaptureSet(frozenset(vs1) | frozenset(vs2), root)
    c1 = CaptureSet(frozenset(vs1), False)
    assert subcapture(ENV, c1, c2)


def test_pure_variable_below_empty():
    env = parse_env("pure : Top")
    assert subcapture(env, CaptureSet.of(Var("pure")), EMPTY)
    assert not subcapture(env, ROOT, EMPTY)
