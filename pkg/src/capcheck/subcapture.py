"""Subcapturing: when one capture set may stand for another.

A set is below another when each element is, and an element x is below
C either because x (or the root) literally occurs in C, or because the
capture set of x's declared type is below C. The root capability has no
binding, so it only ever passes by literal membership.

Termination is unconditional: widening an element through its binding
only reaches earlier bindings, so the pair (deepest binding, set size)
drops lexicographically. A debug assertion guards that measure.
"""

from __future__ import annotations

from .syntax import CaptureSet, Env, Var


def subcapture(env: Env, c1: CaptureSet, c2: CaptureSet) -> bool:
    if c1.has_root and not c2.has_root:
        return False
    return all(_elem(env, x, c2) for x in c1.vars)


def _elem(env: Env, x: Var, c2: CaptureSet) -> bool:
    if x in c2:
        return True
    widened = env.lookup_var(x).cs
    if __debug__ and widened.vars:
        depth = env.depth_of(x)
        assert all(env.depth_of(v) < depth for v in widened.vars), (
            f"binding depth must drop when widening {x}"
        )
    return subcapture(env, widened, c2)
