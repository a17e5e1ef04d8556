"""Algorithmic subtyping, variable lookup, and widening.

Two interchangeable routes are provided. `subtype` checks the capture
sets once up front and then compares shapes, inlining transitivity at
type variables by chasing their bounds. `subtype_capt` instead carries
the capture sets all the way down and discharges the subcapture premise
at each terminal rule. The differential harness holds them equal.

Both run on fuel: one unit per rule application, so the bound-chasing
rule cannot loop forever on hostile environments. Running out raises
FuelExhausted, which is a distinct outcome, never a plain False.
"""

from __future__ import annotations

import sys

from .errors import FuelExhausted
from .subcapture import subcapture
from .syntax import (
    Boxed,
    CaptureSet,
    EMPTY,
    Env,
    Fun,
    NameSupply,
    ShapeType,
    TFun,
    Top,
    TVar,
    TVarRef,
    Type,
    Var,
    subst,
)

DEFAULT_FUEL = 10_000

# Every engine spends at least one unit per level of recursion, so a
# stack three times the default budget guarantees the fuel runs out
# before the interpreter does on divergent queries.
sys.setrecursionlimit(max(sys.getrecursionlimit(), 3 * DEFAULT_FUEL))


class Fuel:
    """A budget of rule applications, threaded mutably through one query.

    `used` survives exhaustion, so callers can compare how much work two
    engines spent on the same input.
    """

    def __init__(self, budget: int = DEFAULT_FUEL):
        self.remaining = budget
        self.used = 0

    def spend(self, rule: str) -> None:
        if self.remaining <= 0:
            raise FuelExhausted(f"fuel exhausted at {rule}", rule=rule)
        self.remaining -= 1
        self.used += 1


def widen_tvar(env: Env, tv: TVar) -> ShapeType:
    """Chase bounds until a non-variable shape appears. Environments bind
    each variable once and bounds live in the preceding prefix, so the
    chain always terminates."""
    s: ShapeType = env.lookup_tvar(tv)
    while isinstance(s, TVarRef):
        s = env.lookup_tvar(s.var)
    return s


def var_type(env: Env, x: Var) -> Type:
    """The algorithmic type of a variable: its declared shape under the
    singleton set {x}."""
    return Type(CaptureSet.of(x), env.lookup_var(x).shape)


def widen_var(env: Env, x: Var) -> Type:
    """Like var_type, but a type-variable shape is widened to its bound;
    the capture set stays {x}."""
    t = var_type(env, x)
    if isinstance(t.shape, TVarRef):
        return Type(t.cs, widen_tvar(env, t.shape.var))
    return t


# ---------------------------------------------------------------------------
# Route one: subcapture premise once, then shapes


def subtype(env: Env, t: Type, u: Type, fuel: Fuel | None = None) -> bool:
    fuel = fuel if fuel is not None else Fuel()
    supply = NameSupply.avoiding(env, t, u)
    return _sub(env, t, u, fuel, supply)


def _sub(env: Env, t: Type, u: Type, fuel: Fuel, supply: NameSupply) -> bool:
    fuel.spend("alg-capt")
    return subcapture(env, t.cs, u.cs) and _sub_shape(env, t.shape, u.shape, fuel, supply)


def _sub_shape(env: Env, s: ShapeType, u: ShapeType, fuel: Fuel, supply: NameSupply) -> bool:
    if isinstance(u, Top):
        fuel.spend("alg-top")
        return True
    if isinstance(s, TVarRef):
        if s == u:
            fuel.spend("alg-refl")
            return True
        fuel.spend("alg-tvar")
        return _sub_shape(env, env.lookup_tvar(s.var), u, fuel, supply)
    match s, u:
        case Fun(x1, p1, r1), Fun(x2, p2, r2):
            fuel.spend("alg-fun")
            if not _sub(env, p2, p1, fuel, supply):
                return False
            z = supply.fresh_var(x2.name)
            inner = env.extend_var(z, p2)
            return _sub(inner, subst(r1, x1, z), subst(r2, x2, z), fuel, supply)
        case TFun(v1, b1, r1), TFun(v2, b2, r2):
            fuel.spend("alg-tfun")
            if not _sub_shape(env, b2, b1, fuel, supply):
                return False
            w = supply.fresh_tvar(v2.name)
            inner = env.extend_tvar(w, b2)
            return _sub(inner, subst(r1, v1, TVarRef(w)), subst(r2, v2, TVarRef(w)), fuel, supply)
        case Boxed(i1), Boxed(i2):
            fuel.spend("alg-boxed")
            return _sub(env, i1, i2, fuel, supply)
    return False


# ---------------------------------------------------------------------------
# Route two: the subcapture premise inlined at every terminal rule


def subtype_capt(env: Env, t: Type, u: Type, fuel: Fuel | None = None) -> bool:
    fuel = fuel if fuel is not None else Fuel()
    supply = NameSupply.avoiding(env, t, u)
    return _subc(env, t, u, fuel, supply)


def _subc(env: Env, t: Type, u: Type, fuel: Fuel, supply: NameSupply) -> bool:
    c1, s = t.cs, t.shape
    c2, w = u.cs, u.shape
    if isinstance(w, Top):
        fuel.spend("algc-top")
        return subcapture(env, c1, c2)
    if isinstance(s, TVarRef):
        if s == w:
            fuel.spend("algc-refl")
            return subcapture(env, c1, c2)
        fuel.spend("algc-tvar")
        return _subc(env, Type(c1, env.lookup_tvar(s.var)), u, fuel, supply)
    match s, w:
        case Fun(x1, p1, r1), Fun(x2, p2, r2):
            fuel.spend("algc-fun")
            if not subcapture(env, c1, c2) or not _subc(env, p2, p1, fuel, supply):
                return False
            z = supply.fresh_var(x2.name)
            inner = env.extend_var(z, p2)
            return _subc(inner, subst(r1, x1, z), subst(r2, x2, z), fuel, supply)
        case TFun(v1, b1, r1), TFun(v2, b2, r2):
            fuel.spend("algc-tfun")
            if not subcapture(env, c1, c2):
                return False
            if not _subc(env, Type(EMPTY, b2), Type(EMPTY, b1), fuel, supply):
                return False
            vw = supply.fresh_tvar(v2.name)
            inner = env.extend_tvar(vw, b2)
            return _subc(inner, subst(r1, v1, TVarRef(vw)), subst(r2, v2, TVarRef(vw)), fuel, supply)
        case Boxed(i1), Boxed(i2):
            fuel.spend("algc-boxed")
            return subcapture(env, c1, c2) and _subc(env, i1, i2, fuel, supply)
    return False
