"""Box adaptation at the type level.

The same judgments as the term-level adapter, computed without ever
building a term. Each coercion is summarized by an AdaptResult: the
kind of term the coercion would be (a bare variable, a value, or a
general term) and its capture set. The set is reported with a hole
standing for the variable being adapted, so one summary serves every
call site; `fill_hole` closes it over a concrete variable or set.

`infer_t` runs the whole elaboration this way, returning the type and
the capture set the elaborated term would have. The differential
harness holds it equal to running `infer` and taking cv of the output.

The rule dispatch is literally the one in adapt_term, and the two
engines must stay in lockstep: every check, every error class, and
every fuel spend here mirrors one there.
"""

from __future__ import annotations

from dataclasses import dataclass

from .adapt_term import require_covers, require_subcapture
from .checker import avoid, check_unbox_sets
from .errors import (
    AdaptFailure,
    EscapeViolation,
    NotABoxed,
    NotAFunction,
    NotATypeFunction,
    SubtypeFailure,
)
from .subtyping import Fuel, subtype, var_type, widen_tvar, widen_var
from .syntax import (
    EMPTY,
    Abs,
    App,
    Boxed,
    BoxV,
    CaptureSet,
    Env,
    Fun,
    HoledCaptureSet,
    Kind,
    Let,
    NameSupply,
    TAbs,
    TApp,
    TFun,
    Term,
    Top,
    TVarRef,
    Type,
    Unbox,
    Var,
    VarRef,
    covers,
    kind_of,
    show,
    subst,
    wf_type,
)

HOLE = HoledCaptureSet(EMPTY, True)


@dataclass(frozen=True)
class AdaptResult:
    """What a coercion would build: its term kind and its capture set,
    with the hole standing for the adapted variable. A Var result always
    carries exactly the hole: a bare variable captures itself and nothing
    else."""

    kind: Kind
    leak: HoledCaptureSet


def fill_hole(c: HoledCaptureSet, x: Var | CaptureSet) -> CaptureSet:
    """Close a reported capture set over the variable (or the set) that
    stands where the hole is. Without a hole the base is already closed."""
    if not c.has_hole:
        return c.base
    return c.base.union(CaptureSet.of(x) if isinstance(x, Var) else x)


def unbox_var_t(env: Env, x: Var) -> tuple[CaptureSet, Type]:
    """Capture set and type of `unbox_var(env, x)`, computed directly."""
    t = widen_var(env, x)
    if isinstance(t.shape, Boxed) and covers(env, t.shape.inner.cs):
        inner = t.shape.inner
        return inner.cs.union(CaptureSet.of(x)), inner
    return CaptureSet.of(x), t


def adapt_sub_t(env: Env, t: Type, u: Type, fuel: Fuel | None = None,
                supply: NameSupply | None = None) -> AdaptResult:
    """Kind and capture set of `adapt_sub` for a variable assumed at t."""
    fuel = fuel if fuel is not None else Fuel()
    supply = supply if supply is not None else NameSupply.avoiding(env, t, u)
    return _adapt_t(env, t, u, fuel, supply)


def box_adapt_t(env: Env, x: Var, u: Type, fuel: Fuel | None = None,
                supply: NameSupply | None = None) -> tuple[Kind, CaptureSet]:
    """Kind and closed capture set of `box_adapt(env, x, u)`."""
    wf_type(env, u)
    fuel = fuel if fuel is not None else Fuel()
    supply = supply if supply is not None else NameSupply.avoiding(env, u, x)
    r = _adapt_t(env, var_type(env, x), u, fuel, supply)
    return r.kind, fill_hole(r.leak, x)


def _adapt_t(env: Env, t: Type, u: Type, fuel: Fuel, supply: NameSupply) -> AdaptResult:
    s1, s2 = t.shape, u.shape
    if isinstance(s2, Top):
        fuel.spend("t-ba-top")
        require_subcapture(env, t.cs, u.cs, "t-ba-top")
        return AdaptResult(Kind.Var, HOLE)
    if isinstance(s1, Boxed) and isinstance(s2, Boxed):
        return _t_ba_boxed(env, s1.inner, s2.inner, fuel, supply)
    if isinstance(s1, Boxed):
        return _t_ba_unbox(env, s1.inner, u, fuel, supply)
    if isinstance(s1, TVarRef):
        if s1 == s2:
            fuel.spend("t-ba-refl")
            require_subcapture(env, t.cs, u.cs, "t-ba-refl")
            return AdaptResult(Kind.Var, HOLE)
        if isinstance(s2, Boxed) and not isinstance(widen_tvar(env, s1.var), Boxed):
            return _t_ba_box(env, t, s2.inner, fuel, supply)
        fuel.spend("t-ba-tvar")
        return _adapt_t(env, Type(t.cs, env.lookup_tvar(s1.var)), u, fuel, supply)
    if isinstance(s2, Boxed):
        return _t_ba_box(env, t, s2.inner, fuel, supply)
    if isinstance(s1, Fun) and isinstance(s2, Fun):
        return _t_ba_fun(env, t, u, fuel, supply)
    if isinstance(s1, TFun) and isinstance(s2, TFun):
        return _t_ba_tfun(env, t, u, fuel, supply)
    raise AdaptFailure(f"no coercion from {show(t)} to {show(u)}", rule="t-ba-sub")


def _t_ba_boxed(env: Env, inner1: Type, inner2: Type, fuel: Fuel,
                supply: NameSupply) -> AdaptResult:
    fuel.spend("t-ba-boxed")
    r = _adapt_t(env, inner1, inner2, fuel, supply)
    if r.kind is Kind.Var:
        return AdaptResult(Kind.Var, HOLE)
    if r.kind is Kind.Val:
        # The rebuilt box hides the value; only the unboxing side shows.
        return AdaptResult(Kind.Trm, HoledCaptureSet(inner1.cs, True))
    return AdaptResult(Kind.Trm, HoledCaptureSet(inner1.cs.union(r.leak.base), True))


def _t_ba_box(env: Env, t: Type, inner2: Type, fuel: Fuel,
              supply: NameSupply) -> AdaptResult:
    fuel.spend("t-ba-box")
    require_covers(env, inner2.cs, "t-ba-box")
    r = _adapt_t(env, t, inner2, fuel, supply)
    if r.kind in (Kind.Var, Kind.Val):
        return AdaptResult(Kind.Trm, HoledCaptureSet(EMPTY, False))
    return AdaptResult(Kind.Trm, r.leak)


def _t_ba_unbox(env: Env, inner1: Type, u: Type, fuel: Fuel,
                supply: NameSupply) -> AdaptResult:
    fuel.spend("t-ba-unbox")
    require_covers(env, inner1.cs, "t-ba-unbox")
    r = _adapt_t(env, inner1, u, fuel, supply)
    return AdaptResult(Kind.Trm, HoledCaptureSet(inner1.cs.union(r.leak.base), True))


def _t_ba_fun(env: Env, t: Type, u: Type, fuel: Fuel, supply: NameSupply) -> AdaptResult:
    fuel.spend("t-ba-fun")
    f1, f2 = t.shape, u.shape
    r1 = _adapt_t(env, f2.param, f1.param, fuel, supply)
    x = supply.fresh_var(f2.binder.name)
    xp = supply.fresh_var(f2.binder.name)
    inner_env = env.extend_var(x, f2.param).extend_var(xp, f1.param)
    arg = x if r1.kind is Kind.Var else xp
    res1 = subst(f1.result, f1.binder, arg)
    res2 = subst(f2.result, f2.binder, x)
    r2 = _adapt_t(inner_env, res1, res2, fuel, supply)
    leak = HoledCaptureSet(r1.leak.base.union(r2.leak.base).without([x, xp]), True)
    require_subcapture(env, fill_hole(leak, t.cs), u.cs, "t-ba-fun")
    kind = Kind.Var if r1.kind is Kind.Var and r2.kind is Kind.Var else Kind.Val
    return AdaptResult(kind, leak)


def _t_ba_tfun(env: Env, t: Type, u: Type, fuel: Fuel, supply: NameSupply) -> AdaptResult:
    fuel.spend("t-ba-tfun")
    g1, g2 = t.shape, u.shape
    if not subtype(env, Type(EMPTY, g2.bound), Type(EMPTY, g1.bound), fuel):
        raise AdaptFailure(
            f"bound {show(g2.bound)} is not below {show(g1.bound)}", rule="t-ba-tfun",
        )
    w = supply.fresh_tvar(g2.binder.name)
    inner_env = env.extend_tvar(w, g2.bound)
    res1 = subst(g1.result, g1.binder, TVarRef(w))
    res2 = subst(g2.result, g2.binder, TVarRef(w))
    r2 = _adapt_t(inner_env, res1, res2, fuel, supply)
    leak = HoledCaptureSet(r2.leak.base, True)
    require_subcapture(env, fill_hole(leak, t.cs), u.cs, "t-ba-tfun")
    kind = Kind.Var if r2.kind is Kind.Var else Kind.Val
    return AdaptResult(kind, leak)


# ---------------------------------------------------------------------------
# Elaboration, types only


def infer_t(env: Env, t: Term, fuel: Fuel | None = None) -> tuple[Type, CaptureSet]:
    """Type and capture set `infer` would produce, without the term."""
    fuel = fuel if fuel is not None else Fuel()
    supply = NameSupply.avoiding(env, t)
    return _infer_t(env, t, fuel, supply)


def _infer_t(env: Env, t: Term, fuel: Fuel, supply: NameSupply) -> tuple[Type, CaptureSet]:
    match t:
        case VarRef(x):
            fuel.spend("t-bi-var")
            return var_type(env, x), CaptureSet.of(x)

        case Abs(x, param, body):
            fuel.spend("t-bi-abs")
            wf_type(env, param)
            result, c = _infer_t(env.extend_var(x, param), body, fuel, supply)
            held = c.without([x])
            return Type(held, Fun(x, param, result)), held

        case TAbs(tv, bound, body):
            fuel.spend("t-bi-tabs")
            wf_type(env, bound)
            result, c = _infer_t(env.extend_tvar(tv, bound), body, fuel, supply)
            return Type(c, TFun(tv, bound, result)), c

        case App(fn, arg):
            fuel.spend("t-bi-app")
            c_fn, fn_type = unbox_var_t(env, fn)
            if not isinstance(fn_type.shape, Fun):
                raise NotAFunction(f"{fn} : {show(fn_type)} is not a function", rule="t-bi-app")
            f = fn_type.shape
            r = _adapt_t(env, var_type(env, arg), f.param, fuel, supply)
            if r.kind is Kind.Var:
                result = subst(f.result, f.binder, arg)
            else:
                yp = supply.fresh_var(arg.name)
                result = avoid(yp, f.param.cs, subst(f.result, f.binder, yp))
            return result, c_fn.union(fill_hole(r.leak, arg))

        case TApp(fn, sarg):
            fuel.spend("t-bi-tapp")
            c_fn, fn_type = unbox_var_t(env, fn)
            if not isinstance(fn_type.shape, TFun):
                raise NotATypeFunction(
                    f"{fn} : {show(fn_type)} is not a type function", rule="t-bi-tapp",
                )
            g = fn_type.shape
            wf_type(env, sarg)
            if not subtype(env, Type(EMPTY, sarg), Type(EMPTY, g.bound), fuel):
                raise SubtypeFailure(
                    f"type argument {show(sarg)} is not below {show(g.bound)}",
                    lhs=sarg, rhs=g.bound, rule="t-bi-tapp",
                )
            return subst(g.result, g.binder, sarg), c_fn

        case BoxV(x):
            fuel.spend("t-bi-box")
            inner = widen_var(env, x)
            if not covers(env, inner.cs):
                raise EscapeViolation(f"cannot box {show(inner.cs)}", rule="t-bi-box")
            return Type(EMPTY, Boxed(inner)), EMPTY

        case Unbox(annot, x):
            fuel.spend("t-bi-unbox")
            target = widen_var(env, x)
            if not isinstance(target.shape, Boxed):
                raise NotABoxed(f"{x} : {show(target)} is not boxed", rule="t-bi-unbox")
            inner = target.shape.inner
            check_unbox_sets(env, inner.cs, annot, "t-bi-unbox")
            return inner, annot.union(CaptureSet.of(x))

        case Let(x, bound, body):
            fuel.spend("t-bi-let")
            bt, c1 = _infer_t(env, bound, fuel, supply)
            ut, c2 = _infer_t(env.extend_var(x, bt), body, fuel, supply)
            if kind_of(bound) in (Kind.Var, Kind.Val) and x not in c2:
                held = c2
            else:
                held = c1.union(c2.without([x]))
            return avoid(x, bt.cs, ut), held

    raise TypeError(f"not a term: {t!r}")
