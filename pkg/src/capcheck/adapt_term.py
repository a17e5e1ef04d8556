"""Box adaptation at the term level.

`infer` elaborates a box-incomplete program into a box-explicit one the
checker accepts, threading coercions through `adapt_sub`. Where the
checker demands a subtype, the adapter instead asks for a coercion from
the variable's type to the expected type and splices the coerced term
in. Whenever the subtype judgment already holds, the coercion is the
variable itself, so well-typed programs come back unchanged.

The coercion rules mirror the subtyping rules one for one, plus a box
and an unbox rule for the two directions the checker cannot bridge.
Rules that build an eta-wrapper (functions, type functions, box-to-box)
normalize their own output so identity coercions collapse back to the
variable; the box and unbox rules keep their single administrative let,
and the application rules compact only the spine they introduce. The
root capability may never be boxed or unboxed, and violating that is an
EscapeViolation rather than a plain failure.
"""

from __future__ import annotations

from .checker import avoid, check_unbox_sets
from .errors import (
    AdaptFailure,
    EscapeViolation,
    IllFormedType,
    NotABoxed,
    NotAFunction,
    NotATypeFunction,
    SubcaptureFailure,
    SubtypeFailure,
)
from .normalize import compact_let, normalize
from .subcapture import subcapture
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
    cv,
    show,
    subst,
    wf_type,
)


def unbox_var(env: Env, x: Var) -> tuple[Term, Type]:
    """Dereference a variable for use in head position: a boxed variable
    whose interior set is in scope is opened with that set, anything else
    passes through at its widened type."""
    t = widen_var(env, x)
    if isinstance(t.shape, Boxed) and covers(env, t.shape.inner.cs):
        inner = t.shape.inner
        return Unbox(inner.cs, x), inner
    return VarRef(x), t


def adapt_sub(env: Env, x: Var, t: Type, u: Type, fuel: Fuel | None = None,
              supply: NameSupply | None = None) -> Term:
    """A term of type u built from the variable x assumed at type t.

    Returns VarRef(x) itself whenever subtype(env, t, u) holds; otherwise
    wraps x in the box/unbox coercions (and eta-expansions) that bridge
    the difference, or raises AdaptFailure when no rule bridges it.
    """
    fuel = fuel if fuel is not None else Fuel()
    supply = supply if supply is not None else NameSupply.avoiding(env, t, u, x)
    return _adapt(env, x, t, u, fuel, supply)


def box_adapt(env: Env, x: Var, u: Type, fuel: Fuel | None = None,
              supply: NameSupply | None = None) -> Term:
    """Adapt the in-scope variable x to the expected type u."""
    wf_type(env, u)
    fuel = fuel if fuel is not None else Fuel()
    supply = supply if supply is not None else NameSupply.avoiding(env, u, x)
    return _adapt(env, x, var_type(env, x), u, fuel, supply)


def _adapt(env: Env, x: Var, t: Type, u: Type, fuel: Fuel, supply: NameSupply) -> Term:
    s1, s2 = t.shape, u.shape
    # Top on the right wins outright, matching the subtype order: a boxed
    # value below Top stays put instead of being opened.
    if isinstance(s2, Top):
        fuel.spend("ba-top")
        require_subcapture(env, t.cs, u.cs, "ba-top")
        return VarRef(x)
    if isinstance(s1, Boxed) and isinstance(s2, Boxed):
        return _ba_boxed(env, x, s1.inner, s2.inner, fuel, supply)
    if isinstance(s1, Boxed):
        return _ba_unbox(env, x, s1.inner, u, fuel, supply)
    if isinstance(s1, TVarRef):
        if s1 == s2:
            fuel.spend("ba-refl")
            require_subcapture(env, t.cs, u.cs, "ba-refl")
            return VarRef(x)
        # Boxing the variable at its own type beats widening unless the
        # bound chain itself reaches a box that the boxed rule can reuse.
        if isinstance(s2, Boxed) and not isinstance(widen_tvar(env, s1.var), Boxed):
            return _ba_box(env, x, t, s2.inner, fuel, supply)
        fuel.spend("ba-tvar")
        return _adapt(env, x, Type(t.cs, env.lookup_tvar(s1.var)), u, fuel, supply)
    if isinstance(s2, Boxed):
        return _ba_box(env, x, t, s2.inner, fuel, supply)
    if isinstance(s1, Fun) and isinstance(s2, Fun):
        return _ba_fun(env, x, t, u, fuel, supply)
    if isinstance(s1, TFun) and isinstance(s2, TFun):
        return _ba_tfun(env, x, t, u, fuel, supply)
    raise AdaptFailure(f"no coercion from {show(t)} to {show(u)}", rule="ba-sub")


def _ba_boxed(env: Env, x: Var, inner1: Type, inner2: Type,
              fuel: Fuel, supply: NameSupply) -> Term:
    # Open the box, adapt the content, box it back. Identity content
    # collapses the whole round trip to the variable. The outer sets are
    # unconstrained: a box is pure whatever it holds.
    fuel.spend("ba-boxed")
    y = supply.fresh_var(x.name)
    t_y = _adapt(env, y, inner1, inner2, fuel, supply)
    z = supply.fresh_var("z")
    return normalize(Let(y, Unbox(inner1.cs, x), Let(z, t_y, BoxV(z))))


def _ba_box(env: Env, x: Var, t: Type, inner2: Type, fuel: Fuel,
            supply: NameSupply) -> Term:
    fuel.spend("ba-box")
    require_covers(env, inner2.cs, "ba-box")
    t_x = _adapt(env, x, t, inner2, fuel, supply)
    y = supply.fresh_var(x.name)
    return Let(y, t_x, BoxV(y))


def _ba_unbox(env: Env, x: Var, inner1: Type, u: Type, fuel: Fuel,
              supply: NameSupply) -> Term:
    fuel.spend("ba-unbox")
    require_covers(env, inner1.cs, "ba-unbox")
    y = supply.fresh_var(x.name)
    t_y = _adapt(env, y, inner1, u, fuel, supply)
    return Let(y, Unbox(inner1.cs, x), t_y)


def _ba_fun(env: Env, x_f: Var, t: Type, u: Type, fuel: Fuel, supply: NameSupply) -> Term:
    fuel.spend("ba-fun")
    f1, f2 = t.shape, u.shape
    x = supply.fresh_var(f2.binder.name)
    t_x = _adapt(env, x, f2.param, f1.param, fuel, supply)
    xp = supply.fresh_var(f2.binder.name)
    inner_env = env.extend_var(x, f2.param).extend_var(xp, f1.param)
    # The call argument is x itself when its coercion vanished, so the
    # dependent result must be instantiated with whichever variable the
    # compacted wrapper actually applies.
    arg = x if isinstance(t_x, VarRef) else xp
    r1 = subst(f1.result, f1.binder, arg)
    r2 = subst(f2.result, f2.binder, x)
    z = supply.fresh_var("z")
    t_z = _adapt(inner_env, z, r1, r2, fuel, supply)
    tn = normalize(Abs(x, f2.param, Let(xp, t_x, Let(z, App(x_f, xp), t_z))))
    require_subcapture(env, subst(cv(tn), x_f, t.cs), u.cs, "ba-fun")
    return tn


def _ba_tfun(env: Env, x_f: Var, t: Type, u: Type, fuel: Fuel, supply: NameSupply) -> Term:
    fuel.spend("ba-tfun")
    g1, g2 = t.shape, u.shape
    if not subtype(env, Type(EMPTY, g2.bound), Type(EMPTY, g1.bound), fuel):
        raise AdaptFailure(
            f"bound {show(g2.bound)} is not below {show(g1.bound)}", rule="ba-tfun",
        )
    w = supply.fresh_tvar(g2.binder.name)
    inner_env = env.extend_tvar(w, g2.bound)
    r1 = subst(g1.result, g1.binder, TVarRef(w))
    r2 = subst(g2.result, g2.binder, TVarRef(w))
    z = supply.fresh_var("z")
    t_z = _adapt(inner_env, z, r1, r2, fuel, supply)
    tn = normalize(TAbs(w, g2.bound, Let(z, TApp(x_f, TVarRef(w)), t_z)))
    require_subcapture(env, subst(cv(tn), x_f, t.cs), u.cs, "ba-tfun")
    return tn


def require_subcapture(env: Env, c1: CaptureSet, c2: CaptureSet, rule: str) -> None:
    if subcapture(env, c1, c2):
        return
    if c1.has_root and not c2.has_root:
        raise EscapeViolation(
            f"{show(c1)} carries the root capability past {show(c2)}", rule=rule,
        )
    raise SubcaptureFailure(
        f"{show(c1)} is not below {show(c2)}", lhs=c1, rhs=c2, rule=rule,
    )


def require_covers(env: Env, c: CaptureSet, rule: str) -> None:
    if covers(env, c):
        return
    if c.has_root:
        raise EscapeViolation(f"{show(c)} would move the root capability", rule=rule)
    raise IllFormedType(f"{show(c)} leaves the domain", rule=rule)


# ---------------------------------------------------------------------------
# Elaboration


def infer(env: Env, t: Term, fuel: Fuel | None = None) -> tuple[Term, Type]:
    """Elaborate a box-incomplete term into a checkable one and its type.

    Sound against the checker: when elaboration succeeds, the returned
    term typechecks at a subtype of the returned type. Complete over
    checkable inputs: a term the checker already accepts comes back
    unchanged, at the checker's type.
    """
    fuel = fuel if fuel is not None else Fuel()
    supply = NameSupply.avoiding(env, t)
    return _infer(env, t, fuel, supply)


def _infer(env: Env, t: Term, fuel: Fuel, supply: NameSupply) -> tuple[Term, Type]:
    match t:
        case VarRef(x):
            fuel.spend("bi-var")
            return t, var_type(env, x)

        case Abs(x, param, body):
            fuel.spend("bi-abs")
            wf_type(env, param)
            body2, result = _infer(env.extend_var(x, param), body, fuel, supply)
            return Abs(x, param, body2), Type(cv(body2).without([x]), Fun(x, param, result))

        case TAbs(tv, bound, body):
            fuel.spend("bi-tabs")
            wf_type(env, bound)
            body2, result = _infer(env.extend_tvar(tv, bound), body, fuel, supply)
            return TAbs(tv, bound, body2), Type(cv(body2), TFun(tv, bound, result))

        case App(fn, arg):
            fuel.spend("bi-app")
            t_fn, fn_type = unbox_var(env, fn)
            if not isinstance(fn_type.shape, Fun):
                raise NotAFunction(f"{fn} : {show(fn_type)} is not a function", rule="bi-app")
            f = fn_type.shape
            t_arg = _adapt(env, arg, var_type(env, arg), f.param, fuel, supply)
            xp = supply.fresh_var(fn.name)
            yp = supply.fresh_var(arg.name)
            inner = compact_let(Let(yp, t_arg, App(xp, yp)))
            term = compact_let(Let(xp, t_fn, inner))
            if isinstance(t_arg, VarRef):
                result = subst(f.result, f.binder, arg)
            else:
                result = avoid(yp, f.param.cs, subst(f.result, f.binder, yp))
            return term, result

        case TApp(fn, sarg):
            fuel.spend("bi-tapp")
            t_fn, fn_type = unbox_var(env, fn)
            if not isinstance(fn_type.shape, TFun):
                raise NotATypeFunction(
                    f"{fn} : {show(fn_type)} is not a type function", rule="bi-tapp",
                )
            g = fn_type.shape
            wf_type(env, sarg)
            if not subtype(env, Type(EMPTY, sarg), Type(EMPTY, g.bound), fuel):
                raise SubtypeFailure(
                    f"type argument {show(sarg)} is not below {show(g.bound)}",
                    lhs=sarg, rhs=g.bound, rule="bi-tapp",
                )
            xp = supply.fresh_var(fn.name)
            term = compact_let(Let(xp, t_fn, TApp(xp, sarg)))
            return term, subst(g.result, g.binder, sarg)

        case BoxV(x):
            fuel.spend("bi-box")
            inner = widen_var(env, x)
            if not covers(env, inner.cs):
                raise EscapeViolation(f"cannot box {show(inner.cs)}", rule="bi-box")
            return t, Type(EMPTY, Boxed(inner))

        case Unbox(annot, x):
            fuel.spend("bi-unbox")
            target = widen_var(env, x)
            if not isinstance(target.shape, Boxed):
                raise NotABoxed(f"{x} : {show(target)} is not boxed", rule="bi-unbox")
            inner = target.shape.inner
            check_unbox_sets(env, inner.cs, annot, "bi-unbox")
            return t, inner

        case Let(x, bound, body):
            fuel.spend("bi-let")
            bound2, bt = _infer(env, bound, fuel, supply)
            body2, ut = _infer(env.extend_var(x, bt), body, fuel, supply)
            return Let(x, bound2, body2), avoid(x, bt.cs, ut)

    raise TypeError(f"not a term: {t!r}")
