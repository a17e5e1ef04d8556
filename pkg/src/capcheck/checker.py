"""The syntax-directed typechecker for box-explicit programs.

One rule per term former; premises follow the algorithmic reading, so
there is no search. Let results go through `avoid`, which removes the
local binder from the type by polarity: covariant occurrences widen to
the bound term's capture set, contravariant ones are dropped.
"""

from __future__ import annotations

from .errors import (
    EscapeViolation,
    IllFormedType,
    NotABoxed,
    NotAFunction,
    NotATypeFunction,
    SubcaptureFailure,
    SubtypeFailure,
)
from .subcapture import subcapture
from .subtyping import Fuel, subtype, var_type, widen_var
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
    ShapeType,
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


def avoid(x: Var, d: CaptureSet, t: Type, positive: bool = True) -> Type:
    """Remove x from t: covariant occurrences are replaced by d,
    contravariant ones deleted. Parameters and bounds flip the polarity;
    results and box interiors keep it."""
    c = t.cs
    if x in c:
        c = c.without([x]).union(d) if positive else c.without([x])
    return Type(c, _avoid_shape(x, d, t.shape, positive))


def _avoid_shape(x: Var, d: CaptureSet, s: ShapeType, positive: bool) -> ShapeType:
    match s:
        case TVarRef() | Top():
            return s
        case Fun(z, p, r):
            p2 = avoid(x, d, p, not positive)
            if z == x:
                return Fun(z, p2, r)
            return Fun(z, p2, avoid(x, d, r, positive))
        case TFun(tv, b, r):
            return TFun(tv, _avoid_shape(x, d, b, not positive), avoid(x, d, r, positive))
        case Boxed(inner):
            return Boxed(avoid(x, d, inner, positive))
    raise TypeError(f"not a shape: {s!r}")


def typecheck(env: Env, t: Term, fuel: Fuel | None = None) -> Type:
    fuel = fuel if fuel is not None else Fuel()
    return _check(env, t, fuel)


def _check(env: Env, t: Term, fuel: Fuel) -> Type:
    match t:
        case VarRef(x):
            fuel.spend("alg-var")
            return var_type(env, x)

        case Abs(x, param, body):
            fuel.spend("alg-abs")
            wf_type(env, param)
            result = _check(env.extend_var(x, param), body, fuel)
            return Type(cv(body).without([x]), Fun(x, param, result))

        case TAbs(tv, bound, body):
            fuel.spend("alg-tabs")
            wf_type(env, bound)
            result = _check(env.extend_tvar(tv, bound), body, fuel)
            return Type(cv(body), TFun(tv, bound, result))

        case App(fn, arg):
            fuel.spend("alg-app")
            fn_type = widen_var(env, fn)
            if not isinstance(fn_type.shape, Fun):
                raise NotAFunction(f"{fn} : {show(fn_type)} is not a function", rule="alg-app")
            actual = _check(env, VarRef(arg), fuel)
            if not subtype(env, actual, fn_type.shape.param, fuel):
                raise SubtypeFailure(
                    f"argument {arg} : {show(actual)} is not below {show(fn_type.shape.param)}",
                    lhs=actual, rhs=fn_type.shape.param, rule="alg-app",
                )
            return subst(fn_type.shape.result, fn_type.shape.binder, arg)

        case TApp(fn, sarg):
            fuel.spend("alg-tapp")
            fn_type = widen_var(env, fn)
            if not isinstance(fn_type.shape, TFun):
                raise NotATypeFunction(f"{fn} : {show(fn_type)} is not a type function", rule="alg-tapp")
            wf_type(env, sarg)
            if not subtype(env, Type(EMPTY, sarg), Type(EMPTY, fn_type.shape.bound), fuel):
                raise SubtypeFailure(
                    f"type argument {show(sarg)} is not below {show(fn_type.shape.bound)}",
                    lhs=sarg, rhs=fn_type.shape.bound, rule="alg-tapp",
                )
            return subst(fn_type.shape.result, fn_type.shape.binder, sarg)

        case BoxV(x):
            fuel.spend("alg-box")
            inner = var_type(env, x)
            if not covers(env, inner.cs):
                raise EscapeViolation(f"cannot box {show(inner.cs)}", rule="alg-box")
            return Type(EMPTY, Boxed(inner))

        case Unbox(annot, x):
            fuel.spend("alg-unbox")
            target = widen_var(env, x)
            if not isinstance(target.shape, Boxed):
                raise NotABoxed(f"{x} : {show(target)} is not boxed", rule="alg-unbox")
            inner = target.shape.inner
            check_unbox_sets(env, inner.cs, annot, "alg-unbox")
            return inner

        case Let(x, bound, body):
            fuel.spend("alg-let")
            bound_type = _check(env, bound, fuel)
            body_type = _check(env.extend_var(x, bound_type), body, fuel)
            return avoid(x, bound_type.cs, body_type)

    raise TypeError(f"not a term: {t!r}")


def check_unbox_sets(env: Env, inner: CaptureSet, annot: CaptureSet, rule: str) -> None:
    """Shared by the checker and both adapters: the annotation set must be
    inside the domain and the boxed set must be below it."""
    if not covers(env, annot):
        if annot.has_root:
            raise EscapeViolation(f"{show(annot)} unboxes the root capability", rule=rule)
        raise IllFormedType(f"unbox annotation {show(annot)} leaves the domain", rule=rule)
    if not subcapture(env, inner, annot):
        if inner.has_root:
            raise EscapeViolation(
                f"boxed set {show(inner)} holds the root capability and is not below {show(annot)}",
                rule=rule,
            )
        raise SubcaptureFailure(
            f"boxed set {show(inner)} is not below {show(annot)}",
            lhs=inner, rhs=annot, rule=rule,
        )
