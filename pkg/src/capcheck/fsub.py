"""Erasure to bounded quantification without capture tracking.

Capture sets vanish, boxes vanish, and with them value dependency: an
erased function type is a plain arrow, because a term variable could
only ever appear in a capture set. What remains is a classic core with
Top, type variables, arrows, and bounded type abstraction, checked by
its own algorithmic subtyping with contravariant bounds.

`erase` maps programs and types into the core; `fsub_typecheck` runs
the core's judgment on the image. Both sides meter their work with the
same Fuel, so the harness can compare budgets across the boundary.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import NotAFunction, NotATypeFunction, SubtypeFailure, UnboundVariable
from .subtyping import Fuel
from .syntax import (
    Abs,
    App,
    Boxed,
    BoxV,
    Fun,
    Let,
    NameSupply,
    ShapeType,
    TAbs,
    TApp,
    Term,
    TFun,
    Top,
    TVar,
    TVarRef,
    Type,
    TypeBind,
    Unbox,
    Var,
    VarRef,
)

# ---------------------------------------------------------------------------
# The target language


@dataclass(frozen=True)
class FTop:
    pass


@dataclass(frozen=True)
class FTVar:
    var: TVar


@dataclass(frozen=True)
class FArrow:
    param: "FType"
    result: "FType"


@dataclass(frozen=True)
class FAll:
    binder: TVar
    bound: "FType"
    result: "FType"


FType = FTop | FTVar | FArrow | FAll


@dataclass(frozen=True)
class FVar:
    var: Var


@dataclass(frozen=True)
class FAbs:
    binder: Var
    param: FType
    body: "FTerm"


@dataclass(frozen=True)
class FTAbs:
    binder: TVar
    bound: FType
    body: "FTerm"


@dataclass(frozen=True)
class FApp:
    fn: Var
    arg: Var


@dataclass(frozen=True)
class FTApp:
    fn: Var
    sarg: FType


@dataclass(frozen=True)
class FLet:
    binder: Var
    bound: "FTerm"
    body: "FTerm"


FTerm = FVar | FAbs | FTAbs | FApp | FTApp | FLet


@dataclass(frozen=True)
class FEnv:
    """Telescope of term and type bindings for the erased core."""

    bindings: tuple[tuple[Var | TVar, FType], ...] = ()

    def extend_var(self, x: Var, t: FType) -> "FEnv":
        return FEnv(self.bindings + ((x, t),))

    def extend_tvar(self, tv: TVar, bound: FType) -> "FEnv":
        return FEnv(self.bindings + ((tv, bound),))

    def lookup_var(self, x: Var) -> FType:
        for name, t in reversed(self.bindings):
            if name == x:
                return t
        raise UnboundVariable(f"unbound variable {x}")

    def lookup_tvar(self, tv: TVar) -> FType:
        for name, t in reversed(self.bindings):
            if name == tv:
                return t
        raise UnboundVariable(f"unbound type variable {tv}")


def show_ftype(t: FType) -> str:
    match t:
        case FTop():
            return "Top"
        case FTVar(tv):
            return str(tv)
        case FArrow(p, r):
            return f"({show_ftype(p)}) -> {show_ftype(r)}"
        case FAll(tv, b, r):
            return f"all [{tv} <: {show_ftype(b)}] -> {show_ftype(r)}"
    raise TypeError(f"not an erased type: {t!r}")


def show_fterm(t: FTerm) -> str:
    match t:
        case FVar(x):
            return str(x)
        case FAbs(x, p, b):
            return f"fun ({x}: {show_ftype(p)}) {show_fterm(b)}"
        case FTAbs(tv, bd, b):
            return f"tfun [{tv} <: {show_ftype(bd)}] {show_fterm(b)}"
        case FApp(fn, arg):
            return f"{fn} {arg}"
        case FTApp(fn, sarg):
            return f"{fn} [{show_ftype(sarg)}]"
        case FLet(x, bound, body):
            return f"let {x} = {show_fterm(bound)} in {show_fterm(body)}"
    raise TypeError(f"not an erased term: {t!r}")


# ---------------------------------------------------------------------------
# Erasure


def erase_type(t: Type | ShapeType) -> FType:
    """Strip capture sets and boxes; dependency disappears with them."""
    match t:
        case Type(_, shape):
            return erase_type(shape)
        case Top():
            return FTop()
        case TVarRef(tv):
            return FTVar(tv)
        case Fun(_, param, result):
            return FArrow(erase_type(param), erase_type(result))
        case TFun(tv, bound, result):
            return FAll(tv, erase_type(bound), erase_type(result))
        case Boxed(inner):
            return erase_type(inner)
    raise TypeError(f"not a type: {t!r}")


def erase(t: Term) -> FTerm:
    """Strip box introductions and eliminations down to their variables."""
    match t:
        case VarRef(x):
            return FVar(x)
        case Abs(x, param, body):
            return FAbs(x, erase_type(param), erase(body))
        case TAbs(tv, bound, body):
            return FTAbs(tv, erase_type(bound), erase(body))
        case App(fn, arg):
            return FApp(fn, arg)
        case TApp(fn, sarg):
            return FTApp(fn, erase_type(sarg))
        case BoxV(x):
            return FVar(x)
        case Unbox(_, x):
            return FVar(x)
        case Let(x, bound, body):
            return FLet(x, erase(bound), erase(body))
    raise TypeError(f"not a term: {t!r}")


def erase_env(env) -> FEnv:
    fenv = FEnv()
    for bind in env.bindings:
        if isinstance(bind, TypeBind):
            fenv = fenv.extend_tvar(bind.tvar, erase_type(bind.bound))
        else:
            fenv = fenv.extend_var(bind.var, erase_type(bind.type))
    return fenv


# ---------------------------------------------------------------------------
# Substitution and alpha-equality


def subst_ftype(t: FType, tv: TVar, s: FType) -> FType:
    match t:
        case FTop():
            return t
        case FTVar(v):
            return s if v == tv else t
        case FArrow(p, r):
            return FArrow(subst_ftype(p, tv, s), subst_ftype(r, tv, s))
        case FAll(v, b, r):
            if v == tv:
                return FAll(v, subst_ftype(b, tv, s), r)
            return FAll(v, subst_ftype(b, tv, s), subst_ftype(r, tv, s))
    raise TypeError(f"not an erased type: {t!r}")


def f_alpha_eq(t: FType, u: FType) -> bool:
    match t, u:
        case FTop(), FTop():
            return True
        case FTVar(a), FTVar(b):
            return a == b
        case FArrow(p1, r1), FArrow(p2, r2):
            return f_alpha_eq(p1, p2) and f_alpha_eq(r1, r2)
        case FAll(v1, b1, r1), FAll(v2, b2, r2):
            if not f_alpha_eq(b1, b2):
                return False
            w = FTVar(TVar("#", 1 + _max_disamb(t) + _max_disamb(u)))
            return f_alpha_eq(subst_ftype(r1, v1, w), subst_ftype(r2, v2, w))
    return False


def _max_disamb(obj: FType | FTerm | FEnv) -> int:
    match obj:
        case FTop():
            return 0
        case FTVar(v):
            return v.disambiguator
        case FArrow(p, r):
            return max(_max_disamb(p), _max_disamb(r))
        case FAll(v, b, r):
            return max(v.disambiguator, _max_disamb(b), _max_disamb(r))
        case FVar(x):
            return x.disambiguator
        case FAbs(x, p, b):
            return max(x.disambiguator, _max_disamb(p), _max_disamb(b))
        case FTAbs(v, bd, b):
            return max(v.disambiguator, _max_disamb(bd), _max_disamb(b))
        case FApp(fn, arg):
            return max(fn.disambiguator, arg.disambiguator)
        case FTApp(fn, sarg):
            return max(fn.disambiguator, _max_disamb(sarg))
        case FLet(x, bound, body):
            return max(x.disambiguator, _max_disamb(bound), _max_disamb(body))
        case FEnv(bindings):
            return max((max(n.disambiguator, _max_disamb(t)) for n, t in bindings), default=0)
    raise TypeError(f"no disambiguators in {obj!r}")


# ---------------------------------------------------------------------------
# Subtyping, full variant: bounds compare contravariantly and the bodies
# are compared under the tighter bound, which is what lets hostile
# quantifier nests spin until the fuel runs out.


def fsub_subtype(fenv: FEnv, t: FType, u: FType, fuel: Fuel | None = None) -> bool:
    fuel = fuel if fuel is not None else Fuel()
    supply = NameSupply(1 + _max_disamb(fenv) + _max_disamb(t) + _max_disamb(u))
    return _fsub(fenv, t, u, fuel, supply)


def _fsub(fenv: FEnv, t: FType, u: FType, fuel: Fuel, supply: NameSupply) -> bool:
    if isinstance(u, FTop):
        fuel.spend("fs-top")
        return True
    if isinstance(t, FTVar):
        if t == u:
            fuel.spend("fs-refl")
            return True
        fuel.spend("fs-tvar")
        return _fsub(fenv, fenv.lookup_tvar(t.var), u, fuel, supply)
    match t, u:
        case FArrow(p1, r1), FArrow(p2, r2):
            fuel.spend("fs-arrow")
            return _fsub(fenv, p2, p1, fuel, supply) and _fsub(fenv, r1, r2, fuel, supply)
        case FAll(v1, b1, r1), FAll(v2, b2, r2):
            fuel.spend("fs-all")
            if not _fsub(fenv, b2, b1, fuel, supply):
                return False
            w = supply.fresh_tvar(v2.name)
            inner = fenv.extend_tvar(w, b2)
            sub1 = subst_ftype(r1, v1, FTVar(w))
            sub2 = subst_ftype(r2, v2, FTVar(w))
            return _fsub(inner, sub1, sub2, fuel, supply)
    return False


# ---------------------------------------------------------------------------
# Typechecking


def fsub_typecheck(fenv: FEnv, t: FTerm, fuel: Fuel | None = None) -> FType:
    fuel = fuel if fuel is not None else Fuel()
    supply = NameSupply(1 + _max_disamb(fenv) + _max_disamb(t))
    return _check(fenv, t, fuel, supply)


def _expose(fenv: FEnv, t: FType) -> FType:
    while isinstance(t, FTVar):
        t = fenv.lookup_tvar(t.var)
    return t


def _check(fenv: FEnv, t: FTerm, fuel: Fuel, supply: NameSupply) -> FType:
    match t:
        case FVar(x):
            fuel.spend("fs-var")
            return fenv.lookup_var(x)

        case FAbs(x, param, body):
            fuel.spend("fs-abs")
            result = _check(fenv.extend_var(x, param), body, fuel, supply)
            return FArrow(param, result)

        case FTAbs(tv, bound, body):
            fuel.spend("fs-tabs")
            result = _check(fenv.extend_tvar(tv, bound), body, fuel, supply)
            return FAll(tv, bound, result)

        case FApp(fn, arg):
            fuel.spend("fs-app")
            fn_type = _expose(fenv, fenv.lookup_var(fn))
            if not isinstance(fn_type, FArrow):
                raise NotAFunction(f"{fn} : {show_ftype(fn_type)} is not a function", rule="fs-app")
            actual = fenv.lookup_var(arg)
            if not _fsub(fenv, actual, fn_type.param, fuel, supply):
                raise SubtypeFailure(
                    f"argument {show_ftype(actual)} is not below {show_ftype(fn_type.param)}",
                    lhs=actual, rhs=fn_type.param, rule="fs-app",
                )
            return fn_type.result

        case FTApp(fn, sarg):
            fuel.spend("fs-tapp")
            fn_type = _expose(fenv, fenv.lookup_var(fn))
            if not isinstance(fn_type, FAll):
                raise NotATypeFunction(
                    f"{fn} : {show_ftype(fn_type)} is not a type function", rule="fs-tapp",
                )
            if not _fsub(fenv, sarg, fn_type.bound, fuel, supply):
                raise SubtypeFailure(
                    f"type argument {show_ftype(sarg)} is not below {show_ftype(fn_type.bound)}",
                    lhs=sarg, rhs=fn_type.bound, rule="fs-tapp",
                )
            return subst_ftype(fn_type.result, fn_type.binder, sarg)

        case FLet(x, bound, body):
            fuel.spend("fs-let")
            bt = _check(fenv, bound, fuel, supply)
            return _check(fenv.extend_var(x, bt), body, fuel, supply)

    raise TypeError(f"not an erased term: {t!r}")
