"""Deterministic generators and the differential property runner.

Everything here is driven by a single 64-bit seed: the same GenConfig
always yields the same environments, types, and terms, so any failure
replays from the numbers in its report line. Generation is rule-directed
(pick a goal type, build a term that derives it), `drop_boxes` then
knocks out box introductions and eliminations to produce the inputs the
elaborator is supposed to repair, and `run_differential` executes named
properties over fresh cases, greedily shrinking whatever fails.

Generated quantifier bounds are either a plain earlier variable or
contain no type variables at all, so the bound-chasing subtype rules
cannot be sent spinning by accident; `hostile_pair` builds the spinning
query on purpose for tests that want to see FuelExhausted.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field, replace

from .adapt_term import adapt_sub, infer
from .adapt_type import infer_t
from .checker import typecheck
from .errors import CheckError, FuelExhausted, GenerationExhausted
from .fsub import erase, erase_env, fsub_typecheck
from .normalize import normalize
from .subtyping import Fuel, subtype, subtype_capt, var_type
from .syntax import (
    EMPTY,
    Abs,
    App,
    Boxed,
    BoxV,
    CaptureSet,
    Env,
    Fun,
    Kind,
    Let,
    NameSupply,
    ShapeType,
    TAbs,
    TApp,
    Term,
    TermBind,
    TFun,
    Top,
    TVar,
    TVarRef,
    Type,
    TypeBind,
    Unbox,
    Var,
    VarRef,
    alpha_eq,
    covers,
    cv,
    fv,
    kind_of,
    show,
    subst,
)

ROOT = CaptureSet(frozenset(), True)
MASK64 = (1 << 64) - 1


@dataclass(frozen=True)
class GenConfig:
    seed: int
    max_env: int = 5
    max_depth: int = 4
    box_bias: float = 0.5


@dataclass(frozen=True)
class Failure:
    prop: str
    seed: int
    case: dict
    outputs: dict


@dataclass
class Report:
    cases_run: int = 0
    failures: list = field(default_factory=list)
    findings: list = field(default_factory=list)


def case_seed(cfg: GenConfig, index: int) -> int:
    return (cfg.seed * 1_000_003 + index * 7_919 + 13) & MASK64


class _Dead(Exception):
    """A generation branch that cannot be completed; caller retries."""


# ---------------------------------------------------------------------------
# Environments and types


def _term_vars(env: Env) -> list[Var]:
    return [b.var for b in env.bindings if isinstance(b, TermBind)]


def _type_vars(env: Env) -> list[TVar]:
    return [b.tvar for b in env.bindings if isinstance(b, TypeBind)]


def gen_capture_set(rng: random.Random, env: Env, allow_root: bool = True) -> CaptureSet:
    pool = _term_vars(env)
    k = rng.randrange(min(3, len(pool)) + 1) if pool else 0
    picked = frozenset(rng.sample(pool, k)) if k else frozenset()
    has_root = allow_root and rng.random() < 0.15
    return CaptureSet(picked, has_root)


def gen_shape(rng: random.Random, env: Env, depth: int, supply: NameSupply,
              box_bias: float, in_box: bool = False,
              allow_tvars: bool = True) -> ShapeType:
    tvars = _type_vars(env) if allow_tvars else []
    roll = rng.random()
    if depth <= 0 or roll < 0.3:
        if tvars and not in_box and rng.random() < 0.4:
            return TVarRef(rng.choice(tvars))
        return Top()
    if roll < 0.3 + 0.35 * box_bias:
        # box interiors: no root capability, no bare type variable,
        # so both engines agree on what boxing a variable produces
        inner = gen_type(rng, env, depth - 1, supply, box_bias,
                         in_box=True, allow_tvars=False)
        return Boxed(inner)
    if roll < 0.75:
        z = supply.fresh_var("z")
        param = gen_type(rng, env, depth - 1, supply, box_bias, in_box=in_box,
                         allow_tvars=allow_tvars)
        inner_env = env.extend_var(z, param)
        result = gen_type(rng, inner_env, depth - 1, supply, box_bias, in_box=in_box,
                          allow_tvars=allow_tvars)
        return Fun(z, param, result)
    tv = supply.fresh_tvar("A")
    bound = gen_bound(rng, env, depth - 1, supply, box_bias)
    result = gen_type(rng, env.extend_tvar(tv, bound), depth - 1, supply, box_bias,
                      in_box=in_box, allow_tvars=allow_tvars)
    return TFun(tv, bound, result)


def gen_bound(rng: random.Random, env: Env, depth: int, supply: NameSupply,
              box_bias: float) -> ShapeType:
    """Bounds chain to an earlier variable or mention no variables at all."""
    tvars = _type_vars(env)
    if tvars and rng.random() < 0.3:
        return TVarRef(rng.choice(tvars))
    return gen_shape(rng, env, depth, supply, box_bias, allow_tvars=False)


def gen_type(rng: random.Random, env: Env, depth: int, supply: NameSupply,
             box_bias: float, in_box: bool = False,
             allow_tvars: bool = True) -> Type:
    cs = gen_capture_set(rng, env, allow_root=not in_box)
    shape = gen_shape(rng, env, depth, supply, box_bias, in_box=in_box,
                      allow_tvars=allow_tvars)
    return Type(cs, shape)


def gen_env(rng: random.Random, cfg: GenConfig, supply: NameSupply) -> Env:
    env = Env().extend_var(supply.fresh_var("io"), Type(ROOT, Top()))
    for _ in range(rng.randrange(cfg.max_env + 1)):
        if rng.random() < 0.25:
            tv = supply.fresh_tvar("T")
            env = env.extend_tvar(tv, gen_bound(rng, env, 2, supply, cfg.box_bias))
        else:
            x = supply.fresh_var(rng.choice("abcdefpq"))
            env = env.extend_var(x, gen_type(rng, env, 2, supply, cfg.box_bias))
    return env


# ---------------------------------------------------------------------------
# Terms, directed by a goal type


def _try_subtype(env: Env, t: Type, u: Type) -> bool:
    try:
        return subtype(env, t, u)
    except FuelExhausted:
        return False


def _validated(env: Env, t: Term, goal: Type) -> Term:
    try:
        got = typecheck(env, t)
    except CheckError:
        raise _Dead
    if not _try_subtype(env, got, goal):
        raise _Dead
    return t


def _build(rng: random.Random, env: Env, goal: Type, depth: int,
           supply: NameSupply, box_bias: float) -> Term:
    candidates = [x for x in _term_vars(env)
                  if _try_subtype(env, var_type(env, x), goal)]
    if candidates and (depth <= 0 or rng.random() < 0.4):
        return VarRef(rng.choice(candidates))

    if depth > 0:
        # occasionally route a non-box goal through a box and back
        if (rng.random() < box_bias and not isinstance(goal.shape, Boxed)
                and not goal.cs.has_root and covers(env, goal.cs)):
            try:
                boxed = Type(EMPTY, Boxed(goal))
                bound = _build(rng, env, boxed, depth - 1, supply, box_bias)
                w, v = supply.fresh_var("w"), supply.fresh_var("v")
                term = Let(w, bound, Let(v, Unbox(goal.cs, w), VarRef(v)))
                return _validated(env, term, goal)
            except _Dead:
                pass
        if rng.random() < 0.3:
            try:
                side_goal = gen_type(rng, env, 1, supply, box_bias)
                side = _build(rng, env, side_goal, depth - 1, supply, box_bias)
                x = supply.fresh_var("s")
                rest = _build(rng, env.extend_var(x, typecheck(env, side)),
                              goal, depth - 1, supply, box_bias)
                return _validated(env, Let(x, side, rest), goal)
            except (_Dead, CheckError):
                pass
        if rng.random() < 0.3 and depth >= 2:
            try:
                param = gen_type(rng, env, depth - 2, supply, box_bias)
                z = supply.fresh_var("z")
                fun_goal = Type(gen_capture_set(rng, env), Fun(z, param, goal))
                fn = _build(rng, env, fun_goal, depth - 1, supply, box_bias)
                arg = _build(rng, env, param, depth - 2, supply, box_bias)
                fv_, av = supply.fresh_var("f"), supply.fresh_var("a")
                term = Let(fv_, fn, Let(av, arg, App(fv_, av)))
                return _validated(env, term, goal)
            except _Dead:
                pass

        match goal.shape:
            case Fun(z, param, result):
                z2 = supply.fresh_var(z.name)
                body = _build(rng, env.extend_var(z2, param),
                              subst(result, z, z2), depth - 1, supply, box_bias)
                return _validated(env, Abs(z2, param, body), goal)
            case TFun(v, bound, result):
                v2 = supply.fresh_tvar(v.name)
                body = _build(rng, env.extend_tvar(v2, bound),
                              subst(result, v, TVarRef(v2)), depth - 1, supply, box_bias)
                return _validated(env, TAbs(v2, bound, body), goal)
            case Boxed(inner):
                if isinstance(inner.shape, TVarRef) or not covers(env, inner.cs):
                    raise _Dead
                bound = _build(rng, env, inner, depth - 1, supply, box_bias)
                try:
                    bound_type = typecheck(env, bound)
                except CheckError:
                    raise _Dead
                # boxing a variable whose shape is still a type variable
                # means the declared and the widened box interior differ;
                # keep such terms out of the corpus
                if isinstance(bound_type.shape, TVarRef):
                    raise _Dead
                w = supply.fresh_var("w")
                return _validated(env, Let(w, bound, BoxV(w)), goal)

    if candidates:
        return VarRef(rng.choice(candidates))
    z = supply.fresh_var("z")
    fallback = Abs(z, Type(EMPTY, Top()), VarRef(z))
    return _validated(env, fallback, goal)


def gen_welltyped(cfg: GenConfig) -> tuple[Env, Term]:
    rng = random.Random(cfg.seed)
    for _ in range(64):
        supply = NameSupply()
        env = gen_env(rng, cfg, supply)
        goal = gen_type(rng, env, min(2, cfg.max_depth), supply, cfg.box_bias)
        try:
            t = _build(rng, env, goal, cfg.max_depth, supply, cfg.box_bias)
            typecheck(env, t)
            return env, t
        except (_Dead, CheckError):
            continue
    raise GenerationExhausted(f"no well-typed term after 64 attempts (seed {cfg.seed})")


# ---------------------------------------------------------------------------
# Perturbation


def drop_boxes(t: Term, cfg: GenConfig) -> Term:
    """Rewrite a random subset of box introductions `let y = box x in u`
    and eliminations `let y = C unbox x in u` to [y := x]u, producing the
    box-incomplete programs the elaborator is meant to repair. The drop
    rate is cfg.box_bias."""
    rng = random.Random(cfg.seed ^ 0x9E3779B97F4A7C15)

    def walk(t: Term) -> Term:
        match t:
            case Let(y, BoxV(x), body) if rng.random() < cfg.box_bias:
                return subst(walk(body), y, x)
            case Let(y, Unbox(_, x), body) if rng.random() < cfg.box_bias:
                return subst(walk(body), y, x)
            case Let(y, bound, body):
                return Let(y, walk(bound), walk(body))
            case Abs(x, param, body):
                return Abs(x, param, walk(body))
            case TAbs(v, bound, body):
                return TAbs(v, bound, walk(body))
            case _:
                return t

    return walk(t)


# ---------------------------------------------------------------------------
# Subtype-true neighbours, for the pair-based properties


def gen_supertype_of(rng: random.Random, env: Env, t: Type, supply: NameSupply,
                     in_box: bool = False) -> Type:
    cs = t.cs
    if rng.random() < 0.3:
        cs = cs.union(gen_capture_set(rng, env, allow_root=not in_box))
    if rng.random() < 0.25:
        return Type(cs, Top())
    match t.shape:
        case Boxed(inner):
            return Type(cs, Boxed(gen_supertype_of(rng, env, inner, supply, in_box=True)))
        case Fun(z, param, result):
            z2 = supply.fresh_var(z.name)
            param2 = gen_subtype_of(rng, env, param, supply, in_box=in_box)
            inner_env = env.extend_var(z2, param2)
            result2 = gen_supertype_of(rng, inner_env, subst(result, z, z2), supply,
                                       in_box=in_box)
            return Type(cs, Fun(z2, param2, result2))
        case TFun(v, bound, result):
            v2 = supply.fresh_tvar(v.name)
            inner_env = env.extend_tvar(v2, bound)
            result2 = gen_supertype_of(rng, inner_env, subst(result, v, TVarRef(v2)),
                                       supply, in_box=in_box)
            return Type(cs, TFun(v2, bound, result2))
    return Type(cs, t.shape)


def gen_subtype_of(rng: random.Random, env: Env, t: Type, supply: NameSupply,
                   in_box: bool = False) -> Type:
    cs = t.cs
    if cs.vars and rng.random() < 0.3:
        keep = sorted(cs.vars, key=lambda v: (v.name, v.disambiguator))
        cs = CaptureSet(frozenset(rng.sample(keep, rng.randrange(len(keep) + 1))),
                        cs.has_root)
    match t.shape:
        case Boxed(inner):
            return Type(cs, Boxed(gen_subtype_of(rng, env, inner, supply, in_box=True)))
        case Fun(z, param, result):
            z2 = supply.fresh_var(z.name)
            param2 = gen_supertype_of(rng, env, param, supply, in_box=in_box)
            inner_env = env.extend_var(z2, param)
            result2 = gen_subtype_of(rng, inner_env, subst(result, z, z2), supply,
                                     in_box=in_box)
            return Type(cs, Fun(z2, param2, result2))
        case TFun(v, bound, result):
            v2 = supply.fresh_tvar(v.name)
            inner_env = env.extend_tvar(v2, bound)
            result2 = gen_subtype_of(rng, inner_env, subst(result, v, TVarRef(v2)),
                                     supply, in_box=in_box)
            return Type(cs, TFun(v2, bound, result2))
    return Type(cs, t.shape)


# ---------------------------------------------------------------------------
# The hostile query: a bound that re-enters itself under a flipped
# comparison, growing at every turn. Generated bounds never do this;
# tests and the --hostile fuzz mode use it to see FuelExhausted happen.


def hostile_pair(supply: NameSupply | None = None) -> tuple[Env, Type, Type]:
    supply = supply if supply is not None else NameSupply()

    def neg(s: ShapeType) -> ShapeType:
        return Fun(supply.fresh_var("z"), Type(EMPTY, s), Type(EMPTY, Top()))

    a, b, p = supply.fresh_tvar("A"), supply.fresh_tvar("B"), supply.fresh_tvar("P")
    theta = TFun(a, Top(), Type(EMPTY, neg(TFun(b, TVarRef(a), Type(EMPTY, neg(TVarRef(b)))))))
    env = Env().extend_tvar(p, theta)
    a2 = supply.fresh_tvar("A")
    query = TFun(a2, TVarRef(p), Type(EMPTY, neg(TVarRef(a2))))
    return env, Type(EMPTY, TVarRef(p)), Type(EMPTY, query)


# ---------------------------------------------------------------------------
# A deliberately wrong cv, for checking that the harness catches bugs


def broken_cv(t: Term) -> CaptureSet:
    """Like cv, except boxing fails to hide its content. Only mutation
    mode uses this; a differential run against it must produce failures,
    or the harness itself is not looking."""
    match t:
        case BoxV(x):
            return CaptureSet.of(x)
        case VarRef(x):
            return CaptureSet.of(x)
        case Abs(x, _, body):
            return broken_cv(body).without([x])
        case TAbs(_, _, body):
            return broken_cv(body)
        case App(f, a):
            return CaptureSet.of(f, a)
        case TApp(f, _):
            return CaptureSet.of(f)
        case Unbox(annot, x):
            return annot.union(CaptureSet.of(x))
        case Let(x, bound, body):
            inner = broken_cv(body)
            if kind_of(bound) is not Kind.Trm and x not in inner:
                return inner
            return broken_cv(bound).union(inner.without([x]))
    raise TypeError(f"not a term: {t!r}")


# ---------------------------------------------------------------------------
# Greedy shrinking: environment bindings first, then terms, then types


def _safely(pred, *args) -> bool:
    try:
        return bool(pred(*args))
    except Exception:
        return False


def _subterm_candidates(t: Term):
    match t:
        case Let(x, bound, body):
            yield bound
            if x not in fv(body):
                yield body
            for c in _subterm_candidates(bound):
                yield Let(x, c, body)
            for c in _subterm_candidates(body):
                yield Let(x, bound, c)
        case Abs(x, param, body):
            for c in _subterm_candidates(body):
                yield Abs(x, param, c)
        case TAbs(v, bound, body):
            for c in _subterm_candidates(body):
                yield TAbs(v, bound, c)
    # applications, boxes, unboxes, and variables are already minimal


def _type_candidates(t: Type):
    yield Type(EMPTY, Top())
    if t.cs != EMPTY:
        yield Type(EMPTY, t.shape)
    match t.shape:
        case Boxed(inner):
            yield inner
            for c in _type_candidates(inner):
                yield Type(t.cs, Boxed(c))
        case Fun(z, param, result):
            for c in _type_candidates(param):
                yield Type(t.cs, Fun(z, c, result))
            for c in _type_candidates(result):
                yield Type(t.cs, Fun(z, param, c))
        case TFun(v, bound, result):
            for c in _type_candidates(result):
                yield Type(t.cs, TFun(v, bound, c))


def shrink_case(env: Env, terms: tuple, types: tuple, still_fails):
    """Minimize a failing case. still_fails(env, terms, types) must
    reproduce the failure for a candidate to be kept; anything that blows
    up instead (out-of-scope names, ill-formed pieces) is rejected."""
    changed = True
    while changed:
        changed = False
        for i in reversed(range(len(env.bindings))):
            smaller = Env(env.bindings[:i] + env.bindings[i + 1:])
            if _safely(still_fails, smaller, terms, types):
                env = smaller
                changed = True
        for ti, t in enumerate(terms):
            for c in _subterm_candidates(t):
                cand = terms[:ti] + (c,) + terms[ti + 1:]
                if _safely(still_fails, env, cand, types):
                    terms = cand
                    changed = True
                    break
        for yi, y in enumerate(types):
            for c in _type_candidates(y):
                cand = types[:yi] + (c,) + types[yi + 1:]
                if _safely(still_fails, env, terms, cand):
                    types = cand
                    changed = True
                    break
    return env, terms, types


# ---------------------------------------------------------------------------
# Properties


def _render_env(env: Env) -> str:
    return "\n".join(str(b) for b in env.bindings)


def _fail(prop: str, seed: int, env: Env, outputs: dict, terms: tuple = (),
          types: tuple = ()) -> Failure:
    case = {"env": _render_env(env)}
    if terms:
        case["terms"] = [show(t) for t in terms]
    if types:
        case["types"] = [show(t) for t in types]
    return Failure(prop, seed, case, outputs)


def _run_term_engine(env: Env, t: Term):
    try:
        term, ty = infer(env, t)
        return "accept", term, ty
    except CheckError as e:
        return "reject", type(e).__name__, None


def _run_type_engine(env: Env, t: Term):
    try:
        ty, cs = infer_t(env, t)
        return "accept", ty, cs
    except CheckError as e:
        return "reject", type(e).__name__, None


def _prop_completeness(seed: int, cfg: GenConfig, opts: dict):
    env, t = gen_welltyped(replace(cfg, seed=seed))

    def bad(env2, terms, _types):
        (t2,) = terms
        want = typecheck(env2, t2)
        term3, ty3 = infer(env2, t2)
        return not (alpha_eq(term3, t2) and alpha_eq(ty3, want))

    if not _safely(bad, env, (t,), ()):
        return None, None
    env, (t,), _ = shrink_case(env, (t,), (), bad)
    term3, ty3 = infer(env, t)
    outputs = {"input": show(t), "typecheck": show(typecheck(env, t)),
               "infer term": show(term3), "infer type": show(ty3)}
    return _fail("adp-completeness", seed, env, outputs, terms=(t,)), None


def _prop_soundness(seed: int, cfg: GenConfig, opts: dict):
    sub = replace(cfg, seed=seed)
    env, t0 = gen_welltyped(sub)
    t = drop_boxes(t0, sub)

    def bad(env2, terms, _types):
        (t2,) = terms
        try:
            term3, ty3 = infer(env2, t2)
        except CheckError:
            return False
        try:
            got = typecheck(env2, term3)
        except CheckError:
            return True
        return not _try_subtype(env2, got, ty3)

    if not bad(env, (t,), ()):
        return None, None
    env, (t,), _ = shrink_case(env, (t,), (), bad)
    term3, ty3 = infer(env, t)
    try:
        checked = show(typecheck(env, term3))
    except CheckError as e:
        checked = type(e).__name__
    outputs = {"perturbed": show(t), "elaborated": show(term3),
               "claimed": show(ty3), "typecheck": checked}
    return _fail("adp-soundness", seed, env, outputs, terms=(t,)), None


def _prop_equivalence(seed: int, cfg: GenConfig, opts: dict):
    sub = replace(cfg, seed=seed)
    env, t0 = gen_welltyped(sub)
    cvf = broken_cv if opts.get("mutate_cv") else cv

    def bad(env2, terms, _types):
        (t2,) = terms
        a = _run_term_engine(env2, t2)
        b = _run_type_engine(env2, t2)
        if a[0] != b[0]:
            return True
        if a[0] == "reject":
            return a[1] != b[1]
        return not (alpha_eq(a[2], b[1]) and b[2] == cvf(a[1]))

    for t in (t0, drop_boxes(t0, sub)):
        if not bad(env, (t,), ()):
            continue
        env2, (t2,), _ = shrink_case(env, (t,), (), bad)
        a = _run_term_engine(env2, t2)
        b = _run_type_engine(env2, t2)
        outputs = {
            "term engine": a[1] if a[0] == "reject"
            else f"{show(a[1])} : {show(a[2])} cv {show(cvf(a[1]))}",
            "type engine": b[1] if b[0] == "reject"
            else f"{show(b[1])} capture {show(b[2])}",
        }
        return _fail("adp-adpt-equivalence", seed, env2, outputs, terms=(t2,)), None
    return None, None


def _prop_reflexivity(seed: int, cfg: GenConfig, opts: dict):
    rng = random.Random(seed)
    supply = NameSupply()
    env = gen_env(rng, replace(cfg, seed=seed), supply)
    t = gen_type(rng, env, cfg.max_depth, supply, cfg.box_bias)

    def bad(env2, _terms, types):
        (t2,) = types
        return not subtype(env2, t2, t2)

    if not bad(env, (), (t,)):
        return None, None
    env, _, (t,) = shrink_case(env, (), (t,), bad)
    return _fail("sub-reflexivity", seed, env,
                 {"verdict": "subtype(T, T) is false"}, types=(t,)), None


def _prop_transitivity(seed: int, cfg: GenConfig, opts: dict):
    rng = random.Random(seed)
    supply = NameSupply()
    env = gen_env(rng, replace(cfg, seed=seed), supply)
    mid = gen_type(rng, env, cfg.max_depth, supply, cfg.box_bias)
    lo = gen_subtype_of(rng, env, mid, supply)
    hi = gen_supertype_of(rng, env, mid, supply)

    def premises(env2, lo2, mid2, hi2):
        return subtype(env2, lo2, mid2) and subtype(env2, mid2, hi2)

    if not premises(env, lo, mid, hi):
        outputs = {"verdict": "generated premise does not hold",
                   "lo<:mid": str(subtype(env, lo, mid)),
                   "mid<:hi": str(subtype(env, mid, hi))}
        return _fail("sub-transitivity", seed, env, outputs, types=(lo, mid, hi)), None

    def bad(env2, _terms, types):
        lo2, mid2, hi2 = types
        return premises(env2, lo2, mid2, hi2) and not subtype(env2, lo2, hi2)

    if not bad(env, (), (lo, mid, hi)):
        return None, None
    env, _, (lo, mid, hi) = shrink_case(env, (), (lo, mid, hi), bad)
    return _fail("sub-transitivity", seed, env,
                 {"verdict": "premises hold, conclusion fails"},
                 types=(lo, mid, hi)), None


def _route(check, env: Env, t: Type, u: Type):
    try:
        return check(env, t, u)
    except FuelExhausted:
        return "fuel"


def _prop_routes_agree(seed: int, cfg: GenConfig, opts: dict):
    rng = random.Random(seed)
    supply = NameSupply()
    if opts.get("hostile") and rng.random() < 0.25:
        env, t, u = hostile_pair(supply)
    else:
        env = gen_env(rng, replace(cfg, seed=seed), supply)
        t = gen_type(rng, env, cfg.max_depth, supply, cfg.box_bias)
        u = (gen_supertype_of(rng, env, t, supply) if rng.random() < 0.5
             else gen_type(rng, env, cfg.max_depth, supply, cfg.box_bias))

    def bad(env2, _terms, types):
        t2, u2 = types
        a = _route(subtype, env2, t2, u2)
        b = _route(subtype_capt, env2, t2, u2)
        if "fuel" in (a, b):
            return False
        return a != b

    if not bad(env, (), (t, u)):
        return None, None
    env, _, (t, u) = shrink_case(env, (), (t, u), bad)
    outputs = {"subtype": str(_route(subtype, env, t, u)),
               "subtype_capt": str(_route(subtype_capt, env, t, u))}
    return _fail("sub-capt-equivalence", seed, env, outputs, types=(t, u)), None


def _prop_adapt_identity(seed: int, cfg: GenConfig, opts: dict):
    rng = random.Random(seed)
    supply = NameSupply()
    env = gen_env(rng, replace(cfg, seed=seed), supply)
    t = gen_type(rng, env, cfg.max_depth, supply, cfg.box_bias)
    u = gen_supertype_of(rng, env, t, supply)
    q = supply.fresh_var("q")

    if not subtype(env, t, u):
        return _fail("adapt-identity", seed, env,
                     {"verdict": "generated pair is not subtype-true"},
                     types=(t, u)), None

    def bad(env2, _terms, types):
        t2, u2 = types
        if not subtype(env2, t2, u2):
            return False
        return adapt_sub(env2, q, t2, u2) != VarRef(q)

    if not _safely(bad, env, (), (t, u)):
        return None, None
    env, _, (t, u) = shrink_case(env, (), (t, u), bad)
    try:
        got = show(adapt_sub(env, q, t, u))
    except CheckError as e:
        got = type(e).__name__
    return _fail("adapt-identity", seed, env, {"adapt_sub": got}, types=(t, u)), None


def _prop_normalize(seed: int, cfg: GenConfig, opts: dict):
    env, t = gen_welltyped(replace(cfg, seed=seed))

    def bad(env2, terms, _types):
        (t2,) = terms
        want = typecheck(env2, t2)
        tn = normalize(t2)
        try:
            got = typecheck(env2, tn)
        except CheckError:
            return True
        return not _try_subtype(env2, got, want)

    if not _safely(bad, env, (t,), ()):
        return None, None
    env, (t,), _ = shrink_case(env, (t,), (), bad)
    tn = normalize(t)
    try:
        got = show(typecheck(env, tn))
    except CheckError as e:
        got = type(e).__name__
    outputs = {"normalized": show(tn), "original type": show(typecheck(env, t)),
               "normalized type": got}
    return _fail("normalize-preservation", seed, env, outputs, terms=(t,)), None


def _prop_termination_mirror(seed: int, cfg: GenConfig, opts: dict):
    sub = replace(cfg, seed=seed)
    env, t0 = gen_welltyped(sub)
    t = drop_boxes(t0, sub)
    f_fuel = Fuel()
    try:
        fsub_typecheck(erase_env(env), erase(t), f_fuel)
    except CheckError:
        return None, None
    cc_fuel = Fuel()
    try:
        infer(env, t, fuel=cc_fuel)
    except FuelExhausted:
        def bad(env2, terms, _types):
            (t2,) = terms
            fsub_typecheck(erase_env(env2), erase(t2), Fuel())
            try:
                infer(env2, t2, fuel=Fuel())
            except FuelExhausted:
                return True
            return False

        env, (t,), _ = shrink_case(env, (t,), (), bad)
        outputs = {"erased fuel": str(f_fuel.used),
                   "verdict": "infer exhausted fuel on a terminating image"}
        return _fail("termination-mirror", seed, env, outputs, terms=(t,)), None
    except CheckError:
        return None, None
    ratio = opts.get("fuel_ratio", 8)
    if cc_fuel.used > ratio * max(1, f_fuel.used):
        finding = {"prop": "termination-mirror", "seed": seed,
                   "erased fuel": f_fuel.used, "infer fuel": cc_fuel.used,
                   "note": f"needed more than {ratio}x the erased budget"}
        return None, finding
    return None, None


PROPERTIES = {
    "adp-completeness": _prop_completeness,
    "adp-soundness": _prop_soundness,
    "adp-adpt-equivalence": _prop_equivalence,
    "sub-reflexivity": _prop_reflexivity,
    "sub-transitivity": _prop_transitivity,
    "sub-capt-equivalence": _prop_routes_agree,
    "adapt-identity": _prop_adapt_identity,
    "normalize-preservation": _prop_normalize,
    "termination-mirror": _prop_termination_mirror,
}


def run_differential(cfg: GenConfig, properties: list[str], count: int = 100,
                     mutate_cv: bool = False, hostile: bool = False,
                     fuel_ratio: int = 8) -> Report:
    """Run each named property over `count` freshly generated cases.
    Failures are minimized and sorted; every one replays from its seed."""
    opts = {"mutate_cv": mutate_cv, "hostile": hostile, "fuel_ratio": fuel_ratio}
    for name in properties:
        if name not in PROPERTIES:
            raise ValueError(f"unknown property {name!r}; "
                             f"known: {', '.join(sorted(PROPERTIES))}")
    report = Report()
    for name in properties:
        prop = PROPERTIES[name]
        for i in range(count):
            seed = case_seed(cfg, i)
            report.cases_run += 1
            try:
                failure, finding = prop(seed, cfg, opts)
            except GenerationExhausted:
                report.findings.append({"prop": name, "seed": seed,
                                        "note": "generation exhausted"})
                continue
            if failure is not None:
                report.failures.append(failure)
            if finding is not None:
                report.findings.append(finding)
    report.failures.sort(key=lambda f: (f.prop, f.seed))
    report.findings.sort(key=lambda f: (f["prop"], f["seed"]))
    return report
