"""Core syntax: variables, capture sets, types, terms, environments.

Terms are kept in monadic normal form by construction: application,
type application, box, and unbox all take plain variables, and `let`
provides the only sequencing. Binders carry a disambiguator so that two
live binders never collide; alpha-equivalence (`alpha_eq`) is the
equality every judgment uses.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from enum import Enum
from typing import Iterable, Iterator, Union

from .errors import IllFormedType, MNFViolation, ParseError, UnboundVariable

# ---------------------------------------------------------------------------
# Variables


@dataclass(frozen=True, order=True)
class Var:
    """Term variable. The disambiguator keeps generated binders apart."""

    name: str
    disambiguator: int = 0

    def __str__(self) -> str:
        if self.disambiguator == 0:
            return self.name
        return f"{self.name}#{self.disambiguator}"


@dataclass(frozen=True, order=True)
class TVar:
    """Type variable."""

    name: str
    disambiguator: int = 0

    def __str__(self) -> str:
        if self.disambiguator == 0:
            return self.name
        return f"{self.name}#{self.disambiguator}"


# ---------------------------------------------------------------------------
# Capture sets


@dataclass(frozen=True)
class CaptureSet:
    """A finite set of term variables plus an optional root capability."""

    vars: frozenset[Var] = frozenset()
    has_root: bool = False

    @staticmethod
    def of(*vs: Var, root: bool = False) -> "CaptureSet":
        return CaptureSet(frozenset(vs), root)

    def union(self, other: "CaptureSet") -> "CaptureSet":
        return CaptureSet(self.vars | other.vars, self.has_root or other.has_root)

    def without(self, vs: Iterable[Var]) -> "CaptureSet":
        return CaptureSet(self.vars - frozenset(vs), self.has_root)

    def is_empty(self) -> bool:
        return not self.vars and not self.has_root

    def __contains__(self, v: Var) -> bool:
        return v in self.vars

    def __str__(self) -> str:
        return show(self)


EMPTY = CaptureSet()
ROOT = CaptureSet(frozenset(), True)


@dataclass(frozen=True)
class HoledCaptureSet:
    """A capture set that may additionally contain the hole marker."""

    base: CaptureSet = EMPTY
    has_hole: bool = False

    def union(self, other: "HoledCaptureSet") -> "HoledCaptureSet":
        return HoledCaptureSet(self.base.union(other.base), self.has_hole or other.has_hole)

    def __str__(self) -> str:
        return show(self)


# ---------------------------------------------------------------------------
# Types


class ShapeType:
    """Base class of shapes: the capture-free skeleton of a type."""

    def __str__(self) -> str:
        return show(self)


@dataclass(frozen=True)
class TVarRef(ShapeType):
    """Shape: a type variable."""

    var: TVar


@dataclass(frozen=True)
class Top(ShapeType):
    """Shape: the top type."""


TOP = Top()


@dataclass(frozen=True)
class Type:
    """A capturing type C S. A bare shape is represented with C = {}."""

    cs: CaptureSet
    shape: ShapeType

    def __str__(self) -> str:
        return show(self)


def Shape(shape: ShapeType) -> Type:
    """The bare-shape form of a type; identical to {} S everywhere."""
    return Type(EMPTY, shape)


def Capturing(cs: CaptureSet, shape: ShapeType) -> Type:
    return Type(cs, shape)


@dataclass(frozen=True)
class Fun(ShapeType):
    """Shape: dependent function type, all (x: T) -> U."""

    binder: Var
    param: Type
    result: Type


@dataclass(frozen=True)
class TFun(ShapeType):
    """Shape: bounded type function, all [X <: S] -> T."""

    binder: TVar
    bound: ShapeType
    result: Type


@dataclass(frozen=True)
class Boxed(ShapeType):
    """Shape: a boxed type, Box T."""

    inner: Type


# ---------------------------------------------------------------------------
# Terms


class Term:
    """Base class of terms in monadic normal form."""

    def __str__(self) -> str:
        return show(self)


@dataclass(frozen=True)
class VarRef(Term):
    """Term: a variable occurrence."""

    var: Var


@dataclass(frozen=True)
class Abs(Term):
    """Term: fun (x: T) body."""

    binder: Var
    param: Type
    body: Term


@dataclass(frozen=True)
class TAbs(Term):
    """Term: tfun [X <: S] body."""

    binder: TVar
    bound: ShapeType
    body: Term


@dataclass(frozen=True)
class App(Term):
    """Term: application of a variable to a variable."""

    fn: Var
    arg: Var


@dataclass(frozen=True)
class TApp(Term):
    """Term: type application x [S]."""

    fn: Var
    arg: ShapeType


@dataclass(frozen=True)
class BoxV(Term):
    """Term: box x."""

    var: Var


@dataclass(frozen=True)
class Unbox(Term):
    """Term: C unbox x."""

    cs: CaptureSet
    var: Var


@dataclass(frozen=True)
class Let(Term):
    """Term: let x = bound in body."""

    binder: Var
    bound: Term
    body: Term


class Kind(Enum):
    """Syntactic kind of a term: variable, value, or general term."""

    Var = "Var"
    Val = "Val"
    Trm = "Trm"


def kind_of(t: Term) -> Kind:
    match t:
        case VarRef():
            return Kind.Var
        case Abs() | TAbs() | BoxV():
            return Kind.Val
        case _:
            return Kind.Trm


def is_answer(t: Term) -> bool:
    """Answers are the terms evaluation stops at: values and variables."""
    return kind_of(t) is not Kind.Trm


# ---------------------------------------------------------------------------
# Environments


@dataclass(frozen=True)
class TermBind:
    var: Var
    type: Type

    def __str__(self) -> str:
        return f"{show(self.var)} : {show(self.type)}"


@dataclass(frozen=True)
class TypeBind:
    tvar: TVar
    bound: ShapeType

    def __str__(self) -> str:
        return f"{show(self.tvar)} <: {show(self.bound)}"


Binding = Union[TermBind, TypeBind]


@dataclass(frozen=True)
class Env:
    """An ordered telescope of term and type bindings, never shadowing."""

    bindings: tuple = ()

    @staticmethod
    def of(*bs: Binding) -> "Env":
        env = Env()
        for b in bs:
            env = env.extend(b)
        return env

    def extend(self, b: Binding) -> "Env":
        if isinstance(b, TermBind):
            if self.has_var(b.var):
                raise IllFormedType(f"shadowed binding for {b.var}")
        else:
            if self.has_tvar(b.tvar):
                raise IllFormedType(f"shadowed binding for {b.tvar}")
        return Env(self.bindings + (b,))

    def extend_var(self, x: Var, t: Type) -> "Env":
        return self.extend(TermBind(x, t))

    def extend_tvar(self, tv: TVar, bound: ShapeType) -> "Env":
        return self.extend(TypeBind(tv, bound))

    def lookup_var(self, x: Var) -> Type:
        for b in self.bindings:
            if isinstance(b, TermBind) and b.var == x:
                return b.type
        raise UnboundVariable(f"unbound term variable {x}")

    def lookup_tvar(self, tv: TVar) -> ShapeType:
        for b in self.bindings:
            if isinstance(b, TypeBind) and b.tvar == tv:
                return b.bound
        raise UnboundVariable(f"unbound type variable {tv}")

    def has_var(self, x: Var) -> bool:
        return any(isinstance(b, TermBind) and b.var == x for b in self.bindings)

    def has_tvar(self, tv: TVar) -> bool:
        return any(isinstance(b, TypeBind) and b.tvar == tv for b in self.bindings)

    def dom_vars(self) -> frozenset[Var]:
        return frozenset(b.var for b in self.bindings if isinstance(b, TermBind))

    def depth_of(self, x: Var) -> int:
        for i, b in enumerate(self.bindings):
            if isinstance(b, TermBind) and b.var == x:
                return i
        raise UnboundVariable(f"unbound term variable {x}")

    def term_binds(self) -> Iterator[TermBind]:
        return (b for b in self.bindings if isinstance(b, TermBind))

    def __iter__(self) -> Iterator[Binding]:
        return iter(self.bindings)

    def __len__(self) -> int:
        return len(self.bindings)

    def __str__(self) -> str:
        return show(self)


def covers(env: Env, cs: CaptureSet) -> bool:
    """C subset-of dom(env); the root capability is never in the domain."""
    return not cs.has_root and cs.vars <= env.dom_vars()


# ---------------------------------------------------------------------------
# Fresh names

_Syntax = Union[Term, Type, ShapeType, CaptureSet, Env, Var, TVar]


def max_disamb(obj: _Syntax) -> int:
    """Largest disambiguator anywhere in obj (0 if none)."""
    best = 0

    def var(v) -> None:
        nonlocal best
        best = max(best, v.disambiguator)

    def walk(o) -> None:
        match o:
            case Var() | TVar():
                var(o)
            case CaptureSet(vs, _):
                for v in vs:
                    var(v)
            case Type(cs_, shape):
                walk(cs_)
                walk(shape)
            case TVarRef(tv):
                var(tv)
            case Top():
                pass
            case Fun(x, p, r):
                var(x), walk(p), walk(r)
            case TFun(tv, b, r):
                var(tv), walk(b), walk(r)
            case Boxed(inner):
                walk(inner)
            case VarRef(x):
                var(x)
            case Abs(x, p, b):
                var(x), walk(p), walk(b)
            case TAbs(tv, s, b):
                var(tv), walk(s), walk(b)
            case App(f, a):
                var(f), var(a)
            case TApp(f, s):
                var(f), walk(s)
            case BoxV(x):
                var(x)
            case Unbox(c, x):
                walk(c), var(x)
            case Let(x, s, b):
                var(x), walk(s), walk(b)
            case Env(bs):
                for bind in bs:
                    if isinstance(bind, TermBind):
                        var(bind.var), walk(bind.type)
                    else:
                        var(bind.tvar), walk(bind.bound)

    walk(obj)
    return best


class NameSupply:
    """Fresh-name source, threaded explicitly by the algorithms that
    allocate binders. Seed it above everything in scope and the freshly
    drawn variables can never collide."""

    def __init__(self, start: int = 1):
        self._next = max(1, start)

    @classmethod
    def avoiding(cls, *objs: _Syntax) -> "NameSupply":
        return cls(max((max_disamb(o) for o in objs), default=0) + 1)

    def fresh_var(self, hint: str = "x") -> Var:
        v = Var(hint, self._next)
        self._next += 1
        return v

    def fresh_tvar(self, hint: str = "X") -> TVar:
        tv = TVar(hint, self._next)
        self._next += 1
        return tv


# ---------------------------------------------------------------------------
# Captured and free variables


def cv(t: Term) -> CaptureSet:
    """Captured variables. Boxing hides its content; unboxing surfaces the
    annotation set; a let hides an unused answer binding entirely."""
    match t:
        case VarRef(x):
            return CaptureSet.of(x)
        case Abs(x, _, body):
            return cv(body).without([x])
        case TAbs(_, _, body):
            return cv(body)
        case App(f, a):
            return CaptureSet.of(f, a)
        case TApp(f, _):
            return CaptureSet.of(f)
        case BoxV(_):
            return EMPTY
        case Unbox(c, x):
            return c.union(CaptureSet.of(x))
        case Let(x, s, body):
            body_cv = cv(body)
            if is_answer(s) and x not in body_cv:
                return body_cv
            return cv(s).union(body_cv.without([x]))
    raise TypeError(f"not a term: {t!r}")


def fv(t: Term) -> frozenset[Var]:
    """Free term variables, annotations included. Unlike cv, box does not
    hide and let never discards its bound term."""
    match t:
        case VarRef(x):
            return frozenset([x])
        case Abs(x, p, body):
            return _tfv_terms(p) | (fv(body) - {x})
        case TAbs(_, s, body):
            return _tfv_terms(s) | fv(body)
        case App(f, a):
            return frozenset([f, a])
        case TApp(f, s):
            return frozenset([f]) | _tfv_terms(s)
        case BoxV(x):
            return frozenset([x])
        case Unbox(c, x):
            return c.vars | {x}
        case Let(x, s, body):
            return fv(s) | (fv(body) - {x})
    raise TypeError(f"not a term: {t!r}")


def fv_type(t: Type | ShapeType) -> frozenset:
    """Free variables of a type: both term variables (from capture sets and
    dependent results) and type variables."""
    match t:
        case Type(cs_, shape):
            return frozenset(cs_.vars) | fv_type(shape)
        case TVarRef(tv):
            return frozenset([tv])
        case Top():
            return frozenset()
        case Fun(x, p, r):
            return fv_type(p) | (fv_type(r) - {x})
        case TFun(tv, b, r):
            return fv_type(b) | (fv_type(r) - {tv})
        case Boxed(inner):
            return fv_type(inner)
    raise TypeError(f"not a type: {t!r}")


def _tfv_terms(t: Type | ShapeType) -> frozenset[Var]:
    return frozenset(v for v in fv_type(t) if isinstance(v, Var))


def cs(t: Type) -> CaptureSet:
    """The capture set of a type (empty for a bare shape)."""
    return t.cs


# ---------------------------------------------------------------------------
# Substitution


def subst(target, src, dst):
    """[src := dst] target.

    Three forms: variable for variable (terms, types, capture sets),
    capture set for variable (capture sets), and shape for type variable
    (terms and types). Capture-avoiding; binders equal to dst are renamed
    apart first, though uniquified inputs never need it.
    """
    if isinstance(src, Var) and isinstance(dst, Var):
        return _rename(target, src, dst)
    if isinstance(src, Var) and isinstance(dst, CaptureSet):
        if not isinstance(target, CaptureSet):
            raise TypeError("capture-set substitution applies to capture sets")
        return _splice(target, src, dst)
    if isinstance(src, TVar) and isinstance(dst, ShapeType):
        return _tsubst(target, src, dst)
    raise TypeError(f"unsupported substitution {src!r} := {dst!r}")


def _splice(c: CaptureSet, x: Var, repl: CaptureSet) -> CaptureSet:
    if x not in c:
        return c
    return CaptureSet(c.vars - {x}, c.has_root).union(repl)


def _rename_cs(c: CaptureSet, x: Var, y: Var) -> CaptureSet:
    if x not in c:
        return c
    return CaptureSet((c.vars - {x}) | {y}, c.has_root)


def _rename(t, x: Var, y: Var):
    def var(v: Var) -> Var:
        return y if v == x else v

    match t:
        case CaptureSet():
            return _rename_cs(t, x, y)
        case Type(c, shape):
            return Type(_rename_cs(c, x, y), _rename(shape, x, y))
        case TVarRef() | Top():
            return t
        case Fun(z, p, r):
            p2 = _rename(p, x, y)
            if z == x:
                return Fun(z, p2, r)
            if z == y:
                z2, r = _freshen_var(z, r, y)
                return Fun(z2, p2, _rename(r, x, y))
            return Fun(z, p2, _rename(r, x, y))
        case TFun(tv, b, r):
            return TFun(tv, _rename(b, x, y), _rename(r, x, y))
        case Boxed(inner):
            return Boxed(_rename(inner, x, y))
        case VarRef(v):
            return VarRef(var(v))
        case Abs(z, p, body):
            p2 = _rename(p, x, y)
            if z == x:
                return Abs(z, p2, body)
            if z == y:
                z2, body = _freshen_var(z, body, y)
                return Abs(z2, p2, _rename(body, x, y))
            return Abs(z, p2, _rename(body, x, y))
        case TAbs(tv, s, body):
            return TAbs(tv, _rename(s, x, y), _rename(body, x, y))
        case App(f, a):
            return App(var(f), var(a))
        case TApp(f, s):
            return TApp(var(f), _rename(s, x, y))
        case BoxV(v):
            return BoxV(var(v))
        case Unbox(c, v):
            return Unbox(_rename_cs(c, x, y), var(v))
        case Let(z, s, body):
            s2 = _rename(s, x, y)
            if z == x:
                return Let(z, s2, body)
            if z == y:
                z2, body = _freshen_var(z, body, y)
                return Let(z2, s2, _rename(body, x, y))
            return Let(z, s2, _rename(body, x, y))
    raise TypeError(f"cannot rename in {t!r}")


def _freshen_var(z: Var, scope, avoid: Var):
    z2 = Var(z.name, max(max_disamb(scope), z.disambiguator, avoid.disambiguator) + 1)
    return z2, _rename(scope, z, z2)


def _tsubst(t, x: TVar, s: ShapeType):
    match t:
        case Type(c, shape):
            return Type(c, _tsubst(shape, x, s))
        case TVarRef(tv):
            return s if tv == x else t
        case Top():
            return t
        case Fun(z, p, r):
            return Fun(z, _tsubst(p, x, s), _tsubst(r, x, s))
        case TFun(tv, b, r):
            b2 = _tsubst(b, x, s)
            if tv == x:
                return TFun(tv, b2, r)
            if tv in fv_type(s):
                tv2 = TVar(tv.name, max(max_disamb(r), max_disamb(s)) + 1)
                r = _tsubst_rename_tvar(r, tv, tv2)
                return TFun(tv2, b2, _tsubst(r, x, s))
            return TFun(tv, b2, _tsubst(r, x, s))
        case Boxed(inner):
            return Boxed(_tsubst(inner, x, s))
        case VarRef() | App() | BoxV() | Unbox():
            return t
        case Abs(z, p, body):
            return Abs(z, _tsubst(p, x, s), _tsubst(body, x, s))
        case TAbs(tv, b, body):
            b2 = _tsubst(b, x, s)
            if tv == x:
                return TAbs(tv, b2, body)
            return TAbs(tv, b2, _tsubst(body, x, s))
        case TApp(f, arg):
            return TApp(f, _tsubst(arg, x, s))
    raise TypeError(f"cannot substitute in {t!r}")


def _tsubst_rename_tvar(t, old: TVar, new: TVar):
    return _tsubst(t, old, TVarRef(new))


# ---------------------------------------------------------------------------
# Well-formedness


def wf_type(env: Env, t: Type | ShapeType) -> None:
    """Check that every name in t is bound by env; raise IllFormedType."""
    match t:
        case Type(c, shape):
            _wf_cs(env, c)
            wf_type(env, shape)
        case TVarRef(tv):
            if not env.has_tvar(tv):
                raise IllFormedType(f"unbound type variable {tv}")
        case Top():
            pass
        case Fun(x, p, r):
            wf_type(env, p)
            wf_type(env.extend_var(x, p), r)
        case TFun(tv, b, r):
            wf_type(env, b)
            wf_type(env.extend_tvar(tv, b), r)
        case Boxed(inner):
            wf_type(env, inner)
        case _:
            raise TypeError(f"not a type: {t!r}")


def _wf_cs(env: Env, c: CaptureSet) -> None:
    for v in c.vars:
        if not env.has_var(v):
            raise IllFormedType(f"unbound variable {v} in capture set")
    # The root capability is always admissible in a well-formed set.


def wf_env(env: Env) -> None:
    """Each binding must be well-formed in the prefix before it."""
    prefix = Env()
    for b in env:
        if isinstance(b, TermBind):
            wf_type(prefix, b.type)
        else:
            wf_type(prefix, b.bound)
        prefix = prefix.extend(b)


def is_simple_formed(t: Type | ShapeType) -> bool:
    """Simple-formed types never stack a capture set directly on a box."""
    match t:
        case Type(c, shape):
            if not c.is_empty() and isinstance(shape, Boxed):
                return False
            return is_simple_formed(shape)
        case TVarRef() | Top():
            return True
        case Fun(_, p, r):
            return is_simple_formed(p) and is_simple_formed(r)
        case TFun(_, b, r):
            return is_simple_formed(b) and is_simple_formed(r)
        case Boxed(inner):
            return is_simple_formed(inner)
    raise TypeError(f"not a type: {t!r}")


# ---------------------------------------------------------------------------
# Alpha-equivalence


def alpha_eq(a, b) -> bool:
    """Structural equality modulo bound-variable names."""
    return _aeq(a, b, {}, {}, 0)


def _akey(v, m):
    return m.get(v, v)


def _acs(c: CaptureSet, m) -> tuple:
    return (frozenset(_akey(v, m) for v in c.vars), c.has_root)


def _aeq(a, b, ma, mb, lvl) -> bool:
    if type(a) is not type(b):
        return False
    match a, b:
        case (CaptureSet(), CaptureSet()):
            return _acs(a, ma) == _acs(b, mb)
        case (Type(_, _), Type(_, _)):
            return _acs(a.cs, ma) == _acs(b.cs, mb) and _aeq(a.shape, b.shape, ma, mb, lvl)
        case (TVarRef(x), TVarRef(y)):
            return _akey(x, ma) == _akey(y, mb)
        case (Top(), Top()):
            return True
        case (Fun(x1, p1, r1), Fun(x2, p2, r2)):
            if not _aeq(p1, p2, ma, mb, lvl):
                return False
            return _aeq(r1, r2, {**ma, x1: lvl}, {**mb, x2: lvl}, lvl + 1)
        case (TFun(v1, b1, r1), TFun(v2, b2, r2)):
            if not _aeq(b1, b2, ma, mb, lvl):
                return False
            return _aeq(r1, r2, {**ma, v1: lvl}, {**mb, v2: lvl}, lvl + 1)
        case (Boxed(i1), Boxed(i2)):
            return _aeq(i1, i2, ma, mb, lvl)
        case (VarRef(x), VarRef(y)):
            return _akey(x, ma) == _akey(y, mb)
        case (Abs(x1, p1, t1), Abs(x2, p2, t2)):
            if not _aeq(p1, p2, ma, mb, lvl):
                return False
            return _aeq(t1, t2, {**ma, x1: lvl}, {**mb, x2: lvl}, lvl + 1)
        case (TAbs(v1, s1, t1), TAbs(v2, s2, t2)):
            if not _aeq(s1, s2, ma, mb, lvl):
                return False
            return _aeq(t1, t2, {**ma, v1: lvl}, {**mb, v2: lvl}, lvl + 1)
        case (App(f1, a1), App(f2, a2)):
            return _akey(f1, ma) == _akey(f2, mb) and _akey(a1, ma) == _akey(a2, mb)
        case (TApp(f1, s1), TApp(f2, s2)):
            return _akey(f1, ma) == _akey(f2, mb) and _aeq(s1, s2, ma, mb, lvl)
        case (BoxV(x), BoxV(y)):
            return _akey(x, ma) == _akey(y, mb)
        case (Unbox(c1, x), Unbox(c2, y)):
            return _acs(c1, ma) == _acs(c2, mb) and _akey(x, ma) == _akey(y, mb)
        case (Let(x1, s1, t1), Let(x2, s2, t2)):
            if not _aeq(s1, s2, ma, mb, lvl):
                return False
            return _aeq(t1, t2, {**ma, x1: lvl}, {**mb, x2: lvl}, lvl + 1)
    return False


# ---------------------------------------------------------------------------
# Parsing

_KEYWORDS = {"fun", "tfun", "box", "unbox", "let", "in", "all", "cap", "Top", "Box"}
_TOKEN = re.compile(r"[A-Za-z_][A-Za-z0-9_]*|<:|->|[{}()\[\]:=,]")


@dataclass(frozen=True)
class _Tok:
    text: str
    line: int
    col: int


def _lex(text: str) -> list[_Tok]:
    toks: list[_Tok] = []
    line, col = 1, 1
    i = 0
    while i < len(text):
        ch = text[i]
        if ch == "\n":
            line, col = line + 1, 1
            i += 1
            continue
        if ch.isspace():
            col += 1
            i += 1
            continue
        m = _TOKEN.match(text, i)
        if not m:
            raise ParseError(f"unexpected character {ch!r}", line, col)
        toks.append(_Tok(m.group(0), line, col))
        col += m.end() - i
        i = m.end()
    return toks


class _Parser:
    """Recursive-descent parser over the surface grammar. Binders that
    shadow an in-scope name receive a fresh disambiguator so the produced
    tree never holds two nested binders with the same identity."""

    def __init__(self, toks: list[_Tok]):
        self.toks = toks
        self.i = 0
        self._var_scope: dict[str, list[Var]] = {}
        self._tvar_scope: dict[str, list[TVar]] = {}
        self._binder_count: dict[str, int] = {}
        self._tbinder_count: dict[str, int] = {}
        self._free_seen: set[str] = set()
        self._tfree_seen: set[str] = set()

    # Token plumbing

    def _peek(self) -> _Tok | None:
        return self.toks[self.i] if self.i < len(self.toks) else None

    def _next(self) -> _Tok:
        t = self._peek()
        if t is None:
            last = self.toks[-1] if self.toks else _Tok("", 1, 1)
            raise ParseError("unexpected end of input", last.line, last.col + len(last.text))
        self.i += 1
        return t

    def _expect(self, text: str) -> _Tok:
        t = self._next()
        if t.text != text:
            raise ParseError(f"expected {text!r}, found {t.text!r}", t.line, t.col)
        return t

    def _at_eof(self) -> None:
        t = self._peek()
        if t is not None:
            raise ParseError(f"trailing input starting at {t.text!r}", t.line, t.col)

    # Scoping

    def _resolve_var(self, name: str) -> Var:
        stack = self._var_scope.get(name)
        if stack:
            return stack[-1]
        self._free_seen.add(name)
        return Var(name, 0)

    def _resolve_tvar(self, name: str) -> TVar:
        stack = self._tvar_scope.get(name)
        if stack:
            return stack[-1]
        self._tfree_seen.add(name)
        return TVar(name, 0)

    def _bind_var(self, name: str) -> Var:
        d = self._binder_count.get(name, 0)
        if d == 0 and name in self._free_seen:
            d = 1
        self._binder_count[name] = d + 1
        v = Var(name, d)
        self._var_scope.setdefault(name, []).append(v)
        return v

    def _bind_tvar(self, name: str) -> TVar:
        d = self._tbinder_count.get(name, 0)
        if d == 0 and name in self._tfree_seen:
            d = 1
        self._tbinder_count[name] = d + 1
        tv = TVar(name, d)
        self._tvar_scope.setdefault(name, []).append(tv)
        return tv

    def _unbind_var(self, v: Var) -> None:
        self._var_scope[v.name].pop()

    def _unbind_tvar(self, tv: TVar) -> None:
        self._tvar_scope[tv.name].pop()

    def _ident(self, *, upper: bool) -> _Tok:
        t = self._next()
        if not t.text[0].isalpha() and t.text[0] != "_":
            raise ParseError(f"expected an identifier, found {t.text!r}", t.line, t.col)
        if t.text in _KEYWORDS:
            raise ParseError(f"keyword {t.text!r} cannot name a variable", t.line, t.col)
        if upper and not t.text[0].isupper():
            raise ParseError(f"type variables start uppercase: {t.text!r}", t.line, t.col)
        if not upper and t.text[0].isupper():
            raise ParseError(f"term variables start lowercase: {t.text!r}", t.line, t.col)
        return t

    # Grammar

    def term(self) -> Term:
        t = self._peek()
        if t is None:
            raise ParseError("expected a term", 1, 1)
        if t.text == "(":
            raise MNFViolation(
                "parenthesized subterm; name it with let instead", t.line, t.col
            )
        if t.text == "fun":
            self._next()
            self._expect("(")
            name = self._ident(upper=False).text
            self._expect(":")
            param = self.type_()  # annotation sits outside the binder's scope
            self._expect(")")
            x = self._bind_var(name)
            try:
                body = self.term()
            finally:
                self._unbind_var(x)
            return Abs(x, param, body)
        if t.text == "tfun":
            self._next()
            self._expect("[")
            name = self._ident(upper=True).text
            self._expect("<:")
            bound = self.shape()
            self._expect("]")
            tv = self._bind_tvar(name)
            try:
                body = self.term()
            finally:
                self._unbind_tvar(tv)
            return TAbs(tv, bound, body)
        if t.text == "box":
            self._next()
            x = self._resolve_var(self._ident(upper=False).text)
            return BoxV(x)
        if t.text == "let":
            self._next()
            name = self._ident(upper=False).text
            self._expect("=")
            bound = self.term()
            x = self._bind_var(name)
            try:
                self._expect("in")
                body = self.term()
            finally:
                self._unbind_var(x)
            return Let(x, bound, body)
        if t.text == "{":
            c = self.capture_set()
            self._expect("unbox")
            x = self._resolve_var(self._ident(upper=False).text)
            return Unbox(c, x)
        if t.text in _KEYWORDS:
            raise ParseError(f"unexpected {t.text!r}", t.line, t.col)
        head_tok = self._ident(upper=False)
        head = self._resolve_var(head_tok.text)
        nxt = self._peek()
        if nxt is None:
            return VarRef(head)
        if nxt.text == "[":
            self._next()
            s = self.shape()
            self._expect("]")
            return TApp(head, s)
        if nxt.text in ("(", "{"):
            raise MNFViolation(
                "application argument must be a variable", nxt.line, nxt.col
            )
        if nxt.text not in _KEYWORDS and (nxt.text[0].isalpha() or nxt.text[0] == "_"):
            if nxt.text[0].isupper():
                raise ParseError(
                    f"type argument must be bracketed: [{nxt.text}]", nxt.line, nxt.col
                )
            self._next()
            return App(head, self._resolve_var(nxt.text))
        return VarRef(head)

    def type_(self) -> Type:
        t = self._peek()
        if t is not None and t.text == "{":
            c = self.capture_set()
            return Type(c, self.shape())
        return Type(EMPTY, self.shape())

    def shape(self) -> ShapeType:
        t = self._next()
        if t.text == "Top":
            return TOP
        if t.text == "Box":
            return Boxed(self.type_())
        if t.text == "all":
            nxt = self._next()
            if nxt.text == "(":
                name = self._ident(upper=False).text
                self._expect(":")
                param = self.type_()
                self._expect(")")
                self._expect("->")
                x = self._bind_var(name)
                try:
                    result = self.type_()
                finally:
                    self._unbind_var(x)
                return Fun(x, param, result)
            if nxt.text == "[":
                name = self._ident(upper=True).text
                self._expect("<:")
                bound = self.shape()
                self._expect("]")
                self._expect("->")
                tv = self._bind_tvar(name)
                try:
                    result = self.type_()
                finally:
                    self._unbind_tvar(tv)
                return TFun(tv, bound, result)
            raise ParseError(f"expected '(' or '[' after 'all', found {nxt.text!r}", nxt.line, nxt.col)
        if t.text[0].isupper() and t.text not in _KEYWORDS:
            return TVarRef(self._resolve_tvar(t.text))
        raise ParseError(f"expected a shape type, found {t.text!r}", t.line, t.col)

    def capture_set(self) -> CaptureSet:
        self._expect("{")
        vs: set[Var] = set()
        root = False
        t = self._peek()
        if t is not None and t.text == "}":
            self._next()
            return EMPTY
        while True:
            tok = self._next()
            if tok.text == "cap":
                root = True
            elif (tok.text[0].isalpha() or tok.text[0] == "_") and tok.text not in _KEYWORDS:
                if tok.text[0].isupper():
                    raise ParseError(
                        f"capture sets hold term variables, found {tok.text!r}",
                        tok.line, tok.col,
                    )
                vs.add(self._resolve_var(tok.text))
            else:
                raise ParseError(f"expected a variable or 'cap', found {tok.text!r}", tok.line, tok.col)
            nxt = self._next()
            if nxt.text == "}":
                return CaptureSet(frozenset(vs), root)
            if nxt.text != ",":
                raise ParseError(f"expected ',' or '}}', found {nxt.text!r}", nxt.line, nxt.col)


def parse_term(text: str) -> Term:
    p = _Parser(_lex(text))
    t = p.term()
    p._at_eof()
    return t


def parse_type(text: str) -> Type:
    p = _Parser(_lex(text))
    t = p.type_()
    p._at_eof()
    return t


def parse_capture_set(text: str) -> CaptureSet:
    p = _Parser(_lex(text))
    c = p.capture_set()
    p._at_eof()
    return c


def parse_env(text: str) -> Env:
    """One binding per line: `x : T` or `X <: S`. Later lines may mention
    earlier names; well-formedness is checked separately by wf_env."""
    env = Env()
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        toks = [_Tok(t.text, lineno, t.col) for t in _lex(line)]
        if len(toks) < 2:
            raise ParseError("expected `x : T` or `X <: S`", lineno, 1)
        name, sep = toks[0], toks[1]
        body = _Parser(toks[2:])
        if sep.text == ":":
            if name.text[0].isupper():
                raise ParseError("term bindings use a lowercase name", lineno, name.col)
            ty = body.type_()
            body._at_eof()
            env = env.extend_var(Var(name.text, 0), ty)
        elif sep.text == "<:":
            if not name.text[0].isupper():
                raise ParseError("type bindings use an uppercase name", lineno, name.col)
            s = body.shape()
            body._at_eof()
            env = env.extend_tvar(TVar(name.text, 0), s)
        else:
            raise ParseError(f"expected ':' or '<:', found {sep.text!r}", lineno, sep.col)
    return env


# ---------------------------------------------------------------------------
# Printing


class _Printer:
    def __init__(self, taken: set[str]):
        self.taken = set(taken)
        self.names: dict = {}

    def _display(self, v) -> str:
        if v in self.names:
            return self.names[v]
        if v.disambiguator == 0:
            return v.name
        return f"{v.name}_{v.disambiguator}"

    def _push(self, v) -> str:
        base = v.name
        cand = base
        k = 1
        while cand in self.taken:
            cand = f"{base}_{k}"
            k += 1
        self.taken.add(cand)
        self.names[v] = cand
        return cand

    def _pop(self, v) -> None:
        self.taken.discard(self.names.pop(v))

    def cset(self, c: CaptureSet) -> str:
        parts = sorted(self._display(v) for v in c.vars)
        if c.has_root:
            parts.append("cap")
        return "{" + ", ".join(parts) + "}"

    def type_(self, t: Type) -> str:
        if t.cs.is_empty():
            return self.shape(t.shape)
        return f"{self.cset(t.cs)} {self.shape(t.shape)}"

    def shape(self, s: ShapeType) -> str:
        match s:
            case TVarRef(tv):
                return self._display(tv)
            case Top():
                return "Top"
            case Boxed(inner):
                return f"Box {self.type_(inner)}"
            case Fun(x, p, r):
                ps = self.type_(p)
                nm = self._push(x)
                try:
                    return f"all ({nm}: {ps}) -> {self.type_(r)}"
                finally:
                    self._pop(x)
            case TFun(tv, b, r):
                bs = self.shape(b)
                nm = self._push(tv)
                try:
                    return f"all [{nm} <: {bs}] -> {self.type_(r)}"
                finally:
                    self._pop(tv)
        raise TypeError(f"not a shape: {s!r}")

    def term(self, t: Term) -> str:
        match t:
            case VarRef(x):
                return self._display(x)
            case Abs(x, p, body):
                ps = self.type_(p)
                nm = self._push(x)
                try:
                    return f"fun ({nm}: {ps}) {self.term(body)}"
                finally:
                    self._pop(x)
            case TAbs(tv, s, body):
                ss = self.shape(s)
                nm = self._push(tv)
                try:
                    return f"tfun [{nm} <: {ss}] {self.term(body)}"
                finally:
                    self._pop(tv)
            case App(f, a):
                return f"{self._display(f)} {self._display(a)}"
            case TApp(f, s):
                return f"{self._display(f)} [{self.shape(s)}]"
            case BoxV(x):
                return f"box {self._display(x)}"
            case Unbox(c, x):
                return f"{self.cset(c)} unbox {self._display(x)}"
            case Let(x, s, body):
                ss = self.term(s)
                nm = self._push(x)
                try:
                    return f"let {nm} = {ss} in {self.term(body)}"
                finally:
                    self._pop(x)
        raise TypeError(f"not a term: {t!r}")


def _free_names(obj) -> set[str]:
    match obj:
        case Term():
            vs: set = set(fv(obj))
        case Type() | TVarRef() | Top() | Fun() | TFun() | Boxed():
            vs = set(fv_type(obj))
        case CaptureSet():
            vs = set(obj.vars)
        case _:
            vs = set()
    return {v.name if v.disambiguator == 0 else f"{v.name}_{v.disambiguator}" for v in vs}


def show(obj) -> str:
    """Render syntax back to the surface grammar (environments as lines).
    Binder names are uniquified against everything in scope, so parsing
    the output yields an alpha-equal tree."""
    match obj:
        case Var() | TVar():
            if obj.disambiguator == 0:
                return obj.name
            return f"{obj.name}_{obj.disambiguator}"
        case CaptureSet():
            return _Printer(_free_names(obj)).cset(obj)
        case HoledCaptureSet(base, hole):
            inner = _Printer(_free_names(base)).cset(base)
            if not hole:
                return inner
            if inner == "{}":
                return "{<>}"
            return inner[:-1].rstrip() + ", <>}"
        case Type():
            return _Printer(_free_names(obj)).type_(obj)
        case TVarRef() | Top() | Fun() | TFun() | Boxed():
            return _Printer(_free_names(obj)).shape(obj)
        case Term():
            return _Printer(_free_names(obj)).term(obj)
        case Env():
            return "\n".join(str(b) for b in obj)
    raise TypeError(f"cannot print {obj!r}")
