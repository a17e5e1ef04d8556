"""Normalization: compact the administrative lets and eta-wrappers the
adapter inserts, without changing meaning.

The pass is bottom-up. After normalizing the children of a let or a
lambda, one local compaction step may fire:

  let y = C unbox x in box y   -->  x            (box of a fresh unbox)
  let y = t in y               -->  t            (returning the binding)
  let y = x in t               -->  t[y := x]    (renaming a variable)
  fun (z: T) x z               -->  x  (z != x)  (eta for functions)
  tfun [X <: S] x [X]          -->  x            (eta for type functions)

Compaction never loops: each step fires at most once per node on the
way up, and the rewrites only shrink the term.
"""

from __future__ import annotations

from .syntax import (
    Abs,
    App,
    BoxV,
    Let,
    TAbs,
    TApp,
    Term,
    TVarRef,
    Unbox,
    VarRef,
    subst,
)


def normalize(t: Term) -> Term:
    match t:
        case Let(x, bound, body):
            return compact_let(Let(x, normalize(bound), normalize(body)))
        case Abs(x, param, body):
            return _compact_lam(Abs(x, param, normalize(body)))
        case TAbs(tv, bound, body):
            return _compact_lam(TAbs(tv, bound, normalize(body)))
        case _:
            return t


def compact_let(t: Let) -> Term:
    match t:
        case Let(y, Unbox(_, x), BoxV(z)) if z == y:
            return VarRef(x)
        case Let(y, bound, VarRef(z)) if z == y:
            return bound
        case Let(y, VarRef(x), body):
            return subst(body, y, x)
        case _:
            return t


def _compact_lam(t: Term) -> Term:
    match t:
        case Abs(z, _, App(x, w)) if w == z and x != z:
            return VarRef(x)
        case TAbs(tv, _, TApp(x, TVarRef(w))) if w == tv:
            return VarRef(x)
        case _:
            return t
