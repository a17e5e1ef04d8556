"""Failure types shared by the front end, the checker, and the adapters.

Every error carries the name of the rule that failed (when one applies), so
callers can report which premise broke without string-matching messages.
"""

from __future__ import annotations


class CheckError(Exception):
    """Base class for everything this package can reject."""

    def __init__(self, msg: str, rule: str | None = None):
        super().__init__(msg)
        self.rule = rule


class ParseError(CheckError):
    """Lexical or syntactic error, with 1-based line and column."""

    def __init__(self, msg: str, line: int, col: int):
        super().__init__(f"{line}:{col}: {msg}")
        self.line = line
        self.col = col


class MNFViolation(ParseError):
    """Application or elimination position holds a non-variable term."""


class IllFormedType(CheckError):
    """A type mentions a name not bound by the environment."""


class UnboundVariable(CheckError):
    """Lookup of a term or type variable failed."""


class NotAFunction(CheckError):
    """Application head does not widen to a function type."""


class NotATypeFunction(CheckError):
    """Type-application head does not widen to a type function."""


class NotABoxed(CheckError):
    """Unbox target does not widen to a boxed type."""


class SubtypeFailure(CheckError):
    """A subtyping premise failed; carries both sides."""

    def __init__(self, msg: str, lhs=None, rhs=None, rule: str | None = None):
        super().__init__(msg, rule)
        self.lhs = lhs
        self.rhs = rhs


class SubcaptureFailure(SubtypeFailure):
    """A subcapturing premise failed; carries both capture sets."""


class EscapeViolation(CheckError):
    """The root capability escaped through a box: some required
    C subset-of dom(env) premise failed on a set mentioning cap."""


class AdaptFailure(CheckError):
    """No adaptation rule applies to the given pair of types."""


class FuelExhausted(CheckError):
    """The fuel budget ran out; a distinct outcome, never a plain 'no'."""


class GenerationExhausted(CheckError):
    """The generator gave up after its bounded retry budget."""
