"""Error types shared across the compiler and the runtime.

Every error that can point at source carries a (line, col) pair, 1-based.
Compile-stage problems (syntax, scoping, rule well-formedness, update
discipline) are CompileError subclasses and map to exit code 2 in the CLI;
runtime faults are RuntimeFault subclasses and map to exit code 1.
"""

from __future__ import annotations


class AldaError(Exception):
    """Base class for everything raised deliberately by this package."""

    def __init__(self, msg: str, line: int | None = None, col: int | None = None):
        self.msg = msg
        self.line = line
        self.col = col
        super().__init__(str(self))

    def __str__(self) -> str:
        if self.line is not None and self.col is not None:
            return f"{self.line}:{self.col}: {self.msg}"
        if self.line is not None:
            return f"{self.line}: {self.msg}"
        return self.msg


# ---------------------------------------------------------------- compile


class CompileError(AldaError):
    """Any error detected before the program starts executing."""


class ParseError(CompileError):
    pass


class ScopeError(CompileError):
    """Name resolution failure: unknown rule set, self outside a class, ..."""


class RuleError(CompileError):
    """Rule well-formedness: unsafe variables, arity clashes, bad predicates."""


class StratificationError(CompileError):
    """Negation through a recursive cycle; no stratum assignment exists."""


class UpdateDisciplineError(CompileError):
    """A statement provably writes a derived predicate."""


# ----------------------------------------------------------------- facts


class FormatError(AldaError):
    """Malformed line in a fact file."""


class MixedPredicateError(AldaError):
    """A fact file mentions more than one predicate name."""


# ---------------------------------------------------------------- runtime


class RuntimeFault(AldaError):
    """Execution got stuck; .kind names the condition for tests and the CLI."""

    kind = "RuntimeFault"


class TypeFault(RuntimeFault):
    kind = "TypeError"


class FieldUndefined(RuntimeFault):
    kind = "FieldUndefined"


class NotATuple(RuntimeFault):
    kind = "NotATuple"


class IndexOutOfRange(RuntimeFault):
    kind = "IndexOutOfRange"


class EmptyAggregate(RuntimeFault):
    kind = "EmptyAggregate"


class IntOverflow(RuntimeFault):
    kind = "IntOverflow"


class MethodUndefined(RuntimeFault):
    kind = "MethodUndefined"


class ArityMismatch(RuntimeFault):
    kind = "ArityMismatch"


class UnknownClass(RuntimeFault):
    kind = "UnknownClass"


class UnknownRuleSet(RuntimeFault):
    kind = "UnknownRuleSet"


class NotABasePredicate(RuntimeFault):
    kind = "NotABasePredicate"


class UndefinedPredicate(RuntimeFault):
    kind = "UndefinedPredicate"


class DerivedWrite(RuntimeFault):
    """An update would change the stored value of a derived predicate."""

    kind = "DerivedWrite"


class BaseNotASet(RuntimeFault):
    """A base-predicate position holds something other than a set."""

    kind = "BaseNotASet"


class MaintenanceDivergence(RuntimeFault):
    """Cross-coupled rule sets failed to reach a maintenance fixed point."""

    kind = "MaintenanceDivergence"


class ArityError(AldaError):
    """Engine-level: a fact tuple does not match its predicate's arity."""
