"""AST node types.

One set of dataclasses covers both the surface syntax and the kernel the
lowering passes produce; the kernel is the subset described by
`lowering.check_kernel`.  Locations don't participate in equality, so a
parse -> print -> parse trip compares equal structurally.

Name resolution rewrites `Name` into `LocalRef` (parameters and
loop/quantifier variables, which are substitution scoped), field accesses
on `SelfExpr`, or field accesses on `GvRef` (the hidden globals record).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Optional, Union


@dataclass(frozen=True)
class Loc:
    line: int
    col: int


@dataclass(frozen=True)
class Node:
    loc: Optional[Loc] = field(default=None, compare=False, repr=False, kw_only=True)


# ------------------------------------------------------------ expressions


class Expr(Node):
    pass


@dataclass(frozen=True)
class Lit(Expr):
    value: Any  # None | bool | int | str


@dataclass(frozen=True)
class Name(Expr):
    id: str


@dataclass(frozen=True)
class SelfExpr(Expr):
    pass


@dataclass(frozen=True)
class LocalRef(Expr):
    """A parameter or an iteration/quantifier variable: bound by
    substitution, never stored on the heap, never assignable."""

    id: str


@dataclass(frozen=True)
class GvRef(Expr):
    """The globals record (printed as _gv in kernel dumps)."""


@dataclass(frozen=True)
class FieldAccess(Expr):
    obj: Expr
    field: str


@dataclass(frozen=True)
class TupleExpr(Expr):
    items: tuple[Expr, ...]


@dataclass(frozen=True)
class SetLit(Expr):
    items: tuple[Expr, ...]


@dataclass(frozen=True)
class SeqLit(Expr):
    items: tuple[Expr, ...]


@dataclass(frozen=True)
class Not(Expr):
    e: Expr


@dataclass(frozen=True)
class BoolOp(Expr):
    op: str  # 'and' | 'or'; 'and' is surface only
    left: Expr
    right: Expr


@dataclass(frozen=True)
class IsOp(Expr):
    left: Expr
    right: Expr


@dataclass(frozen=True)
class InOp(Expr):
    item: Expr
    coll: Expr
    negated: bool = False


@dataclass(frozen=True)
class Plus(Expr):
    left: Expr
    right: Expr


@dataclass(frozen=True)
class IsTuple(Expr):
    e: Expr


@dataclass(frozen=True)
class LenOp(Expr):
    e: Expr


@dataclass(frozen=True)
class Select(Expr):
    e: Expr
    index: Expr


@dataclass(frozen=True)
class IsInst(Expr):
    e: Expr
    class_name: str


@dataclass(frozen=True)
class Agg(Expr):
    op: str  # 'count' | 'max' | 'min' | 'sum'
    e: Expr


# ---------------------------------------------------------------- patterns


class Pattern(Node):
    pass


@dataclass(frozen=True)
class PatVar(Pattern):
    name: str


@dataclass(frozen=True)
class PatBound(Pattern):
    name: str  # =name, compares against the variable's current value


@dataclass(frozen=True)
class PatWild(Pattern):
    pass


@dataclass(frozen=True)
class PatExpr(Pattern):
    e: Expr  # non-variable expression element, compares against its value


@dataclass(frozen=True)
class PatTuple(Pattern):
    elems: tuple[Pattern, ...]


@dataclass(frozen=True)
class Iterator(Node):
    pattern: Pattern  # PatVar or PatTuple
    source: Expr


@dataclass(frozen=True)
class Quant(Expr):
    kind: str  # 'some' | 'each'; 'each' is surface only
    iters: tuple[Iterator, ...]
    cond: Expr


@dataclass(frozen=True)
class Comprehension(Expr):
    head: Expr
    iters: tuple[Iterator, ...]
    cond: Expr


@dataclass(frozen=True)
class Call(Expr):
    """Method call; target None means a bare call (resolved to self.name
    inside a class whose hierarchy defines the method)."""

    target: Optional[Expr]
    name: str
    args: tuple[Expr, ...]


@dataclass(frozen=True)
class SuperCall(Expr):
    name: str
    args: tuple[Expr, ...]
    # class whose parent the lookup starts from; filled in by resolution
    from_class: Optional[str] = field(default=None, compare=False)


@dataclass(frozen=True)
class LoadFacts(Expr):
    path: Expr


# ------------------------------------------------------- rules and queries


@dataclass(frozen=True)
class RawPred(Node):
    """A predicate as written: optional leading self, then a name chain."""

    is_self: bool
    parts: tuple[str, ...]


@dataclass(frozen=True)
class PredicateRef(Node):
    """Resolved predicate position.

    root 'local': rule-set-local variable `name` (path empty).
    root 'self':  field chain (name, *path) from the rule set's bearer.
    root 'global': field chain (name, *path) from the globals record.
    """

    root: str
    name: str
    path: tuple[str, ...] = ()

    def key(self) -> str:
        chain = ".".join((self.name,) + self.path)
        return f"self.{chain}" if self.root == "self" else chain

    def is_local(self) -> bool:
        return self.root == "local"


Pred = Union[RawPred, PredicateRef]


@dataclass(frozen=True)
class RArgVar(Node):
    name: str


@dataclass(frozen=True)
class RArgConst(Node):
    value: Any  # int | str


RuleArg = Union[RArgVar, RArgConst]


@dataclass(frozen=True)
class RuleAtom(Node):
    pred: Pred
    args: tuple[RuleArg, ...]


@dataclass(frozen=True)
class RuleHyp(Node):
    atom: RuleAtom
    positive: bool = True


@dataclass(frozen=True)
class Rule(Node):
    concl: RuleAtom
    hyps: tuple[RuleHyp, ...]


@dataclass(frozen=True)
class RuleSet(Node):
    name: str
    rules: tuple[Rule, ...]


# Query argument patterns (infer).
@dataclass(frozen=True)
class QVar(Node):
    name: str


@dataclass(frozen=True)
class QBound(Node):
    name: str


@dataclass(frozen=True)
class QWild(Node):
    pass


@dataclass(frozen=True)
class QConst(Node):
    value: Any


QArg = Union[QVar, QBound, QWild, QConst]


@dataclass(frozen=True)
class Query(Node):
    pred: Pred
    args: Optional[tuple[QArg, ...]]  # None: bare query, the whole extension
    # arity the original pattern demanded, kept when the pattern is
    # rewritten away so the runtime can still reject mismatched use
    arity: Optional[int] = field(default=None, compare=False)


@dataclass(frozen=True)
class QueryPattern(Node):
    """Engine-level query: predicate key plus argument pattern.

    args None is the bare form.  Projection keeps the distinct QVar names
    (wildcards having been freshened into variables) in first-occurrence
    order; bound names are looked up in the bindings passed alongside.
    """

    pred: str
    args: Optional[tuple[QArg, ...]]


@dataclass(frozen=True)
class KwArg(Node):
    name: str
    value: Expr


# -------------------------------------------------------------- statements


class Stmt(Node):
    pass


class Target(Node):
    pass


@dataclass(frozen=True)
class TName(Target):
    name: str


@dataclass(frozen=True)
class TField(Target):
    obj: Expr
    field: str


@dataclass(frozen=True)
class TTuple(Target):
    elems: tuple[Target, ...]


@dataclass(frozen=True)
class Skip(Stmt):
    pass


@dataclass(frozen=True)
class Assign(Stmt):
    targets: tuple[Target, ...]
    values: tuple[Expr, ...]


@dataclass(frozen=True)
class NewStmt(Stmt):
    target: Target
    class_name: str
    args: Optional[tuple[Expr, ...]]  # None: bare `new C`; else setup args


@dataclass(frozen=True)
class InferStmt(Stmt):
    targets: tuple[Target, ...]
    obj: Optional[Expr]  # None: self (in a class) or the globals record
    queries: tuple[Query, ...]
    kwargs: tuple[KwArg, ...]
    ruleset: str


@dataclass(frozen=True)
class InferExpr(Expr):
    obj: Optional[Expr]
    queries: tuple[Query, ...]
    kwargs: tuple[KwArg, ...]
    ruleset: str


@dataclass(frozen=True)
class CallStmt(Stmt):
    call: Expr  # Call or SuperCall


@dataclass(frozen=True)
class PrintStmt(Stmt):
    e: Expr


@dataclass(frozen=True)
class If(Stmt):
    cond: Expr
    then: "Block"
    els: "Block"


@dataclass(frozen=True)
class While(Stmt):
    cond: Expr
    body: "Block"


@dataclass(frozen=True)
class For(Stmt):
    iter: Iterator
    body: "Block"


@dataclass(frozen=True)
class IfSome(Stmt):
    iters: tuple[Iterator, ...]
    cond: Expr
    body: "Block"


@dataclass(frozen=True)
class WhileSome(Stmt):
    iters: tuple[Iterator, ...]
    cond: Expr
    body: "Block"


@dataclass(frozen=True)
class Return(Stmt):
    e: Optional[Expr]


@dataclass(frozen=True)
class Block(Node):
    stmts: tuple[Stmt, ...]


# ------------------------------------------------------------ declarations


@dataclass(frozen=True)
class MethodDef(Node):
    name: str
    params: tuple[str, ...]
    body: Block
    is_defun: bool = False


@dataclass(frozen=True)
class ClassDef(Node):
    name: str
    parent: Optional[str]
    rulesets: tuple[RuleSet, ...]
    methods: tuple[MethodDef, ...]


@dataclass(frozen=True)
class Program(Node):
    rulesets: tuple[RuleSet, ...]
    classes: tuple[ClassDef, ...]
    top: Block


def walk(node):
    """Yield node and every Node reachable through its fields."""
    if isinstance(node, Node):
        yield node
        for f in node.__dataclass_fields__:
            if f == "loc":
                continue
            yield from walk(getattr(node, f))
    elif isinstance(node, tuple):
        for item in node:
            yield from walk(item)
