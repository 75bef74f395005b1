"""Canonical source printer.

The output is a fixed point of parse -> print: reparsing printed text
gives a structurally equal AST.  Canonical choices: `:=` for assignment,
conclusion-first rules, two-space block indentation, minimal parentheses,
`else`/`| True` clauses omitted when trivial.

Kernel-only nodes print too (the globals record as `_gv`), for the CLI's
kernel dump; that form is for reading, not necessarily for reparsing.
"""

from __future__ import annotations

from .astnodes import (
    Agg, Assign, Block, BoolOp, Call, CallStmt, ClassDef, Comprehension,
    Expr, FieldAccess, For, GvRef, If, IfSome, InferExpr, InferStmt, InOp,
    IsInst, IsOp, IsTuple, Iterator, KwArg, LenOp, Lit, LoadFacts,
    LocalRef, MethodDef, Name, NewStmt, Not, PatBound, PatExpr, PatTuple,
    PatVar, PatWild, Pattern, Plus, PredicateRef, PrintStmt, Program,
    QBound, QConst, QVar, QWild, Quant, Query, RArgConst, RArgVar,
    RawPred, Return, Rule, RuleAtom, RuleSet, SelfExpr, SeqLit, Select,
    SetLit, Skip, Stmt, SuperCall, Target, TField, TName, TTuple,
    TupleExpr, While, WhileSome,
)
from .values import render_scalar

INDENT = "  "

_PREC_QUANT = 0
_PREC_OR = 1
_PREC_AND = 2
_PREC_NOT = 3
_PREC_CMP = 4
_PREC_PLUS = 5
_PREC_AGG = 6
_PREC_POST = 7
_PREC_ATOM = 8


def pretty_print(node) -> str:
    if isinstance(node, Program):
        return _program(node)
    if isinstance(node, (Block, Stmt)):
        return "\n".join(_stmt_lines(node, 0))
    if isinstance(node, (RuleSet, ClassDef, MethodDef)):
        return "\n".join(_decl_lines(node, 0))
    if isinstance(node, Rule):
        return _rule(node)
    if isinstance(node, Pattern):
        return _pattern(node)
    if isinstance(node, Iterator):
        return _iterator(node)
    if isinstance(node, Query):
        return _query(node)
    return _expr(node, 0)


def _program(p: Program) -> str:
    chunks: list[str] = []
    for rs in p.rulesets:
        chunks.append("\n".join(_decl_lines(rs, 0)))
    for cls in p.classes:
        chunks.append("\n".join(_decl_lines(cls, 0)))
    chunks.append("\n".join(_stmt_lines(p.top, 0)))
    return "\n\n".join(chunks) + "\n"


# ------------------------------------------------------------ declarations


def _decl_lines(node, depth: int) -> list[str]:
    pad = INDENT * depth
    if isinstance(node, RuleSet):
        lines = [f"{pad}rules {node.name}:"]
        for r in node.rules:
            lines.append(f"{pad}{INDENT}{_rule(r)}")
        return lines
    if isinstance(node, ClassDef):
        head = f"{pad}class {node.name}"
        if node.parent:
            head += f" extends {node.parent}"
        lines = [head + ":"]
        if not node.rulesets and not node.methods:
            lines.append(f"{pad}{INDENT}skip")
        for rs in node.rulesets:
            lines.extend(_decl_lines(rs, depth + 1))
        for m in node.methods:
            lines.extend(_decl_lines(m, depth + 1))
        return lines
    if isinstance(node, MethodDef):
        kw = "defun" if node.is_defun else "def"
        lines = [f"{pad}{kw} {node.name}({', '.join(node.params)}):"]
        lines.extend(_stmt_lines(node.body, depth + 1))
        return lines
    raise TypeError(f"not a declaration: {node!r}")


def _rule(r: Rule) -> str:
    concl = _atom(r.concl)
    if not r.hyps:
        return concl
    hyps = ", ".join(("" if h.positive else "not ") + _atom(h.atom) for h in r.hyps)
    return f"{concl} if {hyps}"


def _atom(a: RuleAtom) -> str:
    args = ", ".join(
        arg.name if isinstance(arg, RArgVar) else render_scalar(arg.value)
        for arg in a.args
    )
    return f"{_pred(a.pred)}({args})"


def _pred(p) -> str:
    if isinstance(p, RawPred):
        chain = ".".join(p.parts)
        return f"self.{chain}" if p.is_self else chain
    if isinstance(p, PredicateRef):
        return p.key()
    raise TypeError(f"not a predicate: {p!r}")


# -------------------------------------------------------------- statements


def _stmt_lines(node, depth: int) -> list[str]:
    pad = INDENT * depth
    if isinstance(node, Block):
        out: list[str] = []
        for s in node.stmts:
            out.extend(_stmt_lines(s, depth))
        return out
    if isinstance(node, Skip):
        return [pad + "skip"]
    if isinstance(node, Return):
        return [pad + ("return" if node.e is None else f"return {_expr(node.e, 0)}")]
    if isinstance(node, PrintStmt):
        return [f"{pad}print({_expr(node.e, 0)})"]
    if isinstance(node, Assign):
        lhs = ", ".join(_target(t) for t in node.targets)
        rhs = ", ".join(_expr(v, _PREC_OR) if len(node.values) > 1 else _expr(v, 0)
                        for v in node.values)
        return [f"{pad}{lhs} := {rhs}"]
    if isinstance(node, NewStmt):
        if node.args is None:
            return [f"{pad}{_target(node.target)} := new {node.class_name}"]
        args = ", ".join(_expr(a, _PREC_OR) for a in node.args)
        return [f"{pad}{_target(node.target)} := new({node.class_name}, [{args}])"]
    if isinstance(node, InferStmt):
        call = _infer_call(node.obj, node.queries, node.kwargs, node.ruleset)
        if not node.targets:
            return [pad + call]
        lhs = ", ".join(_target(t) for t in node.targets)
        return [f"{pad}{lhs} := {call}"]
    if isinstance(node, CallStmt):
        return [pad + _expr(node.call, 0)]
    if isinstance(node, If):
        lines = [f"{pad}if {_expr(node.cond, 0)}:"]
        lines.extend(_stmt_lines(node.then, depth + 1))
        if node.els.stmts != (Skip(),):
            lines.append(f"{pad}else:")
            lines.extend(_stmt_lines(node.els, depth + 1))
        return lines
    if isinstance(node, While):
        lines = [f"{pad}while {_expr(node.cond, 0)}:"]
        lines.extend(_stmt_lines(node.body, depth + 1))
        return lines
    if isinstance(node, For):
        lines = [f"{pad}for {_iterator(node.iter)}:"]
        lines.extend(_stmt_lines(node.body, depth + 1))
        return lines
    if isinstance(node, (IfSome, WhileSome)):
        kw = "ifSome" if isinstance(node, IfSome) else "whileSome"
        head = f"{pad}{kw} " + ", ".join(_iterator(it) for it in node.iters)
        if not _is_true_lit(node.cond):
            head += f" | {_expr(node.cond, 0)}"
        lines = [head + ":"]
        lines.extend(_stmt_lines(node.body, depth + 1))
        return lines
    raise TypeError(f"not a statement: {node!r}")


def _target(t: Target) -> str:
    if isinstance(t, TName):
        return t.name
    if isinstance(t, TField):
        return f"{_expr(t.obj, _PREC_POST)}.{t.field}"
    if isinstance(t, TTuple):
        inner = ", ".join(_target(x) for x in t.elems)
        if len(t.elems) == 1:
            inner += ","
        return f"({inner})"
    raise TypeError(f"not a target: {t!r}")


def _iterator(it: Iterator) -> str:
    return f"{_pattern(it.pattern)} in {_expr(it.source, _PREC_OR)}"


def _pattern(p: Pattern) -> str:
    if isinstance(p, PatVar):
        return p.name
    if isinstance(p, PatBound):
        return f"={p.name}"
    if isinstance(p, PatWild):
        return "_"
    if isinstance(p, PatExpr):
        return _expr(p.e, _PREC_OR)
    if isinstance(p, PatTuple):
        inner = ", ".join(_pattern(x) for x in p.elems)
        if len(p.elems) == 1:
            inner += ","
        return f"({inner})"
    raise TypeError(f"not a pattern: {p!r}")


# ------------------------------------------------------------- expressions


def _paren(text: str, prec: int, min_prec: int) -> str:
    return f"({text})" if prec < min_prec else text


def _is_true_lit(e) -> bool:
    return isinstance(e, Lit) and e.value is True


def _expr(e, min_prec: int) -> str:
    if isinstance(e, Lit):
        return render_scalar(e.value)
    if isinstance(e, Name):
        return e.id
    if isinstance(e, LocalRef):
        return e.id
    if isinstance(e, SelfExpr):
        return "self"
    if isinstance(e, GvRef):
        return "_gv"
    if isinstance(e, FieldAccess):
        return f"{_expr(e.obj, _PREC_POST)}.{e.field}"
    if isinstance(e, TupleExpr):
        if not e.items:
            return "()"
        inner = ", ".join(_expr(x, _PREC_OR) for x in e.items)
        if len(e.items) == 1:
            inner += ","
        return f"({inner})"
    if isinstance(e, SetLit):
        return "{" + ", ".join(_expr(x, _PREC_OR) for x in e.items) + "}"
    if isinstance(e, SeqLit):
        return "[" + ", ".join(_expr(x, _PREC_OR) for x in e.items) + "]"
    if isinstance(e, Comprehension):
        head = _expr(e.head, _PREC_OR)
        iters = ", ".join(_iterator(it) for it in e.iters)
        if _is_true_lit(e.cond):
            return "{" + f"{head}: {iters}" + "}"
        return "{" + f"{head}: {iters} | {_expr(e.cond, 0)}" + "}"
    if isinstance(e, Quant):
        iters = ", ".join(_iterator(it) for it in e.iters)
        text = f"{e.kind} {iters} | {_expr(e.cond, 0)}"
        return _paren(text, _PREC_QUANT, min_prec)
    if isinstance(e, BoolOp):
        prec = _PREC_OR if e.op == "or" else _PREC_AND
        text = f"{_expr(e.left, prec)} {e.op} {_expr(e.right, prec + 1)}"
        return _paren(text, prec, min_prec)
    if isinstance(e, Not):
        text = f"not {_expr(e.e, _PREC_NOT)}"
        return _paren(text, _PREC_NOT, min_prec)
    if isinstance(e, IsOp):
        text = f"{_expr(e.left, _PREC_PLUS)} is {_expr(e.right, _PREC_PLUS)}"
        return _paren(text, _PREC_CMP, min_prec)
    if isinstance(e, InOp):
        op = "not in" if e.negated else "in"
        text = f"{_expr(e.item, _PREC_PLUS)} {op} {_expr(e.coll, _PREC_PLUS)}"
        return _paren(text, _PREC_CMP, min_prec)
    if isinstance(e, Plus):
        text = f"{_expr(e.left, _PREC_PLUS)} + {_expr(e.right, _PREC_PLUS + 1)}"
        return _paren(text, _PREC_PLUS, min_prec)
    if isinstance(e, Agg):
        text = f"{e.op} {_expr(e.e, _PREC_POST)}"
        return _paren(text, _PREC_AGG, min_prec)
    if isinstance(e, IsTuple):
        return f"isTuple({_expr(e.e, 0)})"
    if isinstance(e, LenOp):
        return f"len({_expr(e.e, 0)})"
    if isinstance(e, Select):
        return f"select({_expr(e.e, _PREC_OR)}, {_expr(e.index, _PREC_OR)})"
    if isinstance(e, IsInst):
        return f"isinstance({_expr(e.e, _PREC_OR)}, {e.class_name})"
    if isinstance(e, LoadFacts):
        return f"load_facts({_expr(e.path, 0)})"
    if isinstance(e, Call):
        args = ", ".join(_expr(a, _PREC_OR) for a in e.args)
        if e.target is None:
            return f"{e.name}({args})"
        return f"{_expr(e.target, _PREC_POST)}.{e.name}({args})"
    if isinstance(e, SuperCall):
        args = ", ".join(_expr(a, _PREC_OR) for a in e.args)
        return f"super().{e.name}({args})"
    if isinstance(e, InferExpr):
        return _infer_call(e.obj, e.queries, e.kwargs, e.ruleset)
    raise TypeError(f"not an expression: {e!r}")


def _infer_call(obj, queries, kwargs, ruleset: str) -> str:
    parts = [_query(q) for q in queries]
    parts.extend(f"{kw.name}={_expr(kw.value, _PREC_OR)}" for kw in kwargs)
    parts.append(f"rules={ruleset}")
    call = f"infer({', '.join(parts)})"
    if obj is None:
        return call
    return f"{_expr(obj, _PREC_POST)}.{call}"


def _query(q: Query) -> str:
    name = _pred(q.pred)
    if q.args is None:
        return name
    args = []
    for a in q.args:
        if isinstance(a, QVar):
            args.append(a.name)
        elif isinstance(a, QBound):
            args.append(f"={a.name}")
        elif isinstance(a, QWild):
            args.append("_")
        elif isinstance(a, QConst):
            args.append(render_scalar(a.value))
        else:
            raise TypeError(f"not a query argument: {a!r}")
    return f"{name}({', '.join(args)})"
