"""Lexer and parser for `.alda` source.

Layout is indentation based, Python style: a `:` opens a suite, which is
either a single simple statement on the same line or an indented block.
Tabs are rejected.  Newlines inside brackets are ignored.

parse_program also enforces the well-formedness rules that need no name
resolution: rule safety, per-rule-set arity consistency, uniqueness of
class, method, and rule-set names, and the ban on `self` in global rule
sets.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from .astnodes import (
    Agg, Assign, Block, BoolOp, Call, CallStmt, ClassDef, Comprehension,
    Expr, FieldAccess, For, GvRef, If, IfSome, InferExpr, InferStmt, InOp,
    IsInst, IsOp, IsTuple, Iterator, KwArg, LenOp, Lit, LoadFacts, Loc,
    LocalRef, MethodDef, Name, NewStmt, Node, Not, PatBound, PatExpr,
    PatTuple, PatVar, PatWild, Pattern, Plus, PredicateRef, PrintStmt,
    Program, QBound, QConst, QVar, QWild, Query, RArgConst, RArgVar,
    RawPred, Return, Rule, RuleAtom, RuleHyp, RuleSet, SelfExpr, SeqLit,
    Select, SetLit, Skip, Stmt, SuperCall, Target, TField, TName, TTuple,
    TupleExpr, Quant, While, WhileSome,
)
from .errors import ParseError, RuleError
from .values import INT_MAX, INT_MIN

KEYWORDS = {
    "rules", "if", "else", "for", "while", "some", "each", "ifSome",
    "whileSome", "infer", "new", "extends", "class", "def", "defun",
    "return", "skip", "in", "not", "and", "or", "count", "max", "min",
    "sum", "self", "True", "False", "None", "is",
}

AGG_OPS = ("count", "max", "min", "sum")

_PUNCT = (":=", "(", ")", "[", "]", "{", "}", ",", ".", ":", "|", "+", "=")


@dataclass
class Token:
    kind: str  # 'name', 'int', 'string', 'nl', 'indent', 'dedent', 'eof', or the punct/keyword itself
    value: object
    line: int
    col: int


_NAME_RE = re.compile(r"[A-Za-z_][A-Za-z_0-9]*")
_INT_RE = re.compile(r"-?[0-9]+")


def tokenize(text: str) -> list[Token]:
    toks: list[Token] = []
    indents = [0]
    depth = 0
    lines = text.split("\n")
    for lineno, raw in enumerate(lines, start=1):
        i, n = 0, len(raw)
        # Leading indentation (only meaningful outside brackets).
        while i < n and raw[i] == " ":
            i += 1
        if i < n and raw[i] == "\t":
            raise ParseError("tab character in indentation", lineno, i + 1)
        if i >= n or raw[i] == "#":
            continue  # blank or comment-only line
        if depth == 0:
            col = i
            if col > indents[-1]:
                indents.append(col)
                toks.append(Token("indent", None, lineno, 1))
            else:
                while col < indents[-1]:
                    indents.pop()
                    toks.append(Token("dedent", None, lineno, 1))
                if col != indents[-1]:
                    raise ParseError("unindent does not match any outer level", lineno, col + 1)
        while i < n:
            ch = raw[i]
            if ch == " ":
                i += 1
                continue
            if ch == "\t":
                raise ParseError("tab character", lineno, i + 1)
            if ch == "#":
                i = n
                break
            col = i + 1
            if ch in "'\"":
                quote = ch
                j = i + 1
                buf = []
                while j < n:
                    c = raw[j]
                    if c == "\\":
                        if j + 1 >= n:
                            raise ParseError("bad escape", lineno, j + 1)
                        esc = raw[j + 1]
                        if esc == "n":
                            buf.append("\n")
                        elif esc in ("\\", "'", '"'):
                            buf.append(esc)
                        else:
                            raise ParseError(f"bad escape \\{esc}", lineno, j + 1)
                        j += 2
                    elif c == quote:
                        break
                    else:
                        buf.append(c)
                        j += 1
                if j >= n:
                    raise ParseError("unterminated string", lineno, col)
                toks.append(Token("string", "".join(buf), lineno, col))
                i = j + 1
                continue
            m = _NAME_RE.match(raw, i)
            if m:
                word = m.group(0)
                kind = word if word in KEYWORDS else "name"
                toks.append(Token(kind, word, lineno, col))
                i = m.end()
                continue
            m = _INT_RE.match(raw, i)
            if m and (ch != "-" or (i + 1 < n and raw[i + 1].isdigit())):
                val = int(m.group(0))
                if not (INT_MIN <= val <= INT_MAX):
                    raise ParseError("integer literal out of 64-bit range", lineno, col)
                toks.append(Token("int", val, lineno, col))
                i = m.end()
                continue
            for p in _PUNCT:
                if raw.startswith(p, i):
                    if p in "([{":
                        depth += 1
                    elif p in ")]}":
                        depth = max(0, depth - 1)
                    toks.append(Token(p, p, lineno, col))
                    i += len(p)
                    break
            else:
                raise ParseError(f"unexpected character {ch!r}", lineno, col)
        if depth == 0:
            toks.append(Token("nl", None, lineno, n + 1))
    last_line = len(lines) + 1
    while len(indents) > 1:
        indents.pop()
        toks.append(Token("dedent", None, last_line, 1))
    toks.append(Token("eof", None, last_line, 1))
    return toks


class Parser:
    def __init__(self, toks: list[Token]):
        self.toks = toks
        self.pos = 0

    # ---------------------------------------------------------- plumbing

    def peek(self, ahead: int = 0) -> Token:
        return self.toks[min(self.pos + ahead, len(self.toks) - 1)]

    def at(self, *kinds: str) -> bool:
        return self.peek().kind in kinds

    def next(self) -> Token:
        t = self.toks[self.pos]
        if t.kind != "eof":
            self.pos += 1
        return t

    def expect(self, kind: str, what: str | None = None) -> Token:
        t = self.peek()
        if t.kind != kind:
            want = what or repr(kind)
            raise ParseError(f"expected {want}, got {self._describe(t)}", t.line, t.col)
        return self.next()

    def accept(self, kind: str) -> Token | None:
        if self.at(kind):
            return self.next()
        return None

    @staticmethod
    def _describe(t: Token) -> str:
        if t.kind in ("name", "int", "string"):
            return f"{t.kind} {t.value!r}"
        if t.kind in ("nl", "indent", "dedent", "eof"):
            return {"nl": "end of line", "indent": "indent", "dedent": "dedent", "eof": "end of file"}[t.kind]
        return repr(t.kind)

    def loc(self) -> Loc:
        t = self.peek()
        return Loc(t.line, t.col)

    def err(self, msg: str) -> ParseError:
        t = self.peek()
        return ParseError(msg, t.line, t.col)

    # ----------------------------------------------------------- program

    def parse_program(self) -> Program:
        rulesets: list[RuleSet] = []
        classes: list[ClassDef] = []
        stmts: list[Stmt] = []
        while not self.at("eof"):
            if self.at("nl"):
                self.next()
                continue
            if self.at("rules"):
                if stmts:
                    raise self.err("rule set after top-level statements")
                rulesets.append(self.parse_ruleset(in_class=False))
            elif self.at("class"):
                if stmts:
                    raise self.err("class after top-level statements")
                classes.append(self.parse_class())
            else:
                stmts.append(self.parse_stmt())
        if not stmts:
            stmts = [Skip(loc=Loc(1, 1))]
        return Program(tuple(rulesets), tuple(classes), Block(tuple(stmts)))

    def parse_ruleset(self, in_class: bool) -> RuleSet:
        loc = self.loc()
        self.expect("rules")
        name = self.expect("name", "rule set name").value
        if self.accept("("):
            # Declarations are accepted and discarded.
            depth = 1
            while depth:
                t = self.next()
                if t.kind == "eof":
                    raise ParseError("unterminated declarations", t.line, t.col)
                if t.kind in ("(", "[", "{"):
                    depth += 1
                elif t.kind in (")", "]", "}"):
                    depth -= 1
        self.expect(":")
        self.expect("nl")
        self.expect("indent")
        rules = []
        while not self.at("dedent"):
            if self.accept("nl"):
                continue
            rules.append(self.parse_rule(in_class))
        self.expect("dedent")
        if not rules:
            raise ParseError(f"rule set {name} has no rules", loc.line, loc.col)
        return RuleSet(name, tuple(rules), loc=loc)

    def parse_rule(self, in_class: bool) -> Rule:
        loc = self.loc()
        if self.at("if"):
            self.next()
            hyps = self.parse_hyps(in_class)
            self.expect(":")
            concl = self.parse_atom(in_class)
        else:
            concl = self.parse_atom(in_class)
            hyps = ()
            if self.accept("if"):
                hyps = self.parse_hyps(in_class)
        self.expect("nl")
        return Rule(concl, tuple(hyps), loc=loc)

    def parse_hyps(self, in_class: bool):
        hyps = [self.parse_hyp(in_class)]
        while self.accept(","):
            hyps.append(self.parse_hyp(in_class))
        return hyps

    def parse_hyp(self, in_class: bool) -> RuleHyp:
        loc = self.loc()
        positive = not self.accept("not")
        return RuleHyp(self.parse_atom(in_class), positive, loc=loc)

    def parse_atom(self, in_class: bool) -> RuleAtom:
        loc = self.loc()
        if self.at("self"):
            if not in_class:
                raise self.err("self in a global rule set")
            self.next()
            parts = []
            while self.accept("."):
                parts.append(self.expect("name", "field name").value)
            if not parts:
                raise self.err("expected '.' after self")
            pred = RawPred(True, tuple(parts), loc=loc)
        else:
            parts = [self.expect("name", "predicate name").value]
            while self.accept("."):
                parts.append(self.expect("name", "field name").value)
            pred = RawPred(False, tuple(parts), loc=loc)
        self.expect("(")
        args = []
        if not self.at(")"):
            while True:
                t = self.peek()
                if t.kind == "name":
                    self.next()
                    args.append(RArgVar(t.value, loc=Loc(t.line, t.col)))
                elif t.kind == "int":
                    self.next()
                    args.append(RArgConst(t.value, loc=Loc(t.line, t.col)))
                elif t.kind == "string":
                    self.next()
                    args.append(RArgConst(t.value, loc=Loc(t.line, t.col)))
                else:
                    raise self.err("expected a variable or constant")
                if not self.accept(","):
                    break
        self.expect(")")
        return RuleAtom(pred, tuple(args), loc=loc)

    def parse_class(self) -> ClassDef:
        loc = self.loc()
        self.expect("class")
        name = self.expect("name", "class name").value
        parent = None
        if self.accept("extends"):
            parent = self.expect("name", "class name").value
        self.expect(":")
        self.expect("nl")
        self.expect("indent")
        rulesets: list[RuleSet] = []
        methods: list[MethodDef] = []
        while not self.at("dedent"):
            if self.accept("nl"):
                continue
            if self.at("rules"):
                rulesets.append(self.parse_ruleset(in_class=True))
            elif self.at("def", "defun"):
                methods.append(self.parse_method())
            elif self.at("skip"):
                self.next()
                self.expect("nl")
            else:
                raise self.err("expected a method or rule set")
        self.expect("dedent")
        return ClassDef(name, parent, tuple(rulesets), tuple(methods), loc=loc)

    def parse_method(self) -> MethodDef:
        loc = self.loc()
        is_defun = self.next().kind == "defun"
        name = self.expect("name", "method name").value
        self.expect("(")
        params = []
        if not self.at(")"):
            while True:
                t = self.expect("name", "parameter name")
                params.append(t.value)
                if not self.accept(","):
                    break
        self.expect(")")
        body = self.parse_suite()
        if is_defun:
            # defun m(p): e is shorthand for a single-return def.
            stmts = body.stmts
            if not (len(stmts) == 1 and isinstance(stmts[0], Return) and stmts[0].e is not None):
                raise ParseError(f"defun {name} must be a single return", loc.line, loc.col)
        return MethodDef(name, tuple(params), body, is_defun, loc=loc)

    # -------------------------------------------------------- statements

    def parse_suite(self) -> Block:
        self.expect(":")
        if self.at("nl"):
            self.next()
            self.expect("indent")
            stmts = []
            while not self.at("dedent"):
                if self.accept("nl"):
                    continue
                stmts.append(self.parse_stmt())
            self.expect("dedent")
            if not stmts:
                raise self.err("empty block")
            return Block(tuple(stmts))
        # Inline suite: one simple statement.
        stmt = self.parse_simple_stmt()
        return Block((stmt,))

    def parse_stmt(self) -> Stmt:
        t = self.peek()
        if t.kind == "if":
            return self.parse_if()
        if t.kind == "while":
            loc = self.loc()
            self.next()
            cond = self.parse_expr()
            body = self.parse_suite()
            self._end_of_stmt()
            return While(cond, body, loc=loc)
        if t.kind == "for":
            loc = self.loc()
            self.next()
            it = self.parse_iterator()
            body = self.parse_suite()
            self._end_of_stmt()
            return For(it, body, loc=loc)
        if t.kind in ("ifSome", "whileSome"):
            loc = self.loc()
            kind = self.next().kind
            iters = self.parse_iterators()
            cond = Lit(True, loc=loc)
            if self.accept("|"):
                cond = self.parse_expr()
            body = self.parse_suite()
            self._end_of_stmt()
            cls = IfSome if kind == "ifSome" else WhileSome
            return cls(tuple(iters), cond, body, loc=loc)
        stmt = self.parse_simple_stmt()
        self.expect("nl")
        return stmt

    def _end_of_stmt(self):
        # Suites consume their own layout; nothing to do.
        pass

    def parse_if(self) -> If:
        loc = self.loc()
        self.expect("if")
        cond = self.parse_expr()
        then = self.parse_suite()
        els = Block((Skip(loc=loc),))
        if self.at("else"):
            self.next()
            els = self.parse_suite()
        return If(cond, then, els, loc=loc)

    def parse_simple_stmt(self) -> Stmt:
        t = self.peek()
        loc = self.loc()
        if t.kind == "skip":
            self.next()
            return Skip(loc=loc)
        if t.kind == "return":
            self.next()
            if self.at("nl"):
                return Return(None, loc=loc)
            return Return(self.parse_expr(), loc=loc)
        # Assignment, infer, new, or a call.
        first = self.parse_expr()
        if self.at(":=", "=", ","):
            exprs = [first]
            while self.accept(","):
                exprs.append(self.parse_expr())
            if not self.at(":=", "="):
                raise self.err("expected ':='")
            self.next()
            targets = tuple(self._to_target(e) for e in exprs)
            return self._parse_assign_rhs(targets, loc)
        if isinstance(first, Call) and first.target is None and first.name == "print":
            if len(first.args) != 1:
                raise ParseError("print takes one argument", loc.line, loc.col)
            return PrintStmt(first.args[0], loc=loc)
        if isinstance(first, InferExpr):
            return InferStmt((), first.obj, first.queries, first.kwargs, first.ruleset, loc=loc)
        if isinstance(first, (Call, SuperCall)):
            return CallStmt(first, loc=loc)
        raise ParseError("expected a statement", loc.line, loc.col)

    def _parse_assign_rhs(self, targets: tuple[Target, ...], loc: Loc) -> Stmt:
        if self.at("new"):
            self.next()
            if len(targets) != 1:
                raise ParseError("new assigns exactly one target", loc.line, loc.col)
            if self.accept("("):
                cname = self.expect("name", "class name").value
                args = None
                if self.accept(","):
                    self.expect("[")
                    lst = []
                    if not self.at("]"):
                        while True:
                            lst.append(self.parse_expr())
                            if not self.accept(","):
                                break
                    self.expect("]")
                    args = tuple(lst)
                else:
                    args = None
                self.expect(")")
                return NewStmt(targets[0], cname, args, loc=loc)
            cname = self.expect("name", "class name").value
            return NewStmt(targets[0], cname, None, loc=loc)
        values = [self.parse_expr()]
        while self.accept(","):
            values.append(self.parse_expr())
        if len(values) == 1 and isinstance(values[0], InferExpr):
            inf = values[0]
            return InferStmt(targets, inf.obj, inf.queries, inf.kwargs, inf.ruleset, loc=loc)
        if len(targets) != len(values):
            raise ParseError(
                f"{len(targets)} targets but {len(values)} values", loc.line, loc.col
            )
        return Assign(targets, tuple(values), loc=loc)

    def _to_target(self, e: Expr) -> Target:
        if isinstance(e, Name):
            if e.id == "_":
                raise ParseError("wildcard is not assignable", e.loc.line, e.loc.col)
            return TName(e.id, loc=e.loc)
        if isinstance(e, FieldAccess):
            return TField(e.obj, e.field, loc=e.loc)
        if isinstance(e, TupleExpr):
            return TTuple(tuple(self._to_target(x) for x in e.items), loc=e.loc)
        loc = e.loc or Loc(0, 0)
        raise ParseError("not an assignable target", loc.line, loc.col)

    # --------------------------------------------------------- iterators

    def parse_iterators(self) -> list[Iterator]:
        iters = [self.parse_iterator()]
        while self.at(",") and self._comma_starts_iterator():
            self.next()
            iters.append(self.parse_iterator())
        return iters

    def _comma_starts_iterator(self) -> bool:
        # Lookahead: after the comma, a pattern followed by 'in'.
        save = self.pos
        try:
            self.next()
            self.parse_pattern()
            ok = self.at("in")
        except ParseError:
            ok = False
        self.pos = save
        return ok

    def parse_iterator(self) -> Iterator:
        loc = self.loc()
        pat = self.parse_pattern()
        self.expect("in")
        src = self.parse_expr()
        return Iterator(pat, src, loc=loc)

    def parse_pattern(self) -> Pattern:
        t = self.peek()
        if t.kind == "name" and t.value != "_" and self.peek(1).kind == "in":
            self.next()
            return PatVar(t.value, loc=Loc(t.line, t.col))
        if t.kind == "(":
            return self._parse_pattern_tuple()
        raise self.err("expected a pattern")

    def _parse_pattern_tuple(self) -> Pattern:
        loc = self.loc()
        self.expect("(")
        if self.accept(")"):
            return PatTuple((), loc=loc)
        elems = []
        saw_comma = False
        while True:
            elems.append(self.parse_pattern_elem())
            if self.accept(","):
                saw_comma = True
                if self.at(")"):
                    break
            else:
                break
        self.expect(")")
        if len(elems) == 1 and not saw_comma:
            return elems[0]
        return PatTuple(tuple(elems), loc=loc)

    def parse_pattern_elem(self) -> Pattern:
        t = self.peek()
        loc = Loc(t.line, t.col)
        if t.kind == "=":
            self.next()
            name = self.expect("name", "variable").value
            if name == "_":
                raise ParseError("cannot bind to wildcard", loc.line, loc.col)
            return PatBound(name, loc=loc)
        if t.kind == "name" and t.value == "_":
            self.next()
            return PatWild(loc=loc)
        if t.kind == "(":
            return self._parse_pattern_tuple()
        e = self.parse_expr()
        if isinstance(e, Name):
            return PatVar(e.id, loc=loc)
        return PatExpr(e, loc=loc)

    # ------------------------------------------------------- expressions

    def parse_expr(self) -> Expr:
        if self.at("some", "each"):
            loc = self.loc()
            kind = self.next().kind
            iters = self.parse_iterators()
            self.expect("|")
            cond = self.parse_expr()
            return Quant(kind, tuple(iters), cond, loc=loc)
        return self.parse_or()

    def parse_or(self) -> Expr:
        left = self.parse_and()
        while self.at("or"):
            loc = self.loc()
            self.next()
            right = self.parse_expr() if self.at("some", "each") else self.parse_and()
            left = BoolOp("or", left, right, loc=loc)
        return left

    def parse_and(self) -> Expr:
        left = self.parse_not()
        while self.at("and"):
            loc = self.loc()
            self.next()
            right = self.parse_expr() if self.at("some", "each") else self.parse_not()
            left = BoolOp("and", left, right, loc=loc)
        return left

    def parse_not(self) -> Expr:
        if self.at("not"):
            loc = self.loc()
            self.next()
            if self.at("some", "each"):
                return Not(self.parse_expr(), loc=loc)
            return Not(self.parse_not(), loc=loc)
        return self.parse_cmp()

    def parse_cmp(self) -> Expr:
        left = self.parse_sum()
        t = self.peek()
        if t.kind == "is":
            self.next()
            return IsOp(left, self.parse_sum(), loc=Loc(t.line, t.col))
        if t.kind == "in":
            self.next()
            return InOp(left, self.parse_sum(), False, loc=Loc(t.line, t.col))
        if t.kind == "not" and self.peek(1).kind == "in":
            self.next()
            self.next()
            return InOp(left, self.parse_sum(), True, loc=Loc(t.line, t.col))
        return left

    def parse_sum(self) -> Expr:
        left = self.parse_post()
        while self.at("+"):
            loc = self.loc()
            self.next()
            left = Plus(left, self.parse_post(), loc=loc)
        return left

    def parse_post(self) -> Expr:
        e = self.parse_primary()
        while True:
            if self.at("."):
                loc = self.loc()
                self.next()
                if self.at("infer"):
                    self.next()
                    e = self.parse_infer(obj=e, loc=loc)
                    continue
                fname = self.expect("name", "field name").value
                if self.at("("):
                    args = self.parse_call_args()
                    e = Call(e, fname, args, loc=loc)
                else:
                    e = FieldAccess(e, fname, loc=loc)
            else:
                break
        return e

    def parse_call_args(self) -> tuple[Expr, ...]:
        self.expect("(")
        args = []
        if not self.at(")"):
            while True:
                args.append(self.parse_expr())
                if not self.accept(","):
                    break
        self.expect(")")
        return tuple(args)

    def parse_primary(self) -> Expr:
        t = self.peek()
        loc = Loc(t.line, t.col)
        if t.kind == "int":
            self.next()
            return Lit(t.value, loc=loc)
        if t.kind == "string":
            self.next()
            return Lit(t.value, loc=loc)
        if t.kind in ("True", "False"):
            self.next()
            return Lit(t.kind == "True", loc=loc)
        if t.kind == "None":
            self.next()
            return Lit(None, loc=loc)
        if t.kind == "self":
            self.next()
            return SelfExpr(loc=loc)
        if t.kind == "infer":
            self.next()
            return self.parse_infer(obj=None, loc=loc)
        if t.kind in AGG_OPS:
            self.next()
            return Agg(t.kind, self.parse_post(), loc=loc)
        if t.kind == "name":
            self.next()
            name = t.value
            if name == "super" and self.at("("):
                self.expect("(")
                self.expect(")")
                self.expect(".")
                mname = self.expect("name", "method name").value
                args = self.parse_call_args()
                return SuperCall(mname, args, loc=loc)
            if self.at("("):
                return self._parse_bare_call(name, loc)
            return Name(name, loc=loc)
        if t.kind == "(":
            self.next()
            if self.accept(")"):
                return TupleExpr((), loc=loc)
            items = [self.parse_expr()]
            saw_comma = False
            while self.accept(","):
                saw_comma = True
                if self.at(")"):
                    break
                items.append(self.parse_expr())
            self.expect(")")
            if not saw_comma:
                return items[0]
            return TupleExpr(tuple(items), loc=loc)
        if t.kind == "{":
            return self.parse_set_display(loc)
        if t.kind == "[":
            self.next()
            items = []
            if not self.at("]"):
                while True:
                    items.append(self.parse_expr())
                    if not self.accept(","):
                        break
            self.expect("]")
            return SeqLit(tuple(items), loc=loc)
        raise self.err("expected an expression")

    def parse_set_display(self, loc: Loc) -> Expr:
        self.expect("{")
        if self.accept("}"):
            return SetLit((), loc=loc)
        head = self.parse_expr()
        if self.accept(":"):
            iters = self.parse_iterators()
            cond = Lit(True, loc=loc)
            if self.accept("|"):
                cond = self.parse_expr()
            self.expect("}")
            return Comprehension(head, tuple(iters), cond, loc=loc)
        items = [head]
        while self.accept(","):
            if self.at("}"):
                break
            items.append(self.parse_expr())
        self.expect("}")
        return SetLit(tuple(items), loc=loc)

    def _parse_bare_call(self, name: str, loc: Loc) -> Expr:
        args = self.parse_call_args()
        if name == "isTuple":
            self._need_args(name, args, 1, loc)
            return IsTuple(args[0], loc=loc)
        if name == "len":
            self._need_args(name, args, 1, loc)
            return LenOp(args[0], loc=loc)
        if name == "select":
            self._need_args(name, args, 2, loc)
            return Select(args[0], args[1], loc=loc)
        if name == "isinstance":
            self._need_args(name, args, 2, loc)
            cls = args[1]
            if not isinstance(cls, Name):
                raise ParseError("isinstance needs a class name", loc.line, loc.col)
            return IsInst(args[0], cls.id, loc=loc)
        if name == "load_facts":
            self._need_args(name, args, 1, loc)
            return LoadFacts(args[0], loc=loc)
        return Call(None, name, args, loc=loc)

    @staticmethod
    def _need_args(name: str, args, n: int, loc: Loc):
        if len(args) != n:
            raise ParseError(f"{name} takes {n} argument(s)", loc.line, loc.col)

    # ------------------------------------------------------------- infer

    def parse_infer(self, obj: Expr | None, loc: Loc) -> InferExpr:
        self.expect("(")
        queries: list[Query] = []
        kwargs: list[KwArg] = []
        ruleset: str | None = None
        if not self.at(")"):
            while True:
                item_loc = self.loc()
                if self._at_kwarg():
                    kname = self.next().value
                    self.expect("=")
                    if kname == "rules":
                        if ruleset is not None:
                            raise ParseError("duplicate rules=", item_loc.line, item_loc.col)
                        ruleset = self.expect("name", "rule set name").value
                    else:
                        kwargs.append(KwArg(kname, self.parse_expr(), loc=item_loc))
                else:
                    if kwargs or ruleset is not None:
                        raise ParseError("queries must precede keyword arguments",
                                         item_loc.line, item_loc.col)
                    queries.append(self.parse_query())
                if not self.accept(","):
                    break
        self.expect(")")
        if ruleset is None:
            raise ParseError("infer needs rules=<name>", loc.line, loc.col)
        return InferExpr(obj, tuple(queries), tuple(kwargs), ruleset, loc=loc)

    def _at_kwarg(self) -> bool:
        return self.peek().kind in ("name", "rules") and self.peek(1).kind == "="

    def parse_query(self) -> Query:
        t = self.peek()
        loc = Loc(t.line, t.col)
        if t.kind == "self":
            self.next()
            parts = []
            while self.accept("."):
                parts.append(self.expect("name", "field name").value)
            if not parts:
                raise self.err("expected '.' after self")
            pred = RawPred(True, tuple(parts), loc=loc)
        else:
            parts = [self.expect("name", "predicate name").value]
            while self.accept("."):
                parts.append(self.expect("name", "field name").value)
            pred = RawPred(False, tuple(parts), loc=loc)
        args = None
        if self.at("("):
            self.next()
            args = []
            if not self.at(")"):
                while True:
                    args.append(self.parse_qarg())
                    if not self.accept(","):
                        break
            self.expect(")")
            args = tuple(args)
        return Query(pred, args, loc=loc)

    def parse_qarg(self):
        t = self.peek()
        loc = Loc(t.line, t.col)
        if t.kind == "=":
            self.next()
            name = self.expect("name", "variable").value
            return QBound(name, loc=loc)
        if t.kind == "name":
            self.next()
            if t.value == "_":
                return QWild(loc=loc)
            return QVar(t.value, loc=loc)
        if t.kind == "int":
            self.next()
            return QConst(t.value, loc=loc)
        if t.kind == "string":
            self.next()
            return QConst(t.value, loc=loc)
        raise self.err("expected a query argument")


# ----------------------------------------------------- well-formedness


def _rule_wf(rs: RuleSet):
    arities: dict[tuple, int] = {}
    for rule in rs.rules:
        atoms = [(rule.concl, True)] + [(h.atom, h.positive) for h in rule.hyps]
        for atom, _pos in atoms:
            key = (atom.pred.is_self, atom.pred.parts)
            n = len(atom.args)
            if key in arities and arities[key] != n:
                raise RuleError(
                    f"predicate {_pred_str(atom.pred)} used with arities "
                    f"{arities[key]} and {n} in rule set {rs.name}",
                    atom.loc.line, atom.loc.col,
                )
            arities[key] = n
        # each `_` is a distinct fresh variable, so it never satisfies
        # safety; it is fine in positive hypotheses only
        pos_vars = set()
        for h in rule.hyps:
            if h.positive:
                pos_vars.update(a.name for a in h.atom.args
                                if isinstance(a, RArgVar) and a.name != "_")
        for a in rule.concl.args:
            if isinstance(a, RArgVar) and a.name not in pos_vars:
                raise RuleError(
                    f"unsafe variable {a.name} in conclusion of rule set {rs.name}",
                    a.loc.line, a.loc.col,
                )
        for h in rule.hyps:
            if not h.positive:
                for a in h.atom.args:
                    if isinstance(a, RArgVar) and a.name not in pos_vars:
                        raise RuleError(
                            f"unsafe variable {a.name} under negation in rule set {rs.name}",
                            a.loc.line, a.loc.col,
                        )


def _pred_str(p: RawPred) -> str:
    chain = ".".join(p.parts)
    return f"self.{chain}" if p.is_self else chain


def _program_wf(prog: Program):
    seen_rs = set()
    for rs in prog.rulesets:
        if rs.name in seen_rs:
            raise RuleError(f"duplicate rule set {rs.name}", rs.loc.line, rs.loc.col)
        seen_rs.add(rs.name)
        _rule_wf(rs)
    seen_cls = set()
    for cls in prog.classes:
        if cls.name in seen_cls:
            raise RuleError(f"duplicate class {cls.name}", cls.loc.line, cls.loc.col)
        seen_cls.add(cls.name)
        members = set()
        for rs in cls.rulesets:
            if rs.name in members:
                raise RuleError(
                    f"duplicate rule set {rs.name} in class {cls.name}",
                    rs.loc.line, rs.loc.col,
                )
            members.add(rs.name)
            _rule_wf(rs)
        mseen = set()
        for m in cls.methods:
            if m.name in mseen:
                raise RuleError(
                    f"duplicate method {m.name} in class {cls.name}", m.loc.line, m.loc.col
                )
            mseen.add(m.name)
            if len(set(m.params)) != len(m.params):
                raise RuleError(f"duplicate parameter in {cls.name}.{m.name}",
                                m.loc.line, m.loc.col)
            if "self" in m.params:
                raise RuleError("self cannot be a parameter", m.loc.line, m.loc.col)


def parse_program(text: str) -> Program:
    prog = Parser(tokenize(text)).parse_program()
    _program_wf(prog)
    return prog
