"""Lowering from parsed surface programs to the kernel form the
interpreter executes.

Stages, in order:

  normalize      multi-assignment and tuple destructuring to simple
                 assignments through temporaries, receiver chains to
                 temporaries, `new` with an argument list to bare new
                 plus a setup call, ifsome/whilesome to scan loops
                 with witness assignments and a found flag
  boolean_ops    `and` to or/not, `each` to not-some-not, negated
                 membership to not-in
  lift_infers    infer calls out of expression position; a while
                 condition's lifted calls are re-issued at the end of
                 the loop body so the condition stays live
  resolve        every name to a parameter, pattern variable, self
                 field, or field of the globals record; rule sets
                 resolved and validated; scope errors
  infer_patterns query patterns to bare queries plus a filtering
                 comprehension; wildcards become projected variables
  comprehension_elim
                 statement-position comprehensions to accumulation
                 loops (inline ones stay expressions)
  iterator_patterns
                 loop and quantifier patterns to plain variables with
                 match guards; quantifiers over several iterators nest

Temporaries introduced here become fields of the globals record with
a leading underscore; user identifiers are collected up front so the
fresh names never collide.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field

from .analysis import ResolvedRuleSet, resolve_ruleset
from .analysis_sites import (
    BASE_OF_RULESETS, DERIVED_ERROR, MAYBE_ALIASED, SiteReport,
    classify_update_sites,
)
from .astnodes import (
    Agg, Assign, Block, BoolOp, Call, CallStmt, ClassDef, Comprehension,
    FieldAccess, For, GvRef, If, IfSome, InferExpr, InferStmt, InOp, IsInst,
    IsOp, IsTuple, Iterator, KwArg, LenOp, Lit, LoadFacts, LocalRef,
    MethodDef, Name, NewStmt, Node, Not, PatBound, PatExpr, PatTuple, PatVar,
    PatWild, Plus, PrintStmt, Program, QBound, QConst, Query, QVar, QWild,
    Quant, Return, Select, SelfExpr, SeqLit, SetLit, Skip, Stmt, SuperCall,
    TField, TName, TTuple, TupleExpr, While, WhileSome, walk,
)
from .errors import ScopeError, RuleError, UpdateDisciplineError

GLOBALS_CLASS = "_Globals"


# --------------------------------------------------------------- fresh names


class FreshNames:
    def __init__(self, used):
        self.used = set(used)
        self._n = 0

    def new(self, hint: str = "t") -> str:
        while True:
            self._n += 1
            name = f"_{hint}{self._n}"
            if name not in self.used:
                self.used.add(name)
                return name

    def variant(self, base: str) -> str:
        if base and base != "_" and base not in self.used:
            self.used.add(base)
            return base
        k = 2
        while f"{base}__{k}" in self.used or base == "_":
            if base == "_":
                base = "w"
                continue
            k += 1
        name = f"{base}__{k}"
        self.used.add(name)
        return name


def collect_used(program: Program) -> set[str]:
    names: set[str] = set()
    for n in walk(program):
        for attr in ("id", "name", "field", "class_name", "parent"):
            v = getattr(n, attr, None)
            if isinstance(v, str):
                names.add(v)
        parts = getattr(n, "parts", None)
        if parts:
            names.update(parts)
        params = getattr(n, "params", None)
        if params and all(isinstance(p, str) for p in params):
            names.update(params)
    names.discard(None)
    return names


# ------------------------------------------------------------ generic rebuild


def _map_children(node: Node, f):
    changes = {}
    for fld in dataclasses.fields(node):
        if fld.name == "loc":
            continue
        v = getattr(node, fld.name)
        if isinstance(v, Node):
            nv = f(v)
            if nv is not v:
                changes[fld.name] = nv
        elif isinstance(v, tuple) and any(isinstance(x, Node) for x in v):
            nv = tuple(f(x) if isinstance(x, Node) else x for x in v)
            if any(a is not b for a, b in zip(nv, v)):
                changes[fld.name] = nv
    return dataclasses.replace(node, **changes) if changes else node


def bottomup(node: Node, fn):
    return fn(_map_children(node, lambda c: bottomup(c, fn)))


def subst_locals(node: Node, binds: dict):
    """Replace LocalRef occurrences; sound because pattern variable
    names are globally unique after resolution."""
    if not binds:
        return node

    def fn(n):
        if isinstance(n, LocalRef) and n.id in binds:
            return binds[n.id]
        return n

    return bottomup(node, fn)


def _lc(node):
    return (node.loc.line, node.loc.col) if getattr(node, "loc", None) else (None, None)


def _atomic(e) -> bool:
    return isinstance(e, (Name, SelfExpr, GvRef, LocalRef))


def _true(e) -> bool:
    return isinstance(e, Lit) and e.value is True


def _and(conds: list, extra=None):
    parts = [c for c in conds if not _true(c)]
    if extra is not None and not _true(extra):
        parts.append(extra)
    if not parts:
        return Lit(True)
    out = parts[0]
    for c in parts[1:]:
        # a and b == not (not a or not b); or short-circuits, so b's
        # subterms stay unevaluated when a fails
        out = Not(BoolOp("or", Not(out), Not(c)))
    return out


# ------------------------------------------------------------------ normalize


def _norm_block(b: Block, fresh: FreshNames) -> Block:
    out: list[Stmt] = []
    for s in b.stmts:
        out.extend(_norm_stmt(s, fresh))
    if not out:
        out.append(Skip())
    return Block(tuple(out))


def _norm_stmt(s: Stmt, fresh: FreshNames) -> list[Stmt]:
    if isinstance(s, Assign):
        return _norm_assign(s, fresh)
    if isinstance(s, NewStmt):
        return _norm_new(s, fresh)
    if isinstance(s, InferStmt):
        for t in s.targets:
            if isinstance(t, TTuple):
                raise ScopeError("cannot destructure infer results", *_lc(s))
        if len(s.targets) <= 1:
            return [s]
        out: list[Stmt] = []
        targets = tuple(_lift_target(t, out, fresh, s) for t in s.targets)
        out.append(dataclasses.replace(s, targets=targets))
        return out
    if isinstance(s, If):
        return [dataclasses.replace(s, then=_norm_block(s.then, fresh),
                                    els=_norm_block(s.els, fresh))]
    if isinstance(s, While):
        return [dataclasses.replace(s, body=_norm_block(s.body, fresh))]
    if isinstance(s, For):
        return [dataclasses.replace(s, body=_norm_block(s.body, fresh))]
    if isinstance(s, IfSome):
        return _elim_ifsome(s, fresh)
    if isinstance(s, WhileSome):
        return _elim_whilesome(s, fresh)
    return [s]


def _lift_target(t, out: list[Stmt], fresh: FreshNames, s: Stmt):
    """Pin down the receiver of a field target before any write runs;
    self and the globals record cannot be rebound, so they stay."""
    if isinstance(t, TField) and not isinstance(t.obj, (SelfExpr, GvRef)):
        tmp = fresh.new()
        out.append(Assign((TName(tmp),), (t.obj,), loc=s.loc))
        return TField(Name(tmp), t.field, loc=t.loc)
    if isinstance(t, TTuple):
        return TTuple(tuple(_lift_target(e, out, fresh, s) for e in t.elems),
                      loc=t.loc)
    return t


def _norm_assign(s: Assign, fresh: FreshNames) -> list[Stmt]:
    if len(s.targets) == 1 and not isinstance(s.targets[0], TTuple):
        return [s]
    # receivers first, then all right-hand sides, then writes left to right
    out: list[Stmt] = []
    targets = [_lift_target(t, out, fresh, s) for t in s.targets]
    tmps: list[str] = []
    for v in s.values:
        tmp = fresh.new()
        out.append(Assign((TName(tmp),), (v,), loc=s.loc))
        tmps.append(tmp)
    for t, tmp in zip(targets, tmps):
        out.extend(_destructure(t, Name(tmp), s, fresh))
    return out


def _destructure(t, src, s: Stmt, fresh: FreshNames) -> list[Stmt]:
    if not isinstance(t, TTuple):
        return [Assign((t,), (src,), loc=s.loc)]
    out: list[Stmt] = []
    if not isinstance(src, Name):
        tmp = fresh.new()
        out.append(Assign((TName(tmp),), (src,), loc=s.loc))
        src = Name(tmp)
    for i, elem in enumerate(t.elems):
        out.extend(_destructure(elem, Select(src, Lit(i + 1)), s, fresh))
    return out


def _pure_chain(e) -> bool:
    if isinstance(e, (Name, SelfExpr, GvRef, LocalRef)):
        return True
    return isinstance(e, FieldAccess) and _pure_chain(e.obj)


def _norm_new(s: NewStmt, fresh: FreshNames) -> list[Stmt]:
    t = s.target
    if isinstance(t, TTuple):
        raise ScopeError("new needs a single target", *_lc(s))
    out: list[Stmt] = []
    if s.args is not None and isinstance(t, TField) and not _pure_chain(t.obj):
        # the setup call re-reads the target, so pin its receiver down
        t = _lift_target(t, out, fresh, s)
    out.append(NewStmt(t, s.class_name, None, loc=s.loc))
    if s.args is not None:
        te = Name(t.name) if isinstance(t, TName) else FieldAccess(t.obj, t.field)
        out.append(CallStmt(Call(te, "setup", s.args), loc=s.loc))
    return out


# -- ifsome / whilesome ------------------------------------------------------


def _pattern_vars(p) -> list[str]:
    if isinstance(p, PatVar) and p.name != "_":
        return [p.name]
    if isinstance(p, PatTuple):
        out: list[str] = []
        for e in p.elems:
            out.extend(_pattern_vars(e))
        return out
    return []


def _rename_pattern(p, mapping: dict[str, str], fresh: FreshNames):
    """Fresh names for the binding variables of a pattern; references
    (=x, expressions) are renamed through the mapping built so far."""
    if isinstance(p, PatVar):
        if p.name == "_":
            return p
        if p.name not in mapping:
            mapping[p.name] = fresh.variant(p.name)
        return PatVar(mapping[p.name], loc=p.loc)
    if isinstance(p, PatTuple):
        return PatTuple(tuple(_rename_pattern(e, mapping, fresh) for e in p.elems),
                        loc=p.loc)
    if isinstance(p, PatBound):
        return PatBound(mapping.get(p.name, p.name), loc=p.loc)
    if isinstance(p, PatExpr):
        return PatExpr(_rename_names(p.e, mapping), loc=p.loc)
    return p


def _rename_names(e, mapping: dict[str, str]):
    """Capture-aware renaming of bare names in an expression."""
    if not mapping:
        return e
    if isinstance(e, Name):
        return Name(mapping[e.id], loc=e.loc) if e.id in mapping else e
    if isinstance(e, (Quant, Comprehension)):
        inner = dict(mapping)
        its = []
        for it in e.iters:
            src = _rename_names(it.source, inner)
            for v in _pattern_vars(it.pattern):
                inner.pop(v, None)
            pat = _rename_pattern_refs(it.pattern, inner)
            its.append(Iterator(pat, src, loc=it.loc))
        cond = _rename_names(e.cond, inner)
        if isinstance(e, Quant):
            return Quant(e.kind, tuple(its), cond, loc=e.loc)
        return Comprehension(_rename_names(e.head, inner), tuple(its), cond,
                             loc=e.loc)
    return _map_children(e, lambda c: _rename_names(c, mapping))


def _rename_pattern_refs(p, mapping):
    if isinstance(p, PatExpr):
        return PatExpr(_rename_names(p.e, mapping), loc=p.loc)
    if isinstance(p, PatBound):
        return PatBound(mapping.get(p.name, p.name), loc=p.loc)
    if isinstance(p, PatTuple):
        return PatTuple(tuple(_rename_pattern_refs(e, mapping) for e in p.elems),
                        loc=p.loc)
    return p


def _build_scan(iters, cond, found: str, fresh: FreshNames, loc):
    """A loop nest that scans the iterators for the first match, binds
    the witness variables, and raises the found flag."""
    rename: dict[str, str] = {}
    its = []
    for it in iters:
        src = _rename_names(it.source, rename)
        pat = _rename_pattern(it.pattern, rename, fresh)
        its.append(Iterator(pat, src, loc=it.loc))
    cond2 = _rename_names(cond, rename)
    assigns: list[Stmt] = [
        Assign((TName(orig),), (Name(new),), loc=loc)
        for orig, new in rename.items()
    ]
    assigns.append(Assign((TName(found),), (Lit(True),), loc=loc))
    guard = _and([Not(Name(found))], cond2)
    inner: Stmt = If(guard, Block(tuple(assigns)), Block((Skip(),)), loc=loc)
    for it in reversed(its):
        inner = For(it, Block((inner,)), loc=loc)
    return inner


def _elim_ifsome(s: IfSome, fresh: FreshNames) -> list[Stmt]:
    body = _norm_block(s.body, fresh)
    found = fresh.new("f")
    scan = _build_scan(s.iters, s.cond, found, fresh, s.loc)
    return [
        Assign((TName(found),), (Lit(False),), loc=s.loc),
        scan,
        If(Name(found), body, Block((Skip(),)), loc=s.loc),
    ]


def _elim_whilesome(s: WhileSome, fresh: FreshNames) -> list[Stmt]:
    body = _norm_block(s.body, fresh)
    found = fresh.new("f")
    scan = _build_scan(s.iters, s.cond, found, fresh, s.loc)
    loop_body = Block((
        Assign((TName(found),), (Lit(False),), loc=s.loc),
        scan,
        If(Name(found), body, Block((Skip(),)), loc=s.loc),
    ))
    return [
        Assign((TName(found),), (Lit(True),), loc=s.loc),
        While(Name(found), loop_body, loc=s.loc),
    ]


def normalize(program: Program, fresh: FreshNames) -> Program:
    classes = []
    for c in program.classes:
        methods = tuple(
            dataclasses.replace(m, body=_norm_block(m.body, fresh))
            for m in c.methods
        )
        classes.append(dataclasses.replace(c, methods=methods))
    return dataclasses.replace(program, classes=tuple(classes),
                               top=_norm_block(program.top, fresh))


# ---------------------------------------------------------------- boolean ops


def _bool_fn(n):
    if isinstance(n, BoolOp) and n.op == "and":
        return Not(BoolOp("or", Not(n.left), Not(n.right), loc=n.loc), loc=n.loc)
    if isinstance(n, Quant) and n.kind == "each":
        return Not(Quant("some", n.iters, Not(n.cond), loc=n.loc), loc=n.loc)
    if isinstance(n, InOp) and n.negated:
        return Not(InOp(n.item, n.coll, False, loc=n.loc), loc=n.loc)
    return n


def boolean_ops(program: Program) -> Program:
    return bottomup(program, _bool_fn)


# ----------------------------------------------------------------- lift infer


def _free_names(e) -> set[str]:
    out = set()
    for n in walk(e):
        if isinstance(n, Name):
            out.add(n.id)
        elif isinstance(n, (PatBound, QBound)):
            out.add(n.name)
    return out


def _lift_expr(e, binders: frozenset, pre: list[Stmt], fresh: FreshNames):
    if isinstance(e, InferExpr):
        if len(e.queries) != 1:
            raise ScopeError(
                "infer in expression position takes exactly one query",
                *_lc(e))
        if _free_names(e) & binders:
            raise ScopeError(
                "infer cannot appear under a quantifier or comprehension "
                "that binds one of its variables", *_lc(e))
        obj = _lift_expr(e.obj, binders, pre, fresh) if e.obj is not None else None
        kwargs = tuple(
            KwArg(k.name, _lift_expr(k.value, binders, pre, fresh), loc=k.loc)
            for k in e.kwargs
        )
        tmp = fresh.new("i")
        pre.append(InferStmt((TName(tmp),), obj, e.queries, kwargs, e.ruleset,
                             loc=e.loc))
        return Name(tmp, loc=e.loc)
    if isinstance(e, (Quant, Comprehension)):
        b2 = set(binders)
        its = []
        for it in e.iters:
            src = _lift_expr(it.source, frozenset(b2), pre, fresh)
            b2.update(_pattern_vars(it.pattern))
            its.append(Iterator(it.pattern, src, loc=it.loc))
        cond = _lift_expr(e.cond, frozenset(b2), pre, fresh)
        if isinstance(e, Quant):
            return Quant(e.kind, tuple(its), cond, loc=e.loc)
        head = _lift_expr(e.head, frozenset(b2), pre, fresh)
        return Comprehension(head, tuple(its), cond, loc=e.loc)
    return _map_children(e, lambda c: _lift_expr(c, binders, pre, fresh))


def _lift_block(b: Block, fresh: FreshNames) -> Block:
    out: list[Stmt] = []
    for s in b.stmts:
        out.extend(_lift_stmt(s, fresh))
    return Block(tuple(out))


def _lift_stmt(s: Stmt, fresh: FreshNames) -> list[Stmt]:
    pre: list[Stmt] = []
    none = frozenset()

    def L(e):
        return _lift_expr(e, none, pre, fresh)

    if isinstance(s, Assign):
        values = tuple(L(v) for v in s.values)
        return pre + [dataclasses.replace(s, values=values)]
    if isinstance(s, InferStmt):
        obj = L(s.obj) if s.obj is not None else None
        kwargs = tuple(KwArg(k.name, L(k.value), loc=k.loc) for k in s.kwargs)
        return pre + [dataclasses.replace(s, obj=obj, kwargs=kwargs)]
    if isinstance(s, CallStmt):
        return pre + [CallStmt(L(s.call), loc=s.loc)]
    if isinstance(s, PrintStmt):
        return pre + [PrintStmt(L(s.e), loc=s.loc)]
    if isinstance(s, Return):
        e = L(s.e) if s.e is not None else None
        return pre + [Return(e, loc=s.loc)]
    if isinstance(s, If):
        cond = L(s.cond)
        return pre + [If(cond, _lift_block(s.then, fresh),
                         _lift_block(s.els, fresh), loc=s.loc)]
    if isinstance(s, While):
        cond = L(s.cond)
        body = _lift_block(s.body, fresh)
        if pre:
            # keep the condition's lifted calls live across iterations
            again = tuple(dataclasses.replace(p) for p in pre)
            body = Block(body.stmts + again)
        return pre + [While(cond, body, loc=s.loc)]
    if isinstance(s, For):
        src = L(s.iter.source)
        return pre + [For(Iterator(s.iter.pattern, src, loc=s.iter.loc),
                          _lift_block(s.body, fresh), loc=s.loc)]
    return [s]


def lift_infers(program: Program, fresh: FreshNames) -> Program:
    classes = []
    for c in program.classes:
        methods = tuple(
            dataclasses.replace(m, body=_lift_block(m.body, fresh))
            for m in c.methods
        )
        classes.append(dataclasses.replace(c, methods=methods))
    return dataclasses.replace(program, classes=tuple(classes),
                               top=_lift_block(program.top, fresh))


# ------------------------------------------------------------------- resolve


@dataclass(frozen=True)
class _Env:
    cls: str | None
    in_method: bool
    params: frozenset
    patterns: tuple  # pairs (raw, unique), innermost last


def _env_lookup(env: _Env, name: str) -> str | None:
    for raw, unique in reversed(env.patterns):
        if raw == name:
            return unique
    return None


@dataclass
class KClass:
    name: str
    parent: str | None
    methods: dict[str, MethodDef]
    rulesets: dict[str, str]  # bare name -> unique name, own only
    fields: frozenset


@dataclass
class KernelProgram:
    classes: dict[str, KClass]
    rulesets: dict[str, ResolvedRuleSet]
    ruleset_scope: dict[str, str]  # unique -> 'global' | class name
    top: Block
    global_names: frozenset
    sites: list[SiteReport] = field(default_factory=list)
    maintain_stmts: frozenset = frozenset()

    def ancestry(self, cname: str) -> list[str]:
        out = []
        cur = cname
        while cur is not None:
            out.append(cur)
            cur = self.classes[cur].parent
        return out

    def closure_rulesets(self, cname: str) -> list[str]:
        """Unique rule set names, parents first, declaration order."""
        out: list[str] = []
        for anc in reversed(self.ancestry(cname)):
            out.extend(self.classes[anc].rulesets.values())
        return out

    def find_ruleset(self, cname: str | None, bare: str) -> str | None:
        if cname is not None:
            for anc in self.ancestry(cname):
                u = self.classes[anc].rulesets.get(bare)
                if u is not None:
                    return u
        g = self.classes[GLOBALS_CLASS].rulesets.get(bare)
        return g

    def find_method(self, cname: str, name: str):
        cur = cname
        while cur is not None:
            m = self.classes[cur].methods.get(name)
            if m is not None:
                return m, cur
            cur = self.classes[cur].parent
        return None

    def class_asts(self) -> dict[str, ClassDef]:
        out = {}
        for name, kc in self.classes.items():
            out[name] = ClassDef(name, kc.parent, (),
                                 tuple(kc.methods.values()))
        return out

    def rulesets_by_class(self) -> dict[str, list[ResolvedRuleSet]]:
        out: dict[str, list[ResolvedRuleSet]] = {n: [] for n in self.classes}
        for u, rs in self.rulesets.items():
            scope = self.ruleset_scope[u]
            key = GLOBALS_CLASS if scope == "global" else scope
            out.setdefault(key, []).append(rs)
        return out


class Resolver:
    def __init__(self, prog: Program, fresh: FreshNames, extra_globals=()):
        self.prog = prog
        self.fresh = fresh
        self.global_names: set[str] = set(extra_globals)
        self.classes = {c.name: c for c in prog.classes}
        for c in prog.classes:
            if c.name in ("set", "sequence"):
                raise ScopeError(f"{c.name} is a built-in class", *_lc(c))
            if c.parent is not None and c.parent not in self.classes:
                raise ScopeError(f"unknown parent class {c.parent}", *_lc(c))
        for c in prog.classes:
            seen = {c.name}
            cur = c.parent
            while cur is not None:
                if cur in seen:
                    raise ScopeError(
                        f"inheritance cycle through {c.name}", *_lc(c))
                seen.add(cur)
                cur = self.classes[cur].parent
        self.own_fields: dict[str, set[str]] = {}
        self.methods: dict[str, dict[str, MethodDef]] = {}
        for c in prog.classes:
            fs: set[str] = set()
            for m in c.methods:
                for n in walk(m.body):
                    if isinstance(n, (Assign, InferStmt)):
                        for t in n.targets:
                            if isinstance(t, TField) and isinstance(t.obj, SelfExpr):
                                fs.add(t.field)
                    elif isinstance(n, NewStmt):
                        t = n.target
                        if isinstance(t, TField) and isinstance(t.obj, SelfExpr):
                            fs.add(t.field)
            for rs in c.rulesets:
                for rule in rs.rules:
                    for atom in [rule.concl] + [h.atom for h in rule.hyps]:
                        p = atom.pred
                        if getattr(p, "is_self", False):
                            fs.add(p.parts[0])
            self.own_fields[c.name] = fs
            self.methods[c.name] = {m.name: m for m in c.methods}

    def ancestry(self, cname: str) -> list[str]:
        out = []
        cur = cname
        while cur is not None:
            out.append(cur)
            cur = self.classes[cur].parent
        return out

    def field_closure(self, cname: str) -> set[str]:
        out: set[str] = set()
        for anc in self.ancestry(cname):
            out |= self.own_fields[anc]
        return out

    def has_method(self, cname: str, name: str) -> bool:
        return any(name in self.methods[a] for a in self.ancestry(cname))

    # -- expressions --------------------------------------------------

    def expr(self, e, env: _Env):
        if isinstance(e, Lit):
            return e
        if isinstance(e, Name):
            return self.name_ref(e.id, env, e.loc)
        if isinstance(e, SelfExpr):
            if env.cls is None:
                raise ScopeError("self outside a class", *_lc(e))
            return e
        if isinstance(e, (GvRef, LocalRef)):
            return e
        if isinstance(e, FieldAccess):
            return FieldAccess(self.expr(e.obj, env), e.field, loc=e.loc)
        if isinstance(e, IsInst):
            if e.class_name not in self.classes \
                    and e.class_name not in ("set", "sequence"):
                raise ScopeError(f"unknown class {e.class_name}", *_lc(e))
            return IsInst(self.expr(e.e, env), e.class_name, loc=e.loc)
        if isinstance(e, Quant):
            its, env2 = self.iterators(e.iters, env)
            return Quant(e.kind, its, self.expr(e.cond, env2), loc=e.loc)
        if isinstance(e, Comprehension):
            its, env2 = self.iterators(e.iters, env)
            return Comprehension(self.expr(e.head, env2), its,
                                 self.expr(e.cond, env2), loc=e.loc)
        if isinstance(e, Call):
            args = tuple(self.expr(a, env) for a in e.args)
            if e.target is None:
                if env.cls is not None and self.has_method(env.cls, e.name):
                    return Call(SelfExpr(), e.name, args, loc=e.loc)
                if e.name == "print":
                    raise ScopeError("print is a statement", *_lc(e))
                raise ScopeError(f"unknown function {e.name}", *_lc(e))
            return Call(self.expr(e.target, env), e.name, args, loc=e.loc)
        if isinstance(e, SuperCall):
            if env.cls is None:
                raise ScopeError("super outside a class", *_lc(e))
            if self.classes[env.cls].parent is None:
                raise ScopeError(f"{env.cls} has no parent class", *_lc(e))
            args = tuple(self.expr(a, env) for a in e.args)
            return SuperCall(e.name, args, from_class=env.cls, loc=e.loc)
        if isinstance(e, LoadFacts):
            return LoadFacts(self.expr(e.path, env), loc=e.loc)
        if isinstance(e, InferExpr):
            raise AssertionError("infer expression not lifted")
        return _map_children(e, lambda c: self.expr(c, env)
                             if not isinstance(c, (Stmt, Block)) else c)

    def name_ref(self, name: str, env: _Env, loc=None):
        lc = (loc.line, loc.col) if loc else (None, None)
        if name == "_":
            raise ScopeError("wildcard outside a pattern", *lc)
        unique = _env_lookup(env, name)
        if unique is not None:
            return LocalRef(unique, loc=loc)
        if name in env.params:
            return LocalRef(name, loc=loc)
        if env.cls is not None and name in self.field_closure(env.cls):
            return FieldAccess(SelfExpr(), name, loc=loc)
        if name in self.classes:
            raise ScopeError(f"class {name} used as a value", *lc)
        self.global_names.add(name)
        return FieldAccess(GvRef(), name, loc=loc)

    def iterators(self, iters, env: _Env):
        out = []
        for it in iters:
            src = self.expr(it.source, env)
            pat, env = self.pattern(it.pattern, env)
            out.append(Iterator(pat, src, loc=it.loc))
        return tuple(out), env

    def pattern(self, p, env: _Env):
        entry = env
        binds: list[tuple[str, str]] = []

        def go(p):
            if isinstance(p, PatVar):
                if p.name == "_":
                    return PatWild(loc=p.loc)
                unique = self.fresh.variant(p.name)
                binds.append((p.name, unique))
                return PatVar(unique, loc=p.loc)
            if isinstance(p, PatWild):
                return p
            if isinstance(p, PatBound):
                return PatExpr(self.name_ref(p.name, entry, p.loc), loc=p.loc)
            if isinstance(p, PatExpr):
                return PatExpr(self.expr(p.e, entry), loc=p.loc)
            if isinstance(p, PatTuple):
                return PatTuple(tuple(go(e) for e in p.elems), loc=p.loc)
            raise AssertionError(f"pattern {p!r}")

        p2 = go(p)
        env2 = dataclasses.replace(env, patterns=env.patterns + tuple(binds))
        return p2, env2

    # -- statements ---------------------------------------------------

    def target(self, t, env: _Env):
        if isinstance(t, TName):
            name = t.name
            lc = (t.loc.line, t.loc.col) if t.loc else (None, None)
            if name in env.params:
                raise ScopeError(f"cannot assign to parameter {name}", *lc)
            if _env_lookup(env, name) is not None:
                raise ScopeError(
                    f"cannot assign to pattern variable {name}", *lc)
            if env.cls is not None and name in self.field_closure(env.cls):
                return TField(SelfExpr(), name, loc=t.loc)
            if name in self.classes:
                raise ScopeError(f"class {name} used as a target", *lc)
            self.global_names.add(name)
            return TField(GvRef(), name, loc=t.loc)
        if isinstance(t, TField):
            return TField(self.expr(t.obj, env), t.field, loc=t.loc)
        raise AssertionError(f"target {t!r}")

    def stmt(self, s: Stmt, env: _Env) -> Stmt:
        if isinstance(s, Skip):
            return s
        if isinstance(s, Assign):
            assert len(s.targets) == 1 and len(s.values) == 1
            return Assign((self.target(s.targets[0], env),),
                          (self.expr(s.values[0], env),), loc=s.loc)
        if isinstance(s, NewStmt):
            if s.class_name not in self.classes \
                    and s.class_name not in ("set", "sequence"):
                raise ScopeError(f"unknown class {s.class_name}", *_lc(s))
            assert s.args is None
            return NewStmt(self.target(s.target, env), s.class_name, None,
                           loc=s.loc)
        if isinstance(s, InferStmt):
            targets = tuple(self.target(t, env) for t in s.targets)
            if s.obj is None:
                obj = SelfExpr() if env.cls is not None else GvRef()
            else:
                obj = self.expr(s.obj, env)
            queries = tuple(self.query(q, env) for q in s.queries)
            kwargs = tuple(KwArg(k.name, self.expr(k.value, env), loc=k.loc)
                           for k in s.kwargs)
            return InferStmt(targets, obj, queries, kwargs, s.ruleset,
                             loc=s.loc)
        if isinstance(s, CallStmt):
            call = self.expr(s.call, env)
            return CallStmt(call, loc=s.loc)
        if isinstance(s, PrintStmt):
            return PrintStmt(self.expr(s.e, env), loc=s.loc)
        if isinstance(s, If):
            return If(self.expr(s.cond, env), self.block(s.then, env),
                      self.block(s.els, env), loc=s.loc)
        if isinstance(s, While):
            return While(self.expr(s.cond, env), self.block(s.body, env),
                         loc=s.loc)
        if isinstance(s, For):
            (it,), env2 = self.iterators((s.iter,), env)
            return For(it, self.block(s.body, env2), loc=s.loc)
        if isinstance(s, Return):
            if not env.in_method:
                raise ScopeError("return outside a method", *_lc(s))
            e = self.expr(s.e, env) if s.e is not None else None
            return Return(e, loc=s.loc)
        raise AssertionError(f"statement {s!r} survived normalization")

    def query(self, q: Query, env: _Env) -> Query:
        if q.args is None:
            return q
        args = []
        for a in q.args:
            if isinstance(a, QBound):
                args.append(QExpr(self.name_ref(a.name, env, q.loc)))
            else:
                args.append(a)
        return Query(q.pred, tuple(args), arity=q.arity, loc=q.loc)

    def block(self, b: Block, env: _Env) -> Block:
        return Block(tuple(self.stmt(s, env) for s in b.stmts))

    # -- program ------------------------------------------------------

    def run(self) -> KernelProgram:
        top_env = _Env(None, False, frozenset(), ())
        top = self.block(self.prog.top, top_env)
        resolved_methods: dict[str, dict[str, MethodDef]] = {}
        for c in self.prog.classes:
            ms: dict[str, MethodDef] = {}
            for m in c.methods:
                env = _Env(c.name, True, frozenset(m.params), ())
                ms[m.name] = dataclasses.replace(
                    m, body=self.block(m.body, env))
            resolved_methods[c.name] = ms

        gl = frozenset(self.global_names)
        rulesets: dict[str, ResolvedRuleSet] = {}
        scope: dict[str, str] = {}
        kclasses: dict[str, KClass] = {}
        g_rs: dict[str, str] = {}
        for rs in self.prog.rulesets:
            u = rs.name
            rulesets[u] = resolve_ruleset(rs, gl, False, u)
            scope[u] = "global"
            g_rs[rs.name] = u
        for c in self.prog.classes:
            own: dict[str, str] = {}
            for rs in c.rulesets:
                u = f"{c.name}.{rs.name}"
                rulesets[u] = resolve_ruleset(rs, gl, True, u)
                scope[u] = c.name
                own[rs.name] = u
            kclasses[c.name] = KClass(c.name, c.parent,
                                      resolved_methods[c.name], own,
                                      frozenset(self.field_closure(c.name)))
        kclasses[GLOBALS_CLASS] = KClass(GLOBALS_CLASS, None, {}, g_rs, gl)

        kp = KernelProgram(kclasses, rulesets, scope, top, gl)
        self._check_single_deriver(kp)
        return kp

    def _check_single_deriver(self, kp: KernelProgram):
        for cname in kp.classes:
            derivers: dict[str, str] = {}
            for u in kp.closure_rulesets(cname):
                for p in kp.rulesets[u].nl_derived:
                    prev = derivers.get(p.name)
                    if prev is not None and prev != u:
                        raise RuleError(
                            f"{p.name} is derived by both {prev} and {u} "
                            f"for {cname}")
                    derivers[p.name] = u


# QExpr: a resolved expression in query-argument position (from =name).
@dataclass(frozen=True)
class QExpr(Node):
    e: object


# -------------------------------------------------------------- infer queries


def _apply_blocks(kp: KernelProgram, f):
    for kc in kp.classes.values():
        for name, m in list(kc.methods.items()):
            kc.methods[name] = dataclasses.replace(m, body=f(m.body))
    kp.top = f(kp.top)


def infer_patterns(kp: KernelProgram, fresh: FreshNames):
    def fix_block(b: Block) -> Block:
        out: list[Stmt] = []
        for s in b.stmts:
            out.extend(fix_stmt(s))
        return Block(tuple(out))

    def fix_stmt(s: Stmt) -> list[Stmt]:
        if isinstance(s, If):
            return [dataclasses.replace(s, then=fix_block(s.then),
                                        els=fix_block(s.els))]
        if isinstance(s, While):
            return [dataclasses.replace(s, body=fix_block(s.body))]
        if isinstance(s, For):
            return [dataclasses.replace(s, body=fix_block(s.body))]
        if not isinstance(s, InferStmt):
            return [s]
        if s.targets and len(s.targets) != len(s.queries):
            raise ScopeError(
                f"infer assigns {len(s.targets)} targets from "
                f"{len(s.queries)} queries", *_lc(s))
        queries: list[Query] = []
        targets = list(s.targets)
        post: list[Stmt] = []
        for i, q in enumerate(s.queries):
            if q.args is None:
                queries.append(q)
                continue
            arity = len(q.args)
            queries.append(Query(q.pred, None, arity=arity, loc=q.loc))
            if not targets:
                continue
            y = fresh.new("q")
            elems = []
            proj: list[str] = []
            seen: dict[str, str] = {}
            for a in q.args:
                if isinstance(a, QVar):
                    if a.name in seen:
                        elems.append(PatVar(seen[a.name]))
                    else:
                        pv = fresh.variant(a.name)
                        seen[a.name] = pv
                        proj.append(pv)
                        elems.append(PatVar(pv))
                elif isinstance(a, QWild):
                    pv = fresh.variant("w")
                    proj.append(pv)
                    elems.append(PatVar(pv))
                elif isinstance(a, QConst):
                    elems.append(PatExpr(Lit(a.value)))
                elif isinstance(a, QExpr):
                    elems.append(PatExpr(a.e))
                else:
                    raise AssertionError(f"query arg {a!r}")
            pattern = elems[0] if arity == 1 else PatTuple(tuple(elems))
            head = TupleExpr(tuple(LocalRef(p) for p in proj))
            comp = Comprehension(
                head, (Iterator(pattern, FieldAccess(GvRef(), y)),),
                Lit(True), loc=s.loc)
            post.append(Assign((targets[i],), (comp,), loc=s.loc))
            targets[i] = TField(GvRef(), y)
        out = dataclasses.replace(s, targets=tuple(targets),
                                  queries=tuple(queries))
        return [out] + post

    _apply_blocks(kp, fix_block)


# ------------------------------------------------------------- comprehensions


def comprehension_elim(kp: KernelProgram, fresh: FreshNames):
    def fix_block(b: Block) -> Block:
        out: list[Stmt] = []
        for s in b.stmts:
            out.extend(fix_stmt(s))
        return Block(tuple(out))

    def fix_stmt(s: Stmt) -> list[Stmt]:
        if isinstance(s, If):
            return [dataclasses.replace(s, then=fix_block(s.then),
                                        els=fix_block(s.els))]
        if isinstance(s, While):
            return [dataclasses.replace(s, body=fix_block(s.body))]
        if isinstance(s, For):
            return [dataclasses.replace(s, body=fix_block(s.body))]
        if not (isinstance(s, Assign) and len(s.values) == 1
                and isinstance(s.values[0], Comprehension)):
            return [s]
        c = s.values[0]
        acc = fresh.new("c")
        acc_ref = FieldAccess(GvRef(), acc)
        add = CallStmt(Call(acc_ref, "add", (c.head,)), loc=s.loc)
        inner: Stmt = add
        if not _true(c.cond):
            inner = If(c.cond, Block((add,)), Block((Skip(),)), loc=s.loc)
        for it in reversed(c.iters):
            inner = For(it, Block((inner,)), loc=s.loc)
        return [
            Assign((TField(GvRef(), acc),), (SetLit(()),), loc=s.loc),
            inner,
            Assign((s.targets[0],), (acc_ref,), loc=s.loc),
        ]

    _apply_blocks(kp, fix_block)


# ----------------------------------------------------------- iterator patterns


def compile_pattern(pat, root, conds: list, binds: dict):
    """Match conditions and select-bindings for a pattern against the
    value named by root.  Repeated variables become equality guards."""
    if isinstance(pat, PatVar):
        if pat.name in binds:
            conds.append(IsOp(root, binds[pat.name]))
        else:
            binds[pat.name] = root
    elif isinstance(pat, PatWild):
        pass
    elif isinstance(pat, PatExpr):
        conds.append(IsOp(root, pat.e))
    elif isinstance(pat, PatTuple):
        conds.append(IsTuple(root))
        conds.append(IsOp(LenOp(root), Lit(len(pat.elems))))
        for i, el in enumerate(pat.elems):
            compile_pattern(el, Select(root, Lit(i + 1)), conds, binds)
    else:
        raise AssertionError(f"pattern {pat!r}")


def iterator_patterns(kp: KernelProgram, fresh: FreshNames):
    def fix_expr(n):
        if isinstance(n, Quant):
            if len(n.iters) > 1:
                inner = Quant(n.kind, n.iters[1:], n.cond, loc=n.loc)
                return fix_expr(Quant(n.kind, n.iters[:1], inner, loc=n.loc))
            (it,) = n.iters
            src = fix_expr(it.source)
            cond = fix_expr(n.cond)
            if isinstance(it.pattern, PatVar):
                return Quant(n.kind, (Iterator(it.pattern, src),), cond,
                             loc=n.loc)
            v = fresh.new("e")
            conds: list = []
            binds: dict = {}
            compile_pattern(it.pattern, LocalRef(v), conds, binds)
            cond2 = _and(conds, subst_locals(cond, binds))
            return Quant(n.kind, (Iterator(PatVar(v), src),), cond2,
                         loc=n.loc)
        if isinstance(n, Comprehension):
            # inline comprehensions keep their patterns; the evaluator
            # matches them directly
            return n
        return n

    def fix_all_exprs(node):
        return bottomup(node, fix_expr)

    def fix_block(b: Block) -> Block:
        return Block(tuple(fix_stmt(s) for s in b.stmts))

    def fix_stmt(s: Stmt) -> Stmt:
        if isinstance(s, If):
            return If(fix_all_exprs(s.cond), fix_block(s.then),
                      fix_block(s.els), loc=s.loc)
        if isinstance(s, While):
            return While(fix_all_exprs(s.cond), fix_block(s.body), loc=s.loc)
        if isinstance(s, For):
            src = fix_all_exprs(s.iter.source)
            body = fix_block(s.body)
            pat = s.iter.pattern
            if isinstance(pat, PatVar):
                return For(Iterator(pat, src, loc=s.iter.loc), body, loc=s.loc)
            v = fresh.new("e")
            conds: list = []
            binds: dict = {}
            compile_pattern(pat, LocalRef(v), conds, binds)
            body2 = subst_locals(body, binds)
            guarded = Block((If(_and(conds), body2, Block((Skip(),)),
                                loc=s.loc),))
            return For(Iterator(PatVar(v), src, loc=s.iter.loc), guarded,
                       loc=s.loc)
        return fix_all_exprs(s)

    _apply_blocks(kp, fix_block)


# --------------------------------------------------------------- kernel check


_KERNEL_STMTS = (Skip, Assign, NewStmt, InferStmt, CallStmt, PrintStmt, If,
                 While, For, Return)


def check_kernel(kp: KernelProgram):
    def bad(msg, node):
        raise AssertionError(f"kernel invariant: {msg}: {node!r}")

    def chk_block(b: Block):
        for s in b.stmts:
            chk_stmt(s)

    def chk_stmt(s):
        if not isinstance(s, _KERNEL_STMTS):
            bad("unexpected statement", s)
        if isinstance(s, Assign):
            if len(s.targets) != 1 or len(s.values) != 1:
                bad("compound assignment", s)
            chk_target(s.targets[0])
            chk_expr(s.values[0])
        elif isinstance(s, NewStmt):
            if s.args is not None:
                bad("new with arguments", s)
            chk_target(s.target)
        elif isinstance(s, InferStmt):
            for t in s.targets:
                chk_target(t)
            if s.obj is None:
                bad("unresolved infer object", s)
            chk_expr(s.obj)
            for q in s.queries:
                if q.args is not None:
                    bad("patterned query", s)
            for k in s.kwargs:
                chk_expr(k.value)
        elif isinstance(s, CallStmt):
            chk_expr(s.call)
        elif isinstance(s, PrintStmt):
            chk_expr(s.e)
        elif isinstance(s, If):
            chk_expr(s.cond)
            chk_block(s.then)
            chk_block(s.els)
        elif isinstance(s, While):
            chk_expr(s.cond)
            chk_block(s.body)
        elif isinstance(s, For):
            if not isinstance(s.iter.pattern, PatVar):
                bad("loop pattern", s)
            chk_expr(s.iter.source)
            chk_block(s.body)
        elif isinstance(s, Return):
            if s.e is not None:
                chk_expr(s.e)

    def chk_target(t):
        if not isinstance(t, TField):
            bad("target", t)
        chk_expr(t.obj)

    def chk_expr(e):
        for n in walk(e):
            if isinstance(n, (Name, TName, InferExpr, IfSome, WhileSome,
                              PatBound)):
                bad("surface node", n)
            if isinstance(n, BoolOp) and n.op != "or":
                bad("boolean op", n)
            if isinstance(n, InOp) and n.negated:
                bad("negated membership", n)
            if isinstance(n, Quant):
                if n.kind != "some" or len(n.iters) != 1 \
                        or not isinstance(n.iters[0].pattern, PatVar):
                    bad("quantifier", n)

    for kc in kp.classes.values():
        for m in kc.methods.values():
            chk_block(m.body)
    chk_block(kp.top)


# ------------------------------------------------------------------- assembly


def _uniquify(kp: KernelProgram):
    def copy(n):
        if isinstance(n, Stmt):
            return dataclasses.replace(n)
        return n

    def fix_block(b: Block) -> Block:
        return bottomup(b, copy)

    _apply_blocks(kp, fix_block)


def lower(program: Program, extra_globals=()) -> KernelProgram:
    fresh = FreshNames(collect_used(program) | {GLOBALS_CLASS})
    prog = normalize(program, fresh)
    prog = boolean_ops(prog)
    prog = lift_infers(prog, fresh)
    kp = Resolver(prog, fresh, extra_globals).run()
    infer_patterns(kp, fresh)
    comprehension_elim(kp, fresh)
    iterator_patterns(kp, fresh)
    _uniquify(kp)
    check_kernel(kp)
    kp.global_names = frozenset(kp.global_names)

    sites = classify_update_sites(kp.class_asts(), kp.top,
                                  kp.rulesets_by_class(), GLOBALS_CLASS)
    for rep in sites:
        if rep.classification == DERIVED_ERROR:
            where = ", ".join(rep.rulesets)
            raise UpdateDisciplineError(
                f"{DERIVED_ERROR}: update of {rep.detail}, derived by "
                f"{where}", rep.line, rep.col)
    kp.sites = sites
    kp.maintain_stmts = frozenset(
        r.stmt_id for r in sites
        if r.classification in (BASE_OF_RULESETS, MAYBE_ALIASED))
    return kp
