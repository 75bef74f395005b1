"""Static classification of update sites in a lowered program.

Every statement that can change the heap is classified:

  LocalOnly        provably cannot affect any rule set's predicates;
                   maintenance may be skipped after it
  BaseOfRuleSets   may feed the named rule sets; maintenance required
  DerivedError     provably writes a derived predicate; compile error
  MaybeAliased     cannot be decided statically; maintenance plus the
                   runtime write checks decide

Field assignments are decidable by name: an assignment only rebinds a
field, so it can matter to a rule set only if the field name occurs in
some base chain (or is a derived field).  Set mutations are different:
the mutated set can alias a base of any rule set no matter what
expression produced it, so a mutation is LocalOnly only in a program
with no rule sets at all, unless the receiver is literally a field
whose name settles the matter.
"""

from __future__ import annotations

from dataclasses import dataclass

from .astnodes import (
    Assign, Block, Call, CallStmt, ClassDef, FieldAccess, For, GvRef, If,
    InferStmt, NewStmt, Node, PrintStmt, Return, SelfExpr, Skip, Stmt,
    TField, While, walk,
)
from .analysis import ResolvedRuleSet

LOCAL_ONLY = "LocalOnly"
BASE_OF_RULESETS = "BaseOfRuleSets"
DERIVED_ERROR = "DerivedError"
MAYBE_ALIASED = "MaybeAliased"


@dataclass
class SiteReport:
    stmt_id: int
    line: int | None
    col: int | None
    kind: str            # 'assign' | 'mutate' | 'new' | 'infer-target'
    detail: str
    classification: str
    rulesets: tuple[str, ...] = ()


@dataclass
class _RuleIndex:
    base_fields: dict[str, set[str]]       # field -> rule sets using it in a base chain
    derived_by_class: dict[str, set[str]]  # class -> derived field names (closure)
    derived_fields: dict[str, set[str]]    # field -> rule sets deriving it
    new_rulesets: dict[str, tuple[str, ...]]


def _build_rule_index(classes: dict[str, ClassDef],
                      rulesets_by_class: dict[str, list[ResolvedRuleSet]]) -> _RuleIndex:
    base_fields: dict[str, set[str]] = {}
    derived_fields: dict[str, set[str]] = {}
    derived_by_class: dict[str, set[str]] = {}
    parents = {name: c.parent for name, c in classes.items()}

    def ancestry(name: str) -> list[str]:
        chain = []
        cur: str | None = name
        while cur is not None:
            chain.append(cur)
            cur = parents.get(cur)
        return chain

    for cname in classes:
        derived_by_class[cname] = set()
        for anc in ancestry(cname):
            for rs in rulesets_by_class.get(anc, []):
                for p in rs.nl_derived:
                    derived_by_class[cname].add(p.name)
    for rss in rulesets_by_class.values():
        for rs in rss:
            for p in rs.nl_base:
                for f in (p.name,) + p.path:
                    base_fields.setdefault(f, set()).add(rs.name)
            for p in rs.nl_derived:
                derived_fields.setdefault(p.name, set()).add(rs.name)
    new_rulesets = {}
    for cname in classes:
        names: list[str] = []
        for anc in reversed(ancestry(cname)):
            names.extend(rs.name for rs in rulesets_by_class.get(anc, ()))
        new_rulesets[cname] = tuple(names)
    return _RuleIndex(base_fields, derived_by_class, derived_fields, new_rulesets)


def classify_update_sites(classes: dict[str, ClassDef], top: Block,
                          rulesets_by_class: dict[str, list[ResolvedRuleSet]],
                          globals_class: str) -> list[SiteReport]:
    idx = _build_rule_index(classes, rulesets_by_class)
    reports: list[SiteReport] = []
    any_rulesets = any(rulesets_by_class.values())

    def receiver_class(obj, ctx_class: str | None) -> str | None:
        if isinstance(obj, GvRef):
            return globals_class
        if isinstance(obj, SelfExpr):
            return ctx_class
        return None

    def provably_derived(cls_name: str | None, f: str) -> bool:
        return cls_name is not None and f in idx.derived_by_class.get(cls_name, ())

    def field_write(s, obj, f, ctx_class, kind):
        cls_name = receiver_class(obj, ctx_class)
        if provably_derived(cls_name, f):
            c, rsets = DERIVED_ERROR, tuple(sorted(idx.derived_fields.get(f, ())))
        elif f in idx.base_fields:
            c, rsets = BASE_OF_RULESETS, tuple(sorted(idx.base_fields[f]))
        elif f in idx.derived_fields:
            c, rsets = MAYBE_ALIASED, tuple(sorted(idx.derived_fields[f]))
        else:
            c, rsets = LOCAL_ONLY, ()
        _report(s, kind, f, c, rsets)

    def _report(s, kind, detail, c, rsets=()):
        line, col = (s.loc.line, s.loc.col) if s.loc else (None, None)
        reports.append(SiteReport(id(s), line, col, kind, detail, c, tuple(rsets)))

    def mutation(s, call, ctx_class):
        tgt = call.target
        if isinstance(tgt, FieldAccess):
            cls_name = receiver_class(tgt.obj, ctx_class)
            f = tgt.field
            if provably_derived(cls_name, f):
                _report(s, "mutate", f, DERIVED_ERROR,
                        sorted(idx.derived_fields.get(f, ())))
                return
            if f in idx.base_fields:
                _report(s, "mutate", f, BASE_OF_RULESETS,
                        sorted(idx.base_fields[f]))
                return
        # any other receiver may alias a base or derived set
        c = MAYBE_ALIASED if any_rulesets else LOCAL_ONLY
        _report(s, "mutate", call.name, c)

    def embedded_mutations(s: Stmt, ctx_class, skip_call=None):
        """Set mutations reached while evaluating s's expressions."""
        for node in walk(s):
            if node is skip_call:
                continue
            if isinstance(node, Call) and node.name in ("add", "del") \
                    and node.target is not None:
                mutation(s, node, ctx_class)

    def walk_stmt(s: Stmt, ctx_class: str | None):
        if isinstance(s, Assign):
            for t in s.targets:
                if isinstance(t, TField):
                    field_write(s, t.obj, t.field, ctx_class, "assign")
            embedded_mutations(s, ctx_class)
        elif isinstance(s, NewStmt):
            rsets = idx.new_rulesets.get(s.class_name, ())
            if rsets:
                _report(s, "new", s.class_name, BASE_OF_RULESETS, rsets)
            t = s.target
            if isinstance(t, TField):
                field_write(s, t.obj, t.field, ctx_class, "assign")
        elif isinstance(s, InferStmt):
            for t in s.targets:
                if isinstance(t, TField):
                    field_write(s, t.obj, t.field, ctx_class, "infer-target")
            embedded_mutations(s, ctx_class)
        elif isinstance(s, CallStmt):
            call = s.call
            if isinstance(call, Call) and call.name in ("add", "del") \
                    and call.target is not None:
                mutation(s, call, ctx_class)
                embedded_mutations(s, ctx_class, skip_call=call)
            else:
                embedded_mutations(s, ctx_class)
        elif isinstance(s, If):
            embedded_mutations_expr(s, s.cond, ctx_class)
            walk_block(s.then, ctx_class)
            walk_block(s.els, ctx_class)
        elif isinstance(s, While):
            embedded_mutations_expr(s, s.cond, ctx_class)
            walk_block(s.body, ctx_class)
        elif isinstance(s, For):
            embedded_mutations_expr(s, s.iter.source, ctx_class)
            walk_block(s.body, ctx_class)
        elif isinstance(s, (PrintStmt, Return)):
            embedded_mutations(s, ctx_class)
        elif isinstance(s, Skip):
            pass

    def embedded_mutations_expr(s, e, ctx_class):
        for node in walk(e):
            if isinstance(node, Call) and node.name in ("add", "del") \
                    and node.target is not None:
                mutation(s, node, ctx_class)

    def walk_block(b: Block, ctx_class: str | None):
        for s in b.stmts:
            walk_stmt(s, ctx_class)

    for cname, cls in classes.items():
        for m in cls.methods:
            walk_block(m.body, cname)
    walk_block(top, None)
    return reports
