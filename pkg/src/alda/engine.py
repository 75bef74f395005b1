"""Bottom-up rule evaluation.

Rules are compiled to a flat form over string predicate keys and rows
of canonical values.  Evaluation is stratified semi-naive: each
stratum runs delta iteration, designating one same-stratum positive
literal per rule occurrence as the delta source, with hash indexes
built on demand per (predicate, bound-positions) signature.  Negated
literals always refer to lower strata and are applied as filters once
their arguments are bound.
"""

from __future__ import annotations

from dataclasses import dataclass

from .analysis import ResolvedRuleSet, stratify_graph
from .astnodes import RArgConst, RArgVar
from .errors import ArityError, NotABasePredicate, UndefinedPredicate
from .values import canon

Row = tuple
Extension = dict  # str key -> set of Row


@dataclass(frozen=True)
class Var:
    name: str


@dataclass(frozen=True)
class Literal:
    key: str
    args: tuple
    positive: bool = True


@dataclass(frozen=True)
class EngineRule:
    head_key: str
    head_args: tuple
    body: tuple[Literal, ...]


def compile_rules(rs) -> tuple[EngineRule, ...]:
    """Flatten resolved rules (or a ResolvedRuleSet) to EngineRules."""
    rules = rs.rules if isinstance(rs, ResolvedRuleSet) else rs
    out = []
    for rule in rules:
        head = rule.concl
        body = tuple(
            Literal(h.atom.pred.key(), _args(h.atom.args), h.positive)
            for h in rule.hyps
        )
        out.append(EngineRule(head.pred.key(), _args(head.args), body))
    return tuple(out)


def _args(args):
    return tuple(
        Var(a.name) if isinstance(a, RArgVar) else canon(a.value) for a in args
    )


def _rule_strata(rules) -> list[frozenset[str]]:
    nodes: set[str] = set()
    pos: set[tuple[str, str]] = set()
    neg: set[tuple[str, str]] = set()
    for r in rules:
        nodes.add(r.head_key)
        for lit in r.body:
            nodes.add(lit.key)
            (pos if lit.positive else neg).add((lit.key, r.head_key))
    return stratify_graph(nodes, pos, neg)


class _Evaluator:
    def __init__(self, model: Extension):
        self.model = model
        self.indexes: dict[tuple, dict] = {}
        self.masks: dict[str, list[tuple]] = {}

    def add(self, key: str, row: Row) -> bool:
        rows = self.model[key]
        if row in rows:
            return False
        rows.add(row)
        for mask in self.masks.get(key, ()):
            k = tuple(row[i] for i in mask)
            self.indexes[(key, mask)].setdefault(k, []).append(row)
        return True

    def rows(self, key: str, bound: dict[int, object]):
        if not bound:
            return self.model[key]
        mask = tuple(sorted(bound))
        ik = (key, mask)
        if ik not in self.indexes:
            d: dict = {}
            for row in self.model[key]:
                d.setdefault(tuple(row[i] for i in mask), []).append(row)
            self.indexes[ik] = d
            self.masks.setdefault(key, []).append(mask)
        return self.indexes[ik].get(tuple(bound[i] for i in sorted(bound)), ())

    # -- one rule, one delta designation ------------------------------

    def eval_rule(self, rule: EngineRule, delta_idx: int | None,
                  delta_rows) -> list[Row]:
        positives = [l for l in rule.body if l.positive]
        negatives = [l for l in rule.body if not l.positive]
        order = _join_order(positives, delta_idx)
        out: list[Row] = []

        def emit(sub):
            for neg in negatives:
                row = tuple(
                    sub[a.name] if isinstance(a, Var) else a for a in neg.args
                )
                if row in self.model[neg.key]:
                    return
            out.append(tuple(
                sub[a.name] if isinstance(a, Var) else a
                for a in rule.head_args
            ))

        def step(k: int, sub: dict):
            if k == len(order):
                emit(sub)
                return
            i = order[k]
            lit = positives[i]
            if i == delta_idx:
                candidates = delta_rows
                bound = None
            else:
                bound = {}
                for j, a in enumerate(lit.args):
                    if isinstance(a, Var):
                        if a.name in sub:
                            bound[j] = sub[a.name]
                    else:
                        bound[j] = a
                candidates = self.rows(lit.key, bound)
            for row in candidates:
                if len(row) != len(lit.args):
                    continue
                sub2 = _bind(lit.args, row, sub)
                if sub2 is not None:
                    step(k + 1, sub2)

        step(0, {})
        return out

    # -- one stratum ---------------------------------------------------

    def eval_stratum(self, rules, stratum: frozenset[str]):
        delta: dict[str, set] = {p: set() for p in stratum}
        for rule in rules:
            for row in self.eval_rule(rule, None, None):
                if self.add(rule.head_key, row):
                    delta[rule.head_key].add(row)
        while any(delta.values()):
            nxt: dict[str, set] = {p: set() for p in stratum}
            for rule in rules:
                positives = [l for l in rule.body if l.positive]
                for i, lit in enumerate(positives):
                    if lit.key not in stratum:
                        continue
                    d = delta.get(lit.key)
                    if not d:
                        continue
                    for row in self.eval_rule(rule, i, d):
                        if self.add(rule.head_key, row):
                            nxt[rule.head_key].add(row)
            delta = nxt


def _bind(args, row, sub):
    out = None
    for a, v in zip(args, row):
        if isinstance(a, Var):
            src = sub if out is None else out
            if a.name in src:
                if src[a.name] != v:
                    return None
            else:
                if out is None:
                    out = dict(sub)
                out[a.name] = v
        elif a != v:
            return None
    return sub if out is None else out


def _join_order(positives, delta_idx):
    """Static join order: the delta literal first, then greedily the
    literal with the most arguments bound by what came before."""
    n = len(positives)
    remaining = set(range(n))
    order: list[int] = []
    bound_vars: set[str] = set()

    def take(i):
        order.append(i)
        remaining.discard(i)
        for a in positives[i].args:
            if isinstance(a, Var):
                bound_vars.add(a.name)

    if delta_idx is not None:
        take(delta_idx)
    while remaining:
        best = None
        best_score = (-1, 0)
        for i in sorted(remaining):
            score = 0
            for a in positives[i].args:
                if not isinstance(a, Var) or a.name in bound_vars:
                    score += 1
            # prefer more bound positions, then fewer free ones
            s = (score, -len(positives[i].args))
            if s > best_score:
                best_score = s
                best = i
        take(best)
    return order


def eval_rules(rules, facts: Extension) -> Extension:
    """Least stratified model: the base facts plus every derived
    predicate's extension (empty sets included).

    facts maps predicate keys to sets of canonical rows.  Facts for a
    predicate some rule concludes are rejected.
    """
    rules = tuple(rules)
    heads = {r.head_key for r in rules}
    arities: dict[str, int] = {}
    for r in rules:
        for key, nargs in [(r.head_key, len(r.head_args))] + [
            (l.key, len(l.args)) for l in r.body
        ]:
            old = arities.setdefault(key, nargs)
            if old != nargs:
                raise ArityError(
                    f"predicate {key} used with arities {old} and {nargs}"
                )
    model: Extension = {}
    for key, rows in facts.items():
        if key in heads:
            raise NotABasePredicate(
                f"facts supplied for derived predicate {key}"
            )
        want = arities.get(key)
        for row in rows:
            if want is not None and len(row) != want:
                raise ArityError(
                    f"fact for {key} has {len(row)} components, rules use {want}"
                )
        model[key] = set(rows)
    for key in arities:
        model.setdefault(key, set())

    ev = _Evaluator(model)
    by_head: dict[str, list[EngineRule]] = {}
    for r in rules:
        by_head.setdefault(r.head_key, []).append(r)
    for stratum in _rule_strata(rules):
        stratum_rules = [r for p in sorted(stratum) for r in by_head.get(p, ())]
        if stratum_rules:
            ev.eval_stratum(stratum_rules, stratum)
    return model


# ------------------------------------------------------------ queries

# Query argument items: ('var', name) | ('const', canonical) | ('wild',)


def match_tuple(args, row):
    """Match one pattern against one row; the variable environment on
    success, None otherwise."""
    if len(args) != len(row):
        return None
    env: dict[str, object] = {}
    for a, v in zip(args, row):
        tag = a[0]
        if tag == "const":
            if a[1] != v:
                return None
        elif tag == "var":
            if a[1] in env:
                if env[a[1]] != v:
                    return None
            else:
                env[a[1]] = v
    return env


def query_vars(args) -> list[str]:
    names: list[str] = []
    for a in args:
        if a[0] == "var" and a[1] not in names:
            names.append(a[1])
    return names


def answer_query(facts: Extension, key: str, args=None) -> set:
    """Extension of a query against computed facts.

    args=None is the bare form: the full extension.  Otherwise the
    result holds one tuple of variable values (first-occurrence order)
    per matching row.
    """
    if key not in facts:
        raise UndefinedPredicate(f"query of undefined predicate {key}")
    rows = facts[key]
    if args is None:
        return set(rows)
    names = query_vars(args)
    out = set()
    for row in rows:
        env = match_tuple(args, row)
        if env is not None:
            out.add(tuple(env[n] for n in names))
    return out
