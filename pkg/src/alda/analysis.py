"""Rule set analysis: predicate resolution and classification, dependency
strata.

A predicate position resolves to one of three roots: rule-set local,
a field chain on the bearing object (self), or a field chain on the
globals record.  Base predicates are those never concluded; derived
predicates are concluded by at least one rule.  Stratification is per
rule set, over the predicate dependency graph, and rejects negation
inside a recursive component.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .astnodes import PredicateRef, RArgVar, RawPred, Rule, RuleSet
from .errors import RuleError, StratificationError

# --------------------------------------------------------- resolution


def resolve_pred(p, global_names: frozenset[str], in_class: bool) -> PredicateRef:
    if isinstance(p, PredicateRef):
        return p
    assert isinstance(p, RawPred)
    if p.is_self:
        if not in_class:
            raise RuleError("self in a global rule set", *_lc(p))
        return PredicateRef("self", p.parts[0], tuple(p.parts[1:]), loc=p.loc)
    if len(p.parts) > 1:
        return PredicateRef("global", p.parts[0], tuple(p.parts[1:]), loc=p.loc)
    name = p.parts[0]
    if name in global_names:
        return PredicateRef("global", name, (), loc=p.loc)
    return PredicateRef("local", name, (), loc=p.loc)


def _lc(node):
    return (node.loc.line, node.loc.col) if node.loc else (None, None)


@dataclass
class ResolvedRuleSet:
    """One rule set with resolved predicates and its analysis results."""

    name: str               # unique name after lowering pass 1
    scope: str              # 'global' or the defining class name
    rules: tuple[Rule, ...]
    arities: dict[str, int] = field(default_factory=dict)
    base: list[PredicateRef] = field(default_factory=list)
    derived: list[PredicateRef] = field(default_factory=list)
    strata: list[frozenset[str]] = field(default_factory=list)

    @property
    def base_keys(self) -> set[str]:
        return {p.key() for p in self.base}

    @property
    def derived_keys(self) -> set[str]:
        return {p.key() for p in self.derived}

    @property
    def nl_base(self) -> list[PredicateRef]:
        return [p for p in self.base if not p.is_local()]

    @property
    def nl_derived(self) -> list[PredicateRef]:
        return [p for p in self.derived if not p.is_local()]

    @property
    def local_base(self) -> list[PredicateRef]:
        return [p for p in self.base if p.is_local()]


def resolve_ruleset(
    rs: RuleSet,
    global_names: frozenset[str] = frozenset(),
    in_class: bool = False,
    unique_name: str | None = None,
) -> ResolvedRuleSet:
    rules = []
    for rule in rs.rules:
        concl = _resolve_atom(rule.concl, global_names, in_class)
        cref = concl.pred
        if cref.path:
            raise RuleError(
                f"derived predicate {cref.key()} must be a single field or variable",
                *_lc(rule.concl),
            )
        if in_class and cref.root == "global":
            raise RuleError(
                f"global variable {cref.name} cannot be derived in a class rule set",
                *_lc(rule.concl),
            )
        hyps = tuple(
            type(h)(_resolve_atom(h.atom, global_names, in_class), h.positive, loc=h.loc)
            for h in rule.hyps
        )
        rules.append(Rule(concl, hyps, loc=rule.loc))
    out = ResolvedRuleSet(unique_name or rs.name, "class" if in_class else "global",
                          tuple(rules))
    _analyze(out)
    return out


_wild_counter = 0


def _resolve_atom(atom, global_names, in_class):
    pred = resolve_pred(atom.pred, global_names, in_class)
    args = atom.args
    if any(isinstance(a, RArgVar) and a.name == "_" for a in args):
        # every wildcard is its own variable; give each occurrence a
        # name no surface variable can carry
        global _wild_counter
        fixed = []
        for a in args:
            if isinstance(a, RArgVar) and a.name == "_":
                _wild_counter += 1
                fixed.append(RArgVar(f"_:{_wild_counter}", loc=a.loc))
            else:
                fixed.append(a)
        args = tuple(fixed)
    return type(atom)(pred, args, loc=atom.loc)


def _analyze(rs: ResolvedRuleSet):
    refs: dict[str, PredicateRef] = {}
    concluded: set[str] = set()
    for rule in rs.rules:
        for pred, nargs in _atoms_of(rule):
            key = pred.key()
            refs.setdefault(key, pred)
            old = rs.arities.get(key)
            if old is not None and old != nargs:
                raise RuleError(
                    f"predicate {key} used with arities {old} and {nargs}", *_lc(pred)
                )
            rs.arities[key] = nargs
        concluded.add(rule.concl.pred.key())
    rs.derived = [refs[k] for k in sorted(concluded)]
    rs.base = [refs[k] for k in sorted(refs) if k not in concluded]
    rs.strata = stratify(rs.rules)


def _atoms_of(rule: Rule):
    yield rule.concl.pred, len(rule.concl.args)
    for h in rule.hyps:
        yield h.atom.pred, len(h.atom.args)


@dataclass
class PredicateSets:
    base: list[PredicateRef]
    derived: list[PredicateRef]


def classify_predicates(rs) -> PredicateSets:
    rs = _as_resolved(rs)
    return PredicateSets(list(rs.base), list(rs.derived))


def _as_resolved(rs) -> ResolvedRuleSet:
    if isinstance(rs, ResolvedRuleSet):
        return rs
    return resolve_ruleset(rs)


# ------------------------------------------------------- dependencies


def _dep_edges(rules) -> tuple[set[str], set[tuple[str, str]], set[tuple[str, str]]]:
    """Nodes plus positive and negative edges (hypothesis -> conclusion)."""
    nodes: set[str] = set()
    pos: set[tuple[str, str]] = set()
    neg: set[tuple[str, str]] = set()
    for rule in rules:
        head = rule.concl.pred.key()
        nodes.add(head)
        for h in rule.hyps:
            dep = h.atom.pred.key()
            nodes.add(dep)
            (pos if h.positive else neg).add((dep, head))
    return nodes, pos, neg


def _sccs(nodes: set[str], edges: dict[str, list[str]]) -> list[list[str]]:
    """Tarjan, iteratively, in deterministic node order."""
    index: dict[str, int] = {}
    low: dict[str, int] = {}
    on_stack: set[str] = set()
    stack: list[str] = []
    out: list[list[str]] = []
    counter = 0
    for root in sorted(nodes):
        if root in index:
            continue
        work = [(root, iter(edges.get(root, ())))]
        index[root] = low[root] = counter
        counter += 1
        stack.append(root)
        on_stack.add(root)
        while work:
            v, it = work[-1]
            advanced = False
            for w in it:
                if w not in index:
                    index[w] = low[w] = counter
                    counter += 1
                    stack.append(w)
                    on_stack.add(w)
                    work.append((w, iter(edges.get(w, ()))))
                    advanced = True
                    break
                if w in on_stack:
                    low[v] = min(low[v], index[w])
            if advanced:
                continue
            work.pop()
            if work:
                parent = work[-1][0]
                low[parent] = min(low[parent], low[v])
            if low[v] == index[v]:
                comp = []
                while True:
                    w = stack.pop()
                    on_stack.discard(w)
                    comp.append(w)
                    if w == v:
                        break
                out.append(comp)
    return out


def stratify(rules) -> list[frozenset[str]]:
    """Assign every predicate a stratum; derived predicates may depend
    positively within a stratum, negatively only on lower strata."""
    rules = _rules_of(rules)
    nodes, pos, neg = _dep_edges(rules)
    return stratify_graph(nodes, pos, neg)


def stratify_graph(nodes: set[str], pos: set[tuple[str, str]],
                   neg: set[tuple[str, str]]) -> list[frozenset[str]]:
    """Strata from explicit dependency edges (source -> dependent)."""
    fwd: dict[str, list[str]] = {n: [] for n in nodes}
    for a, b in sorted(pos | neg):
        fwd[a].append(b)
    comps = _sccs(nodes, fwd)
    comp_of: dict[str, int] = {}
    for i, comp in enumerate(comps):
        for n in comp:
            comp_of[n] = i
    for a, b in neg:
        if comp_of[a] == comp_of[b]:
            raise StratificationError(
                f"negation of {a} inside a recursive component with {b}"
            )
    # Tarjan emits components in reverse topological order; longest-path
    # numbering over the condensation gives the strata.
    order = list(reversed(range(len(comps))))
    stratum = {i: 0 for i in range(len(comps))}
    in_edges: dict[int, list[tuple[int, bool]]] = {i: [] for i in range(len(comps))}
    for a, b in pos:
        ca, cb = comp_of[a], comp_of[b]
        if ca != cb:
            in_edges[cb].append((ca, False))
    for a, b in neg:
        in_edges[comp_of[b]].append((comp_of[a], True))
    for i in order:
        s = 0
        for src, negated in in_edges[i]:
            s = max(s, stratum[src] + (1 if negated else 0))
        stratum[i] = s
    n_strata = max(stratum.values(), default=0) + 1
    out = [set() for _ in range(n_strata)]
    for i, comp in enumerate(comps):
        out[stratum[i]].update(comp)
    return [frozenset(s) for s in out if s]


def _rules_of(rules):
    if isinstance(rules, ResolvedRuleSet):
        return rules.rules
    if isinstance(rules, RuleSet):
        return _as_resolved(rules).rules
    return tuple(rules)


def fully_depends(rs, given) -> set[str]:
    """Derived predicates all of whose reachable base dependencies are in
    `given` (keys).  Non-local bases are in the caller's hands: the
    runtime always counts them as given."""
    rs = _as_resolved(rs)
    given = set(given)
    deps: dict[str, set[str]] = {k: set() for k in rs.derived_keys}
    for rule in rs.rules:
        head = rule.concl.pred.key()
        for h in rule.hyps:
            deps[head].add(h.atom.pred.key())
    base_keys = rs.base_keys
    memo: dict[str, bool] = {}

    def ok(key: str, trail: frozenset[str]) -> bool:
        if key in base_keys:
            return key in given
        if key in memo:
            return memo[key]
        if key in trail:
            return True  # cycle through derived predicates only
        result = all(ok(d, trail | {key}) for d in deps.get(key, ()))
        memo[key] = result
        return result

    return {k for k in rs.derived_keys if ok(k, frozenset())}
