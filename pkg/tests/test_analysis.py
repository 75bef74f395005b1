"""Predicate resolution, stratification, dependency closure."""

import pytest

from alda.analysis import (
    classify_predicates,
    fully_depends,
    resolve_pred,
    resolve_ruleset,
    stratify,
    stratify_graph,
)
from alda.astnodes import RArgVar, RawPred, RuleSet
from alda.errors import RuleError, StratificationError
from alda.parser import parse_program


def ruleset(src: str) -> RuleSet:
    prog = parse_program(src)
    if prog.rulesets:
        return prog.rulesets[0]
    for cls in prog.classes:
        if cls.rulesets:
            return cls.rulesets[0]
    raise AssertionError("no rule set in source")


TC = "rules tr:\n  path(x, y) if edge(x, y)\n  path(x, y) if edge(x, z), path(z, y)\n"


def test_resolve_pred_roots():
    g = frozenset({"S"})
    assert resolve_pred(RawPred(False, ("p",)), g, False).root == "local"
    assert resolve_pred(RawPred(False, ("S",)), g, False).root == "global"
    r = resolve_pred(RawPred(False, ("obj", "f")), g, False)
    assert (r.root, r.name, r.path) == ("global", "obj", ("f",))
    r = resolve_pred(RawPred(True, ("f", "g")), g, True)
    assert (r.root, r.name, r.path) == ("self", "f", ("g",))
    assert r.key() == "self.f.g"


def test_self_outside_class_rejected():
    with pytest.raises(RuleError):
        resolve_pred(RawPred(True, ("f",)), frozenset(), False)


def test_classify_base_and_derived():
    rs = resolve_ruleset(ruleset(TC))
    assert rs.base_keys == {"edge"}
    assert rs.derived_keys == {"path"}
    assert rs.arities == {"edge": 2, "path": 2}
    ps = classify_predicates(ruleset(TC))
    assert [p.key() for p in ps.base] == ["edge"]
    assert [p.key() for p in ps.derived] == ["path"]


def test_local_vs_global_split():
    rs = resolve_ruleset(ruleset(TC), global_names=frozenset({"edge"}))
    assert [p.key() for p in rs.nl_base] == ["edge"]
    assert rs.local_base == []
    assert [p.key() for p in rs.derived] == ["path"]


def test_wildcards_get_fresh_names():
    src = "rules r:\n  p(x) if q(x, _), q(_, x)\n"
    rs = resolve_ruleset(ruleset(src))
    wilds = [
        a.name
        for rule in rs.rules
        for h in rule.hyps
        for a in h.atom.args
        if isinstance(a, RArgVar) and a.name.startswith("_")
    ]
    assert len(wilds) == 2 and len(set(wilds)) == 2


def in_class(rules_src: str) -> RuleSet:
    indented = "".join("  " + ln + "\n" for ln in rules_src.splitlines())
    return ruleset("class C:\n" + indented)


def test_derived_field_chain_rejected():
    src = "rules r:\n  self.a.b(x) if self.p(x)\n"
    with pytest.raises(RuleError):
        resolve_ruleset(in_class(src), in_class=True)


def test_class_rule_cannot_conclude_global():
    src = "rules r:\n  g(x) if self.p(x)\n"
    with pytest.raises(RuleError):
        resolve_ruleset(in_class(src), global_names=frozenset({"g"}), in_class=True)


def test_arity_mismatch_between_self_and_local_is_fine():
    # self.p and p are different predicates; arities are tracked per key
    src = "rules r:\n  self.q(x) if self.p(x, x), p(x)\n"
    rs = resolve_ruleset(in_class(src), in_class=True)
    assert rs.arities["self.p"] == 2
    assert rs.arities["p"] == 1


def test_stratify_recursion_single_stratum():
    rs = resolve_ruleset(ruleset(TC))
    assert rs.strata == [frozenset({"edge", "path"})]


def test_stratify_negation_pushes_layer():
    src = (
        "rules r:\n"
        "  reach(y) if reach(x), edge(x, y)\n"
        "  reach(x) if start(x)\n"
        "  dead(x) if node(x), not reach(x)\n"
    )
    strata = stratify(resolve_ruleset(ruleset(src)).rules)
    assert len(strata) == 2
    assert "reach" in strata[0] and "dead" in strata[1]
    # bases sit at the lowest layer they are needed
    assert {"edge", "start", "node"} <= strata[0] | strata[1]


def test_unstratifiable_negative_cycle():
    src = "rules r:\n  p(x) if q(x), not w(x)\n  w(x) if p(x)\n"
    with pytest.raises(StratificationError):
        resolve_ruleset(ruleset(src))


def test_negative_self_loop():
    with pytest.raises(StratificationError):
        stratify_graph({"p"}, set(), {("p", "p")})


def test_stratify_graph_chain():
    nodes = {"a", "b", "c"}
    strata = stratify_graph(nodes, {("a", "b")}, {("b", "c")})
    assert strata == [frozenset({"a", "b"}), frozenset({"c"})]


def test_fully_depends():
    rs = resolve_ruleset(ruleset(TC))
    assert fully_depends(rs, {"edge"}) == {"path"}
    assert fully_depends(rs, set()) == set()


def test_fully_depends_partial_cover():
    src = (
        "rules r:\n"
        "  p(x) if a(x)\n"
        "  q(x) if b(x)\n"
        "  both(x) if p(x), q(x)\n"
    )
    rs = resolve_ruleset(ruleset(src))
    assert fully_depends(rs, {"a"}) == {"p"}
    assert fully_depends(rs, {"a", "b"}) == {"p", "q", "both"}


def test_fully_depends_cycle_counts_as_covered():
    # mutual recursion over one given base
    src = "rules r:\n  p(x) if q(x)\n  q(x) if p(x)\n  q(x) if b(x)\n"
    rs = resolve_ruleset(ruleset(src))
    assert fully_depends(rs, {"b"}) == {"p", "q"}
