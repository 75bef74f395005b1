"""The bottom-up engine against hand values and the textbook oracles."""

import random

import pytest

from alda.analysis import resolve_ruleset
from alda.engine import (
    EngineRule,
    Literal,
    Var,
    answer_query,
    compile_rules,
    eval_rules,
    match_tuple,
    query_vars,
)
from alda.errors import ArityError, NotABasePredicate, StratificationError, UndefinedPredicate
from alda.parser import parse_program
from alda.values import canon

from oracles import brute_stratified, floyd_warshall, naive_eval
from rulegen import model_of, random_positive_instance, random_stratified_instance

TC_RULES = (
    EngineRule("path", (Var("x"), Var("y")),
               (Literal("edge", (Var("x"), Var("y"))),)),
    EngineRule("path", (Var("x"), Var("y")),
               (Literal("edge", (Var("x"), Var("z"))),
                Literal("path", (Var("z"), Var("y"))))),
)


def test_tc_tiny_chain():
    model = eval_rules(TC_RULES, {"edge": {(1, 2), (2, 3)}})
    assert model["path"] == {(1, 2), (2, 3), (1, 3)}
    assert model["edge"] == {(1, 2), (2, 3)}


def test_tc_cycle():
    model = eval_rules(TC_RULES, {"edge": {(1, 2), (2, 1)}})
    assert model["path"] == {(1, 1), (1, 2), (2, 1), (2, 2)}


def test_tc_matches_floyd_warshall_random():
    rng = random.Random(4)
    for _ in range(25):
        n = rng.randint(1, 20)
        nodes = range(n)
        edges = {
            (a, b)
            for a in nodes
            for b in nodes
            if rng.random() < 0.15
        }
        model = eval_rules(TC_RULES, {"edge": edges})
        assert model["path"] == floyd_warshall(nodes, edges)


def test_derived_with_no_support_is_empty():
    model = eval_rules(TC_RULES, {"edge": set()})
    assert model["path"] == set()


def test_constants_in_rules():
    rules = (
        EngineRule("near", (Var("x"),),
                   (Literal("edge", (1, Var("x"))),)),
    )
    model = eval_rules(rules, {"edge": {(1, 2), (2, 3), (1, 4)}})
    assert model["near"] == {(2,), (4,)}


def test_constant_head_component():
    rules = (
        EngineRule("tag", (Var("x"), "seen"),
                   (Literal("p", (Var("x"),)),)),
    )
    model = eval_rules(rules, {"p": {(1,), (2,)}})
    assert model["tag"] == {(1, "seen"), (2, "seen")}


def test_negation_basic():
    rules = (
        EngineRule("reach", (Var("y"),),
                   (Literal("start", (Var("x"),)),
                    Literal("edge", (Var("x"), Var("y"))))),
        EngineRule("reach", (Var("y"),),
                   (Literal("reach", (Var("x"),)),
                    Literal("edge", (Var("x"), Var("y"))))),
        EngineRule("dead", (Var("x"),),
                   (Literal("node", (Var("x"),)),
                    Literal("reach", (Var("x"),), False))),
    )
    facts = {
        "node": {(1,), (2,), (3,), (4,)},
        "start": {(1,)},
        "edge": {(1, 2), (2, 3)},
    }
    model = eval_rules(rules, facts)
    assert model["reach"] == {(2,), (3,)}
    assert model["dead"] == {(1,), (4,)}


def test_unstratifiable_rejected():
    rules = (
        EngineRule("p", (Var("x"),),
                   (Literal("b", (Var("x"),)),
                    Literal("q", (Var("x"),), False))),
        EngineRule("q", (Var("x"),), (Literal("p", (Var("x"),)),)),
    )
    with pytest.raises(StratificationError):
        eval_rules(rules, {"b": {(1,)}})


def test_facts_for_head_rejected():
    with pytest.raises(NotABasePredicate):
        eval_rules(TC_RULES, {"edge": set(), "path": {(1, 2)}})


def test_rule_arity_clash_rejected():
    rules = TC_RULES + (
        EngineRule("path", (Var("x"),), (Literal("edge", (Var("x"), Var("y"))),)),
    )
    with pytest.raises(ArityError):
        eval_rules(rules, {"edge": set()})


def test_fact_arity_clash_rejected():
    with pytest.raises(ArityError):
        eval_rules(TC_RULES, {"edge": {(1, 2, 3)}})


def test_bool_and_int_rows_stay_apart():
    rules = (
        EngineRule("q", (Var("x"),), (Literal("p", (Var("x"),)),)),
    )
    model = eval_rules(rules, {"p": {(canon(True),), (1,)}})
    assert model["q"] == {(canon(True),), (1,)}
    assert len(model["q"]) == 2


def test_compile_rules_from_resolved_ruleset():
    src = "rules tr:\n  path(x, y) if edge(x, y)\n  path(x, y) if edge(x, z), path(z, y)\n"
    rs = resolve_ruleset(parse_program(src).rulesets[0])
    compiled = compile_rules(rs)
    assert {r.head_key for r in compiled} == {"path"}
    model = eval_rules(compiled, {"edge": {(1, 2), (2, 3)}})
    assert model["path"] == {(1, 2), (2, 3), (1, 3)}


def test_compile_rules_canonicalizes_constants():
    src = "rules r:\n  q(x) if p(x, 'a')\n"
    rs = resolve_ruleset(parse_program(src).rulesets[0])
    (rule,) = compile_rules(rs)
    assert rule.body[0].args[1] == canon("a")


# ------------------------------------------------- differential checks


def test_seminaive_matches_naive_oracle():
    rng = random.Random(11)
    for i in range(120):
        inst = random_positive_instance(rng)
        got = model_of(inst, eval_rules(inst.engine_rules, inst.facts))
        want = model_of(inst, naive_eval(inst.oracle_rules, inst.facts))
        assert got == want, f"instance {i} diverged"


def test_stratified_matches_grounding_oracle():
    rng = random.Random(23)
    for i in range(60):
        inst = random_stratified_instance(rng)
        got = model_of(inst, eval_rules(inst.engine_rules, inst.facts))
        want = model_of(
            inst, brute_stratified(inst.oracle_rules, inst.facts, inst.domain)
        )
        assert got == want, f"instance {i} diverged"


# ------------------------------------------------------------- queries


def test_answer_query_bare():
    facts = {"p": {(1, 2), (3, 4)}}
    assert answer_query(facts, "p") == {(1, 2), (3, 4)}


def test_answer_query_projection_order():
    facts = {"p": {(1, 2), (3, 4)}}
    got = answer_query(facts, "p", (("var", "b"), ("var", "a")))
    # first occurrence order (b, then a), not alphabetical (a, then b)
    assert got == {(1, 2), (3, 4)}
    got = answer_query(facts, "p", (("wild",), ("var", "a")))
    assert got == {(2,), (4,)}


def test_answer_query_repeated_var():
    facts = {"p": {(1, 1), (1, 2)}}
    assert answer_query(facts, "p", (("var", "x"), ("var", "x"))) == {(1,)}


def test_answer_query_const_and_wild():
    facts = {"p": {(1, 2, 5), (1, 3, 6), (2, 3, 7)}}
    got = answer_query(facts, "p", (("const", 1), ("var", "y"), ("wild",)))
    assert got == {(2,), (3,)}


def test_answer_query_no_vars_yields_unit():
    facts = {"p": {(1,), (2,)}}
    assert answer_query(facts, "p", (("const", 1),)) == {()}
    assert answer_query(facts, "p", (("const", 9),)) == set()


def test_answer_query_undefined():
    with pytest.raises(UndefinedPredicate):
        answer_query({}, "nope")


def test_match_tuple_and_query_vars():
    args = (("var", "x"), ("const", 2), ("var", "x"), ("wild",))
    assert query_vars(args) == ["x"]
    assert match_tuple(args, (1, 2, 1, 9)) == {"x": 1}
    assert match_tuple(args, (1, 2, 3, 9)) is None
    assert match_tuple(args, (1, 2, 1)) is None
