"""Fact stores and the fact file format."""

import pytest

from alda.errors import ArityError, FormatError, MixedPredicateError
from alda.facts import FactStore, load_fact_file, parse_fact_line
from alda.values import canon


def test_parse_fact_line():
    assert parse_fact_line("edge(1, 2).", 1) == ("edge", (1, 2))
    assert parse_fact_line("p('a').", 1) == ("p", ("a",))
    assert parse_fact_line("  q ( -3 , 'x,y' ) .  ".strip(), 1) == ("q", (-3, "x,y"))
    assert parse_fact_line("zero().", 1) == ("zero", ())


def test_parse_fact_line_rejects_garbage():
    for bad in ("edge(1, 2)", "edge 1 2.", "(1).", "edge(1.5).", "edge('a).",
                "edge(x)."):
        with pytest.raises(FormatError):
            parse_fact_line(bad, 7)
    try:
        parse_fact_line("nope", 42)
    except FormatError as e:
        assert e.line == 42


def test_load_fact_file_unary_scalars(tmp_path):
    p = tmp_path / "u.facts"
    p.write_text("# a comment\np(1).\np('two').  # trailing\n\np(-3).\n")
    assert load_fact_file(str(p)) == {1, "two", -3}


def test_load_fact_file_tuples(tmp_path):
    p = tmp_path / "e.facts"
    p.write_text("edge(1, 2).\nedge(2, 3).\n")
    assert load_fact_file(str(p)) == {(1, 2), (2, 3)}


def test_load_fact_file_mixed_predicates(tmp_path):
    p = tmp_path / "m.facts"
    p.write_text("p(1).\nq(2).\n")
    with pytest.raises(MixedPredicateError) as ei:
        load_fact_file(str(p))
    assert ei.value.line == 2


def test_load_fact_file_bad_line_number(tmp_path):
    p = tmp_path / "b.facts"
    p.write_text("p(1).\np(1.5).\n")
    with pytest.raises(FormatError) as ei:
        load_fact_file(str(p))
    assert ei.value.line == 2


def test_fact_store_rows_and_tuples():
    fs = FactStore()
    fs.add_fact("p", (True, 1))
    fs.add_fact("p", (0, "a"))
    assert fs.rows("p") == {(canon(True), 1), (0, "a")}
    assert fs.tuples("p") == {(True, 1), (0, "a")}
    assert fs.has("p") and not fs.has("q")
    assert fs.rows("q") == set()


def test_fact_store_arity_clash():
    fs = FactStore()
    fs.add_row("p", (1,))
    with pytest.raises(ArityError):
        fs.add_row("p", (1, 2))
    with pytest.raises(ArityError):
        fs.declare("p", 3)


def test_fact_store_declare_registers_empty():
    fs = FactStore()
    fs.declare("p", 2)
    assert fs.has("p")
    assert fs.rows("p") == set()


def test_fact_store_copy_is_deep_enough():
    fs = FactStore({"p": {(1,)}})
    cp = fs.copy()
    cp.add_row("p", (2,))
    assert fs.rows("p") == {(1,)}
    assert cp.rows("p") == {(1,), (2,)}
    assert fs != cp
    assert fs == FactStore({"p": {(1,)}})
