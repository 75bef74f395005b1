"""Canonical forms, value ordering, and scalar rendering."""

import pytest
from hypothesis import given
from hypothesis import strategies as st

from alda.heap import elements_to_facts, facts_to_elements
from alda.values import (
    Addr,
    canon,
    is_value,
    render_scalar,
    sort_key,
    structural_equal,
    uncanon,
)

scalars = st.one_of(
    st.none(),
    st.booleans(),
    st.integers(min_value=-(2**63), max_value=2**63 - 1),
    st.text(max_size=8),
)

values = st.recursive(
    scalars | st.builds(Addr, st.integers(min_value=0, max_value=50)),
    lambda inner: st.tuples() | st.tuples(inner) | st.tuples(inner, inner) | st.tuples(inner, inner, inner),
    max_leaves=12,
)


def test_bool_does_not_collide_with_int():
    # Python itself says True == 1; canonical forms must not.
    assert canon(True) != canon(1)
    assert canon(False) != canon(0)
    assert len({canon(v) for v in (True, 1, False, 0)}) == 4


def test_tuple_tag_does_not_collide_with_value_tuples():
    # A value that happens to look like a tag must stay distinct from the
    # tagged form of another value.
    assert canon(("b", True)) != canon(True)
    assert canon(("t", 1)) != canon((1,))


@given(values)
def test_uncanon_inverts_canon(v):
    assert uncanon(canon(v)) == v or structural_equal(uncanon(canon(v)), v)


@given(values, values)
def test_structural_equal_matches_canon(a, b):
    assert structural_equal(a, b) == (canon(a) == canon(b))


def test_addr_identity():
    assert Addr(3) == Addr(3)
    assert Addr(3) != Addr(4)
    assert hash(Addr(3)) == hash(Addr(3))
    assert Addr(3) != 3


def test_is_value():
    assert is_value((1, ("a", None), True, Addr(0)))
    assert not is_value([1])
    assert not is_value({1})
    assert not is_value(1.5)
    assert not is_value((1, [2]))


@given(values, values)
def test_sort_key_total_and_consistent(a, b):
    ka, kb = sort_key(a), sort_key(b)
    # comparable both ways, and ties exactly when canonically equal
    assert (ka < kb) or (kb < ka) or (ka == kb)
    if canon(a) == canon(b):
        assert ka == kb
    else:
        assert ka != kb


def test_sort_order_between_kinds():
    ordered = [None, False, True, -2, 0, 5, "a", "b", (1,), (1, 2), Addr(0)]
    assert sorted(ordered, key=sort_key) == ordered


def test_tuples_sort_by_length_first():
    assert sort_key((9,)) < sort_key((1, 1))


def test_render_scalar():
    assert render_scalar(None) == "None"
    assert render_scalar(True) == "True"
    assert render_scalar(-7) == "-7"
    assert render_scalar("hi") == "'hi'"
    assert render_scalar((1, "a")) == "(1, 'a')"
    assert render_scalar((1,)) == "(1,)"


def test_render_scalar_escapes():
    assert render_scalar("a'b") == r"'a\'b'"
    assert render_scalar("a\\b") == r"'a\\b'"
    assert render_scalar("a\nb") == r"'a\nb'"


def test_render_scalar_rejects_addr():
    with pytest.raises(TypeError):
        render_scalar(Addr(0))


def test_facts_elements_round_trip_binary():
    rows = {(1, 2), (canon(True), 3)}
    elems = facts_to_elements(rows, 2)
    assert set(map(canon, elems)) == {canon((1, 2)), canon((True, 3))}
    assert elements_to_facts(elems, 2) == rows


def test_facts_elements_round_trip_unary():
    rows = {(canon("x"),), (canon(False),)}
    elems = facts_to_elements(rows, 1)
    assert elements_to_facts(elems, 1) == rows


def test_elements_to_facts_skips_shapeless():
    # scalars and wrong-length tuples witness nothing at arity 2
    assert elements_to_facts([1, (1, 2, 3), (4, 5)], 2) == {(4, 5)}


def test_elements_to_facts_nullary():
    assert elements_to_facts([(), 1], 0) == {()}
    assert elements_to_facts([1], 0) == set()
