"""Sugar constructs against hand-written kernel equivalents.

Each case runs two programs: the sugared one and a spelled-out kernel
version, then compares final heaps modulo address renaming.  Globals
whose names start with '_' are scratch space (the lowerer's fresh temps
use that prefix, and the hand-written kernels adopt it) and are left
out of the comparison.
"""

import io

from alda.runtime import run_text
from alda.values import Addr, canon, sort_key


def heap_signature(interp):
    """The globals record rendered as a nested tuple, with addresses
    replaced by DFS discovery ids so two heaps compare equal exactly
    when they differ only by address renaming."""
    ids: dict[Addr, int] = {}
    h = interp.heap

    def sig(v):
        if not isinstance(v, Addr):
            return ("v", canon(v))
        if v in ids:
            return ("ref", ids[v])
        ids[v] = me = len(ids)
        if h.is_set(v):
            elems = sorted(h.set_elements(v), key=sort_key)
            return ("set", me, tuple(sig(x) for x in elems))
        if h.is_seq(v):
            return ("seq", me, tuple(sig(x) for x in h.obj(v).items))
        fields = h.obj(v).fields
        return ("rec", me, h.type_of(v),
                tuple((k, sig(fields[k])) for k in sorted(fields)))

    gv = h.obj(interp.a_gv).fields
    names = sorted(k for k in gv if not k.startswith("_"))
    return tuple((k, sig(gv[k])) for k in names)


def equivalent(sugar: str, kernel: str):
    out_a, out_b = io.StringIO(), io.StringIO()
    a = run_text(sugar, out=out_a)
    b = run_text(kernel, out=out_b)
    assert heap_signature(a) == heap_signature(b)
    assert out_a.getvalue() == out_b.getvalue()


# ----------------------------------------------------------------- ifSome


def test_ifsome_witness_found():
    equivalent(
        """
S := {4, 1, 9, 2}
Hi := {4, 9}
r := 0
ifSome x in S | x in Hi:
  r := x + 10
""",
        """
S := {4, 1, 9, 2}
Hi := {4, 9}
r := 0
_f := False
for _x in S:
  if not _f:
    if _x in Hi:
      x := _x
      _f := True
if _f:
  r := x + 10
""",
    )


def test_ifsome_no_witness_skips_body():
    equivalent(
        """
S := {1, 2}
r := 'unset'
ifSome x in S | x is 99:
  r := x
""",
        """
S := {1, 2}
r := 'unset'
_f := False
for _x in S:
  if not _f:
    if _x is 99:
      x := _x
      _f := True
if _f:
  r := x
""",
    )


def test_ifsome_two_iterators():
    equivalent(
        """
A := {1, 2}
B := {2, 3}
hit := False
ifSome x in A, y in B | x is y:
  hit := True
  w := (x, y)
""",
        """
A := {1, 2}
B := {2, 3}
hit := False
_f := False
for _x in A:
  for _y in B:
    if not _f:
      if _x is _y:
        x := _x
        y := _y
        _f := True
if _f:
  hit := True
  w := (x, y)
""",
    )


# --------------------------------------------------------------- whileSome


def test_whilesome_drains_a_set():
    equivalent(
        """
W := {3, 1, 2}
done := {}
whileSome x in W:
  W.del(x)
  done.add(x + 100)
""",
        """
W := {3, 1, 2}
done := {}
_f := True
while _f:
  _f := False
  for _x in W:
    if not _f:
      x := _x
      _f := True
  if _f:
    W.del(x)
    done.add(x + 100)
""",
    )


def test_whilesome_worklist_closure():
    # forward reachability by worklist, sugar vs spelled out
    equivalent(
        """
E := {(1, 2), (2, 3), (2, 4), (5, 1)}
R := {1}
whileSome (x, y) in E | x in R and (not (y in R)):
  R.add(y)
""",
        """
E := {(1, 2), (2, 3), (2, 4), (5, 1)}
R := {1}
_f := True
while _f:
  _f := False
  for _e in E:
    if not _f:
      if isTuple(_e):
        if len(_e) is 2:
          if select(_e, 1) in R:
            if not (select(_e, 2) in R):
              x := select(_e, 1)
              y := select(_e, 2)
              _f := True
  if _f:
    R.add(y)
""",
    )


# ----------------------------------------------------------- comprehension


def test_comprehension_map_filter():
    equivalent(
        """
S := {1, 2, 3, 4}
r := {x + 1: x in S | not (x is 1)}
""",
        """
S := {1, 2, 3, 4}
_t := {}
for x in S:
  if not (x is 1):
    _t.add(x + 1)
r := _t
""",
    )


def test_comprehension_two_iterators_pairs():
    equivalent(
        """
A := {1, 2}
B := {'u', 'v'}
r := {(x, y): x in A, y in B}
""",
        """
A := {1, 2}
B := {'u', 'v'}
_t := {}
for x in A:
  for y in B:
    _t.add((x, y))
r := _t
""",
    )


def test_comprehension_tuple_pattern_source():
    equivalent(
        """
E := {(1, 'a'), (2, 'b'), (3, 'a')}
r := {k: (k, v) in E | v is 'a'}
""",
        """
E := {(1, 'a'), (2, 'b'), (3, 'a')}
_t := {}
for _e in E:
  if isTuple(_e):
    if len(_e) is 2:
      if select(_e, 2) is 'a':
        _t.add(select(_e, 1))
r := _t
""",
    )


# ---------------------------------------------------------------- each/and


def test_each_is_negated_some():
    equivalent(
        """
S := {2, 4, 6}
T := {1, 4}
P := {2, 4, 6}
Q := {4}
a := each x in S | x in P
b := each x in T | x in Q
""",
        """
S := {2, 4, 6}
T := {1, 4}
P := {2, 4, 6}
Q := {4}
a := not (some x in S | not (x in P))
b := not (some x in T | not (x in Q))
""",
    )


def test_and_is_demorgan_or():
    equivalent(
        """
p := True
q := False
a := p and p
b := p and q
c := q and ('a' is 'a')
""",
        """
p := True
q := False
a := not ((not p) or (not p))
b := not ((not p) or (not q))
c := not ((not q) or (not ('a' is 'a')))
""",
    )


def test_each_over_empty_set_is_true():
    equivalent(
        "S := {}\nr := each x in S | x is 99\n",
        "S := {}\nr := not (some x in S | not (x is 99))\n",
    )


# ------------------------------------------------- tuple-pattern for / some


def test_for_tuple_pattern():
    equivalent(
        """
E := {(1, 2), (3, 4), 7, (5, 6, 8)}
s := 0
seen := {}
for (a, b) in E:
  s := s + a + b
  seen.add(b)
""",
        """
E := {(1, 2), (3, 4), 7, (5, 6, 8)}
s := 0
seen := {}
for _e in E:
  if isTuple(_e):
    if len(_e) is 2:
      _a := select(_e, 1)
      _b := select(_e, 2)
      s := s + _a + _b
      seen.add(_b)
""",
    )


def test_some_tuple_pattern_with_bound_var():
    equivalent(
        """
E := {(1, 2), (2, 2), (3, 1)}
k := 2
r := some (x, =k) in E | not (x is k)
""",
        """
E := {(1, 2), (2, 2), (3, 1)}
k := 2
r := some _e in E | isTuple(_e) and (len(_e) is 2) and (select(_e, 2) is k) and (not (select(_e, 1) is k))
""",
    )


def test_for_nested_tuple_pattern():
    equivalent(
        """
E := {((1, 2), 3), ((4, 5), 6), (7, 8)}
acc := {}
for ((a, b), c) in E:
  acc.add(a + b + c)
""",
        """
E := {((1, 2), 3), ((4, 5), 6), (7, 8)}
acc := {}
for _e in E:
  if isTuple(_e):
    if len(_e) is 2:
      if isTuple(select(_e, 1)):
        if len(select(_e, 1)) is 2:
          _a := select(select(_e, 1), 1)
          _b := select(select(_e, 1), 2)
          _c := select(_e, 2)
          acc.add(_a + _b + _c)
""",
    )


# ------------------------------------------------------------ infer patterns


TR = "rules tr:\n  path(x, y) if edge(x, y)\n  path(x, y) if edge(x, z), path(z, y)\n"


def test_infer_pattern_projects_first_column():
    equivalent(
        TR + """
E := {(1, 2), (2, 3), (7, 7)}
t := infer(path(x, _), edge=E, rules=tr)
""",
        TR + """
E := {(1, 2), (2, 3), (7, 7)}
_full := infer(path, edge=E, rules=tr)
t := {(select(_e, 1),): _e in _full | isTuple(_e) and (len(_e) is 2)}
""",
    )


def test_infer_pattern_constant_filter():
    equivalent(
        TR + """
E := {(1, 2), (2, 3), (3, 4)}
t := infer(path(1, y), edge=E, rules=tr)
""",
        TR + """
E := {(1, 2), (2, 3), (3, 4)}
_full := infer(path, edge=E, rules=tr)
t := {(select(_e, 2),): _e in _full | isTuple(_e) and (len(_e) is 2) and (select(_e, 1) is 1)}
""",
    )


def test_infer_pattern_repeated_var_diagonal():
    equivalent(
        TR + """
E := {(1, 2), (2, 1), (2, 3)}
t := infer(path(x, x), edge=E, rules=tr)
""",
        TR + """
E := {(1, 2), (2, 1), (2, 3)}
_full := infer(path, edge=E, rules=tr)
t := {(select(_e, 1),): _e in _full | isTuple(_e) and (len(_e) is 2) and (select(_e, 1) is select(_e, 2))}
""",
    )


def test_infer_bare_name_equals_full_wildcards():
    equivalent(
        TR + "E := {(1, 2), (2, 3)}\nt := infer(path, edge=E, rules=tr)\n",
        TR + "E := {(1, 2), (2, 3)}\nt := infer(path(_, _), edge=E, rules=tr)\n",
    )
