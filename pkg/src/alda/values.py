"""Runtime values and the canonical forms used to store them in sets.

Values are plain Python data: None, bool, int, str, tuples of values, and
Addr for heap addresses.  Python's own equality conflates True with 1, so
sets and fact stores key their elements by canon(v), an injective hashable
form that keeps the kinds apart while leaving ints and strings unwrapped
(the common case stays cheap).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Any

# A value is None | bool | int | str | tuple[Value, ...] | Addr.
Value = Any

INT_MIN = -(2**63)
INT_MAX = 2**63 - 1


@dataclass(frozen=True, eq=False)
class Addr:
    """A heap address.  Equality and hash are by creation index, and the
    allocator never reuses an index, so this is identity equality."""

    index: int

    def __eq__(self, other):
        return isinstance(other, Addr) and other.index == self.index

    def __hash__(self):
        return hash(("addr", self.index))

    def __repr__(self):
        return f"#{self.index}"


def is_value(v) -> bool:
    if v is None or isinstance(v, (bool, int, str, Addr)):
        return True
    if isinstance(v, tuple):
        return all(is_value(c) for c in v)
    return False


def canon(v: Value):
    """Injective, hashable image of a value.

    bool is tagged (else True collides with 1 in dict keys); tuples get a
    't' marker so a value tuple can never collide with a tag tuple.
    """
    if isinstance(v, bool):
        return ("b", v)
    if v is None or isinstance(v, (int, str, Addr)):
        return v
    if isinstance(v, tuple):
        return ("t",) + tuple(canon(c) for c in v)
    raise TypeError(f"not a value: {v!r}")


def uncanon(c) -> Value:
    if isinstance(c, tuple):
        if c and c[0] == "b":
            return c[1]
        return tuple(uncanon(x) for x in c[1:])
    return c


def structural_equal(a: Value, b: Value) -> bool:
    """Equality used by `is`: structural on scalars and tuples, identity
    (creation index) on addresses."""
    return canon(a) == canon(b)


# Kind ranks for the canonical print order: None, bools, ints, strings,
# tuples, addresses.  Within a kind: False<True, ints numerically, strings
# lexicographically, tuples componentwise, addresses by creation index.
_RANK_NONE = 0
_RANK_BOOL = 1
_RANK_INT = 2
_RANK_STR = 3
_RANK_TUPLE = 4
_RANK_ADDR = 5


def sort_key(v: Value):
    if v is None:
        return (_RANK_NONE,)
    if isinstance(v, bool):
        return (_RANK_BOOL, v)
    if isinstance(v, int):
        return (_RANK_INT, v)
    if isinstance(v, str):
        return (_RANK_STR, v)
    if isinstance(v, tuple):
        return (_RANK_TUPLE, len(v), tuple(sort_key(c) for c in v))
    if isinstance(v, Addr):
        return (_RANK_ADDR, v.index)
    raise TypeError(f"not a value: {v!r}")


def render_scalar(v: Value) -> str:
    """Source-syntax rendering of a non-address value.  Addresses need the
    heap to render and are handled by the runtime's printer."""
    if v is None:
        return "None"
    if isinstance(v, bool):
        return "True" if v else "False"
    if isinstance(v, int):
        return str(v)
    if isinstance(v, str):
        body = v.replace("\\", "\\\\").replace("'", "\\'").replace("\n", "\\n")
        return f"'{body}'"
    if isinstance(v, tuple):
        if len(v) == 1:
            return f"({render_scalar(v[0])},)"
        return "(" + ", ".join(render_scalar(c) for c in v) + ")"
    raise TypeError(f"cannot render {v!r} without a heap")
