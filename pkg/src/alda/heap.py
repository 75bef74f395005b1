"""The heap: a store from addresses to objects plus a parallel type map.

Objects are records (instances of user classes, including the hidden
globals record), sets, and sequences.  There is no garbage collection,
and addresses are never reused, so an Addr is stable for the whole run.

Sets carry a version counter bumped on every content change; the runtime
uses (address, version) pairs as a cheap fingerprint for "did any base
predicate change since the last maintenance pass".

The heap also owns the derived registry: the set of (address, field)
slots that belong to derived predicates, and the set addresses created to
hold their values.  Both are consulted by the update discipline checks.
"""

from __future__ import annotations

from typing import Iterable, Iterator

from .errors import FieldUndefined
from .values import Addr, Value, canon, uncanon

SET_TYPE = "set"
SEQ_TYPE = "sequence"


class Record:
    __slots__ = ("fields",)

    def __init__(self):
        self.fields: dict[str, Value] = {}

    def __repr__(self):
        return f"Record({self.fields!r})"


class SetObj:
    """A mutable set of values, keyed by canonical form.

    Insertion order is preserved (dict backing), which makes linearization
    deterministic for a given run; printing sorts canonically anyway.
    """

    __slots__ = ("elems", "version")

    def __init__(self, items: Iterable[Value] = ()):
        self.elems: dict = {}
        self.version = 0
        for v in items:
            self.elems[canon(v)] = v

    def add(self, v: Value) -> bool:
        k = canon(v)
        if k in self.elems:
            return False
        self.elems[k] = v
        self.version += 1
        return True

    def discard(self, v: Value) -> bool:
        k = canon(v)
        if k in self.elems:
            del self.elems[k]
            self.version += 1
            return True
        return False

    def contains(self, v: Value) -> bool:
        return canon(v) in self.elems

    def replace_contents(self, items: Iterable[Value]) -> bool:
        new = {}
        for v in items:
            new[canon(v)] = v
        if new.keys() == self.elems.keys():
            return False
        self.elems = new
        self.version += 1
        return True

    def __len__(self):
        return len(self.elems)

    def __iter__(self) -> Iterator[Value]:
        return iter(self.elems.values())

    def __repr__(self):
        return "SetObj({" + ", ".join(repr(v) for v in self) + "})"


class SeqObj:
    __slots__ = ("items",)

    def __init__(self, items: Iterable[Value] = ()):
        self.items: list[Value] = list(items)

    def __len__(self):
        return len(self.items)

    def __iter__(self) -> Iterator[Value]:
        return iter(self.items)

    def __repr__(self):
        return f"SeqObj({self.items!r})"


HeapObject = Record | SetObj | SeqObj


class Heap:
    """dom(store) == dom(types) always; allocation is the only way in."""

    def __init__(self):
        self.store: dict[Addr, HeapObject] = {}
        self.types: dict[Addr, str] = {}
        self._next = 0
        # Update discipline bookkeeping.
        self.derived_slots: set[tuple[Addr, str]] = set()
        self.derived_set_addrs: set[Addr] = set()

    # ------------------------------------------------------------ alloc

    def _alloc(self, obj: HeapObject, type_name: str) -> Addr:
        a = Addr(self._next)
        self._next += 1
        self.store[a] = obj
        self.types[a] = type_name
        return a

    def new_record(self, class_name: str) -> Addr:
        return self._alloc(Record(), class_name)

    def new_set(self, items: Iterable[Value] = ()) -> Addr:
        return self._alloc(SetObj(items), SET_TYPE)

    def new_seq(self, items: Iterable[Value] = ()) -> Addr:
        return self._alloc(SeqObj(items), SEQ_TYPE)

    # ----------------------------------------------------------- access

    def obj(self, a: Addr) -> HeapObject:
        return self.store[a]

    def type_of(self, a: Addr) -> str:
        return self.types[a]

    def is_set(self, v: Value) -> bool:
        return isinstance(v, Addr) and isinstance(self.store.get(v), SetObj)

    def is_seq(self, v: Value) -> bool:
        return isinstance(v, Addr) and isinstance(self.store.get(v), SeqObj)

    def is_record(self, v: Value) -> bool:
        return isinstance(v, Addr) and isinstance(self.store.get(v), Record)

    def get_field(self, a: Addr, f: str, line=None, col=None) -> Value:
        o = self.store.get(a)
        if not isinstance(o, Record) or f not in o.fields:
            raise FieldUndefined(f"field '{f}' is undefined on {a}", line, col)
        return o.fields[f]

    def deref(self, a: Value, fields: Iterable[str]) -> Value | None:
        """Follow a chain of fields; None stands for "undefined" (the chain
        broke at a missing field, a non-record, or a non-address)."""
        cur = a
        for f in fields:
            if not isinstance(cur, Addr):
                return None
            o = self.store.get(cur)
            if not isinstance(o, Record) or f not in o.fields:
                return None
            cur = o.fields[f]
        return cur

    # ----------------------------------------- set contents as fact rows

    def set_elements(self, a: Addr) -> list[Value]:
        o = self.store[a]
        assert isinstance(o, SetObj)
        return list(o)

    def fingerprint(self, v: Value | None) -> tuple | None:
        """(address index, version) when v is a set address, else a marker
        distinguishing "undefined" and "not a set"."""
        if isinstance(v, Addr):
            o = self.store.get(v)
            if isinstance(o, SetObj):
                return (v.index, o.version)
            return (v.index, None)
        if v is None:
            return None
        return ("scalar", canon(v))


def facts_to_elements(rows: Iterable[tuple], arity: int) -> list[Value]:
    """Fact rows of one predicate, rendered as the predicate's set value.

    p(x) holds iff x is in p, so a unary predicate's set holds the scalars
    themselves; higher arities hold the argument tuples.  Rows are tuples
    of canonical forms.
    """
    if arity == 1:
        return [uncanon(r[0]) for r in rows]
    return [tuple(uncanon(c) for c in r) for r in rows]


def elements_to_facts(elements: Iterable[Value], arity: int) -> set[tuple]:
    """The reverse direction: which fact rows does this set contribute?

    Elements that do not have the predicate's shape (for arity >= 2, a
    tuple of exactly that many components) contribute nothing: membership
    of such an element never witnesses p(x1, ..., xn).
    """
    out: set[tuple] = set()
    if arity == 0:
        # Nullary predicates hold iff () is a member.
        for v in elements:
            if v == ():
                out.add(())
        return out
    if arity == 1:
        for v in elements:
            out.add((canon(v),))
        return out
    for v in elements:
        if isinstance(v, tuple) and len(v) == arity:
            out.add(tuple(canon(c) for c in v))
    return out
