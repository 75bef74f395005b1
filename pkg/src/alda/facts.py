"""Fact stores and the on-disk fact file format.

A FactStore maps predicate names to sets of rows; a row is a tuple of
canonical value forms (see values.canon), one component per argument.
All rows of a predicate have the same arity.

Fact files are line oriented: `pred(c1, ..., cn).` with integer and
single-quoted string constants, `#` comments, blank lines ignored.  One
file holds one predicate.
"""

from __future__ import annotations

import re

from .errors import ArityError, FormatError, MixedPredicateError
from .values import Value, canon, uncanon


class FactStore:
    def __init__(self, data: dict[str, set[tuple]] | None = None):
        self.preds: dict[str, set[tuple]] = {}
        self.arities: dict[str, int] = {}
        if data:
            for name, rows in data.items():
                for row in rows:
                    self.add_row(name, row)
                self.preds.setdefault(name, set())

    def declare(self, name: str, arity: int):
        old = self.arities.get(name)
        if old is not None and old != arity:
            raise ArityError(f"predicate {name} used with arities {old} and {arity}")
        self.arities[name] = arity
        self.preds.setdefault(name, set())

    def add_row(self, name: str, row: tuple):
        self.declare(name, len(row))
        self.preds[name].add(row)

    def add_fact(self, name: str, args: tuple[Value, ...]):
        self.add_row(name, tuple(canon(a) for a in args))

    def rows(self, name: str) -> set[tuple]:
        return self.preds.get(name, set())

    def has(self, name: str) -> bool:
        return name in self.preds

    def tuples(self, name: str) -> set[tuple]:
        """Rows decoded back to plain value tuples."""
        return {tuple(uncanon(c) for c in row) for row in self.rows(name)}

    def copy(self) -> "FactStore":
        fs = FactStore()
        fs.preds = {k: set(v) for k, v in self.preds.items()}
        fs.arities = dict(self.arities)
        return fs

    def __eq__(self, other):
        return isinstance(other, FactStore) and self.preds == other.preds

    def __repr__(self):
        return f"FactStore({self.preds!r})"


_FACT_RE = re.compile(r"^([A-Za-z_][A-Za-z_0-9]*)\s*\((.*)\)\s*\.$")


def _parse_const(text: str, lineno: int) -> Value:
    text = text.strip()
    if re.fullmatch(r"-?[0-9]+", text):
        return int(text)
    if len(text) >= 2 and text[0] == "'" and text[-1] == "'" and "'" not in text[1:-1]:
        return text[1:-1]
    raise FormatError(f"bad constant {text!r}", lineno)


def _split_args(body: str, lineno: int) -> list[str]:
    # Split on commas outside quotes; constants cannot nest.
    parts, cur, in_str = [], [], False
    for ch in body:
        if ch == "'":
            in_str = not in_str
            cur.append(ch)
        elif ch == "," and not in_str:
            parts.append("".join(cur))
            cur = []
        else:
            cur.append(ch)
    if in_str:
        raise FormatError("unterminated string", lineno)
    parts.append("".join(cur))
    return parts


def parse_fact_line(line: str, lineno: int) -> tuple[str, tuple[Value, ...]]:
    m = _FACT_RE.match(line.strip())
    if not m:
        raise FormatError(f"expected pred(c1, ..., cn). got {line.strip()!r}", lineno)
    name, body = m.group(1), m.group(2)
    if body.strip() == "":
        return name, ()
    return name, tuple(_parse_const(p, lineno) for p in _split_args(body, lineno))


def load_fact_file(path: str) -> set[tuple[Value, ...] | Value]:
    """Read one fact file into the predicate's set value.

    Returns the set as elements: scalars for unary lines, argument tuples
    otherwise, per the membership reading of predicates.
    """
    name_seen: str | None = None
    elems = []
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            name, args = parse_fact_line(line, lineno)
            if name_seen is None:
                name_seen = name
            elif name != name_seen:
                raise MixedPredicateError(
                    f"file mixes predicates {name_seen} and {name}", lineno
                )
            elems.append(args[0] if len(args) == 1 else args)
    # Constants are ints and strings only, so Python set semantics agree
    # with structural equality here.
    return set(elems)
