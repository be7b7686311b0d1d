"""Integer-keyed relations: tuple/relation model, seeded generation, CSV I/O.

A relation is a named multiset of rows. Every row carries one integer join
key and a payload of integers whose width (the relation's arity) is uniform
across the relation. Duplicate rows are legal and counted with multiplicity,
which is what makes many-to-many joins interesting.
"""

from __future__ import annotations

import random
import re
from collections import Counter
from pathlib import Path
from typing import Iterable, NamedTuple

from .errors import CsvFormatError, InvalidRangeError, UnknownRelationError

_INT_RE = re.compile(r"-?\d+")

# Key and payload values are contracted to fit in a signed 64-bit integer.
INT64_MIN = -(2**63)
INT64_MAX = 2**63 - 1


class Row(NamedTuple):
    """One relation tuple: the join key plus the provenance payload."""

    key: int
    payload: tuple[int, ...] = ()


class Relation:
    """A named multiset of rows with a fixed payload width.

    The row list may be rearranged in place (the sort phase does), but the
    multiset content never changes after construction. Equality is identity;
    compare contents with :func:`multiset_equal`.
    """

    __slots__ = ("name", "arity", "rows")

    def __init__(self, name: str, arity: int, rows: Iterable[Row] = ()):
        if arity < 0:
            raise ValueError(f"arity must be non-negative, got {arity}")
        rows = list(rows)
        for i, row in enumerate(rows):
            if len(row.payload) != arity:
                raise ValueError(
                    f"row {i} of relation {name!r} has payload width "
                    f"{len(row.payload)}, declared arity is {arity}"
                )
        self.name = name
        self.arity = arity
        self.rows = rows

    def cardinality(self) -> int:
        return len(self.rows)

    def __repr__(self) -> str:
        return f"Relation({self.name!r}, arity={self.arity}, rows={len(self.rows)})"


class Catalog:
    """Relation namespace; unknown names raise instead of defaulting."""

    def __init__(self, relations: Iterable[Relation] = ()):
        self._by_name: dict[str, Relation] = {}
        for rel in relations:
            self.add(rel)

    def add(self, rel: Relation) -> None:
        if rel.name in self._by_name:
            raise ValueError(f"duplicate relation name {rel.name!r}")
        self._by_name[rel.name] = rel

    def get(self, name: str) -> Relation:
        try:
            return self._by_name[name]
        except KeyError:
            raise UnknownRelationError(f"no relation named {name!r} in catalog") from None

    def names(self) -> list[str]:
        return list(self._by_name)

    def __contains__(self, name: str) -> bool:
        return name in self._by_name

    def __len__(self) -> int:
        return len(self._by_name)


def generate_relation(name: str, count: int, key_lo: int, key_hi: int, seed: int) -> Relation:
    """Build a relation of `count` rows with keys uniform over [key_lo, key_hi).

    The payload is a single integer holding the row's serial number, so every
    generated row is distinguishable even when keys collide. The same
    arguments always produce the same relation (Mersenne Twister, seeded per
    call, no global RNG state touched).
    """
    if key_lo >= key_hi:
        raise InvalidRangeError(f"empty key range [{key_lo}, {key_hi})")
    if key_lo < INT64_MIN or key_hi > INT64_MAX + 1:
        raise ValueError("key range must stay within signed 64-bit integers")
    if count < 0:
        raise ValueError(f"count must be non-negative, got {count}")
    rng = random.Random(seed)
    randrange = rng.randrange
    rows = [Row(randrange(key_lo, key_hi), (serial,)) for serial in range(count)]
    return Relation(name, 1, rows)


def multiset_equal(a: Relation, b: Relation) -> bool:
    """True iff a and b hold the same rows with the same multiplicities.

    Row order and relation names are ignored.
    """
    if len(a.rows) != len(b.rows):
        return False
    return Counter(a.rows) == Counter(b.rows)


def key_histogram(rel: Relation) -> Counter[int]:
    """Map each key value to its number of occurrences in the relation."""
    return Counter(row.key for row in rel.rows)


def relation_to_csv(rel: Relation, path: str | Path) -> None:
    """Write `key,p0,...,p{arity-1}` rows, one line per tuple, no quoting."""
    header = ",".join(["key"] + [f"p{i}" for i in range(rel.arity)])
    with open(path, "w", encoding="ascii", newline="") as fh:
        fh.write(header + "\n")
        for row in rel.rows:
            fh.write(",".join([str(row.key)] + [str(v) for v in row.payload]) + "\n")


def relation_from_csv(path: str | Path, name: str | None = None) -> Relation:
    """Read a relation written by :func:`relation_to_csv`.

    Arity is inferred from the header. Malformed rows raise
    :class:`CsvFormatError` naming the 1-based line number.
    """
    path = Path(path)
    rows: list[Row] = []
    with open(path, "r", encoding="ascii", newline="") as fh:
        header = fh.readline()
        if not header:
            raise CsvFormatError("empty file, expected a header line", line=1)
        cols = header.rstrip("\r\n").split(",")
        expected = ["key"] + [f"p{i}" for i in range(len(cols) - 1)]
        if cols != expected:
            raise CsvFormatError(
                f"bad header {header.rstrip()!r}, expected {','.join(expected)!r}", line=1
            )
        arity = len(cols) - 1
        for lineno, raw in enumerate(fh, start=2):
            line = raw.rstrip("\r\n")
            if not line:
                raise CsvFormatError("blank line", line=lineno)
            fields = line.split(",")
            if len(fields) != arity + 1:
                raise CsvFormatError(
                    f"expected {arity + 1} columns, found {len(fields)}", line=lineno
                )
            values = []
            for field in fields:
                if not _INT_RE.fullmatch(field):
                    raise CsvFormatError(f"non-integer field {field!r}", line=lineno)
                value = int(field)
                if not INT64_MIN <= value <= INT64_MAX:
                    raise CsvFormatError(f"{field} overflows 64-bit integers", line=lineno)
                values.append(value)
            rows.append(Row(values[0], tuple(values[1:])))
    return Relation(name if name is not None else path.stem, arity, rows)
