"""Pairwise equi-join algorithms and their simulated page-access accounting.

All five algorithms share one contract: inputs are an outer and an inner
relation, the only predicate is key equality, and the output carries the
matched key once with the outer payload concatenated before the inner one.
Inputs are never mutated. Every algorithm produces the same output multiset;
they differ in how much work the counters record.

Pages are simulated: `page_reads` counts fetches of logical pages of
`page_size` tuples, no real I/O happens anywhere.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Sequence

from .errors import CardinalityLimitError
from .relations import Relation, Row, key_histogram
from .sorting import quicksort_by_key

DEFAULT_MAX_OUTPUT_TUPLES = 10_000_000
DEFAULT_PAGE_SIZE = 64

# Synthesized result names longer than this are truncated; deep plans would
# otherwise spend quadratic time gluing name strings together.
_MAX_NAME_LEN = 64


@dataclass(frozen=True)
class JoinResultPolicy:
    """Hard cap on join output size; many-to-many fan-out can explode."""

    max_output_tuples: int = DEFAULT_MAX_OUTPUT_TUPLES


@dataclass
class CostCounters:
    """Work accounting, accumulated across the joins that share the object."""

    tuple_comparisons: int = 0
    page_reads: int = 0
    page_size: int = DEFAULT_PAGE_SIZE


def expected_join_cardinality(hist_outer: Mapping[int, int], hist_inner: Mapping[int, int]) -> int:
    """Exact equi-join output size from the two key histograms.

    sum over keys v of count_outer(v) * count_inner(v).
    """
    if len(hist_inner) < len(hist_outer):
        hist_outer, hist_inner = hist_inner, hist_outer
    get = hist_inner.get
    return sum(count * get(key, 0) for key, count in hist_outer.items())


def joined_name(left: str, right: str) -> str:
    name = f"({left}⋈{right})"
    if len(name) > _MAX_NAME_LEN:
        name = name[: _MAX_NAME_LEN - 1] + "…"
    return name


def _prepare(outer: Relation, inner: Relation,
             policy: JoinResultPolicy | None,
             counters: CostCounters | None) -> tuple[JoinResultPolicy, CostCounters]:
    """Fill in defaults and refuse joins whose exact output would blow the cap.

    The output size is known from the operand histograms before any tuple is
    built, so the cap aborts without first exhausting memory.
    """
    policy = policy if policy is not None else JoinResultPolicy()
    counters = counters if counters is not None else CostCounters()
    expected = expected_join_cardinality(key_histogram(outer), key_histogram(inner))
    if expected > policy.max_output_tuples:
        raise CardinalityLimitError(
            f"join of {outer.name!r} ({len(outer.rows)} rows) and {inner.name!r} "
            f"({len(inner.rows)} rows) would produce {expected} tuples, "
            f"cap is {policy.max_output_tuples}"
        )
    return policy, counters


def _result(outer: Relation, inner: Relation, rows: list[Row]) -> Relation:
    return Relation(joined_name(outer.name, inner.name), outer.arity + inner.arity, rows)


def _pages(rows: Sequence[Row], page_size: int) -> list[Sequence[Row]]:
    return [rows[i:i + page_size] for i in range(0, len(rows), page_size)]


def nested_loop_join(outer: Relation, inner: Relation,
                     policy: JoinResultPolicy | None = None,
                     counters: CostCounters | None = None) -> Relation:
    """Compare every outer tuple against every inner tuple.

    Exactly len(outer) * len(inner) tuple comparisons, always.
    """
    _, counters = _prepare(outer, inner, policy, counters)
    out: list[Row] = []
    append = out.append
    inner_rows = inner.rows
    n_inner = len(inner_rows)
    for orow in outer.rows:
        counters.tuple_comparisons += n_inner
        okey = orow.key
        opay = orow.payload
        for irow in inner_rows:
            if irow.key == okey:
                append(Row(okey, opay + irow.payload))
    return _result(outer, inner, out)


def block_nested_loop_join(outer: Relation, inner: Relation,
                           policy: JoinResultPolicy | None = None,
                           counters: CostCounters | None = None) -> Relation:
    """Nested loops over whole pages: one full inner sweep per outer page.

    page_reads comes to pages(outer) + pages(outer) * pages(inner).
    """
    _, counters = _prepare(outer, inner, policy, counters)
    out: list[Row] = []
    append = out.append
    outer_pages = _pages(outer.rows, counters.page_size)
    inner_pages = _pages(inner.rows, counters.page_size)
    for opage in outer_pages:
        counters.page_reads += 1
        for ipage in inner_pages:
            counters.page_reads += 1
            counters.tuple_comparisons += len(opage) * len(ipage)
            for orow in opage:
                okey = orow.key
                opay = orow.payload
                for irow in ipage:
                    if irow.key == okey:
                        append(Row(okey, opay + irow.payload))
    return _result(outer, inner, out)


def rocking_nested_loop_join(outer: Relation, inner: Relation,
                             policy: JoinResultPolicy | None = None,
                             counters: CostCounters | None = None) -> Relation:
    """Block nested loops with the inner sweep direction alternating per
    outer page, so the page at the turn is still buffered and not refetched.

    For pages(outer) = n >= 1 and pages(inner) = m >= 1 that makes
    page_reads = n + m + (n - 1) * (m - 1), never more than the plain block
    sweep's n + n * m.
    """
    _, counters = _prepare(outer, inner, policy, counters)
    out: list[Row] = []
    append = out.append
    outer_pages = _pages(outer.rows, counters.page_size)
    inner_pages = _pages(inner.rows, counters.page_size)
    buffered = -1  # index of the inner page currently held in the buffer
    forward = True
    for opage in outer_pages:
        counters.page_reads += 1
        indices = range(len(inner_pages)) if forward else range(len(inner_pages) - 1, -1, -1)
        for pi in indices:
            if pi != buffered:
                counters.page_reads += 1
                buffered = pi
            ipage = inner_pages[pi]
            counters.tuple_comparisons += len(opage) * len(ipage)
            for orow in opage:
                okey = orow.key
                opay = orow.payload
                for irow in ipage:
                    if irow.key == okey:
                        append(Row(okey, opay + irow.payload))
        forward = not forward
    return _result(outer, inner, out)


def hash_join(outer: Relation, inner: Relation,
              policy: JoinResultPolicy | None = None,
              counters: CostCounters | None = None) -> Relation:
    """Build a chained-bucket table on the inner keys, probe with each outer
    tuple. Duplicate inner keys pile up in their bucket and all match."""
    _, counters = _prepare(outer, inner, policy, counters)
    out: list[Row] = []
    append = out.append
    buckets: dict[int, list[tuple[int, ...]]] = {}
    setdefault = buckets.setdefault
    for irow in inner.rows:
        setdefault(irow.key, []).append(irow.payload)
    get = buckets.get
    for orow in outer.rows:
        counters.tuple_comparisons += 1
        bucket = get(orow.key)
        if bucket:
            okey = orow.key
            opay = orow.payload
            for ipay in bucket:
                append(Row(okey, opay + ipay))
    return _result(outer, inner, out)


def sort_merge_join(outer: Relation, inner: Relation,
                    policy: JoinResultPolicy | None = None,
                    counters: CostCounters | None = None) -> Relation:
    """Sort both sides by key, then merge with two cursors.

    The operands need not arrive sorted: each side is copied and the copy is
    sorted with quicksort_by_key, so plan nodes can reuse a base relation.
    On a key match the inner run is buffered and the full cross product of
    the two equal-key runs is emitted, which many-to-many keys require.
    """
    _, counters = _prepare(outer, inner, policy, counters)
    left = list(outer.rows)
    right = list(inner.rows)
    quicksort_by_key(left)
    quicksort_by_key(right)
    out: list[Row] = []
    extend = out.extend
    i = j = 0
    n, m = len(left), len(right)
    while i < n and j < m:
        counters.tuple_comparisons += 1
        key = left[i].key
        rkey = right[j].key
        if key < rkey:
            i += 1
        elif key > rkey:
            j += 1
        else:
            i_end = i + 1
            while i_end < n and left[i_end].key == key:
                i_end += 1
            j_end = j + 1
            while j_end < m and right[j_end].key == key:
                j_end += 1
            run = [rrow.payload for rrow in right[j:j_end]]
            for lrow in left[i:i_end]:
                lpay = lrow.payload
                extend(Row(key, lpay + rpay) for rpay in run)
            i, j = i_end, j_end
    return _result(outer, inner, out)


ALGORITHMS = {
    "sortmerge": sort_merge_join,
    "nested": nested_loop_join,
    "block": block_nested_loop_join,
    "rocking": rocking_nested_loop_join,
    "hash": hash_join,
}
