"""In-place quicksort of relation rows by join key: the sort phase of sort-merge."""

from __future__ import annotations

from typing import MutableSequence, Sequence

from .relations import Row

# Segments at or below this size are finished with insertion sort.
INSERTION_CUTOFF = 16


def is_sorted_by_key(rows: Sequence[Row]) -> bool:
    """True iff keys are non-decreasing; equal neighbours are fine."""
    return all(rows[i].key <= rows[i + 1].key for i in range(len(rows) - 1))


def quicksort_by_key(rows: MutableSequence[Row]) -> None:
    """Sort rows by key, in place. Not stable.

    Median-of-three pivots with Hoare partitioning; small segments fall back
    to insertion sort. Instead of recursing, the larger side of each split is
    deferred on an explicit segment stack and the smaller side is split next,
    which bounds the stack at O(log n) even on sorted, reverse-sorted, or
    constant inputs.
    """
    if len(rows) < 2:
        return
    stack = [(0, len(rows) - 1)]
    while stack:
        lo, hi = stack.pop()
        while hi - lo + 1 > INSERTION_CUTOFF:
            j = _partition(rows, lo, hi)
            if j - lo < hi - j:
                stack.append((j + 1, hi))
                hi = j
            else:
                stack.append((lo, j))
                lo = j + 1
        _insertion_sort(rows, lo, hi)


def _partition(rows: MutableSequence[Row], lo: int, hi: int) -> int:
    """Hoare partition of rows[lo..hi]; returns j with rows[lo..j] <= rows[j+1..hi].

    First, middle, and last rows are sorted among themselves; the middle key
    becomes the pivot, and the two endpoints double as scan sentinels.
    """
    mid = (lo + hi) // 2
    if rows[mid].key < rows[lo].key:
        rows[lo], rows[mid] = rows[mid], rows[lo]
    if rows[hi].key < rows[lo].key:
        rows[lo], rows[hi] = rows[hi], rows[lo]
    if rows[hi].key < rows[mid].key:
        rows[mid], rows[hi] = rows[hi], rows[mid]
    pivot = rows[mid].key
    i, j = lo, hi
    while True:
        i += 1
        while rows[i].key < pivot:
            i += 1
        j -= 1
        while rows[j].key > pivot:
            j -= 1
        if i >= j:
            return j
        rows[i], rows[j] = rows[j], rows[i]


def _insertion_sort(rows: MutableSequence[Row], lo: int, hi: int) -> None:
    for i in range(lo + 1, hi + 1):
        row = rows[i]
        key = row.key
        j = i - 1
        while j >= lo and rows[j].key > key:
            rows[j + 1] = rows[j]
            j -= 1
        rows[j + 1] = row
