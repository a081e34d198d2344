"""Exact covers via Knuth's dancing links (algorithm X).

The solver streams covers as lists of candidate indices.  Order is
deterministic for a fixed candidate order: the covered element is always the
one with fewest remaining candidates (ties broken by lowest element id), and
candidate rows are tried in input order.
"""
from __future__ import annotations

from typing import Iterable, Iterator, Optional, Sequence

__all__ = ["exact_covers", "count_exact_covers"]


class _Node:
    __slots__ = ("left", "right", "up", "down", "col", "row_id")

    def __init__(self):
        self.left = self.right = self.up = self.down = self
        self.col = None
        self.row_id = -1


class _Column(_Node):
    __slots__ = ("size", "element")

    def __init__(self, element):
        super().__init__()
        self.size = 0
        self.element = element


def _build(n_elements: int, candidates: Sequence) -> _Column:
    head = _Column(-1)
    columns = []
    for e in range(n_elements):
        col = _Column(e)
        col.right = head
        col.left = head.left
        head.left.right = col
        head.left = col
        columns.append(col)
    for row_id, cand in enumerate(candidates):
        members = sorted(set(cand))
        if not members:
            raise ValueError(f"candidate {row_id} is empty")
        if members[0] < 0 or members[-1] >= n_elements:
            raise ValueError(f"candidate {row_id} has members outside 0..{n_elements - 1}")
        prev = None
        for e in members:
            node = _Node()
            node.row_id = row_id
            node.col = columns[e]
            node.up = columns[e].up
            node.down = columns[e]
            columns[e].up.down = node
            columns[e].up = node
            columns[e].size += 1
            if prev is None:
                prev = node
            else:
                node.left = prev
                node.right = prev.right
                prev.right.left = node
                prev.right = node
                prev = node
    return head


def _cover(col: _Column) -> None:
    col.right.left = col.left
    col.left.right = col.right
    i = col.down
    while i is not col:
        j = i.right
        while j is not i:
            j.down.up = j.up
            j.up.down = j.down
            j.col.size -= 1
            j = j.right
        i = i.down


def _uncover(col: _Column) -> None:
    i = col.up
    while i is not col:
        j = i.left
        while j is not i:
            j.col.size += 1
            j.down.up = j
            j.up.down = j
            j = j.left
        i = i.up
    col.right.left = col
    col.left.right = col


def exact_covers(
    n_elements: int,
    candidates: Sequence,
    limit: Optional[int] = None,
) -> Iterator[list]:
    """Yield every exact cover of {0..n_elements-1} by disjoint candidates.

    Each cover is the sorted list of selected candidate indices; at most
    `limit` covers are produced when given.  An element contained in no
    candidate simply yields zero covers.
    """
    if n_elements == 0:
        if limit != 0:
            yield []
        return
    head = _build(n_elements, candidates)
    if limit is not None and limit <= 0:
        return
    emitted = 0
    solution = []
    # iterative DFS; stack entries are (column, current row node)
    stack = []

    def choose():
        best = None
        c = head.right
        while c is not head:
            if best is None or c.size < best.size:
                best = c  # ties keep the earlier (lower element id) column
            c = c.right
        return best

    col = choose()
    if col is None:
        yield []
        return
    _cover(col)
    row = col.down
    while True:
        if row is col:
            # exhausted this column: backtrack
            _uncover(col)
            if not stack:
                return
            col, row = stack.pop()
            j = row.left
            while j is not row:
                _uncover(j.col)
                j = j.left
            solution.pop()
            row = row.down
            continue
        # descend with this row
        solution.append(row.row_id)
        j = row.right
        while j is not row:
            _cover(j.col)
            j = j.right
        if head.right is head:
            yield sorted(solution)
            emitted += 1
            if limit is not None and emitted >= limit:
                return
            j = row.left
            while j is not row:
                _uncover(j.col)
                j = j.left
            solution.pop()
            row = row.down
            continue
        stack.append((col, row))
        col = choose()
        _cover(col)
        row = col.down


def count_exact_covers(n_elements: int, candidates: Sequence) -> int:
    return sum(1 for _ in exact_covers(n_elements, candidates))
