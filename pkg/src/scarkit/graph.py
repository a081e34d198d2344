"""Blockade graphs and the combinatorial primitives used by the scar searches.

Vertices are atom sites; an edge means the two sites blockade each other.
All values are immutable after construction and safe to share across threads.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Optional, Sequence

__all__ = [
    "Graph",
    "GraphFormatError",
    "Bipartition",
    "Partition3",
    "two_color",
    "enumerate_cliques",
    "quotient_graph",
    "enumerate_maximal_independent_sets",
    "load_graph",
    "save_graph",
    "parse_graph",
    "format_graph",
    "is_independent_set",
    "induced_is_connected",
]

# A vertex set is a sorted tuple of distinct vertex ids.
VertexSet = tuple  # tuple[int, ...]


class GraphFormatError(ValueError):
    """Raised when a graph document violates the text format."""


@dataclass(frozen=True)
class Graph:
    """Undirected graph with no self-loops and no duplicate edges.

    positions / labels are optional plot metadata; algorithms never consult
    them.  `periods` holds torus translation vectors (same dimension as the
    positions) so edge lengths can be measured with the minimum-image rule.
    """

    vertex_count: int
    edges: frozenset  # frozenset[tuple[int, int]] with i < j
    positions: Optional[tuple] = None
    labels: Optional[tuple] = None
    periods: Optional[tuple] = field(default=None, compare=False)

    def __post_init__(self):
        for (i, j) in self.edges:
            if i == j:
                raise ValueError(f"self-loop at vertex {i}")
            if not (0 <= i < j < self.vertex_count):
                raise ValueError(f"edge ({i},{j}) out of range for n={self.vertex_count}")
        if self.positions is not None and len(self.positions) != self.vertex_count:
            raise ValueError("positions length mismatch")
        if self.labels is not None and len(self.labels) != self.vertex_count:
            raise ValueError("labels length mismatch")

    @staticmethod
    def from_edges(vertex_count: int, edges: Iterable, positions=None, labels=None, periods=None) -> "Graph":
        norm = frozenset((min(i, j), max(i, j)) for i, j in edges)
        pos = tuple(tuple(float(c) for c in p) for p in positions) if positions is not None else None
        lab = tuple(labels) if labels is not None else None
        per = tuple(tuple(float(c) for c in p) for p in periods) if periods is not None else None
        return Graph(vertex_count, norm, pos, lab, per)

    @cached_property
    def neighbors(self) -> tuple:
        """neighbors[v] is the sorted tuple of vertices adjacent to v."""
        nbr = [[] for _ in range(self.vertex_count)]
        for (i, j) in self.edges:
            nbr[i].append(j)
            nbr[j].append(i)
        return tuple(tuple(sorted(ns)) for ns in nbr)

    @cached_property
    def neighbor_masks(self) -> tuple:
        """neighbor_masks[v] is the bitmask of v's neighbours (bit k = vertex k)."""
        masks = [0] * self.vertex_count
        for (i, j) in self.edges:
            masks[i] |= 1 << j
            masks[j] |= 1 << i
        return tuple(masks)

    def adjacent(self, i: int, j: int) -> bool:
        return (min(i, j), max(i, j)) in self.edges

    def degree(self, v: int) -> int:
        return len(self.neighbors[v])

    @property
    def edge_count(self) -> int:
        return len(self.edges)

    def sorted_edges(self) -> list:
        return sorted(self.edges)


@dataclass(frozen=True)
class Bipartition:
    """Proper two-coloring: no edge joins vertices with the same flag."""

    side_of: tuple  # tuple[int, ...] of 0/1 flags

    def side(self, flag: int) -> VertexSet:
        return tuple(v for v, s in enumerate(self.side_of) if s == flag)

    def validate(self, g: Graph) -> None:
        if len(self.side_of) != g.vertex_count:
            raise ValueError("bipartition length mismatch")
        for (i, j) in g.edges:
            if self.side_of[i] == self.side_of[j]:
                raise ValueError(f"edge ({i},{j}) joins same-flag vertices")


@dataclass(frozen=True)
class Partition3:
    """Disjoint vertex sets A, B, C covering all vertices; A and B nonempty.

    C is the 'dead' buffer sublattice and may be empty.
    """

    a: VertexSet
    b: VertexSet
    c: VertexSet = ()

    def __post_init__(self):
        object.__setattr__(self, "a", tuple(sorted(self.a)))
        object.__setattr__(self, "b", tuple(sorted(self.b)))
        object.__setattr__(self, "c", tuple(sorted(self.c)))
        if not self.a or not self.b:
            raise ValueError("A and B must be nonempty")
        sa, sb, sc = set(self.a), set(self.b), set(self.c)
        if sa & sb or sa & sc or sb & sc:
            raise ValueError("A, B, C must be pairwise disjoint")

    def validate(self, g: Graph) -> None:
        union = set(self.a) | set(self.b) | set(self.c)
        if union != set(range(g.vertex_count)):
            raise ValueError("partition does not cover all vertices")

    def epsilon_a(self, k: int) -> float:
        """Weight of vertex k in the A-branch two-site terms: 1 in A, 1/2 in C, 0 in B."""
        if k in set(self.a):
            return 1.0
        if k in set(self.c):
            return 0.5
        return 0.0

    def epsilon_b(self, k: int) -> float:
        if k in set(self.b):
            return 1.0
        if k in set(self.c):
            return 0.5
        return 0.0

    def side_of(self, n: int) -> list:
        """Per-vertex tag: 0 for A, 1 for B, 2 for C."""
        tags = [2] * n
        for v in self.a:
            tags[v] = 0
        for v in self.b:
            tags[v] = 1
        return tags

    def swapped(self) -> "Partition3":
        return Partition3(self.b, self.a, self.c)


def two_color(g: Graph) -> Optional[Bipartition]:
    """BFS two-coloring, or None if the graph has an odd cycle.

    Deterministic: each component is colored from its lowest vertex, which
    receives flag 0.
    """
    color = [-1] * g.vertex_count
    for start in range(g.vertex_count):
        if color[start] != -1:
            continue
        color[start] = 0
        queue = [start]
        while queue:
            nxt = []
            for u in queue:
                for w in g.neighbors[u]:
                    if color[w] == -1:
                        color[w] = 1 - color[u]
                        nxt.append(w)
                    elif color[w] == color[u]:
                        return None
            queue = nxt
    return Bipartition(tuple(color))


def enumerate_cliques(g: Graph, size: int) -> list:
    """All vertex sets of exactly `size` mutually adjacent vertices, lexicographic."""
    if size < 1:
        raise ValueError("clique size must be >= 1")
    if size == 1:
        return [(v,) for v in range(g.vertex_count)]
    masks = g.neighbor_masks
    out = []

    def extend(clique, common):
        if len(clique) == size:
            out.append(tuple(clique))
            return
        cand = common
        while cand:
            v = (cand & -cand).bit_length() - 1
            cand &= cand - 1
            clique.append(v)
            extend(clique, common & masks[v] & ~((1 << (v + 1)) - 1))
            clique.pop()

    full = (1 << g.vertex_count) - 1
    for v in range(g.vertex_count):
        extend([v], masks[v] & full & ~((1 << (v + 1)) - 1))
    return out


def quotient_graph(g: Graph, blocks: Sequence) -> Graph:
    """Contract each block to one vertex; blocks must partition V.

    Blocks p, q are adjacent iff some edge of g joins them; intra-block edges
    are dropped.  Block order is preserved, so the result is deterministic.
    """
    block_of = [-1] * g.vertex_count
    for bi, block in enumerate(blocks):
        for v in block:
            if v < 0 or v >= g.vertex_count:
                raise ValueError(f"block vertex {v} out of range")
            if block_of[v] != -1:
                raise ValueError(f"vertex {v} appears in two blocks")
            block_of[v] = bi
    if any(b == -1 for b in block_of):
        missing = block_of.index(-1)
        raise ValueError(f"vertex {missing} not covered by any block")
    qedges = set()
    for (i, j) in g.edges:
        bi, bj = block_of[i], block_of[j]
        if bi != bj:
            qedges.add((min(bi, bj), max(bi, bj)))
    positions = None
    if g.positions is not None:
        positions = []
        for block in blocks:
            pts = [g.positions[v] for v in block]
            positions.append(tuple(sum(c) / len(pts) for c in zip(*pts)))
    return Graph.from_edges(len(blocks), qedges, positions=positions, periods=g.periods)


def is_independent_set(g: Graph, vs: Iterable) -> bool:
    vset = set(vs)
    return all(not (i in vset and j in vset) for (i, j) in g.edges)


def induced_is_connected(g: Graph, vs: Iterable) -> bool:
    """Connectivity of the induced subgraph G[vs]; empty and single sets count as connected."""
    vset = set(vs)
    if len(vset) <= 1:
        return True
    start = next(iter(vset))
    seen = {start}
    stack = [start]
    while stack:
        u = stack.pop()
        for w in g.neighbors[u]:
            if w in vset and w not in seen:
                seen.add(w)
                stack.append(w)
    return seen == vset


def enumerate_maximal_independent_sets(g: Graph, min_size: int = 1, cap: int = 1_000_000):
    """All maximal independent sets with >= min_size vertices, lexicographically sorted.

    Bron-Kerbosch with pivoting on the complement graph (cliques there are
    independent sets here).  Returns (sets, truncated) where truncated is True
    when enumeration stopped at `cap` results.
    """
    n = g.vertex_count
    full = (1 << n) - 1
    # complement adjacency masks
    comp = [full & ~g.neighbor_masks[v] & ~(1 << v) for v in range(n)]
    out = []
    truncated = False

    def bits(x):
        while x:
            b = x & -x
            yield b.bit_length() - 1
            x ^= b

    def bk(r, p, x):
        nonlocal truncated
        if truncated:
            return
        if p == 0 and x == 0:
            if bin(r).count("1") >= min_size:
                out.append(r)
                if len(out) >= cap:
                    truncated = True
            return
        # pivot: vertex of p|x maximizing |p & comp[u]|
        pivot = max(bits(p | x), key=lambda u: bin(p & comp[u]).count("1"))
        for v in bits(p & ~comp[pivot]):
            vb = 1 << v
            bk(r | vb, p & comp[v], x & comp[v])
            p &= ~vb
            x |= vb

    bk(0, full, 0)
    sets = sorted(tuple(v for v in range(n) if m >> v & 1) for m in out)
    return sets, truncated


# ---------------------------------------------------------------------------
# GraphDocument text format:
#   vertices N
#   pos i x y [z]       (optional)
#   edge i j
# Comment lines start with '#'.
# ---------------------------------------------------------------------------

def parse_graph(text: str) -> Graph:
    vertex_count = None
    positions = {}
    edges = set()
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split()
        kind = parts[0]
        try:
            if kind == "vertices":
                vertex_count = int(parts[1])
            elif kind == "pos":
                v = int(parts[1])
                positions[v] = tuple(float(x) for x in parts[2:])
                if len(positions[v]) not in (2, 3):
                    raise GraphFormatError(f"line {lineno}: pos needs 2 or 3 coordinates")
            elif kind == "edge":
                i, j = int(parts[1]), int(parts[2])
                if vertex_count is None:
                    raise GraphFormatError(f"line {lineno}: edge before 'vertices' header")
                if i == j:
                    raise GraphFormatError(f"line {lineno}: self-loop at vertex {i}")
                if not (0 <= i < vertex_count and 0 <= j < vertex_count):
                    raise GraphFormatError(f"line {lineno}: vertex id out of range")
                e = (min(i, j), max(i, j))
                if e in edges:
                    raise GraphFormatError(f"line {lineno}: duplicate edge ({i},{j})")
                edges.add(e)
            else:
                raise GraphFormatError(f"line {lineno}: unknown directive {kind!r}")
        except (IndexError, ValueError) as exc:
            if isinstance(exc, GraphFormatError):
                raise
            raise GraphFormatError(f"line {lineno}: cannot parse {line!r}") from exc
    if vertex_count is None:
        raise GraphFormatError("missing 'vertices N' header")
    pos = None
    if positions:
        if set(positions) != set(range(vertex_count)):
            raise GraphFormatError("pos lines must cover all vertices or none")
        dims = {len(p) for p in positions.values()}
        if len(dims) != 1:
            raise GraphFormatError("mixed 2D/3D positions")
        pos = tuple(positions[v] for v in range(vertex_count))
    return Graph.from_edges(vertex_count, edges, positions=pos)


def format_graph(g: Graph) -> str:
    lines = [f"vertices {g.vertex_count}"]
    if g.positions is not None:
        for v, p in enumerate(g.positions):
            coords = " ".join(repr(float(c)) for c in p)
            lines.append(f"pos {v} {coords}")
    for (i, j) in g.sorted_edges():
        lines.append(f"edge {i} {j}")
    return "\n".join(lines) + "\n"


def load_graph(path) -> Graph:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_graph(fh.read())


def save_graph(g: Graph, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(format_graph(g))
