"""The two candidate-construction searches.

Type-I: exact clique covers whose quotient graph is bipartite (an effective
bipartite lattice of two-level blocks).  Type-II: three-set partitions where
a frustrated buffer C pins itself while A and B oscillate.
"""
from __future__ import annotations

import math
import random
from dataclasses import dataclass
from typing import Optional, Sequence

from .cover import exact_covers
from .graph import (
    Bipartition,
    Graph,
    Partition3,
    enumerate_cliques,
    enumerate_maximal_independent_sets,
    induced_is_connected,
    quotient_graph,
    two_color,
)

__all__ = [
    "CliqueCover",
    "TypeICandidate",
    "ConditionReport",
    "TypeIICandidate",
    "find_type1",
    "check_type2",
    "search_type2",
    "candidate_to_dict",
    "type2_to_dict",
]


@dataclass(frozen=True)
class CliqueCover:
    """Disjoint cliques covering every vertex, canonicalized by minimum member."""

    blocks: tuple  # tuple[VertexSet, ...]

    @staticmethod
    def from_blocks(blocks) -> "CliqueCover":
        canon = sorted(tuple(sorted(b)) for b in blocks)
        return CliqueCover(tuple(canon))

    def validate(self, g: Graph) -> None:
        seen = set()
        for block in self.blocks:
            for v in block:
                if v in seen:
                    raise ValueError(f"vertex {v} in two blocks")
                seen.add(v)
            for i, u in enumerate(block):
                for w in block[i + 1:]:
                    if not g.adjacent(u, w):
                        raise ValueError(f"block {block} is not a clique ({u},{w} not adjacent)")
        if seen != set(range(g.vertex_count)):
            raise ValueError("blocks do not cover all vertices")

    @property
    def uniform(self) -> bool:
        sizes = {len(b) for b in self.blocks}
        return len(sizes) == 1


@dataclass(frozen=True)
class TypeICandidate:
    """A clique cover plus the two-coloring of its quotient.

    partition assigns every vertex of a flag-0 block to A and of a flag-1
    block to B (C stays empty); `uniform` marks single-cardinality covers,
    which typically scar best (mixed covers need the frequency-adjusted
    Hamiltonian).
    """

    cover: CliqueCover
    quotient_coloring: Bipartition
    partition: Partition3
    uniform: bool

    def side_blocks(self, flag: int):
        return tuple(b for b, s in zip(self.cover.blocks, self.quotient_coloring.side_of)
                     if s == flag)


@dataclass(frozen=True)
class ConditionReport:
    """Outcome of the three type-II conditions with diagnostics.

    cond_iii is true when C induces a connected subgraph, or when the minimum
    number of A|B neighbours over C is >= the maximum number of C neighbours
    over A|B (the degree clause is read non-strictly; equality passes, as in
    the face-centered-square reference case).
    """

    cond_i: bool
    cond_i_violations: tuple
    cond_ii: bool
    cond_ii_violations: tuple
    cond_iii: bool
    c_connected: bool
    min_ab_degree_of_c: int
    max_c_degree_of_ab: int

    @property
    def passes(self) -> bool:
        return self.cond_i and self.cond_ii and self.cond_iii


@dataclass(frozen=True)
class TypeIICandidate:
    partition: Partition3
    report: ConditionReport
    score: float


@dataclass
class SearchDiagnostics:
    covers_examined: int = 0
    independent_sets_examined: int = 0
    truncated: bool = False


def find_type1(
    g: Graph,
    clique_sizes: Sequence,
    uniform_only: bool = True,
    limit: Optional[int] = None,
    diagnostics: Optional[SearchDiagnostics] = None,
):
    """All clique covers with bipartite quotient, built from the given sizes.

    uniform_only runs one exact-cover instance per clique size; otherwise a
    single instance over the union of all sizes (mixed-cardinality covers are
    then possible and flagged non-uniform).
    """
    sizes = sorted(set(clique_sizes))
    if not sizes:
        raise ValueError("clique_sizes must be nonempty")
    if diagnostics is None:
        diagnostics = SearchDiagnostics()
    candidate_groups = []
    if uniform_only:
        for size in sizes:
            candidate_groups.append(enumerate_cliques(g, size))
    else:
        merged = []
        for size in sizes:
            merged.extend(enumerate_cliques(g, size))
        candidate_groups.append(merged)

    results = []
    seen = set()
    for cliques in candidate_groups:
        for chosen in exact_covers(g.vertex_count, cliques, limit=None):
            diagnostics.covers_examined += 1
            cover = CliqueCover.from_blocks(cliques[i] for i in chosen)
            if cover.blocks in seen:
                continue
            coloring = two_color(quotient_graph(g, cover.blocks))
            if coloring is None:
                continue
            seen.add(cover.blocks)
            a, b = [], []
            for block, flag in zip(cover.blocks, coloring.side_of):
                (a if flag == 0 else b).extend(block)
            partition = Partition3(tuple(sorted(a)), tuple(sorted(b)), ())
            results.append(TypeICandidate(cover, coloring, partition, cover.uniform))
            if limit is not None and len(results) >= limit:
                return results
    return results


def check_type2(g: Graph, p: Partition3) -> ConditionReport:
    """Evaluate the three type-II conditions for a partition."""
    p.validate(g)
    tags = p.side_of(g.vertex_count)  # 0 A, 1 B, 2 C
    ab = [v for v in range(g.vertex_count) if tags[v] != 2]

    i_violations = sorted({v for (u, w) in g.edges if tags[u] != 2 and tags[w] != 2
                           for v in (u, w)})
    cond_i = not i_violations

    ii_violations = []
    min_ab_deg = None
    for v in p.c:
        n_a = sum(1 for w in g.neighbors[v] if tags[w] == 0)
        n_b = sum(1 for w in g.neighbors[v] if tags[w] == 1)
        if n_a == 0 or n_b == 0:
            ii_violations.append(v)
        deg_ab = n_a + n_b
        min_ab_deg = deg_ab if min_ab_deg is None else min(min_ab_deg, deg_ab)
    cond_ii = not ii_violations

    max_c_deg = 0
    for v in ab:
        max_c_deg = max(max_c_deg, sum(1 for w in g.neighbors[v] if tags[w] == 2))

    if len(p.c) <= 1:
        c_connected = len(p.c) == 1
    else:
        has_edges = any(tags[u] == 2 and tags[w] == 2 for (u, w) in g.edges)
        c_connected = has_edges and induced_is_connected(g, p.c)
    min_ab_deg = min_ab_deg if min_ab_deg is not None else 0
    cond_iii = c_connected or (min_ab_deg >= max_c_deg)

    return ConditionReport(
        cond_i=cond_i,
        cond_i_violations=tuple(i_violations),
        cond_ii=cond_ii,
        cond_ii_violations=tuple(ii_violations),
        cond_iii=cond_iii,
        c_connected=c_connected,
        min_ab_degree_of_c=min_ab_deg,
        max_c_degree_of_ab=max_c_deg,
    )


def _coloring_cost(g: Graph, members, a_mask: int, n_vertices: int) -> float:
    """Feasibility-first cost: condition-II violations dominate, then imbalance."""
    tags = {}
    for i, v in enumerate(members):
        tags[v] = 0 if (a_mask >> i) & 1 else 1
    violations = 0
    mset = set(members)
    for v in range(n_vertices):
        if v in mset:
            continue
        n_a = n_b = 0
        for w in g.neighbors[v]:
            if w in tags:
                if tags[w] == 0:
                    n_a += 1
                else:
                    n_b += 1
        if n_a == 0 or n_b == 0:
            violations += 1
    n_a_tot = bin(a_mask).count("1")
    imbalance = abs(2 * n_a_tot - len(members))
    return violations * n_vertices + imbalance


def _mask_to_partition(g: Graph, members, a_mask: int) -> Partition3:
    a = tuple(v for i, v in enumerate(members) if (a_mask >> i) & 1)
    b = tuple(v for i, v in enumerate(members) if not (a_mask >> i) & 1)
    c = tuple(v for v in range(g.vertex_count) if v not in set(members))
    return Partition3(a, b, c)


def search_type2(
    g: Graph,
    exhaustive_threshold: int = 18,
    anneal_steps: int = 4000,
    seed: int = 0,
    mis_cap: int = 200_000,
    diagnostics: Optional[SearchDiagnostics] = None,
):
    """Search A/B two-colorings of every maximum independent set.

    Exhaustive over the 2^(|M|-1) colorings when |M| <= exhaustive_threshold,
    otherwise seeded simulated annealing on the feasibility-first cost.
    Returns all passing candidates, deduplicated up to A<->B swap, sorted by
    (score, lexicographic A).
    """
    if diagnostics is None:
        diagnostics = SearchDiagnostics()
    sets, truncated = enumerate_maximal_independent_sets(g, min_size=1, cap=mis_cap)
    diagnostics.truncated = truncated
    if not sets:
        return []
    max_size = max(len(s) for s in sets)
    maximum_sets = [s for s in sets if len(s) == max_size]
    diagnostics.independent_sets_examined = len(maximum_sets)

    found = {}
    for members in maximum_sets:
        m = len(members)
        if m < 2:
            continue
        feasible_masks = []
        if m <= exhaustive_threshold:
            # fix the first member in A to kill the global swap up front
            for half in range(1 << (m - 1)):
                mask = (half << 1) | 1
                if mask == (1 << m) - 1:
                    continue  # B empty
                cost = _coloring_cost(g, members, mask, g.vertex_count)
                if cost < g.vertex_count:  # no condition-II violations
                    feasible_masks.append((cost, mask))
        else:
            rng = random.Random((seed, tuple(members)).__hash__())
            mask = 0
            for i in range(m):  # balanced random start
                if rng.random() < 0.5:
                    mask |= 1 << i
            if mask in (0, (1 << m) - 1):
                mask = 1
            cost = _coloring_cost(g, members, mask, g.vertex_count)
            best = (cost, mask)
            temp0 = 2.0 * g.vertex_count
            for step in range(anneal_steps):
                temp = temp0 * (1.0 - step / anneal_steps) + 1e-3
                i = rng.randrange(m)
                cand = mask ^ (1 << i)
                if cand in (0, (1 << m) - 1):
                    continue
                cand_cost = _coloring_cost(g, members, cand, g.vertex_count)
                if cand_cost <= cost or rng.random() < math.exp((cost - cand_cost) / temp):
                    mask, cost = cand, cand_cost
                    if cost < best[0]:
                        best = (cost, mask)
                if cost < g.vertex_count:
                    feasible_masks.append((cost, mask))
            if best[0] < g.vertex_count:
                feasible_masks.append(best)

        for cost, mask in feasible_masks:
            p = _mask_to_partition(g, members, mask)
            report = check_type2(g, p)
            if not report.passes:
                continue
            key = (min(p.a, p.b), max(p.a, p.b), p.c)
            if key not in found or cost < found[key].score:
                found[key] = TypeIICandidate(p, report, float(cost))
    return sorted(found.values(), key=lambda c: (c.score, c.partition.a))


# ---------------------------------------------------------------------------
# serialization (JSON-ready dicts; see cli for file output)
# ---------------------------------------------------------------------------

def candidate_to_dict(c: TypeICandidate) -> dict:
    return {
        "kind": "type1",
        "blocks": [list(b) for b in c.cover.blocks],
        "block_flags": list(c.quotient_coloring.side_of),
        "partition": {"A": list(c.partition.a), "B": list(c.partition.b), "C": []},
        "uniform": c.uniform,
    }


def type2_to_dict(c: TypeIICandidate) -> dict:
    r = c.report
    return {
        "kind": "type2",
        "partition": {"A": list(c.partition.a), "B": list(c.partition.b),
                      "C": list(c.partition.c)},
        "report": {
            "cond_I": r.cond_i,
            "cond_I_violations": list(r.cond_i_violations),
            "cond_II": r.cond_ii,
            "cond_II_violations": list(r.cond_ii_violations),
            "cond_III": r.cond_iii,
            "c_connected": r.c_connected,
            "min_ab_degree_of_C": r.min_ab_degree_of_c,
            "max_c_degree_of_AB": r.max_c_degree_of_ab,
        },
        "score": c.score,
    }
