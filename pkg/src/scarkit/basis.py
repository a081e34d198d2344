"""Enumeration of the blockade-constrained Hilbert space.

Basis states are the independent sets of the blockade graph, stored as
uint64 bit masks (bit j = site j excited) in ascending numeric order, so the
ordinal of a configuration is reproducible everywhere.
"""
from __future__ import annotations

import numpy as np

from .graph import Graph

__all__ = ["Basis", "BasisSizeError", "enumerate_basis", "popcounts", "config_string"]

DEFAULT_STATE_CAP = 1 << 27


class BasisSizeError(RuntimeError):
    """Independent-set count exceeded the configured cap."""


def popcounts(configs: np.ndarray) -> np.ndarray:
    return np.bitwise_count(configs)


def config_string(config: int, n: int) -> str:
    """Site-0-first bit string, e.g. 0b0101 on 4 sites -> '1010'."""
    return "".join("1" if (int(config) >> j) & 1 else "0" for j in range(n))


class Basis:
    """Sorted admissible configurations of a graph plus ordinal lookup."""

    def __init__(self, graph: Graph, configs: np.ndarray):
        self.graph = graph
        self.configs = configs
        self.dim = len(configs)

    def index_of(self, config: int) -> int:
        i = int(np.searchsorted(self.configs, np.uint64(config)))
        if i >= self.dim or self.configs[i] != np.uint64(config):
            raise KeyError(f"configuration {config:#x} not admissible")
        return i

    def lookup(self, configs: np.ndarray) -> np.ndarray:
        """Vectorized ordinal lookup; every input must be admissible."""
        idx = np.searchsorted(self.configs, configs)
        if np.any(idx >= self.dim) or np.any(self.configs[idx] != configs):
            raise KeyError("inadmissible configuration in lookup")
        return idx

    def contains(self, config: int) -> bool:
        i = int(np.searchsorted(self.configs, np.uint64(config)))
        return i < self.dim and self.configs[i] == np.uint64(config)

    def occupations(self) -> np.ndarray:
        return popcounts(self.configs)

    def site_mask(self, vertices) -> int:
        m = 0
        for v in vertices:
            m |= 1 << v
        return m

    def __len__(self):
        return self.dim

    def __repr__(self):
        return f"Basis(n_sites={self.graph.vertex_count}, dim={self.dim})"


def enumerate_basis(g: Graph, cap: int = DEFAULT_STATE_CAP) -> Basis:
    """All independent sets of g (vacuum included), ascending as integers.

    Vertices are added in id order; at each step the surviving configurations
    are extended by the new vertex wherever none of its lower-id neighbours is
    excited.  The concatenation order keeps the array sorted, so no final sort
    is needed.
    """
    n = g.vertex_count
    if n > 63:
        raise BasisSizeError(f"{n} sites exceed the 63-bit configuration limit")
    nbr_lo = [0] * n
    for (i, j) in g.edges:
        nbr_lo[max(i, j)] |= 1 << min(i, j)
    configs = np.zeros(1, dtype=np.uint64)
    for v in range(n):
        mask = np.uint64(nbr_lo[v])
        extendable = configs[(configs & mask) == 0]
        total = len(configs) + len(extendable)
        if total > cap:
            raise BasisSizeError(
                f"state cap {cap} exceeded after vertex {v} ({total} partial states)"
            )
        configs = np.concatenate([configs, extendable | np.uint64(1 << v)])
    return Basis(g, configs)
