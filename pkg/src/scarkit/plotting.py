"""Figure rendering for report bundles.

Every CLI run that produces delimited output also renders the matching
figures to PNG next to it.  Sublattice colors follow the usual convention:
A blue, B red, C black.
"""
from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .graph import Graph, Partition3

__all__ = [
    "plot_graph",
    "plot_candidates",
    "plot_fidelity",
    "plot_occupations",
    "plot_spectrum",
    "plot_objective_curve",
]

A_COLOR, B_COLOR, C_COLOR = "#1f77b4", "#d62728", "#111111"


def _drawable_edges(g: Graph):
    """Edges whose endpoints are genuinely close in the stored coordinates
    (wrapped torus bonds are skipped rather than drawn across the figure)."""
    if g.positions is None:
        return []
    pos = np.array([p[:2] for p in g.positions])
    lengths = []
    for (i, j) in g.sorted_edges():
        lengths.append(np.linalg.norm(pos[i] - pos[j]))
    if not lengths:
        return []
    cutoff = 1.5 * min(lengths)
    return [(i, j) for (i, j), L in zip(g.sorted_edges(), lengths) if L <= cutoff]


def _vertex_colors(g: Graph, partition: Partition3 = None):
    if partition is None:
        return ["#555555"] * g.vertex_count
    tags = partition.side_of(g.vertex_count)
    return [(A_COLOR, B_COLOR, C_COLOR)[t] for t in tags]


def plot_graph(g: Graph, path, partition: Partition3 = None, blocks=None, title=None):
    fig, ax = plt.subplots(figsize=(5, 4.5))
    _draw_graph(ax, g, partition, blocks)
    if title:
        ax.set_title(title)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def _draw_graph(ax, g, partition=None, blocks=None):
    if g.positions is None:
        ax.text(0.5, 0.5, "no coordinates", ha="center")
        return
    pos = np.array([p[:2] for p in g.positions])
    for (i, j) in _drawable_edges(g):
        ax.plot(pos[[i, j], 0], pos[[i, j], 1], "-", color="#bbbbbb", lw=1, zorder=1)
    if blocks:
        for block in blocks:
            bs = sorted(block)
            for a in range(len(bs)):
                for b in range(a + 1, len(bs)):
                    i, j = bs[a], bs[b]
                    if np.linalg.norm(pos[i] - pos[j]) < 2.0:
                        ax.plot(pos[[i, j], 0], pos[[i, j], 1], "-", color="#2ca02c",
                                lw=3.5, zorder=2, solid_capstyle="round")
    colors = _vertex_colors(g, partition)
    is3d = len(g.positions[0]) == 3
    sizes = [30 + (25 if is3d and g.positions[v][2] != 0 else 0) for v in range(g.vertex_count)]
    ax.scatter(pos[:, 0], pos[:, 1], c=colors, s=sizes, zorder=3, edgecolors="white", lw=0.5)
    ax.set_aspect("equal")
    ax.axis("off")


def plot_candidates(g: Graph, candidates, path, max_panels: int = 9):
    """Grid of cover/partition drawings, one candidate per panel."""
    n = min(len(candidates), max_panels)
    if n == 0:
        fig, ax = plt.subplots(figsize=(4, 3))
        ax.text(0.5, 0.5, "no candidates", ha="center")
        ax.axis("off")
        fig.savefig(path, dpi=150)
        plt.close(fig)
        return
    ncols = int(np.ceil(np.sqrt(n)))
    nrows = int(np.ceil(n / ncols))
    fig, axes = plt.subplots(nrows, ncols, figsize=(3.2 * ncols, 3.0 * nrows), squeeze=False)
    for k in range(nrows * ncols):
        ax = axes[k // ncols][k % ncols]
        if k >= n:
            ax.axis("off")
            continue
        cand = candidates[k]
        blocks = getattr(getattr(cand, "cover", None), "blocks", None)
        _draw_graph(ax, g, cand.partition, blocks)
        ax.set_title(f"candidate {k}", fontsize=9)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def plot_fidelity(times, series: dict, path, title=None):
    fig, ax = plt.subplots(figsize=(6, 3.5))
    for label, f in series.items():
        ax.plot(times, f, lw=1.2, label=label)
    ax.set_xlabel(r"$t$  [$1/\Omega$]")
    ax.set_ylabel(r"$|\langle\psi(0)|\psi(t)\rangle|^2$")
    ax.set_ylim(-0.02, 1.02)
    if len(series) > 1:
        ax.legend(fontsize=8)
    if title:
        ax.set_title(title)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def plot_occupations(times, n_a, n_b, n_c, path, title=None):
    fig, ax = plt.subplots(figsize=(6, 3.5))
    ax.plot(times, n_a, color=A_COLOR, lw=1.2, label=r"$\mathcal{A}$")
    ax.plot(times, n_b, color=B_COLOR, lw=1.2, label=r"$\mathcal{B}$")
    if n_c is not None and len(n_c):
        ax.plot(times, n_c, color=C_COLOR, lw=1.2, label=r"$\mathcal{C}$")
    ax.set_xlabel(r"$t$  [$1/\Omega$]")
    ax.set_ylabel(r"$\langle n_j\rangle$")
    ax.legend(fontsize=8)
    if title:
        ax.set_title(title)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def plot_spectrum(energies, overlaps, entropies, top_idx, path, title=None):
    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(9, 3.5))
    floor = 1e-16
    ax1.semilogy(energies, np.maximum(overlaps, floor), ".", ms=3, color="#777777")
    if len(top_idx):
        ax1.semilogy(energies[top_idx], np.maximum(overlaps[top_idx], floor), "o",
                     ms=5, color=B_COLOR)
    ax1.set_xlabel("E")
    ax1.set_ylabel(r"$|\langle\psi|E\rangle|^2$")
    if entropies is not None:
        ax2.plot(energies, entropies, ".", ms=3, color="#777777")
        if len(top_idx):
            ax2.plot(energies[top_idx], np.asarray(entropies)[top_idx], "o", ms=5, color=B_COLOR)
        ax2.set_xlabel("E")
        ax2.set_ylabel(r"$S_{\mathrm{ent}}$")
    else:
        ax2.axis("off")
    if title:
        fig.suptitle(title)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def plot_objective_curve(params, values, best, path, xlabel="parameter"):
    fig, ax = plt.subplots(figsize=(5, 3.2))
    order = np.argsort(params)
    ax.plot(np.asarray(params)[order], np.asarray(values)[order], "o-", ms=4)
    ax.axvline(best, color=B_COLOR, ls="--", lw=1)
    ax.set_xlabel(xlabel)
    ax.set_ylabel("first revival fidelity")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
