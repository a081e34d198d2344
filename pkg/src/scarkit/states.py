"""Initial-state builders: Fock states, product states, dimer-Neel states for
clique covers, the collective ground states GS_Y / GS_Z / GS(theta), and the
deformed families Y_gamma and Z_beta.

All builders return unit vectors with the global phase fixed so the
largest-magnitude amplitude is real positive.
"""
from __future__ import annotations

import numpy as np

from .basis import Basis, popcounts
from .graph import Bipartition, Graph, Partition3
from .operators import (
    CollectiveOps,
    SparseOperator,
    build_raising_sum,
    combine_j_theta,
    extremal_eigenpair,
    fix_phase,
)
from .search import TypeICandidate

__all__ = [
    "DegenerateStateError",
    "fock_state",
    "all_down",
    "neel_state",
    "max_occupied",
    "product_state",
    "dimer_neel",
    "y_gamma",
    "z_beta",
    "gs_theta",
    "gs_y_spinors",
    "overlap",
    "export_amplitudes",
]


class DegenerateStateError(ValueError):
    """All amplitude was removed by the blockade constraint."""


def overlap(a: np.ndarray, b: np.ndarray) -> complex:
    return complex(np.vdot(a, b))


def fock_state(basis: Basis, config: int, dtype=np.complex128) -> np.ndarray:
    v = np.zeros(basis.dim, dtype=dtype)
    v[basis.index_of(config)] = 1.0
    return v


def all_down(basis: Basis, dtype=np.complex128) -> np.ndarray:
    return fock_state(basis, 0, dtype)


def neel_state(basis: Basis, coloring: Bipartition, flag: int = 0, dtype=np.complex128) -> np.ndarray:
    """All sites of one bipartition side up (flag-0 side by default)."""
    config = 0
    for v, s in enumerate(coloring.side_of):
        if s == flag:
            config |= 1 << v
    return fock_state(basis, config, dtype)


def max_occupied(basis: Basis) -> int:
    """Admissible configuration with maximum up-spin count, smallest value on ties."""
    occ = popcounts(basis.configs)
    best = int(np.max(occ))
    return int(basis.configs[np.nonzero(occ == best)[0][0]])


def product_state(basis: Basis, spinors, dtype=np.complex128):
    """Site-wise product state projected to the constrained space.

    spinors is a length-n sequence of (down_amp, up_amp), each normalized.
    Returns (state, retained_weight): the weight is the squared norm kept by
    the projection (1 when up amplitudes never collide on adjacent sites).
    """
    n = basis.graph.vertex_count
    if len(spinors) != n:
        raise ValueError(f"need {n} spinors, got {len(spinors)}")
    for down, up in spinors:
        if abs(abs(down) ** 2 + abs(up) ** 2 - 1.0) > 1e-12:
            raise ValueError("spinor not normalized")
    amp = np.ones(basis.dim, dtype=np.complex128)
    for j, (down, up) in enumerate(spinors):
        up_here = (basis.configs >> np.uint64(j)) & np.uint64(1)
        amp *= np.where(up_here.astype(bool), complex(up), complex(down))
    weight = float(np.real(np.vdot(amp, amp)))
    if weight <= 1e-24:
        raise DegenerateStateError("blockade projection removed all amplitude")
    return fix_phase(amp / np.sqrt(weight)).astype(dtype), weight


def dimer_neel(basis: Basis, cand: TypeICandidate, side: str = "B_excited",
               dtype=np.complex128) -> np.ndarray:
    """Product over cover blocks: W states on the excited side, all-down on the other.

    The W state of a block is the equal-amplitude superposition of its
    single-excitation configurations, so the result has prod |s_b| nonzero
    amplitudes of equal magnitude.  Unit norm is asserted at runtime.
    """
    if side not in ("A_excited", "B_excited"):
        raise ValueError("side must be 'A_excited' or 'B_excited'")
    excited_flag = 0 if side == "A_excited" else 1
    cand.cover.validate(basis.graph)
    cfg = basis.configs
    ok = np.ones(basis.dim, dtype=bool)
    norm_factor = 1.0
    for block, flag in zip(cand.cover.blocks, cand.quotient_coloring.side_of):
        mask = np.uint64(basis.site_mask(block))
        cnt = popcounts(cfg & mask)
        if flag == excited_flag:
            ok &= cnt == 1
            norm_factor *= len(block)
        else:
            ok &= cnt == 0
    idx = np.nonzero(ok)[0]
    if len(idx) != round(norm_factor):
        raise AssertionError(
            f"dimer-Neel support {len(idx)} != {round(norm_factor)}; cover blocks interact"
        )
    v = np.zeros(basis.dim, dtype=dtype)
    v[idx] = 1.0 / np.sqrt(norm_factor)
    return v


def gs_y_spinors(g: Graph, p: Partition3, gamma: float = 1.0):
    """Spinor list for Y_gamma: A sites (1, i*gamma)/sqrt(1+gamma^2), B sites the
    conjugate, C sites pinned down.  gamma=1 is the analytic GS_Y."""
    nrm = 1.0 / np.sqrt(1.0 + gamma * gamma)
    spin = [None] * g.vertex_count
    for v in p.a:
        spin[v] = (nrm, 1j * gamma * nrm)
    for v in p.b:
        spin[v] = (nrm, -1j * gamma * nrm)
    for v in p.c:
        spin[v] = (1.0, 0.0)
    if any(s is None for s in spin):
        raise ValueError("partition does not cover all vertices")
    return spin


def y_gamma(g: Graph, basis: Basis, p: Partition3, gamma: float, dtype=np.complex128):
    """Deformed GS_Y product state; returns (state, retained_weight)."""
    p.validate(g)
    return product_state(basis, gs_y_spinors(g, p, gamma), dtype=dtype)


def z_beta(g: Graph, basis: Basis, p: Partition3, beta: float, dtype=np.complex128) -> np.ndarray:
    """(sum_B sigma~+ + beta sum_C sigma~+)^|B| applied to the vacuum, normalized.

    Computed by repeated sparse application (the dressed raising operators do
    not commute across B and C).
    """
    p.validate(g)
    weights = {j: 1.0 for j in p.b}
    weights.update({j: float(beta) for j in p.c})
    raiser = build_raising_sum(g, basis, weights)
    v = np.zeros(basis.dim)
    v[basis.index_of(0)] = 1.0
    for _ in range(len(p.b)):
        v = raiser.matvec(v)
    nrm = np.linalg.norm(v)
    if nrm <= 1e-300:
        raise DegenerateStateError("Z_beta has zero norm (over-constrained partition)")
    return fix_phase(v / nrm).astype(dtype)


def gs_theta(ops: CollectiveOps, theta: float, tol: float = 1e-10) -> np.ndarray:
    """Ground state of J(theta) = cos(theta) Jz - sin(theta) Jy."""
    _, vec = extremal_eigenpair(combine_j_theta(ops, theta), side="lowest", tol=tol)
    return vec


def export_amplitudes(basis: Basis, v: np.ndarray, path) -> None:
    """Two-column text dump (configuration integer, amplitude) for cross-checking."""
    with open(path, "w", encoding="utf-8") as fh:
        for cfg, amp in zip(basis.configs, v):
            z = complex(amp)
            fh.write(f"{int(cfg)} {z.real!r}{'+' if z.imag >= 0 else '-'}{abs(z.imag)!r}j\n")
