"""Sparse PXP and collective su(2) operators on the constrained basis.

All operators act within the independent-set space: a dressed Pauli acts as
the bare Pauli multiplied by the projectors that fix every neighbour down.
Matrix elements are generated configuration-wise with numpy, so construction
is deterministic and the constrained space is closed by construction.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .basis import Basis
from .graph import Graph, Partition3

__all__ = [
    "SparseOperator",
    "CollectiveOps",
    "ConvergenceError",
    "build_pxp",
    "build_su2",
    "build_jplus",
    "build_jminus",
    "build_jy",
    "build_jz",
    "build_raising_sum",
    "combine_j_theta",
    "apply",
    "extremal_eigenpair",
    "commutator_deviation",
    "frequency_adjusted_omegas",
]


class ConvergenceError(RuntimeError):
    def __init__(self, message, residual=None):
        super().__init__(message)
        self.residual = residual


@dataclass
class SparseOperator:
    """CSR-backed operator on the constrained space."""

    mat: sp.csr_matrix
    hermitian: bool = False

    @property
    def dim(self) -> int:
        return self.mat.shape[0]

    @property
    def dtype(self):
        return self.mat.dtype

    def matvec(self, v: np.ndarray) -> np.ndarray:
        if v.shape[0] != self.mat.shape[1]:
            raise ValueError(f"dim mismatch: operator {self.mat.shape} vs vector {v.shape}")
        m = self.mat
        if np.iscomplexobj(v) and not np.iscomplexobj(m.data):
            real = m @ np.ascontiguousarray(v.real, dtype=m.dtype)
            imag = m @ np.ascontiguousarray(v.imag, dtype=m.dtype)
            return real + 1j * imag
        return m @ v

    def adjoint(self) -> "SparseOperator":
        return SparseOperator(self.mat.conj().T.tocsr(), self.hermitian)

    def to_dense(self) -> np.ndarray:
        return self.mat.toarray()

    def max_abs_diff(self, other: "SparseOperator") -> float:
        d = (self.mat - other.mat).tocoo()
        return float(np.max(np.abs(d.data))) if d.nnz else 0.0

    def hermiticity_defect(self) -> float:
        d = (self.mat - self.mat.conj().T).tocoo()
        return float(np.max(np.abs(d.data))) if d.nnz else 0.0

    def scaled(self, factor) -> "SparseOperator":
        return SparseOperator(self.mat * factor, self.hermitian and not np.iscomplex(factor))

    def dump_triplets(self, path) -> None:
        """Debug dump, one 'row col re im' line per stored entry."""
        coo = self.mat.tocoo()
        with open(path, "w", encoding="utf-8") as fh:
            for r, c, v in zip(coo.row, coo.col, coo.data):
                z = complex(v)
                fh.write(f"{r} {c} {z.real!r} {z.imag!r}\n")


@dataclass
class CollectiveOps:
    """H together with the collective raising/Jy/Jz operators of a partition."""

    H: SparseOperator
    Jplus: SparseOperator
    Jy: SparseOperator
    Jz: SparseOperator


def apply(op: SparseOperator, v: np.ndarray) -> np.ndarray:
    return op.matvec(v)


# ---------------------------------------------------------------------------
# entry generation
# ---------------------------------------------------------------------------

def _index_dtype(dim: int):
    return np.int32 if dim < 2**31 - 1 else np.int64


def _flip_terms(basis: Basis, site: int, kind: str, src_idx=None):
    """(target_rows, source_positions) for a dressed one-site flip.

    kind 'raise': |1><0| under neighbour projectors; 'lower': |0><1| (the
    projectors are automatic for admissible sources).  Positions index into
    src_idx when given, else into the full basis.
    """
    cfg = basis.configs if src_idx is None else basis.configs[src_idx]
    bit = np.uint64(1 << site)
    if kind == "raise":
        blocked = np.uint64(basis.graph.neighbor_masks[site] | (1 << site))
        ok = (cfg & blocked) == 0
    elif kind == "lower":
        ok = (cfg & bit) != 0
    else:
        raise ValueError(kind)
    src_pos = np.nonzero(ok)[0]
    targets = cfg[src_pos] ^ bit
    rows = basis.lookup(targets)
    idt = _index_dtype(basis.dim)
    return rows.astype(idt, copy=False), src_pos.astype(idt, copy=False)


def _hop_terms(basis: Basis, j: int, k: int, src_idx=None):
    """(targets, sources) for the two-site term (raise j) o (lower k), j != k.

    Applied right to left: k is lowered first, then j is raised under its
    neighbour projectors evaluated with k already down.
    """
    cfg = basis.configs if src_idx is None else basis.configs[src_idx]
    bit_j = np.uint64(1 << j)
    bit_k = np.uint64(1 << k)
    has_k = (cfg & bit_k) != 0
    c1 = cfg ^ (has_k * bit_k)
    blocked = np.uint64(basis.graph.neighbor_masks[j] | (1 << j))
    ok = has_k & ((c1 & blocked) == 0)
    src_pos = np.nonzero(ok)[0]
    targets = c1[src_pos] | bit_j
    rows = basis.lookup(targets)
    idt = _index_dtype(basis.dim)
    return rows.astype(idt, copy=False), src_pos.astype(idt, copy=False)


def _sigma_z_diag(basis: Basis, site: int, src_idx=None) -> np.ndarray:
    """Diagonal of a dressed sigma^z: +1 site up, -1 site down with free
    neighbourhood, 0 when the projector kills the state."""
    cfg = basis.configs if src_idx is None else basis.configs[src_idx]
    bit = np.uint64(1 << site)
    nbrs = np.uint64(basis.graph.neighbor_masks[site])
    up = (cfg & bit) != 0
    free = (cfg & nbrs) == 0
    return np.where(up, 1.0, np.where(free, -1.0, 0.0))


def _sum_parts(parts, shape, dtype):
    """Pairwise tree sum of CSR parts (bounds peak memory on large builds)."""
    if not parts:
        return sp.csr_matrix(shape, dtype=dtype)
    mats = parts
    while len(mats) > 1:
        nxt = []
        for i in range(0, len(mats) - 1, 2):
            nxt.append(mats[i] + mats[i + 1])
        if len(mats) % 2:
            nxt.append(mats[-1])
        mats = nxt
    return mats[0]


def _assemble(basis, terms, shape, dtype):
    """terms: iterable of (rows, cols, weight or data array)."""
    parts = []
    for rows, cols, w in terms:
        if len(rows) == 0:
            continue
        data = np.full(len(rows), w, dtype=dtype) if np.isscalar(w) else w.astype(dtype)
        parts.append(sp.csr_matrix((data, (rows, cols)), shape=shape))
    return _sum_parts(parts, shape, dtype)


def _shape(basis: Basis, src_idx) -> tuple:
    cols = basis.dim if src_idx is None else len(src_idx)
    return (basis.dim, cols)


def frequency_adjusted_omegas(g: Graph, blocks: Sequence) -> np.ndarray:
    """Per-site drive 1/sqrt(|s(j)|) for the cover block containing each site."""
    omega = np.zeros(g.vertex_count)
    for block in blocks:
        w = 1.0 / np.sqrt(len(block))
        for v in block:
            omega[v] = w
    if np.any(omega == 0):
        raise ValueError("cover does not assign every site to a block")
    return omega


def build_pxp(g: Graph, basis: Basis, omega=None, dtype=np.float64, src_idx=None) -> SparseOperator:
    """PXP Hamiltonian sum_j omega_j sigma~x_j (uniform omega=1 by default)."""
    if omega is None:
        omega = np.ones(g.vertex_count)
    omega = np.asarray(omega, dtype=float)
    if omega.shape != (g.vertex_count,):
        raise ValueError(f"omega must have length {g.vertex_count}")
    shape = _shape(basis, src_idx)

    def terms():
        for j in range(g.vertex_count):
            if omega[j] == 0.0:
                continue
            for kind in ("raise", "lower"):
                rows, cols = _flip_terms(basis, j, kind, src_idx)
                yield rows, cols, omega[j]

    return SparseOperator(_assemble(basis, terms(), shape, dtype), hermitian=src_idx is None)


def build_jplus(g: Graph, basis: Basis, p: Partition3, dtype=np.float64, src_idx=None) -> SparseOperator:
    """J+ = sum_A sigma~+ + sum_B sigma~- + (1/2) sum_C sigma~x."""
    shape = _shape(basis, src_idx)

    def terms():
        for j in p.a:
            yield (*_flip_terms(basis, j, "raise", src_idx), 1.0)
        for j in p.b:
            yield (*_flip_terms(basis, j, "lower", src_idx), 1.0)
        for j in p.c:
            yield (*_flip_terms(basis, j, "raise", src_idx), 0.5)
            yield (*_flip_terms(basis, j, "lower", src_idx), 0.5)

    return SparseOperator(_assemble(basis, terms(), shape, dtype), hermitian=False)


def build_jminus(g: Graph, basis: Basis, p: Partition3, dtype=np.float64, src_idx=None) -> SparseOperator:
    """J- = adjoint of J+, generated directly (no transpose copies)."""
    return build_jplus(g, basis, p.swapped(), dtype=dtype, src_idx=src_idx)


def build_jy(g: Graph, basis: Basis, p: Partition3, src_idx=None) -> SparseOperator:
    """Jy = i (J- - J+) / 2; the C terms cancel, leaving dressed sigma^y sums."""
    shape = _shape(basis, src_idx)

    def terms():
        for j in p.a:
            rows, cols = _flip_terms(basis, j, "raise", src_idx)
            yield rows, cols, -0.5j
            rows, cols = _flip_terms(basis, j, "lower", src_idx)
            yield rows, cols, 0.5j
        for j in p.b:
            rows, cols = _flip_terms(basis, j, "raise", src_idx)
            yield rows, cols, 0.5j
            rows, cols = _flip_terms(basis, j, "lower", src_idx)
            yield rows, cols, -0.5j

    return SparseOperator(_assemble(basis, terms(), shape, np.complex128), hermitian=src_idx is None)


def build_jz(g: Graph, basis: Basis, p: Partition3, dtype=np.float64, src_idx=None) -> SparseOperator:
    """Jz built from its explicit expression (not from the commutator):

        Jz = 1/2 sum_{j in A} [ sigma~z_j
             + sum_{k ~ j} eps^A_k (sigma~+_j sigma~-_k + sigma~+_k sigma~-_j) ]
             - (A <-> B)

    with eps^A(k) = 1, 1/2, 0 for k in A, C, B.  Two-site terms are applied
    right to left, so the raised site's projectors see the lowered site down.
    """
    p.validate(g)
    shape = _shape(basis, src_idx)
    tags = p.side_of(g.vertex_count)  # 0 A, 1 B, 2 C
    eps_a = {0: 1.0, 2: 0.5, 1: 0.0}
    eps_b = {1: 1.0, 2: 0.5, 0: 0.0}

    def terms():
        diag = np.zeros(shape[1])
        for j in p.a:
            diag += 0.5 * _sigma_z_diag(basis, j, src_idx)
        for j in p.b:
            diag -= 0.5 * _sigma_z_diag(basis, j, src_idx)
        pos = np.nonzero(diag)[0]
        idt = _index_dtype(basis.dim)
        cols = pos.astype(idt)
        rows = cols if src_idx is None else np.asarray(src_idx)[pos].astype(idt)
        yield rows, cols, diag[pos]
        for side, sign, eps in ((p.a, 0.5, eps_a), (p.b, -0.5, eps_b)):
            for j in side:
                for k in g.neighbors[j]:
                    w = sign * eps[tags[k]]
                    if w == 0.0:
                        continue
                    yield (*_hop_terms(basis, j, k, src_idx), w)
                    yield (*_hop_terms(basis, k, j, src_idx), w)

    return SparseOperator(_assemble(basis, terms(), shape, dtype), hermitian=src_idx is None)


def build_su2(g: Graph, basis: Basis, p: Partition3, dtype=np.float64) -> CollectiveOps:
    """All collective operators for a partition; H = J+ + J- entrywise."""
    p.validate(g)
    jplus = build_jplus(g, basis, p, dtype=dtype)
    h = SparseOperator((jplus.mat + jplus.mat.T).tocsr(), hermitian=True)
    jy = build_jy(g, basis, p)
    jz = build_jz(g, basis, p, dtype=dtype)
    return CollectiveOps(H=h, Jplus=jplus, Jy=jy, Jz=jz)


def build_raising_sum(g: Graph, basis: Basis, weights: dict, dtype=np.float64) -> SparseOperator:
    """sum_j w_j sigma~+_j for the given {site: weight} map (used by Z_beta)."""
    shape = (basis.dim, basis.dim)

    def terms():
        for j, w in sorted(weights.items()):
            if w == 0.0:
                continue
            yield (*_flip_terms(basis, j, "raise"), w)

    return SparseOperator(_assemble(basis, terms(), shape, dtype), hermitian=False)


def combine_j_theta(ops: CollectiveOps, theta: float) -> SparseOperator:
    """J(theta) = cos(theta) Jz - sin(theta) Jy."""
    mat = (np.cos(theta) * ops.Jz.mat - np.sin(theta) * ops.Jy.mat).tocsr()
    return SparseOperator(mat, hermitian=True)


# ---------------------------------------------------------------------------
# eigensolving
# ---------------------------------------------------------------------------

def fix_phase(v: np.ndarray) -> np.ndarray:
    """Make the largest-magnitude amplitude real positive (global convention)."""
    k = int(np.argmax(np.abs(v)))
    a = v[k]
    if a == 0:
        return v
    if np.iscomplexobj(v):
        return v * (abs(a) / a)
    return v if a > 0 else -v


def extremal_eigenpair(op: SparseOperator, side: str = "lowest", tol: float = 1e-10,
                       maxiter: Optional[int] = None):
    """Extremal eigenpair of a hermitian operator (restarted Lanczos / ARPACK).

    Returns (eigenvalue, unit vector with fixed global phase).  The residual
    ||op v - lam v|| is verified against tol; non-convergence raises
    ConvergenceError carrying the best residual.
    """
    if side not in ("lowest", "highest"):
        raise ValueError("side must be 'lowest' or 'highest'")
    if not op.hermitian:
        raise ValueError("extremal_eigenpair requires a hermitian operator")
    n = op.dim
    if n <= 16:
        w, vecs = np.linalg.eigh(op.to_dense())
        i = 0 if side == "lowest" else -1
        return float(w[i]), fix_phase(vecs[:, i])
    which = "SA" if side == "lowest" else "LA"
    v0 = np.full(n, 1.0 / np.sqrt(n))
    mat = op.mat
    if mat.dtype == np.float32:
        mat = mat.astype(np.float64)
    arpack_tol = tol
    if np.iscomplexobj(mat.data):
        v0 = v0.astype(np.complex128)
    for _ in range(3):
        try:
            w, vecs = spla.eigsh(mat, k=1, which=which, tol=arpack_tol, v0=v0,
                                 maxiter=maxiter)
        except spla.ArpackNoConvergence as exc:
            if len(exc.eigenvalues):
                w, vecs = exc.eigenvalues, exc.eigenvectors
            else:
                raise ConvergenceError("Lanczos failed to converge", residual=None) from exc
        lam = float(w[0])
        v = vecs[:, 0]
        v = v / np.linalg.norm(v)
        resid = float(np.linalg.norm(op.matvec(v) - lam * v))
        if resid <= max(tol, 1e-13):
            return lam, fix_phase(v)
        arpack_tol = arpack_tol / 100
        v0 = v.real.astype(np.float64) if not np.iscomplexobj(mat.data) else v
    raise ConvergenceError(f"residual {resid:.2e} above tol {tol:.2e}", residual=resid)


# ---------------------------------------------------------------------------
# streamed identity checks (for spaces too large to multiply in full)
# ---------------------------------------------------------------------------

def commutator_deviation(
    jplus: SparseOperator,
    jminus: SparseOperator,
    jplus_columns: Callable,
    jminus_columns: Callable,
    jz_columns: Callable,
    dim: int,
    block: int = 100_000,
) -> float:
    """max |(1/2 [J+, J-] - Jz)|, exact, computed over column blocks.

    The *_columns(idx) callables must return the corresponding operator
    restricted to source configurations idx (the src_idx parameter of the
    builders), so no full sparse product or column slicing is ever formed.
    Every column is checked, just never all at once.
    """
    worst = 0.0
    jp, jm = jplus.mat, jminus.mat
    for start in range(0, dim, block):
        idx = np.arange(start, min(start + block, dim))
        d = 0.5 * (jp @ jminus_columns(idx).mat - jm @ jplus_columns(idx).mat) - jz_columns(idx).mat
        d = d.tocoo()
        if d.nnz:
            worst = max(worst, float(np.max(np.abs(d.data))))
    return worst
