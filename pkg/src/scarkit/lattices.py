"""Named lattice generators with periodic boundaries.

Every generator fixes a deterministic vertex numbering (row-major over unit
cells, documented within-cell order) and attaches coordinates in which all
blockade bonds have the same length, so covers and states are reproducible
across runs.  Coordinates are plot metadata; algorithms only see the graph.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

from .graph import Graph, Partition3

__all__ = [
    "LatticeSpec",
    "LATTICE_NAMES",
    "UnsupportedBoundaryError",
    "build_lattice",
    "vertex_count_for",
    "canonical_type2_partition",
    "parse_lattice_token",
]

S3 = math.sqrt(3.0)
COS15 = math.cos(math.pi / 12)
SIN15 = math.sin(math.pi / 12)

LATTICE_NAMES = (
    "chain",
    "ladder-fig5b",
    "chain-linkedC-fig5c",
    "square",
    "hexagonal",
    "shastry-sutherland",
    "ruby",
    "triangular",
    "kagome",
    "face-centered-square",
    "asanoha-quasi2d",
    "pyrochlore-quasi2d",
)

# generators that make sense with open boundaries (quasi-1D only)
_OPEN_OK = {"chain", "ladder-fig5b", "chain-linkedC-fig5c"}

_SITES_PER_CELL = {
    "chain": 1,
    "ladder-fig5b": 3,
    "chain-linkedC-fig5c": 4,
    "square": 1,
    "hexagonal": 2,
    "shastry-sutherland": 4,
    "ruby": 6,
    "triangular": 1,
    "kagome": 3,
    "face-centered-square": 2,
    "asanoha-quasi2d": 3,
    "pyrochlore-quasi2d": 5,
}


class UnsupportedBoundaryError(ValueError):
    """Open boundaries requested for a torus-only generator."""


@dataclass(frozen=True)
class LatticeSpec:
    name: str
    dims: tuple  # (N_x, N_y) cell counts
    boundary: str = "periodic"

    def __post_init__(self):
        if self.name not in LATTICE_NAMES:
            raise ValueError(f"unknown lattice {self.name!r}; known: {', '.join(LATTICE_NAMES)}")
        nx, ny = self.dims
        if nx < 1 or ny < 1:
            raise ValueError(f"dims must be >= (1,1), got {self.dims}")
        if self.boundary not in ("periodic", "open"):
            raise ValueError(f"boundary must be periodic or open, got {self.boundary!r}")
        if self.boundary == "open" and self.name not in _OPEN_OK:
            raise UnsupportedBoundaryError(
                f"{self.name} is defined on the torus only; open boundaries unsupported"
            )

    @property
    def periodic(self) -> bool:
        return self.boundary == "periodic"


def vertex_count_for(spec: LatticeSpec) -> int:
    nx, ny = spec.dims
    return _SITES_PER_CELL[spec.name] * nx * ny


def parse_lattice_token(token: str) -> LatticeSpec:
    """Parse 'name:NxM:pbc' (also 'name:N' for quasi-1D, boundary defaults pbc)."""
    parts = token.split(":")
    if len(parts) < 2:
        raise ValueError(f"bad lattice token {token!r}; expected name:NxM[:pbc|obc]")
    name = parts[0]
    dims = parts[1].lower().split("x")
    nx = int(dims[0])
    ny = int(dims[1]) if len(dims) > 1 else 1
    boundary = "periodic"
    if len(parts) > 2:
        boundary = {"pbc": "periodic", "obc": "open", "periodic": "periodic", "open": "open"}[parts[2]]
    return LatticeSpec(name, (nx, ny), boundary)


class _Builder:
    """Edge/position accumulator that drops self-loops and duplicate edges."""

    def __init__(self, n):
        self.n = n
        self.edges = set()
        self.pos = [None] * n

    def edge(self, i, j):
        if i != j:
            self.edges.add((min(i, j), max(i, j)))

    def place(self, v, *coords):
        self.pos[v] = tuple(float(c) for c in coords)

    def graph(self, periods=None):
        positions = None if any(p is None for p in self.pos) else tuple(self.pos)
        return Graph.from_edges(self.n, self.edges, positions=positions, periods=periods)


def build_lattice(spec: LatticeSpec) -> Graph:
    """Build the named lattice. See each generator for numbering conventions."""
    return _GENERATORS[spec.name](spec)


# --- quasi-1D -------------------------------------------------------------

def _chain(spec):
    nx = spec.dims[0]
    b = _Builder(nx)
    for i in range(nx):
        b.place(i, i, 0.0)
        if i + 1 < nx or spec.periodic:
            b.edge(i, (i + 1) % nx)
    return b.graph(periods=((nx, 0.0),) if spec.periodic else None)


def _ladder_fig5b(spec):
    """Fig. 5b ladder: cell k -> A=3k (top), B=3k+1 (bottom), C=3k+2 (middle).

    Each C sits between two A and two B sites; geometry is reconstructed from
    the figure caption (equilateral triangles, all bonds length 1).
    """
    nx = spec.dims[0]
    b = _Builder(3 * nx)
    h = S3 / 2
    for k in range(nx):
        a, bb, c = 3 * k, 3 * k + 1, 3 * k + 2
        b.place(a, k, h)
        b.place(bb, k, -h)
        b.place(c, k + 0.5, 0.0)
        b.edge(c, a)
        b.edge(c, bb)
        if k + 1 < nx or spec.periodic:
            b.edge(c, 3 * ((k + 1) % nx))
            b.edge(c, 3 * ((k + 1) % nx) + 1)
    return b.graph(periods=((nx, 0.0),) if spec.periodic else None)


def _chain_linkedc(spec):
    """Fig. 5c chain: pattern A C B C with consecutive C sites joined.

    Cell k -> A=4k, C=4k+1, B=4k+2, C=4k+3; the C-C links turn the chain into
    a row of corner-sharing triangles (vertical expansion gives kagome).
    """
    nx = spec.dims[0]
    n = 4 * nx
    b = _Builder(n)
    h = S3 / 2
    for k in range(nx):
        b.place(4 * k, 2 * k, 0.0)
        b.place(4 * k + 1, 2 * k + 0.5, h)
        b.place(4 * k + 2, 2 * k + 1, 0.0)
        b.place(4 * k + 3, 2 * k + 1.5, h)
        for t in range(4):
            j = 4 * k + t
            if j + 1 < n or spec.periodic:
                b.edge(j, (j + 1) % n)
        b.edge(4 * k + 1, 4 * k + 3)
        if k + 1 < nx or spec.periodic:
            b.edge(4 * k + 3, (4 * (k + 1) + 1) % n)
    return b.graph(periods=((2 * nx, 0.0),) if spec.periodic else None)


# --- 2D torus lattices ------------------------------------------------------

def _square(spec):
    nx, ny = spec.dims
    b = _Builder(nx * ny)

    def vid(x, y):
        return (y % ny) * nx + (x % nx)

    for y in range(ny):
        for x in range(nx):
            b.place(vid(x, y), x, y)
            b.edge(vid(x, y), vid(x + 1, y))
            b.edge(vid(x, y), vid(x, y + 1))
    return b.graph(periods=((nx, 0.0), (0.0, ny)))


def _hexagonal(spec):
    """Honeycomb torus, 2 sites/cell: A=2c, B=2c+1 with c = y*N_x + x.

    B(x,y) bonds to A(x,y), A(x+1,y), A(x,y+1).  For even N_y the vertical
    identification is sheared by c_shear = -N_y/2 cells, which makes the torus
    rectangular; this is the geometry whose 4x4 dimer covers match the known
    count (449 covers, 9 with bipartite quotient).  Odd N_y uses the plain
    rhombic wrap.
    """
    nx, ny = spec.dims
    shear = (-(ny // 2)) % nx if ny % 2 == 0 else 0
    b = _Builder(2 * nx * ny)
    a1 = (S3, 0.0)
    a2 = (S3 / 2, 1.5)
    delta = (S3 / 2, 0.5)

    def cell(x, y):
        w, y = divmod(y, ny)
        x = (x - w * shear) % nx
        return y * nx + x

    for y in range(ny):
        for x in range(nx):
            a = 2 * cell(x, y)
            bb = a + 1
            px, py = x * a1[0] + y * a2[0], x * a1[1] + y * a2[1]
            b.place(a, px, py)
            b.place(bb, px + delta[0], py + delta[1])
            b.edge(bb, a)
            b.edge(bb, 2 * cell(x + 1, y))
            b.edge(bb, 2 * cell(x, y + 1))
    t1 = (nx * a1[0], nx * a1[1])
    t2 = (shear * a1[0] + ny * a2[0], shear * a1[1] + ny * a2[1])
    return b.graph(periods=(t1, t2))


def _shastry_sutherland(spec):
    """Shastry-Sutherland (square-triangular) torus, 4 sites/cell.

    Cell (cx,cy) holds the square-lattice sites (2cx,2cy), (2cx+1,2cy),
    (2cx,2cy+1), (2cx+1,2cy+1) as s0..s3; bonds are the square NN bonds plus
    one diagonal dimer per crossed plaquette (s0-s3 inside the cell and the
    anti-diagonal between neighboring cells).  Coordinates are the snub-square
    embedding, in which every bond has length 1.
    """
    nx, ny = spec.dims
    b = _Builder(4 * nx * ny)
    d = math.sqrt(2.0 + S3)
    local = (
        (0.0, 0.0),
        (COS15, -SIN15),
        (-SIN15, COS15),
        (math.sqrt(2) / 2, math.sqrt(2) / 2),
    )

    def vid(cx, cy, t):
        return 4 * ((cy % ny) * nx + (cx % nx)) + t

    for cy in range(ny):
        for cx in range(nx):
            for t in range(4):
                b.place(vid(cx, cy, t), cx * d + local[t][0], cy * d + local[t][1])
            s0, s1, s2, s3 = (vid(cx, cy, t) for t in range(4))
            # square bonds
            b.edge(s0, s1)
            b.edge(s2, s3)
            b.edge(s0, s2)
            b.edge(s1, s3)
            b.edge(s1, vid(cx + 1, cy, 0))
            b.edge(s3, vid(cx + 1, cy, 2))
            b.edge(s2, vid(cx, cy + 1, 0))
            b.edge(s3, vid(cx, cy + 1, 1))
            # orthogonal dimers
            b.edge(s0, s3)
            b.edge(vid(cx + 1, cy, 2), vid(cx, cy + 1, 1))
    return b.graph(periods=((nx * d, 0.0), (0.0, ny * d)))


def _ruby(spec):
    """Ruby lattice (3.4.6.4 tiling) torus, 6 sites/cell.

    Sites are the corners of a unit hexagon per cell (angles 30 + 60k deg,
    k = 0..5); bonds are the hexagon sides plus the triangles joining three
    neighboring hexagons.  The 2x2 torus has 24 sites and 8 face triangles.
    """
    nx, ny = spec.dims
    b = _Builder(6 * nx * ny)
    L = 1.0 + S3
    a1 = (L, 0.0)
    a2 = (L / 2, L * S3 / 2)

    def vid(x, y, k):
        return 6 * ((y % ny) * nx + (x % nx)) + k

    for y in range(ny):
        for x in range(nx):
            cx, cy = x * a1[0] + y * a2[0], x * a1[1] + y * a2[1]
            for k in range(6):
                ang = math.pi / 6 + k * math.pi / 3
                b.place(vid(x, y, k), cx + math.cos(ang), cy + math.sin(ang))
                b.edge(vid(x, y, k), vid(x, y, (k + 1) % 6))
            up = (vid(x, y, 0), vid(x + 1, y, 2), vid(x, y + 1, 4))
            dn = (vid(x, y, 1), vid(x - 1, y + 1, 5), vid(x, y + 1, 3))
            for t in (up, dn):
                b.edge(t[0], t[1])
                b.edge(t[1], t[2])
                b.edge(t[2], t[0])
    return b.graph(periods=((nx * a1[0], 0.0), (ny * a2[0], ny * a2[1])))


def _triangular(spec):
    nx, ny = spec.dims
    b = _Builder(nx * ny)

    def vid(x, y):
        return (y % ny) * nx + (x % nx)

    for y in range(ny):
        for x in range(nx):
            b.place(vid(x, y), x + 0.5 * y, y * S3 / 2)
            for (dx, dy) in ((1, 0), (0, 1), (-1, 1)):
                b.edge(vid(x, y), vid(x + dx, y + dy))
    return b.graph(periods=((nx, 0.0), (ny / 2, ny * S3 / 2)))


def _kagome_cells(nx, ny):
    def vid(x, y, k):
        return 3 * ((y % ny) * nx + (x % nx)) + k

    up = lambda x, y: (vid(x, y, 0), vid(x, y, 1), vid(x, y, 2))
    dn = lambda x, y: (vid(x, y, 1), vid(x + 1, y, 0), vid(x + 1, y - 1, 2))
    return vid, up, dn


def _kagome(spec):
    """Kagome torus, 3 sites/cell: s0=(0,0), s1=(1,0), s2=(1/2, sqrt3/2) + cell offset."""
    nx, ny = spec.dims
    b = _Builder(3 * nx * ny)
    a1 = (2.0, 0.0)
    a2 = (1.0, S3)
    local = ((0.0, 0.0), (1.0, 0.0), (0.5, S3 / 2))
    vid, up, dn = _kagome_cells(nx, ny)
    for y in range(ny):
        for x in range(nx):
            for k in range(3):
                b.place(vid(x, y, k), x * a1[0] + y * a2[0] + local[k][0],
                        x * a1[1] + y * a2[1] + local[k][1])
            for tri in (up(x, y), dn(x, y)):
                b.edge(tri[0], tri[1])
                b.edge(tri[1], tri[2])
                b.edge(tri[2], tri[0])
    return b.graph(periods=((nx * a1[0], 0.0), (ny * a2[0], ny * a2[1])))


def _face_centered_square(spec):
    """Square lattice plus face centers; bonds only center-corner (length 1/sqrt2)."""
    nx, ny = spec.dims
    b = _Builder(2 * nx * ny)

    def corner(x, y):
        return 2 * ((y % ny) * nx + (x % nx))

    for y in range(ny):
        for x in range(nx):
            c = corner(x, y) + 1
            b.place(corner(x, y), x, y)
            b.place(c, x + 0.5, y + 0.5)
            b.edge(c, corner(x, y))
            b.edge(c, corner(x + 1, y))
            b.edge(c, corner(x, y + 1))
            b.edge(c, corner(x + 1, y + 1))
    return b.graph(periods=((nx, 0.0), (0.0, ny)))


# --- quasi-2D tetrahedral lattices ------------------------------------------

_APEX_H = math.sqrt(2.0 / 3.0)  # regular-tetrahedron apex height over unit face


def _asanoha(spec):
    """Quasi-2D asanoha: triangular base with one apex per face (up/down alternate).

    Base sites come first (triangular numbering); then per cell the up-face
    apex and the down-face apex.  Apexes bond to their face's three base sites.
    """
    nx, ny = spec.dims
    nb = nx * ny
    b = _Builder(3 * nx * ny)

    def vid(x, y):
        return (y % ny) * nx + (x % nx)

    def bpos(x, y):
        return (x + 0.5 * y, y * S3 / 2)

    for y in range(ny):
        for x in range(nx):
            b.place(vid(x, y), *bpos(x, y), 0.0)
            for (dx, dy) in ((1, 0), (0, 1), (-1, 1)):
                b.edge(vid(x, y), vid(x + dx, y + dy))
    apex = nb
    for y in range(ny):
        for x in range(nx):
            faces = (
                (((x, y), (x + 1, y), (x, y + 1)), _APEX_H),       # up
                (((x + 1, y), (x, y + 1), (x + 1, y + 1)), -_APEX_H),  # down
            )
            for corners, z in faces:
                cx = sum(bpos(*c)[0] for c in corners) / 3
                cy = sum(bpos(*c)[1] for c in corners) / 3
                b.place(apex, cx, cy, z)
                for c in corners:
                    b.edge(apex, vid(*c))
                apex += 1
    return b.graph(periods=((nx, 0.0, 0.0), (ny / 2, ny * S3 / 2, 0.0)))


def _pyrochlore(spec):
    """Quasi-2D pyrochlore: kagome base with one apex per triangle (up/down alternate)."""
    nx, ny = spec.dims
    nb = 3 * nx * ny
    b = _Builder(5 * nx * ny)
    a1 = (2.0, 0.0)
    a2 = (1.0, S3)
    local = ((0.0, 0.0), (1.0, 0.0), (0.5, S3 / 2))
    vid, up, dn = _kagome_cells(nx, ny)

    def bpos(x, y, k):
        return (x * a1[0] + y * a2[0] + local[k][0], x * a1[1] + y * a2[1] + local[k][1])

    for y in range(ny):
        for x in range(nx):
            for k in range(3):
                b.place(vid(x, y, k), *bpos(x, y, k), 0.0)
            for tri in (up(x, y), dn(x, y)):
                b.edge(tri[0], tri[1])
                b.edge(tri[1], tri[2])
                b.edge(tri[2], tri[0])
    apex = nb
    for y in range(ny):
        for x in range(nx):
            # corner coordinates written out unwrapped so centroids are local
            up_xy = ((x, y, 0), (x, y, 1), (x, y, 2))
            dn_xy = ((x, y, 1), (x + 1, y, 0), (x + 1, y - 1, 2))
            for corners, z in ((up_xy, _APEX_H), (dn_xy, -_APEX_H)):
                cx = sum(bpos(*c)[0] for c in corners) / 3
                cy = sum(bpos(*c)[1] for c in corners) / 3
                b.place(apex, cx, cy, z)
                for c in corners:
                    b.edge(apex, vid(*c))
                apex += 1
    return b.graph(periods=((nx * a1[0], 0.0, 0.0), (ny * a2[0], ny * a2[1], 0.0)))


_GENERATORS = {
    "chain": _chain,
    "ladder-fig5b": _ladder_fig5b,
    "chain-linkedC-fig5c": _chain_linkedc,
    "square": _square,
    "hexagonal": _hexagonal,
    "shastry-sutherland": _shastry_sutherland,
    "ruby": _ruby,
    "triangular": _triangular,
    "kagome": _kagome,
    "face-centered-square": _face_centered_square,
    "asanoha-quasi2d": _asanoha,
    "pyrochlore-quasi2d": _pyrochlore,
}


def canonical_type2_partition(spec: LatticeSpec) -> Partition3:
    """The standard three-set partition for lattices that have one.

    These are the partitions used in the reference figures: apexes vs base for
    the tetrahedral lattices, alternating independent-set rows for kagome and
    triangular, center checkerboard for the face-centered square, and the
    A C B C pattern for the quasi-1D family.
    """
    nx, ny = spec.dims
    name = spec.name
    if name == "chain":
        if nx % 4:
            raise ValueError("chain type-II pattern A C B C needs N_x divisible by 4")
        a = tuple(range(0, nx, 4))
        b = tuple(range(2, nx, 4))
        c = tuple(range(1, nx, 2))
        return Partition3(a, b, c)
    if name == "ladder-fig5b":
        return Partition3(
            tuple(range(0, 3 * nx, 3)),
            tuple(range(1, 3 * nx, 3)),
            tuple(range(2, 3 * nx, 3)),
        )
    if name == "chain-linkedC-fig5c":
        return Partition3(
            tuple(range(0, 4 * nx, 4)),
            tuple(range(2, 4 * nx, 4)),
            tuple(v for v in range(4 * nx) if v % 2 == 1),
        )
    if name == "kagome":
        if ny % 2:
            raise ValueError("kagome A/B rows need N_y even")
        a, b, c = [], [], []
        for y in range(ny):
            for x in range(nx):
                base = 3 * (y * nx + x)
                (a if y % 2 == 0 else b).append(base + 2)
                c.extend((base, base + 1))
        return Partition3(tuple(a), tuple(b), tuple(c))
    if name == "triangular":
        if nx % 3 or ny % 2:
            raise ValueError("triangular partition needs N_x divisible by 3 and N_y even")
        a, b, c = [], [], []
        for y in range(ny):
            for x in range(nx):
                v = y * nx + x
                if (x - y) % 3 == 0:
                    (a if y % 2 == 0 else b).append(v)
                else:
                    c.append(v)
        return Partition3(tuple(a), tuple(b), tuple(c))
    if name == "face-centered-square":
        if nx % 2 or ny % 2:
            raise ValueError("face-centered-square checkerboard needs even dims")
        a, b, c = [], [], []
        for y in range(ny):
            for x in range(nx):
                base = 2 * (y * nx + x)
                c.append(base)
                (a if (x + y) % 2 == 0 else b).append(base + 1)
        return Partition3(tuple(a), tuple(b), tuple(c))
    if name in ("asanoha-quasi2d", "pyrochlore-quasi2d"):
        per_cell = _SITES_PER_CELL[name]
        nb = (per_cell - 2) * nx * ny
        ups = tuple(range(nb, per_cell * nx * ny, 2))
        downs = tuple(range(nb + 1, per_cell * nx * ny, 2))
        return Partition3(ups, downs, tuple(range(nb)))
    raise ValueError(f"no canonical type-II partition for lattice {name!r}")
