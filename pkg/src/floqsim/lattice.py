"""Honeycomb lattices on a torus: qubits, coloured edges, plaquettes, strips.

The embedding is a brick wall with tall bricks: qubit (c, r) sits at column
c in [0, 2*length_h) and row r in [0, length_v).  Every (c, r)-(c, r+1)
vertical edge exists; horizontal edges (c, r)-(c+1, r) exist when c+r is
even.  Each hexagon then spans two columns and three rows, anchored at its
bottom-left qubit (c, r) with c+r even, and the three-colouring is simply
the anchor row mod 3, which closes on the torus because length_v is a
multiple of 3.  (A colouring varying along the horizontal axis cannot close
for the lattice sizes used here, which is why the divisibility constraints
are split the way they are.)

Vertical strips are pairs of adjacent qubit columns {2k, 2k+1}; strip 0 is
unshaded and shading alternates.  With twisted periodic boundaries the top
row wraps to the bottom row shifted by ``twist_shift`` columns.
"""

from __future__ import annotations

import enum
import io
from dataclasses import dataclass, field
from typing import Dict, FrozenSet, List, Tuple


class Boundary(enum.Enum):
    PERIODIC = "periodic"
    TWISTED_PERIODIC = "twisted_periodic"


class Orientation(enum.Enum):
    HORIZONTAL = "horizontal"
    UP = "up"        # vertical edge whose lower endpoint has c+r even
    DOWN = "down"    # vertical edge whose lower endpoint has c+r odd


class SpecError(ValueError):
    """A lattice specification violates a divisibility/closure constraint."""


@dataclass(frozen=True)
class LatticeSpec:
    length_h: int                      # plaquette columns (paper's L or d_H)
    length_v: int                      # plaquette rows (paper's 3L/2 or 3d_V/2)
    boundary: Boundary = Boundary.PERIODIC
    twist_shift: int = 2               # columns, TwistedPeriodic only

    def validate(self) -> None:
        if self.length_h < 2 or self.length_h % 2 != 0:
            raise SpecError(f"length_h must be a positive even integer, got {self.length_h}")
        if self.length_v < 3 or self.length_v % 3 != 0:
            raise SpecError(f"length_v must be a positive multiple of 3, got {self.length_v}")
        if self.length_v % 2 != 0:
            # brick parity cannot close vertically on an odd number of rows
            raise SpecError(f"length_v must be even for the torus to close, got {self.length_v}")

    @property
    def qubit_shift(self) -> int:
        """Twist shift in qubit columns (twist_shift counts plaquette columns)."""
        if self.boundary is not Boundary.TWISTED_PERIODIC:
            return 0
        return (2 * self.twist_shift) % (2 * self.length_h)

    @classmethod
    def square(cls, L: int, boundary: Boundary = Boundary.PERIODIC, twist_shift: int = 2) -> "LatticeSpec":
        """The paper's L x 3L/2 plaquette grid."""
        return cls(L, 3 * L // 2, boundary, twist_shift)


@dataclass(frozen=True)
class Edge:
    index: int
    qubits: Tuple[int, int]
    colour: int                        # 0=r, 1=g, 2=b
    orientation: Orientation


@dataclass(frozen=True)
class Plaquette:
    index: int
    anchor: Tuple[int, int]            # (c, r) of the bottom-left qubit
    qubits: Tuple[int, ...]            # 6 boundary qubits
    edges: Tuple[int, ...]             # 6 boundary edge indices
    colour: int
    # boundary edges split by colour: colour+1 triple and colour+2 triple
    edges_c1: Tuple[int, ...] = ()
    edges_c2: Tuple[int, ...] = ()


@dataclass(frozen=True)
class Strip:
    index: int
    shaded: bool
    qubits: Tuple[int, ...]


@dataclass
class HoneycombLattice:
    spec: LatticeSpec
    n_qubits: int
    coords: List[Tuple[int, int]]                 # qubit index -> (c, r)
    qubit_at: Dict[Tuple[int, int], int]
    edges: List[Edge]
    plaquettes: List[Plaquette]
    strips: List[Strip]
    edges_of_qubit: List[Tuple[int, ...]] = field(default_factory=list)
    plaqs_of_qubit: List[Tuple[int, ...]] = field(default_factory=list)
    edges_by_colour: List[Tuple[int, ...]] = field(default_factory=list)
    bipartition: Tuple[FrozenSet[int], FrozenSet[int]] = (frozenset(), frozenset())

    # -- convenience -------------------------------------------------------
    @property
    def n_cols(self) -> int:
        return 2 * self.spec.length_h

    @property
    def n_rows(self) -> int:
        return self.spec.length_v

    def shaded(self, q: int) -> bool:
        c, _ = self.coords[q]
        return (c // 2) % 2 == 1

    def strip_of_qubit(self, q: int) -> int:
        return self.coords[q][0] // 2

    def unshaded_strip_of_plaquette(self, p: int) -> int:
        """The unique unshaded strip a plaquette overlaps."""
        c = self.plaquettes[p].anchor[0]
        k0, k1 = (c // 2) % self.spec.length_h, ((c + 1) // 2) % self.spec.length_h
        return k0 if k0 % 2 == 0 else k1

    def shaded_strip_of_plaquette(self, p: int) -> int:
        c = self.plaquettes[p].anchor[0]
        k0, k1 = (c // 2) % self.spec.length_h, ((c + 1) // 2) % self.spec.length_h
        return k0 if k0 % 2 == 1 else k1

    def plaquette_xy(self, p: int) -> Tuple[float, float]:
        c, r = self.plaquettes[p].anchor
        return (c + 0.5, r + 1.0)

    def dump(self) -> str:
        """Deterministic text listing for golden-file tests."""
        out = io.StringIO()
        for q, (c, r) in enumerate(self.coords):
            out.write(f"qubit {q} {c} {r}\n")
        for e in self.edges:
            out.write(
                f"edge {e.index} {e.qubits[0]} {e.qubits[1]} "
                f"{'rgb'[e.colour]} {e.orientation.value}\n"
            )
        for p in self.plaquettes:
            members = " ".join(str(q) for q in p.qubits)
            out.write(f"plaquette {p.index} {'rgb'[p.colour]} {members}\n")
        return out.getvalue()


def build_lattice(spec: LatticeSpec) -> HoneycombLattice:
    spec.validate()
    W, H = 2 * spec.length_h, spec.length_v
    shift = spec.qubit_shift

    coords = [(c, r) for r in range(H) for c in range(W)]
    qubit_at = {cr: i for i, cr in enumerate(coords)}

    def wrap(c: int, r: int) -> Tuple[int, int]:
        # moving past the top row shifts columns under a twist
        while r >= H:
            r -= H
            c = (c + shift) % W
        return (c % W, r)

    edges: List[Edge] = []
    edge_at: Dict[Tuple[int, int, str], int] = {}

    def add_edge(q1: int, q2: int, colour: int, orientation: Orientation, key) -> int:
        idx = len(edges)
        edges.append(Edge(idx, (q1, q2), colour, orientation))
        edge_at[key] = idx
        return idx

    for r in range(H):
        for c in range(W):
            q = qubit_at[(c, r)]
            # vertical edge upward from (c, r); colour (r+1) mod 3
            up = qubit_at[wrap(c, r + 1)]
            ori = Orientation.UP if (c + r) % 2 == 0 else Orientation.DOWN
            add_edge(q, up, (r + 1) % 3, ori, ("v", c, r))
            # horizontal edge to the right when c+r even; colour (r+2) mod 3
            if (c + r) % 2 == 0:
                right = qubit_at[((c + 1) % W, r)]
                add_edge(q, right, (r + 2) % 3, Orientation.HORIZONTAL, ("h", c, r))

    plaquettes: List[Plaquette] = []
    for r in range(H):
        for c in range(W):
            if (c + r) % 2 != 0:
                continue
            cols = [(c, 0), ((c + 1) % W, 0)]
            qs = []
            for dr in range(3):
                for base_c, _ in cols:
                    qs.append(qubit_at[wrap(base_c, r + dr)])
            # qs order: (c,r),(c+1,r),(c,r+1),(c+1,r+1),(c,r+2),(c+1,r+2)
            c2 = (c + 1) % W
            ec1 = (  # colour (r+1) mod 3: side verticals at dr=0, top horizontal
                edge_at[("v", c, r)],
                edge_at[("v", c2, r)],
                edge_at[_hkey(c, r + 2, W, H, shift)],
            )
            ec2 = (  # colour (r+2) mod 3: side verticals at dr=1, bottom horizontal
                edge_at[_vkey(c, r + 1, W, H, shift)],
                edge_at[_vkey(c2, r + 1, W, H, shift)],
                edge_at[("h", c, r)],
            )
            plaquettes.append(
                Plaquette(
                    index=len(plaquettes),
                    anchor=(c, r),
                    qubits=tuple(qs),
                    edges=ec1 + ec2,
                    colour=r % 3,
                    edges_c1=ec1,
                    edges_c2=ec2,
                )
            )

    strips = []
    for k in range(spec.length_h):
        qs = tuple(
            qubit_at[(c, r)] for c in (2 * k, 2 * k + 1) for r in range(H)
        )
        strips.append(Strip(k, k % 2 == 1, qs))

    lat = HoneycombLattice(
        spec=spec,
        n_qubits=W * H,
        coords=coords,
        qubit_at=qubit_at,
        edges=edges,
        plaquettes=plaquettes,
        strips=strips,
    )
    _index_lattice(lat)
    return lat


def _vkey(c: int, r: int, W: int, H: int, shift: int):
    if r >= H:
        r -= H
        c = (c + shift) % W
    return ("v", c % W, r)


def _hkey(c: int, r: int, W: int, H: int, shift: int):
    if r >= H:
        r -= H
        c = (c + shift) % W
    return ("h", c % W, r)


def _index_lattice(lat: HoneycombLattice) -> None:
    n = lat.n_qubits
    eoq: List[List[int]] = [[] for _ in range(n)]
    for e in lat.edges:
        eoq[e.qubits[0]].append(e.index)
        eoq[e.qubits[1]].append(e.index)
    lat.edges_of_qubit = [tuple(v) for v in eoq]

    poq: List[List[int]] = [[] for _ in range(n)]
    for p in lat.plaquettes:
        for q in p.qubits:
            poq[q].append(p.index)
    lat.plaqs_of_qubit = [tuple(v) for v in poq]

    by_col: List[List[int]] = [[], [], []]
    for e in lat.edges:
        by_col[e.colour].append(e.index)
    lat.edges_by_colour = [tuple(v) for v in by_col]

    # bipartition by (c + r) parity; edges always connect opposite parities
    setC = frozenset(q for q, (c, r) in enumerate(lat.coords) if (c + r) % 2 == 0)
    setD = frozenset(range(n)) - setC
    lat.bipartition = (setC, setD)


# -- validation --------------------------------------------------------------

@dataclass
class ValidationReport:
    checks: Dict[str, bool]

    @property
    def ok(self) -> bool:
        return all(self.checks.values())

    def failures(self) -> List[str]:
        return [k for k, v in self.checks.items() if not v]


def validate(lat: HoneycombLattice) -> ValidationReport:
    checks: Dict[str, bool] = {}
    n, ne, np_ = lat.n_qubits, len(lat.edges), len(lat.plaquettes)
    checks["euler"] = n - ne + np_ == 0
    checks["edge_count"] = 2 * ne == 3 * n
    checks["plaquette_count"] = 2 * np_ == n
    # recompute incidence from the edge list rather than trusting caches
    degree = [0] * n
    for e in lat.edges:
        for q in e.qubits:
            if 0 <= q < n:
                degree[q] += 1
    checks["trivalent"] = all(d == 3 for d in degree)

    counts = [0, 0, 0]
    for p in lat.plaquettes:
        counts[p.colour] += 1
    checks["colour_balance"] = counts[0] == counts[1] == counts[2]

    # every edge borders exactly two plaquettes of the two other colours,
    # and neighbouring plaquettes never share a colour
    present = {e.index for e in lat.edges}
    edge_plaqs: Dict[int, List[int]] = {e.index: [] for e in lat.edges}
    dangling = False
    for p in lat.plaquettes:
        for e in p.edges:
            if e not in present:
                dangling = True
                continue
            edge_plaqs[e].append(p.index)
    ok_adj = not dangling and all(len(v) == 2 for v in edge_plaqs.values())
    colour_of = {ed.index: ed.colour for ed in lat.edges}
    ok_col = True
    for e, (p1, p2) in ((e, v) for e, v in edge_plaqs.items() if len(v) == 2):
        c1, c2 = lat.plaquettes[p1].colour, lat.plaquettes[p2].colour
        if c1 == c2 or colour_of[e] in (c1, c2):
            ok_col = False
            break
    checks["edge_borders_two_plaquettes"] = ok_adj
    checks["three_colouring"] = ok_adj and ok_col

    checks["plaquettes_hexagonal"] = all(
        len(set(p.qubits)) == 6 and len(set(p.edges)) == 6 for p in lat.plaquettes
    )
    checks["qubit_on_three_plaquettes"] = all(
        len(v) == 3 and len({lat.plaquettes[p].colour for p in v}) == 3
        for v in lat.plaqs_of_qubit
    )

    strip_qubits = [q for s in lat.strips for q in s.qubits]
    checks["strips_partition"] = sorted(strip_qubits) == list(range(n))
    checks["strips_alternate"] = all(
        s.shaded == (s.index % 2 == 1) for s in lat.strips
    )

    C, D = lat.bipartition
    ok_bip = all(
        (e.qubits[0] in C) != (e.qubits[1] in C) for e in lat.edges
    )
    checks["bipartition"] = ok_bip and C.isdisjoint(D) and len(C | D) == n
    return ValidationReport(checks)


def strips(lat: HoneycombLattice) -> List[Strip]:
    return list(lat.strips)
