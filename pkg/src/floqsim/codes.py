"""Memory-experiment circuit builders for the four Floquet code families.

Schedules
---------
Subround t measures every edge of colour t mod 3.  CSS alternates X/Z
check types (period 6), the deformed code alternates A/B types where the
basis on a qubit is the CSS basis conjugated by Hadamard iff the qubit is
in a shaded strip, and the two honeycomb variants use a fixed basis per
edge colour (P6) or per edge orientation (XYZ2), giving period 3.

Detectors
---------
A plaquette of colour k is measured whenever edges of colour k+1 or k+2
are measured: the product of the three same-coloured boundary checks
equals the plaquette operator for CSS-type codes, while the honeycomb
codes need the (k+1, k+2) pair of consecutive subrounds.  Comparing
consecutive measurements of a surviving plaquette operator gives the bulk
detectors; partial comparisons against the initial product state and the
final data readout give boundary candidates, which are kept exactly when
the tableau simulator certifies them deterministic.  A handful of
boundary detectors in the honeycomb families come out deterministically
-1 because of Y-type operator phases; the builder then solves a small
GF(2) system for init/readout sign flips (compiled to H/S gates) that
restore +1, and re-certifies.

Observables
-----------
Each circuit tracks one member of an anticommuting logical pair: the
vertical observable uses the code's Z-like flavour and the horizontal one
the X-like flavour, with initialization and final readout in the matching
per-qubit basis.  The tracked string is updated through the schedule by
multiplying in just-measured checks so that it always commutes with the
next subround; those check records plus the final readout on the string's
support form the OBSERVABLE_INCLUDE.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field, replace
from typing import Dict, FrozenSet, List, Optional, Sequence, Set, Tuple

from .circuit import Circuit, Instruction, RecordRef, PAIR_ORDER
from .lattice import (
    Boundary,
    HoneycombLattice,
    LatticeSpec,
    Orientation,
    SpecError,
    build_lattice,
)
from .pauli import PauliString


class BuildError(RuntimeError):
    """The builder could not produce a certified-deterministic circuit."""


class CodeFamily(enum.Enum):
    X3Z3 = "x3z3"
    CSS = "css"
    P6 = "p6"
    XYZ2 = "xyz2"

    @property
    def period(self) -> int:
        return 6 if self in (CodeFamily.X3Z3, CodeFamily.CSS) else 3

    @property
    def two_types(self) -> bool:
        return self in (CodeFamily.X3Z3, CodeFamily.CSS)


class NoiseModel(enum.Enum):
    NONE = "none"
    CODE_CAPACITY = "code_capacity"
    SDEM3 = "sdem3"


@dataclass(frozen=True)
class NoiseSpec:
    model: NoiseModel = NoiseModel.NONE
    p: float = 0.0
    eta: float = 0.5           # math.inf is allowed and handled exactly

    def validate(self) -> None:
        if not (0.0 <= self.p <= 1.0):
            raise SpecError(f"p must be in [0, 1], got {self.p}")
        if not (self.eta >= 0.0):
            raise SpecError(f"eta must be nonnegative (or inf), got {self.eta}")


def noise_probs_1q(noise: NoiseSpec) -> Tuple[float, float, float]:
    """(pX, pY, pZ) of the single-qubit biased channel; sums to p."""
    p, eta = noise.p, noise.eta
    if math.isinf(eta):
        return (0.0, 0.0, p)
    pxy = p / (2.0 * (eta + 1.0))
    return (pxy, pxy, p * eta / (eta + 1.0))


def zeta_of_eta(eta: float) -> float:
    if math.isinf(eta):
        return 1.0
    f = eta / (1.0 + eta)
    return 0.6 * f * f + 0.4 * f


def noise_probs_2q(noise: NoiseSpec) -> Tuple[float, ...]:
    """15 probabilities in the fixed IX..ZZ order; sums to p."""
    p, eta = noise.p, noise.eta
    z = zeta_of_eta(eta)
    heavy = z * p / 3.0
    light = (1.0 - z) * p / 12.0
    out = []
    for lab in PAIR_ORDER:
        out.append(heavy if lab in ("IZ", "ZI", "ZZ") else light)
    return tuple(out)


class ObservableKind(enum.Enum):
    HORIZONTAL = "horizontal"
    VERTICAL = "vertical"


@dataclass(frozen=True)
class MemoryExperimentSpec:
    family: CodeFamily
    lattice: LatticeSpec
    observable: ObservableKind
    rounds: int                     # QEC rounds; 1 round = 6 subrounds
    noise: NoiseSpec = NoiseSpec()

    def validate(self) -> None:
        self.lattice.validate()
        self.noise.validate()
        if self.rounds < 2:
            raise SpecError("rounds must be >= 2 so bulk detectors exist")
        if (
            self.lattice.boundary is Boundary.TWISTED_PERIODIC
            and self.family is not CodeFamily.X3Z3
        ):
            raise SpecError("twisted boundaries are only supported for the X3Z3 family")


# -- schedules ----------------------------------------------------------------

_P6_BASIS = {0: "X", 1: "Y", 2: "Z"}
_ORI_BASIS = {Orientation.HORIZONTAL: "Z", Orientation.UP: "X", Orientation.DOWN: "Y"}


def check_basis(family: CodeFamily, lat: HoneycombLattice, edge_index: int,
                subround: int, qubit: int) -> str:
    """Basis of the subround's check operator on one of its qubits."""
    e = lat.edges[edge_index]
    if family is CodeFamily.P6:
        return _P6_BASIS[e.colour]
    if family is CodeFamily.XYZ2:
        return _ORI_BASIS[e.orientation]
    xtype = subround % 2 == 0          # X/A at even subrounds
    if family is CodeFamily.CSS:
        return "X" if xtype else "Z"
    # X3Z3: CSS conjugated by H on shaded qubits
    if lat.shaded(qubit):
        return "Z" if xtype else "X"
    return "X" if xtype else "Z"


def check_operator(family: CodeFamily, lat: HoneycombLattice, edge_index: int,
                   subround: int) -> PauliString:
    e = lat.edges[edge_index]
    return PauliString({
        q: check_basis(family, lat, edge_index, subround, q) for q in e.qubits
    })


@dataclass(frozen=True)
class Subround:
    colour: int
    label: str
    checks: Tuple[Tuple[int, PauliString], ...]    # (edge index, operator)


def schedule(family: CodeFamily, lat: HoneycombLattice) -> List[Subround]:
    """One period of the measurement schedule."""
    out = []
    for t in range(family.period):
        colour = t % 3
        if family is CodeFamily.P6:
            label = f"{'rgb'[colour]}:{_P6_BASIS[colour]}{_P6_BASIS[colour]}"
        elif family is CodeFamily.XYZ2:
            label = f"{'rgb'[colour]}:orient"
        elif family is CodeFamily.CSS:
            label = f"{'rgb'[colour]}{'X' if t % 2 == 0 else 'Z'}"
        else:
            label = f"{'rgb'[colour]}{'A' if t % 2 == 0 else 'B'}"
        checks = tuple(
            (e, check_operator(family, lat, e, t))
            for e in lat.edges_by_colour[colour]
        )
        out.append(Subround(colour, label, checks))
    return out


# -- flavour maps and logical representatives ---------------------------------

def flavour_basis(family: CodeFamily, lat: HoneycombLattice, q: int, flavour: str) -> str:
    """Per-qubit basis of the Z-like ('Z') or X-like ('X') uniform flavour."""
    if family is CodeFamily.CSS or family is CodeFamily.P6:
        return flavour
    if family is CodeFamily.X3Z3:
        if lat.shaded(q):
            return "X" if flavour == "Z" else "Z"
        return flavour
    # XYZ2: X-like flavour follows the first subround's (red) edge basis,
    # Z-like follows the last subround's (blue) edge basis
    colour = 0 if flavour == "X" else 2
    for e in lat.edges_of_qubit[q]:
        if lat.edges[e].colour == colour:
            return _ORI_BASIS[lat.edges[e].orientation]
    raise BuildError(f"qubit {q} has no colour-{colour} edge")


def _plaquette_operator(family: CodeFamily, lat: HoneycombLattice, p: int,
                        type_index: int) -> PauliString:
    """Plaquette stabiliser; for two-type families type 0 is A/X, 1 is B/Z."""
    plq = lat.plaquettes[p]
    if family.two_types:
        flavour = "X" if type_index == 0 else "Z"
        return PauliString({q: flavour_basis(family, lat, q, flavour) for q in plq.qubits})
    ops = None
    for e in plq.edges:
        sub = {q: check_basis(family, lat, e, _colour_subround(lat.edges[e].colour), q)
               for q in lat.edges[e].qubits}
        term = PauliString(sub)
        ops = term if ops is None else ops * term
    return PauliString({q: ops.basis(q) for q in plq.qubits})


def _colour_subround(colour: int) -> int:
    # any subround measuring this colour; basis maps for P6/XYZ2 ignore it
    return colour


def _rep_support_vertical(lat: HoneycombLattice, column: int) -> List[int]:
    qs = []
    for r in range(lat.n_rows):
        if r % 3 != 1:
            qs.append(lat.qubit_at[(column, r)])
    return qs


def _rep_support_vertical_twisted(lat: HoneycombLattice, column: int) -> List[int]:
    W = lat.n_cols
    shift = lat.spec.qubit_shift
    cols = []
    c = column
    while True:
        cols.append(c)
        c = (c + shift) % W
        if c == column:
            break
    qs = []
    for cc in cols:
        for r in range(lat.n_rows):
            if r % 3 != 1:
                qs.append(lat.qubit_at[(cc, r)])
    return qs


def _rep_support_horizontal(lat: HoneycombLattice, row: int) -> List[int]:
    return [lat.qubit_at[(c, row)] for c in range(lat.n_cols)]


def logical_representatives_t0(
    family: CodeFamily, lat: HoneycombLattice
) -> Tuple[PauliString, PauliString]:
    """(horizontal, vertical) anticommuting pair just before subround 0."""
    wv = {q: flavour_basis(family, lat, q, "Z") for q in range(lat.n_qubits)}
    wh = {q: flavour_basis(family, lat, q, "X") for q in range(lat.n_qubits)}
    if lat.spec.boundary is Boundary.TWISTED_PERIODIC:
        v_support = _rep_support_vertical_twisted(lat, 0)
    else:
        v_support = _rep_support_vertical(lat, 0)
    v_rep = PauliString({q: wv[q] for q in v_support})
    h_rep = PauliString({q: wh[q] for q in _rep_support_horizontal(lat, 0)})
    subs = schedule(family, lat)
    if not _rep_valid(family, lat, v_rep, subs):
        raise BuildError("vertical representative fails validity checks")
    if not _rep_valid(family, lat, h_rep, subs) or h_rep.commutes(v_rep):
        h_rep = _solve_rep(family, lat, wh, subs, anti_with=v_rep)
    if h_rep.commutes(v_rep):
        raise BuildError("failed to build an anticommuting logical pair")
    return h_rep, v_rep


def _rep_valid(family: CodeFamily, lat: HoneycombLattice, rep: PauliString,
               subs: Sequence[Subround]) -> bool:
    for _, op in subs[0].checks:
        if not rep.commutes(op):
            return False
    types = (0, 1) if family.two_types else (0,)
    for p in range(len(lat.plaquettes)):
        for ty in types:
            if not rep.commutes(_plaquette_operator(family, lat, p, ty)):
                return False
    return True


def _solve_rep(family: CodeFamily, lat: HoneycombLattice, basis_map: Dict[int, str],
               subs: Sequence[Subround], anti_with: PauliString) -> PauliString:
    """GF(2) solve for a support S with basis_map bases satisfying:
    commute with subround-0 checks and all plaquette operators, anticommute
    with ``anti_with``."""
    n = lat.n_qubits
    rows: List[int] = []
    rhs: List[int] = []

    def add_row(coeff_qubits: List[int], b: int):
        m = 0
        for q in coeff_qubits:
            m |= 1 << q
        rows.append(m)
        rhs.append(b)

    for _, op in subs[0].checks:
        qs = [q for q in op.support
              if basis_map[q] != op.basis(q)]
        add_row(qs, 0)
    types = (0, 1) if family.two_types else (0,)
    for p in range(len(lat.plaquettes)):
        for ty in types:
            op = _plaquette_operator(family, lat, p, ty)
            qs = [q for q in op.support if basis_map[q] != op.basis(q)]
            add_row(qs, 0)
    qs = [q for q in anti_with.support if basis_map[q] != anti_with.basis(q)]
    add_row(qs, 1)

    # Gaussian elimination over GF(2); variables are qubit indicators
    pivots: Dict[int, Tuple[int, int]] = {}
    for m, b in zip(rows, rhs):
        while m:
            hb = m.bit_length() - 1
            if hb not in pivots:
                pivots[hb] = (m, b)
                break
            pm, pb = pivots[hb]
            m ^= pm
            b ^= pb
        else:
            if b:
                raise BuildError("logical representative system is infeasible")
    # back-substitute a particular solution; each pivot row's non-pivot bits
    # are strictly lower, so ascending order finalizes dependencies first
    sol = 0
    for hb in sorted(pivots):
        m, b = pivots[hb]
        acc = b
        mm = m & ~(1 << hb)
        while mm:
            low = mm & -mm
            if sol & low:
                acc ^= 1
            mm ^= low
        if acc:
            sol |= 1 << hb
    support = [q for q in range(n) if (sol >> q) & 1]
    return PauliString({q: basis_map[q] for q in support})


def evolve_representative(
    family: CodeFamily,
    lat: HoneycombLattice,
    rep: PauliString,
    t_from: int,
    t_to: int,
) -> Tuple[PauliString, List[Tuple[int, int]]]:
    """Advance a representative through subrounds [t_from, t_to).

    Returns the evolved representative and the list of (subround, edge)
    checks multiplied in along the way.
    """
    subs = schedule(family, lat)
    period = family.period
    updates: List[Tuple[int, int]] = []
    for t in range(t_from, t_to):
        cur = subs[t % period]
        for _, op in cur.checks:
            if not rep.commutes(op):
                raise BuildError(f"representative anticommutes with a subround-{t} check")
        nxt = subs[(t + 1) % period]
        chosen = _prepare_step(lat, rep, cur, nxt)
        for e in chosen:
            op = dict(cur.checks)[e]
            rep = rep * op
            updates.append((t, e))
    return rep, updates


def _prepare_step(lat: HoneycombLattice, rep: PauliString, cur: Subround,
                  nxt: Subround) -> List[int]:
    """Checks of ``cur`` to multiply into rep so it commutes with ``nxt``.

    The union of the two subrounds' edges is 2-regular (one edge of each
    colour per qubit), i.e. disjoint cycles; the GF(2) system decouples
    per cycle and is solved by walking it.
    """
    cur_ops = dict(cur.checks)
    nxt_ops = dict(nxt.checks)
    cur_edge_of_qubit: Dict[int, int] = {}
    for e in cur_ops:
        for q in lat.edges[e].qubits:
            cur_edge_of_qubit[q] = e
    need: Dict[int, int] = {}
    for e, op in nxt_ops.items():
        need[e] = 0 if rep.commutes(op) else 1
    if not any(need.values()):
        return []

    x: Dict[int, int] = {}
    visited: Set[int] = set()
    for start in cur_ops:
        if start in visited:
            continue
        # walk the alternating cycle starting from this cur-edge
        cycle: List[int] = [start]
        vals: List[int] = [0]
        visited.add(start)
        e = start
        q = lat.edges[e].qubits[0]
        parity_check = 0
        while True:
            # step across the nxt-edge at qubit q
            ne = _edge_of_colour_at(lat, q, nxt.colour)
            b = need[ne]
            parity_check ^= b
            q2 = _other_qubit(lat, ne, q)
            e2 = cur_edge_of_qubit[q2]
            if e2 in visited:
                if parity_check:
                    raise BuildError("inconsistent logical-frame update cycle")
                break
            vals.append(vals[-1] ^ b)
            cycle.append(e2)
            visited.add(e2)
            e = e2
            q = _other_qubit(lat, e2, q2)
        # two solutions per cycle (complement); pick the one that leaves the
        # lighter operator on the cycle's qubits, so representatives follow
        # their string instead of growing
        def local_weight(flip: int) -> int:
            acc: Optional[PauliString] = None
            for ce, cv in zip(cycle, vals):
                if cv ^ flip:
                    acc = cur_ops[ce] if acc is None else acc * cur_ops[ce]
            qubits = {q for ce in cycle for q in lat.edges[ce].qubits}
            w = 0
            for q in qubits:
                b = rep.basis(q)
                a = acc.basis(q) if acc is not None else "I"
                if b != a:      # symplectic XOR is identity iff the bases agree
                    w += 1
            return w

        w0, w1 = local_weight(0), local_weight(1)
        n_sel0 = sum(vals)
        n_sel1 = len(vals) - n_sel0
        if (w1, n_sel1) < (w0, n_sel0):
            flip = 1
        else:
            flip = 0
        for ce, cv in zip(cycle, vals):
            x[ce] = cv ^ flip
    return [e for e, v in x.items() if v]


def _edge_of_colour_at(lat: HoneycombLattice, q: int, colour: int) -> int:
    for e in lat.edges_of_qubit[q]:
        if lat.edges[e].colour == colour:
            return e
    raise BuildError(f"qubit {q} has no colour-{colour} edge")


def _other_qubit(lat: HoneycombLattice, e: int, q: int) -> int:
    a, b = lat.edges[e].qubits
    return b if q == a else a


def logical_operators(family: CodeFamily, lat: HoneycombLattice, t: int
                      ) -> Tuple[PauliString, PauliString]:
    """(horizontal, vertical) representatives after subround t-1 (t=0: initial)."""
    h0, v0 = logical_representatives_t0(family, lat)
    h, _ = evolve_representative(family, lat, h0, 0, t)
    v, _ = evolve_representative(family, lat, v0, 0, t)
    return h, v


# -- plaquette measurement bookkeeping ----------------------------------------

@dataclass
class _Event:
    subround: int
    records: List[int]            # absolute record indices so far
    complete: bool


@dataclass
class DetectorInfo:
    index: int                    # final detector index in the circuit
    records: FrozenSet[int]
    kind: str                     # bulk | init | final | edge_init | edge_final
    type_index: int               # 0 = A/X-like, 1 = B/Z-like, -1 = n/a
    plaquette: int                # -1 for edge detectors
    edge: int                     # -1 for plaquette detectors
    subround: int                 # subround at which the detector forms (T for finals)
    coords: Tuple[float, float, float]


@dataclass
class MemoryCircuit:
    """A built memory experiment plus the structure tests need."""

    spec: MemoryExperimentSpec
    lattice: HoneycombLattice
    circuit: Circuit
    detectors: List[DetectorInfo]
    observable_records: FrozenSet[int]
    n_subrounds: int
    check_record: Dict[Tuple[int, int], int]      # (subround, edge) -> record
    readout_record: Dict[int, int]                # qubit -> record
    tracked_rep_t0: PauliString
    metadata: Dict[str, object] = field(default_factory=dict)

    def detector_strip(self, d: int) -> int:
        """Strip a detector belongs to: A-type objects pair within unshaded
        strips and B-type within shaded ones, so assign each detector the
        unique strip of the matching shading that its support touches."""
        info = self.detectors[d]
        if info.plaquette >= 0:
            if info.type_index == 1:
                return self.lattice.shaded_strip_of_plaquette(info.plaquette)
            return self.lattice.unshaded_strip_of_plaquette(info.plaquette)
        e = self.lattice.edges[info.edge]
        ks = {self.lattice.strip_of_qubit(q) for q in e.qubits}
        if len(ks) == 1 or info.type_index < 0:
            return min(ks)
        want_shaded = info.type_index == 1
        for k in ks:
            if (k % 2 == 1) == want_shaded:
                return k
        return min(ks)


# -- the builder ----------------------------------------------------------------

@dataclass
class _Candidate:
    records: FrozenSet[int]
    kind: str
    type_index: int
    plaquette: int
    edge: int
    subround: int
    coords: Tuple[float, float, float]
    order: Tuple


_KIND_RANK = {"bulk": 0, "edge_init": 1, "init": 2, "edge_final": 3, "final": 4}

# structural results reusable across noise models
_STRUCT_CACHE: Dict[Tuple, Dict[str, object]] = {}


def _struct_key(spec: MemoryExperimentSpec) -> Tuple:
    ls = spec.lattice
    return (
        spec.family,
        ls.length_h,
        ls.length_v,
        ls.boundary,
        ls.twist_shift if ls.boundary is Boundary.TWISTED_PERIODIC else 0,
        spec.observable,
        spec.rounds,
    )


class _Builder:
    def __init__(self, spec: MemoryExperimentSpec):
        spec.validate()
        self.spec = spec
        self.lat = build_lattice(spec.lattice)
        self.family = spec.family
        self.T = 6 * spec.rounds
        self.subs = schedule(spec.family, self.lat)
        flavour = "Z" if spec.observable is ObservableKind.VERTICAL else "X"
        self.flavour = flavour
        self.W = {
            q: flavour_basis(spec.family, self.lat, q, flavour)
            for q in range(self.lat.n_qubits)
        }

    # record layout ------------------------------------------------------
    def _layout_records(self) -> None:
        lat, T = self.lat, self.T
        self.check_record: Dict[Tuple[int, int], int] = {}
        k = 0
        for t in range(T):
            for e, _ in self.subs[t % self.family.period].checks:
                self.check_record[(t, e)] = k
                k += 1
        self.readout_record: Dict[int, int] = {}
        for basis in ("Z", "X", "Y"):
            for q in range(lat.n_qubits):
                if self.W[q] == basis:
                    self.readout_record[q] = k
                    k += 1
        self.n_records = k

    # tracked logical ------------------------------------------------------
    def _track_logical(self) -> None:
        h0, v0 = logical_representatives_t0(self.family, self.lat)
        rep0 = v0 if self.spec.observable is ObservableKind.VERTICAL else h0
        rep_T, updates = evolve_representative(self.family, self.lat, rep0, 0, self.T)
        for q in rep_T.support:
            if rep_T.basis(q) != self.W[q]:
                raise BuildError(
                    "tracked logical does not return to the readout flavour"
                )
        obs = set()
        for t, e in updates:
            obs ^= {self.check_record[(t, e)]}
        for q in rep_T.support:
            obs ^= {self.readout_record[q]}
        self.tracked_rep_t0 = rep0
        self.observable_records = frozenset(obs)

    # candidates -----------------------------------------------------------
    def _instances(self) -> List[Tuple[int, int]]:
        if self.family.two_types:
            return [(p, ty) for p in range(len(self.lat.plaquettes)) for ty in (0, 1)]
        return [(p, -1) for p in range(len(self.lat.plaquettes))]

    def _event_records(self, p: int, t: int) -> List[int]:
        """Records of the measurement slot of plaquette p at subround t."""
        plq = self.lat.plaquettes[p]
        kt = t % 3
        edges = plq.edges_c1 if kt == (plq.colour + 1) % 3 else plq.edges_c2
        return [self.check_record[(t, e)] for e in edges]

    def _plaquette_candidates(self) -> List[_Candidate]:
        out: List[_Candidate] = []
        lat, T, fam = self.lat, self.T, self.family
        for p, ty in self._instances():
            colour = lat.plaquettes[p].colour
            x, y = lat.plaquette_xy(p)
            readouts = [self.readout_record[q] for q in lat.plaquettes[p].qubits]

            def cand(records, kind, t):
                out.append(
                    _Candidate(
                        frozenset(records), kind, ty, p, -1, t,
                        (x, y, float(t)),
                        (_KIND_RANK[kind], t, p, ty),
                    )
                )

            if fam.two_types:
                prev: Optional[List[int]] = None
                killed_before_first = False
                for t in range(T):
                    if t % 3 == colour and t % 2 != ty:
                        if prev is None:
                            killed_before_first = True
                        prev = None
                        continue
                    if t % 2 == ty and t % 3 != colour:
                        cur = self._event_records(p, t)
                        if prev is not None:
                            cand(prev + cur, "bulk", t)
                        elif not killed_before_first:
                            cand(cur, "init", t)
                        prev = cur
                # final boundary: last event survives to readout?
                if prev is not None:
                    t_last = max(
                        t for t in range(T)
                        if t % 2 == ty and t % 3 != colour
                    )
                    killed_after = any(
                        t % 3 == colour and t % 2 != ty
                        for t in range(t_last + 1, T)
                    )
                    if not killed_after:
                        cand(prev + readouts, "final", T)
            else:
                prev = None
                first_full_seen = False
                for t in range(T):
                    if t % 3 != (colour + 2) % 3:
                        continue
                    if t == 0:
                        half = self._event_records(p, 0)
                        cand(half, "init", 0)
                        continue
                    cur = self._event_records(p, t - 1) + self._event_records(p, t)
                    if prev is not None:
                        cand(prev + cur, "bulk", t)
                    elif not first_full_seen:
                        cand(cur, "init", t)
                        if (colour + 2) % 3 == 0:
                            # the t=0 half belongs to the same comparison
                            pass
                    first_full_seen = True
                    prev = cur
                if prev is not None:
                    cand(prev + readouts, "final", T)
                # dangling half pair at the end
                if (T - 1) % 3 == (colour + 1) % 3:
                    half = self._event_records(p, T - 1)
                    cand(half + readouts, "final", T)
                    if prev is not None:
                        cand(prev + half + readouts, "final", T)
        return out

    def _edge_candidates(self) -> List[_Candidate]:
        out: List[_Candidate] = []
        lat, T = self.lat, self.T

        def midpoint(e: int) -> Tuple[float, float]:
            (c1, r1) = lat.coords[lat.edges[e].qubits[0]]
            (c2, r2) = lat.coords[lat.edges[e].qubits[1]]
            dx = 0.5 if abs(c1 - c2) == 1 else 0.0
            dy = 0.5 if abs(r1 - r2) == 1 else 0.0
            return (min(c1, c2) + dx, min(r1, r2) + dy)

        for e, _ in self.subs[0].checks:
            x, y = midpoint(e)
            out.append(
                _Candidate(
                    frozenset([self.check_record[(0, e)]]),
                    "edge_init", 0 if self.family.two_types else -1, -1, e, 0,
                    (x, y, 0.0), (_KIND_RANK["edge_init"], 0, e, 0),
                )
            )
        for t in (T - 1, T - 2):
            ty = (t % 2) if self.family.two_types else -1
            for e, _ in self.subs[t % self.family.period].checks:
                q1, q2 = lat.edges[e].qubits
                recs = [
                    self.check_record[(t, e)],
                    self.readout_record[q1],
                    self.readout_record[q2],
                ]
                x, y = midpoint(e)
                out.append(
                    _Candidate(
                        frozenset(recs), "edge_final", ty, -1, e, T,
                        (x, y, float(T)), (_KIND_RANK["edge_final"], T - t, e, 0),
                    )
                )
        return out

    # skeleton circuit -------------------------------------------------------
    def _emit(
        self,
        noise: NoiseSpec,
        detectors: Optional[List[DetectorInfo]] = None,
        fix_init: Optional[Dict[int, str]] = None,
        fix_final: Optional[Dict[int, str]] = None,
        include_observable: bool = True,
    ) -> Circuit:
        lat, T = self.lat, self.T
        circ = Circuit()
        for q in range(lat.n_qubits):
            c, r = lat.coords[q]
            circ.append("QUBIT_COORDS", (float(c), float(r)), (q,))
        zs = [q for q in range(lat.n_qubits) if self.W[q] == "Z"]
        xs = [q for q in range(lat.n_qubits) if self.W[q] == "X"]
        ys = [q for q in range(lat.n_qubits) if self.W[q] == "Y"]
        if zs or ys:
            circ.append("R", (), tuple(zs + ys))
        if xs:
            circ.append("RX", (), tuple(xs))
        if ys:
            circ.append("H", (), tuple(ys))
            circ.append("S", (), tuple(ys))
        if fix_init:
            _emit_pauli_gates(circ, fix_init)
        sdem = noise.model is NoiseModel.SDEM3 and noise.p > 0
        cc = noise.model is NoiseModel.CODE_CAPACITY and noise.p > 0
        if sdem:
            circ.append("PAULI_CHANNEL_1", noise_probs_1q(noise), tuple(range(lat.n_qubits)))

        det_by_subround: Dict[int, List[DetectorInfo]] = {}
        for d in detectors or []:
            det_by_subround.setdefault(min(d.subround, T), []).append(d)

        measured = 0
        probs2 = noise_probs_2q(noise) if sdem else None
        for t in range(T):
            sub = self.subs[t % self.family.period]
            mpp_args = (noise.p,) if sdem else ()
            targets = [op for _, op in sub.checks]
            circ.append("MPP", mpp_args, tuple(targets))
            measured += len(targets)
            if sdem:
                pairs: List[int] = []
                for e, _ in sub.checks:
                    pairs.extend(lat.edges[e].qubits)
                circ.append("PAULI_CHANNEL_2", probs2, tuple(pairs))
            if cc:
                circ.append("PAULI_CHANNEL_1", noise_probs_1q(noise), tuple(range(lat.n_qubits)))
            for d in det_by_subround.get(t, []):
                refs = tuple(RecordRef(r - measured) for r in sorted(d.records))
                circ.append("DETECTOR", d.coords, refs)
            circ.append("TICK")
        if fix_final:
            _emit_pauli_gates(circ, fix_final)
        m_args = (noise.p,) if sdem else ()
        if zs:
            circ.append("M", m_args, tuple(zs))
        if xs:
            circ.append("MX", m_args, tuple(xs))
        if ys:
            circ.append("MPP", m_args, tuple(PauliString({q: "Y"}) for q in ys))
        measured += lat.n_qubits
        for d in det_by_subround.get(T, []):
            refs = tuple(RecordRef(r - measured) for r in sorted(d.records))
            circ.append("DETECTOR", d.coords, refs)
        if include_observable:
            refs = tuple(
                RecordRef(r - measured) for r in sorted(self.observable_records)
            )
            circ.append("OBSERVABLE_INCLUDE", (0,), refs)
        return circ

    # certification ------------------------------------------------------------
    def _certify_structure(self) -> Dict[str, object]:
        from .tableau import TableauRunner

        self._layout_records()
        self._track_logical()
        candidates = self._plaquette_candidates() + self._edge_candidates()
        candidates.sort(key=lambda c: c.order)

        skeleton = self._emit(NoiseSpec(), detectors=None, include_observable=False)
        runner = TableauRunner(self.lat.n_qubits)
        for ins in skeleton.instructions:
            runner.run_instruction(ins)
        records = runner.records
        if len(records) != self.n_records:
            raise BuildError("record layout mismatch against the simulator")

        kept: List[_Candidate] = []
        parities: List[int] = []
        pivots: Dict[int, int] = {}
        for cand in candidates:
            const, mask = 0, 0
            for r in cand.records:
                const ^= records[r].const
                mask ^= records[r].mask
            if mask != 0:
                if cand.kind == "bulk":
                    raise BuildError(
                        f"bulk detector at subround {cand.subround} is not deterministic"
                    )
                continue
            vec = 0
            for r in cand.records:
                vec |= 1 << r
            reduced = vec
            while reduced:
                hb = reduced.bit_length() - 1
                if hb not in pivots:
                    break
                reduced ^= pivots[hb]
            if not reduced:
                continue        # linearly dependent on already-kept detectors
            pivots[reduced.bit_length() - 1] = reduced
            kept.append(cand)
            parities.append(const)

        obs_const, obs_mask = 0, 0
        for r in self.observable_records:
            obs_const ^= records[r].const
            obs_mask ^= records[r].mask
        if obs_mask != 0:
            raise BuildError("tracked observable is not deterministic")

        fix_init, fix_final = self._solve_sign_fixes(kept, parities)
        # order detectors exactly as they will appear in the circuit
        emit_order = sorted(
            range(len(kept)), key=lambda i: (min(kept[i].subround, self.T), i)
        )
        detectors = [
            DetectorInfo(
                index=i,
                records=kept[j].records,
                kind=kept[j].kind,
                type_index=kept[j].type_index,
                plaquette=kept[j].plaquette,
                edge=kept[j].edge,
                subround=kept[j].subround,
                coords=kept[j].coords,
            )
            for i, j in enumerate(emit_order)
        ]
        struct = {
            "detectors": detectors,
            "observable_records": self.observable_records,
            "check_record": self.check_record,
            "readout_record": self.readout_record,
            "fix_init": fix_init,
            "fix_final": fix_final,
            "tracked_rep_t0": self.tracked_rep_t0,
            "observable_parity_const": obs_const,
        }
        return struct

    def _solve_sign_fixes(
        self, kept: List[_Candidate], parities: List[int]
    ) -> Tuple[Dict[int, str], Dict[int, str]]:
        if not any(parities):
            return {}, {}
        lat, T = self.lat, self.T
        n = lat.n_qubits

        def flip_pauli(q: int) -> str:
            return "Z" if self.W[q] != "Z" else "X"

        # signature of variable v over kept candidates (bit per candidate)
        sigs: List[int] = []
        # init flips: a constant Pauli frame from t=0 onward flips every
        # anticommuting check record and the anticommuting readout
        flipped_records: List[Set[int]] = []
        for q in range(n):
            pauli = PauliString({q: flip_pauli(q)})
            recs: Set[int] = set()
            for t in range(T):
                for e in lat.edges_of_qubit[q]:
                    key = (t, e)
                    if key in self.check_record:
                        op = check_operator(self.family, lat, e, t)
                        if not op.commutes(pauli):
                            recs.add(self.check_record[key])
            if self.W[q] != flip_pauli(q):
                recs.add(self.readout_record[q])
            flipped_records.append(recs)
        for q in range(n):
            sig = 0
            for i, cand in enumerate(kept):
                if len(cand.records & flipped_records[q]) % 2:
                    sig |= 1 << i
            sigs.append(sig)
        # readout flips touch only the readout record
        for q in range(n):
            sig = 0
            for i, cand in enumerate(kept):
                if self.readout_record[q] in cand.records:
                    sig |= 1 << i
            sigs.append(sig)

        target = 0
        for i, par in enumerate(parities):
            if par:
                target |= 1 << i
        solution = _solve_gf2(sigs, target)
        if solution is None:
            raise BuildError("cannot fix detector signs with boundary Pauli flips")
        fix_init: Dict[int, str] = {}
        fix_final: Dict[int, str] = {}
        for v in solution:
            if v < n:
                fix_init[v] = flip_pauli(v)
            else:
                fix_final[v - n] = flip_pauli(v - n)
        return fix_init, fix_final


def _solve_gf2(columns: List[int], target: int) -> Optional[List[int]]:
    """Solve sum of chosen columns == target over GF(2); returns chosen indices."""
    pivots: Dict[int, Tuple[int, int]] = {}   # bit -> (column value, chosen-set mask)
    for j, col in enumerate(columns):
        acc_col, acc_set = col, 1 << j
        while acc_col:
            hb = acc_col.bit_length() - 1
            if hb not in pivots:
                pivots[hb] = (acc_col, acc_set)
                break
            pc, ps = pivots[hb]
            acc_col ^= pc
            acc_set ^= ps
    acc, chosen = target, 0
    while acc:
        hb = acc.bit_length() - 1
        if hb not in pivots:
            return None
        pc, ps = pivots[hb]
        acc ^= pc
        chosen ^= ps
    return [j for j in range(len(columns)) if (chosen >> j) & 1]


def _emit_pauli_gates(circ: Circuit, flips: Dict[int, str]) -> None:
    zq = sorted(q for q, p in flips.items() if p == "Z")
    xq = sorted(q for q, p in flips.items() if p == "X")
    if zq:
        circ.append("S", (), tuple(zq))
        circ.append("S", (), tuple(zq))
    if xq:
        circ.append("H", (), tuple(xq))
        circ.append("S", (), tuple(xq))
        circ.append("S", (), tuple(xq))
        circ.append("H", (), tuple(xq))


def build_memory_circuit(spec: MemoryExperimentSpec, check: bool = True) -> MemoryCircuit:
    """Build the full memory experiment for ``spec``.

    Detector structure (independent of the noise model) is certified once
    per (family, lattice, rounds, observable) and cached; every build
    re-verifies determinism of the final circuit unless ``check=False``
    (the structure cache makes that cheap to leave on for small lattices).
    """
    spec.validate()
    key = _struct_key(spec)
    builder = _Builder(spec)
    struct = _STRUCT_CACHE.get(key)
    fresh = struct is None
    if struct is None:
        struct = builder._certify_structure()
        _STRUCT_CACHE[key] = struct
    else:
        builder._layout_records()
        builder.check_record = struct["check_record"]
        builder.readout_record = struct["readout_record"]
        builder.observable_records = struct["observable_records"]
        builder.tracked_rep_t0 = struct["tracked_rep_t0"]
    builder.observable_records = struct["observable_records"]
    circ = builder._emit(
        spec.noise,
        detectors=struct["detectors"],
        fix_init=struct["fix_init"],
        fix_final=struct["fix_final"],
    )
    if check and (fresh or (struct["fix_init"] or struct["fix_final"])):
        from .tableau import simulate_reference

        report = simulate_reference(circ)
        bad = report.failing_detectors()
        if bad:
            raise BuildError(f"detectors not deterministic/+1 after build: {bad[:10]}")
        if not all(o.deterministic for o in report.observables):
            raise BuildError("observable not deterministic after build")
    mc = MemoryCircuit(
        spec=spec,
        lattice=builder.lat,
        circuit=circ,
        detectors=struct["detectors"],
        observable_records=struct["observable_records"],
        n_subrounds=builder.T,
        check_record=struct["check_record"],
        readout_record=struct["readout_record"],
        tracked_rep_t0=struct["tracked_rep_t0"],
        metadata={
            "family": spec.family.value,
            "observable": spec.observable.value,
            "noise_model": spec.noise.model.value,
            "p": spec.noise.p,
            "eta": "inf" if math.isinf(spec.noise.eta) else spec.noise.eta,
            "rounds": spec.rounds,
            "code_capacity_noise_placement": "after every subround, none before the first",
        },
    )
    return mc
