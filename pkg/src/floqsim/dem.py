"""Detector error models by exhaustive single-fault propagation.

Every channel outcome and measurement flip in a noisy circuit is
propagated on its own Pauli-frame lane; faults with identical symptoms
(flipped detector set, flipped observable set) merge into one mechanism
with XOR-combined probability p1 + p2 - 2 p1 p2.  Mechanisms keep their
fault provenance so completeness is checkable and corrections can be
mapped back.

Text format (.fdem): ``error(p) D3 D17 L0`` lines plus one
``detector(x, y, t) D3`` coordinate line per detector.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Callable, Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np

from .circuit import Circuit
from .frames import FaultLocation, FrameSampler, compile_circuit


class DemError(ValueError):
    pass


class UndetectableLogicalError(DemError):
    """A fault flips an observable without flipping any detector."""


@dataclass(frozen=True)
class ErrorMechanism:
    probability: float
    detectors: Tuple[int, ...]
    observables: Tuple[int, ...]
    provenance: Tuple[FaultLocation, ...] = ()

    def key(self) -> Tuple[Tuple[int, ...], Tuple[int, ...]]:
        return (self.detectors, self.observables)


@dataclass
class DetectorErrorModel:
    n_detectors: int
    n_observables: int
    mechanisms: List[ErrorMechanism]
    coords: Dict[int, Tuple[float, float, float]] = field(default_factory=dict)

    def validate(self) -> None:
        seen = set()
        for m in self.mechanisms:
            if not (0.0 < m.probability < 1.0):
                raise DemError(f"mechanism probability {m.probability} out of (0, 1)")
            if not m.detectors and not m.observables:
                raise DemError("mechanism with empty symptom and no observables")
            if m.key() in seen:
                raise DemError(f"duplicate mechanism {m.key()} after canonicalization")
            seen.add(m.key())
            if list(m.detectors) != sorted(set(m.detectors)):
                raise DemError("detector sets must be sorted and duplicate-free")


def _xor_prob(p1: float, p2: float) -> float:
    return p1 + p2 - 2.0 * p1 * p2


def build(
    circuit: Circuit,
    coords: Optional[Dict[int, Tuple[float, float, float]]] = None,
    fault_filter: Optional[Callable[[FaultLocation], bool]] = None,
) -> DetectorErrorModel:
    """Extract the DEM of a noisy circuit by single-fault propagation."""
    sampler = FrameSampler(circuit)
    comp = sampler.c
    faults = [f for f in comp.faults if fault_filter is None or fault_filter(f)]
    mech: Dict[Tuple[Tuple[int, ...], Tuple[int, ...]], Tuple[float, List[FaultLocation]]] = {}
    if faults:
        det, obs = sampler.inject_batch(faults)
        for i, f in enumerate(faults):
            ds = tuple(int(x) for x in np.flatnonzero(det[i]))
            os_ = tuple(int(x) for x in np.flatnonzero(obs[i]))
            if not ds:
                if os_:
                    raise UndetectableLogicalError(
                        f"fault at instruction {f.instruction} flips observables "
                        f"{os_} without any detector"
                    )
                continue            # trivial fault
            key = (ds, os_)
            if key in mech:
                p, prov = mech[key]
                mech[key] = (_xor_prob(p, f.probability), prov + [f])
            else:
                mech[key] = (f.probability, [f])
    mechanisms = [
        ErrorMechanism(p, k[0], k[1], tuple(prov))
        for k, (p, prov) in sorted(mech.items())
    ]
    dem = DetectorErrorModel(
        n_detectors=comp.n_detectors,
        n_observables=comp.n_observables,
        mechanisms=mechanisms,
        coords=dict(coords or {}),
    )
    dem.validate()
    return dem


def build_from_memory(mc, fault_filter=None) -> DetectorErrorModel:
    """DEM of a built memory experiment, with detector coordinates attached."""
    coords = {i: d.coords for i, d in enumerate(mc.detectors)}
    return build(mc.circuit, coords=coords, fault_filter=fault_filter)


def restrict(
    dem: DetectorErrorModel,
    mechanism_pred: Optional[Callable[[ErrorMechanism], bool]] = None,
    detector_pred: Optional[Callable[[int], bool]] = None,
) -> DetectorErrorModel:
    """Sub-model: keep mechanisms passing the predicate, projected onto the
    detectors passing theirs.  Mechanisms whose symptom becomes empty drop."""
    out: List[ErrorMechanism] = []
    for m in dem.mechanisms:
        if mechanism_pred is not None and not mechanism_pred(m):
            continue
        dets = m.detectors
        if detector_pred is not None:
            dets = tuple(d for d in dets if detector_pred(d))
        if not dets and not m.observables:
            continue
        out.append(replace(m, detectors=dets))
    merged: Dict[Tuple, ErrorMechanism] = {}
    for m in out:
        k = m.key()
        if k in merged:
            prev = merged[k]
            merged[k] = replace(
                prev,
                probability=_xor_prob(prev.probability, m.probability),
                provenance=prev.provenance + m.provenance,
            )
        else:
            merged[k] = m
    coords = {
        d: xy
        for d, xy in dem.coords.items()
        if detector_pred is None or detector_pred(d)
    }
    return DetectorErrorModel(dem.n_detectors, dem.n_observables, list(merged.values()), coords)


# -- text format ---------------------------------------------------------------

def serialize(dem: DetectorErrorModel) -> str:
    lines = [f"dem {dem.n_detectors} {dem.n_observables}"]
    for d in sorted(dem.coords):
        x, y, t = dem.coords[d]
        lines.append(f"detector({_fmt(x)}, {_fmt(y)}, {_fmt(t)}) D{d}")
    for m in dem.mechanisms:
        parts = [f"error({_fmt(m.probability)})"]
        parts += [f"D{d}" for d in m.detectors]
        parts += [f"L{o}" for o in m.observables]
        lines.append(" ".join(parts))
    return "\n".join(lines) + "\n"


def _fmt(x: float) -> str:
    if x == int(x) and abs(x) < 1e15:
        return str(int(x))
    return repr(float(x))


def parse(text: str) -> DetectorErrorModel:
    n_det = n_obs = 0
    coords: Dict[int, Tuple[float, float, float]] = {}
    mechanisms: List[ErrorMechanism] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("dem "):
            parts = line.split()
            if len(parts) != 3:
                raise DemError(f"line {lineno}: malformed header")
            n_det, n_obs = int(parts[1]), int(parts[2])
        elif line.startswith("detector("):
            body, _, rest = line.partition(")")
            vals = [float(v) for v in body[len("detector("):].split(",")]
            if len(vals) != 3:
                raise DemError(f"line {lineno}: detector takes 3 coordinates")
            tgt = rest.strip()
            if not tgt.startswith("D"):
                raise DemError(f"line {lineno}: detector line needs a D target")
            coords[int(tgt[1:])] = (vals[0], vals[1], vals[2])
        elif line.startswith("error("):
            body, _, rest = line.partition(")")
            try:
                p = float(body[len("error("):])
            except ValueError:
                raise DemError(f"line {lineno}: bad probability")
            if not (0.0 < p < 1.0):
                raise DemError(f"line {lineno}: probability {p} out of (0, 1)")
            dets: List[int] = []
            obs: List[int] = []
            for tok in rest.split():
                if tok.startswith("D"):
                    dets.append(int(tok[1:]))
                elif tok.startswith("L"):
                    obs.append(int(tok[1:]))
                else:
                    raise DemError(f"line {lineno}: bad target {tok!r}")
            mechanisms.append(ErrorMechanism(p, tuple(sorted(dets)), tuple(sorted(obs))))
        else:
            raise DemError(f"line {lineno}: unknown line {line!r}")
    dem = DetectorErrorModel(n_det, n_obs, mechanisms, coords)
    dem.validate()
    return dem


def signature_multiset(dem: DetectorErrorModel, ndigits: int = 12) -> Dict[Tuple[int, float], int]:
    """Multiset of (symptom size, probability) pairs, for equivalence checks."""
    out: Dict[Tuple[int, float], int] = {}
    for m in dem.mechanisms:
        k = (len(m.detectors), round(m.probability, ndigits))
        out[k] = out.get(k, 0) + 1
    return out
