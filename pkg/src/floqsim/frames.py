"""Bit-packed Pauli-frame sampler and single-fault propagator.

Shots are packed 64 per machine word; the circuit is compiled once into
flat op tables and a numba kernel advances all shots of a block together.
Noise is sampled sparsely (geometric skipping over the shot axis) from a
counter-based hash stream keyed by (seed, fault location, block), so the
output is bit-identical for a given (circuit, shots, seed) no matter how
the work is chunked.

Frame semantics: H swaps the X/Z frame planes, S maps X to Y, CX/CZ
propagate by conjugation, MPP flips its record when the frame anticommutes
with the measured product and leaves the frame unchanged, resets clear the
frame, and a record-controlled X applies its frame action when the
controlling record's flip bit is set.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from numba import njit

from .circuit import Circuit, Instruction, RecordRef
from .pauli import PauliString

BLOCK_SHOTS = 1 << 14          # fixed block width; do not change casually,
                               # it is part of the RNG stream layout

OP_RESET = 0
OP_MEASURE = 1
OP_C1 = 2
OP_C2 = 3
OP_H = 4
OP_S = 5
OP_CX = 6
OP_CZ = 7
OP_CCX = 8

_PAIR_BITS = []                # (x1, z1, x2, z2) for the 15-entry fixed order
for _a in "IXYZ":
    for _b in "IXYZ":
        if _a == _b == "I":
            continue
        _bits = {"I": (0, 0), "X": (1, 0), "Y": (1, 1), "Z": (0, 1)}
        _PAIR_BITS.append(_bits[_a] + _bits[_b])
_PAIR_BITS = tuple(_PAIR_BITS)


@dataclass(frozen=True)
class FaultLocation:
    """One elementary fault: a channel outcome or a measurement flip."""
    instruction: int            # index into circuit.instructions
    kind: str                   # "pauli" or "flip"
    qubits: Tuple[int, ...]
    paulis: Tuple[str, ...]     # per qubit, empty for flips
    probability: float
    loc_id: int                 # dense index, also the RNG key component

    def sort_key(self):
        return (self.instruction, self.loc_id)


@dataclass
class CompiledCircuit:
    n_qubits: int
    n_records: int
    n_detectors: int
    n_observables: int
    op_code: np.ndarray
    op_instr: np.ndarray        # originating circuit instruction index
    op_t0: np.ndarray
    op_t1: np.ndarray
    tgt: np.ndarray             # int64 payload, layout per opcode
    op_a0: np.ndarray
    op_a1: np.ndarray
    args: np.ndarray            # float64 payload
    det_t0: np.ndarray
    det_t1: np.ndarray
    det_refs: np.ndarray        # absolute record indices
    obs_index: np.ndarray       # per OBSERVABLE op
    obs_t0: np.ndarray
    obs_t1: np.ndarray
    obs_refs: np.ndarray
    faults: List[FaultLocation] = field(default_factory=list)
    # per-op sparse noise tables
    noise_op: np.ndarray = None          # ops that carry noise
    record_of_op: np.ndarray = None      # record index per OP_MEASURE, else -1


def compile_circuit(circuit: Circuit) -> CompiledCircuit:
    op_code: List[int] = []
    op_instr: List[int] = []
    t0: List[int] = []
    t1: List[int] = []
    tgt: List[int] = []
    a0: List[int] = []
    a1: List[int] = []
    args: List[float] = []
    det_t0: List[int] = []
    det_t1: List[int] = []
    det_refs: List[int] = []
    obs_index: List[int] = []
    obs_t0: List[int] = []
    obs_t1: List[int] = []
    obs_refs: List[int] = []
    faults: List[FaultLocation] = []
    record_of_op: List[int] = []

    n_records = 0
    loc_counter = 0
    bits = {"X": (1, 0), "Y": (1, 1), "Z": (0, 1)}

    def push(code, instr_i, tgt_payload, arg_payload):
        op_code.append(code)
        op_instr.append(instr_i)
        t0.append(len(tgt))
        tgt.extend(tgt_payload)
        t1.append(len(tgt))
        a0.append(len(args))
        args.extend(arg_payload)
        a1.append(len(args))
        record_of_op.append(-1)

    for i, ins in enumerate(circuit.instructions):
        name = ins.name
        if name in ("QUBIT_COORDS", "TICK"):
            continue
        if name in ("R", "RX"):
            push(OP_RESET, i, list(ins.targets), [])
        elif name in ("M", "MX", "MPP"):
            p_flip = float(ins.args[0]) if ins.args else 0.0
            basis = "Z" if name == "M" else "X"
            for t in ins.targets:
                if isinstance(t, PauliString):
                    payload = []
                    qs, ps = [], []
                    for q, b in t.items():
                        xb, zb = bits[b]
                        payload += [q, xb, zb]
                        qs.append(q)
                        ps.append(b)
                else:
                    xb, zb = bits[basis]
                    payload = [t, xb, zb]
                    qs, ps = [t], [basis]
                push(OP_MEASURE, i, payload, [p_flip, float(loc_counter)])
                record_of_op[-1] = n_records
                if p_flip > 0.0:
                    faults.append(FaultLocation(i, "flip", tuple(qs), (), p_flip, loc_counter))
                loc_counter += 1
                n_records += 1
        elif name == "PAULI_CHANNEL_1":
            px, py, pz = (float(a) for a in ins.args)
            payload = []
            for q in ins.targets:
                payload += [q, loc_counter]
                for pauli, pr in zip("XYZ", (px, py, pz)):
                    if pr > 0.0:
                        faults.append(FaultLocation(i, "pauli", (q,), (pauli,), pr, loc_counter))
                loc_counter += 1
            push(OP_C1, i, payload, [px, py, pz])
        elif name == "PAULI_CHANNEL_2":
            probs = [float(a) for a in ins.args]
            payload = []
            qs = [t for t in ins.targets if isinstance(t, int)]
            from .circuit import PAIR_ORDER
            for q1, q2 in zip(qs[::2], qs[1::2]):
                payload += [q1, q2, loc_counter]
                for k, pr in enumerate(probs):
                    if pr > 0.0:
                        lab = PAIR_ORDER[k]
                        pq, pp = [], []
                        if lab[0] != "I":
                            pq.append(q1)
                            pp.append(lab[0])
                        if lab[1] != "I":
                            pq.append(q2)
                            pp.append(lab[1])
                        faults.append(
                            FaultLocation(i, "pauli", tuple(pq), tuple(pp), pr, loc_counter)
                        )
                loc_counter += 1
            push(OP_C2, i, payload, probs)
        elif name in ("H", "S"):
            push(OP_H if name == "H" else OP_S, i, list(ins.targets), [])
        elif name in ("CX", "CZ"):
            ts = list(ins.targets)
            plain: List[int] = []
            for ctrl, tgt_q in zip(ts[::2], ts[1::2]):
                if isinstance(ctrl, RecordRef):
                    if plain:
                        push(OP_CX if name == "CX" else OP_CZ, i, plain, [])
                        plain = []
                    push(OP_CCX, i, [n_records + ctrl.offset, tgt_q], [])
                else:
                    plain += [ctrl, tgt_q]
            if plain:
                push(OP_CX if name == "CX" else OP_CZ, i, plain, [])
        elif name == "DETECTOR":
            det_t0.append(len(det_refs))
            det_refs.extend(n_records + t.offset for t in ins.targets if isinstance(t, RecordRef))
            det_t1.append(len(det_refs))
        elif name == "OBSERVABLE_INCLUDE":
            obs_index.append(int(ins.args[0]))
            obs_t0.append(len(obs_refs))
            obs_refs.extend(n_records + t.offset for t in ins.targets if isinstance(t, RecordRef))
            obs_t1.append(len(obs_refs))
        else:
            raise ValueError(f"cannot compile instruction {name}")

    n_obs = (max(obs_index) + 1) if obs_index else 0
    return CompiledCircuit(
        n_qubits=circuit.n_qubits,
        n_records=n_records,
        n_detectors=len(det_t0),
        n_observables=n_obs,
        op_code=np.asarray(op_code, dtype=np.int32),
        op_instr=np.asarray(op_instr, dtype=np.int64),
        op_t0=np.asarray(t0, dtype=np.int64),
        op_t1=np.asarray(t1, dtype=np.int64),
        tgt=np.asarray(tgt, dtype=np.int64),
        op_a0=np.asarray(a0, dtype=np.int64),
        op_a1=np.asarray(a1, dtype=np.int64),
        args=np.asarray(args, dtype=np.float64),
        det_t0=np.asarray(det_t0, dtype=np.int64),
        det_t1=np.asarray(det_t1, dtype=np.int64),
        det_refs=np.asarray(det_refs, dtype=np.int64),
        obs_index=np.asarray(obs_index, dtype=np.int64),
        obs_t0=np.asarray(obs_t0, dtype=np.int64),
        obs_t1=np.asarray(obs_t1, dtype=np.int64),
        obs_refs=np.asarray(obs_refs, dtype=np.int64),
        faults=faults,
        record_of_op=np.asarray(record_of_op, dtype=np.int64),
    )


# -- numba kernel --------------------------------------------------------------

@njit(cache=True, inline="always")
def _mix64(v):
    v = np.uint64(v)
    v = (v ^ (v >> np.uint64(30))) * np.uint64(0xBF58476D1CE4E5B9)
    v = (v ^ (v >> np.uint64(27))) * np.uint64(0x94D049BB133111EB)
    return v ^ (v >> np.uint64(31))


@njit(cache=True, inline="always")
def _u01(state):
    # 53-bit uniform in (0, 1]
    return (np.float64(state >> np.uint64(11)) + 1.0) * (1.0 / 9007199254740992.0)


@njit(cache=True)
def _run_block(
    op_code, op_t0, op_t1, tgt, op_a0, op_a1, args, record_of_op,
    det_t0, det_t1, det_refs, obs_index, obs_t0, obs_t1, obs_refs,
    fx, fz, rec, det_out, obs_out,
    seed, block_id, n_shots_in_block, noisy,
    inj_op, inj_lane, inj_kind, inj_q1, inj_fx1, inj_fz1, inj_q2, inj_fx2, inj_fz2,
):
    n_words = fx.shape[1]
    n_inj = inj_op.shape[0]
    inj_ptr = 0
    base = _mix64(np.uint64(seed) * np.uint64(0x9E3779B97F4A7C15) + np.uint64(block_id))
    for op in range(op_code.shape[0]):
        code = op_code[op]
        s0, s1 = op_t0[op], op_t1[op]
        a0, a1 = op_a0[op], op_a1[op]
        if code == OP_RESET:
            for k in range(s0, s1):
                q = tgt[k]
                for w in range(n_words):
                    fx[q, w] = np.uint64(0)
                    fz[q, w] = np.uint64(0)
        elif code == OP_MEASURE:
            r = record_of_op[op]
            for w in range(n_words):
                acc = np.uint64(0)
                for k in range(s0, s1, 3):
                    q = tgt[k]
                    xb = tgt[k + 1]
                    zb = tgt[k + 2]
                    # frame anticommutes with the product term
                    if xb == 1:
                        acc ^= fz[q, w]
                    if zb == 1:
                        acc ^= fx[q, w]
                rec[r, w] = acc
            if noisy:
                p_flip = args[a0]
                if p_flip > 0.0:
                    loc = np.uint64(args[a0 + 1])
                    _sparse_flip_record(rec, r, p_flip, base, loc, n_shots_in_block)
        elif code == OP_C1:
            if noisy:
                px = args[a0]
                py = args[a0 + 1]
                pz = args[a0 + 2]
                ptot = px + py + pz
                if ptot > 0.0:
                    for k in range(s0, s1, 2):
                        q = tgt[k]
                        loc = np.uint64(tgt[k + 1])
                        _sparse_pauli1(fx, fz, q, px, py, pz, ptot, base, loc, n_shots_in_block)
        elif code == OP_C2:
            if noisy:
                ptot = 0.0
                for k in range(a0, a1):
                    ptot += args[k]
                if ptot > 0.0:
                    for k in range(s0, s1, 3):
                        q1 = tgt[k]
                        q2 = tgt[k + 1]
                        loc = np.uint64(tgt[k + 2])
                        _sparse_pauli2(fx, fz, q1, q2, args, a0, ptot, base, loc, n_shots_in_block)
        elif code == OP_H:
            for k in range(s0, s1):
                q = tgt[k]
                for w in range(n_words):
                    tmp = fx[q, w]
                    fx[q, w] = fz[q, w]
                    fz[q, w] = tmp
        elif code == OP_S:
            for k in range(s0, s1):
                q = tgt[k]
                for w in range(n_words):
                    fz[q, w] ^= fx[q, w]
        elif code == OP_CX:
            for k in range(s0, s1, 2):
                c = tgt[k]
                t = tgt[k + 1]
                for w in range(n_words):
                    fx[t, w] ^= fx[c, w]
                    fz[c, w] ^= fz[t, w]
        elif code == OP_CZ:
            for k in range(s0, s1, 2):
                c = tgt[k]
                t = tgt[k + 1]
                for w in range(n_words):
                    fz[t, w] ^= fx[c, w]
                    fz[c, w] ^= fx[t, w]
        elif code == OP_CCX:
            r = tgt[s0]
            q = tgt[s0 + 1]
            for w in range(n_words):
                fx[q, w] ^= rec[r, w]
        # injected faults attached to this op (sorted by op)
        while inj_ptr < n_inj and inj_op[inj_ptr] == op:
            lane = inj_lane[inj_ptr]
            w = lane >> 6
            bit = np.uint64(1) << np.uint64(lane & 63)
            if inj_kind[inj_ptr] == 0:     # pauli
                q1 = inj_q1[inj_ptr]
                if inj_fx1[inj_ptr] == 1:
                    fx[q1, w] ^= bit
                if inj_fz1[inj_ptr] == 1:
                    fz[q1, w] ^= bit
                q2 = inj_q2[inj_ptr]
                if q2 >= 0:
                    if inj_fx2[inj_ptr] == 1:
                        fx[q2, w] ^= bit
                    if inj_fz2[inj_ptr] == 1:
                        fz[q2, w] ^= bit
            else:                          # record flip
                r = record_of_op[op]
                rec[r, w] ^= bit
            inj_ptr += 1
    # detectors and observables
    for d in range(det_t0.shape[0]):
        for w in range(n_words):
            acc = np.uint64(0)
            for k in range(det_t0[d], det_t1[d]):
                acc ^= rec[det_refs[k], w]
            det_out[d, w] = acc
    for o in range(obs_index.shape[0]):
        oi = obs_index[o]
        for w in range(n_words):
            acc = obs_out[oi, w]
            for k in range(obs_t0[o], obs_t1[o]):
                acc ^= rec[obs_refs[k], w]
            obs_out[oi, w] = acc


@njit(cache=True, inline="always")
def _stream_state(base, loc, j):
    return _mix64(base ^ _mix64(loc * np.uint64(0xD1342543DE82EF95) + np.uint64(j)))


@njit(cache=True)
def _sparse_flip_record(rec, r, p, base, loc, n_shots):
    log1m = math.log1p(-p)
    pos = -1.0
    j = np.uint64(0)
    while True:
        u = _u01(_stream_state(base, loc, j))
        j += np.uint64(1)
        pos += 1.0 + math.floor(math.log(u) / log1m)
        s = int(pos)
        if s >= n_shots:
            break
        rec[r, s >> 6] ^= np.uint64(1) << np.uint64(s & 63)


@njit(cache=True)
def _sparse_pauli1(fx, fz, q, px, py, pz, ptot, base, loc, n_shots):
    log1m = math.log1p(-ptot)
    pos = -1.0
    j = np.uint64(0)
    while True:
        u = _u01(_stream_state(base, loc, j))
        j += np.uint64(1)
        pos += 1.0 + math.floor(math.log(u) / log1m)
        s = int(pos)
        if s >= n_shots:
            break
        v = _u01(_stream_state(base, loc, j)) * ptot
        j += np.uint64(1)
        w = s >> 6
        bit = np.uint64(1) << np.uint64(s & 63)
        if v < px:            # X
            fx[q, w] ^= bit
        elif v < px + py:     # Y
            fx[q, w] ^= bit
            fz[q, w] ^= bit
        else:                 # Z
            fz[q, w] ^= bit


@njit(cache=True)
def _sparse_pauli2(fx, fz, q1, q2, args, a0, ptot, base, loc, n_shots):
    log1m = math.log1p(-ptot)
    pos = -1.0
    j = np.uint64(0)
    while True:
        u = _u01(_stream_state(base, loc, j))
        j += np.uint64(1)
        pos += 1.0 + math.floor(math.log(u) / log1m)
        s = int(pos)
        if s >= n_shots:
            break
        v = _u01(_stream_state(base, loc, j)) * ptot
        j += np.uint64(1)
        acc = 0.0
        sel = 14
        for k in range(15):
            acc += args[a0 + k]
            if v < acc:
                sel = k
                break
        w = s >> 6
        bit = np.uint64(1) << np.uint64(s & 63)
        # decode pair Pauli from the fixed IX..ZZ order
        a = sel // 4 if sel >= 3 else 0          # first Pauli index (I,X,Y,Z)
        b = sel % 4 if sel >= 3 else sel + 1
        if sel >= 3:
            a = (sel + 1) // 4
            b = (sel + 1) % 4
        if a == 1 or a == 2:
            fx[q1, w] ^= bit
        if a == 2 or a == 3:
            fz[q1, w] ^= bit
        if b == 1 or b == 2:
            fx[q2, w] ^= bit
        if b == 2 or b == 3:
            fz[q2, w] ^= bit


# -- public API -----------------------------------------------------------------


@dataclass
class SyndromeBatch:
    n_detectors: int
    n_observables: int
    shots: int
    det_bits: np.ndarray      # (shots, ceil(n_det/8)) uint8, little-endian bits
    obs_bits: np.ndarray      # (shots, ceil(n_obs/8)) uint8

    def detector_array(self) -> np.ndarray:
        """(shots, n_detectors) bool array."""
        return _unpack(self.det_bits, self.n_detectors)

    def observable_array(self) -> np.ndarray:
        return _unpack(self.obs_bits, self.n_observables)

    def to_bytes(self) -> bytes:
        head = np.asarray([self.n_detectors, self.n_observables, self.shots], dtype="<u8").tobytes()
        return head + self.det_bits.tobytes() + self.obs_bits.tobytes()

    @classmethod
    def from_bytes(cls, blob: bytes) -> "SyndromeBatch":
        nd, no, shots = np.frombuffer(blob[:24], dtype="<u8")
        nd, no, shots = int(nd), int(no), int(shots)
        wd, wo = (nd + 7) // 8, (no + 7) // 8
        det = np.frombuffer(blob[24:24 + shots * wd], dtype=np.uint8).reshape(shots, wd).copy()
        obs = np.frombuffer(blob[24 + shots * wd:24 + shots * (wd + wo)], dtype=np.uint8).reshape(shots, wo).copy()
        return cls(nd, no, shots, det, obs)

    def to_text(self) -> str:
        det = self.detector_array()
        obs = self.observable_array()
        lines = []
        for s in range(self.shots):
            lines.append(
                "".join("1" if b else "0" for b in det[s])
                + " "
                + "".join("1" if b else "0" for b in obs[s])
            )
        return "\n".join(lines) + ("\n" if lines else "")


def _unpack(bits: np.ndarray, n: int) -> np.ndarray:
    if n == 0:
        return np.zeros((bits.shape[0], 0), dtype=bool)
    out = np.unpackbits(bits, axis=1, bitorder="little")[:, :n]
    return out.astype(bool)


def _pack_planes(planes: np.ndarray, n_rows: int, shots: int) -> np.ndarray:
    """(rows, words) uint64 shot-planes -> (shots, ceil(rows/8)) uint8."""
    if n_rows == 0:
        return np.zeros((shots, 0), dtype=np.uint8)
    u8 = planes.view(np.uint8).reshape(n_rows, -1)           # little-endian
    bits = np.unpackbits(u8, axis=1, bitorder="little")[:, :shots]
    return np.packbits(bits.T, axis=1, bitorder="little")


_EMPTY_INJ = tuple(np.zeros(0, dtype=np.int64) for _ in range(9))


class FrameSampler:
    """Sampler bound to one compiled circuit."""

    def __init__(self, circuit: Circuit, compiled: Optional[CompiledCircuit] = None):
        self.circuit = circuit
        self.c = compiled or compile_circuit(circuit)

    def sample(self, shots: int, seed: int) -> SyndromeBatch:
        if shots < 1:
            raise ValueError("shots must be >= 1")
        c = self.c
        det_rows: List[np.ndarray] = []
        obs_rows: List[np.ndarray] = []
        for block_id in range(0, (shots + BLOCK_SHOTS - 1) // BLOCK_SHOTS):
            lo = block_id * BLOCK_SHOTS
            hi = min(lo + BLOCK_SHOTS, shots)
            nb = hi - lo
            det, obs = self._run(nb, seed, block_id, noisy=True, inj=_EMPTY_INJ)
            det_rows.append(_pack_planes(det, c.n_detectors, nb))
            obs_rows.append(_pack_planes(obs, c.n_observables, nb))
        det_bits = np.concatenate(det_rows, axis=0) if det_rows else np.zeros((0, 0), np.uint8)
        obs_bits = np.concatenate(obs_rows, axis=0) if obs_rows else np.zeros((0, 0), np.uint8)
        return SyndromeBatch(c.n_detectors, c.n_observables, shots, det_bits, obs_bits)

    def _run(self, n_shots: int, seed: int, block_id: int, noisy: bool, inj):
        c = self.c
        n_words = (n_shots + 63) // 64
        fx = np.zeros((max(1, c.n_qubits), n_words), dtype=np.uint64)
        fz = np.zeros_like(fx)
        rec = np.zeros((max(1, c.n_records), n_words), dtype=np.uint64)
        det = np.zeros((max(1, c.n_detectors), n_words), dtype=np.uint64)
        obs = np.zeros((max(1, c.n_observables), n_words), dtype=np.uint64)
        _run_block(
            c.op_code, c.op_t0, c.op_t1, c.tgt, c.op_a0, c.op_a1, c.args, c.record_of_op,
            c.det_t0, c.det_t1, c.det_refs, c.obs_index, c.obs_t0, c.obs_t1, c.obs_refs,
            fx, fz, rec, det, obs,
            np.uint64(seed), np.uint64(block_id), n_shots, noisy,
            *inj,
        )
        return det[: c.n_detectors], obs[: c.n_observables]

    # -- fault injection ---------------------------------------------------

    def inject_batch(self, faults: Sequence[FaultLocation]) -> Tuple[np.ndarray, np.ndarray]:
        """Propagate one fault per lane; returns (n_faults, n_det) and obs bools."""
        c = self.c
        out_det = np.zeros((len(faults), c.n_detectors), dtype=bool)
        out_obs = np.zeros((len(faults), c.n_observables), dtype=bool)
        op_of_instr: Dict[int, List[int]] = {}
        for op, instr in enumerate(c.op_instr):
            op_of_instr.setdefault(int(instr), []).append(op)

        for lo in range(0, len(faults), BLOCK_SHOTS):
            chunk = faults[lo:lo + BLOCK_SHOTS]
            rows = []
            for lane, f in enumerate(chunk):
                ops = op_of_instr.get(f.instruction, [])
                op = -1
                for cand in ops:
                    # measurement flips attach to the op with matching loc id;
                    # channel faults likewise
                    i0 = c.op_a0[cand]
                    if c.op_code[cand] == OP_MEASURE and f.kind == "flip":
                        if int(c.args[i0 + 1]) == f.loc_id:
                            op = cand
                            break
                    elif c.op_code[cand] in (OP_C1, OP_C2) and f.kind == "pauli":
                        t0, t1 = c.op_t0[cand], c.op_t1[cand]
                        step = 2 if c.op_code[cand] == OP_C1 else 3
                        for k in range(t0, t1, step):
                            if int(c.tgt[k + step - 1]) == f.loc_id:
                                op = cand
                                break
                        if op >= 0:
                            break
                if op < 0:
                    raise ValueError(f"fault location {f} not found in compiled circuit")
                if f.kind == "flip":
                    rows.append((op, lane, 1, -1, 0, 0, -1, 0, 0))
                else:
                    bits = {"X": (1, 0), "Y": (1, 1), "Z": (0, 1)}
                    q1 = f.qubits[0]
                    x1, z1 = bits[f.paulis[0]]
                    if len(f.qubits) > 1:
                        q2 = f.qubits[1]
                        x2, z2 = bits[f.paulis[1]]
                    else:
                        q2, x2, z2 = -1, 0, 0
                    rows.append((op, lane, 0, q1, x1, z1, q2, x2, z2))
            rows.sort(key=lambda r: (r[0], r[1]))
            arrs = tuple(
                np.asarray([r[j] for r in rows], dtype=np.int64) for j in range(9)
            )
            det, obs = self._run(len(chunk), seed=0, block_id=0, noisy=False, inj=arrs)
            db = _unpack(_pack_planes(det, c.n_detectors, len(chunk)), c.n_detectors)
            ob = _unpack(_pack_planes(obs, c.n_observables, len(chunk)), c.n_observables)
            out_det[lo:lo + len(chunk)] = db
            out_obs[lo:lo + len(chunk)] = ob
        return out_det, out_obs


def sample(circuit: Circuit, shots: int, seed: int) -> SyndromeBatch:
    return FrameSampler(circuit).sample(shots, seed)


def inject(circuit: Circuit, fault: FaultLocation) -> Tuple[Tuple[int, ...], Tuple[int, ...]]:
    """Symptom of a single fault: (flipped detector ids, flipped observable ids)."""
    sampler = FrameSampler(circuit)
    det, obs = sampler.inject_batch([fault])
    return tuple(np.flatnonzero(det[0]).tolist()), tuple(np.flatnonzero(obs[0]).tolist())


def enumerate_faults(circuit: Circuit) -> List[FaultLocation]:
    return list(compile_circuit(circuit).faults)
