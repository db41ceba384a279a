"""Stabilizer-tableau reference simulator.

Standard CHP layout (destabilizer rows 0..n-1, stabilizer rows n..2n-1,
bit-packed into uint64 words) with one extension: row signs carry a
symbolic part, a bitmask over "random outcome" symbols introduced by
non-deterministic measurements.  A measurement outcome is the affine
expression (constant bit, symbol mask); the XOR of a detector's records is
deterministic exactly when the masks cancel.  That turns detector
certification into exact algebra instead of sampling.

Noise channels are skipped (treated as identity) and measurement flip
probabilities are ignored: this simulator answers "what is deterministic
in the absence of noise".
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Dict, List, Optional, Tuple

import numpy as np

from .circuit import Circuit, Instruction, RecordRef, absolute_records
from .pauli import PauliString


class SimError(RuntimeError):
    pass


@dataclass(frozen=True)
class Outcome:
    """Measurement outcome as (-1)^(const XOR parity-of-symbols-in-mask)."""
    const: int
    mask: int

    @property
    def deterministic(self) -> bool:
        return self.mask == 0

    def __xor__(self, other: "Outcome") -> "Outcome":
        return Outcome(self.const ^ other.const, self.mask ^ other.mask)


ZERO = Outcome(0, 0)


class Tableau:
    def __init__(self, n: int):
        self.n = n
        self.w = max(1, (n + 63) // 64)
        self.x = np.zeros((2 * n, self.w), dtype=np.uint64)
        self.z = np.zeros((2 * n, self.w), dtype=np.uint64)
        self.r = np.zeros(2 * n, dtype=np.uint8)
        self.masks: List[int] = [0] * (2 * n)
        for i in range(n):
            self.x[i, i // 64] |= np.uint64(1 << (i % 64))          # destab X_i
            self.z[n + i, i // 64] |= np.uint64(1 << (i % 64))      # stab Z_i
        self.n_symbols = 0

    # -- Pauli encoding ------------------------------------------------------
    def encode(self, p: PauliString) -> Tuple[np.ndarray, np.ndarray, int]:
        xp = np.zeros(self.w, dtype=np.uint64)
        zp = np.zeros(self.w, dtype=np.uint64)
        for q, b in p.items():
            if q >= self.n:
                raise SimError(f"qubit {q} out of range for n={self.n}")
            bit = np.uint64(1 << (q % 64))
            if b in ("X", "Y"):
                xp[q // 64] |= bit
            if b in ("Z", "Y"):
                zp[q // 64] |= bit
        return xp, zp, 0 if p.sign == 1 else 1

    # -- row algebra ---------------------------------------------------------
    def _anticommute_vector(self, xp: np.ndarray, zp: np.ndarray) -> np.ndarray:
        acc = np.bitwise_count(self.x & zp).sum(axis=1, dtype=np.int64)
        acc += np.bitwise_count(self.z & xp).sum(axis=1, dtype=np.int64)
        return (acc & 1).astype(bool)

    @staticmethod
    def _g_sum(x1, z1, x2, z2) -> int:
        plus = (
            (x1 & z1 & ~x2 & z2)
            | (x1 & ~z1 & x2 & z2)
            | (~x1 & z1 & x2 & ~z2)
        )
        minus = (
            (x1 & z1 & x2 & ~z2)
            | (x1 & ~z1 & ~x2 & z2)
            | (~x1 & z1 & x2 & z2)
        )
        return int(np.bitwise_count(plus).sum()) - int(np.bitwise_count(minus).sum())

    def _rowsum_into(self, h: int, x2, z2, r2: int, mask2: int) -> None:
        """row_h := row_h * (x2, z2, r2, mask2) keeping AG phase convention.

        Destabilizer rows (h < n) may pick up i phases; their signs are
        never read, so only stabilizer rows enforce Hermiticity.
        """
        g = self._g_sum(self.x[h], self.z[h], x2, z2)
        tot = (2 * int(self.r[h]) + 2 * r2 + g) % 4
        if tot not in (0, 2) and h >= self.n:
            raise SimError("rowsum produced a non-Hermitian stabilizer row")
        self.r[h] = (tot // 2) & 1
        self.masks[h] ^= mask2
        self.x[h] ^= x2
        self.z[h] ^= z2

    def _rowsum(self, h: int, i: int) -> None:
        self._rowsum_into(h, self.x[i], self.z[i], int(self.r[i]), self.masks[i])

    # -- gates ----------------------------------------------------------------
    def h(self, q: int) -> None:
        wq, bit = q // 64, np.uint64(1 << (q % 64))
        xs = (self.x[:, wq] & bit).astype(bool)
        zs = (self.z[:, wq] & bit).astype(bool)
        self.r ^= (xs & zs).astype(np.uint8)
        self.x[:, wq] ^= (xs ^ zs) * bit
        self.z[:, wq] ^= (xs ^ zs) * bit

    def s(self, q: int) -> None:
        wq, bit = q // 64, np.uint64(1 << (q % 64))
        xs = (self.x[:, wq] & bit).astype(bool)
        zs = (self.z[:, wq] & bit).astype(bool)
        self.r ^= (xs & zs).astype(np.uint8)
        self.z[:, wq] ^= xs * bit

    def cx(self, c: int, t: int) -> None:
        wc, bc = c // 64, np.uint64(1 << (c % 64))
        wt, bt = t // 64, np.uint64(1 << (t % 64))
        xc = (self.x[:, wc] & bc).astype(bool)
        zc = (self.z[:, wc] & bc).astype(bool)
        xt = (self.x[:, wt] & bt).astype(bool)
        zt = (self.z[:, wt] & bt).astype(bool)
        self.r ^= (xc & zt & (xt ^ zc ^ True)).astype(np.uint8)
        self.x[:, wt] ^= xc * bt
        self.z[:, wc] ^= zt * bc

    def cz(self, a: int, b: int) -> None:
        self.h(b)
        self.cx(a, b)
        self.h(b)

    def conditional_pauli(self, p: PauliString, cond: Outcome) -> None:
        """Apply p when cond is 1; exact for symbolic conditions."""
        if cond == ZERO:
            return
        xp, zp, _ = self.encode(p)
        anti = self._anticommute_vector(xp, zp)
        for i in np.flatnonzero(anti):
            self.r[i] ^= cond.const
            self.masks[i] ^= cond.mask

    # -- measurement -----------------------------------------------------------
    def measure(self, p: PauliString) -> Outcome:
        n = self.n
        xp, zp, rp = self.encode(p)
        anti = self._anticommute_vector(xp, zp)
        stab_anti = np.flatnonzero(anti[n:]) + n
        if stab_anti.size:
            pivot = int(stab_anti[0])
            for i in np.flatnonzero(anti):
                i = int(i)
                if i != pivot:
                    self._rowsum(i, pivot)
            # destabilizer partner takes the old pivot row
            self.x[pivot - n] = self.x[pivot]
            self.z[pivot - n] = self.z[pivot]
            self.r[pivot - n] = self.r[pivot]
            self.masks[pivot - n] = self.masks[pivot]
            sym = self.n_symbols
            self.n_symbols += 1
            out = Outcome(0, 1 << sym)
            self.x[pivot] = xp
            self.z[pivot] = zp
            self.r[pivot] = (out.const ^ rp)
            self.masks[pivot] = out.mask
            return out
        # deterministic: accumulate stabilizer rows whose destabilizer partner
        # anticommutes with p
        sx = np.zeros(self.w, dtype=np.uint64)
        sz = np.zeros(self.w, dtype=np.uint64)
        sr = 0
        sm = 0
        for i in np.flatnonzero(anti[:n]):
            i = int(i)
            g = self._g_sum(sx, sz, self.x[n + i], self.z[n + i])
            tot = (2 * sr + 2 * int(self.r[n + i]) + g) % 4
            if tot not in (0, 2):
                raise SimError("scratch rowsum produced i phase")
            sr = tot // 2
            sm ^= self.masks[n + i]
            sx ^= self.x[n + i]
            sz ^= self.z[n + i]
        if not (np.array_equal(sx, xp) and np.array_equal(sz, zp)):
            raise SimError("deterministic measurement does not match stabilizer span")
        return Outcome(sr ^ rp, sm)

    def peek(self, p: PauliString) -> Optional[Outcome]:
        """Outcome expression if p is in the signed stabilizer group, else None."""
        xp, zp, rp = self.encode(p)
        anti = self._anticommute_vector(xp, zp)
        if anti[self.n:].any():
            return None
        sx = np.zeros(self.w, dtype=np.uint64)
        sz = np.zeros(self.w, dtype=np.uint64)
        sr, sm = 0, 0
        for i in np.flatnonzero(anti[: self.n]):
            i = int(i)
            g = self._g_sum(sx, sz, self.x[self.n + i], self.z[self.n + i])
            tot = (2 * sr + 2 * int(self.r[self.n + i]) + g) % 4
            sr = tot // 2
            sm ^= self.masks[self.n + i]
            sx ^= self.x[self.n + i]
            sz ^= self.z[self.n + i]
        if not (np.array_equal(sx, xp) and np.array_equal(sz, zp)):
            return None
        return Outcome(sr ^ rp, sm)

    def reset_z(self, q: int) -> None:
        m = self.measure(PauliString({q: "Z"}))
        self.conditional_pauli(PauliString({q: "X"}), m)

    def reset_x(self, q: int) -> None:
        m = self.measure(PauliString({q: "X"}))
        self.conditional_pauli(PauliString({q: "Z"}), m)


# -- running circuits -----------------------------------------------------------


@dataclass
class DetectorStatus:
    index: int
    deterministic: bool
    parity_plus: bool          # meaningful only when deterministic


@dataclass
class DeterminismReport:
    detectors: List[DetectorStatus]
    observables: List[DetectorStatus]

    @property
    def all_deterministic(self) -> bool:
        return all(d.deterministic for d in self.detectors) and all(
            o.deterministic for o in self.observables
        )

    @property
    def all_plus(self) -> bool:
        return all(d.deterministic and d.parity_plus for d in self.detectors)

    def failing_detectors(self) -> List[int]:
        return [d.index for d in self.detectors if not (d.deterministic and d.parity_plus)]


class TableauRunner:
    """Executes a circuit on the tableau, recording outcome expressions."""

    def __init__(self, n_qubits: int):
        self.tab = Tableau(n_qubits)
        self.records: List[Outcome] = []

    def run_instruction(self, ins: Instruction) -> None:
        tab = self.tab
        name = ins.name
        if name in ("QUBIT_COORDS", "TICK", "PAULI_CHANNEL_1", "PAULI_CHANNEL_2",
                    "DETECTOR", "OBSERVABLE_INCLUDE"):
            return
        if name == "R":
            for q in ins.targets:
                tab.reset_z(q)
        elif name == "RX":
            for q in ins.targets:
                tab.reset_x(q)
        elif name == "M":
            for q in ins.targets:
                self.records.append(tab.measure(PauliString({q: "Z"})))
        elif name == "MX":
            for q in ins.targets:
                self.records.append(tab.measure(PauliString({q: "X"})))
        elif name == "MPP":
            for t in ins.targets:
                if isinstance(t, PauliString):
                    self.records.append(tab.measure(t))
        elif name == "H":
            for q in ins.targets:
                tab.h(q)
        elif name == "S":
            for q in ins.targets:
                tab.s(q)
        elif name == "CX":
            ts = list(ins.targets)
            for ctrl, tgt in zip(ts[::2], ts[1::2]):
                if isinstance(ctrl, RecordRef):
                    cond = self.records[len(self.records) + ctrl.offset]
                    tab.conditional_pauli(PauliString({tgt: "X"}), cond)
                else:
                    tab.cx(ctrl, tgt)
        elif name == "CZ":
            ts = list(ins.targets)
            for a, b in zip(ts[::2], ts[1::2]):
                tab.cz(a, b)
        else:
            raise SimError(f"unhandled instruction {name}")


def simulate_reference(circuit: Circuit) -> DeterminismReport:
    runner = TableauRunner(circuit.n_qubits)
    det_exprs: List[Outcome] = []
    obs_exprs: Dict[int, Outcome] = {}
    measured = 0
    for ins in circuit.instructions:
        if ins.name == "DETECTOR":
            e = ZERO
            for t in ins.targets:
                if isinstance(t, RecordRef):
                    e = e ^ runner.records[measured + t.offset]
            det_exprs.append(e)
        elif ins.name == "OBSERVABLE_INCLUDE":
            idx = int(ins.args[0])
            e = obs_exprs.get(idx, ZERO)
            for t in ins.targets:
                if isinstance(t, RecordRef):
                    e = e ^ runner.records[measured + t.offset]
            obs_exprs[idx] = e
        else:
            runner.run_instruction(ins)
            measured = len(runner.records)
    dets = [
        DetectorStatus(i, e.deterministic, e.deterministic and e.const == 0)
        for i, e in enumerate(det_exprs)
    ]
    obs = [
        DetectorStatus(i, e.deterministic, e.deterministic and e.const == 0)
        for i, e in sorted(obs_exprs.items())
    ]
    return DeterminismReport(dets, obs)
