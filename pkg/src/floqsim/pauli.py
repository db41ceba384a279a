"""Sparse Pauli-string algebra.

Strings are stored as a sparse map from qubit index to a basis character
('X', 'Y' or 'Z') together with a sign in {+1, -1}.  Internally each entry
is a pair of symplectic bits (x, z) and the sign tracks the full product
phase, so ``a * b`` is exact whenever the product is Hermitian (the only
case this package needs; a non-Hermitian product raises).
"""

from __future__ import annotations

from typing import Dict, Iterable, Iterator, Mapping, Tuple

_BASIS_TO_BITS = {"X": (1, 0), "Y": (1, 1), "Z": (0, 1)}
_BITS_TO_BASIS = {(1, 0): "X", (1, 1): "Y", (0, 1): "Z"}


class PauliString:
    """An n-qubit Pauli operator with no identity entries stored."""

    __slots__ = ("_ops", "sign")

    def __init__(self, ops: Mapping[int, str] | None = None, sign: int = 1):
        if sign not in (1, -1):
            raise ValueError("sign must be +1 or -1")
        self._ops: Dict[int, str] = {}
        if ops:
            for q, b in ops.items():
                if b == "I":
                    continue
                if b not in _BASIS_TO_BITS:
                    raise ValueError(f"bad Pauli basis {b!r}")
                self._ops[int(q)] = b
        self.sign = sign

    @classmethod
    def from_pairs(cls, pairs: Iterable[Tuple[int, str]], sign: int = 1) -> "PauliString":
        return cls(dict(pairs), sign)

    def basis(self, q: int) -> str:
        """Basis on qubit q, 'I' if not in the support."""
        return self._ops.get(q, "I")

    @property
    def support(self) -> frozenset:
        return frozenset(self._ops)

    def items(self) -> Iterator[Tuple[int, str]]:
        return iter(sorted(self._ops.items()))

    def weight(self) -> int:
        return len(self._ops)

    def commutes(self, other: "PauliString") -> bool:
        """True iff the two strings commute (even anticommuting overlap)."""
        anti = 0
        small, big = (self, other) if len(self._ops) <= len(other._ops) else (other, self)
        for q, b in small._ops.items():
            ob = big._ops.get(q)
            if ob is not None and ob != b:
                anti ^= 1
        return anti == 0

    def __mul__(self, other: "PauliString") -> "PauliString":
        """Hermitian product; raises if the result has an i phase."""
        ops = dict(self._ops)
        # phase exponent of i: reordering (x1,z1)*(x2,z2) per qubit
        iexp = 0
        for q, b in other._ops.items():
            a = ops.pop(q, None)
            if a is None:
                ops[q] = b
                continue
            x1, z1 = _BASIS_TO_BITS[a]
            x2, z2 = _BASIS_TO_BITS[b]
            x, z = x1 ^ x2, z1 ^ z2
            # i-phases from XZ-ordered forms: i^(z1+z2... ) use levi-civita table
            iexp += _phase_table(a, b)
            if x or z:
                ops[q] = _BITS_TO_BASIS[(x, z)]
        iexp %= 4
        if iexp == 0:
            sign = 1
        elif iexp == 2:
            sign = -1
        else:
            raise ValueError("non-Hermitian Pauli product (odd i phase)")
        return PauliString(ops, self.sign * other.sign * sign)

    def __eq__(self, other: object) -> bool:
        return (
            isinstance(other, PauliString)
            and self.sign == other.sign
            and self._ops == other._ops
        )

    def __hash__(self) -> int:
        return hash((self.sign, tuple(sorted(self._ops.items()))))

    def equal_up_to_sign(self, other: "PauliString") -> bool:
        return self._ops == other._ops

    def restricted(self, qubits: Iterable[int]) -> "PauliString":
        qs = set(qubits)
        return PauliString({q: b for q, b in self._ops.items() if q in qs}, 1)

    def __repr__(self) -> str:
        body = "*".join(f"{b}{q}" for q, b in sorted(self._ops.items())) or "I"
        return ("-" if self.sign < 0 else "+") + body

    def to_text(self) -> str:
        """Serialized target form used by MPP, e.g. ``X0*Z3``."""
        if not self._ops:
            raise ValueError("cannot serialize an identity product")
        return "*".join(f"{b}{q}" for q, b in sorted(self._ops.items()))


def _phase_table(a: str, b: str) -> int:
    """i-exponent of a*b relative to the plain symplectic XOR result."""
    if a == b:
        return 0
    # XY=iZ, YZ=iX, ZX=iY and the reverses pick up -i
    forward = {("X", "Y"), ("Y", "Z"), ("Z", "X")}
    return 1 if (a, b) in forward else 3


def pauli_from_text(text: str) -> PauliString:
    """Parse ``X0*Z3`` style products (no sign prefix)."""
    ops: Dict[int, str] = {}
    for term in text.split("*"):
        term = term.strip()
        if not term:
            raise ValueError("empty Pauli term")
        b, idx = term[0].upper(), term[1:]
        if b not in "XYZ" or not idx.isdigit():
            raise ValueError(f"bad Pauli term {term!r}")
        q = int(idx)
        if q in ops:
            raise ValueError(f"duplicate qubit {q} in product")
        ops[q] = b
    return PauliString(ops)


def commutes(a: PauliString, b: PauliString) -> bool:
    return a.commutes(b)
