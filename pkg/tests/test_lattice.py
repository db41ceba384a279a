import dataclasses

import pytest

from floqsim.lattice import (
    Boundary,
    Edge,
    LatticeSpec,
    SpecError,
    build_lattice,
    strips,
    validate,
)


def test_counts_4x6():
    lat = build_lattice(LatticeSpec(4, 6))
    assert lat.n_qubits == 48
    assert len(lat.edges) == 72
    assert len(lat.plaquettes) == 24
    # Euler relation on the torus
    assert lat.n_qubits - len(lat.edges) + len(lat.plaquettes) == 0


@pytest.mark.parametrize("L", [4, 8, 12])
def test_invariants_square(L):
    lat = build_lattice(LatticeSpec.square(L))
    rep = validate(lat)
    assert rep.ok, rep.failures()
    assert 2 * len(lat.edges) == 3 * lat.n_qubits
    assert 2 * len(lat.plaquettes) == lat.n_qubits
    counts = [0, 0, 0]
    for p in lat.plaquettes:
        counts[p.colour] += 1
    assert counts[0] == counts[1] == counts[2] == len(lat.plaquettes) // 3
    # one-colour plaquettes are n/6 and pairwise non-adjacent
    assert counts[0] == lat.n_qubits // 6


def test_elongated_and_twisted_counts():
    base = build_lattice(LatticeSpec(4, 12))
    assert base.n_qubits == 96
    assert validate(base).ok
    tw = build_lattice(LatticeSpec(4, 6, Boundary.TWISTED_PERIODIC))
    un = build_lattice(LatticeSpec(4, 6))
    assert tw.n_qubits == un.n_qubits
    assert len(tw.edges) == len(un.edges)
    assert len(tw.plaquettes) == len(un.plaquettes)
    assert validate(tw).ok
    # twisting only reroutes top-row vertical edges
    diff = [
        e.index
        for e, e2 in zip(un.edges, tw.edges)
        if e.qubits != e2.qubits
    ]
    for e in diff:
        q1, q2 = un.edges[e].qubits
        rows = {un.coords[q1][1], un.coords[q2][1]}
        assert rows == {un.n_rows - 1, 0}


@pytest.mark.parametrize(
    "lh,lv", [(3, 6), (4, 7), (4, 9), (0, 6), (4, 0)]
)
def test_spec_errors(lh, lv):
    with pytest.raises(SpecError):
        build_lattice(LatticeSpec(lh, lv))


def test_strips():
    lat = build_lattice(LatticeSpec.square(4))
    ss = strips(lat)
    assert len(ss) == 4
    assert sum(1 for s in ss if s.shaded) == 2
    assert sum(1 for s in ss if not s.shaded) == 2
    seen = sorted(q for s in ss for q in s.qubits)
    assert seen == list(range(lat.n_qubits))
    lat8 = build_lattice(LatticeSpec.square(8))
    assert sum(1 for s in strips(lat8) if not s.shaded) == 4


def test_validator_catches_recolouring_and_missing_edge():
    lat = build_lattice(LatticeSpec.square(4))
    e = lat.edges[0]
    lat.edges[0] = dataclasses.replace(e, colour=(e.colour + 1) % 3)
    assert not validate(lat).ok
    lat.edges[0] = e
    assert validate(lat).ok
    removed = lat.edges.pop()
    assert not validate(lat).ok
    lat.edges.append(removed)


def test_dump_deterministic():
    a = build_lattice(LatticeSpec.square(4)).dump()
    b = build_lattice(LatticeSpec.square(4)).dump()
    assert a == b
    assert "plaquette" in a and "edge" in a
