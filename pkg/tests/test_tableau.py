import numpy as np
import pytest

from floqsim.circuit import parse
from floqsim.pauli import PauliString, pauli_from_text
from floqsim.tableau import Outcome, Tableau, TableauRunner, simulate_reference


def test_plus_state_measurements():
    tab = Tableau(1)
    tab.reset_x(0)
    out = tab.measure(pauli_from_text("X0"))
    assert out.deterministic and out.const == 0
    tab2 = Tableau(1)
    tab2.reset_x(0)
    out = tab2.measure(pauli_from_text("Z0"))
    assert not out.deterministic


def test_s_gate_makes_y():
    tab = Tableau(1)
    tab.reset_x(0)
    tab.s(0)
    out = tab.measure(pauli_from_text("Y0"))
    assert out.deterministic and out.const == 0
    # S|+i> = |-> up to phase: X expectation flips
    tab.s(0)
    out = tab.measure(pauli_from_text("X0"))
    assert out.deterministic and out.const == 1


def test_bell_pair_parity():
    tab = Tableau(2)
    tab.reset_z(0)
    tab.reset_z(1)
    tab.h(0)
    tab.cx(0, 1)
    for prod in ("X0*X1", "Z0*Z1"):
        out = tab.peek(pauli_from_text(prod))
        assert out is not None and out.const == 0
    assert tab.peek(pauli_from_text("Z0")) is None


def test_cz_conjugation():
    # CZ turns X0 into X0 Z1: measuring X0*Z1 after CZ on |+>|0> is +1
    tab = Tableau(2)
    tab.reset_x(0)
    tab.reset_z(1)
    tab.cz(0, 1)
    out = tab.measure(pauli_from_text("X0*Z1"))
    assert out.deterministic and out.const == 0


def test_y_product_phase():
    # |0>|0>: measure Y0*Y1, then X0*X1 and Z0*Z1 are correlated: Y0Y1 = -(X0X1)(Z0Z1)
    tab = Tableau(2)
    tab.reset_z(0)
    tab.reset_z(1)
    y = tab.measure(pauli_from_text("Y0*Y1"))
    x = tab.measure(pauli_from_text("X0*X1"))
    z = tab.peek(pauli_from_text("Z0*Z1"))
    assert not y.deterministic and z is not None
    # sign relation: y * x * z == -1 for every random branch
    combo = Outcome(
        y.const ^ x.const ^ z.const ^ 1, y.mask ^ x.mask ^ z.mask
    )
    assert combo.deterministic and combo.const == 0


def test_repeated_measurement_agrees():
    tab = Tableau(3)
    for q in range(3):
        tab.reset_z(q)
    tab.h(0)
    p = pauli_from_text("X0*X1")
    first = tab.measure(p)
    second = tab.measure(p)
    assert (first ^ second).deterministic
    assert (first ^ second).const == 0


def test_simulate_reference_detectors():
    c = parse(
        "R 0 1\n"
        "MPP Z0*Z1\n"
        "MPP Z0*Z1\n"
        "DETECTOR(0, 0, 0) rec[-1] rec[-2]\n"
        "MPP X0\n"
        "MPP Z0*Z1\n"
        "DETECTOR(0, 0, 1) rec[-1] rec[-4]\n"
    )
    rep = simulate_reference(c)
    assert rep.detectors[0].deterministic and rep.detectors[0].parity_plus
    # the single-qubit X measurement randomizes Z0Z1
    assert not rep.detectors[1].deterministic
    assert rep.failing_detectors() == [1]


def test_record_controlled_x():
    # measure Z0 on |1>; feed it into a classically controlled X on qubit 1
    c = parse(
        "R 0 1\n"
        "MPP X0\n"          # randomizes qubit 0 in X basis
        "M 0\n"
        "CX rec[-1] 1\n"
        "M 1\n"
    )
    runner = TableauRunner(2)
    measured = 0
    for ins in c.instructions:
        runner.run_instruction(ins)
    # qubit 1 ends in |Z0 outcome>: the two records must agree
    z0, z1 = runner.records[1], runner.records[2]
    agree = z0 ^ z1
    assert agree.deterministic and agree.const == 0


def test_reset_after_entanglement():
    tab = Tableau(2)
    tab.reset_z(0)
    tab.reset_z(1)
    tab.h(0)
    tab.cx(0, 1)
    tab.reset_z(1)
    out = tab.measure(pauli_from_text("Z1"))
    assert out.deterministic and out.const == 0
