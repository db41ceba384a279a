import pytest
from hypothesis import given, settings, strategies as st

from floqsim.circuit import (
    Circuit,
    CircuitError,
    CircuitSemanticError,
    CircuitSyntaxError,
    RecordRef,
    parse,
    serialize,
)
from floqsim.pauli import PauliString


def test_parse_mpp():
    c = parse("MPP(0.01) X0*X1")
    assert len(c.instructions) == 1
    ins = c.instructions[0]
    assert ins.name == "MPP"
    assert ins.args == (0.01,)
    assert ins.targets == (PauliString({0: "X", 1: "X"}),)


def test_record_underflow_rejected():
    with pytest.raises(CircuitSemanticError):
        parse("DETECTOR rec[-1] rec[-7]")
    # fine once measurements exist
    c = parse("M 0 1 2 3 4 5 6\nDETECTOR rec[-1] rec[-7]")
    assert c.n_detectors == 1


def test_round_trip_canonical():
    text = (
        "QUBIT_COORDS(0, 0) 0\n"
        "R 0 1\n"
        "MPP(0.001) X0*X1 Z0*Z1\n"
        "PAULI_CHANNEL_1(0.001, 0.001, 0.002) 0 1\n"
        "CX rec[-1] 0\n"
        "DETECTOR(0.5, 1, 2) rec[-1] rec[-2]\n"
        "OBSERVABLE_INCLUDE(0) rec[-2]\n"
    )
    c = parse(text)
    assert serialize(c) == text
    assert parse(serialize(c)) == c


def test_channel2_arg_count():
    args = ", ".join(["0.001"] * 15)
    c = parse(f"PAULI_CHANNEL_2({args}) 0 1")
    assert len(c.instructions[0].args) == 15
    with pytest.raises(CircuitSemanticError):
        parse("PAULI_CHANNEL_2(0.1, 0.2) 0 1")


def test_probability_range():
    with pytest.raises(CircuitSemanticError):
        parse("MPP(1.5) X0*X1")
    with pytest.raises(CircuitSemanticError):
        parse("PAULI_CHANNEL_1(0.5, 0.4, 0.3) 0")


def test_unknown_instruction():
    with pytest.raises(CircuitSyntaxError):
        parse("FROB 1 2")


def test_empty_circuit():
    assert serialize(Circuit()) == ""
    assert parse("").instructions == []
    assert parse("# only a comment\n\n").instructions == []


def test_counts():
    c = parse("M 0 1\nMX 2\nMPP X0*X3\nDETECTOR rec[-1]\nOBSERVABLE_INCLUDE(0) rec[-1]")
    assert c.n_measurements == 4
    assert c.n_qubits == 4
    assert c.n_detectors == 1
    assert c.n_observables == 1


def test_record_ref_positive_rejected():
    with pytest.raises(CircuitError):
        RecordRef(0)


@settings(max_examples=300, deadline=None)
@given(st.text(max_size=200))
def test_fuzz_never_crashes(text):
    try:
        parse(text)
    except CircuitError:
        pass        # diagnostics are the contract; crashes are not


@settings(max_examples=100, deadline=None)
@given(st.binary(max_size=120))
def test_fuzz_bytes_never_crash(blob):
    try:
        parse(blob.decode("utf-8", errors="replace"))
    except CircuitError:
        pass
