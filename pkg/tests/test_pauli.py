import pytest
from hypothesis import given, strategies as st

from floqsim.pauli import PauliString, commutes, pauli_from_text


def test_commutation_examples():
    assert not commutes(pauli_from_text("X0*X1"), pauli_from_text("Z1*Z2"))
    assert commutes(pauli_from_text("X0*X1"), pauli_from_text("Z0*Z1"))
    assert commutes(pauli_from_text("X0*Y3*Z5"), PauliString())


def test_product_signs():
    a = pauli_from_text("X0*X1")
    b = pauli_from_text("Z0*Z1")
    prod = a * b
    assert prod.equal_up_to_sign(pauli_from_text("Y0*Y1"))
    assert prod.sign == -1          # (XZ)(XZ) = (-iY)(-iY)
    assert (b * a) == prod          # commuting pair: same signed product
    with pytest.raises(ValueError):
        _ = pauli_from_text("X0") * pauli_from_text("Z0")   # -iY not Hermitian


def test_multiply_involution():
    a = pauli_from_text("X0*Z2*Y4")
    b = pauli_from_text("Z0*Z1*X4")
    assert (a * (a * b)).equal_up_to_sign(b)


@st.composite
def paulis(draw):
    n = draw(st.integers(1, 6))
    ops = {}
    for q in range(n):
        b = draw(st.sampled_from("IXYZ"))
        if b != "I":
            ops[q] = b
    return PauliString(ops)


@given(paulis(), paulis())
def test_commutation_symmetric(a, b):
    assert a.commutes(b) == b.commutes(a)


@given(paulis(), paulis())
def test_product_commutation_consistency(a, b):
    # a*b is Hermitian iff a and b commute
    if a.commutes(b):
        p = a * b
        assert (p * p).equal_up_to_sign(PauliString())
    else:
        with pytest.raises(ValueError):
            _ = a * b


def test_text_round_trip():
    p = pauli_from_text("X3*Z7*Y11")
    assert pauli_from_text(p.to_text()) == p
    with pytest.raises(ValueError):
        pauli_from_text("X3*Q7")
    with pytest.raises(ValueError):
        pauli_from_text("X3*Z3")
