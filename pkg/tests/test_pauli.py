import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import oracle
from blindsim.pauli import (
    LETTERS,
    PauliString,
    all_paulis,
    letter_product,
    measurement_rotation,
    pauli_expectation,
)

strings = st.text(alphabet=LETTERS, min_size=3, max_size=3)


@pytest.mark.parametrize("a, b", list(itertools.product(LETTERS, repeat=2)))
def test_letter_products(a, b):
    phase, c = letter_product(a, b)
    assert np.allclose(oracle.PAULI[a] @ oracle.PAULI[b], phase * oracle.PAULI[c])


def test_known_products():
    assert letter_product("X", "Y") == (1j, "Z")
    assert letter_product("Z", "X") == (1j, "Y")
    assert letter_product("Y", "Y") == (1, "I")


def test_parse_and_str():
    p = PauliString.parse("-XYZ")
    assert p.sign == -1 and p.letters == "XYZ"
    assert str(p) == "-XYZ"
    assert PauliString.parse("IZ") == PauliString("IZ")
    assert p.weight == 3


@pytest.mark.parametrize("bad", ["", "XQ", "xz"])
def test_rejects_invalid_letters(bad):
    with pytest.raises(ValueError):
        PauliString(bad)


def test_rejects_bad_sign():
    with pytest.raises(ValueError):
        PauliString("X", 2)


def test_length_mismatch():
    with pytest.raises(ValueError):
        PauliString("XZ").multiply(PauliString("X"))
    with pytest.raises(ValueError):
        pauli_expectation(np.eye(2) / 2, PauliString("XX"))


def test_anticommuting_product_is_not_hermitian():
    with pytest.raises(ValueError):
        PauliString("X") * PauliString("Z")


@settings(max_examples=100, deadline=None)
@given(a=strings, b=strings, sa=st.sampled_from([1, -1]), sb=st.sampled_from([1, -1]))
def test_multiplication_is_a_homomorphism(a, b, sa, sb):
    pa, pb = PauliString(a, sa), PauliString(b, sb)
    phase, prod = pa.multiply(pb)
    assert np.allclose(pa.matrix() @ pb.matrix(), phase * prod.matrix())
    commute = np.allclose(pa.matrix() @ pb.matrix(), pb.matrix() @ pa.matrix())
    assert pa.commutes_with(pb) == commute


@settings(max_examples=50, deadline=None)
@given(letters=strings, sign=st.sampled_from([1, -1]), seed=st.integers(0, 10**6))
def test_expectation_matches_trace(letters, sign, seed):
    rng = np.random.default_rng(seed)
    a = rng.normal(size=(8, 8)) + 1j * rng.normal(size=(8, 8))
    rho = a @ a.conj().T
    rho /= np.trace(rho)
    p = PauliString(letters, sign)
    assert pauli_expectation(rho, p) == pytest.approx(np.trace(p.matrix() @ rho).real, abs=1e-12)


def test_expectation_examples():
    assert pauli_expectation(np.diag([1, 0]), PauliString("Z")) == pytest.approx(1)
    psi, _, _ = oracle.cluster_state(1, 2)
    rho = np.outer(psi, psi.conj())
    assert pauli_expectation(rho, PauliString("XZ")) == pytest.approx(1)
    for label in all_paulis(2):
        if label not in ("II", "XZ", "ZX", "YY"):
            assert abs(pauli_expectation(rho, PauliString(label))) < 1e-12


def test_all_paulis_order():
    labels = list(all_paulis(2))
    assert len(labels) == 16
    assert labels[:5] == ["II", "IX", "IY", "IZ", "XI"]


@pytest.mark.parametrize("letter", "XYZ")
def test_measurement_rotation_maps_eigenbasis(letter):
    u = measurement_rotation(letter)
    rotated = u @ oracle.PAULI[letter] @ u.conj().T
    assert np.allclose(rotated, oracle.Z)
