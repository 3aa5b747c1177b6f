"""Signed Pauli strings and their action on density matrices."""

from __future__ import annotations

from dataclasses import dataclass
from functools import reduce

import numpy as np

LETTERS = "IXYZ"

_MATS = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}

# single-letter products: (a, b) -> (phase, letter) with a*b = phase * letter
_PRODUCT = {}
for _a in LETTERS:
    for _b in LETTERS:
        _m = _MATS[_a] @ _MATS[_b]
        for _c in LETTERS:
            _ph = np.trace(_MATS[_c].conj().T @ _m) / 2
            if abs(abs(_ph) - 1) < 1e-12:
                _PRODUCT[_a, _b] = (complex(round(_ph.real), round(_ph.imag)), _c)


def letter_product(a: str, b: str) -> tuple[complex, str]:
    return _PRODUCT[a, b]


@dataclass(frozen=True)
class PauliString:
    """A tensor product of Paulis with an overall sign of +1 or -1."""

    letters: str
    sign: int = 1

    def __post_init__(self):
        if not self.letters or any(c not in LETTERS for c in self.letters):
            raise ValueError(f"invalid Pauli letters {self.letters!r}")
        if self.sign not in (1, -1):
            raise ValueError("sign must be +1 or -1")

    @property
    def n_qubits(self) -> int:
        return len(self.letters)

    @property
    def weight(self) -> int:
        return sum(c != "I" for c in self.letters)

    def __str__(self) -> str:
        return ("+" if self.sign > 0 else "-") + self.letters

    @classmethod
    def parse(cls, text: str) -> "PauliString":
        text = text.strip()
        sign = 1
        if text[:1] in "+-":
            sign = -1 if text[0] == "-" else 1
            text = text[1:]
        return cls(text, sign)

    def matrix(self) -> np.ndarray:
        return self.sign * reduce(np.kron, (_MATS[c] for c in self.letters))

    def multiply(self, other: "PauliString") -> tuple[complex, "PauliString"]:
        """Return ``(phase, P)`` with ``self @ other == phase * P`` and P.sign = +1."""
        if self.n_qubits != other.n_qubits:
            raise ValueError("length mismatch")
        phase = complex(self.sign * other.sign)
        out = []
        for a, b in zip(self.letters, other.letters):
            ph, c = _PRODUCT[a, b]
            phase *= ph
            out.append(c)
        return phase, PauliString("".join(out))

    def __mul__(self, other: "PauliString") -> "PauliString":
        phase, p = self.multiply(other)
        if abs(phase.imag) > 0.5:
            raise ValueError("product of anticommuting strings is not Hermitian")
        return PauliString(p.letters, 1 if phase.real > 0 else -1)

    def commutes_with(self, other: "PauliString") -> bool:
        anti = sum(
            a != "I" and b != "I" and a != b for a, b in zip(self.letters, other.letters)
        )
        return anti % 2 == 0

    def masks(self) -> tuple[int, int, int]:
        """Bit masks (x, z, n_y) over basis indices; qubit 0 is the MSB."""
        n = self.n_qubits
        x = z = 0
        n_y = 0
        for q, c in enumerate(self.letters):
            bit = 1 << (n - 1 - q)
            if c in "XY":
                x |= bit
            if c in "YZ":
                z |= bit
            if c == "Y":
                n_y += 1
        return x, z, n_y


def _popcount_parity(values: np.ndarray, mask: int) -> np.ndarray:
    v = values & mask
    parity = np.zeros_like(v)
    while np.any(v):
        parity ^= v & 1
        v >>= 1
    return parity


def pauli_expectation(rho: np.ndarray, pauli: PauliString) -> float:
    """``Tr(P rho)`` without building the Pauli matrix."""
    dim = rho.shape[0]
    if dim != 1 << pauli.n_qubits:
        raise ValueError("dimension mismatch")
    x, z, n_y = pauli.masks()
    k = np.arange(dim)
    signs = 1 - 2 * _popcount_parity(k, z)
    vals = rho[k, k ^ x] * signs
    return float(np.real(pauli.sign * (1j**n_y) * vals.sum()))


def all_paulis(n: int):
    """All ``4**n`` unsigned strings in lexicographic IXYZ order."""
    if n == 0:
        yield ""
        return
    for head in LETTERS:
        for tail in all_paulis(n - 1):
            yield head + tail


def measurement_rotation(letter: str) -> np.ndarray:
    """Single-qubit unitary mapping the eigenbasis of ``letter`` onto Z."""
    h = np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2)
    if letter in "IZ":
        return np.eye(2, dtype=complex)
    if letter == "X":
        return h
    if letter == "Y":
        return h @ np.diag([1, -1j])
    raise ValueError(letter)
