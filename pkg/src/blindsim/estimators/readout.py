"""Readout assignment matrices and mitigated expectation values."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from ..pauli import PauliString


@dataclass(frozen=True, eq=False)
class AssignmentMatrix:
    """Row-stochastic 2x2 matrix; ``matrix[b, r]`` is p(read r | prepared b)."""

    matrix: np.ndarray

    def __post_init__(self):
        m = np.array(self.matrix, dtype=float)
        if m.shape != (2, 2):
            raise ValueError("assignment matrix must be 2x2")
        if np.any(m < 0) or np.any(m > 1):
            raise ValueError("entries must lie in [0, 1]")
        if np.abs(m.sum(axis=1) - 1).max() > 1e-12:
            raise ValueError("rows must sum to one")
        if abs(np.linalg.det(m)) <= 1e-6:
            raise ValueError("assignment matrix is singular")
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)

    @classmethod
    def identity(cls) -> "AssignmentMatrix":
        return cls(np.eye(2))

    @classmethod
    def symmetric(cls, flip: float) -> "AssignmentMatrix":
        return cls(np.array([[1 - flip, flip], [flip, 1 - flip]]))

    @classmethod
    def from_flips(cls, p10: float, p01: float) -> "AssignmentMatrix":
        """``p10`` = p(read 1 | prepared 0), ``p01`` = p(read 0 | prepared 1)."""
        return cls(np.array([[1 - p10, p10], [p01, 1 - p01]]))

    @property
    def response(self) -> np.ndarray:
        """Column-stochastic response ``A[r, b] = p(r | b)``."""
        return self.matrix.T

    @property
    def is_identity(self) -> bool:
        return bool(np.allclose(self.matrix, np.eye(2), atol=0, rtol=0))

    @property
    def mean_error(self) -> float:
        return 0.5 * (self.matrix[0, 1] + self.matrix[1, 0])

    def scaled(self, factor: float) -> "AssignmentMatrix":
        """Scale both flip probabilities by ``factor``."""
        return AssignmentMatrix.from_flips(self.matrix[0, 1] * factor, self.matrix[1, 0] * factor)

    def __eq__(self, other):
        return isinstance(other, AssignmentMatrix) and np.array_equal(self.matrix, other.matrix)

    def __hash__(self):
        return hash(self.matrix.tobytes())


def _as_bits(shots) -> np.ndarray:
    if isinstance(shots, np.ndarray):
        bits = shots.astype(np.int64)
    else:
        rows = [[int(ch) for ch in s] if isinstance(s, str) else list(s) for s in shots]
        bits = np.array(rows, dtype=np.int64)
    if bits.ndim != 2:
        raise ValueError("shots must be a list of bitstrings")
    return bits


def mitigate_readout(
    shots,
    observable: PauliString,
    assignment: Sequence[AssignmentMatrix] | None = None,
) -> float:
    """Mitigated mean of a tensor-product observable.

    Every non-identity letter is read as ``Z`` in the measured basis (the
    pre-rotation is assumed done).  Each shot contributes
    ``prod_k <e| O_k A_k^{-1} |s_k>`` with ``A_k`` the response matrix and
    ``e`` the all-ones vector.  With identity assignment this is the plain
    parity average.
    """
    bits = _as_bits(shots)
    n = observable.n_qubits
    if bits.shape[1] != n:
        raise ValueError("bitstring length differs from the observable")
    if assignment is None:
        assignment = [AssignmentMatrix.identity()] * n
    if len(assignment) != n:
        raise ValueError("one assignment matrix per qubit required")
    value = np.full(bits.shape[0], float(observable.sign))
    for k, letter in enumerate(observable.letters):
        diag = np.ones(2) if letter == "I" else np.array([1.0, -1.0])
        inv = np.linalg.inv(assignment[k].response)
        # row vector <e| O_k A_k^{-1}, indexed by the observed bit
        weights = diag @ inv
        value *= weights[bits[:, k]]
    return float(value.mean())


def parity_factor(letters: str, assignment: Sequence[AssignmentMatrix]) -> float:
    """Bias ``prod (1 - 2 p_k)`` of a parity under symmetric flips."""
    out = 1.0
    for letter, a in zip(letters, assignment):
        if letter == "I":
            continue
        if not np.isclose(a.matrix[0, 1], a.matrix[1, 0], atol=1e-15):
            raise ValueError("parity mitigation requires symmetric assignment")
        out *= 1.0 - 2.0 * a.matrix[0, 1]
    return out


def sample_pauli_shots(
    rho: np.ndarray,
    pauli: PauliString,
    shots: int,
    rng: np.random.Generator,
    assignment: Sequence[AssignmentMatrix] | None = None,
) -> np.ndarray:
    """Draw ``shots`` bitstrings from measuring ``rho`` in the eigenbases of ``pauli``.

    Identity letters are measured in Z.  Bits are flipped classically by
    ``assignment`` afterwards.
    """
    from .. import kernels
    from ..pauli import measurement_rotation

    n = pauli.n_qubits
    r = np.array(rho, dtype=complex, copy=True, order="C")
    for q, letter in enumerate(pauli.letters):
        if letter in "XY":
            kernels.apply_1q(r, kernels.as_operator(measurement_rotation(letter)), q, n)
    probs = np.clip(np.real(np.diagonal(r)), 0, None)
    probs = probs / probs.sum()
    idx = rng.choice(probs.size, size=shots, p=probs)
    bits = (idx[:, None] >> np.arange(n - 1, -1, -1)[None, :]) & 1
    if assignment is not None:
        for k, a in enumerate(assignment):
            u = rng.random(shots)
            flip_prob = np.where(bits[:, k] == 0, a.matrix[0, 1], a.matrix[1, 0])
            bits[:, k] ^= (u < flip_prob).astype(bits.dtype)
    return bits
