"""Dense density matrices, gates and channels.

Qubit 0 is the most significant bit of a basis index, so ``|q0 q1 ... >``
maps to index ``q0 * 2**(n-1) + ... ``.  All functions return new
:class:`DensityState` objects; the kernels in :mod:`blindsim.kernels` do the
in-place work on copies.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import kernels

STRUCT_TOL = 1e-10
MIN_BRANCH_PROB = 1e-12

_SQ2 = 1.0 / math.sqrt(2.0)

SINGLE_QUBIT = {"H", "X", "Y", "Z", "S", "T", "RX", "RY", "RZ"}
TWO_QUBIT = {"CZ", "CNOT", "SWAP"}
PARAMETRIC = {"RX", "RY", "RZ"}


def rx(theta: float) -> np.ndarray:
    c, s = math.cos(theta / 2), math.sin(theta / 2)
    return np.array([[c, -1j * s], [-1j * s, c]], dtype=complex)


def ry(theta: float) -> np.ndarray:
    c, s = math.cos(theta / 2), math.sin(theta / 2)
    return np.array([[c, -s], [s, c]], dtype=complex)


def rz(theta: float) -> np.ndarray:
    return np.array(
        [[np.exp(-0.5j * theta), 0], [0, np.exp(0.5j * theta)]], dtype=complex
    )


_FIXED = {
    "H": np.array([[_SQ2, _SQ2], [_SQ2, -_SQ2]], dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
    "S": np.array([[1, 0], [0, 1j]], dtype=complex),
    "T": np.array([[1, 0], [0, np.exp(0.25j * np.pi)]], dtype=complex),
    "CZ": np.diag([1, 1, 1, -1]).astype(complex),
    "CNOT": np.array(
        [[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]], dtype=complex
    ),
    "SWAP": np.array(
        [[1, 0, 0, 0], [0, 0, 1, 0], [0, 1, 0, 0], [0, 0, 0, 1]], dtype=complex
    ),
}
_ROTATIONS = {"RX": rx, "RY": ry, "RZ": rz}


@dataclass(frozen=True)
class GateOp:
    """A named gate acting on ``targets``; ``theta`` is set for rotations."""

    kind: str
    targets: tuple[int, ...]
    theta: float | None = None

    def __post_init__(self):
        object.__setattr__(self, "targets", tuple(int(t) for t in self.targets))
        if self.kind in SINGLE_QUBIT:
            arity = 1
        elif self.kind in TWO_QUBIT:
            arity = 2
        else:
            raise ValueError(f"unknown gate kind {self.kind!r}")
        if len(self.targets) != arity:
            raise ValueError(f"{self.kind} acts on {arity} qubit(s)")
        if arity == 2 and self.targets[0] == self.targets[1]:
            raise ValueError("two-qubit gate needs distinct targets")
        if (self.kind in PARAMETRIC) != (self.theta is not None):
            raise ValueError(f"theta mismatch for {self.kind}")

    def matrix(self) -> np.ndarray:
        if self.kind in PARAMETRIC:
            return _ROTATIONS[self.kind](self.theta)
        return _FIXED[self.kind].copy()


def gate_matrix(op: GateOp) -> np.ndarray:
    return op.matrix()


@dataclass(frozen=True, eq=False)
class DensityState:
    """An ``n``-qubit density matrix with validated structure."""

    matrix: np.ndarray
    n_qubits: int = field(init=False)

    def __post_init__(self):
        rho = np.ascontiguousarray(self.matrix, dtype=np.complex128)
        if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
            raise ValueError("density matrix must be square")
        n = int(round(math.log2(rho.shape[0]))) if rho.shape[0] else -1
        if n < 1 or (1 << n) != rho.shape[0]:
            raise ValueError("dimension must be a power of two (n >= 1)")
        object.__setattr__(self, "matrix", rho)
        object.__setattr__(self, "n_qubits", n)

    def validate(self, tol: float = STRUCT_TOL) -> None:
        """Raise ``ValueError`` unless Hermitian, unit trace and PSD within ``tol``."""
        rho = self.matrix
        if np.abs(rho - rho.conj().T).max() > tol:
            raise ValueError("not Hermitian")
        if abs(np.trace(rho) - 1.0) > tol:
            raise ValueError("trace is not one")
        if np.linalg.eigvalsh(0.5 * (rho + rho.conj().T)).min() < -tol:
            raise ValueError("not positive semidefinite")

    @classmethod
    def zeros(cls, n: int) -> "DensityState":
        if n < 1:
            raise ValueError("n must be >= 1")
        rho = np.zeros((1 << n, 1 << n), dtype=complex)
        rho[0, 0] = 1.0
        return cls(rho)

    @classmethod
    def from_vector(cls, psi: Sequence[complex]) -> "DensityState":
        psi = np.asarray(psi, dtype=complex)
        norm = np.linalg.norm(psi)
        if norm == 0:
            raise ValueError("zero vector")
        psi = psi / norm
        return cls(np.outer(psi, psi.conj()))

    @classmethod
    def maximally_mixed(cls, n: int) -> "DensityState":
        return cls(np.eye(1 << n, dtype=complex) / (1 << n))

    def copy(self) -> "DensityState":
        return DensityState(self.matrix.copy())

    def __array__(self, dtype=None, copy=None):
        return self.matrix if dtype is None else self.matrix.astype(dtype)


def _check_targets(state: DensityState, targets: Sequence[int]) -> None:
    for t in targets:
        if not 0 <= t < state.n_qubits:
            raise IndexError(f"qubit {t} out of range for {state.n_qubits} qubits")


def apply_gate(state: DensityState, op: GateOp) -> DensityState:
    _check_targets(state, op.targets)
    rho = state.matrix.copy()
    u = kernels.as_operator(op.matrix())
    if len(op.targets) == 1:
        kernels.apply_1q(rho, u, op.targets[0], state.n_qubits)
    else:
        kernels.apply_2q(rho, u, op.targets[0], op.targets[1], state.n_qubits)
    return DensityState(rho)


def apply_unitary(state: DensityState, u: np.ndarray, targets: Sequence[int]) -> DensityState:
    """Apply an arbitrary 1- or 2-qubit unitary ``u`` on ``targets``."""
    _check_targets(state, targets)
    rho = state.matrix.copy()
    u = kernels.as_operator(u)
    if len(targets) == 1:
        kernels.apply_1q(rho, u, targets[0], state.n_qubits)
    elif len(targets) == 2:
        kernels.apply_2q(rho, u, targets[0], targets[1], state.n_qubits)
    else:
        raise ValueError("only 1- and 2-qubit unitaries are supported")
    return DensityState(rho)


def apply_depolarizing(state: DensityState, targets: Sequence[int], p: float) -> DensityState:
    """``(1-p) rho + p * (Tr_targets rho) (x) I/2^N`` for N = 1 or 2 targets."""
    if not 0.0 <= p <= 1.0:
        raise ValueError("p must lie in [0, 1]")
    _check_targets(state, targets)
    rho = state.matrix.copy()
    if len(targets) == 1:
        kernels.depolarize_1q(rho, targets[0], state.n_qubits, p)
    elif len(targets) == 2:
        if targets[0] == targets[1]:
            raise ValueError("distinct targets required")
        kernels.depolarize_2q(rho, targets[0], targets[1], state.n_qubits, p)
    else:
        raise ValueError("depolarizing acts on 1 or 2 qubits")
    return DensityState(rho)


def relaxation_factors(tau: float, t1: float, t2: float) -> tuple[float, float]:
    """Population and coherence decay factors for an idle of ``tau`` seconds."""
    if tau < 0:
        raise ValueError("negative idle duration")
    if t1 <= 0 or t2 <= 0:
        raise ValueError("T1 and T2 must be positive")
    if t2 > 2 * t1 * (1 + 1e-12):
        raise ValueError("unphysical relaxation: T2 > 2 T1")
    return math.exp(-tau / t1), math.exp(-tau / t2)


def apply_thermal_relaxation(
    state: DensityState, target: int, tau: float, t1: float, t2: float
) -> DensityState:
    a, b = relaxation_factors(tau, t1, t2)
    _check_targets(state, [target])
    rho = state.matrix.copy()
    kernels.thermal_relax(rho, target, state.n_qubits, a, b)
    return DensityState(rho)


def z_probabilities(state: DensityState, target: int) -> tuple[float, float]:
    _check_targets(state, [target])
    p0 = kernels.z_probability(state.matrix, target, state.n_qubits, 0)
    p1 = kernels.z_probability(state.matrix, target, state.n_qubits, 1)
    return p0, p1


def branch_measure(state: DensityState, target: int):
    """Both post-measurement branches as ``[(outcome, prob, normalized_state)]``.

    Branches with probability below ``MIN_BRANCH_PROB`` are dropped.
    """
    _check_targets(state, [target])
    out = []
    for bit in (0, 1):
        rho = state.matrix.copy()
        p = kernels.project(rho, target, state.n_qubits, bit)
        if p >= MIN_BRANCH_PROB:
            out.append((bit, p, DensityState(rho / p)))
    return out


def measure_z(state: DensityState, target: int, u: float) -> tuple[int, DensityState]:
    """Projective Z measurement driven by the uniform draw ``u`` in [0, 1).

    Outcome 0 is returned when ``u < p0``.
    """
    if not 0.0 <= u < 1.0:
        raise ValueError("u must lie in [0, 1)")
    p0, p1 = z_probabilities(state, target)
    bit = 0 if u < p0 / (p0 + p1) else 1
    rho = state.matrix.copy()
    p = kernels.project(rho, target, state.n_qubits, bit)
    if p < MIN_BRANCH_PROB:
        raise ValueError("measurement outcome has negligible probability")
    return bit, DensityState(rho / p)


def partial_trace(state: DensityState, keep: Sequence[int]) -> DensityState:
    """Reduced state on the qubits in ``keep`` (returned in ascending order)."""
    keep = sorted(set(int(k) for k in keep))
    _check_targets(state, keep)
    if not keep:
        raise ValueError("must keep at least one qubit")
    return DensityState(reduce_matrix(state.matrix, state.n_qubits, keep))


def reduce_matrix(rho: np.ndarray, n: int, keep: Sequence[int]) -> np.ndarray:
    keep = sorted(keep)
    drop = [q for q in range(n) if q not in keep]
    t = rho.reshape((2,) * (2 * n))
    row_idx = list(range(n))
    col_idx = list(range(n, 2 * n))
    for q in drop:
        col_idx[q] = row_idx[q]
    out = [row_idx[q] for q in keep] + [col_idx[q] for q in keep]
    k = 1 << len(keep)
    return np.einsum(t, row_idx + col_idx, out).reshape(k, k)


def fidelity_pure(state: DensityState, psi: Sequence[complex]) -> float:
    psi = np.asarray(psi, dtype=complex)
    if psi.shape != (state.matrix.shape[0],):
        raise ValueError("dimension mismatch")
    psi = psi / np.linalg.norm(psi)
    return float(np.real(psi.conj() @ state.matrix @ psi))


def purity(state: DensityState) -> float:
    return float(np.real(np.vdot(state.matrix, state.matrix)))


def von_neumann_entropy(state: DensityState) -> float:
    """Entropy in bits."""
    return matrix_entropy(state.matrix)


def matrix_entropy(rho: np.ndarray) -> float:
    evals = np.linalg.eigvalsh(0.5 * (rho + rho.conj().T))
    evals = evals[evals > 1e-15]
    return float(-(evals * np.log2(evals)).sum())


def bloch_vector(state: DensityState) -> tuple[float, float, float]:
    if state.n_qubits != 1:
        raise ValueError("Bloch vector needs a single qubit")
    rho = state.matrix
    return (
        float(2 * rho[0, 1].real),
        float(-2 * rho[0, 1].imag),
        float((rho[0, 0] - rho[1, 1]).real),
    )


def trace_distance(a: DensityState, b: DensityState) -> float:
    evals = np.linalg.eigvalsh(a.matrix - b.matrix)
    return float(0.5 * np.abs(evals).sum())
