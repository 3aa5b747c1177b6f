"""Process matrices in the Pauli basis."""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from ..densmat import rx, ry
from ..pauli import PauliString, all_paulis

INPUT_ROTATIONS = ("I", "X180", "Y90", "X90")


def input_rotation(name: str) -> np.ndarray:
    table = {"I": np.eye(2, dtype=complex), "X180": rx(np.pi), "Y90": ry(np.pi / 2), "X90": rx(np.pi / 2)}
    return table[name]


def input_settings(n: int) -> list[tuple[str, ...]]:
    """All ``4**n`` preparation settings, one rotation name per qubit."""
    return list(itertools.product(INPUT_ROTATIONS, repeat=n))


def input_state(setting: Sequence[str]) -> np.ndarray:
    """Density matrix of the rotations in ``setting`` applied to ``|0...0>``."""
    psi = np.array([1.0 + 0j])
    for name in setting:
        psi = np.kron(psi, input_rotation(name)[:, 0])
    return np.outer(psi, psi.conj())


def _basis(n: int) -> list[np.ndarray]:
    return [PauliString(p).matrix() for p in all_paulis(n)]


@dataclass(frozen=True, eq=False)
class ProcessMatrix:
    """Normalized process matrix ``chi`` over the Pauli basis (IXYZ order)."""

    chi: np.ndarray

    @property
    def n_qubits(self) -> int:
        return int(round(np.log(self.chi.shape[0]) / np.log(4)))

    @property
    def labels(self) -> list[str]:
        return list(all_paulis(self.n_qubits))

    def is_hermitian(self, tol: float = 1e-9) -> bool:
        return bool(np.abs(self.chi - self.chi.conj().T).max() <= tol)

    def min_eigenvalue(self) -> float:
        return float(np.linalg.eigvalsh(0.5 * (self.chi + self.chi.conj().T)).min())

    def apply(self, rho: np.ndarray) -> np.ndarray:
        mats = _basis(self.n_qubits)
        out = np.zeros_like(rho, dtype=complex)
        for j, a in enumerate(mats):
            for k, b in enumerate(mats):
                if self.chi[j, k] != 0:
                    out += self.chi[j, k] * a @ rho @ b.conj().T
        return out


def chi_from_superoperator(superop: np.ndarray) -> ProcessMatrix:
    """Convert a row-major superoperator ``vec(out) = S vec(in)`` into ``chi``.

    With ``T_jk = A_j (x) conj(A_k)``, the ``T_jk`` are orthogonal with norm
    ``d**2``, so ``chi_jk = Tr(T_jk^dag S) / d**2``.
    """
    dim = int(round(np.sqrt(superop.shape[0])))
    n = int(round(np.log2(dim)))
    mats = _basis(n)
    m = len(mats)
    chi = np.zeros((m, m), dtype=complex)
    for j, a in enumerate(mats):
        for k, b in enumerate(mats):
            t = np.kron(a, b.conj())
            chi[j, k] = np.vdot(t, superop) / dim**2
    chi = 0.5 * (chi + chi.conj().T)
    tr = np.real(np.trace(chi))
    if tr <= 0:
        raise ArithmeticError("process matrix has non-positive trace")
    return ProcessMatrix(chi / tr)


def process_tomography(inputs: Sequence[np.ndarray], outputs: Sequence[np.ndarray]) -> ProcessMatrix:
    """Linear-inversion process matrix from input/output density matrices.

    The superoperator is the least-squares solution of
    ``vec(out_i) = S vec(in_i)`` over all pairs.
    """
    if len(inputs) != len(outputs) or not inputs:
        raise ValueError("need matching, non-empty input and output lists")
    x = np.array([np.asarray(r, dtype=complex).reshape(-1) for r in inputs]).T
    y = np.array([np.asarray(r, dtype=complex).reshape(-1) for r in outputs]).T
    if np.linalg.matrix_rank(x, tol=1e-9) < x.shape[0]:
        raise np.linalg.LinAlgError("input states do not span the operator space")
    superop = np.linalg.lstsq(x.T, y.T, rcond=None)[0].T
    return chi_from_superoperator(superop)


def process_tomography_from(channel: Callable[[Sequence[str]], np.ndarray], n: int) -> ProcessMatrix:
    """Run ``channel(setting)`` for every preparation setting and reconstruct."""
    settings = input_settings(n)
    ins = [input_state(s) for s in settings]
    outs = [channel(s) for s in settings]
    return process_tomography(ins, outs)


def chi_from_unitary(u: np.ndarray) -> ProcessMatrix:
    """Process matrix of ``rho -> U rho U^dag``."""
    u = np.asarray(u, dtype=complex)
    n = int(round(np.log2(u.shape[0])))
    coeffs = np.array([np.vdot(a, u) / u.shape[0] for a in _basis(n)])
    return ProcessMatrix(np.outer(coeffs, coeffs.conj()))


def process_fidelity(chi: ProcessMatrix, ideal: ProcessMatrix) -> float:
    """``Tr(chi chi_ideal)`` for normalized process matrices."""
    if chi.chi.shape != ideal.chi.shape:
        raise ValueError("dimension mismatch")
    return float(np.real(np.trace(chi.chi @ ideal.chi)))
