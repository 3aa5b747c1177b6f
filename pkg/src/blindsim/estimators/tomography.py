"""State tomography from Pauli expectation values."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from ..pauli import PauliString, all_paulis, pauli_expectation

LINEAR = "linear-inversion"
MLE = "mle"
METHODS = (LINEAR, MLE)


def pauli_expectations(rho: np.ndarray) -> dict[str, float]:
    """Exact expectations of every non-identity Pauli string."""
    rho = np.asarray(rho, dtype=complex)
    n = int(round(np.log2(rho.shape[0])))
    return {p: pauli_expectation(rho, PauliString(p)) for p in all_paulis(n) if set(p) != {"I"}}


def sample_expectations(
    rho: np.ndarray,
    shots: int,
    rng: np.random.Generator,
    flip: float = 0.0,
) -> dict[str, float]:
    """Finite-shot estimates of every Pauli expectation.

    Each Pauli is measured ``shots`` times; the parity is read with
    independent symmetric bit flips ``flip`` per non-identity letter and then
    rescaled by the inverse bias, so the estimate stays unbiased.
    """
    exact = pauli_expectations(rho)
    out = {}
    for p, value in exact.items():
        bias = (1.0 - 2.0 * flip) ** sum(ch != "I" for ch in p)
        q = min(max(0.5 * (1.0 + bias * value), 0.0), 1.0)
        plus = rng.binomial(shots, q)
        out[p] = (2.0 * plus / shots - 1.0) / bias
    return out


def _pauli_matrix(letters: str) -> np.ndarray:
    return PauliString(letters).matrix()


def linear_inversion(expectations: Mapping[str, float]) -> np.ndarray:
    """``rho = (I + sum_P <P> P) / 2**n``."""
    n = _check_complete(expectations)
    dim = 1 << n
    rho = np.eye(dim, dtype=complex)
    for p, value in expectations.items():
        if set(p) == {"I"}:
            continue
        rho += value * _pauli_matrix(p)
    rho /= dim
    return 0.5 * (rho + rho.conj().T)


def project_to_states(rho: np.ndarray) -> np.ndarray:
    """Closest density matrix in Frobenius norm.

    Negative eigenvalues are truncated and their weight is spread evenly over
    the remaining ones, repeating until the spectrum is non-negative.
    """
    rho = 0.5 * (rho + rho.conj().T)
    rho = rho / np.real(np.trace(rho))
    evals, vecs = np.linalg.eigh(rho)
    order = np.argsort(evals)[::-1]
    evals, vecs = evals[order], vecs[:, order]
    lam = evals.copy()
    acc = 0.0
    dim = lam.size
    i = dim
    while i > 0 and lam[i - 1] + acc / i < 0:
        acc += lam[i - 1]
        lam[i - 1] = 0.0
        i -= 1
    lam[:i] += acc / i
    out = (vecs * lam) @ vecs.conj().T
    return 0.5 * (out + out.conj().T)


def _check_complete(expectations: Mapping[str, float]) -> int:
    if not expectations:
        raise ValueError("no expectation values given")
    n = len(next(iter(expectations)))
    needed = {p for p in all_paulis(n) if set(p) != {"I"}}
    missing = needed - set(expectations)
    if missing:
        raise ValueError(f"incomplete expectation set: missing {sorted(missing)[:4]}")
    return n


@dataclass
class TomographyResult:
    """Reconstructed state and derived scalars.

    ``fidelity`` is set when a target state vector was supplied.
    """

    rho: np.ndarray
    method: str
    shots: int | None = None
    fidelity: float | None = None
    expectations: dict = field(default_factory=dict)

    @property
    def purity(self) -> float:
        return float(np.real(np.vdot(self.rho, self.rho)))

    @property
    def min_eigenvalue(self) -> float:
        return float(np.linalg.eigvalsh(self.rho).min())

    def to_dict(self) -> dict:
        return {
            "rho_re": np.real(self.rho).tolist(),
            "rho_im": np.imag(self.rho).tolist(),
            "method": self.method,
            "fidelity": self.fidelity,
            "purity": self.purity,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict())


def state_tomography(
    expectations: Mapping[str, float],
    method: str = LINEAR,
    target: Sequence[complex] | None = None,
    shots: int | None = None,
) -> TomographyResult:
    """Reconstruct a state from a complete set of Pauli expectations.

    Parameters
    ----------
    expectations
        Mapping from Pauli letters (e.g. ``"XZ"``) to expectation values;
        all ``4**n - 1`` non-identity strings are required.
    method
        ``"linear-inversion"`` or ``"mle"``.  The latter projects the linear
        estimate onto the positive semidefinite cone.
    target
        Optional pure target state used to fill ``fidelity``.
    """
    if method not in METHODS:
        raise ValueError(f"unknown method {method!r}")
    rho = linear_inversion(expectations)
    if method == MLE:
        rho = project_to_states(rho)
    fid = None
    if target is not None:
        psi = np.asarray(target, dtype=complex)
        psi = psi / np.linalg.norm(psi)
        fid = float(np.real(psi.conj() @ rho @ psi))
    return TomographyResult(rho, method, shots, fid, dict(expectations))


def coherent_error(result: TomographyResult, target: Sequence[complex]) -> float:
    """``(1 + purity) / 2 - fidelity``; zero for purely incoherent noise to first order."""
    psi = np.asarray(target, dtype=complex)
    psi = psi / np.linalg.norm(psi)
    fid = float(np.real(psi.conj() @ result.rho @ psi))
    return 0.5 * (1.0 + result.purity) - fid
