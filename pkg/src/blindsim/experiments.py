"""High-level experiment runners shared by the command line and the test suites."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .engine.noise import NoiseModel, Schedule
from .engine.runner import ProtocolSpec, run_protocol
from .engine.stabilizer import StabilizerSimulator
from .estimators.dfe import estimate_cluster_fidelity, sample_stabilizers, simulate_samples
from .estimators.process import (
    ProcessMatrix,
    chi_from_unitary,
    input_rotation,
    process_fidelity,
    process_tomography_from,
)
from .estimators.tomography import (
    MLE,
    TomographyResult,
    pauli_expectations,
    sample_expectations,
    state_tomography,
)
from .pattern import (
    DJ_IDEAL,
    build_cluster_graph,
    dj_pattern,
    entangler_pattern,
    pattern_unitary,
    t_gate_pattern,
    target_vector,
)

GATES = {"t": t_gate_pattern, "bell2q": entangler_pattern}

DEFAULT_SHOTS = 8192
RANDOM_SAMPLES = 400
ROUND_ROBIN_SAMPLES = 256


# ---------------------------------------------------------------- cluster states


@dataclass
class ClusterFidelity:
    w: int
    d: int
    n: int
    estimate: float
    ci: tuple[float, float]
    exact: float
    samples: list


def default_sample_count(n_nodes: int) -> int:
    return ROUND_ROBIN_SAMPLES if n_nodes <= 8 else RANDOM_SAMPLES


def cluster_fidelity(
    w: int,
    d: int,
    noise: NoiseModel,
    sched: Schedule,
    rng: np.random.Generator,
    n_p: int | None = None,
    shots: int = DEFAULT_SHOTS,
    mitigate: bool = True,
) -> ClusterFidelity:
    """Sampled DFE estimate next to the exact mean over all stabilizers."""
    graph = build_cluster_graph(w, d)
    sim = StabilizerSimulator(graph, noise, sched)
    n_p = n_p if n_p is not None else default_sample_count(graph.n_nodes)
    paulis = sample_stabilizers(graph, n_p, rng)
    samples = simulate_samples(sim, paulis, shots, rng, mitigate)
    estimate, ci = estimate_cluster_fidelity(samples, rng=rng)
    exact = sim.fidelity(mitigate)
    return ClusterFidelity(w, d, graph.n_nodes, estimate, ci, exact, samples)


# ---------------------------------------------------------------- gates


def gate_output(gate: str, noise: NoiseModel, sched: Schedule, input_prep=None) -> np.ndarray:
    pattern = GATES[gate]()
    spec = ProtocolSpec(pattern, snapshots=False, input_prep=input_prep)
    return run_protocol(spec, noise, sched).output_state


def gate_state_tomography(
    gate: str,
    noise: NoiseModel,
    sched: Schedule,
    shots: int = 0,
    rng: np.random.Generator | None = None,
    method: str = MLE,
) -> TomographyResult:
    """Tomography of the gate output for the default ``|+>`` inputs.

    With ``shots == 0`` the exact expectations are used; otherwise each
    Pauli is estimated from ``shots`` readout-mitigated samples.
    """
    pattern = GATES[gate]()
    rho = gate_output(gate, noise, sched)
    if shots:
        flip = noise.effective_readout("C0").mean_error
        exp = sample_expectations(rho, shots, rng, flip)
    else:
        exp = pauli_expectations(rho)
    return state_tomography(exp, method, target=target_vector(pattern), shots=shots or None)


def gate_process(gate: str, noise: NoiseModel, sched: Schedule) -> tuple[ProcessMatrix, float]:
    """Process matrix of the gate and its fidelity to the ideal unitary."""
    pattern = GATES[gate]()
    rows = pattern.graph.rows()

    def channel(setting):
        prep = {r: input_rotation(name) for r, name in zip(rows, setting)}
        return gate_output(gate, noise, sched, prep)

    chi = process_tomography_from(channel, len(rows))
    return chi, process_fidelity(chi, chi_from_unitary(pattern_unitary(pattern)))


# ---------------------------------------------------------------- Deutsch-Jozsa


def hamming_summary(counts: dict[str, float], ideal: str) -> dict[int, float]:
    """Total weight per Hamming distance from ``ideal``, normalized."""
    total = sum(counts.values())
    out = {k: 0.0 for k in range(len(ideal) + 1)}
    for bits, c in counts.items():
        dist = sum(a != b for a, b in zip(bits, ideal))
        out[dist] += c / total
    return out


def dj_run(oracle: str, noise: NoiseModel, sched: Schedule, shots: int, seed: int, mode: str = "monte-carlo"):
    """Output histogram of the DJ pattern.

    Returns ``(counts_or_probabilities, hamming, ideal)``.
    """
    pattern = dj_pattern(oracle)
    ideal = DJ_IDEAL[oracle]
    if mode == "enumerate":
        dist = run_protocol(ProtocolSpec(pattern, snapshots=False), noise, sched).distribution
        return dist, hamming_summary(dist, ideal), ideal
    res = run_protocol(ProtocolSpec(pattern, "monte-carlo", shots, seed, snapshots=False), noise, sched)
    counts = res.counts()
    return counts, hamming_summary(counts, ideal), ideal
