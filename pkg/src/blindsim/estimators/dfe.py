"""Direct fidelity estimation of cluster states by stabilizer sampling."""

from __future__ import annotations

import csv
from dataclasses import dataclass
from typing import IO, Sequence

import numpy as np

from ..pattern import ClusterGraph, stabilizer_from_subset, subset_from_pauli
from ..pauli import PauliString

ROUND_ROBIN_MAX_NODES = 8
MITIGATION_SLACK = 0.2
CSV_COLUMNS = ("pauli_string", "expectation", "shots", "mitigated")


def sample_stabilizers(graph: ClusterGraph, n_p: int, rng: np.random.Generator | None = None) -> list[PauliString]:
    """Draw ``n_p`` stabilizers of the cluster on ``graph``.

    Small clusters (at most eight nodes) cycle deterministically through the
    whole group, subset ``m`` selecting generator ``i`` when bit ``i`` of
    ``m`` is set.  Larger clusters draw uniformly random generator subsets.
    """
    if n_p < 1:
        raise ValueError("n_p must be at least 1")
    n = graph.n_nodes
    out = []
    if n <= ROUND_ROBIN_MAX_NODES:
        size = 1 << n
        for j in range(n_p):
            m = j % size
            out.append(stabilizer_from_subset(graph, [(m >> i) & 1 for i in range(n)]))
        return out
    if rng is None:
        raise ValueError("random sampling needs an rng")
    for _ in range(n_p):
        out.append(stabilizer_from_subset(graph, rng.integers(0, 2, size=n).tolist()))
    return out


@dataclass(frozen=True)
class StabilizerSample:
    pauli: PauliString
    expectation: float
    shots: int
    mitigated: bool

    def __post_init__(self):
        bound = 1.0 + (MITIGATION_SLACK if self.mitigated else 1e-12)
        if abs(self.expectation) > bound:
            raise ValueError(f"expectation {self.expectation} out of range")


def estimate_cluster_fidelity(
    samples: Sequence[StabilizerSample],
    n_boot: int = 1000,
    level: float = 0.997,
    rng: np.random.Generator | None = None,
) -> tuple[float, tuple[float, float]]:
    """Mean stabilizer expectation and its percentile bootstrap interval."""
    if not samples:
        raise ValueError("no stabilizer samples")
    values = np.array([s.expectation for s in samples], dtype=float)
    rng = rng if rng is not None else np.random.default_rng(0)
    idx = rng.integers(0, values.size, size=(n_boot, values.size))
    means = values[idx].mean(axis=1)
    tail = 100.0 * (1.0 - level) / 2.0
    lo, hi = np.percentile(means, [tail, 100.0 - tail])
    return float(values.mean()), (float(lo), float(hi))


def simulate_samples(
    simulator,
    paulis: Sequence[PauliString],
    shots: int,
    rng: np.random.Generator,
    mitigate: bool = True,
) -> list[StabilizerSample]:
    """Finite-shot stabilizer measurements from exact noisy expectations.

    The parity of ``shots`` readouts is binomial with mean given by the
    unmitigated expectation (readout errors included); mitigation divides by
    the readout bias of the stabilizer, which equals per-shot confusion-matrix
    inversion for symmetric confusion.
    """
    graph = simulator.graph
    out = []
    for p in paulis:
        subset = subset_from_pauli(graph, p)
        raw = simulator.expectation(subset, mitigate=False)
        if p.sign != stabilizer_from_subset(graph, subset).sign:
            raw = -raw
        q = min(max(0.5 * (1.0 + raw), 0.0), 1.0)
        plus = rng.binomial(shots, q)
        value = 2.0 * plus / shots - 1.0
        if mitigate:
            value /= simulator.parity_bias(subset)
        out.append(StabilizerSample(p, value, shots, mitigate))
    return out


def write_samples_csv(samples: Sequence[StabilizerSample], handle: IO[str]) -> None:
    writer = csv.writer(handle, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    for s in samples:
        writer.writerow([str(s.pauli), repr(s.expectation), s.shots, int(s.mitigated)])
