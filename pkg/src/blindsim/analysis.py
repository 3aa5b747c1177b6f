"""Error budgets, resource counts and pass-fail projections."""

from __future__ import annotations

import csv
from dataclasses import asdict, dataclass
from typing import IO, Callable, Mapping

import numpy as np

from .engine.noise import SOURCES, NoiseModel, Schedule
from .engine.runner import ProtocolSpec, run_protocol
from .pattern import DJ_IDEAL, dj_pattern, entangler_pattern, t_gate_pattern, target_vector

SOURCE_NAMES = {"1q": "single-qubit gate", "2q": "two-qubit gate", "readout": "readout", "idle": "idling"}

# average device error rates used by the pass-fail model
DEVICE_RATES = {"1q": 0.00086, "2q": 0.0102, "idle": 0.0096, "ro": 0.0077}


# ---------------------------------------------------------------- figures of merit


def sequence_fidelity(spec: ProtocolSpec, noise: NoiseModel, sched: Schedule | None = None) -> float:
    """Output figure of merit of an enumerated run.

    State fidelity to the ideal output for patterns that leave their outputs
    on the client, probability of the ideal bitstring otherwise.
    """
    if spec.mode != "enumerate":
        raise ValueError("figures of merit need enumerate mode")
    result = run_protocol(spec, noise, sched)
    if result.output_state is not None and not result.final_nodes:
        psi = target_vector(spec.pattern)
        return float(np.real(psi.conj() @ result.output_state @ psi))
    from .pattern import ideal_output

    ideal = ideal_output(spec.pattern).probabilities
    best = max(ideal, key=ideal.get)
    return float(result.distribution.get(best, 0.0))


SEQUENCES: dict[str, Callable[[], object]] = {
    "mb-1q": t_gate_pattern,
    "mb-2q": entangler_pattern,
    "mb-dj": lambda: dj_pattern("balanced"),
}


def sequence_spec(name: str) -> ProtocolSpec:
    if name not in SEQUENCES:
        raise ValueError(f"unknown sequence {name!r}; expected one of {sorted(SEQUENCES)}")
    return ProtocolSpec(SEQUENCES[name](), snapshots=False)


# ---------------------------------------------------------------- error budget


@dataclass(frozen=True)
class ErrorBudget:
    participation: dict[str, float]
    total_error: float
    halved_error: dict[str, float]

    def ranked(self) -> list[str]:
        return sorted(self.participation, key=self.participation.get, reverse=True)


def error_budget(spec: ProtocolSpec, noise: NoiseModel | None = None, sched: Schedule | None = None) -> ErrorBudget:
    """Participation of each error source by halving it in turn.

    The derivative ``(E - E_half) / (p / 2)`` weighted by the mean rate
    ``p`` reduces to ``2 (E - E_half)``, so the rates themselves cancel.
    Idling is halved by doubling every coherence time.
    """
    noise = noise if noise is not None else NoiseModel()
    if not noise.enabled:
        raise ValueError("error budget needs an enabled noise model")
    total = 1.0 - sequence_fidelity(spec, noise, sched)
    if total <= 0:
        raise ArithmeticError("total error is zero; budget undefined")
    halved = {s: 1.0 - sequence_fidelity(spec, noise.scaled(s, 0.5), sched) for s in SOURCES}
    weights = {s: 2.0 * (total - halved[s]) for s in SOURCES}
    if any(w < -1e-12 for w in weights.values()):
        raise ArithmeticError("halving a source increased the error")
    norm = sum(weights.values())
    if norm <= 0:
        raise ArithmeticError("no source contributes to the error")
    return ErrorBudget({s: max(w, 0.0) / norm for s, w in weights.items()}, total, halved)


# ---------------------------------------------------------------- resources


@dataclass(frozen=True)
class ResourceCount:
    qubits: int
    gates_1q: int
    gates_2q: int
    readouts: int
    idles: int

    def __post_init__(self):
        if min(asdict(self).values()) < 0:
            raise ValueError("counts must be non-negative")


FAMILIES = ("dj-gate-based", "dj-mbqc", "mb-1q-unitary", "mb-2q-entangle", "gate-1q-unitary", "gate-2q-entangle")


def resource_count(family: str, n: int = 1) -> ResourceCount:
    """Closed-form operation counts of a circuit family.

    ``n`` is the number of oracle inputs for the Deutsch-Jozsa families and
    ignored otherwise.  The gate-based references for the primitives are a
    three-pulse single-qubit unitary and ``H, H, CZ, H`` for the entangled
    pair.
    """
    if family == "dj-gate-based":
        _check_n(n)
        return ResourceCount(n + 1, 4 * n + 1, n, 0, 0)
    if family == "dj-mbqc":
        _check_n(n)
        return ResourceCount(2 * n + 2, 18 * n, 4 * n + 5, 2 * n + 2, 4 * n + 4)
    if family == "mb-1q-unitary":
        return ResourceCount(2, 24, 5, 3, 3)
    if family == "mb-2q-entangle":
        return ResourceCount(4, 24, 7, 4, 2)
    if family == "gate-1q-unitary":
        return ResourceCount(1, 3, 0, 0, 0)
    if family == "gate-2q-entangle":
        return ResourceCount(2, 3, 1, 0, 0)
    raise ValueError(f"unknown family {family!r}; expected one of {FAMILIES}")


def _check_n(n: int) -> None:
    if n < 1:
        raise ValueError("input size must be at least 1")


# ---------------------------------------------------------------- pass-fail model


def pass_fail_success(counts: ResourceCount, rates: Mapping[str, float] = DEVICE_RATES) -> float:
    """Product of per-operation survival probabilities."""
    for key in ("1q", "2q", "idle", "ro"):
        r = rates[key]
        if not 0.0 <= r < 1.0:
            raise ValueError(f"rate {key}={r} must lie in [0, 1)")
    return (
        (1.0 - rates["1q"]) ** counts.gates_1q
        * (1.0 - rates["2q"]) ** counts.gates_2q
        * (1.0 - rates["idle"]) ** counts.idles
        * (1.0 - rates["ro"]) ** counts.readouts
    )


def scale_rates(rates: Mapping[str, float], factor: float) -> dict[str, float]:
    return {k: v / factor for k, v in rates.items()}


def solve_improvement(
    improved: ResourceCount,
    reference: ResourceCount,
    rates: Mapping[str, float] = DEVICE_RATES,
    lo: float = 1.0,
    hi: float = 1e4,
    rtol: float = 1e-12,
) -> float:
    """Factor ``x`` by which dividing all rates of ``improved`` matches ``reference``."""
    goal = pass_fail_success(reference, rates)

    def gap(x):
        return pass_fail_success(improved, scale_rates(rates, x)) - goal

    if gap(lo) >= 0:
        return lo
    if gap(hi) < 0:
        raise ArithmeticError("no improvement factor in the bracket")
    while hi - lo > rtol * lo:
        mid = 0.5 * (lo + hi)
        if gap(mid) < 0:
            lo = mid
        else:
            hi = mid
    x = 0.5 * (lo + hi)
    # the left side must grow with x across the bracket
    assert gap(x * (1 + 1e-3)) >= gap(x / (1 + 1e-3))
    return x


def improvement_factor(n: int, rates: Mapping[str, float] = DEVICE_RATES) -> float:
    """Rate reduction making measurement-based DJ match the gate-based circuit."""
    _check_n(n)
    return solve_improvement(resource_count("dj-mbqc", n), resource_count("dj-gate-based", n), rates)


def gate_improvement_factors(rates: Mapping[str, float] = DEVICE_RATES) -> dict[str, float]:
    """Improvement factors of the two measurement-based primitives."""
    return {
        "mb-1q-unitary": solve_improvement(resource_count("mb-1q-unitary"), resource_count("gate-1q-unitary"), rates),
        "mb-2q-entangle": solve_improvement(resource_count("mb-2q-entangle"), resource_count("gate-2q-entangle"), rates),
    }


# ---------------------------------------------------------------- projections


def project_fidelity(noise: NoiseModel | None = None, sched: Schedule | None = None) -> dict[str, float]:
    """Output fidelities of the benchmark sequences under ``noise``.

    Defaults to the state-of-the-art model.  The DJ entries are success
    probabilities of the two oracles.
    """
    noise = noise if noise is not None else NoiseModel.state_of_the_art()
    out = {
        "mb-1q": sequence_fidelity(sequence_spec("mb-1q"), noise, sched),
        "mb-2q": sequence_fidelity(sequence_spec("mb-2q"), noise, sched),
    }
    for oracle in DJ_IDEAL:
        spec = ProtocolSpec(dj_pattern(oracle), snapshots=False)
        out[f"mb-dj-{oracle}"] = sequence_fidelity(spec, noise, sched)
    return out


# ---------------------------------------------------------------- tables


def write_budget_csv(budget: ErrorBudget, handle: IO[str]) -> None:
    w = csv.writer(handle, lineterminator="\n")
    w.writerow(["source", "participation"])
    for s in SOURCES:
        w.writerow([SOURCE_NAMES[s], f"{budget.participation[s]:.6f}"])


def write_resources_csv(rows: list[tuple[str, int, ResourceCount]], handle: IO[str]) -> None:
    w = csv.writer(handle, lineterminator="\n")
    w.writerow(["family", "n", "qubits", "gates_1q", "gates_2q", "readouts", "idles"])
    for family, n, c in rows:
        w.writerow([family, n, c.qubits, c.gates_1q, c.gates_2q, c.readouts, c.idles])


def write_projection_csv(table: Mapping[str, float], handle: IO[str]) -> None:
    w = csv.writer(handle, lineterminator="\n")
    w.writerow(["sequence", "fidelity"])
    for name, value in table.items():
        w.writerow([name, f"{value:.6f}"])


def success_vs_size(n_max: int = 20, rates: Mapping[str, float] = DEVICE_RATES) -> list[tuple[int, float, float]]:
    """Pass-fail success of both DJ families for ``n = 1 .. n_max``."""
    return [
        (
            n,
            pass_fail_success(resource_count("dj-gate-based", n), rates),
            pass_fail_success(resource_count("dj-mbqc", n), rates),
        )
        for n in range(1, n_max + 1)
    ]


