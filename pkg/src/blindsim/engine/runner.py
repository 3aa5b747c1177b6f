"""Execution of compiled protocols.

Two modes share one interpreter:

* ``enumerate`` keeps every outcome branch as an unnormalized density
  matrix, so probabilities and outcome-averaged states are exact.
* ``monte-carlo`` samples one branch per shot from pre-drawn uniforms.
  Because every non-measurement step is a fixed channel, the state reached
  by an outcome prefix is deterministic; it is cached and shared by shots.
"""

from __future__ import annotations

import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from .. import kernels
from ..densmat import reduce_matrix
from ..pattern import COMPUTATIONAL_Z, MeasurementPattern, Node
from .noise import NoiseModel, Schedule
from .program import (
    CondXStep,
    GateStep,
    MeasureStep,
    MergeStep,
    Program,
    RelaxStep,
    RotateStep,
    SnapshotStep,
    VirtualZStep,
    X,
    Z,
    basis_rotation,
    compile_program,
)

PRUNE = 1e-13
_X = kernels.as_operator(X)
_Z = kernels.as_operator(Z)


@dataclass
class Branch:
    rho: np.ndarray
    record: dict = field(default_factory=dict)
    weight: complex = 1.0


def _parity(bits, record) -> int:
    return sum(record[b] for b in bits) & 1


class Executor:
    """Interprets program steps over a list of branches.

    ``rotator(node, record)`` returns the client rotation before reading
    ``node`` (``None`` for no pulse).  When ``signed`` maps nodes to Pauli
    letters the executor accumulates ``(-1)^bit`` weights (times ``scale``
    per non-identity letter) and sums branches at every merge step.
    """

    def __init__(self, program: Program, rotator, signed=None, scale=None, on_snapshot=None):
        self.program = program
        self.n = program.n_qubits
        self.rotator = rotator
        self.signed = signed
        self.scale = scale or {}
        self.on_snapshot = on_snapshot

    def run(self, steps, branches: list[Branch]) -> list[Branch]:
        n = self.n
        for step in steps:
            t = type(step)
            if t is RelaxStep:
                for br in branches:
                    kernels.thermal_relax(br.rho, step.qubit, n, step.a, step.b)
            elif t is GateStep:
                for br in branches:
                    self._gate(br.rho, step.qubits, step.u, step.dep)
            elif t is RotateStep:
                for br in branches:
                    u = self.rotator(step.node, br.record)
                    if u is None:
                        self._relax(br.rho, step.qubit, step.idle)
                    else:
                        self._gate(br.rho, (step.qubit,), kernels.as_operator(u), step.dep)
                        self._relax(br.rho, step.qubit, step.rest)
            elif t is MeasureStep:
                branches = self._measure(step, branches)
            elif t is CondXStep:
                for br in branches:
                    if step.bits and _parity(step.bits, br.record):
                        self._gate(br.rho, (step.qubit,), _X, step.dep)
                        self._relax(br.rho, step.qubit, step.rest)
                    else:
                        self._relax(br.rho, step.qubit, step.idle)
            elif t is VirtualZStep:
                for br in branches:
                    if _parity(step.bits, br.record):
                        kernels.apply_1q(br.rho, _Z, step.qubit, n)
            elif t is SnapshotStep:
                if self.on_snapshot is not None:
                    self.on_snapshot(step.stage, branches)
            elif t is MergeStep:
                if self.signed is not None and branches:
                    total = branches[0].rho * branches[0].weight
                    for br in branches[1:]:
                        total += br.rho * br.weight
                    branches = [Branch(total, {}, 1.0)]
            else:
                raise TypeError(step)
        return branches

    def _gate(self, rho, qubits, u, dep):
        if len(qubits) == 1:
            kernels.apply_1q(rho, u, qubits[0], self.n)
            if dep:
                kernels.depolarize_1q(rho, qubits[0], self.n, dep)
        else:
            kernels.apply_2q(rho, u, qubits[0], qubits[1], self.n)
            if dep:
                kernels.depolarize_2q(rho, qubits[0], qubits[1], self.n, dep)

    def _relax(self, rho, q, factors):
        a, b = factors
        if a != 1.0 or b != 1.0:
            kernels.thermal_relax(rho, q, self.n, a, b)

    def split(self, step: MeasureStep, rho: np.ndarray) -> list[np.ndarray]:
        """Unnormalized states for recorded outcomes 0 and 1."""
        n = self.n
        if step.dep:
            kernels.depolarize_1q(rho, step.qubit, n, step.dep)
        parts = []
        for s in (0, 1):
            r = rho.copy()
            kernels.project(r, step.qubit, n, s)
            parts.append(r)
        conf = step.confusion
        if conf[0, 1] == 0.0 and conf[1, 0] == 0.0:
            return parts
        return [
            conf[0, 0] * parts[0] + conf[1, 0] * parts[1],
            conf[0, 1] * parts[0] + conf[1, 1] * parts[1],
        ]

    def _measure(self, step: MeasureStep, branches):
        out = []
        letter = self.signed.get(step.node, "I") if self.signed is not None else None
        scale = self.scale.get(step.node, 1.0)
        for br in branches:
            for bit, rho in enumerate(self.split(step, br.rho)):
                if letter is None:
                    if float(np.real(np.trace(rho))) < PRUNE:
                        continue
                elif np.abs(rho).max() < PRUNE:
                    # signed operators can have vanishing trace
                    continue
                rec = dict(br.record)
                rec[step.node] = bit
                w = br.weight
                if letter is not None and letter != "I":
                    w = w * scale * (-1 if bit else 1)
                out.append(Branch(rho, rec, w))
        return out


def initial_rho(n: int) -> np.ndarray:
    rho = np.zeros((1 << n, 1 << n), dtype=complex)
    rho[0, 0] = 1.0
    return rho


def pattern_rotator(pattern: MeasurementPattern):
    meas = {m.node: m for m in pattern.measurements}

    def rotator(node, record):
        m = meas[node]
        if m.basis == COMPUTATIONAL_Z:
            return None
        return basis_rotation(m.adapted_theta(record))

    return rotator


def compile_pattern_program(
    pattern: MeasurementPattern,
    noise: NoiseModel,
    sched: Schedule,
    input_prep: Mapping[int, np.ndarray] | None = None,
) -> Program:
    final = {m.node: m.basis for m in pattern.measured_outputs()}
    return compile_program(
        pattern.graph,
        noise,
        sched,
        final_bases=final,
        corrections=pattern.corrections,
        input_prep=input_prep,
    )


# ---------------------------------------------------------------- results


@dataclass
class BranchOutcome:
    record: dict
    probability: float
    output: np.ndarray | None


@dataclass
class EnumerationResult:
    """Exact outcome distribution of an enumerated run.

    ``distribution`` is keyed by the final readout bits ordered by row
    (empty string when nothing is read out at the end).  ``output_state`` is
    the outcome-averaged client state of the unmeasured outputs.
    ``snapshots`` maps stage names to outcome-averaged server states.
    """

    branches: list[BranchOutcome]
    distribution: dict[str, float]
    output_state: np.ndarray | None
    snapshots: dict[str, np.ndarray]
    elapsed_ns: int
    measured_nodes: list[Node]
    final_nodes: list[Node]

    @property
    def total_probability(self) -> float:
        return sum(b.probability for b in self.branches)


@dataclass
class RunRecord:
    """One Monte Carlo shot."""

    outcomes: dict
    output: np.ndarray | None
    snapshots: dict[str, np.ndarray] | None
    elapsed_ns: int

    def bitstring(self, nodes: Sequence[Node]) -> str:
        return "".join(str(self.outcomes[n]) for n in nodes)


@dataclass
class MonteCarloResult:
    records: list[RunRecord]
    seed: int
    measured_nodes: list[Node]
    final_nodes: list[Node]
    elapsed_ns: int

    def counts(self) -> dict[str, int]:
        nodes = self.final_nodes or self.measured_nodes
        out: dict[str, int] = {}
        for rec in self.records:
            key = rec.bitstring(nodes)
            out[key] = out.get(key, 0) + 1
        return dict(sorted(out.items()))


@dataclass(frozen=True)
class ProtocolSpec:
    pattern: MeasurementPattern
    mode: str = "enumerate"
    shots: int = 1
    seed: int = 0
    snapshots: bool = True
    input_prep: Mapping[int, np.ndarray] | None = None

    def __post_init__(self):
        if self.mode not in ("enumerate", "monte-carlo"):
            raise ValueError("mode must be 'enumerate' or 'monte-carlo'")
        if self.mode == "monte-carlo" and self.shots < 1:
            raise ValueError("shots must be >= 1")


def run_protocol(spec: ProtocolSpec, noise: NoiseModel | None = None, sched: Schedule | None = None):
    noise = noise if noise is not None else NoiseModel()
    sched = sched if sched is not None else Schedule()
    program = compile_pattern_program(spec.pattern, noise, sched, spec.input_prep)
    rotator = pattern_rotator(spec.pattern)
    if spec.mode == "enumerate":
        return enumerate_program(program, rotator, spec.snapshots)
    return sample_program(program, rotator, spec.shots, spec.seed, spec.snapshots)


def _server_state(program: Program, rho: np.ndarray) -> np.ndarray:
    return reduce_matrix(rho, program.n_qubits, program.server_qubits())


def _output_state(program: Program, rho: np.ndarray) -> np.ndarray | None:
    if not program.output_rows:
        return None
    return reduce_matrix(rho, program.n_qubits, program.client_qubits(program.output_rows))


def enumerate_program(program: Program, rotator, snapshots: bool = True) -> EnumerationResult:
    snaps: dict[str, np.ndarray] = {}

    def on_snapshot(stage, branches):
        total = sum(float(np.real(np.trace(b.rho))) for b in branches)
        acc = sum(_server_state(program, b.rho) for b in branches)
        snaps[stage] = acc / total

    ex = Executor(program, rotator, on_snapshot=on_snapshot if snapshots else None)
    branches = ex.run(program.steps, [Branch(initial_rho(program.n_qubits))])
    outcomes = []
    dist: dict[str, float] = {}
    avg = None
    for br in branches:
        p = float(np.real(np.trace(br.rho)))
        out = _output_state(program, br.rho)
        if out is not None:
            avg = out.copy() if avg is None else avg + out
            out = out / p
        outcomes.append(BranchOutcome(br.record, p, out))
        key = "".join(str(br.record[n]) for n in program.final_nodes)
        dist[key] = dist.get(key, 0.0) + p
    total = sum(b.probability for b in outcomes)
    if avg is not None:
        avg = avg / total
    dist = {k: v / total for k, v in sorted(dist.items())}
    return EnumerationResult(
        outcomes, dist, avg, snaps, program.elapsed_ns, program.measured_nodes, program.final_nodes
    )


class _PrefixCache:
    """States reached by outcome prefixes, computed on first visit."""

    def __init__(self, program: Program, rotator, snapshots: bool):
        self.program = program
        self.steps = program.steps
        self.measure_at = [i for i, s in enumerate(self.steps) if isinstance(s, MeasureStep)]
        self.snapshots = snapshots
        self.cache: dict = {}
        self.rotator = rotator

    def _run(self, rho, record, start, stop):
        snaps = []

        def on_snapshot(stage, branches):
            if self.snapshots:
                snaps.append((stage, _server_state(self.program, branches[0].rho)))

        ex = Executor(self.program, self.rotator, on_snapshot=on_snapshot)
        br = ex.run(self.steps[start:stop], [Branch(rho.copy(), dict(record))])
        return br[0].rho, snaps, ex

    def node(self, j: int, record: tuple, rho: np.ndarray):
        key = (j, record)
        hit = self.cache.get(key)
        if hit is None:
            start = self.measure_at[j - 1] + 1 if j > 0 else 0
            nodes = [self.steps[i].node for i in self.measure_at[:j]]
            rec = dict(zip(nodes, record))
            if j < len(self.measure_at):
                stop = self.measure_at[j]
                state, snaps, ex = self._run(rho, rec, start, stop)
                parts = ex.split(self.steps[stop], state)
                probs = np.array([max(float(np.real(np.trace(p))), 0.0) for p in parts])
                probs = probs / probs.sum()
                normed = [p / pr if pr > 0 else p for p, pr in zip(parts, probs * 1.0)]
                hit = (probs, normed, snaps)
            else:
                state, snaps, _ = self._run(rho, rec, start, len(self.steps))
                hit = (None, state / np.real(np.trace(state)), snaps)
            self.cache[key] = hit
        return hit


def sample_program(
    program: Program,
    rotator,
    shots: int,
    seed: int,
    snapshots: bool = False,
    workers: int | None = None,
) -> MonteCarloResult:
    """Monte Carlo over ``shots``; the draws are fixed by ``seed`` alone, so
    results do not depend on the number of workers."""
    rng = np.random.default_rng(seed)
    n_meas = sum(isinstance(s, MeasureStep) for s in program.steps)
    draws = rng.random((shots, max(n_meas, 1)))
    workers = workers or worker_count()
    chunks = np.array_split(np.arange(shots), max(1, min(workers, shots)))

    def run_chunk(idx):
        cache = _PrefixCache(program, rotator, snapshots)
        out = []
        for i in idx:
            out.append(_walk(cache, draws[i], program))
        return out

    if len(chunks) == 1:
        parts = [run_chunk(chunks[0])]
    else:
        with ThreadPoolExecutor(max_workers=len(chunks)) as pool:
            parts = list(pool.map(run_chunk, chunks))
    records = [r for part in parts for r in part]
    return MonteCarloResult(records, seed, program.measured_nodes, program.final_nodes, program.elapsed_ns)


def _walk(cache: _PrefixCache, u: np.ndarray, program: Program) -> RunRecord:
    rho = initial_rho(program.n_qubits)
    record: tuple = ()
    snaps: dict[str, np.ndarray] = {}
    j = 0
    while True:
        probs, states, seg_snaps = cache.node(j, record, rho)
        for stage, s in seg_snaps:
            snaps[stage] = s
        if probs is None:
            rho = states
            break
        bit = 0 if u[j] < probs[0] else 1
        rho = states[bit]
        record = record + (bit,)
        j += 1
    nodes = [cache.steps[i].node for i in cache.measure_at]
    outcomes = dict(zip(nodes, record))
    return RunRecord(
        outcomes,
        _output_state(program, rho),
        snaps if cache.snapshots else None,
        program.elapsed_ns,
    )


def worker_count() -> int:
    env = os.environ.get("BLINDSIM_THREADS")
    if env:
        try:
            n = int(env)
        except ValueError:
            raise ValueError("BLINDSIM_THREADS must be a positive integer") from None
        if n < 1:
            raise ValueError("BLINDSIM_THREADS must be a positive integer")
        return n
    return 1


# ---------------------------------------------------------------- stepping


@dataclass
class EngineState:
    """Branch set of a protocol in progress (enumeration semantics)."""

    program: Program
    executor: Executor
    branches: list[Branch]
    position: int = 0
    elapsed_ns: int = 0

    def server_snapshot(self) -> np.ndarray:
        total = sum(float(np.real(np.trace(b.rho))) for b in self.branches)
        return sum(_server_state(self.program, b.rho) for b in self.branches) / total

    def probabilities(self) -> dict[tuple, float]:
        return {
            tuple(sorted(b.record.items())): float(np.real(np.trace(b.rho))) for b in self.branches
        }


def start_protocol(
    pattern: MeasurementPattern,
    noise: NoiseModel | None = None,
    sched: Schedule | None = None,
    input_prep=None,
) -> EngineState:
    """Compile ``pattern`` and run the initial server preparation."""
    noise = noise if noise is not None else NoiseModel()
    sched = sched if sched is not None else Schedule()
    program = compile_pattern_program(pattern, noise, sched, input_prep)
    ex = Executor(program, pattern_rotator(pattern))
    state = EngineState(program, ex, [Branch(initial_rho(program.n_qubits))])
    return _advance(state, {"prep"})


def _advance(state: EngineState, kinds, col=None) -> EngineState:
    segs = state.program.segments
    branches = state.branches
    elapsed = state.elapsed_ns
    pos = state.position
    while pos < len(segs) and segs[pos].kind in kinds and (col is None or segs[pos].col == col):
        branches = state.executor.run(segs[pos].steps, branches)
        elapsed += segs[pos].duration
        pos += 1
    return EngineState(state.program, state.executor, branches, pos, elapsed)


def step_cycle(state: EngineState, col: int):
    """Process column ``col``: transfer, adaptive rotation, readout, reset.

    Returns ``(state, outcome_probabilities, elapsed_ns)`` where the
    probabilities are keyed by the bits of the column's nodes.
    """
    segs = state.program.segments
    if state.position >= len(segs) or segs[state.position].kind != "pre" or segs[state.position].col != col:
        raise ValueError(f"column {col} is not the next cycle")
    before = state.elapsed_ns
    new = _advance(state, {"pre", "rotate", "post"}, col)
    nodes = [(r, c) for r, c in state.program.measured_nodes if c == col]
    probs: dict[str, float] = {}
    total = sum(float(np.real(np.trace(b.rho))) for b in new.branches)
    for b in new.branches:
        key = "".join(str(b.record[n]) for n in nodes)
        probs[key] = probs.get(key, 0.0) + float(np.real(np.trace(b.rho))) / total
    return new, probs, new.elapsed_ns - before


def final_swap(state: EngineState) -> EngineState:
    """Move the outputs to the client and apply the byproduct correction."""
    segs = state.program.segments
    if state.position >= len(segs) or segs[state.position].kind != "swap":
        raise ValueError("cycles remain before the SWAP")
    return _advance(state, {"swap"})


def server_snapshot(result: EnumerationResult, checkpoint) -> np.ndarray:
    """Outcome-averaged server state at ``checkpoint`` (stage name or index)."""
    stages = list(result.snapshots)
    if isinstance(checkpoint, int):
        if not 0 <= checkpoint < len(stages):
            raise IndexError("checkpoint out of range")
        checkpoint = stages[checkpoint]
    if checkpoint not in result.snapshots:
        raise KeyError(f"no snapshot {checkpoint!r}")
    return result.snapshots[checkpoint]
