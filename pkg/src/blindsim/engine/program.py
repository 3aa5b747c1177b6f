"""Lowering of a cluster pattern onto the server/client device.

The protocol is compiled into *moments*.  A moment lasts as long as its
longest operation; every simulated qubit that is not busy for the whole
moment relaxes for its idle share.  Moments are flattened into a list of
steps that the executor in :mod:`blindsim.engine.runner` interprets.

Physical register for a pattern using rows ``R``: server qubits ``S_r``
first, then client qubits ``C_r``, both in the order of ``R``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Mapping

import numpy as np

from ..densmat import rx, ry
from ..pattern import ClusterGraph, Node
from .noise import NoiseModel, Schedule

H = np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2)
X = np.array([[0, 1], [1, 0]], dtype=complex)
Z = np.diag([1, -1]).astype(complex)
CZ = np.diag([1, 1, 1, -1]).astype(complex)
RY_M = np.ascontiguousarray(ry(-np.pi / 2))
RY_P = np.ascontiguousarray(ry(np.pi / 2))

MAX_ROWS = 3


# ---------------------------------------------------------------- steps


@dataclass(frozen=True)
class GateStep:
    qubits: tuple[int, ...]
    u: np.ndarray
    dep: float


@dataclass(frozen=True)
class RotateStep:
    """Client basis rotation before reading ``node``; the matrix comes from
    the executor's rotator.  ``idle`` and ``rest`` are relaxation factors for
    the unplayed and played cases."""

    qubit: int
    node: Node
    dep: float
    idle: tuple[float, float]
    rest: tuple[float, float]


@dataclass(frozen=True)
class MeasureStep:
    qubit: int
    node: Node
    dep: float
    confusion: np.ndarray  # row-stochastic p(read r | true s)


@dataclass(frozen=True)
class CondXStep:
    """X pulse on ``qubit`` when the parity of ``bits`` in the record is 1."""

    qubit: int
    bits: frozenset
    dep: float
    idle: tuple[float, float]
    rest: tuple[float, float]


@dataclass(frozen=True)
class VirtualZStep:
    qubit: int
    bits: frozenset


@dataclass(frozen=True)
class RelaxStep:
    qubit: int
    a: float
    b: float


@dataclass(frozen=True)
class SnapshotStep:
    stage: str


@dataclass(frozen=True)
class MergeStep:
    """Signed-mode boundary: branches of one cycle are summed here."""


# ---------------------------------------------------------------- moments


@dataclass
class _Op:
    kind: str  # gate | rotate | measure | condx | virtz
    qubits: tuple[int, ...]
    duration: int
    payload: object = None


@dataclass
class Segment:
    kind: str  # prep | pre | rotate | post | swap | final
    col: int
    steps: list = field(default_factory=list)
    duration: int = 0


class _Lowering:
    def __init__(self, rows, noise: NoiseModel, sched: Schedule):
        self.rows = list(rows)
        self.noise = noise
        self.sched = sched
        w = len(self.rows)
        self.server = {r: i for i, r in enumerate(self.rows)}
        self.client = {r: w + i for i, r in enumerate(self.rows)}
        self.labels = [f"S{r}" for r in self.rows] + [f"C{r}" for r in self.rows]
        self.n_qubits = 2 * w

    def is_server(self, q: int) -> bool:
        return q < len(self.rows)

    def relax_factors(self, q: int, tau: float, echo: bool) -> tuple[float, float]:
        return self.noise.relax(self.labels[q], tau, echo and self.is_server(q))

    def gate(self, qubits, u, duration=None):
        dur = duration if duration is not None else (
            self.sched.dur_1q if len(qubits) == 1 else self.sched.dur_cz
        )
        return _Op("gate", tuple(qubits), dur, np.ascontiguousarray(u, dtype=complex))

    def moment(self, seg: Segment, ops, duration=None, echo=False):
        """Append one moment to ``seg``; empty moments without explicit
        duration are dropped."""
        if not ops and not duration:
            return
        busy: dict[int, int] = {}
        for op in ops:
            for q in op.qubits:
                busy[q] = busy.get(q, 0) + op.duration
        dur = max([duration or 0] + list(busy.values()))
        conditional = set()
        for op in ops:
            seg.steps.extend(self._emit(op, dur, echo))
            if op.kind in ("rotate", "condx"):
                conditional.update(op.qubits)
        for q in range(self.n_qubits):
            if q in conditional:
                continue
            tau = dur - busy.get(q, 0)
            a, b = self.relax_factors(q, tau, echo)
            if (a, b) != (1.0, 1.0):
                seg.steps.append(RelaxStep(q, a, b))
        seg.duration += dur

    def _emit(self, op: _Op, dur: int, echo: bool):
        n = self.noise
        if op.kind == "gate":
            dep = n.dep_1q if len(op.qubits) == 1 else n.dep_2q
            return [GateStep(op.qubits, op.payload, dep)]
        q = op.qubits[0] if op.qubits else None
        if op.kind == "rotate":
            idle = self.relax_factors(q, dur, echo)
            rest = self.relax_factors(q, dur - op.duration, echo)
            return [RotateStep(q, op.payload, n.dep_1q, idle, rest)]
        if op.kind == "measure":
            label = self.labels[q]
            confusion = n.assignment_of(label).matrix
            return [MeasureStep(q, op.payload, n.dep_ro, np.array(confusion))]
        if op.kind == "condx":
            idle = self.relax_factors(q, dur, echo)
            rest = self.relax_factors(q, dur - op.duration, echo)
            return [CondXStep(q, frozenset(op.payload), n.dep_1q, idle, rest)]
        if op.kind == "virtz":
            return [VirtualZStep(q, frozenset(op.payload))]
        raise ValueError(op.kind)

    def cz_moments(self, seg: Segment, pairs, echo=False):
        """Pack CZs into as few moments as the parallel rules allow."""
        groups: list[list] = []
        for pair in pairs:
            labels = tuple(self.labels[q] for q in pair)
            for g in groups:
                used = {q for p in g for q in p}
                if used & set(pair):
                    continue
                cand = [tuple(self.labels[q] for q in p) for p in g] + [labels]
                if self.sched.may_share(cand):
                    g.append(pair)
                    break
            else:
                groups.append([pair])
        for g in groups:
            self.moment(seg, [self.gate(p, CZ) for p in g], echo=echo)


# ---------------------------------------------------------------- program


@dataclass
class Program:
    """Compiled protocol: ordered segments plus register metadata."""

    rows: list[int]
    n_qubits: int
    labels: list[str]
    server: dict[int, int]
    client: dict[int, int]
    segments: list[Segment]
    measured_nodes: list[Node]
    output_rows: list[int]
    final_nodes: list[Node]

    @property
    def steps(self) -> list:
        return [s for seg in self.segments for s in seg.steps]

    @property
    def elapsed_ns(self) -> int:
        return sum(seg.duration for seg in self.segments)

    def durations(self) -> dict[str, int]:
        """Elapsed time per block: ``prep``, ``cycle{k}`` and ``swap``."""
        out: dict[str, int] = {}
        for seg in self.segments:
            key = seg.kind if seg.kind in ("prep", "swap", "final") else f"cycle{seg.col}"
            out[key] = out.get(key, 0) + seg.duration
        return out

    def server_qubits(self) -> list[int]:
        return [self.server[r] for r in self.rows]

    def client_qubits(self, rows=None) -> list[int]:
        return [self.client[r] for r in (rows if rows is not None else self.rows)]


def compile_program(
    graph: ClusterGraph,
    noise: NoiseModel,
    sched: Schedule,
    *,
    final_bases: Mapping[Node, str] | None = None,
    corrections: Mapping[int, tuple[frozenset, frozenset]] | None = None,
    input_prep: Mapping[int, np.ndarray] | None = None,
) -> Program:
    """Lower ``graph`` onto the device.

    ``final_bases`` lists the final-column nodes read out after the SWAP
    (others stay on the client as outputs).  ``corrections`` holds the
    per-row byproduct parities applied after the SWAP.  ``input_prep``
    replaces the Hadamard that creates a first-column node.
    """
    rows = graph.rows()
    if graph.w > MAX_ROWS or (rows and max(rows) >= MAX_ROWS):
        raise ValueError(f"the device has {MAX_ROWS} rows; got width {graph.w}")
    low = _Lowering(rows, noise, sched)
    S, C = low.server, low.client
    d = graph.d
    col_rows = [sorted(r for r, c in graph.nodes if c == k) for k in range(d)]
    segments: list[Segment] = []
    measured: list[Node] = []
    final_bases = dict(final_bases or {})
    corrections = dict(corrections or {})
    input_prep = dict(input_prep or {})

    # initial preparation of the first column
    seg = Segment("prep", 0)
    ops = []
    for r in col_rows[0]:
        u = input_prep.get(r, H)
        if np.allclose(u, np.eye(2)):
            continue
        ops.append(low.gate((S[r],), u))
    low.moment(seg, ops, duration=sched.dur_1q)
    for a, b in graph.vertical_edges(0):
        low.moment(seg, [low.gate((S[a[0]], S[b[0]]), CZ)])
    low.moment(seg, [], duration=sched.prep_pad)
    seg.steps.append(SnapshotStep("prep"))
    segments.append(seg)

    for k in range(d - 1):
        here, nxt = col_rows[k], col_rows[k + 1]
        pre = Segment("pre", k)
        # CNOT S_r -> C_r written as Ry(-pi/2) . CZ . Ry(pi/2) on the client
        low.moment(pre, [low.gate((C[r],), RY_M) for r in here])
        low.cz_moments(pre, [(S[r], C[r]) for r in here])
        ops = [low.gate((C[r],), RY_P) for r in here]
        ops += [low.gate((S[r],), H) for r in nxt]
        low.moment(pre, ops)
        vertical = [(S[a[0]], S[b[0]]) for a, b in graph.vertical_edges(k + 1)]
        if vertical:
            low.moment(pre, [low.gate(vertical[0], CZ)])
        rot = Segment("rotate", k)
        low.moment(
            rot,
            [_Op("rotate", (C[r],), sched.dur_1q, (r, k)) for r in here],
            duration=sched.dur_1q,
        )
        post = Segment("post", k)
        low.moment(
            post,
            [_Op("measure", (C[r],), sched.dur_ro, (r, k)) for r in here],
            duration=sched.dur_ro,
            echo=True,
        )
        # feed-forward latency; remaining server CZs run meanwhile
        low.moment(post, [low.gate(p, CZ) for p in vertical[1:]], duration=sched.dur_ff_idle)
        low.moment(
            post,
            [_Op("condx", (C[r],), sched.dur_1q, {(r, k)}) for r in here],
            duration=sched.dur_1q,
        )
        post.steps.append(MergeStep())
        post.steps.append(SnapshotStep(f"cycle{k}"))
        measured += [(r, k) for r in here]
        segments += [pre, rot, post]

    # SWAP server -> client with two CNOTs (client starts in |0>)
    last = col_rows[d - 1]
    swap = Segment("swap", d - 1)
    low.moment(swap, [low.gate((C[r],), RY_M) for r in last])
    low.cz_moments(swap, [(S[r], C[r]) for r in last])
    low.moment(swap, [low.gate((C[r],), RY_P) for r in last] + [low.gate((S[r],), RY_M) for r in last])
    low.cz_moments(swap, [(S[r], C[r]) for r in last])
    low.moment(swap, [low.gate((S[r],), RY_P) for r in last])
    ops = []
    for r in last:
        xb, zb = corrections.get(r, (frozenset(), frozenset()))
        ops.append(_Op("condx", (C[r],), sched.dur_1q, xb))
        if zb:
            ops.append(_Op("virtz", (C[r],), 0, zb))
    low.moment(swap, ops, duration=sched.dur_1q)
    low.moment(swap, [], duration=sched.swap_pad)
    swap.steps.append(SnapshotStep("swap"))
    segments.append(swap)

    final_nodes = [(r, d - 1) for r in last if (r, d - 1) in final_bases]
    if final_nodes:
        rot = Segment("final", d - 1)
        low.moment(
            rot,
            [_Op("rotate", (C[r],), sched.dur_1q, (r, c)) for r, c in final_nodes],
            duration=sched.dur_1q,
        )
        low.moment(
            rot,
            [_Op("measure", (C[r],), sched.dur_ro, (r, c)) for r, c in final_nodes],
            duration=sched.dur_ro,
            echo=True,
        )
        rot.steps.append(MergeStep())
        segments.append(rot)
        measured += final_nodes

    return Program(
        rows=rows,
        n_qubits=low.n_qubits,
        labels=low.labels,
        server=S,
        client=C,
        segments=segments,
        measured_nodes=measured,
        output_rows=[r for r in last if (r, d - 1) not in final_bases],
        final_nodes=final_nodes,
    )


Rotator = Callable[[Node, Mapping[Node, int]], "np.ndarray | None"]


def basis_rotation(theta: float) -> np.ndarray:
    """``H RZ(-theta)``: maps B(theta) onto the computational basis."""
    return H @ np.diag([1.0, np.exp(-1j * theta)])


def process_input_rotations() -> dict[str, np.ndarray]:
    """Preparation pulses used for process tomography inputs."""
    return {
        "I": np.eye(2, dtype=complex),
        "X180": rx(np.pi),
        "Y90": ry(np.pi / 2),
        "X90": rx(np.pi / 2),
    }
