"""Cluster graphs, measurement patterns and Pauli-frame bookkeeping.

Nodes are ``(row, col)`` pairs, both zero-based.  Rows are the logical wires
of the equivalent circuit and columns are measured left to right.  Stabilizer
strings and subset vectors use column-major node order (see
:meth:`ClusterGraph.ordered_nodes`).

A node measured in the equatorial basis ``B(theta)`` implements
``X^s H RZ(-theta)`` on its wire.  An Euler rotation ``H RZ(a3) RX(a2) RZ(a1)``
is therefore a row of nodes carrying ``theta = -a_k``.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

import numpy as np

from .densmat import GateOp
from .pauli import PauliString

Node = tuple[int, int]

EQUATORIAL = "equatorial"
COMPUTATIONAL_Z = "z"
OUTPUT = "output"
BASES = (EQUATORIAL, COMPUTATIONAL_Z, OUTPUT)


def canonical_angle(angle: float) -> float:
    """Map an angle onto (-pi, pi]."""
    out = math.pi - math.fmod(math.pi - angle, 2 * math.pi)
    if out <= -math.pi:
        out += 2 * math.pi
    elif out > math.pi:
        out -= 2 * math.pi
    return out


@dataclass(frozen=True)
class ClusterGraph:
    """A grid subgraph.  Horizontal edges between consecutive nodes of a row
    are always present; ``edges`` lists all edges as sorted node pairs."""

    w: int
    d: int
    nodes: tuple[Node, ...]
    edges: tuple[tuple[Node, Node], ...]

    def __post_init__(self):
        if self.w < 1 or self.d < 1:
            raise ValueError("w and d must be >= 1")
        nodes = tuple(sorted({(int(r), int(c)) for r, c in self.nodes}, key=lambda n: (n[1], n[0])))
        for r, c in nodes:
            if not (0 <= r < self.w and 0 <= c < self.d):
                raise ValueError(f"node {(r, c)} outside the {self.w}x{self.d} grid")
        present = set(nodes)
        edges = set()
        for a, b in self.edges:
            a, b = (tuple(a), tuple(b))
            if a not in present or b not in present:
                raise ValueError(f"edge {a}-{b} references a missing node")
            dr, dc = abs(a[0] - b[0]), abs(a[1] - b[1])
            if dr + dc != 1:
                raise ValueError(f"edge {a}-{b} is not between grid neighbours")
            edges.add(tuple(sorted((a, b))))
        object.__setattr__(self, "nodes", nodes)
        object.__setattr__(self, "edges", tuple(sorted(edges)))
        if not self._connected():
            raise ValueError("cluster graph is not connected")

    def _connected(self) -> bool:
        if not self.nodes:
            return True
        adj = self.adjacency()
        seen = {self.nodes[0]}
        stack = [self.nodes[0]]
        while stack:
            for m in adj[stack.pop()]:
                if m not in seen:
                    seen.add(m)
                    stack.append(m)
        return len(seen) == len(self.nodes)

    @property
    def n_nodes(self) -> int:
        return len(self.nodes)

    def ordered_nodes(self) -> tuple[Node, ...]:
        return self.nodes

    def index(self) -> dict[Node, int]:
        return {n: i for i, n in enumerate(self.nodes)}

    def adjacency(self) -> dict[Node, list[Node]]:
        adj: dict[Node, list[Node]] = {n: [] for n in self.nodes}
        for a, b in self.edges:
            adj[a].append(b)
            adj[b].append(a)
        return adj

    def rows(self) -> list[int]:
        return sorted({r for r, _ in self.nodes})

    def column(self, col: int) -> list[Node]:
        return [n for n in self.nodes if n[1] == col]

    def vertical_edges(self, col: int) -> list[tuple[Node, Node]]:
        return [e for e in self.edges if e[0][1] == col and e[1][1] == col]

    def first_column(self, row: int) -> int:
        return min(c for r, c in self.nodes if r == row)

    @classmethod
    def from_nodes(
        cls,
        w: int,
        d: int,
        nodes: Iterable[Node],
        vertical: Iterable[tuple[Node, Node]] | None = None,
    ) -> "ClusterGraph":
        """Build a graph with all horizontal edges between row neighbours.

        ``vertical`` defaults to every vertical grid adjacency between present
        nodes.
        """
        nodes = {(int(r), int(c)) for r, c in nodes}
        edges = [((r, c), (r, c + 1)) for r, c in nodes if (r, c + 1) in nodes]
        if vertical is None:
            edges += [((r, c), (r + 1, c)) for r, c in nodes if (r + 1, c) in nodes]
        else:
            for a, b in vertical:
                if a[1] != b[1]:
                    raise ValueError("vertical edge must stay in one column")
                edges.append((tuple(a), tuple(b)))
        return cls(w, d, tuple(nodes), tuple(edges))


def build_cluster_graph(w: int, d: int, unused_rows: Iterable[int] = ()) -> ClusterGraph:
    """Full ``w x d`` grid minus the rows in ``unused_rows``."""
    if w < 1 or d < 1:
        raise ValueError("w and d must be >= 1")
    unused = set(unused_rows)
    nodes = [(r, c) for r in range(w) if r not in unused for c in range(d)]
    if not nodes:
        raise ValueError("all rows unused")
    return ClusterGraph.from_nodes(w, d, nodes)


def stabilizer_generators(graph: ClusterGraph) -> list[PauliString]:
    """``X`` on each node times ``Z`` on its neighbours."""
    idx = graph.index()
    adj = graph.adjacency()
    out = []
    for node in graph.nodes:
        letters = ["I"] * graph.n_nodes
        letters[idx[node]] = "X"
        for m in adj[node]:
            letters[idx[m]] = "Z"
        out.append(PauliString("".join(letters)))
    return out


def stabilizer_from_subset(graph: ClusterGraph, subset: Sequence[int]) -> PauliString:
    """Product of the generators selected by the 0/1 vector ``subset``.

    Uses the closed form: a factor -1 per edge inside the subset and -i per
    node carrying both X and Z (``XZ = -iY``).
    """
    subset = [int(b) & 1 for b in subset]
    if len(subset) != graph.n_nodes:
        raise ValueError("subset length must equal the node count")
    idx = graph.index()
    zbits = [0] * graph.n_nodes
    phase = 1
    for a, b in graph.edges:
        ia, ib = idx[a], idx[b]
        zbits[ia] ^= subset[ib]
        zbits[ib] ^= subset[ia]
        if subset[ia] and subset[ib]:
            phase = -phase
    letters = []
    n_y = 0
    for c, z in zip(subset, zbits):
        if c and z:
            letters.append("Y")
            n_y += 1
        else:
            letters.append("X" if c else ("Z" if z else "I"))
    total = complex(phase * (-1j) ** n_y)
    if abs(total.imag) > 1e-9:
        raise AssertionError("stabilizer element with imaginary phase")
    sign = 1 if total.real > 0 else -1
    return PauliString("".join(letters), sign)


def subset_from_pauli(graph: ClusterGraph, pauli: PauliString) -> list[int]:
    """Inverse of :func:`stabilizer_from_subset`: the X-part of the string."""
    return [1 if c in "XY" else 0 for c in pauli.letters]


# --------------------------------------------------------------------------
# Pauli frames


@dataclass(frozen=True)
class PauliFrame:
    """Per-wire X and Z byproduct bits.

    Bits may be ints (numeric frame) or frozensets of nodes (symbolic frame
    whose value is the parity of the referenced outcomes); both support ``^``.
    """

    x: tuple
    z: tuple

    def __post_init__(self):
        if len(self.x) != len(self.z):
            raise ValueError("x and z bit vectors differ in length")

    @classmethod
    def empty(cls, wires: int, symbolic: bool = False) -> "PauliFrame":
        zero = frozenset() if symbolic else 0
        return cls((zero,) * wires, (zero,) * wires)

    def _replace(self, wire: int, x=None, z=None) -> "PauliFrame":
        xs, zs = list(self.x), list(self.z)
        if x is not None:
            xs[wire] = x
        if z is not None:
            zs[wire] = z
        return PauliFrame(tuple(xs), tuple(zs))

    def evaluate(self, outcomes: Mapping[Node, int]) -> "PauliFrame":
        """Turn a symbolic frame into a numeric one."""
        return PauliFrame(
            tuple(_parity(b, outcomes) for b in self.x),
            tuple(_parity(b, outcomes) for b in self.z),
        )


@dataclass(frozen=True)
class Byproduct:
    """Injection of ``X^x Z^z`` on ``wire`` from a measurement outcome."""

    wire: int
    x: object = 0
    z: object = 0


def _parity(bit, outcomes: Mapping[Node, int]) -> int:
    if isinstance(bit, (frozenset, set)):
        return sum(outcomes[n] for n in bit) & 1
    return int(bit) & 1


def propagate_byproduct(frame: PauliFrame, op) -> PauliFrame:
    """Move the frame forward through ``op`` (a GateOp or a Byproduct)."""
    if isinstance(op, Byproduct):
        return frame._replace(op.wire, x=frame.x[op.wire] ^ op.x, z=frame.z[op.wire] ^ op.z)
    if not isinstance(op, GateOp):
        raise TypeError(f"unsupported op {op!r}")
    k = op.kind
    if k in ("X", "Y", "Z", "RZ"):
        # Paulis commute up to sign; the RZ sign flip lives in the adapted angle
        return frame
    if k == "H":
        (q,) = op.targets
        return frame._replace(q, x=frame.z[q], z=frame.x[q])
    if k == "S":
        (q,) = op.targets
        return frame._replace(q, z=frame.z[q] ^ frame.x[q])
    if k == "CZ":
        a, b = op.targets
        out = frame._replace(a, z=frame.z[a] ^ frame.x[b])
        return out._replace(b, z=out.z[b] ^ frame.x[a])
    if k == "CNOT":
        c, t = op.targets
        out = frame._replace(t, x=frame.x[t] ^ frame.x[c])
        return out._replace(c, z=frame.z[c] ^ frame.z[t])
    if k == "SWAP":
        a, b = op.targets
        out = frame._replace(a, x=frame.x[b], z=frame.z[b])
        return out._replace(b, x=frame.x[a], z=frame.z[a])
    raise ValueError(f"cannot propagate a Pauli frame through {k}")


def final_correction(frame: PauliFrame) -> list[GateOp]:
    """Gates undoing a numeric frame: Z then X on every affected wire."""
    ops = []
    for wire, (x, z) in enumerate(zip(frame.x, frame.z)):
        if int(z) & 1:
            ops.append(GateOp("Z", (wire,)))
        if int(x) & 1:
            ops.append(GateOp("X", (wire,)))
    return ops


def adapt_angles(euler: Sequence[float], outcomes: Sequence[int]) -> tuple[float, float, float]:
    """Adapted Euler angles for a three-step rotation given outcomes (s1, s2)."""
    a1, a2, a3 = euler
    s1, s2 = (int(s) & 1 for s in outcomes)
    return (
        canonical_angle(a1),
        canonical_angle((-1) ** s1 * a2),
        canonical_angle((-1) ** s2 * a3 + math.pi * s1),
    )


# --------------------------------------------------------------------------
# Measurement patterns


@dataclass(frozen=True)
class NodeMeasurement:
    node: Node
    basis: str
    theta: float = 0.0
    sign_from: frozenset = frozenset()
    pi_from: frozenset = frozenset()

    def __post_init__(self):
        if self.basis not in BASES:
            raise ValueError(f"unknown basis {self.basis!r}")
        object.__setattr__(self, "node", (int(self.node[0]), int(self.node[1])))
        object.__setattr__(self, "sign_from", frozenset(tuple(n) for n in self.sign_from))
        object.__setattr__(self, "pi_from", frozenset(tuple(n) for n in self.pi_from))

    @property
    def measured(self) -> bool:
        return self.basis != OUTPUT

    def adapted_theta(self, outcomes: Mapping[Node, int]) -> float:
        """``(-1)^sx (theta + pi sz)`` in (-pi, pi]."""
        sx = _parity(self.sign_from, outcomes)
        sz = _parity(self.pi_from, outcomes)
        return canonical_angle((-1) ** sx * (self.theta + math.pi * sz))


@dataclass(frozen=True)
class MeasurementPattern:
    """A cluster graph plus one measurement per node.

    ``corrections`` maps each row to the symbolic ``(x_from, z_from)`` byproduct
    left on its final-column node; the client undoes it before readout.
    """

    graph: ClusterGraph
    measurements: tuple[NodeMeasurement, ...]
    corrections: Mapping[int, tuple[frozenset, frozenset]] = field(default_factory=dict)

    def __post_init__(self):
        by_node = {m.node: m for m in self.measurements}
        if set(by_node) != set(self.graph.nodes) or len(by_node) != len(self.measurements):
            raise ValueError("exactly one measurement per graph node is required")
        order = tuple(sorted(self.measurements, key=lambda m: (m.node[1], m.node[0])))
        object.__setattr__(self, "measurements", order)
        position = {m.node: i for i, m in enumerate(order)}
        last = self.graph.d - 1
        for m in order:
            if m.node[1] < last and m.basis != EQUATORIAL:
                raise ValueError(f"node {m.node}: only equatorial bases before the final column")
            for ref in m.sign_from | m.pi_from:
                if ref not in position or position[ref] >= position[m.node] or by_node[ref].basis == OUTPUT:
                    raise ValueError(f"node {m.node}: dangling adaptive reference {ref}")
        for row in self.graph.rows():
            cols = sorted(c for r, c in self.graph.nodes if r == row)
            if cols[-1] != last or cols != list(range(cols[0], last + 1)):
                raise ValueError(f"row {row} must be contiguous up to the final column")

    @property
    def w(self) -> int:
        return self.graph.w

    @property
    def d(self) -> int:
        return self.graph.d

    def measurement(self, node: Node) -> NodeMeasurement:
        for m in self.measurements:
            if m.node == node:
                return m
        raise KeyError(node)

    def column(self, col: int) -> list[NodeMeasurement]:
        return [m for m in self.measurements if m.node[1] == col]

    def output_rows(self) -> list[int]:
        return self.graph.rows()

    def measured_outputs(self) -> list[NodeMeasurement]:
        return [m for m in self.column(self.d - 1) if m.measured]

    def unmeasured_outputs(self) -> list[NodeMeasurement]:
        return [m for m in self.column(self.d - 1) if not m.measured]

    def mid_circuit(self) -> list[NodeMeasurement]:
        return [m for m in self.measurements if m.node[1] < self.d - 1]

    # -- serialization
    def to_dict(self) -> dict:
        nodes = []
        for m in self.measurements:
            entry = {"row": m.node[0], "col": m.node[1], "basis": m.basis}
            if m.basis == EQUATORIAL:
                entry["theta"] = m.theta
            adaptive = {}
            if m.sign_from:
                adaptive["sign_from"] = [list(n) for n in sorted(m.sign_from)]
            if m.pi_from:
                adaptive["pi_from"] = [list(n) for n in sorted(m.pi_from)]
            entry["adaptive"] = adaptive
            nodes.append(entry)
        vertical = [[list(a), list(b)] for a, b in self.graph.edges if a[1] == b[1]]
        return {
            "w": self.w,
            "d": self.d,
            "nodes": nodes,
            "edges": vertical,
            "order": [list(m.node) for m in self.measurements],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)

    @classmethod
    def from_dict(cls, data: Mapping) -> "MeasurementPattern":
        allowed = {"w", "d", "nodes", "order", "edges"}
        unknown = set(data) - allowed
        if unknown:
            raise ValueError(f"unknown pattern keys: {sorted(unknown)}")
        w, d = int(data["w"]), int(data["d"])
        bases = {}
        given_rules = {}
        for entry in data["nodes"]:
            extra = set(entry) - {"row", "col", "basis", "theta", "adaptive"}
            if extra:
                raise ValueError(f"unknown node keys: {sorted(extra)}")
            node = (int(entry["row"]), int(entry["col"]))
            bases[node] = (entry["basis"], float(entry.get("theta", 0.0)))
            rule = entry.get("adaptive") or {}
            if set(rule) - {"sign_from", "pi_from"}:
                raise ValueError("unknown adaptive keys")
            given_rules[node] = (
                frozenset(tuple(n) for n in rule.get("sign_from", [])),
                frozenset(tuple(n) for n in rule.get("pi_from", [])),
            )
        vertical = None
        if "edges" in data:
            vertical = [(tuple(a), tuple(b)) for a, b in data["edges"]]
        graph = ClusterGraph.from_nodes(w, d, bases, vertical)
        pattern = compile_pattern(graph, bases)
        order = [tuple(n) for n in data.get("order", [])]
        if order and order != [m.node for m in pattern.measurements]:
            raise ValueError("order must be column-major")
        known = {m.node for m in pattern.measurements}
        for node, (sf, pf) in given_rules.items():
            for ref in sf | pf:
                if ref not in known:
                    raise ValueError(f"dangling adaptive reference {ref}")
            if not (sf or pf):
                continue
            m = pattern.measurement(node)
            if (sf, pf) != (m.sign_from, m.pi_from):
                raise ValueError(f"node {node}: adaptive rule disagrees with byproduct propagation")
        return pattern

    @classmethod
    def from_json(cls, text: str) -> "MeasurementPattern":
        return cls.from_dict(json.loads(text))


def compile_pattern(graph: ClusterGraph, bases: Mapping[Node, tuple[str, float]]) -> MeasurementPattern:
    """Derive adaptive rules and final corrections by symbolic frame propagation."""
    frame = PauliFrame.empty(graph.w, symbolic=True)
    measurements = []
    corrections = {}
    last = graph.d - 1
    for col in range(graph.d):
        for a, b in graph.vertical_edges(col):
            frame = propagate_byproduct(frame, GateOp("CZ", (a[0], b[0])))
        for node in graph.column(col):
            if node not in bases:
                raise ValueError(f"no basis given for node {node}")
            basis, theta = bases[node]
            row = node[0]
            if col < last:
                measurements.append(
                    NodeMeasurement(node, basis, theta, frame.x[row], frame.z[row])
                )
                # the measured node teleports its wire: X^s H, old X becomes Z
                frame = frame._replace(row, x=frozenset({node}), z=frame.x[row])
            else:
                # outputs are corrected physically before any final readout
                measurements.append(NodeMeasurement(node, basis, theta))
                corrections[row] = (frame.x[row], frame.z[row])
    return MeasurementPattern(graph, tuple(measurements), corrections)


def rotation_pattern(alpha: Sequence[float]) -> MeasurementPattern:
    """1x4 pattern implementing ``H RZ(a3) RX(a2) RZ(a1)`` on ``|+>``."""
    a = list(alpha)
    if len(a) != 3:
        raise ValueError("three Euler angles required")
    graph = build_cluster_graph(1, 4)
    bases = {(0, k): (EQUATORIAL, canonical_angle(-a[k])) for k in range(3)}
    bases[(0, 3)] = (OUTPUT, 0.0)
    return compile_pattern(graph, bases)


T_GATE_ANGLES = (-math.pi / 4, -math.pi / 2, -math.pi / 2)
ENTANGLER_ANGLES = (math.pi / 2, math.pi / 2)


def t_gate_pattern() -> MeasurementPattern:
    return rotation_pattern(T_GATE_ANGLES)


def entangler_pattern(alpha1: float = ENTANGLER_ANGLES[0], beta1: float = ENTANGLER_ANGLES[1]) -> MeasurementPattern:
    """2x2 pattern producing ``[H RZ(alpha1)] (x) [H RZ(beta1)] CZ |++>``.

    The vertical edge exists only in the first column.
    """
    nodes = [(0, 0), (1, 0), (0, 1), (1, 1)]
    graph = ClusterGraph.from_nodes(2, 2, nodes, vertical=[((0, 0), (1, 0))])
    bases = {
        (0, 0): (EQUATORIAL, canonical_angle(-alpha1)),
        (1, 0): (EQUATORIAL, canonical_angle(-beta1)),
        (0, 1): (OUTPUT, 0.0),
        (1, 1): (OUTPUT, 0.0),
    }
    return compile_pattern(graph, bases)


def dj_pattern(oracle: str) -> MeasurementPattern:
    """Seven-node Deutsch-Jozsa pattern on rows (D1, A, D2) = (0, 1, 2).

    The ancilla row spans three columns, the data rows join in the second
    column.  Both oracles share the graph and differ only in measurement
    angles, so the server sees identical operations.
    """
    if oracle not in ("balanced", "constant"):
        raise ValueError("oracle must be 'balanced' or 'constant'")
    nodes = [(1, 0), (0, 1), (1, 1), (2, 1), (0, 2), (1, 2), (2, 2)]
    vertical = [((0, 1), (1, 1)), ((1, 1), (2, 1)), ((0, 2), (1, 2)), ((1, 2), (2, 2))]
    graph = ClusterGraph.from_nodes(3, 3, nodes, vertical)
    pi = math.pi
    first, last = (pi, 0.0) if oracle == "balanced" else (0.0, pi)
    bases = {
        (1, 0): (EQUATORIAL, first),
        (0, 1): (EQUATORIAL, 0.0),
        (1, 1): (EQUATORIAL, 0.0),
        (2, 1): (EQUATORIAL, 0.0),
        (0, 2): (COMPUTATIONAL_Z, 0.0),
        (1, 2): (EQUATORIAL, last),
        (2, 2): (COMPUTATIONAL_Z, 0.0),
    }
    return compile_pattern(graph, bases)


DJ_IDEAL = {"balanced": "111", "constant": "010"}


# --------------------------------------------------------------------------
# Equivalent circuits


@dataclass(frozen=True)
class Circuit:
    """Gate list on ``n_wires`` wires starting from ``|0...0>``.

    ``readout`` lists ``(wire, theta_or_None)`` for final-column measured nodes;
    ``None`` means a computational-basis readout.  The rotation for an
    equatorial readout is already part of ``ops``.
    """

    n_wires: int
    ops: tuple[GateOp, ...]
    readout: tuple[tuple[int, float | None], ...]
    outputs: tuple[int, ...]


def pattern_to_circuit(pattern: MeasurementPattern) -> Circuit:
    ops: list[GateOp] = []
    last = pattern.d - 1
    measured_nodes = {m.node for m in pattern.measurements if m.measured}
    readout = []
    for m in pattern.measurements:
        for ref in m.sign_from | m.pi_from:
            if ref not in measured_nodes:
                raise ValueError(f"dangling adaptive reference {ref}")
    for col in range(pattern.d):
        for m in pattern.column(col):
            if pattern.graph.first_column(m.node[0]) == col:
                ops.append(GateOp("H", (m.node[0],)))
        for a, b in pattern.graph.vertical_edges(col):
            ops.append(GateOp("CZ", (a[0], b[0])))
        for m in pattern.column(col):
            row = m.node[0]
            if m.basis == EQUATORIAL:
                ops.append(GateOp("RZ", (row,), -m.theta))
                ops.append(GateOp("H", (row,)))
            if col == last and m.measured:
                readout.append((row, m.theta if m.basis == EQUATORIAL else None))
    outputs = tuple(m.node[0] for m in pattern.unmeasured_outputs())
    return Circuit(pattern.w, tuple(ops), tuple(readout), outputs)


def circuit_statevector(circuit: Circuit) -> np.ndarray:
    """Ideal state of all wires after ``circuit.ops``."""
    n = circuit.n_wires
    psi = np.zeros(1 << n, dtype=complex)
    psi[0] = 1.0
    for op in circuit.ops:
        t = psi.reshape((2,) * n)
        u = op.matrix().reshape((2,) * (2 * len(op.targets)))
        k = len(op.targets)
        t = np.tensordot(u, t, axes=(list(range(k, 2 * k)), list(op.targets)))
        t = np.moveaxis(t, list(range(k)), list(op.targets))
        psi = t.reshape(-1)
    return psi


@dataclass(frozen=True)
class IdealOutput:
    """Readout distribution (keys ordered by row) and the averaged state of
    the unmeasured output wires (``None`` when every output is measured)."""

    probabilities: dict[str, float]
    state: np.ndarray | None
    rows: tuple[int, ...]


def ideal_output(pattern: MeasurementPattern) -> IdealOutput:
    circuit = pattern_to_circuit(pattern)
    psi = circuit_statevector(circuit)
    n = circuit.n_wires
    rho = np.outer(psi, psi.conj())
    measured = [w for w, _ in circuit.readout]
    probs: dict[str, float] = {}
    t = np.abs(psi.reshape((2,) * n)) ** 2
    marg = t.sum(axis=tuple(q for q in range(n) if q not in measured)) if measured else None
    if measured:
        for idx in np.ndindex(*marg.shape):
            p = float(marg[idx])
            if p > 1e-15:
                probs["".join(str(b) for b in idx)] = p
    state = None
    if circuit.outputs:
        from .densmat import reduce_matrix

        state = reduce_matrix(rho, n, list(circuit.outputs))
    return IdealOutput(probs, state, tuple(sorted(measured)))


def target_vector(pattern: MeasurementPattern) -> np.ndarray:
    """Pure ideal state of the unmeasured outputs (requires no measured outputs)."""
    circuit = pattern_to_circuit(pattern)
    if circuit.readout:
        raise ValueError("pattern measures some outputs")
    psi = circuit_statevector(circuit)
    n = circuit.n_wires
    keep = list(circuit.outputs)
    t = psi.reshape((2,) * n)
    drop = [q for q in range(n) if q not in keep]
    if drop:
        # unused wires stay in |0>
        t = t[tuple(0 if q in drop else slice(None) for q in range(n))]
    return np.asarray(t).reshape(-1)


def pattern_unitary(pattern: MeasurementPattern) -> np.ndarray:
    """Ideal map from the first-column input wires to the outputs.

    The Hadamards creating the first-column nodes are treated as input
    preparation and left out.  Every row must start in the first column
    and every output must stay unmeasured.
    """
    circuit = pattern_to_circuit(pattern)
    if circuit.readout:
        raise ValueError("pattern measures some outputs")
    rows = pattern.graph.rows()
    if any(pattern.graph.first_column(r) != 0 for r in rows):
        raise ValueError("every row must start in the first column")
    skip = {(r,) for r in rows}
    ops = list(circuit.ops)
    body = []
    for op in ops:
        if op.kind == "H" and op.targets in skip:
            skip.discard(op.targets)
            continue
        body.append(op)
    n = circuit.n_wires
    dim = 1 << n
    u = np.zeros((dim, dim), dtype=complex)
    for k in range(dim):
        psi = np.zeros(dim, dtype=complex)
        psi[k] = 1.0
        for op in body:
            t = psi.reshape((2,) * n)
            m = op.matrix().reshape((2,) * (2 * len(op.targets)))
            j = len(op.targets)
            t = np.tensordot(m, t, axes=(list(range(j, 2 * j)), list(op.targets)))
            psi = np.moveaxis(t, list(range(j)), list(op.targets)).reshape(-1)
        u[:, k] = psi
    return u
