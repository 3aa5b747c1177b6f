"""Noisy stabilizer expectations of layer-by-layer generated cluster states.

The client reads every node in a fixed Pauli basis while the server keeps
producing columns.  A stabilizer is selected by a 0/1 vector ``c`` over
nodes; the letter on a node depends on ``c`` at the node and its
neighbours, hence only on three adjacent columns.  Summing over many
stabilizers is a dynamic program whose state is the pair of ``c`` columns
``(k, k+1)``: the operator carried for a key is the signed, partially
measured density matrix summed over all earlier column choices.
"""

from __future__ import annotations

import itertools
from typing import Iterable, Sequence

import numpy as np

from ..pattern import ClusterGraph, Node, stabilizer_from_subset
from ..pauli import PauliString, measurement_rotation
from .noise import NoiseModel, Schedule
from .program import compile_program
from .runner import Branch, Executor, initial_rho


class StabilizerSimulator:
    """Exact expectations of cluster stabilizers under the device model.

    With ``mitigate=True`` each non-identity readout is rescaled by
    ``1 / (1 - 2 f)`` where ``f`` is the symmetric flip probability of that
    client readout, which removes readout bias exactly.
    """

    def __init__(self, graph: ClusterGraph, noise: NoiseModel | None = None, sched: Schedule | None = None):
        self.graph = graph
        self.noise = noise if noise is not None else NoiseModel()
        self.sched = sched if sched is not None else Schedule()
        final = {(r, graph.d - 1): "pauli" for r in graph.rows() if (r, graph.d - 1) in set(graph.nodes)}
        self.program = compile_program(graph, self.noise, self.sched, final_bases=final)
        self.cols = [sorted(n for n in graph.nodes if n[1] == k) for k in range(graph.d)]
        self.index = graph.index()
        self.adj = graph.adjacency()
        self._flip = {}
        for r in graph.rows():
            conf = self.noise.effective_readout(f"C{r}").matrix
            if not np.isclose(conf[0, 1], conf[1, 0], atol=1e-15):
                raise ValueError("stabilizer mitigation requires symmetric readout confusion")
            self._flip[r] = conf[0, 1]
        self._cache: dict = {}
        self._segments = self.program.segments

    # ------------------------------------------------------------ letters

    def _letters(self, k: int, bits: dict[Node, int]):
        """Letters of column ``k`` and the (-i)^#Y phase."""
        letters = {}
        phase = 1.0 + 0j
        for node in self.cols[k]:
            c = bits.get(node, 0)
            z = sum(bits.get(m, 0) for m in self.adj[node]) & 1
            if c and z:
                letters[node] = "Y"
                phase *= -1j
            elif c:
                letters[node] = "X"
            elif z:
                letters[node] = "Z"
            else:
                letters[node] = "I"
        return letters, phase

    def _edge_sign(self, edges, bits) -> int:
        s = 1
        for a, b in edges:
            if bits.get(a, 0) and bits.get(b, 0):
                s = -s
        return s

    def _edges_closing(self, k: int):
        """Edges whose later endpoint lies in column ``k``."""
        return [e for e in self.graph.edges if max(e[0][1], e[1][1]) == k]

    # ------------------------------------------------------------ core DP

    def _run(self, choices: Sequence[Iterable[tuple[int, ...]]], mitigate: bool) -> complex:
        """Sum of signed expectations over the product of per-column choices."""
        d = self.graph.d
        segs = self._segments
        pos = 0

        def col_bits(k, tup):
            return dict(zip(self.cols[k], tup))

        def letter_rotator(letters):
            def rot(node, record):
                letter = letters.get(node, "I")
                return None if letter in "IZ" else measurement_rotation(letter)

            return rot

        def scale_for(letters):
            if not mitigate:
                return {}
            return {n: 1.0 / (1.0 - 2.0 * self._flip[n[0]]) for n, l in letters.items() if l != "I"}

        plain = Executor(self.program, lambda n, r: None)
        prep = segs[pos]
        pos += 1
        rho0 = plain.run(prep.steps, [Branch(initial_rho(self.program.n_qubits))])[0].rho
        zero_prev: tuple = ()
        keys: dict = {}
        for c0 in choices[0]:
            sign = self._edge_sign(self._edges_closing(0), col_bits(0, c0))
            keys[(zero_prev, c0)] = keys.get((zero_prev, c0), 0) + sign * rho0

        for k in range(d - 1):
            pre, rot, post = segs[pos], segs[pos + 1], segs[pos + 2]
            pos += 3
            new: dict = {}
            for (c_prev, c_cur), rho in keys.items():
                state = plain.run(pre.steps, [Branch(rho.copy())])[0].rho
                bits_base = {}
                if k > 0:
                    bits_base.update(col_bits(k - 1, c_prev))
                bits_base.update(col_bits(k, c_cur))
                for c_next in choices[k + 1]:
                    bits = dict(bits_base)
                    bits.update(col_bits(k + 1, c_next))
                    letters, phase = self._letters(k, bits)
                    phase *= self._edge_sign(self._edges_closing(k + 1), bits)
                    ex = Executor(
                        self.program, letter_rotator(letters), signed=letters, scale=scale_for(letters)
                    )
                    out = ex.run(rot.steps + post.steps, [Branch(state.copy())])
                    if not out:
                        continue
                    key = (c_cur, c_next)
                    contrib = phase * out[0].rho
                    if key in new:
                        new[key] += contrib
                    else:
                        new[key] = contrib
            keys = new

        swap, final = segs[pos], segs[pos + 1]
        total = 0j
        for (c_prev, c_cur), rho in keys.items():
            bits = {}
            if d > 1:
                bits.update(col_bits(d - 2, c_prev))
            bits.update(col_bits(d - 1, c_cur))
            letters, phase = self._letters(d - 1, bits)
            ex = Executor(self.program, letter_rotator(letters), signed=letters, scale=scale_for(letters))
            out = ex.run(swap.steps + final.steps, [Branch(rho.copy())])
            if out:
                total += phase * np.trace(out[0].rho)
        return total

    def _split(self, subset: Sequence[int]) -> list[list[tuple[int, ...]]]:
        bits = dict(zip(self.graph.nodes, (int(b) & 1 for b in subset)))
        return [[tuple(bits[n] for n in self.cols[k])] for k in range(self.graph.d)]

    # ------------------------------------------------------------ public

    def expectation(self, stabilizer, mitigate: bool = False) -> float:
        """Signed expectation of one stabilizer (PauliString or subset vector).

        A PauliString must be an element of the cluster's stabilizer group.
        """
        if isinstance(stabilizer, PauliString):
            subset = [1 if ch in "XY" else 0 for ch in stabilizer.letters]
            expected = stabilizer_from_subset(self.graph, subset)
            if expected.letters != stabilizer.letters:
                raise ValueError(f"{stabilizer} is not a stabilizer of this cluster")
            flip = expected.sign * stabilizer.sign
        else:
            subset = [int(b) & 1 for b in stabilizer]
            flip = 1
        key = (tuple(subset), mitigate)
        if key not in self._cache:
            value = self._run(self._split(subset), mitigate)
            self._cache[key] = float(np.real(value))
        return flip * self._cache[key]

    def fidelity(self, mitigate: bool = True) -> float:
        """Average of all ``2**n`` stabilizer expectations (exact DFE mean)."""
        choices = [list(itertools.product((0, 1), repeat=len(col))) for col in self.cols]
        total = self._run(choices, mitigate)
        return float(np.real(total)) / (1 << self.graph.n_nodes)

    def parity_bias(self, stabilizer) -> float:
        """``prod (1 - 2 f)`` over the non-identity readouts of a stabilizer."""
        if isinstance(stabilizer, PauliString):
            letters = stabilizer.letters
        else:
            letters = stabilizer_from_subset(self.graph, stabilizer).letters
        out = 1.0
        for node, letter in zip(self.graph.nodes, letters):
            if letter != "I":
                out *= 1.0 - 2.0 * self._flip[node[0]]
        return out
