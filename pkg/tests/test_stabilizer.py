import itertools

import numpy as np
import pytest

import oracle
from blindsim.engine.noise import NoiseModel, Schedule
from blindsim.engine.program import compile_program
from blindsim.engine.runner import Branch, Executor, initial_rho
from blindsim.engine.stabilizer import StabilizerSimulator
from blindsim.estimators.readout import AssignmentMatrix
from blindsim.pattern import build_cluster_graph, stabilizer_from_subset
from blindsim.pauli import PauliString, measurement_rotation


def brute_force(graph, noise, pauli):
    """Enumerate every outcome of the plain Pauli-basis readout and average parities."""
    final = {(r, graph.d - 1): "pauli" for r in graph.rows()}
    program = compile_program(graph, noise, Schedule(), final_bases=final)
    letters = dict(zip(graph.nodes, pauli.letters))

    def rotator(node, record):
        letter = letters[node]
        return None if letter in "IZ" else measurement_rotation(letter)

    branches = Executor(program, rotator).run(program.steps, [Branch(initial_rho(program.n_qubits))])
    total = 0.0
    for br in branches:
        p = float(np.real(np.trace(br.rho)))
        parity = sum(br.record[n] for n in graph.nodes if letters[n] != "I") & 1
        total += p * (-1) ** parity
    return pauli.sign * total


@pytest.mark.parametrize("w, d", [(1, 3), (2, 2), (3, 2)])
def test_noiseless_stabilizers_are_one(w, d):
    graph = build_cluster_graph(w, d)
    sim = StabilizerSimulator(graph, NoiseModel.ideal())
    for bits in itertools.product((0, 1), repeat=graph.n_nodes):
        assert sim.expectation(bits) == pytest.approx(1, abs=1e-9)
    assert sim.fidelity() == pytest.approx(1, abs=1e-9)


def test_ideal_state_matches_oracle_signs():
    graph = build_cluster_graph(2, 2)
    psi, _, _ = oracle.cluster_state(2, 2)
    for bits in itertools.product((0, 1), repeat=4):
        p = stabilizer_from_subset(graph, bits)
        assert np.real(psi.conj() @ p.matrix() @ psi) == pytest.approx(1)


@pytest.mark.parametrize("w, d", [(1, 3), (2, 2), (2, 3), (3, 2)])
def test_dynamic_program_matches_brute_force(w, d):
    graph = build_cluster_graph(w, d)
    noise = NoiseModel(assignment={"C0": AssignmentMatrix.symmetric(0.02)})
    sim = StabilizerSimulator(graph, noise)
    rng = np.random.default_rng(w * 10 + d)
    subsets = [tuple(rng.integers(0, 2, graph.n_nodes)) for _ in range(5)]
    subsets.append((1,) * graph.n_nodes)
    for bits in subsets:
        pauli = stabilizer_from_subset(graph, bits)
        assert sim.expectation(pauli) == pytest.approx(brute_force(graph, noise, pauli), abs=1e-10)


def test_exact_fidelity_is_mean_of_all_stabilizers():
    graph = build_cluster_graph(2, 2)
    sim = StabilizerSimulator(graph)
    values = [sim.expectation(bits, mitigate=False) for bits in itertools.product((0, 1), repeat=4)]
    assert sim.fidelity(mitigate=False) == pytest.approx(np.mean(values), abs=1e-12)


def test_readout_only_is_analytic():
    graph = build_cluster_graph(2, 2)
    noise = NoiseModel().only("readout")
    sim = StabilizerSimulator(graph, noise)
    for bits in itertools.product((0, 1), repeat=4):
        pauli = stabilizer_from_subset(graph, bits)
        expected = (1 - noise.p_ro) ** pauli.weight
        assert sim.expectation(bits) == pytest.approx(expected, abs=1e-12)
        assert sim.parity_bias(bits) == pytest.approx(expected, abs=1e-12)
        assert sim.expectation(bits, mitigate=True) == pytest.approx(1, abs=1e-12)


def test_sign_convention_for_pauli_input():
    graph = build_cluster_graph(1, 3)
    sim = StabilizerSimulator(graph)
    plus = stabilizer_from_subset(graph, (1, 0, 1))
    minus = PauliString(plus.letters, -plus.sign)
    assert sim.expectation(minus) == pytest.approx(-sim.expectation(plus))
    with pytest.raises(ValueError):
        sim.expectation(PauliString("XXX"))


def test_asymmetric_readout_rejected():
    graph = build_cluster_graph(1, 2)
    noise = NoiseModel(assignment={"C0": AssignmentMatrix.from_flips(0.01, 0.05)})
    with pytest.raises(ValueError):
        StabilizerSimulator(graph, noise)
