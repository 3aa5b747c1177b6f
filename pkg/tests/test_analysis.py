import io

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from blindsim.analysis import (
    DEVICE_RATES,
    FAMILIES,
    SEQUENCES,
    ResourceCount,
    error_budget,
    gate_improvement_factors,
    improvement_factor,
    pass_fail_success,
    resource_count,
    scale_rates,
    sequence_spec,
    solve_improvement,
    success_vs_size,
    write_budget_csv,
    write_projection_csv,
    write_resources_csv,
)
from blindsim.engine.noise import SOURCES, NoiseModel

NS = range(1, 21)


def rescaled(noise, factor):
    for source in SOURCES:
        noise = noise.scaled(source, factor)
    return noise


# ---------------------------------------------------------------- resources


@pytest.mark.parametrize("n", NS)
def test_dj_counts_closed_form(n):
    gate = resource_count("dj-gate-based", n)
    mb = resource_count("dj-mbqc", n)
    assert gate == ResourceCount(n + 1, 4 * n + 1, n, 0, 0)
    assert mb == ResourceCount(2 * n + 2, 18 * n, 4 * n + 5, 2 * n + 2, 4 * n + 4)
    for field in ("qubits", "gates_1q", "gates_2q", "readouts", "idles"):
        assert getattr(mb, field) >= getattr(gate, field)


def test_count_examples():
    assert resource_count("dj-gate-based", 2) == ResourceCount(3, 9, 2, 0, 0)
    assert resource_count("dj-mbqc", 2) == ResourceCount(6, 36, 13, 6, 12)
    assert resource_count("dj-mbqc", 20).gates_2q == 85
    assert resource_count("mb-1q-unitary") == ResourceCount(2, 24, 5, 3, 3)
    assert resource_count("mb-2q-entangle") == ResourceCount(4, 24, 7, 4, 2)


def test_count_errors():
    with pytest.raises(ValueError):
        resource_count("dj-teleport", 2)
    with pytest.raises(ValueError):
        resource_count("dj-mbqc", 0)
    with pytest.raises(ValueError):
        ResourceCount(1, -1, 0, 0, 0)


# ---------------------------------------------------------------- pass-fail


def test_pass_fail_examples():
    zero = dict.fromkeys(DEVICE_RATES, 0.0)
    assert pass_fail_success(resource_count("dj-mbqc", 5), zero) == 1.0
    only_cz = ResourceCount(2, 0, 1, 0, 0)
    assert pass_fail_success(only_cz, {**zero, "2q": 0.5}) == 0.5
    assert pass_fail_success(resource_count("dj-gate-based", 2)) == pytest.approx(0.973, abs=0.002)


@pytest.mark.parametrize("bad", [1.0, 1.5, -0.1])
def test_pass_fail_rejects_rates(bad):
    with pytest.raises(ValueError):
        pass_fail_success(resource_count("dj-gate-based", 2), {**DEVICE_RATES, "2q": bad})


@settings(max_examples=60, deadline=None)
@given(
    key=st.sampled_from(sorted(DEVICE_RATES)),
    bump=st.floats(1e-4, 0.1),
    field=st.sampled_from(["gates_1q", "gates_2q", "readouts", "idles"]),
    n=st.integers(1, 20),
)
def test_pass_fail_monotone(key, bump, field, n):
    counts = resource_count("dj-mbqc", n)
    base = pass_fail_success(counts)
    assert pass_fail_success(counts, {**DEVICE_RATES, key: DEVICE_RATES[key] + bump}) < base
    more = ResourceCount(**{**counts.__dict__, field: getattr(counts, field) + 1})
    assert pass_fail_success(more) < base


# ---------------------------------------------------------------- improvement


def test_equal_counts_need_no_improvement():
    c = resource_count("dj-gate-based", 4)
    assert solve_improvement(c, c) == 1.0


@pytest.mark.parametrize("n", [1, 2, 5, 20, 50])
def test_improvement_residual(n):
    x = improvement_factor(n)
    target = pass_fail_success(resource_count("dj-gate-based", n))
    achieved = pass_fail_success(resource_count("dj-mbqc", n), scale_rates(DEVICE_RATES, x))
    assert abs(achieved - target) < 1e-9


def test_improvement_non_increasing():
    factors = [improvement_factor(n) for n in range(5, 51)]
    assert all(b <= a + 1e-12 for a, b in zip(factors, factors[1:]))


def test_improvement_without_root():
    heavy = ResourceCount(10, 10**6, 10**6, 10**6, 10**6)
    with pytest.raises(ArithmeticError):
        solve_improvement(heavy, resource_count("dj-gate-based", 1), hi=2.0)


def test_primitive_factors_are_finite():
    factors = gate_improvement_factors()
    assert set(factors) == {"mb-1q-unitary", "mb-2q-entangle"}
    assert all(1 < v < 1e4 for v in factors.values())


def test_success_vs_size_rows():
    rows = success_vs_size(3)
    assert [r[0] for r in rows] == [1, 2, 3]
    assert all(mb < gate for _, gate, mb in rows)


# ---------------------------------------------------------------- budget


def test_single_source_budget():
    budget = error_budget(sequence_spec("mb-1q"), NoiseModel().only("2q"))
    assert budget.participation["2q"] == pytest.approx(1.0, abs=1e-12)
    assert all(budget.participation[s] == 0 for s in SOURCES if s != "2q")


@pytest.mark.parametrize("seq", sorted(SEQUENCES))
def test_budget_sums_to_one(seq):
    budget = error_budget(sequence_spec(seq), NoiseModel())
    assert sum(budget.participation.values()) == pytest.approx(1.0, abs=1e-9)
    assert min(budget.participation.values()) >= 0
    assert budget.total_error > 0


@pytest.mark.parametrize("seq", sorted(SEQUENCES))
def test_budget_invariant_under_common_rescaling(seq):
    # compared deep in the linear regime, where halving is an exact derivative
    spec = sequence_spec(seq)
    small = error_budget(spec, rescaled(NoiseModel(), 1e-6)).participation
    smaller = error_budget(spec, rescaled(NoiseModel(), 2e-6)).participation
    for source in SOURCES:
        assert small[source] == pytest.approx(smaller[source], abs=1e-9)


def test_budget_needs_noise():
    with pytest.raises(ValueError):
        error_budget(sequence_spec("mb-1q"), NoiseModel.ideal())
    with pytest.raises(ValueError):
        sequence_spec("mb-3q")


# ---------------------------------------------------------------- tables


def test_csv_writers():
    buf = io.StringIO()
    write_resources_csv([("dj-mbqc", 2, resource_count("dj-mbqc", 2))], buf)
    assert buf.getvalue().splitlines() == ["family,n,qubits,gates_1q,gates_2q,readouts,idles", "dj-mbqc,2,6,36,13,6,12"]

    buf = io.StringIO()
    write_projection_csv({"mb-1q": 0.99}, buf)
    assert buf.getvalue() == "sequence,fidelity\nmb-1q,0.990000\n"

    buf = io.StringIO()
    write_budget_csv(error_budget(sequence_spec("mb-2q"), NoiseModel().only("readout")), buf)
    lines = buf.getvalue().splitlines()
    assert lines[0] == "source,participation"
    assert "readout,1.000000" in lines


def test_families_listed():
    assert {"dj-gate-based", "dj-mbqc", "mb-1q-unitary", "mb-2q-entangle"} <= set(FAMILIES)
