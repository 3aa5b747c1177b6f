import csv
import io
import json

import pytest

from blindsim import __version__
from blindsim.cli import main


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def csv_body(text):
    lines = text.splitlines()
    assert lines[0].startswith("# ")
    return json.loads(lines[0][2:]), list(csv.DictReader(io.StringIO("\n".join(lines[1:]))))


def test_resources_table(capsys):
    code, out, _ = run(capsys, "resources", "--family", "dj-mbqc", "--n", "20")
    assert code == 0
    head, rows = csv_body(out)
    assert rows == [{"family": "dj-mbqc", "n": "20", "qubits": "42", "gates_1q": "360", "gates_2q": "85", "readouts": "42", "idles": "84"}]
    assert set(head) == {"config", "seed", "version"}
    assert head["version"] == __version__ and head["seed"] == 0


def test_cluster_fidelity_noiseless(capsys):
    code, out, _ = run(capsys, "cluster-fidelity", "--w", "1", "--d", "1", "--noise", "off", "--seed", "3")
    assert code == 0
    head, rows = csv_body(out)
    assert head["seed"] == 3
    assert float(rows[0]["F"]) == pytest.approx(1.0)
    assert float(rows[0]["simulated_exact_F"]) == pytest.approx(1.0)


def test_dj_noiseless(capsys):
    code, out, _ = run(capsys, "dj", "--oracle", "constant", "--noise", "off", "--shots", "64")
    assert code == 0
    data = json.loads(out)
    assert data["p_correct"] == 1.0
    assert data["ideal"] == "010"
    assert set(data["header"]) == {"config", "seed", "version"}


def test_gate_tomo_noiseless(capsys):
    code, out, _ = run(capsys, "gate-tomo", "--gate", "t", "--process", "--noise", "off")
    assert code == 0
    data = json.loads(out)
    assert data["process"]["fidelity"] == pytest.approx(1.0, abs=1e-9)
    assert data["state"]["fidelity"] == pytest.approx(1.0, abs=1e-9)


def test_blindness_noiseless(capsys):
    code, out, _ = run(capsys, "blindness", "--sweep", "y", "--noise", "off")
    assert code == 0
    data = json.loads(out)
    assert data["max_holevo_bits"] == pytest.approx(0.0, abs=1e-9)


def test_budget_csv(capsys):
    code, out, _ = run(capsys, "budget", "--seq", "mb-2q")
    assert code == 0
    _, rows = csv_body(out)
    assert {r["source"] for r in rows} == {"single-qubit gate", "two-qubit gate", "readout", "idling"}
    assert sum(float(r["participation"]) for r in rows) == pytest.approx(1.0, abs=1e-5)


def test_out_file_and_config(tmp_path, capsys):
    cfg = tmp_path / "run.json"
    cfg.write_text(json.dumps({"experiment": "dj", "seed": 11, "shots": 200, "params": {"oracle": "balanced"}}))
    out = tmp_path / "dj.json"
    code, stdout, _ = run(capsys, "dj", "--config", str(cfg), "--out", str(out))
    assert code == 0 and stdout == ""
    data = json.loads(out.read_text())
    assert data["header"]["seed"] == 11
    assert sum(data["counts"].values()) == 200


@pytest.mark.parametrize(
    "content",
    [
        {"experiment": "dj", "colour": "red"},
        {"experiment": "budget"},
        {"noise": {"p_9q": 0.1}},
        {"params": {"frobnicate": 1}},
        "not json",
    ],
)
def test_config_errors_exit_two(tmp_path, capsys, content):
    cfg = tmp_path / "bad.json"
    cfg.write_text(content if isinstance(content, str) else json.dumps(content))
    code, _, err = run(capsys, "dj", "--config", str(cfg))
    assert code == 2
    assert "config" in err or "invalid" in err


def test_invalid_options_exit_two(capsys):
    assert run(capsys, "cluster-fidelity", "--w", "4")[0] == 2
    assert run(capsys, "resources", "--n", "0")[0] == 2
    with pytest.raises(SystemExit) as exc:
        main(["dj", "--oracle", "sideways"])
    assert exc.value.code == 2


def test_invalid_thread_count_exits_two(capsys, monkeypatch):
    monkeypatch.setenv("BLINDSIM_THREADS", "zero")
    assert run(capsys, "resources", "--n", "1")[0] == 2


def test_budget_with_noise_off_is_config_error(capsys):
    assert run(capsys, "budget", "--seq", "mb-1q", "--noise", "off")[0] == 2


def test_budget_with_zero_error_is_numeric(tmp_path, capsys):
    inf = float("inf")
    cfg = tmp_path / "zero.json"
    cfg.write_text(json.dumps({"noise": {"p_1q": 0.0, "p_2q": 0.0, "p_ro": 0.0, "t1": inf, "t2": inf, "t2_echo": inf}}))
    code, _, err = run(capsys, "budget", "--config", str(cfg))
    assert code == 3, err


@pytest.mark.parametrize(
    "argv",
    [
        ["dj", "--shots", "300", "--seed", "5"],
        ["cluster-fidelity", "--w", "2", "--d", "1-2", "--np", "20", "--shots", "200", "--seed", "9"],
    ],
)
def test_byte_identical_across_thread_counts(tmp_path, monkeypatch, argv):
    outputs = []
    for threads in ("1", "4"):
        monkeypatch.setenv("BLINDSIM_THREADS", threads)
        path = tmp_path / f"out{threads}"
        assert main([*argv, "--out", str(path)]) == 0
        outputs.append(path.read_bytes())
    assert outputs[0] == outputs[1]
