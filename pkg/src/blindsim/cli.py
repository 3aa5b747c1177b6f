"""Command-line front end.

Every subcommand writes CSV or JSON to ``--out`` (stdout by default) with a
header recording the effective configuration, the seed and the package
version.  Exit codes: 0 success, 2 configuration error, 3 numeric failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from pathlib import Path

import numpy as np

from . import __version__
from . import analysis, experiments
from .engine.noise import NoiseModel, Schedule
from .engine.runner import ProtocolSpec, run_protocol, worker_count
from .engine.sweep import blindness
from .pattern import MeasurementPattern

EXIT_CONFIG = 2
EXIT_NUMERIC = 3

CONFIG_KEYS = {"experiment", "noise", "schedule", "shots", "seed", "out", "mode", "noise_preset", "params"}
NOISE_PRESETS = {"device": NoiseModel, "off": NoiseModel.ideal, "sota": NoiseModel.state_of_the_art}


class ConfigError(ValueError):
    """Invalid configuration file or option combination."""


# ---------------------------------------------------------------- config


def load_config(path: str | None) -> dict:
    if path is None:
        return {}
    try:
        data = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    if not isinstance(data, dict):
        raise ConfigError("config must be a JSON object")
    unknown = set(data) - CONFIG_KEYS
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")
    return data


def build_models(args, cfg: dict) -> tuple[NoiseModel, Schedule]:
    preset = args.noise or cfg.get("noise_preset") or args.defaults.get("noise", "device")
    if preset not in NOISE_PRESETS:
        raise ConfigError(f"unknown noise preset {preset!r}")
    args.noise = preset
    base = NOISE_PRESETS[preset]()
    try:
        overrides = cfg.get("noise", {})
        noise = NoiseModel.from_dict({**base.to_dict(), **overrides}) if overrides else base
        sched = Schedule.from_dict(cfg.get("schedule", {}))
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from exc
    return noise, sched


def merge_params(args, cfg: dict) -> None:
    """Fill options left unset on the command line from the config file."""
    if "experiment" in cfg and cfg["experiment"] != args.command:
        raise ConfigError(f"config is for {cfg['experiment']!r}, not {args.command!r}")
    params = dict(cfg.get("params", {}))
    for key in ("shots", "seed", "out", "mode"):
        if key in cfg:
            params.setdefault(key, cfg[key])
    for key, value in params.items():
        if not hasattr(args, key) or key in ("command", "config", "noise", "func", "defaults"):
            raise ConfigError(f"unknown parameter {key!r} for {args.command}")
        if getattr(args, key) is None:
            setattr(args, key, value)
    for key, value in args.defaults.items():
        if key != "noise" and getattr(args, key, None) is None:
            setattr(args, key, value)


def header(args, noise: NoiseModel, sched: Schedule) -> dict:
    options = {
        k: v for k, v in sorted(vars(args).items()) if k not in ("func", "config", "out", "defaults") and v is not None
    }
    return {
        "config": {"options": options, "noise": noise.to_dict(), "schedule": sched.to_dict()},
        "seed": args.seed,
        "version": __version__,
    }


# ---------------------------------------------------------------- output


def emit_json(head: dict, body: dict) -> str:
    return json.dumps({"header": head, **body}, indent=2, sort_keys=True) + "\n"


def emit_csv(head: dict, rows: list[list], columns: list[str]) -> str:
    buf = io.StringIO()
    buf.write("# " + json.dumps(head, sort_keys=True) + "\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    w.writerows(rows)
    return buf.getvalue()


def write(args, text: str) -> None:
    if args.out in (None, "-"):
        sys.stdout.write(text)
    else:
        Path(args.out).write_text(text)


def _float(x: float) -> str:
    return repr(float(x))


def _matrix(m: np.ndarray) -> dict:
    return {"re": np.real(m).tolist(), "im": np.imag(m).tolist()}


# ---------------------------------------------------------------- commands


def _parse_range(text: str) -> list[int]:
    out: list[int] = []
    for part in str(text).split(","):
        if "-" in part:
            a, b = part.split("-", 1)
            out.extend(range(int(a), int(b) + 1))
        else:
            out.append(int(part))
    return out


def cmd_cluster_fidelity(args, noise, sched, head):
    if args.w not in (1, 2, 3):
        raise ConfigError("--w must be 1, 2 or 3")
    try:
        depths = _parse_range(args.d)
    except ValueError as exc:
        raise ConfigError(f"bad --d {args.d!r}") from exc
    if not depths or min(depths) < 1:
        raise ConfigError("--d must be positive")
    rng = np.random.default_rng(args.seed)
    rows = []
    for d in depths:
        r = experiments.cluster_fidelity(args.w, d, noise, sched, rng, args.np, args.shots, args.mitigate)
        rows.append([r.w, r.d, r.n, _float(r.estimate), _float(r.ci[0]), _float(r.ci[1]), _float(r.exact)])
    return emit_csv(head, rows, ["w", "d", "n", "F", "ci_lo", "ci_hi", "simulated_exact_F"])


def cmd_gate_tomo(args, noise, sched, head):
    rng = np.random.default_rng(args.seed)
    tomo = experiments.gate_state_tomography(args.gate, noise, sched, args.shots, rng)
    body = {"state": tomo.to_dict()}
    if args.process:
        chi, fproc = experiments.gate_process(args.gate, noise, sched)
        body["process"] = {"chi": _matrix(chi.chi), "labels": chi.labels, "fidelity": fproc}
    return emit_json(head, body)


def cmd_dj(args, noise, sched, head):
    counts, hamming, ideal = experiments.dj_run(args.oracle, noise, sched, args.shots, args.seed, args.mode)
    body = {
        "oracle": args.oracle,
        "ideal": ideal,
        "mode": args.mode,
        "counts": counts,
        "hamming": {str(k): v for k, v in hamming.items()},
        "p_correct": hamming[0],
    }
    return emit_json(head, body)


def cmd_blindness(args, noise, sched, head):
    rep = blindness(args.sweep, noise, sched)
    stages = list(rep.holevo)
    body = {
        "sweep": args.sweep,
        "settings": [list(a) for a in rep.angles],
        "holevo_bits": rep.holevo,
        "max_holevo_bits": max(rep.holevo.values()),
        "purities": {s: rep.purities[s] for s in stages},
        "server_states": {s: [_matrix(p.server[s]) for p in rep.points] for s in stages},
        "client_fidelity": [p.fidelity for p in rep.points],
    }
    return emit_json(head, body)


def cmd_budget(args, noise, sched, head):
    b = analysis.error_budget(analysis.sequence_spec(args.seq), noise, sched)
    rows = [[analysis.SOURCE_NAMES[s], f"{b.participation[s]:.6f}"] for s in b.participation]
    return emit_csv(head, rows, ["source", "participation"])


def cmd_resources(args, noise, sched, head):
    try:
        sizes = _parse_range(args.n)
    except ValueError as exc:
        raise ConfigError(f"bad --n {args.n!r}") from exc
    families = analysis.FAMILIES if args.family == "all" else (args.family,)
    rows = []
    for fam in families:
        for n in sizes if fam.startswith("dj") else [1]:
            try:
                c = analysis.resource_count(fam, n)
            except ValueError as exc:
                raise ConfigError(str(exc)) from exc
            rows.append([fam, n, c.qubits, c.gates_1q, c.gates_2q, c.readouts, c.idles])
    return emit_csv(head, rows, ["family", "n", "qubits", "gates_1q", "gates_2q", "readouts", "idles"])


def cmd_project(args, noise, sched, head):
    table = analysis.project_fidelity(noise, sched)
    return emit_csv(head, [[k, f"{v:.6f}"] for k, v in table.items()], ["sequence", "fidelity"])


def cmd_run(args, noise, sched, head):
    try:
        pattern = MeasurementPattern.from_json(Path(args.pattern).read_text())
    except (OSError, ValueError, KeyError, TypeError) as exc:
        raise ConfigError(f"invalid pattern: {exc}") from exc
    spec = ProtocolSpec(pattern, args.mode, args.shots, args.seed, snapshots=False)
    res = run_protocol(spec, noise, sched)
    body = {"elapsed_ns": res.elapsed_ns}
    if args.mode == "enumerate":
        body["distribution"] = res.distribution
        if res.output_state is not None:
            body["output_state"] = _matrix(res.output_state)
    else:
        body["counts"] = res.counts()
    return emit_json(head, body)


# ---------------------------------------------------------------- parser


def _sub(subs, name, func, help_text, **defaults):
    p = subs.add_parser(name, help=help_text)
    p.set_defaults(func=func, defaults=defaults)
    p.add_argument("--config", help="JSON run configuration")
    p.add_argument("--out", help="output file (stdout when omitted)")
    p.add_argument("--seed", type=int, help="root random seed (default 0)")
    p.add_argument("--noise", choices=sorted(NOISE_PRESETS), help="noise preset (default device)")
    return p


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="blindsim", description="Blind measurement-based computation simulator")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    subs = parser.add_subparsers(dest="command", required=True)

    p = _sub(subs, "cluster-fidelity", cmd_cluster_fidelity, "cluster-state DFE", seed=0, shots=8192, w=1, d="1", mitigate=True)
    p.add_argument("--w", type=int, help="cluster width (1-3)")
    p.add_argument("--d", help="depth, list or range such as 1-22")
    p.add_argument("--np", type=int, help="number of sampled stabilizers")
    p.add_argument("--shots", type=int)
    p.add_argument("--mitigate", action=argparse.BooleanOptionalAction, help="readout mitigation (default on)")

    p = _sub(subs, "gate-tomo", cmd_gate_tomo, "gate tomography", seed=0, shots=0, gate="t", process=False)
    p.add_argument("--gate", choices=sorted(experiments.GATES))
    p.add_argument("--process", action="store_true", default=None)
    p.add_argument("--shots", type=int, help="shots per Pauli (0: exact expectations)")

    p = _sub(subs, "dj", cmd_dj, "Deutsch-Jozsa histogram", seed=0, shots=8192, mode="monte-carlo", oracle="balanced")
    p.add_argument("--oracle", choices=["balanced", "constant"])
    p.add_argument("--shots", type=int)
    p.add_argument("--mode", choices=["monte-carlo", "enumerate"])

    p = _sub(subs, "blindness", cmd_blindness, "server Holevo information", seed=0, sweep="both")
    p.add_argument("--sweep", choices=["y", "z", "both"])

    p = _sub(subs, "budget", cmd_budget, "error budget", seed=0, seq="mb-1q")
    p.add_argument("--seq", choices=sorted(analysis.SEQUENCES))

    p = _sub(subs, "resources", cmd_resources, "resource counts", seed=0, n="1-20", family="all")
    p.add_argument("--family", choices=[*analysis.FAMILIES, "all"])
    p.add_argument("--n", help="input size, list or range")

    p = _sub(subs, "project", cmd_project, "state-of-the-art projection", seed=0, noise="sota")

    p = _sub(subs, "run", cmd_run, "run a pattern from JSON", seed=0, shots=1024, mode="enumerate")
    p.add_argument("--pattern", required=True, help="pattern JSON file")
    p.add_argument("--shots", type=int)
    p.add_argument("--mode", choices=["monte-carlo", "enumerate"])
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = load_config(args.config)
        merge_params(args, cfg)
        if getattr(args, "shots", None) is not None and args.shots < 0:
            raise ConfigError("--shots must be non-negative")
        worker_count()
        noise, sched = build_models(args, cfg)
        head = header(args, noise, sched)
        text = args.func(args, noise, sched, head)
    except ConfigError as exc:
        print(f"blindsim: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ValueError as exc:
        print(f"blindsim: invalid input: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (ArithmeticError, np.linalg.LinAlgError, FloatingPointError) as exc:
        print(f"blindsim: numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    write(args, text)
    return 0


if __name__ == "__main__":
    sys.exit(main())
