"""Parametric Euler-angle sweeps of the single-qubit rotation sequence."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from ..estimators.information import holevo
from ..estimators.tomography import pauli_expectations
from ..pattern import canonical_angle, rotation_pattern, target_vector
from .noise import NoiseModel, Schedule
from .runner import ProtocolSpec, run_protocol

SWEEP_STEPS = tuple(k * math.pi / 8 for k in range(16))
# angle held fixed on the first Euler rotation during the second-angle sweep
SECOND_SWEEP_FIRST_ANGLE = math.pi / 2
TAGS = {"y": "alpha1", "z": "alpha2"}


@dataclass
class SweepPoint:
    angles: tuple[float, float, float]
    client: np.ndarray
    server: dict[str, np.ndarray]
    fidelity: float
    expectations: dict[str, float]


def sweep_angles(which: str, values: Sequence[float], fixed: Sequence[float] | None = None):
    """Euler-angle triples for a sweep of ``alpha1`` or ``alpha2``.

    ``fixed`` holds the two angles that are not swept, in order.  Defaults:
    ``alpha2 = alpha3 = 0`` for the first sweep and ``alpha1 = pi/2``,
    ``alpha3 = 0`` for the second.
    """
    if which == "alpha1":
        a2, a3 = fixed if fixed is not None else (0.0, 0.0)
        return [(canonical_angle(v), a2, a3) for v in values]
    if which == "alpha2":
        a1, a3 = fixed if fixed is not None else (SECOND_SWEEP_FIRST_ANGLE, 0.0)
        return [(a1, canonical_angle(v), a3) for v in values]
    raise ValueError("which must be 'alpha1' or 'alpha2'")


def run_rotation(angles, noise: NoiseModel | None = None, sched: Schedule | None = None) -> SweepPoint:
    pattern = rotation_pattern(angles)
    result = run_protocol(ProtocolSpec(pattern), noise, sched)
    psi = target_vector(pattern)
    rho = result.output_state
    fid = float(np.real(psi.conj() @ rho @ psi))
    return SweepPoint(tuple(angles), rho, dict(result.snapshots), fid, pauli_expectations(rho))


def angle_sweep(
    which: str,
    values: Sequence[float] = SWEEP_STEPS,
    fixed: Sequence[float] | None = None,
    noise: NoiseModel | None = None,
    sched: Schedule | None = None,
) -> list[SweepPoint]:
    """Run the rotation sequence for every swept value."""
    return [run_rotation(a, noise, sched) for a in sweep_angles(which, values, fixed)]


def blind_ensemble_angles(tag: str = "both") -> list[tuple[float, float, float]]:
    """Distinct settings of the y (``alpha1``) and z (``alpha2``) sweeps.

    Settings preparing the same client state are kept once, which leaves
    30 members for both sweeps together.
    """
    if tag not in ("y", "z", "both"):
        raise ValueError("sweep tag must be 'y', 'z' or 'both'")
    tags = ["y", "z"] if tag == "both" else [tag]
    settings = []
    for t in tags:
        settings.extend(sweep_angles(TAGS[t], SWEEP_STEPS))
    kept, states = [], []
    for s in settings:
        psi = target_vector(rotation_pattern(s))
        if any(abs(np.vdot(psi, other)) > 1 - 1e-9 for other in states):
            continue
        kept.append(s)
        states.append(psi)
    return kept


@dataclass
class BlindnessReport:
    angles: list[tuple[float, float, float]]
    points: list[SweepPoint]
    holevo: dict[str, float]
    purities: dict[str, list[float]]


def blindness(tag: str = "both", noise: NoiseModel | None = None, sched: Schedule | None = None) -> BlindnessReport:
    """Server-side Holevo information at every checkpoint of the ensemble."""
    angles = blind_ensemble_angles(tag)
    points = [run_rotation(a, noise, sched) for a in angles]
    stages = list(points[0].server)
    chi = {s: holevo([p.server[s] for p in points]) for s in stages}
    pur = {s: [float(np.real(np.vdot(p.server[s], p.server[s]))) for p in points] for s in stages}
    return BlindnessReport(angles, points, chi, pur)
