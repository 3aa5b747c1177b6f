"""Noise model and timing schedule of the two-module device."""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass, field
from typing import Mapping

from ..densmat import relaxation_factors
from ..estimators.readout import AssignmentMatrix

SOURCES = ("1q", "2q", "readout", "idle")


@dataclass(frozen=True)
class NoiseModel:
    """Error rates and coherence times.

    ``p_1q``, ``p_2q`` and ``p_ro`` are the strengths ``p`` of the symmetric
    depolarizing channel ``(1 - p) rho + p I / 2**N`` applied after each
    gate and before each readout (a depolarized readout therefore flips
    with probability ``p_ro / 2``).  ``t1``, ``t2`` and
    ``t2_echo`` are in seconds; each may be a float or a mapping from qubit
    label (``"S0"``, ``"C1"``, ...) to a float.  ``assignment`` maps qubit
    labels to extra classical readout confusion (identity when absent).
    """

    p_1q: float = 0.0009
    p_2q: float = 0.008
    p_ro: float = 0.009
    t1: float | Mapping[str, float] = 43e-6
    t2: float | Mapping[str, float] = 39e-6
    t2_echo: float | Mapping[str, float] = 56e-6
    assignment: Mapping[str, AssignmentMatrix] = field(default_factory=dict)
    enabled: bool = True

    def __post_init__(self):
        for name in ("p_1q", "p_2q", "p_ro"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise ValueError(f"{name} must lie in [0, 1]")
        for label in self._labels():
            t1 = self.t1_of(label)
            for t2 in (self.t2_of(label), self.t2_of(label, echo=True)):
                if t1 <= 0 or t2 <= 0:
                    raise ValueError("coherence times must be positive")
                if t2 > 2 * t1 * (1 + 1e-12):
                    raise ValueError("unphysical coherence times: T2 > 2 T1")

    def _labels(self):
        labels = {"*"}
        for v in (self.t1, self.t2, self.t2_echo):
            if isinstance(v, Mapping):
                labels.update(v)
        return labels

    @staticmethod
    def _lookup(value, label, default):
        if isinstance(value, Mapping):
            return float(value.get(label, default))
        return float(value)

    def t1_of(self, label: str) -> float:
        return self._lookup(self.t1, label, 43e-6)

    def t2_of(self, label: str, echo: bool = False) -> float:
        if echo:
            return self._lookup(self.t2_echo, label, 56e-6)
        return self._lookup(self.t2, label, 39e-6)

    # depolarizing strengths
    @property
    def dep_1q(self) -> float:
        return self.p_1q if self.enabled else 0.0

    @property
    def dep_2q(self) -> float:
        return self.p_2q if self.enabled else 0.0

    @property
    def dep_ro(self) -> float:
        return self.p_ro if self.enabled else 0.0

    def relax(self, label: str, tau_ns: float, echo: bool = False) -> tuple[float, float]:
        """Decay factors (population, coherence) for an idle of ``tau_ns``."""
        if not self.enabled or tau_ns <= 0:
            return 1.0, 1.0
        return relaxation_factors(tau_ns * 1e-9, self.t1_of(label), self.t2_of(label, echo))

    def assignment_of(self, label: str) -> AssignmentMatrix:
        if not self.enabled:
            return AssignmentMatrix.identity()
        return self.assignment.get(label, AssignmentMatrix.identity())

    def effective_readout(self, label: str) -> AssignmentMatrix:
        """Total confusion seen by the client: depolarized readout then
        classical assignment."""
        flip = self.dep_ro / 2.0
        dep = AssignmentMatrix.symmetric(flip).matrix
        return AssignmentMatrix(dep @ self.assignment_of(label).matrix)

    # variants
    def disabled(self) -> "NoiseModel":
        return dataclasses.replace(self, enabled=False)

    def only(self, source: str) -> "NoiseModel":
        """Keep a single error source, switch the others off."""
        _check_source(source)
        big = math.inf
        return dataclasses.replace(
            self,
            p_1q=self.p_1q if source == "1q" else 0.0,
            p_2q=self.p_2q if source == "2q" else 0.0,
            p_ro=self.p_ro if source == "readout" else 0.0,
            assignment=self.assignment if source == "readout" else {},
            t1=self.t1 if source == "idle" else big,
            t2=self.t2 if source == "idle" else big,
            t2_echo=self.t2_echo if source == "idle" else big,
        )

    def scaled(self, source: str, factor: float) -> "NoiseModel":
        """Multiply the error rate of ``source`` by ``factor``.

        Idling is scaled by dividing every coherence time by ``factor``.
        """
        _check_source(source)
        if source == "1q":
            return dataclasses.replace(self, p_1q=self.p_1q * factor)
        if source == "2q":
            return dataclasses.replace(self, p_2q=self.p_2q * factor)
        if source == "readout":
            return dataclasses.replace(
                self,
                p_ro=self.p_ro * factor,
                assignment={k: a.scaled(factor) for k, a in self.assignment.items()},
            )
        return dataclasses.replace(
            self,
            t1=_scale_time(self.t1, 1.0 / factor),
            t2=_scale_time(self.t2, 1.0 / factor),
            t2_echo=_scale_time(self.t2_echo, 1.0 / factor),
        )

    @classmethod
    def ideal(cls) -> "NoiseModel":
        return cls(enabled=False)

    @classmethod
    def state_of_the_art(cls) -> "NoiseModel":
        return cls(p_1q=1e-4, p_2q=1e-3, p_ro=1e-3, t1=1e-3, t2=1e-3, t2_echo=1e-3)

    def to_dict(self) -> dict:
        def enc(v):
            return dict(v) if isinstance(v, Mapping) else v

        return {
            "p_1q": self.p_1q,
            "p_2q": self.p_2q,
            "p_ro": self.p_ro,
            "t1": enc(self.t1),
            "t2": enc(self.t2),
            "t2_echo": enc(self.t2_echo),
            "assignment": {k: a.matrix.tolist() for k, a in self.assignment.items()},
            "enabled": self.enabled,
        }

    @classmethod
    def from_dict(cls, data: Mapping) -> "NoiseModel":
        known = {f.name for f in dataclasses.fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ValueError(f"unknown noise keys: {sorted(unknown)}")
        kwargs = dict(data)
        if "assignment" in kwargs:
            kwargs["assignment"] = {k: AssignmentMatrix(v) for k, v in kwargs["assignment"].items()}
        return cls(**kwargs)


def _scale_time(value, factor):
    if isinstance(value, Mapping):
        return {k: v * factor for k, v in value.items()}
    return value * factor


def _check_source(source):
    if source not in SOURCES:
        raise ValueError(f"unknown error source {source!r}; expected one of {SOURCES}")


@dataclass(frozen=True)
class Schedule:
    """Operation durations in ns.

    ``parallel_cz`` lists groups of CZ pairs (as qubit-label pairs) that may
    share a moment; every other CZ runs alone.  ``prep_pad`` and ``swap_pad``
    are alignment idles closing the preparation and SWAP blocks.
    """

    dur_1q: int = 48
    dur_cz: int = 104
    dur_ro: int = 400
    dur_ff_idle: int = 400
    parallel_cz: tuple = ((("S0", "C0"), ("S2", "C2")),)
    prep_pad: int = 8
    swap_pad: int = 60

    def __post_init__(self):
        for name in ("dur_1q", "dur_cz", "dur_ro", "dur_ff_idle"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")
        if self.prep_pad < 0 or self.swap_pad < 0:
            raise ValueError("pads must be non-negative")
        groups = []
        for group in self.parallel_cz:
            groups.append(tuple(tuple(sorted(pair)) for pair in group))
        object.__setattr__(self, "parallel_cz", tuple(groups))

    def may_share(self, pairs) -> bool:
        if len(pairs) <= 1:
            return True
        keys = {tuple(sorted(p)) for p in pairs}
        return any(keys <= set(group) for group in self.parallel_cz)

    def to_dict(self) -> dict:
        return {
            "dur_1q": self.dur_1q,
            "dur_cz": self.dur_cz,
            "dur_ro": self.dur_ro,
            "dur_ff_idle": self.dur_ff_idle,
            "parallel_cz": [[list(p) for p in g] for g in self.parallel_cz],
            "prep_pad": self.prep_pad,
            "swap_pad": self.swap_pad,
        }

    @classmethod
    def from_dict(cls, data: Mapping) -> "Schedule":
        known = {f.name for f in dataclasses.fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ValueError(f"unknown schedule keys: {sorted(unknown)}")
        kwargs = dict(data)
        if "parallel_cz" in kwargs:
            kwargs["parallel_cz"] = tuple(tuple(tuple(p) for p in g) for g in kwargs["parallel_cz"])
        return cls(**kwargs)
