"""Holevo information of a state ensemble."""

from __future__ import annotations

from typing import Sequence

import numpy as np

from ..densmat import matrix_entropy


def holevo(ensemble: Sequence, weights: Sequence[float] | None = None) -> float:
    """``S(mean rho) - mean S(rho_j)`` in bits.

    Members may be arrays or ``DensityState`` objects; weights default to
    uniform.
    """
    mats = [np.asarray(getattr(r, "matrix", r), dtype=complex) for r in ensemble]
    if not mats:
        raise ValueError("empty ensemble")
    shape = mats[0].shape
    if any(m.shape != shape for m in mats):
        raise ValueError("ensemble members differ in dimension")
    if weights is None:
        w = np.full(len(mats), 1.0 / len(mats))
    else:
        w = np.asarray(weights, dtype=float)
        if w.shape != (len(mats),) or np.any(w < 0):
            raise ValueError("weights must be non-negative, one per member")
        w = w / w.sum()
    avg = sum(wi * m for wi, m in zip(w, mats))
    return matrix_entropy(avg) - float(sum(wi * matrix_entropy(m) for wi, m in zip(w, mats)))
