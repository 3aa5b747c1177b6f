"""Kernel backend selection.

The compiled extension is used when it imports cleanly.  Setting the
environment variable ``BLINDSIM_PURE=1`` forces the numpy fallback.
"""

import os

import numpy as np

if os.environ.get("BLINDSIM_PURE", "") not in ("", "0"):
    from . import _kernels_py as _impl

    BACKEND = "python"
else:
    try:
        from . import _kernels as _impl

        BACKEND = "cython"
    except ImportError:  # extension not built
        from . import _kernels_py as _impl

        BACKEND = "python"

apply_1q = _impl.apply_1q
apply_2q = _impl.apply_2q
depolarize_1q = _impl.depolarize_1q
thermal_relax = _impl.thermal_relax
project = _impl.project
z_probability = _impl.z_probability


def depolarize_2q(rho, q1, q2, n, p):
    """Two-qubit depolarizing channel: (1-p) rho + p * R_q1 R_q2 (rho)."""
    if p == 0.0:
        return
    replaced = rho.copy()
    _impl.depolarize_1q(replaced, q1, n, 1.0)
    _impl.depolarize_1q(replaced, q2, n, 1.0)
    rho *= 1.0 - p
    rho += p * replaced


def as_operator(u):
    return np.ascontiguousarray(u, dtype=np.complex128)
