"""Pure numpy implementations of the in-place kernels in ``_kernels.pyx``."""

import numpy as np


def _rows(rho, q, n):
    return rho.reshape(1 << q, 2, -1)


def _cols(rho, q, n):
    return rho.reshape(rho.shape[0], 1 << q, 2, -1)


def apply_1q(rho, u, q, n):
    rows = _rows(rho, q, n)
    rows[...] = np.einsum("ab,lbr->lar", u, rows)
    cols = _cols(rho, q, n)
    cols[...] = np.einsum("xlbr,ab->xlar", cols, u.conj())


def apply_2q(rho, u, q1, q2, n):
    dim = 1 << n
    shape = (2,) * n
    u4 = u.reshape(2, 2, 2, 2)
    t = rho.reshape(shape + (dim,))
    t = np.tensordot(u4, t, axes=([2, 3], [q1, q2]))
    t = np.moveaxis(t, [0, 1], [q1, q2])
    t = t.reshape(dim, dim)
    t = t.reshape((dim,) + shape)
    t = np.tensordot(t, u4.conj(), axes=([1 + q1, 1 + q2], [2, 3]))
    t = np.moveaxis(t, [-2, -1], [1 + q1, 1 + q2])
    rho[...] = t.reshape(dim, dim)


def depolarize_1q(rho, q, n, p):
    blocks = rho.reshape(1 << q, 2, rho.shape[0] >> (q + 1), 1 << q, 2, -1)
    mean = 0.5 * (blocks[:, 0, :, :, 0, :] + blocks[:, 1, :, :, 1, :])
    blocks *= 1.0 - p
    blocks[:, 0, :, :, 0, :] += p * mean
    blocks[:, 1, :, :, 1, :] += p * mean


def thermal_relax(rho, q, n, a, b):
    blocks = rho.reshape(1 << q, 2, rho.shape[0] >> (q + 1), 1 << q, 2, -1)
    excited = blocks[:, 1, :, :, 1, :].copy()
    blocks[:, 0, :, :, 0, :] += (1.0 - a) * excited
    blocks[:, 1, :, :, 1, :] *= a
    blocks[:, 0, :, :, 1, :] *= b
    blocks[:, 1, :, :, 0, :] *= b


def project(rho, q, n, outcome):
    blocks = rho.reshape(1 << q, 2, rho.shape[0] >> (q + 1), 1 << q, 2, -1)
    other = 1 - outcome
    blocks[:, other] = 0
    blocks[:, :, :, :, other] = 0
    return float(np.real(np.trace(rho)))


def z_probability(rho, q, n, outcome):
    diag = np.real(np.diagonal(rho)).reshape(1 << q, 2, -1)
    return float(diag[:, outcome].sum())
