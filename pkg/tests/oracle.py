"""Independent reference implementations built from explicit Kronecker products.

Nothing here imports the package; tests compare package results against
these slow but transparent constructions.
"""

import itertools
from functools import reduce

import numpy as np

I2 = np.eye(2, dtype=complex)
X = np.array([[0, 1], [1, 0]], dtype=complex)
Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
Z = np.array([[1, 0], [0, -1]], dtype=complex)
H = np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2)
PAULI = {"I": I2, "X": X, "Y": Y, "Z": Z}


def kron(*ms):
    return reduce(np.kron, ms)


def embed(u, targets, n):
    """Full ``2**n`` matrix of ``u`` acting on ``targets`` (qubit 0 = MSB)."""
    k = len(targets)
    dim = 1 << n
    out = np.zeros((dim, dim), dtype=complex)
    for col in range(dim):
        bits = [(col >> (n - 1 - q)) & 1 for q in range(n)]
        sub_in = 0
        for t in targets:
            sub_in = (sub_in << 1) | bits[t]
        for sub_out in range(1 << k):
            amp = u[sub_out, sub_in]
            if amp == 0:
                continue
            new = list(bits)
            for j, t in enumerate(targets):
                new[t] = (sub_out >> (k - 1 - j)) & 1
            row = int("".join(map(str, new)), 2)
            out[row, col] += amp
    return out


def rz(t):
    return np.diag([np.exp(-0.5j * t), np.exp(0.5j * t)])


def rx(t):
    return np.cos(t / 2) * I2 - 1j * np.sin(t / 2) * X


def ry(t):
    return np.cos(t / 2) * I2 - 1j * np.sin(t / 2) * Y


def cz():
    return np.diag([1, 1, 1, -1]).astype(complex)


def pauli(letters):
    return kron(*[PAULI[c] for c in letters])


def depolarize(rho, targets, n, p):
    """Kraus form: uniform Pauli twirl on ``targets`` with weight ``p``."""
    k = len(targets)
    out = (1 - p) * rho
    for letters in itertools.product("IXYZ", repeat=k):
        u = embed(kron(*[PAULI[c] for c in letters]), targets, n)
        out = out + p / 4**k * u @ rho @ u.conj().T
    return out


def relax(rho, q, n, tau, t1, t2):
    """Amplitude damping followed by pure dephasing, composed via Kraus operators."""
    g = 1 - np.exp(-tau / t1)
    k0 = np.array([[1, 0], [0, np.sqrt(1 - g)]], dtype=complex)
    k1 = np.array([[0, np.sqrt(g)], [0, 0]], dtype=complex)
    out = sum(embed(k, [q], n) @ rho @ embed(k, [q], n).conj().T for k in (k0, k1))
    # extra dephasing so that coherences decay with exp(-tau/t2) overall
    lam = np.exp(-tau / t2) / np.exp(-tau / (2 * t1))
    pz = (1 - lam) / 2
    zq = embed(Z, [q], n)
    return (1 - pz) * out + pz * zq @ out @ zq


def cluster_state(n_rows, n_cols, nodes=None, edges=None):
    """Graph state vector on nodes ordered column-major."""
    if nodes is None:
        nodes = [(r, c) for c in range(n_cols) for r in range(n_rows)]
    nodes = sorted(nodes, key=lambda rc: (rc[1], rc[0]))
    idx = {v: i for i, v in enumerate(nodes)}
    if edges is None:
        edges = []
        for r, c in nodes:
            if (r, c + 1) in idx:
                edges.append(((r, c), (r, c + 1)))
            if (r + 1, c) in idx:
                edges.append(((r, c), (r + 1, c)))
    n = len(nodes)
    psi = np.ones(1 << n, dtype=complex) / np.sqrt(1 << n)
    for a, b in edges:
        ia, ib = idx[a], idx[b]
        for k in range(1 << n):
            if (k >> (n - 1 - ia)) & 1 and (k >> (n - 1 - ib)) & 1:
                psi[k] *= -1
    return psi, nodes, edges


def stabilizer_group(n_nodes, generators):
    """All products of generator subsets as full matrices."""
    out = []
    for bits in itertools.product((0, 1), repeat=n_nodes):
        m = np.eye(1 << n_nodes, dtype=complex)
        for b, g in zip(bits, generators):
            if b:
                m = m @ g
        out.append(m)
    return out
