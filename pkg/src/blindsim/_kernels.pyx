# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""In-place density-matrix kernels.

Every routine mutates ``rho`` (a C-contiguous ``complex128`` square array of
side ``2**n``).  Qubit 0 is the most significant bit of the basis index.
"""

ctypedef double complex cplx


def apply_1q(cplx[:, ::1] rho, cplx[:, ::1] u, int q, int n):
    cdef Py_ssize_t dim = (<Py_ssize_t>1) << n
    cdef Py_ssize_t bit = (<Py_ssize_t>1) << (n - 1 - q)
    cdef Py_ssize_t i, j, c
    cdef cplx u00 = u[0, 0], u01 = u[0, 1], u10 = u[1, 0], u11 = u[1, 1]
    cdef cplx v00 = u00.conjugate(), v01 = u01.conjugate()
    cdef cplx v10 = u10.conjugate(), v11 = u11.conjugate()
    cdef cplx a, b
    with nogil:
        for i in range(dim):
            if i & bit:
                continue
            j = i | bit
            for c in range(dim):
                a = rho[i, c]
                b = rho[j, c]
                rho[i, c] = u00 * a + u01 * b
                rho[j, c] = u10 * a + u11 * b
        for c in range(dim):
            for i in range(dim):
                if i & bit:
                    continue
                j = i | bit
                a = rho[c, i]
                b = rho[c, j]
                rho[c, i] = a * v00 + b * v01
                rho[c, j] = a * v10 + b * v11


def apply_2q(cplx[:, ::1] rho, cplx[:, ::1] u, int q1, int q2, int n):
    cdef Py_ssize_t dim = (<Py_ssize_t>1) << n
    cdef Py_ssize_t b1 = (<Py_ssize_t>1) << (n - 1 - q1)
    cdef Py_ssize_t b2 = (<Py_ssize_t>1) << (n - 1 - q2)
    cdef Py_ssize_t i, c, k, m
    cdef Py_ssize_t idx[4]
    cdef cplx v[4]
    cdef cplx uu[4][4]
    cdef cplx cu[4][4]
    cdef cplx acc
    for k in range(4):
        for m in range(4):
            uu[k][m] = u[k, m]
            cu[k][m] = u[k, m].conjugate()
    with nogil:
        for i in range(dim):
            if (i & b1) or (i & b2):
                continue
            idx[0] = i
            idx[1] = i | b2
            idx[2] = i | b1
            idx[3] = i | b1 | b2
            for c in range(dim):
                for k in range(4):
                    v[k] = rho[idx[k], c]
                for k in range(4):
                    acc = 0
                    for m in range(4):
                        acc = acc + uu[k][m] * v[m]
                    rho[idx[k], c] = acc
        for c in range(dim):
            for i in range(dim):
                if (i & b1) or (i & b2):
                    continue
                idx[0] = i
                idx[1] = i | b2
                idx[2] = i | b1
                idx[3] = i | b1 | b2
                for k in range(4):
                    v[k] = rho[c, idx[k]]
                for k in range(4):
                    acc = 0
                    for m in range(4):
                        acc = acc + v[m] * cu[k][m]
                    rho[c, idx[k]] = acc


def depolarize_1q(cplx[:, ::1] rho, int q, int n, double p):
    cdef Py_ssize_t dim = (<Py_ssize_t>1) << n
    cdef Py_ssize_t bit = (<Py_ssize_t>1) << (n - 1 - q)
    cdef Py_ssize_t i, c, i1, c1
    cdef double keep = 1.0 - p
    cdef cplx a, d, mean
    with nogil:
        for i in range(dim):
            if i & bit:
                continue
            i1 = i | bit
            for c in range(dim):
                if c & bit:
                    continue
                c1 = c | bit
                a = rho[i, c]
                d = rho[i1, c1]
                mean = 0.5 * (a + d)
                rho[i, c] = keep * a + p * mean
                rho[i1, c1] = keep * d + p * mean
                rho[i, c1] = keep * rho[i, c1]
                rho[i1, c] = keep * rho[i1, c]


def thermal_relax(cplx[:, ::1] rho, int q, int n, double a, double b):
    """Zero-temperature relaxation: populations decay by ``a``, coherences by ``b``."""
    cdef Py_ssize_t dim = (<Py_ssize_t>1) << n
    cdef Py_ssize_t bit = (<Py_ssize_t>1) << (n - 1 - q)
    cdef Py_ssize_t i, c, i1, c1
    cdef double lost = 1.0 - a
    with nogil:
        for i in range(dim):
            if i & bit:
                continue
            i1 = i | bit
            for c in range(dim):
                if c & bit:
                    continue
                c1 = c | bit
                rho[i, c] = rho[i, c] + lost * rho[i1, c1]
                rho[i1, c1] = a * rho[i1, c1]
                rho[i, c1] = b * rho[i, c1]
                rho[i1, c] = b * rho[i1, c]


def project(cplx[:, ::1] rho, int q, int n, int outcome):
    """Keep the ``outcome`` block of qubit ``q``; return the kept trace."""
    cdef Py_ssize_t dim = (<Py_ssize_t>1) << n
    cdef Py_ssize_t bit = (<Py_ssize_t>1) << (n - 1 - q)
    cdef Py_ssize_t want = bit if outcome else 0
    cdef Py_ssize_t i, c
    cdef double tr = 0.0
    with nogil:
        for i in range(dim):
            if (i & bit) != want:
                for c in range(dim):
                    rho[i, c] = 0
            else:
                tr += rho[i, i].real
                for c in range(dim):
                    if (c & bit) != want:
                        rho[i, c] = 0
    return tr


def z_probability(cplx[:, ::1] rho, int q, int n, int outcome):
    cdef Py_ssize_t dim = (<Py_ssize_t>1) << n
    cdef Py_ssize_t bit = (<Py_ssize_t>1) << (n - 1 - q)
    cdef Py_ssize_t want = bit if outcome else 0
    cdef Py_ssize_t i
    cdef double tr = 0.0
    with nogil:
        for i in range(dim):
            if (i & bit) == want:
                tr += rho[i, i].real
    return tr
