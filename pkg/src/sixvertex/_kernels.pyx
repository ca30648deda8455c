# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot loops: heat-bath sweeps and annulus winding detection."""

import numpy as np
cimport numpy as cnp

cnp.import_array()


def sweep(cnp.int64_t[::1] h, const cnp.int64_t[:, ::1] nbr,
          const cnp.int64_t[:, ::1] wdiag, const cnp.int64_t[::1] order,
          const double[::1] u, const double[::1] ptable):
    """Heat-bath update of the faces in ``order``, in place.

    ``u`` holds one uniform per face (indexed by face), ``ptable[d + 4]`` the
    probability of moving up when (#diagonals below) - (#diagonals above) = d.
    """
    cdef Py_ssize_t k, i, j, f, g
    cdef cnp.int64_t lo, hi, v, m
    cdef int nplus, nminus
    cdef Py_ssize_t n = order.shape[0]
    for k in range(n):
        f = order[k]
        lo = 0
        hi = 0
        m = 0
        for j in range(4):
            g = nbr[f, j]
            if g < 0:
                continue
            v = h[g]
            if m == 0:
                lo = v
                hi = v
                m = 1
            elif v < lo:
                lo = v
            elif v > hi:
                hi = v
        if hi != lo:
            h[f] = lo + 1
            continue
        nplus = 0
        nminus = 0
        for j in range(4):
            g = wdiag[f, j]
            if g < 0:
                continue
            v = h[g]
            if v == lo + 1:
                nplus += 1
            elif v == lo - 1:
                nminus += 1
        if u[f] < ptable[nminus - nplus + 4]:
            h[f] = lo + 1
        else:
            h[f] = lo - 1


cdef Py_ssize_t _find(cnp.int64_t[::1] parent, cnp.int64_t[::1] pot, Py_ssize_t a):
    # path compression keeping potentials relative to the root
    cdef Py_ssize_t root = a, nxt
    cdef cnp.int64_t acc = 0, tmp
    while parent[root] != root:
        root = parent[root]
    # second pass: accumulate potentials from a up to the root
    cdef Py_ssize_t cur = a
    while parent[cur] != cur:
        acc += pot[cur]
        cur = parent[cur]
    cur = a
    while parent[cur] != cur:
        nxt = parent[cur]
        tmp = pot[cur]
        pot[cur] = acc
        acc -= tmp
        parent[cur] = root
        cur = nxt
    return root


def has_winding_cycle(const cnp.uint8_t[::1] mask, const cnp.int64_t[::1] eu,
                      const cnp.int64_t[::1] ev, const cnp.int64_t[::1] ew,
                      Py_ssize_t n):
    """True iff the subgraph on masked nodes has a cycle of nonzero winding.

    Edge ``k`` joins ``eu[k]`` to ``ev[k]`` and carries the signed number
    ``ew[k]`` of cut-ray crossings.
    """
    cdef cnp.int64_t[::1] parent = np.arange(n, dtype=np.int64)
    cdef cnp.int64_t[::1] pot = np.zeros(n, dtype=np.int64)
    cdef Py_ssize_t k, a, b, ra, rb
    for k in range(eu.shape[0]):
        a = eu[k]
        b = ev[k]
        if not mask[a] or not mask[b]:
            continue
        ra = _find(parent, pot, a)
        rb = _find(parent, pot, b)
        # pot[x] is potential(x) - potential(root); want potential(b) = potential(a) + w
        if ra == rb:
            if pot[b] - pot[a] != ew[k]:
                return True
        else:
            parent[rb] = ra
            pot[rb] = pot[a] + ew[k] - pot[b]
    return False
