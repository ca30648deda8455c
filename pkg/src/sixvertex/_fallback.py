"""Pure-Python/numpy versions of the compiled kernels.

Selected automatically when the extension module is unavailable, or when
``SIXV_PURE=1`` is set. Results are bit-identical to the compiled ones.
"""

import numpy as np


def sweep(h, nbr, wdiag, order, u, ptable):
    """Sequential heat-bath update of the faces in ``order``, in place."""
    for f in order:
        vals = [h[g] for g in nbr[f] if g >= 0]
        lo, hi = min(vals), max(vals)
        if hi != lo:
            h[f] = lo + 1
            continue
        nplus = nminus = 0
        for g in wdiag[f]:
            if g < 0:
                continue
            if h[g] == lo + 1:
                nplus += 1
            elif h[g] == lo - 1:
                nminus += 1
        h[f] = lo + 1 if u[f] < ptable[nminus - nplus + 4] else lo - 1


def sweep_class(h, nbr, wdiag, faces, u, ptable):
    """Vectorised update of a set of faces that do not interact.

    Equivalent to :func:`sweep` when no face in ``faces`` is an edge or
    diagonal neighbour of another one.
    """
    nb = nbr[faces]
    present = nb >= 0
    vals = np.where(present, h[np.where(present, nb, 0)], 0)
    big = np.iinfo(np.int64).max
    lo = np.where(present, vals, big).min(axis=1)
    hi = np.where(present, vals, -big).max(axis=1)
    wd = wdiag[faces]
    wpresent = wd >= 0
    dv = np.where(wpresent, h[np.where(wpresent, wd, 0)], 0)
    nplus = np.count_nonzero(wpresent & (dv == lo[:, None] + 1), axis=1)
    nminus = np.count_nonzero(wpresent & (dv == lo[:, None] - 1), axis=1)
    p = ptable[nminus - nplus + 4]
    up = u[faces] < p
    new = np.where(up, lo + 1, lo - 1)
    h[faces] = np.where(hi != lo, lo + 1, new)


def has_winding_cycle(mask, eu, ev, ew, n):
    """Union-find with potentials; see the compiled version."""
    parent = list(range(n))
    pot = [0] * n

    def find(a):
        path = []
        while parent[a] != a:
            path.append(a)
            a = parent[a]
        root = a
        acc = 0
        for x in reversed(path):
            acc += pot[x]
            pot[x] = acc
            parent[x] = root
        return root

    for a, b, w in zip(eu.tolist(), ev.tolist(), ew.tolist()):
        if not mask[a] or not mask[b]:
            continue
        ra, rb = find(a), find(b)
        if ra == rb:
            if pot[b] - pot[a] != w:
                return True
        else:
            parent[rb] = ra
            pot[rb] = pot[a] + w - pot[b]
    return False
