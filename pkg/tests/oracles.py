"""Independent reference computations used to derive frozen test values.

Nothing here imports the package: arrows and heights are handled from
first principles (ice rule, +-1 height steps, c-vertices as the vertices
whose diagonal face pairs carry equal heights).
"""

from fractions import Fraction
import itertools

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.linalg import eigs


def _in_arrow(w, e, s, n):
    # +1 points east/up; count arrows pointing into the vertex
    return (w == 1).astype(int) + (e == -1) + (s == 1) + (n == -1)


def cylinder_sector_Z(N, M, c):
    """{n_up: Z} on the N-around, M-face-row cylinder by brute force over
    every arrow assignment (vectorized)."""
    n_vert = N * M
    n_hor = N * (M - 1)
    total = n_vert + n_hor
    bits = np.arange(1 << total, dtype=np.int64)
    arr = ((bits[:, None] >> np.arange(total)) & 1) * 2 - 1
    vert = arr[:, :n_vert].reshape(-1, M, N)       # [row, x]
    hor = arr[:, n_vert:].reshape(-1, M - 1, N)     # [vertex row - 1, x]
    ok = np.ones(len(arr), dtype=bool)
    ncv = np.zeros(len(arr), dtype=np.int64)
    for vy in range(1, M):
        for x in range(N):
            w = hor[:, vy - 1, (x - 1) % N]
            e = hor[:, vy - 1, x]
            s = vert[:, vy - 1, x]
            n = vert[:, vy, x]
            ok &= _in_arrow(w, e, s, n) == 2
            ncv += (w != e) & (s != n)
    n_up = (vert[:, 0, :] == 1).sum(axis=1)
    out = {}
    for k, m in zip(n_up[ok].tolist(), ncv[ok].tolist()):
        out[k] = out.get(k, 0) + Fraction(c) ** m
    return out


def sector_transfer(N, n_up, c):
    """Sparse transfer matrix on rows of N vertical arrows with n_up up."""
    states = [s for s in range(1 << N) if bin(s).count("1") == n_up]
    index = {s: i for i, s in enumerate(states)}
    rows, cols, vals = [], [], []
    for s in states:
        below = [1 if (s >> x) & 1 else -1 for x in range(N)]
        for w0 in (1, -1):
            # walk east along the vertex row; ice rule fixes each new arrow
            # once the vertical arrow above is chosen
            def rec(x, w, above, m):
                if x == N:
                    if w == w0:
                        t = sum(1 << j for j, a in enumerate(above) if a == 1)
                        if t in index:
                            rows.append(index[s])
                            cols.append(index[t])
                            vals.append(float(c) ** m)
                    return
                for n in (1, -1):
                    need_e_in = 2 - (w == 1) - (below[x] == 1) - (n == -1)
                    if need_e_in not in (0, 1):
                        continue
                    e = -1 if need_e_in == 1 else 1
                    rec(x + 1, e, above + [n], m + ((w != e) and (below[x] != n)))
            rec(0, w0, [], 0)
    return csr_matrix((vals, (rows, cols)), shape=(len(states), len(states)))


def sector_free_energy(N, n_up, c):
    """(1/N) log of the leading eigenvalue of the sector block."""
    T = sector_transfer(N, n_up, c)
    if T.shape[0] <= 2:
        lam = max(abs(np.linalg.eigvals(T.toarray())))
    else:
        lam = max(abs(eigs(T, k=1, which="LM", return_eigenvectors=False)))
    return float(np.log(lam)) / N


def _cvertex(sw, se, ne, nw):
    return sw == ne and se == nw


def patch_heights(width, height, boundary, lo=-8, hi=8):
    """All height functions on a width x height face rectangle whose outer
    ring equals ``boundary(x, y)``; yields dicts {(x, y): h}."""
    free = [(x, y) for y in range(1, height - 1) for x in range(1, width - 1)]
    h = {}
    for x in range(width):
        for y in range(height):
            if x in (0, width - 1) or y in (0, height - 1):
                h[(x, y)] = boundary(x, y)

    def fits(f, v):
        x, y = f
        for g in ((x - 1, y), (x + 1, y), (x, y - 1), (x, y + 1)):
            if g in h and abs(h[g] - v) != 1:
                return False
        return True

    def rec(i):
        if i == len(free):
            yield dict(h)
            return
        f = free[i]
        for v in range(lo, hi + 1):
            if (v - f[0] - f[1]) % 2:
                continue
            if fits(f, v):
                h[f] = v
                yield from rec(i + 1)
                del h[f]

    yield from rec(0)


def patch_cvertices(width, height, h):
    n = 0
    for vx in range(1, width):
        for vy in range(1, height):
            n += _cvertex(h[(vx - 1, vy - 1)], h[(vx, vy - 1)], h[(vx, vy)], h[(vx - 1, vy)])
    return n


def torus_heights(N, lo=-6, hi=6):
    """Height functions on the N x N torus rooted at h(0, 0) = 0."""
    faces = [(x, y) for y in range(N) for x in range(N)]
    h = {(0, 0): 0}

    def fits(f, v):
        x, y = f
        for g in (((x - 1) % N, y), ((x + 1) % N, y), (x, (y - 1) % N), (x, (y + 1) % N)):
            if g in h and abs(h[g] - v) != 1:
                return False
        return True

    def rec(i):
        if i == len(faces):
            yield dict(h)
            return
        f = faces[i]
        if f in h:
            yield from rec(i + 1)
            return
        for v in range(lo, hi + 1):
            if (v - f[0] - f[1]) % 2 == 0 and fits(f, v):
                h[f] = v
                yield from rec(i + 1)
                del h[f]

    yield from rec(0)


def torus_cvertices(N, h):
    n = 0
    for vx in range(N):
        for vy in range(N):
            sw, se = h[((vx - 1) % N, (vy - 1) % N)], h[(vx, (vy - 1) % N)]
            ne, nw = h[(vx, vy)], h[((vx - 1) % N, vy)]
            n += _cvertex(sw, se, ne, nw)
    return n


def exact_expectations(configs, weights, observables):
    Z = sum(weights)
    return {name: sum(w * f(h) for h, w in zip(configs, weights)) / Z
            for name, f in observables.items()}


def patch_observables():
    return {
        "h2:2,2": lambda h: h[(2, 2)] ** 2,
        "inc2:2,2:3,3": lambda h: (h[(2, 2)] - h[(3, 3)]) ** 2,
        "ge:2,3:1": lambda h: int(h[(2, 3)] >= 1),
    }


def torus_observables():
    return {
        "inc2:0,0:2,0": lambda h: (h[(0, 0)] - h[(2, 0)]) ** 2,
        "inc2:0,0:1,1": lambda h: (h[(0, 0)] - h[(1, 1)]) ** 2,
        "inc2:0,0:2,2": lambda h: (h[(0, 0)] - h[(2, 2)]) ** 2,
    }


if __name__ == "__main__":
    # print the values that are frozen in the tests
    for N, M in itertools.product((2, 4), (2, 3)):
        print("Z", N, M, {k: str(v) for k, v in sorted(cylinder_sector_Z(N, M, Fraction(3, 2)).items())})
    for c in (1, 2, 3):
        cfg = list(patch_heights(6, 6, lambda x, y: (x + y) % 2))
        w = [Fraction(c) ** patch_cvertices(6, 6, h) for h in cfg]
        ex = exact_expectations(cfg, w, patch_observables())
        print("patch", c, len(cfg), {k: str(v) for k, v in ex.items()})
        cfg = list(torus_heights(4))
        w = [Fraction(c) ** torus_cvertices(4, h) for h in cfg]
        ex = exact_expectations(cfg, w, torus_observables())
        print("torus", c, len(cfg), {k: str(v) for k, v in ex.items()})
    for c in (1, 2, 3):
        f = [sector_free_energy(16, 8 + k, c) for k in range(4)]
        g = [f[0] - x for x in f]
        print("free", c, f, [g[k] / (k / 16) for k in range(1, 4)])
