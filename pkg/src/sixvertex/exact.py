"""Exact computations: enumeration, finite-volume measures, transfer operator.

Exact arithmetic is used whenever the weight ``c`` is an int or a
``Fraction``; floats switch everything to log-space/float64.
"""

from collections import deque
from fractions import Fraction
import math

import numpy as np

from . import heights as H
from .lattice import DomainError, cylinder, torus


class EnumerationTooLarge(RuntimeError):
    def __init__(self, log2_estimate, cap):
        super().__init__(
            f"estimated 2^{log2_estimate:.1f} states exceeds cap 2^{cap}")
        self.log2_estimate = log2_estimate


def _parity_round_up(lo, par):
    return lo + ((lo - par) % 2)


def _parity_round_down(hi, par):
    return hi - ((hi - par) % 2)


def height_envelope(D, xi=None, lo=None, hi=None):
    """Lower/upper bounds for any extension of ``xi`` within [lo, hi]."""
    idx, val = H._as_boundary(D, xi)
    par = D.parity
    if idx.size:
        lower = H.min_extension(D, xi)
        upper = H.max_extension(D, xi)
    else:
        if lo is None or hi is None:
            raise H.HeightError("free enumeration needs value bounds lo/hi")
        lower = np.full(D.n_faces, lo, dtype=np.int64)
        upper = np.full(D.n_faces, hi, dtype=np.int64)
    if lo is not None:
        lower = np.maximum(lower, _parity_round_up(np.int64(lo), par))
    if hi is not None:
        upper = np.minimum(upper, _parity_round_down(np.int64(hi), par))
    lower = _parity_round_up(lower, par)
    upper = _parity_round_down(upper, par)
    return lower, upper


def enumerate_heights(D, xi=None, lo=None, hi=None, max_log2=24):
    """Yield every height function extending ``xi`` (as tuples of ints).

    ``xi`` maps faces to fixed values; it may be supported on any set of
    faces. ``lo``/``hi`` clamp all values, which makes enumeration on a
    domain without fixed faces finite. On a torus with no ``xi`` the face
    (0, 0) is rooted at 0.
    """
    if xi is None and D.kind == 'torus':
        xi = {(0, 0): 0}
    idx, val = H._as_boundary(D, xi)
    lower, upper = height_envelope(D, xi, lo, hi)
    fixed = np.zeros(D.n_faces, dtype=bool)
    fixed[idx] = True
    if idx.size and (np.any(lower[idx] > val) or np.any(upper[idx] < val)):
        return
    if np.any(lower > upper):
        return
    free_span = (upper - lower)[~fixed] // 2 + 1
    est = float(np.sum(np.log2(free_span)))
    if est > max_log2:
        raise EnumerationTooLarge(est, max_log2)

    # breadth-first order from the fixed faces keeps the branching small
    order = []
    seen = fixed.copy()
    queue = deque(int(i) for i in idx) if idx.size else deque()
    if not idx.size:
        seen[0] = True
        order.append(0)
        queue.append(0)
    while queue:
        i = queue.popleft()
        for j in D.nbr[i]:
            if j >= 0 and not seen[j]:
                seen[j] = True
                order.append(int(j))
                queue.append(int(j))
    pos = {f: k for k, f in enumerate(order)}
    earlier = []
    for k, f in enumerate(order):
        nb = {int(j) for j in D.nbr[f] if j >= 0 and (fixed[j] or pos.get(int(j), k) < k)}
        earlier.append(tuple(nb))

    h = np.zeros(D.n_faces, dtype=np.int64)
    h[idx] = val
    cur = h.tolist()
    lo_l, hi_l = lower.tolist(), upper.tolist()
    n = len(order)

    def rec(k):
        if k == n:
            yield tuple(cur)
            return
        f = order[k]
        nb = earlier[k]
        if nb:
            v0 = cur[nb[0]]
            cands = (v0 - 1, v0 + 1)
        else:
            cands = range(lo_l[f], hi_l[f] + 1, 2)
        for v in cands:
            if v < lo_l[f] or v > hi_l[f]:
                continue
            if any(abs(cur[g] - v) != 1 for g in nb):
                continue
            cur[f] = v
            yield from rec(k + 1)

    yield from rec(0)


class ExactMeasure:
    """Boltzmann measure over an explicit list of height functions.

    Parameters
    ----------
    D : Domain
    configs : (n, F) int array of height functions
    c : weight of type 5-6 vertices (int/Fraction for exact results)
    """

    def __init__(self, D, configs, c):
        self.D = D
        self.c = H.parse_c(c)
        self.configs = np.asarray(configs, dtype=np.int64).reshape(-1, D.n_faces)
        if len(self.configs) == 0:
            raise H.InadmissibleBoundary("no height function extends the data")
        vf = D.vert_faces
        h = self.configs
        self.counts = np.count_nonzero(
            (h[:, vf[:, 0]] == h[:, vf[:, 2]]) & (h[:, vf[:, 1]] == h[:, vf[:, 3]]),
            axis=1)
        self.exact = H.is_exact(self.c)
        self._kmax = int(self.counts.max()) if len(self.counts) else 0

    @classmethod
    def build(cls, D, xi=None, c=1, lo=None, hi=None, max_log2=24):
        configs = list(enumerate_heights(D, xi, lo, hi, max_log2))
        if not configs:
            raise H.InadmissibleBoundary("no height function extends the data")
        return cls(D, np.array(configs, dtype=np.int64), c)

    def __len__(self):
        return len(self.configs)

    # weights are c^k; histogram over k keeps exact sums cheap
    def _powers(self):
        if self.exact:
            c = Fraction(self.c)
            return [c ** k for k in range(self._kmax + 1)]
        return None

    def _sum_by_count(self, values=None, mask=None):
        k = self.counts if mask is None else self.counts[mask]
        if values is not None:
            values = np.asarray(values)
            if mask is not None:
                values = values[mask]
        if self.exact:
            pw = self._powers()
            if values is None:
                hist = np.bincount(k, minlength=self._kmax + 1)
                return sum(int(n) * p for n, p in zip(hist, pw))
            if values.dtype.kind in 'iub':
                acc = np.zeros(self._kmax + 1, dtype=np.int64)
                np.add.at(acc, k, values.astype(np.int64))
                return sum(int(a) * p for a, p in zip(acc, pw))
            tot = Fraction(0)
            for kk, v in zip(k.tolist(), values.tolist()):
                tot += pw[kk] * Fraction(v)
            return tot
        lw = k * math.log(float(self.c)) - self._kmax * math.log(max(float(self.c), 1.0))
        w = np.exp(lw)
        if values is None:
            return float(w.sum())
        return float(np.dot(w, values.astype(float)))

    @property
    def Z(self):
        """Partition function (sum of c^k)."""
        if self.exact:
            return self._sum_by_count()
        return math.exp(self.log_Z)

    @property
    def log_Z(self):
        lc = math.log(float(self.c))
        a = self.counts * lc
        m = a.max()
        return float(m + np.log(np.exp(a - m).sum()))

    def probabilities(self):
        """Probability of each configuration (Fractions when exact)."""
        if self.exact:
            Z = self._sum_by_count()
            pw = self._powers()
            return [pw[k] / Z for k in self.counts.tolist()]
        a = self.counts * math.log(float(self.c))
        a = a - a.max()
        w = np.exp(a)
        return w / w.sum()

    def prob(self, event):
        """``event`` is a boolean array over configs or a predicate on h."""
        mask = self._mask(event)
        num = self._sum_by_count(mask=mask)
        den = self._sum_by_count()
        return Fraction(num) / Fraction(den) if self.exact else num / den

    def expectation(self, f):
        vals = self._values(f)
        num = self._sum_by_count(values=vals)
        den = self._sum_by_count()
        return Fraction(num) / Fraction(den) if self.exact else num / den

    def variance(self, f):
        vals = self._values(f)
        m = self.expectation(vals)
        m2 = self.expectation(vals * vals)
        return m2 - m * m

    def marginal(self, face):
        """Law of h(face) as a dict value -> probability."""
        i = self.D.face_index(face)
        col = self.configs[:, i]
        return {int(v): self.prob(col == v) for v in np.unique(col)}

    def _mask(self, event):
        if callable(event):
            return np.array([bool(event(h)) for h in self.configs], dtype=bool)
        return np.asarray(event, dtype=bool)

    def _values(self, f):
        if callable(f):
            out = [f(h) for h in self.configs]
            if all(isinstance(v, (int, np.integer, bool, np.bool_)) for v in out):
                return np.array(out, dtype=np.int64)
            return np.array(out, dtype=object if self.exact else float)
        return np.asarray(f)

    def face_values(self, face):
        return self.configs[:, self.D.face_index(face)]

    def lookup(self):
        """Map configuration tuple -> row index."""
        return {tuple(r): i for i, r in enumerate(self.configs.tolist())}


def exact_query(D, xi, c, query, f=None, lo=None, hi=None):
    """One-shot exact query: ``'Z'``, ``'prob'``, ``'expectation'`` or
    ``'variance'``; ``f`` is the event or observable."""
    mu = ExactMeasure.build(D, xi, c, lo=lo, hi=hi)
    if query == 'Z':
        return mu.Z
    if query == 'prob':
        return mu.prob(f)
    if query == 'expectation':
        return mu.expectation(f)
    if query == 'variance':
        return mu.variance(f)
    raise ValueError(f"unknown query {query!r}")


def torus_measure(N, c, max_log2=26):
    """Balanced measure on the N-torus over heights rooted at h(0,0)=0."""
    if N > 6:
        raise EnumerationTooLarge(float('inf'), max_log2)
    D = torus(N)
    return ExactMeasure.build(D, {(0, 0): 0}, c, max_log2=max_log2)


def torus_balanced_exact(N, c, query='increment2', x=(0, 0), y=(1, 0)):
    """Exact balanced-torus quantities.

    ``'increment2'`` gives E[(h(x) - h(y))^2], ``'increment'`` E[h(x) - h(y)],
    ``'Z'`` the partition function and ``'count'`` the number of balanced
    configurations.
    """
    mu = torus_measure(N, c)
    i, j = mu.D.face_index(x), mu.D.face_index(y)
    d = mu.configs[:, i] - mu.configs[:, j]
    if query == 'increment2':
        return mu.expectation(d * d)
    if query == 'increment':
        return mu.expectation(d)
    if query == 'Z':
        return mu.Z
    if query == 'count':
        return len(mu)
    raise ValueError(f"unknown query {query!r}")


# transfer operator

class ConvergenceError(RuntimeError):
    def __init__(self, msg, residual):
        super().__init__(msg)
        self.residual = residual


def popcount(x):
    return bin(x).count("1")


class TransferOperator:
    """Row-to-row transfer operator on a cylinder of circumference ``N``.

    States are bit patterns of the ``N`` vertical edges crossing a face row
    (bit j set: edge at column j points up). One application adds a row of
    ``N`` vertices, summing over the cyclic row of horizontal edges. The
    number of up arrows is conserved, so each block ``n_up`` is invariant.
    """

    def __init__(self, N, c, exact=None):
        if N < 2 or N % 2:
            raise DomainError("N must be even and >= 2")
        self.N = N
        self.c = H.parse_c(c)
        self.exact = H.is_exact(self.c) if exact is None else exact
        if self.exact and not H.is_exact(self.c):
            raise ValueError("exact transfer needs a rational c")
        self.size = 1 << N
        self._pop = np.array([popcount(s) for s in range(self.size)], dtype=np.int64)

    def block(self, n_up):
        if not 0 <= n_up <= self.N:
            raise ValueError("n_up out of range")
        return np.flatnonzero(self._pop == n_up)

    def block_of_sector(self, s):
        return self.block(self.N // 2 + s)

    def apply(self, x):
        """Return y with y[t] = sum_s x[s] T[s, t]."""
        N = self.N
        dtype = object if self.exact else np.float64
        c = Fraction(self.c) if self.exact else float(self.c)
        V = np.zeros((2, 2, self.size), dtype=dtype)
        V[0, 0] = x
        V[1, 1] = x
        for j in range(N):
            W = V.reshape(2, 2, self.size >> (j + 1), 2, 1 << j)
            a = W[:, 0, :, 1, :].copy()  # bit set, horizontal arrow west
            b = W[:, 1, :, 0, :].copy()  # bit clear, horizontal arrow east
            W[:, 0, :, 1, :] = a + c * b
            W[:, 1, :, 0, :] = c * a + b
        return V[0, 0] + V[1, 1]

    def sector_Z(self, n_up, M):
        """Partition function of the cylinder with M face rows restricted to
        ``n_up`` up arrows per row (free top and bottom)."""
        if M < 2:
            raise ValueError("M must be >= 2")
        dtype = object if self.exact else np.float64
        x = np.zeros(self.size, dtype=dtype)
        x[self.block(n_up)] = 1
        for _ in range(M - 1):
            x = self.apply(x)
        return x[self.block(n_up)].sum()

    def leading_eig(self, n_up, tol=1e-12, max_iter=100_000):
        """Perron eigenvalue of block ``n_up`` by power iteration."""
        idx = self.block(n_up)
        x = np.zeros(self.size)
        x[idx] = 1.0 / len(idx)
        lam_old = 0.0
        op = self if not self.exact else TransferOperator(self.N, float(self.c), exact=False)
        for it in range(1, max_iter + 1):
            y = op.apply(x)
            lam = y.sum() / x.sum()
            y /= y.sum()
            change = abs(lam - lam_old) / lam
            x = y
            lam_old = lam
            if change < tol and it > 5:
                ty = op.apply(x)
                resid = float(np.linalg.norm(ty - lam * x) / np.linalg.norm(ty))
                return FreeEnergyEstimate(self.N, n_up, float(lam), resid, it)
        ty = op.apply(x)
        resid = float(np.linalg.norm(ty - lam_old * x) / np.linalg.norm(ty))
        raise ConvergenceError(
            f"power iteration did not converge in {max_iter} steps", resid)

    def leading_eig_arpack(self, n_up):
        """Cross-check of :meth:`leading_eig` with ARPACK on the block."""
        from scipy.sparse.linalg import LinearOperator, eigs
        idx = self.block(n_up)
        op = TransferOperator(self.N, float(self.c), exact=False)

        def mv(v):
            x = np.zeros(self.size)
            x[idx] = np.real(v).ravel()
            return op.apply(x)[idx]

        A = LinearOperator((len(idx), len(idx)), matvec=mv, rmatvec=mv, dtype=float)
        if len(idx) <= 2:
            dense = np.column_stack([mv(e) for e in np.eye(len(idx))])
            return float(np.max(np.abs(np.linalg.eigvals(dense))))
        vals = eigs(A, k=1, which='LM', return_eigenvectors=False, tol=1e-13)
        return float(np.abs(vals[0]))

    def dense_block(self, n_up):
        idx = self.block(n_up)
        cols = []
        for s in idx:
            x = np.zeros(self.size, dtype=object if self.exact else float)
            x[s] = 1
            cols.append(self.apply(x)[idx])
        return np.array(cols)


class FreeEnergyEstimate:
    """Leading eigenvalue of one flux block and the derived free energy."""

    def __init__(self, N, n_up, lam, residual, iterations):
        self.N = N
        self.n_up = n_up
        self.sector = n_up - N // 2
        self.alpha = self.sector / N
        self.lam = lam
        self.f_hat = math.log(lam) / N
        self.residual = residual
        self.iterations = iterations

    def __repr__(self):
        return (f"FreeEnergyEstimate(N={self.N}, alpha={self.alpha}, "
                f"f_hat={self.f_hat:.12f}, residual={self.residual:.2e})")


def build_transfer(N, c, exact=None):
    return TransferOperator(N, c, exact)


def free_energy(N, c, s=0, tol=1e-12):
    """f_hat_N at sector s (alpha = s/N)."""
    T = TransferOperator(N, c, exact=False)
    return T.leading_eig(N // 2 + s, tol=tol)


def sector_of_alpha(N, alpha):
    """Integer sector s = round(alpha*N); the realised alpha is s/N."""
    return int(round(alpha * N))


def curvature_diagnostic(c, N, k_max):
    """Rows (alpha, f_hat, g, g/alpha, g/alpha^2) for sectors 0..k_max, where
    g(alpha) = f_hat(0) - f_hat(alpha)."""
    if not 1 <= k_max <= N // 2 - 1:
        raise ValueError("need 1 <= k_max <= N/2 - 1")
    T = TransferOperator(N, c, exact=False)
    est = [T.leading_eig(N // 2 + k) for k in range(k_max + 1)]
    f0 = est[0].f_hat
    rows = []
    for k, e in enumerate(est):
        g = f0 - e.f_hat
        a = k / N
        rows.append({
            "N": N, "c": float(H.parse_c(c)), "k": k, "alpha": a,
            "f_hat": e.f_hat, "g": g,
            "g_over_alpha": g / a if k else 0.0,
            "g_over_alpha2": g / (a * a) if k else 0.0,
            "residual": e.residual,
        })
    return rows


# brute-force cylinder enumeration (oracle for the transfer operator)

def cylinder_arrow_configs(N, M):
    """All ice-rule arrow configurations on the N x M cylinder.

    Built row by row: choose the vertical edges of a face row, then the
    horizontal edges of the next vertex row, keeping only choices that
    satisfy the ice rule at every vertex of that row.
    """
    D = cylinder(N, M)
    E = len(D.edges)
    vert = [[D.edge_index[('v', x, y)] for x in range(N)] for y in range(M)]
    horiz = [[D.edge_index[('h', x, y)] for x in range(N)] for y in range(1, M)]
    patterns = [tuple(1 if (s >> j) & 1 else -1 for j in range(N)) for s in range(1 << N)]
    arrows = np.zeros(E, dtype=np.int8)

    def row_ok(vy):
        for vx in range(N):
            w, e, s, n = H.vertex_arrows(D, arrows, (vx, vy))
            if H.out_degree(w, e, s, n) != 2:
                return False
        return True

    def rec(y):
        # vertical edges of face row y are set; add vertex row y+1
        if y == M - 1:
            yield arrows.copy()
            return
        for hp in patterns:
            arrows[horiz[y]] = hp
            for vp in patterns:
                arrows[vert[y + 1]] = vp
                if row_ok(y + 1):
                    yield from rec(y + 1)

    for vp in patterns:
        arrows[vert[0]] = vp
        yield from rec(0)


def brute_force_sector_Z(N, M, c):
    """{n_up: Z} by direct enumeration; the weight is counted from vertex
    types 5 and 6."""
    D = cylinder(N, M)
    c = H.parse_c(c)
    out = {}
    for arrows in cylinder_arrow_configs(N, M):
        types = H.vertex_types(D, arrows)
        k = int(np.count_nonzero(types >= 5))
        w = Fraction(c) ** k if H.is_exact(c) else float(c) ** k
        nu = H.n_up(D, arrows)
        out[nu] = out.get(nu, 0) + w
    return out
