"""Heat-bath (Glauber) dynamics for height functions.

A single-site update resamples h(x) from its exact conditional law given
everything else. If the edge neighbours of x take two values m and m+2,
h(x) is forced to m+1. If they all equal m, h(x) = m+1 with probability
c^{n+} / (c^{n+} + c^{n-}), where n+ (n-) counts faces diagonal to x across
a weighted corner with height m+1 (m-1).

Updates use one uniform per face per sweep; chains that share a driver see
the same uniforms, which gives the monotone grand coupling for c >= 1.
"""

from fractions import Fraction
import math

import numpy as np

from . import heights as H
from . import kernels


def up_probability_table(c):
    """float array p[d + 4] = 1 / (1 + c^d) for d = n- - n+ in [-4, 4]."""
    c = float(H.parse_c(c))
    return np.array([1.0 / (1.0 + c ** d) for d in range(-4, 5)], dtype=np.float64)


def up_probability_exact(c, d):
    c = Fraction(H.parse_c(c))
    return 1 / (1 + c ** d)


def heat_bath_conditional(D, h, f, c):
    """Conditional law of h(f) given the rest, as ``{value: probability}``.

    Probabilities are Fractions when ``c`` is rational.
    """
    i = D.face_index(f) if isinstance(f, tuple) else int(f)
    vals = [int(h[g]) for g in D.nbr[i] if g >= 0]
    lo, hi = min(vals), max(vals)
    if hi - lo == 2:
        return {lo + 1: 1}
    if hi != lo:
        raise H.HeightError("neighbour heights differ by more than 2")
    nplus = sum(1 for g in D.wdiag[i] if g >= 0 and h[g] == lo + 1)
    nminus = sum(1 for g in D.wdiag[i] if g >= 0 and h[g] == lo - 1)
    c = H.parse_c(c)
    if H.is_exact(c):
        p = up_probability_exact(c, nminus - nplus)
    else:
        p = 1.0 / (1.0 + float(c) ** (nminus - nplus))
    return {lo + 1: p, lo - 1: 1 - p}


def updatable_faces(D, fixed=None):
    """Faces not in the support of the boundary condition."""
    mask = np.ones(D.n_faces, dtype=bool)
    if fixed is None:
        if D.kind != 'torus':
            mask[D.boundary] = False
    else:
        for f in fixed:
            mask[D.face_index(f)] = False
    return mask


def sweep_order(D, mask, order):
    """Face order for one sweep plus the non-interacting classes, if any."""
    if order == 'checkerboard':
        classes = [cl[mask[cl]] for cl in D.sublattice_classes]
        classes = [cl for cl in classes if cl.size]
        return np.concatenate(classes) if classes else np.empty(0, np.int64), classes
    if order == 'sequential':
        return np.flatnonzero(mask).astype(np.int64), None
    raise ValueError(f"unknown sweep order {order!r}")


class Driver:
    """Source of sweep randomness: one uniform per face per sweep.

    Streams are keyed by ``(seed, stream)`` through ``SeedSequence`` and a
    counter-based Philox generator, so runs replay exactly and distinct
    streams are independent.
    """

    def __init__(self, D, mask, seed=0, stream=0, order='checkerboard'):
        self.D = D
        self.mask = mask
        self.order_name = order
        self.rng = np.random.Generator(np.random.Philox(np.random.SeedSequence([seed, stream])))
        if order == 'random':
            self._faces = np.flatnonzero(mask).astype(np.int64)
            self._classes = None
        else:
            self._faces, self._classes = sweep_order(D, mask, order)

    def next(self):
        u = self.rng.random(self.D.n_faces)
        if self.order_name == 'random':
            return self.rng.permutation(self._faces), u, None
        return self._faces, u, self._classes


class ChainState:
    """A height function evolving under heat-bath sweeps.

    Parameters
    ----------
    D : Domain
    h : initial height function (copied)
    c : vertex weight
    fixed : iterable of faces held fixed; defaults to the boundary faces
        (nothing on a torus)
    seed, chain_id : RNG key
    order : 'checkerboard', 'sequential' or 'random'
    """

    def __init__(self, D, h, c, fixed=None, seed=0, chain_id=0,
                 order='checkerboard', driver=None):
        self.D = D
        self.c = H.parse_c(c)
        self.h = np.array(h, dtype=np.int64)
        H.validate(D, self.h)
        self.mask = updatable_faces(D, fixed)
        self.ptable = up_probability_table(self.c)
        self.driver = driver or Driver(D, self.mask, seed, chain_id, order)
        self.seed = seed
        self.sweeps = 0

    def sweep(self, draw=None):
        order, u, classes = draw if draw is not None else self.driver.next()
        kernels.sweep_faces(self.h, self.D.nbr, self.D.wdiag, order, u,
                            self.ptable, classes)
        self.sweeps += 1
        if self.D.kind == 'torus' and self.sweeps % 64 == 0:
            self.recenter()
        return self

    def run(self, n):
        for _ in range(n):
            self.sweep()
        return self

    def step(self, f, u):
        """Single-site heat-bath update of face ``f`` with uniform ``u``."""
        i = self.D.face_index(f) if isinstance(f, tuple) else int(f)
        uu = np.zeros(self.D.n_faces)
        uu[i] = u
        kernels.sweep_faces(self.h, self.D.nbr, self.D.wdiag,
                            np.array([i], dtype=np.int64), uu, self.ptable)
        return self

    def recenter(self):
        """Shift by an even constant so that h(face 0) is 0 or 1."""
        shift = self.h[0] - (self.h[0] % 2)
        if shift:
            self.h -= shift

    def rooted(self, root=0):
        """Heights shifted by an even constant so that h(root) in {0, 1}."""
        r = self.h[root]
        return self.h - (r - (r % 2))


def coupled_sweep(lower, upper):
    """Advance two chains with the same faces and uniforms."""
    draw = lower.driver.next()
    lower.sweep(draw)
    upper.sweep(draw)


def is_ordered(h_lo, h_hi):
    return bool(np.all(h_lo <= h_hi))


def sandwich_diagnostic(D, xi, c, seed=0, max_sweeps=10_000, order='checkerboard',
                        stop_when_coupled=True):
    """Run min-start and max-start chains under shared randomness.

    Returns a dict with the per-sweep maximal gap, the first sweep at which
    the chains agree (or None) and the number of sweeps after which the
    order h_min <= h_max was violated (always 0 for c >= 1).
    """
    lo_h = H.min_extension(D, xi)
    hi_h = H.max_extension(D, xi)
    fixed = list(xi)
    lower = ChainState(D, lo_h, c, fixed=fixed, seed=seed, order=order)
    upper = ChainState(D, hi_h, c, fixed=fixed, seed=seed, order=order,
                       driver=lower.driver)
    gaps = [int(np.max(hi_h - lo_h))]
    violations = 0
    coupled_at = 0 if gaps[0] == 0 else None
    for t in range(1, max_sweeps + 1):
        if coupled_at is not None and stop_when_coupled:
            break
        coupled_sweep(lower, upper)
        if not is_ordered(lower.h, upper.h):
            violations += 1
        gap = int(np.max(upper.h - lower.h))
        gaps.append(gap)
        if gap == 0 and coupled_at is None:
            coupled_at = t
    return {"gaps": gaps, "coupled_at": coupled_at, "violations": violations,
            "sweeps": len(gaps) - 1}


class BatchMeans:
    """Batch-means estimator with a fixed batch size.

    Values are accumulated into consecutive batches; only complete batches
    enter the reported mean and standard error. ``merge`` concatenates the
    batch lists, so merging is associative and, for the reported numbers,
    independent of order.
    """

    def __init__(self, batch_size, name=""):
        if batch_size < 1:
            raise ValueError("batch size must be positive")
        self.batch_size = int(batch_size)
        self.name = name
        self.means = []
        self._acc = 0.0
        self._n = 0
        self.count = 0

    def add(self, value):
        self._acc += float(value)
        self._n += 1
        self.count += 1
        if self._n == self.batch_size:
            self.means.append(self._acc / self._n)
            self._acc = 0.0
            self._n = 0

    def extend(self, values):
        for v in values:
            self.add(v)

    def merge(self, other):
        if other.batch_size != self.batch_size:
            raise ValueError("batch sizes differ")
        out = BatchMeans(self.batch_size, self.name)
        out.means = self.means + other.means
        out.count = len(out.means) * self.batch_size
        return out

    @property
    def batches(self):
        return len(self.means)

    @property
    def mean(self):
        if not self.means:
            return math.nan
        return float(np.mean(self.means))

    @property
    def stderr(self):
        b = len(self.means)
        if b < 2:
            return math.inf
        return float(np.std(self.means, ddof=1) / math.sqrt(b))

    def ready(self, min_batches=20):
        return len(self.means) >= min_batches


# observables for run_chain

def make_observable(D, spec):
    """Build ``f(h) -> float`` from a string spec.

    ``h:x,y``  height at a face (rooted on a torus)
    ``h2:x,y``  squared height
    ``inc2:x,y:u,v``  (h(x,y) - h(u,v))^2
    ``inc:x,y:u,v``  h(x,y) - h(u,v)
    ``ge:x,y:k``  indicator h(x,y) >= k
    """
    kind, _, rest = spec.partition(':')
    parts = rest.split(':')

    def face(s):
        a, b = s.split(',')
        return D.face_index((int(a), int(b)))

    if kind in ('h', 'h2', 'ge'):
        i = face(parts[0])
        if D.kind == 'torus' and kind in ('h', 'h2', 'ge'):
            root = 0

            def val(h):
                return h[i] - (h[root] - h[root] % 2)
        else:
            def val(h):
                return h[i]
        if kind == 'h':
            return lambda h: float(val(h))
        if kind == 'h2':
            return lambda h: float(val(h)) ** 2
        k = int(parts[1])
        return lambda h: float(val(h) >= k)
    if kind in ('inc', 'inc2'):
        i, j = face(parts[0]), face(parts[1])
        if kind == 'inc':
            return lambda h: float(h[i] - h[j])
        return lambda h: float(h[i] - h[j]) ** 2
    raise ValueError(f"unknown observable {spec!r}")


def run_chain(D, c, observables, xi=None, h0=None, seed=0, burnin=1000,
              sweeps=10_000, thin=1, batches=40, order='checkerboard', chain_id=0):
    """Run one chain and report batch-means estimates.

    ``observables`` is a list of spec strings (see ``make_observable``) or
    ``(name, callable)`` pairs. ``xi`` is the boundary condition (dict); on a
    torus leave it ``None``. Returns a list of report rows.
    """
    if D.kind == 'torus':
        fixed = []
        start = H.checkerboard(D) if h0 is None else h0
    else:
        if xi is None:
            xi = H.zero_one(D)
        fixed = list(xi)
        start = H.min_extension(D, xi) if h0 is None else h0
    chain = ChainState(D, start, c, fixed=fixed, seed=seed, chain_id=chain_id, order=order)
    obs = []
    for o in observables:
        if isinstance(o, str):
            obs.append((o, make_observable(D, o)))
        else:
            obs.append(o)
    n_samples = sweeps // thin
    bsize = max(1, n_samples // batches)
    est = [BatchMeans(bsize, name) for name, _ in obs]
    chain.run(burnin)
    for t in range(n_samples):
        chain.run(thin)
        for e, (_, f) in zip(est, obs):
            e.add(f(chain.h))
    return [{"observable": e.name, "mean": e.mean, "stderr": e.stderr,
             "batches": e.batches, "sweeps": burnin + n_samples * thin,
             "seed": seed} for e in est]


# exact transition matrices (small domains)

def sweep_transition_matrix(D, states, c, fixed=None, order='checkerboard'):
    """Exact one-sweep transition matrix over ``states`` (list of tuples).

    Built by composing single-site heat-bath kernels in sweep order.
    Entries are Fractions for rational ``c``.
    """
    mask = updatable_faces(D, fixed)
    faces, _ = sweep_order(D, mask, order)
    index = {s: i for i, s in enumerate(states)}
    exact = H.is_exact(H.parse_c(c))
    n = len(states)
    P = [[0] * n for _ in range(n)] if exact else np.zeros((n, n))
    for i, s in enumerate(states):
        dist = {s: Fraction(1) if exact else 1.0}
        for f in faces:
            new = {}
            for st, p in dist.items():
                for v, q in heat_bath_conditional(D, st, int(f), c).items():
                    if q == 0:
                        continue
                    t = list(st)
                    t[f] = v
                    t = tuple(t)
                    new[t] = new.get(t, 0) + p * q
            dist = new
        for t, p in dist.items():
            P[i][index[t]] += p
    return P
