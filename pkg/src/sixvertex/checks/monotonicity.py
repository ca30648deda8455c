"""FKG, comparison of boundary conditions, Holley's single-site criterion and
boundary pushing, checked by exhaustive enumeration."""

from fractions import Fraction
import itertools

import numpy as np

from .. import heights as H
from ..exact import ExactMeasure
from ..mcmc import heat_bath_conditional
from . import CheckResult


class NonMonotoneEvent(ValueError):
    def __init__(self, name, lo, hi):
        super().__init__(f"event {name} is not increasing")
        self.witness = (lo, hi)


# event families; an event is (name, fn) with fn: (n, F) array -> bool array

def _single(i, k, transform):
    return lambda X: transform(X[:, i]) >= k


def _union(f, g):
    return lambda X: f(X) | g(X)


def _inter(f, g):
    return lambda X: f(X) & g(X)


def _upset(gens, transform):
    gens = np.asarray(gens)

    def fn(X):
        T = transform(X)
        return np.any(np.all(T[:, None, :] >= gens[None, :, :], axis=2), axis=1)
    return fn


def increasing_family(D, pool, faces=None, transform=None, n_pairs=30,
                      n_upsets=10, rng=None):
    """Indicators {T(h(x)) >= k}, two-fold unions and intersections of them,
    and random up-sets generated by configurations from ``pool``.

    ``transform`` is applied to heights first (``np.abs`` for the |h|
    family); the events are increasing in the transformed heights.
    """
    transform = transform or (lambda a: a)
    rng = rng or np.random.default_rng(0)
    T = transform(pool)
    if faces is None:
        faces = [i for i in range(D.n_faces) if np.unique(T[:, i]).size > 1]
    singles = []
    for i in faces:
        vals = np.unique(T[:, i])
        for k in vals[1:]:
            singles.append((f"{D.faces[i]}>={int(k)}", _single(i, int(k), transform)))
    fam = list(singles)
    pairs = list(itertools.combinations(range(len(singles)), 2))
    if len(pairs) > n_pairs:
        pick = rng.choice(len(pairs), n_pairs, replace=False)
        pairs = [pairs[p] for p in sorted(pick)]
    for a, b in pairs:
        (na, fa), (nb, fb) = singles[a], singles[b]
        fam.append((f"({na})|({nb})", _union(fa, fb)))
        fam.append((f"({na})&({nb})", _inter(fa, fb)))
    for j in range(n_upsets):
        r = int(rng.integers(1, 4))
        gens = T[rng.choice(len(T), size=min(r, len(T)), replace=False)]
        fam.append((f"upset{j}", _upset(gens, transform)))
    return fam


def check_increasing(name, fn, pool, transform=None, chunk=256):
    """Raise ``NonMonotoneEvent`` unless fn is increasing on the poset of
    (transformed) configurations in ``pool``."""
    transform = transform or (lambda a: a)
    T = transform(pool)
    vals = fn(pool)
    for s in range(0, len(T), chunk):
        A = T[s:s + chunk]
        le = np.all(A[:, None, :] <= T[None, :, :], axis=2)
        bad = le & vals[s:s + chunk, None] & ~vals[None, :]
        if bad.any():
            a, b = np.argwhere(bad)[0]
            raise NonMonotoneEvent(name, pool[s + a].tolist(), pool[b].tolist())
    return True


def _gap(lhs, rhs):
    """Amount by which lhs >= rhs fails (0 if it holds)."""
    d = rhs - lhs
    return float(d) if d > 0 else 0.0


def _holds(lhs, rhs, exact):
    return lhs >= rhs if exact else lhs >= rhs - 1e-12


def fkg_cbc_suite(D, xi, xi_prime, c, instance_id="", absolute=False,
                  conditioning=None, explore=False, rng=None):
    """FKG for P^xi and comparison P^xi <= P^xi' on increasing events.

    With ``absolute=True`` events are increasing functions of |h| and the
    boundary conditions must satisfy 0 <= xi <= xi'. ``conditioning`` is an
    optional ``(faces, zeta, zeta_prime)`` triple: the comparison is then
    made between the laws conditioned on |h| = zeta (resp. zeta') on those
    faces, and FKG is checked for the conditioned law too.
    """
    c = H.parse_c(c)
    name = "fkg_cbc_abs" if absolute else "fkg_cbc"
    res = CheckResult(name, instance_id, c, explore=explore)
    mu = ExactMeasure.build(D, xi, c)
    mu2 = ExactMeasure.build(D, xi_prime, c)
    exact = mu.exact
    transform = np.abs if absolute else None
    if absolute:
        if any(v < 0 for v in xi.values()) or any(xi_prime[f] < xi[f] for f in xi):
            raise ValueError("|h| comparison needs 0 <= xi <= xi'")
    elif any(xi_prime[f] < xi[f] for f in xi):
        raise ValueError("need xi <= xi'")
    cond1 = np.ones(len(mu), dtype=bool)
    cond2 = np.ones(len(mu2), dtype=bool)
    if conditioning is not None:
        faces, zeta, zeta2 = conditioning
        idx = [D.face_index(f) for f in faces]
        cond1 = np.all(np.abs(mu.configs[:, idx]) == np.asarray(zeta), axis=1)
        cond2 = np.all(np.abs(mu2.configs[:, idx]) == np.asarray(zeta2), axis=1)
        if not cond1.any() or not cond2.any():
            raise ValueError("conditioning values are not achievable")
    pool = np.unique(np.vstack([mu.configs, mu2.configs]), axis=0)
    fam = increasing_family(D, pool, transform=transform, rng=rng)
    for nm, fn in fam:
        check_increasing(nm, fn, pool, transform)

    p1 = mu.prob(cond1)
    p2 = mu2.prob(cond2)
    vals1 = [fn(mu.configs) for _, fn in fam]
    vals2 = [fn(mu2.configs) for _, fn in fam]
    e1 = [mu.prob(v & cond1) / p1 for v in vals1]
    e2 = [mu2.prob(v & cond2) / p2 for v in vals2]
    for (nm, _), a, b in zip(fam, e1, e2):
        res.record(_holds(b, a, exact), _gap(b, a), f"CBC {nm}: {a} > {b}")
    for i, j in itertools.combinations_with_replacement(range(len(fam)), 2):
        joint = mu.prob(vals1[i] & vals1[j] & cond1) / p1
        prod = e1[i] * e1[j]
        res.record(_holds(joint, prod, exact), _gap(joint, prod),
                   f"FKG {fam[i][0]} x {fam[j][0]}")
    return res


def mean_lower_bound_check(D, xi, c, instance_id=""):
    """E^xi[h(x)] >= min(xi) and <= max(xi) at every face."""
    res = CheckResult("mean_bounds", instance_id, H.parse_c(c))
    mu = ExactMeasure.build(D, xi, c)
    m, M = min(xi.values()), max(xi.values())
    tol = 0 if mu.exact else 1e-12
    for i, f in enumerate(D.faces):
        e = mu.expectation(mu.configs[:, i])
        res.record(m - tol <= e <= M + tol, max(m - e, e - M, 0), f"face {f}: {e}")
    return res


def _conditionals(D, mu, x):
    """Group configurations by their values off face ``x``.

    Returns ``{rest_tuple: {value: weight}}`` with exact weights.
    """
    i = D.face_index(x)
    out = {}
    probs = mu.probabilities()
    for row, p in zip(mu.configs.tolist(), probs):
        v = row[i]
        row[i] = 0
        key = tuple(row)
        d = out.setdefault(key, {})
        d[v] = d.get(v, 0) + p
    return out


def holley_single_site_check(D, xi, xi_prime, c, instance_id="", explore=False):
    """For every free face x and every pair of achievable surroundings
    chi <= chi' off x: P^xi[h(x) >= k | chi] <= P^xi'[h(x) >= k | chi'].

    The conditionals come from enumeration and are also compared with the
    closed-form heat-bath law.
    """
    c = H.parse_c(c)
    res = CheckResult("holley", instance_id, c, explore=explore)
    mu = ExactMeasure.build(D, xi, c)
    mu2 = ExactMeasure.build(D, xi_prime, c)
    exact = mu.exact
    fixed = set(xi)
    for x in D.faces:
        if x in fixed:
            continue
        i = D.face_index(x)
        laws = []
        for m in (mu, mu2):
            groups = _conditionals(D, m, x)
            law = {}
            for key, d in groups.items():
                tot = sum(d.values())
                cond = {v: w / tot for v, w in d.items()}
                h = np.array(key)
                h[i] = next(iter(d))
                closed = heat_bath_conditional(D, h, i, c)
                same = all(abs(cond.get(v, 0) - closed.get(v, 0)) <= (0 if exact else 1e-12)
                           for v in set(cond) | set(closed))
                res.record(same, 1, f"conditional at {x} differs from closed form")
                law[key] = cond
            laws.append(law)
        law1, law2 = laws
        keys2 = np.array(list(law2.keys()))
        for key, cond in law1.items():
            k1 = np.array(key)
            k1[i] = np.iinfo(np.int64).min
            dominating = np.all(keys2 >= k1, axis=1)
            for j in np.flatnonzero(dominating):
                cond2 = law2[tuple(keys2[j])]
                values = sorted(set(cond) | set(cond2))
                for k in values:
                    a = sum(p for v, p in cond.items() if v >= k)
                    b = sum(p for v, p in cond2.items() if v >= k)
                    res.record(_holds(b, a, exact), _gap(b, a),
                               f"face {x}, k={k}: {a} > {b}")
    return res


def _event_any(configs, D, collection, k):
    """Indicator of: some C in the collection has h >= k on all of C."""
    out = np.zeros(len(configs), dtype=bool)
    for C in collection:
        idx = [D.face_index(f) for f in C]
        out |= np.all(configs[:, idx] >= k, axis=1)
    return out


def pushing_check(D, xi, B_prime, collection, k, m, c, instance_id=""):
    """Boundary pushing with the floored minimal extension.

    With zeta the minimal extension of xi that is >= m-1:
    P^{zeta|B'}[E] <= 2 P^xi[E] for E = {exists C: h >= k on C}, and without
    the factor 2 when every C meets the support of xi.
    """
    c = H.parse_c(c)
    res = CheckResult("pushing", instance_id, c)
    if min(xi.values()) < m or k <= m:
        raise ValueError("need xi >= m and k > m")
    zeta = H.min_extension(D, xi, floor=m - 1)
    xi_b = {f: int(zeta[D.face_index(f)]) for f in B_prime}
    mu = ExactMeasure.build(D, xi, c)
    mu_b = ExactMeasure.build(D, xi_b, c)
    lhs = mu_b.prob(_event_any(mu_b.configs, D, collection, k))
    rhs = mu.prob(_event_any(mu.configs, D, collection, k))
    ok = _holds(2 * rhs, lhs, mu.exact)
    res.record(ok, _gap(2 * rhs, lhs), f"factor 2: {lhs} > 2*{rhs}")
    meets = all(any(f in xi for f in C) for C in collection)
    if meets:
        res.record(_holds(rhs, lhs, mu.exact), _gap(rhs, lhs), f"factor 1: {lhs} > {rhs}")
    res.extra["ratio"] = float(lhs / rhs) if rhs else (0.0 if lhs == 0 else float('inf'))
    res.extra["factor_one"] = meets
    return res


def pushing_two_domains_check(D, D_prime, xi_prime, collection, k, m, c, instance_id=""):
    """Two-domain form: xi on the boundary of D is the minimal admissible
    data >= m agreeing with xi' where the boundaries meet; then
    P^xi_D[exists C: h >= k+2 on C] <= 2 P^xi'_D'[exists C: h >= k on C],
    without the factor 2 when every C meets the boundary of D'.
    """
    c = H.parse_c(c)
    res = CheckResult("pushing_domains", instance_id, c)
    shared = {f: v for f, v in xi_prime.items()
              if f in D.index and D.boundary[D.face_index(f)]}
    base = H.min_extension(D, shared if shared else None, floor=m)
    xi = {f: int(base[D.face_index(f)]) for f in D.boundary_faces}
    if any(xi[f] != v for f, v in shared.items()):
        res.extra["skipped"] = True
        return res
    mu = ExactMeasure.build(D, xi, c)
    mu2 = ExactMeasure.build(D_prime, xi_prime, c)
    lhs = mu.prob(_event_any(mu.configs, D, collection, k + 2))
    rhs = mu2.prob(_event_any(mu2.configs, D_prime, collection, k))
    res.record(_holds(2 * rhs, lhs, mu.exact), _gap(2 * rhs, lhs), f"factor 2: {lhs} > 2*{rhs}")
    if all(any(f in xi_prime for f in C) for C in collection):
        res.record(_holds(rhs, lhs, mu.exact), _gap(rhs, lhs), f"factor 1: {lhs} > {rhs}")
    return res
