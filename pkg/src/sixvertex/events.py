"""Level-set connectivity events: crossings, x-crossings and annulus circuits."""

from dataclasses import dataclass

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components

from . import kernels
from .lattice import annulus as annulus_faces


class PreconditionError(ValueError):
    pass


@dataclass(frozen=True)
class Pred:
    """Height predicate: ``ge``, ``le``, ``lt``, ``abs_ge`` or ``abs_le``."""
    kind: str
    k: int

    def __call__(self, h):
        h = np.asarray(h)
        k = self.k
        if self.kind == 'ge':
            return h >= k
        if self.kind == 'le':
            return h <= k
        if self.kind == 'lt':
            return h < k
        if self.kind == 'abs_ge':
            return np.abs(h) >= k
        if self.kind == 'abs_le':
            return np.abs(h) <= k
        raise ValueError(f"unknown predicate {self.kind!r}")

    @property
    def monotone(self):
        """'increasing', 'decreasing' or None (not monotone in h)."""
        return {'ge': 'increasing', 'le': 'decreasing', 'lt': 'decreasing'}.get(self.kind)

    def __str__(self):
        sym = {'ge': 'h>=', 'le': 'h<=', 'lt': 'h<', 'abs_ge': '|h|>=', 'abs_le': '|h|<='}
        return f"{sym[self.kind]}{self.k}"


def parse_pred(text):
    """Parse strings such as ``'h>=4'``, ``'|h|<=2'``, ``'h<0'``."""
    t = text.replace(' ', '')
    for prefix, kind in (('|h|>=', 'abs_ge'), ('|h|<=', 'abs_le'), ('h>=', 'ge'),
                         ('h<=', 'le'), ('h<', 'lt')):
        if t.startswith(prefix):
            return Pred(kind, int(t[len(prefix):]))
    raise ValueError(f"cannot parse predicate {text!r}")


def _cache(D):
    return D.__dict__.setdefault('_event_cache', {})


def adjacency_pairs(D, kind='edge'):
    """(i, j) index pairs, each unordered pair once."""
    key = ('pairs', kind)
    cache = _cache(D)
    if key not in cache:
        pairs = set()
        for i in range(D.n_faces):
            nb = D.nbr[i] if kind == 'edge' else D.cross_nbrs[i]
            for j in nb:
                if j >= 0 and j != i:
                    pairs.add((min(i, int(j)), max(i, int(j))))
        arr = np.array(sorted(pairs), dtype=np.int64).reshape(-1, 2)
        cache[key] = arr
    return cache[key]


def _indices(D, faces):
    return np.array([D.face_index(f) for f in faces], dtype=np.int64)


def components(D, mask, kind='edge'):
    """Connected-component labels of the masked faces (-1 elsewhere)."""
    pairs = adjacency_pairs(D, kind)
    keep = mask[pairs[:, 0]] & mask[pairs[:, 1]]
    p = pairs[keep]
    n = D.n_faces
    g = coo_matrix((np.ones(len(p)), (p[:, 0], p[:, 1])), shape=(n, n))
    _, labels = connected_components(g, directed=False)
    return np.where(mask, labels, -1)


def crossing(D, h, A, B, pred, adjacency='edge'):
    """Is there a path from A to B through faces satisfying ``pred``?"""
    mask = np.asarray(pred(np.asarray(h)), dtype=bool)
    ia, ib = _indices(D, A), _indices(D, B)
    ia, ib = ia[mask[ia]], ib[mask[ib]]
    if ia.size == 0 or ib.size == 0:
        return False
    labels = components(D, mask, adjacency)
    return bool(np.intersect1d(labels[ia], labels[ib]).size)


def _ray_weight(p, q, center, ray):
    """Signed crossing of the cut ray by the segment between face centres."""
    cx, cy = center
    (x1, y1), (x2, y2) = p, q
    ax, ay = x1 + 0.5 - cx, y1 + 0.5 - cy
    bx, by = x2 + 0.5 - cx, y2 + 0.5 - cy
    # rotate so the ray points east
    rot = {'east': lambda x, y: (x, y), 'north': lambda x, y: (y, -x),
           'west': lambda x, y: (-x, -y), 'south': lambda x, y: (-y, x)}[ray]
    ax, ay = rot(ax, ay)
    bx, by = rot(bx, by)
    if (ay < 0) == (by < 0):
        return 0
    t = ay / (ay - by)
    xm = ax + t * (bx - ax)
    if xm <= 0:
        return 0
    return 1 if by > ay else -1


def annulus_graph(D, n, N, adjacency='edge', center=(0, 0), ray='east'):
    """Edges inside the annulus A(n, N) with cut-ray weights (cached)."""
    key = ('annulus', n, N, adjacency, center, ray)
    cache = _cache(D)
    if key in cache:
        return cache[key]
    faces = annulus_faces(n, N, center)
    missing = [f for f in faces if f not in D.index]
    if missing:
        raise PreconditionError(f"annulus not contained in domain (e.g. {missing[0]})")
    inside = np.zeros(D.n_faces, dtype=bool)
    inside[_indices(D, faces)] = True
    pairs = adjacency_pairs(D, adjacency)
    pairs = pairs[inside[pairs[:, 0]] & inside[pairs[:, 1]]]
    w = np.array([_ray_weight(D.faces[i], D.faces[j], center, ray) for i, j in pairs],
                 dtype=np.int64)
    out = (inside, np.ascontiguousarray(pairs[:, 0]), np.ascontiguousarray(pairs[:, 1]), w)
    cache[key] = out
    return out


def circuit(D, h, n, N, pred, adjacency='edge', center=(0, 0), ray='east'):
    """Does A(n, N) contain a cycle of faces satisfying ``pred`` that winds
    around Lambda_n? Detected as a cycle with nonzero signed cut-ray count."""
    inside, eu, ev, w = annulus_graph(D, n, N, adjacency, center, ray)
    mask = inside & np.asarray(pred(np.asarray(h)), dtype=bool)
    return kernels.has_winding_cycle(mask, eu, ev, w, D.n_faces)


# quads

def quad_crossing(quad, h, first, second, pred, adjacency='edge'):
    """Crossing between two named arcs, e.g. ``('ab', 'cd')``."""
    return crossing(quad.domain, h, quad.arc(first), quad.arc(second), pred, adjacency)


def duality_check(quad, h, k):
    """Check the crossing/dual-crossing identity and the sandwich.

    Returns ``(identity_ok, sandwich_ok)``:
    identity: no (ab)-(cd) path of h>=k  iff  a (bc)-(da) x-path of h<k;
    sandwich: (bc)-(da) path of h<=k-2  =>  x-path of h<k  =>  path of h<=k.
    """
    primal = quad_crossing(quad, h, 'ab', 'cd', Pred('ge', k))
    dual = quad_crossing(quad, h, 'bc', 'da', Pred('lt', k), 'cross')
    low = quad_crossing(quad, h, 'bc', 'da', Pred('le', k - 2))
    high = quad_crossing(quad, h, 'bc', 'da', Pred('le', k))
    identity = (not primal) == dual
    sandwich = (not low or dual) and (not dual or high)
    return identity, sandwich


def check_symmetry(quad, sigma):
    """Raise unless ``sigma`` maps the quad onto itself with (ab)->(bc) and
    (cd)->(da), preserving face parity."""
    D = quad.domain
    image = {sigma(f) for f in D.faces}
    if image != set(D.faces):
        raise PreconditionError("symmetry does not preserve the domain")
    if not sigma.preserves_parity(D.faces):
        raise PreconditionError("symmetry does not preserve parity")
    if {sigma(f) for f in quad.arc('ab')} != set(quad.arc('bc')):
        raise PreconditionError("symmetry does not map (ab) to (bc)")
    if {sigma(f) for f in quad.arc('cd')} != set(quad.arc('da')):
        raise PreconditionError("symmetry does not map (cd) to (da)")
    return {f: sigma(f) for f in D.faces}


def symmetric_quad_bound_check(quad, sigma, xi, c):
    """Exact probability of (ab)-(cd) crossing by h>=0 under P^xi.

    Preconditions: ``sigma`` is a symmetry of the quad and
    xi(sigma^{-1} f) >= -xi(f) on the boundary. Returns ``(prob, holds)``
    where ``holds`` is ``prob >= 1/2``.
    """
    from .exact import ExactMeasure

    fmap = check_symmetry(quad, sigma)
    inv = {v: k for k, v in fmap.items()}
    for f, v in xi.items():
        g = inv[f]
        if g not in xi:
            raise PreconditionError("boundary condition support is not symmetric")
        if xi[g] < -v:
            raise PreconditionError("sigma(xi) >= -xi fails at face %s" % (f,))
    D = quad.domain
    mu = ExactMeasure.build(D, xi, c)
    ev = [crossing(D, h, quad.arc('ab'), quad.arc('cd'), Pred('ge', 0)) for h in mu.configs]
    p = mu.prob(np.array(ev))
    return p, p >= 0.5


def negative_cross_example():
    """A 3x3-face configuration with no top-bottom path of h>=0 and a
    left-right x-path of h<0 (faces indexed from (-1,-1))."""
    rows = {-1: (-2, -1, -2), 0: (-1, 0, -1), 1: (0, 1, 0)}
    return {(x, y): rows[y][x + 1] for y in rows for x in (-1, 0, 1)}
