"""Square-lattice geometry: plane patches, tori and cylinders.

Faces are indexed by integer coordinates ``(x, y)``; face ``(x, y)`` is the
unit square ``[x, x+1] x [y, y+1]``. Lattice vertices ``(vx, vy)`` are the
corners. Every domain is described by its set of *weighted* vertices (the
ones where the ice rule applies); faces, boundary faces and adjacency are
derived from that set.
"""

from collections import deque
from dataclasses import dataclass
from functools import cached_property
import json

import numpy as np

# direction order used by all neighbour tables
EAST, NORTH, WEST, SOUTH = 0, 1, 2, 3
STEPS = ((1, 0), (0, 1), (-1, 0), (0, -1))

# corners of face (x, y) as vertex offsets, and the diagonal face across each
CORNERS = ((1, 1), (0, 1), (0, 0), (1, 0))  # NE, NW, SW, SE
DIAGONALS = ((1, 1), (-1, 1), (-1, -1), (1, -1))


class DomainError(ValueError):
    """Invalid domain description or query."""


def parity(x, y):
    return (x + y) % 2


def edge_between(f, d):
    """Primal edge crossed when stepping from face ``f`` in direction ``d``.

    Vertical edges are keyed ``('v', vx, vy)`` (segment (vx,vy)-(vx,vy+1)),
    horizontal ones ``('h', vx, vy)`` (segment (vx,vy)-(vx+1,vy)).
    Coordinates are not wrapped here.
    """
    x, y = f
    if d == EAST:
        return ('v', x + 1, y)
    if d == WEST:
        return ('v', x, y)
    if d == NORTH:
        return ('h', x, y + 1)
    return ('h', x, y)


def edge_endpoints(e):
    kind, vx, vy = e
    if kind == 'v':
        return (vx, vy), (vx, vy + 1)
    return (vx, vy), (vx + 1, vy)


class Domain:
    """Immutable discrete domain.

    Use the constructors :func:`plane_patch`, :func:`torus` and
    :func:`cylinder` rather than calling this directly.

    Attributes
    ----------
    faces : list of (x, y), sorted
    index : dict face -> int
    vertices : list of weighted vertices
    boundary : bool array over faces
    nbr : (F, 4) int array, neighbour across E, N, W, S or -1
    wdiag : (F, 4) int array, diagonal face across corner NE, NW, SW, SE
        when that corner is a weighted vertex, else -1
    vert_faces : (V, 4) faces around each weighted vertex (SW, SE, NE, NW)
    """

    def __init__(self, kind, vertices, N=None, M=None):
        self.kind = kind
        self.N = N
        self.M = M
        verts = sorted({self.wrap_vertex(v) for v in vertices})
        if not verts:
            raise DomainError("empty vertex set")
        self.vertices = verts
        vset = set(verts)
        self._vset = vset

        faces = set()
        for vx, vy in verts:
            for dx, dy in ((-1, -1), (0, -1), (-1, 0), (0, 0)):
                faces.add(self.wrap_face((vx + dx, vy + dy)))
        self.faces = sorted(faces)
        self.index = {f: i for i, f in enumerate(self.faces)}
        F = len(self.faces)

        self.parity = np.array([parity(x, y) for x, y in self.faces], dtype=np.int64)
        self.boundary = np.zeros(F, dtype=bool)
        self.corner_vertex = -np.ones((F, 4), dtype=np.int64)
        vindex = {v: i for i, v in enumerate(verts)}
        self.vindex = vindex
        for i, (x, y) in enumerate(self.faces):
            for k, (dx, dy) in enumerate(CORNERS):
                v = self.wrap_vertex((x + dx, y + dy))
                if v in vset:
                    self.corner_vertex[i, k] = vindex[v]
                else:
                    self.boundary[i] = True

        self.nbr = -np.ones((F, 4), dtype=np.int64)
        self.edges = []       # canonical primal edge keys
        self.edge_faces = []  # (left/below face, right/above face) indices
        seen = {}
        for i, f in enumerate(self.faces):
            for d, (dx, dy) in enumerate(STEPS):
                e = self.wrap_edge(edge_between(f, d))
                a, b = edge_endpoints(e)
                if self.wrap_vertex(a) not in vset and self.wrap_vertex(b) not in vset:
                    continue
                g = self.wrap_face((f[0] + dx, f[1] + dy))
                if g not in self.index:
                    continue
                self.nbr[i, d] = self.index[g]
                if e not in seen:
                    seen[e] = len(self.edges)
                    self.edges.append(e)
                    if e[0] == 'v':
                        pair = (g, f) if d == WEST else (f, g)
                    else:
                        pair = (f, g) if d == NORTH else (g, f)
                    self.edge_faces.append((self.index[pair[0]], self.index[pair[1]]))
        self.edge_index = seen
        self.edge_faces = np.array(self.edge_faces, dtype=np.int64).reshape(-1, 2)

        self.wdiag = -np.ones((F, 4), dtype=np.int64)
        for i, (x, y) in enumerate(self.faces):
            for k, (dx, dy) in enumerate(DIAGONALS):
                if self.corner_vertex[i, k] >= 0:
                    self.wdiag[i, k] = self.index[self.wrap_face((x + dx, y + dy))]

        self.vert_faces = np.empty((len(verts), 4), dtype=np.int64)
        for j, (vx, vy) in enumerate(verts):
            around = ((vx - 1, vy - 1), (vx, vy - 1), (vx, vy), (vx - 1, vy))
            self.vert_faces[j] = [self.index[self.wrap_face(f)] for f in around]

        if not self._connected():
            raise DomainError("face graph is disconnected")

    # coordinate canonicalisation
    def wrap_face(self, f):
        x, y = f
        if self.kind == 'torus':
            return (x % self.N, y % self.N)
        if self.kind == 'cylinder':
            return (x % self.N, y)
        return (x, y)

    def wrap_vertex(self, v):
        return self.wrap_face(v)

    def wrap_edge(self, e):
        kind, vx, vy = e
        vx, vy = self.wrap_vertex((vx, vy))
        return (kind, vx, vy)

    def is_weighted(self, v):
        return self.wrap_vertex(v) in self._vset

    def _connected(self):
        F = len(self.faces)
        seen = np.zeros(F, dtype=bool)
        seen[0] = True
        queue = deque([0])
        while queue:
            i = queue.popleft()
            for j in self.nbr[i]:
                if j >= 0 and not seen[j]:
                    seen[j] = True
                    queue.append(j)
        return bool(seen.all())

    @property
    def n_faces(self):
        return len(self.faces)

    def __len__(self):
        return len(self.faces)

    def __contains__(self, f):
        return self.wrap_face(f) in self.index

    def __repr__(self):
        if self.kind == 'plane':
            return f"Domain(plane, {len(self.vertices)} vertices, {len(self.faces)} faces)"
        if self.kind == 'torus':
            return f"Domain(torus, N={self.N})"
        return f"Domain(cylinder, N={self.N}, M={self.M})"

    def face_index(self, f):
        f = self.wrap_face(f)
        try:
            return self.index[f]
        except KeyError:
            raise DomainError(f"face {f} is not in the domain") from None

    @cached_property
    def interior(self):
        return np.flatnonzero(~self.boundary)

    @cached_property
    def boundary_faces(self):
        return [self.faces[i] for i in np.flatnonzero(self.boundary)]

    @cached_property
    def cross_nbrs(self):
        """Corner-sharing faces at domain distance exactly 2 (index lists)."""
        out = []
        for i, (x, y) in enumerate(self.faces):
            first = {j for j in self.nbr[i] if j >= 0}
            second = set()
            for j in first:
                second.update(k for k in self.nbr[j] if k >= 0)
            res = []
            for dx, dy in DIAGONALS:
                g = self.wrap_face((x + dx, y + dy))
                j = self.index.get(g)
                if j is None or j == i or j in first or j in res:
                    continue
                if j in second:
                    res.append(j)
            out.append(res)
        return out

    @cached_property
    def distances(self):
        """All-pairs graph distance (dense int array, -1 if unreachable)."""
        F = len(self.faces)
        dist = -np.ones((F, F), dtype=np.int64)
        for s in range(F):
            dist[s] = self._bfs(s)
        return dist

    def _bfs(self, s):
        dist = -np.ones(len(self.faces), dtype=np.int64)
        dist[s] = 0
        queue = deque([s])
        while queue:
            i = queue.popleft()
            for j in self.nbr[i]:
                if j >= 0 and dist[j] < 0:
                    dist[j] = dist[i] + 1
                    queue.append(j)
        return dist

    @cached_property
    def sublattice_classes(self):
        """Face indices split by (x mod 2, y mod 2) in the order
        (0,0), (1,1), (0,1), (1,0). Faces in one class never interact
        in a single-site update."""
        if self.kind in ('torus', 'cylinder') and self.N % 2:
            raise DomainError("sublattice classes need even N")
        xy = np.array(self.faces, dtype=np.int64).reshape(-1, 2) % 2
        order = ((0, 0), (1, 1), (0, 1), (1, 0))
        return [np.flatnonzero((xy[:, 0] == a) & (xy[:, 1] == b)) for a, b in order]

    def to_json(self):
        if self.kind == 'torus':
            return {"kind": "torus", "N": self.N}
        if self.kind == 'cylinder':
            return {"kind": "cylinder", "N": self.N, "M": self.M}
        return {"kind": "plane", "vertices": [list(v) for v in self.vertices]}


def _check_connected_vertices(V):
    V = set(V)
    start = next(iter(V))
    seen = {start}
    queue = deque([start])
    while queue:
        vx, vy = queue.popleft()
        for dx, dy in STEPS:
            w = (vx + dx, vy + dy)
            if w in V and w not in seen:
                seen.add(w)
                queue.append(w)
    return len(seen) == len(V)


def plane_patch(vertices):
    """Planar domain whose weighted vertices are ``vertices``."""
    V = {(int(a), int(b)) for a, b in vertices}
    if not V:
        raise DomainError("empty vertex set")
    if not _check_connected_vertices(V):
        raise DomainError("vertex set is not connected")
    return Domain('plane', V)


def rectangle(width, height, x0=0, y0=0):
    """Plane patch with ``width x height`` faces (corner face at (x0, y0)).

    The weighted vertices are the ones strictly inside the rectangle, so the
    outer ring of faces is the boundary.
    """
    if width < 2 or height < 2:
        raise DomainError("need at least 2x2 faces")
    V = [(x0 + i, y0 + j) for i in range(1, width) for j in range(1, height)]
    return plane_patch(V)


def box(n):
    """The domain Lambda_n: faces (x, y) with -n <= x, y <= n-1."""
    if n < 1:
        raise DomainError("n must be positive")
    return plane_patch([(a, b) for a in range(-n + 1, n) for b in range(-n + 1, n)])


def torus(N):
    if N < 2 or N % 2:
        raise DomainError("torus size must be even and >= 2")
    return Domain('torus', [(a, b) for a in range(N) for b in range(N)], N=N)


def cylinder(N, M):
    """N columns around, M face rows; the bottom and top rows are boundary."""
    if N < 2 or N % 2:
        raise DomainError("cylinder circumference must be even and >= 2")
    if M < 2:
        raise DomainError("cylinder needs at least two face rows")
    return Domain('cylinder', [(a, b) for a in range(N) for b in range(1, M)], N=N, M=M)


def domain_from_json(obj):
    if isinstance(obj, str):
        obj = json.loads(obj)
    kind = obj.get("kind")
    if kind == "torus":
        return torus(int(obj["N"]))
    if kind == "cylinder":
        return cylinder(int(obj["N"]), int(obj["M"]))
    if kind == "plane":
        return plane_patch([tuple(v) for v in obj["vertices"]])
    raise DomainError(f"unknown domain kind {kind!r}")


def adjacency(D, f, kind='edge'):
    """Neighbouring faces of ``f``: ``'edge'`` or ``'cross'`` (x-adjacency)."""
    i = D.face_index(f)
    if kind == 'edge':
        return [D.faces[j] for j in dict.fromkeys(int(j) for j in D.nbr[i] if j >= 0)]
    if kind == 'cross':
        return [D.faces[j] for j in D.cross_nbrs[i]]
    raise DomainError(f"unknown adjacency kind {kind!r}")


def graph_distance(D, u, v):
    """Length of a shortest face path; ``None`` if unreachable."""
    i, j = D.face_index(u), D.face_index(v)
    d = D._bfs(i)[j]
    return None if d < 0 else int(d)


def in_box(f, n, center=(0, 0)):
    """Whether face ``f`` lies in Lambda_n(center): its centre is in the open
    square of half-side n around ``center``."""
    x, y = f[0] - center[0], f[1] - center[1]
    return -n <= x <= n - 1 and -n <= y <= n - 1


def box_faces(n, center=(0, 0)):
    cx, cy = center
    return {(cx + x, cy + y) for x in range(-n, n) for y in range(-n, n)}


def annulus(n, N, center=(0, 0)):
    """Faces of Lambda_N minus faces of Lambda_n."""
    if not 0 < n < N:
        raise DomainError("annulus needs 0 < n < N")
    return box_faces(N, center) - box_faces(n, center)


@dataclass(frozen=True)
class Quad:
    """A plane patch with four marked boundary faces and the arcs between.

    ``arcs`` holds the four arcs (ab), (bc), (cd), (da) as tuples of faces.
    """
    domain: Domain
    marks: tuple
    arcs: tuple

    def arc(self, name):
        return self.arcs[('ab', 'bc', 'cd', 'da').index(name)]


def _ring(width, height, x0, y0):
    """Outer ring of a rectangle of faces, counter-clockwise from the
    bottom-right corner."""
    x1, y1 = x0 + width - 1, y0 + height - 1
    ring = [(x1, y) for y in range(y0, y1 + 1)]
    ring += [(x, y1) for x in range(x1 - 1, x0 - 1, -1)]
    ring += [(x0, y) for y in range(y1 - 1, y0 - 1, -1)]
    ring += [(x, y0) for x in range(x0 + 1, x1)]
    return ring


def rectangle_quad(width, height, x0=0, y0=0):
    """Rectangle quad with marks at the four corner faces.

    a = bottom-right, b = top-right, c = top-left, d = bottom-left, so
    (ab) is the right side, (bc) the top, (cd) the left and (da) the bottom.
    """
    D = rectangle(width, height, x0, y0)
    x1, y1 = x0 + width - 1, y0 + height - 1
    a, b, c, d = (x1, y0), (x1, y1), (x0, y1), (x0, y0)
    ring = _ring(width, height, x0, y0)
    pos = {f: i for i, f in enumerate(ring)}

    def arc(s, t):
        i, j = pos[s], pos[t]
        if j < i:
            j += len(ring)
        return tuple(ring[k % len(ring)] for k in range(i, j + 1))

    return Quad(D, (a, b, c, d), (arc(a, b), arc(b, c), arc(c, d), arc(d, a)))


@dataclass(frozen=True)
class Symmetry:
    """Lattice symmetry acting on face centres: c -> A c + t.

    ``A`` is a signed permutation matrix and ``t`` a half-integer-compatible
    offset chosen so faces map to faces.
    """
    A: tuple
    t: tuple

    def __call__(self, f):
        cx, cy = f[0] + 0.5, f[1] + 0.5
        (a, b), (c, d) = self.A
        nx = a * cx + b * cy + self.t[0]
        ny = c * cx + d * cy + self.t[1]
        return (int(round(nx - 0.5)), int(round(ny - 0.5)))

    def preserves_parity(self, faces):
        return all(parity(*self(f)) == parity(*f) for f in faces)


def diagonal_reflection(shift=0):
    """(x, y) -> (y, x) on face centres, optionally shifted along the diagonal."""
    return Symmetry(((0, 1), (1, 0)), (shift, shift))
