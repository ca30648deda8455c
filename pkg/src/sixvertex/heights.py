"""Height functions, arrow configurations and six-vertex weights.

A height function is an integer array aligned with ``D.faces``. Even faces
carry even heights. Arrows live on the primal edges of the domain and are
stored as an int8 array aligned with ``D.edges``: ``+1`` means up for a
vertical edge and east for a horizontal edge. The face on the left of an
arrow is the higher one.
"""

from collections import deque
from fractions import Fraction
import heapq
import math

import numpy as np


class HeightError(ValueError):
    """Raised for invalid height functions or arrow configurations."""


class InadmissibleBoundary(HeightError):
    """Boundary data that no height function extends."""

    def __init__(self, msg, witness=None):
        super().__init__(msg)
        self.witness = witness


class NoHeightFunction(HeightError):
    """Arrow configuration whose gradient does not integrate."""


def parse_c(c):
    """Accept int, float, Fraction or strings like ``'3/2'``."""
    if isinstance(c, str):
        c = c.strip()
        if c in ('sqrt2', 'sqrt(2)'):
            return math.sqrt(2)
        try:
            return Fraction(c)
        except ValueError:
            return float(c)
    if isinstance(c, (int, np.integer)):
        return Fraction(int(c))
    return c


def delta(c):
    """Anisotropy parameter (2 - c^2) / 2 for a = b = 1."""
    return (2 - c * c) / 2


def is_exact(c):
    return isinstance(c, (int, Fraction))


# heights

def validate(D, h, fixed=None):
    """Raise ``HeightError`` unless ``h`` is a height function on ``D``."""
    h = np.asarray(h)
    if h.shape != (D.n_faces,):
        raise HeightError(f"expected {D.n_faces} heights, got shape {h.shape}")
    bad = np.flatnonzero((h - D.parity) % 2)
    if bad.size:
        raise HeightError(f"parity violated at face {D.faces[bad[0]]}")
    a, b = D.edge_faces[:, 0], D.edge_faces[:, 1]
    diff = np.abs(h[a] - h[b])
    bad = np.flatnonzero(diff != 1)
    if bad.size:
        e = D.edges[bad[0]]
        raise HeightError(f"increment {diff[bad[0]]} across edge {e}")
    if fixed is not None:
        for f, v in fixed.items():
            if h[D.face_index(f)] != v:
                raise HeightError(f"boundary value at {f} changed")
    return True


def is_height_function(D, h):
    try:
        return validate(D, h)
    except HeightError:
        return False


def from_dict(D, values):
    h = np.empty(D.n_faces, dtype=np.int64)
    for f, v in values.items():
        h[D.face_index(f)] = v
    return h


def to_dict(D, h):
    return {f: int(v) for f, v in zip(D.faces, h)}


def checkerboard(D, low=0):
    """The flat height function taking values low, low+1 (low even)."""
    if low % 2:
        raise HeightError("checkerboard base must be even")
    return low + D.parity.copy()


def linear_height(D, a=1, b=1):
    """h(x, y) = a*x + b*y with a, b odd (plane patches only)."""
    xy = np.array(D.faces, dtype=np.int64)
    return a * xy[:, 0] + b * xy[:, 1]


# arrows

def height_to_arrows(D, h):
    """Orient every edge so that the higher face is on its left."""
    h = np.asarray(h)
    a, b = D.edge_faces[:, 0], D.edge_faces[:, 1]
    vertical = np.array([e[0] == 'v' for e in D.edges], dtype=bool)
    up = np.where(vertical, h[a] > h[b], h[b] > h[a])
    return np.where(up, 1, -1).astype(np.int8)


def arrow_increment(D, e_idx, arrow):
    """h(second face) - h(first face) across edge ``e_idx``."""
    vertical = D.edges[e_idx][0] == 'v'
    # vertical: first=left, second=right; up means left higher
    # horizontal: first=below, second=above; east means above higher
    return -arrow if vertical else arrow


def arrows_to_height(D, arrows, root=None, root_value=None):
    """Integrate an arrow configuration into a height function.

    Raises ``NoHeightFunction`` if the increments are inconsistent, which
    happens for unbalanced configurations on a torus or cylinder.
    """
    arrows = np.asarray(arrows)
    if root is None:
        root = D.faces[0]
    r = D.face_index(root)
    if root_value is None:
        root_value = int(D.parity[r])
    if (root_value - D.parity[r]) % 2:
        raise HeightError("root value has the wrong parity")
    F = D.n_faces
    incident = [[] for _ in range(F)]
    for k, (a, b) in enumerate(D.edge_faces):
        inc = -int(arrows[k]) if D.edges[k][0] == 'v' else int(arrows[k])
        incident[a].append((b, inc))
        incident[b].append((a, -inc))
    h = np.zeros(F, dtype=np.int64)
    seen = np.zeros(F, dtype=bool)
    h[r] = root_value
    seen[r] = True
    queue = deque([r])
    while queue:
        i = queue.popleft()
        for j, inc in incident[i]:
            if not seen[j]:
                seen[j] = True
                h[j] = h[i] + inc
                queue.append(j)
            elif h[j] != h[i] + inc:
                raise NoHeightFunction(
                    f"inconsistent increments around face {D.faces[j]}")
    return h


def vertex_arrows(D, arrows, v):
    """Arrows (W, E, S, N) at weighted vertex ``v``."""
    vx, vy = v
    keys = (('h', vx - 1, vy), ('h', vx, vy), ('v', vx, vy - 1), ('v', vx, vy))
    return tuple(int(arrows[D.edge_index[D.wrap_edge(k)]]) for k in keys)


def out_degree(w, e, s, n):
    return (e == 1) + (w == -1) + (n == 1) + (s == -1)


_TYPE_TABLE = {
    (1, 1, 1, 1): 1,
    (-1, -1, -1, -1): 2,
    (1, 1, -1, -1): 3,
    (-1, -1, 1, 1): 4,
    (1, -1, -1, 1): 5,
    (-1, 1, 1, -1): 6,
}


def classify(w, e, s, n):
    """Vertex type 1..6 from the arrows (W, E, S, N)."""
    if out_degree(w, e, s, n) != 2:
        raise HeightError("ice rule violated")
    return _TYPE_TABLE[(w, e, s, n)]


def vertex_type(D, arrows, v):
    return classify(*vertex_arrows(D, arrows, D.wrap_vertex(v)))


def ice_ok(D, arrows):
    return all(out_degree(*vertex_arrows(D, arrows, v)) == 2 for v in D.vertices)


def vertex_types(D, arrows):
    return np.array([vertex_type(D, arrows, v) for v in D.vertices], dtype=np.int64)


def flip_arrows(arrows):
    return -np.asarray(arrows)


# weights

def c_vertices(D, h):
    """Boolean mask over weighted vertices: both diagonal pairs equal."""
    h = np.asarray(h)
    vf = D.vert_faces
    return (h[vf[:, 0]] == h[vf[:, 2]]) & (h[vf[:, 1]] == h[vf[:, 3]])


def c_count(D, h):
    return int(np.count_nonzero(c_vertices(D, h)))


def weight(D, h, c):
    """c ** (number of type 5-6 vertices); exact for rational c."""
    k = c_count(D, h)
    if is_exact(c):
        return Fraction(c) ** k
    return float(c) ** k


def log_weight(D, h, c):
    return c_count(D, h) * math.log(float(c))


def sector(D, arrows, row=0):
    """Half the net vertical flux through a face row of a cylinder/torus."""
    keys = [D.edge_index[('v', vx, row)] for vx in range(D.N)]
    flux = int(np.sum(np.asarray(arrows)[keys]))
    if flux % 2:
        raise HeightError("odd flux")
    return flux // 2


def n_up(D, arrows, row=0):
    keys = [D.edge_index[('v', vx, row)] for vx in range(D.N)]
    return int(np.count_nonzero(np.asarray(arrows)[keys] == 1))


def is_balanced(D, arrows):
    """Zero net flux through every face row and every face column."""
    arrows = np.asarray(arrows)
    rows = D.N if D.kind == 'torus' else D.M
    for y in range(rows):
        if sum(arrows[D.edge_index[('v', vx, y)]] for vx in range(D.N)) != 0:
            return False
    if D.kind == 'torus':
        for x in range(D.N):
            if sum(arrows[D.edge_index[('h', x, vy)]] for vy in range(D.N)) != 0:
                return False
    return True


# extensions

def _as_boundary(D, xi):
    """Normalise boundary data to (indices, values) arrays."""
    if xi is None:
        return np.empty(0, dtype=np.int64), np.empty(0, dtype=np.int64)
    if isinstance(xi, dict):
        idx = np.array([D.face_index(f) for f in xi], dtype=np.int64)
        val = np.array(list(xi.values()), dtype=np.int64)
        return idx, val
    idx, val = xi
    return np.asarray(idx, dtype=np.int64), np.asarray(val, dtype=np.int64)


def boundary_from_height(D, h, faces=None):
    """Boundary condition ``{face: h(face)}``; defaults to the boundary faces."""
    if faces is None:
        idx = np.flatnonzero(D.boundary)
    else:
        idx = [D.face_index(f) for f in faces]
    return {D.faces[i]: int(h[i]) for i in idx}


def _envelope(D, idx, val, sign):
    """sign=+1: max_y (xi(y) - d(x,y)); sign=-1: min_y (xi(y) + d(x,y))."""
    F = D.n_faces
    best = np.full(F, np.iinfo(np.int64).max, dtype=np.int64)
    heap = []
    for i, v in zip(idx, val):
        key = -int(v) if sign > 0 else int(v)
        if key < best[i]:
            best[i] = key
            heap.append((key, int(i)))
    heapq.heapify(heap)
    while heap:
        d, i = heapq.heappop(heap)
        if d > best[i]:
            continue
        for j in D.nbr[i]:
            if j >= 0 and d + 1 < best[j]:
                best[j] = d + 1
                heapq.heappush(heap, (d + 1, int(j)))
    if np.any(best == np.iinfo(np.int64).max):
        raise HeightError("boundary does not reach every face")
    return -best if sign > 0 else best


def _check_extension(D, h, idx, val, which):
    bad = np.flatnonzero((val - D.parity[idx]) % 2)
    if bad.size:
        f = D.faces[idx[bad[0]]]
        raise InadmissibleBoundary(f"parity violated at {f}", witness=f)
    mismatch = np.flatnonzero(h[idx] != val)
    if mismatch.size:
        f = D.faces[idx[mismatch[0]]]
        raise InadmissibleBoundary(
            f"{which} extension does not match boundary at {f}", witness=f)


def min_extension(D, xi, floor=None):
    """Pointwise smallest height function agreeing with ``xi``.

    With ``floor=m`` the result is also bounded below by the flat function
    taking values m and m+1.
    """
    idx, val = _as_boundary(D, xi)
    if idx.size == 0:
        if floor is None:
            raise HeightError("minimal extension of empty data needs a floor")
        return _flat(D, floor)
    h = _envelope(D, idx, val, +1)
    _check_extension(D, h, idx, val, "minimal")
    if floor is not None:
        h = np.maximum(h, _flat(D, floor))
        if np.any(h[idx] != val):
            raise InadmissibleBoundary("boundary data below the floor")
    return h


def max_extension(D, xi, ceiling=None):
    idx, val = _as_boundary(D, xi)
    if idx.size == 0:
        if ceiling is None:
            raise HeightError("maximal extension of empty data needs a ceiling")
        return _flat(D, ceiling - 1)
    h = _envelope(D, idx, val, -1)
    _check_extension(D, h, idx, val, "maximal")
    if ceiling is not None:
        h = np.minimum(h, _flat(D, ceiling - 1))
        if np.any(h[idx] != val):
            raise InadmissibleBoundary("boundary data above the ceiling")
    return h


def _flat(D, m):
    """Height function with values m and m+1 (m may have either parity)."""
    return np.where((D.parity - m) % 2 == 0, m, m + 1).astype(np.int64)


def is_admissible(D, xi):
    try:
        min_extension(D, xi)
    except InadmissibleBoundary:
        return False
    return True


def zero_one(D, faces=None):
    """The 0/1 boundary condition: even faces 0, odd faces 1."""
    if faces is None:
        faces = D.boundary_faces
    return {f: int(D.parity[D.face_index(f)]) for f in faces}


def edge_list(D, arrows):
    """Readable ``[(edge_key, +1/-1), ...]``."""
    return [(e, int(a)) for e, a in zip(D.edges, arrows)]


# CSV dumps

def height_rows(D, h):
    return [{"x": f[0], "y": f[1], "h": int(v)} for f, v in zip(D.faces, h)]


def heights_from_rows(D, rows):
    h = np.zeros(D.n_faces, dtype=np.int64)
    seen = np.zeros(D.n_faces, dtype=bool)
    for r in rows:
        i = D.face_index((int(r["x"]), int(r["y"])))
        h[i] = int(r["h"])
        seen[i] = True
    if not seen.all():
        raise HeightError("height dump does not cover the domain")
    return h


def arrow_rows(D, arrows):
    """Edge (x, y, dir) from vertex (x, y) going north ('v') or east ('h');
    orient is +1 (north/east) or -1."""
    return [{"x": e[1], "y": e[2], "dir": e[0], "orient": int(a)}
            for e, a in zip(D.edges, arrows)]


def arrows_from_rows(D, rows):
    a = np.zeros(len(D.edges), dtype=np.int8)
    for r in rows:
        o = int(r["orient"])
        if o not in (1, -1):
            raise HeightError(f"bad orientation {o}")
        a[D.edge_index[D.wrap_edge((r["dir"], int(r["x"]), int(r["y"])))]] = o
    if np.any(a == 0):
        raise HeightError("arrow dump does not cover the domain")
    return a
