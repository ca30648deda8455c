"""Oriented loop/path decomposition of cylinder configurations and the
loop-reversal map from flux-2L configurations to balanced ones."""

from dataclasses import dataclass, field
from fractions import Fraction
from collections import deque

import numpy as np

from . import heights as H
from .lattice import EAST, NORTH, WEST, SOUTH, edge_between
from .events import components
from .checks import CheckResult


class SectorError(ValueError):
    pass


@dataclass
class Path:
    """Edges in travel order with their arrows (+1 up/east, -1 down/west)."""
    edges: list
    arrows: list
    kind: str            # 'up', 'down', 'bottom', 'top' or 'loop'
    bottom_x: int = None

    def __len__(self):
        return len(self.edges)


@dataclass
class LoopDecomposition:
    paths: list
    loops: list
    edge_owner: np.ndarray = field(repr=False)

    def crossings(self):
        return [p for p in self.paths if p.kind in ('up', 'down')]


def _side_edges(D, v):
    vx, vy = v
    keys = {EAST: ('h', vx, vy), NORTH: ('v', vx, vy),
            WEST: ('h', vx - 1, vy), SOUTH: ('v', vx, vy - 1)}
    return {d: D.edge_index[D.wrap_edge(k)] for d, k in keys.items()}


def _incoming(side, a):
    return a == (1 if side in (WEST, SOUTH) else -1)


def _head(D, e, a):
    """(vertex, side it is entered from) at the head of edge e, or None."""
    kind, vx, vy = D.edges[e]
    if kind == 'v':
        v, side = ((vx, vy + 1), SOUTH) if a == 1 else ((vx, vy), NORTH)
    else:
        v, side = ((vx + 1, vy), WEST) if a == 1 else ((vx, vy), EAST)
    v = D.wrap_vertex(v)
    return (v, side) if v in D.vindex else None


def vertex_pairing(arrows_at):
    """Map in-side -> out-side at a vertex given ``{side: arrow}``.

    Each incoming edge leaves through an adjacent outgoing side; when both
    adjacent sides are outgoing (types 5 and 6) the left turn is taken.
    """
    ins = [d for d, a in arrows_at.items() if _incoming(d, a)]
    if len(ins) != 2:
        raise H.HeightError("ice rule violated")
    out = {}
    for x in ins:
        left, right = (x + 3) % 4, (x + 1) % 4
        out[x] = left if not _incoming(left, arrows_at[left]) else right
    if len(set(out.values())) != 2:
        raise H.HeightError("no non-crossing pairing")
    return out


def loop_decompose(D, arrows):
    """Split a cylinder configuration into paths (started from the rims)
    and loops, using the left-turning split at type 5 and 6 vertices."""
    arrows = np.asarray(arrows)
    sides = {v: _side_edges(D, v) for v in D.vertices}
    pairing = {v: vertex_pairing({d: int(arrows[e]) for d, e in s.items()})
               for v, s in sides.items()}
    owner = np.full(len(D.edges), -1, dtype=np.int64)

    def trace(e0, tag):
        edges, arr = [], []
        e = e0
        while True:
            if owner[e] >= 0:
                return edges, arr, True
            owner[e] = tag
            a = int(arrows[e])
            edges.append(e)
            arr.append(a)
            nxt = _head(D, e, a)
            if nxt is None:
                return edges, arr, False
            v, side = nxt
            e = sides[v][pairing[v][side]]

    paths, loops = [], []
    M = D.M
    for x in range(D.N):
        for row, start_arrow in ((0, 1), (M - 1, -1)):
            e = D.edge_index[('v', x, row)]
            if arrows[e] == start_arrow and owner[e] < 0:
                edges, arr, closed = trace(e, len(paths) + len(loops))
                assert not closed
                _, lx, ly = D.edges[edges[-1]]
                end_bottom = ly == 0 and arr[-1] == -1
                if row == 0:
                    kind = 'bottom' if end_bottom else 'up'
                    bx = x
                else:
                    kind = 'down' if end_bottom else 'top'
                    bx = lx if end_bottom else None
                paths.append(Path(edges, arr, kind, bx))
    for e in range(len(D.edges)):
        if owner[e] < 0:
            edges, arr, closed = trace(e, len(paths) + len(loops))
            assert closed
            loops.append(Path(edges, arr, 'loop'))
    return LoopDecomposition(paths, loops, owner)


def select_crossings(dec, L):
    """Upward crossings g_1..g_2L, left to right, with as many up as down
    crossings between consecutive ones.

    Crossings are ordered by their bottom edge; the start is the leftmost
    crossing from which every cyclic prefix sum of (+1 up, -1 down) is
    positive, and g_j is where the prefix sum first reaches j.
    """
    cr = sorted(dec.crossings(), key=lambda p: p.bottom_x)
    signs = [1 if p.kind == 'up' else -1 for p in cr]
    if sum(signs) != 2 * L:
        raise SectorError(f"net upward crossings {sum(signs)} != {2 * L}")
    n = len(cr)
    for s in range(n):
        acc, ok = 0, True
        for t in range(n):
            acc += signs[(s + t) % n]
            if acc < 1:
                ok = False
                break
        if ok:
            break
    else:
        raise AssertionError("no valid start")
    chosen, acc = [], 0
    for t in range(n):
        acc += signs[(s + t) % n]
        if acc == len(chosen) + 1:
            chosen.append(cr[(s + t) % n])
    return chosen[:2 * L]


def _right_face(D, e, a):
    kind = D.edges[e][0]
    left_or_below, right_or_above = D.edge_faces[e]
    if kind == 'v':
        return right_or_above if a == 1 else left_or_below
    return left_or_below if a == 1 else right_or_above


def region_between(D, first, second):
    """Face mask of the region right of ``first`` and cut off by ``second``."""
    blocked = set(first.edges) | set(second.edges)
    n = D.n_faces
    seen = np.zeros(n, dtype=bool)
    q = deque()
    for e, a in zip(first.edges, first.arrows):
        f = _right_face(D, e, a)
        if not seen[f]:
            seen[f] = True
            q.append(f)
    while q:
        i = q.popleft()
        f = D.faces[i]
        for d in range(4):
            j = D.nbr[i, d]
            if j < 0 or seen[j]:
                continue
            e = D.edge_index[D.wrap_edge(edge_between(f, d))]
            if e in blocked:
                continue
            seen[j] = True
            q.append(j)
    return seen


def reverse_between(D, arrows, first, second):
    """Reverse ``first`` and every edge strictly between the two paths.

    The operation is an involution given the two paths.
    """
    arrows = np.array(arrows, copy=True)
    C = region_between(D, first, second)
    on_paths = set(first.edges) | set(second.edges)
    ef = D.edge_faces
    inside = C[ef[:, 0]] & C[ef[:, 1]]
    for e in np.flatnonzero(inside):
        if e not in on_paths:
            arrows[e] = -arrows[e]
    for e in first.edges:
        arrows[e] = -arrows[e]
    return arrows


@dataclass
class MapResult:
    image: np.ndarray
    first: Path
    second: Path
    i_star: int


def map_T(D, arrows, L):
    """Loop-reversal map on a flux-2L cylinder configuration."""
    if D.kind != 'cylinder':
        raise ValueError("map_T needs a cylinder")
    if H.sector(D, arrows) != L:
        raise SectorError(f"configuration is in sector {H.sector(D, arrows)}, not {L}")
    dec = loop_decompose(D, arrows)
    gam = select_crossings(dec, L)
    if len(gam) < 2 * L:
        raise AssertionError("fewer than 2L upward crossings")
    i_star = min(range(L), key=lambda i: (len(gam[i]) + len(gam[L + i]), i))
    first, second = gam[i_star], gam[L + i_star]
    return MapResult(reverse_between(D, arrows, first, second), first, second, i_star + 1)


def level_crossings(D, h):
    """Heights t for which a vertical x-crossing of {h = t} exists."""
    h = np.asarray(h)
    bottom = np.array([D.faces[i][1] == 0 for i in range(D.n_faces)])
    top = np.array([D.faces[i][1] == D.M - 1 for i in range(D.n_faces)])
    out = set()
    for t in np.unique(h):
        lab = components(D, h == t, 'cross')
        if np.intersect1d(lab[bottom & (lab >= 0)], lab[top & (lab >= 0)]).size:
            out.add(int(t))
    return out


def in_B(D, arrows, L):
    """Two vertical x-crossings at levels t and t+L for some t."""
    h = H.arrows_to_height(D, arrows)
    levels = level_crossings(D, h)
    return any(t + L in levels for t in levels)


def _path_vertices(D, path):
    vs = set()
    for e in path.edges:
        kind, vx, vy = D.edges[e]
        ends = ((vx, vy), (vx, vy + 1)) if kind == 'v' else ((vx, vy), (vx + 1, vy))
        for v in ends:
            v = D.wrap_vertex(v)
            if v in D.vindex:
                vs.add(D.vindex[v])
    return vs


def c_mask(D, arrows):
    return np.array([H.vertex_type(D, arrows, v) >= 5 for v in D.vertices])


def map_T_suite(N, M, L, c, configs=None, instance_id=None):
    """Exhaustive check of the map on all flux-2L configurations."""
    from .exact import cylinder_arrow_configs
    from .lattice import cylinder

    c = H.parse_c(c)
    D = cylinder(N, M)
    alpha = Fraction(L, N)
    budget = Fraction(2 * M) / alpha
    iid = instance_id or f"O_{N},{M}/L={L}"
    res = {k: CheckResult(k, iid, c) for k in
           ("loop_cover", "map_balanced", "map_in_B", "map_weight", "map_local",
            "map_preimages", "map_reconstruct")}
    if configs is None:
        configs = [a for a in cylinder_arrow_configs(N, M) if H.sector(D, a) == L]
    images = {}
    worst_ratio = None
    for a in configs:
        a = np.asarray(a)
        dec = loop_decompose(D, a)
        cover = np.all(dec.edge_owner >= 0)
        flipped = -a
        res["loop_cover"].record(bool(cover) and H.ice_ok(D, flipped), 1, str(a.tolist()))
        r = map_T(D, a, L)
        b = r.image
        ok = H.ice_ok(D, b) and H.is_balanced(D, b)
        res["map_balanced"].record(ok, 1, str(a.tolist()))
        res["map_in_B"].record(ok and in_B(D, b, L), 1, str(a.tolist()))
        ca, cb = c_mask(D, a), c_mask(D, b)
        ratio = Fraction(c) ** int(cb.sum() - ca.sum()) if H.is_exact(c) \
            else float(c) ** int(cb.sum() - ca.sum())
        bound = (Fraction(1) / Fraction(c) ** budget) if H.is_exact(c) else float(c) ** -float(budget)
        res["map_weight"].record(ratio >= bound, float(bound - ratio), str(a.tolist()))
        worst_ratio = ratio if worst_ratio is None else min(worst_ratio, ratio)
        on = _path_vertices(D, r.first) | _path_vertices(D, r.second)
        changed = set(np.flatnonzero(ca != cb).tolist())
        res["map_local"].record(changed <= on and len(r.first) + len(r.second) <= 2 * M * N / L,
                                len(changed - on), str(a.tolist()))
        back = reverse_between(D, b, r.first, r.second)
        res["map_reconstruct"].record(np.array_equal(back, a), 1, str(a.tolist()))
        images[b.tobytes()] = images.get(b.tobytes(), 0) + 1
    cap = N * N * 2 ** budget
    mult = max(images.values()) if images else 0
    res["map_preimages"].record(mult <= cap, mult - cap, f"max multiplicity {mult}")
    res["map_preimages"].extra.update(max_multiplicity=mult, images=len(images),
                                      configs=len(configs))
    res["map_weight"].extra["worst_ratio"] = worst_ratio
    return list(res.values())
