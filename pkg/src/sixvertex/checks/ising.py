"""Sign structure of |h|: the cluster graph, the Ising identity for the
weight of h given |h|, and compatibility of cluster graphs under H <= H'."""

from fractions import Fraction
import itertools

import numpy as np

from .. import heights as H
from ..events import components
from . import CheckResult


class ClusterGraph:
    """Multigraph on the clusters of {H > 0} (edge-connected).

    Edges are the weighted vertices whose four faces read 0, 1, 0, 1 around
    the vertex; the two faces with value 1 give the endpoints (a loop when
    both lie in the same cluster).
    """

    def __init__(self, D, Hh):
        Hh = np.asarray(Hh)
        if np.any(Hh < 0):
            raise ValueError("cluster graph needs a nonnegative height function")
        self.D = D
        self.H = Hh
        labels = components(D, Hh > 0, 'edge')
        uniq = sorted(set(labels[labels >= 0].tolist()))
        relabel = {u: i for i, u in enumerate(uniq)}
        self.cluster = np.array([relabel.get(int(l), -1) for l in labels])
        self.n = len(uniq)
        self.edges = []          # (u, v, vertex)
        self.edge_vertices = set()
        for vi, fs in enumerate(D.vert_faces):
            a, b, c, d = (int(Hh[f]) for f in fs)   # SW, SE, NE, NW
            if a == c == 0 and b == d == 1:
                u, v = self.cluster[fs[1]], self.cluster[fs[3]]
            elif b == d == 0 and a == c == 1:
                u, v = self.cluster[fs[0]], self.cluster[fs[2]]
            else:
                continue
            self.edges.append((int(u), int(v), D.vertices[vi]))
            self.edge_vertices.add(vi)
        cv = H.c_vertices(D, Hh)
        self.n_free = int(sum(1 for vi in np.flatnonzero(cv) if vi not in self.edge_vertices))

    def agreements(self, spins):
        return sum(1 for u, v, _ in self.edges if spins[u] == spins[v])

    def signed(self, spins):
        """The height function sigma * H for cluster spins in {+1, -1}."""
        s = np.ones(len(self.H), dtype=np.int64)
        m = self.cluster >= 0
        s[m] = np.asarray(spins)[self.cluster[m]]
        return s * self.H

    def ising_law(self, c):
        """Exact law ``{spins: prob}`` with weight c^(#agreeing edges)."""
        c = H.parse_c(c)
        w = {}
        for s in itertools.product((1, -1), repeat=self.n):
            w[s] = c ** self.agreements(s)
        Z = sum(w.values())
        return {s: v / Z for s, v in w.items()}


def sign_lemma_check(D, Hh, c, res=None, instance_id=""):
    """For every sign assignment: sigma*H is a height function with
    |sigma*H| = H, and c_count(sigma*H) = N(H) + #agreeing edges."""
    c = H.parse_c(c)
    res = res or CheckResult("sign_lemma", instance_id, c)
    G = ClusterGraph(D, Hh)
    for s in itertools.product((1, -1), repeat=G.n):
        h = G.signed(s)
        ok = H.is_height_function(D, h) and np.array_equal(np.abs(h), G.H)
        res.record(ok, 1, f"sign {s} of H={G.H.tolist()} is not a height function")
        lhs = H.c_count(D, h)
        rhs = G.n_free + G.agreements(s)
        res.record(lhs == rhs, abs(lhs - rhs), f"H={G.H.tolist()} sign={s}: {lhs} != {rhs}")
        wl = H.weight(D, h, c)
        wr = c ** rhs
        res.record(wl == wr if H.is_exact(c) else abs(wl - wr) <= 1e-9 * wr,
                   abs(wl - wr), f"weight mismatch for H={G.H.tolist()}")
    return res


def contraction_check(D, Hh, Hp, c, res=None, instance_id=""):
    """For 0 <= H <= H': the Ising law of G(H) conditioned on spins being
    constant on the fibres of the cluster map equals the Ising law of G(H')
    marginalised to clusters that have a preimage; the others are isolated.
    """
    c = H.parse_c(c)
    res = res or CheckResult("contraction", instance_id, c)
    Hh, Hp = np.asarray(Hh), np.asarray(Hp)
    if np.any(Hh > Hp):
        raise ValueError("need H <= H'")
    G, Gp = ClusterGraph(D, Hh), ClusterGraph(D, Hp)
    pi = {}
    for f in np.flatnonzero(Hh > 0):
        u, v = int(G.cluster[f]), int(Gp.cluster[f])
        if pi.setdefault(u, v) != v:
            res.record(False, 1, "cluster of H meets two clusters of H'")
            return res
    image = sorted(set(pi.values()))
    for u, v, _ in Gp.edges:
        isolated = u not in image or v not in image
        res.record(not isolated or u == v, 1, f"vertex {u} or {v} without preimage has an edge")
    # conditioned law on the image
    w = {}
    for t in itertools.product((1, -1), repeat=len(image)):
        tau = dict(zip(image, t))
        spins = [tau[pi[u]] for u in range(G.n)]
        w[t] = c ** G.agreements(spins)
    Z = sum(w.values())
    law = {t: x / Z for t, x in w.items()}
    full = Gp.ising_law(c)
    marg = {}
    for s, p in full.items():
        t = tuple(s[v] for v in image)
        marg[t] = marg.get(t, 0) + p
    exact = H.is_exact(c)
    for t in law:
        a, b = law[t], marg.get(t, 0)
        res.record(a == b if exact else abs(a - b) <= 1e-12, abs(a - b),
                   f"H={Hh.tolist()} H'={Hp.tolist()} spins={t}")
    return res
