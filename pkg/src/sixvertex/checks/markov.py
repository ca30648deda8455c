"""Spatial Markov property on a nested pair of domains."""

import numpy as np

from .. import heights as H
from ..exact import ExactMeasure
from . import CheckResult


def _close(a, b, exact):
    return a == b if exact else abs(a - b) <= 1e-12


def smp_check(D_outer, D_inner, xi, c, instance_id=""):
    """Compare P^xi on the outer domain, conditioned on the heights outside
    the interior of the inner domain, with the inner-domain measure given
    the induced boundary values. Also checks that, given the inner boundary,
    heights inside and outside are independent.
    """
    c = H.parse_c(c)
    res = CheckResult("smp", instance_id, c)
    if not set(D_inner.vertices) <= set(D_outer.vertices):
        raise ValueError("inner domain must be a subdomain")
    mu = ExactMeasure.build(D_outer, xi, c)
    exact = mu.exact
    probs = mu.probabilities()
    inner_int = [D_outer.face_index(f) for f in D_inner.faces
                 if not D_inner.boundary[D_inner.face_index(f)]]
    inner_bd = [D_outer.face_index(f) for f in D_inner.boundary_faces]
    outside = [i for i in range(D_outer.n_faces)
               if i not in set(inner_int) and i not in set(inner_bd)]
    rest = sorted(set(range(D_outer.n_faces)) - set(inner_int))

    # conditional law of the inner interior given everything else
    groups = {}
    for row, p in zip(mu.configs, probs):
        key = tuple(row[rest])
        d = groups.setdefault(key, {})
        k_in = tuple(row[inner_int])
        d[k_in] = d.get(k_in, 0) + p
    inner_measures = {}
    int_faces = [D_outer.faces[i] for i in inner_int]
    for key, d in groups.items():
        vals = dict(zip(rest, key))
        zeta = {D_outer.faces[i]: int(vals[i]) for i in inner_bd}
        bkey = tuple(sorted(zeta.items()))
        if bkey not in inner_measures:
            m = ExactMeasure.build(D_inner, zeta, c)
            cols = [D_inner.face_index(f) for f in int_faces]
            law = {}
            for r, q in zip(m.configs, m.probabilities()):
                k_in = tuple(r[cols])
                law[k_in] = law.get(k_in, 0) + q
            inner_measures[bkey] = law
        law = inner_measures[bkey]
        tot = sum(d.values())
        for k_in in set(d) | set(law):
            a = d.get(k_in, 0) / tot
            b = law.get(k_in, 0)
            res.record(_close(a, b, exact), abs(a - b), f"outside={key} inner={k_in}")

    # conditional independence given the inner boundary
    joint = {}
    for row, p in zip(mu.configs, probs):
        b = tuple(row[inner_bd])
        d = joint.setdefault(b, {})
        k = (tuple(row[inner_int]), tuple(row[outside]))
        d[k] = d.get(k, 0) + p
    for b, d in joint.items():
        tot = sum(d.values())
        pin, pout = {}, {}
        for (a, o), p in d.items():
            pin[a] = pin.get(a, 0) + p / tot
            pout[o] = pout.get(o, 0) + p / tot
        for a in pin:
            for o in pout:
                lhs = d.get((a, o), 0) / tot
                rhs = pin[a] * pout[o]
                res.record(_close(lhs, rhs, exact), abs(lhs - rhs),
                           f"boundary={b} inner={a} outer={o}")
    return res
