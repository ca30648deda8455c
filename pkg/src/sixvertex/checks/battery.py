"""Instance generation and the full verification battery."""

import itertools
import time

import numpy as np

from .. import heights as H
from ..exact import enumerate_heights
from ..lattice import plane_patch, rectangle
from . import CheckResult, format_c
from .markov import smp_check
from .monotonicity import (fkg_cbc_suite, holley_single_site_check, mean_lower_bound_check,
                           pushing_check, pushing_two_domains_check)
from .ising import sign_lemma_check, contraction_check

REPORT_FIELDS = ["check", "instance_id", "c", "status", "max_violation", "witness"]


def random_height(D, rng, n_cones=3, spread=2, nonneg=False):
    """Minimum of random distance cones: a random height function on D."""
    dist = D.distances
    h = None
    for _ in range(n_cones):
        j = int(rng.integers(D.n_faces))
        a = int(rng.integers(-spread, spread + 1))
        if (a - D.parity[j]) % 2:
            a += 1
        g = a + dist[j]
        h = g if h is None else np.minimum(h, g)
    if nonneg:
        h = np.maximum(h, D.parity.astype(np.int64))
    return h.astype(np.int64)


def ordered_pair(D, rng, nonneg=False, faces=None):
    """Boundary data xi <= xi' from the pointwise min/max of two heights."""
    h1, h2 = random_height(D, rng, nonneg=nonneg), random_height(D, rng, nonneg=nonneg)
    lo, hi = np.minimum(h1, h2), np.maximum(h1, h2)
    faces = D.boundary_faces if faces is None else faces
    return H.boundary_from_height(D, lo, faces), H.boundary_from_height(D, hi, faces)


def small_domains():
    """Plane patches given by small connected vertex sets."""
    shapes = {
        "v1": {(0, 0)},
        "v2": {(0, 0), (1, 0)},
        "v3-line": {(0, 0), (1, 0), (2, 0)},
        "v3-L": {(0, 0), (1, 0), (0, 1)},
        "v4-sq": {(0, 0), (1, 0), (0, 1), (1, 1)},
        "v4-T": {(0, 0), (1, 0), (2, 0), (1, 1)},
        "v5-P": {(0, 0), (1, 0), (0, 1), (1, 1), (0, 2)},
        "v6-rect": {(a, b) for a in range(3) for b in range(2)},
    }
    return {k: plane_patch(v) for k, v in shapes.items()}


def _free(D, xi):
    return D.n_faces - len(xi)


def five_interior_domain():
    """A patch with exactly five interior faces."""
    V = {(a, b) for a in range(3) for b in range(3)} | {(3, 0), (3, 1)}
    return plane_patch(V)


def smp_instances(rng, max_faces):
    outer = rectangle(5, 5)
    out = []
    inners = {"3x3": rectangle(3, 3, 1, 1), "3x4": rectangle(3, 4, 1, 1),
              "L": plane_patch({(2, 2), (3, 2), (2, 3), (3, 3), (4, 2), (4, 3), (2, 4)})}
    bcs = {"01": H.zero_one(outer), "rand": H.boundary_from_height(outer, random_height(outer, rng))}
    for (bn, xi), (iname, inner) in itertools.product(bcs.items(), inners.items()):
        out.append((f"5x5/{iname}/{bn}", outer, inner, xi))
    for name, Dp in (("4x4", rectangle(4, 4)), ("4x5", rectangle(4, 5))):
        xi = H.boundary_from_height(Dp, random_height(Dp, rng))
        if _free(Dp, xi) > max_faces:
            continue
        verts = sorted(Dp.vertices)
        for size in (1, 2, 4):
            for _ in range(2):
                start = verts[int(rng.integers(len(verts)))]
                chosen = {start}
                while len(chosen) < size:
                    v = sorted(chosen)[int(rng.integers(len(chosen)))]
                    dx, dy = [(1, 0), (-1, 0), (0, 1), (0, -1)][int(rng.integers(4))]
                    w = (v[0] + dx, v[1] + dy)
                    if w in Dp.vindex:
                        chosen.add(w)
                out.append((f"{name}/sub{sorted(chosen)}", Dp, plane_patch(chosen), xi))
    return out


def run_verify(max_faces=8, cs=(1, "3/2", 2, 3), seed=0, explore_cs=(), log=None):
    """Run every check family; returns a list of :class:`CheckResult`."""
    rng = np.random.default_rng(seed)
    cs = [H.parse_c(c) for c in cs]
    results = []

    def emit(r):
        results.append(r)
        if log:
            log(r)

    doms = small_domains()
    # spatial Markov property
    for iid, Dp, Di, xi in smp_instances(rng, max_faces):
        for c in cs:
            emit(smp_check(Dp, Di, xi, c, iid))

    # FKG / CBC for h and |h|, mean bounds
    fkg_cases = []
    D5 = five_interior_domain()
    fkg_cases.append(("int5/01+2", D5, H.zero_one(D5), {f: v + 2 for f, v in H.zero_one(D5).items()}))
    R44 = rectangle(4, 4)
    fkg_cases.append(("4x4/rand", R44) + ordered_pair(R44, rng, nonneg=True))
    for name, D in doms.items():
        xi, xi2 = ordered_pair(D, rng, nonneg=True, faces=D.boundary_faces[::2])
        if _free(D, xi) <= max_faces:
            fkg_cases.append((f"{name}/partial", D, xi, xi2))
    for iid, D, xi, xi2 in fkg_cases:
        free = [f for f in D.faces if f not in xi]
        for c in cs + [H.parse_c(e) for e in explore_cs]:
            explore = c in [H.parse_c(e) for e in explore_cs] and c not in cs
            sub = np.random.default_rng(seed)
            emit(fkg_cbc_suite(D, xi, xi2, c, iid, explore=explore, rng=sub))
            emit(fkg_cbc_suite(D, xi, xi2, c, iid, absolute=True, explore=explore, rng=sub))
            if explore:
                continue
            emit(mean_lower_bound_check(D, xi, c, iid))
            # conditioned |h| variant on one free face
            x = free[len(free) // 2]
            m1 = np.abs(np.array(list(enumerate_heights(D, xi)))[:, D.face_index(x)])
            m2 = np.abs(np.array(list(enumerate_heights(D, xi2)))[:, D.face_index(x)])
            for z in sorted(set(m1.tolist())):
                for z2 in sorted(set(m2.tolist())):
                    if z2 >= z:
                        emit(fkg_cbc_suite(D, xi, xi2, c, f"{iid}/|h({x})|={z},{z2}",
                                           absolute=True, conditioning=([x], [z], [z2]),
                                           rng=np.random.default_rng(seed)))

    # Holley single-site criterion
    hol = []
    R43 = rectangle(4, 3)
    hol.append(("4x3/01+2", R43, H.zero_one(R43), {f: v + 2 for f, v in H.zero_one(R43).items()}))
    for k in range(2):
        hol.append((f"4x3/rand{k}", R43) + ordered_pair(R43, rng))
    for name, D in doms.items():
        xi, xi2 = ordered_pair(D, rng, faces=D.boundary_faces[::2])
        if _free(D, xi) <= max_faces:
            hol.append((f"{name}/partial", D, xi, xi2))
    for iid, D, xi, xi2 in hol:
        for c in cs:
            emit(holley_single_site_check(D, xi, xi2, c, iid))

    # boundary pushing
    for c in cs:
        res2 = CheckResult("pushing", "battery", c)
        res1 = CheckResult("pushing_factor1", "battery", c)
        best = (0.0, "")
        for name, D in doms.items():
            for trial in range(6):
                m = 0
                h = random_height(D, rng, spread=1)
                h = np.maximum(h, D.parity.astype(np.int64) + 2 * m)
                nb = int(rng.integers(1, max(2, D.n_faces // 2)))
                B = [D.faces[i] for i in rng.choice(D.n_faces, nb, replace=False)]
                extra = [f for f in D.faces if f not in B and rng.random() < 0.5]
                xi = {f: int(h[D.face_index(f)]) for f in B}
                if _free(D, xi) > max_faces:
                    continue
                coll = []
                for _ in range(int(rng.integers(1, 4))):
                    f = D.faces[int(rng.integers(D.n_faces))]
                    C = [f]
                    j = D.nbr[D.face_index(f)][int(rng.integers(4))]
                    if j >= 0 and rng.random() < 0.5:
                        C.append(D.faces[j])
                    coll.append(C)
                for k in (1, 2, 3):
                    r = pushing_check(D, xi, B + extra, coll, k, m, c, f"{name}/{trial}")
                    target = res1 if r.extra["factor_one"] else res2
                    target.tested += r.tested
                    target.violations += r.violations
                    target.max_violation = max(target.max_violation, r.max_violation)
                    target.witness = target.witness or r.witness
                    if r.extra["ratio"] > best[0] and r.extra["ratio"] != float('inf'):
                        best = (r.extra["ratio"], f"{name}/{trial}/k={k}")
        res2.extra["max_ratio"] = best
        emit(res2)
        emit(res1)
        # two-domain form
        Dp = rectangle(4, 4)
        for Di_name, Di in (("v3-L", plane_patch({(1, 1), (2, 1), (1, 2)})),
                            ("v4-sq", plane_patch({(1, 1), (2, 1), (1, 2), (2, 2)}))):
            for k in (0, 1, 2):
                xi_p = H.boundary_from_height(Dp, np.maximum(random_height(Dp, rng, spread=1),
                                                             Dp.parity.astype(np.int64)))
                coll = [[f] for f in Di.faces[:3]]
                emit(pushing_two_domains_check(Di, Dp, xi_p, coll, k, 0, c, f"4x4/{Di_name}/k={k}"))

    # sign lemma and cluster contraction
    sign_doms = {"v2": doms["v2"], "v3-L": doms["v3-L"], "3x3": rectangle(3, 3)}
    for name, D in sign_doms.items():
        Hs = np.array(list(enumerate_heights(D, lo=0, hi=4 if D.n_faces <= 6 else 3)))
        le = np.argwhere(np.all(Hs[:, None, :] <= Hs[None, :, :], axis=2))
        if len(le) > 600:
            le = le[np.sort(rng.choice(len(le), 600, replace=False))]
        for c in cs:
            r = CheckResult("sign_lemma", f"{name}/all H>=0", c)
            for Hh in Hs:
                sign_lemma_check(D, Hh, c, r)
            emit(r)
            r = CheckResult("contraction", f"{name}/pairs", c)
            for i, j in le:
                contraction_check(D, Hs[i], Hs[j], c, r)
            emit(r)
    return results


def report_rows(results):
    return [{k: r.row()[k] for k in REPORT_FIELDS} for r in results]


def summarize(results):
    fails = [r for r in results if r.status == "fail"]
    return {"checks": len(results), "tests": sum(r.tested for r in results),
            "failures": len(fails)}
