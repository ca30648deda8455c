from fractions import Fraction as F

import numpy as np
import pytest

from sixvertex import heights as H
from sixvertex.checks import CheckResult, format_c
from sixvertex.checks.battery import (five_interior_domain, random_height, run_verify,
                                      small_domains, summarize)
from sixvertex.checks.ising import ClusterGraph, contraction_check, sign_lemma_check
from sixvertex.checks.markov import smp_check
from sixvertex.checks.monotonicity import (NonMonotoneEvent, check_increasing, fkg_cbc_suite,
                                           holley_single_site_check, mean_lower_bound_check,
                                           pushing_check)
from sixvertex.exact import enumerate_heights
from sixvertex.lattice import plane_patch, rectangle


def _raised(D, by=2):
    return {f: v + by for f, v in H.zero_one(D).items()}


def test_check_result_status():
    r = CheckResult("x", "i", F(3, 2))
    r.record(True)
    assert r.status == "pass" and r.tested == 1
    r.record(False, 0.5, "w")
    r.record(False, 0.2, "v")
    assert r.status == "fail" and r.max_violation == 0.5 and r.witness == "w"
    assert r.row()["c"] == "3/2"
    assert CheckResult("x", "i", 1, explore=True).status == "explore"
    assert format_c(2.0) == "2" and format_c(F(4)) == "4"


@pytest.mark.parametrize("c", [1, F(3, 2), 2, 3])
def test_fkg_cbc_on_rectangle(c):
    D = rectangle(4, 4)
    xi, xi2 = H.zero_one(D), _raised(D)
    rng = np.random.default_rng(0)
    assert fkg_cbc_suite(D, xi, xi2, c, "4x4", rng=rng).status == "pass"
    assert fkg_cbc_suite(D, xi, xi2, c, "4x4", absolute=True, rng=rng).status == "pass"


def test_fkg_detects_violations_below_one():
    # negative control: for c < 1 positive association fails on this instance
    D = five_interior_domain()
    r = fkg_cbc_suite(D, H.zero_one(D), _raised(D), F(1, 2), "int5", explore=True,
                      rng=np.random.default_rng(0))
    assert r.status == "explore"
    assert r.violations > 0


def test_non_increasing_event_rejected():
    D = rectangle(3, 3)
    pool = np.array(list(enumerate_heights(D, H.zero_one(D), lo=-3, hi=4)))
    i = D.face_index((1, 1))
    with pytest.raises(NonMonotoneEvent):
        check_increasing("h<=0", lambda X: X[:, i] <= 0, pool)
    assert check_increasing("h>=1", lambda X: X[:, i] >= 1, pool)


def test_cbc_rejects_unordered_boundaries():
    D = rectangle(3, 3)
    with pytest.raises(ValueError):
        fkg_cbc_suite(D, _raised(D), H.zero_one(D), 2, "bad")


@pytest.mark.parametrize("c", [1, F(3, 2), 3])
def test_holley(c):
    D = rectangle(4, 3)
    r = holley_single_site_check(D, H.zero_one(D), _raised(D), c, "4x3")
    assert r.status == "pass" and r.tested > 0


def test_mean_bounds_float_and_exact():
    D = plane_patch({(0, 0), (1, 0), (0, 1), (1, 1), (0, 2)})
    xi = H.zero_one(D)
    for c in (F(2), 2.0):
        assert mean_lower_bound_check(D, xi, c).status == "pass"


def test_smp():
    outer = rectangle(5, 4)
    inner = rectangle(3, 2, 1, 1)
    rng = np.random.default_rng(3)
    xi = H.boundary_from_height(outer, random_height(outer, rng))
    for c in (F(1), F(2)):
        r = smp_check(outer, inner, xi, c, "5x4")
        assert r.status == "pass" and r.tested > 0


def test_pushing():
    D = small_domains()["v4-sq"]
    h = np.maximum(random_height(D, np.random.default_rng(2), spread=1), D.parity)
    B = list(D.boundary_faces)
    xi = {f: int(h[D.face_index(f)]) for f in B}
    coll = [[D.faces[0]], [D.faces[5]]]
    for k in (1, 2):
        r = pushing_check(D, xi, B, coll, k, 0, F(2), "v4-sq")
        assert r.status == "pass"


def test_cluster_graph_small():
    D = rectangle(3, 3)
    # the four odd faces form separate clusters, joined at the four vertices
    Hh = H.from_dict(D, {(0, 0): 0, (1, 0): 1, (2, 0): 0, (0, 1): 1, (1, 1): 0,
                          (2, 1): 1, (0, 2): 0, (1, 2): 1, (2, 2): 0})
    G = ClusterGraph(D, Hh)
    assert G.n == 4
    assert len(G.edges) == 4
    assert G.n_free == 0
    law = G.ising_law(F(2))
    assert sum(law.values()) == 1
    with pytest.raises(ValueError):
        ClusterGraph(D, -Hh)


def test_sign_lemma_and_contraction():
    D = small_domains()["v3-L"]
    Hs = np.array(list(enumerate_heights(D, lo=0, hi=3)))
    for c in (F(1), F(3, 2), F(3)):
        r = CheckResult("sign_lemma", "v3-L", c)
        for Hh in Hs:
            sign_lemma_check(D, Hh, c, r)
        assert r.status == "pass"
        r = CheckResult("contraction", "v3-L", c)
        for i, j in np.argwhere(np.all(Hs[:, None] <= Hs[None], axis=2))[:300]:
            contraction_check(D, Hs[i], Hs[j], c, r)
        assert r.status == "pass"


def test_contraction_needs_order():
    D = small_domains()["v2"]
    flat = H.checkerboard(D)
    higher = next(h for h in enumerate_heights(D, lo=0, hi=3) if max(h) == 2)
    with pytest.raises(ValueError):
        contraction_check(D, np.array(higher), flat, 2)


def test_small_verify_run():
    res = run_verify(max_faces=4, cs=(2,), seed=1)
    s = summarize(res)
    assert s["failures"] == 0
    assert s["checks"] > 10
    assert {r.check for r in res} >= {"smp", "fkg_cbc", "fkg_cbc_abs", "holley", "pushing",
                                      "sign_lemma", "contraction"}
