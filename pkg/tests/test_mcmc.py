from fractions import Fraction as F

import numpy as np
import pytest

from sixvertex import heights as H
from sixvertex import kernels
from sixvertex.checks.battery import random_height
from sixvertex.exact import ExactMeasure
from sixvertex.lattice import box, plane_patch, rectangle, torus
from sixvertex.mcmc import (BatchMeans, ChainState, heat_bath_conditional, run_chain,
                            sandwich_diagnostic, sweep_transition_matrix)


def test_conditional_matches_enumeration():
    D = rectangle(4, 4)
    c = F(2)
    mu = ExactMeasure.build(D, H.zero_one(D), c)
    probs = mu.probabilities()
    for f in [g for g in D.faces if not D.boundary[D.face_index(g)]]:
        i = D.face_index(f)
        groups = {}
        for row, p in zip(mu.configs.tolist(), probs):
            v = row[i]
            row[i] = None
            d = groups.setdefault(tuple(row), {})
            d[v] = d.get(v, 0) + p
        for key, d in groups.items():
            tot = sum(d.values())
            h = np.array([0 if x is None else x for x in key])
            h[i] = next(iter(d))
            law = heat_bath_conditional(D, h, i, c)
            assert {v: q for v, q in law.items() if q} == {v: q / tot for v, q in d.items()}


def test_exact_stationarity_one_free_face():
    D = rectangle(3, 3)
    xi = H.zero_one(D)
    mu = ExactMeasure.build(D, xi, F(3))
    states = [tuple(r) for r in mu.configs.tolist()]
    P = sweep_transition_matrix(D, states, F(3), fixed=list(xi))
    pi = mu.probabilities()
    for j in range(len(states)):
        assert sum(pi[i] * P[i][j] for i in range(len(states))) == pi[j]


def test_same_seed_same_chain():
    D = rectangle(8, 8)
    xi = H.zero_one(D)
    runs = [ChainState(D, H.min_extension(D, xi), 2, fixed=list(xi), seed=5).run(50).h
            for _ in range(2)]
    assert np.array_equal(*runs)
    other = ChainState(D, H.min_extension(D, xi), 2, fixed=list(xi), seed=5, chain_id=1).run(50).h
    assert not np.array_equal(runs[0], other)


def test_chain_stays_valid_and_fixed():
    D = torus(8)
    ch = ChainState(D, H.checkerboard(D), 1, seed=2).run(200)
    assert H.is_height_function(D, ch.h)
    D = box(4)
    xi = H.zero_one(D)
    ch = ChainState(D, H.max_extension(D, xi), 3, fixed=list(xi), seed=2).run(50)
    H.validate(D, ch.h, fixed=xi)


def test_backends_agree():
    if "cython" not in kernels.available():
        pytest.skip("compiled kernels not built")
    before = kernels.backend()
    out = {}
    try:
        for name in ("cython", "python"):
            kernels.set_backend(name)
            D = torus(16)
            out[name] = ChainState(D, H.checkerboard(D), 2, seed=11).run(40).h.copy()
    finally:
        kernels.set_backend(before)
    assert np.array_equal(out["cython"], out["python"])


def test_sequential_python_sweep_matches_classes():
    before = kernels.backend()
    try:
        kernels.set_backend("python")
        D = rectangle(7, 6)
        xi = H.zero_one(D)
        a = ChainState(D, H.min_extension(D, xi), 2, fixed=list(xi), seed=3)
        b = ChainState(D, H.min_extension(D, xi), 2, fixed=list(xi), seed=3)
        for _ in range(20):
            faces, u, classes = a.driver.next()
            b.driver.next()
            a.sweep((faces, u, classes))
            b.sweep((faces, u, None))
            assert np.array_equal(a.h, b.h)
    finally:
        kernels.set_backend(before)


def test_unknown_backend():
    with pytest.raises(ValueError):
        kernels.set_backend("fortran")


def test_batch_means():
    rng = np.random.default_rng(0)
    x = rng.normal(size=1000)
    bm = BatchMeans(25)
    bm.extend(x)
    means = x.reshape(40, 25).mean(axis=1)
    assert bm.batches == 40
    assert bm.mean == pytest.approx(means.mean())
    assert bm.stderr == pytest.approx(means.std(ddof=1) / np.sqrt(40))
    a, b = BatchMeans(25), BatchMeans(25)
    a.extend(x[:500])
    b.extend(x[500:])
    m = a.merge(b)
    assert m.batches == 40
    assert m.mean == pytest.approx(bm.mean)


def test_monotone_coupling_short():
    D = plane_patch({(a, b) for a in range(4) for b in range(3)})
    xi = H.boundary_from_height(D, random_height(D, np.random.default_rng(1)))
    for c in (1, 2, 3):
        out = sandwich_diagnostic(D, xi, c, seed=c, max_sweeps=200, stop_when_coupled=False)
        assert out["violations"] == 0
        assert out["gaps"][-1] == 0


def test_run_chain_rows():
    D = rectangle(4, 4)
    rows = run_chain(D, 2, ["h2:1,1", "ge:2,2:1"], xi=H.zero_one(D), seed=1,
                     burnin=10, sweeps=400, batches=20)
    assert [r["observable"] for r in rows] == ["h2:1,1", "ge:2,2:1"]
    assert all(r["seed"] == 1 and r["batches"] == 20 for r in rows)
