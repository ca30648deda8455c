from fractions import Fraction as F

import numpy as np
import pytest

from sixvertex import heights as H
from sixvertex.exact import (EnumerationTooLarge, ExactMeasure, TransferOperator,
                             brute_force_sector_Z, curvature_diagnostic, enumerate_heights,
                             free_energy, torus_measure)
from sixvertex.lattice import rectangle

import oracles

# frozen from tests/oracles.py (depth-first enumeration, no package code)
PATCH_COUNT = 1322
PATCH_EXACT = {
    1: {"h2:2,2": F(692, 661), "inc2:2,2:3,3": F(792, 661), "ge:2,3:1": F(500, 661)},
    2: {"h2:2,2": F(287710, 784313), "inc2:2,2:3,3": F(404220, 784313),
        "ge:2,3:1": F(712573, 784313)},
    3: {"h2:2,2": F(50774380, 722414087), "inc2:2,2:3,3": F(261786680, 2167242261),
        "ge:2,3:1": F(2129166976, 2167242261)},
}
TORUS4_COUNT = 990
TORUS4_EXACT = {
    1: {"inc2:0,0:2,0": F(592, 495), "inc2:0,0:1,1": F(592, 495), "inc2:0,0:2,2": F(136, 99)},
    2: {"inc2:0,0:2,0": F(65036, 110217), "inc2:0,0:1,1": F(58322, 110217),
        "inc2:0,0:2,2": F(65560, 110217)},
    3: {"inc2:0,0:2,0": F(195248, 1403961), "inc2:0,0:1,1": F(778576, 6083831),
        "inc2:0,0:2,2": F(2539960, 18251493)},
}
# cylinder sector Z at c = 3/2 by brute force over arrow assignments
SECTOR_Z_3_2 = {
    (2, 2): {0: F(2), 1: F(17, 2), 2: F(2)},
    (2, 3): {0: F(4), 1: F(289, 8), 2: F(4)},
    (4, 2): {0: F(2), 1: F(35), 2: F(609, 8), 3: F(35), 4: F(2)},
    (4, 3): {0: F(4), 1: F(1225, 4), 2: F(128001, 128), 3: F(1225, 4), 4: F(4)},
}
# (1/N) log leading eigenvalue of the balanced block at c = 1
FREE_ENERGY_C1 = {4: 0.462989385247, 6: 0.4457653504, 8: 0.439601098213}


def _value(mu, D, spec):
    kind, _, rest = spec.partition(':')
    parts = rest.split(':')
    col = lambda s: mu.configs[:, D.face_index(tuple(int(t) for t in s.split(',')))]
    if kind == 'h2':
        return mu.expectation(col(parts[0]) ** 2)
    if kind == 'inc2':
        return mu.expectation((col(parts[0]) - col(parts[1])) ** 2)
    if kind == 'ge':
        return mu.prob(col(parts[0]) >= int(parts[1]))
    raise ValueError(spec)


@pytest.mark.parametrize("c", [1, 2, 3])
def test_patch_expectations(c):
    D = rectangle(6, 6)
    mu = ExactMeasure.build(D, H.zero_one(D), F(c))
    assert len(mu) == PATCH_COUNT
    for spec, val in PATCH_EXACT[c].items():
        assert _value(mu, D, spec) == val


@pytest.mark.parametrize("c", [1, 2, 3])
def test_torus4_expectations(c):
    mu = torus_measure(4, F(c))
    assert len(mu) == TORUS4_COUNT
    for spec, val in TORUS4_EXACT[c].items():
        assert _value(mu, mu.D, spec) == val


def test_patch_partition_function_against_oracle():
    D = rectangle(6, 6)
    cfg = list(oracles.patch_heights(6, 6, lambda x, y: (x + y) % 2))
    Z = sum(F(2) ** oracles.patch_cvertices(6, 6, h) for h in cfg)
    assert ExactMeasure.build(D, H.zero_one(D), F(2)).Z == Z


def test_float_matches_rational():
    D = rectangle(5, 4)
    xi = H.zero_one(D)
    a = ExactMeasure.build(D, xi, F(3, 2))
    b = ExactMeasure.build(D, xi, 1.5)
    assert float(a.Z) == pytest.approx(b.Z, rel=1e-12)
    assert np.allclose([float(p) for p in a.probabilities()], b.probabilities(), atol=1e-14)


def test_enumeration_cap():
    D = rectangle(8, 8)
    with pytest.raises(EnumerationTooLarge):
        list(enumerate_heights(D, H.zero_one(D), max_log2=4))


def test_marginal_sums_to_one():
    D = rectangle(4, 4)
    mu = ExactMeasure.build(D, H.zero_one(D), F(2))
    for f in D.faces:
        assert sum(mu.marginal(f).values()) == 1


@pytest.mark.parametrize("NM", list(SECTOR_Z_3_2))
def test_transfer_sector_Z(NM):
    N, M = NM
    T = TransferOperator(N, F(3, 2), exact=True)
    for k, z in SECTOR_Z_3_2[NM].items():
        assert T.sector_Z(k, M) == z


@pytest.mark.parametrize("c", [F(1), F(2), F(3)])
def test_transfer_matches_oracle_brute_force(c):
    for N, M in ((2, 2), (2, 3), (4, 2), (4, 3)):
        ref = oracles.cylinder_sector_Z(N, M, c)
        T = TransferOperator(N, c, exact=True)
        assert {k: T.sector_Z(k, M) for k in range(N + 1)} == ref
        assert brute_force_sector_Z(N, M, c) == ref


def test_extreme_sector_is_power_of_two():
    for M in (2, 3, 5):
        assert TransferOperator(6, F(2), exact=True).sector_Z(0, M) == 2 ** (M - 1)


@pytest.mark.parametrize("N", sorted(FREE_ENERGY_C1))
def test_free_energy_small_N(N):
    est = free_energy(N, 1, 0)
    assert est.f_hat == pytest.approx(FREE_ENERGY_C1[N], abs=1e-9)


def test_power_iteration_agrees_with_arpack():
    T = TransferOperator(8, 2.0)
    est = T.leading_eig(4)
    assert est.residual < 1e-9
    assert est.lam == pytest.approx(T.leading_eig_arpack(4), rel=1e-9)


def test_curvature_rows():
    rows = curvature_diagnostic(2.0, 8, 2)
    assert [r["k"] for r in rows] == [0, 1, 2]
    assert rows[0]["g"] == 0
    assert all(r["g"] >= 0 for r in rows)
