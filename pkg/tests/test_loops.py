from fractions import Fraction as F
import itertools

import numpy as np
import pytest

from sixvertex import heights as H
from sixvertex.exact import cylinder_arrow_configs
from sixvertex.lattice import EAST, NORTH, SOUTH, WEST, cylinder
from sixvertex.loops import (SectorError, in_B, level_crossings, loop_decompose, map_T,
                             map_T_suite, reverse_between, select_crossings, vertex_pairing)


@pytest.fixture(scope="module")
def configs43():
    return [np.asarray(a) for a in cylinder_arrow_configs(4, 3)]


def test_pairing_all_types():
    for w, e, s, n in itertools.product((1, -1), repeat=4):
        arrows = {WEST: w, EAST: e, SOUTH: s, NORTH: n}
        if H.out_degree(w, e, s, n) != 2:
            with pytest.raises(H.HeightError):
                vertex_pairing(arrows)
            continue
        pair = vertex_pairing(arrows)
        assert len(pair) == 2 and len(set(pair.values())) == 2
        for x, y in pair.items():
            assert (y - x) % 4 in (1, 3)          # adjacent sides, no crossing
        if H.classify(w, e, s, n) >= 5:
            assert all(y == (x + 3) % 4 for x, y in pair.items())


def test_decomposition_covers_every_edge(configs43):
    D = cylinder(4, 3)
    assert len(configs43) == 450
    for a in configs43:
        dec = loop_decompose(D, a)
        assert np.all(dec.edge_owner >= 0)
        used = sorted(e for p in dec.paths + dec.loops for e in p.edges)
        assert used == list(range(len(D.edges)))
        ups = sum(p.kind == 'up' for p in dec.paths)
        downs = sum(p.kind == 'down' for p in dec.paths)
        assert ups - downs == 2 * H.sector(D, a)


def test_select_crossings_balances(configs43):
    D = cylinder(4, 3)
    for a in configs43:
        if H.sector(D, a) != 1:
            continue
        dec = loop_decompose(D, a)
        chosen = select_crossings(dec, 1)
        assert len(chosen) == 2
        assert all(p.kind == 'up' for p in chosen)
        with pytest.raises(SectorError):
            select_crossings(dec, 2)


def test_map_is_reversible_and_balanced(configs43):
    D = cylinder(4, 3)
    for a in configs43:
        if H.sector(D, a) != 1:
            continue
        r = map_T(D, a, 1)
        assert H.ice_ok(D, r.image) and H.is_balanced(D, r.image)
        assert np.array_equal(reverse_between(D, r.image, r.first, r.second), a)


def test_map_rejects_wrong_sector(configs43):
    D = cylinder(4, 3)
    a = next(a for a in configs43 if H.sector(D, a) == 0)
    with pytest.raises(SectorError):
        map_T(D, a, 1)


def test_level_crossings_flat():
    D = cylinder(4, 3)
    a = next(a for a in cylinder_arrow_configs(4, 3)
             if H.is_balanced(D, a) and len(set(H.arrows_to_height(D, a).tolist())) == 2)
    h = H.arrows_to_height(D, a)
    # a flat configuration has x-crossings at both of its levels
    assert level_crossings(D, h) == set(h.tolist())
    assert in_B(D, a, 1)
    assert not in_B(D, a, 2)


def test_suite_passes_rational():
    res = map_T_suite(4, 3, 1, F(3, 2))
    assert all(r.status == "pass" for r in res)
    pre = next(r for r in res if r.check == "map_preimages")
    assert pre.extra["configs"] == 100
    assert pre.extra["max_multiplicity"] <= 16 * 2 ** 24
