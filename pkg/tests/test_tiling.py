import itertools
import math

import numpy as np
import pytest

from moduli_tiler.hyperbolic import COLLAR_CONSTANT, CurveClass, FNPoint, HyperbolicError, build_holonomy, random_fn_point, twist_flow
from moduli_tiler.surface_topology import SURFACE_DECOMPOSITIONS, builtin_decomposition, multicurve_type
from moduli_tiler.tiling import (
    apex_level,
    classify_tile,
    enumerate_short_geodesics,
    short_simplex,
    short_words,
    stabilizer_profile,
)

ALL = [n for names in SURFACE_DECOMPOSITIONS.values() for n in names]
S11 = builtin_decomposition("s11")
EPS = 0.1


def _brute_short(x, eps, bound):
    """Reduced words up to bound, checked one matrix product at a time."""
    hol = build_holonomy(x)
    syms = list(hol.letters) + [c.upper() for c in hol.letters]
    limit = 2 * math.cosh(eps / 2)
    found = set()
    for n in range(1, bound + 1):
        for w in itertools.product(syms, repeat=n):
            if any(w[i] == w[i + 1].swapcase() for i in range(n - 1)):
                continue
            if n > 1 and w[0] == w[-1].swapcase():
                continue
            tr = abs(np.trace(hol.matrix("".join(w))))
            # long peripheral words drift above |tr| = 2 by rounding
            if 2 + 1e-6 < tr < limit:
                found.add(round(2 * math.acosh(tr / 2), 12))
    return found


def test_short_set_matches_brute_force():
    x = FNPoint(S11, (0.05,), (0.013,))
    rep = enumerate_short_geodesics(x, EPS)
    assert rep.complete
    assert [(c, round(l, 12)) for c, l in rep.curves] == [(CurveClass("a"), 0.05)]
    assert _brute_short(x, EPS, 8) == {0.05}


def test_uncertified_search_agrees_with_brute_force():
    # eps above the certificate threshold forces the word search
    x = FNPoint(S11, (3.0,), (1.1,))
    eps = 1.7
    rep = enumerate_short_geodesics(x, eps, word_bound=6)
    assert not rep.complete
    assert {round(l, 12) for _, l in rep.curves} == _brute_short(x, eps, 6)
    assert {round(l, 12) for _, l in short_words(x, eps, 6)} == _brute_short(x, eps, 6)


def test_thick_point_has_no_short_curves():
    x = FNPoint(S11, (1.0,), (0.2,))
    rep = enumerate_short_geodesics(x, EPS)
    assert rep.curves == () and rep.complete
    assert short_simplex(x, EPS) == ()
    assert classify_tile(x, EPS).is_thick


def test_epsilon_guards():
    x = FNPoint(S11, (1.0,), (0.0,))
    with pytest.raises(HyperbolicError):
        enumerate_short_geodesics(x, COLLAR_CONSTANT + 1e-6)
    with pytest.raises(HyperbolicError):
        classify_tile(x, 0.2)
    with pytest.raises(HyperbolicError):
        classify_tile(x, 0.0)


def test_short_simplex_examples():
    assert short_simplex(FNPoint(S11, (EPS / 2,), (0.0,)), EPS) == ("a",)
    pd = builtin_decomposition("s20_theta")
    x = FNPoint(pd, (EPS / 2,) * 3, (0.01, 0.02, 0.0))
    assert set(short_simplex(x, EPS)) == set(pd.curve_ids)


def test_thin_tile_example():
    tile = classify_tile(FNPoint(S11, (EPS * math.exp(-2.0),), (0.004,)), EPS)
    assert tile.kind == "thin" and tile.sigma == ("a",)
    assert tile.base_point.length("a") == EPS
    assert tile.base_point.twist("a") == 0.004
    assert abs(tile.cone_coords[0] - 1.0) < 1e-12
    assert tile.type_label == "nonseparating: [(0,1,2)]"


@pytest.mark.parametrize("name", ALL)
def test_partition_and_twist_invariance(name):
    pd = builtin_decomposition(name)
    rng = np.random.default_rng(11)
    for _ in range(300):
        x = random_fn_point(pd, rng, lmin=1e-3)
        tile = classify_tile(x, EPS)
        short = {c for c, l in zip(pd.curve_ids, x.lengths) if l < EPS}
        assert tile.is_thick == (not short)
        assert set(tile.sigma) == short
        if not tile.is_thick:
            assert all(c > 0 for c in tile.cone_coords)
            assert tile.type_label == multicurve_type(pd, tile.sigma)
            assert classify_tile(tile.base_point, EPS).is_thick
            for c in pd.curve_ids:
                if c not in short:
                    assert tile.base_point.length(c) == x.length(c)
        for cid in pd.curve_ids:
            y = twist_flow(x, cid, x.length(cid))
            t2 = classify_tile(y, EPS)
            assert (t2.kind, t2.type_label, t2.cone_coords) == (tile.kind, tile.type_label, tile.cone_coords)


@pytest.mark.parametrize("name", ALL)
def test_exhaustion(name):
    pd = builtin_decomposition(name)
    rng = np.random.default_rng(12)
    for _ in range(200):
        x = random_fn_point(pd, rng, lmin=1e-3)
        if classify_tile(x, 0.1).is_thick:
            assert classify_tile(x, 0.05).is_thick


def test_short_simplex_is_order_independent():
    # the three theta curves are interchangeable: permuting lengths permutes sigma only
    pd = builtin_decomposition("s20_theta")
    lengths = (0.01, 0.02, 0.03)
    tiles = [classify_tile(FNPoint(pd, perm, (0.0,) * 3), EPS) for perm in itertools.permutations(lengths)]
    assert len({t.type_label for t in tiles}) == 1
    assert len({tuple(sorted(t.cone_coords)) for t in tiles}) == 1
    for t in tiles:
        assert set(t.sigma) == set(pd.curve_ids)


def test_outer_cone_injective_mod_full_twists():
    pd = builtin_decomposition("s12_i")
    x = FNPoint(pd, (0.01, 0.5), (0.003, 0.1))
    same = twist_flow(x, "a", 2 * x.length("a"))
    other = twist_flow(x, "a", 0.5 * x.length("a"))
    tx, ts, to = (classify_tile(p, EPS) for p in (x, same, other))
    assert ts.cone_coords == tx.cone_coords
    # a partial twist keeps cone coordinates but moves the base point off the full-twist orbit
    assert to.cone_coords == tx.cone_coords
    frac = lambda t: (t.base_point.twist("a") / EPS) % 1.0
    assert abs(frac(to) - frac(tx)) > 1e-3


def test_stabilizer_profile():
    pd = builtin_decomposition("s20_theta")
    prof = stabilizer_profile(pd, pd.curve_ids)
    assert prof.twist_rank == 3 and prof.is_torus_face
    assert sorted(prof.cut_type.components) == [(0, 0, 3), (0, 0, 3)]
    prof = stabilizer_profile(S11, ["a"])
    assert prof.twist_rank == 1 and prof.cut_type.components == ((0, 1, 2),)
    assert prof.is_torus_face


def test_apex_level():
    assert abs(apex_level(0.01) - 2.302585092994046) < 1e-12
