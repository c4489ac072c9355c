import math

import mpmath
import numpy as np
import pytest
from scipy.optimize import brentq

from moduli_tiler.hyperbolic import (
    CurveClass,
    FNPoint,
    HyperbolicError,
    NotHyperbolicClass,
    RELATOR_TOL,
    build_holonomy,
    canonical_word,
    catalog_words,
    curve_word,
    dehn_twist_action,
    enumerate_classes,
    geodesic_length,
    invert_word,
    length_from_u,
    random_fn_point,
    trace_of,
    twist_flow,
    u_coordinate,
)
from moduli_tiler.surface_topology import SURFACE_DECOMPOSITIONS, builtin_decomposition

ALL = [n for names in SURFACE_DECOMPOSITIONS.values() for n in names]
S11 = builtin_decomposition("s11")


def s11(l, t=0.0):
    return FNPoint(S11, (l,), (t,))


def test_trace_of_pants_curve():
    assert abs(abs(trace_of(s11(1.0), "a")) - 2 * math.cosh(0.5)) < 1e-12
    assert abs(abs(trace_of(s11(1.0), "a")) - float(2 * mpmath.cosh(0.5))) < 1e-12


@pytest.mark.parametrize("name", ALL)
def test_holonomy_invariants(name):
    pd = builtin_decomposition(name)
    rng = np.random.default_rng(3)
    for _ in range(50):
        x = random_fn_point(pd, rng)
        hol = build_holonomy(x)
        assert hol.relator_residual <= RELATOR_TOL
        assert hol.det_residual <= 1e-9
        for m in hol.letters.values():
            if np.abs(m).max() <= 1e3:
                assert abs(np.linalg.det(m) - 1.0) <= 1e-9
        for cid, l in zip(pd.curve_ids, x.lengths):
            assert abs(geodesic_length(hol, curve_word(pd, cid)) - l) <= 1e-9


def test_hexagonal_torus_is_reached():
    la = 2 * math.acosh(1.5)

    def excess(t):
        return abs(trace_of(s11(la, t), "b")) - 3.0

    ts = np.linspace(0.0, 3.0 * la, 601)
    vals = [excess(t) for t in ts]
    lo, hi = int(np.argmin(vals)), int(np.argmax(vals))
    assert vals[lo] < 0 < vals[hi]
    t = brentq(excess, *sorted((ts[lo], ts[hi])), xtol=1e-14)
    x = s11(la, t)
    assert abs(abs(trace_of(x, "b")) - 3.0) < 1e-9
    assert abs(trace_of(x, "abAB") + 2.0) < 1e-9
    assert abs(geodesic_length(x, "b") - 1.9248473002384139) < 1e-9


def test_length_from_trace_three():
    oracle = float(2 * mpmath.acosh(mpmath.mpf(3) / 2))
    assert abs(oracle - 1.924847300238) < 1e-12


def test_peripheral_is_not_hyperbolic():
    x = s11(1.3, 0.2)
    for w in S11.alphabet["puncture_words"]:
        with pytest.raises(NotHyperbolicClass, match="not a hyperbolic class"):
            geodesic_length(x, w)


def test_u_coordinate():
    assert u_coordinate(1.0) == 0.0
    assert abs(u_coordinate(math.exp(-2.0)) - 1.0) < 1e-15
    assert abs(u_coordinate(0.01) - 2.302585092994046) < 1e-12
    assert abs(length_from_u(u_coordinate(0.37)) - 0.37) < 1e-15
    with pytest.raises(HyperbolicError):
        u_coordinate(0.0)


def test_twist_flow_is_a_flow():
    rng = np.random.default_rng(0)
    pd = builtin_decomposition("s20_theta")
    x = random_fn_point(pd, rng)
    assert twist_flow(x, "b", 0.0) == x
    a = twist_flow(twist_flow(x, "b", 0.3), "b", -1.1)
    b = twist_flow(x, "b", -0.8)
    assert np.allclose(a.twists, b.twists, atol=1e-15) and a.lengths == b.lengths


@pytest.mark.parametrize("name", ["s11", "s04"])
def test_full_twist_matches_dehn_twist(name):
    pd = builtin_decomposition(name)
    rng = np.random.default_rng(1)
    words = catalog_words(pd)
    for _ in range(20):
        x = random_fn_point(pd, rng)
        for cid in pd.curve_ids:
            y = twist_flow(x, cid, x.length(cid))
            for w in words:
                img = dehn_twist_action(pd, cid, w, power=-1)
                assert abs(geodesic_length(y, w) - geodesic_length(x, img)) <= 1e-8


def test_dehn_twist_examples():
    assert dehn_twist_action(S11, "a", "b") == CurveClass(canonical_word("ba"))
    assert dehn_twist_action(S11, "a", "a") == CurveClass("a")


@pytest.mark.parametrize("name", ALL)
def test_twist_inverse_is_identity(name):
    pd = builtin_decomposition(name)
    rng = np.random.default_rng(2)
    pool = enumerate_classes(tuple(sorted(pd.alphabet["letters"])), 5)
    for _ in range(100):
        w = CurveClass(pool[rng.integers(len(pool))])
        cid = pd.curve_ids[rng.integers(len(pd.curve_ids))]
        back = dehn_twist_action(pd, cid, dehn_twist_action(pd, cid, w, 1), -1)
        assert back == w


def test_length_invariant_under_conjugation_and_inversion():
    rng = np.random.default_rng(4)
    pd = builtin_decomposition("s12_i")
    x = random_fn_point(pd, rng)
    hol = build_holonomy(x)
    for w in ("ab", "aBc", "abcAd"):
        w = "".join(ch for ch in w if ch.lower() in pd.alphabet["letters"])
        try:
            l0 = geodesic_length(hol, w)
        except NotHyperbolicClass:
            continue
        for k in range(len(w)):
            assert abs(geodesic_length(hol, w[k:] + w[:k]) - l0) < 1e-9
        assert abs(geodesic_length(hol, invert_word(w)) - l0) < 1e-9
        assert CurveClass(w) == CurveClass(invert_word(w))


def test_canonical_form():
    assert canonical_word("ba") == canonical_word("ab")
    assert canonical_word("BA") == canonical_word("ab")
    assert canonical_word("aBAb") == canonical_word("AbaB")
    with pytest.raises(HyperbolicError):
        CurveClass("aA")


def test_bad_points_rejected():
    with pytest.raises(HyperbolicError):
        FNPoint(S11, (0.0,), (0.0,))
    with pytest.raises(HyperbolicError):
        FNPoint(S11, (1.0, 2.0), (0.0, 0.0))
