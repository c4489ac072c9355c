import math

import mpmath
import numpy as np
import pytest
from scipy.integrate import quad

from moduli_tiler.cone_complex import builtin_catalog
from moduli_tiler.hyperbolic import FNPoint, HyperbolicError, random_fn_point
from moduli_tiler.metric_models import (
    ModelMetric,
    TangentSample,
    horoball_distance,
    model_distance,
    model_norm,
    path_length,
    project_u,
)
from moduli_tiler.surface_topology import builtin_decomposition
from moduli_tiler.tiling import apex_level

EPS = 0.1
A = apex_level(EPS)
S11 = builtin_decomposition("s11")


def at_u(pd, us, twists=None, others=None):
    """Point whose listed curves sit at u-coordinates us (others default to length 1)."""
    lengths = dict(others or {})
    lengths.update({c: math.exp(-2 * u) for c, u in us.items()})
    ls = tuple(lengths.get(c, 1.0) for c in pd.curve_ids)
    return FNPoint(pd, ls, twists or (0.0,) * len(pd.curves))


def _semicircle_length(p1, p2):
    """Arc length of the half-plane geodesic in (x, y) = (3 theta, e^(3u)), divided by 3."""
    (t1, u1), (t2, u2) = p1, p2
    x1, y1, x2, y2 = 3 * t1, math.exp(3 * u1), 3 * t2, math.exp(3 * u2)
    c = ((x2 ** 2 + y2 ** 2) - (x1 ** 2 + y1 ** 2)) / (2 * (x2 - x1))
    r = math.hypot(x1 - c, y1)
    a1, a2 = math.atan2(y1, x1 - c), math.atan2(y2, x2 - c)
    # ds / y on a circle of radius r is dphi / sin(phi)
    length, _ = quad(lambda phi: 1.0 / math.sin(phi), min(a1, a2), max(a1, a2), epsabs=1e-13, epsrel=1e-13)
    return length / 3.0


def test_model_norm_examples():
    x = FNPoint(S11, (1.0,), (0.0,))
    assert model_norm(TangentSample(x, ("a",), ((0.0, 0.0),))) == 0.0
    assert model_norm(TangentSample(x, ("a",), ((1.0, 0.0),))) == 1.0
    y = FNPoint(S11, (math.exp(-2.0),), (0.0,))
    v = model_norm(TangentSample(y, ("a",), ((1.0, 1.0),)))
    assert abs(v - math.sqrt(math.exp(-6) + 1)) < 1e-15
    assert abs(v - 1.001238) < 1e-6
    w = TangentSample(y, ("a",), ((0.4, -0.2),), thick=0.3)
    assert model_norm(w) >= max(0.3, 0.2, math.exp(-3) * 0.4)


def test_horoball_examples():
    assert horoball_distance((0.3, 1.0), (0.3, 2.5)) == 1.5
    oracle = float(mpmath.acosh(1 + mpmath.mpf(9) / 2) / 3)
    assert abs(horoball_distance((0.0, 0.0), (1.0, 0.0)) - oracle) < 1e-15
    assert abs(oracle - 0.7965088115) < 1e-10


def test_horoball_matches_integrated_geodesic():
    rng = np.random.default_rng(0)
    for _ in range(50):
        p = (rng.uniform(-1, 1), rng.uniform(-0.5, 1.5))
        q = (rng.uniform(-1, 1), rng.uniform(-0.5, 1.5))
        assert abs(horoball_distance(p, q) - _semicircle_length(p, q)) < 1e-9


def test_horoball_is_a_metric():
    rng = np.random.default_rng(1)
    for _ in range(2000):
        p, q, r = (tuple(rng.uniform(-2, 2, 2)) for _ in range(3))
        assert horoball_distance(p, q) == horoball_distance(q, p)
        assert horoball_distance(p, r) <= horoball_distance(p, q) + horoball_distance(q, r) + 1e-12
        u = p[1]
        chord = 3 * abs(p[0] - q[0]) * math.exp(-3 * u)
        assert horoball_distance((p[0], u), (q[0], u)) <= chord + 1e-15


def test_project_u():
    pd = builtin_decomposition("s12_i")
    assert np.all(project_u(FNPoint(pd, (1.0, 1.0), (0.0, 0.0)), pd.curve_ids) == 0.0)
    x = at_u(pd, {"a": 1.0, "b": A})
    assert np.allclose(project_u(x, ("a", "b")), [1.0, A], atol=1e-15)


def test_path_length_examples():
    x = at_u(S11, {"a": A + 1})
    assert path_length([x, x]) == 0.0
    y = at_u(S11, {"a": A + 3})
    assert abs(path_length([x, y]) - 2.0) < 1e-6
    assert abs(path_length([x, at_u(S11, {"a": A + 2}), y]) - 2.0) < 1e-6


def test_path_length_error_names_vertex():
    thick = FNPoint(S11, (0.5,), (0.0,))
    with pytest.raises(HyperbolicError, match="vertex 2"):
        path_length([at_u(S11, {"a": A + 2}), at_u(S11, {"a": A + 3}), thick])


@pytest.mark.parametrize("mode", ["thin", "wp", "mcm"])
def test_path_length_dominates_u_projection(mode):
    pd = builtin_decomposition("s12_i")
    rng = np.random.default_rng(2)
    for _ in range(40):
        n = rng.integers(2, 5)
        path = [FNPoint(pd, tuple(np.exp(-2 * rng.uniform(A + 0.1, A + 3, 2))), tuple(rng.uniform(0, 0.01, 2)))
                for _ in range(n)]
        us = [project_u(x, ("a", "b")) for x in path]
        euclid = sum(np.linalg.norm(us[i + 1] - us[i]) for i in range(n - 1))
        if mode == "thin":
            assert path_length(path, mode) >= euclid * (1 - 1e-6)
        else:
            assert path_length(path, mode) > 0


def test_mode_consistency_on_thick_part():
    rng = np.random.default_rng(3)
    pd = builtin_decomposition("s20_theta")
    for _ in range(100):
        x = random_fn_point(pd, rng, lmin=EPS)
        comps = tuple(tuple(rng.normal(size=2)) for _ in pd.curve_ids)
        v = TangentSample(x, pd.curve_ids, comps, thick=0.2)
        assert model_norm(v, "mcm") == model_norm(v, "wp")


def test_thin_and_wp_twist_coefficients_agree():
    rng = np.random.default_rng(4)
    for _ in range(100):
        l = float(np.exp(rng.uniform(-8, 1)))
        x = FNPoint(S11, (l,), (0.0,))
        v = TangentSample(x, ("a",), ((1.0, 0.0),))
        assert abs(model_norm(v, "thin") ** 2 - model_norm(v, "wp") ** 2) <= 1e-12 * l ** 3


def test_model_distance_examples():
    x = at_u(S11, {"a": A + 1}, (0.002,))
    y = at_u(S11, {"a": A + 4}, (0.002,))
    assert model_distance(x, x).distance == 0.0
    res = model_distance(x, y)
    assert res.route == "same_tile" and abs(res.distance - 3.0) < 1e-12
    # different maximal cones of S_{1,2}
    r = 5.0
    p = at_u(builtin_decomposition("s12_i"), {"a": A + 3, "b": A + 4})
    q = at_u(builtin_decomposition("s12_ii"), {"a": A + 4, "b": A + 3})
    res = model_distance(p, q, ModelMetric(EPS, d1=1.0))
    assert res.route == "through_thick"
    assert abs(res.distance - (r + 1.0 + r)) < 1e-12


@pytest.mark.parametrize("name,catalog", [("s11", "s11"), ("s12_i", "s12"), ("s20_theta", "s20")])
def test_model_distance_is_a_metric(name, catalog):
    pd = builtin_decomposition(name)
    metric = ModelMetric(EPS, "thin", 1.0, builtin_catalog(catalog))
    rng = np.random.default_rng(5)
    for _ in range(300):
        pts = [random_fn_point(pd, rng, lmin=1e-4, lmax=0.3) for _ in range(3)]
        d = lambda a, b: model_distance(pts[a], pts[b], metric).distance
        assert abs(d(0, 1) - d(1, 0)) <= 1e-9
        assert d(0, 2) <= d(0, 1) + d(1, 2) + 1e-9


def test_metric_guards():
    with pytest.raises(HyperbolicError):
        ModelMetric(0.5)
    with pytest.raises(HyperbolicError):
        ModelMetric(EPS, "sup")
    with pytest.raises(HyperbolicError):
        ModelMetric(EPS, d1=0.0)
