import math

import numpy as np
import pytest

from moduli_tiler.asymptotic_cone import (
    NetMiss,
    build_net,
    estimate_distortion,
    f1_map,
    flat_sector_probe,
    fn_map,
    net_point,
    sample_net_pairs,
)
from moduli_tiler.cone_complex import builtin_catalog, cone_distance
from moduli_tiler.hyperbolic import FNPoint, HyperbolicError, twist_flow
from moduli_tiler.metric_models import model_distance


@pytest.fixture(scope="module")
def nets():
    return {n: build_net(builtin_catalog(n)) for n in ["s11", "s04", "s12", "s05", "s20"]}


def test_net_shapes(nets):
    assert len(nets["s11"].cones) == 1
    assert len(nets["s20"].cones) == len(builtin_catalog("s20").maximal) == 2
    for net in nets.values():
        for c in net.cones:
            assert all(l == net.epsilon for l in c.base_point.lengths)
            assert all(t == 0.0 for t in c.base_point.twists)
    with pytest.raises(HyperbolicError):
        build_net(builtin_catalog("s11"), 0.2)


def test_f1_examples(nets):
    net = nets["s11"]
    cone = net.cones[0]
    assert f1_map(net, cone.base_point).is_apex
    p = f1_map(net, net_point(net, cone, [3.0]))
    assert abs(p.radius - 3.0) < 1e-12
    net = nets["s12"]
    cone = next(c for c in net.cones if c.simplex == "d1_0")
    p = f1_map(net, net_point(net, cone, [3.0, 4.0]))
    assert abs(p.radius - 5.0) < 1e-12
    assert p.point.simplex == "d1_0"
    # barycentric coordinates keep the 3:4 ratio
    assert np.allclose(p.point.coords, (3 / 7, 4 / 7), atol=1e-12)


def test_fn_scales_radius(nets):
    net = nets["s12"]
    cone = net.cones[0]
    x = net_point(net, cone, [3.6, 4.8])
    assert fn_map(net, 1, x) == f1_map(net, x)
    p = fn_map(net, 3, x)
    assert abs(p.radius - 2.0) < 1e-12 and p.point == f1_map(net, x).point
    assert fn_map(net, 7, cone.base_point).is_apex
    with pytest.raises(HyperbolicError):
        fn_map(net, 0, x)


def test_net_misses(nets):
    net = nets["s11"]
    cone = net.cones[0]
    x = net_point(net, cone, [1.0])
    with pytest.raises(NetMiss):
        f1_map(net, twist_flow(x, "a", 0.5 * x.length("a")))
    with pytest.raises(NetMiss):
        f1_map(net, FNPoint(x.pd, (0.5,), (0.0,)))
    with pytest.raises(NetMiss):
        f1_map(nets["s04"], x)


def test_f1_is_injective_on_cones(nets):
    net = nets["s12"]
    cone = next(c for c in net.cones if c.simplex == "d1_0")
    rng = np.random.default_rng(0)
    for _ in range(100):
        a, b = rng.uniform(0, 5, 2), rng.uniform(0, 5, 2)
        pa, pb = f1_map(net, net_point(net, cone, a)), f1_map(net, net_point(net, cone, b))
        assert abs(cone_distance(pa, pb, net.catalog) - np.linalg.norm(a - b)) < 1e-9


def test_sampling_is_seeded(nets):
    net = nets["s20"]
    assert sample_net_pairs(net, 5.0, 10, 3) == sample_net_pairs(net, 5.0, 10, 3)
    for x, y in sample_net_pairs(net, 5.0, 50, 4):
        assert f1_map(net, x).radius <= 5.0 + 1e-9
        assert model_distance(x, x).distance == 0.0


def test_distortion_scaling(nets):
    net = nets["s20"]
    reps = estimate_distortion(net, [1, 2, 4], 10.0, 40, seed=1)
    assert [r.n for r in reps] == [1, 2, 4]
    sups = [r.sup_defect * r.n for r in reps]
    assert max(sups) - min(sups) <= 1e-12
    assert all(r.sup_defect <= net.catalog.surface["complexity"] for r in reps)


def test_distortion_vanishes_in_rank_one(nets):
    for name in ("s11", "s04"):
        (rep,) = estimate_distortion(nets[name], 1, 10.0, 100, seed=2)
        assert rep.sup_defect <= 1e-9


@pytest.mark.parametrize("name", ["s12", "s05", "s20"])
def test_flat_probe(nets, name):
    rep = flat_sector_probe(nets[name], 10.0)
    assert rep.deviation <= rep.bound
    assert rep.bound == 0.4
    assert abs(rep.ratio - math.sqrt(2.0)) <= 1e-9


def test_flat_probe_needs_rank_two(nets):
    with pytest.raises(HyperbolicError):
        flat_sector_probe(nets["s11"], 10.0)
