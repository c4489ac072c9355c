"""The net of maximal outer cones, the maps f_n and distortion estimates."""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass, field

import numpy as np

from .cone_complex import ConePoint, SphericalComplex, cone_distance, cone_point_from_vector
from .hyperbolic import EPSILON_0, FNPoint, HyperbolicError, u_coordinate
from .metric_models import ModelMetric, model_distance
from .surface_topology import PantsDecomposition, builtin_decomposition, complexity, multicurve_type, vertex_order
from .tiling import Tile, apex_level, classify_tile

__all__ = [
    "NetCone",
    "Net",
    "NetMiss",
    "DistortionReport",
    "FlatProbeReport",
    "build_net",
    "f1_map",
    "fn_map",
    "net_point",
    "sample_net_pairs",
    "estimate_distortion",
    "flat_sector_probe",
]


class NetMiss(HyperbolicError):
    pass


@dataclass(frozen=True)
class NetCone:
    simplex: str  # maximal catalog simplex
    pd: PantsDecomposition
    curves: tuple[str, ...]  # in catalog vertex order
    base_point: FNPoint


@dataclass(frozen=True)
class Net:
    epsilon: float
    apex_level: float
    catalog: SphericalComplex = field(repr=False)
    cones: tuple[NetCone, ...] = ()

    @property
    def base_points(self) -> tuple[FNPoint, ...]:
        return tuple(c.base_point for c in self.cones)

    @property
    def rank(self) -> int:
        return len(self.cones[0].curves)


def build_net(catalog: SphericalComplex, eps: float = EPSILON_0) -> Net:
    """One base point per maximal catalog simplex: all lengths eps, twists 0."""
    if not (0 < eps <= EPSILON_0):
        raise HyperbolicError(f"epsilon must lie in (0, {EPSILON_0}]")
    d = catalog.surface.get("complexity")
    cones = []
    for sid in catalog.maximal:
        s = catalog.simplices[sid]
        if d is not None and s.dim != d - 1:
            continue
        src = s.source or {}
        if "decomposition" not in src:
            raise HyperbolicError(f"catalog simplex {sid} has no source decomposition")
        pd = builtin_decomposition(src["decomposition"])
        curves = tuple(src["curves"])
        if len(curves) != len(pd.curves):
            continue
        base = FNPoint(pd, (eps,) * len(pd.curves), (0.0,) * len(pd.curves))
        if not classify_tile(base, eps).is_thick:
            raise HyperbolicError(f"base point of {sid} is not on the thick boundary")
        inside = classify_tile(base.with_lengths({c: eps * 0.5 for c in curves}), eps)
        if inside.type_label != s.type_label:
            raise HyperbolicError(f"net cone {sid} does not match its catalog type")
        cones.append(NetCone(sid, pd, inside.sigma, base))
    if not cones:
        raise HyperbolicError("catalog has no maximal simplices of dimension d(S) - 1")
    return Net(eps, apex_level(eps), catalog, tuple(cones))


def _cone_for(net: Net, x: FNPoint) -> NetCone:
    label = multicurve_type(x.pd, x.pd.curve_ids)
    for c in net.cones:
        if c.pd == x.pd and net.catalog.simplices[c.simplex].type_label == label:
            return c
    raise NetMiss("point does not lie in a net cone")


def f1_map(net: Net, x: FNPoint) -> ConePoint:
    """Octant coordinates max(u - a, 0) of a net point, in catalog vertex order."""
    cone = _cone_for(net, x)
    if any(l > net.epsilon for l in x.lengths):
        raise NetMiss("point lies outside the closed net cone (a length exceeds epsilon)")
    if x.twists != cone.base_point.twists:
        raise NetMiss("point is not on the net cone of its base point (twists differ)")
    v = [max(u_coordinate(x.length(c)) - net.apex_level, 0.0) for c in cone.curves]
    return cone_point_from_vector(net.catalog, cone.simplex, v)


def fn_map(net: Net, n: int, x: FNPoint) -> ConePoint:
    if n < 1:
        raise HyperbolicError("n must be a positive integer")
    p = f1_map(net, x)
    if p.is_apex:
        return p
    return ConePoint(p.radius / n, p.point)


def net_point(net: Net, cone: NetCone, coords) -> FNPoint:
    """Net point with cone coordinates u - a = coords (catalog vertex order)."""
    lengths = {c: math.exp(-2.0 * (net.apex_level + float(v))) for c, v in zip(cone.curves, coords)}
    return cone.base_point.with_lengths(lengths)


def _ball_sample(rng, dim, r):
    """Uniform point of the positive orthant part of the radius-r ball."""
    g = np.abs(rng.standard_normal(dim))
    g /= np.linalg.norm(g)
    return g * r * rng.uniform() ** (1.0 / dim)


def sample_net_pairs(net: Net, r: float, samples: int, seed: int):
    """Seeded pairs of net points: cones uniform, cone coordinates uniform in the ball."""
    rng = np.random.default_rng(seed)
    out = []
    for _ in range(samples):
        pair = []
        for _ in range(2):
            cone = net.cones[rng.integers(len(net.cones))]
            pair.append(net_point(net, cone, _ball_sample(rng, len(cone.curves), r)))
        out.append(tuple(pair))
    return out


@dataclass(frozen=True)
class DistortionReport:
    n: int
    radius: float
    samples: int
    sup_defect: float
    seed: int
    mean_defect: float = 0.0
    route_histogram: dict = field(default_factory=dict)


def estimate_distortion(net: Net, ns, radius: float, samples: int, seed: int,
                        metric: ModelMetric | None = None) -> list[DistortionReport]:
    """sup |d_model / n - d_C(f_n x, f_n y)| over one seeded sample, for each n.

    The same pairs are used for every n.
    """
    if isinstance(ns, int):
        ns = [ns]
    metric = metric or ModelMetric(net.epsilon, "thin", 1.0, net.catalog)
    if metric.catalog is None:
        metric = ModelMetric(metric.epsilon, metric.mode, metric.d1, net.catalog)
    pairs = sample_net_pairs(net, radius, samples, seed)
    dm = np.empty(len(pairs))
    images = []
    routes = Counter()
    for i, (x, y) in enumerate(pairs):
        res = model_distance(x, y, metric)
        dm[i] = res.distance
        routes[res.route] += 1
        images.append((f1_map(net, x), f1_map(net, y)))
    reports = []
    for n in ns:
        dc = np.array([
            cone_distance(_scaled(a, n), _scaled(b, n), net.catalog) for a, b in images
        ])
        defect = np.abs(dm / n - dc)
        reports.append(DistortionReport(
            int(n), float(radius), len(pairs), float(defect.max()) if len(pairs) else 0.0,
            int(seed), float(defect.mean()) if len(pairs) else 0.0, dict(sorted(routes.items())),
        ))
    return reports


def _scaled(p: ConePoint, n: int) -> ConePoint:
    return p if p.is_apex else ConePoint(p.radius / n, p.point)


@dataclass(frozen=True)
class FlatProbeReport:
    radius: float
    sides: tuple[float, ...]
    diagonals: tuple[float, ...]
    ratio: float
    deviation: float
    bound: float


def flat_sector_probe(net: Net, r: float, metric: ModelMetric | None = None, seed: int = 0) -> FlatProbeReport:
    """Side and diagonal model lengths of a square of side r in one net cone.

    The square spans [2.5r, 3.5r] x [r, 2r] in the first two cone coordinates
    with the rest at r/2, so its corners are ordered alike and no symmetry of
    the cone folds it.  Corner twists are random (seed); the model absorbs them.
    """
    d = net.catalog.surface.get("complexity", net.rank)
    if d < 2:
        raise HyperbolicError("flat sector probe needs d(S) >= 2")
    metric = metric or ModelMetric(net.epsilon, "thin", 1.0, net.catalog)
    rng = np.random.default_rng(seed)
    cone = net.cones[0]
    k = len(cone.curves)
    corners = []
    for dx, dy in ((0, 0), (1, 0), (1, 1), (0, 1)):
        v = np.full(k, r / 2.0)
        v[0] = (2.5 + dx) * r
        v[1] = (1.0 + dy) * r
        x = net_point(net, cone, v)
        tw = tuple(rng.uniform() * l for l in x.lengths)
        corners.append(FNPoint(x.pd, x.lengths, tw))
    dist = lambda i, j: model_distance(corners[i], corners[j], metric).distance
    sides = tuple(dist(i, (i + 1) % 4) for i in range(4))
    diags = (dist(0, 2), dist(1, 3))
    ratio = float(np.mean(diags) / np.mean(sides))
    return FlatProbeReport(float(r), sides, diags, ratio, abs(ratio - math.sqrt(2.0)), 4.0 * metric.d1 / r)
