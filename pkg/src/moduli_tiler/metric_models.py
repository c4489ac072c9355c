"""Bi-Lipschitz model metric on thin parts and a coarse distance estimator.

Chart on a thin tile Thin(sigma): for each short curve the twist fraction
``theta~ = theta / l`` and ``u = -log l^(1/2)``; every other Fenchel-Nielsen
coordinate goes into the thick factor ``s``.  Each short curve contributes
the factor ``e^(-6u) dtheta~^2 + du^2``, which is a rescaled hyperbolic
half-plane under ``(x, y) = (3 theta~, e^(3u))``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .cone_complex import APEX, ConePoint, SphericalComplex, cone_distance, cone_point_from_vector
from .hyperbolic import EPSILON_0, FNPoint, HyperbolicError, u_coordinate
from .tiling import Tile, classify_tile

__all__ = [
    "MODES",
    "ModelMetric",
    "TangentSample",
    "DistanceResult",
    "model_norm",
    "horoball_distance",
    "project_u",
    "path_length",
    "model_distance",
    "cone_image",
    "chart",
]

MODES = ("thin", "wp", "mcm")


@dataclass(frozen=True)
class ModelMetric:
    epsilon: float = EPSILON_0
    mode: str = "thin"
    d1: float = 1.0
    catalog: SphericalComplex | None = field(default=None, compare=False, repr=False)

    def __post_init__(self):
        if not (0 < self.epsilon <= EPSILON_0):
            raise HyperbolicError(f"epsilon must lie in (0, {EPSILON_0}]")
        if not self.d1 > 0:
            raise HyperbolicError("D1 must be positive")
        if self.mode not in MODES:
            raise HyperbolicError(f"mode must be one of {MODES}")


@dataclass(frozen=True)
class TangentSample:
    """Tangent vector at ``base``: (dtheta~, du) per curve of sigma plus a thick norm."""

    base: FNPoint
    sigma: tuple[str, ...]
    components: tuple[tuple[float, float], ...]
    thick: float = 0.0


def _quadratic_terms(mode, l, u, dth, du, eps):
    """Per-curve contribution to the squared norm."""
    if mode == "thin":
        return math.exp(-6.0 * u) * dth * dth + du * du
    wp = l ** 3 * dth * dth + l * du * du
    if mode == "wp":
        return wp
    if l < eps:
        # |d log l|^2 = 4 du^2 plus the matching twist part
        wp += 4.0 * du * du + 4.0 * l * l * dth * dth
    return wp


def model_norm(v: TangentSample, mode: str = "thin", eps: float = EPSILON_0) -> float:
    total = v.thick * v.thick
    for cid, (dth, du) in zip(v.sigma, v.components):
        l = v.base.length(cid)
        total += _quadratic_terms(mode, l, u_coordinate(l), dth, du, eps)
    return math.sqrt(total)


def horoball_distance(p1, p2) -> float:
    """Exact distance for e^(-6u) dtheta^2 + du^2 between (theta, u) pairs."""
    (t1, u1), (t2, u2) = p1, p2
    du = u1 - u2
    h = math.sinh(1.5 * du)
    s2 = 2.25 * (t1 - t2) ** 2 * math.exp(-3.0 * (u1 + u2)) + h * h
    return (2.0 / 3.0) * math.asinh(math.sqrt(s2))


def project_u(x: FNPoint, sigma) -> np.ndarray:
    return np.array([u_coordinate(x.length(c)) for c in sigma])


def chart(x: FNPoint, sigma):
    """(theta~, u) per curve of sigma and the remaining coordinates s."""
    tw = np.array([x.twist(c) / x.length(c) for c in sigma])
    u = project_u(x, sigma)
    rest = [i for i, c in enumerate(x.pd.curve_ids) if c not in sigma]
    s = np.array([x.lengths[i] for i in rest] + [x.twists[i] for i in rest])
    return tw, u, s


def _segment_norm(mode, eps, a, b, t):
    """Model norm of the chart velocity at parameter t on the segment a -> b."""
    (tw0, u0, s0), (tw1, u1, s1) = a, b
    u = u0 + t * (u1 - u0)
    l = np.exp(-2.0 * u)
    dth, du = tw1 - tw0, u1 - u0
    total = float(np.sum((s1 - s0) ** 2))
    for k in range(len(u)):
        total += _quadratic_terms(mode, l[k], u[k], dth[k], du[k], eps)
    return math.sqrt(total)


def _segment_length(mode, eps, a, b, rtol=1e-6, max_level=20):
    n = 1
    prev = _segment_norm(mode, eps, a, b, 0.5)
    for _ in range(max_level):
        n *= 2
        ts = (np.arange(n) + 0.5) / n
        cur = sum(_segment_norm(mode, eps, a, b, t) for t in ts) / n
        if abs(cur - prev) <= rtol * max(abs(cur), 1e-300):
            return cur
        prev = cur
    return prev


def path_length(path, mode: str = "thin", eps: float = EPSILON_0, rtol: float = 1e-6) -> float:
    """Model length of a chart-linear polyline inside one thin tile."""
    if len(path) < 2:
        return 0.0
    tiles = [classify_tile(x, eps) for x in path]
    first = tiles[0]
    if first.is_thick:
        raise HyperbolicError("path vertex 0 is not in a thin tile")
    for i, t in enumerate(tiles):
        if t.is_thick or t.sigma != first.sigma or path[i].pd != path[0].pd:
            raise HyperbolicError(f"path leaves the tile at vertex {i}")
    pts = [chart(x, first.sigma) for x in path]
    return sum(_segment_length(mode, eps, pts[i], pts[i + 1], rtol) for i in range(len(pts) - 1))


def cone_image(tile: Tile, catalog: SphericalComplex) -> ConePoint:
    """Cone point with octant coordinates equal to the tile's cone coordinates."""
    if tile.is_thick:
        return APEX
    for s in catalog.simplices.values():
        if s.type_label == tile.type_label:
            return cone_point_from_vector(catalog, s.id, tile.cone_coords)
    raise HyperbolicError(f"type {tile.type_label!r} missing from the catalog")


@dataclass(frozen=True)
class DistanceResult:
    distance: float
    route: str
    routes: dict
    per_factor: tuple[float, ...] = ()


def _wrap(d: float) -> float:
    """Twist-fraction difference reduced mod full twists to [-1/2, 1/2]."""
    return d - math.floor(d + 0.5)


def model_distance(x: FNPoint, y: FNPoint, metric: ModelMetric = ModelMetric(),
                   tiles: tuple[Tile, Tile] | None = None) -> DistanceResult:
    """Minimum over the same-tile, through-thick and through-cone routes."""
    eps = metric.epsilon
    tx, ty = tiles if tiles is not None else (classify_tile(x, eps), classify_tile(y, eps))
    routes = {}
    per_factor: tuple[float, ...] = ()
    if x == y:
        return DistanceResult(0.0, "same_tile", {"same_tile": 0.0}, tuple(0.0 for _ in tx.sigma))
    if x.pd == y.pd and tx.sigma == ty.sigma:
        twx, ux, sx = chart(x, tx.sigma)
        twy, uy, sy = chart(y, ty.sigma)
        thick = min(metric.d1, float(np.linalg.norm(sx - sy)))
        if metric.mode == "thin":
            per_factor = tuple(
                horoball_distance((0.0, ux[k]), (_wrap(twy[k] - twx[k]), uy[k])) for k in range(len(ux))
            )
        else:
            per_factor = tuple(
                _segment_length(metric.mode, eps,
                                (np.zeros(1), ux[k:k + 1], np.zeros(0)),
                                (np.array([_wrap(twy[k] - twx[k])]), uy[k:k + 1], np.zeros(0)))
                for k in range(len(ux))
            )
        routes["same_tile"] = math.sqrt(sum(h * h for h in per_factor) + thick * thick)
    rx = math.sqrt(sum(max(c, 0.0) ** 2 for c in tx.cone_coords))
    ry = math.sqrt(sum(max(c, 0.0) ** 2 for c in ty.cone_coords))
    routes["through_thick"] = rx + metric.d1 + ry
    if metric.catalog is not None:
        cx, cy = cone_image(tx, metric.catalog), cone_image(ty, metric.catalog)
        routes["through_cone"] = cone_distance(cx, cy, metric.catalog) + metric.d1
    route = min(routes, key=lambda k: (routes[k], k))
    return DistanceResult(routes[route], route, routes, per_factor)
