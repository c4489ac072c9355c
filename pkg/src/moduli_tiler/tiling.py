"""Short curves, the short simplex and thick/thin tile classification."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .hyperbolic import (
    COLLAR_CONSTANT,
    EPSILON_0,
    CurveClass,
    FNPoint,
    HyperbolicError,
    batch_traces,
    build_holonomy,
    curve_word,
    u_coordinate,
)
from .surface_topology import CutSurface, PantsDecomposition, cut_surface, multicurve_type, vertex_order

__all__ = [
    "ShortCurveReport",
    "Tile",
    "StabilizerProfile",
    "IncompleteEnumeration",
    "NotAdapted",
    "apex_level",
    "enumerate_short_geodesics",
    "short_words",
    "short_simplex",
    "classify_tile",
    "stabilizer_profile",
]

DEFAULT_WORD_BOUND = 6


class IncompleteEnumeration(HyperbolicError):
    pass


class NotAdapted(HyperbolicError):
    pass


def apex_level(eps: float) -> float:
    """a = -log(eps^(1/2))."""
    return u_coordinate(eps)


@dataclass(frozen=True)
class ShortCurveReport:
    epsilon: float
    curves: tuple[tuple[CurveClass, float], ...]
    word_bound: int
    complete: bool
    pants_curves: tuple[str | None, ...] = ()  # pants-curve id per entry, None if not a pants curve


def _check_eps(eps, upper, name):
    if not (eps > 0 and eps <= upper):
        raise HyperbolicError(f"epsilon must lie in (0, {name}], got {eps}")


def collar_certificate(x: FNPoint, eps: float) -> bool:
    """True when no curve shorter than eps can cross a pants curve.

    Two crossing geodesics satisfy sinh(l1/2) sinh(l2/2) >= 1, so if every
    pants curve has sinh(l/2) sinh(eps/2) < 1, a curve shorter than eps is
    disjoint from all of them and is therefore a pants curve.
    """
    se = math.sinh(eps / 2.0)
    return all(math.sinh(l / 2.0) * se < 1.0 for l in x.lengths)


def short_words(x: FNPoint, eps: float, word_bound: int) -> list[tuple[CurveClass, float]]:
    """All primitive classes of word length <= word_bound with length < eps."""
    hol = build_holonomy(x)
    words, tr = batch_traces(hol, word_bound)
    a = np.abs(tr)
    limit = 2.0 * math.cosh(eps / 2.0)
    hits = np.nonzero((a < limit) & (a > 2.0 + 1e-9))[0]
    out = [(CurveClass(words[i]), 2.0 * math.acosh(a[i] / 2.0)) for i in hits]
    return sorted(out, key=lambda t: (t[1], t[0].word))


def enumerate_short_geodesics(x: FNPoint, eps: float, word_bound: int = DEFAULT_WORD_BOUND) -> ShortCurveReport:
    if word_bound < 1:
        raise HyperbolicError("word_bound must be at least 1")
    _check_eps(eps, COLLAR_CONSTANT, "2 asinh(1)")
    pd = x.pd
    if collar_certificate(x, eps):
        found = [
            (curve_word(pd, cid), l, cid)
            for cid, l in zip(pd.curve_ids, x.lengths)
            if l < eps
        ]
        found.sort(key=lambda t: (t[1], t[0].word))
        return ShortCurveReport(
            eps, tuple((c, l) for c, l, _ in found), word_bound, True, tuple(cid for *_, cid in found)
        )
    # some pants curve is long enough to be crossed by a short curve: search words
    pants = {curve_word(pd, cid).word: cid for cid in pd.curve_ids}
    found = {}
    for cid, l in zip(pd.curve_ids, x.lengths):
        if l < eps:
            found[curve_word(pd, cid).word] = (l, cid)
    for c, l in short_words(x, eps, word_bound):
        if c.word not in found:
            found[c.word] = (l, pants.get(c.word))
    items = sorted(found.items(), key=lambda kv: (kv[1][0], kv[0]))
    return ShortCurveReport(
        eps,
        tuple((CurveClass(w), l) for w, (l, _) in items),
        word_bound,
        False,
        tuple(cid for _, (_, cid) in items),
    )


def short_simplex(x: FNPoint, eps: float, word_bound: int = DEFAULT_WORD_BOUND) -> tuple[str, ...]:
    """Pants curves shorter than eps, in catalog vertex order; () when thick."""
    rep = enumerate_short_geodesics(x, eps, word_bound)
    if not rep.complete:
        raise IncompleteEnumeration(
            f"short-curve enumeration not certified at word bound {word_bound}"
        )
    if any(cid is None for cid in rep.pants_curves):
        raise NotAdapted("a short curve is not a pants curve of this decomposition")
    if not rep.pants_curves:
        return ()
    return vertex_order(x.pd, rep.pants_curves)


@dataclass(frozen=True)
class Tile:
    kind: str  # "thick" or "thin"
    sigma: tuple[str, ...] = ()
    base_point: FNPoint | None = None
    cone_coords: tuple[float, ...] = ()
    type_label: str = ""

    @property
    def is_thick(self) -> bool:
        return self.kind == "thick"


def classify_tile(x: FNPoint, eps: float = EPSILON_0, word_bound: int = DEFAULT_WORD_BOUND) -> Tile:
    """Thick when no curve is shorter than eps; otherwise the outer cone of sigma(x).

    Lengths equal to eps count as thick.
    """
    _check_eps(eps, EPSILON_0, "0.1")
    sigma = short_simplex(x, eps, word_bound)
    if not sigma:
        return Tile("thick")
    a = apex_level(eps)
    coords = tuple(u_coordinate(x.length(c)) - a for c in sigma)
    base = x.with_lengths({c: eps for c in sigma})
    return Tile("thin", sigma, base, coords, multicurve_type(x.pd, sigma))


@dataclass(frozen=True)
class StabilizerProfile:
    twist_rank: int
    cut_type: CutSurface
    is_torus_face: bool


def stabilizer_profile(pd: PantsDecomposition, sigma) -> StabilizerProfile:
    cut = cut_surface(pd, sigma)
    top = len(sigma) == len(pd.curves)
    return StabilizerProfile(len(sigma), cut, top)
