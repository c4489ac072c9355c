"""All-right piecewise-spherical complexes and the Euclidean cone over them.

A simplex of dimension k is realized as the positive orthant of the unit
sphere in R^(k+1); its i-th vertex is the i-th basis vector.  A point with
barycentric coordinates b has direction b / |b|.  Complexes are
semi-simplicial: face i deletes vertex i, and a simplex may meet itself
along faces (loops appear in quotient catalogs).  A simplex may also carry
a group of vertex permutations; points related by it are the same point
of the quotient.

Distances below pi are computed exactly by developing galleries into the
sphere: crossing face i flips the sign of the axis of vertex i, and a
great-circle arc is accepted only if it crosses the flipped axes in
gallery order.  Shortest paths may also bend at vertices, so routes with
one or two vertex bends are added.  A graph on a lattice refinement gives
an independent upper bound.
"""

from __future__ import annotations

import functools
import itertools
import json
import math
import os
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

import numpy as np
from scipy.optimize import minimize, minimize_scalar
from scipy.sparse.csgraph import floyd_warshall

__all__ = [
    "Simplex",
    "SphericalComplex",
    "ComplexPoint",
    "ConePoint",
    "DistanceEstimate",
    "ComplexError",
    "APEX",
    "load_complex",
    "complex_from_dict",
    "builtin_catalog",
    "catalog_dir",
    "complex_distance",
    "cone_distance",
    "geodesic_midpoint",
    "comparison_defect",
    "octant_gluing",
    "random_cone_point",
]

CATALOG_ENV = "MODULI_TILER_CATALOG_DIR"


class ComplexError(ValueError):
    pass


@dataclass(frozen=True)
class Simplex:
    id: str
    dim: int
    type_label: str
    vertex_labels: tuple[str, ...]
    faces: tuple[str, ...]
    source: dict | None = field(default=None, compare=False, hash=False, repr=False)
    symmetries: tuple[tuple[int, ...], ...] = ()

    @property
    def group(self) -> tuple[tuple[int, ...], ...]:
        return self.symmetries or (tuple(range(self.dim + 1)),)


class SphericalComplex:
    """Validated semi-simplicial complex with all-right spherical simplices."""

    def __init__(self, simplices, surface=None, labeled_punctures=False, multiplicity=None, name=""):
        self.simplices: dict[str, Simplex] = {s.id: s for s in simplices}
        if len(self.simplices) != len(simplices):
            raise ComplexError("duplicate simplex ids")
        self.surface = surface or {}
        self.labeled_punctures = labeled_punctures
        self.multiplicity = multiplicity
        self.name = name
        self._validate()
        self.dim = max(s.dim for s in self.simplices.values())
        faces_of = {f for s in self.simplices.values() for f in s.faces}
        self.maximal = tuple(sid for sid in self.simplices if sid not in faces_of)
        self.vertices = tuple(sid for sid, s in self.simplices.items() if s.dim == 0)
        self._combo_cache: dict = {}

    def _validate(self):
        if not self.simplices:
            raise ComplexError("empty complex")
        for s in self.simplices.values():
            where = f"simplices[{s.id}]"
            want = s.dim + 1 if s.dim > 0 else 0
            if len(s.faces) != want:
                raise ComplexError(f"{where}: expected {want} face maps, found {len(s.faces)}")
            if len(s.vertex_labels) != s.dim + 1:
                raise ComplexError(f"{where}: expected {s.dim + 1} vertex labels")
            for f in s.faces:
                if f not in self.simplices:
                    raise ComplexError(f"{where}: face {f!r} is not a simplex of the catalog")
                if self.simplices[f].dim != s.dim - 1:
                    raise ComplexError(f"{where}: face {f!r} has the wrong dimension")
            # simplicial identities d_i d_j = d_{j-1} d_i for i < j
            if s.dim >= 2:
                for j in range(s.dim + 1):
                    for i in range(j):
                        a = self.simplices[s.faces[j]].faces[i]
                        b = self.simplices[s.faces[i]].faces[j - 1]
                        if a != b:
                            raise ComplexError(f"{where}: face maps {i},{j} are not compatible")
            self._validate_group(s, where)
            for k in range(s.dim + 1):
                v = self.vertex(s.id, k)
                if self.simplices[v].type_label != s.vertex_labels[k]:
                    raise ComplexError(f"{where}: vertex {k} label does not match face maps")
        d = self.surface.get("complexity")
        if d is not None and max(s.dim for s in self.simplices.values()) > d - 1:
            raise ComplexError("dimension exceeds d(S) - 1")
        parent = {sid: sid for sid in self.simplices}

        def find(a):
            while parent[a] != a:
                a = parent[a]
            return a

        for s in self.simplices.values():
            for f in s.faces:
                parent[find(f)] = find(s.id)
        if len({find(sid) for sid in self.simplices}) != 1:
            raise ComplexError("complex is disconnected")

    def _validate_group(self, s, where):
        n = s.dim + 1
        ident = tuple(range(n))
        group = set(s.group)
        if ident not in group:
            raise ComplexError(f"{where}: symmetries must include the identity")
        for g in group:
            if sorted(g) != list(ident):
                raise ComplexError(f"{where}: symmetry {list(g)} is not a permutation")
            for h in group:
                if tuple(g[h[k]] for k in range(n)) not in group:
                    raise ComplexError(f"{where}: symmetries are not closed under composition")
            for i, f in enumerate(s.faces):
                if s.faces[g[i]] != f:
                    raise ComplexError(f"{where}: symmetry {list(g)} does not preserve faces")
                if _induced(g, i) not in set(self.simplices[f].group):
                    raise ComplexError(f"{where}: symmetry {list(g)} is not a symmetry of face {f}")

    # -- combinatorics --

    def vertex(self, sid: str, k: int) -> str:
        s = self.simplices[sid]
        while s.dim > 0:
            if k < s.dim:
                s = self.simplices[s.faces[s.dim]]
            else:
                s = self.simplices[s.faces[0]]
                k -= 1
        return s.id

    def face_of(self, sid: str, keep: tuple[int, ...]) -> str:
        """The face spanned by the vertex positions in ``keep`` (increasing)."""
        s = self.simplices[sid]
        for i in sorted(set(range(s.dim + 1)) - set(keep), reverse=True):
            sid = self.simplices[sid].faces[i]
        return sid

    @functools.cached_property
    def is_pure(self) -> bool:
        return all(self.simplices[m].dim == self.dim for m in self.maximal)

    def embeddings(self, carrier: str, top: str) -> list[tuple[int, ...]]:
        """Vertex positions of ``top`` whose face is ``carrier``."""
        k = self.simplices[carrier].dim
        n = self.simplices[top].dim
        return [pos for pos in itertools.combinations(range(n + 1), k + 1) if self.face_of(top, pos) == carrier]

    @functools.cached_property
    def cofaces(self) -> dict:
        """For each face id: list of (simplex, position) with simplex.faces[position] == face."""
        out: dict[str, list] = {}
        for s in self.simplices.values():
            for i, f in enumerate(s.faces):
                out.setdefault(f, []).append((s.id, i))
        return out

    @functools.cached_property
    def galleries(self) -> dict:
        """Developments starting at each maximal simplex.

        A gallery is (steps, flips): steps[m] = (simplex, axes, signs) maps
        vertex positions of the m-th simplex to signed ambient axes; flips
        lists the axes crossed, in order.  No axis is crossed twice.
        """
        out = {}
        for t0 in self.maximal:
            n = self.simplices[t0].dim
            start = ((t0, tuple(range(n + 1)), (1,) * (n + 1)),)
            found = []
            seen = set()
            stack = [(start, ())]
            while stack:
                steps, flips = stack.pop()
                key = (steps[-1], flips)
                if key in seen:
                    continue
                seen.add(key)
                found.append((steps, flips))
                sid, axes, signs = steps[-1]
                for i, f in enumerate(self.simplices[sid].faces):
                    ax = axes[i]
                    if ax in flips:
                        continue
                    fgroup = self.simplices[f].group
                    for nid, j in self.cofaces[f]:
                        for h in fgroup:
                            if (nid, j) == (sid, i) and h == fgroup[0]:
                                continue
                            m = self.simplices[nid].dim
                            na, ns = [0] * (m + 1), [0] * (m + 1)
                            na[j], ns[j] = ax, -signs[i]
                            for p in range(m + 1):
                                if p == j:
                                    continue
                                fi = h[p if p < j else p - 1]
                                q = fi if fi < i else fi + 1
                                na[p], ns[p] = axes[q], signs[q]
                            step = (nid, tuple(na), tuple(ns))
                            stack.append((steps + (step,), flips + (ax,)))
            out[t0] = found
        return out

    def combos(self, t0: str, carrier: str):
        """Arrays describing every gallery from t0 ending at a simplex containing carrier."""
        key = (t0, carrier)
        if key not in self._combo_cache:
            n = self.simplices[t0].dim
            rows = []
            for g, (steps, flips) in enumerate(self.galleries[t0]):
                end, axes, signs = steps[-1]
                for pos in self.orbit_embeddings(carrier, end):
                    rows.append((g, [axes[p] for p in pos], [signs[p] for p in pos], flips))
            k = self.simplices[carrier].dim + 1
            N = len(rows)
            gal = np.array([r[0] for r in rows], dtype=int)
            ax = np.array([r[1] for r in rows], dtype=int).reshape(N, k)
            sg = np.array([r[2] for r in rows], dtype=float).reshape(N, k)
            fl = np.full((N, n + 1), -1, dtype=int)
            for r, row in enumerate(rows):
                fl[r, : len(row[3])] = row[3]
            self._combo_cache[key] = (gal, ax, sg, fl)
        return self._combo_cache[key]

    @functools.lru_cache(maxsize=None)
    def orbit_embeddings(self, carrier: str, top: str) -> tuple[tuple[int, ...], ...]:
        """Embeddings of carrier in top, up to the symmetries of both."""
        out = set()
        hs = self.simplices[carrier].group
        for pos in self.embeddings(carrier, top):
            for g in self.simplices[top].group:
                for h in hs:
                    out.add(tuple(g[pos[h[k]]] for k in range(len(pos))))
        return tuple(sorted(out))

    def start_embeddings(self, carrier: str):
        out = []
        for t in self.maximal:
            for pos in self.embeddings(carrier, t):
                out.append((t, pos))
        return out

    def to_dict(self) -> dict:
        return {
            "surface": self.surface,
            "labeled_punctures": self.labeled_punctures,
            "multiplicity": self.multiplicity,
            "simplices": [
                {
                    "id": s.id,
                    "dim": s.dim,
                    "type_label": s.type_label,
                    "vertex_labels": list(s.vertex_labels),
                    "faces": list(s.faces),
                    "symmetries": [list(g) for g in s.group],
                    **({"source": s.source} if s.source is not None else {}),
                }
                for s in self.simplices.values()
            ],
        }

    def canonical_form(self) -> tuple:
        """Id-free description; equal for isomorphic catalogs."""
        lab = {sid: s.type_label for sid, s in self.simplices.items()}
        return tuple(sorted(
            (s.dim, s.type_label, s.vertex_labels, tuple(lab[f] for f in s.faces),
             tuple(sorted(s.group)))
            for s in self.simplices.values()
        ))


def complex_from_dict(data: dict, name: str = "") -> SphericalComplex:
    if not isinstance(data, dict) or "simplices" not in data:
        raise ComplexError("catalog: missing 'simplices'")
    simplices = []
    for k, rec in enumerate(data["simplices"]):
        try:
            simplices.append(Simplex(
                str(rec["id"]),
                int(rec["dim"]),
                str(rec.get("type_label", rec["id"])),
                tuple(rec.get("vertex_labels") or [str(rec["id"])] * (int(rec["dim"]) + 1)),
                tuple(rec.get("faces", [])),
                rec.get("source"),
                tuple(tuple(int(i) for i in g) for g in rec.get("symmetries", [])),
            ))
        except (KeyError, TypeError, ValueError) as exc:
            raise ComplexError(f"catalog: simplices[{k}]: {exc!r}") from exc
    return SphericalComplex(
        simplices,
        data.get("surface"),
        bool(data.get("labeled_punctures", False)),
        data.get("multiplicity"),
        name,
    )


def load_complex(path) -> SphericalComplex:
    path = Path(path)
    with path.open(encoding="utf-8") as fh:
        try:
            data = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ComplexError(f"{path}:{exc.lineno}: {exc.msg}") from exc
    try:
        return complex_from_dict(data, path.stem)
    except ComplexError as exc:
        raise ComplexError(f"{path}: {exc}") from exc


def catalog_dir() -> Path:
    env = os.environ.get(CATALOG_ENV)
    if env:
        return Path(env)
    return Path(str(resources.files("moduli_tiler") / "data" / "catalogs"))


@functools.lru_cache(maxsize=None)
def _cached_catalog(path: str) -> SphericalComplex:
    return load_complex(path)


def builtin_catalog(name: str) -> SphericalComplex:
    path = catalog_dir() / f"{name}.json"
    if not path.is_file():
        raise FileNotFoundError(f"catalog {name!r} not found in {path.parent}")
    return _cached_catalog(str(path))


# --- points -----------------------------------------------------------------------

@dataclass(frozen=True)
class ComplexPoint:
    """A point of |K|: carrier simplex plus positive barycentric coordinates."""

    simplex: str
    coords: tuple[float, ...]

    @property
    def direction(self) -> np.ndarray:
        v = np.asarray(self.coords, dtype=float)
        return v / np.linalg.norm(v)


def _induced(g, i):
    """Permutation of face i's vertices induced by a symmetry g with g(i) = i'."""
    n = len(g)
    gi = g[i]
    out = []
    for f in range(n - 1):
        q = f if f < i else f + 1
        gq = g[q]
        out.append(gq if gq < gi else gq - 1)
    return tuple(out)


def make_point(K: SphericalComplex, sid: str, coords) -> ComplexPoint:
    """Normalize coordinates and move the point to its carrier face."""
    c = [float(v) for v in coords]
    if len(c) != K.simplices[sid].dim + 1:
        raise ComplexError(f"simplex {sid} needs {K.simplices[sid].dim + 1} coordinates")
    if any(v < 0 or not math.isfinite(v) for v in c) or sum(c) <= 0:
        raise ComplexError("barycentric coordinates must be nonnegative and not all zero")
    while K.simplices[sid].dim > 0 and min(c) == 0.0:
        i = c.index(0.0)
        sid = K.simplices[sid].faces[i]
        del c[i]
    s = sum(c)
    c = [v / s for v in c]
    best = max(tuple(c[g[k]] for k in range(len(c))) for g in K.simplices[sid].group)
    return ComplexPoint(sid, best)


@dataclass(frozen=True)
class ConePoint:
    radius: float
    point: ComplexPoint | None = None

    @property
    def is_apex(self) -> bool:
        return self.radius == 0.0 or self.point is None


APEX = ConePoint(0.0, None)


def cone_point_from_vector(K: SphericalComplex, sid: str, vec) -> ConePoint:
    """Cone point whose octant coordinates in simplex ``sid`` are ``vec``."""
    v = np.asarray(vec, dtype=float)
    r = float(np.linalg.norm(v))
    if r == 0.0:
        return APEX
    return ConePoint(r, make_point(K, sid, v))


def random_cone_point(K: SphericalComplex, rng, rmax=1.0) -> ConePoint:
    sid = K.maximal[rng.integers(len(K.maximal))]
    n = K.simplices[sid].dim + 1
    b = rng.dirichlet(np.ones(n))
    return ConePoint(float(rng.uniform(0.0, rmax)), make_point(K, sid, b))


# --- distances on |K| ----------------------------------------------------------------

def _angle(p, q):
    """Angle between unit vectors (rows), accurate for small and large angles."""
    return 2.0 * np.arctan2(np.linalg.norm(p - q, axis=-1), np.linalg.norm(p + q, axis=-1))


@dataclass(frozen=True)
class _Leg:
    length: float
    start: str  # maximal simplex the development starts in
    gallery: int
    P: tuple
    R: tuple


def _embedded(K, p: ComplexPoint):
    """(maximal simplex, unit vector) for every way p sits in a maximal simplex."""
    d = p.direction
    out = []
    for t, pos in K.start_embeddings(p.simplex):
        v = np.zeros(K.simplices[t].dim + 1)
        v[list(pos)] = d
        out.append((t, v))
    return out


def _straight_legs(K, p: ComplexPoint, q: ComplexPoint) -> _Leg | None:
    """Shortest developed arc from p to q without vertex bends (None if none < pi)."""
    qd = q.direction
    best = None
    for t0, P in _embedded(K, p):
        gal, ax, sg, fl = K.combos(t0, q.simplex)
        if len(gal) == 0:
            continue
        n1 = P.shape[0]
        R = np.zeros((len(gal), n1))
        np.put_along_axis(R, ax, sg * qd[None, :], axis=1)
        L = _angle(P[None, :], R)
        cosL = R @ P
        sinL = np.sin(L)
        nflip = (fl >= 0).sum(axis=1)
        ok = L < math.pi - 1e-12
        safe = np.where(sinL > 1e-300, sinL, 1.0)
        W = (R - cosL[:, None] * P[None, :]) / safe[:, None]
        idx = np.where(fl >= 0, fl, 0)
        Rf = np.take_along_axis(R, idx, axis=1)
        Wf = np.take_along_axis(W, idx, axis=1)
        Pf = P[idx]
        valid_col = fl >= 0
        ok &= np.all(~valid_col | (Rf < 0.0), axis=1)
        ok &= (nflip == 0) | (sinL > 1e-300)
        t = np.arctan2(Pf, -Wf)
        t = np.where(valid_col, t, np.inf)
        if n1 > 1:
            later = valid_col[:, 1:]
            ok &= np.all(~later | (t[:, 1:] >= t[:, :-1] - 1e-12), axis=1)
        if not ok.any():
            continue
        cand = np.where(ok, L, np.inf)
        i = int(np.argmin(cand))
        if best is None or cand[i] < best.length:
            best = _Leg(float(cand[i]), t0, int(gal[i]), tuple(P), tuple(R[i]))
    return best


def _vertex_point(K, v):
    return ComplexPoint(v, (1.0,))


@dataclass(frozen=True)
class _Path:
    length: float
    legs: tuple  # of _Leg


def _vv_legs(K):
    key = "_vv"
    if key not in K._combo_cache:
        vs = K.vertices
        table = {}
        for a in vs:
            for b in vs:
                table[a, b] = None if a == b else _straight_legs(K, _vertex_point(K, a), _vertex_point(K, b))
        K._combo_cache[key] = table
    return K._combo_cache[key]


def _shortest_path(K, p: ComplexPoint, q: ComplexPoint) -> _Path | None:
    if p == q:
        return _Path(0.0, ())
    best = None
    direct = _straight_legs(K, p, q)
    if direct is not None:
        best = _Path(direct.length, (direct,))
    if K.dim >= 1:
        vs = K.vertices
        lp = {v: (_Path(0.0, ()) if p == _vertex_point(K, v) else None) for v in vs}
        lq = {v: (_Path(0.0, ()) if q == _vertex_point(K, v) else None) for v in vs}
        for v in vs:
            if lp[v] is None:
                leg = _straight_legs(K, p, _vertex_point(K, v))
                lp[v] = _Path(leg.length, (leg,)) if leg else None
            if lq[v] is None:
                leg = _straight_legs(K, _vertex_point(K, v), q)
                lq[v] = _Path(leg.length, (leg,)) if leg else None
        vv = _vv_legs(K)
        for a in vs:
            for b in vs:
                if lp[a] is None or lq[b] is None:
                    continue
                mid = vv[a, b]
                if a != b and mid is None:
                    continue
                mlen = 0.0 if a == b else mid.length
                total = lp[a].length + mlen + lq[b].length
                if best is None or total < best.length:
                    legs = lp[a].legs + (() if a == b else (mid,)) + lq[b].legs
                    best = _Path(total, legs)
    return best


@dataclass(frozen=True)
class DistanceEstimate:
    value: float
    upper: float
    error_bound: float
    exact: bool


def _point_key(p: ComplexPoint):
    return (p.simplex, p.coords)


def complex_distance(K: SphericalComplex, p: ComplexPoint, q: ComplexPoint, refinement: int | None = None) -> DistanceEstimate:
    """Path distance on |K|.

    ``value`` is exact below pi.  When ``refinement`` is given, ``upper`` is
    the refinement-graph bound (non-increasing in refinement) and
    ``error_bound`` the gap between the two.
    """
    if _point_key(q) < _point_key(p):
        p, q = q, p
    if K.dim == 0:
        v = 0.0 if p == q else math.inf
        return DistanceEstimate(v, v, 0.0, True)
    if refinement is None:
        memo = K._combo_cache.setdefault("_dist", {})
        if (p, q) not in memo:
            if len(memo) >= _MEMO_LIMIT:
                memo.clear()
            memo[p, q] = _complex_distance(K, p, q, None)
        return memo[p, q]
    return _complex_distance(K, p, q, refinement)


_MEMO_LIMIT = 1 << 17


def _complex_distance(K, p, q, refinement):
    path = _shortest_path(K, p, q)
    exact_val = path.length if path is not None and path.length < math.pi else None
    upper = math.inf
    if refinement is not None:
        upper = _graph_distance(K, p, q, refinement)
    if exact_val is not None:
        if refinement is None:
            return DistanceEstimate(exact_val, exact_val, 0.0, True)
        value = min(exact_val, upper)
        return DistanceEstimate(value, upper, upper - value, True)
    if not math.isfinite(upper):
        upper = _graph_distance(K, p, q, 4)
    if path is not None:
        upper = min(upper, path.length)
    return DistanceEstimate(upper, upper, 0.0, False)


# --- refinement graph ---------------------------------------------------------------

def _compositions(total, parts):
    if parts == 1:
        yield (total,)
        return
    for i in range(total + 1):
        for rest in _compositions(total - i, parts - 1):
            yield (i,) + rest


@functools.lru_cache(maxsize=64)
def _lattice(K_id, refinement):
    K = _LATTICE_OWNERS[K_id]
    nodes = {}
    members = {}
    for t in K.maximal:
        n = K.simplices[t].dim + 1
        ids = []
        for comp in _compositions(refinement, n):
            pt = make_point(K, t, comp)
            key = _point_key(pt)
            if key not in nodes:
                nodes[key] = len(nodes)
            ids.append((nodes[key], np.asarray(comp, dtype=float) / np.linalg.norm(comp)))
        members[t] = ids
    N = len(nodes)
    W = np.full((N, N), np.inf)
    np.fill_diagonal(W, 0.0)
    for t, ids in members.items():
        idx = np.array([i for i, _ in ids])
        vec = np.stack([v for _, v in ids])
        ang = _angle(vec[:, None, :], vec[None, :, :])
        sub = W[np.ix_(idx, idx)]
        W[np.ix_(idx, idx)] = np.minimum(sub, ang)
    D = floyd_warshall(W)
    return members, D


_LATTICE_OWNERS: dict[int, SphericalComplex] = {}


def _graph_distance(K, p, q, refinement) -> float:
    if refinement < 1:
        raise ComplexError("refinement must be a positive integer")
    _LATTICE_OWNERS[id(K)] = K
    members, D = _lattice(id(K), refinement)
    best = math.inf
    ep, eq = _embedded(K, p), _embedded(K, q)
    for t1, P in ep:
        for t2, Q in eq:
            if t1 == t2:
                best = min(best, float(_angle(P, Q)))
    for t1, P in ep:
        i1 = np.array([i for i, _ in members[t1]])
        d1 = _angle(np.stack([v for _, v in members[t1]]), P[None, :])
        for t2, Q in eq:
            i2 = np.array([i for i, _ in members[t2]])
            d2 = _angle(np.stack([v for _, v in members[t2]]), Q[None, :])
            tot = d1[:, None] + D[np.ix_(i1, i2)] + d2[None, :]
            best = min(best, float(tot.min()))
    return best


# --- the cone ---------------------------------------------------------------------

def _cone_formula(a, b, theta):
    if theta >= math.pi:
        return a + b
    s = math.sin(theta / 2.0)
    return math.sqrt((a - b) ** 2 + 4.0 * a * b * s * s)


def cone_distance(u: ConePoint, v: ConePoint, K: SphericalComplex) -> float:
    """d^2 = a^2 + b^2 - 2ab cos(min(pi, d_K(x, y)))."""
    if u.is_apex:
        return float(v.radius)
    if v.is_apex:
        return float(u.radius)
    theta = complex_distance(K, u.point, v.point).value
    return _cone_formula(u.radius, v.radius, min(math.pi, theta))


def _point_on_leg(K, leg: _Leg, s: float) -> ComplexPoint:
    """Point at arc length s along a developed leg."""
    P = np.asarray(leg.P)
    R = np.asarray(leg.R)
    L = leg.length
    if L == 0.0:
        X = P
    else:
        W = (R - math.cos(L) * P) / math.sin(L)
        X = P * math.cos(s) + W * math.sin(s)
    steps, flips = K.galleries[leg.start][leg.gallery]
    # crossings already passed
    m = 0
    for ax in flips:
        tk = math.atan2(P[ax], -(R[ax] - math.cos(L) * P[ax]) / math.sin(L)) if L > 0 else math.inf
        if tk < s:
            m += 1
    sid, axes, signs = steps[m]
    local = [max(0.0, signs[k] * X[axes[k]]) for k in range(len(axes))]
    return make_point(K, sid, local)


def _path_point(K, path: _Path, s: float, start: ComplexPoint) -> ComplexPoint:
    if not path.legs:
        return start
    for leg in path.legs:
        if s <= leg.length or leg is path.legs[-1]:
            return _point_on_leg(K, leg, min(s, leg.length))
        s -= leg.length
    raise AssertionError("unreachable")


def geodesic_midpoint(K: SphericalComplex, u: ConePoint, v: ConePoint) -> ConePoint:
    """Midpoint of the cone geodesic from u to v, via the planar unfolding."""
    if u.is_apex or v.is_apex:
        w = v if u.is_apex else u
        return ConePoint(w.radius / 2.0, w.point) if w.radius > 0 else APEX
    swap = _point_key(v.point) < _point_key(u.point)
    p, q = (v.point, u.point) if swap else (u.point, v.point)
    a, b = (v.radius, u.radius) if swap else (u.radius, v.radius)
    path = _shortest_path(K, p, q) if K.dim > 0 else (_Path(0.0, ()) if p == q else None)
    theta = path.length if path is not None else math.inf
    if theta >= math.pi:
        r = (a - b) / 2.0
        if r == 0:
            return APEX
        return ConePoint(abs(r), p if r > 0 else q)
    X = np.array([a, 0.0])
    Y = np.array([b * math.cos(theta), b * math.sin(theta)])
    M = 0.5 * (X + Y)
    r = float(np.hypot(*M))
    if r == 0.0:
        return APEX
    phi = math.atan2(M[1], M[0])
    return ConePoint(r, _path_point(K, path, phi, p))


def comparison_defect(K: SphericalComplex, x: ConePoint, y: ConePoint, z: ConePoint) -> float:
    """d(m, z) minus its Euclidean comparison value, m the midpoint of [x, y].

    CAT(0) triples give a defect <= 0.
    """
    dxy = cone_distance(x, y, K)
    dxz = cone_distance(x, z, K)
    dyz = cone_distance(y, z, K)
    m = geodesic_midpoint(K, x, y)
    dmz = cone_distance(m, z, K)
    comp2 = 0.5 * (dxz * dxz + dyz * dyz) - 0.25 * dxy * dxy
    return dmz - math.sqrt(max(comp2, 0.0))


# --- octant realization ------------------------------------------------------------

@dataclass(frozen=True)
class OctantGluing:
    """One closed octant of R^d per maximal simplex, glued along coordinate faces.

    ``identifications`` lists (simplex, face position, other simplex, other
    position); the vertex axes of the shared face are identified in order.
    """

    complex: SphericalComplex
    octants: tuple[str, ...]
    dimension: int
    identifications: tuple[tuple[str, int, str, int], ...]

    def vector(self, u: ConePoint, top: str | None = None) -> tuple[str, np.ndarray]:
        K = self.complex
        t, P = _embedded(K, u.point)[0] if top is None else next(e for e in _embedded(K, u.point) if e[0] == top)
        return t, u.radius * P

    def _segments(self, t0, X, carrier, qvec):
        """Lengths of valid straight developed segments from X to q."""
        K = self.complex
        gal, ax, sg, fl = K.combos(t0, carrier)
        if len(gal) == 0:
            return np.inf
        Y = np.zeros((len(gal), X.shape[0]))
        np.put_along_axis(Y, ax, sg * qvec[None, :], axis=1)
        idx = np.where(fl >= 0, fl, 0)
        valid = fl >= 0
        Xf = X[idx]
        Yf = np.take_along_axis(Y, idx, axis=1)
        ok = np.all(~valid | (Yf < 0.0), axis=1)
        with np.errstate(divide="ignore", invalid="ignore"):
            s = np.where(valid, Xf / (Xf - Yf), np.inf)
        if X.shape[0] > 1:
            ok &= np.all(~valid[:, 1:] | (s[:, 1:] >= s[:, :-1] - 1e-12), axis=1)
        lens = np.linalg.norm(Y - X[None, :], axis=1)
        lens = np.where(ok, lens, np.inf)
        return float(lens.min())

    def _leg(self, xs, ys):
        """Shortest straight segment between two lists of (carrier, coords, radius)."""
        K = self.complex
        (cx, bx, rx), (cy, by, ry) = xs, ys
        if rx == 0.0 or ry == 0.0:
            return rx + ry
        best = np.inf
        px = ComplexPoint(cx, bx)
        qdir = np.asarray(by) / np.linalg.norm(by)
        for t0, P in _embedded(K, px):
            best = min(best, self._segments(t0, rx * P, cy, ry * qdir))
        return best

    def distance(self, u: ConePoint, v: ConePoint) -> float:
        """Path distance in the glued octants: straight segments, apex route, ray bends."""
        if u.is_apex or v.is_apex:
            return u.radius + v.radius
        K = self.complex
        xs = (u.point.simplex, u.point.coords, u.radius)
        ys = (v.point.simplex, v.point.coords, v.radius)
        best = min(u.radius + v.radius, self._leg(xs, ys))
        if K.dim < 2:
            return float(best)
        rays = [(w, (1.0,)) for w in K.vertices]
        hi = u.radius + v.radius
        for w, c in rays:
            f = lambda s: self._leg(xs, (w, c, s)) + self._leg((w, c, s), ys)
            res = minimize_scalar(f, bounds=(0.0, hi), method="bounded", options={"xatol": 1e-10})
            best = min(best, float(res.fun))
        # distance to each ray bounds every route bending on it
        to_ray = {}
        for w, c in rays:
            for key, pt in (("x", xs), ("y", ys)):
                f = lambda s: self._leg(pt, (w, c, s))
                to_ray[key, w] = float(minimize_scalar(f, bounds=(0.0, hi), method="bounded").fun)
        for (w1, c1), (w2, c2) in itertools.product(rays, rays):
            if to_ray["x", w1] + to_ray["y", w2] >= best - 1e-9:
                continue
            g = lambda z: (self._leg(xs, (w1, c1, abs(z[0])))
                           + self._leg((w1, c1, abs(z[0])), (w2, c2, abs(z[1])))
                           + self._leg((w2, c2, abs(z[1])), ys))
            for s0 in (0.25, 0.5, 0.75):
                res = minimize(g, x0=[s0 * hi, s0 * hi], method="Nelder-Mead",
                               options={"xatol": 1e-10, "fatol": 1e-12, "maxiter": 400})
                best = min(best, float(res.fun))
        return float(best)


def octant_gluing(K: SphericalComplex) -> OctantGluing:
    if not K.is_pure:
        raise ComplexError("octant gluing needs a pure complex")
    idents = []
    for t in K.maximal:
        for i, f in enumerate(K.simplices[t].faces):
            for other, j in K.cofaces.get(f, []):
                if (other, j) > (t, i):
                    idents.append((t, i, other, j))
    return OctantGluing(K, K.maximal, K.dim + 1, tuple(sorted(idents)))
