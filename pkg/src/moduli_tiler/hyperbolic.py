"""Fenchel-Nielsen coordinates, SL(2,R) holonomy, lengths and twist actions.

Each pants gets the normal form

    A = [[x, -1], [1, 0]],  B = [[0, s], [-1/s, y]],  C = (AB)^-1

with x, y, s + 1/s equal to -2 cosh(l_i / 2) (or -2 at a cusp), so that
the three boundary elements multiply to the identity.  A boundary slot gets
a frame whose columns are the eigenvectors of its matrix; gluing two slots
is the matrix ``F_p D(theta) R_pi F_q^-1``, which carries one boundary
element to the inverse of the other and translates by ``theta`` along the
common axis.  A full twist (theta -> theta + l) is therefore conjugation by
the boundary element itself, which is how the Dehn twist action on words is
derived.

Words are strings over per-surface letters; an uppercase letter is the
inverse of its lowercase one.  The letters, and the word for every raw
group element the construction produces, ship in the surface asset files.
"""

from __future__ import annotations

import functools
import itertools
import json
import math
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from .surface_topology import PantsDecomposition, builtin_decomposition

__all__ = [
    "FNPoint",
    "CurveClass",
    "Holonomy",
    "HyperbolicError",
    "NotHyperbolicClass",
    "COLLAR_CONSTANT",
    "EPSILON_0",
    "build_holonomy",
    "geodesic_length",
    "trace_of",
    "u_coordinate",
    "length_from_u",
    "twist_flow",
    "dehn_twist_action",
    "random_fn_point",
    "load_fn_point",
    "free_reduce",
    "cyclic_reduce",
    "invert_word",
    "canonical_word",
]

COLLAR_CONSTANT = 2.0 * math.asinh(1.0)
EPSILON_0 = 0.1
DET_TOL = 1e-9
RELATOR_TOL = 1e-7
COND_LIMIT = 1e12


class HyperbolicError(ValueError):
    pass


class NotHyperbolicClass(HyperbolicError):
    pass


# --- words ------------------------------------------------------------------

def invert_word(w: str) -> str:
    return w[::-1].swapcase()


def free_reduce(w: str) -> str:
    out: list[str] = []
    for ch in w:
        if out and out[-1] == ch.swapcase():
            out.pop()
        else:
            out.append(ch)
    return "".join(out)


def cyclic_reduce(w: str) -> str:
    w = free_reduce(w)
    i, j = 0, len(w)
    while j - i >= 2 and w[i] == w[j - 1].swapcase():
        i += 1
        j -= 1
    return w[i:j]


def _min_rotation(w: str) -> str:
    return min(w[k:] + w[:k] for k in range(len(w)))


def canonical_word(w: str) -> str:
    w = cyclic_reduce(w)
    if not w:
        return w
    return min(_min_rotation(w), _min_rotation(invert_word(w)))


def _is_proper_power(w: str) -> bool:
    n = len(w)
    return any(n % k == 0 and w[:k] * (n // k) == w for k in range(1, n))


@dataclass(frozen=True)
class CurveClass:
    """Conjugacy class of a closed curve, stored in canonical form."""

    word: str

    def __post_init__(self):
        c = canonical_word(self.word)
        if not c:
            raise HyperbolicError("curve word reduces to the identity")
        object.__setattr__(self, "word", c)

    def __str__(self):
        return self.word


# --- points -------------------------------------------------------------------

@dataclass(frozen=True)
class FNPoint:
    """Fenchel-Nielsen data: length and twist (length units) per pants curve."""

    pd: PantsDecomposition
    lengths: tuple[float, ...]
    twists: tuple[float, ...]

    def __post_init__(self):
        n = len(self.pd.curves)
        lengths = tuple(float(v) for v in self.lengths)
        twists = tuple(float(v) for v in self.twists)
        if len(lengths) != n or len(twists) != n:
            raise HyperbolicError(f"expected {n} lengths and twists")
        for cid, l in zip(self.pd.curve_ids, lengths):
            if not (l > 0 and math.isfinite(l)):
                raise HyperbolicError(f"length of {cid} must be positive, got {l}")
        object.__setattr__(self, "lengths", lengths)
        object.__setattr__(self, "twists", twists)

    @classmethod
    def from_mapping(cls, pd, data: dict) -> "FNPoint":
        try:
            lengths = [data[c]["length"] for c in pd.curve_ids]
            twists = [data[c].get("twist", 0.0) for c in pd.curve_ids]
        except KeyError as exc:
            raise HyperbolicError(f"missing coordinates for curve {exc}") from exc
        return cls(pd, tuple(lengths), tuple(twists))

    def to_mapping(self) -> dict:
        return {
            c: {"length": l, "twist": t}
            for c, l, t in zip(self.pd.curve_ids, self.lengths, self.twists)
        }

    def length(self, curve_id: str) -> float:
        return self.lengths[self.pd.curve_index(curve_id)]

    def twist(self, curve_id: str) -> float:
        return self.twists[self.pd.curve_index(curve_id)]

    def with_lengths(self, updates: dict) -> "FNPoint":
        ls = list(self.lengths)
        for cid, v in updates.items():
            ls[self.pd.curve_index(cid)] = v
        return replace(self, lengths=tuple(ls))


def load_fn_point(path, pd: PantsDecomposition | None = None) -> FNPoint:
    with Path(path).open(encoding="utf-8") as fh:
        data = json.load(fh)
    if pd is None:
        if "surface" not in data:
            raise HyperbolicError("point file needs a 'surface' entry or an explicit decomposition")
        pd = builtin_decomposition(data["surface"])
    return FNPoint.from_mapping(pd, data.get("coordinates", data))


def random_fn_point(pd, rng, lmin=0.05, lmax=3.0) -> FNPoint:
    """Lengths log-uniform in [lmin, lmax], twists uniform in [0, l)."""
    n = len(pd.curves)
    lengths = np.exp(rng.uniform(math.log(lmin), math.log(lmax), size=n))
    twists = rng.uniform(0.0, 1.0, size=n) * lengths
    return FNPoint(pd, tuple(lengths), tuple(twists))


def u_coordinate(l: float) -> float:
    """u = -log(l^(1/2))."""
    if not l > 0:
        raise HyperbolicError(f"length must be positive, got {l}")
    return -0.5 * math.log(l)


def length_from_u(u: float) -> float:
    return math.exp(-2.0 * u)


def twist_flow(x: FNPoint, curve_id: str, t: float) -> FNPoint:
    k = x.pd.curve_index(curve_id)
    tw = list(x.twists)
    tw[k] += t
    return replace(x, twists=tuple(tw))


# --- matrices ---------------------------------------------------------------

def _inv(m):
    return np.array([[m[1, 1], -m[0, 1]], [-m[1, 0], m[0, 0]]])


def _pants_matrices(t0, t1, t2):
    """Normal form with traces t0, t1, t2 (all <= -2) and c0 c1 c2 = I."""
    z = t2
    s = 0.5 * (z - math.sqrt(max(z * z - 4.0, 0.0)))
    a = np.array([[t0, -1.0], [1.0, 0.0]])
    b = np.array([[0.0, s], [-1.0 / s, t1]])
    return a, b, _inv(a @ b)


def _frame(m, nxt):
    """Eigenframe of boundary element m, balanced against the next slot's axis."""
    p = -m
    tr = p[0, 0] + p[1, 1]
    disc = math.sqrt(tr * tr - 4.0)
    cols = []
    for lam in ((tr + disc) / 2.0, (tr - disc) / 2.0):
        v1 = np.array([p[0, 1], lam - p[0, 0]])
        v2 = np.array([lam - p[1, 1], p[1, 0]])
        cols.append(v1 if np.linalg.norm(v1) >= np.linalg.norm(v2) else v2)
    f = np.column_stack(cols)
    d = np.linalg.det(f)
    if d < 0:
        f[:, 1] = -f[:, 1]
        d = -d
    f = f / math.sqrt(d)
    # product of the next element's fixed points in frame coordinates is -b/c
    n = _inv(f) @ nxt @ f
    h = math.sqrt(abs(-n[0, 1] / n[1, 0]))
    return f @ np.diag([math.sqrt(h), 1.0 / math.sqrt(h)])


_R_PI = np.array([[0.0, -1.0], [1.0, 0.0]])


def _translation(t):
    return np.diag([math.exp(t / 2.0), math.exp(-t / 2.0)])


@dataclass(frozen=True)
class _Structure:
    """Tree/HNN split of the gluing graph, fixed per decomposition."""

    tree: tuple[tuple[int, str, str], ...]  # (curve index, p slot, q slot) in BFS order
    hnn: tuple[tuple[int, str, str], ...]
    subtree: dict  # curve index of tree edge -> frozenset of pants below it


@functools.lru_cache(maxsize=None)
def _structure(pd: PantsDecomposition) -> _Structure:
    visited = {0}
    order = [0]
    tree = []
    parent_edge: dict[int, int] = {}
    used = set()
    qi = 0
    while qi < len(order):
        p = order[qi]
        qi += 1
        for k, c in enumerate(pd.curves):
            if k in used:
                continue
            (pa, _), (pb, _) = pd.slot_position(c.slots[0]), pd.slot_position(c.slots[1])
            for here, there, sh, st in ((pa, pb, c.slots[0], c.slots[1]), (pb, pa, c.slots[1], c.slots[0])):
                if here == p and there not in visited:
                    visited.add(there)
                    order.append(there)
                    tree.append((k, sh, st))
                    parent_edge[there] = k
                    used.add(k)
                    break
    hnn = tuple((k, c.slots[0], c.slots[1]) for k, c in enumerate(pd.curves) if k not in used)
    # pants strictly below each tree edge
    children: dict[int, list[int]] = {}
    for k, sh, st in tree:
        children.setdefault(pd.slot_position(sh)[0], []).append(pd.slot_position(st)[0])
    subtree = {}
    for k, sh, st in tree:
        root = pd.slot_position(st)[0]
        stack, seen = [root], set()
        while stack:
            v = stack.pop()
            seen.add(v)
            stack.extend(children.get(v, []))
        subtree[k] = frozenset(seen)
    return _Structure(tuple(tree), hnn, subtree)


@dataclass(frozen=True)
class Holonomy:
    """Letter images in SL(2,R) plus the raw generators they were built from."""

    letters: dict
    raw: dict
    relator_residual: float
    det_residual: float
    pd: PantsDecomposition = field(repr=False, default=None)

    def matrix(self, word: str) -> np.ndarray:
        m = np.eye(2)
        for ch in word:
            g = self.letters[ch.lower()]
            m = m @ (g if ch.islower() else _inv(g))
        return m


def _alphabet(pd):
    if not pd.alphabet:
        raise HyperbolicError(f"no generator alphabet shipped for {pd.name or pd.surface.name}")
    return pd.alphabet


def build_holonomy(x: FNPoint) -> Holonomy:
    pd = x.pd
    alpha = _alphabet(pd)
    cusp = set(pd.puncture_slots)
    slot_len = {}
    for c, l in zip(pd.curves, x.lengths):
        for s in c.slots:
            slot_len[s] = l
    local = []
    for slots in pd.pants:
        tr = [-2.0 if s in cusp else -2.0 * math.cosh(slot_len[s] / 2.0) for s in slots]
        local.append(_pants_matrices(*tr))

    def frame(slot):
        p, i = pd.slot_position(slot)
        return _frame(local[p][i], local[p][(i + 1) % 3])

    def gluing(k, sp, sq):
        g = frame(sp) @ _translation(x.twists[k]) @ _R_PI @ _inv(frame(sq))
        if np.linalg.cond(g) > COND_LIMIT:
            raise HyperbolicError(f"degenerate gluing along curve {pd.curves[k].id}")
        return g

    st = _structure(pd)
    glob = {0: np.eye(2)}
    for k, sp, sq in st.tree:
        glob[pd.slot_position(sq)[0]] = glob[pd.slot_position(sp)[0]] @ gluing(k, sp, sq)
    raw = {}
    for p, slots in enumerate(pd.pants):
        m, mi = glob[p], _inv(glob[p])
        for i, s in enumerate(slots):
            raw[s] = m @ local[p][i] @ mi
    for k, sp, sq in st.hnn:
        mp = glob[pd.slot_position(sp)[0]]
        mq = glob[pd.slot_position(sq)[0]]
        raw[f"T:{pd.curves[k].id}"] = mp @ gluing(k, sp, sq) @ _inv(mq)

    letters = {ch: raw[sym] for ch, sym in alpha["letters"].items()}
    hol = Holonomy(letters, raw, 0.0, 0.0, pd)
    size = {ch: max(1.0, float(np.max(np.abs(m)))) for ch, m in letters.items()}

    def scale(w):
        # rounding error of a product grows with the product of factor sizes
        return math.prod(size[ch.lower()] for ch in w)

    res = 0.0
    for sym, w in alpha["raw"].items():
        res = max(res, float(np.max(np.abs(hol.matrix(w) - raw[sym]))) / scale(w))
    if alpha.get("relator"):
        w = alpha["relator"]
        r = hol.matrix(w)
        err = min(float(np.max(np.abs(r - s * np.eye(2)))) for s in (1.0, -1.0))
        res = max(res, err / scale(w))
    # det rounding error scales with the squared entry size
    det = max(abs(np.linalg.det(m) - 1.0) / size[ch] ** 2 for ch, m in letters.items())
    return Holonomy(letters, raw, res, float(det), pd)


def trace_of(x: FNPoint | Holonomy, c) -> float:
    hol = x if isinstance(x, Holonomy) else build_holonomy(x)
    word = c.word if isinstance(c, CurveClass) else str(c)
    m = hol.matrix(word)
    return float(m[0, 0] + m[1, 1])


def _length_from_trace(tr: float) -> float:
    a = abs(tr)
    if a <= 2.0 + 1e-12:
        raise NotHyperbolicClass(f"not a hyperbolic class (|trace| = {a:.17g})")
    return 2.0 * math.acosh(a / 2.0)


def geodesic_length(x: FNPoint | Holonomy, c) -> float:
    """2 arccosh(|tr| / 2) of the holonomy image of c."""
    return _length_from_trace(trace_of(x, c))


def curve_word(pd: PantsDecomposition, curve_id: str) -> CurveClass:
    return CurveClass(_alphabet(pd)["curve_words"][curve_id])


def catalog_words(pd: PantsDecomposition) -> list[CurveClass]:
    """Pants-curve words plus the shipped extra test curves."""
    a = _alphabet(pd)
    words = [a["curve_words"][c] for c in pd.curve_ids] + list(a.get("extra_words", {}).values())
    return [CurveClass(w) for w in words]


# --- Dehn twists --------------------------------------------------------------

def _raw_image(pd, k: int, power: int) -> dict:
    """Raw generators' images under the full-twist-flow automorphism, to the given power."""
    st = _structure(pd)
    alpha = _alphabet(pd)
    to_word = alpha["raw"]
    img = {sym: to_word[sym] for sym in to_word}
    for kk, sp, sq in st.hnn:
        if kk == k:
            a = to_word[sp]
            conj = (a if power > 0 else invert_word(a)) * abs(power)
            img[f"T:{pd.curves[k].id}"] = conj + to_word[f"T:{pd.curves[k].id}"]
            return img
    for kk, sp, sq in st.tree:
        if kk != k:
            continue
        a = to_word[sp]
        left = (a if power > 0 else invert_word(a)) * abs(power)
        right = invert_word(left)
        below = st.subtree[k]
        for p, slots in enumerate(pd.pants):
            if p in below:
                for s in slots:
                    img[s] = left + to_word[s] + right
        for k2, s2p, s2q in st.hnn:
            t = f"T:{pd.curves[k2].id}"
            w = to_word[t]
            if pd.slot_position(s2p)[0] in below:
                w = left + w
            if pd.slot_position(s2q)[0] in below:
                w = w + right
            img[t] = w
        return img
    raise KeyError(f"unknown curve identifier {pd.curves[k].id!r}")


def dehn_twist_action(pd: PantsDecomposition, curve_id: str, c, power: int = 1) -> CurveClass:
    """Image of a curve class under the Dehn twist about a pants curve.

    ``power=1`` is the positive twist (on the one-holed torus, b -> ba).  A
    full positive twist flow on the point is matched by ``power=-1`` on words:
    l(twist_flow(x, a, l_a), c) == l(x, dehn_twist_action(pd, a, c, -1)).
    """
    if not pd.alphabet:
        raise HyperbolicError(f"action table missing for {pd.name or pd.surface.name}")
    k = pd.curve_index(curve_id)
    letters = _alphabet(pd)["letters"]
    img = _raw_image(pd, k, -power)
    word = c.word if isinstance(c, CurveClass) else str(c)
    out = []
    for ch in word:
        w = img[letters[ch.lower()]]
        out.append(w if ch.islower() else invert_word(w))
    return CurveClass("".join(out))


# --- enumeration ---------------------------------------------------------------

@functools.lru_cache(maxsize=None)
def enumerate_classes(letters: tuple[str, ...], bound: int) -> tuple[str, ...]:
    """Canonical primitive conjugacy classes of cyclic length <= bound."""
    syms = list(letters) + [c.upper() for c in letters]
    out = set()
    frontier = [""]
    for _ in range(bound):
        nxt = []
        for w in frontier:
            for s in syms:
                if w and w[-1] == s.swapcase():
                    continue
                v = w + s
                nxt.append(v)
                if v[0] != v[-1].swapcase() or len(v) == 1:
                    if not _is_proper_power(v):
                        out.add(canonical_word(v))
        frontier = nxt
    return tuple(sorted(out, key=lambda w: (len(w), w)))


@functools.lru_cache(maxsize=None)
def _index_batches(letters: tuple[str, ...], bound: int):
    words = enumerate_classes(letters, bound)
    pos = {ch: i for i, ch in enumerate(letters)}
    n = len(letters)
    batches = []
    for length, grp in itertools.groupby(words, key=len):
        grp = list(grp)
        idx = np.array([[pos[ch] if ch.islower() else pos[ch.lower()] + n for ch in w] for w in grp])
        batches.append((grp, idx))
    return batches


def batch_traces(hol: Holonomy, bound: int) -> tuple[list[str], np.ndarray]:
    letters = tuple(sorted(hol.letters))
    gens = np.stack([hol.letters[c] for c in letters] + [_inv(hol.letters[c]) for c in letters])
    words, traces = [], []
    for grp, idx in _index_batches(letters, bound):
        m = gens[idx[:, 0]]
        for j in range(1, idx.shape[1]):
            m = np.einsum("nij,njk->nik", m, gens[idx[:, j]])
        words.extend(grp)
        traces.append(m[:, 0, 0] + m[:, 1, 1])
    return words, np.concatenate(traces) if traces else np.zeros(0)
