"""Surfaces S_{g,p}, pants decompositions, cutting along sub-multicurves.

A pants decomposition is stored as a list of pants (three boundary slots
each), a list of curves (each gluing two slots) and the slots that carry
punctures.  Everything here is combinatorial; geometry lives in
:mod:`moduli_tiler.hyperbolic`.
"""

from __future__ import annotations

import functools
import itertools
import json
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

__all__ = [
    "Surface",
    "Curve",
    "PantsDecomposition",
    "CutSurface",
    "complexity",
    "validate_pants_decomposition",
    "cut_surface",
    "multicurve_type",
    "vertex_order",
    "load_pants_decomposition",
    "builtin_decomposition",
    "decomposition_catalog",
    "SURFACE_DECOMPOSITIONS",
]


class TopologyError(ValueError):
    pass


@dataclass(frozen=True)
class Surface:
    genus: int
    punctures: int

    def __post_init__(self):
        if self.genus < 0 or self.punctures < 0:
            raise TopologyError("genus and punctures must be nonnegative")

    @property
    def euler_characteristic(self) -> int:
        return 2 - 2 * self.genus - self.punctures

    @property
    def name(self) -> str:
        return f"S_{{{self.genus},{self.punctures}}}"


def complexity(surface: Surface) -> int:
    """d(S) = 3g - 3 + p."""
    return 3 * surface.genus - 3 + surface.punctures


@dataclass(frozen=True)
class Curve:
    id: str
    slots: tuple[str, str]


@dataclass(frozen=True)
class PantsDecomposition:
    surface: Surface
    pants: tuple[tuple[str, str, str], ...]
    curves: tuple[Curve, ...]
    puncture_slots: tuple[str, ...]
    name: str = ""
    # raw alphabet record from the asset file; consumed by hyperbolic.py
    alphabet: dict | None = field(default=None, compare=False, hash=False, repr=False)

    @property
    def curve_ids(self) -> tuple[str, ...]:
        return tuple(c.id for c in self.curves)

    def curve(self, curve_id: str) -> Curve:
        for c in self.curves:
            if c.id == curve_id:
                return c
        raise KeyError(f"unknown curve identifier {curve_id!r}")

    def curve_index(self, curve_id: str) -> int:
        for i, c in enumerate(self.curves):
            if c.id == curve_id:
                return i
        raise KeyError(f"unknown curve identifier {curve_id!r}")

    def slot_position(self, slot: str) -> tuple[int, int]:
        """(pants index, position 0..2) of a slot id."""
        for p, slots in enumerate(self.pants):
            if slot in slots:
                return p, slots.index(slot)
        raise KeyError(f"unknown slot {slot!r}")

    def puncture_label(self, slot: str) -> int:
        return self.puncture_slots.index(slot)

    def relabeled(self, pants_perm=None, slot_map=None, curve_map=None) -> "PantsDecomposition":
        """Copy with pants reordered and slot/curve ids renamed (for invariance tests)."""
        slot_map = slot_map or {}
        curve_map = curve_map or {}
        pants = [tuple(slot_map.get(s, s) for s in p) for p in self.pants]
        if pants_perm is not None:
            pants = [pants[i] for i in pants_perm]
        curves = tuple(
            Curve(curve_map.get(c.id, c.id), tuple(slot_map.get(s, s) for s in c.slots))
            for c in self.curves
        )
        return PantsDecomposition(
            self.surface,
            tuple(pants),
            curves,
            tuple(slot_map.get(s, s) for s in self.puncture_slots),
            self.name,
        )

    def to_dict(self) -> dict:
        d = {
            "name": self.name,
            "genus": self.surface.genus,
            "punctures": self.surface.punctures,
            "pants": [list(p) for p in self.pants],
            "curves": [{"id": c.id, "slots": list(c.slots)} for c in self.curves],
            "puncture_slots": list(self.puncture_slots),
        }
        if self.alphabet is not None:
            d["alphabet"] = self.alphabet
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "PantsDecomposition":
        try:
            surface = Surface(int(d["genus"]), int(d["punctures"]))
            pants = tuple(tuple(p) for p in d["pants"])
            curves = tuple(Curve(str(c["id"]), tuple(c["slots"])) for c in d["curves"])
            punct = tuple(d.get("puncture_slots", []))
        except (KeyError, TypeError) as exc:
            raise TopologyError(f"malformed pants decomposition record: {exc}") from exc
        for p in pants:
            if len(p) != 3:
                raise TopologyError(f"pants {p} must list exactly 3 slots")
        for c in curves:
            if len(c.slots) != 2:
                raise TopologyError(f"curve {c.id} must glue exactly 2 slots")
        return cls(surface, pants, curves, punct, d.get("name", ""), d.get("alphabet"))


def validate_pants_decomposition(pd: PantsDecomposition) -> list[str]:
    """Return a list of violations; empty means the decomposition is valid."""
    violations = []
    s = pd.surface
    d = complexity(s)
    if d < 1:
        violations.append(f"d(S) = {d} < 1 is outside the supported range")
    if len(pd.curves) != d:
        violations.append(f"curve count ≠ d(S): {len(pd.curves)} curves, d(S) = {d}")
    n_pants = 2 * s.genus - 2 + s.punctures
    if len(pd.pants) != n_pants:
        violations.append(f"pants count ≠ 2g-2+p: {len(pd.pants)} pants, expected {n_pants}")
    if len(pd.puncture_slots) != s.punctures:
        violations.append(
            f"puncture slot count {len(pd.puncture_slots)} ≠ punctures {s.punctures}"
        )
    all_slots = [sl for p in pd.pants for sl in p]
    if len(set(all_slots)) != len(all_slots):
        violations.append("duplicate slot ids across pants")
    uses: dict[str, int] = {sl: 0 for sl in all_slots}
    for c in pd.curves:
        for sl in c.slots:
            if sl not in uses:
                violations.append(f"curve {c.id} uses unknown slot {sl}")
            else:
                uses[sl] += 1
        if c.slots[0] == c.slots[1]:
            violations.append(f"curve {c.id} glues slot {c.slots[0]} to itself")
    for sl in pd.puncture_slots:
        if sl not in uses:
            violations.append(f"puncture on unknown slot {sl}")
        else:
            uses[sl] += 1
    for sl, n in uses.items():
        if n != 1:
            violations.append(f"slot {sl} used {n} times (expected exactly 1)")
    ids = [c.id for c in pd.curves]
    if len(set(ids)) != len(ids):
        violations.append("duplicate curve ids")
    if not violations and not _connected(pd, ()):
        violations.append("pants graph is disconnected")
    return violations


def _components(pd: PantsDecomposition, severed) -> list[list[int]]:
    parent = list(range(len(pd.pants)))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for c in pd.curves:
        if c.id in severed:
            continue
        p, _ = pd.slot_position(c.slots[0])
        q, _ = pd.slot_position(c.slots[1])
        parent[find(p)] = find(q)
    groups: dict[int, list[int]] = {}
    for i in range(len(pd.pants)):
        groups.setdefault(find(i), []).append(i)
    return sorted(groups.values())


def _connected(pd, severed) -> bool:
    return len(_components(pd, severed)) == 1


@dataclass(frozen=True)
class CutSurface:
    """Components as (genus, punctures, boundary) triples.

    ``incidence`` lists, per severed curve, the pair of component indices
    its two sides land on.  ``puncture_labels`` holds the labels of the
    punctures on each component (used in labeled mode).
    """

    components: tuple[tuple[int, int, int], ...]
    incidence: tuple[tuple[int, int], ...] = ()
    curves: tuple[str, ...] = ()
    puncture_labels: tuple[tuple[int, ...], ...] = ()

    @property
    def euler_characteristic(self) -> int:
        return sum(2 - 2 * g - p - b for g, p, b in self.components)


def _check_sigma(pd: PantsDecomposition, sigma) -> tuple[str, ...]:
    sigma = tuple(sigma)
    if not sigma:
        raise TopologyError("a decomposition simplex needs at least one curve")
    known = set(pd.curve_ids)
    for cid in sigma:
        if cid not in known:
            raise KeyError(f"unknown curve identifier {cid!r}")
    if len(set(sigma)) != len(sigma):
        raise TopologyError("repeated curve in simplex")
    return sigma


def cut_surface(pd: PantsDecomposition, sigma) -> CutSurface:
    sigma = _check_sigma(pd, sigma)
    groups = _components(pd, set(sigma))
    comp_of = {}
    for k, grp in enumerate(groups):
        for p in grp:
            comp_of[p] = k
    punct = [0] * len(groups)
    labels: list[list[int]] = [[] for _ in groups]
    for sl in pd.puncture_slots:
        p, _ = pd.slot_position(sl)
        punct[comp_of[p]] += 1
        labels[comp_of[p]].append(pd.puncture_label(sl))
    bnd = [0] * len(groups)
    incidence = []
    for cid in sigma:
        c = pd.curve(cid)
        ends = []
        for sl in c.slots:
            p, _ = pd.slot_position(sl)
            bnd[comp_of[p]] += 1
            ends.append(comp_of[p])
        incidence.append(tuple(sorted(ends)))
    comps = []
    for k, grp in enumerate(groups):
        chi = -len(grp)
        twice_g = 2 - punct[k] - bnd[k] - chi
        comps.append((twice_g // 2, punct[k], bnd[k]))
    return CutSurface(
        tuple(comps), tuple(incidence), sigma, tuple(tuple(sorted(l)) for l in labels)
    )


def _fmt_comp(c) -> str:
    g, p, b = c
    if isinstance(p, tuple):
        p = "{" + ",".join(str(i) for i in p) + "}"
    return f"({g},{p},{b})"


def multicurve_type(pd: PantsDecomposition, sigma, labeled_punctures: bool = False) -> str:
    """Canonical, relabeling-invariant label of the topological type of sigma.

    Components are ordered by (-genus, punctures, boundary); ties between
    identical components are resolved by taking the lexicographically
    smallest incidence list over all orderings of the tied block.
    """
    return _multicurve_type(pd, tuple(sigma), bool(labeled_punctures))


@functools.lru_cache(maxsize=1 << 16)
def _multicurve_type(pd, sigma, labeled_punctures):
    cut = cut_surface(pd, sigma)
    if labeled_punctures:
        comps = [(g, lab, b) for (g, _, b), lab in zip(cut.components, cut.puncture_labels)]
        key = lambda c: (-c[0], len(c[1]), c[1], c[2])
    else:
        comps = list(cut.components)
        key = lambda c: (-c[0], c[1], c[2])
    order = sorted(range(len(comps)), key=lambda i: key(comps[i]))
    # blocks of identical components may be permuted freely
    blocks = [list(g) for _, g in itertools.groupby(order, key=lambda i: comps[i])]
    best = None
    for perms in itertools.product(*(itertools.permutations(b) for b in blocks)):
        flat = [i for blk in perms for i in blk]
        pos = {old: new for new, old in enumerate(flat)}
        inc = sorted(tuple(sorted((pos[a], pos[b]))) for a, b in cut.incidence)
        if best is None or inc < best:
            best = inc
    sorted_comps = [comps[i] for i in order]
    body = "[" + ",".join(_fmt_comp(c) for c in sorted_comps) + "]"
    if len(cut.incidence) == 1:
        if len(sorted_comps) == 1:
            return "nonseparating: " + body
        return body
    return body + " incidence=" + "[" + ",".join(f"({a},{b})" for a, b in best) + "]"


def vertex_order(pd: PantsDecomposition, sigma, labeled_punctures: bool = False) -> tuple[str, ...]:
    """Order the curves of sigma the way catalog simplices order their vertices.

    Sort key: the curve's own type label, then the type of the face obtained
    by deleting it, then position in the decomposition.
    """
    return _vertex_order(pd, tuple(sigma), bool(labeled_punctures))


@functools.lru_cache(maxsize=1 << 16)
def _vertex_order(pd, sigma, labeled_punctures):
    sigma = _check_sigma(pd, sigma)

    def key(cid):
        own = multicurve_type(pd, [cid], labeled_punctures)
        rest = [c for c in sigma if c != cid]
        face = multicurve_type(pd, rest, labeled_punctures) if rest else ""
        return (own, face, pd.curve_index(cid))

    return tuple(sorted(sigma, key=key))


# --- shipped decompositions -------------------------------------------------

SURFACE_DECOMPOSITIONS = {
    (1, 1): ("s11",),
    (0, 4): ("s04",),
    (1, 2): ("s12_i", "s12_ii"),
    (0, 5): ("s05",),
    (2, 0): ("s20_theta", "s20_dumbbell"),
}


def load_pants_decomposition(path) -> PantsDecomposition:
    path = Path(path)
    with path.open(encoding="utf-8") as fh:
        try:
            data = json.load(fh)
        except json.JSONDecodeError as exc:
            raise TopologyError(f"{path}:{exc.lineno}: {exc.msg}") from exc
    pd = PantsDecomposition.from_dict(data)
    if not pd.name:
        pd = PantsDecomposition(pd.surface, pd.pants, pd.curves, pd.puncture_slots,
                                path.stem, pd.alphabet)
    return pd


_BUILTIN_CACHE: dict[str, PantsDecomposition] = {}


def builtin_decomposition(name: str) -> PantsDecomposition:
    if name not in _BUILTIN_CACHE:
        ref = resources.files("moduli_tiler") / "data" / "surfaces" / f"{name}.json"
        if not ref.is_file():
            raise KeyError(f"no shipped decomposition named {name!r}")
        data = json.loads(ref.read_text(encoding="utf-8"))
        _BUILTIN_CACHE[name] = PantsDecomposition.from_dict(data)
    return _BUILTIN_CACHE[name]


def decomposition_catalog(surface: Surface) -> list[PantsDecomposition]:
    """All shipped decompositions of a surface; the first one is the default."""
    key = (surface.genus, surface.punctures)
    if key not in SURFACE_DECOMPOSITIONS:
        raise KeyError(f"no shipped decompositions for {surface.name}")
    return [builtin_decomposition(n) for n in SURFACE_DECOMPOSITIONS[key]]
