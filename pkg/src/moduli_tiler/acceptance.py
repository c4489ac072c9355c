"""Acceptance checks, each runnable on its own from tests or the CLI.

Every check returns a :class:`CheckResult` whose ``details`` hold the
measured quantities, so a failure reports by how much it missed.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field

import numpy as np

from .asymptotic_cone import build_net, estimate_distortion, f1_map, flat_sector_probe, net_point
from .catalog_oracle import CATALOG_SURFACES, catalog_name, generate_catalog
from .cone_complex import (
    APEX,
    ConePoint,
    builtin_catalog,
    comparison_defect,
    complex_from_dict,
    cone_distance,
    make_point,
    random_cone_point,
)
from .hyperbolic import (
    NotHyperbolicClass,
    build_holonomy,
    curve_word,
    dehn_twist_action,
    enumerate_classes,
    geodesic_length,
    random_fn_point,
    twist_flow,
)
from .metric_models import ModelMetric, model_distance
from .surface_topology import SURFACE_DECOMPOSITIONS, builtin_decomposition
from .tiling import classify_tile, enumerate_short_geodesics

__all__ = ["CheckResult", "CRITERIA", "run_criterion", "run_all"]

ALL_DECOMPOSITIONS = tuple(n for names in SURFACE_DECOMPOSITIONS.values() for n in names)
CATALOGS = tuple(catalog_name(g, p) for g, p in CATALOG_SURFACES)
RANK2_CATALOGS = ("s12", "s05", "s20")


@dataclass
class CheckResult:
    criterion: int
    name: str
    passed: bool
    details: dict = field(default_factory=dict)
    seconds: float = 0.0

    def line(self) -> str:
        return f"criterion {self.criterion:2d} {self.name}: {'PASS' if self.passed else 'FAIL'}"


def holonomy_round_trip(seed=0, samples=1000, tol=1e-9, time_limit=60.0):
    rng = np.random.default_rng(seed)
    worst = {}
    t = time.perf_counter()
    for name in ALL_DECOMPOSITIONS:
        pd = builtin_decomposition(name)
        words = [curve_word(pd, c) for c in pd.curve_ids]
        err = 0.0
        for _ in range(samples):
            x = random_fn_point(pd, rng)
            hol = build_holonomy(x)
            for w, l in zip(words, x.lengths):
                err = max(err, abs(geodesic_length(hol, w) - l))
        worst[name] = err
    elapsed = time.perf_counter() - t
    ok = max(worst.values()) <= tol and elapsed <= time_limit
    return ok, {"max_error": worst, "tolerance": tol, "elapsed": elapsed, "time_limit": time_limit}


def twist_action(seed=0, samples=500, tol=1e-8, word_bound=5):
    rng = np.random.default_rng(seed)
    worst = {}
    for name in ("s11", "s04"):
        pd = builtin_decomposition(name)
        letters = tuple(sorted(pd.alphabet["letters"]))
        pool = enumerate_classes(letters, word_bound)
        err, done = 0.0, 0
        while done < samples:
            x = random_fn_point(pd, rng)
            cid = pd.curve_ids[rng.integers(len(pd.curve_ids))]
            w = pool[rng.integers(len(pool))]
            try:
                lhs = geodesic_length(twist_flow(x, cid, x.length(cid)), w)
                rhs = geodesic_length(x, dehn_twist_action(pd, cid, w, power=-1))
            except NotHyperbolicClass:
                continue
            err = max(err, abs(lhs - rhs))
            done += 1
        worst[name] = err
    return max(worst.values()) <= tol, {"max_error": worst, "tolerance": tol}


def collar_surrogate(seed=0, samples=1000, eps=0.1):
    rng = np.random.default_rng(seed)
    pd = builtin_decomposition("s11")
    lo = math.inf
    largest_short_set = 0
    for _ in range(samples):
        x = random_fn_point(pd, rng)
        hol = build_holonomy(x)
        la, lb = geodesic_length(hol, "a"), geodesic_length(hol, "b")
        lo = min(lo, math.sinh(la / 2.0) * math.sinh(lb / 2.0))
        # on S_{1,1} any two distinct simple curves intersect
        largest_short_set = max(largest_short_set, len(enumerate_short_geodesics(x, eps).curves))
    return lo > 1.0 and largest_short_set <= 1, {
        "min_sinh_product": lo, "largest_short_set": largest_short_set,
    }


def tile_partition(seed=0, samples=10000, eps=0.1, time_limit=300.0):
    rng = np.random.default_rng(seed)
    t = time.perf_counter()
    failures = {}
    counts = {}
    for name in ALL_DECOMPOSITIONS:
        pd = builtin_decomposition(name)
        bad = 0
        thin = 0
        for i in range(samples):
            x = random_fn_point(pd, rng, lmin=1e-3)
            tile = classify_tile(x, eps)
            short = {c for c, l in zip(pd.curve_ids, x.lengths) if l < eps}
            if tile.is_thick != (not short) or set(tile.sigma) != short:
                bad += 1
                continue
            thin += not tile.is_thick
            # full twist about one pants curve
            cid = pd.curve_ids[i % len(pd.curve_ids)]
            y = twist_flow(x, cid, x.length(cid))
            ty = classify_tile(y, eps)
            if ty.type_label != tile.type_label or ty.cone_coords != tile.cone_coords or ty.kind != tile.kind:
                bad += 1
            # boundary: lengths pinned to eps are thick
            if short:
                b = x.with_lengths({c: eps for c in short})
                if not classify_tile(b, eps).is_thick:
                    bad += 1
        failures[name] = bad
        counts[name] = {"samples": samples, "thin": thin}
    elapsed = time.perf_counter() - t
    ok = not any(failures.values()) and elapsed <= time_limit
    return ok, {"failures": failures, "counts": counts, "elapsed": elapsed, "time_limit": time_limit}


def cone_axioms(seed=0, triples=10000, tri_tol=-1e-9, exact_tol=1e-12):
    rng = np.random.default_rng(seed)
    opposite = _opposite_form()
    report = {"chain_complex": {"closed_forms": {"opposite": opposite}}}
    ok = opposite <= exact_tol
    for name in CATALOGS:
        K = builtin_catalog(name)
        asym, tri, apex_err = 0.0, math.inf, 0.0
        for _ in range(triples):
            x, y, z = (random_cone_point(K, rng, 3.0) for _ in range(3))
            dxy, dyx = cone_distance(x, y, K), cone_distance(y, x, K)
            dyz, dxz = cone_distance(y, z, K), cone_distance(x, z, K)
            asym = max(asym, abs(dxy - dyx))
            tri = min(tri, dxy + dyz - dxz)
            apex_err = max(apex_err, abs(cone_distance(x, APEX, K) - x.radius))
        v = K.vertices
        a, b = 2.0, 0.75
        p = make_point(K, v[0], (1.0,))
        same = abs(cone_distance(ConePoint(a, p), ConePoint(b, p), K) - abs(a - b))
        forms = {"same_direction": same}
        if len(v) > 1:
            q = make_point(K, v[1], (1.0,))
            d = cone_distance(ConePoint(1.0, p), ConePoint(1.0, q), K)
            forms["orthogonal"] = abs(d - math.sqrt(2.0))
        good = asym == 0.0 and tri >= tri_tol and apex_err == 0.0 and max(forms.values()) <= exact_tol
        ok &= good
        report[name] = {"asymmetry": asym, "min_triangle_slack": tri, "apex_error": apex_err,
                        "closed_forms": forms, "passed": good}
    return ok, report


def _path_complex(edges: int = 3) -> dict:
    """A chain of all-right edges; its end vertices are edges * pi/2 apart."""
    verts = [{"id": f"v{i}", "dim": 0, "type_label": f"v{i}", "vertex_labels": [f"v{i}"], "faces": []}
             for i in range(edges + 1)]
    segs = [{"id": f"e{i}", "dim": 1, "type_label": f"e{i}", "vertex_labels": [f"v{i}", f"v{i + 1}"],
             "faces": [f"v{i + 1}", f"v{i}"]} for i in range(edges)]
    return {"surface": {"genus": 0, "punctures": 5, "complexity": 2}, "labeled_punctures": False,
            "multiplicity": None, "simplices": verts + segs}


def _opposite_form(a=2.0, b=0.75):
    """Radii a, b at directions pi or more apart are a + b apart."""
    K = complex_from_dict(_path_complex())
    p, q = make_point(K, "v0", (1.0,)), make_point(K, "v3", (1.0,))
    return abs(cone_distance(ConePoint(a, p), ConePoint(b, q), K) - (a + b))


def cat0_sampling(seed=0, triples=1000, tol=1e-6):
    rng = np.random.default_rng(seed)
    report = {}
    for name in CATALOGS:
        K = builtin_catalog(name)
        worst = max(
            comparison_defect(K, *(random_cone_point(K, rng, 3.0) for _ in range(3)))
            for _ in range(triples)
        )
        report[name] = worst
    return max(report.values()) <= tol, {"max_defect": report, "tolerance": tol}


def distortion_scaling(seed=0, samples=500, radius=8.0, tol=1e-12):
    ns = [1, 2, 4, 8, 16]
    report = {}
    ok = True
    for name in CATALOGS:
        reps = estimate_distortion(build_net(builtin_catalog(name)), ns, radius, samples, seed)
        scaled = [r.sup_defect * r.n for r in reps]
        spread = max(scaled) - min(scaled)
        ok &= spread <= tol
        report[name] = {"sup_defect_times_n": scaled, "spread": spread}
    return ok, report


def distortion_boundedness(seed=0, samples=20000, radii=(10.0, 20.0, 40.0), max_slope=0.02,
                           catalogs=RANK2_CATALOGS, time_limit=600.0):
    t = time.perf_counter()
    report = {}
    ok = True
    for name in catalogs:
        net = build_net(builtin_catalog(name))
        sups = [estimate_distortion(net, [1], r, samples, seed)[0].sup_defect for r in radii]
        slope = float(np.polyfit(np.asarray(radii), np.asarray(sups), 1)[0])
        ok &= slope <= max_slope
        report[name] = {"sup_defect": sups, "slope": slope}
    elapsed = time.perf_counter() - t
    return ok and elapsed <= time_limit, {"catalogs": report, "max_slope": max_slope,
                                          "elapsed": elapsed, "time_limit": time_limit}


def bilipschitz_sandwich(seed=0, pairs=2000, d1=1.0, radius=20.0):
    rng = np.random.default_rng(seed)
    report = {}
    for name in CATALOGS:
        net = build_net(builtin_catalog(name))
        metric = ModelMetric(net.epsilon, "thin", d1, net.catalog)
        cone = net.cones[0]
        k = len(cone.curves)
        low = high = 0
        for _ in range(pairs):
            x = net_point(net, cone, rng.uniform(0.0, radius, size=k))
            y = net_point(net, cone, rng.uniform(0.0, radius, size=k))
            dc = cone_distance(f1_map(net, x), f1_map(net, y), net.catalog)
            dm = model_distance(x, y, metric).distance
            low += dm < dc - 1e-9
            high += dm > dc + 2.0 * d1 + 1e-9
        report[name] = {"below_cone": int(low), "above_cone_plus_2d1": int(high)}
    ok = all(v["below_cone"] == 0 and v["above_cone_plus_2d1"] == 0 for v in report.values())
    return ok, report


def flat_probe(seed=0, radii=(10.0, 20.0, 40.0)):
    report = {}
    ok = True
    for name in RANK2_CATALOGS:
        net = build_net(builtin_catalog(name))
        reps = [flat_sector_probe(net, r, seed=seed) for r in radii]
        within = all(p.deviation <= p.bound for p in reps)
        halves = all(abs(b.bound / a.bound - 0.5) < 1e-15 for a, b in zip(reps, reps[1:]))
        ok &= within and halves
        report[name] = {"ratio": [p.ratio for p in reps], "deviation": [p.deviation for p in reps],
                        "bound": [p.bound for p in reps]}
    return ok, report


def catalog_reproducibility():
    report = {}
    for g, p in CATALOG_SURFACES:
        name = catalog_name(g, p)
        regenerated = complex_from_dict(generate_catalog(g, p))
        report[name] = regenerated.canonical_form() == builtin_catalog(name).canonical_form()
    return all(report.values()), {"equal": report}


CRITERIA = {
    1: ("holonomy round trip", holonomy_round_trip),
    2: ("twist flow vs Dehn twist", twist_action),
    3: ("collar inequality", collar_surrogate),
    4: ("thick/thin partition", tile_partition),
    5: ("cone metric axioms", cone_axioms),
    6: ("CAT(0) comparison", cat0_sampling),
    7: ("distortion scaling", distortion_scaling),
    8: ("distortion boundedness", distortion_boundedness),
    9: ("bi-Lipschitz sandwich", bilipschitz_sandwich),
    10: ("flat sector probe", flat_probe),
    11: ("catalog reproducibility", catalog_reproducibility),
}


def run_criterion(k: int, **kwargs) -> CheckResult:
    if k not in CRITERIA:
        raise KeyError(f"no acceptance criterion {k}")
    name, fn = CRITERIA[k]
    t = time.perf_counter()
    ok, details = fn(**kwargs)
    return CheckResult(k, name, bool(ok), details, time.perf_counter() - t)


def run_all(seed: int = 0) -> list[CheckResult]:
    out = []
    for k in CRITERIA:
        kw = {} if k == 11 else {"seed": seed}
        out.append(run_criterion(k, **kw))
    return out
