"""Enumeration oracle for quotient curve-complex catalogs.

Every sub-multicurve of every shipped pants decomposition of a surface is
labeled by its topological type; one simplex is kept per label.  Face i of
a simplex is the type obtained by deleting its i-th vertex, with vertices
ordered by :func:`moduli_tiler.surface_topology.vertex_order`.  A simplex
also lists its symmetries: the vertex permutations that preserve the type of
every sub-multicurve.  On the shipped surfaces each of them is realized by
a mapping class, so the quotient identifies points of the simplex under them.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import replace

from .surface_topology import (
    SURFACE_DECOMPOSITIONS,
    PantsDecomposition,
    Surface,
    builtin_decomposition,
    complexity,
    multicurve_type,
    vertex_order,
)

__all__ = ["generate_catalog", "catalog_name", "catalog_to_json", "CATALOG_SURFACES"]

CATALOG_SURFACES = tuple(SURFACE_DECOMPOSITIONS)


def catalog_name(genus: int, punctures: int, labeled: bool = False) -> str:
    return f"s{genus}{punctures}" + ("_labeled" if labeled else "")


def _puncture_relabelings(pd: PantsDecomposition):
    """The decomposition with its punctures permuted in every possible way."""
    for perm in itertools.permutations(pd.puncture_slots):
        yield replace(pd, puncture_slots=tuple(perm), alphabet=None)


def _symmetries(pd, order, labeled) -> list[list[int]]:
    """Vertex permutations preserving the type of every sub-multicurve."""
    k = len(order)
    subsets = [a for r in range(1, k) for a in itertools.combinations(range(k), r)]
    types = {a: multicurve_type(pd, [order[i] for i in a], labeled) for a in subsets}
    out = []
    for perm in itertools.permutations(range(k)):
        if all(types[tuple(sorted(perm[i] for i in a))] == types[a] for a in subsets):
            out.append(list(perm))
    return out


def generate_catalog(genus: int, punctures: int, labeled: bool = False) -> dict:
    surface = Surface(genus, punctures)
    decomps = [builtin_decomposition(n) for n in SURFACE_DECOMPOSITIONS[(genus, punctures)]]
    found: dict[str, dict] = {}
    for pd in decomps:
        variants = list(_puncture_relabelings(pd)) if labeled else [pd]
        for var in variants:
            for k in range(1, len(var.curves) + 1):
                for sigma in itertools.combinations(var.curve_ids, k):
                    label = multicurve_type(var, sigma, labeled)
                    if label in found:
                        continue
                    order = vertex_order(var, sigma, labeled)
                    faces = [
                        multicurve_type(var, order[:i] + order[i + 1:], labeled) if k > 1 else None
                        for i in range(k)
                    ]
                    found[label] = {
                        "dim": k - 1,
                        "symmetries": _symmetries(var, order, labeled),
                        "type_label": label,
                        "vertex_labels": [multicurve_type(var, [c], labeled) for c in order],
                        "face_labels": faces if k > 1 else [],
                        "source": {"decomposition": pd.name, "curves": list(order)},
                    }
                    if labeled:
                        found[label]["source"]["puncture_slots"] = list(var.puncture_slots)
    ordered = sorted(found.values(), key=lambda s: (s["dim"], s["type_label"]))
    counters: dict[int, int] = {}
    ids = {}
    for s in ordered:
        n = counters.get(s["dim"], 0)
        counters[s["dim"]] = n + 1
        ids[s["type_label"]] = f"d{s['dim']}_{n}"
    simplices = []
    for s in ordered:
        simplices.append({
            "id": ids[s["type_label"]],
            "dim": s["dim"],
            "type_label": s["type_label"],
            "vertex_labels": s["vertex_labels"],
            "faces": [ids[f] for f in s["face_labels"]],
            "symmetries": s["symmetries"],
            "source": s["source"],
        })
    return {
        "surface": {"genus": genus, "punctures": punctures, "complexity": complexity(surface)},
        "labeled_punctures": labeled,
        "multiplicity": None,
        "simplices": simplices,
    }


def catalog_to_json(catalog: dict) -> str:
    return json.dumps(catalog, indent=2, sort_keys=True, ensure_ascii=False) + "\n"
