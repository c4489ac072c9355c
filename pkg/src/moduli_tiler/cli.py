"""Command-line interface: ``moduli-tiler <command> ...``.

Output is JSON (one record per line, sorted keys, floats with 17 significant
digits) or CSV.  Exit codes: 0 success, 1 domain error, 2 IO or schema error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .acceptance import CRITERIA, run_criterion
from .asymptotic_cone import build_net, estimate_distortion, flat_sector_probe
from .catalog_oracle import catalog_name, catalog_to_json, generate_catalog
from .cone_complex import (
    APEX,
    ComplexError,
    ConePoint,
    builtin_catalog,
    comparison_defect,
    cone_distance,
    load_complex,
    make_point,
    random_cone_point,
)
from .hyperbolic import EPSILON_0, FNPoint, HyperbolicError
from .metric_models import MODES, ModelMetric, model_distance
from .surface_topology import (
    SURFACE_DECOMPOSITIONS,
    TopologyError,
    builtin_decomposition,
    complexity,
    load_pants_decomposition,
    validate_pants_decomposition,
)
from .tiling import classify_tile, enumerate_short_geodesics

EXIT_OK, EXIT_DOMAIN, EXIT_IO = 0, 1, 2


class InputError(Exception):
    """Unreadable or malformed input; exit code 2."""


# --- serialization -------------------------------------------------------------------

def _encode(obj) -> str:
    if isinstance(obj, bool) or obj is None:
        return json.dumps(obj)
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        return repr(v) if math.isfinite(v) else json.dumps(str(v))
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, str):
        return json.dumps(obj, ensure_ascii=False)
    if isinstance(obj, dict):
        items = sorted((str(k), v) for k, v in obj.items())
        return "{" + ",".join(f"{json.dumps(k, ensure_ascii=False)}:{_encode(v)}" for k, v in items) + "}"
    if isinstance(obj, (list, tuple, np.ndarray)):
        return "[" + ",".join(_encode(v) for v in obj) + "]"
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def _csv(records) -> str:
    keys = sorted({k for r in records for k in r})
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(keys)
    for r in records:
        row = []
        for k in keys:
            v = r.get(k, "")
            row.append(_encode(v) if isinstance(v, (dict, list, tuple, float)) else v)
        w.writerow(row)
    return buf.getvalue()


def _emit(records, args):
    text = _csv(records) if args.format == "csv" else "".join(_encode(r) + "\n" for r in records)
    if args.out:
        try:
            Path(args.out).write_text(text, encoding="utf-8")
        except OSError as exc:
            raise InputError(f"{args.out}: {exc.strerror}") from exc
    else:
        sys.stdout.write(text)


# --- input ---------------------------------------------------------------------------

def _decomposition(spec: str | None):
    if spec is None:
        raise InputError("--surface is required")
    try:
        if Path(spec).suffix == ".json" or Path(spec).exists():
            return load_pants_decomposition(spec)
        for names in SURFACE_DECOMPOSITIONS.values():
            if spec == names[0].split("_")[0]:
                return builtin_decomposition(names[0])
        return builtin_decomposition(spec)
    except OSError as exc:
        raise InputError(f"{spec}: {exc.strerror}") from exc
    except (KeyError, TopologyError, ValueError) as exc:
        raise InputError(f"{spec}: {exc}") from exc


def _catalog(spec: str | None, pd=None):
    if spec is None:
        if pd is None:
            raise InputError("--catalog is required")
        spec = catalog_name(pd.surface.genus, pd.surface.punctures)
    try:
        if Path(spec).suffix == ".json" or Path(spec).exists():
            return load_complex(spec)
        return builtin_catalog(spec)
    except OSError as exc:
        raise InputError(f"{spec}: {exc.strerror}") from exc
    except (ComplexError, FileNotFoundError) as exc:
        raise InputError(str(exc)) from exc


def _read_json(path: str):
    try:
        text = sys.stdin.read() if path == "-" else Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise InputError(f"{path}: {exc.strerror}") from exc
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise InputError(f"{path}:{exc.lineno}: {exc.msg}") from exc


def _points(paths, surface):
    """FN points from files holding one point or a list of points."""
    out = []
    for path in paths:
        data = _read_json(path)
        items = data if isinstance(data, list) else [data]
        for k, item in enumerate(items):
            if not isinstance(item, dict):
                raise InputError(f"{path}[{k}]: a point must be an object")
            pd = _decomposition(surface or item.get("surface"))
            try:
                out.append(FNPoint.from_mapping(pd, item.get("coordinates", item)))
            except HyperbolicError as exc:
                raise InputError(f"{path}[{k}]: {exc}") from exc
    return out


def _cone_point(text: str, K):
    """A cone point from inline JSON or a file: {"radius", "simplex", "coords"}."""
    data = json.loads(text) if text.lstrip().startswith("{") else _read_json(text)
    try:
        r = float(data["radius"])
        if r == 0.0:
            return APEX
        return ConePoint(r, make_point(K, data["simplex"], data["coords"]))
    except (KeyError, TypeError) as exc:
        raise InputError(f"cone point needs radius, simplex and coords: {exc}") from exc


def _seed(args):
    if args.seed is None:
        raise InputError("--seed is required for sampling commands")
    return args.seed


def _check_eps(eps):
    if not (0 < eps <= EPSILON_0):
        raise HyperbolicError(f"epsilon must lie in (0, {EPSILON_0}]")


# --- commands ------------------------------------------------------------------------

def cmd_surface(args):
    pd = _decomposition(args.surface)
    problems = validate_pants_decomposition(pd)
    rec = {
        "surface": pd.surface.name,
        "decomposition": pd.name,
        "complexity": complexity(pd.surface),
        "pants": len(pd.pants),
        "curves": list(pd.curve_ids),
        "valid": not problems,
        "problems": problems,
    }
    try:
        K = _catalog(args.catalog, pd)
    except InputError:
        if args.catalog:
            raise
        K = None
    if K is not None:
        counts = {}
        for s in K.simplices.values():
            counts[str(s.dim)] = counts.get(str(s.dim), 0) + 1
        rec["catalog"] = {"dimension": K.dim, "simplices_by_dim": counts, "maximal": len(K.maximal)}
    return [rec]


def _tile_record(i, tile):
    rec = {"index": i, "kind": tile.kind}
    if not tile.is_thick:
        rec.update(sigma=list(tile.sigma), type_label=tile.type_label, cone_coords=list(tile.cone_coords))
    return rec


def cmd_classify(args):
    _check_eps(args.epsilon)
    return [_tile_record(i, classify_tile(x, args.epsilon)) for i, x in enumerate(_points(args.points, args.surface))]


def cmd_short_curves(args):
    out = []
    for i, x in enumerate(_points(args.points, args.surface)):
        rep = enumerate_short_geodesics(x, args.epsilon, args.word_bound)
        out.append({
            "index": i,
            "complete": rep.complete,
            "word_bound": rep.word_bound,
            "curves": [{"word": c.word, "length": l, "pants_curve": p}
                       for (c, l), p in zip(rep.curves, rep.pants_curves)],
        })
    return out


def cmd_dist(args):
    pts = _points(args.points, args.surface)
    if len(pts) != 2:
        raise InputError(f"dist needs exactly two points, got {len(pts)}")
    K = _catalog(args.catalog, pts[0].pd) if args.catalog or args.with_cone else None
    metric = ModelMetric(args.epsilon, args.mode, args.d1, K)
    res = model_distance(pts[0], pts[1], metric)
    return [{"distance": res.distance, "route": res.route, "routes": res.routes,
             "per_factor": list(res.per_factor), "mode": args.mode}]


def cmd_cone(args):
    K = _catalog(args.catalog)
    if args.action == "dist":
        u, v = (_cone_point(t, K) for t in args.points)
        return [{"distance": cone_distance(u, v, K)}]
    rng = np.random.default_rng(_seed(args))
    defects = [comparison_defect(K, *(random_cone_point(K, rng, args.radius) for _ in range(3)))
               for _ in range(args.samples)]
    return [{"catalog": K.name, "samples": args.samples, "seed": args.seed,
             "max_defect": max(defects) if defects else 0.0,
             "mean_defect": float(np.mean(defects)) if defects else 0.0}]


def cmd_net(args):
    _check_eps(args.epsilon)
    net = build_net(_catalog(args.catalog), args.epsilon)
    return [{"simplex": c.simplex, "decomposition": c.pd.name, "curves": list(c.curves),
             "base_point": c.base_point.to_mapping(), "apex_level": net.apex_level}
            for c in net.cones]


def cmd_distortion(args):
    _check_eps(args.epsilon)
    net = build_net(_catalog(args.catalog), args.epsilon)
    metric = ModelMetric(args.epsilon, args.mode, args.d1, net.catalog)
    out = []
    for r in args.radius:
        for rep in estimate_distortion(net, args.n, r, args.samples, _seed(args), metric):
            out.append({"n": rep.n, "radius": rep.radius, "samples": rep.samples, "seed": rep.seed,
                        "sup_defect": rep.sup_defect, "mean_defect": rep.mean_defect,
                        "routes": rep.route_histogram})
    return out


def cmd_probe_flat(args):
    _check_eps(args.epsilon)
    net = build_net(_catalog(args.catalog), args.epsilon)
    metric = ModelMetric(args.epsilon, "thin", args.d1, net.catalog)
    out = []
    for r in args.radius:
        p = flat_sector_probe(net, r, metric, _seed(args))
        out.append({"radius": p.radius, "sides": list(p.sides), "diagonals": list(p.diagonals),
                    "ratio": p.ratio, "deviation": p.deviation, "bound": p.bound})
    return out


def cmd_export_catalog(args):
    pd = _decomposition(args.surface)
    g, p = pd.surface.genus, pd.surface.punctures
    text = catalog_to_json(generate_catalog(g, p, args.labeled))
    if args.out:
        try:
            Path(args.out).write_text(text, encoding="utf-8")
        except OSError as exc:
            raise InputError(f"{args.out}: {exc.strerror}") from exc
        return None
    sys.stdout.write(text)
    return None


def cmd_accept(args):
    ks = args.criterion or sorted(CRITERIA)
    out = []
    for k in ks:
        kw = {} if k == 11 else {"seed": args.seed or 0}
        r = run_criterion(k, **kw)
        out.append({"criterion": r.criterion, "name": r.name, "passed": r.passed,
                    "seconds": r.seconds, "details": r.details})
    return out


# --- parser --------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--surface", help="shipped surface or decomposition name, or a decomposition file")
    common.add_argument("--catalog", help="shipped catalog name or catalog file")
    common.add_argument("--epsilon", type=float, default=EPSILON_0)
    common.add_argument("--d1", type=float, default=1.0)
    common.add_argument("--seed", type=int)
    common.add_argument("--samples", type=int, default=1000)
    common.add_argument("--format", choices=("json", "csv"), default="json")
    common.add_argument("--out", help="write output here instead of stdout")

    parser = argparse.ArgumentParser(prog="moduli-tiler", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("surface", parents=[common], help="complexity, pants and catalog summary")
    p.set_defaults(func=cmd_surface)

    p = sub.add_parser("classify", parents=[common], help="thick/thin tile of each point")
    p.add_argument("points", nargs="+", help="point files (JSON object or list; '-' for stdin)")
    p.set_defaults(func=cmd_classify)

    p = sub.add_parser("short-curves", parents=[common], help="curves shorter than epsilon")
    p.add_argument("points", nargs="+")
    p.add_argument("--word-bound", type=int, default=6)
    p.set_defaults(func=cmd_short_curves)

    p = sub.add_parser("dist", parents=[common], help="model distance between two points")
    p.add_argument("points", nargs="+")
    p.add_argument("--mode", choices=MODES, default="thin")
    p.add_argument("--with-cone", action="store_true", help="also use the route through the cone")
    p.set_defaults(func=cmd_dist)

    p = sub.add_parser("cone", help="cone distance or CAT(0) sampling")
    cone_sub = p.add_subparsers(dest="action", required=True)
    q = cone_sub.add_parser("dist", parents=[common], help="distance between two cone points")
    q.add_argument("points", nargs=2, help="cone points as JSON text or files")
    q.set_defaults(func=cmd_cone)
    q = cone_sub.add_parser("check-cat0", parents=[common], help="sampled comparison defects")
    q.add_argument("--radius", type=float, default=3.0, help="sampling radius")
    q.set_defaults(func=cmd_cone)

    p = sub.add_parser("net", parents=[common], help="net cones and base points")
    p.set_defaults(func=cmd_net)

    p = sub.add_parser("distortion", parents=[common], help="sampled distortion of f_n")
    p.add_argument("--n", type=int, nargs="+", default=[1])
    p.add_argument("--radius", type=float, nargs="+", default=[10.0])
    p.add_argument("--mode", choices=MODES, default="thin")
    p.set_defaults(func=cmd_distortion)

    p = sub.add_parser("probe-flat", parents=[common], help="square side/diagonal ratios in a net cone")
    p.add_argument("--radius", type=float, nargs="+", default=[10.0, 20.0, 40.0])
    p.set_defaults(func=cmd_probe_flat)

    p = sub.add_parser("export-catalog", parents=[common], help="regenerate a catalog with the oracle")
    p.add_argument("--labeled", action="store_true", help="keep punctures labeled")
    p.set_defaults(func=cmd_export_catalog)

    p = sub.add_parser("accept", parents=[common], help="run acceptance checks")
    p.add_argument("--criterion", type=int, nargs="+", choices=sorted(CRITERIA))
    p.set_defaults(func=cmd_accept)
    return parser


def _fail(code, kind, message):
    sys.stderr.write(_encode({"error": kind, "message": str(message)}) + "\n")
    return code


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        records = args.func(args)
        if records is not None:
            _emit(records, args)
    except InputError as exc:
        return _fail(EXIT_IO, "input", exc)
    except OSError as exc:
        return _fail(EXIT_IO, "io", exc)
    except (HyperbolicError, ComplexError, TopologyError, KeyError) as exc:
        return _fail(EXIT_DOMAIN, "domain", exc)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
