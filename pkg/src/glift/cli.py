"""``glift`` command line front end.

Usage::

    glift <command> --input problem.json --output report.json [--summary] [--threads N] [--seed S]
    glift verify --input report.json [--output verdict.json]

Exit codes: 0 success, 2 schema error, 3 mathematical inconsistency,
4 tolerance failure.  Reports are byte-identical for identical
(document, seed, version); the wall-clock field is only added with
``--timing``.
"""

from __future__ import annotations

import argparse
import copy
import hashlib
import json
import math
import os
import sys
import time
import warnings
from typing import Any, Callable

import jsonschema
import numpy as np

from . import __version__
from .cech import (Cochain, cohomology, default_budget, is_cocycle, random_cocycle, solve_trivialization,
                   verify_certificate, verify_witness)
from .connections import (AlgebraSplitting, LocalConnection, bianchi_residual, chart_grid, chern_number,
                          circle_squaring_splitting, constant_connection, curvature, gauge_compat_residual,
                          gerbe_curvature, lift_connection, monopole, overlap_difference, product_splitting,
                          relocate, zero_connection)
from .errors import GliftError, InconsistencyError, SchemaError, ToleranceError
from .forms import FormField
from .geometry import DEFAULT_GRID, ChartedGeometry, Nerve, builtin_geometry, builtin_nerve
from .groups import MatrixGroup, extension_from_descriptor, group_from_descriptor
from .holonomy import (PathSpec, TransitiveDistribution, cyclic_reduction, full_reduction, loop_holonomy_sample,
                       spin_reduction, td_holonomy, trivial_reduction)
from .lifting import LiftingProblem, TowerSpec, lift_cochain, obstruction, quotient_cocycle, tower_obstructions

SCHEMA_VERSION = 1
COMMANDS = ("cohomology", "obstruct", "tower", "trivialize", "curvature", "chern", "holonomy", "td-holonomy",
            "prop1-check")

# ---------------------------------------------------------------------------
# Schemas
# ---------------------------------------------------------------------------

_GROUP = {"type": "object", "required": ["kind"], "properties": {"kind": {"type": "string"}}}
_NERVE = {"oneOf": [
    {"type": "string"},
    {"type": "object", "additionalProperties": False, "required": ["vertices", "simplices"],
     "properties": {"vertices": {"type": "integer", "minimum": 1},
                    "simplices": {"type": "array", "items": {"type": "array", "items": {"type": "integer"}}}}},
]}
_EXTENSION = {"type": "object"}
_COCYCLE = {"oneOf": [
    {"type": "object", "additionalProperties": False, "required": ["degree", "group", "values"],
     "properties": {"degree": {"type": "integer"}, "group": _GROUP, "values": {"type": "object"}}},
    {"type": "object", "additionalProperties": False, "required": ["preset"],
     "properties": {"preset": {"enum": ["identity", "generator", "random", "quotient"]},
                    "index": {"type": "integer", "minimum": 0},
                    "degree": {"type": "integer", "minimum": 0},
                    "group": _GROUP}},
]}
_GEOMETRY = {"type": "string", "enum": ["sphere2", "torus1", "plane1"]}
_GRID = {"type": "array", "items": {"type": "integer", "minimum": 3}, "minItems": 2, "maxItems": 2}
_MATRIX = {"type": "object", "additionalProperties": False, "required": ["re"],
           "properties": {"re": {"type": "array"}, "im": {"type": "array"}}}
_CONNECTION = {"oneOf": [
    {"type": "object", "additionalProperties": False, "required": ["preset"],
     "properties": {"preset": {"enum": ["monopole", "zero", "constant"]},
                    "charge": {"type": "integer"}, "group": _GROUP,
                    "matrices": {"type": "array", "items": _MATRIX}}},
    {"type": "object", "additionalProperties": False, "required": ["inline"],
     "properties": {"inline": {
         "type": "object", "additionalProperties": False, "required": ["group", "charts"],
         "properties": {"group": _GROUP,
                        "charts": {"type": "array", "items": {
                            "type": "object", "additionalProperties": False, "required": ["components"],
                            "properties": {"components": {"type": "array", "items": _MATRIX}}}},
                        "transitions": {"type": "object", "additionalProperties": _MATRIX}}}}},
]}
_LOOP = {"oneOf": [
    {"type": "object", "additionalProperties": False, "required": ["preset", "theta"],
     "properties": {"preset": {"const": "latitude"}, "theta": {"type": "number"}, "turns": {"type": "number"},
                    "steps": {"type": "integer"}, "base_theta": {"type": "number"}}},
    {"type": "object", "additionalProperties": False, "required": ["preset", "start", "end"],
     "properties": {"preset": {"const": "straight"}, "chart": {"type": "integer"},
                    "start": {"type": "array", "items": {"type": "number"}},
                    "end": {"type": "array", "items": {"type": "number"}}, "steps": {"type": "integer"}}},
    {"type": "object", "additionalProperties": False, "required": ["points"],
     "properties": {"points": {"type": "array", "items": {"type": "array", "items": {"type": "number"}}},
                    "chart": {"type": "integer"}, "closed": {"type": "boolean"}, "steps": {"type": "integer"}}},
]}
_COMMON = {"command": {"enum": list(COMMANDS)}, "schema_version": {"const": SCHEMA_VERSION},
           "seed": {"type": "integer"}, "budget": {"type": "integer", "minimum": 1}}
_NUMERIC = {"geometry": _GEOMETRY, "grid": _GRID, "connection": _CONNECTION}


def _schema(required: list[str], props: dict) -> dict:
    return {"type": "object", "additionalProperties": False, "required": ["command"] + required,
            "properties": {**_COMMON, **props}}


SCHEMAS: dict[str, dict] = {
    "cohomology": _schema(["nerve", "coeff", "degree"], {"nerve": _NERVE, "coeff": _GROUP,
                                                         "degree": {"type": "integer", "minimum": 0}}),
    "obstruct": _schema(["nerve", "extension", "cocycle"], {"nerve": _NERVE, "extension": _EXTENSION,
                                                            "cocycle": _COCYCLE, "strict": {"type": "boolean"}}),
    "tower": _schema(["nerve", "levels", "cocycle"], {"nerve": _NERVE, "levels": {"type": "array", "minItems": 1,
                                                                                  "items": _EXTENSION},
                                                      "cocycle": _COCYCLE, "stop_on_obstruction": {"type": "boolean"},
                                                      "strict": {"type": "boolean"}}),
    "trivialize": _schema(["nerve", "cocycle"], {"nerve": _NERVE, "cocycle": _COCYCLE, "strict": {"type": "boolean"}}),
    "curvature": _schema(["geometry", "connection"], dict(_NUMERIC)),
    "chern": _schema(["geometry", "connection"], dict(_NUMERIC)),
    "holonomy": _schema(["geometry", "connection", "loops"], {**_NUMERIC, "loops": {"type": "array", "minItems": 1,
                                                                                    "items": _LOOP},
                                                              "holonomy_budget": {"type": "integer", "minimum": 1}}),
    "td-holonomy": _schema(["geometry", "connection", "reduction", "loop"], {
        **_NUMERIC, "loop": _LOOP,
        "reduction": {"type": "object", "additionalProperties": False, "required": ["kind"],
                      "properties": {"kind": {"enum": ["trivial", "full", "cyclic", "spin"]},
                                     "order": {"type": "integer", "minimum": 1}}}}),
    "prop1-check": _schema(["geometry", "connection", "splitting"], {
        **_NUMERIC,
        "splitting": {"type": "object", "additionalProperties": False, "required": ["kind"],
                      "properties": {"kind": {"enum": ["product", "circle-squaring"]}, "h_group": _GROUP}},
        "lifted_transitions": {"enum": ["section", "half-angle"]},
        "h": {"type": "array", "items": {"oneOf": [{"type": "null"}, {"type": "array", "items": _MATRIX}]}},
        "h_alt": {"type": "array", "items": {"oneOf": [{"type": "null"}, {"type": "array", "items": _MATRIX}]}}}),
}


def validate(doc: Any) -> str:
    """Validate a problem document; returns the command name."""
    if not isinstance(doc, dict):
        raise SchemaError("problem document must be a JSON object")
    command = doc.get("command")
    if command not in SCHEMAS:
        raise SchemaError(f"unknown command {command!r}; expected one of {', '.join(COMMANDS)}")
    validator = jsonschema.Draft202012Validator(SCHEMAS[command])
    errors = sorted(validator.iter_errors(doc), key=lambda e: list(e.absolute_path))
    if errors:
        e = errors[0]
        where = "/".join(str(p) for p in e.absolute_path) or "<root>"
        raise SchemaError(f"{where}: {e.message}")
    return command


# ---------------------------------------------------------------------------
# Builders
# ---------------------------------------------------------------------------


def _nerve(doc) -> Nerve:
    return builtin_nerve(doc) if isinstance(doc, str) else Nerve.from_json(doc)


def _cocycle(doc: dict, nerve: Nerve, group, degree: int, rng: np.random.Generator, extension=None) -> Cochain:
    if "values" in doc:
        c = Cochain.from_json(doc, nerve)
        if group is not None and c.group != group:
            raise SchemaError(f"cocycle is valued in {c.group}, expected {group}")
        return c
    preset = doc["preset"]
    if "group" in doc:
        group = group_from_descriptor(doc["group"])
    degree = int(doc.get("degree", degree))
    if group is None:
        raise SchemaError("cocycle preset needs a 'group'")
    if preset == "identity":
        return Cochain.constant(nerve, degree, group, group.identity())
    if preset == "generator":
        H = cohomology(nerve, group, degree)
        idx = int(doc.get("index", 0))
        if idx >= len(H.generators):
            raise SchemaError(f"H^{degree}({nerve.name or 'nerve'}; {group}) has {len(H.generators)} generators, "
                              f"index {idx} requested")
        return H.generators[idx]
    if preset == "random":
        return random_cocycle(nerve, degree, group, rng)
    if extension is None:
        raise SchemaError("the 'quotient' preset needs an extension")
    return quotient_cocycle(random_cocycle(nerve, 1, extension.G, rng), extension)


def _matrix(doc: dict) -> np.ndarray:
    re = np.asarray(doc["re"], dtype=float)
    im = np.asarray(doc.get("im", np.zeros_like(re)), dtype=float)
    if re.shape != im.shape:
        raise SchemaError("real and imaginary parts have different shapes")
    return re + 1j * im


def _geometry(doc: dict) -> ChartedGeometry:
    return builtin_geometry(doc["geometry"], doc.get("grid") or DEFAULT_GRID)


def _connection(doc: dict, geo: ChartedGeometry) -> LocalConnection:
    spec = doc["connection"]
    if "inline" in spec:
        inline = spec["inline"]
        group = group_from_descriptor(inline["group"])
        if not isinstance(group, MatrixGroup):
            raise SchemaError("inline connections need a matrix group")
        if len(inline["charts"]) != len(geo.charts):
            raise SchemaError(f"inline connection has {len(inline['charts'])} charts, geometry has {len(geo.charts)}")
        forms = []
        for chart, entry in zip(geo.charts, inline["charts"]):
            comps = [_matrix(m) for m in entry["components"]]
            if len(comps) != chart.dim:
                raise SchemaError(f"chart {chart.name!r}: need {chart.dim} components")
            want = chart.shape + (group.n, group.n)
            for a, c in enumerate(comps):
                if c.shape != want:
                    raise SchemaError(f"chart {chart.name!r} component {a}: shape {c.shape}, expected {want}")
            forms.append(FormField(chart_grid(chart), 1, {(a,): c for a, c in enumerate(comps)}, (group.n, group.n)))
        trans = {}
        for key, m in (inline.get("transitions") or {}).items():
            try:
                i, j = (int(x) for x in key.split(","))
            except ValueError:
                raise SchemaError(f"bad overlap key {key!r}") from None
            trans[(i, j)] = _matrix(m)
        for ov in geo.overlaps:
            if (ov.i, ov.j) not in trans and (ov.j, ov.i) in trans:
                trans[(ov.i, ov.j)] = relocate(group.inv(trans[(ov.j, ov.i)]), geo.overlap(ov.j, ov.i), ov)
        return LocalConnection(geo, group, forms, trans, "inline")
    preset = spec["preset"]
    if preset == "monopole":
        if "charge" not in spec:
            raise SchemaError("connection/charge: required for the monopole preset")
        return monopole(geo, spec["charge"])
    group = group_from_descriptor(spec.get("group", {"kind": "u", "dim": 1}))
    if not isinstance(group, MatrixGroup):
        raise SchemaError("connections need a matrix group")
    if preset == "zero":
        return zero_connection(geo, group)
    if "matrices" not in spec:
        raise SchemaError("connection/matrices: required for the constant preset")
    return constant_connection(geo, group, [_matrix(m) for m in spec["matrices"]])


def _loop(doc: dict, geo: ChartedGeometry) -> PathSpec:
    steps = int(doc.get("steps", 1024))
    if doc.get("preset") == "latitude":
        base = doc.get("base_theta")
        if base is None:
            return PathSpec.latitude(geo, doc["theta"], doc.get("turns", 1), steps)
        return PathSpec.lasso(geo, base, doc["theta"], doc.get("turns", 1), steps)
    if doc.get("preset") == "straight":
        return PathSpec.straight(geo, doc.get("chart", 0), doc["start"], doc["end"], steps)
    return PathSpec.from_samples(geo, doc.get("chart", 0), doc["points"], doc.get("steps"), doc.get("closed", False))


# ---------------------------------------------------------------------------
# Commands
# ---------------------------------------------------------------------------


def _cmd_cohomology(doc, ctx) -> dict:
    nerve = _nerve(doc["nerve"])
    group = group_from_descriptor(doc["coeff"])
    H = cohomology(nerve, group, doc["degree"])
    return {"factors": H.factors, "generators": [g.to_json() for g in H.generators],
            "f_vector": list(nerve.f_vector)}


def _obstruction_json(rep) -> dict:
    return rep.to_json()


def _cmd_obstruct(doc, ctx) -> dict:
    nerve = _nerve(doc["nerve"])
    ext = extension_from_descriptor(doc["extension"])
    k = _cocycle(doc["cocycle"], nerve, ext.K, 1, ctx["rng"], ext)
    rep = obstruction(LiftingProblem(nerve, ext, k), ctx["budget"], doc.get("strict", False))
    return {"bundle": k.to_json(), "lift": lift_cochain(LiftingProblem(nerve, ext, k)).to_json(),
            "obstruction": _obstruction_json(rep)}


def _cmd_tower(doc, ctx) -> dict:
    nerve = _nerve(doc["nerve"])
    levels = tuple(extension_from_descriptor(e) for e in doc["levels"])
    k = _cocycle(doc["cocycle"], nerve, levels[0].K, 1, ctx["rng"], levels[0])
    reps = tower_obstructions(TowerSpec(levels, k, doc.get("stop_on_obstruction", False)), ctx["budget"],
                              doc.get("strict", False))
    return {"bundle": k.to_json(), "levels": [_obstruction_json(r) for r in reps]}


def _cmd_trivialize(doc, ctx) -> dict:
    nerve = _nerve(doc["nerve"])
    c = _cocycle(doc["cocycle"], nerve, None, 2, ctx["rng"])
    triv = solve_trivialization(c, doc.get("strict", False), ctx["budget"])
    return {"cocycle": c.to_json(), "trivialization": triv.to_json()}


def _cmd_curvature(doc, ctx) -> dict:
    geo = _geometry(doc)
    A = _connection(doc, geo)
    F = curvature(A)
    gauge = gauge_compat_residual(A)
    return {"connection": A.name, "curvature_max": [f.max_norm() for f in F],
            "gauge": [g.to_json() for g in gauge], "bianchi": bianchi_residual(A),
            "tolerances": {"gauge": 1e-6, "curvature_covariance": 1e-6, "bianchi": 1e-5}}


def _cmd_chern(doc, ctx) -> dict:
    geo = _geometry(doc)
    A = _connection(doc, geo)
    if A.group.n != 1:
        raise SchemaError("chern needs a U(1) connection")
    res = chern_number(curvature(A), geo)
    return {**res.to_json(), "tolerances": {"defect": 1e-6, "failure": 0.05}}


def _cmd_holonomy(doc, ctx) -> dict:
    geo = _geometry(doc)
    A = _connection(doc, geo)
    loops = [_loop(l, geo) for l in doc["loops"]]
    sample = loop_holonomy_sample(A, loops, budget=doc.get("holonomy_budget", 64))
    return {"elements": [r.to_json(A.group) for r in sample.results], "summary": sample.summary,
            "tolerances": {"classification": 1e-8, "unitarity": 1e-9}}


def _reduction(doc: dict, A: LocalConnection):
    kind = doc["kind"]
    if kind == "trivial":
        return trivial_reduction(A.group)
    if kind == "full":
        return full_reduction(A.group)
    if kind == "spin":
        return spin_reduction()
    if "order" not in doc:
        raise SchemaError("reduction/order: required for the cyclic reduction")
    return cyclic_reduction(doc["order"])


def _cmd_td_holonomy(doc, ctx) -> dict:
    geo = _geometry(doc)
    A = _connection(doc, geo)
    td = TransitiveDistribution(A, _reduction(doc["reduction"], A))
    res = td_holonomy(td, _loop(doc["loop"], geo))
    return {"reduction": td.reduction.name, "quotient_group": td.reduction.M.descriptor(),
            "element": res.to_json(td.reduction.M), "tolerances": {"gauge": 1e-4}}


def _h_forms(entries, geo: ChartedGeometry, m: int):
    if entries is None:
        return None
    out = []
    for chart, entry in zip(geo.charts, entries):
        if entry is None:
            out.append(None)
            continue
        mats = np.asarray([_matrix(x) for x in entry])
        if mats.shape != (chart.dim, m, m):
            raise SchemaError(f"h on chart {chart.name!r} needs {chart.dim} constant {m}x{m} matrices")
        out.append((lambda mats: lambda p: np.broadcast_to(mats, p.shape[:-1] + mats.shape))(mats))
    return out


def _cmd_overlap_identity(doc, ctx) -> dict:
    geo = _geometry(doc)
    A = _connection(doc, geo)
    sdoc = doc["splitting"]
    if sdoc["kind"] == "product":
        H = group_from_descriptor(sdoc.get("h_group", {"kind": "u", "dim": 1}))
        if not isinstance(H, MatrixGroup):
            raise SchemaError("splitting/h_group must be a matrix group")
        splitting: AlgebraSplitting = product_splitting(A.group, H)
        m = H.n
    else:
        splitting = circle_squaring_splitting()
        m = 0
    g = None
    if doc.get("lifted_transitions") == "half-angle":
        if doc["connection"].get("preset") != "monopole":
            raise SchemaError("half-angle lifted transitions are defined for the sphere2 monopole")
        q = float(doc["connection"].get("charge", 0))
        if q % 2:
            raise InconsistencyError("odd monopole charge: no continuous half-angle lift exists on the band",
                                     location=(0, 1))
        g = {(0, 1): lambda p: np.exp(-0.5j * q * p[..., 1])[..., None, None]}
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        L = lift_connection(A, splitting, g, _h_forms(doc.get("h"), geo, m))
        D = overlap_difference(L)
        other = lift_connection(A, splitting, g, _h_forms(doc.get("h_alt"), geo, m)) if "h_alt" in doc else None
        K = gerbe_curvature(L, other)
    return {"splitting": splitting.name, "projection_residual": L.projection_residual, **D.to_json(),
            "gerbe": K.to_json(), "warnings": sorted({str(w.message) for w in caught}),
            "tolerances": {"r1": 1e-8, "r2": 1e-8, "lift_independence": 1e-6}}


HANDLERS: dict[str, Callable[[dict, dict], dict]] = {
    "cohomology": _cmd_cohomology, "obstruct": _cmd_obstruct, "tower": _cmd_tower,
    "trivialize": _cmd_trivialize, "curvature": _cmd_curvature, "chern": _cmd_chern,
    "holonomy": _cmd_holonomy, "td-holonomy": _cmd_td_holonomy, "prop1-check": _cmd_overlap_identity,
}


def _digest(doc: dict) -> str:
    return hashlib.sha256(json.dumps(doc, sort_keys=True, separators=(",", ":")).encode()).hexdigest()


def _jsonable(x):
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, np.ndarray):
        return _jsonable(x.tolist())
    if isinstance(x, (np.integer,)):
        return int(x)
    if isinstance(x, (np.floating,)):
        return float(x)
    if isinstance(x, (np.bool_,)):
        return bool(x)
    if isinstance(x, float) and not math.isfinite(x):
        return repr(x)
    return x


def run(doc: dict, seed: int | None = None, budget: int | None = None) -> dict:
    """Validate and execute a problem document; returns the report dictionary.

    Raises :class:`GliftError` subclasses; :func:`main` maps them to exit codes.
    """
    command = validate(doc)
    seed = int(seed if seed is not None else doc.get("seed", 0))
    budget = budget if budget is not None else doc.get("budget") or default_budget()
    if "GLIFT_BUDGET" in os.environ:
        budget = default_budget()
    ctx = {"rng": np.random.default_rng(seed), "budget": int(budget)}
    results = HANDLERS[command](copy.deepcopy(doc), ctx)
    return {"tool": "glift", "version": __version__, "schema_version": SCHEMA_VERSION, "command": command,
            "input_digest": _digest(doc), "seed": seed, "budget": int(budget), "status": "ok",
            "results": _jsonable(results)}


# ---------------------------------------------------------------------------
# Verification of shipped evidence
# ---------------------------------------------------------------------------


def _verify_obstruction(entry: dict, nerve: Nerve) -> list[str]:
    failures = []
    c = Cochain.from_json(entry["cocycle"], nerve)
    if not is_cocycle(c):
        failures.append(f"level {entry.get('level')}: shipped obstruction is not a cocycle")
    triv = entry.get("trivialization")
    if triv is None or entry.get("trivial") is None:
        return failures
    failures += _verify_trivialization(triv, c, nerve, f"level {entry.get('level')}")
    return failures


def _verify_trivialization(triv: dict, c: Cochain, nerve: Nerve, where: str) -> list[str]:
    if triv["trivial"]:
        if "witness" not in triv:
            return [f"{where}: trivial verdict without a witness"]
        b = Cochain.from_json(triv["witness"], nerve)
        return [] if verify_witness(c, b) else [f"{where}: witness fails δb = c"]
    if "certificate" not in triv:
        return [f"{where}: nontrivial verdict without a certificate"]
    ok = verify_certificate(nerve, c.degree, triv["modulus"], c.to_vector(), triv["certificate"]["functional"])
    return [] if ok else [f"{where}: certificate fails re-verification"]


def verify_report(report: dict, problem: dict | None = None) -> dict:
    """Re-check witnesses and certificates embedded in a report."""
    if not isinstance(report, dict) or report.get("tool") != "glift":
        raise SchemaError("not a glift report")
    command = report.get("command")
    res = report.get("results", {})
    checked, failures = 0, []
    nerve_doc = (problem or {}).get("nerve")
    if command in ("obstruct", "tower", "trivialize"):
        if nerve_doc is None:
            raise SchemaError(f"verifying the {command!r} report needs the problem document (--problem)")
        if problem is not None and _digest(problem) != report.get("input_digest"):
            raise SchemaError("problem document does not match the report's input digest")
        nerve = _nerve(nerve_doc)
        if command == "obstruct":
            failures += _verify_obstruction(res["obstruction"], nerve)
            checked = 1
        elif command == "tower":
            for entry in res["levels"]:
                failures += _verify_obstruction(entry, nerve)
            checked = len(res["levels"])
        else:
            c = Cochain.from_json(res["cocycle"], nerve)
            failures += _verify_trivialization(res["trivialization"], c, nerve, "trivialize")
            checked = 1
    return {"command": command, "checked": checked, "verified": not failures, "failures": failures}


# ---------------------------------------------------------------------------
# Entry point
# ---------------------------------------------------------------------------

EXIT_CODES = {SchemaError: 2, InconsistencyError: 3, ToleranceError: 4}


def _exit_code(exc: BaseException) -> int:
    for cls, code in EXIT_CODES.items():
        if isinstance(exc, cls):
            return code
    return 1


def _summary(report: dict) -> str:
    res = report.get("results", {})
    lines = [f"glift {report['version']}  command={report['command']}  status={report['status']}"]
    if report["status"] != "ok":
        err = report["error"]
        lines.append(f"  {err['type']}: {err['message']}")
        return "\n".join(lines)
    for key in ("factors", "chern_number", "defect", "r1", "r2", "summary", "bianchi"):
        if key in res:
            lines.append(f"  {key:<18} {res[key]}")
    if res.get("gerbe", {}).get("lift_independence") is not None:
        lines.append(f"  {'lift_independence':<18} {res['gerbe']['lift_independence']}")
    if "obstruction" in res:
        o = res["obstruction"]
        lines.append(f"  {'obstruction':<18} class {o['class_coordinates']} in {o['cohomology_factors']}, "
                     f"trivial={o['trivial']}")
    for lvl in res.get("levels", []):
        lines.append(f"  level {lvl['level']} (deg {lvl['degree']}): class {lvl['class_coordinates']}, "
                     f"trivial={lvl['trivial']}")
    if "trivialization" in res:
        lines.append(f"  {'trivial':<18} {res['trivialization']['trivial']}")
    for g in res.get("gauge", []):
        lines.append(f"  overlap {g['overlap']}: connection {g['connection_residual']:.3e}, "
                     f"curvature {g['curvature_residual']:.3e}")
    if "element" in res:
        lines.append(f"  {'element':<18} {res['element']['element']}")
    return "\n".join(lines)


def _limit_threads(n: int) -> None:
    for var in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS"):
        os.environ[var] = str(n)
    try:
        from threadpoolctl import threadpool_limits
    except ImportError:
        return
    threadpool_limits(n)


def _write(path: str | None, payload: dict) -> None:
    text = json.dumps(payload, sort_keys=True, indent=2) + "\n"
    if path in (None, "-"):
        sys.stdout.write(text)
    else:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="glift", description="Lifting obstructions, gerbes and holonomy.")
    parser.add_argument("--version", action="version", version=f"glift {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS + ("verify",):
        p = sub.add_parser(name)
        p.add_argument("--input", required=True, help="problem document (or report, for verify)")
        p.add_argument("--output", default=None, help="report path (default: stdout)")
        p.add_argument("--summary", action="store_true", help="print a human-readable summary to stderr")
        p.add_argument("--threads", type=int, default=None, help="cap on worker threads")
        p.add_argument("--seed", type=int, default=None, help="seed for randomized presets")
        p.add_argument("--timing", action="store_true", help="add wall-clock seconds (breaks byte-identity)")
        if name == "verify":
            p.add_argument("--problem", default=None, help="problem document the report was produced from")
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    if args.threads is not None:
        if args.threads < 1:
            print("glift: --threads must be positive", file=sys.stderr)
            return 2
        _limit_threads(args.threads)
    start = time.perf_counter()
    try:
        try:
            with open(args.input, encoding="utf-8") as fh:
                doc = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise SchemaError(f"cannot read {args.input}: {exc}") from None
        if args.command == "verify":
            problem = None
            if args.problem:
                with open(args.problem, encoding="utf-8") as fh:
                    problem = json.load(fh)
            verdict = verify_report(doc, problem)
            _write(args.output, verdict)
            if args.summary:
                print(f"verify: {verdict['checked']} item(s), verified={verdict['verified']}", file=sys.stderr)
            return 0 if verdict["verified"] else 3
        if isinstance(doc, dict) and doc.get("command") not in (None, args.command):
            raise SchemaError(f"document command {doc.get('command')!r} does not match {args.command!r}")
        if isinstance(doc, dict):
            doc.setdefault("command", args.command)
        report = run(doc, args.seed)
        code = 0
    except GliftError as exc:
        code = _exit_code(exc)
        report = {"tool": "glift", "version": __version__, "schema_version": SCHEMA_VERSION,
                  "command": args.command, "status": "error",
                  "error": {"type": type(exc).__name__, "message": str(exc),
                            "location": _jsonable(getattr(exc, "location", None))}}
        if isinstance(exc, ToleranceError):
            report["error"].update({"value": exc.value, "tolerance": exc.tolerance})
    if args.timing:
        report["wall_clock_seconds"] = time.perf_counter() - start
    _write(args.output, report)
    if args.summary:
        print(_summary(report), file=sys.stderr)
    return code


if __name__ == "__main__":
    sys.exit(main())
