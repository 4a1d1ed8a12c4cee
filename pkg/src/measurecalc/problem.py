"""Declarative problem files.

A problem file is a JSON document with four blocks::

    {
      "spaces":   {"X": {"labels": ["a", "b"], "volumes": [1, 1]},
                   "T": {"log_edges": [1, 2, 4, 8]}},
      "measures": {"prior": {"space": "X", "density": [0.5, 0.5]},
                   "A":     {"space": "X", "set": ["a"]}},
      "mappings": {"phi": {"domain": "X", "codomain": "X", "map": ["a", "a"]}},
      "task":     {"type": "intersect", "a": "prior", "b": "A"}
    }

The schema is closed: unknown keys are rejected, every name the task uses
must resolve, and array lengths must match the cell counts.  Errors carry a
location, either ``line L col C`` for JSON syntax or a dotted key path.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Any

import numpy as np

from .errors import (
    MappingDomainError,
    ProblemError,
    ProblemSyntaxError,
    SchemaViolation,
    UnknownKey,
    UnresolvedReference,
)
from .mapping import CellMapping, ExprMapping
from .measure import GridMeasure, NormalizationMode, measure_set, uniform
from .sampling import SamplerConfig
from .space import Space, interval_space, log_interval_space, make_space

__all__ = ["ProblemFile", "Task", "TASK_TYPES", "parse_problem", "load_problem"]

TASK_TYPES = (
    "intersect",
    "pushforward",
    "pullback",
    "condition",
    "verify-compat",
    "infer",
    "sphere-demo",
    "resistance-demo",
    "sets-demo",
)

_SAMPLER_KEYS = ("seed", "streams", "n", "acceptance_scale", "workers")

# task type -> (required keys, optional keys); sampler keys are added where used
_TASK_KEYS = {
    "intersect": (("a", "b"), ("mode", "method") + _SAMPLER_KEYS),
    "pushforward": (("measure", "mapping"), ()),
    "pullback": (("measure", "mapping"), ("mode",)),
    "condition": (("measure", "set"), ()),
    "verify-compat": (("pi", "tau", "mapping"), ("mode",)),
    "infer": (("prior", "observed", "mapping"), ("method",) + _SAMPLER_KEYS),
    "sphere-demo": ((), ("tilings", "f1", "f2") + _SAMPLER_KEYS),
    "resistance-demo": ((), ("V0", "I0", "sigma_V", "sigma_I", "grid_cells") + _SAMPLER_KEYS),
    "sets-demo": (("mapping", "x_prior", "y_obs"), ()),
}


@dataclass(frozen=True)
class Task:
    type: str
    args: dict
    sampler: SamplerConfig | None = None


@dataclass
class ProblemFile:
    spaces: dict = field(default_factory=dict)
    measures: dict = field(default_factory=dict)
    mappings: dict = field(default_factory=dict)
    task: Task | None = None
    description: str = ""


def _where(path):
    return ".".join(str(p) for p in path) or "<root>"


def _obj(value, path) -> dict:
    if not isinstance(value, dict):
        raise SchemaViolation(f"expected an object, got {type(value).__name__}", _where(path))
    return value


def _closed(block: dict, allowed, path):
    for key in block:
        if key not in allowed:
            raise UnknownKey(f"unknown key {key!r} (allowed: {', '.join(allowed)})", _where(path + [key]))


def _str(value, path) -> str:
    if not isinstance(value, str):
        raise SchemaViolation(f"expected a string, got {type(value).__name__}", _where(path))
    return value


def _num(value, path) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise SchemaViolation(f"expected a number, got {type(value).__name__}", _where(path))
    return float(value)


def _int(value, path, minimum=0) -> int:
    if isinstance(value, bool) or not isinstance(value, int) or value < minimum:
        raise SchemaViolation(f"expected an integer >= {minimum}, got {value!r}", _where(path))
    return value


def _nums(value, path) -> list:
    if not isinstance(value, list):
        raise SchemaViolation("expected an array of numbers", _where(path))
    return [_num(v, path + [i]) for i, v in enumerate(value)]


def _strs(value, path) -> list:
    if not isinstance(value, list):
        raise SchemaViolation("expected an array of strings", _where(path))
    return [_str(v, path + [i]) for i, v in enumerate(value)]


def _ref(table: dict, name, kind, path):
    name = _str(name, path)
    if name not in table:
        raise UnresolvedReference(f"{kind} {name!r} is not defined", _where(path))
    return table[name]


def _mode_of(value, path):
    try:
        return NormalizationMode(_str(value, path))
    except ValueError:
        raise SchemaViolation(
            f"mode must be 'unit_constant' or 'renormalize', got {value!r}", _where(path)
        ) from None


def _labels_to_cells(space: Space, labels, path):
    labels = _strs(labels, path)
    for i, lab in enumerate(labels):
        if lab not in space.labels:
            raise UnresolvedReference(f"cell {lab!r} is not in space {space.name!r}", _where(path + [i]))
    return space.cells(labels)


# ---------------------------------------------------------------- blocks


def _space(name, block, path) -> Space:
    block = _obj(block, path)
    _closed(block, ("labels", "volumes", "log_edges", "edges"), path)
    shapes = [k for k in ("volumes", "log_edges", "edges") if k in block]
    if len(shapes) != 1:
        raise SchemaViolation(
            "a space needs exactly one of 'volumes', 'log_edges' or 'edges'", _where(path)
        )
    labels = _strs(block["labels"], path + ["labels"]) if "labels" in block else None
    kind = shapes[0]
    values = _nums(block[kind], path + [kind])
    if kind == "volumes":
        if labels is None:
            raise SchemaViolation("'volumes' needs 'labels'", _where(path))
        if len(labels) != len(values):
            raise SchemaViolation(
                f"{len(labels)} labels but {len(values)} volumes", _where(path + ["volumes"])
            )
        return make_space(labels, values, name=name)
    if labels is not None and len(labels) != len(values) - 1:
        raise SchemaViolation(
            f"{len(labels)} labels for {len(values) - 1} intervals", _where(path + ["labels"])
        )
    build = log_interval_space if kind == "log_edges" else interval_space
    return build(values, labels=labels, name=name)


def _lognormal_measure(space: Space, block, path) -> GridMeasure:
    from .demos import lognormal_cell_probabilities

    block = _obj(block, path)
    _closed(block, ("center", "sigma"), path)
    for key in ("center", "sigma"):
        if key not in block:
            raise SchemaViolation(f"missing key {key!r}", _where(path))
    center = _num(block["center"], path + ["center"])
    sigma = _num(block["sigma"], path + ["sigma"])
    if space.edges is None or space.edges[0] <= 0:
        raise SchemaViolation("'lognormal' needs a space over a gridded positive axis", _where(path))
    if not (center > 0 and sigma > 0):
        raise SchemaViolation("lognormal needs center > 0 and sigma > 0", _where(path))
    p = lognormal_cell_probabilities(space.edges, center, sigma)
    total = math.fsum(p)
    if total <= 0:
        raise SchemaViolation("lognormal puts no mass on the grid", _where(path))
    return GridMeasure.from_masses(space, p / total, "probability")


def _measure(block, spaces, path) -> GridMeasure:
    block = _obj(block, path)
    _closed(block, ("space", "density", "kind", "uniform", "set", "mode", "lognormal"), path)
    if "space" not in block:
        raise SchemaViolation("missing key 'space'", _where(path))
    space = _ref(spaces, block["space"], "space", path + ["space"])
    forms = [k for k in ("density", "uniform", "set", "lognormal") if k in block]
    if len(forms) != 1:
        raise SchemaViolation(
            "a measure needs exactly one of 'density', 'uniform', 'set' or 'lognormal'", _where(path)
        )
    form = forms[0]
    if "kind" in block and form != "density":
        raise SchemaViolation("'kind' applies to 'density' measures only", _where(path + ["kind"]))
    if "mode" in block and form != "set":
        raise SchemaViolation("'mode' applies to 'set' measures only", _where(path + ["mode"]))
    if form == "density":
        dens = _nums(block["density"], path + ["density"])
        if len(dens) != len(space):
            raise SchemaViolation(
                f"density has {len(dens)} values but space {block['space']!r} has {len(space)} cells",
                _where(path + ["density"]),
            )
        kind = _str(block.get("kind", "raw"), path + ["kind"])
        if kind not in ("raw", "probability"):
            raise SchemaViolation("kind must be 'raw' or 'probability'", _where(path + ["kind"]))
        return GridMeasure(space, dens, kind)
    if form == "uniform":
        if block["uniform"] is not True:
            raise SchemaViolation("'uniform' must be true", _where(path + ["uniform"]))
        return uniform(space)
    if form == "set":
        cells = _labels_to_cells(space, block["set"], path + ["set"])
        mode = _mode_of(block.get("mode", "renormalize"), path + ["mode"])
        return measure_set(space, cells, mode)
    return _lognormal_measure(space, block["lognormal"], path + ["lognormal"])


def _discretise(expr_map: ExprMapping, dom: Space, cod: Space, path) -> CellMapping:
    """Cell table of a 1-D analytic map, evaluated at domain cell midpoints."""
    if dom.edges is None or cod.edges is None or expr_map.domain.dim != 1 or expr_map.codomain.dim != 1:
        raise SchemaViolation(
            "an 'expr' mapping between spaces needs one input, one output and interval spaces",
            _where(path),
        )
    mids = 0.5 * (dom.edges[1:] + dom.edges[:-1])
    y = expr_map.apply(mids[:, None])[:, 0]
    idx = np.searchsorted(cod.edges, y, side="right") - 1
    bad = np.flatnonzero((idx < 0) | (idx >= len(cod)))
    if bad.size:
        raise MappingDomainError(
            f"image of cell {dom.labels[bad[0]]!r} falls outside the codomain", index=int(bad[0])
        )
    return CellMapping(dom, cod, idx)


def _mapping(block, spaces, path):
    block = _obj(block, path)
    _closed(block, ("domain", "codomain", "map", "inputs", "expr"), path)
    if ("map" in block) == ("expr" in block):
        raise SchemaViolation("a mapping needs exactly one of 'map' or 'expr'", _where(path))
    if "map" in block:
        for key in ("domain", "codomain"):
            if key not in block:
                raise SchemaViolation(f"missing key {key!r}", _where(path))
        if "inputs" in block:
            raise SchemaViolation("'inputs' applies to 'expr' mappings only", _where(path + ["inputs"]))
        dom = _ref(spaces, block["domain"], "space", path + ["domain"])
        cod = _ref(spaces, block["codomain"], "space", path + ["codomain"])
        labels = _strs(block["map"], path + ["map"])
        if len(labels) != len(dom):
            raise SchemaViolation(
                f"map has {len(labels)} entries but domain {block['domain']!r} has {len(dom)} cells",
                _where(path + ["map"]),
            )
        for i, lab in enumerate(labels):
            if lab not in cod.labels:
                raise UnresolvedReference(
                    f"cell {lab!r} is not in space {block['codomain']!r}", _where(path + ["map", i])
                )
        return CellMapping.from_labels(dom, cod, labels)
    if "inputs" not in block:
        raise SchemaViolation("missing key 'inputs'", _where(path))
    inputs = _strs(block["inputs"], path + ["inputs"])
    expr = block["expr"]
    if isinstance(expr, str):
        outputs = {"y": expr}
    else:
        outputs = {k: _str(v, path + ["expr", k]) for k, v in _obj(expr, path + ["expr"]).items()}
    if not outputs:
        raise SchemaViolation("'expr' needs at least one output", _where(path + ["expr"]))
    try:
        em = ExprMapping(inputs, outputs)
    except MappingDomainError as exc:
        raise UnresolvedReference(str(exc), _where(path + ["expr"])) from None
    except ProblemError as exc:
        raise ProblemSyntaxError(f"in expression: {exc}", _where(path + ["expr"])) from None
    has_dom, has_cod = "domain" in block, "codomain" in block
    if has_dom != has_cod:
        raise SchemaViolation("give both 'domain' and 'codomain' or neither", _where(path))
    if has_dom:
        dom = _ref(spaces, block["domain"], "space", path + ["domain"])
        cod = _ref(spaces, block["codomain"], "space", path + ["codomain"])
        return _discretise(em, dom, cod, path)
    return em


def _sampler(task: dict, path) -> SamplerConfig:
    k = task.get("acceptance_scale", "auto")
    if k != "auto":
        k = _num(k, path + ["acceptance_scale"])
        if not (k > 0 and math.isfinite(k)):
            raise SchemaViolation("acceptance_scale must be 'auto' or > 0", _where(path + ["acceptance_scale"]))
    seed = _int(task.get("seed", 0), path + ["seed"])
    if seed >= 2**64:
        raise SchemaViolation("seed must fit in 64 bits", _where(path + ["seed"]))
    return SamplerConfig(
        seed=seed,
        streams=_int(task.get("streams", 1), path + ["streams"], 1),
        n_samples=_int(task.get("n", 100_000), path + ["n"], 1),
        acceptance_scale=k,
        workers=_int(task.get("workers", 1), path + ["workers"], 1),
    )


def _task(block, spaces, measures, mappings, path) -> Task:
    block = _obj(block, path)
    if "type" not in block:
        raise SchemaViolation("missing key 'type'", _where(path))
    ttype = _str(block["type"], path + ["type"])
    if ttype not in _TASK_KEYS:
        raise SchemaViolation(f"unknown task type {ttype!r} (one of {', '.join(TASK_TYPES)})", _where(path + ["type"]))
    required, optional = _TASK_KEYS[ttype]
    _closed(block, ("type",) + required + optional, path)
    for key in required:
        if key not in block:
            raise SchemaViolation(f"task {ttype!r} needs key {key!r}", _where(path))
    args: dict[str, Any] = {}

    def measure(key):
        return _ref(measures, block[key], "measure", path + [key])

    def mapping(key):
        return _ref(mappings, block[key], "mapping", path + [key])

    def cell_mapping(key):
        m = mapping(key)
        if not isinstance(m, CellMapping):
            raise SchemaViolation(
                f"task {ttype!r} needs a cell mapping ('map' table, or 'expr' between interval spaces)",
                _where(path + [key]),
            )
        return m

    if "mode" in block:
        args["mode"] = _mode_of(block["mode"], path + ["mode"])
    if "method" in block:
        method = _str(block["method"], path + ["method"])
        allowed = ("exact", "coincidence") if ttype == "intersect" else ("exact", "sampled")
        if method not in allowed:
            raise SchemaViolation(f"method must be one of {allowed}", _where(path + ["method"]))
        args["method"] = method

    if ttype == "intersect":
        args["a"], args["b"] = measure("a"), measure("b")
    elif ttype in ("pushforward", "pullback"):
        args["measure"], args["mapping"] = measure("measure"), cell_mapping("mapping")
    elif ttype == "condition":
        args["measure"] = measure("measure")
        args["set"] = _labels_to_cells(args["measure"].space, block["set"], path + ["set"])
    elif ttype == "verify-compat":
        args["pi"], args["tau"], args["mapping"] = measure("pi"), measure("tau"), cell_mapping("mapping")
    elif ttype == "infer":
        args["prior"], args["observed"] = measure("prior"), measure("observed")
        args["mapping"] = cell_mapping("mapping")
    elif ttype == "sets-demo":
        phi = cell_mapping("mapping")
        args["mapping"] = phi
        args["x_prior"] = _labels_to_cells(phi.domain, block["x_prior"], path + ["x_prior"])
        args["y_obs"] = _labels_to_cells(phi.codomain, block["y_obs"], path + ["y_obs"])
    elif ttype == "resistance-demo":
        for key in ("V0", "I0", "sigma_V", "sigma_I"):
            if key in block:
                args[key] = _num(block[key], path + [key])
        if "grid_cells" in block:
            args["grid_cells"] = _int(block["grid_cells"], path + ["grid_cells"], 1)
    elif ttype == "sphere-demo":
        if "tilings" in block:
            args["tilings"] = _strs(block["tilings"], path + ["tilings"])
        for key in ("f1", "f2"):
            if key in block:
                args[key] = _sphere_density_spec(block[key], path + [key])

    sampled = any(k in block for k in _SAMPLER_KEYS) or ttype.endswith("-demo") or (
        args.get("method") in ("coincidence", "sampled")
    )
    sampler = _sampler(block, path) if sampled and ttype != "sets-demo" else None
    return Task(ttype, args, sampler)


def _sphere_density_spec(block, path) -> dict:
    block = _obj(block, path)
    kind = _str(block.get("kind", "vmf"), path + ["kind"])
    needed = {"uniform": (), "vmf": ("lat", "lon", "kappa"), "cap": ("lat", "lon", "radius")}
    if kind not in needed:
        raise SchemaViolation("kind must be 'uniform', 'vmf' or 'cap'", _where(path + ["kind"]))
    _closed(block, ("kind",) + needed[kind], path)
    out = {"kind": kind}
    for key in needed[kind]:
        if key not in block:
            raise SchemaViolation(f"missing key {key!r}", _where(path))
        out[key] = _num(block[key], path + [key])
    return out


# ---------------------------------------------------------------- entry points


def parse_problem(text: str) -> ProblemFile:
    """Parse and validate a problem document.

    Raises
    ------
    ProblemSyntaxError
        Malformed JSON; the location is ``line L col C``.
    UnknownKey, UnresolvedReference, SchemaViolation
        Schema errors; the location is a dotted key path.
    MeasureError
        A block is well formed but describes an invalid object, for example
        a negative volume.
    """
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ProblemSyntaxError(exc.msg, f"line {exc.lineno} col {exc.colno}") from None
    except (RecursionError, UnicodeDecodeError) as exc:
        raise ProblemSyntaxError(f"unreadable document: {type(exc).__name__}", "line 1 col 1") from None
    doc = _obj(doc, [])
    _closed(doc, ("description", "spaces", "measures", "mappings", "task"), [])
    if "task" not in doc:
        raise SchemaViolation("missing key 'task'", "<root>")
    pf = ProblemFile(description=_str(doc.get("description", ""), ["description"]))
    for name, block in _obj(doc.get("spaces", {}), ["spaces"]).items():
        pf.spaces[name] = _space(name, block, ["spaces", name])
    for name, block in _obj(doc.get("measures", {}), ["measures"]).items():
        pf.measures[name] = _measure(block, pf.spaces, ["measures", name])
    for name, block in _obj(doc.get("mappings", {}), ["mappings"]).items():
        pf.mappings[name] = _mapping(block, pf.spaces, ["mappings", name])
    pf.task = _task(doc["task"], pf.spaces, pf.measures, pf.mappings, ["task"])
    return pf


def load_problem(path) -> ProblemFile:
    with open(path, "rb") as fh:
        raw = fh.read()
    try:
        text = raw.decode("utf-8")
    except UnicodeDecodeError as exc:
        raise ProblemSyntaxError("file is not valid UTF-8", f"byte {exc.start}") from None
    return parse_problem(text)
