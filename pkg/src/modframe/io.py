"""Instance bundles and run reports.

A bundle is one JSON file holding a spectrum, a module shape, optionally a
group and a representation, and named collections of frames, generators,
vectors and operators.  Reports are written with every float at 17
significant digits and sorted keys so that identical runs produce
byte-identical files.
"""
from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import jsonschema

from .algebra import FiniteSpectrum
from .frames import FrameSystem, MultiGenerator
from .groupsys import FiniteGroup, RepresentationError, UnitaryRepresentation
from .hilbert_module import ModuleElement, ModuleOperator, ModuleShape

__all__ = [
    "SCHEMA_VERSION",
    "BundleError",
    "BundleParseError",
    "BundleSchemaError",
    "BundleValidationError",
    "InstanceBundle",
    "load_bundle",
    "save_bundle",
    "bundle_from_json",
    "RunReport",
    "save_report",
    "load_report",
    "dumps",
]

SCHEMA_VERSION = "1"

_complex = {"type": "array", "items": {"type": "number"}, "minItems": 2, "maxItems": 2}
_element = {
    "type": "object",
    "required": ["fibers"],
    "properties": {"fibers": {"type": "array", "items": {"type": "array", "items": _complex}}},
}
_operator = {
    "type": "object",
    "required": ["fibers"],
    "properties": {"fibers": {"type": "array", "items": {
        "type": "array", "items": {"type": "array", "items": _complex}}}},
}
_shape = {
    "type": "object",
    "required": ["spectrum", "fiber_dims"],
    "properties": {
        "spectrum": {"type": "array", "items": {"type": "string"}, "minItems": 1},
        "fiber_dims": {"type": "array", "items": {"type": "integer", "minimum": 0}},
    },
}
_group = {
    "type": "object",
    "required": ["elements", "table"],
    "properties": {
        "elements": {"type": "array", "items": {"type": "string"}, "minItems": 1},
        "table": {"type": "array", "items": {"type": "array",
                                             "items": {"type": ["integer", "string"]}}},
    },
}

BUNDLE_SCHEMA = {
    "type": "object",
    "required": ["version", "algebra", "module"],
    "properties": {
        "version": {"const": SCHEMA_VERSION},
        "seed": {"type": ["integer", "null"]},
        "algebra": {
            "type": "object",
            "required": ["spectrum"],
            "properties": {"spectrum": {"type": "array", "items": {"type": "string"},
                                        "minItems": 1}},
        },
        "module": _shape,
        "group": _group,
        "representation": {
            "type": "object",
            "required": ["images"],
            "properties": {
                "group": _group,
                "module": _shape,
                "images": {"type": "object", "additionalProperties": _operator},
            },
        },
        "frames": {"type": "object", "additionalProperties": {
            "type": "object", "required": ["vectors"],
            "properties": {"module": _shape, "vectors": {"type": "array", "items": _element,
                                                         "minItems": 1}}}},
        "generators": {"type": "object", "additionalProperties": {
            "type": "object", "required": ["generators"],
            "properties": {"generators": {"type": "array", "items": _element, "minItems": 1}}}},
        "vectors": {"type": "object", "additionalProperties": _element},
        "operators": {"type": "object", "additionalProperties": _operator},
    },
}


class BundleError(Exception):
    """Base class for bundle problems; ``pointer`` locates the offending node."""

    def __init__(self, message: str, pointer: str = ""):
        self.pointer = pointer
        super().__init__(f"{pointer or '/'}: {message}")


class BundleParseError(BundleError):
    pass


class BundleSchemaError(BundleError):
    pass


class BundleValidationError(BundleError):
    pass


@dataclass
class InstanceBundle:
    spectrum: FiniteSpectrum
    module: ModuleShape
    group: FiniteGroup | None = None
    representation: UnitaryRepresentation | None = None
    frames: dict[str, FrameSystem] = field(default_factory=dict)
    generators: dict[str, MultiGenerator] = field(default_factory=dict)
    vectors: dict[str, ModuleElement] = field(default_factory=dict)
    operators: dict[str, ModuleOperator] = field(default_factory=dict)
    version: str = SCHEMA_VERSION
    seed: int | None = None

    def to_json(self) -> dict:
        out: dict[str, Any] = {
            "version": self.version,
            "seed": self.seed,
            "algebra": {"spectrum": self.spectrum.to_json()},
            "module": self.module.to_json(),
        }
        if self.group is not None:
            out["group"] = self.group.to_json()
        if self.representation is not None:
            rep = self.representation.to_json()
            del rep["group"]
            out["representation"] = rep
        out["frames"] = {k: f.to_json() for k, f in self.frames.items()}
        out["generators"] = {k: g.to_json() for k, g in self.generators.items()}
        out["vectors"] = {k: v.to_json() for k, v in self.vectors.items()}
        out["operators"] = {k: o.to_json() for k, o in self.operators.items()}
        return out

    def digest(self) -> str:
        return hashlib.sha256(dumps(self.to_json()).encode()).hexdigest()


def _pointer(path) -> str:
    return "".join(f"/{p}" for p in path)


def _located(pointer: str, fn, *args):
    try:
        return fn(*args)
    except BundleError:
        raise
    except (ValueError, KeyError, TypeError) as exc:
        raise BundleValidationError(str(exc), pointer) from exc


def bundle_from_json(obj: Any, rep_tol: float = 1e-9) -> InstanceBundle:
    """Validate a parsed JSON document and build the bundle."""
    try:
        jsonschema.validate(obj, BUNDLE_SCHEMA)
    except jsonschema.ValidationError as exc:
        raise BundleSchemaError(exc.message, _pointer(exc.absolute_path)) from exc

    spectrum = _located("/algebra/spectrum", FiniteSpectrum, obj["algebra"]["spectrum"])
    module = _located("/module", ModuleShape.from_json, obj["module"])
    if module.spectrum != spectrum:
        raise BundleValidationError("module spectrum differs from algebra spectrum", "/module")

    group = None
    if "group" in obj:
        group = _located("/group/table", FiniteGroup.from_json, obj["group"])

    rep = None
    if "representation" in obj:
        robj = dict(obj["representation"])
        if "group" in robj:
            rgroup = _located("/representation/group", FiniteGroup.from_json, robj["group"])
            if group is not None and rgroup != group:
                raise BundleValidationError("representation group differs from bundle group",
                                            "/representation/group")
            group = rgroup
        if group is None:
            raise BundleValidationError("representation needs a group", "/representation")
        rshape = module
        if "module" in robj:
            rshape = _located("/representation/module", ModuleShape.from_json, robj["module"])
            if rshape != module:
                raise BundleValidationError("representation module differs from bundle module",
                                            "/representation/module")
        images = robj["images"]
        missing = [e for e in group.elements if e not in images]
        if missing:
            raise BundleValidationError(f"missing images for {missing}",
                                        "/representation/images")
        ops = [_located(f"/representation/images/{e}", ModuleOperator.from_json,
                        images[e], module) for e in group.elements]
        try:
            rep = UnitaryRepresentation(group, module, ops, tol=rep_tol)
        except RepresentationError as exc:
            raise BundleValidationError(str(exc), "/representation/images") from exc

    bundle = InstanceBundle(spectrum, module, group, rep, version=obj["version"],
                            seed=obj.get("seed"))
    for name, fobj in obj.get("frames", {}).items():
        ptr = f"/frames/{name}"
        fshape = _located(ptr + "/module", ModuleShape.from_json, fobj["module"]) \
            if "module" in fobj else module
        if fshape.spectrum != spectrum:
            raise BundleValidationError("frame module spectrum differs", ptr + "/module")
        vecs = [_located(f"{ptr}/vectors/{i}", ModuleElement.from_json, v, fshape)
                for i, v in enumerate(fobj["vectors"])]
        bundle.frames[name] = FrameSystem(fshape, vecs)
    for name, gobj in obj.get("generators", {}).items():
        ptr = f"/generators/{name}"
        gens = [_located(f"{ptr}/generators/{i}", ModuleElement.from_json, v, module)
                for i, v in enumerate(gobj["generators"])]
        bundle.generators[name] = MultiGenerator(gens)
    for name, vobj in obj.get("vectors", {}).items():
        bundle.vectors[name] = _located(f"/vectors/{name}", ModuleElement.from_json, vobj, module)
    for name, oobj in obj.get("operators", {}).items():
        bundle.operators[name] = _located(f"/operators/{name}", ModuleOperator.from_json,
                                          oobj, module)
    return bundle


def load_bundle(path: str | Path, rep_tol: float = 1e-9) -> InstanceBundle:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise BundleParseError(f"cannot read {path}: {exc}") from exc
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise BundleParseError(f"invalid JSON at line {exc.lineno}: {exc.msg}") from exc
    return bundle_from_json(obj, rep_tol)


def save_bundle(bundle: InstanceBundle, path: str | Path) -> None:
    Path(path).write_text(dumps(bundle.to_json()) + "\n")


# ---------------------------------------------------------------------------
# deterministic JSON emission


def _emit(obj: Any, out: list[str]) -> None:
    if isinstance(obj, bool) or obj is None or isinstance(obj, str):
        out.append(json.dumps(obj))
    elif isinstance(obj, int):
        out.append(str(obj))
    elif isinstance(obj, float):
        if not math.isfinite(obj):
            out.append("null")
        else:
            txt = format(obj, ".17g")
            out.append(txt if any(c in txt for c in ".e") else txt + ".0")
    elif isinstance(obj, dict):
        out.append("{")
        for i, k in enumerate(sorted(obj)):
            if i:
                out.append(",")
            out.append(json.dumps(str(k)) + ":")
            _emit(obj[k], out)
        out.append("}")
    elif isinstance(obj, (list, tuple)):
        out.append("[")
        for i, v in enumerate(obj):
            if i:
                out.append(",")
            _emit(v, out)
        out.append("]")
    elif hasattr(obj, "item"):  # numpy scalars
        _emit(obj.item(), out)
    else:
        raise TypeError(f"cannot serialize {type(obj).__name__}")


def dumps(obj: Any) -> str:
    """Compact JSON with sorted keys and floats at 17 significant digits."""
    out: list[str] = []
    _emit(obj, out)
    return "".join(out)


@dataclass
class RunReport:
    command: str
    inputs_digest: str
    results: dict = field(default_factory=dict)
    verdicts: dict = field(default_factory=dict)
    wall_time: float | None = None

    @property
    def passed(self) -> bool:
        return all(self.verdicts.values())

    def to_json(self) -> dict:
        out = {
            "command": self.command,
            "inputs_digest": self.inputs_digest,
            "results": self.results,
            "verdicts": self.verdicts,
            "passed": self.passed,
        }
        if self.wall_time is not None:
            out["wall_time"] = self.wall_time
        return out

    @classmethod
    def from_json(cls, obj: dict) -> "RunReport":
        return cls(obj["command"], obj["inputs_digest"], obj.get("results", {}),
                   obj.get("verdicts", {}), obj.get("wall_time"))


def save_report(report: RunReport, path: str | Path) -> None:
    Path(path).write_text(dumps(report.to_json()) + "\n")


def load_report(path: str | Path) -> RunReport:
    return RunReport.from_json(json.loads(Path(path).read_text()))
