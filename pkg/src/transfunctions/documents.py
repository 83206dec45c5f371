"""JSON job documents: schema validation, parsing into objects, and report serialization."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from importlib import resources
from typing import Any

import jsonschema
import numpy as np

from . import algebra
from .algebra import PropertyEntry, PropertyReport, Transfunction
from .extension import PartitionApproximation, SeriesRepresentation
from .measures import BanachSpaceSpec, MeasurableSpace, PositiveMeasure, SignedMeasure, VectorMeasure
from .rings import RingSetFunction, SetRing, from_mask, ring_closure, to_mask

SCHEMA_VERSION = "1"


class DocumentError(ValueError):
    """A job document failed validation; ``path`` locates the offending field."""

    def __init__(self, path: str, message: str):
        super().__init__(f"{path}: {message}")
        self.path = path


def load_schema() -> dict:
    text = resources.files("transfunctions").joinpath("schema/job-v1.json").read_text(encoding="utf-8")
    return json.loads(text)


def _path(parts) -> str:
    out = "$"
    for p in parts:
        out += f"[{p}]" if isinstance(p, int) else f".{p}"
    return out


def validate_document(doc: Any) -> None:
    validator = jsonschema.Draft202012Validator(load_schema())
    errors = sorted(validator.iter_errors(doc), key=lambda e: (len(e.absolute_path), list(map(str, e.absolute_path))))
    if errors:
        err = errors[0]
        raise DocumentError(_path(err.absolute_path), err.message)


# -- parsing ------------------------------------------------------------------


def parse_space(obj) -> MeasurableSpace:
    labels = obj.get("labels")
    return MeasurableSpace(obj["kind"], obj["count"], tuple(labels) if labels is not None else None)


def parse_codomain(obj) -> BanachSpaceSpec:
    return BanachSpaceSpec(obj["dim"], obj.get("norm", "L2"))


def parse_measure(obj, space: MeasurableSpace):
    kind = obj.get("kind")
    if "values" in obj:
        if kind not in (None, "vector"):
            raise ValueError(f"'values' given for a {kind} measure")
        return VectorMeasure(space, parse_codomain(obj["codomain"]), np.asarray(obj["values"], dtype=float))
    if kind == "vector":
        raise ValueError("vector measures need 'values' and 'codomain'")
    if "density" in obj:
        mass = np.asarray(obj["density"], dtype=float) * space.cell_width()
    else:
        mass = np.asarray(obj["mass"], dtype=float)
    if kind == "signed" or (kind is None and np.any(mass < 0)):
        return SignedMeasure(space, mass)
    return PositiveMeasure(space, mass)


def parse_rule(obj):
    t = obj["type"]
    if t == "pushforward":
        return algebra.Pushforward(tuple(int(b) for b in obj["map"]))
    if t == "kernel":
        return algebra.Kernel.of(obj["matrix"])
    return algebra.RULES[t]()


@dataclass
class Job:
    spaces: dict[str, MeasurableSpace] = field(default_factory=dict)
    measures: dict[str, Any] = field(default_factory=dict)
    transfunctions: dict[str, Transfunction] = field(default_factory=dict)
    series: dict[str, SeriesRepresentation] = field(default_factory=dict)
    rings: dict[str, RingSetFunction | SetRing] = field(default_factory=dict)
    command: dict = field(default_factory=dict)

    def get(self, table: str, name: str, path: str):
        items = getattr(self, table)
        if name not in items:
            raise DocumentError(path, f"unknown {table[:-1] if table != 'series' else 'series'} {name!r}")
        return items[name]


def _guard(path: str, fn, *args):
    try:
        return fn(*args)
    except DocumentError:
        raise
    except (ValueError, IndexError, KeyError, TypeError) as exc:
        raise DocumentError(path, str(exc)) from None


def parse_job(doc: dict) -> Job:
    """Validate against the schema, then build every named object, resolving references."""
    validate_document(doc)
    job = Job(command=dict(doc.get("command", {})))

    def space_ref(ref, path):
        if isinstance(ref, str):
            return job.get("spaces", ref, path)
        return _guard(path, parse_space, ref)

    for name, obj in doc.get("spaces", {}).items():
        job.spaces[name] = _guard(f"$.spaces.{name}", parse_space, obj)

    def measure_literal(obj, path):
        return _guard(path, parse_measure, obj, space_ref(obj["space"], f"{path}.space"))

    for name, obj in doc.get("measures", {}).items():
        job.measures[name] = measure_literal(obj, f"$.measures.{name}")

    for name, obj in doc.get("transfunctions", {}).items():
        path = f"$.transfunctions.{name}"
        x = space_ref(obj["domain"], f"{path}.domain")
        y = space_ref(obj["codomain"], f"{path}.codomain")
        rule = _guard(f"{path}.rule", parse_rule, obj["rule"])
        # the schema has checked the declared names, so what fails here is the rule against the spaces
        job.transfunctions[name] = _guard(
            f"{path}.rule", Transfunction, x, y, rule, frozenset(obj.get("declared", [])), name
        )

    for name, obj in doc.get("series", {}).items():
        path = f"$.series.{name}"
        space = space_ref(obj["space"], f"{path}.space")
        codomain = _guard(f"{path}.codomain", parse_codomain, obj["codomain"])
        terms = []
        for i, term in enumerate(obj["terms"]):
            tpath = f"{path}.terms[{i}]"
            ref = term["measure"]
            mu = job.get("measures", ref, f"{tpath}.measure") if isinstance(ref, str) else measure_literal(ref, f"{tpath}.measure")
            if not isinstance(mu, PositiveMeasure):
                raise DocumentError(f"{tpath}.measure", "series terms need positive measures")
            terms.append((np.asarray(term["vector"], dtype=float), mu))
        job.series[name] = _guard(path, SeriesRepresentation, space, codomain, tuple(terms))

    for name, obj in doc.get("rings", {}).items():
        job.rings[name] = parse_ring(obj, f"$.rings.{name}")
    return job


def parse_ring(obj, path: str = "$") -> RingSetFunction | SetRing:
    ground = _guard(f"{path}.ground_count", MeasurableSpace.atomic, obj["ground_count"])
    ring = _guard(f"{path}.generators", ring_closure, ground, obj["generators"])
    codomain = _guard(f"{path}.codomain", parse_codomain, obj["codomain"]) if "codomain" in obj else None
    if "weights" in obj:
        return _guard(f"{path}.weights", RingSetFunction.induced, ring, obj["weights"], codomain)
    if "assignment" in obj:
        values = {}
        for i, item in enumerate(obj["assignment"]):
            mask = _guard(f"{path}.assignment[{i}].set", lambda s: to_mask(ground.atom_set(s).tolist()), item["set"])
            values[mask] = np.atleast_1d(np.asarray(item["value"], dtype=float))
        dim = len(next(iter(values.values()))) if values else 1
        return _guard(f"{path}.assignment", RingSetFunction, ring, codomain or BanachSpaceSpec(dim, "L2"), values)
    return ring


# -- serialization ------------------------------------------------------------


def jsonable(x):
    """Convert results to plain JSON types; non-finite floats become strings."""
    if isinstance(x, (PositiveMeasure, SignedMeasure, VectorMeasure)):
        return dump_measure(x)
    if isinstance(x, MeasurableSpace):
        return dump_space(x)
    if isinstance(x, SeriesRepresentation):
        return dump_series(x)
    if isinstance(x, dict):
        return {str(k): jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [jsonable(v) for v in x]
    if isinstance(x, np.ndarray):
        return jsonable(x.tolist())
    if isinstance(x, (bool, np.bool_)):
        return bool(x)
    if isinstance(x, (int, np.integer)):
        return int(x)
    if isinstance(x, (float, np.floating)):
        x = float(x)
        return x if math.isfinite(x) else str(x)
    return x


def dump_space(space: MeasurableSpace) -> dict:
    out = {"kind": space.kind, "count": space.count}
    if space.labels is not None:
        out["labels"] = list(space.labels)
    return out


def dump_measure(mu) -> dict:
    if isinstance(mu, VectorMeasure):
        return {
            "space": dump_space(mu.space),
            "kind": "vector",
            "codomain": {"dim": mu.codomain.dimension, "norm": mu.codomain.norm},
            "values": np.asarray(mu.values).tolist(),
        }
    kind = "positive" if isinstance(mu, PositiveMeasure) else "signed"
    return {"space": dump_space(mu.space), "kind": kind, "mass": np.asarray(mu.mass).tolist()}


def dump_series(rep: SeriesRepresentation) -> dict:
    return {
        "space": dump_space(rep.space),
        "codomain": {"dim": rep.codomain.dimension, "norm": rep.codomain.norm},
        "terms": [{"vector": np.asarray(v).tolist(), "measure": dump_measure(mu)} for v, mu in rep.terms],
    }


def dump_entry(entry: PropertyEntry) -> dict:
    out = {
        "verdict": entry.verdict,
        "trials": entry.trials,
        "tol": entry.tol,
        "basis": entry.basis,
        "gap": entry.gap,
    }
    if entry.witness is not None:
        out["witness"] = jsonable(entry.witness)
    if entry.estimate is not None:
        out["estimate"] = entry.estimate
    if entry.note:
        out["note"] = entry.note
    return jsonable(out)


def dump_property_report(report: PropertyReport) -> dict:
    return {
        "transfunction": report.transfunction,
        "seed": report.seed,
        "trials": report.trials,
        "tol": report.tol,
        "declared": list(report.declared),
        "mismatches": report.mismatches,
        "undeclared_holding": report.undeclared_holding,
        "properties": {name: dump_entry(e) for name, e in report.entries.items()},
    }


def dump_partition(approx: PartitionApproximation) -> dict:
    return jsonable(
        {
            "eps": approx.eps,
            "delta": approx.delta,
            "labels": approx.labels,
            "classes": [c.tolist() for c in approx.classes],
            "null_class": approx.null_class,
            "alpha": approx.alpha,
            "kappa_masses": [k.total() for k in approx.remainders],
            "kappa_total": approx.remainder_total,
            "kappa_below_eps": approx.remainder_total < approx.eps,
            "reconstruction_error": approx.reconstruction_error(),
            "reference": approx.reference,
            "remainders": approx.remainders,
        }
    )


def atom_sets(masks) -> list[list[int]]:
    return [list(from_mask(m)) for m in masks]


def dumps(report: dict) -> str:
    """Canonical report bytes: sorted keys, fixed indentation, trailing newline."""
    return json.dumps(jsonable(report), sort_keys=True, indent=2, allow_nan=False) + "\n"
