"""Command-line front end: ``transfunctions <subcommand> --input job.json``.

Exit codes: 0 when every check passes, 1 when a property violation or a
counterexample is found (witnesses are in the report), 2 on input errors.
Reports are canonical JSON, so identical inputs and seed give identical bytes.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .algebra import PROPERTIES, VIOLATED, SamplerConfig, UnboundedError, check_all, operator_norm
from .documents import (
    SCHEMA_VERSION,
    DocumentError,
    Job,
    atom_sets,
    dump_entry,
    dump_partition,
    dump_property_report,
    dumps,
    parse_job,
)
from .extension import (
    HypothesisError,
    VectorExtension,
    extend_signed,
    lemma1_partition,
    norm_preservation_counterexample,
    pushforward_image_norm,
    series_decompose,
    verify_extension_properties,
)
from .measures import PositiveMeasure, VectorMeasure, as_signed, jordan_decompose, mutually_singular, total_variation
from .partitions import MAX_ORACLE_ATOMS, variation_oracle_table
from .rings import (
    DEFAULT_MAX_TERMS,
    RingSetFunction,
    empty_representation_check,
    extend_set_function,
    represent,
    ring_variation,
    to_mask,
    validate_additivity,
)

COMMANDS = ("check", "extend-signed", "extend-vector", "variation", "jordan", "lemma1", "ring", "decompose", "counterexample")


class Params:
    """Command parameters: CLI flags override the document's ``command`` block."""

    def __init__(self, args: argparse.Namespace, job: Job):
        self.cmd = job.command
        self.seed = args.seed if args.seed is not None else self.cmd.get("seed", 0)
        self.trials = args.trials if args.trials is not None else self.cmd.get("trials", 200)
        self.eps = args.eps if args.eps is not None else self.cmd.get("eps")
        self.tol = args.tol if args.tol is not None else self.cmd.get("tol")

    def sampler(self) -> SamplerConfig:
        return SamplerConfig(trials=self.trials, seed=self.seed, tol=self.tol or SamplerConfig.tol)

    def need(self, key: str):
        if key not in self.cmd:
            raise DocumentError(f"$.command.{key}", "required for this subcommand")
        return self.cmd[key]


def _measure(job: Job, p: Params, key: str = "measure"):
    return job.get("measures", p.need(key), f"$.command.{key}")


def _transfunction(job: Job, p: Params):
    return job.get("transfunctions", p.need("transfunction"), "$.command.transfunction")


def cmd_check(job: Job, p: Params):
    phi = _transfunction(job, p)
    props = p.cmd.get("properties") or sorted(phi.declared) or list(PROPERTIES)
    report = check_all(phi, p.sampler(), props)
    out = dump_property_report(report)
    violated = [name for name in props if report.entries[name].verdict == VIOLATED]
    out["violated"] = violated
    return (1 if violated else 0), out


def cmd_extend_signed(job: Job, p: Params):
    phi = _transfunction(job, p)
    mu = _measure(job, p)
    if isinstance(mu, VectorMeasure):
        raise DocumentError("$.command.measure", "extend-signed needs a scalar measure")
    mu = as_signed(mu)
    plus, minus = jordan_decompose(mu)
    image = extend_signed(phi, mu)
    out = {
        "input": mu,
        "jordan": {"plus": plus, "minus": minus},
        "image": image,
        "input_norm": mu.norm(),
        "image_norm": image.norm(),
    }
    code = 0
    if p.cmd.get("verify", False):
        rep = verify_extension_properties(phi, p.sampler())
        out["base"] = dump_property_report(rep.base)
        out["clauses"] = {
            c: {
                "hypotheses": list(r.hypotheses),
                "hypothesis_holds": r.hypothesis_holds,
                "expected": r.expected,
                **dump_entry(r.entry),
            }
            for c, r in rep.clauses.items()
        }
        out["violated_clauses"] = rep.violations
        out["unexpected_findings"] = rep.findings
        code = 1 if rep.violations else 0
    return code, out


def cmd_extend_vector(job: Job, p: Params):
    phi = _transfunction(job, p)
    if "series" in p.cmd:
        rep = job.get("series", p.cmd["series"], "$.command.series")
    else:
        omega = _measure(job, p)
        if not isinstance(omega, VectorMeasure):
            raise DocumentError("$.command.measure", "extend-vector needs a vector measure or a series")
        rep = series_decompose(omega)
    try:
        ext = VectorExtension(phi, p.sampler())
    except HypothesisError as exc:
        return 1, {
            "refused": True,
            "failed": exc.failed,
            "hypotheses": {k: dump_entry(v) for k, v in exc.report.entries.items() if v.verdict != "not_tested"},
        }
    image = ext(rep)
    omega = rep.realize()
    norm = operator_norm(phi, p.sampler())
    bound_ok = image.norm() <= norm.value * omega.norm() + (p.tol or 1e-9)
    out = {
        "refused": False,
        "series": rep,
        "measure": omega,
        "image": image,
        "image_norm": image.norm(),
        "measure_norm": omega.norm(),
        "operator_norm": {"value": norm.value, "method": norm.method},
        "bound_holds": bound_ok,
    }
    return (0 if bound_ok or norm.method != "exact" else 1), out


def _as_vector(mu) -> VectorMeasure:
    return mu if isinstance(mu, VectorMeasure) else VectorMeasure.embed(mu)


def cmd_variation(job: Job, p: Params):
    omega = _as_vector(_measure(job, p))
    var = total_variation(omega)
    out = {
        "variation": var,
        "total": var.total(),
        "norm_of_total": float(omega.codomain.norm_of(omega.values.sum(axis=0))),
    }
    code = 0
    use_oracle = p.cmd.get("oracle", omega.space.count <= MAX_ORACLE_ATOMS)
    if use_oracle:
        tol = p.tol or 1e-12
        table = variation_oracle_table(omega)
        worst = max(abs(v - var.of(s)) for s, v in table.items())
        out["oracle"] = {"sets_checked": len(table), "max_discrepancy": worst, "tol": tol, "agrees": worst <= tol}
        code = 0 if worst <= tol else 1
    return code, out


def cmd_jordan(job: Job, p: Params):
    mu = _measure(job, p)
    if isinstance(mu, VectorMeasure):
        raise DocumentError("$.command.measure", "jordan needs a scalar measure")
    mu = as_signed(mu)
    plus, minus = jordan_decompose(mu)
    return 0, {
        "plus": plus,
        "minus": minus,
        "norm": mu.norm(),
        "norm_plus": plus.norm(),
        "norm_minus": minus.norm(),
        "mutually_singular": mutually_singular(plus, minus),
    }


def cmd_lemma1(job: Job, p: Params):
    names = p.need("measures")
    measures = []
    for i, name in enumerate(names):
        mu = job.get("measures", name, f"$.command.measures[{i}]")
        if not isinstance(mu, PositiveMeasure):
            raise DocumentError(f"$.command.measures[{i}]", "lemma1 needs positive measures")
        measures.append(mu)
    eps = p.eps if p.eps is not None else 0.01
    try:
        approx = lemma1_partition(measures, eps)
    except ValueError as exc:
        raise DocumentError("$.command", str(exc)) from None
    out = dump_partition(approx)
    ok = approx.remainder_total < eps and approx.reconstruction_error() <= 1e-12
    return (0 if ok else 1), out


def cmd_ring(job: Job, p: Params):
    name = p.need("ring")
    obj = job.get("rings", name, "$.command.ring")
    f = obj if isinstance(obj, RingSetFunction) else None
    ring = f.ring if f else obj
    out = {
        "ground_count": ring.ground.count,
        "generators": atom_sets(ring.generators),
        "ring_atoms": atom_sets(ring.atoms),
        "members": atom_sets(ring.sorted_members()),
        "member_count": len(ring.members),
    }
    code = 0
    max_terms = p.cmd.get("max_terms", DEFAULT_MAX_TERMS)
    family = ring.generators if p.cmd.get("use_generators", False) else None
    reps = []
    for i, target in enumerate(p.cmd.get("targets", [])):
        try:
            mask = to_mask(ring.ground.atom_set(target).tolist())
        except IndexError as exc:
            raise DocumentError(f"$.command.targets[{i}]", str(exc)) from None
        rep = represent(mask, ring, max_terms, family)
        entry = {"target": sorted(target), "found": rep is not None}
        if rep is not None:
            entry["terms"] = [{"sign": s, "set": a} for s, a in rep.as_lists()]
            if f is not None:
                entry["value"] = extend_set_function(f, rep, mask)
        reps.append(entry)
    out["representations"] = reps
    if f is not None:
        violations = validate_additivity(f, p.tol or 1e-9)
        out["additivity_violations"] = [
            {"left": list(v.left), "right": list(v.right), "gap": v.gap} for v in violations
        ]
        if violations:
            code = 1
        else:
            check = empty_representation_check(f, p.cmd.get("empty_trials", p.trials), p.seed)
            out["empty_representations"] = {
                "tested": len(check.tested),
                "max_residual": check.max_residual,
                "tol": check.tol,
                "passed": check.passed,
                "sample": [[{"sign": s, "set": a} for s, a in r.as_lists()] for r in check.tested[:5]],
            }
            if not check.passed:
                code = 1
            if len(ring.atoms) <= 12:
                var = ring_variation(f)
                out["variation"] = [{"set": s, "value": var[m]} for s, m in zip(atom_sets(ring.sorted_members()), ring.sorted_members())]
    return code, out


def cmd_decompose(job: Job, p: Params):
    omega = _as_vector(_measure(job, p))
    tol = p.cmd.get("grouping_tolerance", 1e-9)
    rep = series_decompose(omega, tol)
    back = rep.realize()
    # the atomwise absolute error bounds the error on every set, coordinate by coordinate
    diff = np.abs(np.asarray(back.values) - np.asarray(omega.values)).sum(axis=0)
    worst = float(omega.codomain.norm_of(diff))
    allowed = max(1e-9, tol * omega.norm())
    return (0 if worst <= allowed else 1), {
        "series": rep,
        "terms": len(rep),
        "weight": rep.weight(),
        "reconstruction_bound": worst,
        "allowed": allowed,
    }


def cmd_counterexample(job: Job, p: Params):
    ce = norm_preservation_counterexample()
    return 1, {
        "transfunction": {"rule": ce.phi.rule.type, "domain": ce.phi.domain, "codomain": ce.phi.codomain},
        "positive_norm_preserving": ce.positive_norm_preserving,
        "mu": ce.mu,
        "image": ce.image,
        "mu_norm": ce.mu_norm,
        "image_norm": ce.image_norm,
        "controls": {
            "injective_pushforward_image_norm": pushforward_image_norm([0, 1, 2, 3]),
            "colliding_pushforward_image_norm": pushforward_image_norm([0, 0, 2, 3]),
        },
    }


HANDLERS = {
    "check": cmd_check,
    "extend-signed": cmd_extend_signed,
    "extend-vector": cmd_extend_vector,
    "variation": cmd_variation,
    "jordan": cmd_jordan,
    "lemma1": cmd_lemma1,
    "ring": cmd_ring,
    "decompose": cmd_decompose,
    "counterexample": cmd_counterexample,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="transfunctions", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True, metavar="subcommand")
    for name in COMMANDS:
        sp = sub.add_parser(name)
        sp.add_argument("--input", type=Path, help="job document (JSON)")
        sp.add_argument("--out", type=Path, help="write the report here instead of stdout")
        sp.add_argument("--seed", type=int)
        sp.add_argument("--trials", type=int)
        sp.add_argument("--eps", type=float)
        sp.add_argument("--tol", type=float)
        sp.add_argument("--format", choices=["json"], default="json")
    return parser


def _load(args) -> Job:
    if args.input is None:
        if args.command == "counterexample":
            return parse_job({"version": SCHEMA_VERSION})
        raise DocumentError("--input", "an input document is required")
    try:
        doc = json.loads(args.input.read_text(encoding="utf-8"))
    except OSError as exc:
        raise DocumentError("--input", f"cannot read {args.input}: {exc.strerror}") from None
    except json.JSONDecodeError as exc:
        raise DocumentError("$", f"invalid JSON at line {exc.lineno} column {exc.colno}: {exc.msg}") from None
    job = parse_job(doc)
    declared = job.command.get("name")
    if declared is not None and declared != args.command:
        raise DocumentError("$.command.name", f"document is for {declared!r}, not {args.command!r}")
    return job


def run(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    for flag in ("seed", "trials"):
        v = getattr(args, flag)
        if v is not None and v < (0 if flag == "seed" else 1):
            parser.error(f"--{flag} out of range")
    for flag in ("eps", "tol"):
        v = getattr(args, flag)
        if v is not None and not v > 0:
            parser.error(f"--{flag} must be positive")
    report = {"version": SCHEMA_VERSION, "command": args.command}
    try:
        job = _load(args)
        params = Params(args, job)
        report["seed"] = params.seed
        report["trials"] = params.trials
        code, result = HANDLERS[args.command](job, params)
        report["result"] = result
    except DocumentError as exc:
        print(f"error: {exc}", file=sys.stderr)
        code = 2
        report["error"] = {"path": exc.path, "message": str(exc)}
    except UnboundedError as exc:
        code = 1
        report["result"] = {"unbounded": dump_entry(exc.entry)}
    report["exit_code"] = code
    report["status"] = {0: "ok", 1: "violation", 2: "error"}[code]
    text = dumps(report)
    if args.out is not None:
        args.out.write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    return code


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
