"""Batch front-end: JSON run specs in, JSON reports or tables out.

    formal-torsion run --spec group.json [--format table] [--out report.json]
    formal-torsion corpus [--update]
"""
from __future__ import annotations

import argparse
import json
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from importlib import resources
from pathlib import Path
from typing import Annotated, List, Literal, Optional, Union

import jsonschema
from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator, model_validator

from . import __version__
from .errors import FormalTorsionError, SpecError
from .formal_group import (
    build_additive,
    build_elliptic,
    build_lubin_tate,
    build_multiplicative,
    build_product,
    default_truncation,
    verify_group_axioms,
)
from .scalar_arith import PrimeConfig, _is_prime
from .strictness import decide_strict, extract_forms
from .torsion import torsion_valuations, verify_O1_exclusion, verify_theorem_B

SCHEMA_VERSION = 1
ANALYSES = ("axioms", "mulp", "strict", "torsion", "delta")


# -- run specs ---------------------------------------------------------------------


class _Strict(BaseModel):
    model_config = ConfigDict(extra="forbid")


class PrimeSpec(_Strict):
    p: int
    f: int = 1
    N: int = 8

    @field_validator("p")
    @classmethod
    def _odd_prime(cls, p):
        if p < 3 or not _is_prime(p):
            raise ValueError("p must be an odd prime")
        return p

    @field_validator("f", "N")
    @classmethod
    def _positive(cls, v):
        if v < 1:
            raise ValueError("must be >= 1")
        return v


class Multiplicative(_Strict):
    type: Literal["multiplicative"]


class Additive(_Strict):
    type: Literal["additive"]


class LubinTate(_Strict):
    type: Literal["lubin_tate"]
    h: int = Field(ge=1)


class Elliptic(_Strict):
    type: Literal["elliptic"]
    a: Optional[List[int]] = None
    short: Optional[List[int]] = None

    @model_validator(mode="after")
    def _one_form(self):
        if (self.a is None) == (self.short is None):
            raise ValueError("give exactly one of 'a' (a1, a2, a3, a4, a6) or 'short' (A, B)")
        if self.a is not None and len(self.a) != 5:
            raise ValueError("'a' needs five coefficients")
        if self.short is not None and len(self.short) != 2:
            raise ValueError("'short' needs two coefficients")
        return self


class Product(_Strict):
    type: Literal["product"]
    factors: List["Group"] = Field(min_length=1)


Group = Annotated[Union[Multiplicative, Additive, LubinTate, Elliptic, Product], Field(discriminator="type")]
Product.model_rebuild()


class RunSpec(_Strict):
    schema_version: Literal[1] = 1
    prime: PrimeSpec
    D: Optional[int] = Field(default=None, ge=2)
    group: Group
    analyses: List[Literal["axioms", "mulp", "strict", "torsion", "delta", "all"]] = ["all"]

    @model_validator(mode="after")
    def _truncation_fits(self):
        if self.D is not None and self.D < self.prime.p ** _max_height(self.group):
            raise ValueError(f"D={self.D} cannot resolve height {_max_height(self.group)} at p={self.prime.p}")
        return self

    def requested(self):
        if "all" in self.analyses:
            return list(ANALYSES)
        return [a for a in ANALYSES if a in self.analyses]

    def truncation(self):
        return self.D if self.D is not None else default_truncation(self.prime.p, _max_height(self.group))


def _max_height(group):
    if isinstance(group, LubinTate):
        return group.h
    if isinstance(group, Elliptic):
        return 2
    if isinstance(group, Product):
        return max(_max_height(g) for g in group.factors)
    return 1


def parse_spec(text, source="<spec>") -> RunSpec:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SpecError(f"{source}:{exc.lineno}:{exc.colno}: {exc.msg}") from None
    try:
        return RunSpec.model_validate(data)
    except ValidationError as exc:
        lines = [f"{source}: {'.'.join(str(x) for x in err['loc']) or '<root>'}: {err['msg']}" for err in exc.errors()]
        raise SpecError("\n".join(lines)) from None


def build_group(cfg, D, group):
    if isinstance(group, Multiplicative):
        return build_multiplicative(cfg, D)
    if isinstance(group, Additive):
        return build_additive(cfg, D)
    if isinstance(group, LubinTate):
        return build_lubin_tate(cfg, group.h, D)
    if isinstance(group, Elliptic):
        return build_elliptic(cfg, D, a=group.a, short=group.short)
    return build_product([build_group(cfg, D, g) for g in group.factors])


# -- running -------------------------------------------------------------------------


def _error(exc):
    return {"status": "error", "error": {"type": type(exc).__name__, "message": str(exc)}}


def _mulp_result(fp):
    names = ["T"] if len(fp) == 1 else [f"X{i + 1}" for i in range(len(fp))]
    out = {"components": [s.to_text(names) for s in fp]}
    if len(fp) == 1:
        cfg = fp.cfg
        out["coefficient_valuations"] = [[e[0], cfg.valuation(c).to_json()] for e, c in fp[0].raw_items()]
    return out


def run(spec: RunSpec, timing=False) -> dict:
    cfg = PrimeConfig(spec.prime.p, spec.prime.f, spec.prime.N)
    D = spec.truncation()
    report = {
        "schema_version": SCHEMA_VERSION,
        "tool": {"name": "formal_torsion", "version": __version__},
        "spec": spec.model_dump(mode="json", exclude_none=True),
        "precision": {**cfg.describe(), "D": D},
        "analyses": {},
    }
    requested = spec.requested()
    clock = {}
    t0 = time.perf_counter()
    try:
        F = build_group(cfg, D, spec.group)
    except FormalTorsionError as exc:
        for name in requested:
            report["analyses"][name] = _error(exc)
        report["completed"] = not requested
        return report
    report["group"] = F.describe()
    clock["build"] = time.perf_counter() - t0

    state = {}

    def mulp():
        if "fp" not in state:
            state["fp"] = F.mul_by_p()
        return state["fp"]

    def strict():
        if "verdict" not in state:
            fs = extract_forms(mulp())
            state["forms"] = fs
            state["verdict"] = decide_strict(fs)
        return state["verdict"]

    def torsion():
        if "torsion" not in state:
            prelim = torsion_valuations(F)
            if prelim.strictness.is_strict and prelim.status == "verified":
                state["torsion"] = verify_theorem_B(F)
            else:
                state["torsion"] = prelim
        return state["torsion"]

    def strict_result():
        verdict = strict()
        return {"forms": state["forms"].to_json(), "verdict": verdict.to_json()}

    steps = {
        "axioms": lambda: verify_group_axioms(F).to_json(),
        "mulp": lambda: _mulp_result(mulp()),
        "strict": strict_result,
        "torsion": lambda: torsion().to_json(),
        "delta": lambda: [o.to_json() for o in verify_O1_exclusion(F, torsion())],
    }
    for name in requested:
        t = time.perf_counter()
        try:
            report["analyses"][name] = {"status": "ok", "result": steps[name]()}
        except (FormalTorsionError, AssertionError) as exc:
            report["analyses"][name] = _error(exc)
        clock[name] = time.perf_counter() - t
    report["completed"] = all(a["status"] == "ok" for a in report["analyses"].values())
    if timing:
        report["timing_seconds"] = {k: round(v, 6) for k, v in clock.items()}
    return report


# -- output --------------------------------------------------------------------------


def report_schema():
    return json.loads(resources.files(__package__).joinpath("report_schema.json").read_text())


def validate_report(report):
    jsonschema.validate(report, report_schema())


def _table(report):
    lines = []
    pr = report["precision"]
    lines.append(f"group      {json.dumps(report['spec']['group'], sort_keys=True)}")
    lines.append(f"precision  p={pr['p']} f={pr['f']} N={pr['N']} D={pr['D']}")
    for name, res in report["analyses"].items():
        if res["status"] != "ok":
            lines.append(f"{name:<10} ERROR {res['error']['type']}: {res['error']['message']}")
            continue
        r = res["result"]
        if name == "axioms":
            lines.append(f"{name:<10} " + " ".join(f"{k}={v}" for k, v in sorted(r.items())))
        elif name == "mulp":
            for s in r["components"]:
                lines.append(f"{name:<10} {s}")
        elif name == "strict":
            v = r["verdict"]
            lines.append(
                f"{name:<10} is_strict={v['is_strict']} reason={v['reason']} method={v['method']} degrees={v['degrees']}"
            )
        elif name == "torsion":
            vals = ", ".join(f"{x['value']} (x{x['multiplicity']})" for x in r["valuations"])
            lines.append(f"{name:<10} status={r['status']} valuations=[{vals}] e_pred={r['e_pred']} tame={r['tame']}")
        elif name == "delta":
            for i, w in enumerate(r, start=1):
                ds = ", ".join(c["delta"]["value"] for c in w["coordinates"])
                lines.append(f"{name:<10} witness {i}: delta=({ds}) uniformizer={w['uniformizer_index']}")
    lines.append(f"completed  {report['completed']}")
    return "\n".join(lines) + "\n"


def emit(report, fmt="json") -> str:
    if fmt == "json":
        return json.dumps(report, sort_keys=True, indent=2) + "\n"
    if fmt == "table":
        return _table(report)
    raise ValueError(f"unknown format {fmt!r}")


# -- corpus --------------------------------------------------------------------------


def corpus_dir():
    return Path(str(resources.files(__package__).joinpath("corpus")))


def corpus_specs():
    return sorted(corpus_dir().glob("*.json"))


def _run_file(path, timing=False):
    path = Path(path)
    spec = parse_spec(path.read_text(), str(path))
    report = run(spec, timing=timing)
    validate_report(report)
    return report


def corpus_main(update=False, out=sys.stdout):
    golden_dir = corpus_dir() / "golden"
    failures = 0
    for path in corpus_specs():
        text = emit(_run_file(path))
        golden = golden_dir / path.name
        if update:
            golden_dir.mkdir(exist_ok=True)
            golden.write_text(text)
            print(f"updated {path.stem}", file=out)
        elif golden.exists() and golden.read_text() == text:
            print(f"ok      {path.stem}", file=out)
        else:
            failures += 1
            print(f"FAIL    {path.stem}", file=out)
    return 1 if failures else 0


def main(argv=None):
    parser = argparse.ArgumentParser(prog="formal-torsion", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    p_run = sub.add_parser("run", help="run one or more spec files")
    p_run.add_argument("--spec", action="append", required=True, help="spec file (repeatable)")
    p_run.add_argument("--format", choices=["json", "table"], default="json")
    p_run.add_argument("--out", help="write here instead of stdout")
    p_run.add_argument("--timing", action="store_true", help="include wall-clock timings (breaks byte-identity)")
    p_run.add_argument("--jobs", type=int, default=1, help="process specs in parallel")
    p_corpus = sub.add_parser("corpus", help="check the bundled examples against their golden reports")
    p_corpus.add_argument("--update", action="store_true", help="rewrite the golden reports")
    args = parser.parse_args(argv)

    if args.command == "corpus":
        return corpus_main(args.update)

    try:
        if args.jobs > 1 and len(args.spec) > 1:
            with ProcessPoolExecutor(args.jobs) as pool:
                reports = list(pool.map(_run_file, args.spec, [args.timing] * len(args.spec)))
        else:
            reports = [_run_file(s, args.timing) for s in args.spec]
    except SpecError as exc:
        print(exc, file=sys.stderr)
        return 2
    text = "".join(emit(r, args.format) for r in reports)
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    return 0 if all(r["completed"] for r in reports) else 1


if __name__ == "__main__":
    sys.exit(main())
