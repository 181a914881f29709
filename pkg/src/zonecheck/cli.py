"""Command-line front end: ``check``, ``bench`` and ``info``.

Exit codes: 0 success, 2 usage error, 3 model or property error, 4 engine
limitation (e.g. strict constraints for the digital engine, or a cap hit).
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, fields
from fractions import Fraction
from importlib import resources
from pathlib import Path

from . import __version__
from .backwards import NonTermination, check
from .digital import EngineLimitation, check_digital
from .expr import ExprError, parse_expr
from .fixtures import FIXTURES, load_fixture
from .mdp import ConvergenceError
from .model import (
    EngineConfig,
    ModelError,
    Property,
    TimeBound,
    Threshold,
    inject_property_clock,
    load_model,
    parse_property,
    validate,
)

EXIT_OK, EXIT_USAGE, EXIT_MODEL, EXIT_ENGINE = 0, 2, 3, 4

CSV_FIELDS = (
    "model,property,engine,c,D,lambda,probability,verdict,states_max,time_max,"
    "states_min,time_min,iter_maxv,iter_maxu1,digital_states,error"
).split(",")
TIMING_FIELDS = ("time_max", "time_min")

ENGINES = ("backwards", "digital")


class UsageError(Exception):
    pass


@dataclass
class RunRecord:
    model: str
    property: str
    engine: str
    c: int | None = None
    D: int | None = None
    lam: Fraction | None = None
    probability: float | None = None
    verdict: bool | None = None
    states_max: int | None = None
    time_max: float | None = None
    states_min: int | None = None
    time_min: float | None = None
    iter_maxv: int | None = None
    iter_maxu1: int | None = None
    digital_states: int | None = None
    error: str = ""

    def row(self) -> list[str]:
        out = []
        for f in fields(self):
            v = getattr(self, f.name)
            if v is None:
                out.append("")
            elif f.name in TIMING_FIELDS:
                out.append(f"{v:.3f}")
            elif isinstance(v, bool):
                out.append("true" if v else "false")
            elif isinstance(v, float):
                out.append(repr(v))
            else:
                out.append(str(v))
        return out

    def to_json(self) -> dict:
        d = {f.name: getattr(self, f.name) for f in fields(self)}
        d["lambda"] = None if self.lam is None else str(self.lam)
        del d["lam"]
        return d


def csv_text(records) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_FIELDS)
    for r in records:
        w.writerow(r.row())
    return buf.getvalue()


def mask_timing(text: str) -> str:
    """CSV text with the timing columns blanked, for reproducibility checks."""
    rows = list(csv.reader(io.StringIO(text)))
    if not rows:
        return ""
    cols = [rows[0].index(f) for f in TIMING_FIELDS]
    for r in rows[1:]:
        for c in cols:
            if c < len(r):
                r[c] = "*"
    buf = io.StringIO()
    csv.writer(buf, lineterminator="\n").writerows(rows)
    return buf.getvalue()


# loading ---------------------------------------------------------------------

def resolve_model(ref: str):
    """A model file path, or the name of a bundled fixture."""
    path = Path(ref)
    if path.is_file():
        return path.stem, load_model(path)
    if ref in FIXTURES:
        return ref, load_fixture(ref)
    raise ModelError(f"no model file or fixture named {ref!r} (fixtures: {', '.join(FIXTURES)})")


def resolve_property(ref: str, p):
    path = Path(ref)
    if len(ref) < 256 and path.is_file():
        ref = path.read_text(encoding="utf-8")
    return parse_property(ref, p)


def _config(args, c=None) -> EngineConfig:
    try:
        return EngineConfig(c=c if c is not None else args.c, epsilon=args.epsilon, maxu1=args.maxu1)
    except ValueError as e:
        raise UsageError(str(e)) from None


def _run_engine(engine, p, prop, cfg):
    if engine == "backwards":
        return check(p, prop, cfg)
    return check_digital(p, prop, cfg)


def _effective_c(p, prop, cfg) -> int:
    if prop.bound is not None:
        p, _ = inject_property_clock(p, prop)
    return cfg.c_for(p)


def fill_record(rec: RunRecord, engine: str, opt: str, result) -> None:
    s = result.stats
    t = s.get("time")
    if engine == "backwards":
        setattr(rec, f"states_{opt}", s.get("states"))
        if opt == "min":
            rec.iter_maxv = s.get("iter_maxv")
            rec.iter_maxu1 = s.get("iter_maxu1")
    else:
        rec.digital_states = s.get("digital_states")
    setattr(rec, f"time_{opt}", t)


# check -----------------------------------------------------------------------

def cmd_check(args) -> int:
    name, p = resolve_model(args.model)
    prop = resolve_property(args.property, p)
    cfg = _config(args)
    engines = ENGINES if args.engine == "both" else (args.engine,)
    records = []
    results = []
    for engine in engines:
        r = _run_engine(engine, p, prop, cfg)
        rec = RunRecord(
            name,
            prop.render(),
            engine,
            c=_effective_c(p, prop, cfg) if engine == "backwards" else None,
            D=None if prop.bound is None else prop.bound.value,
            lam=None if prop.threshold is None else prop.threshold.value,
            probability=r.probability,
            verdict=r.verdict,
        )
        fill_record(rec, engine, prop.opt, r)
        records.append(rec)
        results.append(r)
    if args.format == "csv":
        sys.stdout.write(csv_text(records))
    elif args.format == "json":
        out = []
        for rec, r in zip(records, results):
            d = rec.to_json()
            d["stats"] = {k: v for k, v in r.stats.items() if isinstance(v, (int, float, str))}
            d["exact"] = None if r.exact is None else str(r.exact)
            out.append(d)
        doc = {"model": name, "property": prop.to_json(), "epsilon": cfg.epsilon, "results": out}
        if len(results) == 2:
            doc["difference"] = abs(results[0].probability - results[1].probability)
        print(json.dumps(doc, indent=2, sort_keys=True))
    else:
        print(f"model:       {name} ({len(p.locations)} locations, clocks {', '.join(p.clocks)})")
        print(f"property:    {prop.render()}")
        for rec, r in zip(records, results):
            print(f"[{rec.engine}]")
            print(f"probability: {r.probability:.10g}" + ("" if r.exact is None else f" (exact {r.exact})"))
            if r.verdict is not None:
                print(f"verdict:     {'true' if r.verdict else 'false'}")
            stats = "  ".join(
                f"{k}={_fmt(v)}" for k, v in r.stats.items() if isinstance(v, (int, float)) and v is not None
            )
            print(f"stats:       {stats}")
        if len(results) == 2:
            print(f"difference:  {abs(results[0].probability - results[1].probability):.3g}")
    return EXIT_OK


def _fmt(v) -> str:
    if isinstance(v, float):
        return f"{v:.3f}" if v >= 0.001 or v == 0 else f"{v:.2e}"
    return str(v)


# bench -----------------------------------------------------------------------

def suite_path(ref: str) -> Path:
    path = Path(ref)
    if path.is_file():
        return path
    bundled = Path(str(resources.files("zonecheck") / "data" / "suites" / f"{ref}.json"))
    if bundled.is_file():
        return bundled
    raise ModelError(f"no suite file or bundled suite named {ref!r}")


def load_suite(ref: str) -> list[dict]:
    try:
        doc = json.loads(suite_path(ref).read_text(encoding="utf-8"))
    except json.JSONDecodeError as e:
        raise ModelError(f"suite is not valid JSON: {e.msg} at line {e.lineno}, column {e.colno}") from None
    runs = doc.get("runs", []) if isinstance(doc, dict) else None
    if not isinstance(runs, list):
        raise ModelError("a suite is an object with a 'runs' list")
    for i, run in enumerate(runs):
        if not isinstance(run, dict) or "model" not in run:
            raise ModelError(f"run {i}: needs at least a 'model'")
        unknown = set(run) - {"model", "target", "until", "opt", "lambda", "engines", "c", "D", "pair"}
        if unknown:
            raise ModelError(f"run {i}: unknown keys {sorted(unknown)}")
    return runs


@dataclass(frozen=True)
class Job:
    model: str
    left: str
    target: str
    opt: str
    lam: str | None
    engine: str
    c: int | None
    D: int | None
    pair: bool
    epsilon: float
    maxu1: str


def expand(runs: list[dict], c_sweep=None, d_sweep=None, epsilon=1e-6, maxu1="zones") -> list[Job]:
    """One job per (run, engine, c, D) in suite order; c only varies for backwards."""
    jobs = []
    for run in runs:
        cs = c_sweep if c_sweep is not None else _as_list(run.get("c"))
        ds = d_sweep if d_sweep is not None else _as_list(run.get("D"))
        engines = run.get("engines", ["backwards"])
        for engine in engines:
            for c in cs if engine == "backwards" else [None]:
                for d in ds:
                    jobs.append(
                        Job(
                            run["model"],
                            run.get("until", "true"),
                            run.get("target", "done"),
                            run.get("opt", "min"),
                            None if run.get("lambda") is None else str(run["lambda"]),
                            engine,
                            c,
                            d,
                            bool(run.get("pair", True)),
                            epsilon,
                            maxu1,
                        )
                    )
    return jobs


def _as_list(v) -> list:
    if v is None:
        return [None]
    return list(v) if isinstance(v, list) else [v]


def job_property(job: Job, opt: str) -> Property:
    bound = None if job.D is None else TimeBound("z", "<=", int(job.D))
    thr = None
    if job.lam is not None:
        thr = Threshold(">=" if opt == "min" else "<=", Fraction(job.lam))
    return Property(opt, parse_expr(job.left), parse_expr(job.target), bound, thr)


def run_job(job: Job) -> RunRecord:
    rec = RunRecord(job.model, "", job.engine, c=job.c, D=job.D, lam=None if job.lam is None else Fraction(job.lam))
    try:
        if job.engine not in ENGINES:
            raise UsageError(f"unknown engine {job.engine!r}")
        p = load_fixture(job.model) if job.model in FIXTURES else load_model(job.model)
        prop = job_property(job, job.opt)
        rec.property = prop.render()
        cfg = EngineConfig(c=job.c, epsilon=job.epsilon, maxu1=job.maxu1)
        if job.engine == "backwards":
            rec.c = _effective_c(p, prop, cfg)
        opts = [job.opt] + ([o for o in ("max", "min") if o != job.opt] if job.pair else [])
        for opt in opts:
            r = _run_engine(job.engine, p, job_property(job, opt), cfg)
            fill_record(rec, job.engine, opt, r)
            if opt == job.opt:
                rec.probability = r.probability
                rec.verdict = r.verdict
    except (ModelError, ExprError, EngineLimitation, NonTermination, ConvergenceError, UsageError, ValueError, OSError) as e:
        rec.error = f"{type(e).__name__}: {e}".replace("\n", "; ")
    return rec


def run_bench(jobs: list[Job], workers: int = 1) -> list[RunRecord]:
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(run_job, jobs))
    return [run_job(j) for j in jobs]


def cmd_bench(args) -> int:
    runs = load_suite(args.suite)
    jobs = expand(runs, args.c_sweep, args.deadline_sweep, args.epsilon, args.maxu1)
    t0 = time.perf_counter()
    records = run_bench(jobs, args.jobs)
    text = csv_text(records)
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    failed = sum(1 for r in records if r.error)
    print(
        f"{len(records)} rows, {failed} with errors, {time.perf_counter() - t0:.1f}s "
        f"(timing columns are not reproducible)",
        file=sys.stderr,
    )
    return EXIT_OK


# info ------------------------------------------------------------------------

def cmd_info(args) -> int:
    name, p = resolve_model(args.model)
    rep = validate(p)
    doc = {
        "model": name,
        "clocks": list(p.clocks),
        "locations": len(p.locations),
        "edges": len(p.edges),
        "initial": p.initial,
        "closed": rep.closed,
        "diagonal_free": rep.diagonal_free,
        "max_constants": rep.max_constants,
        "initial_ok": rep.initial_ok,
        "strict": rep.strict,
        "diagonal": rep.diagonal,
        "errors": rep.errors,
    }
    if args.format == "json":
        print(json.dumps(doc, indent=2, sort_keys=True))
    else:
        for k, v in doc.items():
            if isinstance(v, list):
                v = ", ".join(map(str, v)) or "-"
            elif isinstance(v, dict):
                v = ", ".join(f"{a}:{b}" for a, b in v.items()) or "-"
            print(f"{k + ':':15}{v}")
    return EXIT_MODEL if rep.fatal else EXIT_OK


# argument parsing --------------------------------------------------------------

def _int_list(text: str) -> list[int]:
    try:
        return [int(x) for x in text.replace(",", " ").split()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a comma-separated list of integers, got {text!r}") from None


def _positive_int(text: str) -> int:
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}") from None
    if v < 1:
        raise argparse.ArgumentTypeError("must be a positive integer")
    return v


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="zonecheck", description="Model checking of probabilistic timed automata.")
    ap.add_argument("--version", action="version", version=f"zonecheck {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)

    def engine_opts(sp):
        sp.add_argument("--c", type=_positive_int, default=None, help="duration per MaxV round (default: largest constant)")
        sp.add_argument("--epsilon", type=float, default=1e-6, help="value iteration tolerance")
        sp.add_argument("--maxu1", choices=("zones", "mdp"), default="zones", help="prob-1 step inside MaxV")

    sp = sub.add_parser("check", help="check one property")
    sp.add_argument("model", help="model JSON file or fixture name")
    sp.add_argument("property", help="property text (compact or JSON) or a file containing it")
    sp.add_argument("--engine", choices=ENGINES + ("both",), default="backwards")
    sp.add_argument("--format", choices=("human", "csv", "json"), default="human")
    engine_opts(sp)
    sp.set_defaults(func=cmd_check)

    sp = sub.add_parser("bench", help="run a benchmark suite and write CSV")
    sp.add_argument("suite", help="suite JSON file or bundled suite name (csma, firewire, all)")
    sp.add_argument("--c-sweep", type=_int_list, default=None, help="override c values, e.g. 1,2,4")
    sp.add_argument("--deadline-sweep", type=_int_list, default=None, help="override deadlines D")
    sp.add_argument("--out", help="CSV output path (default: stdout)")
    sp.add_argument("--jobs", type=_positive_int, default=1, help="worker processes")
    engine_opts(sp)
    sp.set_defaults(func=cmd_bench)

    sp = sub.add_parser("info", help="summarise and validate a model")
    sp.add_argument("model")
    sp.add_argument("--format", choices=("human", "json"), default="human")
    sp.set_defaults(func=cmd_info)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)
    try:
        return args.func(args)
    except UsageError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except (ModelError, ExprError, OSError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_MODEL
    except (EngineLimitation, NonTermination, ConvergenceError) as e:
        print(f"engine limitation: {e}", file=sys.stderr)
        return EXIT_ENGINE


if __name__ == "__main__":
    sys.exit(main())
