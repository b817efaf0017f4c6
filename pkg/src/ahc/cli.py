"""``ahc run`` / ``ahc report``: batch runner for the surface-tension experiments.

Exit codes: 0 when every property check passes, 2 when a check fails, 1 on
any error (bad config, missing files, solver exceptions).
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import math
import os
import shutil
import sys
import tempfile
import time
from pathlib import Path

import numpy as np

from . import homogenize as hz
from .config import ConfigError, RunConfig, load_config
from .glue import fundamental_glue, random_instance
from .medium import MediumError, MediumKind
from .potential import c_lambda, sigma_1d
from .solve import DomainSpec, finite_volume_sigma

log = logging.getLogger("ahc")

EXIT_OK, EXIT_ERROR, EXIT_FAIL = 0, 1, 2
COLUMNS = ["experiment", "d", "e_components", "R", "h", "kappa", "rho", "seed", "value", "normalized",
           "iters", "grad_norm", "wall_ms"]
SAMPLES, SUMMARY, TIMINGS = "samples.csv", "summary.json", "timings.csv"


def fmt(x) -> str:
    return format(float(x), ".17g")


def _json_value(obj, indent=0) -> str:
    pad = "  " * (indent + 1)
    end = "  " * indent
    if isinstance(obj, bool) or obj is None:
        return json.dumps(obj)
    if isinstance(obj, (float, np.floating)):
        return fmt(obj) if math.isfinite(obj) else "null"
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{json.dumps(str(k))}: {_json_value(v, indent + 1)}" for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, (list, tuple, np.ndarray)):
        if len(obj) == 0:
            return "[]"
        items = [f"{pad}{_json_value(v, indent + 1)}" for v in obj]
        return "[\n" + ",\n".join(items) + "\n" + end + "]"
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def dumps(obj) -> str:
    """JSON with every float written to 17 significant digits."""
    return _json_value(obj) + "\n"


class Outcome:
    def __init__(self, name: str, samples, summary: dict, passed: bool):
        self.name = name
        self.samples = list(samples)
        self.summary = summary
        self.passed = passed


def _residual_summary(residuals) -> dict:
    groups: dict[str, list] = {}
    for r in residuals:
        groups.setdefault(r.name.split("[")[0], []).append(r)
    table = {}
    for name, rs in groups.items():
        hard = [r for r in rs if r.hard]
        table[name] = {
            "checked": len(rs),
            "passed": sum(r.passed for r in rs),
            "strict": sum(r.strict for r in rs),
            "hard": bool(hard),
            "max_excess": max(r.excess - r.slack for r in rs),
        }
    return table


def _sweep_outcome(name: str, res: hz.SweepResult, extra: dict | None = None) -> Outcome:
    summary = {
        "experiment": name,
        "passed": res.passed,
        "extrapolated_limit": res.extrapolated_limit,
        "stderr": res.stderr,
        "flags": res.flags,
        "checks": _residual_summary(res.residuals),
        "failures": [r.as_dict() for r in res.failures()],
        "ensemble": [{"param": s.param, "mean": s.mean, "std": s.std, "n": s.n, "stderr": s.stderr}
                     for s in res.ensemble],
        "details": {k: v for k, v in res.extra.items()},
    }
    if extra:
        summary.update(extra)
    return Outcome(name, res.samples, summary, res.passed)


def _oracle_1d(cfg: RunConfig, problem: hz.Problem) -> Outcome:
    ex = cfg.experiment
    med = cfg.medium
    if med.kind is not MediumKind.CONSTANT or isinstance(med.value, list):
        raise ConfigError("experiment.type=oracle-1d needs a constant scalar medium (medium.kind, medium.value)")
    c = 1.0 if med.value is None else float(med.value)
    target = sigma_1d(problem.W, c)
    C = c_lambda(problem.q, problem.W, problem.medium.bounds[1])
    samples, residuals = [], []
    for seed in ex.seeds:
        m = problem.medium.realize(seed)
        s = finite_volume_sigma(ex.e, [0.0], DomainSpec(1.0, ex.h, ex.spacing), m, problem.W, problem.q,
                                problem.opts)
        samples.append(s)
        residuals.append(hz.Residual("oracle", abs(s.value - target), 0.0, ex.tolerance * target, seed=seed))
        residuals.append(hz.Residual("basic_bound", s.value, C * (1 + hz.BOUND_SLACK), 0.0, seed=seed))
    passed = all(r.passed for r in residuals)
    summary = {
        "experiment": ex.type, "passed": passed, "value": samples[0].value, "target": target,
        "relative_error": abs(samples[0].value - target) / target, "tolerance": ex.tolerance,
        "converged": all(s.converged for s in samples), "checks": _residual_summary(residuals),
        "failures": [r.as_dict() for r in residuals if not r.passed],
    }
    return Outcome(ex.type, samples, summary, passed)


def _glue_demo(cfg: RunConfig, problem: hz.Problem) -> Outcome:
    ex = cfg.experiment
    reports = []
    for seed in ex.seeds:
        inst = random_instance(seed, problem.W, problem.q, ex.R, ex.h, ex.spacing, ex.shift)
        m = problem.medium.realize(seed)
        _, rep = fundamental_glue(m, problem.W, inst.u, inst.v, inst.U, inst.Uprime, inst.V, inst.D)
        reports.append(dict(rep.as_dict(), seed=seed, D=inst.D))
    passed = all(r["holds"] for r in reports)
    summary = {"experiment": ex.type, "passed": passed, "instances": len(reports),
               "held": sum(r["holds"] for r in reports), "reports": reports}
    return Outcome(ex.type, [], summary, passed)


def run_experiment(cfg: RunConfig, jobs: int = 1) -> Outcome:
    ex = cfg.experiment
    problem = cfg.problem()
    kind = ex.type
    if kind == "oracle-1d":
        return _oracle_1d(cfg, problem)
    if kind == "glue-demo":
        return _glue_demo(cfg, problem)
    if kind == "sweep-r":
        res = hz.r_sweep(ex.e, ex.kappa, ex.R_list, ex.seeds, problem, ex.warm_start, ex.checks, jobs)
        return _sweep_outcome(kind, res)
    if kind == "sweep-h":
        res = hz.h_sweep(ex.e, ex.R, ex.h_list, problem, ex.seeds, jobs)
        return _sweep_outcome(kind, res)
    if kind == "off-center":
        res = hz.off_center_check(ex.e, ex.x0, ex.rho, ex.R_list, ex.seeds, problem, jobs)
        return _sweep_outcome(kind, res)
    if kind == "recovery":
        ref = ex.sigma_ref
        if ref is None and cfg.medium.kind is MediumKind.CONSTANT and not isinstance(cfg.medium.value, list):
            ref = sigma_1d(problem.W, 1.0 if cfg.medium.value is None else float(cfg.medium.value))
        res = hz.recovery_energy(ex.e, ex.x0, ex.rho, ex.eps_list, problem, ex.seeds[0], ref, jobs,
                                 ex.tolerance)
        return _sweep_outcome(kind, res)
    if kind == "wulff":
        table, res = hz.wulff_scan(ex.directions, ex.R, ex.h, ex.seeds, problem, jobs)
        angles = res.extra["angles"]
        rows = [{"angle": a, "value": v, "stderr": s} for a, v, s in zip(angles, table.values, table.stderr)]
        return _sweep_outcome(kind, res, {"table": rows, "convex": res.extra["convex"]})
    raise ConfigError(f"unknown experiment type {kind!r}")


def samples_csv(outcome: Outcome, record_wall_time: bool) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(COLUMNS)
    for s in outcome.samples:
        w.writerow([
            outcome.name, s.d, " ".join(fmt(v) for v in s.e), fmt(s.R), fmt(s.h), fmt(s.kappa), fmt(s.rho),
            s.seed, fmt(s.value), fmt(s.normalized), s.iters, fmt(s.final_grad_norm),
            fmt(1e3 * s.wall_time) if record_wall_time else "",
        ])
    return buf.getvalue()


def write_outputs(out_dir: Path, files: dict[str, str]) -> None:
    """Stage every file in a sibling temp dir, then move them in; nothing partial survives a failure."""
    out_dir.mkdir(parents=True, exist_ok=True)
    stage = Path(tempfile.mkdtemp(prefix=".ahc-stage-", dir=out_dir))
    try:
        for name, text in files.items():
            (stage / name).write_text(text)
        for name in files:
            os.replace(stage / name, out_dir / name)
    finally:
        shutil.rmtree(stage, ignore_errors=True)


def cmd_run(args) -> int:
    try:
        cfg = load_config(args.config)
        t0 = time.perf_counter()
        outcome = run_experiment(cfg, args.jobs)
        elapsed = time.perf_counter() - t0
    except (ConfigError, MediumError) as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_ERROR
    except Exception as err:  # noqa: BLE001 - any solver failure is an error exit
        log.exception("run failed")
        print(f"error: {type(err).__name__}: {err}", file=sys.stderr)
        return EXIT_ERROR
    record = cfg.output.record_wall_time
    summary = dict(outcome.summary, config=cfg.canonical())
    files = {SAMPLES: samples_csv(outcome, record), SUMMARY: dumps(summary)}
    if record:
        lines = ["seed,R,h,wall_ms"] + [f"{s.seed},{fmt(s.R)},{fmt(s.h)},{fmt(1e3 * s.wall_time)}"
                                         for s in outcome.samples]
        lines.append(f"total,,,{fmt(1e3 * elapsed)}")
        files[TIMINGS] = "\n".join(lines) + "\n"
    try:
        write_outputs(Path(args.out), files)
    except OSError as err:
        print(f"error: cannot write outputs: {err}", file=sys.stderr)
        return EXIT_ERROR
    status = "PASS" if outcome.passed else "FAIL"
    print(f"{status} {outcome.name} -> {args.out}")
    return EXIT_OK if outcome.passed else EXIT_FAIL


def render_report(summary: dict) -> list[str]:
    name = summary.get("experiment", "?")
    status = "PASS" if summary.get("passed") else "FAIL"
    if name == "oracle-1d":
        return [f"{status} oracle-1d value={fmt(summary['value'])} target={fmt(summary['target'])}"
                f" rel_err={summary['relative_error']:.3e}"]
    lines = [f"{status} {name}"]
    if name == "glue-demo":
        lines.append(f"  fundamental estimate held on {summary['held']}/{summary['instances']} instances")
        return lines
    lines.append(f"  extrapolated limit {summary['extrapolated_limit']:.6f} +- {summary['stderr']:.2e}")
    if name == "wulff":
        lines.append(f"  {'angle':>10} {'phi':>12} {'stderr':>10}")
        for row in summary["table"]:
            lines.append(f"  {row['angle']:10.6f} {row['value']:12.6f} {row['stderr']:10.3e}")
        lines.append(f"  convexity: {'PASS' if summary['convex'] else 'FAIL'}")
    lines.append(f"  {'check':<24} {'passed':>9} {'strict':>9}  kind")
    for check, row in summary.get("checks", {}).items():
        kind = "hard" if row["hard"] else "report"
        lines.append(f"  {check:<24} {row['passed']:>4}/{row['checked']:<4} {row['strict']:>4}/{row['checked']:<4} {kind}")
    for flag in summary.get("flags", []):
        lines.append(f"  flag: {flag}")
    return lines


def cmd_report(args) -> int:
    path = Path(args.out) / SUMMARY
    if not path.is_file():
        print(f"error: no results in {args.out} (missing {SUMMARY})", file=sys.stderr)
        return EXIT_ERROR
    try:
        summary = json.loads(path.read_text())
    except json.JSONDecodeError as err:
        print(f"error: {path} is not valid JSON: {err}", file=sys.stderr)
        return EXIT_ERROR
    for line in render_report(summary):
        print(line)
    return EXIT_OK if summary.get("passed") else EXIT_FAIL


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="ahc", description="Effective surface tension of phase-field energies "
                                                        "in random media.")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)
    r = sub.add_parser("run", help="run the experiment declared in a config file")
    r.add_argument("--config", required=True)
    r.add_argument("--out", required=True)
    r.add_argument("--jobs", type=int, default=1)
    r.set_defaults(func=cmd_run)
    s = sub.add_parser("report", help="summarize the results in an output directory")
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_report)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    if getattr(args, "jobs", 1) < 1:
        print("error: --jobs must be >= 1", file=sys.stderr)
        return EXIT_ERROR
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
