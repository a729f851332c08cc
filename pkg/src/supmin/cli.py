"""Batch front-end: solve / audit / check pipelines driven by a JSON config.

Artifacts are CSV for paths and profiles, JSON for structured reports; both
are byte-deterministic for a fixed config and seed.  Exit codes: 0 ok,
1 config error, 2 solver failure, 3 audit violation, 4 hypothesis witness.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import dataclass
from pathlib import Path as FsPath

import numpy as np

from ._io import dumps_canonical, fmt_float
from .aronsson import residual_profile
from .audit import AuditConfig, audit_absolute_minimality
from .errors import ConfigError, SupminError
from .lagrangian import (
    Box,
    DataAssimilationModel,
    GrowthParams,
    LagrangianModel,
    MinOfNormsModel,
    PowerNormModel,
    RadialModel,
    SampledSignal,
    SamplePlan,
    check_growth_bounds,
    check_level_convexity,
    radial_profile,
)
from .path import AffineMap, Grid, Path
from .solver import SolveOptions, SweepSchedule, m_sweep

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_SOLVER = 2
EXIT_AUDIT = 3
EXIT_HYPOTHESIS = 4


@dataclass
class RunConfig:
    model: LagrangianModel
    domain: tuple[float, float]
    dim: int
    grid_points: int
    boundary: AffineMap
    schedule: SweepSchedule
    solve: SolveOptions
    audit: AuditConfig
    plan: SamplePlan
    seed: int
    output_dir: str


def _reject_unknown(obj: dict, path: str, allowed: set):
    for key in obj:
        if key not in allowed:
            raise ConfigError(f"{path}.{key}" if path else key, "unknown field")


def _get(obj: dict, path: str, key: str, kind, required=True, default=None):
    if key not in obj:
        if required:
            raise ConfigError(f"{path}.{key}" if path else key, "required field missing")
        return default
    val = obj[key]
    if kind is float and isinstance(val, (int, float)) and not isinstance(val, bool):
        return float(val)
    if kind is int and isinstance(val, int) and not isinstance(val, bool):
        return int(val)
    if not isinstance(val, kind) or isinstance(val, bool) and kind is not bool:
        name = getattr(kind, "__name__", str(kind))
        raise ConfigError(f"{path}.{key}" if path else key, f"expected {name}")
    return val


def _vector(obj, path: str, length: int | None = None) -> np.ndarray:
    try:
        arr = np.array(obj, dtype=float)
    except (TypeError, ValueError):
        raise ConfigError(path, "expected an array of numbers") from None
    if arr.ndim != 1 or not np.all(np.isfinite(arr)):
        raise ConfigError(path, "expected a finite 1-d array")
    if length is not None and arr.size != length:
        raise ConfigError(path, f"length must equal N = {length}")
    return arr


def _matrix(obj, path: str) -> np.ndarray:
    try:
        arr = np.array(obj, dtype=float)
    except (TypeError, ValueError):
        raise ConfigError(path, "expected a matrix of numbers") from None
    if arr.ndim != 2 or not np.all(np.isfinite(arr)):
        raise ConfigError(path, "expected a finite 2-d array")
    return arr


def _signal(obj, path: str, dim: int) -> SampledSignal:
    rows = _matrix(obj, path)
    if rows.shape[1] != 1 + dim:
        raise ConfigError(path, f"rows must be [x, v1..v{dim}]")
    try:
        return SampledSignal.from_rows(rows)
    except SupminError as exc:
        raise ConfigError(path, str(exc)) from None


def _growth(obj: dict | None, path: str) -> GrowthParams | None:
    if obj is None:
        return None
    _reject_unknown(obj, path, {"C1", "C2", "C3", "q", "r", "h_bound"})
    c1 = _get(obj, path, "C1", float)
    c2 = _get(obj, path, "C2", float)
    c3 = _get(obj, path, "C3", float)
    q = _get(obj, path, "q", float)
    r = _get(obj, path, "r", float)
    h_bound = _get(obj, path, "h_bound", float, required=False, default=1.0)
    if min(c1, c2, c3) < 0:
        raise ConfigError(path, "C1, C2, C3 must be nonnegative")
    if not (0 < q <= r):
        raise ConfigError(path, "0 < q <= r required")
    return GrowthParams(c1, c2, c3, q, r, h_bound)


def _model(obj: dict, dim: int) -> LagrangianModel:
    path = "lagrangian"
    kind = _get(obj, path, "kind", str)
    growth = _growth(_get(obj, path, "growth", dict, required=False), f"{path}.growth")
    if kind == "power_norm":
        _reject_unknown(obj, path, {"kind", "exponent", "offset", "growth"})
        exponent = _get(obj, path, "exponent", float)
        if exponent <= 0:
            raise ConfigError(f"{path}.exponent", "must be positive")
        offset = _vector(_get(obj, path, "offset", list), f"{path}.offset", dim)
        return PowerNormModel(exponent, offset, growth)
    if kind == "data_assimilation":
        _reject_unknown(obj, path, {"kind", "K", "k", "A", "c", "growth"})
        K = _matrix(_get(obj, path, "K", list), f"{path}.K")
        if K.shape[1] != dim:
            raise ConfigError(f"{path}.K", f"must have N = {dim} columns")
        A = _matrix(_get(obj, path, "A", list), f"{path}.A")
        if A.shape != (dim, dim):
            raise ConfigError(f"{path}.A", f"must be {dim}x{dim}")
        k = _signal(_get(obj, path, "k", list), f"{path}.k", K.shape[0])
        c = _signal(_get(obj, path, "c", list), f"{path}.c", dim)
        return DataAssimilationModel(K, k, A, c, growth)
    if kind == "radial":
        _reject_unknown(obj, path, {"kind", "profile", "A", "c", "growth"})
        prof = _get(obj, path, "profile", dict)
        _reject_unknown(prof, f"{path}.profile", {"name", "beta", "gamma"})
        name = _get(prof, f"{path}.profile", "name", str)
        beta = _get(prof, f"{path}.profile", "beta", float, required=False, default=0.0)
        gamma = _get(prof, f"{path}.profile", "gamma", float, required=False, default=1.0)
        try:
            profile = radial_profile(name, beta=beta, gamma=gamma)
        except SupminError as exc:
            raise ConfigError(f"{path}.profile", str(exc)) from None
        A = _matrix(_get(obj, path, "A", list), f"{path}.A")
        if A.shape != (dim, dim):
            raise ConfigError(f"{path}.A", f"must be {dim}x{dim}")
        c = _signal(_get(obj, path, "c", list), f"{path}.c", dim)
        return RadialModel(profile, A, c, growth)
    if kind == "min_norms":
        _reject_unknown(obj, path, {"kind", "centers", "exponent", "growth"})
        centers = _matrix(_get(obj, path, "centers", list), f"{path}.centers")
        if centers.shape[1] != dim:
            raise ConfigError(f"{path}.centers", f"centers must have N = {dim} columns")
        exponent = _get(obj, path, "exponent", float, required=False, default=1.0)
        if exponent <= 0:
            raise ConfigError(f"{path}.exponent", "must be positive")
        return MinOfNormsModel(centers, exponent, growth)
    raise ConfigError(f"{path}.kind", f"unknown model kind '{kind}'")


def parse_config(raw: dict) -> RunConfig:
    allowed = {"lagrangian", "domain", "N", "grid_points", "boundary", "schedule",
               "solve", "audit", "check", "seed", "output_dir"}
    _reject_unknown(raw, "", allowed)

    domain = _vector(_get(raw, "", "domain", list), "domain", 2)
    a, b = float(domain[0]), float(domain[1])
    if not a < b:
        raise ConfigError("domain", "a < b required")
    dim = _get(raw, "", "N", int)
    if dim < 1:
        raise ConfigError("N", "N >= 1 required")
    grid_points = _get(raw, "", "grid_points", int)
    if grid_points < 3:
        raise ConfigError("grid_points", "grid_points >= 3 required")

    boundary_obj = _get(raw, "", "boundary", dict)
    _reject_unknown(boundary_obj, "boundary", {"b0", "b1"})
    b0 = _vector(_get(boundary_obj, "boundary", "b0", list), "boundary.b0", dim)
    b1 = _vector(_get(boundary_obj, "boundary", "b1", list), "boundary.b1", dim)

    model = _model(_get(raw, "", "lagrangian", dict), dim)

    sched_obj = _get(raw, "", "schedule", dict, required=False, default={})
    _reject_unknown(sched_obj, "schedule",
                    {"m_start", "factor", "m_max", "tol_sweep", "restarts"})
    try:
        schedule = SweepSchedule(
            m_start=_get(sched_obj, "schedule", "m_start", int, required=False, default=2),
            factor=_get(sched_obj, "schedule", "factor", int, required=False, default=2),
            m_max=_get(sched_obj, "schedule", "m_max", int, required=False, default=1024),
            tol_sweep=_get(sched_obj, "schedule", "tol_sweep", float, required=False, default=1e-4),
            restarts=_get(sched_obj, "schedule", "restarts", int, required=False, default=1),
        )
    except SupminError as exc:
        raise ConfigError("schedule", str(exc)) from None

    solve_obj = _get(raw, "", "solve", dict, required=False, default={})
    _reject_unknown(solve_obj, "solve",
                    {"max_iters", "grad_tol", "init_step", "backtrack",
                     "sufficient_decrease", "history"})
    try:
        solve = SolveOptions(
            max_iters=_get(solve_obj, "solve", "max_iters", int, required=False, default=2000),
            grad_tol=_get(solve_obj, "solve", "grad_tol", float, required=False, default=1e-8),
            init_step=_get(solve_obj, "solve", "init_step", float, required=False, default=1.0),
            backtrack=_get(solve_obj, "solve", "backtrack", float, required=False, default=0.5),
            sufficient_decrease=_get(solve_obj, "solve", "sufficient_decrease", float,
                                     required=False, default=1e-4),
            history=_get(solve_obj, "solve", "history", int, required=False, default=10),
        )
    except SupminError as exc:
        raise ConfigError("solve", str(exc)) from None

    seed = _get(raw, "", "seed", int, required=False, default=0)
    if seed < 0:
        raise ConfigError("seed", "seed must be nonnegative")

    audit_obj = _get(raw, "", "audit", dict, required=False, default={})
    _reject_unknown(audit_obj, "audit", {"num_subintervals", "min_elements", "tol_audit"})
    num_sub = _get(audit_obj, "audit", "num_subintervals", int, required=False, default=20)
    min_el = _get(audit_obj, "audit", "min_elements", int, required=False, default=3)
    tol_audit = _get(audit_obj, "audit", "tol_audit", float, required=False, default=1e-3)
    try:
        audit = AuditConfig(num_subintervals=num_sub, min_elements=min_el,
                            tol_audit=tol_audit, seed=seed, schedule=schedule,
                            options=solve)
    except SupminError as exc:
        raise ConfigError("audit", str(exc)) from None

    check_obj = _get(raw, "", "check", dict, required=False, default={})
    _reject_unknown(check_obj, "check", {"num_triples", "t_levels", "box"})
    box_obj = _get(check_obj, "check", "box", dict, required=False, default={})
    _reject_unknown(box_obj, "check.box", {"x", "eta", "p"})

    def _range(key, default):
        if key not in box_obj:
            return default
        rng = _vector(box_obj[key], f"check.box.{key}", 2)
        return (float(rng[0]), float(rng[1]))

    try:
        box = Box(x=_range("x", (a, b)), eta=_range("eta", (-5.0, 5.0)),
                  p=_range("p", (-5.0, 5.0)))
        plan = SamplePlan(
            num_triples=_get(check_obj, "check", "num_triples", int, required=False, default=500),
            box=box,
            t_levels=_get(check_obj, "check", "t_levels", int, required=False, default=5),
            seed=seed,
        )
    except SupminError as exc:
        raise ConfigError("check", str(exc)) from None

    output_dir = _get(raw, "", "output_dir", str)
    return RunConfig(model, (a, b), dim, grid_points, AffineMap(b0, b1),
                     schedule, solve, audit, plan, seed, output_dir)


def load_config(config_path: str) -> RunConfig:
    try:
        with open(config_path) as fh:
            raw = json.load(fh)
    except OSError as exc:
        raise ConfigError(config_path, str(exc)) from None
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{config_path}:{exc.lineno}:{exc.colno}", exc.msg) from None
    if not isinstance(raw, dict):
        raise ConfigError(config_path, "config must be a JSON object")
    return parse_config(raw)


# -- subcommands ---------------------------------------------------------------


def _write_energies_csv(path, records) -> None:
    with open(path, "w", newline="\n") as fh:
        fh.write("m,normalized_root\n")
        for rec in records:
            fh.write(f"{rec.m},{fmt_float(rec.normalized_root)}\n")


def run_solve(config: RunConfig, output_dir: FsPath, jobs: int = 1) -> int:
    out = FsPath(output_dir)
    out.mkdir(parents=True, exist_ok=True)
    (out / "paths").mkdir(exist_ok=True)
    grid = Grid.uniform(config.domain[0], config.domain[1], config.grid_points)
    sweep = m_sweep(config.model, grid, config.boundary, config.schedule,
                    config.solve, seed=config.seed)

    records_json = []
    for rec in sweep.records:
        ref = f"paths/m_{rec.m:06d}.csv"
        rec.path.to_csv(str(out / ref))
        records_json.append({
            "m": rec.m,
            "normalized_root": rec.normalized_root,
            "iterations": rec.iterations,
            "converged": rec.converged,
            "path_csv": ref,
        })
    sweep.candidate.to_csv(str(out / "candidate.csv"))
    _write_energies_csv(out / "energies.csv", sweep.records)

    residuals_error = None
    try:
        if sweep.candidate.grid.num_elements >= 4 and not sweep.aborted:
            residual_profile(config.model, sweep.candidate).to_csv(str(out / "residuals.csv"))
        else:
            raise SupminError("residual profile unavailable")
    except SupminError as exc:
        residuals_error = str(exc)
        with open(out / "residuals.csv", "w", newline="\n") as fh:
            fh.write("x," + ",".join(f"res_{k + 1}" for k in range(config.dim)) + ",norm\n")

    tied_refs = []
    for idx, tied in enumerate(sweep.tied_candidates, start=1):
        ref = f"candidate_tie_{idx}.csv"
        tied.to_csv(str(out / ref))
        tied_refs.append(ref)

    doc = {
        "domain": [config.domain[0], config.domain[1]],
        "n": config.dim,
        "grid_points": config.grid_points,
        "seed": config.seed,
        "records": records_json,
        "c_sequence": [rec.normalized_root for rec in sweep.records],
        "sup_of_candidate": sweep.sup_of_candidate,
        "candidate_csv": "candidate.csv",
        "aborted": sweep.aborted,
        "error": sweep.error,
        "residuals_error": residuals_error,
        "restart_sups": sweep.restart_sups,
        "tied_candidate_csvs": tied_refs,
    }
    with open(out / "sweep.json", "w", newline="\n") as fh:
        fh.write(dumps_canonical(doc))

    if sweep.aborted:
        print(f"solver failure: {sweep.error}", file=sys.stderr)
        return EXIT_SOLVER
    print(f"solve: {len(sweep.records)} exponents, "
          f"sup_of_candidate = {fmt_float(sweep.sup_of_candidate)}")
    return EXIT_OK


def run_audit(config: RunConfig, output_dir: FsPath, jobs: int = 1,
              solve_first: bool = False) -> int:
    out = FsPath(output_dir)
    candidate_csv = out / "candidate.csv"
    if solve_first:
        code = run_solve(config, out, jobs)
        if code != EXIT_OK:
            return code
    if not candidate_csv.exists():
        print(f"audit: {candidate_csv} not found (run solve or pass --solve-first)",
              file=sys.stderr)
        return EXIT_CONFIG
    candidate = Path.from_csv(str(candidate_csv))
    audit_cfg = AuditConfig(
        num_subintervals=config.audit.num_subintervals,
        min_elements=config.audit.min_elements,
        tol_audit=config.audit.tol_audit,
        seed=config.seed,
        schedule=config.schedule,
        options=config.solve,
        jobs=jobs,
    )
    report = audit_absolute_minimality(config.model, candidate, audit_cfg)
    with open(out / "audit.json", "w", newline="\n") as fh:
        fh.write(dumps_canonical(report.to_json_dict()))
    if report.violations:
        print(f"audit: {len(report.violations)} violation(s), "
              f"max_deficit = {fmt_float(report.max_deficit)}")
        print(f"{'alpha':>12} {'beta':>12} {'restricted':>14} {'local':>14} {'deficit':>14}")
        for i in report.violations:
            e = report.entries[i]
            print(f"{e.alpha:>12.6g} {e.beta:>12.6g} {e.sup_global_restricted:>14.8g} "
                  f"{e.sup_local_solution:>14.8g} {e.deficit:>14.8g}")
        return EXIT_AUDIT
    print(f"audit: no violations over {len(report.entries)} subintervals "
          f"(max_deficit = {fmt_float(report.max_deficit)})")
    return EXIT_OK


def run_check(config: RunConfig, output_dir: FsPath) -> int:
    out = FsPath(output_dir)
    out.mkdir(parents=True, exist_ok=True)
    level = check_level_convexity(config.model, config.plan)
    growth_result = None
    if config.model.growth is not None:
        growth_result = check_growth_bounds(config.model, config.model.growth, config.plan)
    doc = {
        "level_convexity": level.to_json_dict(),
        "growth_bounds": growth_result.to_json_dict() if growth_result else None,
    }
    with open(out / "hypotheses.json", "w", newline="\n") as fh:
        fh.write(dumps_canonical(doc))
    failed = (not level.passed) or (growth_result is not None and not growth_result.passed)
    if failed:
        n_wit = len(level.witnesses) + (len(growth_result.witnesses) if growth_result else 0)
        print(f"check: {n_wit} witness(es) found")
        return EXIT_HYPOTHESIS
    print("check: hypotheses hold on all samples")
    return EXIT_OK


def _resolve_jobs(arg_jobs) -> int:
    if arg_jobs is not None:
        return max(1, int(arg_jobs))
    env = os.environ.get("SUPMIN_JOBS")
    if env is not None:
        try:
            return max(1, int(env))
        except ValueError:
            return 1
    return 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="supmin",
        description="Sup-energy path minimization: solve, audit, check.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_text in (
        ("solve", "run the exponent sweep and emit candidate artifacts"),
        ("audit", "audit a candidate's absolute minimality on subintervals"),
        ("check", "check level-convexity and growth hypotheses by sampling"),
    ):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("config", help="JSON run configuration")
        p.add_argument("--output-dir", help="override the config's output_dir")
        if name != "check":
            p.add_argument("--jobs", type=int, default=None,
                           help="worker cap (default: SUPMIN_JOBS or 1)")
        if name == "audit":
            p.add_argument("--solve-first", action="store_true",
                           help="run solve before auditing in the same invocation")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        config = load_config(args.config)
    except ConfigError as exc:
        print(str(exc), file=sys.stderr)
        return EXIT_CONFIG
    output_dir = FsPath(args.output_dir or config.output_dir)
    try:
        if args.command == "solve":
            return run_solve(config, output_dir, _resolve_jobs(args.jobs))
        if args.command == "audit":
            return run_audit(config, output_dir, _resolve_jobs(args.jobs),
                             solve_first=args.solve_first)
        return run_check(config, output_dir)
    except ConfigError as exc:
        print(str(exc), file=sys.stderr)
        return EXIT_CONFIG
    except SupminError as exc:
        print(f"solver failure: {exc}", file=sys.stderr)
        return EXIT_SOLVER


def entry() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entry()
