"""Experiment front end: config parsing, CSV emission, runs and sweeps.

Config files are flat ``key = value`` lines with dotted section names
(grammar documented in the README).  Output is CSV only; plotting is
external.  A (config, seed) pair always produces byte-identical files.
"""

from __future__ import annotations

import csv
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple

from .diagnostics import (
    BoundReport,
    check_bound_constrained_wolfe,
    check_bound_det_ggnc,
    check_bound_det_uscg,
)
from .errors import ConfigError
from .estimator import AlphaSchedule
from .geometry import NormSpec, euclidean, max_norm, product_max, spectral
from .optimizers import OptimizerConfig, StepsizeSchedule, run
from .problems import Problem, make_problem
from .records import CSV_COLUMNS, RunRecord

__all__ = [
    "ExperimentConfig",
    "parse_config",
    "parse_config_file",
    "serialize_config",
    "write_csv",
    "write_summary",
    "run_experiment",
    "run_sweep",
    "SUMMARY_COLUMNS",
]

SUMMARY_COLUMNS = ("seed", "f_final", "f_bar", "min_dual_norm", "bound_lhs", "bound_rhs", "bound_pass")
SWEEP_COLUMNS = ("gamma", "rho", "label", "seed", "f_final", "f_bar", "min_dual_norm")

_ATOMIC_NORMS = {"euclidean": euclidean, "max": max_norm, "spectral": spectral}


@dataclass(frozen=True)
class ExperimentConfig:
    problem_name: str
    problem_params: Tuple[Tuple[str, object], ...]
    optimizer: OptimizerConfig
    seeds: Tuple[int, ...]
    paper_literal_momentum: bool = False
    sweep_gammas: Tuple[float, ...] = ()
    sweep_rhos: Tuple[float, ...] = ()

    def build_problem(self) -> Problem:
        return make_problem(self.problem_name, **dict(self.problem_params))


def _parse_scalar(text: str):
    """int, float (with inf and 2^k literals), bool, or bare string."""
    t = text.strip()
    low = t.lower()
    if low in ("true", "false"):
        return low == "true"
    if low in ("inf", "+inf", "infinity"):
        return math.inf
    if t.startswith("2^"):
        try:
            return 2.0 ** float(t[2:])
        except ValueError:
            pass
    try:
        return int(t)
    except ValueError:
        pass
    try:
        return float(t)
    except ValueError:
        pass
    return t


def _parse_value(text: str):
    if "," in text:
        return tuple(_parse_scalar(p) for p in text.split(","))
    return _parse_scalar(text)


def _format_scalar(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        if math.isinf(v):
            return "inf"
        return repr(v)
    return str(v)


def _format_value(v) -> str:
    if isinstance(v, tuple):
        return ",".join(_format_scalar(p) for p in v)
    return _format_scalar(v)


def parse_norm(text: str) -> NormSpec:
    """'euclidean' | 'max' | 'spectral' | 'product(kind:radius, ...)'"""
    t = text.strip()
    if t in _ATOMIC_NORMS:
        return _ATOMIC_NORMS[t]()
    if t.startswith("product(") and t.endswith(")"):
        children = []
        body = t[len("product(") : -1]
        if not body.strip():
            raise ConfigError("product norm needs children", field="optimizer.norm")
        for part in body.split(","):
            if ":" not in part:
                raise ConfigError(f"product child '{part.strip()}' must be kind:radius",
                                  field="optimizer.norm")
            kind, radius = part.split(":", 1)
            kind = kind.strip()
            if kind not in _ATOMIC_NORMS:
                raise ConfigError(f"unknown child norm '{kind}'", field="optimizer.norm")
            try:
                children.append((_ATOMIC_NORMS[kind](), float(_parse_scalar(radius))))
            except (TypeError, ValueError) as exc:
                raise ConfigError(f"bad radius '{radius.strip()}'", field="optimizer.norm") from exc
        return product_max(children)
    raise ConfigError(f"cannot parse norm '{text}'", field="optimizer.norm")


def format_norm(norm: NormSpec) -> str:
    if norm.kind == "product_max":
        inner = ",".join(f"{c.kind}:{_format_scalar(r)}" for c, r in norm.children)
        return f"product({inner})"
    return {"euclidean": "euclidean", "max": "max", "spectral": "spectral"}[norm.kind]


def parse_config(text: str) -> ExperimentConfig:
    """Parse the flat key-value grammar; errors carry line numbers."""
    entries: Dict[str, object] = {}
    lines: Dict[str, int] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError("expected 'key = value'", line=lineno)
        key, value = (part.strip() for part in line.split("=", 1))
        if not key:
            raise ConfigError("empty key", line=lineno)
        if key in entries:
            raise ConfigError(f"duplicate key '{key}'", line=lineno)
        entries[key] = value
        lines[key] = lineno

    def take(key, default=None, required=False):
        if key in entries:
            return _parse_value(str(entries.pop(key)))
        if required:
            raise ConfigError(f"missing required key '{key}'", field=key)
        return default

    def err(key, message):
        raise ConfigError(message, line=lines.get(key), field=key)

    problem_name = take("problem.name", required=True)
    problem_params = {}
    for key in [k for k in entries if k.startswith("problem.")]:
        problem_params[key[len("problem."):]] = _parse_value(str(entries.pop(key)))

    algorithm = str(take("optimizer.algorithm", required=True))
    norm_text = str(take("optimizer.norm", default="euclidean"))
    norm = parse_norm(norm_text)

    gamma_v = take("optimizer.gamma", required=True)
    schedule_kind = str(take("optimizer.schedule", default="constant"))
    warmdown_frac = take("optimizer.warmdown_frac", default=0.25)
    try:
        if schedule_kind == "constant":
            gamma = StepsizeSchedule.constant(float(gamma_v))
        elif schedule_kind == "linear_decay":
            gamma = StepsizeSchedule.linear_decay(float(gamma_v))
        elif schedule_kind == "warmdown":
            gamma = StepsizeSchedule.warmdown(float(gamma_v), float(warmdown_frac))
        else:
            err("optimizer.schedule", f"unknown schedule '{schedule_kind}'")
    except (TypeError, ValueError):
        err("optimizer.gamma", f"bad stepsize '{gamma_v}'")

    horizon = take("optimizer.horizon", required=True)
    if not isinstance(horizon, int) or horizon < 1:
        err("optimizer.horizon", f"horizon must be a positive integer, got {horizon}")

    paper_literal = bool(take("run.paper_literal_momentum", default=False))
    alpha_kind = str(take("optimizer.alpha_kind", default="constant"))
    alpha_value = take("optimizer.alpha", default=1.0)
    if alpha_kind == "constant":
        alpha = AlphaSchedule.constant(float(alpha_value), first_step_full=not paper_literal)
    elif alpha_kind == "horizon":
        alpha = AlphaSchedule.horizon(horizon, first_step_full=not paper_literal)
    else:
        err("optimizer.alpha_kind", f"unknown alpha kind '{alpha_kind}'")

    rho = float(take("optimizer.rho", default=math.inf))
    beta_v = take("optimizer.beta", default=None)
    beta = None if beta_v is None else float(beta_v)

    store_v = take("run.store_trajectory", default="auto")
    if store_v == "auto":
        store = None
    elif isinstance(store_v, bool):
        store = store_v
    else:
        err("run.store_trajectory", f"expected auto|true|false, got {store_v}")

    seeds_v = take("run.seeds", default=1)
    seeds = seeds_v if isinstance(seeds_v, tuple) else (seeds_v,)
    if not seeds or not all(isinstance(s, int) for s in seeds):
        err("run.seeds", f"seeds must be integers, got {seeds_v}")

    def float_tuple(v):
        if v is None:
            return ()
        items = v if isinstance(v, tuple) else (v,)
        return tuple(float(i) for i in items)

    sweep_gammas = float_tuple(take("sweep.gamma", default=None))
    sweep_rhos = float_tuple(take("sweep.rho", default=None))

    optimizer = OptimizerConfig(
        algorithm=algorithm,
        norm=norm,
        n=horizon,
        gamma=gamma,
        rho=rho,
        beta=beta,
        alpha=alpha,
        deterministic=bool(take("run.deterministic", default=False)),
        track_lambda=bool(take("run.track_lambda", default=False)),
        store_trajectory=store,
        init_scale=float(take("optimizer.init_scale", default=1.0)),
    )

    if entries:
        key = sorted(entries)[0]
        raise ConfigError(f"unknown key '{key}'", line=lines.get(key), field=key)

    return ExperimentConfig(
        problem_name=str(problem_name),
        problem_params=tuple(sorted(problem_params.items())),
        optimizer=optimizer,
        seeds=tuple(int(s) for s in seeds),
        paper_literal_momentum=paper_literal,
        sweep_gammas=sweep_gammas,
        sweep_rhos=sweep_rhos,
    )


def parse_config_file(path) -> ExperimentConfig:
    return parse_config(Path(path).read_text())


def serialize_config(cfg: ExperimentConfig) -> str:
    """Emit the canonical text form; parse(serialize(cfg)) == cfg."""
    opt = cfg.optimizer
    out = [f"problem.name = {cfg.problem_name}"]
    for key, value in cfg.problem_params:
        out.append(f"problem.{key} = {_format_value(value)}")
    out.append(f"optimizer.algorithm = {opt.algorithm}")
    out.append(f"optimizer.norm = {format_norm(opt.norm)}")
    out.append(f"optimizer.gamma = {_format_scalar(opt.gamma.gamma)}")
    out.append(f"optimizer.schedule = {opt.gamma.kind}")
    if opt.gamma.kind == "warmdown":
        out.append(f"optimizer.warmdown_frac = {_format_scalar(opt.gamma.warmdown_frac)}")
    out.append(f"optimizer.rho = {_format_scalar(opt.rho)}")
    if opt.beta is not None:
        out.append(f"optimizer.beta = {_format_scalar(opt.beta)}")
    out.append(f"optimizer.alpha_kind = {opt.alpha.kind}")
    if opt.alpha.kind == "constant":
        out.append(f"optimizer.alpha = {_format_scalar(opt.alpha.value)}")
    out.append(f"optimizer.horizon = {opt.n}")
    out.append(f"optimizer.init_scale = {_format_scalar(opt.init_scale)}")
    out.append(f"run.seeds = {','.join(str(s) for s in cfg.seeds)}")
    out.append(f"run.deterministic = {_format_scalar(opt.deterministic)}")
    store = "auto" if opt.store_trajectory is None else _format_scalar(opt.store_trajectory)
    out.append(f"run.store_trajectory = {store}")
    out.append(f"run.track_lambda = {_format_scalar(opt.track_lambda)}")
    out.append(f"run.paper_literal_momentum = {_format_scalar(cfg.paper_literal_momentum)}")
    if cfg.sweep_gammas:
        out.append(f"sweep.gamma = {','.join(_format_scalar(g) for g in cfg.sweep_gammas)}")
    if cfg.sweep_rhos:
        out.append(f"sweep.rho = {','.join(_format_scalar(r) for r in cfg.sweep_rhos)}")
    return "\n".join(out) + "\n"


def _format_cell(value) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "1" if value else "0"
    if isinstance(value, float):
        if math.isnan(value):
            return ""
        if math.isinf(value):
            return "inf" if value > 0 else "-inf"
        return repr(value)
    return str(value)


def write_csv(record: RunRecord, path) -> Path:
    """One trajectory file: the fixed header plus one row per iteration."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    try:
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(CSV_COLUMNS)
            for row in record.rows():
                writer.writerow([_format_cell(row[c if c != "gamma_k" else "gamma_k"]) for c in CSV_COLUMNS])
    except OSError as exc:
        raise ConfigError(f"cannot write CSV to '{path}': {exc}") from exc
    return path


def write_summary(entries: Sequence[Tuple[RunRecord, Optional[BoundReport]]], path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    try:
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(SUMMARY_COLUMNS)
            for record, bound in entries:
                writer.writerow([
                    _format_cell(record.seed),
                    _format_cell(record.f_final),
                    _format_cell(record.f_bar),
                    _format_cell(record.min_dual_norm),
                    _format_cell(None if bound is None else bound.lhs),
                    _format_cell(None if bound is None else bound.rhs),
                    _format_cell(None if bound is None else bound.passed),
                ])
    except OSError as exc:
        raise ConfigError(f"cannot write CSV to '{path}': {exc}") from exc
    return path


def auto_bound_report(record: RunRecord, problem: Problem,
                      opt: OptimizerConfig) -> Optional[BoundReport]:
    """Theorem bound for the summary when the run and constants allow one."""
    consts = problem.constants
    deterministic = opt.deterministic and opt.alpha.kind == "constant" and opt.alpha.value == 1.0
    if not deterministic or opt.gamma.kind != "constant" or consts.f_star is None:
        return None
    gamma = opt.gamma.gamma
    try:
        if opt.algorithm == "GGNC":
            return check_bound_det_ggnc(record, problem, opt.norm, gamma, opt.rho)
        if opt.algorithm == "uSCG" and consts.L0 is not None and math.isfinite(opt.rho):
            return check_bound_det_uscg(record, problem, opt.norm, consts.L0, gamma, opt.rho)
        if opt.algorithm in ("S3CG_v1", "S3CG_v2") and math.isfinite(opt.rho):
            return check_bound_constrained_wolfe(record, problem, opt.norm, opt.beta, gamma, opt.rho)
    except ConfigError:
        return None
    return None


def run_experiment(cfg: ExperimentConfig, out_dir, seed_override: Optional[int] = None) -> List[Path]:
    """Run every seed, writing one trajectory CSV per seed plus a summary."""
    out_dir = Path(out_dir)
    problem = cfg.build_problem()
    seeds = (seed_override,) if seed_override is not None else cfg.seeds
    entries = []
    paths = []
    for seed in seeds:
        record = run(problem, cfg.optimizer, int(seed))
        bound = auto_bound_report(record, problem, cfg.optimizer)
        name = f"{cfg.problem_name}_{cfg.optimizer.algorithm}_seed{seed}.csv"
        paths.append(write_csv(record, out_dir / name))
        entries.append((record, bound))
    paths.append(write_summary(entries, out_dir / "summary.csv"))
    return paths


def run_sweep(cfg: ExperimentConfig, out_dir, jobs: int = 1) -> Path:
    """Grid over sweep.gamma x sweep.rho (rho = inf rows labeled no-clip).

    Cells run in parallel up to `jobs`, but rows are written in grid order so
    the output is deterministic regardless of the worker count.
    """
    if not cfg.sweep_gammas or not cfg.sweep_rhos:
        raise ConfigError("sweep needs both sweep.gamma and sweep.rho", field="sweep")
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    problem = cfg.build_problem()

    cells = [
        (gamma, rho, seed)
        for rho in cfg.sweep_rhos
        for gamma in cfg.sweep_gammas
        for seed in cfg.seeds
    ]

    def one(cell):
        gamma, rho, seed = cell
        opt = replace(cfg.optimizer, gamma=replace(cfg.optimizer.gamma, gamma=gamma), rho=rho)
        record = run(problem, opt, int(seed))
        return record

    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            records = list(pool.map(one, cells))
    else:
        records = [one(c) for c in cells]

    path = out_dir / "sweep.csv"
    try:
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(SWEEP_COLUMNS)
            for (gamma, rho, seed), record in zip(cells, records):
                writer.writerow([
                    _format_cell(gamma),
                    _format_cell(rho),
                    "no-clip" if math.isinf(rho) else "",
                    _format_cell(seed),
                    _format_cell(record.f_final),
                    _format_cell(record.f_bar),
                    _format_cell(record.min_dual_norm),
                ])
    except OSError as exc:
        raise ConfigError(f"cannot write CSV to '{path}': {exc}") from exc
    return path
