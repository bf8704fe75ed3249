"""Command-line front end: run, sweep, verify, probe.

Exit codes: 0 success, 1 runtime failure (with iteration context when a run
aborts), 2 configuration errors (with line/field diagnostics).  The NONCLIP_LOG
environment variable ({off, info, debug}, default off) controls logging.
"""

from __future__ import annotations

import argparse
import logging
import os
import sys
from pathlib import Path

from .errors import ConfigError, NonclipError, RunError
from .harness import parse_config_file, run_experiment, run_sweep

log = logging.getLogger("nonclip")


def _setup_logging() -> None:
    level = os.environ.get("NONCLIP_LOG", "off").lower()
    if level == "off":
        logging.disable(logging.CRITICAL)
        return
    logging.basicConfig(
        level=logging.DEBUG if level == "debug" else logging.INFO,
        format="%(asctime)s %(name)s %(levelname)s %(message)s",
    )


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="nonclip", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p, needs_config=True):
        if needs_config:
            p.add_argument("--config", required=True, help="experiment config file")
        p.add_argument("--out", default="out", help="output directory (default: out)")
        p.add_argument("--seed", type=int, default=None, help="override the config seeds")

    p_run = sub.add_parser("run", help="run one experiment; one trajectory CSV per seed plus a summary")
    add_common(p_run)

    p_sweep = sub.add_parser("sweep", help="grid over sweep.gamma x sweep.rho (rho=inf labeled no-clip)")
    add_common(p_sweep)
    p_sweep.add_argument("--jobs", type=int, default=1, help="parallel runs (default 1)")

    p_verify = sub.add_parser("verify", help="full invariant and bound-check suite")
    p_verify.add_argument("--only", action="append", default=None,
                          help="substring filter on check names (repeatable)")

    p_probe = sub.add_parser("probe", help="smoothness probe; writes samples and the fitted constants")
    add_common(p_probe)
    return parser


def _cmd_run(args) -> int:
    cfg = parse_config_file(args.config)
    paths = run_experiment(cfg, args.out, seed_override=args.seed)
    for p in paths:
        log.info("wrote %s", p)
    print(f"wrote {len(paths)} files to {args.out}")
    return 0


def _cmd_sweep(args) -> int:
    cfg = parse_config_file(args.config)
    if args.seed is not None:
        from dataclasses import replace

        cfg = replace(cfg, seeds=(args.seed,))
    path = run_sweep(cfg, args.out, jobs=max(1, args.jobs))
    print(f"wrote {path}")
    return 0


def _cmd_verify(args) -> int:
    from .verify import format_result, run_checks

    results = run_checks(names=args.only)
    for result in results:
        print(format_result(result))
    failed = [r for r in results if not r.passed]
    print(f"{len(results) - len(failed)}/{len(results)} checks passed")
    return 1 if failed else 0


def _cmd_probe(args) -> int:
    import csv

    from .diagnostics import generate_probe_pairs, smoothness_probe
    from .optimizers import run as run_opt

    cfg = parse_config_file(args.config)
    problem = cfg.build_problem()
    seed = args.seed if args.seed is not None else cfg.seeds[0]
    trajectory = None
    try:
        from dataclasses import replace

        short = replace(cfg.optimizer, n=min(cfg.optimizer.n, 200), store_trajectory=True)
        trajectory = run_opt(problem, short, seed).iterates
    except NonclipError:
        log.info("probe trajectory run failed; falling back to random pairs only")
    pairs = generate_probe_pairs(problem, cfg.optimizer.norm, seed, trajectory=trajectory)
    fit = smoothness_probe(problem, pairs, cfg.optimizer.norm)

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    with open(out / "probe.csv", "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(("ratio", "gnorm", "sep"))
        for s in fit.samples:
            writer.writerow((repr(s.ratio), repr(s.gnorm), repr(s.sep)))
    with open(out / "probe_fit.csv", "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(("l0_hat", "l1_hat", "residual", "n_samples"))
        writer.writerow((repr(fit.L0_hat), repr(fit.L1_hat), repr(fit.residual), len(fit.samples)))
    print(f"probe: L0_hat={fit.L0_hat:.6g} L1_hat={fit.L1_hat:.6g} "
          f"residual={fit.residual:.3g} samples={len(fit.samples)}")
    return 0


def main(argv=None) -> int:
    _setup_logging()
    parser = _build_parser()
    args = parser.parse_args(argv)
    handlers = {"run": _cmd_run, "sweep": _cmd_sweep, "verify": _cmd_verify, "probe": _cmd_probe}
    try:
        return handlers[args.command](args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except RunError as exc:
        print(f"run error: {exc}", file=sys.stderr)
        return 1
    except NonclipError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    raise SystemExit(main())
