"""Acceptance verification: invariants, equivalences, and theorem bounds.

Each check here is one acceptance criterion (plus two aggregate module
invariant suites).  The CLI `verify` subcommand runs all of them and exits
nonzero on any failure; tests/test_acceptance.py wraps the same registry so
pytest and the CLI agree by construction.

Brute-force oracles (sign-vector enumeration, sphere/rotation grids) live
here because `verify` must be able to recompute expected values on a fresh
checkout; they never call the code paths they check.
"""

from __future__ import annotations

import itertools
import math
import time
from dataclasses import dataclass, replace
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np

from . import diagnostics, geometry, problems
from .estimator import AlphaSchedule, MomentumState, momentum_update
from .geometry import NormSpec, dual_norm, euclidean, lmo, max_norm, primal_norm, product_max, sharp, spectral
from .harness import run_experiment
from .optimizers import OptimizerConfig, StepsizeSchedule, from_theorem, run
from .paramspace import ParamVector, axpy, euclidean_norm, inner, max_abs_diff, scale
from .problems import finite_diff_grad, make_problem
from .rng import stream

__all__ = ["CheckResult", "CHECKS", "run_checks", "format_result"]


@dataclass
class CheckResult:
    name: str
    passed: bool
    detail: str
    seconds: float


# ---------------------------------------------------------------------------
# Brute-force oracles (independent of the library's lmo/dual/sharp paths)


def _sign_vectors(dim: int) -> np.ndarray:
    """All of {-1, 0, 1}^dim as a (3^dim, dim) float array."""
    idx = np.arange(3**dim)
    cols = []
    for j in range(dim):
        cols.append(idx % 3)
        idx = idx // 3
    return np.stack(cols, axis=1).astype(np.float64) - 1.0


def _closed_dual(norm: NormSpec, d: ParamVector) -> float:
    """Closed-form dual norms used only as oracles."""
    if norm.kind == geometry.EUCLIDEAN:
        return math.sqrt(sum(float(np.sum(b * b)) for b in d.blocks))
    if norm.kind == geometry.MAX:
        return sum(float(np.sum(np.abs(b))) for b in d.blocks)
    if norm.kind == geometry.SPECTRAL:
        m = d.blocks[0]
        evals = np.clip(np.linalg.eigvalsh(m.T @ m), 0.0, None)
        return float(np.sum(np.sqrt(evals)))
    return sum(
        r * _closed_dual(child, ParamVector([b]))
        for (child, r), b in zip(norm.children, d.blocks)
    )


def _rotation_grid_min(d: np.ndarray, step: float = 2e-4) -> float:
    """Min of <d, X> over O(2) sampled on a theta grid (rotations + reflections)."""
    theta = np.arange(0.0, 2.0 * np.pi, step)
    c, s = np.cos(theta), np.sin(theta)
    rot = (d[0, 0] + d[1, 1]) * c + (d[1, 0] - d[0, 1]) * s
    ref = (d[0, 0] - d[1, 1]) * c + (d[0, 1] + d[1, 0]) * s
    return float(min(rot.min(), ref.min()))


# ---------------------------------------------------------------------------
# Criterion 1: lmo vs brute force + alignment identity


def c01_lmo_oracles() -> Tuple[bool, str]:
    gen = stream(11, "verify:lmo")
    worst_gap = 0.0
    worst_align = 0.0

    # Max-norm: exhaustive over sign vectors, dims 1..12, 200 directions.
    sign_cache: Dict[int, np.ndarray] = {}
    for i in range(200):
        dim = 1 + i % 12
        d = gen.standard_normal(dim)
        S = sign_cache.setdefault(dim, _sign_vectors(dim))
        brute = float(np.min(S @ d))
        pv = ParamVector([d])
        val = inner(pv, lmo(max_norm(), pv))
        scale_ = max(1.0, float(np.abs(d).sum()))
        if not (val <= brute + 1e-12 * scale_ and brute <= val + 1e-12 * scale_):
            return False, f"max-norm lmo value {val} != exhaustive min {brute} at dim {dim}"
        worst_align = max(worst_align, abs(-val - _closed_dual(max_norm(), pv)) / scale_)

    # Euclidean: dense unit-sphere samples, dims 2..5, 200 directions.
    sphere_cache: Dict[int, np.ndarray] = {}
    for i in range(200):
        dim = 2 + i % 4
        d = gen.standard_normal(dim)
        nd = float(np.linalg.norm(d))
        if dim == 2:
            theta = np.arange(0.0, 2.0 * np.pi, 1e-4)
            pts = np.stack([np.cos(theta), np.sin(theta)], axis=1)
            tol = nd * 1e-8
        else:
            if dim not in sphere_cache:
                raw = stream(12, f"verify:sphere:{dim}").standard_normal((120_000, dim))
                sphere_cache[dim] = raw / np.linalg.norm(raw, axis=1, keepdims=True)
            pts = sphere_cache[dim]
            tol = nd * 0.02
        brute = float(np.min(pts @ d))
        pv = ParamVector([d])
        val = inner(pv, lmo(euclidean(), pv))
        if not (val <= brute + 1e-12 * max(1.0, nd)):
            return False, f"euclidean lmo value {val} beaten by a sampled point {brute} (dim {dim})"
        gap = brute - val
        if gap > tol:
            return False, f"euclidean lmo value {val} too far below sphere grid {brute} (dim {dim})"
        worst_gap = max(worst_gap, gap / max(1.0, nd))
        worst_align = max(worst_align, abs(-val - _closed_dual(euclidean(), pv)) / max(1.0, nd))

    # Spectral 2x2: O(2) grid, 200 directions.
    for _ in range(200):
        d = gen.standard_normal((2, 2))
        pv = ParamVector([d])
        brute = _rotation_grid_min(d)
        val = inner(pv, lmo(spectral(), pv))
        scale_ = max(1.0, float(np.linalg.norm(d)))
        if not (val <= brute + 1e-10 * scale_) or brute - val > 1e-6 * scale_:
            return False, f"spectral lmo value {val} vs O(2) grid {brute}"
        worst_align = max(worst_align, abs(-val - _closed_dual(spectral(), pv)) / scale_)

    # Alignment identity for the product norm as well.
    pn = product_max([(euclidean(), 1.0), (spectral(), 2.5), (max_norm(), 0.5)])
    for _ in range(200):
        d = ParamVector([gen.standard_normal(5), gen.standard_normal((3, 4)), gen.standard_normal(6)])
        got = dual_norm(pn, d)
        want = _closed_dual(pn, d)
        worst_align = max(worst_align, abs(got - want) / max(1.0, want))

    if worst_align > 1e-10:
        return False, f"alignment identity error {worst_align:.3e} > 1e-10"
    return True, f"200 dirs/norm OK; worst sphere gap {worst_gap:.2e}, worst alignment {worst_align:.2e}"


# ---------------------------------------------------------------------------
# Criterion 2: duality identity sharp = -dual * lmo for all four norm kinds


def c02_duality_identity() -> Tuple[bool, str]:
    gen = stream(21, "verify:duality")
    cases = [
        ("euclidean", euclidean(), lambda: [gen.standard_normal(8)]),
        ("max", max_norm(), lambda: [gen.standard_normal(8)]),
        ("spectral", spectral(), lambda: [gen.standard_normal((4, 3))]),
        (
            "product",
            product_max([(euclidean(), 1.0), (spectral(), 2.0), (max_norm(), 0.5)]),
            lambda: [gen.standard_normal(5), gen.standard_normal((3, 4)), gen.standard_normal(6)],
        ),
    ]
    worst = 0.0
    worst_sq = 0.0
    for name, norm, make in cases:
        for _ in range(500):
            d = ParamVector(make())
            nd = dual_norm(norm, d)
            lhs = sharp(norm, d)
            rhs = scale(-nd, lmo(norm, d))
            err = max_abs_diff(lhs, rhs) / max(1.0, nd)
            if err > 1e-10:
                return False, f"{name}: sharp != -dual*lmo, elementwise error {err:.3e}"
            worst = max(worst, err)
            sq = abs(inner(d, lhs) - nd * nd) / max(1.0, nd * nd)
            if sq > 1e-10:
                return False, f"{name}: <d, sharp(d)> != dual^2, error {sq:.3e}"
            worst_sq = max(worst_sq, sq)
    return True, f"500 inputs x 4 kinds OK; worst identity error {worst:.2e}, worst <d,d#> error {worst_sq:.2e}"


# ---------------------------------------------------------------------------
# Criterion 3: GGNC with the Euclidean norm reproduces Clipped GD


def c03_euclidean_reduction() -> Tuple[bool, str]:
    problem = make_problem("quadratic", dim=20, sigma=1.0)
    base = dict(norm=euclidean(), n=100, gamma=StepsizeSchedule.constant(0.1), rho=2.0,
                alpha=AlphaSchedule.constant(0.5), store_trajectory=True)
    rec_g = run(problem, OptimizerConfig(algorithm="GGNC", **base), seed=3)
    rec_c = run(problem, OptimizerConfig(algorithm="ClippedGD", **base), seed=3)
    dev = max(max_abs_diff(a, b) for a, b in zip(rec_g.iterates, rec_c.iterates))
    dev = max(dev, max_abs_diff(rec_g.x_final, rec_c.x_final))
    clip_steps = int(rec_g.clipped.sum())
    if dev > 1e-12:
        return False, f"max per-coordinate deviation {dev:.3e} > 1e-12"
    if clip_steps == 0 or clip_steps == rec_g.n:
        return False, f"degenerate trajectory: {clip_steps}/{rec_g.n} clipped steps"
    return True, f"100 steps, deviation {dev:.2e}, {clip_steps} clipped steps"


# ---------------------------------------------------------------------------
# Criterion 4: short-step bridge mode reproduces GGNC


def c04_bridge() -> Tuple[bool, str]:
    problem = make_problem("quadratic", dim=12)
    worst = 0.0
    for norm, label in ((euclidean(), "euclidean"), (max_norm(), "max")):
        for beta in (1.0, 2.0):
            common = dict(norm=norm, n=100, gamma=StepsizeSchedule.constant(0.05),
                          deterministic=True, store_trajectory=True)
            ggnc = run(problem, OptimizerConfig(algorithm="GGNC", rho=beta * 1.5, **common), seed=5)
            bridged = run(problem, OptimizerConfig(algorithm="S3CG_v1", rho=1.5, beta=beta,
                                                   s3cg_bridge_mode=True, **common), seed=5)
            dev = max(max_abs_diff(a, b) for a, b in zip(ggnc.iterates, bridged.iterates))
            dev = max(dev, max_abs_diff(ggnc.x_final, bridged.x_final))
            if dev > 1e-12:
                return False, f"{label}, beta={beta}: deviation {dev:.3e} > 1e-12"
            worst = max(worst, dev)
    return True, f"euclidean+max, beta in {{1,2}}, 100 steps; worst deviation {worst:.2e}"


# ---------------------------------------------------------------------------
# Criterion 5: deterministic descent with probe-estimated constants


def _probe_gamma(problem, norm, rho: float, ref_gamma: float, seed: int) -> Tuple[float, float, float]:
    ref = run(problem, OptimizerConfig(algorithm="GGNC", norm=norm, n=150,
                                       gamma=StepsizeSchedule.constant(ref_gamma), rho=rho,
                                       deterministic=True, store_trajectory=True), seed=seed)
    fit = diagnostics.probe_constants(problem, norm, seed, trajectory=ref.iterates)
    return 1.0 / (fit.L0_hat + rho * fit.L1_hat), fit.L0_hat, fit.L1_hat


def c05_descent() -> Tuple[bool, str]:
    details = []
    cases = [
        (make_problem("quadratic", dim=20, spectrum=(1.2, 2.0)), 1.0, 0.1),
        (make_problem("exp_family", dim=10), 5.0, 0.02),
    ]
    for problem, rho, ref_gamma in cases:
        gamma, l0, l1 = _probe_gamma(problem, euclidean(), rho, ref_gamma, seed=7)
        for seed in range(10):
            rec = run(problem, OptimizerConfig(algorithm="GGNC", norm=euclidean(), n=1000,
                                               gamma=StepsizeSchedule.constant(gamma), rho=rho,
                                               deterministic=True, store_trajectory=False), seed=seed)
            bad = diagnostics.check_descent(rec)
            if bad:
                return False, (f"{problem.name}: {len(bad)} descent violations "
                               f"(first at k={bad[0]}) with gamma={gamma:.4g}")
        details.append(f"{problem.name}: L0^={l0:.3g} L1^={l1:.3g} gamma={gamma:.3g}")
    return True, "0 violations over 10^3 steps x 10 inits; " + "; ".join(details)


# ---------------------------------------------------------------------------
# Criterion 6: one-sided theorem bound checks


def c06_bounds() -> Tuple[bool, str]:
    horizons = (100, 1000, 10000)
    reports = []

    quad = make_problem("quadratic", dim=20)
    L0 = quad.constants.L0

    # det GGNC on the quadratic with the theorem preset (L1 = 0 -> rho = inf).
    preset = from_theorem("det_ggnc", L0=L0, L1=0.0)
    for n in horizons:
        rec = run(quad, OptimizerConfig(algorithm="GGNC", norm=euclidean(), n=n,
                                        gamma=StepsizeSchedule.constant(preset.gamma),
                                        rho=preset.rho, deterministic=True,
                                        store_trajectory=True), seed=1)
        reports.append(diagnostics.check_bound_det_ggnc(rec, quad, euclidean(), preset.gamma, preset.rho))

    # det GGNC on the exp family with probe-estimated constants and finite rho.
    expf = make_problem("exp_family", dim=10)
    rho_exp = 5.0
    gamma_exp, _, _ = _probe_gamma(expf, euclidean(), rho_exp, ref_gamma=0.02, seed=9)
    for n in horizons:
        rec = run(expf, OptimizerConfig(algorithm="GGNC", norm=euclidean(), n=n,
                                        gamma=StepsizeSchedule.constant(gamma_exp), rho=rho_exp,
                                        deterministic=True, store_trajectory=True), seed=1)
        reports.append(diagnostics.check_bound_det_ggnc(rec, expf, euclidean(), gamma_exp, rho_exp))

    # det uSCG theorem + neighborhood proposition on the quadratic.
    gamma_u, rho_u = 0.5, 0.1
    for n in horizons:
        rec = run(quad, OptimizerConfig(algorithm="uSCG", norm=euclidean(), n=n,
                                        gamma=StepsizeSchedule.constant(gamma_u), rho=rho_u,
                                        deterministic=True, store_trajectory=True), seed=1)
        reports.append(diagnostics.check_bound_det_uscg(rec, quad, euclidean(), L0, gamma_u, rho_u))
        reports.append(diagnostics.check_bound_uscg_neighborhood(rec, quad, euclidean(),
                                                                 quad.constants.L, gamma_u, rho_u))

    # Constrained Wolfe-gap bound: quadratic and logistic, S3CG variant 1
    # with gamma = 1/L, rho = L (so gamma*eta <= 1 by construction).
    logi = make_problem("logistic")
    for problem, beta in ((quad, None), (logi, 6.0)):
        L = problem.constants.L
        if beta is None:
            a = problem.grad(ParamVector([np.zeros(problem.block_shapes[0])]))
            # ||x*|| for the quadratic: grad(0) = -b and the diagonal is recoverable,
            # but 1.5x a run-free bound keeps it simple: beta from the start point.
            beta = 8.0
        gamma_c, rho_c = 1.0 / L, L
        for n in horizons:
            x0 = problem.init(1)
            x0 = scale(0.5 * beta / max(primal_norm(euclidean(), x0), 1e-12), x0)
            rec = run(problem, OptimizerConfig(algorithm="S3CG_v1", norm=euclidean(), n=n,
                                               gamma=StepsizeSchedule.constant(gamma_c), rho=rho_c,
                                               beta=beta, deterministic=True,
                                               store_trajectory=True), seed=1, x_init=x0)
            reports.append(diagnostics.check_bound_constrained_wolfe(rec, problem, euclidean(),
                                                                     beta, gamma_c, rho_c))

    failed = [r for r in reports if not r.passed]
    if failed:
        r = failed[0]
        return False, f"{len(failed)}/{len(reports)} bounds failed; first: {r.name} lhs={r.lhs:.4g} rhs={r.rhs:.4g} ({r.detail})"
    margins = min(r.rhs / max(r.lhs, 1e-300) for r in reports)
    return True, f"{len(reports)} bound checks passed (n in {horizons}); min rhs/lhs margin {margins:.3g}"


# ---------------------------------------------------------------------------
# Criterion 7: constraint preservation over long runs


def c07_constraints() -> Tuple[bool, str]:
    slack = 1.0 + 1e-9
    n = 10_000
    seeds = range(5)
    checked = 0

    logi = make_problem("logistic")
    L = logi.constants.L
    beta = 3.0
    prod1 = product_max([(euclidean(), beta)])
    logi_cases = [
        OptimizerConfig(algorithm="S3CG_v1", norm=euclidean(), n=n, beta=beta,
                        gamma=StepsizeSchedule.constant(1.0 / L), rho=L,
                        alpha=AlphaSchedule.constant(0.2), store_trajectory=False),
        OptimizerConfig(algorithm="S3CG_v2", norm=euclidean(), n=n, beta=beta,
                        gamma=StepsizeSchedule.constant(1.0 / L), rho=L,
                        alpha=AlphaSchedule.constant(0.2), store_trajectory=False),
        OptimizerConfig(algorithm="ClippedScion_v1", norm=prod1, n=n,
                        gamma=StepsizeSchedule.constant(0.5), rho=1.0,
                        alpha=AlphaSchedule.constant(0.2), store_trajectory=False),
    ]
    for cfg in logi_cases:
        bound = beta if cfg.beta is not None else 1.0
        for seed in seeds:
            x0 = logi.init(seed)
            x0 = scale(0.6 * beta / max(euclidean_norm(x0), 1e-12), x0)
            rec = run(logi, cfg, seed, x_init=x0)
            worst = float(np.max(rec.param_norm))
            final = primal_norm(cfg.norm, rec.x_final)
            if cfg.norm.kind == "product_max":
                worst, final = worst * beta, final * beta  # scale back to the beta ball
            if max(worst, final) > beta * slack:
                return False, f"logistic {cfg.algorithm}: norm {max(worst, final):.12g} > beta*{slack}"
            checked += 1

    mlpp = make_problem("mlp")
    radii = (1.5, 1.5)
    prod = product_max([(spectral(), radii[0]), (spectral(), radii[1])])
    mlp_cases = [
        OptimizerConfig(algorithm="S3CG_v1", norm=prod, n=n, beta=1.0,
                        gamma=StepsizeSchedule.constant(0.5), rho=1.0,
                        alpha=AlphaSchedule.constant(0.2), store_trajectory=False),
        OptimizerConfig(algorithm="ClippedScion_v1", norm=prod, n=n,
                        gamma=StepsizeSchedule.constant(0.5), rho=1.0,
                        alpha=AlphaSchedule.constant(0.2), store_trajectory=False),
        OptimizerConfig(algorithm="ClippedScion_v2", norm=prod, n=n,
                        gamma=StepsizeSchedule.constant(0.5), rho=1.0,
                        alpha=AlphaSchedule.constant(0.2), store_trajectory=False),
    ]
    for cfg in mlp_cases:
        for seed in seeds:
            x0 = mlpp.init(seed)
            pn = primal_norm(prod, x0)
            if pn > 0.9:
                x0 = scale(0.9 / pn, x0)
            rec = run(mlpp, cfg, seed, x_init=x0)
            worst = max(float(np.max(rec.param_norm)), primal_norm(prod, rec.x_final))
            if worst > slack:  # product primal norm <= 1 iff every block inside r_l
                return False, f"mlp {cfg.algorithm}: product norm {worst:.12g} > {slack}"
            checked += 1
    return True, f"{checked} runs x 10^4 steps stayed inside their balls (slack 1e-9)"


# ---------------------------------------------------------------------------
# Criterion 8: stochastic n^(-1/4) rate trend under theorem presets


def _mean_true_grad_norm(problem, rec) -> float:
    return float(np.mean([euclidean_norm(problem.grad(x)) for x in rec.iterates]))


def c08_rate_trend() -> Tuple[bool, str]:
    problem = make_problem("quadratic", dim=20, sigma=2.0)
    L0 = problem.constants.L0
    means = {}
    bar_means = {}
    for n in (256, 4096):
        preset = from_theorem("stoch_ggnc", L0=L0, L1=0.0, n=n)
        cfg = OptimizerConfig(algorithm="GGNC", norm=euclidean(), n=n,
                              gamma=StepsizeSchedule.constant(preset.gamma), rho=preset.rho,
                              alpha=preset.alpha, store_trajectory=True)
        vals, bars = [], []
        for seed in range(20):
            rec = run(problem, cfg, seed)
            vals.append(_mean_true_grad_norm(problem, rec))
            bars.append(euclidean_norm(problem.grad(rec.x_bar)))
        means[n] = float(np.mean(vals))
        bar_means[n] = float(np.mean(bars))
    ratio = means[4096] / means[256]
    detail = (f"E||grad f(x_bar)||: n=256 -> {means[256]:.4g}, n=4096 -> {means[4096]:.4g}, "
              f"ratio {ratio:.3f} (single-draw estimate ratio "
              f"{bar_means[4096] / bar_means[256]:.3f}); n^-1/4 predicts 0.5")
    return ratio <= 0.6, detail


# ---------------------------------------------------------------------------
# Criterion 9: estimator variance, frozen-point and horizon-dependent


def c09_estimator_variance() -> Tuple[bool, str]:
    sigma = 1.0
    dim = 20
    alpha = 0.1
    n_seeds, k_steps = 10_000, 150
    problem = make_problem("quadratic", dim=dim, sigma=sigma)
    x0 = problem.init(0)
    g_true = problem.grad(x0)

    # Frozen point: the momentum recurrence acts entrywise, so a (seeds, dim)
    # stacked block is exactly 10^4 independent runs of the estimator.
    gen = stream(90, "verify:frozen")
    g_mat = np.tile(g_true.blocks[0], (n_seeds, 1))
    state = MomentumState(ParamVector([np.zeros((n_seeds, dim))]))
    sched = AlphaSchedule.constant(alpha)
    d = None
    for k in range(1, k_steps + 1):
        noise = gen.standard_normal((n_seeds, dim)) * (sigma / math.sqrt(dim))
        d = momentum_update(state, ParamVector([g_mat + noise]), sched.at(k))
    lam = d.blocks[0] - g_mat
    empirical = float(np.mean(np.sum(lam * lam, axis=1)))
    target = alpha * sigma**2 / (2.0 - alpha)
    rel = abs(empirical - target) / target
    if rel > 0.10:
        return False, f"frozen-point EMA variance {empirical:.4g} vs {target:.4g} ({rel:.1%} off)"

    # Horizon-dependent bound with C fitted at the smallest horizon and the
    # max taken over the steady-state window k >= n/2 (estimator burn-in).
    seeds = range(300)
    maxima = {}
    for n in (64, 256, 1024):
        preset = from_theorem("stoch_ggnc", L0=problem.constants.L0, L1=0.0, n=n)
        cfg = OptimizerConfig(algorithm="GGNC", norm=euclidean(), n=n,
                              gamma=StepsizeSchedule.constant(preset.gamma), rho=preset.rho,
                              alpha=preset.alpha, store_trajectory=False)
        stats = diagnostics.estimator_error_stats(problem, cfg, list(seeds))
        maxima[n] = float(np.max(stats[n // 2 :]))
    C = max(0.0, math.sqrt(64.0) * maxima[64] / 2.0 - sigma**2)
    for n in (256, 1024):
        bound = 2.0 * (sigma**2 + C) / math.sqrt(n)
        if maxima[n] > bound * 1.05:
            return False, f"horizon bound failed at n={n}: {maxima[n]:.4g} > {bound:.4g} (C={C:.4g})"
    if not (maxima[64] > maxima[256] > maxima[1024]):
        return False, f"E||lambda||^2 not decreasing in n: {maxima}"
    return True, (f"frozen-point {rel:.2%} off closed form; horizon maxima "
                  f"{maxima[64]:.3g}/{maxima[256]:.3g}/{maxima[1024]:.3g}, fitted C={C:.3g}")


# ---------------------------------------------------------------------------
# Criterion 10: byte-identical CSV output for a repeated (config, seed)


def c10_determinism(tmp_root: Optional[str] = None) -> Tuple[bool, str]:
    import tempfile
    from pathlib import Path

    from .harness import parse_config

    configs = [
        """
        problem.name = quadratic
        problem.dim = 12
        problem.sigma = 1.0
        optimizer.algorithm = GGNC
        optimizer.norm = euclidean
        optimizer.gamma = 0.1
        optimizer.rho = 2.0
        optimizer.alpha_kind = constant
        optimizer.alpha = 0.5
        optimizer.horizon = 200
        run.seeds = 3,4
        """,
        """
        problem.name = mlp
        optimizer.algorithm = ClippedScion_v1
        optimizer.norm = product(spectral:2.0,spectral:2.0)
        optimizer.gamma = 0.25
        optimizer.rho = 1.0
        optimizer.alpha_kind = constant
        optimizer.alpha = 0.2
        optimizer.horizon = 150
        optimizer.init_scale = 0.2
        run.seeds = 7
        """,
    ]
    with tempfile.TemporaryDirectory(dir=tmp_root) as tmp:
        for idx, text in enumerate(configs):
            cfg = parse_config("\n".join(line.strip() for line in text.splitlines()))
            dir_a, dir_b = Path(tmp) / f"a{idx}", Path(tmp) / f"b{idx}"
            paths_a = run_experiment(cfg, dir_a)
            paths_b = run_experiment(cfg, dir_b)
            for pa, pb in zip(paths_a, paths_b):
                if pa.read_bytes() != pb.read_bytes():
                    return False, f"files differ between repeated runs: {pa.name}"
    return True, "repeated runs byte-identical (2 configs, trajectory + summary files)"


# ---------------------------------------------------------------------------
# Criterion 11: analytic gradients vs central finite differences


def c11_gradients() -> Tuple[bool, str]:
    worst = 0.0
    for problem in problems.catalog():
        gen = stream(110, f"verify:fd:{problem.name}")
        for _ in range(50):
            x = ParamVector([0.8 * gen.standard_normal(s) for s in problem.block_shapes])
            g = problem.grad(x)
            fd = finite_diff_grad(problem, x, h=1e-6)
            err = euclidean_norm(axpy(-1.0, fd, g)) / max(1.0, euclidean_norm(g))
            if err > 1e-5:
                return False, f"{problem.name}: finite-difference mismatch {err:.3e} > 1e-5"
            worst = max(worst, err)
    return True, f"5 problems x 50 points; worst relative error {worst:.2e}"


# ---------------------------------------------------------------------------
# Aggregate module invariants (beyond the numbered criteria)


def module_invariants() -> Tuple[bool, str]:
    gen = stream(200, "verify:invariants")
    # Parameter algebra: Cauchy-Schwarz, norm consistency, axpy identity.
    for _ in range(200):
        x = ParamVector([gen.standard_normal(6), gen.standard_normal((3, 2))])
        y = ParamVector([gen.standard_normal(6), gen.standard_normal((3, 2))])
        if abs(inner(x, x) - euclidean_norm(x) ** 2) > 1e-12 * max(1.0, inner(x, x)):
            return False, "inner(x,x) != ||x||^2"
        if inner(x, y) > euclidean_norm(x) * euclidean_norm(y) + 1e-12:
            return False, "Cauchy-Schwarz violated"
        if axpy(1.0, x, scale(0.0, x)) != x:
            return False, "axpy(1, x, 0) is not bitwise x"
    # Geometry: ball membership, lmo scale invariance, sharp homogeneity.
    norms = [euclidean(), max_norm(), spectral(),
             product_max([(euclidean(), 1.5), (max_norm(), 0.5)])]
    for norm in norms:
        for _ in range(100):
            if norm.kind == "spectral":
                d = ParamVector([gen.standard_normal((3, 4))])
            elif norm.kind == "product_max":
                d = ParamVector([gen.standard_normal(4), gen.standard_normal(5)])
            else:
                d = ParamVector([gen.standard_normal(7)])
            direction = lmo(norm, d)
            if primal_norm(norm, direction) > 1.0 + 1e-10:
                return False, f"{norm.kind}: lmo left the unit ball"
            a = float(gen.uniform(0.1, 5.0))
            if max_abs_diff(lmo(norm, scale(a, d)), direction) > 1e-10:
                return False, f"{norm.kind}: lmo not scale invariant"
            left = sharp(norm, scale(-a, d))
            right = scale(-a, sharp(norm, d))
            if max_abs_diff(left, right) > 1e-9 * max(1.0, dual_norm(norm, d) * a):
                return False, f"{norm.kind}: sharp not homogeneous"
    return True, "paramspace + geometry invariant sweeps passed"


def problem_oracles() -> Tuple[bool, str]:
    details = []
    for problem in problems.catalog():
        sig_sq = problem.constants.sigma_sq
        if problem.name in ("quadratic", "exp_family", "rosenbrock"):
            problem = make_problem(problem.name, sigma=1.0)
            sig_sq = 1.0
        gen = stream(300, f"verify:oracle:{problem.name}")
        x = problem.init(17)
        if problem.name == "mlp":
            x = scale(0.5, x)
        g_true = problem.grad(x)
        draws = 10_000
        acc = None
        dev_sq = 0.0
        for _ in range(draws):
            g = problem.stochastic_grad(x, gen)
            diff = axpy(-1.0, g_true, g)
            dev_sq += inner(diff, diff)
            acc = g if acc is None else axpy(1.0, g, acc)
        mean = scale(1.0 / draws, acc)
        err = euclidean_norm(axpy(-1.0, g_true, mean))
        se = math.sqrt(dev_sq / draws / draws)
        if err > 3.0 * se + 1e-12:
            return False, f"{problem.name}: oracle bias {err:.3e} > 3 SE ({se:.3e})"
        var = dev_sq / draws
        if sig_sq and var > sig_sq * (1.0 + 3.0 / math.sqrt(draws) + 0.05):
            return False, f"{problem.name}: variance {var:.4g} exceeds sigma^2 {sig_sq:.4g}"
        details.append(f"{problem.name} var {var:.3g}<=s2 {sig_sq:.3g}")
    return True, "unbiasedness within 3 SE, variance within bounds: " + "; ".join(details)


# ---------------------------------------------------------------------------
# Registry


CHECKS: List[Tuple[str, Callable[[], Tuple[bool, str]], Optional[float]]] = [
    ("C1 lmo brute-force equivalence + alignment", c01_lmo_oracles, 30.0),
    ("C2 duality identity sharp = -dual*lmo", c02_duality_identity, 10.0),
    ("C3 Euclidean GGNC == Clipped GD", c03_euclidean_reduction, None),
    ("C4 clipping/short-step bridge", c04_bridge, None),
    ("C5 deterministic descent (probe constants)", c05_descent, None),
    ("C6 theorem bound checks (one-sided)", c06_bounds, 300.0),
    ("C7 constraint preservation over 10^4 steps", c07_constraints, None),
    ("C8 stochastic n^-1/4 rate trend", c08_rate_trend, 600.0),
    ("C9 estimator variance (frozen + horizon)", c09_estimator_variance, 120.0),
    ("C10 byte-identical determinism", c10_determinism, None),
    ("C11 gradients vs finite differences", c11_gradients, None),
    ("M1 paramspace + geometry invariants", module_invariants, None),
    ("M2 stochastic oracle contracts", problem_oracles, None),
]


def run_checks(names: Optional[Sequence[str]] = None) -> List[CheckResult]:
    """Run all (or the named subset of) verification checks."""
    results = []
    for name, fn, budget in CHECKS:
        if names and not any(sel.lower() in name.lower() for sel in names):
            continue
        start = time.perf_counter()
        try:
            passed, detail = fn()
        except Exception as exc:  # a crash is a failure, not an abort
            passed, detail = False, f"raised {type(exc).__name__}: {exc}"
        elapsed = time.perf_counter() - start
        if passed and budget is not None and elapsed > budget:
            passed, detail = False, f"over runtime budget: {elapsed:.1f}s > {budget:.0f}s ({detail})"
        results.append(CheckResult(name=name, passed=passed, detail=detail, seconds=elapsed))
    return results


def format_result(result: CheckResult) -> str:
    status = "PASS" if result.passed else "FAIL"
    return f"[{status}] {result.name} ({result.seconds:.1f}s) - {result.detail}"
