"""Metric analysis and non-asymptotic theorem-bound checkers.

Everything here consumes immutable run records (plus the problem for true
gradients) and never influences optimization.  Bound checks are one-sided:
the theorems are non-asymptotic, so LHS > RHS at the stated tolerance is a
hard failure, not a statistical event.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import List, Optional, Sequence, Tuple

import numpy as np

from .errors import ConfigError, InsufficientDataError
from .geometry import NormSpec, dual_norm, primal_norm
from .optimizers import OptimizerConfig, run
from .paramspace import ParamVector, axpy, inner, scale
from .problems import Problem
from .records import RunRecord
from .rng import stream

__all__ = [
    "wolfe_gap",
    "SmoothnessSample",
    "ProbeResult",
    "smoothness_probe",
    "generate_probe_pairs",
    "probe_constants",
    "check_descent",
    "BoundReport",
    "check_bound_det_ggnc",
    "check_bound_det_uscg",
    "check_bound_uscg_neighborhood",
    "check_bound_constrained_wolfe",
    "estimator_error_stats",
]

DESCENT_SLACK = 1e-12
BOUND_SLACK = 1e-9


def wolfe_gap(g: ParamVector, x: ParamVector, beta: float, norm: NormSpec) -> float:
    """max_{u in beta*ball} <g, x-u> in closed form: <g, x> + beta*||g||_*.

    Signed value; nonnegative whenever x is feasible.  Zero at g = 0
    certifies a critical point of the constrained problem.
    """
    return inner(g, x) + beta * dual_norm(norm, g)


@dataclass(frozen=True)
class SmoothnessSample:
    """One probe pair: gradient-difference ratio, gradient size, separation."""

    ratio: float
    gnorm: float
    sep: float


@dataclass(frozen=True)
class ProbeResult:
    samples: Tuple[SmoothnessSample, ...]
    L0_hat: float
    L1_hat: float
    residual: float


def _nnls_2var(gnorms: np.ndarray, ratios: np.ndarray) -> Tuple[float, float, float]:
    """Nonnegative least squares of ratio against (1, gnorm); exact for 2 vars."""

    def sse(l0, l1):
        r = ratios - l0 - l1 * gnorms
        return float(np.dot(r, r))

    candidates = []
    n = len(gnorms)
    sg, sg2 = float(np.sum(gnorms)), float(np.dot(gnorms, gnorms))
    sr, sgr = float(np.sum(ratios)), float(np.dot(gnorms, ratios))
    det = n * sg2 - sg * sg
    if det > 1e-12 * max(1.0, n * sg2):
        l0 = (sr * sg2 - sg * sgr) / det
        l1 = (n * sgr - sg * sr) / det
        if l0 >= 0.0 and l1 >= 0.0:
            candidates.append((l0, l1))
    # Boundary solutions: one coefficient pinned at zero.
    candidates.append((max(0.0, sr / n), 0.0))
    if sg2 > 0:
        candidates.append((0.0, max(0.0, sgr / sg2)))
    l0, l1 = min(candidates, key=lambda c: sse(*c))
    return l0, l1, math.sqrt(sse(l0, l1) / n)


def smoothness_probe(problem: Problem, pairs: Sequence[Tuple[ParamVector, ParamVector]],
                     norm: NormSpec) -> ProbeResult:
    """Fit ||grad f(x) - grad f(y)||_* / ||x - y|| against (1, ||grad f(x)||_*).

    Callers are responsible for the separation filter (sep <= 1/L1 hypothesis);
    see generate_probe_pairs.  Fewer than 10 usable pairs is an error.
    """
    samples = []
    for x, y in pairs:
        sep = primal_norm(norm, axpy(-1.0, y, x))
        if sep == 0.0:
            continue
        gx = problem.grad(x)
        diff = dual_norm(norm, axpy(-1.0, problem.grad(y), gx))
        samples.append(SmoothnessSample(ratio=diff / sep, gnorm=dual_norm(norm, gx), sep=sep))
    if len(samples) < 10:
        raise InsufficientDataError(
            f"smoothness probe needs at least 10 valid pairs, got {len(samples)}"
        )
    gnorms = np.array([s.gnorm for s in samples])
    ratios = np.array([s.ratio for s in samples])
    l0, l1, resid = _nnls_2var(gnorms, ratios)
    return ProbeResult(samples=tuple(samples), L0_hat=l0, L1_hat=l1, residual=resid)


def generate_probe_pairs(problem: Problem, norm: NormSpec, seed: int,
                         trajectory: Optional[Sequence[ParamVector]] = None,
                         n_random: int = 60, scales: Sequence[float] = (1e-4, 1e-3, 1e-2),
                         max_sep: Optional[float] = None) -> List[Tuple[ParamVector, ParamVector]]:
    """Probe pairs: consecutive trajectory iterates plus random perturbations.

    Trajectory-local pairs are what the descent theory actually exercises;
    the random pairs add coverage at several separation scales.  max_sep
    implements the 1/L1 separation proviso when a hypothesis is available.
    """
    gen = stream(seed, f"probe:{problem.name}")
    pairs: List[Tuple[ParamVector, ParamVector]] = []
    if trajectory is not None:
        for a, b in zip(trajectory[:-1], trajectory[1:]):
            pairs.append((a, b))
    anchors = [problem.init(int(gen.integers(0, 2**31))) for _ in range(max(1, n_random // len(scales)))]
    for anchor in anchors:
        for s in scales:
            noise = ParamVector([gen.standard_normal(b.shape) for b in anchor.blocks])
            step = scale(s / max(primal_norm(norm, noise), 1e-30), noise)
            pairs.append((anchor, axpy(1.0, step, anchor)))
    if max_sep is not None:
        pairs = [p for p in pairs
                 if 0.0 < primal_norm(norm, axpy(-1.0, p[1], p[0])) <= max_sep]
    return pairs


def probe_constants(problem: Problem, norm: NormSpec, seed: int,
                    trajectory: Optional[Sequence[ParamVector]] = None) -> ProbeResult:
    """Two-pass probe: fit once, then refit with the 1/L1_hat separation filter."""
    pairs = generate_probe_pairs(problem, norm, seed, trajectory=trajectory)
    first = smoothness_probe(problem, pairs, norm)
    if first.L1_hat <= 0.0:
        return first
    filtered = [p for p in pairs
                if primal_norm(norm, axpy(-1.0, p[1], p[0])) <= 1.0 / first.L1_hat]
    if len(filtered) < 10:
        return first
    return smoothness_probe(problem, filtered, norm)


def check_descent(record: RunRecord) -> List[int]:
    """Iterations k where f(x^{k+1}) > f(x^k) beyond roundoff slack."""
    f = record.f
    out = []
    for i in range(len(f) - 1):
        if f[i + 1] > f[i] + DESCENT_SLACK * max(1.0, abs(f[i])):
            out.append(int(record.k[i]))
    return out


@dataclass(frozen=True)
class BoundReport:
    name: str
    lhs: float
    rhs: float
    passed: bool
    detail: str = ""


def _require_trajectory(record: RunRecord) -> Sequence[ParamVector]:
    if record.iterates is None:
        raise ConfigError("bound checks need store_trajectory on (true gradients are "
                          "recomputed at recorded iterates)")
    return record.iterates


def _require_delta(record: RunRecord) -> float:
    if record.delta is None:
        raise ConfigError(f"problem '{record.problem}' has no known f_star; cannot evaluate the bound")
    return record.delta


def _min_true_dual(record: RunRecord, problem: Problem, norm: NormSpec) -> float:
    iterates = _require_trajectory(record)
    return min(dual_norm(norm, problem.grad(x)) for x in iterates)


def check_bound_det_ggnc(record: RunRecord, problem: Problem, norm: NormSpec,
                         gamma: float, rho: float) -> BoundReport:
    """min_k ||grad f(x^k)||_* <= sqrt(Delta/(gamma n)) + 2 Delta/(gamma rho n)."""
    delta = _require_delta(record)
    n = record.n
    lhs = _min_true_dual(record, problem, norm)
    rhs = math.sqrt(delta / (gamma * n))
    if math.isfinite(rho):
        rhs += 2.0 * delta / (gamma * rho * n)
    return BoundReport("det_ggnc", lhs, rhs, lhs <= rhs * (1.0 + BOUND_SLACK),
                       detail=f"n={n} gamma={gamma:.4g} rho={rho:.4g}")


def check_bound_det_uscg(record: RunRecord, problem: Problem, norm: NormSpec,
                         L0: float, gamma: float, rho: float) -> BoundReport:
    """min_k ||grad f(x^k)||_* <= 2 Delta/(gamma rho n) + 2 L0 gamma rho."""
    delta = _require_delta(record)
    lhs = _min_true_dual(record, problem, norm)
    rhs = 2.0 * delta / (gamma * rho * record.n) + 2.0 * L0 * gamma * rho
    return BoundReport("det_uscg", lhs, rhs, lhs <= rhs * (1.0 + BOUND_SLACK),
                       detail=f"n={record.n} gamma*rho={gamma * rho:.4g}")


def check_bound_uscg_neighborhood(record: RunRecord, problem: Problem, norm: NormSpec,
                                  L: float, gamma: float, rho: float) -> BoundReport:
    """min_k ||grad f(x^k)||_* <= Delta/(gamma rho n) + L gamma rho / 2."""
    delta = _require_delta(record)
    lhs = _min_true_dual(record, problem, norm)
    rhs = delta / (gamma * rho * record.n) + L * gamma * rho / 2.0
    return BoundReport("uscg_neighborhood", lhs, rhs, lhs <= rhs * (1.0 + BOUND_SLACK),
                       detail=f"n={record.n} gamma*rho={gamma * rho:.4g}")


def check_bound_constrained_wolfe(record: RunRecord, problem: Problem, norm: NormSpec,
                                  beta: float, gamma: float, rho: float) -> BoundReport:
    """min_k wolfe_gap(x^k) <= 2 beta sqrt(Delta/(gamma n)) + 2 Delta/(gamma rho n)."""
    delta = _require_delta(record)
    iterates = _require_trajectory(record)
    lhs = min(wolfe_gap(problem.grad(x), x, beta, norm) for x in iterates)
    n = record.n
    rhs = 2.0 * beta * math.sqrt(delta / (gamma * n)) + 2.0 * delta / (gamma * rho * n)
    return BoundReport("constrained_wolfe", lhs, rhs, lhs <= rhs * (1.0 + BOUND_SLACK),
                       detail=f"n={n} beta={beta:.4g}")


def estimator_error_stats(problem: Problem, config: OptimizerConfig,
                          seeds: Sequence[int]) -> np.ndarray:
    """Per-iteration mean of ||lambda^k||_2^2 across seeds (lambda tracking forced on)."""
    if not seeds:
        raise ConfigError("estimator_error_stats needs at least one seed")
    cfg = replace(config, track_lambda=True)
    total = np.zeros(cfg.n)
    for s in seeds:
        total += run(problem, cfg, int(s)).lambda_sq
    return total / len(seeds)
