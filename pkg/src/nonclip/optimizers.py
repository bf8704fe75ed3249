"""Update rules and the run loop.

All methods move along directions produced by the norm's linear minimization
oracle.  The unconstrained family clips the dual gradient norm:

    x_{k+1} = x_k - gamma_k * eta_k * v_k,   v_k = -lmo(d_k),
    eta_k   = min(rho, <d_k, v_k>),

which interpolates steepest descent (small gradients) and the fixed-magnitude
conditional-gradient update (large gradients).  The constrained family takes
the clipped short step toward the ball vertex v_k = x_k - beta*lmo(d_k), with
two stepsize variants (exact primal-norm denominator, or the 4*beta^2 /
4 diameter bound).  The product-norm instantiations apply the same rules with
per-block oracles and radii.

Baselines: plain steepest descent through the sharp operator, the
fixed-magnitude lmo update, classical open-loop conditional gradient, and
Euclidean clipped gradient descent.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np

from .errors import ConfigError, NonclipError, RunError
from .estimator import AlphaSchedule, MomentumState, momentum_update
from .geometry import (
    EUCLIDEAN,
    PRODUCT_MAX,
    NormSpec,
    dual_norm,
    lmo,
    primal_norm,
    sharp,
)
from .geometry import _primal_block  # per-block norms for the product short step
from .paramspace import ParamVector, axpy, euclidean_norm, inner, scale
from .problems import Problem
from .records import RunRecord
from .rng import stream

__all__ = [
    "ALGORITHMS",
    "StepsizeSchedule",
    "OptimizerConfig",
    "StepOutcome",
    "ggnc_step",
    "s3cg_step",
    "uclipped_scion_step",
    "clipped_scion_step",
    "baseline_step",
    "run",
    "from_theorem",
    "TheoremPreset",
]

INF = math.inf

ALGORITHMS = (
    "GGNC",
    "uSCG",
    "SD",
    "CG_open_loop",
    "ClippedGD",
    "S3CG_v1",
    "S3CG_v2",
    "uClippedScion",
    "ClippedScion_v1",
    "ClippedScion_v2",
)

_NEEDS_BETA = {"S3CG_v1", "S3CG_v2", "CG_open_loop"}
_NEEDS_PRODUCT = {"uClippedScion", "ClippedScion_v1", "ClippedScion_v2"}
_CONSTRAINED = {"S3CG_v1", "S3CG_v2", "CG_open_loop", "ClippedScion_v1", "ClippedScion_v2"}

FEASIBILITY_SLACK = 1e-9


@dataclass(frozen=True)
class StepsizeSchedule:
    """Stepsize gamma_k: constant, linear decay, or constant-then-linear warmdown."""

    kind: str
    gamma: float
    warmdown_frac: float = 0.0

    @staticmethod
    def constant(gamma: float) -> "StepsizeSchedule":
        return StepsizeSchedule("constant", float(gamma))

    @staticmethod
    def linear_decay(gamma: float) -> "StepsizeSchedule":
        return StepsizeSchedule("linear_decay", float(gamma))

    @staticmethod
    def warmdown(gamma: float, frac: float) -> "StepsizeSchedule":
        if not (0.0 < frac <= 1.0):
            raise ConfigError(f"warmdown fraction must be in (0, 1], got {frac}")
        return StepsizeSchedule("warmdown", float(gamma), float(frac))

    def __post_init__(self):
        if self.kind not in ("constant", "linear_decay", "warmdown"):
            raise ConfigError(f"unknown stepsize schedule '{self.kind}'")
        if not self.gamma > 0:
            raise ConfigError(f"gamma must be positive, got {self.gamma}")

    def at(self, k: int, n: int) -> float:
        if self.kind == "constant":
            return self.gamma
        if self.kind == "linear_decay":
            return self.gamma * (1.0 - k / n)
        m = max(1, round(self.warmdown_frac * n))
        if k < n - m:
            return self.gamma
        return self.gamma * (n - k) / m


@dataclass(frozen=True)
class OptimizerConfig:
    """Algorithm choice plus every knob the run loop needs.

    rho = inf is the "never clip" sentinel.  store_trajectory = None resolves
    to True for horizons up to 1e5.  s3cg_bridge_mode is a test-only switch
    that replaces the short-step direction x - beta*lmo(d) by -beta*lmo(d),
    turning the constrained update into the clipping update.
    """

    algorithm: str
    norm: NormSpec
    n: int
    gamma: StepsizeSchedule
    rho: float = INF
    beta: Optional[float] = None
    alpha: AlphaSchedule = field(default_factory=lambda: AlphaSchedule.constant(1.0))
    deterministic: bool = False
    track_lambda: bool = False
    store_trajectory: Optional[bool] = None
    init_scale: float = 1.0
    s3cg_bridge_mode: bool = False

    def __post_init__(self):
        if self.algorithm not in ALGORITHMS:
            raise ConfigError(f"unknown algorithm '{self.algorithm}'", field="optimizer.algorithm")
        if self.n < 1:
            raise ConfigError(f"horizon must be >= 1, got {self.n}", field="optimizer.horizon")
        if not self.rho > 0:
            raise ConfigError(f"rho must be positive (inf allowed), got {self.rho}",
                              field="optimizer.rho")
        if self.algorithm in _NEEDS_BETA:
            if self.beta is None or not self.beta > 0:
                raise ConfigError(f"{self.algorithm} requires a positive beta",
                                  field="optimizer.beta")
        if self.algorithm in _NEEDS_PRODUCT and self.norm.kind != PRODUCT_MAX:
            raise ConfigError(f"{self.algorithm} requires a product norm", field="optimizer.norm")
        if self.algorithm == "ClippedGD" and self.norm.kind != EUCLIDEAN:
            raise ConfigError("ClippedGD is Euclidean-only", field="optimizer.norm")
        if self.s3cg_bridge_mode and self.algorithm not in ("S3CG_v1", "S3CG_v2"):
            raise ConfigError("bridge mode applies to S3CG only", field="optimizer")

    @property
    def constrained(self) -> bool:
        return self.algorithm in _CONSTRAINED

    def resolved_store(self) -> bool:
        if self.store_trajectory is None:
            return self.n <= 100_000
        return self.store_trajectory


@dataclass(frozen=True)
class StepOutcome:
    """One update: the new iterate plus the quantities worth recording."""

    x_next: ParamVector
    eta: float
    clipped: bool
    v: ParamVector
    dual: float
    wolfe: float = math.nan


def ggnc_step(x: ParamVector, d: ParamVector, gamma_k: float, rho: float,
              norm: NormSpec) -> StepOutcome:
    """Clipped dual-norm step: x - gamma*min(rho, ||d||_*)*v with v = -lmo(d)."""
    if not rho > 0:
        raise ConfigError(f"rho must be positive, got {rho}")
    v = scale(-1.0, lmo(norm, d))
    raw = inner(d, v)
    eta = min(rho, raw)
    return StepOutcome(
        x_next=axpy(-gamma_k * eta, v, x),
        eta=eta,
        clipped=bool(raw >= rho),
        v=v,
        dual=raw,
    )


def _short_step_eta(raw: float, denom: float, rho: float) -> tuple:
    # v = 0 makes both the numerator and (variant-1) denominator vanish;
    # standing still is the limit of the formula.
    if denom == 0.0:
        return 0.0, False
    ratio = raw / denom
    if ratio <= 0.0:
        return 0.0, False
    return min(rho, ratio), bool(ratio >= rho)


def s3cg_step(x: ParamVector, d: ParamVector, gamma_k: float, rho: float, beta: float,
              norm: NormSpec, variant: int, bridge_mode: bool = False) -> StepOutcome:
    """Clipped short step toward the ball vertex; variant 1 divides by ||v||^2,
    variant 2 by the diameter bound 4*beta^2."""
    if variant not in (1, 2):
        raise ConfigError(f"variant must be 1 or 2, got {variant}")
    direction = lmo(norm, d)
    if bridge_mode:
        v = scale(-beta, direction)
    else:
        v = axpy(-beta, direction, x)
    raw = inner(d, v)
    if variant == 1:
        denom = primal_norm(norm, v) ** 2
    else:
        denom = 4.0 * beta * beta
    eta, clipped = _short_step_eta(raw, denom, rho)
    if gamma_k * eta > 1.0:
        raise ConfigError(
            f"gamma_k*eta_k = {gamma_k * eta:.6g} > 1 breaks the simplicial combination; "
            f"lower gamma or rho (gamma_k={gamma_k:.6g}, eta_k={eta:.6g})"
        )
    return StepOutcome(
        x_next=axpy(-gamma_k * eta, v, x),
        eta=eta,
        clipped=clipped,
        v=v,
        dual=-inner(d, direction),
        wolfe=raw if not bridge_mode else math.nan,
    )


def uclipped_scion_step(x: ParamVector, d: ParamVector, gamma_k: float, rho: float,
                        norm: NormSpec) -> StepOutcome:
    """Per-block radius-scaled clipping update; the product-norm form of ggnc_step."""
    if norm.kind != PRODUCT_MAX:
        raise ConfigError("uClippedScion requires a product norm")
    return ggnc_step(x, d, gamma_k, rho, norm)


def clipped_scion_step(x: ParamVector, d: ParamVector, gamma_k: float, rho: float,
                       norm: NormSpec, variant: int) -> StepOutcome:
    """Per-block constrained short step; variant 1 divides by max_l ||v_l||^2,
    variant 2 by the literal constant 4."""
    if norm.kind != PRODUCT_MAX:
        raise ConfigError("ClippedScion requires a product norm")
    if variant not in (1, 2):
        raise ConfigError(f"variant must be 1 or 2, got {variant}")
    direction = lmo(norm, d)  # block l is r_l * lmo_l(d_l)
    v = axpy(-1.0, direction, x)
    raw = inner(d, v)
    if variant == 1:
        denom = max(
            _primal_block(child.kind, block) ** 2
            for (child, _), block in zip(norm.children, v.blocks)
        )
    else:
        denom = 4.0
    eta, clipped = _short_step_eta(raw, denom, rho)
    if gamma_k * eta > 1.0:
        raise ConfigError(
            f"gamma_k*eta_k = {gamma_k * eta:.6g} > 1 breaks the simplicial combination; "
            f"lower gamma or rho (gamma_k={gamma_k:.6g}, eta_k={eta:.6g})"
        )
    return StepOutcome(
        x_next=axpy(-gamma_k * eta, v, x),
        eta=eta,
        clipped=clipped,
        v=v,
        dual=-inner(d, direction),
        wolfe=raw,
    )


def baseline_step(kind: str, x: ParamVector, d: ParamVector, gamma_k: float,
                  rho: float, beta: Optional[float], norm: NormSpec, k: int) -> StepOutcome:
    """SD, uSCG, open-loop CG, and Euclidean ClippedGD updates."""
    if kind == "SD":
        s = sharp(norm, d)
        nd = dual_norm(norm, d)
        return StepOutcome(
            x_next=axpy(-gamma_k, s, x), eta=nd, clipped=False,
            v=scale(-1.0, lmo(norm, d)), dual=nd,
        )
    if kind == "uSCG":
        direction = lmo(norm, d)
        # Always moves by gamma*rho in the primal norm: the permanently
        # clipped branch, hence eta = rho.
        return StepOutcome(
            x_next=axpy(gamma_k * rho, direction, x), eta=rho, clipped=True,
            v=scale(-1.0, direction), dual=-inner(d, direction),
        )
    if kind == "CG_open_loop":
        # Classical open-loop stepsize 2/(k+2) with 0-based k; our loop is
        # 1-based, so the first step uses exactly 1.
        gamma_open = 2.0 / (k + 1.0)
        direction = lmo(norm, d)
        v = axpy(-beta, direction, x)
        return StepOutcome(
            x_next=axpy(-gamma_open, v, x), eta=1.0, clipped=False,
            v=v, dual=-inner(d, direction), wolfe=inner(d, v),
        )
    if kind == "ClippedGD":
        gn = euclidean_norm(d)
        tau = min(1.0, rho / gn) if gn > 0 else 1.0
        v = scale(1.0 / gn, d) if gn > 0 else scale(0.0, d)
        return StepOutcome(
            x_next=axpy(-gamma_k * tau, d, x), eta=min(rho, gn),
            clipped=bool(gn >= rho), v=v, dual=gn,
        )
    raise ConfigError(f"unknown baseline '{kind}'")


def _dispatch(config: OptimizerConfig, x: ParamVector, d: ParamVector,
              gamma_k: float, k: int) -> StepOutcome:
    algo = config.algorithm
    if algo == "GGNC":
        return ggnc_step(x, d, gamma_k, config.rho, config.norm)
    if algo == "uClippedScion":
        return uclipped_scion_step(x, d, gamma_k, config.rho, config.norm)
    if algo in ("S3CG_v1", "S3CG_v2"):
        return s3cg_step(x, d, gamma_k, config.rho, config.beta, config.norm,
                         variant=1 if algo.endswith("1") else 2,
                         bridge_mode=config.s3cg_bridge_mode)
    if algo in ("ClippedScion_v1", "ClippedScion_v2"):
        return clipped_scion_step(x, d, gamma_k, config.rho, config.norm,
                                  variant=1 if algo.endswith("1") else 2)
    return baseline_step(algo, x, d, gamma_k, config.rho, config.beta, config.norm, k)


def _check_feasible_start(config: OptimizerConfig, x: ParamVector) -> None:
    if config.algorithm in _NEEDS_BETA | _NEEDS_PRODUCT and config.constrained:
        bound = config.beta if config.algorithm in _NEEDS_BETA else 1.0
        pn = primal_norm(config.norm, x)
        if pn > bound * (1.0 + FEASIBILITY_SLACK):
            raise ConfigError(
                f"infeasible start: primal norm {pn:.6g} exceeds the constraint {bound:.6g}; "
                "shrink init_scale or enlarge the radius"
            )


def run(problem: Problem, config: OptimizerConfig, seed: int,
        x_init: Optional[ParamVector] = None) -> RunRecord:
    """Execute n steps and return the trajectory record.

    Noise and the uniform output-iterate draw come from independent named
    streams of the run seed, so a (config, seed) pair is bit-reproducible.
    """
    if tuple(problem.block_shapes) != tuple(
        x_init.shapes if x_init is not None else problem.block_shapes
    ):
        raise ConfigError("x_init does not match the problem's parameter space")
    x = x_init if x_init is not None else scale(config.init_scale, problem.init(seed))
    _check_feasible_start(config, x)

    n = config.n
    noise_rng = stream(seed, "noise")
    # Drawn up front so the output iterate exists even without a stored trajectory.
    x_bar_index = int(stream(seed, "xbar").integers(1, n + 1))

    store = config.resolved_store()
    state = MomentumState(x)
    cols = {
        name: np.empty(n)
        for name in ("f", "dual_norm", "eta", "gamma", "wolfe_gap", "param_norm", "lambda_sq")
    }
    clipped = np.zeros(n, dtype=bool)
    iterates = [] if store else None
    x_bar = None

    for k in range(1, n + 1):
        try:
            gamma_k = config.gamma.at(k, n)
            g = problem.grad(x) if config.deterministic else problem.stochastic_grad(x, noise_rng)
            d = momentum_update(state, g, config.alpha.at(k))
            outcome = _dispatch(config, x, d, gamma_k, k)
            i = k - 1
            cols["f"][i] = problem.eval(x)
            cols["dual_norm"][i] = outcome.dual
            cols["eta"][i] = outcome.eta
            cols["gamma"][i] = gamma_k
            cols["wolfe_gap"][i] = outcome.wolfe
            cols["param_norm"][i] = primal_norm(config.norm, x)
            if config.track_lambda:
                lam = axpy(-1.0, problem.grad(x), d)
                cols["lambda_sq"][i] = inner(lam, lam)
            else:
                cols["lambda_sq"][i] = math.nan
            clipped[i] = outcome.clipped
        except NonclipError as exc:
            raise RunError(k, exc) from exc
        if store:
            iterates.append(x)
        if k == x_bar_index:
            x_bar = x
        x = outcome.x_next

    constants = problem.constants
    delta = None if constants.f_star is None else float(cols["f"][0] - constants.f_star)
    return RunRecord(
        problem=problem.name,
        algorithm=config.algorithm,
        seed=seed,
        n=n,
        k=np.arange(1, n + 1),
        f=cols["f"],
        dual_norm=cols["dual_norm"],
        eta=cols["eta"],
        clipped=clipped,
        gamma=cols["gamma"],
        wolfe_gap=cols["wolfe_gap"],
        param_norm=cols["param_norm"],
        lambda_sq=cols["lambda_sq"],
        x_bar_index=x_bar_index,
        x_bar=x_bar,
        x_final=x,
        f_bar=float(cols["f"][x_bar_index - 1]),
        f_final=problem.eval(x),
        min_dual_norm=float(np.min(cols["dual_norm"])),
        delta=delta,
        iterates=iterates,
    )


@dataclass(frozen=True)
class TheoremPreset:
    gamma: float
    rho: float
    alpha: AlphaSchedule


def from_theorem(kind: str, *, L0: Optional[float] = None, L1: Optional[float] = None,
                 L: Optional[float] = None, n: int = 1) -> TheoremPreset:
    """(gamma, rho, alpha) filled per the convergence theorems.

    det_ggnc:   gamma = 1/L0,            rho = L0/L1 (inf when L1 = 0)
    stoch_ggnc: gamma = 1/(sqrt(n) L0),  rho = L0/(2 n^{1/4} L1), alpha = 1/sqrt(n)
    stoch_s3cg: gamma = 1/(L sqrt(n)),   rho = 1/n^{1/4},         alpha = 1/sqrt(n)
    """
    if kind == "det_ggnc":
        if L0 is None or L1 is None or L0 <= 0:
            raise ConfigError("det_ggnc preset needs L0 > 0 and L1 >= 0")
        rho = INF if L1 == 0 else L0 / L1
        return TheoremPreset(gamma=1.0 / L0, rho=rho, alpha=AlphaSchedule.constant(1.0))
    if kind == "stoch_ggnc":
        if L0 is None or L1 is None or L0 <= 0:
            raise ConfigError("stoch_ggnc preset needs L0 > 0 and L1 >= 0")
        gamma = 1.0 / (math.sqrt(n) * L0)
        rho = INF if L1 == 0 else L0 / (2.0 * n**0.25 * L1)
        return TheoremPreset(gamma=gamma, rho=rho, alpha=AlphaSchedule.horizon(n))
    if kind == "stoch_s3cg":
        if L is None or L <= 0:
            raise ConfigError("stoch_s3cg preset needs L > 0")
        return TheoremPreset(gamma=1.0 / (L * math.sqrt(n)), rho=n**-0.25,
                             alpha=AlphaSchedule.horizon(n))
    raise ConfigError(f"unknown theorem preset '{kind}'")
