"""Norm-generic gradient clipping and short-step conditional gradient methods.

Core surfaces: parameter algebra (`paramspace`), norm geometries and oracles
(`geometry`), the momentum estimator (`estimator`), update rules and the run
loop (`optimizers`), the objective catalog (`problems`), metric and bound
checkers (`diagnostics`), and the experiment harness + CLI (`harness`, `cli`).
"""

from .errors import (
    ConfigError,
    InsufficientDataError,
    NonclipError,
    NumericalError,
    RunError,
    StructuralError,
)
from .estimator import AlphaSchedule, MomentumState, momentum_update
from .geometry import (
    NormSpec,
    SvdResult,
    dual_norm,
    euclidean,
    lmo,
    max_norm,
    primal_norm,
    product_max,
    sharp,
    spectral,
    spectral_norm_power,
    svd_reduced,
)
from .optimizers import (
    ALGORITHMS,
    OptimizerConfig,
    StepOutcome,
    StepsizeSchedule,
    baseline_step,
    clipped_scion_step,
    from_theorem,
    ggnc_step,
    run,
    s3cg_step,
    uclipped_scion_step,
)
from .paramspace import ParamVector, axpy, euclidean_norm, inner
from .problems import Problem, catalog, finite_diff_grad, make_problem
from .records import RunRecord

__version__ = "0.1.0"

__all__ = [
    "ALGORITHMS",
    "AlphaSchedule",
    "ConfigError",
    "InsufficientDataError",
    "MomentumState",
    "NonclipError",
    "NormSpec",
    "NumericalError",
    "OptimizerConfig",
    "ParamVector",
    "Problem",
    "RunError",
    "RunRecord",
    "StepOutcome",
    "StepsizeSchedule",
    "StructuralError",
    "SvdResult",
    "axpy",
    "baseline_step",
    "catalog",
    "clipped_scion_step",
    "dual_norm",
    "euclidean",
    "euclidean_norm",
    "finite_diff_grad",
    "from_theorem",
    "ggnc_step",
    "inner",
    "lmo",
    "make_problem",
    "max_norm",
    "momentum_update",
    "primal_norm",
    "product_max",
    "run",
    "s3cg_step",
    "sharp",
    "spectral",
    "spectral_norm_power",
    "svd_reduced",
    "uclipped_scion_step",
]
