"""Per-run metric records shared by the optimizer loop and the diagnostics."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import List, Optional

import numpy as np

from .paramspace import ParamVector

__all__ = ["RunRecord"]

CSV_COLUMNS = ("k", "f", "dual_norm", "eta", "clipped", "gamma_k", "wolfe_gap", "param_norm", "lambda_sq")


@dataclass
class RunRecord:
    """Trajectory metrics for one (config, seed) run.

    Row k holds the quantities of iteration k: f and the norms are evaluated
    at the pre-update iterate x^k, eta/clipped/gamma describe the step taken
    from it.  wolfe_gap is populated for constrained algorithms and lambda_sq
    when the run tracked the estimator error against the true gradient.
    """

    problem: str
    algorithm: str
    seed: int
    n: int
    k: np.ndarray
    f: np.ndarray
    dual_norm: np.ndarray
    eta: np.ndarray
    clipped: np.ndarray
    gamma: np.ndarray
    wolfe_gap: np.ndarray
    param_norm: np.ndarray
    lambda_sq: np.ndarray
    x_bar_index: int
    x_bar: ParamVector
    x_final: ParamVector
    f_bar: float
    f_final: float
    min_dual_norm: float
    delta: Optional[float] = None
    iterates: Optional[List[ParamVector]] = field(default=None, repr=False)

    def __post_init__(self):
        if len(self.k) != self.n:
            raise ValueError(f"row count {len(self.k)} != horizon {self.n}")
        if not np.all(np.diff(self.k) > 0):
            raise ValueError("iteration indices must be strictly increasing")

    def rows(self):
        """Yield per-iteration rows as dicts keyed by the CSV column names."""
        for i in range(self.n):
            yield {
                "k": int(self.k[i]),
                "f": float(self.f[i]),
                "dual_norm": float(self.dual_norm[i]),
                "eta": float(self.eta[i]),
                "clipped": bool(self.clipped[i]),
                "gamma_k": float(self.gamma[i]),
                "wolfe_gap": float(self.wolfe_gap[i]),
                "param_norm": float(self.param_norm[i]),
                "lambda_sq": float(self.lambda_sq[i]),
            }
