"""Momentum-based stochastic gradient estimator.

The estimator is the convex combination d_k = alpha_k * g_k + (1 - alpha_k) *
d_{k-1} starting from d_0 = 0.  By default the first step uses alpha_1 = 1 so
d_1 is an actual gradient instead of one shrunk toward the zero start; the
literal fixed-alpha behavior is available by constructing the schedule with
first_step_full=False (the harness exposes this as paper_literal_momentum).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, StructuralError
from .paramspace import ParamVector, axpy, scale, zeros_like

__all__ = ["AlphaSchedule", "MomentumState", "momentum_update"]


@dataclass(frozen=True)
class AlphaSchedule:
    """Averaging-weight schedule: constant alpha, or the horizon rule 1/sqrt(n)."""

    kind: str
    value: float
    first_step_full: bool = True

    @staticmethod
    def constant(a: float, first_step_full: bool = True) -> "AlphaSchedule":
        if not (0.0 < a <= 1.0):
            raise ConfigError(f"alpha must be in (0, 1], got {a}")
        return AlphaSchedule("constant", float(a), first_step_full)

    @staticmethod
    def horizon(n: int, first_step_full: bool = True) -> "AlphaSchedule":
        if n < 1:
            raise ConfigError(f"horizon must be >= 1, got {n}")
        return AlphaSchedule("horizon", 1.0 / float(np.sqrt(n)), first_step_full)

    def at(self, k: int) -> float:
        """Alpha for 1-based iteration k."""
        if k < 1:
            raise ConfigError(f"iteration index must be >= 1, got {k}")
        if self.first_step_full and k == 1:
            return 1.0
        return self.value


class MomentumState:
    """Owns d_{k-1} for one run; not shared between runs."""

    def __init__(self, like: ParamVector):
        self.d_prev = zeros_like(like)
        self.k = 1

    def reset(self) -> None:
        self.d_prev = zeros_like(self.d_prev)
        self.k = 1


def momentum_update(state: MomentumState, g: ParamVector, alpha: float) -> ParamVector:
    """Return alpha*g + (1-alpha)*d_prev and advance the state."""
    if not (0.0 < alpha <= 1.0):
        raise ConfigError(f"alpha must be in (0, 1], got {alpha}")
    if g.shapes != state.d_prev.shapes:
        raise StructuralError(f"gradient shape {g.shapes} != state shape {state.d_prev.shapes}")
    d = axpy(alpha, g, scale(1.0 - alpha, state.d_prev))
    state.d_prev = d
    state.k += 1
    return d
