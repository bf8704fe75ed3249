"""Norm geometries: linear minimization oracles, dual norms, sharp operators.

Every optimizer in the package consumes a norm through exactly four maps:

* ``lmo(norm, d)``        minimizer of <d, x> over the unit ball,
* ``dual_norm(norm, d)``  always computed as -<d, lmo(d)>,
* ``sharp(norm, d)``      -dual_norm(d) * lmo(d),
* ``primal_norm(norm, x)`` the norm itself (ball membership, short-step
  denominators).

Supported geometries: Euclidean and max-norm on vectors (matrices are treated
entrywise), the spectral norm on a single matrix block, and a product norm
that takes a max over per-block norms scaled by radii.  For the product norm
the lmo factorizes per block (each block picks up its radius) while the dual
norm sums radius-weighted per-block dual norms.

Tie-breaking: sign(0) = 0 in the max-norm lmo, and lmo(0) = 0 for every
atomic norm, so a zero direction produces a zero step instead of spurious
motion.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Tuple

import numpy as np

from .errors import NumericalError, StructuralError
from .paramspace import ParamVector, inner
from .rng import stream

__all__ = [
    "NormSpec",
    "SvdResult",
    "euclidean",
    "max_norm",
    "spectral",
    "product_max",
    "lmo",
    "dual_norm",
    "sharp",
    "primal_norm",
    "svd_reduced",
    "spectral_norm_power",
]

EUCLIDEAN = "euclidean"
MAX = "max"
SPECTRAL = "spectral"
PRODUCT_MAX = "product_max"

_ATOMIC = (EUCLIDEAN, MAX, SPECTRAL)

# Singular values below SVD_RANK_TOL * sigma_max are treated as zero.
SVD_RANK_TOL = 1e-12

POWER_TOL = 1e-10
POWER_MAX_ITERS = 1000


@dataclass(frozen=True)
class NormSpec:
    """Recursive norm description: an atomic kind, or a radius-scaled product."""

    kind: str
    children: Tuple[Tuple["NormSpec", float], ...] = field(default=())

    def __post_init__(self):
        if self.kind not in _ATOMIC + (PRODUCT_MAX,):
            raise StructuralError(f"unknown norm kind '{self.kind}'")
        if self.kind == PRODUCT_MAX:
            if not self.children:
                raise StructuralError("product norm needs at least one child")
            for child, radius in self.children:
                if child.kind == PRODUCT_MAX:
                    raise StructuralError("product norms do not nest")
                if not radius > 0:
                    raise StructuralError(f"product radius must be positive, got {radius}")
        elif self.children:
            raise StructuralError("atomic norms take no children")


def euclidean() -> NormSpec:
    return NormSpec(EUCLIDEAN)


def max_norm() -> NormSpec:
    return NormSpec(MAX)


def spectral() -> NormSpec:
    return NormSpec(SPECTRAL)


def product_max(children) -> NormSpec:
    """Product norm max_l (1/r_l)*norm_l over blocks, from (NormSpec, radius) pairs."""
    return NormSpec(PRODUCT_MAX, tuple((c, float(r)) for c, r in children))


@dataclass(frozen=True)
class SvdResult:
    """Reduced SVD: U (m x r), nonincreasing sigma (r,), V (n x r)."""

    U: np.ndarray
    sigma: np.ndarray
    V: np.ndarray

    @property
    def rank(self) -> int:
        return int(self.sigma.size)


def _check_norm_space(norm: NormSpec, x: ParamVector) -> None:
    if norm.kind == SPECTRAL:
        if len(x) != 1 or x.blocks[0].ndim != 2:
            raise StructuralError("spectral norm applies to a single matrix block")
    elif norm.kind == PRODUCT_MAX:
        if len(norm.children) != len(x):
            raise StructuralError(
                f"product norm has {len(norm.children)} children but the space has {len(x)} blocks"
            )
        for (child, _), block in zip(norm.children, x.blocks):
            if child.kind == SPECTRAL and block.ndim != 2:
                raise StructuralError("spectral child norm applies to matrix blocks only")


def svd_reduced(m: np.ndarray) -> SvdResult:
    """Reduced SVD with singular values below SVD_RANK_TOL * sigma_max dropped."""
    m = np.asarray(m, dtype=np.float64)
    if m.ndim != 2:
        raise StructuralError("svd_reduced expects a matrix")
    if not np.all(np.isfinite(m)):
        raise NumericalError("svd_reduced input has non-finite entries")
    try:
        U, s, Vt = np.linalg.svd(m, full_matrices=False)
    except np.linalg.LinAlgError as exc:  # pragma: no cover - LAPACK rarely fails here
        raise NumericalError(f"SVD did not converge: {exc}") from exc
    if s.size and s[0] > 0:
        keep = s > SVD_RANK_TOL * s[0]
    else:
        keep = np.zeros(s.shape, dtype=bool)
    return SvdResult(U=U[:, keep], sigma=s[keep], V=Vt[keep, :].T)


def _power_start(shape: Tuple[int, int]) -> np.ndarray:
    # Deterministic start vector keyed on the matrix shape only; no shared state.
    gen = stream(0x51D0_F00D, f"power-start:{shape[0]}x{shape[1]}")
    v = gen.standard_normal(shape[1])
    return v / np.linalg.norm(v)


def spectral_norm_power(m: np.ndarray) -> float:
    """Largest singular value via power iteration on the Gram matrix.

    Deterministic start vector derived from the matrix shape; tolerance
    POWER_TOL on successive estimates, hard cap POWER_MAX_ITERS iterations.
    """
    m = np.asarray(m, dtype=np.float64)
    if m.ndim != 2:
        raise StructuralError("spectral_norm_power expects a matrix")
    if not np.all(np.isfinite(m)):
        raise NumericalError("spectral_norm_power input has non-finite entries")
    if not m.any():
        return 0.0
    # Iterate on the smaller Gram side.
    work = m if m.shape[1] <= m.shape[0] else m.T
    v = _power_start(work.shape)
    sigma_prev = -1.0
    for _ in range(POWER_MAX_ITERS):
        w = work.T @ (work @ v)
        wn = np.linalg.norm(w)
        if wn == 0.0:
            # Start vector landed in the kernel; perturb deterministically.
            v = np.roll(v, 1) + 1.0 / work.shape[1]
            v /= np.linalg.norm(v)
            continue
        v = w / wn
        sigma = float(np.linalg.norm(work @ v))
        if abs(sigma - sigma_prev) <= POWER_TOL * max(1.0, sigma):
            return sigma
        sigma_prev = sigma
    raise NumericalError(
        f"power iteration did not converge within {POWER_MAX_ITERS} iterations"
    )


def _lmo_block(kind: str, d: np.ndarray) -> np.ndarray:
    if kind == EUCLIDEAN:
        n = np.linalg.norm(d)
        if n == 0.0:
            return np.zeros(d.shape)
        return -d / n
    if kind == MAX:
        return -np.sign(d)
    if kind == SPECTRAL:
        res = svd_reduced(d)
        if res.rank == 0:
            return np.zeros(d.shape)
        return -(res.U @ res.V.T)
    raise StructuralError(f"no lmo for norm kind '{kind}'")


def lmo(norm: NormSpec, d: ParamVector) -> ParamVector:
    """Minimizer of <d, x> over the unit ball of the norm.

    For the product norm, block l of the result is r_l times the child lmo
    applied to block l of d.
    """
    _check_norm_space(norm, d)
    if norm.kind == PRODUCT_MAX:
        blocks = [
            radius * _lmo_block(child.kind, block)
            for (child, radius), block in zip(norm.children, d.blocks)
        ]
        return ParamVector(blocks)
    if norm.kind == SPECTRAL:
        return ParamVector([_lmo_block(SPECTRAL, d.blocks[0])])
    # Euclidean treats all blocks as one concatenated vector; max-norm acts
    # entrywise so the blockwise form is already exact.
    if norm.kind == EUCLIDEAN:
        total = float(np.sqrt(sum(float(np.vdot(b, b)) for b in d.blocks)))
        if total == 0.0:
            return ParamVector([np.zeros(b.shape) for b in d.blocks])
        return ParamVector([-b / total for b in d.blocks])
    return ParamVector([_lmo_block(MAX, b) for b in d.blocks])


def dual_norm(norm: NormSpec, d: ParamVector) -> float:
    """-<d, lmo(d)>: the dual norm, computed through the lmo itself."""
    value = -inner(d, lmo(norm, d))
    # Roundoff can leave a tiny negative residue for near-zero directions.
    return max(value, 0.0)


def sharp(norm: NormSpec, d: ParamVector) -> ParamVector:
    """-dual_norm(d) * lmo(d); satisfies <d, sharp(d)> = dual_norm(d)**2."""
    direction = lmo(norm, d)
    nd = -inner(d, direction)
    return ParamVector([-nd * b for b in direction.blocks])


def _primal_block(kind: str, x: np.ndarray) -> float:
    if kind == EUCLIDEAN:
        return float(np.linalg.norm(x))
    if kind == MAX:
        return float(np.max(np.abs(x))) if x.size else 0.0
    if kind == SPECTRAL:
        return spectral_norm_power(x)
    raise StructuralError(f"no primal norm for kind '{kind}'")


def primal_norm(norm: NormSpec, x: ParamVector) -> float:
    """Value of the primal norm; zero iff x = 0."""
    _check_norm_space(norm, x)
    if norm.kind == PRODUCT_MAX:
        return max(
            _primal_block(child.kind, block) / radius
            for (child, radius), block in zip(norm.children, x.blocks)
        )
    if norm.kind == EUCLIDEAN:
        return float(np.sqrt(sum(float(np.vdot(b, b)) for b in x.blocks)))
    if norm.kind == MAX:
        return max(_primal_block(MAX, b) for b in x.blocks)
    return _primal_block(SPECTRAL, x.blocks[0])
