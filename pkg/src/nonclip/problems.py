"""Desk-scale objective catalog with exact gradients and stochastic oracles.

Five problem families:

* ``quadratic``   0.5*x'Ax - b'x with diagonal A > 0 (analytic minimum),
* ``exp_family``  sum_i exp(c_i * x_i) (gradient-dependent curvature),
* ``logistic``    logistic regression on seeded synthetic data,
* ``mlp``         two-layer tanh network on seeded regression data, with
                  hand-derived matrix gradients (no autodiff anywhere),
* ``rosenbrock``  the classic non-convex sanity check.

Stochastic oracles add seeded Gaussian noise (quadratic, exp_family,
rosenbrock) or sample minibatches with replacement (logistic, mlp).  All data
is generated from named Philox streams keyed by ``data_seed`` so a problem is
bit-reproducible given its parameters; the canonical starting point comes
from the run seed instead.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Callable, Dict, Optional, Tuple

import numpy as np

from .errors import ConfigError, NumericalError
from .paramspace import ParamVector, from_flat, to_flat
from .rng import stream

__all__ = [
    "Problem",
    "ProblemConstants",
    "catalog",
    "make_problem",
    "finite_diff_grad",
    "PROBLEM_FACTORIES",
]


@dataclass(frozen=True)
class ProblemConstants:
    """Known constants; None means unknown (checkers requiring it must skip)."""

    L: Optional[float] = None
    L0: Optional[float] = None
    L1: Optional[float] = None
    sigma_sq: Optional[float] = None
    f_star: Optional[float] = None


@dataclass(frozen=True)
class Problem:
    name: str
    block_shapes: Tuple[tuple, ...]
    eval_fn: Callable[[ParamVector], float]
    grad_fn: Callable[[ParamVector], ParamVector]
    stochastic_grad_fn: Callable[[ParamVector, np.random.Generator], ParamVector]
    init_scale: float = 1.0
    constants: ProblemConstants = ProblemConstants()

    def eval(self, x: ParamVector) -> float:
        value = float(self.eval_fn(x))
        if not np.isfinite(value):
            raise NumericalError(f"{self.name}: objective evaluated to a non-finite value")
        return value

    def grad(self, x: ParamVector) -> ParamVector:
        return self.grad_fn(x)

    def stochastic_grad(self, x: ParamVector, rng: np.random.Generator) -> ParamVector:
        return self.stochastic_grad_fn(x, rng)

    def init(self, seed: int) -> ParamVector:
        """Canonical x^1: deterministic given (problem name, seed)."""
        gen = stream(seed, f"init:{self.name}")
        return ParamVector([self.init_scale * gen.standard_normal(s) for s in self.block_shapes])

    def with_constants(self, **kwargs) -> "Problem":
        return replace(self, constants=replace(self.constants, **kwargs))


def _additive_noise_oracle(grad_fn, shapes, sigma: float):
    total = sum(int(np.prod(s)) for s in shapes)
    per_coord = sigma / np.sqrt(total)

    def oracle(x: ParamVector, rng: np.random.Generator) -> ParamVector:
        g = grad_fn(x)
        if sigma == 0.0:
            return g
        return ParamVector([b + per_coord * rng.standard_normal(b.shape) for b in g.blocks])

    return oracle


def quadratic(dim: int = 20, spectrum: Tuple[float, float] = (0.8, 2.0), sigma: float = 0.0,
              data_seed: int = 0) -> Problem:
    """0.5*x'Ax - b'x with diagonal A, eigenvalues log-uniform in `spectrum`."""
    lo, hi = spectrum
    if not (0 < lo <= hi):
        raise ConfigError(f"quadratic spectrum must satisfy 0 < lo <= hi, got {spectrum}")
    gen = stream(data_seed, "problem:quadratic:data")
    a = np.exp(gen.uniform(np.log(lo), np.log(hi), size=dim))
    a[int(np.argmax(a))] = hi  # pin the extremes so L is exactly hi
    a[int(np.argmin(a))] = lo
    b = gen.standard_normal(dim)

    def f(x: ParamVector) -> float:
        v = x.blocks[0]
        return float(0.5 * np.dot(a * v, v) - np.dot(b, v))

    def g(x: ParamVector) -> ParamVector:
        return ParamVector([a * x.blocks[0] - b])

    f_star = float(-0.5 * np.dot(b * b, 1.0 / a))
    shapes = ((dim,),)
    return Problem(
        name="quadratic",
        block_shapes=shapes,
        eval_fn=f,
        grad_fn=g,
        stochastic_grad_fn=_additive_noise_oracle(g, shapes, sigma),
        constants=ProblemConstants(L=float(hi), L0=float(hi), L1=0.0,
                                   sigma_sq=float(sigma**2), f_star=f_star),
    )


def exp_family(dim: int = 10, c_range: Tuple[float, float] = (0.5, 1.5), sigma: float = 0.0,
               data_seed: int = 0) -> Problem:
    """sum_i exp(c_i x_i); curvature grows with the gradient, so no global L.

    The infimum is 0 (unattained).  L0/L1 are left unknown and estimated by
    the smoothness probe rather than asserted analytically.
    """
    lo, hi = c_range
    if not (0 < lo <= hi):
        raise ConfigError(f"exp_family c_range must satisfy 0 < lo <= hi, got {c_range}")
    gen = stream(data_seed, "problem:exp_family:data")
    c = gen.uniform(lo, hi, size=dim)

    def f(x: ParamVector) -> float:
        return float(np.sum(np.exp(c * x.blocks[0])))

    def g(x: ParamVector) -> ParamVector:
        return ParamVector([c * np.exp(c * x.blocks[0])])

    shapes = ((dim,),)
    return Problem(
        name="exp_family",
        block_shapes=shapes,
        eval_fn=f,
        grad_fn=g,
        stochastic_grad_fn=_additive_noise_oracle(g, shapes, sigma),
        constants=ProblemConstants(sigma_sq=float(sigma**2), f_star=0.0),
    )


def _logistic_f_star(X: np.ndarray, y: np.ndarray) -> float:
    """Minimum value via damped Newton, driven to ~1e-14 gradient norm."""
    m, p = X.shape
    w = np.zeros(p)

    def value(w):
        return float(np.mean(np.logaddexp(0.0, -y * (X @ w))))

    def grad(w):
        s = 1.0 / (1.0 + np.exp(y * (X @ w)))
        return -(X.T @ (s * y)) / m

    fw = value(w)
    for _ in range(200):
        gw = grad(w)
        if np.linalg.norm(gw) <= 1e-14:
            break
        s = 1.0 / (1.0 + np.exp(y * (X @ w)))
        d = s * (1.0 - s)
        H = (X.T * d) @ X / m + 1e-14 * np.eye(p)
        step = np.linalg.solve(H, gw)
        t = 1.0
        while t > 1e-8:
            cand = w - t * step
            fc = value(cand)
            if fc <= fw:
                w, fw = cand, fc
                break
            t *= 0.5
        else:  # no progress at the smallest damping
            break
    return fw


def logistic(samples: int = 128, dim: int = 16, batch: int = 8, flip: float = 0.1,
             data_seed: int = 0) -> Problem:
    """Binary logistic regression on seeded non-separable synthetic data.

    L = lambda_max(X'X)/(4m) is the exact analytic smoothness constant and
    f_star is solved to machine precision at construction.  The minibatch
    oracle samples `batch` rows with replacement; sigma_sq is the global bound
    max_i ||x_i||^2 / batch, valid everywhere.
    """
    if batch < 1 or batch > samples:
        raise ConfigError(f"batch must be in [1, {samples}], got {batch}")
    gen = stream(data_seed, "problem:logistic:data")
    X = gen.standard_normal((samples, dim)) / np.sqrt(dim)
    w_true = gen.standard_normal(dim)
    y = np.sign(X @ w_true)
    y[y == 0] = 1.0
    flips = gen.random(samples) < flip
    y[flips] *= -1.0

    m = samples

    def f(x: ParamVector) -> float:
        w = x.blocks[0]
        return float(np.mean(np.logaddexp(0.0, -y * (X @ w))))

    def g(x: ParamVector) -> ParamVector:
        w = x.blocks[0]
        s = 1.0 / (1.0 + np.exp(y * (X @ w)))
        return ParamVector([-(X.T @ (s * y)) / m])

    def sg(x: ParamVector, rng: np.random.Generator) -> ParamVector:
        w = x.blocks[0]
        idx = rng.integers(0, m, size=batch)
        Xb, yb = X[idx], y[idx]
        s = 1.0 / (1.0 + np.exp(yb * (Xb @ w)))
        return ParamVector([-(Xb.T @ (s * yb)) / batch])

    L = float(np.linalg.eigvalsh(X.T @ X).max() / (4.0 * m))
    sigma_sq = float(np.max(np.sum(X * X, axis=1)) / batch)
    return Problem(
        name="logistic",
        block_shapes=((dim,),),
        eval_fn=f,
        grad_fn=g,
        stochastic_grad_fn=sg,
        init_scale=0.5,
        constants=ProblemConstants(L=L, L0=L, L1=0.0, sigma_sq=sigma_sq,
                                   f_star=_logistic_f_star(X, y)),
    )


def mlp(hidden: int = 8, inputs: int = 6, samples: int = 64, batch: int = 8,
        noise: float = 0.1, region_radii: Tuple[float, float] = (3.0, 3.0),
        data_seed: int = 0) -> Problem:
    """Two-layer tanh regression net with hand-derived gradients.

    Parameters are the matrix blocks W1 (hidden x inputs) and W2 (1 x hidden);
    the loss is mean squared error over seeded teacher data.  sigma_sq is a
    closed-form bound on the minibatch variance valid while each layer stays
    inside its `region_radii` spectral ball (the regime every constrained run
    in this package operates in).
    """
    if batch < 1 or batch > samples:
        raise ConfigError(f"batch must be in [1, {samples}], got {batch}")
    gen = stream(data_seed, "problem:mlp:data")
    Z = gen.standard_normal((samples, inputs))
    W1_t = gen.standard_normal((hidden, inputs)) / np.sqrt(inputs)
    W2_t = gen.standard_normal((1, hidden)) / np.sqrt(hidden)
    t = (np.tanh(Z @ W1_t.T) @ W2_t[0]) + noise * gen.standard_normal(samples)

    m = samples

    def _forward(W1, W2, Zs):
        U = np.tanh(Zs @ W1.T)
        return U, U @ W2[0]

    def f(x: ParamVector) -> float:
        W1, W2 = x.blocks
        _, yhat = _forward(W1, W2, Z)
        return float(0.5 * np.mean((yhat - t) ** 2))

    def _grads(W1, W2, Zs, ts):
        U, yhat = _forward(W1, W2, Zs)
        e = (yhat - ts) / len(ts)
        dW2 = (e @ U)[None, :]
        dA = (e[:, None] * W2[0][None, :]) * (1.0 - U * U)
        dW1 = dA.T @ Zs
        return dW1, dW2

    def g(x: ParamVector) -> ParamVector:
        return ParamVector(_grads(x.blocks[0], x.blocks[1], Z, t))

    def sg(x: ParamVector, rng: np.random.Generator) -> ParamVector:
        idx = rng.integers(0, m, size=batch)
        return ParamVector(_grads(x.blocks[0], x.blocks[1], Z[idx], t[idx]))

    # Region-valid variance bound: |yhat| <= r2*sqrt(h) when ||W2||_S <= r2,
    # so each per-sample gradient norm is at most e_max * sqrt(h + r2^2*||z||^2).
    r2 = float(region_radii[1])
    e_max = r2 * np.sqrt(hidden) + float(np.max(np.abs(t)))
    z_sq = float(np.max(np.sum(Z * Z, axis=1)))
    sigma_sq = float(e_max**2 * (hidden + r2**2 * z_sq) / batch)

    return Problem(
        name="mlp",
        block_shapes=((hidden, inputs), (1, hidden)),
        eval_fn=f,
        grad_fn=g,
        stochastic_grad_fn=sg,
        init_scale=0.3,
        constants=ProblemConstants(sigma_sq=sigma_sq),
    )


def rosenbrock(dim: int = 8, sigma: float = 0.0, data_seed: int = 0) -> Problem:
    """Chained Rosenbrock; non-convex sanity check with f_star = 0 at all-ones."""
    if dim < 2:
        raise ConfigError(f"rosenbrock needs dim >= 2, got {dim}")

    def f(x: ParamVector) -> float:
        v = x.blocks[0]
        return float(np.sum(100.0 * (v[1:] - v[:-1] ** 2) ** 2 + (1.0 - v[:-1]) ** 2))

    def g(x: ParamVector) -> ParamVector:
        v = x.blocks[0]
        out = np.zeros_like(v)
        diff = v[1:] - v[:-1] ** 2
        out[:-1] = -400.0 * v[:-1] * diff - 2.0 * (1.0 - v[:-1])
        out[1:] += 200.0 * diff
        return ParamVector([out])

    shapes = ((dim,),)
    return Problem(
        name="rosenbrock",
        block_shapes=shapes,
        eval_fn=f,
        grad_fn=g,
        stochastic_grad_fn=_additive_noise_oracle(g, shapes, sigma),
        constants=ProblemConstants(sigma_sq=float(sigma**2), f_star=0.0),
    )


PROBLEM_FACTORIES: Dict[str, Callable[..., Problem]] = {
    "quadratic": quadratic,
    "exp_family": exp_family,
    "logistic": logistic,
    "mlp": mlp,
    "rosenbrock": rosenbrock,
}


def catalog() -> list:
    """Default instance of every registered problem."""
    return [factory() for factory in PROBLEM_FACTORIES.values()]


def make_problem(name: str, **params) -> Problem:
    """Instantiate a catalog problem by name with factory keyword overrides."""
    if name not in PROBLEM_FACTORIES:
        raise ConfigError(f"unknown problem '{name}' (known: {sorted(PROBLEM_FACTORIES)})",
                          field="problem.name")
    try:
        return PROBLEM_FACTORIES[name](**params)
    except TypeError as exc:
        raise ConfigError(f"bad parameters for problem '{name}': {exc}", field="problem") from exc


def finite_diff_grad(problem: Problem, x: ParamVector, h: float = 1e-6) -> ParamVector:
    """Central finite differences, step h relative to each coordinate's magnitude."""
    if h <= 0:
        raise ConfigError(f"finite-difference step must be positive, got {h}")
    flat = to_flat(x)
    out = np.zeros_like(flat)
    for i in range(flat.size):
        hi = h * max(1.0, abs(flat[i]))
        plus = flat.copy()
        minus = flat.copy()
        plus[i] += hi
        minus[i] -= hi
        out[i] = (problem.eval(from_flat(plus, x)) - problem.eval(from_flat(minus, x))) / (2.0 * hi)
    return from_flat(out, x)
