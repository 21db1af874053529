"""Single and spatially coupled recursions.

Copies are indexed ``0..L-1``.  With ANCHORED boundaries every index outside
that range holds the known value 0; with CIRCULAR boundaries indices wrap
modulo L.  A chain written on ``{-L, ..., 0}`` maps onto ours by ``i -> i + L``.
"""

from __future__ import annotations

import enum
import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .errors import NonConvergenceError, NumericDomainError, ParameterError, ShapeError
from .models import SystemModel, evaluate

DEFAULT_TOL = 1e-10
DEFAULT_MAX_ITER = 10**6


class Variant(str, enum.Enum):
    INSIDE = "inside"  # average inside f(g(.))
    OUTSIDE = "outside"  # average g-values, apply f, then average the results


class Boundary(str, enum.Enum):
    ANCHORED = "anchored"
    CIRCULAR = "circular"


class RegimeWarning(UserWarning):
    """L < 2w + 1: outside the regime where the coupled-chain results apply."""


@dataclass(frozen=True)
class CoupledConfig:
    L: int
    w: int = 1
    variant: Variant = Variant.INSIDE
    boundary: Boundary = Boundary.ANCHORED

    def __post_init__(self):
        if int(self.L) != self.L or self.L < 1:
            raise ParameterError(f"L must be an integer >= 1, got {self.L!r}")
        if int(self.w) != self.w or self.w < 1:
            raise ParameterError(f"w must be an integer >= 1, got {self.w!r}")
        object.__setattr__(self, "L", int(self.L))
        object.__setattr__(self, "w", int(self.w))
        object.__setattr__(self, "variant", Variant(self.variant))
        object.__setattr__(self, "boundary", Boundary(self.boundary))
        if not self.in_regime:
            warnings.warn(
                f"L={self.L} < 2w+1={2 * self.w + 1}; coupled-chain guarantees need L >= 2w+1",
                RegimeWarning,
                stacklevel=3,
            )

    @property
    def in_regime(self):
        return self.L >= 2 * self.w + 1

    def as_dict(self):
        return {"L": self.L, "w": self.w, "variant": self.variant.value, "boundary": self.boundary.value}


@dataclass
class Trajectory:
    """Recorded iterates.  ``states[k]`` is the state after ``steps[k]`` updates."""

    states: np.ndarray
    steps: np.ndarray
    epsilon: float
    converged_to_zero: bool
    iterations: int
    final_residual: float
    config: CoupledConfig | None = None
    stopped: bool = field(default=True)  # False when max_iter ran out

    @property
    def final(self):
        return self.states[-1]


def as_state(x, L):
    arr = np.array(x, dtype=float)
    if arr.ndim != 1 or arr.shape[0] != L:
        raise ShapeError(f"state must have shape ({L},), got {arr.shape}")
    return arr


# -- single system --------------------------------------------------------------


def _scalar_map(model, epsilon):
    lo, hi = model.domain

    def step(x):
        y = float(model.h(x, epsilon))
        if not math.isfinite(y):
            raise NumericDomainError(
                f"{model.name}: non-finite update at x={x!r}, epsilon={epsilon!r}",
                x=x,
                epsilon=epsilon,
            )
        return min(max(y, lo), hi)

    return step


def iterate_single(
    model: SystemModel,
    x0=1.0,
    epsilon=None,
    max_iter=DEFAULT_MAX_ITER,
    tol=DEFAULT_TOL,
    record_every=1,
) -> Trajectory:
    """Iterate x <- f(g(x); eps) until the step drops below ``tol``.

    ``record_every=0`` keeps only the first and last state.
    """
    if tol <= 0:
        raise ParameterError("tol must be positive")
    epsilon = model.resolve_epsilon(epsilon)
    step = _scalar_map(model, epsilon)
    x = float(x0)
    states, steps = [x], [0]
    residual = math.inf
    n = 0
    while n < max_iter:
        y = step(x)
        n += 1
        residual = abs(y - x)
        x = y
        if record_every and n % record_every == 0:
            states.append(x)
            steps.append(n)
        if residual < tol:
            break
    if steps[-1] != n:
        states.append(x)
        steps.append(n)
    return Trajectory(
        states=np.array(states),
        steps=np.array(steps),
        epsilon=epsilon,
        converged_to_zero=abs(x) < tol,
        iterations=n,
        final_residual=residual,
        stopped=residual < tol,
    )


# -- coupled system -------------------------------------------------------------


def triangular_kernel(w):
    """Weights a(m) / w**2, m = -(w-1)..(w-1), of the double window average."""
    m = np.arange(-(w - 1), w)
    return (w - np.abs(m)) / float(w * w)


def _pad(x, width, boundary, fill=0.0):
    if width == 0:
        return x
    pad = [(0, 0)] * (x.ndim - 1) + [(width, width)]
    if boundary is Boundary.CIRCULAR:
        return np.pad(x, pad, mode="wrap")
    return np.pad(x, pad, mode="constant", constant_values=fill)


def window_average(x, w, boundary=Boundary.ANCHORED):
    """y_i = (1/w^2) sum_{k,j<w} x_{i+j-k} along the last axis."""
    x = np.asarray(x, dtype=float)
    L = x.shape[-1]
    if w == 1:
        return x.copy()
    boundary = Boundary(boundary)
    kern = triangular_kernel(w)
    if x.ndim == 1:
        if boundary is Boundary.ANCHORED:
            return np.convolve(x, kern)[w - 1 : w - 1 + L]
        return np.convolve(_pad(x, w - 1, boundary), kern, mode="valid")
    xp = _pad(x, w - 1, boundary)
    y = np.zeros_like(x)
    for off, a in enumerate(kern):
        y += a * xp[..., off : off + L]
    return y


def _outside_update(model, cfg, x, epsilon):
    w, L = cfg.w, cfg.L
    xp = _pad(x, w - 1, cfg.boundary)
    gp = np.asarray(model.g(xp), dtype=float)
    # z_m for m = -(w-1)..L-1: mean of g over the window starting at m
    n_m = L + w - 1
    z = np.zeros(x.shape[:-1] + (n_m,))
    for j in range(w):
        z += gp[..., j : j + n_m]
    z /= w
    fz = np.asarray(model.outer(z, epsilon), dtype=float)
    out = np.zeros_like(x)
    for k in range(w):
        # m = i - k  ->  position (i - k) + (w - 1) in fz
        out += fz[..., w - 1 - k : w - 1 - k + L]
    out /= w
    if not np.all(np.isfinite(out)):
        raise NumericDomainError(f"{model.name}: non-finite coupled update", x=x, epsilon=epsilon)
    lo, hi = model.domain
    clipped = np.clip(out, lo, hi)
    assert not model.strict or np.max(np.abs(clipped - out), initial=0.0) <= 1e-12
    return clipped


def coupled_step(model: SystemModel, cfg: CoupledConfig, x, epsilon=None):
    """One synchronous update of all L copies.  ``x`` may carry leading batch axes."""
    x = np.asarray(x, dtype=float)
    if x.shape[-1] != cfg.L:
        raise ShapeError(f"state length {x.shape[-1]} != L={cfg.L}")
    epsilon = model.resolve_epsilon(epsilon)
    if cfg.variant is Variant.INSIDE or cfg.w == 1:
        return np.asarray(evaluate(model, window_average(x, cfg.w, cfg.boundary), epsilon))
    return _outside_update(model, cfg, x, epsilon)


def run_coupled(
    model: SystemModel,
    cfg: CoupledConfig,
    x0=None,
    epsilon=None,
    max_iter=DEFAULT_MAX_ITER,
    tol=DEFAULT_TOL,
    record_every=1,
) -> Trajectory:
    """Iterate coupled_step until the max-norm step drops below ``tol``.

    ``x0`` defaults to all ones.  ``record_every=0`` keeps first and last only.
    """
    if tol <= 0:
        raise ParameterError("tol must be positive")
    epsilon = model.resolve_epsilon(epsilon)
    x = np.ones(cfg.L) if x0 is None else as_state(x0, cfg.L)
    states, steps = [x.copy()], [0]
    residual = math.inf
    n = 0
    while n < max_iter:
        y = coupled_step(model, cfg, x, epsilon)
        n += 1
        residual = float(np.max(np.abs(y - x)))
        x = y
        if record_every and n % record_every == 0:
            states.append(x.copy())
            steps.append(n)
        if residual < tol:
            break
    if steps[-1] != n:
        states.append(x.copy())
        steps.append(n)
    return Trajectory(
        states=np.array(states),
        steps=np.array(steps),
        epsilon=epsilon,
        converged_to_zero=float(np.max(np.abs(x))) < tol,
        iterations=n,
        final_residual=residual,
        config=cfg,
        stopped=residual < tol,
    )


def fixed_point_residual(model, cfg, x, epsilon=None):
    """max_i |x_i - F(x)_i| for the coupled update F."""
    x = as_state(x, cfg.L)
    return float(np.max(np.abs(x - coupled_step(model, cfg, x, epsilon))))


def find_fixed_point(model, cfg, epsilon=None, tol=DEFAULT_TOL, max_iter=DEFAULT_MAX_ITER):
    """Limit of the coupled recursion started from all ones."""
    traj = run_coupled(model, cfg, None, epsilon, max_iter=max_iter, tol=tol, record_every=0)
    if not traj.stopped:
        raise NonConvergenceError(
            f"no fixed point within {max_iter} iterations (step {traj.final_residual:.3g})",
            state=traj.final,
            residual=traj.final_residual,
            iterations=traj.iterations,
        )
    x = traj.final
    if traj.converged_to_zero:
        return np.zeros(cfg.L)
    return x


# -- export -------------------------------------------------------------------


def trajectory_rows(traj: Trajectory):
    """(iteration, i, value) rows; scalar trajectories use i = 0."""
    states = traj.states if traj.states.ndim == 2 else traj.states[:, None]
    for n, state in zip(traj.steps, states):
        for i, v in enumerate(state):
            yield int(n), i, float(v)


def trajectory_summary(traj: Trajectory):
    cfg = traj.config.as_dict() if traj.config is not None else {"L": 1, "w": 1, "variant": None, "boundary": None}
    return {
        "epsilon": traj.epsilon,
        **cfg,
        "converged_to_zero": bool(traj.converged_to_zero),
        "iterations": int(traj.iterations),
        "final_residual": float(traj.final_residual),
    }
