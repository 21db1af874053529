"""Potential functions and numerical Lyapunov checks.

The scalar potential is

    U(x; eps) = int_0^x g'(z) [z - f(g(z); eps)] dz

and its vector generalization V_B is the line integral of B(s) (s - F(s))
for a positive-definite matrix field B and the coupled update F.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import simpson

from .dynamics import CoupledConfig, coupled_step, run_coupled
from .errors import InvalidModelError, ParameterError
from .models import EpsilonMode, SystemModel

DEFAULT_QUAD_POINTS = 2048
_CHUNK = 256
MAX_GRID_STATES = 10**5


@dataclass
class PotentialProfile:
    grid: np.ndarray
    values: np.ndarray
    epsilon: float
    min_value: float = field(init=False)
    argmin: float = field(init=False)

    def __post_init__(self):
        k = int(np.argmin(self.values))  # first occurrence -> smallest x on ties
        self.min_value = float(self.values[k])
        self.argmin = float(self.grid[k])


def _integrand(model, z, epsilon):
    return model.g_prime(z) * (z - model.h(z, epsilon))


def potential_1d(model: SystemModel, x, epsilon, quad_points=DEFAULT_QUAD_POINTS):
    """U(x; eps) by composite Simpson with ``quad_points`` panels on [0, x].

    ``x`` may be an array; the result then has the same shape.
    """
    if quad_points < 2:
        raise ParameterError("quad_points must be >= 2")
    panels = quad_points + (quad_points % 2)
    t = np.linspace(0.0, 1.0, panels + 1)
    lo = model.domain[0]
    xs = np.atleast_1d(np.asarray(x, dtype=float))
    out = np.empty(xs.shape)
    flat_x, flat_out = xs.ravel(), out.ravel()
    for start in range(0, flat_x.size, _CHUNK):
        xc = flat_x[start : start + _CHUNK]
        z = lo + (xc[:, None] - lo) * t[None, :]
        vals = _integrand(model, z, epsilon)
        flat_out[start : start + _CHUNK] = simpson(vals, x=z, axis=-1)
    out = flat_out.reshape(xs.shape)
    if np.ndim(x) == 0:
        return float(out[0])
    return out


def potential_parts(model, x, quad_points=DEFAULT_QUAD_POINTS):
    """(P, Q) with U(x; eps) = P(x) - eps * Q(x); MULTIPLICATIVE models only."""
    if model.epsilon_mode is not EpsilonMode.MULTIPLICATIVE:
        raise InvalidModelError("U is affine in eps only for multiplicative models")
    p = potential_1d(model, x, 0.0, quad_points)
    return p, p - potential_1d(model, x, 1.0, quad_points)


def closed_form_ldpc(l, r, x, epsilon):
    """Closed-form potential of the regular (l, r) erasure recursion.

    Only ring operations and integer division appear, so ``x``/``epsilon``
    may be floats, arrays, fractions.Fraction or mpmath numbers.
    """
    y = 1 - x
    return (1 - y**r) / r - x * y ** (r - 1) - epsilon * (1 - y ** (r - 1)) ** l / l


def potential_profile(model, epsilon, grid_size=1001, quad_points=DEFAULT_QUAD_POINTS):
    grid = np.linspace(*model.domain, grid_size)
    return PotentialProfile(grid, potential_1d(model, grid, epsilon, quad_points), epsilon)


# -- matrix fields ---------------------------------------------------------------


class MatrixField:
    """State-dependent positive-definite matrix B(x)."""

    name = "matrix"
    diagonal = False

    def __call__(self, x):
        raise NotImplementedError

    def apply(self, x, v):
        """B(x) v, batched over leading axes of x and v."""
        return np.einsum("...ij,...j->...i", self(x), v)

    def min_eigenvalue(self, x):
        return float(np.min(np.linalg.eigvalsh(self(x))))


class DiagonalField(MatrixField):
    diagonal = True

    def diag(self, x):
        raise NotImplementedError

    def __call__(self, x):
        d = self.diag(x)
        return d[..., :, None] * np.eye(d.shape[-1])

    def apply(self, x, v):
        return self.diag(x) * v

    def min_eigenvalue(self, x):
        return float(np.min(self.diag(x)))


class Identity(DiagonalField):
    name = "identity"

    def diag(self, x):
        return np.ones_like(np.asarray(x, dtype=float))


class DiagonalGPrime(DiagonalField):
    """B(x) = diag(g'(x_i)); turns V_B into the sum of scalar potentials."""

    name = "gprime"

    def __init__(self, model):
        self.model = model

    def diag(self, x):
        return np.asarray(self.model.g_prime(np.asarray(x, dtype=float)), dtype=float) * np.ones_like(x)


class ScaledDiagonal(DiagonalField):
    """B(x) = D diag(g'(x_i)) for a fixed positive diagonal D."""

    name = "scaled"

    def __init__(self, model, weights):
        self.model = model
        self.weights = np.asarray(weights, dtype=float)
        if np.any(self.weights <= 0):
            raise InvalidModelError("scaling weights must be positive")

    def diag(self, x):
        gp = np.asarray(self.model.g_prime(np.asarray(x, dtype=float)), dtype=float)
        return self.weights * gp


class ConstantMatrix(MatrixField):
    """A fixed symmetric positive-definite matrix (useful for probing)."""

    name = "constant"

    def __init__(self, matrix):
        self.matrix = np.asarray(matrix, dtype=float)
        if not np.allclose(self.matrix, self.matrix.T) or np.min(np.linalg.eigvalsh(self.matrix)) <= 0:
            raise InvalidModelError("matrix must be symmetric positive-definite")

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        return np.broadcast_to(self.matrix, x.shape[:-1] + self.matrix.shape)

    def min_eigenvalue(self, x):
        return float(np.min(np.linalg.eigvalsh(self.matrix)))


def make_field(kind, model, weights=None):
    if kind == "identity":
        return Identity()
    if kind == "gprime":
        return DiagonalGPrime(model)
    if kind == "scaled":
        return ScaledDiagonal(model, weights)
    raise InvalidModelError(f"unknown matrix field {kind!r}")


# -- V_B -----------------------------------------------------------------------------


def gradient_field(model, cfg, B, x, epsilon):
    """h(x) = B(x) (x - F(x)) for the coupled update F."""
    x = np.asarray(x, dtype=float)
    return B.apply(x, x - coupled_step(model, cfg, x, epsilon))


def _segment_integral(model, cfg, B, a, b, epsilon, path_points):
    panels = path_points + (path_points % 2)
    t = np.linspace(0.0, 1.0, panels + 1)
    s = a[None, :] + t[:, None] * (b - a)[None, :]
    # checked on the open segment: g' may vanish at x_i = 1, a null set of the path
    if B.min_eigenvalue(s[1:-1] if panels > 2 else s) <= 0:
        raise InvalidModelError(f"B ({B.name}) is not positive-definite along the path")
    h = gradient_field(model, cfg, B, s, epsilon)
    return float(simpson(h @ (b - a), x=t))


def lyapunov_VB(model, cfg, B, x, epsilon, path_points=DEFAULT_QUAD_POINTS, path=None):
    """Line integral of h = B(s)(s - F(s)) from the origin to ``x``.

    ``path`` lists intermediate waypoints of a polygonal path; the default is
    the straight segment.
    """
    x = np.asarray(x, dtype=float)
    points = [np.zeros_like(x)] + [np.asarray(p, dtype=float) for p in (path or [])] + [x]
    return sum(
        _segment_integral(model, cfg, B, a, b, epsilon, path_points)
        for a, b in zip(points[:-1], points[1:])
    )


def axis_path(x, split):
    """Waypoint for a two-segment path: first the coordinates before ``split``."""
    x = np.asarray(x, dtype=float)
    mid = np.zeros_like(x)
    mid[:split] = x[:split]
    return [mid]


@dataclass
class SymmetryReport:
    max_asymmetry: float
    location: tuple[int, int]
    jacobian: np.ndarray


def check_gradient_symmetry(model, cfg, B, x, epsilon, step=1e-6):
    """Central-difference Jacobian of h and its largest asymmetry."""
    x = np.asarray(x, dtype=float)
    n = x.shape[0]
    pert = np.eye(n) * step
    hp = gradient_field(model, cfg, B, x[None, :] + pert, epsilon)
    hm = gradient_field(model, cfg, B, x[None, :] - pert, epsilon)
    # row j of hp/hm is h at x +- step e_j, so J[i, j] = (hp - hm)[j, i] / 2 step
    jac = ((hp - hm) / (2 * step)).T
    asym = np.abs(jac - jac.T)
    i, j = np.unravel_index(int(np.argmax(asym)), asym.shape)
    return SymmetryReport(float(asym[i, j]), (int(i), int(j)), jac)


# -- Lyapunov conditions -----------------------------------------------------------


@dataclass
class ConditionReport:
    epsilon: float
    origin_value: float
    positivity_ok: bool
    decrease_ok: bool
    worst_points: dict
    n_samples: int

    @property
    def ok(self):
        return self.positivity_ok and self.decrease_ok and self.origin_value == 0.0

    def as_dict(self):
        return {
            "epsilon": self.epsilon,
            "origin_value": self.origin_value,
            "positivity_ok": self.positivity_ok,
            "decrease_ok": self.decrease_ok,
            "n_samples": self.n_samples,
            "worst_points": {
                k: {"x": np.atleast_1d(v["x"]).tolist(), "value": v["value"]}
                for k, v in self.worst_points.items()
            },
        }


def _sample_states(model, cfg, epsilon, grid_size, n_random, rng):
    lo, hi = model.domain
    if cfg.L <= 3:
        per_axis = min(grid_size, int(round(MAX_GRID_STATES ** (1.0 / cfg.L))))
        axis = np.linspace(lo, hi, per_axis)
        cloud = np.stack(np.meshgrid(*[axis] * cfg.L, indexing="ij"), axis=-1).reshape(-1, cfg.L)
    else:
        cloud = lo + (hi - lo) * rng.random((n_random, cfg.L))
    # the trajectory from all ones ends on the largest fixed point, which a
    # grid almost never hits and where the decrease condition is tight
    traj = run_coupled(model, cfg, None, epsilon, max_iter=10**5).states
    return np.vstack([cloud, traj])


def check_lyapunov_conditions(
    model,
    cfg,
    B,
    epsilon,
    grid_size=1001,
    n_random=10**4,
    path_points=256,
    seed=0,
):
    """Sample the three Lyapunov conditions for V_B.

    States are a full grid when L <= 3, otherwise ``n_random`` uniform draws;
    the trajectory from all ones is always added.  For L = 1 with B = g' the scalar
    potential is evaluated directly.
    """
    if grid_size < 2:
        raise ParameterError("grid_size must be >= 2")
    rng = np.random.default_rng(seed)
    states = _sample_states(model, cfg, epsilon, grid_size, n_random, rng)
    nonzero = np.any(states != 0.0, axis=1)
    states = states[nonzero]
    images = coupled_step(model, cfg, states, epsilon)

    if cfg.L == 1 and isinstance(B, DiagonalGPrime):
        def V(s):
            return potential_1d(model, s[:, 0], epsilon)
    else:
        def V(s):
            return np.array([lyapunov_VB(model, cfg, B, p, epsilon, path_points) for p in s])

    v0 = lyapunov_VB(model, cfg, B, np.zeros(cfg.L), epsilon, 2)
    vx = V(states)
    vfx = V(images)
    delta = vfx - vx
    kp, kd = int(np.argmin(vx)), int(np.argmax(delta))
    return ConditionReport(
        epsilon=epsilon,
        origin_value=float(v0),
        positivity_ok=bool(np.all(vx > 0)),
        decrease_ok=bool(np.all(delta < 0)),
        worst_points={
            "positivity": {"x": states[kp].copy(), "value": float(vx[kp])},
            "decrease": {"x": states[kd].copy(), "value": float(delta[kd])},
        },
        n_samples=int(states.shape[0]),
    )
