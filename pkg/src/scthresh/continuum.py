"""Continuum limit of the coupled chain.

Rescaling positions by the coupling width turns the double window average
into the triangular-kernel integral operator

    (T v)(x) = int_{-1}^{1} (1 - |s|) F(v(x + s)) ds,   F = f(g(.); eps)

on [-alpha, alpha].  A symmetric chain with copies i = -H..H (2H + 1 copies,
stored as indices 0..2H) maps onto it by x = i / w, so alpha = H / w and the
end copies sit on the interval ends.  Fixed points v = T v approximate the
averaged states y_i of the discrete chain.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .dynamics import Boundary, CoupledConfig, find_fixed_point, window_average
from .errors import NonConvergenceError, ParameterError
from .models import SystemModel, evaluate

MIN_MESH = 16
DEFAULT_MESH = 64
DEFAULT_MAX_SWEEPS = 10**5


def triangular_weights(w: int) -> np.ndarray:
    """a(m) = w - |m| for m = -(w-1)..(w-1); the weights sum to w^2."""
    if w < 1:
        raise ParameterError("w must be >= 1")
    m = np.arange(-(w - 1), w)
    return w - np.abs(m)


def kernel_average_error(x, i, w):
    """Discrete window average at copy ``i`` versus its integral form.

    The integral uses the piecewise-linear interpolant of ``x`` (zero outside
    the chain) against the kernel (w - |r|) / w^2 on [-w, w].  Both factors
    are linear on every unit interval, so Simpson's rule per interval is
    exact.  Returns (discrete, integral, gap).
    """
    x = np.asarray(x, dtype=float)
    L = x.shape[0]
    if not (w - 1 <= i <= L - w):
        raise ParameterError(f"copy {i} is not interior for L={L}, w={w}")

    def xv(k):
        return x[k] if 0 <= k < L else 0.0

    discrete = sum(a * xv(i + m) for m, a in zip(range(-(w - 1), w), triangular_weights(w))) / w**2
    integral = 0.0
    for r0 in range(-w, w):
        r1 = r0 + 1
        rm = r0 + 0.5
        xa, xb = xv(i + r0), xv(i + r1)
        pts = ((w - abs(r0)) * xa, (w - abs(rm)) * (xa + xb) / 2, (w - abs(r1)) * xb)
        integral += (pts[0] + 4 * pts[1] + pts[2]) / 6
    integral /= w**2
    gap = abs(discrete - integral)
    assert gap <= 1.0 / w, f"kernel gap {gap} exceeds 1/w"
    return discrete, integral, gap


@dataclass
class ContinuumProfile:
    grid: np.ndarray
    values: np.ndarray
    mesh_step: float
    alpha: float
    epsilon: float
    residual: float
    sweeps: int
    anchored: bool

    def resample(self, points):
        return np.interp(points, self.grid, self.values)


def _mesh(alpha, mesh):
    if alpha <= 1:
        raise ParameterError(f"alpha={alpha} <= 1 is outside the supported range")
    if mesh < MIN_MESH:
        raise ParameterError(f"mesh must be >= {MIN_MESH} points per unit length")
    n = int(round(2 * alpha * mesh))
    if not math.isclose(n, 2 * alpha * mesh, abs_tol=1e-9):
        raise ParameterError("2 * alpha * mesh must be an integer so the ends lie on the mesh")
    return np.linspace(-alpha, alpha, n + 1), 1.0 / mesh


def _kernel(mesh):
    s = np.arange(-mesh, mesh + 1) / mesh
    wts = (1 - np.abs(s)) / mesh
    return wts  # trapezoid end weights vanish since 1 - |s| = 0 at s = +-1


def apply_operator(model, values, epsilon, mesh, anchored):
    """One Picard sweep v <- T v on the mesh (Jacobi style).

    ``anchored``: beyond the ends F(v) is the anchor value 0 and the end
    nodes carry half trapezoid weight (the truncated kernel).  Otherwise the
    profile is continued by its end values.
    """
    Fv = np.asarray(evaluate(model, values, epsilon), dtype=float)
    kern = _kernel(mesh)
    if anchored:
        Fv = Fv.copy()
        Fv[0] *= 0.5
        Fv[-1] *= 0.5
        padded = np.concatenate([np.zeros(mesh), Fv, np.zeros(mesh)])
    else:
        padded = np.concatenate([np.full(mesh, Fv[0]), Fv, np.full(mesh, Fv[-1])])
    return np.convolve(padded, kern, mode="valid")


def _picard(model, alpha, epsilon, mesh, tol, anchored, max_sweeps, v0=None):
    grid, h = _mesh(alpha, mesh)
    v = np.ones_like(grid) if v0 is None else np.asarray(v0, dtype=float).copy()
    step = math.inf
    sweeps = 0
    while sweeps < max_sweeps:
        nv = apply_operator(model, v, epsilon, mesh, anchored)
        sweeps += 1
        step = float(np.max(np.abs(nv - v)))
        v = nv
        if step < tol:
            break
    prof = ContinuumProfile(grid, v, h, alpha, epsilon, step, sweeps, anchored)
    if step >= tol:
        raise NonConvergenceError(
            f"Picard iteration stalled at step {step:.3g} after {sweeps} sweeps",
            state=prof,
            residual=step,
            iterations=sweeps,
        )
    return prof


def solve_interior_fixed_point(
    model: SystemModel,
    alpha,
    epsilon,
    mesh=DEFAULT_MESH,
    tol=1e-10,
    max_sweeps=DEFAULT_MAX_SWEEPS,
):
    """Fixed point of the full-kernel equation v = T v, started from v = 1.

    No anchor: the kernel is never truncated and the profile is continued by
    its end values, which models copies far from either boundary.
    """
    return _picard(model, alpha, epsilon, mesh, tol, False, max_sweeps)


def solve_boundary_fixed_point(
    model: SystemModel,
    alpha,
    epsilon,
    mesh=DEFAULT_MESH,
    tol=1e-10,
    max_sweeps=DEFAULT_MAX_SWEEPS,
):
    """Fixed point with the kernel truncated at both anchored ends.

    Near x = -alpha the integral runs over s in [-(alpha + x), 1]; the right
    end is the mirror image.  Away from the ends this is the full-kernel
    equation, so the result is the continuum counterpart of the anchored
    chain.
    """
    return _picard(model, alpha, epsilon, mesh, tol, True, max_sweeps)


def operator_residual(model, profile: ContinuumProfile, mesh=None):
    mesh = mesh or int(round(1 / profile.mesh_step))
    tv = apply_operator(model, profile.values, profile.epsilon, mesh, profile.anchored)
    return float(np.max(np.abs(tv - profile.values)))


def chain_positions(n_copies, w):
    """Continuum coordinates x = i / w of a chain stored as indices 0..n_copies-1."""
    if n_copies % 2 != 1:
        raise ParameterError("a symmetric chain has an odd number of copies")
    half = n_copies // 2
    return (np.arange(n_copies) - half) / float(w)


def compare_with_chain(model, alpha, w, epsilon, mesh=DEFAULT_MESH, tol=1e-10):
    """Sup-norm gap between the anchored continuum profile and the chain.

    The chain has 2 alpha w + 1 copies; its averaged fixed-point states y_i
    are compared with v at the copy positions.
    """
    half = int(round(alpha * w))
    if not math.isclose(half, alpha * w):
        raise ParameterError("alpha * w must be an integer")
    L = 2 * half + 1
    cfg = CoupledConfig(L, w, boundary=Boundary.ANCHORED)
    x0 = find_fixed_point(model, cfg, epsilon, tol=tol)
    y = window_average(x0, w, Boundary.ANCHORED)
    prof = solve_boundary_fixed_point(model, alpha, epsilon, mesh, tol)
    pos = chain_positions(L, w)
    gap = float(np.max(np.abs(prof.resample(pos) - y)))
    return {
        "alpha": alpha,
        "w": w,
        "L": L,
        "epsilon": epsilon,
        "mesh": mesh,
        "sup_gap": gap,
        "bound": 2.0 / w,
        "chain_max": float(np.max(y)),
        "continuum_max": float(np.max(prof.values)),
        "sweeps": prof.sweeps,
    }, prof, y
