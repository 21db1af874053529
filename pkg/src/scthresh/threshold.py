"""Threshold computations: single-system, potential, coupled, and canceler load."""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Any

import numpy as np
from scipy.optimize import brentq

from .dynamics import (
    DEFAULT_MAX_ITER,
    DEFAULT_TOL,
    Boundary,
    CoupledConfig,
    iterate_single,
    run_coupled,
)
from .errors import DegenerateModelError, InvalidModelError, ParameterError
from .models import EpsilonMode, SystemModel
from .potential import DEFAULT_QUAD_POINTS, closed_form_ldpc, potential_1d, potential_parts
from .search import bisect_predicate, golden_section

DEFAULT_EPS_TOL = 1e-6
POTENTIAL_SLACK = 1e-12


class Method(str, enum.Enum):
    MIN_RATIO = "minratio"
    SINGLE_DE = "de"
    POTENTIAL = "potential"
    COUPLED_DE = "coupled-de"
    STATIONARY_SCAN = "stationary"


@dataclass
class ThresholdResult:
    value: Any
    bracket: tuple
    method: Method
    evaluations: int
    witness: Any = None
    history: list = field(default_factory=list, repr=False)
    flags: dict = field(default_factory=dict)

    def as_dict(self):
        w = self.witness
        if isinstance(w, np.ndarray):
            w = w.tolist()
        elif w is not None:
            w = float(w)
        return {
            "value": float(self.value),
            "bracket": [float(b) for b in self.bracket],
            "method": self.method.value,
            "evaluations": int(self.evaluations),
            "witness": w,
            "flags": {k: _plain(v) for k, v in self.flags.items()},
        }


def _plain(v):
    if isinstance(v, (np.floating, np.integer, np.bool_)):
        return v.item()
    if isinstance(v, np.ndarray):
        return v.tolist()
    if isinstance(v, (bool, int, float, str)) or v is None:
        return v
    return float(v)


def _require_multiplicative(model):
    if model.epsilon_mode is not EpsilonMode.MULTIPLICATIVE:
        raise InvalidModelError(f"{model.name}: method needs a multiplicative model")


# -- single system ------------------------------------------------------------------


def single_threshold_minratio(model: SystemModel, grid_size=10**4) -> ThresholdResult:
    """min over 0 < x < 1 of x / f(g(x)), with the minimizer as witness.

    A grid scan seeds golden-section refinement; when the stationarity
    function f(x) - x f'(x) changes sign around the minimizer the witness is
    polished to a root of it.
    """
    _require_multiplicative(model)
    lo, hi = model.domain
    xs = np.linspace(lo, hi, grid_size + 2)[1:]
    fx = np.asarray(model.fg(xs), dtype=float)
    if not np.any(fx > 0):
        raise DegenerateModelError(f"{model.name}: f(g(x)) vanishes on the whole domain")
    with np.errstate(divide="ignore"):
        ratio = np.where(fx > 0, xs / np.where(fx > 0, fx, 1.0), np.inf)
    k = int(np.argmin(ratio))
    a, b = xs[max(k - 1, 0)], xs[min(k + 1, xs.size - 1)]

    def rat(t):
        v = float(model.fg(t))
        return t / v if v > 0 else np.inf

    def stationarity(t):
        return float(model.fg(t)) - t * float(model.fg_prime(t))

    x0, _, evals = golden_section(rat, a, b, tol=1e-12)
    evals += grid_size
    sa, sb = stationarity(a), stationarity(b)
    if sa * sb < 0:
        x0 = brentq(stationarity, a, b, xtol=1e-15, rtol=4 * np.finfo(float).eps)
    value = rat(x0)
    return ThresholdResult(
        value=value,
        bracket=(value, value),
        method=Method.MIN_RATIO,
        evaluations=evals,
        witness=x0,
        flags={"stationarity_residual": abs(stationarity(x0))},
    )


def single_predicate(model, max_iter=DEFAULT_MAX_ITER, de_tol=DEFAULT_TOL):
    x0 = model.domain[1]

    def converges(eps):
        return iterate_single(model, x0, eps, max_iter=max_iter, tol=de_tol, record_every=0).converged_to_zero

    return converges


def _bisect_threshold(pred, lo, hi, tol, method, witness_fn=None):
    if tol <= 0:
        raise ParameterError("threshold tolerance must be positive")
    if not pred(lo):
        raise DegenerateModelError(
            f"predicate false at epsilon={lo}; the model violates f(g(x); 0) = 0"
        )
    if pred(hi):
        return ThresholdResult(hi, (hi, hi), method, 2, None, [(lo, True), (hi, True)])
    a, b, hist = bisect_predicate(pred, lo, hi, tol)
    hist = [(lo, True), (hi, False)] + hist
    return ThresholdResult(
        value=(a + b) / 2,
        bracket=(a, b),
        method=method,
        evaluations=len(hist),
        witness=witness_fn(b) if witness_fn else None,
        history=hist,
    )


def single_threshold_de(model, tol=DEFAULT_EPS_TOL, max_iter=DEFAULT_MAX_ITER, de_tol=DEFAULT_TOL):
    """Bisection on 'the recursion from the worst state converges to zero'."""
    return _bisect_threshold(
        single_predicate(model, max_iter, de_tol), 0.0, 1.0, tol, Method.SINGLE_DE
    )


# -- potential threshold -----------------------------------------------------------------


def _polished_min(model, grid, values, epsilon, quad_points):
    k = int(np.argmin(values))
    if 0 < k < grid.size - 1:
        x, u, _ = golden_section(
            lambda t: potential_1d(model, t, epsilon, quad_points), grid[k - 1], grid[k + 1], tol=1e-10
        )
        if u < values[k]:
            return x, u
    return float(grid[k]), float(values[k])


def potential_min(model, epsilon, grid_size=10**3, quad_points=DEFAULT_QUAD_POINTS):
    """(argmin, min) of U(.; eps) over the domain, grid scan plus golden polish."""
    grid = np.linspace(*model.domain, grid_size)
    values = potential_1d(model, grid, epsilon, quad_points)
    return _polished_min(model, grid, values, epsilon, quad_points)


def potential_threshold(
    model,
    grid_size=10**3,
    tol=DEFAULT_EPS_TOL,
    quad_points=DEFAULT_QUAD_POINTS,
    eps_max=1.0,
    slack=POTENTIAL_SLACK,
):
    """Largest eps with min_x U(x; eps) >= -slack, by bisection over eps."""
    grid = np.linspace(*model.domain, grid_size)
    if model.epsilon_mode is EpsilonMode.MULTIPLICATIVE:
        p, q = potential_parts(model, grid, quad_points)

        def values(eps):
            return p - eps * q
    else:
        def values(eps):
            return potential_1d(model, grid, eps, quad_points)

    def minimum(eps):
        return _polished_min(model, grid, values(eps), eps, quad_points)

    def pred(eps):
        return minimum(eps)[1] >= -slack

    res = _bisect_threshold(pred, 0.0, eps_max, tol, Method.POTENTIAL, lambda b: minimum(b)[0])
    return res


def ldpc_potential_ratio(l, r, x):
    """Parameter at which U(x; eps) = 0 for the closed-form (l, r) potential."""
    q = (1 - (1 - x) ** (r - 1)) ** l / l
    return closed_form_ldpc(l, r, x, 0) / q


def _mp_grid_min(fn, grid, mp):
    vals = [fn(x) for x in grid]
    k = min(range(len(vals)), key=vals.__getitem__)
    a, b = grid[max(k - 1, 0)], grid[min(k + 1, len(grid) - 1)]
    x, v, evals = golden_section(fn, a, b, tol=mp.mpf(10) ** (-(mp.dps // 2)), max_iter=10 * mp.dps)
    if vals[k] < v:
        x, v = grid[k], vals[k]
    return x, v, evals + len(grid)


def ldpc_potential_threshold(l, r, dps=60, grid_size=2000):
    """Potential threshold of the (l, r) erasure recursion in extended precision.

    U(x; eps) is affine in eps, so the threshold is min over x in (0, 1] of
    the root ``ldpc_potential_ratio``.  Values are mpmath numbers: for large
    degrees the distance to l/r falls far below double precision.
    """
    import mpmath

    with mpmath.workdps(dps):
        grid = [mpmath.mpf(k) / grid_size for k in range(1, grid_size + 1)]
        x, v, evals = _mp_grid_min(lambda t: ldpc_potential_ratio(l, r, t), grid, mpmath.mp)
        return ThresholdResult(
            value=+v,
            bracket=(+v, +v),
            method=Method.POTENTIAL,
            evaluations=evals,
            witness=+x,
            flags={"dps": dps},
        )


def ldpc_potential_min(l, r, epsilon, dps=60, grid_size=2000):
    """(argmin, min) over [0, 1] of the closed-form potential, in extended precision."""
    import mpmath

    with mpmath.workdps(dps):
        eps = mpmath.mpf(epsilon)
        grid = [mpmath.mpf(k) / grid_size for k in range(0, grid_size + 1)]
        x, v, _ = _mp_grid_min(lambda t: closed_form_ldpc(l, r, t, eps), grid, mpmath.mp)
        return +x, +v


# -- coupled threshold -----------------------------------------------------------------


def coupled_threshold_de(
    model,
    cfg: CoupledConfig,
    tol=DEFAULT_EPS_TOL,
    max_iter=DEFAULT_MAX_ITER,
    de_tol=DEFAULT_TOL,
):
    """Bisection on 'the anchored chain started from all ones converges to zero'.

    A circular chain has no boundary to seed convergence, so its threshold is
    the single-system one; that case is answered by single_threshold_de.
    """
    if cfg.boundary is Boundary.CIRCULAR:
        res = single_threshold_de(model, tol, max_iter, de_tol)
        res.method = Method.COUPLED_DE
        res.flags["circular_short_circuit"] = True
        return res

    def run(eps):
        return run_coupled(model, cfg, None, eps, max_iter=max_iter, tol=de_tol, record_every=0)

    res = _bisect_threshold(
        lambda eps: run(eps).converged_to_zero,
        0.0,
        1.0,
        tol,
        Method.COUPLED_DE,
        lambda b: run(b).final,
    )
    res.flags.update(cfg.as_dict())
    return res


# -- interference canceler ------------------------------------------------------------


def cancelation_threshold(model: SystemModel, n_scan=10**4) -> ThresholdResult:
    """Largest load alpha for which x <- alpha g(x) + s2 stays at its low fixed point.

    Stationary points of R(x) = (x - s2) / g(x) on (s2, x_max) are the roots
    of g(x) - (x - s2) g'(x); the threshold is the smallest R among them.
    Without an interior stationary point R is monotone and the value at the
    domain end is returned with ``flags['at_boundary']`` set.
    """
    if model.params.get("kind") != "cancelation":
        raise InvalidModelError(f"{model.name} is not a canceler model")
    s2 = model.params["sigma2"]
    x_max = model.domain[1]
    g, gp = model.g, model.g_prime
    xs = np.linspace(s2, x_max, n_scan + 1)[1:]

    def stat(x):
        return float(g(x)) - (x - s2) * float(gp(x))

    def ratio(x):
        return (x - s2) / float(g(x))

    sv = np.array([stat(x) for x in xs])
    roots = [float(xs[i]) for i in np.flatnonzero(sv == 0.0)]
    for i in np.flatnonzero(sv[:-1] * sv[1:] < 0):
        roots.append(brentq(stat, xs[i], xs[i + 1], xtol=1e-15))
    flags = {"stationary_points": len(roots)}
    if not roots:
        flags["at_boundary"] = True
        val = ratio(x_max)
        return ThresholdResult(val, (val, val), Method.STATIONARY_SCAN, n_scan, x_max, flags=flags)
    vals = [ratio(x) for x in roots]
    k = int(np.argmin(vals))
    x0, a0 = roots[k], vals[k]
    flags["at_boundary"] = False
    flags["fixed_point_residual"] = abs(a0 * float(g(x0)) + s2 - x0)
    flags["tangency_residual"] = abs(a0 * float(gp(x0)) - 1.0)
    return ThresholdResult(a0, (a0, a0), Method.STATIONARY_SCAN, n_scan, x0, flags=flags)
