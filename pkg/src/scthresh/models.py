"""Scalar system models: the (f, g, epsilon) triples driving every recursion.

A model describes one copy of the recursion

    x <- f(g(x); eps)

on a closed interval.  Two parameterizations are supported: in
``MULTIPLICATIVE`` mode ``f(g(x); eps) = eps * f(g(x))`` (the erasure-channel
form), in ``GENERIC`` mode ``f`` takes the parameter as a second argument.
"""

from __future__ import annotations

import enum
import functools
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable

import numpy as np
from scipy.interpolate import PchipInterpolator

from .errors import InvalidModelError, NumericDomainError

FD_STEP = 1e-5
MONOTONE_GRID = 2001


class EpsilonMode(str, enum.Enum):
    MULTIPLICATIVE = "multiplicative"
    GENERIC = "generic"


def _identity(x):
    return x


def _one(x):
    return np.ones_like(np.asarray(x, dtype=float))


def finite_difference(fn, x, lo, hi, step=FD_STEP):
    """Central difference of ``fn`` at ``x``; one-sided within ``step`` of lo/hi."""
    x = np.asarray(x, dtype=float)
    left = np.maximum(x - step, lo)
    right = np.minimum(x + step, hi)
    # near an endpoint one side collapses onto x, giving a one-sided difference
    return (fn(right) - fn(left)) / (right - left)


@dataclass(frozen=True)
class SystemModel:
    """Update maps of a single recursion plus derivatives and domain.

    ``f_prime``/``g_prime`` may be omitted; a finite-difference fallback is
    installed.  In GENERIC mode ``f`` and ``f_prime`` take ``(z, eps)`` and
    ``f_prime`` differentiates with respect to ``z``.
    """

    f: Callable
    g: Callable = _identity
    f_prime: Callable | None = None
    g_prime: Callable | None = None
    epsilon_mode: EpsilonMode = EpsilonMode.MULTIPLICATIVE
    domain: tuple[float, float] = (0.0, 1.0)
    name: str = "custom"
    default_epsilon: float | None = None
    strict: bool = False
    monotone: bool = True
    params: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        lo, hi = self.domain
        if not lo < hi:
            raise InvalidModelError(f"empty domain {self.domain!r}")
        object.__setattr__(self, "epsilon_mode", EpsilonMode(self.epsilon_mode))
        if self.g_prime is None:
            object.__setattr__(
                self, "g_prime", functools.partial(finite_difference, self.g, lo=lo, hi=hi)
            )
        if self.f_prime is None:
            object.__setattr__(self, "f_prime", self._fd_f_prime())
        self._check_invariants()

    def _fd_f_prime(self):
        zlo, zhi = float(self.g(self.domain[0])), float(self.g(self.domain[1]))
        if self.epsilon_mode is EpsilonMode.MULTIPLICATIVE:
            return functools.partial(finite_difference, self.f, lo=zlo, hi=zhi)
        return functools.partial(_fd_generic, self.f, zlo, zhi)

    def _check_invariants(self):
        grid = np.linspace(*self.domain, MONOTONE_GRID)
        gx = np.asarray(self.g(grid), dtype=float)
        if not np.all(np.isfinite(gx)):
            raise InvalidModelError(f"{self.name}: g is not finite on the domain")
        if self.monotone and np.any(np.diff(gx) < -1e-12):
            raise InvalidModelError(f"{self.name}: g is not nondecreasing on the domain")
        fx = np.asarray(self.outer(gx, self._probe_epsilon()), dtype=float)
        if not np.all(np.isfinite(fx)):
            raise InvalidModelError(f"{self.name}: f is not finite on g(domain)")
        if self.monotone and np.any(np.diff(fx) < -1e-12):
            raise InvalidModelError(f"{self.name}: f is not nondecreasing on g(domain)")
        if self.epsilon_mode is EpsilonMode.MULTIPLICATIVE:
            f0 = float(self.f(self.g(self.domain[0])))
            if abs(f0) > 1e-14:
                raise InvalidModelError(
                    f"{self.name}: f(g(0)) = {f0!r}; zero must be a fixed point"
                )

    def _probe_epsilon(self):
        return 1.0 if self.default_epsilon is None else self.default_epsilon

    def resolve_epsilon(self, epsilon):
        if epsilon is None:
            if self.default_epsilon is None:
                raise InvalidModelError(f"{self.name}: no epsilon given and no default")
            return self.default_epsilon
        return epsilon

    # -- maps -----------------------------------------------------------------

    def outer(self, z, epsilon):
        """f(z; eps) for already-transformed arguments z = g(x)."""
        if self.epsilon_mode is EpsilonMode.MULTIPLICATIVE:
            return epsilon * self.f(z)
        return self.f(z, epsilon)

    def outer_prime(self, z, epsilon):
        """d/dz f(z; eps)."""
        if self.epsilon_mode is EpsilonMode.MULTIPLICATIVE:
            return epsilon * self.f_prime(z)
        return self.f_prime(z, epsilon)

    def h(self, x, epsilon):
        """Unclamped composite update f(g(x); eps)."""
        return self.outer(self.g(x), epsilon)

    def h_prime(self, x, epsilon):
        return self.outer_prime(self.g(x), epsilon) * self.g_prime(x)

    def fg(self, x):
        """f(g(x)) without the parameter (MULTIPLICATIVE mode only)."""
        if self.epsilon_mode is not EpsilonMode.MULTIPLICATIVE:
            raise InvalidModelError(f"{self.name}: f(g(x)) needs a parameter in generic mode")
        return self.f(self.g(x))

    def fg_prime(self, x):
        return self.f_prime(self.g(x)) * self.g_prime(x)

    def is_convex(self, n=2001, tol=1e-12):
        """Second-difference test of convexity of x -> f(g(x); 1) on the domain."""
        grid = np.linspace(*self.domain, n)
        vals = np.asarray(self.h(grid, self._probe_epsilon()), dtype=float)
        return bool(np.all(np.diff(vals, 2) >= -tol))


def _fd_generic(f, lo, hi, z, epsilon):
    return finite_difference(lambda t: f(t, epsilon), z, lo, hi)


def evaluate(model: SystemModel, x, epsilon=None):
    """One application of the update map, clamped to the model domain.

    Works elementwise on arrays.  Raises NumericDomainError on NaN.
    """
    epsilon = model.resolve_epsilon(epsilon)
    y = model.h(x, epsilon)
    y_arr = np.asarray(y, dtype=float)
    if not np.isfinite(y_arr).all():
        raise NumericDomainError(
            f"{model.name}: non-finite update at x={x!r}, epsilon={epsilon!r}",
            x=x,
            epsilon=epsilon,
        )
    lo, hi = model.domain
    clamped = np.clip(y_arr, lo, hi)
    assert not model.strict or (
        y_arr.min(initial=lo) >= lo - 1e-12 and y_arr.max(initial=hi) <= hi + 1e-12
    ), f"{model.name}: clamping fired at x={x!r}, epsilon={epsilon!r}"
    if clamped.ndim == 0:
        return float(clamped)
    return clamped


# -- catalog ------------------------------------------------------------------


def _ldpc_f(x, l, r):
    return (1 - (1 - x) ** (r - 1)) ** (l - 1)


def _ldpc_f_prime(x, l, r):
    if l == 2:
        return (r - 1) * (1 - x) ** (r - 2)
    return (l - 1) * (1 - (1 - x) ** (r - 1)) ** (l - 2) * (r - 1) * (1 - x) ** (r - 2)


def _power(z, k):
    return z**k


def _power_prime(z, k):
    if k == 1:
        return np.ones_like(np.asarray(z, dtype=float))
    return k * z ** (k - 1)


def _check_node(x, r):
    return 1 - (1 - x) ** (r - 1)


def _check_node_prime(x, r):
    return (r - 1) * (1 - x) ** (r - 2)


def make_ldpc_regular(l: int, r: int, folded: bool = False) -> SystemModel:
    """Erasure-channel DE for the regular (l, r) ensemble.

    The composite update is f(g(x)) = [1 - (1-x)^(r-1)]^(l-1) either way.
    By default g is the check-node map 1 - (1-x)^(r-1) and f(z) = z^(l-1),
    which is the split under which the potential has its closed form.
    ``folded=True`` puts the whole composite into f and uses g = identity.
    """
    if int(l) != l or int(r) != r or l < 2 or r < 2:
        raise InvalidModelError(f"degrees must be integers >= 2, got l={l!r}, r={r!r}")
    l, r = int(l), int(r)
    if folded:
        maps = dict(
            f=functools.partial(_ldpc_f, l=l, r=r),
            f_prime=functools.partial(_ldpc_f_prime, l=l, r=r),
            g=_identity,
            g_prime=_one,
        )
    else:
        maps = dict(
            f=functools.partial(_power, k=l - 1),
            f_prime=functools.partial(_power_prime, k=l - 1),
            g=functools.partial(_check_node, r=r),
            g_prime=functools.partial(_check_node_prime, r=r),
        )
    return SystemModel(
        **maps,
        epsilon_mode=EpsilonMode.MULTIPLICATIVE,
        name=f"ldpc:{l},{r}" + (":folded" if folded else ""),
        strict=True,
        params={"kind": "ldpc", "l": l, "r": r, "folded": bool(folded)},
    )


def _affine(z, alpha, sigma2):
    return alpha * z + sigma2


def _affine_prime(z, alpha):
    return alpha * np.ones_like(np.asarray(z, dtype=float))


def make_cancelation(g, sigma2, alpha, g_prime=None, x_max=None, name=None) -> SystemModel:
    """Variance recursion x <- alpha * g(x) + sigma2 of an interference canceler.

    ``alpha`` (the load) plays the role of epsilon; the value given here is
    only the default used when evaluate() is called without one.  g need not
    be monotone (1/(1+x) is a typical choice), so the monotonicity check is
    skipped; the map is nondecreasing exactly when g is.
    """
    if sigma2 < 0:
        raise InvalidModelError(f"sigma2 must be >= 0, got {sigma2!r}")
    if alpha < 0:
        raise InvalidModelError(f"alpha must be >= 0, got {alpha!r}")
    if x_max is None:
        x_max = 1.0 + sigma2
    probe = np.asarray(g(np.linspace(0.0, x_max, MONOTONE_GRID)), dtype=float)
    if not np.all(np.isfinite(probe)):
        raise InvalidModelError("g must be bounded on the domain")
    return SystemModel(
        f=functools.partial(_affine, sigma2=sigma2),
        g=g,
        f_prime=_affine_prime,
        g_prime=g_prime,
        epsilon_mode=EpsilonMode.GENERIC,
        domain=(0.0, float(x_max)),
        name=name or "cancelation",
        default_epsilon=float(alpha),
        monotone=False,
        params={"kind": "cancelation", "sigma2": float(sigma2), "alpha": float(alpha)},
    )


def _inv1p(x):
    return 1.0 / (1.0 + x)


def _inv1p_prime(x):
    return -1.0 / (1.0 + x) ** 2


def _expneg(x):
    return np.exp(-np.asarray(x, dtype=float))


def _expneg_prime(x):
    return -np.exp(-np.asarray(x, dtype=float))


def _square(x):
    return x * x


def _square_prime(x):
    return 2 * x


def _hill(x):
    # increasing sigmoid, bounded by 1; yields a bistable canceler
    return x * x / (0.04 + x * x)


def _hill_prime(x):
    return 0.08 * x / (0.04 + x * x) ** 2


def _const(x):
    return np.ones_like(np.asarray(x, dtype=float))


def _zero(x):
    return np.zeros_like(np.asarray(x, dtype=float))


# name -> (g, g') for canceler models built from the command line
CANCELATION_G = {
    "identity": (_identity, _one),
    "inv1p": (_inv1p, _inv1p_prime),
    "expneg": (_expneg, _expneg_prime),
    "square": (_square, _square_prime),
    "hill": (_hill, _hill_prime),
    "const": (_const, _zero),
}


# -- table models ---------------------------------------------------------------


def read_table(path):
    """Read a two-column ``x value`` table; returns (name, x, values)."""
    path = Path(path)
    name = path.stem
    rows = []
    with open(path) as fh:
        for lineno, line in enumerate(fh, 1):
            text = line.strip()
            if not text:
                continue
            if text.startswith("#"):
                if not rows and name == path.stem:
                    name = text.lstrip("#").strip() or name
                continue
            parts = text.split()
            if len(parts) != 2:
                raise InvalidModelError(f"{path}:{lineno}: expected two columns")
            try:
                rows.append((float(parts[0]), float(parts[1])))
            except ValueError as exc:
                if not rows:
                    # a bare first line is the model name
                    name = text
                    continue
                raise InvalidModelError(f"{path}:{lineno}: {exc}") from None
    if len(rows) < 3:
        raise InvalidModelError(f"{path}: need at least 3 samples")
    data = np.array(rows)
    x, v = data[:, 0], data[:, 1]
    dx = np.diff(x)
    if np.any(dx <= 0) or not np.allclose(dx, dx[0], rtol=1e-6, atol=1e-12):
        raise InvalidModelError(f"{path}: x column must be a uniform increasing grid")
    return name, x, v


def write_table(path, name, x, values):
    with open(path, "w") as fh:
        fh.write(f"# {name}\n")
        for xi, vi in zip(x, values):
            fh.write(f"{float(xi)!r} {float(vi)!r}\n")


def load_table_model(f_path, g_path=None) -> SystemModel:
    """Multiplicative model from sampled tables (monotone cubic interpolation)."""
    name, xf, vf = read_table(f_path)
    f = PchipInterpolator(xf, vf, extrapolate=False)
    if g_path is None:
        g, g_prime = _identity, _one
    else:
        gname, xg, vg = read_table(g_path)
        name = f"{name}/{gname}"
        g = PchipInterpolator(xg, vg, extrapolate=False)
        g_prime = g.derivative()
        domain = (float(xg[0]), float(xg[-1]))
    domain = (float(xf[0]), float(xf[-1])) if g_path is None else domain
    return SystemModel(
        f=f,
        g=g,
        f_prime=f.derivative(),
        g_prime=g_prime,
        epsilon_mode=EpsilonMode.MULTIPLICATIVE,
        domain=domain,
        name=name,
        params={"kind": "table", "f": str(f_path), "g": None if g_path is None else str(g_path)},
    )


def scalar_fixed_points(model: SystemModel, epsilon, n=20001):
    """All roots of x - f(g(x); eps) on the domain, located by sign changes."""
    from scipy.optimize import brentq

    grid = np.linspace(*model.domain, n)
    q = grid - np.asarray(model.h(grid, epsilon), dtype=float)
    roots = [float(grid[i]) for i in np.flatnonzero(q == 0.0)]
    for i in np.flatnonzero(q[:-1] * q[1:] < 0):
        roots.append(brentq(lambda t: t - float(model.h(t, epsilon)), grid[i], grid[i + 1], xtol=1e-15))
    return sorted(set(roots))


def ldpc_capacity_bound(l, r):
    """Erasure rate l/r at which the design rate 1 - l/r meets capacity."""
    return l / r


__all__ = [
    "EpsilonMode",
    "SystemModel",
    "evaluate",
    "make_ldpc_regular",
    "make_cancelation",
    "load_table_model",
    "read_table",
    "write_table",
    "finite_difference",
    "scalar_fixed_points",
    "CANCELATION_G",
]
