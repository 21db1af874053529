"""Coupling matrices, power iteration, and the linearized stability test.

At a fixed point x0 of the anchored chain the Jacobian of the update is
A = diag(eps * a_i) D with a_i = f'(g(y_i)) g'(y_i), y = D x0 and D the
triangular-kernel coupling matrix.  A nonzero fixed point with rho(A) > 1 is
unstable, so it cannot be a local minimum of the potential.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .dynamics import Boundary, CoupledConfig, find_fixed_point, window_average
from .errors import NonConvergenceError, ParameterError
from .models import EpsilonMode, SystemModel

MAX_POWER_ITER = 10**5


def build_D(L: int, w: int, circular: bool = False) -> np.ndarray:
    """D[i, j] = (w - |i - j|) / w^2 for |i - j| < w, else 0.

    Rows near the ends are truncated (entries outside 0..L-1 dropped) unless
    ``circular``, in which case the band wraps and every row sums to 1.
    """
    if L < 1 or w < 1:
        raise ParameterError("L and w must be >= 1")
    i = np.arange(L)
    diff = np.abs(i[:, None] - i[None, :])
    if circular:
        diff = np.minimum(diff, L - diff)
        D = np.zeros((L, L))
        # with L < 2w - 1 several offsets wrap onto the same entry
        for m in range(-(w - 1), w):
            D[i, (i + m) % L] += (w - abs(m)) / w**2
        return D
    return np.where(diff < w, (w - diff) / float(w * w), 0.0)


def spectral_radius(matrix, tol=1e-13, max_iter=MAX_POWER_ITER, seed=0):
    """Power iteration for a nonnegative matrix, started from the all-ones vector.

    Converged when successive Rayleigh quotients differ by less than ``tol``
    and the residual ||M v - rho v|| is below ``sqrt(tol)``.  Stalls are
    retried from a randomly perturbed start.  Returns (rho, v) with v >= 0,
    ||v|| = 1.
    """
    M = np.asarray(matrix, dtype=float)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise ParameterError("matrix must be square")
    if np.any(M < 0):
        raise ParameterError("matrix must be entrywise nonnegative")
    n = M.shape[0]
    rng = np.random.default_rng(seed)
    v = np.ones(n) / np.sqrt(n)
    rho = 0.0
    for restart in range(3):
        prev = np.inf
        for _ in range(max_iter):
            u = M @ v
            norm = np.linalg.norm(u)
            if norm == 0.0:
                return 0.0, v
            rho = float(v @ u)
            u /= norm
            if abs(rho - prev) < tol and np.linalg.norm(M @ u - rho * u) < max(np.sqrt(tol), 1e-12):
                return rho, np.abs(u)
            prev, v = rho, u
        v = np.abs(v + 1e-3 * rng.random(n))
        v /= np.linalg.norm(v)
    raise NonConvergenceError(
        f"power iteration did not converge (last estimate {rho!r})", state=v, residual=None
    )


@dataclass
class LinearizationReport:
    epsilon: float
    fixed_point: np.ndarray
    a: np.ndarray
    rho_A: float
    has_unstable_eigenvalue: bool
    leading_vector: np.ndarray
    at_origin: bool = False

    def as_dict(self):
        return {
            "epsilon": self.epsilon,
            "at_origin": self.at_origin,
            "rho_A": self.rho_A,
            "has_unstable_eigenvalue": self.has_unstable_eigenvalue,
            "fixed_point": self.fixed_point.tolist(),
            "a": self.a.tolist(),
            "leading_vector": self.leading_vector.tolist(),
        }


def linearization(model: SystemModel, cfg: CoupledConfig, x0, epsilon):
    """(a, A) at state ``x0``; in generic mode eps sits inside f' and a_i = A_ii w."""
    D = build_D(cfg.L, cfg.w, circular=cfg.boundary is Boundary.CIRCULAR)
    y = window_average(np.asarray(x0, dtype=float), cfg.w, cfg.boundary)
    z = model.g(y)
    if model.epsilon_mode is EpsilonMode.MULTIPLICATIVE:
        a = np.asarray(model.f_prime(z) * model.g_prime(y), dtype=float) * np.ones(cfg.L)
        A = epsilon * a[:, None] * D
    else:
        a = np.asarray(model.f_prime(z, epsilon) * model.g_prime(y), dtype=float) * np.ones(cfg.L)
        A = a[:, None] * D
    return a, A


def instability_test(model, cfg, epsilon, candidate=None, tol=1e-10, max_iter=10**6):
    """Spectral radius of the linearized update at a nonzero fixed point.

    The fixed point is the limit of the chain from all ones unless a
    ``candidate`` state is supplied.  A zero fixed point is reported as
    stable at the origin.
    """
    if candidate is None:
        x0 = find_fixed_point(model, cfg, epsilon, tol=tol, max_iter=max_iter)
    else:
        x0 = np.asarray(candidate, dtype=float)
    if not np.any(x0 > 0):
        z = np.zeros(cfg.L)
        return LinearizationReport(epsilon, z, z.copy(), 0.0, False, z.copy(), at_origin=True)
    a, A = linearization(model, cfg, x0, epsilon)
    rho, vec = spectral_radius(A)
    return LinearizationReport(epsilon, x0, a, rho, rho > 1.0, vec)


@dataclass
class RhoLemmaRow:
    w: int
    L: int
    rho_truncated: float
    rho_circular: float
    leading_positive: bool
    passed: bool


def verify_rho_lemma(w_range, tol=1e-10):
    """rho(D) = 1 checks for L = 2w+1 and 4w+3.

    The pass/fail verdict uses the circular (row-stochastic) matrix, for
    which rho = 1 exactly.  The truncated matrix, whose boundary rows sum to
    less than one, is reported alongside; its radius stays strictly below 1
    for w >= 2.
    """
    rows = []
    for w in w_range:
        if w < 1:
            raise ParameterError("w must be >= 1")
        for L in (2 * w + 1, 4 * w + 3):
            rho_t, vec_t = spectral_radius(build_D(L, w))
            rho_c, vec_c = spectral_radius(build_D(L, w, circular=True))
            positive = bool(np.all(vec_t > 0) and np.all(vec_c > 0))
            rows.append(RhoLemmaRow(w, L, rho_t, rho_c, positive, abs(rho_c - 1.0) <= tol))
    return rows


def min_unstable_width(model, epsilon, candidate_fn, w_range, L_fn=lambda w: 10 * w + 1):
    """Smallest w whose candidate fixed point linearizes with rho(A) > 1.

    ``candidate_fn(L)`` builds the candidate state for a chain of length L.
    Returns (w, report) or (None, None).
    """
    for w in w_range:
        L = L_fn(w)
        cfg = CoupledConfig(L, w)
        rep = instability_test(model, cfg, epsilon, candidate=candidate_fn(L))
        if rep.has_unstable_eigenvalue:
            return w, rep
    return None, None


def matrix_rows(M, dense_limit=64):
    """Rows for a matrix dump: dense for n <= dense_limit, else (i, j, value) triplets."""
    M = np.asarray(M)
    if M.shape[0] <= dense_limit:
        return "dense", [list(map(float, row)) for row in M]
    ii, jj = np.nonzero(M)
    return "triplets", [(int(i), int(j), float(M[i, j])) for i, j in zip(ii, jj)]
