"""Bracketing searches used by the threshold routines.

Both helpers use only comparisons and arithmetic, so they work unchanged on
mpmath numbers when extra precision is needed.
"""

from __future__ import annotations

INV_PHI = 0.6180339887498949


def golden_section(fn, lo, hi, tol=1e-12, max_iter=500):
    """Minimize a unimodal ``fn`` on [lo, hi]; returns (x, fn(x), evaluations)."""
    inv_phi = INV_PHI if isinstance(lo, float) else (lo * 0 + 5) ** 0.5 / 2 - lo * 0 - 0.5
    a, b = lo, hi
    c = b - inv_phi * (b - a)
    d = a + inv_phi * (b - a)
    fc, fd = fn(c), fn(d)
    evals = 2
    while abs(b - a) > tol and evals < max_iter:
        if fc <= fd:
            b, d, fd = d, c, fc
            c = b - inv_phi * (b - a)
            fc = fn(c)
        else:
            a, c, fc = c, d, fd
            d = a + inv_phi * (b - a)
            fd = fn(d)
        evals += 1
    x = (a + b) / 2
    fx = fn(x)
    evals += 1
    # the bracket ends are candidates too (minimum on the boundary)
    for cand in (lo, hi):
        fv = fn(cand)
        evals += 1
        if fv < fx:
            x, fx = cand, fv
    return x, fx, evals


def bisect_predicate(pred, lo, hi, tol):
    """Largest parameter with ``pred`` true, assuming pred(lo) and not pred(hi).

    Returns (lo, hi, history) with ``hi - lo <= tol``; ``history`` records
    every (parameter, outcome) pair evaluated.
    """
    history = []
    while hi - lo > tol:
        mid = (lo + hi) / 2
        ok = pred(mid)
        history.append((mid, ok))
        if ok:
            lo = mid
        else:
            hi = mid
    return lo, hi, history
