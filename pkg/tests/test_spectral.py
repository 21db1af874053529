import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from scthresh.dynamics import CoupledConfig, window_average
from scthresh.errors import NonConvergenceError, ParameterError
from scthresh.models import make_ldpc_regular, scalar_fixed_points
from scthresh.spectral import (
    build_D,
    instability_test,
    linearization,
    matrix_rows,
    min_unstable_width,
    spectral_radius,
    verify_rho_lemma,
)

from conftest import EPS0


def test_width_one_is_identity():
    np.testing.assert_array_equal(build_D(6, 1), np.eye(6))


def test_hand_row():
    np.testing.assert_allclose(build_D(5, 2)[2], [0, 0.25, 0.5, 0.25, 0], atol=0)


@given(st.integers(1, 30), st.integers(1, 8))
def test_band_structure(L, w):
    D = build_D(L, w)
    i, j = np.indices(D.shape)
    np.testing.assert_array_equal(D, D.T)
    assert np.all(D[np.abs(i - j) >= w] == 0)
    band = np.abs(i - j) < w
    np.testing.assert_allclose(D[band], (w - np.abs(i - j)[band]) / w**2)
    sums = D.sum(axis=1)
    assert np.all(sums <= 1 + 1e-15)
    if L >= 2 * w - 1:
        np.testing.assert_allclose(sums[w - 1 : L - w + 1], 1.0, atol=1e-15)


def test_circular_rows_sum_to_one():
    for L, w in [(7, 3), (5, 3), (4, 4)]:
        np.testing.assert_allclose(build_D(L, w, circular=True).sum(axis=1), 1.0, atol=1e-15)


def test_D_matches_window_average():
    rng = np.random.default_rng(0)
    x = rng.random(13)
    for circular in (False, True):
        np.testing.assert_allclose(
            build_D(13, 3, circular) @ x, window_average(x, 3, "circular" if circular else "anchored"), atol=1e-15
        )


def test_identity_radius():
    rho, v = spectral_radius(np.eye(4))
    assert rho == pytest.approx(1.0, abs=1e-15)
    assert np.all(v > 0)


@given(arrays(np.float64, (6, 6), elements=st.floats(0.01, 1)))
def test_radius_matches_dense_eigensolver(M):
    rho, v = spectral_radius(M)
    assert rho == pytest.approx(np.max(np.abs(np.linalg.eigvals(M))), rel=1e-9)
    assert np.all(v >= 0)


def test_radius_rejects_negative_entries():
    with pytest.raises(ParameterError):
        spectral_radius(-np.eye(2))


def test_radius_budget():
    with pytest.raises(NonConvergenceError):
        spectral_radius(np.diag([2.0, 1.0]), max_iter=2)


def test_truncated_radius_below_one():
    # boundary rows of the anchored matrix lose mass
    for w in range(2, 7):
        rho, _ = spectral_radius(build_D(2 * w + 1, w))
        assert rho < 1 - 1e-3


def test_rho_lemma_on_row_stochastic_matrix():
    rows = verify_rho_lemma(range(1, 7), tol=1e-10)
    assert len(rows) == 12 and all(r.passed for r in rows)
    w4 = [r for r in rows if r.w == 4]
    assert [r.L for r in w4] == [9, 19] and all(r.leading_positive for r in w4)


@given(st.integers(2, 6), st.integers(0, 10))
def test_perron_vector_positive(w, extra):
    _, v = spectral_radius(build_D(2 * w + 1 + extra, w))
    assert np.all(v > 0)


# -- linearization ----------------------------------------------------------------------


def test_rows_and_diagonal(ldpc36):
    cfg = CoupledConfig(11, 3)
    rng = np.random.default_rng(5)
    x = rng.uniform(0.1, 0.9, 11)
    a, A = linearization(ldpc36, cfg, x, 0.45)
    D = build_D(11, 3)
    for i in range(11):
        np.testing.assert_array_equal(A[i], 0.45 * a[i] * D[i])
    np.testing.assert_allclose(np.diag(A), 0.45 * a / 3, rtol=1e-15)
    y = window_average(x, 3)
    np.testing.assert_allclose(a, ldpc36.fg_prime(y), rtol=1e-15)


def test_radius_linear_in_eps(ldpc36):
    cfg = CoupledConfig(11, 3)
    x = np.linspace(0.2, 0.8, 11)
    r1, _ = spectral_radius(linearization(ldpc36, cfg, x, 0.3)[1])
    r2, _ = spectral_radius(linearization(ldpc36, cfg, x, 0.6)[1])
    assert r2 == pytest.approx(2 * r1, rel=1e-10)


@given(arrays(np.float64, 15, elements=st.floats(0.05, 3)), st.sampled_from([0.3, 0.7]), st.booleans())
def test_perron_bounds_for_row_scaled_D(a, eps, circular):
    D = build_D(15, 3, circular)
    rho_d, _ = spectral_radius(D)
    rho, _ = spectral_radius(eps * a[:, None] * D)
    assert eps * a.min() * rho_d - 1e-10 <= rho <= eps * a.max() * rho_d + 1e-10


def test_constant_profile_gives_equality():
    D = build_D(15, 3, circular=True)
    rho, _ = spectral_radius(0.7 * 1.3 * D)
    assert rho == pytest.approx(0.7 * 1.3, abs=1e-10)


def test_stable_at_origin_below_threshold(ldpc36):
    rep = instability_test(ldpc36, CoupledConfig(33, 3), 0.44)
    assert rep.at_origin and not rep.has_unstable_eigenvalue


def test_width_one_reduces_to_scalar(ldpc36):
    eps = 0.47
    rep = instability_test(ldpc36, CoupledConfig(5, 1), eps)
    x0 = rep.fixed_point[0]
    assert rep.rho_A == pytest.approx(eps * ldpc36.fg_prime(x0), rel=1e-10)
    assert not rep.has_unstable_eigenvalue


def test_unstable_branch_candidate(ldpc36):
    eps = EPS0 + 0.02
    middle = scalar_fixed_points(ldpc36, eps)[1]
    L, w = 51, 5
    cand = np.full(L, middle)
    cand[:w] = cand[-w:] = 0.0
    rep = instability_test(ldpc36, CoupledConfig(L, w), eps, candidate=cand)
    assert rep.has_unstable_eigenvalue and rep.rho_A > 1
    assert np.all(rep.leading_vector >= 0)


def test_min_unstable_width(ldpc36):
    eps = EPS0 + 0.02
    middle = scalar_fixed_points(ldpc36, eps)[1]
    w, rep = min_unstable_width(ldpc36, eps, lambda L: np.full(L, middle), range(1, 6))
    assert w == 1 and rep.rho_A > 1


def test_coupled_fixed_point_above_threshold_is_stable(ldpc36):
    rep = instability_test(ldpc36, CoupledConfig(51, 5), 0.5)
    assert not rep.at_origin and rep.rho_A < 1


def test_matrix_dump_formats():
    kind, rows = matrix_rows(build_D(5, 2))
    assert kind == "dense" and len(rows) == 5 and len(rows[0]) == 5
    kind, rows = matrix_rows(build_D(100, 2))
    assert kind == "triplets" and len(rows) == 100 + 2 * 99
