from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from scthresh.dynamics import CoupledConfig, iterate_single
from scthresh.errors import InvalidModelError, ParameterError
from scthresh.models import make_ldpc_regular, scalar_fixed_points
from scthresh.potential import (
    ConstantMatrix,
    DiagonalGPrime,
    Identity,
    PotentialProfile,
    ScaledDiagonal,
    axis_path,
    check_gradient_symmetry,
    check_lyapunov_conditions,
    closed_form_ldpc,
    lyapunov_VB,
    make_field,
    potential_1d,
    potential_profile,
)

from conftest import EPS0, X0


def test_origin_is_zero(ldpc36):
    for eps in (0.0, 0.3, 1.0):
        assert potential_1d(ldpc36, 0.0, eps) == 0.0
        assert closed_form_ldpc(3, 6, 0.0, eps) == 0.0


@pytest.mark.parametrize("l,r", [(3, 6), (4, 8), (5, 10), (6, 12)])
def test_closed_form_vanishes_at_one_when_eps_is_design_rate(l, r):
    # exact rational arithmetic: U(1, l/r) = 1/r - (l/r)/l
    assert closed_form_ldpc(l, r, Fraction(1), Fraction(l, r)) == 0


@pytest.mark.parametrize("l,r", [(3, 6), (4, 8), (5, 10)])
@pytest.mark.parametrize("eps", [0.3, 0.45, 0.6])
def test_quadrature_matches_closed_form(l, r, eps):
    m = make_ldpc_regular(l, r)
    x = np.linspace(0, 1, 1001)
    np.testing.assert_allclose(potential_1d(m, x, eps), closed_form_ldpc(l, r, x, eps), atol=1e-8, rtol=0)


def test_hand_point(ldpc36):
    assert potential_1d(ldpc36, 0.5, 0.45) == pytest.approx(closed_form_ldpc(3, 6, 0.5, 0.45), abs=1e-8)


def test_stationary_at_threshold(ldpc36):
    h = 1e-5
    du = (potential_1d(ldpc36, X0 + h, EPS0) - potential_1d(ldpc36, X0 - h, EPS0)) / (2 * h)
    assert abs(du) < 1e-5
    assert abs(X0 - EPS0 * ldpc36.fg(X0)) < 1e-5


def test_quad_points_validated(ldpc36):
    with pytest.raises(ParameterError):
        potential_1d(ldpc36, 0.5, 0.4, quad_points=1)


@given(st.floats(0, 1), st.floats(0, 1), st.floats(0, 1))
def test_nonincreasing_in_eps(x, e1, e2):
    m = make_ldpc_regular(3, 6)
    lo, hi = min(e1, e2), max(e1, e2)
    assert potential_1d(m, x, hi, 256) <= potential_1d(m, x, lo, 256) + 1e-15


def test_profile_bookkeeping():
    prof = PotentialProfile(np.array([0.0, 0.5, 1.0, 1.5]), np.array([0.0, -1.0, -1.0, 2.0]), 0.3)
    assert prof.min_value == -1.0 and prof.argmin == 0.5


def test_profile_starts_at_zero(ldpc36):
    prof = potential_profile(ldpc36, 0.45, grid_size=101)
    assert prof.values[0] == 0.0 and prof.grid[0] == 0.0


def test_stationary_at_every_scalar_fixed_point(ldpc36):
    for eps in (0.45, 0.48):
        for p in scalar_fixed_points(ldpc36, eps)[1:]:
            assert abs(p - eps * ldpc36.fg(p)) < 1e-10
            integrand = ldpc36.g_prime(p) * (p - eps * ldpc36.fg(p))
            assert abs(integrand) < 1e-9


def test_decrease_along_trajectory_below_threshold(ldpc36):
    tr = iterate_single(ldpc36, 1.0, 0.40, max_iter=200)
    u = potential_1d(ldpc36, tr.states, 0.40)
    assert np.all(np.diff(u) < 0)


# -- matrix fields and V_B ----------------------------------------------------------------


def test_field_catalog(ldpc36):
    x = np.array([0.2, 0.5, 0.9])
    assert np.allclose(Identity()(x), np.eye(3))
    np.testing.assert_allclose(np.diag(DiagonalGPrime(ldpc36)(x)), ldpc36.g_prime(x))
    B = ScaledDiagonal(ldpc36, [1.0, 2.0, 3.0])
    np.testing.assert_allclose(B.diag(x), [1, 2, 3] * ldpc36.g_prime(x))
    assert make_field("gprime", ldpc36).name == "gprime"
    for field in (Identity(), DiagonalGPrime(ldpc36), B):
        mat = field(x)
        assert np.allclose(mat, mat.T) and np.linalg.eigvalsh(mat).min() > 0
    with pytest.raises(InvalidModelError):
        ScaledDiagonal(ldpc36, [1.0, -1.0, 1.0])
    with pytest.raises(InvalidModelError):
        ConstantMatrix([[1.0, 2.0], [2.0, 1.0]])


def test_vb_at_origin(ldpc36):
    cfg = CoupledConfig(5, 2)
    assert lyapunov_VB(ldpc36, cfg, DiagonalGPrime(ldpc36), np.zeros(5), 0.4) == 0.0


@pytest.mark.parametrize("folded", [False, True])
def test_vb_reduces_to_scalar_potential(folded):
    m = make_ldpc_regular(3, 6, folded=folded)
    cfg = CoupledConfig(1, 1)
    for x in (0.2, 0.6, 1.0):
        v = lyapunov_VB(m, cfg, DiagonalGPrime(m), np.array([x]), 0.45)
        assert v == pytest.approx(potential_1d(m, x, 0.45), abs=1e-8)


class _Zero(Identity):
    def diag(self, x):
        return np.zeros_like(np.asarray(x, dtype=float))


def test_vb_rejects_indefinite_field(ldpc36):
    cfg = CoupledConfig(2, 1)
    with pytest.raises(InvalidModelError):
        lyapunov_VB(ldpc36, cfg, _Zero(), np.ones(2) * 0.5, 0.4)


def test_scalar_symmetry_is_trivial(ldpc36):
    rep = check_gradient_symmetry(ldpc36, CoupledConfig(1, 1), DiagonalGPrime(ldpc36), np.array([0.4]), 0.45)
    assert rep.max_asymmetry == 0.0


def test_uncoupled_symmetry(ldpc36_folded):
    rng = np.random.default_rng(3)
    x = rng.uniform(0.1, 0.9, 6)
    rep = check_gradient_symmetry(
        ldpc36_folded, CoupledConfig(6, 1), DiagonalGPrime(ldpc36_folded), x, 0.45
    )
    assert rep.max_asymmetry <= 1e-6


@pytest.mark.parametrize("L,w", [(5, 2), (7, 3), (9, 3)])
def test_outside_average_has_a_true_potential(ldpc36, L, w):
    # with B = diag(g'), dh_i/dx_j = -g'(x_i) g'(x_j) sum_m eps f'(z_m) / w^2 over
    # windows m covering both i and j: symmetric in (i, j)
    rng = np.random.default_rng(L)
    x = rng.uniform(0.05, 0.95, L)
    cfg = CoupledConfig(L, w, "outside")
    B = DiagonalGPrime(ldpc36)
    assert check_gradient_symmetry(ldpc36, cfg, B, x, 0.47).max_asymmetry <= 1e-6
    straight = lyapunov_VB(ldpc36, cfg, B, x, 0.47)
    bent = lyapunov_VB(ldpc36, cfg, B, x, 0.47, path=axis_path(x, L // 2))
    assert straight == pytest.approx(bent, abs=1e-6)


def test_inside_average_asymmetry_is_measured(ldpc36):
    # averaging inside f(g(.)) with B = diag(g') is not a gradient field
    x = np.linspace(0.2, 0.8, 7)
    rep = check_gradient_symmetry(ldpc36, CoupledConfig(7, 3), DiagonalGPrime(ldpc36), x, 0.45)
    assert rep.max_asymmetry > 1e-3
    assert rep.jacobian.shape == (7, 7)


# -- Lyapunov condition checks ----------------------------------------------------------


def _scalar_check(model, eps, **kw):
    return check_lyapunov_conditions(model, CoupledConfig(1, 1), DiagonalGPrime(model), eps, **kw)


def test_conditions_hold_below_threshold(ldpc36):
    rep = _scalar_check(ldpc36, 0.40)
    assert rep.ok and rep.origin_value == 0.0


def test_decrease_fails_at_fixed_point(ldpc36):
    rep = _scalar_check(ldpc36, 0.45)
    x_star = scalar_fixed_points(ldpc36, 0.45)[-1]
    assert not rep.decrease_ok
    assert rep.worst_points["decrease"]["x"][0] == pytest.approx(x_star, abs=1e-6)


def test_positivity_fails_above_potential_threshold(ldpc36):
    rep = _scalar_check(ldpc36, 0.50)
    assert not rep.positivity_ok
    assert rep.worst_points["positivity"]["value"] < 0
    assert 0.4 < rep.worst_points["positivity"]["x"][0] < 0.5


def test_trivial_decrease_at_zero_eps(ldpc36):
    assert _scalar_check(ldpc36, 0.0).decrease_ok


def test_report_serializes(ldpc36):
    d = _scalar_check(ldpc36, 0.45, grid_size=101).as_dict()
    assert set(d["worst_points"]) == {"positivity", "decrease"}


def test_random_sampling_for_longer_chains(ldpc36):
    cfg = CoupledConfig(5, 2, "outside")
    rep = check_lyapunov_conditions(ldpc36, cfg, DiagonalGPrime(ldpc36), 0.40, n_random=200, path_points=64)
    assert rep.n_samples >= 200
    assert rep.positivity_ok
