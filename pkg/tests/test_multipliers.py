import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from spherelab.errors import DegenerateFit, SupportOverlap, UnsupportedDimension
from spherelab.multipliers import (
    approx_residual, cutoff_1d, decay_fit, decay_grid, decomposition_check, decomposition_terms,
    dyadic_moduli, e1_eval, e2_eval, e2_moduli, fit_decay_exponent, fourier_decay_sup,
    frequency_samples, m_eval, m_eval_direct, omega_eval, omega_eval_direct, omega_hat,
    omega_hat_direct, omega_lj, sphere_ft, sphere_ft_quadrature, sphere_volume_factor, u_factor,
    v_factor, zeta,
)
from spherelab.seqfact import lambda_value

# ---------------------------------------------------------------- cutoff


def test_zeta_examples():
    assert zeta(np.zeros(5)) == 1.0
    assert zeta([0.3, 0, 0, 0, 0]) == 0.0
    # at |t| = 0.15 the two exp(-1/u) arguments are both 1/2
    assert abs(zeta([0.15, 0, 0, 0, 0]) - 0.5) < 1e-12
    assert zeta([0.1, -0.1, 0.05, 0, 0.1]) == 1.0
    assert zeta([0.2, 0, 0, 0, 0]) == 0.0


@given(st.lists(st.floats(-1, 1), min_size=1, max_size=6))
def test_zeta_properties(x):
    x = np.array(x)
    v = zeta(x)
    assert 0.0 <= v <= 1.0
    assert v == zeta(-x)
    assert math.isclose(v, float(np.prod(cutoff_1d(x))))
    if np.all(np.abs(x) <= 0.1):
        assert v == 1.0
    if np.any(np.abs(x) >= 0.2):
        assert v == 0.0


def test_cutoff_monotone():
    t = np.linspace(0, 0.3, 3001)
    assert np.all(np.diff(cutoff_1d(t)) <= 0)


# ---------------------------------------------------------------- sphere transform


def test_sphere_ft_examples():
    assert sphere_ft(5, 0.0) == 1.0
    # mpmath quadrature of the marginal density (3/4)(1 - u^2), 30 digits
    assert abs(sphere_ft(5, 1.0) - (-0.0759908877317533285829)) < 1e-14
    assert abs(sphere_ft(5, 0.3) - 0.686930730064059446634) < 1e-14


@pytest.mark.parametrize("t", [1e-6, 0.05, 0.5, 1.7, 7.3])
def test_sphere_ft_three_dims(t):
    z = 2 * math.pi * t
    assert abs(sphere_ft(3, t) - math.sin(z) / z) < 1e-12


@pytest.mark.parametrize("n", [2, 3, 4, 5, 6, 7, 8, 9])
def test_sphere_ft_matches_quadrature(n):
    for t in [0.0, 1e-4, 0.2, 1.0, 3.3, 11.0]:
        assert abs(sphere_ft(n, t) - sphere_ft_quadrature(n, t)) < 1e-9


def test_sphere_ft_near_zero_accuracy():
    # 40-digit mpmath values of 3 (sin z - z cos z) / z^3 around the series switch
    import mpmath
    mpmath.mp.dps = 40
    for t in [1e-5, 1.5e-4, 7.9e-3, 8.0e-3, 2e-2, 0.0795, 0.0796, 0.3]:
        z = 2 * mpmath.pi * mpmath.mpf(t)
        exact = 3 * (mpmath.sin(z) - z * mpmath.cos(z)) / z**3
        assert abs(sphere_ft(5, t) - float(exact)) < 1e-14


def test_sphere_ft_dimension():
    with pytest.raises(UnsupportedDimension):
        sphere_ft(1, 0.5)


def test_sphere_ft_decay():
    assert fourier_decay_sup(5, 1000.0, 200_001) <= 15


# ---------------------------------------------------------------- exact transform


def test_omega_hat_examples():
    assert omega_hat(2, 5, np.zeros(5)) == 1
    assert abs(omega_hat(1, 5, [0.5, 0, 0, 0, 0]) - 0.6) < 1e-15


@pytest.mark.parametrize("lam", [1, 2, 5, 24, 61])
def test_omega_hat_matches_enumeration(lam):
    xi = np.random.default_rng(lam).random((25, 5))
    assert np.max(np.abs(omega_hat(lam, 5, xi) - omega_hat_direct(lam, 5, xi))) < 1e-12


@pytest.mark.parametrize("n", [1, 2, 3, 4, 6, 7])
def test_omega_hat_other_dimensions(n):
    xi = np.random.default_rng(n).random((10, n))
    for lam in (9, 25):
        assert np.max(np.abs(omega_hat(lam, n, xi) - omega_hat_direct(lam, n, xi))) < 1e-12


def test_omega_hat_empty_sphere():
    from spherelab.errors import EmptySphere
    with pytest.raises(EmptySphere):
        omega_hat(3, 2, [0.1, 0.2])


def test_omega_hat_brute_loop():
    xi = np.random.default_rng(7).random(5)
    import itertools
    pts = [x for x in itertools.product(range(-2, 3), repeat=5) if sum(v * v for v in x) == 2]
    direct = sum(np.exp(2j * math.pi * np.dot(x, xi)) for x in pts) / len(pts)
    assert abs(omega_hat(2, 5, xi) - direct) < 1e-13


@given(st.integers(1, 300))
def test_omega_hat_real_and_bounded(lam):
    xi = np.random.default_rng(lam).random((8, 5))
    w = omega_hat(lam, 5, xi)
    assert np.all(np.abs(w.imag) <= 1e-9)
    assert np.all(np.abs(w) <= 1 + 1e-12)
    assert abs(omega_hat(lam, 5, np.zeros(5)) - 1) <= 1e-12


def test_volume_normalization():
    assert math.isclose(sphere_volume_factor(5), math.pi**2.5 / math.gamma(2.5))
    v = omega_hat(720, 5, np.zeros(5), normalization="volume")
    # r(720) / (vol * 720^{3/2}) is a truncated singular series near 0.74
    assert 0.6 < v.real < 0.9


# ---------------------------------------------------------------- multipliers


def test_omega_eval_examples():
    assert omega_eval(24, 1, np.zeros(5)) == 1
    assert omega_eval(24, 2, [0.25, 0, 0, 0, 0]) == 0


@pytest.mark.parametrize("q", range(1, 9))
@pytest.mark.parametrize("lam", [2, 24, 7])
def test_omega_locate_matches_direct(q, lam):
    if q > 5:
        xi = frequency_samples(3, q, 5, qmax=q, reps=1)[-12:]
    else:
        xi = frequency_samples(6, q, 5, qmax=q, reps=1)
    assert np.max(np.abs(omega_eval(lam, q, xi) - omega_eval_direct(lam, q, xi))) < 1e-9


def test_omega_at_half():
    xi = np.array([0.5, 0, 0, 0, 0])
    assert abs(omega_eval(2, 2, xi) - omega_eval_direct(2, 2, xi)) < 1e-15


@pytest.mark.parametrize("h", [0, 1, 2])
def test_m_locate_matches_direct(h):
    xi = frequency_samples(5, h, 5, qmax=1 << (h + 1))
    for lam in (24, 13):
        assert np.max(np.abs(m_eval(lam, h, xi) - m_eval_direct(lam, h, xi))) < 1e-9


def test_m_examples():
    assert m_eval(24, 0, np.zeros(5)) == 1
    xi = np.array([0.5, 0, 0, 0, 0])
    assert abs(m_eval(24, 1, xi) - m_eval_direct(24, 1, xi)) < 1e-15
    assert m_eval(24, 1, [0.37, 0.21, 0.11, 0.42, 0.29]) == 0


def test_support_overlap_guard():
    from spherelab.multipliers import _check_disjoint
    _check_disjoint(10.0**3, 15)
    with pytest.raises(SupportOverlap):
        _check_disjoint(1.0, 3)


def test_dyadic_moduli():
    assert list(dyadic_moduli(0)) == [1]
    assert list(dyadic_moduli(2)) == [4, 5, 6, 7]


def test_error_term_examples():
    assert e2_moduli(1) == [2]
    assert e2_moduli(2) == [4, 6, 8, 12, 24]
    assert e1_eval(2, 1, np.zeros(5)) == 0


def test_e2_matches_direct_sum():
    rng = np.random.default_rng(3)
    avec = rng.integers(0, 24, size=5)
    xi = np.mod(avec / 24 + 1e-4, 1.0)
    lam = lambda_value(3)
    direct = 0
    from spherelab.arithmetic import units
    from spherelab.multipliers import _piece
    for q in (4, 6, 8, 12, 24):
        direct += _piece(xi[None], q, lam, (24.0**2,), units(q), lam % q)[0]
    assert abs(e2_eval(3, 2, xi) - direct) < 1e-15


@pytest.mark.parametrize("l, j", [(2, 1), (3, 2), (1, 1), (2, 2)])
def test_decomposition_identity(l, j):
    assert decomposition_check(l, j, 100, seed=1).max_residual <= 1e-9


def test_decomposition_at_zero():
    rep = decomposition_check(3, 3, xi=np.zeros((1, 5)))
    assert rep.max_residual <= 1e-9
    parts = decomposition_terms(3, 3, np.zeros(5))
    assert abs(parts["omega"][0] - 5063 / 6912) < 1e-12


def test_decomposition_j_range():
    with pytest.raises(ValueError):
        decomposition_check(4, 4, 10)
    with pytest.raises(ValueError):
        decomposition_check(1, 2, 10)


@pytest.mark.parametrize("i", [1, 2])
def test_factorization(i):
    xi = frequency_samples(100, i, 5, qmax=lambda_value(i), reps=1)
    for l in range(i, 4):
        lam = lambda_value(l)
        assert np.max(np.abs(omega_lj(l, i, xi) - u_factor(i, xi) * v_factor(lam, i, xi))) < 1e-9


# ---------------------------------------------------------------- approximation


def test_approx_residual_trivial():
    assert approx_residual(1, np.zeros((1, 5)), H=0, normalization="count") == 0


def test_decay_grid_shape():
    g = decay_grid(500, 0)
    assert g.shape == (500, 5)
    assert np.all((g >= 0) & (g < 1))
    assert np.any(np.all(g == 0, axis=1))
    assert np.array_equal(g, decay_grid(500, 0))


def test_fit_decay_exponent():
    pairs = [(10, 1.0), (100, 0.1), (1000, 0.01)]
    assert abs(fit_decay_exponent(pairs) - 1.0) < 1e-12
    assert fit_decay_exponent([(2, 0.3), (5, 0.3), (9, 0.3)]) == 0.0
    with pytest.raises(DegenerateFit):
        fit_decay_exponent([(2, 0.3), (5, 0.3)])


def test_decay_fit_errors():
    with pytest.raises(DegenerateFit):
        decay_fit([24, 120], decay_grid(20))
    with pytest.raises(DegenerateFit) as err:
        decay_fit([24, 120, 720], np.zeros((1, 5)), H=0, normalization="count")
    assert err.value.report.excluded == [24, 120, 720]


def test_decay_fit_small():
    rep = decay_fit([24, 120, 720], decay_grid(60, 2))
    assert rep.window_h == [2, 3, 4]
    assert len(rep.pairs) == 3 and rep.fitted_delta is not None
