import cmath
import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, strategies as st

from spherelab.arithmetic import (
    brute_residue_count, completed_sum_identity, completed_sum_sides, gauss_bound_check,
    gauss_F, gauss_F_direct, gauss_table, quad_gauss_1d, residue_count, units, zero_count,
    zero_count_bruteforce,
)
from spherelab.errors import FactorizationFailed, RangeExceeded


def test_units():
    assert units(1).tolist() == [0]
    assert units(12).tolist() == [1, 5, 7, 11]


@pytest.mark.parametrize("q", [1, 2, 3, 4, 6, 9, 12, 25])
def test_fft_table_matches_direct(q):
    t = gauss_table(q)
    for b in range(q):
        for a in range(q):
            assert abs(t.value(a, b) - quad_gauss_1d(a, b, q)) < 1e-9


def test_table_rows_read_only():
    row = gauss_table(7).row(3)
    with pytest.raises(ValueError):
        row[0] = 0


@given(st.integers(1, 6), st.integers(0, 50), st.lists(st.integers(0, 50), min_size=3, max_size=3))
def test_F_matches_direct(q, a, avec):
    assert abs(gauss_F(q, a, avec) - gauss_F_direct(q, a, avec)) < 1e-12


def test_F_examples():
    # |G(a, b; p)| = sqrt(p) at odd primes, so |F_3(1, 0)| = 3^{-5/2}
    assert abs(abs(gauss_F(3, 1, [0] * 5)) - 3**-2.5) < 1e-15
    # G(1, 0; 4) = 1 + i + 1 + i... the sum over s mod 4 of i^{s^2} = 2 + 2i
    assert abs(quad_gauss_1d(1, 0, 4) - (2 + 2j)) < 1e-12
    # G(a, 1; 4) vanishes for odd a: s and s + 2 cancel
    assert abs(gauss_F(4, 1, [1, 0, 0, 0, 0])) < 1e-15
    assert gauss_F(5, 0, [0] * 5) == 1


def test_F_dimension_check():
    with pytest.raises(ValueError):
        gauss_F(3, 1, [0, 0], n=5)


def test_bound_odd_primes():
    rep = gauss_bound_check(97, 5, moduli="odd_primes", samples=10, seed=0)
    assert abs(rep.max_scaled - 1.0) < 1e-9
    assert rep.evaluated > 0


def test_bound_at_four_is_not_one():
    # at q = 4 the 2-adic sums are larger: |G(1, 0; 4)| = 2 sqrt 2 = 4^{1/2} sqrt 2
    rep = gauss_bound_check(4, 5, moduli="all", avecs="zero")
    assert abs(rep.max_scaled - 2**2.5) < 1e-9


def test_bound_bad_options():
    with pytest.raises(ValueError):
        gauss_bound_check(1, 5)
    with pytest.raises(ValueError):
        gauss_bound_check(5, 5, moduli="even")


@pytest.mark.parametrize("q", range(1, 13))
def test_residue_count_brute(q):
    for c in range(q):
        assert residue_count(q, c, 3) == brute_residue_count(q, c, 3)


def test_completed_sum_small():
    for q in range(1, 16):
        left, right = completed_sum_sides(q, 5)
        assert np.max(np.abs(left - right)) < 1e-9
        assert completed_sum_identity(q, q - 1, 5) < 1e-9


@pytest.mark.parametrize("Q, count, normalized", [
    (2, 16, Fraction(1)),
    (24, 248832, Fraction(3, 4)),
    (40320, 1935915030282240000, Fraction(5063, 6912)),
])
def test_zero_count_values(Q, count, normalized):
    # counts from (1/m) sum_a G(a, 0; m)^5 over each prime power, multiplied
    rep = zero_count(Q, 5)
    assert rep.count == count
    assert rep.normalized == normalized


def test_zero_count_local_factors():
    rep = zero_count(40320, 5)
    assert rep.local == {128: 191889408, 9: 6723, 5: 625, 7: 2401}


@pytest.mark.parametrize("Q", [1, 2, 3, 4, 6, 8, 12, 24])
def test_zero_count_brute(Q):
    assert zero_count(Q, 5).count == zero_count_bruteforce(Q, 5)


def test_zero_count_large_primes():
    # Hensel lifting beyond the DP limit agrees with the DP below it
    from spherelab import arithmetic
    p = 4099
    assert zero_count(p, 5).count == p**4
    assert zero_count(p, 4).count == p**3 + (p - 1) * p  # p = 3 mod 4, n/2 even
    old = arithmetic.DP_MODULUS_LIMIT
    try:
        arithmetic.DP_MODULUS_LIMIT = 1
        for q in (9, 27, 25, 49, 81, 125):
            hensel = zero_count(q, 5).count
            arithmetic.DP_MODULUS_LIMIT = old
            assert hensel == zero_count(q, 5).count
            arithmetic.DP_MODULUS_LIMIT = 1
    finally:
        arithmetic.DP_MODULUS_LIMIT = old


def test_zero_count_limits():
    with pytest.raises(RangeExceeded):
        zero_count(10**12 + 39, 5)
    with pytest.raises(RangeExceeded):
        zero_count(2**13, 5)
    with pytest.raises(FactorizationFailed):
        from spherelab.seqfact import factorize
        factorize(1000003 * 1000033, limit=1000)


def test_zero_count_serializes():
    d = zero_count(24, 5).as_dict()
    assert d["normalized"] == "3/4" and d["local"] == {"8": 3072, "3": 81}


@given(st.integers(2, 30), st.integers(-100, 100))
def test_phase_of_gauss_sum_rows_is_periodic(q, b):
    assert np.allclose(gauss_table(q).row(b), gauss_table(q).row(b + q))
    assert cmath.isclose(gauss_table(q).value(b, 0), gauss_table(q).value(b + 5 * q, 0))
