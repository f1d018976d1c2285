import cmath
import itertools

import numpy as np
import pytest
from hypothesis import given, strategies as st

from kapfree.gf_core import (
    STREAM_DIFFERENCE_SET,
    STREAM_MONTE_CARLO,
    Character,
    FpScalar,
    FpVector,
    NonInvertibleError,
    all_points,
    char_value,
    check_modulus,
    draw_rng,
    fp_inv,
    inv_mod,
    is_prime,
    log_p,
    pack_points,
    sample_vector,
)

SMALL_PRIMES = [2, 3, 5, 7]


def test_is_prime_matches_trial_division():
    for m in range(200):
        naive = m >= 2 and all(m % q for q in range(2, m))
        assert is_prime(m) == naive


@pytest.mark.parametrize("bad", [0, 1, 4, 9, 15, (1 << 16) + 1])
def test_check_modulus_rejects(bad):
    with pytest.raises(ValueError):
        check_modulus(bad)


def test_fp_inv_examples():
    assert fp_inv(FpScalar(2, 5)) == FpScalar(3, 5)
    assert fp_inv(FpScalar(1, 2)) == 1
    with pytest.raises(NonInvertibleError, match="non-invertible"):
        fp_inv(FpScalar(0, 3))
    with pytest.raises(ZeroDivisionError):
        inv_mod(7, 7)


@pytest.mark.parametrize("p", SMALL_PRIMES)
def test_field_axioms_exhaustive(p):
    F = [FpScalar(a, p) for a in range(p)]
    zero, one = FpScalar(0, p), FpScalar(1, p)
    for a, b, c in itertools.product(F, repeat=3):
        assert (a + b) + c == a + (b + c)
        assert (a * b) * c == a * (b * c)
        assert a * (b + c) == a * b + a * c
    for a, b in itertools.product(F, repeat=2):
        assert a + b == b + a
        assert a * b == b * a
    for a in F:
        assert a + zero == a and a * one == a
        assert a + (-a) == zero
        if a.value:
            assert a * a.inv() == one
            assert a * inv_mod(a.value, p) == one
            assert (a / a) == one


def test_scalar_modulus_mismatch():
    with pytest.raises(ValueError):
        FpScalar(1, 3) + FpScalar(1, 5)


def test_scalar_negative_power():
    assert FpScalar(3, 7) ** -1 == fp_inv(FpScalar(3, 7))
    assert FpScalar(3, 7) ** 6 == 1


def test_vector_ops():
    u = FpVector([1, 2, 3], 5)
    v = FpVector([4, 4, 4], 5)
    assert (u + v).tolist() == [0, 1, 2]
    assert (u - v).tolist() == [2, 3, 4]
    assert (3 * u).tolist() == [3, 1, 4]
    assert u.dot(v) == (4 + 8 + 12) % 5
    assert FpVector([5, 10], 5).is_zero()
    assert hash(FpVector([1, 6], 5)) == hash(FpVector([1, 1], 5))
    with pytest.raises(ValueError):
        u + FpVector([1, 2], 5)
    with pytest.raises(ValueError):
        u.entries[0] = 2


def test_character_examples():
    assert abs(char_value(Character(2), 1) - (-1)) < 1e-12
    for p in SMALL_PRIMES:
        assert char_value(Character(p), 0) == 1
    assert abs(sum(char_value(Character(5), a) for a in range(5))) < 1e-12
    with pytest.raises(ValueError):
        char_value(Character(5), FpScalar(1, 3))
    with pytest.raises(ValueError):
        Character(5, 0)


@pytest.mark.parametrize("p", [2, 3, 5, 7, 11, 13])
def test_character_orthogonality(p):
    chi = Character(p)
    for t in range(p):
        avg = sum(chi(a * t) for a in range(p)) / p
        assert abs(avg - (1 if t == 0 else 0)) < 1e-12


@given(st.sampled_from([3, 5, 7, 11]), st.integers(1, 10), st.integers(0, 100))
def test_character_table_matches_scalar(p, g, a):
    g = g % (p - 1) + 1
    chi = Character(p, g)
    assert abs(chi.table()[a % p] - chi(a)) < 1e-12
    assert abs(abs(chi(a)) - 1) < 1e-12
    assert abs(chi(a) - cmath.exp(2j * cmath.pi * g * a / p)) < 1e-12


def test_sampling_determinism():
    a1 = sample_vector(6, 7, draw_rng(42, STREAM_MONTE_CARLO, 0))
    a2 = sample_vector(6, 7, draw_rng(42, STREAM_MONTE_CARLO, 0))
    b = sample_vector(6, 7, draw_rng(42, STREAM_MONTE_CARLO, 1))
    c = sample_vector(6, 7, draw_rng(42, STREAM_DIFFERENCE_SET, 0))
    assert a1 == a2
    assert a1 != b and a1 != c


def test_sampling_is_independent_of_draw_order():
    forward = [sample_vector(4, 5, draw_rng(9, 0, i)).tolist() for i in range(8)]
    backward = [sample_vector(4, 5, draw_rng(9, 0, i)).tolist() for i in reversed(range(8))]
    assert forward == backward[::-1]


def test_sampling_uniform_bit():
    rng = draw_rng(2024, 0, 0)
    ones = sum(sample_vector(1, 2, rng).entries[0] for _ in range(10_000))
    sigma = (10_000 * 0.25) ** 0.5
    assert abs(ones - 5000) <= 3 * sigma


def test_sampling_rejects_empty():
    with pytest.raises(ValueError):
        sample_vector(0, 3, draw_rng(0, 0, 0))
    with pytest.raises(ValueError):
        draw_rng(-1, 0, 0)


@pytest.mark.parametrize("p,n", [(2, 3), (3, 2), (5, 2), (7, 1)])
def test_points_roundtrip(p, n):
    P = all_points(p, n)
    assert P.shape == (p**n, n)
    assert np.array_equal(pack_points(P, p), np.arange(p**n))
    assert sorted(map(tuple, P.tolist())) == list(itertools.product(range(p), repeat=n))
    # first coordinate most significant
    assert P[1].tolist() == [0] * (n - 1) + [1]


def test_log_p():
    assert log_p(1, 3) == 0.0
    assert log_p(243, 3) == 5.0
    assert log_p(9, 2) == pytest.approx(3.169925001442312)
    with pytest.raises(ValueError):
        log_p(0, 2)
