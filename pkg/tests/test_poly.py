import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from lemnikit.errors import DivisionNearZero
from lemnikit.poly import (
    CriticalKind,
    Polynomial,
    bound_value,
    critical_points,
    derivative,
    evaluate,
    find_roots,
    polar_derivative,
    proper_critical_points,
    root_separation,
    value_and_derivative,
)

from oracles import mp_bound_value, random_polynomial, sympy_critical_points, sympy_roots

COUNTER = Polynomial((0, 0, -0.75, 0.5))  # z^3/2 - 3z^2/4


def test_evaluate_matches_numpy_polyval():
    P = Polynomial((1 - 2j, 0.5, 3j, -1, 2))
    z = np.array([0.3 + 0.1j, -1.2, 2j, 1e3])
    ref = np.polyval(np.array(P.coeffs[::-1]), z)
    assert np.allclose(evaluate(P, z), ref, rtol=1e-14)
    assert evaluate(P, 0.3 + 0.1j) == pytest.approx(ref[0], rel=1e-14)


def test_counterexample_values():
    # P(2) = 4 - 3 = 1 and P'(2) = 3*4/2 - 3*2/2 = 3 by hand
    p, dp = value_and_derivative(COUNTER, 2.0)
    assert p == pytest.approx(1.0, abs=0)
    assert dp == pytest.approx(3.0, abs=0)
    assert bound_value(COUNTER, 0, 2.0) == 6.0
    assert polar_derivative(COUNTER, 0, 2.0) == pytest.approx(3 * 1 - 2 * 3)


def test_derivative_coefficients():
    P = Polynomial((5, 4, 3, 2))
    assert derivative(P).coeffs == (4, 6, 6)
    assert derivative(derivative(derivative(P))).coeffs == (12,)


def test_trailing_zeros_trimmed_and_constants_rejected():
    assert Polynomial((1, 2, 0, 0)).degree == 1
    with pytest.raises(ValueError):
        Polynomial((3,))
    with pytest.raises(ValueError):
        Polynomial((0, 0))
    with pytest.raises(ValueError):
        Polynomial((1, float("nan")))


def test_json_round_trip_and_number_forms():
    P = Polynomial((1 + 2j, -0.5, 3))
    Q = Polynomial.from_json(json.dumps(P.to_json()))
    assert Q == P
    assert Polynomial.from_json({"coeffs": [-1, 0, 1]}).coeffs == (-1, 0, 1)
    for bad in ({"coeffs": []}, {"coeffs": [0, 0]}, {"coef": [1, 2]}, {"coeffs": ["x", 1]}):
        with pytest.raises(ValueError):
            Polynomial.from_json(bad)


@pytest.mark.parametrize("seed", range(8))
def test_roots_match_sympy(seed):
    rng = np.random.default_rng(seed)
    P = random_polynomial(rng, int(rng.integers(2, 9)))
    got = find_roots(P)
    ref = sympy_roots(P)
    assert got.total == P.degree
    assert np.allclose(np.sort_complex(got.locations), np.sort_complex(np.array(ref)), atol=1e-10)


def test_multiple_roots_are_clustered():
    P = Polynomial.from_roots([1, 1, 1, -2j, -2j, 0.5])
    rs = find_roots(P)
    assert sorted(rs.multiplicities.tolist()) == [1, 2, 3]
    for z, m in rs:
        expect = {3: 1, 2: -2j, 1: 0.5}[m]
        assert abs(z - expect) < 1e-9


def test_monomial_root_at_origin():
    rs = find_roots(Polynomial.monomial(5, 2 + 1j))
    assert rs.roots == ((0j, 5),)


def test_critical_points_counterexample():
    cps = critical_points(COUNTER)
    kinds = {round(cp.location.real, 12): cp for cp in cps}
    assert kinds[0].kind is CriticalKind.ZERO_COINCIDENT
    assert kinds[1].kind is CriticalKind.PROPER
    assert kinds[1].critical_value == pytest.approx(0.25, rel=1e-14)


def test_critical_points_z2_minus_1():
    (cp,) = critical_points(Polynomial((-1, 0, 1)))
    assert cp.location == 0 and cp.proper and cp.critical_value == 1.0


@pytest.mark.parametrize("seed", range(5))
def test_critical_points_match_sympy(seed):
    rng = np.random.default_rng(100 + seed)
    P = random_polynomial(rng, int(rng.integers(3, 8)))
    got = np.sort_complex(np.array([cp.location for cp in critical_points(P)]))
    ref = np.sort_complex(np.array(sympy_critical_points(P)))
    assert np.allclose(got, ref, atol=1e-9)
    for cp in critical_points(P):
        assert cp.critical_value == pytest.approx(abs(evaluate(P, cp.location)), rel=1e-12)


def test_bound_value_matches_multiprecision():
    rng = np.random.default_rng(3)
    P = random_polynomial(rng, 6)
    a = find_roots(P).locations[0]
    z = rng.normal(size=20) + 1j * rng.normal(size=20)
    got = bound_value(P, a, z)
    ref = [mp_bound_value(P, a, w) for w in z]
    assert np.allclose(got, ref, rtol=1e-12)


def test_bound_value_at_zero_raises():
    with pytest.raises(DivisionNearZero):
        bound_value(Polynomial((-1, 0, 1)), 1, -1.0)


def test_root_separation():
    sep = root_separation(find_roots(Polynomial.from_roots([0, 1, 3])))
    assert np.allclose(sep, [1, 1, 2])


coef = st.complex_numbers(min_magnitude=0.1, max_magnitude=10, allow_nan=False, allow_infinity=False)


@settings(max_examples=40, deadline=None)
@given(st.lists(st.complex_numbers(max_magnitude=2, allow_nan=False, allow_infinity=False), min_size=1, max_size=7),
       coef, st.complex_numbers(max_magnitude=3, allow_nan=False, allow_infinity=False))
def test_polar_derivative_identity(roots, lead, z):
    # n P - (z - a) P' vanishes identically for P = c (z - a)^n and in general
    # equals P times (n - (z - a) P'/P)
    P = Polynomial.from_roots(roots, lead)
    a = roots[0]
    p, dp = value_and_derivative(P, z)
    assert polar_derivative(P, a, z) == pytest.approx(P.degree * p - (z - a) * dp, abs=1e-9 * (1 + abs(p) + abs(dp)))
    M = Polynomial.monomial(len(roots), lead)
    assert abs(polar_derivative(M, 0, z)) <= 1e-12 * (1 + abs(evaluate(M, z))) * len(roots)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10_000), st.integers(2, 8), st.floats(0.1, 10.0))
def test_bound_value_scale_invariant(seed, n, s):
    rng = np.random.default_rng(seed)
    P = random_polynomial(rng, n)
    a = complex(find_roots(P).locations[0])
    z = a + 0.7 * np.exp(2j * np.pi * rng.uniform(size=5))
    assert np.allclose(bound_value(P.scaled(s), a, z), bound_value(P, a, z), rtol=1e-12)


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 10_000), st.integers(2, 8))
def test_root_round_trip(seed, n):
    rng = np.random.default_rng(seed)
    roots = np.array(sorted(rng.uniform(-1, 1, n) + 1j * rng.uniform(-1, 1, n), key=lambda z: (z.real, z.imag)))
    if np.min(np.abs(roots[:, None] - roots[None, :]) + 9 * np.eye(n)) < 0.05:
        return
    rs = find_roots(Polynomial.from_roots(roots))
    assert np.allclose(np.sort_complex(rs.locations), np.sort_complex(roots), atol=1e-9)


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 10_000), st.integers(2, 8))
def test_critical_point_count(seed, n):
    rng = np.random.default_rng(seed)
    P = random_polynomial(rng, n)
    assert sum(cp.multiplicity for cp in critical_points(P)) == n - 1
    assert all(cp.critical_value > 0 for cp in proper_critical_points(P))
