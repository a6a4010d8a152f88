import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from runnerlab.dissociation import NotDissociated, is_k_dissociated
from runnerlab.exact_ml import ml_exact
from runnerlab.fourier import (
    DiscreteMeasure,
    PhiSpec,
    RieszParseval,
    RieszSpec,
    fejer_coefficient,
    fejer_kernel,
    fejer_weighted_sum,
    integrate_discrete,
    integrate_riesz,
    lambda_coeff,
    min_phi,
    phi_hat,
    phi_hat_float,
    phi_value,
    riesz_below_one,
    riesz_float,
    riesz_quadrature_oracle,
    riesz_terms,
)

speed_sets = st.sets(st.integers(1, 20), min_size=1, max_size=4).map(sorted)
deltas = st.fractions(Fraction(1, 100), Fraction(1, 2), max_denominator=100)


def test_phi_value_examples():
    assert phi_value(PhiSpec([1, 2, 3], Fraction(1, 4)), Fraction(1, 4)) == 2
    assert phi_value(PhiSpec([4, 7, 9], Fraction(1, 10)), 0) == 3
    assert phi_value(PhiSpec([1], Fraction(1, 8)), Fraction(1, 2)) == 0


def test_min_phi_examples():
    assert min_phi(PhiSpec([1, 2, 3], Fraction(1, 4)))[0] == 1
    value, t = min_phi(PhiSpec([1, 2, 3], Fraction(1, 5)))
    assert value == 0 and phi_value(PhiSpec([1, 2, 3], Fraction(1, 5)), t) == 0
    assert min_phi(PhiSpec([1], Fraction(1, 2)))[0] == 1


def test_lambda_examples():
    lam = lambda_coeff(1, Fraction(1, 4))
    assert lam.contains(lam.center) and abs(float(lam.center) - 1 / math.pi) < 1e-30
    assert lam.radius < Fraction(1, 10**30)
    assert lambda_coeff(3, Fraction(1, 6)) == lambda_coeff(3, Fraction(1, 6)) and lambda_coeff(3, Fraction(1, 6)).is_exact
    assert lambda_coeff(3, Fraction(1, 6)).hi == 0
    assert lambda_coeff(-5, Fraction(2, 7)) == lambda_coeff(5, Fraction(2, 7))


def test_phi_hat_examples():
    spec = PhiSpec([1, 2, 3], Fraction(1, 5))
    assert phi_hat(spec, 0).value.is_exact and phi_hat(spec, 0).value.lo == Fraction(6, 5)
    assert phi_hat(PhiSpec([1], Fraction(1, 7)), 4).value == lambda_coeff(4, Fraction(1, 7))
    assert phi_hat(PhiSpec([2], Fraction(1, 7)), 3).value.hi == 0


@given(speed_sets, deltas, st.integers(1, 300))
def test_phi_hat_even_and_matches_float(V, delta, m):
    spec = PhiSpec(V, delta)
    exact = phi_hat(spec, m).value
    assert exact == phi_hat(spec, -m).value
    # independent float evaluation from the divisor formula
    direct = sum(math.sin(2 * math.pi * (m // v) * delta) / (math.pi * (m // v)) for v in V if m % v == 0)
    assert abs(float(exact.center) - direct) < 1e-12
    assert abs(phi_hat_float(V, delta, np.array([m]))[0] - direct) < 1e-12


def test_fejer_kernel():
    assert fejer_kernel(5, 0).lo == 5
    assert fejer_coefficient(7, 0) == 1
    assert fejer_coefficient(7, 9) == 0
    x = Fraction(1, 7)
    closed_form = (math.sin(5 * math.pi * x) / math.sin(math.pi * x)) ** 2 / 5
    assert abs(float(fejer_kernel(5, x).center) - closed_form) < 1e-12


def test_fejer_weighted_sums_extremal_eight():
    spec = PhiSpec(range(1, 9), Fraction(1, 9))
    for v in range(1, 9):
        assert fejer_weighted_sum(spec, v).lo >= Fraction(1, 100)


def test_fejer_statement_weights_flag():
    spec = PhiSpec(range(1, 5), Fraction(1, 5))
    assert fejer_weighted_sum(spec, 2, weights="statement") != fejer_weighted_sum(spec, 2)
    with pytest.raises(ValueError):
        fejer_weighted_sum(spec, 2, weights="other")
    with pytest.raises(ValueError):
        fejer_weighted_sum(spec, 9)


def test_integrate_discrete_examples():
    assert integrate_discrete(PhiSpec([1, 2, 3], Fraction(1, 4)), DiscreteMeasure.prime_units(5)) == Fraction(3, 2)
    assert integrate_discrete(PhiSpec([3, 8], Fraction(1, 9)), DiscreteMeasure(((0, 1),))) == 2
    with pytest.raises(ValueError):
        DiscreteMeasure(((0, Fraction(1, 2)),))


@given(speed_sets, st.sampled_from([5, 7, 11, 13, 17, 19, 23]))
def test_prime_unit_integral_formula(V, p):
    # at delta = ML, every unit j/p sees the same number of close residues per speed
    assume(all(v % p for v in V))
    delta = ml_exact(V).value
    got = integrate_discrete(PhiSpec(V, delta), DiscreteMeasure.prime_units(p))
    assert got == len(V) * Fraction(2 * math.floor(p * delta), p - 1)


@given(speed_sets)
def test_uniform_grids_approach_mean(V):
    delta = Fraction(1, 7)
    N = 2000
    got = integrate_discrete(PhiSpec(V, delta), DiscreteMeasure.uniform(Fraction(i, N) for i in range(N)))
    assert abs(got - 2 * delta * len(V)) <= Fraction(2 * sum(V), N)


@given(speed_sets, deltas)
def test_covering_equivalence(V, delta):
    assert (min_phi(PhiSpec(V, delta))[0] >= 1) == (delta >= ml_exact(V).value)


def test_riesz_spec_validation():
    with pytest.raises(NotDissociated):
        RieszSpec((1, 2), Fraction(1, 2))
    with pytest.raises(ValueError):
        RieszSpec((1, 3), Fraction(3, 2))
    R = RieszSpec((1, 3), 1)
    assert R.coefficient(0) == 1 and R.coefficient(4) == Fraction(1, 4) and R.coefficient(5) == 0


def test_riesz_weight_zero_gives_mean():
    spec = PhiSpec([2, 5, 7], Fraction(1, 6))
    total = integrate_riesz(spec, RieszSpec((1, 3), 0))
    assert total.is_exact and total.lo == 1


def test_riesz_against_quadrature_small_case():
    spec = PhiSpec([1, 3], Fraction(1, 2))
    riesz = RieszSpec((1, 3), 1)
    exact = integrate_riesz(spec, riesz)
    oracle = riesz_quadrature_oracle(spec, riesz, samples=10**4)
    assert exact.contains(2)
    assert oracle.lo <= 2 <= oracle.hi and oracle.radius < Fraction(1, 50)


def test_riesz_parts_and_float():
    spec = PhiSpec([1, 2, 3], Fraction(1, 5))
    riesz = RieszSpec((1, 3, 9), Fraction(1, 2))
    parts = riesz_terms(spec, riesz)
    assert parts.mean_term == Fraction(6, 5)
    assert parts.total == integrate_riesz(spec, riesz)
    assert abs(riesz_float(spec, riesz) - float(parts.total.center)) < 1e-12
    assert riesz_below_one(spec, riesz) == (parts.total.hi < 1)


dissociated = st.sets(st.integers(1, 200), min_size=1, max_size=3).map(sorted).filter(lambda D: is_k_dissociated(D, 2))


@settings(max_examples=15)
@given(speed_sets, deltas, dissociated, st.sampled_from([Fraction(1, 4), Fraction(1, 2), Fraction(1)]))
def test_parseval_agrees_with_quadrature(V, delta, D, w):
    spec, riesz = PhiSpec(V, delta), RieszSpec(tuple(D), w)
    a = integrate_riesz(spec, riesz)
    b = riesz_quadrature_oracle(spec, riesz, samples=2000)
    assert b.lo <= a.hi and a.lo <= b.hi


@given(speed_sets, dissociated, st.sampled_from([Fraction(1, 2), Fraction(1)]))
def test_riesz_density_nonnegative_with_unit_mass(V, D, w):
    R = RieszSpec(tuple(D), w)
    x = np.linspace(0, 1, 2001)
    dens = np.prod([1 - float(w) * np.cos(2 * np.pi * m * x) for m in D], axis=0)
    assert dens.min() >= -1e-12
    assert R.coefficient(0) == 1


@given(speed_sets, deltas, deltas, dissociated)
def test_riesz_integral_monotone_in_delta(V, d1, d2, D):
    lo, hi = sorted((d1, d2))
    P = RieszParseval(V, RieszSpec(tuple(D), 1))
    assert P.interval(lo).lo <= P.interval(hi).hi


@given(speed_sets, dissociated)
def test_riesz_integral_at_ml_is_at_least_one(V, D):
    ml = ml_exact(V).value
    assert integrate_riesz(PhiSpec(V, ml), RieszSpec(tuple(D), 1)).hi >= 1 - Fraction(1, 10**9)
