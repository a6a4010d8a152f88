import dataclasses
import math
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from runnerlab.certificates import (
    Method,
    NoPrimeFound,
    PrimeDividesSpeed,
    VerificationFailure,
    all_certificates,
    arccos_bound,
    best_certificate,
    best_prime_certificate,
    certify_exact,
    certify_good_prime,
    certify_prime_discrete,
    certify_reduced,
    certify_riesz_dissociated,
    certify_riesz_general,
    exclusion_search,
    find_good_prime,
    prime_bound,
    schedule_weight,
    certify_trivial,
    verify_certificate,
)
from runnerlab.core import SpeedSet
from runnerlab.dissociation import NotDissociated
from runnerlab.exact_ml import ml_exact
from runnerlab.reduction import NotPrime

speed_sets = st.sets(st.integers(1, 25), min_size=1, max_size=4).map(lambda s: SpeedSet(tuple(sorted(s))))


def _is_prime(p):
    return p >= 2 and all(p % d for d in range(2, math.isqrt(p) + 1))


def _sieve_good_prime(V, c, limit):
    n = len(V)
    for p in range(2, limit + 1):
        r = p % (2 * n)
        if _is_prime(p) and 2 <= r <= (1 - c) * 2 * n and all(v % p for v in V):
            return p
    return None


@pytest.mark.parametrize("V, bound", [([1, 2, 3], Fraction(1, 6)), ([5], Fraction(1, 2)), (range(1, 11), Fraction(1, 20))])
def test_trivial(V, bound):
    assert certify_trivial(V).bound == bound


def test_prime_examples():
    c = certify_prime_discrete([1, 2, 3], 5)
    assert c.bound == Fraction(1, 5) <= ml_exact([1, 2, 3]).value
    c = certify_prime_discrete([1, 2, 3, 4], 11)
    assert c.bound == Fraction(2, 11) <= ml_exact([1, 2, 3, 4]).value == Fraction(1, 5)
    with pytest.raises(PrimeDividesSpeed):
        certify_prime_discrete([5, 10], 5)
    with pytest.raises(NotPrime):
        certify_prime_discrete([1, 2], 9)


def test_good_prime_small_set_has_none():
    # residues of primes mod 6 are 1 or 5 beyond 3, and 2, 3 divide speeds
    assert _sieve_good_prime([1, 2, 3], Fraction(1, 2), 100) is None
    with pytest.raises(NoPrimeFound):
        find_good_prime([1, 2, 3], Fraction(1, 2), limit=100)


def test_good_prime_empty_window():
    with pytest.raises(NoPrimeFound):
        find_good_prime([2, 4, 6], Fraction(99, 100), limit=50)
    with pytest.raises(ValueError):
        find_good_prime([2, 4, 6], 1)


@given(speed_sets, st.sampled_from([Fraction(1, 4), Fraction(1, 2), Fraction(2, 3)]))
def test_good_prime_matches_sieve(V, c):
    expected = _sieve_good_prime(V, c, 300)
    if expected is None:
        with pytest.raises(NoPrimeFound):
            find_good_prime(V, c, limit=300)
    else:
        assert find_good_prime(V, c, limit=300) == expected
        cert = certify_good_prime(V, c, limit=300)
        assert cert.bound >= Fraction(1, 2 * V.n) + c / expected


def test_arccos_values():
    assert certify_riesz_dissociated([7]).bound == Fraction(1, 4)
    assert certify_riesz_dissociated([1, 2]).bound == Fraction(1, 6)
    cert = certify_riesz_dissociated([1, 3, 9, 27])
    assert abs(float(cert.bound) - math.acos(0.75) / (2 * math.pi)) < 1e-15
    assert cert.bound_interval.lo == cert.bound and cert.bound_interval.radius < Fraction(1, 2**60)
    for n in range(3, 12):
        b = arccos_bound(n)
        assert b.lo <= Fraction(math.acos(1 - 1 / n) / (2 * math.pi)) + Fraction(1, 10**15) and b.radius < Fraction(1, 10**17)
    with pytest.raises(NotDissociated):
        certify_riesz_dissociated([1, 2, 3])


def test_riesz_general_weight_zero_is_trivial():
    cert = certify_riesz_general([2, 5, 9], weights=[0])
    assert cert.bound == Fraction(1, 6)


@pytest.mark.parametrize("V", [(1, 3, 9), (1, 4, 16, 64), (2, 7, 40, 200)])
def test_riesz_general_beats_trivial_on_dissociated_sets(V):
    cert = certify_riesz_general(V, weights=[Fraction(1, 4), Fraction(1, 2), Fraction(1)])
    assert Fraction(1, 2 * len(V)) < cert.bound <= ml_exact(V).value
    assert verify_certificate(V, cert)
    assert {"T2", "T3", "grid", "frequencies"} <= set(cert.witness)


@settings(max_examples=20)
@given(speed_sets, st.sampled_from([24, 53]))
def test_exclusion_never_loses_ground_with_precision(V, bits):
    low = certify_riesz_general(V, [Fraction(1)], bits=bits, cap=bits).bound
    high = certify_riesz_general(V, [Fraction(1)], bits=128, cap=128).bound
    assert high >= low


def test_schedule_weight():
    assert schedule_weight(1, 1) == 1
    assert 0 <= schedule_weight(3, 10) <= 1
    assert schedule_weight(3, 10, C_prime=2) <= schedule_weight(3, 10)


def test_best_certificate_small():
    cert = best_certificate([1, 2, 3])
    assert cert.method is Method.EXACT and cert.bound == Fraction(1, 4)
    assert best_certificate([3, 5, 7]).bound == Fraction(1, 2)


def test_best_certificate_beyond_exact_budget():
    V = SpeedSet((1, 10**6, 10**9))
    cert = best_certificate(V, effort="quick")
    assert cert.method is not Method.EXACT
    assert cert.bound > Fraction(1, 6)
    assert verify_certificate(V, cert)


def test_reduced_certificate():
    V = SpeedSet((1001, 2003))
    cert = certify_reduced(V)
    assert cert.reduction is not None and cert.reduction.steps
    assert cert.bound == ml_exact(cert.reduction.final_model).value - cert.reduction.total_error
    assert cert.bound <= ml_exact(V).value
    assert verify_certificate(V, cert)
    assert cert.label.endswith("+Reduction")


@settings(max_examples=25)
@given(speed_sets)
def test_every_certificate_sound_and_verifies(V):
    ml = ml_exact(V).value
    for cert in all_certificates(V, "standard"):
        top = cert.bound_interval.hi if cert.bound_interval else cert.bound
        assert top <= ml
        assert verify_certificate(V, cert) is True


def test_best_prime_certificate_ties_to_smallest_prime():
    cert = best_prime_certificate([1, 2, 3], limit=50)
    best = max(prime_bound(3, p) for p in range(5, 51) if _is_prime(p))
    assert cert.bound == best
    assert cert.witness["p"] == min(p for p in range(5, 51) if _is_prime(p) and prime_bound(3, p) == best)


def test_tampered_bound_fails():
    cert = certify_prime_discrete([1, 2, 3, 4], 11)
    bad = dataclasses.replace(cert, bound=cert.bound + Fraction(1, 1000))
    result = verify_certificate([1, 2, 3, 4], bad)
    assert isinstance(result, VerificationFailure) and not result


def test_composite_prime_fails():
    cert = certify_prime_discrete([1, 2, 3, 4], 11)
    bad = dataclasses.replace(cert, witness={"p": 15, "r": 15 % 8})
    assert not verify_certificate([1, 2, 3, 4], bad)


def test_other_tampering_fails():
    exact = certify_exact([1, 2, 3])
    assert not verify_certificate([1, 2, 3], dataclasses.replace(exact, witness={"time": Fraction(1, 3)}))
    assert not verify_certificate([1, 2, 4], exact)
    riesz = certify_riesz_general([1, 3, 9], weights=[Fraction(1)])
    assert not verify_certificate([1, 3, 9], dataclasses.replace(riesz, bound=ml_exact([1, 3, 9]).value))
    dis = certify_riesz_dissociated([1, 3, 9, 27])
    assert not verify_certificate([1, 3, 9, 27], dataclasses.replace(dis, bound=dis.bound + Fraction(1, 10**6)))
    reduced = certify_reduced([1001, 2003])
    assert not verify_certificate([1001, 2003], dataclasses.replace(reduced, bound=reduced.bound + Fraction(1, 10)))
    assert not verify_certificate([1, 2, 3], dataclasses.replace(certify_trivial([1, 2, 3]), bound=Fraction(1, 5)))


def test_exclusion_search_grid():
    from runnerlab.fourier import RieszParseval, RieszSpec

    P = RieszParseval([1, 3, 9], RieszSpec((1, 3, 9), 1))
    bound, L = exclusion_search(P)
    assert L == 32 * 3 * 9 and bound.denominator * (L // bound.denominator) == L
    assert P.below_one(bound)
    assert not P.below_one(ml_exact([1, 3, 9]).value)
