"""Named check suites driven by the CLI: invariants, soundness and paper-checks.

Each suite yields CheckResult records; a suite passes when every record passes.
"""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass
from fractions import Fraction
from math import comb

from sympy import isprime, primerange

from .certificates import all_certificates, prime_bound, verify_certificate
from .core import SpeedSet
from .dissociation import dim2, dim2_minus, enumerate_Ek, is_k_dissociated
from .exact_ml import ml_exact, ml_grid_oracle
from .fourier import PhiSpec, RieszSpec, fejer_weighted_sum, integrate_riesz, min_phi, phi_hat
from .reduction import ResidueSet, dilate_model, rectify, rectify_exhaustive, reduce_model
from .sunflower import extract_dissociated_half, random_dissociated, random_sunflower_family


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    detail: str = ""

    def to_dict(self) -> dict:
        return {"name": self.name, "passed": self.passed, "detail": self.detail}


def _family(n_max: int, v_max: int):
    for n in range(1, n_max + 1):
        for combo in itertools.combinations(range(1, v_max + 1), n):
            yield SpeedSet(combo)


def _random_set(rng: random.Random, n_max: int, v_max: int) -> SpeedSet:
    n = rng.randint(1, n_max)
    return SpeedSet(tuple(sorted(rng.sample(range(1, v_max + 1), n))))


# -- soundness ----------------------------------------------------------------


def soundness(n_max: int = 4, v_max: int = 25, effort: str = "quick", verify: bool = True):
    """Every certificate bound is at most the exact ML, and verifies."""
    checked = 0
    worst = None
    for V in _family(n_max, v_max):
        ml = ml_exact(V).value
        for cert in all_certificates(V, effort):
            checked += 1
            top = cert.bound_interval.hi if cert.bound_interval else cert.bound
            if top > ml:
                worst = f"{cert.label} on {V}: {top} > {ml}"
                yield CheckResult("certificate <= ML", False, worst)
                return
            if verify and not verify_certificate(V, cert):
                yield CheckResult("certificate verifies", False, f"{cert.label} on {V}")
                return
    yield CheckResult("certificate <= ML", True, f"{checked} certificates on n <= {n_max}, max V <= {v_max}")


# -- reference values ---------------------------------------------------------


def reference_checks():
    values = [ml_exact(range(1, n + 1)).value for n in range(1, 9)]
    ok = all(v == Fraction(1, n + 1) for n, v in enumerate(values, start=1))
    yield CheckResult("ML({1..n}) = 1/(n+1), n <= 8", ok, " ".join(map(str, values)))

    ok = True
    for D in [(1,), (1, 3), (1, 3, 9), (1, 5, 25, 125), (2, 7, 40, 200, 1100)]:
        seen: set[int] = set()
        for k in range(len(D) + 1):
            shell = {s.value for s in enumerate_Ek(D, k)}
            ok &= len(shell) == comb(len(D), k) * 2**k and not (shell & seen)
            seen |= shell
    yield CheckResult("|E_k| = C(d,k) 2^k, shells disjoint", ok)

    ok = True
    for n in range(1, 101):
        for p in primerange(2, 10**4):
            r = p % (2 * n)
            if 2 <= r <= 2 * n:
                ok &= prime_bound(n, p) == Fraction(1, 2 * n) + (1 - Fraction(r, 2 * n)) / p
    yield CheckResult("ceil((p-1)/2n)/p = 1/(2n) + (1 - r/2n)/p", ok)

    ok = True
    for V in _family(3, 12):
        ml = ml_exact(V).value
        for p in primerange(2, 60):
            if all(v % p for v in V):
                ok &= ml >= prime_bound(V.n, p)
    yield CheckResult("prime-measure bound <= ML (n <= 3, max V <= 12)", ok)

    lows = []
    for n in range(4, 9):
        spec = PhiSpec(range(1, n + 1), Fraction(1, n + 1))
        lows.append(min(float(fejer_weighted_sum(spec, v).lo) for v in spec.speeds))
    yield CheckResult("Fejer-weighted sums >= 1/50", min(lows) >= 1 / 50, f"min {min(lows):.4f}")


# -- invariants -----------------------------------------------------------------


def invariants(seed: int = 42, rounds: int = 40):
    rng = random.Random(seed)

    ok, detail = True, ""
    for _ in range(rounds):
        V = _random_set(rng, 4, 30)
        ml = ml_exact(V).value
        lo = ml_grid_oracle(V, 4000)
        if not lo <= ml <= lo + Fraction(V.max, 4000):
            ok, detail = False, str(V)
    yield CheckResult("grid oracle brackets ML", ok, detail)

    ok, detail = True, ""
    for _ in range(rounds):
        V = _random_set(rng, 4, 20)
        ml = ml_exact(V).value
        above, _ = min_phi(PhiSpec(V, ml))
        below = min_phi(PhiSpec(V, ml * Fraction(99, 100)))[0] if ml > 0 else 1
        if above < 1 or below != 0:
            ok, detail = False, str(V)
    yield CheckResult("Phi >= 1 everywhere iff delta >= ML", ok, detail)

    ok = True
    for _ in range(rounds):
        V = _random_set(rng, 4, 20)
        spec = PhiSpec(V, Fraction(rng.randint(1, 50), 100))
        m = rng.randint(1, 200)
        ok &= phi_hat(spec, m).value == phi_hat(spec, -m).value
    yield CheckResult("Phi-hat is even", ok)

    ok, detail = True, ""
    for _ in range(rounds // 4):
        V = _random_set(rng, 4, 25)
        ml = ml_exact(V).value
        D = dim2(V).witness
        j = rng.randint(1, 5)
        riesz = RieszSpec(tuple(j * m for m in D), Fraction(rng.randint(0, 4), 4))
        if integrate_riesz(PhiSpec(V, ml), riesz).hi < 1 - Fraction(1, 10**9):
            ok, detail = False, f"{V} {riesz}"
    yield CheckResult("integral of Phi R >= 1 at delta = ML", ok, detail)

    ok, detail = True, ""
    for p in [q for q in range(101, 2000) if isprime(q)][: rounds // 2]:
        B = ResidueSet(p, rng.sample(range(1, p), rng.randint(1, 3)))
        d = dim2_minus(B.elements, modulus=p).dimension
        pig, ex = rectify(B, d), rectify_exhaustive(B)
        if not (pig.radius <= 8 * d * p ** (1 - 1 / (2 * d)) and ex.radius <= pig.radius):
            ok, detail = False, str(B)
    yield CheckResult("rectification radii", ok, detail)

    ok, detail = True, ""
    for _ in range(rounds // 2):
        V = SpeedSet(tuple(sorted(rng.sample(range(1, 10**4), 2))))
        trace = reduce_model(V, stop_radius=16)
        if ml_exact(V).value < ml_exact(trace.final_model).value - trace.total_error:
            ok, detail = False, str(V)
        for step in trace.steps:
            _, err = dilate_model(step.before, step.prime, step.dilation_unit, step.ell)
            ok &= err == step.error_charge
    yield CheckResult("reduction transfer", ok, detail)

    ok = True
    for _ in range(rounds):
        _, B, S, X = random_sunflower_family(rng)
        out = extract_dissociated_half(B, S, X)
        ok &= 2 * len(out.chosen) >= len(B) and is_k_dissociated(out.shifted, 1)
    yield CheckResult("sunflower extraction", ok)

    ok = True
    for _ in range(rounds // 4):
        A = random_dissociated(rng, rng.randint(1, 6), 5000)
        ok &= is_k_dissociated(A, 2)
    yield CheckResult("random dissociated sets are 2-dissociated", ok)


SUITES = {"soundness": soundness, "paper-checks": reference_checks, "invariants": invariants}
