"""Lower-bound certificates for ML(V) and an independent verifier.

Every method exhibits a probability measure mu on the torus with integral of Phi dmu
below 1 at some delta, which forces ML(V) > delta, or uses a direct argument that
reduces to one:

* TrivialUnion: Lebesgue measure, ML >= 1/(2n).
* PrimeDiscrete: uniform on j/p, ML >= ceil((p-1)/2n)/p when p divides no speed.
* RieszDissociated: for 1-dissociated V, 1 <= n (1 - cos 2 pi delta).
* RieszGeneral: a Riesz product on j * D for a 2-dissociated D subset of V, with the
  excluded delta found by binary search on an exact Parseval sum.
* Exact: the value of ml_exact and its witness time.

A certificate may also carry a ReductionTrace; its payload then certifies the final
model and the stated bound has the trace's exact error already subtracted.
"""

from __future__ import annotations

import math
from functools import lru_cache
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction

import numpy as np
from mpmath import iv
from sympy import isprime, primerange

from . import __version__
from .core import (
    DEFAULT_PRECISION,
    PRECISION_CAP,
    BoundedReal,
    RunnerLabError,
    SpeedSet,
    Undecided,
    as_speed_set,
    iv_from_fraction,
    precision,
)
from .dissociation import NotDissociated, dim2, find_relation
from .exact_ml import loneliness_at, ml_exact
from .fourier import RieszParseval, RieszSpec, phi_hat_float
from .reduction import NotPrime, ReductionTrace, reduce_model, verify_trace


class Method(str, Enum):
    TRIVIAL = "TrivialUnion"
    PRIME = "PrimeDiscrete"
    RIESZ_DISSOCIATED = "RieszDissociated"
    RIESZ_GENERAL = "RieszGeneral"
    EXACT = "Exact"


class PrimeDividesSpeed(RunnerLabError, ValueError):
    pass


class NoPrimeFound(RunnerLabError):
    pass


@dataclass(frozen=True)
class Certificate:
    speeds: SpeedSet
    method: Method
    bound: Fraction
    witness: dict = field(default_factory=dict)
    bound_interval: BoundedReal | None = None
    reduction: ReductionTrace | None = None
    version: str = __version__

    def __post_init__(self):
        object.__setattr__(self, "speeds", as_speed_set(self.speeds))
        object.__setattr__(self, "method", Method(self.method))
        object.__setattr__(self, "bound", Fraction(self.bound))

    @property
    def label(self) -> str:
        return self.method.value + ("+Reduction" if self.reduction else "")


@dataclass(frozen=True)
class VerificationFailure:
    reason: str

    def __bool__(self) -> bool:
        return False


# -- trivial and exact --------------------------------------------------------


def certify_trivial(V) -> Certificate:
    V = as_speed_set(V)
    return Certificate(V, Method.TRIVIAL, Fraction(1, 2 * V.n))


def certify_exact(V, budget: int = 10**7) -> Certificate:
    V = as_speed_set(V)
    res = ml_exact(V, budget=budget)
    return Certificate(V, Method.EXACT, res.value, {"time": res.witness_time})


# -- prime measures -----------------------------------------------------------


def prime_bound(n: int, p: int) -> Fraction:
    return Fraction(-(-(p - 1) // (2 * n)), p)


def certify_prime_discrete(V, p: int, c=None) -> Certificate:
    V = as_speed_set(V)
    if not isprime(p):
        raise NotPrime(f"{p} is not prime")
    for v in V:
        if v % p == 0:
            raise PrimeDividesSpeed(f"{p} divides the speed {v}")
    witness = {"p": p, "r": p % (2 * V.n)}
    if c is not None:
        witness["c"] = Fraction(c)
    return Certificate(V, Method.PRIME, prime_bound(V.n, p), witness)


def _in_window(r: int, n: int, c: Fraction) -> bool:
    return 2 <= r and r <= (1 - c) * 2 * n


def find_good_prime(V, c=Fraction(1, 2), limit: int = 1000) -> int:
    """Smallest prime p <= limit dividing no speed with p mod 2n in [2, (1-c) 2n]."""
    V = as_speed_set(V)
    c = Fraction(c)
    if not 0 < c < 1:
        raise ValueError("c must lie in (0, 1)")
    for p in primerange(2, limit + 1):
        if _in_window(p % (2 * V.n), V.n, c) and all(v % p for v in V):
            return int(p)
    raise NoPrimeFound(f"no prime up to {limit} avoids the speeds with residue in the window")


def certify_good_prime(V, c=Fraction(1, 2), limit: int = 1000) -> Certificate:
    return certify_prime_discrete(V, find_good_prime(V, c, limit), c)


def best_prime_certificate(V, limit: int = 1000) -> Certificate:
    """The largest prime-measure bound over primes up to ``limit`` (smallest p on ties)."""
    V = as_speed_set(V)
    best = None
    for p in primerange(2, limit + 1):
        if any(v % p == 0 for v in V):
            continue
        b = prime_bound(V.n, int(p))
        if best is None or b > best[0]:
            best = (b, int(p))
    if best is None:
        raise NoPrimeFound(f"every prime up to {limit} divides some speed")
    return certify_prime_discrete(V, best[1])


# -- dissociated sets ---------------------------------------------------------

_EXACT_ARCCOS = {1: Fraction(1, 4), 2: Fraction(1, 6)}


def _cos_2pi(x: Fraction, bits: int):
    with precision(bits):
        return BoundedReal.from_iv(iv.cos(2 * iv.pi * iv_from_fraction(x)))


@lru_cache(maxsize=None)
def arccos_bound(n: int, steps: int = 64, bits: int = DEFAULT_PRECISION) -> BoundedReal:
    """Enclosure [lo, hi] of arccos(1 - 1/n)/(2 pi) with lo certified <= the true value."""
    if n in _EXACT_ARCCOS:
        return BoundedReal.exact(_EXACT_ARCCOS[n])
    target = 1 - Fraction(1, n)
    lo, hi = Fraction(0), Fraction(1, 4)
    for _ in range(steps):
        mid = (lo + hi) / 2
        verdict = _cos_2pi(mid, bits).compare(target)
        if verdict == 1:
            lo = mid
        elif verdict == -1:
            hi = mid
        else:
            break
    return BoundedReal(lo, hi)


def certify_riesz_dissociated(V, bits: int = DEFAULT_PRECISION) -> Certificate:
    V = as_speed_set(V)
    relation = find_relation(V.speeds, 1)
    if relation is not None:
        raise NotDissociated(f"{V} is not 1-dissociated: {relation.coefficients}")
    enclosure = arccos_bound(V.n, bits=bits)
    return Certificate(V, Method.RIESZ_DISSOCIATED, enclosure.lo, {"n": V.n}, enclosure)


# -- general Riesz products ---------------------------------------------------


def schedule_weight(d: int, n: int, C_prime=Fraction(1)) -> Fraction:
    """d / (n (C' log n)^7), clipped to [0, 1], as a rational."""
    if n <= 1:
        return Fraction(1)
    w = d / (n * (float(C_prime) * math.log(n)) ** 7)
    return Fraction(min(max(w, 0.0), 1.0)).limit_denominator(10**6)


def choose_dilation(V: SpeedSet, D, delta: Fraction) -> int:
    """The j in [100n] maximising sum_{m in D} Phi-hat(j m) in floating point."""
    js = np.arange(1, 100 * V.n + 1, dtype=np.int64)
    score = np.zeros(js.shape)
    for m in D:
        score += phi_hat_float(V.speeds, delta, js * m)
    return int(js[int(np.argmax(score))])


def _certified_below(P: RieszParseval, delta: Fraction, bits: int, cap: int) -> bool:
    try:
        return P.below_one(delta, bits, cap)
    except Undecided:
        return False


def exclusion_search(
    P: RieszParseval, bits: int = DEFAULT_PRECISION, cap: int = PRECISION_CAP
) -> tuple[Fraction, int]:
    """Largest a/L (L = 32 n max V) with a rigorously certified integral below 1.

    Returns (bound, L); bound falls back to 1/(2n) when nothing above it is excluded.
    """
    V = P.speeds
    L = 32 * V.n * V.max
    a_lo, a_hi = L // (2 * V.n), L // 2
    lo, hi = a_lo, a_hi
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if P.approx(Fraction(mid, L)) < 1 - 1e-9:
            lo = mid
        else:
            hi = mid
    if lo > a_lo and not _certified_below(P, Fraction(lo, L), bits, cap):
        top = lo
        lo = a_lo
        while top - lo > 1:
            mid = (lo + top) // 2
            if _certified_below(P, Fraction(mid, L), bits, cap):
                lo = mid
            else:
                top = mid
    return Fraction(lo, L), L


def certify_riesz_general(
    V,
    weights=None,
    C_prime=Fraction(1),
    j: int | None = None,
    bits: int = DEFAULT_PRECISION,
    cap: int = PRECISION_CAP,
) -> Certificate:
    """Riesz-product exclusion on j * D, D a largest 2-dissociated subset of V.

    ``weights`` is a sequence of Riesz weights to try (default: the schedule weight);
    the best certified bound wins, the earlier weight on ties.
    """
    V = as_speed_set(V)
    D = dim2(V).witness
    if j is None:
        j = choose_dilation(V, D, Fraction(1, 2 * V.n))
    freqs = tuple(j * m for m in D)
    if weights is None:
        weights = [schedule_weight(len(D), V.n, C_prime)]
    best = None
    for w in weights:
        riesz = RieszSpec(freqs, Fraction(w))
        P = RieszParseval(V, riesz)
        bound, L = exclusion_search(P, bits, cap)
        if best is None or bound > best[0]:
            best = (bound, riesz, L, P)
    bound, riesz, L, P = best
    witness = {
        "dissociated_subset": tuple(D),
        "j": j,
        "frequencies": riesz.frequencies,
        "weight": riesz.weight,
        "grid": L,
    }
    if bound > Fraction(1, 2 * V.n):
        terms = P.terms(bound, bits)
        witness["T2"] = terms.first_shell.decimal()
        witness["T3"] = terms.higher_shells.decimal()
    return Certificate(V, Method.RIESZ_GENERAL, bound, witness)


# -- reduction ---------------------------------------------------------------


REDUCE_STOP_RADIUS = 64


def certify_reduced(
    V,
    stop_radius: int = REDUCE_STOP_RADIUS,
    prime_limit: int = 1000,
    exact_budget: int = 10**6,
) -> Certificate:
    """Reduce V to a denser model, certify the model, subtract the trace error."""
    V = as_speed_set(V)
    trace = reduce_model(V, stop_radius=stop_radius)
    model = trace.final_model
    candidates = [best_prime_certificate(model, prime_limit)]
    try:
        candidates.append(certify_exact(model, exact_budget))
    except RunnerLabError:
        pass
    inner = max(candidates, key=lambda c: c.bound)
    return Certificate(
        V, inner.method, inner.bound - trace.total_error, inner.witness, None, trace
    )


# -- orchestration ------------------------------------------------------------

EFFORT_SETTINGS = {
    "quick": {"exact_budget": 10**5, "prime_factor": 10, "weights": None, "reduce": False},
    "standard": {
        "exact_budget": 10**7,
        "prime_factor": 100,
        "weights": (None, Fraction(1, 4), Fraction(1, 2), Fraction(1)),
        "reduce": True,
    },
    "exhaustive": {
        "exact_budget": 10**8,
        "prime_factor": 1000,
        "weights": (None, Fraction(1, 8), Fraction(1, 4), Fraction(1, 2), Fraction(3, 4), Fraction(1)),
        "reduce": True,
    },
}


def all_certificates(V, effort: str = "standard", config=None) -> list[Certificate]:
    """Every applicable certificate; methods that do not apply are skipped."""
    V = as_speed_set(V)
    settings = EFFORT_SETTINGS[effort]
    C_prime = config.constant("C_prime") if config else Fraction(1)
    bits = config.precision_bits if config else DEFAULT_PRECISION
    cap = config.precision_cap if config else PRECISION_CAP
    exact_budget = min(settings["exact_budget"], config.candidate_budget) if config else settings["exact_budget"]
    prime_limit = settings["prime_factor"] * V.n + 100
    schedule = schedule_weight(dim2(V).dimension, V.n, C_prime) if V.n <= 24 else None
    weights = settings["weights"]
    if weights is not None:
        weights = [schedule if w is None else w for w in weights]

    attempts = [
        lambda: certify_trivial(V),
        lambda: certify_exact(V, exact_budget),
        lambda: best_prime_certificate(V, prime_limit),
        lambda: certify_riesz_dissociated(V, bits),
        lambda: certify_riesz_general(V, weights, C_prime, bits=bits, cap=cap),
    ]
    if settings["reduce"] and V.max > REDUCE_STOP_RADIUS:
        attempts.append(lambda: certify_reduced(V, prime_limit=prime_limit, exact_budget=exact_budget))
    out = []
    for attempt in attempts:
        try:
            out.append(attempt())
        except (RunnerLabError, ValueError):
            continue
    return out


def best_certificate(V, effort: str = "standard", config=None) -> Certificate:
    """Largest bound among applicable methods; ties go to the method name, unreduced first."""
    certs = all_certificates(V, effort, config)
    return min(certs, key=lambda c: (-c.bound, c.method.value, c.reduction is not None))


# -- verification -------------------------------------------------------------


def _verify_method(V: SpeedSet, method: Method, claim: Fraction, w: dict, bits: int):
    n = V.n
    if method is Method.TRIVIAL:
        if claim <= Fraction(1, 2 * n):
            return True
        return VerificationFailure(f"claimed {claim} exceeds 1/(2n) = {Fraction(1, 2 * n)}")

    if method is Method.EXACT:
        value = loneliness_at(V, Fraction(w["time"]))
        if claim <= value:
            return True
        return VerificationFailure(f"loneliness at the witness time is {value}, below {claim}")

    if method is Method.PRIME:
        p = int(w["p"])
        if not isprime(p):
            return VerificationFailure(f"{p} is not prime")
        if any(v % p == 0 for v in V):
            return VerificationFailure(f"{p} divides a speed")
        if int(w.get("r", p % (2 * n))) != p % (2 * n):
            return VerificationFailure(f"recorded residue does not match {p} mod {2 * n}")
        if "c" in w and not _in_window(p % (2 * n), n, Fraction(w["c"])):
            return VerificationFailure(f"{p} mod {2 * n} lies outside the residue window")
        value = prime_bound(n, p)
        if claim <= value:
            return True
        return VerificationFailure(f"prime measure gives {value}, below {claim}")

    if method is Method.RIESZ_DISSOCIATED:
        if find_relation(V.speeds, 1) is not None:
            return VerificationFailure("speeds are not 1-dissociated")
        if n in _EXACT_ARCCOS:
            ok = claim <= _EXACT_ARCCOS[n]
        else:
            # claim <= arccos(1 - 1/n)/(2 pi) iff cos(2 pi claim) >= 1 - 1/n, cos decreasing
            ok = claim <= 0 or (claim <= Fraction(1, 2) and _cos_2pi(claim, bits).compare(1 - Fraction(1, n)) == 1)
        return True if ok else VerificationFailure(f"cos(2 pi {claim}) is not certified >= 1 - 1/{n}")

    if method is Method.RIESZ_GENERAL:
        if claim <= Fraction(1, 2 * n):
            return True
        try:
            riesz = RieszSpec(tuple(w["frequencies"]), Fraction(w["weight"]))
        except (NotDissociated, ValueError) as exc:
            return VerificationFailure(f"invalid Riesz product: {exc}")
        if claim > Fraction(1, 2):
            return VerificationFailure("bound exceeds 1/2")
        if _certified_below(RieszParseval(V, riesz), claim, bits, PRECISION_CAP):
            return True
        return VerificationFailure(f"integral of Phi R at delta = {claim} is not certified below 1")

    return VerificationFailure(f"unknown method {method}")


def verify_certificate(V, cert: Certificate, bits: int = DEFAULT_PRECISION):
    """True if the witness alone re-derives a bound at least the stated one."""
    V = as_speed_set(V)
    if cert.speeds != V:
        return VerificationFailure("certificate is for a different speed set")
    target, claim = V, cert.bound
    if cert.reduction is not None:
        trace = cert.reduction
        if trace.start != V:
            return VerificationFailure("reduction trace starts from a different set")
        problem = verify_trace(trace)
        if problem:
            return VerificationFailure(f"reduction trace invalid: {problem}")
        target, claim = trace.final_model, claim + trace.total_error
    try:
        return _verify_method(target, cert.method, claim, cert.witness, bits)
    except (KeyError, TypeError, ValueError) as exc:
        return VerificationFailure(f"malformed witness: {exc!r}")
