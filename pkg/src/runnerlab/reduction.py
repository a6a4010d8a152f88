"""Denser models: rectifying low-dimension residue sets and transferring ML bounds.

A residue set B mod p whose smallest maximal 2-dissociated subset D0 is small sits
inside Span2(D0 + D0/2), so a single dilation lambda squeezes all of B into a short
centered interval [-q, q].  Pulling the dilate back to integers gives a set B' with
ML(B) >= ML(B') - q/p.  Iterating with primes p in (2m, 4m] shrinks the speeds.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np
from sympy import isprime, nextprime

from .core import BudgetExceeded, RunnerLabError, SpeedSet, as_speed_set
from .dissociation import dim2_minus

EXHAUSTIVE_LIMIT = 10**6
PIGEONHOLE_LIMIT = 10**7


class NotPrime(RunnerLabError, ValueError):
    pass


class DimensionTooLarge(RunnerLabError):
    pass


class IntervalViolation(RunnerLabError):
    pass


class CollisionToMultiset(RunnerLabError):
    pass


class PrimeSearchFailed(RunnerLabError):
    pass


def centered(x: int, p: int) -> int:
    """Representative of x mod p in (-p/2, p/2)."""
    r = x % p
    return r - p if r > p // 2 else r


@dataclass(frozen=True)
class ResidueSet:
    modulus: int
    elements: tuple[int, ...]

    def __post_init__(self):
        p = int(self.modulus)
        if not isprime(p):
            raise NotPrime(f"{p} is not prime")
        elems = tuple(sorted({centered(int(b), p) for b in self.elements}))
        if 0 in elems:
            raise ValueError("residue sets may not contain 0")
        object.__setattr__(self, "modulus", p)
        object.__setattr__(self, "elements", elems)

    def __len__(self) -> int:
        return len(self.elements)

    def dilate(self, lam: int) -> tuple[int, ...]:
        return tuple(centered(lam * b, self.modulus) for b in self.elements)

    def radius_under(self, lam: int) -> int:
        return max(abs(x) for x in self.dilate(lam))


@dataclass(frozen=True)
class RectificationResult:
    dilation_unit: int
    radius: int
    method: str = "pigeonhole"
    spanning_set: tuple[int, ...] = ()

    def guarantee(self, d: int, p: int) -> float:
        return 8 * d * p ** (1 - 1 / (2 * d))


def _spanning_set(B: ResidueSet, d: int) -> tuple[tuple[int, ...], int]:
    p = B.modulus
    d0 = dim2_minus(B.elements, modulus=p).witness
    if len(d0) > d:
        raise DimensionTooLarge(f"dim2- of B is {len(d0)}, more than d = {d}")
    half = pow(2, -1, p)
    D = sorted({z % p for z in d0} | {(z * half) % p for z in d0})
    return tuple(D), len(d0)


def rectify(B: ResidueSet, d: int) -> RectificationResult:
    """Dilation found by pigeonholing the vectors (lam z / p)_{z in D} into boxes."""
    p = B.modulus
    if p == 2:
        return RectificationResult(1, B.radius_under(1), "pigeonhole", tuple(B.elements))
    if p > PIGEONHOLE_LIMIT:
        raise BudgetExceeded(f"pigeonhole scan over {p} dilations exceeds {PIGEONHOLE_LIMIT}")
    D, _ = _spanning_set(B, d)
    m = math.ceil(p ** (1 / (2 * d)) / 2)
    if m ** len(D) >= p:
        raise DimensionTooLarge(f"{m}^{len(D)} boxes leave no room for pigeonhole mod {p}")
    lam = np.arange(p, dtype=np.int64)
    key = np.zeros(p, dtype=np.int64)
    for z in D:
        key = key * m + (lam * z % p) * m // p
    order = np.argsort(key, kind="stable")
    sorted_keys = key[order]
    clash = np.nonzero(sorted_keys[1:] == sorted_keys[:-1])[0]
    i = int(clash[0])
    l1, l2 = int(order[i + 1]), int(order[i])
    unit = (l1 - l2) % p
    return RectificationResult(unit, B.radius_under(unit), "pigeonhole", D)


def rectify_exhaustive(B: ResidueSet, budget: int = EXHAUSTIVE_LIMIT) -> RectificationResult:
    """The unit minimising max |centered(lam b)|, smallest lam on ties."""
    p = B.modulus
    if p > budget:
        raise BudgetExceeded(f"exhaustive scan over {p} dilations exceeds {budget}")
    if p == 2:
        return RectificationResult(1, 1, "exhaustive")
    lam = np.arange(1, p, dtype=np.int64)
    worst = np.zeros(p - 1, dtype=np.int64)
    for b in B.elements:
        r = lam * (b % p) % p
        worst = np.maximum(worst, np.minimum(r, p - r))
    i = int(np.argmin(worst))
    return RectificationResult(int(lam[i]), int(worst[i]), "exhaustive")


def dilate_model(B, p: int, lam: int, ell) -> tuple[SpeedSet, Fraction]:
    """Pull lam * B mod p back to positive integers; returns (B', 1/ell).

    The interval test is |centered(lam b)| <= p/ell.  The transfer argument only needs
    |t' - a/p| |b'| < 1/ell, and |t' - a/p| < 1/p is already strict.
    """
    B = as_speed_set(B)
    ell = Fraction(ell)
    if not isprime(p):
        raise NotPrime(f"{p} is not prime")
    if ell < 2:
        raise ValueError("ell must be at least 2")
    if B.max >= p:
        raise ValueError(f"B must lie in [1, {p - 1}]")
    if lam % p == 0:
        raise ValueError("dilation must be a unit mod p")
    images = [centered(lam * b, p) for b in B]
    bound = Fraction(p) / ell
    for b, x in zip(B, images):
        if abs(x) > bound:
            raise IntervalViolation(f"{lam}*{b} = {x} mod {p} lies outside [-{bound}, {bound}]")
    absolute = [abs(x) for x in images]
    if 0 in absolute or len(set(absolute)) != len(absolute):
        raise CollisionToMultiset(f"dilate {images} contains 0 or both x and -x")
    return SpeedSet(tuple(sorted(absolute))), 1 / ell


@dataclass(frozen=True)
class ReductionStep:
    prime: int
    dilation_unit: int
    radius: int
    before: SpeedSet
    after: SpeedSet
    proof_error: float | None = None

    @property
    def ell(self) -> Fraction:
        return Fraction(self.prime, self.radius)

    @property
    def error_charge(self) -> Fraction:
        return Fraction(self.radius, self.prime)


@dataclass(frozen=True)
class ReductionTrace:
    start: SpeedSet
    steps: tuple[ReductionStep, ...]
    final_model: SpeedSet
    stop_reason: str = ""
    notes: dict = field(default_factory=dict)

    @property
    def total_error(self) -> Fraction:
        return sum((s.error_charge for s in self.steps), Fraction(0))


def _sumset_avoids_zero(V: SpeedSet, p: int) -> bool:
    res = [v % p for v in V]
    if 0 in res:
        return False
    s = set(res)
    return all((p - r) % p not in s for r in res)


def _choose_prime(V: SpeedSet, m: int, windows: int = 2) -> int:
    lo, hi = 2 * m, 4 * m
    for _ in range(windows):
        p = nextprime(lo)
        while p <= hi:
            if _sumset_avoids_zero(V, p):
                return p
            p = nextprime(p)
        lo, hi = hi, 2 * hi
    raise PrimeSearchFailed(f"no prime in (2*{m}, {hi // 2}] keeps 0 out of the sumset")


def reduce_model(
    V,
    stop_radius: int = 64,
    max_steps: int = 64,
    exhaustive_limit: int = EXHAUSTIVE_LIMIT,
    proof_schedule: bool = False,
) -> ReductionTrace:
    """Iterate rectify + dilate until the model stops shrinking.

    A step is taken only if its radius q satisfies q < p/(2n) and q < m; the error
    charged is exactly q/p.  With ``proof_schedule`` each step also records the
    error 1/m^eps, eps = 1/(d (log n)^2), that the asymptotic argument budgets.
    """
    V = as_speed_set(V)
    n = V.n
    current = V
    steps: list[ReductionStep] = []
    reason = "max_steps"
    for _ in range(max_steps):
        m = current.max
        if m <= stop_radius:
            reason = "stop_radius"
            break
        p = _choose_prime(current, m)
        B = ResidueSet(p, current.speeds)
        if p <= exhaustive_limit:
            rect = rectify_exhaustive(B, exhaustive_limit)
        else:
            rect = rectify(B, dim2_minus(B.elements, modulus=p).dimension)
        q = rect.radius
        if not (2 * n * q < p and q < m):
            reason = "no_progress"
            break
        after, _ = dilate_model(current, p, rect.dilation_unit, Fraction(p, q))
        proof_error = None
        if proof_schedule and n > 1:
            d = dim2_minus(current).dimension
            eps = 1 / (d * math.log(n) ** 2)
            proof_error = m ** (-eps)
        steps.append(ReductionStep(p, rect.dilation_unit, q, current, after, proof_error))
        current = after
    return ReductionTrace(V, tuple(steps), current, reason)


def verify_trace(trace: ReductionTrace) -> str | None:
    """Re-derive every step; returns None if the trace is valid, else a reason."""
    current = trace.start
    for i, step in enumerate(trace.steps):
        if step.before != current:
            return f"step {i} does not start from the previous model"
        try:
            after, _ = dilate_model(current, step.prime, step.dilation_unit, step.ell)
        except (RunnerLabError, ValueError) as exc:
            return f"step {i}: {exc}"
        if after != step.after:
            return f"step {i} records the wrong dilated model"
        current = after
    if current != trace.final_model:
        return "final model does not match the last step"
    return None
