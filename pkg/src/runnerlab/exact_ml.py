"""Exact maximum loneliness ML(V) = max_t min_v ||t v||, plus a uniform-grid oracle.

f(t) = min_v ||t v|| is piecewise linear with slopes +-v.  A local maximum is either
the peak of one sawtooth (t v in 1/2 + Z) or a crossing of a rising branch of one
sawtooth with a falling branch of another, which puts t on a grid a/q with
q in {v_i + v_j} or {v_j - v_i}.  Peaks are covered by q = 2 v_j.  Every candidate
a/q is scanned with integer arithmetic: ||a v / q|| = min(r, q - r)/q, r = a v mod q.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .core import BudgetExceeded, SpeedSet, as_speed_set, torus_norm

DEFAULT_CANDIDATE_BUDGET = 10**7
_CHUNK = 1 << 18


@dataclass(frozen=True)
class MLResult:
    value: Fraction
    witness_time: Fraction


def loneliness_at(V, t) -> Fraction:
    t = Fraction(t)
    return min(torus_norm(t * v) for v in as_speed_set(V))


def candidate_denominators(V: SpeedSet) -> list[int]:
    s = V.speeds
    qs = set()
    for i, a in enumerate(s):
        for b in s[i:]:
            qs.add(a + b)
            if b != a:
                qs.add(b - a)
    return sorted(qs)


def candidate_times(V) -> set[Fraction]:
    V = as_speed_set(V)
    return {Fraction(a, q) for q in candidate_denominators(V) for a in range(q)}


def _scan(speeds: np.ndarray, q: int, start: int = 0, stop: int | None = None):
    """Yield (a_values, min_distance_numerators) over a in [start, stop) for times a/q."""
    stop = q if stop is None else stop
    for lo in range(start, stop, _CHUNK):
        a = np.arange(lo, min(lo + _CHUNK, stop), dtype=np.int64)
        r = np.outer(a, speeds) % q
        yield a, np.minimum(r, q - r).min(axis=1)


def _speeds_array(V: SpeedSet, q_max: int) -> np.ndarray:
    if q_max * V.max >= 2**62:
        raise BudgetExceeded("speeds too large for 64-bit residue arithmetic")
    return np.asarray(V.speeds, dtype=np.int64)


def ml_exact(V, budget: int = DEFAULT_CANDIDATE_BUDGET) -> MLResult:
    """ML(V) exactly, with the smallest maximising time in [0, 1)."""
    V = as_speed_set(V)
    qs = candidate_denominators(V)
    total = sum(qs)
    if total > budget:
        raise BudgetExceeded(
            f"{total} candidate times exceed the budget of {budget}; "
            "use a certificate method or raise the budget"
        )
    speeds = _speeds_array(V, qs[-1])
    best_num, best_den = 0, 1
    best_t = Fraction(0)
    for q in qs:
        for a, dist in _scan(speeds, q):
            m = int(dist.max())
            # m/q versus best_num/best_den, exactly
            lhs, rhs = m * best_den, best_num * q
            if lhs < rhs:
                continue
            t = Fraction(int(a[int(np.argmax(dist == m))]), q)
            if lhs > rhs:
                best_num, best_den, best_t = m, q, t
            elif t < best_t:
                best_t = t
    return MLResult(Fraction(best_num, best_den), best_t)


def ml_grid_oracle(V, N: int) -> Fraction:
    """max over t in {0, 1/N, ..., (N-1)/N} of the loneliness; within max(V)/N of ML(V)."""
    V = as_speed_set(V)
    if N < 1:
        raise ValueError("grid size must be positive")
    if N <= 4096:
        return max(loneliness_at(V, Fraction(k, N)) for k in range(N))
    speeds = _speeds_array(V, N)
    best_m = 0
    for _, dist in _scan(speeds, N):
        best_m = max(best_m, int(dist.max()))
    return Fraction(best_m, N)
