"""k-dissociativity, additive 2-dimension (dim2 and dim2_minus), 2-spans and E_k shells.

Every routine takes an optional ``modulus``; with a prime modulus the relations are
taken mod p, which is what the rectification step needs.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from math import comb

import numpy as np

from .core import BudgetExceeded, RunnerLabError

RELATION_BUDGET = 20
SPAN_BUDGET = 10**7
EK_BUDGET = 2 * 10**6


class NotDissociated(RunnerLabError):
    pass


@dataclass(frozen=True)
class Relation:
    """A nontrivial vanishing combination sum(coeff * element) = 0 with |coeff| <= k."""

    coefficients: dict
    k: int
    modulus: int | None = None

    def total(self) -> int:
        s = sum(e * d for d, e in self.coefficients.items())
        return s % self.modulus if self.modulus else s

    def is_valid(self) -> bool:
        coeffs = self.coefficients.values()
        return (
            any(coeffs)
            and all(abs(e) <= self.k for e in coeffs)
            and self.total() == 0
        )


@dataclass(frozen=True)
class DimensionResult:
    dimension: int
    witness: tuple[int, ...]


@dataclass(frozen=True)
class SignedSum:
    """value = sum of sign * element over the (element, sign) pairs, signs in {-1, +1}."""

    value: int
    signs: tuple[tuple[int, int], ...]

    @property
    def weight(self) -> int:
        return len(self.signs)

    @property
    def support(self) -> frozenset[int]:
        """The signed elements, as a subset of A and -A."""
        return frozenset(s * a for a, s in self.signs)

    def as_dict(self) -> dict[int, int]:
        return dict(self.signs)


def _elements(D) -> list[int]:
    return sorted(set(int(d) for d in D))


def _reduce(x, modulus):
    return x % modulus if modulus else x


# -- relation search --------------------------------------------------------


def _half_sums(elems, k, modulus):
    coeffs = np.arange(-k, k + 1, dtype=object if _needs_object(elems, k) else np.int64)
    sums = np.zeros(1, dtype=coeffs.dtype)
    for e in elems:
        sums = (sums[:, None] + coeffs[None, :] * e).reshape(-1)
        if modulus:
            sums = sums % modulus
    return sums


def _needs_object(elems, k):
    return k * sum(abs(e) for e in elems) >= 2**62


def _decode(index: int, size: int, k: int) -> list[int]:
    base = 2 * k + 1
    digits = []
    for _ in range(size):
        index, r = divmod(index, base)
        digits.append(r - k)
    return digits[::-1]


def find_relation(D, k: int, modulus: int | None = None, budget: int = RELATION_BUDGET):
    """A Relation on D with coefficients in [-k, k], or None if D is k-dissociated.

    Meet in the middle: enumerate both halves' coefficient vectors and match sums
    against negated sums.  The returned relation has its first nonzero coefficient
    positive.
    """
    if k < 1:
        raise ValueError("k must be positive")
    elems = _elements(D)
    if modulus:
        elems = sorted(set(e % modulus for e in D))
    if len(elems) > budget:
        raise BudgetExceeded(f"relation search over {len(elems)} elements exceeds budget {budget}")
    if not elems:
        return None
    h = len(elems) // 2
    left, right = elems[:h], elems[h:]
    sl = _half_sums(left, k, modulus)
    sr = _half_sums(right, k, modulus)
    order = np.argsort(sl, kind="stable")
    sl_sorted = sl[order]
    targets = _reduce(-sr, modulus)
    lo = np.searchsorted(sl_sorted, targets, side="left")
    hi = np.searchsorted(sl_sorted, targets, side="right")
    base = 2 * k + 1
    zero_left = (base ** len(left) - 1) // 2
    zero_right = (base ** len(right) - 1) // 2
    counts = hi - lo
    hits = np.nonzero(counts > 0)[0]
    for j in hits:
        j = int(j)
        for pos in range(int(lo[j]), int(hi[j])):
            i = int(order[pos])
            if j == zero_right and i == zero_left:
                continue
            coeffs = _decode(i, len(left), k) + _decode(j, len(right), k)
            sign = 1 if next(c for c in coeffs if c) > 0 else -1
            return Relation(
                {e: sign * c for e, c in zip(elems, coeffs) if c}, k, modulus
            )
    return None


def is_k_dissociated(D, k: int, modulus: int | None = None, budget: int = RELATION_BUDGET) -> bool:
    return find_relation(D, k, modulus=modulus, budget=budget) is None


# -- spans and subset enumeration -------------------------------------------


def span2(D, modulus: int | None = None, budget: int = SPAN_BUDGET) -> set[int]:
    """All sums of eps_d * d with eps_d in {-2, ..., 2}."""
    elems = _elements(D)
    if len(elems) > 20:
        raise BudgetExceeded("2-span enumeration is limited to 20 elements")
    span = {0}
    for d in elems:
        span = _extend_span(span, d, modulus)
        if len(span) > budget:
            raise BudgetExceeded(f"2-span grew beyond {budget} elements")
    return span


def _extend_span(span, d, modulus):
    steps = [c * d for c in (-2, -1, 0, 1, 2)]
    if modulus:
        return {(s + t) % modulus for s in span for t in steps}
    return {s + t for s in span for t in steps}


def _can_extend(span, x, modulus) -> bool:
    # S + {x} has a relation with eps_x != 0 iff x or 2x lies in Span2(S) (spans are symmetric)
    return _reduce(x, modulus) not in span and _reduce(2 * x, modulus) not in span


def _dissociated_subsets(elems, modulus, visit, budget):
    """Depth-first walk over all 2-dissociated subsets in lexicographic order.

    ``visit(subset, span, next_index)`` returns False to prune the branch.
    """

    def rec(subset, span, start):
        if not visit(subset, span, start):
            return
        for i in range(start, len(elems)):
            x = elems[i]
            if _can_extend(span, x, modulus):
                new_span = _extend_span(span, x, modulus)
                if len(new_span) > budget:
                    raise BudgetExceeded(f"2-span grew beyond {budget} elements")
                subset.append(x)
                rec(subset, new_span, i + 1)
                subset.pop()

    rec([], {0}, 0)


def _prepare(V, modulus):
    elems = sorted(set(int(v) % modulus for v in V)) if modulus else _elements(V)
    if len(elems) > 24:
        raise BudgetExceeded("dimension search is limited to 24 elements")
    return elems


def dim2(V, modulus: int | None = None, budget: int = SPAN_BUDGET) -> DimensionResult:
    """Largest 2-dissociated subset (lexicographically smallest among the largest)."""
    elems = _prepare(V, modulus)
    best: list[tuple[int, ...]] = [()]

    def visit(subset, span, start):
        if len(subset) > len(best[0]):
            best[0] = tuple(subset)
        return len(subset) + (len(elems) - start) > len(best[0])

    _dissociated_subsets(elems, modulus, visit, budget)
    return DimensionResult(len(best[0]), best[0])


def dim2_minus(V, modulus: int | None = None, budget: int = SPAN_BUDGET) -> DimensionResult:
    """Smallest inclusion-maximal 2-dissociated subset (lexicographically smallest on ties)."""
    elems = _prepare(V, modulus)
    best: list[tuple[int, ...] | None] = [None]

    def visit(subset, span, start):
        if best[0] is not None and len(subset) >= len(best[0]):
            return False
        members = set(subset)
        maximal = all(x in members or not _can_extend(span, x, modulus) for x in elems)
        if maximal:
            best[0] = tuple(subset)
            return False
        return True

    _dissociated_subsets(elems, modulus, visit, budget)
    return DimensionResult(len(best[0]), best[0])


# -- E_k shells ---------------------------------------------------------------


def enumerate_Ek(D, k: int, budget: int = EK_BUDGET, check: bool = True) -> list[SignedSum]:
    """Signed sums of exactly k distinct elements of the 2-dissociated set D, sorted by value."""
    elems = _elements(D)
    if not 0 <= k <= len(elems):
        raise ValueError(f"k must lie in [0, {len(elems)}]")
    if comb(len(elems), k) * 2**k > budget:
        raise BudgetExceeded(f"E_{k} has {comb(len(elems), k) * 2**k} elements, over budget {budget}")
    if check:
        relation = find_relation(elems, 2)
        if relation is not None:
            raise NotDissociated(f"{elems} is not 2-dissociated: {relation.coefficients}")
    out = []
    for chosen in itertools.combinations(elems, k):
        for signs in itertools.product((1, -1), repeat=k):
            out.append(
                SignedSum(sum(s * a for s, a in zip(signs, chosen)), tuple(zip(chosen, signs)))
            )
    out.sort(key=lambda s: (s.value, s.signs))
    return out


def shell_table(D) -> tuple[np.ndarray, np.ndarray]:
    """(values, weights) of every signed sum over {-1, 0, 1}^D, the union of all E_k."""
    elems = _elements(D)
    dtype = object if _needs_object(elems, 1) else np.int64
    values = np.zeros(1, dtype=dtype)
    weights = np.zeros(1, dtype=np.int64)
    for e in elems:
        values = (values[:, None] + np.array([0, e, -e], dtype=dtype)[None, :]).reshape(-1)
        weights = (weights[:, None] + np.array([0, 1, 1])[None, :]).reshape(-1)
    return values, weights
