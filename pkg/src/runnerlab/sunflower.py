"""Shells E_k inside arithmetic progressions, sunflowers in support families, and the
extraction of a large 1-dissociated subset from a sunflower of supports.

For a 2-dissociated A every m in E_k has a unique support S_m, a k-subset of A u -A
with m = sum(S_m).  Supports are represented as frozensets of signed integers.
"""

from __future__ import annotations

import itertools
import math
import random
from dataclasses import dataclass
from functools import lru_cache

from .core import BudgetExceeded, RunnerLabError
from .dissociation import (
    EK_BUDGET,
    NotDissociated,
    SignedSum,
    enumerate_Ek,
    find_relation,
)

FAMILY_BUDGET = 2000
SEARCH_NODE_BUDGET = 10**6


class NotASunflower(RunnerLabError, ValueError):
    pass


@dataclass(frozen=True)
class ArithmeticProgression:
    start: int
    step: int
    length: int

    def __post_init__(self):
        if self.step == 0:
            raise ValueError("step must be nonzero")
        if self.length < 1:
            raise ValueError("length must be positive")

    def __len__(self) -> int:
        return self.length

    def __contains__(self, x) -> bool:
        q, r = divmod(x - self.start, self.step)
        return r == 0 and 0 <= q < self.length

    def __iter__(self):
        return (self.start + i * self.step for i in range(self.length))

    @classmethod
    def interval(cls, lo: int, hi: int) -> "ArithmeticProgression":
        return cls(lo, 1, hi - lo + 1)


@dataclass(frozen=True)
class ProgressionHits:
    hits: tuple[SignedSum, ...]
    bound: float
    C1: float

    @property
    def within_bound(self) -> bool:
        return len(self.hits) <= self.bound


def _log(x: int) -> float:
    # natural log, floored at log 2 so the bound never degenerates to 0 on tiny inputs
    return math.log(max(x, 2))


def ek_in_progression(A, k: int, P: ArithmeticProgression, C1: float = 1.0, budget: int = EK_BUDGET):
    """E_k intersected with P, with supports, and the reference bound (C1 log|P| log|A|)^k."""
    hits = tuple(s for s in enumerate_Ek(A, k, budget=budget) if s.value in P)
    bound = (C1 * _log(len(P)) * _log(len(set(A)))) ** k
    return ProgressionHits(hits, bound, C1)


# -- supports -----------------------------------------------------------------


@dataclass(frozen=True)
class SupportDecomposition:
    element: int
    support: frozenset[int]

    @property
    def k(self) -> int:
        return len(self.support)


@lru_cache(maxsize=64)
def _support_index(A: tuple[int, ...]) -> dict[int, frozenset[int]]:
    if len(A) > 14:
        raise BudgetExceeded("support decomposition is limited to 14 elements")
    index = {}
    for signs in itertools.product((0, 1, -1), repeat=len(A)):
        value = sum(s * a for s, a in zip(signs, A))
        if value in index:
            raise NotDissociated(f"{A} is not 2-dissociated: {value} has two supports")
        index[value] = frozenset(s * a for s, a in zip(signs, A) if s)
    return index


def decompose(m: int, A) -> SupportDecomposition:
    """The unique support of m over A u -A; ValueError if m is not a signed sum."""
    index = _support_index(tuple(sorted(set(A))))
    if m not in index:
        raise ValueError(f"{m} is not a signed sum of distinct elements of A")
    return SupportDecomposition(m, index[m])


# -- sunflowers ---------------------------------------------------------------


@dataclass(frozen=True)
class SunflowerWitness:
    kernel: frozenset
    petals: tuple[frozenset, ...]

    def is_valid(self) -> bool:
        if len(self.petals) < 2:
            return False
        if not all(self.kernel <= U for U in self.petals):
            return False
        outer = [U - self.kernel for U in self.petals]
        seen: set = set()
        for o in outer:
            if seen & o:
                return False
            seen |= o
        return True


def _disjoint_petals(members, kernel, r, node_budget):
    """r members whose parts outside the kernel are pairwise disjoint, or None."""
    outer = [(U, U - kernel) for U in members]
    # greedy pass first, smallest petals first
    chosen, used = [], set()
    for U, o in sorted(outer, key=lambda x: (len(x[1]), sorted(map(repr, x[0])))):
        if not (o & used):
            chosen.append(U)
            used |= o
            if len(chosen) == r:
                return chosen
    nodes = [0]

    def rec(i, chosen, used):
        if len(chosen) == r:
            return list(chosen)
        if len(chosen) + len(outer) - i < r:
            return None
        nodes[0] += 1
        if nodes[0] > node_budget:
            raise BudgetExceeded("sunflower search exceeded its node budget")
        U, o = outer[i]
        if not (o & used):
            chosen.append(U)
            found = rec(i + 1, chosen, used | o)
            chosen.pop()
            if found:
                return found
        return rec(i + 1, chosen, used)

    return rec(0, [], frozenset())


def find_sunflower(family, r: int, budget: int = FAMILY_BUDGET, node_budget: int = SEARCH_NODE_BUDGET):
    """A sunflower with r petals in ``family``, or None if there is none.

    The kernel of any sunflower is the intersection of two of its petals, so the
    candidates are the empty set and all pairwise intersections.
    """
    if r < 2:
        raise ValueError("a sunflower needs r >= 2")
    members = sorted({frozenset(S) for S in family}, key=lambda S: sorted(map(repr, S)))
    if len(members) > budget:
        raise BudgetExceeded(f"family of {len(members)} sets exceeds budget {budget}")
    if len(members) < r:
        return None
    kernels = {frozenset()}
    for U, W in itertools.combinations(members, 2):
        kernels.add(U & W)
    for X in sorted(kernels, key=lambda K: (len(K), sorted(map(repr, K)))):
        containing = [U for U in members if X <= U]
        if len(containing) < r:
            continue
        petals = _disjoint_petals(containing, X, r, node_budget)
        if petals:
            return SunflowerWitness(X, tuple(petals))
    return None


# -- the extraction claim -------------------------------------------------------


@dataclass(frozen=True)
class ExtractionStep:
    element: int
    case: str
    partner: int | None = None
    z: int | None = None


@dataclass(frozen=True)
class Extraction:
    chosen: tuple[int, ...]
    steps: tuple[ExtractionStep, ...]
    shift: int

    @property
    def shifted(self) -> tuple[int, ...]:
        return tuple(b - self.shift for b in self.chosen)


def _check_sunflower(B, supports, X):
    for b in B:
        S = supports[b]
        if sum(S) != b:
            raise NotASunflower(f"support of {b} sums to {sum(S)}")
        if any(-z in S for z in S):
            raise NotASunflower(f"support of {b} contains both z and -z")
        if not X <= S:
            raise NotASunflower(f"kernel is not contained in the support of {b}")
        if not S - X:
            raise NotASunflower(f"support of {b} has an empty petal")
    seen: set = set()
    for b in B:
        petal = supports[b] - X
        if petal & seen:
            raise NotASunflower("petals are not pairwise disjoint")
        seen |= petal


def extract_dissociated_half(B, supports: dict, X) -> Extraction:
    """Greedy Case I / Case II loop: returns B'' with {b - t : b in B''} 1-dissociated.

    Elements are taken from C smallest first.  In Case II the clashing z with the
    smallest |z| is used, positive sign first.
    """
    B = sorted(set(B))
    X = frozenset(X)
    supports = {b: frozenset(supports[b]) for b in B}
    _check_sunflower(B, supports, X)
    petals = {b: supports[b] - X for b in B}
    owner = {z: b for b in B for z in petals[b]}
    C = set(B)
    chosen, steps = [], []
    while C:
        b = min(C)
        chosen.append(b)
        C.discard(b)
        clashes = sorted(
            (z for z in petals[b] if owner.get(-z) in C),
            key=lambda z: (abs(z), z < 0),
        )
        if not clashes:
            steps.append(ExtractionStep(b, "I"))
            continue
        z = clashes[0]
        partner = owner[-z]
        C.discard(partner)
        steps.append(ExtractionStep(b, "II", partner, z))
    return Extraction(tuple(chosen), tuple(steps), sum(X))


# -- random instances ---------------------------------------------------------


def random_dissociated(rng: random.Random, size: int, max_value: int, tries: int = 10**4) -> tuple[int, ...]:
    """Rejection-sample a 2-dissociated set of ``size`` integers from [1, max_value]."""
    for _ in range(tries):
        A = sorted(rng.sample(range(1, max_value + 1), size))
        if find_relation(A, 2) is None:
            return tuple(A)
    raise RunnerLabError(f"no 2-dissociated {size}-set found in [1, {max_value}]")


def random_sunflower_family(
    rng: random.Random,
    size: int | None = None,
    petals: int | None = None,
    k: int | None = None,
    max_value: int | None = None,
    clash_rate: float = 0.5,
):
    """(A, B', supports, X): a sunflower of supports over a random 2-dissociated A.

    Petals may reuse an element of A with the opposite sign of an earlier petal,
    which is what triggers Case II.
    """
    size = size or rng.randint(4, 9)
    max_value = max_value or 4**size
    A = random_dissociated(rng, size, max_value)
    k = k or rng.randint(1, min(4, size))
    kernel_size = rng.randint(0, k - 1)
    kernel_abs = rng.sample(A, kernel_size)
    X = frozenset(a * rng.choice((1, -1)) for a in kernel_abs)
    pool = [a for a in A if a not in kernel_abs]
    width = k - kernel_size
    petals = petals or rng.randint(1, max(1, (2 * len(pool)) // width))
    used: set[int] = set()
    supports = {}
    for _ in range(petals):
        reusable = [-z for z in used if -z not in used]
        petal: set[int] = set()
        for _ in range(width):
            taken_abs = {abs(z) for z in petal}
            fresh = [a for a in pool if a not in taken_abs and a not in used and -a not in used]
            clash = [z for z in reusable if abs(z) not in taken_abs]
            if clash and (not fresh or rng.random() < clash_rate):
                petal.add(rng.choice(sorted(clash)))
            elif fresh:
                petal.add(rng.choice(fresh) * rng.choice((1, -1)))
            else:
                break
        if len(petal) < width:
            break
        used |= petal
        S = frozenset(petal) | X
        supports[sum(S)] = S
    return tuple(A), tuple(sorted(supports)), supports, X
