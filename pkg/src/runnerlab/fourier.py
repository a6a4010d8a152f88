"""The covering count Phi(t) = #{v : ||t v|| <= delta}, its Fourier coefficients, and
integrals of Phi against discrete measures and Riesz products.

Phi is the sum over v of the closed indicator of [-delta, delta] evaluated at v t, so
its Fourier coefficient at m != 0 is the sum of lam(m / v) over speeds v dividing m,
with lam(j) = sin(2 pi j delta) / (pi j), and its mean is 2 delta n.

For a Riesz product R = prod_{m in D'} (1 - w cos 2 pi m x) over a 2-dissociated D',
R-hat equals (-w/2)^k on the shell E_k and vanishes elsewhere, so the integral of
Phi R is the finite sum 2 delta n + sum_k (-w/2)^k sum_{m in E_k} Phi-hat(m).
When delta = a/L, lam(j) only depends on j a mod L through the sine, which is how
the sum is evaluated: exact rational weights per frequency, one rigorous sine per
residue class.
"""

from __future__ import annotations

import math
from collections import Counter, defaultdict
from dataclasses import dataclass
from fractions import Fraction

import numpy as np
from mpmath import iv

from .core import (
    DEFAULT_PRECISION,
    PRECISION_CAP,
    BoundedReal,
    BudgetExceeded,
    SpeedSet,
    Undecided,
    as_speed_set,
    iv_from_fraction,
    precision,
    torus_norm,
)
from .dissociation import NotDissociated, find_relation, shell_table

RIESZ_MAX_FREQUENCIES = 12
BREAKPOINT_BUDGET = 10**6


@dataclass(frozen=True)
class PhiSpec:
    speeds: SpeedSet
    delta: Fraction

    def __post_init__(self):
        object.__setattr__(self, "speeds", as_speed_set(self.speeds))
        delta = Fraction(self.delta)
        if not 0 < delta <= Fraction(1, 2):
            raise ValueError(f"delta must lie in (0, 1/2], got {delta}")
        object.__setattr__(self, "delta", delta)

    @property
    def n(self) -> int:
        return self.speeds.n

    def with_delta(self, delta) -> "PhiSpec":
        return PhiSpec(self.speeds, delta)


@dataclass(frozen=True)
class DiscreteMeasure:
    atoms: tuple[tuple[Fraction, Fraction], ...]

    def __post_init__(self):
        atoms = tuple((Fraction(x) % 1, Fraction(w)) for x, w in self.atoms)
        if any(w < 0 for _, w in atoms):
            raise ValueError("atom weights must be nonnegative")
        if sum(w for _, w in atoms) != 1:
            raise ValueError("atom weights must sum to 1")
        object.__setattr__(self, "atoms", atoms)

    @classmethod
    def uniform(cls, points) -> "DiscreteMeasure":
        points = list(points)
        w = Fraction(1, len(points))
        return cls(tuple((x, w) for x in points))

    @classmethod
    def prime_units(cls, p: int) -> "DiscreteMeasure":
        """Uniform measure on j/p, j = 1 .. p-1."""
        return cls.uniform(Fraction(j, p) for j in range(1, p))


@dataclass(frozen=True)
class RieszSpec:
    """Riesz product prod (1 - weight * cos 2 pi m x) over 2-dissociated frequencies."""

    frequencies: tuple[int, ...]
    weight: Fraction

    def __post_init__(self):
        freqs = tuple(sorted(set(int(m) for m in self.frequencies)))
        if any(m <= 0 for m in freqs):
            raise ValueError("Riesz frequencies must be positive")
        weight = Fraction(self.weight)
        if not 0 <= weight <= 1:
            raise ValueError("Riesz weight must lie in [0, 1]")
        relation = find_relation(freqs, 2) if freqs else None
        if relation is not None:
            raise NotDissociated(f"frequencies {freqs} carry the relation {relation.coefficients}")
        object.__setattr__(self, "frequencies", freqs)
        object.__setattr__(self, "weight", weight)

    def coefficient(self, m: int) -> Fraction:
        """R-hat(m), exactly (zero off the shells)."""
        for value, shell_weight in zip(*shell_table(self.frequencies)):
            if int(value) == m:
                return (-self.weight / 2) ** int(shell_weight)
        return Fraction(0)

    def value(self, x: float) -> float:
        return math.prod(1 - float(self.weight) * math.cos(2 * math.pi * m * x) for m in self.frequencies)


@dataclass(frozen=True)
class FourierCoefficient:
    frequency: int
    value: BoundedReal


# -- pointwise ----------------------------------------------------------------


def phi_value(spec: PhiSpec, t) -> int:
    t = Fraction(t)
    return sum(1 for v in spec.speeds if torus_norm(t * v) <= spec.delta)


def _breakpoints(spec: PhiSpec) -> list[Fraction]:
    if 2 * sum(spec.speeds) > BREAKPOINT_BUDGET:
        raise BudgetExceeded("too many breakpoints for an exact minimum of Phi")
    pts = set()
    for v in spec.speeds:
        for a in range(v):
            pts.add(((a + spec.delta) / v) % 1)
            pts.add(((a - spec.delta) / v) % 1)
    return sorted(pts)


def min_phi(spec: PhiSpec) -> tuple[int, Fraction]:
    """Exact minimum of Phi over the torus and the smallest time attaining it.

    Phi is constant on the open pieces between breakpoints (a +- delta)/v, so it is
    enough to look at each breakpoint and at one interior point of each piece.
    """
    pts = _breakpoints(spec)
    probes = set(pts)
    for x, y in zip(pts, pts[1:] + [pts[0] + 1]):
        probes.add(((x + y) / 2) % 1)
    best = None
    for t in sorted(probes):
        value = phi_value(spec, t)
        if best is None or value < best[0]:
            best = (value, t)
    return best


# -- Fourier coefficients ---------------------------------------------------


def _sinpi(x: Fraction):
    """Interval for sin(pi x), argument reduced to [0, 1/2] first so the interval stays tight."""
    x = Fraction(x) % 2
    sign = 1
    if x >= 1:
        x, sign = x - 1, -1
    if x > Fraction(1, 2):
        x = 1 - x
    if x == 0:
        return iv.mpf(0)
    s = iv.sin(iv.pi * iv_from_fraction(x))
    return s if sign > 0 else -s


def _cospi(x: Fraction):
    return _sinpi(Fraction(1, 2) - Fraction(x))


def lambda_coeff(m: int, delta, bits: int = DEFAULT_PRECISION) -> BoundedReal:
    """sin(2 pi m delta) / (pi m) as a rigorous interval."""
    if m == 0:
        raise ValueError("lambda is defined for nonzero frequencies")
    delta = Fraction(delta)
    arg = 2 * m * delta
    if arg.denominator == 1:
        return BoundedReal.exact(0)
    with precision(bits):
        return BoundedReal.from_iv(_sinpi(arg) / (iv.pi * m))


def phi_hat(spec: PhiSpec, m: int, bits: int = DEFAULT_PRECISION) -> FourierCoefficient:
    if m == 0:
        return FourierCoefficient(0, BoundedReal.exact(2 * spec.delta * spec.n))
    total = BoundedReal.exact(0)
    for v in spec.speeds:
        if m % v == 0:
            total = total + lambda_coeff(m // v, spec.delta, bits)
    return FourierCoefficient(m, total)


def _lambda_float(j: np.ndarray, delta: Fraction) -> np.ndarray:
    arg = (2 * j * delta.numerator) % (2 * delta.denominator)
    return np.sin(np.pi * arg / delta.denominator) / (np.pi * j)


def phi_hat_float(speeds, delta: Fraction, m: np.ndarray) -> np.ndarray:
    """Plain floating-point Phi-hat(m) for m != 0, used only for heuristic choices."""
    m = np.asarray(m, dtype=np.int64)
    out = np.zeros(m.shape, dtype=float)
    for v in speeds:
        hit = m % v == 0
        out[hit] += _lambda_float(np.abs(m[hit]) // v, delta)
    return out


# -- Fejer kernel -----------------------------------------------------------


def fejer_kernel(m: int, x, bits: int = DEFAULT_PRECISION) -> BoundedReal:
    """K_m(x) = sum_{|j| < m} (1 - |j|/m) e(j x)."""
    if m < 1:
        raise ValueError("Fejer degree must be positive")
    x = Fraction(x)
    if x.denominator == 1:
        return BoundedReal.exact(m)
    with precision(bits):
        total = iv.mpf(1)
        for j in range(1, m):
            total += 2 * iv_from_fraction(1 - Fraction(j, m)) * _cospi(2 * j * x)
        return BoundedReal.from_iv(total)


def fejer_coefficient(m: int, j: int) -> Fraction:
    """K_m-hat(j) = max(0, 1 - |j|/m); at j = 0 this is the integral of K_m."""
    return max(Fraction(0), 1 - Fraction(abs(j), m))


def fejer_weighted_sum(
    spec: PhiSpec,
    v: int,
    M: int | None = None,
    weights: str = "proof",
    bits: int = DEFAULT_PRECISION,
) -> BoundedReal:
    """sum_{j=1}^{M} w_j Phi-hat(j v) with M = 100 n by default.

    ``weights="proof"`` uses the Fejer weights 1 - j/M; ``weights="statement"`` uses
    1 - j/n, the form printed in the lemma statement (negative for j > n).
    """
    if v not in spec.speeds:
        raise ValueError(f"{v} is not one of the speeds")
    n = spec.n
    M = 100 * n if M is None else M
    if weights == "proof":
        weight = lambda j: 1 - Fraction(j, M)  # noqa: E731
    elif weights == "statement":
        weight = lambda j: 1 - Fraction(j, n)  # noqa: E731
    else:
        raise ValueError("weights must be 'proof' or 'statement'")
    coeffs: dict[int, Fraction] = defaultdict(Fraction)
    for j in range(1, M + 1):
        for w in spec.speeds:
            if (j * v) % w == 0:
                coeffs[j * v // w] += weight(j)
    return _lambda_combination(coeffs, spec.delta, bits)


def _lambda_combination(coeffs: dict[int, Fraction], delta: Fraction, bits: int) -> BoundedReal:
    """Rigorous sum of c_j * lam(j) over positive j, grouping j by residue of 2 j delta."""
    a, L = delta.numerator, delta.denominator
    with precision(bits):
        by_residue: dict[int, object] = {}
        for j in sorted(coeffs):
            c = coeffs[j]
            if c == 0:
                continue
            r = (2 * j * a) % (2 * L)
            if r == 0 or r == L:
                continue
            sign = 1
            if r > L:
                r, sign = 2 * L - r, -1
            term = iv_from_fraction(sign * c) / j
            by_residue[r] = by_residue[r] + term if r in by_residue else term
        total = iv.mpf(0)
        for r in sorted(by_residue):
            total += by_residue[r] * _sinpi(Fraction(r, L))
        return BoundedReal.from_iv(total / iv.pi)


# -- integrals ----------------------------------------------------------------


def integrate_discrete(spec: PhiSpec, mu: DiscreteMeasure) -> Fraction:
    return sum((w * phi_value(spec, x) for x, w in mu.atoms), Fraction(0))


@dataclass(frozen=True)
class RieszIntegral:
    """The three parts of the Parseval expansion of the integral of Phi R."""

    mean_term: Fraction
    first_shell: BoundedReal
    higher_shells: BoundedReal

    @property
    def total(self) -> BoundedReal:
        return self.first_shell + self.higher_shells + self.mean_term


def _shell_coefficients(spec: PhiSpec, riesz: RieszSpec):
    """Exact weights c_j so that the k = 1 and k >= 2 shell sums are sum_j c_j lam(j)."""
    if len(riesz.frequencies) > RIESZ_MAX_FREQUENCIES:
        raise BudgetExceeded(
            f"{len(riesz.frequencies)} Riesz frequencies exceed the budget of {RIESZ_MAX_FREQUENCIES}"
        )
    values, shell = shell_table(riesz.frequencies)
    positive = values > 0
    values, shell = values[positive], shell[positive]
    first: dict[int, Fraction] = defaultdict(Fraction)
    higher: dict[int, Fraction] = defaultdict(Fraction)
    factor = -riesz.weight / 2
    powers = [factor**k for k in range(len(riesz.frequencies) + 1)]
    for v in spec.speeds:
        hit = values % v == 0
        if not hit.any():
            continue
        for (j, k), c in _count_pairs(values[hit] // v, shell[hit]):
            # E_k = -E_k and Phi-hat is even, so the positive half counts twice
            target = first if k == 1 else higher
            target[j] += 2 * c * powers[k]
    return first, higher


def _count_pairs(js, ks):
    if js.dtype == object:
        return sorted(Counter(zip(map(int, js), map(int, ks))).items())
    keys, counts = np.unique(np.stack([js, ks]), axis=1, return_counts=True)
    return [((int(j), int(k)), int(c)) for j, k, c in zip(keys[0], keys[1], counts)]


class RieszParseval:
    """The Parseval sum for fixed speeds and Riesz product, evaluated at any delta.

    The shell weights do not depend on delta, so they are built once; the binary
    search over delta then only pays for the sines.
    """

    def __init__(self, speeds, riesz: RieszSpec):
        self.speeds = as_speed_set(speeds)
        self.riesz = riesz
        if riesz.weight == 0 or not riesz.frequencies:
            self.first, self.higher = {}, {}
        else:
            probe = PhiSpec(self.speeds, Fraction(1, 2))
            self.first, self.higher = _shell_coefficients(probe, riesz)
        self._float = [
            (list(c), np.array([float(c[j]) for j in c]), np.array([float(j) for j in c]))
            for c in (self.first, self.higher)
            if c
        ]

    def terms(self, delta, bits: int = DEFAULT_PRECISION) -> RieszIntegral:
        delta = Fraction(delta)
        return RieszIntegral(
            2 * delta * self.speeds.n,
            _lambda_combination(self.first, delta, bits),
            _lambda_combination(self.higher, delta, bits),
        )

    def interval(self, delta, bits: int = DEFAULT_PRECISION) -> BoundedReal:
        return self.terms(delta, bits).total

    def approx(self, delta) -> float:
        """Floating-point value, for search heuristics only."""
        delta = Fraction(delta)
        total = float(2 * delta * self.speeds.n)
        a, L = delta.numerator, delta.denominator
        for js, cs, jf in self._float:
            arg = np.array([(2 * j * a) % (2 * L) for j in js], dtype=np.float64)
            total += float(np.dot(cs, np.sin(np.pi * arg / L) / (np.pi * jf)))
        return total

    def below_one(self, delta, bits: int = DEFAULT_PRECISION, cap: int = PRECISION_CAP) -> bool:
        """Decide whether the integral is < 1, doubling precision until decided."""
        while True:
            verdict = self.interval(delta, bits).compare(1)
            if verdict is not None:
                return verdict < 0
            if bits >= cap:
                raise Undecided(f"integral still straddles 1 at {bits} bits")
            bits *= 2


def riesz_terms(spec: PhiSpec, riesz: RieszSpec, bits: int = DEFAULT_PRECISION) -> RieszIntegral:
    return RieszParseval(spec.speeds, riesz).terms(spec.delta, bits)


def integrate_riesz(spec: PhiSpec, riesz: RieszSpec, bits: int = DEFAULT_PRECISION) -> BoundedReal:
    """Rigorous enclosure of the integral of Phi against the Riesz density."""
    return riesz_terms(spec, riesz, bits).total


def riesz_float(spec: PhiSpec, riesz: RieszSpec) -> float:
    return RieszParseval(spec.speeds, riesz).approx(spec.delta)


def riesz_below_one(
    spec: PhiSpec,
    riesz: RieszSpec,
    bits: int = DEFAULT_PRECISION,
    cap: int = PRECISION_CAP,
) -> bool:
    return RieszParseval(spec.speeds, riesz).below_one(spec.delta, bits, cap)


# -- quadrature oracle --------------------------------------------------------

_PI_UPPER = Fraction(22, 7)


def riesz_quadrature_oracle(
    spec: PhiSpec, riesz: RieszSpec, samples: int = 10**4, bits: int = 64
) -> BoundedReal:
    """Independent enclosure of the integral of Phi R by a left Riemann sum.

    For f of bounded variation on the circle, |integral - (1/N) sum f(i/N)| <= TV(f)/N.
    TV(Phi R) <= TV(Phi) sup R + sup Phi TV(R), with TV(Phi) = 2 sum v (each closed
    indicator arc contributes one jump up and one down) and TV(R) <= sup |R'|.
    """
    w = riesz.weight
    d = len(riesz.frequencies)
    sup_r = (1 + w) ** d
    tv_phi = 0 if spec.delta == Fraction(1, 2) else 2 * sum(spec.speeds)
    tv_r = 2 * _PI_UPPER * w * (1 + w) ** max(d - 1, 0) * sum(riesz.frequencies)
    remainder = (tv_phi * sup_r + spec.n * tv_r) / samples
    with precision(bits):
        factors = [(m, iv_from_fraction(w)) for m in riesz.frequencies]
        acc = iv.mpf(0)
        for i in range(samples):
            x = Fraction(i, samples)
            count = phi_value(spec, x)
            if count == 0:
                continue
            r = iv.mpf(1)
            for m, wi in factors:
                r *= 1 - wi * _cospi(2 * m * x)
            acc += count * r
        mean = BoundedReal.from_iv(acc / samples)
    return BoundedReal(mean.lo - remainder, mean.hi + remainder)
