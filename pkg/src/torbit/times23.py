"""The finite x2 x3 analogue: orbit closures mod q, exact partition-entropy
inequalities, interval discrepancy, and exponential sums over the subgroup
generated by 2 and 3.

The "volume" of the orbit of 1/q is the order of <2,3> in (Z/q)^x and the
"discriminant" is q; the entropy floor log|S| / n_q is checked exactly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np

from ._exact import factorize, multiplicative_order, primes_up_to
from .errors import InvalidModulusError


# ============================================================================
# orbit sets

@dataclass
class MultOrbitSet:
    q: int
    seed: int
    S: np.ndarray                 # sorted residues
    group_order: int              # |<2,3>| via element orders, independent

    def __post_init__(self):
        assert self.S.size >= 1

    @property
    def size(self) -> int:
        return int(self.S.size)


@dataclass
class EmpiricalMeasure:
    """Uniform measure on the orbit set; masses are exact rationals c/|S|."""
    support: MultOrbitSet

    @property
    def size(self) -> int:
        return self.support.size


def orbit_closure_23(q: int, seed: int = 1) -> MultOrbitSet:
    """Smallest subset of Z/q containing seed and closed under x2 and x3
    (vectorized BFS); the group order is recomputed independently from the
    element orders of 2 and 3."""
    if q < 5 or math.gcd(q, 6) != 1:
        raise InvalidModulusError(f"q = {q} must be >= 5 and coprime to 6")
    if math.gcd(seed, q) != 1:
        raise InvalidModulusError(f"seed {seed} not invertible mod {q}")
    seen = np.zeros(q, dtype=bool)
    frontier = np.array([seed % q], dtype=np.int64)
    seen[frontier] = True
    while frontier.size:
        nxt = np.unique(np.concatenate((frontier * 2 % q, frontier * 3 % q)))
        nxt = nxt[~seen[nxt]]
        seen[nxt] = True
        frontier = nxt
    S = np.nonzero(seen)[0].astype(np.int64)
    return MultOrbitSet(q=q, seed=seed, S=S, group_order=_group_order_23(q))


def _group_order_23(q: int) -> int:
    """|<2,3>| from element orders: for prime q the group is cyclic, so
    |<2,3>| = lcm(ord 2, ord 3); in general |<2>| times the order of 3 in
    the quotient, found by membership in <2>."""
    ord2 = multiplicative_order(2, q)
    if _is_prime(q):
        ord3 = multiplicative_order(3, q)
        return ord2 * ord3 // math.gcd(ord2, ord3)
    mask = np.zeros(q, dtype=bool)
    mask[_powers_of(2, ord2, q)] = True
    x, j = 3 % q, 1
    while not mask[x]:
        x = x * 3 % q
        j += 1
    return ord2 * j


def _powers_of(g: int, order: int, q: int) -> np.ndarray:
    """[g^0, ..., g^(order-1)] mod q by doubling concatenation."""
    arr = np.empty(order, dtype=np.int64)
    arr[0] = 1
    filled = 1
    gf = g % q
    while filled < order:
        take = min(filled, order - filled)
        arr[filled:filled + take] = arr[:take] * gf % q
        gf = gf * gf % q
        filled += take
    return arr


def uniform_measure(q: int, seed: int = 1) -> EmpiricalMeasure:
    return EmpiricalMeasure(support=orbit_closure_23(q, seed))


def _orbit_fast(q: int, seed: int = 1) -> MultOrbitSet:
    """Same set as orbit_closure_23 via the subgroup structure:
    S = seed * union_j 3^j <2>; used by the large sweeps."""
    if q < 5 or math.gcd(q, 6) != 1:
        raise InvalidModulusError(f"q = {q} must be >= 5 and coprime to 6")
    ord2 = multiplicative_order(2, q)
    base = _powers_of(2, ord2, q)
    mask = np.zeros(q, dtype=bool)
    mask[base] = True
    cosets = [base]
    x, j = 3 % q, 1
    while not mask[x]:
        cosets.append(base * x % q)
        x = x * 3 % q
        j += 1
    S = np.unique(np.concatenate(cosets) * seed % q)
    return MultOrbitSet(q=q, seed=seed, S=S.astype(np.int64),
                        group_order=ord2 * j)


# ============================================================================
# partition entropy

def n_separating(q: int) -> int:
    """Least n with 2^n > q."""
    return q.bit_length()


def refined_partition_counts(m: EmpiricalMeasure, n: int) -> np.ndarray:
    """Occupancies of the refinement P v [2]^-1 P v ... v [2^(n-1)]^-1 P of
    the binary partition under x -> 2x: the cell of p/q is determined by the
    first n binary digits, i.e. floor(p 2^n / q).  Exact integer counts."""
    if n < 1:
        raise ValueError("n >= 1 required")
    S = m.support.S
    q = m.support.q
    if n <= 40:
        labels = (S.astype(object) * (2 ** n)) // q if q > 2 ** 22 else \
            (S * np.int64(2 ** n)) // q
    else:
        labels = (S.astype(object) * (2 ** n)) // q
    labels = np.asarray(labels, dtype=np.int64)
    return np.bincount(labels, minlength=2 ** n)


def partition_entropy(m: EmpiricalMeasure, n: int) -> float:
    """Entropy of the n-fold dyadic refinement for the uniform measure on S;
    masses are exact rationals count/|S| before the final log."""
    counts = refined_partition_counts(m, n)
    counts = counts[counts > 0]
    N = m.size
    return math.log(N) - float((counts * np.log(counts)).sum()) / N


@dataclass
class EntropyFloorCheck:
    q: int
    size: int
    n_q: int
    H1: float
    floor: float
    ok: bool


def entropy_lower_bound_check(m: EmpiricalMeasure) -> EntropyFloorCheck:
    """H(P) >= log|S| / n_q: the subadditivity chain at finite level, using
    that the uniform measure on S is x2-invariant (2S = S)."""
    q = m.support.q
    nq = n_separating(q)
    H1 = partition_entropy(m, 1)
    floor = math.log(m.size) / nq
    return EntropyFloorCheck(q=q, size=m.size, n_q=nq, H1=H1, floor=floor,
                             ok=H1 >= floor - 1e-9)


# ============================================================================
# discrepancy

def discrepancy(m: EmpiricalMeasure, a, b) -> float:
    """| |S cap [a,b)| / |S| - (b - a) | with exact endpoint counting."""
    a, b = Fraction(a), Fraction(b)
    if not (0 <= a < b <= 1):
        raise ValueError("need 0 <= a < b <= 1")
    q = m.support.q
    S = m.support.S
    lo = -((-a.numerator * q) // a.denominator)        # ceil(a q)
    hi = -((-b.numerator * q) // b.denominator) - 1    # ceil(b q) - 1
    count = int(np.searchsorted(S, hi, side="right")
                - np.searchsorted(S, lo, side="left"))
    return abs(count / m.size - float(b - a))


def max_dyadic_discrepancy(m: EmpiricalMeasure, max_level: int = 10) -> float:
    """Max over dyadic intervals [j/2^l, (j+1)/2^l), 1 <= l <= max_level."""
    counts = refined_partition_counts(m, max_level).astype(np.float64)
    N = m.size
    worst = 0.0
    level = max_level
    while level >= 1:
        dev = np.max(np.abs(counts / N - 0.5 ** level))
        worst = max(worst, float(dev))
        counts = counts[0::2] + counts[1::2]
        level -= 1
    return worst


# ============================================================================
# exponential sums

@dataclass
class ExpSumProfile:
    q: int
    group_order: int
    max_normalized_sum: float


def exp_sum_profile(q: int) -> ExpSumProfile:
    """max over a != 0 of |sum_{x in G} e(ax/q)| / |G| for G = <2,3> mod q,
    q prime.  All sums at once via the length-q DFT of the indicator; the
    FFT error is far below the 2^-45 |G| budget."""
    if not _is_prime(q):
        raise InvalidModulusError("prime q required in v1")
    if math.gcd(q, 6) != 1:
        raise InvalidModulusError("q must be coprime to 6")
    orbit = _orbit_fast(q, 1)
    f = np.zeros(q)
    f[orbit.S] = 1.0
    F = np.fft.fft(f)
    mx = float(np.max(np.abs(F[1:])))
    return ExpSumProfile(q=q, group_order=orbit.group_order,
                         max_normalized_sum=mx / orbit.size)


def _is_prime(n: int) -> bool:
    if n < 2:
        return False
    d = 2
    while d * d <= n:
        if n % d == 0:
            return False
        d += 1 if d == 2 else 2
    return True


# ============================================================================
# sweeps

@dataclass
class SweepRow:
    q: int
    group_order: int
    ratio_log_order_log_q: float
    H1: float
    entropy_floor: float
    max_discrepancy: float
    max_norm_exp_sum: float


def sweep(qs: Iterable[int], with_exp_sum: bool = True,
          discrepancy_level: int = 10, exp_sum_step: int = 1) -> List[SweepRow]:
    """Entropy/discrepancy rows for each q; exponential sums (the FFT cost)
    can be thinned to every exp_sum_step-th q."""
    rows = []
    for i, q in enumerate(qs):
        m = EmpiricalMeasure(_orbit_fast(q))
        chk = entropy_lower_bound_check(m)
        md = max_dyadic_discrepancy(m, discrepancy_level)
        if with_exp_sum and i % exp_sum_step == 0 and _is_prime(q):
            es = exp_sum_profile(q).max_normalized_sum
        else:
            es = float("nan")
        rows.append(SweepRow(q=q, group_order=m.support.group_order,
                             ratio_log_order_log_q=math.log(m.support.group_order) / math.log(q),
                             H1=chk.H1, entropy_floor=chk.floor,
                             max_discrepancy=md, max_norm_exp_sum=es))
    return rows


def large_group_primes(q_min: int, q_max: int, exponent: float = 0.9,
                       step: int = 1) -> List[int]:
    """Primes q in [q_min, q_max], coprime to 6, with |<2,3>| >= q^exponent;
    step subsamples the prime list deterministically."""
    out = []
    for q in primes_up_to(q_max)[::step]:
        if q < q_min or q in (2, 3):
            continue
        if _group_order_23(q) >= q ** exponent:
            out.append(q)
    return out
