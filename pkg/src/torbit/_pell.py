"""Fundamental units of real quadratic orders via continued fractions.

All routines are exact over Python ints.  A unit of the order of
discriminant D > 0 is stored as a pair (a, b) meaning (a + b*sqrt(D))/2,
so a^2 - D b^2 = +-4.
"""

from __future__ import annotations

import math
from typing import Iterator, List, Tuple

from ._exact import is_square, squarefree_part


def is_valid_disc(D: int) -> bool:
    return D > 0 and D % 4 in (0, 1) and not is_square(D)


def sqrt_cf(m: int) -> Tuple[int, List[int]]:
    """Continued fraction of sqrt(m) for non-square m > 1:
    returns (a0, [a1..a_l]), the full period a1..a_l (a_l = 2*a0)."""
    a0 = math.isqrt(m)
    P1, Q1 = a0, m - a0 * a0
    quotients: List[int] = []
    P, Q = P1, Q1
    while True:
        a = (a0 + P) // Q
        quotients.append(a)
        P = a * Q - P
        Q = (m - P * P) // Q
        if (P, Q) == (P1, Q1):
            return a0, quotients


def pell_fundamental(m: int) -> Tuple[int, int, int]:
    """Minimal (p, q, n) with p^2 - m q^2 = n in {+1, -1}, p, q >= 1."""
    a0, period = sqrt_cf(m)
    p_prev, p_cur = 1, a0
    q_prev, q_cur = 0, 1
    for a in period[:-1]:
        p_prev, p_cur = p_cur, a * p_cur + p_prev
        q_prev, q_cur = q_cur, a * q_cur + q_prev
    n = p_cur * p_cur - m * q_cur * q_cur
    assert n in (1, -1)
    return p_cur, q_cur, n


def _icbrt(n: int) -> int:
    """Floor integer cube root, safe for huge n."""
    if n < 2:
        return n
    x = 1 << -(-n.bit_length() // 3)
    while True:
        y = (2 * x + n // (x * x)) // 3
        if y >= x:
            break
        x = y
    while x ** 3 > n:
        x -= 1
    return x


def _unit_mul(a1, b1, a2, b2, D):
    """Product of (a1+b1*sqrt(D))/2 and (a2+b2*sqrt(D))/2 in the same form."""
    return (a1 * a2 + D * b1 * b2) // 2, (a1 * b2 + a2 * b1) // 2


def fundamental_unit_fund_disc(D: int) -> Tuple[int, int, int]:
    """Fundamental unit (a, b, norm) of the quadratic order of discriminant D
    with a, b > 0 and a^2 - D b^2 = 4*norm.  D need not be fundamental but
    must be a valid discriminant; conductors are handled faster elsewhere."""
    if D % 4 == 0:
        p, q, n = pell_fundamental(D // 4)
        return 2 * p, q, n
    # D odd: the order is Z[(1+sqrt(D))/2].  Its unit index over Z[sqrt(D)]
    # is 1 or 3, so the fundamental unit is either the Pell +-1 solution or
    # its cube root in half-integers: Tr(eps^3) = t^3 - 3nt with t = Tr(eps).
    p, q, n = pell_fundamental(D)
    two_p = 2 * p
    t0 = _icbrt(two_p)
    for t in range(max(1, t0 - 2), t0 + 4):
        if t ** 3 - 3 * n * t == two_p:
            bb2, rem = divmod(t * t - 4 * n, D)
            if rem == 0 and bb2 > 0 and is_square(bb2):
                return t, math.isqrt(bb2), n
    return 2 * p, 2 * q, n


def split_disc(D: int) -> Tuple[int, int]:
    """D = f^2 * D0 with D0 the fundamental discriminant; returns (D0, f)."""
    d = squarefree_part(D)
    D0 = d if d % 4 == 1 else 4 * d
    f = math.isqrt(D // D0)
    assert f * f * D0 == D
    return D0, f


def unit_index_in_suborder(a: int, b: int, D0: int, f: int) -> int:
    """Least k >= 1 with eps^k in the order of conductor f, where
    eps = (a + b*sqrt(D0))/2.  Works mod f, never forms big powers."""
    if f == 1 or b % f == 0:
        return 1
    s = D0 % 2
    c = (s * s - D0) // 4          # omega^2 = s*omega - c, omega=(s+sqrt(D0))/2
    u0, v0 = (a - s * b) // 2 % f, b % f
    u, v, k = u0, v0, 1
    while v % f != 0:
        u, v = (u * u0 - c * v * v0) % f, (u * v0 + v * u0 + s * v * v0) % f
        k += 1
    return k


def fundamental_unit_of_disc(D: int) -> Tuple[int, int, int]:
    """Fundamental unit (a, b, norm) of the order of discriminant D,
    written over sqrt(D): eps = (a + b*sqrt(D))/2."""
    if not is_valid_disc(D):
        raise ValueError(f"{D} is not a positive non-square discriminant")
    D0, f = split_disc(D)
    a0, b0, n0 = fundamental_unit_fund_disc(D0)
    k = unit_index_in_suborder(a0, b0, D0, f)
    a, b, n = a0, b0, n0
    for _ in range(k - 1):
        a, b = _unit_mul(a, b, a0, b0, D0)
        n *= n0
    assert b % f == 0
    return a, b // f, n


def log_half_unit(a: int, b: int, D: int) -> float:
    """log((a + b*sqrt(D))/2), safe for huge ints."""
    if a.bit_length() < 500:
        return math.log((a + b * math.sqrt(D)) / 2.0)
    sh = a.bit_length() - 53
    la = math.log(a >> sh) + sh * math.log(2.0)
    return la + math.log1p(D * b * b / (a * a)) / 2.0 - math.log(2.0)


def geodesic_length_of_disc(D: int) -> float:
    """Length 2*log(eps_plus) of the closed geodesic of discriminant D;
    eps_plus is the least totally positive unit > 1 (eps, or eps^2 when the
    fundamental unit has norm -1)."""
    a, b, n = fundamental_unit_of_disc(D)
    log_eps = log_half_unit(a, b, D)
    return 2.0 * log_eps if n == 1 else 4.0 * log_eps


def geodesic_length_scan(D_max: int) -> Iterator[Tuple[int, float]]:
    """(D, length) for every valid discriminant D <= D_max.  Fundamental
    units are computed once per fundamental discriminant; conductor orders
    reuse them through the mod-f unit index."""
    cache = {}
    for D in range(5, D_max + 1):
        if not is_valid_disc(D):
            continue
        D0, f = split_disc(D)
        if D0 not in cache:
            a0, b0, n0 = fundamental_unit_fund_disc(D0)
            cache[D0] = (a0, b0, n0, log_half_unit(a0, b0, D0))
        a0, b0, n0, log_e0 = cache[D0]
        k = unit_index_in_suborder(a0, b0, D0, f)
        log_eps = k * log_e0
        n = n0 if k % 2 else 1
        yield D, (2.0 * log_eps if n == 1 else 4.0 * log_eps)
