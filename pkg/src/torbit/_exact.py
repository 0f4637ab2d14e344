"""Exact integer / rational helpers shared by the arithmetic modules.

Everything here works over Python ints and fractions.Fraction; floats never
enter.  Matrices are lists of lists (rows).  Polynomials are coefficient
lists in increasing degree order, [c0, c1, ..., 1] for monic inputs.
"""

from __future__ import annotations

import math
from fractions import Fraction
from typing import Iterable, List, Sequence, Tuple


# ----------------------------------------------------------------------------
# integers

def is_square(n: int) -> bool:
    if n < 0:
        return False
    r = math.isqrt(n)
    return r * r == n


def iroot(n: int, k: int) -> int:
    """Floor of the integer k-th root of n >= 0."""
    if n < 0:
        raise ValueError("iroot of negative")
    if n in (0, 1) or k == 1:
        return n
    x = int(round(n ** (1.0 / k)))
    while x > 0 and x ** k > n:
        x -= 1
    while (x + 1) ** k <= n:
        x += 1
    return x


def squarefree_part(n: int) -> int:
    """n = squarefree_part * square; n != 0."""
    if n == 0:
        raise ValueError("squarefree_part(0)")
    sign = -1 if n < 0 else 1
    n = abs(n)
    out = 1
    d = 2
    while d * d <= n:
        if n % d == 0:
            e = 0
            while n % d == 0:
                n //= d
                e += 1
            if e % 2:
                out *= d
        d += 1 if d == 2 else 2
    return sign * out * n


def factorize(n: int) -> dict:
    """Prime factorization by trial division; intended for n <= ~10**12."""
    if n <= 0:
        raise ValueError("factorize wants n >= 1")
    fac = {}
    d = 2
    while d * d <= n:
        while n % d == 0:
            fac[d] = fac.get(d, 0) + 1
            n //= d
        d += 1 if d == 2 else 2
    if n > 1:
        fac[n] = fac.get(n, 0) + 1
    return fac


def divisors(n: int) -> List[int]:
    ds = [1]
    for p, e in factorize(n).items():
        ds = [d * p ** i for d in ds for i in range(e + 1)]
    return sorted(ds)


def primes_up_to(n: int) -> List[int]:
    if n < 2:
        return []
    sieve = bytearray(b"\x01") * (n + 1)
    sieve[:2] = b"\x00\x00"
    for p in range(2, math.isqrt(n) + 1):
        if sieve[p]:
            sieve[p * p::p] = b"\x00" * len(range(p * p, n + 1, p))
    return [i for i, v in enumerate(sieve) if v]


def multiplicative_order(a: int, n: int) -> int:
    """Order of a in (Z/n)^x; requires gcd(a, n) = 1."""
    if math.gcd(a, n) != 1:
        raise ValueError("element not invertible")
    lam = _carmichael(n)
    order = lam
    for p in factorize(lam):
        while order % p == 0 and pow(a, order // p, n) == 1:
            order //= p
    return order


def _carmichael(n: int) -> int:
    lam = 1
    for p, e in factorize(n).items():
        if p == 2 and e >= 3:
            lp = 2 ** (e - 2)
        else:
            lp = (p - 1) * p ** (e - 1)
        lam = lam * lp // math.gcd(lam, lp)
    return lam


# ----------------------------------------------------------------------------
# polynomials (coefficient lists, increasing degree)

def poly_eval(coeffs: Sequence, x):
    acc = 0
    for c in reversed(coeffs):
        acc = acc * x + c
    return acc


def poly_deriv(coeffs: Sequence) -> list:
    return [i * c for i, c in enumerate(coeffs)][1:]


def poly_disc_cubic(c0: int, c1: int, c2: int) -> int:
    """Discriminant of x^3 + c2 x^2 + c1 x + c0."""
    return (18 * c2 * c1 * c0 - 4 * c2 ** 3 * c0 + c2 ** 2 * c1 ** 2
            - 4 * c1 ** 3 - 27 * c0 ** 2)


def monic_int_poly_is_irreducible(coeffs: Sequence[int]) -> bool:
    """Irreducibility over Q of a monic integer polynomial of degree <= 3.

    Degree 2 and 3 reduce to rational-root / square-discriminant tests.
    """
    deg = len(coeffs) - 1
    if coeffs[-1] != 1:
        raise ValueError("monic polynomial expected")
    if deg == 1:
        return True
    if deg == 2:
        c0, c1 = coeffs[0], coeffs[1]
        return not is_square(c1 * c1 - 4 * c0)
    if deg == 3:
        c0 = coeffs[0]
        if c0 == 0:
            return False
        for d in divisors(abs(c0)):
            for r in (d, -d):
                if poly_eval(coeffs, r) == 0:
                    return False
        return True
    raise ValueError("degree > 3 not supported")


def _sturm_chain(coeffs: List[Fraction]) -> List[List[Fraction]]:
    p0 = [Fraction(c) for c in coeffs]
    p1 = [Fraction(c) for c in poly_deriv(coeffs)]
    chain = [p0, p1]
    while len(chain[-1]) > 1 or (chain[-1] and chain[-1][0] != 0):
        rem = _poly_mod(chain[-2], chain[-1])
        rem = [-c for c in rem]
        if not rem or all(c == 0 for c in rem):
            break
        chain.append(rem)
    return chain


def _poly_mod(a: List[Fraction], b: List[Fraction]) -> List[Fraction]:
    a = a[:]
    while len(a) >= len(b) and any(c != 0 for c in a):
        while a and a[-1] == 0:
            a.pop()
        if len(a) < len(b):
            break
        q = a[-1] / b[-1]
        shift = len(a) - len(b)
        for i, c in enumerate(b):
            a[i + shift] -= q * c
        a.pop()
    while a and a[-1] == 0:
        a.pop()
    return a


def _sign_changes(chain, x: Fraction) -> int:
    signs = []
    for p in chain:
        v = poly_eval(p, x)
        if v != 0:
            signs.append(1 if v > 0 else -1)
    return sum(1 for a, b in zip(signs, signs[1:]) if a != b)


def count_real_roots_between(coeffs: Sequence[int], lo: Fraction, hi: Fraction) -> int:
    chain = _sturm_chain(list(coeffs))
    return _sign_changes(chain, lo) - _sign_changes(chain, hi)


def isolate_real_roots(coeffs: Sequence[int]) -> List[Tuple[Fraction, Fraction]]:
    """Isolating intervals (lo, hi] for all real roots of a squarefree
    integer polynomial, ascending.  Sturm + bisection, exact."""
    chain = _sturm_chain(list(coeffs))
    bound = Fraction(1) + max(abs(Fraction(c)) for c in coeffs[:-1]) / abs(Fraction(coeffs[-1]))
    total = _sign_changes(chain, -bound) - _sign_changes(chain, bound)
    out: List[Tuple[Fraction, Fraction]] = []

    def recurse(lo, hi, k):
        if k == 0:
            return
        if k == 1:
            out.append((lo, hi))
            return
        mid = (lo + hi) / 2
        kl = _sign_changes(chain, lo) - _sign_changes(chain, mid)
        recurse(lo, mid, kl)
        recurse(mid, hi, k - kl)

    recurse(-bound, bound, total)
    return sorted(out)


def refine_root(coeffs: Sequence[int], lo: Fraction, hi: Fraction,
                width: Fraction) -> Tuple[Fraction, Fraction]:
    """Shrink an isolating interval (lo, hi] to width <= `width` by
    bisection with exact sign evaluation.  Root taken in (lo, hi]."""
    flo = poly_eval(coeffs, lo)
    if flo == 0:
        # nudge: roots of squarefree polys are simple, move lo down a hair
        lo = lo - (hi - lo) / 4
        flo = poly_eval(coeffs, lo)
    sign_lo = 1 if flo > 0 else -1
    while hi - lo > width:
        mid = (lo + hi) / 2
        fm = poly_eval(coeffs, mid)
        if fm == 0:
            eps = (hi - lo) / 8
            lo, hi = mid - eps, mid + eps
            if hi - lo <= width:
                break
            fm = poly_eval(coeffs, lo)
            sign_lo = 1 if fm > 0 else -1
            continue
        if (1 if fm > 0 else -1) == sign_lo:
            lo = mid
        else:
            hi = mid
    return lo, hi


# ----------------------------------------------------------------------------
# integer matrices / lattices (rows span the lattice)

def mat_mul(A, B):
    n, m, k = len(A), len(B[0]), len(B)
    return [[sum(A[i][t] * B[t][j] for t in range(k)) for j in range(m)]
            for i in range(n)]


def mat_identity(n, one=1):
    return [[one if i == j else one * 0 for j in range(n)] for i in range(n)]


def hnf_rows(rows: Sequence[Sequence[int]]) -> List[List[int]]:
    """Row-style Hermite normal form of the lattice spanned by `rows`
    (upper triangular, positive pivots, entries above a pivot reduced).
    Zero rows are dropped; works for rectangular stacks."""
    m = [list(r) for r in rows if any(r)]
    if not m:
        return []
    ncols = len(m[0])
    basis: List[List[int]] = []
    col = 0
    while col < ncols and m:
        pivots = [r for r in m if r[col] != 0]
        rest = [r for r in m if r[col] == 0]
        if not pivots:
            col += 1
            continue
        # euclidean elimination in this column
        while len(pivots) > 1:
            pivots.sort(key=lambda r: abs(r[col]))
            p = pivots[0]
            new_p = [p]
            for r in pivots[1:]:
                q = r[col] // p[col]
                rr = [a - q * b for a, b in zip(r, p)]
                if rr[col] != 0:
                    new_p.append(rr)
                elif any(rr):
                    rest.append(rr)
            pivots = new_p
        piv = pivots[0]
        if piv[col] < 0:
            piv = [-a for a in piv]
        basis.append(piv)
        m = rest
        col += 1
    # reduce entries above each pivot
    for i in range(len(basis) - 1, -1, -1):
        pcol = next(j for j, a in enumerate(basis[i]) if a != 0)
        for k in range(i):
            q = basis[k][pcol] // basis[i][pcol]
            if q:
                basis[k] = [a - q * b for a, b in zip(basis[k], basis[i])]
    return basis


def frac_hnf_rows(rows: Sequence[Sequence[Fraction]]) -> Tuple[List[List[int]], int]:
    """HNF of a rational row lattice: returns (integer HNF rows, denominator d)
    so the lattice is spanned by rows/d."""
    den = 1
    for r in rows:
        for c in r:
            c = Fraction(c)
            den = den * c.denominator // math.gcd(den, c.denominator)
    int_rows = [[int(Fraction(c) * den) for c in r] for r in rows]
    h = hnf_rows(int_rows)
    # normalize the pair (divide by common content with den)
    g = den
    for r in h:
        for c in r:
            g = math.gcd(g, c)
        if g == 1:
            break
    if g > 1:
        h = [[c // g for c in r] for r in h]
        den //= g
    return h, den


def frac_mat_det(A: Sequence[Sequence[Fraction]]) -> Fraction:
    n = len(A)
    m = [[Fraction(c) for c in row] for row in A]
    det = Fraction(1)
    for i in range(n):
        piv = None
        for r in range(i, n):
            if m[r][i] != 0:
                piv = r
                break
        if piv is None:
            return Fraction(0)
        if piv != i:
            m[i], m[piv] = m[piv], m[i]
            det = -det
        det *= m[i][i]
        inv = 1 / m[i][i]
        for r in range(i + 1, n):
            if m[r][i] != 0:
                f = m[r][i] * inv
                for c in range(i, n):
                    m[r][c] -= f * m[i][c]
    return det


def frac_mat_inv(A: Sequence[Sequence[Fraction]]) -> List[List[Fraction]]:
    n = len(A)
    m = [[Fraction(c) for c in row] + [Fraction(1 if i == j else 0) for j in range(n)]
         for i, row in enumerate(A)]
    for i in range(n):
        piv = next((r for r in range(i, n) if m[r][i] != 0), None)
        if piv is None:
            raise ZeroDivisionError("singular matrix")
        m[i], m[piv] = m[piv], m[i]
        inv = 1 / m[i][i]
        m[i] = [c * inv for c in m[i]]
        for r in range(n):
            if r != i and m[r][i] != 0:
                f = m[r][i]
                m[r] = [a - f * b for a, b in zip(m[r], m[i])]
    return [row[n:] for row in m]


def frac_solve(A, b):
    """Solve x A = b over Q (row-vector convention)."""
    Ainv = frac_mat_inv(A)
    return [sum(Fraction(b[k]) * Ainv[k][j] for k in range(len(b)))
            for j in range(len(b))]


def lattice_intersect(rows1, den1: int, rows2, den2: int):
    """Intersection of two full-rank rational row lattices L_i = rows_i/den_i
    in Q^n.  Returns (rows, den).  Uses duality: (L1 cap L2)^* = L1^* + L2^*.
    """
    n = len(rows1)
    A1 = [[Fraction(c, den1) for c in r] for r in rows1]
    A2 = [[Fraction(c, den2) for c in r] for r in rows2]
    d1 = frac_mat_inv(A1)      # columns span dual; transpose to rows
    d2 = frac_mat_inv(A2)
    dual_rows = [[d1[i][j] for i in range(n)] for j in range(n)] + \
                [[d2[i][j] for i in range(n)] for j in range(n)]
    h, d = frac_hnf_rows(dual_rows)
    Ad = [[Fraction(c, d) for c in r] for r in h]
    back = frac_mat_inv(Ad)
    rows = [[back[i][j] for i in range(n)] for j in range(n)]
    return frac_hnf_rows(rows)
