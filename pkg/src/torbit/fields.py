"""Exact arithmetic for totally real number fields, orders, units, regulators.

A field is Q[x]/(f) for a monic integer polynomial f of degree 2 or 3 with
all roots real.  Elements are coordinate tuples of Fractions over the power
basis 1, alpha, ..., alpha^(n-1).  Real embeddings are certified by interval
bisection with exact sign evaluation; everything downstream of the embeddings
inherits that error budget.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field as dc_field
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from . import _pell
from ._exact import (frac_hnf_rows, frac_mat_det, frac_mat_inv, frac_solve,
                     hnf_rows, isolate_real_roots, lattice_intersect,
                     monic_int_poly_is_irreducible, poly_disc_cubic,
                     poly_eval, refine_root, squarefree_part)
from ._lll import enumerate_gram_short, lll_reduce
from .errors import (DegreeUnsupportedError, PrecisionError,
                     ReducibleInputError, UnitSearchExhaustedError)

DEFAULT_ROOT_BITS = 80
UNIT_BOX_START = 10.0
UNIT_BOX_CAP = 4096.0


# ============================================================================
# fields

class TotallyRealField:
    """Q[x]/(f) for monic integer f with all roots real and distinct.

    min_poly holds the full coefficient tuple (c0, ..., c_{n-1}, 1).
    """

    def __init__(self, coeffs: Sequence[int]):
        coeffs = tuple(int(c) for c in coeffs)
        n = len(coeffs) - 1
        if n not in (2, 3):
            raise DegreeUnsupportedError(f"degree {n} not supported")
        if coeffs[-1] != 1:
            raise ValueError("monic polynomial required")
        if not monic_int_poly_is_irreducible(coeffs):
            raise ReducibleInputError(f"{coeffs} is reducible over Q")
        self.degree = n
        self.min_poly = coeffs
        self._root_intervals = isolate_real_roots(coeffs)
        if len(self._root_intervals) != n:
            raise ReducibleInputError(
                f"{coeffs} is not totally real ({len(self._root_intervals)} real roots)")
        self._root_bits = 0
        self._refine_roots(DEFAULT_ROOT_BITS)
        self._power_table = self._build_power_table()
        self._trace_powers = self._build_trace_powers()
        self._maximal_order: Optional[Order] = None
        self._autos = None

    # -- structure ----------------------------------------------------------

    def _build_power_table(self):
        # coords of alpha^k for k = 0 .. 2n-2 over the power basis
        n = self.degree
        rows = []
        cur = [Fraction(0)] * n
        cur[0] = Fraction(1)
        rows.append(tuple(cur))
        for _ in range(2 * n - 2):
            shifted = [Fraction(0)] + list(cur[:-1])
            top = cur[-1]
            if top:
                for j in range(n):
                    shifted[j] -= top * self.min_poly[j]
            cur = shifted
            rows.append(tuple(cur))
        return rows

    def _build_trace_powers(self):
        # Newton's identities on f: traces of alpha^k, k = 0 .. 2n-2
        n = self.degree
        a = self.min_poly          # a[0..n], a[n] = 1
        p = [Fraction(n)]
        for k in range(1, 2 * n - 1):
            s = Fraction(0)
            for i in range(1, min(k - 1, n) + 1):
                s += a[n - i] * p[k - i]
            if k <= n:
                s += k * a[n - k]
            p.append(-s)
        return p

    # -- element arithmetic (power-basis coords) ----------------------------

    def mul(self, x: Sequence[Fraction], y: Sequence[Fraction]) -> Tuple[Fraction, ...]:
        n = self.degree
        conv = [Fraction(0)] * (2 * n - 1)
        for i in range(n):
            if x[i]:
                for j in range(n):
                    if y[j]:
                        conv[i + j] += x[i] * y[j]
        out = [Fraction(0)] * n
        for k, c in enumerate(conv):
            if c:
                pk = self._power_table[k]
                for j in range(n):
                    out[j] += c * pk[j]
        return tuple(out)

    def power(self, x, e: int):
        out = self.one()
        base = tuple(x)
        while e:
            if e & 1:
                out = self.mul(out, base)
            base = self.mul(base, base)
            e >>= 1
        return out

    def one(self):
        return tuple([Fraction(1)] + [Fraction(0)] * (self.degree - 1))

    def trace(self, x) -> Fraction:
        return sum(Fraction(c) * self._trace_powers[k] for k, c in enumerate(x))

    def mult_matrix(self, x) -> List[List[Fraction]]:
        """Row j = coords of x * alpha^j."""
        n = self.degree
        rows = []
        cur = tuple(Fraction(c) for c in x)
        alpha = tuple(Fraction(1) if i == 1 else Fraction(0) for i in range(n))
        for j in range(n):
            rows.append(list(cur))
            if j < n - 1:
                cur = self.mul(cur, alpha)
        return rows

    def norm(self, x) -> Fraction:
        return frac_mat_det(self.mult_matrix(x))

    def charpoly_of(self, x) -> Tuple[int, ...]:
        """Characteristic polynomial of multiplication by x (degree n, monic);
        exact, via traces of powers (Newton) for n <= 3."""
        n = self.degree
        t1 = self.trace(x)
        x2 = self.mul(x, x)
        t2 = self.trace(x2)
        e1 = t1
        e2 = (t1 * t1 - t2) / 2
        if n == 2:
            return (e2, -e1, Fraction(1))
        t3 = self.trace(self.mul(x2, x))
        e3 = (t1 ** 3 - 3 * t1 * t2 + 2 * t3) / 6
        return (-e3, e2, -e1, Fraction(1))

    # -- embeddings ----------------------------------------------------------

    def _refine_roots(self, bits: int):
        if bits <= self._root_bits:
            return
        width = Fraction(1, 2 ** bits)
        self._root_intervals = [refine_root(self.min_poly, lo, hi, width)
                                for lo, hi in self._root_intervals]
        self._root_bits = bits

    def root_intervals(self, bits: int = DEFAULT_ROOT_BITS):
        if bits > 4096:
            raise PrecisionError("requested precision beyond refinement cap")
        self._refine_roots(bits)
        return list(self._root_intervals)

    @property
    def roots(self) -> List[float]:
        return [float((lo + hi) / 2) for lo, hi in self._root_intervals]

    def embed(self, x) -> np.ndarray:
        """theta(x) = (sigma_1(x), ..., sigma_n(x)) as floats, roots ascending."""
        return np.array([poly_eval([float(c) for c in x], r) for r in self.roots])

    @property
    def field_disc(self) -> int:
        return self.maximal_order().disc

    def maximal_order(self) -> "Order":
        if self._maximal_order is None:
            self._maximal_order = _round2_maximal_order(self)
        return self._maximal_order

    def equation_order(self) -> "Order":
        n = self.degree
        rows = [[Fraction(1 if i == j else 0) for j in range(n)] for i in range(n)]
        return Order(self, rows)

    def automorphisms(self) -> List[Tuple[Tuple[Fraction, ...], Tuple[int, ...]]]:
        """Roots of min_poly inside the field, i.e. field automorphisms for
        Galois fields.  Returns (beta-coords, permutation pi) pairs where
        sigma_i(beta) = root_{pi[i]}: each automorphism permutes embeddings."""
        if self._autos is not None:
            return self._autos
        OK = self.maximal_order()
        t2 = int(self.trace(self.mul(self.gen(), self.gen())))
        cands = enumerate_gram_short(OK.trace_gram(), t2)
        roots = []
        for c in cands:
            for sgn in (1, -1):
                x = OK.element([sgn * v for v in c])
                if all(a == b for a, b in zip(self.charpoly_of(x), self.min_poly)):
                    roots.append(x)
        # include identity; dedup
        roots.append(self.gen())
        uniq = {tuple(r) for r in roots}
        out = []
        my_roots = self.roots
        for r in sorted(uniq):
            vals = self.embed(r)
            perm = tuple(int(np.argmin([abs(v - w) for w in my_roots])) for v in vals)
            if sorted(perm) == list(range(self.degree)):
                out.append((r, perm))
        self._autos = out
        return out

    def gen(self):
        return tuple(Fraction(1) if i == 1 else Fraction(0) for i in range(self.degree))

    # -- identity ------------------------------------------------------------

    def __eq__(self, other):
        return isinstance(other, TotallyRealField) and self.min_poly == other.min_poly

    def __hash__(self):
        return hash(self.min_poly)

    def __repr__(self):
        return f"TotallyRealField({list(self.min_poly)}, disc={self.field_disc})"


# ============================================================================
# orders

class Order:
    """A finite-index subring of the maximal order, basis in HNF over the
    power basis (rows = basis elements, first basis element is 1)."""

    def __init__(self, fld: TotallyRealField, rows: Sequence[Sequence[Fraction]]):
        self.field = fld
        n = fld.degree
        h, den = frac_hnf_rows([[Fraction(c) for c in r] for r in rows])
        if len(h) != n:
            raise ValueError("order basis must have full rank")
        self.den = den
        self.hnf = [list(r) for r in h]           # integer rows; basis = hnf/den
        self.basis = [tuple(Fraction(c, den) for c in r) for r in h]
        self._inv = frac_mat_inv([list(b) for b in self.basis])
        self._validate()
        g = [[fld.trace(fld.mul(a, b)) for b in self.basis] for a in self.basis]
        d = frac_mat_det(g)
        if d.denominator != 1:
            raise ValueError("non-integral trace form determinant")
        self.disc = int(d)
        self._gram = g
        self._mult_table: Optional[List[List[List[int]]]] = None

    def _validate(self):
        one = self.to_coords(self.field.one())
        if any(c.denominator != 1 for c in one):
            raise ValueError("1 not in the module")
        for i in range(self.field.degree):
            for j in range(i, self.field.degree):
                prod = self.field.mul(self.basis[i], self.basis[j])
                c = self.to_coords(prod)
                if any(x.denominator != 1 for x in c):
                    raise ValueError("module not closed under multiplication")

    # -- coordinates ----------------------------------------------------------

    def to_coords(self, x) -> List[Fraction]:
        """Power-basis element -> coordinates over the order basis."""
        return [sum(Fraction(x[k]) * self._inv[k][j] for k in range(len(x)))
                for j in range(len(x))]

    def element(self, coords) -> Tuple[Fraction, ...]:
        """Order coordinates -> power-basis element."""
        n = self.field.degree
        out = [Fraction(0)] * n
        for i, c in enumerate(coords):
            if c:
                for j in range(n):
                    out[j] += Fraction(c) * self.basis[i][j]
        return tuple(out)

    def contains(self, x) -> bool:
        return all(c.denominator == 1 for c in self.to_coords(x))

    def mult_table(self) -> List[List[List[int]]]:
        """T[i][j] = order coords of basis_i * basis_j (integers)."""
        if self._mult_table is None:
            n = self.field.degree
            T = []
            for i in range(n):
                row = []
                for j in range(n):
                    c = self.to_coords(self.field.mul(self.basis[i], self.basis[j]))
                    row.append([int(v) for v in c])
                T.append(row)
            self._mult_table = T
        return self._mult_table

    def trace_gram(self) -> List[List[int]]:
        return [[int(v) for v in row] for row in self._gram]

    @property
    def index(self) -> int:
        q = Fraction(self.disc, self.field.field_disc)
        f = math.isqrt(q.numerator)
        return f

    @property
    def is_maximal(self) -> bool:
        return self.disc == self.field.field_disc

    def quotient_mod_one(self) -> List[Tuple[Fraction, ...]]:
        """Lifts e_1..e_{n-1} in O whose images form a basis of O / Z*1.

        Augmented HNF: the integer combination producing each projected
        HNF row is tracked in trailing columns, giving an exact lift.
        """
        n = self.field.degree
        aug = [list(self.hnf[i][1:]) + [1 if j == i else 0 for j in range(n)]
               for i in range(n)]
        h = hnf_rows(aug)
        lifts = []
        for r in h:
            if any(r[:n - 1]):
                z = r[n - 1:]
                x = self.element(z)
                lifts.append(x)
        assert len(lifts) == n - 1
        return lifts

    def embedding_matrix(self, bits: int = DEFAULT_ROOT_BITS) -> np.ndarray:
        """Rows = theta(basis_i) as floats."""
        self.field.root_intervals(bits)
        return np.array([self.field.embed(b) for b in self.basis])

    # -- identity --------------------------------------------------------------

    def key(self):
        return (self.field.min_poly, self.den, tuple(tuple(r) for r in self.hnf))

    def __eq__(self, other):
        return isinstance(other, Order) and self.key() == other.key()

    def __hash__(self):
        return hash(self.key())

    def __repr__(self):
        return f"Order(disc={self.disc}, field={list(self.field.min_poly)})"

    def to_json(self) -> dict:
        return {
            "degree": self.field.degree,
            "min_poly": [str(c) for c in self.field.min_poly[:-1]],
            "order_basis": [[str(c) for c in row] for row in self.basis],
            "disc": str(self.disc),
        }


def _round_frac(x: Fraction) -> Fraction:
    return Fraction(round(x))


def order_discriminant(o: Order) -> int:
    """Exact determinant of the trace-form Gram matrix det{Tr(e_i e_j)}."""
    return o.disc


# ============================================================================
# maximal orders (Pohst-Zassenhaus round 2, degrees 2 and 3)

def _round2_maximal_order(fld: TotallyRealField) -> Order:
    O = fld.equation_order()
    d = O.disc
    for p in sorted(set(_square_prime_divisors(d))):
        while True:
            O2 = _p_enlarge(fld, O, p)
            if O2 is None:
                break
            O = O2
    O._maximal = True
    return O


def _square_prime_divisors(d: int) -> List[int]:
    d = abs(d)
    out = []
    p = 2
    while p * p <= d:
        if d % (p * p) == 0:
            out.append(p)
        while d % p == 0:
            d //= p
        p += 1 if p == 2 else 2
    return out


def _p_enlarge(fld: TotallyRealField, O: Order, p: int) -> Optional[Order]:
    """One round-2 step at p; returns an enlarged order or None if p-maximal
    already (at the level of the radical's multiplier ring)."""
    if O.disc % (p * p) != 0:
        return None
    n = fld.degree
    T = O.mult_table()

    def omul_vec(x, y):
        out = [0] * n
        for i in range(n):
            if x[i]:
                for j in range(n):
                    if y[j]:
                        c = T[i][j]
                        for k in range(n):
                            out[k] += x[i] * y[j] * c[k]
        return [v % p for v in out]

    # Frobenius power matrix on O/pO
    e = 1
    while p ** e < n:
        e += 1
    F = []
    for i in range(n):
        x = [1 if j == i else 0 for j in range(n)]
        # x^(p^e) by repeated p-th power
        for _ in range(e):
            y = [1 if j == 0 else 0 for j in range(n)]
            b = x[:]
            m = p
            while m:
                if m & 1:
                    y = omul_vec(y, b)
                b = omul_vec(b, b)
                m >>= 1
            x = y
        F.append(x)
    ker = _nullspace_mod_p(F, p)
    # radical lattice in O-coords
    rad_rows = [[int(v) for v in k] for k in ker] + \
               [[p if i == j else 0 for j in range(n)] for i in range(n)]
    A = hnf_rows(rad_rows)
    # multiplier ring {x : x * I_p subset I_p} in O-coords
    cur_rows = [[Fraction(1 if i == j else 0) for j in range(n)] for i in range(n)]
    cur = ([ [int(c) for c in r] for r in cur_rows ], 1)
    first = True
    rows_den = None
    for g in A:
        Mg = [[sum(g[k] * T[i][k][m] for k in range(n)) for m in range(n)] for i in range(n)]
        Mg_inv = frac_mat_inv([[Fraction(v) for v in row] for row in Mg])
        pre = [[sum(Fraction(A[r][k]) * Mg_inv[k][m] for k in range(n)) for m in range(n)]
               for r in range(n)]
        h, den = frac_hnf_rows(pre)
        if first:
            rows_den = (h, den)
            first = False
        else:
            rows_den = lattice_intersect(rows_den[0], rows_den[1], h, den)
    h, den = rows_den
    # back to power-basis coords
    new_rows = []
    for r in h:
        x = [Fraction(0)] * n
        for i, c in enumerate(r):
            if c:
                for j in range(n):
                    x[j] += Fraction(c, den) * O.basis[i][j]
        new_rows.append(x)
    O2 = Order(fld, new_rows)
    if O2.disc == O.disc:
        return None
    assert O.disc % O2.disc == 0
    return O2


def _nullspace_mod_p(M: Sequence[Sequence[int]], p: int) -> List[List[int]]:
    n = len(M)
    # rows of M are images; solve x M = 0 mod p (row-vector convention)
    A = [[M[i][j] % p for j in range(n)] for i in range(n)]
    # transpose: standard column solve
    At = [[A[i][j] for i in range(n)] for j in range(n)]
    piv_cols = []
    row = 0
    for col in range(n):
        piv = next((r for r in range(row, n) if At[r][col] % p), None)
        if piv is None:
            continue
        At[row], At[piv] = At[piv], At[row]
        inv = pow(At[row][col], -1, p)
        At[row] = [(v * inv) % p for v in At[row]]
        for r in range(n):
            if r != row and At[r][col] % p:
                f = At[r][col]
                At[r] = [(a - f * b) % p for a, b in zip(At[r], At[row])]
        piv_cols.append(col)
        row += 1
    free = [c for c in range(n) if c not in piv_cols]
    basis = []
    for fc in free:
        x = [0] * n
        x[fc] = 1
        for r, pc in enumerate(piv_cols):
            x[pc] = (-At[r][fc]) % p
        basis.append(x)
    return basis


# ============================================================================
# field enumeration

def enumerate_totally_real_fields(degree: int, disc_bound: int) -> List[TotallyRealField]:
    """Every totally real field of the given degree with field discriminant
    <= disc_bound, once up to isomorphism, sorted by discriminant."""
    if degree == 2:
        return _enumerate_quadratic(disc_bound)
    if degree == 3:
        return _enumerate_cubic(disc_bound)
    raise DegreeUnsupportedError(f"degree {degree} not supported")


def quadratic_field_of_disc(d: int) -> TotallyRealField:
    """Field of fundamental discriminant d, defined by a maximal generator."""
    if d % 4 == 1:
        return TotallyRealField((-(d - 1) // 4, -1, 1))      # x^2 - x - (d-1)/4
    return TotallyRealField((-(d // 4), 0, 1))               # x^2 - m


def _enumerate_quadratic(bound: int) -> List[TotallyRealField]:
    out = []
    for d in range(5, bound + 1):
        if d % 4 == 1 and squarefree_part(d) == d:
            out.append(quadratic_field_of_disc(d))
        elif d % 4 == 0:
            m = d // 4
            if squarefree_part(m) == m and m % 4 in (2, 3):
                out.append(quadratic_field_of_disc(d))
    return out


def _enumerate_cubic(bound: int) -> List[TotallyRealField]:
    """Hunter-style search over monic cubics x^3 - a1 x^2 + a2 x - a3 with
    trace a1 in {0, 1}; complete for field disc <= bound, de-duplicated by
    canonical short-generator polynomial."""
    # T2 is an integer, so the epsilon only guards float boundary cases
    t2max_base = (2.0 / 3.0) * math.sqrt(bound) + 1e-9
    by_disc: Dict[int, List[TotallyRealField]] = {}
    for a1 in (0, 1):
        t2max = a1 * a1 / 3.0 + t2max_base
        a2_min = int(math.ceil((a1 * a1 - t2max) / 2.0))
        a2_max = a1 * a1 // 3
        for a2 in range(a2_min, a2_max + 1):
            t2 = a1 * a1 - 2 * a2
            a3_bound = int(math.floor((max(t2, 0) / 3.0) ** 1.5)) + 1
            for a3 in range(-a3_bound, a3_bound + 1):
                if a3 == 0:
                    continue
                coeffs = (-a3, a2, -a1, 1)
                if poly_disc_cubic(-a3, a2, -a1) <= 0:
                    continue
                if not monic_int_poly_is_irreducible(coeffs):
                    continue
                fld = TotallyRealField(coeffs)
                dK = fld.field_disc
                if dK > bound:
                    continue
                group = by_disc.setdefault(dK, [])
                if not any(_cubic_isomorphic(fld, g) for g in group):
                    group.append(fld)
    out = []
    for dK in sorted(by_disc):
        out.extend(sorted(by_disc[dK], key=lambda f: f.min_poly))
    return out


def canonical_cubic_poly(fld: TotallyRealField) -> Tuple[int, int, int]:
    """Canonical defining cubic: the lexicographically least (a1, a2, a3)
    over short maximal-order generators with trace in {0, 1, 2}; an
    isomorphism invariant (the generator set searched is intrinsic)."""
    OK = fld.maximal_order()
    dK = fld.field_disc
    t2cap = int(math.floor(4.0 / 3.0 + (2.0 / 3.0) * math.sqrt(dK))) + 1
    G = OK.trace_gram()
    best = None
    for c in enumerate_gram_short(G, t2cap):
        for sgn in (1, -1):
            x = OK.element([sgn * v for v in c])
            t = fld.trace(x)
            shift = -(int(t) // 3) if t.denominator == 1 else None
            if shift is None:
                continue
            x = tuple(a + (shift if k == 0 else 0) for k, a in enumerate(x))
            cp = fld.charpoly_of(x)          # x^3 + cp2 x^2 + cp1 x + cp0
            a1 = -int(cp[2])
            if a1 not in (0, 1, 2):
                continue
            key = (a1, int(cp[1]), -int(cp[0]))
            if best is None or key < best:
                best = key
    assert best is not None, "Hunter box must contain a generator"
    return best


def _cubic_isomorphic(f1: TotallyRealField, f2: TotallyRealField) -> bool:
    if f1.field_disc != f2.field_disc:
        return False
    return canonical_cubic_poly(f1) == canonical_cubic_poly(f2)


def simplest_cubic(a: int) -> TotallyRealField:
    """The cyclic cubic family x^3 - a x^2 - (a+3) x - 1; totally real with
    regulator of size (log disc)^2, the explicit small-regulator family."""
    if a < -1:
        raise ValueError("family parameter must be >= -1")
    coeffs = (-1, -(a + 3), -a, 1)
    if not monic_int_poly_is_irreducible(coeffs):
        raise ReducibleInputError(f"x^3 - {a}x^2 - {a + 3}x - 1 is reducible")
    return TotallyRealField(coeffs)


# ============================================================================
# embeddings

def minkowski_embedding(obj, bits: int = DEFAULT_ROOT_BITS, theta: Optional[Sequence[int]] = None):
    """EmbeddedLattice whose rows are theta(basis element) for an Order or
    FractionalIdeal; covolume^2 = disc for orders, (N(I)^2 * disc) for ideals.
    theta permutes the embedding columns."""
    from .dynamics import EmbeddedLattice
    if hasattr(obj, "order") and hasattr(obj, "basis_elements"):
        order = obj.order
        elements = obj.basis_elements()
    else:
        order = obj
        elements = order.basis
    fld = order.field
    if fld.degree < 2:
        raise DegreeUnsupportedError("degree < 2 not representable")
    fld.root_intervals(bits)
    rows = np.array([fld.embed(b) for b in elements])
    if theta is not None:
        rows = rows[:, list(theta)]
    return EmbeddedLattice(rows)


# ============================================================================
# unit groups

@dataclass
class UnitGroup:
    order: Order
    fundamental_units: Tuple[Tuple[Fraction, ...], ...]
    unit_norms: Tuple[int, ...]
    log_lattice: np.ndarray          # (n-1) x n rows of log|sigma_i(u)|
    classical_regulator: float
    covolume_regulator: float

    def log_vector(self, x) -> np.ndarray:
        vals = self.order.field.embed(x)
        return np.log(np.abs(vals))


def unit_group(o: Order, box_cap: float = UNIT_BOX_CAP) -> UnitGroup:
    """Fundamental units of O^x mod +-1: exact Pell/continued fractions for
    quadratic orders, certified bounded search for cubic orders."""
    if o.field.degree == 2:
        return _unit_group_quadratic(o)
    return _unit_group_cubic(o, box_cap)


def _unit_group_quadratic(o: Order) -> UnitGroup:
    D = o.disc
    a, b, n = _pell.fundamental_unit_of_disc(D)
    fld = o.field
    d0 = fld.field_disc
    f = math.isqrt(D // d0)
    s = d0 % 2
    # eps = (a + (b f) sqrt(d0))/2 with sqrt(d0) = 2*alpha - s
    c0 = Fraction(a - s * b * f, 2)
    c1 = Fraction(b * f)
    u = (c0, c1)
    assert o.contains(u), "unit not in order"
    # |N(eps)| = 1 makes the log row exactly (log eps, -log eps); computing
    # it from the Pell pair avoids the float cancellation of the tiny
    # conjugate embedding when eps is huge
    log_eps = _pell.log_half_unit(a, b, D)
    logs = np.array([[log_eps, -log_eps]])
    return UnitGroup(order=o, fundamental_units=(u,), unit_norms=(n,),
                     log_lattice=logs, classical_regulator=log_eps,
                     covolume_regulator=math.sqrt(2.0) * log_eps)


def _finish_unit_group(o: Order, units, norms) -> UnitGroup:
    fld = o.field
    logs = np.array([np.log(np.abs(fld.embed(u))) for u in units])
    r = fld.degree - 1
    minor = logs[:, :r]
    classical = abs(float(np.linalg.det(minor)))
    gram = logs @ logs.T
    cov = math.sqrt(abs(float(np.linalg.det(gram))))
    return UnitGroup(order=o,
                     fundamental_units=tuple(tuple(u) for u in units),
                     unit_norms=tuple(norms),
                     log_lattice=logs,
                     classical_regulator=classical,
                     covolume_regulator=cov)


def _unit_group_cubic(o: Order, box_cap: float) -> UnitGroup:
    """Bounded search for a rank-2 system, then index-1 certification by
    tiling the candidate log-cell: any unit reduces modulo the candidate
    lattice into the cell, and a complete tiled search of the cell either
    refines the lattice or proves no sub-multiple regulator is realized."""
    from ._lll import tiled_box_candidates
    fld = o.field
    B = UNIT_BOX_START
    basis = None
    while B <= box_cap:
        found = _units_in_box(o, B)
        basis = _log_basis(o, found)
        if basis is not None:
            break
        B *= 2
    if basis is None:
        raise UnitSearchExhaustedError(f"no rank-2 unit system below box {box_cap}")
    M = o.embedding_matrix()
    for _ in range(60):
        (u1, u2), logs = basis
        refined = False
        for c in tiled_box_candidates(M, logs, 0.0):
            v = c @ M
            prod = abs(float(np.prod(np.asarray(v, dtype=float))))
            if not (0.5 < prod < 1.5):
                continue
            x = o.element([int(t) for t in c])
            if abs(fld.norm(x)) != 1:
                continue
            lv = np.log(np.abs(fld.embed(x)))
            if np.max(np.abs(lv)) < 1e-9:
                continue
            _, res = _babai_reduce(fld, o, x, lv, [(u1, logs[0]), (u2, logs[1])])
            if np.max(np.abs(res)) > 1e-7:
                basis = _log_basis(o, [u1, u2, x])
                refined = True
                break
        if not refined:
            units = [u1, u2]
            norms = [int(fld.norm(u)) for u in units]
            return _finish_unit_group(o, units, norms)
    raise UnitSearchExhaustedError("unit lattice refinement did not stabilize")


def _units_in_box(o: Order, B: float):
    """All units of O (mod +-1, one per sign pair) with every |sigma_i| <= B."""
    fld = o.field
    M = o.embedding_matrix()
    n = fld.degree
    from ._lll import enumerate_short
    cands = enumerate_short(M, n * B * B * (1 + 1e-9))
    out = []
    for c in cands:
        v = c @ M
        if np.max(np.abs(v)) > B * (1 + 1e-12):
            continue
        prod = abs(float(np.prod(v)))
        if not (0.5 < prod < 1.5):
            continue
        x = o.element([int(t) for t in c])
        if abs(fld.norm(x)) == 1:
            out.append(x)
    return out


def _log_basis(o: Order, units):
    """Basis of the log lattice generated by the given units; returns
    ((u1, u2), logs) or None if rank < 2.  Floats with exact unit backing."""
    fld = o.field
    items = []
    for u in units:
        lv = np.log(np.abs(fld.embed(u)))
        if np.max(np.abs(lv)) > 1e-9:
            items.append((u, lv))
    if not items:
        return None
    items.sort(key=lambda t: float(t[1] @ t[1]))
    basis = []
    changed = True
    pool = items[:]
    while changed:
        changed = False
        new_pool = []
        for u, lv in pool:
            red_u, red_v = _babai_reduce(fld, o, u, lv, basis)
            if np.max(np.abs(red_v)) < 1e-9:
                continue
            if len(basis) < 2:
                basis.append((red_u, red_v))
                changed = True
            else:
                new_pool.append((red_u, red_v))
        if new_pool and len(basis) == 2:
            # a remaining vector not in the lattice of the current basis
            # refines it: swap in and restart
            basis = []
            pool = sorted(items + new_pool, key=lambda t: float(t[1] @ t[1]))
            seen = set()
            pool2 = []
            for u, lv in pool:
                k = tuple(np.round(lv, 9))
                if k not in seen:
                    seen.add(k)
                    pool2.append((u, lv))
            pool = pool2
            changed = True
            if len(pool) > 400:
                return None
        else:
            pool = new_pool
    if len(basis) < 2:
        return None
    basis.sort(key=lambda t: float(t[1] @ t[1]))
    (u1, l1), (u2, l2) = basis
    return (u1, u2), np.array([l1, l2])


def _babai_reduce(fld, o: Order, u, lv, basis):
    """Reduce (u, log-vector) modulo the span of basis via rounded
    least-squares; the element is updated exactly alongside."""
    if not basis:
        return u, lv
    Bm = np.array([b[1] for b in basis])
    coef, *_ = np.linalg.lstsq(Bm.T, lv, rcond=None)
    red_u = u
    red_v = lv.copy()
    for (bu, bv), c in zip(basis, coef):
        k = int(round(float(c)))
        if k:
            inv = _unit_inverse(fld, bu)
            factor = fld.power(bu if k < 0 else inv, abs(k))
            red_u = fld.mul(red_u, factor)
            red_v = red_v - k * bv
    return red_u, red_v


def _unit_inverse(fld, u):
    """Inverse of a unit: +- product of the other conjugates, computed via
    the characteristic polynomial: u^{-1} = -(u^2 + c2 u + c1)/c0 for cubics,
    u^{-1} = -(u + c1)/c0 for quadratics."""
    cp = fld.charpoly_of(u)
    n = fld.degree
    if n == 2:
        c0, c1 = cp[0], cp[1]
        out = tuple((-(a + (c1 if k == 0 else 0))) / c0 for k, a in enumerate(u))
        return out
    c0, c1, c2 = cp[0], cp[1], cp[2]
    u2 = fld.mul(u, u)
    out = []
    for k in range(n):
        v = u2[k] + c2 * u[k] + (c1 if k == 0 else 0)
        out.append(-v / c0)
    return tuple(out)
