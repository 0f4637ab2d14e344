"""Fractional-ideal arithmetic over orders of totally real fields, ideal
enumeration by norm, class partitioning, and the Minkowski-statistic
quantities m([J],K), m(K), h_delta(K).

Ideals are integer HNF matrices over the order basis plus a denominator, so
equality of ideals is equality of the canonical form.  All norms and module
operations are exact.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field as dc_field
from fractions import Fraction
from itertools import product as iproduct
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from ._exact import factorize, frac_hnf_rows, frac_mat_det, frac_mat_inv, hnf_rows, lattice_intersect
from ._lll import enumerate_short
from .errors import NonMaximalOrderError
from .fields import Order, UnitGroup, unit_group

# Minkowski constant for totally real degree d: any ideal class has an
# integral representative of norm <= (d!/d^d) sqrt(disc).  Classical value,
# adopted as the external standard.
def minkowski_bound(o: Order) -> float:
    d = o.field.degree
    return math.factorial(d) / d ** d * math.sqrt(o.disc)


class FractionalIdeal:
    """num/den in HNF over the order basis; rows of `num` are O-coordinates."""

    def __init__(self, order: Order, rows: Sequence[Sequence], den: int = 1):
        self.order = order
        n = order.field.degree
        fr = [[Fraction(c, den) for c in r] for r in rows]
        h, d = frac_hnf_rows(fr)
        if len(h) != n:
            raise ValueError("ideal must have full rank")
        self.num = [list(r) for r in h]
        self.den = d
        det = 1
        for i in range(n):
            det *= h[i][i]
        self.norm = Fraction(abs(det), d ** n)

    # -- constructors ---------------------------------------------------------

    @classmethod
    def unit_ideal(cls, order: Order) -> "FractionalIdeal":
        n = order.field.degree
        return cls(order, [[1 if i == j else 0 for j in range(n)] for i in range(n)])

    @classmethod
    def from_generators(cls, order: Order, gens_power: Sequence[Sequence[Fraction]]) -> "FractionalIdeal":
        """O-module generated by the given field elements (power coords)."""
        rows = []
        for g in gens_power:
            for b in order.basis:
                prod = order.field.mul(g, b)
                rows.append(order.to_coords(prod))
        den = 1
        for r in rows:
            for c in r:
                den = den * c.denominator // math.gcd(den, c.denominator)
        int_rows = [[int(c * den) for c in r] for r in rows]
        return cls(order, int_rows, den)

    @classmethod
    def principal(cls, order: Order, x_power: Sequence[Fraction]) -> "FractionalIdeal":
        return cls.from_generators(order, [x_power])

    # -- basic structure -------------------------------------------------------

    def basis_elements(self) -> List[Tuple[Fraction, ...]]:
        """Z-basis of the module as field elements (power coords)."""
        out = []
        for r in self.num:
            x = self.order.element([Fraction(c, self.den) for c in r])
            out.append(x)
        return out

    def key(self):
        return (self.order.key(), self.den, tuple(tuple(r) for r in self.num))

    def __eq__(self, other):
        return isinstance(other, FractionalIdeal) and self.key() == other.key()

    def __hash__(self):
        return hash(self.key())

    def __repr__(self):
        return f"FractionalIdeal(norm={self.norm}, den={self.den}, num={self.num})"

    def contains(self, x_power) -> bool:
        coords = self.order.to_coords(x_power)
        sol = _solve_int_rows(self.num, [c * self.den for c in coords])
        return sol is not None

    # -- arithmetic -------------------------------------------------------------

    def __mul__(self, other: "FractionalIdeal") -> "FractionalIdeal":
        assert self.order is other.order or self.order == other.order
        gens_a = self.basis_elements()
        gens_b = other.basis_elements()
        prods = [self.order.field.mul(a, b) for a in gens_a for b in gens_b]
        return FractionalIdeal.from_generators(self.order, prods)

    def __add__(self, other: "FractionalIdeal") -> "FractionalIdeal":
        d = self.den * other.den // math.gcd(self.den, other.den)
        rows = [[c * (d // self.den) for c in r] for r in self.num] + \
               [[c * (d // other.den) for c in r] for r in other.num]
        return FractionalIdeal(self.order, rows, d)

    def colon(self, other: "FractionalIdeal") -> "FractionalIdeal":
        """(self : other) = {x in K : x * other  subset  self}."""
        o = self.order
        fld = o.field
        n = fld.degree
        W = [list(b) for b in o.basis]                 # order basis, power coords
        # self as a row lattice in power coordinates
        L_rows = [[sum(Fraction(self.num[i][k], self.den) * W[k][j] for k in range(n))
                   for j in range(n)] for i in range(n)]
        cur: Optional[Tuple[List[List[int]], int]] = None
        for g in other.basis_elements():
            Mg = fld.mult_matrix(g)                     # x*g coords = xi . Mg
            Mg_inv = frac_mat_inv(Mg)
            pre = [[sum(Fraction(L_rows[r][k]) * Mg_inv[k][j] for k in range(n))
                    for j in range(n)] for r in range(n)]
            h, d = frac_hnf_rows(pre)
            cur = (h, d) if cur is None else lattice_intersect(cur[0], cur[1], h, d)
        h, d = cur
        # back to order coordinates
        rows = []
        for r in h:
            coords = o.to_coords([Fraction(c, d) for c in r])
            rows.append(coords)
        dd = 1
        for r in rows:
            for c in r:
                dd = dd * c.denominator // math.gcd(dd, c.denominator)
        return FractionalIdeal(o, [[int(c * dd) for c in r] for r in rows], dd)

    def inverse(self) -> "FractionalIdeal":
        """(O : I); the inverse for invertible (e.g. maximal-order) ideals."""
        return FractionalIdeal.unit_ideal(self.order).colon(self)

    def conjugate(self) -> "FractionalIdeal":
        """Galois conjugate (degree 2): for maximal-order ideals this lies in
        the inverse class since I Ibar = N(I) O."""
        fld = self.order.field
        assert fld.degree == 2
        t = fld.trace(fld.gen())
        gens = []
        for b in self.basis_elements():
            gens.append((b[0] + b[1] * t, -b[1]))
        return FractionalIdeal.from_generators(self.order, gens)

    def multiplier_ring_is(self, order: Order) -> bool:
        """True iff (I : I) equals the given order (properness test)."""
        ring = self.colon(self)
        n = order.field.degree
        ident = FractionalIdeal.unit_ideal(order)
        return ring == ident

    def embedding_matrix(self) -> np.ndarray:
        fld = self.order.field
        return np.array([fld.embed(b) for b in self.basis_elements()])


def _solve_int_rows(A: List[List[int]], target: List[Fraction]) -> Optional[List[Fraction]]:
    """z with z*A = target and z integral, if it exists (A upper-tri HNF)."""
    n = len(A)
    z = [Fraction(0)] * n
    rem = [Fraction(t) for t in target]
    for i in range(n - 1, -1, -1):
        piv = A[i][i]
        q = rem[i] / piv
        if q.denominator != 1:
            return None
        z[i] = q
        for j in range(n):
            rem[j] -= q * A[i][j]
    if any(r != 0 for r in rem):
        return None
    return z


# ============================================================================
# enumeration of integral ideals

def _stable_hnfs_prime_power(o: Order, p: int, kmax: int) -> Dict[int, List[FractionalIdeal]]:
    """All O-stable sublattices of O of index p^k, 1 <= k <= kmax.
    Candidate HNFs per diagonal pattern are screened in a single vectorized
    integer pass (A Mg adj(A) = 0 mod det for each basis multiplier Mg)."""
    n = o.field.degree
    T = o.mult_table()
    mult_mats = [np.array([[T[i][g][m] for m in range(n)] for i in range(n)],
                          dtype=np.int64) for g in range(n)]
    out: Dict[int, List[FractionalIdeal]] = {k: [] for k in range(1, kmax + 1)}
    for k in range(1, kmax + 1):
        det = p ** k
        for diag in _compositions(k, n):
            d = [p ** e for e in diag]
            free = [(row, col) for col in range(1, n) for row in range(col)]
            grids = np.meshgrid(*[np.arange(d[col]) for row, col in free],
                                indexing="ij") if free else []
            N = 1
            for row, col in free:
                N *= d[col]
            A = np.zeros((N, n, n), dtype=np.int64)
            for i in range(n):
                A[:, i, i] = d[i]
            for (row, col), g in zip(free, grids):
                A[:, row, col] = g.reshape(-1)
            adj = _batched_adjugate(A)
            ok = np.ones(N, dtype=bool)
            for Mg in mult_mats:
                B = np.einsum("nij,jk,nkl->nil", A, Mg, adj)
                ok &= np.all(B % det == 0, axis=(1, 2))
            for idx in np.nonzero(ok)[0]:
                out[k].append(FractionalIdeal(o, [[int(v) for v in row]
                                                  for row in A[idx]]))
    return out


def _batched_adjugate(A: np.ndarray) -> np.ndarray:
    n = A.shape[1]
    if n == 2:
        adj = np.empty_like(A)
        adj[:, 0, 0] = A[:, 1, 1]
        adj[:, 0, 1] = -A[:, 0, 1]
        adj[:, 1, 0] = -A[:, 1, 0]
        adj[:, 1, 1] = A[:, 0, 0]
        return adj
    adj = np.empty_like(A)
    for i in range(3):
        for j in range(3):
            r = [t for t in range(3) if t != j]
            c = [t for t in range(3) if t != i]
            m = (A[:, r[0], c[0]] * A[:, r[1], c[1]]
                 - A[:, r[0], c[1]] * A[:, r[1], c[0]])
            adj[:, i, j] = m if (i + j) % 2 == 0 else -m
    return adj


def _compositions(k: int, n: int):
    if n == 1:
        yield (k,)
        return
    for first in range(k + 1):
        for rest in _compositions(k - first, n - 1):
            yield (first,) + rest


def _adjugate_int(A):
    n = len(A)
    if n == 2:
        return [[A[1][1], -A[0][1]], [-A[1][0], A[0][0]]]
    c = lambda i, j: A[i][j]
    adj = [[0] * n for _ in range(n)]
    for i in range(3):
        for j in range(3):
            i1, i2 = [t for t in range(3) if t != j]
            j1, j2 = [t for t in range(3) if t != i]
            m = c(i1, j1) * c(i2, j2) - c(i1, j2) * c(i2, j1)
            adj[i][j] = m if (i + j) % 2 == 0 else -m
    return adj


def _mat_mul_int(A, B):
    n = len(A)
    m = len(B[0])
    return [[sum(A[i][k] * B[k][j] for k in range(len(B))) for j in range(m)]
            for i in range(n)]


_IDEAL_CACHE: Dict[tuple, Dict[int, List[FractionalIdeal]]] = {}


def enumerate_integral_ideals(o: Order, norm_bound: int) -> List[FractionalIdeal]:
    """All integral ideals of norm <= norm_bound, canonical HNF, sorted by
    norm then lexicographically.  Prime-power parts are enumerated by HNF
    with a multiplication-stability check and combined multiplicatively."""
    if norm_bound < 1:
        return []
    key = o.key()
    cache = _IDEAL_CACHE.setdefault(key, {})
    by_norm: Dict[int, List[FractionalIdeal]] = {1: [FractionalIdeal.unit_ideal(o)]}
    # p-primary pieces
    pparts: Dict[int, Dict[int, List[FractionalIdeal]]] = {}
    for p in _primes_leq(norm_bound):
        kmax = 0
        while p ** (kmax + 1) <= norm_bound:
            kmax += 1
        ck = ("pp", p, kmax)
        if ck not in cache:
            cache[ck] = _stable_hnfs_prime_power(o, p, kmax)
        pparts[p] = cache[ck]
    for m in range(2, norm_bound + 1):
        fac = factorize(m)
        parts = []
        ok = True
        for p, e in fac.items():
            lst = pparts[p].get(e, [])
            lst = [I for I in lst if I.norm == p ** e]
            if not lst:
                ok = False
                break
            parts.append(lst)
        if not ok:
            continue
        combo: List[FractionalIdeal] = []
        for choice in iproduct(*parts):
            I = choice[0]
            for J in choice[1:]:
                I = I * J
            assert I.norm == m
            combo.append(I)
        if combo:
            by_norm[m] = combo
    out = []
    for m in sorted(by_norm):
        out.extend(sorted(by_norm[m], key=lambda I: (I.den, tuple(map(tuple, I.num)))))
    return out


def _primes_leq(n: int) -> List[int]:
    from ._exact import primes_up_to
    return primes_up_to(n)


# ============================================================================
# class equivalence

_UNIT_CACHE: Dict[tuple, UnitGroup] = {}


def _units(o: Order) -> UnitGroup:
    key = o.key()
    if key not in _UNIT_CACHE:
        _UNIT_CACHE[key] = unit_group(o)
    return _UNIT_CACHE[key]


def _log_covering_radius(ug: UnitGroup) -> float:
    """Babai bound: any unit class has a log-representative with sup norm
    <= half the sum of basis sup norms."""
    return 0.5 * sum(float(np.max(np.abs(row))) for row in ug.log_lattice)


def _tiled_box_candidates(M: np.ndarray, ug: UnitGroup, mu: float,
                          slack: float = 0.05):
    """Norm-bounded lattice points, complete modulo the unit action; see
    _lll.tiled_box_candidates."""
    from ._lll import tiled_box_candidates
    return tiled_box_candidates(M, ug.log_lattice, mu, slack)


def _oriented_basis(I: FractionalIdeal):
    """Basis (a1, a2) with positive embedding determinant; the determinant
    has magnitude N(I) sqrt(disc), so its float sign is reliable."""
    a1, a2 = I.basis_elements()
    M = I.embedding_matrix()
    if np.linalg.det(M) < 0:
        a1, a2 = a2, a1
    return a1, a2


def quadratic_form_of_ideal(I: FractionalIdeal) -> Tuple[int, int, int]:
    """The integral binary form N(x a1 + y a2)/N(I) on an oriented basis."""
    fld = I.order.field
    a1, a2 = _oriented_basis(I)
    na = fld.norm(a1) / I.norm
    nc = fld.norm(a2) / I.norm
    nb = (fld.trace(a1) * fld.trace(a2) - fld.trace(fld.mul(a1, a2))) / I.norm
    assert na.denominator == nb.denominator == nc.denominator == 1
    return (int(na), int(nb), int(nc))


def _class_equal_quadratic(i: FractionalIdeal, j: FractionalIdeal,
                           with_witness: bool):
    """Exact route via indefinite form equivalence with transform tracking:
    x i = j iff Q_j o U = sgn(N(x)) Q_i for some U in GL_2(Z)."""
    from .modular2 import form_equivalence_transform
    fld = i.order.field
    Qi = quadratic_form_of_ideal(i)
    Qj = quadratic_form_of_ideal(j)
    D = Qi[1] ** 2 - 4 * Qi[0] * Qi[2]
    res = form_equivalence_transform(Qj, Qi, D)
    if res is None:
        return (False, None) if with_witness else False
    U, s = res
    b1, b2 = _oriented_basis(j)
    a1, _ = _oriented_basis(i)
    num = tuple(U[0][0] * p + U[1][0] * q for p, q in zip(b1, b2))
    x = _field_div(fld, num, a1)
    assert abs(fld.norm(x)) == j.norm / i.norm
    assert _scale_ideal(i, x) == j
    return (True, x) if with_witness else True


def _field_div(fld, num, den):
    Md = fld.mult_matrix(den)
    from ._exact import frac_solve
    return tuple(frac_solve(Md, list(num)))


def class_equal(i: FractionalIdeal, j: FractionalIdeal,
                with_witness: bool = False):
    """True iff x*i = j for some field element x; witness returned on demand.

    Quadratic orders go through exact form-cycle equivalence (robust for
    huge fundamental units); cubic orders use a complete tiled box search
    (a witness can be unit-translated into a balanced box)."""
    assert i.order == j.order
    o = i.order
    fld = o.field
    n = fld.degree
    if i == j:
        return (True, fld.one()) if with_witness else True
    if (j.norm / i.norm) <= 0:
        return (False, None) if with_witness else False
    if n == 2:
        return _class_equal_quadratic(i, j, with_witness)
    t = j.norm / i.norm
    C = j.colon(i)
    ug = _units(o)
    M = C.embedding_matrix()
    basis = C.basis_elements()
    tf = float(t)
    mu = math.log(tf) / n
    for c in _tiled_box_candidates(M, ug, mu):
        v = c @ M
        prod = abs(float(np.prod(v)))
        if not (0.7 * tf < prod < 1.5 * tf):
            continue
        x = tuple(sum(Fraction(int(ci)) * basis[k][m] for k, ci in enumerate(c))
                  for m in range(n))
        if abs(fld.norm(x)) == t:
            xi = _scale_ideal(i, x)
            if xi == j:
                return (True, x) if with_witness else True
    return (False, None) if with_witness else False


def _scale_ideal(I: FractionalIdeal, x) -> FractionalIdeal:
    gens = [I.order.field.mul(x, b) for b in I.basis_elements()]
    return FractionalIdeal.from_generators(I.order, gens)


@dataclass
class IdealClass:
    representative: FractionalIdeal
    min_norm: Optional[int] = None

    def order(self) -> Order:
        return self.representative.order


def class_representatives(o: Order) -> List[IdealClass]:
    """One representative per ideal class of a maximal order; completeness by
    enumeration up to the Minkowski bound."""
    if not o.is_maximal:
        raise NonMaximalOrderError("class theory restricted to maximal orders in v1")
    bound = int(math.floor(minkowski_bound(o))) or 1
    ideals = enumerate_integral_ideals(o, max(bound, 1))
    classes: List[IdealClass] = []
    for I in ideals:
        if not any(class_equal(I, c.representative) for c in classes):
            classes.append(IdealClass(representative=I))
    return classes


def minimal_class_norm(c: IdealClass) -> int:
    """Least norm of an integral ideal in the class; ascending enumeration,
    first hit is minimal."""
    if c.min_norm is not None:
        return c.min_norm
    o = c.representative.order
    bound = max(int(math.floor(minkowski_bound(o))), 1)
    for I in enumerate_integral_ideals(o, bound):
        if class_equal(I, c.representative):
            c.min_norm = int(I.norm)
            return c.min_norm
    raise AssertionError("no representative below the Minkowski bound")


@dataclass
class MinkowskiStat:
    disc: int
    n_classes: int
    m_K: int
    min_norms: Tuple[int, ...]
    regulator: float

    def h_delta(self, delta: float) -> int:
        thr = delta * math.sqrt(self.disc)
        return sum(1 for m in self.min_norms if m > thr)


def field_minkowski_stat(o: Order) -> MinkowskiStat:
    """m_K = max over classes of the least class norm; h_delta counts classes
    with m([J],K) > delta * sqrt(disc)."""
    classes = class_representatives(o)
    norms = tuple(sorted(minimal_class_norm(c) for c in classes))
    ug = _units(o)
    return MinkowskiStat(disc=o.disc, n_classes=len(classes),
                         m_K=max(norms), min_norms=norms,
                         regulator=ug.classical_regulator)


# ============================================================================
# proper classes of (possibly non-maximal) quadratic orders

def quadratic_proper_classes(o: Order) -> List[IdealClass]:
    """Proper-ideal classes of a quadratic order by direct ascending-norm HNF
    enumeration: integral ideals whose multiplier ring is exactly O,
    partitioned by x*I = J equivalence."""
    assert o.field.degree == 2
    D = o.disc
    bound = max(int(math.isqrt(D // 3)) + 1, 1)
    classes: List[IdealClass] = []
    for I in enumerate_integral_ideals(o, bound):
        if not I.multiplier_ring_is(o):
            continue
        if not any(class_equal(I, c.representative) for c in classes):
            classes.append(IdealClass(representative=I))
    return classes
