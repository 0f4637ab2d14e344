"""Periodic torus orbits from triples (field, lattice class, embedding
ordering): discriminants by two independent exact routes, volumes, cusp
excursion, and compact-set membership.

The wedge route realizes the torus Lie algebra inside M_n(Q)/center using
the multiplication action on the orbit's lattice, with the invariant form
B(X,Y) = n tr(XY) - tr(X) tr(Y); the order route is the trace-form
determinant of the multiplier order.  The two agree up to n^(n-2) exactly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from itertools import permutations
from typing import List, Optional, Sequence, Tuple

import numpy as np

from ._exact import frac_mat_det
from ._lll import enumerate_short, lll_reduce, min_sup_norm
from .errors import InvalidLatticeError
from .fields import Order, TotallyRealField, UnitGroup
from .ideals import FractionalIdeal, _units, _log_covering_radius
from .dynamics import EmbeddedLattice


# ============================================================================
# Lie-algebra data for the wedge-route discriminant

@dataclass
class LieTorusData:
    """Exact data of the torus Lie algebra t inside g = M_n(Q)/center.

    t_basis: trace-adjusted integral representatives n*X - tr(X)*Id of a
    basis of t intersected with the image of M_n(Z);
    wedge_gram: det B(e_i, e_j) on that basis, a positive integer equal to
    the least m with m * iota(t) integral (checked by exact divisibility).
    """
    t_basis: List[List[List[int]]]
    wedge_gram: int


def _bform(fld: TotallyRealField, x, y) -> Fraction:
    n = fld.degree
    return n * fld.trace(fld.mul(x, y)) - fld.trace(x) * fld.trace(y)


def lie_torus_data(order: Order, lattice: Optional[FractionalIdeal] = None) -> LieTorusData:
    fld = order.field
    n = fld.degree
    lifts = order.quotient_mod_one()
    gram = [[_bform(fld, a, b) for b in lifts] for a in lifts]
    det = frac_mat_det(gram)
    assert det.denominator == 1 and det > 0
    wedge = int(det)

    # integral matrix realization: multiplication on the lattice basis
    if lattice is None:
        basis_elts = list(order.basis)
        ref = order
    else:
        basis_elts = lattice.basis_elements()
        ref = lattice.order
    Winv = None
    mats = []
    coords_rows = []
    for e in lifts:
        X = _mult_matrix_on_basis(fld, e, basis_elts)
        tr = sum(X[i][i] for i in range(n))
        adj = [[n * X[i][j] - (tr if i == j else 0) for j in range(n)] for i in range(n)]
        assert all(v.denominator == 1 for row in adj for v in row), \
            "trace-adjusted representative must be integral"
        mats.append([[int(v) for v in row] for row in adj])
        # coordinates of the class of X in the basis of M_n(Z)/Z*Id:
        # off-diagonals X_ij and X_ii - X_nn for i < n
        assert all(v.denominator == 1 for row in X for v in row)
        Xi = [[int(v) for v in row] for row in X]
        coords = [Xi[i][j] for i in range(n) for j in range(n) if i != j]
        coords += [Xi[i][i] - Xi[n - 1][n - 1] for i in range(n - 1)]
        coords_rows.append(coords)

    # primitivity of w = e_1 ^ ... ^ e_{n-1} in wedge^(n-1) of M_n(Z)/Z:
    # the gcd of the (n-1)-minors must be 1, making wedge_gram the least m
    # with m * iota(t) in V_Z
    g = 0
    m = len(coords_rows[0])
    idxs = range(m)
    from itertools import combinations
    for cols in combinations(idxs, n - 1):
        sub = [[coords_rows[r][c] for c in cols] for r in range(n - 1)]
        if n - 1 == 1:
            minor = sub[0][0]
        else:
            minor = sub[0][0] * sub[1][1] - sub[0][1] * sub[1][0]
        g = math.gcd(g, abs(minor))
        if g == 1:
            break
    assert g == 1, "wedge of a saturated-sublattice basis must be primitive"
    return LieTorusData(t_basis=mats, wedge_gram=wedge)


def _mult_matrix_on_basis(fld, x, basis_elts):
    """Matrix of multiplication by x in the given module basis (rows)."""
    n = fld.degree
    W = [list(b) for b in basis_elts]
    from ._exact import frac_mat_inv
    Winv = frac_mat_inv(W)
    rows = []
    for b in basis_elts:
        prod = fld.mul(x, b)
        coords = [sum(Fraction(prod[k]) * Winv[k][j] for k in range(n)) for j in range(n)]
        rows.append(coords)
    return rows


# ============================================================================
# orbits

@dataclass
class TorusOrbit:
    field: TotallyRealField
    lattice: FractionalIdeal
    theta: Tuple[int, ...]
    order: Order                      # multiplier order O_L
    disc_order_route: int
    disc_wedge_route: int
    volume: float                     # covolume regulator of O_L
    classical_regulator: float
    min_norm_over_lattice: Fraction   # min |N(x)| / N(L), exact
    ref_disc: int                     # disc of the lattice's reference order
    _key_cache: object = None

    @property
    def cusp_excursion(self) -> float:
        return float(self.min_norm_over_lattice) / math.sqrt(self.ref_disc)

    def cusp_excursion_exact(self) -> Tuple[Fraction, int]:
        """(q, den_sq) with delta* = q / sqrt(den_sq)."""
        return self.min_norm_over_lattice, self.ref_disc

    def embedded(self, normalize: bool = True) -> EmbeddedLattice:
        rows = self.lattice.embedding_matrix()[:, list(self.theta)]
        lat = EmbeddedLattice(rows)
        return lat.rescaled(1.0) if normalize else lat

    def to_json(self) -> dict:
        q, dsq = self.cusp_excursion_exact()
        return {
            "field": [str(c) for c in self.field.min_poly[:-1]],
            "theta": list(self.theta),
            "disc": str(self.disc_order_route),
            "disc_wedge": str(self.disc_wedge_route),
            "volume": float(f"{self.volume:.12g}"),
            "classical_regulator": float(f"{self.classical_regulator:.12g}"),
            "cusp_excursion_num": str(q),
            "cusp_excursion_den_sq": str(dsq),
        }


def orbit_from_triple(k: TotallyRealField, l: FractionalIdeal,
                      theta: Sequence[int]) -> TorusOrbit:
    """Construct the periodic orbit of the triple; all invariants populated.

    theta is a permutation of range(n) ordering the embedding columns.
    """
    n = k.degree
    theta = tuple(theta)
    if sorted(theta) != list(range(n)):
        raise ValueError(f"theta must permute 0..{n - 1}")
    if len(l.num) != n:
        raise InvalidLatticeError("lattice rank below field degree")
    OL = multiplier_order(l)
    ld = lie_torus_data(OL, l)
    ug = _units(OL)
    q = _min_abs_norm(l, ug)
    return TorusOrbit(field=k, lattice=l, theta=theta, order=OL,
                      disc_order_route=OL.disc,
                      disc_wedge_route=ld.wedge_gram,
                      volume=ug.covolume_regulator,
                      classical_regulator=ug.classical_regulator,
                      min_norm_over_lattice=q / l.norm,
                      ref_disc=l.order.disc)


def multiplier_order(l: FractionalIdeal) -> Order:
    """The associated order O_L = {x in K : x L subset L} as an Order."""
    ring = l.colon(l)
    rows = [list(b) for b in ring.basis_elements()]
    return Order(l.order.field, rows)


def discriminant_order_route(orbit: TorusOrbit) -> int:
    return orbit.disc_order_route


def discriminant_wedge_route(orbit: TorusOrbit) -> int:
    return orbit.disc_wedge_route


def orbit_volume(orbit: TorusOrbit) -> float:
    return orbit.volume


def lattice_cusp_excursion(l: FractionalIdeal) -> Tuple[Fraction, int]:
    """(q, den_sq) with delta* = q / sqrt(den_sq) for the flow orbit of the
    embedded lattice: q = min |N(x)| / N(L), exact."""
    ug = None if l.order.field.degree == 2 else _units(l.order)
    return _min_abs_norm(l, ug) / l.norm, l.order.disc


def _min_abs_norm(l: FractionalIdeal, ug: Optional[UnitGroup]) -> Fraction:
    """Exact min |N(x)| over nonzero x in the lattice.  Quadratic lattices
    reduce to the cycle minimum of the associated indefinite form; cubic
    lattices use the complete tiled box search (Minkowski bounds min|N| by
    the covolume, and a minimizer can be unit-translated into a balanced
    box)."""
    from .ideals import _tiled_box_candidates
    fld = l.order.field
    n = fld.degree
    if n == 2:
        from .ideals import quadratic_form_of_ideal
        from .modular2 import form_minimum
        return l.norm * form_minimum(quadratic_form_of_ideal(l))
    if ug is None:
        ug = _units(l.order)
    covol = float(l.norm) * math.sqrt(l.order.disc)
    mu = math.log(covol) / n
    M = l.embedding_matrix()
    basis = l.basis_elements()
    scored = []
    for c in _tiled_box_candidates(M, ug, mu):
        v = c @ M
        scored.append((abs(float(np.prod(v))), c))
    scored.sort(key=lambda t: t[0])
    best: Optional[Fraction] = None
    for approx, c in scored:
        if best is not None and approx > float(best) * (1 + 1e-6):
            break
        x = tuple(sum(Fraction(int(ci)) * basis[k][m] for k, ci in enumerate(c))
                  for m in range(n))
        nn = abs(fld.norm(x))
        if nn != 0 and (best is None or nn < best):
            best = nn
    assert best is not None
    return best


def cusp_excursion(orbit: TorusOrbit) -> float:
    """delta* = min |N(x)| / covol over the lattice; the largest delta with
    the whole flow orbit inside Omega'_delta."""
    return orbit.cusp_excursion


def in_omega_prime(orbit: TorusOrbit, delta: float) -> bool:
    """Closed condition delta* >= delta."""
    if delta <= 0:
        raise ValueError("delta must be positive")
    return orbit.cusp_excursion >= delta


# ============================================================================
# Omega(R) membership on the group side

def _gz_basis_matrices(n: int) -> List[np.ndarray]:
    """Integral basis of g_Z for the compactness gauge Omega(R): the
    trace-zero integer matrices, E_ij (i != j) and E_ii - E_{i+1,i+1}.
    Elementary matrices have Frobenius norm exactly 1, so the identity coset
    enters Omega(R) exactly at R = 1."""
    out = []
    for i in range(n):
        for j in range(n):
            if i != j:
                E = np.zeros((n, n))
                E[i, j] = 1.0
                out.append(E)
    for i in range(n - 1):
        E = np.zeros((n, n))
        E[i, i] = 1.0
        E[i + 1, i + 1] = -1.0
        out.append(E)
    return out


def omega_R_membership(g: np.ndarray, R: float) -> bool:
    """True iff min over nonzero v in g_Z of |Ad(g^{-1}) v|_F >= 1/R."""
    if R <= 0:
        raise ValueError("R must be positive")
    g = np.asarray(g, dtype=float)
    n = g.shape[0]
    det = np.linalg.det(g)
    if abs(det) < 1e-300:
        raise InvalidLatticeError("group element must be invertible")
    g = g / abs(det) ** (1.0 / n)
    ginv = np.linalg.inv(g)
    rows = []
    for Bmat in _gz_basis_matrices(n):
        rows.append((ginv @ Bmat @ g).reshape(-1))
    basis = np.array(rows)
    _, shortest = _shortest_l2(basis)
    return shortest >= 1.0 / R


def omega_R_threshold(g: np.ndarray) -> float:
    """Least R with g in Omega(R)."""
    g = np.asarray(g, dtype=float)
    n = g.shape[0]
    g = g / abs(np.linalg.det(g)) ** (1.0 / n)
    ginv = np.linalg.inv(g)
    rows = [(ginv @ B @ g).reshape(-1) for B in _gz_basis_matrices(n)]
    _, shortest = _shortest_l2(np.array(rows))
    return 1.0 / shortest


def _shortest_l2(basis: np.ndarray):
    from ._lll import shortest_vector
    return shortest_vector(basis)


# ============================================================================
# sampling the orbit torus

def sample_orbit(orbit: TorusOrbit, grid: int) -> List[EmbeddedLattice]:
    """grid^(n-1) unit-covolume lattices theta(L) exp(x), x on a uniform grid
    over a fundamental parallelepiped of the log-unit lattice."""
    if grid < 1:
        raise ValueError("grid must be >= 1")
    return [EmbeddedLattice(rows) for rows in _sample_rows(orbit, grid)]


def _sample_rows(orbit: TorusOrbit, grid: int):
    ug = _units(orbit.order)
    n = orbit.field.degree
    rows0 = orbit.lattice.embedding_matrix()[:, list(orbit.theta)]
    covol = abs(np.linalg.det(rows0))
    rows0 = rows0 / covol ** (1.0 / n)
    logs = ug.log_lattice[:, list(orbit.theta)]
    out = []
    for idx in np.ndindex(*([grid] * (n - 1))):
        x = sum((t / grid) * logs[i] for i, t in enumerate(idx)) if n > 1 else np.zeros(n)
        out.append(rows0 * np.exp(x)[None, :])
    return out


def escaped_mass_fraction(orbit: TorusOrbit, delta: float, grid: int) -> float:
    """Fraction of sampled orbit points whose (covolume-1) lattice contains a
    nonzero vector with sup-norm^n < delta: the empirical mass outside
    Omega'_delta."""
    if not (0 < delta <= 1):
        raise ValueError("delta in (0, 1] required")
    if grid < 1:
        raise ValueError("grid must be >= 1")
    n = orbit.field.degree
    thr = delta ** (1.0 / n)
    hits = 0
    total = 0
    for rows in _sample_rows(orbit, grid):
        total += 1
        if _has_short_sup_vector(rows, thr):
            hits += 1
    return hits / total


def _has_short_sup_vector(rows: np.ndarray, thr: float) -> bool:
    n = rows.shape[0]
    cands = enumerate_short(rows, n * thr * thr * (1 - 1e-12))
    for c in cands:
        v = c @ rows
        if np.max(np.abs(v)) < thr * (1 - 1e-12):
            return True
    return False


# ============================================================================
# Haar entropy of the diagonal flow

def haar_entropy(weights: Sequence[float]) -> float:
    """Entropy of the diagonal flow exp(t x) for Haar measure: the sum over
    ordered root pairs of max(0, w_i - w_j)."""
    w = list(weights)
    if abs(sum(w)) > 1e-12:
        raise ValueError("weights must sum to 0")
    return float(sum(max(0.0, a - b) for a in w for b in w))


# ============================================================================
# canonical identity of orbits

def orbit_key(orbit: TorusOrbit):
    """Canonical form: orbits are equal iff these keys agree.  The class
    representative is reduced by principal scaling (least-norm equivalent
    integral ideal, canonical HNF); theta is reduced modulo the field's
    automorphism action."""
    if orbit._key_cache is not None:
        return orbit._key_cache
    from .ideals import class_equal, enumerate_integral_ideals
    o = orbit.lattice.order
    rep = None
    bound = 1
    while rep is None and bound <= 4096:
        for I in enumerate_integral_ideals(o, bound):
            if class_equal(I, orbit.lattice):
                rep = I
                break
        bound *= 2
    assert rep is not None
    best = None
    for beta, perm in orbit.field.automorphisms():
        theta2 = tuple(orbit.theta[perm[i]] for i in range(len(perm)))
        key = (theta2,)
        if best is None or key < best:
            best = key
    orbit._key_cache = (orbit.field.min_poly, orbit.order.disc, rep.key(), best)
    return orbit._key_cache
