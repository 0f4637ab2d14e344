"""Geometry on the group and the space of lattices: left-invariant distance,
lattice reduction, orbit-separation measurement, and empirical tube masses.

Points of the lattice space are row-basis matrices modulo left unimodular
re-basing and scalar homothety; the diagonal flow acts on the right.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field as dc_field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
import scipy.linalg

from ._lll import enumerate_short, lll_reduce, min_sup_norm, shortest_vector
from .errors import DistanceUndefinedError, InsufficientInputError, InvalidLatticeError


# ============================================================================
# embedded lattices

class EmbeddedLattice:
    """An n x n real basis matrix (rows span the lattice) up to homothety."""

    def __init__(self, basis: np.ndarray, reduced: bool = False):
        basis = np.asarray(basis, dtype=float)
        if basis.ndim != 2 or basis.shape[0] != basis.shape[1]:
            raise InvalidLatticeError("square basis matrix required")
        det = float(np.linalg.det(basis))
        if not np.isfinite(det) or abs(det) < 1e-250:
            raise InvalidLatticeError("degenerate basis")
        self.basis = basis
        self.covolume = abs(det)
        self.reduced = reduced

    @property
    def dim(self) -> int:
        return self.basis.shape[0]

    def rescaled(self, covolume: float = 1.0) -> "EmbeddedLattice":
        s = (covolume / self.covolume) ** (1.0 / self.dim)
        return EmbeddedLattice(self.basis * s, reduced=self.reduced)

    def shortest(self) -> Tuple[np.ndarray, float]:
        """Exact shortest nonzero vector (coefficients, l2 length)."""
        return shortest_vector(self.basis)

    def min_sup(self) -> float:
        return min_sup_norm(self.basis)

    def __repr__(self):
        return f"EmbeddedLattice(dim={self.dim}, covol={self.covolume:.6g}, reduced={self.reduced})"


def reduce(l: EmbeddedLattice) -> EmbeddedLattice:
    """Lovasz-reduced basis (delta = 0.99) spanning the same lattice; the
    first row is within the 2^((n-1)/2) factor of the exact shortest vector,
    which remains available exactly through enumeration."""
    B, U = lll_reduce(l.basis, delta=0.99)
    out = EmbeddedLattice(B, reduced=True)
    assert abs(out.covolume - l.covolume) < 1e-9 * max(1.0, l.covolume)
    return out


# ============================================================================
# flow directions

@dataclass
class FlowDirection:
    weights: Tuple[float, ...]

    def __post_init__(self):
        w = tuple(float(x) for x in self.weights)
        if abs(sum(w)) > 1e-12:
            raise ValueError("weights must sum to 0")
        object.__setattr__(self, "weights", w)

    @property
    def kappa(self) -> float:
        w = self.weights
        return min(abs(a - b) for i, a in enumerate(w) for b in w[i + 1:])

    def is_regular(self) -> bool:
        return self.kappa > 0


# ============================================================================
# group distance

def _det_normalize(g: np.ndarray) -> np.ndarray:
    d = float(np.linalg.det(g))
    if abs(d) < 1e-300:
        raise InvalidLatticeError("singular group element")
    return g / abs(d) ** (1.0 / g.shape[0])


def _principal_log(A: np.ndarray) -> Optional[np.ndarray]:
    """Principal matrix log if the spectrum avoids (-inf, 0]; else None."""
    ev = np.linalg.eigvals(A)
    for lam in ev:
        if lam.real <= 0 and abs(lam.imag) < 1e-12 * max(1.0, abs(lam.real)):
            return None
    import warnings
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        X = scipy.linalg.logm(A)
    if np.max(np.abs(X.imag)) > 1e-8:
        return None
    return X.real


def group_distance(g1: np.ndarray, g2: np.ndarray) -> float:
    """|log(g1^{-1} g2)|_F on det-normalized representatives, minimized over
    the +-1 scalar ambiguity of PGL."""
    g1 = _det_normalize(np.asarray(g1, dtype=float))
    g2 = _det_normalize(np.asarray(g2, dtype=float))
    A = np.linalg.solve(g1, g2)
    best = None
    for s in (1.0, -1.0):
        X = _principal_log(s * A)
        if X is not None:
            d = float(np.linalg.norm(X, "fro"))
            best = d if best is None or d < best else best
    if best is None:
        raise DistanceUndefinedError("outside the logarithm's normal neighborhood")
    return best


def coarse_distance(g1: np.ndarray, g2: np.ndarray) -> float:
    """Bi-invariant-style fallback when the log is undefined: min over signs
    of |g1^{-1} g2 - Id|_F; agrees with group_distance to first order."""
    g1 = _det_normalize(np.asarray(g1, dtype=float))
    g2 = _det_normalize(np.asarray(g2, dtype=float))
    A = np.linalg.solve(g1, g2)
    I = np.eye(A.shape[0])
    return min(float(np.linalg.norm(s * A - I, "fro")) for s in (1.0, -1.0))


def distance_or_coarse(g1: np.ndarray, g2: np.ndarray) -> float:
    try:
        return group_distance(g1, g2)
    except DistanceUndefinedError:
        return coarse_distance(g1, g2)


# ============================================================================
# separation of periodic orbits

@dataclass
class SeparationResult:
    min_dist: float
    pair: Tuple[int, int]
    disc_product: int
    scaled_stat: float
    window_R: float
    grid: int


def _orbit_window_samples(orbit, window_R: float, grid: int) -> List[np.ndarray]:
    """Representatives g(t) on the orbit with |Ad(g)| <= window_R:
    LLL-reduced unit-covolume bases along the flow, filtered by condition
    number (the operator norm of Ad is bounded by cond(g))."""
    from .orbits import _sample_rows
    out = []
    for rows in _sample_rows_flow(orbit, grid):
        B, _ = lll_reduce(rows)
        cond = np.linalg.cond(B)
        if cond <= window_R:
            out.append(_canonical_rep(B))
    return out


def _sample_rows_flow(orbit, grid: int):
    """Unit-covolume bases along one period of the r = 1 flow (n = 2), or
    the log-unit fundamental cell (n = 3)."""
    from .orbits import _sample_rows
    return _sample_rows(orbit, grid)


def _canonical_rep(B: np.ndarray) -> np.ndarray:
    """Sign-normalize an LLL basis so nearby lattices give nearby matrices."""
    B = B.copy()
    for i in range(B.shape[0]):
        j = int(np.argmax(np.abs(B[i])))
        if B[i, j] < 0:
            B[i] = -B[i]
    return B


def pairwise_separations(orbits: Sequence, window_R: float, grid: int) -> List[SeparationResult]:
    """Min sampled group distance for every pair of distinct orbits; orbit
    samples are generated once and pairs screened by a vectorized coarse
    metric before exact log-distance refinement."""
    from .orbits import orbit_key
    if len(orbits) < 2:
        raise InsufficientInputError("need at least two orbits")
    keys = [orbit_key(o) for o in orbits]
    if len(set(keys)) < len(orbits):
        raise InsufficientInputError("duplicate orbits in input")
    samples = [_orbit_window_samples(o, window_R, grid) for o in orbits]
    stacks = [np.stack(s) if s else None for s in samples]
    invs = [np.linalg.inv(s) if s is not None else None for s in stacks]
    out = []
    for i in range(len(orbits)):
        if stacks[i] is None:
            continue
        for j in range(i + 1, len(orbits)):
            if stacks[j] is None:
                continue
            P = np.einsum("aij,bjk->abik", invs[i], stacks[j])
            I = np.eye(P.shape[-1])
            co = np.minimum(
                np.linalg.norm(P - I, axis=(2, 3)),
                np.linalg.norm(P + I, axis=(2, 3)))
            best = None
            for f in np.argsort(co, axis=None)[:8]:
                a, b = np.unravel_index(f, co.shape)
                d = distance_or_coarse(stacks[i][a], stacks[j][b])
                if best is None or d < best:
                    best = d
            Dp = orbits[i].disc_order_route * orbits[j].disc_order_route
            out.append(SeparationResult(min_dist=best, pair=(i, j),
                                        disc_product=Dp,
                                        scaled_stat=best * math.sqrt(Dp),
                                        window_R=window_R, grid=grid))
    if not out:
        raise InsufficientInputError("no samples inside the window")
    return out


def min_orbit_separation(orbits: Sequence, window_R: float, grid: int) -> SeparationResult:
    """Minimum group distance over sampled point pairs on distinct orbits
    (distinctness by canonical form); reports min_dist * sqrt(D1 D2)."""
    results = pairwise_separations(orbits, window_R, grid)
    return min(results, key=lambda r: r.min_dist)


# ============================================================================
# tube masses

def tube_mass(samples: Sequence[Tuple[EmbeddedLattice, float]],
              base: EmbeddedLattice,
              direction: FlowDirection,
              t: float,
              B_radius: float) -> float:
    """Weighted fraction of samples y = base*g with g in the two-sided tube
    B^(-t,t): after the log, each root component X_ij must satisfy
    |X_ij| <= r exp(-|w_i - w_j| t) and the diagonal part |X_H|_sup <= r."""
    if t < 0:
        raise ValueError("t must be >= 0")
    if not direction.is_regular():
        raise ValueError("direction must be regular")
    w = np.array(direction.weights)
    n = base.dim
    total = 0.0
    mass = 0.0
    for lat, weight in samples:
        total += weight
        if _in_tube(base, lat, w, t, B_radius):
            mass += weight
    return mass / total if total > 0 else 0.0


def _in_tube(base: EmbeddedLattice, y: EmbeddedLattice, w: np.ndarray,
             t: float, r: float) -> bool:
    n = base.dim
    Binv = np.linalg.inv(base.basis)
    U = y.basis @ Binv
    Ur = np.round(U)
    if abs(abs(np.linalg.det(Ur)) - 1.0) > 1e-6:
        return False
    try:
        g = np.linalg.solve(Ur @ base.basis, y.basis)
    except np.linalg.LinAlgError:
        return False
    g = _det_normalize(g)
    X = None
    for s in (1.0, -1.0):
        X = _principal_log(s * g)
        if X is not None:
            break
    if X is None:
        return False
    X = X - np.trace(X) / n * np.eye(n)
    for i in range(n):
        for j in range(n):
            if i == j:
                continue
            if abs(X[i, j]) > r * math.exp(-abs(w[i] - w[j]) * t):
                return False
    diag = np.diag(X)
    if np.max(np.abs(diag)) > r:
        return False
    return True
