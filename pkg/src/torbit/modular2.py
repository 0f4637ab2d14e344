"""The n = 2 layer: continued fractions and exact quadratic surds,
fundamental units and geodesic lengths, badly approximable orbits, the
explicit two-step closing construction, and the abundance scan over all
quadratic orders.

Class data for the scan comes from cycles of reduced indefinite binary
quadratic forms (exact small-integer arithmetic); the proper-ideal HNF
partition in `ideals` provides the independent cross-check route.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np

from . import _pell
from ._exact import is_square, squarefree_part
from .errors import ClosingFailedError, InvalidDiscriminantError
from .dynamics import group_distance, distance_or_coarse

RHO_C = 1e-2          # closing-lemma entry threshold (53-bit robust default)
ETA_C = 10 * RHO_C    # allowed period window |T - N|


# ============================================================================
# exact quadratic surds

class QuadSurd:
    """(p + q*sqrt(d))/r with d squarefree > 1, exact.  q = 0 degenerates to
    a rational; comparisons, floor and arithmetic are exact."""

    __slots__ = ("p", "q", "r", "d")

    def __init__(self, p: int, q: int, r: int, d: int):
        if r == 0:
            raise ZeroDivisionError("zero denominator")
        if q != 0:
            s = squarefree_part(d)
            f = math.isqrt(d // s)
            if f * f * s != d:
                raise ValueError("bad radicand")
            q, d = q * f, s
        if d <= 1 and q != 0:
            raise ValueError("radicand must be > 1")
        if r < 0:
            p, q, r = -p, -q, -r
        g = math.gcd(math.gcd(abs(p), abs(q)), r)
        if g > 1:
            p, q, r = p // g, q // g, r // g
        self.p, self.q, self.r, self.d = p, q, r, (d if q else 0)

    # -- constructors ----------------------------------------------------------

    @classmethod
    def from_rational(cls, x: Fraction) -> "QuadSurd":
        x = Fraction(x)
        return cls(x.numerator, 0, x.denominator, 0)

    @classmethod
    def sqrt_of(cls, d: int) -> "QuadSurd":
        return cls(0, 1, 1, d)

    # -- predicates --------------------------------------------------------------

    @property
    def is_rational(self) -> bool:
        return self.q == 0

    def as_fraction(self) -> Fraction:
        if not self.is_rational:
            raise ValueError("irrational surd")
        return Fraction(self.p, self.r)

    def sign(self) -> int:
        # sign of p + q sqrt(d)
        p, q, d = self.p, self.q, self.d
        if q == 0:
            return (p > 0) - (p < 0)
        if p >= 0 and q > 0:
            return 1
        if p <= 0 and q < 0:
            return -1
        # p, q opposite signs: compare p^2 vs q^2 d
        if p > 0:
            return 1 if p * p > q * q * d else -1
        return -1 if p * p > q * q * d else 1

    def __bool__(self):
        return not (self.p == 0 and self.q == 0)

    # -- arithmetic ----------------------------------------------------------------

    def _coerce(self, other) -> "QuadSurd":
        if isinstance(other, QuadSurd):
            if self.q and other.q and self.d != other.d:
                raise ValueError("incompatible radicands")
            return other
        return QuadSurd.from_rational(Fraction(other))

    def _rad(self, other: "QuadSurd") -> int:
        return self.d or other.d

    def __add__(self, other):
        o = self._coerce(other)
        d = self._rad(o)
        return QuadSurd(self.p * o.r + o.p * self.r,
                        self.q * o.r + o.q * self.r,
                        self.r * o.r, d)

    __radd__ = __add__

    def __neg__(self):
        return QuadSurd(-self.p, -self.q, self.r, self.d or 2)

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        o = self._coerce(other)
        d = self._rad(o)
        p = self.p * o.p + self.q * o.q * d
        q = self.p * o.q + self.q * o.p
        return QuadSurd(p, q, self.r * o.r, d if q else 0)

    __rmul__ = __mul__

    def inverse(self) -> "QuadSurd":
        # r / (p + q sqrt d) = r (p - q sqrt d) / (p^2 - q^2 d)
        den = self.p * self.p - self.q * self.q * self.d
        if den == 0:
            raise ZeroDivisionError
        return QuadSurd(self.r * self.p, -self.r * self.q, den, self.d or 2)

    def __truediv__(self, other):
        return self * self._coerce(other).inverse()

    def __rtruediv__(self, other):
        return self.inverse() * other

    def conj(self) -> "QuadSurd":
        return QuadSurd(self.p, -self.q, self.r, self.d or 2)

    # -- order ------------------------------------------------------------------

    def __lt__(self, other):
        return (self - other).sign() < 0

    def __le__(self, other):
        return (self - other).sign() <= 0

    def __gt__(self, other):
        return (self - other).sign() > 0

    def __ge__(self, other):
        return (self - other).sign() >= 0

    def __eq__(self, other):
        if not isinstance(other, (QuadSurd, int, Fraction)):
            return NotImplemented
        o = self._coerce(other)
        return (self.p, self.q, self.r, self.d) == (o.p, o.q, o.r, o.d)

    def __hash__(self):
        return hash((self.p, self.q, self.r, self.d))

    def floor(self) -> int:
        if self.q == 0:
            return self.p // self.r
        # floor((p + q sqrt d)/r): integer k maximal with k <= value
        lo = int(float(self)) - 2
        while not (QuadSurd.from_rational(lo + 1) > self):
            lo += 1
        while QuadSurd.from_rational(lo) > self:
            lo -= 1
        return lo

    def approx(self, bits: int = 96) -> Fraction:
        """Rational approximation within 2^(1-bits) |q/r|; cancellation-safe."""
        if self.q == 0:
            return Fraction(self.p, self.r)
        scale = 1 << bits
        s = math.isqrt(self.d * scale * scale)   # floor(2^bits sqrt(d))
        return Fraction(self.p * scale + self.q * s, self.r * scale)

    def __float__(self):
        return float(self.approx())

    def __repr__(self):
        if self.q == 0:
            return f"QuadSurd({Fraction(self.p, self.r)})"
        return f"QuadSurd(({self.p}+{self.q}√{self.d})/{self.r})"


# ============================================================================
# continued fractions

@dataclass
class CFExpansion:
    """CF of an exact value: quotients = preperiod + one period; period = 0
    for rationals (finite expansion)."""
    value: QuadSurd
    quotients: List[int]
    preperiod_len: int
    period: int

    def quotient(self, k: int) -> int:
        if self.period == 0:
            return self.quotients[k]
        if k < self.preperiod_len:
            return self.quotients[k]
        return self.quotients[self.preperiod_len +
                              (k - self.preperiod_len) % self.period]

    def convergents(self, count: int):
        """(p_k, q_k) with the exact determinant identity asserted."""
        p_prev, q_prev = 1, 0
        p_cur, q_cur = self.quotient(0), 1
        out = [(p_cur, q_cur)]
        kmax = count if self.period else min(count, len(self.quotients))
        for k in range(1, kmax):
            a = self.quotient(k)
            p_cur, p_prev = a * p_cur + p_prev, p_cur
            q_cur, q_prev = a * q_cur + q_prev, q_cur
            assert p_cur * q_prev - p_prev * q_cur == (-1) ** (k + 1)
            out.append((p_cur, q_cur))
        return out


def cf_expand(x, max_steps: int = 10000) -> CFExpansion:
    """Exact CF of a Fraction or QuadSurd; quadratic surds are detected as
    eventually periodic by exact repetition of complete quotients."""
    if isinstance(x, (int, Fraction)):
        x = QuadSurd.from_rational(Fraction(x))
    value = x
    quotients: List[int] = []
    seen: Dict[QuadSurd, int] = {}
    cur = x
    for _ in range(max_steps):
        if cur.is_rational:
            # finite expansion
            f = cur.as_fraction()
            a = f.numerator // f.denominator
            quotients.append(a)
            rem = f - a
            if rem == 0:
                return CFExpansion(value, quotients, len(quotients), 0)
            cur = QuadSurd.from_rational(1 / rem)
            continue
        if cur in seen:
            start = seen[cur]
            return CFExpansion(value, quotients,
                               start, len(quotients) - start)
        seen[cur] = len(quotients)
        a = cur.floor()
        quotients.append(a)
        cur = (cur - a).inverse()
    raise RuntimeError("continued fraction did not terminate")


# ============================================================================
# fundamental units and geodesic lengths

@dataclass
class QuadraticOrderGeodesic:
    disc: int
    fundamental_unit: Tuple[int, int]     # eps = (a + b sqrt(D))/2
    unit_norm: int
    length: float                          # 2 log eps_plus

    @property
    def eps(self) -> float:
        a, b = self.fundamental_unit
        return (a + b * math.sqrt(self.disc)) / 2.0


def fundamental_unit_cf(D: int) -> QuadraticOrderGeodesic:
    """Exact fundamental unit of the order of discriminant D by continued
    fractions; length = 2 log(eps_plus), eps_plus = eps or eps^2 by norm."""
    if not _pell.is_valid_disc(D):
        raise InvalidDiscriminantError(f"{D} is not a valid real discriminant")
    a, b, n = _pell.fundamental_unit_of_disc(D)
    log_eps = _pell.log_half_unit(a, b, D)
    length = 2.0 * log_eps if n == 1 else 4.0 * log_eps
    return QuadraticOrderGeodesic(disc=D, fundamental_unit=(a, b),
                                  unit_norm=n, length=length)


@dataclass
class VolumeBoundCheck:
    disc: int
    length: float
    lower_bound: float
    ok: bool


def volume_bound_check(D: int) -> VolumeBoundCheck:
    """length >= log D - 4 log 2: the injectivity-window constant."""
    g = fundamental_unit_cf(D)
    lb = math.log(D) - 4.0 * math.log(2.0)
    return VolumeBoundCheck(D, g.length, lb, g.length >= lb)


def volume_bound_sweep(D_max: int) -> List[int]:
    """Discriminants <= D_max violating the volume lower bound (expect [])."""
    out = []
    for D, length in _pell.geodesic_length_scan(D_max):
        if length < math.log(D) - 4.0 * math.log(2.0):
            out.append(D)
    return out


# ============================================================================
# badly approximable surds

@dataclass
class BadlyApproximable:
    surd: QuadSurd
    period_quotients: Tuple[int, ...]
    delta_certified: Fraction           # inf_m m<mu> >= this, from the CF

    @property
    def max_quotient(self) -> int:
        return max(self.period_quotients)


def badly_approximable(max_pq: int, count: int) -> List[BadlyApproximable]:
    """Purely periodic continued fractions u = [0; per(a_1..a_l)] with all
    quotients <= max_pq; certified inf_m m<mu> >= 1/(max_pq + 2)."""
    if max_pq < 1:
        raise ValueError("max_pq >= 1 required")
    out: List[BadlyApproximable] = []
    seen = set()
    ell = 1
    while len(out) < count and ell <= 12:
        for per in _tuples(max_pq, ell):
            u = _purely_periodic_surd(per)
            if u in seen:
                continue
            seen.add(u)
            out.append(BadlyApproximable(
                surd=u, period_quotients=per,
                delta_certified=Fraction(1, max(per) + 2)))
            if len(out) >= count:
                break
        ell += 1
    return out


def _tuples(max_val: int, length: int):
    if length == 0:
        yield ()
        return
    for first in range(1, max_val + 1):
        for rest in _tuples(max_val, length - 1):
            yield (first,) + rest


def _purely_periodic_surd(period: Sequence[int]) -> QuadSurd:
    """u in (0,1) with CF [0; per(period)]: 1/u is the purely periodic
    [per(period)], the attracting fixed point of the period's Moebius map."""
    p, pp = period[0], 1
    q, qp = 1, 0
    for a in period[1:]:
        p, pp = a * p + pp, p
        q, qp = a * q + qp, q
    # x = (p x + pp)/(q x + qp): q x^2 + (qp - p) x - pp = 0, x > 1 root
    A, B, C = q, qp - p, -pp
    disc = B * B - 4 * A * C
    x = QuadSurd(-B, 1, 2 * A, disc)
    assert x > 1
    return x.inverse()


def liminf_m_dist(u: QuadSurd, depth: int = 40) -> float:
    """Convergent-based value of liminf m<mu>: q_k |q_k u - p_k| has the
    periodic limit set; the min over a late window converges to the liminf."""
    cf = cf_expand(u)
    conv = cf.convergents(depth)
    vals = []
    for (p, q) in conv:
        err = (u * q - p)
        vals.append(float(q * abs(float(err))))
    period = max(cf.period, 1)
    window = vals[-2 * period:] if len(vals) >= 2 * period else vals
    return min(window)


def inf_m_dist_exact(u: QuadSurd, m_max: int) -> Fraction:
    """min over 1 <= m <= m_max of m * <mu> as an exact comparison value;
    <x> is the distance to the nearest integer.  Rational-safe."""
    best: Optional[QuadSurd] = None
    for m in range(1, m_max + 1):
        mu = u * m
        fl = mu.floor()
        fr = mu - fl
        dist = fr if (fr < QuadSurd.from_rational(Fraction(1, 2))) else (1 - fr)
        v = dist * m
        if best is None or v < best:
            best = v
    # conservative rational lower bound via float (exact value may be a surd)
    f = float(best)
    return Fraction(f).limit_denominator(10 ** 12)


def forward_orbit_stays(u, delta: float, t_max: float, steps: int = 200) -> bool:
    """True iff the forward geodesic orbit of the lattice spanned by (1, -u)
    and (0, 1) stays in Omega'_delta for all t in [0, t_max].

    Exact route: a violation at time t requires some m >= 1 with
    m^2 e^{-t} < delta and <mu>^2 e^t < delta, so it exists iff
    m <mu> < delta with the balance window meeting [0, t_max].  The CF
    certificate 1/(max quotient + 2) settles the all-t question when it
    dominates delta; sampled times are checked for consistency.
    """
    if isinstance(u, BadlyApproximable):
        if Fraction(u.delta_certified) >= Fraction(delta).limit_denominator(10 ** 9):
            return True
        u = u.surd
    if isinstance(u, (int, Fraction)):
        u = QuadSurd.from_rational(Fraction(u))
    # any violating m is dominated by the convergent denominator below it
    # (best approximations), so only q_k need checking; q_k grows at least
    # like Fibonacci, keeping this loop short for any t_max
    intervals = []
    cf = cf_expand(u)
    p_prev, q_prev = 1, 0
    p_cur, q_cur = cf.quotient(0), 1
    k = 0
    cap = delta * math.exp(t_max)
    while q_cur * q_cur < cap:
        if cf.period == 0 and k >= len(cf.quotients):
            break
        bits = 2 * q_cur.bit_length() + 64
        if k == 0:
            fr = u - u.floor()
            dist = fr if fr < QuadSurd.from_rational(Fraction(1, 2)) else \
                (QuadSurd.from_rational(1) - fr)
            df = abs(float(dist.approx(bits)))
        else:
            df = abs(float((u * q_cur - p_cur).approx(bits)))
        if df * q_cur < delta and df * df < delta:
            lo = math.log(q_cur * q_cur / delta)
            hi = math.log(delta / (df * df)) if df > 0 else math.inf
            if max(lo, 0.0) < min(hi, t_max):
                intervals.append((max(lo, 0.0), min(hi, t_max)))
        if df == 0.0:
            break
        k += 1
        a = cf.quotient(k)
        p_cur, p_prev = a * p_cur + p_prev, p_cur
        q_cur, q_prev = a * q_cur + q_prev, q_cur
    stays = not intervals
    if steps > 0 and intervals:
        # sampled consistency: time-grid points inside a violation window
        # must agree with the exact decision
        grid_hit = any(lo <= t <= hi for t in
                       (i * t_max / steps for i in range(steps + 1))
                       for lo, hi in intervals)
        assert grid_hit or all(hi - lo < t_max / steps for lo, hi in intervals)
    return stays


# ============================================================================
# Anosov closing

@dataclass
class ClosingResult:
    y: np.ndarray
    T: float
    gamma: np.ndarray
    residual: float


def _h(t: float) -> np.ndarray:
    return np.diag([math.exp(t / 2.0), math.exp(-t / 2.0)])


def anosov_close(x: np.ndarray, N: float, tol: float = 1e-9,
                 rho_c: float = RHO_C, eta_c: float = ETA_C) -> ClosingResult:
    """Periodic point near an almost-returning one by the explicit two-step
    unipotent conjugation: a lower-triangular move kills the expanding
    off-diagonal entry (quadratic equation, root near 0), then an upper-
    triangular move kills the other (linear equation)."""
    x = np.asarray(x, dtype=float)
    gamma = _nearest_lattice_identification(x, N)
    if gamma is None:
        raise ClosingFailedError("no unimodular identification found")
    ret = _h(N) @ x @ gamma
    d0 = distance_or_coarse(ret, x)
    if d0 > 10 * rho_c:
        raise ClosingFailedError(f"not returning: d = {d0:.3g} > {10 * rho_c}")
    g = ret @ np.linalg.inv(x)
    g = g / np.linalg.det(g) ** 0.5 if np.linalg.det(g) > 0 else g / (-(-np.linalg.det(g)) ** 0.5)
    if abs(g[0, 0] + 1) < abs(g[0, 0] - 1):
        g = -g
    eN = math.exp(-N)
    A = -eN * g[0, 1]
    Bq = eN * g[0, 0] - g[1, 1]
    C = g[1, 0]
    u = _small_root(A, Bq, C)
    if u is None or abs(u) > 0.5:
        raise ClosingFailedError("no small root for the lower-left correction")
    L = np.array([[1.0, 0.0], [u, 1.0]])
    Lt = np.array([[1.0, 0.0], [eN * u, 1.0]])
    g1 = Lt @ g @ np.array([[1.0, 0.0], [-u, 1.0]])
    assert abs(g1[1, 0]) < 1e-10 * max(1.0, np.max(np.abs(g1)))
    denom = g1[0, 0] - math.exp(N) * g1[1, 1]
    if abs(denom) < 1e-14:
        raise ClosingFailedError("degenerate linear correction")
    v = g1[0, 1] / denom
    V = np.array([[1.0, v], [0.0, 1.0]])
    y = V @ L @ x
    d1, d2 = g1[0, 0], g1[1, 1]
    if d1 * d2 <= 0:
        raise ClosingFailedError("diagonal holonomy changed sign")
    T = N + math.log(d2 / d1)
    if abs(T - N) > eta_c:
        raise ClosingFailedError(f"period drift {abs(T - N):.3g} > {eta_c}")
    M = _h(T) @ y @ gamma @ np.linalg.inv(y)
    lam = np.trace(M) / 2.0
    residual = float(np.linalg.norm(M / lam - np.eye(2), "fro"))
    if residual > tol:
        raise ClosingFailedError(f"residual {residual:.3g} above tol")
    return ClosingResult(y=y, T=T, gamma=gamma, residual=residual)


def _small_root(A: float, B: float, C: float) -> Optional[float]:
    if abs(A) < 1e-300:
        if abs(B) < 1e-300:
            return None if abs(C) > 1e-300 else 0.0
        return -C / B
    disc = B * B - 4 * A * C
    if disc < 0:
        return None
    s = math.sqrt(disc)
    # root of smaller magnitude, numerically stable
    den = -B - s if abs(-B - s) > abs(-B + s) else -B + s
    if abs(den) < 1e-300:
        return None
    big = den / (2 * A)
    small = C / (A * big) if abs(big) > 1e-300 else None
    if small is None:
        return None
    return small if abs(small) < abs(big) else big


def _nearest_lattice_identification(x: np.ndarray, N: float) -> Optional[np.ndarray]:
    cand = np.linalg.inv(x) @ np.linalg.inv(_h(N)) @ x
    for sign in (1.0, -1.0):
        G = np.round(sign * cand)
        if abs(abs(np.linalg.det(G)) - 1.0) < 1e-6:
            return G
    return None


def known_periodic_point(D: int):
    """(x, T, gamma): an exactly periodic point of the geodesic flow from the
    quadratic order of discriminant D: h_T x gamma = lambda x."""
    from .fields import quadratic_field_of_disc, Order
    from fractions import Fraction as F
    from ._pell import split_disc, fundamental_unit_of_disc
    D0, f = split_disc(D)
    fld = quadratic_field_of_disc(D0)
    O = Order(fld, [[F(1), F(0)], [F(0), F(f)]])
    a, b, n = fundamental_unit_of_disc(D)
    s = D0 % 2
    eps = (F(a - s * b * f, 2), F(b * f))          # power-basis coords
    if n == -1:
        eps = fld.mul(eps, eps)
    # smallest totally positive unit > 1
    sig = fld.embed(eps)
    T = float(np.log(sig[np.argmax(sig)] / sig[np.argmin(sig)]))
    cols = np.array([fld.embed(bb) for bb in O.basis]).T
    # sort rows so sigma_1 is the expanding direction
    order = np.argsort(-fld.embed(eps))
    cols = cols[order]
    mult = np.array([[float(c) for c in O.to_coords(fld.mul(eps, bb))]
                     for bb in O.basis]).T
    gamma = np.linalg.inv(mult)
    gamma = np.round(gamma)
    return cols, T, gamma


# ============================================================================
# reduced indefinite forms and the abundance scan

def reduced_forms(D: int) -> List[Tuple[int, int, int]]:
    """All reduced indefinite forms (a, b, c) of discriminant D:
    ac < 0 and | |a| - |c| | < b < sqrt(D)."""
    out = []
    if D % 4 not in (0, 1):
        return out
    s = math.isqrt(D)
    for b in range(2 - (D % 2), s + 1, 2):
        N = (D - b * b) // 4
        a = 1
        while a * a <= N:
            if N % a == 0:
                cc = N // a
                if abs(a - cc) < b and math.gcd(math.gcd(a, b), cc) == 1:
                    out.append((a, b, -cc))
                    out.append((-a, b, cc))
                    if a != cc:
                        out.append((cc, b, -a))
                        out.append((-cc, b, a))
            a += 1
    return out


def _forms_by_disc_chunk(lo: int, hi: int) -> Dict[int, List[Tuple[int, int, int]]]:
    """Positive-leading reduced forms (a, b, -cc), a > 0, grouped by
    discriminant for lo <= D < hi; the (-a, b, cc) mirrors are implicit."""
    by: Dict[int, List[Tuple[int, int, int]]] = {}
    amax = (hi - 1) // 4
    for a in range(1, amax + 1):
        cmax = (hi - 1) // (4 * a)
        for cc in range(1, cmax + 1):
            fourac = 4 * a * cc
            b0 = abs(a - cc) + 1
            if lo > fourac:
                b0 = max(b0, math.isqrt(lo - 1 - fourac) + 1)
            b1 = math.isqrt(hi - 1 - fourac)
            g0 = math.gcd(a, cc)
            for b in range(b0, b1 + 1):
                if g0 > 1 and math.gcd(g0, b) > 1:
                    continue
                D = b * b + fourac
                if D >= lo:
                    by.setdefault(D, []).append((a, b, -cc))
    return by


def _is_reduced(a: int, b: int, c: int, D: int) -> bool:
    return a * c < 0 and b > abs(abs(a) - abs(c)) and 0 < b * b < D


def _rho_transform(form: Tuple[int, int, int], D: int, sD: int):
    """(rho(form), M) with form o M = rho(form), det M = 1."""
    a, b, c = form
    ac = abs(c)
    if ac > sD:
        r = (-b) % (2 * ac)
        if r > ac:
            r -= 2 * ac
    else:
        r = 2 * ac * ((sD + b) // (2 * ac)) - b
    m = (r + b) // (2 * c)
    return (c, r, (r * r - D) // (4 * c)), ((0, -1), (1, m))


def _mat2_mul(A, B):
    return ((A[0][0] * B[0][0] + A[0][1] * B[1][0],
             A[0][0] * B[0][1] + A[0][1] * B[1][1]),
            (A[1][0] * B[0][0] + A[1][1] * B[1][0],
             A[1][0] * B[0][1] + A[1][1] * B[1][1]))


_ID2 = ((1, 0), (0, 1))


def reduce_form_with_transform(form: Tuple[int, int, int], D: int):
    """(reduced R, M) with form o M = R, det M = 1, exact."""
    sD = math.isqrt(D)
    cur, M = tuple(form), _ID2
    for _ in range(10000):
        if _is_reduced(*cur, D):
            return cur, M
        if cur[2] == 0:
            raise ValueError("degenerate form")
        cur, step = _rho_transform(cur, D, sD)
        M = _mat2_mul(M, step)
    raise RuntimeError("reduction did not converge")


def form_equivalence_transform(Q1: Tuple[int, int, int],
                               Q2: Tuple[int, int, int], D: int):
    """U in GL_2(Z) and sign s with Q1 o U = s * Q2 AND det U = s, or None.

    With oriented ideal bases these are exactly the transforms induced by a
    multiplier x (s = sgn N(x)); the combos det U != s would witness
    equivalence with the conjugate ideal instead.  Q1, Q2 may share a
    content > 1."""
    g1 = math.gcd(math.gcd(abs(Q1[0]), abs(Q1[1])), abs(Q1[2]))
    g2 = math.gcd(math.gcd(abs(Q2[0]), abs(Q2[1])), abs(Q2[2]))
    if g1 != g2:
        return None
    P1 = (Q1[0] // g1, Q1[1] // g1, Q1[2] // g1)
    P2 = (Q2[0] // g2, Q2[1] // g2, Q2[2] // g2)
    D1 = P1[1] ** 2 - 4 * P1[0] * P1[2]
    if D1 != P2[1] ** 2 - 4 * P2[0] * P2[2]:
        return None
    tau = ((1, 0), (0, -1))
    for s in (1, -1):
        # proper part V in SL2 with Q1 o V = target; U = V (s = +1) or
        # U = V tau (s = -1, det U = -1) with target adjusted by tau
        T = (s * P2[0], s * P2[1], s * P2[2])
        if s == -1:
            T = (T[0], -T[1], T[2])       # (s*P2) o tau^{-1}
        R1, M1 = reduce_form_with_transform(P1, D1)
        R2, M2 = reduce_form_with_transform(T, D1)
        C = _cycle_search(R1, R2, D1)
        if C is None:
            continue
        M2_inv = _mat2_inv_unimodular(M2)
        U = _mat2_mul(_mat2_mul(M1, C), M2_inv)
        if s == -1:
            U = _mat2_mul(U, tau)
        det = U[0][0] * U[1][1] - U[0][1] * U[1][0]
        assert det == s
        return U, s
    return None


def _cycle_search(R1, R2, D):
    """C with R1 o C = R2 along the rho-cycle of R1, or None."""
    sD = math.isqrt(D)
    cur, C = R1, _ID2
    for _ in range(100000):
        if cur == R2:
            return C
        cur, step = _rho_transform(cur, D, sD)
        C = _mat2_mul(C, step)
        if cur == R1:
            return None
    raise RuntimeError("cycle walk did not close")


def _mat2_inv_unimodular(M):
    det = M[0][0] * M[1][1] - M[0][1] * M[1][0]
    assert det in (1, -1)
    return ((M[1][1] * det, -M[0][1] * det),
            (-M[1][0] * det, M[0][0] * det))


def form_minimum(Q: Tuple[int, int, int]) -> int:
    """Exact min over nonzero integer vectors of |Q(x, y)| for an indefinite
    form: the least |leading coefficient| along the rho-cycle, times the
    content."""
    g = math.gcd(math.gcd(abs(Q[0]), abs(Q[1])), abs(Q[2]))
    P = (Q[0] // g, Q[1] // g, Q[2] // g)
    D = P[1] ** 2 - 4 * P[0] * P[2]
    assert D > 0 and not is_square(D), "indefinite nonsquare form required"
    R, _ = reduce_form_with_transform(P, D)
    sD = math.isqrt(D)
    best = abs(R[0])
    cur = _rho_step(R, D, sD)
    while cur != R:
        best = min(best, abs(cur[0]))
        cur = _rho_step(cur, D, sD)
    return g * best


def _rho_step(form: Tuple[int, int, int], D: int, sD: int) -> Tuple[int, int, int]:
    """Reduction/cycle operator: r = -b mod 2|c|, in (sD - 2|c|, sD] when
    |c| <= sD, else in (-|c|, |c|]."""
    a, b, c = form
    ac = abs(c)
    if ac > sD:
        r = (-b) % (2 * ac)
        if r > ac:
            r -= 2 * ac
    else:
        r = 2 * ac * ((sD + b) // (2 * ac)) - b
    return (c, r, (r * r - D) // (4 * c))


def _reduce_form(form: Tuple[int, int, int], D: int) -> Tuple[int, int, int]:
    sD = math.isqrt(D)
    a, b, c = form
    for _ in range(10000):
        if _is_reduced(a, b, c, D):
            return (a, b, c)
        if c == 0:
            raise ValueError("degenerate form (square discriminant?)")
        a, b, c = _rho_step((a, b, c), D, sD)
    raise RuntimeError("form reduction did not converge")


def form_cycles(D: int, pos_forms: Optional[List[Tuple[int, int, int]]] = None
                ) -> List[List[Tuple[int, int, int]]]:
    """rho^2-cycles on positive-leading reduced forms; one cycle per narrow
    form class.  rho alternates the sign of the leading coefficient, so the
    negative-leading member coefficients appear as the c-entries."""
    if pos_forms is None:
        pos_forms = [f for f in reduced_forms(D) if f[0] > 0]
    index = {f: i for i, f in enumerate(pos_forms)}
    sD = math.isqrt(D)
    visited = [False] * len(pos_forms)
    cycles = []
    for i, f in enumerate(pos_forms):
        if visited[i]:
            continue
        cyc = []
        cur = f
        while True:
            j = index.get(cur)
            assert j is not None, (D, f, cur)
            if visited[j]:
                break
            visited[j] = True
            cyc.append(cur)
            cur = _rho_step(_rho_step(cur, D, sD), D, sD)
        cycles.append(cyc)
    return cycles


@dataclass
class OrderClassData:
    disc: int
    length: float                     # 2 log eps_plus
    class_minima: List[int]           # one per K^x lattice class


def _class_minima_from_cycles(D: int,
                              cycles: List[List[Tuple[int, int, int]]]) -> List[int]:
    """Narrow cycles paired under (a,b,c) -> (-a,b,-c), the image of a class
    under multiplication of the lattice by a negative-norm scalar (negation
    plus orientation flip); pairs give the K^x classes.  The class minimum
    is min(|a|, |c|) over the cycle, since the negative-leading members of
    the rho-cycle carry the c-coefficients."""
    rep_to_cycle: Dict[Tuple[int, int, int], int] = {}
    for ci, cyc in enumerate(cycles):
        for f in cyc:
            rep_to_cycle[f] = ci
    paired = [False] * len(cycles)
    minima: List[int] = []
    for ci, cyc in enumerate(cycles):
        if paired[ci]:
            continue
        paired[ci] = True
        a, b, c = cyc[0]
        dual = _reduce_form((-a, b, -c), D)
        if dual[0] < 0:
            dual = _rho_step(dual, D, math.isqrt(D))
        cj = rep_to_cycle[dual]
        paired[cj] = True
        m = min(min(abs(f[0]), abs(f[2])) for f in cyc)
        if cj != ci:
            m = min(m, min(min(abs(f[0]), abs(f[2])) for f in cycles[cj]))
        minima.append(m)
    return minima


def quadratic_order_class_data(D: int,
                               pos_forms: Optional[List[Tuple[int, int, int]]] = None,
                               length: Optional[float] = None) -> OrderClassData:
    """Per-class form minima for the order of discriminant D; the exact
    integer minimum of |N(x)|/N(L) over each lattice class."""
    cycles = form_cycles(D, pos_forms)
    assert cycles, f"no reduced forms for valid discriminant {D}"
    minima = _class_minima_from_cycles(D, cycles)
    if length is None:
        length = _pell.geodesic_length_of_disc(D)
    return OrderClassData(disc=D, length=length, class_minima=minima)


@dataclass
class AbundanceRow:
    Delta: int
    delta: float
    n_orbits_inside: int
    total_length_inside: float
    total_length_all: float


def abundance_scan(delta: float, Delta_max: int,
                   grid_decades: int = 8,
                   Delta_min: int = 32) -> List[AbundanceRow]:
    """Cumulative geodesic length over all quadratic orders with disc <= Delta
    on a log grid, total and restricted to orbits inside Omega'_delta.
    An orbit (= lattice class) lies in Omega'_delta iff its exact integer
    form minimum is >= delta sqrt(D)."""
    if not (0 < delta):
        raise ValueError("delta must be positive")
    if Delta_max > 10 ** 6:
        raise ValueError("Delta_max capped at 1e6")
    grid = _log_grid(Delta_min, Delta_max, grid_decades)
    rows = []
    cum_inside = 0.0
    cum_all = 0.0
    cum_n = 0
    gi = 0
    lengths = dict(_pell.geodesic_length_scan(Delta_max))
    chunk = max(2048, Delta_max // 32)
    lo = 2
    while lo <= Delta_max:
        hi = min(lo + chunk, Delta_max + 1)
        forms = _forms_by_disc_chunk(lo, hi)
        for D in range(lo, hi):
            if D in lengths:
                cd = quadratic_order_class_data(D, forms.get(D, []),
                                                length=lengths[D])
                thr = delta * math.sqrt(D)
                inside = sum(1 for m in cd.class_minima if m >= thr)
                cum_inside += inside * cd.length
                cum_all += len(cd.class_minima) * cd.length
                cum_n += inside
            while gi < len(grid) and D >= grid[gi]:
                rows.append(AbundanceRow(Delta=grid[gi], delta=delta,
                                         n_orbits_inside=cum_n,
                                         total_length_inside=cum_inside,
                                         total_length_all=cum_all))
                gi += 1
        lo = hi
    while gi < len(grid):
        rows.append(AbundanceRow(Delta=grid[gi], delta=delta,
                                 n_orbits_inside=cum_n,
                                 total_length_inside=cum_inside,
                                 total_length_all=cum_all))
        gi += 1
    return rows


def _log_grid(lo: int, hi: int, per_decade: int) -> List[int]:
    pts = []
    x = math.log10(lo)
    top = math.log10(hi)
    while x < top - 1e-12:
        pts.append(int(round(10 ** x)))
        x += 1.0 / per_decade
    pts.append(hi)
    out = sorted(set(pts))
    return [p for p in out if p >= lo]
