import math
import random
from fractions import Fraction

import numpy as np
import pytest
import scipy.linalg

from torbit._exact import is_square
from torbit.errors import ClosingFailedError, InvalidDiscriminantError
from torbit.modular2 import (BadlyApproximable, QuadSurd, abundance_scan,
                             anosov_close, badly_approximable, cf_expand,
                             form_cycles, form_equivalence_transform,
                             form_minimum, forward_orbit_stays,
                             fundamental_unit_cf, known_periodic_point,
                             liminf_m_dist, quadratic_order_class_data,
                             reduced_forms, volume_bound_check,
                             volume_bound_sweep)


# ---------------------------------------------------------------- surds

def test_surd_arithmetic():
    phi = QuadSurd(1, 1, 2, 5)
    assert phi * phi == phi + 1
    assert phi.floor() == 1
    assert (phi - phi) == QuadSurd.from_rational(0)
    assert (1 / phi) == phi - 1
    s2 = QuadSurd.sqrt_of(2)
    assert s2 * s2 == 2
    assert QuadSurd(0, 1, 1, 8) == 2 * s2      # radicand normalization
    random.seed(2)
    for _ in range(50):
        p, q, r = random.randint(-9, 9), random.randint(-9, 9), random.randint(1, 9)
        x = QuadSurd(p, q, r, 7)
        assert abs(float(x) - (p + q * math.sqrt(7)) / r) < 1e-9
        assert x.floor() <= float(x) < x.floor() + 1


def test_surd_float_no_cancellation():
    # golden-ratio convergent error: exact tiny value must not collapse to 0
    u = QuadSurd(-1, 1, 2, 5)
    p, q = 832040, 1346269          # consecutive Fibonacci
    err = u * q - p
    assert float(err) != 0.0
    assert abs(float(err)) < 1e-5


# ---------------------------------------------------------------- CF

def test_cf_expansions():
    cf = cf_expand(QuadSurd.sqrt_of(2))
    assert cf.quotients == [1, 2] and cf.period == 1
    cf = cf_expand(QuadSurd(-1, 1, 2, 5))
    assert cf.quotients == [0, 1] and cf.period == 1
    cf = cf_expand(Fraction(355, 113))
    assert cf.period == 0
    assert cf.quotients[0] == 3


def test_cf_convergent_determinant_identity():
    cf = cf_expand(QuadSurd.sqrt_of(13))
    conv = cf.convergents(40)       # identity asserted internally
    p, q = conv[-1]
    assert abs(p / q - math.sqrt(13)) < 1e-12


# ---------------------------------------------------------------- units

def test_fundamental_unit_examples():
    g8 = fundamental_unit_cf(8)
    assert g8.fundamental_unit == (2, 1) and g8.unit_norm == -1
    assert abs(g8.eps - (1 + math.sqrt(2))) < 1e-12
    g5 = fundamental_unit_cf(5)
    assert g5.fundamental_unit == (1, 1) and g5.unit_norm == -1
    with pytest.raises(InvalidDiscriminantError):
        fundamental_unit_cf(4)
    with pytest.raises(InvalidDiscriminantError):
        fundamental_unit_cf(-8)
    with pytest.raises(InvalidDiscriminantError):
        fundamental_unit_cf(7)


def test_pell_identity_sweep():
    for D in range(5, 400):
        try:
            g = fundamental_unit_cf(D)
        except InvalidDiscriminantError:
            continue
        a, b = g.fundamental_unit
        assert a * a - D * b * b == 4 * g.unit_norm


def test_fundamental_unit_brute_force():
    def brute(D, bmax=10 ** 5):
        for b in range(1, bmax):
            cands = []
            for s in (-4, 4):
                aa = D * b * b + s
                if aa > 0 and is_square(aa):
                    cands.append((math.isqrt(aa), b, s // 4))
            if cands:
                return min(cands)
        return None
    for D in range(5, 200):
        try:
            g = fundamental_unit_cf(D)
        except InvalidDiscriminantError:
            continue
        want = brute(D)
        if want is None:
            continue
        assert (g.fundamental_unit[0], g.fundamental_unit[1], g.unit_norm) == want


def test_geodesic_length_normalization():
    # norm -1: length = 4 log eps; norm +1: length = 2 log eps
    g8 = fundamental_unit_cf(8)
    assert abs(g8.length - 4 * math.log(1 + math.sqrt(2))) < 1e-12
    g12 = fundamental_unit_cf(12)
    assert g12.unit_norm == 1
    assert abs(g12.length - 2 * math.log(2 + math.sqrt(3))) < 1e-12


def test_volume_bound_examples():
    assert volume_bound_check(5).ok
    assert volume_bound_check(8).ok
    assert volume_bound_sweep(3000) == []


# ---------------------------------------------------------------- BA surds

def test_badly_approximable_golden():
    bas = badly_approximable(1, 1)
    assert len(bas) == 1
    u = bas[0]
    assert abs(float(u.surd) - (math.sqrt(5) - 1) / 2) < 1e-12
    assert u.delta_certified == Fraction(1, 3)


def test_liminf_hurwitz():
    u = badly_approximable(1, 1)[0].surd
    assert abs(liminf_m_dist(u) - 1 / math.sqrt(5)) < 1e-6


def test_badly_approximable_distinct():
    bas = badly_approximable(3, 12)
    assert len(bas) == 12
    assert len({b.surd for b in bas}) == 12
    for b in bas:
        assert max(b.period_quotients) <= 3
        assert b.delta_certified >= Fraction(1, 5)
        cf = cf_expand(b.surd)
        assert cf.period >= 1           # irrational, periodic


def test_forward_orbit_stays():
    gold = badly_approximable(1, 1)[0]
    assert forward_orbit_stays(gold, 0.2, 100.0)
    # rationals escape
    assert not forward_orbit_stays(Fraction(1, 3), 0.01, 30.0)
    # delta above the true infimum (golden: inf = <u> = (3-sqrt5)/2 ~ 0.382)
    assert not forward_orbit_stays(gold.surd, 0.40, 80.0)
    assert forward_orbit_stays(gold.surd, 0.37, 80.0)


def test_forward_orbit_sampled_consistency():
    # direct lattice test on a time grid agrees with the exact decision
    gold = badly_approximable(1, 1)[0].surd
    u = float(gold)
    for delta, want in ((0.2, True), (0.44, False)):
        violated = False
        M = np.array([[1.0, -u], [0.0, 1.0]])
        for t in np.linspace(0.0, 25.0, 600):
            rows = M @ np.diag([math.exp(-t / 2), math.exp(t / 2)])
            from torbit._lll import enumerate_short
            for c in enumerate_short(rows, 2 * delta):
                v = c @ rows
                if np.max(np.abs(v)) ** 2 < delta * (1 - 1e-9):
                    violated = True
        assert forward_orbit_stays(gold, delta, 25.0) == (not violated)


# ---------------------------------------------------------------- closing

def test_anosov_exact_input():
    x, T, gamma = known_periodic_point(5)
    res = anosov_close(x, T, tol=1e-9)
    assert abs(res.T - T) < 1e-9
    assert res.residual < 1e-12
    assert np.allclose(res.y, x)


def test_anosov_perturbed_recovery():
    rng = np.random.default_rng(0)
    for trial in range(100):
        D = (5, 8, 12, 13)[trial % 4]
        x, T, gamma = known_periodic_point(D)
        E = rng.standard_normal((2, 2))
        E /= np.linalg.norm(E)
        xp = scipy.linalg.expm(1e-4 * E) @ x
        res = anosov_close(xp, T, tol=1e-8)
        assert res.residual <= 1e-8
        from torbit.dynamics import distance_or_coarse
        assert distance_or_coarse(res.y, xp) <= 10 * 1e-4


def test_anosov_far_input_fails():
    x, T, gamma = known_periodic_point(5)
    far = x @ np.diag([3.0, 1 / 3.0])
    with pytest.raises(ClosingFailedError):
        anosov_close(far, T, tol=1e-8)


# ---------------------------------------------------------------- forms

def test_reduced_forms_and_cycles():
    forms5 = reduced_forms(5)
    assert (1, 1, -1) in forms5
    for (a, b, c) in forms5:
        assert a * c < 0 and b > abs(abs(a) - abs(c)) and b * b < 5
    # h(40) = 2, h(229) = 3, h(12) = 1 (narrow 2 pairing to 1)
    assert len(quadratic_order_class_data(40).class_minima) == 2
    assert len(quadratic_order_class_data(229).class_minima) == 3
    assert len(quadratic_order_class_data(12).class_minima) == 1
    assert len(quadratic_order_class_data(32).class_minima) == 1


def test_form_minimum_examples():
    assert form_minimum((1, 1, -1)) == 1
    # the norm-2 class of disc 40
    assert form_minimum((2, 4, -3)) == 2
    # imprimitive form: content scales the minimum
    assert form_minimum((2, 2, -2)) == 2


def test_form_equivalence_transform_roundtrip():
    random.seed(4)
    for D in (5, 40, 229, 316):
        forms = [f for f in reduced_forms(D) if f[0] > 0]
        for Q in forms[:6]:
            res = form_equivalence_transform(Q, Q, D)
            assert res is not None
            U, s = res
            a, b, c = Q
            # verify Q o U = s Q exactly
            (u11, u12), (u21, u22) = U
            A = a * u11 * u11 + b * u11 * u21 + c * u21 * u21
            B = 2 * a * u11 * u12 + b * (u11 * u22 + u12 * u21) + 2 * c * u21 * u22
            C = a * u12 * u12 + b * u12 * u22 + c * u22 * u22
            assert (A, B, C) == (s * a, s * b, s * c)


# ---------------------------------------------------------------- abundance

def test_abundance_monotone_and_edges():
    rows = abundance_scan(0.01, 2000)
    for r1, r2 in zip(rows, rows[1:]):
        assert r2.total_length_inside >= r1.total_length_inside - 1e-12
        assert r2.total_length_all >= r1.total_length_all - 1e-12
    # delta > 1 empties Omega'_delta (the form minimum is <= sqrt(D/5) < delta sqrt D)
    rows2 = abundance_scan(1.2, 600)
    assert all(r.n_orbits_inside == 0 for r in rows2)
    # anti-monotone in delta
    lo = abundance_scan(0.005, 1000)[-1]
    hi = abundance_scan(0.05, 1000)[-1]
    assert hi.total_length_inside <= lo.total_length_inside
    # positive total at modest delta
    r = abundance_scan(0.01, 100)[-1]
    assert r.total_length_inside > 0
