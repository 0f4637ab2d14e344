import math
from fractions import Fraction

import numpy as np
import pytest

from torbit._exact import is_square, squarefree_part
from torbit.errors import (DegreeUnsupportedError, ReducibleInputError)
from torbit.fields import (Order, TotallyRealField, enumerate_totally_real_fields,
                           minkowski_embedding, order_discriminant,
                           quadratic_field_of_disc, simplest_cubic, unit_group)


# ---------------------------------------------------------------- oracles

def quadratic_discs_upto(bound):
    """Brute force over squarefree d: fundamental discs d or 4d."""
    out = []
    for d in range(2, bound + 1):
        if squarefree_part(d) != d:
            continue
        if d % 4 == 1 and d <= bound:
            out.append(d)
        elif d % 4 in (2, 3) and 4 * d <= bound:
            out.append(4 * d)
    return sorted(out)


def pell_unit_brute(D, bmax=10 ** 5):
    """Minimal (a, b) with a^2 - D b^2 = +-4, for small D."""
    for b in range(1, bmax):
        cands = []
        for s in (-4, 4):
            aa = D * b * b + s
            if aa > 0 and is_square(aa):
                cands.append((math.isqrt(aa), b, s // 4))
        if cands:
            return min(cands)
    return None


# ---------------------------------------------------------------- enumeration

def test_enumerate_quadratic_examples():
    fs = enumerate_totally_real_fields(2, 10)
    assert [f.field_disc for f in fs] == [5, 8]
    assert enumerate_totally_real_fields(2, 4) == []


def test_enumerate_quadratic_against_oracle():
    fs = enumerate_totally_real_fields(2, 400)
    assert [f.field_disc for f in fs] == quadratic_discs_upto(400)


def test_enumerate_cubic_smallest():
    fs = enumerate_totally_real_fields(3, 50)
    assert len(fs) == 1 and fs[0].field_disc == 49


def test_enumerate_cubic_known_list():
    # first totally real cubic fields by discriminant (classical table)
    fs = enumerate_totally_real_fields(3, 500)
    assert [f.field_disc for f in fs] == [49, 81, 148, 169, 229, 257, 316,
                                          321, 361, 404, 469, 473]


def test_unsupported_degree():
    with pytest.raises(DegreeUnsupportedError):
        enumerate_totally_real_fields(5, 100)
    with pytest.raises(DegreeUnsupportedError):
        TotallyRealField((-1, 1))          # degree-1 edge: not representable


# ---------------------------------------------------------------- orders

def test_order_discriminants():
    f8 = quadratic_field_of_disc(8)
    assert order_discriminant(f8.maximal_order()) == 8
    f5 = quadratic_field_of_disc(5)
    assert order_discriminant(f5.maximal_order()) == 5
    # Z[sqrt(5)] is the index-2 suborder: disc 5 * 2^2
    Zs5 = Order(f5, [[Fraction(1), Fraction(0)], [Fraction(-1), Fraction(2)]])
    assert order_discriminant(Zs5) == 20
    assert Zs5.index == 2


def test_disc_mod_4():
    for f in enumerate_totally_real_fields(2, 200):
        assert f.field_disc % 4 in (0, 1)
    for f in enumerate_totally_real_fields(3, 500):
        assert f.field_disc % 4 in (0, 1)


def test_trace_form_is_squared_covolume():
    for f in enumerate_totally_real_fields(2, 60) + enumerate_totally_real_fields(3, 300):
        O = f.maximal_order()
        lat = minkowski_embedding(O)
        assert abs(lat.covolume ** 2 - O.disc) < 1e-9 * O.disc


def test_embedding_examples():
    f8 = quadratic_field_of_disc(8)
    lat = minkowski_embedding(f8.maximal_order())
    assert abs(lat.covolume - math.sqrt(8)) < 1e-9
    rows = lat.basis
    assert np.allclose(sorted(rows[0]), [1, 1])
    # scaling an ideal by 2 multiplies the covolume by 2^n = norm
    from torbit.ideals import FractionalIdeal
    I2 = FractionalIdeal.principal(f8.maximal_order(), (Fraction(2), Fraction(0)))
    lat2 = minkowski_embedding(I2)
    assert abs(lat2.covolume - 4 * math.sqrt(8)) < 1e-9
    assert I2.norm == 4


# ---------------------------------------------------------------- units

def test_quadratic_units_against_cf_oracle():
    f8 = quadratic_field_of_disc(8)
    u8 = unit_group(f8.maximal_order())
    assert abs(u8.classical_regulator - math.log(1 + math.sqrt(2))) < 1e-12
    f5 = quadratic_field_of_disc(5)
    u5 = unit_group(f5.maximal_order())
    assert abs(u5.classical_regulator - math.log((1 + math.sqrt(5)) / 2)) < 1e-12


def test_quadratic_units_brute_force_sweep():
    for f in enumerate_totally_real_fields(2, 120):
        O = f.maximal_order()
        ug = unit_group(O)
        a, b, n = pell_unit_brute(O.disc)
        eps = (a + b * math.sqrt(O.disc)) / 2
        assert abs(ug.classical_regulator - math.log(eps)) < 1e-9
        assert ug.unit_norms[0] == n


def test_unit_invariants():
    for f in enumerate_totally_real_fields(2, 60) + [simplest_cubic(1)]:
        O = f.maximal_order()
        ug = unit_group(O)
        for u, n in zip(ug.fundamental_units, ug.unit_norms):
            assert abs(f.norm(u)) == 1
            assert n in (1, -1)
            assert O.contains(u)
        # rows of the log lattice live in the sum-zero hyperplane
        assert np.max(np.abs(ug.log_lattice.sum(axis=1))) < 1e-10
        ratio = ug.covolume_regulator / ug.classical_regulator
        assert abs(ratio - math.sqrt(f.degree)) < 1e-12


def cubic_regulator_brute(field, B=60.0):
    """Independent oracle: all units in a fixed box via integer sweep over
    order coordinates, then the best (smallest) nondegenerate log pair."""
    O = field.maximal_order()
    M = O.embedding_matrix()
    bound = np.sum(np.abs(np.linalg.inv(M)), axis=0) * B * math.sqrt(3)
    logs = []
    rng = [range(-int(b) - 1, int(b) + 2) for b in bound]
    for c0 in rng[0]:
        for c1 in rng[1]:
            for c2 in rng[2]:
                if (c0, c1, c2) == (0, 0, 0):
                    continue
                v = c0 * M[0] + c1 * M[1] + c2 * M[2]
                if np.max(np.abs(v)) > B or np.min(np.abs(v)) < 1.0 / B:
                    continue
                x = O.element((c0, c1, c2))
                if abs(field.norm(x)) == 1:
                    lv = np.log(np.abs(v))
                    if np.max(np.abs(lv)) > 1e-9:
                        logs.append(lv)
    best = None
    for i in range(len(logs)):
        for j in range(i + 1, len(logs)):
            r = abs(np.linalg.det(np.array([logs[i][:2], logs[j][:2]])))
            if r > 1e-8 and (best is None or r < best):
                best = r
    return best


def test_cubic_unit_group_disc49():
    f49 = TotallyRealField((-1, -2, 1, 1))
    ug = unit_group(f49.maximal_order())
    oracle = cubic_regulator_brute(f49, B=25.0)
    assert oracle is not None
    assert abs(ug.classical_regulator - oracle) < 1e-8
    assert len(ug.fundamental_units) == 2


def test_simplest_cubic_family():
    for a, d in [(-1, 49), (1, 169), (0, 81)]:
        assert simplest_cubic(a).field_disc == d
    # the defining root and its conjugate 1+rho are units of the order
    fl = simplest_cubic(4)
    rho = fl.gen()
    assert abs(fl.norm(rho)) == 1
    one_plus = tuple(a + (1 if k == 0 else 0) for k, a in enumerate(rho))
    assert abs(fl.norm(one_plus)) == 1


def test_simplest_cubic_regulator_growth():
    Cs = []
    for a in range(-1, 31):
        fl = simplest_cubic(a)
        ug = unit_group(fl.maximal_order())
        Cs.append(ug.classical_regulator / math.log(fl.field_disc) ** 2)
    assert max(Cs) / min(Cs) <= 3.0


def test_serialization_schema():
    O = quadratic_field_of_disc(40).maximal_order()
    js = O.to_json()
    assert js["degree"] == 2
    assert isinstance(js["disc"], str) and js["disc"] == "40"
    assert all(isinstance(c, str) for c in js["min_poly"])


def test_reducible_simplest_cubic_guard():
    with pytest.raises(ReducibleInputError):
        TotallyRealField((1, 2, 1))   # (x+1)^2
