import math
import random
from fractions import Fraction

from torbit._exact import (divisors, factorize, frac_hnf_rows, frac_mat_det,
                           frac_mat_inv, hnf_rows, is_square,
                           isolate_real_roots, lattice_intersect,
                           monic_int_poly_is_irreducible, multiplicative_order,
                           poly_disc_cubic, refine_root, squarefree_part)


def test_squarefree_part():
    assert squarefree_part(12) == 3
    assert squarefree_part(49) == 1
    assert squarefree_part(-18) == -2
    for n in range(1, 500):
        s = squarefree_part(n)
        assert n % s == 0 and is_square(n // s)


def test_factorize_divisors():
    random.seed(0)
    for _ in range(50):
        n = random.randint(2, 10 ** 6)
        fac = factorize(n)
        prod = 1
        for p, e in fac.items():
            prod *= p ** e
        assert prod == n
        ds = divisors(n)
        assert all(n % d == 0 for d in ds)
        assert len(ds) == len(set(ds))


def test_multiplicative_order():
    for q in (5, 7, 11, 91, 1001):
        for a in (2, 3):
            k = multiplicative_order(a, q)
            assert pow(a, k, q) == 1
            for d in divisors(k)[:-1]:
                assert pow(a, d, q) != 1


def test_cubic_discriminant():
    # x^3 - 3x - 1 has discriminant 81
    assert poly_disc_cubic(-1, -3, 0) == 81
    # x^3 + x^2 - 2x - 1 has discriminant 49
    assert poly_disc_cubic(-1, -2, 1) == 49


def test_irreducibility():
    assert monic_int_poly_is_irreducible((-2, 0, 1))
    assert not monic_int_poly_is_irreducible((1, 2, 1))      # (x+1)^2
    assert monic_int_poly_is_irreducible((-1, -2, 1, 1))
    assert not monic_int_poly_is_irreducible((0, -1, 0, 1))  # x(x^2-1)


def test_root_isolation_and_refinement():
    coeffs = (-1, -2, 1, 1)   # three real roots
    iso = isolate_real_roots(coeffs)
    assert len(iso) == 3
    for lo, hi in iso:
        lo2, hi2 = refine_root(coeffs, lo, hi, Fraction(1, 2 ** 60))
        assert hi2 - lo2 <= Fraction(1, 2 ** 60)
        mid = float((lo2 + hi2) / 2)
        val = mid ** 3 + mid ** 2 - 2 * mid - 1
        assert abs(val) < 1e-12


def test_hnf_canonical():
    rows = [[2, 1], [0, 3]]
    h1 = hnf_rows(rows)
    # unimodular transformations do not change the HNF
    h2 = hnf_rows([[2 + 0, 1 + 3], [2, 4]])  # r1+r2, r1+r2-... spans same
    assert h1 == hnf_rows([r[:] for r in h1])
    assert hnf_rows([[4, 2], [2, 1], [0, 6]]) == hnf_rows([[2, 1], [0, 6]])


def test_lattice_intersect_roundtrip():
    random.seed(1)
    for _ in range(20):
        A = [[random.randint(-4, 4) for _ in range(2)] for _ in range(2)]
        if A[0][0] * A[1][1] - A[0][1] * A[1][0] == 0:
            continue
        h, d = lattice_intersect([[2, 0], [0, 2]], 1, A, 1)
        # intersection is inside both lattices
        Ainv = frac_mat_inv([[Fraction(c) for c in r] for r in A])
        for r in h:
            v = [Fraction(c, d) for c in r]
            coords = [sum(v[k] * Ainv[k][j] for k in range(2)) for j in range(2)]
            assert all(c.denominator == 1 for c in coords)
            assert all(Fraction(c, d) % 2 == 0 for c in r)


def test_frac_det_inv():
    A = [[Fraction(1), Fraction(1, 2)], [Fraction(0), Fraction(3)]]
    assert frac_mat_det(A) == 3
    Ainv = frac_mat_inv(A)
    prod = [[sum(A[i][k] * Ainv[k][j] for k in range(2)) for j in range(2)]
            for i in range(2)]
    assert prod == [[1, 0], [0, 1]]
