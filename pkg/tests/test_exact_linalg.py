import itertools
from fractions import Fraction
from math import gcd

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from weightglue.exact_linalg import (CoefficientRing, NotWellDefined, PresentedModule, RingMismatch,
                                     cokernel_presentation, invariant_factors, kernel_basis, module_image,
                                     modules_isomorphic, parse_ring, smith_normal_form, solve_linear)

Z = CoefficientRing.integers()
RINGS = [Z, CoefficientRing.integers_mod(12), CoefficientRing.integers_mod(4), CoefficientRing.localized(3),
         CoefficientRing.rationals(), CoefficientRing.prime_field(5), CoefficientRing.prime_field(2)]


def _det(rows):
    """Bareiss fraction-free determinant over Z."""
    a = [list(map(int, r)) for r in rows]
    n = len(a)
    sign, prev = 1, 1
    for k in range(n - 1):
        if a[k][k] == 0:
            for r in range(k + 1, n):
                if a[r][k]:
                    a[k], a[r] = a[r], a[k]
                    sign = -sign
                    break
            else:
                return 0
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                a[i][j] = (a[i][j] * a[k][k] - a[i][k] * a[k][j]) // prev
        prev = a[k][k]
    return sign * a[n - 1][n - 1] if n else 1


def _minor_gcd(A, k):
    m, n = A.shape
    g = 0
    for rows in itertools.combinations(range(m), k):
        for cols in itertools.combinations(range(n), k):
            g = gcd(g, _det([[A[r, c] for c in cols] for r in rows]))
    return g


def test_snf_example():
    A = Z.array([[2, 4], [6, 8]])
    U, D, V = smith_normal_form(Z, A)
    assert (Z.matmul(Z.matmul(U, A), V) == D).all()
    assert [D[0, 0], D[1, 1]] == [2, 4]


def test_snf_determinantal_divisors():
    rng = np.random.default_rng(11)
    for _ in range(200):
        m, n = (int(v) for v in rng.integers(1, 7, 2))
        A = Z.array(rng.integers(-9, 10, (m, n)).tolist(), shape=(m, n))
        U, D, V = smith_normal_form(Z, A)
        assert (Z.matmul(Z.matmul(U, A), V) == D).all()
        for i in range(min(m, n) - 1):
            if D[i + 1, i + 1]:
                assert D[i + 1, i + 1] % D[i, i] == 0
        for k in range(1, min(m, n) + 1):
            if k <= 3 or (m <= 5 and n <= 5):
                assert _minor_gcd(A, k) == _minor_gcd(D, k)


@pytest.mark.parametrize("ring", RINGS, ids=str)
def test_snf_kernel_solve_all_rings(ring):
    rng = np.random.default_rng(0)
    for _ in range(60):
        m, n = (int(v) for v in rng.integers(1, 6, 2))
        A = ring.random_matrix(rng, m, n, 9)
        U, D, V = smith_normal_form(ring, A)
        assert (ring.matmul(ring.matmul(U, A), V) == D).all()
        K = kernel_basis(ring, A)
        assert not ring.matmul(A, K).any() if K.size else True
        x = ring.random_matrix(rng, n, 1, 5)
        b = ring.matmul(A, x)
        y = solve_linear(ring, A, b)
        assert y is not None and (ring.matmul(A, y) == b).all()


def test_kernel_examples():
    K = kernel_basis(Z, Z.array([[2, -4]]))
    assert K.shape == (2, 1) and sorted([abs(K[0, 0]), abs(K[1, 0])]) == [1, 2]
    assert kernel_basis(Z, Z.eye(3)).shape[1] == 0
    assert kernel_basis(Z, Z.zeros(2, 2)).shape[1] == 2


def test_kernel_saturated_over_Z():
    rng = np.random.default_rng(3)
    for _ in range(50):
        A = Z.array(rng.integers(-6, 7, (3, 5)).tolist(), shape=(3, 5))
        K = kernel_basis(Z, A)
        if K.shape[1]:
            # torsion-free cokernel of the basis matrix
            assert all(f == 0 for f in invariant_factors(Z, K))


def test_cokernel_examples():
    assert cokernel_presentation(Z, Z.array([[2]])).invariant_factors == (2,)
    assert cokernel_presentation(Z, Z.array([[1, 0], [0, 3]])).invariant_factors == (3,)
    assert cokernel_presentation(Z, Z.array([[2, 4], [6, 8]])).invariant_factors == (2, 4)


def test_cokernel_matches_snf():
    rng = np.random.default_rng(5)
    for _ in range(50):
        A = Z.array(rng.integers(-5, 6, (3, 4)).tolist(), shape=(3, 4))
        _, D, _ = smith_normal_form(Z, A)
        assert modules_isomorphic(cokernel_presentation(Z, A), cokernel_presentation(Z, D))


def test_solve_examples():
    assert solve_linear(Z, Z.array([[2]]), Z.vector([4]))[0] == 2
    assert solve_linear(Z, Z.array([[2]]), Z.vector([3])) is None
    x = solve_linear(Z, Z.array([[2, 3]]), Z.vector([1]))
    assert 2 * x[0] + 3 * x[1] == 1


def test_module_image_examples():
    Z4 = CoefficientRing.integers_mod(4)
    F = PresentedModule.free
    two = PresentedModule(Z, 1, Z.array([[2]]))
    assert module_image(Z.eye(1), two, two).invariant_factors == (2,)
    assert module_image(Z.array([[2]]), F(Z, 1), F(Z, 1)).invariant_factors == (0,)
    four = PresentedModule(Z, 1, Z.array([[4]]))
    assert module_image(Z.array([[2]]), F(Z, 1), four).invariant_factors == (2,)
    assert module_image(Z4.array([[2]]), F(Z4, 1), F(Z4, 1)).order == 2
    with pytest.raises(NotWellDefined):
        module_image(Z.eye(1), two, F(Z, 1))


def test_modules_isomorphic_examples():
    a = cokernel_presentation(Z, Z.array([[2, 0], [0, 3]]))
    b = cokernel_presentation(Z, Z.array([[6]]))
    assert modules_isomorphic(a, b)
    assert not modules_isomorphic(PresentedModule.free(Z, 1), cokernel_presentation(Z, Z.array([[2]])))
    assert modules_isomorphic(PresentedModule.zero(Z), PresentedModule.zero(Z))
    with pytest.raises(RingMismatch):
        modules_isomorphic(PresentedModule.zero(Z), PresentedModule.zero(CoefficientRing.rationals()))


def test_ring_parsing_and_units():
    assert parse_ring("Z/4").modulus == 4
    assert parse_ring("F2").is_field
    R3 = parse_ring("Z[1/3]")
    assert R3.is_unit(R3(Fraction(1, 3))) and not R3.is_unit(2)
    assert parse_ring("Q").is_unit(Fraction(2, 7))


@settings(max_examples=60, deadline=None)
@given(st.lists(st.lists(st.integers(-9, 9), min_size=1, max_size=4), min_size=1, max_size=4)
       .filter(lambda rows: len({len(r) for r in rows}) == 1),
       st.sampled_from(RINGS))
def test_snf_property(rows, ring):
    A = ring.array(rows)
    U, D, V = smith_normal_form(ring, A)
    assert (ring.matmul(ring.matmul(U, A), V) == D).all()
    off = D.copy()
    for i in range(min(D.shape)):
        off[i, i] = 0
    assert not off.any()
