from itertools import combinations
from math import gcd

import pytest
from hypothesis import given
from hypothesis import strategies as st

from posetsheaves.zlinalg import (FgGroup, FreeComplex, GradedGroups, SparseMatrix, Z, ZERO,
                                  complex_from_dense, derived_dual, diagonal, homology_of,
                                  image_basis, intmatrix, invariant_factors, kernel_basis, kunneth,
                                  left_inverse, matmul, rank, smith_normal_form, solve_exact,
                                  unimodular_inverse)

from conftest import int_matrices


def det(rows):
    """Laplace expansion; only used on tiny minors."""
    n = len(rows)
    if n == 0:
        return 1
    if n == 1:
        return rows[0][0]
    return sum((-1) ** j * rows[0][j] * det([r[:j] + r[j + 1:] for r in rows[1:]]) for j in range(n))


def determinantal_factors(rows, m, n):
    """Invariant factors from gcds of k x k minors (independent of any elimination)."""
    out, prev = [], 1
    for k in range(1, min(m, n) + 1):
        g = 0
        for I in combinations(range(m), k):
            for J in combinations(range(n), k):
                g = gcd(g, det([[rows[i][j] for j in J] for i in I]))
        if g == 0:
            break
        out.append(g // prev)
        prev = g
    return out


@given(int_matrices(max_rows=4, max_cols=4))
def test_snf_matches_determinantal_divisors(data):
    rows, m, n = data
    M = intmatrix(rows, m, n)
    S, U, V = smith_normal_form(M)
    assert (matmul(matmul(U, M), V) == S).all()
    d = [x for x in diagonal(S) if x]
    assert d == determinantal_factors(rows, m, n)
    for a, b in zip(d, d[1:]):
        assert b % a == 0
    if m:
        unimodular_inverse(U)
    if n:
        unimodular_inverse(V)


@given(int_matrices(max_rows=6, max_cols=6))
def test_sparse_invariant_factors_agree_with_dense(data):
    rows, m, n = data
    M = intmatrix(rows, m, n)
    r, f = invariant_factors(SparseMatrix.from_dense(M))
    S, _, _ = smith_normal_form(M)
    d = [x for x in diagonal(S) if x]
    assert r == len(d) == rank(M)
    assert f == [x for x in d if x > 1]


def test_invariant_factors_examples():
    assert invariant_factors(intmatrix([[2, 4, 4], [-6, 6, 12], [10, -4, -16]])) == (3, [2, 6, 12])
    assert invariant_factors(intmatrix([[0, 0], [0, 0]])) == (0, [])
    assert invariant_factors(intmatrix([], 0, 3)) == (0, [])


@given(int_matrices(max_rows=5, max_cols=5))
def test_kernel_and_image_bases(data):
    rows, m, n = data
    M = intmatrix(rows, m, n)
    K = kernel_basis(M)
    assert K.shape[1] == n - rank(M)
    if K.size and m:
        assert not matmul(M, K).any()
    # saturated kernel: a left inverse exists
    left_inverse(K)
    B = image_basis(M)
    assert B.shape[1] == rank(M)
    if n:
        # every column of M is an integer combination of B and vice versa
        assert solve_exact(B, M) is not None
        assert solve_exact(M, B) is not None


def test_unimodular_inverse_and_solve():
    U = intmatrix([[2, 1], [1, 1]])
    assert (matmul(U, unimodular_inverse(U)) == intmatrix([[1, 0], [0, 1]])).all()
    with pytest.raises(ValueError):
        unimodular_inverse(intmatrix([[2, 0], [0, 1]]))
    assert solve_exact(intmatrix([[2]]), intmatrix([[3]])) is None
    assert (solve_exact(intmatrix([[2]]), intmatrix([[4]])) == intmatrix([[2]])).all()


def test_fggroup_normal_form():
    assert FgGroup(1, (6, 4)) == FgGroup.cyclic([0, 2, 12])
    assert FgGroup.cyclic([1, 1, 0]) == Z
    assert str(FgGroup(2, (3,))) == "Z^2 + Z/3"
    assert str(ZERO) == "0"
    assert FgGroup.from_dict({"rank": 0, "torsion": [2]}).to_dict() == {"rank": 0, "torsion": [2]}
    with pytest.raises(ValueError):
        FgGroup(-1)


@given(st.lists(st.integers(0, 12), max_size=4), st.lists(st.integers(0, 12), max_size=4))
def test_tensor_and_tor_orders(a, b):
    A, B = FgGroup.cyclic(a), FgGroup.cyclic(b)
    # Tor only sees torsion, and Tor(Z/m, Z/n) = Z/m (x) Z/n
    T = A.tensor(B)
    assert T.rank == A.rank * B.rank
    tA = A.torsion_part()
    tB = B.torsion_part()
    assert A.tor(B) == tA.tensor(tB)
    assert A.tensor(B) == B.tensor(A)


def test_graded_dual_is_universal_coefficients():
    # H^0 = Z, H^1 = Z/2 + Z  dualizes to  rank in -0, -1 and torsion in 0
    H = GradedGroups({0: Z, 1: FgGroup(1, (2,))})
    assert H.dual() == GradedGroups({0: FgGroup(1, (2,)), -1: Z})
    assert H.dual().dual() == H
    assert H.shift(1) == GradedGroups({-1: Z, 0: FgGroup(1, (2,))})


def test_kunneth_with_tor():
    A = GradedGroups({0: Z, 1: FgGroup(0, (2,))})
    assert kunneth(A, A) == GradedGroups({0: Z, 1: FgGroup(0, (2, 2, 2)), 2: FgGroup(0, (2,))})


def _random_complex(data):
    """Z^k -K-> Z^n -M-> Z^m with K spanning ker M."""
    rows, m, n = data
    M = intmatrix(rows, m, n)
    K = kernel_basis(M)
    return complex_from_dense(0, [K, M]) if n else None


@given(int_matrices(max_rows=4, max_cols=4, lo=-4, hi=4))
def test_homology_euler_and_dual(data):
    C = _random_complex(data)
    if C is None:
        return
    H = homology_of(C)
    assert H.euler_characteristic() == C.euler_characteristic()
    # cohomology of the dual complex is the universal-coefficient dual
    assert homology_of(derived_dual(C)) == H.dual()


def test_homology_of_rp2_cellular():
    # cellular cochains of RP^2: Z -0-> Z -2-> Z
    C = complex_from_dense(0, [intmatrix([[0]]), intmatrix([[2]])])
    assert homology_of(C) == GradedGroups({0: Z, 2: FgGroup(0, (2,))})


def test_bad_complex_rejected():
    with pytest.raises(ValueError):
        FreeComplex({0: 1, 1: 1}, {0: SparseMatrix.from_dense(intmatrix([[1, 1]]))})
    C = complex_from_dense(0, [intmatrix([[1]]), intmatrix([[1]])])
    with pytest.raises(ValueError):
        homology_of(C)
