import random

import pytest
from hypothesis import given
from hypothesis import strategies as st

from posetsheaves import poset as ps
from posetsheaves.cohomology import (cochain_model, ext_skyscrapers, ext_skyscrapers_generic,
                                     global_cohomology, homology, local_cohomology,
                                     point_local_cohomology, reduced_cohomology, reduced_cohomology_direct,
                                     reduced_homology, rhom_global, rhom_sheaf, section_cohomology)
from posetsheaves.families import random_sheaf, random_sum_sheaf
from posetsheaves.sheaf import as_complex, constant_sheaf, restrict, skyscraper, supported_constant
from posetsheaves.simplicial import RP2_6, from_facets, order_complex, simplicial_reduced_homology
from posetsheaves.zlinalg import FgGroup, GradedGroups, Z

from conftest import posets


def order_complex_homology(X):
    """Unreduced homology of the order complex via simplicial boundary matrices."""
    H = simplicial_reduced_homology(order_complex(X))
    return H + GradedGroups({0: Z}) if X.n else H


def test_small_examples(V):
    C = ps.circle_poset()
    assert global_cohomology(V, constant_sheaf(V)) == GradedGroups({0: Z})
    assert global_cohomology(C, constant_sheaf(C)) == GradedGroups({0: Z, 1: Z})
    assert homology(C, constant_sheaf(C)) == GradedGroups({0: Z, 1: Z})
    # U_o minus o is two points
    assert point_local_cohomology(V, "o", constant_sheaf(V)) == GradedGroups({1: Z})
    _, RP, _ = from_facets(RP2_6, projective=True)
    assert global_cohomology(RP, constant_sheaf(RP)) == GradedGroups({0: Z, 2: FgGroup(0, (2,))})
    assert homology(RP, constant_sheaf(RP)) == GradedGroups({0: Z, 1: FgGroup(0, (2,))})


@given(posets(max_size=6))
def test_constant_sheaf_against_order_complex(X):
    Hs = order_complex_homology(X)
    assert homology(X, constant_sheaf(X)) == Hs
    # universal coefficients, homological degrees stored as negative cochain degrees
    assert global_cohomology(X, constant_sheaf(X)) == Hs.reindex(lambda d: -d).dual()
    assert reduced_homology(X) == simplicial_reduced_homology(order_complex(X))


@given(posets(max_size=6))
def test_reduced_cohomology_routes_agree(X):
    assert reduced_cohomology(X) == reduced_cohomology_direct(X)


@given(posets(max_size=5))
def test_open_stars_are_acyclic(X):
    Zx = constant_sheaf(X)
    for i in range(X.n):
        assert section_cohomology(Zx, X.up[i]) == GradedGroups({0: Z})
        # Z on a closure is flasque with one global section
        assert global_cohomology(X, supported_constant(X, X.down[i])) == GradedGroups({0: Z})


@given(posets(max_size=5), st.integers(0, 10**6))
def test_local_cohomology_euler_additivity(X, seed):
    rng = random.Random(seed)
    F = random_sheaf(X, rng, "any")
    Y = X.down_closure(1 << rng.randrange(X.n))
    HY = local_cohomology(X, Y, F)
    HX = global_cohomology(X, F)
    HU = section_cohomology(F, X.full & ~Y)
    assert HY.euler_characteristic() - HX.euler_characteristic() + HU.euler_characteristic() == 0


def test_local_cohomology_rejects_open_set(V):
    with pytest.raises(ValueError):
        local_cohomology(V, ["a"], constant_sheaf(V))


@given(posets(max_size=6))
def test_ext_between_skyscrapers(X):
    for x in range(X.n):
        a = X.labels[x]
        assert rhom_global(skyscraper(X, a), skyscraper(X, a)) == GradedGroups({0: Z})
        for y in range(X.n):
            b = X.labels[y]
            if X.lt(a, b):
                assert ext_skyscrapers(X, a, b) == ext_skyscrapers_generic(X, a, b)
            elif x != y and not X.leq(b, a):
                assert rhom_global(skyscraper(X, a), skyscraper(X, b)).is_zero()


def test_ext_examples(A2, A3):
    # (∅,12) is two points, (∅,123) a hexagon, (∅,1) empty with H̃^{-1} = Z
    assert ext_skyscrapers(A2, "∅", "12") == GradedGroups({2: Z})
    assert ext_skyscrapers(A3, "∅", "123") == GradedGroups({3: Z})
    assert ext_skyscrapers(A3, "∅", "1") == GradedGroups({1: Z})
    with pytest.raises(ValueError):
        ext_skyscrapers(A2, "1", "2")


@given(posets(max_size=5), st.integers(0, 10**6))
def test_rhom_from_constant_is_cohomology(X, seed):
    F = random_sum_sheaf(X, random.Random(seed))
    assert rhom_global(constant_sheaf(X), F) == global_cohomology(X, F)


@given(posets(max_size=4), st.integers(0, 10**6))
def test_rhom_sheaf_sections_match_rhom_global(X, seed):
    rng = random.Random(seed)
    F, G = random_sheaf(X, rng, "any"), random_sheaf(X, rng, "any")
    K = rhom_sheaf(F, G)
    K.check()
    assert K.global_cohomology() == rhom_global(F, G)
    # stalk at x is RHom over U_x
    for i, x in enumerate(X.labels):
        U = X.up[i]
        assert K.stalk_cohomology()[x] == rhom_global(restrict(as_complex(F), U), restrict(as_complex(G), U))


@given(posets(max_size=5), st.integers(0, 10**6))
def test_cochain_model_resolves_the_sheaf(X, seed):
    F = random_sheaf(X, random.Random(seed), "any")
    M = cochain_model(as_complex(F))
    assert M.stalk_cohomology() == as_complex(F).stalk_cohomology()
    assert M.global_cohomology() == global_cohomology(X, F)
