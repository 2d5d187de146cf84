import random

from posetsheaves import poset as ps
from posetsheaves.families import (all_posets_up_to, local_posets_up_to, posets_up_to_iso, random_poset,
                                   random_posets, random_sheaf, random_unimodular)
from posetsheaves.sheaf import validate
from posetsheaves.zlinalg import unimodular_inverse

# number of unlabelled posets on n points (OEIS A000112)
KNOWN_COUNTS = [1, 1, 2, 5, 16, 63, 318]


def test_counts_up_to_isomorphism():
    assert [len(posets_up_to_iso(n)) for n in range(7)] == KNOWN_COUNTS


def test_classes_are_pairwise_non_isomorphic():
    for n in range(5):
        P = posets_up_to_iso(n)
        for i in range(len(P)):
            for j in range(i):
                assert not ps.is_isomorphic(P[i], P[j])


def test_local_family():
    L = local_posets_up_to(5)
    assert len(L) == sum(KNOWN_COUNTS[:5])
    assert all(len(X.minimal()) == 1 for X in L)
    assert len(all_posets_up_to(4)) == sum(KNOWN_COUNTS[1:5])


def test_random_posets_reproducible():
    a = random_posets(5, [3, 4], seed=9)
    b = random_posets(5, [3, 4], seed=9)
    assert a == b
    X = random_poset(6, random.Random(1), p=1.0)
    assert X.dim == 5


def test_random_unimodular():
    rng = random.Random(3)
    for k in range(5):
        unimodular_inverse(random_unimodular(k, rng))


def test_random_sheaves_are_valid():
    rng = random.Random(4)
    for X in all_posets_up_to(4):
        for kind in ("free", "torsion", "any"):
            F = random_sheaf(X, rng, kind)
            assert validate(F)
            if kind == "free":
                assert F.is_free_presentation()
            if kind == "torsion":
                assert F.is_torsion()
