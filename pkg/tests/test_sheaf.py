import json
import random

import pytest
from hypothesis import given
from hypothesis import strategies as st

from posetsheaves import poset as ps
from posetsheaves.families import random_sheaf, random_sum_sheaf
from posetsheaves.sheaf import (PresentedSheaf, Sheaf, as_complex, cone, constant_sheaf, direct_sum,
                                extend_by_zero, identity_morphism, load_sheaf, restrict, sheaf_from_json,
                                sheaf_to_json, shift, skyscraper, stalk_cohomology, standard_resolutions,
                                supported_constant, validate)
from posetsheaves.zlinalg import FgGroup, GradedGroups, Z, ZERO, invariant_factors

from conftest import posets

FIXTURES = __import__("pathlib").Path(__file__).resolve().parents[1] / "fixtures"


def cokernel_group(R, k):
    """Z^k / im R straight from the invariant factors."""
    r, f = invariant_factors(R)
    return FgGroup(k - r, tuple(f))


def test_sheaf_shape_errors(V):
    with pytest.raises(ValueError):
        Sheaf(V, [1, 1])
    with pytest.raises(ValueError):
        Sheaf(V, {"o": 1, "a": 1, "b": 1}, {("o", "a"): [[1, 1]]})
    with pytest.raises(ValueError):
        supported_constant(ps.chain_poset(3), ["0", "2"])


def test_non_functorial_sheaf_is_reported(A2):
    F = Sheaf(A2, [1] * 4, {("∅", "1"): [[1]], ("∅", "2"): [[1]], ("1", "12"): [[1]], ("2", "12"): [[-1]]})
    rep = validate(F)
    assert not rep and "∅" in rep.message and "12" in rep.message
    assert validate(constant_sheaf(A2))


@given(posets(max_size=5), st.integers(0, 10**6))
def test_random_sum_sheaves_are_functorial(X, seed):
    F = random_sum_sheaf(X, random.Random(seed), max_rank=3)
    assert validate(F)


def test_restrict_and_extend(A2):
    Z = constant_sheaf(A2)
    U = ps.up_set(A2, "1").mask
    R = restrict(Z, U)
    assert R.ranks == (1, 1)
    E = extend_by_zero(R, A2)
    assert E.ranks == supported_constant(A2, U).ranks
    assert stalk_cohomology(E) == stalk_cohomology(supported_constant(A2, U))


def test_sums_shift_cone(V):
    F, G = constant_sheaf(V), skyscraper(V, "o")
    S = direct_sum(F, G)
    assert validate(S)
    sc = S.stalk_cohomology()
    assert sc["o"] == GradedGroups({0: FgGroup(2)}) and sc["a"] == GradedGroups({0: Z})
    T = shift(F, 3)
    assert T.stalk_cohomology()["a"] == GradedGroups({-3: Z})
    C = cone(identity_morphism(F))
    assert validate(C) and C.is_acyclic()


@given(posets(max_size=4), st.integers(0, 10**6))
def test_cone_of_identity_is_acyclic(X, seed):
    F = random_sheaf(X, random.Random(seed), "any")
    K = as_complex(F)
    assert cone(identity_morphism(K)).is_acyclic()


@given(posets(max_size=5), st.integers(0, 10**6), st.sampled_from(["any", "torsion", "free"]))
def test_presented_sheaf_stalks_and_resolution(X, seed, kind):
    P = random_sheaf(X, random.Random(seed), kind)
    assert validate(P)
    N = P.normalized()
    for i, x in enumerate(X.labels):
        assert P.stalk(x) == cokernel_group(N.rels[i], N.gens[i])
    # torsion stalks get a two-term free resolution; its only cohomology is the stalk
    R = P.free_resolution()
    assert validate(R)
    sc = R.stalk_cohomology()
    for x in X.labels:
        H = P.stalk(x)
        assert sc[x] == (GradedGroups({0: H}) if H != ZERO else GradedGroups({}))
    assert stalk_cohomology(P) == sc


def test_presented_sheaf_normal_form(V):
    # Z^2 / (2, 4) at o is Z + Z/2
    P = PresentedSheaf(V, [2, 0, 0], [[[2], [4]], [], []], {})
    assert P.stalk("o") == FgGroup(1, (2,))
    assert P.is_torsion() is False and P.is_torsion_free() is False
    N = P.normalized()
    assert N.gens[0] == 2 and N.rels[0].shape == (2, 1)


def test_relations_must_be_preserved(V):
    # Z/2 at o mapping onto Z at a does not respect relations
    P = PresentedSheaf(V, [1, 1, 0], [[[2]], [[]], []], {("o", "a"): [[1]]})
    assert not validate(P)


def test_standard_resolution_terms(V):
    co, ch = standard_resolutions(constant_sheaf(V))
    assert co.chain_counts() == {0: 3, 1: 2}
    assert ch.chain_counts() == {0: 3, 1: 2}


@given(posets(max_size=4), st.integers(0, 10**6))
def test_json_round_trip(X, seed):
    F = random_sum_sheaf(X, random.Random(seed))
    G = sheaf_from_json(json.loads(json.dumps(sheaf_to_json(F))))
    assert G.ranks == F.ranks
    assert all((G.maps[k] == M).all() for k, M in F.maps.items())


def test_fixture_sheaves():
    F = load_sheaf(FIXTURES / "v_constant.json")
    assert isinstance(F, Sheaf) and F.ranks == (1, 1, 1)
    T = load_sheaf(FIXTURES / "v_z2_at_o.json")
    assert isinstance(T, PresentedSheaf)
    assert T.stalks() == {"o": FgGroup(0, (2,)), "a": ZERO, "b": ZERO}


def test_json_rejects_non_cover(V):
    d = {"poset": ps.to_json(V), "stalk_ranks": {"a": 1, "b": 1}, "cover_maps": {"a->b": [[1]]}}
    with pytest.raises(ValueError):
        sheaf_from_json(d)
