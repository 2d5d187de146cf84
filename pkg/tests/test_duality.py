import random

import pytest
from hypothesis import given
from hypothesis import strategies as st

from posetsheaves import poset as ps
from posetsheaves.cohomology import global_cohomology, hom_complex, local_cohomology, rhom_global
from posetsheaves.duality import (NotDualizable, canonical_complex, canonical_stalks, double_dual, dualize,
                                  dualizing_model, is_locally_dualizable, is_sphere, reflexivity_check,
                                  sphere_report, verify_closed_restriction, verify_local_duality)
from posetsheaves.families import local_posets_up_to, random_sheaf
from posetsheaves.sheaf import as_complex, constant_sheaf, skyscraper, stalk_cohomology
from posetsheaves.simplicial import affine_space, projective_space
from posetsheaves.zlinalg import GradedGroups, Z, homology_of

from conftest import posets

LOCAL_DUALIZABLE = [X for X in local_posets_up_to(5) if is_locally_dualizable(X)]


def test_sphere_predicate():
    assert is_sphere(GradedGroups({1: Z}), 1)
    assert not is_sphere(GradedGroups({1: Z}), 2)
    assert not is_sphere(GradedGroups({}), 0)
    assert is_sphere(GradedGroups({-1: Z}), -1)


def test_sphere_reports(A3, E11):
    assert sphere_report(A3).is_locally_dualizable
    assert all(is_locally_dualizable(projective_space(n)) for n in range(1, 5))
    r = sphere_report(E11)
    assert r.is_catenary and not r.is_locally_dualizable
    assert "not a homological sphere" in r.reason()
    r = sphere_report(ps.p5_poset())
    assert not r.is_catenary and r.reason().startswith("not catenary")
    # a single point interval is not a sphere
    assert not is_locally_dualizable(ps.chain_poset(3))
    assert is_locally_dualizable(ps.chain_poset(2))


@pytest.mark.parametrize("n", [1, 2, 3])
def test_d0_model_of_affine_space(n):
    X = affine_space(n)
    sc = dualizing_model(X, "D0").stalk_cohomology()
    top = X.labels[X.maximal()[0]]
    for x, H in sc.items():
        assert H == (GradedGroups({-n: Z}) if x == top else GradedGroups({}))


@given(posets(max_size=5), st.integers(0, 10**6))
def test_global_duality(X, seed):
    F = random_sheaf(X, random.Random(seed), "any")
    M = dualizing_model(X, "global")
    lhs = homology_of(hom_complex(F, M.to_sheaf_complex()).global_sections())
    assert lhs == global_cohomology(X, F).dual()


@given(posets(max_size=5), st.integers(0, 10**6))
def test_local_duality_two_routes(X, seed):
    rng = random.Random(seed)
    F = random_sheaf(X, rng, "any")
    Y = X.down_closure(1 << rng.randrange(X.n))
    assert verify_local_duality(X, Y, F)
    assert verify_local_duality(X, Y, F, generic=True)


@given(posets(max_size=5), st.integers(0, 10**6))
def test_closed_restriction_of_local_models(X, seed):
    rng = random.Random(seed)
    Y = X.down_closure(1 << rng.randrange(X.n))
    K = X.down_closure(1 << rng.randrange(X.n) | 1 << rng.randrange(X.n))
    assert verify_closed_restriction(X, Y, K)


@pytest.mark.parametrize("X", LOCAL_DUALIZABLE, ids=lambda X: str(X.covers))
def test_canonical_stalks_match_d0_model(X):
    cc, rep = canonical_complex(X)
    assert cc is not None
    phi = ps.codimension_function(X, preset="local")
    assert canonical_stalks(X, phi) == dualizing_model(X, "D0").stalk_cohomology()


@pytest.mark.parametrize("X", LOCAL_DUALIZABLE, ids=lambda X: str(X.covers))
def test_dualize_fast_route_matches_generic(X):
    rng = random.Random(X.n)
    F = random_sheaf(X, rng, "any")
    D = dualize(X, F)
    generic = hom_complex(as_complex(F), dualizing_model(X, "D0").to_sheaf_complex())
    assert D.stalk_cohomology() == generic.stalk_cohomology()
    assert D.global_cohomology() == rhom_global(F, dualizing_model(X, "D0").to_sheaf_complex())
    # sections over X of D(F) dualize local cohomology at the closed point
    assert D.global_cohomology() == local_cohomology(X, X.labels_of(1 << X.minimal()[0]), F).dual()


def test_dualize_examples(V, A2):
    # V: D(Z_o) sits at o in degree 0; D(Z_X) has rank-one stalks in degree -1
    assert dualize(V, skyscraper(V, "o")).stalk_cohomology() == {
        "o": GradedGroups({0: Z}), "a": GradedGroups({}), "b": GradedGroups({})}
    sc = dualize(V, constant_sheaf(V)).stalk_cohomology()
    assert all(H == GradedGroups({-1: Z}) for H in sc.values())
    sc = dualize(A2, constant_sheaf(A2)).stalk_cohomology()
    assert sc["12"] == GradedGroups({-2: Z}) and sc["∅"] == GradedGroups({})


def test_gate_rejects_before_dualizing(E11):
    with pytest.raises(NotDualizable) as e:
        dualize(E11, constant_sheaf(E11))
    assert not e.value.report.is_locally_dualizable
    with pytest.raises(ValueError):
        dualize(ps.circle_poset(), constant_sheaf(ps.circle_poset()))


@pytest.mark.parametrize("X", LOCAL_DUALIZABLE, ids=lambda X: str(X.covers))
def test_reflexive_on_random_sheaves(X):
    rng = random.Random(7 * X.n)
    for kind in ("free", "torsion", "any"):
        F = random_sheaf(X, rng, kind)
        assert double_dual(X, F).stalk_cohomology() == stalk_cohomology(F)
        assert reflexivity_check(X, F)


def test_canonical_complex_kinds(V, A2):
    cc, _ = canonical_complex(A2)
    assert cc.kind == "generic-skyscraper"
    assert cc.phi.as_tuple(A2) == (2, 1, 1, 0)
    cc, _ = canonical_complex(V)
    assert cc.kind == "D0" and cc.phi.as_tuple(V) == (0, -1, -1)
    cc, rep = canonical_complex(ps.circle_poset())
    assert cc is None and rep.notes
