import json
import random

import pytest
from hypothesis import given

from posetsheaves import poset as ps
from posetsheaves.cohomology import reduced_homology, reduced_homology_mask
from posetsheaves.poset import FinPoset
from posetsheaves.simplicial import affine_space, projective_space

from conftest import posets


def closure_pairs(X):
    """Transitive closure of the cover relation by plain iteration."""
    rel = {(a, b) for a, b in X.covers}
    while True:
        new = {(a, d) for a, b in rel for c, d in rel if b == c} - rel
        if not new:
            return rel
        rel |= new


def longest_chain(X, within):
    best = -1

    def rec(last, length):
        nonlocal best
        best = max(best, length)
        for y in within:
            if X.lt(last, y):
                rec(y, length + 1)

    for x in within:
        rec(x, 0)
    return best


def test_construction_sorts_and_reduces():
    X = FinPoset(["c", "b", "a"], [("a", "b"), ("b", "c"), ("a", "c")])
    assert X.labels == ("a", "b", "c")
    assert X.covers == [("a", "b"), ("b", "c")]
    assert X.leq("a", "c") and not X.leq("c", "a")


@pytest.mark.parametrize("rel", [[("a", "a")], [("a", "b"), ("b", "a")], [("a", "zz")]])
def test_construction_errors(rel):
    with pytest.raises(ValueError):
        FinPoset(["a", "b"], rel)


def test_duplicate_labels_rejected():
    with pytest.raises(ValueError):
        FinPoset(["a", "a"])


@given(posets())
def test_order_matches_closure_of_covers(X):
    rel = closure_pairs(X)
    for a in X.labels:
        for b in X.labels:
            assert X.lt(a, b) == ((a, b) in rel)
    # linear extension
    for a, b in rel:
        assert X.idx(a) < X.idx(b)


@given(posets())
def test_dimensions_against_chain_search(X):
    assert X.dim == longest_chain(X, X.labels)
    for x in X.labels:
        assert X.dim_down(x) == longest_chain(X, [y for y in X.labels if X.leq(y, x)])
        assert X.dim_up(x) == longest_chain(X, [y for y in X.labels if X.leq(x, y)])


@given(posets())
def test_text_and_json_round_trip(X):
    assert ps.from_text(ps.to_text(X)) == X
    assert ps.from_json(json.loads(json.dumps(ps.to_json(X)))) == X


def test_text_format_chains_and_comments():
    X = ps.from_text("# a comment\no < a < t\no < b < t\nlonely\n")
    assert X.n == 5 and X.lt("o", "t") and "lonely" in X


def test_structure_reports():
    r = ps.structure_report(ps.point())
    assert (r.dim, r.is_local, r.is_irreducible) == (0, True, True)
    r = ps.structure_report(ps.v_poset())
    assert (r.dim, r.is_local, r.is_irreducible, r.closed_points, r.generic_points) == (1, True, False, ["o"], ["a", "b"])
    r = ps.structure_report(ps.p5_poset())
    assert not r.is_catenary
    r = ps.structure_report(FinPoset([]))
    assert r.dim == -1 and not r.is_local


def test_subspaces_and_intervals(V, A2):
    U = ps.up_set(A2, "1")
    assert U.is_open and not U.is_closed and U.elements == ["1", "12"]
    C = ps.down_set(A2, "1")
    assert C.is_closed and C.elements == ["∅", "1"]
    assert ps.SubSpace.of(A2, ["1"]).is_locally_closed
    assert not ps.SubSpace.of(A2, ["∅", "12"]).is_locally_closed
    assert ps.open_interval(A2, "∅", "12").labels == ("1", "2")
    assert ps.punctured_up(V, "o").labels == ("a", "b")
    with pytest.raises(ValueError):
        ps.interval_mask(V, "a", "b")


def test_codimension_functions(A2, V):
    assert ps.codimension_function(A2).as_tuple(A2) == (2, 1, 1, 0)
    assert ps.codimension_function(A2, preset="irreducible").as_tuple(A2) == (2, 1, 1, 0)
    assert ps.codimension_function(A2, preset="local").as_tuple(A2) == (0, -1, -1, -2)
    assert ps.codimension_function(V, anchors={"o": 5}).as_tuple(V) == (5, 4, 4)
    assert ps.codimension_function(ps.p5_poset()) is None


@given(posets(max_size=5))
def test_codimension_functions_exist_iff_cover_graded(X):
    phi = ps.codimension_function(X)
    if phi is not None:
        assert phi.is_valid_on(X)


def test_named_constructions():
    assert len(affine_space(3)) == 8 and len(projective_space(3)) == 7
    A1 = affine_space(1)
    assert ps.is_isomorphic(A1, ps.chain_poset(2))
    P = ps.product(A1, A1)
    assert ps.is_isomorphic(P, affine_space(2))
    assert len(ps.barycentric(ps.v_poset())) == 5
    assert ps.is_isomorphic(ps.opposite(ps.opposite(ps.v_poset())), ps.v_poset())
    Xh = ps.adjoin_bottom_top(ps.v_poset())
    assert Xh.n == 5 and len(Xh.minimal()) == 1 and len(Xh.maximal()) == 1


@given(posets(max_size=5))
def test_isomorphism_invariance_under_relabelling(X):
    rng = random.Random(X.n)
    perm = list(X.labels)
    rng.shuffle(perm)
    ren = dict(zip(X.labels, [f"p{l}" for l in perm]))
    Y = FinPoset([ren[l] for l in reversed(X.labels)], [(ren[a], ren[b]) for a, b in X.covers])
    f = ps.find_isomorphism(X, Y)
    assert f is not None
    for a in X.labels:
        for b in X.labels:
            assert X.leq(a, b) == Y.leq(f[a], f[b])


@given(posets(max_size=6))
def test_core_reduction_preserves_reduced_homology(X):
    assert reduced_homology(X, reduce=True) == reduced_homology(X, reduce=False)
    for x in range(X.n):
        m = X.up[x] & ~(1 << x)
        assert reduced_homology_mask(X, m) == reduced_homology_mask(X, m, reduce=False)


@given(posets(max_size=5))
def test_opposite_and_barycentric_preserve_homology(X):
    H = reduced_homology(X)
    assert reduced_homology(ps.opposite(X)) == H
    assert reduced_homology(ps.barycentric(X)) == H


def test_connected_components():
    X = FinPoset(["a", "b", "c", "d"], [("a", "b")])
    comps = ps.connected_components(X)
    assert sorted(len(X.labels_of(c)) for c in comps) == [1, 1, 2]
