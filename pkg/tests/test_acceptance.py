"""Acceptance suite: one test per criterion, exact FgGroup equality throughout.

Each test records a PASS/FAIL line (printed in the terminal summary) and
checks its time budget.
"""
import random
import time
from contextlib import contextmanager

import pytest

from posetsheaves import poset as ps
from posetsheaves.cm import (baclawski_report, cm_barycentric_check, cm_product_check, cm_sheaf_criterion,
                             cm_sheaf_duality, is_cm_space, omega_sheaf)
from posetsheaves.cohomology import (ext_skyscrapers, ext_skyscrapers_generic, global_cohomology,
                                     local_cohomology, point_local_cohomology, reduced_homology)
from posetsheaves.duality import NotDualizable, double_dual, dualize, dualizing_model, is_locally_dualizable, \
    verify_local_duality
from posetsheaves.families import all_posets_up_to, local_posets_up_to, random_posets, random_sheaf
from posetsheaves.poset import _bits
from posetsheaves.sheaf import constant_sheaf, external_product, skyscraper, supported_constant
from posetsheaves.simplicial import (RP2_6, affine_space, four_cycle, from_facets, reisner_check, simplex,
                                     simplex_boundary, two_disjoint_edges)
from posetsheaves.zlinalg import FgGroup, GradedGroups, Z, kunneth

from conftest import ACCEPTANCE

Z2 = FgGroup(0, (2,))


@contextmanager
def criterion(n, budget):
    """Record PASS/FAIL and elapsed time; the body sets info['detail']."""
    info = {"detail": ""}
    t = time.perf_counter()
    ok = False
    try:
        yield info
        ok = True
    finally:
        secs = time.perf_counter() - t
        if ok and secs > budget:
            ok = False
            info["detail"] += " [over budget]"
        ACCEPTANCE[n] = (ok, secs, budget, info["detail"])
    assert secs <= budget, f"criterion {n} took {secs:.1f}s (budget {budget}s)"


@pytest.fixture(scope="module")
def family():
    """Exhaustive posets up to 5 elements plus 200 random ones on 6 or 7."""
    return all_posets_up_to(5) + random_posets(200, [6, 7], seed=2024)


def test_c01_skyscraper_ext(family):
    with criterion(1, 120) as info:
        pairs = 0
        for X in family:
            for x in range(X.n):
                for y in _bits(X.up[x] & ~(1 << x)):
                    a, b = X.labels[x], X.labels[y]
                    assert ext_skyscrapers(X, a, b) == ext_skyscrapers_generic(X, a, b), (X.covers, a, b)
                    pairs += 1
        info["detail"] = f"{len(family)} posets, {pairs} pairs x<y"


def test_c02_local_duality(family):
    with criterion(2, 300) as info:
        rng = random.Random(7)
        checks = generic = 0
        for k, X in enumerate(family):
            Y = X.down_closure(1 << rng.randrange(X.n) | 1 << rng.randrange(X.n))
            K = X.down_closure(1 << rng.randrange(X.n))
            sheaves = [constant_sheaf(X), supported_constant(X, K)] + [skyscraper(X, l) for l in X.labels]
            sheaves += [random_sheaf(X, rng, rng.choice(["free", "torsion", "any"]), max_rank=2)
                        for _ in range(50)]
            for j, F in enumerate(sheaves):
                assert verify_local_duality(X, Y, F), (X.covers, X.labels_of(Y), j)
                checks += 1
            # the generic Hom route on a slice of the family
            if k % 10 == 0:
                for F in sheaves[:3] + sheaves[-2:]:
                    assert verify_local_duality(X, Y, F, generic=True)
                    generic += 1
        info["detail"] = f"{checks} (poset, Y, F) checks, {generic} also via generic Hom"


def test_c03_dualizing_complex_of_affine_space():
    with criterion(3, 30) as info:
        for n in range(1, 5):
            X = affine_space(n)
            top = X.labels[X.maximal()[0]]
            sc = dualizing_model(X, "D0").stalk_cohomology()
            for x, H in sc.items():
                assert H == (GradedGroups({-n: Z}) if x == top else GradedGroups({})), (n, x, H)
        info["detail"] = "A^1..A^4: Z at the generic point in degree -n"


REISNER_FIXTURES = {"simplex3": simplex(3), "boundary3": simplex_boundary(4), "boundary2": simplex_boundary(3),
                    "four_cycle": four_cycle(), "rp2_6": RP2_6, "two_edges": two_disjoint_edges()}


def test_c04_reisner_equivalence():
    with criterion(4, 60) as info:
        verdicts = {}
        for name, facets in REISNER_FIXTURES.items():
            K, X, _ = from_facets(facets)
            ours, theirs = is_cm_space(X), reisner_check(K)
            assert ours.is_cm == theirs.is_cm, name
            verdicts[name] = ours.is_cm
        _, X, _ = from_facets(RP2_6)
        w = is_cm_space(X).witness
        assert w["point"] == "∅" and w["degree"] == 1 and FgGroup.from_dict(w["group"]) == Z2
        info["detail"] = ", ".join(f"{k}={'CM' if v else 'not CM'}" for k, v in verdicts.items())


def test_c05_baclawski_divergence():
    with criterion(5, 60) as info:
        _, X, _ = from_facets(RP2_6, projective=True)
        r = baclawski_report(X)
        assert r.ours and r.is_acm and not r.is_cm_baclawski
        assert (r.a, r.b, r.c, r.d) == (True, True, True, False)
        w = r.witnesses["d'"]
        assert w["degree"] == 1 and FgGroup.from_dict(w["group"]) == Z2
        info["detail"] = "projective RP2_6: ours CM, ACM, fails only (d') with H~_1 = Z/2"


def test_c06_barycentric():
    with criterion(6, 300) as info:
        fam = all_posets_up_to(5) + random_posets(100, range(1, 8), seed=6)
        applicable = 0
        for X in fam:
            assert reduced_homology(ps.barycentric(X)) == reduced_homology(X), X.covers
            c = cm_barycentric_check(X)
            if c.applicable:
                applicable += 1
                assert c.holds, (X.covers, c.verdicts)
        info["detail"] = f"{len(fam)} posets; biconditional on the {applicable} locally dualizable ones"


PRODUCT_FACTORS = {"point": ps.point(), "chain": ps.chain_poset(3), "V": ps.v_poset(),
                   "circle": ps.circle_poset(), "A1": affine_space(1), "A2": affine_space(2)}


def test_c07_products():
    with criterion(7, 180) as info:
        rng = random.Random(77)
        pairs = d0 = 0
        for a, X in PRODUCT_FACTORS.items():
            for b, Y in PRODUCT_FACTORS.items():
                P = ps.product(X, Y)
                for F, G in [(constant_sheaf(X), constant_sheaf(Y)),
                             (random_sheaf(X, rng, "any"), random_sheaf(Y, rng, "any"))]:
                    lhs = global_cohomology(P, external_product(F, G))
                    assert lhs == kunneth(global_cohomology(X, F), global_cohomology(Y, G)), (a, b)
                if len(X.minimal()) == 1 and len(Y.minimal()) == 1:
                    D = external_product(dualizing_model(X, "D0").to_sheaf_complex(),
                                         dualizing_model(Y, "D0").to_sheaf_complex())
                    assert D.stalk_cohomology() == dualizing_model(P, "D0").stalk_cohomology(), (a, b)
                    d0 += 1
                assert cm_product_check(X, Y).holds, (a, b)
                pairs += 1
        info["detail"] = f"{pairs} pairs; D0 product formula on the {d0} local pairs"


def test_c08_reflexivity_on_generators():
    with criterion(8, 120) as info:
        count = 0
        for X in local_posets_up_to(6):
            if not is_locally_dualizable(X):
                continue
            for x in X.labels:
                Zx = skyscraper(X, x)
                sc = double_dual(X, Zx).stalk_cohomology()
                assert sc == {y: GradedGroups({0: Z}) if y == x else GradedGroups({}) for y in X.labels}
            count += 1
        E11 = ps.e11_poset()
        with pytest.raises(NotDualizable):
            dualize(E11, skyscraper(E11, "o"))
        info["detail"] = f"{count} locally dualizable local posets; E11 rejected by the gate"


CM_FIXTURES = {"point": ps.point(), "V": ps.v_poset(), "A1": affine_space(1), "A2": affine_space(2),
               "A3": affine_space(3), "cone(boundary2)": from_facets(simplex_boundary(3))[1],
               "cone(four_cycle)": from_facets(four_cycle())[1]}


def test_c09_canonical_sheaf_contracts():
    with criterion(9, 60) as info:
        for name, X in CM_FIXTURES.items():
            assert is_cm_space(X).is_cm, name
            w = omega_sheaf(X)
            for x in X.labels:
                H = point_local_cohomology(X, x, w)
                assert H == GradedGroups({X.dim_up(x): Z}), (name, x, H)
        A3 = affine_space(3)
        K = from_facets(simplex_boundary(3))[1].labels
        assert local_cohomology(A3, K, omega_sheaf(A3)) == GradedGroups({1: Z})
        info["detail"] = f"{len(CM_FIXTURES)} CM fixtures; Gysin on (A3, boundary2) is Z in degree 1"


def test_c10_cm_sheaf_two_paths():
    with criterion(10, 300) as info:
        spaces = [X for X in local_posets_up_to(6) if is_cm_space(X).is_cm]
        rng = random.Random(10)
        applicable = cm = 0
        for k in range(100):
            X = spaces[k % len(spaces)]
            F = random_sheaf(X, rng, rng.choice(["free", "torsion", "any"]))
            d = cm_sheaf_duality(X, F)
            c = cm_sheaf_criterion(X, F)
            if c is None:
                continue
            applicable += 1
            cm += d.is_cm
            assert c.is_cm == d.is_cm, (X.covers, F)
            if d.is_cm and d.shift is not None:
                assert c.shift == d.shift
        info["detail"] = f"{len(spaces)} CM local posets; {applicable}/100 sheaves in scope, {cm} CM, all agree"


if __name__ == "__main__":
    raise SystemExit(pytest.main([__file__, "-q"]))
