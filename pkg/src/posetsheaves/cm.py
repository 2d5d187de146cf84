"""Cohen-Macaulay sheaves and spaces.

A sheaf F on a local, locally dualizable space is CM when D(F) has
cohomology in a single degree, D(F) = F^#[r].  Two independent routes are
implemented: dualizing and reading off the cohomology, or the local
cohomology criterion at every point (available when F is generically torsion
free, or torsion).  Spaces are tested through reduced homology of the
punctured open stars U_x^*, after a dualizability gate.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any

from . import poset as ps
from .cohomology import (global_cohomology, local_cohomology, point_local_cohomology,
                         reduced_homology_mask, rhom_global, rhom_sheaf)
from .duality import (DualizabilityReport, dualize, dualizing_model, require_dualizable_local,
                      sphere_report)
from .poset import FinPoset, _bits, as_mask
from .sheaf import (PresentedSheaf, Sheaf, SheafComplex, as_complex, constant_sheaf, restrict,
                    supported_constant)
from .zlinalg import FgGroup, GradedGroups, fg_group_dual


class NotCohenMacaulay(ValueError):
    pass


def _stalk_groups(F) -> dict[str, FgGroup]:
    if isinstance(F, Sheaf):
        return {x: FgGroup.free(r) for x, r in zip(F.X.labels, F.ranks)}
    if isinstance(F, PresentedSheaf):
        return F.stalks()
    K = as_complex(F)
    out = {}
    for x, H in K.stalk_cohomology().items():
        if any(d != 0 for d in H.degrees()):
            raise ValueError("expected a sheaf, got a complex with cohomology outside degree 0")
        out[x] = H[0]
    return out


def _mask(X: FinPoset, stalks: dict[str, FgGroup]) -> int:
    return X.mask_of([x for x, g in stalks.items() if not g.is_zero()])


def _witness(X: FinPoset, i: int, degree: int, group: FgGroup, kind: str) -> dict:
    return {"point": X.labels[i], "degree": degree, "group": group.to_dict(), "kind": kind}


# ---------------------------------------------------------------------------
# support, dimension and depth

@dataclass
class SupportReport:
    supp: list[str]
    d_supp: list[str]
    closure: list[str]
    dim: int
    is_pure: bool
    depth_at: dict[str, int]
    depth: int | None

    def to_json(self) -> dict:
        return {"supp": self.supp, "d_supp": self.d_supp, "closure": self.closure, "dim": self.dim,
                "pure": self.is_pure, "depth_at": self.depth_at, "depth": self.depth}


def support_report(X: FinPoset, F) -> SupportReport:
    stalks = _stalk_groups(F)
    sm = _mask(X, stalks)
    depth_at = {}
    for i in range(X.n):
        H = point_local_cohomology(X, X.labels[i], F)
        if not H.is_zero():
            depth_at[X.labels[i]] = H.degrees()[0]
    closure = X.down_closure(sm)
    depth = min((k + X.dim_down(x) for x, k in depth_at.items()), default=None)
    return SupportReport(
        supp=X.labels_of(sm), d_supp=[x for x in X.labels if x in depth_at],
        closure=X.labels_of(closure), dim=X.dim_of_mask(closure),
        is_pure=ps.is_pure(X, closure), depth_at=depth_at, depth=depth)


def local_dim(X: FinPoset, smask: int, i: int) -> int:
    """d_x = dim(F|U_x): dimension of the closure of supp(F) ∩ U_x inside U_x."""
    u = X.up[i]
    return X.dim_of_mask(X.down_closure(smask & u) & u)


# ---------------------------------------------------------------------------
# CM sheaves

@dataclass
class CmVerdict:
    is_cm: bool
    shift: int | None
    dual_sheaf: PresentedSheaf | None
    witness: dict | None
    path: str
    criterion: "CmVerdict | None" = None

    def to_json(self) -> dict:
        out: dict[str, Any] = {"cm": self.is_cm, "path": self.path}
        if self.is_cm:
            out["shift"] = self.shift
            if self.dual_sheaf is not None:
                out["dual_stalks"] = {x: g.to_dict() for x, g in self.dual_sheaf.stalks().items()}
        else:
            out["witness"] = self.witness
        if self.criterion is not None:
            out["criterion"] = {"path": self.criterion.path, "cm": self.criterion.is_cm}
        return out


def generic_type(X: FinPoset, F) -> tuple[str, dict | None]:
    """'free' (generically torsion free), 'torsion', 'zero', or 'other' / 'mixed' with a witness."""
    stalks = _stalk_groups(F)
    sm = _mask(X, stalks)
    if not sm:
        return "zero", None
    if all(g.rank == 0 for g in stalks.values()):
        return "torsion", None
    kinds = set()
    for g in X.maximal(sm):
        G = stalks[X.labels[g]]
        if G.rank and G.torsion:
            return "mixed", _witness(X, g, 0, G, "mixed-generic-stalk")
        kinds.add("free" if G.rank else "torsion")
    return ("free", None) if kinds == {"free"} else ("other", None)


def cm_sheaf_duality(X: FinPoset, F) -> CmVerdict:
    """Dualize and test that the cohomology sits in one degree."""
    require_dualizable_local(X)
    D = dualize(X, F)
    sc = D.stalk_cohomology()
    degs = sorted({d for H in sc.values() for d in H.degrees()})
    if not degs:
        return CmVerdict(True, None, None, None, "duality")
    if len(degs) == 1:
        return CmVerdict(True, -degs[0], D.cohomology_sheaf(degs[0]), None, "duality")
    # expected degree: the lowest one at a generic point of largest closure
    stalks = _stalk_groups(F)
    sm = _mask(X, stalks)
    g = max(X.maximal(sm), key=lambda i: (X.dim_down(X.labels[i]), -i))
    main = sc[X.labels[g]].degrees()[0]
    for i, x in enumerate(X.labels):
        for d, G in sc[x].items():
            if d != main:
                return CmVerdict(False, None, None, _witness(X, i, d, G, "dual-cohomology"), "duality")
    raise AssertionError("unreachable")


def cm_sheaf_criterion(X: FinPoset, F) -> CmVerdict | None:
    """Purity plus pointwise local cohomology; None when the criterion does not apply."""
    require_dualizable_local(X)
    kind, _ = generic_type(X, F)
    if kind not in ("free", "torsion"):
        return None
    path = f"{kind}-criterion"
    stalks = _stalk_groups(F)
    sm = _mask(X, stalks)
    closure = X.down_closure(sm)
    if not ps.is_pure(X, closure):
        w = {"point": None, "degree": None, "group": None, "kind": "support-not-pure"}
        return CmVerdict(False, None, None, w, path)
    for i in range(X.n):
        dx = local_dim(X, sm, i)
        H = point_local_cohomology(X, X.labels[i], F)
        for d, G in H.items():
            if d != dx:
                return CmVerdict(False, None, None, _witness(X, i, d, G, "local-cohomology"), path)
            if kind == "free" and G.torsion:
                return CmVerdict(False, None, None, _witness(X, i, d, G, "torsion-in-top-local-cohomology"), path)
    dim = X.dim_of_mask(closure)
    return CmVerdict(True, dim if kind == "free" else dim - 1, None, None, path)


def is_cm_sheaf(X: FinPoset, F, path: str = "both") -> CmVerdict:
    """CM test for a sheaf (free stalks or a presentation) on a local dualizable space.

    ``path`` is 'duality', 'criterion' or 'both'; with 'both' the two
    verdicts (and shifts) must agree.
    """
    require_dualizable_local(X)
    kind, mixed = generic_type(X, F)
    if path == "criterion":
        v = cm_sheaf_criterion(X, F)
        if v is None:
            raise ValueError(f"criterion path does not apply to a sheaf of generic type {kind!r}")
        return v
    v = cm_sheaf_duality(X, F)
    if mixed is not None:
        if v.is_cm:
            raise AssertionError("duality path accepted a sheaf with a mixed generic stalk")
        return CmVerdict(False, None, None, mixed, "duality")
    if path == "both":
        c = cm_sheaf_criterion(X, F)
        if c is not None:
            if c.is_cm != v.is_cm or (v.is_cm and c.shift != v.shift):
                raise AssertionError(f"CM paths disagree: duality {v.is_cm} (r={v.shift}), "
                                     f"{c.path} {c.is_cm} (r={c.shift})")
            v.criterion = c
    return v


# ---------------------------------------------------------------------------
# CM spaces

@dataclass
class PointReport:
    dim: int
    homology: GradedGroups
    ok: bool


@dataclass
class CmSpaceVerdict:
    is_cm: bool
    homologically_cm: bool
    gate: DualizabilityReport
    points: dict[str, PointReport]
    witness: dict | None
    components: list[dict] = field(default_factory=list)

    def reason(self) -> str:
        if self.is_cm:
            return "ok"
        if self.witness:
            w = self.witness
            return (f"reduced homology of U_{w['point']}^* is {FgGroup.from_dict(w['group'])} "
                    f"in degree {w['degree']}, below dimension {w['dim']}")
        return "not dualizable: " + self.gate.reason()

    def to_json(self) -> dict:
        out: dict[str, Any] = {"cm": self.is_cm, "homologically_cm": self.homologically_cm,
                               "locally_dualizable": self.gate.is_locally_dualizable,
                               "reason": self.reason()}
        if self.witness:
            out["witness"] = {k: self.witness[k] for k in ("point", "degree", "group")}
        if not self.gate.is_locally_dualizable:
            out["gate"] = self.gate.to_json()
        if len(self.components) > 1:
            out["components"] = self.components
        return out


def is_cm_space(X: FinPoset) -> CmSpaceVerdict:
    """Dualizability gate plus H̃_i(U_x^*) = 0 for i != dim U_x^* at every x.

    For a non-local space this is the same as asking every U_x to be a CM
    local space, since both conditions only look at intervals and at U_y^*.
    """
    key = ("cm-space",)
    if key in X._cache:
        return X._cache[key]
    gate = sphere_report(X)
    pts = {}
    witness = None
    for i, x in enumerate(X.labels):
        m = X.up[i] & ~(1 << i)
        H = reduced_homology_mask(X, m)
        dm = X.dim_of_mask(m)
        bad = [(d, G) for d, G in H.items() if d != dm]
        pts[x] = PointReport(dm, H, not bad)
        if bad and witness is None:
            witness = {**_witness(X, i, bad[0][0], bad[0][1], "punctured-star-homology"), "dim": dm}
    homo = witness is None
    comps = []
    for cm_ in ps.connected_components(X):
        labs = X.labels_of(cm_)
        comps.append({"elements": labs, "dim": X.dim_of_mask(cm_),
                      "homologically_cm": all(pts[l].ok for l in labs)})
    v = CmSpaceVerdict(homo and gate.is_locally_dualizable, homo, gate, pts, witness, comps)
    X._cache[key] = v
    return v


def canonical_sheaf(X: FinPoset, verify: bool = True) -> PresentedSheaf:
    """ω_X: the cohomology of the D0 model in degree -dim X."""
    if len(X.minimal()) != 1:
        raise ValueError("canonical sheaf is extracted on local spaces")
    v = is_cm_space(X)
    if not v.is_cm:
        raise NotCohenMacaulay(f"space is not Cohen-Macaulay: {v.reason()}")
    M = dualizing_model(X, "D0").complex
    n = X.dim
    w = M.cohomology_sheaf(-n)
    if verify:
        Z = constant_sheaf(X)
        for i, x in enumerate(X.labels):
            H = point_local_cohomology(X, x, Z)
            top = fg_group_dual(H[X.dim_up(x)])[0]
            if w.stalk(x) != top:
                raise RuntimeError(f"ω stalk at {x} is {w.stalk(x)}, expected {top}")
    return w


def omega_sheaf(X: FinPoset) -> Sheaf:
    return canonical_sheaf(X).to_free_sheaf()


# ---------------------------------------------------------------------------
# closed subsets

@dataclass
class ClosedCmVerdict:
    is_cm: bool
    sheaf_verdict: CmVerdict
    space_verdict: CmSpaceVerdict
    codim: int
    ext_degrees: list[int] | None = None
    ext_concentrated: bool | None = None
    omega_matches: bool | None = None
    ext_stalks: dict[str, FgGroup] | None = None

    def to_json(self) -> dict:
        out: dict[str, Any] = {"cm": self.is_cm, "codim": self.codim,
                               "sheaf": self.sheaf_verdict.to_json(),
                               "space": self.space_verdict.to_json()}
        if self.ext_degrees is not None:
            out["ext_degrees"] = self.ext_degrees
            out["ext_concentrated"] = self.ext_concentrated
        if self.omega_matches is not None:
            out["omega_matches_ext"] = self.omega_matches
        if self.ext_stalks is not None:
            out["ext_stalks"] = {x: g.to_dict() for x, g in self.ext_stalks.items()}
        return out


def is_cm_closed(X: FinPoset, K) -> ClosedCmVerdict:
    km = as_mask(X, K)
    if not km or not X.is_down_closed(km):
        raise ValueError("K must be a nonempty closed subset")
    require_dualizable_local(X)
    ZK = supported_constant(X, km)
    sv = is_cm_sheaf(X, ZK)
    KP = X.induced(km)
    kv = is_cm_space(KP)
    if sv.is_cm != kv.is_cm:
        raise AssertionError("Z_K CM verdict disagrees with the CM verdict of K")
    c = X.dim - KP.dim
    out = ClosedCmVerdict(sv.is_cm, sv, kv, c)
    if is_cm_space(X).is_cm:
        w = omega_sheaf(X)
        E = rhom_sheaf(ZK, w)
        sc = E.stalk_cohomology()
        degs = sorted({d for H in sc.values() for d in H.degrees()})
        out.ext_degrees = degs
        out.ext_concentrated = degs in ([], [c])
        if out.ext_concentrated != sv.is_cm:
            raise AssertionError("Ext concentration disagrees with the CM verdict of Z_K")
        out.ext_stalks = {x: sc[x][c] for x in X.labels}
        if kv.is_cm:
            wK = canonical_sheaf(KP).stalks()
            out.omega_matches = all(out.ext_stalks[x] == wK.get(x, FgGroup(0)) for x in X.labels)
    return out


# ---------------------------------------------------------------------------
# duality sequences for ω

@dataclass
class SequenceCheck:
    name: str
    lhs: GradedGroups
    rhs: GradedGroups
    ok: bool
    detail: str = ""

    def to_json(self) -> dict:
        return {"name": self.name, "lhs": self.lhs.to_json(), "rhs": self.rhs.to_json(),
                "ok": self.ok, "detail": self.detail}


@dataclass
class OmegaReport:
    checks: list[SequenceCheck]
    skipped: list[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return all(c.ok for c in self.checks)

    def to_json(self) -> dict:
        return {"ok": self.ok, "checks": [c.to_json() for c in self.checks], "skipped": self.skipped}


def _ses_terms(H0: GradedGroups, E: GradedGroups, n: int, i: int) -> tuple[FgGroup, FgGroup, FgGroup]:
    """(Ext^1(H^{n+1-i}_0, Z), Ext^i(F, ω), Hom(H^{n-i}_0, Z))."""
    return fg_group_dual(H0[n + 1 - i])[1], E[i], fg_group_dual(H0[n - i])[0]


def omega_duality_sequences(X: FinPoset, F=None, K=None) -> OmegaReport:
    if len(X.minimal()) != 1:
        raise ValueError("X must be local")
    n = X.dim
    w = omega_sheaf(X)
    F = constant_sheaf(X) if F is None else F
    zero = X.labels[X.minimal()[0]]
    checks = []
    skipped = []

    # (A) Ext^i(F, ω) against local cohomology at the closed point
    E = rhom_global(F, w)
    H0 = point_local_cohomology(X, zero, F)
    lo = min(E.degrees() + [n - d for d in H0.degrees()] + [0]) - 1
    hi = max(E.degrees() + [n + 1 - d for d in H0.degrees()] + [0]) + 1
    bad = []
    for i in range(lo, hi + 1):
        a, b, c = _ses_terms(H0, E, n, i)
        if b.rank != c.rank or b.torsion != a.torsion:
            bad.append(i)
    checks.append(SequenceCheck("A", E, H0.dual().shift(-n), not bad and E == H0.dual().shift(-n),
                                f"failing degrees {bad}" if bad else ""))
    checks.append(SequenceCheck("A-reverse", H0, E.shift(n).dual(), H0 == E.shift(n).dual()))

    # (B) ω restricted to X* is the global dualizing complex of X* up to shift n-1
    star = X.full & ~(1 << X.minimal()[0])
    if star:
        XS = X.induced(star)
        wS = restrict(w, star)
        G = dualizing_model(XS, "global").stalk_cohomology()
        expect = {x: GradedGroups({1 - n: FgGroup.free(r)}) for x, r in zip(XS.labels, wS.ranks)}
        okm = all(G[x] == expect[x] for x in XS.labels)
        checks.append(SequenceCheck("B-model", GradedGroups(), GradedGroups(), okm,
                                    "" if okm else "global model of X* differs from ω|X*[n-1]"))
        FS = restrict(as_complex(F), star)
        lhs = rhom_global(FS, wS)
        rhs = global_cohomology(XS, FS).dual().shift(1 - n)
        checks.append(SequenceCheck("B", lhs, rhs, lhs == rhs))
    else:
        skipped.append("B: X* is empty")

    # (C) Gysin along a CM closed subset
    if K is not None:
        km = as_mask(X, K)
        KP = X.induced(km)
        if not X.is_down_closed(km) or not is_cm_space(KP).is_cm:
            raise ValueError("K must be a CM closed subset")
        d = n - KP.dim
        wK = omega_sheaf(KP)
        lhs = local_cohomology(X, km, w)
        top = point_local_cohomology(KP, zero, constant_sheaf(KP))[KP.dim]
        formula = GradedGroups({d: fg_group_dual(top)[0]})
        checks.append(SequenceCheck("C-concentration", lhs, formula, lhs == formula))
        direct = global_cohomology(KP, wK).shift(-d)
        checks.append(SequenceCheck("C", lhs, direct, lhs == direct))
        kstar = km & star
        if kstar:
            XS = X.induced(star)
            KS = XS.mask_of(X.labels_of(kstar))
            wS = restrict(w, star)
            lhs = local_cohomology(XS, KS, wS)
            wKS = restrict(wK, KP.mask_of(X.labels_of(kstar)))
            direct = global_cohomology(wKS.X, wKS).shift(-d)
            checks.append(SequenceCheck("C-punctured", lhs, direct, lhs == direct))
            if d != n - 1:
                KSP = X.induced(kstar)
                Hk = global_cohomology(KSP, constant_sheaf(KSP))[n - d - 1]
                formula = GradedGroups({d: fg_group_dual(Hk)[0]}) + GradedGroups({n - 1: FgGroup(1)})
                checks.append(SequenceCheck("C-punctured-formula", lhs, formula, lhs == formula))
            else:
                skipped.append("C-punctured-formula: codimension n-1")
        else:
            skipped.append("C-punctured: K* is empty")
    return OmegaReport(checks, skipped)


# ---------------------------------------------------------------------------
# Baclawski comparison

def _bouquet_failure(P: FinPoset, mask: int) -> tuple[int, FgGroup] | None:
    H = reduced_homology_mask(P, mask)
    dm = P.dim_of_mask(mask)
    for d, G in H.items():
        if d < dm:
            return d, G
    return None


@dataclass
class BaclawskiReport:
    a: bool
    b: bool
    c: bool
    d: bool
    witnesses: dict[str, dict]
    is_cm_baclawski: bool
    is_acm: bool
    ours: bool

    def to_json(self) -> dict:
        return {"a'": self.a, "b'": self.b, "c'": self.c, "d'": self.d,
                "baclawski_cm": self.is_cm_baclawski, "acm": self.is_acm, "ours": self.ours,
                "witnesses": self.witnesses}


def baclawski_report(X: FinPoset) -> BaclawskiReport:
    """Bouquet test on every open interval of X with a bottom and top adjoined."""
    bot, top = "0^", "1^"
    while bot in X.labels or top in X.labels:
        bot, top = bot + "^", top + "^"
    P = ps.adjoin_bottom_top(X, bot, top)
    b0, t0 = P.idx(bot), P.idx(top)
    flags = {"a'": True, "b'": True, "c'": True, "d'": True}
    wit: dict[str, dict] = {}
    for x in range(P.n):
        for y in _bits(P.up[x] & ~(1 << x)):
            m = P.up[x] & P.down[y] & ~(1 << x) & ~(1 << y)
            if x == b0 and y == t0:
                key = "d'"
            elif x == b0:
                key = "c'"
            elif y == t0:
                key = "b'"
            else:
                key = "a'"
            f = _bouquet_failure(P, m)
            if f is not None:
                flags[key] = False
                if key not in wit:
                    wit[key] = {"interval": [P.labels[x], P.labels[y]], "degree": f[0],
                                "group": f[1].to_dict()}
    a, b, c, d = flags["a'"], flags["b'"], flags["c'"], flags["d'"]
    return BaclawskiReport(a, b, c, d, wit, a and b and c and d, a and b and c, is_cm_space(X).is_cm)


# ---------------------------------------------------------------------------
# products and barycentric subdivision

@dataclass
class TheoremCheck:
    name: str
    verdicts: dict[str, bool]
    applicable: bool
    holds: bool
    homological_holds: bool | None = None

    def to_json(self) -> dict:
        out = {"name": self.name, "verdicts": self.verdicts, "applicable": self.applicable,
               "holds": self.holds}
        if self.homological_holds is not None:
            out["homological_holds"] = self.homological_holds
        return out


def cm_product_check(X: FinPoset, Y: FinPoset) -> TheoremCheck:
    vx, vy = is_cm_space(X), is_cm_space(Y)
    vxy = is_cm_space(ps.product(X, Y))
    app = vx.gate.is_locally_dualizable and vy.gate.is_locally_dualizable
    return TheoremCheck("product", {"X": vx.is_cm, "Y": vy.is_cm, "XxY": vxy.is_cm}, app,
                        vxy.is_cm == (vx.is_cm and vy.is_cm))


def cm_barycentric_check(X: FinPoset) -> TheoremCheck:
    """[βX CM] against [X CM and X^op CM]; the theorem assumes X locally dualizable."""
    vb = is_cm_space(ps.barycentric(X))
    vx = is_cm_space(X)
    vo = is_cm_space(ps.opposite(X))
    return TheoremCheck("barycentric", {"bX": vb.is_cm, "X": vx.is_cm, "Xop": vo.is_cm},
                        vx.gate.is_locally_dualizable, vb.is_cm == (vx.is_cm and vo.is_cm),
                        vb.homologically_cm == (vx.homologically_cm and vo.homologically_cm))
