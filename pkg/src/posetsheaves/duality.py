"""Dualizing complexes, canonical complexes and the duality functor.

The local dualizing complex along a closed set Y is modelled by

    K^{-p} = sum over chains x_0 < ... < x_p with x_0 in Y of Z_{C_{x_p}}

with differential the alternating sum of faces.  The face dropping ``x_p``
is the surjection ``Z_{C_{x_p}} -> Z_{C_{x_{p-1}}}``; faces that would move
``x_0`` out of Y are omitted.  Y = X gives the global model, Y = {0} the
local one of a space with closed point 0.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any

from . import poset as ps
from .cohomology import (ClosedSupportComplex, hom_complex, hom_into_closed, local_cohomology,
                         reduced_homology_mask)
from .poset import CodimFunction, FinPoset, _bits, as_mask
from .sheaf import (Sheaf, SheafComplex, as_complex, extend_by_zero, skyscraper,
                    stalk_cohomology, supported_constant)
from .zlinalg import FgGroup, GradedGroups, SparseMatrix, homology_of


class NotDualizable(ValueError):
    def __init__(self, report: "DualizabilityReport", msg: str = ""):
        super().__init__(msg or f"space is not dualizable: {report.reason()}")
        self.report = report


@dataclass
class DualizingModel:
    complex: ClosedSupportComplex
    kind: str
    X: FinPoset
    Y: list[str]

    def stalk_cohomology(self) -> dict[str, GradedGroups]:
        return self.complex.stalk_cohomology()

    def to_sheaf_complex(self) -> SheafComplex:
        return self.complex.to_sheaf_complex()

    def to_json(self) -> dict:
        K = self.complex
        X = self.X
        out = {"kind": self.kind, "support": self.Y, "poset": ps.to_json(X), "terms": {}}
        for n in K.degrees():
            out["terms"][str(n)] = [
                {"chain": [X.labels[i] for i in K.tags[n][k]], "support": X.labels[s]}
                for k, s in enumerate(K.gens[n])]
        out["differentials"] = {str(n): [[h, g, v] for h, row in enumerate(M.rows) for g, v in sorted(row.items())]
                                for n, M in sorted(K.diffs.items())}
        return out


def _model(X: FinPoset, ymask: int) -> ClosedSupportComplex:
    chs = [c for c in X.chain_masks() if ymask >> c[0] & 1]
    by_deg: dict[int, list[tuple[int, ...]]] = {}
    for c in chs:
        by_deg.setdefault(-(len(c) - 1), []).append(c)
    index = {n: {c: k for k, c in enumerate(v)} for n, v in by_deg.items()}
    gens = {n: [c[-1] for c in v] for n, v in by_deg.items()}
    diffs = {}
    for n, lst in by_deg.items():
        if n == 0:
            continue
        tgt = index[n + 1]
        ent = []
        for k, c in enumerate(lst):
            for i in range(len(c)):
                face = c[:i] + c[i + 1:]
                j = tgt.get(face)
                if j is not None:
                    ent.append((j, k, -1 if i % 2 else 1))
        diffs[n] = SparseMatrix.from_entries(len(by_deg[n + 1]), len(lst), ent)
    return ClosedSupportComplex(X, gens, diffs, by_deg)


def dualizing_model(X: FinPoset, kind: str = "D0", Y=None) -> DualizingModel:
    """kind: 'global', 'local' (along a closed Y) or 'D0' (local along the closed point)."""
    if kind == "global":
        ymask = X.full
    elif kind == "local":
        if Y is None:
            raise ValueError("local kind needs a closed set Y")
        ymask = as_mask(X, Y)
        if not X.is_down_closed(ymask):
            raise ValueError("Y must be closed")
    elif kind in ("D0", "d0", "0"):
        mins = X.minimal()
        if len(mins) != 1:
            raise ValueError("D0 needs a local space (unique closed point)")
        ymask = 1 << mins[0]
        kind = "D0"
    else:
        raise ValueError(f"unknown kind {kind!r}")
    key = ("model", ymask)
    K = X._cache.get(key)
    if K is None:
        K = _model(X, ymask)
        X._cache[key] = K
    return DualizingModel(K, kind, X, X.labels_of(ymask))


def rhom_into_model(F, M: DualizingModel) -> ClosedSupportComplex:
    return hom_into_closed(F, M.complex)


def verify_local_duality(X: FinPoset, Y, F, generic: bool = False) -> bool:
    """RHom(F, K_Y) against the dual of RΓ_Y(X, F), degree by degree."""
    M = dualizing_model(X, "local", Y)
    if generic:
        lhs = homology_of(hom_complex(F, M.to_sheaf_complex()).global_sections())
    else:
        lhs = homology_of(hom_into_closed(F, M.complex).global_sections())
    rhs = local_cohomology(X, Y, F).dual()
    return lhs == rhs


# ---------------------------------------------------------------------------
# spheres and dualizability

@dataclass
class DualizabilityReport:
    is_catenary: bool
    catenary_witness: tuple[str, str] | None
    intervals_checked: int
    non_spheres: list[tuple[str, str, GradedGroups]]
    is_locally_dualizable: bool
    is_local: bool
    is_irreducible: bool
    canonical_kind: str | None = None
    phi: CodimFunction | None = None
    notes: list[str] = field(default_factory=list)

    def reason(self) -> str:
        if not self.is_catenary:
            return f"not catenary: interval [{self.catenary_witness[0]}, {self.catenary_witness[1]}]"
        if self.non_spheres:
            x, y, H = self.non_spheres[0]
            return f"interval ({x}, {y}) is not a homological sphere: reduced homology {H}"
        return "ok"

    def to_json(self) -> dict:
        out: dict[str, Any] = {
            "catenary": self.is_catenary,
            "intervals_checked": self.intervals_checked,
            "non_spheres": [{"interval": [x, y], "reduced_homology": H.to_json()} for x, y, H in self.non_spheres],
            "locally_dualizable": self.is_locally_dualizable,
            "local": self.is_local,
            "irreducible": self.is_irreducible,
        }
        if self.catenary_witness:
            out["catenary_witness"] = list(self.catenary_witness)
        if self.canonical_kind:
            out["canonical"] = {"kind": self.canonical_kind,
                                "phi": dict(self.phi.values) if self.phi else None}
        if self.notes:
            out["notes"] = self.notes
        return out


def is_sphere(H: GradedGroups, dim: int) -> bool:
    return H == GradedGroups({dim: FgGroup(1)})


def sphere_report(X: FinPoset, stop_early: bool = False) -> DualizabilityReport:
    key = ("sphere", stop_early)
    if key in X._cache:
        return X._cache[key]
    cat_w = ps.catenary_witness(X)
    bad = []
    count = 0
    for x in range(X.n):
        for y in _bits(X.up[x] & ~(1 << x)):
            m = X.up[x] & X.down[y] & ~(1 << x) & ~(1 << y)
            count += 1
            H = reduced_homology_mask(X, m)
            if not is_sphere(H, X.dim_of_mask(m)):
                bad.append((X.labels[x], X.labels[y], H))
                if stop_early:
                    break
        if stop_early and bad:
            break
    mins, maxs = X.minimal(), X.maximal()
    rep = DualizabilityReport(
        is_catenary=cat_w is None, catenary_witness=cat_w, intervals_checked=count,
        non_spheres=bad, is_locally_dualizable=cat_w is None and not bad,
        is_local=len(mins) == 1, is_irreducible=len(maxs) == 1)
    if rep.is_locally_dualizable:
        if rep.is_irreducible:
            rep.canonical_kind = "generic-skyscraper"
            rep.phi = ps.codimension_function(X, preset="irreducible")
        elif rep.is_local:
            rep.canonical_kind = "D0"
            rep.phi = ps.codimension_function(X, preset="local")
        else:
            rep.notes.append("locally dualizable; no global canonical complex verdict for spaces "
                             "that are neither local nor irreducible")
    X._cache[key] = rep
    return rep


def is_locally_dualizable(X: FinPoset) -> bool:
    return sphere_report(X).is_locally_dualizable


@dataclass
class CanonicalComplex:
    kind: str
    complex: Any
    phi: CodimFunction


def canonical_complex(X: FinPoset) -> tuple[CanonicalComplex | None, DualizabilityReport]:
    """Canonical complex of a local or irreducible locally dualizable space.

    Irreducible spaces get the skyscraper at the generic point with
    phi_x = dim U_x; local ones get the D0 model with phi_x = -dim C_x.
    """
    rep = sphere_report(X)
    if not rep.is_locally_dualizable or rep.canonical_kind is None:
        return None, rep
    if rep.canonical_kind == "generic-skyscraper":
        g = X.labels[X.maximal()[0]]
        return CanonicalComplex("generic-skyscraper", skyscraper(X, g).as_complex(), rep.phi), rep
    return CanonicalComplex("D0", dualizing_model(X, "D0"), rep.phi), rep


def canonical_stalks(X: FinPoset, phi: CodimFunction) -> dict[str, GradedGroups]:
    """Stalks of the canonical complex: reduced homology of U_x^*, with
    homological degree i placed in degree phi_x - 1 - i."""
    out = {}
    for x in X.labels:
        i = X.idx(x)
        H = reduced_homology_mask(X, X.up[i] & ~(1 << i))
        out[x] = H.reindex(lambda k, f=phi[x]: f - 1 - k)
    return out


# ---------------------------------------------------------------------------
# the duality functor

def require_dualizable_local(X: FinPoset) -> DualizabilityReport:
    rep = sphere_report(X)
    if len(X.minimal()) != 1:
        raise ValueError("space is not local")
    if not rep.is_locally_dualizable:
        raise NotDualizable(rep)
    return rep


def dualize(X: FinPoset, F) -> ClosedSupportComplex:
    """D(F) = RHom(F, D0) on a local, locally dualizable space."""
    require_dualizable_local(X)
    return hom_into_closed(F, dualizing_model(X, "D0").complex)


def double_dual(X: FinPoset, F) -> ClosedSupportComplex:
    return dualize(X, dualize(X, F).to_sheaf_complex())


def reflexivity_check(X: FinPoset, F) -> bool:
    """Stalkwise cohomology of DD(F) agrees with that of F."""
    return double_dual(X, F).stalk_cohomology() == stalk_cohomology(F)


def verify_closed_restriction(X: FinPoset, Y, K) -> bool:
    """RHom(Z_K, D_X^Y) against the pushforward of D_K^{Y∩K}, stalk by stalk."""
    ym = as_mask(X, Y)
    km = as_mask(X, K)
    if not X.is_down_closed(km) or not X.is_down_closed(ym):
        raise ValueError("Y and K must be closed")
    lhs = hom_complex(supported_constant(X, km), dualizing_model(X, "local", ym).to_sheaf_complex())
    KP = X.induced(km)
    inner = dualizing_model(KP, "local", KP.mask_of(X.labels_of(ym & km)))
    rhs = extend_by_zero(inner.to_sheaf_complex(), X)
    return lhs.stalk_cohomology() == rhs.stalk_cohomology()
