"""Command line front end: ``python -m posetsheaves <subcommand> ...``.

Exit codes: 0 when a check holds (or a report was printed), 1 when a check
fails (a witness is printed), 2 on malformed input.
"""
from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass, field
from pathlib import Path

from . import cm, cohomology, duality
from . import poset as ps
from . import simplicial as sx
from .sheaf import PresentedSheaf, constant_sheaf, load_sheaf, skyscraper
from .zlinalg import GradedGroups


class InputError(Exception):
    pass


@dataclass
class RunConfig:
    command: str
    poset: str | None = None
    facets: str | None = None
    sheaf: str | None = None
    projective: bool = False
    json: bool = False
    anchor: str | None = None
    point: str | None = None
    closed_set: list[str] = field(default_factory=list)
    against: str | None = None
    source: str | None = None
    target: str | None = None


@dataclass
class Result:
    payload: dict
    text: str
    code: int = 0


# ---------------------------------------------------------------------------
# inputs

def _load_inputs(cfg: RunConfig):
    given = [k for k in ("poset", "facets", "sheaf") if getattr(cfg, k)]
    if len(given) != 1:
        raise InputError("give exactly one of --poset, --facets, --sheaf")
    K = F = None
    try:
        if cfg.poset:
            X = ps.load(cfg.poset)
        elif cfg.facets:
            facets = sx.load_facets(cfg.facets)
            if not facets:
                raise InputError("empty facet list")
            K, X, _ = sx.from_facets(facets, cfg.projective)
        else:
            F = load_sheaf(cfg.sheaf)
            X = F.X
    except (OSError, json.JSONDecodeError, KeyError, ValueError) as e:
        raise InputError(f"cannot read input: {e}") from e
    return X, K, F


def _labels(X: ps.FinPoset, labels) -> list[str]:
    out = []
    for l in labels:
        if l not in X:
            raise InputError(f"unknown element {l!r}")
        out.append(l)
    return out


def _need_complex(K, cfg):
    if K is None:
        raise InputError(f"{cfg.command} needs --facets")
    return K


def _need_sheaf(F, cfg):
    if F is None:
        raise InputError(f"{cfg.command} needs --sheaf")
    return F


def _graded_text(H: GradedGroups) -> str:
    return ", ".join(f"{d}: {g}" for d, g in H.items()) or "0"


def _graded(name: str, H: GradedGroups) -> Result:
    return Result(H.to_json(), f"{name}: {_graded_text(H)}")


def _stalks(sc: dict[str, GradedGroups]) -> dict:
    return {x: H.to_json() for x, H in sc.items()}


def _stalks_text(sc: dict[str, GradedGroups]) -> str:
    return "\n".join(f"  {x}: {_graded_text(H)}" for x, H in sc.items())


def _poset_out(X: ps.FinPoset) -> Result:
    return Result(ps.to_json(X), ps.to_text(X).rstrip("\n"))


# ---------------------------------------------------------------------------
# subcommands

def cmd_info(X, K, F, cfg):
    r = ps.structure_report(X)
    d = r.to_json()
    d["size"] = X.n
    lines = [f"elements: {X.n}", f"dim: {r.dim}"]
    lines += [f"{k}: {'yes' if getattr(r, 'is_' + k) else 'no'}"
              for k in ("local", "irreducible", "connected", "pure", "catenary")]
    return Result(d, "\n".join(lines))


def _sheaf_or_constant(X, F):
    return F if F is not None else constant_sheaf(X)


def cmd_homology(X, K, F, cfg):
    return _graded("homology", cohomology.homology(X, _sheaf_or_constant(X, F)))


def cmd_cohomology(X, K, F, cfg):
    return _graded("cohomology", cohomology.global_cohomology(X, _sheaf_or_constant(X, F)))


def cmd_reduced(X, K, F, cfg):
    H = cohomology.reduced_homology(X)
    C = cohomology.reduced_cohomology(X)
    return Result({"homology": H.to_json(), "cohomology": C.to_json()},
                  f"reduced homology: {_graded_text(H)}\nreduced cohomology: {_graded_text(C)}")


def cmd_local_cohomology(X, K, F, cfg):
    G = _sheaf_or_constant(X, F)
    if cfg.point:
        x = _labels(X, [cfg.point])[0]
        return _graded(f"H_{x}(U_{x})", cohomology.point_local_cohomology(X, x, G))
    Y = _labels(X, cfg.closed_set)
    if not X.is_down_closed(X.mask_of(Y)):
        raise InputError("--closed-set is not closed")
    return _graded("local cohomology", cohomology.local_cohomology(X, Y, G))


def cmd_ext(X, K, F, cfg):
    if not cfg.source or not cfg.target:
        raise InputError("ext needs --from and --to")
    x, y = _labels(X, [cfg.source, cfg.target])
    if X.lt(x, y):
        H = cohomology.ext_skyscrapers(X, x, y)
    else:
        H = cohomology.rhom_global(skyscraper(X, x), skyscraper(X, y))
    return _graded(f"Ext(Z_{x}, Z_{y})", H)


def cmd_sphere_report(X, K, F, cfg):
    r = duality.sphere_report(X)
    d = r.to_json()
    if cfg.anchor:
        phi = ps.codimension_function(X, anchors={_labels(X, [cfg.anchor])[0]: 0})
        d["phi"] = dict(phi.values) if phi else None
    text = [f"catenary: {'yes' if r.is_catenary else 'no'}", f"intervals checked: {r.intervals_checked}",
            f"locally dualizable: {'yes' if r.is_locally_dualizable else 'no'}"]
    if not r.is_locally_dualizable:
        text.append("reason: " + r.reason())
    return Result(d, "\n".join(text), 0 if r.is_locally_dualizable else 1)


def cmd_dualizable(X, K, F, cfg):
    r = duality.sphere_report(X, stop_early=True)
    ok = r.is_locally_dualizable
    return Result({"locally_dualizable": ok, "reason": r.reason()},
                  "locally dualizable" if ok else "not locally dualizable: " + r.reason(), 0 if ok else 1)


def cmd_canonical(X, K, F, cfg):
    cc, r = duality.canonical_complex(X)
    if cc is None:
        reason = r.reason() if not r.is_locally_dualizable else "; ".join(r.notes)
        return Result({"canonical": None, "reason": reason}, "no canonical complex: " + reason, 1)
    phi = cc.phi
    if cfg.anchor:
        phi = ps.codimension_function(X, anchors={_labels(X, [cfg.anchor])[0]: 0}) or phi
    st = duality.canonical_stalks(X, phi)
    return Result({"kind": cc.kind, "phi": dict(phi.values), "stalks": _stalks(st)},
                  f"kind: {cc.kind}\nphi: {dict(phi.values)}\nstalks:\n{_stalks_text(st)}")


def cmd_dualize(X, K, F, cfg):
    F = _need_sheaf(F, cfg)
    try:
        D = duality.dualize(X, F)
    except duality.NotDualizable as e:
        return Result({"error": str(e)}, str(e), 1)
    sc = D.stalk_cohomology()
    return Result({"stalks": _stalks(sc)}, "D(F) stalk cohomology:\n" + _stalks_text(sc))


def cmd_reflexive(X, K, F, cfg):
    F = _need_sheaf(F, cfg)
    try:
        ok = duality.reflexivity_check(X, F)
    except duality.NotDualizable as e:
        return Result({"reflexive": False, "error": str(e)}, str(e), 1)
    return Result({"reflexive": ok}, "reflexive" if ok else "not reflexive", 0 if ok else 1)


def _space_verdict(v: cm.CmSpaceVerdict) -> Result:
    return Result(v.to_json(), "Cohen-Macaulay" if v.is_cm else "not Cohen-Macaulay: " + v.reason(),
                  0 if v.is_cm else 1)


def cmd_cm(X, K, F, cfg):
    return _space_verdict(cm.is_cm_space(X))


def cmd_cm_sheaf(X, K, F, cfg):
    F = _need_sheaf(F, cfg)
    try:
        v = cm.is_cm_sheaf(X, F)
    except duality.NotDualizable as e:
        return Result({"cm": False, "error": str(e)}, str(e), 1)
    text = f"Cohen-Macaulay, shift {v.shift}" if v.is_cm else f"not Cohen-Macaulay: {v.witness}"
    return Result(v.to_json(), text, 0 if v.is_cm else 1)


def cmd_cm_closed(X, K, F, cfg):
    Y = _labels(X, cfg.closed_set)
    if not Y or not X.is_down_closed(X.mask_of(Y)):
        raise InputError("--closed-set must name a nonempty closed subset")
    try:
        v = cm.is_cm_closed(X, Y)
    except duality.NotDualizable as e:
        return Result({"cm": False, "error": str(e)}, str(e), 1)
    return Result(v.to_json(), f"{'Cohen-Macaulay' if v.is_cm else 'not Cohen-Macaulay'} (codim {v.codim})",
                  0 if v.is_cm else 1)


def cmd_canonical_sheaf(X, K, F, cfg):
    try:
        w = cm.canonical_sheaf(X)
    except cm.NotCohenMacaulay as e:
        return Result({"error": str(e)}, str(e), 1)
    st = w.stalks()
    return Result(w.to_json(), "ω stalks:\n" + "\n".join(f"  {x}: {g}" for x, g in st.items()))


def cmd_omega_check(X, K, F, cfg):
    Y = _labels(X, cfg.closed_set) if cfg.closed_set else None
    try:
        r = cm.omega_duality_sequences(X, F, Y)
    except (cm.NotCohenMacaulay, ValueError) as e:
        return Result({"ok": False, "error": str(e)}, str(e), 1)
    text = "\n".join(f"{c.name}: {'ok' if c.ok else 'FAIL'}  {_graded_text(c.lhs)} | {_graded_text(c.rhs)}"
                     for c in r.checks)
    return Result(r.to_json(), text, 0 if r.ok else 1)


def cmd_baclawski(X, K, F, cfg):
    r = cm.baclawski_report(X)
    text = (f"a': {r.a}  b': {r.b}  c': {r.c}  d': {r.d}\n"
            f"Baclawski CM: {r.is_cm_baclawski}  ACM: {r.is_acm}  CM (dualizing complex): {r.ours}")
    return Result(r.to_json(), text, 0 if r.is_cm_baclawski else 1)


def cmd_reisner(X, K, F, cfg):
    v = sx.reisner_check(_need_complex(K, cfg))
    text = "Reisner criterion holds" if v.is_cm else (
        f"fails at face {sx.face_label(v.face)}: reduced homology {v.group} in degree {v.degree}")
    return Result(v.to_json(), text, 0 if v.is_cm else 1)


def cmd_sr_ideal(X, K, F, cfg):
    g = sx.sr_ideal(_need_complex(K, cfg))
    return Result({"generators": g}, "\n".join(g) if g else "(zero ideal)")


def cmd_subdivide(X, K, F, cfg):
    return _poset_out(ps.barycentric(X))


def cmd_opposite(X, K, F, cfg):
    return _poset_out(ps.opposite(X))


def cmd_product(X, K, F, cfg):
    if not cfg.against:
        raise InputError("product needs --against")
    try:
        Y = ps.load(cfg.against)
    except (OSError, json.JSONDecodeError, KeyError, ValueError) as e:
        raise InputError(f"cannot read {cfg.against}: {e}") from e
    return _poset_out(ps.product(X, Y))


def cmd_order_complex(X, K, F, cfg):
    C = sx.order_complex(X)
    facets = sorted([list(C.sorted_face(f)) for f in C.facets], key=lambda f: [X.idx(v) for v in f])
    return Result({"facets": facets}, "\n".join(" ".join(f) for f in facets))


COMMANDS = {
    "info": cmd_info,
    "homology": cmd_homology,
    "cohomology": cmd_cohomology,
    "reduced": cmd_reduced,
    "local-cohomology": cmd_local_cohomology,
    "ext": cmd_ext,
    "sphere-report": cmd_sphere_report,
    "dualizable": cmd_dualizable,
    "canonical": cmd_canonical,
    "dualize": cmd_dualize,
    "reflexive": cmd_reflexive,
    "cm": cmd_cm,
    "cm-sheaf": cmd_cm_sheaf,
    "cm-closed": cmd_cm_closed,
    "canonical-sheaf": cmd_canonical_sheaf,
    "omega-check": cmd_omega_check,
    "baclawski": cmd_baclawski,
    "reisner": cmd_reisner,
    "sr-ideal": cmd_sr_ideal,
    "subdivide": cmd_subdivide,
    "opposite": cmd_opposite,
    "product": cmd_product,
    "order-complex": cmd_order_complex,
}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise InputError(message)


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--poset", help="poset file (JSON or 'a < b' text)")
    common.add_argument("--facets", help="facet file, one facet per line")
    common.add_argument("--sheaf", help="sheaf JSON")
    common.add_argument("--projective", action="store_true", help="drop the empty face")
    common.add_argument("--json", action="store_true", help="machine-readable output")
    common.add_argument("--anchor", help="anchor label for codimension functions")
    common.add_argument("--point", help="point for local cohomology at a point")
    common.add_argument("--closed-set", nargs="+", default=[], metavar="LABEL")
    common.add_argument("--against", help="second poset for product")
    common.add_argument("--from", dest="source")
    common.add_argument("--to", dest="target")
    p = _Parser(prog="posetsheaves", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)
    for name in COMMANDS:
        sub.add_parser(name, parents=[common])
    return p


def parse_config(argv) -> RunConfig:
    ns = build_parser().parse_args(argv)
    return RunConfig(**{k: v for k, v in vars(ns).items()})


def execute(cfg: RunConfig) -> Result:
    X, K, F = _load_inputs(cfg)
    return COMMANDS[cfg.command](X, K, F, cfg)


def run(argv=None, out=None) -> int:
    out = out or sys.stdout
    argv = sys.argv[1:] if argv is None else list(argv)
    try:
        cfg = parse_config(argv)
        res = execute(cfg)
    except InputError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    if cfg.json:
        out.write(json.dumps(res.payload, sort_keys=True, ensure_ascii=False, indent=2) + "\n")
    else:
        out.write(res.text + "\n")
    return res.code


def main() -> None:
    sys.exit(run())
