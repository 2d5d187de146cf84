"""Simplicial complexes as closed subsets of the affine space over the field with one element.

The face poset of a complex on n vertices sits inside the poset of all
subsets of {1..n}; dropping the empty face gives the projective version.
Homology of links here is computed straight from simplicial boundary
matrices, so :func:`reisner_check` shares no code with the sheaf pipeline.
"""
from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations
from pathlib import Path
from typing import Iterable, Sequence

from .poset import FinPoset
from .zlinalg import FgGroup, FreeComplex, GradedGroups, SparseMatrix, homology_of

EMPTY = "∅"


@dataclass(frozen=True)
class SimplicialComplex:
    vertices: tuple[str, ...]
    facets: tuple[frozenset, ...]
    projective: bool = False

    @classmethod
    def from_facets(cls, facets: Iterable[Iterable], projective: bool = False,
                    vertices: Sequence[str] | None = None) -> "SimplicialComplex":
        fl = [frozenset(str(v) for v in f) for f in facets]
        order: list[str] = list(vertices) if vertices is not None else []
        seen = set(order)
        for f in facets:
            for v in f:
                v = str(v)
                if v not in seen:
                    seen.add(v)
                    order.append(v)
        maximal = []
        for f in fl:
            if not any(f < g for g in fl) and f not in maximal:
                maximal.append(f)
        return cls(tuple(order), tuple(maximal), projective)

    @property
    def faces(self) -> set[frozenset]:
        out: set[frozenset] = set()
        for f in self.facets:
            fs = sorted(f)
            for k in range(len(fs) + 1):
                for c in combinations(fs, k):
                    out.add(frozenset(c))
        if self.projective:
            out.discard(frozenset())
        return out

    @property
    def dim(self) -> int:
        return max((len(f) for f in self.facets), default=0) - 1

    def sorted_face(self, f) -> tuple[str, ...]:
        pos = {v: i for i, v in enumerate(self.vertices)}
        return tuple(sorted(f, key=pos.__getitem__))

    def face_label(self, f) -> str:
        return face_label(self.sorted_face(f))

    def f_vector(self) -> dict[int, int]:
        out: dict[int, int] = {}
        for f in self.faces:
            out[len(f) - 1] = out.get(len(f) - 1, 0) + 1
        return dict(sorted(out.items()))


def face_label(vs: Sequence[str]) -> str:
    if not vs:
        return EMPTY
    if all(len(v) == 1 for v in vs):
        return "".join(vs)
    return ",".join(vs)


def face_poset(K: SimplicialComplex) -> tuple[FinPoset, dict[str, frozenset]]:
    faces = sorted(K.faces, key=lambda f: (len(f), K.sorted_face(f)))
    labels = [K.face_label(f) for f in faces]
    emb = {l: f for l, f in zip(labels, faces)}
    idx = {f: l for f, l in zip(faces, labels)}
    rel = []
    for f in faces:
        for v in f:
            g = f - {v}
            if g in idx:
                rel.append((idx[g], idx[f]))
    return FinPoset(labels, rel), emb


def from_facets(facets, projective: bool = False):
    """(complex, face poset, embedding label -> vertex indices in Δ_n)."""
    fl = [list(f) for f in facets]
    if not fl:
        raise ValueError("empty facet list")
    K = SimplicialComplex.from_facets(fl, projective)
    P, emb = face_poset(K)
    pos = {v: i + 1 for i, v in enumerate(K.vertices)}
    return K, P, {l: frozenset(pos[v] for v in f) for l, f in emb.items()}


def affine_space(n: int) -> FinPoset:
    verts = [str(i) for i in range(1, n + 1)]
    if n == 0:
        return FinPoset([EMPTY])
    return face_poset(SimplicialComplex.from_facets([verts], False, verts))[0]


def projective_space(n: int) -> FinPoset:
    """Nonempty subsets of {1..n} (the complement of the closed point)."""
    verts = [str(i) for i in range(1, n + 1)]
    if n == 0:
        return FinPoset([])
    return face_poset(SimplicialComplex.from_facets([verts], True, verts))[0]


def link(K: SimplicialComplex, sigma) -> SimplicialComplex:
    s = frozenset(str(v) for v in sigma)
    faces = K.faces
    if s not in faces and not (K.projective and not s):
        raise ValueError(f"{sorted(s)} is not a face")
    lk = [f - s for f in K.facets if s <= f]
    return SimplicialComplex.from_facets(lk, False, [v for v in K.vertices])


def simplicial_reduced_homology(K: SimplicialComplex) -> GradedGroups:
    """Reduced homology from the augmented simplicial chain complex (homological degrees)."""
    faces = set(K.faces) | {frozenset()}
    by_dim: dict[int, list[tuple[str, ...]]] = {}
    for f in faces:
        by_dim.setdefault(len(f) - 1, []).append(K.sorted_face(f))
    for v in by_dim.values():
        v.sort()
    index = {d: {f: k for k, f in enumerate(v)} for d, v in by_dim.items()}
    ranks = {-d: len(v) for d, v in by_dim.items()}
    diffs = {}
    for d, lst in by_dim.items():
        if d < 0:
            continue
        tgt = index[d - 1]
        ent = []
        for k, f in enumerate(lst):
            for i in range(len(f)):
                ent.append((tgt[f[:i] + f[i + 1:]], k, -1 if i % 2 else 1))
        diffs[-d] = SparseMatrix.from_entries(len(by_dim[d - 1]), len(lst), ent)
    return homology_of(FreeComplex(ranks, diffs)).reindex(lambda n: -n)


@dataclass
class ReisnerVerdict:
    is_cm: bool
    face: tuple[str, ...] | None = None
    degree: int | None = None
    group: FgGroup | None = None
    checked: int = 0

    def to_json(self) -> dict:
        out = {"cm": self.is_cm, "faces_checked": self.checked}
        if not self.is_cm:
            out["witness"] = {"face": face_label(self.face or ()), "degree": self.degree,
                              "group": self.group.to_dict()}
        return out


def reisner_check(K: SimplicialComplex) -> ReisnerVerdict:
    """Reduced homology of every link (the empty face included) vanishes below its dimension."""
    faces = sorted(set(K.faces) | {frozenset()}, key=lambda f: (len(f), K.sorted_face(f)))
    n = 0
    for s in faces:
        lk = link(K, s)
        H = simplicial_reduced_homology(lk)
        dl = lk.dim if lk.facets else -1
        n += 1
        for d, g in H.items():
            if d < dl:
                return ReisnerVerdict(False, K.sorted_face(s), d, g, n)
    return ReisnerVerdict(True, checked=n)


def sr_ideal(K: SimplicialComplex) -> list[str]:
    """Minimal nonfaces as squarefree monomials x_i (i = vertex position, 1-based)."""
    faces = set(K.faces) | {frozenset()}
    pos = {v: i + 1 for i, v in enumerate(K.vertices)}
    gens = []
    for k in range(1, len(K.vertices) + 1):
        for c in combinations(K.vertices, k):
            s = frozenset(c)
            if s in faces:
                continue
            if all(s - {v} in faces for v in s):
                gens.append(tuple(sorted(pos[v] for v in s)))
    gens.sort(key=lambda m: (len(m), m))
    return ["·".join(f"x{i}" for i in m) for m in gens]


def order_complex(X: FinPoset) -> SimplicialComplex:
    """Chains of X as faces."""
    return SimplicialComplex.from_facets([[X.labels[i] for i in c] for c in X.chain_masks()],
                                         True, X.labels)


def load_facets(path) -> list[list[str]]:
    text = Path(path).read_text(encoding="utf-8")
    return parse_facets(text)


def parse_facets(text: str) -> list[list[str]]:
    out = []
    for raw in text.splitlines():
        line = raw.split("#", 1)[0].strip()
        if line:
            out.append(line.split())
    return out


# ---------------------------------------------------------------------------
# fixtures

def simplex(n: int) -> list[list[str]]:
    """Facets of the full (n-1)-simplex on vertices 1..n."""
    return [[str(i) for i in range(1, n + 1)]]


def simplex_boundary(n: int) -> list[list[str]]:
    verts = [str(i) for i in range(1, n + 1)]
    return [[v for v in verts if v != w] for w in reversed(verts)]


def four_cycle() -> list[list[str]]:
    return [["1", "2"], ["2", "3"], ["3", "4"], ["1", "4"]]


def two_disjoint_edges() -> list[list[str]]:
    return [["1", "2"], ["3", "4"]]


RP2_6 = [["1", "2", "3"], ["1", "3", "4"], ["1", "4", "5"], ["1", "5", "6"], ["1", "2", "6"],
         ["2", "3", "5"], ["3", "4", "6"], ["2", "4", "5"], ["3", "5", "6"], ["2", "4", "6"]]


def rp2_6() -> list[list[str]]:
    """Six-vertex real projective plane; validated by its homology before use."""
    K = SimplicialComplex.from_facets(RP2_6)
    H = simplicial_reduced_homology(K)
    if H != GradedGroups({1: FgGroup(0, (2,))}) or len(K.faces - {frozenset()}) != 31:
        raise RuntimeError("RP2 facet list failed validation")
    return [list(f) for f in RP2_6]
