"""Sheaves of abelian groups on finite posets.

A sheaf is a functor on the poset: a free stalk ``F_x`` per element and a
restriction ``F_x -> F_y`` for every ``x <= y``.  Only the cover maps are
stored; a matrix for ``x < y`` has shape ``(rank F_y, rank F_x)``.

Sign conventions (used by every module): face ``i`` of a chain drops
``x_i`` with sign ``(-1)^i``, and a total complex puts ``(-1)^p`` on the
second differential, ``p`` being the degree of the first factor.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping, Sequence

from . import poset as ps
from .poset import FinPoset, SubSpace, as_mask, _bits
from .zlinalg import (FgGroup, FreeComplex, GradedGroups, IntMatrix, SparseMatrix,
                      diagonal, homology_of, identity, intmatrix, is_zero_matrix, kernel_basis,
                      image_basis, kron, left_inverse, mat_equal, matmul, smith_normal_form, solve_exact,
                      to_lists, unimodular_inverse, zeros)


class Sheaf:
    """Sheaf with free stalks given by ranks and cover matrices."""

    def __init__(self, X: FinPoset, ranks, maps: Mapping | None = None):
        self.X = X
        if isinstance(ranks, Mapping):
            r = [0] * X.n
            for k, v in ranks.items():
                r[X.idx(k)] = int(v)
            ranks = r
        self.ranks: tuple[int, ...] = tuple(int(v) for v in ranks)
        if len(self.ranks) != X.n:
            raise ValueError("one rank per element is required")
        self.maps: dict[tuple[int, int], IntMatrix] = {}
        given = {}
        for (a, b), M in (maps or {}).items():
            given[(X.idx(a), X.idx(b))] = M
        for a, b in X.cover_pairs():
            M = given.pop((a, b), None)
            if M is None:
                M = zeros(self.ranks[b], self.ranks[a])
            else:
                M = intmatrix(M, self.ranks[b], self.ranks[a]) if not hasattr(M, "shape") else intmatrix(M)
                if M.shape != (self.ranks[b], self.ranks[a]):
                    raise ValueError(f"map {X.labels[a]}->{X.labels[b]} has shape {M.shape}, "
                                     f"expected {(self.ranks[b], self.ranks[a])}")
            self.maps[(a, b)] = M
        if given:
            a, b = next(iter(given))
            raise ValueError(f"{X.labels[a]}->{X.labels[b]} is not a cover")
        self._rho: dict[tuple[int, int], IntMatrix] = {}

    def rank(self, x) -> int:
        return self.ranks[self.X.idx(x)]

    def rho(self, a: int, b: int) -> IntMatrix:
        """Restriction F_a -> F_b for indices a <= b (composed along covers)."""
        if a == b:
            return identity(self.ranks[a])
        key = (a, b)
        M = self._rho.get(key)
        if M is None:
            if (a, b) in self.maps:
                M = self.maps[(a, b)]
            else:
                X = self.X
                if not X.up[a] >> b & 1:
                    raise ValueError(f"{X.labels[a]} is not below {X.labels[b]}")
                c = next(c for c in X.upper_covers[a] if X.up[c] >> b & 1)
                M = matmul(self.rho(c, b), self.maps[(a, c)])
            self._rho[key] = M
        return M

    def restriction(self, x, y) -> IntMatrix:
        return self.rho(self.X.idx(x), self.X.idx(y))

    def as_complex(self) -> "SheafComplex":
        return SheafComplex(self.X, {0: self})

    def is_zero(self) -> bool:
        return not any(self.ranks)

    def validate(self) -> "ValidationReport":
        return validate(self)

    def __repr__(self) -> str:
        return f"Sheaf(ranks={dict(zip(self.X.labels, self.ranks))})"


FreeStalkSheaf = Sheaf


def _zero_sheaf(X: FinPoset) -> Sheaf:
    return Sheaf(X, [0] * X.n)


class SheafComplex:
    """Bounded complex of free-stalk sheaves.

    ``diffs[q][i]`` is the stalk matrix of ``d^q`` at element index ``i``.
    """

    def __init__(self, X: FinPoset, terms: Mapping[int, Sheaf], diffs: Mapping | None = None):
        self.X = X
        self.terms: dict[int, Sheaf] = {int(q): F for q, F in terms.items() if not F.is_zero()}
        for F in self.terms.values():
            if F.X is not X and (F.X.labels != X.labels or F.X != X):
                raise ValueError("terms live on different posets")
        self.diffs: dict[int, list[IntMatrix]] = {}
        for q, mats in (diffs or {}).items():
            q = int(q)
            if isinstance(mats, Mapping):
                mats = [mats.get(X.labels[i], mats.get(i)) for i in range(X.n)]
            out = []
            for i in range(X.n):
                want = (self.rank(q + 1, i), self.rank(q, i))
                M = mats[i]
                M = zeros(*want) if M is None else intmatrix(M, *want)
                if M.shape != want:
                    raise ValueError(f"d^{q} at {X.labels[i]} has shape {M.shape}, expected {want}")
                out.append(M)
            if any(M.size and not is_zero_matrix(M) for M in out):
                self.diffs[q] = out

    def term(self, q: int) -> Sheaf:
        return self.terms.get(q) or _zero_sheaf(self.X)

    def rank(self, q: int, i: int) -> int:
        F = self.terms.get(q)
        return F.ranks[i] if F is not None else 0

    def d(self, q: int, i: int) -> IntMatrix:
        mats = self.diffs.get(q)
        if mats is None:
            return zeros(self.rank(q + 1, i), self.rank(q, i))
        return mats[i]

    def degrees(self) -> list[int]:
        return sorted(self.terms)

    def stalk_complex(self, x) -> FreeComplex:
        i = self.X.idx(x)
        ranks = {q: F.ranks[i] for q, F in self.terms.items()}
        diffs = {q: SparseMatrix.from_dense(mats[i]) for q, mats in self.diffs.items()}
        return FreeComplex(ranks, diffs)

    def stalk_cohomology(self) -> dict[str, GradedGroups]:
        return {x: homology_of(self.stalk_complex(x), check=False) for x in self.X.labels}

    def is_acyclic(self) -> bool:
        return all(H.is_zero() for H in self.stalk_cohomology().values())

    def cohomology_sheaf(self, q: int) -> "PresentedSheaf":
        return cohomology_sheaf(self, q)

    def validate(self) -> "ValidationReport":
        return validate(self)

    def __repr__(self) -> str:
        return f"SheafComplex(degrees={self.degrees()}, ranks={{{', '.join(f'{q}: {list(F.ranks)}' for q, F in sorted(self.terms.items()))}}})"


def as_complex(F) -> SheafComplex:
    if isinstance(F, SheafComplex):
        return F
    if isinstance(F, Sheaf):
        return F.as_complex()
    if isinstance(F, PresentedSheaf):
        return F.to_complex()
    if hasattr(F, "to_sheaf_complex"):
        return F.to_sheaf_complex()
    raise TypeError(f"cannot treat {type(F).__name__} as a sheaf complex")


# ---------------------------------------------------------------------------
# validation

@dataclass
class ValidationReport:
    ok: bool
    message: str = ""
    chains: tuple = ()

    def __bool__(self) -> bool:
        return self.ok


def _check_functor(F: Sheaf) -> ValidationReport:
    X = F.X
    comp: dict[tuple[int, int], tuple[IntMatrix, tuple[int, ...]]] = {}
    for x in range(X.n - 1, -1, -1):
        comp[(x, x)] = (identity(F.ranks[x]), (x,))
        for y in _bits(X.up[x] & ~(1 << x)):
            ref = None
            for c in X.upper_covers[x]:
                if not X.up[c] >> y & 1:
                    continue
                Mc, path = comp[(c, y)]
                M = matmul(Mc, F.maps[(x, c)])
                if ref is None:
                    ref = (M, (x,) + path)
                elif not mat_equal(ref[0], M):
                    p1 = tuple(X.labels[i] for i in ref[1])
                    p2 = tuple(X.labels[i] for i in (x,) + path)
                    return ValidationReport(False, f"restrictions {X.labels[x]} -> {X.labels[y]} "
                                                   f"differ along {p1} and {p2}", (p1, p2))
            comp[(x, y)] = ref
    return ValidationReport(True)


def validate(F) -> ValidationReport:
    """Functoriality of every term, plus d∘d = 0 and d commuting with restrictions."""
    if isinstance(F, Sheaf):
        return _check_functor(F)
    if isinstance(F, PresentedSheaf):
        return F.validate()
    K = F
    for q, T in K.terms.items():
        rep = _check_functor(T)
        if not rep.ok:
            return ValidationReport(False, f"degree {q}: {rep.message}", rep.chains)
    X = K.X
    for q in K.diffs:
        for i in range(X.n):
            if not is_zero_matrix(matmul(K.d(q + 1, i), K.d(q, i))):
                return ValidationReport(False, f"d^{q + 1} d^{q} != 0 at {X.labels[i]}", ((X.labels[i],),))
        for a, b in X.cover_pairs():
            lhs = matmul(K.term(q + 1).maps[(a, b)], K.d(q, a))
            rhs = matmul(K.d(q, b), K.term(q).maps[(a, b)])
            if not mat_equal(lhs, rhs):
                return ValidationReport(False, f"d^{q} does not commute with restriction "
                                               f"{X.labels[a]} -> {X.labels[b]}",
                                        ((X.labels[a], X.labels[b]),))
    return ValidationReport(True)


# ---------------------------------------------------------------------------
# constructors

def constant_sheaf(X: FinPoset, rank: int = 1) -> Sheaf:
    I = identity(rank)
    return Sheaf(X, [rank] * X.n, {(a, b): I for a, b in X.cover_pairs()})


def supported_constant(X: FinPoset, S, rank: int = 1) -> Sheaf:
    """Z_S: Z on the locally closed set S, zero elsewhere."""
    mask = as_mask(X, S)
    if not X.is_convex(mask):
        raise ValueError("support must be locally closed")
    I = identity(rank)
    ranks = [rank if mask >> i & 1 else 0 for i in range(X.n)]
    maps = {(a, b): I for a, b in X.cover_pairs() if mask >> a & 1 and mask >> b & 1}
    return Sheaf(X, ranks, maps)


def skyscraper(X: FinPoset, x, rank: int = 1) -> Sheaf:
    return supported_constant(X, 1 << X.idx(x), rank)


def zero_sheaf(X: FinPoset) -> Sheaf:
    return _zero_sheaf(X)


# ---------------------------------------------------------------------------
# restriction and extension by zero

def restrict(F, S) -> "Sheaf | SheafComplex":
    """Restriction to a subset (induced subposet)."""
    if isinstance(F, SheafComplex):
        X = F.X
        mask = as_mask(X, S)
        idxs = list(_bits(mask))
        terms = {q: restrict(T, mask) for q, T in F.terms.items()}
        Y = next(iter(terms.values())).X if terms else X.induced(mask)
        diffs = {q: [mats[i] for i in idxs] for q, mats in F.diffs.items()}
        return SheafComplex(Y, terms, diffs)
    X = F.X
    mask = as_mask(X, S)
    Y = X.induced(mask)
    ranks = [F.ranks[X.idx(l)] for l in Y.labels]
    maps = {(a, b): F.rho(X.idx(Y.labels[a]), X.idx(Y.labels[b])) for a, b in Y.cover_pairs()}
    return Sheaf(Y, ranks, maps)


def extend_by_zero(F, X: FinPoset) -> "Sheaf | SheafComplex":
    """Push a sheaf on a locally closed subposet of X forward by zero."""
    if isinstance(F, SheafComplex):
        Y = F.X
        terms = {q: extend_by_zero(T, X) for q, T in F.terms.items()}
        diffs = {}
        for q, mats in F.diffs.items():
            out = [None] * X.n
            for j, l in enumerate(Y.labels):
                out[X.idx(l)] = mats[j]
            diffs[q] = out
        return SheafComplex(X, terms, diffs)
    Y = F.X
    mask = X.mask_of(Y.labels)
    if not X.is_convex(mask):
        raise ValueError("subposet is not locally closed")
    ranks = [0] * X.n
    for j, l in enumerate(Y.labels):
        ranks[X.idx(l)] = F.ranks[j]
    maps = {}
    for a, b in X.cover_pairs():
        if mask >> a & 1 and mask >> b & 1:
            maps[(a, b)] = F.rho(Y.idx(X.labels[a]), Y.idx(X.labels[b]))
    return Sheaf(X, ranks, maps)


# ---------------------------------------------------------------------------
# complex algebra

def _sheaf_sum(X: FinPoset, parts: Sequence[Sheaf]) -> Sheaf:
    ranks = [sum(P.ranks[i] for P in parts) for i in range(X.n)]
    maps = {}
    for a, b in X.cover_pairs():
        M = zeros(ranks[b], ranks[a])
        ra = rb = 0
        for P in parts:
            M[rb:rb + P.ranks[b], ra:ra + P.ranks[a]] = P.maps[(a, b)]
            ra += P.ranks[a]
            rb += P.ranks[b]
        maps[(a, b)] = M
    return Sheaf(X, ranks, maps)


def _block_diag(blocks: Sequence[IntMatrix]) -> IntMatrix:
    M = zeros(sum(b.shape[0] for b in blocks), sum(b.shape[1] for b in blocks))
    r = c = 0
    for b in blocks:
        M[r:r + b.shape[0], c:c + b.shape[1]] = b
        r += b.shape[0]
        c += b.shape[1]
    return M


def direct_sum(F, G) -> SheafComplex:
    F, G = as_complex(F), as_complex(G)
    X = F.X
    degs = set(F.terms) | set(G.terms)
    terms = {q: _sheaf_sum(X, [F.term(q), G.term(q)]) for q in degs}
    diffs = {q: [_block_diag([F.d(q, i), G.d(q, i)]) for i in range(X.n)]
             for q in set(F.diffs) | set(G.diffs)}
    return SheafComplex(X, terms, diffs)


def shift(F, k: int) -> SheafComplex:
    """F[k]: degree q holds F^{q+k}, differentials multiplied by (-1)^k."""
    F = as_complex(F)
    s = -1 if k % 2 else 1
    terms = {q - k: T for q, T in F.terms.items()}
    diffs = {q - k: [s * M for M in mats] for q, mats in F.diffs.items()}
    return SheafComplex(F.X, terms, diffs)


@dataclass
class SheafMorphism:
    """Chain map given stalkwise: ``maps[q][i]`` is F^q_i -> G^q_i."""

    source: SheafComplex
    target: SheafComplex
    maps: dict[int, list[IntMatrix]]

    def component(self, q: int, i: int) -> IntMatrix:
        mats = self.maps.get(q)
        if mats is None:
            return zeros(self.target.rank(q, i), self.source.rank(q, i))
        return intmatrix(mats[i], self.target.rank(q, i), self.source.rank(q, i))

    def check(self) -> bool:
        F, G, X = self.source, self.target, self.source.X
        for q in set(F.terms) | set(G.terms):
            for a, b in X.cover_pairs():
                lhs = matmul(G.term(q).maps[(a, b)], self.component(q, a))
                rhs = matmul(self.component(q, b), F.term(q).maps[(a, b)])
                if not mat_equal(lhs, rhs):
                    return False
            for i in range(X.n):
                if not mat_equal(matmul(G.d(q, i), self.component(q, i)),
                                 matmul(self.component(q + 1, i), F.d(q, i))):
                    return False
        return True


def identity_morphism(F) -> SheafMorphism:
    F = as_complex(F)
    return SheafMorphism(F, F, {q: [identity(r) for r in T.ranks] for q, T in F.terms.items()})


def cone(phi: SheafMorphism) -> SheafComplex:
    """Cone^q = F^{q+1} + G^q with d = [[-dF, 0], [phi, dG]]."""
    F, G = phi.source, phi.target
    if not phi.check():
        raise ValueError("not a morphism of complexes")
    X = F.X
    degs = {q - 1 for q in F.terms} | set(G.terms)
    terms = {q: _sheaf_sum(X, [F.term(q + 1), G.term(q)]) for q in degs}
    diffs = {}
    for q in degs | {q - 1 for q in degs}:
        mats = []
        for i in range(X.n):
            a1, b1 = F.rank(q + 1, i), G.rank(q, i)
            a2, b2 = F.rank(q + 2, i), G.rank(q + 1, i)
            M = zeros(a2 + b2, a1 + b1)
            M[:a2, :a1] = -F.d(q + 1, i)
            M[a2:, :a1] = phi.component(q + 1, i)
            M[a2:, a1:] = G.d(q, i)
            mats.append(M)
        diffs[q] = mats
    return SheafComplex(X, terms, diffs)


def tensor_group(E: FreeComplex, F) -> SheafComplex:
    """E (x)_Z F: stalks Z^{e_a} (x) F^b_x, d = dE (x) 1 + (-1)^a 1 (x) dF."""
    F = as_complex(F)
    X = F.X
    blocks: dict[int, list[tuple[int, int]]] = {}
    for a in E.degrees():
        for b in F.degrees():
            blocks.setdefault(a + b, []).append((a, b))
    terms = {}
    for n, pairs in blocks.items():
        parts = []
        for a, b in pairs:
            T = F.term(b)
            I = identity(E.rank(a))
            parts.append(Sheaf(X, [E.rank(a) * r for r in T.ranks],
                               {k: kron(I, M) for k, M in T.maps.items()}))
        terms[n] = _sheaf_sum(X, parts)
    diffs = {}
    for n, pairs in blocks.items():
        tgt = blocks.get(n + 1, [])
        mats = []
        for i in range(X.n):
            rows = [E.rank(a) * F.rank(b, i) for a, b in tgt]
            cols = [E.rank(a) * F.rank(b, i) for a, b in pairs]
            M = zeros(sum(rows), sum(cols))
            for cj, (a, b) in enumerate(pairs):
                c0 = sum(cols[:cj])
                for rj, (a2, b2) in enumerate(tgt):
                    r0 = sum(rows[:rj])
                    if a2 == a + 1 and b2 == b:
                        blk = kron(E.d(a).to_dense(), identity(F.rank(b, i)))
                    elif a2 == a and b2 == b + 1:
                        blk = (-1) ** (a % 2) * kron(identity(E.rank(a)), F.d(b, i))
                    else:
                        continue
                    M[r0:r0 + rows[rj], c0:c0 + cols[cj]] = blk
            mats.append(M)
        diffs[n] = mats
    return SheafComplex(X, terms, diffs)


def external_product(F, G) -> SheafComplex:
    """F ⊠ G on X x Y with Kronecker stalks and restrictions."""
    F, G = as_complex(F), as_complex(G)
    X, Y = F.X, G.X
    P = ps.product(X, Y)
    nY = Y.n

    def pidx(i, j):
        return P.idx(ps.product_label(X.labels[i], Y.labels[j]))

    inv = {}
    for i in range(X.n):
        for j in range(nY):
            inv[pidx(i, j)] = (i, j)
    blocks: dict[int, list[tuple[int, int]]] = {}
    for a in F.degrees():
        for b in G.degrees():
            blocks.setdefault(a + b, []).append((a, b))

    def part(a, b):
        A, B = F.term(a), G.term(b)
        ranks = [A.ranks[inv[k][0]] * B.ranks[inv[k][1]] for k in range(P.n)]
        maps = {}
        for u, v in P.cover_pairs():
            (i1, j1), (i2, j2) = inv[u], inv[v]
            if j1 == j2:
                maps[(u, v)] = kron(A.rho(i1, i2), identity(B.ranks[j1]))
            else:
                maps[(u, v)] = kron(identity(A.ranks[i1]), B.rho(j1, j2))
        return Sheaf(P, ranks, maps)

    terms = {n: _sheaf_sum(P, [part(a, b) for a, b in pairs]) for n, pairs in blocks.items()}
    diffs = {}
    for n, pairs in blocks.items():
        tgt = blocks.get(n + 1, [])
        mats = []
        for k in range(P.n):
            i, j = inv[k]
            rows = [F.rank(a, i) * G.rank(b, j) for a, b in tgt]
            cols = [F.rank(a, i) * G.rank(b, j) for a, b in pairs]
            M = zeros(sum(rows), sum(cols))
            for cj, (a, b) in enumerate(pairs):
                c0 = sum(cols[:cj])
                for rj, (a2, b2) in enumerate(tgt):
                    r0 = sum(rows[:rj])
                    if a2 == a + 1 and b2 == b:
                        blk = kron(F.d(a, i), identity(G.rank(b, j)))
                    elif a2 == a and b2 == b + 1:
                        blk = (-1) ** (a % 2) * kron(identity(F.rank(a, i)), G.d(b, j))
                    else:
                        continue
                    M[r0:r0 + rows[rj], c0:c0 + cols[cj]] = blk
            mats.append(M)
        diffs[n] = mats
    return SheafComplex(P, terms, diffs)


# ---------------------------------------------------------------------------
# chain-indexed resolution bookkeeping

@dataclass
class ChainIndexedModel:
    """Terms of C^•F (carried group F_{x_p}) or C_•F (carried group F_{x_0})."""

    kind: str
    terms: dict[int, list[tuple[tuple[str, ...], int]]] = field(default_factory=dict)

    def chain_counts(self) -> dict[int, int]:
        return {p: len(v) for p, v in sorted(self.terms.items())}


def standard_resolutions(F) -> tuple[ChainIndexedModel, ChainIndexedModel]:
    F = as_complex(F)
    X = F.X
    co = ChainIndexedModel("cochain")
    ch = ChainIndexedModel("chain")
    for c in X.chain_masks():
        p = len(c) - 1
        labs = tuple(X.labels[i] for i in c)
        co.terms.setdefault(p, []).append((labs, sum(F.rank(q, c[-1]) for q in F.terms)))
        ch.terms.setdefault(p, []).append((labs, sum(F.rank(q, c[0]) for q in F.terms)))
    return co, ch


# ---------------------------------------------------------------------------
# presented sheaves

class PresentedSheaf:
    """Sheaf whose stalk at x is coker(rels_x : Z^{m_x} -> Z^{gens_x}).

    ``maps[(a, b)]`` acts on generators and must send relations into
    relations.  Normalised form (see :meth:`normalized`) has relation
    matrices ``diag(d_1, ..., d_t)`` stacked over zero rows for the free part.
    """

    def __init__(self, X: FinPoset, gens: Sequence[int], rels: Sequence, maps: Mapping):
        self.X = X
        self.gens = tuple(int(g) for g in gens)
        self.rels = [intmatrix(R, self.gens[i], None) if not hasattr(R, "shape") else intmatrix(R)
                     for i, R in enumerate(rels)]
        for i, R in enumerate(self.rels):
            if R.shape[0] != self.gens[i]:
                raise ValueError(f"relations at {X.labels[i]} have {R.shape[0]} rows, expected {self.gens[i]}")
        self.maps = {}
        for a, b in X.cover_pairs():
            M = maps.get((a, b))
            if M is None:
                M = maps.get((X.labels[a], X.labels[b]))
            self.maps[(a, b)] = zeros(self.gens[b], self.gens[a]) if M is None else intmatrix(M)

    @classmethod
    def from_sheaf(cls, F: Sheaf) -> "PresentedSheaf":
        return cls(F.X, F.ranks, [zeros(r, 0) for r in F.ranks], dict(F.maps))

    def stalk(self, x) -> FgGroup:
        i = self.X.idx(x)
        R = self.rels[i]
        S, _, _ = smith_normal_form(R) if R.size else (R, None, None)
        d = diagonal(S) if R.size else []
        nz = [v for v in d if v]
        return FgGroup.cyclic([0] * (self.gens[i] - len(nz)) + nz)

    def stalks(self) -> dict[str, FgGroup]:
        return {x: self.stalk(x) for x in self.X.labels}

    def support(self) -> list[str]:
        return [x for x, g in self.stalks().items() if not g.is_zero()]

    def is_zero(self) -> bool:
        return all(g.is_zero() for g in self.stalks().values())

    def is_torsion_free(self) -> bool:
        return all(g.is_free() for g in self.stalks().values())

    def is_torsion(self) -> bool:
        return all(g.rank == 0 for g in self.stalks().values())

    def rho(self, a: int, b: int) -> IntMatrix:
        X = self.X
        if a == b:
            return identity(self.gens[a])
        if (a, b) in self.maps:
            return self.maps[(a, b)]
        c = next(c for c in X.upper_covers[a] if X.up[c] >> b & 1)
        return matmul(self.rho(c, b), self.maps[(a, c)])

    def validate(self) -> ValidationReport:
        X = self.X
        N = self.normalized()
        for (a, b), M in N.maps.items():
            try:
                N._relation_map(a, b)
            except ValueError:
                return ValidationReport(False, f"map {X.labels[a]} -> {X.labels[b]} does not preserve relations",
                                        ((X.labels[a], X.labels[b]),))
        # functoriality modulo relations: compare reduced composites
        for x in range(X.n - 1, -1, -1):
            for y in _bits(X.up[x] & ~(1 << x)):
                paths = [c for c in X.upper_covers[x] if X.up[c] >> y & 1]
                mats = [N._reduce(y, matmul(N.rho(c, y), N.maps[(x, c)])) for c in paths]
                for M in mats[1:]:
                    if not mat_equal(M, mats[0]):
                        return ValidationReport(False, f"restrictions {X.labels[x]} -> {X.labels[y]} "
                                                       "disagree modulo relations",
                                                ((X.labels[x], X.labels[y]),))
        return ValidationReport(True)

    # -- normal form -------------------------------------------------------
    def _torsion_of(self, i: int) -> list[int]:
        """Per generator of a normalised stalk: its order (0 = free)."""
        R = self.rels[i]
        out = [0] * self.gens[i]
        for k in range(min(R.shape)):
            if R[k, k]:
                out[k] = int(R[k, k])
        return out

    def _reduce(self, b: int, M: IntMatrix) -> IntMatrix:
        """Reduce rows of a map into normalised stalk b modulo its orders."""
        M = M.copy()
        for r, d in enumerate(self._torsion_of(b)):
            if d:
                for c in range(M.shape[1]):
                    M[r, c] %= d
        return M

    def normalized(self) -> "PresentedSheaf":
        """Equivalent presentation with minimal generators per stalk."""
        if getattr(self, "_is_normal", False):
            return self
        X = self.X
        P_rows, Q_cols, newrels, gens = [], [], [], []
        for i in range(X.n):
            R = self.rels[i]
            k = self.gens[i]
            if R.shape[1] == 0 or k == 0:
                U = identity(k)
                d = [0] * k
            else:
                S, U, _ = smith_normal_form(R)
                d = diagonal(S) + [0] * (k - min(S.shape))
            keep = [j for j in range(k) if d[j] != 1]
            Uinv = unimodular_inverse(U) if k else identity(0)
            P_rows.append(U[keep, :] if keep else zeros(0, k))
            Q_cols.append(Uinv[:, keep] if keep else zeros(k, 0))
            tors = [d[j] for j in keep if d[j]]
            Rn = zeros(len(keep), len(tors))
            for t, v in enumerate(tors):
                Rn[t, t] = v
            newrels.append(Rn)
            gens.append(len(keep))
        maps = {(a, b): matmul(matmul(P_rows[b], M), Q_cols[a]) for (a, b), M in self.maps.items()}
        N = PresentedSheaf(X, gens, newrels, maps)
        N._is_normal = True
        N.maps = {k: N._reduce(k[1], M) for k, M in N.maps.items()}
        return N

    def _relation_map(self, a: int, b: int) -> IntMatrix:
        """B with R_b B = A R_a, for a normalised sheaf."""
        A = self.maps[(a, b)]
        ta = [d for d in self._torsion_of(a) if d]
        tb_all = self._torsion_of(b)
        tb = [d for d in tb_all if d]
        B = zeros(len(tb), len(ta))
        for l, dl in enumerate(ta):
            for j in range(self.gens[b]):
                v = A[j, l] * dl
                e = tb_all[j]
                if e:
                    if v % e:
                        raise ValueError("relations are not preserved")
                    B[j, l] = v // e
                elif v:
                    raise ValueError("relations are not preserved")
        return B

    def to_complex(self) -> SheafComplex:
        """The sheaf itself when torsion free, else :meth:`free_resolution`."""
        N = self.normalized()
        if any(R.shape[1] for R in N.rels):
            return self.free_resolution()
        return Sheaf(self.X, N.gens, N.maps).as_complex()

    def free_resolution(self) -> SheafComplex:
        """0 -> P1 -> P0 -> F -> 0 in degrees -1, 0.

        P0 is the sum over x of Z_{U_x} tensor Z^{gens_x}; its restrictions
        are coordinate inclusions, so it is a sheaf on the nose even though
        the normalised generator maps only compose modulo relations.  P1 is
        the kernel of P0 -> F, a subsheaf with free stalks.
        """
        N = self.normalized()
        X = self.X
        offs = []
        for y in range(X.n):
            o, k = {}, 0
            for x in _bits(X.down[y]):
                o[x] = k
                k += N.gens[x]
            offs.append((o, k))

        def incl(y, z):
            (oy, ky), (oz, kz) = offs[y], offs[z]
            M = zeros(kz, ky)
            for x, a in oy.items():
                for j in range(N.gens[x]):
                    M[oz[x] + j, a + j] = 1
            return M

        covers = X.cover_pairs()
        P0 = Sheaf(X, [k for _, k in offs], {(a, b): incl(a, b) for a, b in covers})
        bases = []
        for y in range(X.n):
            oy, ky = offs[y]
            R = N.rels[y]
            A = zeros(N.gens[y], ky + R.shape[1])
            for x, a in oy.items():
                A[:, a:a + N.gens[x]] = N.rho(x, y)
            A[:, ky:] = -R
            bases.append(image_basis(kernel_basis(A)[:ky, :]))
        maps = {}
        for a, b in covers:
            M = solve_exact(bases[b], matmul(incl(a, b), bases[a]))
            if M is None:
                raise ValueError("presentation maps do not preserve relations")
            maps[(a, b)] = M
        P1 = Sheaf(X, [B.shape[1] for B in bases], maps)
        return SheafComplex(X, {-1: P1, 0: P0}, {-1: bases})

    def to_free_sheaf(self) -> Sheaf:
        N = self.normalized()
        if any(R.shape[1] for R in N.rels):
            raise ValueError("sheaf has torsion stalks")
        return Sheaf(self.X, N.gens, N.maps)

    def is_free_presentation(self) -> bool:
        return all(R.shape[1] == 0 for R in self.normalized().rels)

    def to_json(self) -> dict:
        N = self.normalized()
        X = self.X
        out = {"poset": ps.to_json(X),
               "stalk_ranks": {x: N.gens[i] for i, x in enumerate(X.labels)},
               "cover_maps": {f"{X.labels[a]}->{X.labels[b]}": to_lists(M) for (a, b), M in N.maps.items()}}
        rels = {x: to_lists(N.rels[i]) for i, x in enumerate(X.labels) if N.rels[i].shape[1]}
        if rels:
            out["relations"] = rels
        out["stalks"] = {x: g.to_dict() for x, g in N.stalks().items()}
        return out

    def __repr__(self) -> str:
        return "PresentedSheaf(" + ", ".join(f"{x}: {g}" for x, g in self.stalks().items()) + ")"


def cohomology_sheaf(K: SheafComplex, q: int) -> PresentedSheaf:
    """H^q of a sheaf complex, with the induced restriction maps."""
    X = K.X
    gens, rels, Ks, Ls = [], [], [], []
    for i in range(X.n):
        g = K.d(q, i)
        f = K.d(q - 1, i)
        n = K.rank(q, i)
        Kb = kernel_basis(g) if g.shape[0] else identity(n)
        L = left_inverse(Kb)
        gens.append(Kb.shape[1])
        rels.append(matmul(L, f))
        Ks.append(Kb)
        Ls.append(L)
    T = K.term(q)
    maps = {(a, b): matmul(matmul(Ls[b], T.maps[(a, b)]), Ks[a]) for a, b in X.cover_pairs()}
    return PresentedSheaf(X, gens, rels, maps).normalized()


def stalk_cohomology(F) -> dict[str, GradedGroups]:
    return as_complex(F).stalk_cohomology()


def same_stalk_cohomology(F, G) -> bool:
    return stalk_cohomology(F) == stalk_cohomology(G)


# ---------------------------------------------------------------------------
# JSON

def _load_poset_ref(ref, base: Path | None) -> FinPoset:
    if isinstance(ref, Mapping):
        return ps.from_json(ref)
    p = Path(ref)
    if base is not None and not p.is_absolute():
        p = base / p
    return ps.load(p)


def sheaf_from_json(d: Mapping, base: Path | None = None, X: FinPoset | None = None):
    """Sheaf JSON -> Sheaf, or PresentedSheaf when a ``relations`` key is present."""
    if X is None:
        if "poset" not in d:
            raise ValueError("sheaf JSON needs a 'poset'")
        X = _load_poset_ref(d["poset"], base)
    ranks = {k: int(v) for k, v in d.get("stalk_ranks", {}).items()}
    for k in ranks:
        X.idx(k)
    maps = {}
    for key, M in d.get("cover_maps", {}).items():
        if "->" not in key:
            raise ValueError(f"bad cover key {key!r}")
        a, b = key.split("->", 1)
        a, b = a.strip(), b.strip()
        ra, rb = ranks.get(a, 0), ranks.get(b, 0)
        maps[(a, b)] = intmatrix(M, rb, ra) if M else zeros(rb, ra)
    for a, b in maps:
        if not ps.is_cover(X, a, b):
            raise ValueError(f"{a}->{b} is not a cover")
    if "relations" in d:
        rels = []
        for x in X.labels:
            R = d["relations"].get(x)
            r = ranks.get(x, 0)
            rels.append(intmatrix(R, r, len(R[0]) if R and R[0] else 0) if R else zeros(r, 0))
        return PresentedSheaf(X, [ranks.get(x, 0) for x in X.labels], rels,
                              {(X.idx(a), X.idx(b)): M for (a, b), M in maps.items()})
    return Sheaf(X, ranks, maps)


def sheaf_to_json(F: Sheaf, inline_poset: bool = True) -> dict:
    X = F.X
    return {"poset": ps.to_json(X),
            "stalk_ranks": {x: F.ranks[i] for i, x in enumerate(X.labels)},
            "cover_maps": {f"{X.labels[a]}->{X.labels[b]}": to_lists(M) for (a, b), M in F.maps.items()}}


def load_sheaf(path, X: FinPoset | None = None):
    p = Path(path)
    return sheaf_from_json(json.loads(p.read_text(encoding="utf-8")), p.parent, X)
