"""Test families: posets up to isomorphism, random posets and random sheaves."""
from __future__ import annotations

import random
from functools import lru_cache
from itertools import permutations

from .poset import FinPoset, _bits, adjoin_bottom
from .sheaf import PresentedSheaf, Sheaf
from .zlinalg import identity, intmatrix, matmul, unimodular_inverse, zeros


def _ideals(n: int, down: list[int]) -> list[int]:
    """All down-closed subsets of a poset on 0..n-1 given by strict down-masks."""
    return [m for m in range(1 << n) if all(down[i] & ~m == 0 for i in _bits(m))]


def _canonical(n: int, rel: frozenset) -> tuple:
    best = None
    for p in permutations(range(n)):
        key = tuple(sorted((p[a], p[b]) for a, b in rel))
        if best is None or key < best:
            best = key
    return best


@lru_cache(maxsize=None)
def _classes(n: int) -> tuple[tuple[tuple[int, int], ...], ...]:
    """Strict order relations of one representative per isomorphism class."""
    if n == 0:
        return ((),)
    seen = {}
    for rel in _classes(n - 1):
        down = [0] * (n - 1)
        for a, b in rel:
            down[b] |= 1 << a
        for ideal in _ideals(n - 1, down):
            new = frozenset(rel) | {(a, n - 1) for a in _bits(ideal)}
            key = _canonical(n, new)
            seen.setdefault(key, key)
    return tuple(sorted(seen))


def _from_rel(n: int, rel) -> FinPoset:
    labels = [str(i) for i in range(n)]
    return FinPoset(labels, [(labels[a], labels[b]) for a, b in rel])


def posets_up_to_iso(n: int) -> list[FinPoset]:
    """One poset per isomorphism class on n elements (labels '0'..)."""
    return [_from_rel(n, rel) for rel in _classes(n)]


def all_posets_up_to(n: int, start: int = 1) -> list[FinPoset]:
    return [P for k in range(start, n + 1) for P in posets_up_to_iso(k)]


def random_poset(n: int, rng: random.Random, p: float | None = None) -> FinPoset:
    """Transitive closure of a random DAG on 0..n-1 (edges i -> j, i < j)."""
    p = rng.uniform(0.2, 0.6) if p is None else p
    labels = [str(i) for i in range(n)]
    rel = [(labels[i], labels[j]) for i in range(n) for j in range(i + 1, n) if rng.random() < p]
    return FinPoset(labels, rel)


def random_posets(count: int, sizes, seed: int = 0) -> list[FinPoset]:
    rng = random.Random(seed)
    sizes = list(sizes)
    return [random_poset(rng.choice(sizes), rng) for _ in range(count)]


def local_posets_up_to(n: int) -> list[FinPoset]:
    """Posets with a unique minimum on at most n elements, up to isomorphism."""
    return [adjoin_bottom(P, "o") for P in all_posets_up_to(n - 1, start=0)]


# ---------------------------------------------------------------------------
# random sheaves

def random_unimodular(k: int, rng: random.Random, steps: int = 6):
    U = identity(k)
    for _ in range(steps if k > 1 else 0):
        i, j = rng.sample(range(k), 2)
        U[i, :] = U[i, :] + rng.choice((-1, 1)) * U[j, :]
    if k and rng.random() < 0.5:
        U[0, :] = -U[0, :]
    return U


def _random_locally_closed(X: FinPoset, rng: random.Random) -> int:
    a = rng.randrange(X.n)
    b = rng.choice(list(_bits(X.up[a])))
    r = rng.random()
    if r < 0.25:
        return X.up[a]
    if r < 0.5:
        return X.down[b]
    if r < 0.6:
        return X.full
    return X.up[a] & X.down[b]


def random_sum_sheaf(X: FinPoset, rng: random.Random, max_rank: int = 2, parts: int | None = None) -> Sheaf:
    """Random sum of sheaves Z_S (S locally closed), twisted by a stalkwise basis change."""
    parts = rng.randint(1, max_rank) if parts is None else parts
    sets = [_random_locally_closed(X, rng) for _ in range(parts)]
    ranks = [sum(m >> i & 1 for m in sets) for i in range(X.n)]
    bases = [random_unimodular(r, rng) for r in ranks]
    maps = {}
    for a, b in X.cover_pairs():
        M = zeros(ranks[b], ranks[a])
        ia = ib = 0
        for m in sets:
            inb = m >> b & 1
            if m >> a & 1 and inb:
                M[ib, ia] = 1
            ia += m >> a & 1
            ib += inb
        # conjugate: new basis = U * old coordinates
        maps[(a, b)] = matmul(matmul(bases[b], M), unimodular_inverse(bases[a]))
    return Sheaf(X, ranks, maps)


def random_cokernel(X: FinPoset, G: Sheaf, rng: random.Random, relations: int = 2,
                    multipliers=(1, 1, 2, 3), torsion_k: int | None = None) -> PresentedSheaf:
    """G modulo images of Z_{U_x} -> G (1 |-> k v, v in G_x), optionally modulo k G."""
    gens = list(G.ranks)
    cols = [[] for _ in range(X.n)]
    for _ in range(relations):
        x = rng.randrange(X.n)
        if not G.ranks[x]:
            continue
        k = rng.choice(multipliers)
        v = intmatrix([[k * rng.randint(-1, 1)] for _ in range(G.ranks[x])], G.ranks[x], 1)
        for y in _bits(X.up[x]):
            cols[y].append(matmul(G.rho(x, y), v))
    if torsion_k:
        for y in range(X.n):
            for j in range(gens[y]):
                e = zeros(gens[y], 1)
                e[j, 0] = torsion_k
                cols[y].append(e)
    rels = []
    for y in range(X.n):
        R = zeros(gens[y], len(cols[y]))
        for c, v in enumerate(cols[y]):
            R[:, c] = v[:, 0]
        rels.append(R)
    return PresentedSheaf(X, gens, rels, dict(G.maps)).normalized()


def random_free_sheaf(X: FinPoset, rng: random.Random, max_rank: int = 2, tries: int = 50) -> Sheaf:
    """Random sheaf with free stalks of rank <= max_rank (not just a sum of Z_S)."""
    for _ in range(tries):
        G = random_sum_sheaf(X, rng, max_rank)
        if rng.random() < 0.5:
            P = random_cokernel(X, G, rng, relations=1, multipliers=(1,))
            if P.is_free_presentation():
                F = P.to_free_sheaf()
                if max(F.ranks, default=0) <= max_rank:
                    return F
            continue
        return G
    return random_sum_sheaf(X, rng, max_rank)


def random_sheaf(X: FinPoset, rng: random.Random, kind: str = "any", max_rank: int = 2) -> PresentedSheaf:
    """kind: 'free', 'torsion' or 'any' (cokernels, possibly mixed)."""
    if kind == "free":
        return PresentedSheaf.from_sheaf(random_free_sheaf(X, rng, max_rank))
    G = random_sum_sheaf(X, rng, max_rank)
    if kind == "torsion":
        return random_cokernel(X, G, rng, relations=rng.randint(0, 2), torsion_k=rng.choice((2, 3)))
    return random_cokernel(X, G, rng, relations=rng.randint(1, 3))
