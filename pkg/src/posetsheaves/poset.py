"""Finite T0 spaces as posets.

Opens are up-sets: ``U_x = {p >= x}`` is the smallest open set containing
``x`` and ``C_x = {p <= x}`` is its closure.  Elements are stored in a linear
extension of the order, so ``x < y`` implies ``index(x) < index(y)``; subsets
are handled internally as Python-int bitmasks.
"""
from __future__ import annotations

import heapq
import json
from collections import deque
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Iterator, Mapping, Sequence


def _bits(mask: int) -> Iterator[int]:
    while mask:
        low = mask & -mask
        yield low.bit_length() - 1
        mask ^= low


def _popcount(mask: int) -> int:
    return bin(mask).count("1")


class FinPoset:
    """Finite poset with string labels.

    ``relations`` may be any set of pairs ``(a, b)`` meaning ``a < b``; the
    order is their transitive closure and the stored covers are its
    transitive reduction.
    """

    def __init__(self, elements: Iterable, relations: Iterable[tuple] = ()):
        given = [str(e) for e in elements]
        if len(set(given)) != len(given):
            raise ValueError("duplicate element labels")
        pos = {e: i for i, e in enumerate(given)}
        rel = []
        for a, b in relations:
            a, b = str(a), str(b)
            if a not in pos or b not in pos:
                raise ValueError(f"relation {a} < {b} mentions an unknown element")
            if a == b:
                raise ValueError(f"reflexive relation {a} < {a}")
            rel.append((pos[a], pos[b]))
        n = len(given)
        succ = [set() for _ in range(n)]
        indeg = [0] * n
        for a, b in set(rel):
            succ[a].add(b)
        for a in range(n):
            for b in succ[a]:
                indeg[b] += 1
        # stable topological order: smallest given position first
        ready = [i for i in range(n) if indeg[i] == 0]
        heapq.heapify(ready)
        order = []
        while ready:
            i = heapq.heappop(ready)
            order.append(i)
            for j in succ[i]:
                indeg[j] -= 1
                if indeg[j] == 0:
                    heapq.heappush(ready, j)
        if len(order) != n:
            raise ValueError("relations contain a cycle")
        newidx = {old: k for k, old in enumerate(order)}
        self.labels: tuple[str, ...] = tuple(given[o] for o in order)
        self.index: dict[str, int] = {l: k for k, l in enumerate(self.labels)}
        self.n = n
        up = [1 << k for k in range(n)]
        for k in range(n - 1, -1, -1):
            for j in succ[order[k]]:
                up[k] |= up[newidx[j]]
        self.up: tuple[int, ...] = tuple(up)
        down = [1 << k for k in range(n)]
        for k in range(n):
            for j in _bits(up[k] & ~(1 << k)):
                down[j] |= 1 << k
        self.down: tuple[int, ...] = tuple(down)
        ucov = []
        for k in range(n):
            strict = up[k] & ~(1 << k)
            covs = [j for j in _bits(strict) if down[j] & strict == 1 << j]
            ucov.append(tuple(covs))
        self.upper_covers: tuple[tuple[int, ...], ...] = tuple(ucov)
        lcov = [[] for _ in range(n)]
        for k in range(n):
            for j in ucov[k]:
                lcov[j].append(k)
        self.lower_covers: tuple[tuple[int, ...], ...] = tuple(tuple(l) for l in lcov)
        self.full = (1 << n) - 1
        self._cache: dict = {}

    # -- basic queries -----------------------------------------------------
    @property
    def elements(self) -> tuple[str, ...]:
        return self.labels

    @property
    def covers(self) -> list[tuple[str, str]]:
        return [(self.labels[a], self.labels[b]) for a in range(self.n) for b in self.upper_covers[a]]

    def cover_pairs(self) -> list[tuple[int, int]]:
        return [(a, b) for a in range(self.n) for b in self.upper_covers[a]]

    def __len__(self) -> int:
        return self.n

    def __iter__(self):
        return iter(self.labels)

    def __contains__(self, label) -> bool:
        return label in self.index

    def __repr__(self) -> str:
        return f"FinPoset({list(self.labels)}, covers={self.covers})"

    def __eq__(self, other) -> bool:
        if not isinstance(other, FinPoset):
            return NotImplemented
        return set(self.labels) == set(other.labels) and set(self.covers) == set(other.covers)

    def __hash__(self):
        return hash((frozenset(self.labels), frozenset(self.covers)))

    def idx(self, x) -> int:
        if isinstance(x, int) and not isinstance(x, bool):
            return x
        try:
            return self.index[str(x)]
        except KeyError:
            raise KeyError(f"unknown element {x!r}") from None

    def leq(self, x, y) -> bool:
        return bool(self.up[self.idx(x)] >> self.idx(y) & 1)

    def lt(self, x, y) -> bool:
        return self.idx(x) != self.idx(y) and self.leq(x, y)

    def mask_of(self, labels: Iterable) -> int:
        m = 0
        for x in labels:
            m |= 1 << self.idx(x)
        return m

    def labels_of(self, mask: int) -> list[str]:
        return [self.labels[i] for i in _bits(mask)]

    def is_up_closed(self, mask: int) -> bool:
        return all(self.up[i] & ~mask == 0 for i in _bits(mask))

    def is_down_closed(self, mask: int) -> bool:
        return all(self.down[i] & ~mask == 0 for i in _bits(mask))

    def is_convex(self, mask: int) -> bool:
        upc = 0
        for i in _bits(mask):
            upc |= self.up[i]
        downc = 0
        for i in _bits(mask):
            downc |= self.down[i]
        return upc & downc == mask

    def down_closure(self, mask: int) -> int:
        out = 0
        for i in _bits(mask):
            out |= self.down[i]
        return out

    def up_closure(self, mask: int) -> int:
        out = 0
        for i in _bits(mask):
            out |= self.up[i]
        return out

    def minimal(self, mask: int | None = None) -> list[int]:
        mask = self.full if mask is None else mask
        return [i for i in _bits(mask) if self.down[i] & mask == 1 << i]

    def maximal(self, mask: int | None = None) -> list[int]:
        mask = self.full if mask is None else mask
        return [i for i in _bits(mask) if self.up[i] & mask == 1 << i]

    def induced(self, mask: int) -> "FinPoset":
        """Subposet on the elements of ``mask`` with the induced order."""
        key = ("induced", mask)
        if key in self._cache:
            return self._cache[key]
        idxs = list(_bits(mask))
        rel = []
        for i in idxs:
            strict = self.up[i] & mask & ~(1 << i)
            for j in _bits(strict):
                if self.down[j] & strict == 1 << j:
                    rel.append((self.labels[i], self.labels[j]))
        P = FinPoset([self.labels[i] for i in idxs], rel)
        if len(self._cache) < 4096:
            self._cache[key] = P
        return P

    def subposet(self, labels: Iterable) -> "FinPoset":
        return self.induced(self.mask_of(labels))

    # -- heights and lengths ---------------------------------------------
    def heights(self, mask: int | None = None) -> dict[int, int]:
        """Length of the longest chain ending at each element of ``mask``."""
        mask = self.full if mask is None else mask
        h = {}
        for i in _bits(mask):
            below = self.down[i] & mask & ~(1 << i)
            h[i] = 1 + max((h[j] for j in _bits(below)), default=-1)
        return h

    def dim_of_mask(self, mask: int) -> int:
        if not mask:
            return -1
        return max(self.heights(mask).values())

    @property
    def dim(self) -> int:
        if "dim" not in self._cache:
            self._cache["dim"] = self.dim_of_mask(self.full)
        return self._cache["dim"]

    def dim_down(self, x) -> int:
        """dim C_x."""
        i = self.idx(x)
        return self.dim_of_mask(self.down[i])

    def dim_up(self, x) -> int:
        """dim U_x."""
        i = self.idx(x)
        return self.dim_of_mask(self.up[i])

    def path_lengths(self) -> tuple[list[list[int | None]], list[list[int | None]]]:
        """Shortest and longest saturated chain lengths between comparable pairs."""
        if "paths" in self._cache:
            return self._cache["paths"]
        n = self.n
        lo: list[list[int | None]] = [[None] * n for _ in range(n)]
        hi: list[list[int | None]] = [[None] * n for _ in range(n)]
        for x in range(n):
            lo[x][x] = hi[x][x] = 0
            for y in _bits(self.up[x] & ~(1 << x)):
                # y is processed in index order, so its lower covers inside [x, y] are done
                cands = [z for z in self.lower_covers[y] if self.up[x] >> z & 1]
                lo[x][y] = 1 + min(lo[x][z] for z in cands)
                hi[x][y] = 1 + max(hi[x][z] for z in cands)
        self._cache["paths"] = (lo, hi)
        return lo, hi

    # -- reindexed views ---------------------------------------------------
    def chain_masks(self, mask: int | None = None, max_len: int | None = None,
                    start: int | None = None) -> Iterator[tuple[int, ...]]:
        """Chains as index tuples, lexicographic, restricted to ``mask``."""
        mask = self.full if mask is None else mask
        up = self.up

        def rec(ch, avail):
            yield ch
            if max_len is not None and len(ch) > max_len:
                return
            for j in _bits(avail):
                yield from rec(ch + (j,), avail & up[j] & ~(1 << j))

        starts = [start] if start is not None else list(_bits(mask))
        for s in starts:
            if not mask >> s & 1:
                continue
            for ch in rec((s,), mask & up[s] & ~(1 << s)):
                if max_len is None or len(ch) - 1 <= max_len:
                    yield ch

    def chains_by_length(self, mask: int | None = None) -> dict[int, list[tuple[int, ...]]]:
        out: dict[int, list[tuple[int, ...]]] = {}
        for ch in self.chain_masks(mask):
            out.setdefault(len(ch) - 1, []).append(ch)
        return out

    def core_mask(self, mask: int | None = None) -> int:
        """Remove beat points until none is left (homotopy-type preserving)."""
        mask = self.full if mask is None else mask
        up, down = self.up, self.down
        changed = True
        while changed:
            changed = False
            for x in _bits(mask):
                bx = 1 << x
                above = up[x] & mask & ~bx
                if above:
                    m = (above & -above).bit_length() - 1
                    if above & ~up[m] == 0:
                        mask &= ~bx
                        changed = True
                        continue
                below = down[x] & mask & ~bx
                if below:
                    h = below.bit_length() - 1
                    if below & ~down[h] == 0:
                        mask &= ~bx
                        changed = True
        return mask


# ---------------------------------------------------------------------------
# subspaces, intervals

@dataclass(frozen=True)
class SubSpace:
    parent: FinPoset
    mask: int

    @classmethod
    def of(cls, X: FinPoset, labels: Iterable) -> "SubSpace":
        return cls(X, X.mask_of(labels))

    @property
    def elements(self) -> list[str]:
        return self.parent.labels_of(self.mask)

    @property
    def is_open(self) -> bool:
        return self.parent.is_up_closed(self.mask)

    @property
    def is_closed(self) -> bool:
        return self.parent.is_down_closed(self.mask)

    @property
    def is_locally_closed(self) -> bool:
        return self.parent.is_convex(self.mask)

    @property
    def kind(self) -> str:
        if self.is_open:
            return "open"
        if self.is_closed:
            return "closed"
        if self.is_locally_closed:
            return "locally-closed"
        return "arbitrary"

    def poset(self) -> FinPoset:
        return self.parent.induced(self.mask)

    def __contains__(self, x) -> bool:
        return bool(self.mask >> self.parent.idx(x) & 1)

    def __len__(self) -> int:
        return _popcount(self.mask)

    def __iter__(self):
        return iter(self.elements)


def as_mask(X: FinPoset, S) -> int:
    if isinstance(S, SubSpace):
        return S.mask
    if isinstance(S, int) and not isinstance(S, bool):
        return S
    if isinstance(S, str):
        return X.mask_of([S])
    return X.mask_of(S)


def up_set(X: FinPoset, x) -> SubSpace:
    return SubSpace(X, X.up[X.idx(x)])


def down_set(X: FinPoset, x) -> SubSpace:
    return SubSpace(X, X.down[X.idx(x)])


def punctured_up(X: FinPoset, x) -> FinPoset:
    """U_x^*."""
    i = X.idx(x)
    return X.induced(X.up[i] & ~(1 << i))


def punctured_down(X: FinPoset, x) -> FinPoset:
    """C_x^*."""
    i = X.idx(x)
    return X.induced(X.down[i] & ~(1 << i))


def interval_mask(X: FinPoset, x, y, closed: bool = False) -> int:
    i, j = X.idx(x), X.idx(y)
    if not X.up[i] >> j & 1:
        raise ValueError(f"{X.labels[i]} is not below {X.labels[j]}")
    m = X.up[i] & X.down[j]
    return m if closed else m & ~(1 << i) & ~(1 << j)


def open_interval(X: FinPoset, x, y) -> FinPoset:
    return X.induced(interval_mask(X, x, y))


def closed_interval(X: FinPoset, x, y) -> FinPoset:
    return X.induced(interval_mask(X, x, y, closed=True))


def is_cover(X: FinPoset, x, y) -> bool:
    return X.idx(y) in X.upper_covers[X.idx(x)]


def connected_components(X: FinPoset, mask: int | None = None) -> list[int]:
    mask = X.full if mask is None else mask
    comps = []
    left = mask
    while left:
        s = (left & -left).bit_length() - 1
        comp = 1 << s
        frontier = [s]
        while frontier:
            v = frontier.pop()
            nb = (X.up[v] | X.down[v]) & mask & ~comp
            comp |= nb
            frontier.extend(_bits(nb))
        comps.append(comp)
        left &= ~comp
    return comps


# ---------------------------------------------------------------------------
# structure

@dataclass(frozen=True)
class StructureReport:
    dim: int
    is_pure: bool
    is_catenary: bool
    is_local: bool
    is_irreducible: bool
    is_connected: bool
    closed_points: list[str]
    generic_points: list[str]

    def to_json(self) -> dict:
        return dict(self.__dict__)


def is_pure(X: FinPoset, mask: int | None = None) -> bool:
    """All maximal chains have the same length."""
    mask = X.full if mask is None else mask
    if not mask:
        return True
    P = X.induced(mask) if mask != X.full else X
    lo, hi = _extreme_chain_lengths(P)
    return lo == hi


def _extreme_chain_lengths(P: FinPoset) -> tuple[int, int]:
    """Shortest and longest maximal chain."""
    short = {}
    long_ = {}
    for i in range(P.n):
        lc = P.lower_covers[i]
        if not lc:
            short[i] = long_[i] = 0
        else:
            short[i] = 1 + min(short[j] for j in lc)
            long_[i] = 1 + max(long_[j] for j in lc)
    tops = P.maximal()
    return min(short[t] for t in tops), max(long_[t] for t in tops)


def is_catenary(X: FinPoset) -> bool:
    lo, hi = X.path_lengths()
    return all(lo[i][j] == hi[i][j] for i in range(X.n) for j in range(X.n) if lo[i][j] is not None)


def catenary_witness(X: FinPoset) -> tuple[str, str] | None:
    lo, hi = X.path_lengths()
    for i in range(X.n):
        for j in range(X.n):
            if lo[i][j] is not None and lo[i][j] != hi[i][j]:
                return X.labels[i], X.labels[j]
    return None


def structure_report(X: FinPoset) -> StructureReport:
    mins = X.minimal()
    maxs = X.maximal()
    return StructureReport(
        dim=X.dim,
        is_pure=is_pure(X),
        is_catenary=is_catenary(X),
        is_local=len(mins) == 1,
        is_irreducible=len(maxs) == 1,
        is_connected=len(connected_components(X)) == 1,
        closed_points=[X.labels[i] for i in mins],
        generic_points=[X.labels[i] for i in maxs],
    )


# ---------------------------------------------------------------------------
# codimension functions

@dataclass(frozen=True)
class CodimFunction:
    values: Mapping[str, int]

    def __getitem__(self, x: str) -> int:
        return self.values[x]

    def is_valid_on(self, X: FinPoset) -> bool:
        return all(self.values[a] == self.values[b] + 1 for a, b in X.covers)

    def as_tuple(self, X: FinPoset) -> tuple[int, ...]:
        return tuple(self.values[x] for x in X.labels)


def codimension_function(X: FinPoset, anchors: Mapping[str, int] | None = None,
                         preset: str | None = None) -> CodimFunction | None:
    """Solve d(x) = d(y) + 1 over all covers x < y.

    Each component is pinned by its anchor, or by value 0 at its
    lexicographically first maximal element.  ``preset='local'`` uses
    -dim C_x and ``preset='irreducible'`` uses dim U_x instead of solving;
    None is returned whenever the result fails the cover condition.
    """
    if preset is not None:
        if preset == "local":
            vals = {x: -X.dim_down(x) for x in X.labels}
        elif preset == "irreducible":
            vals = {x: X.dim_up(x) for x in X.labels}
        else:
            raise ValueError(f"unknown preset {preset!r}")
        phi = CodimFunction(vals)
        return phi if phi.is_valid_on(X) else None
    anchors = dict(anchors or {})
    for a in anchors:
        X.idx(a)
    vals: dict[int, int] = {}
    for comp in connected_components(X):
        pinned = [a for a in anchors if comp >> X.idx(a) & 1]
        if len(pinned) > 1:
            raise ValueError(f"several anchors in one component: {pinned}")
        if pinned:
            root, v0 = X.idx(pinned[0]), int(anchors[pinned[0]])
        else:
            root = min(X.maximal(comp), key=lambda i: X.labels[i])
            v0 = 0
        vals[root] = v0
        queue = deque([root])
        while queue:
            v = queue.popleft()
            for w in X.upper_covers[v]:
                want = vals[v] - 1
                if w in vals:
                    if vals[w] != want:
                        return None
                else:
                    vals[w] = want
                    queue.append(w)
            for w in X.lower_covers[v]:
                want = vals[v] + 1
                if w in vals:
                    if vals[w] != want:
                        return None
                else:
                    vals[w] = want
                    queue.append(w)
    return CodimFunction({X.labels[i]: v for i, v in vals.items()})


# ---------------------------------------------------------------------------
# constructions

def opposite(X: FinPoset) -> FinPoset:
    return FinPoset(X.labels, [(b, a) for a, b in X.covers])


def product_label(x: str, y: str) -> str:
    return f"({x},{y})"


def product(X: FinPoset, Y: FinPoset) -> FinPoset:
    elems = [product_label(x, y) for x in X.labels for y in Y.labels]
    rel = []
    for a, b in X.covers:
        for y in Y.labels:
            rel.append((product_label(a, y), product_label(b, y)))
    for x in X.labels:
        for a, b in Y.covers:
            rel.append((product_label(x, a), product_label(x, b)))
    return FinPoset(elems, rel)


def chain_label(labels: Sequence[str]) -> str:
    return "/".join(labels)


def barycentric(X: FinPoset) -> FinPoset:
    """Nonempty chains of X ordered by inclusion."""
    chs = list(X.chain_masks())
    labs = [chain_label([X.labels[i] for i in c]) for c in chs]
    rel = []
    for c, l in zip(chs, labs):
        if len(c) > 1:
            for k in range(len(c)):
                face = c[:k] + c[k + 1:]
                rel.append((chain_label([X.labels[i] for i in face]), l))
    return FinPoset(labs, rel)


def chains(X: FinPoset, max_length: int | None = None, start=None,
           within=None) -> Iterator[tuple[str, ...]]:
    """Chains x0 < ... < xp as label tuples, lexicographic by element index."""
    mask = X.full if within is None else as_mask(X, within)
    s = None if start is None else X.idx(start)
    for ch in X.chain_masks(mask, max_length, s):
        yield tuple(X.labels[i] for i in ch)


def is_isomorphic(X: FinPoset, Y: FinPoset) -> bool:
    """Brute-force order isomorphism test (fine for desk-sized posets)."""
    return find_isomorphism(X, Y) is not None


def find_isomorphism(X: FinPoset, Y: FinPoset) -> dict[str, str] | None:
    if X.n != Y.n or len(X.covers) != len(Y.covers):
        return None
    n = X.n

    def sig(P, i):
        return (_popcount(P.up[i]), _popcount(P.down[i]), len(P.upper_covers[i]), len(P.lower_covers[i]))

    sx = [sig(X, i) for i in range(n)]
    sy = [sig(Y, i) for i in range(n)]
    if sorted(sx) != sorted(sy):
        return None
    assign = [-1] * n
    used = [False] * n

    def ok(i, j):
        for k in range(i):
            a = assign[k]
            if bool(X.up[k] >> i & 1) != bool(Y.up[a] >> j & 1):
                return False
            if bool(X.up[i] >> k & 1) != bool(Y.up[j] >> a & 1):
                return False
        return True

    def rec(i):
        if i == n:
            return True
        for j in range(n):
            if not used[j] and sx[i] == sy[j] and ok(i, j):
                assign[i] = j
                used[j] = True
                if rec(i + 1):
                    return True
                used[j] = False
        return False

    if rec(0):
        return {X.labels[i]: Y.labels[assign[i]] for i in range(n)}
    return None


def adjoin_bottom_top(X: FinPoset, bottom: str = "0^", top: str = "1^") -> FinPoset:
    rel = list(X.covers)
    for m in X.minimal():
        rel.append((bottom, X.labels[m]))
    for m in X.maximal():
        rel.append((X.labels[m], top))
    if X.n == 0:
        rel.append((bottom, top))
    return FinPoset([bottom, *X.labels, top], rel)


def adjoin_bottom(X: FinPoset, bottom: str = "0") -> FinPoset:
    rel = list(X.covers) + [(bottom, X.labels[m]) for m in X.minimal()]
    return FinPoset([bottom, *X.labels], rel)


# ---------------------------------------------------------------------------
# a few named posets

def point() -> FinPoset:
    return FinPoset(["pt"])


def chain_poset(n: int) -> FinPoset:
    """0 < 1 < ... < n-1."""
    labs = [str(i) for i in range(n)]
    return FinPoset(labs, list(zip(labs, labs[1:])))


def v_poset() -> FinPoset:
    return FinPoset(["o", "a", "b"], [("o", "a"), ("o", "b")])


def circle_poset() -> FinPoset:
    return FinPoset(["x1", "x2", "y1", "y2"], [(x, y) for x in ("x1", "x2") for y in ("y1", "y2")])


def p5_poset() -> FinPoset:
    return FinPoset(["o", "a", "b", "c", "m"], [("o", "a"), ("a", "b"), ("b", "c"), ("o", "m"), ("m", "c")])


def e11_poset() -> FinPoset:
    return FinPoset(["o", "a", "b", "c", "t"],
                    [("o", "a"), ("o", "b"), ("o", "c"), ("a", "t"), ("b", "t"), ("c", "t")])


# ---------------------------------------------------------------------------
# IO

def to_json(X: FinPoset) -> dict:
    return {"elements": list(X.labels), "covers": [list(c) for c in X.covers]}


def from_json(d: Mapping) -> FinPoset:
    if "elements" not in d:
        raise ValueError("poset JSON needs an 'elements' list")
    return FinPoset(d["elements"], [tuple(c) for c in d.get("covers", [])])


def to_text(X: FinPoset) -> str:
    lines = []
    isolated = [x for i, x in enumerate(X.labels) if not X.upper_covers[i] and not X.lower_covers[i]]
    for x in isolated:
        lines.append(x)
    for a, b in X.covers:
        lines.append(f"{a} < {b}")
    return "\n".join(lines) + ("\n" if lines else "")


def from_text(text: str) -> FinPoset:
    """Lines ``a < b`` (chains ``a < b < c`` allowed) or a bare label; ``#`` starts a comment."""
    elems: list[str] = []
    seen = set()
    rel = []

    def add(e):
        if e not in seen:
            seen.add(e)
            elems.append(e)

    for raw in text.splitlines():
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = [p.strip() for p in line.split("<")]
        if any(not p for p in parts):
            raise ValueError(f"malformed line: {raw!r}")
        for p in parts:
            add(p)
        rel.extend(zip(parts, parts[1:]))
    return FinPoset(elems, rel)


def load(path) -> FinPoset:
    p = Path(path)
    text = p.read_text(encoding="utf-8")
    if p.suffix == ".json" or text.lstrip().startswith("{"):
        return from_json(json.loads(text))
    return from_text(text)

