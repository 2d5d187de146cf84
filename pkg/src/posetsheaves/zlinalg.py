"""Exact integer linear algebra.

Dense matrices are numpy arrays of dtype ``object`` holding Python ints, so
every entry has arbitrary precision.  Differentials of large chain complexes
are kept in :class:`SparseMatrix` (a list of row dicts) and reduced with a
unit-pivot elimination before any dense Smith normal form is attempted.

    >>> S, U, V = smith_normal_form([[2, 4], [6, 8]])
    >>> [S[0, 0], S[1, 1]]
    [2, 4]
    >>> FgGroup.cyclic([2, 2]) == FgGroup.cyclic([4])
    False
"""
from __future__ import annotations

import heapq
from dataclasses import dataclass, field
from math import gcd
from typing import Iterable, Mapping, Sequence

import numpy as np

IntMatrix = np.ndarray


def intmatrix(data, rows: int | None = None, cols: int | None = None) -> IntMatrix:
    """Coerce nested sequences (or an array) to an object-dtype integer matrix."""
    if isinstance(data, np.ndarray) and data.dtype == object and data.ndim == 2:
        return data
    if isinstance(data, np.ndarray):
        if data.ndim != 2:
            raise ValueError("expected a 2-d array")
        rows, cols = data.shape
        data = data.tolist()
    rows_l = [list(r) for r in data]
    if rows is None:
        rows = len(rows_l)
    if cols is None:
        cols = len(rows_l[0]) if rows_l else 0
    out = np.zeros((rows, cols), dtype=object)
    for i, r in enumerate(rows_l):
        if len(r) != cols:
            raise ValueError("ragged matrix")
        for j, v in enumerate(r):
            if int(v) != v:
                raise ValueError(f"non-integer entry {v!r}")
            out[i, j] = int(v)
    return out


def zeros(rows: int, cols: int) -> IntMatrix:
    return np.zeros((rows, cols), dtype=object)


def identity(n: int) -> IntMatrix:
    m = np.zeros((n, n), dtype=object)
    for i in range(n):
        m[i, i] = 1
    return m


def matmul(a: IntMatrix, b: IntMatrix) -> IntMatrix:
    if a.shape[1] != b.shape[0]:
        raise ValueError(f"shape mismatch {a.shape} @ {b.shape}")
    if a.shape[1] == 0:
        return zeros(a.shape[0], b.shape[1])
    return a.dot(b)


def kron(a: IntMatrix, b: IntMatrix) -> IntMatrix:
    out = zeros(a.shape[0] * b.shape[0], a.shape[1] * b.shape[1])
    if out.size:
        out[:, :] = np.kron(a, b)
    return out


def is_zero_matrix(a: IntMatrix) -> bool:
    return all(v == 0 for v in a.flat)


def mat_equal(a: IntMatrix, b: IntMatrix) -> bool:
    return a.shape == b.shape and all(x == y for x, y in zip(a.flat, b.flat))


def to_lists(a: IntMatrix) -> list[list[int]]:
    return [[int(v) for v in row] for row in a]


# ---------------------------------------------------------------------------
# Smith normal form

def _snf_lists(A: list[list[int]], U: list[list[int]] | None, V: list[list[int]] | None) -> None:
    """In-place Smith reduction of ``A``; row ops are mirrored on ``U`` and
    column ops on ``V`` when those are given."""
    m = len(A)
    n = len(A[0]) if m else 0

    def swap_rows(i, j):
        A[i], A[j] = A[j], A[i]
        if U is not None:
            U[i], U[j] = U[j], U[i]

    def swap_cols(i, j):
        for row in A:
            row[i], row[j] = row[j], row[i]
        if V is not None:
            for row in V:
                row[i], row[j] = row[j], row[i]

    def add_row(src, dst, q):  # row_dst += q * row_src
        rs, rd = A[src], A[dst]
        for k in range(n):
            if rs[k]:
                rd[k] += q * rs[k]
        if U is not None:
            us, ud = U[src], U[dst]
            for k in range(len(us)):
                if us[k]:
                    ud[k] += q * us[k]

    def add_col(src, dst, q):  # col_dst += q * col_src
        for row in A:
            if row[src]:
                row[dst] += q * row[src]
        if V is not None:
            for row in V:
                if row[src]:
                    row[dst] += q * row[src]

    t = 0
    while t < min(m, n):
        best = None
        for i in range(t, m):
            row = A[i]
            for j in range(t, n):
                v = row[j]
                if v and (best is None or abs(v) < best[0]):
                    best = (abs(v), i, j)
                    if best[0] == 1:
                        break
            if best is not None and best[0] == 1:
                break
        if best is None:
            break
        _, i, j = best
        if i != t:
            swap_rows(i, t)
        if j != t:
            swap_cols(j, t)
        while True:
            p = A[t][t]
            moved = False
            for i in range(t + 1, m):
                if A[i][t]:
                    q = A[i][t] // p
                    add_row(t, i, -q)
                    if A[i][t]:
                        moved = True
            for j in range(t + 1, n):
                if A[t][j]:
                    q = A[t][j] // p
                    add_col(t, j, -q)
                    if A[t][j]:
                        moved = True
            if moved:
                # a remainder smaller than the pivot survived; bring the
                # smallest one to the pivot position and sweep again
                best = None
                for i in range(t + 1, m):
                    v = A[i][t]
                    if v and (best is None or abs(v) < best[0]):
                        best = (abs(v), i, t)
                for j in range(t + 1, n):
                    v = A[t][j]
                    if v and (best is None or abs(v) < best[0]):
                        best = (abs(v), t, j)
                _, i, j = best
                if i != t:
                    swap_rows(i, t)
                if j != t:
                    swap_cols(j, t)
                continue
            # column and row of the pivot are clear: enforce divisibility
            bad = None
            for i in range(t + 1, m):
                row = A[i]
                for j in range(t + 1, n):
                    if row[j] % p:
                        bad = i
                        break
                if bad is not None:
                    break
            if bad is None:
                break
            add_row(bad, t, 1)
        if A[t][t] < 0:
            A[t] = [-v for v in A[t]]
            if U is not None:
                U[t] = [-v for v in U[t]]
        t += 1


def smith_normal_form(M) -> tuple[IntMatrix, IntMatrix, IntMatrix]:
    """Return ``(S, U, V)`` with ``S = U @ M @ V`` in Smith normal form and
    ``U``, ``V`` unimodular."""
    M = intmatrix(M)
    m, n = M.shape
    A = to_lists(M)
    U = [[int(i == j) for j in range(m)] for i in range(m)]
    V = [[int(i == j) for j in range(n)] for i in range(n)]
    _snf_lists(A, U, V)
    return intmatrix(A, m, n), intmatrix(U, m, m), intmatrix(V, n, n)


def diagonal(S: IntMatrix) -> list[int]:
    return [int(S[i, i]) for i in range(min(S.shape))]


def _dense_factors(rows: list[list[int]], ncols: int) -> list[int]:
    """Nonzero invariant factors of a dense matrix given as lists."""
    if not rows or not ncols:
        return []
    A = [list(r) for r in rows]
    _snf_lists(A, None, None)
    return [A[i][i] for i in range(min(len(A), ncols)) if A[i][i]]


# ---------------------------------------------------------------------------
# sparse matrices

class SparseMatrix:
    """Integer matrix stored as one ``{col: value}`` dict per row."""

    __slots__ = ("nrows", "ncols", "rows")

    def __init__(self, nrows: int, ncols: int, rows: list[dict[int, int]] | None = None):
        self.nrows = nrows
        self.ncols = ncols
        self.rows = rows if rows is not None else [dict() for _ in range(nrows)]

    @classmethod
    def from_dense(cls, M) -> "SparseMatrix":
        M = intmatrix(M)
        rows = [{j: int(v) for j, v in enumerate(r) if v} for r in M]
        return cls(M.shape[0], M.shape[1], rows)

    @classmethod
    def from_entries(cls, nrows: int, ncols: int, entries: Iterable[tuple[int, int, int]]) -> "SparseMatrix":
        rows: list[dict[int, int]] = [dict() for _ in range(nrows)]
        for i, j, v in entries:
            if v:
                r = rows[i]
                s = r.get(j, 0) + v
                if s:
                    r[j] = s
                else:
                    r.pop(j, None)
        return cls(nrows, ncols, rows)

    def add(self, i: int, j: int, v: int) -> None:
        if not v:
            return
        r = self.rows[i]
        s = r.get(j, 0) + v
        if s:
            r[j] = s
        else:
            del r[j]

    @property
    def shape(self) -> tuple[int, int]:
        return (self.nrows, self.ncols)

    def to_dense(self) -> IntMatrix:
        out = zeros(self.nrows, self.ncols)
        for i, r in enumerate(self.rows):
            for j, v in r.items():
                out[i, j] = v
        return out

    def transpose(self) -> "SparseMatrix":
        rows: list[dict[int, int]] = [dict() for _ in range(self.ncols)]
        for i, r in enumerate(self.rows):
            for j, v in r.items():
                rows[j][i] = v
        return SparseMatrix(self.ncols, self.nrows, rows)

    def matmul(self, other: "SparseMatrix") -> "SparseMatrix":
        if self.ncols != other.nrows:
            raise ValueError("shape mismatch")
        out = []
        orows = other.rows
        for r in self.rows:
            acc: dict[int, int] = {}
            for k, v in r.items():
                for j, w in orows[k].items():
                    acc[j] = acc.get(j, 0) + v * w
            out.append({j: v for j, v in acc.items() if v})
        return SparseMatrix(self.nrows, other.ncols, out)

    def submatrix(self, row_idx: Sequence[int], col_idx: Sequence[int]) -> "SparseMatrix":
        cmap = {c: k for k, c in enumerate(col_idx)}
        rows = []
        for i in row_idx:
            rows.append({cmap[j]: v for j, v in self.rows[i].items() if j in cmap})
        return SparseMatrix(len(row_idx), len(col_idx), rows)

    def is_zero(self) -> bool:
        return not any(self.rows)

    def nnz(self) -> int:
        return sum(len(r) for r in self.rows)

    def __eq__(self, other) -> bool:
        if not isinstance(other, SparseMatrix):
            return NotImplemented
        return self.shape == other.shape and self.rows == other.rows

    def __repr__(self) -> str:
        return f"SparseMatrix({self.nrows}x{self.ncols}, nnz={self.nnz()})"


def _as_sparse(M) -> SparseMatrix:
    return M if isinstance(M, SparseMatrix) else SparseMatrix.from_dense(M)


def invariant_factors(M) -> tuple[int, list[int]]:
    """Return ``(rank, factors > 1)`` of an integer matrix.

    Unit pivots are eliminated first, shortest rows first (a Markowitz-style
    choice that keeps fill-in low on boundary-like matrices); whatever is left
    goes through dense Smith reduction.
    """
    S = _as_sparse(M)
    rows = {i: dict(r) for i, r in enumerate(S.rows) if r}
    cols: dict[int, set[int]] = {}
    for i, r in rows.items():
        for j in r:
            cols.setdefault(j, set()).add(i)
    heap = [(len(r), i) for i, r in rows.items()]
    heapq.heapify(heap)
    parked: set[int] = set()
    units = 0
    while heap:
        ln, i = heapq.heappop(heap)
        r = rows.get(i)
        if r is None or len(r) != ln:
            continue
        piv = None
        for j, v in r.items():
            if v == 1 or v == -1:
                cj = len(cols[j])
                if piv is None or cj < piv[1]:
                    piv = (j, cj)
                    if cj == 1:
                        break
        if piv is None:
            parked.add(i)
            continue
        j = piv[0]
        p = r[j]
        for s in list(cols[j]):
            if s == i:
                continue
            rs = rows[s]
            f = rs[j] * p
            for k, v in r.items():
                nv = rs.get(k, 0) - f * v
                if nv:
                    if k not in rs:
                        cols[k].add(s)
                    rs[k] = nv
                else:
                    if k in rs:
                        del rs[k]
                        cols[k].discard(s)
            if rs:
                heapq.heappush(heap, (len(rs), s))
                parked.discard(s)
            else:
                del rows[s]
                parked.discard(s)
        for k in r:
            cols[k].discard(i)
        del rows[i]
        units += 1
    rest = [r for r in rows.values() if r]
    if not rest:
        return units, []
    used = sorted({j for r in rest for j in r})
    cidx = {j: k for k, j in enumerate(used)}
    dense = []
    for r in rest:
        row = [0] * len(used)
        for j, v in r.items():
            row[cidx[j]] = v
        dense.append(row)
    fac = _dense_factors(dense, len(used))
    return units + len(fac), [abs(d) for d in fac if abs(d) > 1]


def rank(M) -> int:
    return invariant_factors(M)[0]


# ---------------------------------------------------------------------------
# finitely generated abelian groups

def _normalize_orders(orders: Iterable[int]) -> tuple[int, tuple[int, ...]]:
    """Split a list of cyclic orders (0 meaning Z) into rank and invariant factors."""
    r = 0
    fin = []
    for d in orders:
        d = abs(int(d))
        if d == 0:
            r += 1
        elif d > 1:
            fin.append(d)
    fin.sort()
    # gcd/lcm sweep turns any list of orders into a divisibility chain
    n = len(fin)
    for i in range(n):
        for j in range(i + 1, n):
            a, b = fin[i], fin[j]
            g = gcd(a, b)
            fin[i], fin[j] = g, a // g * b
    return r, tuple(d for d in fin if d > 1)


@dataclass(frozen=True, order=True)
class FgGroup:
    """Z^rank + Z/d1 + ... + Z/dk with d1 | d2 | ... | dk, all di >= 2."""

    rank: int = 0
    torsion: tuple[int, ...] = ()

    def __post_init__(self):
        if self.rank < 0:
            raise ValueError("negative rank")
        t = tuple(int(d) for d in self.torsion)
        r, norm = _normalize_orders(t)
        if r:
            raise ValueError("zero is not an invariant factor")
        object.__setattr__(self, "torsion", norm)

    @classmethod
    def cyclic(cls, orders: Iterable[int]) -> "FgGroup":
        r, t = _normalize_orders(orders)
        return cls(r, t)

    @classmethod
    def free(cls, n: int) -> "FgGroup":
        return cls(n, ())

    @classmethod
    def from_dict(cls, d: Mapping) -> "FgGroup":
        return cls(int(d.get("rank", 0)), tuple(d.get("torsion", ())))

    def is_zero(self) -> bool:
        return self.rank == 0 and not self.torsion

    def is_free(self) -> bool:
        return not self.torsion

    def torsion_part(self) -> "FgGroup":
        return FgGroup(0, self.torsion)

    def free_part(self) -> "FgGroup":
        return FgGroup(self.rank, ())

    def order_list(self) -> list[int]:
        return [0] * self.rank + list(self.torsion)

    def __add__(self, other: "FgGroup") -> "FgGroup":
        return FgGroup.cyclic(self.order_list() + other.order_list())

    def tensor(self, other: "FgGroup") -> "FgGroup":
        out = []
        for a in self.order_list():
            for b in other.order_list():
                out.append(gcd(a, b))
        return FgGroup.cyclic(out)

    def tor(self, other: "FgGroup") -> "FgGroup":
        out = []
        for a in self.torsion:
            for b in other.torsion:
                out.append(gcd(a, b))
        return FgGroup.cyclic(out)

    def to_dict(self) -> dict:
        return {"rank": self.rank, "torsion": list(self.torsion)}

    def __str__(self) -> str:
        parts = []
        if self.rank:
            parts.append("Z" if self.rank == 1 else f"Z^{self.rank}")
        parts += [f"Z/{d}" for d in self.torsion]
        return " + ".join(parts) if parts else "0"

    def __repr__(self) -> str:
        return f"FgGroup({self})"


ZERO = FgGroup()
Z = FgGroup(1)


def fg_group_dual(G: FgGroup) -> tuple[FgGroup, FgGroup]:
    """``(Hom(G, Z), Ext^1(G, Z))``."""
    return FgGroup(G.rank), FgGroup(0, G.torsion)


def groups_iso(G: FgGroup, H: FgGroup) -> bool:
    return G.rank == H.rank and G.torsion == H.torsion


class GradedGroups:
    """Degree -> FgGroup; zero groups are not stored."""

    __slots__ = ("_g",)

    def __init__(self, groups: Mapping[int, FgGroup] | None = None):
        self._g = {int(k): v for k, v in (groups or {}).items() if not v.is_zero()}

    @classmethod
    def from_json(cls, d: Mapping) -> "GradedGroups":
        return cls({int(k): FgGroup.from_dict(v) for k, v in d.items()})

    def __getitem__(self, k: int) -> FgGroup:
        return self._g.get(k, ZERO)

    def degrees(self) -> list[int]:
        return sorted(self._g)

    def items(self):
        return sorted(self._g.items())

    def is_zero(self) -> bool:
        return not self._g

    def __eq__(self, other) -> bool:
        if isinstance(other, Mapping):
            other = GradedGroups(other)
        if not isinstance(other, GradedGroups):
            return NotImplemented
        return self._g == other._g

    def __hash__(self):
        return hash(tuple(self.items()))

    def shift(self, k: int) -> "GradedGroups":
        """Degree n of the result is degree n + k of self (complex shift [k])."""
        return GradedGroups({d - k: g for d, g in self._g.items()})

    def reindex(self, f) -> "GradedGroups":
        return GradedGroups({f(d): g for d, g in self._g.items()})

    def dual(self) -> "GradedGroups":
        """Cohomology of RHom(C, Z) computed from the cohomology of C."""
        out: dict[int, list[int]] = {}
        for d, g in self._g.items():
            if g.rank:
                out.setdefault(-d, []).extend([0] * g.rank)
            if g.torsion:
                out.setdefault(-d + 1, []).extend(g.torsion)
        return GradedGroups({k: FgGroup.cyclic(v) for k, v in out.items()})

    def concentrated_in(self) -> int | None:
        """The single nonzero degree, or None when zero or spread out."""
        return self.degrees()[0] if len(self._g) == 1 else None

    def euler_characteristic(self) -> int:
        return sum((-1) ** d * g.rank for d, g in self._g.items())

    def __add__(self, other: "GradedGroups") -> "GradedGroups":
        keys = set(self._g) | set(other._g)
        return GradedGroups({k: self[k] + other[k] for k in keys})

    def to_json(self) -> dict:
        return {str(k): g.to_dict() for k, g in sorted(self._g.items())}

    def __repr__(self) -> str:
        inner = ", ".join(f"{k}: {g}" for k, g in self.items())
        return "{" + inner + "}"


def kunneth(A: GradedGroups, B: GradedGroups) -> GradedGroups:
    """Cohomology of C (x)^L D from the cohomology of C and D."""
    out: dict[int, list[int]] = {}
    for i, g in A.items():
        for j, h in B.items():
            out.setdefault(i + j, []).extend(g.tensor(h).order_list())
            # Tor lands one degree lower in cohomological indexing
            out.setdefault(i + j - 1, []).extend(g.tor(h).order_list())
    return GradedGroups({k: FgGroup.cyclic(v) for k, v in out.items()})


# ---------------------------------------------------------------------------
# free cochain complexes

@dataclass
class FreeComplex:
    """Bounded cochain complex of free abelian groups.

    ``ranks[i]`` is the rank in degree ``i``; ``diffs[i]`` is the matrix of
    ``d^i : C^i -> C^{i+1}`` with shape ``(ranks[i+1], ranks[i])``.
    """

    ranks: dict[int, int]
    diffs: dict[int, SparseMatrix] = field(default_factory=dict)

    def __post_init__(self):
        self.ranks = {int(k): int(v) for k, v in self.ranks.items() if v}
        diffs = {}
        for k, M in self.diffs.items():
            M = _as_sparse(M)
            want = (self.ranks.get(k + 1, 0), self.ranks.get(k, 0))
            if M.shape != want:
                raise ValueError(f"d^{k} has shape {M.shape}, expected {want}")
            if not M.is_zero():
                diffs[int(k)] = M
        self.diffs = diffs

    def rank(self, i: int) -> int:
        return self.ranks.get(i, 0)

    def d(self, i: int) -> SparseMatrix:
        M = self.diffs.get(i)
        if M is None:
            return SparseMatrix(self.rank(i + 1), self.rank(i))
        return M

    def degrees(self) -> list[int]:
        return sorted(self.ranks)

    def check(self) -> None:
        for i in self.diffs:
            if i + 1 in self.diffs and not self.diffs[i + 1].matmul(self.diffs[i]).is_zero():
                raise ValueError(f"d^{i + 1} d^{i} != 0")

    def euler_characteristic(self) -> int:
        return sum((-1) ** i * r for i, r in self.ranks.items())


FreeComplexZ = FreeComplex


def homology_of(C: FreeComplex, check: bool = True) -> GradedGroups:
    """Cohomology ``ker d^i / im d^{i-1}`` in every degree."""
    if check:
        C.check()
    facs = {i: invariant_factors(M) for i, M in C.diffs.items()}
    out = {}
    for i, n in C.ranks.items():
        r_out = facs[i][0] if i in facs else 0
        r_in, tors = facs[i - 1] if i - 1 in facs else (0, [])
        out[i] = FgGroup(n - r_out - r_in, tuple(tors))
    return GradedGroups(out)


def derived_dual(C: FreeComplex) -> FreeComplex:
    """Hom(C, Z): degree -i carries the dual of C^i, differentials transposed."""
    ranks = {-i: n for i, n in C.ranks.items()}
    diffs = {-i - 1: M.transpose() for i, M in C.diffs.items()}
    return FreeComplex(ranks, diffs)


def complex_from_dense(lo: int, mats: Sequence, ranks: Sequence[int] | None = None) -> FreeComplex:
    """Build a complex starting in degree ``lo`` from consecutive dense
    differentials; ``ranks`` is needed only when some matrix is empty."""
    mats = [intmatrix(m) for m in mats]
    if ranks is None:
        ranks = [m.shape[1] for m in mats] + ([mats[-1].shape[0]] if mats else [])
    rk = {lo + k: r for k, r in enumerate(ranks)}
    diffs = {}
    for k, m in enumerate(mats):
        sp = SparseMatrix.from_dense(m)
        diffs[lo + k] = SparseMatrix(rk.get(lo + k + 1, 0), rk.get(lo + k, 0), sp.rows)
    return FreeComplex(rk, diffs)


# ---------------------------------------------------------------------------
# lattice helpers used for cohomology-sheaf extraction

def kernel_basis(M: IntMatrix) -> IntMatrix:
    """Columns form a basis of the (saturated) kernel lattice of ``M``."""
    M = intmatrix(M)
    m, n = M.shape
    if m == 0:
        return identity(n)
    S, U, V = smith_normal_form(M)
    r = sum(1 for d in diagonal(S) if d)
    return V[:, r:].copy()


def image_basis(M: IntMatrix) -> IntMatrix:
    """Columns form a basis of the lattice spanned by the columns of ``M``."""
    M = intmatrix(M)
    m, n = M.shape
    if m == 0 or n == 0:
        return zeros(m, 0)
    S, U, V = smith_normal_form(M)
    d = [x for x in diagonal(S) if x]
    Ui = unimodular_inverse(U)
    B = Ui[:, :len(d)].copy()
    for j, x in enumerate(d):
        B[:, j] = B[:, j] * x
    return B


def left_inverse(K: IntMatrix) -> IntMatrix:
    """Integer ``L`` with ``L @ K = I`` for a matrix with saturated column span."""
    K = intmatrix(K)
    m, k = K.shape
    if k == 0:
        return zeros(0, m)
    S, U, V = smith_normal_form(K)
    d = diagonal(S)
    if len(d) < k or any(abs(x) != 1 for x in d[:k]):
        raise ValueError("column span is not saturated")
    # S = U K V with S = [I; 0] up to signs, so (V S^T U) K = I
    St = zeros(k, m)
    for i in range(k):
        St[i, i] = S[i, i]
    return matmul(matmul(V, St), U)


def unimodular_inverse(U: IntMatrix) -> IntMatrix:
    U = intmatrix(U)
    n = U.shape[0]
    S, A, B = smith_normal_form(U)
    if any(abs(x) != 1 for x in diagonal(S)) or U.shape[0] != U.shape[1]:
        raise ValueError("matrix is not unimodular")
    # S = A U B, S diagonal of units so U^{-1} = B S A
    return matmul(matmul(B, S), A)


def solve_exact(A: IntMatrix, B: IntMatrix) -> IntMatrix | None:
    """Integer X with A @ X = B, or None if no integer solution exists."""
    A = intmatrix(A)
    B = intmatrix(B)
    m, n = A.shape
    k = B.shape[1]
    S, U, V = smith_normal_form(A)
    UB = matmul(U, B)
    d = diagonal(S)
    Y = zeros(n, k)
    for i in range(m):
        for j in range(k):
            v = UB[i, j]
            if i < len(d) and d[i]:
                if v % d[i]:
                    return None
                Y[i, j] = v // d[i]
            elif v:
                return None
    return matmul(V, Y)
