"""Plumbing graphs and the integer linear algebra of their linking matrices.

Graph ingestion, exact inertia, Smith normal form cosets of H_1, spin and
Spin^c enumeration, linking pairing, Rokhlin invariant mod 4 and the
cohomology classes used as CGP colourings.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property, lru_cache
from typing import Sequence

from sympy import Matrix, ZZ
from sympy.matrices.normalforms import smith_normal_decomp

IntVector = tuple[int, ...]
IntMatrix = list[list[int]]


class GraphError(ValueError):
    """Invalid plumbing graph input; ``kind`` names the failure."""

    def __init__(self, kind: str, message: str):
        super().__init__(message)
        self.kind = kind


class DegenerateMatrixError(GraphError):
    def __init__(self, message: str = "degenerate linking matrix"):
        super().__init__("singular", message)


# ---------------------------------------------------------------------------
# Exact rational linear algebra


def inertia(matrix: Sequence[Sequence[int | Fraction]]) -> tuple[int, int, int]:
    """(positive, negative, zero) counts of a symmetric rational matrix.

    Symmetric Gaussian elimination by congruence: a zero pivot with a nonzero
    entry further along its row is repaired by adding that row and column.
    """
    a = [[Fraction(x) for x in row] for row in matrix]
    n = len(a)
    pos = neg = zero = 0
    for k in range(n):
        if a[k][k] == 0:
            j = next((j for j in range(k + 1, n) if a[j][j] != 0), None)
            if j is not None:
                a[k], a[j] = a[j], a[k]
                for row in a:
                    row[k], row[j] = row[j], row[k]
            else:
                j = next((j for j in range(k + 1, n) if a[k][j] != 0), None)
                if j is None:
                    zero += 1
                    continue
                # (e_k + e_j) has norm 2 a_kj != 0
                for i in range(n):
                    a[k][i] += a[j][i]
                for i in range(n):
                    a[i][k] += a[i][j]
        p = a[k][k]
        if p > 0:
            pos += 1
        else:
            neg += 1
        for i in range(k + 1, n):
            if a[i][k] != 0:
                f = a[i][k] / p
                for j in range(k, n):
                    a[i][j] -= f * a[k][j]
        for i in range(k + 1, n):
            a[k][i] = Fraction(0)
            a[i][k] = Fraction(0)
    return pos, neg, zero


def rational_inverse(B: Sequence[Sequence[int]]) -> list[list[Fraction]]:
    return [list(r) for r in _inverse_cached(tuple(tuple(row) for row in B))]


@lru_cache(maxsize=256)
def _inverse_cached(B: tuple[tuple[int, ...], ...]):
    inv = Matrix(B).inv()
    return tuple(tuple(Fraction(int(x.p), int(x.q)) for x in inv.row(i)) for i in range(inv.rows))


def determinant(B: IntMatrix) -> int:
    return int(Matrix(B).det())


def mat_vec(B: Sequence[Sequence], x: Sequence) -> list:
    return [sum(b * y for b, y in zip(row, x)) for row in B]


def quad(B: Sequence[Sequence], x: Sequence, y: Sequence | None = None):
    y = x if y is None else y
    return sum(a * b for a, b in zip(x, mat_vec(B, y)))


def frac_mod(x: Fraction, m: int | Fraction = 1) -> Fraction:
    x = Fraction(x)
    return x - m * (x // m)


# ---------------------------------------------------------------------------
# Graphs


@dataclass(frozen=True)
class PlumbingGraph:
    framings: tuple[int, ...]
    edges: tuple[tuple[int, int], ...]

    @property
    def n(self) -> int:
        return len(self.framings)

    @cached_property
    def B(self) -> IntMatrix:
        n = self.n
        out = [[0] * n for _ in range(n)]
        for i, f in enumerate(self.framings):
            out[i][i] = f
        for a, b in self.edges:
            out[a][b] = out[b][a] = 1
        return out

    @cached_property
    def degrees(self) -> tuple[int, ...]:
        deg = [0] * self.n
        for a, b in self.edges:
            deg[a] += 1
            deg[b] += 1
        return tuple(deg)

    def relabel(self, perm: Sequence[int]) -> PlumbingGraph:
        """Graph with vertex i renamed perm[i]."""
        framings = [0] * self.n
        for i, f in enumerate(self.framings):
            framings[perm[i]] = f
        edges = tuple(sorted(tuple(sorted((perm[a], perm[b]))) for a, b in self.edges))
        return PlumbingGraph(tuple(framings), edges)

    def to_json(self) -> str:
        return json.dumps(
            {
                "vertices": [{"id": i, "framing": f} for i, f in enumerate(self.framings)],
                "edges": [list(e) for e in self.edges],
            },
            sort_keys=True,
        )


def make_graph(framings: Sequence[int], edges: Sequence[Sequence[int]] = ()) -> PlumbingGraph:
    """Validated plumbing graph: a tree with invertible linking matrix."""
    n = len(framings)
    if n == 0:
        raise GraphError("empty", "plumbing graph has no vertices")
    seen: set[tuple[int, int]] = set()
    norm: list[tuple[int, int]] = []
    for e in edges:
        if len(e) != 2:
            raise GraphError("format", f"edge {e!r} must have two endpoints")
        a, b = int(e[0]), int(e[1])
        if not (0 <= a < n and 0 <= b < n):
            raise GraphError("format", f"edge {e!r} refers to an unknown vertex")
        if a == b:
            raise GraphError("not_tree", "not a tree: self-loop")
        key = (min(a, b), max(a, b))
        if key in seen:
            raise GraphError("duplicate_edge", f"duplicate edge {list(key)}")
        seen.add(key)
        norm.append(key)
    if len(norm) != n - 1 or not _connected(n, norm):
        raise GraphError("not_tree", "not a tree: need a connected graph with |E| = |V| - 1")
    g = PlumbingGraph(tuple(int(f) for f in framings), tuple(sorted(norm)))
    if determinant(g.B) == 0:
        raise DegenerateMatrixError("singular linking matrix: det B = 0")
    return g


def _connected(n: int, edges: Sequence[tuple[int, int]]) -> bool:
    adj: dict[int, list[int]] = {i: [] for i in range(n)}
    for a, b in edges:
        adj[a].append(b)
        adj[b].append(a)
    stack, seen = [0], {0}
    while stack:
        for w in adj[stack.pop()]:
            if w not in seen:
                seen.add(w)
                stack.append(w)
    return len(seen) == n


def load_graph(text: str) -> PlumbingGraph:
    """Parse {"vertices":[{"id":..,"framing":..}],"edges":[[a,b],..]} with ids dense from 0."""
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise GraphError("format", f"invalid JSON: {exc}") from exc
    if not isinstance(data, dict) or "vertices" not in data:
        raise GraphError("format", "graph JSON needs a 'vertices' list")
    verts = data["vertices"]
    try:
        ids = sorted(int(v["id"]) for v in verts)
        framing = {int(v["id"]): int(v["framing"]) for v in verts}
    except (KeyError, TypeError, ValueError) as exc:
        raise GraphError("format", f"bad vertex entry: {exc}") from exc
    if ids != list(range(len(verts))):
        raise GraphError("format", "vertex ids must be distinct and dense from 0")
    return make_graph([framing[i] for i in ids], data.get("edges", []))


# ---------------------------------------------------------------------------
# Surgery presentation data


@dataclass(frozen=True)
class SurgeryPresentation:
    B: IntMatrix
    b_plus: int
    b_minus: int
    sigma: int
    snf: tuple[IntMatrix, list[int], IntMatrix]

    @property
    def order(self) -> int:
        out = 1
        for d in self.snf[1]:
            out *= d
        return out


def signature(B: IntMatrix) -> tuple[int, int]:
    pos, neg, zero = inertia(B)
    if zero:
        raise DegenerateMatrixError()
    return pos, neg


def smith_form(B: IntMatrix) -> tuple[IntMatrix, list[int], IntMatrix]:
    """(U, diag D, V) with U B V = D, U and V unimodular, D nonnegative."""
    U, D, V = _smith_cached(tuple(tuple(row) for row in B))
    return [list(r) for r in U], list(D), [list(r) for r in V]


@lru_cache(maxsize=256)
def _smith_cached(B: tuple[tuple[int, ...], ...]):
    D, U, V = smith_normal_decomp(Matrix(B), domain=ZZ)
    n = len(B)
    U = [[int(U[i, j]) for j in range(n)] for i in range(n)]
    V = [[int(V[i, j]) for j in range(n)] for i in range(n)]
    diag = [int(D[i, i]) for i in range(n)]
    for i, d in enumerate(diag):
        if d < 0:
            diag[i] = -d
            U[i] = [-x for x in U[i]]
    return tuple(map(tuple, U)), tuple(diag), tuple(map(tuple, V))


def presentation(B: IntMatrix) -> SurgeryPresentation:
    bp, bm = signature(B)
    return SurgeryPresentation(B=[list(r) for r in B], b_plus=bp, b_minus=bm, sigma=bp - bm, snf=smith_form(B))


def weakly_negative_definite(graph: PlumbingGraph) -> bool:
    """B^{-1} restricted to vertices of degree >= 3 is negative definite."""
    high = [i for i, d in enumerate(graph.degrees) if d >= 3]
    if not high:
        return True
    inv = rational_inverse(graph.B)
    sub = [[inv[i][j] for j in high] for i in high]
    pos, neg, zero = inertia(sub)
    return neg == len(high)


# ---------------------------------------------------------------------------
# H_1, spin and Spin^c


@dataclass(frozen=True)
class SpinData:
    B: IntMatrix
    spin: list[IntVector]
    h1: list[IntVector]
    spinc: list[IntVector]
    spinc_labels: list[tuple[IntVector, IntVector]]

    def label_for(self, residue: IntVector) -> tuple[IntVector, IntVector]:
        key = spinc_key(self.B, residue)
        for lab, l in zip(self.spinc_labels, self.spinc):
            if spinc_key(self.B, l) == key:
                return lab
        raise KeyError(f"{residue} is not a Spin^c residue")


def _unimodular_inverse(U: IntMatrix) -> IntMatrix:
    inv = Matrix(U).inv()
    return [[int(inv[i, j]) for j in range(inv.cols)] for i in range(inv.rows)]


def h1_key(B: IntMatrix, x: Sequence[int]) -> IntVector:
    """Canonical label of the class of x in Z^V / B Z^V."""
    U, D, _ = smith_form(B)
    y = mat_vec(U, x)
    return tuple(yi % d if d else yi for yi, d in zip(y, D))


def spinc_key(B: IntMatrix, l: Sequence[int]) -> IntVector:
    """Canonical label of the class of l in Z^V / 2B Z^V."""
    U, D, _ = smith_form(B)
    y = mat_vec(U, l)
    return tuple(yi % (2 * d) for yi, d in zip(y, D))


def h1_representatives(B: IntMatrix) -> list[IntVector]:
    """Coset representatives of Z^V / B Z^V, in mixed-radix order over the SNF diagonal."""
    U, D, _ = smith_form(B)
    if any(d == 0 for d in D):
        raise DegenerateMatrixError()
    Uinv = _unimodular_inverse(U)
    return [tuple(mat_vec(Uinv, y)) for y in itertools.product(*(range(d) for d in D))]


def spin_structures(B: IntMatrix) -> list[IntVector]:
    """All s in (Z/2)^V with B s = diag(B) mod 2, by elimination over GF(2)."""
    n = len(B)
    rows = [[B[i][j] % 2 for j in range(n)] + [B[i][i] % 2] for i in range(n)]
    pivots: list[int] = []
    r = 0
    for c in range(n):
        p = next((i for i in range(r, n) if rows[i][c]), None)
        if p is None:
            continue
        rows[r], rows[p] = rows[p], rows[r]
        for i in range(n):
            if i != r and rows[i][c]:
                rows[i] = [(x + y) % 2 for x, y in zip(rows[i], rows[r])]
        pivots.append(c)
        r += 1
    if any(rows[i][n] for i in range(r, n)):
        return []
    free = [c for c in range(n) if c not in pivots]
    out = []
    for vals in itertools.product((0, 1), repeat=len(free)):
        s = [0] * n
        for c, v in zip(free, vals):
            s[c] = v
        for i, c in enumerate(pivots):
            s[c] = (rows[i][n] + sum(rows[i][f] * s[f] for f in free)) % 2
        out.append(tuple(s))
    return sorted(out)


def sigma_map(B: IntMatrix, b: Sequence[int], s: Sequence[int]) -> IntVector:
    """Spin^c residue l = 2b + B(s - 1) attached to (b, s)."""
    shifted = [si - 1 for si in s]
    return tuple(2 * bi + ci for bi, ci in zip(b, mat_vec(B, shifted)))


def enumerate_spin_spinc(B: IntMatrix) -> SpinData:
    h1 = h1_representatives(B)
    spin = spin_structures(B)
    seen: dict[IntVector, int] = {}
    spinc: list[IntVector] = []
    labels: list[tuple[IntVector, IntVector]] = []
    for s in spin:
        for b in h1:
            l = sigma_map(B, b, s)
            key = spinc_key(B, l)
            if key not in seen:
                seen[key] = len(spinc)
                spinc.append(l)
                labels.append((b, s))
    return SpinData(B=[list(r) for r in B], spin=spin, h1=h1, spinc=spinc, spinc_labels=labels)


def linking_pairing(B: IntMatrix, a: Sequence[int], b: Sequence[int]) -> Fraction:
    """a^t B^{-1} b mod 1, in [0, 1)."""
    return frac_mod(quad(rational_inverse(B), a, b))


def rokhlin_mod4(B: IntMatrix, s: Sequence[int]) -> int:
    bp, bm = signature(B)
    return (bp - bm - quad(B, s)) % 4


def enumerate_omegas(B: IntMatrix, modulus: int) -> list[tuple[Fraction, ...]]:
    """All phi = m B^{-1} k mod m, one per coset k of Z^V / B Z^V."""
    if modulus not in (1, 2):
        raise ValueError("modulus must be 1 or 2")
    inv = rational_inverse(B)
    out = []
    for k in h1_representatives(B):
        phi = tuple(frac_mod(modulus * x, modulus) for x in mat_vec(inv, k))
        out.append(phi)
    return out


def omega_pairing(alpha: Sequence[Fraction], a: Sequence[int]) -> Fraction:
    """omega(a) = a^t alpha, defined modulo the colouring modulus."""
    return sum((Fraction(x) * y for x, y in zip(alpha, a)), Fraction(0))
