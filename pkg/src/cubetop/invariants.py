"""Independent topological oracles: Euler characteristics and homology.

Two separate routes to the Euler characteristic are provided: counting
the faces of the cube union, and alternating clique counts of a graph's
flag complex.  For cube sets the two must agree (axis-aligned boxes have
the Helly property, so the flag complex of the intersection graph is the
nerve of a good cover).  Homology ranks are computed over the integers
with exact arithmetic only; torsion is detected from normal-form
diagonal entries.  No floating point enters this module.
"""

from __future__ import annotations

from dataclasses import dataclass

from . import graphkit, lattice
from .graphkit import Graph
from .lattice import CubicalSpace

CLIQUE_BUDGET = 2_000_000

__all__ = [
    "InvariantReport",
    "SizeCapExceeded",
    "clique_counts",
    "euler_characteristic_graph",
    "euler_characteristic_image",
    "homology_ranks",
    "fingerprint",
]


class SizeCapExceeded(ValueError):
    """Clique enumeration or rank computation exceeded the size cap."""


@dataclass(frozen=True)
class InvariantReport:
    """Topological fingerprint of a graph or cubical space.

    ``euler_image`` is None for bare graphs.  ``betti`` runs from
    dimension 0 up to ``max_dim``; ``truncated`` flags that the flag
    complex has cells above ``max_dim`` that contribute to the Euler
    characteristic but not to the reported homology.
    """

    euler_graph: int
    euler_image: int | None
    betti: tuple[int, ...]
    torsion: tuple[bool, ...]
    torsion_diagonals: tuple[tuple[int, ...], ...]
    max_dim: int
    truncated: bool
    approximate: bool = False

    def key(self) -> tuple:
        """Comparison key for stability scans and equivalence refutation.

        Trailing zero Betti numbers and absent torsion carry no
        information, so they are stripped; otherwise reports of complexes
        with different top dimensions could never compare equal.
        """
        betti = list(self.betti)
        while betti and betti[-1] == 0:
            betti.pop()
        torsion = [t for t in self.torsion_diagonals if t]
        return (self.euler_graph, tuple(betti), tuple(torsion))

    def to_json(self) -> dict:
        return {
            "euler_graph": self.euler_graph,
            "euler_image": self.euler_image,
            "betti": list(self.betti),
            "torsion": list(self.torsion),
            "torsion_diagonals": [list(t) for t in self.torsion_diagonals],
            "max_dim": self.max_dim,
            "truncated": self.truncated,
            "approximate": self.approximate,
        }


def _clique_levels(g: Graph, max_size: int | None = None) -> list[list[tuple[int, ...]]]:
    """Cliques of the graph grouped by size: levels[k] holds the (k+1)-cliques
    as sorted index tuples.  Extension masks keep this fast on the dense
    neighborhoods cube models produce."""
    n = len(g)
    index = {v: i for i, v in enumerate(g.vertices)}
    masks = [0] * n
    for a, b in g.edges:
        ia, ib = index[a], index[b]
        masks[ia] |= 1 << ib
        masks[ib] |= 1 << ia
    levels: list[list[tuple[int, ...]]] = []
    # carry (clique, mask of common neighbors above the last member)
    current = [((v,), masks[v] >> (v + 1) << (v + 1)) for v in range(n)]
    total = n
    while current:
        levels.append(sorted(c for c, _ in current))
        if max_size is not None and len(levels) >= max_size:
            break
        nxt = []
        for clique, ext in current:
            m = ext
            while m:
                low = m & -m
                u = low.bit_length() - 1
                m ^= low
                nxt.append((clique + (u,), ext & masks[u] & ~((1 << (u + 1)) - 1)))
        total += len(nxt)
        if total > CLIQUE_BUDGET:
            raise SizeCapExceeded(
                f"clique enumeration exceeded {CLIQUE_BUDGET} cliques"
            )
        current = nxt
    return levels


def clique_counts(g: Graph, max_size: int | None = None) -> list[int]:
    """Number of cliques of each size, counts[k] = number of (k+1)-cliques."""
    return [len(level) for level in _clique_levels(g, max_size)]


def euler_characteristic_graph(g: Graph) -> int:
    """Euler characteristic of the flag (clique) complex of ``g``."""
    return sum((-1) ** k * c for k, c in enumerate(clique_counts(g)))


def euler_characteristic_image(space: CubicalSpace) -> int:
    """Euler characteristic of the union of cubes, by face counting."""
    faces = lattice.image_faces(space)
    return sum((-1) ** d * c for d, c in faces.items())


# ---------------------------------------------------------------------------
# Exact integer rank / Smith normal form
# ---------------------------------------------------------------------------


def _rank_and_diagonal(columns: dict[int, dict[int, int]]) -> tuple[int, list[int]]:
    """Rank over Z plus the nontrivial normal-form diagonal entries.

    Unit pivots are eliminated sparsely first (they contribute diagonal
    ones and no torsion); whatever dense block remains is reduced by a
    classic smallest-pivot Smith normal form over Python integers.
    """
    cols = {c: dict(col) for c, col in columns.items() if col}
    row_use: dict[int, set[int]] = {}
    for c, col in cols.items():
        for r in col:
            row_use.setdefault(r, set()).add(c)
    rank = 0
    while True:
        pivot = None
        best = None
        for c, col in cols.items():
            for r, v in col.items():
                if v in (1, -1):
                    cost = (len(row_use[r]) - 1) * (len(col) - 1)
                    if best is None or cost < best:
                        best, pivot = cost, (r, c)
                    if cost == 0:
                        break
            if best == 0:
                break
        if pivot is None:
            break
        r, c = pivot
        pcol = cols.pop(c)
        s = pcol[r]  # +-1
        for c2 in list(row_use[r]):
            if c2 == c or c2 not in cols:
                continue
            col2 = cols[c2]
            factor = col2[r] * s
            for rr, vv in pcol.items():
                new = col2.get(rr, 0) - factor * vv
                if new:
                    col2[rr] = new
                    row_use.setdefault(rr, set()).add(c2)
                else:
                    if rr in col2:
                        del col2[rr]
                        row_use[rr].discard(c2)
            if not col2:
                del cols[c2]
        for rr in pcol:
            row_use.get(rr, set()).discard(c)
        rank += 1
    if not cols:
        return rank, []
    # Dense residual: no +-1 entries left anywhere.
    rows = sorted({r for col in cols.values() for r in col})
    rindex = {r: i for i, r in enumerate(rows)}
    mat = [[0] * len(cols) for _ in rows]
    for j, (_, col) in enumerate(sorted(cols.items())):
        for r, v in col.items():
            mat[rindex[r]][j] = v
    diag = _dense_snf_diagonal(mat)
    nonzero = [abs(d) for d in diag if d]
    return rank + len(nonzero), [d for d in nonzero if d > 1]


def _dense_snf_diagonal(mat: list[list[int]]) -> list[int]:
    """Diagonal of the Smith normal form of a small dense integer matrix."""
    m = len(mat)
    n = len(mat[0]) if m else 0
    diag: list[int] = []
    top = 0
    while top < min(m, n):
        # smallest nonzero entry as pivot
        pr = pc = -1
        best = None
        for i in range(top, m):
            for j in range(top, n):
                v = abs(mat[i][j])
                if v and (best is None or v < best):
                    best, pr, pc = v, i, j
        if best is None:
            break
        mat[top], mat[pr] = mat[pr], mat[top]
        for row in mat:
            row[top], row[pc] = row[pc], row[top]
        changed = True
        while changed:
            changed = False
            p = mat[top][top]
            for i in range(top + 1, m):
                if mat[i][top]:
                    q = mat[i][top] // p
                    mat[i] = [a - q * b for a, b in zip(mat[i], mat[top])]
                    if mat[i][top]:
                        mat[top], mat[i] = mat[i], mat[top]
                        changed = True
                        break
            if changed:
                continue
            for j in range(top + 1, n):
                if mat[top][j]:
                    q = mat[top][j] // p
                    for row in mat:
                        row[j] -= q * row[top]
                    if mat[top][j]:
                        for row in mat:
                            row[top], row[j] = row[j], row[top]
                        changed = True
                        break
        # make the rest divisible by the pivot
        p = mat[top][top]
        fix = None
        for i in range(top + 1, m):
            for j in range(top + 1, n):
                if mat[i][j] % p:
                    fix = i
                    break
            if fix is not None:
                break
        if fix is not None:
            mat[top] = [a + b for a, b in zip(mat[top], mat[fix])]
            continue
        diag.append(abs(p))
        top += 1
    return diag


def _boundary_columns(
    lower: list[tuple[int, ...]], upper: list[tuple[int, ...]]
) -> dict[int, dict[int, int]]:
    index = {s: i for i, s in enumerate(lower)}
    cols: dict[int, dict[int, int]] = {}
    for j, simplex in enumerate(upper):
        col: dict[int, int] = {}
        for i in range(len(simplex)):
            face = simplex[:i] + simplex[i + 1 :]
            col[index[face]] = (-1) ** i
        cols[j] = col
    return cols


def homology_ranks(
    g: Graph, max_dim: int | None = None
) -> tuple[tuple[int, ...], tuple[bool, ...], tuple[tuple[int, ...], ...], bool]:
    """Betti numbers b_0..b_max_dim of the flag complex, with torsion flags.

    Returns (betti, torsion_flags, torsion_diagonals, truncated).  The
    boundary one dimension above ``max_dim`` is included so the top
    reported Betti number is a true homology rank, not just a cycle count.
    """
    if len(g) == 0:
        raise ValueError("homology of the empty graph is undefined here")
    levels = _clique_levels(g)
    top = len(levels) - 1  # highest simplex dimension present
    if max_dim is None:
        max_dim = top
    truncated = top > max_dim
    counts = [len(level) for level in levels]
    ranks = [0] * (max_dim + 2)
    diagonals: list[list[int]] = [[] for _ in range(max_dim + 2)]
    for k in range(1, min(max_dim + 1, top) + 1):
        cols = _boundary_columns(levels[k - 1], levels[k])
        ranks[k], diagonals[k] = _rank_and_diagonal(cols)
    betti = []
    torsion_flags = []
    torsion_diags = []
    for k in range(max_dim + 1):
        nk = counts[k] if k < len(counts) else 0
        betti.append(nk - ranks[k] - ranks[k + 1])
        tor = diagonals[k + 1] if k + 1 < len(diagonals) else []
        torsion_flags.append(bool(tor))
        torsion_diags.append(tuple(tor))
    return tuple(betti), tuple(torsion_flags), tuple(torsion_diags), truncated


def fingerprint(
    obj: Graph | CubicalSpace,
    max_dim: int | None = None,
    approximate: bool = False,
) -> InvariantReport:
    """Aggregate report: both Euler characteristics plus homology ranks.

    For a cubical space homology defaults to the ambient dimension; for a
    bare graph it covers the whole flag complex.
    """
    if isinstance(obj, CubicalSpace):
        if len(obj) == 0:
            raise ValueError("fingerprint of an empty space is undefined")
        g = graphkit.intersection_graph(obj)
        euler_image = euler_characteristic_image(obj)
        if max_dim is None:
            max_dim = obj.n
    else:
        g = obj
        euler_image = None
    euler_graph = euler_characteristic_graph(g)
    betti, torsion, diags, truncated = homology_ranks(g, max_dim)
    return InvariantReport(
        euler_graph=euler_graph,
        euler_image=euler_image,
        betti=betti,
        torsion=torsion,
        torsion_diagonals=diags,
        max_dim=len(betti) - 1,
        truncated=truncated,
        approximate=approximate,
    )
