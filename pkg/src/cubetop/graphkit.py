"""Small immutable graphs with exact canonical forms.

Vertices are opaque string labels; edges are unordered label pairs with
no loops or multi-edges.  Canonical forms are computed by iterated
color refinement with full backtracking over the remaining symmetry, so
two graphs below the size cap get equal forms exactly when they are
isomorphic.  Forms double as memoization keys for the contractibility
engine, which is why graphs built from cube sets keep the cube name as
the vertex label: every search trace can be read back in terms of cubes.
"""

from __future__ import annotations

import json
from pathlib import Path
from typing import Iterable, Iterator, Mapping

from . import lattice
from .lattice import CubicalSpace, cube_label

CANONICAL_CAP = 30

__all__ = [
    "Graph",
    "GraphTooLarge",
    "UnknownVertex",
    "UnknownEdge",
    "StrayLabel",
    "CANONICAL_CAP",
    "intersection_graph",
    "induced",
    "rim",
    "ball",
    "join",
    "canonical_form",
    "canonical_order",
    "isomorphic",
    "isomorphism",
    "graph_to_json",
    "graph_from_json",
    "save_graph",
    "load_graph",
    "to_dot",
]


class GraphTooLarge(ValueError):
    """The graph exceeds the exact-canonicalization size cap."""


class UnknownVertex(ValueError):
    pass


class UnknownEdge(ValueError):
    pass


class StrayLabel(ValueError):
    """A vertex set referenced labels outside the graph."""


def _norm_edge(a: str, b: str) -> tuple[str, str]:
    if a == b:
        raise ValueError(f"self-loop on {a!r}")
    return (a, b) if a < b else (b, a)


class Graph:
    """Simple undirected graph over string labels; immutable and hashable."""

    __slots__ = ("vertices", "edges", "_adj", "_hash", "_canon")

    def __init__(self, vertices: Iterable[str], edges: Iterable[tuple[str, str]] = ()):
        vs = tuple(sorted(set(map(str, vertices))))
        vset = set(vs)
        es = frozenset(_norm_edge(str(a), str(b)) for a, b in edges)
        for a, b in es:
            if a not in vset or b not in vset:
                raise StrayLabel(f"edge ({a!r}, {b!r}) has an endpoint outside the graph")
        adj: dict[str, set[str]] = {v: set() for v in vs}
        for a, b in es:
            adj[a].add(b)
            adj[b].add(a)
        self.vertices = vs
        self.edges = es
        self._adj = {v: frozenset(nb) for v, nb in adj.items()}
        self._hash = hash((vs, es))
        self._canon = None

    def __len__(self) -> int:
        return len(self.vertices)

    def __iter__(self) -> Iterator[str]:
        return iter(self.vertices)

    def __contains__(self, v: str) -> bool:
        return v in self._adj

    def __eq__(self, other: object) -> bool:
        return (
            isinstance(other, Graph)
            and self.vertices == other.vertices
            and self.edges == other.edges
        )

    def __hash__(self) -> int:
        return self._hash

    def __repr__(self) -> str:
        return f"Graph({len(self.vertices)} vertices, {len(self.edges)} edges)"

    def neighbors(self, v: str) -> frozenset[str]:
        try:
            return self._adj[v]
        except KeyError:
            raise UnknownVertex(f"vertex {v!r} not in graph") from None

    def degree(self, v: str) -> int:
        return len(self.neighbors(v))

    def has_edge(self, a: str, b: str) -> bool:
        return _norm_edge(a, b) in self.edges

    def induced(self, labels: Iterable[str]) -> "Graph":
        keep = set(map(str, labels))
        stray = keep - set(self.vertices)
        if stray:
            raise StrayLabel(f"labels not in graph: {sorted(stray)}")
        return Graph(keep, (e for e in self.edges if e[0] in keep and e[1] in keep))

    def without_vertex(self, v: str) -> "Graph":
        if v not in self._adj:
            raise UnknownVertex(f"vertex {v!r} not in graph")
        return self.induced(set(self.vertices) - {v})

    def with_vertex(self, v: str, neighbors: Iterable[str]) -> "Graph":
        v = str(v)
        if v in self._adj:
            raise ValueError(f"vertex {v!r} already present")
        nbrs = set(map(str, neighbors))
        stray = nbrs - set(self.vertices)
        if stray:
            raise StrayLabel(f"labels not in graph: {sorted(stray)}")
        return Graph(
            self.vertices + (v,), list(self.edges) + [(v, u) for u in nbrs]
        )

    def with_edge(self, a: str, b: str) -> "Graph":
        e = _norm_edge(a, b)
        if a not in self._adj or b not in self._adj:
            raise UnknownVertex(f"edge endpoints {a!r}, {b!r} must be vertices")
        return Graph(self.vertices, set(self.edges) | {e})

    def without_edge(self, a: str, b: str) -> "Graph":
        e = _norm_edge(a, b)
        if e not in self.edges:
            raise UnknownEdge(f"edge ({a!r}, {b!r}) not in graph")
        return Graph(self.vertices, self.edges - {e})

    def relabel(self, mapping: Mapping[str, str]) -> "Graph":
        missing = set(self.vertices) - set(mapping)
        if missing:
            raise StrayLabel(f"mapping misses vertices: {sorted(missing)}")
        if len(set(mapping[v] for v in self.vertices)) != len(self.vertices):
            raise ValueError("relabeling is not injective")
        return Graph(
            (mapping[v] for v in self.vertices),
            ((mapping[a], mapping[b]) for a, b in self.edges),
        )

    def is_connected(self) -> bool:
        if not self.vertices:
            return False
        seen = {self.vertices[0]}
        stack = [self.vertices[0]]
        while stack:
            for u in self._adj[stack.pop()]:
                if u not in seen:
                    seen.add(u)
                    stack.append(u)
        return len(seen) == len(self.vertices)

    def connected_components(self) -> list[frozenset[str]]:
        comps = []
        seen: set[str] = set()
        for v in self.vertices:
            if v in seen:
                continue
            comp = {v}
            stack = [v]
            while stack:
                for u in self._adj[stack.pop()]:
                    if u not in comp:
                        comp.add(u)
                        stack.append(u)
            seen |= comp
            comps.append(frozenset(comp))
        return comps


def intersection_graph(space: CubicalSpace) -> Graph:
    """The digital model of a cubical space: one vertex per cube, edges
    between intersecting cubes.  Vertex labels are the cube coordinates,
    so anything derived from the graph maps straight back to cubes."""
    cubes = space.cubes
    labels = {u: cube_label(u) for u in cubes}
    edges = []
    offsets = lattice.neighbor_offsets(space.n)
    for u in cubes:
        for off in offsets:
            v = tuple(c + d for c, d in zip(u, off))
            if v in cubes and u < v:
                edges.append((labels[u], labels[v]))
    return Graph(labels.values(), edges)


def induced(g: Graph, labels: Iterable[str]) -> Graph:
    return g.induced(labels)


def rim(g: Graph, v: str) -> Graph:
    """Induced subgraph on the neighbors of ``v`` (without ``v``)."""
    return g.induced(g.neighbors(v))


def ball(g: Graph, v: str) -> Graph:
    return g.induced(set(g.neighbors(v)) | {v})


def join(g: Graph, h: Graph) -> Graph:
    """Disjoint union plus every cross edge; colliding labels of ``h``
    get primes appended until fresh."""
    taken = set(g.vertices)
    mapping = {}
    for v in h.vertices:
        new = v
        while new in taken:
            new += "'"
        taken.add(new)
        mapping[v] = new
    h2 = h.relabel(mapping)
    edges = list(g.edges) + list(h2.edges)
    edges += [(a, b) for a in g.vertices for b in h2.vertices]
    return Graph(g.vertices + h2.vertices, edges)


# ---------------------------------------------------------------------------
# Canonical forms: color refinement + backtracking over the remaining orbits.
# ---------------------------------------------------------------------------


def _refine(n: int, adj: list[tuple[int, ...]], colors: list[int]) -> list[int]:
    """Iterate neighborhood-color signatures to a stable coloring."""
    while True:
        sigs = [
            (colors[v], tuple(sorted(colors[u] for u in adj[v]))) for v in range(n)
        ]
        palette = {s: i for i, s in enumerate(sorted(set(sigs)))}
        new = [palette[sigs[v]] for v in range(n)]
        if new == colors:
            return colors
        colors = new


def _initial_colors(n: int, adj: list[tuple[int, ...]]) -> list[int]:
    degs = [len(adj[v]) for v in range(n)]
    sigs = [(degs[v], tuple(sorted(degs[u] for u in adj[v]))) for v in range(n)]
    palette = {s: i for i, s in enumerate(sorted(set(sigs)))}
    return _refine(n, adj, [palette[s] for s in sigs])


def _leaf_bytes(n: int, adj: list[tuple[int, ...]], perm: list[int]) -> bytes:
    nbsets = [set(adj[v]) for v in range(n)]
    bits = bytearray((n * (n - 1) // 2 + 7) // 8)
    k = 0
    for i in range(n):
        nb = nbsets[perm[i]]
        for j in range(i + 1, n):
            if perm[j] in nb:
                bits[k >> 3] |= 1 << (k & 7)
            k += 1
    return bytes([n]) + bytes(bits)


def _canonical_search(n: int, adj: list[tuple[int, ...]]) -> tuple[bytes, tuple[int, ...]]:
    if n == 0:
        return b"\x00", ()

    best: list = [None, None]  # bytes, perm
    first: list = [None, None]
    autos: list[dict[int, int]] = []

    def leaf(colors: list[int]) -> None:
        perm = sorted(range(n), key=colors.__getitem__)
        b = _leaf_bytes(n, adj, perm)
        if first[0] is None:
            first[0], first[1] = b, perm
        elif b == first[0]:
            gamma = {first[1][k]: perm[k] for k in range(n)}
            if any(gamma[v] != v for v in range(n)):
                autos.append(gamma)
        if best[0] is None or b < best[0]:
            best[0], best[1] = b, perm

    def search(colors: list[int]) -> None:
        cells: dict[int, list[int]] = {}
        for v in range(n):
            cells.setdefault(colors[v], []).append(v)
        target = None
        for color in sorted(cells):
            if len(cells[color]) > 1:
                if target is None or len(cells[color]) < len(cells[target]):
                    target = color
        if target is None:
            leaf(colors)
            return
        explored: list[int] = []
        for v in cells[target]:
            if _in_explored_orbit(v, explored, colors):
                continue
            child = list(colors)
            # Push the individualized vertex into its own, smaller color class.
            child = [c * 2 for c in child]
            child[v] -= 1
            search(_refine(n, adj, child))
            explored.append(v)

    def _in_explored_orbit(v: int, explored: list[int], colors: list[int]) -> bool:
        if not explored or not autos:
            return False
        # Only automorphisms compatible with the current coloring may prune.
        compatible = [g for g in autos if all(colors[g[u]] == colors[u] for u in g)]
        if not compatible:
            return False
        orbit = {v}
        frontier = [v]
        while frontier:
            x = frontier.pop()
            for g in compatible:
                for y in (g[x],):
                    if y not in orbit:
                        orbit.add(y)
                        frontier.append(y)
        return any(u in orbit for u in explored)

    search(_initial_colors(n, adj))
    return best[0], tuple(best[1])


def _index_form(g: Graph) -> tuple[bytes, tuple[int, ...]]:
    n = len(g)
    if n > CANONICAL_CAP:
        raise GraphTooLarge(
            f"graph has {n} vertices; exact canonicalization capped at {CANONICAL_CAP}"
        )
    index = {v: i for i, v in enumerate(g.vertices)}
    adj: list[tuple[int, ...]] = [() for _ in range(n)]
    for v in g.vertices:
        adj[index[v]] = tuple(sorted(index[u] for u in g.neighbors(v)))
    return _canonical_search(n, adj)


def canonical_form(g: Graph) -> bytes:
    """Byte string equal for two graphs exactly when they are isomorphic.

    Raises GraphTooLarge above the size cap rather than approximating.
    """
    if g._canon is None:
        form, perm = _index_form(g)
        g._canon = (form, tuple(g.vertices[i] for i in perm))
    return g._canon[0]


def canonical_order(g: Graph) -> tuple[str, ...]:
    """The vertex labels of ``g`` listed in canonical position order."""
    canonical_form(g)
    return g._canon[1]


def isomorphic(g: Graph, h: Graph) -> bool:
    if len(g) != len(h) or len(g.edges) != len(h.edges):
        return False
    if sorted(map(g.degree, g.vertices)) != sorted(map(h.degree, h.vertices)):
        return False
    return canonical_form(g) == canonical_form(h)


def isomorphism(g: Graph, h: Graph) -> dict[str, str] | None:
    """An explicit vertex bijection realizing isomorphism, or None."""
    if not isomorphic(g, h):
        return None
    og, oh = canonical_order(g), canonical_order(h)
    mapping = dict(zip(og, oh))
    for a, b in g.edges:
        if not h.has_edge(mapping[a], mapping[b]):  # pragma: no cover - safety net
            raise AssertionError("canonical orders disagree with canonical forms")
    return mapping


# ---------------------------------------------------------------------------
# Serialization
# ---------------------------------------------------------------------------


def graph_to_json(g: Graph) -> dict:
    return {
        "vertices": list(g.vertices),
        "edges": sorted([a, b] for a, b in g.edges),
    }


def graph_from_json(obj: dict) -> Graph:
    try:
        return Graph(obj["vertices"], [tuple(e) for e in obj["edges"]])
    except (KeyError, TypeError) as exc:
        raise ValueError(f"malformed graph file: {exc}") from exc


def save_graph(g: Graph, path: str | Path) -> None:
    Path(path).write_text(json.dumps(graph_to_json(g), indent=1) + "\n")


def load_graph(path: str | Path) -> Graph:
    return graph_from_json(json.loads(Path(path).read_text()))


def to_dot(g: Graph, name: str = "G") -> str:
    lines = [f"graph {name} {{"]
    for v in g.vertices:
        lines.append(f'  "{v}";')
    for a, b in sorted(g.edges):
        lines.append(f'  "{a}" -- "{b}";')
    lines.append("}")
    return "\n".join(lines) + "\n"
