"""Contractibility, simple elements, compression and homotopy equivalence.

The engine decides contractibility by explicit search for a deletion
sequence: a graph reduces to a single vertex by repeatedly removing a
vertex whose neighborhood subgraph is itself contractible.  The search
backtracks over candidate vertices rather than trusting any greedy
order, memoizes verdicts on canonical forms, and returns a replayable
witness with every positive answer.  Cube-set operations ride on the
same machinery through the intersection graph, whose rims and deletions
mirror the cube-level ones exactly; a strict mode re-runs the recursion
natively on cube sets to cross-validate that identification.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from itertools import combinations
from typing import Iterable

from . import graphkit, invariants, lattice
from .graphkit import CANONICAL_CAP, Graph, GraphTooLarge, canonical_form, isomorphism
from .lattice import Cube, CubicalSpace, cube_label, parse_cube_label

SEARCH_NODE_BUDGET = 2_000_000
STRICT_SPACE_CAP = 25
ATTACH_RIM_MAX = 8

__all__ = [
    "TraceStep",
    "ContractibilityVerdict",
    "SpaceContractibilityVerdict",
    "EquivalenceResult",
    "SimplicityError",
    "SearchBudgetExceeded",
    "StrictModeDisagreement",
    "TraceError",
    "clear_caches",
    "is_contractible",
    "is_simple_point",
    "is_simple_edge",
    "delete_point",
    "attach_point",
    "delete_edge",
    "attach_edge",
    "compress_graph",
    "is_simple_cube",
    "is_contractible_space",
    "compress_space",
    "delete_cube",
    "attach_cube",
    "homotopy_equivalent",
    "replay_graph_trace",
    "replay_space_trace",
    "steps_to_json",
    "steps_from_json",
]


class SimplicityError(ValueError):
    """An element failed its simplicity certificate; carries the rim."""

    def __init__(self, message: str, element, rim: tuple[str, ...]):
        super().__init__(message)
        self.element = element
        self.rim = rim


class SearchBudgetExceeded(RuntimeError):
    """The contractibility search ran out of its node budget.

    Raised instead of guessing: callers get an error, never an
    approximate verdict."""


class StrictModeDisagreement(AssertionError):
    """Native cube recursion disagreed with the graph recursion."""


class TraceError(ValueError):
    """A trace step failed re-validation during replay."""


@dataclass(frozen=True)
class TraceStep:
    """One transformation step plus the certificate that justified it.

    ``rim`` records the neighborhood (for points/cubes) or the common
    neighborhood (for edges) that was checked contractible at the time
    the step was taken; replay re-validates it against the live state.
    """

    op: str
    element: str | tuple[str, str] | None = None
    rim: tuple[str, ...] = ()
    mapping: tuple[tuple[str, str], ...] = ()

    def to_json(self) -> dict:
        d: dict = {"op": self.op}
        if self.element is not None:
            d["element"] = (
                self.element if isinstance(self.element, str) else list(self.element)
            )
        if self.rim:
            d["rim"] = list(self.rim)
        if self.mapping:
            d["mapping"] = {a: b for a, b in self.mapping}
        return d

    @classmethod
    def from_json(cls, obj: dict) -> "TraceStep":
        element = obj.get("element")
        if isinstance(element, list):
            element = (str(element[0]), str(element[1]))
        mapping = tuple(sorted((str(k), str(v)) for k, v in obj.get("mapping", {}).items()))
        return cls(
            op=str(obj["op"]),
            element=element,
            rim=tuple(str(x) for x in obj.get("rim", ())),
            mapping=mapping,
        )


def steps_to_json(steps: Iterable[TraceStep]) -> list[dict]:
    return [s.to_json() for s in steps]


def steps_from_json(items: Iterable[dict]) -> list[TraceStep]:
    return [TraceStep.from_json(obj) for obj in items]


@dataclass
class ContractibilityVerdict:
    contractible: bool
    deletion_order: tuple[str, ...] | None = None
    remainder: Graph | None = None


@dataclass
class SpaceContractibilityVerdict:
    contractible: bool
    deletion_order: tuple[Cube, ...] | None = None
    remainder: CubicalSpace | None = None


@dataclass
class EquivalenceResult:
    status: str  # "yes" | "no" | "unknown"
    trace: list[TraceStep] | None = None
    witness: str | None = None


# ---------------------------------------------------------------------------
# Core search, memoized on canonical forms
# ---------------------------------------------------------------------------

_MEMO: dict[bytes, bool] = {}
_SPACE_MEMO: dict[tuple[int, frozenset], bool] = {}


def clear_caches() -> None:
    _MEMO.clear()
    _SPACE_MEMO.clear()


def _canon_key(g: Graph) -> bytes | None:
    if len(g) > CANONICAL_CAP:
        return None
    return canonical_form(g)


def _tick(counter: list[int]) -> None:
    counter[0] += 1
    if counter[0] > SEARCH_NODE_BUDGET:
        raise SearchBudgetExceeded(
            f"contractibility search exceeded {SEARCH_NODE_BUDGET} nodes"
        )


def _search(g: Graph, counter: list[int]) -> tuple[str, ...] | None:
    """Deletion order reducing ``g`` to one vertex, or None if impossible.

    Candidates are tried in ascending (degree, label) order; the search
    backtracks across first deletions, so a None answer is exhaustive.
    """
    n = len(g)
    if n == 0:
        return None
    if n == 1:
        return ()
    if not g.is_connected():
        return None
    key = _canon_key(g)
    if key is not None and _MEMO.get(key) is False:
        return None
    _tick(counter)
    for v in sorted(g.vertices, key=lambda v: (g.degree(v), v)):
        nbrs = g.neighbors(v)
        if not nbrs:
            continue
        if not _bool_contractible(g.induced(nbrs), counter):
            continue
        rest = _search(g.without_vertex(v), counter)
        if rest is not None:
            if key is not None:
                _MEMO[key] = True
            return (v, *rest)
    if key is not None:
        _MEMO[key] = False
    return None


def _bool_contractible(g: Graph, counter: list[int] | None = None) -> bool:
    n = len(g)
    if n == 0:
        return False
    if n == 1:
        return True
    if not g.is_connected():
        return False
    key = _canon_key(g)
    if key is not None and key in _MEMO:
        return _MEMO[key]
    if counter is None:
        counter = [0]
    return _search(g, counter) is not None


def is_contractible(g: Graph) -> ContractibilityVerdict:
    """Decide contractibility; True answers carry a replayable deletion
    order, False answers carry the compressed remainder as a witness."""
    if len(g) == 0:
        return ContractibilityVerdict(False, remainder=g)
    if len(g) == 1:
        return ContractibilityVerdict(True, deletion_order=())
    if not g.is_connected():
        return ContractibilityVerdict(False, remainder=compress_graph(g)[0])
    # A contractible graph always has the invariants of a point, so a
    # differing Euler characteristic refutes without any search.
    try:
        if invariants.euler_characteristic_graph(g) != 1:
            return ContractibilityVerdict(False, remainder=compress_graph(g)[0])
    except invariants.SizeCapExceeded:
        pass
    order = _search(g, [0])
    if order is not None:
        return ContractibilityVerdict(True, deletion_order=order)
    return ContractibilityVerdict(False, remainder=compress_graph(g)[0])


def is_simple_point(g: Graph, v: str) -> bool:
    """A vertex is simple when its rim (neighborhood subgraph) is contractible."""
    nbrs = g.neighbors(v)
    if not nbrs:
        return False
    return _bool_contractible(g.induced(nbrs))


def is_simple_edge(g: Graph, edge: tuple[str, str]) -> bool:
    """An edge is simple when the common neighborhood of its endpoints is
    a contractible subgraph; an empty common neighborhood is not."""
    a, b = edge
    if not g.has_edge(a, b):
        raise graphkit.UnknownEdge(f"edge ({a!r}, {b!r}) not in graph")
    common = g.neighbors(a) & g.neighbors(b)
    if not common:
        return False
    return _bool_contractible(g.induced(common))


# ---------------------------------------------------------------------------
# Validated single transformations
# ---------------------------------------------------------------------------


def delete_point(g: Graph, v: str) -> tuple[Graph, TraceStep]:
    nbrs = tuple(sorted(g.neighbors(v)))
    if not is_simple_point(g, v):
        raise SimplicityError(f"vertex {v!r} is not simple", v, nbrs)
    return g.without_vertex(v), TraceStep("delete_point", v, nbrs)


def attach_point(g: Graph, v: str, rim_labels: Iterable[str]) -> tuple[Graph, TraceStep]:
    rim = tuple(sorted(set(map(str, rim_labels))))
    if not rim or not _bool_contractible(g.induced(rim)):
        raise SimplicityError(
            f"attachment rim for {v!r} is not contractible", v, rim
        )
    return g.with_vertex(v, rim), TraceStep("attach_point", v, rim)


def delete_edge(g: Graph, edge: tuple[str, str]) -> tuple[Graph, TraceStep]:
    a, b = edge
    common = tuple(sorted(g.neighbors(a) & g.neighbors(b)))
    if not is_simple_edge(g, edge):
        raise SimplicityError(f"edge ({a!r}, {b!r}) is not simple", (a, b), common)
    e = (a, b) if a < b else (b, a)
    return g.without_edge(a, b), TraceStep("delete_edge", e, common)


def attach_edge(g: Graph, edge: tuple[str, str]) -> tuple[Graph, TraceStep]:
    a, b = edge
    if g.has_edge(a, b):
        raise ValueError(f"edge ({a!r}, {b!r}) already present")
    common = tuple(sorted(g.neighbors(a) & g.neighbors(b)))
    # the common neighborhood is the same before and after insertion
    if not common or not _bool_contractible(g.induced(common)):
        raise SimplicityError(
            f"edge ({a!r}, {b!r}) would not be simple", (a, b), common
        )
    e = (a, b) if a < b else (b, a)
    return g.with_edge(a, b), TraceStep("attach_edge", e, common)


# ---------------------------------------------------------------------------
# Compression
# ---------------------------------------------------------------------------

_POLICIES = ("min-degree", "max-degree", "lex")


def _policy_key(policy: str, degree_of):
    if policy == "min-degree":
        return lambda x: (degree_of(x), x)
    if policy == "max-degree":
        return lambda x: (-degree_of(x), x)
    if policy == "lex":
        return lambda x: x
    raise ValueError(f"unknown policy {policy!r}; expected one of {_POLICIES}")


def compress_graph(g: Graph, policy: str = "min-degree") -> tuple[Graph, list[TraceStep]]:
    """Delete simple points chosen by the policy until none remains.

    Deterministic for a fixed policy: candidates are ranked by the policy
    key with label order breaking ties.
    """
    trace: list[TraceStep] = []
    cache: dict[str, bool] = {}
    while True:
        key = _policy_key(policy, g.degree)
        pick = None
        for v in sorted(g.vertices, key=key):
            simple = cache.get(v)
            if simple is None:
                nbrs = g.neighbors(v)
                simple = bool(nbrs) and _bool_contractible(g.induced(nbrs))
                cache[v] = simple
            if simple:
                pick = v
                break
        if pick is None:
            return g, trace
        nbrs = tuple(sorted(g.neighbors(pick)))
        trace.append(TraceStep("delete_point", pick, nbrs))
        g = g.without_vertex(pick)
        cache.pop(pick, None)
        for u in nbrs:
            cache.pop(u, None)


# ---------------------------------------------------------------------------
# Cube-set operations
# ---------------------------------------------------------------------------


def is_simple_cube(space: CubicalSpace, u: Cube) -> bool:
    """A cube is simple when its rim is a contractible cube set."""
    r = lattice.rim(space, u)
    if len(r) == 0:
        return False
    return _bool_contractible(graphkit.intersection_graph(r))


def _native_space_contractible(n: int, cubes: frozenset[Cube]) -> bool:
    """Literal recursion on cube sets, independent of the graph engine.

    Used by strict mode only; capped because it memoizes on translated
    cube sets rather than canonical forms.
    """
    if len(cubes) > STRICT_SPACE_CAP:
        raise GraphTooLarge(
            f"strict-mode recursion capped at {STRICT_SPACE_CAP} cubes"
        )
    if len(cubes) == 1:
        return True
    mins = [min(c[i] for c in cubes) for i in range(n)]
    key = (n, frozenset(tuple(x - m for x, m in zip(c, mins)) for c in cubes))
    hit = _SPACE_MEMO.get(key)
    if hit is not None:
        return hit
    offsets = lattice.neighbor_offsets(n)

    def neighbors(u: Cube) -> list[Cube]:
        out = []
        for off in offsets:
            v = tuple(c + d for c, d in zip(u, off))
            if v in cubes:
                out.append(v)
        return out

    # connectivity
    start = next(iter(cubes))
    seen = {start}
    stack = [start]
    while stack:
        for v in neighbors(stack.pop()):
            if v not in seen:
                seen.add(v)
                stack.append(v)
    if len(seen) != len(cubes):
        _SPACE_MEMO[key] = False
        return False
    result = False
    for u in sorted(cubes, key=lambda u: (len(neighbors(u)), u)):
        rim_cubes = frozenset(neighbors(u))
        if not rim_cubes:
            continue
        if _native_space_contractible(n, rim_cubes) and _native_space_contractible(
            n, cubes - {u}
        ):
            result = True
            break
    _SPACE_MEMO[key] = result
    return result


def is_contractible_space(
    space: CubicalSpace, strict: bool = False
) -> SpaceContractibilityVerdict:
    """Contractibility of a cube set, decided on its intersection graph.

    Rims and deletions depend only on the intersection pattern, so the
    cube recursion is the graph recursion read through the cube-vertex
    bijection.  With ``strict`` the native cube recursion is run as well
    and any disagreement raises instead of being swallowed.
    """
    if len(space) == 0:
        raise ValueError("contractibility of an empty space is undefined")
    g = graphkit.intersection_graph(space)
    verdict = is_contractible(g)
    if strict:
        native = _native_space_contractible(space.n, space.cubes)
        if native != verdict.contractible:
            raise StrictModeDisagreement(
                f"graph recursion said {verdict.contractible}, "
                f"native cube recursion said {native}"
            )
    if verdict.contractible:
        order = tuple(parse_cube_label(v) for v in verdict.deletion_order)
        return SpaceContractibilityVerdict(True, deletion_order=order)
    remainder = None
    if verdict.remainder is not None:
        remainder = CubicalSpace(
            space.n,
            space.side,
            [parse_cube_label(v) for v in verdict.remainder.vertices],
        )
    return SpaceContractibilityVerdict(False, remainder=remainder)


def compress_space(
    space: CubicalSpace, policy: str = "min-degree"
) -> tuple[CubicalSpace, list[TraceStep]]:
    """Delete simple cubes under the policy until the set is compressed.

    The simplicity cache is invalidated only around each deletion: a
    cube's rim changes exactly when the deleted cube was adjacent to it.
    """
    n = space.n
    cubes = set(space.cubes)
    offsets = lattice.neighbor_offsets(n)

    def neighbors(u: Cube) -> list[Cube]:
        out = []
        for off in offsets:
            v = tuple(c + d for c, d in zip(u, off))
            if v in cubes:
                out.append(v)
        return out

    deg = {u: len(neighbors(u)) for u in cubes}
    cache: dict[Cube, bool] = {}
    trace: list[TraceStep] = []
    key = _policy_key(policy, lambda u: deg[u])
    while True:
        pick = None
        for u in sorted(cubes, key=key):
            simple = cache.get(u)
            if simple is None:
                rim_cubes = neighbors(u)
                if rim_cubes:
                    rim_graph = graphkit.intersection_graph(
                        CubicalSpace(n, space.side, rim_cubes)
                    )
                    simple = _bool_contractible(rim_graph)
                else:
                    simple = False
                cache[u] = simple
            if simple:
                pick = u
                break
        if pick is None:
            break
        rim_now = neighbors(pick)
        trace.append(
            TraceStep(
                "delete_cube",
                cube_label(pick),
                tuple(sorted(cube_label(v) for v in rim_now)),
            )
        )
        cubes.remove(pick)
        cache.pop(pick, None)
        deg.pop(pick)
        for v in rim_now:
            cache.pop(v, None)
            deg[v] -= 1
    return CubicalSpace(n, space.side, cubes), trace


def delete_cube(space: CubicalSpace, u: Cube) -> tuple[CubicalSpace, TraceStep]:
    u = tuple(u)
    rim_cubes = lattice.rim(space, u)
    rim_labels = tuple(sorted(cube_label(v) for v in rim_cubes.cubes))
    if not is_simple_cube(space, u):
        raise SimplicityError(f"cube {u} is not simple", cube_label(u), rim_labels)
    return space.without(u), TraceStep("delete_cube", cube_label(u), rim_labels)


def attach_cube(space: CubicalSpace, u: Cube) -> tuple[CubicalSpace, TraceStep]:
    u = tuple(u)
    if u in space:
        raise ValueError(f"cube {u} already in space")
    grown = space.with_cubes([u])
    rim_cubes = lattice.rim(grown, u)
    rim_labels = tuple(sorted(cube_label(v) for v in rim_cubes.cubes))
    if not is_simple_cube(grown, u):
        raise SimplicityError(
            f"cube {u} would not be simple after attachment", cube_label(u), rim_labels
        )
    return grown, TraceStep("attach_cube", cube_label(u), rim_labels)


# ---------------------------------------------------------------------------
# Homotopy equivalence
# ---------------------------------------------------------------------------


def _fingerprint_key(g: Graph):
    if len(g) <= 350:
        return invariants.fingerprint(g).key()
    # Large graphs: Euler characteristic and component count still refute.
    return (
        invariants.euler_characteristic_graph(g),
        len(g.connected_components()),
    )


def _invert_step(step: TraceStep) -> TraceStep:
    flip = {
        "delete_point": "attach_point",
        "attach_point": "delete_point",
        "delete_edge": "attach_edge",
        "attach_edge": "delete_edge",
        "delete_cube": "attach_cube",
        "attach_cube": "delete_cube",
    }
    return TraceStep(flip[step.op], step.element, step.rim)


def _fresh_label(g: Graph) -> str:
    k = 0
    while f"w{k}" in g:
        k += 1
    return f"w{k}"


def _contractible_subsets(g: Graph, max_size: int) -> list[tuple[str, ...]]:
    found: set[frozenset[str]] = {frozenset([v]) for v in g.vertices}
    layer = set(found)
    for _ in range(max_size - 1):
        nxt: set[frozenset[str]] = set()
        for s in layer:
            boundary = set()
            for v in s:
                boundary |= g.neighbors(v)
            for u in boundary - s:
                nxt.add(s | {u})
        nxt -= found
        found |= nxt
        layer = nxt
    out = [
        tuple(sorted(s)) for s in found if _bool_contractible(g.induced(s))
    ]
    return sorted(out)


def _moves(g: Graph, grow_limit: int) -> list[tuple[TraceStep, Graph]]:
    moves: list[tuple[TraceStep, Graph]] = []
    for v in g.vertices:
        nbrs = g.neighbors(v)
        if nbrs and _bool_contractible(g.induced(nbrs)):
            moves.append(
                (
                    TraceStep("delete_point", v, tuple(sorted(nbrs))),
                    g.without_vertex(v),
                )
            )
    if len(g) < grow_limit:
        fresh = _fresh_label(g)
        max_rim = min(ATTACH_RIM_MAX, len(g))
        for rim in _contractible_subsets(g, max_rim):
            moves.append(
                (TraceStep("attach_point", fresh, rim), g.with_vertex(fresh, rim))
            )
    for a, b in sorted(g.edges):
        common = g.neighbors(a) & g.neighbors(b)
        if common and _bool_contractible(g.induced(common)):
            moves.append(
                (
                    TraceStep("delete_edge", (a, b), tuple(sorted(common))),
                    g.without_edge(a, b),
                )
            )
    for a, b in combinations(g.vertices, 2):
        if g.has_edge(a, b):
            continue
        common = g.neighbors(a) & g.neighbors(b)
        if common and _bool_contractible(g.induced(common)):
            moves.append(
                (
                    TraceStep("attach_edge", (a, b), tuple(sorted(common))),
                    g.with_edge(a, b),
                )
            )
    return moves


def _bidirectional_search(
    start_a: Graph, start_b: Graph, budget: int, grow_limit: int
) -> tuple[list[TraceStep], Graph, list[TraceStep], Graph] | str:
    """Meet-in-the-middle over contractible transformations.

    Returns (steps_from_a, end_a, steps_from_b, end_b) where end_a and
    end_b are isomorphic, or a reason string on failure.
    """
    side_a: dict[bytes, tuple[Graph, list[TraceStep]]] = {
        canonical_form(start_a): (start_a, [])
    }
    side_b: dict[bytes, tuple[Graph, list[TraceStep]]] = {
        canonical_form(start_b): (start_b, [])
    }
    front_a = deque(side_a)
    front_b = deque(side_b)
    explored = 0
    while front_a and front_b:
        if len(front_a) <= len(front_b):
            side, other, front, from_a = side_a, side_b, front_a, True
        else:
            side, other, front, from_a = side_b, side_a, front_b, False
        for _ in range(len(front)):
            key = front.popleft()
            g, steps = side[key]
            explored += 1
            if explored > budget:
                return "budget exhausted"
            for step, g2 in _moves(g, grow_limit):
                if len(g2) > CANONICAL_CAP:
                    continue
                k2 = canonical_form(g2)
                if k2 in side:
                    continue
                path = steps + [step]
                side[k2] = (g2, path)
                if k2 in other:
                    og, osteps = other[k2]
                    if from_a:
                        return path, g2, osteps, og
                    return osteps, og, path, g2
                front.append(k2)
    return "state space exhausted under growth bound"


def homotopy_equivalent(g: Graph, h: Graph, budget: int = 100_000) -> EquivalenceResult:
    """Decide homotopy equivalence via invariants, compression, then search.

    Pipeline: (1) differing fingerprints refute outright; (2) compressed
    forms that are isomorphic prove equivalence with a concatenated
    deletion/attachment trace; (3) otherwise a budget-bounded
    bidirectional search over contractible transformations runs, with
    Unknown as the honest fallback.  Every Yes carries a trace that
    replays from ``g`` to exactly ``h``.
    """
    if len(g) == 0 or len(h) == 0:
        if len(g) == 0 and len(h) == 0:
            return EquivalenceResult("yes", trace=[])
        return EquivalenceResult("no", witness="one graph is empty")
    if g == h:
        return EquivalenceResult("yes", trace=[])
    fk_g, fk_h = _fingerprint_key(g), _fingerprint_key(h)
    if fk_g != fk_h:
        return EquivalenceResult(
            "no", witness=f"invariants differ: {fk_g} vs {fk_h}"
        )
    cg, trace_g = compress_graph(g)
    ch, trace_h = compress_graph(h)
    back = [_invert_step(s) for s in reversed(trace_h)]
    if len(cg) <= CANONICAL_CAP and len(ch) <= CANONICAL_CAP:
        sigma = isomorphism(cg, ch)
        if sigma is not None:
            trace = list(trace_g)
            if cg != ch:
                trace.append(
                    TraceStep("relabel", mapping=tuple(sorted(sigma.items())))
                )
            trace += back
            assert replay_graph_trace(g, trace) == h
            return EquivalenceResult("yes", trace=trace)
    else:
        return EquivalenceResult(
            "unknown",
            witness="compressed graphs exceed the canonicalization cap",
        )
    grow_limit = max(len(cg), len(ch)) + 2
    if grow_limit > CANONICAL_CAP:
        grow_limit = CANONICAL_CAP
    outcome = _bidirectional_search(cg, ch, budget, grow_limit)
    if isinstance(outcome, str):
        return EquivalenceResult("unknown", witness=outcome)
    steps_a, end_a, steps_b, end_b = outcome
    sigma = isomorphism(end_a, end_b)
    if sigma is None:  # pragma: no cover - canonical forms matched
        raise AssertionError("meet states not isomorphic")
    trace = list(trace_g) + steps_a
    if end_a != end_b:
        trace.append(TraceStep("relabel", mapping=tuple(sorted(sigma.items()))))
    trace += [_invert_step(s) for s in reversed(steps_b)]
    trace += back
    assert replay_graph_trace(g, trace) == h
    return EquivalenceResult("yes", trace=trace)


# ---------------------------------------------------------------------------
# Trace replay
# ---------------------------------------------------------------------------


def replay_graph_trace(g: Graph, steps: Iterable[TraceStep]) -> Graph:
    """Re-validate every certificate in a graph trace; returns the final
    graph or raises TraceError at the first failing step."""
    for i, step in enumerate(steps):
        try:
            g = _apply_graph_step(g, step)
        except (SimplicityError, ValueError) as exc:
            raise TraceError(f"step {i} ({step.op}) failed: {exc}") from exc
    return g


def _apply_graph_step(g: Graph, step: TraceStep) -> Graph:
    if step.op == "delete_point":
        v = step.element
        actual = tuple(sorted(g.neighbors(v)))
        if actual != tuple(sorted(step.rim)):
            raise SimplicityError(
                f"recorded rim {step.rim} does not match live rim {actual}", v, actual
            )
        return delete_point(g, v)[0]
    if step.op == "attach_point":
        return attach_point(g, step.element, step.rim)[0]
    if step.op == "delete_edge":
        a, b = step.element
        actual = tuple(sorted(g.neighbors(a) & g.neighbors(b)))
        if actual != tuple(sorted(step.rim)):
            raise SimplicityError(
                f"recorded common neighborhood {step.rim} does not match {actual}",
                (a, b),
                actual,
            )
        return delete_edge(g, (a, b))[0]
    if step.op == "attach_edge":
        return attach_edge(g, step.element)[0]
    if step.op == "relabel":
        return g.relabel(dict(step.mapping))
    raise ValueError(f"unknown graph trace op {step.op!r}")


def replay_space_trace(space: CubicalSpace, steps: Iterable[TraceStep]) -> CubicalSpace:
    """Re-validate a cube-set trace; returns the final space."""
    for i, step in enumerate(steps):
        try:
            space = _apply_space_step(space, step)
        except (SimplicityError, ValueError) as exc:
            raise TraceError(f"step {i} ({step.op}) failed: {exc}") from exc
    return space


def _apply_space_step(space: CubicalSpace, step: TraceStep) -> CubicalSpace:
    u = parse_cube_label(step.element)
    if step.op == "delete_cube":
        actual = tuple(sorted(cube_label(v) for v in lattice.rim(space, u).cubes))
        if actual != tuple(sorted(step.rim)):
            raise SimplicityError(
                f"recorded rim {step.rim} does not match live rim {actual}",
                step.element,
                actual,
            )
        return delete_cube(space, u)[0]
    if step.op == "attach_cube":
        grown, recorded = attach_cube(space, u)
        if tuple(sorted(recorded.rim)) != tuple(sorted(step.rim)):
            raise SimplicityError(
                f"recorded rim {step.rim} does not match live rim {recorded.rim}",
                step.element,
                recorded.rim,
            )
        return grown
    raise ValueError(f"unknown space trace op {step.op!r}")
