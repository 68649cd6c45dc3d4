"""Cubical spaces on the integer lattice.

A cubical space is a finite set of closed, axis-aligned n-cubes of one
common side length, each identified by the integer coordinates of its
minimal corner (the cube spans ``[L*c_i, L*(c_i+1)]`` on axis ``i``).
Because the cubes are closed, two cubes meet exactly when their corner
coordinates differ by at most one on every axis, and the overlap is then
a shared lower-dimensional face.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction
from itertools import product
from pathlib import Path
from typing import Iterable, Iterator

Cube = tuple[int, ...]

__all__ = [
    "Cube",
    "CubicalSpace",
    "Face",
    "DimensionMismatch",
    "MissingCube",
    "cube",
    "cube_label",
    "parse_cube_label",
    "cubes_intersect",
    "neighbor_offsets",
    "rim",
    "ball",
    "image_faces",
    "translate",
    "space_to_json",
    "space_from_json",
    "save_space",
    "load_space",
]


class DimensionMismatch(ValueError):
    """Cubes or spaces of different dimensions were mixed."""


class MissingCube(ValueError):
    """An operation expected a cube that is not in the space."""


def cube(coords: Iterable[int]) -> Cube:
    """Normalize an iterable of integers into a cube identifier."""
    c = tuple(int(x) for x in coords)
    if not c:
        raise ValueError("a cube needs at least one coordinate")
    return c


def cube_label(u: Cube) -> str:
    """Stable string label for a cube, used as its graph vertex name."""
    return ",".join(str(x) for x in u)


def parse_cube_label(label: str) -> Cube:
    return tuple(int(part) for part in label.split(","))


@dataclass(frozen=True)
class CubicalSpace:
    """Immutable set of same-size n-cubes at one resolution.

    ``side`` is kept as an exact rational so that halving the resolution
    never loses precision.  Inserting a duplicate cube is a no-op by
    frozenset semantics.
    """

    n: int
    side: Fraction
    cubes: frozenset[Cube]

    def __init__(self, n: int, side: Fraction | int | str, cubes: Iterable[Cube] = ()):
        if n < 1:
            raise ValueError("dimension must be >= 1")
        side = Fraction(side)
        if side <= 0:
            raise ValueError("side length must be positive")
        frozen = frozenset(tuple(int(x) for x in c) for c in cubes)
        for c in frozen:
            if len(c) != n:
                raise DimensionMismatch(
                    f"cube {c} has dimension {len(c)}, space has dimension {n}"
                )
        object.__setattr__(self, "n", n)
        object.__setattr__(self, "side", side)
        object.__setattr__(self, "cubes", frozen)

    def __len__(self) -> int:
        return len(self.cubes)

    def __contains__(self, u: Cube) -> bool:
        return tuple(u) in self.cubes

    def __iter__(self) -> Iterator[Cube]:
        return iter(self.sorted_cubes())

    def sorted_cubes(self) -> list[Cube]:
        return sorted(self.cubes)

    def with_cubes(self, extra: Iterable[Cube]) -> "CubicalSpace":
        return CubicalSpace(self.n, self.side, self.cubes | set(map(tuple, extra)))

    def without(self, u: Cube) -> "CubicalSpace":
        u = tuple(u)
        if u not in self.cubes:
            raise MissingCube(f"cube {u} not in space")
        return CubicalSpace(self.n, self.side, self.cubes - {u})


def cubes_intersect(a: Cube, b: Cube) -> bool:
    """True when the closed cubes with corners ``a`` and ``b`` share a point.

    For unit cubes on the same lattice this is Chebyshev distance <= 1 on
    the corner coordinates; corner-touching cubes count as intersecting.
    """
    if len(a) != len(b):
        raise DimensionMismatch(f"cube dimensions differ: {len(a)} vs {len(b)}")
    return all(abs(x - y) <= 1 for x, y in zip(a, b))


def neighbor_offsets(n: int) -> list[Cube]:
    """All nonzero offsets in {-1,0,1}^n, i.e. the 3^n - 1 possible neighbors."""
    return [off for off in product((-1, 0, 1), repeat=n) if any(off)]


def rim(space: CubicalSpace, u: Cube) -> CubicalSpace:
    """All cubes of the space intersecting ``u``, excluding ``u`` itself."""
    u = tuple(u)
    if u not in space.cubes:
        raise MissingCube(f"cube {u} not in space")
    members = []
    for off in neighbor_offsets(space.n):
        v = tuple(c + d for c, d in zip(u, off))
        if v in space.cubes:
            members.append(v)
    return CubicalSpace(space.n, space.side, members)


def ball(space: CubicalSpace, u: Cube) -> CubicalSpace:
    """The rim of ``u`` together with ``u`` itself."""
    return rim(space, u).with_cubes([tuple(u)])


@dataclass(frozen=True)
class Face:
    """A face of a lattice cube, keyed by its minimal corner and spanned axes.

    ``axes`` lists the coordinate directions along which the face extends;
    its dimension is ``len(axes)``.  The (anchor, axes) key is unique, so
    face sets deduplicate exactly.
    """

    anchor: tuple[int, ...]
    axes: frozenset[int]

    @property
    def dim(self) -> int:
        return len(self.axes)


# Per axis a face either sits at the low corner, the high corner, or spans.
_FACE_CHOICES = ((0, False), (1, False), (0, True))


def cube_faces(u: Cube) -> Iterator[Face]:
    """All 3^n closed faces of a cube, from vertices up to the cube itself."""
    n = len(u)
    for choice in product(_FACE_CHOICES, repeat=n):
        anchor = tuple(c + off for c, (off, _) in zip(u, choice))
        axes = frozenset(i for i, (_, span) in enumerate(choice) if span)
        yield Face(anchor, axes)


def image_faces(space: CubicalSpace) -> dict[int, int]:
    """Count the distinct d-faces of the union of all cubes, per dimension.

    Every cube contributes its full closed face lattice; shared faces are
    counted once.  The alternating sum of these counts is the Euler
    characteristic of the union.
    """
    seen: set[Face] = set()
    for u in space.cubes:
        seen.update(cube_faces(u))
    counts = {d: 0 for d in range(space.n + 1)}
    for face in seen:
        counts[face.dim] += 1
    return counts


def translate(space: CubicalSpace, offset: Cube) -> CubicalSpace:
    if len(offset) != space.n:
        raise DimensionMismatch("offset dimension mismatch")
    moved = [tuple(c + d for c, d in zip(u, offset)) for u in space.cubes]
    return CubicalSpace(space.n, space.side, moved)


def space_to_json(space: CubicalSpace) -> dict:
    return {
        "n": space.n,
        "side": str(space.side),
        "cubes": [list(c) for c in sorted(space.cubes)],
    }


def space_from_json(obj: dict) -> CubicalSpace:
    try:
        n = int(obj["n"])
        side = Fraction(str(obj["side"]))
        cubes = [tuple(int(x) for x in c) for c in obj["cubes"]]
    except (KeyError, TypeError, ValueError) as exc:
        raise ValueError(f"malformed cubical space file: {exc}") from exc
    return CubicalSpace(n, side, cubes)


def save_space(space: CubicalSpace, path: str | Path) -> None:
    Path(path).write_text(json.dumps(space_to_json(space), indent=1) + "\n")


def load_space(path: str | Path) -> CubicalSpace:
    return space_from_json(json.loads(Path(path).read_text()))
