"""Digitizers: cubical models of continuous objects and resolution ladders.

A model collects every lattice cube that meets the object.  For the
geometric primitives the meet test is exact rational arithmetic (clamped
squared distances for balls and shells, interval overlap for boxes), so
the coverage guarantee holds with no tolerance.  Arbitrary shapes come
in as boolean voxel masks and are tested by conservative point sampling,
which marks everything derived from them as approximate.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction
from itertools import product
from pathlib import Path
from typing import Iterable

from . import invariants, lattice
from .lattice import Cube, CubicalSpace

__all__ = [
    "Ball",
    "SphereShell",
    "Box",
    "SampledMask",
    "ObjectSpec",
    "Bounds",
    "ResolutionLadder",
    "BoundsError",
    "EmptyModel",
    "is_exact",
    "default_bounds",
    "cube_intersects_object",
    "build_cubical_model",
    "refine_sequence",
    "stability_scan",
    "object_from_json",
    "object_to_json",
    "load_object",
]


class BoundsError(ValueError):
    """The object is not contained in the supplied bounds."""


class EmptyModel(ValueError):
    """Digitization produced no cubes."""


def _frac_vec(values: Iterable) -> tuple[Fraction, ...]:
    return tuple(Fraction(str(v)) for v in values)


@dataclass(frozen=True)
class Ball:
    center: tuple[Fraction, ...]
    radius: Fraction

    def __post_init__(self):
        object.__setattr__(self, "center", _frac_vec(self.center))
        object.__setattr__(self, "radius", Fraction(str(self.radius)))
        if self.radius <= 0:
            raise ValueError("radius must be positive")

    @property
    def n(self) -> int:
        return len(self.center)


@dataclass(frozen=True)
class SphereShell:
    center: tuple[Fraction, ...]
    inner_radius: Fraction
    outer_radius: Fraction

    def __post_init__(self):
        object.__setattr__(self, "center", _frac_vec(self.center))
        object.__setattr__(self, "inner_radius", Fraction(str(self.inner_radius)))
        object.__setattr__(self, "outer_radius", Fraction(str(self.outer_radius)))
        if not 0 < self.inner_radius < self.outer_radius:
            raise ValueError("need 0 < inner_radius < outer_radius")

    @property
    def n(self) -> int:
        return len(self.center)


@dataclass(frozen=True)
class Box:
    min_corner: tuple[Fraction, ...]
    max_corner: tuple[Fraction, ...]

    def __post_init__(self):
        object.__setattr__(self, "min_corner", _frac_vec(self.min_corner))
        object.__setattr__(self, "max_corner", _frac_vec(self.max_corner))
        if len(self.min_corner) != len(self.max_corner):
            raise lattice.DimensionMismatch("box corners differ in dimension")
        if not all(a < b for a, b in zip(self.min_corner, self.max_corner)):
            raise ValueError("box needs min < max on every axis")

    @property
    def n(self) -> int:
        return len(self.min_corner)


@dataclass(frozen=True)
class SampledMask:
    """Dense boolean voxel mask standing in for an arbitrary predicate.

    The mask covers ``origin + [0, cell*shape]``; a point is inside the
    object when its voxel is set.  Meet tests sample a uniform grid of
    ``samples_per_axis`` points per cube edge, endpoints included, so
    they are conservative, never exact.
    """

    origin: tuple[Fraction, ...]
    cell: Fraction
    shape: tuple[int, ...]
    data: tuple[int, ...]
    samples_per_axis: int = 3

    def __post_init__(self):
        object.__setattr__(self, "origin", _frac_vec(self.origin))
        object.__setattr__(self, "cell", Fraction(str(self.cell)))
        object.__setattr__(self, "shape", tuple(int(s) for s in self.shape))
        object.__setattr__(self, "data", tuple(int(x) for x in self.data))
        if self.cell <= 0:
            raise ValueError("cell size must be positive")
        size = 1
        for s in self.shape:
            size *= s
        if size != len(self.data):
            raise ValueError("mask data does not match shape")
        if self.samples_per_axis < 2:
            raise ValueError("need at least 2 samples per axis")

    @property
    def n(self) -> int:
        return len(self.shape)

    def contains_point(self, point: tuple[Fraction, ...]) -> bool:
        idx = []
        for p, o, s in zip(point, self.origin, self.shape):
            rel = (p - o) / self.cell
            i = int(rel)  # floor for nonnegative; negatives fall outside anyway
            if rel < 0 or i >= s:
                return False
            idx.append(i)
        flat = 0
        for i, s in zip(idx, self.shape):
            flat = flat * s + i
        return bool(self.data[flat])


ObjectSpec = Ball | SphereShell | Box | SampledMask


def is_exact(spec: ObjectSpec) -> bool:
    return not isinstance(spec, SampledMask)


@dataclass(frozen=True)
class Bounds:
    """Half-open integer box of cube corners: lo[i] <= c[i] < hi[i]."""

    lo: tuple[int, ...]
    hi: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "lo", tuple(int(x) for x in self.lo))
        object.__setattr__(self, "hi", tuple(int(x) for x in self.hi))
        if len(self.lo) != len(self.hi):
            raise lattice.DimensionMismatch("bounds corners differ in dimension")
        if not all(a < b for a, b in zip(self.lo, self.hi)):
            raise ValueError("bounds need lo < hi on every axis")

    @property
    def n(self) -> int:
        return len(self.lo)

    def iter_cubes(self):
        return product(*(range(a, b) for a, b in zip(self.lo, self.hi)))

    def scaled(self, factor: int) -> "Bounds":
        return Bounds(
            tuple(a * factor for a in self.lo), tuple(b * factor for b in self.hi)
        )


@dataclass
class ResolutionLadder:
    """Models of one object at sides L, L/2, L/4, ..."""

    levels: list[tuple[Fraction, CubicalSpace]]


def _object_box(spec: ObjectSpec) -> tuple[tuple[Fraction, ...], tuple[Fraction, ...]]:
    if isinstance(spec, Ball):
        return (
            tuple(c - spec.radius for c in spec.center),
            tuple(c + spec.radius for c in spec.center),
        )
    if isinstance(spec, SphereShell):
        return (
            tuple(c - spec.outer_radius for c in spec.center),
            tuple(c + spec.outer_radius for c in spec.center),
        )
    if isinstance(spec, Box):
        return spec.min_corner, spec.max_corner
    lo = spec.origin
    hi = tuple(o + spec.cell * s for o, s in zip(spec.origin, spec.shape))
    return lo, hi


def default_bounds(spec: ObjectSpec, side: Fraction) -> Bounds:
    """Smallest integer box of cubes covering the object, one cube margin."""
    side = Fraction(str(side))
    lo_pt, hi_pt = _object_box(spec)
    lo = tuple(_floor_div(p, side) - 1 for p in lo_pt)
    hi = tuple(_floor_div(p, side) + 2 for p in hi_pt)
    return Bounds(lo, hi)


def _floor_div(value: Fraction, side: Fraction) -> int:
    q = value / side
    return q.numerator // q.denominator


def _min_sq_dist(center, side: Fraction, cube: Cube) -> Fraction:
    total = Fraction(0)
    for x, c in zip(center, cube):
        lo, hi = side * c, side * (c + 1)
        if x < lo:
            total += (lo - x) ** 2
        elif x > hi:
            total += (x - hi) ** 2
    return total

def _max_sq_dist(center, side: Fraction, cube: Cube) -> Fraction:
    total = Fraction(0)
    for x, c in zip(center, cube):
        lo, hi = side * c, side * (c + 1)
        total += max(abs(x - lo), abs(hi - x)) ** 2
    return total


def cube_intersects_object(spec: ObjectSpec, side: Fraction, cube: Cube) -> bool:
    """Does the closed cube meet the object?  Exact for primitives."""
    side = Fraction(str(side))
    if spec.n != len(cube):
        raise lattice.DimensionMismatch(
            f"object dimension {spec.n} vs cube dimension {len(cube)}"
        )
    if isinstance(spec, Ball):
        return _min_sq_dist(spec.center, side, cube) <= spec.radius**2
    if isinstance(spec, SphereShell):
        return (
            _min_sq_dist(spec.center, side, cube) <= spec.outer_radius**2
            and _max_sq_dist(spec.center, side, cube) >= spec.inner_radius**2
        )
    if isinstance(spec, Box):
        return all(
            side * c <= bmax and side * (c + 1) >= bmin
            for c, bmin, bmax in zip(cube, spec.min_corner, spec.max_corner)
        )
    s = spec.samples_per_axis
    ticks = [Fraction(j, s - 1) for j in range(s)]
    for offs in product(ticks, repeat=spec.n):
        point = tuple(side * (c + t) for c, t in zip(cube, offs))
        if spec.contains_point(point):
            return True
    return False


def build_cubical_model(
    spec: ObjectSpec, side: Fraction, bounds: Bounds | None = None
) -> CubicalSpace:
    """All cubes inside the bounds that meet the object.

    For primitives the object must fit inside the bounds (so the model
    covers it); for sampled masks the mask box is required to fit.
    """
    side = Fraction(str(side))
    if bounds is None:
        bounds = default_bounds(spec, side)
    if bounds.n != spec.n:
        raise lattice.DimensionMismatch("bounds dimension does not match object")
    lo_pt, hi_pt = _object_box(spec)
    for lo_i, hi_i, b_lo, b_hi in zip(lo_pt, hi_pt, bounds.lo, bounds.hi):
        if lo_i < side * b_lo or hi_i > side * b_hi:
            raise BoundsError(
                f"object spans [{lo_i}, {hi_i}] outside bounds "
                f"[{side * b_lo}, {side * b_hi}]"
            )
    cubes = [
        c for c in bounds.iter_cubes() if cube_intersects_object(spec, side, c)
    ]
    if not cubes:
        raise EmptyModel("no cube meets the object at this resolution")
    return CubicalSpace(spec.n, side, cubes)


def refine_sequence(
    spec: ObjectSpec,
    side0: Fraction,
    k_levels: int,
    bounds: Bounds | None = None,
) -> ResolutionLadder:
    """Build models at side0, side0/2, ..., halving k_levels times in total.

    Each level is digitized independently; integer bounds double per level
    so they cover the same region exactly.
    """
    if k_levels < 1:
        raise ValueError("need at least one level")
    side0 = Fraction(str(side0))
    if bounds is None:
        bounds = default_bounds(spec, side0)
    levels = []
    for k in range(k_levels):
        side = side0 / (2**k)
        levels.append((side, build_cubical_model(spec, side, bounds.scaled(2**k))))
    return ResolutionLadder(levels)


def stability_scan(ladder: ResolutionLadder) -> int | None:
    """First level (1-based) from which all later invariant fingerprints agree.

    A single-level ladder is trivially stable at 1.  When even the last
    two levels disagree there is no evidence of stability and the scan
    returns None.
    """
    if not ladder.levels:
        raise ValueError("empty ladder")
    keys = []
    for _side, space in ladder.levels:
        keys.append(invariants.fingerprint(space).key())
    k = len(keys)
    if k == 1:
        return 1
    s = None
    for start in range(k - 1, -1, -1):
        if all(keys[i] == keys[start] for i in range(start, k)):
            s = start + 1
        else:
            break
    if s is None or s == k:
        return None
    return s


# ---------------------------------------------------------------------------
# Object spec files
# ---------------------------------------------------------------------------


def object_to_json(spec: ObjectSpec) -> dict:
    if isinstance(spec, Ball):
        return {
            "n": spec.n,
            "kind": "ball",
            "params": {
                "center": [str(c) for c in spec.center],
                "radius": str(spec.radius),
            },
        }
    if isinstance(spec, SphereShell):
        return {
            "n": spec.n,
            "kind": "sphere_shell",
            "params": {
                "center": [str(c) for c in spec.center],
                "inner_radius": str(spec.inner_radius),
                "outer_radius": str(spec.outer_radius),
            },
        }
    if isinstance(spec, Box):
        return {
            "n": spec.n,
            "kind": "box",
            "params": {
                "min_corner": [str(c) for c in spec.min_corner],
                "max_corner": [str(c) for c in spec.max_corner],
            },
        }
    return {
        "n": spec.n,
        "kind": "sampled",
        "params": {
            "origin": [str(c) for c in spec.origin],
            "cell": str(spec.cell),
            "shape": list(spec.shape),
            "samples_per_axis": spec.samples_per_axis,
        },
    }


def object_from_json(obj: dict, mask_dir: Path | None = None) -> ObjectSpec:
    """Parse an object file.  Sampled masks load their voxel data from the
    sidecar file named by ``params.mask`` (resolved against mask_dir)."""
    kind = obj.get("kind")
    params = obj.get("params", {})
    n = int(obj.get("n", 0))
    if kind == "ball":
        spec = Ball(tuple(params["center"]), params["radius"])
    elif kind == "sphere_shell":
        spec = SphereShell(
            tuple(params["center"]),
            params["inner_radius"],
            params["outer_radius"],
        )
    elif kind == "box":
        spec = Box(tuple(params["min_corner"]), tuple(params["max_corner"]))
    elif kind == "sampled":
        if "mask" in params:
            mask_path = Path(params["mask"])
            if mask_dir is not None and not mask_path.is_absolute():
                mask_path = mask_dir / mask_path
            sidecar = json.loads(mask_path.read_text())
        else:
            sidecar = params
        spec = SampledMask(
            origin=tuple(sidecar["origin"]),
            cell=sidecar["cell"],
            shape=tuple(sidecar["shape"]),
            data=tuple(sidecar["data"]),
            samples_per_axis=int(params.get("samples_per_axis", 3)),
        )
    else:
        raise ValueError(f"unknown object kind {kind!r}")
    if n and spec.n != n:
        raise lattice.DimensionMismatch(
            f"object file says n={n} but parameters have dimension {spec.n}"
        )
    return spec


def load_object(path: str | Path) -> ObjectSpec:
    path = Path(path)
    return object_from_json(json.loads(path.read_text()), mask_dir=path.parent)
