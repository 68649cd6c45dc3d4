"""Command-line pipeline: digitize, compress, graph, invariants, equiv,
refine, replay.

Exit codes are a stable contract: 0 for success or Yes, 1 for No or any
domain failure, 2 for Unknown or budget exhaustion.  ``compress`` exits
3 when the input was already compressed (output still written).  All
emitted files are canonical JSON that re-parses to the same value.
"""

from __future__ import annotations

import hashlib
import json
import sys
from fractions import Fraction
from pathlib import Path

import click

from . import digitize, graphkit, homotopy, invariants, lattice
from .graphkit import Graph
from .lattice import CubicalSpace

EXIT_OK = 0
EXIT_NO = 1
EXIT_UNKNOWN = 2
EXIT_ALREADY_COMPRESSED = 3


def _fail(message: str) -> None:
    click.echo(f"error: {message}", err=True)
    sys.exit(EXIT_NO)


def _parse_bounds(text: str) -> digitize.Bounds:
    """Bounds strings look like '-4..4,-4..4' with one lo..hi per axis."""
    lo, hi = [], []
    for part in text.split(","):
        a, _, b = part.partition("..")
        lo.append(int(a))
        hi.append(int(b))
    return digitize.Bounds(tuple(lo), tuple(hi))


def _sha256(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


def _write_json(path: Path, obj: dict) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(obj, indent=1) + "\n")


def _load_model(path: Path) -> tuple[CubicalSpace, bool]:
    obj = json.loads(path.read_text())
    return lattice.space_from_json(obj), bool(obj.get("approximate", False))


def _model_json(space: CubicalSpace, approximate: bool) -> dict:
    obj = lattice.space_to_json(space)
    if approximate:
        obj["approximate"] = True
    return obj


def _write_trace(path: Path, kind: str, steps) -> None:
    _write_json(path, {"kind": kind, "steps": homotopy.steps_to_json(steps)})


@click.group()
@click.option("--seed", type=int, default=0, show_default=True,
              help="Recorded in report provenance; the pipeline itself is deterministic.")
@click.pass_context
def main(ctx, seed):
    """Cubical digitization and topology-preserving compression."""
    ctx.ensure_object(dict)
    ctx.obj["seed"] = seed


@main.command()
@click.option("--object", "object_path", required=True, type=click.Path(exists=True, path_type=Path),
              help="Object spec JSON file.")
@click.option("--side", required=True, help="Cube side length, e.g. '1/4' or '0.5'.")
@click.option("--bounds", "bounds_text", default=None,
              help="Integer cube bounds per axis, 'lo..hi,lo..hi'; default covers the object.")
@click.option("--out", required=True, type=click.Path(path_type=Path), help="Output model file.")
@click.option("--off", "off_path", default=None, type=click.Path(path_type=Path),
              help="Also write an OFF geometry file of the cube boundary.")
def digitize_cmd(object_path, side, bounds_text, out, off_path):
    """Build the cubical model of a continuous object."""
    try:
        spec = digitize.load_object(object_path)
        side_f = Fraction(str(side))
        bounds = _parse_bounds(bounds_text) if bounds_text else None
        space = digitize.build_cubical_model(spec, side_f, bounds)
    except (ValueError, lattice.DimensionMismatch) as exc:
        _fail(str(exc))
        return
    _write_json(out, _model_json(space, not digitize.is_exact(spec)))
    if off_path:
        _write_off(off_path, space)
    click.echo(f"{len(space)} cubes at side {side_f}")


main.add_command(digitize_cmd, name="digitize")


@main.command()
@click.option("--model", "model_path", required=True, type=click.Path(exists=True, path_type=Path))
@click.option("--policy", default="min-degree", show_default=True,
              type=click.Choice(["min-degree", "max-degree", "lex"]))
@click.option("--out", required=True, type=click.Path(path_type=Path), help="Compressed model file.")
@click.option("--trace", "trace_path", default=None, type=click.Path(path_type=Path),
              help="Write the deletion trace here.")
@click.option("--strict", is_flag=True,
              help="Cross-validate contractibility decisions with the native cube recursion (small models).")
@click.option("--off", "off_path", default=None, type=click.Path(path_type=Path))
def compress(model_path, policy, out, trace_path, strict, off_path):
    """Delete simple cubes until the model is compressed."""
    try:
        space, approx = _load_model(model_path)
        compressed, steps = homotopy.compress_space(space, policy)
        if strict and len(space) <= homotopy.STRICT_SPACE_CAP:
            homotopy.is_contractible_space(space, strict=True)
    except (ValueError, homotopy.SearchBudgetExceeded) as exc:
        _fail(str(exc))
        return
    _write_json(out, _model_json(compressed, approx))
    if trace_path:
        _write_trace(trace_path, "space", steps)
    if off_path:
        _write_off(off_path, compressed)
    click.echo(f"{len(space)} -> {len(compressed)} cubes ({len(steps)} deletions)")
    if not steps:
        sys.exit(EXIT_ALREADY_COMPRESSED)


@main.command("graph")
@click.option("--model", "model_path", required=True, type=click.Path(exists=True, path_type=Path))
@click.option("--out", required=True, type=click.Path(path_type=Path), help="Graph JSON file.")
@click.option("--dot", "dot_path", default=None, type=click.Path(path_type=Path),
              help="Also write a DOT file for external viewers.")
def graph_cmd(model_path, out, dot_path):
    """Write the intersection graph (digital model) of a cubical model."""
    try:
        space, _ = _load_model(model_path)
        if len(space) == 0:
            raise ValueError("model is empty; no digital model to build")
        g = graphkit.intersection_graph(space)
    except ValueError as exc:
        _fail(str(exc))
        return
    _write_json(out, graphkit.graph_to_json(g))
    if dot_path:
        Path(dot_path).write_text(graphkit.to_dot(g))
    click.echo(f"{len(g)} vertices, {len(g.edges)} edges")


@main.command("invariants")
@click.option("--in", "in_path", required=True, type=click.Path(exists=True, path_type=Path),
              help="Graph or model JSON file (detected by its keys).")
@click.option("--out", required=True, type=click.Path(path_type=Path), help="Report JSON file.")
@click.option("--max-dim", "max_dim", type=int, default=None,
              help="Truncate homology above this dimension.")
@click.pass_context
def invariants_cmd(ctx, in_path, out, max_dim):
    """Euler characteristics and homology ranks of a model or graph."""
    try:
        obj = json.loads(in_path.read_text())
        if "cubes" in obj:
            space = lattice.space_from_json(obj)
            report = invariants.fingerprint(
                space, max_dim=max_dim, approximate=bool(obj.get("approximate"))
            )
            side = str(space.side)
        elif "vertices" in obj:
            report = invariants.fingerprint(graphkit.graph_from_json(obj), max_dim=max_dim)
            side = None
        else:
            raise ValueError("file is neither a model (cubes) nor a graph (vertices)")
    except (ValueError, invariants.SizeCapExceeded) as exc:
        _fail(str(exc))
        return
    payload = report.to_json()
    payload["provenance"] = {
        "source": str(in_path),
        "sha256": _sha256(in_path),
        "side": side,
        "seed": ctx.obj.get("seed", 0),
    }
    _write_json(out, payload)
    click.echo(
        f"euler={report.euler_graph} betti={list(report.betti)}"
        + (" (approximate)" if report.approximate else "")
    )


@main.command()
@click.option("--a", "a_path", required=True, type=click.Path(exists=True, path_type=Path))
@click.option("--b", "b_path", required=True, type=click.Path(exists=True, path_type=Path))
@click.option("--budget", default=100_000, show_default=True, help="Search state budget.")
@click.option("--trace", "trace_path", default=None, type=click.Path(path_type=Path),
              help="Write the transformation trace on Yes.")
def equiv(a_path, b_path, budget, trace_path):
    """Decide homotopy equivalence of two graph files.

    Exit code 0 = Yes, 1 = No, 2 = Unknown (budget or size cap)."""
    try:
        g = graphkit.load_graph(a_path)
        h = graphkit.load_graph(b_path)
        result = homotopy.homotopy_equivalent(g, h, budget=budget)
    except (ValueError, homotopy.SearchBudgetExceeded) as exc:
        _fail(str(exc))
        return
    if result.status == "yes":
        click.echo(f"YES ({len(result.trace)} steps)")
        if trace_path:
            _write_trace(trace_path, "graph", result.trace)
        sys.exit(EXIT_OK)
    if result.status == "no":
        click.echo(f"NO ({result.witness})")
        sys.exit(EXIT_NO)
    click.echo(f"UNKNOWN ({result.witness})")
    sys.exit(EXIT_UNKNOWN)


@main.command()
@click.option("--object", "object_path", required=True, type=click.Path(exists=True, path_type=Path))
@click.option("--side", required=True, help="Initial (coarsest) side length.")
@click.option("--levels", default=3, show_default=True, help="Number of halvings to run.")
@click.option("--bounds", "bounds_text", default=None)
@click.option("--out", required=True, type=click.Path(path_type=Path),
              help="Output directory for per-level models and the ladder report.")
def refine(object_path, side, levels, bounds_text, out):
    """Digitize at side, side/2, ... and scan invariants for stability."""
    try:
        spec = digitize.load_object(object_path)
        side_f = Fraction(str(side))
        bounds = _parse_bounds(bounds_text) if bounds_text else None
        ladder = digitize.refine_sequence(spec, side_f, levels, bounds)
        stable = digitize.stability_scan(ladder)
    except (ValueError, lattice.DimensionMismatch) as exc:
        _fail(str(exc))
        return
    out = Path(out)
    out.mkdir(parents=True, exist_ok=True)
    approx = not digitize.is_exact(spec)
    entries = []
    for i, (lvl_side, space) in enumerate(ladder.levels, start=1):
        model_file = out / f"level{i:02d}.json"
        _write_json(model_file, _model_json(space, approx))
        report = invariants.fingerprint(space, approximate=approx)
        entries.append(
            {
                "level": i,
                "side": str(lvl_side),
                "cubes": len(space),
                "euler_graph": report.euler_graph,
                "euler_image": report.euler_image,
                "betti": list(report.betti),
                "model": model_file.name,
            }
        )
    _write_json(out / "ladder.json", {"levels": entries, "stable_index": stable})
    click.echo(f"stable index: {stable}")


@main.command()
@click.option("--model", "model_path", default=None, type=click.Path(exists=True, path_type=Path),
              help="Starting model for a space trace.")
@click.option("--graph", "graph_path", default=None, type=click.Path(exists=True, path_type=Path),
              help="Starting graph for a graph trace.")
@click.option("--trace", "trace_path", required=True, type=click.Path(exists=True, path_type=Path))
@click.option("--expect", "expect_path", default=None, type=click.Path(exists=True, path_type=Path),
              help="File the replay result must equal.")
@click.option("--out", default=None, type=click.Path(path_type=Path),
              help="Write the replayed result here.")
def replay(model_path, graph_path, trace_path, expect_path, out):
    """Re-validate every certificate in a trace against a model or graph."""
    try:
        trace_obj = json.loads(Path(trace_path).read_text())
        steps = homotopy.steps_from_json(trace_obj["steps"])
        kind = trace_obj.get("kind")
        if kind == "space":
            if model_path is None:
                raise ValueError("space trace needs --model")
            space, approx = _load_model(model_path)
            result_space = homotopy.replay_space_trace(space, steps)
            if expect_path:
                expected, _ = _load_model(Path(expect_path))
                if expected != result_space:
                    raise homotopy.TraceError("replay result differs from --expect file")
            if out:
                _write_json(Path(out), _model_json(result_space, approx))
            click.echo(f"trace valid: {len(steps)} steps, {len(result_space)} cubes left")
        elif kind == "graph":
            if graph_path is None:
                raise ValueError("graph trace needs --graph")
            g = graphkit.load_graph(graph_path)
            result_graph = homotopy.replay_graph_trace(g, steps)
            if expect_path:
                if graphkit.load_graph(Path(expect_path)) != result_graph:
                    raise homotopy.TraceError("replay result differs from --expect file")
            if out:
                _write_json(Path(out), graphkit.graph_to_json(result_graph))
            click.echo(f"trace valid: {len(steps)} steps, {len(result_graph)} vertices left")
        else:
            raise ValueError(f"trace kind {kind!r} not recognized")
    except (ValueError, KeyError) as exc:
        _fail(str(exc))


def _write_off(path: Path, space: CubicalSpace) -> None:
    """Boundary geometry for external viewers; 2D cells or 3D boundary quads."""
    if space.n == 2:
        side = float(space.side)
        verts: dict[tuple[float, float, float], int] = {}
        faces = []
        for c in sorted(space.cubes):
            ids = []
            for dx, dy in ((0, 0), (1, 0), (1, 1), (0, 1)):
                p = ((c[0] + dx) * side, (c[1] + dy) * side, 0.0)
                ids.append(verts.setdefault(p, len(verts)))
            faces.append(ids)
    elif space.n == 3:
        from .lattice import cube_faces

        count: dict = {}
        for u in space.cubes:
            for face in cube_faces(u):
                if face.dim == 2:
                    count[face] = count.get(face, 0) + 1
        side = float(space.side)
        verts = {}
        faces = []
        for face, k in sorted(count.items(), key=lambda kv: (kv[0].anchor, sorted(kv[0].axes))):
            if k != 1:
                continue  # interior face
            ax = sorted(face.axes)
            ids = []
            for da, db in ((0, 0), (1, 0), (1, 1), (0, 1)):
                p = list(face.anchor)
                p[ax[0]] += da
                p[ax[1]] += db
                ids.append(verts.setdefault(tuple(x * side for x in p), len(verts)))
            faces.append(ids)
    else:
        raise ValueError("OFF export supports n=2 or n=3 only")
    lines = ["OFF", f"{len(verts)} {len(faces)} 0"]
    for p, _ in sorted(verts.items(), key=lambda kv: kv[1]):
        lines.append(" ".join(f"{x:g}" for x in p))
    for ids in faces:
        lines.append("4 " + " ".join(map(str, ids)))
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text("\n".join(lines) + "\n")


if __name__ == "__main__":
    main()
