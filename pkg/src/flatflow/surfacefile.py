"""Reading and writing surface files.

Line-oriented UTF-8 text; ``#`` starts a comment::

    flatflow-surface 1
    name L3
    polygon 0 : 0 0 | 1 0 | 1 1 | 0 1
    glue 0.1 1.3 translation

``polygon <id> : x y | x y | ...`` lists vertices counterclockwise.
``glue <p>.<e> <q>.<f> <kind>`` identifies edge e of polygon p (from
vertex e to vertex e+1) with edge f of polygon q; kind is
``translation`` or ``half_translation``.  Unknown keywords are
rejected.
"""

from __future__ import annotations

import hashlib
from importlib import resources

from flatflow.errors import DuplicateEdgeReference, SchemaViolation, SurfaceSyntaxError
from flatflow.surface import FlatSurface, GluingSpec, SurfaceSpec, build_surface

FORMAT_VERSION = 1
KINDS = ("translation", "half_translation")


def _edge_ref(tok: str, line: int) -> tuple[int, int]:
    try:
        p, e = tok.split(".")
        return int(p), int(e)
    except ValueError:
        raise SurfaceSyntaxError(f"bad edge reference {tok!r}, expected <polygon>.<edge>", line) from None


def parse_surface_file(data: bytes | str) -> SurfaceSpec:
    if isinstance(data, bytes):
        try:
            data = data.decode("utf-8")
        except UnicodeDecodeError as exc:
            raise SurfaceSyntaxError(f"not UTF-8: {exc}") from None
    version = None
    name = ""
    polygons: dict[int, tuple] = {}
    gluings = []
    used: dict[tuple[int, int], int] = {}
    for lineno, raw in enumerate(data.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, _, rest = line.partition(" ")
        rest = rest.strip()
        if version is None:
            if key != "flatflow-surface":
                raise SurfaceSyntaxError("file must start with 'flatflow-surface <version>'", lineno)
            try:
                version = int(rest)
            except ValueError:
                raise SurfaceSyntaxError(f"bad format version {rest!r}", lineno) from None
            if version != FORMAT_VERSION:
                raise SchemaViolation(f"unsupported format version {version}", lineno)
            continue
        if key == "name":
            if not rest or len(rest.split()) != 1:
                raise SurfaceSyntaxError("name must be a single token", lineno)
            name = rest
        elif key == "polygon":
            head, sep, body = rest.partition(":")
            if not sep:
                raise SurfaceSyntaxError("expected 'polygon <id> : x y | x y | ...'", lineno)
            try:
                pid = int(head)
            except ValueError:
                raise SurfaceSyntaxError(f"bad polygon id {head.strip()!r}", lineno) from None
            if pid in polygons:
                raise SchemaViolation(f"polygon {pid} defined twice", lineno)
            verts = []
            for chunk in body.split("|"):
                parts = chunk.split()
                if len(parts) != 2:
                    raise SurfaceSyntaxError(f"vertex {chunk.strip()!r} must be 'x y'", lineno)
                try:
                    verts.append((float(parts[0]), float(parts[1])))
                except ValueError:
                    raise SurfaceSyntaxError(f"bad coordinate in {chunk.strip()!r}", lineno) from None
            if len(verts) < 3:
                raise SchemaViolation(f"polygon {pid} needs at least 3 vertices", lineno)
            polygons[pid] = (tuple(verts), lineno)
        elif key == "glue":
            parts = rest.split()
            if len(parts) != 3:
                raise SurfaceSyntaxError("expected 'glue <p>.<e> <q>.<f> <kind>'", lineno)
            a, b = _edge_ref(parts[0], lineno), _edge_ref(parts[1], lineno)
            if parts[2] not in KINDS:
                raise SchemaViolation(f"unknown gluing kind {parts[2]!r}", lineno)
            for side in (a, b):
                if side in used:
                    raise DuplicateEdgeReference(
                        f"edge {side[0]}.{side[1]} already glued on line {used[side]}", lineno
                    )
            if a == b:
                raise DuplicateEdgeReference(f"edge {a[0]}.{a[1]} glued to itself", lineno)
            used[a] = used[b] = lineno
            gluings.append((GluingSpec(a, b, parts[2]), lineno))
        else:
            raise SchemaViolation(f"unknown keyword {key!r}", lineno)
    if version is None:
        raise SurfaceSyntaxError("empty surface file")
    if sorted(polygons) != list(range(len(polygons))):
        raise SchemaViolation("polygon ids must be 0..n-1")
    for g, lineno in gluings:
        for p, e in (g.side_a, g.side_b):
            if p not in polygons or not (0 <= e < len(polygons[p][0])):
                raise SchemaViolation(f"edge {p}.{e} does not exist", lineno)
    return SurfaceSpec(
        polygons=tuple((pid, polygons[pid][0]) for pid in sorted(polygons)),
        gluings=tuple(g for g, _ in gluings),
        name=name,
    )


def serialize_surface(spec: SurfaceSpec) -> str:
    lines = [f"flatflow-surface {FORMAT_VERSION}"]
    if spec.name:
        lines.append(f"name {spec.name}")
    for pid, verts in spec.polygons:
        body = " | ".join(f"{x!r} {y!r}" for x, y in verts)
        lines.append(f"polygon {pid} : {body}")
    for g in spec.gluings:
        lines.append(f"glue {g.side_a[0]}.{g.side_a[1]} {g.side_b[0]}.{g.side_b[1]} {g.kind}")
    return "\n".join(lines) + "\n"


def surface_hash(data: bytes) -> str:
    return hashlib.sha256(data).hexdigest()[:16]


def bundled_path(name: str):
    return resources.files("flatflow.data").joinpath(f"{name}.surf")


def load_bundled(name: str) -> FlatSurface:
    """``l3`` or ``octagon``."""
    return build_surface(parse_surface_file(bundled_path(name).read_bytes()))


def load_surface(path) -> FlatSurface:
    with open(path, "rb") as fh:
        return build_surface(parse_surface_file(fh.read()))
