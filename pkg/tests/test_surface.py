import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from flatflow.errors import (
    ConeAngleNotMultipleOfPi,
    DuplicateEdgeReference,
    ForbiddenConeAngle,
    GenusTooSmall,
    InvalidGluing,
    MismatchedBasePoint,
    MismatchedEdgeLengths,
    NonConvexPolygon,
    SchemaViolation,
    SurfaceSyntaxError,
    UnpairedEdge,
)
from flatflow.surface import (
    DirectionAt,
    GluingSpec,
    SurfacePoint,
    SurfaceSpec,
    build_surface,
    flat_angle,
    gauss_bonnet_check,
)
from flatflow.surfacefile import bundled_path, parse_surface_file, serialize_surface, surface_hash
from oracles import corner_cycles

L3_SPEC = parse_surface_file(bundled_path("l3").read_bytes())


def rotated_spec(spec, alpha, flip=()):
    """Rotate everything by alpha; polygons in ``flip`` get an extra half turn.

    A half turn preserves the ccw vertex order, so edge indices are kept;
    gluings between a flipped and an unflipped polygon become half-translations.
    """
    c, s = math.cos(alpha), math.sin(alpha)
    polys = []
    for pid, verts in spec.polygons:
        sign = -1 if pid in flip else 1
        polys.append((pid, tuple((sign * (c * x - s * y), sign * (s * x + c * y)) for x, y in verts)))
    glues = []
    for g in spec.gluings:
        mixed = (g.side_a[0] in flip) != (g.side_b[0] in flip)
        kind = g.kind
        if mixed:
            kind = "half_translation" if kind == "translation" else "translation"
        glues.append(GluingSpec(g.side_a, g.side_b, kind))
    return SurfaceSpec(tuple(polys), tuple(glues), spec.name)


@pytest.mark.parametrize("name", ["l3", "octagon"])
def test_bundled_structure(name, l3, octagon):
    S = {"l3": l3, "octagon": octagon}[name]
    assert S.euler_characteristic == -2 and S.genus == 2
    assert len(S.singularities) == 1
    assert S.singularities[0].angle == pytest.approx(6 * math.pi, abs=1e-9)
    assert gauss_bonnet_check(S) <= 1e-9


def test_cone_cycles_match_independent_walk(l3, octagon):
    for S in (l3, octagon):
        cycles, _ = corner_cycles(S)
        got = sorted((sorted(c.corner_cycle), c.angle) for c in S.cone_points)
        want = sorted((sorted(cyc), tot) for cyc, tot in cycles)
        assert [g[0] for g in got] == [w[0] for w in want]
        for (_, a), (_, b) in zip(got, want):
            assert a == pytest.approx(b, abs=1e-12)


def test_marked_points_are_regular(l3_split):
    kinds = sorted((round(c.angle / math.pi), c.is_singular) for c in l3_split.cone_points)
    assert kinds == [(2, False), (6, True)]
    assert l3_split.genus == 2


def test_area_and_total_angle(l3):
    assert l3.area == pytest.approx(3.0)
    assert l3.total_angle(SurfacePoint(0, 0.5, 0.5)) == pytest.approx(2 * math.pi)
    assert l3.total_angle(SurfacePoint.at_cone(0)) == pytest.approx(6 * math.pi)


def test_half_translation_gluings_accepted():
    S = build_surface(rotated_spec(L3_SPEC, 0.0, flip={2}))
    assert any(g.kind == "half_translation" for g in S.gluings)
    assert [round(c.angle / math.pi) for c in S.singularities] == [6]


def test_flat_angle():
    from flatflow.surfacefile import load_bundled

    S = load_bundled("l3")
    p = SurfacePoint.at_cone(0)
    d1, d2 = DirectionAt(p, 1.0), DirectionAt(p, 5.0)
    plus = flat_angle(S, p, d1, d2, "plus")
    minus = flat_angle(S, p, d1, d2, "minus")
    assert plus == pytest.approx(4.0)
    assert plus + minus == pytest.approx(6 * math.pi)
    with pytest.raises(MismatchedBasePoint):
        flat_angle(S, SurfacePoint(0, 0.5, 0.5), d1, d2)
    with pytest.raises(ValueError):
        flat_angle(S, p, d1, d2, "up")


# --- validation errors -------------------------------------------------------

TORUS = """flatflow-surface 1
polygon 0 : 0 0 | 1 0 | 1 1 | 0 1
glue 0.0 0.2 translation
glue 0.1 0.3 translation
"""


def _spec(polys, glues):
    return SurfaceSpec(tuple(polys), tuple(GluingSpec(a, b, k) for a, b, k in glues))


def test_genus_one_rejected():
    with pytest.raises(GenusTooSmall):
        build_surface(parse_surface_file(TORUS))


def test_nonconvex_rejected():
    square = ((0, 0), (1, 0), (1, 1), (0.5, 0.2), (0, 1))
    with pytest.raises(NonConvexPolygon):
        build_surface(_spec([(0, square)], []))


def test_collinear_vertex_rejected():
    square = ((0, 0), (0.5, 0), (1, 0), (1, 1), (0, 1))
    with pytest.raises(NonConvexPolygon):
        build_surface(_spec([(0, square)], []))


def test_unpaired_edge_rejected():
    spec = SurfaceSpec(L3_SPEC.polygons, L3_SPEC.gluings[:-1])
    with pytest.raises(UnpairedEdge):
        build_surface(spec)


def test_mismatched_lengths_rejected():
    sq = ((0, 0), (1, 0), (1, 1), (0, 1))
    rect = ((0, 0), (2, 0), (2, 1), (0, 1))
    with pytest.raises(MismatchedEdgeLengths):
        build_surface(_spec([(0, sq), (1, rect)], [((0, 0), (1, 0), "translation")]))


def test_bad_gluing_rejected():
    sq = ((0, 0), (1, 0), (1, 1), (0, 1))
    with pytest.raises(InvalidGluing):
        build_surface(_spec([(0, sq)], [((0, 0), (0, 0), "translation")]))
    with pytest.raises(InvalidGluing):
        build_surface(_spec([(0, sq)], [((0, 0), (0, 9), "translation")]))
    # a vertical edge cannot be glued to a horizontal one by a translation
    with pytest.raises(InvalidGluing):
        build_surface(_spec([(0, sq)], [((0, 0), (0, 1), "translation")]))


def test_forbidden_cone_angle():
    # pillowcase: two squares glued edge to edge by half turns; four cone points of angle pi
    sq = ((0, 0), (1, 0), (1, 1), (0, 1))
    with pytest.raises(ForbiddenConeAngle):
        build_surface(_spec(
            [(0, sq), (1, sq)],
            [
                ((0, 0), (1, 0), "half_translation"),
                ((0, 2), (1, 2), "half_translation"),
                ((0, 1), (1, 3), "translation"),
                ((0, 3), (1, 1), "translation"),
            ],
        ))


# --- file format -------------------------------------------------------------


def test_roundtrip_bundled():
    for name in ("l3", "octagon"):
        spec = parse_surface_file(bundled_path(name).read_bytes())
        again = parse_surface_file(serialize_surface(spec))
        assert again == spec


def test_hash_is_stable():
    data = bundled_path("l3").read_bytes()
    assert surface_hash(data) == surface_hash(bytes(data))
    assert surface_hash(data) != surface_hash(data + b"# comment\n")
    assert len(surface_hash(data)) == 16


@pytest.mark.parametrize(
    "text, err",
    [
        ("", SurfaceSyntaxError),
        ("polygon 0 : 0 0 | 1 0 | 0 1\n", SurfaceSyntaxError),
        ("flatflow-surface 2\n", SchemaViolation),
        ("flatflow-surface x\n", SurfaceSyntaxError),
        ("flatflow-surface 1\nshape 0\n", SchemaViolation),
        ("flatflow-surface 1\npolygon 0 : 0 0 | 1 0\n", SchemaViolation),
        ("flatflow-surface 1\npolygon 0 : 0 0 | 1 a | 0 1\n", SurfaceSyntaxError),
        ("flatflow-surface 1\npolygon 1 : 0 0 | 1 0 | 0 1\n", SchemaViolation),
        ("flatflow-surface 1\npolygon 0 : 0 0 | 1 0 | 0 1\npolygon 0 : 0 0 | 1 0 | 0 1\n", SchemaViolation),
        ("flatflow-surface 1\npolygon 0 : 0 0 | 1 0 | 0 1\nglue 0.0 0.5 translation\n", SchemaViolation),
        ("flatflow-surface 1\npolygon 0 : 0 0 | 1 0 | 0 1\nglue 0.0 0.1 rotation\n", SchemaViolation),
        ("flatflow-surface 1\npolygon 0 : 0 0 | 1 0 | 0 1\nglue 0.0 0.0 translation\n", DuplicateEdgeReference),
        ("flatflow-surface 1\npolygon 0 : 0 0 | 1 0 | 0 1\nglue 0.0 0.1 translation\nglue 0.0 0.2 translation\n",
         DuplicateEdgeReference),
        ("flatflow-surface 1\npolygon 0 : 0 0 | 1 0 | 0 1\nglue 0-0 0.1 translation\n", SurfaceSyntaxError),
        (b"flatflow-surface 1\n\xff\n", SurfaceSyntaxError),
    ],
)
def test_parse_errors(text, err):
    with pytest.raises(err):
        parse_surface_file(text)


def test_error_carries_line_number():
    with pytest.raises(SurfaceSyntaxError) as info:
        parse_surface_file("flatflow-surface 1\n# ok\npolygon 0 : 0 0 | 1 q | 0 1\n")
    assert "3" in str(info.value)


# --- properties --------------------------------------------------------------


@settings(max_examples=25, deadline=None)
@given(alpha=st.floats(0, 2 * math.pi), flip=st.sets(st.integers(0, 2)))
def test_rigid_motions_preserve_cone_structure(alpha, flip):
    S = build_surface(rotated_spec(L3_SPEC, alpha, flip))
    assert sorted(round(c.angle / math.pi) for c in S.cone_points) == [6]
    assert gauss_bonnet_check(S) <= 1e-9
    assert S.area == pytest.approx(3.0)


@settings(max_examples=25, deadline=None)
@given(
    coords=st.lists(st.floats(-1e6, 1e6, allow_nan=False, allow_infinity=False), min_size=6, max_size=6),
    name=st.from_regex(r"[A-Za-z0-9_-]{0,12}", fullmatch=True),
)
def test_serialize_parse_roundtrip(coords, name):
    verts = tuple(zip(coords[::2], coords[1::2]))
    spec = SurfaceSpec(((0, verts),), (GluingSpec((0, 0), (0, 1), "half_translation"),), name)
    assert parse_surface_file(serialize_surface(spec)) == spec
