import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from flatflow.surface import SurfacePoint
from flatflow.unfold import develop_window, trace_ray
from conftest import random_point


def test_ray_from_cone_along_edge(l3):
    # parameter 0 at the cone leaves along the first corner's first edge
    end = trace_ray(l3, SurfacePoint.at_cone(0), 0.0, 5.0)
    assert end.hit is not None
    assert end.hit.length == pytest.approx(1.0)
    assert end.hit.cone == 0


def test_ray_without_singularity(l3):
    # slope sqrt(2) never meets a lattice point
    t = math.atan(math.sqrt(2))
    p = SurfacePoint(0, 0.5, 0.5)
    end = trace_ray(l3, p, t, 7.0)
    assert end.hit is None
    assert end.length == pytest.approx(7.0)
    assert end.chart_angle == pytest.approx(t)
    assert l3.polygons[end.point.polygon].contains(end.point.x, end.point.y)


def test_ray_crossings_recorded(l3):
    cr = []
    trace_ray(l3, SurfacePoint(0, 0.5, 0.5), 0.0, 2.0, crossings=cr)
    # horizontally from the middle of square 0: into square 1, back into square 0
    assert [(pid, e) for pid, e, *_ in cr] == [(0, 1), (1, 1)]
    for _, _, r, _, _ in cr:
        assert r == pytest.approx(0.5)


def test_window_hits_sorted_and_within_radius(l3):
    hits = develop_window(l3, SurfacePoint.at_cone(0), 0.0, 6 * math.pi, 3.0, include_lo=True)
    lens = [h.length for h in hits]
    assert lens == sorted(lens)
    assert max(lens) <= 3.0 + 1e-9
    # every hit is at an integer lattice vector
    for h in hits:
        assert h.x == pytest.approx(round(h.x), abs=1e-9)
        assert h.y == pytest.approx(round(h.y), abs=1e-9)


def test_window_hits_agree_with_traced_rays(octagon):
    src = SurfacePoint.at_cone(0)
    for h in develop_window(octagon, src, 0.0, 6 * math.pi, 3.0, include_lo=True):
        end = trace_ray(octagon, src, h.dep, h.length + 1.0)
        assert end.hit is not None
        assert end.hit.length == pytest.approx(h.length, abs=1e-9)
        assert end.hit.arr == pytest.approx(h.arr, abs=1e-9)


def test_window_split_is_additive(octagon):
    src = SurfacePoint(0, 0.4, 0.9)
    whole = develop_window(octagon, src, 0.0, 2 * math.pi, 3.0, include_lo=True)
    parts = develop_window(octagon, src, 0.0, 2.0, 3.0, include_lo=True, include_hi=True)
    parts += develop_window(octagon, src, 2.0, 2 * math.pi, 3.0)
    key = lambda h: (round(h.dep, 9), round(h.length, 9))  # noqa: E731
    assert sorted(map(key, whole)) == sorted(map(key, parts))


def test_regular_vertices_do_not_block(l3, l3_split):
    # rays through the marked points of the split surface see the same singularities
    a = develop_window(l3_split, SurfacePoint(0, 0.25, 0.5), 0.0, 2 * math.pi, 4.0, include_lo=True)
    b = develop_window(l3, SurfacePoint(0, 0.25, 0.5), 0.0, 2 * math.pi, 4.0, include_lo=True)
    key = lambda h: (round(h.x, 9), round(h.y, 9))  # noqa: E731
    assert sorted(map(key, a)) == sorted(map(key, b))


def test_targets_located_once(l3):
    src = SurfacePoint(0, 0.3, 0.6)
    tgt = {1: [(0, 1.7, 0.2)]}
    found = []
    develop_window(l3, src, 0.0, 2 * math.pi, 2.5, include_lo=True, targets=tgt, located=found)
    pts = sorted((round(x, 9), round(y, 9)) for _, x, y, _, _ in found)
    assert len(pts) == len(set(pts))
    # the straight lift in the plane is among them: (1.7 - 0.3, 0.2 - 0.6)
    assert (round(1.4, 9), round(-0.4, 9)) in pts


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 10_000), t=st.floats(0, 2 * math.pi, exclude_max=True), L=st.floats(0.1, 6.0))
def test_ray_is_additive(seed, t, L):
    from flatflow.surfacefile import load_bundled

    S = load_bundled("octagon")
    p = random_point(S, np.random.default_rng(seed))
    one = trace_ray(S, p, t, L)
    half = trace_ray(S, p, t, 0.5 * L)
    if one.hit is not None or half.hit is not None:
        return
    two = trace_ray(S, half.point, half.chart_angle, 0.5 * L)
    if two.hit is not None:
        return
    assert two.point.polygon == one.point.polygon
    assert two.point.x == pytest.approx(one.point.x, abs=1e-8)
    assert two.point.y == pytest.approx(one.point.y, abs=1e-8)


@settings(max_examples=30, deadline=None)
@given(seed=st.integers(0, 10_000), t=st.floats(0, 2 * math.pi, exclude_max=True), L=st.floats(0.1, 5.0))
def test_ray_reverses(seed, t, L):
    from flatflow.surfacefile import load_bundled

    S = load_bundled("l3")
    p = random_point(S, np.random.default_rng(seed))
    out = trace_ray(S, p, t, L)
    if out.hit is not None:
        return
    back = trace_ray(S, out.point, out.chart_angle + math.pi, L)
    if back.hit is not None:
        return
    assert back.point.polygon == p.polygon
    assert back.point.x == pytest.approx(p.x, abs=1e-8)
    assert back.point.y == pytest.approx(p.y, abs=1e-8)
