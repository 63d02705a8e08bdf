"""Local geodesics: validation, unique extension and joining.

A path is a local geodesic when it is straight away from its vertices
and turns by at least pi on both sides at every interior vertex.  At a
regular point that forces the path to go straight; at a cone point of
angle k*pi with k >= 3 a whole interval of continuations qualifies,
which is why a geodesic can only be extended uniquely up to the first
singularity it meets.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass

from flatflow.errors import BudgetExhausted, MalformedPath, NotLocalGeodesic
from flatflow.paths import GeodesicPath, Segment
from flatflow.saddles import SaddleConnection, oriented_saddle_connections
from flatflow.surface import FlatSurface, SurfacePoint, wrap
from flatflow.unfold import trace_ray

DEFAULT_MAX_HOPS = 4
DEFAULT_CAP_DIAMETERS = 10.0


def _same_point(surface: FlatSurface, p: SurfacePoint, q: SurfacePoint, eps: float) -> bool:
    if p.is_cone or q.is_cone:
        return p.cone == q.cone
    if p.polygon == q.polygon:
        return math.hypot(p.x - q.x, p.y - q.y) <= eps
    # the same point written in two charts: it then lies on a shared edge
    poly = surface.polygons[p.polygon]
    for e in range(poly.n):
        m = surface.edge_maps[(p.polygon, e)]
        if m.polygon != q.polygon:
            continue
        x, y = m.sigma * p.x + m.cx, m.sigma * p.y + m.cy
        if math.hypot(x - q.x, y - q.y) <= eps:
            return True
    return False


def _segment_ok(surface: FlatSurface, a: SurfacePoint, b: SurfacePoint, s: Segment) -> bool:
    tol = surface.tol
    eps = 1e3 * tol.eps_len
    end = trace_ray(surface, a, s.dep, s.length + (eps if b.is_cone else 0.0))
    if b.is_cone:
        h = end.hit
        if h is None or h.cone != b.cone or abs(h.length - s.length) > eps:
            return False
        th = surface.total_angle(b)
        return abs(wrap(h.arr - s.arr + 0.5 * th, th) - 0.5 * th) <= 1e3 * tol.eps_angle
    if end.hit is not None:
        return False
    if not _same_point(surface, end.point, b, eps):
        return False
    back = wrap(end.chart_angle + math.pi)
    return abs(wrap(back - s.arr + math.pi) - math.pi) <= 1e3 * tol.eps_angle


def _turn_ok(surface: FlatSurface, v: SurfacePoint, arr: float, dep: float, slack: float) -> bool:
    theta = surface.total_angle(v)
    left = wrap(arr - dep, theta)
    right = theta - left
    if left >= theta - 1e-12:
        left, right = 0.0, theta
    return left >= math.pi - slack and right >= math.pi - slack


def is_local_geodesic(surface: FlatSurface, path: GeodesicPath) -> bool:
    """Straight segments meeting at angle >= pi on both sides at every vertex."""
    if len(path.vertices) != len(path.segments) + 1:
        raise MalformedPath("a path needs exactly one more vertex than segments")
    if not path.segments:
        return True
    slack = surface.tol.eps_angle
    for i, s in enumerate(path.segments):
        if not s.length > 0:
            return False
        if not _segment_ok(surface, path.vertices[i], path.vertices[i + 1], s):
            return False
    for i in range(1, len(path.vertices) - 1):
        if not _turn_ok(surface, path.vertices[i], path.segments[i - 1].arr, path.segments[i].dep, slack):
            return False
    if path.closed:
        if path.start != path.end:
            return False
        if not _turn_ok(surface, path.start, path.segments[-1].arr, path.segments[0].dep, slack):
            return False
    return True


# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ExtensionResult:
    extended: GeodesicPath
    s1: float  # length added before the start
    s2: float  # length added after the end
    left_singular: int | None  # cone id reached backwards, None if capped
    right_singular: int | None
    left_capped: bool
    right_capped: bool

    @property
    def capped(self) -> bool:
        return self.left_capped or self.right_capped


def _extend_forward(surface: FlatSurface, path: GeodesicPath, cap: float):
    """(path, added length, cone id or None, capped) for the forward end."""
    end = path.end
    if end.is_cone and surface.cone_points[end.cone].is_singular:
        return path, 0.0, end.cone, False
    last = path.segments[-1]
    t = wrap(last.arr + math.pi, surface.total_angle(end))
    ray = trace_ray(surface, end, t, cap)
    if ray.hit is not None:
        h = ray.hit
        seg = Segment(t, h.arr, h.length)
        ext = GeodesicPath(path.vertices + (SurfacePoint.at_cone(h.cone),), path.segments + (seg,))
        return ext, h.length, h.cone, False
    seg = Segment(t, wrap(ray.chart_angle + math.pi), ray.length)
    ext = GeodesicPath(path.vertices + (ray.point,), path.segments + (seg,))
    return ext, ray.length, None, True


def unique_extension(
    surface: FlatSurface, path: GeodesicPath, cap: float | None = None, *, check: bool = True
) -> ExtensionResult:
    """Extend straight through regular end points until a singularity or ``cap``.

    The default cap is ten times the surface diameter.
    """
    if not path.segments or path.length <= 0:
        raise NotLocalGeodesic("extension needs a path of positive length")
    if check and not is_local_geodesic(surface, path):
        raise NotLocalGeodesic("path is not a local geodesic")
    if cap is None:
        from flatflow.cover import surface_diameter

        cap = DEFAULT_CAP_DIAMETERS * surface_diameter(surface)
    fwd, s2, right, rcap = _extend_forward(surface, path, cap)
    back, s1, left, lcap = _extend_forward(surface, fwd.reversed(), cap)
    return ExtensionResult(back.reversed(), s1, s2, left, right, lcap, rcap)


# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class JoinResult:
    path: GeodesicPath
    middle: tuple[SaddleConnection, ...]
    middle_length: float


def join_geodesics(
    surface: FlatSurface,
    c: GeodesicPath,
    c2: GeodesicPath,
    budget: float,
    *,
    max_hops: int = DEFAULT_MAX_HOPS,
    saddles: list[SaddleConnection] | None = None,
) -> JoinResult:
    """A local geodesic starting with c and ending with c2.

    Searches chains of at most ``max_hops`` saddle connections from the end
    of c to the start of c2, shortest first, whose junction angles are at
    least pi on both sides.  Raises BudgetExhausted if no chain of total
    length <= budget works.
    """
    if not (c.end.is_cone and c2.start.is_cone):
        raise NotLocalGeodesic("c must end and c2 must start at a singularity")
    if not c.segments or not c2.segments:
        raise MalformedPath("both paths need at least one segment")
    if saddles is None:
        saddles = oriented_saddle_connections(surface, budget) if budget > 0 else []
    out_of: dict[int, list[SaddleConnection]] = {}
    for sc in saddles:
        if sc.length <= budget + surface.tol.eps_len:
            out_of.setdefault(sc.start, []).append(sc)
    arr0 = c.segments[-1].arr
    dep_end = c2.segments[0].dep
    target = c2.start.cone

    def ok(cone, arr, dep):
        return _turn_ok(surface, SurfacePoint.at_cone(cone), arr, dep, 0.0)

    # (length, tie, cone, arrival parameter, chain)
    heap = [(0.0, (), c.end.cone, arr0, ())]
    while heap:
        length, tie, cone, arr, chain = heapq.heappop(heap)
        if cone == target and ok(cone, arr, dep_end):
            mid = GeodesicPath.point(c.end)
            for sc in chain:
                mid = mid.concat(sc.as_path())
            path = c.concat(mid).concat(c2)
            return JoinResult(path, chain, length)
        if len(chain) >= max_hops:
            continue
        for k, sc in enumerate(out_of.get(cone, ())):
            nl = length + sc.length
            if nl > budget + surface.tol.eps_len:
                continue
            if not ok(cone, arr, sc.dep):
                continue
            heapq.heappush(heap, (nl, tie + (k,), sc.end, sc.arr, chain + (sc,)))
    raise BudgetExhausted(f"no admissible chain of at most {max_hops} saddle connections within {budget:g}")
