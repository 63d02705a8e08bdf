"""Piecewise straight paths that turn only at cone points.

A path is stored intrinsically: its vertices are surface points and each
segment records the direction parameter it leaves with, the parameter at
its far end pointing back, and its length.  Because the universal cover
is simply connected, this data together with a lift of the start point
determines the lifted path, so the same object serves on the surface and
in the cover.

:func:`tighten` pulls a path taut in its homotopy class.  At a vertex
where one side makes an angle below pi, the flat triangle spanned by the
two incident segments on that side contains no singularity in its
interior (Gauss-Bonnet), so the shortest replacement is the convex chain
of the singularities visible from the vertex inside that triangle.
Repeating until every turn is at least pi on both sides gives the unique
local geodesic, which in the CAT(0) cover is the shortest path.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from flatflow.errors import MalformedPath
from flatflow.surface import FlatSurface, SurfacePoint, signed_angle, wrap
from flatflow.unfold import ANG_EPS, develop_window

MAX_TIGHTEN_STEPS = 100_000


@dataclass(frozen=True)
class Segment:
    dep: float
    arr: float
    length: float


@dataclass(frozen=True)
class GeodesicPath:
    vertices: tuple[SurfacePoint, ...]
    segments: tuple[Segment, ...]
    closed: bool = False

    def __post_init__(self):
        if len(self.vertices) != len(self.segments) + 1:
            raise MalformedPath("a path needs exactly one more vertex than segments")

    @classmethod
    def point(cls, p: SurfacePoint) -> "GeodesicPath":
        return cls((p,), ())

    @property
    def start(self) -> SurfacePoint:
        return self.vertices[0]

    @property
    def end(self) -> SurfacePoint:
        return self.vertices[-1]

    @property
    def length(self) -> float:
        return math.fsum(s.length for s in self.segments)

    def positions(self) -> list[float]:
        """Arc-length position of every vertex."""
        out = [0.0]
        for s in self.segments:
            out.append(out[-1] + s.length)
        return out

    def reversed(self) -> "GeodesicPath":
        segs = tuple(Segment(s.arr, s.dep, s.length) for s in reversed(self.segments))
        return GeodesicPath(tuple(reversed(self.vertices)), segs, self.closed)

    def subpath(self, i: int, j: int) -> "GeodesicPath":
        """Vertices i..j inclusive."""
        return GeodesicPath(self.vertices[i : j + 1], self.segments[i:j])

    def concat(self, other: "GeodesicPath") -> "GeodesicPath":
        if self.end != other.start:
            raise MalformedPath("paths do not share the junction point")
        return GeodesicPath(self.vertices + other.vertices[1:], self.segments + other.segments)

    def turns(self, surface: FlatSurface) -> list[tuple[float, float]]:
        """(left, right) flat angles at every interior vertex."""
        out = []
        for i in range(1, len(self.vertices) - 1):
            theta = surface.total_angle(self.vertices[i])
            left = wrap(self.segments[i - 1].arr - self.segments[i].dep, theta)
            out.append((left, theta - left))
        return out

    def holonomy(self, surface: FlatSurface, i: int) -> tuple[float, float]:
        """Vector of segment i in the frame of its start vertex."""
        s = self.segments[i]
        dx, dy = surface.direction_vector(self.vertices[i], s.dep)
        return (dx * s.length, dy * s.length)


def _dir(surface, p, t, length):
    dx, dy = surface.direction_vector(p, t)
    return (dx * length, dy * length)


def _far_side(a, b, p, v, eps):
    """True if p lies strictly on the opposite side of line ab from v."""
    abx, aby = b[0] - a[0], b[1] - a[1]
    cp = abx * (p[1] - a[1]) - aby * (p[0] - a[0])
    cv = abx * (v[1] - a[1]) - aby * (v[0] - a[0])
    scale = math.hypot(abx, aby)
    if abs(cp) <= eps * max(scale, 1.0):
        return False
    return (cp > 0) != (cv > 0)


def _shortcut(surface: FlatSurface, verts: list, segs: list, i: int, lo: float, width: float) -> None:
    """Replace the turn at vertex i by the taut chain on the side (lo, lo + width)."""
    eps = surface.tol.eps_len
    v = verts[i]
    s_in, s_out = segs[i - 1], segs[i]
    u_pos = _dir(surface, v, s_in.arr, s_in.length)
    w_pos = _dir(surface, v, s_out.dep, s_out.length)
    th_u = surface.total_angle(verts[i - 1])
    th_w = surface.total_angle(verts[i + 1])
    if width <= ANG_EPS:
        # both neighbours in the same direction from v
        if abs(s_in.length - s_out.length) <= eps:
            if i - 1 == 0 and i + 1 == len(verts) - 1:
                del verts[1:], segs[:]
                return
            del verts[i : i + 2]
            del segs[i - 1 : i + 1]
            return
        if s_in.length < s_out.length:
            new = Segment(wrap(s_in.dep + math.pi, th_u), s_out.arr, s_out.length - s_in.length)
        else:
            new = Segment(s_in.dep, wrap(s_out.arr + math.pi, th_w), s_in.length - s_out.length)
        verts[i - 1 : i + 2] = [verts[i - 1], verts[i + 1]]
        segs[i - 1 : i + 1] = [new]
        return
    radius = max(s_in.length, s_out.length) + eps
    hits = develop_window(surface, v, lo, lo + width, radius)
    origin = (0.0, 0.0)
    inside = []
    for h in hits:
        p = (h.x, h.y)
        if not _far_side(u_pos, w_pos, p, origin, eps):
            inside.append(h)
    theta_v = surface.total_angle(v)
    inside.sort(key=lambda h: wrap(h.dep - lo, theta_v))
    # u and w first and last, in angular order from lo
    if abs(wrap(s_in.arr - lo, theta_v)) <= ANG_EPS or wrap(s_in.arr - lo, theta_v) > theta_v - ANG_EPS:
        first, last = (u_pos, None), (w_pos, None)
        reverse = False
    else:
        first, last = (w_pos, None), (u_pos, None)
        reverse = True
    chain = [first]
    for h in inside + [None]:
        p = last if h is None else ((h.x, h.y), h)
        while len(chain) >= 2 and _far_side(chain[-2][0], p[0], chain[-1][0], origin, eps):
            chain.pop()
        chain.append(p)
    if reverse:
        chain.reverse()
    # chain runs u -> ... -> w; build the new segments
    mids = chain[1:-1]
    new_verts = [verts[i - 1]] + [SurfacePoint.at_cone(h.cone) for _, h in mids] + [verts[i + 1]]
    new_segs = []
    pts = [u_pos] + [p for p, _ in mids] + [w_pos]
    # parameter at each chain point of the direction pointing back to v
    back = [s_in.dep] + [h.arr for _, h in mids] + [s_out.arr]
    thetas = [th_u] + [surface.total_angle(x) for x in new_verts[1:-1]] + [th_w]
    for k in range(len(pts) - 1):
        a, b = pts[k], pts[k + 1]
        dep = wrap(back[k] + signed_angle(-a[0], -a[1], b[0] - a[0], b[1] - a[1]), thetas[k])
        arr = wrap(back[k + 1] + signed_angle(-b[0], -b[1], a[0] - b[0], a[1] - b[1]), thetas[k + 1])
        new_segs.append(Segment(dep, arr, math.hypot(b[0] - a[0], b[1] - a[1])))
    verts[i - 1 : i + 2] = new_verts
    segs[i - 1 : i + 1] = new_segs


def _violation(surface: FlatSurface, verts, segs, i, strict_eps):
    """Return (lo, width) of a side with angle below pi at vertex i, or None."""
    v = verts[i]
    theta = surface.total_angle(v)
    arr, dep = segs[i - 1].arr, segs[i].dep
    ccw = wrap(dep - arr, theta)  # from the incoming back-direction to the outgoing one
    if not v.is_cone or not surface.cone_points[v.cone].is_singular:
        if abs(ccw - math.pi) <= strict_eps:
            return "merge"
    if ccw < math.pi - strict_eps:
        return (arr, ccw)
    if theta - ccw < math.pi - strict_eps:
        return (dep, theta - ccw)
    if ccw <= ANG_EPS or theta - ccw <= ANG_EPS:
        return (arr, 0.0)
    return None


def tighten(surface: FlatSurface, path: GeodesicPath) -> GeodesicPath:
    """Shortest path homotopic to ``path`` with fixed end points."""
    verts = list(path.vertices)
    segs = list(path.segments)
    strict = surface.tol.eps_angle
    for _ in range(MAX_TIGHTEN_STEPS):
        # drop zero-length segments
        k = 0
        while k < len(segs):
            if segs[k].length <= surface.tol.eps_len and len(segs) > 0:
                if k + 1 < len(segs):
                    # keep the outgoing direction of the next segment
                    del verts[k + 1]
                    del segs[k]
                elif k > 0:
                    del verts[k]
                    del segs[k]
                else:
                    del verts[1:]
                    del segs[:]
            else:
                k += 1
        fixed = False
        for i in range(1, len(verts) - 1):
            viol = _violation(surface, verts, segs, i, strict)
            if viol is None:
                continue
            if viol == "merge":
                s_in, s_out = segs[i - 1], segs[i]
                verts[i - 1 : i + 2] = [verts[i - 1], verts[i + 1]]
                segs[i - 1 : i + 1] = [Segment(s_in.dep, s_out.arr, s_in.length + s_out.length)]
            else:
                _shortcut(surface, verts, segs, i, viol[0], viol[1])
            fixed = True
            break
        if not fixed:
            return GeodesicPath(tuple(verts), tuple(segs))
    raise RuntimeError("path tightening did not converge")
