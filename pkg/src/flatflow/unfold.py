"""Straight-line unfolding on a flat surface.

Two primitives live here, both operating directly on the polygon charts:

* :func:`trace_ray` follows one straight ray until it meets a singular
  vertex or has travelled a given length.
* :func:`develop_window` unfolds an open angular window of directions
  issuing from a point and reports every singularity that is *visible*
  (reachable by a straight segment with no singularity in its interior)
  within a radius, together with the polygon copies the window sweeps.

Planar coordinates are expressed in the frame of the source point: the
chart frame for a regular point, the frame of the first corner for a
cone point (see :meth:`FlatSurface.param_direction`).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from flatflow.surface import TWO_PI, FlatSurface, SurfacePoint, wrap

# open windows exclude directions closer than this to their boundary
ANG_EPS = 1e-10
MAX_RAY_STEPS = 1_000_000


@dataclass(frozen=True)
class Hit:
    """A singularity seen from the source along a straight segment."""

    cone: int
    x: float
    y: float
    dep: float  # direction parameter at the source
    arr: float  # direction parameter at the target, pointing back to the source
    length: float


@dataclass(frozen=True)
class Cell:
    """One polygon copy swept by a window: chart point p maps to rho * p + t."""

    polygon: int
    rho: int
    tx: float
    ty: float
    lo: float  # planar angle window (unwrapped)
    hi: float
    shift: float  # planar angle minus source parameter inside this window


@dataclass(frozen=True)
class RayEnd:
    """Where a ray stopped: either at a singularity or after its full length."""

    hit: Hit | None
    point: SurfacePoint | None  # regular end point when no singularity was met
    chart_angle: float  # direction of travel at the end point, in its chart
    length: float


class _Geom:
    """Per-surface lookup tables in plain lists for the hot loops."""

    def __init__(self, s: FlatSurface):
        self.verts = [p.vertices for p in s.polygons]
        self.n = [p.n for p in s.polygons]
        self.sing = [
            [s.is_singular_vertex(p.id, i) for i in range(p.n)] for p in s.polygons
        ]
        self.vcone = [[s.corner_index[(p.id, i)][0] for i in range(p.n)] for p in s.polygons]
        self.emap = [
            [
                (m.polygon, m.edge, m.sigma, m.cx, m.cy)
                for m in (s.edge_maps[(p.id, e)] for e in range(p.n))
            ]
            for p in s.polygons
        ]


@lru_cache(maxsize=32)
def geom(surface: FlatSurface) -> _Geom:
    return _Geom(surface)


def _unwrap_near(a: float, c: float) -> float:
    d = math.fmod(a - c, TWO_PI)
    if d > math.pi:
        d -= TWO_PI
    elif d <= -math.pi:
        d += TWO_PI
    return c + d


# ---------------------------------------------------------------------------
# ray tracing


def _trace_from_vertex(surface, g, cone, t, length, travelled, crossings=None):
    """Continue a ray leaving cone point ``cone`` with parameter ``t``."""
    cp = surface.cone_points[cone]
    t = wrap(t, cp.angle)
    c = surface.corner_at_param(cone, t)
    tol = surface.tol.eps_angle
    if t - c.offset <= tol or c.offset + c.angle - t <= tol:
        # along an edge of the polygon
        if t - c.offset <= tol:
            pid, i = c.polygon, c.vertex
            j = (i + 1) % g.n[pid]
        else:
            pid, i = c.polygon, c.vertex
            j = (i - 1) % g.n[pid]
        (x0, y0), (x1, y1) = g.verts[pid][i], g.verts[pid][j]
        el = math.hypot(x1 - x0, y1 - y0)
        ux, uy = (x1 - x0) / el, (y1 - y0) / el
        if el > length + surface.tol.eps_len:
            pt = SurfacePoint(pid, x0 + ux * length, y0 + uy * length)
            return RayEnd(None, pt, math.atan2(uy, ux), travelled + length)
        back = math.atan2(-uy, -ux)
        arr = surface.corner_param(pid, j, back)
        if g.sing[pid][j]:
            return RayEnd(
                Hit(g.vcone[pid][j], 0.0, 0.0, float("nan"), arr, travelled + el),
                None, math.atan2(uy, ux), travelled + el,
            )
        return _trace_from_vertex(
            surface, g, g.vcone[pid][j], arr + math.pi, length - el, travelled + el, crossings
        )
    pid, i = c.polygon, c.vertex
    ang = c.start_angle + (t - c.offset)
    x0, y0 = g.verts[pid][i]
    return _trace_interior(
        surface, g, pid, x0, y0, math.cos(ang), math.sin(ang), length, travelled,
        skip_vertex=i, crossings=crossings,
    )


def _trace_interior(
    surface, g, pid, x, y, ux, uy, length, travelled, skip_vertex=-1, skip_edge=-1, crossings=None
):
    eps = surface.tol.eps_len
    for _ in range(MAX_RAY_STEPS):
        verts = g.verts[pid]
        n = g.n[pid]
        best_s, best_e, best_r = math.inf, -1, 0.0
        for e in range(n):
            if e == skip_edge or (skip_vertex >= 0 and (e == skip_vertex or (e + 1) % n == skip_vertex)):
                continue
            ax, ay = verts[e]
            bx, by = verts[(e + 1) % n]
            ex, ey = bx - ax, by - ay
            den = ux * ey - uy * ex
            if den <= 1e-15:
                # parallel, or an edge the ray approaches from outside
                continue
            wx, wy = ax - x, ay - y
            s = (wx * ey - wy * ex) / den
            r = (wx * uy - wy * ux) / den
            if s < best_s and -1e-9 <= r <= 1 + 1e-9:
                best_s, best_e, best_r = s, e, r
        if best_e < 0:
            raise RuntimeError("ray lost inside a polygon")
        s = max(best_s, 0.0)
        if s >= length:
            pt = SurfacePoint(pid, x + ux * length, y + uy * length)
            return RayEnd(None, pt, math.atan2(uy, ux), travelled + length)
        ax, ay = verts[best_e]
        bx, by = verts[(best_e + 1) % n]
        el = math.hypot(bx - ax, by - ay)
        vtx = -1
        if best_r * el <= eps:
            vtx = best_e
        elif (1.0 - best_r) * el <= eps:
            vtx = (best_e + 1) % n
        if vtx >= 0:
            vx, vy = verts[vtx]
            d = math.hypot(vx - x, vy - y)
            arr = surface.corner_param(pid, vtx, math.atan2(-uy, -ux))
            if g.sing[pid][vtx]:
                return RayEnd(
                    Hit(g.vcone[pid][vtx], 0.0, 0.0, float("nan"), arr, travelled + d),
                    None, math.atan2(uy, ux), travelled + d,
                )
            return _trace_from_vertex(
                surface, g, g.vcone[pid][vtx], arr + math.pi, length - d, travelled + d, crossings
            )
        qid, f, sigma, cx, cy = g.emap[pid][best_e]
        if crossings is not None:
            crossings.append((pid, best_e, best_r, qid, f))
        px, py = x + ux * s, y + uy * s
        x, y = sigma * px + cx, sigma * py + cy
        ux, uy = sigma * ux, sigma * uy
        length -= s
        travelled += s
        pid, skip_edge, skip_vertex = qid, f, -1
    raise RuntimeError("ray tracing did not terminate")


def trace_ray(
    surface: FlatSurface, source: SurfacePoint, t: float, length: float, crossings: list | None = None
) -> RayEnd:
    """Follow the straight ray from ``source`` with direction parameter ``t``.

    Stops at the first singular vertex (``RayEnd.hit``) or after ``length``.
    Regular (angle 2 pi) vertices are passed straight through.  The hit's
    ``dep`` field is the requested parameter.  Edge crossings are appended
    to ``crossings`` as ``(polygon, edge, r, partner polygon, partner edge)``
    with r the position along the edge from its start vertex.
    """
    g = geom(surface)
    if source.is_cone:
        end = _trace_from_vertex(surface, g, source.cone, t, length, 0.0, crossings)
    else:
        end = _trace_interior(
            surface, g, source.polygon, source.x, source.y, math.cos(t), math.sin(t), length, 0.0,
            crossings=crossings,
        )
    if end.hit is not None:
        h = end.hit
        dx, dy = surface.direction_vector(source, t)
        end = RayEnd(
            Hit(h.cone, dx * h.length, dy * h.length, wrap(t, surface.total_angle(source)), h.arr, h.length),
            None, end.chart_angle, end.length,
        )
    return end


# ---------------------------------------------------------------------------
# window development


def _source_windows(surface: FlatSurface, source: SurfacePoint, lo: float, hi: float):
    """Split the parameter window (lo, hi) into per-chart start states.

    Yields ``(polygon, rho, tx, ty, plo, phi, shift, skip_vertex)`` and the
    list of interior split parameters whose rays must be traced separately.
    """
    starts = []
    splits = []
    if source.is_cone:
        cp = surface.cone_points[source.cone]
        theta = cp.angle
        # walk corners covering (lo, hi); the window may wrap around
        base = math.floor(lo / theta) * theta
        k = 0
        while True:
            c = cp.corners[k % len(cp.corners)]
            period = base + (k // len(cp.corners)) * theta
            c_lo = period + c.offset
            c_hi = c_lo + c.angle
            if c_lo >= hi:
                break
            a, b = max(lo, c_lo), min(hi, c_hi)
            if lo + ANG_EPS < c_lo < hi - ANG_EPS:
                splits.append(c_lo)
            if b - a > ANG_EPS:
                rho = -1 if c.flip else 1
                vx, vy = surface.polygons[c.polygon].vertices[c.vertex]
                shift = c.start_angle + math.pi * c.flip - c_lo
                starts.append((c.polygon, rho, -rho * vx, -rho * vy, a + shift, b + shift, shift, c.vertex))
            k += 1
    else:
        width = hi - lo
        pieces = max(1, math.ceil(width / (math.pi / 2) - 1e-12))
        step = width / pieces
        for m in range(pieces):
            a = lo + m * step
            b = hi if m == pieces - 1 else a + step
            if m > 0:
                splits.append(a)
            starts.append((source.polygon, 1, -source.x, -source.y, a, b, 0.0, -1))
    return starts, splits


def develop_window(
    surface: FlatSurface,
    source: SurfacePoint,
    lo: float,
    hi: float,
    radius: float,
    *,
    include_lo: bool = False,
    include_hi: bool = False,
    cells: list | None = None,
    targets: dict | None = None,
    located: list | None = None,
) -> list[Hit]:
    """Singularities visible from ``source`` in the parameter window (lo, hi).

    Directions with parameter strictly between ``lo`` and ``hi`` (``lo <
    hi``, width at most the total angle) are unfolded out to ``radius``.
    Boundary rays are traced exactly when requested.  Polygon copies are
    appended to ``cells``; points listed in ``targets`` (polygon id ->
    list of (key, x, y)) that lie inside the swept region are appended to
    ``located`` as ``(key, px, py, dep, rho)``.

    Hits are returned sorted by (length, dep).
    """
    g = geom(surface)
    eps_len = surface.tol.eps_len
    hits: list[Hit] = []
    starts, splits = _source_windows(surface, source, lo, hi)
    rays = list(splits)
    if include_lo:
        rays.append(lo)
    if include_hi:
        rays.append(hi)
    total = surface.total_angle(source)
    rays.sort()
    rays = [t for k, t in enumerate(rays) if k == 0 or t - rays[k - 1] > ANG_EPS]
    if len(rays) > 1 and rays[0] + total - rays[-1] <= ANG_EPS:
        rays.pop()
    for t in rays:
        end = trace_ray(surface, source, t, radius + eps_len)
        if end.hit is not None and end.hit.length <= radius + eps_len:
            hits.append(end.hit)

    tarr = None
    if targets:
        tarr = {
            pid: (
                [k for k, _, _ in lst],
                np.array([x for _, x, _ in lst]),
                np.array([y for _, _, y in lst]),
            )
            for pid, lst in targets.items()
        }
    verts_all, n_all, sing_all, vcone_all, emap_all = g.verts, g.n, g.sing, g.vcone, g.emap
    corner_param = surface.corner_param
    r2max = (radius + eps_len) ** 2
    through: list[float] = []
    n_located = len(located) if located is not None else 0
    for (pid0, rho0, tx0, ty0, plo0, phi0, shift, skip_v) in starts:
        stack = [(pid0, rho0, tx0, ty0, -1, plo0, phi0)]
        first = True
        while stack:
            pid, rho, tx, ty, entry, wlo, whi = stack.pop()
            verts = verts_all[pid]
            n = n_all[pid]
            if cells is not None:
                cells.append(Cell(pid, rho, tx, ty, wlo, whi, shift))
            c = 0.5 * (wlo + whi)
            px = [0.0] * n
            py = [0.0] * n
            pa = [0.0] * n
            for k in range(n):
                vx, vy = verts[k]
                x = rho * vx + tx
                y = rho * vy + ty
                px[k] = x
                py[k] = y
                if first and k == skip_v:
                    pa[k] = math.nan
                elif first and skip_v < 0:
                    pa[k] = math.atan2(y, x)  # origin inside: unwrapped per edge below
                else:
                    pa[k] = _unwrap_near(math.atan2(y, x), c)
            if tarr is not None and pid in tarr:
                keys, qx, qy = tarr[pid]
                x = rho * qx + tx
                y = rho * qy + ty
                near = np.nonzero(x * x + y * y <= r2max)[0]
                if len(near):
                    a = np.arctan2(y[near], x[near])
                    a = c + np.mod(a - c + math.pi, TWO_PI) - math.pi
                    # closed test: a target exactly on a split ray belongs to neither open piece
                    for j in near[(wlo - ANG_EPS <= a) & (a <= whi + ANG_EPS)]:
                        aj = _unwrap_near(math.atan2(y[j], x[j]), c)
                        located.append((keys[j], float(x[j]), float(y[j]), wrap(aj - shift, total), rho))
            # singular vertices strictly inside the window
            for k in range(n):
                if first and k == skip_v:
                    continue
                if entry >= 0 and (k == entry or k == (entry + 1) % n):
                    continue
                a = pa[k]
                if first and skip_v < 0:
                    a = _unwrap_near(a, c)
                if wlo + ANG_EPS < a < whi - ANG_EPS:
                    x, y = px[k], py[k]
                    d2 = x * x + y * y
                    if d2 <= r2max and not sing_all[pid][k]:
                        # the exact ray through a regular vertex falls between
                        # the open sub-windows on either side: trace it
                        through.append(wrap(a - shift, total))
                    elif d2 <= r2max:
                        back = math.atan2(-rho * y, -rho * x)
                        hits.append(
                            Hit(
                                vcone_all[pid][k], x, y,
                                wrap(a - shift, total),
                                corner_param(pid, k, back),
                                math.sqrt(d2),
                            )
                        )
            # exit edges
            for e in range(n):
                if e == entry:
                    continue
                k1 = (e + 1) % n
                if first and (e == skip_v or k1 == skip_v):
                    continue
                a1, a2 = pa[e], pa[k1]
                if first and skip_v < 0:
                    # origin strictly inside the start polygon: each edge subtends < pi
                    a1 = _unwrap_near(a1, wlo)
                    a1 = a1 if a1 < wlo + math.pi else a1 - TWO_PI
                    a2 = a1 + wrap(pa[k1] - pa[e])
                    if a2 <= wlo or a1 >= whi:
                        continue
                elif a1 > a2:
                    a1, a2 = a2, a1
                l2 = a1 if a1 > wlo else wlo
                h2 = a2 if a2 < whi else whi
                if h2 - l2 <= ANG_EPS:
                    continue
                # nearest point of the edge piece inside the window
                x1, y1, x2, y2 = px[e], py[e], px[k1], py[k1]
                ex, ey = x2 - x1, y2 - y1
                el2 = ex * ex + ey * ey
                # clip to the window rays
                cl, sl = math.cos(l2), math.sin(l2)
                ch, sh = math.cos(h2), math.sin(h2)
                den_l = cl * ey - sl * ex
                den_h = ch * ey - sh * ex
                if abs(den_l) > 1e-300 and abs(den_h) > 1e-300:
                    rl = (x1 * sl - y1 * cl) / den_l
                    rh = (x1 * sh - y1 * ch) / den_h
                    r_a, r_b = (rl, rh) if rl < rh else (rh, rl)
                    r_a = max(0.0, r_a)
                    r_b = min(1.0, r_b)
                else:
                    r_a, r_b = 0.0, 1.0
                r0 = -(x1 * ex + y1 * ey) / el2
                r = min(max(r0, r_a), r_b)
                dx, dy = x1 + r * ex, y1 + r * ey
                if dx * dx + dy * dy > r2max:
                    continue
                qid, f, sigma, cx, cy = emap_all[pid][e]
                nrho = rho * sigma
                stack.append((qid, nrho, tx - nrho * cx, ty - nrho * cy, f, l2, h2))
            first = False
    if located is not None and len(located) > n_located:
        seen_t: set = set()
        fresh = []
        for rec in located[n_located:]:
            key = (rec[0], round(rec[3], 7), round(math.hypot(rec[1], rec[2]), 7))
            if key not in seen_t:
                seen_t.add(key)
                fresh.append(rec)
        del located[n_located:]
        located.extend(fresh)
    if through:
        seen = {(h.cone, round(h.dep, 9)) for h in hits}
        for t in through:
            end = trace_ray(surface, source, t, radius + eps_len)
            h = end.hit
            if h is not None and h.length <= radius + eps_len and (h.cone, round(h.dep, 9)) not in seen:
                seen.add((h.cone, round(h.dep, 9)))
                hits.append(h)
    hits.sort(key=lambda h: (round(h.length, 9), h.dep))
    return hits
