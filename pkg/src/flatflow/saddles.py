"""Saddle connections, flat cylinders and singular directions.

Saddle connections are read off by unfolding the whole cone of
directions at every singularity out to the length bound: each singular
vertex visible from the source is the far end of exactly one saddle
connection leaving in that direction.  A saddle connection and its
reverse are the same geometric segment, so the canonical list keeps the
orientation whose (start id, outgoing parameter) is smaller.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from flatflow.errors import PatchBudgetExceeded
from flatflow.paths import GeodesicPath, Segment
from flatflow.surface import DirectionAt, FlatSurface, SurfacePoint, wrap
from flatflow.unfold import ANG_EPS, develop_window, trace_ray

KEY_DIGITS = 9


@dataclass(frozen=True)
class SaddleConnection:
    start: int  # cone point id
    end: int
    hol_x: float  # holonomy in the start cone's frame
    hol_y: float
    length: float
    dep: float  # direction parameter leaving the start
    arr: float  # direction parameter at the end pointing back

    def as_path(self) -> GeodesicPath:
        return GeodesicPath(
            (SurfacePoint.at_cone(self.start), SurfacePoint.at_cone(self.end)),
            (Segment(self.dep, self.arr, self.length),),
        )

    def reversed(self, surface: FlatSurface) -> "SaddleConnection":
        dx, dy = surface.direction_vector(SurfacePoint.at_cone(self.end), self.arr)
        return SaddleConnection(
            self.end, self.start, dx * self.length, dy * self.length, self.length, self.arr, self.dep
        )


def oriented_saddle_connections(surface: FlatSurface, lmax: float) -> list[SaddleConnection]:
    """Every saddle connection of length <= lmax, once per orientation."""
    if lmax <= 0:
        raise ValueError("length bound must be positive")
    out = []
    for cp in surface.singularities:
        src = SurfacePoint.at_cone(cp.id)
        for h in develop_window(surface, src, 0.0, cp.angle, lmax, include_lo=True):
            if h.length <= surface.tol.eps_len:
                continue
            out.append(SaddleConnection(cp.id, h.cone, h.x, h.y, h.length, h.dep, h.arr))
    out.sort(key=_order_key)
    return out


def _order_key(sc: SaddleConnection):
    return (round(sc.length, KEY_DIGITS), sc.start, round(sc.dep, KEY_DIGITS), sc.end)


def _param_key(surface: FlatSurface, cone: int, t: float) -> float:
    # a parameter a few ulps below the total angle is the direction 0
    theta = surface.cone_points[cone].angle
    return 0.0 if theta - t < 1e-9 else round(t, KEY_DIGITS)


def enumerate_saddle_connections(surface: FlatSurface, lmax: float) -> list[SaddleConnection]:
    """Saddle connections of length <= lmax, one entry per segment.

    Ordered by (length, start id, outgoing direction parameter).
    """
    out = []
    for sc in oriented_saddle_connections(surface, lmax):
        mine = (sc.start, _param_key(surface, sc.start, sc.dep))
        other = (sc.end, _param_key(surface, sc.end, sc.arr))
        if mine < other:
            out.append(sc)
    return out


# ---------------------------------------------------------------------------
# cylinders


@dataclass(frozen=True)
class FlatCylinder:
    circumference: float
    height: float
    direction: float  # chart angle of the core curve, in [0, pi)
    core: SurfacePoint  # a point on the core (mid-height) curve
    boundary: tuple[tuple[SaddleConnection, ...], tuple[SaddleConnection, ...]]
    key: tuple = ()

    @property
    def modulus(self) -> float:
        return self.height / self.circumference


def _offset_point(surface: FlatSurface, p: SurfacePoint, angle: float, dist: float) -> SurfacePoint:
    end = trace_ray(surface, p, angle, dist)
    if end.point is None:
        raise RuntimeError("offset ray hit a singularity")
    return end.point


def _chart_angle_at(surface: FlatSurface, sc: SaddleConnection) -> tuple[SurfacePoint, float]:
    """Midpoint of sc as a regular point and the chart angle of sc there."""
    end = trace_ray(surface, SurfacePoint.at_cone(sc.start), sc.dep, 0.5 * sc.length)
    return end.point, end.chart_angle


def _height_above(surface: FlatSurface, p: SurfacePoint, phi: float, lmax: float, cap: float):
    """Perpendicular distance from p to the first singularity on the left of direction phi."""
    r = lmax
    while True:
        hits = develop_window(surface, p, phi, phi + math.pi, r)
        best = None
        for h in hits:
            a = h.dep - phi
            perp = h.length * math.sin(a)
            if best is None or perp < best:
                best = perp
        if best is not None and r >= math.hypot(0.5 * lmax, best):
            return best
        if r > cap:
            raise PatchBudgetExceeded(f"cylinder height search beyond radius {cap:g}")
        r *= 2.0


def _closing_length(surface: FlatSurface, q: SurfacePoint, phi: float, lmax: float):
    """Length after which the straight leaf through q in direction phi closes, if <= lmax."""
    eta = 1e-6
    located: list = []
    tg = {q.polygon: [(0, q.x, q.y)]}
    develop_window(surface, q, phi - eta, phi + eta, lmax + surface.tol.eps_len, targets=tg, located=located)
    best = None
    for _, x, y, dep, rho in located:
        d = math.hypot(x, y)
        if d <= surface.tol.eps_len or rho != 1:
            continue
        if abs(wrap(dep - phi + math.pi) - math.pi) > 1e-8:
            continue
        if best is None or d < best:
            best = d
    return best


def _leaf_crossings(surface: FlatSurface, q: SurfacePoint, phi: float, length: float) -> list:
    """Edge crossings of the leaf through q, each in a side-independent normal form."""
    cross: list = []
    trace_ray(surface, q, phi, length - 1e-9, crossings=cross)
    out = []
    for pid, e, r, qid, f in cross:
        out.append(min((pid, e, r), (qid, f, 1.0 - r)))
    return out


def _leaf_key(surface: FlatSurface, q: SurfacePoint, phi: float, length: float) -> tuple:
    return tuple(sorted((pid, e, round(r, 6)) for pid, e, r in _leaf_crossings(surface, q, phi, length)))


def _direction_key(phi: float) -> float:
    # direction mod pi is global even across half-translation gluings
    d = wrap(phi, math.pi)
    return 0.0 if d > math.pi - 1e-7 else round(d, 6)


def _leaf_mismatch(a: list, b: list) -> float:
    """How far apart two leaves are, from their edge-crossing lists."""
    total = 0.0
    for pid, e, r in a:
        cands = [abs(r - r2) for p2, e2, r2 in b if (p2, e2) == (pid, e)]
        total += min(cands) if cands else 1.0
    return total


def enumerate_cylinders(surface: FlatSurface, lmax: float) -> list[FlatCylinder]:
    """All maximal flat cylinders with circumference <= lmax.

    Every cylinder boundary is a union of saddle connections parallel to
    the core, each no longer than the circumference, so it suffices to
    look on both sides of every saddle connection of length <= lmax.
    """
    if lmax <= 0:
        raise ValueError("length bound must be positive")
    tol = surface.tol
    cap = 64.0 * max(lmax, 1.0)
    delta = 1e-7
    found: dict = {}
    for sc in enumerate_saddle_connections(surface, lmax):
        mid, phi0 = _chart_angle_at(surface, sc)
        for phi in (phi0, phi0 + math.pi):
            # start just off the saddle connection, on its left side
            p = _offset_point(surface, mid, phi + 0.5 * math.pi, delta)
            h = _height_above(surface, p, phi, lmax, cap) + delta
            if h <= tol.eps_len:
                continue
            q = _offset_point(surface, mid, phi + 0.5 * math.pi, 0.5 * h)
            c = _closing_length(surface, q, phi, lmax)
            if c is None:
                continue
            key = (_direction_key(phi), round(c, 6), round(h, 6), _leaf_key(surface, q, phi, c))
            entry = found.setdefault(key, {"c": c, "h": h, "phi": phi, "q": q, "seen": []})
            entry["seen"].append((sc, _leaf_crossings(surface, p, phi, c)))
    out = []
    for key, e in found.items():
        c, h, phi, q = e["c"], e["h"], e["phi"], e["q"]
        near = [
            _leaf_crossings(surface, _offset_point(surface, q, phi - 0.5 * math.pi, 0.5 * h - delta), phi, c),
            _leaf_crossings(surface, _offset_point(surface, q, phi + 0.5 * math.pi, 0.5 * h - delta), phi, c),
        ]
        sides: tuple[list, list] = ([], [])
        for sc, leaf in e["seen"]:
            k = 0 if _leaf_mismatch(leaf, near[0]) <= _leaf_mismatch(leaf, near[1]) else 1
            sides[k].append(sc)
        bottom = tuple(sorted(set(sides[0]), key=_order_key))
        top = tuple(sorted(set(sides[1]), key=_order_key))
        out.append(FlatCylinder(c, h, wrap(phi, math.pi), q, (bottom, top), key))
    out.sort(key=lambda cy: (round(cy.direction, 9), round(cy.circumference, 9), round(cy.height, 9), cy.key))
    return out


# ---------------------------------------------------------------------------


def nearest_singular_direction(
    surface: FlatSurface, x: SurfacePoint, theta: DirectionAt, eps: float, *, max_radius: float | None = None
) -> GeodesicPath:
    """Shortest straight segment from x to a singularity with direction within eps of theta."""
    if eps <= 0:
        raise ValueError("eps must be positive")
    if theta.base != x:
        raise ValueError("direction is not based at x")
    total = surface.total_angle(x)
    lo, hi = theta.angle - eps, theta.angle + eps
    closed = True
    if hi - lo >= total:
        lo, hi, closed = 0.0, total, False
    cap = max_radius if max_radius is not None else 1e4
    r = 1.0
    while True:
        hits = develop_window(
            surface, x, lo, hi, r, include_lo=True, include_hi=closed
        )
        hits = [h for h in hits if h.length > surface.tol.eps_len]
        if hits:
            h = min(hits, key=lambda h: (h.length, h.dep))
            return GeodesicPath((x, SurfacePoint.at_cone(h.cone)), (Segment(h.dep, h.arr, h.length),))
        if r >= cap:
            raise PatchBudgetExceeded(f"no singular direction within {eps:g} up to radius {cap:g}")
        r = min(2.0 * r, cap)


__all__ = [
    "ANG_EPS",
    "FlatCylinder",
    "SaddleConnection",
    "enumerate_cylinders",
    "enumerate_saddle_connections",
    "nearest_singular_direction",
    "oriented_saddle_connections",
]
