"""Closed flat surfaces presented as convex polygons with edge gluings.

A surface is a finite set of convex Euclidean polygons (vertices listed
counterclockwise) whose edges are identified in pairs, either by a
translation or by a half-translation (rotation by pi followed by a
translation).  Identified polygon vertices form cone points; the cone
angle is the sum of the interior corner angles around the vertex class.

Directions at a point are encoded by a real *parameter* measured
counterclockwise in ``[0, total_angle)``.  At a regular interior point the
parameter is the chart angle.  At a cone point the parameter starts at
the first edge of the lexicographically smallest corner and accumulates
corner angles while walking counterclockwise around the vertex.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from flatflow.errors import (
    ConeAngleNotMultipleOfPi,
    ForbiddenConeAngle,
    GenusTooSmall,
    InvalidGluing,
    MismatchedBasePoint,
    MismatchedEdgeLengths,
    NonConvexPolygon,
    SurfaceError,
    UnpairedEdge,
)

TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class Tolerances:
    eps_len: float = 1e-9
    eps_angle: float = 1e-9


DEFAULT_TOL = Tolerances()


def wrap(angle: float, period: float = TWO_PI) -> float:
    """Reduce ``angle`` to ``[0, period)``."""
    r = math.fmod(angle, period)
    if r < 0.0:
        r += period
    if r >= period:
        r = 0.0
    return r


def signed_angle(ax: float, ay: float, bx: float, by: float) -> float:
    """Counterclockwise angle from vector a to vector b in ``(-pi, pi]``."""
    return math.atan2(ax * by - ay * bx, ax * bx + ay * by)


# ---------------------------------------------------------------------------
# input description


@dataclass(frozen=True)
class GluingSpec:
    side_a: tuple[int, int]
    side_b: tuple[int, int]
    kind: str = "translation"


@dataclass(frozen=True)
class SurfaceSpec:
    """Syntactic description of a surface, as read from a surface file."""

    polygons: tuple[tuple[int, tuple[tuple[float, float], ...]], ...]
    gluings: tuple[GluingSpec, ...]
    name: str = ""


# ---------------------------------------------------------------------------
# built objects


@dataclass(frozen=True)
class PolygonChart:
    id: int
    vertices: tuple[tuple[float, float], ...]

    @property
    def n(self) -> int:
        return len(self.vertices)

    def edge(self, i: int) -> tuple[float, float]:
        (x0, y0), (x1, y1) = self.vertices[i], self.vertices[(i + 1) % self.n]
        return (x1 - x0, y1 - y0)

    def corner_angle(self, i: int) -> float:
        ax, ay = self.edge(i)
        bx, by = self.edge((i - 1) % self.n)
        # from the outgoing edge to the reversed incoming edge
        return wrap(signed_angle(ax, ay, -bx, -by))

    def area(self) -> float:
        s = 0.0
        for i in range(self.n):
            (x0, y0), (x1, y1) = self.vertices[i], self.vertices[(i + 1) % self.n]
            s += x0 * y1 - x1 * y0
        return 0.5 * s

    def contains(self, x: float, y: float, eps: float = 1e-9) -> bool:
        for i in range(self.n):
            (x0, y0) = self.vertices[i]
            ex, ey = self.edge(i)
            if ex * (y - y0) - ey * (x - x0) < -eps * math.hypot(ex, ey):
                return False
        return True

    def diameter(self) -> float:
        return max(
            math.dist(p, q) for p in self.vertices for q in self.vertices
        )


@dataclass(frozen=True)
class EdgeGluing:
    side_a: tuple[int, int]
    side_b: tuple[int, int]
    kind: str  # "translation" | "half_translation"


@dataclass(frozen=True)
class Corner:
    """One polygon corner inside the corner cycle of a cone point."""

    polygon: int
    vertex: int
    offset: float  # direction parameter where this corner starts
    start_angle: float  # chart angle of the corner's first edge
    angle: float  # interior corner angle
    flip: int  # 1 if the chart is rotated by pi relative to the cone frame


@dataclass(frozen=True)
class ConePoint:
    id: int
    corner_cycle: tuple[tuple[int, int], ...]
    angle: float
    corners: tuple[Corner, ...] = field(repr=False, default=())

    @property
    def k(self) -> int:
        return round(self.angle / math.pi)

    @property
    def is_singular(self) -> bool:
        return self.k >= 3


@dataclass(frozen=True)
class SurfacePoint:
    """A point of the surface: a cone point, or chart coordinates in a polygon."""

    polygon: int = -1
    x: float = 0.0
    y: float = 0.0
    cone: int | None = None

    @classmethod
    def at_cone(cls, cone: int) -> "SurfacePoint":
        return cls(cone=cone)

    @property
    def is_cone(self) -> bool:
        return self.cone is not None


@dataclass(frozen=True)
class DirectionAt:
    base: SurfacePoint
    angle: float


@dataclass(frozen=True)
class EdgeMap:
    """Chart change across an edge: x -> sigma * x + (cx, cy)."""

    polygon: int
    edge: int
    sigma: int
    cx: float
    cy: float


@dataclass(frozen=True, eq=False)
class FlatSurface:
    polygons: tuple[PolygonChart, ...]
    gluings: tuple[EdgeGluing, ...]
    cone_points: tuple[ConePoint, ...]
    area: float
    euler_characteristic: int
    name: str = ""
    tol: Tolerances = DEFAULT_TOL
    # (polygon, edge) -> EdgeMap into the partner polygon
    edge_maps: dict = field(repr=False, default_factory=dict)
    # (polygon, vertex) -> (cone id, index in cone corner list)
    corner_index: dict = field(repr=False, default_factory=dict)

    @property
    def singularities(self) -> tuple[ConePoint, ...]:
        return tuple(c for c in self.cone_points if c.is_singular)

    @property
    def genus(self) -> int:
        return (2 - self.euler_characteristic) // 2

    def polygon(self, pid: int) -> PolygonChart:
        return self.polygons[pid]

    def vertex_cone(self, pid: int, vertex: int) -> ConePoint:
        return self.cone_points[self.corner_index[(pid, vertex)][0]]

    def is_singular_vertex(self, pid: int, vertex: int) -> bool:
        return self.vertex_cone(pid, vertex).is_singular

    def total_angle(self, p: SurfacePoint) -> float:
        if p.is_cone:
            return self.cone_points[p.cone].angle
        return TWO_PI

    # -- direction parameters at cone points -------------------------------

    def corner_at_param(self, cone: int, t: float) -> Corner:
        cp = self.cone_points[cone]
        t = wrap(t, cp.angle)
        for c in cp.corners:
            if t < c.offset + c.angle:
                return c
        return cp.corners[-1]

    def param_direction(self, cone: int, t: float) -> float:
        """Planar angle, in the cone's frame, of the direction with parameter t."""
        c = self.corner_at_param(cone, t)
        return c.start_angle + math.pi * c.flip + (wrap(t, self.cone_points[cone].angle) - c.offset)

    def corner_param(self, pid: int, vertex: int, chart_angle: float) -> float:
        """Parameter at the cone point of a chart direction entering corner (pid, vertex)."""
        cone, j = self.corner_index[(pid, vertex)]
        c = self.cone_points[cone].corners[j]
        d = wrap(chart_angle - c.start_angle)
        if d > c.angle:
            # numerical spill just outside the corner
            d = c.angle if d - c.angle < math.pi else 0.0
        theta = self.cone_points[cone].angle
        t = wrap(c.offset + d, theta)
        return 0.0 if theta - t < 1e-12 * theta else t

    def direction_vector(self, p: SurfacePoint, t: float) -> tuple[float, float]:
        a = self.param_direction(p.cone, t) if p.is_cone else t
        return (math.cos(a), math.sin(a))


# ---------------------------------------------------------------------------


def _check_polygon(pid: int, verts, tol: Tolerances) -> PolygonChart:
    if len(verts) < 3:
        raise NonConvexPolygon(f"polygon {pid} has fewer than 3 vertices")
    poly = PolygonChart(pid, tuple((float(x), float(y)) for x, y in verts))
    for i in range(poly.n):
        if math.hypot(*poly.edge(i)) <= tol.eps_len:
            raise NonConvexPolygon(f"polygon {pid} has a degenerate edge {i}")
    for i in range(poly.n):
        ax, ay = poly.edge(i)
        bx, by = poly.edge((i + 1) % poly.n)
        if ax * by - ay * bx <= tol.eps_len * math.hypot(ax, ay) * math.hypot(bx, by):
            raise NonConvexPolygon(
                f"polygon {pid} is not strictly convex and counterclockwise at vertex {(i + 1) % poly.n}"
            )
    return poly


def build_surface(spec: SurfaceSpec, tol: Tolerances = DEFAULT_TOL) -> FlatSurface:
    """Validate a polygon/gluing description and derive its cone points."""
    ids = [pid for pid, _ in spec.polygons]
    if sorted(ids) != list(range(len(ids))):
        raise SurfaceError("polygon ids must be 0..n-1")
    by_id = dict(spec.polygons)
    polygons = tuple(_check_polygon(pid, by_id[pid], tol) for pid in range(len(ids)))

    partner: dict[tuple[int, int], tuple[tuple[int, int], int]] = {}
    gluings = []
    for g in spec.gluings:
        if g.kind not in ("translation", "half_translation"):
            raise InvalidGluing(f"unknown gluing kind {g.kind!r}")
        sigma = 1 if g.kind == "translation" else -1
        for side in (g.side_a, g.side_b):
            pid, e = side
            if not (0 <= pid < len(polygons)) or not (0 <= e < polygons[pid].n):
                raise InvalidGluing(f"edge {side} does not exist")
            if side in partner:
                raise InvalidGluing(f"edge {side} glued more than once")
        if g.side_a == g.side_b:
            raise InvalidGluing(f"edge {g.side_a} glued to itself")
        ea = polygons[g.side_a[0]].edge(g.side_a[1])
        eb = polygons[g.side_b[0]].edge(g.side_b[1])
        if abs(math.hypot(*ea) - math.hypot(*eb)) > tol.eps_len:
            raise MismatchedEdgeLengths(f"edges {g.side_a} and {g.side_b} differ in length")
        # translation: eb = -ea ; half translation: eb = ea
        if math.hypot(eb[0] + sigma * ea[0], eb[1] + sigma * ea[1]) > tol.eps_len:
            raise InvalidGluing(
                f"edges {g.side_a} and {g.side_b} are not related by a {g.kind.replace('_', '-')}"
            )
        partner[g.side_a] = (g.side_b, sigma)
        partner[g.side_b] = (g.side_a, sigma)
        gluings.append(EdgeGluing(g.side_a, g.side_b, g.kind))
    for poly in polygons:
        for e in range(poly.n):
            if (poly.id, e) not in partner:
                raise UnpairedEdge(f"edge ({poly.id}, {e}) is not glued")

    edge_maps = {}
    for (pid, e), ((qid, f), sigma) in partner.items():
        a = polygons[pid].vertices[e]
        bq = polygons[qid].vertices[(f + 1) % polygons[qid].n]
        # a -> end of partner edge, end of this edge -> start of partner edge
        edge_maps[(pid, e)] = EdgeMap(qid, f, sigma, bq[0] - sigma * a[0], bq[1] - sigma * a[1])

    # corner cycles
    seen: set[tuple[int, int]] = set()
    cycles = []
    for poly in polygons:
        for i in range(poly.n):
            if (poly.id, i) in seen:
                continue
            cycle = []
            flips = []
            cur, flip = (poly.id, i), 0
            while cur not in seen:
                seen.add(cur)
                cycle.append(cur)
                flips.append(flip)
                p, v = cur
                (q, m), sigma = partner[(p, (v - 1) % polygons[p].n)]
                cur = (q, m)
                flip ^= 1 if sigma < 0 else 0
            if cur != cycle[0]:
                raise SurfaceError("corner walk did not close")
            cycles.append((cycle, flips))
    # numbering by smallest corner; the walk above already starts there
    cycles.sort(key=lambda cf: min(cf[0]))

    cone_points = []
    corner_index = {}
    for cid, (cycle, flips) in enumerate(cycles):
        corners = []
        offset = 0.0
        for j, ((p, v), fl) in enumerate(zip(cycle, flips)):
            poly = polygons[p]
            ex, ey = poly.edge(v)
            beta = poly.corner_angle(v)
            corners.append(Corner(p, v, offset, math.atan2(ey, ex), beta, fl))
            corner_index[(p, v)] = (cid, j)
            offset += beta
        angle = offset
        k = round(angle / math.pi)
        if abs(angle - k * math.pi) > tol.eps_angle * len(cycle):
            raise ConeAngleNotMultipleOfPi(
                f"cone point at corner {cycle[0]} has angle {angle!r}, not a multiple of pi"
            )
        if k < 2:
            raise ForbiddenConeAngle(f"cone point at corner {cycle[0]} has angle {k}*pi")
        cone_points.append(ConePoint(cid, tuple(cycle), angle, tuple(corners)))

    chi = len(cone_points) - len(gluings) + len(polygons)
    surface = FlatSurface(
        polygons=polygons,
        gluings=tuple(gluings),
        cone_points=tuple(cone_points),
        area=sum(p.area() for p in polygons),
        euler_characteristic=chi,
        name=spec.name,
        tol=tol,
        edge_maps=edge_maps,
        corner_index=corner_index,
    )
    if chi > -2:
        raise GenusTooSmall(f"Euler characteristic {chi} > -2 (genus {(2 - chi) / 2:g})")
    residual = gauss_bonnet_check(surface)
    if residual > tol.eps_angle * max(len(cone_points), 1) + 1e-12 * len(cone_points):
        raise ConeAngleNotMultipleOfPi(f"Gauss-Bonnet residual {residual!r}")
    return surface


def gauss_bonnet_check(surface: FlatSurface) -> float:
    """|2 pi chi - sum (2 pi - angle)| over all cone points."""
    curvature = sum(TWO_PI - c.angle for c in surface.cone_points)
    return abs(TWO_PI * surface.euler_characteristic - curvature)


def flat_angle(
    surface: FlatSurface, p: SurfacePoint, d1: DirectionAt, d2: DirectionAt, side: str = "plus"
) -> float:
    """Sector angle between two directions at ``p``.

    ``plus`` is the sector swept counterclockwise from d1 to d2, ``minus``
    the complementary one; the two always add up to the total angle at p.
    """
    if d1.base != p or d2.base != p:
        raise MismatchedBasePoint("directions are not based at p")
    total = surface.total_angle(p)
    plus = wrap(d2.angle - d1.angle, total)
    if side == "plus":
        return plus
    if side == "minus":
        return total - plus
    raise ValueError(f"side must be 'plus' or 'minus', not {side!r}")
