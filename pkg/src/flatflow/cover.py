"""Finite patches of the universal cover.

A :class:`CoverPatch` is the tree of geodesics from a base point.  Every
lifted singularity within the patch radius is a node, reached from its
parent by a straight segment; the children of a node are the
singularities visible from it inside the sector of directions that turn
by at least pi on both sides.  Since geodesics from the base are unique
and turn only at singularities, each lifted singularity appears exactly
once, its node distance is its cover distance to the base, and the
patch covers the whole metric ball of the given radius.

Other points of the cover are addressed as :class:`Lift` objects: a
node plus a planar offset inside that node's sector.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from flatflow.errors import OutsideCertifiedRadius, PatchBudgetExceeded
from flatflow.paths import GeodesicPath, Segment, tighten
from flatflow.surface import FlatSurface, SurfacePoint, wrap
from flatflow.unfold import Cell, develop_window

DEFAULT_MAX_NODES = 400_000


@dataclass(frozen=True)
class Lift:
    """A point of the cover: ``offset`` from patch node ``node``."""

    node: int
    x: float
    y: float
    point: SurfacePoint
    dep: float = 0.0  # parameter at the node of the direction to the point
    back: float = 0.0  # parameter at the point of the direction to the node
    dist: float = 0.0  # cover distance to the patch base

    @property
    def offset(self) -> float:
        return math.hypot(self.x, self.y)


@dataclass
class CoverPatch:
    surface: FlatSurface
    base: SurfacePoint
    radius: float
    cone: np.ndarray  # cone id per node (-1 for a regular base)
    parent: np.ndarray
    dist: np.ndarray
    arr: np.ndarray  # parameter at the node pointing to its parent
    dep: np.ndarray  # parameter at the parent pointing to the node
    depth: np.ndarray
    cells: list = field(default_factory=list)  # (node, Cell)
    lifts: dict = field(default_factory=dict)  # target key -> list[Lift]

    def __len__(self) -> int:
        return len(self.cone)

    @property
    def n_singular(self) -> int:
        return int(np.count_nonzero(self.cone >= 0))

    def node_point(self, i: int) -> SurfacePoint:
        return self.base if i == 0 else SurfacePoint.at_cone(int(self.cone[i]))

    def node_lift(self, i: int) -> Lift:
        return Lift(i, 0.0, 0.0, self.node_point(i), dist=float(self.dist[i]))

    def ancestors(self, i: int) -> list[int]:
        """Node ids from i up to the root, inclusive."""
        out = [i]
        while i != 0:
            i = int(self.parent[i])
            out.append(i)
        return out

    def path_to_root(self, i: int) -> GeodesicPath:
        """The geodesic from node i back to the base."""
        chain = self.ancestors(i)
        verts = tuple(self.node_point(k) for k in chain)
        segs = []
        for k in chain[:-1]:
            p = int(self.parent[k])
            segs.append(Segment(float(self.arr[k]), float(self.dep[k]), float(self.dist[k] - self.dist[p])))
        return GeodesicPath(verts, tuple(segs))

    def children(self) -> list[list[int]]:
        out = [[] for _ in range(len(self))]
        for i in range(1, len(self)):
            out[int(self.parent[i])].append(i)
        return out

    def subtree_sizes(self) -> np.ndarray:
        # parents always precede children in node order
        size = np.ones(len(self), dtype=np.int64)
        for i in range(len(self) - 1, 0, -1):
            size[self.parent[i]] += size[i]
        return size


def develop_patch(
    surface: FlatSurface,
    base: SurfacePoint,
    R: float,
    *,
    max_nodes: int = DEFAULT_MAX_NODES,
    keep_cells: bool = False,
    targets: list[SurfacePoint] | None = None,
) -> CoverPatch:
    """Geodesic tree of all lifted singularities within cover distance R.

    ``targets`` lists regular surface points whose lifts inside the ball
    are located while unfolding (see :attr:`CoverPatch.lifts`).
    R = 0 gives the single-node patch.
    """
    if R < 0:
        raise ValueError("radius must be non-negative")
    if not base.is_cone and not surface.polygons[base.polygon].contains(base.x, base.y):
        raise ValueError("base point is outside its polygon")
    tg = None
    if targets:
        tg = {}
        for key, p in enumerate(targets):
            if p.is_cone:
                raise ValueError("targets must be regular points")
            tg.setdefault(p.polygon, []).append((key, p.x, p.y))
    cone = [base.cone if base.is_cone else -1]
    parent = [0]
    dist = [0.0]
    arr = [0.0]
    dep = [0.0]
    depth = [0]
    cells: list = []
    lifts: dict = {}
    eps = surface.tol.eps_len

    def expand(i: int, src: SurfacePoint, lo: float, hi: float, closed: bool):
        rem = R - dist[i]
        cl = [] if keep_cells else None
        located = [] if tg else None
        hits = develop_window(
            surface, src, lo, hi, rem,
            include_lo=closed, include_hi=closed and hi - lo < surface.total_angle(src) - 1e-12,
            cells=cl, targets=tg, located=located,
        )
        for h in hits:
            if h.length <= eps:
                continue
            cone.append(h.cone)
            parent.append(i)
            dist.append(dist[i] + h.length)
            arr.append(h.arr)
            dep.append(h.dep)
            depth.append(depth[i] + 1)
            if len(cone) > max_nodes:
                raise PatchBudgetExceeded(
                    f"more than {max_nodes} lifted singularities within radius {R:g}"
                )
        if cl:
            cells.extend((i, c) for c in cl)
        if located:
            for key, x, y, d, rho in located:
                p = targets[key]
                back = wrap(math.atan2(-rho * y, -rho * x))
                lifts.setdefault(key, []).append(
                    Lift(i, x, y, p, d, back, dist[i] + math.hypot(x, y))
                )

    if R > 0:
        theta = surface.total_angle(base)
        expand(0, base, 0.0, theta, True)
        k = 1
        while k < len(cone):
            if dist[k] < R - eps:
                c = cone[k]
                th = surface.cone_points[c].angle
                a = arr[k]
                expand(k, SurfacePoint.at_cone(c), a + math.pi, a + th - math.pi, True)
            k += 1
    patch = CoverPatch(
        surface=surface,
        base=base,
        radius=float(R),
        cone=np.array(cone, dtype=np.int64),
        parent=np.array(parent, dtype=np.int64),
        dist=np.array(dist),
        arr=np.array(arr),
        dep=np.array(dep),
        depth=np.array(depth, dtype=np.int64),
        cells=cells,
        lifts=lifts,
    )
    for v in patch.lifts.values():
        v.sort(key=lambda lf: (lf.dist, lf.node, lf.x, lf.y))
    return patch


# ---------------------------------------------------------------------------


def _lift_to_root(patch: CoverPatch, p: Lift) -> GeodesicPath:
    """Path from lift p to the patch base through the tree."""
    up = patch.path_to_root(p.node)
    if p.offset <= patch.surface.tol.eps_len:
        return up
    first = GeodesicPath((p.point, patch.node_point(p.node)), (Segment(p.back, p.dep, p.offset),))
    return first.concat(up) if len(up.segments) else first


def _check_radius(patch: CoverPatch, *pts: Lift):
    for p in pts:
        if p.dist > patch.radius + patch.surface.tol.eps_len:
            raise OutsideCertifiedRadius(
                f"point at distance {p.dist:.6g} outside patch radius {patch.radius:.6g}"
            )


def as_lift(patch: CoverPatch, p) -> Lift:
    return patch.node_lift(int(p)) if isinstance(p, (int, np.integer)) else p


def distance_and_path(patch: CoverPatch, p, q) -> GeodesicPath:
    """The geodesic from p to q in the cover (nodes or :class:`Lift` objects)."""
    p, q = as_lift(patch, p), as_lift(patch, q)
    _check_radius(patch, p, q)
    if p.node == q.node and p.offset <= patch.surface.tol.eps_len and q.offset <= patch.surface.tol.eps_len:
        return GeodesicPath.point(p.point)
    a = _lift_to_root(patch, p)
    b = _lift_to_root(patch, q)
    # strip the shared tail above the lowest common ancestor
    anc_p = patch.ancestors(p.node)
    anc_q = patch.ancestors(q.node)
    common = 0
    while common < min(len(anc_p), len(anc_q)) and anc_p[-1 - common] == anc_q[-1 - common]:
        common += 1
    drop = common - 1  # keep the common ancestor itself
    if drop > 0:
        a = a.subpath(0, len(a.vertices) - 1 - drop)
        b = b.subpath(0, len(b.vertices) - 1 - drop)
    return tighten(patch.surface, a.concat(b.reversed()))


def visible_segment(patch: CoverPatch, p, q) -> GeodesicPath | None:
    """The single straight segment from p to q, if nothing blocks it."""
    g = distance_and_path(patch, p, q)
    return g if len(g.segments) <= 1 else None


# ---------------------------------------------------------------------------
# diameter


def grid_points(surface: FlatSurface, spacing: float) -> list[SurfacePoint]:
    """Regular points on a square grid of the given spacing, strictly inside polygons."""
    pts = []
    for poly in surface.polygons:
        xs = [v[0] for v in poly.vertices]
        ys = [v[1] for v in poly.vertices]
        x0, y0 = min(xs), min(ys)
        nx = int(math.ceil((max(xs) - x0) / spacing))
        ny = int(math.ceil((max(ys) - y0) / spacing))
        for i in range(nx):
            for j in range(ny):
                x, y = x0 + (i + 0.5) * spacing, y0 + (j + 0.5) * spacing
                if poly.contains(x, y, eps=-1e-6):
                    pts.append(SurfacePoint(poly.id, x, y))
    return pts


def eccentricity(surface: FlatSurface, base: SurfacePoint, targets: list[SurfacePoint]) -> float:
    """max over targets of the surface distance from base."""
    r = max(p.diameter() for p in surface.polygons)
    while True:
        patch = develop_patch(surface, base, r, targets=targets)
        if all(k in patch.lifts for k in range(len(targets))):
            return max(patch.lifts[k][0].dist for k in range(len(targets)))
        r *= 1.5


@lru_cache(maxsize=16)
def surface_diameter(surface: FlatSurface, spacing: float = 0.25) -> float:
    """Diameter of S, estimated over grid points and cone points.

    The estimate is a lower bound that is within about one grid spacing
    of the true value.
    """
    pts = grid_points(surface, spacing)
    bases = [SurfacePoint.at_cone(c.id) for c in surface.cone_points] + pts
    return max(eccentricity(surface, b, pts) for b in bases)
