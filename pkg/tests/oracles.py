"""Independent reference computations used by the test suite.

Nothing here imports the unfolding, cover or path machinery of the
package: the oracles read raw polygon vertices and edge gluings only.

* :func:`brute_saddle_holonomies` -- corridor unfolding for translation
  surfaces with all-singular vertices, using exact cross products and
  wedge splitting (no angles, no direction parameters).
* :func:`l3_unoriented_count` -- the arithmetic count for the three-square
  L origami, whose four-corner vertex classes collapse to one 6pi point:
  every lattice point is singular, so saddle connections are exactly the
  primitive integer vectors, once per prong (3 prongs).
* :func:`cone_distance` / :func:`perturbed_lengths` -- exact local cone
  metric used to compare a geodesic with perturbed polylines.
"""

from __future__ import annotations

import math
from collections import Counter

import numpy as np


def cross(ax, ay, bx, by):
    return ax * by - ay * bx


# ---------------------------------------------------------------------------
# vertex classes from the gluings


def corner_cycles(surface):
    """Corner cycles and total angles, computed from the gluings alone.

    The corner (P, k) spans ccw from edge k to edge k-1; crossing edge
    k-1 into (Q, j) continues the cycle at the corner (Q, j).
    """
    partner = {}
    for g in surface.gluings:
        if g.kind != "translation":
            raise NotImplementedError("oracle handles translation gluings only")
        partner[g.side_a] = g.side_b
        partner[g.side_b] = g.side_a
    seen = {}
    cycles = []
    for p in surface.polygons:
        for k in range(len(p.vertices)):
            if (p.id, k) in seen:
                continue
            cyc, total = [], 0.0
            cur = (p.id, k)
            while cur not in seen:
                seen[cur] = len(cycles)
                cyc.append(cur)
                total += _corner_angle(surface.polygons[cur[0]].vertices, cur[1])
                P, kk = cur
                n = len(surface.polygons[P].vertices)
                cur = partner[(P, (kk - 1) % n)]
            cycles.append((tuple(cyc), total))
    return cycles, seen


def _corner_angle(verts, k):
    n = len(verts)
    x0, y0 = verts[k]
    ax, ay = verts[(k + 1) % n][0] - x0, verts[(k + 1) % n][1] - y0
    bx, by = verts[k - 1][0] - x0, verts[k - 1][1] - y0
    return math.atan2(cross(ax, ay, bx, by), ax * bx + ay * by)


# ---------------------------------------------------------------------------
# brute-force saddle connections


def brute_saddle_holonomies(surface, L, eps=1e-9):
    """Counter of oriented saddle-connection holonomies (rounded to 1e-9).

    Each singular corner is unfolded edge by edge, keeping the open wedge
    (A, B) of directions still visible.  A developed vertex strictly
    inside the wedge is a hit; the polygon edges leaving a corner count as
    the ccw-first boundary ray of that corner.
    """
    cycles, which = corner_cycles(surface)
    singular = {c for c, (_, tot) in enumerate(cycles) if tot > 2 * math.pi + 1e-6}
    if len(singular) != len(cycles):
        raise NotImplementedError("oracle assumes every vertex is singular")
    partner = {}
    for g in surface.gluings:
        partner[g.side_a] = g.side_b
        partner[g.side_b] = g.side_a
    polys = {p.id: p.vertices for p in surface.polygons}
    out = Counter()

    def key(x, y):
        return (round(x, 9) + 0.0, round(y, 9) + 0.0)

    for P, verts in polys.items():
        n = len(verts)
        for k in range(n):
            ox, oy = verts[k]
            # edge k itself (ccw-first boundary of this corner)
            ex, ey = verts[(k + 1) % n][0] - ox, verts[(k + 1) % n][1] - oy
            if math.hypot(ex, ey) <= L + eps:
                out[key(ex, ey)] += 1
            A = (ex, ey)
            B = (verts[k - 1][0] - ox, verts[k - 1][1] - oy)
            # developed polygon P sits at offset -origin
            stack = [(P, -ox, -oy, None, A, B, k)]
            while stack:
                Q, tx, ty, entry, A, B, skip = stack.pop()
                vq = polys[Q]
                m = len(vq)
                pts = [(x + tx, y + ty) for x, y in vq]
                for i, (x, y) in enumerate(pts):
                    if i == skip or (entry is not None and i in (entry, (entry + 1) % m)):
                        continue
                    if cross(*A, x, y) > eps * math.hypot(x, y) and cross(x, y, *B) > eps * math.hypot(x, y):
                        if math.hypot(x, y) <= L + eps:
                            out[key(x, y)] += 1
                for e in range(m):
                    if e == entry or (skip is not None and skip in (e, (e + 1) % m)):
                        continue
                    p1, p2 = pts[e], pts[(e + 1) % m]
                    if _seg_dist(p1, p2) > L + eps:
                        continue
                    # the origin lies on the interior (left) side of the exit edge,
                    # so p1 is its clockwise end
                    U, V = p1, p2
                    if cross(*U, *V) <= 0:
                        continue
                    lo = U if cross(*A, *U) > 0 else A
                    hi = V if cross(*V, *B) > 0 else B
                    if cross(*lo, *hi) <= eps * math.hypot(*lo) * math.hypot(*hi):
                        continue
                    R2, f = partner[(Q, e)]
                    w = polys[R2]
                    # edge e of Q (p1 -> p2) is edge f of R2 reversed
                    sx, sy = w[(f + 1) % len(w)]
                    nx, ny = p1[0] - sx, p1[1] - sy
                    stack.append((R2, nx, ny, f, lo, hi, None))
    return out


def _seg_dist(p, q):
    px, py = p
    dx, dy = q[0] - px, q[1] - py
    dd = dx * dx + dy * dy
    t = 0.0 if dd == 0 else max(0.0, min(1.0, -(px * dx + py * dy) / dd))
    return math.hypot(px + t * dx, py + t * dy)


def l3_unoriented_count(L):
    """Unoriented saddle connections of length <= L on the L origami."""
    n = 0
    r = int(math.floor(L))
    for a in range(-r, r + 1):
        for b in range(-r, r + 1):
            if (a, b) != (0, 0) and math.gcd(a, b) == 1 and a * a + b * b <= L * L + 1e-9:
                n += 1
    return 3 * n // 2


# ---------------------------------------------------------------------------
# perturbed polylines


def cone_distance(r1, a1, r2, a2, theta):
    """Distance between polar points (r, angle) on a Euclidean cone of angle theta >= 2pi.

    Works elementwise on numpy arrays.
    """
    d = np.abs(np.asarray(a1) - a2) % theta
    d = np.minimum(d, theta - d)
    chord = np.sqrt(np.maximum(0.0, r1 * r1 + r2 * r2 - 2 * r1 * r2 * np.cos(d)))
    return np.where(d >= math.pi, r1 + r2, chord)


def perturbed_lengths(turns, seg_lengths, rng, n, scale):
    """Lengths of n random polylines near a path.

    ``turns`` lists (cone_angle, arr, dep) for each interior vertex of the
    path, where arr points back along the incoming segment and dep along
    the outgoing one (both as polar angles of the local cone).  Even
    polylines replace each interior vertex by a random point of its cone
    within ``scale``; odd ones (and all of them on a one-segment path)
    move one random segment midpoint sideways.  The cone balls of radius
    ``scale`` must not contain other singularities.
    """
    seg = np.asarray(seg_lengths, dtype=float)
    total = np.full(n, math.fsum(seg_lengths))
    vertex_move = (np.arange(n) % 2 == 0) if turns else np.zeros(n, dtype=bool)
    nv = int(vertex_move.sum())
    for j, (theta, arr, dep) in enumerate(turns):
        a = rng.uniform(0.05, 0.4, nv) * min(scale, seg[j])
        b = rng.uniform(0.05, 0.4, nv) * min(scale, seg[j + 1])
        rho = rng.uniform(0.0, 0.4, nv) * scale
        psi = rng.uniform(0.0, theta, nv)
        total[vertex_move] += cone_distance(a, arr, rho, psi, theta) + cone_distance(rho, psi, b, dep, theta) - a - b
    nm = n - nv
    if len(seg) and nm:
        ls = seg[rng.integers(len(seg), size=nm)]
        u = rng.uniform(0.2, 0.8, nm)
        dlt = rng.uniform(-0.3, 0.3, nm) * np.minimum(scale, ls)
        total[~vertex_move] += np.hypot(u * ls, dlt) + np.hypot((1 - u) * ls, dlt) - ls
    return total
