"""Volume entropy, Poincaré series and shadow measures from a cover patch.

Orbit points are the lifts of the base cone point, which are exactly the
patch nodes carrying the base's cone id.  The geodesic from the base to
a node is its tree path, so "y lies behind the singularity z as seen
from the base" means that z is an ancestor of y (or y itself), and
shadow weights are subtree sums.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from flatflow.cover import CoverPatch, develop_patch
from flatflow.errors import InsufficientGrowthData, OutsideCertifiedRadius
from flatflow.surface import SurfacePoint, wrap

DEFAULT_S_FACTOR = 1.05


@dataclass(frozen=True)
class OrbitCounts:
    base: SurfacePoint
    radii: tuple[float, ...]
    counts: tuple[int, ...]


@dataclass(frozen=True)
class EntropyEstimate:
    e_hat: float
    window: tuple[float, float]
    slope_half: float  # fit over [R/2, R]
    slope_quarter: float  # fit over [3R/4, R]
    gap: float  # |slope_half - slope_quarter|

    @property
    def relative_gap(self) -> float:
        return self.gap / abs(self.slope_half)


@dataclass(frozen=True)
class PoincareSeriesValue:
    s: float
    R: float
    value: float
    convergent_regime: bool  # s >= 1.05 * e_hat, so the tail is summable


@dataclass(frozen=True)
class ShadowEstimate:
    node: int
    sing_id: int
    dist: float
    nu_hat: float
    r_hat: float
    behind: int  # orbit points behind the singularity


@dataclass(frozen=True)
class ShadowSurvey:
    estimates: tuple[ShadowEstimate, ...]
    spread: float
    conformal_errors: tuple[float, ...]  # multiplicative errors of the on-geodesic check

    @property
    def all_positive(self) -> bool:
        return all(e.nu_hat > 0 for e in self.estimates)

    @property
    def conformal_median(self) -> float:
        return float(np.median(self.conformal_errors)) if self.conformal_errors else math.nan


def _check_within(patch: CoverPatch, R: float):
    if R > patch.radius + patch.surface.tol.eps_len:
        raise OutsideCertifiedRadius(f"radius {R:g} exceeds patch radius {patch.radius:g}")


def orbit_counts(patch: CoverPatch, radii) -> OrbitCounts:
    """N(R): lifted singularities at cover distance <= R from the base."""
    radii = tuple(float(r) for r in radii)
    if any(b <= a for a, b in zip(radii, radii[1:])):
        raise ValueError("radii must be increasing")
    if radii:
        _check_within(patch, radii[-1])
    d = np.sort(patch.dist[singular_mask(patch)])
    eps = patch.surface.tol.eps_len
    counts = tuple(int(np.searchsorted(d, r + eps, side="right")) for r in radii)
    return OrbitCounts(patch.base, radii, counts)


def singular_mask(patch: CoverPatch) -> np.ndarray:
    singular = np.array([c.is_singular for c in patch.surface.cone_points] + [False])
    return singular[patch.cone]  # cone id -1 (regular base) picks the trailing False


def _fit_slope(r: np.ndarray, logn: np.ndarray) -> float:
    A = np.vstack([r, np.ones_like(r)]).T
    slope, _ = np.linalg.lstsq(A, logn, rcond=None)[0]
    return float(slope)


def estimate_entropy(counts: OrbitCounts) -> EntropyEstimate:
    """Least-squares slope of log N(R) over [R/2, R], with the [3R/4, R] slope for stability."""
    r = np.array(counts.radii, dtype=float)
    n = np.array(counts.counts, dtype=float)
    good = n >= 2
    if good.sum() < 4:
        raise InsufficientGrowthData("need at least 4 radii with N >= 2")
    r, n = r[good], n[good]
    R = r[-1]
    half = r >= 0.5 * R - 1e-12
    quarter = r >= 0.75 * R - 1e-12
    if half.sum() < 2 or quarter.sum() < 2:
        raise InsufficientGrowthData("too few radii inside the fit windows")
    logn = np.log(n)
    s_half = _fit_slope(r[half], logn[half])
    s_quarter = _fit_slope(r[quarter], logn[quarter])
    if not s_half > 0:
        raise InsufficientGrowthData("orbit counts do not grow")
    return EntropyEstimate(s_half, (0.5 * R, R), s_half, s_quarter, abs(s_half - s_quarter))


def entropy_from_patch(patch: CoverPatch, n_radii: int = 24) -> EntropyEstimate:
    R = patch.radius
    radii = np.linspace(R / 4, R, n_radii)
    return estimate_entropy(orbit_counts(patch, radii))


# ---------------------------------------------------------------------------


def orbit_mask(patch: CoverPatch) -> np.ndarray:
    """Nodes that are lifts of the base point (the base must be a cone point)."""
    if not patch.base.is_cone:
        raise ValueError("orbit sums need a patch based at a cone point")
    return patch.cone == patch.base.cone


def poincare_series(patch: CoverPatch, s: float, R: float | None = None, e_hat: float | None = None) -> PoincareSeriesValue:
    """g_s(p) truncated to orbit points within R (default: the patch radius)."""
    if not s > 0:
        raise ValueError("s must be positive")
    R = patch.radius if R is None else float(R)
    _check_within(patch, R)
    d = patch.dist[orbit_mask(patch) & (patch.dist <= R + patch.surface.tol.eps_len)]
    value = math.fsum(np.exp(-s * d))
    flag = e_hat is not None and s >= DEFAULT_S_FACTOR * e_hat - 1e-12
    return PoincareSeriesValue(s, R, value, flag)


def _weights(patch: CoverPatch, s: float, R: float) -> np.ndarray:
    mask = orbit_mask(patch) & (patch.dist <= R + patch.surface.tol.eps_len)
    return np.where(mask, np.exp(-s * patch.dist), 0.0)


def subtree_sums(patch: CoverPatch, w: np.ndarray) -> np.ndarray:
    """Sum of w over each node's subtree (deepest level first)."""
    acc = np.array(w, copy=True)
    depth = patch.depth
    order = np.argsort(depth, kind="stable")
    bounds = np.searchsorted(depth[order], np.arange(depth.max() + 2))
    for d in range(int(depth.max()), 0, -1):
        idx = order[bounds[d] : bounds[d + 1]]
        np.add.at(acc, patch.parent[idx], acc[idx])
    return acc


def _subtree_counts(patch: CoverPatch, mask: np.ndarray) -> np.ndarray:
    return subtree_sums(patch, mask.astype(np.int64))


def shadow_measure(patch: CoverPatch, node: int, s: float, R: float | None = None, e_hat: float | None = None) -> ShadowEstimate:
    """nu_hat of the shadow of a lifted singularity, and r_hat = nu_hat * exp(e_hat * d)."""
    R = patch.radius if R is None else float(R)
    _check_within(patch, R)
    if patch.dist[node] > R:
        raise OutsideCertifiedRadius("singularity outside the truncation radius")
    w = _weights(patch, s, R)
    g = math.fsum(w)
    sums = subtree_sums(patch, w)
    cnt = _subtree_counts(patch, w > 0)
    e = s / DEFAULT_S_FACTOR if e_hat is None else e_hat
    nu = float(sums[node] / g)
    return ShadowEstimate(
        int(node), int(patch.cone[node]), float(patch.dist[node]), nu,
        nu * math.exp(e * float(patch.dist[node])), int(cnt[node]),
    )


def _node_in(patch_y: CoverPatch, patch_x: CoverPatch, chain: list[int]) -> int | None:
    """Follow the x-tree path chain[0] -> ... -> chain[-1] inside the tree rooted at chain[0]."""
    surface = patch_x.surface
    children = _children_index(patch_y)
    node = 0
    for k in chain[1:]:
        th = surface.cone_points[int(patch_x.cone[int(patch_x.parent[k])])].angle
        step = float(patch_x.dist[k] - patch_x.dist[patch_x.parent[k]])
        want = float(patch_x.dep[k])
        nxt = None
        for c in children.get(node, ()):
            dd = abs(wrap(float(patch_y.dep[c]) - want + 0.5 * th, th) - 0.5 * th)
            if dd < 1e-7 and abs(float(patch_y.dist[c] - patch_y.dist[node]) - step) < 1e-7:
                nxt = c
                break
        if nxt is None:
            return None
        node = nxt
    return node


def _children_index(patch: CoverPatch) -> dict:
    out: dict = {}
    for i in range(1, len(patch)):
        out.setdefault(int(patch.parent[i]), []).append(i)
    return out


def shadow_ratio_survey(
    patch: CoverPatch,
    s: float,
    R: float | None = None,
    e_hat: float | None = None,
    *,
    n_conformal: int = 50,
    seed: int = 0,
) -> ShadowSurvey:
    """r_hat for every lifted singularity with distance in [R/3, 2R/3].

    The conformal check picks chains base -> y -> z with y a singular
    vertex on the geodesic to z and compares nu_hat_x(sh z) / nu_hat_y(sh z)
    with exp(-e_hat d(x, y)); nu_hat_y comes from a separate patch rooted
    at y with the same truncation radius.
    """
    R = patch.radius if R is None else float(R)
    _check_within(patch, R)
    e = s / DEFAULT_S_FACTOR if e_hat is None else e_hat
    w = _weights(patch, s, R)
    g = math.fsum(w)
    sums = subtree_sums(patch, w)
    cnt = _subtree_counts(patch, w > 0)
    sing = singular_mask(patch)
    annulus = np.nonzero(sing & (patch.dist >= R / 3) & (patch.dist <= 2 * R / 3))[0]
    ests = []
    for i in annulus:
        nu = float(sums[i] / g)
        ests.append(ShadowEstimate(int(i), int(patch.cone[i]), float(patch.dist[i]), nu,
                                   nu * math.exp(e * float(patch.dist[i])), int(cnt[i])))
    pos = [x.r_hat for x in ests if x.nu_hat > 0]
    spread = max(pos) / min(pos) if pos else math.inf
    errors = _conformal_check(patch, s, R, e, sums, g, annulus, n_conformal, seed)
    return ShadowSurvey(tuple(ests), spread, tuple(errors))


def _conformal_check(patch, s, R, e, sums, g, annulus, n, seed):
    if n <= 0 or len(annulus) == 0:
        return []
    rng = np.random.default_rng(seed)
    cands = [int(i) for i in annulus if patch.depth[i] >= 2]
    if not cands:
        return []
    picks = rng.choice(len(cands), size=min(n, len(cands)), replace=False)
    errors = []
    cache: dict = {}
    for p in sorted(int(k) for k in picks):
        z = cands[p]
        anc = patch.ancestors(z)  # z ... root
        # y: a singular vertex strictly between the base and z
        inner = anc[1:-1]
        y = inner[int(rng.integers(len(inner)))]
        chain = list(reversed(anc[: anc.index(y) + 1]))  # y ... z
        cone_y = int(patch.cone[y])
        if cone_y not in cache:
            if patch.base.is_cone and patch.base.cone == cone_y and patch.radius >= R:
                cache[cone_y] = patch  # same cone point: same tree up to a deck transformation
            else:
                cache[cone_y] = develop_patch(patch.surface, SurfacePoint.at_cone(cone_y), R)
        py = cache[cone_y]
        zy = _node_in(py, patch, chain)
        if zy is None:
            continue
        # orbit of the original base point, seen from y
        mask = (py.cone == patch.base.cone) & (py.dist <= R + patch.surface.tol.eps_len)
        wy = np.where(mask, np.exp(-s * py.dist), 0.0)
        sy = subtree_sums(py, wy)
        nu_x = float(sums[z] / g)
        nu_y = float(sy[zy] / g)
        if nu_x <= 0 or nu_y <= 0:
            continue
        ratio = nu_x / nu_y
        predicted = math.exp(-e * float(patch.dist[y]))
        errors.append(max(ratio / predicted, predicted / ratio))
    return errors
