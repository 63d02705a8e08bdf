"""Monte Carlo experiments with typical geodesics.

A typical geodesic is approximated by the geodesic between two far
orbit points drawn independently from the discrete measure
``exp(-s d(x, y))`` restricted to the annulus [0.8 R, R] around the
patch base, with 10% trimmed off each end.  Passage frequencies of
saddle-connection arcs are then compared with ``exp(-e l(c_ext))``.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy import stats

from flatflow.cover import CoverPatch, distance_and_path
from flatflow.errors import (
    DegenerateRejectionLoop,
    EmptyExperiment,
    NotLocalGeodesic,
    TooFewArcs,
    TooFewSamples,
)
from flatflow.geodesics import unique_extension
from flatflow.paths import GeodesicPath
from flatflow.surface import FlatSurface, wrap

MAX_REJECTIONS = 1000
N_BATCHES = 10


@dataclass(frozen=True)
class SamplingConfig:
    annulus: tuple[float, float] = (0.8, 1.0)  # fractions of R
    trim: float = 0.1  # fraction removed at each end
    gromov_max: float = 0.25  # reject when (y.z)_x exceeds this fraction of R
    max_rejections: int = MAX_REJECTIONS


@dataclass(frozen=True)
class GeodesicSample:
    path: GeodesicPath  # the full geodesic [y, z]
    trim_lo: float  # arc-length window kept
    trim_hi: float
    passages: tuple[tuple[int, float], ...]  # (cone id, position) inside the window
    excess_left: float  # sum of (angle - pi) over passages, per side
    excess_right: float
    endpoints: tuple[int, int] = (0, 0)  # patch nodes y, z
    rejections: int = 0

    @property
    def trimmed_length(self) -> float:
        return self.trim_hi - self.trim_lo


def _annulus_sampler(patch: CoverPatch, s: float, R: float, cfg: SamplingConfig):
    if not patch.base.is_cone:
        raise ValueError("sampling needs a patch based at a cone point")
    lo, hi = cfg.annulus[0] * R, cfg.annulus[1] * R
    eps = patch.surface.tol.eps_len
    idx = np.nonzero((patch.cone == patch.base.cone) & (patch.dist >= lo - eps) & (patch.dist <= hi + eps))[0]
    if len(idx) == 0:
        raise EmptyExperiment(f"no orbit points in the annulus [{lo:g}, {hi:g}]")
    w = np.exp(-s * (patch.dist[idx] - lo))
    cdf = np.cumsum(w)
    cdf /= cdf[-1]
    return idx, cdf


def _draw(rng: np.random.Generator, idx: np.ndarray, cdf: np.ndarray) -> int:
    return int(idx[min(int(np.searchsorted(cdf, rng.random(), side="right")), len(idx) - 1)])


def _trim(surface: FlatSurface, path: GeodesicPath, lo: float, hi: float):
    pos = path.positions()
    eps = surface.tol.eps_len
    passages = []
    left = right = 0.0
    turns = path.turns(surface)
    for i in range(1, len(path.vertices) - 1):
        if lo - eps <= pos[i] <= hi + eps:
            v = path.vertices[i]
            passages.append((int(v.cone) if v.is_cone else -1, pos[i]))
            a, b = turns[i - 1]
            left += a - math.pi
            right += b - math.pi
    return tuple(passages), left, right


def sample_typical_geodesic(
    patch: CoverPatch,
    s: float,
    R: float | None = None,
    seed: int | np.random.SeedSequence = 0,
    cfg: SamplingConfig = SamplingConfig(),
    _sampler=None,
) -> GeodesicSample:
    """One trimmed geodesic between two sampled far orbit points."""
    R = patch.radius if R is None else float(R)
    if R > patch.radius + patch.surface.tol.eps_len:
        raise ValueError("sampling radius exceeds the patch radius")
    rng = np.random.default_rng(seed)
    idx, cdf = _sampler if _sampler is not None else _annulus_sampler(patch, s, R, cfg)
    for rej in range(cfg.max_rejections + 1):
        y = _draw(rng, idx, cdf)
        z = _draw(rng, idx, cdf)
        if y == z:
            continue
        g = distance_and_path(patch, y, z)
        L = g.length
        gromov = 0.5 * (patch.dist[y] + patch.dist[z] - L)
        if gromov > cfg.gromov_max * R or L <= 0:
            continue
        lo, hi = cfg.trim * L, (1.0 - cfg.trim) * L
        passages, el, er = _trim(patch.surface, g, lo, hi)
        return GeodesicSample(g, lo, hi, passages, el, er, (y, z), rej)
    raise DegenerateRejectionLoop(f"{cfg.max_rejections} consecutive rejections")


def sample_seeds(seed: int, n: int) -> list[np.random.SeedSequence]:
    """Per-sample streams: sample i uses SeedSequence([seed, i])."""
    return [np.random.SeedSequence([seed, i]) for i in range(n)]


def sample_many(
    patch: CoverPatch,
    s: float,
    R: float,
    n: int,
    seed: int,
    cfg: SamplingConfig = SamplingConfig(),
    workers: int = 1,
) -> list[GeodesicSample]:
    """n samples; the result does not depend on the number of workers."""
    sampler = _annulus_sampler(patch, s, R, cfg)

    def one(ss):
        return sample_typical_geodesic(patch, s, R, ss, cfg, sampler)

    seeds = sample_seeds(seed, n)
    if workers <= 1:
        return [one(ss) for ss in seeds]
    with ThreadPoolExecutor(max_workers=workers) as ex:
        return list(ex.map(one, seeds))


# ---------------------------------------------------------------------------


def _arc_signature(surface: FlatSurface, c: GeodesicPath):
    cones = tuple(v.cone for v in c.vertices)
    segs = tuple((s.dep, s.arr, s.length) for s in c.segments)
    return cones, segs


def _match_at(surface, path, i, cones, segs, eps_len, eps_ang):
    k = len(segs)
    for j in range(k + 1):
        v = path.vertices[i + j]
        if not v.is_cone or v.cone != cones[j]:
            return False
    for j in range(k):
        s = path.segments[i + j]
        dep, arr, length = segs[j]
        if abs(s.length - length) > eps_len:
            return False
        th0 = surface.cone_points[cones[j]].angle
        th1 = surface.cone_points[cones[j + 1]].angle
        if abs(wrap(s.dep - dep + 0.5 * th0, th0) - 0.5 * th0) > eps_ang:
            return False
        if abs(wrap(s.arr - arr + 0.5 * th1, th1) - 0.5 * th1) > eps_ang:
            return False
    return True


def count_passages(surface: FlatSurface, sample: GeodesicSample, c: GeodesicPath) -> int:
    """Occurrences of c (either orientation) as a sub-path of the trimmed sample."""
    if not c.segments or not (c.start.is_cone and c.end.is_cone):
        raise NotLocalGeodesic("arcs must start and end at singularities")
    path = sample.path
    k = len(c.segments)
    if k > len(path.segments):
        return 0
    pos = path.positions()
    eps_len = 1e3 * surface.tol.eps_len
    eps_ang = 1e-7
    fwd = _arc_signature(surface, c)
    bwd = _arc_signature(surface, c.reversed())
    count = 0
    for i in range(len(path.segments) - k + 1):
        if pos[i] < sample.trim_lo - surface.tol.eps_len or pos[i + k] > sample.trim_hi + surface.tol.eps_len:
            continue
        if _match_at(surface, path, i, *fwd, eps_len, eps_ang) or _match_at(surface, path, i, *bwd, eps_len, eps_ang):
            count += 1
    return count


# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ArcFrequency:
    arc_id: int
    length: float
    ext_length: float
    capped: bool
    passes: int
    total_length: float
    lambda_hat: float
    ci_half: float


@dataclass(frozen=True)
class FrequencyReport:
    arcs: tuple[ArcFrequency, ...]
    n_samples: int
    seed: int
    R: float
    s: float
    batch_passes: tuple = field(default=(), repr=False)  # per arc, per batch
    batch_lengths: tuple = field(default=(), repr=False)


def _batch_ci(passes: np.ndarray, lengths: np.ndarray) -> float:
    """Half-width of the 95% batch-means interval for passes / length."""
    ok = lengths > 0
    lam = passes[ok] / lengths[ok]
    if len(lam) < 2:
        return math.nan
    tq = stats.t.ppf(0.975, len(lam) - 1)
    return float(tq * np.std(lam, ddof=1) / math.sqrt(len(lam)))


def frequency_experiment(
    surface: FlatSurface,
    patch: CoverPatch,
    arcs: list[GeodesicPath],
    n_samples: int,
    s: float,
    seed: int,
    R: float | None = None,
    *,
    cap: float | None = None,
    cfg: SamplingConfig = SamplingConfig(),
    samples: list[GeodesicSample] | None = None,
    workers: int = 1,
) -> FrequencyReport:
    """Passage frequencies of every arc over n_samples typical geodesics."""
    if n_samples <= 0:
        raise EmptyExperiment("no samples requested")
    R = patch.radius if R is None else float(R)
    if samples is None:
        samples = sample_many(patch, s, R, n_samples, seed, cfg, workers)
    ext = [unique_extension(surface, a, cap) for a in arcs]
    n_b = min(N_BATCHES, n_samples)
    batch_of = np.arange(n_samples) * n_b // n_samples
    lengths = np.array([smp.trimmed_length for smp in samples])
    blen = np.array([math.fsum(lengths[batch_of == b]) for b in range(n_b)])
    total = math.fsum(lengths)
    rows = []
    bp_all = []
    for k, (a, e) in enumerate(zip(arcs, ext)):
        per = np.array([count_passages(surface, smp, a) for smp in samples], dtype=np.int64)
        bp = np.bincount(batch_of, weights=per, minlength=n_b)
        bp_all.append(tuple(int(v) for v in bp))
        passes = int(per.sum())
        rows.append(
            ArcFrequency(
                k, a.length, e.extended.length, e.capped, passes, total,
                passes / total if total > 0 else math.nan, _batch_ci(bp, blen),
            )
        )
    return FrequencyReport(tuple(rows), n_samples, seed, R, s, tuple(bp_all), tuple(float(b) for b in blen))


# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class RegressionResult:
    slope: float
    intercept: float
    r2: float
    n_arcs: int


def log_linear_fit(x, y) -> RegressionResult:
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    A = np.vstack([x, np.ones_like(x)]).T
    (slope, intercept), *_ = np.linalg.lstsq(A, y, rcond=None)
    resid = y - (slope * x + intercept)
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    r2 = 1.0 - float(np.sum(resid**2)) / ss_tot if ss_tot > 0 else 1.0
    return RegressionResult(float(slope), float(intercept), r2, len(x))


def scaling_regression(report: FrequencyReport, e_hat: float | None = None, min_arcs: int = 30) -> RegressionResult:
    """Least squares of log lambda_hat against l(c_ext) over uncapped arcs with lambda_hat > 0."""
    use = [a for a in report.arcs if not a.capped and a.lambda_hat > 0]
    if len(use) < min_arcs:
        raise TooFewArcs(f"{len(use)} usable arcs, need {min_arcs}")
    return log_linear_fit([a.ext_length for a in use], [math.log(a.lambda_hat) for a in use])


# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class TypicalityStats:
    windows: tuple[float, ...]  # window lengths T
    avoid_fraction: tuple[float, ...]  # f(T); nan when no sample is long enough
    n_eligible: tuple[int, ...]  # samples whose trimmed part is at least T long
    excess_per_length: tuple[float, ...]  # per sample, min over the two sides
    median_excess: float
    median_ci: tuple[float, float]


def _avoids(sample: GeodesicSample, T: float) -> bool | None:
    if sample.trimmed_length < T:
        return None
    mid = 0.5 * (sample.trim_lo + sample.trim_hi)
    lo, hi = mid - 0.5 * T, mid + 0.5 * T
    return not any(lo <= p <= hi for _, p in sample.passages)


def avoidance_and_straightness_stats(
    samples: list[GeodesicSample],
    windows: tuple[float, ...],
    *,
    n_boot: int = 2000,
    seed: int = 0,
    min_samples: int = 100,
) -> TypicalityStats:
    """Singularity-avoidance fractions f(T) and turning excess per unit length."""
    if len(samples) < min_samples:
        raise TooFewSamples(f"{len(samples)} samples, need {min_samples}")
    fr, ne = [], []
    for T in windows:
        vals = [v for v in (_avoids(smp, T) for smp in samples) if v is not None]
        ne.append(len(vals))
        fr.append(sum(vals) / len(vals) if vals else math.nan)
    exc = np.array([min(smp.excess_left, smp.excess_right) / smp.trimmed_length for smp in samples])
    rng = np.random.default_rng(seed)
    boots = np.median(rng.choice(exc, size=(n_boot, len(exc)), replace=True), axis=1)
    lo, hi = np.quantile(boots, [0.025, 0.975])
    return TypicalityStats(
        tuple(float(t) for t in windows), tuple(fr), tuple(ne), tuple(float(v) for v in exc),
        float(np.median(exc)), (float(lo), float(hi)),
    )
