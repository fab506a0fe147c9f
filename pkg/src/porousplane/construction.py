"""Finite-depth construction of the removed sets H_1 ⊂ H_2 ⊂ ... inside a window.

Level ``n`` uses the lines in direction ``v_n`` at offsets ``k * 2**(-6n)``.
The part of those lines at distance at least ``2**(-6n)`` from ``H_{n-1}`` is
a finite union of segments inside the (padded) window, and fattening those
segments by ``2**(-6(n+1))`` gives level ``n`` of ``H`` exactly as capsules.

Each level is stored as parallel arrays sorted by (line index k, parameter lo);
that ordering doubles as the spatial index: a query point maps to a line index
by its offset coordinate and to a segment by bisection along the line.
"""

from __future__ import annotations

import bisect
import enum
import math
from dataclasses import dataclass, field
from typing import Iterable, Optional

import numpy as np

from .directions import DirectionSchedule, ExplicitSchedule, Schedule, schedule_from_params
from .geom import TAU, Capsule, Direction, Line, Point, Segment, line_capsule_intervals, segment_distances

N_MAX = 4
LINE_CAP = 2**20
SEGMENT_CAP = 2**22
MIN_PIECE = 1e-15
FORMAT_VERSION = 1


def spacing(n: int) -> float:
    """Distance between neighbouring level-n lines, 2**(-6n)."""
    return 2.0 ** (-6 * n)


def radius(n: int) -> float:
    """Capsule radius at level n, 2**(-6(n+1))."""
    return 2.0 ** (-6 * (n + 1))


class BudgetError(RuntimeError):
    pass


class DepthCapError(ValueError):
    pass


class QueryOutsideWindow(ValueError):
    pass


class Membership(enum.Enum):
    IN = "IN"
    OUT = "OUT"
    BOUNDARY = "BOUNDARY"


def classify(sd: float, tol: float = TAU) -> Membership:
    if sd < -tol:
        return Membership.IN
    if sd > tol:
        return Membership.OUT
    return Membership.BOUNDARY


@dataclass(frozen=True)
class Window:
    """Square study region ``|p - center|_inf <= half_width``.

    ``margin`` widens the region in which walks and queries may wander; the
    per-level build extents are derived from it in :meth:`level_extent`.
    With ``taper`` set, level n only gets ``min(margin, taper * 2**-6n)`` of
    room, which keeps deep levels small when only shallow walks go far.
    """

    center: Point
    half_width: float
    margin: float = 0.0
    taper: Optional[float] = None

    def __post_init__(self):
        object.__setattr__(self, "center", Point(float(self.center[0]), float(self.center[1])))
        if not self.half_width > 0.0:
            raise ValueError("half_width must be positive")
        if self.margin < 0.0:
            raise ValueError("margin must be non-negative")
        if self.taper is not None and not self.taper > 0.0:
            raise ValueError("taper must be positive")

    def margin_at(self, n: int) -> float:
        """Walk room around the core for level-n queries."""
        if self.taper is None:
            return self.margin
        return min(self.margin, self.taper * spacing(max(n, 1)))

    def level_extent(self, m: int, depth: int) -> float:
        """Half side of the square in which level ``m`` is built.

        Level m must be exact wherever a level >= m query can look (core plus
        margin plus walk allowance plus a distance search radius) and wherever
        level m+1 reads it during its own build.
        """
        hw = self.half_width
        ext = hw + self.margin_at(depth) + 8.0 * spacing(depth) + radius(depth)
        for j in range(depth - 1, m - 1, -1):
            ext = max(hw + self.margin_at(j) + 8.0 * spacing(j), ext + spacing(j + 1)) + radius(j)
        return ext

    def pad(self, depth: int) -> float:
        return self.level_extent(1, depth) - self.half_width

    def query_reach(self, n: int) -> float:
        """Chebyshev radius around the center in which level-n queries are exact."""
        return self.half_width + self.margin_at(n) + 4.0 * spacing(max(n, 1))

    def cheb(self, p) -> float:
        return max(abs(p[0] - self.center.x), abs(p[1] - self.center.y))

    def in_core(self, p, slack: float = 0.0) -> bool:
        return self.cheb(p) <= self.half_width - slack


@dataclass(frozen=True)
class Level:
    """Level-n segments of C_n (and their capsules), sorted by (k, lo)."""

    n: int
    direction: Direction
    k: np.ndarray
    lo: np.ndarray
    hi: np.ndarray
    k_range: tuple[int, int]
    lines_built: int = 0
    _pts: np.ndarray = field(init=False, repr=False, compare=False)
    _lo_list: list = field(init=False, repr=False, compare=False)
    _line_slices: dict = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        for name in ("k", "lo", "hi"):
            arr = np.ascontiguousarray(getattr(self, name))
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)
        d = self.direction
        nrm = d.perp
        off = self.k.astype(np.float64) * self.spacing
        pts = np.empty((len(self.k), 4))
        pts[:, 0] = self.lo * d.ux + off * nrm.ux
        pts[:, 1] = self.lo * d.uy + off * nrm.uy
        pts[:, 2] = self.hi * d.ux + off * nrm.ux
        pts[:, 3] = self.hi * d.uy + off * nrm.uy
        pts.setflags(write=False)
        object.__setattr__(self, "_pts", pts)
        object.__setattr__(self, "_lo_list", self.lo.tolist())
        slices: dict[int, tuple[int, int]] = {}
        if len(self.k):
            ks, starts, counts = np.unique(self.k, return_index=True, return_counts=True)
            for kk, s0, c in zip(ks.tolist(), starts.tolist(), counts.tolist()):
                slices[kk] = (s0, s0 + c)
        object.__setattr__(self, "_line_slices", slices)

    @property
    def spacing(self) -> float:
        return spacing(self.n)

    @property
    def radius(self) -> float:
        return radius(self.n)

    def __len__(self) -> int:
        return len(self.k)

    @property
    def ax(self):
        return self._pts[:, 0]

    @property
    def ay(self):
        return self._pts[:, 1]

    @property
    def bx(self):
        return self._pts[:, 2]

    @property
    def by(self):
        return self._pts[:, 3]

    def line(self, k: int) -> Line:
        return Line(self.direction, k * self.spacing)

    def segments(self) -> list[Segment]:
        return [Segment(Point(a, b), Point(c, d)) for a, b, c, d in self._pts.tolist()]

    def capsules(self) -> list[Capsule]:
        r = self.radius
        return [Capsule(s, r) for s in self.segments()]

    def coords(self, p) -> tuple[float, float]:
        """(along-line parameter, offset) of a point."""
        d = self.direction
        return p[0] * d.ux + p[1] * d.uy, p[0] * -d.uy + p[1] * d.ux

    def line_candidates(self, k: int, t: float) -> range:
        """Indices on line k whose segments could be nearest to parameter t."""
        sl = self._line_slices.get(k)
        if sl is None:
            return range(0)
        s0, s1 = sl
        i = bisect.bisect_right(self._lo_list, t, s0, s1) - 1
        return range(max(s0, i - 1), min(s1, i + 2))

    def axis_distances(self, p, idx) -> np.ndarray:
        pts = self._pts[idx]
        return segment_distances(p[0], p[1], pts[:, 0], pts[:, 1], pts[:, 2], pts[:, 3])

    def nearest(self, p, bound: float = math.inf, reach: float = 0.0) -> tuple[float, int]:
        """Smallest ``dist(p, axis) - reach`` on this level, searched below ``bound``.

        Returns ``(value, index)``; ``(inf, -1)`` when nothing beats ``bound``.
        Lines are visited outward from the nearest one and the walk stops once
        the line itself is too far to improve the best value.
        """
        if not len(self.k):
            return math.inf, -1
        t, u = self.coords(p)
        s = self.spacing
        kmin, kmax = self.k_range
        k0 = int(round(u / s))
        cand: list[int] = []
        best = bound
        # seed with the nearest lines so the outward walk is cut short
        for k in (k0, k0 - 1, k0 + 1):
            cand.extend(self.line_candidates(k, t))
        if cand:
            vals = self.axis_distances(p, cand) - reach
            best = min(best, float(vals.min()))
        for step in (1, -1):
            k = k0 + (2 * step if step > 0 else -2)
            while kmin <= k <= kmax:
                if abs(u - k * s) - reach >= best:
                    break
                extra = self.line_candidates(k, t)
                if extra:
                    cand.extend(extra)
                    vals = self.axis_distances(p, list(extra)) - reach
                    best = min(best, float(vals.min()))
                k += step
        if not cand:
            return math.inf, -1
        vals = self.axis_distances(p, cand) - reach
        j = int(np.argmin(vals))
        if vals[j] >= bound:
            return math.inf, -1
        # deterministic tie-break: lowest capsule index among equal values
        winners = [cand[i] for i in np.flatnonzero(vals == vals[j])]
        return float(vals[j]), min(winners)

    def near_segment(self, p0, p1, reach: float) -> list[int]:
        """Capsule indices whose axis could be within ``reach`` of segment p0-p1."""
        if not len(self.k):
            return []
        t0, u0 = self.coords(p0)
        t1, u1 = self.coords(p1)
        s = self.spacing
        kmin, kmax = self.k_range
        klo = max(kmin, math.ceil((min(u0, u1) - reach) / s))
        khi = min(kmax, math.floor((max(u0, u1) + reach) / s))
        tlo, thi = min(t0, t1) - reach, max(t0, t1) + reach
        out: list[int] = []
        for k in range(klo, khi + 1):
            sl = self._line_slices.get(k)
            if sl is None:
                continue
            s0, s1 = sl
            i = max(s0, bisect.bisect_right(self._lo_list, tlo, s0, s1) - 1)
            j = bisect.bisect_right(self._lo_list, thi, s0, s1)
            out.extend(x for x in range(i, j) if self.hi[x] >= tlo)
        return out


@dataclass(frozen=True)
class LevelSet:
    """The stack H_1 ⊂ ... ⊂ H_depth restricted to a padded window.

    Immutable once built; all queries are read-only and may be shared across
    threads.
    """

    schedule: Schedule
    window: Window
    target_depth: int
    levels: tuple[Level, ...] = ()
    n_max: int = N_MAX
    line_cap: int = LINE_CAP
    segment_cap: int = SEGMENT_CAP

    @property
    def depth(self) -> int:
        return len(self.levels)

    def level(self, m: int) -> Level:
        return self.levels[m - 1]

    def capsule_count(self, n: Optional[int] = None) -> int:
        n = self.depth if n is None else n
        return sum(len(lv) for lv in self.levels[:n])

    # ---- queries -------------------------------------------------------
    def _check(self, n: int, p) -> None:
        if not 0 <= n <= self.depth:
            raise ValueError(f"level {n} not built (depth {self.depth})")
        if not (math.isfinite(p[0]) and math.isfinite(p[1])):
            raise ValueError("non-finite query point")
        if n and self.window.cheb(p) > self.window.query_reach(n):
            raise QueryOutsideWindow(f"point {tuple(p)} outside the exact region for level {n}")

    def signed_distance(self, n: int, p) -> float:
        """min over capsules of levels <= n of dist(p, axis) - radius."""
        self._check(n, p)
        best = math.inf
        for lv in self.levels[:n]:
            val, _ = lv.nearest(p, best, lv.radius)
            best = min(best, val)
        return best

    def nearest_capsule(self, n: int, p) -> tuple[float, int, int]:
        """(signed distance, level, index) of the most-inside capsule near p."""
        self._check(n, p)
        best, where = math.inf, (0, -1)
        for lv in self.levels[:n]:
            val, i = lv.nearest(p, best, lv.radius)
            if val < best:
                best, where = val, (lv.n, i)
        return best, where[0], where[1]

    def signed_distance_exhaustive(self, n: int, p) -> float:
        """Same value as :meth:`signed_distance` but scanning every capsule."""
        self._check(n, p)
        best = math.inf
        for lv in self.levels[:n]:
            if len(lv):
                vals = segment_distances(p[0], p[1], lv.ax, lv.ay, lv.bx, lv.by) - lv.radius
                best = min(best, float(vals.min()))
        return best

    def dist_to_H(self, n: int, p) -> float:
        return max(self.signed_distance(n, p), 0.0)

    def membership(self, n: int, p) -> Membership:
        self._check(n, p)
        return classify(self._nearest_line_sd(n, p))

    def _nearest_line_sd(self, n: int, p) -> float:
        # only the nearest line of each level can come within radius + TAU
        best = math.inf
        for lv in self.levels[:n]:
            t, u = lv.coords(p)
            k0 = int(round(u / lv.spacing))
            cand = list(lv.line_candidates(k0, t))
            if cand:
                best = min(best, float((lv.axis_distances(p, cand) - lv.radius).min()))
        return best

    def membership_many(self, n: int, xs: np.ndarray, ys: np.ndarray) -> np.ndarray:
        """Vectorised tri-state membership; returns an array of Membership values."""
        sd = self.nearest_line_sd_many(n, xs, ys)
        out = np.empty(sd.shape, dtype=object)
        out[sd < -TAU] = Membership.IN
        out[sd > TAU] = Membership.OUT
        out[(sd >= -TAU) & (sd <= TAU)] = Membership.BOUNDARY
        return out

    def nearest_line_sd_many(self, n: int, xs, ys) -> np.ndarray:
        """Signed distance restricted to the nearest line of each level.

        Exact whenever the true signed distance is below half a line spacing,
        which covers every point whose membership is IN or BOUNDARY.
        """
        xs = np.asarray(xs, dtype=np.float64).ravel()
        ys = np.asarray(ys, dtype=np.float64).ravel()
        best = np.full(xs.shape, np.inf)
        for lv in self.levels[:n]:
            if not len(lv):
                continue
            d = lv.direction
            t = xs * d.ux + ys * d.uy
            u = xs * -d.uy + ys * d.ux
            k0 = np.rint(u / lv.spacing).astype(np.int64)
            # global sorted position via (k, lo) with per-line bisection
            starts = np.searchsorted(lv.k, k0, side="left")
            ends = np.searchsorted(lv.k, k0, side="right")
            has = ends > starts
            if not has.any():
                continue
            pos = np.empty_like(starts)
            for kk in np.unique(k0[has]):
                sel = np.flatnonzero(has & (k0 == kk))
                s0, s1 = int(starts[sel[0]]), int(ends[sel[0]])
                pos[sel] = s0 + np.searchsorted(lv.lo[s0:s1], t[sel], side="right") - 1
            for off in (-1, 0, 1):
                idx = pos + off
                ok = has & (idx >= starts) & (idx < ends)
                if not ok.any():
                    continue
                ii = idx[ok]
                vals = segment_distances(xs[ok], ys[ok], lv.ax[ii], lv.ay[ii], lv.bx[ii], lv.by[ii]) - lv.radius
                best[ok] = np.minimum(best[ok], vals)
        return best

    def nearest_axis(self, m: int, p, bound: float = math.inf) -> tuple[float, int]:
        """Distance from p to the nearest level-m axis (no radius), below ``bound``."""
        self._check(m, p)
        return self.level(m).nearest(p, bound, 0.0)

    def ball_certificate(self, n: int, center, r: float) -> str:
        """How ``B(center, r) ⊂ H_n`` is certified: 'single', 'sampled' or 'none'.

        'single' means one capsule contains the closed ball; 'sampled' means the
        center and 256 points of the bounding circle are all inside H_n by more
        than TAU, which is evidence rather than proof.
        """
        if r <= 0.0:
            return "none"
        for lv in self.levels[:n]:
            if lv.radius <= r:
                continue
            d, _ = self.nearest_axis(lv.n, center, lv.radius - r)
            if d + r < lv.radius:
                return "single"
        if self.signed_distance(n, center) >= -TAU:
            return "none"
        for i in range(256):
            a = 2.0 * math.pi * i / 256
            q = (center[0] + r * math.cos(a), center[1] + r * math.sin(a))
            if self.signed_distance(n, q) >= -TAU:
                return "none"
        return "sampled"

    def ball_inside_H(self, n: int, center, r: float) -> bool:
        return self.ball_certificate(n, center, r) != "none"


# ---- module-level query functions ------------------------------------------

def dist_to_H(ls: LevelSet, n: int, p) -> float:
    return ls.dist_to_H(n, p)


def membership(ls: LevelSet, n: int, p) -> Membership:
    return ls.membership(n, p)


def ball_inside_H(ls: LevelSet, n: int, center, r: float) -> bool:
    return ls.ball_inside_H(n, center, r)


# ---- building ------------------------------------------------------------

def line_family(n: int, window: Window, schedule: Schedule, depth: Optional[int] = None,
                line_cap: int = LINE_CAP, extent: Optional[float] = None) -> list[tuple[int, Line]]:
    """Level-n lines meeting the level-n build square of ``window``.

    ``extent`` overrides the half side of that square (by default it comes
    from :meth:`Window.level_extent` for a build of the given depth).
    """
    if n < 1:
        raise ValueError("levels start at 1")
    k_lo, k_hi, d = _family_range(n, window, schedule, n if depth is None else depth, extent)
    count = k_hi - k_lo + 1
    if count > line_cap:
        raise BudgetError(f"level {n} needs {count} lines (cap {line_cap})")
    s = spacing(n)
    return [(k, Line(d, k * s)) for k in range(k_lo, k_hi + 1)]


def _family_range(n: int, window: Window, schedule: Schedule, depth: int, extent: Optional[float] = None):
    d = schedule.direction_at(n)
    ext = window.level_extent(n, depth) if extent is None else extent
    c = window.center
    nx, ny = -d.uy, d.ux
    us = [(c.x + sx * ext) * nx + (c.y + sy * ext) * ny for sx in (-1, 1) for sy in (-1, 1)]
    s = spacing(n)
    return math.ceil(min(us) / s), math.floor(max(us) / s), d


def _clip_params(d: Direction, offsets: np.ndarray, window: Window, ext: float):
    """Parameter range of each line inside the square of half side ``ext``."""
    c = window.center
    nx, ny = -d.uy, d.ux
    lo = np.full(offsets.shape, -np.inf)
    hi = np.full(offsets.shape, np.inf)
    for comp_d, comp_n, cc in ((d.ux, nx, c.x), (d.uy, ny, c.y)):
        base = offsets * comp_n
        if comp_d == 0.0:
            inside = np.abs(base - cc) <= ext
            lo = np.where(inside, lo, np.nan)
            hi = np.where(inside, hi, np.nan)
        else:
            a = (cc - ext - base) / comp_d
            b = (cc + ext - base) / comp_d
            lo = np.fmax(lo, np.minimum(a, b))
            hi = np.fmin(hi, np.maximum(a, b))
    return lo, hi


def empty_levelset(window: Window, schedule: Schedule, target_depth: int, n_max: int = N_MAX,
                   line_cap: int = LINE_CAP, segment_cap: int = SEGMENT_CAP) -> LevelSet:
    if target_depth > n_max:
        raise DepthCapError(f"depth cap exceeded: {target_depth} > {n_max}")
    if target_depth < 0:
        raise ValueError("depth must be non-negative")
    return LevelSet(schedule, window, target_depth, (), n_max, line_cap, segment_cap)


def build_level(prev: LevelSet, n: int) -> LevelSet:
    """Add level n: family lines minus the open 2**(-6n) neighbourhood of H_{n-1}."""
    if n > prev.n_max:
        raise DepthCapError(f"depth cap exceeded: {n} > {prev.n_max}")
    if n != prev.depth + 1:
        raise ValueError(f"expected level {prev.depth + 1}, got {n}")
    if n > prev.target_depth:
        raise ValueError(f"level {n} beyond the planned depth {prev.target_depth}; padding was sized for it")
    window, schedule = prev.window, prev.schedule
    k_lo, k_hi, d = _family_range(n, window, schedule, prev.target_depth)
    count = k_hi - k_lo + 1
    if count > prev.line_cap:
        raise BudgetError(f"level {n} needs {count} lines (cap {prev.line_cap})")
    s = spacing(n)
    ext = window.level_extent(n, prev.target_depth)
    ks = np.arange(k_lo, k_hi + 1, dtype=np.int64)
    clip_lo, clip_hi = _clip_params(d, ks.astype(np.float64) * s, window, ext)

    # exclusion intervals: every earlier capsule inflated by the level spacing (less TAU)
    pair_k, pair_lo, pair_hi = _exclusions(prev, n, d, s, k_lo, k_hi)

    out_k: list[int] = []
    out_lo: list[float] = []
    out_hi: list[float] = []
    order = np.lexsort((pair_lo, pair_k))
    pair_k, pair_lo, pair_hi = pair_k[order], pair_lo[order], pair_hi[order]
    bounds = np.searchsorted(pair_k, ks, side="left").tolist() + [len(pair_k)]
    ends = np.searchsorted(pair_k, ks, side="right").tolist()
    plo, phi = pair_lo.tolist(), pair_hi.tolist()
    for i, k in enumerate(ks.tolist()):
        a, b = float(clip_lo[i]), float(clip_hi[i])
        if not (a < b):
            continue
        cur = a
        for j in range(bounds[i], ends[i]):
            lo, hi = plo[j], phi[j]
            if hi <= cur:
                continue
            if lo >= b:
                break
            if lo > cur and lo - cur >= MIN_PIECE:
                out_k.append(k)
                out_lo.append(cur)
                out_hi.append(lo)
            cur = max(cur, hi)
            if cur >= b:
                break
        if cur < b and b - cur >= MIN_PIECE:
            out_k.append(k)
            out_lo.append(cur)
            out_hi.append(b)
        if len(out_k) > prev.segment_cap:
            raise BudgetError(f"level {n} exceeds the segment cap {prev.segment_cap}")

    level = Level(
        n, d, np.array(out_k, dtype=np.int64), np.array(out_lo, dtype=np.float64),
        np.array(out_hi, dtype=np.float64), (k_lo, k_hi), count,
    )
    return LevelSet(schedule, window, prev.target_depth, prev.levels + (level,),
                    prev.n_max, prev.line_cap, prev.segment_cap)


def _exclusions(prev: LevelSet, n: int, d: Direction, s: float, k_lo: int, k_hi: int):
    ks, los, his = [], [], []
    nx, ny = -d.uy, d.ux
    for lv in prev.levels:
        if not len(lv):
            continue
        # shaved by TAU: a parallel line exactly s away is kept whatever the rounding
        reach = lv.radius + s - TAU
        ua = lv.ax * nx + lv.ay * ny
        ub = lv.bx * nx + lv.by * ny
        first = np.maximum(np.floor((np.minimum(ua, ub) - reach) / s).astype(np.int64), k_lo)
        last = np.minimum(np.ceil((np.maximum(ua, ub) + reach) / s).astype(np.int64), k_hi)
        counts = np.maximum(last - first + 1, 0)
        total = int(counts.sum())
        if total == 0:
            continue
        if total > 8 * prev.segment_cap:
            raise BudgetError(f"level {n} exclusion pairs exceed budget ({total})")
        cap_idx = np.repeat(np.arange(len(lv)), counts)
        within = np.arange(total) - np.repeat(np.cumsum(counts) - counts, counts)
        pk = np.repeat(first, counts) + within
        lo, hi = line_capsule_intervals(
            d.ux, d.uy, pk.astype(np.float64) * s,
            lv.ax[cap_idx], lv.ay[cap_idx], lv.bx[cap_idx], lv.by[cap_idx],
            np.full(total, reach),
        )
        keep = ~np.isnan(lo) & (lo < hi)
        ks.append(pk[keep])
        los.append(lo[keep])
        his.append(hi[keep])
    if not ks:
        return np.empty(0, np.int64), np.empty(0), np.empty(0)
    return np.concatenate(ks), np.concatenate(los), np.concatenate(his)


def build_up_to(n_max: int, window: Window, schedule: Optional[Schedule] = None, *,
                cap: int = N_MAX, line_cap: int = LINE_CAP, segment_cap: int = SEGMENT_CAP) -> LevelSet:
    """Iterate :func:`build_level` from the empty set H_0 up to depth ``n_max``."""
    schedule = DirectionSchedule() if schedule is None else schedule
    if n_max > cap:
        raise DepthCapError(f"depth cap exceeded: {n_max} > {cap}")
    ls = empty_levelset(window, schedule, n_max, cap, line_cap, segment_cap)
    for n in range(1, n_max + 1):
        ls = build_level(ls, n)
    return ls


# ---- invariants ----------------------------------------------------------

def check_invariants(ls: LevelSet, samples_per_segment: int = 8, max_segments: int = 2000,
                     seed: int = 0) -> list[str]:
    """Structural checks on a built level set; returns human-readable failures."""
    problems: list[str] = []
    rng = np.random.default_rng(seed)
    for lv in ls.levels:
        n = lv.n
        if lv.radius != 2.0 ** (-6 * (n + 1)):
            problems.append(f"level {n}: radius {lv.radius!r}")
        if ls.schedule.direction_at(n) != lv.direction:
            problems.append(f"level {n}: direction differs from schedule")
        if not len(lv):
            continue
        nrm = lv.direction.perp
        proj = np.concatenate([lv.ax * nrm.ux + lv.ay * nrm.uy, lv.bx * nrm.ux + lv.by * nrm.uy])
        kk = np.concatenate([lv.k, lv.k]).astype(np.float64)
        off = np.abs(proj - kk * lv.spacing)
        if off.max() > 1e-12:
            problems.append(f"level {n}: axis off its line by {off.max():.3e}")
        if np.any(lv.hi < lv.lo):
            problems.append(f"level {n}: inverted segment")
        if n == 1:
            continue
        pick = np.arange(len(lv))
        if len(pick) > max_segments:
            pick = np.sort(rng.choice(len(lv), max_segments, replace=False))
        fr = np.linspace(0.0, 1.0, samples_per_segment)
        for i in pick.tolist():
            for f in fr.tolist():
                p = (lv.ax[i] + f * (lv.bx[i] - lv.ax[i]), lv.ay[i] + f * (lv.by[i] - lv.ay[i]))
                if ls.window.cheb(p) > ls.window.query_reach(n - 1):
                    continue
                dd = ls.dist_to_H(n - 1, p)
                if dd < lv.spacing - 2 * TAU:
                    problems.append(f"level {n}: axis point {p} at distance {dd!r} from H_{n-1}")
                    break
    return problems


# ---- serialization -------------------------------------------------------

_MAGIC = "porousplane-levelset"


def _hx(v: float) -> str:
    return float(v).hex()


def dumps(ls: LevelSet) -> str:
    """Text dump with every float written in exact hexadecimal form."""
    w = ls.window
    sched = " ".join(f"{k}={v}" for k, v in ls.schedule.params().items())
    lines = [
        f"{_MAGIC} {FORMAT_VERSION}",
        f"schedule {sched}",
        f"window {_hx(w.center.x)} {_hx(w.center.y)} {_hx(w.half_width)} {_hx(w.margin)}"
        + ("" if w.taper is None else f" {_hx(w.taper)}"),
        f"limits {ls.target_depth} {ls.n_max} {ls.line_cap} {ls.segment_cap}",
        f"depth {ls.depth}",
    ]
    for lv in ls.levels:
        d = lv.direction
        lines.append(
            f"level {lv.n} {_hx(d.ux)} {_hx(d.uy)} {_hx(lv.radius)} {lv.k_range[0]} {lv.k_range[1]} "
            f"{lv.lines_built} {len(lv)}"
        )
        for k, lo, hi in zip(lv.k.tolist(), lv.lo.tolist(), lv.hi.tolist()):
            lines.append(f"{k} {lo.hex()} {hi.hex()}")
    return "\n".join(lines) + "\n"


def loads(text: str) -> LevelSet:
    rows = text.splitlines()
    head = rows[0].split()
    if len(head) != 2 or head[0] != _MAGIC:
        raise ValueError("not a level-set dump")
    if int(head[1]) != FORMAT_VERSION:
        raise ValueError(f"unsupported dump version {head[1]}")
    it = iter(rows[1:])
    sched_row = next(it).split()[1:]
    schedule = schedule_from_params(dict(kv.split("=", 1) for kv in sched_row))
    wv = [float.fromhex(v) for v in next(it).split()[1:]]
    cx, cy, hw, margin = wv[:4]
    taper = wv[4] if len(wv) > 4 else None
    target, n_max, line_cap, seg_cap = (int(v) for v in next(it).split()[1:])
    depth = int(next(it).split()[1])
    levels = []
    for _ in range(depth):
        parts = next(it).split()
        n = int(parts[1])
        d = Direction(float.fromhex(parts[2]), float.fromhex(parts[3]))
        kr = (int(parts[5]), int(parts[6]))
        built, count = int(parts[7]), int(parts[8])
        ks = np.empty(count, np.int64)
        lo = np.empty(count)
        hi = np.empty(count)
        for i in range(count):
            a, b, c = next(it).split()
            ks[i] = int(a)
            lo[i] = float.fromhex(b)
            hi[i] = float.fromhex(c)
        levels.append(Level(n, d, ks, lo, hi, kr, built))
    return LevelSet(schedule, Window(Point(cx, cy), hw, margin, taper), target, tuple(levels), n_max, line_cap, seg_cap)


def save(ls: LevelSet, path) -> None:
    with open(path, "w", encoding="ascii", newline="\n") as fh:
        fh.write(dumps(ls))


def load(path) -> LevelSet:
    with open(path, encoding="ascii") as fh:
        return loads(fh.read())


def with_radius_scale(ls: LevelSet, level: int, factor: float) -> "LevelSet":
    """Copy of ``ls`` whose level-``level`` capsules are queried with a scaled radius.

    Fault injection for negative controls only.
    """
    lv = ls.level(level)
    bad = _ScaledLevel(lv.n, lv.direction, lv.k, lv.lo, lv.hi, lv.k_range, lv.lines_built)
    object.__setattr__(bad, "_factor", factor)
    levels = tuple(bad if x.n == level else x for x in ls.levels)
    return LevelSet(ls.schedule, ls.window, ls.target_depth, levels, ls.n_max, ls.line_cap, ls.segment_cap)


@dataclass(frozen=True)
class _ScaledLevel(Level):
    @property
    def radius(self) -> float:
        return radius(self.n) * getattr(self, "_factor", 1.0)


def iter_capsules(ls: LevelSet, n: Optional[int] = None) -> Iterable[tuple[int, Capsule]]:
    for lv in ls.levels[: (ls.depth if n is None else n)]:
        for c in lv.capsules():
            yield lv.n, c
