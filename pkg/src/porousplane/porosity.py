"""Hole finders and porosity scanners, plus the checks tied to the sets A_s and G_{v,N}.

Holes are always certified through :meth:`LevelSet.ball_certificate`, so every
reported radius is a lower bound for the true hole at that center.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence

import numpy as np

from .construction import LevelSet, Membership, QueryOutsideWindow, radius, spacing
from .geom import TAU, Direction, Point, as_point, dist, segment_segment_closest

__all__ = [
    "PreconditionError", "DepthExhausted", "ScaleBudgetError", "ScanRecord", "ClaimReport", "GVerdict",
    "boundary_walk", "find_boundary_point", "find_thick_center", "find_hole", "porosity_scan", "directional_scan",
    "r0_budget", "is_in_A_s", "find_A_s_point", "is_in_G", "claim_check", "bracket_level", "sample_outside",
]


class PreconditionError(ValueError):
    pass


class DepthExhausted(LookupError):
    """No certified point was found before running out of built levels."""


class ScaleBudgetError(ValueError):
    pass


def _unit(dx: float, dy: float) -> tuple[float, float]:
    n = math.hypot(dx, dy)
    return dx / n, dy / n


def _foot_fast(lv, i: int, p) -> Point:
    ax, ay, bx, by = float(lv.ax[i]), float(lv.ay[i]), float(lv.bx[i]), float(lv.by[i])
    dx, dy = bx - ax, by - ay
    l2 = dx * dx + dy * dy
    if l2 == 0.0:
        return Point(ax, ay)
    t = min(1.0, max(0.0, ((p[0] - ax) * dx + (p[1] - ay) * dy) / l2))
    return Point(ax + t * dx, ay + t * dy)


def _to_boundary(ls: LevelSet, n: int, outside, inside, sd_out: Optional[float] = None) -> Point:
    """A point with |signed distance| <= TAU on the segment outside -> inside."""
    a = as_point(outside)
    b = as_point(inside)
    va = ls.signed_distance(n, a) if sd_out is None else sd_out
    vb = ls.signed_distance(n, b)
    if abs(vb) <= TAU:
        return b
    if abs(va) <= TAU:
        return a
    if not (va > 0.0 > vb):
        raise PreconditionError("segment endpoints do not straddle the boundary")
    # sphere tracing from the outside end never overshoots the boundary
    for _ in range(12):
        L = dist(a, b)
        if L == 0.0 or va >= L:
            break
        f = va / L
        c = Point(a.x + f * (b.x - a.x), a.y + f * (b.y - a.y))
        vc = ls.signed_distance(n, c)
        if abs(vc) <= TAU:
            return c
        if vc < 0.0:
            b, vb = c, vc
            break
        a, va = c, vc
    for _ in range(200):
        c = Point(0.5 * (a.x + b.x), 0.5 * (a.y + b.y))
        vc = ls.signed_distance(n, c)
        if abs(vc) <= TAU:
            return c
        if vc > 0.0:
            a, va = c, vc
        else:
            b, vb = c, vc
    raise RuntimeError("bisection did not reach the tolerance band")


def boundary_walk(ls: LevelSet, n: int, x) -> tuple[Point, int]:
    """:func:`find_boundary_point` plus the case taken (0 = already on the boundary)."""
    if n < 1:
        raise PreconditionError("boundary walks need n >= 1")
    x = as_point(x)
    sd_x = ls.signed_distance(n, x)
    if abs(sd_x) <= TAU:
        return x, 0
    if sd_x < 0.0:
        raise PreconditionError(f"{x} lies inside H_{n}")
    lv = ls.level(n)
    s, r = lv.spacing, lv.radius
    t, u = lv.coords(x)
    k = round(u / s)
    shift = u - k * s
    nrm = lv.direction.perp
    y = Point(x.x - shift * nrm.ux, x.y - shift * nrm.uy)
    sd_prev = ls.signed_distance(n - 1, y)
    if sd_prev >= s - TAU:
        # y is on C_n, so its whole r-ball belongs to H_n
        ux, uy = _unit(x.x - y.x, x.y - y.y)
        target = Point(y.x + r * ux, y.y + r * uy)
        vt = ls.signed_distance(n, target)
        if abs(vt) <= TAU:
            return target, 1
        q = target if vt < 0.0 else y
        return _to_boundary(ls, n, x, q, sd_x), 1
    if sd_prev > 0.0:
        _, m, i = ls.nearest_capsule(n - 1, y)
        foot = _foot_fast(ls.level(m), i, y)
        ux, uy = _unit(y.x - foot.x, y.y - foot.y)
        R = ls.level(m).radius - TAU
        q = Point(foot.x + R * ux, foot.y + R * uy)
        return _to_boundary(ls, n, x, q, sd_x), 2
    return _to_boundary(ls, n, x, y, sd_x), 3


def find_boundary_point(ls: LevelSet, n: int, x) -> Point:
    """Point z on the boundary of H_n with |x - z| < 2**-(6n-1).

    Requires x outside H_n (points already within TAU of the boundary are
    returned unchanged).
    """
    z, _ = boundary_walk(ls, n, x)
    if not dist(x, z) < 2.0 ** -(6 * n - 1):
        raise RuntimeError(f"boundary point {z} too far from {x}")
    return z


def find_thick_center(ls: LevelSet, n: int, x) -> Point:
    """Center y within 2**-6(n+1) (+TAU) of x whose ball of that radius lies in H_n."""
    x = as_point(x)
    sd, m, i = ls.nearest_capsule(n, x)
    if sd > TAU:
        raise PreconditionError(f"{x} is not in the closure of H_{n}")
    foot = _foot_fast(ls.level(m), i, x)
    dd = dist(x, foot)
    rn = radius(n)
    if dd <= rn + TAU:
        return foot
    step = rn + 0.5 * TAU
    return Point(x.x + step * (foot.x - x.x) / dd, x.y + step * (foot.y - x.y) / dd)


def find_hole(ls: LevelSet, n: int, x) -> tuple[Point, float]:
    """Certified hole of radius 2**-6(n+1) - TAU centered within 2**-(6n-2) of x."""
    z0 = find_boundary_point(ls, n, x)
    y = find_thick_center(ls, n, z0)
    rho = radius(n) - TAU
    if not dist(x, y) < 2.0 ** -(6 * n - 2):
        raise RuntimeError(f"hole center {y} too far from {x}")
    if not ls.ball_inside_H(n, y, rho):
        raise RuntimeError(f"hole at {y} not certified")
    return y, rho


@dataclass(frozen=True)
class ScanRecord:
    point: Point
    scale: float
    best_hole_radius: float
    hole_center: Point
    ratio: float
    certificate: str = "none"
    source: str = "none"
    direction: Optional[Direction] = None

    @property
    def center_distance(self) -> float:
        return dist(self.point, self.hole_center)

    @property
    def within_scale(self) -> bool:
        return self.center_distance < self.scale


def sample_outside(ls: LevelSet, count: int, seed: int, slack: float = 0.0, n: Optional[int] = None,
                   max_tries: int = 1000) -> list[Point]:
    """``count`` seeded uniform points of the core (shrunk by ``slack``) outside H_n.

    Points within TAU of the boundary are rejected along with interior ones.
    """
    n = ls.depth if n is None else n
    w = ls.window
    half = w.half_width - slack
    if not half > 0.0:
        raise ValueError("slack leaves no room in the core window")
    rng = np.random.default_rng(seed)
    out: list[Point] = []
    batch = max(64, 2 * count)
    for _ in range(max_tries):
        xs = w.center.x + rng.uniform(-half, half, batch)
        ys = w.center.y + rng.uniform(-half, half, batch)
        sd = ls.nearest_line_sd_many(n, xs, ys) if n else np.full(batch, np.inf)
        for x, y in zip(xs[sd > TAU].tolist(), ys[sd > TAU].tolist()):
            out.append(Point(x, y))
            if len(out) == count:
                return out
    raise RuntimeError(f"found only {len(out)} of {count} outside points")


def r0_budget(ls: LevelSet, x) -> float:
    """Largest r with B(x, 2r) inside the core window."""
    return max(0.0, (ls.window.half_width - ls.window.cheb(x)) / 2.0)


def bracket_level(r: float) -> int:
    """Deepest n with 2**-6(n+1) <= r <= 2**-6n (0 if r > 2**-6)."""
    if not r > 0.0:
        raise ValueError("scale must be positive")
    n = 0
    while spacing(n + 1) >= r:
        n += 1
    return n


def _check_scan(ls: LevelSet, x, scales: Sequence[float]) -> None:
    if ls.membership(ls.depth, x) != Membership.OUT:
        raise PreconditionError(f"{tuple(x)} is not outside H_{ls.depth}")
    budget = r0_budget(ls, x)
    for r in scales:
        if not 0.0 < r <= budget:
            raise ScaleBudgetError(f"scale {r!r} outside (0, {budget!r}] at {tuple(x)}")


def _local_hole(ls: LevelSet, x: Point, r: float):
    """Best single-capsule hole centered strictly within r of x."""
    inner = r * (1.0 - 2.0**-20)
    best = (0.0, x)
    for lv in ls.levels:
        R = lv.radius
        if R - TAU <= best[0]:
            continue
        d, i = ls.nearest_axis(lv.n, x, inner + R)
        if i < 0:
            continue
        foot = _foot_fast(lv, i, x)
        if d < inner:
            cand = (R - TAU, foot)
        else:
            f = inner / d
            c = Point(x.x + f * (foot.x - x.x), x.y + f * (foot.y - x.y))
            cand = (R - (d - inner) - TAU, c)
        if cand[0] > best[0]:
            best = cand
    return best


def porosity_scan(ls: LevelSet, x, scales: Iterable[float]) -> list[ScanRecord]:
    """Largest certified hole per scale near x.

    Two sources compete: the nearest capsules within distance r of x, and the
    constructive hole at the level bracketing r (radius 2**-6(n+1), centered
    within 2**-(6n-2) of x, which may be farther than r; see
    ``ScanRecord.within_scale``).
    """
    x = as_point(x)
    scales = list(scales)
    _check_scan(ls, x, scales)
    out = []
    for r in scales:
        rad, center = _local_hole(ls, x, r)
        source = "local" if rad > 0.0 else "none"
        n = bracket_level(r)
        if 1 <= n <= ls.depth:
            try:
                z, rho = find_hole(ls, n, x)
            except QueryOutsideWindow:
                z, rho = x, 0.0
            if rho > rad:
                rad, center, source = rho, z, "constructive"
        cert = ls.ball_certificate(ls.depth, center, rad) if rad > 0.0 else "none"
        if cert == "none":
            rad, center, source = 0.0, x, "none"
        out.append(ScanRecord(x, r, rad, center, rad / r, cert, source))
    return out


def directional_scan(ls: LevelSet, x, v: Direction, scales: Iterable[float]) -> list[ScanRecord]:
    """Largest certified hole centered on {x + t v : |t| < r} per scale.

    For each capsule the best center on the scan segment is the point closest
    to its axis, so the maximisation is exact for single-capsule holes.
    """
    x = as_point(x)
    scales = list(scales)
    _check_scan(ls, x, scales)
    out = []
    for r in scales:
        inner = r * (1.0 - 2.0**-20)
        s0 = Point(x.x - inner * v.ux, x.y - inner * v.uy)
        s1 = Point(x.x + inner * v.ux, x.y + inner * v.uy)
        best_r, best_c = 0.0, x
        for lv in ls.levels:
            R = lv.radius
            if R - TAU <= best_r:
                continue
            for i in lv.near_segment(s0, s1, R):
                a = (float(lv.ax[i]), float(lv.ay[i]))
                b = (float(lv.bx[i]), float(lv.by[i]))
                dd, cp, _ = segment_segment_closest(s0, s1, a, b)
                cand = R - dd - TAU
                if cand > best_r:
                    best_r, best_c = cand, cp
        cert = ls.ball_certificate(ls.depth, best_c, best_r) if best_r > 0.0 else "none"
        if cert == "none":
            best_r, best_c = 0.0, x
        out.append(ScanRecord(x, r, best_r, best_c, best_r / r, cert, "directional" if best_r else "none", v))
    return out


def a_s_threshold(s: int) -> float:
    """Distance from H_s that separates the two closed neighbourhoods defining A_s."""
    return 2.0 ** -(6 * s + 5) + radius(s)


def is_in_A_s(ls: LevelSet, x, s: int) -> bool:
    if not 1 <= s <= ls.depth:
        raise ValueError(f"s={s} needs 1 <= s <= depth={ls.depth}")
    if ls.membership(ls.depth, x) != Membership.OUT:
        return False
    return ls.dist_to_H(s, x) > a_s_threshold(s)


def _side_steps(x: Point, u: tuple[float, float], s: int):
    base = 2.0 ** -(6 * s + 3)
    for sign in (1.0, -1.0):
        for ang in (0.0, math.pi / 6, -math.pi / 6, math.pi / 3, -math.pi / 3):
            ca, sa = math.cos(ang), math.sin(ang)
            dx = sign * (u[0] * ca - u[1] * sa)
            dy = sign * (u[0] * sa + u[1] * ca)
            for f in (1.0625, 1.25, 1.5, 1.75, 1.96875):
                yield Point(x.x + f * base * dx, x.y + f * base * dy)


def _land_on_next_level(ls: LevelSet, s: int, y: Point) -> Optional[Point]:
    """A point just outside ∂H_{s+1}, within 2**-6(s+1) of y."""
    lv = ls.level(s + 1)
    t, u = lv.coords(y)
    k = round(u / lv.spacing)
    shift = u - k * lv.spacing
    nrm = lv.direction.perp
    foot = Point(y.x - shift * nrm.ux, y.y - shift * nrm.uy)
    if ls.signed_distance(s + 1, foot) > -lv.radius + TAU:
        return None
    if shift != 0.0:
        ux, uy = _unit(y.x - foot.x, y.y - foot.y)
    else:
        ux, uy = nrm.ux, nrm.uy
    step = lv.radius + 2.0 * TAU
    return Point(foot.x + step * ux, foot.y + step * uy)


def find_A_s_point(ls: LevelSet, w, n: int) -> tuple[Point, int]:
    """A point z of A_s within 2**-6(n-1) of w, trying s = n, n+1, ..., depth-1.

    Raises :class:`DepthExhausted` when no certified point is found.
    """
    w = as_point(w)
    if n < 1:
        raise PreconditionError("n must be at least 1")
    if n + 1 > ls.depth:
        raise DepthExhausted(f"need depth >= {n + 1}, have {ls.depth}")
    if ls.membership(ls.depth, w) != Membership.OUT:
        raise PreconditionError(f"{w} is not outside H_{ls.depth}")
    x = find_boundary_point(ls, n, w)
    bound = spacing(n - 1)
    for s in range(n, ls.depth):
        sd, m, i = ls.nearest_capsule(s, x)
        foot = _foot_fast(ls.level(m), i, x)
        if dist(x, foot) == 0.0:
            continue
        u = _unit(x.x - foot.x, x.y - foot.y)
        need = 2.0 ** -(6 * s + 3)
        for y in _side_steps(x, u, s):
            try:
                if ls.dist_to_H(s, y) < need:
                    continue
                z = _land_on_next_level(ls, s, y)
                if z is None:
                    continue
                if dist(w, z) < bound and is_in_A_s(ls, z, s):
                    return z, s
            except QueryOutsideWindow:
                continue
    raise DepthExhausted(f"no A_s point found for {tuple(w)} with s <= {ls.depth - 1}")


class GVerdict(enum.Enum):
    TRUE = "TRUE"
    FALSE = "FALSE"
    UNDECIDED = "UNDECIDED"


def is_in_G(ls: LevelSet, schedule, x, j: int, N: int) -> GVerdict:
    """Whether x lies in some A_n (N <= n <= depth-1) followed by N copies of d_j."""
    if N > ls.depth - 1:
        return GVerdict.UNDECIDED
    for n in range(N, ls.depth):
        if schedule.has_run(j, n, N) and is_in_A_s(ls, x, n):
            return GVerdict.TRUE
    if ls.membership(ls.depth, x) == Membership.IN:
        return GVerdict.FALSE
    return GVerdict.UNDECIDED


@dataclass
class ClaimReport:
    rectangle: tuple[Point, Point, Point, Point]
    frame: tuple[float, float, float, float]
    samples_tested: int = 0
    translation_violations: int = 0
    separation_violations: int = 0
    separation_cases: int = 0
    min_separation: float = math.inf
    degenerate: bool = False
    per_level: dict = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return not self.degenerate and self.translation_violations == 0 and self.separation_violations == 0


def claim_check(ls: LevelSet, x, n: int, N: int, sample_count: int = 10_000, seed: int = 0) -> ClaimReport:
    """Check translation invariance and separation of H_m inside the rectangle R.

    R spans the two nearest level-(n+1) lines flanking x horizontally (in the
    frame where the run direction is vertical) and 2**-6(n+1) vertically.
    """
    x = as_point(x)
    sched = ls.schedule
    if n + N > ls.depth:
        raise PreconditionError(f"n+N={n + N} exceeds depth {ls.depth}")
    j = sched.index_at(n + 1)
    if not sched.has_run(j, n, N):
        raise PreconditionError(f"schedule has no run of length {N} after position {n}")
    if not is_in_A_s(ls, x, n):
        raise PreconditionError(f"{x} is not in A_{n}")
    v = sched.direction_at(n + 1)
    e1 = (v.uy, -v.ux)
    e2 = (v.ux, v.uy)

    def xy(a, b):
        return a * e1[0] + b * e2[0], a * e1[1] + b * e2[1]

    a_x = x.x * e1[0] + x.y * e1[1]
    b_x = x.x * e2[0] + x.y * e2[1]
    s = spacing(n + 1)
    q = a_x / s
    h = radius(n)
    a1, a2 = math.floor(q) * s, math.ceil(q) * s
    b1, b2 = b_x - h, b_x + h
    corners = tuple(Point(*xy(a, b)) for a, b in ((a1, b1), (a2, b1), (a2, b2), (a1, b2)))
    report = ClaimReport(corners, (a1, a2, b1, b2))
    if a1 == a2 or a1 == a_x or a2 == a_x:
        report.degenerate = True
        return report

    rng = np.random.default_rng(seed)
    for m in range(n + 1, n + N + 1):
        # first bullet: membership is invariant under vertical translation in R
        a = rng.uniform(a1, a2, sample_count)
        ba = rng.uniform(b1, b2, sample_count)
        bb = rng.uniform(b1, b2, sample_count)
        p1 = xy(a, ba)
        p2 = xy(a, bb)
        m1 = ls.nearest_line_sd_many(m, *p1)
        m2 = ls.nearest_line_sd_many(m, *p2)
        bad = ((m1 < -TAU) & (m2 > TAU)) | ((m1 > TAU) & (m2 < -TAU))
        tv = int(bad.sum())
        report.samples_tested += sample_count
        report.translation_violations += tv

        # second bullet: pieces of H_m outside R that project vertically onto
        # R \ H_m stay at least 2**-6m - 2**-6(m+1) away from R
        need = spacing(m) - radius(m)
        sv, cases, min_sep = _separation_scan(ls, m, (a1, a2, b1, b2), e1, e2, need)
        report.separation_violations += sv
        report.separation_cases += cases
        report.min_separation = min(report.min_separation, min_sep)
        report.per_level[m] = {"translation": tv, "separation": sv, "cases": cases, "min_separation": min_sep}
    return report


def _axis_window(ax, ay, bx, by, e1, e2, arange, brange):
    """Parameter range of the axis A + t(B - A), t in [0, 1], inside the given frame box."""
    lo, hi = 0.0, 1.0
    for e, (c0, c1) in ((e1, arange), (e2, brange)):
        p0 = ax * e[0] + ay * e[1]
        dp = (bx - ax) * e[0] + (by - ay) * e[1]
        if dp == 0.0:
            if not c0 <= p0 <= c1:
                return None
            continue
        t0, t1 = sorted(((c0 - p0) / dp, (c1 - p0) / dp))
        lo, hi = max(lo, t0), min(hi, t1)
    return (lo, hi) if lo <= hi else None


def _separation_scan(ls, m, frame, e1, e2, need, axis_samples: int = 64, column_samples: int = 33):
    a1, a2, b1, b2 = frame
    mid_a = 0.5 * (a1 + a2)
    half_a = 0.5 * (a2 - a1)

    def xy(a, b):
        return a * e1[0] + b * e2[0], a * e1[1] + b * e2[1]

    top = Point(*xy(mid_a, b2))
    bot = Point(*xy(mid_a, b1))
    zs_x, zs_y = [], []
    for lv in ls.levels[:m]:
        R = lv.radius
        # look well beyond the required gap so the measured separation is informative
        reach = half_a + 16.0 * need + R
        for i in lv.near_segment(bot, top, reach):
            ax, ay, bx, by = (float(lv.ax[i]), float(lv.ay[i]), float(lv.bx[i]), float(lv.by[i]))
            span = _axis_window(ax, ay, bx, by, e1, e2, (a1 - R, a2 + R), (b1 - reach, b2 + reach))
            if span is None:
                continue
            f = np.linspace(span[0], span[1], axis_samples)
            px, py = ax + f * (bx - ax), ay + f * (by - ay)
            for rho in (0.0, 0.5 * R, R * (1.0 - 2.0**-20)):
                for sgn in (1.0, -1.0):
                    zs_x.append(px + sgn * rho * e2[0])
                    zs_y.append(py + sgn * rho * e2[1])
    if not zs_x:
        return 0, 0, math.inf
    zx = np.concatenate(zs_x)
    zy = np.concatenate(zs_y)
    za = zx * e1[0] + zy * e1[1]
    zb = zx * e2[0] + zy * e2[1]
    keep = (za >= a1) & (za <= a2) & ((zb < b1) | (zb > b2))
    keep &= ls.nearest_line_sd_many(m, zx, zy) < -TAU
    za, zb = za[keep], zb[keep]
    if not len(za):
        return 0, 0, math.inf
    col_b = np.linspace(b1, b2, column_samples)
    cx, cy = xy(np.repeat(za, column_samples), np.tile(col_b, len(za)))
    sd = ls.nearest_line_sd_many(m, cx, cy).reshape(len(za), column_samples)
    hyp = (sd > TAU).any(axis=1)
    sep = np.where(zb < b1, b1 - zb, zb - b2)[hyp]
    if not len(sep):
        return 0, 0, math.inf
    return int((sep < need - TAU).sum()), int(len(sep)), float(sep.min())
