"""Planar primitives and the distance/intersection kernels built on them.

Every distance in the package ultimately goes through ``segment_distances``,
a vectorised point-to-segment kernel. Scalar helpers call the same kernel so
that indexed and exhaustive queries agree bit for bit.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple, Optional

import numpy as np

TAU = 2.0**-40
UNIT_TOL = 2.0**-40


class Point(NamedTuple):
    x: float
    y: float

    def __add__(self, other):  # type: ignore[override]
        return Point(self.x + other[0], self.y + other[1])

    def __sub__(self, other):
        return Point(self.x - other[0], self.y - other[1])

    def scaled(self, k: float) -> "Point":
        return Point(self.x * k, self.y * k)

    def norm(self) -> float:
        return math.hypot(self.x, self.y)

    def dot(self, other) -> float:
        return self.x * other[0] + self.y * other[1]

    def is_finite(self) -> bool:
        return math.isfinite(self.x) and math.isfinite(self.y)


def as_point(p) -> Point:
    return Point(float(p[0]), float(p[1]))


def dist(p, q) -> float:
    return math.hypot(p[0] - q[0], p[1] - q[1])


@dataclass(frozen=True)
class Direction:
    ux: float
    uy: float

    def __post_init__(self):
        if abs(self.ux * self.ux + self.uy * self.uy - 1.0) > UNIT_TOL:
            raise ValueError(f"not a unit vector: ({self.ux!r}, {self.uy!r})")

    @classmethod
    def from_turns(cls, turns: float) -> "Direction":
        """Unit vector at angle ``2*pi*turns``; exact at quarter turns."""
        f = turns % 1.0
        quarter = f * 4.0
        if quarter == int(quarter):
            return cls(*((1.0, 0.0), (0.0, 1.0), (-1.0, 0.0), (0.0, -1.0))[int(quarter)])
        theta = 2.0 * math.pi * f
        return cls(math.cos(theta), math.sin(theta))

    @classmethod
    def from_vector(cls, x: float, y: float) -> "Direction":
        n = math.hypot(x, y)
        if n == 0.0:
            raise ValueError("zero vector has no direction")
        return cls(x / n, y / n)

    @property
    def perp(self) -> "Direction":
        """Anticlockwise quarter turn, (-uy, ux)."""
        return Direction(-self.uy, self.ux)

    def as_point(self) -> Point:
        return Point(self.ux, self.uy)

    def __iter__(self):
        yield self.ux
        yield self.uy

    def __getitem__(self, i):
        return (self.ux, self.uy)[i]


@dataclass(frozen=True)
class Line:
    """Points ``t*direction + offset*direction.perp`` for real ``t``."""

    direction: Direction
    offset: float

    def at(self, t: float) -> Point:
        d, n = self.direction, self.direction.perp
        return Point(t * d.ux + self.offset * n.ux, t * d.uy + self.offset * n.uy)

    def param(self, p) -> float:
        return p[0] * self.direction.ux + p[1] * self.direction.uy

    def signed_offset(self, p) -> float:
        n = self.direction.perp
        return p[0] * n.ux + p[1] * n.uy - self.offset


@dataclass(frozen=True)
class Segment:
    a: Point
    b: Point

    @property
    def degenerate(self) -> bool:
        return self.a == self.b

    def length(self) -> float:
        return dist(self.a, self.b)


@dataclass(frozen=True)
class Interval:
    lo: float
    hi: float

    def __post_init__(self):
        if not self.lo <= self.hi:
            raise ValueError(f"empty interval ({self.lo}, {self.hi})")

    def contains(self, t: float) -> bool:
        return self.lo < t < self.hi

    def covers(self, other: "Interval") -> bool:
        return self.lo <= other.lo and other.hi <= self.hi


@dataclass(frozen=True)
class Capsule:
    """Open set of points closer than ``radius`` to ``axis``."""

    axis: Segment
    radius: float

    def __post_init__(self):
        if not self.radius > 0.0:
            raise ValueError("capsule radius must be positive")


def segment_distances(px, py, ax, ay, bx, by):
    """Vectorised Euclidean distance from points to closed segments.

    All arguments broadcast. Degenerate segments (a == b) act as points.
    """
    px, py, ax, ay, bx, by = np.broadcast_arrays(
        *(np.asarray(v, dtype=np.float64) for v in (px, py, ax, ay, bx, by))
    )
    dx = bx - ax
    dy = by - ay
    wx = px - ax
    wy = py - ay
    l2 = dx * dx + dy * dy
    with np.errstate(invalid="ignore", divide="ignore"):
        t = np.where(l2 > 0.0, (wx * dx + wy * dy) / np.where(l2 > 0.0, l2, 1.0), 0.0)
    t = np.clip(t, 0.0, 1.0)
    return np.hypot(wx - t * dx, wy - t * dy)


def closest_on_segment(p, s: Segment) -> Point:
    ax, ay = s.a
    dx, dy = s.b[0] - ax, s.b[1] - ay
    l2 = dx * dx + dy * dy
    if l2 == 0.0:
        return s.a
    t = min(1.0, max(0.0, ((p[0] - ax) * dx + (p[1] - ay) * dy) / l2))
    return Point(ax + t * dx, ay + t * dy)


def dist_point_segment(p, s: Segment) -> float:
    return float(segment_distances(p[0], p[1], s.a.x, s.a.y, s.b.x, s.b.y))


def dist_point_capsule(p, c: Capsule) -> float:
    """Signed distance: negative inside, zero on the boundary."""
    return dist_point_segment(p, c.axis) - c.radius


def _linear_window(c1, c0, lo, hi):
    """Parameter window where ``lo < c1*t + c0 < hi`` (arrays; NaN bounds = empty)."""
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        t_lo = (lo - c0) / c1
        t_hi = (hi - c0) / c1
    a = np.where(c1 > 0, t_lo, t_hi)
    b = np.where(c1 > 0, t_hi, t_lo)
    flat = c1 == 0.0
    inside = (c0 > lo) & (c0 < hi)
    a = np.where(flat, np.where(inside, -np.inf, np.nan), a)
    b = np.where(flat, np.where(inside, np.inf, np.nan), b)
    return a, b


def line_capsule_intervals(ux, uy, offset, ax, ay, bx, by, reach):
    """Vectorised trace of open capsules on one line.

    The line is ``t*(ux, uy) + offset*(-uy, ux)``; capsule ``i`` has axis
    ``(ax[i], ay[i])-(bx[i], by[i])`` and radius ``reach[i]``. Returns arrays
    ``lo, hi`` with NaN where the line misses (or only touches) the capsule.
    """
    ax, ay, bx, by, reach = (np.asarray(v, dtype=np.float64) for v in (ax, ay, bx, by, reach))
    nx, ny = -uy, ux
    at, au = ax * ux + ay * uy, ax * nx + ay * ny
    bt, bu = bx * ux + by * uy, bx * nx + by * ny
    r2 = reach * reach

    los = []
    his = []
    for ct, cu in ((at, au), (bt, bu)):
        h = offset - cu
        s2 = r2 - h * h
        ok = s2 > 0.0
        half = np.sqrt(np.where(ok, s2, 0.0))
        los.append(np.where(ok, ct - half, np.nan))
        his.append(np.where(ok, ct + half, np.nan))

    # open rectangle swept along the axis
    dx, dy = bx - ax, by - ay
    length = np.hypot(dx, dy)
    nz = length > 0.0
    safe = np.where(nz, length, 1.0)
    ex, ey = dx / safe, dy / safe
    de = ux * ex + uy * ey
    ne = nx * ex + ny * ey
    dperp = ux * -ey + uy * ex
    nperp = nx * -ey + ny * ex
    h = offset - au
    a1, b1 = _linear_window(de, h * ne - at * de, 0.0, length)
    a2, b2 = _linear_window(dperp, h * nperp - at * dperp, -reach, reach)
    # NaN marks an empty window and must win here, so no fmax/fmin
    rlo = np.maximum(a1, a2)
    rhi = np.minimum(b1, b2)
    valid = nz & ~np.isnan(rlo) & ~np.isnan(rhi) & (rlo < rhi)
    los.append(np.where(valid, rlo, np.nan))
    his.append(np.where(valid, rhi, np.nan))

    lo = np.fmin(np.fmin(los[0], los[1]), los[2])
    hi = np.fmax(np.fmax(his[0], his[1]), his[2])
    return lo, hi


def line_capsule_interval(l: Line, c: Capsule, inflate: float = 0.0) -> Optional[Interval]:
    """Parameters ``t`` with ``dist(l.at(t), c.axis) < c.radius + inflate``.

    Returns None when the line misses or is tangent to the inflated capsule.
    """
    if inflate < 0.0:
        raise ValueError("inflate must be non-negative")
    d = l.direction
    lo, hi = line_capsule_intervals(
        d.ux, d.uy, l.offset, [c.axis.a.x], [c.axis.a.y], [c.axis.b.x], [c.axis.b.y],
        [c.radius + inflate],
    )
    if math.isnan(lo[0]) or not lo[0] < hi[0]:
        return None
    return Interval(float(lo[0]), float(hi[0]))


def segment_segment_closest(p0, p1, q0, q1) -> tuple[float, Point, Point]:
    """Distance between closed segments p0-p1 and q0-q1 with the closest pair.

    Returns ``(distance, point_on_p, point_on_q)``.
    """
    d1 = (p1[0] - p0[0], p1[1] - p0[1])
    d2 = (q1[0] - q0[0], q1[1] - q0[1])
    r = (p0[0] - q0[0], p0[1] - q0[1])
    a = d1[0] * d1[0] + d1[1] * d1[1]
    e = d2[0] * d2[0] + d2[1] * d2[1]
    f = d2[0] * r[0] + d2[1] * r[1]

    def clamp(v):
        return min(1.0, max(0.0, v))

    if a == 0.0 and e == 0.0:
        s = t = 0.0
    elif a == 0.0:
        s, t = 0.0, clamp(f / e)
    else:
        c = d1[0] * r[0] + d1[1] * r[1]
        if e == 0.0:
            t, s = 0.0, clamp(-c / a)
        else:
            b = d1[0] * d2[0] + d1[1] * d2[1]
            denom = a * e - b * b
            s = clamp((b * f - c * e) / denom) if denom > 0.0 else 0.0
            t = (b * s + f) / e
            if t < 0.0:
                t, s = 0.0, clamp(-c / a)
            elif t > 1.0:
                t, s = 1.0, clamp((b - c) / a)
    cp = Point(p0[0] + s * d1[0], p0[1] + s * d1[1])
    cq = Point(q0[0] + t * d2[0], q0[1] + t * d2[1])
    # intersecting segments: the pair above may be off by rounding
    if _segments_cross(p0, p1, q0, q1):
        x = _crossing_point(p0, p1, q0, q1)
        if x is not None:
            return 0.0, x, x
    best = (dist(cp, cq), cp, cq)
    # near-parallel pairs lose the pair above to cancellation; endpoints are the fallback
    P, Q = Segment(as_point(p0), as_point(p1)), Segment(as_point(q0), as_point(q1))
    for e in (P.a, P.b):
        f = closest_on_segment(e, Q)
        if dist(e, f) < best[0]:
            best = (dist(e, f), e, f)
    for e in (Q.a, Q.b):
        f = closest_on_segment(e, P)
        if dist(f, e) < best[0]:
            best = (dist(f, e), f, e)
    return best


def _orient(a, b, c) -> float:
    return (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])


def _segments_cross(p0, p1, q0, q1) -> bool:
    o1, o2 = _orient(p0, p1, q0), _orient(p0, p1, q1)
    o3, o4 = _orient(q0, q1, p0), _orient(q0, q1, p1)
    return o1 * o2 < 0.0 and o3 * o4 < 0.0


def _crossing_point(p0, p1, q0, q1) -> Optional[Point]:
    d1 = (p1[0] - p0[0], p1[1] - p0[1])
    d2 = (q1[0] - q0[0], q1[1] - q0[1])
    den = d1[0] * d2[1] - d1[1] * d2[0]
    if den == 0.0:
        return None
    s = ((q0[0] - p0[0]) * d2[1] - (q0[1] - p0[1]) * d2[0]) / den
    return Point(p0[0] + s * d1[0], p0[1] + s * d1[1])
