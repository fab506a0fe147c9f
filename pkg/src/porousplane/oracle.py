"""Brute-force reference for membership in H_n, read straight off the recursion.

Nothing here touches capsules or the level-set engine. A point p is in H_n
when some sampled point c of some C_m (m <= n) lies within 2**-6(m+1) of p,
and a sample c on a level-m line belongs to C_m when no sampled point of any
earlier C_m' comes within 2**-6(m'+1) + 2**-6m of it. Samples sit on a fixed
lattice along each line, so decisions are memoised per lattice point.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .construction import LevelSet, Membership, Window
from .geom import TAU

ORACLE_MAX_DEPTH = 3


class OracleBudgetError(RuntimeError):
    pass


def _spacing(n: int) -> float:
    return 2.0 ** (-6 * n)


def _radius(n: int) -> float:
    return 2.0 ** (-6 * (n + 1))


class BruteForceOracle:
    """Sampled decision procedure for p ∈ H_n, n <= depth.

    ``pitch`` defaults to 2**-6(depth+2), a sixty-fourth of the deepest radius.
    """

    def __init__(self, schedule, depth: int, pitch: Optional[float] = None, memo: bool = True,
                 max_samples: int = 1 << 22):
        if not 1 <= depth <= ORACLE_MAX_DEPTH:
            raise OracleBudgetError(f"oracle supports depth 1..{ORACLE_MAX_DEPTH}, got {depth}")
        self.depth = depth
        self.pitch = _spacing(depth + 2) if pitch is None else pitch
        self.memo: Optional[dict] = {} if memo else None
        self.max_samples = max_samples
        self._frames = {}
        for m in range(1, depth + 1):
            d = schedule.direction_at(m)
            vx, vy = d.ux, d.uy
            self._frames[m] = (vx, vy, -vy, vx)
        self.samples_visited = 0

    def _lattice_point(self, m: int, k: int, j: int) -> tuple[float, float]:
        vx, vy, nx, ny = self._frames[m]
        t = j * self.pitch
        o = k * _spacing(m)
        return t * vx + o * nx, t * vy + o * ny

    def in_C(self, m: int, k: int, j: int) -> bool:
        """Whether lattice point j on line k of level m is (sampled as) in C_m."""
        key = (m, k, j)
        if self.memo is not None:
            hit = self.memo.get(key)
            if hit is not None:
                return hit
        c = self._lattice_point(m, k, j)
        keep = True
        for mm in range(1, m):
            if self.near(c, mm, _radius(mm) + _spacing(m)):
                keep = False
                break
        if self.memo is not None:
            self.memo[key] = keep
        return keep

    def near(self, p, m: int, reach: float) -> bool:
        """Whether some sampled point of C_m lies strictly within ``reach`` of p."""
        vx, vy, nx, ny = self._frames[m]
        s = _spacing(m)
        t = p[0] * vx + p[1] * vy
        u = p[0] * nx + p[1] * ny
        pitch = self.pitch
        for k in range(math.ceil((u - reach) / s), math.floor((u + reach) / s) + 1):
            h = u - k * s
            if abs(h) >= reach:
                continue
            half = math.sqrt(reach * reach - h * h)
            j0 = round(t / pitch)
            jlo = math.floor((t - half) / pitch)
            jhi = math.ceil((t + half) / pitch)
            if jhi - jlo > self.max_samples:
                raise OracleBudgetError("chord needs too many samples")
            # nearest samples first: the first kept one settles the question
            for step in range(0, max(j0 - jlo, jhi - j0) + 1):
                for j in ((j0,) if step == 0 else (j0 - step, j0 + step)):
                    if j < jlo or j > jhi:
                        continue
                    cx, cy = self._lattice_point(m, k, j)
                    if math.hypot(p[0] - cx, p[1] - cy) >= reach:
                        continue
                    self.samples_visited += 1
                    if self.in_C(m, k, j):
                        return True
        return False

    def distance(self, p, n: int, reach: float) -> float:
        """Sampled distance from p to H_n, or ``inf`` when H_n is farther than ``reach``.

        Each level contributes min |p - c| - r_m over kept samples c of C_m
        within ``reach + r_m`` of p; the result overestimates the true
        distance by at most half the sampling pitch.
        """
        best = math.inf
        for m in range(1, n + 1):
            R = reach + _radius(m)
            vx, vy, nx, ny = self._frames[m]
            s = _spacing(m)
            t = p[0] * vx + p[1] * vy
            u = p[0] * nx + p[1] * ny
            for k in range(math.ceil((u - R) / s), math.floor((u + R) / s) + 1):
                h = u - k * s
                if abs(h) >= R:
                    continue
                half = math.sqrt(R * R - h * h)
                jlo = math.floor((t - half) / self.pitch)
                jhi = math.ceil((t + half) / self.pitch)
                if jhi - jlo > self.max_samples:
                    raise OracleBudgetError("chord needs too many samples")
                for j in range(jlo, jhi + 1):
                    cx, cy = self._lattice_point(m, k, j)
                    d = math.hypot(p[0] - cx, p[1] - cy) - _radius(m)
                    if d < best and self.in_C(m, k, j):
                        best = d
        return max(best, 0.0) if best <= reach else math.inf

    def membership(self, p, n: int) -> Membership:
        if not 0 <= n <= self.depth:
            raise OracleBudgetError(f"level {n} outside oracle depth {self.depth}")
        for m in range(1, n + 1):
            if self.near(p, m, _radius(m)):
                return Membership.IN
        return Membership.OUT


_ORACLES: dict = {}


def brute_membership(p, n: int, schedule, depth: Optional[int] = None) -> Membership:
    """Oracle membership of p in H_n, sharing a memo per (schedule, depth)."""
    if n == 0:
        return Membership.OUT
    depth = n if depth is None else depth
    if n > ORACLE_MAX_DEPTH or depth > ORACLE_MAX_DEPTH:
        raise OracleBudgetError(f"oracle supports depth <= {ORACLE_MAX_DEPTH}")
    key = (repr(schedule), depth)
    orc = _ORACLES.get(key)
    if orc is None:
        orc = _ORACLES[key] = BruteForceOracle(schedule, depth)
    return orc.membership(p, n)


@dataclass
class GridField:
    window: Window
    resolution: int
    pitch: float
    values: np.ndarray = field(repr=False)


@dataclass
class Disagreement:
    i: int
    j: int
    x: float
    y: float
    engine: str
    oracle: str
    signed_distance: float


@dataclass
class CompareReport:
    resolution: int
    depth: int
    band: float
    cells: int
    compared: int
    disagreements: list

    @property
    def ok(self) -> bool:
        return not self.disagreements


def grid_nodes(window: Window, resolution: int) -> tuple[np.ndarray, np.ndarray, float]:
    """Node coordinates ``center - hw + i * pitch`` for i in range(resolution)."""
    if resolution < 1:
        raise ValueError("resolution must be positive")
    pitch = 2.0 * window.half_width / resolution
    idx = np.arange(resolution, dtype=np.float64)
    return window.center.x - window.half_width + idx * pitch, window.center.y - window.half_width + idx * pitch, pitch


def oracle_field(window: Window, resolution: int, oracle: BruteForceOracle, n: int) -> GridField:
    xs, ys, pitch = grid_nodes(window, resolution)
    vals = np.empty((resolution, resolution), dtype=object)
    for j, y in enumerate(ys.tolist()):
        for i, x in enumerate(xs.tolist()):
            vals[j, i] = oracle.membership((x, y), n)
    return GridField(window, resolution, pitch, vals)


def compare_fields(ls: LevelSet, resolution: int, oracle: Optional[BruteForceOracle] = None) -> CompareReport:
    """Grid sweep of the capsule engine against the oracle on the core window.

    Cells whose engine signed distance is within twice the oracle sampling
    pitch of zero are skipped; any other mismatch is reported.
    """
    n = ls.depth
    if n > ORACLE_MAX_DEPTH:
        raise OracleBudgetError(f"oracle comparison supports depth <= {ORACLE_MAX_DEPTH}")
    if n == 0:
        return CompareReport(resolution, 0, 0.0, resolution * resolution, resolution * resolution, [])
    oracle = BruteForceOracle(ls.schedule, n) if oracle is None else oracle
    band = 2.0 * oracle.pitch
    xs, ys, _ = grid_nodes(ls.window, resolution)
    gx, gy = np.meshgrid(xs, ys)
    sd = ls.nearest_line_sd_many(n, gx.ravel(), gy.ravel()).reshape(gx.shape)
    out = []
    compared = 0
    for j in range(resolution):
        for i in range(resolution):
            v = float(sd[j, i])
            if abs(v) <= band:
                continue
            compared += 1
            eng = Membership.IN if v < -TAU else Membership.OUT
            p = (float(gx[j, i]), float(gy[j, i]))
            orc = oracle.membership(p, n)
            if orc != eng:
                out.append(Disagreement(i, j, p[0], p[1], eng.value, orc.value, v))
    return CompareReport(resolution, n, band, resolution * resolution, compared, out)


def write_disagreements(report: CompareReport, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["i", "j", "x", "y", "engine", "oracle", "signed_distance"])
        for d in report.disagreements:
            w.writerow([d.i, d.j, repr(d.x), repr(d.y), d.engine, d.oracle, repr(d.signed_distance)])
