"""Command-line front end with build, raster, scan and verify commands.

Every command writes its outputs plus a ``.manifest`` file holding the exact
configuration as ``key=value`` lines; feeding a manifest back through
``--config`` reproduces the outputs byte for byte. Exit codes: 0 success,
1 failed property, 2 usage or configuration error.
"""

from __future__ import annotations

import argparse
import csv
import math
import re
import sys
import time
from dataclasses import dataclass, field, fields
from fractions import Fraction
from typing import Optional

import numpy as np

from . import construction as con
from . import porosity as por
from .construction import Window, radius, spacing
from .directions import DirectionSchedule, ExplicitSchedule
from .geom import TAU, Direction, Point, dist
from .oracle import ORACLE_MAX_DEPTH, compare_fields, write_disagreements

EXIT_OK = 0
EXIT_FAIL = 1
EXIT_USAGE = 2

SUITES = ("boundary", "thick", "hole", "separation", "claim", "oracle")
# interface names accepted on the command line
SUITE_ALIASES = {"lemma42": "boundary", "lemma43": "thick", "thm44": "hole"}


class ConfigError(ValueError):
    pass


_POW = re.compile(r"^([+-]?)(\d+)(?:\^|\*\*)\(?([+-]?\d+)\)?$")


def parse_real(text: str) -> float:
    """Read ``0.25``, ``1/128``, ``2^-12``, ``2**-12`` or a hex float."""
    t = text.strip()
    m = _POW.match(t)
    if m:
        sign = -1.0 if m.group(1) == "-" else 1.0
        return sign * float(Fraction(int(m.group(2))) ** int(m.group(3)))
    if "0x" in t.lower():
        return float.fromhex(t)
    if "/" in t:
        return float(Fraction(t))
    return float(t)


def parse_pair(text: str) -> tuple[float, float]:
    parts = text.split(",")
    if len(parts) != 2:
        raise ConfigError(f"expected 'x,y', got {text!r}")
    return parse_real(parts[0]), parse_real(parts[1])


def _fmt(v: float) -> str:
    return repr(float(v))


@dataclass
class RunConfig:
    """Everything a command needs, validated up front and written next to outputs."""

    command: str = "build"
    depth: int = 2
    center: tuple[float, float] = (0.0, 0.0)
    half_width: float = 1.0 / 32
    margin: float = 0.0
    taper: Optional[float] = None
    schedule: str = "default"
    line_cap: int = con.LINE_CAP
    segment_cap: int = con.SEGMENT_CAP
    levelset: str = ""
    out: str = ""
    resolution: int = 256
    mode: str = ""
    clip: float = 0.0
    point: Optional[tuple[float, float]] = None
    direction: Optional[tuple[float, float]] = None
    scales: tuple[float, ...] = ()
    suite: str = "all"
    samples: int = 1000
    seed: int = 0

    def make_schedule(self):
        if self.schedule == "default":
            return DirectionSchedule()
        if self.schedule.startswith("explicit:"):
            turns = tuple(parse_real(t) for t in self.schedule.split(":", 1)[1].split(","))
            return ExplicitSchedule(turns)
        raise ConfigError(f"unknown schedule {self.schedule!r} (use 'default' or 'explicit:t1,t2,...')")

    def validate(self) -> None:
        c = self.command
        if c == "build":
            if self.depth > con.N_MAX:
                raise ConfigError(f"depth cap exceeded: {self.depth} > {con.N_MAX}")
            if self.depth < 0:
                raise ConfigError("depth must be non-negative")
            if not (self.half_width > 0.0 and math.isfinite(self.half_width)):
                raise ConfigError("half-width must be positive")
            if self.margin < 0.0:
                raise ConfigError("margin must be non-negative")
            if self.taper is not None and not self.taper > 0.0:
                raise ConfigError("taper must be positive")
            if not all(math.isfinite(v) for v in self.center):
                raise ConfigError("center must be finite")
            if self.line_cap < 1 or self.segment_cap < 1:
                raise ConfigError("caps must be positive")
            sched = self.make_schedule()
            if isinstance(sched, ExplicitSchedule) and len(sched) < self.depth:
                raise ConfigError(f"explicit schedule lists {len(sched)} directions, depth {self.depth} needs more")
        else:
            if not self.levelset:
                raise ConfigError("a level-set file is required")
        if not self.out:
            raise ConfigError("--out is required")
        if c == "raster":
            if self.resolution < 1:
                raise ConfigError("resolution must be at least 1")
            if self.mode not in ("membership", "distance"):
                raise ConfigError("raster mode must be 'membership' or 'distance'")
            if self.clip < 0.0:
                raise ConfigError("clip must be non-negative")
        if c == "scan":
            if self.mode not in ("iso", "dir"):
                raise ConfigError("scan mode must be 'iso' or 'dir'")
            if self.point is None:
                raise ConfigError("--point is required")
            if self.mode == "dir" and self.direction is None:
                raise ConfigError("--direction is required in dir mode")
            if self.direction is not None and self.direction == (0.0, 0.0):
                raise ConfigError("direction must be non-zero")
            if not self.scales or not all(s > 0.0 for s in self.scales):
                raise ConfigError("--scales needs positive values")
        if c == "verify":
            self.suite = SUITE_ALIASES.get(self.suite, self.suite)
            if self.suite not in SUITES + ("all",):
                raise ConfigError(f"unknown suite {self.suite!r}; choose from {', '.join(SUITES + ('all',))}")
            if self.samples < 1:
                raise ConfigError("samples must be positive")
            if self.resolution < 1:
                raise ConfigError("resolution must be at least 1")

    def keys(self) -> list[str]:
        common = ["command"]
        per = {
            "build": ["depth", "center", "half_width", "margin", "taper", "schedule", "line_cap", "segment_cap", "out"],
            "raster": ["levelset", "resolution", "mode", "clip", "out"],
            "scan": ["levelset", "mode", "point", "direction", "scales", "out"],
            "verify": ["levelset", "suite", "samples", "seed", "resolution", "out"],
        }
        return common + per[self.command]

    def to_text(self) -> str:
        rows = []
        for k in self.keys():
            v = getattr(self, k)
            if v is None:
                continue
            if isinstance(v, tuple):
                v = ",".join(_fmt(x) for x in v)
            elif isinstance(v, float):
                v = _fmt(v)
            rows.append(f"{k}={v}")
        return "\n".join(rows) + "\n"


_CONVERT = {
    "depth": int, "line_cap": int, "segment_cap": int, "resolution": int, "samples": int, "seed": int,
    "half_width": parse_real, "margin": parse_real, "taper": parse_real, "clip": parse_real,
    "center": parse_pair, "point": parse_pair, "direction": parse_pair,
    "scales": lambda t: tuple(parse_real(v) for v in t.split(",") if v.strip()),
}
_FIELDS = {f.name for f in fields(RunConfig)}


def read_config(path: str) -> dict:
    """Parse a ``key=value`` file, skipping ``result.*`` keys along with blank or ``#`` lines."""
    out = {}
    try:
        fh = open(path, encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    with fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise ConfigError(f"{path}:{lineno}: expected key=value")
            k, v = (s.strip() for s in line.split("=", 1))
            if k.startswith("result."):
                continue
            if k not in _FIELDS:
                raise ConfigError(f"{path}:{lineno}: unknown key {k!r}")
            out[k] = v
    return out


def _coerce(key: str, value):
    if not isinstance(value, str):
        return value
    conv = _CONVERT.get(key, str)
    try:
        return conv(value)
    except (ValueError, ZeroDivisionError) as exc:
        raise ConfigError(f"bad value for {key}: {value!r}") from exc


def make_config(args: argparse.Namespace) -> RunConfig:
    cfg = RunConfig(command=args.command)
    if getattr(args, "config", None):
        for k, v in read_config(args.config).items():
            if k == "command":
                if v != args.command:
                    raise ConfigError(f"config is for '{v}', not '{args.command}'")
                continue
            setattr(cfg, k, _coerce(k, v))
    for k in _FIELDS - {"command"}:
        v = getattr(args, k, None)
        if v is not None:
            setattr(cfg, k, _coerce(k, v))
    cfg.validate()
    return cfg


def write_manifest(cfg: RunConfig, results: dict) -> str:
    path = cfg.out + ".manifest"
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(cfg.to_text())
        for k, v in results.items():
            fh.write(f"result.{k}={v}\n")
    return path


def _load(cfg: RunConfig) -> con.LevelSet:
    try:
        return con.load(cfg.levelset)
    except (OSError, ValueError, StopIteration, IndexError, KeyError) as exc:
        raise ConfigError(f"cannot read level set {cfg.levelset}: {exc}") from exc


# build -------------------------------------------------------------------

def cmd_build(cfg: RunConfig) -> int:
    window = Window(Point(*cfg.center), cfg.half_width, cfg.margin, cfg.taper)
    sched = cfg.make_schedule()
    t0 = time.perf_counter()
    ls = con.empty_levelset(window, sched, cfg.depth, line_cap=cfg.line_cap, segment_cap=cfg.segment_cap)
    timings = []
    for n in range(1, cfg.depth + 1):
        t = time.perf_counter()
        ls = con.build_level(ls, n)
        timings.append(time.perf_counter() - t)
    con.save(ls, cfg.out)
    write_manifest(cfg, {
        "counts": ",".join(str(len(lv)) for lv in ls.levels),
        "lines": ",".join(str(lv.lines_built) for lv in ls.levels),
        "seconds_per_level": ",".join(f"{t:.3f}" for t in timings),
        "seconds_total": f"{time.perf_counter() - t0:.3f}",
        "unchecked_schedule": str(bool(sched.unchecked)).lower(),
    })
    print(f"built depth {ls.depth}: {', '.join(str(len(lv)) for lv in ls.levels)} segments -> {cfg.out}")
    return EXIT_OK


# raster ------------------------------------------------------------------

def raster_bytes(ls: con.LevelSet, resolution: int, mode: str, clip: float = 0.0) -> bytes:
    """Binary PGM of the core window; row 0 is the top edge.

    Pixel (i, j) samples the node ``(x0 + i*pitch, y1 - j*pitch)`` where
    ``x0``/``y1`` are the left/top window edges and ``pitch = 2*hw/resolution``.
    """
    w = ls.window
    n = ls.depth
    pitch = 2.0 * w.half_width / resolution
    idx = np.arange(resolution, dtype=np.float64)
    xs = w.center.x - w.half_width + idx * pitch
    ys = w.center.y + w.half_width - idx * pitch
    gx, gy = np.meshgrid(xs, ys)
    if n == 0:
        sd = np.full(gx.size, np.inf)
    else:
        sd = ls.nearest_line_sd_many(n, gx.ravel(), gy.ravel())
    if mode == "membership":
        px = np.where(sd < -TAU, 0, np.where(sd > TAU, 255, 128)).astype(np.uint8)
    else:
        c = clip if clip > 0.0 else (radius(n) if n else 1.0)
        # far points may be overestimated by the nearest-line shortcut; they clip anyway
        v = np.clip(sd, -c, c)
        px = np.rint((v + c) * (255.0 / (2.0 * c))).astype(np.uint8)
    header = f"P5\n{resolution} {resolution}\n255\n".encode("ascii")
    return header + px.tobytes()


def cmd_raster(cfg: RunConfig) -> int:
    ls = _load(cfg)
    data = raster_bytes(ls, cfg.resolution, cfg.mode, cfg.clip)
    with open(cfg.out, "wb") as fh:
        fh.write(data)
    write_manifest(cfg, {"bytes": len(data)})
    print(f"wrote {cfg.resolution}x{cfg.resolution} {cfg.mode} raster -> {cfg.out}")
    return EXIT_OK


# scan --------------------------------------------------------------------

SCAN_COLUMNS = ["point_x", "point_y", "scale", "hole_radius", "hole_x", "hole_y", "ratio",
                "certificate", "source", "direction_x", "direction_y", "within_scale"]


def scan_rows(records) -> list[list[str]]:
    rows = []
    for r in records:
        d = r.direction
        rows.append([
            _fmt(r.point.x), _fmt(r.point.y), _fmt(r.scale), _fmt(r.best_hole_radius),
            _fmt(r.hole_center.x), _fmt(r.hole_center.y), _fmt(r.ratio), r.certificate, r.source,
            "" if d is None else _fmt(d.ux), "" if d is None else _fmt(d.uy), str(r.within_scale).lower(),
        ])
    return rows


def write_csv(path: str, header: list[str], rows) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)


def cmd_scan(cfg: RunConfig) -> int:
    ls = _load(cfg)
    if ls.depth < 1:
        raise ConfigError("scans need a level set of depth at least 1")
    x = Point(*cfg.point)
    if not ls.window.in_core(x):
        raise ConfigError(f"point {cfg.point} lies outside the core window")
    if cfg.mode == "iso":
        recs = por.porosity_scan(ls, x, cfg.scales)
    else:
        recs = por.directional_scan(ls, x, Direction.from_vector(*cfg.direction), cfg.scales)
    write_csv(cfg.out, SCAN_COLUMNS, scan_rows(recs))
    write_manifest(cfg, {"records": len(recs)})
    for r in recs:
        print(f"scale {r.scale!r}: hole {r.best_hole_radius!r} ratio {r.ratio!r} ({r.certificate})")
    return EXIT_OK


# verify ------------------------------------------------------------------

VERDICT_COLUMNS = ["suite", "case", "n", "x", "y", "passed", "detail"]


@dataclass
class SuiteResult:
    name: str
    rows: list = field(default_factory=list)
    failures: int = 0
    skipped: int = 0
    notes: list = field(default_factory=list)

    def add(self, case, n, p, ok: bool, detail: str = "") -> None:
        x, y = ("", "") if p is None else (_fmt(p[0]), _fmt(p[1]))
        self.rows.append([self.name, str(case), "" if n is None else str(n), x, y,
                          "true" if ok else "false", detail])
        if not ok:
            self.failures += 1

    def skip(self, case, n, p, why: str) -> None:
        x, y = ("", "") if p is None else (_fmt(p[0]), _fmt(p[1]))
        self.rows.append([self.name, str(case), "" if n is None else str(n), x, y, "skipped", why])
        self.skipped += 1


def _reachable(ls: con.LevelSet, x, n: int, walk: float) -> bool:
    """Whether a walk of length ``walk`` from x keeps level-n queries exact."""
    return ls.window.cheb(x) + walk <= ls.window.half_width + ls.window.margin_at(n)


def suite_boundary(ls, samples, seed) -> SuiteResult:
    res = SuiteResult("boundary")
    pts = por.sample_outside(ls, samples, seed)
    for n in range(1, ls.depth + 1):
        bound = 2.0 ** -(6 * n - 1)
        for c, x in enumerate(pts):
            if not _reachable(ls, x, n, 2.0 * spacing(n)):
                res.skip(c, n, x, "walk may leave the built window")
                continue
            try:
                z, case = por.boundary_walk(ls, n, x)
            except Exception as exc:  # every failure mode is a failed case here
                res.add(c, n, x, False, f"{type(exc).__name__}: {exc}")
                continue
            sd = ls.signed_distance(n, z)
            d = dist(x, z)
            ok = abs(sd) <= TAU and d < bound
            res.add(c, n, x, ok, f"case={case} sd={sd!r} dist={d!r}")
    return res


def suite_thick(ls, samples, seed) -> SuiteResult:
    res = SuiteResult("thick")
    for lv in ls.levels:
        exact = lv.radius == 2.0 ** (-6 * (lv.n + 1))
        res.add("radius", lv.n, None, exact, f"radius={lv.radius!r}")
    pts = por.sample_outside(ls, samples, seed)
    for n in range(1, ls.depth + 1):
        rn = radius(n)
        for c, x in enumerate(pts):
            if not _reachable(ls, x, n, 2.0 * spacing(n) + 2.0 * rn):
                res.skip(c, n, x, "walk may leave the built window")
                continue
            try:
                z = por.find_boundary_point(ls, n, x)
                y = por.find_thick_center(ls, n, z)
            except Exception as exc:
                res.add(c, n, x, False, f"{type(exc).__name__}: {exc}")
                continue
            d = dist(z, y)
            ok = d <= rn + TAU and ls.ball_inside_H(n, y, rn - TAU)
            res.add(c, n, z, ok, f"dist={d!r}")
    return res


def suite_hole(ls, samples, seed) -> SuiteResult:
    res = SuiteResult("hole")
    pts = por.sample_outside(ls, samples, seed)
    for n in range(1, ls.depth + 1):
        bound = 2.0 ** -(6 * n - 2)
        for c, x in enumerate(pts):
            if not _reachable(ls, x, n, 2.0 * spacing(n) + 2.0 * radius(n)):
                res.skip(c, n, x, "walk may leave the built window")
                continue
            try:
                y, rho = por.find_hole(ls, n, x)
            except Exception as exc:
                res.add(c, n, x, False, f"{type(exc).__name__}: {exc}")
                continue
            d = dist(x, y)
            ok = rho >= radius(n) - TAU and d < bound and ls.ball_inside_H(n, y, rho)
            res.add(c, n, x, ok, f"radius={rho!r} dist={d!r}")
    return res


def _certified_A_s(ls, z, s) -> bool:
    """Independent re-check of an A_s certificate with exhaustive distances."""
    if ls.signed_distance_exhaustive(ls.depth, z) <= TAU:
        return False
    return ls.signed_distance_exhaustive(s, z) > por.a_s_threshold(s)


# boundary walk (2 spacings) plus side steps and the landing on the next level
A_S_WALK = 2.5


def suite_separation(ls, samples, seed, n: int = 1) -> SuiteResult:
    res = SuiteResult("separation")
    if ls.depth < n + 1:
        raise ConfigError(f"separation suite needs depth >= {n + 1}")
    bound = spacing(n - 1)
    pts = por.sample_outside(ls, samples, seed)
    exhausted = tried = 0
    for c, w in enumerate(pts):
        if not _reachable(ls, w, ls.depth, A_S_WALK * spacing(n)):
            res.skip(c, n, w, "walk may leave the built window")
            continue
        tried += 1
        try:
            z, s = por.find_A_s_point(ls, w, n)
        except por.DepthExhausted as exc:
            exhausted += 1
            res.rows.append([res.name, str(c), str(n), _fmt(w[0]), _fmt(w[1]), "exhausted", str(exc)])
            continue
        except Exception as exc:
            res.add(c, n, w, False, f"{type(exc).__name__}: {exc}")
            continue
        d = dist(w, z)
        ok = d < bound and _certified_A_s(ls, z, s)
        res.add(c, n, z, ok, f"s={s} dist={d!r}")
    frac = exhausted / tried if tried else 0.0
    res.notes.append(f"exhausted={exhausted}/{tried}")
    res.add("exhausted-fraction", n, None, frac <= 0.05, f"{exhausted}/{tried}")
    return res


def _longest_run(sched, start: int, depth: int) -> int:
    j = sched.index_at(start + 1)
    N = 0
    while start + N + 1 <= depth and sched.has_run(j, start, N + 1):
        N += 1
    return N


def suite_claim(ls, samples, seed, n: int = 1, points: int = 4) -> SuiteResult:
    res = SuiteResult("claim")
    if ls.depth < n + 1:
        raise ConfigError(f"claim suite needs depth >= {n + 1}")
    N = _longest_run(ls.schedule, n, ls.depth)
    if N < 1:
        raise ConfigError("schedule has no run after level 1")
    found = reachable = 0
    for c, w in enumerate(por.sample_outside(ls, 50 * points, seed)):
        if found == points:
            break
        if not _reachable(ls, w, ls.depth, A_S_WALK * spacing(n)):
            continue
        reachable += 1
        try:
            z, s = por.find_A_s_point(ls, w, n)
        except (por.DepthExhausted, por.PreconditionError, con.QueryOutsideWindow):
            continue
        if s != n:
            continue
        rep = por.claim_check(ls, z, n, N, sample_count=samples, seed=seed + c)
        if rep.degenerate:
            continue
        found += 1
        res.add(c, n, z, rep.ok,
                f"N={N} pairs={rep.samples_tested} translation={rep.translation_violations} "
                f"separation={rep.separation_violations}/{rep.separation_cases} min_sep={rep.min_separation!r}")
    if reachable == 0:
        res.skip("points", n, None, "window margin too small for the A_1 search")
    elif found == 0:
        res.add("points", n, None, False, "no A_1 point found for the claim check")
    return res


def suite_oracle(ls, resolution: int, report_path: Optional[str] = None) -> SuiteResult:
    res = SuiteResult("oracle")
    if ls.depth > ORACLE_MAX_DEPTH:
        raise ConfigError(f"oracle suite supports depth <= {ORACLE_MAX_DEPTH}")
    rep = compare_fields(ls, resolution)
    if report_path:
        write_disagreements(rep, report_path)
    for d in rep.disagreements:
        res.add(f"{d.i}:{d.j}", ls.depth, (d.x, d.y), False, f"engine={d.engine} oracle={d.oracle}")
    res.add("grid", ls.depth, None, rep.ok,
            f"compared={rep.compared}/{rep.cells} band={rep.band!r} disagreements={len(rep.disagreements)}")
    return res


def run_suite(name: str, ls, cfg: RunConfig) -> SuiteResult:
    if name == "boundary":
        return suite_boundary(ls, cfg.samples, cfg.seed)
    if name == "thick":
        return suite_thick(ls, cfg.samples, cfg.seed)
    if name == "hole":
        return suite_hole(ls, cfg.samples, cfg.seed)
    if name == "separation":
        return suite_separation(ls, cfg.samples, cfg.seed)
    if name == "claim":
        return suite_claim(ls, cfg.samples, cfg.seed)
    if name == "oracle":
        return suite_oracle(ls, cfg.resolution, cfg.out + ".oracle.csv")
    raise ConfigError(f"unknown suite {name!r}")


def cmd_verify(cfg: RunConfig) -> int:
    ls = _load(cfg)
    if ls.depth < 1:
        raise ConfigError("verification needs a level set of depth at least 1")
    names = SUITES if cfg.suite == "all" else (cfg.suite,)
    if cfg.suite == "all":
        names = tuple(s for s in names if not (s == "oracle" and ls.depth > ORACLE_MAX_DEPTH))
        names = tuple(s for s in names if not (s in ("separation", "claim") and ls.depth < 2))
    results = [run_suite(s, ls, cfg) for s in names]
    rows = [r for res in results for r in res.rows]
    write_csv(cfg.out, VERDICT_COLUMNS, rows)
    summary = {}
    for res in results:
        passed = sum(1 for r in res.rows if r[5] == "true")
        summary[res.name] = f"passed={passed} failed={res.failures} skipped={res.skipped}"
        extra = f" ({'; '.join(res.notes)})" if res.notes else ""
        print(f"{res.name}: {'PASS' if not res.failures else 'FAIL'} {summary[res.name]}{extra}")
    summary["rng"] = "numpy.random.default_rng"
    write_manifest(cfg, summary)
    return EXIT_FAIL if any(res.failures for res in results) else EXIT_OK


# entry point -------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="porousplane", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("--config", help="key=value file; flags override its entries")
        sp.add_argument("--out", help="output path")

    b = sub.add_parser("build", help="build H_1..H_depth on a window and dump it")
    common(b)
    b.add_argument("--depth", help=f"number of levels (at most {con.N_MAX})")
    b.add_argument("--center", help="window center as x,y")
    b.add_argument("--half-width", dest="half_width", help="half side of the square core window")
    b.add_argument("--margin", help="extra room around the core for walks and scans")
    b.add_argument("--taper", help="limit level-n room to taper * 2^-6n (keeps deep levels small)")
    b.add_argument("--schedule", help="'default' or 'explicit:t1,t2,...' (directions in turns)")
    b.add_argument("--line-cap", dest="line_cap")
    b.add_argument("--segment-cap", dest="segment_cap")

    r = sub.add_parser("raster", help="render a level set as a binary PGM")
    r.add_argument("levelset", nargs="?")
    common(r)
    r.add_argument("--resolution", help="pixels per side")
    r.add_argument("--mode", help="membership or distance")
    r.add_argument("--clip", help="distance mode: clip signed distances to [-clip, clip]")

    s = sub.add_parser("scan", help="isotropic or directional porosity scan at a point")
    s.add_argument("levelset", nargs="?")
    common(s)
    s.add_argument("--mode", help="iso or dir")
    s.add_argument("--point", help="x,y inside the core window")
    s.add_argument("--direction", help="x,y direction vector for dir mode")
    s.add_argument("--scales", help="comma list, e.g. 2^-12,2^-9")

    v = sub.add_parser("verify", help="run a property suite and write a verdict CSV")
    v.add_argument("levelset", nargs="?")
    common(v)
    v.add_argument("--suite", help=", ".join(SUITES + ("all",)) + " (aliases: " + ", ".join(SUITE_ALIASES) + ")")
    v.add_argument("--samples")
    v.add_argument("--seed")
    v.add_argument("--resolution", help="grid size for the oracle suite")
    return p


COMMANDS = {"build": cmd_build, "raster": cmd_raster, "scan": cmd_scan, "verify": cmd_verify}


def main(argv: Optional[list[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_USAGE
    try:
        cfg = make_config(args)
        return COMMANDS[cfg.command](cfg)
    except (ConfigError, con.BudgetError, con.DepthCapError, con.QueryOutsideWindow,
            por.ScaleBudgetError, por.PreconditionError, OSError, ValueError, IndexError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except Exception as exc:  # anything else is reported as a failure, never a stray code
        print(f"failure: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
