import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import run_window
from porousplane import porosity as por
from porousplane.construction import Membership, Window, build_up_to, radius, spacing
from porousplane.directions import ExplicitSchedule
from porousplane.geom import TAU, Direction, Point, dist
from porousplane.oracle import BruteForceOracle

X0 = (0.0, 1 / 128)


# ---- boundary points --------------------------------------------------------

def test_boundary_point_above_a_horizontal_line(h1):
    z = por.find_boundary_point(h1, 1, X0)
    assert z == (0.0, 2.0**-12)
    assert dist(X0, z) == 31 / 4096 < 2.0**-5


def test_boundary_point_is_identity_on_the_boundary(h1):
    x = (0.01, 2.0**-12)
    assert por.boundary_walk(h1, 1, x) == (x, 0)


def test_boundary_point_needs_an_outside_point(h1):
    with pytest.raises(por.PreconditionError):
        por.find_boundary_point(h1, 1, (0.0, 0.0))


@pytest.mark.parametrize("name", ["h2", "mixed3"])
def test_boundary_points_on_random_outside_points(name, request):
    ls = request.getfixturevalue(name)
    cases = set()
    for n in range(1, ls.depth + 1):
        for x in por.sample_outside(ls, 300, 21, n=ls.depth):
            if ls.window.cheb(x) + 2 * spacing(n) > ls.window.half_width + ls.window.margin_at(n):
                continue
            z, case = por.boundary_walk(ls, n, x)
            cases.add(case)
            assert abs(ls.signed_distance(n, z)) <= TAU
            assert dist(x, z) < 2.0 ** -(6 * n - 1)
    assert 1 in cases
    if name == "mixed3":
        # crossing directions make the walk detour around earlier capsules
        assert 2 in cases


# ---- thick centers and holes ------------------------------------------------

def test_thick_center_of_axis_point_is_itself(h1):
    y = por.find_thick_center(h1, 1, (0.003, 0.0))
    assert dist(y, (0.003, 0.0)) <= TAU


def test_thick_center_of_boundary_point_is_its_foot(h1):
    y = por.find_thick_center(h1, 1, (0.003, 2.0**-12))
    assert y.y == 0.0 and abs(y.x - 0.003) <= TAU
    assert dist(y, (0.003, 2.0**-12)) <= 2.0**-12 + TAU


def test_thick_center_refuses_outside_points(h1):
    with pytest.raises(por.PreconditionError):
        por.find_thick_center(h1, 1, X0)


def test_thick_centers_on_closure_points(h2):
    for n in (1, 2):
        for x in por.sample_outside(h2, 500, 4):
            z = por.find_boundary_point(h2, n, x)
            y = por.find_thick_center(h2, n, z)
            assert dist(z, y) <= radius(n) + TAU
            assert h2.ball_inside_H(n, y, radius(n) - TAU)


def test_hole_below_the_example_point(h1):
    z, rho = por.find_hole(h1, 1, X0)
    assert z == (0.0, 0.0)
    assert rho == 2.0**-12 - TAU
    assert dist(X0, z) == 1 / 128 < 2.0**-4


def test_hole_from_a_point_one_radius_above_the_boundary(h1):
    z, rho = por.find_hole(h1, 1, (0.0, 2.0**-11))
    assert rho == 2.0**-12 - TAU and dist((0.0, 2.0**-11), z) < 2.0**-4


def test_hole_ratio_against_its_distance_bound():
    for n in (1, 2, 3):
        assert (radius(n) - TAU) / 2.0 ** -(6 * n - 2) >= 2.0**-8 * (1 - 2.0**-14)


def test_holes_on_random_points(mixed3):
    for n in (1, 2, 3):
        for x in por.sample_outside(mixed3, 200, 9):
            y, rho = por.find_hole(mixed3, n, x)
            assert rho == radius(n) - TAU
            assert dist(x, y) < 2.0 ** -(6 * n - 2)
            assert mixed3.ball_certificate(n, y, rho) == "single"


# ---- scanners -----------------------------------------------------------------

def test_isotropic_scan_at_the_example_point(h1):
    (rec,) = por.porosity_scan(h1, X0, [2.0**-6])
    assert rec.best_hole_radius == 2.0**-12 - TAU
    assert rec.ratio == (2.0**-12 - TAU) / 2.0**-6
    assert rec.hole_center == (0.0, 0.0) and rec.within_scale
    assert rec.certificate == "single"


def test_scan_scale_budget(h1):
    with pytest.raises(por.ScaleBudgetError):
        por.porosity_scan(h1, X0, [2.0**-4])
    with pytest.raises(por.ScaleBudgetError):
        por.directional_scan(h1, X0, Direction(1.0, 0.0), [0.0])


def test_scan_needs_an_outside_point(h1):
    with pytest.raises(por.PreconditionError):
        por.porosity_scan(h1, (0.0, 0.0), [2.0**-8])


def test_scan_ratios_across_a_factor_64_in_scale(h2):
    lo = 1.0 / 32 - 2.0**-7
    pts = [p for p in por.sample_outside(h2, 400, 2) if h2.window.cheb(p) <= lo][:100]
    assert len(pts) == 100
    for p in pts:
        a, b = por.porosity_scan(h2, p, [2.0**-8, 2.0**-14])
        assert a.ratio > 0 and b.ratio > 0
        assert 1 / 64 < a.ratio / b.ratio < 64


def test_directional_scan_parallel_and_perpendicular(h1):
    (iso,) = por.porosity_scan(h1, X0, [2.0**-6])
    (par,) = por.directional_scan(h1, X0, Direction(1.0, 0.0), [2.0**-6])
    (perp,) = por.directional_scan(h1, X0, Direction(0.0, 1.0), [2.0**-6])
    assert par.best_hole_radius <= 31 / 4096 + TAU
    assert par.ratio < iso.ratio
    assert perp.ratio == pytest.approx(iso.ratio, rel=1e-9)
    assert perp.hole_center.x == 0.0 and abs(perp.hole_center.y) <= TAU


def test_directional_holes_lie_on_the_scan_line(mixed3):
    v = Direction.from_turns(0.3)
    for p in por.sample_outside(mixed3, 30, 12, slack=2.0**-11):
        for rec in por.directional_scan(mixed3, p, v, [2.0**-12, 2.0**-15]):
            assert rec.ratio >= 0.0
            off = (rec.hole_center.x - p.x) * -v.uy + (rec.hole_center.y - p.y) * v.ux
            assert abs(off) < 1e-15
            assert rec.center_distance < rec.scale
            if rec.best_hole_radius:
                assert mixed3.ball_inside_H(3, rec.hole_center, rec.best_hole_radius)


def test_scans_are_deterministic(mixed3):
    p = por.sample_outside(mixed3, 1, 3)[0]
    top = por.r0_budget(mixed3, p)
    a = por.porosity_scan(mixed3, p, [top, top / 64])
    b = por.porosity_scan(mixed3, p, [top, top / 64])
    assert a == b


def test_bracket_levels():
    assert por.bracket_level(2.0**-6) == 1
    assert por.bracket_level(2.0**-9) == 1
    assert por.bracket_level(2.0**-12) == 2
    assert por.bracket_level(0.5) == 0
    with pytest.raises(ValueError):
        por.bracket_level(0.0)


# ---- A_s and G ------------------------------------------------------------------

def test_A_s_closed_forms(h1):
    assert por.a_s_threshold(1) == 3 * 2.0**-12
    assert por.is_in_A_s(h1, X0, 1)
    assert not por.is_in_A_s(h1, (0.0, 2.0**-12), 1)
    with pytest.raises(ValueError):
        por.is_in_A_s(h1, X0, 2)


def test_A_s_agrees_with_oracle_distances(h2):
    orc = BruteForceOracle(h2.schedule, 2)
    thr = por.a_s_threshold(1)
    checked = 0
    for x in por.sample_outside(h2, 300, 17):
        d = orc.distance(x, 1, 4 * thr)
        if abs(d - thr) <= 2 * orc.pitch:
            continue
        checked += 1
        assert por.is_in_A_s(h2, x, 1) == (d > thr)
    assert checked > 250


@settings(max_examples=200, deadline=None)
@given(st.floats(0.0, 1.0), st.floats(0.0, 2 * math.pi))
def test_A_s_is_open(frac, ang):
    ls = _h2_local()
    x = Point(0.0021, 1 / 128 - 2.0**-13)
    margin = ls.dist_to_H(1, x) - por.a_s_threshold(1)
    assert por.is_in_A_s(ls, x, 1) and margin > 0
    step = frac * margin / 2 * (1 - 2.0**-30)
    y = (x.x + step * math.cos(ang), x.y + step * math.sin(ang))
    if ls.membership(2, y) == Membership.OUT:
        assert por.is_in_A_s(ls, y, 1)


_CACHE = {}


def _h2_local():
    if "h2" not in _CACHE:
        _CACHE["h2"] = build_up_to(2, Window((0.0, 0.0), 1 / 32, 2.0**-5 + 2.0**-7),
                                   ExplicitSchedule((0.0, 0.0)))
    return _CACHE["h2"]


def test_A_s_point_from_the_example_neighbourhood(h2):
    # (0, 1/128) itself sits on a kept level-2 line here, so start half a spacing off it
    w = (0.0, 1 / 128 + 2.0**-13)
    z, s = por.find_A_s_point(h2, w, 1)
    assert s == 1 and dist(w, z) < 1.0
    assert por.is_in_A_s(h2, z, 1)
    assert abs(h2.signed_distance(2, z) - 2 * TAU) <= TAU


def test_A_s_point_needs_depth(h1):
    with pytest.raises(por.DepthExhausted):
        por.find_A_s_point(h1, X0, 1)


def test_A_s_points_are_certified(h2):
    for w in por.sample_outside(h2, 60, 31):
        z, s = por.find_A_s_point(h2, w, 1)
        assert dist(w, z) < 1.0
        assert h2.signed_distance_exhaustive(2, z) > TAU
        assert h2.signed_distance_exhaustive(s, z) > por.a_s_threshold(s)


def test_G_verdicts(h2):
    sched = h2.schedule
    w = (0.0, 1 / 128 + 2.0**-13)
    z, s = por.find_A_s_point(h2, w, 1)
    assert sched.has_run(0, 1, 1)
    assert por.is_in_G(h2, sched, z, 0, 1) == por.GVerdict.TRUE
    assert por.is_in_G(h2, sched, z, 0, 2) == por.GVerdict.UNDECIDED
    assert por.is_in_G(h2, sched, (0.0, 0.0), 0, 1) == por.GVerdict.FALSE
    assert por.is_in_G(h2, sched, z, 5, 1) == por.GVerdict.UNDECIDED


# ---- claim ------------------------------------------------------------------------

@pytest.fixture(scope="module")
def vertical_run3():
    return build_up_to(3, run_window(), ExplicitSchedule((0.0, 0.25, 0.25)))


def a1_points(ls, count, seed):
    out = []
    for w in por.sample_outside(ls, 20 * count, seed, slack=ls.window.half_width / 2):
        try:
            z, s = por.find_A_s_point(ls, w, 1)
        except por.DepthExhausted:
            continue
        if s == 1:
            out.append(z)
        if len(out) == count:
            break
    return out


@pytest.mark.parametrize("name", ["vertical_run3", "run3"])
def test_claim_holds_on_run_schedules(name, request):
    ls = request.getfixturevalue(name)
    for z in a1_points(ls, 3, 6):
        rep = por.claim_check(ls, z, 1, 2, sample_count=2000, seed=1)
        assert rep.ok, rep
        assert rep.samples_tested == 4000
        assert rep.separation_cases > 0
        assert rep.min_separation >= spacing(2) - radius(2)


def test_claim_preconditions(run3, h2):
    with pytest.raises(por.PreconditionError):
        por.claim_check(run3, (0.0003, 2.0**-12 + 2.0**-14), 1, 2)
    with pytest.raises(por.PreconditionError):
        por.claim_check(run3, (0.0, 0.0), 1, 3)
    w = (0.0, 1 / 128 + 2.0**-13)
    z, _ = por.find_A_s_point(h2, w, 1)
    with pytest.raises(por.PreconditionError):
        por.claim_check(h2, z, 1, 2)


def test_claim_reports_a_collapsed_rectangle(vertical_run3, monkeypatch):
    # a point on a vertical level-2 line; skip the A_1 precondition to reach the degenerate branch
    p = (17 * 2.0**-12, 0.0005)
    monkeypatch.setattr(por, "is_in_A_s", lambda *args: True)
    rep = por.claim_check(vertical_run3, p, 1, 2)
    assert rep.degenerate and not rep.ok


def test_sample_outside_is_seeded(mixed3):
    a = por.sample_outside(mixed3, 50, 5)
    assert a == por.sample_outside(mixed3, 50, 5)
    assert a != por.sample_outside(mixed3, 50, 6)
    assert all(mixed3.membership(3, p) == Membership.OUT for p in a)
