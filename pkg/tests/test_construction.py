import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from porousplane import construction as con
from porousplane.construction import (
    BudgetError, DepthCapError, Membership, QueryOutsideWindow, Window, build_level, build_up_to,
    check_invariants, empty_levelset, line_family, radius, spacing,
)
from porousplane.directions import DirectionSchedule, ExplicitSchedule
from porousplane.geom import TAU

DEFAULT = DirectionSchedule()


def core_points(ls, count, seed):
    rng = np.random.default_rng(seed)
    w = ls.window
    xs = w.center.x + rng.uniform(-w.half_width, w.half_width, count)
    ys = w.center.y + rng.uniform(-w.half_width, w.half_width, count)
    return list(zip(xs.tolist(), ys.tolist()))


# ---- constants and line families ------------------------------------------

def test_level_constants_are_exact_powers_of_two():
    for n in range(1, 5):
        assert spacing(n) == math.ldexp(1.0, -6 * n)
        assert radius(n) == math.ldexp(1.0, -6 * (n + 1))


def test_level_one_family_on_a_padded_square():
    fam = line_family(1, Window((0, 0), 1 / 16, 1 / 32), DEFAULT, extent=1 / 16 + 1 / 32)
    assert [k for k, _ in fam] == list(range(-6, 7))
    for k, line in fam:
        assert tuple(line.direction) == (1.0, 0.0)
        assert line.offset == k / 64


def test_level_two_family_count():
    fam = line_family(2, Window((0, 0), 1 / 16, 1 / 32), DEFAULT, extent=1 / 16 + 1 / 32)
    assert len(fam) == 2 * (3 / 32) * 2**12 + 1


def test_line_zero_passes_through_origin():
    for n in (1, 2, 3):
        fam = dict(line_family(n, Window((0.001, -0.002), 2.0**-12), ExplicitSchedule((0.1, 0.3, 0.7)),
                               extent=0.01))
        assert fam[0].offset == 0.0
        assert fam[0].signed_offset((0.0, 0.0)) == 0.0


def test_line_cap_is_enforced():
    with pytest.raises(BudgetError):
        line_family(3, Window((0, 0), 1 / 32), DEFAULT, line_cap=1000)
    with pytest.raises(BudgetError):
        build_up_to(2, Window((0, 0), 1 / 32), DEFAULT, line_cap=100)


def test_padding_grows_outward_for_shallow_levels():
    w = Window((0, 0), 1 / 32, 0.01)
    ext = [w.level_extent(m, 3) for m in (1, 2, 3)]
    assert ext[0] > ext[1] > ext[2] > w.half_width + w.margin
    assert w.pad(3) == ext[0] - w.half_width


def test_taper_limits_room_of_deep_levels():
    w = Window((0, 0), 1 / 32, 0.05, taper=2.0)
    assert w.margin_at(1) == 2.0 * spacing(1)
    assert w.margin_at(3) == 2.0 * spacing(3)
    assert Window((0, 0), 1 / 32, 0.05).margin_at(3) == 0.05


# ---- building ----------------------------------------------------------------

def test_empty_set_everything_outside():
    ls = build_up_to(0, Window((0, 0), 1 / 32), DEFAULT)
    assert ls.depth == 0 and ls.capsule_count() == 0
    assert ls.membership(0, (0.0, 0.0)) == Membership.OUT
    assert ls.signed_distance(0, (0.01, 0.01)) == math.inf


def test_first_level_keeps_whole_lines(h1):
    lv = h1.level(1)
    assert len(lv) == lv.lines_built
    assert lv.radius == 2.0**-12
    assert np.all(lv.lo == lv.lo[0]) and np.all(lv.hi == lv.hi[0])


def test_depth_cap():
    with pytest.raises(DepthCapError, match="depth cap exceeded"):
        build_up_to(5, Window((0, 0), 2.0**-20), DEFAULT)
    ls = build_up_to(4, Window((0, 0), 2.0**-14), DEFAULT)
    with pytest.raises(DepthCapError):
        build_level(ls, 5)


def test_levels_are_added_in_order():
    ls = empty_levelset(Window((0, 0), 1 / 32), DEFAULT, 2)
    with pytest.raises(ValueError):
        build_level(ls, 2)


def test_crossing_lines_get_gaps_around_earlier_capsules(cross2):
    """Vertical level-2 lines lose |y - j/64| < 2^-12 + 2^-12 - TAU around each level-1 line."""
    lv = cross2.level(2)
    assert tuple(lv.direction) == (0.0, 1.0)
    gap = 2.0**-12 + 2.0**-12 - TAU
    for k in (-5, 0, 17):
        sel = lv.k == k
        lo, hi = lv.lo[sel], lv.hi[sel]
        # interior piece ends sit on the inflated level-1 capsules
        for a, b in zip(hi[:-1].tolist(), lo[1:].tolist()):
            j = round((a + b) / 2 * 64)
            assert a == pytest.approx(j / 64 - gap, abs=1e-15)
            assert b == pytest.approx(j / 64 + gap, abs=1e-15)


def test_default_depth_two_counts_golden():
    ls = build_up_to(2, Window((0, 0), 1 / 32), DEFAULT)
    assert [len(lv) for lv in ls.levels] == [21, 258]
    assert [lv.lines_built for lv in ls.levels] == [21, 273]


def test_build_is_deterministic(mixed3):
    again = build_up_to(3, mixed3.window, mixed3.schedule)
    assert con.dumps(again) == con.dumps(mixed3)


@pytest.mark.parametrize("name", ["h2", "cross2", "mixed3", "run3"])
def test_structural_invariants(name, request):
    ls = request.getfixturevalue(name)
    assert check_invariants(ls, samples_per_segment=6, max_segments=1500) == []


def test_radii_bit_exact(mixed3):
    for lv in mixed3.levels:
        assert lv.radius == 2.0 ** (-6 * (lv.n + 1))
        assert all(c.radius == lv.radius for c in lv.capsules()[:50])


def test_axes_lie_on_their_lines(mixed3):
    for lv in mixed3.levels:
        nrm = lv.direction.perp
        for k, seg in zip(lv.k.tolist()[:500], lv.segments()[:500]):
            for p in (seg.a, seg.b):
                assert abs(p.x * nrm.ux + p.y * nrm.uy - k * lv.spacing) < 1e-12


def test_exclusion_distance_on_sampled_axis_points(mixed3):
    rng = np.random.default_rng(3)
    for n in (2, 3):
        lv = mixed3.level(n)
        for i in rng.choice(len(lv), 40, replace=False).tolist():
            s = lv.segments()[i]
            for f in np.linspace(0.0, 1.0, 100).tolist():
                p = (s.a.x + f * (s.b.x - s.a.x), s.a.y + f * (s.b.y - s.a.y))
                if mixed3.window.cheb(p) > mixed3.window.query_reach(n - 1):
                    continue
                assert mixed3.dist_to_H(n - 1, p) >= spacing(n) - 2 * TAU


# ---- queries -------------------------------------------------------------------

def test_distance_closed_forms(h1):
    assert h1.dist_to_H(1, (0.0, 1 / 128)) == 31 / 4096
    assert con.dist_to_H(h1, 1, (0.0, 0.0)) == 0.0
    assert h1.signed_distance(1, (0.0, 0.0)) == -(2.0**-12)


def test_membership_examples(h1):
    assert con.membership(h1, 1, (0.0, 2.0**-13)) == Membership.IN
    assert con.membership(h1, 1, (0.0, 1 / 128)) == Membership.OUT
    assert con.membership(h1, 1, (0.0, 2.0**-12)) == Membership.BOUNDARY


def test_ball_inside_examples(h1):
    assert con.ball_inside_H(h1, 1, (0.0, 0.0), 2.0**-12 - TAU)
    assert not con.ball_inside_H(h1, 1, (0.0, 1 / 128), 1e-9)
    # grazing: centre distance + radius equals the capsule radius exactly
    assert not con.ball_inside_H(h1, 1, (0.0, 0.0), 2.0**-12)
    assert not con.ball_inside_H(h1, 1, (0.0, 2.0**-13), 2.0**-13)
    assert con.ball_inside_H(h1, 1, (0.0, 2.0**-13), 2.0**-13 - TAU)


def test_sampled_certificate_for_balls_spanning_two_capsules(h1):
    # inflated level-1 capsules overlap; a ball between two lines needs both of them
    fat = con.with_radius_scale(h1, 1, 300.0)
    R = fat.level(1).radius
    c, r = (0.0, 1 / 128), R - 1 / 128 + 2.0**-9
    assert fat.ball_certificate(1, c, r) == "sampled"
    assert fat.ball_certificate(1, (0.0, 0.0), R / 2) == "single"
    assert h1.ball_certificate(1, c, r) == "none"


def test_queries_outside_window_are_refused(h2):
    with pytest.raises(QueryOutsideWindow):
        h2.signed_distance(2, (1.0, 0.0))
    with pytest.raises(ValueError):
        h2.signed_distance(3, (0.0, 0.0))
    with pytest.raises(ValueError):
        h2.signed_distance(1, (math.nan, 0.0))


def test_index_matches_exhaustive_scan_bitwise(mixed3, h2):
    for ls in (mixed3, h2):
        for p in core_points(ls, 5000, 11):
            for n in range(1, ls.depth + 1):
                assert ls.signed_distance(n, p) == ls.signed_distance_exhaustive(n, p)


def test_distance_monotone_in_level(mixed3):
    for p in core_points(mixed3, 2000, 5):
        d = [mixed3.dist_to_H(n, p) for n in (1, 2, 3)]
        assert d[0] >= d[1] >= d[2]


@settings(max_examples=200, deadline=None)
@given(st.floats(-1.0, 1.0), st.floats(-1.0, 1.0))
def test_batch_membership_agrees_with_scalar(fx, fy):
    from conftest import run_window
    ls = build_up_to(2, run_window(), ExplicitSchedule((0.0, 0.16)))
    w = ls.window
    p = (w.center.x + fx * w.half_width, w.center.y + fy * w.half_width)
    batch = ls.membership_many(2, np.array([p[0]]), np.array([p[1]]))[0]
    assert batch == ls.membership(2, p)
    sd = ls.signed_distance(2, p)
    assert batch == con.classify(sd)


def test_nearest_line_shortcut_exact_near_the_set(mixed3):
    pts = core_points(mixed3, 3000, 8)
    xs, ys = np.array(pts).T
    fast = mixed3.nearest_line_sd_many(3, xs, ys)
    for p, f in zip(pts, fast.tolist()):
        sd = mixed3.signed_distance(3, p)
        assert f >= sd
        if sd < spacing(3) / 4:
            assert f == sd


# ---- serialization and fault injection ----------------------------------------

def test_dump_roundtrip(mixed3):
    text = con.dumps(mixed3)
    back = con.loads(text)
    assert con.dumps(back) == text
    assert back.window == mixed3.window and back.schedule == mixed3.schedule
    for a, b in zip(mixed3.levels, back.levels):
        assert np.array_equal(a.k, b.k) and np.array_equal(a.lo, b.lo) and np.array_equal(a.hi, b.hi)


def test_dump_rejects_foreign_text():
    with pytest.raises(ValueError):
        con.loads("hello 1\n")


def test_save_and_load(tmp_path, h2):
    path = tmp_path / "h2.lvl"
    con.save(h2, path)
    assert con.dumps(con.load(path)) == con.dumps(h2)


def test_radius_scaling_changes_only_queries(h1):
    bad = con.with_radius_scale(h1, 1, 2.0)
    assert bad.signed_distance(1, (0.0, 0.0)) == -(2.0**-11)
    assert h1.signed_distance(1, (0.0, 0.0)) == -(2.0**-12)


def test_iter_capsules_covers_every_level(h2):
    got = list(con.iter_capsules(h2))
    assert len(got) == h2.capsule_count()
    assert {n for n, _ in got} == {1, 2}
