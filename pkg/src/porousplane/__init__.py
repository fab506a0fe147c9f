"""Planar construction of a lower porous set whose directional porosity collapses along long runs.

Levels H_1 ⊂ H_2 ⊂ ... are unions of capsules around line families. The
package builds them on a padded window and answers exact distance queries on
them. Certified holes come out of constructive walks, and a brute-force
oracle cross-checks the capsule engine.
"""

from .construction import (
    BudgetError, DepthCapError, LevelSet, Membership, QueryOutsideWindow, Window,
    build_up_to, dist_to_H, membership, ball_inside_H, radius, spacing,
)
from .directions import DirectionSchedule, ExplicitSchedule
from .geom import TAU, Capsule, Direction, Interval, Line, Point, Segment

__version__ = "0.1.0"
