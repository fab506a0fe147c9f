"""Direction sequences with arbitrarily long constant runs.

The default schedule enumerates base directions ``d_j`` at angles
``2*pi*vdc2(j)`` (base-2 van der Corput) and lays out blocks ``(j, L)`` in
diagonal order (0,1), (0,2), (1,1), (0,3), (1,2), (2,1), ...; block ``(j, L)``
contributes ``L`` consecutive copies of ``d_j``. Every direction in the dense
set therefore recurs in runs of every length.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

from .geom import Direction


def vdc2(j: int) -> Fraction:
    """Base-2 van der Corput radical inverse of ``j`` as an exact fraction."""
    if j < 0:
        raise ValueError("index must be non-negative")
    num, den = 0, 1
    while j:
        num = 2 * num + (j & 1)
        den *= 2
        j >>= 1
    return Fraction(num, den)


def _diag_start(D: int) -> int:
    # number of sequence positions covered by diagonals 1..D-1
    return (D - 1) * D * (D + 1) // 6


def block_of(n: int) -> tuple[int, int, int]:
    """Block ``(j, L)`` containing position ``n`` and the block's first position."""
    if n < 1:
        raise ValueError("positions start at 1")
    lo, hi = 1, 2
    while _diag_start(hi + 1) < n:
        hi *= 2
    # largest D with _diag_start(D) < n
    while lo < hi:
        mid = (lo + hi + 1) // 2
        if _diag_start(mid) < n:
            lo = mid
        else:
            hi = mid - 1
    D = lo
    pos = _diag_start(D) + 1
    for j in range(D):
        L = D - j
        if n < pos + L:
            return j, L, pos
        pos += L
    raise AssertionError("unreachable")


def block_start(j: int, L: int) -> int:
    """First position of block ``(j, L)``."""
    if j < 0 or L < 1:
        raise ValueError("need j >= 0 and L >= 1")
    D = j + L
    pos = _diag_start(D) + 1
    # blocks (0, D), (1, D-1), ..., (j-1, L+1) precede (j, L)
    pos += sum(D - i for i in range(j))
    return pos


@dataclass(frozen=True)
class DirectionSchedule:
    """The default dense schedule (van der Corput angles, diagonal blocks)."""

    angle_rule: str = "vdc2"
    block_order: str = "diagonal"
    unchecked: bool = field(default=False, init=False)

    def __post_init__(self):
        if self.angle_rule != "vdc2" or self.block_order != "diagonal":
            raise ValueError(f"unknown schedule {self.angle_rule}/{self.block_order}")

    def base_turns(self, j: int) -> Fraction:
        return vdc2(j)

    def base_direction(self, j: int) -> Direction:
        return Direction.from_turns(float(vdc2(j)))

    def index_at(self, n: int) -> int:
        """Base index ``j`` with ``direction_at(n) == d_j``."""
        return block_of(n)[0]

    def direction_at(self, n: int) -> Direction:
        return self.base_direction(self.index_at(n))

    def run_location(self, j: int, L: int) -> int:
        """``n`` such that positions ``n+1 .. n+L`` hold ``d_j``.

        This is the position just before block ``(j, L)``, the first block of
        ``d_j`` with length at least ``L``.
        """
        return block_start(j, L) - 1

    def has_run(self, j: int, start: int, length: int) -> bool:
        return all(self.index_at(start + i) == j for i in range(1, length + 1))

    def params(self) -> dict:
        return {"schedule": "default", "angle_rule": self.angle_rule, "block_order": self.block_order}


@dataclass(frozen=True)
class ExplicitSchedule:
    """A finite, user-supplied list of directions (as turns) for n = 1, 2, ...

    Not dense and without long runs in general, hence flagged ``unchecked``.
    Base index ``j`` counts distinct turn values in order of first appearance.
    """

    turns: tuple[float, ...]
    unchecked: bool = field(default=True, init=False)

    def __post_init__(self):
        if not self.turns:
            raise ValueError("explicit schedule needs at least one direction")
        object.__setattr__(self, "turns", tuple(float(t) for t in self.turns))

    @property
    def _distinct(self) -> list[float]:
        seen: list[float] = []
        for t in self.turns:
            if t not in seen:
                seen.append(t)
        return seen

    def __len__(self) -> int:
        return len(self.turns)

    def base_direction(self, j: int) -> Direction:
        return Direction.from_turns(self._distinct[j])

    def index_at(self, n: int) -> int:
        if not 1 <= n <= len(self.turns):
            raise IndexError(f"explicit schedule defines positions 1..{len(self.turns)}, got {n}")
        return self._distinct.index(self.turns[n - 1])

    def direction_at(self, n: int) -> Direction:
        return self.base_direction(self.index_at(n))

    def run_location(self, j: int, L: int) -> int:
        for n in range(0, len(self.turns) - L + 1):
            if self.has_run(j, n, L):
                return n
        raise LookupError(f"no run of d_{j} with length {L}")

    def has_run(self, j: int, start: int, length: int) -> bool:
        if start + length > len(self.turns):
            return False
        return all(self.index_at(start + i) == j for i in range(1, length + 1))

    def params(self) -> dict:
        return {"schedule": "explicit", "turns": ",".join(t.hex() for t in self.turns)}


Schedule = DirectionSchedule | ExplicitSchedule


def schedule_from_params(params: dict) -> Schedule:
    kind = params.get("schedule", "default")
    if kind == "default":
        return DirectionSchedule(params.get("angle_rule", "vdc2"), params.get("block_order", "diagonal"))
    if kind == "explicit":
        raw = params["turns"]
        vals: Sequence[str] = raw.split(",") if isinstance(raw, str) else raw
        return ExplicitSchedule(tuple(float.fromhex(v) if "0x" in str(v) else float(v) for v in vals))
    raise ValueError(f"unknown schedule kind {kind!r}")


def angle_of(d: Direction) -> float:
    return math.atan2(d.uy, d.ux) % (2.0 * math.pi)
