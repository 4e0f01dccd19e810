"""Time-division slot allocation over a fixed ranging superframe.

One tag-anchor pair ranges per slot; a schedule assigns every tag one
slot per update interval and repeats with a fixed period measured in
superframes. Anchor pairing advances round-robin on successive
occurrences of the same assignment, so a tag visits every anchor in
turn without consuming extra slots.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

from .errors import CapacityExceededError
from .validation import check_positive, check_positive_int

# Absorbs float rounding in rate*duration products near exact capacity.
_CAPACITY_EPS = 1e-9


@dataclass(frozen=True)
class SuperframeConfig:
    """Fixed-length superframe divided into equal exclusive slots."""

    superframe_s: float = 0.100
    slots_per_superframe: int = 15

    def __post_init__(self):
        check_positive(self.superframe_s, "superframe_s")
        check_positive_int(self.slots_per_superframe, "slots_per_superframe")

    @property
    def slot_s(self) -> float:
        return self.superframe_s / self.slots_per_superframe

    def slot_time_s(self, frame_index: int, slot_index: int) -> float:
        """Absolute start time of a slot, frames counted from zero."""
        return frame_index * self.superframe_s + slot_index * self.slot_s


@dataclass(frozen=True)
class Assignment:
    """One recurring slot grant.

    ``anchor_id`` is the anchor paired on the assignment's first
    occurrence; occurrence k pairs anchor (anchor_id + k) mod n_anchors.
    """

    slot_index: int
    superframe_phase: int
    tag_id: int
    anchor_id: int


@dataclass(frozen=True)
class Schedule:
    """Collision-free recurring slot plan."""

    assignments: tuple
    period_superframes: int
    cfg: SuperframeConfig = field(default_factory=SuperframeConfig)
    n_anchors: int = 8


def rotate_anchor(base_anchor_id: int, occurrence: int, n_anchors: int) -> int:
    """Anchor paired on the given occurrence of an assignment."""
    check_positive_int(n_anchors, "n_anchors")
    return (base_anchor_id + occurrence) % n_anchors


def slot_demand(n_tags: int, update_rate_hz: float, cfg: SuperframeConfig) -> float:
    """Average slots per superframe the request consumes."""
    return n_tags * update_rate_hz * cfg.superframe_s


def build_schedule(
    n_tags: int,
    update_rate_hz: float,
    cfg: Optional[SuperframeConfig] = None,
    n_anchors: int = 8,
) -> Schedule:
    """Allocate one recurring slot per tag at the requested update rate.

    The repeat period is ceil(1 / (update_rate_hz * superframe_s))
    superframes; tags fill slots lowest-id first, wrapping to the next
    superframe phase when a frame is full. Raises
    :class:`CapacityExceededError` when the demand cannot fit.
    """
    if cfg is None:
        cfg = SuperframeConfig()
    check_positive_int(n_tags, "n_tags")
    check_positive(update_rate_hz, "update_rate_hz")
    check_positive_int(n_anchors, "n_anchors")

    demand = slot_demand(n_tags, update_rate_hz, cfg)
    capacity = cfg.slots_per_superframe
    if demand > capacity + _CAPACITY_EPS:
        raise CapacityExceededError(
            f"{n_tags} tags at {update_rate_hz} Hz need {demand:.6g} slots per "
            f"{cfg.superframe_s:.6g} s superframe; only {capacity} available",
            demand_slots=demand,
            capacity_slots=capacity,
        )

    interval_frames = 1.0 / (update_rate_hz * cfg.superframe_s)
    period = max(1, math.ceil(interval_frames - _CAPACITY_EPS))

    assignments = []
    for tag in range(n_tags):
        slot = tag % cfg.slots_per_superframe
        phase = tag // cfg.slots_per_superframe
        assignments.append(
            Assignment(
                slot_index=slot,
                superframe_phase=phase,
                tag_id=tag,
                anchor_id=tag % n_anchors,
            )
        )
    return Schedule(
        assignments=tuple(assignments),
        period_superframes=period,
        cfg=cfg,
        n_anchors=n_anchors,
    )


def validate_schedule(s: Schedule, n_tags: Optional[int] = None) -> list:
    """Return human-readable conflicts; empty means the schedule is sound.

    Checks slot/phase ranges, exclusive (slot, phase) use, and that every
    tag (0..n_tags-1 when given, otherwise every tag mentioned) holds at
    least one slot per period.
    """
    conflicts = []
    seen = {}
    for a in s.assignments:
        if not 0 <= a.slot_index < s.cfg.slots_per_superframe:
            conflicts.append(
                f"tag {a.tag_id}: slot_index {a.slot_index} outside "
                f"[0, {s.cfg.slots_per_superframe})"
            )
        phase = a.superframe_phase % s.period_superframes
        key = (a.slot_index, phase)
        if key in seen:
            conflicts.append(
                f"slot {a.slot_index} phase {phase}: tags {seen[key]} and "
                f"{a.tag_id} collide"
            )
        else:
            seen[key] = a.tag_id

    present = {a.tag_id for a in s.assignments}
    if n_tags is not None:
        expected = set(range(n_tags))
        for tag in sorted(expected - present):
            conflicts.append(f"tag {tag}: no slot in any period (starved)")
    elif not present:
        conflicts.append("schedule has no assignments")
    return conflicts
