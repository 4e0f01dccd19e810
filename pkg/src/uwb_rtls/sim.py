"""Deterministic desk-scale ranging simulation.

A single tag follows a piecewise-linear trajectory across a small
rectangular arena ringed by anchors. A slot schedule drives two-way
ranging exchanges one tag-anchor pair at a time; each exchange passes
through the clock-fault model, an obstacle-dependent noise regime, and a
link-budget evaluation, yielding a measurement stream and a position-fix
stream. Everything downstream of the seed is reproducible bit for bit.

Two noise modes exist because positional error statistics and per-range
noise are different things:

* ``range_noise`` perturbs each measured distance with the Gaussian of
  its sight regime; fixes then inherit whatever geometry error results.
* ``position_noise`` keeps ranges true and instead displaces each solved
  fix by a random direction and a Gaussian magnitude (resampled until
  non-negative) of the regime, reproducing target error statistics
  directly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .constants import SPEED_OF_LIGHT_M_S
from .errors import DomainError
from .localization import (
    AnchorSet,
    PositionFix,
    combine_uncertainty,
    multilaterate_ls,
    trilaterate,
)
from .ranging import ClockModel, apply_clock_model, exchange_from_distance, tof_from_exchange
from .rf import ChannelParams, link_budget
from .tdma import Schedule, rotate_anchor
from .validation import check_finite, check_non_negative, check_positive

_REGIME_LOS = "los"
_REGIME_NLOS = "nlos"


@dataclass(frozen=True)
class Rect:
    """Axis-aligned rectangle, closed on its boundary."""

    x_min: float
    y_min: float
    x_max: float
    y_max: float

    def __post_init__(self):
        for name in ("x_min", "y_min", "x_max", "y_max"):
            check_finite(getattr(self, name), name)
        if not (self.x_min < self.x_max and self.y_min < self.y_max):
            raise DomainError(
                f"rectangle must have positive extent, got {self!r}"
            )

    def contains(self, x: float, y: float) -> bool:
        return self.x_min <= x <= self.x_max and self.y_min <= y <= self.y_max


def default_anchor_layout(width_m: float, height_m: float) -> np.ndarray:
    """Eight perimeter anchors: four corners and four edge midpoints.

    Ordered so any three consecutive ids span a wide triangle; the
    round-robin anchor rotation therefore never hands the solver a
    collinear triple during warm-up.
    """
    w, h = width_m, height_m
    return np.array(
        [
            [0.0, 0.0],
            [w, h / 2.0],
            [0.0, h],
            [w / 2.0, 0.0],
            [w, h],
            [0.0, h / 2.0],
            [w, 0.0],
            [w / 2.0, h],
        ]
    )


@dataclass(frozen=True)
class ArenaConfig:
    """Rectangular arena with fixed anchors and optional obstacles."""

    width_m: float = 1.2192
    height_m: float = 0.6096
    anchors: np.ndarray = None
    obstacles: tuple = ()
    tag_height_m: float = 0.0

    def __post_init__(self):
        check_positive(self.width_m, "width_m")
        check_positive(self.height_m, "height_m")
        check_non_negative(self.tag_height_m, "tag_height_m")
        anchors = self.anchors
        if anchors is None:
            anchors = default_anchor_layout(self.width_m, self.height_m)
        anchors = np.asarray(anchors, dtype=float)
        if anchors.ndim != 2 or anchors.shape[1] != 2 or anchors.shape[0] < 3:
            raise DomainError(
                f"anchors must have shape (n >= 3, 2), got {anchors.shape}"
            )
        for i, (x, y) in enumerate(anchors):
            if not self.contains(x, y):
                raise DomainError(
                    f"anchor {i} at ({x}, {y}) lies outside the arena"
                )
        for i, rect in enumerate(self.obstacles):
            if not (
                0.0 <= rect.x_min
                and rect.x_max <= self.width_m
                and 0.0 <= rect.y_min
                and rect.y_max <= self.height_m
            ):
                raise DomainError(f"obstacle {i} extends outside the arena")
        object.__setattr__(self, "anchors", anchors)
        object.__setattr__(self, "obstacles", tuple(self.obstacles))

    def contains(self, x: float, y: float) -> bool:
        return 0.0 <= x <= self.width_m and 0.0 <= y <= self.height_m


@dataclass(frozen=True)
class NoiseModel:
    """Gaussian error regimes for clear and obstructed sight lines."""

    mode: str = "position_noise"
    los_mean_m: float = 0.162
    los_sigma_m: float = 0.076
    nlos_mean_m: float = 0.356
    nlos_sigma_m: float = 0.270

    def __post_init__(self):
        if self.mode not in ("range_noise", "position_noise"):
            raise DomainError(
                f"mode must be 'range_noise' or 'position_noise', got {self.mode!r}"
            )
        check_finite(self.los_mean_m, "los_mean_m")
        check_finite(self.nlos_mean_m, "nlos_mean_m")
        check_non_negative(self.los_sigma_m, "los_sigma_m")
        check_non_negative(self.nlos_sigma_m, "nlos_sigma_m")

    def regime(self, los: bool) -> tuple:
        if los:
            return self.los_mean_m, self.los_sigma_m
        return self.nlos_mean_m, self.nlos_sigma_m


@dataclass(frozen=True)
class Trajectory:
    """Piecewise-linear path through the arena, held at both ends."""

    waypoints: tuple
    max_speed_mps: float = math.inf

    def __post_init__(self):
        points = []
        for entry in self.waypoints:
            t, pos = entry[0], entry[1]
            points.append((float(t), (float(pos[0]), float(pos[1]))))
        if not points:
            raise DomainError("trajectory needs at least one waypoint")
        times = [t for t, _ in points]
        if any(b <= a for a, b in zip(times, times[1:])):
            raise DomainError("trajectory timestamps must be strictly increasing")
        if math.isnan(self.max_speed_mps) or self.max_speed_mps <= 0.0:
            raise DomainError(
                f"max_speed_mps must be positive, got {self.max_speed_mps!r}"
            )
        for (t0, p0), (t1, p1) in zip(points, points[1:]):
            speed = math.dist(p0, p1) / (t1 - t0)
            if speed > self.max_speed_mps * (1.0 + 1e-12):
                raise DomainError(
                    f"trajectory segment at t={t0:g} s implies {speed:.6g} m/s, "
                    f"above max_speed_mps={self.max_speed_mps:g}"
                )
        object.__setattr__(self, "waypoints", tuple(points))
        object.__setattr__(
            self, "_times", np.array([t for t, _ in points], dtype=float)
        )
        object.__setattr__(
            self, "_xs", np.array([p[0] for _, p in points], dtype=float)
        )
        object.__setattr__(
            self, "_ys", np.array([p[1] for _, p in points], dtype=float)
        )

    @property
    def t_end_s(self) -> float:
        return self.waypoints[-1][0]

    def position_at(self, t: float) -> np.ndarray:
        return np.array(
            [np.interp(t, self._times, self._xs), np.interp(t, self._times, self._ys)],
            dtype=float,
        )


@dataclass(frozen=True)
class Measurement:
    """One ranging result for a scheduled tag-anchor slot."""

    t: float
    tag_id: int
    anchor_id: int
    slot_index: int
    distance_m: float
    snr_db: float
    los: bool
    valid: bool
    true_distance_m: float = 0.0


def _segment_blocked(p: np.ndarray, q: np.ndarray, rect: Rect) -> bool:
    """Positive-length overlap of segment p->q with a closed rectangle.

    Slab clipping: intersect the parameter interval [0, 1] with the
    per-axis slabs; a non-degenerate remainder means the segment passes
    through the rectangle. A touch at a single point does not block.
    """
    t0, t1 = 0.0, 1.0
    d = q - p
    for axis, (lo, hi) in enumerate(
        ((rect.x_min, rect.x_max), (rect.y_min, rect.y_max))
    ):
        if d[axis] == 0.0:
            if p[axis] < lo or p[axis] > hi:
                return False
            continue
        ta = (lo - p[axis]) / d[axis]
        tb = (hi - p[axis]) / d[axis]
        if ta > tb:
            ta, tb = tb, ta
        t0 = max(t0, ta)
        t1 = min(t1, tb)
        if t0 >= t1:
            return False
    return t1 > t0


def classify_los(arena: ArenaConfig, tag_pos, anchor_pos) -> bool:
    """True iff no obstacle interrupts the straight tag-anchor sight line."""
    tag = np.asarray(tag_pos, dtype=float)
    anchor = np.asarray(anchor_pos, dtype=float)
    for name, point in (("tag_pos", tag), ("anchor_pos", anchor)):
        if point.shape != (2,) or not np.all(np.isfinite(point)):
            raise DomainError(f"{name} must be a finite 2D point")
        if not arena.contains(point[0], point[1]):
            raise DomainError(
                f"{name} ({point[0]}, {point[1]}) lies outside the arena"
            )
    return not any(
        _segment_blocked(tag, anchor, rect) for rect in arena.obstacles
    )


def _draw_magnitude(rng: np.random.Generator, mean: float, sigma: float) -> float:
    """Gaussian draw resampled until non-negative (error magnitudes)."""
    for _ in range(1000):
        value = rng.normal(mean, sigma)
        if value >= 0.0:
            return value
    return 0.0


def _validate_trajectory_in_arena(arena: ArenaConfig, traj: Trajectory) -> None:
    for t, (x, y) in traj.waypoints:
        if not arena.contains(x, y):
            raise DomainError(
                f"trajectory waypoint ({x:g}, {y:g}) at t={t:g} s lies "
                f"outside the {arena.width_m:g} x {arena.height_m:g} m arena"
            )


def fixes_from_measurements(
    anchor_set: AnchorSet,
    measurements: Sequence,
    freshness_s: float,
    sigma_pos_m: float = 0.0,
    noise: Optional[NoiseModel] = None,
    rng: Optional[np.random.Generator] = None,
    solver: str = "least_squares",
    y_variant: str = "consistent",
) -> list:
    """Turn a time-ordered measurement stream into position fixes.

    After every valid measurement, the latest range per anchor within
    ``freshness_s`` of it forms the working set; once at least three
    distinct anchors are present, a fix is solved, warm-started from the
    previous solution. With ``solver="closed_form"`` the three freshest
    anchors feed the closed-form solution instead (``y_variant`` selects
    its y expression). A position-displacing ``noise`` model (mode
    ``position_noise``) perturbs each emitted fix; it requires ``rng``.
    """
    check_positive(freshness_s, "freshness_s")
    if solver not in ("least_squares", "closed_form"):
        raise DomainError(f"unknown solver {solver!r}")
    displace = noise is not None and noise.mode == "position_noise"
    if displace and rng is None:
        raise DomainError("position_noise displacement needs an rng")

    fixes = []
    fresh = {}
    last_solution: Optional[np.ndarray] = None
    for m in measurements:
        if not m.valid or m.distance_m < 0.0:
            continue
        fresh[m.anchor_id] = (m.t, m.distance_m, m.los)
        cutoff = m.t - freshness_s
        for aid in [k for k, (tk, _, _) in fresh.items() if tk < cutoff]:
            del fresh[aid]
        if len(fresh) < 3:
            continue

        if solver == "closed_form":
            # Three freshest distinct anchors, oldest first for stability.
            chosen = sorted(fresh.items(), key=lambda kv: kv[1][0])[-3:]
            chosen.sort(key=lambda kv: kv[0])
            (a1, (_, d1, _)), (a2, (_, d2, _)), (a3, (_, d3, _)) = chosen
            point = trilaterate(
                anchor_set.position_of(a1),
                anchor_set.position_of(a2),
                anchor_set.position_of(a3),
                d1,
                d2,
                d3,
                variant=y_variant,
            )
            dists = np.array([d1, d2, d3])
            anchors_xy = np.array(
                [anchor_set.position_of(a) for a, _ in chosen]
            )
            residuals = np.linalg.norm(anchors_xy - point, axis=1) - dists
            solved = PositionFix(
                position=(float(point[0]), float(point[1])),
                residual_rms_m=float(np.sqrt(np.mean(residuals**2))),
                n_ranges_used=3,
                method="closed_form",
                t=m.t,
            )
        else:
            ranges = [(aid, d) for aid, (_, d, _) in sorted(fresh.items())]
            solved = multilaterate_ls(
                anchor_set, ranges, initial_guess=last_solution
            )
            last_solution = np.asarray(solved.position)

        position = solved.position
        if displace:
            any_nlos = any(not l for _, (_, _, l) in fresh.items())
            mean, sigma = noise.regime(not any_nlos)
            magnitude = _draw_magnitude(rng, mean, sigma)
            angle = rng.uniform(0.0, 2.0 * math.pi)
            position = (
                position[0] + magnitude * math.cos(angle),
                position[1] + magnitude * math.sin(angle),
            )
        fixes.append(
            PositionFix(
                position=position,
                sigma_pos_m=sigma_pos_m,
                residual_rms_m=solved.residual_rms_m,
                n_ranges_used=solved.n_ranges_used,
                method=solved.method,
                t=m.t,
                converged=solved.converged,
            )
        )
    return fixes


def default_freshness_s(schedule: Schedule) -> float:
    """One full anchor rotation plus half a superframe of slack."""
    return (
        schedule.n_anchors * schedule.period_superframes * schedule.cfg.superframe_s
        + 0.5 * schedule.cfg.superframe_s
    )


def simulate(
    arena: ArenaConfig,
    traj: Trajectory,
    schedule: Schedule,
    noise: NoiseModel,
    channel: ChannelParams,
    clock: ClockModel,
    seed: int,
    t_rsp_s: float = 200e-6,
    emit_fixes: bool = True,
    sim_tag_id: int = 0,
) -> tuple:
    """Run the slot loop over the trajectory duration.

    Returns ``(measurements, fixes)``. Only ``sim_tag_id`` produces
    measurements; slots granted to other tags in the schedule stay
    silent, which keeps multi-tag schedules usable for capacity studies
    without inventing extra trajectories.

    A fix is attempted after every valid measurement once at least three
    distinct anchors hold a fresh range (see
    :func:`fixes_from_measurements`); measurement noise draws and fix
    displacement draws come from one seeded stream, so a run is fully
    reproducible.
    """
    _validate_trajectory_in_arena(arena, traj)
    check_non_negative(t_rsp_s, "t_rsp_s")
    n_anchors = arena.anchors.shape[0]
    if schedule.n_anchors != n_anchors:
        raise DomainError(
            f"schedule expects {schedule.n_anchors} anchors, arena has {n_anchors}"
        )
    anchor_set = AnchorSet.from_positions(arena.anchors)
    cfg = schedule.cfg
    rng = np.random.default_rng(seed)
    period = schedule.period_superframes
    duration_s = traj.t_end_s
    n_frames = math.ceil(duration_s / cfg.superframe_s) if duration_s > 0 else 0

    sigma_pos_m = combine_uncertainty(
        SPEED_OF_LIGHT_M_S * clock.sigma_tof_s,
        SPEED_OF_LIGHT_M_S * abs(clock.sync_offset_s),
    )

    active = [a for a in schedule.assignments if a.tag_id == sim_tag_id]
    measurements = []
    for frame in range(n_frames):
        for a in active:
            if frame % period != a.superframe_phase % period:
                continue
            occurrence = frame // period
            t_slot = cfg.slot_time_s(frame, a.slot_index)
            if t_slot >= duration_s:
                continue
            anchor_id = rotate_anchor(a.anchor_id, occurrence, n_anchors)
            tag_pos = traj.position_at(t_slot)
            anchor_pos = arena.anchors[anchor_id]
            true_dist = float(math.hypot(*(tag_pos - anchor_pos)))
            los = classify_los(arena, tag_pos, anchor_pos)

            ex = exchange_from_distance(true_dist, t_rsp_s)
            noisy = apply_clock_model(ex, clock, rng)
            dist = SPEED_OF_LIGHT_M_S * tof_from_exchange(noisy)
            if noise.mode == "range_noise":
                mean, sigma = noise.regime(los)
                dist += rng.normal(mean, sigma)
            valid = dist >= 0.0

            budget = link_budget(
                channel, max(true_dist, 1e-3), n_obstacles=0 if los else 1
            )
            measurements.append(
                Measurement(
                    t=t_slot,
                    tag_id=a.tag_id,
                    anchor_id=anchor_id,
                    slot_index=a.slot_index,
                    distance_m=dist,
                    snr_db=budget.snr_db,
                    los=los,
                    valid=valid,
                    true_distance_m=true_dist,
                )
            )

    fixes = []
    if emit_fixes and measurements:
        fixes = fixes_from_measurements(
            anchor_set,
            measurements,
            freshness_s=default_freshness_s(schedule),
            sigma_pos_m=sigma_pos_m,
            noise=noise,
            rng=rng,
        )
    return measurements, fixes


def success_ratio(fixes: Sequence, attempts: int) -> float:
    """Converged fixes over attempted determinations, in [0, 1]."""
    if isinstance(attempts, bool) or int(attempts) != attempts or attempts < 1:
        raise DomainError(f"attempts must be a positive integer, got {attempts!r}")
    successes = sum(1 for f in fixes if f.converged)
    if successes > attempts:
        raise DomainError(
            f"{successes} successful fixes exceed {attempts} attempts"
        )
    return successes / attempts
