"""Two-way ranging: timestamp exchanges, time of flight, and clock faults.

The exchange is symmetric double-sided: the initiator times two
request/response rounds, the responder replies after a fixed processing
delay in both. Averaging the two (round minus reply) intervals over four
cancels the responder's delay and first-order clock offset:

    tof = ((t_rr - t_sp) - t_rsp + (t_rf - t_sr) - t_rsp) / 4

Timestamps are the initiator's local capture times in seconds. Keeping
them near zero (the builders start at ``t_start_s = 0.0``) preserves
sub-picosecond resolution; absolute wall-clock slot times live on the
measurement records, never inside the exchange arithmetic.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Union

import numpy as np

from .constants import SPEED_OF_LIGHT_M_S
from .errors import DomainError
from .validation import check_finite, check_non_negative

RngLike = Union[np.random.Generator, int]


def _as_rng(rng: RngLike) -> np.random.Generator:
    if isinstance(rng, np.random.Generator):
        return rng
    return np.random.default_rng(rng)


@dataclass(frozen=True)
class RangingExchange:
    """Captured timestamps of one symmetric two-way ranging transaction.

    Fields (seconds, initiator clock):
      t_sp  poll sent
      t_rr  response received
      t_sr  final sent
      t_rf  final acknowledgement received
      t_rsp responder's processing/reply delay, identical in both rounds

    Ideal exchanges built by :func:`exchange_from_tof` satisfy
    ``t_rr >= t_sp``, ``t_rf >= t_sr`` and ``(round - t_rsp) >= 0`` for both
    rounds. Clock perturbation may break the round inequalities; that
    surfaces downstream as a negative time of flight, which callers flag
    as an invalid measurement rather than an exception.
    """

    t_sp: float
    t_rr: float
    t_sr: float
    t_rf: float
    t_rsp: float

    def __post_init__(self):
        for name in ("t_sp", "t_rr", "t_sr", "t_rf"):
            check_finite(getattr(self, name), name)
        check_non_negative(self.t_rsp, "t_rsp")


@dataclass(frozen=True)
class ClockModel:
    """Deterministic and stochastic clock faults applied to an exchange.

    ``drift_ppm`` scales every captured value (both clocks assumed to share
    the drift, so the reported reply delay scales too). ``sync_offset_s``
    shifts the four timestamps by a constant; two-way ranging cancels it
    exactly, but it still feeds the reported position uncertainty.
    ``sigma_tof_s`` is per-capture Gaussian timestamp noise.
    """

    drift_ppm: float = 0.0
    sync_offset_s: float = 0.0
    sigma_tof_s: float = 0.0

    def __post_init__(self):
        check_finite(self.drift_ppm, "drift_ppm")
        check_finite(self.sync_offset_s, "sync_offset_s")
        check_non_negative(self.sigma_tof_s, "sigma_tof_s")


def exchange_from_tof(
    tof_s: float,
    t_rsp_s: float,
    t_start_s: float = 0.0,
    initiator_gap_s: float = 0.0,
) -> RangingExchange:
    """Build the ideal exchange a given one-way time of flight would produce.

    ``initiator_gap_s`` is the initiator's own turnaround between receiving
    the response and sending the final; it cancels in the inversion.
    """
    check_non_negative(tof_s, "tof_s")
    check_non_negative(t_rsp_s, "t_rsp_s")
    check_finite(t_start_s, "t_start_s")
    check_non_negative(initiator_gap_s, "initiator_gap_s")
    round_s = 2.0 * tof_s + t_rsp_s
    t_sp = t_start_s
    t_rr = t_sp + round_s
    t_sr = t_rr + initiator_gap_s
    t_rf = t_sr + round_s
    return RangingExchange(t_sp=t_sp, t_rr=t_rr, t_sr=t_sr, t_rf=t_rf, t_rsp=t_rsp_s)


def exchange_from_distance(
    distance_m: float,
    t_rsp_s: float,
    t_start_s: float = 0.0,
    initiator_gap_s: float = 0.0,
) -> RangingExchange:
    """Build the ideal exchange for a tag-anchor separation in meters."""
    check_non_negative(distance_m, "distance_m")
    return exchange_from_tof(
        distance_m / SPEED_OF_LIGHT_M_S, t_rsp_s, t_start_s, initiator_gap_s
    )


def tof_from_exchange(ex: RangingExchange) -> float:
    """Recover one-way time of flight from an exchange.

    May return a negative value when clock faults corrupted the timestamps;
    callers treat that as an invalid measurement, not an error.
    """
    round1 = ex.t_rr - ex.t_sp
    round2 = ex.t_rf - ex.t_sr
    return ((round1 - ex.t_rsp) + (round2 - ex.t_rsp)) / 4.0


def distance_from_tof(tof_s: float) -> float:
    """Distance d = c*t in meters."""
    if not math.isfinite(tof_s) or tof_s < 0.0:
        raise DomainError(f"tof_s must be non-negative and finite, got {tof_s!r}")
    return SPEED_OF_LIGHT_M_S * tof_s


def tof_from_distance(distance_m: float) -> float:
    """Time of flight t = d/c in seconds."""
    check_non_negative(distance_m, "distance_m")
    return distance_m / SPEED_OF_LIGHT_M_S


def normalized_distance(t_rt_s: float, t_total_s: float) -> float:
    """Round-trip time as a fraction of a reference interval, in [0, 1]."""
    if not math.isfinite(t_total_s) or t_total_s <= 0.0:
        raise DomainError(f"t_total_s must be positive, got {t_total_s!r}")
    check_non_negative(t_rt_s, "t_rt_s")
    if t_rt_s > t_total_s:
        raise DomainError(
            f"t_rt_s ({t_rt_s!r}) must not exceed t_total_s ({t_total_s!r})"
        )
    return t_rt_s / t_total_s


def apply_clock_model(
    ex: RangingExchange, clock: ClockModel, rng: RngLike
) -> RangingExchange:
    """Return a copy of ``ex`` as captured by imperfect clocks.

    Every value is scaled by (1 + drift_ppm * 1e-6); the four timestamps
    additionally receive the synchronization offset and independent
    zero-mean Gaussian noise of width ``sigma_tof_s``. Deterministic for a
    given generator state or integer seed.
    """
    gen = _as_rng(rng)
    scale = 1.0 + clock.drift_ppm * 1e-6
    # Always draw, so the stream position does not depend on sigma.
    noise = gen.standard_normal(4) * clock.sigma_tof_s
    offset = clock.sync_offset_s
    return RangingExchange(
        t_sp=ex.t_sp * scale + offset + noise[0],
        t_rr=ex.t_rr * scale + offset + noise[1],
        t_sr=ex.t_sr * scale + offset + noise[2],
        t_rf=ex.t_rf * scale + offset + noise[3],
        t_rsp=ex.t_rsp * scale,
    )
