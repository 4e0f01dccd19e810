"""Radio-link models for an ultra-wideband channel.

Pure numeric helpers: free-space range, path attenuation, SNR, Shannon
capacity, range resolution, and material penetration depth. All math runs
in SI linear units; decibel conversions are explicit named functions so
unit mistakes cannot hide inside a formula.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .constants import (
    BOLTZMANN_J_PER_K,
    NOISE_REFERENCE_TEMPERATURE_K,
    SPEED_OF_LIGHT_M_S,
)
from .validation import (
    check_non_negative,
    check_non_negative_int,
    check_positive,
)

_FOUR_PI = 4.0 * math.pi

# 2.5 dBi, the gain of a small UWB patch antenna, as a linear factor.
DEFAULT_ANTENNA_GAIN_LINEAR = 10.0 ** 0.25


@dataclass(frozen=True)
class ChannelParams:
    """Radio parameters shared by every link in a deployment.

    Defaults describe a 6.5 GHz carrier with 500 MHz of bandwidth and
    identical 2.5 dBi antennas on both ends. ``path_loss_coeff_L`` and
    ``freq_loss_factor_F`` multiply to the per-obstacle attenuation in dB.
    """

    carrier_frequency_hz: float = 6.5e9
    bandwidth_hz: float = 500e6
    tx_power_w: float = 1e-3
    tx_gain_linear: float = DEFAULT_ANTENNA_GAIN_LINEAR
    rx_gain_linear: float = DEFAULT_ANTENNA_GAIN_LINEAR
    path_loss_coeff_L: float = 5.0
    freq_loss_factor_F: float = 1.0

    def __post_init__(self):
        check_positive(self.carrier_frequency_hz, "carrier_frequency_hz")
        check_positive(self.bandwidth_hz, "bandwidth_hz")
        check_positive(self.tx_power_w, "tx_power_w")
        check_positive(self.tx_gain_linear, "tx_gain_linear")
        check_positive(self.rx_gain_linear, "rx_gain_linear")
        check_non_negative(self.path_loss_coeff_L, "path_loss_coeff_L")
        check_non_negative(self.freq_loss_factor_F, "freq_loss_factor_F")

    @property
    def wavelength_m(self) -> float:
        return SPEED_OF_LIGHT_M_S / self.carrier_frequency_hz


@dataclass(frozen=True)
class LinkBudget:
    """Evaluated link figures at one distance."""

    distance_m: float
    attenuation_db: float
    snr_db: float
    capacity_bps: float


def linear_to_db(ratio: float) -> float:
    """10*log10 of a positive power ratio."""
    check_positive(ratio, "ratio")
    return 10.0 * math.log10(ratio)


def db_to_linear(db: float) -> float:
    """Inverse of :func:`linear_to_db`."""
    return 10.0 ** (float(db) / 10.0)


def wavelength(frequency_hz: float) -> float:
    """Wavelength c/f in meters."""
    check_positive(frequency_hz, "frequency_hz")
    return SPEED_OF_LIGHT_M_S / frequency_hz


def free_space_range(params: ChannelParams, rx_power_w: float) -> float:
    """Distance at which free-space spreading leaves ``rx_power_w`` at the receiver.

    D = (lambda / 4 pi) * sqrt(P_t * G_t * G_r / P_r)
    """
    check_positive(rx_power_w, "rx_power_w")
    power_ratio = params.tx_power_w * params.tx_gain_linear * params.rx_gain_linear
    return params.wavelength_m / _FOUR_PI * math.sqrt(power_ratio / rx_power_w)


def path_loss_db(
    params: ChannelParams, distance_m: float, n_obstacles: int = 0
) -> float:
    """Free-space attenuation plus a fixed per-obstacle penalty, in dB.

    A = 20*log10(4 pi d / lambda) + n * L * F

    The obstacle term treats L*F as dB lost per obstructing object.
    """
    check_positive(distance_m, "distance_m")
    check_non_negative_int(n_obstacles, "n_obstacles")
    spreading = 20.0 * math.log10(_FOUR_PI * distance_m / params.wavelength_m)
    obstruction = n_obstacles * params.path_loss_coeff_L * params.freq_loss_factor_F
    return spreading + obstruction


def snr_db(p_signal_w: float, p_noise_w: float) -> float:
    """Signal-to-noise ratio 10*log10(P_s/P_n) in dB."""
    check_positive(p_signal_w, "p_signal_w")
    check_positive(p_noise_w, "p_noise_w")
    return 10.0 * math.log10(p_signal_w / p_noise_w)


def channel_capacity_bps(bandwidth_hz: float, snr_linear: float) -> float:
    """Shannon capacity C = B*log2(1 + SNR) in bits per second.

    ``snr_linear`` is a plain power ratio, not dB.
    """
    check_positive(bandwidth_hz, "bandwidth_hz")
    check_non_negative(snr_linear, "snr_linear")
    return bandwidth_hz * math.log2(1.0 + snr_linear)


def range_resolution_m(bandwidth_hz: float) -> float:
    """Smallest resolvable distance difference c/(2B) in meters."""
    check_positive(bandwidth_hz, "bandwidth_hz")
    return SPEED_OF_LIGHT_M_S / (2.0 * bandwidth_hz)


def penetration_depth_m(velocity_mps: float, delay_s: float) -> float:
    """Depth v*tau reached by a pulse travelling at ``velocity_mps`` for ``delay_s``."""
    check_positive(velocity_mps, "velocity_mps")
    check_non_negative(delay_s, "delay_s")
    return velocity_mps * delay_s


def thermal_noise_w(
    bandwidth_hz: float, temperature_k: float = NOISE_REFERENCE_TEMPERATURE_K
) -> float:
    """Thermal noise floor k*T*B in watts."""
    check_positive(bandwidth_hz, "bandwidth_hz")
    check_positive(temperature_k, "temperature_k")
    return BOLTZMANN_J_PER_K * temperature_k * bandwidth_hz


def link_budget(
    params: ChannelParams, distance_m: float, n_obstacles: int = 0
) -> LinkBudget:
    """Evaluate attenuation, SNR against the thermal floor, and capacity."""
    attenuation = path_loss_db(params, distance_m, n_obstacles)
    rx_power_w = (
        params.tx_power_w
        * params.tx_gain_linear
        * params.rx_gain_linear
        / db_to_linear(attenuation)
    )
    noise_w = thermal_noise_w(params.bandwidth_hz)
    snr = snr_db(rx_power_w, noise_w)
    capacity = channel_capacity_bps(params.bandwidth_hz, db_to_linear(snr))
    return LinkBudget(
        distance_m=float(distance_m),
        attenuation_db=attenuation,
        snr_db=snr,
        capacity_bps=capacity,
    )
