"""Link budget and Shannon-rate computation for the 60 GHz channel.

Received power follows the Friis free-space equation generalized to a
configurable path-loss exponent; the achievable rate is Shannon capacity
over total in-band noise plus an interference term that scales with the
number of flows transmitting concurrently.  Everything internal is SI
(watts, hertz, meters, seconds); dB quantities are converted once at the
configuration boundary.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property

SPEED_OF_LIGHT_M_S = 299_792_458.0

# A link's rate in bits per second.
LinkRate = float


def dbi_to_linear(gain_dbi: float) -> float:
    return 10.0 ** (gain_dbi / 10.0)


def noise_psd_to_w_per_hz(noise_dbm_per_mhz: float) -> float:
    """Convert a noise power spectral density from dBm/MHz to W/Hz."""
    return 10.0 ** (noise_dbm_per_mhz / 10.0) * 1e-3 / 1e6


# Directional antennas keep per-flow interference leakage far below the
# noise floor; each concurrent flow contributes this fraction of the
# background noise PSD unless configured explicitly.
DEFAULT_INTERFERENCE_NOISE_FRACTION = 0.1


@dataclass(frozen=True)
class ChannelParams:
    """PHY parameters for rate and slot-demand computation.

    `interference_psd_w_per_hz` is the noise-equivalent power spectral
    density one concurrent flow contributes; None picks the default
    fraction of the background noise PSD and 0 disables the concurrency
    penalty entirely.
    """

    bandwidth_hz: float = 7e9
    tx_power_w: float = 1e-4
    tx_gain_dbi: float = 12.0
    rx_gain_dbi: float = 12.0
    noise_psd_dbm_per_mhz: float = -134.0
    interference_psd_w_per_hz: float | None = None
    pathloss_exponent: float = 2.0
    carrier_hz: float = 60e9
    slot_duration_s: float = 1e-5
    payload_bits: float = 1e7

    def __post_init__(self) -> None:
        if self.bandwidth_hz <= 0:
            raise ValueError("bandwidth_hz must be positive")
        if self.tx_power_w <= 0:
            raise ValueError("tx_power_w must be positive")
        if self.pathloss_exponent < 1:
            raise ValueError("pathloss_exponent must be >= 1")
        if self.carrier_hz <= 0:
            raise ValueError("carrier_hz must be positive")
        if self.slot_duration_s <= 0:
            raise ValueError("slot_duration_s must be positive")
        if self.payload_bits <= 0:
            raise ValueError("payload_bits must be positive")
        if (
            self.interference_psd_w_per_hz is not None
            and self.interference_psd_w_per_hz < 0
        ):
            raise ValueError("interference_psd_w_per_hz must be >= 0")

    @cached_property
    def wavelength_m(self) -> float:
        return SPEED_OF_LIGHT_M_S / self.carrier_hz

    @cached_property
    def noise_w_per_hz(self) -> float:
        return noise_psd_to_w_per_hz(self.noise_psd_dbm_per_mhz)

    @cached_property
    def interference_w_per_hz(self) -> float:
        if self.interference_psd_w_per_hz is None:
            return DEFAULT_INTERFERENCE_NOISE_FRACTION * self.noise_w_per_hz
        return self.interference_psd_w_per_hz


def received_power(params: ChannelParams, dist: float) -> float:
    """Received signal power in watts over a `dist`-meter link.

    P_r = P_t * G_t * G_r * lambda^2 / ((4 pi)^2 * dist^n), with antenna
    gains converted from dBi and distance in meters against an implicit
    1 m reference.
    """
    if dist <= 0:
        raise ValueError("dist must be positive")
    gains = dbi_to_linear(params.tx_gain_dbi) * dbi_to_linear(params.rx_gain_dbi)
    numerator = params.tx_power_w * gains * params.wavelength_m**2
    return numerator / ((4.0 * math.pi) ** 2 * dist**params.pathloss_exponent)


def link_rate(params: ChannelParams, dist: float, active_flows: int = 1) -> LinkRate:
    """Shannon rate of a link when `active_flows` flows share the air.

    Rate = W * log2(1 + P_r / ((N0 + I * NF) * W)) where NF counts the
    flows transmitting concurrently in the same group, including this one.
    With I = 0 and NF = 1 this reduces to plain Shannon capacity over
    background noise.
    """
    if active_flows < 1:
        raise ValueError("active_flows must be >= 1")
    p_r = received_power(params, dist)
    noise_total = (
        params.noise_w_per_hz + params.interference_w_per_hz * active_flows
    ) * params.bandwidth_hz
    return params.bandwidth_hz * math.log2(1.0 + p_r / noise_total)


def slots_for_payload(params: ChannelParams, rate: LinkRate) -> int:
    """Whole time slots needed to push one payload through at `rate`.

    Rounds up, so the allocation never undershoots the payload:
    slots * slot_duration * rate >= payload_bits.
    """
    if rate <= 0:
        raise ValueError("rate must be positive (unreachable link)")
    slots = max(1, math.ceil((params.payload_bits / rate) / params.slot_duration_s))
    # ceil() works on floats; nudge up if rounding left the allocation short.
    while slots * params.slot_duration_s * rate < params.payload_bits:
        slots += 1
    return slots
