"""Channel models: AWGN and tapped-delay-line Rayleigh block fading (TDL-C).

Tap delays are quantized to samples at the OFDM rate fs = nfft * scs;
taps landing on the same sample are merged (powers summed) so the unit
total mean power is preserved. One realization is one fading block.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .waveform import WaveformConfig
from .window import FdssWindow

# 3GPP TR 38.901 Table 7.7.2-3 (TDL-C, NLOS): normalized delay, power [dB].
# Delays scale by the configured RMS delay spread.
TDLC_NORMALIZED = np.array(
    [
        (0.0000, -4.4), (0.2099, -1.2), (0.2219, -3.5), (0.2329, -5.2),
        (0.2176, -2.5), (0.6366, 0.0), (0.6448, -2.2), (0.6560, -3.9),
        (0.6584, -7.4), (0.7935, -7.1), (0.8213, -10.7), (0.9336, -11.1),
        (1.2285, -5.1), (1.3083, -6.8), (2.1704, -8.7), (2.7105, -13.2),
        (4.2589, -13.9), (4.6003, -13.9), (5.4902, -15.8), (5.6077, -17.1),
        (6.3065, -16.0), (6.6374, -15.7), (7.0427, -21.6), (8.6523, -22.8),
    ]
)


@dataclass(frozen=True)
class ChannelProfile:
    """Power-delay profile; taps are (delay_seconds, mean_power_linear).

    Mean powers sum to 1 (normalized channel). scs_hz fixes the sample
    rate fs = nfft * scs together with the waveform config.
    """

    kind: str  # "awgn" | "tdlc"
    taps: tuple = ((0.0, 1.0),)
    delay_spread_s: float = 0.0
    scs_hz: float = 15e3

    @property
    def is_fading(self) -> bool:
        return self.kind != "awgn"


@dataclass(frozen=True)
class ChannelRealization:
    taps_complex: np.ndarray
    delays_samples: np.ndarray
    freq_response: np.ndarray = field(repr=False)  # Hbar[k], k = 0..nsc-1


def awgn() -> ChannelProfile:
    return ChannelProfile(kind="awgn")


def tdlc(delay_spread_s: float, scs_hz: float) -> ChannelProfile:
    """TDL-C profile scaled to the given RMS delay spread."""
    if delay_spread_s <= 0 or scs_hz <= 0:
        raise ValueError("delay spread and scs must be positive")
    delays = TDLC_NORMALIZED[:, 0] * delay_spread_s
    powers = 10.0 ** (TDLC_NORMALIZED[:, 1] / 10.0)
    powers = powers / powers.sum()
    taps = tuple((float(d), float(p)) for d, p in zip(delays, powers))
    return ChannelProfile(kind="tdlc", taps=taps, delay_spread_s=delay_spread_s, scs_hz=scs_hz)


def profile_from_config(spec: dict) -> ChannelProfile:
    """Config-file form: {kind="awgn"} | {kind="tdlc", delay_spread_ns=300, scs_khz=15}."""
    kind = spec.get("kind")
    if kind == "awgn":
        return awgn()
    if kind == "tdlc":
        return tdlc(float(spec["delay_spread_ns"]) * 1e-9, float(spec["scs_khz"]) * 1e3)
    raise ValueError(f"unknown channel kind: {kind!r}")


def sample_taps(profile: ChannelProfile, cfg: WaveformConfig):
    """Quantize tap delays to samples at fs = nfft*scs and merge collisions.

    Returns (delays_samples, mean_powers); raises if a tap falls at or
    beyond the cyclic prefix.
    """
    fs = cfg.nfft * profile.scs_hz
    merged: dict[int, float] = {}
    for delay_s, power in profile.taps:
        d = int(round(delay_s * fs))
        merged[d] = merged.get(d, 0.0) + power
    delays = np.array(sorted(merged), dtype=int)
    powers = np.array([merged[d] for d in delays])
    if profile.is_fading and delays.max() >= cfg.ncp:
        raise ValueError(
            f"max tap delay {delays.max()} samples exceeds cyclic prefix {cfg.ncp}"
        )
    return delays, powers


def _freq_response(taps: np.ndarray, delays: np.ndarray, nsc: int, nfft: int) -> np.ndarray:
    # Hbar[k] = sum_p h_p exp(-j2pi*k*d_p/nfft), allocation at the bottom of the grid
    E = np.exp(-2j * np.pi * np.outer(delays, np.arange(nsc)) / nfft)
    return taps @ E


def realize(profile: ChannelProfile, cfg: WaveformConfig, rng: np.random.Generator) -> ChannelRealization:
    """One block-fading realization (AWGN: the single unit tap, Hbar = 1)."""
    if not profile.is_fading:
        taps = np.array([1.0 + 0.0j])
        delays = np.array([0])
        return ChannelRealization(taps, delays, np.ones(cfg.nsc, dtype=complex))
    delays, powers = sample_taps(profile, cfg)
    scale = np.sqrt(powers / 2.0)
    taps = scale * (rng.standard_normal(len(powers)) + 1j * rng.standard_normal(len(powers)))
    return ChannelRealization(taps, delays, _freq_response(taps, delays, cfg.nsc, cfg.nfft))


def realize_batch(
    profile: ChannelProfile, cfg: WaveformConfig, n: int, rng: np.random.Generator
) -> np.ndarray:
    """n independent frequency responses, shape (n, nsc). AWGN rows are all ones."""
    if not profile.is_fading:
        return np.ones((n, cfg.nsc), dtype=complex)
    delays, powers = sample_taps(profile, cfg)
    scale = np.sqrt(powers / 2.0)
    taps = scale * (rng.standard_normal((n, len(powers))) + 1j * rng.standard_normal((n, len(powers))))
    E = np.exp(-2j * np.pi * np.outer(delays, np.arange(cfg.nsc)) / cfg.nfft)
    return taps @ E


def effective_subcarrier_gain(
    re: ChannelRealization, w: FdssWindow, snr: float
) -> np.ndarray:
    """Per-subcarrier effective channel H[k] = sqrt(snr) * W[k] * Hbar[k]."""
    if len(re.freq_response) != w.nsc:
        raise ValueError("window length does not match the realization")
    return np.sqrt(snr) * w.coeffs * re.freq_response
