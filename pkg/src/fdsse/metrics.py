"""PAPR under both mean-power definitions, cubic metric, and CCDF estimation.

The statistical definition divides the peak by the ensemble mean power
Nsc/Nfft; the instantaneous one divides by the arithmetic mean power of
the supplied samples. CCDF quantiles interpolate linearly in dB between
order statistics.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from .constellation import Constellation, index_rotation
from .waveform import WaveformConfig, add_cyclic_prefix, modulate_batch
from .window import FdssWindow

DEFAULT_BATCH = 4096
CCDF_GRID_STEP_DB = 0.05


def papr_statistical(samples: np.ndarray, cfg: WaveformConfig) -> float:
    """10 log10((Nfft/Nsc) max |s[n]|^2) for a symbol of mean power Nsc/Nfft."""
    p = np.abs(np.asarray(samples)) ** 2
    return float(10.0 * np.log10(p.max() * cfg.nfft / cfg.nsc))


def papr_instantaneous(samples: np.ndarray) -> float:
    """10 log10(max |s|^2 / mean |s|^2) over the supplied samples."""
    p = np.abs(np.asarray(samples)) ** 2
    if p.size == 0:
        raise ValueError("empty sample sequence")
    return float(10.0 * np.log10(p.max() / p.mean()))


def cubic_metric(samples: np.ndarray) -> float:
    """Raw cubic metric 20 log10(rms(|s/rms(s)|^3)), rms including the 1/N factor.

    The 1/N in the inner rms anchors a constant-envelope signal at 0 dB;
    the outer rms normalization cancels either way.
    """
    s = np.asarray(samples).ravel()
    if s.size == 0:
        raise ValueError("empty sample sequence")
    p = np.abs(s) ** 2
    r2 = p.mean()
    return float(20.0 * np.log10(np.sqrt(np.mean((p / r2) ** 3))))


@dataclass
class CcdfCurve:
    thresholds_db: np.ndarray = field(repr=False)
    ccdf: np.ndarray = field(repr=False)
    trials: int = 0
    seed: int = 0
    quantiles_db: dict = field(default_factory=dict)


def quantile_db(values_db: np.ndarray, level: float) -> float:
    """Threshold t with empirical CCDF(t) = level, linear in dB."""
    return float(np.quantile(np.asarray(values_db), 1.0 - level))


def ccdf(generator, trials: int, levels, seed: int = 0) -> CcdfCurve:
    """Empirical CCDF of per-trial values produced by ``generator(trials)``.

    Warns when trials < 10/min(level) (too few exceedances for a stable
    readout). Deterministic for a deterministic generator.
    """
    levels = sorted(float(l) for l in levels)
    if trials < 1:
        raise ValueError("trials must be >= 1")
    if levels and trials < 10.0 / min(levels):
        warnings.warn(
            f"{trials} trials is below the ~{int(10 / min(levels))} needed for "
            f"a stable {min(levels):g} CCDF readout",
            stacklevel=2,
        )
    values = np.sort(np.asarray(generator(trials), dtype=float))
    if values.size != trials:
        raise ValueError("generator returned the wrong number of values")
    lo = np.floor(values[0] / CCDF_GRID_STEP_DB) * CCDF_GRID_STEP_DB
    thresholds = np.arange(lo, values[-1] + CCDF_GRID_STEP_DB, CCDF_GRID_STEP_DB)
    exceed = trials - np.searchsorted(values, thresholds, side="right")
    curve = exceed / trials
    quantiles = {lvl: quantile_db(values, lvl) for lvl in levels}
    return CcdfCurve(
        thresholds_db=thresholds,
        ccdf=curve,
        trials=trials,
        seed=seed,
        quantiles_db=quantiles,
    )


def papr_trial_values(
    c: Constellation,
    cfg: WaveformConfig,
    w: FdssWindow,
    trials: int,
    rng: np.random.Generator,
    definition: str = "statistical",
    n_symbols: int = 1,
    include_cp: bool | None = None,
    batch: int = DEFAULT_BATCH,
    dtype=np.complex64,
) -> np.ndarray:
    """Per-trial PAPR values [dB] from seeded Monte Carlo.

    One trial is one OFDM symbol (statistical) or a signal of n_symbols
    CP-OFDM symbols (instantaneous; CP included by default when
    n_symbols > 1). Labels are always drawn nsc wide and truncated to
    ndata, so draws stay aligned across extension sizes for common-random-
    number sweeps.
    """
    if definition not in ("statistical", "instantaneous"):
        raise ValueError(f"unknown PAPR definition: {definition!r}")
    if definition == "statistical" and n_symbols != 1:
        raise ValueError("the statistical definition is per single OFDM symbol")
    if include_cp is None:
        include_cp = n_symbols > 1
    rot = index_rotation(c, cfg.ndata, dtype)
    points = c.points.astype(dtype)
    out = np.empty(trials)
    done = 0
    while done < trials:
        b = min(batch, trials - done)
        labels = rng.integers(0, len(points), size=(b * n_symbols, cfg.nsc))
        x = points[labels[:, : cfg.ndata]] * rot
        s = modulate_batch(cfg, w, x, dtype=dtype)
        if n_symbols > 1:
            s = s.reshape(b, n_symbols, cfg.nfft)
        if include_cp:
            s = add_cyclic_prefix(s, cfg.ncp)
        if n_symbols > 1:
            s = s.reshape(b, -1)
        p = s.real**2 + s.imag**2
        peak = p.max(axis=-1).astype(np.float64)
        if definition == "statistical":
            out[done : done + b] = 10.0 * np.log10(peak * (cfg.nfft / cfg.nsc))
        else:
            mean = p.mean(axis=-1, dtype=np.float64)
            out[done : done + b] = 10.0 * np.log10(peak / mean)
        done += b
    return out
